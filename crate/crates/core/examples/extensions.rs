//! Load an Extension schema and validate a model that uses it.
//!
//! cargo run --example extensions

use cjtk::codec::parse;
use cjtk::extensions::{load_extension_file, strip_extensions, validate_extended};

fn main() -> cjtk::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data");
    let ext = load_extension_file(format!("{dir}/noise_extension.json"))?;
    println!("extension {} {} ({})", ext.name, ext.version, ext.uri);
    println!("  attributes: {:?}", ext.extra_attributes.keys().collect::<Vec<_>>());

    let (model, _) = parse(&std::fs::read(format!("{dir}/sample_noise_building.json"))?)?;
    println!("without the schema:\n{}", validate_extended(&model, &[]));
    println!("with the schema:\n{}", validate_extended(&model, std::slice::from_ref(&ext)));

    let mut wrong = model.clone();
    let co = wrong.city_objects.values_mut().next().unwrap();
    co.attributes.insert("+noise-buildingReflection".into(), serde_json::json!(42));
    println!("with a number where a string is expected:\n{}", validate_extended(&wrong, std::slice::from_ref(&ext)));

    let core = strip_extensions(&model);
    println!("stripped to the core model:\n{}", validate_extended(&core, &[]));
    Ok(())
}
