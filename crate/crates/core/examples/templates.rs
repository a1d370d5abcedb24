//! Place a geometry template in the world through its GeometryInstance.
//!
//! cargo run --example templates

use cjtk::codec::parse;
use cjtk::geoprocess::instantiate_template;
use cjtk::model::GeometryKind;

fn main() -> cjtk::Result<()> {
    let bytes = std::fs::read(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/sample_templates.json"))?;
    let (model, _) = parse(&bytes)?;
    let bank = model.geometry_templates.as_ref().expect("the file has templates");
    println!("{} template(s) over {} template vertices", bank.templates.len(), bank.vertices.len());

    for (id, co) in &model.city_objects {
        for (i, g) in co.geometry.iter().enumerate() {
            if g.kind != GeometryKind::GeometryInstance {
                continue;
            }
            let inst = g.instance.as_ref().unwrap();
            println!("{id}: template {} at vertex {}, matrix {:?}", inst.template, g.reference_point().unwrap(), inst.matrix);
            let placed = instantiate_template(&model, id, i)?;
            println!(
                "  -> {} with {} vertices, first {:?}",
                placed.geometry.kind.as_str(),
                placed.vertices.len(),
                placed.vertices.first()
            );
        }
    }
    Ok(())
}
