//! Read a CityJSON file, inspect it, and write it back minified and pretty.
//!
//! cargo run --example parse_serialize [FILE]

use cjtk::codec::{parse, serialize, Format};
use cjtk::model::real_world_vertex;

fn main() -> cjtk::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/sample_building_parts.json").into());
    let bytes = std::fs::read(&path)?;
    let (model, diagnostics) = parse(&bytes)?;
    if !diagnostics.is_empty() {
        println!("diagnostics: {diagnostics:?}");
    }

    println!("{path}: CityJSON {}", model.version);
    for (id, co) in &model.city_objects {
        let kinds: Vec<&str> = co.geometry.iter().map(|g| g.kind.as_str()).collect();
        println!("  {id:<24} {:<20} geometry {kinds:?} children {:?}", co.kind.as_str(), co.children());
    }
    if !model.vertices.is_empty() {
        println!("first vertex in real-world units: {:?}", real_world_vertex(&model, 0)?);
    }

    let minified = serialize(&model, Format::Minified);
    let pretty = serialize(&model, Format::Pretty);
    println!("minified {} bytes, pretty {} bytes", minified.len(), pretty.len());
    assert_eq!(parse(minified.as_bytes())?.0, model);
    Ok(())
}
