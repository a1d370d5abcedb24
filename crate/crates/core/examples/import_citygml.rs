//! Convert CityGML 2.0 to CityJSON and show the import report.
//!
//! cargo run --example import_citygml [FILE.gml]

use cjtk::codec::{serialize, Format};
use cjtk::gml::import_citygml;
use cjtk::validator::validate_model;

fn main() -> cjtk::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/gml/cube_01_solid_links_semantic_poslist.gml").into()
    });
    let (model, report) = import_citygml(&std::fs::read(&path)?)?;
    print!("{}", report.to_json_lines());
    println!("{}", validate_model(&model));
    println!("{}", serialize(&model, Format::Minified));
    Ok(())
}
