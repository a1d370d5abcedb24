//! A synthetic scene end to end: generate, export to CityGML, import it
//! again, compress, refresh metadata, and compare sizes.
//!
//! cargo run --example pipeline [SEED]

use cjtk::codec::{minified_size, serialize, Format};
use cjtk::geoprocess::{quantize, QuantizationParams};
use cjtk::gml::import_citygml;
use cjtk::ops::{refresh_metadata, stats, update_texture_paths};
use cjtk::synth::{generate, to_citygml, SynthParams};
use cjtk::validator::validate_model;

fn main() -> cjtk::Result<()> {
    let seed = std::env::args().nth(1).map_or(1, |s| s.parse().expect("a numeric seed"));
    let model = generate(&SynthParams::with_seed(seed));
    let gml = to_citygml(&model);

    let (imported, report) = import_citygml(gml.as_bytes())?;
    println!("imported {:?}, {} polygons", report.features, report.polygons);

    let compact = refresh_metadata(&quantize(&imported, QuantizationParams::digits(3))?);
    let compact = update_texture_paths(&compact, "https://example.org/textures/");
    assert!(validate_model(&compact).is_valid());

    let s = stats(&compact);
    println!("{s:?}");
    println!(
        "CityGML {} bytes, CityJSON {} bytes, quantized {} bytes ({:.1}x smaller than CityGML)",
        gml.len(),
        minified_size(&imported),
        minified_size(&compact),
        gml.len() as f64 / minified_size(&compact) as f64
    );
    let meta = serialize(&compact, Format::Pretty);
    let start = meta.find("\"metadata\"").unwrap_or(0);
    println!("{}", &meta[start..meta.len().min(start + 400)]);
    Ok(())
}
