//! Quantize vertices to integers with a transform, compare sizes, and undo it.
//!
//! cargo run --example compress [DIGITS]

use cjtk::codec::minified_size;
use cjtk::geoprocess::{dedupe_vertices, dequantize, quantize, remove_orphan_vertices, QuantizationParams};
use cjtk::synth::{generate, SynthParams};

fn main() -> cjtk::Result<()> {
    let digits: u32 = std::env::args().nth(1).map_or(3, |d| d.parse().expect("a digit count"));
    let model = generate(&SynthParams {
        rows: 10,
        buildings_per_row: 20,
        ..SynthParams::default()
    });

    let q = quantize(&model, QuantizationParams::digits(digits))?;
    let t = q.transform.as_ref().unwrap();
    println!("scale {:?} translate {:?}", t.scale, t.translate);
    let (before, after) = (minified_size(&model), minified_size(&q));
    println!(
        "{} vertices: {before} -> {after} bytes ({:.1}% smaller)",
        model.vertices.len(),
        100.0 * (before - after) as f64 / before as f64
    );

    let back = dequantize(&q)?;
    let worst = model
        .vertices
        .iter()
        .zip(&back.vertices)
        .flat_map(|(a, b)| (0..3).map(move |k| (a[k] - b[k]).abs()))
        .fold(0.0, f64::max);
    println!("largest coordinate change after the round trip: {worst:.2e}");

    // Rounding can make distinct vertices coincide; merge them and drop leftovers.
    let tidy = remove_orphan_vertices(&dedupe_vertices(&q, 0.0));
    println!("after dedupe and clean: {} vertices, {} bytes", tidy.vertices.len(), minified_size(&tidy));
    Ok(())
}
