//! Split a model into tiles, by type, and at random; merge the parts back;
//! take a subset.
//!
//! cargo run --example partition_merge

use cjtk::codec::minified_size;
use cjtk::ops::{merge, partition, subset, IdPolicy, PartitionStrategy, Selector};
use cjtk::synth::{generate, SynthParams};

fn main() -> cjtk::Result<()> {
    let model = generate(&SynthParams {
        rows: 6,
        buildings_per_row: 8,
        ..SynthParams::default()
    });
    let size = minified_size(&model);
    println!("{} objects, {size} bytes", model.city_objects.len());

    for strategy in [
        PartitionStrategy::Grid { nx: 2, ny: 3 },
        PartitionStrategy::ByType,
        PartitionStrategy::Random { k: 4, seed: 7 },
    ] {
        let parts = partition(&model, &strategy)?;
        let total: usize = parts.iter().map(|p| minified_size(&p.model)).sum();
        println!("{strategy:?}: {} parts, {total} bytes in total", parts.len());
        for p in &parts {
            println!("  {:<10} {:>3} objects {:>5} vertices", p.id, p.model.city_objects.len(), p.model.vertices.len());
        }
        let models: Vec<_> = parts.into_iter().map(|p| p.model).collect();
        let merged = merge(&models, IdPolicy::Error)?;
        assert_eq!(merged.city_objects.len(), model.city_objects.len());
    }

    let roads = subset(&model, &Selector::Types(vec!["Road".into()]))?;
    println!("roads only: {} objects, {} vertices", roads.city_objects.len(), roads.vertices.len());

    // merging a model with itself needs fresh ids
    let twice = merge(&[roads.clone(), roads], IdPolicy::Suffix)?;
    println!("roads merged twice with suffixed ids: {:?}", twice.city_objects.keys().take(4).collect::<Vec<_>>());
    Ok(())
}
