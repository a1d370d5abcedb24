mod common;

use std::collections::HashSet;

use cjtk::codec::{parse, serialize, Format};
use cjtk::extensions::strip_extensions;
use cjtk::geoprocess::{dedupe_vertices, dequantize, quantize, QuantizationParams};
use cjtk::model::*;
use cjtk::ops::{merge, partition, subset, IdPolicy, PartitionStrategy, Selector};
use cjtk::synth::{generate, SynthParams};
use cjtk::validator::validate_model;
use proptest::prelude::*;
use serde_json::json;

fn scene() -> impl Strategy<Value = CityModel> {
    (any::<u64>(), 1usize..4, 1usize..6, 0usize..4, 1usize..5).prop_map(|(seed, rows, b, t, every)| {
        generate(&SynthParams {
            seed,
            rows,
            buildings_per_row: b,
            trees_per_row: t,
            part_every: every,
        })
    })
}

fn coordinate() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, -10.0..10.0f64, Just(0.0), (-1000i64..1000).prop_map(|i| i as f64 / 8.0)]
}

/// A MultiSurface of triangles over a random vertex pool, with repeats.
fn point_cloud() -> impl Strategy<Value = CityModel> {
    prop::collection::vec([coordinate(), coordinate(), coordinate()], 3..40).prop_flat_map(|pool| {
        let n = pool.len();
        prop::collection::vec(prop::collection::vec(0..n, 3), 1..20).prop_map(move |tris| {
            let mut m = CityModel::new();
            m.vertices = pool.clone();
            let surfaces = tris
                .iter()
                .map(|t| Nested::list(vec![Nested::from_indices(t)]))
                .collect();
            let mut co = CityObject::new("GenericCityObject");
            co.geometry
                .push(Geometry::new(GeometryKind::MultiSurface, 1.0, Nested::list(surfaces)));
            m.city_objects.insert("g".into(), co);
            m
        })
    })
}

fn strategy() -> impl Strategy<Value = PartitionStrategy> {
    prop_oneof![
        (1usize..5, 1usize..5).prop_map(|(nx, ny)| PartitionStrategy::Grid { nx, ny }),
        Just(PartitionStrategy::ByType),
        (1usize..6, any::<u64>()).prop_map(|(k, seed)| PartitionStrategy::Random { k, seed }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn serialization_round_trips(m in scene(), pretty in any::<bool>()) {
        let format = if pretty { Format::Pretty } else { Format::Minified };
        let (back, _) = parse(serialize(&m, format).as_bytes()).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn arbitrary_coordinates_round_trip(m in point_cloud()) {
        let (back, _) = parse(serialize(&m, Format::Minified).as_bytes()).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn quantization_stays_within_half_a_step(m in point_cloud(), d in 0u32..5) {
        let q = quantize(&m, QuantizationParams::digits(d)).unwrap();
        let back = dequantize(&q).unwrap();
        let half = 0.5 * 10f64.powi(-(d as i32));
        for (a, b) in m.vertices.iter().zip(&back.vertices) {
            for k in 0..3 {
                prop_assert!((a[k] - b[k]).abs() <= half + 1e-9 * (1.0 + a[k].abs()));
            }
        }
        prop_assert!(q.vertices.iter().flatten().all(|c| c.fract() == 0.0));
    }

    #[test]
    fn exact_dedupe_keeps_geometry_and_removes_repeats(m in point_cloud()) {
        let d = dedupe_vertices(&m, 0.0);
        prop_assert!(common::equivalent(&d, &m, 0.0).is_ok());
        let distinct: HashSet<[u64; 3]> = d.vertices.iter().map(|v| v.map(f64::to_bits)).collect();
        prop_assert_eq!(distinct.len(), d.vertices.len());
        prop_assert_eq!(dedupe_vertices(&d, 0.0), d);
    }

    #[test]
    fn tolerant_dedupe_moves_points_at_most_tolerance(m in point_cloud(), tol in 0.0..2.0f64) {
        let d = dedupe_vertices(&m, tol);
        prop_assert!(d.vertices.len() <= m.vertices.len());
        prop_assert!(common::equivalent(&d, &m, tol).is_ok());
    }

    #[test]
    fn subsets_are_valid_and_closed_under_children(m in scene(), pick in prop::collection::vec(any::<prop::sample::Index>(), 1..4)) {
        let ids: Vec<String> = m.city_objects.keys().cloned().collect();
        let chosen: Vec<String> = pick.iter().map(|i| i.get(&ids).clone()).collect();
        let s = subset(&m, &Selector::Ids(chosen.clone())).unwrap();
        prop_assert!(validate_model(&s).is_valid());
        prop_assert!(s.vertex_usage().iter().all(|&n| n > 0));
        for id in &chosen {
            prop_assert!(s.city_objects.contains_key(id));
        }
        for co in s.city_objects.values() {
            for child in co.children() {
                prop_assert!(s.city_objects.contains_key(child));
            }
        }
    }

    #[test]
    fn stripping_extensions_is_idempotent(m in scene(), extra in 0usize..3) {
        let mut m = m;
        for i in 0..extra {
            let mut co = CityObject::new(&format!("+Thing{i}"));
            co.geometry.push(Geometry::new(GeometryKind::MultiPoint, 1.0, Nested::from_indices(&[i])));
            m.city_objects.insert(format!("x{i}"), co);
            m.extra.insert(format!("+root{i}"), json!(i));
        }
        let once = strip_extensions(&m);
        prop_assert!(once.city_objects.values().all(|co| !co.kind.as_str().starts_with('+')));
        prop_assert!(once.extra.keys().all(|k| !k.starts_with('+')));
        prop_assert_eq!(strip_extensions(&once), once);
    }

    #[test]
    fn merging_a_partition_restores_the_model(m in scene(), s in strategy(), quantized in any::<bool>()) {
        let m = if quantized { quantize(&m, QuantizationParams::digits(3)).unwrap() } else { m };
        let parts = partition(&m, &s).unwrap();
        let models: Vec<CityModel> = parts.iter().map(|p| p.model.clone()).collect();
        let merged = merge(&models, IdPolicy::Error).unwrap();
        let outcome = common::equivalent(&merged, &m, 0.0005);
        prop_assert!(outcome.is_ok(), "{:?}", outcome);
    }

    #[test]
    fn partition_parts_are_compact_and_valid(m in scene(), s in strategy()) {
        let parts = partition(&m, &s).unwrap();
        let mut seen = HashSet::new();
        for p in &parts {
            prop_assert!(!p.model.city_objects.is_empty());
            prop_assert!(p.model.vertex_usage().iter().all(|&n| n > 0));
            prop_assert!(validate_model(&p.model).is_valid());
            for id in p.model.city_objects.keys() {
                prop_assert!(seen.insert(id.clone()), "{} in two parts", id);
            }
        }
        prop_assert_eq!(seen.len(), m.city_objects.len());
    }
}
