mod common;

use std::collections::BTreeMap;

use cjtk::gml::import_citygml;
use cjtk::model::GeometryKind;
use cjtk::synth::{generate, to_citygml, SynthParams};
use cjtk::validator::validate_model;
use roxmltree::Document;
use serde_json::Value;

const FEATURES: [&str; 4] = ["Building", "BuildingPart", "Road", "SolitaryVegetationObject"];
const SEMANTIC: [&str; 3] = ["GroundSurface", "RoofSurface", "WallSurface"];

/// Element counts by local name, straight from the XML tree.
fn tally(xml: &str) -> BTreeMap<String, usize> {
    let doc = Document::parse(xml).unwrap();
    let mut out = BTreeMap::new();
    for n in doc.descendants().filter(|n| n.is_element()) {
        *out.entry(n.tag_name().name().to_string()).or_default() += 1;
    }
    out
}

fn params(seed: u64) -> SynthParams {
    SynthParams {
        seed,
        rows: 3,
        buildings_per_row: 5,
        trees_per_row: 3,
        part_every: 2,
    }
}

#[test]
fn import_report_matches_element_counts() {
    for seed in 1..=4 {
        let xml = to_citygml(&generate(&params(seed)));
        let counts = tally(&xml);
        let (model, report) = import_citygml(xml.as_bytes()).unwrap();

        for kind in FEATURES {
            assert_eq!(report.features.get(kind).copied().unwrap_or(0), counts.get(kind).copied().unwrap_or(0), "{kind}");
        }
        assert_eq!(report.features.values().sum::<usize>(), model.city_objects.len());
        assert_eq!(report.polygons, counts["Polygon"]);
        let semantic: usize = SEMANTIC.iter().map(|k| counts.get(*k).copied().unwrap_or(0)).sum();
        assert_eq!(report.semantic_surfaces, semantic);
        assert!(report.skipped.is_empty(), "{:?}", report.skipped);
    }
}

#[test]
fn imported_scene_validates_and_keeps_structure() {
    let source = generate(&params(9));
    let (model, _) = import_citygml(to_citygml(&source).as_bytes()).unwrap();
    let r = validate_model(&model);
    assert!(r.is_empty(), "{r}");

    assert_eq!(model.city_objects.len(), source.city_objects.len());
    for (id, co) in &source.city_objects {
        let got = model.city_objects.get(id).unwrap_or_else(|| panic!("`{id}` missing"));
        assert_eq!(got.kind, co.kind, "{id}");
        let mut a: Vec<&String> = got.children().iter().collect();
        let mut b: Vec<&String> = co.children().iter().collect();
        a.sort();
        b.sort();
        assert_eq!(a, b, "{id}");
        let kinds = |c: &cjtk::model::CityObject| c.geometry.iter().map(|g| g.kind).collect::<Vec<GeometryKind>>();
        assert_eq!(kinds(got), kinds(co), "{id}");
    }
    assert_eq!(model.reference_system(), source.reference_system());
    let bank = model.geometry_templates.as_ref().expect("trees share one template");
    assert_eq!(bank.templates.len(), 1);
}

#[test]
fn imported_coordinates_match_the_source() {
    let source = generate(&params(11));
    let (model, _) = import_citygml(to_citygml(&source).as_bytes()).unwrap();
    let mut want: Vec<[u64; 3]> = source.vertices.iter().map(|v| v.map(f64::to_bits)).collect();
    let mut got: Vec<[u64; 3]> = model.vertices.iter().map(|v| v.map(f64::to_bits)).collect();
    want.sort();
    want.dedup();
    got.sort();
    assert_eq!(got, want);
}

#[test]
fn every_variant_imports_without_skips() {
    for (name, bytes) in common::gml_variants("") {
        let (_, report) = import_citygml(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(report.features.get("Building"), Some(&1), "{name}");
        assert!(report.skipped.is_empty(), "{name}: {:?}", report.skipped);
    }
}

/// Semantic values replaced by the surface objects they point to, so that
/// shared and per-surface semantic objects compare equal.
fn resolve_semantics(v: &mut Value) {
    fn expand(values: &Value, surfaces: &[Value]) -> Value {
        match values {
            Value::Array(a) => Value::Array(a.iter().map(|x| expand(x, surfaces)).collect()),
            Value::Number(n) => surfaces[n.as_u64().unwrap() as usize].clone(),
            other => other.clone(),
        }
    }
    for g in v["geometry"].as_array_mut().unwrap() {
        if let Some(sem) = g.get_mut("semantics") {
            let surfaces = sem["surfaces"].as_array().unwrap().clone();
            *sem = expand(&sem["values"], &surfaces);
        }
    }
}

#[test]
fn imported_scene_matches_the_source_scene() {
    let source = generate(&params(11));
    let (model, _) = import_citygml(to_citygml(&source).as_bytes()).unwrap();
    let (a, b) = (common::canonical(&model), common::canonical(&source));
    assert_eq!(a.len(), b.len());
    for (id, va) in a {
        let (mut va, mut vb) = (va, b[&id].clone());
        resolve_semantics(&mut va);
        resolve_semantics(&mut vb);
        assert!(common::approx_eq(&va, &vb, 0.0), "{id}:\n{va}\n{vb}");
    }
}
