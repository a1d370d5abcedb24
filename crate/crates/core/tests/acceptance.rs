//! Acceptance criteria 1 to 9. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use cjtk::codec::{self, encode, minified_size, parse, serialize, Format};
use cjtk::extensions::{load_extension, validate_extended};
use cjtk::geoprocess::{dequantize, instantiate_template, quantize, quantize_with, QuantizationParams};
use cjtk::gml::import_citygml;
use cjtk::model::*;
use cjtk::ops::{merge, partition, IdPolicy, PartitionStrategy};
use cjtk::synth::{generate, to_citygml, SynthParams};
use cjtk::validator::{validate, validate_model};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Outcome = Result<String, String>;

fn check(cond: bool, pass: String, fail: String) -> Outcome {
    if cond {
        Ok(pass)
    } else {
        Err(fail)
    }
}

// ---------------------------------------------------------------------------
// 1. round-trip

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut files = common::json_corpus();
    for seed in 1..=3 {
        let m = generate(&SynthParams::with_seed(seed));
        files.push((format!("synthetic-{seed}"), serialize(&m, Format::Minified).into_bytes()));
    }
    let samples = files.iter().filter(|(n, _)| n.starts_with("sample_")).count();
    for (name, bytes) in &files {
        let (m1, _) = parse(bytes).map_err(|e| format!("{name}: {e}"))?;
        let text = serialize(&m1, Format::Minified);
        let (m2, _) = parse(text.as_bytes()).map_err(|e| format!("{name} (re-parse): {e}"))?;
        if m1 != m2 {
            return Err(format!("{name}: models differ after round-trip"));
        }
        let (m3, _) = parse(serialize(&m1, Format::Pretty).as_bytes()).map_err(|e| format!("{name} (pretty): {e}"))?;
        if m1 != m3 {
            return Err(format!("{name}: pretty round-trip differs"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        files.len() >= 20 && secs < 5.0,
        format!("{} files ({samples} sample snippets, 3 synthetic), {secs:.2} s", files.len()),
        format!("{} files in {secs:.2} s", files.len()),
    )
}

// ---------------------------------------------------------------------------
// 2. quantization bound

fn random_model(rng: &mut ChaCha8Rng) -> CityModel {
    let magnitude = [1.0, 1e3, 1e5, 1e6][rng.gen_range(0..4)];
    let n = rng.gen_range(1..40);
    let mut m = CityModel::new();
    m.vertices = (0..n)
        .map(|_| [0; 3].map(|_| rng.gen_range(-magnitude..magnitude)))
        .collect();
    let mut co = CityObject::new("GenericCityObject");
    co.geometry.push(Geometry::new(
        GeometryKind::MultiPoint,
        1.0,
        Nested::from_indices(&(0..n).collect::<Vec<_>>()),
    ));
    m.city_objects.insert("g".into(), co);
    m
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let per_digit = 1000;
    let mut worst: f64 = 0.0;
    for d in 1..=3u32 {
        let bound = 0.5 * 10f64.powi(-(d as i32));
        for _ in 0..per_digit {
            let m = random_model(&mut rng);
            let q = quantize(&m, QuantizationParams::digits(d)).map_err(|e| e.to_string())?;
            let back = dequantize(&q).map_err(|e| e.to_string())?;
            let t = q.transform.clone().unwrap();
            for (a, b) in m.vertices.iter().zip(&back.vertices) {
                for k in 0..3 {
                    let err = (a[k] - b[k]).abs();
                    // rounding slack of the f64 arithmetic around large values
                    let slack = 16.0 * f64::EPSILON * (a[k].abs() + t.translate[k].abs() + 1.0);
                    if err > bound + slack {
                        return Err(format!("d={d}: {} -> {} (error {err:e})", a[k], b[k]));
                    }
                    worst = worst.max(err / bound);
                }
            }
            let again = quantize_with(&back, &t).map_err(|e| e.to_string())?;
            if again.vertices != q.vertices {
                return Err(format!("d={d}: integer re-quantization is not a fixed point"));
            }
        }
    }
    Ok(format!("{} models (d = 1, 2, 3), worst error {worst:.4} of the bound, fixed point holds", 3 * per_digit))
}

// ---------------------------------------------------------------------------
// 3. quantization saving

fn criterion_3() -> Outcome {
    let m = generate(&SynthParams {
        seed: 3,
        rows: 40,
        buildings_per_row: 40,
        trees_per_row: 10,
        part_every: 4,
    });
    let q = quantize(&m, QuantizationParams::digits(3)).map_err(|e| e.to_string())?;
    let (a, b) = (minified_size(&m), minified_size(&q));
    let saving = 100.0 * (a - b) as f64 / a as f64;
    let msg = format!("{} vertices, {a} -> {b} bytes, {saving:.2}% smaller", m.vertices.len());
    check(m.vertices.len() >= 10_000 && (3.0..=20.0).contains(&saving), msg.clone(), msg)
}

// ---------------------------------------------------------------------------
// 4. seeded defects

const CONSISTENCY: [&str; 5] = [
    "PARENT_CHILD_MISMATCH",
    "DUPLICATE_ID",
    "VERTEX_INDEX_OUT_OF_RANGE",
    "SEMANTICS_SHAPE_MISMATCH",
    "DUPLICATE_VERTEX",
];
const STRUCTURAL: [&str; 5] = ["BAD_GEOMETRY_SHAPE", "UNKNOWN_COTYPE", "MISSING_LOD", "BAD_TRANSFORM", "BAD_CRS"];

fn control(seed: u64) -> CityModel {
    let m = generate(&SynthParams {
        seed,
        rows: 2,
        buildings_per_row: 5,
        trees_per_row: 2,
        part_every: 3,
    });
    quantize(&m, QuantizationParams::digits(3)).unwrap()
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> &'a T {
    &items[rng.gen_range(0..items.len())]
}

fn ids_where(m: &CityModel, f: impl Fn(&CityObject) -> bool) -> Vec<String> {
    m.city_objects.iter().filter(|(_, c)| f(c)).map(|(id, _)| id.clone()).collect()
}

fn leaves_mut<'a>(v: &'a mut Value, out: &mut Vec<&'a mut Value>) {
    match v {
        Value::Array(a) => a.iter_mut().for_each(|x| leaves_mut(x, out)),
        n @ Value::Number(_) => out.push(n),
        _ => {}
    }
}

fn mutate(code: &str, m: &CityModel, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut v = encode(m);
    let solids = ids_where(m, |c| c.geometry.iter().any(|g| g.kind == GeometryKind::Solid));
    match code {
        "PARENT_CHILD_MISMATCH" => {
            let id = pick(rng, &ids_where(m, |c| !c.children().is_empty())).clone();
            v["CityObjects"][&id]["children"].as_array_mut().unwrap().pop();
        }
        "DUPLICATE_ID" => {
            let ids: Vec<String> = m.city_objects.keys().cloned().collect();
            let id = pick(rng, &ids).clone();
            let copy = v["CityObjects"][&id].to_string();
            let text = v.to_string();
            let at = text.find("\"CityObjects\":{").unwrap() + "\"CityObjects\":{".len();
            return format!("{}{}:{copy},{}", &text[..at], Value::from(id), &text[at..]).into_bytes();
        }
        "VERTEX_INDEX_OUT_OF_RANGE" => {
            let id = pick(rng, &solids).clone();
            let mut leaves = Vec::new();
            leaves_mut(&mut v["CityObjects"][&id]["geometry"][0]["boundaries"], &mut leaves);
            let k = rng.gen_range(0..leaves.len());
            *leaves[k] = json!(m.vertices.len() + rng.gen_range(0..100));
        }
        "SEMANTICS_SHAPE_MISMATCH" => {
            let id = pick(rng, &solids).clone();
            v["CityObjects"][&id]["geometry"][0]["semantics"]["values"][0]
                .as_array_mut()
                .unwrap()
                .pop();
        }
        "DUPLICATE_VERTEX" => {
            let id = pick(rng, &solids).clone();
            let mut leaves = Vec::new();
            leaves_mut(&mut v["CityObjects"][&id]["geometry"][0]["boundaries"], &mut leaves);
            // box corners are used by three faces, so redirecting one use leaves no orphan
            let k = rng.gen_range(0..leaves.len());
            let old = leaves[k].as_u64().unwrap() as usize;
            *leaves[k] = json!(m.vertices.len());
            let copy = v["vertices"][old].clone();
            v["vertices"].as_array_mut().unwrap().push(copy);
        }
        "BAD_GEOMETRY_SHAPE" => {
            let id = pick(rng, &solids).clone();
            let g = &mut v["CityObjects"][&id]["geometry"][0];
            g["boundaries"] = g["boundaries"][0].clone();
        }
        "UNKNOWN_COTYPE" => {
            let ids: Vec<String> = m.city_objects.keys().cloned().collect();
            let id = pick(rng, &ids).clone();
            let bad = pick(rng, &["Buidling", "building", "Tree", "NoiseBarrier", "Road2"]).to_string();
            v["CityObjects"][&id]["type"] = json!(bad);
        }
        "MISSING_LOD" => {
            let id = pick(rng, &ids_where(m, |c| c.geometry.iter().any(|g| g.lod.is_some()))).clone();
            v["CityObjects"][&id]["geometry"][0].as_object_mut().unwrap().remove("lod");
        }
        "BAD_TRANSFORM" => {
            let k = rng.gen_range(0..3);
            let bad = pick(rng, &[0.0, -0.001, -1.0]);
            v["transform"]["scale"][k] = json!(bad);
        }
        "BAD_CRS" => {
            let bad = pick(rng, &["urn:ogc:def:crs:OGC:1.3:CRS84", "local grid", "EPSG:", "RD New"]).to_string();
            v["metadata"]["referenceSystem"] = json!(bad);
        }
        other => panic!("no mutation for {other}"),
    }
    v.to_string().into_bytes()
}

fn criterion_4() -> Outcome {
    let controls: Vec<CityModel> = (0..20).map(|i| control(400 + i)).collect();
    let mut false_control = 0;
    for c in &controls {
        let r = validate(serialize(c, Format::Minified).as_bytes());
        if !r.is_empty() {
            false_control += 1;
        }
    }
    let mut detected = 0;
    let mut extra = Vec::new();
    let mut total = 0;
    for code in CONSISTENCY.iter().chain(&STRUCTURAL) {
        let mut rng = ChaCha8Rng::seed_from_u64(code.len() as u64 * 7919);
        for (i, c) in controls.iter().enumerate() {
            total += 1;
            let bytes = mutate(code, c, &mut rng);
            let r = validate(&bytes);
            let codes: BTreeSet<&str> = r.findings().map(|f| f.code.as_str()).collect();
            if codes.contains(code) {
                detected += 1;
            }
            if codes.iter().any(|c| c != code) {
                extra.push(format!("{code} #{i}: {codes:?}"));
            }
        }
    }
    let msg = format!(
        "{detected}/{total} defects detected across 10 codes, {} mutated files with unexpected findings, {false_control}/20 controls with findings",
        extra.len()
    );
    check(
        detected == total && extra.is_empty() && false_control == 0,
        msg.clone(),
        format!("{msg}; first: {:?}", extra.first()),
    )
}

// ---------------------------------------------------------------------------
// 5. partition / merge identity

fn criterion_5() -> Outcome {
    let mut lines = Vec::new();
    let base = generate(&SynthParams {
        seed: 5,
        rows: 8,
        buildings_per_row: 10,
        trees_per_row: 4,
        part_every: 4,
    });
    let quantized = quantize(&base, QuantizationParams::digits(3)).unwrap();
    let scale = 0.001;
    for (label, m) in [("real", &base), ("quantized", &quantized)] {
        let original = minified_size(m);
        for strategy in [
            PartitionStrategy::Grid { nx: 3, ny: 3 },
            PartitionStrategy::ByType,
            PartitionStrategy::Random { k: 5, seed: 11 },
        ] {
            let parts = partition(m, &strategy).map_err(|e| e.to_string())?;
            let sizes: usize = parts.iter().map(|p| minified_size(&p.model)).sum();
            let models: Vec<CityModel> = parts.into_iter().map(|p| p.model).collect();
            let merged = merge(&models, IdPolicy::Error).map_err(|e| e.to_string())?;
            common::equivalent(&merged, m, 0.5 * scale).map_err(|e| format!("{label} {strategy:?}: {e}"))?;
            let ratio = sizes as f64 / original as f64;
            if ratio > 1.10 {
                return Err(format!("{label} {strategy:?}: parts are {ratio:.3}x the original"));
            }
            lines.push(format!("{ratio:.3}"));
        }
    }
    Ok(format!(
        "grid, byType, random on real and quantized scenes merge back; part size ratios {}",
        lines.join(", ")
    ))
}

// ---------------------------------------------------------------------------
// 6. template instantiation

/// Homogeneous 4x4 product `M . [p, 1]`, written out independently.
fn oracle(m: &[f64; 16], p: &[f64; 3], r: &[f64; 3]) -> [f64; 3] {
    let h = [p[0], p[1], p[2], 1.0];
    let mut out = [0.0; 4];
    for (row, o) in out.iter_mut().enumerate() {
        for (col, hv) in h.iter().enumerate() {
            *o += m[row * 4 + col] * hv;
        }
    }
    [out[0] / out[3] + r[0], out[1] / out[3] + r[1], out[2] / out[3] + r[2]]
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for trial in 0..500 {
        let nv = rng.gen_range(3..12);
        let tverts: Vec<Vertex> = (0..nv).map(|_| [0; 3].map(|_| rng.gen_range(-10.0..10.0))).collect();
        let ring: Vec<usize> = (0..nv).collect();
        let template = Geometry::new(
            GeometryKind::MultiSurface,
            2.0,
            Nested::list(vec![Nested::list(vec![Nested::from_indices(&ring)])]),
        );
        let mut matrix = [0.0; 16];
        for x in matrix.iter_mut().take(12) {
            *x = rng.gen_range(-10.0..10.0);
        }
        matrix[15] = 1.0;
        let mut m = CityModel::new();
        let reference = [0; 3].map(|_| rng.gen_range(0.0..100_000.0));
        if trial % 2 == 0 {
            m.vertices.push(reference);
        } else {
            let t = Transform {
                scale: [0.001; 3],
                translate: [484_000.0, 5_482_000.0, 300.0],
            };
            m.vertices.push([0, 1, 2].map(|k| ((reference[k] - t.translate[k]) / 0.001).round()));
            m.transform = Some(t);
        }
        let real_ref = real_world_vertex(&m, 0).unwrap();
        m.geometry_templates = Some(TemplateBank {
            templates: vec![template.clone()],
            vertices: tverts.clone(),
        });
        let mut co = CityObject::new("CityFurniture");
        co.geometry.push(Geometry::instance(0, 0, matrix));
        m.city_objects.insert("x".into(), co);

        let inst = instantiate_template(&m, "x", 0).map_err(|e| e.to_string())?;
        let got: Vec<&usize> = inst.geometry.boundaries.leaves();
        let want: Vec<&usize> = template.boundaries.leaves();
        for (g, w) in got.iter().zip(&want) {
            let o = oracle(&matrix, &tverts[**w], &real_ref);
            let v = inst.vertices[**g];
            for k in 0..3 {
                let err = (o[k] - v[k]).abs();
                worst = worst.max(err);
                if err > 1e-9 {
                    return Err(format!("trial {trial}: {v:?} vs oracle {o:?}"));
                }
            }
        }
    }

    // the diag(2) matrix from the templates snippet
    let (m, _) = parse(&common::read("sample_templates.json")).map_err(|e| e.to_string())?;
    let inst = instantiate_template(&m, "tree", 0).map_err(|e| e.to_string())?;
    let r = m.vertices[372];
    let bank = m.geometry_templates.as_ref().unwrap();
    for (g, w) in inst.geometry.boundaries.leaves().iter().zip(bank.templates[0].boundaries.leaves()) {
        let p = bank.vertices[*w];
        let expected = [2.0 * p[0] + r[0], 2.0 * p[1] + r[1], 2.0 * p[2] + r[2]];
        if inst.vertices[**g] != expected {
            return Err(format!("diag(2): {:?} vs {expected:?}", inst.vertices[**g]));
        }
    }
    Ok(format!("500 random instances, worst error {worst:.1e}; diag(2) case exact"))
}

// ---------------------------------------------------------------------------
// 7. GML variant convergence

/// Unit cube Building built by hand: faces in solid order, vertices pooled
/// by first use, one semantic surface per face.
fn expected_cube() -> CityModel {
    let v: [Vertex; 8] = [
        [0., 0., 0.],
        [1., 0., 0.],
        [1., 1., 0.],
        [0., 1., 0.],
        [0., 0., 1.],
        [1., 0., 1.],
        [1., 1., 1.],
        [0., 1., 1.],
    ];
    let faces = [[0, 3, 2, 1], [4, 5, 6, 7], [0, 1, 5, 4], [1, 2, 6, 5], [2, 3, 7, 6], [3, 0, 4, 7]];
    let kinds = ["GroundSurface", "RoofSurface", "WallSurface", "WallSurface", "WallSurface", "WallSurface"];
    let mut m = CityModel::new();
    let mut pool: Vec<Vertex> = Vec::new();
    let mut surfaces = Vec::new();
    for f in faces {
        let ring: Vec<usize> = f
            .iter()
            .map(|&i| match pool.iter().position(|p| *p == v[i]) {
                Some(k) => k,
                None => {
                    pool.push(v[i]);
                    pool.len() - 1
                }
            })
            .collect();
        surfaces.push(Nested::list(vec![Nested::from_indices(&ring)]));
    }
    let mut g = Geometry::new(GeometryKind::Solid, 2.0, Nested::list(vec![Nested::list(surfaces)]));
    g.semantics = Some(Semantics {
        surfaces: kinds.iter().map(|k| SemanticSurface::new(*k)).collect(),
        values: Nested::list(vec![Nested::list((0..6).map(|i| Nested::Leaf(Some(i))).collect())]),
    });
    let mut co = CityObject::new("Building");
    co.geometry.push(g);
    m.city_objects.insert("B1".into(), co);
    m.vertices = pool;
    m.metadata = Some(Metadata {
        reference_system: Some("urn:ogc:def:crs:EPSG::7415".into()),
        ..Default::default()
    });
    m
}

fn criterion_7() -> Outcome {
    let mut counts = Vec::new();
    for (shape, expected) in [("square_", None), ("cube_", Some(expected_cube()))] {
        let files = common::gml_variants(shape);
        let mut first: Option<(String, CityModel)> = None;
        for (name, bytes) in &files {
            let (m, _) = import_citygml(bytes).map_err(|e| format!("{name}: {e}"))?;
            let r = validate_model(&m);
            if !r.is_valid() {
                return Err(format!("{name}: imported model has errors:\n{r}"));
            }
            match &first {
                None => first = Some((name.clone(), m)),
                Some((f, fm)) if *fm != m => return Err(format!("{name} differs from {f}")),
                _ => {}
            }
        }
        if let (Some(e), Some((f, fm))) = (&expected, &first) {
            if e != fm {
                return Err(format!("{f} differs from the hand-built cube"));
            }
        }
        counts.push(files.len());
    }
    let twin = |n: &str| import_citygml(&std::fs::read(common::data_dir().join("gml").join(n)).unwrap()).unwrap().0;
    if twin("cube_12_inlined_twin.gml") != twin("cube_01_solid_links_semantic_poslist.gml") {
        return Err("inlined twin differs from the XLink'd file".into());
    }
    check(
        counts.iter().sum::<usize>() >= 12,
        format!(
            "{} square and {} cube variants each converge; cube equals the hand-built model; inlined twin equals XLink'd twin",
            counts[0], counts[1]
        ),
        format!("only {:?} variants", counts),
    )
}

// ---------------------------------------------------------------------------
// 8. compactness against CityGML

fn criterion_8() -> Outcome {
    let m = generate(&SynthParams {
        seed: 8,
        rows: 10,
        buildings_per_row: 12,
        trees_per_row: 5,
        part_every: 4,
    });
    let gml = to_citygml(&m);
    let q = quantize(&m, QuantizationParams::digits(3)).map_err(|e| e.to_string())?;
    let json = minified_size(&q);
    let ratio = gml.len() as f64 / json as f64;
    let msg = format!("CityGML {} bytes, quantized CityJSON {json} bytes, factor {ratio:.2}", gml.len());
    check(ratio >= 3.0, msg.clone(), msg)
}

// ---------------------------------------------------------------------------
// 9. extension suite

fn criterion_9() -> Outcome {
    let ext_text = String::from_utf8(common::read("noise_extension.json")).unwrap();
    let model_text = String::from_utf8(common::read("sample_noise_building.json")).unwrap();
    let ext = load_extension(ext_text.as_bytes()).map_err(|e| e.to_string())?;
    let (model, _) = parse(model_text.as_bytes()).map_err(|e| e.to_string())?;
    let base = validate_extended(&model, std::slice::from_ref(&ext));
    if !base.is_empty() {
        return Err(format!("noise example has findings:\n{base}"));
    }

    let edit = |f: &dyn Fn(&mut Value)| {
        let mut v = codec::encode(&model);
        f(&mut v);
        let (m, _) = codec::decode(&v).unwrap();
        m
    };
    let model_cases: Vec<(&str, &str, CityModel)> = vec![
        ("undeclared city object type", "UNDECLARED_EXTENSION_MEMBER", edit(&|v| {
            v["CityObjects"]["nb-1"] = json!({"type": "+NoiseBarrier", "geometry": []});
        })),
        ("misspelt attribute", "UNDECLARED_EXTENSION_MEMBER", edit(&|v| {
            let a = v["CityObjects"]["id-1234"]["attributes"].as_object_mut().unwrap();
            let x = a.remove("+noise-buildingReflection").unwrap();
            a.insert("+noise-buildingRelection".into(), x);
        })),
        ("value as string", "TYPE_MISMATCH", edit(&|v| {
            v["CityObjects"]["id-1234"]["attributes"]["+noise-buildingReflectionCorrection"]["value"] = json!("4.1");
        })),
        ("uom as number", "TYPE_MISMATCH", edit(&|v| {
            v["CityObjects"]["id-1234"]["attributes"]["+noise-buildingReflectionCorrection"]["uom"] = json!(3);
        })),
        ("string attribute as number", "TYPE_MISMATCH", edit(&|v| {
            v["CityObjects"]["id-1234"]["attributes"]["+noise-buildingReflection"] = json!(5);
        })),
        ("geometry inside an extension attribute", "MISPLACED_GEOMETRY", edit(&|v| {
            v["CityObjects"]["id-1234"]["attributes"]["+noise-buildingReflectionCorrection"]["boundaries"] =
                json!([[[0, 1, 2]]]);
        })),
        ("geometry inside a core attribute", "MISPLACED_GEOMETRY", edit(&|v| {
            v["CityObjects"]["id-1234"]["attributes"]["facade"] =
                json!({"type": "MultiSurface", "lod": 2, "boundaries": [[[0, 1, 2]]]});
        })),
        ("declared extension not provided", "MISSING_EXTENSION_SCHEMA", edit(&|v| {
            v["extensions"]["Solar"] = json!({"url": "https://someurl.org/solar.json", "version": "1.0"});
        })),
        ("new type without +", "UNKNOWN_COTYPE", edit(&|v| {
            v["CityObjects"]["nb-1"] = json!({"type": "NoiseBarrier", "geometry": []});
        })),
    ];
    let mut results = Vec::new();
    for (label, code, m) in &model_cases {
        let r = validate_extended(m, std::slice::from_ref(&ext));
        let codes: Vec<&str> = r.findings().map(|f| f.code.as_str()).collect();
        if codes != [*code] {
            return Err(format!("{label}: expected [{code}], got {codes:?}"));
        }
        results.push(*code);
    }

    let ext_cases = [
        (
            "attribute without +",
            "BAD_PLUS_PREFIX",
            ext_text.replace("\"+noise-buildingReflection\"", "\"noise-buildingReflection\""),
        ),
        (
            "city object without +",
            "BAD_PLUS_PREFIX",
            ext_text.replace(
                "\"extraCityObjects\": {}",
                r#""extraCityObjects": {"NoiseBarrier": {"type": "object", "required": ["type", "geometry"]}}"#,
            ),
        ),
        (
            "city object without geometry rule",
            "MISSING_GEOMETRY_RULE",
            ext_text.replace(
                "\"extraCityObjects\": {}",
                r#""extraCityObjects": {"+NoiseBarrier": {"type": "object", "required": ["type"]}}"#,
            ),
        ),
    ];
    for (label, code, text) in &ext_cases {
        match load_extension(text.as_bytes()) {
            Err(e) if e.code() == *code => results.push(*code),
            other => return Err(format!("{label}: expected {code}, got {other:?}")),
        }
    }
    check(
        results.len() >= 10,
        format!("noise example: 0 findings; {} mutations each give exactly the expected code", results.len()),
        format!("only {} mutations", results.len()),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("round-trip", criterion_1),
        ("quantization bound", criterion_2),
        ("quantization saving", criterion_3),
        ("validator seeded defects", criterion_4),
        ("partition/merge identity", criterion_5),
        ("template instantiation", criterion_6),
        ("GML variant convergence", criterion_7),
        ("compactness vs CityGML", criterion_8),
        ("extension suite", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {} {name}: PASS ({msg}) [{secs:.2} s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({msg}) [{secs:.2} s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
