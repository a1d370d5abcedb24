#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cjtk::codec::{encode_city_object, encode_geometry};
use cjtk::model::{real_world_vertex, CityModel, Nested};
use serde_json::Value;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn read(name: &str) -> Vec<u8> {
    std::fs::read(data_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// CityJSON files of the corpus, sorted by name.
pub fn json_corpus() -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(data_dir())
        .unwrap()
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .filter(|p| !p.file_name().unwrap().to_string_lossy().contains("extension"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

/// GML variant files whose names start with `prefix`, sorted.
pub fn gml_variants(prefix: &str) -> Vec<(String, Vec<u8>)> {
    let dir = data_dir().join("gml");
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(&dir)
        .unwrap()
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with(prefix))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn coords(model: &CityModel, b: &Nested<usize>) -> Value {
    match b {
        Nested::Leaf(i) => match real_world_vertex(model, *i) {
            Ok(v) => Value::from(v.to_vec()),
            Err(_) => Value::from(format!("missing vertex {i}")),
        },
        Nested::List(items) => Value::Array(items.iter().map(|x| coords(model, x)).collect()),
    }
}

fn template_coords(model: &CityModel, b: &Nested<usize>) -> Value {
    let verts = &model.geometry_templates.as_ref().unwrap().vertices;
    match b {
        Nested::Leaf(i) => Value::from(verts[*i].to_vec()),
        Nested::List(items) => Value::Array(items.iter().map(|x| template_coords(model, x)).collect()),
    }
}

/// Each city object as JSON with vertex indices replaced by real-world
/// coordinates, template references replaced by the template content, and
/// link lists sorted. Independent of object, vertex and template order.
pub fn canonical(model: &CityModel) -> BTreeMap<String, Value> {
    model
        .city_objects
        .iter()
        .map(|(id, co)| {
            let mut v = encode_city_object(co);
            for key in ["parents", "children"] {
                if let Some(Value::Array(a)) = v.get_mut(key) {
                    a.sort_by_key(|x| x.to_string());
                }
            }
            let geoms: Vec<Value> = co
                .geometry
                .iter()
                .map(|g| {
                    let mut gv = encode_geometry(g);
                    gv["boundaries"] = coords(model, &g.boundaries);
                    if let Some(inst) = &g.instance {
                        let t = &model.geometry_templates.as_ref().unwrap().templates[inst.template];
                        let mut tv = encode_geometry(t);
                        tv["boundaries"] = template_coords(model, &t.boundaries);
                        gv["template"] = tv;
                    }
                    gv
                })
                .collect();
            v["geometry"] = Value::Array(geoms);
            (id.clone(), v)
        })
        .collect()
}

/// Structural equality with numbers compared within `tol`.
pub fn approx_eq(a: &Value, b: &Value, tol: f64) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => (x.as_f64().unwrap() - y.as_f64().unwrap()).abs() <= tol,
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| approx_eq(p, q, tol)),
        (Value::Object(x), Value::Object(y)) => {
            x.len() == y.len() && x.iter().all(|(k, v)| y.get(k).is_some_and(|w| approx_eq(v, w, tol)))
        }
        _ => a == b,
    }
}

/// Same city objects with the same content, ignoring ordering, with
/// coordinates within `tol`. Returns the first difference.
pub fn equivalent(a: &CityModel, b: &CityModel, tol: f64) -> Result<(), String> {
    let (ca, cb) = (canonical(a), canonical(b));
    if ca.len() != cb.len() {
        return Err(format!("{} vs {} city objects", ca.len(), cb.len()));
    }
    for (id, va) in &ca {
        let Some(vb) = cb.get(id) else {
            return Err(format!("`{id}` missing"));
        };
        if !approx_eq(va, vb, tol) {
            return Err(format!("`{id}` differs:\n{va}\n{vb}"));
        }
    }
    if a.transform != b.transform {
        return Err("transforms differ".into());
    }
    if a.metadata != b.metadata || a.extensions != b.extensions || a.extra != b.extra {
        return Err("root members differ".into());
    }
    Ok(())
}
