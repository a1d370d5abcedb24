//! Validate a file and print the findings, as text and as JSON lines.
//!
//! cargo run --example validate [FILE]

use cjtk::validator::validate;
use serde_json::Value;

fn first_index(v: &mut Value) -> Option<&mut Value> {
    match v {
        Value::Array(items) => items.iter_mut().find_map(first_index),
        n @ Value::Number(_) => Some(n),
        _ => None,
    }
}

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/sample_semantics.json").into());
    let bytes = std::fs::read(&path).expect("readable input");

    let report = validate(&bytes);
    println!("{report}");
    print!("{}", report.to_json_lines());

    // A broken copy: one vertex index past the end of the vertex list.
    let mut tree: Value = serde_json::from_slice(&bytes).expect("JSON input");
    let past_end = tree["vertices"].as_array().map_or(0, Vec::len) + 100;
    for co in tree["CityObjects"].as_object_mut().unwrap().values_mut() {
        if let Some(b) = co.pointer_mut("/geometry/0/boundaries") {
            *first_index(b).unwrap() = past_end.into();
            break;
        }
    }
    let broken = tree.to_string();
    let report = validate(broken.as_bytes());
    println!("after corrupting one index:\n{report}");
    std::process::exit(report.exit_code());
}
