//! CityJSON Extensions: loading extension files, validating extended
//! models against them, and stripping extension content.
//!
//! Schema fragments are restricted to the keywords `type`, `properties`,
//! `items`, `required` and `enum` (plus the `description` annotation).
//! Anything else is rejected when the extension is loaded.

use std::collections::HashSet;

use indexmap::IndexMap;
use serde_json::Value;

use crate::codec::{self, DuplicateIds};
use crate::error::{Error, Result};
use crate::model::*;
use crate::validator::{validate_model, Stage, ValidationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JsonType {
    String,
    Number,
    Integer,
    Boolean,
    Object,
    Array,
    Null,
}

impl JsonType {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "string" => Self::String,
            "number" => Self::Number,
            "integer" => Self::Integer,
            "boolean" => Self::Boolean,
            "object" => Self::Object,
            "array" => Self::Array,
            "null" => Self::Null,
            _ => return None,
        })
    }

    fn as_str(self) -> &'static str {
        match self {
            Self::String => "string",
            Self::Number => "number",
            Self::Integer => "integer",
            Self::Boolean => "boolean",
            Self::Object => "object",
            Self::Array => "array",
            Self::Null => "null",
        }
    }

    fn matches(self, v: &Value) -> bool {
        match self {
            Self::String => v.is_string(),
            Self::Number => v.is_number(),
            Self::Integer => v.as_f64().is_some_and(|x| x.fract() == 0.0),
            Self::Boolean => v.is_boolean(),
            Self::Object => v.is_object(),
            Self::Array => v.is_array(),
            Self::Null => v.is_null(),
        }
    }
}

/// A parsed schema fragment.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Fragment {
    pub types: Option<Vec<JsonType>>,
    pub properties: IndexMap<String, Fragment>,
    pub items: Option<Box<Fragment>>,
    pub required: Vec<String>,
    pub enumeration: Option<Vec<Value>>,
    pub description: Option<String>,
}

fn bad(path: &str, message: impl Into<String>) -> Error {
    Error::BadSchemaFragment {
        path: path.to_string(),
        message: message.into(),
    }
}

impl Fragment {
    pub fn parse(v: &Value, path: &str) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| bad(path, "expected an object"))?;
        let mut f = Fragment::default();
        for (k, v) in obj {
            let p = format!("{path}/{k}");
            match k.as_str() {
                "type" => {
                    let names: Vec<&Value> = match v {
                        Value::Array(a) => a.iter().collect(),
                        other => vec![other],
                    };
                    let mut types = Vec::new();
                    for n in names {
                        let t = n
                            .as_str()
                            .and_then(JsonType::parse)
                            .ok_or_else(|| bad(&p, format!("unknown type {n}")))?;
                        types.push(t);
                    }
                    f.types = Some(types);
                }
                "properties" => {
                    let props = v.as_object().ok_or_else(|| bad(&p, "expected an object"))?;
                    for (name, sub) in props {
                        f.properties
                            .insert(name.clone(), Fragment::parse(sub, &format!("{p}/{name}"))?);
                    }
                }
                "items" => f.items = Some(Box::new(Fragment::parse(v, &p)?)),
                "required" => {
                    f.required = v
                        .as_array()
                        .and_then(|a| a.iter().map(|x| x.as_str().map(str::to_string)).collect())
                        .ok_or_else(|| bad(&p, "expected an array of strings"))?;
                }
                "enum" => {
                    f.enumeration = Some(
                        v.as_array()
                            .cloned()
                            .ok_or_else(|| bad(&p, "expected an array"))?,
                    );
                }
                "description" => f.description = v.as_str().map(str::to_string),
                other => {
                    return Err(Error::UnsupportedKeyword {
                        path: path.to_string(),
                        keyword: other.to_string(),
                    })
                }
            }
        }
        Ok(f)
    }

    fn mentions(&self, member: &str) -> bool {
        self.properties.contains_key(member) || self.required.iter().any(|r| r == member)
    }

    /// Checks `v` against the fragment, reporting into `r`.
    pub fn check(&self, v: &Value, path: &str, r: &mut ValidationReport) {
        let st = Stage::Extension;
        if let Some(types) = &self.types {
            if !types.iter().any(|t| t.matches(v)) {
                let want: Vec<&str> = types.iter().map(|t| t.as_str()).collect();
                r.error(st, "TYPE_MISMATCH", path, format!("expected {}, found {v}", want.join(" or ")));
                return;
            }
        }
        if let Some(e) = &self.enumeration {
            if !e.contains(v) {
                r.error(st, "ENUM_MISMATCH", path, format!("{v} is not one of the allowed values"));
            }
        }
        if let Value::Object(obj) = v {
            for req in &self.required {
                if !obj.contains_key(req) {
                    r.error(st, "MISSING_REQUIRED_PROPERTY", format!("{path}/{req}"), format!("`{req}` is required"));
                }
            }
            for (name, sub) in &self.properties {
                if let Some(x) = obj.get(name) {
                    sub.check(x, &format!("{path}/{name}"), r);
                }
            }
        }
        if let (Value::Array(a), Some(items)) = (v, &self.items) {
            for (i, x) in a.iter().enumerate() {
                items.check(x, &format!("{path}/{i}"), r);
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Extension {
    pub name: String,
    pub uri: String,
    pub version: String,
    pub description: String,
    pub extra_root_properties: IndexMap<String, Fragment>,
    /// core type -> attribute name -> fragment
    pub extra_attributes: IndexMap<String, IndexMap<String, Fragment>>,
    pub extra_city_objects: IndexMap<String, Fragment>,
}

fn required_str(obj: &serde_json::Map<String, Value>, keys: &[&str]) -> Result<String> {
    for k in keys {
        match obj.get(*k) {
            Some(Value::String(s)) => return Ok(s.clone()),
            Some(_) => {
                return Err(Error::BadMemberType {
                    path: (*k).to_string(),
                    message: "expected a string".into(),
                })
            }
            None => {}
        }
    }
    Err(Error::MissingRequiredMember(keys[0].to_string()))
}

fn fragment_map(v: Option<&Value>, path: &str) -> Result<IndexMap<String, Fragment>> {
    let mut out = IndexMap::new();
    let Some(v) = v else { return Ok(out) };
    let obj = v.as_object().ok_or_else(|| bad(path, "expected an object"))?;
    for (k, f) in obj {
        out.insert(k.clone(), Fragment::parse(f, &format!("{path}/{k}"))?);
    }
    Ok(out)
}

fn require_plus<'a>(keys: impl IntoIterator<Item = &'a String>, path: &str) -> Result<()> {
    match keys.into_iter().find(|k| !k.starts_with('+')) {
        Some(k) => Err(Error::BadPlusPrefix {
            path: format!("{path}/{k}"),
        }),
        None => Ok(()),
    }
}

/// Reads and checks an extension file. The uri is recorded, never fetched.
pub fn load_extension(bytes: &[u8]) -> Result<Extension> {
    let (root, _) = codec::read_json(bytes, DuplicateIds::Reject)?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::NotExtension("root is not an object".into()))?;
    match obj.get("type") {
        Some(Value::String(t)) if t == "CityJSON_Extension" => {}
        other => {
            return Err(Error::NotExtension(format!(
                "type is {}",
                other.map_or("missing".to_string(), Value::to_string)
            )))
        }
    }
    let mut ext = Extension {
        name: required_str(obj, &["name"])?,
        uri: required_str(obj, &["uri", "url"])?,
        version: required_str(obj, &["version"])?,
        description: obj
            .get("description")
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string(),
        extra_root_properties: fragment_map(obj.get("extraRootProperties"), "extraRootProperties")?,
        extra_city_objects: fragment_map(obj.get("extraCityObjects"), "extraCityObjects")?,
        ..Default::default()
    };

    require_plus(ext.extra_city_objects.keys(), "extraCityObjects")?;
    for (name, f) in &ext.extra_city_objects {
        if !(f.mentions("type") && f.mentions("geometry")) {
            return Err(Error::MissingGeometryRule {
                path: format!("extraCityObjects/{name}"),
            });
        }
    }

    if let Some(v) = obj.get("extraAttributes") {
        let targets = v
            .as_object()
            .ok_or_else(|| bad("extraAttributes", "expected an object"))?;
        for (target, attrs) in targets {
            let path = format!("extraAttributes/{target}");
            if !matches!(CityObjectType::parse(target), CityObjectType::Core(_)) {
                return Err(Error::BadAttributeTarget { path });
            }
            let attrs = fragment_map(Some(attrs), &path)?;
            require_plus(attrs.keys(), &path)?;
            ext.extra_attributes.insert(target.clone(), attrs);
        }
    }
    Ok(ext)
}

pub fn load_extension_file(path: impl AsRef<std::path::Path>) -> Result<Extension> {
    load_extension(&std::fs::read(path)?)
}

/// Fails when two different extensions define the same member.
pub fn check_collisions(exts: &[Extension]) -> Result<()> {
    let mut seen: IndexMap<String, &str> = IndexMap::new();
    let mut distinct: Vec<&Extension> = Vec::new();
    for e in exts {
        if !distinct.contains(&e) {
            distinct.push(e);
        }
    }
    for e in distinct {
        let keys = std::iter::once(format!("extension {}", e.name))
            .chain(e.extra_root_properties.keys().map(|k| format!("root {k}")))
            .chain(e.extra_city_objects.keys().cloned())
            .chain(
                e.extra_attributes
                    .iter()
                    .flat_map(|(t, a)| a.keys().map(move |k| format!("{t}/attributes/{k}"))),
            );
        for key in keys {
            if let Some(first) = seen.get(&key) {
                return Err(Error::ExtensionCollision {
                    member: key,
                    first: first.to_string(),
                    second: e.name.clone(),
                });
            }
            seen.insert(key, &e.name);
        }
    }
    Ok(())
}

fn find<'a, T>(exts: &'a [Extension], f: impl Fn(&'a Extension) -> Option<&'a T>) -> Option<&'a T> {
    exts.iter().find_map(f)
}

/// Reports every object carrying a `boundaries` member outside `geometry`.
fn scan_misplaced_geometry(v: &Value, path: &str, r: &mut ValidationReport) {
    match v {
        Value::Object(obj) => {
            if obj.contains_key("boundaries") {
                r.error(
                    Stage::Extension,
                    "MISPLACED_GEOMETRY",
                    path,
                    "geometries must be stored in the \"geometry\" member",
                );
                return;
            }
            for (k, x) in obj {
                scan_misplaced_geometry(x, &format!("{path}/{k}"), r);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                scan_misplaced_geometry(x, &format!("{path}/{i}"), r);
            }
        }
        _ => {}
    }
}

/// Extension findings only: declared extensions, "+" object types, "+"
/// attributes, root properties and misplaced geometries.
pub fn extension_findings(model: &CityModel, exts: &[Extension]) -> ValidationReport {
    let st = Stage::Extension;
    let mut r = ValidationReport::default();
    if let Err(e) = check_collisions(exts) {
        r.error(st, e.code(), "extensions", e.to_string());
    }
    for (name, decl) in &model.extensions {
        let path = format!("extensions/{name}");
        match exts.iter().find(|e| &e.name == name) {
            None => r.error(st, "MISSING_EXTENSION_SCHEMA", path, format!("extension `{name}` was not provided")),
            Some(e) if e.version != decl.version => r.warning(
                st,
                "EXTENSION_VERSION_MISMATCH",
                path,
                format!("declared version {}, loaded {}", decl.version, e.version),
            ),
            Some(_) => {}
        }
    }

    for (k, v) in &model.extra {
        match find(exts, |e| e.extra_root_properties.get(k)) {
            Some(f) => f.check(v, k, &mut r),
            None if k.starts_with('+') => {
                r.error(st, "UNDECLARED_EXTENSION_MEMBER", k.clone(), format!("root property `{k}` is not declared"))
            }
            None => {}
        }
        scan_misplaced_geometry(v, k, &mut r);
    }

    for (id, co) in &model.city_objects {
        let base = format!("CityObjects/{id}");
        let json = codec::encode_city_object(co);
        let ty = co.kind.as_str();
        if co.kind.is_extension() {
            match find(exts, |e| e.extra_city_objects.get(ty)) {
                Some(f) => f.check(&json, &base, &mut r),
                None => r.error(
                    st,
                    "UNDECLARED_EXTENSION_MEMBER",
                    format!("{base}/type"),
                    format!("city object type `{ty}` is not declared"),
                ),
            }
        } else {
            for (k, v) in &co.attributes {
                if !k.starts_with('+') {
                    continue;
                }
                let path = format!("{base}/attributes/{k}");
                match find(exts, |e| e.extra_attributes.get(ty).and_then(|a| a.get(k))) {
                    Some(f) => f.check(v, &path, &mut r),
                    None => r.error(
                        st,
                        "UNDECLARED_EXTENSION_MEMBER",
                        path,
                        format!("attribute `{k}` is not declared for {ty}"),
                    ),
                }
            }
            for k in co.extra.keys().filter(|k| k.starts_with('+')) {
                r.error(
                    st,
                    "UNDECLARED_EXTENSION_MEMBER",
                    format!("{base}/{k}"),
                    format!("member `{k}` is not declared"),
                );
            }
        }
        if let Value::Object(obj) = &json {
            for (k, v) in obj.iter().filter(|(k, _)| *k != "geometry") {
                scan_misplaced_geometry(v, &format!("{base}/{k}"), &mut r);
            }
        }
    }
    r.sort();
    r
}

/// Core validation with "+" members treated as opaque, plus the extension
/// findings.
pub fn validate_extended(model: &CityModel, exts: &[Extension]) -> ValidationReport {
    let mut r = validate_model(model);
    r.merge(extension_findings(model, exts));
    r
}

/// Removes "+" objects, attributes and root properties and the extension
/// declarations. Vertices only referenced by removed objects are dropped.
pub fn strip_extensions(model: &CityModel) -> CityModel {
    let mut out = model.clone();
    out.extensions.clear();
    out.extra.retain(|k, _| !k.starts_with('+'));
    let removed: HashSet<String> = model
        .city_objects
        .iter()
        .filter(|(_, co)| co.kind.is_extension())
        .map(|(id, _)| id.clone())
        .collect();
    out.city_objects.retain(|id, _| !removed.contains(id));
    for co in out.city_objects.values_mut() {
        co.attributes.retain(|k, _| !k.starts_with('+'));
        co.extra.retain(|k, _| !k.starts_with('+'));
        for links in [&mut co.parents, &mut co.children] {
            if let Some(l) = links {
                l.retain(|x| !removed.contains(x));
                if l.is_empty() {
                    *links = None;
                }
            }
        }
    }
    if !removed.is_empty() {
        let usage = out.vertex_usage();
        let before = model.vertex_usage();
        // keep vertices that were already orphaned so only removal effects show
        let keep: Vec<bool> = usage.iter().zip(&before).map(|(a, b)| *a > 0 || *b == 0).collect();
        out.retain_vertices(&keep);
    }
    out
}
