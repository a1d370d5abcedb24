//! Reading and writing the CityJSON text encoding.
//!
//! Reading happens in two steps: the text is turned into a JSON tree by a
//! reader that refuses duplicate keys, then the tree is decoded into a
//! [`CityModel`]. Writing goes the other way round and emits integral
//! numbers without a fractional part.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, DeserializeSeed, MapAccess, SeqAccess, Visitor};
use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::model::*;

/// Output layout for [`serialize`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Minified,
    Pretty,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

/// Non-fatal observations made while decoding.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ParseDiagnostics {
    pub warnings: Vec<Diagnostic>,
    /// Paths of members that are not part of the core encoding. They are
    /// kept in the model and written back on serialization.
    pub unknown_members: Vec<String>,
}

impl ParseDiagnostics {
    pub fn is_empty(&self) -> bool {
        self.warnings.is_empty() && self.unknown_members.is_empty()
    }
}

/// Parses CityJSON text into a model. Geometry nesting depths are checked;
/// other structural rules are left to the validator.
pub fn parse(bytes: &[u8]) -> Result<(CityModel, ParseDiagnostics)> {
    let (value, _) = read_json(bytes, DuplicateIds::Reject)?;
    let (model, diags) = decode(&value)?;
    check_shapes(&model)?;
    Ok((model, diags))
}

pub fn parse_str(text: &str) -> Result<(CityModel, ParseDiagnostics)> {
    parse(text.as_bytes())
}

/// Writes a model as CityJSON text.
pub fn serialize(model: &CityModel, format: Format) -> String {
    let v = encode(model);
    match format {
        Format::Minified => serde_json::to_string(&v),
        Format::Pretty => serde_json::to_string_pretty(&v),
    }
    .expect("serializing a JSON tree cannot fail")
}

// ---------------------------------------------------------------------------
// duplicate-refusing JSON reader

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum DuplicateIds {
    /// Any duplicate key is an error.
    Reject,
    /// Duplicate city object ids are collected (first occurrence wins);
    /// duplicates elsewhere are still errors.
    Collect,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Root,
    CityObjects,
    Other,
}

const DUP_ID_TAG: &str = "\u{1}DUPLICATE_ID\u{1}";
const DUP_KEY_TAG: &str = "\u{1}DUPLICATE_KEY\u{1}";

struct StrictSeed<'a> {
    ctx: Ctx,
    policy: DuplicateIds,
    dup_ids: &'a RefCell<Vec<String>>,
}

impl<'a> StrictSeed<'a> {
    fn child(&self, ctx: Ctx) -> StrictSeed<'a> {
        StrictSeed {
            ctx,
            policy: self.policy,
            dup_ids: self.dup_ids,
        }
    }
}

impl<'de> DeserializeSeed<'de> for StrictSeed<'_> {
    type Value = Value;

    fn deserialize<D: de::Deserializer<'de>>(self, d: D) -> std::result::Result<Value, D::Error> {
        d.deserialize_any(self)
    }
}

impl<'de> Visitor<'de> for StrictSeed<'_> {
    type Value = Value;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("any JSON value")
    }

    fn visit_bool<E>(self, v: bool) -> std::result::Result<Value, E> {
        Ok(Value::Bool(v))
    }
    fn visit_i64<E>(self, v: i64) -> std::result::Result<Value, E> {
        Ok(Value::from(v))
    }
    fn visit_u64<E>(self, v: u64) -> std::result::Result<Value, E> {
        Ok(Value::from(v))
    }
    fn visit_f64<E>(self, v: f64) -> std::result::Result<Value, E> {
        Ok(Number::from_f64(v).map_or(Value::Null, Value::Number))
    }
    fn visit_str<E>(self, v: &str) -> std::result::Result<Value, E> {
        Ok(Value::String(v.to_string()))
    }
    fn visit_string<E>(self, v: String) -> std::result::Result<Value, E> {
        Ok(Value::String(v))
    }
    fn visit_unit<E>(self) -> std::result::Result<Value, E> {
        Ok(Value::Null)
    }
    fn visit_none<E>(self) -> std::result::Result<Value, E> {
        Ok(Value::Null)
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Value, A::Error> {
        let mut out = Vec::new();
        while let Some(v) = seq.next_element_seed(self.child(Ctx::Other))? {
            out.push(v);
        }
        Ok(Value::Array(out))
    }

    fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> std::result::Result<Value, A::Error> {
        let mut map = Map::new();
        while let Some(key) = access.next_key::<String>()? {
            let ctx = if self.ctx == Ctx::Root && key == "CityObjects" {
                Ctx::CityObjects
            } else {
                Ctx::Other
            };
            let v = access.next_value_seed(self.child(ctx))?;
            if map.contains_key(&key) {
                if self.ctx == Ctx::CityObjects {
                    if self.policy == DuplicateIds::Collect {
                        self.dup_ids.borrow_mut().push(key);
                        continue;
                    }
                    return Err(de::Error::custom(format!("{DUP_ID_TAG}{key}{DUP_ID_TAG}")));
                }
                return Err(de::Error::custom(format!("{DUP_KEY_TAG}{key}{DUP_KEY_TAG}")));
            }
            map.insert(key, v);
        }
        Ok(Value::Object(map))
    }
}

fn tagged<'m>(msg: &'m str, tag: &str) -> Option<&'m str> {
    let start = msg.find(tag)? + tag.len();
    let len = msg[start..].find(tag)?;
    Some(&msg[start..start + len])
}

/// Reads JSON text, refusing duplicate keys. Returns the tree and, under
/// [`DuplicateIds::Collect`], the duplicated city object ids.
pub(crate) fn read_json(bytes: &[u8], policy: DuplicateIds) -> Result<(Value, Vec<String>)> {
    let dup_ids = RefCell::new(Vec::new());
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let seed = StrictSeed {
        ctx: Ctx::Root,
        policy,
        dup_ids: &dup_ids,
    };
    let value = seed
        .deserialize(&mut de)
        .and_then(|v| de.end().map(|_| v))
        .map_err(|e| {
            let msg = e.to_string();
            if let Some(id) = tagged(&msg, DUP_ID_TAG) {
                Error::DuplicateId(id.to_string())
            } else if let Some(key) = tagged(&msg, DUP_KEY_TAG) {
                Error::DuplicateKey {
                    key: key.to_string(),
                    line: e.line(),
                    column: e.column(),
                }
            } else {
                Error::Syntax {
                    line: e.line(),
                    column: e.column(),
                    message: msg,
                }
            }
        })?;
    Ok((value, dup_ids.into_inner()))
}

// ---------------------------------------------------------------------------
// decoding

fn bad(path: &str, message: impl Into<String>) -> Error {
    Error::BadMemberType {
        path: path.to_string(),
        message: message.into(),
    }
}

fn join(path: &str, key: impl fmt::Display) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}/{key}")
    }
}

struct Decoder {
    diags: ParseDiagnostics,
}

impl Decoder {
    fn unknown(&mut self, path: String) {
        self.diags.unknown_members.push(path);
    }

    fn take_extra(&mut self, obj: &Map<String, Value>, known: &[&str], path: &str) -> Members {
        let mut extra = Members::new();
        for (k, v) in obj {
            if !known.contains(&k.as_str()) {
                self.unknown(join(path, k));
                extra.insert(k.clone(), v.clone());
            }
        }
        extra
    }
}

fn as_object<'v>(v: &'v Value, path: &str) -> Result<&'v Map<String, Value>> {
    v.as_object().ok_or_else(|| bad(path, "expected an object"))
}

fn as_array<'v>(v: &'v Value, path: &str) -> Result<&'v Vec<Value>> {
    v.as_array().ok_or_else(|| bad(path, "expected an array"))
}

fn as_str<'v>(v: &'v Value, path: &str) -> Result<&'v str> {
    v.as_str().ok_or_else(|| bad(path, "expected a string"))
}

fn as_f64(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| bad(path, "expected a number"))
}

fn as_index(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| bad(path, "expected a non-negative integer"))
}

fn numbers<const N: usize>(v: &Value, path: &str) -> Result<[f64; N]> {
    let arr = as_array(v, path)?;
    if arr.len() != N {
        return Err(bad(path, format!("expected {N} numbers, got {}", arr.len())));
    }
    let mut out = [0.0; N];
    for (i, x) in arr.iter().enumerate() {
        out[i] = as_f64(x, &join(path, i))?;
    }
    Ok(out)
}

fn string_list(v: &Value, path: &str) -> Result<Vec<String>> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, s)| as_str(s, &join(path, i)).map(str::to_string))
        .collect()
}

fn decode_boundary(v: &Value, path: &str) -> Result<Boundary> {
    match v {
        Value::Array(items) => Ok(Nested::List(
            items
                .iter()
                .map(|c| decode_boundary(c, path))
                .collect::<Result<_>>()?,
        )),
        other => Ok(Nested::Leaf(as_index(other, path)?)),
    }
}

fn decode_values(v: &Value, path: &str) -> Result<SemanticValues> {
    match v {
        Value::Null => Ok(Nested::Leaf(None)),
        Value::Array(items) => Ok(Nested::List(
            items
                .iter()
                .map(|c| decode_values(c, path))
                .collect::<Result<_>>()?,
        )),
        other => Ok(Nested::Leaf(Some(as_index(other, path)?))),
    }
}

const ROOT_KEYS: &[&str] = &[
    "type",
    "version",
    "CityObjects",
    "vertices",
    "transform",
    "appearance",
    "geometry-templates",
    "metadata",
    "extensions",
];
const OBJECT_KEYS: &[&str] = &["type", "attributes", "parents", "children", "geometry"];
const GEOMETRY_KEYS: &[&str] = &[
    "type",
    "lod",
    "boundaries",
    "semantics",
    "material",
    "texture",
    "template",
    "transformationMatrix",
];

/// Decodes a JSON tree into a model without checking geometry depths.
pub fn decode(root: &Value) -> Result<(CityModel, ParseDiagnostics)> {
    let obj = root
        .as_object()
        .ok_or_else(|| Error::NotCityJson("root is not an object".into()))?;
    match obj.get("type").and_then(Value::as_str) {
        Some("CityJSON") => {}
        Some(other) => return Err(Error::NotCityJson(format!("type is `{other}`"))),
        None => return Err(Error::NotCityJson("missing \"type\": \"CityJSON\"".into())),
    }
    let mut dec = Decoder {
        diags: ParseDiagnostics::default(),
    };
    let required = |k: &str| {
        obj.get(k)
            .ok_or_else(|| Error::MissingRequiredMember(k.to_string()))
    };
    let version = as_str(required("version")?, "version")?.to_string();
    let cos = as_object(required("CityObjects")?, "CityObjects")?;
    let vertices = decode_vertices(required("vertices")?, "vertices")?;

    let mut model = CityModel::new();
    model.version = version;
    model.vertices = vertices;
    for (id, o) in cos {
        let path = join("CityObjects", id);
        model
            .city_objects
            .insert(id.clone(), dec.city_object(o, &path)?);
    }
    if let Some(t) = obj.get("transform") {
        let t = as_object(t, "transform")?;
        let scale = t
            .get("scale")
            .ok_or_else(|| Error::MissingRequiredMember("transform/scale".into()))?;
        let translate = t
            .get("translate")
            .ok_or_else(|| Error::MissingRequiredMember("transform/translate".into()))?;
        model.transform = Some(Transform {
            scale: numbers(scale, "transform/scale")?,
            translate: numbers(translate, "transform/translate")?,
        });
    }
    if let Some(t) = obj.get("geometry-templates") {
        model.geometry_templates = Some(dec.templates(t, "geometry-templates")?);
    }
    if let Some(a) = obj.get("appearance") {
        model.appearance = Some(dec.appearance(a, "appearance")?);
    }
    if let Some(m) = obj.get("metadata") {
        model.metadata = Some(dec.metadata(m, "metadata")?);
    }
    if let Some(e) = obj.get("extensions") {
        for (name, decl) in as_object(e, "extensions")? {
            let path = join("extensions", name);
            let d = as_object(decl, &path)?;
            let get = |k: &str| -> Result<String> {
                let p = join(&path, k);
                d.get(k)
                    .ok_or_else(|| Error::MissingRequiredMember(p.clone()))
                    .and_then(|v| as_str(v, &p).map(str::to_string))
            };
            model.extensions.insert(
                name.clone(),
                ExtensionRef {
                    url: get("url")?,
                    version: get("version")?,
                },
            );
        }
    }
    model.extra = dec.take_extra(obj, ROOT_KEYS, "");
    Ok((model, dec.diags))
}

fn decode_vertices(v: &Value, path: &str) -> Result<Vec<Vertex>> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, p)| numbers::<3>(p, &join(path, i)))
        .collect()
}

impl Decoder {
    fn city_object(&mut self, v: &Value, path: &str) -> Result<CityObject> {
        let o = as_object(v, path)?;
        let ty = o
            .get("type")
            .ok_or_else(|| Error::MissingRequiredMember(join(path, "type")))?;
        let mut co = CityObject::new(as_str(ty, &join(path, "type"))?);
        if let Some(a) = o.get("attributes") {
            co.attributes = as_object(a, &join(path, "attributes"))?.clone();
        }
        if let Some(p) = o.get("parents") {
            co.parents = Some(string_list(p, &join(path, "parents"))?);
        }
        if let Some(c) = o.get("children") {
            co.children = Some(string_list(c, &join(path, "children"))?);
        }
        if let Some(g) = o.get("geometry") {
            let gpath = join(path, "geometry");
            for (i, gv) in as_array(g, &gpath)?.iter().enumerate() {
                co.geometry.push(self.geometry(gv, &join(&gpath, i))?);
            }
        }
        co.extra = self.take_extra(o, OBJECT_KEYS, path);
        Ok(co)
    }

    fn geometry(&mut self, v: &Value, path: &str) -> Result<Geometry> {
        let o = as_object(v, path)?;
        let kind: GeometryKind = as_str(
            o.get("type")
                .ok_or_else(|| Error::MissingRequiredMember(join(path, "type")))?,
            &join(path, "type"),
        )?
        .parse()?;
        let lod = match o.get("lod") {
            None | Some(Value::Null) => None,
            Some(Value::Number(n)) => n.as_f64(),
            Some(_) => return Err(bad(&join(path, "lod"), "lod must be a number")),
        };
        let bpath = join(path, "boundaries");
        let boundaries = decode_boundary(
            o.get("boundaries")
                .ok_or_else(|| Error::MissingRequiredMember(bpath.clone()))?,
            &bpath,
        )?;
        // a bare integer reference point is accepted as a one-element list
        let boundaries = match (kind, boundaries) {
            (GeometryKind::GeometryInstance, Nested::Leaf(i)) => Nested::from_indices(&[i]),
            (_, b) => b,
        };
        let semantics = match o.get("semantics") {
            None | Some(Value::Null) => None,
            Some(s) => Some(self.semantics(s, &join(path, "semantics"))?),
        };
        let instance = if kind == GeometryKind::GeometryInstance {
            let tpath = join(path, "template");
            let template = as_index(
                o.get("template")
                    .ok_or_else(|| Error::MissingRequiredMember(tpath.clone()))?,
                &tpath,
            )?;
            let mpath = join(path, "transformationMatrix");
            let matrix = numbers::<16>(
                o.get("transformationMatrix")
                    .ok_or_else(|| Error::MissingRequiredMember(mpath.clone()))?,
                &mpath,
            )?;
            Some(InstanceRef { template, matrix })
        } else {
            None
        };
        Ok(Geometry {
            kind,
            lod,
            boundaries,
            semantics,
            material: o.get("material").cloned(),
            texture: o.get("texture").cloned(),
            instance,
            extra: self.take_extra(o, GEOMETRY_KEYS, path),
        })
    }

    fn semantics(&mut self, v: &Value, path: &str) -> Result<Semantics> {
        let o = as_object(v, path)?;
        let spath = join(path, "surfaces");
        let surfaces = match o.get("surfaces") {
            None => Vec::new(),
            Some(s) => as_array(s, &spath)?
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let p = join(&spath, i);
                    let so = as_object(s, &p)?;
                    let kind = as_str(
                        so.get("type")
                            .ok_or_else(|| Error::MissingRequiredMember(join(&p, "type")))?,
                        &join(&p, "type"),
                    )?
                    .to_string();
                    let mut attributes = so.clone();
                    attributes.shift_remove("type");
                    Ok(SemanticSurface { kind, attributes })
                })
                .collect::<Result<_>>()?,
        };
        let values = match o.get("values") {
            None => Nested::Leaf(None),
            Some(v) => decode_values(v, &join(path, "values"))?,
        };
        for k in o.keys().filter(|k| *k != "surfaces" && *k != "values") {
            self.diags.warnings.push(Diagnostic {
                path: join(path, k),
                message: "unexpected member in semantics, dropped".into(),
            });
        }
        Ok(Semantics { surfaces, values })
    }

    fn templates(&mut self, v: &Value, path: &str) -> Result<TemplateBank> {
        let o = as_object(v, path)?;
        let tpath = join(path, "templates");
        let mut bank = TemplateBank::default();
        if let Some(ts) = o.get("templates") {
            for (i, t) in as_array(ts, &tpath)?.iter().enumerate() {
                bank.templates.push(self.geometry(t, &join(&tpath, i))?);
            }
        }
        if let Some(vs) = o.get("vertices-templates") {
            bank.vertices = decode_vertices(vs, &join(path, "vertices-templates"))?;
        }
        for k in o
            .keys()
            .filter(|k| *k != "templates" && *k != "vertices-templates")
        {
            self.diags.warnings.push(Diagnostic {
                path: join(path, k),
                message: "unexpected member in geometry-templates, dropped".into(),
            });
        }
        Ok(bank)
    }

    fn appearance(&mut self, v: &Value, path: &str) -> Result<Appearance> {
        let o = as_object(v, path)?;
        let mut app = Appearance::default();
        if let Some(m) = o.get("materials") {
            app.materials = as_array(m, &join(path, "materials"))?.clone();
        }
        if let Some(t) = o.get("textures") {
            let tpath = join(path, "textures");
            for (i, tv) in as_array(t, &tpath)?.iter().enumerate() {
                let p = join(&tpath, i);
                let to = as_object(tv, &p)?;
                let image = as_str(
                    to.get("image")
                        .ok_or_else(|| Error::MissingRequiredMember(join(&p, "image")))?,
                    &join(&p, "image"),
                )?
                .to_string();
                let mut extra = to.clone();
                extra.shift_remove("image");
                app.textures.push(Texture { image, extra });
            }
        }
        if let Some(vt) = o.get("vertices-texture") {
            let p = join(path, "vertices-texture");
            for (i, uv) in as_array(vt, &p)?.iter().enumerate() {
                app.vertices_texture.push(numbers::<2>(uv, &join(&p, i))?);
            }
        }
        let mut extra = o.clone();
        for k in ["materials", "textures", "vertices-texture"] {
            extra.shift_remove(k);
        }
        app.extra = extra;
        Ok(app)
    }

    fn metadata(&mut self, v: &Value, path: &str) -> Result<Metadata> {
        let o = as_object(v, path)?;
        let mut md = Metadata::default();
        if let Some(r) = o.get("referenceSystem") {
            md.reference_system = Some(as_str(r, &join(path, "referenceSystem"))?.to_string());
        }
        if let Some(e) = o.get("geographicalExtent") {
            md.geographical_extent = Some(numbers::<6>(e, &join(path, "geographicalExtent"))?);
        }
        if let Some(l) = o.get("presentLoDs") {
            let p = join(path, "presentLoDs");
            let mut lods = BTreeMap::new();
            for (k, c) in as_object(l, &p)? {
                let n = c
                    .as_u64()
                    .ok_or_else(|| bad(&join(&p, k), "expected a count"))?;
                lods.insert(k.clone(), n);
            }
            md.present_lods = Some(lods);
        }
        let mut extra = o.clone();
        for k in ["referenceSystem", "geographicalExtent", "presentLoDs"] {
            extra.shift_remove(k);
        }
        md.extra = extra;
        Ok(md)
    }
}

/// Checks that every geometry (objects and templates) has the nesting
/// depth its kind requires.
pub fn check_shapes(model: &CityModel) -> Result<()> {
    for (id, gi, g) in model.geometries() {
        check_shape(g, &format!("CityObjects/{id}/geometry/{gi}/boundaries"))?;
    }
    if let Some(bank) = &model.geometry_templates {
        for (i, g) in bank.templates.iter().enumerate() {
            check_shape(g, &format!("geometry-templates/templates/{i}/boundaries"))?;
        }
    }
    Ok(())
}

pub(crate) fn shape_problem(g: &Geometry) -> Option<String> {
    let want = g.kind.boundary_depth();
    if g.kind == GeometryKind::GeometryInstance {
        return match g.boundaries.as_list() {
            Some([Nested::Leaf(_)]) => None,
            _ => Some("a GeometryInstance needs exactly one reference point index".into()),
        };
    }
    if !g.boundaries.has_depth(want) {
        let got = g
            .boundaries
            .first_branch_depth()
            .map_or("empty".to_string(), |d| d.to_string());
        return Some(format!(
            "{} needs boundaries of depth {want}, found {got}",
            g.kind
        ));
    }
    None
}

fn check_shape(g: &Geometry, path: &str) -> Result<()> {
    match shape_problem(g) {
        Some(message) => Err(Error::BadGeometryShape {
            path: path.to_string(),
            message,
        }),
        None => Ok(()),
    }
}

// ---------------------------------------------------------------------------
// encoding

/// JSON number for `x`: integral values are written without a fraction.
pub fn number(x: f64) -> Value {
    if x.is_finite() && x.fract() == 0.0 && x.abs() < 9_007_199_254_740_992.0 {
        Value::from(x as i64)
    } else {
        Number::from_f64(x).map_or(Value::Null, Value::Number)
    }
}

fn numbers_value(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| number(x)).collect())
}

fn boundary_value(b: &Boundary) -> Value {
    match b {
        Nested::Leaf(i) => Value::from(*i as u64),
        Nested::List(items) => Value::Array(items.iter().map(boundary_value).collect()),
    }
}

fn values_value(b: &SemanticValues) -> Value {
    match b {
        Nested::Leaf(None) => Value::Null,
        Nested::Leaf(Some(i)) => Value::from(*i as u64),
        Nested::List(items) => Value::Array(items.iter().map(values_value).collect()),
    }
}

fn strings_value(xs: &[String]) -> Value {
    Value::Array(xs.iter().cloned().map(Value::String).collect())
}

pub fn encode_geometry(g: &Geometry) -> Value {
    let mut o = Map::new();
    o.insert("type".into(), Value::from(g.kind.as_str()));
    if let Some(lod) = g.lod {
        o.insert("lod".into(), number(lod));
    }
    if let Some(inst) = &g.instance {
        o.insert("template".into(), Value::from(inst.template as u64));
    }
    o.insert("boundaries".into(), boundary_value(&g.boundaries));
    if let Some(inst) = &g.instance {
        o.insert("transformationMatrix".into(), numbers_value(&inst.matrix));
    }
    if let Some(s) = &g.semantics {
        let surfaces = s
            .surfaces
            .iter()
            .map(|sf| {
                let mut so = Map::new();
                so.insert("type".into(), Value::from(sf.kind.clone()));
                so.extend(sf.attributes.clone());
                Value::Object(so)
            })
            .collect();
        let mut so = Map::new();
        so.insert("surfaces".into(), Value::Array(surfaces));
        so.insert("values".into(), values_value(&s.values));
        o.insert("semantics".into(), Value::Object(so));
    }
    if let Some(m) = &g.material {
        o.insert("material".into(), m.clone());
    }
    if let Some(t) = &g.texture {
        o.insert("texture".into(), t.clone());
    }
    o.extend(g.extra.clone());
    Value::Object(o)
}

pub fn encode_city_object(co: &CityObject) -> Value {
    let mut o = Map::new();
    o.insert("type".into(), Value::from(co.kind.as_str()));
    if !co.attributes.is_empty() {
        o.insert("attributes".into(), Value::Object(co.attributes.clone()));
    }
    if let Some(p) = &co.parents {
        o.insert("parents".into(), strings_value(p));
    }
    if let Some(c) = &co.children {
        o.insert("children".into(), strings_value(c));
    }
    o.insert(
        "geometry".into(),
        Value::Array(co.geometry.iter().map(encode_geometry).collect()),
    );
    o.extend(co.extra.clone());
    Value::Object(o)
}

fn encode_vertices(vs: &[Vertex]) -> Value {
    Value::Array(vs.iter().map(|v| numbers_value(v)).collect())
}

/// Encodes a model as a JSON tree.
pub fn encode(model: &CityModel) -> Value {
    let mut o = Map::new();
    o.insert("type".into(), Value::from("CityJSON"));
    o.insert("version".into(), Value::from(model.version.clone()));
    if !model.extensions.is_empty() {
        let mut e = Map::new();
        for (name, d) in &model.extensions {
            let mut dm = Map::new();
            dm.insert("url".into(), Value::from(d.url.clone()));
            dm.insert("version".into(), Value::from(d.version.clone()));
            e.insert(name.clone(), Value::Object(dm));
        }
        o.insert("extensions".into(), Value::Object(e));
    }
    if let Some(t) = &model.transform {
        let mut tm = Map::new();
        tm.insert("scale".into(), numbers_value(&t.scale));
        tm.insert("translate".into(), numbers_value(&t.translate));
        o.insert("transform".into(), Value::Object(tm));
    }
    if let Some(md) = &model.metadata {
        let mut mm = Map::new();
        if let Some(r) = &md.reference_system {
            mm.insert("referenceSystem".into(), Value::from(r.clone()));
        }
        if let Some(e) = &md.geographical_extent {
            mm.insert("geographicalExtent".into(), numbers_value(e));
        }
        if let Some(l) = &md.present_lods {
            let lm: Map<String, Value> = l.iter().map(|(k, v)| (k.clone(), Value::from(*v))).collect();
            mm.insert("presentLoDs".into(), Value::Object(lm));
        }
        mm.extend(md.extra.clone());
        o.insert("metadata".into(), Value::Object(mm));
    }
    let cos: Map<String, Value> = model
        .city_objects
        .iter()
        .map(|(id, co)| (id.clone(), encode_city_object(co)))
        .collect();
    o.insert("CityObjects".into(), Value::Object(cos));
    o.insert("vertices".into(), encode_vertices(&model.vertices));
    if let Some(app) = &model.appearance {
        let mut am = Map::new();
        if !app.materials.is_empty() {
            am.insert("materials".into(), Value::Array(app.materials.clone()));
        }
        if !app.textures.is_empty() {
            let ts = app
                .textures
                .iter()
                .map(|t| {
                    let mut tm = Map::new();
                    tm.insert("image".into(), Value::from(t.image.clone()));
                    tm.extend(t.extra.clone());
                    Value::Object(tm)
                })
                .collect();
            am.insert("textures".into(), Value::Array(ts));
        }
        if !app.vertices_texture.is_empty() {
            am.insert(
                "vertices-texture".into(),
                Value::Array(app.vertices_texture.iter().map(|uv| numbers_value(uv)).collect()),
            );
        }
        am.extend(app.extra.clone());
        o.insert("appearance".into(), Value::Object(am));
    }
    if let Some(bank) = &model.geometry_templates {
        let mut tm = Map::new();
        tm.insert(
            "templates".into(),
            Value::Array(bank.templates.iter().map(encode_geometry).collect()),
        );
        tm.insert("vertices-templates".into(), encode_vertices(&bank.vertices));
        o.insert("geometry-templates".into(), Value::Object(tm));
    }
    o.extend(model.extra.clone());
    Value::Object(o)
}

/// Byte length of the minified encoding.
pub fn minified_size(model: &CityModel) -> usize {
    serialize(model, Format::Minified).len()
}
