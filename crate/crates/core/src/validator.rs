//! Two-layer validation of CityJSON documents.
//!
//! The structure layer checks what a schema would: member types, core type
//! names, geometry nesting, LoDs, the transform and the CRS rules. The
//! consistency layer checks what a schema cannot express:
//!
//! 1. `PARENT_CHILD_MISMATCH`: parents/children links are mutual and resolve;
//! 2. `SEMANTICS_SHAPE_MISMATCH`: semantic `values` follow the boundaries;
//! 3. `DUPLICATE_ID`: a city object id appears twice in the text;
//! 4. `DUPLICATE_VERTEX` / `ORPHAN_VERTEX` (warnings);
//! 5. `VERTEX_INDEX_OUT_OF_RANGE`: boundary indices exist in the pool.
//!
//! Findings are data, never errors. Reports are sorted by path then code so
//! the same input always yields the same report.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use serde_json::Value;

use crate::codec::{self, DuplicateIds};
use crate::error::Error;
use crate::model::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Syntax,
    Structure,
    Consistency,
    Extension,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Syntax => "syntax",
            Stage::Structure => "structure",
            Stage::Consistency => "consistency",
            Stage::Extension => "extension",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub code: String,
    pub path: String,
    pub message: String,
    pub stage: Stage,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty() && self.warnings.is_empty()
    }

    /// 0 = valid, 1 = warnings only, 2 = errors.
    pub fn exit_code(&self) -> i32 {
        if !self.errors.is_empty() {
            2
        } else if !self.warnings.is_empty() {
            1
        } else {
            0
        }
    }

    pub(crate) fn error(&mut self, stage: Stage, code: &str, path: impl Into<String>, message: impl Into<String>) {
        self.errors.push(Finding {
            code: code.to_string(),
            path: path.into(),
            message: message.into(),
            stage,
        });
    }

    pub(crate) fn warning(&mut self, stage: Stage, code: &str, path: impl Into<String>, message: impl Into<String>) {
        self.warnings.push(Finding {
            code: code.to_string(),
            path: path.into(),
            message: message.into(),
            stage,
        });
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.errors.extend(other.errors);
        self.warnings.extend(other.warnings);
        self.sort();
    }

    pub fn sort(&mut self) {
        let key = |f: &Finding| (f.path.clone(), f.code.clone(), f.message.clone());
        self.errors.sort_by_key(key);
        self.warnings.sort_by_key(key);
    }

    /// All findings, errors first.
    pub fn findings(&self) -> impl Iterator<Item = &Finding> {
        self.errors.iter().chain(self.warnings.iter())
    }

    pub fn count(&self, code: &str) -> usize {
        self.findings().filter(|f| f.code == code).count()
    }

    /// One JSON object per line: `{"code", "path", "message", "stage",
    /// "severity"}`.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for (sev, list) in [("error", &self.errors), ("warning", &self.warnings)] {
            for f in list {
                let line = serde_json::json!({
                    "code": f.code,
                    "path": f.path,
                    "message": f.message,
                    "stage": f.stage,
                    "severity": sev,
                });
                out.push_str(&line.to_string());
                out.push('\n');
            }
        }
        out
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return writeln!(f, "valid: no findings");
        }
        for (sev, list) in [("ERROR", &self.errors), ("WARNING", &self.warnings)] {
            for x in list {
                writeln!(f, "{sev} [{}] {} {}: {}", x.stage, x.code, x.path, x.message)?;
            }
        }
        writeln!(
            f,
            "{} error(s), {} warning(s)",
            self.errors.len(),
            self.warnings.len()
        )
    }
}

const SEMANTIC_TYPES: &[&str] = &[
    "RoofSurface",
    "GroundSurface",
    "WallSurface",
    "ClosureSurface",
    "OuterCeilingSurface",
    "OuterFloorSurface",
    "Window",
    "Door",
    "WaterSurface",
    "WaterGroundSurface",
    "WaterClosureSurface",
    "TrafficArea",
    "AuxiliaryTrafficArea",
];

fn crs_members(m: &Members) -> impl Iterator<Item = (&str, &str)> {
    m.iter().filter_map(|(k, v)| match (k.as_str(), v) {
        ("referenceSystem" | "crs" | "srsName", Value::String(s)) => Some((k.as_str(), s.as_str())),
        _ => None,
    })
}

/// Structural checks on a decoded model.
pub fn validate_structure(model: &CityModel) -> ValidationReport {
    let mut r = ValidationReport::default();
    let st = Stage::Structure;

    if model.version != "1.0" && !model.version.starts_with("1.0.") {
        r.error(st, "UNSUPPORTED_VERSION", "version", format!("version `{}` is not 1.0", model.version));
    }

    if let Some(t) = &model.transform {
        if !t.is_well_formed() {
            r.error(st, "BAD_TRANSFORM", "transform", "scale must be finite and > 0, translate finite");
        }
    }
    for (i, v) in model.vertices.iter().enumerate() {
        if v.iter().any(|c| !c.is_finite()) {
            r.error(st, "BAD_VERTEX", format!("vertices/{i}"), "non-finite coordinate");
        } else if model.transform.is_some() && v.iter().any(|c| c.fract() != 0.0) {
            r.error(st, "BAD_VERTEX", format!("vertices/{i}"), "quantized vertex is not integral");
        }
    }

    let root_crs = model.reference_system();
    if let Some(md) = &model.metadata {
        if let Some(rs) = &md.reference_system {
            if epsg_code(rs).is_none() {
                r.error(st, "BAD_CRS", "metadata/referenceSystem", format!("`{rs}` is not an EPSG code"));
            }
        }
        if let Some(e) = &md.geographical_extent {
            if (0..3).any(|k| e[k] > e[k + 3]) {
                r.error(st, "BAD_EXTENT", "metadata/geographicalExtent", "min exceeds max");
            }
        }
    }
    let root_code = root_crs.and_then(epsg_code);
    let check_crs = |r: &mut ValidationReport, path: &str, m: &Members| {
        for (k, crs) in crs_members(m) {
            let same = match (root_code, epsg_code(crs)) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            };
            if !same {
                r.error(
                    st,
                    "MULTIPLE_CRS",
                    format!("{path}/{k}"),
                    format!("`{crs}` differs from the model CRS {:?}", root_crs),
                );
            }
        }
    };

    for (id, co) in &model.city_objects {
        let base = format!("CityObjects/{id}");
        if let CityObjectType::Unknown(name) = &co.kind {
            r.error(st, "UNKNOWN_COTYPE", format!("{base}/type"), format!("`{name}` is not a city object type"));
        }
        if co.kind.is_second_level() && co.parents().is_empty() {
            r.warning(st, "MISSING_PARENT", format!("{base}/parents"), format!("{} has no parent", co.kind));
        }
        check_crs(&mut r, &base, &co.extra);
        for (gi, g) in co.geometry.iter().enumerate() {
            let gpath = format!("{base}/geometry/{gi}");
            check_crs(&mut r, &gpath, &g.extra);
            geometry_structure(&mut r, g, &gpath);
        }
    }
    if let Some(bank) = &model.geometry_templates {
        for (i, g) in bank.templates.iter().enumerate() {
            let gpath = format!("geometry-templates/templates/{i}");
            if g.kind == GeometryKind::GeometryInstance {
                r.error(st, "BAD_GEOMETRY_SHAPE", format!("{gpath}/type"), "a template cannot be a GeometryInstance");
                continue;
            }
            geometry_structure(&mut r, g, &gpath);
        }
    }
    for k in model.extra.keys().filter(|k| !k.starts_with('+')) {
        r.warning(st, "EXTRA_ROOT_PROPERTY", k.clone(), "root member not defined by CityJSON or an Extension");
    }
    r.sort();
    r
}

fn geometry_structure(r: &mut ValidationReport, g: &Geometry, gpath: &str) {
    let st = Stage::Structure;
    if let Some(msg) = codec::shape_problem(g) {
        r.error(st, "BAD_GEOMETRY_SHAPE", format!("{gpath}/boundaries"), msg);
    } else if g.kind.has_rings() {
        let mut bad_ring = None;
        g.boundaries.for_each_at_level(g.kind.boundary_depth() - 1, &mut |ring| {
            if bad_ring.is_some() {
                return;
            }
            if ring.len() < 3 {
                bad_ring = Some(format!("ring with {} indices", ring.len()));
            } else if ring.first() == ring.last() {
                bad_ring = Some("ring repeats its first index at the end".to_string());
            }
        });
        if let Some(msg) = bad_ring {
            r.error(st, "BAD_GEOMETRY_SHAPE", format!("{gpath}/boundaries"), msg);
        }
    }
    if g.kind != GeometryKind::GeometryInstance {
        match g.lod {
            None => r.error(st, "MISSING_LOD", format!("{gpath}/lod"), "geometry has no lod"),
            Some(l) if !(0.0..4.0).contains(&l) => {
                r.error(st, "UNSUPPORTED_LOD", format!("{gpath}/lod"), format!("lod {l} is outside 0..4"))
            }
            _ => {}
        }
    }
    if let Some(sem) = &g.semantics {
        for (i, s) in sem.surfaces.iter().enumerate() {
            if !SEMANTIC_TYPES.contains(&s.kind.as_str()) && !s.kind.starts_with('+') {
                r.warning(
                    st,
                    "UNKNOWN_SEMANTIC_TYPE",
                    format!("{gpath}/semantics/surfaces/{i}/type"),
                    format!("`{}` is not a known semantic surface type", s.kind),
                );
            }
        }
    }
}

/// Consistency checks; assumes the structure layer found no errors.
pub fn validate_consistency(model: &CityModel) -> ValidationReport {
    consistency(model, &[])
}

fn consistency(model: &CityModel, duplicate_ids: &[String]) -> ValidationReport {
    let mut r = ValidationReport::default();
    let st = Stage::Consistency;

    // 1. parent/child links
    for (id, co) in &model.city_objects {
        for c in co.children() {
            let ok = model
                .city_objects
                .get(c)
                .is_some_and(|child| child.parents().contains(id));
            if !ok {
                r.error(
                    st,
                    "PARENT_CHILD_MISMATCH",
                    format!("CityObjects/{id}/children"),
                    format!("child `{c}` is missing or does not list `{id}` as parent"),
                );
            }
        }
        for p in co.parents() {
            let ok = model
                .city_objects
                .get(p)
                .is_some_and(|parent| parent.children().contains(id));
            if !ok {
                r.error(
                    st,
                    "PARENT_CHILD_MISMATCH",
                    format!("CityObjects/{id}/parents"),
                    format!("parent `{p}` is missing or does not list `{id}` as child"),
                );
            }
        }
    }

    // 3. duplicate ids seen while reading text
    for id in duplicate_ids {
        r.error(st, "DUPLICATE_ID", format!("CityObjects/{id}"), format!("city object id `{id}` appears more than once"));
    }

    // 2 + 5, per geometry
    let nverts = model.vertices.len();
    let ntemplates = model
        .geometry_templates
        .as_ref()
        .map_or(0, |b| b.templates.len());
    for (id, gi, g) in model.geometries() {
        let gpath = format!("CityObjects/{id}/geometry/{gi}");
        index_range(&mut r, g, &gpath, nverts);
        semantics_shape(&mut r, g, &gpath);
        if let Some(inst) = &g.instance {
            if inst.template >= ntemplates {
                r.error(
                    st,
                    "TEMPLATE_INDEX_OUT_OF_RANGE",
                    format!("{gpath}/template"),
                    format!("template {} does not exist ({ntemplates} templates)", inst.template),
                );
            }
        }
        appearance_ranges(&mut r, g, &gpath, model.appearance.as_ref());
    }
    if let Some(bank) = &model.geometry_templates {
        for (i, g) in bank.templates.iter().enumerate() {
            let gpath = format!("geometry-templates/templates/{i}");
            index_range(&mut r, g, &gpath, bank.vertices.len());
            semantics_shape(&mut r, g, &gpath);
        }
    }

    // 4. duplicate and orphan vertices
    let mut seen: HashMap<[u64; 3], usize> = HashMap::with_capacity(nverts);
    for (i, v) in model.vertices.iter().enumerate() {
        let key = v.map(|c| if c == 0.0 { 0u64 } else { c.to_bits() });
        if let Some(first) = seen.get(&key) {
            r.warning(st, "DUPLICATE_VERTEX", format!("vertices/{i}"), format!("same coordinates as vertex {first}"));
        } else {
            seen.insert(key, i);
        }
    }
    for (i, n) in model.vertex_usage().into_iter().enumerate() {
        if n == 0 {
            r.warning(st, "ORPHAN_VERTEX", format!("vertices/{i}"), "vertex is not referenced by any geometry");
        }
    }
    r.sort();
    r
}

fn index_range(r: &mut ValidationReport, g: &Geometry, gpath: &str, len: usize) {
    let mut bad = Vec::new();
    g.boundaries.for_each_leaf(&mut |&i| {
        if i >= len {
            bad.push(i);
        }
    });
    if let Some(first) = bad.first() {
        r.error(
            Stage::Consistency,
            "VERTEX_INDEX_OUT_OF_RANGE",
            format!("{gpath}/boundaries"),
            format!(
                "{} index(es) out of range, first is {first} (pool has {len} vertices)",
                bad.len()
            ),
        );
    }
}

fn values_match(b: &Boundary, v: &SemanticValues, levels: usize, nsurf: usize) -> bool {
    match v {
        Nested::Leaf(None) => true,
        Nested::Leaf(Some(i)) => levels == 0 && *i < nsurf,
        Nested::List(vs) => match b {
            Nested::List(bs) if levels > 0 => {
                bs.len() == vs.len()
                    && bs
                        .iter()
                        .zip(vs)
                        .all(|(bc, vc)| values_match(bc, vc, levels - 1, nsurf))
            }
            _ => false,
        },
    }
}

fn semantics_shape(r: &mut ValidationReport, g: &Geometry, gpath: &str) {
    let Some(sem) = &g.semantics else { return };
    let levels = g.kind.semantics_depth();
    let ok = g.kind != GeometryKind::GeometryInstance
        && values_match(&g.boundaries, &sem.values, levels, sem.surfaces.len());
    if !ok {
        r.error(
            Stage::Consistency,
            "SEMANTICS_SHAPE_MISMATCH",
            format!("{gpath}/semantics/values"),
            format!(
                "values must follow the boundaries down to the {} level and index one of {} surfaces",
                if levels == 1 && !g.kind.has_rings() { "primitive" } else { "surface" },
                sem.surfaces.len()
            ),
        );
    }
}

fn for_each_int(v: &Value, f: &mut impl FnMut(u64)) {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_u64() {
                f(i)
            }
        }
        Value::Array(a) => a.iter().for_each(|x| for_each_int(x, f)),
        _ => {}
    }
}

/// Innermost arrays of texture values: `[texture, uv, uv, ...]`.
fn for_each_texture_ring(v: &Value, f: &mut impl FnMut(&[Value])) {
    if let Value::Array(a) = v {
        if a.iter().all(|x| !x.is_array()) {
            f(a);
        } else {
            a.iter().for_each(|x| for_each_texture_ring(x, f));
        }
    }
}

fn appearance_ranges(r: &mut ValidationReport, g: &Geometry, gpath: &str, app: Option<&Appearance>) {
    let (nmat, ntex, nuv) = app.map_or((0, 0, 0), |a| {
        (a.materials.len(), a.textures.len(), a.vertices_texture.len())
    });
    if let Some(Value::Object(themes)) = &g.material {
        for (theme, b) in themes {
            let mut bad = false;
            if let Some(v) = b.get("value") {
                for_each_int(v, &mut |i| bad |= i as usize >= nmat);
            }
            if let Some(v) = b.get("values") {
                for_each_int(v, &mut |i| bad |= i as usize >= nmat);
            }
            if bad {
                r.error(
                    Stage::Consistency,
                    "MATERIAL_INDEX_OUT_OF_RANGE",
                    format!("{gpath}/material/{theme}"),
                    format!("material index beyond the {nmat} materials"),
                );
            }
        }
    }
    if let Some(Value::Object(themes)) = &g.texture {
        for (theme, b) in themes {
            let mut bad = false;
            if let Some(v) = b.get("values") {
                for_each_texture_ring(v, &mut |ring| {
                    let mut ints = ring.iter().filter_map(Value::as_u64);
                    if let Some(t) = ints.next() {
                        bad |= t as usize >= ntex;
                    }
                    bad |= ints.any(|uv| uv as usize >= nuv);
                });
            }
            if bad {
                r.error(
                    Stage::Consistency,
                    "TEXTURE_INDEX_OUT_OF_RANGE",
                    format!("{gpath}/texture/{theme}"),
                    format!("texture or uv index beyond {ntex} textures / {nuv} texture vertices"),
                );
            }
        }
    }
}

/// Structure then consistency on an in-memory model. Consistency is skipped
/// when structure reports errors.
pub fn validate_model(model: &CityModel) -> ValidationReport {
    let mut r = validate_structure(model);
    if r.is_valid() {
        r.merge(validate_consistency(model));
    }
    r
}

fn error_path(e: &Error) -> String {
    match e {
        Error::BadMemberType { path, .. } | Error::BadGeometryShape { path, .. } => path.clone(),
        Error::MissingRequiredMember(p) => p.clone(),
        Error::DuplicateId(id) => format!("CityObjects/{id}"),
        Error::DuplicateKey { key, .. } => key.clone(),
        _ => String::new(),
    }
}

/// Full validation of CityJSON text: syntax, then structure, then
/// consistency. A stage only runs when the previous one found no errors.
pub fn validate(bytes: &[u8]) -> ValidationReport {
    let mut r = ValidationReport::default();
    let (value, dup_ids) = match codec::read_json(bytes, DuplicateIds::Collect) {
        Ok(x) => x,
        Err(e) => {
            r.error(Stage::Syntax, e.code(), error_path(&e), e.to_string());
            return r;
        }
    };
    let model = match codec::decode(&value) {
        Ok((m, _)) => m,
        Err(e) => {
            let stage = if e.code() == "NOT_CITYJSON" { Stage::Syntax } else { Stage::Structure };
            r.error(stage, e.code(), error_path(&e), e.to_string());
            return r;
        }
    };
    r = validate_structure(&model);
    if r.is_valid() {
        r.merge(consistency(&model, &dup_ids));
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::parse_str;

    fn doc(body: &str) -> String {
        format!(r#"{{"type":"CityJSON","version":"1.0",{body}}}"#)
    }

    const CUBE_VERTICES: &str = "[[0,0,0],[1,0,0],[1,1,0],[0,1,0],[0,0,1],[1,0,1],[1,1,1],[0,1,1]]";

    #[test]
    fn minimal_is_clean() {
        let r = validate(doc(r#""CityObjects":{},"vertices":[]"#).as_bytes());
        assert!(r.is_empty(), "{r}");
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn non_json_single_finding() {
        let r = validate(b"this is not json");
        assert_eq!(r.errors.len(), 1);
        assert_eq!(r.errors[0].code, "SYNTAX_ERROR");
        assert_eq!(r.errors[0].stage, Stage::Syntax);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn solid_with_depth_three() {
        let d = doc(&format!(
            r#""CityObjects":{{"b":{{"type":"Building","geometry":[{{"type":"Solid","lod":2,"boundaries":[[[0,1,2,3]]]}}]}}}},"vertices":{CUBE_VERTICES}"#
        ));
        let r = validate(d.as_bytes());
        assert_eq!(r.count("BAD_GEOMETRY_SHAPE"), 1, "{r}");
        assert_eq!(r.exit_code(), 2);
    }

    #[test]
    fn epsg_accepted_other_crs_rejected() {
        let ok = doc(r#""metadata":{"referenceSystem":"EPSG:7415"},"CityObjects":{},"vertices":[]"#);
        assert!(validate(ok.as_bytes()).is_empty());
        let bad = doc(r#""metadata":{"referenceSystem":"+proj=longlat"},"CityObjects":{},"vertices":[]"#);
        assert_eq!(validate(bad.as_bytes()).count("BAD_CRS"), 1);
    }

    #[test]
    fn typo_type_path() {
        let d = doc(r#""CityObjects":{"x":{"type":"Buidling","geometry":[]}},"vertices":[]"#);
        let r = validate(d.as_bytes());
        assert_eq!(r.errors.len(), 1);
        assert_eq!(r.errors[0].code, "UNKNOWN_COTYPE");
        assert_eq!(r.errors[0].path, "CityObjects/x/type");
    }

    #[test]
    fn parent_child_mismatch() {
        let d = doc(r#""CityObjects":{"id-1":{"type":"Building","children":["id-3"],"geometry":[]},"id-2":{"type":"BuildingPart","parents":["id-1"],"geometry":[]},"id-3":{"type":"BuildingPart","parents":["id-1"],"geometry":[]}},"vertices":[]"#);
        let r = validate(d.as_bytes());
        assert_eq!(r.errors.len(), 1, "{r}");
        assert_eq!(r.errors[0].code, "PARENT_CHILD_MISMATCH");
        assert_eq!(r.errors[0].path, "CityObjects/id-2/parents");
    }

    #[test]
    fn index_out_of_range() {
        let verts: Vec<String> = (0..10).map(|i| format!("[{i},0,0]")).collect();
        let d = doc(&format!(
            r#""CityObjects":{{"a":{{"type":"Road","geometry":[{{"type":"MultiPoint","lod":1,"boundaries":[0,1,2,3,4,5,6,7,8,9,999]}}]}}}},"vertices":[{}]"#,
            verts.join(",")
        ));
        let r = validate(d.as_bytes());
        assert_eq!(r.errors.len(), 1);
        assert_eq!(r.errors[0].code, "VERTEX_INDEX_OUT_OF_RANGE");
    }

    #[test]
    fn duplicate_and_orphan_are_warnings() {
        let d = doc(r#""CityObjects":{"a":{"type":"Road","geometry":[{"type":"MultiPoint","lod":1,"boundaries":[0,1]}]}},"vertices":[[1,2,3],[1,2,3],[5,5,5]]"#);
        let r = validate(d.as_bytes());
        assert!(r.is_valid());
        assert_eq!(r.count("DUPLICATE_VERTEX"), 1);
        assert_eq!(r.count("ORPHAN_VERTEX"), 1);
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn sample_solid_semantics_coherent() {
        let d = doc(r#""CityObjects":{"b":{"type":"Building","geometry":[{
            "type": "Solid",
            "lod": 2,
            "boundaries": [
              [ [[0,3,2,1,22]], [[4,5,6,7]], [[0,1,5,4]], [[1,2,6,5]] ]
            ],
            "semantics": {
              "surfaces" : [
                { "type": "RoofSurface" },
                {
                  "type": "WallSurface",
                  "paint": "blue"
                },
                { "type": "GroundSurface" }
              ],
              "values": [ [0, 1, 1, 2] ]
            }
          }]}},"vertices":[]"#);
        let (mut m, _) = parse_str(&d).unwrap();
        m.vertices = (0..23).map(|i| [i as f64, 0.0, 0.0]).collect();
        let r = validate_model(&m);
        assert_eq!(r.count("SEMANTICS_SHAPE_MISMATCH"), 0, "{r}");
        // a fifth value breaks the shape
        if let Some(s) = &mut m.city_objects["b"].geometry[0].semantics {
            if let Nested::List(shells) = &mut s.values {
                if let Nested::List(v) = &mut shells[0] {
                    v.push(Nested::Leaf(Some(0)));
                }
            }
        }
        assert_eq!(validate_model(&m).count("SEMANTICS_SHAPE_MISMATCH"), 1);
    }

    #[test]
    fn duplicate_id_in_text() {
        let d = doc(r#""CityObjects":{"a":{"type":"Road","geometry":[]},"a":{"type":"Road","geometry":[]}},"vertices":[]"#);
        let r = validate(d.as_bytes());
        assert_eq!(r.count("DUPLICATE_ID"), 1, "{r}");
        assert_eq!(r.errors.len(), 1);
    }

    #[test]
    fn report_is_sorted_and_serializable() {
        let d = doc(r#""CityObjects":{"z":{"type":"Foo","geometry":[]},"a":{"type":"Bar","geometry":[]}},"vertices":[]"#);
        let r = validate(d.as_bytes());
        let paths: Vec<_> = r.errors.iter().map(|f| f.path.as_str()).collect();
        assert_eq!(paths, ["CityObjects/a/type", "CityObjects/z/type"]);
        let lines = r.to_json_lines();
        assert_eq!(lines.lines().count(), 2);
        let first: Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
        assert_eq!(first["code"], "UNKNOWN_COTYPE");
        assert_eq!(first["severity"], "error");
        assert_eq!(validate(d.as_bytes()), r);
    }

    #[test]
    fn ring_closure_and_lod() {
        let d = doc(&format!(
            r#""CityObjects":{{"a":{{"type":"Building","geometry":[{{"type":"MultiSurface","boundaries":[[[0,1,2,0]]]}}]}}}},"vertices":{CUBE_VERTICES}"#
        ));
        let r = validate(d.as_bytes());
        assert_eq!(r.count("BAD_GEOMETRY_SHAPE"), 1, "{r}");
        assert_eq!(r.count("MISSING_LOD"), 1, "{r}");
    }
}
