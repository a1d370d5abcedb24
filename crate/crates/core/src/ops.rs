//! Model-level operators: subset, merge, partition, texture path rewrite,
//! metadata refresh and statistics.
//!
//! Every operator that drops city objects rebuilds the vertex pool from the
//! vertices still referenced, so indices in the output always start at 0.

use std::collections::{BTreeMap, HashMap, HashSet};

use indexmap::IndexSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::codec;
use crate::error::{Error, Result};
use crate::geoprocess::{compute_extent, dequantize, quantize_with};
use crate::model::*;

#[derive(Clone, Debug, PartialEq)]
pub enum Selector {
    Ids(Vec<String>),
    Types(Vec<String>),
    /// `[minx, miny, maxx, maxy]` in real-world XY.
    BBox([f64; 4]),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartitionStrategy {
    Grid { nx: usize, ny: usize },
    ByType,
    Random { k: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdPolicy {
    Error,
    /// Colliding ids get `-<n>` appended, `n` starting at the position of
    /// the model in the input list.
    Suffix,
}

/// One output of [`partition`]. `id` is the part name used in file names:
/// `r<row>c<col>`, the city object type, or a zero-padded ordinal.
#[derive(Clone, Debug, PartialEq)]
pub struct Part {
    pub id: String,
    pub model: CityModel,
}

// ---------------------------------------------------------------------------
// extraction

/// `seeds` plus all their descendants, in model order.
fn with_descendants(model: &CityModel, seeds: impl IntoIterator<Item = String>) -> HashSet<String> {
    let mut out = HashSet::new();
    let mut stack: Vec<String> = seeds.into_iter().collect();
    while let Some(id) = stack.pop() {
        if !out.insert(id.clone()) {
            continue;
        }
        if let Some(co) = model.city_objects.get(&id) {
            stack.extend(co.children().iter().cloned());
        }
    }
    out
}

fn binds_appearance(model: &CityModel) -> bool {
    model
        .geometries()
        .any(|(_, _, g)| g.material.is_some() || g.texture.is_some())
        || model.geometry_templates.as_ref().is_some_and(|b| {
            b.templates
                .iter()
                .any(|g| g.material.is_some() || g.texture.is_some())
        })
}

/// New model with only the objects in `keep`. Links to dropped objects are
/// removed and the vertex pool is rebuilt.
fn extract(model: &CityModel, keep: &HashSet<String>) -> CityModel {
    let mut out = CityModel {
        city_objects: Default::default(),
        vertices: Vec::new(),
        geometry_templates: None,
        appearance: None,
        ..model.clone()
    };
    for (id, co) in &model.city_objects {
        if !keep.contains(id) {
            continue;
        }
        let mut co = co.clone();
        let filter = |l: &mut Option<Vec<String>>| {
            if let Some(list) = l {
                list.retain(|x| keep.contains(x));
                if list.is_empty() {
                    *l = None;
                }
            }
        };
        filter(&mut co.parents);
        filter(&mut co.children);
        out.city_objects.insert(id.clone(), co);
    }
    out.vertices = model.vertices.clone();
    let keep_v: Vec<bool> = out.vertex_usage().into_iter().map(|n| n > 0).collect();
    out.retain_vertices(&keep_v);
    if out.vertices.is_empty() {
        out.transform = None;
    }
    if out
        .geometries()
        .any(|(_, _, g)| g.kind == GeometryKind::GeometryInstance)
    {
        out.geometry_templates = model.geometry_templates.clone();
    }
    if binds_appearance(&out) {
        out.appearance = model.appearance.clone();
    }
    out
}

fn object_extent(model: &CityModel, ids: &HashSet<String>) -> Option<[f64; 6]> {
    let mut ext: Option<[f64; 6]> = None;
    for id in ids {
        let Some(co) = model.city_objects.get(id) else { continue };
        for g in &co.geometry {
            g.boundaries.for_each_leaf(&mut |&i| {
                if let Ok(p) = real_world_vertex(model, i) {
                    let e = ext.get_or_insert([p[0], p[1], p[2], p[0], p[1], p[2]]);
                    for k in 0..3 {
                        e[k] = e[k].min(p[k]);
                        e[k + 3] = e[k + 3].max(p[k]);
                    }
                }
            });
        }
    }
    ext
}

fn centroid_xy(e: &[f64; 6]) -> (f64, f64) {
    ((e[0] + e[3]) / 2.0, (e[1] + e[4]) / 2.0)
}

/// Objects matching the selector plus all their children.
pub fn subset(model: &CityModel, selector: &Selector) -> Result<CityModel> {
    let seeds: Vec<String> = match selector {
        Selector::Ids(ids) => {
            if let Some(missing) = ids.iter().find(|id| !model.city_objects.contains_key(*id)) {
                return Err(Error::UnknownId(missing.clone()));
            }
            ids.clone()
        }
        Selector::Types(types) => model
            .city_objects
            .iter()
            .filter(|(_, co)| types.iter().any(|t| t == co.kind.as_str()))
            .map(|(id, _)| id.clone())
            .collect(),
        Selector::BBox([minx, miny, maxx, maxy]) => model
            .city_objects
            .keys()
            .filter(|id| {
                let tree = with_descendants(model, [(*id).clone()]);
                object_extent(model, &tree).is_some_and(|e| {
                    let (cx, cy) = centroid_xy(&e);
                    cx >= *minx && cx <= *maxx && cy >= *miny && cy <= *maxy
                })
            })
            .cloned()
            .collect(),
    };
    Ok(extract(model, &with_descendants(model, seeds)))
}

// ---------------------------------------------------------------------------
// merge

fn same_crs(a: Option<&str>, b: Option<&str>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(a), Some(b)) => match (epsg_code(a), epsg_code(b)) {
            (Some(x), Some(y)) => x == y,
            _ => a == b,
        },
        _ => false,
    }
}

fn offset_ints(v: &mut Value, off: usize) {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_u64() {
                *v = Value::from(i + off as u64);
            }
        }
        Value::Array(a) => a.iter_mut().for_each(|x| offset_ints(x, off)),
        _ => {}
    }
}

fn offset_material(binding: &mut Value, off: usize) {
    if let Value::Object(themes) = binding {
        for b in themes.values_mut() {
            if let Some(v) = b.get_mut("value") {
                offset_ints(v, off);
            }
            if let Some(v) = b.get_mut("values") {
                offset_ints(v, off);
            }
        }
    }
}

fn offset_texture_rings(v: &mut Value, tex_off: usize, uv_off: usize) {
    if let Value::Array(a) = v {
        if a.iter().all(|x| !x.is_array()) {
            for (i, x) in a.iter_mut().enumerate() {
                offset_ints(x, if i == 0 { tex_off } else { uv_off });
            }
        } else {
            a.iter_mut()
                .for_each(|x| offset_texture_rings(x, tex_off, uv_off));
        }
    }
}

fn offset_texture(binding: &mut Value, tex_off: usize, uv_off: usize) {
    if let Value::Object(themes) = binding {
        for b in themes.values_mut() {
            if let Some(v) = b.get_mut("values") {
                offset_texture_rings(v, tex_off, uv_off);
            }
        }
    }
}

#[derive(Clone, Copy, Default)]
struct Offsets {
    vertex: usize,
    template: usize,
    template_vertex: usize,
    material: usize,
    texture: usize,
    uv: usize,
}

fn shift_geometry(g: &mut Geometry, vertex_off: usize, o: &Offsets) {
    g.boundaries.for_each_leaf_mut(&mut |i| *i += vertex_off);
    if let Some(inst) = &mut g.instance {
        inst.template += o.template;
    }
    if let Some(m) = &mut g.material {
        offset_material(m, o.material);
    }
    if let Some(t) = &mut g.texture {
        offset_texture(t, o.texture, o.uv);
    }
}

/// Brings every input onto one vertex representation: unchanged when none
/// or all-identical transforms, otherwise real coordinates re-quantized
/// with the finest input scale.
fn harmonize(models: &[CityModel]) -> Result<(Vec<CityModel>, Option<Transform>)> {
    let transforms: Vec<Option<&Transform>> = models.iter().map(|m| m.transform.as_ref()).collect();
    if transforms.iter().all(Option::is_none) {
        return Ok((models.to_vec(), None));
    }
    if let Some(Some(first)) = transforms.first() {
        if transforms.iter().all(|t| *t == Some(*first)) {
            return Ok((models.to_vec(), Some((*first).clone())));
        }
    }
    let mut scale = [f64::INFINITY; 3];
    for t in transforms.iter().flatten() {
        for (s, ts) in scale.iter_mut().zip(t.scale) {
            *s = s.min(ts);
        }
    }
    let real: Vec<CityModel> = models
        .iter()
        .map(|m| if m.transform.is_some() { dequantize(m) } else { Ok(m.clone()) })
        .collect::<Result<_>>()?;
    let mut translate = [f64::INFINITY; 3];
    for v in real.iter().flat_map(|m| m.vertices.iter()) {
        for k in 0..3 {
            translate[k] = translate[k].min(v[k]);
        }
    }
    if translate[0].is_infinite() {
        translate = [0.0; 3];
    }
    let t = Transform { scale, translate };
    let quantized = real
        .iter()
        .map(|m| quantize_with(m, &t))
        .collect::<Result<_>>()?;
    Ok((quantized, Some(t)))
}

/// Union of several models. Vertex pools, template banks and appearances
/// are concatenated with their indices offset.
pub fn merge(models: &[CityModel], policy: IdPolicy) -> Result<CityModel> {
    let Some(first) = models.first() else {
        return Ok(CityModel::new());
    };
    for m in &models[1..] {
        if !same_crs(first.reference_system(), m.reference_system()) {
            return Err(Error::CrsMismatch(
                first.reference_system().map(str::to_string),
                m.reference_system().map(str::to_string),
            ));
        }
    }
    let (inputs, transform) = harmonize(models)?;

    let mut out = CityModel {
        city_objects: Default::default(),
        vertices: Vec::new(),
        transform,
        geometry_templates: None,
        appearance: None,
        ..first.clone()
    };
    let mut bank: Option<TemplateBank> = None;
    let mut appearance: Option<Appearance> = None;
    // identical banks and appearances (e.g. copies made by partition) are shared
    let mut seen_banks: Vec<(&TemplateBank, usize, usize)> = Vec::new();
    let mut seen_apps: Vec<(&Appearance, usize, usize, usize)> = Vec::new();

    for (n, m) in inputs.iter().enumerate() {
        let mut off = Offsets {
            vertex: out.vertices.len(),
            ..Offsets::default()
        };
        if let Some(b) = &m.geometry_templates {
            if let Some((_, t, tv)) = seen_banks.iter().find(|(s, _, _)| *s == b) {
                off.template = *t;
                off.template_vertex = *tv;
            } else {
                let target = bank.get_or_insert_with(TemplateBank::default);
                off.template = target.templates.len();
                off.template_vertex = target.vertices.len();
                seen_banks.push((b, off.template, off.template_vertex));
                for t in &b.templates {
                    let mut t = t.clone();
                    shift_geometry(&mut t, off.template_vertex, &Offsets { template: 0, ..off });
                    target.templates.push(t);
                }
                target.vertices.extend_from_slice(&b.vertices);
            }
        }
        if let Some(a) = &m.appearance {
            if let Some((_, mo, to, uo)) = seen_apps.iter().find(|(s, ..)| *s == a) {
                (off.material, off.texture, off.uv) = (*mo, *to, *uo);
            } else {
                let target = appearance.get_or_insert_with(|| Appearance {
                    extra: a.extra.clone(),
                    ..Appearance::default()
                });
                off.material = target.materials.len();
                off.texture = target.textures.len();
                off.uv = target.vertices_texture.len();
                seen_apps.push((a, off.material, off.texture, off.uv));
                target.materials.extend(a.materials.iter().cloned());
                target.textures.extend(a.textures.iter().cloned());
                target.vertices_texture.extend_from_slice(&a.vertices_texture);
            }
        }

        let mut rename: HashMap<&str, String> = HashMap::new();
        for id in m.city_objects.keys() {
            if out.city_objects.contains_key(id) {
                if policy == IdPolicy::Error {
                    return Err(Error::DuplicateId(id.clone()));
                }
                let mut k = n;
                let new_id = loop {
                    let candidate = format!("{id}-{k}");
                    if !out.city_objects.contains_key(&candidate) && !m.city_objects.contains_key(&candidate) {
                        break candidate;
                    }
                    k += 1;
                };
                rename.insert(id.as_str(), new_id);
            }
        }
        let renamed = |id: &String| rename.get(id.as_str()).cloned().unwrap_or_else(|| id.clone());

        for (id, co) in &m.city_objects {
            let mut co = co.clone();
            for list in [&mut co.parents, &mut co.children].into_iter().flatten() {
                for x in list.iter_mut() {
                    *x = renamed(x);
                }
            }
            for g in co.geometry.iter_mut() {
                shift_geometry(g, off.vertex, &off);
            }
            out.city_objects.insert(renamed(id), co);
        }
        out.vertices.extend_from_slice(&m.vertices);

        for (name, e) in &m.extensions {
            out.extensions.entry(name.clone()).or_insert_with(|| e.clone());
        }
        if out.metadata.is_none() {
            out.metadata = m.metadata.clone();
        }
    }
    out.geometry_templates = bank;
    out.appearance = appearance;
    Ok(out)
}

// ---------------------------------------------------------------------------
// partition

/// First-level groups: each root object (no resolvable parent) with all its
/// descendants. Objects reachable from several roots go to the first.
fn first_level_groups(model: &CityModel) -> Vec<(String, HashSet<String>)> {
    let mut assigned: HashSet<String> = HashSet::new();
    let mut groups = Vec::new();
    let is_root = |co: &CityObject| co.parents().iter().all(|p| !model.city_objects.contains_key(p));
    let roots: Vec<&String> = model
        .city_objects
        .iter()
        .filter(|(_, co)| is_root(co))
        .map(|(id, _)| id)
        .collect();
    for root in roots.into_iter().chain(model.city_objects.keys()) {
        if assigned.contains(root) {
            continue;
        }
        let mut tree = with_descendants(model, [root.clone()]);
        tree.retain(|id| !assigned.contains(id));
        assigned.extend(tree.iter().cloned());
        groups.push((root.clone(), tree));
    }
    groups
}

/// Splits a model into independent parts; each first-level object travels
/// with its children. A CityObjectGroup goes to the part of its first
/// member.
pub fn partition(model: &CityModel, strategy: &PartitionStrategy) -> Result<Vec<Part>> {
    if model.city_objects.is_empty() {
        return Err(Error::EmptyModel);
    }
    let groups = first_level_groups(model);

    // (sort key, part id)
    let mut assign: Vec<Option<((usize, usize), String)>> = vec![None; groups.len()];
    match strategy {
        PartitionStrategy::Grid { nx, ny } => {
            if *nx == 0 || *ny == 0 {
                return Err(Error::BadStrategy(format!("grid {nx}x{ny} has no cells")));
            }
            let ext = compute_extent(model).ok();
            let cell = |v: f64, lo: f64, hi: f64, n: usize| -> usize {
                let w = (hi - lo) / n as f64;
                if w <= 0.0 {
                    return 0;
                }
                // boundaries belong to the lower cell
                (((v - lo) / w).ceil() as i64 - 1).clamp(0, n as i64 - 1) as usize
            };
            for (slot, (_, tree)) in assign.iter_mut().zip(&groups) {
                let (row, col) = match (ext, object_extent(model, tree)) {
                    (Some(e), Some(oe)) => {
                        let (cx, cy) = centroid_xy(&oe);
                        (cell(cy, e[1], e[4], *ny), cell(cx, e[0], e[3], *nx))
                    }
                    _ => (0, 0),
                };
                *slot = Some(((row, col), format!("r{row}c{col}")));
            }
        }
        PartitionStrategy::ByType => {
            let mut order: IndexSet<String> = IndexSet::new();
            for (slot, (root, _)) in assign.iter_mut().zip(&groups) {
                let name = model.city_objects[root].kind.as_str().to_string();
                let (pos, _) = order.insert_full(name.clone());
                *slot = Some(((pos, 0), name));
            }
        }
        PartitionStrategy::Random { k, seed } => {
            if *k == 0 {
                return Err(Error::BadStrategy("random partition needs k >= 1".into()));
            }
            let width = k.to_string().len();
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for slot in assign.iter_mut() {
                let i = rng.gen_range(0..*k);
                *slot = Some(((i, 0), format!("{i:0width$}")));
            }
        }
    }

    // groups follow their first member
    let group_of: HashMap<&str, usize> = groups
        .iter()
        .enumerate()
        .flat_map(|(gi, (_, tree))| tree.iter().map(move |id| (id.as_str(), gi)))
        .collect();
    for (gi, (root, _)) in groups.iter().enumerate() {
        let co = &model.city_objects[root];
        if co.kind.as_str() != "CityObjectGroup" {
            continue;
        }
        let first_member = co
            .extra
            .get("members")
            .and_then(Value::as_array)
            .and_then(|a| a.first())
            .and_then(Value::as_str);
        if let Some(target) = first_member.and_then(|m| group_of.get(m)) {
            if *target != gi {
                assign[gi] = assign[*target].clone();
            }
        }
    }

    let mut parts: BTreeMap<(usize, usize), (String, HashSet<String>)> = BTreeMap::new();
    for (slot, (_, tree)) in assign.into_iter().zip(groups) {
        let (key, id) = slot.expect("every group assigned");
        parts
            .entry(key)
            .or_insert_with(|| (id, HashSet::new()))
            .1
            .extend(tree);
    }
    Ok(parts
        .into_values()
        .map(|(id, ids)| Part {
            id,
            model: extract(model, &ids),
        })
        .collect())
}

// ---------------------------------------------------------------------------
// appearance, metadata, statistics

/// Rewrites every texture image path to `base` + its file name.
pub fn update_texture_paths(model: &CityModel, base: &str) -> CityModel {
    let mut out = model.clone();
    if let Some(app) = &mut out.appearance {
        for t in app.textures.iter_mut() {
            let name = t
                .image
                .rsplit(['/', '\\'])
                .next()
                .unwrap_or(&t.image)
                .to_string();
            t.image = format!("{base}{name}");
        }
    }
    out
}

/// Rounds to the decimal places of `step`, removing the noise that
/// `v * scale + translate` leaves in the last digits.
fn round_to_step(x: f64, step: f64) -> f64 {
    let places = (-step.log10()).ceil();
    if !(0.0..=15.0).contains(&places) {
        return x;
    }
    let f = 10f64.powi(places as i32);
    (x * f).round() / f
}

/// Recomputes the derived metadata: extent, LoD histogram, texture and
/// material presence, and the list of extensions.
pub fn refresh_metadata(model: &CityModel) -> CityModel {
    let mut out = model.clone();
    let mut md = out.metadata.take().unwrap_or_default();
    md.geographical_extent = compute_extent(model).ok().map(|mut e| {
        if let Some(t) = &model.transform {
            for (k, x) in e.iter_mut().enumerate() {
                *x = round_to_step(*x, t.scale[k % 3]);
            }
        }
        e
    });
    let mut lods: BTreeMap<String, u64> = BTreeMap::new();
    for (_, _, g) in model.geometries() {
        if let Some(l) = g.lod {
            *lods.entry(codec::number(l).to_string()).or_default() += 1;
        }
    }
    md.present_lods = Some(lods);
    let app = model.appearance.as_ref();
    let present = |b: bool| Value::from(if b { "present" } else { "absent" });
    md.extra.insert(
        "textures".into(),
        present(app.is_some_and(|a| !a.textures.is_empty())),
    );
    md.extra.insert(
        "materials".into(),
        present(app.is_some_and(|a| !a.materials.is_empty())),
    );
    if model.extensions.is_empty() {
        md.extra.shift_remove("extensions");
    } else {
        let e: Map<String, Value> = model
            .extensions
            .iter()
            .map(|(n, e)| {
                (
                    n.clone(),
                    serde_json::json!({"url": e.url, "version": e.version}),
                )
            })
            .collect();
        md.extra.insert("extensions".into(), Value::Object(e));
    }
    out.metadata = Some(md);
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub city_objects: BTreeMap<String, usize>,
    pub geometries: BTreeMap<String, usize>,
    pub vertices: usize,
    pub templates: usize,
    pub template_vertices: usize,
    pub minified_bytes: usize,
}

impl Stats {
    pub fn total_objects(&self) -> usize {
        self.city_objects.values().sum()
    }
}

pub fn stats(model: &CityModel) -> Stats {
    let mut s = Stats::default();
    for co in model.city_objects.values() {
        *s.city_objects.entry(co.kind.to_string()).or_default() += 1;
        for g in &co.geometry {
            *s.geometries.entry(g.kind.to_string()).or_default() += 1;
        }
    }
    s.vertices = model.vertices.len();
    if let Some(b) = &model.geometry_templates {
        s.templates = b.templates.len();
        s.template_vertices = b.vertices.len();
    }
    s.minified_bytes = codec::minified_size(model);
    s
}
