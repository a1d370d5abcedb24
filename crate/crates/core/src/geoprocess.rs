//! Coordinate-level transformations: quantization, vertex deduplication,
//! orphan removal, template instantiation and extent computation.
//!
//! All functions take a model by reference and return a new one.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::*;

const MAX_QUANTUM: f64 = 9_007_199_254_740_992.0; // 2^53

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuantizationParams {
    /// Decimal digits kept; the scale is `10^-important_digits`.
    pub important_digits: u32,
    /// Dequantize first when the model already has a transform, instead
    /// of failing with `ALREADY_QUANTIZED`.
    pub requantize: bool,
}

impl QuantizationParams {
    pub fn digits(important_digits: u32) -> Self {
        QuantizationParams {
            important_digits,
            requantize: false,
        }
    }

    pub fn scale(&self) -> f64 {
        10f64.powi(-(self.important_digits as i32))
    }
}

/// Replaces real coordinates by integer quanta. `translate` is the per-axis
/// minimum so that all quanta are non-negative; an empty pool gets
/// translate `[0, 0, 0]`. Rounding is half away from zero.
pub fn quantize(model: &CityModel, params: QuantizationParams) -> Result<CityModel> {
    if params.important_digits > 12 {
        return Err(Error::BadDigits(params.important_digits));
    }
    let real = match (&model.transform, params.requantize) {
        (None, _) => model.clone(),
        (Some(_), true) => dequantize(model)?,
        (Some(_), false) => return Err(Error::AlreadyQuantized),
    };
    let transform = Transform {
        scale: [params.scale(); 3],
        translate: min_corner(&real.vertices).unwrap_or([0.0; 3]),
    };
    quantize_with(&real, &transform)
}

/// Quantizes a model without a transform using the given transform.
pub fn quantize_with(model: &CityModel, transform: &Transform) -> Result<CityModel> {
    if model.transform.is_some() {
        return Err(Error::AlreadyQuantized);
    }
    let mut out = model.clone();
    for v in out.vertices.iter_mut() {
        for (k, c) in v.iter_mut().enumerate() {
            let q = ((*c - transform.translate[k]) / transform.scale[k]).round();
            if !q.is_finite() || q.abs() > MAX_QUANTUM {
                return Err(Error::QuantumOverflow(q));
            }
            // avoid -0 in the output
            *c = q + 0.0;
        }
    }
    out.transform = Some(transform.clone());
    Ok(out)
}

/// Applies the transform to every vertex and drops it.
pub fn dequantize(model: &CityModel) -> Result<CityModel> {
    let t = model.transform.as_ref().ok_or(Error::NoTransform)?;
    let mut out = model.clone();
    for v in out.vertices.iter_mut() {
        *v = t.apply(v);
    }
    out.transform = None;
    Ok(out)
}

fn min_corner(vs: &[Vertex]) -> Option<Vertex> {
    let first = *vs.first()?;
    Some(vs.iter().fold(first, |mut m, v| {
        for k in 0..3 {
            m[k] = m[k].min(v[k]);
        }
        m
    }))
}

/// Merges vertices whose Chebyshev distance (in stored units) is within
/// `tolerance` onto the earliest such vertex, then drops the merged ones.
pub fn dedupe_vertices(model: &CityModel, tolerance: f64) -> CityModel {
    let tolerance = tolerance.max(0.0);
    let n = model.vertices.len();
    let mut target = vec![0usize; n];
    let mut survivor = vec![false; n];

    if tolerance == 0.0 {
        let mut seen: HashMap<[u64; 3], usize> = HashMap::with_capacity(n);
        for (i, v) in model.vertices.iter().enumerate() {
            let key = v.map(|c| (c + 0.0).to_bits());
            let t = *seen.entry(key).or_insert(i);
            target[i] = t;
            survivor[i] = t == i;
        }
    } else {
        // grid of cell size `tolerance`: candidates lie in the 27 neighbours
        let cell = |v: &Vertex| v.map(|c| (c / tolerance).floor() as i64);
        let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (i, v) in model.vertices.iter().enumerate() {
            let c = cell(v);
            let mut best: Option<usize> = None;
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        let Some(list) = grid.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) else {
                            continue;
                        };
                        for &s in list {
                            let w = &model.vertices[s];
                            let d = (0..3).map(|k| (w[k] - v[k]).abs()).fold(0.0, f64::max);
                            if d <= tolerance && best.is_none_or(|b| s < b) {
                                best = Some(s);
                            }
                        }
                    }
                }
            }
            match best {
                Some(s) => target[i] = s,
                None => {
                    target[i] = i;
                    survivor[i] = true;
                    grid.entry(c).or_default().push(i);
                }
            }
        }
    }

    let mut new_index = vec![usize::MAX; n];
    let mut vertices = Vec::new();
    for i in 0..n {
        if survivor[i] {
            new_index[i] = vertices.len();
            vertices.push(model.vertices[i]);
        }
    }
    let mut out = model.clone();
    out.vertices = vertices;
    out.remap_vertex_indices(|i| if i < n { new_index[target[i]] } else { i });
    out
}

/// Drops vertices that no geometry references and rebases the indices.
pub fn remove_orphan_vertices(model: &CityModel) -> CityModel {
    let keep: Vec<bool> = model.vertex_usage().into_iter().map(|n| n > 0).collect();
    let mut out = model.clone();
    out.retain_vertices(&keep);
    out
}

/// A template geometry placed in the world, over its own vertex list.
#[derive(Clone, Debug, PartialEq)]
pub struct InstancedGeometry {
    pub geometry: Geometry,
    pub vertices: Vec<Vertex>,
}

/// `reference + M * [p, 1]`, keeping the first three rows. `M` is row-major
/// and multiplies the point as a column vector.
pub fn transform_point(matrix: &[f64; 16], reference: &Vertex, p: &Vertex) -> Vertex {
    let mut w = [0.0; 3];
    for (row, out) in w.iter_mut().enumerate() {
        let m = &matrix[row * 4..row * 4 + 4];
        *out = reference[row] + m[0] * p[0] + m[1] * p[1] + m[2] * p[2] + m[3];
    }
    w
}

/// Expands a GeometryInstance of `model` into world coordinates.
pub fn instantiate_template(model: &CityModel, object_id: &str, geom_index: usize) -> Result<InstancedGeometry> {
    let co = model
        .city_objects
        .get(object_id)
        .ok_or_else(|| Error::UnknownId(object_id.to_string()))?;
    let g = co
        .geometry
        .get(geom_index)
        .ok_or_else(|| Error::GeometryIndexOutOfRange {
            id: object_id.to_string(),
            index: geom_index,
        })?;
    instantiate_geometry(model, g).map_err(|e| match e {
        Error::NotAnInstance(_) => Error::NotAnInstance(format!("{object_id}/geometry/{geom_index}")),
        e => e,
    })
}

/// Same as [`instantiate_template`] for a geometry already at hand.
pub fn instantiate_geometry(model: &CityModel, g: &Geometry) -> Result<InstancedGeometry> {
    let inst = g
        .instance
        .as_ref()
        .filter(|_| g.kind == GeometryKind::GeometryInstance)
        .ok_or_else(|| Error::NotAnInstance(g.kind.to_string()))?;
    if inst.matrix.iter().any(|x| !x.is_finite()) {
        return Err(Error::BadMatrix("matrix has non-finite entries".into()));
    }
    let bank = model.geometry_templates.as_ref();
    let ntemplates = bank.map_or(0, |b| b.templates.len());
    let template = bank
        .and_then(|b| b.templates.get(inst.template))
        .ok_or(Error::TemplateIndexOutOfRange {
            index: inst.template,
            len: ntemplates,
        })?;
    let bank = bank.expect("template found above");
    let rp = g.reference_point().ok_or_else(|| Error::BadGeometryShape {
        path: "boundaries".into(),
        message: "GeometryInstance needs one reference point".into(),
    })?;
    let reference = real_world_vertex(model, rp)?;

    let mut local: HashMap<usize, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut geometry = template.clone();
    let mut failure = None;
    geometry.boundaries.for_each_leaf_mut(&mut |i| {
        let next = local.len();
        let slot = *local.entry(*i).or_insert(next);
        if slot == vertices.len() {
            match bank.vertices.get(*i) {
                Some(p) => vertices.push(transform_point(&inst.matrix, &reference, p)),
                None => {
                    failure.get_or_insert(Error::VertexIndexOutOfRange {
                        index: *i,
                        len: bank.vertices.len(),
                    });
                    vertices.push([f64::NAN; 3]);
                }
            }
        }
        *i = slot;
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(InstancedGeometry { geometry, vertices })
}

/// `[minx, miny, minz, maxx, maxy, maxz]` over the real-world coordinates of
/// referenced vertices, with template instances expanded.
pub fn compute_extent(model: &CityModel) -> Result<[f64; 6]> {
    let mut ext: Option<[f64; 6]> = None;
    let mut add = |p: Vertex| {
        let e = ext.get_or_insert([p[0], p[1], p[2], p[0], p[1], p[2]]);
        for k in 0..3 {
            e[k] = e[k].min(p[k]);
            e[k + 3] = e[k + 3].max(p[k]);
        }
    };
    for (i, n) in model.vertex_usage().into_iter().enumerate() {
        if n > 0 {
            add(real_world_vertex(model, i)?);
        }
    }
    for (_, _, g) in model.geometries() {
        if g.kind == GeometryKind::GeometryInstance {
            for p in instantiate_geometry(model, g)?.vertices {
                add(p);
            }
        }
    }
    ext.ok_or(Error::EmptyModel)
}
