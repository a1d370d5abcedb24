//! In-memory representation of a CityJSON document.
//!
//! Boundaries are kept as a generic nested tree ([`Nested`]) rather than one
//! Rust type per geometry kind. The validator must be able to look at a model
//! whose nesting is wrong, and every index-rewriting operation (subset, merge,
//! dedupe, orphan removal) only needs a leaf map over the tree.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// A vertex, either in real-world units or, when the model carries a
/// [`Transform`], in integer quanta stored as `f64` (exact up to 2^53).
pub type Vertex = [f64; 3];

/// Free-form JSON members (attributes, unknown members).
pub type Members = Map<String, Value>;

/// Nested array whose leaves are `T`. Used for geometry boundaries
/// (`T = usize`) and semantic values (`T = Option<usize>`).
#[derive(Clone, Debug, PartialEq)]
pub enum Nested<T> {
    Leaf(T),
    List(Vec<Nested<T>>),
}

pub type Boundary = Nested<usize>;
pub type SemanticValues = Nested<Option<usize>>;

impl<T> Nested<T> {
    pub fn list(items: Vec<Nested<T>>) -> Self {
        Nested::List(items)
    }

    /// True when every leaf sits exactly `depth` list levels down. Empty
    /// lists are compatible with any depth >= 1.
    pub fn has_depth(&self, depth: usize) -> bool {
        match self {
            Nested::Leaf(_) => depth == 0,
            Nested::List(items) => depth >= 1 && items.iter().all(|c| c.has_depth(depth - 1)),
        }
    }

    /// Depth measured along the first branch; `None` for an empty list.
    pub fn first_branch_depth(&self) -> Option<usize> {
        match self {
            Nested::Leaf(_) => Some(0),
            Nested::List(items) => items.first().map_or(Some(1), |c| {
                c.first_branch_depth().map(|d| d + 1)
            }),
        }
    }

    pub fn as_list(&self) -> Option<&[Nested<T>]> {
        match self {
            Nested::List(items) => Some(items),
            Nested::Leaf(_) => None,
        }
    }

    pub fn for_each_leaf<'a>(&'a self, f: &mut impl FnMut(&'a T)) {
        match self {
            Nested::Leaf(v) => f(v),
            Nested::List(items) => items.iter().for_each(|c| c.for_each_leaf(f)),
        }
    }

    pub fn for_each_leaf_mut(&mut self, f: &mut impl FnMut(&mut T)) {
        match self {
            Nested::Leaf(v) => f(v),
            Nested::List(items) => items.iter_mut().for_each(|c| c.for_each_leaf_mut(f)),
        }
    }

    pub fn leaves(&self) -> Vec<&T> {
        let mut out = Vec::new();
        self.for_each_leaf(&mut |v| out.push(v));
        out
    }

    /// Visits every list found exactly `level` levels below this node.
    pub fn for_each_at_level<'a>(&'a self, level: usize, f: &mut impl FnMut(&'a [Nested<T>])) {
        if let Nested::List(items) = self {
            if level == 0 {
                f(items);
            } else {
                items.iter().for_each(|c| c.for_each_at_level(level - 1, f));
            }
        }
    }
}

impl Nested<usize> {
    pub fn from_indices(indices: &[usize]) -> Self {
        Nested::List(indices.iter().map(|&i| Nested::Leaf(i)).collect())
    }
}

/// The eight geometry kinds of CityJSON.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeometryKind {
    MultiPoint,
    MultiLineString,
    MultiSurface,
    CompositeSurface,
    Solid,
    MultiSolid,
    CompositeSolid,
    GeometryInstance,
}

impl GeometryKind {
    pub const ALL: [GeometryKind; 8] = [
        GeometryKind::MultiPoint,
        GeometryKind::MultiLineString,
        GeometryKind::MultiSurface,
        GeometryKind::CompositeSurface,
        GeometryKind::Solid,
        GeometryKind::MultiSolid,
        GeometryKind::CompositeSolid,
        GeometryKind::GeometryInstance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GeometryKind::MultiPoint => "MultiPoint",
            GeometryKind::MultiLineString => "MultiLineString",
            GeometryKind::MultiSurface => "MultiSurface",
            GeometryKind::CompositeSurface => "CompositeSurface",
            GeometryKind::Solid => "Solid",
            GeometryKind::MultiSolid => "MultiSolid",
            GeometryKind::CompositeSolid => "CompositeSolid",
            GeometryKind::GeometryInstance => "GeometryInstance",
        }
    }

    /// Number of list levels above the integer indices. A GeometryInstance
    /// carries its reference point as a one-element list, hence 1.
    pub fn boundary_depth(self) -> usize {
        match self {
            GeometryKind::MultiPoint => 1,
            GeometryKind::MultiLineString => 2,
            GeometryKind::MultiSurface | GeometryKind::CompositeSurface => 3,
            GeometryKind::Solid => 4,
            GeometryKind::MultiSolid | GeometryKind::CompositeSolid => 5,
            GeometryKind::GeometryInstance => 1,
        }
    }

    /// Depth of the semantic `values` array: boundaries truncated at the
    /// primitive (point, linestring or surface) level.
    pub fn semantics_depth(self) -> usize {
        match self {
            GeometryKind::MultiPoint | GeometryKind::MultiLineString => 1,
            GeometryKind::GeometryInstance => 0,
            k => k.boundary_depth() - 2,
        }
    }

    /// Whether the innermost lists of the boundary are polygon rings.
    pub fn has_rings(self) -> bool {
        self.boundary_depth() >= 3
    }
}

impl fmt::Display for GeometryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GeometryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GeometryKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownGeometryKind(s.to_string()))
    }
}

/// Required boundary nesting depth for a geometry kind given by name.
pub fn boundary_depth(kind: &str) -> Result<usize> {
    kind.parse::<GeometryKind>().map(GeometryKind::boundary_depth)
}

// (name, is 2nd-level)
const CORE_TYPES: &[(&str, bool)] = &[
    ("Building", false),
    ("BuildingPart", true),
    ("BuildingInstallation", true),
    ("Bridge", false),
    ("BridgePart", true),
    ("BridgeInstallation", true),
    ("BridgeConstructionElement", true),
    ("CityFurniture", false),
    ("CityObjectGroup", false),
    ("GenericCityObject", false),
    ("LandUse", false),
    ("PlantCover", false),
    ("Railway", false),
    ("Road", false),
    ("SolitaryVegetationObject", false),
    ("TINRelief", false),
    ("TransportSquare", false),
    ("Tunnel", false),
    ("TunnelPart", true),
    ("TunnelInstallation", true),
    ("WaterBody", false),
];

/// City object type: one of the closed set of core classes, a `+`-prefixed
/// extension type, or an unrecognised name kept for the validator to flag.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CityObjectType {
    Core(&'static str),
    Extension(String),
    Unknown(String),
}

impl CityObjectType {
    pub fn core_names() -> impl Iterator<Item = &'static str> {
        CORE_TYPES.iter().map(|(n, _)| *n)
    }

    pub fn parse(name: &str) -> Self {
        if let Some((n, _)) = CORE_TYPES.iter().find(|(n, _)| *n == name) {
            CityObjectType::Core(n)
        } else if name.starts_with('+') {
            CityObjectType::Extension(name.to_string())
        } else {
            CityObjectType::Unknown(name.to_string())
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            CityObjectType::Core(n) => n,
            CityObjectType::Extension(n) | CityObjectType::Unknown(n) => n,
        }
    }

    pub fn is_second_level(&self) -> bool {
        match self {
            CityObjectType::Core(n) => CORE_TYPES.iter().any(|(c, second)| c == n && *second),
            _ => false,
        }
    }

    pub fn is_extension(&self) -> bool {
        matches!(self, CityObjectType::Extension(_))
    }
}

impl fmt::Display for CityObjectType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transform {
    pub scale: [f64; 3],
    pub translate: [f64; 3],
}

impl Transform {
    pub fn is_well_formed(&self) -> bool {
        self.scale.iter().all(|s| s.is_finite() && *s > 0.0)
            && self.translate.iter().all(|t| t.is_finite())
    }

    pub fn apply(&self, v: &Vertex) -> Vertex {
        [
            v[0] * self.scale[0] + self.translate[0],
            v[1] * self.scale[1] + self.translate[1],
            v[2] * self.scale[2] + self.translate[2],
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemanticSurface {
    pub kind: String,
    pub attributes: Members,
}

impl SemanticSurface {
    pub fn new(kind: impl Into<String>) -> Self {
        SemanticSurface {
            kind: kind.into(),
            attributes: Members::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Semantics {
    pub surfaces: Vec<SemanticSurface>,
    pub values: SemanticValues,
}

/// Template reference of a GeometryInstance. The reference point lives in
/// the geometry's boundaries as a single index.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceRef {
    pub template: usize,
    /// 4x4 matrix, row-major.
    pub matrix: [f64; 16],
}

#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    pub kind: GeometryKind,
    pub lod: Option<f64>,
    pub boundaries: Boundary,
    pub semantics: Option<Semantics>,
    pub material: Option<Value>,
    pub texture: Option<Value>,
    pub instance: Option<InstanceRef>,
    pub extra: Members,
}

impl Geometry {
    pub fn new(kind: GeometryKind, lod: f64, boundaries: Boundary) -> Self {
        Geometry {
            kind,
            lod: Some(lod),
            boundaries,
            semantics: None,
            material: None,
            texture: None,
            instance: None,
            extra: Members::new(),
        }
    }

    pub fn instance(template: usize, reference_point: usize, matrix: [f64; 16]) -> Self {
        Geometry {
            kind: GeometryKind::GeometryInstance,
            lod: None,
            boundaries: Nested::from_indices(&[reference_point]),
            semantics: None,
            material: None,
            texture: None,
            instance: Some(InstanceRef { template, matrix }),
            extra: Members::new(),
        }
    }

    /// Reference point of a GeometryInstance.
    pub fn reference_point(&self) -> Option<usize> {
        match self.boundaries.as_list()? {
            [Nested::Leaf(i)] if self.kind == GeometryKind::GeometryInstance => Some(*i),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CityObject {
    pub kind: CityObjectType,
    pub attributes: Members,
    pub parents: Option<Vec<String>>,
    pub children: Option<Vec<String>>,
    pub geometry: Vec<Geometry>,
    pub extra: Members,
}

impl CityObject {
    pub fn new(kind: &str) -> Self {
        CityObject {
            kind: CityObjectType::parse(kind),
            attributes: Members::new(),
            parents: None,
            children: None,
            geometry: Vec::new(),
            extra: Members::new(),
        }
    }

    pub fn parents(&self) -> &[String] {
        self.parents.as_deref().unwrap_or(&[])
    }

    pub fn children(&self) -> &[String] {
        self.children.as_deref().unwrap_or(&[])
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct TemplateBank {
    pub templates: Vec<Geometry>,
    pub vertices: Vec<Vertex>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Texture {
    pub image: String,
    pub extra: Members,
}

/// Materials and textures are carried, not interpreted; only texture image
/// paths and index ranges are looked at.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Appearance {
    pub materials: Vec<Value>,
    pub textures: Vec<Texture>,
    pub vertices_texture: Vec<[f64; 2]>,
    pub extra: Members,
}

/// Metadata keys: `referenceSystem`, `geographicalExtent`, `presentLoDs`.
/// Everything else is kept in `extra`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Metadata {
    pub reference_system: Option<String>,
    pub geographical_extent: Option<[f64; 6]>,
    pub present_lods: Option<BTreeMap<String, u64>>,
    pub extra: Members,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionRef {
    pub url: String,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CityModel {
    pub version: String,
    pub city_objects: IndexMap<String, CityObject>,
    pub vertices: Vec<Vertex>,
    pub transform: Option<Transform>,
    pub geometry_templates: Option<TemplateBank>,
    pub appearance: Option<Appearance>,
    pub metadata: Option<Metadata>,
    pub extensions: IndexMap<String, ExtensionRef>,
    /// Unknown root members, preserved verbatim.
    pub extra: Members,
}

impl Default for CityModel {
    fn default() -> Self {
        CityModel::new()
    }
}

impl CityModel {
    pub const VERSION: &'static str = "1.0";

    pub fn new() -> Self {
        CityModel {
            version: Self::VERSION.to_string(),
            city_objects: IndexMap::new(),
            vertices: Vec::new(),
            transform: None,
            geometry_templates: None,
            appearance: None,
            metadata: None,
            extensions: IndexMap::new(),
            extra: Members::new(),
        }
    }

    pub fn reference_system(&self) -> Option<&str> {
        self.metadata.as_ref()?.reference_system.as_deref()
    }

    /// Iterates (object id, geometry index, geometry) over the whole model.
    pub fn geometries(&self) -> impl Iterator<Item = (&str, usize, &Geometry)> {
        self.city_objects.iter().flat_map(|(id, o)| {
            o.geometry
                .iter()
                .enumerate()
                .map(move |(i, g)| (id.as_str(), i, g))
        })
    }

    pub fn geometries_mut(&mut self) -> impl Iterator<Item = &mut Geometry> {
        self.city_objects
            .values_mut()
            .flat_map(|o| o.geometry.iter_mut())
    }

    /// How many boundary leaves point at each vertex of the pool. Indices
    /// past the end of the pool are ignored.
    pub fn vertex_usage(&self) -> Vec<usize> {
        let mut usage = vec![0usize; self.vertices.len()];
        for (_, _, g) in self.geometries() {
            g.boundaries.for_each_leaf(&mut |&i| {
                if let Some(u) = usage.get_mut(i) {
                    *u += 1;
                }
            });
        }
        usage
    }

    /// Rewrites every vertex index in every city-object geometry.
    pub fn remap_vertex_indices(&mut self, mut f: impl FnMut(usize) -> usize) {
        for g in self.geometries_mut() {
            g.boundaries.for_each_leaf_mut(&mut |i| *i = f(*i));
        }
    }

    /// Keeps only vertices flagged in `keep`, preserving order, and rebases
    /// all boundary indices onto the compacted pool.
    pub fn retain_vertices(&mut self, keep: &[bool]) {
        let mut map = vec![usize::MAX; self.vertices.len()];
        let mut next = 0;
        let mut kept = Vec::with_capacity(self.vertices.len());
        for (i, v) in self.vertices.iter().enumerate() {
            if keep.get(i).copied().unwrap_or(false) {
                map[i] = next;
                next += 1;
                kept.push(*v);
            }
        }
        self.vertices = kept;
        self.remap_vertex_indices(|i| map[i]);
    }
}

/// EPSG code of a CRS name. Accepted spellings: `EPSG:7415`,
/// `urn:ogc:def:crs:EPSG::7415`, `urn:ogc:def:crs:EPSG:6.12:7415` and
/// `http://www.opengis.net/def/crs/EPSG/0/7415`.
pub fn epsg_code(name: &str) -> Option<u32> {
    let name = name.trim();
    let rest = name
        .strip_prefix("EPSG:")
        // optional version between the two colons
        .or_else(|| name.strip_prefix("urn:ogc:def:crs:EPSG:")?.rsplit(':').next())
        .or_else(|| name.strip_prefix("http://www.opengis.net/def/crs/EPSG/")?.rsplit('/').next())?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

/// Coordinates of vertex `index` in real-world units.
pub fn real_world_vertex(model: &CityModel, index: usize) -> Result<Vertex> {
    let v = model
        .vertices
        .get(index)
        .ok_or(Error::VertexIndexOutOfRange {
            index,
            len: model.vertices.len(),
        })?;
    Ok(match &model.transform {
        Some(t) => t.apply(v),
        None => *v,
    })
}
