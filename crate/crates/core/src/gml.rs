//! CityGML 2.0 importer.
//!
//! Supported features: Building, BuildingPart, installations and the other
//! core city object types, each mapped to the city object of the same name.
//! Supported geometry: `lodN{Solid,MultiSurface,CompositeSurface,Geometry}`
//! holding Solid, MultiSurface, CompositeSurface, Shell, Polygon, Surface
//! with PolygonPatch, and OrientableSurface (orientation kept as written).
//! Coordinates may be spelled as `posList`, repeated `pos`, `coordinates` or
//! `coord`; GML 2 `outerBoundaryIs`/`innerBoundaryIs` are accepted.
//!
//! Semantic surfaces under `boundedBy` are attached to the geometry
//! surfaces they share (by XLink in either direction, or by equal gml:id).
//! Polygons of semantic surfaces not used by any geometry become a
//! MultiSurface at the semantic surface's LoD. Generic attributes of type
//! measure become `{"value": .., "uom": ..}`.
//!
//! Everything else is skipped and listed in the [`ImportReport`].

use std::collections::{BTreeMap, HashMap, HashSet};

use indexmap::IndexMap;
use roxmltree::{Document, Node, NodeId};
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::*;

const GML_NS: &str = "http://www.opengis.net/gml";
const XLINK_NS: &str = "http://www.w3.org/1999/xlink";

/// A parsed document with its gml:id index. The first element carrying a
/// given id wins.
pub struct GmlDocument<'a, 'input> {
    pub doc: &'a Document<'input>,
    index: HashMap<&'a str, Node<'a, 'input>>,
}

fn gml_id<'a>(n: Node<'a, '_>) -> Option<&'a str> {
    n.attribute((GML_NS, "id"))
        .or_else(|| n.attributes().find(|a| a.name() == "id").map(|a| a.value()))
}

fn href<'a>(n: Node<'a, '_>) -> Option<&'a str> {
    n.attribute((XLINK_NS, "href"))
}

fn elements<'a, 'input>(n: Node<'a, 'input>) -> impl Iterator<Item = Node<'a, 'input>> {
    n.children().filter(Node::is_element)
}

fn name<'a>(n: Node<'a, '_>) -> &'a str {
    n.tag_name().name()
}

fn path_of(n: Node) -> String {
    let mut parts: Vec<String> = n
        .ancestors()
        .filter(Node::is_element)
        .map(|a| match gml_id(a) {
            Some(id) => format!("{}[@id={id}]", name(a)),
            None => name(a).to_string(),
        })
        .collect();
    parts.reverse();
    format!("/{}", parts.join("/"))
}

impl<'a, 'input> GmlDocument<'a, 'input> {
    pub fn new(doc: &'a Document<'input>) -> Self {
        let mut index = HashMap::new();
        for n in doc.descendants().filter(Node::is_element) {
            if let Some(id) = gml_id(n) {
                index.entry(id).or_insert(n);
            }
        }
        GmlDocument { doc, index }
    }

    pub fn resolve_xlink(&self, href: &str) -> Result<Node<'a, 'input>> {
        let Some(id) = href.strip_prefix('#') else {
            return Err(Error::ExternalXlink(href.to_string()));
        };
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnresolvedXlink(href.to_string()))
    }

    /// Target of a property element: its xlink or its first element child.
    fn deref(&self, prop: Node<'a, 'input>) -> Result<Option<Node<'a, 'input>>> {
        match href(prop) {
            Some(h) => self.resolve_xlink(h).map(Some),
            None => Ok(elements(prop).next()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Skipped {
    pub element: String,
    pub path: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ImportReport {
    /// Imported features per type.
    pub features: BTreeMap<String, usize>,
    /// Distinct polygon elements read.
    pub polygons: usize,
    pub semantic_surfaces: usize,
    pub skipped: Vec<Skipped>,
}

impl ImportReport {
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        let summary = serde_json::json!({
            "features": self.features,
            "polygons": self.polygons,
            "semantic_surfaces": self.semantic_surfaces,
        });
        out.push_str(&summary.to_string());
        out.push('\n');
        for s in &self.skipped {
            out.push_str(&serde_json::to_string(s).expect("plain struct"));
            out.push('\n');
        }
        out
    }
}

/// Exact-match vertex pool.
#[derive(Clone, Debug, Default)]
pub struct VertexPool {
    pub vertices: Vec<Vertex>,
    index: HashMap<[u64; 3], usize>,
}

impl VertexPool {
    pub fn add(&mut self, v: Vertex) -> usize {
        let key = v.map(|c| (c + 0.0).to_bits());
        *self.index.entry(key).or_insert_with(|| {
            self.vertices.push(v);
            self.vertices.len() - 1
        })
    }
}

fn dimension(n: Node) -> usize {
    n.ancestors()
        .find_map(|a| a.attribute("srsDimension"))
        .and_then(|d| d.parse().ok())
        .unwrap_or(3)
}

fn parse_number(token: &str, path: &str) -> Result<f64> {
    token
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::BadCoordinateToken {
            path: path.to_string(),
            token: token.to_string(),
        })
}

fn tuples(values: Vec<f64>, dim: usize, path: &str) -> Result<Vec<Vertex>> {
    if !(2..=3).contains(&dim) || !values.len().is_multiple_of(dim) {
        return Err(Error::BadCoordinateToken {
            path: path.to_string(),
            token: format!("{} values for dimension {dim}", values.len()),
        });
    }
    Ok(values
        .chunks(dim)
        .map(|c| [c[0], c[1], if dim == 3 { c[2] } else { 0.0 }])
        .collect())
}

fn text<'a>(n: Node<'a, '_>) -> &'a str {
    n.text().unwrap_or("")
}

/// Raw points of a LinearRing in any supported spelling.
fn ring_points(ring: Node, path: &str) -> Result<Vec<Vertex>> {
    let mut pts = Vec::new();
    for c in elements(ring) {
        match name(c) {
            "posList" => {
                let values = text(c)
                    .split_whitespace()
                    .map(|t| parse_number(t, path))
                    .collect::<Result<Vec<_>>>()?;
                pts.extend(tuples(values, dimension(c), path)?);
            }
            "pos" => {
                let values = text(c)
                    .split_whitespace()
                    .map(|t| parse_number(t, path))
                    .collect::<Result<Vec<_>>>()?;
                let dim = values.len();
                pts.extend(tuples(values, dim, path)?);
            }
            "coordinates" => {
                let cs = c.attribute("cs").unwrap_or(",");
                let ts = c.attribute("ts").unwrap_or(" ");
                let dec = c.attribute("decimal").unwrap_or(".");
                let body = text(c).trim();
                let tuples_iter: Vec<&str> = if ts.trim().is_empty() {
                    body.split_whitespace().collect()
                } else {
                    body.split(ts).map(str::trim).filter(|s| !s.is_empty()).collect()
                };
                for t in tuples_iter {
                    let values = t
                        .split(cs)
                        .map(|x| parse_number(&x.trim().replace(dec, "."), path))
                        .collect::<Result<Vec<_>>>()?;
                    let dim = values.len();
                    pts.extend(tuples(values, dim, path)?);
                }
            }
            "coord" => {
                let mut v = [0.0; 3];
                for (k, axis) in ["X", "Y", "Z"].iter().enumerate() {
                    if let Some(a) = elements(c).find(|e| name(*e) == *axis) {
                        v[k] = parse_number(text(a).trim(), path)?;
                    }
                }
                pts.push(v);
            }
            _ => {}
        }
    }
    Ok(pts)
}

/// Pools the points of a LinearRing and returns their indices, with the
/// closing point and consecutive repeats removed.
pub fn normalize_ring(ring: Node, pool: &mut VertexPool) -> Result<Vec<usize>> {
    let path = path_of(ring);
    let mut pts = ring_points(ring, &path)?;
    pts.dedup();
    while pts.len() > 1 && pts.first() == pts.last() {
        pts.pop();
    }
    let distinct: HashSet<[u64; 3]> = pts.iter().map(|v| v.map(|c| (c + 0.0).to_bits())).collect();
    if distinct.len() < 3 {
        return Err(Error::RingTooShort { path });
    }
    Ok(pts.into_iter().map(|p| pool.add(p)).collect())
}

fn epsg_of(srs: &str) -> Result<u32> {
    epsg_code(srs).ok_or_else(|| Error::BadCrs(srs.to_string()))
}

fn lod_property(n: &str) -> Option<(u32, &str)> {
    let rest = n.strip_prefix("lod")?;
    let digit = rest.chars().next()?.to_digit(10)?;
    Some((digit, &rest[1..]))
}

const SEMANTIC_NAMES: &[&str] = &["Window", "Door"];

fn is_semantic(n: &str) -> bool {
    n.ends_with("Surface") || SEMANTIC_NAMES.contains(&n)
}

const NUMERIC_ATTRIBUTES: &[&str] = &[
    "measuredHeight",
    "storeysAboveGround",
    "storeysBelowGround",
    "yearOfConstruction",
    "yearOfDemolition",
];

fn number_value(s: &str) -> Option<Value> {
    let x: f64 = s.trim().parse().ok()?;
    x.is_finite().then(|| crate::codec::number(x))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum PolyKey {
    Id(String),
    Node(NodeId),
}

fn poly_key(n: Node) -> PolyKey {
    match gml_id(n) {
        Some(id) => PolyKey::Id(id.to_string()),
        None => PolyKey::Node(n.id()),
    }
}

struct SemanticEntry<'a, 'input> {
    surface: SemanticSurface,
    lod: u32,
    polygons: Vec<Node<'a, 'input>>,
}

#[derive(Default)]
struct SemanticMap<'a, 'input> {
    entries: Vec<SemanticEntry<'a, 'input>>,
    by_key: HashMap<PolyKey, usize>,
}

/// Surfaces of one geometry, each a list of rings, plus its polygon keys.
type Surfaces = Vec<(PolyKey, Vec<Vec<usize>>)>;

struct Importer<'a, 'input> {
    doc: GmlDocument<'a, 'input>,
    pool: VertexPool,
    model: CityModel,
    report: ImportReport,
    polygons_seen: HashSet<NodeId>,
    anonymous: usize,
    template_pool: VertexPool,
    templates: Vec<Geometry>,
    template_index: HashMap<NodeId, usize>,
}

impl<'a, 'input> Importer<'a, 'input> {
    fn skip(&mut self, n: Node, reason: &str) {
        self.report.skipped.push(Skipped {
            element: name(n).to_string(),
            path: path_of(n),
            reason: reason.to_string(),
        });
    }

    /// Polygon-like leaves (Polygon, PolygonPatch) under a surface element.
    fn collect_polygons(&mut self, n: Node<'a, 'input>, out: &mut Vec<Node<'a, 'input>>) -> Result<()> {
        match name(n) {
            "Polygon" | "PolygonPatch" => {
                self.polygons_seen.insert(n.id());
                out.push(n);
            }
            "Surface" => {
                for patches in elements(n).filter(|c| name(*c) == "patches") {
                    for p in elements(patches) {
                        self.collect_polygons(p, out)?;
                    }
                }
            }
            "OrientableSurface" => {
                if let Some(base) = elements(n).find(|c| name(*c) == "baseSurface") {
                    if let Some(t) = self.doc.deref(base)? {
                        self.collect_polygons(t, out)?;
                    }
                }
            }
            "MultiSurface" | "CompositeSurface" | "Shell" => {
                for m in elements(n) {
                    match name(m) {
                        "surfaceMember" => {
                            if let Some(t) = self.doc.deref(m)? {
                                self.collect_polygons(t, out)?;
                            }
                        }
                        "surfaceMembers" => {
                            for t in elements(m) {
                                self.collect_polygons(t, out)?;
                            }
                        }
                        _ => self.skip(m, "not a surface member"),
                    }
                }
            }
            _ => self.skip(n, "unsupported surface type"),
        }
        Ok(())
    }

    fn polygon_rings(&mut self, poly: Node<'a, 'input>) -> Result<Option<Vec<Vec<usize>>>> {
        let mut exterior = None;
        let mut interiors = Vec::new();
        for b in elements(poly) {
            let outer = match name(b) {
                "exterior" | "outerBoundaryIs" => true,
                "interior" | "innerBoundaryIs" => false,
                _ => continue,
            };
            let Some(ring) = self.doc.deref(b)? else { continue };
            if name(ring) != "LinearRing" {
                self.skip(ring, "only LinearRing boundaries are supported");
                return Ok(None);
            }
            let idx = normalize_ring(ring, &mut self.pool)?;
            if outer {
                exterior = Some(idx);
            } else {
                interiors.push(idx);
            }
        }
        let Some(ext) = exterior else {
            self.skip(poly, "polygon without exterior ring");
            return Ok(None);
        };
        let mut rings = vec![ext];
        rings.extend(interiors);
        Ok(Some(rings))
    }

    fn surfaces(&mut self, polys: Vec<Node<'a, 'input>>) -> Result<Surfaces> {
        let mut out = Vec::new();
        for p in polys {
            if let Some(rings) = self.polygon_rings(p)? {
                out.push((poly_key(p), rings));
            }
        }
        Ok(out)
    }

    fn semantic_surface(&mut self, s: Node<'a, 'input>, map: &mut SemanticMap<'a, 'input>) -> Result<()> {
        self.report.semantic_surfaces += 1;
        let mut geoms = Vec::new();
        let mut openings = Vec::new();
        for c in elements(s) {
            match lod_property(name(c)) {
                Some((lod, "MultiSurface" | "Geometry" | "CompositeSurface")) => geoms.push((lod, c)),
                _ if name(c) == "opening" => openings.push(c),
                _ => self.skip(c, "semantic surface member not imported"),
            }
        }
        for (lod, prop) in geoms {
            let mut polys = Vec::new();
            if let Some(t) = self.doc.deref(prop)? {
                self.collect_polygons(t, &mut polys)?;
            }
            let idx = map.entries.len();
            for p in &polys {
                map.by_key.entry(poly_key(*p)).or_insert(idx);
            }
            map.entries.push(SemanticEntry {
                surface: SemanticSurface::new(name(s)),
                lod,
                polygons: polys,
            });
        }
        for o in openings {
            if let Some(t) = self.doc.deref(o)? {
                self.semantic_surface(t, map)?;
            }
        }
        Ok(())
    }

    fn semantic_map(&mut self, feature: Node<'a, 'input>) -> Result<SemanticMap<'a, 'input>> {
        let mut map = SemanticMap::default();
        for b in elements(feature).filter(|c| name(*c) == "boundedBy" && c.tag_name().namespace() != Some(GML_NS)) {
            match self.doc.deref(b)? {
                Some(s) if is_semantic(name(s)) => self.semantic_surface(s, &mut map)?,
                Some(s) => self.skip(s, "not a semantic surface"),
                None => {}
            }
        }
        Ok(map)
    }

    fn semantics_for(&self, keys: &[&PolyKey], map: &SemanticMap, used: &mut HashSet<PolyKey>) -> (Vec<SemanticSurface>, Vec<Option<usize>>) {
        let mut order: IndexMap<usize, usize> = IndexMap::new();
        let values = keys
            .iter()
            .map(|k| {
                used.insert((*k).clone());
                map.by_key.get(*k).map(|e| {
                    let n = order.len();
                    *order.entry(*e).or_insert(n)
                })
            })
            .collect();
        let surfaces = order.keys().map(|e| map.entries[*e].surface.clone()).collect();
        (surfaces, values)
    }

    fn geometry(&mut self, prop: Node<'a, 'input>, lod: u32, map: &SemanticMap, used: &mut HashSet<PolyKey>) -> Result<Option<Geometry>> {
        let Some(g) = self.doc.deref(prop)? else { return Ok(None) };
        let lod = lod as f64;
        let (kind, shells) = match name(g) {
            "Solid" => {
                let mut shells = Vec::new();
                for s in elements(g) {
                    if !matches!(name(s), "exterior" | "interior") {
                        continue;
                    }
                    let mut polys = Vec::new();
                    if let Some(t) = self.doc.deref(s)? {
                        self.collect_polygons(t, &mut polys)?;
                    }
                    shells.push(self.surfaces(polys)?);
                }
                (GeometryKind::Solid, shells)
            }
            "MultiSurface" | "CompositeSurface" | "Polygon" | "Surface" | "OrientableSurface" => {
                let mut polys = Vec::new();
                self.collect_polygons(g, &mut polys)?;
                let kind = if name(g) == "CompositeSurface" {
                    GeometryKind::CompositeSurface
                } else {
                    GeometryKind::MultiSurface
                };
                (kind, vec![self.surfaces(polys)?])
            }
            _ => {
                self.skip(g, "unsupported geometry type");
                return Ok(None);
            }
        };
        if shells.iter().all(Vec::is_empty) {
            self.skip(g, "geometry without surfaces");
            return Ok(None);
        }
        let keys: Vec<&PolyKey> = shells.iter().flatten().map(|(k, _)| k).collect();
        let (surfaces, values) = self.semantics_for(&keys, map, used);
        let rings = |s: &Surfaces| {
            Nested::list(
                s.iter()
                    .map(|(_, r)| Nested::list(r.iter().map(|ring| Nested::from_indices(ring)).collect()))
                    .collect(),
            )
        };
        let leaf_values = |v: &[Option<usize>]| Nested::list(v.iter().map(|x| Nested::Leaf(*x)).collect());
        let (boundaries, sem_values) = if kind == GeometryKind::Solid {
            let mut offset = 0;
            let mut sv = Vec::new();
            for s in &shells {
                sv.push(leaf_values(&values[offset..offset + s.len()]));
                offset += s.len();
            }
            (Nested::list(shells.iter().map(rings).collect()), Nested::list(sv))
        } else {
            (rings(&shells[0]), leaf_values(&values))
        };
        let mut geom = Geometry::new(kind, lod, boundaries);
        if !surfaces.is_empty() {
            geom.semantics = Some(Semantics {
                surfaces,
                values: sem_values,
            });
        }
        Ok(Some(geom))
    }

    /// An ImplicitGeometry as a GeometryInstance. Each distinct relative
    /// geometry element becomes one template over the template vertex pool.
    fn implicit(&mut self, prop: Node<'a, 'input>, lod: u32) -> Result<Option<Geometry>> {
        let Some(ig) = self.doc.deref(prop)? else { return Ok(None) };
        if name(ig) != "ImplicitGeometry" {
            self.skip(ig, "unsupported implicit representation");
            return Ok(None);
        }
        let path = path_of(ig);
        let child = |n: &str| elements(ig).find(|c| name(*c) == n);

        let mut matrix = [0.0; 16];
        for k in [0, 5, 10, 15] {
            matrix[k] = 1.0;
        }
        if let Some(m) = child("transformationMatrix") {
            let values = text(m)
                .split_whitespace()
                .map(|t| parse_number(t, &path))
                .collect::<Result<Vec<_>>>()?;
            matrix = values
                .try_into()
                .map_err(|v: Vec<f64>| Error::BadMatrix(format!("{path}: {} values instead of 16", v.len())))?;
        }
        let reference = match child("referencePoint") {
            Some(r) => match self.doc.deref(r)? {
                Some(point) => ring_points(point, &path)?.first().copied(),
                None => None,
            },
            None => None,
        };
        let (Some(reference), Some(relative)) = (reference, child("relativeGMLGeometry")) else {
            self.skip(ig, "implicit geometry without reference point or relative geometry");
            return Ok(None);
        };
        let Some(target) = self.doc.deref(relative)? else { return Ok(None) };

        let template = match self.template_index.get(&target.id()) {
            Some(t) => *t,
            None => {
                std::mem::swap(&mut self.pool, &mut self.template_pool);
                let g = self.geometry(relative, lod, &SemanticMap::default(), &mut HashSet::new());
                std::mem::swap(&mut self.pool, &mut self.template_pool);
                let Some(g) = g? else { return Ok(None) };
                self.templates.push(g);
                self.template_index.insert(target.id(), self.templates.len() - 1);
                self.templates.len() - 1
            }
        };
        let refpt = self.pool.add(reference);
        Ok(Some(Geometry::instance(template, refpt, matrix)))
    }

    /// Polygons of semantic surfaces that no geometry used, one MultiSurface
    /// per LoD.
    fn leftover_geometries(&mut self, map: &SemanticMap<'a, 'input>, used: &HashSet<PolyKey>) -> Result<Vec<Geometry>> {
        let mut by_lod: IndexMap<u32, Vec<(usize, Node<'a, 'input>)>> = IndexMap::new();
        let mut taken = used.clone();
        for (e, entry) in map.entries.iter().enumerate() {
            for p in &entry.polygons {
                if taken.insert(poly_key(*p)) {
                    by_lod.entry(entry.lod).or_default().push((e, *p));
                }
            }
        }
        let mut out = Vec::new();
        for (lod, polys) in by_lod {
            let mut surfaces = Vec::new();
            let mut order: IndexMap<usize, usize> = IndexMap::new();
            let mut values = Vec::new();
            for (e, p) in polys {
                if let Some(rings) = self.polygon_rings(p)? {
                    surfaces.push(Nested::list(rings.iter().map(|r| Nested::from_indices(r)).collect()));
                    let n = order.len();
                    values.push(Nested::Leaf(Some(*order.entry(e).or_insert(n))));
                }
            }
            if surfaces.is_empty() {
                continue;
            }
            let mut g = Geometry::new(GeometryKind::MultiSurface, lod as f64, Nested::list(surfaces));
            g.semantics = Some(Semantics {
                surfaces: order.keys().map(|e| map.entries[*e].surface.clone()).collect(),
                values: Nested::list(values),
            });
            out.push(g);
        }
        Ok(out)
    }

    fn generic_attribute(&mut self, n: Node, attrs: &mut Members) -> bool {
        let kind = name(n);
        if !matches!(
            kind,
            "stringAttribute" | "intAttribute" | "doubleAttribute" | "dateAttribute" | "uriAttribute" | "measureAttribute"
        ) {
            return false;
        }
        let Some(key) = n.attribute("name") else {
            self.skip(n, "generic attribute without name");
            return true;
        };
        let Some(v) = elements(n).find(|c| name(*c) == "value") else {
            self.skip(n, "generic attribute without value");
            return true;
        };
        let raw = text(v).trim();
        let value = match kind {
            "intAttribute" | "doubleAttribute" => number_value(raw).unwrap_or_else(|| Value::from(raw)),
            "measureAttribute" => serde_json::json!({
                "value": number_value(raw).unwrap_or_else(|| Value::from(raw)),
                "uom": v.attribute("uom").unwrap_or(""),
            }),
            _ => Value::from(raw),
        };
        attrs.insert(key.to_string(), value);
        true
    }

    fn feature_child(&self, prop: Node<'a, 'input>) -> Result<Option<Node<'a, 'input>>> {
        if elements(prop).count() > 1 {
            return Ok(None);
        }
        Ok(self
            .doc
            .deref(prop)?
            .filter(|f| matches!(CityObjectType::parse(name(*f)), CityObjectType::Core(_))))
    }

    fn feature(&mut self, f: Node<'a, 'input>, parent: Option<&str>) -> Result<String> {
        let kind = name(f);
        let id = match gml_id(f) {
            Some(id) if !self.model.city_objects.contains_key(id) => id.to_string(),
            _ => loop {
                self.anonymous += 1;
                let candidate = format!("{kind}-{}", self.anonymous);
                if !self.model.city_objects.contains_key(&candidate) && !self.doc.index.contains_key(candidate.as_str()) {
                    break candidate;
                }
            },
        };
        *self.report.features.entry(kind.to_string()).or_default() += 1;
        let mut co = CityObject::new(kind);
        co.parents = parent.map(|p| vec![p.to_string()]);
        self.model.city_objects.insert(id.clone(), co);

        let map = self.semantic_map(f)?;
        let mut used = HashSet::new();
        let mut geometry = Vec::new();
        let mut children = Vec::new();
        let mut attrs = Members::new();
        for c in elements(f) {
            let cname = name(c);
            let gml = c.tag_name().namespace() == Some(GML_NS);
            if let Some((lod, rest)) = lod_property(cname) {
                if matches!(rest, "Solid" | "MultiSurface" | "CompositeSurface" | "Geometry") {
                    if let Some(g) = self.geometry(c, lod, &map, &mut used)? {
                        geometry.push(g);
                    }
                } else if rest == "ImplicitRepresentation" {
                    if let Some(g) = self.implicit(c, lod)? {
                        geometry.push(g);
                    }
                } else {
                    self.skip(c, "unsupported geometry property");
                }
            } else if cname == "boundedBy" && !gml {
                continue;
            } else if let Some(child) = self.feature_child(c)? {
                children.push(self.feature(child, Some(&id))?);
            } else if self.generic_attribute(c, &mut attrs) {
            } else if elements(c).next().is_none() && !text(c).trim().is_empty() {
                let raw = text(c).trim();
                let v = if NUMERIC_ATTRIBUTES.contains(&cname) {
                    number_value(raw).unwrap_or_else(|| Value::from(raw))
                } else {
                    Value::from(raw)
                };
                attrs.insert(cname.to_string(), v);
            } else {
                self.skip(c, "unsupported feature member");
            }
        }
        geometry.extend(self.leftover_geometries(&map, &used)?);

        let co = &mut self.model.city_objects[&id];
        co.geometry = geometry;
        co.attributes = attrs;
        if !children.is_empty() {
            co.children = Some(children);
        }
        Ok(id)
    }
}

fn check_crs(doc: &Document) -> Result<Option<u32>> {
    let mut code: Option<(u32, &str)> = None;
    for n in doc.descendants().filter(Node::is_element) {
        let Some(srs) = n.attribute("srsName") else { continue };
        let c = epsg_of(srs)?;
        match code {
            Some((prev, first)) if prev != c => return Err(Error::MixedCrs(first.to_string(), srs.to_string())),
            None => code = Some((c, srs)),
            _ => {}
        }
    }
    Ok(code.map(|(c, _)| c))
}

/// Imports a CityGML 2.0 document.
pub fn import_citygml(bytes: &[u8]) -> Result<(CityModel, ImportReport)> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::XmlSyntax(e.to_string()))?;
    let doc = Document::parse(text).map_err(|e| Error::XmlSyntax(e.to_string()))?;
    if let Some(n) = doc
        .descendants()
        .find(|n| n.is_element() && name(*n).starts_with("lod4"))
    {
        return Err(Error::Lod4Unsupported(path_of(n)));
    }
    let crs = check_crs(&doc)?;

    let mut imp = Importer {
        doc: GmlDocument::new(&doc),
        pool: VertexPool::default(),
        model: CityModel::new(),
        report: ImportReport::default(),
        polygons_seen: HashSet::new(),
        anonymous: 0,
        template_pool: VertexPool::default(),
        templates: Vec::new(),
        template_index: HashMap::new(),
    };
    let root = doc.root_element();
    for m in elements(root) {
        match name(m) {
            "cityObjectMember" | "featureMember" => match imp.doc.deref(m)? {
                Some(f) if matches!(CityObjectType::parse(name(f)), CityObjectType::Core(_)) => {
                    imp.feature(f, None)?;
                }
                Some(f) => imp.skip(f, "unsupported feature type"),
                None => {}
            },
            "boundedBy" if m.tag_name().namespace() == Some(GML_NS) => {}
            _ => imp.skip(m, "not a city object member"),
        }
    }
    imp.report.polygons = imp.polygons_seen.len();
    let mut model = imp.model;
    model.vertices = imp.pool.vertices;
    if !imp.templates.is_empty() {
        model.geometry_templates = Some(TemplateBank {
            templates: imp.templates,
            vertices: imp.template_pool.vertices,
        });
    }
    if let Some(c) = crs {
        model.metadata = Some(Metadata {
            reference_system: Some(format!("urn:ogc:def:crs:EPSG::{c}")),
            ..Default::default()
        });
    }
    Ok((model, imp.report))
}
