//! Seeded synthetic city scenes.
//!
//! Buildings are terraced rows of boxes (ground corners shared between
//! neighbours) with some split into two BuildingParts; every row gets a
//! road strip and a few trees placed as instances of one template.
//! Coordinates are real-world values in the EPSG:7415 range with millimetre
//! precision. [`to_citygml`] writes the same scene as minimal CityGML 2.0.

use std::collections::HashMap;
use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::model::*;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthParams {
    pub seed: u64,
    pub rows: usize,
    pub buildings_per_row: usize,
    pub trees_per_row: usize,
    /// Every n-th building is split into two parts; 0 disables parts.
    pub part_every: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            seed: 1,
            rows: 4,
            buildings_per_row: 6,
            trees_per_row: 3,
            part_every: 4,
        }
    }
}

impl SynthParams {
    pub fn with_seed(seed: u64) -> Self {
        SynthParams { seed, ..Self::default() }
    }
}

pub const SYNTH_CRS: &str = "urn:ogc:def:crs:EPSG::7415";

fn mm(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

struct Builder {
    model: CityModel,
    pool: HashMap<[u64; 3], usize>,
}

impl Builder {
    fn vertex(&mut self, v: Vertex) -> usize {
        let v = v.map(mm);
        let key = v.map(|c| (c + 0.0).to_bits());
        let verts = &mut self.model.vertices;
        *self.pool.entry(key).or_insert_with(|| {
            verts.push(v);
            verts.len() - 1
        })
    }

    /// A box solid with ground, roof and wall semantics.
    fn box_solid(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, z0: f64, z1: f64) -> Geometry {
        let b = [
            self.vertex([x0, y0, z0]),
            self.vertex([x1, y0, z0]),
            self.vertex([x1, y1, z0]),
            self.vertex([x0, y1, z0]),
        ];
        let t = [
            self.vertex([x0, y0, z1]),
            self.vertex([x1, y0, z1]),
            self.vertex([x1, y1, z1]),
            self.vertex([x0, y1, z1]),
        ];
        let faces = [
            [b[0], b[3], b[2], b[1]],
            [t[0], t[1], t[2], t[3]],
            [b[0], b[1], t[1], t[0]],
            [b[1], b[2], t[2], t[1]],
            [b[2], b[3], t[3], t[2]],
            [b[3], b[0], t[0], t[3]],
        ];
        let shell = Nested::list(
            faces
                .iter()
                .map(|f| Nested::list(vec![Nested::from_indices(f)]))
                .collect(),
        );
        let mut g = Geometry::new(GeometryKind::Solid, 2.0, Nested::list(vec![shell]));
        g.semantics = Some(Semantics {
            surfaces: vec![
                SemanticSurface::new("GroundSurface"),
                SemanticSurface::new("RoofSurface"),
                SemanticSurface::new("WallSurface"),
            ],
            values: Nested::list(vec![Nested::list(
                [0, 1, 2, 2, 2, 2].iter().map(|v| Nested::Leaf(Some(*v))).collect(),
            )]),
        });
        g
    }
}

const FUNCTIONS: &[&str] = &["residential", "office", "retail", "industrial", "education"];
const ROOFS: &[&str] = &["flat", "gable", "hip", "shed"];
const SPECIES: &[&str] = &["Tilia cordata", "Quercus robur", "Platanus x hispanica", "Acer platanoides"];
const STREETS: &[&str] = &["Kerkstraat", "Molenweg", "Stationsplein", "Dorpsstraat", "Beukenlaan"];

fn tree_template() -> TemplateBank {
    let vertices = vec![
        [-1.5, -1.5, 2.0],
        [1.5, -1.5, 2.0],
        [1.5, 1.5, 2.0],
        [-1.5, 1.5, 2.0],
        [0.0, 0.0, 7.0],
    ];
    let faces: [&[usize]; 5] = [&[0, 3, 2, 1], &[0, 1, 4], &[1, 2, 4], &[2, 3, 4], &[3, 0, 4]];
    let boundaries = Nested::list(
        faces
            .iter()
            .map(|f| Nested::list(vec![Nested::from_indices(f)]))
            .collect(),
    );
    TemplateBank {
        templates: vec![Geometry::new(GeometryKind::MultiSurface, 2.0, boundaries)],
        vertices,
    }
}

/// Generates a scene. Equal parameters give equal models.
pub fn generate(params: &SynthParams) -> CityModel {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut b = Builder {
        model: CityModel::new(),
        pool: HashMap::new(),
    };
    b.model.metadata = Some(Metadata {
        reference_system: Some(SYNTH_CRS.into()),
        ..Default::default()
    });
    if params.trees_per_row > 0 {
        b.model.geometry_templates = Some(tree_template());
    }

    let mut n_building = 0;
    for row in 0..params.rows {
        let x_start = rng.gen_range(484_000.0..484_800.0);
        let y0 = rng.gen_range(5_482_000.0..5_483_950.0);
        let ground = rng.gen_range(300.0..302.0);
        let depth = rng.gen_range(8.0..14.0);
        let street = STREETS[rng.gen_range(0..STREETS.len())];

        let mut x = x_start;
        let mut road_pts = vec![x];
        for i in 0..params.buildings_per_row {
            let w = rng.gen_range(6.0..12.0);
            let x1 = x + w;
            let height = rng.gen_range(5.0..28.0);
            let id = format!("NL.IMBAG.Pand.{:016}", 363_100_012_000_000u64 + n_building as u64);
            n_building += 1;
            let mut co = CityObject::new("Building");
            let attrs = [
                ("function", json!(FUNCTIONS[rng.gen_range(0..FUNCTIONS.len())])),
                ("roofType", json!(ROOFS[rng.gen_range(0..ROOFS.len())])),
                ("measuredHeight", crate::codec::number(mm(height))),
                ("yearOfConstruction", json!(rng.gen_range(1890..2024))),
                ("storeysAboveGround", json!(((height / 3.0) as i64).max(1))),
                ("address", json!(format!("{street} {}", i + 1))),
            ];
            co.attributes = attrs.into_iter().map(|(k, v)| (k.to_string(), v)).collect();

            let split = params.part_every > 0 && n_building % params.part_every == 0;
            if split {
                let xm = x + w * rng.gen_range(0.35..0.65);
                let h2 = height * rng.gen_range(0.5..0.9);
                let mut kids = Vec::new();
                for (k, (a, c, h)) in [(x, xm, height), (xm, x1, h2)].into_iter().enumerate() {
                    let pid = format!("{id}-part{}", k + 1);
                    let mut part = CityObject::new("BuildingPart");
                    part.parents = Some(vec![id.clone()]);
                    part.attributes.insert("measuredHeight".into(), crate::codec::number(mm(h)));
                    part.geometry.push(b.box_solid(a, y0, c, y0 + depth, ground, ground + h));
                    kids.push((pid, part));
                }
                co.children = Some(kids.iter().map(|(p, _)| p.clone()).collect());
                b.model.city_objects.insert(id, co);
                for (pid, part) in kids {
                    b.model.city_objects.insert(pid, part);
                }
            } else {
                co.geometry.push(b.box_solid(x, y0, x1, y0 + depth, ground, ground + height));
                b.model.city_objects.insert(id, co);
            }
            x = x1;
            road_pts.push(x);
        }

        // road strip in front of the row, one quad per building
        let (ya, yb) = (y0 - 9.0, y0 - 2.0);
        let mut surfaces = Vec::new();
        for w in road_pts.windows(2) {
            let q = [
                b.vertex([w[0], ya, ground]),
                b.vertex([w[1], ya, ground]),
                b.vertex([w[1], yb, ground]),
                b.vertex([w[0], yb, ground]),
            ];
            surfaces.push(Nested::list(vec![Nested::from_indices(&q)]));
        }
        if !surfaces.is_empty() {
            let mut road = CityObject::new("Road");
            road.attributes.insert("function".into(), json!("road"));
            road.attributes.insert("surfaceMaterial".into(), json!("asphalt"));
            road.attributes.insert("name".into(), json!(street));
            road.geometry.push(Geometry::new(GeometryKind::MultiSurface, 1.0, Nested::list(surfaces)));
            b.model.city_objects.insert(format!("road-{row}"), road);
        }

        for t in 0..params.trees_per_row {
            let tx = rng.gen_range(x_start..x.max(x_start + 1.0));
            let ty = ya - rng.gen_range(1.0..4.0);
            let refpt = b.vertex([tx, ty, ground]);
            let s = (rng.gen_range(0.6..1.6) * 100.0_f64).round() / 100.0;
            let mut matrix = [0.0; 16];
            matrix[0] = s;
            matrix[5] = s;
            matrix[10] = s;
            matrix[15] = 1.0;
            let mut tree = CityObject::new("SolitaryVegetationObject");
            tree.attributes.insert("species".into(), json!(SPECIES[rng.gen_range(0..SPECIES.len())]));
            tree.attributes.insert("height".into(), crate::codec::number(mm(7.0 * s)));
            tree.geometry.push(Geometry::instance(0, refpt, matrix));
            b.model.city_objects.insert(format!("tree-{row}-{t}"), tree);
        }
    }
    b.model
}

fn fmt_num(x: f64) -> String {
    crate::codec::number(x).to_string()
}

fn pos_list(model: &CityModel, ring: &[usize]) -> String {
    let mut s = String::new();
    for &i in ring.iter().chain(ring.first()) {
        let v = real_world_vertex(model, i).unwrap_or([0.0; 3]);
        for c in v {
            if !s.is_empty() {
                s.push(' ');
            }
            s.push_str(&fmt_num(c));
        }
    }
    s
}

fn polygon(model: &CityModel, out: &mut String, rings: &Nested<usize>) {
    out.push_str("<gml:Polygon>");
    for (k, r) in rings.as_list().unwrap_or_default().iter().enumerate() {
        let idx: Vec<usize> = r.leaves().into_iter().copied().collect();
        let tag = if k == 0 { "exterior" } else { "interior" };
        let _ = write!(
            out,
            "<gml:{tag}><gml:LinearRing><gml:posList>{}</gml:posList></gml:LinearRing></gml:{tag}>",
            pos_list(model, &idx)
        );
    }
    out.push_str("</gml:Polygon>");
}

fn attributes(out: &mut String, attrs: &Members) {
    for (k, v) in attrs {
        let (tag, text) = match v {
            Value::Number(n) if n.is_i64() || n.is_u64() => ("intAttribute", n.to_string()),
            Value::Number(n) => ("doubleAttribute", n.to_string()),
            Value::String(s) => ("stringAttribute", s.clone()),
            other => ("stringAttribute", other.to_string()),
        };
        let _ = write!(
            out,
            "<gen:{tag} name=\"{}\"><gen:value>{}</gen:value></gen:{tag}>",
            xml_escape(k),
            xml_escape(&text)
        );
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn lod_tag(lod: Option<f64>) -> u32 {
    lod.unwrap_or(1.0).floor() as u32
}

/// Building-like geometry: semantic surfaces under boundedBy and the solid
/// referencing their polygons by XLink, the usual CityGML LoD2 layout.
fn building_geometry(model: &CityModel, id: &str, g: &Geometry, out: &mut String, counter: &mut usize) {
    let lod = lod_tag(g.lod);
    let shells: Vec<&Nested<usize>> = match g.kind {
        GeometryKind::Solid => g.boundaries.as_list().unwrap_or_default().iter().collect(),
        _ => vec![&g.boundaries],
    };
    let values: Vec<Option<usize>> = g
        .semantics
        .as_ref()
        .map(|s| s.values.leaves().into_iter().copied().collect())
        .unwrap_or_default();
    let mut ids = Vec::new();
    let mut k = 0;
    for shell in &shells {
        for surface in shell.as_list().unwrap_or_default() {
            *counter += 1;
            let pid = format!("{id}-poly{counter}");
            let sem = values.get(k).copied().flatten();
            k += 1;
            let kind = sem
                .and_then(|i| g.semantics.as_ref().map(|s| s.surfaces[i].kind.as_str()))
                .unwrap_or("WallSurface");
            let _ = write!(
                out,
                "<bldg:boundedBy><bldg:{kind}><bldg:lod{lod}MultiSurface><gml:MultiSurface><gml:surfaceMember>"
            );
            let mut poly = String::new();
            polygon(model, &mut poly, surface);
            out.push_str(&poly.replacen("<gml:Polygon>", &format!("<gml:Polygon gml:id=\"{pid}\">"), 1));
            let _ = write!(
                out,
                "</gml:surfaceMember></gml:MultiSurface></bldg:lod{lod}MultiSurface></bldg:{kind}></bldg:boundedBy>"
            );
            ids.push(pid);
        }
    }
    let _ = write!(out, "<bldg:lod{lod}Solid><gml:Solid><gml:exterior><gml:CompositeSurface>");
    for pid in ids {
        let _ = write!(out, "<gml:surfaceMember xlink:href=\"#{pid}\"/>");
    }
    let _ = write!(out, "</gml:CompositeSurface></gml:exterior></gml:Solid></bldg:lod{lod}Solid>");
}

fn multi_surface(model: &CityModel, g: &Geometry, out: &mut String) {
    out.push_str("<gml:MultiSurface>");
    for s in g.boundaries.as_list().unwrap_or_default() {
        out.push_str("<gml:surfaceMember>");
        polygon(model, out, s);
        out.push_str("</gml:surfaceMember>");
    }
    out.push_str("</gml:MultiSurface>");
}

fn building(model: &CityModel, id: &str, tag: &str, out: &mut String, counter: &mut usize) {
    let co = &model.city_objects[id];
    let _ = write!(out, "<bldg:{tag} gml:id=\"{}\">", xml_escape(id));
    attributes(out, &co.attributes);
    for g in &co.geometry {
        building_geometry(model, id, g, out, counter);
    }
    for c in co.children() {
        out.push_str("<bldg:consistsOfBuildingPart>");
        building(model, c, "BuildingPart", out, counter);
        out.push_str("</bldg:consistsOfBuildingPart>");
    }
    let _ = write!(out, "</bldg:{tag}>");
}

/// Minimal CityGML 2.0 serialization of a scene made by [`generate`]:
/// buildings with parts, roads, and trees as implicit geometries whose
/// relative geometry is written once and then referenced by XLink.
/// Coordinates are written in full, once per ring point.
pub fn to_citygml(model: &CityModel) -> String {
    let mut out = String::from(concat!(
        r#"<?xml version="1.0" encoding="UTF-8"?>"#,
        r#"<core:CityModel xmlns:core="http://www.opengis.net/citygml/2.0" "#,
        r#"xmlns:bldg="http://www.opengis.net/citygml/building/2.0" "#,
        r#"xmlns:tran="http://www.opengis.net/citygml/transportation/2.0" "#,
        r#"xmlns:veg="http://www.opengis.net/citygml/vegetation/2.0" "#,
        r#"xmlns:gen="http://www.opengis.net/citygml/generics/2.0" "#,
        r#"xmlns:gml="http://www.opengis.net/gml" "#,
        r#"xmlns:xlink="http://www.w3.org/1999/xlink">"#
    ));
    if let Some(crs) = model.reference_system() {
        let _ = write!(out, "<gml:boundedBy><gml:Envelope srsName=\"{}\" srsDimension=\"3\">", xml_escape(crs));
        if let Ok(e) = crate::geoprocess::compute_extent(model) {
            let _ = write!(
                out,
                "<gml:lowerCorner>{} {} {}</gml:lowerCorner><gml:upperCorner>{} {} {}</gml:upperCorner>",
                fmt_num(e[0]),
                fmt_num(e[1]),
                fmt_num(e[2]),
                fmt_num(e[3]),
                fmt_num(e[4]),
                fmt_num(e[5])
            );
        }
        out.push_str("</gml:Envelope></gml:boundedBy>");
    }
    let mut counter = 0;
    let mut written_templates: Vec<bool> = vec![
        false;
        model.geometry_templates.as_ref().map_or(0, |b| b.templates.len())
    ];
    for (id, co) in &model.city_objects {
        if !co.parents().is_empty() {
            continue;
        }
        out.push_str("<core:cityObjectMember>");
        match co.kind.as_str() {
            "Building" => building(model, id, "Building", &mut out, &mut counter),
            "Road" => {
                let _ = write!(out, "<tran:Road gml:id=\"{}\">", xml_escape(id));
                attributes(&mut out, &co.attributes);
                for g in &co.geometry {
                    let lod = lod_tag(g.lod);
                    let _ = write!(out, "<tran:lod{lod}MultiSurface>");
                    multi_surface(model, g, &mut out);
                    let _ = write!(out, "</tran:lod{lod}MultiSurface>");
                }
                out.push_str("</tran:Road>");
            }
            other => {
                let (ns, tag) = if other == "SolitaryVegetationObject" {
                    ("veg", other)
                } else {
                    ("gen", "GenericCityObject")
                };
                let _ = write!(out, "<{ns}:{tag} gml:id=\"{}\">", xml_escape(id));
                attributes(&mut out, &co.attributes);
                for g in &co.geometry {
                    match &g.instance {
                        Some(inst) => {
                            let bank = model.geometry_templates.as_ref();
                            let t = bank.and_then(|b| b.templates.get(inst.template));
                            let lod = lod_tag(t.and_then(|t| t.lod));
                            let _ = write!(out, "<{ns}:lod{lod}ImplicitRepresentation><core:ImplicitGeometry>");
                            let m: Vec<String> = inst.matrix.iter().map(|x| fmt_num(*x)).collect();
                            let _ = write!(out, "<core:transformationMatrix>{}</core:transformationMatrix>", m.join(" "));
                            let tid = format!("template-{}", inst.template);
                            match (t, written_templates.get_mut(inst.template)) {
                                (Some(t), Some(done)) if !*done => {
                                    *done = true;
                                    let tm = CityModel {
                                        vertices: bank.map(|b| b.vertices.clone()).unwrap_or_default(),
                                        ..CityModel::new()
                                    };
                                    let _ = write!(out, "<core:relativeGMLGeometry>");
                                    let mut ms = String::new();
                                    multi_surface(&tm, t, &mut ms);
                                    out.push_str(&ms.replacen(
                                        "<gml:MultiSurface>",
                                        &format!("<gml:MultiSurface gml:id=\"{tid}\">"),
                                        1,
                                    ));
                                    out.push_str("</core:relativeGMLGeometry>");
                                }
                                _ => {
                                    let _ = write!(out, "<core:relativeGMLGeometry xlink:href=\"#{tid}\"/>");
                                }
                            }
                            let p = g
                                .reference_point()
                                .and_then(|i| real_world_vertex(model, i).ok())
                                .unwrap_or([0.0; 3]);
                            let _ = write!(
                                out,
                                "<core:referencePoint><gml:Point><gml:pos>{} {} {}</gml:pos></gml:Point></core:referencePoint>",
                                fmt_num(p[0]),
                                fmt_num(p[1]),
                                fmt_num(p[2])
                            );
                            let _ = write!(out, "</core:ImplicitGeometry></{ns}:lod{lod}ImplicitRepresentation>");
                        }
                        None => {
                            let lod = lod_tag(g.lod);
                            let _ = write!(out, "<{ns}:lod{lod}Geometry>");
                            multi_surface(model, g, &mut out);
                            let _ = write!(out, "</{ns}:lod{lod}Geometry>");
                        }
                    }
                }
                let _ = write!(out, "</{ns}:{tag}>");
            }
        }
        out.push_str("</core:cityObjectMember>");
    }
    out.push_str("</core:CityModel>");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validator::validate_model;

    #[test]
    fn deterministic_and_valid() {
        let p = SynthParams::default();
        let a = generate(&p);
        assert_eq!(a, generate(&p));
        assert_ne!(a, generate(&SynthParams::with_seed(2)));
        let r = validate_model(&a);
        assert!(r.is_empty(), "{r}");
        let buildings = a.city_objects.values().filter(|c| c.kind.as_str() == "Building").count();
        assert_eq!(buildings, p.rows * p.buildings_per_row);
        assert!(a.city_objects.values().any(|c| c.kind.as_str() == "BuildingPart"));
    }

    #[test]
    fn coordinates_have_millimetre_precision() {
        let m = generate(&SynthParams::default());
        for v in &m.vertices {
            assert!((484_000.0..486_000.0).contains(&v[0]));
            assert!((5_482_000.0..5_484_000.0).contains(&v[1]));
            for c in v {
                assert_eq!(mm(*c), *c);
            }
        }
    }

    #[test]
    fn citygml_twin_imports() {
        let m = generate(&SynthParams {
            rows: 2,
            buildings_per_row: 4,
            trees_per_row: 2,
            ..Default::default()
        });
        let xml = to_citygml(&m);
        let (imported, report) = crate::gml::import_citygml(xml.as_bytes()).unwrap();
        assert_eq!(report.features.get("Building"), Some(&8));
        for (id, co) in &m.city_objects {
            if co.kind.as_str() == "SolitaryVegetationObject" {
                continue;
            }
            let other = &imported.city_objects[id];
            assert_eq!(other.kind, co.kind);
            assert_eq!(other.geometry.len(), co.geometry.len(), "{id}");
        }
        assert!(validate_model(&imported).is_valid());
    }
}
