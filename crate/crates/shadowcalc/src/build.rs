//! Shadows from link diagrams and polyhedron surgeries.
//!
//! Every surgery edits cells directly and then hands the result to the
//! normalizer, which dissolves 2-germ edges and reclassifies nodes.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

use crate::branching::{is_branching, Branching};
use crate::link::{is_admissible, make_admissible, DiagramError, OrientedLinkDiagram};
use crate::normalize::{normalize, Normalized};
use crate::poly::{
    head_end, nat_sorted, parse_polyhedron, tail_end, BoundaryCircle, Color, Dir, Edge, EdgeKind, End, HalfInt,
    NodeKind, Region, ShadowPolyhedron, Step,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("illegal result at {at}: {detail}")]
    IllegalResult { at: String, detail: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("diagram is not admissible: {0}")]
    NotAdmissible(String),
    #[error("no such id: {0}")]
    UnknownId(String),
    #[error("boundary component {0} cannot be used: {1}")]
    BadCircle(String, String),
    #[error("bad argument: {0}")]
    BadArgument(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// Sign applied to every corner contribution; +1 gives the rotated-corner
/// pair +1/2.
pub const CORNER_SIGN: i64 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MappingCylinderShadow {
    #[serde(skip)]
    pub polyhedron: ShadowPolyhedron,
    pub branching: Branching,
    pub wall_regions: BTreeMap<usize, String>,
    pub face_regions: BTreeMap<usize, String>,
    pub crossing_vertices: BTreeMap<usize, String>,
    pub outer_region: String,
}

/// Twice the gleam contribution of corner k (between positions k, k+1):
/// the two corners swept by turning the over-strand counterclockwise onto
/// the under-strand are the odd ones.
pub fn corner_twice(k: u8) -> i64 {
    CORNER_SIGN * if k % 2 == 1 { 1 } else { -1 }
}

fn dir_slot(d: Dir) -> u8 {
    match d {
        Dir::Plus => 0,
        Dir::Minus => 1,
    }
}

fn add_circle(p: &mut ShadowPolyhedron, id: &str, color: Color) -> Vec<Step> {
    p.edges.insert(id.to_string(), Edge { from: None, to: None, flip: false, kind: EdgeKind::Arc });
    p.boundary.insert(id.to_string(), BoundaryCircle { color, arcs: vec![id.to_string()], bvs: Vec::new() });
    vec![Step::new(id, Dir::Plus, 0)]
}

/// Regions are the diagram faces plus one wall per component; the punctured
/// face keeps the f-colored circle of the puncture, each wall the i-colored
/// copy of its component.
pub fn mapping_cylinder_shadow(d: &OrientedLinkDiagram) -> Result<MappingCylinderShadow, BuildError> {
    let adm = is_admissible(d);
    if !adm.admissible {
        return Err(BuildError::NotAdmissible(adm.reasons.join("; ")));
    }
    let outer = d.outer_face.unwrap();
    let mut p = ShadowPolyhedron::new("mapping-cylinder");
    let mut crossing_vertices = BTreeMap::new();
    for c in 0..d.crossings.len() {
        let id = format!("x{}", c + 1);
        p.nodes.insert(id.clone(), NodeKind::True);
        crossing_vertices.insert(c, id);
    }
    let eid = |e: usize| format!("d{}", d.edges[e].label);
    for (e, de) in d.edges.iter().enumerate() {
        let from = de.tail.map(|(c, _)| crossing_vertices[&c].clone());
        let to = de.head.map(|(c, _)| crossing_vertices[&c].clone());
        p.edges.insert(eid(e), Edge::singular(from.as_deref(), to.as_deref()));
    }
    let mut face_regions = BTreeMap::new();
    for (k, f) in d.faces.iter().enumerate() {
        let id = if k == outer { "R".to_string() } else { format!("f{}", k + 1) };
        let walk = f.darts.iter().map(|(e, dir)| Step::new(eid(*e), *dir, dir_slot(*dir))).collect();
        let gleam = (k != outer).then(|| HalfInt(f.corners.iter().map(|(_, c)| corner_twice(*c)).sum()));
        p.regions.insert(id.clone(), Region::disk(walk, gleam));
        face_regions.insert(k, id);
    }
    let puncture = add_circle(&mut p, "dD", Color::F);
    p.regions.get_mut("R").unwrap().walks.push(puncture);
    let mut wall_regions = BTreeMap::new();
    for (j, comp) in d.components.iter().enumerate() {
        let id = format!("w{}", j + 1);
        let walk = comp.iter().rev().map(|e| Step::new(eid(*e), Dir::Minus, 2)).collect();
        let mut reg = Region::disk(walk, None);
        reg.walks.push(add_circle(&mut p, &format!("k{}", j + 1), Color::I));
        p.regions.insert(id.clone(), reg);
        wall_regions.insert(j, id);
    }
    let branching = Branching { orientation: p.regions.keys().map(|r| (r.clone(), Dir::Plus)).collect() };
    p.branching = Some(branching.clone());
    Ok(MappingCylinderShadow {
        polyhedron: p,
        branching,
        wall_regions,
        face_regions,
        crossing_vertices,
        outer_region: "R".into(),
    })
}

/// Shadow of a diagram with the punctured face removed.
#[derive(Clone, Debug)]
pub struct LinkShadow {
    pub diagram: OrientedLinkDiagram,
    pub reversed: bool,
    pub mapping_cylinder: MappingCylinderShadow,
    pub polyhedron: ShadowPolyhedron,
}

/// The whole pipeline: keep a given admissible puncture, otherwise choose
/// one, build the mapping cylinder and remove the punctured face.
pub fn shadow_of_diagram(d: &OrientedLinkDiagram) -> Result<LinkShadow, BuildError> {
    let (diagram, reversed) = match d.outer_face {
        Some(_) if is_admissible(d).admissible => (d.clone(), false),
        Some(_) => return Err(BuildError::NotAdmissible(is_admissible(d).reasons.join("; "))),
        None => make_admissible(d)?,
    };
    let mapping_cylinder = mapping_cylinder_shadow(&diagram)?;
    let polyhedron = remove_region(&mapping_cylinder.polyhedron, &mapping_cylinder.outer_region)?;
    Ok(LinkShadow { diagram, reversed, mapping_cylinder, polyhedron })
}

pub(crate) fn remove_region_tracked(p: &ShadowPolyhedron, region: &str) -> Result<Normalized, BuildError> {
    let mut q = p.clone();
    if q.regions.remove(region).is_none() {
        return Err(BuildError::UnknownId(region.into()));
    }
    if let Some(b) = q.branching.as_mut() {
        b.orientation.remove(region);
    }
    let n = normalize(q, Color::F)?;
    if n.poly.regions.is_empty() {
        return Err(BuildError::IllegalResult { at: region.into(), detail: "nothing remains".into() });
    }
    Ok(n)
}

/// Delete a region and restore the local models around what it touched.
pub fn remove_region(p: &ShadowPolyhedron, region: &str) -> Result<ShadowPolyhedron, BuildError> {
    Ok(remove_region_tracked(p, region)?.poly)
}

fn closed_circle(p: &ShadowPolyhedron, circle: &str) -> Result<String, BuildError> {
    let bc = p.boundary.get(circle).ok_or_else(|| BuildError::UnknownId(circle.into()))?;
    if !bc.is_closed_circle() {
        return Err(BuildError::BadCircle(circle.into(), "it runs through boundary vertices".into()));
    }
    p.region_of_circle(circle).ok_or_else(|| BuildError::BadCircle(circle.into(), "no region holds it".into()))
}

fn sign_of(p: &ShadowPolyhedron, r: &str) -> Dir {
    p.branching.as_ref().and_then(|b| b.orientation.get(r).copied()).unwrap_or(Dir::Plus)
}

fn set_sign(p: &mut ShadowPolyhedron, r: &str, s: Dir) {
    if let Some(b) = p.branching.as_mut() {
        b.orientation.insert(r.to_string(), s);
    }
}

pub(crate) fn rename_region(p: &mut ShadowPolyhedron, from: &str, to: &str) {
    if from == to {
        return;
    }
    if let Some(r) = p.regions.remove(from) {
        p.regions.insert(to.to_string(), r);
    }
    if let Some(b) = p.branching.as_mut() {
        if let Some(s) = b.orientation.remove(from) {
            b.orientation.insert(to.to_string(), s);
        }
    }
}

/// Newly internal regions get gleam 0 unless they already carry one.
fn default_gleams(p: &mut ShadowPolyhedron) {
    let internal: Vec<String> = p.regions.keys().filter(|r| p.is_internal(r)).cloned().collect();
    for r in internal {
        let reg = p.regions.get_mut(&r).unwrap();
        if reg.gleam.is_none() {
            reg.gleam = Some(HalfInt(0));
        }
    }
}

/// Glue a disk along a closed boundary circle. The disk merges into the
/// region holding the circle, which keeps its id and receives `gleam` when
/// it becomes internal.
pub fn cap_boundary(p: &ShadowPolyhedron, circle: &str, gleam: HalfInt) -> Result<ShadowPolyhedron, BuildError> {
    let r = closed_circle(p, circle)?;
    let mut q = p.clone();
    let cap = q.fresh("cap");
    q.regions.insert(cap.clone(), Region::disk(vec![Step::new(circle, Dir::Minus, 1)], Some(gleam)));
    let s = sign_of(&q, &r);
    set_sign(&mut q, &cap, s);
    let n = normalize(q, Color::F)?;
    let survivor = n.survivor(&r).or_else(|| n.survivor(&cap)).expect("capped region survives");
    let mut out = n.poly;
    rename_region(&mut out, &survivor, &r);
    if out.is_internal(&r) {
        out.regions.get_mut(&r).unwrap().gleam = Some(gleam);
    }
    Ok(out)
}

/// Tower of the given height on a closed boundary circle: the circle becomes
/// a flipped vertexless loop doubly covered by the old region; each further
/// stage is an annulus running once around the loop below and twice around
/// the next one, and a disk closes the top. The new regions take `gleams`
/// bottom-up; a base region that becomes internal gets gleam 0.
pub fn attach_tower(
    p: &ShadowPolyhedron,
    circle: &str,
    height: usize,
    gleams: &[HalfInt],
) -> Result<ShadowPolyhedron, BuildError> {
    if height == 0 {
        return Err(BuildError::BadArgument("tower height must be positive".into()));
    }
    if gleams.len() != height {
        return Err(BuildError::BadArgument(format!("tower of height {height} needs {height} gleams")));
    }
    let r = closed_circle(p, circle)?;
    let mut q = p.clone();
    q.boundary.remove(circle);
    let e = q.edges.get_mut(circle).unwrap();
    e.kind = EdgeKind::Singular;
    e.flip = true;
    for w in q.regions.get_mut(&r).unwrap().walks.iter_mut() {
        if w.len() == 1 && w[0].edge == circle {
            *w = vec![Step::new(circle, Dir::Plus, 0), Step::new(circle, Dir::Plus, 1)];
        }
    }
    let mut below = circle.to_string();
    for (i, g) in gleams.iter().enumerate() {
        let id = q.fresh("tw");
        let mut reg = Region::disk(vec![Step::new(below.as_str(), Dir::Plus, 2)], Some(*g));
        if i + 1 < height {
            let next = q.fresh("t");
            q.edges.insert(next.clone(), Edge { from: None, to: None, flip: true, kind: EdgeKind::Singular });
            reg.walks.push(vec![Step::new(next.as_str(), Dir::Plus, 0), Step::new(next.as_str(), Dir::Plus, 1)]);
            below = next;
        }
        q.regions.insert(id.clone(), reg);
        set_sign(&mut q, &id, Dir::Plus);
    }
    default_gleams(&mut q);
    Ok(q)
}

/// Thicken each boundary graph through boundary vertices into a ribbon
/// surface containing it: arcs become triple lines, boundary vertices true
/// vertices, and every face of the ribbon an annulus ending on a new circle
/// of the same color.
pub fn eliminate_boundary_vertices(p: &ShadowPolyhedron) -> Result<ShadowPolyhedron, BuildError> {
    let mut q = p.clone();
    let comps: Vec<String> =
        nat_sorted(p.boundary.keys()).into_iter().filter(|c| !p.boundary[*c].bvs.is_empty()).cloned().collect();
    for c in comps {
        let bc = q.boundary.remove(&c).unwrap();
        // rotation at each vertex: its arc ends in sorted order
        let mut rot: BTreeMap<String, Vec<(String, End)>> = BTreeMap::new();
        for a in nat_sorted(bc.arcs.iter()) {
            let e = &q.edges[a];
            rot.entry(e.from.clone().unwrap()).or_default().push((a.clone(), End::From));
            rot.entry(e.to.clone().unwrap()).or_default().push((a.clone(), End::To));
        }
        let mut used: BTreeSet<(String, Dir)> = BTreeSet::new();
        for a in nat_sorted(bc.arcs.iter()) {
            for d0 in [Dir::Plus, Dir::Minus] {
                if used.contains(&(a.clone(), d0)) {
                    continue;
                }
                let mut walk = Vec::new();
                let mut cur = (a.clone(), d0);
                loop {
                    used.insert(cur.clone());
                    let slot = if cur.1 == Dir::Plus { 1 } else { 2 };
                    walk.push(Step::new(cur.0.as_str(), cur.1, slot));
                    let end = head_end(&walk[walk.len() - 1]);
                    let node = q.edges[&cur.0].end(end).unwrap().clone();
                    let ends = &rot[&node];
                    let i = ends.iter().position(|x| *x == (cur.0.clone(), end)).unwrap();
                    let (na, ne) = ends[(i + 1) % ends.len()].clone();
                    cur = (na, if ne == End::From { Dir::Plus } else { Dir::Minus });
                    if cur == (a.clone(), d0) {
                        break;
                    }
                }
                let rid = q.fresh("rb");
                let circ = q.fresh("fb");
                let mut reg = Region::disk(walk, None);
                reg.walks.push(add_circle(&mut q, &circ, bc.color));
                q.regions.insert(rid.clone(), reg);
                set_sign(&mut q, &rid, Dir::Plus);
            }
        }
        for a in &bc.arcs {
            q.edges.get_mut(a).unwrap().kind = EdgeKind::Singular;
        }
        for v in &bc.bvs {
            q.nodes.insert(v.clone(), NodeKind::True);
        }
    }
    default_gleams(&mut q);
    Ok(q)
}

/// Cut out an open ball around a true vertex: every edge end there gets a
/// boundary vertex and every corner an arc of a new f-colored graph.
pub fn excise_vertex(p: &ShadowPolyhedron, v: &str) -> Result<ShadowPolyhedron, BuildError> {
    if p.nodes.get(v) != Some(&NodeKind::True) {
        return Err(BuildError::UnknownId(v.into()));
    }
    let mut q = p.clone();
    let link = p.link_at(v);
    let bvs: Vec<String> = (0..link.ends.len())
        .map(|_| {
            let id = q.fresh("bv");
            q.nodes.insert(id.clone(), NodeKind::Bv);
            id
        })
        .collect();
    q.nodes.remove(v);
    for (k, (e, end)) in link.ends.iter().enumerate() {
        let edge = q.edges.get_mut(e).unwrap();
        match end {
            End::From => edge.from = Some(bvs[k].clone()),
            End::To => edge.to = Some(bvs[k].clone()),
        }
    }
    let mut arcs = Vec::new();
    let regions: Vec<String> = q.regions.keys().cloned().collect();
    for r in regions {
        let walks = p.regions[&r].walks.clone();
        let mut new_walks = Vec::new();
        for w in walks {
            let mut nw = Vec::new();
            for (i, s) in w.iter().enumerate() {
                nw.push(s.clone());
                let next = &w[(i + 1) % w.len()];
                if p.head_node(s).map(String::as_str) == Some(v) {
                    let ka = link.index(&s.edge, head_end(s)).unwrap();
                    let kb = link.index(&next.edge, tail_end(next)).unwrap();
                    let id = q.fresh("ba");
                    q.edges.insert(
                        id.clone(),
                        Edge { from: Some(bvs[ka].clone()), to: Some(bvs[kb].clone()), flip: false, kind: EdgeKind::Arc },
                    );
                    arcs.push(id.clone());
                    nw.push(Step::new(id, Dir::Plus, 0));
                }
            }
            new_walks.push(nw);
        }
        let reg = q.regions.get_mut(&r).unwrap();
        reg.walks = new_walks;
    }
    let h = q.fresh("H");
    q.boundary.insert(h, BoundaryCircle { color: Color::F, arcs, bvs });
    let external: Vec<String> = q.regions.keys().filter(|r| !q.is_internal(r)).cloned().collect();
    for r in external {
        q.regions.get_mut(&r).unwrap().gleam = None;
    }
    Ok(q)
}

/// Copy of `p` with every id prefixed.
pub(crate) fn prefixed(p: &ShadowPolyhedron, pre: &str) -> ShadowPolyhedron {
    let f = |s: &String| format!("{pre}{s}");
    let mut q = ShadowPolyhedron::new(p.name.clone());
    q.nodes = p.nodes.iter().map(|(k, v)| (f(k), *v)).collect();
    q.edges = p
        .edges
        .iter()
        .map(|(k, e)| (f(k), Edge { from: e.from.as_ref().map(f), to: e.to.as_ref().map(f), flip: e.flip, kind: e.kind }))
        .collect();
    q.regions = p
        .regions
        .iter()
        .map(|(k, r)| {
            let mut r = r.clone();
            for s in r.walks.iter_mut().flatten() {
                s.edge = f(&s.edge);
            }
            (f(k), r)
        })
        .collect();
    q.boundary = p
        .boundary
        .iter()
        .map(|(k, b)| {
            (f(k), BoundaryCircle { color: b.color, arcs: b.arcs.iter().map(f).collect(), bvs: b.bvs.iter().map(f).collect() })
        })
        .collect();
    q.branching = p.branching.as_ref().map(|b| Branching { orientation: b.orientation.iter().map(|(k, d)| (f(k), *d)).collect() });
    q
}

fn disjoint_union(a: ShadowPolyhedron, b: ShadowPolyhedron, name: String) -> ShadowPolyhedron {
    let mut q = ShadowPolyhedron::new(name);
    let branching = match (&a.branching, &b.branching) {
        (Some(x), Some(y)) => Some(Branching { orientation: x.orientation.iter().chain(&y.orientation).map(|(k, d)| (k.clone(), *d)).collect() }),
        _ => None,
    };
    for p in [a, b] {
        q.nodes.extend(p.nodes);
        q.edges.extend(p.edges);
        q.regions.extend(p.regions);
        q.boundary.extend(p.boundary);
    }
    q.branching = branching;
    q
}

/// Join the first regions of the two inputs along a new vertexless loop
/// that also bounds a new gleam-0 disk.
pub fn connected_sum(p1: &ShadowPolyhedron, p2: &ShadowPolyhedron) -> Result<ShadowPolyhedron, BuildError> {
    let (a, b) = (prefixed(p1, "a."), prefixed(p2, "b."));
    let r1 = nat_sorted(a.regions.keys()).first().map(|s| s.to_string()).ok_or_else(|| BuildError::BadArgument("empty polyhedron".into()))?;
    let r2 = nat_sorted(b.regions.keys()).first().map(|s| s.to_string()).ok_or_else(|| BuildError::BadArgument("empty polyhedron".into()))?;
    let (s1, s2) = (sign_of(&a, &r1), sign_of(&b, &r2));
    let mut q = disjoint_union(a, b, format!("{}#{}", p1.name, p2.name));
    let t = q.fresh("t");
    q.edges.insert(t.clone(), Edge::singular(None, None));
    // induced directions: r1 forward, r2 backward, the new disk forward
    q.regions.get_mut(&r1).unwrap().walks.push(vec![Step::new(t.as_str(), s1, 0)]);
    q.regions.get_mut(&r2).unwrap().walks.push(vec![Step::new(t.as_str(), s2.rev(), 1)]);
    let disk = q.fresh("sum");
    q.regions.insert(disk.clone(), Region::disk(vec![Step::new(t.as_str(), Dir::Plus, 2)], Some(HalfInt(0))));
    set_sign(&mut q, &disk, Dir::Plus);
    Ok(q)
}

fn torus_circle(p: &ShadowPolyhedron, l: &str) -> Result<String, BuildError> {
    let r = closed_circle(p, l)?;
    if p.boundary[l].color != Color::E {
        return Err(BuildError::BadCircle(l.into(), "not a torus (e-colored) boundary".into()));
    }
    Ok(r)
}

/// Identify two e-colored circles of one polyhedron. With the plain annulus
/// the regions merge across the circle (reversing it); when their signs
/// cannot agree, or when asked, a disk is added along the circle instead so
/// that it becomes a vertexless loop. Returns whether the disk was used.
fn glue_circles(p: &ShadowPolyhedron, l1: &str, l2: &str, use_q0: bool) -> Result<(ShadowPolyhedron, bool), BuildError> {
    if l1 == l2 {
        return Err(BuildError::BadArgument("cannot glue a circle to itself".into()));
    }
    let r1 = torus_circle(p, l1)?;
    let r2 = torus_circle(p, l2)?;
    let (s1, s2) = (sign_of(p, &r1), sign_of(p, &r2));
    let q0 = use_q0 || (p.branching.is_some() && r1 != r2 && s1 != s2);
    let mut q = p.clone();
    q.boundary.remove(l1);
    q.boundary.remove(l2);
    q.edges.remove(l2);
    for s in q.regions.get_mut(&r2).unwrap().walks.iter_mut().flatten() {
        if s.edge == l2 {
            *s = Step::new(l1, Dir::Minus, 1);
        }
    }
    if !q0 {
        q.boundary.insert(l1.to_string(), BoundaryCircle { color: Color::E, arcs: vec![l1.to_string()], bvs: vec![] });
        let n = normalize(q, Color::F)?;
        let mut out = n.poly;
        default_gleams(&mut out);
        return Ok((out, false));
    }
    q.edges.get_mut(l1).unwrap().kind = EdgeKind::Singular;
    // r1 induces s1, r2 induces -s2; the disk supplies whichever is missing
    let disk_dir = if s1 == s2.rev() { s1.rev() } else { Dir::Plus };
    let disk = q.fresh("q0");
    q.regions.insert(disk.clone(), Region::disk(vec![Step::new(l1, disk_dir, 2)], Some(HalfInt(0))));
    set_sign(&mut q, &disk, Dir::Plus);
    default_gleams(&mut q);
    Ok((q, true))
}

/// Glue two polyhedra along e-colored circles through the vertex-free piece
/// described at [`glue_circles`]. The second input's branching is negated
/// when that lets the first one extend.
pub fn torus_sum(
    p1: &ShadowPolyhedron,
    l1: &str,
    p2: &ShadowPolyhedron,
    l2: &str,
    use_q0: bool,
) -> Result<(ShadowPolyhedron, bool), BuildError> {
    let r1 = torus_circle(p1, l1)?;
    let r2 = torus_circle(p2, l2)?;
    let mut b = prefixed(p2, "b.");
    if sign_of(p1, &r1) != sign_of(p2, &r2) {
        b.branching = b.branching.map(|x| x.negated());
    }
    let a = prefixed(p1, "a.");
    let q = disjoint_union(a, b, format!("{}+{}", p1.name, p2.name));
    glue_circles(&q, &format!("a.{l1}"), &format!("b.{l2}"), use_q0)
}

/// Self-gluing of two e-colored circles of one polyhedron.
pub fn torus_self_sum(p: &ShadowPolyhedron, l1: &str, l2: &str, use_q0: bool) -> Result<(ShadowPolyhedron, bool), BuildError> {
    glue_circles(p, l1, l2, use_q0)
}

pub fn recolor_boundary(p: &ShadowPolyhedron, circle: &str, color: Color) -> Result<ShadowPolyhedron, BuildError> {
    let mut q = p.clone();
    q.boundary.get_mut(circle).ok_or_else(|| BuildError::UnknownId(circle.into()))?.color = color;
    Ok(q)
}

const TYPE3_CAP: &str = include_str!("../../../fixtures/polyhedra/type3-cap.asp");

/// The cap for a four-vertex boundary graph: two true vertices and one
/// boundary graph of the same shape.
pub fn type3_cap() -> ShadowPolyhedron {
    parse_polyhedron(TYPE3_CAP).expect("bundled fixture parses")
}

/// Graph isomorphisms between two boundary graphs: vertex map and, per arc
/// of `a`, the matching arc of `b` and whether it runs backwards.
fn graph_isos(pa: &ShadowPolyhedron, a: &BoundaryCircle, pb: &ShadowPolyhedron, b: &BoundaryCircle) -> Vec<(BTreeMap<String, String>, Vec<(String, String, bool)>)> {
    let mut out = Vec::new();
    if a.bvs.len() != b.bvs.len() || a.arcs.len() != b.arcs.len() {
        return out;
    }
    let ends = |p: &ShadowPolyhedron, x: &String| {
        let e = &p.edges[x];
        (e.from.clone().unwrap(), e.to.clone().unwrap())
    };
    for perm in b.bvs.iter().permutations(b.bvs.len()) {
        let vm: BTreeMap<String, String> = a.bvs.iter().cloned().zip(perm.into_iter().cloned()).collect();
        // greedy is enough up to reordering parallel arcs, which is harmless
        let mut free: Vec<String> = b.arcs.clone();
        let mut arcs = Vec::new();
        let mut ok = true;
        for x in &a.arcs {
            let (u, v) = ends(pa, x);
            let (mu, mv) = (&vm[&u], &vm[&v]);
            let hit = free.iter().position(|y| {
                let (s, t) = ends(pb, y);
                (&s == mu && &t == mv) || (&s == mv && &t == mu)
            });
            match hit {
                Some(i) => {
                    let y = free.remove(i);
                    let (s, _) = ends(pb, &y);
                    arcs.push((x.clone(), y, &s != mu));
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            out.push((vm, arcs));
        }
    }
    out
}

/// Cap a four-vertex boundary graph with the bundled two-vertex piece. Its
/// boundary vertices disappear into triple lines; two true vertices appear.
pub fn resolve_type3(p: &ShadowPolyhedron, comp: &str) -> Result<ShadowPolyhedron, BuildError> {
    let h = p.boundary.get(comp).ok_or_else(|| BuildError::UnknownId(comp.into()))?;
    if h.bvs.len() != 4 {
        return Err(BuildError::BadCircle(comp.into(), format!("{} boundary vertices, not 4", h.bvs.len())));
    }
    let cap = type3_cap();
    let pre = (1..).map(|i| format!("q{i}.")).find(|s| !p.edges.keys().chain(p.regions.keys()).chain(p.nodes.keys()).any(|k| k.starts_with(s))).unwrap();
    let cap = prefixed(&cap, &pre);
    let hc_id = cap.boundary.keys().next().unwrap().clone();
    let hc = cap.boundary[&hc_id].clone();
    let isos = graph_isos(p, h, &cap, &hc);
    if isos.is_empty() {
        return Err(BuildError::BadCircle(comp.into(), "graph differs from the cap's boundary".into()));
    }
    let mut first_err = None;
    let mut fallback = None;
    for (vm, arcs) in &isos {
        for negate in [false, true] {
            let mut c = cap.clone();
            if negate {
                c.branching = c.branching.map(|b| b.negated());
            }
            let inv: BTreeMap<&String, &String> = vm.iter().map(|(k, v)| (v, k)).collect();
            for e in c.edges.values_mut() {
                for end in [&mut e.from, &mut e.to] {
                    if let Some(n) = end.as_ref().and_then(|n| inv.get(n)) {
                        *end = Some((*n).clone());
                    }
                }
            }
            let amap: BTreeMap<&String, (&String, bool)> = arcs.iter().map(|(x, y, r)| (y, (x, *r))).collect();
            for reg in c.regions.values_mut() {
                for s in reg.walks.iter_mut().flatten() {
                    if let Some((x, r)) = amap.get(&s.edge) {
                        *s = Step::new(x.as_str(), if *r { s.dir.rev() } else { s.dir }, 1);
                    }
                }
            }
            for (_, y, _) in arcs {
                c.edges.remove(y);
            }
            for b in &hc.bvs {
                c.nodes.remove(b);
            }
            c.boundary.clear();
            let had_branching = p.branching.is_some() && c.branching.is_some();
            let q = disjoint_union(p.clone(), c, p.name.clone());
            match normalize(q, Color::F) {
                Ok(n) => {
                    let mut out = n.poly;
                    default_gleams(&mut out);
                    if !had_branching || out.branching.is_some() {
                        return Ok(out);
                    }
                    fallback.get_or_insert(out);
                }
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
    }
    fallback.ok_or_else(|| first_err.unwrap())
}

/// Check the stored branching, if any.
pub fn branching_holds(p: &ShadowPolyhedron) -> bool {
    p.branching.as_ref().is_some_and(|b| is_branching(p, b).unwrap_or(false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::{make_admissible, parse_braid, parse_pd};

    const EIGHT: &str = "PD[X(4,2,5,1), X(8,6,1,5), X(6,3,7,4), X(2,7,3,8)]";

    fn pipeline(d: &OrientedLinkDiagram) -> ShadowPolyhedron {
        let (a, _) = make_admissible(d).unwrap();
        let m = mapping_cylinder_shadow(&a).unwrap();
        let rep = m.polyhedron.validate();
        assert!(rep.valid, "{:?}", rep.messages());
        assert!(branching_holds(&m.polyhedron));
        remove_region(&m.polyhedron, "R").unwrap()
    }

    #[test]
    fn figure_eight_pipeline() {
        let p = pipeline(&parse_pd(EIGHT).unwrap());
        assert!(p.validate().valid, "{:?}", p.validate().messages());
        assert_eq!(p.complexity_c(), 2);
        assert_eq!(p.boundary_vertices().len(), 0);
        assert!(branching_holds(&p));
    }

    #[test]
    fn trefoil_braid_pipeline() {
        let p = pipeline(&parse_braid("braid 2 \"aaa\"").unwrap());
        assert!(p.validate().valid, "{:?}", p.validate().messages());
        assert_eq!(p.complexity_c(), 0);
    }

    #[test]
    fn unknot_pipeline() {
        let d = parse_pd("PD[]").unwrap();
        let (a, _) = make_admissible(&d).unwrap();
        let m = mapping_cylinder_shadow(&a).unwrap();
        assert!(m.polyhedron.validate().valid, "{:?}", m.polyhedron.validate().messages());
        assert_eq!(m.polyhedron.complexity_c(), 0);
        let p = remove_region(&m.polyhedron, "R").unwrap();
        assert!(p.validate().valid, "{:?}", p.validate().messages());
    }

    #[test]
    fn removing_everything_fails() {
        let p = parse_polyhedron("polyhedron sphere\nregion s genus 0 gleam 0/2\n").unwrap();
        assert!(matches!(remove_region(&p, "s"), Err(BuildError::IllegalResult { .. })));
    }
}
