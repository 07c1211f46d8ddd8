//! Boundary-decorated almost-special polyhedra: data model, ASP text format,
//! validation and cell counts.
//!
//! Every edge has three wing slots (boundary arcs only use slot 0). A region
//! is a compact surface described by its genus, orientability and the cyclic
//! walks along which its boundary is attached to the singular set or to ∂P.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::branching::Branching;

/// A half-integer stored as twice its value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfInt(pub i64);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);

    pub fn from_twice(t: i64) -> Self {
        HalfInt(t)
    }

    pub fn int(n: i64) -> Self {
        HalfInt(2 * n)
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Accepts `n`, `n/2` and `n/1`.
    pub fn parse(s: &str) -> Option<Self> {
        match s.split_once('/') {
            None => s.parse::<i64>().ok().map(HalfInt::int),
            Some((a, "2")) => a.parse::<i64>().ok().map(HalfInt),
            Some((a, "1")) => a.parse::<i64>().ok().map(HalfInt::int),
            _ => None,
        }
    }

    /// Human form: `1/2`, `-1`, `3/2`.
    pub fn pretty(self) -> String {
        if self.is_integer() {
            format!("{}", self.0 / 2)
        } else {
            format!("{}/2", self.0)
        }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2", self.0)
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, o: HalfInt) -> HalfInt {
        HalfInt(self.0 + o.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, o: HalfInt) -> HalfInt {
        HalfInt(self.0 - o.0)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

/// Traversal direction of a step, also used as a region sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dir {
    Plus,
    Minus,
}

impl Dir {
    pub fn rev(self) -> Dir {
        match self {
            Dir::Plus => Dir::Minus,
            Dir::Minus => Dir::Plus,
        }
    }

    pub fn sign(self) -> i32 {
        match self {
            Dir::Plus => 1,
            Dir::Minus => -1,
        }
    }

    pub fn times(self, o: Dir) -> Dir {
        if self == o {
            Dir::Plus
        } else {
            Dir::Minus
        }
    }

    fn parse(s: &str) -> Option<Dir> {
        match s {
            "+" => Some(Dir::Plus),
            "-" => Some(Dir::Minus),
            _ => None,
        }
    }
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dir::Plus => "+",
            Dir::Minus => "-",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub edge: String,
    pub dir: Dir,
    pub slot: u8,
}

impl Step {
    pub fn new(edge: impl Into<String>, dir: Dir, slot: u8) -> Self {
        Step { edge: edge.into(), dir, slot }
    }
}

pub type Walk = Vec<Step>;

pub fn reverse_walk(w: &Walk) -> Walk {
    w.iter().rev().map(|s| Step { edge: s.edge.clone(), dir: s.dir.rev(), slot: s.slot }).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    True,
    Bv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Singular,
    Arc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: Option<String>,
    pub to: Option<String>,
    pub flip: bool,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn singular(from: Option<&str>, to: Option<&str>) -> Self {
        Edge { from: from.map(String::from), to: to.map(String::from), flip: false, kind: EdgeKind::Singular }
    }

    pub fn is_circle(&self) -> bool {
        self.from.is_none()
    }

    pub fn end(&self, e: End) -> Option<&String> {
        match e {
            End::From => self.from.as_ref(),
            End::To => self.to.as_ref(),
        }
    }

    /// Slot monodromy around a circle edge.
    pub fn sigma(&self, s: u8) -> u8 {
        if self.flip {
            match s {
                0 => 1,
                1 => 0,
                x => x,
            }
        } else {
            s
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum End {
    From,
    To,
}

impl End {
    pub fn other(self) -> End {
        match self {
            End::From => End::To,
            End::To => End::From,
        }
    }
}

/// End of the step's edge where the step arrives.
pub fn head_end(s: &Step) -> End {
    match s.dir {
        Dir::Plus => End::To,
        Dir::Minus => End::From,
    }
}

pub fn tail_end(s: &Step) -> End {
    head_end(s).other()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Color {
    #[serde(rename = "i")]
    I,
    #[serde(rename = "e")]
    E,
    #[serde(rename = "f")]
    F,
}

impl Color {
    pub fn parse(s: &str) -> Option<Color> {
        match s {
            "i" => Some(Color::I),
            "e" => Some(Color::E),
            "f" => Some(Color::F),
            _ => None,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Color::I => "i",
            Color::E => "e",
            Color::F => "f",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub genus: u32,
    pub orientable: bool,
    pub walks: Vec<Walk>,
    pub gleam: Option<HalfInt>,
}

impl Region {
    pub fn disk(walk: Walk, gleam: Option<HalfInt>) -> Self {
        Region { genus: 0, orientable: true, walks: vec![walk], gleam }
    }

    pub fn chi(&self) -> i64 {
        let b = self.walks.len() as i64;
        if self.orientable {
            2 - 2 * self.genus as i64 - b
        } else {
            2 - self.genus as i64 - b
        }
    }

    pub fn is_disk(&self) -> bool {
        self.orientable && self.genus == 0 && self.walks.len() == 1
    }
}

/// A component of ∂P. A closed circle has the same id as its arc edge and no
/// boundary vertices; otherwise it is a trivalent graph through its BVs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryCircle {
    pub color: Color,
    pub arcs: Vec<String>,
    pub bvs: Vec<String>,
}

impl BoundaryCircle {
    pub fn is_closed_circle(&self) -> bool {
        self.bvs.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ShadowPolyhedron {
    pub name: String,
    pub nodes: BTreeMap<String, NodeKind>,
    pub edges: BTreeMap<String, Edge>,
    pub regions: BTreeMap<String, Region>,
    pub boundary: BTreeMap<String, BoundaryCircle>,
    pub branching: Option<Branching>,
}

/// Compare ids so that `e2 < e10`.
pub fn nat_cmp(a: &str, b: &str) -> Ordering {
    fn chunks(s: &str) -> Vec<(bool, &str)> {
        let mut out = Vec::new();
        let bytes = s.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let d = bytes[i].is_ascii_digit();
            let mut j = i;
            while j < bytes.len() && bytes[j].is_ascii_digit() == d {
                j += 1;
            }
            out.push((d, &s[i..j]));
            i = j;
        }
        out
    }
    let (ca, cb) = (chunks(a), chunks(b));
    for (x, y) in ca.iter().zip(cb.iter()) {
        let o = match (x.0, y.0) {
            (true, true) => {
                let (tx, ty) = (x.1.trim_start_matches('0'), y.1.trim_start_matches('0'));
                tx.len().cmp(&ty.len()).then(tx.cmp(ty)).then(x.1.len().cmp(&y.1.len()))
            }
            _ => x.1.cmp(y.1),
        };
        if o != Ordering::Equal {
            return o;
        }
    }
    ca.len().cmp(&cb.len())
}

pub fn nat_sorted<'a, I: IntoIterator<Item = &'a String>>(it: I) -> Vec<&'a String> {
    let mut v: Vec<&String> = it.into_iter().collect();
    v.sort_by(|a, b| nat_cmp(a, b));
    v
}

/// Smallest natural-order id `prefix<k>` not already taken.
pub fn fresh_id(prefix: &str, taken: &dyn Fn(&str) -> bool) -> String {
    let mut k = 1usize;
    loop {
        let id = format!("{prefix}{k}");
        if !taken(&id) {
            return id;
        }
        k += 1;
    }
}

// ---------------------------------------------------------------------------
// Link of a node

/// The link graph at a node: one vertex per incident edge end, one edge per
/// corner passage of a walk through the node.
#[derive(Clone, Debug)]
pub struct NodeLink {
    pub ends: Vec<(String, End)>,
    pub kinds: Vec<EdgeKind>,
    /// ((end index, slot), (end index, slot)) arrival → departure.
    pub passages: Vec<((usize, u8), (usize, u8))>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocalShape {
    K4,
    Tripod,
    Theta,
    Path,
    Empty,
    Illegal(String),
}

impl NodeLink {
    pub fn index(&self, edge: &str, end: End) -> Option<usize> {
        self.ends.iter().position(|(e, x)| e == edge && *x == end)
    }

    /// The passage through `(end, slot)`, as the other side.
    pub fn partner(&self, end: usize, slot: u8) -> Option<(usize, u8)> {
        for &(a, b) in &self.passages {
            if a == (end, slot) {
                return Some(b);
            }
            if b == (end, slot) {
                return Some(a);
            }
        }
        None
    }

    pub fn classify(&self) -> LocalShape {
        let n = self.ends.len();
        let sing = self.kinds.iter().filter(|k| **k == EdgeKind::Singular).count();
        let arcs = n - sing;
        if self.passages.iter().any(|(a, b)| a.0 == b.0) {
            return LocalShape::Illegal("a corner returns to the same edge end".into());
        }
        let mut pairs: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (a, b) in &self.passages {
            *pairs.entry((a.0.min(b.0), a.0.max(b.0))).or_default() += 1;
        }
        match (sing, arcs, self.passages.len()) {
            (0, 0, 0) => LocalShape::Empty,
            (4, 0, 6) if pairs.len() == 6 => LocalShape::K4,
            (1, 3, 3) => {
                let s = self.kinds.iter().position(|k| *k == EdgeKind::Singular).unwrap();
                let mut others = BTreeSet::new();
                for (a, b) in &self.passages {
                    if a.0 == s {
                        others.insert(b.0);
                    } else if b.0 == s {
                        others.insert(a.0);
                    }
                }
                if others.len() == 3 {
                    LocalShape::Tripod
                } else {
                    LocalShape::Illegal("boundary vertex link is not a tripod".into())
                }
            }
            (2, 0, 3) if pairs.len() == 1 => LocalShape::Theta,
            (0, 2, 1) => LocalShape::Path,
            _ => LocalShape::Illegal(format!(
                "{sing} singular ends, {arcs} boundary ends, {} corners",
                self.passages.len()
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LinkKind {
    #[serde(rename = "circle")]
    Circle,
    #[serde(rename = "theta")]
    Theta,
    #[serde(rename = "K4")]
    K4,
    #[serde(rename = "arc")]
    Arc,
    #[serde(rename = "boundary-vertex")]
    BoundaryVertex,
    #[serde(rename = "illegal")]
    Illegal,
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkKind::Circle => "circle",
            LinkKind::Theta => "θ",
            LinkKind::K4 => "K4",
            LinkKind::Arc => "arc",
            LinkKind::BoundaryVertex => "boundary-vertex",
            LinkKind::Illegal => "illegal",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
pub enum Violation {
    #[error("region {region} uses unknown edge {edge}")]
    UnknownEdge { region: String, edge: String },
    #[error("edge {edge} has no slot {slot}")]
    BadSlot { edge: String, slot: u8 },
    #[error("edge {edge} slot {slot} unfilled")]
    SlotUnfilled { edge: String, slot: u8 },
    #[error("edge {edge} slot {slot} doubly filled")]
    SlotDoubled { edge: String, slot: u8 },
    #[error("edge {edge} has {count} germs")]
    Germs { edge: String, count: usize },
    #[error("region {region} walk {walk} breaks after step {step}")]
    WalkBreak { region: String, walk: usize, step: usize },
    #[error("region {region} has an empty walk")]
    EmptyWalk { region: String },
    #[error("node {node}: {detail}")]
    BadLink { node: String, detail: String },
    #[error("node {node} declared {declared:?} but its link is {found}")]
    KindMismatch { node: String, declared: NodeKind, found: String },
    #[error("edge {edge} has a flip but is not a closed circle")]
    FlipOnNonCircle { edge: String },
    #[error("external region {region} carries a gleam")]
    GleamOnExternal { region: String },
    #[error("internal region {region} has no gleam")]
    MissingGleam { region: String },
    #[error("region {region} has a half-integer gleam but a two-sided neighbourhood")]
    HalfGleamTwoSided { region: String },
    #[error("non-orientable region {region} has genus 0")]
    BadGenus { region: String },
    #[error("boundary arc {edge} is not on a boundary component")]
    StrayArc { edge: String },
    #[error("boundary component {circle} is malformed: {detail}")]
    BadBoundary { circle: String, detail: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
    pub links: BTreeMap<String, LinkKind>,
}

impl ValidationReport {
    pub fn messages(&self) -> Vec<String> {
        self.violations.iter().map(|v| v.to_string()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Predicates {
    pub is_closed: bool,
    pub is_proper: bool,
    pub is_special: bool,
    pub is_almost_special: bool,
}

impl ShadowPolyhedron {
    pub fn new(name: impl Into<String>) -> Self {
        ShadowPolyhedron { name: name.into(), ..Default::default() }
    }

    pub fn edge(&self, id: &str) -> &Edge {
        &self.edges[id]
    }

    pub fn head_node(&self, s: &Step) -> Option<&String> {
        self.edges.get(&s.edge).and_then(|e| e.end(head_end(s)))
    }

    pub fn tail_node(&self, s: &Step) -> Option<&String> {
        self.edges.get(&s.edge).and_then(|e| e.end(tail_end(s)))
    }

    pub fn id_taken(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
            || self.edges.contains_key(id)
            || self.regions.contains_key(id)
            || self.boundary.contains_key(id)
    }

    pub fn fresh(&self, prefix: &str) -> String {
        fresh_id(prefix, &|s| self.id_taken(s))
    }

    /// (region, walk index, step index) for every step on every edge.
    pub fn germs(&self) -> BTreeMap<String, Vec<(String, usize, usize)>> {
        let mut out: BTreeMap<String, Vec<(String, usize, usize)>> = BTreeMap::new();
        for (r, reg) in &self.regions {
            for (wi, w) in reg.walks.iter().enumerate() {
                for (si, s) in w.iter().enumerate() {
                    out.entry(s.edge.clone()).or_default().push((r.clone(), wi, si));
                }
            }
        }
        out
    }

    pub fn is_internal(&self, region: &str) -> bool {
        self.regions[region]
            .walks
            .iter()
            .flatten()
            .all(|s| self.edges.get(&s.edge).is_none_or(|e| e.kind == EdgeKind::Singular))
    }

    /// Closed boundary circles lying in the closure of a region.
    pub fn free_boundary(&self, region: &str) -> Vec<String> {
        let mut out = BTreeSet::new();
        for s in self.regions[region].walks.iter().flatten() {
            for (c, bc) in &self.boundary {
                if bc.arcs.contains(&s.edge) {
                    out.insert(c.clone());
                }
            }
        }
        out.into_iter().collect()
    }

    /// Region holding the given closed boundary circle.
    pub fn region_of_circle(&self, circle: &str) -> Option<String> {
        self.regions
            .iter()
            .find(|(_, r)| r.walks.iter().flatten().any(|s| s.edge == circle))
            .map(|(k, _)| k.clone())
    }

    pub fn true_vertices(&self) -> Vec<&String> {
        nat_sorted(self.nodes.iter().filter(|(_, k)| **k == NodeKind::True).map(|(n, _)| n))
    }

    pub fn boundary_vertices(&self) -> Vec<&String> {
        nat_sorted(self.nodes.iter().filter(|(_, k)| **k == NodeKind::Bv).map(|(n, _)| n))
    }

    /// c(P) = |V(P)| + |BV(P)|.
    pub fn complexity_c(&self) -> usize {
        self.nodes.len()
    }

    pub fn singular_edges(&self) -> Vec<&String> {
        nat_sorted(self.edges.iter().filter(|(_, e)| e.kind == EdgeKind::Singular).map(|(k, _)| k))
    }

    pub fn vertexless_loops(&self) -> Vec<&String> {
        nat_sorted(
            self.edges.iter().filter(|(_, e)| e.kind == EdgeKind::Singular && e.is_circle()).map(|(k, _)| k),
        )
    }

    pub fn link_at(&self, node: &str) -> NodeLink {
        let mut ends = Vec::new();
        let mut kinds = Vec::new();
        for id in nat_sorted(self.edges.keys()) {
            let e = &self.edges[id];
            for x in [End::From, End::To] {
                if e.end(x).map(String::as_str) == Some(node) {
                    ends.push((id.clone(), x));
                    kinds.push(e.kind);
                }
            }
        }
        let mut link = NodeLink { ends, kinds, passages: Vec::new() };
        for reg in self.regions.values() {
            for w in &reg.walks {
                for i in 0..w.len() {
                    let a = &w[i];
                    let b = &w[(i + 1) % w.len()];
                    let (Some(ea), Some(eb)) = (self.edges.get(&a.edge), self.edges.get(&b.edge)) else {
                        continue;
                    };
                    if ea.end(head_end(a)).map(String::as_str) != Some(node)
                        || eb.end(tail_end(b)).map(String::as_str) != Some(node)
                    {
                        continue;
                    }
                    let (Some(ia), Some(ib)) = (link.index(&a.edge, head_end(a)), link.index(&b.edge, tail_end(b)))
                    else {
                        continue;
                    };
                    link.passages.push(((ia, a.slot), (ib, b.slot)));
                }
            }
        }
        link
    }

    /// Parity of normal-label monodromy along the region's walks: true when
    /// the annular neighbourhood of the attaching curves is one-sided. None if
    /// some passage is through a boundary vertex or a malformed link.
    pub fn one_sided(&self, region: &str) -> Option<bool> {
        let reg = self.regions.get(region)?;
        let mut links: BTreeMap<String, NodeLink> = BTreeMap::new();
        let mut parity = false;
        for w in &reg.walks {
            if w.is_empty() {
                continue;
            }
            let first = &w[0];
            let t0 = (0..3u8).find(|t| *t != first.slot)?;
            let mut t = t0;
            for i in 0..w.len() {
                let a = &w[i];
                let b = &w[(i + 1) % w.len()];
                let ea = self.edges.get(&a.edge)?;
                if ea.kind != EdgeKind::Singular {
                    return None;
                }
                if ea.is_circle() {
                    t = ea.sigma(t);
                    continue;
                }
                let node = ea.end(head_end(a))?.clone();
                let link = links.entry(node.clone()).or_insert_with(|| self.link_at(&node));
                let p = link.index(&a.edge, head_end(a))?;
                let q = link.index(&b.edge, tail_end(b))?;
                let (r, _) = link.partner(p, t)?;
                let mut next = None;
                for s in 0..3u8 {
                    if s == b.slot {
                        continue;
                    }
                    if let Some((o, _)) = link.partner(q, s) {
                        if o == r {
                            next = Some(s);
                        }
                    }
                }
                t = next?;
            }
            if t != t0 {
                parity = !parity;
            }
        }
        Some(parity)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        let mut links = BTreeMap::new();
        // slots
        let mut occ: BTreeMap<&str, BTreeMap<u8, usize>> = BTreeMap::new();
        for (r, reg) in &self.regions {
            for (wi, w) in reg.walks.iter().enumerate() {
                if w.is_empty() {
                    v.push(Violation::EmptyWalk { region: r.clone() });
                }
                for s in w {
                    match self.edges.get(&s.edge) {
                        None => v.push(Violation::UnknownEdge { region: r.clone(), edge: s.edge.clone() }),
                        Some(e) => {
                            let max = if e.kind == EdgeKind::Arc { 0 } else { 2 };
                            if s.slot > max {
                                v.push(Violation::BadSlot { edge: s.edge.clone(), slot: s.slot });
                            } else {
                                *occ.entry(s.edge.as_str()).or_default().entry(s.slot).or_default() += 1;
                            }
                        }
                    }
                }
                // continuity
                for i in 0..w.len() {
                    let a = &w[i];
                    let b = &w[(i + 1) % w.len()];
                    let (Some(ea), Some(eb)) = (self.edges.get(&a.edge), self.edges.get(&b.edge)) else {
                        continue;
                    };
                    let ok = if ea.is_circle() {
                        b.edge == a.edge && b.dir == a.dir && b.slot == ea.sigma(a.slot)
                    } else {
                        !eb.is_circle() && ea.end(head_end(a)) == eb.end(tail_end(b))
                    };
                    if !ok {
                        v.push(Violation::WalkBreak { region: r.clone(), walk: wi, step: i });
                    }
                }
            }
            if !reg.orientable && reg.genus == 0 {
                v.push(Violation::BadGenus { region: r.clone() });
            }
        }
        for (id, e) in &self.edges {
            if e.flip && !e.is_circle() {
                v.push(Violation::FlipOnNonCircle { edge: id.clone() });
            }
            let o = occ.get(id.as_str()).cloned().unwrap_or_default();
            let slots: &[u8] = if e.kind == EdgeKind::Arc { &[0] } else { &[0, 1, 2] };
            let filled = o.values().filter(|c| **c > 0).count();
            if e.kind == EdgeKind::Singular && filled != 3 {
                v.push(Violation::Germs { edge: id.clone(), count: filled });
            }
            for s in slots {
                match o.get(s).copied().unwrap_or(0) {
                    0 => v.push(Violation::SlotUnfilled { edge: id.clone(), slot: *s }),
                    1 => {}
                    _ => v.push(Violation::SlotDoubled { edge: id.clone(), slot: *s }),
                }
            }
            let kind = match e.kind {
                EdgeKind::Singular => LinkKind::Theta,
                EdgeKind::Arc => LinkKind::Arc,
            };
            let key = if e.is_circle() { format!("circle-edge {id}") } else { format!("edge {id}") };
            links.insert(key, kind);
            if e.kind == EdgeKind::Arc && !self.boundary.values().any(|b| b.arcs.contains(id)) {
                v.push(Violation::StrayArc { edge: id.clone() });
            }
        }
        for (c, bc) in &self.boundary {
            if bc.is_closed_circle() {
                let ok = bc.arcs.len() == 1
                    && bc.arcs[0] == *c
                    && self.edges.get(c).is_some_and(|e| e.is_circle() && e.kind == EdgeKind::Arc);
                if !ok {
                    v.push(Violation::BadBoundary { circle: c.clone(), detail: "not a closed arc".into() });
                }
            } else {
                for b in &bc.bvs {
                    if self.nodes.get(b) != Some(&NodeKind::Bv) {
                        v.push(Violation::BadBoundary { circle: c.clone(), detail: format!("{b} is not a boundary vertex") });
                    }
                }
            }
        }
        for (n, kind) in &self.nodes {
            let link = self.link_at(n);
            let shape = link.classify();
            let lk = match (&shape, kind) {
                (LocalShape::K4, NodeKind::True) => LinkKind::K4,
                (LocalShape::Tripod, NodeKind::Bv) => LinkKind::BoundaryVertex,
                (LocalShape::Illegal(d), _) => {
                    v.push(Violation::BadLink { node: n.clone(), detail: d.clone() });
                    LinkKind::Illegal
                }
                (s, k) => {
                    v.push(Violation::KindMismatch { node: n.clone(), declared: *k, found: format!("{s:?}") });
                    LinkKind::Illegal
                }
            };
            links.insert(format!("node {n}"), lk);
        }
        for (r, reg) in &self.regions {
            links.insert(format!("region {r}"), LinkKind::Circle);
            let internal = self.is_internal(r);
            match (internal, reg.gleam) {
                (true, None) => v.push(Violation::MissingGleam { region: r.clone() }),
                (false, Some(_)) => v.push(Violation::GleamOnExternal { region: r.clone() }),
                (true, Some(g)) if !g.is_integer()
                    && self.one_sided(r) != Some(true) => {
                        v.push(Violation::HalfGleamTwoSided { region: r.clone() });
                    }
                _ => {}
            }
        }
        ValidationReport { valid: v.is_empty(), violations: v, links }
    }

    pub fn is_valid(&self) -> bool {
        self.validate().valid
    }

    /// χ from the cell structure: nodes − edges with endpoints + Σ χ(region).
    pub fn euler_characteristic(&self) -> i64 {
        let nodes = self.nodes.len() as i64;
        let edges = self.edges.values().filter(|e| !e.is_circle()).count() as i64;
        nodes - edges + self.regions.values().map(Region::chi).sum::<i64>()
    }

    /// χ of the CW complex used for π₁: virtual 0-cells on circles and on
    /// walk-free regions, connecting arcs between walks, handle loops.
    pub fn euler_characteristic_cw(&self) -> i64 {
        let sk = self.skeleton();
        sk.vertices as i64 - sk.cells.len() as i64 + self.regions.len() as i64
    }

    pub fn predicates(&self) -> Predicates {
        let valid = self.is_valid();
        let is_closed = self.boundary.is_empty();
        let is_proper = !self.boundary.values().any(|b| b.color == Color::F);
        let has_singular = self.edges.values().any(|e| e.kind == EdgeKind::Singular);
        let is_special = valid
            && is_closed
            && has_singular
            && self.vertexless_loops().is_empty()
            && self.regions.values().all(Region::is_disk);
        Predicates { is_closed, is_proper, is_special, is_almost_special: valid }
    }

    // -----------------------------------------------------------------------
    // CW 1-skeleton

    pub fn skeleton(&self) -> Skeleton {
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        for n in nat_sorted(self.nodes.keys()) {
            let k = index.len();
            index.insert(n.clone(), k);
        }
        let mut vertices = index.len();
        let mut circle_vertex: BTreeMap<String, usize> = BTreeMap::new();
        let mut cells = Vec::new();
        let mut edge_cell = BTreeMap::new();
        for id in nat_sorted(self.edges.keys()) {
            let e = &self.edges[id];
            let (a, b) = if e.is_circle() {
                let v = vertices;
                vertices += 1;
                circle_vertex.insert(id.clone(), v);
                (v, v)
            } else {
                (index[e.from.as_ref().unwrap()], index[e.to.as_ref().unwrap()])
            };
            edge_cell.insert(id.clone(), cells.len());
            cells.push(Cell { a, b, label: CellLabel::Edge(id.clone()) });
        }
        let mut region_cells = BTreeMap::new();
        for r in nat_sorted(self.regions.keys()) {
            let reg = &self.regions[r];
            let base_of = |w: &Walk| -> usize {
                let s = &w[0];
                let e = &self.edges[&s.edge];
                if e.is_circle() {
                    circle_vertex[&s.edge]
                } else {
                    index[e.end(tail_end(s)).unwrap()]
                }
            };
            let base = if reg.walks.is_empty() {
                let v = vertices;
                vertices += 1;
                v
            } else {
                base_of(&reg.walks[0])
            };
            let mut tarcs = Vec::new();
            for w in reg.walks.iter().skip(1) {
                tarcs.push(cells.len());
                cells.push(Cell { a: base, b: base_of(w), label: CellLabel::Tether(r.clone()) });
            }
            let handles = if reg.orientable { 2 * reg.genus } else { reg.genus } as usize;
            let mut hs = Vec::new();
            for _ in 0..handles {
                hs.push(cells.len());
                cells.push(Cell { a: base, b: base, label: CellLabel::Handle(r.clone()) });
            }
            region_cells.insert(r.clone(), (tarcs, hs));
        }
        Skeleton { vertices, cells, edge_cell, region_cells }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CellLabel {
    Edge(String),
    Tether(String),
    Handle(String),
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub a: usize,
    pub b: usize,
    pub label: CellLabel,
}

/// 1-skeleton of the CW structure: graph cells plus per-region tethers and
/// handle loops.
#[derive(Clone, Debug)]
pub struct Skeleton {
    pub vertices: usize,
    pub cells: Vec<Cell>,
    pub edge_cell: BTreeMap<String, usize>,
    /// region → (tether cells for walks 1.., handle loop cells)
    pub region_cells: BTreeMap<String, (Vec<usize>, Vec<usize>)>,
}

// ---------------------------------------------------------------------------
// Text format

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: undeclared id `{id}`")]
    Undeclared { line: usize, id: String },
    #[error("line {line}: duplicate id `{id}`")]
    Duplicate { line: usize, id: String },
    #[error("node `{node}` has degree {degree}, expected {expected}")]
    IllegalDegree { node: String, degree: usize, expected: usize },
}

struct Tok<'a> {
    s: &'a str,
    col: usize,
}

fn tokens(line: &str) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Tok { s: &line[s..i], col: s + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Tok { s: &line[s..], col: s + 1 });
    }
    out
}

fn syn(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, col, msg: msg.into() }
}

pub fn parse_polyhedron(text: &str) -> Result<ShadowPolyhedron, ParseError> {
    let mut p = ShadowPolyhedron::new("unnamed");
    let mut node_line = BTreeMap::new();
    let mut edge_line: BTreeMap<String, usize> = BTreeMap::new();
    let mut region_order: Vec<(String, usize)> = Vec::new();
    let mut walk_lines: BTreeMap<String, Vec<(usize, Vec<(String, usize, usize)>)>> = BTreeMap::new();
    let mut closed: Vec<(String, Color, Option<String>, usize)> = Vec::new();
    let mut bv_comps: Vec<(String, Color, Vec<String>, usize)> = Vec::new();
    let mut barcs: Vec<(String, String, String, usize)> = Vec::new();
    let mut branching: Vec<(String, Dir, usize)> = Vec::new();
    let mut current: Option<String> = None;
    let mut named = false;

    for (li, raw) in text.lines().enumerate() {
        let line = li + 1;
        let body = raw.split('#').next().unwrap_or("");
        let t = tokens(body);
        if t.is_empty() {
            continue;
        }
        let indented = body.starts_with(' ') || body.starts_with('\t');
        let need = |n: usize| -> Result<(), ParseError> {
            if t.len() < n {
                Err(syn(line, body.len() + 1, format!("`{}` needs {} fields", t[0].s, n - 1)))
            } else {
                Ok(())
            }
        };
        match t[0].s {
            "walk" => {
                if !indented {
                    return Err(syn(line, 1, "walk lines must be indented under a region"));
                }
                let Some(r) = current.clone() else {
                    return Err(syn(line, t[0].col, "walk outside of a region"));
                };
                let rest = &t[1..];
                if rest.is_empty() || !rest.len().is_multiple_of(3) {
                    return Err(syn(line, t[0].col, "walk needs (edge dir slot) triples"));
                }
                let mut steps = Vec::new();
                for c in rest.chunks(3) {
                    if Dir::parse(c[1].s).is_none() {
                        return Err(syn(line, c[1].col, format!("bad direction `{}`", c[1].s)));
                    }
                    let slot: u8 = c[2].s.parse().map_err(|_| syn(line, c[2].col, "bad slot"))?;
                    if slot > 2 {
                        return Err(syn(line, c[2].col, "slot must be 0, 1 or 2"));
                    }
                    steps.push((format!("{} {}", c[0].s, c[1].s), slot as usize, c[0].col));
                }
                walk_lines.entry(r).or_default().push((line, steps));
            }
            _ if indented => return Err(syn(line, t[0].col, format!("unexpected indented `{}`", t[0].s))),
            "polyhedron" => {
                need(2)?;
                if named {
                    return Err(syn(line, 1, "second polyhedron header"));
                }
                named = true;
                p.name = t[1..].iter().map(|x| x.s).collect::<Vec<_>>().join(" ");
            }
            "vertex" => {
                need(3)?;
                let kind = match t[2].s {
                    "true" => NodeKind::True,
                    "bv" => NodeKind::Bv,
                    o => return Err(syn(line, t[2].col, format!("unknown vertex kind `{o}`"))),
                };
                if p.nodes.insert(t[1].s.to_string(), kind).is_some() {
                    return Err(ParseError::Duplicate { line, id: t[1].s.into() });
                }
                node_line.insert(t[1].s.to_string(), line);
            }
            "edge" => {
                need(4)?;
                let id = t[1].s.to_string();
                let end = |x: &Tok| if x.s == "-" { None } else { Some(x.s.to_string()) };
                let (from, to) = (end(&t[2]), end(&t[3]));
                if from.is_some() != to.is_some() {
                    return Err(syn(line, t[2].col, "an edge is either closed (- -) or has two endpoints"));
                }
                let flip = match t.get(4).map(|x| x.s) {
                    None => false,
                    Some("flip") => true,
                    Some(o) => return Err(syn(line, t[4].col, format!("unexpected `{o}`"))),
                };
                if flip && from.is_some() {
                    return Err(syn(line, t[4].col, "flip is only allowed on closed circle edges"));
                }
                if edge_line.insert(id.clone(), line).is_some() {
                    return Err(ParseError::Duplicate { line, id });
                }
                p.edges.insert(id, Edge { from, to, flip, kind: EdgeKind::Singular });
            }
            "region" => {
                need(5)?;
                let id = t[1].s.to_string();
                if t[2].s != "genus" {
                    return Err(syn(line, t[2].col, "expected `genus`"));
                }
                let genus: u32 = t[3].s.parse().map_err(|_| syn(line, t[3].col, "bad genus"))?;
                let mut i = 4;
                let mut orientable = true;
                if t[i].s == "nonor" {
                    orientable = false;
                    i += 1;
                }
                if t.get(i).map(|x| x.s) != Some("gleam") || t.len() != i + 2 {
                    return Err(syn(line, t.get(i).map_or(body.len() + 1, |x| x.col), "expected `gleam <n>/2|none`"));
                }
                let gleam = if t[i + 1].s == "none" {
                    None
                } else {
                    Some(HalfInt::parse(t[i + 1].s).ok_or_else(|| syn(line, t[i + 1].col, "bad gleam"))?)
                };
                if p.regions.contains_key(&id) {
                    return Err(ParseError::Duplicate { line, id });
                }
                p.regions.insert(id.clone(), Region { genus, orientable, walks: Vec::new(), gleam });
                region_order.push((id.clone(), line));
                current = Some(id);
            }
            "bcircle" => {
                need(4)?;
                if t[2].s != "color" {
                    return Err(syn(line, t[2].col, "expected `color`"));
                }
                let color = Color::parse(t[3].s).ok_or_else(|| syn(line, t[3].col, "color must be i, e or f"))?;
                let id = t[1].s.to_string();
                match t.get(4).map(|x| x.s) {
                    Some("region") => {
                        if t.len() != 6 {
                            return Err(syn(line, t[4].col, "expected `region <id>`"));
                        }
                        let r = if t[5].s == "-" { None } else { Some(t[5].s.to_string()) };
                        closed.push((id, color, r, line));
                    }
                    Some("bv") => {
                        let bvs: Vec<String> = t[5..].iter().map(|x| x.s.to_string()).collect();
                        if bvs.is_empty() {
                            return Err(syn(line, t[4].col, "`bv` needs at least one vertex"));
                        }
                        bv_comps.push((id, color, bvs, line));
                    }
                    _ => return Err(syn(line, t.get(4).map_or(body.len() + 1, |x| x.col), "expected `region` or `bv`")),
                }
            }
            "barc" => {
                need(4)?;
                if t.len() != 4 {
                    return Err(syn(line, t[4].col, "barc takes an id and two boundary vertices"));
                }
                barcs.push((t[1].s.into(), t[2].s.into(), t[3].s.into(), line));
            }
            "branching" => {
                need(3)?;
                let d = Dir::parse(t[2].s).ok_or_else(|| syn(line, t[2].col, "sign must be + or -"))?;
                branching.push((t[1].s.into(), d, line));
            }
            o => return Err(syn(line, t[0].col, format!("unknown keyword `{o}`"))),
        }
    }

    // boundary components
    let mut bv_owner: BTreeMap<String, String> = BTreeMap::new();
    for (id, color, bvs, line) in &bv_comps {
        if p.boundary.contains_key(id) || p.edges.contains_key(id) {
            return Err(ParseError::Duplicate { line: *line, id: id.clone() });
        }
        for b in bvs {
            match p.nodes.get(b) {
                None => return Err(ParseError::Undeclared { line: *line, id: b.clone() }),
                Some(NodeKind::True) => return Err(syn(*line, 1, format!("{b} is not a boundary vertex"))),
                _ => {}
            }
            if bv_owner.insert(b.clone(), id.clone()).is_some() {
                return Err(ParseError::Duplicate { line: *line, id: b.clone() });
            }
        }
        p.boundary.insert(id.clone(), BoundaryCircle { color: *color, arcs: Vec::new(), bvs: bvs.clone() });
    }
    for (id, a, b, line) in &barcs {
        if edge_line.contains_key(id) || p.boundary.contains_key(id) {
            return Err(ParseError::Duplicate { line: *line, id: id.clone() });
        }
        let ca = bv_owner.get(a).ok_or_else(|| ParseError::Undeclared { line: *line, id: a.clone() })?;
        let cb = bv_owner.get(b).ok_or_else(|| ParseError::Undeclared { line: *line, id: b.clone() })?;
        if ca != cb {
            return Err(syn(*line, 1, format!("arc {id} joins two boundary components")));
        }
        p.boundary.get_mut(ca).unwrap().arcs.push(id.clone());
        edge_line.insert(id.clone(), *line);
        p.edges.insert(id.clone(), Edge { from: Some(a.clone()), to: Some(b.clone()), flip: false, kind: EdgeKind::Arc });
    }
    for c in p.boundary.values_mut() {
        c.arcs.sort_by(|a, b| nat_cmp(a, b));
    }
    for (id, _, _, line) in &closed {
        if edge_line.contains_key(id) || p.boundary.contains_key(id) {
            return Err(ParseError::Duplicate { line: *line, id: id.clone() });
        }
        edge_line.insert(id.clone(), *line);
    }
    // edges reference nodes
    for (id, e) in &p.edges {
        for n in [&e.from, &e.to].into_iter().flatten() {
            if !p.nodes.contains_key(n) {
                return Err(ParseError::Undeclared { line: edge_line[id], id: n.clone() });
            }
        }
    }
    // walks
    for (r, ws) in walk_lines {
        for (line, steps) in ws {
            let mut walk = Vec::new();
            for (key, slot, col) in steps {
                let (e, d) = key.split_once(' ').unwrap();
                let closed_ref = closed.iter().any(|c| c.0 == e);
                if !p.edges.contains_key(e) && !closed_ref {
                    return Err(ParseError::Undeclared { line, id: e.into() });
                }
                let _ = col;
                walk.push(Step::new(e, Dir::parse(d).unwrap(), slot as u8));
            }
            p.regions.get_mut(&r).unwrap().walks.push(walk);
        }
    }
    closed.sort_by(|a, b| nat_cmp(&a.0, &b.0));
    for (id, color, r, line) in closed {
        p.edges.insert(id.clone(), Edge { from: None, to: None, flip: false, kind: EdgeKind::Arc });
        p.boundary.insert(id.clone(), BoundaryCircle { color, arcs: vec![id.clone()], bvs: Vec::new() });
        if let Some(r) = r {
            let reg = p.regions.get_mut(&r).ok_or(ParseError::Undeclared { line, id: r.clone() })?;
            reg.walks.push(vec![Step::new(id, Dir::Plus, 0)]);
        }
    }
    // degrees
    for (n, kind) in &p.nodes {
        let deg = p
            .edges
            .values()
            .filter(|e| e.kind == EdgeKind::Singular)
            .map(|e| (e.from.as_ref() == Some(n)) as usize + (e.to.as_ref() == Some(n)) as usize)
            .sum::<usize>();
        let expected = match kind {
            NodeKind::True => 4,
            NodeKind::Bv => 1,
        };
        if deg != expected {
            return Err(ParseError::IllegalDegree { node: n.clone(), degree: deg, expected });
        }
        if *kind == NodeKind::Bv && !bv_owner.contains_key(n) {
            return Err(syn(node_line[n], 1, format!("boundary vertex {n} lies on no bcircle")));
        }
    }
    if !branching.is_empty() {
        let mut b = Branching::default();
        for (r, d, line) in branching {
            if !p.regions.contains_key(&r) {
                return Err(ParseError::Undeclared { line, id: r });
            }
            if b.orientation.insert(r.clone(), d).is_some() {
                return Err(ParseError::Duplicate { line, id: r });
            }
        }
        p.branching = Some(b);
    }
    let _ = region_order;
    Ok(p)
}

impl ShadowPolyhedron {
    fn implicit_walk(&self, w: &Walk) -> bool {
        w.len() == 1
            && w[0].dir == Dir::Plus
            && w[0].slot == 0
            && self.boundary.get(&w[0].edge).is_some_and(|b| b.is_closed_circle())
    }

    pub fn to_asp(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("polyhedron {}\n", self.name));
        for n in nat_sorted(self.nodes.keys()) {
            let k = match self.nodes[n] {
                NodeKind::True => "true",
                NodeKind::Bv => "bv",
            };
            out.push_str(&format!("vertex {n} {k}\n"));
        }
        for id in nat_sorted(self.edges.keys()) {
            let e = &self.edges[id];
            if e.kind == EdgeKind::Arc {
                continue;
            }
            let f = e.from.as_deref().unwrap_or("-");
            let t = e.to.as_deref().unwrap_or("-");
            out.push_str(&format!("edge {id} {f} {t}{}\n", if e.flip { " flip" } else { "" }));
        }
        for r in nat_sorted(self.regions.keys()) {
            let reg = &self.regions[r];
            let g = reg.gleam.map_or("none".to_string(), |g| g.to_string());
            let nonor = if reg.orientable { "" } else { " nonor" };
            out.push_str(&format!("region {r} genus {}{nonor} gleam {g}\n", reg.genus));
            for w in &reg.walks {
                if self.implicit_walk(w) {
                    continue;
                }
                let steps: Vec<String> = w.iter().map(|s| format!("{} {} {}", s.edge, s.dir, s.slot)).collect();
                out.push_str(&format!("  walk {}\n", steps.join(" ")));
            }
        }
        for c in nat_sorted(self.boundary.keys()) {
            let bc = &self.boundary[c];
            if bc.is_closed_circle() {
                let r = self
                    .regions
                    .iter()
                    .find(|(_, reg)| reg.walks.iter().any(|w| self.implicit_walk(w) && w[0].edge == *c))
                    .map_or("-".to_string(), |(k, _)| k.clone());
                out.push_str(&format!("bcircle {c} color {} region {r}\n", bc.color));
            } else {
                let bvs: Vec<&String> = nat_sorted(bc.bvs.iter());
                let bvs: Vec<&str> = bvs.iter().map(|s| s.as_str()).collect();
                out.push_str(&format!("bcircle {c} color {} bv {}\n", bc.color, bvs.join(" ")));
                for a in nat_sorted(bc.arcs.iter()) {
                    let e = &self.edges[a];
                    out.push_str(&format!("barc {a} {} {}\n", e.from.as_deref().unwrap(), e.to.as_deref().unwrap()));
                }
            }
        }
        if let Some(b) = &self.branching {
            for r in nat_sorted(b.orientation.keys()) {
                out.push_str(&format!("branching {r} {}\n", b.orientation[r]));
            }
        }
        out
    }

    /// Renumber ids by breadth-first search from the smallest node, rotate
    /// walks to their least step and sort them.
    pub fn canonicalize(&self) -> ShadowPolyhedron {
        let mut node_map: BTreeMap<String, String> = BTreeMap::new();
        let mut edge_order: Vec<String> = Vec::new();
        let mut seen_edges: BTreeSet<String> = BTreeSet::new();
        let incident = |n: &str| -> Vec<String> {
            nat_sorted(self.edges.keys())
                .into_iter()
                .filter(|id| {
                    let e = &self.edges[*id];
                    e.from.as_deref() == Some(n) || e.to.as_deref() == Some(n)
                })
                .cloned()
                .collect()
        };
        for start in nat_sorted(self.nodes.keys()) {
            if node_map.contains_key(start) {
                continue;
            }
            let mut q = VecDeque::from([start.clone()]);
            node_map.insert(start.clone(), format!("v{}", node_map.len()));
            while let Some(n) = q.pop_front() {
                for id in incident(&n) {
                    if seen_edges.insert(id.clone()) {
                        edge_order.push(id.clone());
                    }
                    let e = &self.edges[&id];
                    for m in [&e.from, &e.to].into_iter().flatten() {
                        if !node_map.contains_key(m) {
                            node_map.insert(m.clone(), format!("v{}", node_map.len()));
                            q.push_back(m.clone());
                        }
                    }
                }
            }
        }
        for id in nat_sorted(self.edges.keys()) {
            if seen_edges.insert(id.clone()) {
                edge_order.push(id.clone());
            }
        }
        let mut edge_map: BTreeMap<String, String> = BTreeMap::new();
        let (mut ne, mut nb) = (0, 0);
        for id in &edge_order {
            let name = if self.edges[id].kind == EdgeKind::Singular {
                ne += 1;
                format!("e{}", ne - 1)
            } else {
                nb += 1;
                format!("b{}", nb - 1)
            };
            edge_map.insert(id.clone(), name);
        }
        let germs = self.germs();
        let mut region_map: BTreeMap<String, String> = BTreeMap::new();
        for id in &edge_order {
            let mut gs = germs.get(id).cloned().unwrap_or_default();
            gs.sort_by_key(|(r, wi, si)| self.regions[r].walks[*wi][*si].slot);
            for (r, _, _) in gs {
                if !region_map.contains_key(&r) {
                    region_map.insert(r.clone(), format!("r{}", region_map.len()));
                }
            }
        }
        for r in nat_sorted(self.regions.keys()) {
            if !region_map.contains_key(r) {
                region_map.insert(r.clone(), format!("r{}", region_map.len()));
            }
        }
        let mut out = ShadowPolyhedron::new(self.name.clone());
        for (n, k) in &self.nodes {
            out.nodes.insert(node_map[n].clone(), *k);
        }
        for (id, e) in &self.edges {
            out.edges.insert(
                edge_map[id].clone(),
                Edge {
                    from: e.from.as_ref().map(|n| node_map[n].clone()),
                    to: e.to.as_ref().map(|n| node_map[n].clone()),
                    flip: e.flip,
                    kind: e.kind,
                },
            );
        }
        let mut nh = 0;
        for c in nat_sorted(self.boundary.keys()) {
            let bc = &self.boundary[c];
            let id = if bc.is_closed_circle() {
                edge_map[c].clone()
            } else {
                nh += 1;
                format!("h{}", nh - 1)
            };
            let mut arcs: Vec<String> = bc.arcs.iter().map(|a| edge_map[a].clone()).collect();
            arcs.sort_by(|a, b| nat_cmp(a, b));
            let mut bvs: Vec<String> = bc.bvs.iter().map(|b| node_map[b].clone()).collect();
            bvs.sort_by(|a, b| nat_cmp(a, b));
            out.boundary.insert(id, BoundaryCircle { color: bc.color, arcs, bvs });
        }
        for (r, reg) in &self.regions {
            let mut walks: Vec<Walk> = reg
                .walks
                .iter()
                .map(|w| {
                    let w: Walk = w.iter().map(|s| Step::new(edge_map[&s.edge].clone(), s.dir, s.slot)).collect();
                    min_rotation(&w)
                })
                .collect();
            out.regions.insert(region_map[r].clone(), Region { walks: Vec::new(), ..reg.clone() });
            walks.sort_by_key(walk_key);
            out.regions.get_mut(&region_map[r]).unwrap().walks = walks;
        }
        // implicit circle walks go last, in circle order, as the parser rebuilds them
        let implicit: Vec<(String, Walk)> = out
            .regions
            .iter()
            .flat_map(|(r, reg)| reg.walks.iter().filter(|w| out.implicit_walk(w)).map(move |w| (r.clone(), w.clone())))
            .collect();
        for (r, w) in &implicit {
            let reg = out.regions.get_mut(r).unwrap();
            reg.walks.retain(|x| x != w);
        }
        let mut implicit = implicit;
        implicit.sort_by(|a, b| nat_cmp(&a.1[0].edge, &b.1[0].edge));
        for (r, w) in implicit {
            out.regions.get_mut(&r).unwrap().walks.push(w);
        }
        out.branching = self.branching.as_ref().map(|b| Branching {
            orientation: b.orientation.iter().map(|(r, d)| (region_map[r].clone(), *d)).collect(),
        });
        out
    }
}

fn step_key(s: &Step) -> (NatKey, Dir, u8) {
    (NatKey(s.edge.clone()), s.dir, s.slot)
}

fn walk_key(w: &Walk) -> Vec<(NatKey, Dir, u8)> {
    w.iter().map(step_key).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct NatKey(String);

impl PartialOrd for NatKey {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for NatKey {
    fn cmp(&self, o: &Self) -> Ordering {
        nat_cmp(&self.0, &o.0)
    }
}

fn min_rotation(w: &Walk) -> Walk {
    (0..w.len())
        .map(|i| w[i..].iter().chain(w[..i].iter()).cloned().collect::<Walk>())
        .min_by(|a, b| walk_key(a).cmp(&walk_key(b)))
        .unwrap_or_default()
}

impl fmt::Display for ShadowPolyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_asp())
    }
}
