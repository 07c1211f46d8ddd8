//! Oriented link diagrams on the sphere: PD codes, closed braids, faces,
//! Seifert circles and admissibility of a punctured face.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::poly::Dir;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("malformed code: {0}")]
    Malformed(String),
    #[error("gluing is not planar: V - E + F = {0}")]
    NonPlanar(i64),
    #[error("no face makes the diagram admissible")]
    NotAchievable,
}

/// Positions 0..4 run counterclockwise from the incoming under-strand; the
/// over-strand enters at `over_in` (1 or 3).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Crossing {
    pub ends: [usize; 4],
    pub over_in: u8,
}

impl Crossing {
    pub fn sign(&self) -> i8 {
        if self.over_in == 3 {
            1
        } else {
            -1
        }
    }

    pub fn is_in(&self, p: u8) -> bool {
        p == 0 || p == self.over_in
    }

    /// The strand continues straight through the crossing.
    pub fn straight(p: u8) -> u8 {
        (p + 2) % 4
    }

    /// Oriented smoothing: the outgoing position joined to incoming `p`.
    pub fn smooth(&self, p: u8) -> u8 {
        let next = (p + 1) % 4;
        if self.is_in(next) {
            (p + 3) % 4
        } else {
            next
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiagramEdge {
    pub label: i64,
    /// (crossing, position) where the edge leaves / arrives; None on a
    /// crossingless circle.
    pub tail: Option<(usize, u8)>,
    pub head: Option<(usize, u8)>,
}

/// A face is traced with itself on the left of every dart; `corners[i]` is
/// the corner (crossing, k) between positions k and k+1 entered after
/// `darts[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Face {
    pub darts: Vec<(usize, Dir)>,
    pub corners: Vec<(usize, u8)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrientedLinkDiagram {
    pub crossings: Vec<Crossing>,
    pub edges: Vec<DiagramEdge>,
    pub components: Vec<Vec<usize>>,
    pub faces: Vec<Face>,
    pub outer_face: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeifertCircleSet {
    /// Each circle as its edges in order.
    pub circles: Vec<Vec<usize>>,
}

impl OrientedLinkDiagram {
    pub fn crossing_number(&self) -> usize {
        self.crossings.len()
    }

    fn from_crossings(crossings: Vec<Crossing>, labels: Vec<i64>) -> Result<Self, DiagramError> {
        let mut edges: Vec<DiagramEdge> =
            labels.iter().map(|l| DiagramEdge { label: *l, tail: None, head: None }).collect();
        for (c, x) in crossings.iter().enumerate() {
            for p in 0..4u8 {
                let e = &mut edges[x.ends[p as usize]];
                let slot = if x.is_in(p) { &mut e.head } else { &mut e.tail };
                if slot.is_some() {
                    return Err(DiagramError::Malformed(format!("edge {} is inconsistently oriented", e.label)));
                }
                *slot = Some((c, p));
            }
        }
        if !crossings.is_empty() && edges.iter().any(|e| e.tail.is_none() || e.head.is_none()) {
            return Err(DiagramError::Malformed("an edge does not join two crossing positions".into()));
        }
        let mut d = OrientedLinkDiagram { crossings, edges, components: Vec::new(), faces: Vec::new(), outer_face: None };
        d.components = d.trace_components();
        d.faces = d.trace_faces();
        let (v, e, f) = (d.crossings.len() as i64, d.edges.len() as i64, d.faces.len() as i64);
        if v - e + f != 2 {
            return Err(DiagramError::NonPlanar(v - e + f));
        }
        Ok(d)
    }

    pub fn unknot() -> Self {
        let edges = vec![DiagramEdge { label: 1, tail: None, head: None }];
        let faces = vec![
            Face { darts: vec![(0, Dir::Plus)], corners: vec![] },
            Face { darts: vec![(0, Dir::Minus)], corners: vec![] },
        ];
        OrientedLinkDiagram { crossings: Vec::new(), edges, components: vec![vec![0]], faces, outer_face: None }
    }

    fn trace_components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.edges.len()];
        let mut out = Vec::new();
        for start in 0..self.edges.len() {
            if seen[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut e = start;
            loop {
                seen[e] = true;
                comp.push(e);
                let Some((c, p)) = self.edges[e].head else { break };
                e = self.crossings[c].ends[Crossing::straight(p) as usize];
                if e == start {
                    break;
                }
            }
            out.push(comp);
        }
        out
    }

    /// Where a dart arrives: (crossing, position).
    fn arrival(&self, (e, d): (usize, Dir)) -> Option<(usize, u8)> {
        match d {
            Dir::Plus => self.edges[e].head,
            Dir::Minus => self.edges[e].tail,
        }
    }

    fn leaving(&self, c: usize, q: u8) -> (usize, Dir) {
        let e = self.crossings[c].ends[q as usize];
        if self.edges[e].tail == Some((c, q)) {
            (e, Dir::Plus)
        } else {
            (e, Dir::Minus)
        }
    }

    fn trace_faces(&self) -> Vec<Face> {
        if self.crossings.is_empty() {
            return OrientedLinkDiagram::unknot().faces;
        }
        let mut used: BTreeSet<(usize, Dir)> = BTreeSet::new();
        let mut faces = Vec::new();
        for e in 0..self.edges.len() {
            for d in [Dir::Plus, Dir::Minus] {
                if used.contains(&(e, d)) {
                    continue;
                }
                let mut face = Face { darts: Vec::new(), corners: Vec::new() };
                let mut cur = (e, d);
                loop {
                    used.insert(cur);
                    face.darts.push(cur);
                    let (c, p) = self.arrival(cur).unwrap();
                    let q = (p + 3) % 4;
                    face.corners.push((c, q));
                    cur = self.leaving(c, q);
                    if cur == (e, d) {
                        break;
                    }
                }
                faces.push(face);
            }
        }
        faces
    }

    /// Face containing a dart.
    pub fn face_of(&self, dart: (usize, Dir)) -> usize {
        self.faces.iter().position(|f| f.darts.contains(&dart)).unwrap()
    }

    pub fn face_of_corner(&self, corner: (usize, u8)) -> Option<usize> {
        self.faces.iter().position(|f| f.corners.contains(&corner))
    }

    pub fn seifert_circles(&self) -> SeifertCircleSet {
        if self.crossings.is_empty() {
            return SeifertCircleSet { circles: vec![vec![0]] };
        }
        let mut seen = vec![false; self.edges.len()];
        let mut circles = Vec::new();
        for start in 0..self.edges.len() {
            if seen[start] {
                continue;
            }
            let mut circ = Vec::new();
            let mut e = start;
            loop {
                seen[e] = true;
                circ.push(e);
                let (c, p) = self.edges[e].head.unwrap();
                let x = &self.crossings[c];
                e = x.ends[x.smooth(p) as usize];
                if e == start {
                    break;
                }
            }
            circles.push(circ);
        }
        SeifertCircleSet { circles }
    }

    /// Faces grouped into components of the complement of the Seifert
    /// circles, each with the number of distinct circles it touches.
    pub fn seifert_complement(&self) -> Vec<(Vec<usize>, usize)> {
        let n = self.faces.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, i: usize) -> usize {
            let mut i = i;
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for (c, x) in self.crossings.iter().enumerate() {
            // the corner between the two incoming ends and the one between
            // the two outgoing ends merge under smoothing
            let mut merged = Vec::new();
            for k in 0..4u8 {
                if x.is_in(k) == x.is_in((k + 1) % 4) {
                    merged.push(self.face_of_corner((c, k)).unwrap());
                }
            }
            let (a, b) = (find(&mut parent, merged[0]), find(&mut parent, merged[1]));
            parent[a] = b;
        }
        let circles = self.seifert_circles();
        let mut touch: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for (ci, circ) in circles.circles.iter().enumerate() {
            for &e in circ {
                for d in [Dir::Plus, Dir::Minus] {
                    let f = self.face_of((e, d));
                    let r = find(&mut parent, f);
                    touch.entry(r).or_default().insert(ci);
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for f in 0..n {
            let r = find(&mut parent, f);
            groups.entry(r).or_default().push(f);
        }
        groups.into_iter().map(|(r, fs)| (fs, touch.get(&r).map_or(0, |s| s.len()))).collect()
    }

    /// Global orientation reversal of every component.
    pub fn reversed(&self) -> OrientedLinkDiagram {
        // reversing swaps in and out; rotating positions by two restores the
        // "incoming under first" convention and keeps the over-strand entry
        let crossings: Vec<Crossing> = self
            .crossings
            .iter()
            .map(|x| Crossing { ends: [x.ends[2], x.ends[3], x.ends[0], x.ends[1]], over_in: x.over_in })
            .collect();
        if self.crossings.is_empty() {
            let mut d = OrientedLinkDiagram::unknot();
            d.outer_face = self.outer_face.map(|f| 1 - f);
            return d;
        }
        let labels = self.edges.iter().map(|e| e.label).collect();
        let mut d = OrientedLinkDiagram::from_crossings(crossings, labels).expect("reversal keeps planarity");
        d.outer_face = self.outer_face.map(|f| {
            let (e, dir) = self.faces[f].darts[0];
            d.face_of((e, dir.rev()))
        });
        d
    }

    /// The projection is a connected graph.
    pub fn is_connected(&self) -> bool {
        if self.crossings.is_empty() {
            return self.edges.len() <= 1;
        }
        let mut comp: Vec<usize> = (0..self.crossings.len()).collect();
        fn root(c: &mut Vec<usize>, x: usize) -> usize {
            if c[x] != x {
                let r = root(c, c[x]);
                c[x] = r;
            }
            c[x]
        }
        for e in &self.edges {
            let (Some((a, _)), Some((b, _))) = (e.tail, e.head) else { return false };
            let (ra, rb) = (root(&mut comp, a), root(&mut comp, b));
            comp[ra] = rb;
        }
        (0..comp.len()).all(|x| root(&mut comp, x) == root(&mut comp, 0))
    }

    pub fn with_outer_face(&self, f: usize) -> OrientedLinkDiagram {
        let mut d = self.clone();
        d.outer_face = Some(f);
        d
    }
}

// ---------------------------------------------------------------------------
// Parsing

fn resolve_orientation(tuples: &[[usize; 4]], nedges: usize, labels: &[i64]) -> Result<Vec<u8>, DiagramError> {
    // in_at[(c,p)] = Some(true) if the strand enters the crossing there
    let n = tuples.len();
    let mut state: Vec<[Option<bool>; 4]> = vec![[Some(true), None, Some(false), None]; n];
    let mut occ: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nedges];
    for (c, t) in tuples.iter().enumerate() {
        for p in 0..4 {
            occ[t[p]].push((c, p));
        }
    }
    for (e, o) in occ.iter().enumerate() {
        if o.len() != 2 {
            return Err(DiagramError::Malformed(format!("label {} occurs {} times", labels[e], o.len())));
        }
    }
    let propagate = |state: &mut Vec<[Option<bool>; 4]>| -> Result<(), DiagramError> {
        let mut changed = true;
        while changed {
            changed = false;
            for o in &occ {
                let (a, b) = (o[0], o[1]);
                match (state[a.0][a.1], state[b.0][b.1]) {
                    (Some(x), None) => {
                        state[b.0][b.1] = Some(!x);
                        changed = true;
                    }
                    (None, Some(x)) => {
                        state[a.0][a.1] = Some(!x);
                        changed = true;
                    }
                    (Some(x), Some(y)) if x == y => {
                        return Err(DiagramError::Malformed("strand orientations clash".into()));
                    }
                    _ => {}
                }
            }
            for s in state.iter_mut() {
                match (s[1], s[3]) {
                    (Some(x), None) => {
                        s[3] = Some(!x);
                        changed = true;
                    }
                    (None, Some(x)) => {
                        s[1] = Some(!x);
                        changed = true;
                    }
                    (Some(x), Some(y)) if x == y => {
                        return Err(DiagramError::Malformed("over-strand orientation clash".into()));
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    };
    propagate(&mut state)?;
    // components that never pass under: fall back to consecutive labels
    while let Some(c) = state.iter().position(|s| s[1].is_none()) {
        let (j, l) = (labels[tuples[c][1]], labels[tuples[c][3]]);
        let j_in = l - j == 1 || j - l > 1;
        state[c][1] = Some(j_in);
        propagate(&mut state)?;
    }
    Ok(state.iter().map(|s| if s[1] == Some(true) { 1 } else { 3 }).collect())
}

fn from_labelled(raw: Vec<[i64; 4]>) -> Result<OrientedLinkDiagram, DiagramError> {
    if raw.is_empty() {
        return Ok(OrientedLinkDiagram::unknot());
    }
    let mut labels: Vec<i64> = raw.iter().flatten().copied().collect();
    labels.sort();
    labels.dedup();
    let idx: BTreeMap<i64, usize> = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let tuples: Vec<[usize; 4]> = raw.iter().map(|t| t.map(|l| idx[&l])).collect();
    let over = resolve_orientation(&tuples, labels.len(), &labels)?;
    let crossings = tuples.iter().zip(over).map(|(t, o)| Crossing { ends: *t, over_in: o }).collect();
    OrientedLinkDiagram::from_crossings(crossings, labels)
}

/// `PD[X(a,b,c,d), ...]` (square brackets also accepted), or a braid line
/// `braid <n> "<word>"`. A trailing `outer <label>` punctures the face on
/// the right of that edge.
pub fn parse_pd(text: &str) -> Result<OrientedLinkDiagram, DiagramError> {
    let body: String = text.lines().map(|l| l.split('#').next().unwrap_or("")).collect::<Vec<_>>().join(" ");
    let (t, outer) = match body.split_once("outer") {
        Some((t, o)) => {
            let l: i64 = o.trim().parse().map_err(|_| DiagramError::Malformed(format!("bad outer label `{}`", o.trim())))?;
            (t.trim(), Some(l))
        }
        None => (body.trim(), None),
    };
    let mut d = parse_diagram(t)?;
    if let Some(l) = outer {
        let e = d
            .edges
            .iter()
            .position(|e| e.label == l)
            .ok_or_else(|| DiagramError::Malformed(format!("no edge labelled {l}")))?;
        d.outer_face = Some(d.face_of((e, Dir::Minus)));
    }
    Ok(d)
}

fn parse_diagram(t: &str) -> Result<OrientedLinkDiagram, DiagramError> {
    if t.starts_with("braid") {
        return parse_braid(t);
    }
    let inner = t
        .strip_prefix("PD[")
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| DiagramError::Malformed("expected PD[...]".into()))?;
    let mut raw = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let r = rest.strip_prefix('X').ok_or_else(|| DiagramError::Malformed(format!("expected X at `{rest}`")))?;
        let (open, close) = match r.chars().next() {
            Some('(') => ('(', ')'),
            Some('[') => ('[', ']'),
            _ => return Err(DiagramError::Malformed("expected ( or [ after X".into())),
        };
        let end = r.find(close).ok_or_else(|| DiagramError::Malformed("unclosed crossing".into()))?;
        let nums: Vec<i64> = r[open.len_utf8()..end]
            .split(',')
            .map(|s| s.trim().parse::<i64>().map_err(|_| DiagramError::Malformed(format!("bad label `{s}`"))))
            .collect::<Result<_, _>>()?;
        if nums.len() != 4 {
            return Err(DiagramError::Malformed("a crossing has four labels".into()));
        }
        raw.push([nums[0], nums[1], nums[2], nums[3]]);
        rest = r[end + 1..].trim_start().trim_start_matches(',').trim_start();
    }
    from_labelled(raw)
}

/// Closed braid: strands run upward, letter `a` is σ₁, upper case inverts.
pub fn parse_braid(text: &str) -> Result<OrientedLinkDiagram, DiagramError> {
    let mut it = text.split_whitespace();
    if it.next() != Some("braid") {
        return Err(DiagramError::Malformed("expected `braid`".into()));
    }
    let n: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| DiagramError::Malformed("strand count".into()))?;
    let word = it.collect::<Vec<_>>().join("");
    let word = word.trim_matches('"');
    let letters: Vec<(usize, bool)> = word
        .chars()
        .map(|ch| {
            let i = (ch.to_ascii_lowercase() as u8).wrapping_sub(b'a') as usize;
            if !ch.is_ascii_alphabetic() || i + 1 >= n {
                Err(DiagramError::Malformed(format!("generator `{ch}` out of range for {n} strands")))
            } else {
                Ok((i, ch.is_ascii_lowercase()))
            }
        })
        .collect::<Result<_, _>>()?;
    braid_diagram(n, &letters)
}

pub fn braid_diagram(n: usize, letters: &[(usize, bool)]) -> Result<OrientedLinkDiagram, DiagramError> {
    if letters.is_empty() {
        if n == 1 {
            return Ok(OrientedLinkDiagram::unknot());
        }
        return Err(DiagramError::Malformed("split closed braid".into()));
    }
    let mut next = 0i64;
    let mut fresh = || {
        next += 1;
        next
    };
    let start: Vec<i64> = (0..n).map(|_| fresh()).collect();
    let mut cur = start.clone();
    let mut raw = Vec::new();
    for &(i, pos) in letters {
        let (a, b) = (cur[i], cur[i + 1]);
        let (c, d) = (fresh(), fresh());
        raw.push(if pos { [b, d, c, a] } else { [a, b, d, c] });
        cur[i] = c;
        cur[i + 1] = d;
    }
    // closure: the top of each strand position joins its bottom
    let mut alias: BTreeMap<i64, i64> = BTreeMap::new();
    for j in 0..n {
        if cur[j] == start[j] {
            return Err(DiagramError::Malformed(format!("strand position {} carries no crossing", j + 1)));
        }
        alias.insert(cur[j], start[j]);
    }
    let raw = raw.into_iter().map(|t| t.map(|l| *alias.get(&l).unwrap_or(&l))).collect();
    from_labelled(raw)
}

// ---------------------------------------------------------------------------
// Admissibility

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub reasons: Vec<String>,
}

/// (a) the punctured face meets each crossing at most once, so its closure
/// together with the puncture is an annulus; (b) it lies on the right of
/// every edge it touches, i.e. induces the same direction as the walls.
pub fn is_admissible(d: &OrientedLinkDiagram) -> Admissibility {
    let mut reasons = Vec::new();
    let Some(f) = d.outer_face else {
        return Admissibility { admissible: false, reasons: vec!["no distinguished face".into()] };
    };
    let face = &d.faces[f];
    let mut seen = BTreeSet::new();
    for (c, _) in &face.corners {
        if !seen.insert(*c) {
            reasons.push(format!("face meets crossing {c} twice; its closure is not an annulus"));
        }
    }
    for (e, dir) in &face.darts {
        if *dir == Dir::Plus {
            reasons.push(format!("face lies left of edge {}", d.edges[*e].label));
        }
    }
    Admissibility { admissible: reasons.is_empty(), reasons }
}

/// Puncture inside a disk component of the Seifert-circle complement and
/// pick the orientation that makes the diagram admissible. Among admissible
/// choices the face meeting most crossings wins, then the lowest face index,
/// then the original orientation.
pub fn make_admissible(d: &OrientedLinkDiagram) -> Result<(OrientedLinkDiagram, bool), DiagramError> {
    let mut best: Option<(usize, OrientedLinkDiagram, bool)> = None;
    let rev = d.reversed();
    let mut disk_faces: Vec<usize> =
        d.seifert_complement().into_iter().filter(|(_, k)| *k == 1).flat_map(|(fs, _)| fs).collect();
    disk_faces.sort();
    for f in disk_faces {
        for (reversed, base) in [(false, d), (true, &rev)] {
            let face = if reversed {
                let (e, dir) = d.faces[f].darts[0];
                base.face_of((e, dir.rev()))
            } else {
                f
            };
            let cand = base.with_outer_face(face);
            if !is_admissible(&cand).admissible {
                continue;
            }
            let touched: BTreeSet<usize> = cand.faces[face].corners.iter().map(|(c, _)| *c).collect();
            if best.as_ref().is_none_or(|(n, _, _)| touched.len() > *n) {
                best = Some((touched.len(), cand, reversed));
            }
        }
    }
    best.map(|(_, d, r)| (d, r)).ok_or(DiagramError::NotAchievable)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const TREFOIL: &str = "PD[X(1,5,2,4), X(3,1,4,6), X(5,3,6,2)]";
    pub const EIGHT: &str = "PD[X(4,2,5,1), X(8,6,1,5), X(6,3,7,4), X(2,7,3,8)]";

    #[test]
    fn face_counts() {
        let t = parse_pd(TREFOIL).unwrap();
        assert_eq!((t.crossing_number(), t.faces.len()), (3, 5));
        let e = parse_pd(EIGHT).unwrap();
        assert_eq!((e.crossing_number(), e.faces.len()), (4, 6));
        let u = parse_pd("PD[]").unwrap();
        assert_eq!((u.components.len(), u.faces.len()), (1, 2));
    }

    #[test]
    fn seifert_counts() {
        assert_eq!(parse_pd(TREFOIL).unwrap().seifert_circles().circles.len(), 2);
        assert_eq!(parse_pd(EIGHT).unwrap().seifert_circles().circles.len(), 3);
        assert_eq!(parse_pd("PD[]").unwrap().seifert_circles().circles.len(), 1);
    }

    #[test]
    fn braid_lowering() {
        let d = parse_braid("braid 2 \"aaa\"").unwrap();
        assert_eq!(d.crossing_number(), 3);
        assert!(d.crossings.iter().all(|x| x.sign() == 1));
        assert_eq!(d.components.len(), 1);
        let h = parse_braid("braid 2 \"AA\"").unwrap();
        assert_eq!(h.components.len(), 2);
        assert!(h.crossings.iter().all(|x| x.sign() == -1));
        assert!(parse_braid("braid 3 \"aa\"").is_err());
    }

    #[test]
    fn pd_signs_match_knotinfo() {
        // the standard trefoil code is positive, the figure-eight amphichiral
        let t = parse_pd(TREFOIL).unwrap();
        assert!(t.crossings.iter().all(|x| x.sign() == 1));
        let e = parse_pd(EIGHT).unwrap();
        assert_eq!(e.crossings.iter().map(|x| x.sign() as i32).sum::<i32>(), 0);
    }

    #[test]
    fn reversal_round_trip() {
        let e = parse_pd(EIGHT).unwrap();
        let r = e.reversed().reversed();
        assert_eq!(r.crossings, e.crossings);
        assert_eq!(e.reversed().seifert_circles().circles.len(), 3);
    }

    #[test]
    fn two_braid_trefoil_admissibility() {
        let d = parse_braid("braid 2 \"aaa\"").unwrap();
        let (a, reversed) = make_admissible(&d).unwrap();
        assert!(is_admissible(&a).admissible);
        assert_eq!(a.crossing_number(), 3);
        // the same punctured face with the opposite orientation fails (b)
        let f = a.outer_face.unwrap();
        let (e, dir) = a.faces[f].darts[0];
        let flipped = a.reversed();
        let g = flipped.face_of((e, dir.rev()));
        assert_eq!(g, flipped.outer_face.unwrap());
        assert!(!is_admissible(&flipped).admissible);
        let _ = reversed;
    }
}
