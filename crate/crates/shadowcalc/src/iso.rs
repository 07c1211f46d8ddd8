//! Isomorphism of polyhedra by brute force over node bijections and edge
//! matchings; region walks are compared up to rotation and reversal.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::poly::{Color, Dir, EdgeKind, NodeKind, ShadowPolyhedron};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GleamMatch {
    Ignore,
    Exact,
    /// Exact after negating every gleam of one side.
    UpToSign,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Iso {
    pub nodes: BTreeMap<String, String>,
    /// edge -> (image, reversed)
    pub edges: BTreeMap<String, (String, bool)>,
    pub regions: BTreeMap<String, String>,
    /// -1 when gleams matched only after negation
    pub gleam_sign: i64,
}

type EdgeKey = (bool, bool, bool, Option<Color>);

fn edge_key(p: &ShadowPolyhedron, e: &str) -> EdgeKey {
    let x = &p.edges[e];
    let color = p.boundary.values().find(|b| b.arcs.iter().any(|a| a == e)).map(|b| b.color);
    (x.kind == EdgeKind::Singular, x.flip, x.is_circle(), color)
}

fn min_rotation(w: &[(String, Dir)]) -> Vec<(String, Dir)> {
    (0..w.len().max(1))
        .map(|i| w.iter().cycle().skip(i).take(w.len()).cloned().collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

type RegionSig = (u32, bool, Option<i64>, Vec<Vec<(String, Dir)>>);

fn region_sigs(
    p: &ShadowPolyhedron,
    emap: &BTreeMap<String, (String, bool)>,
    gleam: Option<i64>,
) -> Vec<(RegionSig, String)> {
    let mut out: Vec<(RegionSig, String)> = p
        .regions
        .iter()
        .map(|(id, r)| {
            let mapped: Vec<Vec<(String, Dir)>> = r
                .walks
                .iter()
                .map(|w| {
                    w.iter()
                        .map(|s| {
                            let (img, rev) = &emap[&s.edge];
                            (img.clone(), if *rev { s.dir.rev() } else { s.dir })
                        })
                        .collect()
                })
                .collect();
            let fwd: Vec<Vec<(String, Dir)>> = mapped.iter().map(|w| min_rotation(w)).sorted().collect();
            let bwd: Vec<Vec<(String, Dir)>> = mapped
                .iter()
                .map(|w| {
                    let r: Vec<(String, Dir)> = w.iter().rev().map(|(e, d)| (e.clone(), d.rev())).collect();
                    min_rotation(&r)
                })
                .sorted()
                .collect();
            let g = gleam.map(|sign| r.gleam.map_or(i64::MIN, |g| sign * g.twice()));
            ((r.genus, r.orientable, g, fwd.min(bwd)), id.clone())
        })
        .collect();
    out.sort();
    out
}

fn identity_sigs(p: &ShadowPolyhedron, gleam: bool) -> Vec<(RegionSig, String)> {
    let id: BTreeMap<String, (String, bool)> = p.edges.keys().map(|e| (e.clone(), (e.clone(), false))).collect();
    region_sigs(p, &id, gleam.then_some(1))
}

struct Search<'a> {
    a: &'a ShadowPolyhedron,
    b: &'a ShadowPolyhedron,
    a_edges: Vec<String>,
    target: Vec<(RegionSig, String)>,
    gleam: GleamMatch,
}

impl Search<'_> {
    fn edges(
        &self,
        nm: &BTreeMap<String, String>,
        i: usize,
        used: &mut Vec<String>,
        em: &mut BTreeMap<String, (String, bool)>,
    ) -> Option<Iso> {
        if i == self.a_edges.len() {
            let signs: &[i64] = match self.gleam {
                GleamMatch::Ignore => &[0],
                GleamMatch::Exact => &[1],
                GleamMatch::UpToSign => &[1, -1],
            };
            for &s in signs {
                let g = (s != 0).then_some(s);
                let mine = region_sigs(self.a, em, g);
                if mine.iter().map(|x| &x.0).eq(self.target.iter().map(|x| &x.0)) {
                    let regions = mine.iter().zip(&self.target).map(|(x, y)| (x.1.clone(), y.1.clone())).collect();
                    return Some(Iso { nodes: nm.clone(), edges: em.clone(), regions, gleam_sign: if s == 0 { 1 } else { s } });
                }
            }
            return None;
        }
        let e = &self.a_edges[i];
        let ea = &self.a.edges[e];
        let key = edge_key(self.a, e);
        let (f, t) = (ea.from.as_ref().map(|n| &nm[n]), ea.to.as_ref().map(|n| &nm[n]));
        for (y, eb) in &self.b.edges {
            if used.contains(y) || edge_key(self.b, y) != key {
                continue;
            }
            let mut opts = Vec::new();
            if eb.from.as_ref() == f && eb.to.as_ref() == t {
                opts.push(false);
            }
            if eb.from.as_ref() == t && eb.to.as_ref() == f {
                opts.push(true);
            }
            for rev in opts.into_iter().dedup() {
                used.push(y.clone());
                em.insert(e.clone(), (y.clone(), rev));
                if let Some(iso) = self.edges(nm, i + 1, used, em) {
                    return Some(iso);
                }
                em.remove(e);
                used.pop();
            }
        }
        None
    }
}

pub fn find_isomorphism(a: &ShadowPolyhedron, b: &ShadowPolyhedron, gleam: GleamMatch) -> Option<Iso> {
    if a.nodes.len() != b.nodes.len() || a.edges.len() != b.edges.len() || a.regions.len() != b.regions.len() {
        return None;
    }
    let mut ka: Vec<EdgeKey> = a.edges.keys().map(|e| edge_key(a, e)).collect();
    let mut kb: Vec<EdgeKey> = b.edges.keys().map(|e| edge_key(b, e)).collect();
    ka.sort();
    kb.sort();
    if ka != kb {
        return None;
    }
    let target = identity_sigs(b, gleam != GleamMatch::Ignore);
    let s = Search { a, b, a_edges: a.edges.keys().cloned().collect(), target, gleam };
    let an: Vec<&String> = a.nodes.keys().collect();
    for perm in b.nodes.keys().permutations(b.nodes.len()) {
        if an.iter().zip(&perm).any(|(x, y)| a.nodes[*x] != b.nodes[*y]) {
            continue;
        }
        let nm: BTreeMap<String, String> = an.iter().zip(&perm).map(|(x, y)| ((*x).clone(), (*y).clone())).collect();
        if let Some(iso) = s.edges(&nm, 0, &mut Vec::new(), &mut BTreeMap::new()) {
            return Some(iso);
        }
    }
    None
}

pub fn isomorphic(a: &ShadowPolyhedron, b: &ShadowPolyhedron) -> bool {
    find_isomorphism(a, b, GleamMatch::Ignore).is_some()
}

/// Cheap invariant used before a search: kinds of nodes, edges and regions.
pub fn shape_summary(p: &ShadowPolyhedron) -> (usize, usize, usize, usize, Vec<(u32, usize)>) {
    let tv = p.nodes.values().filter(|k| **k == NodeKind::True).count();
    let mut regs: Vec<(u32, usize)> = p.regions.values().map(|r| (r.genus, r.walks.len())).collect();
    regs.sort();
    (tv, p.nodes.len() - tv, p.singular_edges().len(), p.vertexless_loops().len(), regs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polyhedron;

    #[test]
    fn relabelled_copy_is_isomorphic() {
        let p = parse_polyhedron(include_str!("../../../fixtures/models/27-iv.asp")).unwrap();
        let c = p.canonicalize();
        assert!(isomorphic(&p, &c));
        let q = parse_polyhedron(include_str!("../../../fixtures/models/27-iii.asp")).unwrap();
        assert!(!isomorphic(&p, &q));
    }
}
