//! Branchings: region orientations such that along every singular edge the
//! induced directions are not all equal.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{nat_cmp, nat_sorted, Dir, EdgeKind, ShadowPolyhedron};

pub const DEFAULT_CAP: usize = 24;

/// Orientation sign per region, relative to the region's stored walks.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Branching {
    pub orientation: BTreeMap<String, Dir>,
}

impl Branching {
    pub fn negated(&self) -> Branching {
        Branching { orientation: self.orientation.iter().map(|(k, d)| (k.clone(), d.rev())).collect() }
    }

    /// Signs listed in natural region order; the canonical comparison key.
    pub fn key(&self) -> Vec<Dir> {
        let mut ks: Vec<(&String, &Dir)> = self.orientation.iter().collect();
        ks.sort_by(|a, b| nat_cmp(a.0, b.0));
        ks.into_iter().map(|(_, d)| *d).collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BranchError {
    #[error("region {0} has no sign")]
    IncompleteAssignment(String),
    #[error("region {0} is not orientable")]
    NonOrientableRegion(String),
    #[error("{0} regions exceed the enumeration cap {1}")]
    CapExceeded(usize, usize),
}

/// Germs of one singular edge as (region, step direction); None for a Flip
/// circle, whose double-traversing germ supplies both directions.
fn constraints(p: &ShadowPolyhedron) -> Vec<Vec<(String, Dir)>> {
    let mut out: BTreeMap<String, Vec<(String, Dir)>> = BTreeMap::new();
    for (r, reg) in &p.regions {
        for s in reg.walks.iter().flatten() {
            let e = &p.edges[&s.edge];
            if e.kind == EdgeKind::Singular && !e.flip {
                out.entry(s.edge.clone()).or_default().push((r.clone(), s.dir));
            }
        }
    }
    out.into_values().collect()
}

pub fn is_branching(p: &ShadowPolyhedron, b: &Branching) -> Result<bool, BranchError> {
    for (r, reg) in &p.regions {
        if !reg.orientable {
            return Err(BranchError::NonOrientableRegion(r.clone()));
        }
        if !b.orientation.contains_key(r) {
            return Err(BranchError::IncompleteAssignment(r.clone()));
        }
    }
    Ok(constraints(p).iter().all(|germs| {
        let mut seen = [false; 2];
        for (r, d) in germs {
            seen[(d.times(b.orientation[r]) == Dir::Plus) as usize] = true;
        }
        seen[0] && seen[1]
    }))
}

struct Search {
    regions: Vec<String>,
    /// per constraint: (region index, direction)
    cons: Vec<Vec<(usize, Dir)>>,
    /// constraints touching each region
    touching: Vec<Vec<usize>>,
    order: Vec<usize>,
}

impl Search {
    fn new(p: &ShadowPolyhedron, canonical_order: bool) -> Self {
        let regions: Vec<String> = nat_sorted(p.regions.keys()).into_iter().cloned().collect();
        let idx: BTreeMap<&String, usize> = regions.iter().enumerate().map(|(i, r)| (r, i)).collect();
        let cons: Vec<Vec<(usize, Dir)>> =
            constraints(p).into_iter().map(|g| g.into_iter().map(|(r, d)| (idx[&r], d)).collect()).collect();
        let mut touching = vec![Vec::new(); regions.len()];
        for (ci, c) in cons.iter().enumerate() {
            for (r, _) in c {
                if !touching[*r].contains(&ci) {
                    touching[*r].push(ci);
                }
            }
        }
        let mut order: Vec<usize> = (0..regions.len()).collect();
        if !canonical_order {
            let inc = |r: usize| cons.iter().flatten().filter(|(x, _)| *x == r).count();
            order.sort_by(|a, b| inc(*b).cmp(&inc(*a)).then(a.cmp(b)));
        }
        Search { regions, cons, touching, order }
    }

    /// Status of a constraint: Some(false) violated, Some(true) satisfied,
    /// None undecided.
    fn status(&self, c: usize, a: &[Option<Dir>]) -> Option<bool> {
        let mut seen = [false; 2];
        let mut open = false;
        for (r, d) in &self.cons[c] {
            match a[*r] {
                Some(s) => seen[(d.times(s) == Dir::Plus) as usize] = true,
                None => open = true,
            }
        }
        if seen[0] && seen[1] {
            Some(true)
        } else if open {
            None
        } else {
            Some(false)
        }
    }

    /// Unit propagation: a constraint whose undecided germs all belong to
    /// one region may force that region. Returns false on conflict.
    fn propagate(&self, a: &mut Vec<Option<Dir>>, trail: &mut Vec<usize>) -> bool {
        let mut changed = true;
        while changed {
            changed = false;
            for c in 0..self.cons.len() {
                match self.status(c, a) {
                    Some(true) => continue,
                    Some(false) => return false,
                    None => {}
                }
                let open: Vec<usize> = self.cons[c].iter().filter(|(r, _)| a[*r].is_none()).map(|(r, _)| *r).collect();
                if open.iter().any(|r| *r != open[0]) {
                    continue;
                }
                let r = open[0];
                let mut ok = Vec::new();
                for s in [Dir::Plus, Dir::Minus] {
                    a[r] = Some(s);
                    if self.status(c, a) != Some(false) {
                        ok.push(s);
                    }
                }
                a[r] = None;
                match ok.len() {
                    0 => return false,
                    1 => {
                        a[r] = Some(ok[0]);
                        trail.push(r);
                        changed = true;
                    }
                    _ => {}
                }
            }
        }
        true
    }

    fn run(&self, a: &mut Vec<Option<Dir>>, first_only: bool, out: &mut Vec<Vec<Dir>>) -> bool {
        let Some(&r) = self.order.iter().find(|r| a[**r].is_none()) else {
            if (0..self.cons.len()).all(|c| self.status(c, a) == Some(true)) {
                out.push(a.iter().map(|x| x.unwrap()).collect());
                return first_only;
            }
            return false;
        };
        for s in [Dir::Plus, Dir::Minus] {
            a[r] = Some(s);
            let mut trail = Vec::new();
            let consistent = self.touching[r].iter().all(|c| self.status(*c, a) != Some(false));
            if consistent && self.propagate(a, &mut trail) && self.run(a, first_only, out) {
                return true;
            }
            for t in trail {
                a[t] = None;
            }
        }
        a[r] = None;
        false
    }

    fn to_branching(&self, v: &[Dir]) -> Branching {
        Branching { orientation: self.regions.iter().cloned().zip(v.iter().copied()).collect() }
    }
}

fn all_orientable(p: &ShadowPolyhedron) -> bool {
    p.regions.values().all(|r| r.orientable)
}

/// First branching in canonical order (natural region order, + before −).
pub fn find_branching(p: &ShadowPolyhedron) -> Option<Branching> {
    if !all_orientable(p) {
        return None;
    }
    let s = Search::new(p, true);
    let mut a = vec![None; s.regions.len()];
    let mut out = Vec::new();
    s.run(&mut a, true, &mut out);
    out.first().map(|v| s.to_branching(v))
}

pub fn enumerate_branchings(p: &ShadowPolyhedron) -> Result<Vec<Branching>, BranchError> {
    enumerate_branchings_capped(p, DEFAULT_CAP)
}

pub fn enumerate_branchings_capped(p: &ShadowPolyhedron, cap: usize) -> Result<Vec<Branching>, BranchError> {
    if p.regions.len() > cap {
        return Err(BranchError::CapExceeded(p.regions.len(), cap));
    }
    if !all_orientable(p) {
        return Ok(Vec::new());
    }
    let s = Search::new(p, false);
    let mut a = vec![None; s.regions.len()];
    let mut out = Vec::new();
    s.run(&mut a, false, &mut out);
    out.sort();
    out.dedup();
    Ok(out.iter().map(|v| s.to_branching(v)).collect())
}

/// Filter all 2^n sign vectors; the oracle for the search.
pub fn exhaustive_branchings(p: &ShadowPolyhedron) -> Vec<Branching> {
    if !all_orientable(p) {
        return Vec::new();
    }
    let regions: Vec<String> = nat_sorted(p.regions.keys()).into_iter().cloned().collect();
    let n = regions.len();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << n) {
        // bit i of the mask, most significant first, so that the output is
        // already in + < − lexicographic order
        let b = Branching {
            orientation: regions
                .iter()
                .enumerate()
                .map(|(i, r)| (r.clone(), if mask >> (n - 1 - i) & 1 == 0 { Dir::Plus } else { Dir::Minus }))
                .collect(),
        };
        if is_branching(p, &b).unwrap_or(false) {
            out.push(b);
        }
    }
    out
}
