//! Cappings of the one-vertex neighbourhood models and whether they give a
//! simply connected polyhedron.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::build::{attach_tower, cap_boundary, BuildError};
use crate::group::{is_trivial_group, pi1_presentation, Budget, GroupVerdict};
use crate::poly::{nat_sorted, parse_polyhedron, HalfInt, ShadowPolyhedron};

pub const MODEL_IDS: [&str; 8] = ["27-i", "27-ii", "27-iii", "27-iv", "32-i", "32-ii", "32-iii", "32-iv"];

const MODELS: [&str; 8] = [
    include_str!("../../../fixtures/models/27-i.asp"),
    include_str!("../../../fixtures/models/27-ii.asp"),
    include_str!("../../../fixtures/models/27-iii.asp"),
    include_str!("../../../fixtures/models/27-iv.asp"),
    include_str!("../../../fixtures/models/32-i.asp"),
    include_str!("../../../fixtures/models/32-ii.asp"),
    include_str!("../../../fixtures/models/32-iii.asp"),
    include_str!("../../../fixtures/models/32-iv.asp"),
];

#[derive(Debug, Error)]
pub enum CensusError {
    #[error("unknown model `{0}` (expected one of 27-i..27-iv, 32-i..32-iv)")]
    UnknownModel(String),
    #[error(transparent)]
    Build(#[from] BuildError),
}

pub fn model(id: &str) -> Result<ShadowPolyhedron, CensusError> {
    let i = MODEL_IDS.iter().position(|m| *m == id).ok_or_else(|| CensusError::UnknownModel(id.into()))?;
    Ok(parse_polyhedron(MODELS[i]).expect("bundled model parses"))
}

/// Circles closed by disks and circles given towers. Gleams stay symbolic:
/// π₁ does not see them, so disks get 0 and towers height 1 with gleam 0.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CappingPattern {
    pub disks: Vec<String>,
    pub towers: Vec<String>,
}

impl fmt::Display for CappingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "disks {{{}}}", self.disks.join(","))?;
        if !self.towers.is_empty() {
            write!(f, " towers {{{}}}", self.towers.join(","))?;
        }
        Ok(())
    }
}

impl CappingPattern {
    pub fn apply(&self, p: &ShadowPolyhedron) -> Result<ShadowPolyhedron, BuildError> {
        let mut q = p.clone();
        for c in &self.disks {
            q = cap_boundary(&q, c, HalfInt::ZERO)?;
        }
        for c in &self.towers {
            q = attach_tower(&q, c, 1, &[HalfInt::ZERO])?;
        }
        Ok(q)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PatternVerdict {
    pub pattern: CappingPattern,
    #[serde(flatten)]
    pub verdict: GroupVerdict,
}

/// Every pattern that leaves something for the link to live on: disks
/// alone never close all circles, a tower carries a link component.
pub fn patterns(p: &ShadowPolyhedron, allow_towers: bool) -> Vec<CappingPattern> {
    let circles: Vec<String> =
        nat_sorted(p.boundary.keys()).into_iter().filter(|c| p.boundary[*c].is_closed_circle()).cloned().collect();
    let base = if allow_towers { 3usize } else { 2 };
    let mut out = Vec::new();
    for code in 0..base.pow(circles.len() as u32) {
        let mut pat = CappingPattern { disks: Vec::new(), towers: Vec::new() };
        let mut x = code;
        for c in &circles {
            match x % base {
                1 => pat.disks.push(c.clone()),
                2 => pat.towers.push(c.clone()),
                _ => {}
            }
            x /= base;
        }
        if pat.disks.len() == circles.len() {
            continue;
        }
        out.push(pat);
    }
    out.sort_by(|a, b| (a.disks.len() + a.towers.len(), a).cmp(&(b.disks.len() + b.towers.len(), b)));
    out
}

pub fn classify(p: &ShadowPolyhedron, allow_towers: bool, budget: Budget) -> Result<Vec<PatternVerdict>, BuildError> {
    patterns(p, allow_towers)
        .into_iter()
        .map(|pattern| {
            let q = pattern.apply(p)?;
            Ok(PatternVerdict { verdict: is_trivial_group(&pi1_presentation(&q), budget), pattern })
        })
        .collect()
}

pub fn classify_model(id: &str, allow_towers: bool) -> Result<Vec<PatternVerdict>, CensusError> {
    Ok(classify(&model(id)?, allow_towers, Budget::default())?)
}

/// Patterns with a trivial group.
pub fn simply_connected(results: &[PatternVerdict]) -> Vec<CappingPattern> {
    results.iter().filter(|r| r.verdict == GroupVerdict::Trivial).map(|r| r.pattern.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disks(sets: &[&[&str]]) -> Vec<CappingPattern> {
        sets.iter()
            .map(|s| CappingPattern { disks: s.iter().map(|x| x.to_string()).collect(), towers: vec![] })
            .collect()
    }

    #[test]
    fn curl_model_list() {
        let r = classify_model("27-iv", false).unwrap();
        let mut got = simply_connected(&r);
        got.sort();
        let mut want = disks(&[
            &["l1", "l2"],
            &["l1", "l3"],
            &["l1", "l4"],
            &["l2", "l3"],
            &["l2", "l4"],
            &["l1", "l2", "l3"],
            &["l1", "l2", "l4"],
            &["l1", "l3", "l4"],
            &["l2", "l3", "l4"],
        ]);
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn pattern_counts() {
        let p = model("27-ii").unwrap();
        assert_eq!(patterns(&p, false).len(), 7);
        assert_eq!(patterns(&p, true).len(), 26);
    }
}
