//! Complexity accounting of branched shadows and the volume bounds for
//! special shadows. Everything here is a bound or certificate for whatever
//! manifold a shadow presents; nothing computes an invariant of a manifold.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::branching::{find_branching, is_branching, Branching};
use crate::build::{shadow_of_diagram, BuildError};
use crate::link::OrientedLinkDiagram;
use crate::poly::{nat_sorted, Color, NodeKind, ShadowPolyhedron};

/// Volume of the regular ideal octahedron, 8·Л(π/4) with Л the Lobachevsky
/// function.
pub const V_OCT: f64 = 3.663862376708876;
/// Volume of the regular ideal tetrahedron, 3·Л(π/3).
pub const V_TET: f64 = 1.014941606409653;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VolumeError {
    #[error("polyhedron is not valid: {0}")]
    Invalid(String),
    #[error("polyhedron is not special")]
    NotSpecial,
    #[error("region {0} has no gleam")]
    MissingGleam(String),
    #[error("{0} boundary vertices; eliminate them first")]
    HasBoundaryVertices(usize),
    #[error("not a branching of this polyhedron")]
    NotBranching,
    #[error("polyhedron admits no branching")]
    NoBranching,
    #[error("diagram: {0}")]
    Diagram(String),
}

impl From<BuildError> for VolumeError {
    fn from(e: BuildError) -> Self {
        VolumeError::Diagram(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StableMapSignature {
    pub ii2: usize,
    pub ii3: usize,
}

/// c(f) = |II²| + 2|II³|.
pub fn stable_map_complexity(sig: StableMapSignature) -> usize {
    sig.ii2 + 2 * sig.ii3
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiberCensus {
    pub signature: StableMapSignature,
    /// One definite-fold family per i- or e-coloured boundary circle.
    pub i0_families: usize,
    /// One indefinite-fold family per component of S(P) minus its vertices.
    pub i1_families: usize,
}

/// Singular fibres of the stable map read off a branched shadow: each true
/// vertex is a II² fibre and no II³ fibres occur.
pub fn fiber_census(p: &ShadowPolyhedron, b: &Branching) -> Result<FiberCensus, VolumeError> {
    let rep = p.validate();
    if !rep.valid {
        return Err(VolumeError::Invalid(rep.messages().join("; ")));
    }
    let bv = p.boundary_vertices().len();
    if bv > 0 {
        return Err(VolumeError::HasBoundaryVertices(bv));
    }
    if !is_branching(p, b).unwrap_or(false) {
        return Err(VolumeError::NotBranching);
    }
    Ok(FiberCensus {
        signature: StableMapSignature { ii2: p.true_vertices().len(), ii3: 0 },
        i0_families: p.boundary.values().filter(|c| c.color != Color::F).count(),
        i1_families: p.singular_edges().len(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SmcBound {
    /// Upper bound for smc = bsc of the presented pair.
    pub upper: usize,
    /// c = 0: the presented link is a graph link.
    pub graph_link: bool,
}

pub fn smc_upper_bound(p: &ShadowPolyhedron) -> SmcBound {
    let c = p.complexity_c();
    SmcBound { upper: c, graph_link: c == 0 }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeData {
    pub region: String,
    pub g2: i64,
    pub k: usize,
    pub sl: f64,
}

/// √((2g)² + k²), exact until the root.
pub fn slope_length(g2: i64, k: usize) -> f64 {
    let s = (g2 as i128).pow(2) + (k as i128).pow(2);
    (s as f64).sqrt()
}

/// Slope data of every region; k counts vertex passages with multiplicity.
pub fn sl_of(p: &ShadowPolyhedron) -> Result<(Vec<SlopeData>, f64), VolumeError> {
    if !p.predicates().is_special {
        return Err(VolumeError::NotSpecial);
    }
    let mut out = Vec::new();
    for r in nat_sorted(p.regions.keys()) {
        let reg = &p.regions[r];
        let g = reg.gleam.ok_or_else(|| VolumeError::MissingGleam(r.clone()))?;
        let k = reg
            .walks
            .iter()
            .flatten()
            .filter(|s| p.head_node(s).is_some_and(|n| p.nodes.get(n) == Some(&NodeKind::True)))
            .count();
        out.push(SlopeData { region: r.clone(), g2: g.twice(), k, sl: slope_length(g.twice(), k) });
    }
    let min = out.iter().map(|d| d.sl).fold(f64::INFINITY, f64::min);
    Ok((out, min))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VolumeBounds {
    /// Defined only when sl > 2π.
    pub lower: Option<f64>,
    pub upper_strict: f64,
    pub certificate: bool,
}

/// 2cV_oct(1 − (2π/sl)²)^{3/2} ≤ vol < 2cV_oct, and the coincidence
/// certificate sl > 2π√(2c).
pub fn volume_bounds(c: usize, sl_min: f64) -> VolumeBounds {
    let upper_strict = 2.0 * c as f64 * V_OCT;
    let lower = (sl_min > 2.0 * PI).then(|| upper_strict * (1.0 - (2.0 * PI / sl_min).powi(2)).powf(1.5));
    VolumeBounds { lower, upper_strict, certificate: sl_min > 2.0 * PI * (2.0 * c as f64).sqrt() }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeWindow {
    pub lower: Option<f64>,
    pub upper_strict: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeReport {
    pub c: usize,
    pub signature: StableMapSignature,
    pub sl: Vec<SlopeData>,
    pub sl_min: f64,
    pub volume: VolumeWindow,
    /// When true, sc = bsc = smc = c for the presented manifold.
    pub certificate: bool,
}

/// The stored branching is used when it is one, otherwise a branching is
/// searched for.
pub fn volume_window(p: &ShadowPolyhedron) -> Result<VolumeReport, VolumeError> {
    let (sl, sl_min) = sl_of(p)?;
    let b = match &p.branching {
        Some(b) if is_branching(p, b).unwrap_or(false) => b.clone(),
        _ => find_branching(p).ok_or(VolumeError::NoBranching)?,
    };
    let census = fiber_census(p, &b)?;
    let c = p.complexity_c();
    let vb = volume_bounds(c, sl_min);
    Ok(VolumeReport {
        c,
        signature: census.signature,
        sl,
        sl_min,
        volume: VolumeWindow { lower: vb.lower, upper_strict: vb.upper_strict },
        certificate: vb.certificate,
    })
}

/// ‖M‖V_tet/(2V_oct), a lower bound for smc(M), with its ceiling.
pub fn gromov_lower_bound(norm: f64) -> (f64, u64) {
    let b = norm * V_TET / (2.0 * V_OCT);
    (b, b.ceil() as u64)
}

/// c of the shadow built from a connected diagram with at least two
/// crossings: an smc upper bound for every surgery along the link.
pub fn surgery_presentation_bound(d: &OrientedLinkDiagram) -> Result<usize, VolumeError> {
    if d.crossing_number() < 2 {
        return Err(VolumeError::Diagram("need at least two crossings".into()));
    }
    if !d.is_connected() {
        return Err(VolumeError::Diagram("diagram is split".into()));
    }
    Ok(shadow_of_diagram(d)?.polyhedron.complexity_c())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signature_weight() {
        assert_eq!(stable_map_complexity(StableMapSignature { ii2: 0, ii3: 0 }), 0);
        assert_eq!(stable_map_complexity(StableMapSignature { ii2: 1, ii3: 0 }), 1);
        assert_eq!(stable_map_complexity(StableMapSignature { ii2: 3, ii3: 2 }), 7);
    }

    #[test]
    fn slopes() {
        assert_eq!(slope_length(0, 0), 0.0);
        assert!((slope_length(2, 4) - 20f64.sqrt()).abs() < 1e-15);
        assert!((slope_length(10, 4) - 10.770329614269007).abs() < 1e-12);
    }

    #[test]
    fn short_slope_has_no_lower_bound() {
        let v = volume_bounds(1, 5.0);
        assert_eq!(v.lower, None);
        assert!(!v.certificate);
    }

    #[test]
    fn gromov() {
        assert_eq!(gromov_lower_bound(0.0), (0.0, 0));
        let (b, c) = gromov_lower_bound(2.0);
        assert!((b - 0.277013).abs() < 1e-5 && c == 1, "{b}");
    }
}
