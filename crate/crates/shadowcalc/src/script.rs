//! Surgery scripts: one operation per line, `#` starts a comment.
//!
//! ```text
//! remove-outer
//! cap l1 1/2
//! tower l2 height 2 gleams 0,1/2
//! recolor k1 e
//! remove f3
//! eliminate-bv
//! excise x1
//! resolve-type3 H1
//! self-sum l1 l2 [q0]
//! ```

use thiserror::Error;

use crate::build::{
    attach_tower, cap_boundary, eliminate_boundary_vertices, excise_vertex, recolor_boundary, remove_region,
    resolve_type3, torus_self_sum, BuildError,
};
use crate::poly::{Color, HalfInt, ShadowPolyhedron};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SurgeryOp {
    RemoveOuter,
    Remove(String),
    Cap(String, HalfInt),
    Tower(String, Vec<HalfInt>),
    Recolor(String, Color),
    EliminateBv,
    Excise(String),
    ResolveType3(String),
    SelfSum(String, String, bool),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScriptError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Failed { line: usize, source: BuildError },
}

pub fn parse_script(text: &str) -> Result<Vec<(usize, SurgeryOp)>, ScriptError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
        if t.is_empty() {
            continue;
        }
        let err = |msg: &str| ScriptError::Syntax { line, msg: msg.to_string() };
        let gleam = |s: &str| HalfInt::parse(s).ok_or_else(|| err(&format!("bad gleam `{s}`")));
        let op = match t.as_slice() {
            ["remove-outer"] => SurgeryOp::RemoveOuter,
            ["remove", r] => SurgeryOp::Remove(r.to_string()),
            ["cap", c, g] => SurgeryOp::Cap(c.to_string(), gleam(g)?),
            ["tower", c, "height", h, "gleams", gs] => {
                let h: usize = h.parse().map_err(|_| err("height must be a positive integer"))?;
                let gs = gs.split(',').map(gleam).collect::<Result<Vec<_>, _>>()?;
                if gs.len() != h {
                    return Err(err(&format!("height {h} needs {h} gleams, got {}", gs.len())));
                }
                SurgeryOp::Tower(c.to_string(), gs)
            }
            ["recolor", c, col] => SurgeryOp::Recolor(c.to_string(), Color::parse(col).ok_or_else(|| err("color must be i, e or f"))?),
            ["eliminate-bv"] => SurgeryOp::EliminateBv,
            ["excise", v] => SurgeryOp::Excise(v.to_string()),
            ["resolve-type3", h] => SurgeryOp::ResolveType3(h.to_string()),
            ["self-sum", a, b] => SurgeryOp::SelfSum(a.to_string(), b.to_string(), false),
            ["self-sum", a, b, "q0"] => SurgeryOp::SelfSum(a.to_string(), b.to_string(), true),
            _ => return Err(err(&format!("unknown operation `{}`", t.join(" ")))),
        };
        out.push((line, op));
    }
    Ok(out)
}

pub fn apply_op(p: &ShadowPolyhedron, op: &SurgeryOp) -> Result<ShadowPolyhedron, BuildError> {
    match op {
        SurgeryOp::RemoveOuter => remove_region(p, "R"),
        SurgeryOp::Remove(r) => remove_region(p, r),
        SurgeryOp::Cap(c, g) => cap_boundary(p, c, *g),
        SurgeryOp::Tower(c, gs) => attach_tower(p, c, gs.len(), gs),
        SurgeryOp::Recolor(c, col) => recolor_boundary(p, c, *col),
        SurgeryOp::EliminateBv => eliminate_boundary_vertices(p),
        SurgeryOp::Excise(v) => excise_vertex(p, v),
        SurgeryOp::ResolveType3(h) => resolve_type3(p, h),
        SurgeryOp::SelfSum(a, b, q0) => torus_self_sum(p, a, b, *q0).map(|(q, _)| q),
    }
}

pub fn run_script(p: &ShadowPolyhedron, text: &str) -> Result<ShadowPolyhedron, ScriptError> {
    let mut q = p.clone();
    for (line, op) in parse_script(text)? {
        q = apply_op(&q, &op).map_err(|source| ScriptError::Failed { line, source })?;
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_form() {
        let ops = parse_script("remove-outer\ncap l1 1/2 # lobe\n\ntower l2 height 2 gleams 0,1/2\nself-sum a b q0\n").unwrap();
        assert_eq!(ops.len(), 4);
        assert_eq!(ops[1], (2, SurgeryOp::Cap("l1".into(), HalfInt(1))));
        assert_eq!(ops[2].1, SurgeryOp::Tower("l2".into(), vec![HalfInt(0), HalfInt(1)]));
        assert!(matches!(parse_script("tower l height 2 gleams 0"), Err(ScriptError::Syntax { line: 1, .. })));
        assert!(matches!(parse_script("\nfly away"), Err(ScriptError::Syntax { line: 2, .. })));
    }
}
