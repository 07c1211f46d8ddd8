//! Restoring the local models after cells have been deleted or glued.
//!
//! Edges are looked at in natural id order, one change at a time, until a
//! fixed point: a 0-germ edge disappears, a 2-germ edge dissolves into the
//! regions on both sides, a 1-germ edge becomes boundary and a 3-germ arc
//! becomes singular. Then each node is reclassified from its link.

use std::collections::{BTreeMap, BTreeSet};

use crate::branching::{is_branching, Branching};
use crate::build::BuildError;
use crate::poly::{
    nat_cmp, nat_sorted, reverse_walk, BoundaryCircle, Color, Dir, EdgeKind, End, LocalShape, NodeKind,
    ShadowPolyhedron, Walk,
};

pub(crate) struct Normalized {
    pub poly: ShadowPolyhedron,
    alias: BTreeMap<String, String>,
}

impl Normalized {
    /// The region that absorbed `r`, if it survived.
    pub fn survivor(&self, r: &str) -> Option<String> {
        let mut cur = r.to_string();
        while let Some(n) = self.alias.get(&cur) {
            cur = n.clone();
        }
        self.poly.regions.contains_key(&cur).then_some(cur)
    }
}

struct Engine {
    p: ShadowPolyhedron,
    chi: BTreeMap<String, i64>,
    alias: BTreeMap<String, String>,
    touched: BTreeMap<String, String>,
    keep_branching: bool,
    old: BTreeMap<String, (String, Color)>,
    new_color: Color,
}

fn illegal(at: &str, detail: impl Into<String>) -> BuildError {
    BuildError::IllegalResult { at: at.to_string(), detail: detail.into() }
}

pub(crate) fn normalize(p: ShadowPolyhedron, new_color: Color) -> Result<Normalized, BuildError> {
    let chi = p.regions.iter().map(|(k, r)| (k.clone(), r.chi())).collect();
    let mut old = BTreeMap::new();
    for (c, bc) in &p.boundary {
        for a in &bc.arcs {
            old.insert(a.clone(), (c.clone(), bc.color));
        }
    }
    let mut e = Engine {
        keep_branching: p.branching.is_some(),
        p,
        chi,
        alias: BTreeMap::new(),
        touched: BTreeMap::new(),
        old,
        new_color,
    };
    loop {
        if e.edge_pass()? {
            continue;
        }
        if e.node_pass()? {
            continue;
        }
        break;
    }
    e.finish()?;
    Ok(Normalized { poly: e.p, alias: e.alias })
}

impl Engine {
    fn resolve(&self, r: &str) -> String {
        let mut cur = r.to_string();
        while let Some(n) = self.alias.get(&cur) {
            cur = n.clone();
        }
        cur
    }

    fn edge_pass(&mut self) -> Result<bool, BuildError> {
        let germs = self.p.germs();
        for id in nat_sorted(self.p.edges.keys()).into_iter().cloned().collect::<Vec<_>>() {
            let gs = germs.get(&id).cloned().unwrap_or_default();
            match gs.len() {
                0 => {
                    self.p.edges.remove(&id);
                    return Ok(true);
                }
                1 => {
                    let (r, wi, si) = &gs[0];
                    let edge = self.p.edges.get_mut(&id).unwrap();
                    let step = &mut self.p.regions.get_mut(r).unwrap().walks[*wi][*si];
                    if edge.kind != EdgeKind::Arc || edge.flip || step.slot != 0 {
                        edge.kind = EdgeKind::Arc;
                        edge.flip = false;
                        step.slot = 0;
                        return Ok(true);
                    }
                }
                2 => {
                    self.dissolve(&id, gs[0].clone(), gs[1].clone())?;
                    return Ok(true);
                }
                3 => {
                    let slots: BTreeSet<u8> =
                        gs.iter().map(|(r, wi, si)| self.p.regions[r].walks[*wi][*si].slot).collect();
                    if slots.len() != 3 || slots.iter().any(|s| *s > 2) {
                        return Err(illegal(&id, "three germs on clashing slots"));
                    }
                    let edge = self.p.edges.get_mut(&id).unwrap();
                    if edge.kind != EdgeKind::Singular {
                        edge.kind = EdgeKind::Singular;
                        return Ok(true);
                    }
                }
                n => return Err(illegal(&id, format!("{n} germs on one edge"))),
            }
        }
        Ok(false)
    }

    fn sign(&self, r: &str) -> Option<Dir> {
        self.p.branching.as_ref().and_then(|b| b.orientation.get(r).copied())
    }

    /// Glue the two regions meeting along a 2-germ edge.
    fn dissolve(
        &mut self,
        id: &str,
        g1: (String, usize, usize),
        g2: (String, usize, usize),
    ) -> Result<(), BuildError> {
        let has_ends = !self.p.edges[id].is_circle();
        let (r1, w1, i1) = g1;
        let (r2, mut w2, mut i2) = g2;
        let d1 = self.p.regions[&r1].walks[w1][i1].dir;
        let d2 = self.p.regions[&r2].walks[w2][i2].dir;
        let dec = has_ends as i64;
        if r1 != r2 {
            let mut b = self.p.regions.remove(&r2).unwrap();
            let reversed = d1 == d2;
            if reversed {
                b.walks = b.walks.iter().map(reverse_walk).collect();
                i2 = b.walks[w2].len() - 1 - i2;
            }
            if let (Some(s1), Some(s2)) = (self.sign(&r1), self.sign(&r2)) {
                let s2 = if reversed { s2.rev() } else { s2 };
                if s1 != s2 {
                    self.keep_branching = false;
                }
            }
            if let Some(br) = self.p.branching.as_mut() {
                br.orientation.remove(&r2);
            }
            let chi2 = self.chi.remove(&r2).unwrap();
            let a = self.p.regions.get_mut(&r1).unwrap();
            w2 += a.walks.len();
            a.walks.extend(b.walks);
            a.orientable &= b.orientable;
            a.gleam = match (a.gleam, b.gleam) {
                (Some(x), Some(y)) => Some(x + y),
                _ => None,
            };
            *self.chi.get_mut(&r1).unwrap() += chi2 - dec;
            self.alias.insert(r2.clone(), r1.clone());
            self.splice(&r1, w1, i1, w2, i2);
        } else if w1 != w2 {
            let a = self.p.regions.get_mut(&r1).unwrap();
            if d1 == d2 {
                a.orientable = false;
                a.walks[w2] = reverse_walk(&a.walks[w2]);
                i2 = a.walks[w2].len() - 1 - i2;
            }
            *self.chi.get_mut(&r1).unwrap() -= dec;
            self.splice(&r1, w1, i1, w2, i2);
        } else {
            let a = self.p.regions.get_mut(&r1).unwrap();
            let w = a.walks.remove(w1);
            let (i, j) = (i1.min(i2), i1.max(i2));
            let x = &w[..i];
            let y: Walk = w[i + 1..j].to_vec();
            let zx: Walk = w[j + 1..].iter().chain(x.iter()).cloned().collect();
            if d1 != d2 {
                a.walks.push(y);
                a.walks.push(zx);
            } else {
                a.orientable = false;
                a.walks.push(y.into_iter().chain(reverse_walk(&zx)).collect());
            }
            *self.chi.get_mut(&r1).unwrap() -= dec;
        }
        let a = self.p.regions.get_mut(&r1).unwrap();
        a.walks.retain(|w| !w.is_empty());
        if !a.orientable {
            self.keep_branching = false;
        }
        let e = self.p.edges.remove(id).unwrap();
        for n in [e.from, e.to].into_iter().flatten() {
            self.touched.insert(n, r1.clone());
        }
        Ok(())
    }

    /// Walks `wa` and `wb` of region `r` cross the dissolving edge at `ia`,
    /// `ib` in opposite directions; join them into one cycle.
    fn splice(&mut self, r: &str, wa: usize, ia: usize, wb: usize, ib: usize) {
        let reg = self.p.regions.get_mut(r).unwrap();
        let a = reg.walks[wa].clone();
        let b = reg.walks[wb].clone();
        let joined: Walk = a[..ia]
            .iter()
            .chain(b[ib + 1..].iter())
            .chain(b[..ib].iter())
            .chain(a[ia + 1..].iter())
            .cloned()
            .collect();
        reg.walks[wa] = joined;
        reg.walks.remove(wb);
    }

    fn node_pass(&mut self) -> Result<bool, BuildError> {
        for n in nat_sorted(self.p.nodes.keys()).into_iter().cloned().collect::<Vec<_>>() {
            let link = self.p.link_at(&n);
            match link.classify() {
                LocalShape::K4 => {
                    self.p.nodes.insert(n, NodeKind::True);
                }
                LocalShape::Tripod => {
                    self.p.nodes.insert(n, NodeKind::Bv);
                }
                LocalShape::Empty => {
                    self.p.nodes.remove(&n);
                    if let Some(r) = self.touched.get(&n) {
                        let r = self.resolve(r);
                        if let Some(c) = self.chi.get_mut(&r) {
                            *c += 1;
                        }
                    }
                    return Ok(true);
                }
                LocalShape::Theta | LocalShape::Path => {
                    let (e1, x1) = link.ends[0].clone();
                    let (e2, x2) = link.ends[1].clone();
                    if e1 == e2 {
                        self.close_loop(&n, &e1, &link)?;
                    } else {
                        let (keep, xk, other, xo) =
                            if nat_cmp(&e1, &e2).is_le() { (e1, x1, e2, x2) } else { (e2, x2, e1, x1) };
                        let far = self.p.edges[&other].end(xo.other()).cloned();
                        let edge = self.p.edges.get_mut(&keep).unwrap();
                        match xk {
                            End::From => edge.from = far,
                            End::To => edge.to = far,
                        }
                        self.p.edges.remove(&other);
                        for reg in self.p.regions.values_mut() {
                            for w in reg.walks.iter_mut() {
                                w.retain(|s| s.edge != other);
                            }
                        }
                        if let Some((c, col)) = self.old.get(&other).cloned() {
                            self.old.entry(keep).or_insert((c, col));
                        }
                    }
                    self.p.nodes.remove(&n);
                    return Ok(true);
                }
                LocalShape::Illegal(d) => return Err(illegal(&n, d)),
            }
        }
        Ok(false)
    }

    /// A loop whose only node has a θ (or path) link becomes a closed circle.
    fn close_loop(&mut self, n: &str, e: &str, link: &crate::poly::NodeLink) -> Result<(), BuildError> {
        let mut pi = [0u8, 1, 2];
        for &((ia, sa), (ib, sb)) in &link.passages {
            if link.ends[ia].1 == End::To && link.ends[ib].1 == End::From {
                pi[sa as usize] = sb;
            } else {
                pi[sb as usize] = sa;
            }
        }
        let edge = self.p.edges.get_mut(e).unwrap();
        edge.from = None;
        edge.to = None;
        if edge.kind == EdgeKind::Arc {
            return Ok(());
        }
        let moved: Vec<u8> = (0..3u8).filter(|s| pi[*s as usize] != *s).collect();
        let relabel: [u8; 3] = match moved.len() {
            0 => {
                edge.flip = false;
                [0, 1, 2]
            }
            2 => {
                edge.flip = true;
                let fixed = (0..3u8).find(|s| pi[*s as usize] == *s).unwrap();
                let mut m = [0u8; 3];
                m[moved[0] as usize] = 0;
                m[moved[1] as usize] = 1;
                m[fixed as usize] = 2;
                m
            }
            _ => return Err(BuildError::Unsupported(format!("order-3 monodromy around {e} at {n}"))),
        };
        for reg in self.p.regions.values_mut() {
            for w in reg.walks.iter_mut() {
                for s in w.iter_mut().filter(|s| s.edge == e) {
                    s.slot = relabel[s.slot as usize];
                }
            }
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<(), BuildError> {
        // closed boundary circles are traversed positively by convention
        for reg in self.p.regions.values_mut() {
            for w in reg.walks.iter_mut() {
                if w.len() == 1 {
                    let e = &self.p.edges[&w[0].edge];
                    if e.kind == EdgeKind::Arc && e.is_circle() {
                        w[0].dir = Dir::Plus;
                    }
                }
            }
        }
        for (r, reg) in self.p.regions.iter_mut() {
            let chi = self.chi[r];
            let b = reg.walks.len() as i64;
            let rest = 2 - chi - b;
            if reg.orientable {
                if rest < 0 || rest % 2 != 0 {
                    return Err(illegal(r, format!("inconsistent surface (χ={chi}, b={b})")));
                }
                reg.genus = (rest / 2) as u32;
            } else {
                if rest < 1 {
                    return Err(illegal(r, format!("inconsistent surface (χ={chi}, b={b})")));
                }
                reg.genus = rest as u32;
            }
        }
        let externals: Vec<String> =
            self.p.regions.keys().filter(|r| !self.p.is_internal(r)).cloned().collect();
        for r in externals {
            self.p.regions.get_mut(&r).unwrap().gleam = None;
        }
        self.rebuild_boundary();
        if let Some(b) = self.p.branching.take() {
            let ok = self.keep_branching
                && self.p.regions.values().all(|r| r.orientable)
                && self.p.regions.keys().all(|r| b.orientation.contains_key(r));
            if ok {
                let b = Branching {
                    orientation: b.orientation.into_iter().filter(|(r, _)| self.p.regions.contains_key(r)).collect(),
                };
                if is_branching(&self.p, &b).unwrap_or(false) {
                    self.p.branching = Some(b);
                }
            }
        }
        Ok(())
    }

    fn rebuild_boundary(&mut self) {
        let arcs: Vec<String> = nat_sorted(self.p.edges.keys())
            .into_iter()
            .filter(|id| self.p.edges[*id].kind == EdgeKind::Arc)
            .cloned()
            .collect();
        let mut boundary = BTreeMap::new();
        let mut open: Vec<String> = Vec::new();
        for a in &arcs {
            if self.p.edges[a].is_circle() {
                let color = self.old.get(a).map_or(self.new_color, |(_, c)| *c);
                boundary.insert(a.clone(), BoundaryCircle { color, arcs: vec![a.clone()], bvs: Vec::new() });
            } else {
                open.push(a.clone());
            }
        }
        // components of the arc graph through boundary vertices
        let mut comp: Vec<usize> = (0..open.len()).collect();
        fn find(c: &mut Vec<usize>, i: usize) -> usize {
            let mut i = i;
            while c[i] != i {
                c[i] = c[c[i]];
                i = c[i];
            }
            i
        }
        for i in 0..open.len() {
            for j in i + 1..open.len() {
                let (a, b) = (&self.p.edges[&open[i]], &self.p.edges[&open[j]]);
                let shared = [&a.from, &a.to].iter().any(|x| *x == &b.from || *x == &b.to);
                if shared {
                    let (ri, rj) = (find(&mut comp, i), find(&mut comp, j));
                    comp[ri] = rj;
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for i in 0..open.len() {
            let r = find(&mut comp, i);
            groups.entry(r).or_default().push(open[i].clone());
        }
        let mut groups: Vec<Vec<String>> = groups.into_values().collect();
        groups.sort_by(|a, b| nat_cmp(&a[0], &b[0]));
        for g in groups {
            let mut bvs = BTreeSet::new();
            for a in &g {
                let e = &self.p.edges[a];
                bvs.insert(e.from.clone().unwrap());
                bvs.insert(e.to.clone().unwrap());
            }
            let prior = g.iter().find_map(|a| self.old.get(a).cloned());
            let (id, color) = match prior {
                Some((c, col)) if !boundary.contains_key(&c) && !self.p.edges.contains_key(&c) => (c, col),
                Some((_, col)) => (self.fresh_comp(&boundary), col),
                None => (self.fresh_comp(&boundary), self.new_color),
            };
            let mut bvs: Vec<String> = bvs.into_iter().collect();
            bvs.sort_by(|a, b| nat_cmp(a, b));
            boundary.insert(id, BoundaryCircle { color, arcs: g, bvs });
        }
        self.p.boundary = boundary;
    }

    fn fresh_comp(&self, taken: &BTreeMap<String, BoundaryCircle>) -> String {
        crate::poly::fresh_id("h", &|s| taken.contains_key(s) || self.p.id_taken(s))
    }
}
