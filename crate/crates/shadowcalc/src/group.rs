//! Fundamental groups of polyhedra as finite presentations, with an
//! abelianization test and a bounded Tietze search for triviality.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::poly::{CellLabel, Dir, EdgeKind, ShadowPolyhedron, Walk};

/// Letters are `±(g + 1)` for generator `g`.
pub type Word = Vec<i32>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupPresentation {
    pub generators: Vec<String>,
    pub relators: Vec<Word>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Abelianization {
    pub free_rank: usize,
    /// Invariant factors greater than one.
    pub torsion: Vec<u64>,
}

impl Abelianization {
    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

impl fmt::Display for Abelianization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            n => parts.push(format!("Z^{n}")),
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum GroupVerdict {
    Trivial,
    Nontrivial { h1: Abelianization },
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_len: usize,
    pub depth: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_len: 16, depth: 6 }
    }
}

fn inv(w: &[i32]) -> Word {
    w.iter().rev().map(|x| -x).collect()
}

pub fn free_reduce(w: &[i32]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &x in w {
        if out.last() == Some(&-x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

pub fn cyclic_reduce(w: &[i32]) -> Word {
    let mut w = free_reduce(w);
    while w.len() >= 2 && w[0] == -w[w.len() - 1] {
        w.pop();
        w.remove(0);
    }
    w
}

/// Same relator up to rotation and inversion.
fn cyclic_key(w: &[i32]) -> Word {
    let n = w.len();
    let i = inv(w);
    (0..n.max(1))
        .flat_map(|k| [w.iter().cycle().skip(k).take(n).copied().collect::<Word>(), i.iter().cycle().skip(k).take(n).copied().collect()])
        .min()
        .unwrap_or_default()
}

// ---------------------------------------------------------------------------
// Presentation from the cell structure

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let r = self.find(self.0[x]);
            self.0[x] = r;
        }
        self.0[x]
    }
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        self.0[a] = b;
        true
    }
}

/// Generators are the cells off a maximal tree (chosen through the singular
/// graph first); every region contributes its attaching word. Generators on
/// free boundary arcs are then eliminated through the collars containing
/// them, so for a neighbourhood of S(P) with some collars capped the result
/// is ⟨loops of S(P) | capped walks⟩.
pub fn pi1_presentation(p: &ShadowPolyhedron) -> GroupPresentation {
    let sk = p.skeleton();
    let rank = |c: &CellLabel| match c {
        CellLabel::Edge(e) if p.edges[e].kind == EdgeKind::Singular => 0,
        CellLabel::Tether(_) => 1,
        CellLabel::Edge(_) => 2,
        CellLabel::Handle(_) => 3,
    };
    let mut order: Vec<usize> = (0..sk.cells.len()).collect();
    order.sort_by_key(|&i| rank(&sk.cells[i].label));
    let mut dsu = Dsu((0..sk.vertices).collect());
    let mut in_tree = vec![false; sk.cells.len()];
    for i in order {
        in_tree[i] = dsu.union(sk.cells[i].a, sk.cells[i].b);
    }
    let mut gen_of = vec![None; sk.cells.len()];
    let mut generators = Vec::new();
    let mut boundary_gens = BTreeSet::new();
    for (i, c) in sk.cells.iter().enumerate() {
        if in_tree[i] {
            continue;
        }
        gen_of[i] = Some(generators.len() as i32 + 1);
        if matches!(&c.label, CellLabel::Edge(e) if p.edges[e].kind == EdgeKind::Arc) {
            boundary_gens.insert(generators.len() as i32 + 1);
        }
        generators.push(match &c.label {
            CellLabel::Edge(e) => e.clone(),
            CellLabel::Tether(r) => format!("tether:{r}"),
            CellLabel::Handle(r) => format!("handle:{r}"),
        });
    }
    let letter = |cell: usize, forward: bool| gen_of[cell].map(|g| if forward { g } else { -g });
    let walk_word = |w: &Walk| -> Word {
        w.iter().filter_map(|s| letter(sk.edge_cell[&s.edge], s.dir == Dir::Plus)).collect()
    };
    let mut relators = Vec::new();
    let mut collar = Vec::new();
    for r in crate::poly::nat_sorted(p.regions.keys()) {
        let reg = &p.regions[r];
        let (tethers, handles) = &sk.region_cells[r];
        let mut w = Word::new();
        if reg.orientable {
            for pair in handles.chunks(2) {
                let (a, b) = (letter(pair[0], true), letter(pair[1], true));
                w.extend(a);
                w.extend(b);
                w.extend(a.map(|x| -x));
                w.extend(b.map(|x| -x));
            }
        } else {
            for &h in handles {
                w.extend(letter(h, true));
                w.extend(letter(h, true));
            }
        }
        for (k, walk) in reg.walks.iter().enumerate() {
            if k == 0 {
                w.extend(walk_word(walk));
            } else {
                let t = tethers[k - 1];
                w.extend(letter(t, true));
                w.extend(walk_word(walk));
                w.extend(letter(t, false));
            }
        }
        let w = cyclic_reduce(&w);
        if !w.is_empty() {
            if p.is_internal(r) {
                relators.push(w);
            } else {
                collar.push(w);
            }
        }
    }
    relators.extend(collar);
    let mut g = GroupPresentation { generators, relators };
    // drop boundary loops through the collars that contain them once
    loop {
        let hit = g.relators.iter().enumerate().find_map(|(i, r)| {
            boundary_gens.iter().find(|b| r.iter().filter(|x| x.abs() == **b).count() == 1).map(|b| (i, *b))
        });
        let Some((i, b)) = hit else { break };
        g.eliminate(i, b);
        boundary_gens = boundary_gens.into_iter().filter(|x| *x != b).map(|x| if x > b { x - 1 } else { x }).collect();
    }
    g
}

impl GroupPresentation {
    pub fn new(generators: usize, relators: Vec<Word>) -> Self {
        GroupPresentation {
            generators: (0..generators).map(|i| format!("g{}", i + 1)).collect(),
            relators: relators.iter().map(|r| cyclic_reduce(r)).collect(),
        }
    }

    /// Solve relator `i` for generator `g` (which it contains exactly once),
    /// substitute everywhere and drop both.
    fn eliminate(&mut self, i: usize, g: i32) {
        let r = self.relators.remove(i);
        let pos = r.iter().position(|x| x.abs() == g).unwrap();
        let rot: Word = r[pos + 1..].iter().chain(&r[..pos]).copied().collect();
        // g^ε · rot = 1
        let image = if r[pos] > 0 { inv(&rot) } else { rot };
        let image_inv = inv(&image);
        for rel in &mut self.relators {
            let mut out = Vec::with_capacity(rel.len());
            for &x in rel.iter() {
                if x == g {
                    out.extend(&image);
                } else if x == -g {
                    out.extend(&image_inv);
                } else {
                    out.push(x);
                }
            }
            *rel = cyclic_reduce(&out);
        }
        self.relators.retain(|r| !r.is_empty());
        self.generators.remove(g as usize - 1);
        let shift = |x: i32| if x.abs() > g { x - x.signum() } else { x };
        for rel in &mut self.relators {
            for x in rel.iter_mut() {
                *x = shift(*x);
            }
        }
    }

    /// First relator with a generator occurring exactly once.
    fn single_occurrence(&self) -> Option<(usize, i32)> {
        for (i, r) in self.relators.iter().enumerate() {
            let mut count: BTreeMap<i32, usize> = BTreeMap::new();
            for x in r {
                *count.entry(x.abs()).or_default() += 1;
            }
            if let Some((g, _)) = count.into_iter().find(|(_, c)| *c == 1) {
                return Some((i, g));
            }
        }
        None
    }

    fn simplify(&mut self) {
        while let Some((i, g)) = self.single_occurrence() {
            self.eliminate(i, g);
        }
    }

    pub fn abelianization(&self) -> Abelianization {
        let n = self.generators.len();
        let m: Vec<Vec<i64>> = self
            .relators
            .iter()
            .map(|r| {
                let mut row = vec![0i64; n];
                for &x in r {
                    row[x.unsigned_abs() as usize - 1] += x.signum() as i64;
                }
                row
            })
            .collect();
        let d = smith_diagonal(m, n);
        let rank = d.iter().filter(|x| **x != 0).count();
        Abelianization { free_rank: n - rank, torsion: d.into_iter().filter(|x| *x > 1).map(|x| x as u64).collect() }
    }
}

/// Nonzero diagonal entries of the Smith normal form, in divisibility order.
pub fn smith_diagonal(mut a: Vec<Vec<i64>>, cols: usize) -> Vec<i64> {
    let rows = a.len();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // pivot: smallest nonzero |entry| in the remaining block
        let piv = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| a[i][j] != 0)
            .min_by_key(|&(i, j)| a[i][j].abs());
        let Some((pi, pj)) = piv else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                let q = a[i][t] / a[t][t];
                if q != 0 {
                    for j in t..cols {
                        a[i][j] -= q * a[t][j];
                    }
                }
                if a[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                let q = a[t][j] / a[t][t];
                if q != 0 {
                    for row in a.iter_mut() {
                        row[j] -= q * row[t];
                    }
                }
                if a[t][j] != 0 {
                    clean = false;
                }
            }
            if clean {
                // the pivot must divide the rest of the block
                let bad = (t + 1..rows).flat_map(|i| (t + 1..cols).map(move |j| (i, j))).find(|&(i, j)| a[i][j] % a[t][t] != 0);
                match bad {
                    None => break,
                    Some((i, _)) => {
                        for j in t..cols {
                            a[t][j] += a[i][j];
                        }
                        continue;
                    }
                }
            }
            // move the smallest nonzero entry of row/column t to the pivot
            let mut best = (a[t][t].abs(), t, t);
            for i in t + 1..rows {
                if a[i][t] != 0 && a[i][t].abs() < best.0 {
                    best = (a[i][t].abs(), i, t);
                }
            }
            for j in t + 1..cols {
                if a[t][j] != 0 && a[t][j].abs() < best.0 {
                    best = (a[t][j].abs(), t, j);
                }
            }
            a.swap(t, best.1);
            for row in a.iter_mut() {
                row.swap(t, best.2);
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    diag
}

/// Nontrivial when the abelianization is; trivial when Tietze moves with
/// bounded relator products remove every generator; otherwise unknown.
pub fn is_trivial_group(g: &GroupPresentation, budget: Budget) -> GroupVerdict {
    let h1 = g.abelianization();
    if !h1.is_trivial() {
        return GroupVerdict::Nontrivial { h1 };
    }
    let mut g = g.clone();
    g.simplify();
    for _ in 0..budget.depth {
        if g.generators.is_empty() {
            return GroupVerdict::Trivial;
        }
        let mut seen: BTreeSet<Word> = g.relators.iter().map(|r| cyclic_key(r)).collect();
        let mut fresh = Vec::new();
        for a in &g.relators {
            for b in &g.relators {
                for b in [b.clone(), inv(b)] {
                    for i in 0..a.len() {
                        for j in 0..b.len() {
                            let w: Word = a[i..].iter().chain(&a[..i]).chain(&b[j..]).chain(&b[..j]).copied().collect();
                            let w = cyclic_reduce(&w);
                            if w.is_empty() || w.len() > budget.max_len {
                                continue;
                            }
                            if seen.insert(cyclic_key(&w)) {
                                fresh.push(w);
                            }
                        }
                    }
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        fresh.sort_by_key(Vec::len);
        g.relators.extend(fresh);
        g.simplify();
    }
    if g.generators.is_empty() {
        GroupVerdict::Trivial
    } else {
        GroupVerdict::Unknown
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polyhedron;

    fn verdict(n: usize, rels: &[&[i32]]) -> GroupVerdict {
        is_trivial_group(&GroupPresentation::new(n, rels.iter().map(|r| r.to_vec()).collect()), Budget::default())
    }

    #[test]
    fn small_groups() {
        assert_eq!(verdict(1, &[&[1]]), GroupVerdict::Trivial);
        let z2 = Abelianization { free_rank: 0, torsion: vec![2] };
        assert_eq!(verdict(1, &[&[1, 1]]), GroupVerdict::Nontrivial { h1: z2 });
        let z_2 = Abelianization { free_rank: 2, torsion: vec![] };
        assert_eq!(verdict(2, &[&[1, 2, -1, -2]]), GroupVerdict::Nontrivial { h1: z_2 });
        assert_eq!(verdict(1, &[&[1, 1], &[1, 1, 1]]), GroupVerdict::Trivial);
        // no generator occurs once until relators are multiplied
        assert_eq!(verdict(2, &[&[1, 2, -1, -2, -2], &[2, 1, -2, -1, -1]]), GroupVerdict::Trivial);
    }

    #[test]
    fn smith_form() {
        assert_eq!(smith_diagonal(vec![vec![2, 4], vec![6, 8]], 2), vec![2, 4]);
        assert_eq!(smith_diagonal(vec![vec![2, 0], vec![0, 3]], 2), vec![1, 6]);
        assert_eq!(smith_diagonal(vec![vec![0, 0]], 2), Vec::<i64>::new());
    }

    #[test]
    fn disk_on_a_loop() {
        let p = parse_polyhedron("polyhedron loop\nedge a - -\nregion d genus 0 gleam 0\n  walk a + 0 a + 1 a + 2\n").unwrap();
        let g = pi1_presentation(&p);
        assert_eq!(g.generators, vec!["a".to_string()]);
        assert_eq!(is_trivial_group(&g, Budget::default()), GroupVerdict::Nontrivial { h1: Abelianization { free_rank: 0, torsion: vec![3] } });
    }
}
