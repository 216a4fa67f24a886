//! Quick algebraic factoring of a sum-of-products cover.
//!
//! Cubes use an interleaved literal encoding: literal `2v` is variable `v`,
//! literal `2v + 1` its complement, and a cube is a bitmask of literals.

use super::isop::SopCover;
use crate::cut::{fill_var, TruthTable};
use crate::{Error, Result};

/// One node of a factored form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorNode {
    Leaf { var: usize, negated: bool },
    And(usize, usize),
    Or(usize, usize),
}

/// A factored form stored as an arena; children precede parents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorTree {
    n_vars: usize,
    nodes: Vec<FactorNode>,
    root: usize,
}

impl FactorTree {
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn nodes(&self) -> &[FactorNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Number of leaves reachable from the root, counted with multiplicity.
    pub fn literal_count(&self) -> usize {
        let mut count = 0;
        let mut stack = vec![self.root];
        while let Some(i) = stack.pop() {
            match self.nodes[i] {
                FactorNode::Leaf { .. } => count += 1,
                FactorNode::And(a, b) | FactorNode::Or(a, b) => stack.extend([a, b]),
            }
        }
        count
    }

    pub fn truth_table(&self) -> TruthTable {
        let nw = TruthTable::word_count(self.n_vars);
        let mut vals: Vec<Vec<u64>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match *node {
                FactorNode::Leaf { var, negated } => {
                    let mut w = vec![0u64; nw];
                    fill_var(&mut w, var);
                    if negated {
                        w.iter_mut().for_each(|x| *x = !*x);
                    }
                    w
                }
                FactorNode::And(a, b) => vals[a].iter().zip(&vals[b]).map(|(x, y)| x & y).collect(),
                FactorNode::Or(a, b) => vals[a].iter().zip(&vals[b]).map(|(x, y)| x | y).collect(),
            };
            vals.push(v);
        }
        TruthTable::from_words(self.n_vars, vals.swap_remove(self.root))
    }
}

/// Result of a sub-factorisation: either a tree node or the constant TRUE
/// that arises when a quotient degenerates to the empty cube.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Edge {
    One,
    Node(usize),
}

type Sop = Vec<u32>;

fn lit_count(sop: &[u32], lit: usize) -> usize {
    sop.iter().filter(|&&c| c >> lit & 1 == 1).count()
}

/// First literal that occurs in more than one cube.
fn any_literal(sop: &[u32], n_lits: usize) -> Option<usize> {
    (0..n_lits).find(|&i| lit_count(sop, i) > 1)
}

/// Least frequent literal among those occurring in more than one cube.
fn worst_literal(sop: &[u32], n_lits: usize) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    for i in 0..n_lits {
        let c = lit_count(sop, i);
        if c > 1 && best.is_none_or(|(_, b)| c < b) {
            best = Some((i, c));
        }
    }
    best.map(|(i, _)| i)
}

/// Most frequent literal of `sop` restricted to the literals of `mask`.
fn best_literal(sop: &[u32], n_lits: usize, mask: u32) -> usize {
    let mut best: Option<(usize, usize)> = None;
    for i in (0..n_lits).filter(|&i| mask >> i & 1 == 1) {
        let c = lit_count(sop, i);
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((i, c));
        }
    }
    best.expect("mask has a literal").0
}

fn common_cube(sop: &[u32]) -> u32 {
    sop.iter().fold(!0, |acc, &c| acc & c)
}

fn make_cube_free(sop: &mut [u32]) {
    let common = common_cube(sop);
    if common != 0 {
        sop.iter_mut().for_each(|c| *c &= !common);
    }
}

fn is_cube_free(sop: &[u32]) -> bool {
    common_cube(sop) == 0
}

/// Splits `sop` into the quotient of division by `cube` and the remainder.
fn divide_by_cube(sop: &[u32], cube: u32) -> (Sop, Sop) {
    let mut quo = Vec::new();
    let mut rem = Vec::new();
    for &c in sop {
        if c & cube == cube {
            quo.push(c & !cube);
        } else {
            rem.push(c);
        }
    }
    (quo, rem)
}

/// Weak algebraic division of `sop` by `div`.
fn divide(sop: &[u32], div: &[u32]) -> (Sop, Sop) {
    let mut quo: Sop = Vec::new();
    for &c in sop {
        let Some(&d0) = div.iter().find(|&&d| c & d == d) else {
            continue;
        };
        let q = c & !d0;
        if quo.contains(&q) {
            continue;
        }
        if div.iter().all(|&d| sop.contains(&(q | d))) {
            quo.push(q);
        }
    }
    let rem = sop
        .iter()
        .copied()
        .filter(|&c| !quo.iter().any(|&q| div.iter().any(|&d| q | d == c)))
        .collect();
    (quo, rem)
}

/// Drops duplicate cubes and cubes absorbed by a smaller one. Division
/// assumes this form and may not terminate without it.
/// Cube order is kept.
fn contain_free(sop: Sop) -> Sop {
    sop.iter()
        .enumerate()
        .filter(|&(i, &c)| {
            !sop.iter()
                .enumerate()
                .any(|(j, &d)| j != i && c & d == d && (c != d || j < i))
        })
        .map(|(_, &c)| c)
        .collect()
}

/// A level-zero kernel found by repeatedly dividing by the least frequent
/// shared literal.
fn divisor(sop: &[u32], n_lits: usize) -> Option<Sop> {
    if sop.len() <= 1 {
        return None;
    }
    any_literal(sop, n_lits)?;
    let mut k = sop.to_vec();
    while let Some(lit) = worst_literal(&k, n_lits) {
        k = divide_by_cube(&k, 1 << lit).0;
        make_cube_free(&mut k);
    }
    Some(k)
}

struct Factorer {
    n_lits: usize,
    nodes: Vec<FactorNode>,
}

impl Factorer {
    fn leaf(&mut self, lit: usize) -> Edge {
        self.nodes.push(FactorNode::Leaf { var: lit / 2, negated: lit & 1 == 1 });
        Edge::Node(self.nodes.len() - 1)
    }

    fn and(&mut self, a: Edge, b: Edge) -> Edge {
        match (a, b) {
            (Edge::One, x) | (x, Edge::One) => x,
            (Edge::Node(x), Edge::Node(y)) => {
                self.nodes.push(FactorNode::And(x, y));
                Edge::Node(self.nodes.len() - 1)
            }
        }
    }

    fn or(&mut self, a: Edge, b: Edge) -> Edge {
        match (a, b) {
            (Edge::One, _) | (_, Edge::One) => Edge::One,
            (Edge::Node(x), Edge::Node(y)) => {
                self.nodes.push(FactorNode::Or(x, y));
                Edge::Node(self.nodes.len() - 1)
            }
        }
    }

    fn factor(&mut self, sop: &[u32]) -> Edge {
        debug_assert!(!sop.is_empty());
        let Some(div) = divisor(sop, self.n_lits) else {
            return self.trivial(sop);
        };
        let (quo, _) = divide(sop, &div);
        if quo.is_empty() {
            return self.trivial(sop);
        }
        if quo.len() == 1 {
            return self.factor_lf(sop, quo[0]);
        }
        let mut quo = quo;
        make_cube_free(&mut quo);
        let (div, rem) = divide(sop, &quo);
        if div.is_empty() {
            return self.trivial(sop);
        }
        if is_cube_free(&div) {
            let d = self.factor(&div);
            let q = self.factor(&quo);
            let prod = self.and(d, q);
            if rem.is_empty() {
                return prod;
            }
            let r = self.factor(&rem);
            return self.or(prod, r);
        }
        let common = common_cube(&div);
        self.factor_lf(sop, common)
    }

    /// Factors out the best literal of `simple`.
    fn factor_lf(&mut self, sop: &[u32], simple: u32) -> Edge {
        if simple == 0 {
            return self.trivial(sop);
        }
        let lit = best_literal(sop, self.n_lits, simple);
        let (quo, rem) = divide_by_cube(sop, 1 << lit);
        let d = self.leaf(lit);
        let q = self.factor(&quo);
        let prod = self.and(d, q);
        if rem.is_empty() {
            return prod;
        }
        let r = self.factor(&rem);
        self.or(prod, r)
    }

    /// Balanced OR of balanced AND trees.
    fn trivial(&mut self, sop: &[u32]) -> Edge {
        if sop.len() == 1 {
            return self.trivial_cube(sop[0], 0, self.n_lits);
        }
        let mid = sop.len() / 2;
        let a = self.trivial(&sop[..mid]);
        let b = self.trivial(&sop[mid..]);
        self.or(a, b)
    }

    fn trivial_cube(&mut self, cube: u32, start: usize, end: usize) -> Edge {
        let lits: Vec<usize> = (start..end).filter(|&i| cube >> i & 1 == 1).collect();
        match lits.len() {
            0 => Edge::One,
            1 => self.leaf(lits[0]),
            _ => {
                let mid = (start + end) / 2;
                let a = self.trivial_cube(cube, start, mid);
                let b = self.trivial_cube(cube, mid, end);
                self.and(a, b)
            }
        }
    }
}

/// Factors a non-constant cover. The result never has more literals than
/// the cover.
pub fn factor(cover: &SopCover) -> Result<FactorTree> {
    if cover.is_constant() {
        return Err(Error::ConstantCover);
    }
    let sop = contain_free(cover.cubes().iter().map(|c| c.to_interleaved()).collect());
    let mut f = Factorer { n_lits: 2 * cover.n_vars(), nodes: Vec::new() };
    match f.factor(&sop) {
        Edge::Node(root) => Ok(FactorTree { n_vars: cover.n_vars(), nodes: f.nodes, root }),
        Edge::One => Err(Error::ConstantCover),
    }
}
