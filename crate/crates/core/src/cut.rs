//! Reconvergence-driven cuts and cut truth tables.
//!
//! A cut of a root node is grown greedily from the root's two fanins. At
//! each step the leaf whose expansion adds the fewest new leaves is replaced
//! by its fanins; expansions that reuse nodes already inside the cut are
//! cheap, which is what pulls reconvergent paths into the volume.

use crate::aig::{Aig, Lit, NodeId};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_LEAVES: usize = 10;
pub const MAX_TT_VARS: usize = 16;

/// Leaves with more fanouts than this are not expanded when the expansion
/// would add two new leaves.
const FANOUT_STOP: u32 = 1000;
const COST_BLOCKED: u32 = 999;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    root: NodeId,
    leaves: Vec<NodeId>,
    volume: Vec<NodeId>,
}

impl Cut {
    /// Builds a cut from an explicit leaf set; the volume is derived by
    /// walking back from the root. Leaves must separate the root from the
    /// inputs.
    pub fn from_leaves(aig: &Aig, root: NodeId, mut leaves: Vec<NodeId>) -> Cut {
        leaves.sort_unstable();
        leaves.dedup();
        let volume = collect_volume(aig, root, &leaves);
        Cut { root, leaves, volume }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    /// Leaf node ids, ascending. Leaf `j` is truth-table variable `j`.
    pub fn leaves(&self) -> &[NodeId] {
        &self.leaves
    }

    /// Internal nodes, fanins before fanouts; the root is last.
    pub fn volume(&self) -> &[NodeId] {
        &self.volume
    }
}

/// Post-order walk from `root` that stops at `leaves`.
fn collect_volume(aig: &Aig, root: NodeId, leaves: &[NodeId]) -> Vec<NodeId> {
    let mut seen: Vec<NodeId> = leaves.to_vec();
    let mut volume = Vec::new();
    let mut stack = vec![(root, false)];
    while let Some((id, expanded)) = stack.pop() {
        if expanded {
            volume.push(id);
            continue;
        }
        if seen.contains(&id) {
            continue;
        }
        seen.push(id);
        stack.push((id, true));
        let node = aig.node(id);
        debug_assert!(node.is_and(), "cut leaves do not separate node {id}");
        for lit in node.fanins().iter().rev() {
            if !seen.contains(&lit.node()) {
                stack.push((lit.node(), false));
            }
        }
    }
    volume
}

/// Reusable scratch space for cut computation. Marks are stamped with a
/// traversal id so no clearing is needed between cuts.
#[derive(Default)]
pub struct CutBuilder {
    stamp: Vec<u32>,
    trav: u32,
    leaves: Vec<NodeId>,
    visited: Vec<NodeId>,
}

impl CutBuilder {
    pub fn new() -> CutBuilder {
        CutBuilder::default()
    }

    fn start(&mut self, n: usize) {
        if self.stamp.len() < n {
            self.stamp.resize(n, 0);
        }
        self.trav = self.trav.wrapping_add(1);
        if self.trav == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.trav = 1;
        }
    }

    #[inline]
    fn marked(&self, id: NodeId) -> bool {
        self.stamp[id] == self.trav
    }

    #[inline]
    fn mark(&mut self, id: NodeId) {
        self.stamp[id] = self.trav;
    }

    fn leaf_cost(&self, aig: &Aig, id: NodeId) -> u32 {
        let node = aig.node(id);
        if !node.is_and() {
            return COST_BLOCKED;
        }
        let [a, b] = node.fanins();
        let cost = if a.node() == b.node() {
            u32::from(!self.marked(a.node()))
        } else {
            u32::from(!self.marked(a.node())) + u32::from(!self.marked(b.node()))
        };
        if cost < 2 {
            return cost;
        }
        if node.refs() > FANOUT_STOP {
            return COST_BLOCKED;
        }
        cost
    }

    /// One expansion step; false when no leaf can be expanded within the
    /// leaf budget.
    fn expand_once(&mut self, aig: &Aig, max_leaves: usize) -> bool {
        let mut best: Option<(u32, u32, NodeId, usize)> = None;
        for (pos, &leaf) in self.leaves.iter().enumerate() {
            let cost = self.leaf_cost(aig, leaf);
            if cost == COST_BLOCKED {
                continue;
            }
            let level = aig.level(leaf);
            let better = match best {
                None => true,
                Some((c, l, id, _)) => (cost, std::cmp::Reverse(level), leaf) < (c, std::cmp::Reverse(l), id),
            };
            if better {
                best = Some((cost, level, leaf, pos));
            }
        }
        let Some((cost, _, leaf, pos)) = best else {
            return false;
        };
        if self.leaves.len() - 1 + cost as usize > max_leaves {
            return false;
        }
        self.leaves.remove(pos);
        for lit in aig.node(leaf).fanins() {
            let f = lit.node();
            if !self.marked(f) {
                self.mark(f);
                self.leaves.push(f);
                self.visited.push(f);
            }
        }
        true
    }

    pub fn compute(&mut self, aig: &Aig, root: NodeId, max_leaves: usize) -> Result<Cut> {
        if !aig.is_live_and(root) {
            return Err(Error::NotAnAnd(root));
        }
        let max_leaves = max_leaves.max(2);
        self.start(aig.num_nodes());
        self.leaves.clear();
        self.visited.clear();
        self.mark(root);
        self.visited.push(root);
        for lit in aig.node(root).fanins() {
            let f = lit.node();
            if !self.marked(f) {
                self.mark(f);
                self.leaves.push(f);
                self.visited.push(f);
            }
        }
        while self.expand_once(aig, max_leaves) {}

        let mut leaves = self.leaves.clone();
        leaves.sort_unstable();
        // Every visited node that is not a leaf was expanded, so the volume
        // is exactly the visited set minus the leaves; walk it from the root
        // to get a topological order.
        let volume = collect_volume(aig, root, &leaves);
        debug_assert_eq!(volume.len() + leaves.len(), self.visited.len());
        Ok(Cut { root, leaves, volume })
    }
}

/// Computes the reconvergence-driven cut of `root` with at most
/// `max_leaves` leaves.
pub fn reconv_cut(aig: &Aig, root: NodeId, max_leaves: usize) -> Result<Cut> {
    CutBuilder::new().compute(aig, root, max_leaves)
}

/// A complete truth table over up to [`MAX_TT_VARS`] variables. Bit `i` is
/// the function value under the assignment where variable `j` takes bit `j`
/// of `i`. For fewer than six variables only the low `2^n` bits are used.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    n_vars: usize,
    words: Vec<u64>,
}

pub(crate) const VAR_MASKS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

impl TruthTable {
    pub fn word_count(n_vars: usize) -> usize {
        if n_vars <= 6 {
            1
        } else {
            1 << (n_vars - 6)
        }
    }

    fn tail_mask(n_vars: usize) -> u64 {
        if n_vars >= 6 {
            !0
        } else {
            (1u64 << (1 << n_vars)) - 1
        }
    }

    pub fn zero(n_vars: usize) -> TruthTable {
        assert!(n_vars <= MAX_TT_VARS);
        TruthTable { n_vars, words: vec![0; Self::word_count(n_vars)] }
    }

    pub fn from_words(n_vars: usize, mut words: Vec<u64>) -> TruthTable {
        assert_eq!(words.len(), Self::word_count(n_vars));
        let m = Self::tail_mask(n_vars);
        for w in &mut words {
            *w &= m;
        }
        TruthTable { n_vars, words }
    }

    /// The projection onto variable `var`.
    pub fn var(n_vars: usize, var: usize) -> TruthTable {
        let mut t = Self::zero(n_vars);
        fill_var(&mut t.words, var);
        t.mask_tail();
        t
    }

    pub fn from_fn(n_vars: usize, f: impl Fn(usize) -> bool) -> TruthTable {
        let mut t = Self::zero(n_vars);
        for i in 0..(1usize << n_vars) {
            if f(i) {
                t.words[i / 64] |= 1 << (i % 64);
            }
        }
        t
    }

    fn mask_tail(&mut self) {
        let m = Self::tail_mask(self.n_vars);
        for w in &mut self.words {
            *w &= m;
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn num_bits(&self) -> usize {
        1 << self.n_vars
    }

    pub fn bit(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn is_const0(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_const1(&self) -> bool {
        let m = Self::tail_mask(self.n_vars);
        self.words.iter().all(|&w| w == m)
    }

    pub fn not(&self) -> TruthTable {
        let mut t = TruthTable { n_vars: self.n_vars, words: self.words.iter().map(|w| !w).collect() };
        t.mask_tail();
        t
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

impl std::fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TruthTable({}, 0x", self.n_vars)?;
        for w in self.words.iter().rev() {
            if self.n_vars < 6 {
                write!(f, "{:x}", w)?;
            } else {
                write!(f, "{:016x}", w)?;
            }
        }
        write!(f, ")")
    }
}

/// Writes the projection of `var` into `words` (full 64-bit words).
pub(crate) fn fill_var(words: &mut [u64], var: usize) {
    if var < 6 {
        words.iter_mut().for_each(|w| *w = VAR_MASKS[var]);
    } else {
        let step = 1 << (var - 6);
        for (i, w) in words.iter_mut().enumerate() {
            *w = if i & step != 0 { !0 } else { 0 };
        }
    }
}

/// Simulates the cut volume over all leaf assignments.
pub fn cut_truth_table(aig: &Aig, cut: &Cut) -> Result<TruthTable> {
    let n = cut.leaves.len();
    if n > MAX_TT_VARS {
        return Err(Error::TooManyLeaves(n));
    }
    let nw = TruthTable::word_count(n);
    let mut sim = CutSim::default();
    let root = sim.run(aig, cut, nw);
    Ok(TruthTable::from_words(n, root.to_vec()))
}

/// Scratch buffers for repeated cut simulation.
#[derive(Default)]
pub(crate) struct CutSim {
    slots: rustc_hash::FxHashMap<NodeId, usize>,
    buf: Vec<u64>,
    nw: usize,
}

impl CutSim {
    /// Simulates the volume; returns the root's words.
    pub(crate) fn run(&mut self, aig: &Aig, cut: &Cut, nw: usize) -> &[u64] {
        self.slots.clear();
        self.nw = nw;
        let total = cut.leaves.len() + cut.volume.len();
        self.buf.clear();
        self.buf.resize(total * nw, 0);
        for (j, &leaf) in cut.leaves.iter().enumerate() {
            self.slots.insert(leaf, j);
            fill_var(&mut self.buf[j * nw..(j + 1) * nw], j);
        }
        for (k, &id) in cut.volume.iter().enumerate() {
            let slot = cut.leaves.len() + k;
            self.slots.insert(id, slot);
            let [a, b] = aig.node(id).fanins();
            let (sa, sb) = (self.slot_of(a), self.slot_of(b));
            for w in 0..nw {
                let v = self.value(sa, a, w) & self.value(sb, b, w);
                self.buf[slot * nw + w] = v;
            }
        }
        let last = total - 1;
        &self.buf[last * nw..(last + 1) * nw]
    }

    #[inline]
    fn slot_of(&self, l: Lit) -> Option<usize> {
        if l.node() == 0 {
            None
        } else {
            Some(self.slots[&l.node()])
        }
    }

    #[inline]
    fn value(&self, slot: Option<usize>, l: Lit, w: usize) -> u64 {
        let v = slot.map_or(0, |s| self.buf[s * self.nw + w]);
        if l.is_complemented() {
            !v
        } else {
            v
        }
    }
}
