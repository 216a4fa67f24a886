//! The And-Inverter Graph.
//!
//! Nodes live in a flat table indexed by [`NodeId`]. Node 0 is the constant
//! FALSE node; primary inputs and AND gates follow. Inverters live on the
//! edges, encoded in the low bit of a [`Lit`].
//!
//! Every live node carries a reference count (AND fanins plus primary-output
//! references) and a fanout list. When a count drops to zero the node is
//! swept: it is tombstoned in place, never reused, and its fanins are
//! dereferenced in turn. Ids therefore stay stable for the lifetime of a
//! pass; compaction happens only when the graph is written out.

mod aiger;

use std::fmt;
use std::ops::Not;

use rustc_hash::{FxHashMap, FxHashSet};

pub use aiger::{parse_aiger, write_aiger};

use crate::error::{Error, Result};

pub type NodeId = usize;

/// An edge into a node, optionally complemented. Encoded as
/// `2 * node + complemented`, which is the AIGER literal convention.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Lit(u32);

impl Lit {
    pub const FALSE: Lit = Lit(0);
    pub const TRUE: Lit = Lit(1);

    #[inline]
    pub fn new(node: NodeId, complemented: bool) -> Lit {
        Lit(((node as u32) << 1) | complemented as u32)
    }

    #[inline]
    pub fn from_raw(raw: u32) -> Lit {
        Lit(raw)
    }

    #[inline]
    pub fn raw(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn node(self) -> NodeId {
        (self.0 >> 1) as NodeId
    }

    #[inline]
    pub fn is_complemented(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub fn regular(self) -> Lit {
        Lit(self.0 & !1)
    }

    #[inline]
    pub fn complement_if(self, c: bool) -> Lit {
        Lit(self.0 ^ c as u32)
    }

    #[inline]
    pub fn is_const(self) -> bool {
        self.0 < 2
    }
}

impl Not for Lit {
    type Output = Lit;

    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_complemented() {
            write!(f, "!{}", self.node())
        } else {
            write!(f, "{}", self.node())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Const,
    Input,
    And,
}

#[derive(Clone, Debug)]
pub struct Node {
    kind: NodeKind,
    fanins: [Lit; 2],
    level: u32,
    refs: u32,
    dead: bool,
    fanouts: Vec<NodeId>,
}

impl Node {
    fn new(kind: NodeKind) -> Node {
        Node {
            kind,
            fanins: [Lit::FALSE; 2],
            level: 0,
            refs: 0,
            dead: false,
            fanouts: Vec::new(),
        }
    }

    pub fn kind(&self) -> NodeKind {
        self.kind
    }

    pub fn is_and(&self) -> bool {
        self.kind == NodeKind::And
    }

    pub fn fanin0(&self) -> Lit {
        self.fanins[0]
    }

    pub fn fanin1(&self) -> Lit {
        self.fanins[1]
    }

    pub fn fanins(&self) -> [Lit; 2] {
        self.fanins
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Outgoing edge count: AND fanins plus primary-output references.
    pub fn refs(&self) -> u32 {
        self.refs
    }

    /// AND nodes this node feeds. A gate using the node on both inputs
    /// appears twice.
    pub fn fanouts(&self) -> &[NodeId] {
        &self.fanouts
    }

    pub fn is_dead(&self) -> bool {
        self.dead
    }
}

#[inline]
fn strash_key(a: Lit, b: Lit) -> u64 {
    ((a.raw() as u64) << 32) | b.raw() as u64
}

#[inline]
fn ordered(a: Lit, b: Lit) -> (Lit, Lit) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A combinational And-Inverter Graph.
#[derive(Clone, Debug)]
pub struct Aig {
    nodes: Vec<Node>,
    inputs: Vec<NodeId>,
    outputs: Vec<Lit>,
    strash: FxHashMap<u64, NodeId>,
    strash_built: bool,
    live_ands: usize,
}

impl Default for Aig {
    fn default() -> Self {
        Aig::new()
    }
}

impl Aig {
    pub fn new() -> Aig {
        Aig {
            nodes: vec![Node::new(NodeKind::Const)],
            inputs: Vec::new(),
            outputs: Vec::new(),
            strash: FxHashMap::default(),
            strash_built: true,
            live_ands: 0,
        }
    }

    pub fn add_input(&mut self) -> Lit {
        let id = self.nodes.len();
        self.nodes.push(Node::new(NodeKind::Input));
        self.inputs.push(id);
        Lit::new(id, false)
    }

    pub fn add_output(&mut self, lit: Lit) {
        self.nodes[lit.node()].refs += 1;
        self.outputs.push(lit);
    }

    /// Replaces primary output `index` with `lit`, sweeping whatever the old
    /// driver leaves unreferenced.
    pub fn set_output(&mut self, index: usize, lit: Lit) {
        let old = self.outputs[index];
        self.nodes[lit.node()].refs += 1;
        self.outputs[index] = lit;
        self.deref_node(old.node());
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn inputs(&self) -> &[NodeId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Lit] {
        &self.outputs
    }

    /// Size of the node table, tombstones included.
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn live_and_count(&self) -> usize {
        self.live_ands
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn is_live_and(&self, id: NodeId) -> bool {
        id < self.nodes.len() && self.nodes[id].is_and() && !self.nodes[id].dead
    }

    pub fn level(&self, id: NodeId) -> u32 {
        self.nodes[id].level
    }

    /// Live AND node ids in ascending order.
    pub fn and_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.is_and() && !n.dead)
            .map(|(i, _)| i)
    }

    /// Creates an AND node without folding or hashing. Used by the parser so
    /// that declared node counts survive; also the tail of [`Aig::strash_and`].
    pub fn add_and_raw(&mut self, a: Lit, b: Lit) -> Lit {
        let (a, b) = ordered(a, b);
        let id = self.nodes.len();
        let level = 1 + self.nodes[a.node()].level.max(self.nodes[b.node()].level);
        let mut node = Node::new(NodeKind::And);
        node.fanins = [a, b];
        node.level = level;
        self.nodes.push(node);
        for lit in [a, b] {
            let fanin = &mut self.nodes[lit.node()];
            fanin.refs += 1;
            fanin.fanouts.push(id);
        }
        if self.strash_built {
            self.strash.entry(strash_key(a, b)).or_insert(id);
        }
        self.live_ands += 1;
        Lit::new(id, false)
    }

    fn ensure_strash(&mut self) {
        if self.strash_built {
            return;
        }
        self.strash.clear();
        self.strash.reserve(self.live_ands);
        for (id, node) in self.nodes.iter().enumerate() {
            if node.is_and() && !node.dead {
                self.strash
                    .entry(strash_key(node.fanins[0], node.fanins[1]))
                    .or_insert(id);
            }
        }
        self.strash_built = true;
    }

    /// Looks up an existing AND of `a` and `b` after constant folding,
    /// without creating anything. Returns `None` on a hash miss.
    pub fn lookup_and(&mut self, a: Lit, b: Lit) -> Option<Lit> {
        if let Some(l) = fold_and(a, b) {
            return Some(l);
        }
        self.ensure_strash();
        let (a, b) = ordered(a, b);
        self.strash.get(&strash_key(a, b)).map(|&id| Lit::new(id, false))
    }

    /// Hash-consed AND with constant folding.
    pub fn strash_and(&mut self, a: Lit, b: Lit) -> Lit {
        match self.lookup_and(a, b) {
            Some(l) => l,
            None => self.add_and_raw(a, b),
        }
    }

    pub fn strash_or(&mut self, a: Lit, b: Lit) -> Lit {
        !self.strash_and(!a, !b)
    }

    /// Recomputes every live node's level from scratch and returns the
    /// depth, i.e. the largest level among primary-output drivers.
    pub fn compute_levels(&mut self) -> u32 {
        for id in self.topo_order_all() {
            let [a, b] = self.nodes[id].fanins;
            self.nodes[id].level = 1 + self.nodes[a.node()].level.max(self.nodes[b.node()].level);
        }
        self.depth()
    }

    /// Depth from the stored levels.
    pub fn depth(&self) -> u32 {
        self.outputs
            .iter()
            .map(|l| self.nodes[l.node()].level)
            .max()
            .unwrap_or(0)
    }

    /// Live AND nodes reachable from the outputs, fanins first.
    pub fn topo_order(&self) -> Vec<NodeId> {
        let roots: Vec<NodeId> = self.outputs.iter().map(|l| l.node()).collect();
        self.topo_from(&roots)
    }

    /// Every live AND node, fanins first.
    fn topo_order_all(&self) -> Vec<NodeId> {
        let roots: Vec<NodeId> = self.and_ids().collect();
        self.topo_from(&roots)
    }

    fn topo_from(&self, roots: &[NodeId]) -> Vec<NodeId> {
        let mut mark = vec![false; self.nodes.len()];
        let mut order = Vec::with_capacity(self.live_ands);
        let mut stack: Vec<(NodeId, bool)> = Vec::new();
        for &r in roots {
            if mark[r] || !self.nodes[r].is_and() {
                continue;
            }
            stack.push((r, false));
            while let Some((id, expanded)) = stack.pop() {
                if expanded {
                    order.push(id);
                    continue;
                }
                if mark[id] {
                    continue;
                }
                mark[id] = true;
                stack.push((id, true));
                for lit in self.nodes[id].fanins.iter().rev() {
                    let f = lit.node();
                    if !mark[f] && self.nodes[f].is_and() {
                        stack.push((f, false));
                    }
                }
            }
        }
        order
    }

    /// Number of AND nodes reachable from the outputs, by full traversal.
    pub fn reachable_and_count(&self) -> usize {
        self.topo_order().len()
    }

    /// Size of the maximum fanout-free cone of `id`: the AND nodes, `id`
    /// included, that lose their last reference once `id` is removed.
    /// Returns 0 for inputs and the constant.
    pub fn mffc_size(&self, id: NodeId) -> usize {
        if !self.is_live_and(id) {
            return 0;
        }
        self.dying_count(id, None)
    }

    /// Trial dereference of `root`. `keep` holds one extra reference for the
    /// duration of the trial. Nothing is mutated.
    pub(crate) fn dying_count(&self, root: NodeId, keep: Option<NodeId>) -> usize {
        let mut taken: FxHashMap<NodeId, u32> = FxHashMap::default();
        let extra = |n: NodeId| -> u32 { u32::from(keep == Some(n)) };
        let mut count = 1;
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            for lit in self.nodes[id].fanins {
                let f = lit.node();
                if !self.nodes[f].is_and() {
                    continue;
                }
                let t = taken.entry(f).or_insert(0);
                *t += 1;
                if *t == self.nodes[f].refs + extra(f) {
                    count += 1;
                    stack.push(f);
                }
            }
        }
        count
    }

    /// Drops one reference to `id` and sweeps everything that becomes
    /// unreferenced.
    fn deref_node(&mut self, id: NodeId) {
        debug_assert!(self.nodes[id].refs > 0);
        self.nodes[id].refs -= 1;
        if self.nodes[id].refs == 0 {
            self.sweep(id);
        }
    }

    /// Tombstones `id` (which must be unreferenced) and, transitively, any
    /// fanin that loses its last reference.
    fn sweep(&mut self, id: NodeId) {
        let mut stack = vec![id];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if !node.is_and() || node.dead || node.refs != 0 {
                continue;
            }
            let fanins = node.fanins;
            self.kill(id);
            for lit in fanins {
                let f = lit.node();
                self.detach_fanout(f, id);
                self.nodes[f].refs -= 1;
                if self.nodes[f].refs == 0 && self.nodes[f].is_and() {
                    stack.push(f);
                }
            }
        }
    }

    fn kill(&mut self, id: NodeId) {
        let node = &mut self.nodes[id];
        node.dead = true;
        node.fanouts = Vec::new();
        let fanins = node.fanins;
        let key = strash_key(fanins[0], fanins[1]);
        if self.strash_built && self.strash.get(&key) == Some(&id) {
            self.strash.remove(&key);
            // A structural duplicate (kept from parsing) takes over the key.
            let twin = self.nodes[fanins[0].node()]
                .fanouts
                .iter()
                .copied()
                .find(|&f| f != id && !self.nodes[f].dead && self.nodes[f].fanins == fanins);
            if let Some(t) = twin {
                self.strash.insert(key, t);
            }
        }
        self.live_ands -= 1;
    }

    fn detach_fanout(&mut self, node: NodeId, fanout: NodeId) {
        let fo = &mut self.nodes[node].fanouts;
        if let Some(p) = fo.iter().position(|&x| x == fanout) {
            fo.swap_remove(p);
        }
    }

    /// Sweeps an unreferenced AND node left behind by construction, e.g. a
    /// dangling gate read from a file.
    pub fn sweep_dangling(&mut self) {
        for id in (0..self.nodes.len()).rev() {
            let n = &self.nodes[id];
            if n.is_and() && !n.dead && n.refs == 0 {
                self.sweep(id);
            }
        }
    }

    /// Sweeps unreferenced live AND nodes with id `>= first`, except `keep`.
    /// Used to drop construction leftovers that nothing points to.
    pub(crate) fn sweep_speculative(&mut self, first: NodeId, keep: Option<NodeId>) {
        if let Some(k) = keep {
            self.nodes[k].refs += 1;
        }
        for id in (first..self.nodes.len()).rev() {
            let n = &self.nodes[id];
            if n.is_and() && !n.dead && n.refs == 0 {
                self.sweep(id);
            }
        }
        if let Some(k) = keep {
            self.nodes[k].refs -= 1;
        }
    }

    /// Removes every node with id `>= first`, newest first. These must be
    /// speculative nodes that nothing outside the range references.
    pub(crate) fn truncate_nodes(&mut self, first: NodeId) {
        while self.nodes.len() > first {
            let id = self.nodes.len() - 1;
            let node = &self.nodes[id];
            debug_assert_eq!(node.refs, 0, "speculative node {id} still referenced");
            if !node.dead {
                let fanins = node.fanins;
                self.kill(id);
                for lit in fanins {
                    self.detach_fanout(lit.node(), id);
                    self.nodes[lit.node()].refs -= 1;
                }
            }
            self.nodes.pop();
        }
    }

    /// Whether `target` lies in the transitive fanin of `start`.
    pub fn depends_on(&self, start: NodeId, target: NodeId) -> bool {
        if start == target {
            return true;
        }
        let floor = self.nodes[target].level;
        let mut seen: FxHashSet<NodeId> = FxHashSet::default();
        let mut stack = vec![start];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if !node.is_and() || node.level <= floor {
                continue;
            }
            for lit in node.fanins {
                let f = lit.node();
                if f == target {
                    return true;
                }
                if seen.insert(f) {
                    stack.push(f);
                }
            }
        }
        false
    }

    /// Redirects every reference to `old` onto `new` (complementation
    /// respected) and sweeps what dies. Returns the change in live AND count,
    /// `before - after`.
    ///
    /// Redirected gates are updated in place. A redirected gate whose new
    /// fanin pair already exists elsewhere stays as a structural duplicate;
    /// gates are never merged as a side effect, so the returned delta is
    /// exactly the cone that dies minus the replacement nodes that live.
    pub fn replace_node(&mut self, old: NodeId, new: Lit) -> Result<isize> {
        if !self.is_live_and(old) {
            return Err(Error::NotAnAnd(old));
        }
        if new.node() == old {
            if new.is_complemented() {
                return Err(Error::Cycle { old, new: new.raw() });
            }
            return Ok(0);
        }
        if self.depends_on(new.node(), old) {
            return Err(Error::Cycle { old, new: new.raw() });
        }
        let before = self.live_ands as isize;
        let target = new.node();

        let fanouts = std::mem::take(&mut self.nodes[old].fanouts);
        let mut touched = Vec::with_capacity(fanouts.len());
        for &f in &fanouts {
            let [a, b] = self.nodes[f].fanins;
            if a.node() != old && b.node() != old {
                // Second entry of a gate that uses `old` on both inputs.
                continue;
            }
            if self.strash_built {
                let key = strash_key(a, b);
                if self.strash.get(&key) == Some(&f) {
                    self.strash.remove(&key);
                }
            }
            let mut fanins = [a, b];
            for slot in &mut fanins {
                if slot.node() == old {
                    *slot = new.complement_if(slot.is_complemented());
                    self.nodes[target].refs += 1;
                    self.nodes[target].fanouts.push(f);
                    self.nodes[old].refs -= 1;
                }
            }
            let (a, b) = ordered(fanins[0], fanins[1]);
            self.nodes[f].fanins = [a, b];
            if self.strash_built {
                self.strash.entry(strash_key(a, b)).or_insert(f);
            }
            touched.push(f);
        }
        for i in 0..self.outputs.len() {
            let o = self.outputs[i];
            if o.node() == old {
                self.outputs[i] = new.complement_if(o.is_complemented());
                self.nodes[target].refs += 1;
                self.nodes[old].refs -= 1;
            }
        }
        debug_assert_eq!(self.nodes[old].refs, 0);
        self.sweep(old);
        self.propagate_levels(touched);
        Ok(before - self.live_ands as isize)
    }

    /// Re-derives levels forward from `seeds` until nothing changes.
    fn propagate_levels(&mut self, seeds: Vec<NodeId>) {
        let mut queued: FxHashSet<NodeId> = seeds.iter().copied().collect();
        let mut work = std::collections::VecDeque::from(seeds);
        while let Some(id) = work.pop_front() {
            queued.remove(&id);
            let node = &self.nodes[id];
            if node.dead {
                continue;
            }
            let [a, b] = node.fanins;
            let level = 1 + self.nodes[a.node()].level.max(self.nodes[b.node()].level);
            if level != node.level {
                self.nodes[id].level = level;
                for i in 0..self.nodes[id].fanouts.len() {
                    let fo = self.nodes[id].fanouts[i];
                    if queued.insert(fo) {
                        work.push_back(fo);
                    }
                }
            }
        }
    }

    /// Full consistency check of the bookkeeping. Intended for tests.
    pub fn check(&self) -> std::result::Result<(), String> {
        let mut refs = vec![0u32; self.nodes.len()];
        let mut fanouts: Vec<Vec<NodeId>> = vec![Vec::new(); self.nodes.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            if !node.is_and() || node.dead {
                continue;
            }
            for lit in node.fanins {
                let f = lit.node();
                if self.nodes[f].dead {
                    return Err(format!("node {id} reads dead node {f}"));
                }
                refs[f] += 1;
                fanouts[f].push(id);
            }
            let [a, b] = node.fanins;
            if a > b {
                return Err(format!("node {id} fanins not ordered"));
            }
            let want = 1 + self.nodes[a.node()].level.max(self.nodes[b.node()].level);
            if node.level != want {
                return Err(format!("node {id} level {} != {want}", node.level));
            }
        }
        for o in &self.outputs {
            if self.nodes[o.node()].dead {
                return Err(format!("output reads dead node {}", o.node()));
            }
            refs[o.node()] += 1;
        }
        for (id, node) in self.nodes.iter().enumerate() {
            if node.dead {
                continue;
            }
            if node.refs != refs[id] {
                return Err(format!("node {id} refs {} != {}", node.refs, refs[id]));
            }
            let mut have = node.fanouts.clone();
            have.sort_unstable();
            fanouts[id].sort_unstable();
            if have != fanouts[id] {
                return Err(format!("node {id} fanout list out of sync"));
            }
            if node.is_and() && node.refs == 0 {
                return Err(format!("node {id} live but unreferenced"));
            }
        }
        let reach = self.reachable_and_count();
        if reach != self.live_ands {
            return Err(format!("live count {} != reachable {reach}", self.live_ands));
        }
        if self.strash_built {
            for (&key, &id) in &self.strash {
                let n = &self.nodes[id];
                if n.dead || strash_key(n.fanins[0], n.fanins[1]) != key {
                    return Err(format!("stale strash entry for node {id}"));
                }
            }
            for id in self.and_ids() {
                let n = &self.nodes[id];
                if !self.strash.contains_key(&strash_key(n.fanins[0], n.fanins[1])) {
                    return Err(format!("node {id} missing from strash"));
                }
            }
        }
        Ok(())
    }
}

/// Trivial AND simplifications; `None` when a gate is actually needed.
#[inline]
fn fold_and(a: Lit, b: Lit) -> Option<Lit> {
    if a == Lit::FALSE || b == Lit::FALSE || a == !b {
        Some(Lit::FALSE)
    } else if a == Lit::TRUE || a == b {
        Some(b)
    } else if b == Lit::TRUE {
        Some(a)
    } else {
        None
    }
}
