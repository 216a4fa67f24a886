//! The six structural features that describe a cut to the classifier.

use rustc_hash::FxHashMap;

use crate::aig::{Aig, NodeId};
use crate::cut::{Cut, CutBuilder};
use crate::Result;

/// Number of features per cut.
pub const N_FEATURES: usize = 6;

/// Features of one cut, in the canonical column order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Hash)]
pub struct FeatureVector {
    /// Outgoing edges of the root, output references included.
    pub root_fanout: u32,
    pub root_level: u32,
    /// Edges leaving the volume: every outgoing edge of a volume node whose
    /// target lies outside the volume. The root's fanout is part of it.
    pub total_cut_fanout: u32,
    /// Number of volume nodes, root included, leaves excluded.
    pub cut_size: u32,
    /// Leaves and non-root volume nodes with two or more edges into the
    /// volume.
    pub n_reconvergent: u32,
    pub n_leaves: u32,
}

impl FeatureVector {
    /// CSV column names, in order.
    pub const NAMES: [&'static str; N_FEATURES] =
        ["root_fanout", "root_level", "cut_fanout", "cut_size", "n_reconv", "n_leaves"];

    pub fn to_array(&self) -> [u32; N_FEATURES] {
        [
            self.root_fanout,
            self.root_level,
            self.total_cut_fanout,
            self.cut_size,
            self.n_reconvergent,
            self.n_leaves,
        ]
    }

    pub fn from_array(a: [u32; N_FEATURES]) -> FeatureVector {
        FeatureVector {
            root_fanout: a[0],
            root_level: a[1],
            total_cut_fanout: a[2],
            cut_size: a[3],
            n_reconvergent: a[4],
            n_leaves: a[5],
        }
    }

    pub fn to_f64(&self) -> [f64; N_FEATURES] {
        self.to_array().map(f64::from)
    }
}

/// Counts, for every leaf and volume node, the edges it sends into the
/// volume.
fn inner_edges(aig: &Aig, cut: &Cut) -> FxHashMap<NodeId, u32> {
    let mut counts: FxHashMap<NodeId, u32> = FxHashMap::default();
    for &v in cut.volume() {
        for lit in aig.node(v).fanins() {
            *counts.entry(lit.node()).or_insert(0) += 1;
        }
    }
    counts
}

pub fn extract_features(aig: &Aig, cut: &Cut) -> FeatureVector {
    let counts = inner_edges(aig, cut);
    let root = cut.root();
    let total_cut_fanout = cut
        .volume()
        .iter()
        .map(|&v| aig.node(v).refs() - counts.get(&v).copied().unwrap_or(0))
        .sum();
    let n_reconvergent = counts
        .iter()
        .filter(|&(&u, &c)| c >= 2 && u != root && u != 0)
        .count() as u32;
    FeatureVector {
        root_fanout: aig.node(root).refs(),
        root_level: aig.level(root),
        total_cut_fanout,
        cut_size: cut.volume().len() as u32,
        n_reconvergent,
        n_leaves: cut.leaves().len() as u32,
    }
}

/// Nodes of the cut, root excluded, that start two distinct paths into
/// the volume ending at a common node.
pub fn count_reconvergent(aig: &Aig, cut: &Cut) -> u32 {
    extract_features(aig, cut).n_reconvergent
}

/// One row per live AND node, ascending by id.
pub fn collect_all(aig: &Aig, max_leaves: usize) -> Result<Vec<(NodeId, FeatureVector)>> {
    let mut builder = CutBuilder::new();
    aig.and_ids()
        .map(|id| {
            let cut = builder.compute(aig, id, max_leaves)?;
            Ok((id, extract_features(aig, &cut)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cut::reconv_cut;

    /// The worked example: a nine-gate chain over four inputs whose root
    /// drives three outputs and whose inner gates each leak one edge.
    fn worked_example() -> (Aig, NodeId) {
        let mut aig = Aig::new();
        let a = aig.add_input();
        let b = aig.add_input();
        let c = aig.add_input();
        let d = aig.add_input();
        let side = [c, a, b, a, b, d, a, b];
        let mut prev = aig.add_and_raw(a, b);
        let mut chain = vec![prev];
        for s in side {
            prev = aig.add_and_raw(prev, s);
            chain.push(prev);
        }
        for _ in 0..3 {
            aig.add_output(prev);
        }
        for &n in &chain[1..8] {
            aig.add_output(!n);
        }
        (aig, prev.node())
    }

    #[test]
    fn worked_example_features() {
        let (aig, root) = worked_example();
        let cut = reconv_cut(&aig, root, 10).unwrap();
        let f = extract_features(&aig, &cut);
        assert_eq!(f.to_array(), [3, 9, 10, 9, 2, 4]);
    }

    #[test]
    fn single_gate() {
        let mut aig = Aig::new();
        let a = aig.add_input();
        let b = aig.add_input();
        let x = aig.strash_and(a, b);
        aig.add_output(x);
        let cut = reconv_cut(&aig, x.node(), 10).unwrap();
        assert_eq!(extract_features(&aig, &cut).to_array(), [1, 1, 1, 1, 0, 2]);
    }

    #[test]
    fn diamond_has_one_reconvergent_node() {
        let mut aig = Aig::new();
        let a = aig.add_input();
        let b = aig.add_input();
        let c = aig.add_input();
        let l = aig.strash_and(a, b);
        let r = aig.strash_and(!a, c);
        let top = aig.strash_and(l, r);
        aig.add_output(top);
        let cut = reconv_cut(&aig, top.node(), 10).unwrap();
        assert_eq!(count_reconvergent(&aig, &cut), 1);
    }

    #[test]
    fn collect_rows_match_single_extraction() {
        let (aig, _) = worked_example();
        let rows = collect_all(&aig, 10).unwrap();
        assert_eq!(rows.len(), aig.live_and_count());
        for (id, f) in rows {
            let cut = reconv_cut(&aig, id, 10).unwrap();
            assert_eq!(f, extract_features(&aig, &cut));
        }
        let empty = Aig::new();
        assert!(collect_all(&empty, 10).unwrap().is_empty());
    }
}
