//! The refactor kernel: cut function to ISOP, ISOP to factored form, and
//! factored form back into the graph with an exact gain.

mod factor;
mod isop;

pub use factor::{factor, FactorNode, FactorTree};
pub use isop::{isop, isop_best_polarity, Cube, SopCover};

use crate::aig::{Aig, Lit, NodeId};
use crate::cut::{Cut, CutSim, TruthTable, MAX_TT_VARS};
use crate::{Error, Result};

/// Builds `tree` through structural hashing, mapping variable `i` to
/// `leaf_lits[i]`. Returns the root literal and the number of AND nodes
/// created (strash hits are free).
pub fn build_factored_subgraph(aig: &mut Aig, tree: &FactorTree, leaf_lits: &[Lit]) -> (Lit, usize) {
    let before = aig.num_nodes();
    let mut lits: Vec<Option<Lit>> = vec![None; tree.nodes().len()];
    // Post-order over the nodes reachable from the root.
    let mut stack = vec![(tree.root(), false)];
    while let Some((i, expanded)) = stack.pop() {
        if lits[i].is_some() {
            continue;
        }
        let node = tree.nodes()[i];
        let lit = match node {
            FactorNode::Leaf { var, negated } => leaf_lits[var].complement_if(negated),
            FactorNode::And(a, b) | FactorNode::Or(a, b) => {
                if !expanded {
                    stack.push((i, true));
                    stack.push((b, false));
                    stack.push((a, false));
                    continue;
                }
                let (x, y) = (lits[a].unwrap(), lits[b].unwrap());
                if matches!(node, FactorNode::And(..)) {
                    aig.strash_and(x, y)
                } else {
                    aig.strash_or(x, y)
                }
            }
        };
        lits[i] = Some(lit);
    }
    (lits[tree.root()].unwrap(), aig.num_nodes() - before)
}

/// A resynthesised structure already built into the graph, awaiting a
/// commit or rollback decision.
#[derive(Debug)]
#[must_use = "a candidate must be committed or rolled back"]
pub struct Candidate {
    pub new_root: Lit,
    /// Nodes freed by the replacement minus nodes it adds.
    pub gain: isize,
    pub new_level: u32,
    /// Live AND nodes created for the candidate.
    pub n_new: usize,
    root: NodeId,
    mark: NodeId,
    live_before: usize,
}

impl Candidate {
    pub fn root(&self) -> NodeId {
        self.root
    }

    /// The candidate is the old root itself.
    pub fn is_identity(&self) -> bool {
        self.new_root == Lit::new(self.root, false)
    }

    /// Replaces the root and returns the realised reduction in live AND
    /// count, which always equals `gain`.
    pub fn commit(self, aig: &mut Aig) -> Result<isize> {
        if self.is_identity() {
            return Ok(0);
        }
        aig.replace_node(self.root, self.new_root)?;
        Ok(self.live_before as isize - aig.live_and_count() as isize)
    }

    /// Removes every node the candidate created; the graph is restored
    /// exactly.
    pub fn rollback(self, aig: &mut Aig) {
        aig.truncate_nodes(self.mark);
    }
}

/// Reusable scratch state for candidate evaluation.
#[derive(Default)]
pub struct Resynthesizer {
    sim: CutSim,
}

impl Resynthesizer {
    pub fn new() -> Resynthesizer {
        Resynthesizer::default()
    }

    /// Resynthesises the cut function and builds it speculatively.
    pub fn evaluate(&mut self, aig: &mut Aig, cut: &Cut) -> Result<Candidate> {
        let n = cut.leaves().len();
        if n > MAX_TT_VARS {
            return Err(Error::TooManyLeaves(n));
        }
        let root = cut.root();
        let nw = TruthTable::word_count(n);
        let tt = TruthTable::from_words(n, self.sim.run(aig, cut, nw).to_vec());
        let leaf_lits: Vec<Lit> = cut.leaves().iter().map(|&l| Lit::new(l, false)).collect();

        let mark = aig.num_nodes();
        let live_before = aig.live_and_count();
        let new_root = if tt.is_const0() {
            Lit::FALSE
        } else if tt.is_const1() {
            Lit::TRUE
        } else if let Some(lit) = single_literal(&tt, &leaf_lits) {
            lit
        } else {
            let (cover, compl) = isop_best_polarity(&tt);
            let tree = factor(&cover)?;
            let (lit, _) = build_factored_subgraph(aig, &tree, &leaf_lits);
            lit.complement_if(compl)
        };

        let r = new_root.node();
        let keep = (r >= mark).then_some(r);
        aig.sweep_speculative(mark, keep);
        let n_new = (mark..aig.num_nodes()).filter(|&i| aig.is_live_and(i)).count();
        let gain = if r == root {
            0
        } else {
            let keep = aig.node(r).is_and().then_some(r);
            aig.dying_count(root, keep) as isize - n_new as isize
        };
        Ok(Candidate {
            new_root,
            gain,
            new_level: aig.level(r),
            n_new,
            root,
            mark,
            live_before,
        })
    }
}

/// Evaluates one cut with fresh scratch state.
pub fn eval_refactor(aig: &mut Aig, cut: &Cut) -> Result<Candidate> {
    Resynthesizer::new().evaluate(aig, cut)
}

/// The leaf literal the table equals, if it is a projection.
fn single_literal(tt: &TruthTable, leaf_lits: &[Lit]) -> Option<Lit> {
    let n = tt.n_vars();
    (0..n).find_map(|v| {
        let var = TruthTable::var(n, v);
        if *tt == var {
            Some(leaf_lits[v])
        } else if *tt == var.not() {
            Some(!leaf_lits[v])
        } else {
            None
        }
    })
}
