//! The baseline refactor pass and the classifier-pruned pass.

use std::time::Instant;

use crate::aig::{Aig, NodeId};
use crate::cut::{Cut, CutBuilder, DEFAULT_MAX_LEAVES, MAX_TT_VARS};
use crate::features::{extract_features, FeatureVector};
use crate::model::{normalize_batch, Mlp, Row};
use crate::resyn::Resynthesizer;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PassParams {
    pub max_leaves: usize,
    /// Also commit candidates with zero gain.
    pub zero_cost: bool,
    /// Reject candidates whose root level exceeds the old root's level.
    pub preserve_level: bool,
    /// Nodes predicted below this probability are skipped by the pruned
    /// pass.
    pub threshold: f64,
}

impl Default for PassParams {
    fn default() -> Self {
        PassParams { max_leaves: DEFAULT_MAX_LEAVES, zero_cost: false, preserve_level: false, threshold: 0.5 }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PassStats {
    /// Nodes still live when their turn came.
    pub visited: usize,
    pub skipped: usize,
    pub attempted: usize,
    pub committed: usize,
    pub total_gain: i64,
    pub and_before: usize,
    pub and_after: usize,
    pub level_before: u32,
    pub level_after: u32,
    /// Seconds spent in the pass, classification included.
    pub wall_time: f64,
}

/// Features of one visited node and whether the baseline committed it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeLabel {
    pub node_id: NodeId,
    pub features: FeatureVector,
    pub label: bool,
}

/// Shared driver: visits the AND nodes that exist at pass start in
/// ascending id order. `attempt` decides whether a node is tried;
/// `record` sees every tried node with its cut and the commit decision.
fn drive(
    aig: &mut Aig,
    params: &PassParams,
    start: Instant,
    mut attempt: impl FnMut(NodeId) -> bool,
    mut record: impl FnMut(&Aig, &Cut, bool),
) -> Result<PassStats> {
    let max_leaves = params.max_leaves.clamp(2, MAX_TT_VARS);
    let mut stats = PassStats {
        and_before: aig.live_and_count(),
        level_before: aig.compute_levels(),
        ..PassStats::default()
    };
    let mut builder = CutBuilder::new();
    let mut resyn = Resynthesizer::new();
    let end = aig.num_nodes();
    for id in 0..end {
        if !aig.is_live_and(id) {
            continue;
        }
        stats.visited += 1;
        if !attempt(id) {
            stats.skipped += 1;
            continue;
        }
        stats.attempted += 1;
        let cut = builder.compute(aig, id, max_leaves)?;
        let cand = resyn.evaluate(aig, &cut)?;
        let accept = !cand.is_identity()
            && (cand.gain > 0 || (params.zero_cost && cand.gain == 0))
            && (!params.preserve_level || cand.new_level <= aig.level(id));
        record(aig, &cut, accept);
        if accept {
            stats.total_gain += cand.commit(aig)? as i64;
            stats.committed += 1;
        } else {
            cand.rollback(aig);
        }
    }
    stats.and_after = aig.live_and_count();
    stats.level_after = aig.depth();
    stats.wall_time = start.elapsed().as_secs_f64();
    Ok(stats)
}

/// One refactor pass: every node is resynthesised and committed on gain.
pub fn run_refactor(aig: &mut Aig, params: &PassParams) -> Result<PassStats> {
    drive(aig, params, Instant::now(), |_| true, |_, _, _| {})
}

/// Class probabilities for every live AND node of the current graph,
/// indexed by node id (NaN elsewhere). The features of the whole graph are
/// normalised together and classified as one batch.
pub fn classify_nodes(aig: &Aig, model: &Mlp, max_leaves: usize) -> Result<Vec<f64>> {
    let max_leaves = max_leaves.clamp(2, MAX_TT_VARS);
    let mut builder = CutBuilder::new();
    let mut ids = Vec::with_capacity(aig.live_and_count());
    let mut raw: Vec<Row> = Vec::with_capacity(aig.live_and_count());
    for id in aig.and_ids() {
        let cut = builder.compute(aig, id, max_leaves)?;
        ids.push(id);
        raw.push(extract_features(aig, &cut).to_f64());
    }
    let probs = model.predict(&normalize_batch(&raw));
    let mut out = vec![f64::NAN; aig.num_nodes()];
    for (id, p) in ids.into_iter().zip(probs) {
        out[id] = p;
    }
    Ok(out)
}

/// The pruned pass: classify all nodes on the initial graph, then run the
/// refactor loop skipping nodes predicted to fail.
pub fn run_elf(aig: &mut Aig, params: &PassParams, model: &Mlp) -> Result<PassStats> {
    let start = Instant::now();
    aig.compute_levels();
    let probs = classify_nodes(aig, model, params.max_leaves)?;
    let t = params.threshold;
    drive(aig, params, start, |id| probs[id] >= t, |_, _, _| {})
}

/// Runs the baseline pass and records, for each visited node, the features
/// of its cut at visit time and whether it was committed.
pub fn collect_labels(aig: &mut Aig, params: &PassParams) -> Result<(Vec<NodeLabel>, PassStats)> {
    let mut labels = Vec::new();
    let stats = drive(
        aig,
        params,
        Instant::now(),
        |_| true,
        |g, cut, accepted| {
            labels.push(NodeLabel { node_id: cut.root(), features: extract_features(g, cut), label: accepted })
        },
    )?;
    Ok((labels, stats))
}

/// Signed difference of `m_elf` relative to `m_abc`, in percent.
pub fn relative_difference(m_elf: f64, m_abc: f64) -> Result<f64> {
    if m_abc == 0.0 {
        return Err(Error::ZeroBaseline);
    }
    Ok((m_elf - m_abc) / m_abc * 100.0)
}
