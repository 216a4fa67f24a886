//! Equivalence checking by word-parallel simulation.
//!
//! Inputs and outputs are paired by position. Patterns are processed in
//! blocks so memory stays proportional to the graph, not to the pattern
//! count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aig::{Aig, Lit};
use crate::cut::fill_var;
use crate::{Error, Result};

/// Default number of random patterns for equivalence checks.
pub const DEFAULT_PATTERNS: usize = 65536;

/// Inputs above this count cannot be checked exhaustively.
pub const MAX_EXHAUSTIVE_INPUTS: usize = 16;

/// Words simulated per block.
const BLOCK_WORDS: usize = 16;

/// Input assignments, 64 per word. Stored input-major: the words of input
/// `i` are contiguous.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimPattern {
    n_inputs: usize,
    n_words: usize,
    words: Vec<u64>,
}

impl SimPattern {
    pub fn from_words(n_inputs: usize, n_words: usize, words: Vec<u64>) -> SimPattern {
        assert_eq!(words.len(), n_inputs * n_words);
        SimPattern { n_inputs, n_words, words }
    }

    /// At least `n_patterns` pseudorandom assignments, rounded up to a
    /// multiple of 64. Deterministic per seed.
    pub fn random(n_inputs: usize, n_patterns: usize, seed: u64) -> SimPattern {
        let n_words = n_patterns.div_ceil(64).max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let words = (0..n_inputs * n_words).map(|_| rng.random()).collect();
        SimPattern { n_inputs, n_words, words }
    }

    /// All `2^n` assignments; pattern `k` sets input `i` to bit `i` of `k`.
    /// Fewer than 64 assignments are padded by repetition.
    pub fn exhaustive(n_inputs: usize) -> Result<SimPattern> {
        if n_inputs > MAX_EXHAUSTIVE_INPUTS {
            return Err(Error::TooManyInputs(n_inputs));
        }
        let n_words = (1usize << n_inputs).div_ceil(64);
        let mut words = vec![0u64; n_inputs * n_words];
        for i in 0..n_inputs {
            fill_var(&mut words[i * n_words..(i + 1) * n_words], i);
        }
        Ok(SimPattern { n_inputs, n_words, words })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_words(&self) -> usize {
        self.n_words
    }

    pub fn n_patterns(&self) -> usize {
        self.n_words * 64
    }

    pub fn input(&self, i: usize) -> &[u64] {
        &self.words[i * self.n_words..(i + 1) * self.n_words]
    }

    /// The input assignment of pattern `k`.
    pub fn assignment(&self, k: usize) -> Vec<bool> {
        (0..self.n_inputs)
            .map(|i| self.input(i)[k / 64] >> (k % 64) & 1 == 1)
            .collect()
    }
}

/// Reusable simulator for one graph.
struct Simulator {
    order: Vec<usize>,
    values: Vec<u64>,
    width: usize,
}

impl Simulator {
    fn new(aig: &Aig) -> Simulator {
        Simulator { order: aig.topo_order(), values: Vec::new(), width: 0 }
    }

    /// Simulates words `[start, start + width)` of the pattern set.
    fn run(&mut self, aig: &Aig, pat: &SimPattern, start: usize, width: usize) {
        self.width = width;
        self.values.clear();
        self.values.resize(aig.num_nodes() * width, 0);
        for (i, &pi) in aig.inputs().iter().enumerate() {
            self.values[pi * width..(pi + 1) * width].copy_from_slice(&pat.input(i)[start..start + width]);
        }
        for &id in &self.order {
            let [a, b] = aig.node(id).fanins();
            for w in 0..width {
                let v = self.lit(a, w) & self.lit(b, w);
                self.values[id * width + w] = v;
            }
        }
    }

    #[inline]
    fn lit(&self, l: Lit, w: usize) -> u64 {
        let v = self.values[l.node() * self.width + w];
        if l.is_complemented() {
            !v
        } else {
            v
        }
    }
}

/// Output words for every primary output, in output order.
pub fn simulate(aig: &Aig, pat: &SimPattern) -> Result<Vec<Vec<u64>>> {
    if pat.n_inputs() != aig.num_inputs() {
        return Err(Error::InputCountMismatch { expected: aig.num_inputs(), got: pat.n_inputs() });
    }
    let mut sim = Simulator::new(aig);
    let mut out = vec![Vec::with_capacity(pat.n_words()); aig.num_outputs()];
    for start in (0..pat.n_words()).step_by(BLOCK_WORDS) {
        let width = BLOCK_WORDS.min(pat.n_words() - start);
        sim.run(aig, pat, start, width);
        for (o, &lit) in aig.outputs().iter().enumerate() {
            out[o].extend((0..width).map(|w| sim.lit(lit, w)));
        }
    }
    Ok(out)
}

/// Outcome of an equivalence check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// No pattern distinguished the graphs.
    Equivalent,
    /// `inputs` drives output `output` to different values.
    Counterexample { inputs: Vec<bool>, output: usize },
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent)
    }
}

fn check_interface(a: &Aig, b: &Aig) -> Result<()> {
    if a.num_inputs() != b.num_inputs() || a.num_outputs() != b.num_outputs() {
        return Err(Error::InterfaceMismatch(format!(
            "{}/{} vs {}/{} inputs/outputs",
            a.num_inputs(),
            a.num_outputs(),
            b.num_inputs(),
            b.num_outputs()
        )));
    }
    Ok(())
}

fn compare(a: &Aig, b: &Aig, pat: &SimPattern) -> Result<Verdict> {
    check_interface(a, b)?;
    let (mut sa, mut sb) = (Simulator::new(a), Simulator::new(b));
    for start in (0..pat.n_words()).step_by(BLOCK_WORDS) {
        let width = BLOCK_WORDS.min(pat.n_words() - start);
        sa.run(a, pat, start, width);
        sb.run(b, pat, start, width);
        for (o, (&la, &lb)) in a.outputs().iter().zip(b.outputs()).enumerate() {
            for w in 0..width {
                let diff = sa.lit(la, w) ^ sb.lit(lb, w);
                if diff != 0 {
                    let k = (start + w) * 64 + diff.trailing_zeros() as usize;
                    return Ok(Verdict::Counterexample { inputs: pat.assignment(k), output: o });
                }
            }
        }
    }
    Ok(Verdict::Equivalent)
}

/// Compares all outputs over `n_patterns` random assignments.
pub fn check_equiv_random(a: &Aig, b: &Aig, n_patterns: usize, seed: u64) -> Result<Verdict> {
    check_interface(a, b)?;
    compare(a, b, &SimPattern::random(a.num_inputs(), n_patterns, seed))
}

/// Compares all outputs over every input assignment.
pub fn check_equiv_exhaustive(a: &Aig, b: &Aig) -> Result<Verdict> {
    check_interface(a, b)?;
    compare(a, b, &SimPattern::exhaustive(a.num_inputs())?)
}
