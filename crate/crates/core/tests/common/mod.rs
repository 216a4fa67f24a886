//! Random graph generation shared by the integration tests.

#![allow(dead_code)]

use elf_core::{Aig, Lit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random graph with `n_pis` inputs and about `n_gates` AND nodes. Some
/// gates are added without hashing, so the graph carries redundancy for
/// the refactor pass to find. Gates prefer recent fanins, which keeps the
/// graph deep and reconvergent.
pub fn random_aig(seed: u64, n_pis: usize, n_gates: usize, n_pos: usize) -> Aig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut aig = Aig::new();
    let mut pool: Vec<Lit> = (0..n_pis).map(|_| aig.add_input()).collect();
    for _ in 0..n_gates {
        let pick = |rng: &mut ChaCha8Rng, pool: &[Lit]| {
            let n = pool.len();
            let i = if rng.random_bool(0.6) { n - 1 - rng.random_range(0..n.min(8)) } else { rng.random_range(0..n) };
            pool[i].complement_if(rng.random_bool(0.5))
        };
        let a = pick(&mut rng, &pool);
        let b = pick(&mut rng, &pool);
        if a.node() == b.node() {
            continue;
        }
        let g = if rng.random_bool(0.5) { aig.add_and_raw(a, b) } else { aig.strash_and(a, b) };
        if !g.is_const() && !pool.contains(&g.regular()) {
            pool.push(g.regular());
        }
    }
    let and_lits: Vec<Lit> = pool.iter().copied().filter(|l| aig.is_live_and(l.node())).collect();
    for _ in 0..n_pos {
        let src = if and_lits.is_empty() { &pool } else { &and_lits };
        let l = src[src.len() - 1 - rng.random_range(0..src.len().min(4))];
        aig.add_output(l.complement_if(rng.random_bool(0.3)));
    }
    aig.sweep_dangling();
    aig
}

/// Evaluates output `o` under one assignment by recursion over the graph.
pub fn eval_naive(aig: &Aig, inputs: &[bool], lit: Lit) -> bool {
    fn node(aig: &Aig, inputs: &[bool], id: usize) -> bool {
        if id == 0 {
            return false;
        }
        if let Some(k) = aig.inputs().iter().position(|&p| p == id) {
            return inputs[k];
        }
        let [a, b] = aig.node(id).fanins();
        node(aig, inputs, a.node()) != a.is_complemented() && node(aig, inputs, b.node()) != b.is_complemented()
    }
    node(aig, inputs, lit.node()) != lit.is_complemented()
}
