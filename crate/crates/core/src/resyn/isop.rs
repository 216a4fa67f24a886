//! Irredundant sum-of-products via the Minato-Morreale recursion.

use crate::cut::{fill_var, TruthTable, VAR_MASKS};

/// A product term. `pos` and `neg` are bitmasks over variables; a variable
/// may appear in at most one of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Cube {
    pub pos: u32,
    pub neg: u32,
}

impl Cube {
    pub fn new(pos: u32, neg: u32) -> Cube {
        assert_eq!(pos & neg, 0, "variable in both polarities");
        Cube { pos, neg }
    }

    pub fn literal_count(&self) -> u32 {
        (self.pos | self.neg).count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.pos == 0 && self.neg == 0
    }

    pub fn eval(&self, assignment: usize) -> bool {
        let a = assignment as u32;
        self.pos & !a == 0 && self.neg & a == 0
    }

    /// Interleaved encoding used by the factoring code: bit `2v` is the
    /// positive literal of `v`, bit `2v + 1` the negative one.
    pub(crate) fn to_interleaved(self) -> u32 {
        let mut x = 0;
        for v in 0..16 {
            if self.pos >> v & 1 == 1 {
                x |= 1 << (2 * v);
            }
            if self.neg >> v & 1 == 1 {
                x |= 1 << (2 * v + 1);
            }
        }
        x
    }
}

/// A two-level cover. An empty cover is constant FALSE; a cover containing
/// the empty cube is constant TRUE.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SopCover {
    n_vars: usize,
    cubes: Vec<Cube>,
}

impl SopCover {
    pub fn new(n_vars: usize, cubes: Vec<Cube>) -> SopCover {
        SopCover { n_vars, cubes }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn literal_count(&self) -> u32 {
        self.cubes.iter().map(Cube::literal_count).sum()
    }

    /// True when the cover is syntactically constant.
    pub fn is_constant(&self) -> bool {
        self.cubes.is_empty() || self.cubes.iter().any(Cube::is_empty)
    }

    pub fn truth_table(&self) -> TruthTable {
        let n = self.n_vars;
        let nw = TruthTable::word_count(n);
        let mut acc = vec![0u64; nw];
        let mut var = vec![0u64; nw];
        for c in &self.cubes {
            let mut cube = vec![!0u64; nw];
            for v in 0..n {
                let (p, q) = (c.pos >> v & 1 == 1, c.neg >> v & 1 == 1);
                if !p && !q {
                    continue;
                }
                fill_var(&mut var, v);
                for (x, &y) in cube.iter_mut().zip(&var) {
                    *x &= if p { y } else { !y };
                }
            }
            for (a, x) in acc.iter_mut().zip(&cube) {
                *a |= x;
            }
        }
        TruthTable::from_words(n, acc)
    }
}

/// Full-width scratch table: at least one 64-bit word, with tables over
/// fewer than six variables replicated across the word.
type Words = Vec<u64>;

fn widen(tt: &TruthTable) -> Words {
    let n = tt.n_vars();
    if n >= 6 {
        return tt.words().to_vec();
    }
    let bits = 1u32 << n;
    let mut w = tt.words()[0] & ((1u64 << bits) - 1);
    let mut width = bits;
    while width < 64 {
        w |= w << width;
        width *= 2;
    }
    vec![w]
}

fn depends_on_word(w: u64, v: usize) -> bool {
    ((w & VAR_MASKS[v]) >> (1 << v)) != (w & !VAR_MASKS[v])
}

fn cofactor_word(w: u64, v: usize, positive: bool) -> u64 {
    let shift = 1 << v;
    if positive {
        let hi = w & VAR_MASKS[v];
        hi | (hi >> shift)
    } else {
        let lo = w & !VAR_MASKS[v];
        lo | (lo << shift)
    }
}

/// Highest variable at or above 6 and below `top` on which the multi-word
/// table depends; tables are halved per such variable.
fn top_word_var(t: &[u64], top: usize) -> Option<usize> {
    (6..top).rev().find(|&v| {
        let step = 1 << (v - 6);
        t[..2 * step].chunks(2 * step).any(|c| c[..step] != c[step..])
    })
}

struct Isop {
    cubes: Vec<Cube>,
}

impl Isop {
    fn tag(&mut self, start: usize, v: usize, positive: bool) {
        for c in &mut self.cubes[start..] {
            if positive {
                c.pos |= 1 << v;
            } else {
                c.neg |= 1 << v;
            }
        }
    }

    /// Single-word case: covers at least `on` and at most `ondc` using only
    /// variables below `top` (at most 6). Returns the function of the cubes
    /// it added.
    fn rec_word(&mut self, on: u64, ondc: u64, top: usize) -> u64 {
        if on == 0 {
            return 0;
        }
        if ondc == !0 {
            self.cubes.push(Cube::default());
            return !0;
        }
        let v = (0..top)
            .rev()
            .find(|&v| depends_on_word(on, v) || depends_on_word(ondc, v))
            .expect("non-constant bounds depend on some variable");
        let (on0, on1) = (cofactor_word(on, v, false), cofactor_word(on, v, true));
        let (dc0, dc1) = (cofactor_word(ondc, v, false), cofactor_word(ondc, v, true));
        let start0 = self.cubes.len();
        let r0 = self.rec_word(on0 & !dc1, dc0, v);
        self.tag(start0, v, false);
        let start1 = self.cubes.len();
        let r1 = self.rec_word(on1 & !dc0, dc1, v);
        self.tag(start1, v, true);
        let r2 = self.rec_word((on0 & !r0) | (on1 & !r1), dc0 & dc1, v);
        (r0 & !VAR_MASKS[v]) | (r1 & VAR_MASKS[v]) | r2
    }

    /// Multi-word case over `on.len()` words, which is at least the word
    /// count of `top` variables. The tables depend on no variable at or
    /// above `top`. The result has the same length as `on`.
    fn rec(&mut self, on: &[u64], ondc: &[u64], top: usize) -> Words {
        let v = top_word_var(on, top).max(top_word_var(ondc, top));
        let Some(v) = v else {
            let r = self.rec_word(on[0], ondc[0], top.min(6));
            return vec![r; on.len()];
        };
        if on.iter().all(|&w| w == 0) {
            return vec![0; on.len()];
        }
        let half = 1 << (v - 6);
        let (on0, on1) = (&on[..half], &on[half..2 * half]);
        let (dc0, dc1) = (&ondc[..half], &ondc[half..2 * half]);
        let and_not = |a: &[u64], b: &[u64]| -> Words { a.iter().zip(b).map(|(x, y)| x & !y).collect() };

        let start0 = self.cubes.len();
        let r0 = self.rec(&and_not(on0, dc1), dc0, v);
        self.tag(start0, v, false);
        let start1 = self.cubes.len();
        let r1 = self.rec(&and_not(on1, dc0), dc1, v);
        self.tag(start1, v, true);
        let rest: Words = (0..half).map(|i| (on0[i] & !r0[i]) | (on1[i] & !r1[i])).collect();
        let both: Words = dc0.iter().zip(dc1).map(|(a, b)| a & b).collect();
        let r2 = self.rec(&rest, &both, v);

        let mut out = Vec::with_capacity(on.len());
        while out.len() < on.len() {
            out.extend((0..half).map(|i| r0[i] | r2[i]));
            out.extend((0..half).map(|i| r1[i] | r2[i]));
        }
        out
    }
}

/// Irredundant SOP of a completely specified function. Cubes derived from
/// the negative cofactor come first, then the positive, then the shared.
pub fn isop(tt: &TruthTable) -> SopCover {
    let w = widen(tt);
    let mut st = Isop { cubes: Vec::new() };
    let got = st.rec(&w, &w, tt.n_vars());
    debug_assert_eq!(got, w);
    SopCover::new(tt.n_vars(), st.cubes)
}

/// ISOP of whichever polarity gives fewer cubes (then fewer literals).
/// Returns the cover and whether it describes the complement.
pub fn isop_best_polarity(tt: &TruthTable) -> (SopCover, bool) {
    let direct = isop(tt);
    let inverse = isop(&tt.not());
    let key = |c: &SopCover| (c.cubes().len(), c.literal_count());
    if key(&inverse) < key(&direct) {
        (inverse, true)
    } else {
        (direct, false)
    }
}
