//! Index bookkeeping for antisymmetric tensors on R^7.
//!
//! A sorted index set is stored as a 7-bit mask. Components of a k-form are
//! kept in lexicographic order of their strictly increasing index tuples.

use std::sync::OnceLock;

pub const DIM: usize = 7;

struct Tables {
    by_degree: Vec<Vec<u8>>,
    rank: [usize; 128],
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let mut by_degree = vec![Vec::new(); DIM + 1];
        for (k, list) in by_degree.iter_mut().enumerate() {
            let mut cur = Vec::with_capacity(k);
            lex_subsets(k, 0, &mut cur, list);
        }
        let mut rank = [0usize; 128];
        for list in &by_degree {
            for (i, &m) in list.iter().enumerate() {
                rank[m as usize] = i;
            }
        }
        Tables { by_degree, rank }
    })
}

fn lex_subsets(k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<u8>) {
    if cur.len() == k {
        out.push(cur.iter().fold(0u8, |m, &i| m | (1 << i)));
        return;
    }
    for i in start..DIM {
        cur.push(i);
        lex_subsets(k, i + 1, cur, out);
        cur.pop();
    }
}

/// Masks of all k-subsets of {0..6}, in lexicographic tuple order.
pub fn subsets(k: usize) -> &'static [u8] {
    &tables().by_degree[k]
}

/// Position of a mask within [`subsets`] of its own degree.
#[inline]
pub fn rank(mask: u8) -> usize {
    tables().rank[mask as usize]
}

pub fn binom7(k: usize) -> usize {
    subsets(k).len()
}

/// Ascending indices contained in a mask.
pub fn indices(mask: u8) -> impl Iterator<Item = usize> {
    (0..DIM).filter(move |i| mask & (1 << i) != 0)
}

/// Sign of the permutation sorting `idx`, with the sorted mask; sign 0 on a repeat.
pub fn sort_sign(idx: &[usize]) -> (f64, u8) {
    let mut mask = 0u8;
    for &i in idx {
        let bit = 1u8 << i;
        if mask & bit != 0 {
            return (0.0, 0);
        }
        mask |= bit;
    }
    let mut inversions = 0;
    for i in 0..idx.len() {
        for j in i + 1..idx.len() {
            if idx[i] > idx[j] {
                inversions += 1;
            }
        }
    }
    (if inversions % 2 == 0 { 1.0 } else { -1.0 }, mask)
}

/// Sign of e^I ^ e^J relative to e^(I u J); 0 when the sets overlap.
#[inline]
pub fn wedge_sign(i: u8, j: u8) -> f64 {
    if i & j != 0 {
        return 0.0;
    }
    let mut swaps = 0u32;
    for b in 0..DIM {
        if j & (1 << b) != 0 {
            // elements of I above b must hop over it
            swaps += (i >> (b + 1)).count_ones();
        }
    }
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// A nonzero term of a wedge product table: out[o] += s * a[i] * b[j].
#[derive(Clone, Copy, Debug)]
pub struct WedgeTerm {
    pub i: usize,
    pub j: usize,
    pub o: usize,
    pub s: f64,
}

fn wedge_table(p: usize, q: usize) -> &'static [WedgeTerm] {
    static T: OnceLock<Vec<Vec<Vec<WedgeTerm>>>> = OnceLock::new();
    let all = T.get_or_init(|| {
        let mut all = vec![vec![Vec::new(); DIM + 1]; DIM + 1];
        for (p, row) in all.iter_mut().enumerate() {
            for (q, cell) in row.iter_mut().enumerate() {
                if p + q > DIM {
                    continue;
                }
                for (i, &mi) in subsets(p).iter().enumerate() {
                    for (j, &mj) in subsets(q).iter().enumerate() {
                        let s = wedge_sign(mi, mj);
                        if s != 0.0 {
                            cell.push(WedgeTerm { i, j, o: rank(mi | mj), s });
                        }
                    }
                }
            }
        }
        all
    });
    &all[p][q]
}

/// Wedge product of a p-form and a q-form in sorted-component storage.
pub fn wedge(p: usize, a: &[f64], q: usize, b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), binom7(p));
    debug_assert_eq!(b.len(), binom7(q));
    let mut out = vec![0.0; binom7(p + q)];
    for t in wedge_table(p, q) {
        out[t.o] += t.s * a[t.i] * b[t.j];
    }
    out
}

/// Interior product v ⌟ F of a vector with a p-form (Euclidean metric).
pub fn interior(v: &[f64], p: usize, f: &[f64]) -> Vec<f64> {
    debug_assert!(p >= 1);
    let mut out = vec![0.0; binom7(p - 1)];
    for (o, &ms) in subsets(p - 1).iter().enumerate() {
        let mut acc = 0.0;
        for (e, &ve) in v.iter().enumerate() {
            let bit = 1u8 << e;
            if ms & bit != 0 || ve == 0.0 {
                continue;
            }
            acc += ve * wedge_sign(bit, ms) * f[rank(ms | bit)];
        }
        out[o] = acc;
    }
    out
}

/// Complement of a mask within {0..6}.
#[inline]
pub fn complement(mask: u8) -> u8 {
    !mask & 0x7f
}
