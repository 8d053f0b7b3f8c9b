#![allow(dead_code)]

use cf_secrecy::lattice::QuadraticForm;
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

/// Coordinate bound for every vector no longer than `max_i G_ii`, which
/// covers all successive minima: `|a_i| <= sqrt(max G_jj * (G^-1)_ii)`.
pub fn minima_box(gram: &DMatrix<f64>) -> f64 {
    let inv = gram.clone().try_inverse().expect("invertible");
    let max_diag = (0..gram.nrows()).map(|i| gram[(i, i)]).fold(0.0, f64::max);
    (0..gram.nrows())
        .map(|i| (max_diag * inv[(i, i)]).sqrt())
        .fold(0.0, f64::max)
}

pub fn gram_of<F: QuadraticForm>(form: &F) -> DMatrix<f64> {
    let b = form.basis().expect("basis");
    b.transpose() * b
}

/// Gaussian elimination over the rationals without row switching, on the
/// columns of `rows` taken in `order`. Succeeds iff every pivot is nonzero.
pub fn eliminates_without_swaps(rows: &[Vec<i64>], order: &[usize]) -> bool {
    let k = rows.len();
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| {
            order
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(r[c])))
                .collect()
        })
        .collect();
    for p in 0..k {
        if m[p][p].is_zero() {
            return false;
        }
        for r in p + 1..k {
            let f = &m[r][p] / &m[p][p];
            for c in p..k {
                let sub = &f * &m[p][c];
                m[r][c] -= sub;
            }
        }
    }
    true
}

pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out
}

/// Rank over the rationals.
pub fn rational_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|&x| BigRational::from_integer(BigInt::from(x)))
                .collect()
        })
        .collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = &m[r][c] / &m[rank][c];
                for j in c..cols {
                    let sub = &f * &m[rank][j];
                    m[r][j] -= sub;
                }
            }
        }
        rank += 1;
    }
    rank
}
