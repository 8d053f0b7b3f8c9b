//! Integer coefficient search: the `K` linearly independent integer vectors
//! of smallest norm under a positive-definite quadratic form.
//!
//! The search runs LLL on a real basis of the lattice and then a
//! Fincke-Pohst enumeration inside the ellipsoid of the current best
//! candidate, once per successive minimum.

use std::cmp::Ordering;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{quad_form, EffectiveMatrix};

pub const DEFAULT_DELTA: f64 = 0.99;
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;
const BRUTE_FORCE_MAX_POINTS: u64 = 20_000_000;

/// A positive-definite quadratic form on `Z^K`, given by a real basis
/// (`norm_sq(a) = |B a|^2`).
pub trait QuadraticForm {
    fn dim(&self) -> usize;
    fn norm_sq(&self, a: &[i64]) -> f64;
    /// Columns are a real basis of the lattice.
    fn basis(&self) -> Result<DMatrix<f64>>;
}

/// A form given only by its Gram matrix.
#[derive(Clone, Debug)]
pub struct GramForm {
    gram: DMatrix<f64>,
}

impl GramForm {
    pub fn new(gram: DMatrix<f64>) -> Result<Self> {
        let n = gram.nrows();
        if gram.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: gram.ncols(),
            });
        }
        if gram.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("gram"));
        }
        let asym = (&gram - gram.transpose()).amax();
        if asym > 1e-10 * gram.amax().max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        if gram.clone().cholesky().is_none() {
            return Err(Error::NearSingular(0.0));
        }
        Ok(Self { gram })
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }
}

impl QuadraticForm for GramForm {
    fn dim(&self) -> usize {
        self.gram.nrows()
    }

    fn norm_sq(&self, a: &[i64]) -> f64 {
        quad_form(&self.gram, a)
    }

    fn basis(&self) -> Result<DMatrix<f64>> {
        let chol = self
            .gram
            .clone()
            .cholesky()
            .ok_or(Error::NearSingular(0.0))?;
        Ok(chol.l().transpose())
    }
}

impl QuadraticForm for EffectiveMatrix {
    fn dim(&self) -> usize {
        EffectiveMatrix::dim(self)
    }

    fn norm_sq(&self, a: &[i64]) -> f64 {
        EffectiveMatrix::norm_sq(self, a)
    }

    fn basis(&self) -> Result<DMatrix<f64>> {
        Ok(self.f().clone())
    }
}

/// Rows `a_1..a_K`, sorted by non-decreasing norm.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientMatrix {
    pub rows: Vec<Vec<i64>>,
    pub norms: Vec<f64>,
    /// Set when the enumeration budget ran out; rows are then the best found,
    /// still independent, but not guaranteed to be the successive minima.
    pub degraded: bool,
    pub nodes: u64,
}

impl CoefficientMatrix {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }
}

/// Flips `a` so that its first nonzero entry is positive.
pub fn canonicalize(a: &mut [i64]) {
    if let Some(&first) = a.iter().find(|&&x| x != 0) {
        if first < 0 {
            a.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Candidate order: norm, then lexicographic on the canonical vector.
fn candidate_cmp(na: f64, a: &[i64], nb: f64, b: &[i64]) -> Ordering {
    na.total_cmp(&nb).then_with(|| a.cmp(b))
}

/// Incremental rank test over the rationals (fraction-free, gcd-normalized
/// rows in echelon form).
#[derive(Clone, Debug, Default)]
pub struct IndependenceTracker {
    rows: Vec<(usize, Vec<i128>)>,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn normalize(v: &mut [i128]) {
    let g = v.iter().fold(0, |g, &x| gcd(g, x));
    if g > 1 {
        v.iter_mut().for_each(|x| *x /= g);
    }
}

impl IndependenceTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, a: &[i64]) -> Vec<i128> {
        let mut v: Vec<i128> = a.iter().map(|&x| x as i128).collect();
        for (pivot, row) in &self.rows {
            let c = v[*pivot];
            if c == 0 {
                continue;
            }
            let p = row[*pivot];
            for (x, r) in v.iter_mut().zip(row) {
                *x = *x * p - r * c;
            }
            normalize(&mut v);
        }
        v
    }

    pub fn is_independent(&self, a: &[i64]) -> bool {
        self.reduce(a).iter().any(|&x| x != 0)
    }

    /// Adds `a` if it is independent of the tracked vectors.
    pub fn insert(&mut self, a: &[i64]) -> bool {
        let v = self.reduce(a);
        match v.iter().position(|&x| x != 0) {
            Some(pivot) => {
                self.rows.push((pivot, v));
                true
            }
            None => false,
        }
    }
}

/// Gram-Schmidt data for a list of real basis vectors.
struct Gso {
    mu: Vec<Vec<f64>>,
    bstar: Vec<Vec<f64>>,
    norms: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Gso {
    fn new(b: &[Vec<f64>]) -> Self {
        let n = b.len();
        let mut g = Gso {
            mu: vec![vec![0.0; n]; n],
            bstar: vec![Vec::new(); n],
            norms: vec![0.0; n],
        };
        for k in 0..n {
            g.update_row(b, k);
        }
        g
    }

    fn update_row(&mut self, b: &[Vec<f64>], k: usize) {
        let mut v = b[k].clone();
        for j in 0..k {
            let m = dot(&b[k], &self.bstar[j]) / self.norms[j];
            self.mu[k][j] = m;
            for (x, y) in v.iter_mut().zip(&self.bstar[j]) {
                *x -= m * y;
            }
        }
        self.mu[k][k] = 1.0;
        self.norms[k] = dot(&v, &v);
        self.bstar[k] = v;
    }
}

/// A reduced basis: real vectors plus their integer coordinates in the
/// original basis.
struct Reduced {
    vectors: Vec<Vec<f64>>,
    coeffs: Vec<Vec<i64>>,
}

fn lll_on_basis(basis: &DMatrix<f64>, delta: f64) -> Result<Reduced> {
    if !(delta > 0.25 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "LLL delta must lie in (1/4, 1), got {delta}"
        )));
    }
    let n = basis.ncols();
    let mut b: Vec<Vec<f64>> = (0..n)
        .map(|j| basis.column(j).iter().copied().collect())
        .collect();
    let mut u: Vec<Vec<i64>> = (0..n)
        .map(|j| (0..n).map(|i| i64::from(i == j)).collect())
        .collect();
    if n <= 1 {
        return Ok(Reduced {
            vectors: b,
            coeffs: u,
        });
    }
    let mut gso = Gso::new(&b);
    if gso.norms.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::NearSingular(0.0));
    }
    let mut k = 1;
    let mut iterations = 0u64;
    while k < n {
        iterations += 1;
        if iterations > 1_000_000 {
            break;
        }
        // size reduction, repeated until it sticks in floating point
        for _ in 0..64 {
            let mut changed = false;
            for j in (0..k).rev() {
                let q = gso.mu[k][j].round();
                if q != 0.0 {
                    changed = true;
                    let qi = q as i64;
                    let (bj, uj) = (b[j].clone(), u[j].clone());
                    for (x, y) in b[k].iter_mut().zip(&bj) {
                        *x -= q * y;
                    }
                    for (x, y) in u[k].iter_mut().zip(&uj) {
                        *x -= qi * y;
                    }
                    for i in 0..j {
                        gso.mu[k][i] -= q * gso.mu[j][i];
                    }
                    gso.mu[k][j] -= q;
                }
            }
            if !changed {
                break;
            }
            gso.update_row(&b, k);
            if gso.mu[k][..k].iter().all(|m| m.abs() <= 0.51) {
                break;
            }
        }
        let m = gso.mu[k][k - 1];
        if gso.norms[k] >= (delta - m * m) * gso.norms[k - 1] {
            k += 1;
        } else {
            b.swap(k, k - 1);
            u.swap(k, k - 1);
            for i in (k - 1)..n {
                gso.update_row(&b, i);
            }
            k = (k - 1).max(1);
        }
    }
    Ok(Reduced {
        vectors: b,
        coeffs: u,
    })
}

/// LLL reduction with respect to the inner product defined by `gram`.
/// Returns the reduced basis as integer coordinate rows.
pub fn lll_reduce(gram: &DMatrix<f64>, delta: f64) -> Result<Vec<Vec<i64>>> {
    let form = GramForm::new(gram.clone())?;
    Ok(lll_on_basis(&form.basis()?, delta)?.coeffs)
}

/// Checks the size-reduction and Lovasz conditions of `rows` under `gram`
/// (with a small floating slack).
pub fn is_lll_reduced(gram: &DMatrix<f64>, rows: &[Vec<i64>], delta: f64) -> bool {
    let n = rows.len();
    // Gram of the candidate basis
    let gb = DMatrix::from_fn(n, n, |i, j| {
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                s += rows[i][p] as f64 * gram[(p, q)] * rows[j][q] as f64;
            }
        }
        s
    });
    let mut mu = vec![vec![0.0; n]; n];
    let mut bn = vec![0.0; n];
    for i in 0..n {
        for j in 0..i {
            let mut s = gb[(i, j)];
            for p in 0..j {
                s -= mu[j][p] * mu[i][p] * bn[p];
            }
            mu[i][j] = s / bn[j];
        }
        let mut s = gb[(i, i)];
        for p in 0..i {
            s -= mu[i][p] * mu[i][p] * bn[p];
        }
        bn[i] = s;
    }
    let slack = 1e-6;
    for i in 0..n {
        for j in 0..i {
            if mu[i][j].abs() > 0.5 + slack {
                return false;
            }
        }
        if i > 0 && bn[i] < (delta - mu[i][i - 1].powi(2)) * bn[i - 1] * (1.0 - slack) {
            return false;
        }
    }
    true
}

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub delta: f64,
    pub node_budget: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

struct Enumerator<'a, F: QuadraticForm> {
    form: &'a F,
    gso: &'a Gso,
    coeffs: &'a [Vec<i64>],
    chosen: &'a IndependenceTracker,
    x: Vec<i64>,
    radius_sq: f64,
    best: (f64, Vec<i64>),
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

const PRUNE_SLACK: f64 = 1e-6;

impl<F: QuadraticForm> Enumerator<'_, F> {
    fn original(&self) -> Vec<i64> {
        let n = self.x.len();
        let mut a = vec![0i64; n];
        for (j, &xj) in self.x.iter().enumerate() {
            if xj != 0 {
                for (ai, cj) in a.iter_mut().zip(&self.coeffs[j]) {
                    *ai += xj * cj;
                }
            }
        }
        canonicalize(&mut a);
        a
    }

    fn leaf(&mut self) {
        let a = self.original();
        if !self.chosen.is_independent(&a) {
            return;
        }
        let norm = self.form.norm_sq(&a);
        if candidate_cmp(norm, &a, self.best.0, &self.best.1) == Ordering::Less {
            self.best = (norm, a);
            self.radius_sq = norm * (1.0 + PRUNE_SLACK);
        }
    }

    /// Visits level `i` given the partial squared distance of the levels
    /// above. `upper_zero` is true while every coordinate above is zero;
    /// those branches only take non-negative values so that exactly one of
    /// `+v`/`-v` is visited.
    fn visit(&mut self, i: usize, partial: f64, upper_zero: bool) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        let n = self.x.len();
        let mut center = 0.0;
        for j in (i + 1)..n {
            center -= self.gso.mu[j][i] * self.x[j] as f64;
        }
        let r = self.gso.norms[i];
        let try_value = |this: &mut Self, v: i64| -> bool {
            let d = v as f64 - center;
            let dist = partial + r * d * d;
            if dist > this.radius_sq {
                return false;
            }
            this.x[i] = v;
            let zero_now = upper_zero && v == 0;
            if i == 0 {
                if !zero_now {
                    this.leaf();
                }
            } else {
                this.visit(i - 1, dist, zero_now);
            }
            this.x[i] = 0;
            true
        };
        let c = center.round() as i64;
        if upper_zero {
            // center is 0 here; walk 0, 1, 2, ...
            let mut v = 0i64;
            while try_value(self, v) {
                v += 1;
                if self.exhausted {
                    break;
                }
            }
        } else {
            let mut up = c;
            let mut down = c - 1;
            let mut up_open = true;
            let mut down_open = true;
            while (up_open || down_open) && !self.exhausted {
                if up_open {
                    up_open = try_value(self, up);
                    up += 1;
                }
                if down_open && !self.exhausted {
                    down_open = try_value(self, down);
                    down -= 1;
                }
            }
        }
    }
}

/// Successive minima of the lattice defined by `form`: LLL followed by
/// per-minimum Fincke-Pohst enumeration.
pub fn shortest_independent_vectors<F: QuadraticForm>(
    form: &F,
    opts: &SearchOptions,
) -> Result<CoefficientMatrix> {
    let n = form.dim();
    if n == 0 {
        return Err(Error::NoUsers);
    }
    let reduced = lll_on_basis(&form.basis()?, opts.delta)?;
    let gso = Gso::new(&reduced.vectors);
    if gso.norms.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::NearSingular(0.0));
    }
    let mut chosen = IndependenceTracker::new();
    let mut rows = Vec::with_capacity(n);
    let mut norms = Vec::with_capacity(n);
    let mut nodes = 0u64;
    let mut degraded = false;
    for _ in 0..n {
        // start from the shortest reduced basis vector still independent
        let mut start: Option<(f64, Vec<i64>)> = None;
        for c in &reduced.coeffs {
            let mut a = c.clone();
            canonicalize(&mut a);
            if !chosen.is_independent(&a) {
                continue;
            }
            let norm = form.norm_sq(&a);
            let better = match &start {
                None => true,
                Some((bn, b)) => candidate_cmp(norm, &a, *bn, b) == Ordering::Less,
            };
            if better {
                start = Some((norm, a));
            }
        }
        let start = start.ok_or(Error::RankDeficient)?;
        let mut en = Enumerator {
            form,
            gso: &gso,
            coeffs: &reduced.coeffs,
            chosen: &chosen,
            x: vec![0; n],
            radius_sq: start.0 * (1.0 + PRUNE_SLACK),
            best: start,
            nodes: 0,
            budget: opts.node_budget.saturating_sub(nodes),
            exhausted: false,
        };
        en.visit(n - 1, 0.0, true);
        nodes += en.nodes;
        degraded |= en.exhausted;
        let (norm, a) = en.best;
        chosen.insert(&a);
        rows.push(a);
        norms.push(norm);
    }
    Ok(CoefficientMatrix {
        rows,
        norms,
        degraded,
        nodes,
    })
}

/// Exact successive minima over the box `[-radius, radius]^K`. Test oracle.
pub fn brute_force_minima<F: QuadraticForm>(form: &F, radius: i64) -> Result<CoefficientMatrix> {
    let n = form.dim();
    if n == 0 {
        return Err(Error::NoUsers);
    }
    let side = (2 * radius + 1) as u64;
    let points = side.checked_pow(n as u32).unwrap_or(u64::MAX);
    if radius < 1 || n > 4 || radius > 32 || points > BRUTE_FORCE_MAX_POINTS {
        return Err(Error::OverBudget { dim: n, radius });
    }
    let mut chosen = IndependenceTracker::new();
    let mut rows = Vec::with_capacity(n);
    let mut norms = Vec::with_capacity(n);
    let mut a = vec![0i64; n];
    for _ in 0..n {
        let mut best: Option<(f64, Vec<i64>)> = None;
        for idx in 0..points {
            let mut r = idx;
            for ai in a.iter_mut().rev() {
                *ai = (r % side) as i64 - radius;
                r /= side;
            }
            match a.iter().find(|&&x| x != 0) {
                Some(&f) if f > 0 => {}
                _ => continue,
            }
            if !chosen.is_independent(&a) {
                continue;
            }
            let norm = form.norm_sq(&a);
            let better = match &best {
                None => true,
                Some((bn, b)) => candidate_cmp(norm, &a, *bn, b) == Ordering::Less,
            };
            if better {
                best = Some((norm, a.clone()));
            }
        }
        let (norm, v) = best.ok_or(Error::RankDeficient)?;
        chosen.insert(&v);
        rows.push(v);
        norms.push(norm);
    }
    Ok(CoefficientMatrix {
        rows,
        norms,
        degraded: false,
        nodes: points * n as u64,
    })
}

/// Exact integer determinant (Bareiss).
pub fn integer_det(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gram(n: usize, v: &[f64]) -> GramForm {
        GramForm::new(DMatrix::from_row_slice(n, n, v)).unwrap()
    }

    #[test]
    fn canonical_sign() {
        let mut a = vec![0, -2, 3];
        canonicalize(&mut a);
        assert_eq!(a, vec![0, 2, -3]);
    }

    #[test]
    fn tracker_rank() {
        let mut t = IndependenceTracker::new();
        assert!(t.insert(&[1, 2, 3]));
        assert!(t.insert(&[2, 4, 7]));
        assert!(!t.is_independent(&[3, 6, 10]));
        assert!(t.is_independent(&[0, 1, 0]));
        assert_eq!(t.rank(), 2);
    }

    #[test]
    fn det_small() {
        assert_eq!(integer_det(&[vec![1, 2], vec![3, 4]]), -2);
        assert_eq!(integer_det(&[vec![0, 1], vec![1, 0]]), -1);
        assert_eq!(
            integer_det(&[vec![2, 0, 1], vec![1, 3, 2], vec![1, 1, 1]]),
            2 * (3 - 2) - 0 + (1 - 3)
        );
        assert_eq!(integer_det(&[vec![1, 2], vec![2, 4]]), 0);
    }

    #[test]
    fn lll_identity() {
        let rows = lll_reduce(&DMatrix::identity(3, 3), DEFAULT_DELTA).unwrap();
        let mut sorted = rows.clone();
        sorted.iter_mut().for_each(|r| canonicalize(r));
        sorted.sort();
        assert_eq!(sorted, vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]);
    }

    #[test]
    fn lll_hexagonal() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let rows = lll_reduce(&g, DEFAULT_DELTA).unwrap();
        for r in &rows {
            assert_eq!(quad_form(&g, r), 2.0);
        }
        assert!(is_lll_reduced(&g, &rows, DEFAULT_DELTA));
    }

    #[test]
    fn lll_diagonal_scales_do_not_mix() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e6]);
        let mut rows = lll_reduce(&g, DEFAULT_DELTA).unwrap();
        rows.iter_mut().for_each(|r| canonicalize(r));
        assert_eq!(rows, vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn lll_rejects_bad_input() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(lll_reduce(&g, DEFAULT_DELTA).is_err());
        assert!(lll_reduce(&DMatrix::identity(2, 2), 0.2).is_err());
    }

    #[test]
    fn lll_is_unimodular_and_reduced() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let k = rng.random_range(2..=6);
            let b = DMatrix::from_fn(k, k, |_, _| rng.random_range(-10.0..10.0));
            let g = b.transpose() * &b;
            let rows = lll_reduce(&g, DEFAULT_DELTA).unwrap();
            assert_eq!(integer_det(&rows).abs(), 1);
            assert!(is_lll_reduced(&g, &rows, DEFAULT_DELTA));
        }
    }

    #[test]
    fn search_identity() {
        let form = GramForm::new(DMatrix::identity(3, 3)).unwrap();
        let cm = shortest_independent_vectors(&form, &SearchOptions::default()).unwrap();
        assert_eq!(cm.norms, vec![1.0, 1.0, 1.0]);
        assert_eq!(cm.rows, vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]);
        assert!(!cm.degraded);
    }

    #[test]
    fn search_hexagonal() {
        let form = gram(2, &[2.0, 1.0, 1.0, 2.0]);
        let cm = shortest_independent_vectors(&form, &SearchOptions::default()).unwrap();
        assert_eq!(cm.norms, vec![2.0, 2.0]);
        assert_eq!(cm.rows, vec![vec![0, 1], vec![1, -1]]);
        let bf = brute_force_minima(&form, 5).unwrap();
        assert_eq!(
            bf,
            CoefficientMatrix {
                nodes: bf.nodes,
                ..cm
            }
        );
    }

    #[test]
    fn brute_force_examples() {
        let form = GramForm::new(DMatrix::identity(2, 2)).unwrap();
        let bf = brute_force_minima(&form, 1).unwrap();
        assert_eq!(bf.rows, vec![vec![0, 1], vec![1, 0]]);

        let form = gram(2, &[5.0, 4.0, 4.0, 5.0]);
        let bf = brute_force_minima(&form, 4).unwrap();
        assert_eq!(bf.rows[0], vec![1, -1]);
        assert_eq!(bf.norms[0], 2.0);

        assert!(matches!(
            brute_force_minima(&GramForm::new(DMatrix::identity(5, 5)).unwrap(), 2),
            Err(Error::OverBudget { .. })
        ));
        assert!(matches!(
            brute_force_minima(&form, 33),
            Err(Error::OverBudget { .. })
        ));
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let form = gram(3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let opts = SearchOptions {
            node_budget: 2,
            ..SearchOptions::default()
        };
        let cm = shortest_independent_vectors(&form, &opts).unwrap();
        assert!(cm.degraded);
        assert_ne!(integer_det(&cm.rows), 0);
    }

    /// Largest coordinate any vector of norm <= max_i G_ii can have; the
    /// successive minima all lie in that box.
    pub(crate) fn minima_box(g: &DMatrix<f64>) -> i64 {
        let r2 = (0..g.nrows()).map(|i| g[(i, i)]).fold(0.0, f64::max);
        let inv = g.clone().try_inverse().unwrap();
        (0..g.nrows())
            .map(|i| (r2 * inv[(i, i)]).sqrt().floor() as i64)
            .max()
            .unwrap()
    }

    #[test]
    fn random_gram_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut tested = 0;
        while tested < 40 {
            let k = rng.random_range(2..=3);
            let b = DMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0));
            let g = b.transpose() * &b;
            if minima_box(&g) > 6 {
                continue;
            }
            tested += 1;
            let form = GramForm::new(g).unwrap();
            let cm = shortest_independent_vectors(&form, &SearchOptions::default()).unwrap();
            let bf = brute_force_minima(&form, 6).unwrap();
            assert_eq!(cm.norms, bf.norms);
            assert_eq!(cm.rows, bf.rows);
        }
    }
}
