//! The effective matrix `F = ((1/P) I + h h^T)^{-1/2} diag(sqrt(SNR_l / P))`
//! whose Gram matrix defines the lattice the receiver's equations live on.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::channel::{ChannelInstance, PowerPolicy};
use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;
const EIGEN_FLOOR: f64 = 1e-12;

/// Inverse square root of a symmetric positive-definite matrix via its
/// eigendecomposition. The result is symmetrized explicitly.
pub fn inv_sqrt_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.ncols(),
        });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("matrix"));
    }
    let scale = m.amax().max(1.0);
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric(asym));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let max_ev = eig.eigenvalues.max();
    let min_ev = eig.eigenvalues.min();
    if max_ev <= 0.0 || min_ev <= EIGEN_FLOOR * max_ev {
        return Err(Error::NearSingular(min_ev / max_ev));
    }
    let d = DVector::from_iterator(n, eig.eigenvalues.iter().map(|l| 1.0 / l.sqrt()));
    let v = &eig.eigenvectors;
    let s = v * DMatrix::from_diagonal(&d) * v.transpose();
    Ok((&s + s.transpose()) * 0.5)
}

#[derive(Clone, Debug)]
pub struct EffectiveMatrix {
    f: DMatrix<f64>,
    gram: DMatrix<f64>,
    snr: Vec<f64>,
}

impl EffectiveMatrix {
    pub fn f(&self) -> &DMatrix<f64> {
        &self.f
    }

    /// `G = F^T F`.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn snr(&self) -> &[f64] {
        &self.snr
    }

    pub fn dim(&self) -> usize {
        self.f.ncols()
    }

    /// `|F a|^2`, evaluated on the vector `F a` rather than through `G`.
    ///
    /// At high SNR the entries of `G` grow like `P` while the short vectors
    /// the search cares about have `O(1)` norms, so the quadratic form loses
    /// digits to cancellation; the vector route does not.
    pub fn norm_sq(&self, a: &[i64]) -> f64 {
        let k = self.dim();
        let mut acc = 0.0;
        for i in 0..k {
            let mut s = 0.0;
            for (j, &aj) in a.iter().enumerate() {
                s += self.f[(i, j)] * aj as f64;
            }
            acc += s * s;
        }
        acc
    }

    /// `a^T G a`.
    pub fn gram_norm_sq(&self, a: &[i64]) -> f64 {
        quad_form(&self.gram, a)
    }
}

pub fn quad_form(g: &DMatrix<f64>, a: &[i64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        if a[i] == 0 {
            continue;
        }
        let mut row = 0.0;
        for j in 0..a.len() {
            row += g[(i, j)] * a[j] as f64;
        }
        acc += a[i] as f64 * row;
    }
    acc
}

pub fn build_f(inst: &ChannelInstance, policy: &PowerPolicy) -> Result<EffectiveMatrix> {
    let k = inst.users();
    if policy.alphas().len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: policy.alphas().len(),
        });
    }
    let p = inst.power();
    let h = DVector::from_column_slice(inst.h());
    let m = DMatrix::identity(k, k) / p + &h * h.transpose();
    let s = inv_sqrt_spd(&m)?;
    let scale = DVector::from_iterator(k, policy.alphas().iter().map(|a| a.sqrt()));
    let f = s * DMatrix::from_diagonal(&scale);
    let gram = f.transpose() * &f;
    let gram = (&gram + gram.transpose()) * 0.5;
    Ok(EffectiveMatrix {
        f,
        gram,
        snr: policy.snr(p),
    })
}
