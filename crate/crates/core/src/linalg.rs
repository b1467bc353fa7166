//! Small dense complex-matrix helpers and a cyclic-Jacobi Hermitian
//! eigensolver.
//!
//! The spectral capacity formulas need eigendecompositions of Hermitian
//! matrices of size `M` (branch count, rarely above 16) per frequency bin,
//! and the discrete-time validation model needs the same on matrices up to a
//! few hundred rows. Cyclic Jacobi with two-sided unitary rotations is used
//! for both: at these sizes robustness and simplicity beat asymptotic speed,
//! and the rotations preserve Hermitian structure exactly, so eigenvalues
//! come out real by construction.

use num_complex::Complex64;

use crate::{Error, Result, EPS_INV};

/// Dense complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    /// Zero matrix.
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![Complex64::new(0.0, 0.0); nrows * ncols],
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Build from an entry function.
    pub fn from_fn(nrows: usize, ncols: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        Self { nrows, ncols, data }
    }

    /// Square matrix with `d` on the diagonal.
    pub fn diag(d: &[Complex64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Square matrix with real `d` on the diagonal.
    pub fn diag_real(d: &[f64]) -> Self {
        Self::diag(
            &d.iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect::<Vec<_>>(),
        )
    }

    /// Row count.
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    /// Column count.
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Entry (i, j).
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.ncols + j]
    }

    /// Set entry (i, j).
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.ncols + j] = v;
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.ncols, self.nrows, |i, j| self.get(j, i).conj())
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.ncols, rhs.nrows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.nrows, rhs.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self.get(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let row_out = i * out.ncols;
                let row_rhs = k * rhs.ncols;
                for j in 0..rhs.ncols {
                    out.data[row_out + j] += a * rhs.data[row_rhs + j];
                }
            }
        }
        out
    }

    /// Gram matrix `self · self*` (Hermitian by construction).
    pub fn gram(&self) -> Self {
        let mut out = Self::zeros(self.nrows, self.nrows);
        for i in 0..self.nrows {
            for j in 0..=i {
                let mut acc = Complex64::new(0.0, 0.0);
                let ri = i * self.ncols;
                let rj = j * self.ncols;
                for k in 0..self.ncols {
                    acc += self.data[ri + k] * self.data[rj + k].conj();
                }
                out.set(i, j, acc);
                if i != j {
                    out.set(j, i, acc.conj());
                }
            }
        }
        out
    }

    /// Copy with column `j` scaled by `d[j]`.
    pub fn scaled_cols(&self, d: &[Complex64]) -> Self {
        assert_eq!(self.ncols, d.len(), "column scale length mismatch");
        Self::from_fn(self.nrows, self.ncols, |i, j| self.get(i, j) * d[j])
    }

    /// Copy with column `j` scaled by the real factor `d[j]`.
    pub fn scaled_cols_real(&self, d: &[f64]) -> Self {
        assert_eq!(self.ncols, d.len(), "column scale length mismatch");
        Self::from_fn(self.nrows, self.ncols, |i, j| self.get(i, j) * d[j])
    }

    /// Copy with every entry scaled.
    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    /// Entrywise sum.
    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Squared Euclidean norm of each row.
    pub fn row_norms_sqr(&self) -> Vec<f64> {
        (0..self.nrows)
            .map(|i| {
                self.data[i * self.ncols..(i + 1) * self.ncols]
                    .iter()
                    .map(|v| v.norm_sqr())
                    .sum()
            })
            .collect()
    }

    /// Copy of the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self::from_fn(rows.len(), self.ncols, |i, j| self.get(rows[i], j))
    }

    /// Largest deviation from Hermitian symmetry, `max |A_ij − conj(A_ji)|`.
    pub fn hermitian_asymmetry(&self) -> f64 {
        assert_eq!(self.nrows, self.ncols, "square matrix required");
        let mut worst = 0.0_f64;
        for i in 0..self.nrows {
            for j in 0..=i {
                let d = self.get(i, j) - self.get(j, i).conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }
}

/// Result of a Hermitian eigendecomposition: `a · v_k = λ_k · v_k` with real
/// eigenvalues sorted descending and orthonormal eigenvectors as the columns
/// of `vectors`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Eigenvectors, column `k` pairs with `values[k]`.
    pub vectors: CMatrix,
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// The input must be Hermitian within `1e-12` of its Frobenius norm
/// ([`Error::NotHermitian`] otherwise); it is symmetrized before iterating so
/// that admissible rounding-level asymmetry cannot bias the result. Sweeps
/// stop when the off-diagonal Frobenius mass falls below `1e-12·‖A‖_F`.
pub fn hermitian_eig(a: &CMatrix) -> Result<EigenDecomposition> {
    assert_eq!(
        a.nrows(),
        a.ncols(),
        "eigendecomposition needs a square matrix"
    );
    let n = a.nrows();
    let fro = a.frobenius();
    let herm_tol = 1e-12 * fro.max(1.0);
    let asym = a.hermitian_asymmetry();
    if asym > herm_tol {
        return Err(Error::NotHermitian {
            max_asym: asym,
            tol: herm_tol,
        });
    }

    // Symmetrized working copy.
    let mut m = CMatrix::from_fn(n, n, |i, j| 0.5 * (a.get(i, j) + a.get(j, i).conj()));
    let mut v = CMatrix::identity(n);

    let off_target = 1e-12 * fro.max(f64::MIN_POSITIVE);
    // Rotations below this element size cannot push the off-diagonal mass
    // above the target, so they are skipped once the matrix is nearly there.
    let skip = off_target / (n as f64).max(1.0);

    let max_sweeps = 100;
    for _ in 0..max_sweeps {
        if off_diagonal_norm(&m) <= off_target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                let mag = apq.norm();
                if mag <= skip {
                    continue;
                }
                let app = m.get(p, p).re;
                let aqq = m.get(q, q).re;
                let u = apq / mag; // e^{iφ} of the off-diagonal entry
                let tau = (aqq - app) / (2.0 * mag);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                apply_rotation(&mut m, p, q, c, s, u);
                rotate_columns(&mut v, p, q, c, s, u);
            }
        }
    }

    // Diagonal is real up to rounding; sort descending with vectors.
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v.get(i, order[j]));
    Ok(EigenDecomposition { values, vectors })
}

/// Off-diagonal Frobenius mass `sqrt(Σ_{i≠j} |a_ij|²)`.
fn off_diagonal_norm(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m.get(i, j).norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Two-sided rotation `M ← J* M J` with the unitary `J` acting on the (p, q)
/// plane: `J[p][p] = c`, `J[p][q] = s·u`, `J[q][p] = −s·conj(u)`,
/// `J[q][q] = c`, chosen so the (p, q) entry is annihilated.
fn apply_rotation(m: &mut CMatrix, p: usize, q: usize, c: f64, s: f64, u: Complex64) {
    let n = m.nrows();
    // Column update (right-multiplication by J).
    for k in 0..n {
        let mkp = m.get(k, p);
        let mkq = m.get(k, q);
        m.set(k, p, mkp * c - mkq * (s * u.conj()));
        m.set(k, q, mkp * (s * u) + mkq * c);
    }
    // Row update (left-multiplication by J*).
    for k in 0..n {
        let mpk = m.get(p, k);
        let mqk = m.get(q, k);
        m.set(p, k, mpk * c - mqk * (s * u));
        m.set(q, k, mpk * (s * u.conj()) + mqk * c);
    }
    // Exact zeros on the annihilated pair keep the off-diagonal mass honest.
    let zero = Complex64::new(0.0, 0.0);
    m.set(p, q, zero);
    m.set(q, p, zero);
    // The diagonal of a Hermitian matrix stays real; drop rounding dust.
    let dpp = m.get(p, p);
    let dqq = m.get(q, q);
    m.set(p, p, Complex64::new(dpp.re, 0.0));
    m.set(q, q, Complex64::new(dqq.re, 0.0));
}

/// Accumulate `V ← V·J` (same `J` as in [`apply_rotation`]).
fn rotate_columns(v: &mut CMatrix, p: usize, q: usize, c: f64, s: f64, u: Complex64) {
    let n = v.nrows();
    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * c - vkq * (s * u.conj()));
        v.set(k, q, vkp * (s * u) + vkq * c);
    }
}

/// Inverse square root `A^{−1/2}` of a Hermitian positive-definite matrix.
///
/// Used to whiten sampled noise: for a filter Gram matrix `G = F·F*`,
/// `G^{−1/2}·F` has orthonormal rows. Errors with
/// [`Error::SingularWhitening`] when the smallest eigenvalue falls below
/// `EPS_INV` of the largest — the filter rows are then not right-invertible
/// and the whitened observation model does not exist.
pub fn inv_sqrt_psd(a: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eig(a)?;
    let lambda_max = eig.values.first().copied().unwrap_or(0.0);
    let lambda_min = eig.values.last().copied().unwrap_or(0.0);
    let threshold = EPS_INV * lambda_max;
    if lambda_max <= 0.0 || lambda_min <= threshold {
        return Err(Error::SingularWhitening {
            lambda_min,
            threshold,
        });
    }
    Ok(apply_spectral(&eig, |l| 1.0 / l.sqrt()))
}

/// Square root `A^{1/2}` of a Hermitian positive-semidefinite matrix
/// (eigenvalues clamped at zero). Used to color Monte-Carlo noise draws.
pub fn sqrt_psd(a: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eig(a)?;
    Ok(apply_spectral(&eig, |l| l.max(0.0).sqrt()))
}

/// Moore-Penrose pseudo-inverse of a Hermitian matrix: eigenvalues below
/// `eps_rel` of the largest magnitude are treated as exact zeros.
pub fn hermitian_pseudo_inverse(a: &CMatrix, eps_rel: f64) -> Result<CMatrix> {
    let eig = hermitian_eig(a)?;
    let scale = eig.values.iter().fold(0.0_f64, |acc, &l| acc.max(l.abs()));
    let cutoff = eps_rel * scale;
    Ok(apply_spectral(&eig, |l| {
        if l.abs() > cutoff && cutoff.is_finite() && scale > 0.0 {
            1.0 / l
        } else {
            0.0
        }
    }))
}

/// Rebuild `V·diag(f(λ))·V*` from an eigendecomposition.
fn apply_spectral(eig: &EigenDecomposition, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = eig.values.len();
    let v = &eig.vectors;
    let scaled = v.scaled_cols_real(&eig.values.iter().map(|&l| f(l)).collect::<Vec<_>>());
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += scaled.get(i, k) * v.get(j, k).conj();
            }
            out.set(i, j, acc);
            if i != j {
                out.set(j, i, acc.conj());
            }
        }
    }
    out
}
