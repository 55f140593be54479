//! Channel estimators: Hadamard least squares and orthogonal matching
//! pursuit over the angular dictionary.

use num_complex::Complex;

use crate::channel::Observation;
use crate::error::{Result, RisError};
use crate::scalar::Scalar;
use crate::sensing::{angular_to_spatial, AngularTransform, MatrixKind, SensingMatrix};

/// Dense row-major complex matrix; the OMP dictionary type.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    entries: Vec<Complex<T>>,
    rows: usize,
    cols: usize,
}

impl<T: Scalar> ComplexMatrix<T> {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex<T>>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(RisError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(ComplexMatrix {
            entries,
            rows,
            cols,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, m: usize, n: usize) -> Complex<T> {
        self.entries[m * self.cols + n]
    }

    pub fn row(&self, m: usize) -> &[Complex<T>] {
        &self.entries[m * self.cols..(m + 1) * self.cols]
    }

    pub fn column(&self, n: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|m| self.entry(m, n)).collect()
    }
}

/// Output of an estimator run.
///
/// `rho_hat` is the spatial-domain estimate for the pipeline entry points;
/// the raw [`omp`] solver, which never sees the angular transform, returns
/// its dictionary-domain solution there instead.  `support` is in selection
/// order; `residual_norms` starts with ‖ĥ‖ and appends one entry per OMP
/// iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult<T> {
    pub rho_hat: Vec<Complex<T>>,
    pub gamma_hat: Option<Vec<Complex<T>>>,
    pub support: Option<Vec<usize>>,
    pub residual_norms: Vec<T>,
}

/// Default OMP sparsity for an N-element lattice: ⌈N/64⌉.
pub fn default_sparsity(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

/// Least-squares estimate `ϱ̂ = Wᵀĥ/M` for column-orthogonal sensing
/// matrices.  The divisor is the column squared norm M, which equals K·L for
/// square Sylvester campaigns and generalizes to masked or padded ones.
pub fn hadamard_estimate<T: Scalar>(
    h_hat: &Observation<T>,
    w: &SensingMatrix,
) -> Result<EstimateResult<T>> {
    if w.kind != MatrixKind::Hadamard {
        return Err(RisError::UnsupportedMatrix(
            "least-squares estimation needs column-orthogonal (Hadamard-kind) matrices".into(),
        ));
    }
    if h_hat.len() != w.rows() {
        return Err(RisError::DimensionMismatch(format!(
            "observation has {} entries, sensing matrix has {} rows",
            h_hat.len(),
            w.rows()
        )));
    }
    let m_inv = T::one() / T::from_usize(w.rows()).unwrap();
    let mut rho_hat = vec![Complex::new(T::zero(), T::zero()); w.cols()];
    for (m, h) in h_hat.h_hat.iter().enumerate() {
        for (r, &sign) in rho_hat.iter_mut().zip(w.row(m)) {
            if sign > 0 {
                *r += h;
            } else {
                *r -= h;
            }
        }
    }
    for r in &mut rho_hat {
        *r *= m_inv;
    }
    Ok(EstimateResult {
        rho_hat,
        gamma_hat: None,
        support: None,
        residual_norms: Vec::new(),
    })
}

/// Observation signature of each angular bin: `D = W·U`, whose column j maps
/// the unit coefficient at bin j to the campaign observation `W·(U·e_j)`.
pub fn build_dictionary<T: Scalar>(
    w: &SensingMatrix,
    u: &AngularTransform<T>,
) -> Result<ComplexMatrix<T>> {
    let n = u.size();
    if w.cols() != n {
        return Err(RisError::DimensionMismatch(format!(
            "sensing matrix has {} columns, transform is {n}x{n}",
            w.cols()
        )));
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut entries = Vec::with_capacity(w.rows() * n);
    for m in 0..w.rows() {
        let mut acc = vec![zero; n];
        for (j, &sign) in w.row(m).iter().enumerate() {
            let urow = u.row(j);
            if sign > 0 {
                for (a, uj) in acc.iter_mut().zip(urow) {
                    *a += uj;
                }
            } else {
                for (a, uj) in acc.iter_mut().zip(urow) {
                    *a -= uj;
                }
            }
        }
        entries.extend_from_slice(&acc);
    }
    ComplexMatrix::new(w.rows(), n, entries)
}

fn norm<T: Scalar>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Greedy sparse recovery: S rounds of normalized-correlation column
/// selection, least-squares re-fit on the grown support, and residual
/// update.  Ties in the argmax break to the lowest column index; the re-fit
/// uses modified Gram–Schmidt QR rather than explicit normal equations.
pub fn omp<T: Scalar>(
    dictionary: &ComplexMatrix<T>,
    h_hat: &Observation<T>,
    sparsity: usize,
) -> Result<EstimateResult<T>> {
    let (m_rows, n_cols) = (dictionary.rows(), dictionary.cols());
    if h_hat.len() != m_rows {
        return Err(RisError::DimensionMismatch(format!(
            "observation has {} entries, dictionary has {m_rows} rows",
            h_hat.len()
        )));
    }
    if sparsity == 0 || sparsity > m_rows.min(n_cols) {
        return Err(RisError::Domain(format!(
            "sparsity {sparsity} outside 1..={}",
            m_rows.min(n_cols)
        )));
    }
    let zero = Complex::new(T::zero(), T::zero());

    // Column squared norms, accumulated row-wise for cache locality.
    let mut col_norm_sqr = vec![T::zero(); n_cols];
    for m in 0..m_rows {
        for (c, d) in col_norm_sqr.iter_mut().zip(dictionary.row(m)) {
            *c += d.norm_sqr();
        }
    }
    for (j, &c) in col_norm_sqr.iter().enumerate() {
        if !c.is_finite() || c <= T::zero() {
            return Err(RisError::Domain(format!("dictionary column {j} is zero")));
        }
    }

    let h = &h_hat.h_hat;
    let mut residual = h.clone();
    let mut residual_norms = vec![norm(&residual)];
    let mut support: Vec<usize> = Vec::with_capacity(sparsity);
    let mut selected = vec![false; n_cols];
    // Thin QR of the growing support: Ω = Q·R with orthonormal Q columns.
    let mut q_cols: Vec<Vec<Complex<T>>> = Vec::with_capacity(sparsity);
    let mut r_upper: Vec<Vec<Complex<T>>> = Vec::with_capacity(sparsity);
    let mut coeffs: Vec<Complex<T>> = Vec::new();

    for k in 0..sparsity {
        // argmax_j |v_jᴴ r|² / ‖v_j‖² over unselected columns.
        let mut corr = vec![zero; n_cols];
        for (m, rm) in residual.iter().enumerate() {
            for (c, d) in corr.iter_mut().zip(dictionary.row(m)) {
                *c += d.conj() * rm;
            }
        }
        let mut best_j = usize::MAX;
        let mut best_metric = T::neg_infinity();
        for j in 0..n_cols {
            if selected[j] {
                continue;
            }
            let metric = corr[j].norm_sqr() / col_norm_sqr[j];
            if metric > best_metric {
                best_metric = metric;
                best_j = j;
            }
        }
        support.push(best_j);
        selected[best_j] = true;

        // Orthogonalize the new atom against the selected subspace.
        let mut a = dictionary.column(best_j);
        let mut r_col = Vec::with_capacity(k + 1);
        for q in &q_cols {
            let rik: Complex<T> = q.iter().zip(&a).map(|(qi, ai)| qi.conj() * ai).sum();
            for (ai, qi) in a.iter_mut().zip(q) {
                *ai -= rik * qi;
            }
            r_col.push(rik);
        }
        let rkk = norm(&a);
        if rkk <= T::real(1e-12) * col_norm_sqr[best_j].sqrt() {
            return Err(RisError::SingularSupport { iteration: k + 1 });
        }
        for ai in a.iter_mut() {
            *ai /= rkk;
        }
        r_col.push(Complex::new(rkk, T::zero()));
        q_cols.push(a);
        r_upper.push(r_col);

        // LS re-fit Γ = R⁻¹·Qᴴĥ by back substitution, then r ← ĥ − ΩΓ.
        let qh: Vec<Complex<T>> = q_cols
            .iter()
            .map(|q| q.iter().zip(h).map(|(qi, hi)| qi.conj() * hi).sum())
            .collect();
        coeffs = vec![zero; k + 1];
        for i in (0..=k).rev() {
            let mut acc = qh[i];
            for j in (i + 1)..=k {
                acc -= r_upper[j][i] * coeffs[j];
            }
            coeffs[i] = acc / r_upper[i][i];
        }
        residual = h.clone();
        for (idx, &j) in support.iter().enumerate() {
            let c = coeffs[idx];
            for (rm, m) in residual.iter_mut().zip(0..m_rows) {
                *rm -= c * dictionary.entry(m, j);
            }
        }
        residual_norms.push(norm(&residual));
    }

    let mut gamma_hat = vec![zero; n_cols];
    for (idx, &j) in support.iter().enumerate() {
        gamma_hat[j] = coeffs[idx];
    }
    Ok(EstimateResult {
        rho_hat: gamma_hat.clone(),
        gamma_hat: Some(gamma_hat),
        support: Some(support),
        residual_norms,
    })
}

/// Full sparse-recovery pipeline: builds the angular dictionary `W·U`, runs
/// [`omp`], and maps the recovered coefficients back to spatial gains.
pub fn omp_estimate<T: Scalar>(
    h_hat: &Observation<T>,
    w: &SensingMatrix,
    u: &AngularTransform<T>,
    sparsity: usize,
) -> Result<EstimateResult<T>> {
    let dictionary = build_dictionary(w, u)?;
    let mut result = omp(&dictionary, h_hat, sparsity)?;
    let gamma = result
        .gamma_hat
        .as_ref()
        .expect("omp always returns an angular vector");
    result.rho_hat = angular_to_spatial(gamma, u)?;
    Ok(result)
}
