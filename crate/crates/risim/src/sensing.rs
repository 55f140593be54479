//! Sensing matrices (Sylvester–Hadamard, Bernoulli) and the 2D DFT that maps
//! spatial channel gains to their angular representation.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, RisError};
use crate::scalar::Scalar;

/// Largest supported Sylvester exponent (8192×8192).
pub const MAX_HADAMARD_EXP: u32 = 13;
/// Largest supported lattice size for the dense DFT.
pub const MAX_DFT_SIZE: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Hadamard,
    Bernoulli,
}

/// M×N probe-configuration matrix with entries in {+1, −1}.
///
/// Each row is one RIS configuration: +1 ↦ phase 0, −1 ↦ phase π.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensingMatrix {
    entries: Vec<i8>,
    rows: usize,
    cols: usize,
    pub kind: MatrixKind,
    pub seed: Option<u64>,
}

impl SensingMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, m: usize, n: usize) -> i8 {
        self.entries[m * self.cols + n]
    }

    /// One probe configuration as a slice of ±1 signs.
    pub fn row(&self, m: usize) -> &[i8] {
        &self.entries[m * self.cols..(m + 1) * self.cols]
    }

    /// Gram matrix entry ⟨col_i, col_j⟩ in exact integer arithmetic.
    pub fn column_gram(&self, i: usize, j: usize) -> i64 {
        (0..self.rows)
            .map(|m| self.entry(m, i) as i64 * self.entry(m, j) as i64)
            .sum()
    }

    /// True when every pair of distinct columns is orthogonal and every
    /// column has squared norm equal to the row count.
    pub fn has_orthogonal_columns(&self) -> bool {
        let m = self.rows as i64;
        for i in 0..self.cols {
            for j in i..self.cols {
                let g = self.column_gram(i, j);
                if (i == j && g != m) || (i != j && g != 0) {
                    return false;
                }
            }
        }
        true
    }
}

/// Sylvester–Hadamard matrix of order 2^b, built by the block recursion
/// `Σ_{2^b} = [Σ Σ; Σ −Σ]` from the base `Σ₁ = [1]`.
pub fn sylvester_hadamard(b: u32) -> Result<SensingMatrix> {
    if b > MAX_HADAMARD_EXP {
        return Err(RisError::Capacity(format!(
            "Sylvester exponent {b} exceeds maximum {MAX_HADAMARD_EXP}"
        )));
    }
    let n = 1usize << b;
    let mut entries = vec![1i8; n * n];
    // Grow in place: the 2^(s+1) block reuses the 2^s block already written.
    let mut size = 1;
    while size < n {
        for r in 0..size {
            for c in 0..size {
                let v = entries[r * n + c];
                entries[r * n + size + c] = v;
                entries[(size + r) * n + c] = v;
                entries[(size + r) * n + size + c] = -v;
            }
        }
        size *= 2;
    }
    Ok(SensingMatrix {
        entries,
        rows: n,
        cols: n,
        kind: MatrixKind::Hadamard,
        seed: None,
    })
}

/// Column-orthogonal sensing matrix for `n_active` elements: the first
/// `n_active` columns of the next-power-of-two Sylvester matrix, all rows
/// kept.  Column Gram is M·I exactly, so the least-squares estimator stays
/// exact for lattices whose active count is not a power of two.
pub fn hadamard_for(n_active: usize) -> Result<SensingMatrix> {
    if n_active == 0 {
        return Err(RisError::Domain("n_active must be at least 1".into()));
    }
    let b = usize::BITS - (n_active - 1).leading_zeros();
    let full = sylvester_hadamard(b)?;
    if full.cols == n_active {
        return Ok(full);
    }
    let mut entries = Vec::with_capacity(full.rows * n_active);
    for m in 0..full.rows {
        entries.extend_from_slice(&full.row(m)[..n_active]);
    }
    Ok(SensingMatrix {
        entries,
        rows: full.rows,
        cols: n_active,
        kind: MatrixKind::Hadamard,
        seed: None,
    })
}

/// M×N matrix of i.i.d. equiprobable ±1 entries, deterministic per seed.
pub fn bernoulli_matrix(m: usize, n: usize, seed: u64) -> Result<SensingMatrix> {
    if m == 0 || n == 0 {
        return Err(RisError::Domain(format!(
            "Bernoulli matrix must be at least 1x1, got {m}x{n}"
        )));
    }
    if m.saturating_mul(n) > (1usize << (2 * MAX_HADAMARD_EXP)) {
        return Err(RisError::Capacity(format!(
            "Bernoulli matrix {m}x{n} exceeds capacity"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..m * n)
        .map(|_| if rng.gen::<bool>() { 1i8 } else { -1i8 })
        .collect();
    Ok(SensingMatrix {
        entries,
        rows: m,
        cols: n,
        kind: MatrixKind::Bernoulli,
        seed: Some(seed),
    })
}

/// Keeps only the columns at active mask positions; row count unchanged.
pub fn apply_mask(w: &SensingMatrix, mask: &[bool]) -> Result<SensingMatrix> {
    if mask.len() != w.cols {
        return Err(RisError::DimensionMismatch(format!(
            "mask has {} entries, matrix has {} columns",
            mask.len(),
            w.cols
        )));
    }
    let keep: Vec<usize> = mask
        .iter()
        .enumerate()
        .filter_map(|(j, &a)| a.then_some(j))
        .collect();
    if keep.is_empty() {
        return Err(RisError::InvalidScene("mask disables every element".into()));
    }
    if keep.len() == w.cols {
        return Ok(w.clone());
    }
    let mut entries = Vec::with_capacity(w.rows * keep.len());
    for m in 0..w.rows {
        let row = w.row(m);
        entries.extend(keep.iter().map(|&j| row[j]));
    }
    Ok(SensingMatrix {
        entries,
        rows: w.rows,
        cols: keep.len(),
        kind: w.kind,
        seed: w.seed,
    })
}

/// Dense K·L × K·L two-dimensional DFT matrix `U = F_K ⊗ F_L` with
/// unnormalized entries `exp(−i2π·pq/n)`, in k-major flat order.
///
/// U is symmetric, and `U·Uᴴ = K·L·I`, so the angular map divides by K·L.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularTransform<T> {
    u: Vec<Complex<T>>,
    /// Lattice rows K.
    pub lattice_rows: usize,
    /// Lattice cols L.
    pub lattice_cols: usize,
}

impl<T: Scalar> AngularTransform<T> {
    /// Side length K·L of the square matrix.
    pub fn size(&self) -> usize {
        self.lattice_rows * self.lattice_cols
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex<T> {
        self.u[i * self.size() + j]
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        let n = self.size();
        &self.u[i * n..(i + 1) * n]
    }

    /// Column `j` materialized (equals row `j` by symmetry).
    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        self.row(j).to_vec()
    }
}

/// Unit-magnitude twiddle table `exp(−i2π·r/n)` for r in 0..n.
fn twiddles<T: Scalar>(n: usize) -> Vec<Complex<T>> {
    let minus_two_pi = -T::real(2.0) * T::PI();
    (0..n)
        .map(|r| {
            let angle = minus_two_pi * T::from_usize(r).unwrap() / T::from_usize(n).unwrap();
            Complex::new(angle.cos(), angle.sin())
        })
        .collect()
}

pub fn dft2_matrix<T: Scalar>(k: usize, l: usize) -> Result<AngularTransform<T>> {
    if k == 0 || l == 0 {
        return Err(RisError::Domain(format!(
            "DFT lattice must be at least 1x1, got {k}x{l}"
        )));
    }
    let n = k.saturating_mul(l);
    if n > MAX_DFT_SIZE {
        return Err(RisError::Capacity(format!(
            "lattice size {n} exceeds dense DFT maximum {MAX_DFT_SIZE}"
        )));
    }
    let tw_k = twiddles::<T>(k);
    let tw_l = twiddles::<T>(l);
    let mut u = Vec::with_capacity(n * n);
    // Row index (p,q) and column index (a,b) in k-major order; the entry is
    // F_K[p,a]·F_L[q,b], symmetric in row/column by construction.
    for p in 0..k {
        for q in 0..l {
            for a in 0..k {
                let fk = tw_k[(p * a) % k];
                for b in 0..l {
                    u.push(fk * tw_l[(q * b) % l]);
                }
            }
        }
    }
    Ok(AngularTransform {
        u,
        lattice_rows: k,
        lattice_cols: l,
    })
}

/// Angular representation `Γ = (1/KL)·U*·ϱ̄`.  U is symmetric, so the
/// conjugate matrix equals the conjugate transpose.
pub fn spatial_to_angular<T: Scalar>(
    rho: &[Complex<T>],
    u: &AngularTransform<T>,
) -> Result<Vec<Complex<T>>> {
    let n = u.size();
    if rho.len() != n {
        return Err(RisError::DimensionMismatch(format!(
            "gain vector has {} entries, transform is {n}x{n}",
            rho.len()
        )));
    }
    let scale = T::one() / T::from_usize(n).unwrap();
    Ok((0..n)
        .map(|i| {
            let row = u.row(i);
            let mut acc = Complex::new(T::zero(), T::zero());
            for (uij, rj) in row.iter().zip(rho) {
                acc += uij.conj() * rj;
            }
            acc * scale
        })
        .collect())
}

/// Spatial gains `ϱ̄ = U·Γ`; exact inverse of [`spatial_to_angular`].
pub fn angular_to_spatial<T: Scalar>(
    gamma: &[Complex<T>],
    u: &AngularTransform<T>,
) -> Result<Vec<Complex<T>>> {
    let n = u.size();
    if gamma.len() != n {
        return Err(RisError::DimensionMismatch(format!(
            "angular vector has {} entries, transform is {n}x{n}",
            gamma.len()
        )));
    }
    Ok((0..n)
        .map(|i| {
            let row = u.row(i);
            let mut acc = Complex::new(T::zero(), T::zero());
            for (uij, gj) in row.iter().zip(gamma) {
                acc += uij * gj;
            }
            acc
        })
        .collect())
}
