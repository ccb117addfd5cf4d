//! DFT, power spectral density and periodic autocorrelation.
//!
//! The DFT is `μ_k = Σ_j v_j ω^{jk}` with `ω = e^{2πi/ℓ}`, evaluated directly
//! from a table of roots. The floating-point PSD side is only ever a screen;
//! exact decisions go through integer PAF values.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::cyclic::CyclicVector;
use crate::modular::{divisors, gcd};
use crate::{Error, Result};

/// Absolute tolerance for PSD comparisons.
pub const PSD_TOLERANCE: f64 = 1e-6;

/// Powers of ω_n = e^{2πi/n}.
#[derive(Clone, Debug)]
pub struct RootTable {
    roots: Vec<Complex64>,
}

impl RootTable {
    pub fn new(n: usize) -> Self {
        let roots = (0..n)
            .map(|k| Complex64::cis(2.0 * PI * k as f64 / n as f64))
            .collect();
        Self { roots }
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// ω^e with `e` reduced mod n.
    #[inline]
    pub fn pow(&self, e: usize) -> Complex64 {
        self.roots[e % self.roots.len()]
    }
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    values: Vec<Complex64>,
    source_density: i64,
}

impl Spectrum {
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn source_density(&self) -> i64 {
        self.source_density
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn psd(&self) -> PsdVector {
        PsdVector {
            values: self.values.iter().map(|m| m.norm_sqr()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsdVector {
    values: Vec<f64>,
}

impl PsdVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest value over the nonzero indices (0 for length 1).
    pub fn max_nonzero(&self) -> f64 {
        self.values.iter().skip(1).copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PafVector {
    values: Vec<i64>,
}

impl PafVector {
    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<i64> {
        self.values
    }
}

pub fn dft(v: &CyclicVector) -> Spectrum {
    dft_with(v, &RootTable::new(v.len()))
}

pub fn dft_with(v: &CyclicVector, roots: &RootTable) -> Spectrum {
    let values = dft_slice(v.entries(), roots);
    Spectrum {
        values,
        source_density: v.density(),
    }
}

/// Direct DFT of an arbitrary real sequence.
pub fn dft_slice<T: Copy + Into<f64>>(entries: &[T], roots: &RootTable) -> Vec<Complex64> {
    let n = entries.len();
    (0..n)
        .map(|k| {
            entries
                .iter()
                .enumerate()
                .map(|(j, &x)| roots.pow(j * k) * x.into())
                .sum()
        })
        .collect()
}

pub fn psd(v: &CyclicVector) -> PsdVector {
    dft(v).psd()
}

/// PSD at a single index.
pub fn psd_at(entries: &[i32], index: usize, roots: &RootTable) -> f64 {
    let mu: Complex64 = entries
        .iter()
        .enumerate()
        .map(|(j, &x)| roots.pow(j * index) * x as f64)
        .sum();
    mu.norm_sqr()
}

pub fn paf(v: &CyclicVector) -> PafVector {
    PafVector {
        values: paf_slice(v.entries()),
    }
}

pub fn paf_slice(entries: &[i32]) -> Vec<i64> {
    let n = entries.len();
    (0..n).map(|g| paf_lag(entries, g)).collect()
}

#[inline]
pub fn paf_lag(entries: &[i32], g: usize) -> i64 {
    let n = entries.len();
    entries
        .iter()
        .enumerate()
        .map(|(j, &x)| x as i64 * entries[(j + g) % n] as i64)
        .sum()
}

/// PSD test: every nonzero-index PSD value is at most `gamma` (within tolerance).
pub fn psd_test(v: &CyclicVector, gamma: f64) -> bool {
    psd_test_with_tolerance(v, gamma, PSD_TOLERANCE)
}

pub fn psd_test_with_tolerance(v: &CyclicVector, gamma: f64, tolerance: f64) -> bool {
    psd(v).max_nonzero() < gamma + tolerance
}

/// Exact check of `PAF(u,g) + PAF(v,g) = λ` for every nonzero lag.
pub fn exact_complementary(u: &CyclicVector, v: &CyclicVector, lambda: i64) -> bool {
    u.len() == v.len() && first_failing_lag(u, v, lambda).is_none()
}

/// First nonzero lag where the PAF sum differs from `lambda`, with the observed sum.
pub fn first_failing_lag(u: &CyclicVector, v: &CyclicVector, lambda: i64) -> Option<(usize, i64)> {
    let n = u.len();
    (1..n).find_map(|g| {
        let s = paf_lag(u.entries(), g) + paf_lag(v.entries(), g);
        (s != lambda).then_some((g, s))
    })
}

/// PSD sums of a binary pair at each proper divisor `d` of ℓ, `(d, PSD(u,d) + PSD(v,d))`.
pub fn divisor_psd_sums(u: &CyclicVector, v: &CyclicVector) -> Result<Vec<(usize, f64)>> {
    let n = u.len();
    if v.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: v.len(),
        });
    }
    let roots = RootTable::new(n);
    Ok(divisors(n)
        .into_iter()
        .filter(|&d| d < n)
        .map(|d| (d, psd_at(u.entries(), d, &roots) + psd_at(v.entries(), d, &roots)))
        .collect())
}

/// Checks `PSD(u,d) + PSD(v,d) = γ` at every proper divisor d of ℓ.
///
/// Every nonzero index lies in the unit orbit of exactly one proper divisor, and
/// a rational PSD sum is constant on such an orbit, so this is sufficient for
/// complementarity of binary pairs with density (ℓ+1)/2. Index 0 is excluded:
/// the sum there is 2κ².
pub fn divisor_psd_check(u: &CyclicVector, v: &CyclicVector, gamma: f64) -> Result<bool> {
    let n = u.len();
    let kappa = (n as i64 + 1) / 2;
    for x in [u, v] {
        if !x.is_binary() {
            return Err(Error::NotBinary);
        }
        if x.density() != kappa {
            return Err(Error::DensityMismatch {
                expected: kappa,
                actual: x.density(),
            });
        }
    }
    Ok(divisor_psd_sums(u, v)?
        .into_iter()
        .all(|(_, s)| (s - gamma).abs() <= PSD_TOLERANCE))
}

/// A dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: alloc::vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn get_mut(&mut self, r: usize, c: usize) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// The submatrix with row 0 and column 0 removed (the unit-index block).
    pub fn punctured(&self) -> ComplexMatrix {
        let rows = self.rows.saturating_sub(1);
        let cols = self.cols.saturating_sub(1);
        let mut data = Vec::with_capacity(rows * cols);
        for r in 1..self.rows {
            data.extend_from_slice(&self.data[r * self.cols + 1..(r + 1) * self.cols]);
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `Ω_{δ1} · A · Ω_{δ2}` for a row-major `δ1 × δ2` matrix `A`.
pub fn two_dim_dft<T: Copy + Into<f64>>(entries: &[T], d1: usize, d2: usize) -> Result<ComplexMatrix> {
    if entries.len() != d1 * d2 {
        return Err(Error::ShapeMismatch {
            expected_rows: d1,
            expected_cols: d2,
            rows: entries.len() / d2.max(1),
            cols: d2,
        });
    }
    if gcd(d1, d2) != 1 {
        return Err(Error::InvalidFactorization {
            length: d1 * d2,
            d1,
            d2,
            reason: "factors are not coprime",
        });
    }
    let (w1, w2) = (RootTable::new(d1), RootTable::new(d2));
    // row transform first: B = A Ω_{δ2}
    let mut partial = alloc::vec![Complex64::new(0.0, 0.0); d1 * d2];
    for k in 0..d1 {
        for c in 0..d2 {
            partial[k * d2 + c] = (0..d2)
                .map(|j| w2.pow(c * j) * entries[k * d2 + j].into())
                .sum();
        }
    }
    let mut out = ComplexMatrix::zeros(d1, d2);
    for r in 0..d1 {
        for c in 0..d2 {
            *out.get_mut(r, c) = (0..d1).map(|k| w1.pow(r * k) * partial[k * d2 + c]).sum();
        }
    }
    Ok(out)
}
