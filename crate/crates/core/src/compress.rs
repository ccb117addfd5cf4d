//! δ-modular compression and the CRT reshaping of length-ℓ vectors into
//! δ1 × δ2 matrices.
//!
//! For ℓ = δ1·δ2 with gcd(δ1, δ2) = 1, index g maps to `(g mod δ1, g mod δ2)`.
//! Under this map the row sums of θ(v) are the δ1-compression of v and the
//! column sums are its δ2-compression.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;

use crate::cyclic::CyclicVector;
use crate::modular::{binomial_big, gcd, mod_inverse, totient};
use crate::{Error, Result};

/// CRT index tables for ℓ = δ1·δ2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrtContext {
    d1: usize,
    d2: usize,
    /// Row-major cell `r*δ2 + c` → index g.
    index_of: Vec<usize>,
}

impl CrtContext {
    pub fn new(d1: usize, d2: usize) -> Result<Self> {
        let length = d1 * d2;
        if d1 == 0 || d2 == 0 {
            return Err(Error::InvalidFactorization {
                length,
                d1,
                d2,
                reason: "factors must be positive",
            });
        }
        if gcd(d1, d2) != 1 {
            return Err(Error::InvalidFactorization {
                length,
                d1,
                d2,
                reason: "factors are not coprime",
            });
        }
        let mut index_of = alloc::vec![0; length];
        for g in 0..length {
            index_of[(g % d1) * d2 + g % d2] = g;
        }
        Ok(Self { d1, d2, index_of })
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.d2
    }

    pub fn len(&self) -> usize {
        self.d1 * self.d2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// ψ(g) = (g mod δ1, g mod δ2).
    pub fn psi(&self, g: usize) -> (usize, usize) {
        let g = g % self.len();
        (g % self.d1, g % self.d2)
    }

    pub fn psi_inv(&self, r: usize, c: usize) -> usize {
        self.index_of[(r % self.d1) * self.d2 + c % self.d2]
    }

    /// χ restricted to units of Z_ℓ.
    pub fn chi(&self, unit: usize) -> Result<(usize, usize)> {
        let n = self.len();
        if gcd(unit % n, n) != 1 {
            return Err(Error::NonUnit { k: unit, modulus: n });
        }
        Ok(self.psi(unit))
    }

    pub fn chi_inv(&self, a: usize, b: usize) -> Result<usize> {
        if gcd(a % self.d1, self.d1) != 1 {
            return Err(Error::NonUnit { k: a, modulus: self.d1 });
        }
        if gcd(b % self.d2, self.d2) != 1 {
            return Err(Error::NonUnit { k: b, modulus: self.d2 });
        }
        Ok(self.psi_inv(a, b))
    }

    /// The unit z = χ^{-1}(δ2^{-1} mod δ1, δ1^{-1} mod δ2).
    ///
    /// With M = Ω_{δ1} θ(v) Ω_{δ2} and μ the DFT of v, `M[ψ(g)] = μ_{z^{-1} g}`,
    /// i.e. M = θ(d_z(μ)).
    pub fn dft_unit(&self) -> usize {
        let a = mod_inverse(self.d2 % self.d1, self.d1).unwrap_or(0);
        let b = mod_inverse(self.d1 % self.d2, self.d2).unwrap_or(0);
        self.psi_inv(a, b)
    }

    /// Cell of the 2-D spectrum holding μ_h.
    pub fn spectrum_cell(&self, h: usize) -> (usize, usize) {
        self.psi(self.dft_unit() * h)
    }

    /// Row-major δ1×δ2 arrangement of a length-ℓ sequence.
    pub fn reshape<T: Copy>(&self, values: &[T]) -> Vec<T> {
        self.index_of.iter().map(|&g| values[g]).collect()
    }

    /// Inverse of `reshape`.
    pub fn flatten<T: Copy + Default>(&self, cells: &[T]) -> Vec<T> {
        let mut out = alloc::vec![T::default(); self.len()];
        for (cell, &g) in self.index_of.iter().enumerate() {
            out[g] = cells[cell];
        }
        out
    }
}

/// A binary matrix with cached marginals.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<u8>,
    row_sums: Vec<i32>,
    col_sums: Vec<i32>,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: alloc::vec![0; rows * cols],
            row_sums: alloc::vec![0; rows],
            col_sums: alloc::vec![0; cols],
        }
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<u8>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected_rows: rows,
                expected_cols: cols,
                rows: entries.len() / cols.max(1),
                cols,
            });
        }
        if entries.iter().any(|&b| b > 1) {
            return Err(Error::NotBinary);
        }
        let mut m = Self::zeros(rows, cols);
        for (i, &b) in entries.iter().enumerate() {
            if b == 1 {
                m.set(i / cols, i % cols, 1);
            }
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::LengthMismatch {
                expected: cols,
                actual: bad.len(),
            });
        }
        Self::from_entries(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, bit: u8) {
        let slot = &mut self.entries[r * self.cols + c];
        let delta = bit as i32 - *slot as i32;
        *slot = bit;
        self.row_sums[r] += delta;
        self.col_sums[c] += delta;
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    pub fn row_sums(&self) -> &[i32] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[i32] {
        &self.col_sums
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) == 1 {
                    t.set(c, r, 1);
                }
            }
        }
        t
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                write!(f, "{}", self.get(r, c))?;
            }
            if r + 1 < self.rows {
                f.write_str("/")?;
            }
        }
        Ok(())
    }
}

/// The δ-compression `q_g = Σ_j v_{g + jδ}`.
pub fn compress(v: &CyclicVector, delta: usize) -> Result<CyclicVector> {
    let n = v.len();
    if delta == 0 || n % delta != 0 {
        return Err(Error::NotDivisor { delta, length: n });
    }
    let mut q = alloc::vec![0i32; delta];
    for (g, &x) in v.entries().iter().enumerate() {
        q[g % delta] += x;
    }
    CyclicVector::new(q)
}

/// θ: binary vector of length ℓ → δ1×δ2 matrix with `A[ψ(g)] = v_g`.
pub fn theta(v: &CyclicVector, ctx: &CrtContext) -> Result<BinaryMatrix> {
    if v.len() != ctx.len() {
        return Err(Error::LengthMismatch {
            expected: ctx.len(),
            actual: v.len(),
        });
    }
    if !v.is_binary() {
        return Err(Error::NotBinary);
    }
    let bits: Vec<u8> = v.entries().iter().map(|&x| x as u8).collect();
    BinaryMatrix::from_entries(ctx.d1(), ctx.d2(), ctx.reshape(&bits))
}

pub fn theta_inv(a: &BinaryMatrix, ctx: &CrtContext) -> Result<CyclicVector> {
    if a.rows() != ctx.d1() || a.cols() != ctx.d2() {
        return Err(Error::ShapeMismatch {
            expected_rows: ctx.d1(),
            expected_cols: ctx.d2(),
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    CyclicVector::from_bits(&ctx.flatten(a.entries()))
}

/// True iff `v` compresses to every vector of `q_list` (the moduli being their lengths).
pub fn validate_simultaneous(v: &CyclicVector, q_list: &[CyclicVector]) -> bool {
    q_list
        .iter()
        .all(|q| compress(v, q.len()).map_or(false, |c| &c == q))
}

/// |Q| = Π_j C(δ2, q_j): the number of vectors compressing to `q`.
pub fn count_decompressions(q: &CyclicVector, delta2: usize) -> Result<BigUint> {
    let mut total = BigUint::from(1u32);
    for (index, &x) in q.entries().iter().enumerate() {
        if x < 0 || x as usize > delta2 {
            return Err(Error::EntryOutOfRange {
                index,
                value: x as i64,
                max: delta2 as i64,
            });
        }
        total *= binomial_big(delta2 as u64, x as u64);
    }
    Ok(total)
}

fn require_coprime_density(v: &CyclicVector) -> Result<()> {
    let density = v.density();
    if gcd(density.unsigned_abs() as usize, v.len()) != 1 {
        return Err(Error::DensityNotCoprime {
            density,
            length: v.len(),
        });
    }
    Ok(())
}

/// |D_{v,q}| = δ2 φ(δ2) |H| / |G_v|: members of v's decimation class whose
/// δ1-compression is exactly `q`.
pub fn class_overlap_count(v: &CyclicVector, q: &CyclicVector, ctx: &CrtContext) -> Result<u64> {
    require_coprime_density(v)?;
    if v.len() != ctx.len() {
        return Err(Error::LengthMismatch {
            expected: ctx.len(),
            actual: v.len(),
        });
    }
    if compress(v, ctx.d1())? != *q {
        return Err(Error::NotACompression);
    }
    let numerator = (ctx.d2() * totient(ctx.d2()) * q.multiplier_group().len()) as u64;
    let g_v = v.multiplier_group().len() as u64;
    if numerator % g_v != 0 {
        return Err(Error::Invariant("class overlap ratio is not an integer"));
    }
    Ok(numerator / g_v)
}

/// Π|H_i| / |G_v|: members of v's decimation class sharing all of the given
/// simultaneous compressions.
pub fn simul_overlap_count(v: &CyclicVector, q_list: &[CyclicVector]) -> Result<u64> {
    require_coprime_density(v)?;
    let product: usize = q_list.iter().map(CyclicVector::len).product();
    let pairwise_coprime = q_list.iter().enumerate().all(|(i, a)| {
        q_list[i + 1..].iter().all(|b| gcd(a.len(), b.len()) == 1)
    });
    if product != v.len() || !pairwise_coprime {
        return Err(Error::InvalidFactorization {
            length: v.len(),
            d1: q_list.first().map_or(0, CyclicVector::len),
            d2: product / q_list.first().map_or(1, CyclicVector::len).max(1),
            reason: "compression lengths must be pairwise coprime with product ℓ",
        });
    }
    if !validate_simultaneous(v, q_list) {
        return Err(Error::NotACompression);
    }
    let numerator: u64 = q_list
        .iter()
        .map(|q| q.multiplier_group().len() as u64)
        .product();
    let g_v = v.multiplier_group().len() as u64;
    if numerator % g_v != 0 {
        return Err(Error::Invariant("simultaneous overlap ratio is not an integer"));
    }
    Ok(numerator / g_v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{dft, psd, two_dim_dft};
    use alloc::vec;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn cv(e: &[i32]) -> CyclicVector {
        CyclicVector::new(e.to_vec()).unwrap()
    }

    const V35: [i32; 35] = [
        1, 1, 0, 1, 1, 1, 0, 1, 0, 1, 1, 0, 1, 0, 1, 1, 0, 0, 1, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0,
        0, 1, 1, 1, 0,
    ];
    const U35: [i32; 35] = [
        1, 1, 0, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 1, 0, 1, 1, 0, 0, 0, 1, 0, 1, 1, 1, 1, 0, 0, 1, 1,
        1, 0, 0, 0, 0,
    ];

    #[test]
    fn compress_examples() {
        let v = cv(&V35);
        assert_eq!(compress(&v, 7).unwrap(), cv(&[4, 2, 1, 4, 3, 3, 1]));
        assert_eq!(compress(&v, 5).unwrap(), cv(&[5, 2, 3, 4, 4]));
        assert_eq!(compress(&cv(&[0; 35]), 5).unwrap(), cv(&[0; 5]));
        assert!(compress(&v, 6).is_err());
        let u = cv(&U35);
        assert_eq!(compress(&u, 7).unwrap(), cv(&[3, 4, 3, 2, 2, 1, 3]));
        assert_eq!(compress(&u, 5).unwrap(), cv(&[6, 3, 2, 4, 3]));
    }

    #[test]
    fn theta_reproduces_displayed_matrix() {
        let ctx = CrtContext::new(7, 5).unwrap();
        let a = theta(&cv(&V35), &ctx).unwrap();
        let expected = BinaryMatrix::from_rows(&[
            vec![1, 0, 1, 1, 1],
            vec![1, 1, 0, 0, 0],
            vec![0, 0, 0, 0, 1],
            vec![1, 1, 0, 1, 1],
            vec![0, 0, 1, 1, 1],
            vec![1, 0, 1, 1, 0],
            vec![1, 0, 0, 0, 0],
        ])
        .unwrap();
        assert_eq!(a, expected);
        assert_eq!(a.row_sums(), &[4, 2, 1, 4, 3, 3, 1]);
        assert_eq!(a.col_sums(), &[5, 2, 3, 4, 4]);
        assert_eq!(theta_inv(&a, &ctx).unwrap(), cv(&V35));
        let zero = theta(&cv(&[0; 35]), &ctx).unwrap();
        assert_eq!(zero, BinaryMatrix::zeros(7, 5));
    }

    #[test]
    fn theta_round_trip_and_marginals() {
        let ctx = CrtContext::new(7, 5).unwrap();
        let mut rng = StdRng::seed_from_u64(4);
        for _ in 0..100 {
            let v = cv(&(0..35).map(|_| rng.gen_range(0..2)).collect::<Vec<_>>());
            let a = theta(&v, &ctx).unwrap();
            assert_eq!(theta_inv(&a, &ctx).unwrap(), v);
            assert_eq!(a.row_sums(), compress(&v, 7).unwrap().entries());
            assert_eq!(a.col_sums(), compress(&v, 5).unwrap().entries());
        }
    }

    #[test]
    fn crt_maps() {
        let ctx = CrtContext::new(7, 5).unwrap();
        assert_eq!(ctx.psi(1), (1, 1));
        assert_eq!(ctx.chi(3).unwrap(), (3, 3));
        assert_eq!(ctx.dft_unit(), 3);
        assert!(ctx.chi(7).is_err());
        assert_eq!(ctx.chi_inv(3, 3).unwrap(), 3);
        let mut seen = vec![false; 35];
        for g in 0..35 {
            let (r, c) = ctx.psi(g);
            assert_eq!(ctx.psi_inv(r, c), g);
            seen[r * 5 + c] = true;
        }
        assert!(seen.into_iter().all(|x| x));
        assert!(CrtContext::new(3, 6).is_err());
    }

    #[test]
    fn two_dim_dft_is_permuted_dft() {
        let ctx = CrtContext::new(7, 5).unwrap();
        let v = cv(&V35);
        let m = two_dim_dft(theta(&v, &ctx).unwrap().entries(), 7, 5).unwrap();
        let mu = dft(&v);
        for h in 0..35 {
            let (r, c) = ctx.spectrum_cell(h);
            assert!((m.get(r, c) - mu.values()[h]).norm() < 1e-9);
        }
    }

    #[test]
    fn simultaneous_examples() {
        let q1 = cv(&[4, 2, 1, 4, 3, 3, 1]);
        let q2 = cv(&[5, 2, 3, 4, 4]);
        assert!(validate_simultaneous(&cv(&V35), &[q1.clone(), q2.clone()]));
        let p = [cv(&[3, 4, 3, 2, 2, 1, 3]), cv(&[6, 3, 2, 4, 3])];
        assert!(validate_simultaneous(&cv(&U35), &p));
        let mut w = V35;
        let i = (0..34).find(|&i| w[i] != w[i + 1]).unwrap();
        w.swap(i, i + 1);
        assert!(!validate_simultaneous(&cv(&w), &[q1, q2]));
    }

    #[test]
    fn count_decompressions_examples() {
        assert_eq!(count_decompressions(&cv(&[0, 0, 0]), 5).unwrap(), BigUint::from(1u32));
        assert_eq!(
            count_decompressions(&cv(&[4, 2, 1, 4, 3, 3, 1]), 5).unwrap(),
            BigUint::from(625_000u32)
        );
        assert_eq!(count_decompressions(&cv(&[5; 4]), 5).unwrap(), BigUint::from(1u32));
        assert!(count_decompressions(&cv(&[6, 0]), 5).is_err());
    }

    #[test]
    fn overlap_count_rejects_noncoprime_density() {
        let ctx = CrtContext::new(3, 5).unwrap();
        let v = cv(&[1; 15]);
        let q = compress(&v, 3).unwrap();
        assert!(matches!(
            class_overlap_count(&v, &q, &ctx),
            Err(Error::DensityNotCoprime { .. })
        ));
        assert!(simul_overlap_count(&v, &[q, compress(&v, 5).unwrap()]).is_err());
    }

    #[test]
    fn compression_preserves_density_and_psd() {
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..20 {
            let v = cv(&(0..35).map(|_| rng.gen_range(0..2)).collect::<Vec<_>>());
            for d in [5usize, 7] {
                let q = compress(&v, d).unwrap();
                assert_eq!(q.density(), v.density());
                let (pv, pq) = (psd(&v), psd(&q));
                for g in 0..d {
                    assert!((pq.values()[g] - pv.values()[g * 35 / d]).abs() < 1e-9);
                }
            }
        }
    }
}
