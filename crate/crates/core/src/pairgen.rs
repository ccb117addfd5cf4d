//! Compressed complementary pairs: candidate enumeration, pairing and the
//! decimation expansion that restores couplings lost to canonicalization.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::cyclic::{CyclicVector, MultiplierGroup};
use crate::modular::{gcd, mod_inverse, units};
use crate::spectral::{paf, psd, PafVector, PsdVector, PSD_TOLERANCE};
use crate::{Error, Result};

/// Parameters of one compression level of a length-ℓ search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompressionParams {
    /// Length δ of the compressed vectors.
    pub delta: usize,
    /// Entry bound ℓ/δ.
    pub multiplicity: usize,
    pub kappa: i64,
    pub lambda: i64,
    pub gamma: f64,
}

impl CompressionParams {
    /// Parameters for {0,1} Legendre pairs: κ = λ = γ = (ℓ+1)/2.
    pub fn legendre(length: usize, delta: usize) -> Result<Self> {
        if delta == 0 || length % delta != 0 {
            return Err(Error::NotDivisor { delta, length });
        }
        if length % 2 == 0 {
            return Err(Error::InvalidFactorization {
                length,
                d1: delta,
                d2: length / delta,
                reason: "length must be odd",
            });
        }
        let kappa = (length as i64 + 1) / 2;
        Ok(Self {
            delta,
            multiplicity: length / delta,
            kappa,
            lambda: kappa,
            gamma: kappa as f64,
        })
    }

    pub fn length(&self) -> usize {
        self.delta * self.multiplicity
    }

    /// Required PAF sum of a compressed pair at every nonzero lag, (ℓ/δ)·λ.
    pub fn pair_paf(&self) -> i64 {
        self.multiplicity as i64 * self.lambda
    }

    /// Σq² + Σp² = 2κ² − (δ−1)(ℓ/δ)λ.
    pub fn square_sum(&self) -> i64 {
        2 * self.kappa * self.kappa - (self.delta as i64 - 1) * self.pair_paf()
    }
}

/// A decimation-class representative that passes the PSD test.
#[derive(Clone, Debug, PartialEq)]
pub struct CompressedCandidate {
    pub vector: CyclicVector,
    pub psd: PsdVector,
    pub paf: PafVector,
    pub multipliers: MultiplierGroup,
}

impl CompressedCandidate {
    fn new(vector: CyclicVector) -> Self {
        Self {
            psd: psd(&vector),
            paf: paf(&vector),
            multipliers: vector.multiplier_group(),
            vector,
        }
    }
}

/// A compressed complementary pair.
///
/// `q` is the smaller of the two class representatives; `p` is a decimation of
/// the other representative chosen so that `(q, p)` is complementary. Expanded
/// variants replace `p` by `d_s(p)` for `s` in `expansion`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompressedPair {
    pub q: CyclicVector,
    pub p: CyclicVector,
    /// Candidate-list indices of the classes of `q` and `p`.
    pub classes: (usize, usize),
    /// Units s, not multipliers of `p`, with PAF(d_s p) = PAF(p).
    pub expansion: Vec<usize>,
    /// Decimation applied to the base partner (1 for a base pair).
    pub applied: usize,
    pub params: CompressionParams,
}

impl CompressedPair {
    /// Verifies the exact PAF condition, the square-sum identity and the PSD sums.
    pub fn check(&self) -> Result<()> {
        let target = self.params.pair_paf();
        let (a, b) = (paf(&self.q), paf(&self.p));
        for g in 1..self.params.delta {
            if a.values()[g] + b.values()[g] != target {
                return Err(Error::NotComplementary { lag: g });
            }
        }
        if a.values()[0] + b.values()[0] != self.params.square_sum() {
            return Err(Error::Invariant("square sum identity fails"));
        }
        let (x, y) = (psd(&self.q), psd(&self.p));
        for g in 1..self.params.delta {
            if (x.values()[g] + y.values()[g] - self.params.gamma).abs() > 1e-9 {
                return Err(Error::Invariant("PSD sum differs from gamma"));
            }
        }
        Ok(())
    }
}

/// Minimum Σx² over `n` nonnegative integers summing to `total`.
fn min_square_sum(total: i64, n: i64) -> i64 {
    let (base, extra) = (total / n, total % n);
    extra * (base + 1) * (base + 1) + (n - extra) * base * base
}

struct Walker<'a> {
    params: &'a CompressionParams,
    entries: Vec<i32>,
    /// Partial PAF by lag from pairs with both ends assigned.
    partial: Vec<i64>,
    squares: i64,
    square_cap: i64,
    out: Vec<CyclicVector>,
}

impl Walker<'_> {
    fn walk(&mut self, at: usize, left: i64) {
        let delta = self.params.delta;
        let bound = self.params.multiplicity as i32;
        if at == delta {
            if left == 0 {
                self.leaf();
            }
            return;
        }
        let low = self.entries[0];
        let slots = (delta - at) as i64;
        if left < low as i64 * slots || left > bound as i64 * slots {
            return;
        }
        let cap = self.params.pair_paf();
        for x in low..=bound.min(left as i32) {
            let mut ok = self.squares + (x as i64) * (x as i64) <= self.square_cap;
            if !ok {
                break;
            }
            for (j, &y) in self.entries[..at].iter().enumerate() {
                let d = at - j;
                let w = x as i64 * y as i64;
                self.partial[d] += w;
                self.partial[delta - d] += w;
            }
            if self.partial[1..].iter().any(|&s| s > cap) {
                ok = false;
            }
            if ok {
                self.entries[at] = x;
                self.squares += (x as i64) * (x as i64);
                self.walk(at + 1, left - x as i64);
                self.squares -= (x as i64) * (x as i64);
            }
            for (j, &y) in self.entries[..at].iter().enumerate() {
                let d = at - j;
                let w = x as i64 * y as i64;
                self.partial[d] -= w;
                self.partial[delta - d] -= w;
            }
        }
    }

    fn leaf(&mut self) {
        let v = match CyclicVector::new(self.entries.clone()) {
            Ok(v) => v,
            Err(_) => return,
        };
        if v.is_decimation_canonical() && psd(&v).max_nonzero() < self.params.gamma + PSD_TOLERANCE {
            self.out.push(v);
        }
    }
}

/// Admissible first entries; each is the minimum entry of the class
/// representatives it leads, so candidate enumeration splits cleanly on it.
pub fn candidate_prefixes(params: &CompressionParams) -> Vec<i32> {
    let max_first = params.kappa / params.delta as i64;
    (0..=max_first.min(params.multiplicity as i64) as i32).collect()
}

/// Candidates whose first entry is `first`, ascending.
pub fn enum_candidates_with_prefix(params: &CompressionParams, first: i32) -> Vec<CompressedCandidate> {
    let delta = params.delta;
    if delta == 0 || first < 0 || first as usize > params.multiplicity || first as i64 > params.kappa {
        return Vec::new();
    }
    // PAF(0) of the partner is at least the balanced minimum.
    let square_cap = params.square_sum() - min_square_sum(params.kappa, delta as i64);
    let mut walker = Walker {
        params,
        entries: alloc::vec![0; delta],
        partial: alloc::vec![0; delta],
        squares: (first as i64) * (first as i64),
        square_cap,
        out: Vec::new(),
    };
    walker.entries[0] = first;
    if walker.squares <= square_cap {
        walker.walk(1, params.kappa - first as i64);
    }
    let mut out = walker.out;
    out.sort();
    out.into_iter().map(CompressedCandidate::new).collect()
}

/// One representative per decimation class of vectors with entries in
/// `0..=ℓ/δ`, sum κ and passing the PSD test, in ascending order.
///
/// Classes that cannot belong to any compressed pair (PAF too large at some
/// lag, or Σq² too large) are skipped.
pub fn enum_candidates(params: &CompressionParams) -> Vec<CompressedCandidate> {
    let mut out: Vec<CompressedCandidate> = candidate_prefixes(params)
        .into_iter()
        .flat_map(|first| enum_candidates_with_prefix(params, first))
        .collect();
    out.sort_by(|a, b| a.vector.cmp(&b.vector));
    out
}

/// PAF tail (lags 1..δ−1) of `d_k(v)` given the PAF of `v`: lag g maps to lag k^{-1} g.
fn decimated_tail(paf: &[i64], k_inv: usize) -> Vec<i64> {
    let n = paf.len();
    (1..n).map(|g| paf[(k_inv * g) % n]).collect()
}

/// Unordered pairs of candidate classes {A, B} (A = B allowed) such that some
/// member of A is complementary to some member of B, in ascending class order.
///
/// Matching is an exact join on PAF tails: for each class A and each unit k,
/// the complement of PAF(d_k a) is looked up among representative PAFs.
pub fn match_pairs(candidates: &[CompressedCandidate], params: &CompressionParams) -> Vec<CompressedPair> {
    let delta = params.delta;
    let target = params.pair_paf();
    let mut index: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    for (i, c) in candidates.iter().enumerate() {
        index.entry(c.paf.values()[1..].to_vec()).or_default().push(i);
    }
    let unit_list = units(delta);
    let mut found: BTreeMap<(usize, usize), ()> = BTreeMap::new();
    for (i, c) in candidates.iter().enumerate() {
        for &k in &unit_list {
            let k_inv = mod_inverse(k, delta).unwrap_or(0);
            let want: Vec<i64> = decimated_tail(c.paf.values(), k_inv)
                .into_iter()
                .map(|x| target - x)
                .collect();
            if let Some(hits) = index.get(&want) {
                for &j in hits {
                    let key = if i <= j { (i, j) } else { (j, i) };
                    if square_ok(c, &candidates[j], params) {
                        found.insert(key, ());
                    }
                }
            }
        }
    }
    found
        .into_keys()
        .filter_map(|(i, j)| base_pair(candidates, i, j, params))
        .collect()
}

fn square_ok(a: &CompressedCandidate, b: &CompressedCandidate, params: &CompressionParams) -> bool {
    a.paf.values()[0] + b.paf.values()[0] == params.square_sum()
}

fn base_pair(candidates: &[CompressedCandidate], i: usize, j: usize, params: &CompressionParams) -> Option<CompressedPair> {
    let delta = params.delta;
    let target = params.pair_paf();
    let anchor = &candidates[i];
    let other = &candidates[j];
    let want: Vec<i64> = anchor.paf.values()[1..].iter().map(|x| target - x).collect();
    let k = units(delta).into_iter().find(|&k| {
        let k_inv = mod_inverse(k, delta).unwrap_or(0);
        decimated_tail(other.paf.values(), k_inv) == want
    })?;
    let p = other.vector.decimate(k).ok()?;
    Some(CompressedPair {
        q: anchor.vector.clone(),
        expansion: psd_equiv_decimations(&p),
        p,
        classes: (i, j),
        applied: 1,
        params: *params,
    })
}

/// S = { s ∈ Z_δ^× : s is not a multiplier of q and PAF(d_s q) = PAF(q) }.
///
/// PAF equality is the exact form of PSD equality.
pub fn psd_equiv_decimations(q: &CyclicVector) -> Vec<usize> {
    let n = q.len();
    let base = paf(q);
    let multipliers = q.multiplier_group();
    units(n)
        .into_iter()
        .filter(|&s| !multipliers.contains(s))
        .filter(|&s| {
            let s_inv = mod_inverse(s, n).unwrap_or(0);
            (0..n).all(|g| base.values()[(s_inv * g) % n] == base.values()[g])
        })
        .collect()
}

/// Emits each pair once unchanged, then once per `s` in its expansion set with
/// the partner replaced by `d_s(p)`.
pub fn expand_pairs(pairs: &[CompressedPair]) -> Vec<CompressedPair> {
    let mut out = Vec::new();
    for pair in pairs {
        out.push(pair.clone());
        for &s in &pair.expansion {
            if let Ok(p) = pair.p.decimate(s) {
                out.push(CompressedPair {
                    p,
                    applied: s,
                    ..pair.clone()
                });
            }
        }
    }
    out
}

/// Candidates, base pairs and expanded pairs for one compression level.
pub fn compressed_pairs(params: &CompressionParams) -> (Vec<CompressedCandidate>, Vec<CompressedPair>, Vec<CompressedPair>) {
    let candidates = enum_candidates(params);
    let base = match_pairs(&candidates, params);
    let expanded = expand_pairs(&base);
    (candidates, base, expanded)
}

/// True iff `δ` and `ℓ/δ` are coprime, as required by the CRT reshaping.
pub fn is_coprime_split(params: &CompressionParams) -> bool {
    gcd(params.delta, params.multiplicity) == 1
}
