//! Brute-force references. Everything here is computed from definitions with
//! local helpers only, so it can be used to check the rest of the crate.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::{Error, Result};

/// Largest length accepted by [`oracle_lp`].
pub const MAX_LP_LENGTH: usize = 21;
/// Largest cell count accepted by [`oracle_bmfm`].
pub const MAX_BMFM_CELLS: usize = 20;
/// Largest `rows + cols` accepted by [`oracle_feasible_subsets`].
pub const MAX_SUBSET_LINES: usize = 24;
/// Largest length accepted by [`oracle_orbit`].
pub const MAX_ORBIT_LENGTH: usize = 35;

fn refuse(size: usize, limit: usize) -> Error {
    Error::TooLarge { size, limit }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn unit_list(n: usize) -> Vec<usize> {
    (1..=n).filter(|&k| gcd(k % n, n) == 1).map(|k| k % n).collect()
}

fn autocorrelation(v: &[u8]) -> Vec<i64> {
    let n = v.len();
    (0..n)
        .map(|g| (0..n).map(|j| v[j] as i64 * v[(j + g) % n] as i64).sum())
        .collect()
}

/// All images `c_j(d_k(v))`: entry at g is `v[k^{-1}(g − j)]`, i.e. the
/// source index of g is found by solving `k·s + j = g`.
fn images(v: &[i32]) -> BTreeSet<Vec<i32>> {
    let n = v.len();
    let mut out = BTreeSet::new();
    for k in unit_list(n) {
        for j in 0..n {
            let mut w = alloc::vec![0; n];
            for (s, &x) in v.iter().enumerate() {
                w[(k * s + j) % n] = x;
            }
            out.insert(w);
        }
    }
    out
}

fn class_min(v: &[i32]) -> Vec<i32> {
    images(v).into_iter().next().unwrap_or_default()
}

/// Canonical pair key, as the sorted pair of class minima.
pub type OracleKey = (Vec<i32>, Vec<i32>);

fn key_of(u: &[i32], v: &[i32]) -> OracleKey {
    let (a, b) = (class_min(u), class_min(v));
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Every {0,1} Legendre pair of length ℓ, up to equivalence.
///
/// Vectors of weight (ℓ+1)/2 are grouped by PAF; each class minimum is joined
/// with the group holding its complementary PAF.
pub fn oracle_lp(length: usize) -> Result<BTreeSet<OracleKey>> {
    if length > MAX_LP_LENGTH {
        return Err(refuse(length, MAX_LP_LENGTH));
    }
    if length % 2 == 0 || length < 3 {
        return Err(Error::InvalidFactorization {
            length,
            d1: length,
            d2: 1,
            reason: "length must be odd and at least 3",
        });
    }
    let n = length;
    let kappa = (n + 1) / 2;
    let lambda = kappa as i64;
    let mut groups: BTreeMap<Vec<i64>, Vec<Vec<u8>>> = BTreeMap::new();
    for mask in 0u32..1 << n {
        if mask.count_ones() as usize != kappa {
            continue;
        }
        let v: Vec<u8> = (0..n).map(|i| (mask >> i & 1) as u8).collect();
        groups.entry(autocorrelation(&v)[1..].to_vec()).or_default().push(v);
    }
    let mut minima: BTreeMap<Vec<u8>, Vec<i32>> = BTreeMap::new();
    let mut min_of = |v: &Vec<u8>| -> Vec<i32> {
        minima
            .entry(v.clone())
            .or_insert_with(|| class_min(&v.iter().map(|&x| x as i32).collect::<Vec<_>>()))
            .clone()
    };
    let mut keys = BTreeSet::new();
    for (tail, members) in &groups {
        let want: Vec<i64> = tail.iter().map(|x| lambda - x).collect();
        let Some(partners) = groups.get(&want) else {
            continue;
        };
        for u in members {
            let as_int: Vec<i32> = u.iter().map(|&x| x as i32).collect();
            if min_of(u) != as_int {
                continue;
            }
            let mut seen = BTreeSet::new();
            for v in partners {
                let m = min_of(v);
                if seen.insert(m.clone()) {
                    keys.insert(key_of(&as_int, &m));
                }
            }
        }
    }
    Ok(keys)
}

/// Number of binary matrices with the given marginals, and the matrices
/// themselves (row-major), by testing all `2^(rows·cols)` candidates.
pub fn oracle_bmfm(rows: &[i32], cols: &[i32]) -> Result<(u64, Vec<Vec<u8>>)> {
    let (r, c) = (rows.len(), cols.len());
    if r * c > MAX_BMFM_CELLS {
        return Err(refuse(r * c, MAX_BMFM_CELLS));
    }
    let mut found = Vec::new();
    for mask in 0u64..1 << (r * c) {
        let cell = |i: usize, j: usize| (mask >> (i * c + j) & 1) as i32;
        let rows_ok = (0..r).all(|i| (0..c).map(|j| cell(i, j)).sum::<i32>() == rows[i]);
        if rows_ok && (0..c).all(|j| (0..r).map(|i| cell(i, j)).sum::<i32>() == cols[j]) {
            found.push((0..r * c).map(|k| (mask >> k & 1) as u8).collect());
        }
    }
    Ok((found.len() as u64, found))
}

/// Subset criterion: a matrix exists iff the totals agree, the entries fit,
/// and `t(I,J) = |I||J| + Σ_{i∉I} q_i − Σ_{j∈J} p_j ≥ 0` for all I, J.
pub fn oracle_feasible_subsets(rows: &[i32], cols: &[i32]) -> Result<bool> {
    let (r, c) = (rows.len(), cols.len());
    if r + c > MAX_SUBSET_LINES {
        return Err(refuse(r + c, MAX_SUBSET_LINES));
    }
    let in_range = rows.iter().all(|&x| x >= 0 && x as usize <= c) && cols.iter().all(|&x| x >= 0 && x as usize <= r);
    if !in_range || rows.iter().sum::<i32>() != cols.iter().sum::<i32>() {
        return Ok(false);
    }
    for i_mask in 0u32..1 << r {
        let size_i = i_mask.count_ones() as i64;
        let outside: i64 = (0..r).filter(|i| i_mask >> i & 1 == 0).map(|i| rows[i] as i64).sum();
        for j_mask in 0u32..1 << c {
            let size_j = j_mask.count_ones() as i64;
            let inside: i64 = (0..c).filter(|j| j_mask >> j & 1 == 1).map(|j| cols[j] as i64).sum();
            if size_i * size_j + outside - inside < 0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A member of a decimation class with its compressions at every proper divisor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitMember {
    pub vector: Vec<i32>,
    /// `(δ, δ-compression)` for each divisor 1 < δ < ℓ.
    pub compressions: Vec<(usize, Vec<i32>)>,
}

/// The full decimation class of `v`, without repeats, sorted.
pub fn oracle_orbit(v: &[i32]) -> Result<Vec<OrbitMember>> {
    let n = v.len();
    if n > MAX_ORBIT_LENGTH {
        return Err(refuse(n, MAX_ORBIT_LENGTH));
    }
    if n == 0 {
        return Err(Error::EmptyVector);
    }
    let deltas: Vec<usize> = (2..n).filter(|d| n % d == 0).collect();
    Ok(images(v)
        .into_iter()
        .map(|w| {
            let compressions = deltas
                .iter()
                .map(|&d| {
                    let mut q = alloc::vec![0; d];
                    for (g, &x) in w.iter().enumerate() {
                        q[g % d] += x;
                    }
                    (d, q)
                })
                .collect();
            OrbitMember {
                vector: w,
                compressions,
            }
        })
        .collect())
}

/// Members of the orbit whose compressions match every `(δ, q)` given.
pub fn orbit_count_matching(orbit: &[OrbitMember], wanted: &[(usize, Vec<i32>)]) -> usize {
    orbit
        .iter()
        .filter(|m| {
            wanted.iter().all(|(d, q)| {
                m.compressions.iter().any(|(e, c)| e == d && c == q)
            })
        })
        .count()
}
