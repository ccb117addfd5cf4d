//! Integer sequences indexed by Z_ℓ and the shift/decimation actions on them.
//!
//! `shift(v, j)_g = v_{g-j}` and `decimate(v, k)_g = v_{k^{-1} g}`, both with
//! indices taken mod ℓ. A decimation class is the orbit of a vector under the
//! group generated by both actions.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::Index;

use crate::modular::{gcd, mod_inverse, units};
use crate::{Error, Result};

/// An integer vector indexed by Z_ℓ.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CyclicVector {
    entries: Vec<i32>,
}

/// The `(j, k)` witnessing `c_j(d_k(v)) == canon`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Witness {
    pub shift: usize,
    pub multiplier: usize,
}

/// A multiplier `g` together with a shift `j` such that `c_j(d_g(v)) == v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Multiplier {
    pub unit: usize,
    pub shift: usize,
}

/// The multiplier subgroup G_v of Z_ℓ^×.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplierGroup {
    modulus: usize,
    members: Vec<Multiplier>,
}

impl MultiplierGroup {
    pub fn modulus(&self) -> usize {
        self.modulus
    }

    /// Members sorted by unit.
    pub fn members(&self) -> &[Multiplier] {
        &self.members
    }

    pub fn units(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().map(|m| m.unit)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, g: usize) -> bool {
        let g = g % self.modulus.max(1);
        self.members.binary_search_by_key(&g, |m| m.unit).is_ok()
    }

    pub fn witness(&self, g: usize) -> Option<usize> {
        let g = g % self.modulus.max(1);
        self.members
            .binary_search_by_key(&g, |m| m.unit)
            .ok()
            .map(|i| self.members[i].shift)
    }
}

impl CyclicVector {
    pub fn new(entries: Vec<i32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyVector);
        }
        Ok(Self { entries })
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(alloc::vec![0; len])
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        Self::new(bits.iter().map(|&b| b as i32).collect())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn entries(&self) -> &[i32] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<i32> {
        self.entries
    }

    /// Entry at `g mod ℓ`.
    pub fn at(&self, g: usize) -> i32 {
        self.entries[g % self.entries.len()]
    }

    /// Entry sum κ.
    pub fn density(&self) -> i64 {
        self.entries.iter().map(|&x| x as i64).sum()
    }

    pub fn is_binary(&self) -> bool {
        self.entries.iter().all(|&x| x == 0 || x == 1)
    }

    pub fn shift(&self, j: usize) -> Self {
        let n = self.len();
        let j = j % n;
        let entries = (0..n).map(|g| self.entries[(g + n - j) % n]).collect();
        Self { entries }
    }

    pub fn decimate(&self, k: usize) -> Result<Self> {
        let n = self.len();
        let inv = mod_inverse(k % n, n).ok_or(Error::NonUnit { k, modulus: n })?;
        Ok(self.decimate_by_inverse(inv))
    }

    /// `decimate` given `k^{-1}` directly; `inv` must be a unit.
    fn decimate_by_inverse(&self, inv: usize) -> Self {
        let n = self.len();
        let entries = (0..n).map(|g| self.entries[(inv * g) % n]).collect();
        Self { entries }
    }

    /// Smallest rotation and the shift `j` with `c_j(v)` equal to it (smallest such `j`).
    pub fn necklace_canon(&self) -> (Self, usize) {
        let start = min_rotation_start(&self.entries);
        let n = self.len();
        let rotated = (0..n).map(|g| self.entries[(start + g) % n]).collect();
        (Self { entries: rotated }, (n - start) % n)
    }

    /// Lexicographically smallest member of the decimation class, with a witness.
    pub fn decimation_canon(&self) -> (Self, Witness) {
        let n = self.len();
        let mut best: Option<(Self, Witness)> = None;
        for k in units(n) {
            let inv = mod_inverse(k, n).unwrap_or(0);
            let d = self.decimate_by_inverse(inv);
            let start = min_rotation_start(&d.entries);
            let better = match &best {
                None => true,
                Some((b, _)) => {
                    compare_rotation(&d.entries, start, &b.entries) == Ordering::Less
                }
            };
            if better {
                let rotated = (0..n).map(|g| d.entries[(start + g) % n]).collect();
                best = Some((
                    Self { entries: rotated },
                    Witness {
                        shift: (n - start) % n,
                        multiplier: k,
                    },
                ));
            }
        }
        best.expect("unit group is never empty")
    }

    /// True when no shifted decimation of `self` is lexicographically smaller.
    pub fn is_decimation_canonical(&self) -> bool {
        let n = self.len();
        let mut image = alloc::vec![0i32; n];
        for k in units(n) {
            let inv = mod_inverse(k, n).unwrap_or(0);
            for (g, slot) in image.iter_mut().enumerate() {
                *slot = self.entries[(inv * g) % n];
            }
            for start in 0..n {
                if compare_rotation(&image, start, &self.entries) == Ordering::Less {
                    return false;
                }
            }
        }
        true
    }

    /// All units g with some shift j satisfying `c_j(d_g(v)) == v`.
    pub fn multiplier_group(&self) -> MultiplierGroup {
        let n = self.len();
        let mut members = Vec::new();
        for g in units(n) {
            let inv = mod_inverse(g, n).unwrap_or(0);
            let d = self.decimate_by_inverse(inv);
            // c_j(d)_h = d_{h-j}; c_j(d) == v  <=>  d rotated to start at n-j equals v
            if let Some(start) = (0..n).find(|&s| compare_rotation(&d.entries, s, &self.entries) == Ordering::Equal) {
                members.push(Multiplier {
                    unit: g,
                    shift: (n - start) % n,
                });
            }
        }
        MultiplierGroup {
            modulus: n,
            members,
        }
    }
}

/// Compares the rotation of `v` starting at `start` against `other`.
fn compare_rotation(v: &[i32], start: usize, other: &[i32]) -> Ordering {
    let n = v.len();
    for (g, &o) in other.iter().enumerate() {
        match v[(start + g) % n].cmp(&o) {
            Ordering::Equal => continue,
            ord => return ord,
        }
    }
    Ordering::Equal
}

fn min_rotation_start(v: &[i32]) -> usize {
    let n = v.len();
    let mut best = 0;
    for s in 1..n {
        if cmp_rotations(v, s, best) == Ordering::Less {
            best = s;
        }
    }
    best
}

fn cmp_rotations(v: &[i32], a: usize, b: usize) -> Ordering {
    let n = v.len();
    for g in 0..n {
        match v[(a + g) % n].cmp(&v[(b + g) % n]) {
            Ordering::Equal => continue,
            ord => return ord,
        }
    }
    Ordering::Equal
}

/// gcd(ℓ, κ) = 1 guarantees that all ℓ rotations are distinct.
pub fn has_distinct_rotations(v: &CyclicVector) -> bool {
    gcd(v.len(), v.density().unsigned_abs() as usize) == 1
}

impl Index<usize> for CyclicVector {
    type Output = i32;

    fn index(&self, g: usize) -> &i32 {
        &self.entries[g]
    }
}

impl TryFrom<Vec<i32>> for CyclicVector {
    type Error = Error;

    fn try_from(entries: Vec<i32>) -> Result<Self> {
        Self::new(entries)
    }
}

impl fmt::Debug for CyclicVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.entries)
    }
}

impl fmt::Display for CyclicVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_binary() {
            for &x in &self.entries {
                write!(f, "{x}")?;
            }
            Ok(())
        } else {
            for (i, x) in self.entries.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{x}")?;
            }
            Ok(())
        }
    }
}
