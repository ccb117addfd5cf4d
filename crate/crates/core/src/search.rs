//! End-to-end search: combine compressed pairs of the two moduli, enumerate the
//! four decompression instances of each combination and match them on the
//! spectrum at index 1.
//!
//! Once both compressions of u and v are complementary, the only spectral
//! constraints left are at indices coprime to ℓ, which form one Galois orbit.
//! `PSD(u,1) + PSD(v,1) = γ` is therefore sufficient, and every hit is
//! confirmed with exact integer arithmetic anyway.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::ControlFlow;

use num_traits::{Float, ToPrimitive};

use crate::bmfm::{count, Enumerator, MarginalInstance};
use crate::compress::{BinaryMatrix, CrtContext};
use crate::cyclic::CyclicVector;
use crate::modular::gcd;
use crate::pairgen::{compressed_pairs, CompressedPair, CompressionParams};
use crate::spectral::{first_failing_lag, paf_lag, ComplexMatrix, PSD_TOLERANCE};
use crate::{Error, Result};

/// Tuning knobs for matching. None of them changes the result set.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    /// Decimal digits of PSD(·,1) used as the bucket key.
    pub bucket_precision: u32,
    /// Estimated bytes the materialized side may occupy before it is split by
    /// its leading rows.
    pub max_bucket_memory: usize,
    /// Half-width of the probe window around γ − PSD(·,1).
    pub tolerance: f64,
    /// Compare every pair exactly instead of probing buckets.
    pub exhaustive: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            bucket_precision: 6,
            max_bucket_memory: 1 << 30,
            tolerance: PSD_TOLERANCE,
            exhaustive: false,
        }
    }
}

/// One combination of a δ1-pair with a δ2-pair.
///
/// `instances[2a + b]` has row sums from member `a` of `pair1` and column sums
/// from member `b` of `pair2` (member 0 is `q`, member 1 is `p`).
#[derive(Clone, Debug, PartialEq)]
pub struct SearchTask {
    pub id: usize,
    pub pair1: CompressedPair,
    pub pair2: CompressedPair,
    pub instances: [MarginalInstance; 4],
}

/// Instance indices matched against each other: `(q¹q², p¹p²)` and `(q¹p², p¹q²)`.
pub const MATCHINGS: [(usize, usize); 2] = [(0, 3), (1, 2)];

impl SearchTask {
    pub fn new(id: usize, pair1: CompressedPair, pair2: CompressedPair) -> Self {
        let members1 = [&pair1.q, &pair1.p];
        let members2 = [&pair2.q, &pair2.p];
        let instances = core::array::from_fn(|i| {
            MarginalInstance::new(
                members1[i / 2].entries().to_vec(),
                members2[i % 2].entries().to_vec(),
            )
        });
        Self {
            id,
            pair1,
            pair2,
            instances,
        }
    }
}

pub fn task_count(pairs1: &[CompressedPair], pairs2: &[CompressedPair]) -> usize {
    pairs1.len() * pairs2.len()
}

/// Task `id` of the row-major product `pairs1 × pairs2`.
pub fn task_by_id(pairs1: &[CompressedPair], pairs2: &[CompressedPair], id: usize) -> Option<SearchTask> {
    if pairs2.is_empty() || id >= task_count(pairs1, pairs2) {
        return None;
    }
    let (i, j) = (id / pairs2.len(), id % pairs2.len());
    Some(SearchTask::new(id, pairs1[i].clone(), pairs2[j].clone()))
}

pub fn build_tasks<'a>(
    pairs1: &'a [CompressedPair],
    pairs2: &'a [CompressedPair],
) -> impl Iterator<Item = SearchTask> + 'a {
    (0..task_count(pairs1, pairs2)).filter_map(move |id| task_by_id(pairs1, pairs2, id))
}

/// Equivalence key of a pair: the two decimation-class canonical forms, sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairKey {
    pub first: CyclicVector,
    pub second: CyclicVector,
}

impl PairKey {
    pub fn new(u: &CyclicVector, v: &CyclicVector) -> Self {
        let (a, b) = (u.decimation_canon().0, v.decimation_canon().0);
        if a <= b {
            Self { first: a, second: b }
        } else {
            Self { first: b, second: a }
        }
    }
}

impl fmt::Display for PairKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.first, self.second)
    }
}

/// Where a record was found: task id and the matched instance indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Provenance {
    pub task: usize,
    pub instances: (u8, u8),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LegendrePairRecord {
    pub u: CyclicVector,
    pub v: CyclicVector,
    pub key: PairKey,
    pub lambda: i64,
    pub gamma: i64,
    pub rho_u: i64,
    pub rho_v: i64,
    pub provenance: Option<Provenance>,
}

impl LegendrePairRecord {
    /// Order used for archives: by key, then the earliest provenance.
    pub fn archive_cmp(&self, other: &Self) -> Ordering {
        self.key
            .cmp(&other.key)
            .then_with(|| self.provenance.cmp(&other.provenance))
            .then_with(|| self.u.cmp(&other.u))
            .then_with(|| self.v.cmp(&other.v))
    }
}

/// Σ_{j=1}^{(ℓ−1)/2} PAF(w, j)² with w = 2v − 1.
pub fn correlation_energy(v: &CyclicVector) -> Result<i64> {
    if !v.is_binary() {
        return Err(Error::NotBinary);
    }
    let w: Vec<i32> = v.entries().iter().map(|&x| 2 * x - 1).collect();
    Ok((1..=(v.len() - 1) / 2)
        .map(|j| {
            let p = paf_lag(&w, j);
            p * p
        })
        .sum())
}

/// Validates a {0,1} Legendre pair and builds its record.
pub fn canonicalize_lp(u: &CyclicVector, v: &CyclicVector) -> Result<LegendrePairRecord> {
    let n = u.len();
    if v.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: v.len(),
        });
    }
    if !u.is_binary() || !v.is_binary() {
        return Err(Error::NotBinary);
    }
    let kappa = (n as i64 + 1) / 2;
    for x in [u, v] {
        if x.density() != kappa {
            return Err(Error::DensityMismatch {
                expected: kappa,
                actual: x.density(),
            });
        }
    }
    if let Some((lag, _)) = first_failing_lag(u, v, kappa) {
        return Err(Error::NotComplementary { lag });
    }
    Ok(LegendrePairRecord {
        key: PairKey::new(u, v),
        lambda: kappa,
        gamma: kappa,
        rho_u: correlation_energy(u)?,
        rho_v: correlation_energy(v)?,
        u: u.clone(),
        v: v.clone(),
        provenance: None,
    })
}

/// Sorts by key and keeps the first record of each key under [`LegendrePairRecord::archive_cmp`].
pub fn merge_records(mut records: Vec<LegendrePairRecord>) -> Vec<LegendrePairRecord> {
    records.sort_by(LegendrePairRecord::archive_cmp);
    records.dedup_by(|later, first| later.key == first.key);
    records
}

struct Side<'a> {
    inst: &'a MarginalInstance,
    index: usize,
}

struct Bucketed {
    scale: f64,
    entries: Vec<(Vec<i32>, f64)>,
    buckets: BTreeMap<i64, Vec<usize>>,
}

/// Matches decompressions of one instance pair into records.
struct Matcher<'a> {
    ctx: &'a CrtContext,
    config: &'a SearchConfig,
    cell: (usize, usize),
    lambda: i64,
    gamma: f64,
    task: usize,
    found: BTreeMap<PairKey, LegendrePairRecord>,
}

impl Matcher<'_> {
    fn vector_of(&self, m: &BinaryMatrix) -> Vec<i32> {
        self.ctx.flatten(m.entries()).into_iter().map(i32::from).collect()
    }

    fn psd1(&self, spectrum: &ComplexMatrix) -> f64 {
        spectrum.get(self.cell.0, self.cell.1).norm_sqr()
    }

    fn entry_bytes(&self) -> usize {
        self.ctx.len() * core::mem::size_of::<i32>() + 48
    }

    fn key(&self, x: f64, scale: f64) -> i64 {
        Float::round(x * scale) as i64
    }

    /// Materializes `small` restricted to `fixed` leading rows; `None` on overflow.
    fn materialize(&self, small: &Side, fixed: &[Vec<u8>]) -> Option<Bucketed> {
        let mut e = Enumerator::new(small.inst);
        for (r, bits) in fixed.iter().enumerate() {
            e = e.fix_row(r, bits.clone()).ok()?;
        }
        let scale = 10f64.powi(self.config.bucket_precision as i32);
        let limit = self.config.max_bucket_memory / self.entry_bytes().max(1);
        let mut out = Bucketed {
            scale,
            entries: Vec::new(),
            buckets: BTreeMap::new(),
        };
        let mut overflow = false;
        e.run_with_spectrum(|m, s| {
            if out.entries.len() >= limit {
                overflow = true;
                return ControlFlow::Break(());
            }
            let p = self.psd1(s);
            out.buckets.entry(self.key(p, scale)).or_default().push(out.entries.len());
            out.entries.push((self.vector_of(m), p));
            ControlFlow::Continue(())
        });
        (!overflow).then_some(out)
    }

    fn match_instances(&mut self, left: Side, right: Side) {
        let (cl, cr) = (count(left.inst), count(right.inst));
        if cl == 0u32.into() || cr == 0u32.into() {
            return;
        }
        let (small, big, small_is_left) = if cr < cl {
            (right, left, false)
        } else {
            (left, right, true)
        };
        self.split(&small, &big, small_is_left, &mut Vec::new());
    }

    fn split(&mut self, small: &Side, big: &Side, small_is_left: bool, fixed: &mut Vec<Vec<u8>>) {
        match self.materialize(small, fixed) {
            Some(table) => self.probe(&table, small, big, small_is_left),
            None => {
                let mut e = Enumerator::new(small.inst);
                for (r, bits) in fixed.iter().enumerate() {
                    e = match e.fix_row(r, bits.clone()) {
                        Ok(e) => e,
                        Err(_) => return,
                    };
                }
                for pattern in e.row_patterns(fixed.len()) {
                    fixed.push(pattern);
                    self.split(small, big, small_is_left, fixed);
                    fixed.pop();
                }
            }
        }
    }

    fn probe(&mut self, table: &Bucketed, small: &Side, big: &Side, small_is_left: bool) {
        if table.entries.is_empty() {
            return;
        }
        let mut hits: Vec<(Vec<i32>, Vec<i32>)> = Vec::new();
        Enumerator::new(big.inst).run_with_spectrum(|m, s| {
            let x = self.vector_of(m);
            let need = self.gamma - self.psd1(s);
            let mut consider = |i: usize| {
                let y = &table.entries[i].0;
                if complementary(&x, y, self.lambda) {
                    hits.push((x.clone(), y.clone()));
                }
            };
            if self.config.exhaustive {
                (0..table.entries.len()).for_each(&mut consider);
            } else {
                let lo = self.key(need - self.config.tolerance, table.scale) - 1;
                let hi = self.key(need + self.config.tolerance, table.scale) + 1;
                for (_, ids) in table.buckets.range(lo..=hi) {
                    ids.iter().for_each(|&i| consider(i));
                }
            }
            ControlFlow::Continue(())
        });
        let instances = if small_is_left {
            (small.index as u8, big.index as u8)
        } else {
            (big.index as u8, small.index as u8)
        };
        for (x, y) in hits {
            let (u, v) = if small_is_left { (y, x) } else { (x, y) };
            self.record(u, v, instances);
        }
    }

    fn record(&mut self, u: Vec<i32>, v: Vec<i32>, instances: (u8, u8)) {
        let (Ok(u), Ok(v)) = (CyclicVector::new(u), CyclicVector::new(v)) else {
            return;
        };
        let key = PairKey::new(&u, &v);
        if self.found.contains_key(&key) {
            return;
        }
        if let Ok(mut rec) = canonicalize_lp(&u, &v) {
            rec.provenance = Some(Provenance {
                task: self.task,
                instances,
            });
            self.found.insert(key, rec);
        }
    }
}

fn complementary(x: &[i32], y: &[i32], lambda: i64) -> bool {
    (1..=x.len() / 2).all(|g| paf_lag(x, g) + paf_lag(y, g) == lambda)
}

/// Runs the two cross-matchings of a task. Records are deduplicated by key
/// and sorted; each carries the task id and the instance indices it came from.
pub fn run_task(task: &SearchTask, ctx: &CrtContext, config: &SearchConfig) -> Result<Vec<LegendrePairRecord>> {
    let (r, c) = task.instances[0].shape();
    if r != ctx.d1() || c != ctx.d2() {
        return Err(Error::ShapeMismatch {
            expected_rows: ctx.d1(),
            expected_cols: ctx.d2(),
            rows: r,
            cols: c,
        });
    }
    let lambda = task.pair1.params.lambda;
    let mut matcher = Matcher {
        ctx,
        config,
        cell: ctx.spectrum_cell(1),
        lambda,
        gamma: task.pair1.params.gamma,
        task: task.id,
        found: BTreeMap::new(),
    };
    for (a, b) in MATCHINGS {
        matcher.match_instances(
            Side {
                inst: &task.instances[a],
                index: a,
            },
            Side {
                inst: &task.instances[b],
                index: b,
            },
        );
    }
    Ok(matcher.found.into_values().collect())
}

/// Sizes of every stage of a search, available before any enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchPlan {
    pub length: usize,
    pub factors: (usize, usize),
    pub candidates: (usize, usize),
    pub base_pairs: (usize, usize),
    pub expanded_pairs: (usize, usize),
    pub tasks: usize,
    pub instances: usize,
}

/// Everything needed to run tasks: the plan, both expanded pair lists and the CRT context.
#[derive(Clone, Debug)]
pub struct SearchSetup {
    pub plan: SearchPlan,
    pub pairs1: Vec<CompressedPair>,
    pub pairs2: Vec<CompressedPair>,
    pub ctx: CrtContext,
}

impl SearchSetup {
    pub fn task(&self, id: usize) -> Option<SearchTask> {
        task_by_id(&self.pairs1, &self.pairs2, id)
    }
}

pub fn validate_factors(length: usize, d1: usize, d2: usize) -> Result<()> {
    let bad = |reason| Err(Error::InvalidFactorization { length, d1, d2, reason });
    if d1 < 2 || d2 < 2 {
        return bad("factors must be at least 2");
    }
    if d1 * d2 != length {
        return bad("factors must multiply to the length");
    }
    if gcd(d1, d2) != 1 {
        return bad("factors are not coprime");
    }
    if length % 2 == 0 {
        return bad("length must be odd");
    }
    Ok(())
}

/// Runs candidate enumeration and pairing for both moduli.
pub fn plan_search(length: usize, d1: usize, d2: usize) -> Result<SearchSetup> {
    validate_factors(length, d1, d2)?;
    let (c1, b1, e1) = compressed_pairs(&CompressionParams::legendre(length, d1)?);
    let (c2, b2, e2) = compressed_pairs(&CompressionParams::legendre(length, d2)?);
    let tasks = task_count(&e1, &e2);
    let plan = SearchPlan {
        length,
        factors: (d1, d2),
        candidates: (c1.len(), c2.len()),
        base_pairs: (b1.len(), b2.len()),
        expanded_pairs: (e1.len(), e2.len()),
        tasks,
        instances: 4 * tasks,
    };
    Ok(SearchSetup {
        plan,
        pairs1: e1,
        pairs2: e2,
        ctx: CrtContext::new(d1, d2)?,
    })
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub plan: SearchPlan,
    pub records: Vec<LegendrePairRecord>,
}

/// Sequential search over every task.
pub fn run_search(length: usize, d1: usize, d2: usize, config: &SearchConfig) -> Result<SearchOutcome> {
    let setup = plan_search(length, d1, d2)?;
    let mut all = Vec::new();
    for task in build_tasks(&setup.pairs1, &setup.pairs2) {
        all.extend(run_task(&task, &setup.ctx, config)?);
    }
    Ok(SearchOutcome {
        plan: setup.plan,
        records: merge_records(all),
    })
}

/// Total solutions over a task's four instances, saturating.
pub fn task_weight(task: &SearchTask) -> u64 {
    task.instances
        .iter()
        .map(|i| count(i).to_u64().unwrap_or(u64::MAX))
        .fold(0u64, u64::saturating_add)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cv(e: &[i32]) -> CyclicVector {
        CyclicVector::new(e.to_vec()).unwrap()
    }

    fn legendre7() -> CyclicVector {
        cv(&[0, 1, 1, 0, 1, 0, 0])
    }

    #[test]
    fn energy_examples() {
        assert_eq!(correlation_energy(&cv(&[1; 5])).unwrap(), 50);
        assert_eq!(correlation_energy(&legendre7()).unwrap(), 3);
        assert!(correlation_energy(&cv(&[2, 0, 1])).is_err());
    }

    #[test]
    fn keys_ignore_shifts_and_joint_decimation() {
        let out = run_search(15, 3, 5, &SearchConfig::default()).unwrap();
        let rec = &out.records[0];
        let shifted = PairKey::new(&rec.u.shift(3), &rec.v.shift(9));
        assert_eq!(shifted, rec.key);
        for k in [2usize, 4, 7] {
            let d = PairKey::new(&rec.u.decimate(k).unwrap(), &rec.v.decimate(k).unwrap());
            assert_eq!(d, rec.key);
        }
        assert_eq!(PairKey::new(&rec.v, &rec.u), rec.key);
    }

    #[test]
    fn canonicalize_rejects_non_pairs() {
        let out = run_search(15, 3, 5, &SearchConfig::default()).unwrap();
        let rec = &out.records[0];
        let mut w = rec.v.clone().into_entries();
        let i = (0..14).find(|&i| w[i] != w[i + 1]).unwrap();
        w.swap(i, i + 1);
        assert!(matches!(
            canonicalize_lp(&rec.u, &cv(&w)),
            Err(Error::NotComplementary { .. })
        ));
        assert!(matches!(
            canonicalize_lp(&legendre7(), &legendre7()),
            Err(Error::DensityMismatch { .. })
        ));
        assert!(canonicalize_lp(&rec.u, &rec.v).is_ok());
    }

    #[test]
    fn task_shapes() {
        let setup = plan_search(15, 3, 5).unwrap();
        let tasks: Vec<_> = build_tasks(&setup.pairs1, &setup.pairs2).collect();
        assert_eq!(tasks.len(), setup.plan.tasks);
        for t in &tasks {
            for i in &t.instances {
                assert_eq!(i.shape(), (3, 5));
                assert_eq!(i.row_sums().iter().sum::<i32>(), 8);
                assert_eq!(i.col_sums().iter().sum::<i32>(), 8);
            }
        }
        assert_eq!(build_tasks(&setup.pairs1, &[]).count(), 0);
        let one = build_tasks(&setup.pairs1[..1], &setup.pairs2[..1]).collect::<Vec<_>>();
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn bucketing_and_splitting_do_not_change_results() {
        let base = run_search(15, 3, 5, &SearchConfig::default()).unwrap().records;
        assert!(!base.is_empty());
        let exhaustive = SearchConfig {
            exhaustive: true,
            ..SearchConfig::default()
        };
        assert_eq!(run_search(15, 3, 5, &exhaustive).unwrap().records, base);
        let tiny = SearchConfig {
            max_bucket_memory: 300,
            ..SearchConfig::default()
        };
        let split = run_search(15, 3, 5, &tiny).unwrap().records;
        let keys = |r: &[LegendrePairRecord]| r.iter().map(|x| x.key.clone()).collect::<Vec<_>>();
        assert_eq!(keys(&split), keys(&base));
    }

    #[test]
    fn infeasible_task_is_empty() {
        let setup = plan_search(15, 3, 5).unwrap();
        let mut task = setup.task(0).unwrap();
        for i in task.instances.iter_mut() {
            *i = MarginalInstance::new(vec![5, 3, 0], vec![3, 3, 0, 1, 1]);
        }
        assert!(run_task(&task, &setup.ctx, &SearchConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn factor_validation() {
        assert!(plan_search(15, 3, 5).is_ok());
        assert!(plan_search(45, 3, 15).is_err());
        assert!(plan_search(16, 2, 8).is_err());
        assert!(plan_search(15, 5, 5).is_err());
    }
}
