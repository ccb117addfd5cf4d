//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;
use std::path::Path;
use std::time::{Duration, Instant};

use lp::cli::{cmd_verify, EXIT_OK};
use lp::parallel::{default_threads, pairs_parallel, plan_parallel, run_tasks, RunOptions};
use lp_core::bmfm::{count, enumerate, feasible, MarginalInstance};
use lp_core::compress::{class_overlap_count, compress, count_decompressions, simul_overlap_count, theta, CrtContext};
use lp_core::cyclic::CyclicVector;
use lp_core::modular::gcd;
use lp_core::oracle::{oracle_bmfm, oracle_feasible_subsets, oracle_lp, oracle_orbit, orbit_count_matching};
use lp_core::pairgen::{compressed_pairs, CompressionParams};
use lp_core::search::{build_tasks, SearchConfig};
use lp_core::spectral::{dft, paf, two_dim_dft};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

const V35: [i32; 35] = [
    1, 1, 0, 1, 1, 1, 0, 1, 0, 1, 1, 0, 1, 0, 1, 1, 0, 0, 1, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 1, 1, 0,
];
const U35: [i32; 35] = [
    1, 1, 0, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 1, 0, 1, 1, 0, 0, 0, 1, 0, 1, 1, 1, 1, 0, 0, 1, 1, 1, 0, 0, 0, 0,
];

fn fixture_verification() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/known_l77.seq");
    let start = Instant::now();
    let mut out = Vec::new();
    let code = cmd_verify(&path, &mut out).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let text = String::from_utf8_lossy(&out);
    check(code == EXIT_OK, format!("exit code {code}"))?;
    check(text.contains("kappa 39 (densities 39 39)"), "densities are not 39")?;
    check(text.contains("= 39 at all 76 nonzero lags"), "PAF sums are not 39 at all 76 lags")?;
    check(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!("l=77 LP, kappa=lambda=39 at 76 lags in {:.3}s", elapsed.as_secs_f64()))
}

fn census_l55() -> Outcome {
    let threads = default_threads();
    let t5 = Instant::now();
    let (_, base5, exp5) = pairs_parallel(&CompressionParams::legendre(55, 5).map_err(|e| e.to_string())?, threads);
    let t5 = t5.elapsed();
    let t11 = Instant::now();
    let (_, base11, exp11) = pairs_parallel(&CompressionParams::legendre(55, 11).map_err(|e| e.to_string())?, threads);
    let t11 = t11.elapsed();
    let instances: usize = build_tasks(&exp5, &exp11).map(|t| t.instances.len()).sum();
    let got = format!(
        "delta=5 {}/{} ({:.1}s), delta=11 {}/{} ({:.1}s), instances {instances}",
        base5.len(),
        exp5.len(),
        t5.as_secs_f64(),
        base11.len(),
        exp11.len(),
        t11.as_secs_f64()
    );
    let ok = base5.len() == 17
        && exp5.len() == 31
        && base11.len() == 2051
        && exp11.len() == 3038
        && instances == 376_712
        && t5 < Duration::from_secs(60)
        && t11 < Duration::from_secs(7200);
    if ok {
        Ok(got)
    } else {
        Err(format!("{got}; expected 17/31, 2051/3038, 376712"))
    }
}

fn pipeline_vs_oracle() -> Outcome {
    let threads = default_threads();
    let mut notes = Vec::new();
    for (n, d1, d2) in [(15usize, 3usize, 5usize), (21, 3, 7)] {
        let start = Instant::now();
        let setup = plan_parallel(n, d1, d2, threads).map_err(|e| e.to_string())?;
        let opts = RunOptions {
            threads,
            ..RunOptions::default()
        };
        let report = run_tasks(&setup, &SearchConfig::default(), &opts).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        let found: BTreeSet<_> = report
            .records
            .iter()
            .map(|r| (r.key.first.entries().to_vec(), r.key.second.entries().to_vec()))
            .collect();
        let reference = oracle_lp(n).map_err(|e| e.to_string())?;
        check(found == reference, format!("l={n}: pipeline {} keys, oracle {}", found.len(), reference.len()))?;
        check(elapsed < Duration::from_secs(600), format!("l={n} took {elapsed:?}"))?;
        notes.push(format!("l={n} {} keys ({:.2}s)", found.len(), elapsed.as_secs_f64()));
    }
    Ok(notes.join(", "))
}

/// Every `rows x cols` matrix, grouped by marginals.
fn tally(rows: usize, cols: usize) -> BTreeMap<(Vec<i32>, Vec<i32>), BTreeSet<Vec<u8>>> {
    let mut out: BTreeMap<_, BTreeSet<Vec<u8>>> = BTreeMap::new();
    for mask in 0u64..1 << (rows * cols) {
        let m: Vec<u8> = (0..rows * cols).map(|k| (mask >> k & 1) as u8).collect();
        let r = (0..rows).map(|i| (0..cols).map(|j| m[i * cols + j] as i32).sum()).collect();
        let c = (0..cols).map(|j| (0..rows).map(|i| m[i * cols + j] as i32).sum()).collect();
        out.entry((r, c)).or_default().insert(m);
    }
    out
}

fn all_vectors(len: usize, max: i32) -> Vec<Vec<i32>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v| (0..=max).map(move |x| [v.clone(), vec![x]].concat()))
            .collect();
    }
    out
}

fn solutions(inst: &MarginalInstance) -> BTreeSet<Vec<u8>> {
    let mut out = BTreeSet::new();
    enumerate(inst, |m| {
        out.insert(m.entries().to_vec());
        ControlFlow::Continue(())
    });
    out
}

fn agrees(inst: &MarginalInstance, reference: &BTreeSet<Vec<u8>>) -> bool {
    count(inst).to_string() == reference.len().to_string()
        && feasible(inst) == !reference.is_empty()
        && solutions(inst) == *reference
}

fn bmfm_sweep() -> Outcome {
    let empty = BTreeSet::new();
    let mut pairs = 0usize;
    let mut rng = StdRng::seed_from_u64(404);
    for r in 1..=4usize {
        for c in 1..=4usize {
            let table = tally(r, c);
            // the tally is itself checked against the per-instance oracle
            let keys: Vec<_> = table.keys().collect();
            for key in keys.choose_multiple(&mut rng, 25) {
                let (n, list) = oracle_bmfm(&key.0, &key.1).map_err(|e| e.to_string())?;
                check(n as usize == table[*key].len() && list.into_iter().collect::<BTreeSet<_>>() == table[*key], "tally disagrees with oracle")?;
            }
            for rows in all_vectors(r, c as i32) {
                for cols in all_vectors(c, r as i32) {
                    let reference = table.get(&(rows.clone(), cols.clone())).unwrap_or(&empty);
                    let inst = MarginalInstance::new(rows.clone(), cols.clone());
                    check(agrees(&inst, reference), format!("{r}x{c} rows={rows:?} cols={cols:?}"))?;
                    pairs += 1;
                }
            }
        }
    }
    let table = tally(4, 5);
    for i in 0..500 {
        let (rows, cols) = if i % 2 == 0 {
            let m: Vec<i32> = (0..20).map(|_| rng.gen_range(0..2)).collect();
            (
                (0..4).map(|a| (0..5).map(|b| m[a * 5 + b]).sum()).collect::<Vec<i32>>(),
                (0..5).map(|b| (0..4).map(|a| m[a * 5 + b]).sum()).collect::<Vec<i32>>(),
            )
        } else {
            ((0..4).map(|_| rng.gen_range(0..=5)).collect(), (0..5).map(|_| rng.gen_range(0..=4)).collect())
        };
        let reference = table.get(&(rows.clone(), cols.clone())).unwrap_or(&empty);
        if i < 5 {
            check(oracle_bmfm(&rows, &cols).map_err(|e| e.to_string())?.0 as usize == reference.len(), "4x5 tally disagrees with oracle")?;
        }
        check(agrees(&MarginalInstance::new(rows.clone(), cols.clone()), reference), format!("4x5 rows={rows:?} cols={cols:?}"))?;
    }
    let mut feasible_seen = 0;
    for i in 0..2000 {
        let (rows, cols): (Vec<i32>, Vec<i32>) = if i % 2 == 0 {
            let m: Vec<i32> = (0..25).map(|_| rng.gen_range(0..2)).collect();
            ((0..5).map(|a| (0..5).map(|b| m[a * 5 + b]).sum()).collect(), (0..5).map(|b| (0..5).map(|a| m[a * 5 + b]).sum()).collect())
        } else {
            let rows: Vec<i32> = (0..5).map(|_| rng.gen_range(0..=5)).collect();
            let mut cols: Vec<i32> = (0..5).map(|_| rng.gen_range(0..=5)).collect();
            // nudge totals together so the subset test is not trivially decided
            let diff = rows.iter().sum::<i32>() - cols.iter().sum::<i32>();
            for _ in 0..diff.abs() {
                let j = rng.gen_range(0..5);
                cols[j] = (cols[j] + diff.signum()).clamp(0, 5);
            }
            (rows, cols)
        };
        let reference = oracle_feasible_subsets(&rows, &cols).map_err(|e| e.to_string())?;
        feasible_seen += reference as usize;
        check(feasible(&MarginalInstance::new(rows.clone(), cols.clone())) == reference, format!("5x5 rows={rows:?} cols={cols:?}"))?;
    }
    Ok(format!(
        "{pairs} marginal pairs up to 4x4, 500 random 4x5, 2000 random 5x5 ({feasible_seen} feasible); 0 discrepancies"
    ))
}

fn spectral_identities() -> Outcome {
    let ctx = CrtContext::new(7, 5).map_err(|e| e.to_string())?;
    check(ctx.dft_unit() == 3, format!("z = {}", ctx.dft_unit()))?;
    let z_inv = (1..35).find(|k| k * ctx.dft_unit() % 35 == 1).unwrap_or(0);
    let mut rng = StdRng::seed_from_u64(505);
    let mut vectors = vec![V35.to_vec(), U35.to_vec()];
    while vectors.len() < 200 {
        vectors.push((0..35).map(|_| rng.gen_range(0..2)).collect());
    }
    let mut worst = 0f64;
    for e in vectors {
        let v = CyclicVector::new(e).map_err(|e| e.to_string())?;
        let mu = dft(&v);
        for (delta, other) in [(7usize, 5usize), (5, 7)] {
            let nu = dft(&compress(&v, delta).map_err(|e| e.to_string())?);
            for g in 0..delta {
                worst = worst.max((nu.values()[g] - mu.values()[g * other]).norm());
            }
        }
        let m = two_dim_dft(theta(&v, &ctx).map_err(|e| e.to_string())?.entries(), 7, 5).map_err(|e| e.to_string())?;
        for g in 0..35 {
            let (r, c) = ctx.psi(g);
            worst = worst.max((m.get(r, c) - mu.values()[g * z_inv % 35]).norm());
        }
    }
    check(worst < 1e-9, format!("max deviation {worst:e}"))?;
    Ok(format!("200 vectors at l=35 incl. the two worked examples, z=3, max deviation {worst:.1e}"))
}

fn random_coprime(rng: &mut StdRng, n: usize) -> CyclicVector {
    loop {
        let v = CyclicVector::new((0..n).map(|_| rng.gen_range(0..2)).collect()).unwrap();
        if gcd(v.density() as usize, n) == 1 {
            return v;
        }
    }
}

fn orbit_counts() -> Outcome {
    let mut rng = StdRng::seed_from_u64(606);
    for (n, d1, d2) in [(15usize, 3usize, 5usize), (35, 7, 5)] {
        let ctx = CrtContext::new(d1, d2).map_err(|e| e.to_string())?;
        for _ in 0..50 {
            let v = random_coprime(&mut rng, n);
            let orbit = oracle_orbit(v.entries()).map_err(|e| e.to_string())?;
            let qs = [compress(&v, d1).unwrap(), compress(&v, d2).unwrap()];
            let brute = orbit_count_matching(&orbit, &[(d1, qs[0].entries().to_vec())]);
            let got = class_overlap_count(&v, &qs[0], &ctx).map_err(|e| e.to_string())?;
            check(got as usize == brute, format!("class count l={n}: {got} vs {brute}"))?;
            let wanted: Vec<_> = qs.iter().map(|q| (q.len(), q.entries().to_vec())).collect();
            let brute = orbit_count_matching(&orbit, &wanted);
            let got = simul_overlap_count(&v, &qs).map_err(|e| e.to_string())?;
            check(got as usize == brute, format!("simultaneous count l={n}: {got} vs {brute}"))?;
        }
    }
    let ctx = CrtContext::new(3, 5).map_err(|e| e.to_string())?;
    let mut by_q: BTreeMap<Vec<i32>, (u64, BTreeMap<CyclicVector, CyclicVector>)> = BTreeMap::new();
    for mask in 0u32..1 << 15 {
        let v = CyclicVector::from_bits(&(0..15).map(|i| (mask >> i & 1) as u8).collect::<Vec<_>>()).unwrap();
        if gcd(v.density() as usize, 15) != 1 {
            continue;
        }
        let q = compress(&v, 3).unwrap();
        let slot = by_q.entry(q.entries().to_vec()).or_default();
        slot.0 += 1;
        slot.1.entry(v.decimation_canon().0).or_insert(v);
    }
    for (q, (total, classes)) in &by_q {
        let q = CyclicVector::new(q.clone()).unwrap();
        let by_class: u64 = classes.values().map(|v| class_overlap_count(v, &q, &ctx).unwrap()).sum();
        check(by_class == *total, format!("sum rule fails at q={q}"))?;
        check(count_decompressions(&q, 5).map_err(|e| e.to_string())?.to_string() == total.to_string(), format!("|Q| fails at q={q}"))?;
    }
    Ok(format!("50 vectors each at l=15,35; sum rule on {} compressions at l=15", by_q.len()))
}

fn square_sum_identity() -> Outcome {
    let q = CyclicVector::new(vec![4, 2, 1, 4, 3, 3, 1]).unwrap();
    let p = CyclicVector::new(vec![3, 4, 3, 2, 2, 1, 3]).unwrap();
    let example = paf(&q).values()[0] + paf(&p).values()[0];
    let expect = |n: usize, d: usize| {
        let k = ((n + 1) / 2) as i64;
        2 * k * k - (d as i64 - 1) * (n / d) as i64 * k
    };
    check(example == 108 && expect(35, 7) == 108, format!("example gives {example}, formula {}", expect(35, 7)))?;
    let mut total = 0;
    for (n, d) in [(15usize, 3usize), (15, 5), (21, 3), (21, 7), (55, 5)] {
        let params = CompressionParams::legendre(n, d).map_err(|e| e.to_string())?;
        let (_, base, expanded) = compressed_pairs(&params);
        for pair in base.iter().chain(&expanded) {
            let s = paf(&pair.q).values()[0] + paf(&pair.p).values()[0];
            check(s == expect(n, d), format!("l={n} delta={d}: {} / {} sums to {s}", pair.q, pair.p))?;
            total += 1;
        }
    }
    Ok(format!("108 on the l=35 example; holds on all {total} emitted pairs at l=15, 21, 55/5"))
}

fn long_running_modes() -> Outcome {
    let setup = plan_parallel(55, 5, 11, default_threads()).map_err(|e| e.to_string())?;
    check(setup.plan.instances == 376_712, format!("l=55 plan has {} instances", setup.plan.instances))?;
    Ok("excluded from CI by design; l=55 plan builds (376712 instances), resumable via --checkpoint".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("l=77 fixture verification", fixture_verification),
        ("l=55 compressed census", census_l55),
        ("pipeline vs oracle", pipeline_vs_oracle),
        ("bmfm correctness sweep", bmfm_sweep),
        ("spectral identities", spectral_identities),
        ("orbit and decompression counts", orbit_counts),
        ("sum-of-squares identity", square_sum_identity),
        ("full-scale searches", long_running_modes),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(note) => println!("PASS {} {name}: {note}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
