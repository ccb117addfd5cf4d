//! Correlation-energy histograms.

use std::collections::BTreeMap;

use lp_core::search::LegendrePairRecord;

/// Counts of per-vector energies ρ over both members of every record.
pub fn energy_histogram(records: &[LegendrePairRecord]) -> BTreeMap<i64, usize> {
    let mut h = BTreeMap::new();
    for r in records {
        *h.entry(r.rho_u).or_insert(0) += 1;
        *h.entry(r.rho_v).or_insert(0) += 1;
    }
    h
}

pub fn histogram_csv(h: &BTreeMap<i64, usize>) -> String {
    let mut out = String::from("energy,count\n");
    for (e, c) in h {
        out.push_str(&format!("{e},{c}\n"));
    }
    out
}

/// Mode of the histogram, smallest energy on ties.
pub fn mode(h: &BTreeMap<i64, usize>) -> Option<i64> {
    h.iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(&e, _)| e)
}
