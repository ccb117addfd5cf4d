//! Binary matrices with fixed marginals: feasibility, exact counting and
//! streaming enumeration.
//!
//! Enumeration assigns whole rows and columns at a time, so the undecided
//! cells always form a sub-rectangle and the Gale–Ryser test applies to the
//! residual needs at every node.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::compress::BinaryMatrix;
use crate::modular::{binomial_big, binomial_saturating};
use crate::spectral::{ComplexMatrix, RootTable};
use crate::{Error, Result};

/// Prescribed row sums `q` and column sums `p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MarginalInstance {
    rows: Vec<i32>,
    cols: Vec<i32>,
}

impl MarginalInstance {
    pub fn new(rows: Vec<i32>, cols: Vec<i32>) -> Self {
        Self { rows, cols }
    }

    pub fn row_sums(&self) -> &[i32] {
        &self.rows
    }

    pub fn col_sums(&self) -> &[i32] {
        &self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.cols.len())
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.cols.clone(), self.rows.clone())
    }

    /// Equal totals and every entry within its line length.
    pub fn is_well_formed(&self) -> bool {
        let (r, c) = self.shape();
        self.rows.iter().all(|&x| x >= 0 && x as usize <= c)
            && self.cols.iter().all(|&x| x >= 0 && x as usize <= r)
            && self.rows.iter().map(|&x| x as i64).sum::<i64>()
                == self.cols.iter().map(|&x| x as i64).sum::<i64>()
    }
}

/// Gale–Ryser on raw needs. `rows` entries must fit `cols.len()` and vice versa.
fn gale_ryser(rows: &[i32], cols: &[i32]) -> bool {
    let (nr, nc) = (rows.len(), cols.len());
    if rows.iter().any(|&x| x < 0 || x as usize > nc) || cols.iter().any(|&x| x < 0 || x as usize > nr) {
        return false;
    }
    let total: i64 = rows.iter().map(|&x| x as i64).sum();
    if total != cols.iter().map(|&x| x as i64).sum::<i64>() {
        return false;
    }
    // conjugate[k] = #{i : rows[i] > k}
    let mut conjugate = alloc::vec![0i64; nc + 1];
    for &x in rows {
        conjugate[x as usize] += 1;
    }
    for k in (0..nc).rev() {
        conjugate[k] += conjugate[k + 1];
    }
    let mut sorted: Vec<i32> = cols.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let (mut lhs, mut rhs) = (0i64, 0i64);
    for (k, &c) in sorted.iter().enumerate() {
        lhs += c as i64;
        rhs += conjugate[k + 1];
        if lhs > rhs {
            return false;
        }
    }
    true
}

/// True iff some binary matrix has these marginals.
pub fn feasible(inst: &MarginalInstance) -> bool {
    inst.is_well_formed() && gale_ryser(&inst.rows, &inst.cols)
}

/// Exact number of binary matrices with the given marginals.
pub fn count(inst: &MarginalInstance) -> BigUint {
    if !feasible(inst) {
        return BigUint::zero();
    }
    // Fewer columns keeps the memo keys short.
    let inst = if inst.cols.len() > inst.rows.len() {
        inst.transpose()
    } else {
        inst.clone()
    };
    let mut cols = inst.cols.clone();
    cols.sort_unstable();
    let mut memo = BTreeMap::new();
    count_rows(&inst.rows, cols, &mut memo)
}

fn count_rows(rows: &[i32], cols: Vec<i32>, memo: &mut BTreeMap<(usize, Vec<i32>), BigUint>) -> BigUint {
    let Some((&need, rest)) = rows.split_first() else {
        return if cols.iter().all(|&c| c == 0) {
            BigUint::one()
        } else {
            BigUint::zero()
        };
    };
    if !gale_ryser(rows, &cols) {
        return BigUint::zero();
    }
    let key = (rows.len(), cols);
    if let Some(hit) = memo.get(&key) {
        return hit.clone();
    }
    let cols = &key.1;
    // groups of equal column sums (cols is sorted ascending)
    let mut groups: Vec<(i32, usize)> = Vec::new();
    for &c in cols {
        match groups.last_mut() {
            Some((v, m)) if *v == c => *m += 1,
            _ => groups.push((c, 1)),
        }
    }
    let mut total = BigUint::zero();
    let mut take = alloc::vec![0usize; groups.len()];
    distribute(&groups, 0, need as usize, &mut take, &mut |take| {
        let mut weight = BigUint::one();
        let mut next = Vec::with_capacity(cols.len());
        for (&(v, m), &k) in groups.iter().zip(take) {
            weight *= binomial_big(m as u64, k as u64);
            next.extend(core::iter::repeat(v).take(m - k));
            next.extend(core::iter::repeat(v - 1).take(k));
        }
        next.sort_unstable();
        let sub = count_rows(rest, next, memo);
        if !sub.is_zero() {
            total += weight * sub;
        }
    });
    memo.insert(key, total.clone());
    total
}

fn distribute(
    groups: &[(i32, usize)],
    at: usize,
    left: usize,
    take: &mut [usize],
    emit: &mut dyn FnMut(&[usize]),
) {
    if at == groups.len() {
        if left == 0 {
            emit(take);
        }
        return;
    }
    let (v, m) = groups[at];
    let cap = if v <= 0 { 0 } else { m.min(left) };
    for k in 0..=cap {
        take[at] = k;
        distribute(groups, at + 1, left - k, take, emit);
    }
    take[at] = 0;
}

/// Subsets of size `k` from `0..n` in colexicographic order.
#[derive(Clone, Debug)]
pub struct ColexSubsets {
    n: usize,
    current: Option<Vec<usize>>,
}

impl ColexSubsets {
    pub fn new(n: usize, k: usize) -> Self {
        let current = (k <= n).then(|| (0..k).collect());
        Self { n, current }
    }
}

impl Iterator for ColexSubsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let mut c = out.clone();
        let k = c.len();
        let mut i = 0;
        while i < k {
            let limit = if i + 1 < k { c[i + 1] } else { self.n };
            if c[i] + 1 < limit {
                c[i] += 1;
                for (j, slot) in c.iter_mut().enumerate().take(i) {
                    *slot = j;
                }
                self.current = Some(c);
                break;
            }
            i += 1;
        }
        Some(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Line {
    Row(usize),
    Col(usize),
}

struct State {
    rows: usize,
    cols: usize,
    matrix: BinaryMatrix,
    known: Vec<bool>,
    need_r: Vec<i32>,
    free_r: Vec<i32>,
    need_c: Vec<i32>,
    free_c: Vec<i32>,
    trail: Vec<usize>,
}

impl State {
    fn new(inst: &MarginalInstance) -> Self {
        let (rows, cols) = inst.shape();
        Self {
            rows,
            cols,
            matrix: BinaryMatrix::zeros(rows, cols),
            known: alloc::vec![false; rows * cols],
            need_r: inst.rows.clone(),
            free_r: alloc::vec![cols as i32; rows],
            need_c: inst.cols.clone(),
            free_c: alloc::vec![rows as i32; cols],
            trail: Vec::new(),
        }
    }

    fn set(&mut self, r: usize, c: usize, bit: u8) {
        let cell = r * self.cols + c;
        self.known[cell] = true;
        if bit == 1 {
            self.matrix.set(r, c, 1);
        }
        let b = bit as i32;
        self.need_r[r] -= b;
        self.need_c[c] -= b;
        self.free_r[r] -= 1;
        self.free_c[c] -= 1;
        self.trail.push(cell);
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let cell = self.trail.pop().unwrap_or_default();
            let (r, c) = (cell / self.cols, cell % self.cols);
            let b = self.matrix.get(r, c) as i32;
            if b == 1 {
                self.matrix.set(r, c, 0);
            }
            self.known[cell] = false;
            self.need_r[r] += b;
            self.need_c[c] += b;
            self.free_r[r] += 1;
            self.free_c[c] += 1;
        }
    }

    fn free_cells(&self, line: Line) -> Vec<(usize, usize)> {
        match line {
            Line::Row(r) => (0..self.cols)
                .filter(|&c| !self.known[r * self.cols + c])
                .map(|c| (r, c))
                .collect(),
            Line::Col(c) => (0..self.rows)
                .filter(|&r| !self.known[r * self.cols + c])
                .map(|r| (r, c))
                .collect(),
        }
    }

    /// Stage one: the open sub-rectangle must admit a completion.
    fn residual_feasible(&self) -> bool {
        let mut rows = Vec::new();
        let mut cols = Vec::new();
        for r in 0..self.rows {
            if self.free_r[r] == 0 {
                if self.need_r[r] != 0 {
                    return false;
                }
            } else {
                rows.push(self.need_r[r]);
            }
        }
        for c in 0..self.cols {
            if self.free_c[c] == 0 {
                if self.need_c[c] != 0 {
                    return false;
                }
            } else {
                cols.push(self.need_c[c]);
            }
        }
        gale_ryser(&rows, &cols)
    }

    /// Stage two: fill lines whose completion is forced. Returns the newly set ones.
    fn propagate(&mut self, ones: &mut Vec<(usize, usize)>) {
        loop {
            let mut changed = false;
            for r in 0..self.rows {
                if self.free_r[r] > 0 && (self.need_r[r] == 0 || self.need_r[r] == self.free_r[r]) {
                    let bit = (self.need_r[r] > 0) as u8;
                    for (i, j) in self.free_cells(Line::Row(r)) {
                        self.set(i, j, bit);
                        if bit == 1 {
                            ones.push((i, j));
                        }
                    }
                    changed = true;
                }
            }
            for c in 0..self.cols {
                if self.free_c[c] > 0 && (self.need_c[c] == 0 || self.need_c[c] == self.free_c[c]) {
                    let bit = (self.need_c[c] > 0) as u8;
                    for (i, j) in self.free_cells(Line::Col(c)) {
                        self.set(i, j, bit);
                        if bit == 1 {
                            ones.push((i, j));
                        }
                    }
                    changed = true;
                }
            }
            if !changed {
                return;
            }
        }
    }

    /// Stage three selection: fewest admissible completions, rows before columns.
    fn branch_line(&self) -> Option<Line> {
        let mut best: Option<(u128, Line)> = None;
        let rows = (0..self.rows).map(|r| (Line::Row(r), self.free_r[r], self.need_r[r]));
        let cols = (0..self.cols).map(|c| (Line::Col(c), self.free_c[c], self.need_c[c]));
        for (line, free, need) in rows.chain(cols) {
            if free == 0 {
                continue;
            }
            let ways = binomial_saturating(free as usize, need.max(0) as usize);
            if best.map_or(true, |(w, _)| ways < w) {
                best = Some((ways, line));
            }
        }
        best.map(|(_, line)| line)
    }

    fn need(&self, line: Line) -> i32 {
        match line {
            Line::Row(r) => self.need_r[r],
            Line::Col(c) => self.need_c[c],
        }
    }
}

/// Incremental 2-D DFT: `M[x][y] = Σ A[i][j] ω1^{xi} ω2^{yj}`.
struct SpectrumTracker {
    w1: RootTable,
    w2: RootTable,
    current: ComplexMatrix,
    saved: Vec<ComplexMatrix>,
}

impl SpectrumTracker {
    fn new(rows: usize, cols: usize) -> Self {
        Self {
            w1: RootTable::new(rows),
            w2: RootTable::new(cols),
            current: ComplexMatrix::zeros(rows, cols),
            saved: Vec::new(),
        }
    }

    fn add_ones(&mut self, ones: &[(usize, usize)]) {
        let (rows, cols) = (self.current.rows(), self.current.cols());
        for &(i, j) in ones {
            for x in 0..rows {
                let a = self.w1.pow(x * i);
                for y in 0..cols {
                    *self.current.get_mut(x, y) += a * self.w2.pow(y * j);
                }
            }
        }
    }

    /// Rank-one update for ones confined to a single line.
    fn add_line(&mut self, line: Line, ones: &[(usize, usize)]) {
        let (rows, cols) = (self.current.rows(), self.current.cols());
        match line {
            Line::Row(i) => {
                let s: Vec<Complex64> = (0..cols)
                    .map(|y| ones.iter().map(|&(_, j)| self.w2.pow(y * j)).sum())
                    .collect();
                for x in 0..rows {
                    let a = self.w1.pow(x * i);
                    for (y, sy) in s.iter().enumerate() {
                        *self.current.get_mut(x, y) += a * sy;
                    }
                }
            }
            Line::Col(j) => {
                let s: Vec<Complex64> = (0..rows)
                    .map(|x| ones.iter().map(|&(i, _)| self.w1.pow(x * i)).sum())
                    .collect();
                for y in 0..cols {
                    let b = self.w2.pow(y * j);
                    for (x, sx) in s.iter().enumerate() {
                        *self.current.get_mut(x, y) += b * sx;
                    }
                }
            }
        }
    }

    fn push(&mut self) {
        self.saved.push(self.current.clone());
    }

    fn pop(&mut self) {
        if let Some(m) = self.saved.pop() {
            self.current = m;
        }
    }
}

/// Enumeration driver; optional fixed rows restrict the search to matrices
/// whose given rows match exactly.
#[derive(Clone, Debug)]
pub struct Enumerator<'a> {
    inst: &'a MarginalInstance,
    fixed: Vec<(usize, Vec<u8>)>,
}

impl<'a> Enumerator<'a> {
    pub fn new(inst: &'a MarginalInstance) -> Self {
        Self { inst, fixed: Vec::new() }
    }

    pub fn fix_row(mut self, row: usize, bits: Vec<u8>) -> Result<Self> {
        let (rows, cols) = self.inst.shape();
        if row >= rows || bits.len() != cols {
            return Err(Error::ShapeMismatch {
                expected_rows: rows,
                expected_cols: cols,
                rows: row + 1,
                cols: bits.len(),
            });
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::NotBinary);
        }
        self.fixed.retain(|(r, _)| *r != row);
        self.fixed.push((row, bits));
        Ok(self)
    }

    /// Marginals of the residual problem after the fixed rows, or `None` if
    /// the fixed rows already contradict the instance.
    pub fn residual(&self) -> Option<MarginalInstance> {
        let mut cols = self.inst.cols.clone();
        let mut rows = Vec::new();
        for (r, &need) in self.inst.rows.iter().enumerate() {
            match self.fixed.iter().find(|(i, _)| *i == r) {
                Some((_, bits)) => {
                    if bits.iter().map(|&b| b as i32).sum::<i32>() != need {
                        return None;
                    }
                    for (c, &b) in bits.iter().enumerate() {
                        cols[c] -= b as i32;
                    }
                }
                None => rows.push(need),
            }
        }
        Some(MarginalInstance::new(rows, cols))
    }

    /// Patterns for `row` (colex order) compatible with the fixed rows.
    pub fn row_patterns(&self, row: usize) -> Vec<Vec<u8>> {
        let (rows, cols) = self.inst.shape();
        let feasible_now = self.residual().map_or(false, |r| feasible(&r));
        if row >= rows || !feasible_now || self.fixed.iter().any(|(r, _)| *r == row) {
            return Vec::new();
        }
        ColexSubsets::new(cols, self.inst.rows[row].max(0) as usize)
            .map(|s| {
                let mut bits = alloc::vec![0u8; cols];
                for j in s {
                    bits[j] = 1;
                }
                bits
            })
            .filter(|bits| {
                self.clone()
                    .fix_row(row, bits.clone())
                    .ok()
                    .and_then(|e| e.residual())
                    .map_or(false, |r| feasible(&r))
            })
            .collect()
    }

    pub fn count(&self) -> BigUint {
        self.residual().map_or_else(BigUint::zero, |r| count(&r))
    }

    pub fn run<F>(&self, mut visitor: F) -> u64
    where
        F: FnMut(&BinaryMatrix) -> ControlFlow<()>,
    {
        let mut visited = 0;
        self.drive(None, &mut |m, _| {
            visited += 1;
            visitor(m)
        });
        visited
    }

    /// Leaves also receive the 2-D DFT of the matrix (see [`SpectrumTracker`] convention:
    /// `M[x][y] = Σ A[i][j] e^{2πi(xi/δ1 + yj/δ2)}`).
    pub fn run_with_spectrum<F>(&self, mut visitor: F) -> u64
    where
        F: FnMut(&BinaryMatrix, &ComplexMatrix) -> ControlFlow<()>,
    {
        let (rows, cols) = self.inst.shape();
        let mut tracker = SpectrumTracker::new(rows, cols);
        let mut visited = 0;
        self.drive(Some(&mut tracker), &mut |m, spectrum| {
            visited += 1;
            visitor(m, spectrum.unwrap_or(&ComplexMatrix::zeros(0, 0)))
        });
        visited
    }

    fn drive(
        &self,
        mut tracker: Option<&mut SpectrumTracker>,
        leaf: &mut dyn FnMut(&BinaryMatrix, Option<&ComplexMatrix>) -> ControlFlow<()>,
    ) {
        if !self.inst.is_well_formed() {
            return;
        }
        let mut state = State::new(self.inst);
        let mut ones = Vec::new();
        for (r, bits) in &self.fixed {
            for (c, &b) in bits.iter().enumerate() {
                state.set(*r, c, b);
                if b == 1 {
                    ones.push((*r, c));
                }
            }
        }
        if let Some(t) = tracker.as_deref_mut() {
            t.add_ones(&ones);
        }
        let _ = search(&mut state, &mut tracker, leaf);
    }
}

fn search(
    state: &mut State,
    tracker: &mut Option<&mut SpectrumTracker>,
    leaf: &mut dyn FnMut(&BinaryMatrix, Option<&ComplexMatrix>) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if !state.residual_feasible() {
        return ControlFlow::Continue(());
    }
    let mark = state.trail.len();
    if let Some(t) = tracker.as_deref_mut() {
        t.push();
    }
    let mut forced = Vec::new();
    state.propagate(&mut forced);
    if let Some(t) = tracker.as_deref_mut() {
        t.add_ones(&forced);
    }
    let flow = match state.branch_line() {
        None => leaf(&state.matrix, tracker.as_deref().map(|t| &t.current)),
        Some(line) => branch(state, tracker, leaf, line),
    };
    state.undo_to(mark);
    if let Some(t) = tracker.as_deref_mut() {
        t.pop();
    }
    flow
}

fn branch(
    state: &mut State,
    tracker: &mut Option<&mut SpectrumTracker>,
    leaf: &mut dyn FnMut(&BinaryMatrix, Option<&ComplexMatrix>) -> ControlFlow<()>,
    line: Line,
) -> ControlFlow<()> {
    let cells = state.free_cells(line);
    let need = state.need(line).max(0) as usize;
    for subset in ColexSubsets::new(cells.len(), need) {
        let mark = state.trail.len();
        if let Some(t) = tracker.as_deref_mut() {
            t.push();
        }
        let mut chosen = subset.iter().peekable();
        let mut ones = Vec::with_capacity(need);
        for (idx, &(r, c)) in cells.iter().enumerate() {
            let bit = if chosen.peek() == Some(&&idx) {
                chosen.next();
                ones.push((r, c));
                1
            } else {
                0
            };
            state.set(r, c, bit);
        }
        if let Some(t) = tracker.as_deref_mut() {
            t.add_line(line, &ones);
        }
        let flow = search(state, tracker, leaf);
        state.undo_to(mark);
        if let Some(t) = tracker.as_deref_mut() {
            t.pop();
        }
        flow?;
    }
    ControlFlow::Continue(())
}

/// Visit every solution in deterministic order; returns the number visited.
pub fn enumerate<F>(inst: &MarginalInstance, visitor: F) -> u64
where
    F: FnMut(&BinaryMatrix) -> ControlFlow<()>,
{
    Enumerator::new(inst).run(visitor)
}

pub fn enumerate_with_spectrum<F>(inst: &MarginalInstance, visitor: F) -> u64
where
    F: FnMut(&BinaryMatrix, &ComplexMatrix) -> ControlFlow<()>,
{
    Enumerator::new(inst).run_with_spectrum(visitor)
}

/// Patterns for `row` (colex order) that leave a feasible residual problem.
pub fn row_patterns(inst: &MarginalInstance, row: usize) -> Vec<Vec<u8>> {
    Enumerator::new(inst).row_patterns(row)
}
