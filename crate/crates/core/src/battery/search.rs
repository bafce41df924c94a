//! Random search for state pairs that two measures order oppositely.

use std::collections::BTreeMap;

use super::{multi_measure_from_values, MultiMeasureBound};
use crate::error::{Error, Result};
use crate::measures::{evaluate, MeasureId, OptimizerOptions};
use crate::par::{map_indexed, Execution};
use crate::qmat::BipartiteState;
use crate::random::{haar_pure, noisy_pure, trial_rng};

/// Minimum strict separation for an ordering to count as opposite.
pub const ORDERING_MARGIN: f64 = 1e-3;
/// Default sample budget.
pub const SEARCH_BUDGET: usize = 100_000;
const SEARCH_BATCH: usize = 16;

#[derive(Clone, Debug)]
pub struct NonequivalentPair {
    pub rho: BipartiteState,
    pub sigma: BipartiteState,
    /// (E1(ρ), E1(σ))
    pub e1: (f64, f64),
    /// (E2(ρ), E2(σ))
    pub e2: (f64, f64),
    /// Trials drawn up to and including the one completing the pair.
    pub samples: usize,
    pub bound: MultiMeasureBound,
}

fn opposite(e1: (f64, f64), e2: (f64, f64)) -> bool {
    e1.0 - e1.1 >= ORDERING_MARGIN
        && e2.0 - e2.1 <= -ORDERING_MARGIN
        && multi_measure_from_values(e1, e2).product < 1.0 - ORDERING_MARGIN
}

#[derive(Default)]
struct Cell {
    /// (E1, E2, sample index)
    points: Vec<(f64, f64, usize)>,
    max_b: Option<(f64, usize)>,
    min_b: Option<(f64, usize)>,
}

/// Samples bucketed by E1 in cells of width [`ORDERING_MARGIN`], so a
/// dominance query touches each cell once instead of every sample.
#[derive(Default)]
struct Index {
    cells: BTreeMap<i64, Cell>,
    values: Vec<(f64, f64)>,
}

impl Index {
    fn key(a: f64) -> i64 {
        (a / ORDERING_MARGIN).floor() as i64
    }

    fn insert(&mut self, a: f64, b: f64) {
        let idx = self.values.len();
        self.values.push((a, b));
        let cell = self.cells.entry(Self::key(a)).or_default();
        cell.points.push((a, b, idx));
        if cell.max_b.is_none_or(|(m, _)| b > m) {
            cell.max_b = Some((b, idx));
        }
        if cell.min_b.is_none_or(|(m, _)| b < m) {
            cell.min_b = Some((b, idx));
        }
    }

    /// An earlier sample s forming an opposite pair with (a, b). Returns
    /// (s, new sample plays ρ).
    fn partner(&self, a: f64, b: f64) -> Option<(usize, bool)> {
        let m = ORDERING_MARGIN;
        let check = |s: usize, new_is_rho: bool| {
            let (pa, pb) = self.values[s];
            let ok = if new_is_rho { opposite((a, pa), (b, pb)) } else { opposite((pa, a), (pb, b)) };
            ok.then_some((s, new_is_rho))
        };
        // new sample as ρ: earlier s with a_s ≤ a − m and b_s ≥ b + m
        let kb = Self::key(a - m);
        for (&k, cell) in self.cells.range(..=kb) {
            let found = if k < kb {
                cell.max_b.filter(|&(mb, _)| mb >= b + m).and_then(|(_, s)| check(s, true))
            } else {
                cell.points.iter().find_map(|&(_, _, s)| check(s, true))
            };
            if found.is_some() {
                return found;
            }
        }
        // new sample as σ: earlier s with a_s ≥ a + m and b_s ≤ b − m
        let kb = Self::key(a + m);
        for (&k, cell) in self.cells.range(kb..) {
            let found = if k > kb {
                cell.min_b.filter(|&(mb, _)| mb <= b - m).and_then(|(_, s)| check(s, false))
            } else {
                cell.points.iter().find_map(|&(_, _, s)| check(s, false))
            };
            if found.is_some() {
                return found;
            }
        }
        None
    }
}

/// Seeded random search for a two-qubit pair with E1(ρ) > E1(σ) but
/// E2(ρ) < E2(σ), each by at least [`ORDERING_MARGIN`].
///
/// Samples are Haar-pure states mixed with white noise (pure states when
/// either measure is pure-only). Trials are evaluated in batches, possibly in
/// parallel; the lowest trial index that completes a pair wins, so the
/// result does not depend on scheduling.
pub fn search_nonequivalent_pair(
    m1: MeasureId,
    m2: MeasureId,
    seed: u64,
    budget: usize,
    opts: &OptimizerOptions,
) -> Result<NonequivalentPair> {
    if m1 == m2 {
        return Err(Error::SearchExhausted(format!(
            "{m1} cannot order a pair oppositely to itself (0 samples drawn)"
        )));
    }
    let pure_only = m1.is_pure_only() || m2.is_pure_only();
    let inner = OptimizerOptions { execution: Execution::Sequential, ..opts.clone() };
    let mut states: Vec<BipartiteState> = Vec::new();
    let mut index = Index::default();
    while states.len() < budget {
        let start = states.len();
        let batch = SEARCH_BATCH.min(budget - start);
        let results = map_indexed(batch, opts.execution, |i| -> Result<(BipartiteState, f64, f64)> {
            let mut rng = trial_rng(seed, (start + i) as u64);
            let s = if pure_only { haar_pure(2, 2, &mut rng) } else { noisy_pure(2, 2, &mut rng) };
            let a = evaluate(m1, &s, &inner)?.value;
            let b = evaluate(m2, &s, &inner)?.value;
            Ok((s, a, b))
        });
        for r in results {
            let (s, a, b) = r?;
            if let Some((partner, new_is_rho)) = index.partner(a, b) {
                let (pa, pb) = index.values[partner];
                let prev = states[partner].clone();
                let (rho, sigma, e1, e2) =
                    if new_is_rho { (s, prev, (a, pa), (b, pb)) } else { (prev, s, (pa, a), (pb, b)) };
                return Ok(NonequivalentPair {
                    rho,
                    sigma,
                    e1,
                    e2,
                    samples: index.values.len() + 1,
                    bound: multi_measure_from_values(e1, e2),
                });
            }
            index.insert(a, b);
            states.push(s);
        }
    }
    Err(Error::SearchExhausted(format!(
        "no oppositely ordered pair for ({m1}, {m2}) in {} samples",
        states.len()
    )))
}
