//! Battery-assisted transformations.
//!
//! A transformation `ρ^{AB} ⊗ τ^{A'B'} → σ^{AB} ⊗ τ̃^{A'B'}` is allowed when
//! the battery keeps its entanglement, `E(τ̃) ≥ E(τ)`. For an additive
//! monotone E this is possible exactly when `E(ρ) ≥ E(σ)`: initialize the
//! battery in σ and let Alice and Bob swap their system and battery
//! registers locally. Asymptotic rates are then `E(ρ)/E(σ)`, realized by the
//! same swap on m and n copies.

pub mod rational;
mod search;

use crate::error::{Error, Result};
use crate::measures::{evaluate, MeasureId, MeasureResult, OptimizerOptions};
use crate::qmat::{binary_entropy, partial_trace, tensor, trace_distance, BipartiteState, Keep};

pub use rational::{best_lower_approximation, LowerApproximation, MAX_DENOMINATOR};
pub use search::{search_nonequivalent_pair, NonequivalentPair, ORDERING_MARGIN, SEARCH_BUDGET};

/// Relative tolerance for comparing closed-form measure values.
pub const VALUE_RTOL: f64 = 1e-9;
/// Target values at or below this carry no resource; the rate is unbounded.
pub const ZERO_RESOURCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Feasible,
    Infeasible,
    /// Both values are optimizer upper bounds and their gap is within the
    /// combined certificate slack.
    Undecided,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Feasible => "feasible",
            Verdict::Infeasible => "infeasible",
            Verdict::Undecided => "undecided",
        }
    }
}

/// Compares `E(ρ) ≥ E(σ)` with the tolerance appropriate to how the values
/// were obtained.
pub fn verdict_from_values(e_rho: &MeasureResult, e_sigma: &MeasureResult) -> Verdict {
    let diff = e_rho.value - e_sigma.value;
    let slack = e_rho.slack + e_sigma.slack;
    if slack > 0.0 && diff.abs() <= slack {
        return Verdict::Undecided;
    }
    let tol = VALUE_RTOL * 1f64.max(e_rho.value.abs()).max(e_sigma.value.abs());
    if diff >= -tol {
        Verdict::Feasible
    } else {
        Verdict::Infeasible
    }
}

/// Can ρ be turned into σ with a battery scored by `measure`?
pub fn feasible(rho: &BipartiteState, sigma: &BipartiteState, measure: MeasureId, opts: &OptimizerOptions) -> Result<Verdict> {
    let e_rho = evaluate(measure, rho, opts)?;
    let e_sigma = evaluate(measure, sigma, opts)?;
    Ok(verdict_from_values(&e_rho, &e_sigma))
}

/// Record of a battery-assisted swap.
#[derive(Clone, Debug)]
pub struct ProtocolReport {
    /// ρ ⊗ σ on (A A' | B B'); factor 0 is the system, factor 1 the battery.
    pub initial_global: BipartiteState,
    /// The same registers after the local swaps A↔A', B↔B'.
    pub final_global: BipartiteState,
    pub battery_measure: MeasureId,
    pub e_battery_before: f64,
    pub e_battery_after: f64,
    pub feasible: bool,
    /// ½‖Tr_battery(final) − σ‖₁
    pub final_system_trace_distance_to_target: f64,
    /// ½‖final − σ ⊗ ρ‖₁
    pub final_global_trace_distance: f64,
}

/// Runs the swap protocol: the battery starts in the target σ, and local
/// permutations of (A, A') and (B, B') exchange system and battery.
pub fn swap_protocol(
    rho: &BipartiteState,
    sigma: &BipartiteState,
    measure: MeasureId,
    opts: &OptimizerOptions,
) -> Result<ProtocolReport> {
    let (rho, sigma) = (rho.flattened(), sigma.flattened());
    let e_rho = evaluate(measure, &rho, opts)?;
    let e_sigma = evaluate(measure, &sigma, opts)?;
    match verdict_from_values(&e_rho, &e_sigma) {
        Verdict::Feasible => {}
        v => {
            return Err(Error::Infeasible(format!(
                "{measure}: E(rho) = {:.12} < E(sigma) = {:.12} ({})",
                e_rho.value,
                e_sigma.value,
                v.as_str()
            )))
        }
    }
    let initial_global = tensor(&rho, &sigma)?;
    let final_global = initial_global.permute_factors(&[1, 0])?;
    let expected = tensor(&sigma, &rho)?;
    let final_global_trace_distance = trace_distance(final_global.matrix(), expected.matrix())?;
    let system = partial_trace(&final_global, Keep::Factor(0))?;
    let battery_before = partial_trace(&initial_global, Keep::Factor(1))?;
    let battery_after = partial_trace(&final_global, Keep::Factor(1))?;
    let e_battery_before = evaluate(measure, &battery_before, opts)?.value;
    let e_battery_after = evaluate(measure, &battery_after, opts)?.value;
    Ok(ProtocolReport {
        feasible: e_rho.value >= e_sigma.value - VALUE_RTOL * 1f64.max(e_sigma.value.abs()),
        final_system_trace_distance_to_target: trace_distance(system.matrix(), sigma.matrix())?,
        final_global_trace_distance,
        initial_global,
        final_global,
        battery_measure: measure,
        e_battery_before,
        e_battery_after,
    })
}

/// Asymptotic rate and the (m, n) swap plan realizing it from below.
#[derive(Clone, Debug, PartialEq)]
pub struct RatePlan {
    pub rate: f64,
    /// Copies out.
    pub m: u64,
    /// Copies in.
    pub n: u64,
    /// rate − m/n
    pub epsilon_gap: f64,
    /// m/n equals the rate up to rounding noise.
    pub exact: bool,
    pub zero_error: bool,
}

impl RatePlan {
    pub fn from_rate(rate: f64, zero_error: bool) -> Self {
        let approx = best_lower_approximation(rate, MAX_DENOMINATOR);
        RatePlan {
            rate,
            m: approx.numerator,
            n: approx.denominator,
            epsilon_gap: approx.gap,
            exact: approx.exact,
            zero_error,
        }
    }
}

fn rate_from_values(measure: MeasureId, e_rho: f64, e_sigma: f64) -> Result<f64> {
    if e_sigma <= ZERO_RESOURCE {
        return Err(Error::UnboundedRate(format!(
            "{measure} of the target is {e_sigma:.3e}; the target carries no resource"
        )));
    }
    Ok(e_rho / e_sigma)
}

/// R(ρ → σ) = E(ρ)/E(σ)
pub fn conversion_rate(rho: &BipartiteState, sigma: &BipartiteState, measure: MeasureId, opts: &OptimizerOptions) -> Result<RatePlan> {
    let e_rho = evaluate(measure, rho, opts)?.value;
    let e_sigma = evaluate(measure, sigma, opts)?.value;
    Ok(RatePlan::from_rate(rate_from_values(measure, e_rho, e_sigma)?, false))
}

/// R(ρ → σ) · R(σ → ρ)
pub fn rate_cycle_product(rho: &BipartiteState, sigma: &BipartiteState, measure: MeasureId, opts: &OptimizerOptions) -> Result<f64> {
    let e_rho = evaluate(measure, rho, opts)?.value;
    let e_sigma = evaluate(measure, sigma, opts)?.value;
    Ok(rate_from_values(measure, e_rho, e_sigma)? * rate_from_values(measure, e_sigma, e_rho)?)
}

/// Zero-error rate; same value as [`conversion_rate`] but only defined for
/// additive measures.
pub fn zero_error_rate(rho: &BipartiteState, sigma: &BipartiteState, measure: MeasureId, opts: &OptimizerOptions) -> Result<RatePlan> {
    if !measure.is_additive() {
        return Err(Error::Applicability(format!("zero-error rates need an additive measure; {measure} is not")));
    }
    let plan = conversion_rate(rho, sigma, measure, opts)?;
    Ok(RatePlan { zero_error: true, ..plan })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MultiMeasureBound {
    /// min over the two measures of E(ρ)/E(σ)
    pub r_fwd_bound: f64,
    /// min over the two measures of E(σ)/E(ρ)
    pub r_bwd_bound: f64,
    pub product: f64,
}

/// E(a)/E(b), with "no constraint" (+∞) when the denominator carries nothing.
fn ratio_bound(a: f64, b: f64) -> f64 {
    if b <= ZERO_RESOURCE {
        f64::INFINITY
    } else {
        a / b
    }
}

pub fn multi_measure_from_values(e1: (f64, f64), e2: (f64, f64)) -> MultiMeasureBound {
    let fwd = ratio_bound(e1.0, e1.1).min(ratio_bound(e2.0, e2.1));
    let bwd = ratio_bound(e1.1, e1.0).min(ratio_bound(e2.1, e2.0));
    MultiMeasureBound { r_fwd_bound: fwd, r_bwd_bound: bwd, product: fwd * bwd }
}

/// Rate bounds when the battery must preserve two measures at once.
pub fn multi_measure_bound(
    rho: &BipartiteState,
    sigma: &BipartiteState,
    m1: MeasureId,
    m2: MeasureId,
    opts: &OptimizerOptions,
) -> Result<MultiMeasureBound> {
    let e1 = (evaluate(m1, rho, opts)?.value, evaluate(m1, sigma, opts)?.value);
    let e2 = (evaluate(m2, rho, opts)?.value, evaluate(m2, sigma, opts)?.value);
    Ok(multi_measure_from_values(e1, e2))
}

/// ε log₂ d + (1 + ε) h(ε / (1 + ε))
pub fn continuity_bound(epsilon: f64, d_ab: usize) -> f64 {
    let h = binary_entropy(epsilon / (1.0 + epsilon)).expect("ratio lies in [0, 1/2]");
    epsilon * (d_ab as f64).log2() + (1.0 + epsilon) * h
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuityCheck {
    /// ½‖ρ − σ‖₁
    pub epsilon: f64,
    /// |E_r(ρ ⊗ τ) − E_r(σ ⊗ τ)|
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Checks the continuity bound of the relative entropy of entanglement
/// with an arbitrary spectator τ, allowing twice the optimizer slack.
pub fn continuity_bound_check(
    rho: &BipartiteState,
    sigma: &BipartiteState,
    tau: &BipartiteState,
    opts: &OptimizerOptions,
) -> Result<ContinuityCheck> {
    if rho.dim_a() != sigma.dim_a() || rho.dim_b() != sigma.dim_b() {
        return Err(Error::Shape("rho and sigma must have the same local dimensions".into()));
    }
    let epsilon = trace_distance(rho.matrix(), sigma.matrix())?;
    let joint_rho = tensor(&rho.flattened(), tau)?;
    let joint_sigma = tensor(&sigma.flattened(), tau)?;
    let er_rho = evaluate(MeasureId::RelativeEntropy, &joint_rho, opts)?;
    let er_sigma = evaluate(MeasureId::RelativeEntropy, &joint_sigma, opts)?;
    let lhs = (er_rho.value - er_sigma.value).abs();
    let rhs = continuity_bound(epsilon, rho.dim());
    Ok(ContinuityCheck { epsilon, lhs, rhs, holds: lhs <= rhs + 2.0 * opts.slack })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BalanceCheck {
    /// f(system before) − f(system after)
    pub lhs: f64,
    /// f(battery after) − f(battery before)
    pub rhs: f64,
    pub holds: bool,
}

/// Resource balance for an additive monotone: what the system loses is at
/// least what the battery gains.
pub fn resource_balance_check(report: &ProtocolReport, f: MeasureId, opts: &OptimizerOptions) -> Result<BalanceCheck> {
    if !f.is_additive() {
        return Err(Error::Applicability(format!("resource balance needs an additive monotone; {f} is not")));
    }
    let val = |s: &BipartiteState, k: usize| -> Result<f64> {
        Ok(evaluate(f, &partial_trace(s, Keep::Factor(k))?, opts)?.value)
    };
    let lhs = val(&report.initial_global, 0)? - val(&report.final_global, 0)?;
    let rhs = val(&report.final_global, 1)? - val(&report.initial_global, 1)?;
    Ok(BalanceCheck { lhs, rhs, holds: lhs >= rhs - VALUE_RTOL * 1f64.max(lhs.abs()) })
}
