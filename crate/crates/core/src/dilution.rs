//! Self-dilution of pure states under a log-negativity battery, and the
//! embezzlement table that shows why a geometric-entanglement battery is
//! trivial.
//!
//! With a log-negativity battery, n copies of ψ can be diluted into about
//! n·E_n(ψ)/E_c(ψ) copies of ψ itself. For ψ_α = cos α|00⟩ + sin α|11⟩ that
//! ratio exceeds one everywhere except at the maximally entangled point and
//! diverges as α → 0.

use std::f64::consts::FRAC_PI_4;
use std::fmt::Write as _;

use serde::Serialize;

use crate::battery::swap_protocol;
use crate::error::{Error, Result};
use crate::measures::{entanglement_cost_pure, entanglement_entropy, geometric_entanglement, log_negativity, MeasureId, OptimizerOptions};
use crate::numfmt::format_value;
use crate::par::{map_indexed, map_slice, Execution};
use crate::qmat::BipartiteState;
use crate::states::{bell, embezzler_psi, pure_alpha, PureSchmidtState};

pub const DEFAULT_ALPHA_MIN: f64 = 0.01;
pub const DEFAULT_ALPHA_MAX: f64 = FRAC_PI_4;
pub const DEFAULT_STEPS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    /// Radians.
    pub alpha: f64,
    pub e_n: f64,
    pub e_c: f64,
    pub ratio: f64,
}

/// One point from the full numeric path: the 4×4 density matrix goes
/// through the partial transpose and trace norm, and the reduced state's
/// spectrum gives the entanglement cost.
pub fn curve_point(alpha: f64) -> Result<CurvePoint> {
    let state = pure_alpha(alpha)?.to_state();
    let e_n = log_negativity(&state).value;
    let e_c = entanglement_cost_pure(&PureSchmidtState::from_state(&state)?).value;
    Ok(CurvePoint { alpha, e_n, e_c, ratio: e_n / e_c })
}

/// `steps` evenly spaced points on [alpha_min, alpha_max] ⊆ (0, π/4].
pub fn self_dilution_curve(alpha_min: f64, alpha_max: f64, steps: usize, exec: Execution) -> Result<Vec<CurvePoint>> {
    if !(alpha_min > 0.0 && alpha_min < alpha_max && alpha_max <= FRAC_PI_4) {
        return Err(Error::Domain(format!(
            "need 0 < alpha_min < alpha_max <= pi/4, got [{alpha_min}, {alpha_max}]"
        )));
    }
    if steps < 2 {
        return Err(Error::Domain(format!("need at least 2 steps, got {steps}")));
    }
    let h = (alpha_max - alpha_min) / (steps - 1) as f64;
    map_indexed(steps, exec, |i| {
        let alpha = if i == steps - 1 { alpha_max } else { alpha_min + i as f64 * h };
        curve_point(alpha)
    })
    .into_iter()
    .collect()
}

pub const CURVE_HEADER: &str = "alpha,e_n,e_c,ratio";

pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            format_value(p.alpha),
            format_value(p.e_n),
            format_value(p.e_c),
            format_value(p.ratio)
        );
    }
    out
}

/// Battery-assisted singlet distillation rate, E_n(ρ).
pub fn distillation_bound(rho: &BipartiteState) -> f64 {
    log_negativity(rho).value
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EmbezzlementRow {
    pub d: usize,
    /// Geometric entanglement of ψ_d, always 1/2.
    pub e_g: f64,
    /// S(ψ_d^A) = 1 + ½ log₂(d − 1)
    pub entropy: f64,
    /// Singlets' worth of entanglement out per singlet in.
    pub amplification: f64,
    /// Bell → ψ_d passes the swap protocol with a geometric battery.
    pub battery_feasible: bool,
    pub battery_before: f64,
    pub battery_after: f64,
}

/// One row per d: the geometric battery accepts Bell → ψ_d while the
/// entanglement entropy of the output grows without bound.
pub fn embezzlement_demo(d_list: &[usize], opts: &OptimizerOptions) -> Result<Vec<EmbezzlementRow>> {
    if let Some(&d) = d_list.iter().find(|&&d| d < 2) {
        return Err(Error::Domain(format!("embezzlement state needs d >= 2, got {d}")));
    }
    let input = entanglement_entropy(&PureSchmidtState::from_state(&bell())?).value;
    map_slice(d_list, opts.execution, |&d| {
        let psi = embezzler_psi(d)?.to_state();
        let e_g = geometric_entanglement(&psi)?.value;
        let entropy = entanglement_entropy(&PureSchmidtState::from_state(&psi)?).value;
        let (battery_feasible, battery_before, battery_after) = match swap_protocol(&bell(), &psi, MeasureId::Geometric, opts) {
            Ok(r) => (r.feasible && r.final_system_trace_distance_to_target <= 1e-12, r.e_battery_before, r.e_battery_after),
            Err(Error::Infeasible(_)) => (false, e_g, e_g),
            Err(e) => return Err(e),
        };
        Ok(EmbezzlementRow { d, e_g, entropy, amplification: entropy / input, battery_feasible, battery_before, battery_after })
    })
    .into_iter()
    .collect()
}

pub const EMBEZZLE_HEADER: &str = "d,e_g,entropy,amplification,battery_feasible";

pub fn embezzlement_csv(rows: &[EmbezzlementRow]) -> String {
    let mut out = String::from(EMBEZZLE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.d,
            format_value(r.e_g),
            format_value(r.entropy),
            format_value(r.amplification),
            r.battery_feasible
        );
    }
    out
}
