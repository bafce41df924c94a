//! Entanglement quantifiers behind one evaluation contract.

mod relent;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::qmat::{partial_trace, partial_transpose, shannon_entropy, trace_norm, von_neumann_entropy, BipartiteState, Keep, C64};
use crate::states::PureSchmidtState;

pub use relent::{minimize_from, optimize, OptimizerOptions, OptimizerRun, SeparableAnsatz, MAX_OPTIMIZER_DIM};

/// Values this close to zero are reported as exactly zero.
const ZERO_SNAP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MeasureId {
    EntropyOfEntanglement,
    LogNegativity,
    RelativeEntropy,
    Geometric,
    SquashedUpper,
    SquashedPure,
    EntanglementCostPure,
}

impl MeasureId {
    pub const ALL: [MeasureId; 7] = [
        MeasureId::EntropyOfEntanglement,
        MeasureId::LogNegativity,
        MeasureId::RelativeEntropy,
        MeasureId::Geometric,
        MeasureId::SquashedUpper,
        MeasureId::SquashedPure,
        MeasureId::EntanglementCostPure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MeasureId::EntropyOfEntanglement => "entropy-of-entanglement",
            MeasureId::LogNegativity => "log-negativity",
            MeasureId::RelativeEntropy => "relative-entropy",
            MeasureId::Geometric => "geometric",
            MeasureId::SquashedUpper => "squashed-upper",
            MeasureId::SquashedPure => "squashed-pure",
            MeasureId::EntanglementCostPure => "entanglement-cost-pure",
        }
    }

    /// Only defined on pure states.
    pub fn is_pure_only(self) -> bool {
        matches!(
            self,
            MeasureId::EntropyOfEntanglement
                | MeasureId::Geometric
                | MeasureId::SquashedPure
                | MeasureId::EntanglementCostPure
        )
    }

    /// E(ρ ⊗ τ) = E(ρ) + E(τ) on the measure's domain.
    pub fn is_additive(self) -> bool {
        matches!(
            self,
            MeasureId::LogNegativity | MeasureId::EntropyOfEntanglement | MeasureId::EntanglementCostPure
        )
    }

    /// The value is a numerical upper bound rather than a closed form.
    pub fn is_optimizer_backed(self) -> bool {
        self == MeasureId::RelativeEntropy
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeasureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MeasureId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown measure `{s}`")))
    }
}

/// Witness for the value of an optimization-defined measure.
#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// Separable state attaining the reported relative entropy.
    Separable(SeparableAnsatz),
    /// Product state |a⟩|b⟩ attaining the maximal fidelity.
    Product { a: Vec<C64>, b: Vec<C64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureResult {
    pub id: MeasureId,
    /// Bits, except geometric entanglement which lies in [0, 1).
    pub value: f64,
    pub certificate: Option<Certificate>,
    pub converged: bool,
    pub iterations: usize,
    /// How far above the true value `value` may lie (0 for closed forms).
    pub slack: f64,
}

impl MeasureResult {
    fn exact(id: MeasureId, value: f64) -> Self {
        MeasureResult { id, value, certificate: None, converged: true, iterations: 0, slack: 0.0 }
    }
}

fn snap(x: f64) -> f64 {
    if x.abs() < ZERO_SNAP {
        0.0
    } else {
        x
    }
}

/// E(ψ) = S(ψ_A), the Shannon entropy of the Schmidt coefficients.
pub fn entanglement_entropy(s: &PureSchmidtState) -> MeasureResult {
    MeasureResult::exact(MeasureId::EntropyOfEntanglement, shannon_entropy(s.coefficients()))
}

/// Entanglement cost of a pure state in singlets; equal to its entropy.
pub fn entanglement_cost_pure(s: &PureSchmidtState) -> MeasureResult {
    MeasureResult::exact(MeasureId::EntanglementCostPure, shannon_entropy(s.coefficients()))
}

/// E_n(ρ) = log₂ ‖ρ^{T_A}‖₁
pub fn log_negativity(s: &BipartiteState) -> MeasureResult {
    let norm = trace_norm(&partial_transpose(s)).expect("partial transpose of a state is Hermitian");
    MeasureResult::exact(MeasureId::LogNegativity, snap(norm.log2()).max(0.0))
}

/// 1 − (largest Schmidt coefficient), with the optimal product state as
/// certificate (|0⟩|0⟩ in the Schmidt basis).
pub fn geometric_pure(s: &PureSchmidtState) -> MeasureResult {
    let d = s.dim();
    let mut e0 = vec![C64::new(0.0, 0.0); d];
    e0[0] = C64::new(1.0, 0.0);
    MeasureResult {
        certificate: Some(Certificate::Product { a: e0.clone(), b: e0 }),
        ..MeasureResult::exact(MeasureId::Geometric, 1.0 - s.max_coefficient())
    }
}

/// E_g(ψ) = 1 − max over product states of |⟨a b|ψ⟩|². Pure states only.
pub fn geometric_entanglement(s: &BipartiteState) -> Result<MeasureResult> {
    let psi = s.pure_vector().ok_or_else(|| {
        Error::Applicability("geometric entanglement is only evaluated on pure states".into())
    })?;
    let (da, db) = (s.dim_a(), s.dim_b());
    let amp = DMatrix::from_fn(da, db, |i, j| psi[i * db + j]);
    let svd = amp.svd(true, true);
    let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let top = (0..svd.singular_values.len())
        .max_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]))
        .unwrap_or(0);
    let smax = svd.singular_values[top];
    let a: Vec<C64> = u.column(top).iter().copied().collect();
    let b: Vec<C64> = vt.row(top).iter().copied().collect();
    Ok(MeasureResult {
        certificate: Some(Certificate::Product { a, b }),
        ..MeasureResult::exact(MeasureId::Geometric, (1.0 - smax * smax).max(0.0))
    })
}

/// Upper bound on E_r(ρ) from the separable-ansatz optimizer.
pub fn relative_entropy_of_entanglement(s: &BipartiteState, opts: &OptimizerOptions) -> Result<MeasureResult> {
    let run = optimize(&s.flattened(), opts)?;
    Ok(MeasureResult {
        id: MeasureId::RelativeEntropy,
        value: run.value,
        certificate: Some(Certificate::Separable(run.ansatz)),
        converged: run.converged,
        iterations: run.iterations,
        slack: opts.slack,
    })
}

/// Squashed entanglement of a pure state: with a pure ρ^{AB} every extension
/// is trivial and ½ I(A;B) = S(ρ_A).
pub fn squashed_pure(s: &PureSchmidtState) -> MeasureResult {
    MeasureResult::exact(MeasureId::SquashedPure, shannon_entropy(s.coefficients()))
}

/// ½ I(A;B) of ρ itself (trivial extension), an upper bound on the squashed
/// entanglement.
pub fn squashed_upper(s: &BipartiteState) -> MeasureResult {
    let flat = s.flattened();
    let sa = von_neumann_entropy(&partial_trace(&flat, Keep::A).expect("A marginal"));
    let sb = von_neumann_entropy(&partial_trace(&flat, Keep::B).expect("B marginal"));
    let sab = von_neumann_entropy(&flat);
    MeasureResult::exact(MeasureId::SquashedUpper, snap(0.5 * (sa + sb - sab)).max(0.0))
}

/// Uniform dispatch. Pure-only measures reject mixed states with an
/// applicability error.
pub fn evaluate(id: MeasureId, s: &BipartiteState, opts: &OptimizerOptions) -> Result<MeasureResult> {
    match id {
        MeasureId::LogNegativity => Ok(log_negativity(s)),
        MeasureId::RelativeEntropy => relative_entropy_of_entanglement(s, opts),
        MeasureId::SquashedUpper => Ok(squashed_upper(s)),
        MeasureId::Geometric => geometric_entanglement(&s.flattened()),
        MeasureId::EntropyOfEntanglement => Ok(entanglement_entropy(&PureSchmidtState::from_state(&s.flattened())?)),
        MeasureId::EntanglementCostPure => Ok(entanglement_cost_pure(&PureSchmidtState::from_state(&s.flattened())?)),
        MeasureId::SquashedPure => Ok(squashed_pure(&PureSchmidtState::from_state(&s.flattened())?)),
    }
}
