//! Thermodynamic battery: Gibbs states, free energies and the swap argument
//! with Hamiltonians.
//!
//! Units are k_B T = 1 and base-2 logarithms, so every free energy is in
//! bits and β only enters through the Gibbs state and the partition
//! function. Hamiltonians are diagonal: a state carries the energy
//! eigenvalues and its matrix is written in the energy eigenbasis.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::battery::{Verdict, VALUE_RTOL};
use crate::error::{Error, Result};
use crate::qmat::{
    c, eigh, partial_trace_subsystems, permute_subsystems, relative_entropy_matrices, trace_distance,
    BipartiteState, ComplexMatrix,
};

/// Off-diagonal magnitude above which a state counts as coherent.
pub const COHERENCE_TOL: f64 = 1e-9;

/// A state together with its Hamiltonian and bath temperature.
#[derive(Clone, Debug, PartialEq)]
pub struct ThermoState {
    rho: ComplexMatrix,
    energies: Vec<f64>,
    beta: f64,
    z: f64,
    gibbs: Vec<f64>,
}

impl ThermoState {
    /// Validates ρ as a density matrix on `energies.len()` levels and builds
    /// the Gibbs state at inverse temperature `beta`.
    pub fn new(rho: ComplexMatrix, energies: Vec<f64>, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Domain(format!("beta must be finite and positive, got {beta}")));
        }
        if energies.is_empty() || energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::Domain("energies must be a non-empty list of finite numbers".into()));
        }
        let d = energies.len();
        if rho.rows() != d || rho.cols() != d {
            return Err(Error::Shape(format!("rho is {}x{} but there are {d} energy levels", rho.rows(), rho.cols())));
        }
        let rho = BipartiteState::new(d, 1, rho)?.matrix().clone();
        let weights: Vec<f64> = energies.iter().map(|e| (-beta * e).exp()).collect();
        let z: f64 = weights.iter().sum();
        if !(z.is_finite() && z > 0.0) {
            return Err(Error::Domain(format!("partition function {z} is not finite and positive")));
        }
        let gibbs: Vec<f64> = weights.iter().map(|w| w / z).collect();
        if gibbs.iter().any(|&g| g <= 0.0) {
            return Err(Error::Domain("Gibbs state is singular at this beta".into()));
        }
        Ok(ThermoState { rho, energies, beta, z, gibbs })
    }

    /// Takes an arbitrary Hermitian Hamiltonian and rewrites ρ in its
    /// eigenbasis.
    pub fn from_hamiltonian(rho: ComplexMatrix, hamiltonian: &ComplexMatrix, beta: f64) -> Result<Self> {
        let spec = eigh(hamiltonian)?;
        if rho.rows() != hamiltonian.rows() || !rho.is_square() {
            return Err(Error::Shape(format!(
                "rho is {}x{} but the Hamiltonian is {}x{}",
                rho.rows(),
                rho.cols(),
                hamiltonian.rows(),
                hamiltonian.cols()
            )));
        }
        let v = &spec.eigenvectors;
        let rotated = v.adjoint().matmul(&rho).matmul(v);
        ThermoState::new(rotated, spec.eigenvalues.clone(), beta)
    }

    /// The Gibbs state γ itself.
    pub fn gibbs_state(energies: Vec<f64>, beta: f64) -> Result<Self> {
        let probe = ThermoState::new(ComplexMatrix::identity(energies.len()).scale(1.0 / energies.len().max(1) as f64), energies, beta)?;
        let rho = ComplexMatrix::from_real_diagonal(&probe.gibbs);
        Ok(ThermoState { rho, ..probe })
    }

    /// Incoherent state with the given level populations.
    pub fn diagonal(populations: &[f64], energies: Vec<f64>, beta: f64) -> Result<Self> {
        ThermoState::new(ComplexMatrix::from_real_diagonal(populations), energies, beta)
    }

    /// The energy eigenstate |level⟩⟨level|.
    pub fn eigenstate(level: usize, energies: Vec<f64>, beta: f64) -> Result<Self> {
        if level >= energies.len() {
            return Err(Error::Domain(format!("level {level} out of range for {} levels", energies.len())));
        }
        let mut p = vec![0.0; energies.len()];
        p[level] = 1.0;
        ThermoState::diagonal(&p, energies, beta)
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn partition_function(&self) -> f64 {
        self.z
    }

    /// Diagonal of γ = exp(−βH)/Z.
    pub fn gibbs_populations(&self) -> &[f64] {
        &self.gibbs
    }

    pub fn gibbs_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&self.gibbs)
    }

    pub fn populations(&self) -> Vec<f64> {
        self.rho.real_diagonal().into_iter().map(|p| p.max(0.0)).collect()
    }

    /// Diagonal in the energy eigenbasis.
    pub fn is_incoherent(&self) -> bool {
        self.rho.max_off_diagonal() <= COHERENCE_TOL
    }

    /// ρ₁ ⊗ ρ₂ with H₁ ⊗ 1 + 1 ⊗ H₂.
    pub fn compose(&self, other: &ThermoState) -> Result<ThermoState> {
        same_beta(self, other)?;
        let energies = self
            .energies
            .iter()
            .flat_map(|e1| other.energies.iter().map(move |e2| e1 + e2))
            .collect();
        ThermoState::new(self.rho.kron(&other.rho), energies, self.beta)
    }
}

fn same_beta(a: &ThermoState, b: &ThermoState) -> Result<()> {
    if (a.beta - b.beta).abs() > 1e-12 * a.beta.max(b.beta) {
        return Err(Error::Domain(format!(
            "states sit at different temperatures (beta {} vs {})",
            a.beta, b.beta
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FreeEnergyVariant {
    /// S(ρ‖γ) − log₂ Z
    StandardOffset,
    /// S(ρ‖γ), zero at the Gibbs state
    RelativeToGibbs,
    /// log₂ λ_max(γ^{-1/2} ρ γ^{-1/2})
    Max,
    /// Classical Rényi divergence of order α between populations.
    Renyi(f64),
}

impl FreeEnergyVariant {
    pub fn label(self) -> String {
        match self {
            FreeEnergyVariant::StandardOffset => "standard-offset".into(),
            FreeEnergyVariant::RelativeToGibbs => "relative-to-gibbs".into(),
            FreeEnergyVariant::Max => "max".into(),
            FreeEnergyVariant::Renyi(a) => format!("renyi({a})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeEnergyValue {
    /// Bits.
    pub f: f64,
    pub variant: FreeEnergyVariant,
}

pub fn free_energy(s: &ThermoState, variant: FreeEnergyVariant) -> Result<FreeEnergyValue> {
    let f = match variant {
        FreeEnergyVariant::StandardOffset => relative_to_gibbs(s)? - s.z.log2(),
        FreeEnergyVariant::RelativeToGibbs => relative_to_gibbs(s)?,
        FreeEnergyVariant::Max => return f_max(s),
        FreeEnergyVariant::Renyi(a) => return renyi_free_energy(s, a),
    };
    Ok(FreeEnergyValue { f, variant })
}

fn relative_to_gibbs(s: &ThermoState) -> Result<f64> {
    Ok(relative_entropy_matrices(&s.rho, &s.gibbs_matrix())?.max(0.0))
}

/// F_max(ρ) = inf{log₂ λ : ρ ≤ λγ}
pub fn f_max(s: &ThermoState) -> Result<FreeEnergyValue> {
    let d = s.dim();
    let inv_sqrt: Vec<f64> = s.gibbs.iter().map(|g| 1.0 / g.sqrt()).collect();
    if inv_sqrt.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("Gibbs state is singular".into()));
    }
    let entries = (0..d)
        .flat_map(|i| {
            let inv_sqrt = &inv_sqrt;
            (0..d).map(move |j| (i, j)).map(move |(i, j)| s.rho.get(i, j) * (inv_sqrt[i] * inv_sqrt[j]))
        })
        .collect();
    let scaled = ComplexMatrix::from_row_major(d, d, entries)?.hermitian_part();
    let lmax = eigh(&scaled)?.max_eigenvalue();
    Ok(FreeEnergyValue { f: lmax.log2().max(0.0), variant: FreeEnergyVariant::Max })
}

/// D_α(p‖g) between the populations of an incoherent state and γ.
/// α = 1 is the relative entropy and α = ∞ the max-ratio.
pub fn renyi_free_energy(s: &ThermoState, alpha: f64) -> Result<FreeEnergyValue> {
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::Domain(format!("Renyi order must be >= 0, got {alpha}")));
    }
    if !s.is_incoherent() {
        return Err(Error::Applicability(format!(
            "Renyi free energies need a state diagonal in the energy basis (off-diagonal {:.1e})",
            s.rho.max_off_diagonal()
        )));
    }
    let variant = FreeEnergyVariant::Renyi(alpha);
    if alpha == 1.0 {
        return Ok(FreeEnergyValue { f: relative_to_gibbs(s)?, variant });
    }
    let p = s.populations();
    let support = p.iter().zip(&s.gibbs).filter(|(&pi, _)| pi > 0.0);
    let f = if alpha.is_infinite() {
        support.map(|(pi, gi)| pi / gi).fold(0.0f64, f64::max).log2()
    } else if alpha == 0.0 {
        -support.map(|(_, gi)| gi).sum::<f64>().log2()
    } else {
        support.map(|(pi, gi)| pi.powf(alpha) * gi.powf(1.0 - alpha)).sum::<f64>().log2() / (alpha - 1.0)
    };
    Ok(FreeEnergyValue { f: f.max(0.0), variant })
}

/// (ρ, H₁) → (σ, H₂) under thermal operations with a free-energy battery:
/// feasible exactly when F(ρ) ≥ F(σ), with the −log₂ Z offsets included.
pub fn thermo_feasible(s1: &ThermoState, s2: &ThermoState) -> Result<Verdict> {
    same_beta(s1, s2)?;
    let f1 = free_energy(s1, FreeEnergyVariant::StandardOffset)?.f;
    let f2 = free_energy(s2, FreeEnergyVariant::StandardOffset)?.f;
    let tol = VALUE_RTOL * 1f64.max(f1.abs()).max(f2.abs());
    Ok(if f1 >= f2 - tol { Verdict::Feasible } else { Verdict::Infeasible })
}

#[derive(Clone, Debug)]
pub struct ThermoProtocolReport {
    /// (ρ, H₁) ⊗ (σ, H₂); the first register is the system.
    pub initial_global: ThermoState,
    /// After swapping states and Hamiltonians: (σ, H₂) ⊗ (ρ, H₁).
    pub final_global: ThermoState,
    /// Standard-offset free energy of the battery.
    pub f_battery_before: f64,
    pub f_battery_after: f64,
    pub feasible: bool,
    pub final_system_trace_distance_to_target: f64,
    pub final_global_trace_distance: f64,
}

/// The battery starts as (σ, H₂); system and battery then trade both their
/// states and their Hamiltonians.
pub fn thermo_swap_protocol(s1: &ThermoState, s2: &ThermoState) -> Result<ThermoProtocolReport> {
    if thermo_feasible(s1, s2)? != Verdict::Feasible {
        return Err(Error::Infeasible(format!(
            "F(rho) = {:.12} < F(sigma) = {:.12}",
            free_energy(s1, FreeEnergyVariant::StandardOffset)?.f,
            free_energy(s2, FreeEnergyVariant::StandardOffset)?.f
        )));
    }
    let initial_global = s1.compose(s2)?;
    let (d1, d2) = (s1.dim(), s2.dim());
    let swapped = permute_subsystems(initial_global.rho.inner(), &[d1, d2], &[1, 0])?;
    let energies = (0..d2)
        .flat_map(|j| (0..d1).map(move |i| (i, j)))
        .map(|(i, j)| initial_global.energies[i * d2 + j])
        .collect();
    let final_global = ThermoState::new(ComplexMatrix::from(swapped.clone()), energies, s1.beta)?;
    let expected = s2.compose(s1)?;
    let final_global_trace_distance = trace_distance(&final_global.rho, &expected.rho)?;
    let system = ComplexMatrix::from(partial_trace_subsystems(&swapped, &[d2, d1], &[0])?);
    let battery = ComplexMatrix::from(partial_trace_subsystems(&swapped, &[d2, d1], &[1])?);
    let battery_after = ThermoState::new(battery, s1.energies.clone(), s1.beta)?;
    let f_battery_before = free_energy(s2, FreeEnergyVariant::StandardOffset)?.f;
    let f_battery_after = free_energy(&battery_after, FreeEnergyVariant::StandardOffset)?.f;
    Ok(ThermoProtocolReport {
        final_system_trace_distance_to_target: trace_distance(&system, &s2.rho)?,
        final_global_trace_distance,
        feasible: true,
        f_battery_before,
        f_battery_after,
        initial_global,
        final_global,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SelfDilution {
    /// F_max(ρ)/F_max(|1⟩⟨1|); `None` at the Gibbs state where both
    /// ratios degenerate.
    pub r: Option<f64>,
    /// F(|1⟩⟨1|)/F(ρ)
    pub r_prime: Option<f64>,
    pub product: f64,
    /// product equals 1 within 1e-9
    pub equality: bool,
    pub at_gibbs: bool,
}

/// Self-dilution rates of an incoherent qubit against the excited state,
/// with the relative-to-Gibbs free energy so that F and F_max share their
/// zero at γ. The product is F_max(ρ)/F(ρ) ≥ 1.
pub fn thermo_self_dilution(s: &ThermoState) -> Result<SelfDilution> {
    if s.dim() != 2 {
        return Err(Error::Shape(format!("self-dilution is defined for qubits, got {} levels", s.dim())));
    }
    if !s.is_incoherent() {
        return Err(Error::Applicability("self-dilution needs a state diagonal in the energy basis".into()));
    }
    let f_rho = relative_to_gibbs(s)?;
    let gap = trace_distance(&s.rho, &s.gibbs_matrix())?;
    if gap <= 1e-12 || f_rho <= 1e-15 {
        return Ok(SelfDilution { r: None, r_prime: None, product: 1.0, equality: true, at_gibbs: true });
    }
    let excited = ThermoState::eigenstate(1, s.energies.clone(), s.beta)?;
    let r = f_max(s)?.f / f_max(&excited)?.f;
    let r_prime = relative_to_gibbs(&excited)? / f_rho;
    let product = r * r_prime;
    Ok(SelfDilution {
        r: Some(r),
        r_prime: Some(r_prime),
        product,
        equality: (product - 1.0).abs() <= 1e-9,
        at_gibbs: false,
    })
}

// ---------------------------------------------------------------------------
// File format

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhoPayload {
    /// Populations of an incoherent state.
    Diagonal(Vec<f64>),
    /// Full matrix of [re, im] pairs in the energy eigenbasis.
    Matrix(Vec<Vec<[f64; 2]>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermoFile {
    pub energies: Vec<f64>,
    pub beta: f64,
    pub rho: RhoPayload,
}

impl ThermoFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))
    }

    pub fn to_state(&self) -> Result<ThermoState> {
        let d = self.energies.len();
        let rho = match &self.rho {
            RhoPayload::Diagonal(p) => {
                if p.len() != d {
                    return Err(Error::Parse(format!("field `rho`: {} populations for {d} levels", p.len())));
                }
                ComplexMatrix::from_real_diagonal(p)
            }
            RhoPayload::Matrix(rows) => {
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(Error::Parse(format!("field `rho`: expected a {d}x{d} matrix")));
                }
                let entries = rows.iter().flatten().map(|&[re, im]| c(re, im)).collect();
                ComplexMatrix::from_row_major(d, d, entries)?
            }
        };
        ThermoState::new(rho, self.energies.clone(), self.beta)
    }

    pub fn from_state(s: &ThermoState) -> Self {
        let rho = if s.is_incoherent() {
            RhoPayload::Diagonal(s.rho.real_diagonal())
        } else {
            let d = s.dim();
            RhoPayload::Matrix(
                (0..d).map(|i| (0..d).map(|j| [s.rho.get(i, j).re, s.rho.get(i, j).im]).collect()).collect(),
            )
        };
        ThermoFile { energies: s.energies.clone(), beta: s.beta, rho }
    }
}

pub fn load_thermo(path: impl AsRef<Path>) -> Result<ThermoState> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    ThermoFile::parse(&text)
        .and_then(|f| f.to_state())
        .map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
}
