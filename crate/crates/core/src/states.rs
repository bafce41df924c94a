//! Named states and the JSON state-file format.
//!
//! A state file is a UTF-8 JSON object in one of three shapes:
//!
//! ```json
//! {"kind": "matrix", "dims": [2, 2], "matrix": [[[0.5, 0.0], [0.0, 0.0], ...], ...]}
//! {"kind": "pure-schmidt", "schmidt": [0.75, 0.25]}
//! {"kind": "named", "named": "pure-alpha", "alpha": 0.3927}
//! ```
//!
//! Complex entries are `[re, im]` pairs and matrices are row-major. `kind`
//! may be omitted when the payload key (`matrix`, `schmidt` or `named`)
//! makes it unambiguous.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::qmat::{c, partial_trace_subsystems, BipartiteState, ComplexMatrix, C64, STATE_TOL};

/// Pure bipartite state Σᵢ √λᵢ |ii⟩ described by its Schmidt coefficients λ
/// (squared amplitudes), sorted in descending order.
#[derive(Clone, Debug, PartialEq)]
pub struct PureSchmidtState {
    schmidt: Vec<f64>,
}

impl PureSchmidtState {
    pub fn new(mut coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Validation("empty Schmidt vector".into()));
        }
        if let Some(bad) = coefficients.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::Validation(format!("Schmidt coefficient {bad} is negative or non-finite")));
        }
        let total: f64 = coefficients.iter().sum();
        if (total - 1.0).abs() > STATE_TOL {
            return Err(Error::Validation(format!("Schmidt coefficients sum to {total:.12}")));
        }
        coefficients.iter_mut().for_each(|x| *x /= total);
        coefficients.sort_by(|a, b| b.total_cmp(a));
        Ok(PureSchmidtState { schmidt: coefficients })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.schmidt
    }

    pub fn dim(&self) -> usize {
        self.schmidt.len()
    }

    pub fn max_coefficient(&self) -> f64 {
        self.schmidt[0]
    }

    /// Amplitude vector Σᵢ √λᵢ |ii⟩ on d × d.
    pub fn amplitudes(&self) -> Vec<C64> {
        let d = self.dim();
        let mut v = vec![c(0.0, 0.0); d * d];
        for (i, &l) in self.schmidt.iter().enumerate() {
            v[i * d + i] = c(l.sqrt(), 0.0);
        }
        v
    }

    pub fn to_state(&self) -> BipartiteState {
        let d = self.dim();
        BipartiteState::from_pure(d, d, &self.amplitudes()).expect("Schmidt vector is normalized")
    }

    /// Schmidt coefficients of a pure bipartite state; mixed input is an
    /// applicability error.
    pub fn from_state(s: &BipartiteState) -> Result<Self> {
        let v = s.pure_vector().ok_or_else(|| {
            Error::Applicability(format!("state is mixed (purity {:.6}); measure needs a pure state", s.purity()))
        })?;
        let (da, db) = (s.dim_a(), s.dim_b());
        let full = ComplexMatrix::outer(&v);
        let keep = if da <= db { 0 } else { 1 };
        let reduced = partial_trace_subsystems(full.inner(), &[da, db], &[keep])?;
        let mut ev: Vec<f64> =
            ComplexMatrix::from(reduced).hermitian_part().into_inner().symmetric_eigenvalues().iter().map(|x| x.max(0.0)).collect();
        let total: f64 = ev.iter().sum();
        ev.iter_mut().for_each(|x| *x /= total);
        PureSchmidtState::new(ev)
    }
}

/// |φ⁺⟩ = (|00⟩ + |11⟩)/√2
pub fn bell() -> BipartiteState {
    bell_schmidt().to_state()
}

pub fn bell_schmidt() -> PureSchmidtState {
    PureSchmidtState { schmidt: vec![0.5, 0.5] }
}

/// cos α |00⟩ + sin α |11⟩ for α in the open interval (0, π/2).
pub fn pure_alpha(alpha: f64) -> Result<PureSchmidtState> {
    if !(alpha > 0.0 && alpha < FRAC_PI_2) {
        return Err(Error::Domain(format!("alpha {alpha} outside (0, pi/2)")));
    }
    PureSchmidtState::new(vec![alpha.cos().powi(2), alpha.sin().powi(2)])
}

/// (1/√2)|00⟩ + Σ_{i=1}^{d-1} (1/√(2(d−1)))|ii⟩: geometric entanglement 1/2
/// for every d while the entanglement entropy grows without bound.
pub fn embezzler_psi(d: usize) -> Result<PureSchmidtState> {
    if d < 2 {
        return Err(Error::Domain(format!("embezzler dimension {d} must be at least 2")));
    }
    let tail = 0.5 / (d - 1) as f64;
    let mut coeffs = vec![0.5];
    coeffs.extend(std::iter::repeat_n(tail, d - 1));
    PureSchmidtState::new(coeffs)
}

/// The 3×3 maximally correlated state (1/6) Σ_{i,j} (|ii⟩⟨ii| − |ii⟩⟨jj|).
///
/// Summed literally, the correlated block is (3I − J)/6: diagonal 1/3,
/// off-diagonal −1/6, eigenvalues {1/2, 1/2, 0}.
pub fn maximally_correlated_lami() -> BipartiteState {
    let mut m = ComplexMatrix::zeros(9, 9).into_inner();
    for i in 0..3 {
        for j in 0..3 {
            let (ii, jj) = (i * 3 + i, j * 3 + j);
            m[(ii, ii)] += c(1.0 / 6.0, 0.0);
            m[(ii, jj)] -= c(1.0 / 6.0, 0.0);
        }
    }
    BipartiteState::new(3, 3, ComplexMatrix::from(m)).expect("Lami state is a valid density matrix")
}

/// p |φ⁺⟩⟨φ⁺| + (1 − p) I/4
pub fn werner(p: f64) -> Result<BipartiteState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("Werner parameter {p} outside [0, 1]")));
    }
    bell().mix(&BipartiteState::maximally_mixed(2, 2), p)
}

/// |00⟩ on d_A × d_B.
pub fn product_zero(dim_a: usize, dim_b: usize) -> BipartiteState {
    let mut v = vec![c(0.0, 0.0); dim_a * dim_b];
    v[0] = c(1.0, 0.0);
    BipartiteState::from_pure(dim_a, dim_b, &v).expect("basis vector")
}

// ---------------------------------------------------------------------------
// File format

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixPayload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub dims: [usize; 2],
    pub matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchmidtPayload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<[usize; 2]>,
    pub schmidt: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedPayload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<[usize; 2]>,
    pub named: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
}

/// Parsed contents of a state file.
#[derive(Clone, Debug, PartialEq)]
pub enum StateFile {
    Matrix(MatrixPayload),
    PureSchmidt(SchmidtPayload),
    Named(NamedPayload),
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(format!("line {} column {}: {e}", e.line(), e.column()))
}

impl StateFile {
    pub fn parse(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(parse_err)?;
        let obj = value.as_object().ok_or_else(|| Error::Parse("state file must be a JSON object".into()))?;
        let kind = match obj.get("kind") {
            Some(Value::String(k)) => k.clone(),
            Some(other) => return Err(Error::Parse(format!("field `kind`: expected a string, got {other}"))),
            None if obj.contains_key("matrix") => "matrix".into(),
            None if obj.contains_key("schmidt") => "pure-schmidt".into(),
            None if obj.contains_key("named") => "named".into(),
            None => return Err(Error::Parse("missing field `kind`".into())),
        };
        let field_err = |e: serde_json::Error| Error::Parse(format!("{kind} state: {e}"));
        match kind.as_str() {
            "matrix" => Ok(StateFile::Matrix(serde_json::from_value(value).map_err(field_err)?)),
            "pure-schmidt" => Ok(StateFile::PureSchmidt(serde_json::from_value(value).map_err(field_err)?)),
            "named" => Ok(StateFile::Named(serde_json::from_value(value).map_err(field_err)?)),
            other => Err(Error::Parse(format!("field `kind`: unknown value `{other}`"))),
        }
    }

    /// Builds and validates the described state.
    pub fn to_state(&self) -> Result<BipartiteState> {
        match self {
            StateFile::Matrix(p) => {
                let [da, db] = p.dims;
                let d = da * db;
                if p.matrix.len() != d {
                    return Err(Error::Parse(format!("field `matrix`: {} rows, dims require {d}", p.matrix.len())));
                }
                let mut entries = Vec::with_capacity(d * d);
                for (i, row) in p.matrix.iter().enumerate() {
                    if row.len() != d {
                        return Err(Error::Parse(format!("field `matrix` row {i}: {} entries, expected {d}", row.len())));
                    }
                    entries.extend(row.iter().map(|&[re, im]| c(re, im)));
                }
                BipartiteState::new(da, db, ComplexMatrix::from_row_major(d, d, entries)?)
            }
            StateFile::PureSchmidt(p) => {
                let s = PureSchmidtState::new(p.schmidt.clone())?;
                check_dims(p.dims, (s.dim(), s.dim()))?;
                Ok(s.to_state())
            }
            StateFile::Named(p) => {
                let need_f = |v: Option<f64>, name: &str| {
                    v.ok_or_else(|| Error::Parse(format!("named state `{}` needs field `{name}`", p.named)))
                };
                let s = match p.named.as_str() {
                    "bell" => bell(),
                    "pure-alpha" => pure_alpha(need_f(p.alpha, "alpha")?)?.to_state(),
                    "embezzler" => {
                        let d = p.d.ok_or_else(|| Error::Parse("named state `embezzler` needs field `d`".into()))?;
                        embezzler_psi(d)?.to_state()
                    }
                    "lami" | "maximally-correlated-lami" => maximally_correlated_lami(),
                    "werner" => werner(need_f(p.p, "p")?)?,
                    "maximally-mixed" => {
                        let [da, db] = p.dims.unwrap_or([2, 2]);
                        BipartiteState::maximally_mixed(da, db)
                    }
                    "product" => {
                        let [da, db] = p.dims.unwrap_or([2, 2]);
                        product_zero(da, db)
                    }
                    other => return Err(Error::Parse(format!("field `named`: unknown state `{other}`"))),
                };
                check_dims(p.dims, (s.dim_a(), s.dim_b()))?;
                Ok(s)
            }
        }
    }

    /// Matrix-kind file describing `s` exactly.
    pub fn from_state(s: &BipartiteState) -> Self {
        let d = s.dim();
        let m = s.matrix();
        let matrix = (0..d).map(|i| (0..d).map(|j| [m.get(i, j).re, m.get(i, j).im]).collect()).collect();
        StateFile::Matrix(MatrixPayload { kind: Some("matrix".into()), dims: [s.dim_a(), s.dim_b()], matrix })
    }

    pub fn to_json(&self) -> String {
        let out = match self {
            StateFile::Matrix(p) => serde_json::to_string(p),
            StateFile::PureSchmidt(p) => serde_json::to_string(p),
            StateFile::Named(p) => serde_json::to_string(p),
        };
        out.expect("state files serialize")
    }
}

fn check_dims(declared: Option<[usize; 2]>, actual: (usize, usize)) -> Result<()> {
    match declared {
        Some([a, b]) if (a, b) != actual => Err(Error::Parse(format!(
            "field `dims`: declared ({a}, {b}) but payload describes ({}, {})",
            actual.0, actual.1
        ))),
        _ => Ok(()),
    }
}

pub fn parse_state(text: &str) -> Result<BipartiteState> {
    StateFile::parse(text)?.to_state()
}

pub fn load_state(path: impl AsRef<Path>) -> Result<BipartiteState> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_state(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn save_state(s: &BipartiteState, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, StateFile::from_state(s).to_json() + "\n")
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{eigenvalues, partial_trace, von_neumann_entropy, Keep};
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    #[test]
    fn bell_is_rank_one_with_unit_entropy() {
        let b = bell();
        assert!((b.purity() - 1.0).abs() < 1e-12);
        let red = partial_trace(&b, Keep::A).unwrap();
        assert!((von_neumann_entropy(&red) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pure_alpha_cases() {
        assert_eq!(pure_alpha(FRAC_PI_4).unwrap().coefficients().len(), 2);
        let s = pure_alpha(FRAC_PI_4).unwrap();
        assert!((s.coefficients()[0] - 0.5).abs() < 1e-15);
        let s = pure_alpha(FRAC_PI_8).unwrap();
        assert!((s.coefficients()[0] - 0.8536).abs() < 1e-4);
        assert!((s.coefficients()[1] - 0.1464).abs() < 1e-4);
        for bad in [0.0, FRAC_PI_2, -0.1, 2.0] {
            assert_eq!(pure_alpha(bad).unwrap_err().kind(), "domain");
        }
    }

    #[test]
    fn pure_alpha_is_symmetric_about_pi_over_4() {
        for a in [0.1, 0.3, 0.7] {
            let x = pure_alpha(a).unwrap();
            let y = pure_alpha(FRAC_PI_2 - a).unwrap();
            for (p, q) in x.coefficients().iter().zip(y.coefficients()) {
                assert!((p - q).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn embezzler_coefficients() {
        assert_eq!(embezzler_psi(2).unwrap().coefficients(), &[0.5, 0.5]);
        let e = embezzler_psi(5).unwrap();
        assert_eq!(e.coefficients(), &[0.5, 0.125, 0.125, 0.125, 0.125]);
        assert_eq!(embezzler_psi(1).unwrap_err().kind(), "domain");
    }

    #[test]
    fn lami_state_is_valid_rank_two() {
        let s = maximally_correlated_lami();
        assert!((s.matrix().trace().re - 1.0).abs() < 1e-15);
        let ev = eigenvalues(s.matrix()).unwrap();
        assert!((ev[0] - 0.5).abs() < 1e-12 && (ev[1] - 0.5).abs() < 1e-12);
        assert!(ev[2..].iter().all(|x| x.abs() < 1e-12));
        // support on span{|ii⟩}
        for k in 0..9 {
            if k % 4 != 0 {
                assert_eq!(s.matrix().get(k, k).re, 0.0);
            }
        }
    }

    #[test]
    fn werner_endpoints() {
        let w0 = werner(0.0).unwrap();
        assert!(w0.matrix().max_abs_diff(&ComplexMatrix::identity(4).scale(0.25)) < 1e-15);
        let w1 = werner(1.0).unwrap();
        assert!(w1.matrix().max_abs_diff(bell().matrix()) < 1e-15);
        assert_eq!(werner(1.2).unwrap_err().kind(), "domain");
    }

    #[test]
    fn schmidt_from_state_recovers_coefficients() {
        let s = pure_alpha(0.4).unwrap();
        let back = PureSchmidtState::from_state(&s.to_state()).unwrap();
        for (p, q) in s.coefficients().iter().zip(back.coefficients()) {
            assert!((p - q).abs() < 1e-12);
        }
        assert_eq!(PureSchmidtState::from_state(&werner(0.5).unwrap()).unwrap_err().kind(), "applicability");
    }

    #[test]
    fn parse_named_without_kind() {
        let s = parse_state(r#"{"named": "pure-alpha", "alpha": 0.3927}"#).unwrap();
        assert_eq!((s.dim_a(), s.dim_b()), (2, 2));
    }

    #[test]
    fn parse_errors_carry_context() {
        let e = parse_state("{\n \"kind\": \"matrix\",\n \"dims\": [2, 2],\n}").unwrap_err();
        assert_eq!(e.kind(), "parse");
        assert!(e.to_string().contains("line"));
        let e = parse_state(r#"{"kind": "matrix", "dims": [1, 1]}"#).unwrap_err();
        assert!(e.to_string().contains("matrix"), "{e}");
        let e = parse_state(r#"{"named": "werner"}"#).unwrap_err();
        assert!(e.to_string().contains("`p`"));
    }

    #[test]
    fn non_psd_matrix_is_rejected() {
        let text = r#"{"kind": "matrix", "dims": [2, 1], "matrix": [[[1.1, 0], [0, 0]], [[0, 0], [-0.1, 0]]]}"#;
        let e = parse_state(text).unwrap_err();
        assert_eq!(e.kind(), "validation");
        assert!(e.to_string().contains("min eigenvalue"));
    }

    #[test]
    fn trace_within_tolerance_is_renormalized() {
        let text = r#"{"kind": "matrix", "dims": [2, 1], "matrix": [[[0.5000000001, 0], [0, 0]], [[0, 0], [0.5, 0]]]}"#;
        let s = parse_state(text).unwrap();
        assert!((s.matrix().trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.json");
        let s = werner(0.7).unwrap().apply_local_unitaries(
            &crate::random::haar_unitary(2, &mut crate::random::trial_rng(1, 0)),
            &ComplexMatrix::identity(2),
        ).unwrap();
        save_state(&s, &path).unwrap();
        let back = load_state(&path).unwrap();
        assert!(back.matrix().max_abs_diff(s.matrix()) <= 1e-12);
    }
}
