//! Dense complex-matrix kernel.
//!
//! Everything downstream (measures, batteries, free energies) reduces to the
//! handful of operations here: Hermitian spectra, tensor products, partial
//! traces and transposes, entropies and divergences. All logarithms are base 2.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;

/// Eigenvalues at or below this are treated as exact zeros (0·log 0, supports).
pub const EIGEN_CUTOFF: f64 = 1e-12;
/// Tolerance for the Hermitian, unit-trace and PSD checks on states.
pub const STATE_TOL: f64 = 1e-9;
/// Largest total Hilbert-space dimension a tensor product may produce.
pub const MAX_TOTAL_DIM: usize = 4096;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Square or rectangular dense complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite entry at ({}, {})",
                bad / cols.max(1),
                bad % cols.max(1)
            )));
        }
        Ok(ComplexMatrix(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        ComplexMatrix(DMatrix::identity(n, n))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&x| c(x, 0.0)));
        ComplexMatrix(DMatrix::from_diagonal(&v))
    }

    /// Projector |v⟩⟨v| (not normalized).
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        ComplexMatrix(DMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj()))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn row_major_entries(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        ComplexMatrix(self.0.transpose())
    }

    pub fn kron(&self, other: &ComplexMatrix) -> Self {
        ComplexMatrix(self.0.kronecker(&other.0))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, f: f64) -> Self {
        ComplexMatrix(self.0.map(|z| z * f))
    }

    pub fn add(&self, other: &ComplexMatrix) -> Self {
        ComplexMatrix(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Self {
        ComplexMatrix(&self.0 - &other.0)
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Self {
        ComplexMatrix(&self.0 * &other.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// max |M − M†| entrywise.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// (M + M†)/2
    pub fn hermitian_part(&self) -> Self {
        ComplexMatrix((&self.0 + self.0.adjoint()) * c(0.5, 0.0))
    }

    /// Largest entrywise modulus off the diagonal.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                if i != j {
                    worst = worst.max(self.0[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn real_diagonal(&self) -> Vec<f64> {
        (0..self.rows().min(self.cols())).map(|i| self.0[(i, i)].re).collect()
    }

    /// U M U†
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        ComplexMatrix(&u.0 * &self.0 * u.0.adjoint())
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl From<DMatrix<C64>> for ComplexMatrix {
    fn from(m: DMatrix<C64>) -> Self {
        ComplexMatrix(m)
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, matching `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|x| x)
    }

    /// V f(Λ) V†
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = self.eigenvectors.inner();
        let n = v.nrows();
        let mut scaled = v.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let fl = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= fl;
            }
        }
        ComplexMatrix(scaled * v.adjoint())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let defect = m.hermiticity_defect();
    let scale = m.frobenius_norm().max(1.0);
    if defect > STATE_TOL * scale {
        return Err(Error::Shape(format!("matrix is not Hermitian (max |M - M^†| = {defect:.3e})")));
    }
    Ok(())
}

/// Spectral decomposition of a Hermitian matrix. Non-Hermitian input is a
/// shape error; the anti-Hermitian residue below tolerance is discarded.
pub fn eigh(m: &ComplexMatrix) -> Result<Spectrum> {
    check_hermitian(m)?;
    Ok(eigh_unchecked(m.hermitian_part().inner()))
}

/// Hermitian eigensolver shared by [`eigh`] and [`eigenvalues`].
///
/// Rows and columns that are exactly zero are split off first (they carry
/// eigenvalue 0 with a unit eigenvector), and the rest is rescaled to unit
/// max entry. nalgebra's tridiagonal reduction can return NaN on large,
/// mostly empty matrices with entries near rounding noise; both steps avoid
/// that and the first also makes sparse states cheap.
fn hermitian_eigen(m: &DMatrix<C64>, want_vectors: bool) -> (Vec<f64>, Option<DMatrix<C64>>) {
    let n = m.nrows();
    let zero = C64::new(0.0, 0.0);
    let support: Vec<usize> = (0..n).filter(|&i| m.row(i).iter().any(|&z| z != zero)).collect();
    let k = support.len();
    let sub = DMatrix::from_fn(k, k, |i, j| m[(support[i], support[j])]);
    let scale = sub.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
    let sub = sub.unscale(scale);
    let (mut values, sub_vectors) = if k == 0 {
        (vec![], None)
    } else if want_vectors {
        let eig = sub.symmetric_eigen();
        (eig.eigenvalues.iter().map(|x| x * scale).collect::<Vec<f64>>(), Some(eig.eigenvectors))
    } else {
        (sub.symmetric_eigenvalues().iter().map(|x| x * scale).collect(), None)
    };
    values.resize(n, 0.0);
    let vectors = want_vectors.then(|| {
        let mut v = DMatrix::from_element(n, n, zero);
        if let Some(sv) = &sub_vectors {
            for (col, _) in support.iter().enumerate() {
                for (row, &r) in support.iter().enumerate() {
                    v[(r, col)] = sv[(row, col)];
                }
            }
        }
        let null = (0..n).filter(|i| support.binary_search(i).is_err());
        for (col, i) in (k..n).zip(null) {
            v[(i, col)] = C64::new(1.0, 0.0);
        }
        v
    });
    (values, vectors)
}

pub(crate) fn eigh_unchecked(m: &DMatrix<C64>) -> Spectrum {
    let n = m.nrows();
    let (values, vectors) = hermitian_eigen(m, true);
    let vectors = vectors.expect("requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let eigenvalues = order.iter().map(|&k| values[k]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    Spectrum { eigenvalues, eigenvectors: ComplexMatrix(eigenvectors) }
}

/// Eigenvalues only, descending.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    let (mut ev, _) = hermitian_eigen(&m.hermitian_part().0, false);
    ev.sort_by(|a, b| b.total_cmp(a));
    Ok(ev)
}

// ---------------------------------------------------------------------------
// Subsystem index arithmetic

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn digits(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
}

/// Reorders tensor factors: output subsystem `j` is input subsystem `perm[j]`.
pub fn permute_subsystems(m: &DMatrix<C64>, dims: &[usize], perm: &[usize]) -> Result<DMatrix<C64>> {
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::Shape(format!(
            "matrix is {}x{} but subsystem dims {dims:?} give {total}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut seen = vec![false; dims.len()];
    if perm.len() != dims.len() || perm.iter().any(|&p| p >= dims.len() || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::Shape(format!("{perm:?} is not a permutation of {} subsystems", dims.len())));
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let old_strides = strides(dims);
    // position in the old ordering of each new index
    let mut map = vec![0usize; total];
    let mut d = vec![0usize; dims.len()];
    for (new_idx, slot) in map.iter_mut().enumerate() {
        digits(new_idx, &new_dims, &mut d);
        *slot = perm.iter().zip(&d).map(|(&p, &x)| x * old_strides[p]).sum();
    }
    Ok(DMatrix::from_fn(total, total, |i, j| m[(map[i], map[j])]))
}

/// Traces out every subsystem not listed in `keep`; kept subsystems retain
/// their relative order.
pub fn partial_trace_subsystems(m: &DMatrix<C64>, dims: &[usize], keep: &[usize]) -> Result<DMatrix<C64>> {
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::Shape(format!(
            "matrix is {}x{} but subsystem dims {dims:?} give {total}",
            m.nrows(),
            m.ncols()
        )));
    }
    if keep.iter().any(|&k| k >= dims.len()) || keep.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Shape(format!("invalid subsystem selection {keep:?} for dims {dims:?}")));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let mut perm = keep.to_vec();
    perm.extend(&traced);
    let reordered = permute_subsystems(m, dims, &perm)?;
    let dk: usize = keep.iter().map(|&k| dims[k]).product();
    let dt: usize = traced.iter().map(|&k| dims[k]).product();
    Ok(DMatrix::from_fn(dk, dk, |i, j| {
        (0..dt).map(|t| reordered[(i * dt + t, j * dt + t)]).sum()
    }))
}

// ---------------------------------------------------------------------------
// Bipartite states

/// Which part of a (possibly composite) bipartite state to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    /// Alice's whole side, returned as a (d_A × 1) state.
    A,
    /// Bob's whole side, returned as a (1 × d_B) state.
    B,
    /// The i-th registered tensor factor (both of its local parts).
    Factor(usize),
}

/// Density matrix with a declared cut between Alice (A) and Bob (B).
///
/// A state built by [`tensor`] remembers its factors. The qudit ordering in
/// the matrix is all of Alice's factors followed by all of Bob's: for
/// `ρ^{AB} ⊗ τ^{A'B'}` that is `A, A', B, B'`, with the cut between
/// `(A, A')` and `(B, B')`.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState {
    factors: Vec<(usize, usize)>,
    matrix: ComplexMatrix,
}

impl BipartiteState {
    /// Validates the state invariants. The matrix is Hermitian-symmetrized and
    /// renormalized to exact unit trace when it is within tolerance.
    pub fn new(dim_a: usize, dim_b: usize, matrix: ComplexMatrix) -> Result<Self> {
        let d = dim_a * dim_b;
        if dim_a == 0 || dim_b == 0 || matrix.rows() != d || matrix.cols() != d {
            return Err(Error::Shape(format!(
                "matrix is {}x{} but dims ({dim_a}, {dim_b}) need {d}x{d}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let defect = matrix.hermiticity_defect();
        if defect > STATE_TOL {
            return Err(Error::Validation(format!("not Hermitian: max |M - M^†| {defect:.1e}")));
        }
        let matrix = matrix.hermitian_part();
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::Validation(format!("trace {tr:.12} differs from 1")));
        }
        let matrix = matrix.scale(1.0 / tr);
        let min_eig = *eigenvalues(&matrix)?.last().unwrap_or(&0.0);
        if min_eig < -STATE_TOL {
            return Err(Error::Validation(format!("min eigenvalue {min_eig:.1e}")));
        }
        Ok(BipartiteState { factors: vec![(dim_a, dim_b)], matrix })
    }

    /// |ψ⟩⟨ψ| for a normalized amplitude vector in the A⊗B product basis.
    pub fn from_pure(dim_a: usize, dim_b: usize, amplitudes: &[C64]) -> Result<Self> {
        if amplitudes.len() != dim_a * dim_b {
            return Err(Error::Shape(format!(
                "{} amplitudes for dims ({dim_a}, {dim_b})",
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::Validation(format!("state vector norm {norm:.12} differs from 1")));
        }
        let v: Vec<C64> = amplitudes.iter().map(|z| z / norm).collect();
        Ok(BipartiteState { factors: vec![(dim_a, dim_b)], matrix: ComplexMatrix::outer(&v) })
    }

    /// The 1×1 state; neutral element of [`tensor`].
    pub fn trivial() -> Self {
        BipartiteState { factors: vec![(1, 1)], matrix: ComplexMatrix::identity(1) }
    }

    /// I/(d_A d_B)
    pub fn maximally_mixed(dim_a: usize, dim_b: usize) -> Self {
        let d = dim_a * dim_b;
        BipartiteState { factors: vec![(dim_a, dim_b)], matrix: ComplexMatrix::identity(d).scale(1.0 / d as f64) }
    }

    /// Product of two local density matrices, ρ_A ⊗ ρ_B.
    pub fn product(rho_a: &ComplexMatrix, rho_b: &ComplexMatrix) -> Result<Self> {
        BipartiteState::new(rho_a.rows(), rho_b.rows(), rho_a.kron(rho_b))
    }

    /// Internal constructor for exact operations that preserve the invariants.
    pub(crate) fn from_parts(factors: Vec<(usize, usize)>, matrix: DMatrix<C64>) -> Self {
        BipartiteState { factors, matrix: ComplexMatrix(matrix) }
    }

    pub fn dim_a(&self) -> usize {
        self.factors.iter().map(|f| f.0).product()
    }

    pub fn dim_b(&self) -> usize {
        self.factors.iter().map(|f| f.1).product()
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn factors(&self) -> &[(usize, usize)] {
        &self.factors
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Qudit dimensions in matrix order: Alice's factors then Bob's.
    pub fn qudit_dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.0).chain(self.factors.iter().map(|f| f.1)).collect()
    }

    /// Forgets the factor structure, keeping only the A|B cut.
    pub fn flattened(&self) -> Self {
        BipartiteState { factors: vec![(self.dim_a(), self.dim_b())], matrix: self.matrix.clone() }
    }

    pub fn purity(&self) -> f64 {
        self.matrix.inner().iter().map(|z| z.norm_sqr()).sum()
    }

    /// State vector if the state is pure within tolerance (global phase fixed
    /// so the largest-weight amplitude is real and positive).
    pub fn pure_vector(&self) -> Option<Vec<C64>> {
        if self.purity() < 1.0 - STATE_TOL {
            return None;
        }
        let m = self.matrix.inner();
        let j = (0..self.dim()).max_by(|&a, &b| m[(a, a)].re.total_cmp(&m[(b, b)].re))?;
        let scale = m[(j, j)].re.sqrt();
        let mut v: Vec<C64> = (0..self.dim()).map(|i| m[(i, j)] / scale).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        Some(v)
    }

    /// Reorders the registered tensor factors: new factor `k` is old factor
    /// `order[k]`. Alice's and Bob's parts move together, so this is a pair of
    /// local permutations and never crosses the cut.
    pub fn permute_factors(&self, order: &[usize]) -> Result<Self> {
        let k = self.factors.len();
        let mut perm: Vec<usize> = order.to_vec();
        perm.extend(order.iter().map(|&o| o + k));
        let m = permute_subsystems(self.matrix.inner(), &self.qudit_dims(), &perm)?;
        let factors = order.iter().map(|&o| self.factors[o]).collect();
        Ok(BipartiteState { factors, matrix: ComplexMatrix(m) })
    }

    /// U ρ U† for a unitary on the full space.
    pub fn conjugated(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.rows() != self.dim() || u.cols() != self.dim() {
            return Err(Error::Shape(format!("unitary is {}x{}, state has dim {}", u.rows(), u.cols(), self.dim())));
        }
        let m = self.matrix.conjugate_by(u).hermitian_part();
        Ok(BipartiteState { factors: self.factors.clone(), matrix: m })
    }

    /// (U_A ⊗ U_B) ρ (U_A ⊗ U_B)†
    pub fn apply_local_unitaries(&self, ua: &ComplexMatrix, ub: &ComplexMatrix) -> Result<Self> {
        self.conjugated(&ua.kron(ub))
    }

    /// Convex mixture p·self + (1−p)·other on identical dimensions.
    pub fn mix(&self, other: &BipartiteState, p: f64) -> Result<Self> {
        if self.dim_a() != other.dim_a() || self.dim_b() != other.dim_b() {
            return Err(Error::Shape("mixing states of different dimensions".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("mixing weight {p} outside [0, 1]")));
        }
        let m = self.matrix.scale(p).add(&other.matrix.scale(1.0 - p));
        Ok(BipartiteState { factors: self.factors.clone(), matrix: m })
    }
}

/// ρ ⊗ τ on (A A' | B B'), capped at [`MAX_TOTAL_DIM`].
pub fn tensor(a: &BipartiteState, b: &BipartiteState) -> Result<BipartiteState> {
    tensor_capped(a, b, MAX_TOTAL_DIM)
}

pub fn tensor_capped(a: &BipartiteState, b: &BipartiteState, max_dim: usize) -> Result<BipartiteState> {
    let total = a.dim().saturating_mul(b.dim());
    if total > max_dim {
        return Err(Error::Capacity(format!("tensor product dimension {total} exceeds {max_dim}")));
    }
    // Drop trivial factors so trivial() is a neutral element.
    let fa: Vec<(usize, usize)> = a.factors.iter().copied().filter(|&f| f != (1, 1)).collect();
    let fb: Vec<(usize, usize)> = b.factors.iter().copied().filter(|&f| f != (1, 1)).collect();
    let raw = a.matrix.inner().kronecker(b.matrix.inner());
    // kron order: A-qudits(a), B-qudits(a), A-qudits(b), B-qudits(b)
    let (ka, kb) = (fa.len(), fb.len());
    let mut dims: Vec<usize> = fa.iter().map(|f| f.0).collect();
    dims.extend(fa.iter().map(|f| f.1));
    dims.extend(fb.iter().map(|f| f.0));
    dims.extend(fb.iter().map(|f| f.1));
    let mut perm: Vec<usize> = (0..ka).collect();
    perm.extend(2 * ka..2 * ka + kb);
    perm.extend(ka..2 * ka);
    perm.extend(2 * ka + kb..2 * ka + 2 * kb);
    let matrix = if dims.is_empty() { raw } else { permute_subsystems(&raw, &dims, &perm)? };
    let mut factors = fa;
    factors.extend(fb);
    if factors.is_empty() {
        factors.push((1, 1));
    }
    Ok(BipartiteState::from_parts(factors, matrix))
}

/// ρ^{⊗n}
pub fn tensor_power(s: &BipartiteState, n: usize) -> Result<BipartiteState> {
    let mut out = BipartiteState::trivial();
    for _ in 0..n {
        out = tensor(&out, s)?;
    }
    Ok(out)
}

pub fn partial_trace(s: &BipartiteState, keep: Keep) -> Result<BipartiteState> {
    let k = s.factors.len();
    let dims = s.qudit_dims();
    let (keep_idx, factors): (Vec<usize>, Vec<(usize, usize)>) = match keep {
        Keep::A => ((0..k).collect(), vec![(s.dim_a(), 1)]),
        Keep::B => ((k..2 * k).collect(), vec![(1, s.dim_b())]),
        Keep::Factor(i) if i < k => (vec![i, i + k], vec![s.factors[i]]),
        Keep::Factor(i) => {
            return Err(Error::Shape(format!("factor {i} requested but state has {k} factors")));
        }
    };
    let m = partial_trace_subsystems(s.matrix.inner(), &dims, &keep_idx)?;
    Ok(BipartiteState::from_parts(factors, m))
}

/// ρ^{T_A}: transpose on Alice's side.
pub fn partial_transpose(s: &BipartiteState) -> ComplexMatrix {
    let (da, db) = (s.dim_a(), s.dim_b());
    let m = s.matrix.inner();
    ComplexMatrix(DMatrix::from_fn(da * db, da * db, |r, col| {
        let (a, b) = (r / db, r % db);
        let (a2, b2) = (col / db, col % db);
        m[(a2 * db + b, a * db + b2)]
    }))
}

/// ‖M‖₁ for Hermitian M: sum of absolute eigenvalues.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|x| x.abs()).sum())
}

/// ½‖ρ − σ‖₁
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::Shape(format!(
            "trace distance between {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    Ok(0.5 * trace_norm(&a.sub(b))?)
}

/// −Σ pᵢ log₂ pᵢ, ignoring entries at or below [`EIGEN_CUTOFF`].
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > EIGEN_CUTOFF).map(|&x| -x * x.log2()).sum::<f64>().max(0.0)
}

pub fn matrix_entropy(m: &ComplexMatrix) -> Result<f64> {
    Ok(shannon_entropy(&eigenvalues(m)?))
}

/// S(ρ) = −Tr ρ log₂ ρ
pub fn von_neumann_entropy(s: &BipartiteState) -> f64 {
    shannon_entropy(&eigh_unchecked(s.matrix.inner()).eigenvalues)
}

/// S(ρ‖σ) on raw density matrices. Returns `f64::INFINITY` when the support
/// of ρ is not contained in the support of σ.
pub fn relative_entropy_matrices(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    if rho.rows() != sigma.rows() || !rho.is_square() || !sigma.is_square() {
        return Err(Error::Shape(format!(
            "relative entropy between {}x{} and {}x{}",
            rho.rows(),
            rho.cols(),
            sigma.rows(),
            sigma.cols()
        )));
    }
    let sr = eigh(rho)?;
    let ss = eigh(sigma)?;
    let neg_entropy: f64 = sr.eigenvalues.iter().filter(|&&x| x > EIGEN_CUTOFF).map(|&x| x * x.log2()).sum();
    let v = ss.eigenvectors.inner();
    let rho_in_sigma_basis = v.adjoint() * rho.inner() * v;
    let mut cross = 0.0;
    for (j, &q) in ss.eigenvalues.iter().enumerate() {
        let weight = rho_in_sigma_basis[(j, j)].re;
        if q > EIGEN_CUTOFF {
            cross += weight * q.log2();
        } else if weight > EIGEN_CUTOFF {
            return Ok(f64::INFINITY);
        }
    }
    Ok((neg_entropy - cross).max(0.0))
}

/// S(ρ‖σ) = Tr ρ log₂ ρ − Tr ρ log₂ σ
pub fn relative_entropy(rho: &BipartiteState, sigma: &BipartiteState) -> Result<f64> {
    relative_entropy_matrices(&rho.matrix, &sigma.matrix)
}

/// Positive square root of a PSD matrix (negative noise clamped to 0).
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(eigh(m)?.map(|x| x.max(0.0).sqrt()))
}

/// F(ρ, σ) = (Tr √(√ρ σ √ρ))²
pub fn fidelity_matrices(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    if rho.rows() != sigma.rows() {
        return Err(Error::Shape("fidelity between states of different dimension".into()));
    }
    let sr = psd_sqrt(rho)?;
    let inner = sr.matmul(sigma).matmul(&sr).hermitian_part();
    let root_trace: f64 = eigenvalues(&inner)?.iter().map(|x| x.max(0.0).sqrt()).sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

pub fn fidelity(rho: &BipartiteState, sigma: &BipartiteState) -> Result<f64> {
    fidelity_matrices(&rho.matrix, &sigma.matrix)
}

/// h(x) = −x log₂ x − (1−x) log₂(1−x)
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("binary entropy argument {x} outside [0, 1]")));
    }
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    Ok(term(x) + term(1.0 - x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell() -> BipartiteState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        BipartiteState::from_pure(2, 2, &[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]).unwrap()
    }

    fn ket00() -> BipartiteState {
        BipartiteState::from_pure(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap()
    }

    #[test]
    fn spectra_of_noise_level_matrices_are_finite() {
        let n = 64;
        let m = DMatrix::from_fn(n, n, |i, j| c(1e-17 * ((i * 7 + j * 7) % 5) as f64, 0.0));
        let ev = eigenvalues(&ComplexMatrix(m.clone())).unwrap();
        assert!(ev.iter().all(|x| x.is_finite() && x.abs() < 1e-14));
        let spec = eigh(&ComplexMatrix(m.clone())).unwrap();
        assert!(spec.reconstruct().max_abs_diff(&ComplexMatrix(m)) < 1e-30);
    }

    #[test]
    fn zero_rows_are_split_off() {
        let mut m = DMatrix::from_element(4, 4, c(0.0, 0.0));
        m[(1, 1)] = c(0.5, 0.0);
        m[(3, 3)] = c(0.5, 0.0);
        m[(1, 3)] = c(0.0, 0.5);
        m[(3, 1)] = c(0.0, -0.5);
        let m = ComplexMatrix(m);
        let spec = eigh(&m).unwrap();
        assert!((spec.eigenvalues[0] - 1.0).abs() < 1e-15);
        assert!(spec.eigenvalues[1..].iter().all(|x| x.abs() < 1e-15));
        assert!(spec.reconstruct().max_abs_diff(&m) < 1e-15);
        let v = &spec.eigenvectors;
        assert!(v.adjoint().matmul(v).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-14);
    }

    #[test]
    fn tensor_with_trivial_is_identity() {
        let b = bell();
        let t = tensor(&b, &BipartiteState::trivial()).unwrap();
        assert_eq!(t.factors(), b.factors());
        assert!(t.matrix().max_abs_diff(b.matrix()) == 0.0);
    }

    #[test]
    fn bell_tensor_bell_is_pure() {
        let t = tensor(&bell(), &bell()).unwrap();
        assert!((t.matrix().trace().re - 1.0).abs() < 1e-12);
        let ev = eigenvalues(t.matrix()).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-12);
        assert!(ev[1].abs() < 1e-12);
        assert_eq!((t.dim_a(), t.dim_b()), (4, 4));
    }

    #[test]
    fn tensor_orders_alice_factors_first() {
        // |0⟩_A|1⟩_B ⊗ |1⟩_A'|0⟩_B' should be |0 1⟩_{AA'} |1 0⟩_{BB'}
        let e = |i: usize| {
            let mut v = vec![c(0.0, 0.0); 4];
            v[i] = c(1.0, 0.0);
            BipartiteState::from_pure(2, 2, &v).unwrap()
        };
        let t = tensor(&e(1), &e(2)).unwrap();
        // index = a*8 + a'*4 + b*2 + b' with a=0,a'=1,b=1,b'=0 → 6
        assert!((t.matrix().get(6, 6).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tensor_capacity_error() {
        let big = BipartiteState::maximally_mixed(8, 8);
        let err = tensor_capped(&big, &big, 1000).unwrap_err();
        assert_eq!(err.kind(), "capacity");
    }

    #[test]
    fn partial_trace_bell_is_maximally_mixed() {
        let r = partial_trace(&bell(), Keep::A).unwrap();
        assert_eq!((r.dim_a(), r.dim_b()), (2, 1));
        assert!(r.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-15);
        let r = partial_trace(&ket00(), Keep::A).unwrap();
        assert!(r.matrix().max_abs_diff(&ComplexMatrix::from_real_diagonal(&[1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn partial_trace_of_alpha_state() {
        let a: f64 = 0.3;
        let v = [c(a.cos(), 0.0), c(0.0, 0.0), c(0.0, 0.0), c(a.sin(), 0.0)];
        let s = BipartiteState::from_pure(2, 2, &v).unwrap();
        let r = partial_trace(&s, Keep::A).unwrap();
        let expect = ComplexMatrix::from_real_diagonal(&[a.cos().powi(2), a.sin().powi(2)]);
        assert!(r.matrix().max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_factor() {
        assert_eq!(partial_trace(&bell(), Keep::Factor(3)).unwrap_err().kind(), "shape");
    }

    #[test]
    fn partial_transpose_of_bell() {
        let pt = partial_transpose(&bell());
        assert!((trace_norm(&pt).unwrap() - 2.0).abs() < 1e-12);
        let ev = eigenvalues(&pt).unwrap();
        for (got, want) in ev.iter().zip([0.5, 0.5, 0.5, -0.5]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_transpose_of_product_is_ppt() {
        let ra = ComplexMatrix::from_row_major(2, 2, vec![c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)]).unwrap();
        let rb = ComplexMatrix::from_real_diagonal(&[0.4, 0.6]);
        let s = BipartiteState::product(&ra, &rb).unwrap();
        let pt = partial_transpose(&s);
        assert!(pt.max_abs_diff(&ra.transpose().kron(&rb)) < 1e-15);
        assert!(*eigenvalues(&pt).unwrap().last().unwrap() > -1e-12);
    }

    #[test]
    fn trace_norm_cases() {
        assert!((trace_norm(bell().matrix()).unwrap() - 1.0).abs() < 1e-12);
        assert!((trace_norm(&ComplexMatrix::from_real_diagonal(&[0.5, -0.5])).unwrap() - 1.0).abs() < 1e-15);
        let nh = ComplexMatrix::from_row_major(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(trace_norm(&nh).unwrap_err().kind(), "shape");
    }

    #[test]
    fn entropy_cases() {
        assert!(von_neumann_entropy(&bell()).abs() < 1e-12);
        let mixed = BipartiteState::maximally_mixed(2, 1);
        assert!((von_neumann_entropy(&mixed) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_cases() {
        let b = bell();
        assert!(relative_entropy(&b, &b).unwrap().abs() < 1e-10);
        let mm = BipartiteState::maximally_mixed(2, 2);
        assert!((relative_entropy(&b, &mm).unwrap() - 2.0).abs() < 1e-12);
        let p = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let q = ComplexMatrix::from_real_diagonal(&[0.5, 0.5]);
        assert!((relative_entropy_matrices(&p, &q).unwrap() - 1.0).abs() < 1e-12);
        // support violation
        assert_eq!(relative_entropy_matrices(&q, &p).unwrap(), f64::INFINITY);
    }

    #[test]
    fn fidelity_cases() {
        let b = bell();
        assert!((fidelity(&b, &b).unwrap() - 1.0).abs() < 1e-9);
        let p0 = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let p1 = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
        assert!(fidelity_matrices(&p0, &p1).unwrap() < 1e-12);
        // pure-state reduction ⟨ψ|σ|ψ⟩
        let sigma = BipartiteState::maximally_mixed(2, 2).mix(&ket00(), 0.5).unwrap();
        let psi = b.pure_vector().unwrap();
        let expect: f64 = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .map(|(i, j)| (psi[i].conj() * sigma.matrix().get(i, j) * psi[j]).re)
            .sum();
        assert!((fidelity(&b, &sigma).unwrap() - expect).abs() < 1e-9);
    }

    #[test]
    fn binary_entropy_cases() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        // direct evaluation: -0.8536 log2 0.8536 - 0.1464 log2 0.1464
        assert!((binary_entropy(0.8536).unwrap() - 0.600_757_491_465).abs() < 1e-9);
        assert_eq!(binary_entropy(1.5).unwrap_err().kind(), "domain");
    }

    #[test]
    fn new_state_validation() {
        let bad = ComplexMatrix::from_real_diagonal(&[1.1, -0.1]);
        let err = BipartiteState::new(2, 1, bad).unwrap_err();
        assert_eq!(err.kind(), "validation");
        assert!(err.to_string().contains("min eigenvalue"));
        let slightly_off = ComplexMatrix::from_real_diagonal(&[0.5 + 1e-10, 0.5]);
        let s = BipartiteState::new(2, 1, slightly_off).unwrap();
        assert!((s.matrix().trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spectrum_reconstructs() {
        let m = ComplexMatrix::from_row_major(2, 2, vec![c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(-1.0, 0.0)]).unwrap();
        let sp = eigh(&m).unwrap();
        assert!(sp.eigenvalues[0] >= sp.eigenvalues[1]);
        assert!(sp.reconstruct().sub(&m).frobenius_norm() <= 1e-8 * m.frobenius_norm());
    }

    #[test]
    fn permute_factors_swaps_system_and_battery() {
        let e = |i: usize| {
            let mut v = vec![c(0.0, 0.0); 4];
            v[i] = c(1.0, 0.0);
            BipartiteState::from_pure(2, 2, &v).unwrap()
        };
        let t = tensor(&e(1), &bell()).unwrap();
        let swapped = t.permute_factors(&[1, 0]).unwrap();
        let expect = tensor(&bell(), &e(1)).unwrap();
        assert!(swapped.matrix().max_abs_diff(expect.matrix()) < 1e-15);
    }
}
