//! Seeded random states and unitaries.
//!
//! Sampling is limited to Haar-random pure states (and unitaries), their
//! reductions, and mixtures with the maximally mixed state.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use crate::qmat::{c, partial_trace_subsystems, BipartiteState, ComplexMatrix, C64};

/// Independent stream for trial `index` under a user seed.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

/// Haar-random unit vector in C^dim.
pub fn haar_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase fix.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    ComplexMatrix::from(q)
}

pub fn haar_pure<R: Rng + ?Sized>(dim_a: usize, dim_b: usize, rng: &mut R) -> BipartiteState {
    let v = haar_vector(dim_a * dim_b, rng);
    BipartiteState::from_pure(dim_a, dim_b, &v).expect("unit vector")
}

/// Reduction of a Haar-random pure state on (A B) ⊗ ancilla of size `ancilla`.
pub fn induced_mixed<R: Rng + ?Sized>(dim_a: usize, dim_b: usize, ancilla: usize, rng: &mut R) -> BipartiteState {
    let d = dim_a * dim_b;
    let v = haar_vector(d * ancilla, rng);
    let full = ComplexMatrix::outer(&v);
    let m = partial_trace_subsystems(full.inner(), &[d, ancilla], &[0]).expect("dims");
    BipartiteState::new(dim_a, dim_b, ComplexMatrix::from(m)).expect("reduced state is valid")
}

/// p|ψ⟩⟨ψ| + (1−p) I/d with ψ Haar-random and p uniform in [0, 1].
pub fn noisy_pure<R: Rng + ?Sized>(dim_a: usize, dim_b: usize, rng: &mut R) -> BipartiteState {
    let p: f64 = rng.gen();
    let psi = haar_pure(dim_a, dim_b, rng);
    psi.mix(&BipartiteState::maximally_mixed(dim_a, dim_b), p).expect("same dims")
}

/// Random mixture of product pure states (separable by construction).
pub fn separable_mixture<R: Rng + ?Sized>(dim_a: usize, dim_b: usize, terms: usize, rng: &mut R) -> BipartiteState {
    let mut weights: Vec<f64> = (0..terms).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let d = dim_a * dim_b;
    let mut m = ComplexMatrix::zeros(d, d);
    for w in weights {
        let a = ComplexMatrix::outer(&haar_vector(dim_a, rng));
        let b = ComplexMatrix::outer(&haar_vector(dim_b, rng));
        m = m.add(&a.kron(&b).scale(w));
    }
    BipartiteState::new(dim_a, dim_b, m).expect("mixture of states")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = trial_rng(3, 0);
        let u = haar_unitary(5, &mut rng);
        let prod = u.matmul(&u.adjoint());
        assert!(prod.max_abs_diff(&ComplexMatrix::identity(5)) < 1e-12);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: f64 = trial_rng(7, 1).gen();
        let b: f64 = trial_rng(7, 1).gen();
        let c: f64 = trial_rng(7, 2).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
