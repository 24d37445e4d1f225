//! Seeded random states, unitaries and simplex points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::Result;
use crate::linalg::CMatrix;
use crate::qstate::{DensityMatrix, PureState};
use crate::scalar::{c, cr, czero, Real, C};

/// Deterministic generator used by every sampler in the crate.
pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator for `seed`; lets batch jobs
/// draw per-sample randomness that does not depend on scheduling.
pub fn rng_stream(seed: u64, stream: u64) -> SeededRng {
    let mut rng = rng_from_seed(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> C<T> {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c(T::lit(re), T::lit(im))
}

/// Haar-random pure state from normalized complex Gaussians.
pub fn haar_random_pure<T: Real>(dims: &[usize], seed: u64) -> Result<PureState<T>> {
    haar_random_pure_with(dims, &mut rng_from_seed(seed))
}

pub fn haar_random_pure_with<T: Real, R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<PureState<T>> {
    let total = dims.iter().product::<usize>().max(1);
    let amps = (0..total).map(|_| gaussian(rng)).collect();
    PureState::new(dims, amps, false)
}

/// Haar-random `n x n` unitary via Gram-Schmidt on Gaussian columns.
pub fn random_unitary<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix<T> {
    let mut cols: Vec<Vec<C<T>>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<C<T>> = (0..n).map(|_| gaussian(rng)).collect();
        for _ in 0..2 {
            for u in &cols {
                let proj = u.iter().zip(&v).fold(czero::<T>(), |acc, (a, b)| acc + a.conj() * b);
                for (x, y) in v.iter_mut().zip(u) {
                    *x = *x - proj * y;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm > T::lit(1e-6) {
            cols.push(v.into_iter().map(|z| z / cr(norm)).collect());
        }
    }
    CMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// Random density matrix of the given rank: a mixture of `rank` Haar vectors
/// with Dirichlet-like weights.
pub fn random_density<T: Real, R: Rng + ?Sized>(dims: &[usize], rank: usize, rng: &mut R) -> Result<DensityMatrix<T>> {
    let weights = dirichlet(rank.max(1), rng);
    let mut acc: Option<CMatrix<T>> = None;
    for w in weights {
        let psi: PureState<T> = haar_random_pure_with(dims, rng)?;
        let term = CMatrix::outer(psi.amps(), psi.amps()).scale(cr(T::lit(w)));
        acc = Some(match acc {
            Some(m) => &m + &term,
            None => term,
        });
    }
    DensityMatrix::new(dims, acc.expect("rank at least one"))
}

/// Uniform point on the probability simplex (flat Dirichlet) of size `n`.
pub fn dirichlet<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let xs: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = xs.iter().sum();
    xs.into_iter().map(|x| x / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{PartialTrace, SiteSet};

    #[test]
    fn seeded_states_repeat() {
        let a: PureState<f64> = haar_random_pure(&[2, 2, 2], 42).unwrap();
        let b: PureState<f64> = haar_random_pure(&[2, 2, 2], 42).unwrap();
        assert_eq!(a, b);
        let q: PureState<f64> = haar_random_pure(&[3, 3], 1).unwrap();
        assert!((q.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn haar_mean_purity_two_qubits() {
        // (d1 + d2) / (d1 d2 + 1) = 4/5
        let mut rng = rng_from_seed(7);
        let keep = SiteSet::new(&[0], 2).unwrap();
        let n = 10_000;
        let mean = (0..n)
            .map(|_| {
                let psi: PureState<f64> = haar_random_pure_with(&[2, 2], &mut rng).unwrap();
                psi.partial_trace(&keep).unwrap().purity()
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.8).abs() < 0.01, "mean purity {mean}");
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = rng_from_seed(3);
        let u: CMatrix<f64> = random_unitary(5, &mut rng);
        assert!(u.adjoint().matmul(&u).max_abs_diff(&CMatrix::identity(5)) < 1e-12);
    }

    #[test]
    fn dirichlet_sums_to_one() {
        let mut rng = rng_from_seed(9);
        let p = dirichlet(5, &mut rng);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(p.iter().all(|&x| x >= 0.0));
    }
}
