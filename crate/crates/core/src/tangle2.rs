//! Bipartite measures: the two-tangle by several pure-state routes and the
//! Wootters closed form for two-qubit mixed states.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, svd, CMatrix};
use crate::qstate::{DensityMatrix, PartialTrace, PureState, SiteSet};
use crate::scalar::{c, czero, Real, C};

/// Eigenvalues below this are treated as outside the support of ρ.
const SUPPORT_TOL: f64 = 1e-14;

/// `σ_y^{⊗n} v*` for a vector over `n` qubits.
pub fn spin_flip<T: Real>(v: &[C<T>]) -> Vec<C<T>> {
    let n = v.len().trailing_zeros();
    let mask = v.len() - 1;
    (0..v.len())
        .map(|x| {
            let ones = (x as u32).count_ones() as i32;
            let zeros = n as i32 - ones;
            // σ_y|0> = i|1>, σ_y|1> = -i|0>
            let phase = i_pow::<T>(ones) * i_pow::<T>(3 * zeros);
            phase * v[x ^ mask].conj()
        })
        .collect()
}

fn i_pow<T: Real>(k: i32) -> C<T> {
    match k.rem_euclid(4) {
        0 => c(T::one(), T::zero()),
        1 => c(T::zero(), T::one()),
        2 => c(-T::one(), T::zero()),
        _ => c(T::zero(), -T::one()),
    }
}

pub(crate) fn require_qubits(dims: &[usize], q: usize) -> Result<()> {
    if dims.len() != q || dims.iter().any(|&d| d != 2) {
        return Err(Error::WrongDims { expected: vec![2; q], got: dims.to_vec() });
    }
    Ok(())
}

/// `2(1 - Tr ρ_cut²)`.
pub fn two_tangle_pure<T: Real>(psi: &PureState<T>, cut: &SiteSet) -> Result<T> {
    if cut.is_empty() || cut.len() >= psi.num_sites() {
        return Err(Error::TrivialCut);
    }
    let purity = psi.partial_trace(cut)?.purity();
    Ok((T::lit(2.0) * (T::one() - purity)).max(T::zero()))
}

/// `|<Ψ|σ_y⊗σ_y|Ψ*>|`.
pub fn concurrence_pure<T: Real>(psi: &PureState<T>) -> Result<T> {
    require_qubits(psi.dims(), 2)?;
    let psi = psi.to_normalized();
    let flipped = spin_flip(psi.amps());
    Ok(psi.amps().iter().zip(&flipped).fold(czero::<T>(), |acc, (a, b)| acc + a.conj() * b).norm())
}

/// `4 det ρ_A`.
pub fn two_tangle_det<T: Real>(psi: &PureState<T>) -> Result<T> {
    require_qubits(psi.dims(), 2)?;
    let rho = psi.partial_trace(&SiteSet::new(&[0], 2)?)?;
    Ok((T::lit(4.0) * rho.matrix().det()?.re).max(T::zero()))
}

/// `4|t00 t11 - t01 t10|²`.
pub fn two_tangle_hyperdet<T: Real>(psi: &PureState<T>) -> Result<T> {
    require_qubits(psi.dims(), 2)?;
    let t = psi.to_normalized();
    let a = t.amps();
    Ok(T::lit(4.0) * (a[0] * a[3] - a[1] * a[2]).norm_sqr())
}

/// Square roots of the eigenvalues of `ρ ρ̃` for a two-qubit density, descending.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WoottersLambdas<T: Real>(pub [T; 4]);

impl<T: Real> WoottersLambdas<T> {
    pub fn concurrence(&self) -> T {
        let [l1, l2, l3, l4] = self.0;
        (l1 - l2 - l3 - l4).max(T::zero())
    }

    pub fn tangle(&self) -> T {
        let c = self.concurrence();
        c * c
    }
}

/// Spin-flip λ's of an `n`-qubit density, descending and padded with zeros to `2^n`.
///
/// With `ρ = W W†` over its support, the nonzero eigenvalues of `ρ ρ̃` are the
/// squared singular values of `τ = W† σ_y^{⊗n} W*`, which is well conditioned
/// even when ρ is rank deficient.
pub fn spinflip_lambdas<T: Real>(rho: &DensityMatrix<T>) -> Result<Vec<T>> {
    let n = rho.num_sites();
    require_qubits(rho.dims(), n)?;
    let spec = hermitian_eig(rho.matrix())?;
    let floor = T::tol(SUPPORT_TOL);
    let cols: Vec<Vec<C<T>>> = spec
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &mu)| mu > floor)
        .map(|(k, &mu)| spec.eigenvector(k).into_iter().map(|z| z * mu.sqrt()).collect())
        .collect();
    let flipped: Vec<Vec<C<T>>> = cols.iter().map(|w| spin_flip(w)).collect();
    let r = cols.len();
    let tau = CMatrix::from_fn(r, r, |k, l| {
        cols[k].iter().zip(&flipped[l]).fold(czero::<T>(), |acc, (a, b)| acc + a.conj() * b)
    });
    let mut lambdas = svd(&tau).s;
    lambdas.resize(rho.matrix().rows(), T::zero());
    Ok(lambdas)
}

/// `(max{0, λ1 - λ2 - ... })²` from descending λ's.
pub fn spinflip_tangle<T: Real>(lambdas: &[T]) -> T {
    let Some((&first, rest)) = lambdas.split_first() else {
        return T::zero();
    };
    let c = (first - rest.iter().copied().sum::<T>()).max(T::zero());
    c * c
}

pub fn wootters_lambdas<T: Real>(rho: &DensityMatrix<T>) -> Result<WoottersLambdas<T>> {
    require_qubits(rho.dims(), 2)?;
    let l = spinflip_lambdas(rho)?;
    Ok(WoottersLambdas([l[0], l[1], l[2], l[3]]))
}

/// Wootters two-tangle (squared concurrence) of a two-qubit density.
pub fn wootters_mixed<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    Ok(wootters_lambdas(rho)?.tangle())
}
