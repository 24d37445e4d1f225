//! Four-qubit invariants: `H`, the `L/M/N` determinants, `Σ`, `Π`, the
//! `D_uv` family and `W`, the degree-24 hyperdeterminant `Δ`, the mixed-state
//! four-tangle and the pure-state Gour identity.
//!
//! Invariants are evaluated on the stored amplitudes as they are, so raw
//! (unnormalized) states give the raw polynomial values.

use crate::error::Result;
use crate::linalg::CMatrix;
use crate::qstate::{DensityMatrix, PureState, SiteSet};
use crate::scalar::{cr, czero, Real, C};
use crate::tangle2::{require_qubits, spin_flip, spinflip_lambdas, spinflip_tangle, two_tangle_pure};

/// All polynomial invariants of one four-qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadInvariants<T: Real> {
    pub h: C<T>,
    pub l: C<T>,
    pub m: C<T>,
    pub n: C<T>,
    pub sigma: C<T>,
    pub pi: C<T>,
    pub d_xy: C<T>,
    pub d_xz: C<T>,
    pub d_xw: C<T>,
    pub w: C<T>,
    pub delta: C<T>,
}

/// `a0a15 - a1a14 - a2a13 + a3a12 - a4a11 + a5a10 + a6a9 - a7a8`.
pub fn h_coeff<T: Real>(psi: &PureState<T>) -> Result<C<T>> {
    require_qubits(psi.dims(), 4)?;
    let a = psi.amps();
    Ok(a[0] * a[15] - a[1] * a[14] - a[2] * a[13] + a[3] * a[12] - a[4] * a[11] + a[5] * a[10] + a[6] * a[9]
        - a[7] * a[8])
}

/// `½ <Ψ*| σ_y^{⊗4} |Ψ>`.
pub fn h_spinflip<T: Real>(psi: &PureState<T>) -> Result<C<T>> {
    require_qubits(psi.dims(), 4)?;
    let conj: Vec<C<T>> = psi.amps().iter().map(|z| z.conj()).collect();
    let flipped = spin_flip(&conj);
    let sum = psi.amps().iter().zip(&flipped).fold(czero::<T>(), |acc, (a, b)| acc + a * b);
    Ok(sum * cr(T::lit(0.5)))
}

fn det4<T: Real>(a: &[C<T>], rows: [[usize; 4]; 4]) -> C<T> {
    CMatrix::from_fn(4, 4, |i, j| a[rows[i][j]]).det().expect("4x4 is square")
}

/// The three 4x4 coefficient determinants `(L, M, N)`.
pub fn lmn<T: Real>(psi: &PureState<T>) -> Result<(C<T>, C<T>, C<T>)> {
    require_qubits(psi.dims(), 4)?;
    let a = psi.amps();
    let l = det4(a, [[0, 4, 8, 12], [1, 5, 9, 13], [2, 6, 10, 14], [3, 7, 11, 15]]);
    let m = det4(a, [[0, 8, 2, 10], [1, 9, 3, 11], [4, 12, 6, 14], [5, 13, 7, 15]]);
    let n = det4(a, [[0, 1, 8, 9], [2, 3, 10, 11], [4, 5, 12, 13], [6, 7, 14, 15]]);
    Ok((l, m, n))
}

/// `B_uv`: the 3x3 coefficient matrix of `det(∂²A/∂p_i∂q_j)` viewed as a
/// biquadratic form in the variables of the kept sites `u, v`, where `p, q`
/// are the complementary sites.
fn b_matrix<T: Real>(a: &[C<T>], u: usize, v: usize) -> CMatrix<T> {
    let rest: Vec<usize> = (0..4).filter(|&s| s != u && s != v).collect();
    let (p, q) = (rest[0], rest[1]);
    let entry = |i: usize, j: usize, x: usize, y: usize| {
        let mut bits = [0usize; 4];
        bits[p] = i;
        bits[q] = j;
        bits[u] = x;
        bits[v] = y;
        a[8 * bits[0] + 4 * bits[1] + 2 * bits[2] + bits[3]]
    };
    let mut b = CMatrix::zeros(3, 3);
    for x in 0..2 {
        for y in 0..2 {
            for x2 in 0..2 {
                for y2 in 0..2 {
                    let term = entry(0, 0, x, y) * entry(1, 1, x2, y2) - entry(0, 1, x, y) * entry(1, 0, x2, y2);
                    b[(x + x2, y + y2)] = b[(x + x2, y + y2)] + term;
                }
            }
        }
    }
    b
}

/// `D_uv = det B_uv` for kept sites `u < v`.
pub fn d_uv<T: Real>(psi: &PureState<T>, u: usize, v: usize) -> Result<C<T>> {
    require_qubits(psi.dims(), 4)?;
    SiteSet::new(&[u, v], 4)?;
    b_matrix(psi.amps(), u, v).det()
}

/// `(D_xy, D_xz, D_xw, W)` with `W = D_xy + D_xz + D_xw`.
pub fn w_invariant<T: Real>(psi: &PureState<T>) -> Result<(C<T>, C<T>, C<T>, C<T>)> {
    let dxy = d_uv(psi, 0, 1)?;
    let dxz = d_uv(psi, 0, 2)?;
    let dxw = d_uv(psi, 0, 3)?;
    Ok((dxy, dxz, dxw, dxy + dxz + dxw))
}

/// `Δ` from `H, Σ, Π, W`.
pub fn hyperdet_from<T: Real>(h: C<T>, sigma: C<T>, pi: C<T>, w: C<T>) -> C<T> {
    let k = |x: f64| cr::<T>(T::lit(x));
    let h2 = h * h;
    let h3 = h2 * h;
    let h4 = h3 * h;
    let h5 = h4 * h;
    let h6 = h5 * h;
    let w2 = w * w;
    let s2 = sigma * sigma;
    let poly = k(4.0) * h6 * pi + k(6.0) * h5 * sigma * w - k(3.0) * h4 * s2 - k(48.0) * h3 * pi * w
        - k(4.0) * h3 * w2 * w
        + k(48.0) * h2 * pi * sigma
        - k(60.0) * h2 * sigma * w2
        + k(96.0) * h * s2 * w
        + k(64.0) * pi * pi
        + k(96.0) * pi * w2
        - k(32.0) * s2 * sigma
        + k(36.0) * w2 * w2;
    -poly / k(108.0)
}

/// Sum of the magnitudes of the terms of the `Δ` polynomial, divided by 108;
/// evaluating `Δ` in floating point loses about `ε` times this much.
pub fn hyperdet_scale<T: Real>(h: C<T>, sigma: C<T>, pi: C<T>, w: C<T>) -> T {
    let (h, s, p, w) = (h.norm().as_f64(), sigma.norm().as_f64(), pi.norm().as_f64(), w.norm().as_f64());
    let terms = [
        4.0 * h.powi(6) * p,
        6.0 * h.powi(5) * s * w,
        3.0 * h.powi(4) * s * s,
        48.0 * h.powi(3) * p * w,
        4.0 * h.powi(3) * w.powi(3),
        48.0 * h * h * p * s,
        60.0 * h * h * s * w * w,
        96.0 * h * s * s * w,
        64.0 * p * p,
        96.0 * p * w * w,
        32.0 * s.powi(3),
        36.0 * w.powi(4),
    ];
    T::lit(terms.iter().sum::<f64>() / 108.0)
}

/// Multiple of `ε · scale` below which a cancelling polynomial counts as zero.
pub const CANCELLATION_FACTOR: f64 = 256.0;

pub fn hyperdet4<T: Real>(psi: &PureState<T>) -> Result<C<T>> {
    Ok(quad_invariants(psi)?.delta)
}

pub fn quad_invariants<T: Real>(psi: &PureState<T>) -> Result<QuadInvariants<T>> {
    let h = h_coeff(psi)?;
    let (l, m, n) = lmn(psi)?;
    let (d_xy, d_xz, d_xw, w) = w_invariant(psi)?;
    let sigma = l * l + m * m + n * n;
    let pi = (l - m) * (m - n) * (n - l);
    let delta = hyperdet_from(h, sigma, pi, w);
    Ok(QuadInvariants { h, l, m, n, sigma, pi, d_xy, d_xz, d_xw, w, delta })
}

impl<T: Real> QuadInvariants<T> {
    /// `(|Σ|^{1/2}, |Π|^{1/3}, |Δ|^{1/6})`. Values within the rounding error of
    /// their cancelling sums are reported as zero, since the roots would
    /// otherwise inflate an error of `1e-24` into `1e-4`.
    pub fn roots(&self) -> [T; 3] {
        let eps = T::lit(f64::EPSILON * CANCELLATION_FACTOR);
        let (l, m, n) = (self.l.norm(), self.m.norm(), self.n.norm());
        let scales = [
            l * l + m * m + n * n,
            (l + m) * (m + n) * (n + l),
            hyperdet_scale(self.h, self.sigma, self.pi, self.w),
        ];
        let values = [self.sigma.norm(), self.pi.norm(), self.delta.norm()];
        let powers = [0.5, 1.0 / 3.0, 1.0 / 6.0];
        let mut out = [T::zero(); 3];
        for k in 0..3 {
            if values[k] > eps * scales[k] {
                out[k] = values[k].powf(T::lit(powers[k]));
            }
        }
        out
    }
}

/// Residuals of the internal relations, each scaled by the largest magnitude involved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationResiduals<T: Real> {
    pub lmn_sum: T,
    pub hl: T,
    pub hm: T,
    pub hn: T,
    pub pairs: T,
    pub l_det: T,
    pub m_det: T,
    pub n_det: T,
}

impl<T: Real> RelationResiduals<T> {
    pub fn max(&self) -> T {
        [self.lmn_sum, self.hl, self.hm, self.hn, self.pairs, self.l_det, self.m_det, self.n_det]
            .into_iter()
            .fold(T::zero(), T::max)
    }
}

fn rel<T: Real>(diff: C<T>, scale: &[C<T>]) -> T {
    let s = scale.iter().map(|z| z.norm()).fold(T::one(), T::max);
    diff.norm() / s
}

/// Checks `L + M + N = 0`, `HL = D_xz - D_xw` (and cyclic), the pair
/// identities `D_xy = D_zw` etc., and `|L|² = det ρ_AB`, `|M|² = det ρ_AC`,
/// `|N|² = det ρ_AD` (the last three on the normalized state).
pub fn relation_residuals<T: Real>(psi: &PureState<T>) -> Result<RelationResiduals<T>> {
    use crate::qstate::PartialTrace;
    let q = quad_invariants(psi)?;
    let (d_zw, d_yw, d_yz) = (d_uv(psi, 2, 3)?, d_uv(psi, 1, 3)?, d_uv(psi, 1, 2)?);
    let pairs = rel(q.d_xy - d_zw, &[q.d_xy, d_zw])
        .max(rel(q.d_xz - d_yw, &[q.d_xz, d_yw]))
        .max(rel(q.d_xw - d_yz, &[q.d_xw, d_yz]));
    let unit = psi.to_normalized();
    let (ln, mn, nn) = lmn(&unit)?;
    let det_of = |keep: [usize; 2]| -> Result<T> {
        Ok(unit.partial_trace(&SiteSet::new(&keep, 4)?)?.matrix().det()?.re)
    };
    Ok(RelationResiduals {
        lmn_sum: rel(q.l + q.m + q.n, &[q.l, q.m, q.n]),
        hl: rel(q.h * q.l - (q.d_xz - q.d_xw), &[q.h * q.l, q.d_xz, q.d_xw]),
        hm: rel(q.h * q.m - (q.d_xw - q.d_xy), &[q.h * q.m, q.d_xw, q.d_xy]),
        hn: rel(q.h * q.n - (q.d_xy - q.d_xz), &[q.h * q.n, q.d_xy, q.d_xz]),
        pairs,
        l_det: (ln.norm_sqr() - det_of([0, 1])?).abs(),
        m_det: (mn.norm_sqr() - det_of([0, 2])?).abs(),
        n_det: (nn.norm_sqr() - det_of([0, 3])?).abs(),
    })
}

/// `(max{0, λ1 - λ2 - ... - λ16})²` from the spin-flipped density.
pub fn four_tangle_mixed<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    require_qubits(rho.dims(), 4)?;
    Ok(spinflip_tangle(&spinflip_lambdas(rho)?))
}

/// `|4|H|² - (Σ_X τ_{X|rest} - Σ τ_{XY|rest})|` with pure-state linear-entropy tangles.
pub fn gour_identity_check<T: Real>(psi: &PureState<T>) -> Result<T> {
    require_qubits(psi.dims(), 4)?;
    let unit = psi.to_normalized();
    let h = h_coeff(&unit)?;
    let mut rhs = T::zero();
    for s in 0..4 {
        rhs = rhs + two_tangle_pure(&unit, &SiteSet::new(&[s], 4)?)?;
    }
    for pair in [[0, 1], [0, 2], [0, 3]] {
        rhs = rhs - two_tangle_pure(&unit, &SiteSet::new(&pair, 4)?)?;
    }
    Ok((T::lit(4.0) * h.norm_sqr() - rhs).abs())
}
