//! Tripartite measures: third-order negativity `I5`, the three-tangle and
//! `φ_ABC`, each by two routes, plus the five-amplitude canonical form and
//! the closed-form bound objectives over it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{trace_power, CMatrix};
use crate::qstate::{PartialTrace, PureState, SiteSet};
use crate::replica::{multi_invariant, ReplicaSpec};
use crate::sampling::{dirichlet, rng_from_seed};
use crate::scalar::{c, czero, Real};
use crate::tangle2::{require_qubits, wootters_mixed};

const SIMPLEX_TOL: f64 = 1e-12;

/// `Tr[(ρ_BC^Γ)³]` with `A` (site 0) traced out and `C` transposed.
pub fn i5_pt<T: Real>(psi: &PureState<T>) -> Result<T> {
    i5_pt_tracing(psi, 0)
}

/// `I5` computed from the two-site reduction left after tracing out `traced`.
pub fn i5_pt_tracing<T: Real>(psi: &PureState<T>, traced: usize) -> Result<T> {
    psi.require_arity(3)?;
    if traced >= 3 {
        return Err(Error::InvalidSite { site: traced, sites: 3 });
    }
    let keep: Vec<usize> = (0..3).filter(|&s| s != traced).collect();
    let rho = psi.partial_trace(&SiteSet::new(&keep, 3)?)?;
    let pt = rho.partial_transpose(&SiteSet::new(&[1], 2)?)?;
    Ok(trace_power(&pt, 3)?.re)
}

/// `I5` through the replica contraction with `(id, (123), (132))`.
pub fn i5_replica<T: Real>(psi: &PureState<T>) -> Result<T> {
    psi.require_arity(3)?;
    Ok(multi_invariant(psi, &ReplicaSpec::i5())?.re)
}

/// `4|d1 - 2 d2 + 4 d3|` from the coefficient tensor.
pub fn three_tangle<T: Real>(psi: &PureState<T>) -> Result<T> {
    require_qubits(psi.dims(), 3)?;
    let psi = psi.to_normalized();
    let t = |j: usize, k: usize, l: usize| psi.amps()[4 * j + 2 * k + l];
    let d1 = t(0, 0, 0) * t(0, 0, 0) * t(1, 1, 1) * t(1, 1, 1)
        + t(0, 0, 1) * t(0, 0, 1) * t(1, 1, 0) * t(1, 1, 0)
        + t(0, 1, 0) * t(0, 1, 0) * t(1, 0, 1) * t(1, 0, 1)
        + t(1, 0, 0) * t(1, 0, 0) * t(0, 1, 1) * t(0, 1, 1);
    let d2 = t(0, 0, 0) * t(1, 1, 1) * t(0, 1, 1) * t(1, 0, 0)
        + t(0, 0, 0) * t(1, 1, 1) * t(1, 0, 1) * t(0, 1, 0)
        + t(0, 0, 0) * t(1, 1, 1) * t(1, 1, 0) * t(0, 0, 1)
        + t(0, 1, 1) * t(1, 0, 0) * t(1, 0, 1) * t(0, 1, 0)
        + t(0, 1, 1) * t(1, 0, 0) * t(1, 1, 0) * t(0, 0, 1)
        + t(1, 0, 1) * t(0, 1, 0) * t(1, 1, 0) * t(0, 0, 1);
    let d3 = t(0, 0, 0) * t(1, 1, 0) * t(1, 0, 1) * t(0, 1, 1) + t(1, 1, 1) * t(0, 0, 1) * t(0, 1, 0) * t(1, 0, 0);
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    Ok(four * (d1 - d2 * two + d3 * four).norm())
}

/// Residual tangle `τ_{A|BC} - τ_{AB} - τ_{AC}` with Wootters pairwise terms.
pub fn three_tangle_ckw<T: Real>(psi: &PureState<T>) -> Result<T> {
    require_qubits(psi.dims(), 3)?;
    let a = psi.partial_trace(&SiteSet::new(&[0], 3)?)?;
    let tau_a_bc = T::lit(2.0) * (T::one() - a.purity());
    let tau_ab = wootters_mixed(&psi.partial_trace(&SiteSet::new(&[0, 1], 3)?)?)?;
    let tau_ac = wootters_mixed(&psi.partial_trace(&SiteSet::new(&[0, 2], 3)?)?)?;
    Ok(tau_a_bc - tau_ab - tau_ac)
}

/// `69 - Tr[(2ρ_AB + ρ_A⊗I + I⊗ρ_B)³] - 3 Tr ρ_AB²`.
pub fn phi_direct<T: Real>(psi: &PureState<T>) -> Result<T> {
    require_qubits(psi.dims(), 3)?;
    let rho_ab = psi.partial_trace(&SiteSet::new(&[0, 1], 3)?)?;
    let rho_a = rho_ab.partial_trace(&SiteSet::new(&[0], 2)?)?;
    let rho_b = rho_ab.partial_trace(&SiteSet::new(&[1], 2)?)?;
    let id = CMatrix::identity(2);
    let two = c(T::lit(2.0), T::zero());
    let x = &(&rho_ab.matrix().scale(two) + &rho_a.matrix().kron(&id)) + &id.kron(rho_b.matrix());
    Ok(T::lit(69.0) - trace_power(&x, 3)?.re - T::lit(3.0) * rho_ab.purity())
}

/// `12(1 - I5) + 27(τ_AB + τ_AC + τ_BC) + (81/2) τ_ABC`.
pub fn phi_decomposed<T: Real>(psi: &PureState<T>) -> Result<T> {
    require_qubits(psi.dims(), 3)?;
    let i5 = i5_pt(psi)?;
    let mut pairs = T::zero();
    for keep in [[0, 1], [0, 2], [1, 2]] {
        pairs = pairs + wootters_mixed(&psi.partial_trace(&SiteSet::new(&keep, 3)?)?)?;
    }
    let tau3 = three_tangle(psi)?;
    Ok(T::lit(12.0) * (T::one() - i5) + T::lit(27.0) * pairs + T::lit(40.5) * tau3)
}

/// Point `(a, b, c, d, e)` of the probability simplex (squared canonical amplitudes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimplexPoint<T: Real> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    pub e: T,
}

impl<T: Real> SimplexPoint<T> {
    pub fn new(a: T, b: T, c: T, d: T, e: T) -> Result<Self> {
        let p = Self { a, b, c, d, e };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let xs = self.as_array();
        let tol = T::tol(SIMPLEX_TOL);
        if xs.iter().any(|&x| !(x >= -tol)) {
            return Err(Error::Domain(format!("simplex coordinates must be nonnegative: {xs:?}")));
        }
        let sum: T = xs.iter().copied().sum();
        if (sum - T::one()).abs() > tol {
            return Err(Error::Domain(format!("simplex coordinates sum to {sum}, expected 1")));
        }
        Ok(())
    }

    pub fn as_array(&self) -> [T; 5] {
        [self.a, self.b, self.c, self.d, self.e]
    }

    /// `s = c + d`.
    pub fn s(&self) -> T {
        self.c + self.d
    }

    /// `y = √(cd)`.
    pub fn y(&self) -> T {
        (self.c * self.d).max(T::zero()).sqrt()
    }
}

/// Canonical-form parameters `λ_0..λ_4` and phase `φ ∈ [0, π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcinParams<T: Real> {
    pub lambda: [T; 5],
    pub phase: T,
}

impl<T: Real> AcinParams<T> {
    pub fn new(lambda: [T; 5], phase: T) -> Result<Self> {
        if lambda.iter().any(|&l| l < T::zero()) {
            return Err(Error::Domain("canonical amplitudes must be nonnegative".into()));
        }
        let norm: T = lambda.iter().map(|&l| l * l).sum();
        if (norm - T::one()).abs() > T::tol(SIMPLEX_TOL) {
            return Err(Error::Domain(format!("canonical amplitudes have squared norm {norm}")));
        }
        if phase < T::zero() || phase >= T::PI() {
            return Err(Error::Domain(format!("phase {phase} outside [0, π)")));
        }
        Ok(Self { lambda, phase })
    }

    pub fn from_simplex(p: &SimplexPoint<T>, phase: T) -> Result<Self> {
        p.validate()?;
        let lambda = p.as_array().map(|x| x.max(T::zero()).sqrt());
        let norm: T = lambda.iter().map(|&l| l * l).sum::<T>().sqrt();
        Self::new(lambda.map(|l| l / norm), phase)
    }

    pub fn simplex(&self) -> SimplexPoint<T> {
        let [a, b, c, d, e] = self.lambda.map(|l| l * l);
        SimplexPoint { a, b, c, d, e }
    }
}

/// `λ0|000> + λ1 e^{iφ}|100> + λ2|101> + λ3|110> + λ4|111>`.
pub fn acin_state<T: Real>(p: &AcinParams<T>) -> Result<PureState<T>> {
    let mut amps = vec![czero(); 8];
    let [l0, l1, l2, l3, l4] = p.lambda;
    amps[0] = c(l0, T::zero());
    amps[4] = c(l1 * p.phase.cos(), l1 * p.phase.sin());
    amps[5] = c(l2, T::zero());
    amps[6] = c(l3, T::zero());
    amps[7] = c(l4, T::zero());
    PureState::new(&[2, 2, 2], amps, false)
}

/// `I5` of the canonical state as a polynomial in `(a, b, c, d, e)` and `cos φ`.
pub fn i5_closed_form<T: Real>(p: &SimplexPoint<T>, phase: T) -> Result<T> {
    p.validate()?;
    let SimplexPoint { a, b, c, d, e } = *p;
    let three = T::lit(3.0);
    let cubes = a * a * a + b * b * b + c * c * c + d * d * d + e * e * e;
    let pairs = a * a * b + a * b * b + b * b * c + b * c * c + b * b * d + b * d * d + c * c * e + c * e * e + d * d * e + d * e * e;
    let triples = a * b * c + a * b * d + a * c * d + b * c * d + b * c * e + b * d * e + c * d * e;
    let root = (b * c * d * e).max(T::zero()).sqrt();
    Ok(cubes + three * pairs + three * triples + T::lit(6.0) * root * (b + c + d + e) * phase.cos())
}

/// `φ_ABC` of the canonical state (18 times the bracketed polynomial).
pub fn phi_closed_form<T: Real>(p: &SimplexPoint<T>, phase: T) -> Result<T> {
    p.validate()?;
    let SimplexPoint { a, b, c, d, e } = *p;
    let root = (b * c * d * e).max(T::zero()).sqrt();
    let l = |x: f64| T::lit(x);
    let inner = l(11.0) * a * (T::one() - a) - l(11.0) * a * b + l(8.0) * b * e - l(3.0) * a * (c + d)
        + (l(8.0) - l(4.0) * a) * c * d
        - l(4.0) * (l(4.0) - a) * root * phase.cos();
    Ok(l(18.0) * inner)
}

/// Phase-minimized `I5` over the reduced variables `(a, b, s, y)`, `e = 1 - a - b - s`.
pub fn i5_reduced<T: Real>(a: T, b: T, s: T, y: T) -> T {
    let e = (T::one() - a - b - s).max(T::zero());
    let three = T::lit(3.0);
    T::one() + three * (a + b) * (a + b) + three * b * s - three * a - three * b + three * (T::lit(2.0) * a - T::one()) * y * y
        - T::lit(6.0) * (T::one() - a) * (b * e).sqrt() * y
}

/// Phase- and `(c, d)`-maximized `φ_ABC / 18` over `(a, b, s)`, `e = 1 - a - b - s`.
pub fn phi_reduced<T: Real>(a: T, b: T, s: T) -> T {
    let e = (T::one() - a - b - s).max(T::zero());
    let l = |x: f64| T::lit(x);
    l(11.0) * a * (T::one() - a) - l(11.0) * a * b + l(8.0) * b * e - l(3.0) * a * s + (l(2.0) - a) * s * s
        + l(2.0) * (l(4.0) - a) * s * (b * e).sqrt()
}

/// Which closed-form bound an objective belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Minimum of the reduced `I5` objective, expected `2/9`.
    I5Lower,
    /// Maximum of `Φ(a, b, s) = φ_ABC / 18`, expected `11/4`.
    PhiUpper,
}

/// Empirical extremum of one bound objective.
#[derive(Debug, Clone, Serialize)]
pub struct BoundObjective {
    pub objective: BoundKind,
    pub extremum: f64,
    /// Extremal point on the simplex; `c = d` for the `Φ` objective.
    pub argument: SimplexPoint<f64>,
    /// Number of random samples (saturators are added on top).
    pub samples: usize,
    pub seed: u64,
    /// Samples whose exact closed form falls outside the bound by more than `1e-9`.
    pub violations: usize,
    /// Samples where the reduced objective fails to bound the closed form.
    pub reduction_failures: usize,
}

/// Extrema of both bound objectives over flat-Dirichlet samples plus the
/// known saturation points.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub i5: BoundObjective,
    pub phi: BoundObjective,
}

/// Lower bound on `I5` for three-qubit pure states.
pub const I5_LOWER: f64 = 2.0 / 9.0;
/// Upper bound on `Φ = φ_ABC / 18`.
pub const PHI_REDUCED_UPPER: f64 = 11.0 / 4.0;
const BOUND_SLACK: f64 = 1e-9;

struct Candidate {
    point: SimplexPoint<f64>,
    phase: f64,
}

fn sample_candidates(samples: usize, seed: u64) -> Vec<Candidate> {
    use rand::Rng;
    let mut rng = rng_from_seed(seed);
    let third = 1.0 / 3.0;
    let mut out = vec![
        Candidate { point: SimplexPoint { a: third, b: 0.0, c: third, d: third, e: 0.0 }, phase: 0.0 },
        Candidate { point: SimplexPoint { a: 0.5, b: 0.0, c: 0.0, d: 0.0, e: 0.5 }, phase: 0.0 },
    ];
    for _ in 0..samples {
        let x = dirichlet(5, &mut rng);
        let phase = rng.random_range(0.0..std::f64::consts::PI);
        out.push(Candidate { point: SimplexPoint { a: x[0], b: x[1], c: x[2], d: x[3], e: x[4] }, phase });
    }
    out
}

/// Scans `samples` random canonical parameters plus the W- and GHZ-type
/// saturators. Ties are broken by the earlier candidate, so results depend
/// only on `(samples, seed)`.
pub fn verify_bounds(samples: usize, seed: u64) -> Result<BoundReport> {
    if samples == 0 {
        return Err(Error::Domain("at least one sample is required".into()));
    }
    let cands = sample_candidates(samples, seed);
    let mut i5 = BoundObjective {
        objective: BoundKind::I5Lower,
        extremum: f64::INFINITY,
        argument: cands[0].point,
        samples,
        seed,
        violations: 0,
        reduction_failures: 0,
    };
    let mut phi = BoundObjective { objective: BoundKind::PhiUpper, extremum: f64::NEG_INFINITY, ..i5.clone() };
    for cand in &cands {
        let p = cand.point;
        let (s, y) = (p.s(), p.y());
        let exact_i5 = i5_closed_form(&p, cand.phase)?;
        let exact_phi = phi_closed_form(&p, cand.phase)? / 18.0;
        let r_i5 = i5_reduced(p.a, p.b, s, y);
        let r_phi = phi_reduced(p.a, p.b, s);
        if exact_i5 < I5_LOWER - BOUND_SLACK {
            i5.violations += 1;
        }
        if exact_phi > PHI_REDUCED_UPPER + BOUND_SLACK / 18.0 {
            phi.violations += 1;
        }
        if r_i5 > exact_i5 + 1e-12 {
            i5.reduction_failures += 1;
        }
        if r_phi < exact_phi - 1e-12 {
            phi.reduction_failures += 1;
        }
        if r_i5 < i5.extremum {
            i5.extremum = r_i5;
            i5.argument = p;
        }
        if r_phi > phi.extremum {
            phi.extremum = r_phi;
            let half = s / 2.0;
            phi.argument = SimplexPoint { c: half, d: half, ..p };
        }
        if r_i5 < I5_LOWER - BOUND_SLACK {
            i5.violations += 1;
        }
        if r_phi > PHI_REDUCED_UPPER + BOUND_SLACK / 18.0 {
            phi.violations += 1;
        }
    }
    Ok(BoundReport { i5, phi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::make_pure;
    use crate::sampling::haar_random_pure;
    use crate::scalar::cr;

    fn ghz3() -> PureState<f64> {
        let mut a = vec![czero(); 8];
        a[0] = cr(1.0);
        a[7] = cr(1.0);
        make_pure(&[2, 2, 2], a, false).unwrap()
    }

    fn w3() -> PureState<f64> {
        let mut a = vec![czero(); 8];
        a[1] = cr(1.0);
        a[2] = cr(1.0);
        a[4] = cr(1.0);
        make_pure(&[2, 2, 2], a, false).unwrap()
    }

    fn zero3() -> PureState<f64> {
        PureState::basis(&[2, 2, 2], &[0, 0, 0]).unwrap()
    }

    #[test]
    fn i5_named_values() {
        for (psi, want) in [(zero3(), 1.0), (ghz3(), 0.25), (w3(), 2.0 / 9.0)] {
            assert!((i5_pt(&psi).unwrap() - want).abs() < 1e-14);
            assert!((i5_replica(&psi).unwrap() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn three_tangle_named_values() {
        assert!((three_tangle(&ghz3()).unwrap() - 1.0).abs() < 1e-14);
        assert!(three_tangle(&w3()).unwrap().abs() < 1e-15);
        assert!(three_tangle(&zero3()).unwrap().abs() < 1e-15);
        assert!((three_tangle_ckw(&ghz3()).unwrap() - 1.0).abs() < 1e-12);
        assert!(three_tangle_ckw(&w3()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn phi_named_values() {
        for (psi, want) in [(ghz3(), 49.5), (zero3(), 0.0), (w3(), 136.0 / 3.0)] {
            assert!((phi_direct(&psi).unwrap() - want).abs() < 1e-12, "{want}");
            assert!((phi_decomposed(&psi).unwrap() - want).abs() < 1e-12, "{want}");
        }
    }

    #[test]
    fn routes_agree_on_random_states() {
        for seed in 0..50 {
            let psi = haar_random_pure::<f64>(&[2, 2, 2], seed).unwrap();
            let i5 = i5_pt(&psi).unwrap();
            assert!((i5 - i5_replica(&psi).unwrap()).abs() < 1e-12);
            assert!((i5 - i5_pt_tracing(&psi, 1).unwrap()).abs() < 1e-12);
            assert!((i5 - i5_pt_tracing(&psi, 2).unwrap()).abs() < 1e-12);
            assert!((phi_direct(&psi).unwrap() - phi_decomposed(&psi).unwrap()).abs() < 1e-10);
            assert!((three_tangle(&psi).unwrap() - three_tangle_ckw(&psi).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn canonical_form_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let zero = acin_state(&AcinParams::new([1.0, 0.0, 0.0, 0.0, 0.0], 0.0).unwrap()).unwrap();
        assert_eq!(zero.amps()[0], cr(1.0));
        let ghz = acin_state(&AcinParams::new([h, 0.0, 0.0, 0.0, h], 0.0).unwrap()).unwrap();
        assert!(ghz.fidelity_deficit(&ghz3()).abs() < 1e-15);
        let r = (1.0f64 / 3.0).sqrt();
        let w = acin_state(&AcinParams::new([r, 0.0, r, r, 0.0], 0.0).unwrap()).unwrap();
        assert!((i5_pt(&w).unwrap() - 2.0 / 9.0).abs() < 1e-14);
        assert!(AcinParams::new([1.0, 1.0, 0.0, 0.0, 0.0], 0.0).is_err());
        assert!(AcinParams::new([1.0, 0.0, 0.0, 0.0, 0.0], 4.0).is_err());
    }

    #[test]
    fn closed_forms_match_states() {
        let third = 1.0f64 / 3.0;
        let corner = SimplexPoint::new(1.0f64, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert!((i5_closed_form(&corner, 1.3).unwrap() - 1.0).abs() < 1e-15);
        assert!(phi_closed_form(&corner, 0.0).unwrap().abs() < 1e-15);
        let w = SimplexPoint::new(third, 0.0, third, third, 0.0).unwrap();
        assert!((i5_closed_form(&w, 0.0).unwrap() - 2.0 / 9.0).abs() < 1e-15);
        let g = SimplexPoint::new(0.5f64, 0.0, 0.0, 0.0, 0.5).unwrap();
        assert!((phi_closed_form(&g, 0.0).unwrap() - 49.5).abs() < 1e-13);

        let mut rng = rng_from_seed(5);
        for _ in 0..200 {
            use rand::Rng;
            let x = dirichlet(5, &mut rng);
            let phase = rng.random_range(0.0..std::f64::consts::PI);
            let p = SimplexPoint::new(x[0], x[1], x[2], x[3], x[4]).unwrap();
            let psi = acin_state(&AcinParams::from_simplex(&p, phase).unwrap()).unwrap();
            assert!((i5_closed_form(&p, phase).unwrap() - i5_pt(&psi).unwrap()).abs() < 1e-12);
            assert!((phi_closed_form(&p, phase).unwrap() - phi_direct(&psi).unwrap()).abs() < 1e-11);
        }
        assert!(SimplexPoint::new(0.5, 0.6, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn bounds_with_single_sample_hit_saturators() {
        let r = verify_bounds(1, 0).unwrap();
        assert!((r.i5.extremum - I5_LOWER).abs() < 1e-15);
        assert!((r.phi.extremum - PHI_REDUCED_UPPER).abs() < 1e-15);
        assert_eq!(r.i5.violations + r.phi.violations, 0);
        assert!(verify_bounds(0, 0).is_err());
    }

    #[test]
    fn qudit_i5_below_purity() {
        for seed in 0..10 {
            let psi = haar_random_pure::<f64>(&[3, 3, 3], seed).unwrap();
            let purity = psi.partial_trace(&SiteSet::new(&[1, 2], 3).unwrap()).unwrap().purity();
            let i5 = i5_pt(&psi).unwrap();
            assert!(i5 <= purity + 1e-10 && purity <= 1.0 + 1e-12);
        }
    }
}
