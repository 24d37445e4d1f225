use tangles::linalg::CMatrix;
use tangles::qstate::{DensityMatrix, PartialTrace, SiteSet};
use tangles::sampling::{haar_random_pure_with, random_density, random_unitary, rng_from_seed};
use tangles::separability::{convex_roof, ghz_rigidity_detect, ppt_check, RigidityOutcome, RoofMeasure, RoofOptions};
use tangles::states::{make_named, StateSpec};
use tangles::{Complex64, Density, State};

fn rotated_ghz(dims_each: usize, q: usize, weights: &[f64], seed: u64) -> State {
    let spec = StateSpec::Ghz { sites: q, rank: weights.len(), weights: weights.iter().map(|&w| Complex64::new(w, 0.0)).collect() };
    let mut psi: State = make_named(&spec, true).unwrap();
    let mut rng = rng_from_seed(seed);
    for r in 0..q {
        psi = psi.apply_local(r, &random_unitary(dims_each, &mut rng)).unwrap();
    }
    psi
}

// In the recovered local bases every (q-1)-site reduction is Σ|λ_j|² |j…j><j…j|,
// an explicit mixture of product projectors.
#[test]
fn recovered_forms_have_product_reductions() {
    let cases: [(usize, usize, Vec<f64>); 3] = [
        (2, 4, vec![0.6, 0.8]),
        (3, 3, vec![0.5, 0.5, 0.5f64.sqrt()]),
        (3, 4, vec![0.2, 0.4, 0.8f64.sqrt()]),
    ];
    for (seed, (d, q, weights)) in cases.into_iter().enumerate() {
        let psi = rotated_ghz(d, q, &weights, seed as u64);
        let form = match ghz_rigidity_detect(&psi, 1e-8, 7).unwrap() {
            RigidityOutcome::Ghz(f) => f,
            other => panic!("expected a GHZ form, got {other:?}"),
        };
        for drop in 0..q {
            let keep: Vec<usize> = (0..q).filter(|&s| s != drop).collect();
            let rho = psi.partial_trace(&SiteSet::new(&keep, q).unwrap()).unwrap();
            let back: Vec<CMatrix<f64>> = keep.iter().map(|&s| form.local_unitaries[s].adjoint()).collect();
            let local = rho.conjugate_local(&back).unwrap();
            let diag: usize = (0..q - 1).map(|k| d.pow(k as u32)).sum();
            let mut want = CMatrix::zeros(d.pow(q as u32 - 1), d.pow(q as u32 - 1));
            for (j, w) in form.weights.iter().enumerate() {
                want[(j * diag, j * diag)] = Complex64::new(w.norm_sqr(), 0.0);
            }
            assert!(local.matrix().max_abs_diff(&want) < 1e-8, "site {drop} of case {seed}");
        }
    }
}

// Conversely, rejected Haar states have an entangled reduction, certified by PPT.
#[test]
fn rejected_states_have_an_entangled_reduction() {
    let mut rng = rng_from_seed(99);
    for dims in [vec![2, 2, 2], vec![3, 3, 3], vec![2, 2, 2, 2]] {
        let q = dims.len();
        for _ in 0..5 {
            let psi: State = haar_random_pure_with(&dims, &mut rng).unwrap();
            assert!(matches!(ghz_rigidity_detect(&psi, 1e-8, 1).unwrap(), RigidityOutcome::Absent));
            let keep: Vec<usize> = (0..q - 1).collect();
            let rho = psi.partial_trace(&SiteSet::new(&keep, q).unwrap()).unwrap();
            let npt = (0..q - 1).any(|s| !ppt_check(&rho, &SiteSet::new(&[s], q - 1).unwrap()).unwrap().is_ppt);
            assert!(npt);
        }
    }
}

fn convexity_gap(measure: RoofMeasure, dims: &[usize], seed: u64) -> f64 {
    let mut rng = rng_from_seed(seed);
    let parts: Vec<Density> = (0..2).map(|_| random_density(dims, 1 + (seed as usize % 2), &mut rng).unwrap()).collect();
    let p = 0.3;
    let mixed = DensityMatrix::mixture(&[(p, &parts[0]), (1.0 - p, &parts[1])]).unwrap();
    let opts = RoofOptions { restarts: 8, seed, ..Default::default() };
    let est = |rho: &Density| convex_roof(rho, &measure, &opts).unwrap().value;
    let whole = est(&mixed);
    assert!(whole >= 0.0);
    whole - (p * est(&parts[0]) + (1.0 - p) * est(&parts[1]))
}

#[test]
fn roof_estimates_are_convex_up_to_slack() {
    for seed in 0..6 {
        assert!(convexity_gap(RoofMeasure::TwoTangle, &[2, 2], seed) <= 5e-3, "two-tangle seed {seed}");
    }
    for seed in 0..3 {
        assert!(convexity_gap(RoofMeasure::Phi, &[2, 2, 2], seed) <= 5e-3, "phi seed {seed}");
    }
}
