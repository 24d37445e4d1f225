use proptest::prelude::*;
use tangles::linalg::hermitian_eig;
use tangles::qstate::{schmidt, PartialTrace, SiteSet};
use tangles::replica::{multi_invariant, Permutation, ReplicaSpec};
use tangles::sampling::{haar_random_pure, random_density, random_unitary, rng_from_seed};
use tangles::separability::{convex_roof, RoofMeasure, RoofOptions};
use tangles::tangle2::wootters_mixed;
use tangles::tangle4::{h_coeff, relation_residuals};
use tangles::{Density, State};

fn dims() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..=3, 2..=4)
}

fn cut(q: usize, mask: u32) -> SiteSet {
    let mut sites: Vec<usize> = (0..q).filter(|s| mask >> s & 1 == 1).collect();
    if sites.is_empty() || sites.len() == q {
        sites = vec![0];
    }
    SiteSet::new(&sites, q).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_transpose_keeps_norm_and_trace(d in dims(), rank in 1usize..4, mask in any::<u32>(), seed in any::<u64>()) {
        let rho: Density = random_density(&d, rank, &mut rng_from_seed(seed)).unwrap();
        let s = cut(d.len(), mask);
        let pt = rho.partial_transpose(&s).unwrap();
        let norm = rho.matrix().frobenius_norm();
        prop_assert!((pt.frobenius_norm() - norm).abs() < 1e-12);
        prop_assert!((pt.trace() - rho.matrix().trace()).norm() < 1e-12);
        prop_assert!(pt.hermiticity_defect() < 1e-12);
        let rest = rho.partial_transpose(&s.complement(d.len())).unwrap();
        prop_assert!(pt.max_abs_diff(&rest.transpose()) < 1e-14);
    }

    #[test]
    fn partial_traces_compose(d in dims(), seed in any::<u64>()) {
        let q = d.len();
        let psi: State = haar_random_pure(&d, seed).unwrap();
        let keep: Vec<usize> = (0..q - 1).collect();
        let step = psi.partial_trace(&SiteSet::new(&keep, q).unwrap()).unwrap();
        let twice = step.partial_trace(&SiteSet::new(&[0], q - 1).unwrap()).unwrap();
        let direct = psi.partial_trace(&SiteSet::new(&[0], q).unwrap()).unwrap();
        prop_assert!(twice.matrix().max_abs_diff(direct.matrix()) < 1e-13);
        prop_assert!((step.matrix().trace().re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn schmidt_matches_reduced_spectrum(d in dims(), mask in any::<u32>(), seed in any::<u64>()) {
        let psi: State = haar_random_pure(&d, seed).unwrap();
        let s = cut(d.len(), mask);
        let sch = schmidt(&psi, &s).unwrap();
        let mut spec = hermitian_eig(psi.partial_trace(&s).unwrap().matrix()).unwrap().eigenvalues;
        spec.sort_by(|a, b| b.total_cmp(a));
        for (k, c) in sch.coefficients.iter().enumerate() {
            prop_assert!((c * c - spec[k]).abs() < 1e-12);
        }
        let total: f64 = sch.coefficients.iter().map(|c| c * c).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let m = psi.flatten(&s);
        prop_assert!(sch.reconstruct(m.rows(), m.cols()).max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn replica_invariant_is_gauge_invariant_and_bounded(q in 2usize..=4, seed in any::<u64>(), shift in 0usize..3) {
        let psi: State = haar_random_pure(&vec![2; q], seed).unwrap();
        let perms: Vec<Permutation> = (0..q)
            .map(|k| Permutation::from_image((0..3).map(|x| (x + k) % 3).collect()).unwrap())
            .collect();
        let spec = ReplicaSpec::new(3, perms).unwrap();
        let z = multi_invariant(&psi, &spec).unwrap();
        prop_assert!(z.norm() <= 1.0 + 1e-12);
        let mut omega = Permutation::identity(3);
        for _ in 0..shift {
            omega = omega.compose(&Permutation::cycle(3));
        }
        let moved = multi_invariant(&psi, &spec.left_multiply(&omega).unwrap()).unwrap();
        prop_assert!((moved - z).norm() < 1e-12);
    }

    #[test]
    fn four_qubit_relations_and_local_invariance(seed in any::<u64>(), site in 0usize..4) {
        let psi: State = haar_random_pure(&[2; 4], seed).unwrap();
        prop_assert!(relation_residuals(&psi).unwrap().max() < 1e-10);
        let u = random_unitary(2, &mut rng_from_seed(seed ^ 0x5eed));
        let moved = psi.apply_local(site, &u).unwrap();
        let (a, b) = (h_coeff(&psi).unwrap().norm(), h_coeff(&moved).unwrap().norm());
        prop_assert!((a - b).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn two_qubit_roof_bounds_wootters(rank in 1usize..=3, seed in any::<u64>()) {
        let rho: Density = random_density(&[2, 2], rank, &mut rng_from_seed(seed)).unwrap();
        let opts = RoofOptions { restarts: 2, seed, ..Default::default() };
        let est = convex_roof(&rho, &RoofMeasure::TwoTangle, &opts).unwrap();
        let exact = wootters_mixed(&rho).unwrap();
        prop_assert!(est.value >= 0.0);
        prop_assert!(est.value >= exact - 1e-9);
        prop_assert!(est.best.isometry_defect() < 1e-10);
    }
}
