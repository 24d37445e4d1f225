//! Verification suites: route equivalences, closed-form bounds, the
//! four-qubit family table, the propositions, and named-state reproduction.
//! Each suite returns a JSON-serializable report of per-check residuals.

use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::cft::{self, CftConfig};
use crate::error::{Error, Result};
use crate::qstate::{PartialTrace, PureState, SiteSet};
use crate::replica::{flattening_minor_defect, product_criterion, ReplicaSpec};
use crate::report::{measure_set_18_with, Provenance};
use crate::sampling::{haar_random_pure_with, random_density, random_unitary, rng_stream, SeededRng};
use crate::separability::{
    convex_roof, five_conditions_scan_with, Evidence, ghz_rigidity_detect, RigidityOutcome, RoofMeasure, RoofOptions, ScanOptions,
};
use crate::states::{make_named, StateSpec};
use crate::tangle2::{two_tangle_det, two_tangle_hyperdet, two_tangle_pure, wootters_mixed};
use crate::tangle3::{
    i5_pt, i5_pt_tracing, i5_replica, phi_decomposed, phi_direct, three_tangle, three_tangle_ckw, verify_bounds, BoundReport,
    SimplexPoint, I5_LOWER, PHI_REDUCED_UPPER,
};
use crate::tangle4::{four_tangle_mixed, gour_identity_check, h_coeff, h_spinflip, quad_invariants, relation_residuals};
use crate::{Complex64, State};

/// A verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Identities,
    Bounds,
    Table2,
    Propositions,
    Gour,
    Wootters,
    Named,
    Cft,
    All,
}

impl Suite {
    pub const EACH: [Suite; 8] = [
        Suite::Identities,
        Suite::Bounds,
        Suite::Table2,
        Suite::Propositions,
        Suite::Gour,
        Suite::Wootters,
        Suite::Named,
        Suite::Cft,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Bounds => "bounds",
            Suite::Table2 => "table2",
            Suite::Propositions => "propositions",
            Suite::Gour => "gour",
            Suite::Wootters => "wootters",
            Suite::Named => "named",
            Suite::Cft => "cft",
            Suite::All => "all",
        }
    }

    /// Sample count used when none is given.
    pub fn default_samples(self) -> usize {
        match self {
            Suite::Bounds => 100_000,
            Suite::Table2 => 20,
            Suite::Wootters => 100,
            Suite::Named | Suite::Cft => 0,
            _ => 1000,
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyOptions {
    /// Overrides the suite's default sample count.
    pub samples: Option<usize>,
    pub seed: u64,
    /// Replaces the tolerance of every residual (`at_most`) check.
    pub tol: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { samples: None, seed: 0xC0FFEE, tol: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Every observation must be at most the tolerance; `worst` is the maximum.
    AtMost,
    /// Every observation must be at least the tolerance; `worst` is the minimum.
    AtLeast,
}

/// One named check aggregated over many observations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub relation: Relation,
    pub tolerance: f64,
    pub worst: f64,
    pub count: usize,
    pub failures: usize,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, relation: Relation, tolerance: f64) -> Self {
        let worst = match relation {
            Relation::AtMost => 0.0,
            Relation::AtLeast => f64::INFINITY,
        };
        Self { name: name.into(), relation, tolerance, worst, count: 0, failures: 0, passed: false }
    }

    fn observe(&mut self, x: f64) {
        self.count += 1;
        let ok = match self.relation {
            Relation::AtMost => {
                self.worst = if x.is_nan() { f64::NAN } else { self.worst.max(x) };
                x <= self.tolerance
            }
            Relation::AtLeast => {
                self.worst = if x.is_nan() { f64::NAN } else { self.worst.min(x) };
                x >= self.tolerance
            }
        };
        if !ok {
            self.failures += 1;
        }
        self.passed = self.failures == 0;
    }

    fn observe_all(mut self, xs: impl IntoIterator<Item = f64>) -> Self {
        for x in xs {
            self.observe(x);
        }
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub samples: usize,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundReport>,
}

impl SuiteReport {
    fn new(suite: Suite, samples: usize, seed: u64, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self { suite, samples, seed, passed, checks, bounds: None }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            out.push_str(&format!("[{}] {} (samples {}, seed {})\n", verdict(s.passed), s.suite.name(), s.samples, s.seed));
            for c in &s.checks {
                let rel = match c.relation {
                    Relation::AtMost => "<=",
                    Relation::AtLeast => ">=",
                };
                out.push_str(&format!(
                    "  [{}] {:<34} worst {:>12.4e} {rel} {:.1e}  ({} obs, {} failed)\n",
                    verdict(c.passed),
                    c.name,
                    c.worst,
                    c.tolerance,
                    c.count,
                    c.failures
                ));
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("suite,check,relation,tolerance,worst,count,failures,passed\n");
        for s in &self.suites {
            for c in &s.checks {
                let rel = match c.relation {
                    Relation::AtMost => "at_most",
                    Relation::AtLeast => "at_least",
                };
                out.push_str(&format!(
                    "{},{},{rel},{:e},{:e},{},{},{}\n",
                    s.suite.name(),
                    c.name,
                    c.tolerance,
                    c.worst,
                    c.count,
                    c.failures,
                    c.passed
                ));
            }
        }
        out
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Runs `suite` (every suite for [`Suite::All`]).
pub fn run(suite: Suite, opts: &VerifyOptions) -> Result<VerifyReport> {
    let list: Vec<Suite> = if suite == Suite::All { Suite::EACH.to_vec() } else { vec![suite] };
    let suites = list.into_iter().map(|s| run_one(s, opts)).collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport { passed: suites.iter().all(|s| s.passed), suites })
}

pub fn run_one(suite: Suite, opts: &VerifyOptions) -> Result<SuiteReport> {
    let n = opts.samples.unwrap_or(suite.default_samples());
    let ctx = Ctx { tol: opts.tol };
    let seed = opts.seed;
    match suite {
        Suite::Identities => identities(&ctx, n, seed),
        Suite::Bounds => bounds(&ctx, n, seed),
        Suite::Table2 => table2(&ctx, n, seed),
        Suite::Propositions => propositions(&ctx, n, seed),
        Suite::Gour => gour(&ctx, n, seed),
        Suite::Wootters => wootters(&ctx, n, seed),
        Suite::Named => named(&ctx, seed),
        Suite::Cft => cft_suite(&ctx),
        Suite::All => Err(Error::Domain("run_one takes a single suite".into())),
    }
}

struct Ctx {
    tol: Option<f64>,
}

impl Ctx {
    fn at_most(&self, name: &str, default: f64) -> Check {
        Check::new(name, Relation::AtMost, self.tol.unwrap_or(default))
    }

    fn at_least(&self, name: &str, bound: f64) -> Check {
        Check::new(name, Relation::AtLeast, bound)
    }
}

/// Per-sample results computed in parallel; order (and hence every
/// aggregate) is independent of scheduling.
fn per_sample<R: Send>(n: usize, seed: u64, f: impl Fn(&mut SeededRng) -> Result<R> + Sync) -> Result<Vec<R>> {
    (0..n).into_par_iter().map(|k| f(&mut rng_stream(seed, k as u64))).collect()
}

fn diff(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm()
}

fn identities(ctx: &Ctx, n: usize, seed: u64) -> Result<SuiteReport> {
    let two = per_sample(n, seed, |rng| {
        let psi: State = haar_random_pure_with(&[2, 2], rng)?;
        let cut = SiteSet::new(&[0], 2)?;
        let base = two_tangle_pure(&psi, &cut)?;
        let others = [two_tangle_det(&psi)?, two_tangle_hyperdet(&psi)?, wootters_mixed(&psi.to_density())?];
        Ok(others.iter().map(|x| (x - base).abs()).fold(0.0, f64::max))
    })?;
    let three = per_sample(n, seed ^ 0x3, |rng| {
        let psi: State = haar_random_pure_with(&[2, 2, 2], rng)?;
        let i5 = i5_pt(&psi)?;
        let traced = (0..3).map(|t| Ok((i5_pt_tracing(&psi, t)? - i5).abs())).collect::<Result<Vec<_>>>()?;
        Ok([
            (i5 - i5_replica(&psi)?).abs(),
            traced.into_iter().fold(0.0, f64::max),
            (phi_direct(&psi)? - phi_decomposed(&psi)?).abs(),
            (three_tangle(&psi)? - three_tangle_ckw(&psi)?).abs(),
        ])
    })?;
    let qutrit = per_sample(n, seed ^ 0x33, |rng| {
        let dims = if rng_flip(rng) { [3, 3, 3] } else { [2, 3, 2] };
        let psi: State = haar_random_pure_with(&dims, rng)?;
        Ok((i5_pt(&psi)? - i5_replica(&psi)?).abs())
    })?;
    let four = per_sample(n, seed ^ 0x4, |rng| {
        let psi: State = haar_random_pure_with(&[2, 2, 2, 2], rng)?;
        let h = h_coeff(&psi)?;
        Ok([
            diff(h, h_spinflip(&psi)?),
            relation_residuals(&psi)?.max(),
            (four_tangle_mixed(&psi.to_density())? - 4.0 * h.norm_sqr()).abs(),
        ])
    })?;
    let col = |v: &[[f64; 4]], k: usize| v.iter().map(|r| r[k]).collect::<Vec<_>>();
    let col3 = |v: &[[f64; 3]], k: usize| v.iter().map(|r| r[k]).collect::<Vec<_>>();
    let checks = vec![
        ctx.at_most("two_tangle_routes", 1e-10).observe_all(two),
        ctx.at_most("i5_pt_vs_replica_qubits", 1e-10).observe_all(col(&three, 0)),
        ctx.at_most("i5_pt_vs_replica_qudits", 1e-10).observe_all(qutrit),
        ctx.at_most("i5_traced_site_choice", 1e-10).observe_all(col(&three, 1)),
        ctx.at_most("phi_direct_vs_decomposed", 1e-8).observe_all(col(&three, 2)),
        ctx.at_most("three_tangle_vs_ckw", 1e-8).observe_all(col(&three, 3)),
        ctx.at_most("h_coeff_vs_spinflip", 1e-12).observe_all(col3(&four, 0)),
        ctx.at_most("quad_relations", 1e-10).observe_all(col3(&four, 1)),
        ctx.at_most("four_tangle_mixed_vs_pure", 1e-8).observe_all(col3(&four, 2)),
    ];
    Ok(SuiteReport::new(Suite::Identities, n, seed, checks))
}

fn rng_flip(rng: &mut SeededRng) -> bool {
    use rand::Rng;
    rng.random_bool(0.5)
}

fn bounds(ctx: &Ctx, n: usize, seed: u64) -> Result<SuiteReport> {
    let rep = verify_bounds(n, seed)?;
    let dist = |p: &SimplexPoint<f64>, q: [f64; 5]| p.as_array().iter().zip(q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let third = 1.0 / 3.0;
    let ghz3: State = make_named(&StateSpec::parse("ghz", "q=3")?, true)?;
    let w3: State = make_named(&StateSpec::W3, true)?;
    let checks = vec![
        ctx.at_most("i5_minimum", 1e-9).observe_all([(rep.i5.extremum - I5_LOWER).abs()]),
        ctx.at_most("i5_minimizer", 1e-9).observe_all([dist(&rep.i5.argument, [third, 0.0, third, third, 0.0])]),
        ctx.at_most("i5_violations", 0.0).observe_all([rep.i5.violations as f64]),
        ctx.at_most("i5_reduction_failures", 0.0).observe_all([rep.i5.reduction_failures as f64]),
        ctx.at_most("phi_maximum", 1e-9).observe_all([(rep.phi.extremum - PHI_REDUCED_UPPER).abs()]),
        ctx.at_most("phi_maximizer", 1e-9).observe_all([dist(&rep.phi.argument, [0.5, 0.0, 0.0, 0.0, 0.5])]),
        ctx.at_most("phi_violations", 0.0).observe_all([rep.phi.violations as f64]),
        ctx.at_most("phi_reduction_failures", 0.0).observe_all([rep.phi.reduction_failures as f64]),
        ctx.at_most("ghz3_phi", 1e-12).observe_all([(phi_direct(&ghz3)? - 99.0 / 2.0).abs()]),
        ctx.at_most("w3_i5", 1e-12).observe_all([(i5_pt(&w3)? - 2.0 / 9.0).abs()]),
    ];
    let mut out = SuiteReport::new(Suite::Bounds, n, seed, checks);
    out.bounds = Some(rep);
    Ok(out)
}

fn vandermonde(x: [Complex64; 4]) -> Complex64 {
    let mut v = Complex64::new(1.0, 0.0);
    for i in 0..4 {
        for j in i + 1..4 {
            v *= (x[i] - x[j]) * (x[i] - x[j]);
        }
    }
    v
}

/// Expected `(H, L, M, D_xw, Δ)` of a family representative in raw mode.
pub fn table2_row(spec: &StateSpec) -> Result<[Complex64; 5]> {
    let z = Complex64::new(0.0, 0.0);
    let half = 0.5;
    let sq = |x: Complex64| x * x;
    Ok(match *spec {
        StateSpec::G1 { a, b, c, d } => [
            (sq(a) + sq(b) + sq(c) + sq(d)) * half,
            a * b * c * d,
            (sq((c - d) * half) - sq((a - b) * half)) * (sq((a + b) * half) - sq((c + d) * half)),
            (a * d - b * c) * (b * d - a * c) * (a * b - c * d) * 0.25,
            vandermonde([sq(a), sq(b), sq(c), sq(d)]) / 256.0,
        ],
        StateSpec::G2 { a, b, c } => [
            (sq(a) + sq(b) + 2.0 * sq(c)) * half,
            a * b * sq(c),
            (sq(c) - sq((a + b) * half)) * sq((a - b) * half),
            sq(c) * sq(a - b) * (sq(c) - a * b) * 0.25,
            z,
        ],
        StateSpec::G3 { a, b } => [sq(a) + sq(b), sq(a) * sq(b), z, z, z],
        StateSpec::G4 { a, b } => [
            (3.0 * sq(a) + sq(b)) * half,
            a * a * a * b,
            (sq(a) - sq((a + b) * half)) * sq((a - b) * half),
            a * a * a * (a - b) * (a - b) * (a - b) * 0.25,
            z,
        ],
        StateSpec::G5 { a } => [2.0 * sq(a), sq(sq(a)), z, z, z],
        StateSpec::G6 { a } => [sq(a), z, z, z, z],
        StateSpec::G7 | StateSpec::G8 | StateSpec::G9 => [z; 5],
        _ => return Err(Error::Domain("not one of the nine four-qubit families".into())),
    })
}

fn random_family(k: usize, rng: &mut SeededRng) -> StateSpec {
    use rand::Rng;
    let mut p = || Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
    match k {
        0 => StateSpec::G1 { a: p(), b: p(), c: p(), d: p() },
        1 => StateSpec::G2 { a: p(), b: p(), c: p() },
        2 => StateSpec::G3 { a: p(), b: p() },
        3 => StateSpec::G4 { a: p(), b: p() },
        4 => StateSpec::G5 { a: p() },
        5 => StateSpec::G6 { a: p() },
        6 => StateSpec::G7,
        7 => StateSpec::G8,
        _ => StateSpec::G9,
    }
}

/// Largest of `|got - want| / max(|want|, ‖t‖^deg)` over the five columns.
pub fn table2_residual(spec: &StateSpec) -> Result<f64> {
    let psi: State = make_named(spec, false)?;
    let q = quad_invariants(&psi)?;
    let want = table2_row(spec)?;
    let got = [q.h, q.l, q.m, q.d_xw, q.delta];
    let norm = psi.amps().iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let degree = [2, 4, 4, 6, 24];
    Ok((0..5)
        .map(|k| diff(got[k], want[k]) / want[k].norm().max(norm.powi(degree[k])).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max))
}

fn table2(ctx: &Ctx, n: usize, seed: u64) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for k in 0..9 {
        let res = per_sample(n, seed ^ (k as u64 + 1) << 8, |rng| table2_residual(&random_family(k, rng)))?;
        checks.push(ctx.at_most(&format!("g{}", k + 1), 1e-8).observe_all(res));
    }
    Ok(SuiteReport::new(Suite::Table2, n, seed, checks))
}

fn gour(ctx: &Ctx, n: usize, seed: u64) -> Result<SuiteReport> {
    let res = per_sample(n, seed, |rng| gour_identity_check(&haar_random_pure_with::<f64, _>(&[2, 2, 2, 2], rng)?))?;
    let named = [StateSpec::parse("ghz", "")?, StateSpec::W4, StateSpec::Cluster, StateSpec::Dicke42]
        .iter()
        .map(|s| gour_identity_check(&make_named::<f64>(s, true)?))
        .collect::<Result<Vec<_>>>()?;
    let checks =
        vec![ctx.at_most("haar_residual", 1e-8).observe_all(res), ctx.at_most("named_residual", 1e-12).observe_all(named)];
    Ok(SuiteReport::new(Suite::Gour, n, seed, checks))
}

fn wootters(ctx: &Ctx, n: usize, seed: u64) -> Result<SuiteReport> {
    let opts = RoofOptions { seed, ..RoofOptions::default() };
    let rows = per_sample(n, seed, |rng| {
        let rho = random_density::<f64, _>(&[2, 2], 2, rng)?;
        let exact = wootters_mixed(&rho)?;
        let est = convex_roof(&rho, &RoofMeasure::TwoTangle, &opts)?;
        Ok([
            est.value - exact,
            exact - est.value,
            est.best.reconstruct().max_abs_diff(rho.matrix()),
            est.best.isometry_defect(),
        ])
    })?;
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<_>>();
    let checks = vec![
        ctx.at_most("roof_above_closed_form", 2e-3).observe_all(col(0)),
        ctx.at_most("roof_below_closed_form", 1e-9).observe_all(col(1)),
        ctx.at_most("decomposition_reconstruction", 1e-8).observe_all(col(2)),
        ctx.at_most("isometry_defect", 1e-10).observe_all(col(3)),
    ];
    Ok(SuiteReport::new(Suite::Wootters, n, seed, checks))
}

/// Expected report values and `(H, Σ, Π, W, Δ)` for one named state.
struct NamedCase {
    label: &'static str,
    spec: StateSpec,
    values: Vec<(&'static str, f64)>,
    invariants: [Complex64; 5],
}

fn named_cases() -> Result<Vec<NamedCase>> {
    let r = |x: f64| Complex64::new(x, 0.0);
    let z = r(0.0);
    let taus = ["tau_AB", "tau_AC", "tau_AD", "tau_BC", "tau_BD", "tau_CD"];
    let tau3 = ["tau_ABC", "tau_ABD", "tau_ACD", "tau_BCD"];
    let phis = ["phi_ABC", "phi_ABD", "phi_ACD", "phi_BCD"];
    let all = |tau: [f64; 6], phi: f64, four: [f64; 4]| {
        let mut v: Vec<(&'static str, f64)> = taus.iter().copied().zip(tau).collect();
        v.extend(tau3.iter().map(|k| (*k, 0.0)));
        v.extend(phis.iter().map(|k| (*k, phi)));
        v.extend(["fourtangle", "sigma_root", "pi_root", "delta_root"].into_iter().zip(four));
        v
    };
    let s7 = 2f64.powf(-3.5);
    let p11 = 2f64.powf(-11.0 / 3.0);
    Ok(vec![
        NamedCase {
            label: "ghz4",
            spec: StateSpec::parse("ghz", "")?,
            values: all([0.0; 6], 0.0, [1.0, 0.0, 0.0, 0.0]),
            invariants: [r(0.5), z, z, z, z],
        },
        NamedCase {
            label: "w4",
            spec: StateSpec::W4,
            values: all([0.25; 6], 207.0 / 8.0, [0.0; 4]),
            invariants: [z; 5],
        },
        NamedCase {
            label: "cluster",
            spec: StateSpec::Cluster,
            values: all([0.0; 6], 36.0, [0.0, s7, p11, 0.0]),
            invariants: [z, r(2f64.powi(-7)), r(2f64.powi(-11)), z, z],
        },
        NamedCase {
            label: "dicke42",
            spec: StateSpec::Dicke42,
            values: all([1.0 / 9.0; 6], 173.0 / 6.0, [1.0, 0.0, 0.0, 0.0]),
            invariants: [r(0.5), z, z, r(1.0 / 72.0), z],
        },
        NamedCase {
            label: "double_bell",
            spec: StateSpec::parse("double_bell", "")?,
            // a = b = c = d = 1/√2: τ_AB = 4|ab|², φ = 144|ab|², H = 2abcd
            values: all([1.0, 0.0, 0.0, 0.0, 0.0, 1.0], 36.0, [1.0, s7, p11, 0.0]),
            invariants: [r(0.5), r(2.0 / 256.0), r(-2.0 / 4096.0), r(2.0 / 64.0), z],
        },
    ])
}

fn named(ctx: &Ctx, seed: u64) -> Result<SuiteReport> {
    let opts = RoofOptions { seed, ..RoofOptions::default() };
    let mut checks = Vec::new();
    for case in named_cases()? {
        let psi: State = make_named(&case.spec, true)?;
        let rep = measure_set_18_with(&psi, &opts)?;
        let mut closed = ctx.at_most(&format!("{}.closed_form", case.label), 1e-10);
        let mut optim = ctx.at_most(&format!("{}.optimizer", case.label), 1e-4);
        for (key, want) in &case.values {
            let entry = rep.entries.get(*key).ok_or_else(|| Error::Domain(format!("missing entry {key}")))?;
            match entry.provenance {
                Provenance::ClosedForm => closed.observe((entry.value - want).abs()),
                Provenance::Optimizer => optim.observe((entry.value - want).abs()),
            }
        }
        let q = quad_invariants(&psi)?;
        let got = [q.h, q.sigma, q.pi, q.w, q.delta];
        let mut inv = ctx.at_most(&format!("{}.invariants", case.label), 1e-10);
        for (g, w) in got.iter().zip(case.invariants) {
            inv.observe(diff(*g, w));
        }
        let mut count = ctx.at_most(&format!("{}.entry_count", case.label), 0.0);
        count.observe((rep.len() as f64 - 18.0).abs());
        checks.extend([closed, optim, inv, count]);
    }
    Ok(SuiteReport::new(Suite::Named, 0, seed, checks))
}

fn cft_suite(ctx: &Ctx) -> Result<SuiteReport> {
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    let mut ope = ctx.at_most("ope_equal_dimensions", 1e-12);
    for c in [1.0, 12.0, 100.0] {
        let d = cft::twist_dimension(c)?;
        ope.observe(rel(cft::ope_coeff_log(d, d, d)?, c / 3.0 * 0.75f64.ln()));
    }
    let mut trans = ctx.at_most("translation_invariance", 0.0);
    let mut dil = ctx.at_most("dilation_covariance", 1e-12);
    let mut cut = ctx.at_most("cutoff_covariance", 1e-12);
    let mut cyc = ctx.at_most("cyclic_relabeling", 1e-12);
    let mut asm = ctx.at_most("three_point_assembly", 1e-12);
    for (c, z, eps) in [(1.0f64, [0.0f64, 1.0, 2.0], 1.0f64), (12.0, [-1.5, 0.25, 3.0], 0.125), (100.0, [0.5, 2.75, 6.0], 0.01)] {
        let cfg = CftConfig::new(c, z, eps)?;
        let base = cft::ln_tr_neg3(&cfg)?;
        for shift in [1.0f64, -0.5, 1024.0] {
            let moved = CftConfig { z: z.map(|x| x + shift), ..cfg };
            trans.observe((cft::ln_tr_neg3(&moved)? - base).abs());
        }
        for k in [2.0f64, 0.1, 7.5] {
            let scaled = CftConfig { z: z.map(|x| x * k), ..cfg };
            dil.observe(rel(cft::ln_tr_neg3(&scaled)? - base, -2.0 * c / 3.0 * f64::ln(k)));
            let finer = CftConfig { eps: eps / k, ..cfg };
            cut.observe(rel(cft::ln_tr_neg3(&finer)? - base, -2.0 * c / 3.0 * f64::ln(k)));
        }
        let rotated = CftConfig { z: [z[1], z[2], z[0]], ..cfg };
        cyc.observe(rel(cft::ln_tr_neg3(&rotated)?, base));
        let d = cft::twist_dimension(c)?;
        asm.observe(rel(cft::three_point_log(&cfg, [d; 3], cft::ope_coeff_log(d, d, d)?)?, base));
    }
    Ok(SuiteReport::new(Suite::Cft, 0, 0, vec![ope, trans, dil, cut, cyc, asm]))
}

/// Replica spec used for the product test on `q` sites: pairwise-distinct
/// permutations on the fewest replicas that allow them.
pub fn product_spec(q: usize) -> Result<ReplicaSpec> {
    match q {
        2 => ReplicaSpec::parse("id;(12)"),
        3 => Ok(ReplicaSpec::i5()),
        4 => ReplicaSpec::parse("id;(12);(13);(23)"),
        5 => ReplicaSpec::parse("id;(12);(13);(23);(123)"),
        _ => Err(Error::Domain(format!("no default product spec for {q} sites"))),
    }
}

const PRODUCT_DIMS: [&[usize]; 5] = [&[2, 2, 2], &[3, 3, 3], &[2, 2, 2, 2], &[2, 3, 2], &[3, 2]];

fn random_product(dims: &[usize], rng: &mut SeededRng) -> Result<State> {
    let factors = dims
        .iter()
        .map(|&d| Ok(haar_random_pure_with::<f64, _>(&[d], rng)?.amps().to_vec()))
        .collect::<Result<Vec<_>>>()?;
    PureState::product(&factors)
}

fn locally_rotated(psi: &State, rng: &mut SeededRng) -> Result<State> {
    let mut out = psi.clone();
    for (r, &d) in psi.dims().iter().enumerate() {
        out = out.apply_local(r, &random_unitary(d, rng))?;
    }
    Ok(out)
}

fn random_weights(r: usize, rng: &mut SeededRng) -> Result<Vec<Complex64>> {
    Ok(haar_random_pure_with::<f64, _>(&[r], rng)?.amps().to_vec())
}

/// Structured four-qubit trial states for the five-conditions scan: locally
/// rotated GHZ, W, cluster, Dicke, double-Bell and product states, and
/// two-branch states `|000>|d0> + |111>|d1>` that satisfy (i)-(iv) when
/// `<d0|d1> ≠ 0`, with sites shuffled.
pub fn structured_trial(kind: usize, rng: &mut SeededRng) -> Result<State> {
    use rand::seq::SliceRandom;
    let base: State = match kind % 8 {
        0 => make_named(&StateSpec::Ghz { sites: 4, rank: 2, weights: random_weights(2, rng)? }, true)?,
        1 => make_named(&StateSpec::W4, true)?,
        2 => make_named(&StateSpec::Cluster, true)?,
        3 => make_named(&StateSpec::Dicke42, true)?,
        4 => {
            let ab = random_weights(2, rng)?;
            let cd = random_weights(2, rng)?;
            make_named(&StateSpec::DoubleBell { a: ab[0], b: ab[1], c: cd[0], d: cd[1] }, true)?
        }
        5 => random_product(&[2, 2, 2, 2], rng)?,
        k => {
            let w = random_weights(2, rng)?;
            let d0 = random_weights(2, rng)?;
            let d1 = if k == 6 { random_weights(2, rng)? } else { d0.clone() };
            let mut amps = vec![Complex64::new(0.0, 0.0); 16];
            for x in 0..2 {
                amps[x] += w[0] * d0[x];
                amps[14 + x] += w[1] * d1[x];
            }
            PureState::new(&[2, 2, 2, 2], amps, false)?
        }
    };
    let mut order = [0, 1, 2, 3];
    order.shuffle(rng);
    locally_rotated(&base.permute_sites(&order)?, rng)
}

/// Trials per structured state in the five-conditions scan.
pub const STRUCTURED_EVERY: usize = 25;

fn propositions(ctx: &Ctx, n: usize, seed: u64) -> Result<SuiteReport> {
    let flat_tol = 1e-9;
    let product = per_sample(n, seed, |rng| {
        let dims = PRODUCT_DIMS[rng_index(rng, PRODUCT_DIMS.len())];
        let psi = random_product(dims, rng)?;
        let v = product_criterion(&psi, &product_spec(dims.len())?, 1e-9)?;
        Ok((v.deficit, (v.is_product != (flattening_minor_defect(&psi) < flat_tol)) as u8 as f64))
    })?;
    let entangled = per_sample(n, seed ^ 0xE, |rng| {
        let dims = PRODUCT_DIMS[rng_index(rng, PRODUCT_DIMS.len())];
        let psi: State = haar_random_pure_with(dims, rng)?;
        let v = product_criterion(&psi, &product_spec(dims.len())?, 1e-9)?;
        Ok((v.deficit, (v.is_product != (flattening_minor_defect(&psi) < flat_tol)) as u8 as f64))
    })?;
    let m = n.div_ceil(10);
    let ghz = per_sample(m, seed ^ 0x6, |rng| {
        let (q, r) = if rng_flip(rng) { (4, 2) } else { (3, 3) };
        let weights = random_weights(r, rng)?;
        let psi = locally_rotated(&make_named(&StateSpec::Ghz { sites: q, rank: r, weights: weights.clone() }, true)?, rng)?;
        let out = ghz_rigidity_detect(&psi, 1e-8, seed)?;
        Ok(match out.form() {
            Some(f) if f.rank == r => {
                let mut got: Vec<f64> = f.weights.iter().map(|w| w.norm()).collect();
                let mut want: Vec<f64> = weights.iter().map(|w| w.norm()).collect();
                got.sort_by(f64::total_cmp);
                want.sort_by(f64::total_cmp);
                let werr = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                (0.0, f.fidelity_deficit, werr)
            }
            _ => (1.0, f64::NAN, f64::NAN),
        })
    })?;
    let haar_rigidity = per_sample(m, seed ^ 0x66, |rng| {
        let dims: &[usize] = if rng_flip(rng) { &[2, 2, 2, 2] } else { &[3, 3, 3] };
        let psi: State = haar_random_pure_with(dims, rng)?;
        Ok(match ghz_rigidity_detect(&psi, 1e-8, seed)? {
            RigidityOutcome::Absent => 0.0,
            _ => 1.0,
        })
    })?;
    let trials = 10 * n;
    let scan_opts = ScanOptions { roof: RoofOptions { seed, ..ScanOptions::default().roof }, ..ScanOptions::default() };
    let scans = per_sample(trials, seed ^ 0x5, |rng| {
        let psi = if rng_index(rng, STRUCTURED_EVERY) == 0 {
            let kind = rng_index(rng, 8);
            structured_trial(kind, rng)?
        } else {
            haar_random_pure_with(&[2, 2, 2, 2], rng)?
        };
        let rep = five_conditions_scan_with(&psi, &scan_opts)?;
        let estimated = rep.conditions.iter().any(|c| c.evidence == Evidence::Estimate);
        Ok((rep.all_hold as u8 as f64, estimated as usize))
    })?;
    let sanity = {
        let full = ScanOptions { short_circuit: false, ..scan_opts };
        let ghz = five_conditions_scan_with(&make_named::<f64>(&StateSpec::parse("ghz", "")?, true)?, &full)?;
        let c = ghz.conditions;
        let ok = c[0].holds && c[1].holds && c[2].holds && !c[3].holds;
        let near = structured_trial(6, &mut rng_stream(seed, u64::MAX))?;
        let r = five_conditions_scan_with(&near, &full)?;
        let ok2 = !r.conditions[4].holds && !r.all_hold;
        [(!ok) as u8 as f64, (!ok2) as u8 as f64]
    };
    let checks = vec![
        ctx.at_most("product_deficit", 1e-12).observe_all(product.iter().map(|p| p.0)),
        ctx.at_least("entangled_deficit", 1e-6).observe_all(entangled.iter().map(|p| p.0)),
        ctx.at_most("flattening_disagreements", 0.0).observe_all(product.iter().chain(&entangled).map(|p| p.1)),
        ctx.at_most("rigidity_missed", 0.0).observe_all(ghz.iter().map(|g| g.0)),
        ctx.at_most("rigidity_fidelity_deficit", 1e-8).observe_all(ghz.iter().map(|g| g.1)),
        ctx.at_most("rigidity_weight_error", 1e-8).observe_all(ghz.iter().map(|g| g.2)),
        ctx.at_most("rigidity_false_positives", 0.0).observe_all(haar_rigidity),
        ctx.at_most("five_conditions_violations", 0.0).observe_all(scans.iter().map(|s| s.0)),
        // the optimizer path must be exercised, not only the PPT shortcut
        ctx.at_least("five_conditions_roof_scans", 1.0).observe_all([scans.iter().map(|s| s.1).sum::<usize>() as f64]),
        ctx.at_most("five_conditions_sanity", 0.0).observe_all(sanity),
    ];
    Ok(SuiteReport::new(Suite::Propositions, n, seed, checks))
}

fn rng_index(rng: &mut SeededRng, n: usize) -> usize {
    use rand::Rng;
    rng.random_range(0..n)
}

/// Three-site reduction keeping `keep`, for callers assembling their own scans.
pub fn reduction(psi: &State, keep: [usize; 3]) -> Result<crate::Density> {
    psi.partial_trace(&SiteSet::new(&keep, 4)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(samples: usize) -> VerifyOptions {
        VerifyOptions { samples: Some(samples), ..VerifyOptions::default() }
    }

    #[test]
    fn suites_pass_at_small_scale() {
        for suite in [Suite::Identities, Suite::Table2, Suite::Gour, Suite::Cft] {
            let rep = run_one(suite, &small(20)).unwrap();
            assert!(rep.passed, "{}", VerifyReport { passed: false, suites: vec![rep] }.to_table());
        }
    }

    #[test]
    fn bounds_suite_small() {
        let rep = run_one(Suite::Bounds, &small(2000)).unwrap();
        assert!(rep.passed);
        assert!(rep.bounds.is_some());
    }

    #[test]
    fn propositions_small() {
        let rep = run_one(Suite::Propositions, &small(20)).unwrap();
        assert!(rep.passed, "{}", VerifyReport { passed: false, suites: vec![rep] }.to_table());
    }

    #[test]
    fn check_relations() {
        let mut c = Check::new("x", Relation::AtLeast, 1.0);
        c.observe(2.0);
        assert!(c.passed && c.worst == 2.0);
        c.observe(0.5);
        assert!(!c.passed && c.failures == 1 && c.worst == 0.5);
        let mut d = Check::new("y", Relation::AtMost, 1.0);
        d.observe(f64::NAN);
        assert!(!d.passed);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::EACH.into_iter().chain([Suite::All]) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn tolerance_override_applies_to_residual_checks() {
        let opts = VerifyOptions { samples: Some(5), tol: Some(1e-30), ..VerifyOptions::default() };
        let rep = run_one(Suite::Identities, &opts).unwrap();
        assert!(rep.checks.iter().all(|c| c.tolerance == 1e-30));
        assert!(!rep.passed);
    }
}
