//! Separability certificates and convex-roof estimators: the PPT test, the
//! rank-2 coherence lemma, GHZ rigidity detection, convex-roof upper bounds
//! and the five-conditions scan for four qubits.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, CMatrix};
use crate::qstate::{digits, strides, DensityMatrix, PartialTrace, PureState, SiteSet};
use crate::replica::{multi_invariant, ReplicaSpec};
use crate::sampling::{random_unitary, SeededRng};
use crate::scalar::{c, cr, czero, Real, C};
use crate::tangle2::two_tangle_pure;
use crate::tangle3::i5_pt;

/// Eigenvalues down to `-PPT_TOL` count as nonnegative.
pub const PPT_TOL: f64 = 1e-10;
/// Coherences below this are treated as zero by the rank-2 lemma.
pub const COHERENCE_TOL: f64 = 1e-10;
/// Largest density rank the convex-roof optimizer accepts.
pub const MAX_ROOF_RANK: usize = 8;
/// Estimates below this are reported as consistent with full separability.
pub const SEPARABLE_TOL: f64 = 1e-6;

/// Outcome of the partial-transpose test across one bipartition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PptVerdict {
    pub is_ppt: bool,
    pub min_eigenvalue: f64,
    /// True for 2x2 and 2x3 cuts, where PPT is equivalent to separability.
    pub decisive: bool,
}

/// PPT test of `rho` across `cut | rest`.
pub fn ppt_check<T: Real>(rho: &DensityMatrix<T>, cut: &SiteSet) -> Result<PptVerdict> {
    let q = rho.num_sites();
    if let Some(&bad) = cut.sites().iter().find(|&&s| s >= q) {
        return Err(Error::InvalidSite { site: bad, sites: q });
    }
    if cut.is_empty() || cut.len() == q {
        return Err(Error::TrivialCut);
    }
    let pt = rho.partial_transpose(cut)?;
    let min = hermitian_eig(&pt)?.min();
    let side: usize = cut.sites().iter().map(|&s| rho.dims()[s]).product();
    let other = rho.matrix().rows() / side;
    let decisive = matches!((side.min(other), side.max(other)), (2, 2) | (2, 3));
    Ok(PptVerdict { is_ppt: min >= -T::tol(PPT_TOL), min_eigenvalue: min.as_f64(), decisive })
}

/// Partial-transpose spectrum `{μ0, μ1, |s|, -|s|}` of the rank-2 coherence
/// operator `μ0|00><00| + μ1|11><11| + s|00><11| + h.c.`.
pub fn rank2_pt_spectrum(mu0: f64, mu1: f64, s: f64) -> Result<[f64; 4]> {
    if mu0 < 0.0 || mu1 < 0.0 {
        return Err(Error::Domain("weights must be nonnegative".into()));
    }
    Ok([mu0, mu1, s.abs(), -s.abs()])
}

/// Separable exactly when the coherence vanishes.
pub fn rank2_coherence_sep(mu0: f64, mu1: f64, s: f64) -> Result<bool> {
    let spec = rank2_pt_spectrum(mu0, mu1, s)?;
    Ok(-spec[3] < COHERENCE_TOL)
}

/// Local-unitary normal form `(⊗U_r) Σ_j λ_j |j…j>`.
#[derive(Debug, Clone)]
pub struct GhzForm<T: Real> {
    pub rank: usize,
    /// Complex weights in order of decreasing magnitude.
    pub weights: Vec<C<T>>,
    /// One unitary per site; column `j` is the local vector of branch `j`.
    pub local_unitaries: Vec<CMatrix<T>>,
    /// `1 - |<ψ|reconstruction>|²`.
    pub fidelity_deficit: T,
}

impl<T: Real> GhzForm<T> {
    pub fn dims(&self) -> Vec<usize> {
        self.local_unitaries.iter().map(|u| u.rows()).collect()
    }

    /// `Σ_j λ_j |j…j>` in the standard basis.
    pub fn canonical_state(&self) -> Result<PureState<T>> {
        let dims = self.dims();
        let st = strides(&dims);
        let diag: usize = st.iter().sum();
        let mut amps = vec![czero(); dims.iter().product()];
        for (j, w) in self.weights.iter().enumerate() {
            amps[j * diag] = *w;
        }
        PureState::new(&dims, amps, false)
    }

    pub fn reconstruct(&self) -> Result<PureState<T>> {
        let mut psi = self.canonical_state()?;
        for (r, u) in self.local_unitaries.iter().enumerate() {
            psi = psi.apply_local(r, u)?;
        }
        Ok(psi)
    }
}

/// Result of the GHZ rigidity test.
#[derive(Debug, Clone)]
pub enum RigidityOutcome<T: Real> {
    /// Locally equivalent to a generalized GHZ state.
    Ghz(GhzForm<T>),
    /// Not of GHZ form within tolerance.
    Absent,
    /// Local bases could not be resolved from near-degenerate spectra.
    Inconclusive,
}

impl<T: Real> RigidityOutcome<T> {
    pub fn form(&self) -> Option<&GhzForm<T>> {
        match self {
            RigidityOutcome::Ghz(f) => Some(f),
            _ => None,
        }
    }
}

const RIGIDITY_ATTEMPTS: usize = 8;
const RIGIDITY_GAP: f64 = 1e-6;

/// Extends orthonormal columns to a full unitary.
fn complete_unitary<T: Real>(cols: &[Vec<C<T>>], d: usize) -> CMatrix<T> {
    let mut basis: Vec<Vec<C<T>>> = cols.to_vec();
    for k in 0..d {
        if basis.len() == d {
            break;
        }
        let mut v = vec![czero::<T>(); d];
        v[k] = cr(T::one());
        for _ in 0..2 {
            for u in &basis {
                let proj = u.iter().zip(&v).fold(czero::<T>(), |acc, (a, b)| acc + a.conj() * b);
                for (x, y) in v.iter_mut().zip(u) {
                    *x = *x - proj * y;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm > T::lit(1e-6) {
            basis.push(v.into_iter().map(|z| z / cr(norm)).collect());
        }
    }
    CMatrix::from_fn(d, d, |i, j| basis[j][i])
}

fn gaussian_vec<T: Real>(d: usize, rng: &mut SeededRng) -> Vec<C<T>> {
    (0..d)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            c(T::lit(re), T::lit(im))
        })
        .collect()
}

/// Candidate local basis for `site`: eigenvectors of `M M†`, where `M` is the
/// state contracted with random vectors on every site except `site` and a
/// partner. On a GHZ-form state the eigenvectors are the branch vectors and
/// the random contraction separates equal weights. `None` on near-degenerate
/// nonzero eigenvalues.
fn contraction_basis<T: Real>(psi: &PureState<T>, site: usize, rng: &mut SeededRng) -> Option<CMatrix<T>> {
    let dims = psi.dims();
    let q = dims.len();
    let partner = if site == 0 { 1 } else { 0 };
    let probes: Vec<Vec<C<T>>> = dims.iter().map(|&d| gaussian_vec(d, rng)).collect();
    let mut m = CMatrix::zeros(dims[site], dims[partner]);
    for (i, &a) in psi.amps().iter().enumerate() {
        if a == czero() {
            continue;
        }
        let dg = digits(i, dims);
        let w = (0..q).filter(|&k| k != site && k != partner).fold(a, |acc, k| acc * probes[k][dg[k]]);
        m[(dg[site], dg[partner])] = m[(dg[site], dg[partner])] + w;
    }
    let spec = hermitian_eig(&m.matmul(&m.adjoint())).ok()?;
    let top = spec.max();
    if !(top > T::zero()) {
        return None;
    }
    let nonzero: Vec<T> = spec.eigenvalues.iter().copied().filter(|&e| e > top * T::lit(1e-10)).collect();
    let separated = nonzero.windows(2).all(|w| (w[0] - w[1]) > top * T::lit(RIGIDITY_GAP));
    separated.then_some(spec.eigenvectors)
}

/// Detects local-unitary equivalence to `Σ_j λ_j |j…j>`.
///
/// Every site's basis is fixed from a random two-site contraction, the
/// coefficient tensor is rotated into those bases, and its support must then
/// be a permuted diagonal carrying all but `tol` of the norm.
pub fn ghz_rigidity_detect<T: Real>(psi: &PureState<T>, tol: T, seed: u64) -> Result<RigidityOutcome<T>> {
    let psi = psi.to_normalized();
    let q = psi.num_sites();
    if q < 2 {
        return Err(Error::WrongArity { expected: 2, got: q });
    }
    if q == 2 {
        let s = crate::qstate::schmidt(&psi, &SiteSet::new(&[0], 2)?)?;
        let dims = psi.dims();
        let form = GhzForm {
            rank: s.coefficients.len(),
            weights: s.coefficients.iter().map(|&x| cr(x)).collect(),
            local_unitaries: vec![complete_unitary(&s.left, dims[0]), complete_unitary(&s.right, dims[1])],
            fidelity_deficit: T::zero(),
        };
        return finish_form(&psi, form, tol);
    }
    let mut rng = crate::sampling::rng_from_seed(seed);
    let mut bases = Vec::with_capacity(q);
    for site in 0..q {
        let basis = (0..RIGIDITY_ATTEMPTS).find_map(|_| contraction_basis(&psi, site, &mut rng));
        match basis {
            Some(b) => bases.push(b),
            None => return Ok(RigidityOutcome::Inconclusive),
        }
    }
    let mut rotated = psi.clone();
    for (r, u) in bases.iter().enumerate() {
        rotated = rotated.apply_local(r, &u.adjoint())?;
    }
    let dims = psi.dims().to_vec();
    let mut order: Vec<usize> = (0..rotated.total_dim()).collect();
    order.sort_by(|&x, &y| rotated.amps()[y].norm_sqr().partial_cmp(&rotated.amps()[x].norm_sqr()).expect("finite"));
    let mut used: Vec<Vec<bool>> = dims.iter().map(|&d| vec![false; d]).collect();
    let mut picked: Vec<(Vec<usize>, C<T>)> = Vec::new();
    let mut mass = T::zero();
    let floor = tol * T::lit(1e-3);
    for &idx in &order {
        let a = rotated.amps()[idx];
        if a.norm_sqr() <= floor || T::one() - mass <= tol {
            break;
        }
        let dg = digits(idx, &dims);
        if dg.iter().enumerate().any(|(r, &k)| used[r][k]) {
            break;
        }
        for (r, &k) in dg.iter().enumerate() {
            used[r][k] = true;
        }
        mass = mass + a.norm_sqr();
        picked.push((dg, a));
    }
    if T::one() - mass > tol {
        return Ok(RigidityOutcome::Absent);
    }
    let local_unitaries = (0..q)
        .map(|r| {
            let cols: Vec<Vec<C<T>>> = picked.iter().map(|(dg, _)| bases[r].column(dg[r])).collect();
            complete_unitary(&cols, dims[r])
        })
        .collect();
    let form = GhzForm {
        rank: picked.len(),
        weights: picked.iter().map(|(_, a)| *a).collect(),
        local_unitaries,
        fidelity_deficit: T::zero(),
    };
    finish_form(&psi, form, tol)
}

fn finish_form<T: Real>(psi: &PureState<T>, mut form: GhzForm<T>, tol: T) -> Result<RigidityOutcome<T>> {
    let rec = form.reconstruct()?;
    form.fidelity_deficit = psi.fidelity_deficit(&rec).max(T::zero());
    if form.fidelity_deficit > tol {
        return Ok(RigidityOutcome::Absent);
    }
    Ok(RigidityOutcome::Ghz(form))
}

/// Pure-state function whose convex roof is estimated.
#[derive(Debug, Clone, PartialEq)]
pub enum RoofMeasure {
    /// `φ_ABC` (three qubits).
    Phi,
    /// `(1 - I5)^{2/3}` (three qudits).
    OneMinusI5,
    /// `(1 - |Z|)^{2/N}` for a replica spec.
    OneMinusAbsZ(ReplicaSpec),
    /// `2(1 - Tr ρ_A²)` (two sites).
    TwoTangle,
    /// Three-tangle (three qubits).
    ThreeTangle,
}

impl RoofMeasure {
    pub fn name(&self) -> &'static str {
        match self {
            RoofMeasure::Phi => "phi",
            RoofMeasure::OneMinusI5 => "one_minus_i5",
            RoofMeasure::OneMinusAbsZ(_) => "one_minus_absZ",
            RoofMeasure::TwoTangle => "two_tangle",
            RoofMeasure::ThreeTangle => "three_tangle",
        }
    }

    fn check_dims(&self, dims: &[usize]) -> Result<()> {
        let qubits = |q: usize| {
            if dims.len() != q || dims.iter().any(|&d| d != 2) {
                Err(Error::WrongDims { expected: vec![2; q], got: dims.to_vec() })
            } else {
                Ok(())
            }
        };
        match self {
            RoofMeasure::Phi | RoofMeasure::ThreeTangle => qubits(3),
            RoofMeasure::OneMinusI5 if dims.len() != 3 => Err(Error::WrongArity { expected: 3, got: dims.len() }),
            RoofMeasure::TwoTangle if dims.len() != 2 => Err(Error::WrongArity { expected: 2, got: dims.len() }),
            RoofMeasure::OneMinusAbsZ(spec) if spec.perms().len() != dims.len() => {
                Err(Error::WrongArity { expected: dims.len(), got: spec.perms().len() })
            }
            _ => Ok(()),
        }
    }

    /// Value on a unit vector with the given dims.
    pub fn evaluate<T: Real>(&self, dims: &[usize], unit: &[C<T>]) -> Result<T> {
        match self {
            RoofMeasure::Phi => Ok(fast::phi(unit)),
            RoofMeasure::ThreeTangle => Ok(fast::three_tangle(unit)),
            RoofMeasure::TwoTangle if dims == [2, 2] => Ok(fast::two_tangle(unit)),
            _ => {
                let psi = PureState::new(dims, unit.to_vec(), false)?;
                match self {
                    RoofMeasure::TwoTangle => two_tangle_pure(&psi, &SiteSet::new(&[0], 2)?),
                    RoofMeasure::OneMinusI5 => Ok((T::one() - i5_pt(&psi)?).max(T::zero()).powf(T::lit(2.0 / 3.0))),
                    RoofMeasure::OneMinusAbsZ(spec) => {
                        let z = multi_invariant(&psi, spec)?.norm();
                        let power = T::lit(2.0 / spec.replicas() as f64);
                        Ok((T::one() - z).max(T::zero()).powf(power))
                    }
                    _ => unreachable!("fast paths handled above"),
                }
            }
        }
    }
}

/// Allocation-free kernels for the qubit objectives used in the optimizer hot loop.
mod fast {
    use crate::scalar::{czero, Real, C};

    pub fn two_tangle<T: Real>(t: &[C<T>]) -> T {
        T::lit(4.0) * (t[0] * t[3] - t[1] * t[2]).norm_sqr()
    }

    pub fn three_tangle<T: Real>(t: &[C<T>]) -> T {
        let a = |j: usize, k: usize, l: usize| t[4 * j + 2 * k + l];
        let d1 = a(0, 0, 0) * a(0, 0, 0) * a(1, 1, 1) * a(1, 1, 1)
            + a(0, 0, 1) * a(0, 0, 1) * a(1, 1, 0) * a(1, 1, 0)
            + a(0, 1, 0) * a(0, 1, 0) * a(1, 0, 1) * a(1, 0, 1)
            + a(1, 0, 0) * a(1, 0, 0) * a(0, 1, 1) * a(0, 1, 1);
        let (p, q, r, s) = (a(0, 0, 0) * a(1, 1, 1), a(0, 1, 1) * a(1, 0, 0), a(1, 0, 1) * a(0, 1, 0), a(1, 1, 0) * a(0, 0, 1));
        let d2 = p * q + p * r + p * s + q * r + q * s + r * s;
        let d3 = a(0, 0, 0) * a(1, 1, 0) * a(1, 0, 1) * a(0, 1, 1) + a(1, 1, 1) * a(0, 0, 1) * a(0, 1, 0) * a(1, 0, 0);
        T::lit(4.0) * (d1 - d2 * T::lit(2.0) + d3 * T::lit(4.0)).norm()
    }

    /// `69 - Tr[(2ρ_AB + ρ_A⊗I + I⊗ρ_B)³] - 3 Tr ρ_AB²` on 8 amplitudes.
    pub fn phi<T: Real>(t: &[C<T>]) -> T {
        let mut rho = [[czero::<T>(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                rho[i][j] = t[2 * i] * t[2 * j].conj() + t[2 * i + 1] * t[2 * j + 1].conj();
            }
        }
        // ρ_A[a][a'] = Σ_b ρ[(a,b)][(a',b)], ρ_B[b][b'] = Σ_a ρ[(a,b)][(a,b')]
        let ra = |a: usize, b: usize| rho[2 * a][2 * b] + rho[2 * a + 1][2 * b + 1];
        let rb = |a: usize, b: usize| rho[a][b] + rho[2 + a][2 + b];
        let two = T::lit(2.0);
        let mut x = [[czero::<T>(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let (ai, bi, aj, bj) = (i / 2, i % 2, j / 2, j % 2);
                let mut v = rho[i][j] * two;
                if bi == bj {
                    v = v + ra(ai, aj);
                }
                if ai == aj {
                    v = v + rb(bi, bj);
                }
                x[i][j] = v;
            }
        }
        let mut x2 = [[czero::<T>(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                x2[i][j] = (0..4).fold(czero(), |acc, k| acc + x[i][k] * x[k][j]);
            }
        }
        let mut cube = T::zero();
        let mut purity = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                cube = cube + (x2[i][j] * x[j][i]).re;
                purity = purity + (rho[i][j] * rho[j][i]).re;
            }
        }
        T::lit(69.0) - cube - T::lit(3.0) * purity
    }
}

/// Optimizer controls for convex-roof estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoofOptions {
    pub restarts: usize,
    /// Sweep cap per restart.
    pub iters: usize,
    pub seed: u64,
    /// A restart stops once a full sweep lowers the objective by less than this.
    pub tol: f64,
    /// Record the per-sweep objective of every restart.
    pub trace: bool,
}

impl Default for RoofOptions {
    fn default() -> Self {
        Self { restarts: 32, iters: 500, seed: 0xC0FFEE, tol: 1e-8, trace: false }
    }
}

/// A pure-state decomposition `ρ = Σ_ℓ |ψ̃_ℓ><ψ̃_ℓ|`, `|ψ̃_ℓ> = Σ_k U_ℓk √μ_k |v_k>`.
#[derive(Debug, Clone)]
pub struct DecompositionAnsatz<T: Real> {
    /// Ensemble size `m` (between the rank `r` and `2r`).
    pub m: usize,
    /// `m x r` matrix with orthonormal columns.
    pub mix: CMatrix<T>,
    /// Unnormalized ensemble vectors; `p_ℓ = ‖ψ̃_ℓ‖²`.
    pub vectors: Vec<Vec<C<T>>>,
}

impl<T: Real> DecompositionAnsatz<T> {
    pub fn weights(&self) -> Vec<T> {
        self.vectors.iter().map(|v| v.iter().map(|z| z.norm_sqr()).sum()).collect()
    }

    /// `Σ_ℓ |ψ̃_ℓ><ψ̃_ℓ|`.
    pub fn reconstruct(&self) -> CMatrix<T> {
        let d = self.vectors.first().map_or(0, Vec::len);
        let mut acc = CMatrix::zeros(d, d);
        for v in &self.vectors {
            acc = &acc + &CMatrix::outer(v, v);
        }
        acc
    }

    /// `max |U†U - I|`.
    pub fn isometry_defect(&self) -> T {
        let r = self.mix.cols();
        self.mix.adjoint().matmul(&self.mix).max_abs_diff(&CMatrix::identity(r))
    }
}

/// One row of the optimizer trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub restart: usize,
    pub iteration: usize,
    pub objective: f64,
}

/// Renders trace rows as `restart,iteration,objective` CSV.
pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from("restart,iteration,objective\n");
    for r in rows {
        out.push_str(&format!("{},{},{:.17e}\n", r.restart, r.iteration, r.objective));
    }
    out
}

/// Upper bound on a convex roof.
#[derive(Debug, Clone)]
pub struct RoofEstimate<T: Real> {
    pub value: T,
    pub rank: usize,
    /// Ensemble-size cap (`2r`).
    pub max_ensemble: usize,
    pub best: DecompositionAnsatz<T>,
    pub best_restart: usize,
    pub restarts: usize,
    pub seed: u64,
    /// False when some restart stopped at the sweep cap before converging.
    pub converged: bool,
    /// True when the value needed no optimization (pure input).
    pub exact: bool,
    pub trace: Vec<TraceRow>,
}

struct Run<T: Real> {
    value: T,
    ansatz: DecompositionAnsatz<T>,
    converged: bool,
    trace: Vec<TraceRow>,
}

struct Problem<'a> {
    measure: &'a RoofMeasure,
    dims: &'a [usize],
}

impl Problem<'_> {
    /// `‖v‖² f(v/‖v‖)`.
    fn weighted<T: Real>(&self, v: &[C<T>], buf: &mut Vec<C<T>>) -> T {
        let p: T = v.iter().map(|z| z.norm_sqr()).sum();
        if p <= T::lit(1e-300) {
            return T::zero();
        }
        let s = T::one() / p.sqrt();
        buf.clear();
        buf.extend(v.iter().map(|z| *z * s));
        p * self.measure.evaluate(self.dims, buf).expect("dims validated up front")
    }
}

fn rotate_pair<T: Real>(x: &[C<T>], y: &[C<T>], theta: T, phase: T, xo: &mut Vec<C<T>>, yo: &mut Vec<C<T>>) {
    let (cs, sn) = (theta.cos(), theta.sin());
    let e = c(phase.cos(), phase.sin());
    let es = e * sn;
    let ems = e.conj() * sn;
    xo.clear();
    yo.clear();
    for (a, b) in x.iter().zip(y) {
        xo.push(*a * cs + es * b);
        yo.push(*b * cs - ems * a);
    }
}

fn optimize_restart<T: Real>(
    problem: &Problem<'_>,
    w: &[Vec<C<T>>],
    m: usize,
    restart: usize,
    opts: &RoofOptions,
) -> Run<T> {
    let r = w.len();
    let d = w[0].len();
    let mut rng = crate::sampling::rng_from_seed(opts.seed);
    rng.set_stream(restart as u64);
    let mix: CMatrix<T> = if restart == 0 {
        CMatrix::from_fn(m, m, |i, j| if i == j { cr(T::one()) } else { czero() })
    } else {
        random_unitary(m, &mut rng)
    };
    // keep the m x r isometry U (first r columns) and the vectors U W^T together
    let mut u = CMatrix::from_fn(m, r, |i, j| mix[(i, j)]);
    let mut vecs: Vec<Vec<C<T>>> =
        (0..m).map(|l| (0..d).map(|x| (0..r).fold(czero(), |acc, k| acc + u[(l, k)] * w[k][x])).collect()).collect();
    let mut buf = Vec::with_capacity(d);
    let mut vals: Vec<T> = vecs.iter().map(|v| problem.weighted(v, &mut buf)).collect();
    let mut total: T = vals.iter().copied().sum();
    let mut trace = Vec::new();
    let record = |trace: &mut Vec<TraceRow>, it: usize, v: T| {
        if opts.trace {
            trace.push(TraceRow { restart, iteration: it, objective: v.as_f64() });
        }
    };
    record(&mut trace, 0, total);
    let (mut xo, mut yo, mut xb, mut yb) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut converged = m == 1;
    let half_pi = T::FRAC_PI_2();
    let two_pi = T::PI() * T::lit(2.0);
    let floor = T::lit(1e-14);
    for it in 1..=opts.iters {
        if m == 1 || total <= floor {
            converged = true;
            break;
        }
        let before = total;
        for i in 0..m {
            for j in i + 1..m {
                let current = vals[i] + vals[j];
                let mut eval = |theta: T, phase: T| {
                    rotate_pair(&vecs[i], &vecs[j], theta, phase, &mut xo, &mut yo);
                    let a = problem.weighted(&xo, &mut buf);
                    let b = problem.weighted(&yo, &mut buf);
                    (a + b, a, b)
                };
                let (nt, np) = (6usize, 6usize);
                let mut best = (current, T::zero(), T::zero(), vals[i], vals[j]);
                for a in 0..nt {
                    for b in 0..np {
                        if a == 0 && b > 0 {
                            continue;
                        }
                        let theta = half_pi * T::lit(a as f64 / nt as f64);
                        let phase = two_pi * T::lit(b as f64 / np as f64);
                        let (g, ga, gb) = eval(theta, phase);
                        if g < best.0 {
                            best = (g, theta, phase, ga, gb);
                        }
                    }
                }
                // golden-section refinement, alternating angle and phase
                let mut dt = half_pi / T::lit(nt as f64);
                let mut dp = two_pi / T::lit(np as f64);
                for _ in 0..2 {
                    for axis in 0..2 {
                        let (center, width) = if axis == 0 { (best.1, dt) } else { (best.2, dp) };
                        let (mut lo, mut hi) = (center - width, center + width);
                        let gr = T::lit(0.618_033_988_749_894_8);
                        let mut x1 = hi - gr * (hi - lo);
                        let mut x2 = lo + gr * (hi - lo);
                        let at = |x: T, best: &(T, T, T, T, T)| if axis == 0 { (x, best.2) } else { (best.1, x) };
                        let (t1, p1) = at(x1, &best);
                        let mut f1 = eval(t1, p1);
                        let (t2, p2) = at(x2, &best);
                        let mut f2 = eval(t2, p2);
                        for _ in 0..10 {
                            if f1.0 < f2.0 {
                                hi = x2;
                                x2 = x1;
                                f2 = f1;
                                x1 = hi - gr * (hi - lo);
                                let (t, p) = at(x1, &best);
                                f1 = eval(t, p);
                            } else {
                                lo = x1;
                                x1 = x2;
                                f1 = f2;
                                x2 = lo + gr * (hi - lo);
                                let (t, p) = at(x2, &best);
                                f2 = eval(t, p);
                            }
                        }
                        let (fx, x) = if f1.0 < f2.0 { (f1, x1) } else { (f2, x2) };
                        if fx.0 < best.0 {
                            let (t, p) = at(x, &best);
                            best = (fx.0, t, p, fx.1, fx.2);
                        }
                    }
                    dt = dt * T::lit(0.25);
                    dp = dp * T::lit(0.25);
                }
                if best.0 < current {
                    rotate_pair(&vecs[i], &vecs[j], best.1, best.2, &mut xb, &mut yb);
                    std::mem::swap(&mut vecs[i], &mut xb);
                    std::mem::swap(&mut vecs[j], &mut yb);
                    // same rotation on rows i, j of U
                    let (cs, sn) = (best.1.cos(), best.1.sin());
                    let e = c(best.2.cos(), best.2.sin());
                    for k in 0..r {
                        let (ui, uj) = (u[(i, k)], u[(j, k)]);
                        u[(i, k)] = ui * cs + e * sn * uj;
                        u[(j, k)] = uj * cs - e.conj() * sn * ui;
                    }
                    vals[i] = best.3;
                    vals[j] = best.4;
                    total = vals.iter().copied().sum();
                }
            }
        }
        record(&mut trace, it, total);
        if before - total < T::lit(opts.tol) {
            converged = true;
            break;
        }
    }
    Run { value: total, ansatz: DecompositionAnsatz { m, mix: u, vectors: vecs }, converged, trace }
}

/// Convex-roof upper bound `min Σ p_ℓ f(ψ_ℓ)` over decompositions of `rho`.
///
/// Each restart starts from the eigen-ensemble padded to `m` elements
/// (`m` cycles through `r..=2r`) and mixed by a random unitary, then runs
/// pairwise Givens-rotation descent. Restart 0 keeps the bare eigen-ensemble.
pub fn convex_roof<T: Real>(rho: &DensityMatrix<T>, measure: &RoofMeasure, opts: &RoofOptions) -> Result<RoofEstimate<T>> {
    measure.check_dims(rho.dims())?;
    if opts.restarts == 0 {
        return Err(Error::Domain("at least one restart is required".into()));
    }
    let spec = hermitian_eig(rho.matrix())?;
    let floor = T::lit(1e-12);
    let w: Vec<Vec<C<T>>> = spec
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &mu)| mu > floor)
        .map(|(k, &mu)| spec.eigenvector(k).into_iter().map(|z| z * mu.sqrt()).collect())
        .collect();
    let r = w.len();
    if r > MAX_ROOF_RANK {
        return Err(Error::RankTooHigh(r, MAX_ROOF_RANK));
    }
    let problem = Problem { measure, dims: rho.dims() };
    if r == 1 {
        let mut buf = Vec::new();
        let value = problem.weighted(&w[0], &mut buf);
        let best = DecompositionAnsatz { m: 1, mix: CMatrix::identity(1), vectors: w };
        return Ok(RoofEstimate {
            value,
            rank: 1,
            max_ensemble: 1,
            best,
            best_restart: 0,
            restarts: 0,
            seed: opts.seed,
            converged: true,
            exact: true,
            trace: Vec::new(),
        });
    }
    let runs: Vec<Run<T>> = (0..opts.restarts)
        .into_par_iter()
        .map(|k| optimize_restart(&problem, &w, r + k % (r + 1), k, opts))
        .collect();
    let converged = runs.iter().all(|run| run.converged);
    let (best_restart, _) = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.value.partial_cmp(&b.1.value).expect("finite objective").then(a.0.cmp(&b.0)))
        .expect("at least one restart");
    let trace = runs.iter().flat_map(|run| run.trace.iter().copied()).collect();
    let best = &runs[best_restart];
    Ok(RoofEstimate {
        value: best.value.max(T::zero()),
        rank: r,
        max_ensemble: 2 * r,
        best: best.ansatz.clone(),
        best_restart,
        restarts: opts.restarts,
        seed: opts.seed,
        converged,
        exact: false,
        trace,
    })
}

/// How a five-conditions entry was decided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    /// A negative partial-transpose eigenvalue on some cut (certifies entanglement).
    Npt,
    /// A convex-roof upper bound.
    Estimate,
    /// Not evaluated because an earlier condition already failed.
    Skipped,
}

/// One of the five conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionResult {
    pub holds: bool,
    /// φ or largest three-tangle estimate, or the most negative PT eigenvalue for `Npt`.
    pub value: f64,
    pub evidence: Evidence,
}

/// Scan of conditions (i)-(v) for one four-qubit state.
#[derive(Debug, Clone, Serialize)]
pub struct FiveConditionsReport {
    pub conditions: [ConditionResult; 5],
    /// True only if every condition holds.
    pub all_hold: bool,
}

/// Options for [`five_conditions_scan_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Estimates below this count as zero.
    pub tol: f64,
    /// `φ_ABC` must exceed this for condition (iv).
    pub margin: f64,
    pub roof: RoofOptions,
    /// Stop at the first failing condition.
    pub short_circuit: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            tol: SEPARABLE_TOL,
            margin: 1e-3,
            roof: RoofOptions { restarts: 6, iters: 200, ..RoofOptions::default() },
            short_circuit: true,
        }
    }
}

fn npt_witness<T: Real>(rho: &DensityMatrix<T>) -> Result<Option<f64>> {
    let mut worst: Option<f64> = None;
    for s in 0..3 {
        let v = ppt_check(rho, &SiteSet::new(&[s], 3)?)?;
        if !v.is_ppt {
            worst = Some(worst.map_or(v.min_eigenvalue, |w: f64| w.min(v.min_eigenvalue)));
        }
    }
    Ok(worst)
}

/// Evaluates conditions (i)-(v) with default options.
pub fn five_conditions_scan<T: Real>(psi: &PureState<T>, tol: f64) -> Result<FiveConditionsReport> {
    five_conditions_scan_with(psi, &ScanOptions { tol, ..ScanOptions::default() })
}

/// Conditions: (i)-(iii) `ρ_BCD`, `ρ_ACD`, `ρ_ABD` fully separable (φ roof
/// ≈ 0), (iv) `ρ_ABC` not fully separable, (v) all four three-tangle roofs ≈ 0.
/// A negative partial transpose on any cut of a reduction certifies that it
/// is not fully separable without running the optimizer.
pub fn five_conditions_scan_with<T: Real>(psi: &PureState<T>, opts: &ScanOptions) -> Result<FiveConditionsReport> {
    crate::tangle2::require_qubits(psi.dims(), 4)?;
    let skipped = ConditionResult { holds: false, value: f64::NAN, evidence: Evidence::Skipped };
    let mut out = [skipped; 5];
    let reduce = |keep: [usize; 3]| psi.partial_trace(&SiteSet::new(&keep, 4).expect("valid sites"));
    let traced_out: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];
    let mut failed = false;
    for (k, keep) in traced_out.iter().enumerate().take(3) {
        if failed && opts.short_circuit {
            break;
        }
        let rho = reduce(*keep)?;
        out[k] = match npt_witness(&rho)? {
            Some(min) => ConditionResult { holds: false, value: min, evidence: Evidence::Npt },
            None => {
                let est = convex_roof(&rho, &RoofMeasure::Phi, &opts.roof)?.value.as_f64();
                ConditionResult { holds: est < opts.tol, value: est, evidence: Evidence::Estimate }
            }
        };
        failed |= !out[k].holds;
    }
    if !(failed && opts.short_circuit) {
        let rho = reduce(traced_out[3])?;
        out[3] = match npt_witness(&rho)? {
            Some(min) => ConditionResult { holds: true, value: min, evidence: Evidence::Npt },
            None => {
                let est = convex_roof(&rho, &RoofMeasure::Phi, &opts.roof)?.value.as_f64();
                ConditionResult { holds: est > opts.margin, value: est, evidence: Evidence::Estimate }
            }
        };
        failed |= !out[3].holds;
    }
    if !(failed && opts.short_circuit) {
        let mut worst = 0.0f64;
        for keep in traced_out {
            let est = convex_roof(&reduce(keep)?, &RoofMeasure::ThreeTangle, &opts.roof)?.value.as_f64();
            worst = worst.max(est);
            if worst >= opts.tol && opts.short_circuit {
                break;
            }
        }
        out[4] = ConditionResult { holds: worst < opts.tol, value: worst, evidence: Evidence::Estimate };
    }
    let all_hold = out.iter().all(|c| c.holds);
    Ok(FiveConditionsReport { conditions: out, all_hold })
}
