//! Pure states, density matrices, reductions, partial transposes and Schmidt forms.
//!
//! Amplitudes are stored flat with the LAST site index varying fastest, so a
//! four-qubit amplitude `t_{jklm}` sits at `8j + 4k + 2l + m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, svd, CMatrix};
use crate::scalar::{c, cr, czero, Real, C};

/// Largest total Hilbert-space dimension accepted for a state.
pub const MAX_TOTAL_DIM: usize = 4096;
/// Normalization tolerance for pure states.
pub const NORM_TOL: f64 = 1e-12;
/// Hermiticity and trace tolerance for density matrices.
pub const DENSITY_TOL: f64 = 1e-12;
/// Eigenvalues down to `-PSD_TOL` are accepted as zero.
pub const PSD_TOL: f64 = 1e-10;

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for r in (0..dims.len().saturating_sub(1)).rev() {
        s[r] = s[r + 1] * dims[r + 1];
    }
    s
}

pub(crate) fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for r in (0..dims.len()).rev() {
        out[r] = index % dims[r];
        index /= dims[r];
    }
    out
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.iter().any(|&d| d < 2) {
        return Err(Error::BadSiteDims(dims.to_vec()));
    }
    let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).unwrap_or(usize::MAX);
    if total > MAX_TOTAL_DIM {
        return Err(Error::TooLarge(total, MAX_TOTAL_DIM));
    }
    Ok(total)
}

/// Sorted set of distinct 0-based site indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SiteSet(Vec<usize>);

impl SiteSet {
    pub fn new(sites: &[usize], num_sites: usize) -> Result<Self> {
        let mut v = sites.to_vec();
        v.sort_unstable();
        for w in v.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateSite(w[0]));
            }
        }
        if let Some(&bad) = v.iter().find(|&&s| s >= num_sites) {
            return Err(Error::InvalidSite { site: bad, sites: num_sites });
        }
        Ok(Self(v))
    }

    pub fn all(num_sites: usize) -> Self {
        Self((0..num_sites).collect())
    }

    pub fn sites(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.0.binary_search(&site).is_ok()
    }

    pub fn complement(&self, num_sites: usize) -> Self {
        Self((0..num_sites).filter(|s| !self.contains(*s)).collect())
    }

    /// Position of `site` within this set, used to relabel sites of a reduction.
    pub fn position(&self, site: usize) -> Option<usize> {
        self.0.binary_search(&site).ok()
    }
}

/// Splits every full index into (index over `keep`, index over the rest).
fn split_indices(dims: &[usize], keep: &SiteSet) -> (Vec<usize>, Vec<usize>, usize, usize) {
    let rest = keep.complement(dims.len());
    let kdims: Vec<usize> = keep.sites().iter().map(|&s| dims[s]).collect();
    let rdims: Vec<usize> = rest.sites().iter().map(|&s| dims[s]).collect();
    let dk: usize = kdims.iter().product();
    let dr: usize = rdims.iter().product();
    let total: usize = dims.iter().product();
    let mut kidx = vec![0; total];
    let mut ridx = vec![0; total];
    for i in 0..total {
        let d = digits(i, dims);
        kidx[i] = keep.sites().iter().fold(0, |acc, &s| acc * dims[s] + d[s]);
        ridx[i] = rest.sites().iter().fold(0, |acc, &s| acc * dims[s] + d[s]);
    }
    (kidx, ridx, dk, dr)
}

/// Normalized (or explicitly raw) multi-qudit pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T: Real> {
    dims: Vec<usize>,
    amps: Vec<C<T>>,
    normalized: bool,
    scale: T,
}

/// Builds a pure state. Unless `allow_unnormalized` is set the amplitudes are
/// rescaled to unit norm and the original norm is kept as [`PureState::scale`].
pub fn make_pure<T: Real>(dims: &[usize], amps: Vec<C<T>>, allow_unnormalized: bool) -> Result<PureState<T>> {
    PureState::new(dims, amps, allow_unnormalized)
}

impl<T: Real> PureState<T> {
    pub fn new(dims: &[usize], amps: Vec<C<T>>, allow_unnormalized: bool) -> Result<Self> {
        let total = check_dims(dims)?;
        if amps.len() != total {
            return Err(Error::DimensionMismatch { expected: total, got: amps.len() });
        }
        let norm_sqr: T = amps.iter().map(|z| z.norm_sqr()).sum();
        if !(norm_sqr > T::zero()) || !norm_sqr.is_finite() {
            return Err(Error::ZeroVector);
        }
        let scale = norm_sqr.sqrt();
        let unit = (norm_sqr - T::one()).abs() <= T::tol(NORM_TOL);
        if allow_unnormalized {
            return Ok(Self { dims: dims.to_vec(), amps, normalized: unit, scale });
        }
        // Vectors already unit within tolerance are left untouched so file
        // round-trips stay bit-exact.
        let amps = if unit {
            amps
        } else {
            amps.into_iter().map(|z| z / cr(scale)).collect()
        };
        Ok(Self { dims: dims.to_vec(), amps, normalized: true, scale })
    }

    /// Tensor product of single-site vectors (normalized).
    pub fn product(factors: &[Vec<C<T>>]) -> Result<Self> {
        let dims: Vec<usize> = factors.iter().map(|f| f.len()).collect();
        let total = check_dims(&dims)?;
        let mut amps = vec![czero(); total];
        for (i, a) in amps.iter_mut().enumerate() {
            let d = digits(i, &dims);
            *a = d.iter().enumerate().fold(cr(T::one()), |acc, (r, &k)| acc * factors[r][k]);
        }
        Self::new(&dims, amps, false)
    }

    /// Computational basis state `|digits>`.
    pub fn basis(dims: &[usize], index: &[usize]) -> Result<Self> {
        let total = check_dims(dims)?;
        let flat = index.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i);
        let mut amps = vec![czero(); total];
        amps[flat] = cr(T::one());
        Self::new(dims, amps, false)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amps(&self) -> &[C<T>] {
        &self.amps
    }

    pub fn num_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.amps.len()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Norm of the amplitudes supplied at construction.
    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn norm(&self) -> T {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn amp(&self, index: &[usize]) -> C<T> {
        self.amps[index.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| acc * d + i)]
    }

    /// Unit-norm copy (identity for already normalized states).
    pub fn to_normalized(&self) -> Self {
        if self.normalized {
            return self.clone();
        }
        let n = self.norm();
        Self {
            dims: self.dims.clone(),
            amps: self.amps.iter().map(|&z| z / cr(n)).collect(),
            normalized: true,
            scale: n,
        }
    }

    pub fn require_dims(&self, expected: &[usize]) -> Result<()> {
        if self.dims != expected {
            return Err(Error::WrongDims { expected: expected.to_vec(), got: self.dims.clone() });
        }
        Ok(())
    }

    pub fn require_arity(&self, q: usize) -> Result<()> {
        if self.dims.len() != q {
            return Err(Error::WrongArity { expected: q, got: self.dims.len() });
        }
        Ok(())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> C<T> {
        self.amps.iter().zip(&other.amps).fold(czero(), |acc, (a, b)| acc + a.conj() * b)
    }

    /// `1 - |<self|other>|^2` for unit vectors.
    pub fn fidelity_deficit(&self, other: &Self) -> T {
        T::one() - self.inner(other).norm_sqr()
    }

    /// Applies a `d x d` operator to one site.
    pub fn apply_local(&self, site: usize, op: &CMatrix<T>) -> Result<Self> {
        if site >= self.dims.len() {
            return Err(Error::InvalidSite { site, sites: self.dims.len() });
        }
        let d = self.dims[site];
        if op.rows() != d || op.cols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: op.rows() });
        }
        let stride = strides(&self.dims)[site];
        let mut out = vec![czero(); self.amps.len()];
        for (i, o) in out.iter_mut().enumerate() {
            let k = (i / stride) % d;
            let base = i - k * stride;
            *o = (0..d).fold(czero(), |acc, j| acc + op[(k, j)] * self.amps[base + j * stride]);
        }
        Ok(Self { dims: self.dims.clone(), amps: out, normalized: self.normalized, scale: self.scale })
    }

    /// Reorders sites: new site `k` is old site `order[k]`.
    pub fn permute_sites(&self, order: &[usize]) -> Result<Self> {
        let q = self.dims.len();
        let set = SiteSet::new(order, q)?;
        if set.len() != q {
            return Err(Error::DimensionMismatch { expected: q, got: order.len() });
        }
        let new_dims: Vec<usize> = order.iter().map(|&o| self.dims[o]).collect();
        let old_strides = strides(&self.dims);
        let mut out = vec![czero(); self.amps.len()];
        for (i, o) in out.iter_mut().enumerate() {
            let d = digits(i, &new_dims);
            let old: usize = d.iter().zip(order).map(|(&k, &site)| k * old_strides[site]).sum();
            *o = self.amps[old];
        }
        Ok(Self { dims: new_dims, amps: out, normalized: self.normalized, scale: self.scale })
    }

    /// Coefficient matrix with the `rows` sites as row index and the rest as columns.
    pub fn flatten(&self, rows: &SiteSet) -> CMatrix<T> {
        let (kidx, ridx, dk, dr) = split_indices(&self.dims, rows);
        let mut m = CMatrix::zeros(dk, dr);
        for (i, &a) in self.amps.iter().enumerate() {
            m[(kidx[i], ridx[i])] = a;
        }
        m
    }

    pub fn to_density(&self) -> DensityMatrix<T> {
        let psi = self.to_normalized();
        DensityMatrix { dims: self.dims.clone(), mat: CMatrix::outer(&psi.amps, &psi.amps) }
    }

    /// `Tr(ρ_keep²)` for the normalized state.
    pub fn reduced_purity(&self, keep: &SiteSet) -> Result<T> {
        let rho = self.partial_trace(keep)?;
        Ok(rho.purity())
    }
}

/// Validated density matrix carrying its subsystem dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    dims: Vec<usize>,
    mat: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(dims: &[usize], mat: CMatrix<T>) -> Result<Self> {
        let total = check_dims(dims)?;
        if !mat.is_square() {
            return Err(Error::NotSquare { rows: mat.rows(), cols: mat.cols() });
        }
        if mat.rows() != total {
            return Err(Error::DimensionMismatch { expected: total, got: mat.rows() });
        }
        let defect = mat.hermiticity_defect();
        if defect > T::tol(DENSITY_TOL) {
            return Err(Error::NotHermitian(defect.as_f64()));
        }
        let tr = mat.trace().re;
        if (tr - T::one()).abs() > T::tol(DENSITY_TOL) {
            return Err(Error::NotUnitTrace(tr.as_f64()));
        }
        let min = hermitian_eig(&mat)?.min();
        if min < -T::tol(PSD_TOL) {
            return Err(Error::NotPositive(min.as_f64()));
        }
        Ok(Self { dims: dims.to_vec(), mat: mat.hermitian_part() })
    }

    /// Constructor for matrices that are PSD and unit-trace by construction.
    pub(crate) fn from_parts(dims: Vec<usize>, mat: CMatrix<T>) -> Self {
        Self { dims, mat }
    }

    /// Convex combination `Σ p_k ρ_k`; weights must be nonnegative and sum to one.
    pub fn mixture(parts: &[(T, &DensityMatrix<T>)]) -> Result<Self> {
        let first = parts.first().ok_or(Error::Domain("empty mixture".into()))?.1;
        let mut acc = CMatrix::zeros(first.mat.rows(), first.mat.cols());
        for (p, rho) in parts {
            if rho.dims != first.dims {
                return Err(Error::WrongDims { expected: first.dims.clone(), got: rho.dims.clone() });
            }
            if *p < T::zero() {
                return Err(Error::Domain("negative mixture weight".into()));
            }
            acc = &acc + &rho.mat.scale(cr(*p));
        }
        Self::new(&first.dims, acc)
    }

    pub fn maximally_mixed(dims: &[usize]) -> Result<Self> {
        let total = check_dims(dims)?;
        let w = T::one() / T::lit(total as f64);
        Ok(Self { dims: dims.to_vec(), mat: CMatrix::diagonal(&vec![w; total]) })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.mat
    }

    pub fn num_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn purity(&self) -> T {
        let n = self.mat.rows();
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                acc = acc + (self.mat[(i, j)] * self.mat[(j, i)]).re;
            }
        }
        acc
    }

    pub fn require_dims(&self, expected: &[usize]) -> Result<()> {
        if self.dims != expected {
            return Err(Error::WrongDims { expected: expected.to_vec(), got: self.dims.clone() });
        }
        Ok(())
    }

    /// Conjugation `(⊗U_r) ρ (⊗U_r)†` by one unitary per site.
    pub fn conjugate_local(&self, unitaries: &[CMatrix<T>]) -> Result<Self> {
        if unitaries.len() != self.dims.len() {
            return Err(Error::DimensionMismatch { expected: self.dims.len(), got: unitaries.len() });
        }
        let u = unitaries[1..].iter().fold(unitaries[0].clone(), |acc, x| acc.kron(x));
        if u.rows() != self.mat.rows() {
            return Err(Error::DimensionMismatch { expected: self.mat.rows(), got: u.rows() });
        }
        let m = u.matmul(&self.mat).matmul(&u.adjoint());
        Ok(Self { dims: self.dims.clone(), mat: m.hermitian_part() })
    }

    /// Partial transpose on `sites`; the result is Hermitian but generally not PSD.
    pub fn partial_transpose(&self, sites: &SiteSet) -> Result<CMatrix<T>> {
        partial_transpose(self, sites)
    }
}

/// Reduction to a subset of sites.
pub trait PartialTrace<T: Real> {
    fn partial_trace(&self, keep: &SiteSet) -> Result<DensityMatrix<T>>;
}

impl<T: Real> PartialTrace<T> for PureState<T> {
    fn partial_trace(&self, keep: &SiteSet) -> Result<DensityMatrix<T>> {
        validate_keep(keep, self.dims.len())?;
        let psi = self.to_normalized();
        let m = psi.flatten(keep);
        let rho = m.matmul(&m.adjoint());
        let dims = keep.sites().iter().map(|&s| self.dims[s]).collect();
        Ok(DensityMatrix::from_parts(dims, rho))
    }
}

impl<T: Real> PartialTrace<T> for DensityMatrix<T> {
    fn partial_trace(&self, keep: &SiteSet) -> Result<DensityMatrix<T>> {
        validate_keep(keep, self.dims.len())?;
        let (kidx, ridx, dk, dr) = split_indices(&self.dims, keep);
        let total = kidx.len();
        let mut full = vec![0usize; dk * dr];
        for i in 0..total {
            full[kidx[i] * dr + ridx[i]] = i;
        }
        let rho = CMatrix::from_fn(dk, dk, |a, b| {
            (0..dr).fold(czero(), |acc, r| acc + self.mat[(full[a * dr + r], full[b * dr + r])])
        });
        let dims = keep.sites().iter().map(|&s| self.dims[s]).collect();
        Ok(DensityMatrix::from_parts(dims, rho))
    }
}

fn validate_keep(keep: &SiteSet, q: usize) -> Result<()> {
    if keep.is_empty() {
        return Err(Error::EmptySiteSet);
    }
    if let Some(&bad) = keep.sites().iter().find(|&&s| s >= q) {
        return Err(Error::InvalidSite { site: bad, sites: q });
    }
    Ok(())
}

/// Reduced density matrix on `keep` of a pure state or density matrix.
pub fn partial_trace<T: Real, S: PartialTrace<T>>(state: &S, keep: &SiteSet) -> Result<DensityMatrix<T>> {
    state.partial_trace(keep)
}

/// Partial transpose of `rho` on `sites`.
pub fn partial_transpose<T: Real>(rho: &DensityMatrix<T>, sites: &SiteSet) -> Result<CMatrix<T>> {
    let dims = &rho.dims;
    if let Some(&bad) = sites.sites().iter().find(|&&s| s >= dims.len()) {
        return Err(Error::InvalidSite { site: bad, sites: dims.len() });
    }
    let n = rho.mat.rows();
    let st = strides(dims);
    let all: Vec<Vec<usize>> = (0..n).map(|i| digits(i, dims)).collect();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let (mut ii, mut jj) = (i, j);
            for &s in sites.sites() {
                let (di, dj) = (all[i][s], all[j][s]);
                ii = ii - di * st[s] + dj * st[s];
                jj = jj - dj * st[s] + di * st[s];
            }
            out[(ii, jj)] = rho.mat[(i, j)];
        }
    }
    Ok(out)
}

/// Schmidt decomposition across `cut | rest`.
#[derive(Debug, Clone)]
pub struct Schmidt<T: Real> {
    /// Nonzero coefficients, descending.
    pub coefficients: Vec<T>,
    /// Orthonormal vectors on the cut sites (in ascending site order).
    pub left: Vec<Vec<C<T>>>,
    /// Orthonormal vectors on the remaining sites.
    pub right: Vec<Vec<C<T>>>,
}

const SCHMIDT_FLOOR: f64 = 1e-13;

pub fn schmidt<T: Real>(psi: &PureState<T>, cut: &SiteSet) -> Result<Schmidt<T>> {
    let q = psi.num_sites();
    validate_keep(cut, q)?;
    if cut.len() == q {
        return Err(Error::TrivialCut);
    }
    let m = psi.to_normalized().flatten(cut);
    let d = svd(&m);
    let floor = T::tol(SCHMIDT_FLOOR);
    let mut out = Schmidt { coefficients: Vec::new(), left: Vec::new(), right: Vec::new() };
    for (k, &s) in d.s.iter().enumerate() {
        if s <= floor {
            continue;
        }
        out.coefficients.push(s);
        out.left.push(d.u.column(k));
        out.right.push(d.v.column(k).into_iter().map(|z| z.conj()).collect());
    }
    Ok(out)
}

impl<T: Real> Schmidt<T> {
    /// Rebuilds the coefficient matrix `Σ s_k |l_k><r_k*|` (cut sites as rows).
    pub fn reconstruct(&self, rows: usize, cols: usize) -> CMatrix<T> {
        let mut m = CMatrix::zeros(rows, cols);
        for ((s, l), r) in self.coefficients.iter().zip(&self.left).zip(&self.right) {
            for i in 0..rows {
                for j in 0..cols {
                    m[(i, j)] = m[(i, j)] + l[i] * r[j] * *s;
                }
            }
        }
        m
    }
}

/// On-disk JSON representation of a pure state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub amps: Vec<[f64; 2]>,
    pub normalized: bool,
}

impl<T: Real> From<&PureState<T>> for StateFile {
    fn from(psi: &PureState<T>) -> Self {
        StateFile {
            dims: psi.dims.clone(),
            amps: psi.amps.iter().map(|z| [z.re.as_f64(), z.im.as_f64()]).collect(),
            normalized: psi.normalized,
        }
    }
}

impl StateFile {
    pub fn into_state<T: Real>(self) -> Result<PureState<T>> {
        let amps = self.amps.iter().map(|&[re, im]| c(T::lit(re), T::lit(im))).collect();
        PureState::new(&self.dims, amps, !self.normalized)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub fn state_to_json<T: Real>(psi: &PureState<T>) -> String {
    StateFile::from(psi).to_json()
}

pub fn state_from_json<T: Real>(text: &str) -> Result<PureState<T>> {
    StateFile::from_json(text)?.into_state()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{haar_random_pure, random_density};
    use rand::SeedableRng;

    fn bell() -> PureState<f64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(&[2, 2], vec![cr(h), czero(), czero(), cr(h)], false).unwrap()
    }

    fn ghz(q: usize) -> PureState<f64> {
        let mut amps = vec![czero(); 1 << q];
        amps[0] = cr(1.0);
        amps[(1 << q) - 1] = cr(1.0);
        PureState::new(&vec![2; q], amps, false).unwrap()
    }

    #[test]
    fn make_pure_normalizes_and_records_scale() {
        let psi: PureState<f64> = make_pure(&[2, 2], vec![cr(1.0), czero(), czero(), cr(1.0)], false).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-15);
        assert!((psi.scale() - 2f64.sqrt()).abs() < 1e-15);
        assert!(psi.is_normalized());
        let raw: PureState<f64> = make_pure(&[2, 2], vec![cr(1.0), czero(), czero(), cr(1.0)], true).unwrap();
        assert!(!raw.is_normalized());
        assert_eq!(raw.amps()[0], cr(1.0));
    }

    #[test]
    fn make_pure_errors() {
        assert_eq!(make_pure::<f64>(&[2, 2], vec![czero(); 4], false), Err(Error::ZeroVector));
        assert!(matches!(make_pure::<f64>(&[2, 2], vec![czero(); 3], false), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(make_pure::<f64>(&[2, 1], vec![cr(1.0); 2], false), Err(Error::BadSiteDims(_))));
        assert!(matches!(make_pure::<f64>(&[2; 13], vec![cr(1.0); 8192], false), Err(Error::TooLarge(8192, _))));
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let rho = bell().partial_trace(&SiteSet::new(&[1], 2).unwrap()).unwrap();
        let expect = CMatrix::diagonal(&[0.5, 0.5]);
        assert!(rho.matrix().max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn ghz3_two_site_marginal() {
        let rho = ghz(3).partial_trace(&SiteSet::new(&[1, 2], 3).unwrap()).unwrap();
        let expect = CMatrix::diagonal(&[0.5, 0.0, 0.0, 0.5]);
        assert!(rho.matrix().max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn product_marginal_is_the_factor() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = PureState::product(&[vec![cr(1.0), czero()], vec![cr(h), cr(h)]]).unwrap();
        let rho = psi.partial_trace(&SiteSet::new(&[1], 2).unwrap()).unwrap();
        let plus = CMatrix::outer(&[cr(h), cr(h)], &[cr(h), cr(h)]);
        assert!(rho.matrix().max_abs_diff(&plus) < 1e-15);
    }

    #[test]
    fn full_trace_keeps_projector() {
        let psi: PureState<f64> = haar_random_pure(&[2, 3], 5).unwrap();
        let rho = psi.partial_trace(&SiteSet::all(2)).unwrap();
        assert!(rho.matrix().max_abs_diff(psi.to_density().matrix()) < 1e-15);
    }

    #[test]
    fn partial_trace_errors() {
        let psi = bell();
        assert_eq!(psi.partial_trace(&SiteSet::new(&[], 2).unwrap()), Err(Error::EmptySiteSet));
        assert!(SiteSet::new(&[2], 2).is_err());
        assert!(SiteSet::new(&[1, 1], 2).is_err());
    }

    #[test]
    fn partial_trace_composes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let rho: DensityMatrix<f64> = random_density(&[2, 3, 2], 3, &mut rng).unwrap();
        let step1 = rho.partial_trace(&SiteSet::new(&[1, 2], 3).unwrap()).unwrap();
        let step2 = step1.partial_trace(&SiteSet::new(&[1], 2).unwrap()).unwrap();
        let direct = rho.partial_trace(&SiteSet::new(&[2], 3).unwrap()).unwrap();
        assert!(step2.matrix().max_abs_diff(direct.matrix()) < 1e-12);
    }

    #[test]
    fn partial_transpose_examples() {
        let diag = DensityMatrix::new(&[2, 2], CMatrix::diagonal(&[0.1, 0.2, 0.3, 0.4])).unwrap();
        let site1 = SiteSet::new(&[1], 2).unwrap();
        assert_eq!(&diag.partial_transpose(&site1).unwrap(), diag.matrix());

        let pt = bell().to_density().partial_transpose(&site1).unwrap();
        let ev = hermitian_eig(&pt).unwrap().eigenvalues;
        for (got, want) in ev.iter().zip([0.5, 0.5, 0.5, -0.5]) {
            assert!((got - want).abs() < 1e-14);
        }

        let rho_bc = ghz(3).partial_trace(&SiteSet::new(&[1, 2], 3).unwrap()).unwrap();
        assert!(rho_bc.partial_transpose(&site1).unwrap().max_abs_diff(rho_bc.matrix()) < 1e-15);
        assert!(diag.partial_transpose(&SiteSet::new(&[2], 3).unwrap()).is_err());
    }

    #[test]
    fn schmidt_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = schmidt(&bell(), &SiteSet::new(&[0], 2).unwrap()).unwrap();
        assert_eq!(s.coefficients.len(), 2);
        assert!(s.coefficients.iter().all(|&x| (x - h).abs() < 1e-15));

        let prod = PureState::<f64>::product(&[vec![cr(0.6), cr(0.8)], vec![cr(1.0), czero()]]).unwrap();
        let s = schmidt(&prod, &SiteSet::new(&[0], 2).unwrap()).unwrap();
        assert_eq!(s.coefficients.len(), 1);
        assert!((s.coefficients[0] - 1.0).abs() < 1e-15);

        let s = schmidt(&ghz(4), &SiteSet::new(&[0, 1], 4).unwrap()).unwrap();
        assert_eq!(s.coefficients.len(), 2);
        assert!(s.coefficients.iter().all(|&x| (x - h).abs() < 1e-15));

        assert_eq!(schmidt(&bell(), &SiteSet::all(2)).unwrap_err(), Error::TrivialCut);
    }

    #[test]
    fn schmidt_reconstructs_and_matches_marginal_spectrum() {
        for seed in 0..20 {
            let psi: PureState<f64> = haar_random_pure(&[2, 3, 2], seed).unwrap();
            let cut = SiteSet::new(&[0, 2], 3).unwrap();
            let s = schmidt(&psi, &cut).unwrap();
            let sum: f64 = s.coefficients.iter().map(|x| x * x).sum();
            assert!((sum - 1.0).abs() < 1e-12);
            let m = psi.flatten(&cut);
            assert!(s.reconstruct(m.rows(), m.cols()).max_abs_diff(&m) < 1e-10);
            let ev = hermitian_eig(psi.partial_trace(&cut).unwrap().matrix()).unwrap().eigenvalues;
            for (k, x) in s.coefficients.iter().enumerate() {
                assert!((x * x - ev[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn local_unitary_and_site_permutation() {
        let psi: PureState<f64> = haar_random_pure(&[2, 3], 2).unwrap();
        let swapped = psi.permute_sites(&[1, 0]).unwrap();
        assert_eq!(swapped.dims(), &[3, 2]);
        assert_eq!(swapped.amp(&[2, 1]), psi.amp(&[1, 2]));
        let x = CMatrix::from_fn(2, 2, |i, j| if i != j { cr(1.0) } else { czero() });
        let flipped = psi.apply_local(0, &x).unwrap();
        assert_eq!(flipped.amp(&[0, 1]), psi.amp(&[1, 1]));
    }

    #[test]
    fn density_validation() {
        let bad_trace = CMatrix::<f64>::diagonal(&[0.5, 0.6]);
        assert!(matches!(DensityMatrix::new(&[2], bad_trace), Err(Error::NotUnitTrace(_))));
        let neg = CMatrix::<f64>::diagonal(&[1.5, -0.5]);
        assert!(matches!(DensityMatrix::new(&[2], neg), Err(Error::NotPositive(_))));
        let nonherm = CMatrix::<f64>::from_row_major(2, 2, vec![cr(0.5), cr(0.1), czero(), cr(0.5)]).unwrap();
        assert!(matches!(DensityMatrix::new(&[2], nonherm), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn state_file_round_trip_is_bit_exact() {
        for seed in 0..5 {
            let psi: PureState<f64> = haar_random_pure(&[2, 3, 2], seed).unwrap();
            let back: PureState<f64> = state_from_json(&state_to_json(&psi)).unwrap();
            assert_eq!(back.amps(), psi.amps());
            assert_eq!(back.dims(), psi.dims());
            assert!(back.is_normalized());
        }
        let raw: PureState<f64> = make_pure(&[2, 2], vec![cr(0.5), cr(3.0), czero(), c(0.0, 1.0 / 3.0)], true).unwrap();
        let text = state_to_json(&raw);
        assert!(text.contains("\"normalized\":false"));
        let back: PureState<f64> = state_from_json(&text).unwrap();
        assert_eq!(back.amps(), raw.amps());
    }
}
