use super::matrix::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::{cr, czero, Real, C};

const HERMITIAN_TOL: f64 = 1e-10;
const OFF_DIAGONAL_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum<T: Real> {
    pub eigenvalues: Vec<T>,
    /// Unitary matrix whose columns are the eigenvectors, aligned with `eigenvalues`.
    pub eigenvectors: CMatrix<T>,
    /// Magnitude of the `(M + M†)/2` correction applied before solving.
    pub symmetrization: T,
    pub sweeps: usize,
}

impl<T: Real> HermitianSpectrum<T> {
    pub fn reconstruct(&self) -> CMatrix<T> {
        let v = &self.eigenvectors;
        let vl = CMatrix::from_fn(v.rows(), v.cols(), |i, j| v[(i, j)] * self.eigenvalues[j]);
        vl.matmul(&v.adjoint())
    }

    pub fn min(&self) -> T {
        self.eigenvalues.last().copied().unwrap_or_else(T::zero)
    }

    pub fn max(&self) -> T {
        self.eigenvalues.first().copied().unwrap_or_else(T::zero)
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C<T>> {
        self.eigenvectors.column(k)
    }
}

/// Two-sided complex Jacobi rotation `J` annihilating the (p,q) entry of a
/// Hermitian 2x2 block `[[app, g], [g*, aqq]]`. Returns `(c, s, e)` with
/// `J = [[c, s], [-s e*, c e*]]`, `e = g/|g|`.
#[inline]
pub(super) fn jacobi_rotation<T: Real>(app: T, aqq: T, g: C<T>) -> (T, T, C<T>) {
    let abs = g.norm();
    let e = g / cr(abs);
    let theta = (aqq - app) / (T::lit(2.0) * abs);
    let t = if theta.abs() > T::lit(1e150) {
        T::one() / (T::lit(2.0) * theta)
    } else {
        let sign = if theta >= T::zero() { T::one() } else { -T::one() };
        sign / (theta.abs() + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    (c, t * c, e)
}

/// Applies `M ← M J` on columns p and q of a row-major buffer.
#[inline]
pub(super) fn rotate_columns<T: Real>(
    data: &mut [C<T>],
    rows: usize,
    cols: usize,
    p: usize,
    q: usize,
    (c, s, e): (T, T, C<T>),
) {
    let ec = e.conj();
    for k in 0..rows {
        let mp = data[k * cols + p];
        let mq = data[k * cols + q];
        data[k * cols + p] = mp * c - mq * ec * s;
        data[k * cols + q] = mp * s + mq * ec * c;
    }
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
pub fn hermitian_eig<T: Real>(m: &CMatrix<T>) -> Result<HermitianSpectrum<T>> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    let defect = m.hermiticity_defect();
    let scale = m.max_abs().max(T::one());
    if defect > T::tol(HERMITIAN_TOL) * scale {
        return Err(Error::NotHermitian(defect.as_f64()));
    }
    let sym = m.hermitian_part();
    let symmetrization = sym.max_abs_diff(m);
    let mut a: Vec<C<T>> = sym.as_slice().to_vec();
    let mut v: Vec<C<T>> = CMatrix::<T>::identity(n).as_slice().to_vec();
    let norm = sym.frobenius_norm();
    let threshold = T::tol(OFF_DIAGONAL_TOL) * norm;

    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].norm_sqr())
            .sum::<T>()
            .sqrt();
        if off <= threshold {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let g = a[p * n + q];
                if g.norm() == T::zero() {
                    continue;
                }
                let rot = jacobi_rotation(a[p * n + p].re, a[q * n + q].re, g);
                let (c, s, e) = rot;
                rotate_columns(&mut a, n, n, p, q, rot);
                // rows: A ← J† A
                for k in 0..n {
                    let ap = a[p * n + k];
                    let aq = a[q * n + k];
                    a[p * n + k] = ap * c - aq * e * s;
                    a[q * n + k] = ap * s + aq * e * c;
                }
                a[p * n + q] = czero();
                a[q * n + p] = czero();
                a[p * n + p] = cr(a[p * n + p].re);
                a[q * n + q] = cr(a[q * n + q].re);
                rotate_columns(&mut v, n, n, p, q, rot);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.partial_cmp(&a[i * n + i].re).unwrap_or(std::cmp::Ordering::Equal));
    let eigenvalues = order.iter().map(|&i| a[i * n + i].re).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |i, k| v[i * n + order[k]]);
    Ok(HermitianSpectrum { eigenvalues, eigenvectors, symmetrization, sweeps })
}

/// Principal square root of a positive semidefinite matrix; eigenvalues below
/// zero (within tolerance) are clamped.
pub fn psd_sqrt<T: Real>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    let spec = hermitian_eig(m)?;
    let v = &spec.eigenvectors;
    let roots: Vec<T> = spec.eigenvalues.iter().map(|&l| l.max(T::zero()).sqrt()).collect();
    let vl = CMatrix::from_fn(v.rows(), v.cols(), |i, j| v[(i, j)] * roots[j]);
    Ok(vl.matmul(&v.adjoint()))
}
