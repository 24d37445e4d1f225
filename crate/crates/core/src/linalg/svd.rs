use super::eigen::{jacobi_rotation, rotate_columns};
use super::matrix::CMatrix;
use crate::scalar::{cr, czero, Real, C};

const MAX_SWEEPS: usize = 100;

/// Thin singular value decomposition `A = U diag(s) V†`, singular values descending.
#[derive(Debug, Clone)]
pub struct Svd<T: Real> {
    pub u: CMatrix<T>,
    pub s: Vec<T>,
    pub v: CMatrix<T>,
}

impl<T: Real> Svd<T> {
    pub fn reconstruct(&self) -> CMatrix<T> {
        let us = CMatrix::from_fn(self.u.rows(), self.u.cols(), |i, j| self.u[(i, j)] * self.s[j]);
        us.matmul(&self.v.adjoint())
    }
}

/// One-sided (Hestenes) Jacobi SVD. Small singular values are resolved to
/// absolute accuracy near `eps * ||A||`.
pub fn svd<T: Real>(a: &CMatrix<T>) -> Svd<T> {
    if a.rows() < a.cols() {
        let t = svd(&a.adjoint());
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    let (m, n) = (a.rows(), a.cols());
    let mut w: Vec<C<T>> = a.as_slice().to_vec();
    let mut v: Vec<C<T>> = CMatrix::<T>::identity(n).as_slice().to_vec();
    let tol = T::epsilon() * T::lit(m.max(1) as f64);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = T::zero();
                let mut beta = T::zero();
                let mut gamma = czero::<T>();
                for k in 0..m {
                    let wp = w[k * n + p];
                    let wq = w[k * n + q];
                    alpha = alpha + wp.norm_sqr();
                    beta = beta + wq.norm_sqr();
                    gamma = gamma + wp.conj() * wq;
                }
                if gamma.norm() <= tol * (alpha * beta).sqrt() || gamma.norm() == T::zero() {
                    continue;
                }
                rotated = true;
                let rot = jacobi_rotation(alpha, beta, gamma);
                rotate_columns(&mut w, m, n, p, q, rot);
                rotate_columns(&mut v, n, n, p, q, rot);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<T> = (0..n).map(|j| (0..m).map(|k| w[k * n + j].norm_sqr()).sum::<T>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));
    let s: Vec<T> = order.iter().map(|&j| norms[j]).collect();
    let vm = CMatrix::from_fn(n, n, |i, k| v[i * n + order[k]]);

    // Left vectors: normalised columns; null directions completed by Gram-Schmidt.
    let floor = s.first().copied().unwrap_or_else(T::zero) * T::epsilon() * T::lit(n as f64);
    let mut cols: Vec<Vec<C<T>>> = Vec::with_capacity(n);
    let mut pending = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        if norms[j] > floor && norms[j] > T::zero() {
            cols.push((0..m).map(|i| w[i * n + j] / cr(norms[j])).collect());
        } else {
            cols.push(vec![czero(); m]);
            pending.push(k);
        }
    }
    let mut basis = 0;
    for k in pending {
        while basis < m {
            let mut cand = vec![czero::<T>(); m];
            cand[basis] = cr(T::one());
            basis += 1;
            for (idx, col) in cols.iter().enumerate() {
                if idx == k || col.iter().all(|z| z.norm() == T::zero()) {
                    continue;
                }
                let proj = col.iter().zip(&cand).fold(czero(), |acc, (&a, &b)| acc + a.conj() * b);
                for (c, &a) in cand.iter_mut().zip(col) {
                    *c = *c - a * proj;
                }
            }
            let nrm = cand.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
            if nrm > T::lit(0.5) {
                cols[k] = cand.into_iter().map(|z| z / cr(nrm)).collect();
                break;
            }
        }
    }
    let u = CMatrix::from_fn(m, n, |i, k| cols[k][i]);
    Svd { u, s, v: vm }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    #[test]
    fn reconstructs_rectangular() {
        for (m, n) in [(4, 2), (2, 4), (3, 3), (8, 2)] {
            let a = CMatrix::<f64>::from_fn(m, n, |i, j| c((i * 3 + j) as f64 * 0.1 - 0.3, (i as f64 - 2.0 * j as f64) * 0.07));
            let d = svd(&a);
            assert!(d.reconstruct().max_abs_diff(&a) < 1e-13, "{m}x{n}");
            assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
            let k = d.s.len();
            assert!(d.u.adjoint().matmul(&d.u).max_abs_diff(&CMatrix::identity(k)) < 1e-12);
        }
    }

    #[test]
    fn rank_one_has_tiny_second_value() {
        let u = [c(0.6, 0.0), c(0.0, 0.8)];
        let v = [c(0.5, 0.5), c(0.5, -0.5)];
        let a = CMatrix::<f64>::from_fn(2, 2, |i, j| u[i] * v[j]);
        let d = svd(&a);
        assert!((d.s[0] - 1.0).abs() < 1e-15);
        assert!(d.s[1] < 1e-15);
    }
}
