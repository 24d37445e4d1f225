//! Third-order negativity of two adjacent intervals in a large-c CFT₂,
//! evaluated in log space.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Slack on the strict triangle inequalities.
pub const TRIANGLE_SLACK: f64 = 1e-12;

/// Central charge, three interval endpoints and UV cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CftConfig<T: Real> {
    pub c: T,
    pub z: [T; 3],
    pub eps: T,
}

impl<T: Real> CftConfig<T> {
    pub fn new(c: T, z: [T; 3], eps: T) -> Result<Self> {
        let cfg = Self { c, z, eps };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > T::zero()) {
            return Err(Error::Domain(format!("central charge must be positive, got {}", self.c.as_f64())));
        }
        if !(self.eps > T::zero()) {
            return Err(Error::Domain(format!("cutoff must be positive, got {}", self.eps.as_f64())));
        }
        let [a, b, c] = self.z;
        if a == b || b == c || a == c || !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::Domain("points must be finite and pairwise distinct".into()));
        }
        Ok(())
    }

    /// `|z12|, |z23|, |z31|`.
    pub fn separations(&self) -> [T; 3] {
        let [a, b, c] = self.z;
        [(a - b).abs(), (b - c).abs(), (c - a).abs()]
    }
}

/// Dimension of the third-replica twist operator, `(c/12)(3 - 1/3) = 2c/9`.
pub fn twist_dimension<T: Real>(c: T) -> Result<T> {
    if !(c > T::zero()) {
        return Err(Error::Domain(format!("central charge must be positive, got {}", c.as_f64())));
    }
    Ok(c / T::lit(12.0) * (T::lit(3.0) - T::lit(1.0 / 3.0)))
}

fn check_triangle<T: Real>(d: [T; 3]) -> Result<()> {
    let slack = T::lit(TRIANGLE_SLACK);
    for i in 0..3 {
        let (a, b, c) = (d[i], d[(i + 1) % 3], d[(i + 2) % 3]);
        if !(b + c - a > slack) {
            return Err(Error::Domain(format!(
                "dimensions ({}, {}, {}) violate the triangle inequality",
                d[0].as_f64(),
                d[1].as_f64(),
                d[2].as_f64()
            )));
        }
    }
    Ok(())
}

/// Holographic `ln C_123` for three heavy operators obeying strict triangle
/// inequalities.
pub fn ope_coeff_log<T: Real>(d1: T, d2: T, d3: T) -> Result<T> {
    let d = [d1, d2, d3];
    check_triangle(d)?;
    let half = T::lit(0.5);
    let sum = d1 + d2 + d3;
    let mut out = half * sum * (sum.ln() - T::lit(4.0).ln());
    for i in 0..3 {
        let (a, b, c) = (d[i], d[(i + 1) % 3], d[(i + 2) % 3]);
        out = out + half * a * ((a + b - c) * (a + c - b) / (b + c - a)).ln() - a * a.ln();
    }
    Ok(out)
}

/// `ln` of the three-point function of primaries with dimensions `d` at
/// `cfg.z`, given `ln C_123`.
pub fn three_point_log<T: Real>(cfg: &CftConfig<T>, d: [T; 3], ln_c: T) -> Result<T> {
    cfg.validate()?;
    let [s12, s23, s31] = cfg.separations();
    let e = cfg.eps;
    Ok(ln_c
        - (d[0] + d[1] - d[2]) * (s12 / e).ln()
        - (d[1] + d[2] - d[0]) * (s23 / e).ln()
        - (d[2] + d[0] - d[1]) * (s31 / e).ln())
}

/// `ln Tr(ρ_BC^Γ)³ = -(c/9) ln(|z12|²|z23|²|z31|²/ε⁶) + (c/3) ln(3/4)`.
pub fn ln_tr_neg3<T: Real>(cfg: &CftConfig<T>) -> Result<T> {
    cfg.validate()?;
    let [s12, s23, s31] = cfg.separations();
    let e = cfg.eps;
    let x = T::lit(2.0) * (s12.ln() + s23.ln() + s31.ln()) - T::lit(6.0) * e.ln();
    Ok(-cfg.c / T::lit(9.0) * x + cfg.c / T::lit(3.0) * T::lit(0.75).ln())
}

/// Value with its pieces, for display.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NegativityBreakdown {
    pub c: f64,
    pub z: [f64; 3],
    pub eps: f64,
    pub twist_dimension: f64,
    pub ln_ope: f64,
    /// `-(c/9) ln(|z12|²|z23|²|z31|²/ε⁶)`.
    pub distance_term: f64,
    pub ln_tr_neg3: f64,
}

pub fn breakdown(cfg: &CftConfig<f64>) -> Result<NegativityBreakdown> {
    let delta = twist_dimension(cfg.c)?;
    let ln_ope = ope_coeff_log(delta, delta, delta)?;
    let total = ln_tr_neg3(cfg)?;
    Ok(NegativityBreakdown {
        c: cfg.c,
        z: cfg.z,
        eps: cfg.eps,
        twist_dimension: delta,
        ln_ope,
        distance_term: total - cfg.c / 3.0 * 0.75f64.ln(),
        ln_tr_neg3: total,
    })
}

/// Parameter varied by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    C,
    Eps,
    Z1,
    Z2,
    Z3,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c" => Ok(Self::C),
            "eps" => Ok(Self::Eps),
            "z1" => Ok(Self::Z1),
            "z2" => Ok(Self::Z2),
            "z3" => Ok(Self::Z3),
            other => Err(Error::Parse(format!("unknown sweep axis '{other}'"))),
        }
    }
}

/// `steps` evenly spaced values of `axis` from `from` to `to` inclusive.
pub fn sweep(base: &CftConfig<f64>, axis: SweepAxis, from: f64, to: f64, steps: usize) -> Result<Vec<NegativityBreakdown>> {
    if steps < 2 {
        return Err(Error::Domain("a sweep needs at least two steps".into()));
    }
    (0..steps)
        .map(|k| {
            let v = from + (to - from) * k as f64 / (steps - 1) as f64;
            let mut cfg = *base;
            match axis {
                SweepAxis::C => cfg.c = v,
                SweepAxis::Eps => cfg.eps = v,
                SweepAxis::Z1 => cfg.z[0] = v,
                SweepAxis::Z2 => cfg.z[1] = v,
                SweepAxis::Z3 => cfg.z[2] = v,
            }
            breakdown(&cfg)
        })
        .collect()
}

pub fn sweep_csv(rows: &[NegativityBreakdown]) -> String {
    let mut out = String::from("c,z1,z2,z3,eps,twist_dimension,ln_ope,distance_term,ln_tr_neg3\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{:.17e},{:.17e},{:.17e},{:.17e}\n",
            r.c, r.z[0], r.z[1], r.z[2], r.eps, r.twist_dimension, r.ln_ope, r.distance_term, r.ln_tr_neg3
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn twist_dimensions() {
        assert!(close(twist_dimension(1.0).unwrap(), 2.0 / 9.0, 1e-15));
        assert!(close(twist_dimension(4.5).unwrap(), 1.0, 1e-15));
        assert!(close(twist_dimension(24.0).unwrap(), 16.0 / 3.0, 1e-15));
        assert!(twist_dimension(0.0).is_err() && twist_dimension(-1.0).is_err());
    }

    #[test]
    fn equal_dimensions_collapse() {
        for c in [1.0, 12.0, 100.0] {
            let d = twist_dimension(c).unwrap();
            assert!(close(ope_coeff_log(d, d, d).unwrap(), c / 3.0 * 0.75f64.ln(), 1e-12));
        }
        assert!(close(ope_coeff_log(0.7, 0.7, 0.7).unwrap(), 1.05 * 0.75f64.ln(), 1e-13));
    }

    #[test]
    fn unequal_dimensions_term_by_term() {
        let (a, b, c) = (2.0f64, 2.0, 3.0);
        let s = a + b + c;
        let t1 = 0.5 * a * ((a + b - c) * (a + c - b) / (b + c - a)).ln();
        let t2 = 0.5 * b * ((b + c - a) * (b + a - c) / (a + c - b)).ln();
        let t3 = 0.5 * c * ((c + a - b) * (c + b - a) / (a + b - c)).ln();
        let want = t1 + t2 + t3 + 0.5 * s * (s / 4.0).ln() - (a * a.ln() + b * b.ln() + c * c.ln());
        assert!(close(ope_coeff_log(a, b, c).unwrap(), want, 1e-14));
        assert!(close(ope_coeff_log(3.0, 2.0, 2.0).unwrap(), want, 1e-14));
        assert!(ope_coeff_log(1.0, 1.0, 3.0).is_err());
        assert!(ope_coeff_log(1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn negativity_examples() {
        let cfg = CftConfig::new(1.0, [0.0, 1.0, 2.0], 1.0).unwrap();
        let want = -(4.0f64).ln() / 9.0 + 0.75f64.ln() / 3.0;
        assert!(close(ln_tr_neg3(&cfg).unwrap(), want, 1e-14));

        let base = CftConfig::new(9.0, [0.0, 1.0, 2.5], 1.0).unwrap();
        let finer = CftConfig { eps: 0.1, ..base };
        let shift = ln_tr_neg3(&finer).unwrap() - ln_tr_neg3(&base).unwrap();
        assert!(close(shift, -6.0 * 10f64.ln(), 1e-12));

        let moved = CftConfig { z: [3.0, 4.0, 5.5], ..base };
        assert_eq!(ln_tr_neg3(&moved).unwrap(), ln_tr_neg3(&base).unwrap());

        assert!(CftConfig::new(1.0, [0.0, 0.0, 1.0], 1.0).is_err());
        assert!(CftConfig::new(1.0, [0.0, 1.0, 2.0], 0.0).is_err());
    }

    #[test]
    fn assembles_from_three_point_function() {
        for c in [1.0, 7.5, 40.0] {
            let cfg = CftConfig::new(c, [-0.3, 0.9, 2.2], 0.05).unwrap();
            let d = twist_dimension(c).unwrap();
            let ln_c = ope_coeff_log(d, d, d).unwrap();
            let assembled = three_point_log(&cfg, [d; 3], ln_c).unwrap();
            assert!(close(assembled, ln_tr_neg3(&cfg).unwrap(), 1e-12));
        }
    }

    #[test]
    fn sweep_rows() {
        let base = CftConfig::new(1.0, [0.0, 1.0, 2.0], 1.0).unwrap();
        let rows = sweep(&base, SweepAxis::C, 1.0, 3.0, 3).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(close(rows[2].ln_tr_neg3, 3.0 * rows[0].ln_tr_neg3, 1e-13));
        assert_eq!(sweep_csv(&rows).lines().count(), 4);
        assert!(sweep(&base, SweepAxis::Z2, 0.0, 1.0, 3).is_err());
    }
}
