//! Catalogue of named states: generalized GHZ, W, cluster, Dicke, double
//! Bell, the nine four-qubit families `G1..G9` and the three-qubit canonical form.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qstate::PureState;
use crate::scalar::{c, czero, Real, C};
use crate::tangle3::{acin_state, AcinParams};

/// A named state with its parameters. Complex parameters are accepted for
/// the four-qubit families, whose kets are polynomial in them.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    /// `Σ_j λ_j |j…j>` on `sites` qudits of dimension `rank`.
    Ghz { sites: usize, rank: usize, weights: Vec<Complex64> },
    W3,
    W4,
    Cluster,
    Dicke42,
    /// `(a|00> + b|11>) ⊗ (c|00> + d|11>)`.
    DoubleBell { a: Complex64, b: Complex64, c: Complex64, d: Complex64 },
    G1 { a: Complex64, b: Complex64, c: Complex64, d: Complex64 },
    G2 { a: Complex64, b: Complex64, c: Complex64 },
    G3 { a: Complex64, b: Complex64 },
    G4 { a: Complex64, b: Complex64 },
    G5 { a: Complex64 },
    G6 { a: Complex64 },
    G7,
    G8,
    G9,
    Acin { lambda: [f64; 5], phase: f64 },
}

const DOMAIN_TOL: f64 = 1e-12;

/// Family names accepted by [`StateSpec::parse`].
pub const FAMILIES: [&str; 16] = [
    "ghz", "w3", "w4", "cluster", "dicke42", "double_bell", "g1", "g2", "g3", "g4", "g5", "g6", "g7", "g8", "g9", "acin",
];

/// Parses `"x"`, `"x+yi"`, `"x-yi"`, `"yi"`, `"i"` or `"-i"`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let t: String = text.chars().filter(|ch| !ch.is_whitespace()).collect();
    let bad = || Error::Parse(format!("cannot read {text:?} as a complex number"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not the leading one or part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => s.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(Complex64::new(re.parse::<f64>().map_err(|_| bad())?, im))
}

fn parse_params(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for pair in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = pair.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value, got {pair:?}")))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

struct Params(BTreeMap<String, String>);

impl Params {
    fn complex(&mut self, key: &str) -> Result<Complex64> {
        let v = self.0.remove(key).ok_or_else(|| Error::Parse(format!("missing parameter {key}")))?;
        parse_complex(&v)
    }

    fn complex_or(&mut self, key: &str, default: Complex64) -> Result<Complex64> {
        match self.0.remove(key) {
            Some(v) => parse_complex(&v),
            None => Ok(default),
        }
    }

    fn real(&mut self, key: &str) -> Result<f64> {
        let v = self.complex(key)?;
        if v.im != 0.0 {
            return Err(Error::Parse(format!("parameter {key} must be real")));
        }
        Ok(v.re)
    }

    fn count_or(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.0.remove(key) {
            Some(v) => v.parse().map_err(|_| Error::Parse(format!("parameter {key} must be a count, got {v:?}"))),
            None => Ok(default),
        }
    }

    fn finish(self) -> Result<()> {
        match self.0.keys().next() {
            Some(k) => Err(Error::Parse(format!("unknown parameter {k}"))),
            None => Ok(()),
        }
    }
}

impl StateSpec {
    /// Builds a spec from a family name and `k=v,...` parameters.
    ///
    /// `ghz` takes `q` (sites, default 4), `R` (rank, default 2) and weights
    /// `l0..l{R-1}` (default uniform; `a`, `b` alias `l0`, `l1`). `double_bell`
    /// defaults every amplitude to `1/√2`. `acin` takes `l0..l4` and `phi`.
    pub fn parse(family: &str, params: &str) -> Result<Self> {
        let mut p = Params(parse_params(params)?);
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let spec = match family {
            "ghz" => {
                let sites = p.count_or("q", 4)?;
                let rank = p.count_or("R", 2)?;
                let uniform = Complex64::new(1.0 / (rank.max(1) as f64).sqrt(), 0.0);
                let mut weights = Vec::with_capacity(rank);
                for j in 0..rank {
                    let alias = match j {
                        0 => Some("a"),
                        1 => Some("b"),
                        _ => None,
                    };
                    let key = format!("l{j}");
                    let w = match alias.filter(|a| p.0.contains_key(*a)) {
                        Some(a) => p.complex(a)?,
                        None => p.complex_or(&key, uniform)?,
                    };
                    weights.push(w);
                }
                StateSpec::Ghz { sites, rank, weights }
            }
            "w3" => StateSpec::W3,
            "w4" => StateSpec::W4,
            "cluster" => StateSpec::Cluster,
            "dicke42" => StateSpec::Dicke42,
            "double_bell" => StateSpec::DoubleBell {
                a: p.complex_or("a", h)?,
                b: p.complex_or("b", h)?,
                c: p.complex_or("c", h)?,
                d: p.complex_or("d", h)?,
            },
            "g1" => StateSpec::G1 { a: p.complex("a")?, b: p.complex("b")?, c: p.complex("c")?, d: p.complex("d")? },
            "g2" => StateSpec::G2 { a: p.complex("a")?, b: p.complex("b")?, c: p.complex("c")? },
            "g3" => StateSpec::G3 { a: p.complex("a")?, b: p.complex("b")? },
            "g4" => StateSpec::G4 { a: p.complex("a")?, b: p.complex("b")? },
            "g5" => StateSpec::G5 { a: p.complex("a")? },
            "g6" => StateSpec::G6 { a: p.complex("a")? },
            "g7" => StateSpec::G7,
            "g8" => StateSpec::G8,
            "g9" => StateSpec::G9,
            "acin" => {
                let mut lambda = [0.0; 5];
                for (j, l) in lambda.iter_mut().enumerate() {
                    *l = p.real(&format!("l{j}"))?;
                }
                let phase = match p.0.contains_key("phi") {
                    true => p.real("phi")?,
                    false => 0.0,
                };
                StateSpec::Acin { lambda, phase }
            }
            other => return Err(Error::Parse(format!("unknown state family {other:?}; expected one of {FAMILIES:?}"))),
        };
        p.finish()?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StateSpec::Ghz { sites, rank, weights } => {
                if *sites < 2 || *rank < 2 {
                    return Err(Error::Domain("ghz needs at least 2 sites and rank at least 2".into()));
                }
                if weights.len() != *rank {
                    return Err(Error::DimensionMismatch { expected: *rank, got: weights.len() });
                }
                Ok(())
            }
            StateSpec::DoubleBell { a, b, c, d } => {
                let ab = a.norm_sqr() + b.norm_sqr();
                let cd = c.norm_sqr() + d.norm_sqr();
                if (ab - 1.0).abs() > DOMAIN_TOL || (cd - 1.0).abs() > DOMAIN_TOL {
                    return Err(Error::Domain(format!("double Bell needs |a|²+|b|² = |c|²+|d|² = 1, got {ab} and {cd}")));
                }
                Ok(())
            }
            StateSpec::Acin { lambda, phase } => AcinParams::new(*lambda, *phase).map(|_| ()),
            _ => Ok(()),
        }
    }
}

fn lift<T: Real>(z: Complex64) -> C<T> {
    c(T::lit(z.re), T::lit(z.im))
}

fn qubits4<T: Real>(kets: &[(&str, Complex64)]) -> Vec<C<T>> {
    let mut a = vec![czero(); 16];
    for (k, v) in kets {
        let idx = usize::from_str_radix(k, 2).expect("binary ket label");
        a[idx] = a[idx] + lift::<T>(*v);
    }
    a
}

/// Amplitudes exactly as printed; `normalized` rescales to unit norm.
pub fn make_named<T: Real>(spec: &StateSpec, normalized: bool) -> Result<PureState<T>> {
    spec.validate()?;
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let half = 0.5;
    let raw = !normalized;
    let four = |kets: &[(&str, Complex64)]| PureState::new(&[2, 2, 2, 2], qubits4::<T>(kets), raw);
    match spec {
        StateSpec::Ghz { sites, rank, weights } => {
            let dims = vec![*rank; *sites];
            let total = rank.checked_pow(*sites as u32).ok_or(Error::TooLarge(usize::MAX, crate::qstate::MAX_TOTAL_DIM))?;
            if total > crate::qstate::MAX_TOTAL_DIM {
                return Err(Error::TooLarge(total, crate::qstate::MAX_TOTAL_DIM));
            }
            let diag: usize = (0..*sites).map(|k| rank.pow(k as u32)).sum();
            let mut amps = vec![czero(); total];
            for (j, w) in weights.iter().enumerate() {
                amps[j * diag] = lift(*w);
            }
            PureState::new(&dims, amps, raw)
        }
        StateSpec::W3 => {
            let mut amps = vec![czero(); 8];
            let w = lift::<T>(Complex64::new(1.0 / 3f64.sqrt(), 0.0));
            for k in [1, 2, 4] {
                amps[k] = w;
            }
            PureState::new(&[2, 2, 2], amps, raw)
        }
        StateSpec::W4 => {
            let h = Complex64::new(half, 0.0);
            four(&[("0001", h), ("0010", h), ("0100", h), ("1000", h)])
        }
        StateSpec::Cluster => {
            let h = Complex64::new(half, 0.0);
            four(&[("0000", h), ("0011", h), ("1100", h), ("1111", -h)])
        }
        StateSpec::Dicke42 => {
            let w = Complex64::new(1.0 / 6f64.sqrt(), 0.0);
            four(&[("0011", w), ("0101", w), ("0110", w), ("1001", w), ("1010", w), ("1100", w)])
        }
        StateSpec::DoubleBell { a, b, c, d } => four(&[("0000", a * c), ("0011", a * d), ("1100", b * c), ("1111", b * d)]),
        StateSpec::G1 { a, b, c, d } => {
            let (p, m, r, s) = ((a + d) * half, (a - d) * half, (b + c) * half, (b - c) * half);
            four(&[
                ("0000", p),
                ("1111", p),
                ("0011", m),
                ("1100", m),
                ("0101", r),
                ("1010", r),
                ("0110", s),
                ("1001", s),
            ])
        }
        StateSpec::G2 { a, b, c } => {
            let (p, m) = ((a + b) * half, (a - b) * half);
            four(&[("0000", p), ("1111", p), ("0011", m), ("1100", m), ("0101", *c), ("1010", *c), ("0110", one)])
        }
        StateSpec::G3 { a, b } => {
            four(&[("0000", *a), ("1111", *a), ("0101", *b), ("1010", *b), ("0110", one), ("0011", one)])
        }
        StateSpec::G4 { a, b } => {
            let (p, m) = ((a + b) * half, (a - b) * half);
            let r = i / 2f64.sqrt();
            four(&[
                ("0000", *a),
                ("1111", *a),
                ("0101", p),
                ("1010", p),
                ("0110", m),
                ("1001", m),
                ("0001", r),
                ("0010", r),
                ("0111", r),
                ("1011", r),
            ])
        }
        StateSpec::G5 { a } => {
            four(&[("0000", *a), ("0101", *a), ("1010", *a), ("1111", *a), ("0001", i), ("0110", one), ("1011", -i)])
        }
        StateSpec::G6 { a } => four(&[("0000", *a), ("1111", *a), ("0011", one), ("0101", one), ("0110", one)]),
        StateSpec::G7 => four(&[("0000", one), ("0101", one), ("1000", one), ("1110", one)]),
        StateSpec::G8 => four(&[("0000", one), ("1011", one), ("1101", one), ("1110", one)]),
        StateSpec::G9 => four(&[("0000", one), ("0111", one)]),
        StateSpec::Acin { lambda, phase } => {
            let p = AcinParams::new(lambda.map(T::lit), T::lit(*phase))?;
            acin_state(&p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{state_from_json, state_to_json};

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("0.5").unwrap(), Complex64::new(0.5, 0.0));
        assert_eq!(parse_complex("1-2i").unwrap(), Complex64::new(1.0, -2.0));
        assert_eq!(parse_complex("2.5i").unwrap(), Complex64::new(0.0, 2.5));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("1e-3+1e-2i").unwrap(), Complex64::new(1e-3, 1e-2));
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn dicke_amplitudes() {
        let psi: PureState<f64> = make_named(&StateSpec::Dicke42, true).unwrap();
        for (k, a) in psi.amps().iter().enumerate() {
            let want = if (k as u32).count_ones() == 2 { 1.0 / 6f64.sqrt() } else { 0.0 };
            assert!((a.re - want).abs() < 1e-15 && a.im == 0.0);
        }
    }

    #[test]
    fn g1_raw_pattern() {
        let spec = StateSpec::parse("g1", "a=1,b=2,c=3,d=5").unwrap();
        let psi: PureState<f64> = make_named(&spec, false).unwrap();
        assert!(!psi.is_normalized());
        let amp = |k: &str| psi.amps()[usize::from_str_radix(k, 2).unwrap()].re;
        assert_eq!(amp("0000"), 3.0);
        assert_eq!(amp("1100"), -2.0);
        assert_eq!(amp("1010"), 2.5);
        assert_eq!(amp("1001"), -0.5);
    }

    #[test]
    fn qutrit_ghz_and_w3() {
        let spec = StateSpec::parse("ghz", "q=3,R=3,l0=0.6,l1=0.0,l2=0.8").unwrap();
        let psi: PureState<f64> = make_named(&spec, true).unwrap();
        assert_eq!(psi.dims(), &[3, 3, 3]);
        assert_eq!(psi.amp(&[2, 2, 2]).re, 0.8);
        assert_eq!(psi.amp(&[0, 0, 0]).re, 0.6);
        let w: PureState<f64> = make_named(&StateSpec::W3, true).unwrap();
        for k in [1, 2, 4] {
            assert!((w.amps()[k].re - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn signs_and_phases() {
        let cl: PureState<f64> = make_named(&StateSpec::Cluster, true).unwrap();
        assert_eq!(cl.amps()[15].re, -0.5);
        let g5: PureState<f64> = make_named(&StateSpec::parse("g5", "a=1").unwrap(), false).unwrap();
        assert_eq!(g5.amps()[1], c(0.0, 1.0));
        assert_eq!(g5.amps()[11], c(0.0, -1.0));
    }

    #[test]
    fn domain_errors() {
        assert!(StateSpec::parse("double_bell", "a=1,b=1").is_err());
        assert!(StateSpec::parse("g1", "a=1").is_err());
        assert!(StateSpec::parse("g7", "a=1").is_err());
        assert!(StateSpec::parse("nope", "").is_err());
        assert!(StateSpec::parse("acin", "l0=1,l1=0,l2=0,l3=0,l4=0,phi=4").is_err());
    }

    #[test]
    fn catalogue_round_trips_through_files() {
        for (fam, params) in [
            ("ghz", ""),
            ("w3", ""),
            ("w4", ""),
            ("cluster", ""),
            ("dicke42", ""),
            ("double_bell", "a=0.6,b=0.8"),
            ("g1", "a=0.3,b=1+2i,c=-0.5,d=0.25"),
            ("g4", "a=0.3,b=0.7"),
            ("g9", ""),
            ("acin", "l0=0.6,l1=0,l2=0,l3=0,l4=0.8,phi=1"),
        ] {
            let spec = StateSpec::parse(fam, params).unwrap();
            for normalized in [true, false] {
                let psi: PureState<f64> = make_named(&spec, normalized).unwrap();
                let back: PureState<f64> = state_from_json(&state_to_json(&psi)).unwrap();
                assert_eq!(back.amps(), psi.amps(), "{fam}");
            }
        }
    }
}
