//! Replica multi-invariants `Z = <Ψ^{⊗N}| Ω_1 ⋯ Ω_q |Ψ^{⊗N}>` and the
//! fully-product criterion built on them.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qstate::{strides, PureState, SiteSet};
use crate::scalar::{czero, Real, C};

/// Largest `(Π d_r)^N` the contraction accepts.
pub const WORK_GUARD: u128 = 1 << 20;
/// Default threshold on `1 - |Z|` for the product verdict.
pub const DEFAULT_PRODUCT_TOL: f64 = 1e-9;

/// Bijection on replica labels, stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self { image: (0..n).collect() }
    }

    /// From a 0-based image list.
    pub fn from_image(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &x in &image {
            if x >= image.len() || std::mem::replace(&mut seen[x], true) {
                return Err(Error::InvalidPermutation(format!("{image:?} is not a bijection")));
            }
        }
        Ok(Self { image })
    }

    /// The cyclic shift `(1 2 ⋯ n)`.
    pub fn cycle(n: usize) -> Self {
        Self { image: (0..n).map(|x| (x + 1) % n.max(1)).collect() }
    }

    /// Parses cycle notation over labels `1..=n`: `"id"`, `"(123)"`, `"(12)(3)"`,
    /// or comma-separated labels such as `"(1,2,10)"` when `n > 9`.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let cycles = parse_cycle_labels(text)?;
        let mut image: Vec<usize> = (0..n).collect();
        let mut used = vec![false; n];
        for cycle in cycles {
            for &label in &cycle {
                if label == 0 || label > n {
                    return Err(Error::InvalidPermutation(format!("label {label} outside 1..={n}")));
                }
                if std::mem::replace(&mut used[label - 1], true) {
                    return Err(Error::InvalidPermutation(format!("label {label} repeated")));
                }
            }
            for (k, &label) in cycle.iter().enumerate() {
                image[label - 1] = cycle[(k + 1) % cycle.len()] - 1;
            }
        }
        Ok(Self { image })
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    /// Image of the 0-based label `x`.
    pub fn apply(&self, x: usize) -> usize {
        self.image[x]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `self ∘ other`, i.e. `x ↦ self(other(x))`.
    pub fn compose(&self, other: &Self) -> Self {
        Self { image: other.image.iter().map(|&x| self.image[x]).collect() }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.image.len()];
        for (i, &x) in self.image.iter().enumerate() {
            inv[x] = i;
        }
        Self { image: inv }
    }

    /// Canonical cycle notation: nontrivial cycles, each led by its smallest
    /// label, ordered by that label; `"id"` for the identity.
    pub fn to_cycles(&self) -> String {
        let n = self.image.len();
        let mut seen = vec![false; n];
        let mut out = String::new();
        for start in 0..n {
            if seen[start] || self.image[start] == start {
                continue;
            }
            let mut labels = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                labels.push((x + 1).to_string());
                x = self.image[x];
            }
            let sep = if n > 9 { "," } else { "" };
            out.push('(');
            out.push_str(&labels.join(sep));
            out.push(')');
        }
        if out.is_empty() {
            "id".to_string()
        } else {
            out
        }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_cycles())
    }
}

fn parse_cycle_labels(text: &str) -> Result<Vec<Vec<usize>>> {
    let t = text.trim();
    if t == "id" || t.is_empty() {
        return Ok(Vec::new());
    }
    let bad = |msg: &str| Error::InvalidPermutation(format!("{msg} in {t:?}"));
    let mut cycles = Vec::new();
    let mut rest = t;
    while !rest.is_empty() {
        rest = rest.trim_start();
        let body_end = rest.find(')').ok_or_else(|| bad("unclosed cycle"))?;
        if !rest.starts_with('(') {
            return Err(bad("expected '('"));
        }
        let body = &rest[1..body_end];
        let labels: Vec<usize> = if body.contains(',') || body.trim().contains(' ') {
            body.split(|ch: char| ch == ',' || ch.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<usize>().map_err(|_| bad("bad label")))
                .collect::<Result<_>>()?
        } else {
            body.trim()
                .chars()
                .map(|ch| ch.to_digit(10).map(|d| d as usize).ok_or_else(|| bad("bad label")))
                .collect::<Result<_>>()?
        };
        if labels.is_empty() {
            return Err(bad("empty cycle"));
        }
        cycles.push(labels);
        rest = &rest[body_end + 1..];
    }
    Ok(cycles)
}

fn max_label(text: &str) -> Result<usize> {
    Ok(parse_cycle_labels(text)?.into_iter().flatten().max().unwrap_or(1))
}

/// Parses a permutation given the replica count.
pub fn parse_cycles(text: &str, n: usize) -> Result<Permutation> {
    Permutation::parse(text, n)
}

/// One permutation per site, all acting on the same `n` replicas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplicaSpec {
    n: usize,
    perms: Vec<Permutation>,
}

impl ReplicaSpec {
    pub fn new(n: usize, perms: Vec<Permutation>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPermutation("replica count must be at least 1".into()));
        }
        if let Some(p) = perms.iter().find(|p| p.len() != n) {
            return Err(Error::InvalidPermutation(format!("{} acts on {} labels, expected {n}", p, p.len())));
        }
        Ok(Self { n, perms })
    }

    /// Parses `"id;(123);(132)"`; the replica count is the largest label used.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(';').collect();
        let n = parts.iter().map(|p| max_label(p)).collect::<Result<Vec<_>>>()?.into_iter().max().unwrap_or(1);
        let perms = parts.iter().map(|p| Permutation::parse(p, n)).collect::<Result<_>>()?;
        Self::new(n, perms)
    }

    /// The third-order negativity spec `(id, (123), (132))`.
    pub fn i5() -> Self {
        let c = Permutation::cycle(3);
        Self { n: 3, perms: vec![Permutation::identity(3), c.clone(), c.inverse()] }
    }

    pub fn replicas(&self) -> usize {
        self.n
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn are_distinct(&self) -> bool {
        self.perms.iter().enumerate().all(|(i, p)| self.perms[i + 1..].iter().all(|q| q != p))
    }

    /// `(Ω' Ω_1, …, Ω' Ω_q)`.
    pub fn left_multiply(&self, omega: &Permutation) -> Result<Self> {
        Self::new(self.n, self.perms.iter().map(|p| omega.compose(p)).collect())
    }

    pub fn to_text(&self) -> String {
        self.perms.iter().map(|p| p.to_cycles()).collect::<Vec<_>>().join(";")
    }
}

fn work_units(total_dim: usize, n: usize) -> u128 {
    (total_dim as u128).checked_pow(n as u32).unwrap_or(u128::MAX)
}

/// `Z` for a normalized copy of `psi`, contracted replica by replica over the
/// support of `psi` with zero-product pruning.
pub fn multi_invariant<T: Real>(psi: &PureState<T>, spec: &ReplicaSpec) -> Result<C<T>> {
    let q = psi.num_sites();
    if spec.perms.len() != q {
        return Err(Error::WrongArity { expected: q, got: spec.perms.len() });
    }
    let n = spec.n;
    let work = work_units(psi.total_dim(), n);
    if work > WORK_GUARD {
        return Err(Error::SizeGuard(work, WORK_GUARD));
    }
    let psi = psi.to_normalized();
    let dims = psi.dims();
    let st = strides(dims);
    let amps = psi.amps();
    let support: Vec<usize> = (0..amps.len()).filter(|&i| amps[i] != czero()).collect();
    // contrib[i][r]: offset contributed by site r's digit of full index i
    let contrib: Vec<Vec<usize>> = (0..amps.len())
        .map(|i| (0..q).map(|r| (i / st[r]) % dims[r] * st[r]).collect())
        .collect();
    // factor x can be evaluated once every Ω_r(x) has been assigned
    let mut ready: Vec<Vec<usize>> = vec![Vec::new(); n];
    for x in 0..n {
        let last = spec.perms.iter().map(|p| p.apply(x)).max().unwrap_or(x);
        ready[last].push(x);
    }
    let ctx = Contraction { amps, support: &support, contrib: &contrib, spec, ready: &ready };
    let partials: Vec<C<T>> = support
        .par_iter()
        .map(|&first| {
            let mut assign = vec![0usize; n];
            assign[0] = first;
            ctx.descend(&mut assign, 0, amps[first].conj())
        })
        .collect();
    Ok(partials.into_iter().fold(czero(), |acc, z| acc + z))
}

struct Contraction<'a, T: Real> {
    amps: &'a [C<T>],
    support: &'a [usize],
    contrib: &'a [Vec<usize>],
    spec: &'a ReplicaSpec,
    ready: &'a [Vec<usize>],
}

impl<T: Real> Contraction<'_, T> {
    fn factor(&self, assign: &[usize], x: usize) -> C<T> {
        let idx: usize = self.spec.perms.iter().enumerate().map(|(r, p)| self.contrib[assign[p.apply(x)]][r]).sum();
        self.amps[idx]
    }

    /// Replica `depth` has just been assigned; `acc` carries its conjugate factor.
    fn descend(&self, assign: &mut [usize], depth: usize, mut acc: C<T>) -> C<T> {
        for &x in &self.ready[depth] {
            acc = acc * self.factor(assign, x);
        }
        if acc == czero() {
            return acc;
        }
        if depth + 1 == assign.len() {
            return acc;
        }
        let mut sum = czero();
        for &i in self.support {
            assign[depth + 1] = i;
            sum = sum + self.descend(assign, depth + 1, acc * self.amps[i].conj());
        }
        sum
    }
}

/// `Tr ρ_cutⁿ` through the cyclic replica permutation on the cut.
pub fn renyi_trace<T: Real>(psi: &PureState<T>, cut: &SiteSet, n: usize) -> Result<T> {
    if n == 0 {
        return Err(Error::BadPower);
    }
    let q = psi.num_sites();
    if let Some(&bad) = cut.sites().iter().find(|&&s| s >= q) {
        return Err(Error::InvalidSite { site: bad, sites: q });
    }
    let perms = (0..q)
        .map(|r| if cut.contains(r) { Permutation::cycle(n) } else { Permutation::identity(n) })
        .collect();
    Ok(multi_invariant(psi, &ReplicaSpec::new(n, perms)?)?.re)
}

/// Hypercube spec for the second Rényi multi-entropy: `N = 2^{q-1}` replicas
/// labelled by bit strings, site `r ≥ 1` flips bit `r - 1`.
pub fn multi_entropy2_spec(q: usize) -> Result<ReplicaSpec> {
    if q < 2 {
        return Err(Error::WrongArity { expected: 2, got: q });
    }
    let n = 1usize.checked_shl((q - 1) as u32).filter(|&n| n <= 1 << 20).ok_or(Error::SizeGuard(u128::MAX, WORK_GUARD))?;
    let perms = (0..q)
        .map(|r| {
            if r == 0 {
                Permutation::identity(n)
            } else {
                Permutation { image: (0..n).map(|x| x ^ (1 << (r - 1))).collect() }
            }
        })
        .collect();
    ReplicaSpec::new(n, perms)
}

pub fn multi_entropy2<T: Real>(psi: &PureState<T>) -> Result<T> {
    let spec = multi_entropy2_spec(psi.num_sites())?;
    Ok(multi_invariant(psi, &spec)?.re)
}

/// Result of the replica product test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductVerdict<T: Real> {
    pub is_product: bool,
    /// `1 - |Z|`.
    pub deficit: T,
}

/// Fully-product test `|Z| = 1` up to `tol` on the deficit.
pub fn product_criterion<T: Real>(psi: &PureState<T>, spec: &ReplicaSpec, tol: T) -> Result<ProductVerdict<T>> {
    if !spec.are_distinct() {
        return Err(Error::NonDistinctPermutations);
    }
    let deficit = T::one() - multi_invariant(psi, spec)?.norm();
    Ok(ProductVerdict { is_product: deficit < tol, deficit })
}

/// Largest `|2x2 minor|` over all single-site flattenings; zero exactly for
/// fully product states.
pub fn flattening_minor_defect<T: Real>(psi: &PureState<T>) -> T {
    let psi = psi.to_normalized();
    let q = psi.num_sites();
    let mut worst = T::zero();
    for r in 0..q {
        let m = psi.flatten(&SiteSet::new(&[r], q).expect("single site is valid"));
        for i in 0..m.rows() {
            for j in i + 1..m.rows() {
                for k in 0..m.cols() {
                    for l in k + 1..m.cols() {
                        let minor = m[(i, k)] * m[(j, l)] - m[(i, l)] * m[(j, k)];
                        worst = worst.max(minor.norm());
                    }
                }
            }
        }
    }
    worst
}

/// Rank-one flattening oracle for full productness.
pub fn is_product_by_flattening<T: Real>(psi: &PureState<T>, tol: T) -> bool {
    flattening_minor_defect(psi) < tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::make_pure;
    use crate::scalar::cr;

    fn ghz3() -> PureState<f64> {
        let mut a = vec![czero(); 8];
        a[0] = cr(1.0);
        a[7] = cr(1.0);
        make_pure(&[2, 2, 2], a, false).unwrap()
    }

    fn bell() -> PureState<f64> {
        make_pure(&[2, 2], vec![cr(1.0), czero(), czero(), cr(1.0)], false).unwrap()
    }

    #[test]
    fn parse_and_print_cycles() {
        assert!(parse_cycles("id", 3).unwrap().is_identity());
        let c = parse_cycles("(123)", 3).unwrap();
        assert_eq!(c.image(), &[1, 2, 0]);
        let t = parse_cycles("(12)(3)", 3).unwrap();
        assert_eq!(t.image(), &[1, 0, 2]);
        assert_eq!(t.to_cycles(), "(12)");
        assert_eq!(parse_cycles("(231)", 3).unwrap().to_cycles(), "(123)");
        assert_eq!(parse_cycles("(1,2,11)", 11).unwrap().to_cycles(), "(1,2,11)");
        assert!(parse_cycles("(121)", 3).is_err());
        assert!(parse_cycles("(14)", 3).is_err());
        assert!(parse_cycles("(12", 3).is_err());
    }

    #[test]
    fn compose_and_inverse() {
        let a = parse_cycles("(123)", 3).unwrap();
        let b = parse_cycles("(12)", 3).unwrap();
        assert_eq!(a.compose(&b).apply(0), a.apply(b.apply(0)));
        assert!(a.compose(&a.inverse()).is_identity());
    }

    #[test]
    fn spec_parsing_infers_replica_count() {
        let s = ReplicaSpec::parse("id;(123);(132)").unwrap();
        assert_eq!(s.replicas(), 3);
        assert_eq!(s, ReplicaSpec::i5());
        assert_eq!(s.to_text(), "id;(123);(132)");
    }

    #[test]
    fn named_values() {
        let s = ReplicaSpec::parse("id;(12)").unwrap();
        assert!((multi_invariant(&bell(), &s).unwrap() - cr(0.5)).norm() < 1e-15);
        assert!((multi_invariant(&ghz3(), &ReplicaSpec::i5()).unwrap() - cr(0.25)).norm() < 1e-15);
        let prod = PureState::<f64>::product(&[vec![cr(0.6), cr(0.8)], vec![cr(1.0), cr(1.0)], vec![czero(), cr(1.0)]]).unwrap();
        assert!((multi_invariant(&prod, &ReplicaSpec::i5()).unwrap().norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn renyi_examples() {
        let cut = SiteSet::new(&[1], 2).unwrap();
        assert!((renyi_trace(&bell(), &cut, 2).unwrap() - 0.5).abs() < 1e-15);
        let prod = PureState::<f64>::product(&[vec![cr(0.6), cr(0.8)], vec![cr(1.0), cr(1.0)]]).unwrap();
        assert!((renyi_trace(&prod, &cut, 5).unwrap() - 1.0).abs() < 1e-14);
        let mut g = vec![czero::<f64>(); 16];
        g[0] = cr(1.0);
        g[15] = cr(1.0);
        let ghz4 = make_pure(&[2, 2, 2, 2], g, false).unwrap();
        assert!((renyi_trace(&ghz4, &SiteSet::new(&[0, 1], 4).unwrap(), 3).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn multi_entropy_two_sites_is_purity() {
        assert!((multi_entropy2(&bell()).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn guard_and_arity() {
        let spec = ReplicaSpec::parse("id;(123456)").unwrap();
        let psi = make_pure::<f64>(&[4, 4], vec![cr(1.0); 16], false).unwrap();
        assert!(matches!(multi_invariant(&psi, &spec), Err(Error::SizeGuard(..))));
        assert!(matches!(multi_invariant(&bell(), &ReplicaSpec::i5()), Err(Error::WrongArity { .. })));
    }

    #[test]
    fn product_verdicts() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let prod = PureState::<f64>::product(&[vec![cr(1.0), czero()], vec![cr(h), cr(h)], vec![czero(), cr(1.0)]]).unwrap();
        let v = product_criterion(&prod, &ReplicaSpec::i5(), 1e-9f64).unwrap();
        assert!(v.is_product && v.deficit < 1e-12);
        let v = product_criterion(&ghz3(), &ReplicaSpec::i5(), 1e-9f64).unwrap();
        assert!(!v.is_product && (v.deficit - 0.75).abs() < 1e-15);
        let same = ReplicaSpec::parse("id;id;(123)").unwrap();
        assert_eq!(product_criterion(&ghz3(), &same, 1e-9), Err(Error::NonDistinctPermutations));
        assert!(is_product_by_flattening(&prod, 1e-12));
        assert!(!is_product_by_flattening(&ghz3(), 1e-12));
    }
}
