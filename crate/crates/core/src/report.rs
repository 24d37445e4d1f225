//! Aggregated measure reports: pairwise tangles, three-site measures and the
//! four-qubit invariants, keyed by stable names such as `tau_AB` or `phi_BCD`.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{PartialTrace, PureState, SiteSet};
use crate::separability::{convex_roof, RoofMeasure, RoofOptions};
use crate::tangle2::{two_tangle_pure, wootters_mixed};
use crate::tangle3::{i5_pt, phi_direct, three_tangle};
use crate::tangle4::quad_invariants;

/// Which group of measures to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureSet {
    Bipartite,
    Tripartite,
    Quadripartite,
    All,
}

impl std::str::FromStr for MeasureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bipartite" => Ok(Self::Bipartite),
            "tripartite" => Ok(Self::Tripartite),
            "quadripartite" => Ok(Self::Quadripartite),
            "all" => Ok(Self::All),
            other => Err(Error::Parse(format!("unknown measure set '{other}'"))),
        }
    }
}

/// How a value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    /// Convex-roof upper bound from the optimizer.
    Optimizer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureEntry {
    pub value: f64,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub restarts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub converged: Option<bool>,
}

impl MeasureEntry {
    fn closed(value: f64) -> Self {
        Self { value, provenance: Provenance::ClosedForm, restarts: None, seed: None, converged: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub set: MeasureSet,
    pub dims: Vec<usize>,
    pub entries: IndexMap<String, MeasureEntry>,
}

impl MeasureReport {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.entries.get(key).map(|e| e.value)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("measure,value,provenance,restarts,seed\n");
        for (k, e) in &self.entries {
            let opt = |x: Option<String>| x.unwrap_or_default();
            out.push_str(&format!(
                "{k},{:.17e},{},{},{}\n",
                e.value,
                provenance_name(e.provenance),
                opt(e.restarts.map(|r| r.to_string())),
                opt(e.seed.map(|s| s.to_string()))
            ));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{:<12} {:>22}  {}\n", "measure", "value", "source");
        for (k, e) in &self.entries {
            let src = match e.provenance {
                Provenance::ClosedForm => "closed form".to_string(),
                Provenance::Optimizer => {
                    format!("optimizer ({} restarts, seed {})", e.restarts.unwrap_or(0), e.seed.unwrap_or(0))
                }
            };
            out.push_str(&format!("{k:<12} {:>22.15}  {src}\n", e.value));
        }
        out
    }
}

fn provenance_name(p: Provenance) -> &'static str {
    match p {
        Provenance::ClosedForm => "closed_form",
        Provenance::Optimizer => "optimizer",
    }
}

/// Site label `A`, `B`, ... (`S10`, ... past 26 sites).
pub fn site_label(site: usize) -> String {
    if site < 26 {
        char::from(b'A' + site as u8).to_string()
    } else {
        format!("S{site}")
    }
}

fn label(sites: &[usize]) -> String {
    sites.iter().map(|&s| site_label(s)).collect()
}

fn all_qubits(dims: &[usize]) -> bool {
    dims.iter().all(|&d| d == 2)
}

fn wrong(dims: &[usize], expected: Vec<usize>) -> Error {
    Error::WrongDims { expected, got: dims.to_vec() }
}

fn roof_entry(rho: &crate::Density, measure: &RoofMeasure, opts: &RoofOptions) -> Result<MeasureEntry> {
    let est = convex_roof(rho, measure, opts)?;
    if est.exact {
        return Ok(MeasureEntry::closed(est.value));
    }
    Ok(MeasureEntry {
        value: est.value,
        provenance: Provenance::Optimizer,
        restarts: Some(est.restarts),
        seed: Some(est.seed),
        converged: Some(est.converged),
    })
}

fn bipartite(psi: &crate::State, out: &mut IndexMap<String, MeasureEntry>) -> Result<()> {
    let dims = psi.dims();
    let q = dims.len();
    if q < 2 {
        return Err(Error::WrongArity { expected: 2, got: q });
    }
    if q == 2 {
        let v = two_tangle_pure(psi, &SiteSet::new(&[0], 2)?)?;
        out.insert("tau_AB".into(), MeasureEntry::closed(v));
        return Ok(());
    }
    if !all_qubits(dims) {
        return Err(wrong(dims, vec![2; q]));
    }
    for i in 0..q {
        for j in i + 1..q {
            let rho = psi.partial_trace(&SiteSet::new(&[i, j], q)?)?;
            out.insert(format!("tau_{}", label(&[i, j])), MeasureEntry::closed(wootters_mixed(&rho)?));
        }
    }
    Ok(())
}

fn tripartite(psi: &crate::State, opts: &RoofOptions, out: &mut IndexMap<String, MeasureEntry>) -> Result<()> {
    let dims = psi.dims();
    match dims.len() {
        3 => {
            out.insert("i5".into(), MeasureEntry::closed(i5_pt(psi)?));
            if all_qubits(dims) {
                out.insert("tau_ABC".into(), MeasureEntry::closed(three_tangle(psi)?));
                out.insert("phi_ABC".into(), MeasureEntry::closed(phi_direct(psi)?));
            }
            Ok(())
        }
        4 if all_qubits(dims) => {
            let triples = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
            let reductions: Vec<_> =
                triples.iter().map(|t| psi.partial_trace(&SiteSet::new(t, 4)?)).collect::<Result<_>>()?;
            for (t, rho) in triples.iter().zip(&reductions) {
                out.insert(format!("tau_{}", label(t)), roof_entry(rho, &RoofMeasure::ThreeTangle, opts)?);
            }
            for (t, rho) in triples.iter().zip(&reductions) {
                out.insert(format!("phi_{}", label(t)), roof_entry(rho, &RoofMeasure::Phi, opts)?);
            }
            Ok(())
        }
        _ => Err(wrong(dims, vec![2; 4])),
    }
}

fn quadripartite(psi: &crate::State, out: &mut IndexMap<String, MeasureEntry>) -> Result<()> {
    let inv = quad_invariants(psi)?;
    out.insert("fourtangle".into(), MeasureEntry::closed(4.0 * inv.h.norm_sqr()));
    let [sigma, pi, delta] = inv.roots();
    out.insert("sigma_root".into(), MeasureEntry::closed(sigma));
    out.insert("pi_root".into(), MeasureEntry::closed(pi));
    out.insert("delta_root".into(), MeasureEntry::closed(delta));
    Ok(())
}

/// Computes `set` on the normalized state. Mixed reductions go through
/// [`convex_roof`] with `opts`; those entries carry restart count and seed.
pub fn measure_report(psi: &crate::State, set: MeasureSet, opts: &RoofOptions) -> Result<MeasureReport> {
    let psi = psi.to_normalized();
    let mut entries = IndexMap::new();
    let q = psi.num_sites();
    match set {
        MeasureSet::Bipartite => bipartite(&psi, &mut entries)?,
        MeasureSet::Tripartite => tripartite(&psi, opts, &mut entries)?,
        MeasureSet::Quadripartite => quadripartite(&psi, &mut entries)?,
        MeasureSet::All => {
            bipartite(&psi, &mut entries)?;
            if q == 3 || q == 4 {
                tripartite(&psi, opts, &mut entries)?;
            }
            if q == 4 {
                quadripartite(&psi, &mut entries)?;
            }
        }
    }
    Ok(MeasureReport { set, dims: psi.dims().to_vec(), entries })
}

/// The eighteen four-qubit measures: six two-tangles, four three-tangles,
/// four φ's, then `4|H|²`, `|Σ|^{1/2}`, `|Π|^{1/3}`, `|Δ|^{1/6}`.
pub fn measure_set_18(psi: &PureState<f64>) -> Result<MeasureReport> {
    measure_set_18_with(psi, &RoofOptions::default())
}

pub fn measure_set_18_with(psi: &PureState<f64>, opts: &RoofOptions) -> Result<MeasureReport> {
    crate::tangle2::require_qubits(psi.dims(), 4)?;
    measure_report(psi, MeasureSet::All, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{make_named, StateSpec};

    const KEYS: [&str; 18] = [
        "tau_AB", "tau_AC", "tau_AD", "tau_BC", "tau_BD", "tau_CD", "tau_ABC", "tau_ABD", "tau_ACD", "tau_BCD", "phi_ABC",
        "phi_ABD", "phi_ACD", "phi_BCD", "fourtangle", "sigma_root", "pi_root", "delta_root",
    ];

    fn quick() -> RoofOptions {
        RoofOptions { restarts: 4, ..RoofOptions::default() }
    }

    #[test]
    fn eighteen_keys_in_order() {
        let ghz: crate::State = make_named(&StateSpec::parse("ghz", "").unwrap(), true).unwrap();
        let r = measure_set_18_with(&ghz, &quick()).unwrap();
        assert_eq!(r.entries.keys().map(String::as_str).collect::<Vec<_>>(), KEYS);
        for (k, e) in &r.entries {
            let want = if k == "fourtangle" { 1.0 } else { 0.0 };
            assert!((e.value - want).abs() < 1e-10, "{k} = {}", e.value);
        }
        assert_eq!(r.entries["phi_ABC"].provenance, Provenance::Optimizer);
        assert_eq!(r.entries["phi_ABC"].restarts, Some(4));
        assert_eq!(r.entries["tau_AB"].provenance, Provenance::ClosedForm);
    }

    #[test]
    fn w3_tripartite() {
        let w: crate::State = make_named(&StateSpec::W3, true).unwrap();
        let r = measure_report(&w, MeasureSet::Tripartite, &quick()).unwrap();
        assert!((r.get("i5").unwrap() - 2.0 / 9.0).abs() < 1e-12);
        assert!((r.get("phi_ABC").unwrap() - 136.0 / 3.0).abs() < 1e-10);
        assert!(r.get("tau_ABC").unwrap().abs() < 1e-12);
        let all = measure_report(&w, MeasureSet::All, &quick()).unwrap();
        assert!((all.get("tau_AB").unwrap() - 4.0 / 9.0).abs() < 1e-10);
    }

    #[test]
    fn wrong_dims_are_rejected() {
        let w: crate::State = make_named(&StateSpec::W3, true).unwrap();
        assert!(measure_set_18(&w).is_err());
        assert!(measure_report(&w, MeasureSet::Quadripartite, &quick()).is_err());
        assert!("pairs".parse::<MeasureSet>().is_err());
    }

    #[test]
    fn renderings() {
        let w: crate::State = make_named(&StateSpec::W3, true).unwrap();
        let r = measure_report(&w, MeasureSet::Bipartite, &quick()).unwrap();
        assert_eq!(r.to_csv().lines().count(), 4);
        assert!(r.to_table().contains("tau_BC"));
        let back: MeasureReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
