//! The build → verify → count → fit → report stages and their artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clorbit::coding::{
    build_coset_acceptor, extend_verification, AugmentedShift, ComponentGraph, CosetOptions, LabeledAutomaton,
};
use clorbit::counting::{
    count_conjugacy_class, count_coset_orbit, count_full_orbit, estimate_c, fit_rate, length_comparison_audit,
    poincare_transfer, CEstimate, CountSeries, Enumerator, Grid, Measure, Poincare, RateFit,
};
use clorbit::output::{csv, sci};
use clorbit::potential::RoofFunction;
use clorbit::spectral::{maximal_path_multiplicity, system_delta, LatticeVerdict, SystemDelta};
use clorbit::{Error, Result};
use serde::Serialize;

use crate::config::Experiment;
use crate::json;

pub const PARTIAL_SUFFIX: &str = ".partial";

/// Files of one invocation. Each is first written with a `.partial` suffix
/// and renamed once every stage has succeeded.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    pending: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            pending: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        if path.exists() {
            fs::remove_file(&path)?;
        }
        fs::write(partial_path(&path), contents)?;
        if !self.pending.contains(&path) {
            self.pending.push(path);
        }
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, &json::to_string(value))
    }

    /// Renames every pending file to its final name.
    pub fn commit(self) -> Result<Vec<PathBuf>> {
        for path in &self.pending {
            fs::rename(partial_path(path), path)?;
        }
        Ok(self.pending)
    }
}

fn partial_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(PARTIAL_SUFFIX);
    PathBuf::from(s)
}

/// Acceptors, shifts and roof functions for the full orbit and for `Z(g)`.
pub struct Codings {
    pub geodesic: LabeledAutomaton,
    pub geodesic_roof: RoofFunction,
    pub geodesic_graph: ComponentGraph,
    pub coset: LabeledAutomaton,
    pub coset_roof: RoofFunction,
    pub coset_graph: ComponentGraph,
}

pub fn check_space(exp: &Experiment) -> Result<()> {
    exp.system.space.check_involution()
}

pub fn geodesic_acceptor(exp: &Experiment) -> LabeledAutomaton {
    LabeledAutomaton::geodesic(exp.gens())
}

pub fn coset_acceptor(exp: &Experiment) -> Result<LabeledAutomaton> {
    let c = &exp.config.coding;
    let opts = CosetOptions {
        signature_radius: c.signature_radius,
        verify_len: c.verify_len,
        state_budget: c.state_budget,
    };
    build_coset_acceptor(exp.gens(), &exp.g, &opts)
}

fn roof_for(exp: &Experiment, automaton: &LabeledAutomaton) -> Result<(RoofFunction, ComponentGraph)> {
    let shift = AugmentedShift::from_automaton(automaton);
    let graph = shift.scc_decompose();
    let roof = RoofFunction::new(exp.system.space.clone(), exp.system.basepoint.clone(), shift)?;
    Ok((roof, graph))
}

pub fn build_codings(exp: &Experiment) -> Result<Codings> {
    check_space(exp)?;
    let geodesic = geodesic_acceptor(exp);
    let coset = coset_acceptor(exp)?;
    let (geodesic_roof, geodesic_graph) = roof_for(exp, &geodesic)?;
    let (coset_roof, coset_graph) = roof_for(exp, &coset)?;
    Ok(Codings {
        geodesic,
        geodesic_roof,
        geodesic_graph,
        coset,
        coset_roof,
        coset_graph,
    })
}

/// Extends the verified range of the coset acceptor far enough for an
/// enumeration of `measure` up to `t_max`.
pub fn ensure_verified(exp: &Experiment, coset: &mut LabeledAutomaton, measure: Measure, t_max: f64) -> Result<()> {
    let need = Enumerator::new(&exp.system, coset, measure)?.max_length(t_max)?;
    extend_verification(exp.gens(), &exp.g, coset, need)
}

pub fn delta_by_depth(codings: &Codings, depths: &[usize]) -> Result<Vec<(usize, f64)>> {
    depths
        .iter()
        .map(|&d| Ok((d, system_delta(&codings.geodesic_roof, &codings.geodesic_graph, d)?.delta)))
        .collect()
}

pub fn delta_csv(rows: &[(usize, f64)]) -> String {
    csv(&["depth", "delta"], rows.iter().map(|(d, v)| vec![d.to_string(), sci(*v)]))
}

/// Structure of the coset shift: block order, maximal components and `m`.
#[derive(Clone, Debug, Serialize)]
pub struct Structure {
    pub components: usize,
    pub block_triangular: bool,
    pub exponents: Vec<(usize, f64)>,
    pub maximal: Vec<usize>,
    pub m: usize,
    pub delta: f64,
}

pub fn structure(codings: &Codings, depth: usize) -> Result<Structure> {
    let shift = codings.coset_roof.shift();
    let block_triangular = codings.coset_graph.check_block_triangular(shift).is_ok();
    let sd = system_delta(&codings.coset_roof, &codings.coset_graph, depth)?;
    Ok(Structure {
        components: codings.coset_graph.len(),
        block_triangular,
        m: maximal_path_multiplicity(&codings.coset_graph, &sd.maximal),
        exponents: sd.exponents.clone(),
        maximal: sd.maximal.clone(),
        delta: sd.delta,
    })
}

fn structure_csv(s: &Structure) -> String {
    csv(
        &["component", "exponent", "maximal"],
        s.exponents
            .iter()
            .map(|(c, a)| vec![c.to_string(), sci(*a), s.maximal.contains(c).to_string()]),
    )
}

fn lattice_csv(v: &LatticeVerdict) -> String {
    let (span, witness, distinct) = match v {
        LatticeVerdict::Arithmetic { span } => (sci(*span), String::new(), String::new()),
        LatticeVerdict::NonArithmetic { witness } => (String::new(), format!("{} {}", sci(witness.0), sci(witness.1)), String::new()),
        LatticeVerdict::Inconclusive { distinct } => (String::new(), String::new(), distinct.to_string()),
    };
    csv(&["verdict", "span", "witness", "distinct"], [vec![v.label().to_string(), span, witness, distinct]])
}

pub fn lattice_span(v: &LatticeVerdict) -> Option<f64> {
    match v {
        LatticeVerdict::Arithmetic { span } => Some(*span),
        _ => None,
    }
}

/// Realized values on arithmetic systems, so that fits see only jumps;
/// the configured uniform grid otherwise.
pub fn grid_for(exp: &Experiment, verdict: &LatticeVerdict) -> Grid {
    if verdict.is_arithmetic() {
        Grid::Realized
    } else {
        Grid::Uniform {
            step: exp.config.counting.grid_step,
        }
    }
}

/// Errors at or below this are floating-point noise around an exact zero.
const AUDIT_NOISE: f64 = 1e-12;

/// Least-squares `ρ̂ = exp(slope)` of `log error` against depth, over the
/// errors above the noise floor; `None` with fewer than two of them.
pub fn audit_ratio(rows: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.1 > AUDIT_NOISE).map(|&(l, e)| (l as f64, e.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some((sxy / sxx).exp())
}

fn audit_csv(rows: &[(usize, f64)]) -> String {
    csv(&["l", "max_error"], rows.iter().map(|(l, e)| vec![l.to_string(), sci(*e)]))
}

fn c_csv(c: &CEstimate) -> String {
    csv(
        &["prefix", "count", "c_u", "tau"],
        c.terms
            .iter()
            .map(|t| vec![t.prefix.clone(), t.count.to_string(), sci(t.c_u), sci(t.tau)]),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct PoincareRow {
    pub s: f64,
    pub eta: Option<f64>,
    /// `η(s)·(s − δ)`, roughly constant near a simple pole.
    pub eta_times_gap: Option<f64>,
    pub near_pole: bool,
    pub divergent: bool,
}

pub fn poincare_rows(codings: &Codings, depth: usize, delta: f64, offsets: &[f64]) -> Result<Vec<PoincareRow>> {
    offsets
        .iter()
        .map(|&eps| {
            let s = delta + eps;
            Ok(match poincare_transfer(&codings.geodesic_roof, depth, s, delta)? {
                Poincare::Converged { value, near_pole, .. } => PoincareRow {
                    s,
                    eta: Some(value),
                    eta_times_gap: Some(value * eps),
                    near_pole,
                    divergent: false,
                },
                Poincare::Divergent { .. } => PoincareRow {
                    s,
                    eta: None,
                    eta_times_gap: None,
                    near_pole: true,
                    divergent: true,
                },
            })
        })
        .collect()
}

fn poincare_csv(rows: &[PoincareRow]) -> String {
    let opt = |x: Option<f64>| x.map(sci).unwrap_or_default();
    csv(
        &["s", "eta", "eta_times_gap", "near_pole", "divergent"],
        rows.iter().map(|r| {
            vec![sci(r.s), opt(r.eta), opt(r.eta_times_gap), r.near_pole.to_string(), r.divergent.to_string()]
        }),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct CSummary {
    pub l: usize,
    pub t_ref: f64,
    pub value: f64,
    pub low_confidence: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub name: String,
    pub config_hash: String,
    pub g: String,
    pub delta_pressure: f64,
    pub delta_pressure_depth: usize,
    pub delta_by_depth: Vec<(usize, f64)>,
    pub delta_fit: f64,
    pub coset_rate: f64,
    pub conjugacy_rate: f64,
    /// `conjugacy_rate / delta_pressure`.
    pub ratio: f64,
    pub m: usize,
    pub maximal_components: usize,
    pub block_triangular: bool,
    pub coset_delta: f64,
    pub lattice_verdict: String,
    pub lattice_span: Option<f64>,
    /// Set when the length spectrum is arithmetic: mixing fails and the
    /// smooth asymptotic is replaced by fits on the realized lattice.
    pub mixing_hypothesis_flag: bool,
    /// Restricted series never exceed the full-orbit series.
    pub dominated: bool,
    pub audit: Vec<(usize, f64)>,
    pub audit_rho: Option<f64>,
    pub c_estimates: Vec<CSummary>,
    /// `C·e^{δT/2} / N(T)` at the last conjugacy threshold.
    pub c_prediction_ratio: Option<f64>,
    pub poincare: Vec<PoincareRow>,
    pub hoelder: Vec<(usize, f64)>,
    /// The artifact each quantity is read from.
    pub provenance: BTreeMap<String, String>,
}

fn dominated(restricted: &CountSeries, full: &CountSeries) -> bool {
    let t_full = full.thresholds.last().copied().unwrap_or(f64::NEG_INFINITY);
    restricted
        .thresholds
        .iter()
        .zip(&restricted.counts)
        .filter(|(t, _)| **t <= t_full)
        .all(|(t, n)| full.count_at(*t + 1e-9).is_some_and(|m| *n <= m))
}

/// The whole pipeline, writing every artifact into `art`.
pub fn run(exp: &Experiment, art: &mut Artifacts) -> Result<Summary> {
    let cfg = &exp.config;
    let depth = cfg.potential.depth;
    let mut codings = build_codings(exp)?;
    art.write("acceptor.txt", &codings.geodesic.to_text(exp.gens()))?;

    let mut depths = cfg.potential.stability_depths.clone();
    if !depths.contains(&depth) {
        depths.push(depth);
    }
    depths.sort_unstable();
    let by_depth = delta_by_depth(&codings, &depths)?;
    art.write("delta_by_depth.csv", &delta_csv(&by_depth))?;
    let sd: SystemDelta = system_delta(&codings.geodesic_roof, &codings.geodesic_graph, depth)?;
    let delta = sd.delta;
    let maximal = sd.maximal_transfer();
    let curve = maximal.pressure_curve(&cfg.potential.pressure_t)?;
    art.write("pressure_curve.csv", &curve.to_csv())?;
    let verdict = maximal.lattice_test(cfg.potential.lattice_max_period)?;
    art.write("lattice.csv", &lattice_csv(&verdict))?;
    let span = lattice_span(&verdict);

    let st = structure(&codings, depth)?;
    art.write("components.csv", &structure_csv(&st))?;
    let hoelder = codings
        .geodesic_roof
        .hoelder_audit(&cfg.potential.hoelder_depths, cfg.potential.hoelder_extra)?;
    art.write(
        "hoelder.csv",
        &csv(&["depth", "oscillation"], hoelder.iter().map(|(d, o)| vec![d.to_string(), sci(*o)])),
    )?;

    let cn = &cfg.counting;
    let grid = grid_for(exp, &verdict);
    let full = count_full_orbit(&exp.system, &codings.geodesic, &grid, cn.t_max_full)?.with_provenance(&exp.hash);
    art.write("count_full.csv", &full.to_csv())?;
    ensure_verified(exp, &mut codings.coset, Measure::Displacement, cn.t_max_coset)?;
    let coset = count_coset_orbit(&exp.system, &codings.coset, &grid, cn.t_max_coset)?.with_provenance(&exp.hash);
    art.write("count_coset.csv", &coset.to_csv())?;
    ensure_verified(exp, &mut codings.coset, Measure::Conjugate(exp.g.clone()), cn.t_max_conjugacy)?;
    let conj = count_conjugacy_class(&exp.system, &codings.coset, &exp.g, &grid, cn.t_max_conjugacy)?
        .with_provenance(&exp.hash);
    art.write("count_conjugacy.csv", &conj.to_csv())?;

    let fit = |s: &CountSeries, w: [f64; 2]| fit_rate(s, (w[0], w[1]), span);
    let fit_full = fit(&full, cn.fit_window_full)?;
    let fit_coset = fit(&coset, cn.fit_window_coset)?;
    let fit_conj = fit(&conj, cn.fit_window_conjugacy)?;
    art.write_json("fit_full.json", &fit_json(&fit_full))?;
    art.write_json("fit_coset.json", &fit_json(&fit_coset))?;
    art.write_json("fit_conjugacy.json", &fit_json(&fit_conj))?;

    let deepest = cn.audit_depths.iter().max().copied().unwrap_or(0) + cn.audit_extension;
    extend_verification(exp.gens(), &exp.g, &mut codings.coset, deepest)?;
    let audit = length_comparison_audit(&exp.system, &codings.coset, &exp.g, &cn.audit_depths, cn.audit_extension)?;
    art.write("audit.csv", &audit_csv(&audit))?;

    let t_ref = cn.c_t_ref.unwrap_or(cn.t_max_coset);
    ensure_verified(exp, &mut codings.coset, Measure::Displacement, t_ref)?;
    let mut c_estimates = Vec::new();
    let mut last_c = None;
    for &l in &cn.c_lengths {
        let c = estimate_c(&exp.system, &codings.coset, &exp.g, l, t_ref, delta)?;
        art.write(&format!("c_estimate_l{l}.csv"), &c_csv(&c))?;
        c_estimates.push(CSummary {
            l,
            t_ref,
            value: c.value,
            low_confidence: c.low_confidence,
        });
        last_c = Some(c.value);
    }
    let c_prediction_ratio = match (last_c, conj.thresholds.last(), conj.counts.last()) {
        (Some(c), Some(&t), Some(&n)) if n > 0 => Some(c * (delta * t / 2.0).exp() / n as f64),
        _ => None,
    };

    let poincare = poincare_rows(&codings, depth, delta, &cn.poincare_offsets)?;
    art.write("poincare.csv", &poincare_csv(&poincare))?;
    art.write("coset_acceptor.txt", &codings.coset.to_text(exp.gens()))?;

    let provenance = [
        ("delta_pressure", "delta_by_depth.csv"),
        ("delta_by_depth", "delta_by_depth.csv"),
        ("delta_fit", "fit_full.json"),
        ("coset_rate", "fit_coset.json"),
        ("conjugacy_rate", "fit_conjugacy.json"),
        ("ratio", "fit_conjugacy.json"),
        ("m", "components.csv"),
        ("maximal_components", "components.csv"),
        ("block_triangular", "components.csv"),
        ("coset_delta", "components.csv"),
        ("lattice_verdict", "lattice.csv"),
        ("lattice_span", "lattice.csv"),
        ("mixing_hypothesis_flag", "lattice.csv"),
        ("dominated", "count_full.csv"),
        ("audit", "audit.csv"),
        ("audit_rho", "audit.csv"),
        ("c_estimates", "c_estimate_l*.csv"),
        ("c_prediction_ratio", "count_conjugacy.csv"),
        ("poincare", "poincare.csv"),
        ("hoelder", "hoelder.csv"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect();

    let summary = Summary {
        name: cfg.name.clone(),
        config_hash: exp.hash.clone(),
        g: exp.gens().format(exp.g.letters()),
        delta_pressure: delta,
        delta_pressure_depth: depth,
        delta_by_depth: by_depth,
        delta_fit: fit_full.rate,
        coset_rate: fit_coset.rate,
        conjugacy_rate: fit_conj.rate,
        ratio: fit_conj.rate / delta,
        m: st.m,
        maximal_components: st.maximal.len(),
        block_triangular: st.block_triangular,
        coset_delta: st.delta,
        lattice_verdict: verdict.label().to_string(),
        lattice_span: span,
        mixing_hypothesis_flag: verdict.is_arithmetic(),
        dominated: dominated(&coset, &full) && dominated(&conj, &full),
        audit_rho: audit_ratio(&audit),
        audit,
        c_estimates,
        c_prediction_ratio,
        poincare,
        hoelder,
        provenance,
    };
    art.write_json("summary.json", &summary)?;
    Ok(summary)
}

/// RateFit as a JSON object with the window as a two-element array.
pub fn fit_json(f: &RateFit) -> serde_json::Value {
    serde_json::json!({
        "rate": f.rate,
        "intercept": f.intercept,
        "window": [f.window.0, f.window.1],
        "residual": f.residual,
        "lattice_mode": f.lattice_mode,
        "points": f.points,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub name: String,
    pub config_hash: String,
    pub checks: Vec<CheckResult>,
    pub lattice_verdict: Option<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn record(checks: &mut Vec<CheckResult>, name: &str, r: Result<String>) -> bool {
    let (passed, detail) = match r {
        Ok(d) => (true, d),
        Err(e) => (false, format!("[{}] {e}", e.code())),
    };
    checks.push(CheckResult {
        name: name.to_string(),
        passed,
        detail,
    });
    passed
}

/// Oracle and invariant checks without any counting.
pub fn verify(exp: &Experiment) -> VerifyReport {
    let cfg = &exp.config;
    let mut checks = Vec::new();
    let mut lattice_verdict = None;
    let space_ok = record(&mut checks, "involution", check_space(exp).map(|()| "letters pair as inverse isometries".into()));
    if space_ok {
        let geodesic = geodesic_acceptor(exp);
        record(&mut checks, "geodesic-acceptor", check_geodesic_language(exp, &geodesic, cfg.coding.verify_len));
        let coset = coset_acceptor(exp);
        let coset_ok = record(
            &mut checks,
            "coset-acceptor",
            coset
                .as_ref()
                .map(|a| format!("{} states, matches the oracle to length {}", a.num_vertices(), cfg.coding.verify_len))
                .map_err(clone_error),
        );
        if let (true, Ok(mut coset)) = (coset_ok, coset) {
            record(&mut checks, "coset-language", check_geodesic_language(exp, &coset, cfg.coding.verify_len));
            match build_codings(exp) {
                Ok(codings) => {
                    record(&mut checks, "birkhoff", check_birkhoff(&codings, cfg.potential.depth + 2));
                    record(
                        &mut checks,
                        "block-triangular",
                        codings
                            .coset_graph
                            .check_block_triangular(codings.coset_roof.shift())
                            .map(|()| format!("{} components", codings.coset_graph.len())),
                    );
                    match system_delta(&codings.geodesic_roof, &codings.geodesic_graph, cfg.potential.depth)
                        .and_then(|sd| sd.maximal_transfer().lattice_test(cfg.potential.lattice_max_period))
                    {
                        Ok(v) => lattice_verdict = Some(v.label().to_string()),
                        Err(e) => {
                            record(&mut checks, "lattice", Err(e));
                        }
                    }
                }
                Err(e) => {
                    record(&mut checks, "codings", Err(e));
                }
            }
            record(&mut checks, "length-comparison", check_audit(exp, &mut coset));
        }
    }
    VerifyReport {
        name: cfg.name.clone(),
        config_hash: exp.hash.clone(),
        checks,
        lattice_verdict,
    }
}

fn clone_error(e: &Error) -> Error {
    match e {
        Error::UnstableCoding { reason, verified_len } => Error::UnstableCoding {
            reason: reason.clone(),
            verified_len: *verified_len,
        },
        other => Error::Check(other.to_string()),
    }
}

/// Accepted words are reduced, prefix-closed and the acceptor is
/// deterministic, on all words up to `len`.
fn check_geodesic_language(exp: &Experiment, a: &LabeledAutomaton, len: usize) -> Result<String> {
    let words = a.words_up_to(len);
    for w in &words {
        if !exp.gens().is_reduced(w) {
            return Err(Error::Check(format!("accepts the unreduced word {}", exp.gens().format(w))));
        }
        if !w.is_empty() && !a.accepts(&w[..w.len() - 1]) {
            return Err(Error::Check(format!("{} is accepted but its prefix is not", exp.gens().format(w))));
        }
    }
    Ok(format!("{} accepted words up to length {len}", words.len()))
}

fn check_birkhoff(codings: &Codings, depth: usize) -> Result<String> {
    let roof = &codings.geodesic_roof;
    let start = roof.shift().start();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for path in roof.paths(depth).into_iter().filter(|p| p[0] == start) {
        let (lhs, rhs) = roof.birkhoff_displacement_check(&path)?;
        worst = worst.max((lhs - rhs).abs() / rhs.abs().max(1.0));
        count += 1;
    }
    if worst > 1e-9 {
        return Err(Error::Check(format!("Birkhoff sums differ from displacements by {worst}")));
    }
    Ok(format!("{count} paths of length {depth}, relative deviation {worst:e}"))
}

/// Trees: zero error once prefixes are as long as `g`. Half-plane: errors
/// do not grow with the depth.
fn check_audit(exp: &Experiment, coset: &mut LabeledAutomaton) -> Result<String> {
    let cn = &exp.config.counting;
    let deepest = cn.audit_depths.iter().max().copied().unwrap_or(0) + cn.audit_extension;
    extend_verification(exp.gens(), &exp.g, coset, deepest)?;
    let rows = length_comparison_audit(&exp.system, coset, &exp.g, &cn.audit_depths, cn.audit_extension)?;
    if exp.system.space.is_tree() {
        if let Some((l, e)) = rows.iter().find(|(l, e)| *l >= exp.g.len() && *e > 1e-9) {
            return Err(Error::Check(format!("error {e} at depth {l} on a tree")));
        }
    } else if let Some(w) = rows.windows(2).find(|w| w[1].1 > w[0].1 + 1e-12) {
        return Err(Error::Check(format!("error grows from depth {} to {}", w[0].0, w[1].0)));
    }
    Ok(rows.iter().map(|(l, e)| format!("l={l}: {e:e}")).collect::<Vec<_>>().join(", "))
}
