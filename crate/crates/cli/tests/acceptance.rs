//! Acceptance suite: one PASS/FAIL line per criterion on stderr, and a
//! failing test if any criterion fails.

#[path = "../../core/tests/support/properties.rs"]
mod properties;

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use clorbit::coding::{build_coset_acceptor, AugmentedShift, CosetOptions};
use clorbit::counting::{
    count_conjugacy_class, count_full_orbit, estimate_c, fit_rate, length_comparison_audit, Measure,
};
use clorbit::potential::ConstantRoof;
use clorbit::spectral::{maximal_path_multiplicity, system_delta, ComponentTransfer, LatticeVerdict};
use clorbit_cli::config::{Experiment, ExperimentConfig};
use clorbit_cli::pipeline::{self, Artifacts};

type Outcome = Result<String, String>;

fn config(name: &str) -> Experiment {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", &format!("{name}.toml")]
        .iter()
        .collect();
    ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn within(elapsed: Duration, secs: u64) -> Result<(), String> {
    ensure(elapsed < Duration::from_secs(secs), || format!("took {elapsed:.1?}, limit {secs} s"))
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

/// Conjugacy counts 3ⁿ at T = 2n + 1, the half-rate fit, the full-orbit fit
/// and their ratio on the unit tree.
fn tree_conjugacy() -> Outcome {
    let start = Instant::now();
    let exp = config("f2_unit_tree_g_a");
    let cn = &exp.config.counting;
    let mut c = pipeline::build_codings(&exp).map_err(e)?;
    let sd = system_delta(&c.geodesic_roof, &c.geodesic_graph, exp.config.potential.depth).map_err(e)?;
    let verdict = sd.maximal_transfer().lattice_test(exp.config.potential.lattice_max_period).map_err(e)?;
    let span = pipeline::lattice_span(&verdict);
    let grid = pipeline::grid_for(&exp, &verdict);

    pipeline::ensure_verified(&exp, &mut c.coset, Measure::Conjugate(exp.g.clone()), 21.0).map_err(e)?;
    let conj = count_conjugacy_class(&exp.system, &c.coset, &exp.g, &grid, 21.0).map_err(e)?;
    for n in 0..=10 {
        let t = (2 * n + 1) as f64;
        let want = 3u64.pow(n);
        ensure(conj.count_at(t) == Some(want), || format!("N({t}) = {:?}, expected {want}", conj.count_at(t)))?;
    }
    let conj_fit = fit_rate(&conj, (7.0, 21.0), span).map_err(e)?;
    let full = count_full_orbit(&exp.system, &c.geodesic, &grid, cn.t_max_full).map_err(e)?;
    let full_fit = fit_rate(&full, (cn.fit_window_full[0], cn.fit_window_full[1]), span).map_err(e)?;
    let log3 = 3f64.ln();
    ensure(rel(conj_fit.rate, log3 / 2.0) < 0.05, || format!("conjugacy rate {}", conj_fit.rate))?;
    ensure(rel(full_fit.rate, log3) < 0.01, || format!("full-orbit rate {}", full_fit.rate))?;
    let ratio = conj_fit.rate / sd.delta;
    ensure((0.475..=0.525).contains(&ratio), || format!("ratio {ratio}"))?;
    within(start.elapsed(), 10)?;
    Ok(format!(
        "N(2n+1) = 3^n for n <= 10, conjugacy rate {:.6}, full rate {:.6}, ratio {ratio:.6}",
        conj_fit.rate, full_fit.rate
    ))
}

/// Critical exponent of the Cannon core at several depths, and Cauchy
/// pressure roots on the Schottky example matching the full-orbit fit.
fn pressure_equals_exponent() -> Outcome {
    let start = Instant::now();
    let tree = config("f2_unit_tree_g_a");
    let c = pipeline::build_codings(&tree).map_err(e)?;
    let sd = system_delta(&c.geodesic_roof, &c.geodesic_graph, 1).map_err(e)?;
    for depth in 1..=4 {
        let tr = ComponentTransfer::new(&c.geodesic_roof, &c.geodesic_graph, sd.maximal[0], depth).map_err(e)?;
        let a = tr.critical_exponent().map_err(e)?;
        ensure((a - 3f64.ln()).abs() < 1e-9, || format!("depth {depth}: exponent {a}"))?;
    }

    let exp = config("schottky_pair");
    let c = pipeline::build_codings(&exp).map_err(e)?;
    let rows = pipeline::delta_by_depth(&c, &[4, 5, 6]).map_err(e)?;
    let d: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let (g1, g2) = ((d[1] - d[0]).abs(), (d[2] - d[1]).abs());
    ensure(g2 * 2.0 <= g1, || format!("gaps {g1:e}, {g2:e} do not halve"))?;
    let cn = &exp.config.counting;
    let sdh = system_delta(&c.geodesic_roof, &c.geodesic_graph, 6).map_err(e)?;
    let verdict = sdh.maximal_transfer().lattice_test(exp.config.potential.lattice_max_period).map_err(e)?;
    let grid = pipeline::grid_for(&exp, &verdict);
    let full = count_full_orbit(&exp.system, &c.geodesic, &grid, cn.t_max_full).map_err(e)?;
    let fit = fit_rate(&full, (cn.fit_window_full[0], cn.fit_window_full[1]), pipeline::lattice_span(&verdict))
        .map_err(e)?;
    ensure(rel(d[2], fit.rate) < 0.05, || format!("root {} vs fit {}", d[2], fit.rate))?;
    within(start.elapsed(), 60)?;
    Ok(format!(
        "tree exponent log 3 at depths 1..4; Schottky roots {:.6} {:.6} {:.6}, gaps {g1:.2e} {g2:.2e}, fit {:.6}",
        d[0], d[1], d[2], fit.rate
    ))
}

/// Words over `aAbB` as strings, reduced and ordered independently of the
/// library.
mod words {
    const ORDER: &str = "aAbB";

    pub fn inv(c: char) -> char {
        if c.is_ascii_lowercase() {
            c.to_ascii_uppercase()
        } else {
            c.to_ascii_lowercase()
        }
    }

    pub fn reduce(w: &str) -> String {
        let mut out: Vec<char> = Vec::new();
        for c in w.chars() {
            if out.last() == Some(&inv(c)) {
                out.pop();
            } else {
                out.push(c);
            }
        }
        out.into_iter().collect()
    }

    pub fn inverse(w: &str) -> String {
        w.chars().rev().map(inv).collect()
    }

    pub fn shortlex_less(u: &str, v: &str) -> bool {
        let key = |w: &str| (w.len(), w.chars().map(|c| ORDER.find(c).unwrap()).collect::<Vec<_>>());
        key(u) < key(v)
    }

    pub fn all_reduced(max_len: usize) -> Vec<String> {
        let mut out = vec![String::new()];
        let mut layer = vec![String::new()];
        for _ in 0..max_len {
            layer = layer
                .iter()
                .flat_map(|w| {
                    ORDER
                        .chars()
                        .filter(move |&c| !w.ends_with(inv(c)))
                        .map(move |c| format!("{w}{c}"))
                })
                .collect();
            out.extend(layer.iter().cloned());
        }
        out
    }

    /// `(w, r)` with `g = w·r^k·w⁻¹` and `r` cyclically reduced and primitive.
    pub fn root(g: &str) -> (String, String) {
        let g: Vec<char> = reduce(g).chars().collect();
        let mut k = 0;
        while k < g.len() / 2 && g[g.len() - 1 - k] == inv(g[k]) {
            k += 1;
        }
        let core = &g[k..g.len() - k];
        let n = core.len();
        let p = (1..=n).find(|&p| n.is_multiple_of(p) && core.iter().enumerate().all(|(i, c)| *c == core[i % p])).unwrap();
        (g[..k].iter().collect(), core[..p].iter().collect())
    }

    /// Nontrivial centralizer elements `w·r^j·w⁻¹` of length at most `max_len`.
    pub fn centralizer(g: &str, max_len: usize) -> Vec<String> {
        let (w, r) = root(g);
        let mut out = Vec::new();
        for j in 1..=max_len {
            let pos = reduce(&format!("{w}{}{}", r.repeat(j), inverse(&w)));
            if pos.len() > max_len {
                break;
            }
            out.push(inverse(&pos));
            out.push(pos);
        }
        out
    }

    /// Shortlex-minimal representatives of `Z(g)u` of length at most `max_len`.
    pub fn minimal_representatives(g: &str, max_len: usize) -> Vec<String> {
        let zs = centralizer(g, 2 * max_len);
        all_reduced(max_len)
            .into_iter()
            .filter(|u| {
                zs.iter()
                    .filter(|z| z.len() <= 2 * u.len())
                    .all(|z| !shortlex_less(&reduce(&format!("{z}{u}")), u))
            })
            .collect()
    }
}

/// Coset acceptors against an independent minimal-representative oracle.
fn coset_certification() -> Outcome {
    let start = Instant::now();
    let gens = clorbit::group::GeneratorSet::free(2).map_err(e)?.with_order("aAbB").map_err(e)?;
    let mut details = Vec::new();
    for g in ["a", "ab", "abAB", "babABB"] {
        let word = gens.parse(g).map_err(e)?;
        let acc = build_coset_acceptor(&gens, &word, &CosetOptions::default()).map_err(e)?;
        // The library prints the identity as "e".
        let accepted: BTreeSet<String> = acc
            .words_up_to(8)
            .iter()
            .map(|w| if w.is_empty() { String::new() } else { gens.format(w) })
            .collect();
        let oracle: BTreeSet<String> = words::minimal_representatives(g, 8).into_iter().collect();
        let extra = accepted.difference(&oracle).count();
        let missing = oracle.difference(&accepted).count();
        ensure(extra == 0 && missing == 0, || {
            let ex: Vec<_> = accepted.difference(&oracle).take(3).collect();
            let mi: Vec<_> = oracle.difference(&accepted).take(3).collect();
            format!("g = {g}: {extra} extra {ex:?}, {missing} missing {mi:?}")
        })?;
        for w in &accepted {
            ensure(words::reduce(w) == *w, || format!("g = {g}: {w} is not geodesic"))?;
            let parent = &w[..w.len().saturating_sub(1)];
            ensure(accepted.contains(parent), || format!("g = {g}: prefix of {w} rejected"))?;
        }
        details.push(format!("{g}: {}", accepted.len()));
    }
    within(start.elapsed(), 30)?;
    Ok(format!("zero mismatches to length 8 ({})", details.join(", ")))
}

/// Two complete blocks joined by one edge: both maximal, on one path.
fn two_maximal_chain() -> Result<usize, String> {
    let mut edges = vec![(0, 3)];
    for block in [[0, 1, 2], [3, 4, 5]] {
        for &u in &block {
            for &v in &block {
                edges.push((u, v));
            }
        }
    }
    let roof = ConstantRoof {
        shift: AugmentedShift::from_edges(6, &edges).map_err(e)?,
        value: 1.0,
    };
    let graph = roof.shift.scc_decompose();
    let sd = system_delta(&roof, &graph, 1).map_err(e)?;
    Ok(maximal_path_multiplicity(&graph, &sd.maximal))
}

/// Block-triangular order, one maximal component and `m = 1` for every
/// shipped system; `m = 2` on the synthetic chain.
fn structure() -> Outcome {
    let mut details = Vec::new();
    for name in ["f2_unit_tree_g_a", "f2_weighted_sqrt2", "schottky_pair"] {
        let exp = config(name);
        let c = pipeline::build_codings(&exp).map_err(e)?;
        let depth = exp.config.potential.depth;
        for (label, roof, graph) in [
            ("geodesic", &c.geodesic_roof, &c.geodesic_graph),
            ("coset", &c.coset_roof, &c.coset_graph),
        ] {
            graph.check_block_triangular(roof.shift()).map_err(|err| format!("{name} {label}: {err}"))?;
            let sd = system_delta(roof, graph, depth).map_err(e)?;
            let m = maximal_path_multiplicity(graph, &sd.maximal);
            ensure(sd.maximal.len() == 1 && m == 1, || {
                format!("{name} {label}: {} maximal components, m = {m}", sd.maximal.len())
            })?;
        }
        details.push(name);
    }
    let m = two_maximal_chain()?;
    ensure(m == 2, || format!("synthetic chain gives m = {m}"))?;
    Ok(format!("{}: one maximal component, m = 1; synthetic chain m = 2", details.join(", ")))
}

/// Exact comparison on the tree and geometric decay on the Schottky example.
fn length_comparison() -> Outcome {
    let tree = config("f2_unit_tree_g_a");
    let mut c = pipeline::build_codings(&tree).map_err(e)?;
    let depths: Vec<usize> = (1..=6).collect();
    let ext = tree.config.counting.audit_extension;
    clorbit::coding::extend_verification(tree.gens(), &tree.g, &mut c.coset, 6 + ext).map_err(e)?;
    let rows = length_comparison_audit(&tree.system, &c.coset, &tree.g, &depths, ext).map_err(e)?;
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    ensure(worst == 0.0, || format!("tree errors {rows:?}"))?;

    let exp = config("schottky_pair");
    let mut c = pipeline::build_codings(&exp).map_err(e)?;
    let depths: Vec<usize> = (2..=8).collect();
    let ext = exp.config.counting.audit_extension;
    clorbit::coding::extend_verification(exp.gens(), &exp.g, &mut c.coset, 8 + ext).map_err(e)?;
    let rows = length_comparison_audit(&exp.system, &c.coset, &exp.g, &depths, ext).map_err(e)?;
    ensure(rows.windows(2).all(|w| w[1].1 <= w[0].1), || format!("Schottky errors grow: {rows:?}"))?;
    let rho = pipeline::audit_ratio(&rows).ok_or("no positive Schottky errors")?;
    ensure(rho < 1.0, || format!("rho {rho}"))?;
    Ok(format!(
        "tree max error 0 for l = 1..6; Schottky errors {:.2e} .. {:.2e} nonincreasing, rho {rho:.3}",
        rows[0].1,
        rows[rows.len() - 1].1
    ))
}

/// Arithmetic span 1 for unit weights, non-arithmetic for `{1, √2}`, and
/// the mixing flag in the arithmetic summary.
fn lattice(tree_summary: &pipeline::Summary) -> Outcome {
    let verdict = |name: &str| -> Result<LatticeVerdict, String> {
        let exp = config(name);
        let c = pipeline::build_codings(&exp).map_err(e)?;
        let sd = system_delta(&c.geodesic_roof, &c.geodesic_graph, exp.config.potential.depth).map_err(e)?;
        sd.maximal_transfer().lattice_test(exp.config.potential.lattice_max_period).map_err(e)
    };
    let unit = verdict("f2_unit_tree_g_a")?;
    let span = pipeline::lattice_span(&unit);
    ensure(span.is_some_and(|b| (b - 1.0).abs() < 1e-9), || format!("unit weights: {unit:?}"))?;
    let weighted = verdict("f2_weighted_sqrt2")?;
    ensure(matches!(weighted, LatticeVerdict::NonArithmetic { .. }), || format!("√2 weights: {weighted:?}"))?;
    ensure(tree_summary.mixing_hypothesis_flag && tree_summary.lattice_verdict == "arithmetic", || {
        "arithmetic summary lacks the mixing flag".to_string()
    })?;
    Ok("unit weights span 1, √2 weights non-arithmetic, mixing flag set".to_string())
}

/// `η(s)·(s − δ)` nearly constant as `s → δ` on the unit tree.
fn poincare_pole(tree_summary: &pipeline::Summary) -> Outcome {
    let vals: Vec<f64> = tree_summary.poincare.iter().filter_map(|r| r.eta_times_gap).collect();
    ensure(vals.len() == 3, || format!("{} converged rows", vals.len()))?;
    let (lo, hi) = vals.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    ensure(hi <= 1.2 * lo, || format!("eta·gap {vals:?} spread beyond 20%"))?;
    Ok(format!("eta·(s − delta) = {:.4}, {:.4}, {:.4}", vals[0], vals[1], vals[2]))
}

/// All property suites on 10⁴ cases each with a fixed seed.
fn property_suites() -> Outcome {
    let start = Instant::now();
    for (name, suite) in properties::suites() {
        suite(properties::CASES).map_err(|err| format!("{name}: {err}"))?;
    }
    within(start.elapsed(), 30)?;
    Ok(format!("4 suites x {} cases", properties::CASES))
}

/// The constant at prefix lengths 3 and 4 on the unit tree.
fn c_stabilization() -> Outcome {
    let exp = config("f2_unit_tree_g_a");
    let mut c = pipeline::build_codings(&exp).map_err(e)?;
    let t_ref = exp.config.counting.c_t_ref.unwrap_or(exp.config.counting.t_max_coset);
    pipeline::ensure_verified(&exp, &mut c.coset, Measure::Displacement, t_ref).map_err(e)?;
    let delta = 3f64.ln();
    let c3 = estimate_c(&exp.system, &c.coset, &exp.g, 3, t_ref, delta).map_err(e)?.value;
    let c4 = estimate_c(&exp.system, &c.coset, &exp.g, 4, t_ref, delta).map_err(e)?.value;
    ensure(c3 > 0.0 && c4 > 0.0 && rel(c4, c3) < 0.15, || format!("C = {c3} at l = 3, {c4} at l = 4"))?;
    Ok(format!("C = {c3:.6} at l = 3, {c4:.6} at l = 4"))
}

#[test]
fn acceptance_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let tree = config("f2_unit_tree_g_a");
    let mut art = Artifacts::new(dir.path()).unwrap();
    let summary = pipeline::run(&tree, &mut art).unwrap();
    art.commit().unwrap();

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1 tree conjugacy counts", Box::new(tree_conjugacy)),
        ("2 pressure root = critical exponent", Box::new(pressure_equals_exponent)),
        ("3 coset acceptor certification", Box::new(coset_certification)),
        ("4 block structure and multiplicity", Box::new(structure)),
        ("5 length comparison audit", Box::new(length_comparison)),
        ("6 lattice dichotomy", Box::new(|| lattice(&summary))),
        ("7 Poincare series pole", Box::new(|| poincare_pole(&summary))),
        ("8 property suites", Box::new(property_suites)),
        ("C stabilization in l", Box::new(c_stabilization)),
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr().lock();
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => writeln!(err, "PASS criterion {name}: {detail} ({secs:.2} s)").unwrap(),
            Err(why) => {
                writeln!(err, "FAIL criterion {name}: {why} ({secs:.2} s)").unwrap();
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
