//! Comparison of conjugate displacements with twice the coset displacement,
//! and the constant built from cylinder-restricted counts.

use rayon::prelude::*;
use serde::Serialize;

use super::{accepted_of_length, Enumerator, Measure, OrbitSystem};
use crate::coding::LabeledAutomaton;
use crate::error::{Error, Result};
use crate::group::{Letter, ReducedWord};

/// Cylinders with fewer counted extensions than this make the estimate
/// low confidence.
const MIN_CYLINDER_COUNT: usize = 50;

/// The correction term
/// `τ(u) = d(g·x₀, x₀) − 2⟨u·x₀, gu·x₀⟩_{g·x₀} − 2⟨g·x₀, u·x₀⟩_{x₀}`.
pub fn tau(system: &OrbitSystem, g: &ReducedWord, u: &[Letter]) -> Result<f64> {
    let gens = system.gens();
    let space = &system.space;
    let x0 = &system.basepoint;
    let gx = system.point(g.letters());
    let ux = system.point(u);
    let mut gu = g.letters().to_vec();
    gu.extend_from_slice(u);
    let gux = system.point(gens.reduce(&gu).letters());
    Ok(space.distance(&gx, x0)? - 2.0 * space.gromov_product(&gx, &ux, &gux)? - 2.0 * space.gromov_product(x0, &gx, &ux)?)
}

/// For each prefix length `l`, the largest
/// `|d(x⁻¹gx·x₀, x₀) − 2·d(x·x₀, x₀) − τ(u)|` over accepted `u` of length
/// `l` and accepted extensions `x` of `u` by at most `extension` letters.
pub fn length_comparison_audit(
    system: &OrbitSystem,
    coset: &LabeledAutomaton,
    g: &ReducedWord,
    depths: &[usize],
    extension: usize,
) -> Result<Vec<(usize, f64)>> {
    let deepest = depths.iter().max().copied().unwrap_or(0) + extension;
    let verified = coset.verified_len().unwrap_or(0);
    if verified < deepest {
        return Err(Error::Check(format!(
            "coset acceptor verified to length {verified}, audit reaches length {deepest}"
        )));
    }
    depths
        .iter()
        .map(|&l| {
            let prefixes = accepted_of_length(coset, l);
            let errors = prefixes
                .par_iter()
                .map(|u| audit_prefix(system, coset, g, u, extension))
                .collect::<Result<Vec<f64>>>()?;
            Ok((l, errors.into_iter().fold(0.0, f64::max)))
        })
        .collect()
}

fn audit_prefix(
    system: &OrbitSystem,
    coset: &LabeledAutomaton,
    g: &ReducedWord,
    u: &[Letter],
    extension: usize,
) -> Result<f64> {
    let t = tau(system, g, u)?;
    let state = *coset.trace(u).expect("prefix is accepted").last().expect("trace includes the start");
    let mut worst: f64 = 0.0;
    let mut stack = vec![(u.to_vec(), state)];
    while let Some((x, v)) = stack.pop() {
        let conj = system.displacement(system.conjugate(&x, g).letters());
        worst = worst.max((conj - 2.0 * system.displacement(&x) - t).abs());
        if x.len() < u.len() + extension {
            for &(l, w) in coset.successors(v) {
                let mut y = x.clone();
                y.push(l);
                stack.push((y, w));
            }
        }
    }
    Ok(worst)
}

/// One cylinder's share of the constant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CTerm {
    pub prefix: String,
    /// `N^u(t_ref)`.
    pub count: usize,
    /// `N^u(t_ref)·e^{−δ·t_ref}`.
    pub c_u: f64,
    pub tau: f64,
}

/// `C ≈ Σ_u Ĉ_u·e^{−δ·τ(u)/2}` over accepted `u` of length `l`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CEstimate {
    pub value: f64,
    pub l: usize,
    pub t_ref: f64,
    pub terms: Vec<CTerm>,
    /// Some cylinder counted fewer than 50 extensions.
    pub low_confidence: bool,
}

/// Estimates the constant of the conjugacy asymptotic from cylinder-restricted
/// coset counts at `t_ref`.
pub fn estimate_c(
    system: &OrbitSystem,
    coset: &LabeledAutomaton,
    g: &ReducedWord,
    l: usize,
    t_ref: f64,
    delta: f64,
) -> Result<CEstimate> {
    let en = Enumerator::new(system, coset, Measure::Displacement)?;
    let scale = (-delta * t_ref).exp();
    let terms = accepted_of_length(coset, l)
        .iter()
        .map(|u| {
            let count = en.run(u, t_ref)?.values.len();
            Ok(CTerm {
                prefix: system.gens().format(u),
                count,
                c_u: count as f64 * scale,
                tau: tau(system, g, u)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if terms.is_empty() {
        return Err(Error::Usage(format!("no accepted prefixes of length {l}")));
    }
    Ok(CEstimate {
        value: terms.iter().map(|t| t.c_u * (-delta * t.tau / 2.0).exp()).sum(),
        l,
        t_ref,
        low_confidence: terms.iter().any(|t| t.count < MIN_CYLINDER_COUNT),
        terms,
    })
}
