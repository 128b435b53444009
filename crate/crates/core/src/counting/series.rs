//! Count series, exponential rate fits and Poincaré partial sums.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::output::{csv, sci};
use crate::potential::Roof;

/// Values within this relative distance of a threshold count as below it.
const THRESHOLD_TOL: f64 = 1e-9;
const POINCARE_TERM_TOL: f64 = 1e-15;
const POINCARE_MAX_STEPS: usize = 100_000;
/// Parameters closer than this to the rate are flagged as near the pole.
const POLE_MARGIN: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesKind {
    FullOrbit,
    Coset,
    CylinderRestricted,
    Conjugacy,
}

impl SeriesKind {
    pub fn from_label(s: &str) -> Result<Self> {
        match s {
            "full-orbit" => Ok(SeriesKind::FullOrbit),
            "coset" => Ok(SeriesKind::Coset),
            "cylinder-restricted" => Ok(SeriesKind::CylinderRestricted),
            "conjugacy" => Ok(SeriesKind::Conjugacy),
            _ => Err(Error::Parse(format!("unknown series kind {s:?}"))),
        }
    }
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeriesKind::FullOrbit => "full-orbit",
            SeriesKind::Coset => "coset",
            SeriesKind::CylinderRestricted => "cylinder-restricted",
            SeriesKind::Conjugacy => "conjugacy",
        })
    }
}

/// Where a series is sampled.
#[derive(Clone, Debug, PartialEq)]
pub enum Grid {
    /// `0, step, 2·step, …` up to the maximum threshold.
    Uniform { step: f64 },
    Explicit(Vec<f64>),
    /// The distinct values that occur, so every sample sits on a jump.
    Realized,
}

impl Grid {
    pub fn thresholds(&self, values: &[f64], t_max: f64) -> Vec<f64> {
        match self {
            Grid::Uniform { step } => {
                let n = (t_max / step + THRESHOLD_TOL).floor() as usize;
                (0..=n).map(|k| k as f64 * step).collect()
            }
            Grid::Explicit(ts) => ts.iter().copied().filter(|&t| t <= t_max).collect(),
            Grid::Realized => {
                let mut ts: Vec<f64> = values.iter().copied().filter(|&v| v <= t_max).collect();
                ts.dedup_by(|a, b| (*a - *b).abs() <= THRESHOLD_TOL * b.abs().max(1.0));
                ts
            }
        }
    }
}

/// Cumulative counts `N(T_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CountSeries {
    pub thresholds: Vec<f64>,
    pub counts: Vec<u64>,
    pub kind: SeriesKind,
    /// Hash of the configuration the series came from.
    pub provenance: String,
}

impl CountSeries {
    /// Counts sorted `values` at the grid thresholds.
    pub fn from_values(values: &[f64], grid: &Grid, t_max: f64, kind: SeriesKind) -> Self {
        let thresholds = grid.thresholds(values, t_max);
        let counts = thresholds
            .iter()
            .map(|&t| values.partition_point(|&v| v <= t + THRESHOLD_TOL * t.abs().max(1.0)) as u64)
            .collect();
        CountSeries {
            thresholds,
            counts,
            kind,
            provenance: String::new(),
        }
    }

    pub fn with_provenance(mut self, hash: &str) -> Self {
        self.provenance = hash.to_string();
        self
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    /// The count at the largest threshold not above `t`.
    pub fn count_at(&self, t: f64) -> Option<u64> {
        let i = self.thresholds.partition_point(|&x| x <= t);
        (i > 0).then(|| self.counts[i - 1])
    }

    pub fn check_invariants(&self) -> Result<()> {
        if self.thresholds.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Check("thresholds are not strictly increasing".to_string()));
        }
        if self.counts.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Check("counts decrease".to_string()));
        }
        Ok(())
    }

    /// Reads the format written by [`CountSeries::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("T,N,kind,config_hash") {
            return Err(Error::Parse("count series header must be T,N,kind,config_hash".to_string()));
        }
        let mut s = CountSeries {
            thresholds: Vec::new(),
            counts: Vec::new(),
            kind: SeriesKind::FullOrbit,
            provenance: String::new(),
        };
        for (i, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
            let f: Vec<&str> = line.trim().split(',').collect();
            let [t, n, kind, hash] = f.as_slice() else {
                return Err(Error::Parse(format!("bad count series line {line:?}")));
            };
            let bad = |e: &dyn fmt::Display| Error::Parse(format!("{line:?}: {e}"));
            s.thresholds.push(t.parse().map_err(|e| bad(&e))?);
            s.counts.push(n.parse().map_err(|e| bad(&e))?);
            let kind = SeriesKind::from_label(kind)?;
            if i == 0 {
                s.kind = kind;
                s.provenance = hash.to_string();
            } else if kind != s.kind || *hash != s.provenance {
                return Err(Error::Parse(format!("line {line:?} mixes series")));
            }
        }
        s.check_invariants()?;
        Ok(s)
    }

    pub fn to_csv(&self) -> String {
        csv(
            &["T", "N", "kind", "config_hash"],
            self.thresholds.iter().zip(&self.counts).map(|(t, n)| {
                vec![sci(*t), n.to_string(), self.kind.to_string(), self.provenance.clone()]
            }),
        )
    }
}

/// Least-squares fit of `log N(T) = rate·T + intercept` on a window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub rate: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    /// Root mean square of the residuals in `log N`.
    pub residual: f64,
    /// Lattice span when the fit was restricted to realized values.
    pub lattice_mode: Option<f64>,
    pub points: usize,
}

/// Fits the exponential growth rate of a series. In lattice mode only the
/// thresholds where the count jumps are used, and they must form a
/// progression whose steps are multiples of the span.
pub fn fit_rate(series: &CountSeries, window: (f64, f64), lattice_mode: Option<f64>) -> Result<RateFit> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::DegenerateWindow(format!("[{lo}, {hi}]")));
    }
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut previous = None;
    for (&t, &n) in series.thresholds.iter().zip(&series.counts) {
        let jumped = previous.is_none_or(|p| n > p);
        previous = Some(n);
        if t < lo || t > hi || n == 0 || (lattice_mode.is_some() && !jumped) {
            continue;
        }
        pts.push((t, (n as f64).ln()));
    }
    if pts.len() < 5 {
        return Err(Error::DegenerateWindow(format!(
            "{} usable points in [{lo}, {hi}], need 5",
            pts.len()
        )));
    }
    if let Some(b) = lattice_mode {
        for w in pts.windows(2) {
            let k = (w[1].0 - w[0].0) / b;
            if k.round() < 1.0 || (k - k.round()).abs() > 1e-9 * k.max(1.0) {
                return Err(Error::DegenerateWindow(format!(
                    "samples {} and {} are not on the lattice of span {b}",
                    w[0].0, w[1].0
                )));
            }
        }
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let rate = sxy / sxx;
    let intercept = my - rate * mx;
    let residual = (pts.iter().map(|p| (p.1 - rate * p.0 - intercept).powi(2)).sum::<f64>() / n).sqrt();
    Ok(RateFit {
        rate,
        intercept,
        window,
        residual,
        lattice_mode,
        points: pts.len(),
    })
}

/// A Poincaré partial sum, or the reason none is reported.
#[derive(Clone, Debug, PartialEq)]
pub enum Poincare {
    Converged {
        value: f64,
        /// Estimated contribution of the omitted terms.
        tail_estimate: f64,
        /// The parameter lies within 0.1 of the growth rate.
        near_pole: bool,
    },
    /// The parameter does not exceed the growth rate.
    Divergent { s: f64, rate: f64 },
}

impl Poincare {
    pub fn value(&self) -> Option<f64> {
        match self {
            Poincare::Converged { value, .. } => Some(*value),
            Poincare::Divergent { .. } => None,
        }
    }
}

/// `Σ e^{−s·L}` over the sorted values `L ≤ max_t`, with a tail estimate
/// from `N(T) ≈ N(max_t)·e^{rate·(T − max_t)}`.
pub fn poincare_partial(values: &[f64], s: f64, max_t: f64, rate: f64) -> Poincare {
    if s <= rate {
        return Poincare::Divergent { s, rate };
    }
    let kept = &values[..values.partition_point(|&v| v <= max_t)];
    let value = kept.iter().rev().map(|&v| (-s * v).exp()).sum();
    let tail_estimate = kept.len() as f64 * rate / (s - rate) * (-s * max_t).exp();
    Poincare::Converged {
        value,
        tail_estimate,
        near_pole: s <= rate + POLE_MARGIN,
    }
}

/// `Σ e^{−s·S(x)}` over all paths `x` from the start, where `S` is the
/// Birkhoff sum of the depth-`depth` cylinder values along the terminating
/// extension. Summed length by length, keeping per path only its last
/// `depth` states, until a length contributes less than `1e-15` of the total.
pub fn poincare_transfer<R: Roof + ?Sized>(roof: &R, depth: usize, s: f64, rate: f64) -> Result<Poincare> {
    if s <= rate {
        return Ok(Poincare::Divergent { s, rate });
    }
    if depth == 0 {
        return Err(Error::Usage("window depth must be at least 1".to_string()));
    }
    let shift = roof.shift();
    let zero = shift.zero();
    let mut cache: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut value_of = |w: &[usize]| -> f64 {
        if let Some(&v) = cache.get(w) {
            return v;
        }
        let v = roof.cylinder_value(w);
        cache.insert(w.to_vec(), v);
        v
    };
    // Sum over the windows not yet charged when a path stops here.
    let closing_of = |key: &[usize], value_of: &mut dyn FnMut(&[usize]) -> f64| -> f64 {
        (0..key.len().saturating_sub(1)).map(|j| value_of(&key[j..])).sum()
    };
    let mut closing_cache: HashMap<Vec<usize>, f64> = HashMap::new();

    let mut layer: HashMap<Vec<usize>, f64> = HashMap::from([(vec![shift.start()], 1.0)]);
    let mut total = 0.0;
    let mut last_term = f64::INFINITY;
    for _ in 0..POINCARE_MAX_STEPS {
        let mut keys: Vec<&Vec<usize>> = layer.keys().collect();
        keys.sort();
        let mut term = 0.0;
        for key in keys {
            let c = match closing_cache.get(key) {
                Some(&c) => c,
                None => {
                    let c = closing_of(key, &mut value_of);
                    closing_cache.insert(key.clone(), c);
                    c
                }
            };
            term += layer[key] * (-s * c).exp();
        }
        total += term;
        if term <= POINCARE_TERM_TOL * total && term <= last_term {
            return Ok(Poincare::Converged {
                value: total,
                tail_estimate: term,
                near_pole: s <= rate + POLE_MARGIN,
            });
        }
        last_term = term;
        let mut next: HashMap<Vec<usize>, f64> = HashMap::new();
        let mut entries: Vec<(&Vec<usize>, &f64)> = layer.iter().collect();
        entries.sort_by(|a, b| a.0.cmp(b.0));
        for (key, &weight) in entries {
            let last = *key.last().expect("nonempty");
            for &v in shift.successors(last) {
                if v == zero {
                    continue;
                }
                let mut window = key.clone();
                window.push(v);
                let (charge, new_key) = if window.len() == depth + 1 {
                    (value_of(&window), window[1..].to_vec())
                } else {
                    (0.0, window)
                };
                *next.entry(new_key).or_insert(0.0) += weight * (-s * charge).exp();
            }
        }
        if next.is_empty() {
            return Ok(Poincare::Converged {
                value: total,
                tail_estimate: 0.0,
                near_pole: s <= rate + POLE_MARGIN,
            });
        }
        layer = next;
    }
    Err(Error::Budget(format!(
        "Poincaré sum at s = {s} did not settle within {POINCARE_MAX_STEPS} lengths"
    )))
}
