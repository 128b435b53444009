//! Transfer matrices on depth-`n` cylinders of one irreducible component,
//! pressure, critical exponents, maximal components, the lattice test and
//! periodic orbit counts.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::coding::ComponentGraph;
use crate::error::{Error, Result};
use crate::output::{csv, sci};
use crate::potential::Roof;

/// Relative gap between Collatz–Wielandt bounds at which power iteration stops.
const POWER_TOL: f64 = 1e-12;
const POWER_MAX_BLOCKS: usize = 200_000;
const ROOT_TOL: f64 = 1e-10;
const DERIVATIVE_STEP: f64 = 1e-5;
/// Components whose pressure at the system exponent is this close to 0 are maximal.
const MAXIMAL_TOL: f64 = 1e-8;
const ORBIT_BUDGET: u64 = 10_000_000;
const LATTICE_TOL: f64 = 1e-9;
const LATTICE_MAX_DEN: i64 = 1000;

/// Sparse nonnegative matrix on cylinders: row `c` holds `(c′, e^{−t·r(c′)})`
/// for every one-step extension `c′` of `c`.
#[derive(Clone, Debug)]
pub struct TransferMatrix {
    pub component: usize,
    pub depth: usize,
    pub t: f64,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl TransferMatrix {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .par_iter()
            .with_min_len(1024)
            .map(|row| row.iter().map(|&(j, w)| w * x[j]).sum())
            .collect()
    }

    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                y[j] += w * x[i];
            }
        }
        y
    }

    /// Power iteration on `M^period` from the all-ones vector, until the
    /// Collatz–Wielandt bounds `lo ≤ ρ ≤ hi` on the Perron value satisfy
    /// `done(ln lo, ln hi)` or agree to `POWER_TOL`. Returns the log bounds
    /// per single step and the last iterate.
    fn perron_until(
        &self,
        period: usize,
        transpose: bool,
        done: impl Fn(f64, f64) -> bool,
    ) -> Result<(f64, f64, Vec<f64>)> {
        let mut x = vec![1.0; self.dim()];
        for _ in 0..POWER_MAX_BLOCKS {
            let mut y = x.clone();
            for _ in 0..period {
                y = if transpose { self.apply_transpose(&y) } else { self.apply(&y) };
            }
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for (a, b) in y.iter().zip(&x) {
                let q = a / b;
                lo = lo.min(q);
                hi = hi.max(q);
            }
            if hi == 0.0 {
                return Ok((f64::NEG_INFINITY, f64::NEG_INFINITY, x));
            }
            let scale = y.iter().fold(0.0f64, |m, &v| m.max(v));
            x = y.iter().map(|v| v / scale).collect();
            let (llo, lhi) = (lo.ln() / period as f64, hi.ln() / period as f64);
            if hi - lo <= POWER_TOL * hi || done(llo, lhi) {
                return Ok((llo, lhi, x));
            }
        }
        Err(Error::Check(format!(
            "power iteration did not converge at t = {} in component {}",
            self.t, self.component
        )))
    }

    fn perron(&self, period: usize, transpose: bool) -> Result<(f64, Vec<f64>)> {
        let (lo, hi, x) = self.perron_until(period, transpose, |_, _| false)?;
        Ok((0.5 * (lo + hi), x))
    }

    /// Log of the Perron eigenvalue. Periodic components are iterated in
    /// blocks of `period` steps, on which the iteration converges.
    pub fn log_spectral_radius(&self, period: usize) -> Result<f64> {
        Ok(self.perron(period, false)?.0)
    }

    /// The sign of the log Perron value, stopping as soon as the bounds
    /// exclude zero. Converged values within `POWER_TOL` of zero give 0.
    pub fn log_spectral_radius_sign(&self, period: usize) -> Result<f64> {
        let (lo, hi, _) = self.perron_until(period, false, |lo, hi| lo > 0.0 || hi < 0.0)?;
        Ok(if lo > 0.0 {
            1.0
        } else if hi < 0.0 {
            -1.0
        } else {
            let mid = 0.5 * (lo + hi);
            if mid.abs() <= POWER_TOL { 0.0 } else { mid.signum() }
        })
    }
}

/// Normalized right and left Perron vectors of a transfer matrix.
#[derive(Clone, Debug)]
pub struct PerronData {
    pub log_eigenvalue: f64,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
}

/// The t-independent part of the transfer matrices of one component.
#[derive(Clone, Debug)]
pub struct ComponentTransfer {
    pub component: usize,
    pub depth: usize,
    pub period: usize,
    pub cylinders: Vec<Vec<usize>>,
    /// Roof value per cylinder.
    pub roof: Vec<f64>,
    pub succ: Vec<Vec<usize>>,
}

impl ComponentTransfer {
    pub fn new<R: Roof + ?Sized>(roof: &R, graph: &ComponentGraph, component: usize, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Usage("cylinder depth must be at least 1".to_string()));
        }
        let shift = roof.shift();
        let period = graph
            .period(shift, component)
            .ok_or(Error::EmptySpectrum(component))?;
        let inside = |v: usize| graph.component_of[v] == component;
        let mut cylinders: Vec<Vec<usize>> = graph.components[component].iter().map(|&v| vec![v]).collect();
        for _ in 0..depth {
            cylinders = cylinders
                .iter()
                .flat_map(|p| {
                    let last = *p.last().expect("nonempty");
                    shift.successors(last).iter().filter(|&&v| inside(v)).map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        cylinders.sort();
        let index: HashMap<&[usize], usize> =
            cylinders.iter().enumerate().map(|(i, c)| (c.as_slice(), i)).collect();
        let values: Vec<f64> = cylinders.par_iter().map(|c| roof.cylinder_value(c)).collect();
        let succ = cylinders
            .iter()
            .map(|c| {
                let last = *c.last().expect("nonempty");
                let mut next: Vec<usize> = shift
                    .successors(last)
                    .iter()
                    .filter(|&&v| inside(v))
                    .map(|&v| {
                        let mut key = c[1..].to_vec();
                        key.push(v);
                        index[key.as_slice()]
                    })
                    .collect();
                next.sort_unstable();
                next
            })
            .collect();
        Ok(ComponentTransfer {
            component,
            depth,
            period,
            cylinders,
            roof: values,
            succ,
        })
    }

    pub fn matrix(&self, t: f64) -> TransferMatrix {
        let rows = self
            .succ
            .iter()
            .map(|s| s.iter().map(|&j| (j, (-t * self.roof[j]).exp())).collect())
            .collect();
        TransferMatrix {
            component: self.component,
            depth: self.depth,
            t,
            rows,
        }
    }

    /// `P(−t·r)`, the log of the Perron eigenvalue at parameter `t`.
    pub fn pressure(&self, t: f64) -> Result<f64> {
        self.matrix(t).log_spectral_radius(self.period)
    }

    /// Sign of `P(−t·r)`, computed without full convergence when possible.
    pub fn pressure_sign(&self, t: f64) -> Result<f64> {
        self.matrix(t).log_spectral_radius_sign(self.period)
    }

    pub fn pressure_derivative(&self, t: f64) -> Result<f64> {
        Ok((self.pressure(t + DERIVATIVE_STEP)? - self.pressure(t - DERIVATIVE_STEP)?) / (2.0 * DERIVATIVE_STEP))
    }

    /// The zero of the pressure, bracketed from `[0, 10]` by doubling.
    pub fn critical_exponent(&self) -> Result<f64> {
        let p0 = self.pressure(0.0)?;
        let root = if p0.abs() <= POWER_TOL {
            0.0
        } else {
            let sign = p0.signum();
            let (mut near, mut far): (f64, f64) = (0.0, 10.0 * sign);
            let mut doublings = 0;
            while self.pressure_sign(far)? * sign > 0.0 {
                if doublings == 60 {
                    return Err(Error::NoSignChange { lo: near.min(far), hi: near.max(far) });
                }
                near = far;
                far *= 2.0;
                doublings += 1;
            }
            while (far - near).abs() > ROOT_TOL {
                let mid = 0.5 * (near + far);
                if self.pressure_sign(mid)? * sign > 0.0 {
                    near = mid;
                } else {
                    far = mid;
                }
            }
            0.5 * (near + far)
        };
        let slope = self.pressure_derivative(root)?;
        if slope.is_nan() || slope >= 0.0 {
            return Err(Error::NonDecreasingPressure(slope));
        }
        Ok(root)
    }

    pub fn pressure_curve(&self, ts: &[f64]) -> Result<PressureCurve> {
        let samples = ts
            .iter()
            .map(|&t| Ok((t, self.pressure(t)?, self.pressure_derivative(t)?)))
            .collect::<Result<Vec<_>>>()?;
        let root = self.critical_exponent()?;
        Ok(PressureCurve {
            component: self.component,
            samples,
            root,
            derivative_at_root: self.pressure_derivative(root)?,
        })
    }

    /// Right and left Perron vectors, each scaled to unit maximum. For a
    /// periodic component the `period`-step iterate is averaged over one
    /// period, which turns it into an eigenvector of the matrix itself.
    pub fn perron_vectors(&self, t: f64) -> Result<PerronData> {
        let m = self.matrix(t);
        let (log_rho, right) = m.perron(self.period, false)?;
        let (_, left) = m.perron(self.period, true)?;
        let rho = log_rho.exp();
        let average = |mut v: Vec<f64>, transpose: bool| {
            let mut acc = v.clone();
            for _ in 1..self.period {
                v = if transpose { m.apply_transpose(&v) } else { m.apply(&v) };
                v.iter_mut().for_each(|x| *x /= rho);
                acc.iter_mut().zip(&v).for_each(|(a, b)| *a += b);
            }
            let scale = acc.iter().fold(0.0f64, |s, &x| s.max(x));
            acc.into_iter().map(|x| x / scale).collect::<Vec<_>>()
        };
        Ok(PerronData {
            log_eigenvalue: log_rho,
            right: average(right, false),
            left: average(left, true),
        })
    }

    /// Calls `visit(cycle, sum)` for every closed walk of at most
    /// `max_len` steps in the cylinder graph whose smallest cylinder is the
    /// first one, pruning walks whose running sum exceeds `max_sum`.
    fn closed_walks(&self, max_len: usize, max_sum: f64, visit: &mut dyn FnMut(&[usize], f64) -> Result<()>) -> Result<()> {
        let mut walk = Vec::with_capacity(max_len + 1);
        for c0 in 0..self.cylinders.len() {
            walk.clear();
            walk.push(c0);
            self.extend_walk(c0, &mut walk, 0.0, max_len, max_sum, visit)?;
        }
        Ok(())
    }

    fn extend_walk(
        &self,
        c0: usize,
        walk: &mut Vec<usize>,
        sum: f64,
        max_len: usize,
        max_sum: f64,
        visit: &mut dyn FnMut(&[usize], f64) -> Result<()>,
    ) -> Result<()> {
        let last = *walk.last().expect("nonempty");
        for &c in &self.succ[last] {
            if c < c0 {
                continue;
            }
            let s = sum + self.roof[c];
            if s > max_sum {
                continue;
            }
            if c == c0 {
                visit(walk, s)?;
            }
            if walk.len() < max_len {
                walk.push(c);
                self.extend_walk(c0, walk, s, max_len, max_sum, visit)?;
                walk.pop();
            }
        }
        Ok(())
    }

    /// Number of periodic orbits (closed walks up to rotation, including
    /// repeated ones) whose Birkhoff sum is at most `t_max`.
    pub fn periodic_orbit_count(&self, t_max: f64) -> Result<u64> {
        Ok(self.periodic_orbit_counts(&[t_max])?[0])
    }

    /// Cumulative orbit counts at several thresholds, from one enumeration.
    pub fn periodic_orbit_counts(&self, thresholds: &[f64]) -> Result<Vec<u64>> {
        let min = self.roof.iter().fold(f64::INFINITY, |m, &r| m.min(r));
        if min <= 0.0 {
            return Err(Error::Usage("orbit counting needs positive cylinder values".to_string()));
        }
        let t_max = thresholds.iter().fold(0.0f64, |m, &t| m.max(t));
        let max_len = (t_max / min).floor() as usize + 1;
        let mut sums = Vec::new();
        self.closed_walks(max_len, t_max * (1.0 + 1e-12), &mut |walk, s| {
            if is_least_rotation(walk) {
                sums.push(s);
                if sums.len() as u64 > ORBIT_BUDGET {
                    return Err(Error::Budget(format!("more than {ORBIT_BUDGET} periodic orbits")));
                }
            }
            Ok(())
        })?;
        sums.sort_by(f64::total_cmp);
        Ok(thresholds
            .iter()
            .map(|&t| sums.partition_point(|&s| s <= t * (1.0 + 1e-12)) as u64)
            .collect())
    }

    /// Decides whether all periodic Birkhoff sums with period at most
    /// `max_period` lie in a lattice `bℤ`.
    pub fn lattice_test(&self, max_period: usize) -> Result<LatticeVerdict> {
        let mut sums = Vec::new();
        let mut walks = 0u64;
        self.closed_walks(max_period, f64::INFINITY, &mut |_, s| {
            walks += 1;
            if walks > ORBIT_BUDGET {
                return Err(Error::Budget(format!("more than {ORBIT_BUDGET} closed walks")));
            }
            sums.push(s);
            Ok(())
        })?;
        Ok(lattice_verdict(sums))
    }
}

fn is_least_rotation(walk: &[usize]) -> bool {
    (1..walk.len()).all(|k| {
        let rotated = walk[k..].iter().chain(&walk[..k]);
        walk.iter().cmp(rotated) != std::cmp::Ordering::Greater
    })
}

/// Outcome of the lattice test on periodic Birkhoff sums.
#[derive(Clone, Debug, PartialEq)]
pub enum LatticeVerdict {
    Arithmetic { span: f64 },
    /// Two sums whose ratio has no rational approximation with small denominator.
    NonArithmetic { witness: (f64, f64) },
    /// Fewer than three distinct sums were available.
    Inconclusive { distinct: usize },
}

impl LatticeVerdict {
    pub fn is_arithmetic(&self) -> bool {
        matches!(self, LatticeVerdict::Arithmetic { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            LatticeVerdict::Arithmetic { .. } => "arithmetic",
            LatticeVerdict::NonArithmetic { .. } => "non-arithmetic",
            LatticeVerdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Lattice verdict for a list of nonzero sums: the span is the smallest sum
/// divided by the lcm of the denominators of all ratios, times the gcd of the
/// resulting integer multiples.
pub fn lattice_verdict(mut sums: Vec<f64>) -> LatticeVerdict {
    sums.retain(|s| s.abs() > LATTICE_TOL);
    sums.iter_mut().for_each(|s| *s = s.abs());
    sums.sort_by(f64::total_cmp);
    sums.dedup_by(|a, b| (*a - *b).abs() <= LATTICE_TOL * b.max(1.0));
    if sums.len() < 3 {
        return LatticeVerdict::Inconclusive { distinct: sums.len() };
    }
    let s1 = sums[0];
    let mut ratios = Vec::with_capacity(sums.len());
    for &s in &sums {
        match rational_approximation(s / s1, LATTICE_MAX_DEN, LATTICE_TOL) {
            Some(pq) => ratios.push(pq),
            None => return LatticeVerdict::NonArithmetic { witness: (s1, s) },
        }
    }
    let lcm = ratios.iter().fold(1i64, |l, &(_, q)| l / gcd(l, q) * q);
    let g = ratios.iter().fold(0i64, |g, &(p, q)| gcd(g, p * (lcm / q)));
    LatticeVerdict::Arithmetic {
        span: s1 * g as f64 / lcm as f64,
    }
}

/// The fraction `p/q` with the smallest `q ≤ max_den` within relative
/// distance `tol` of `x`.
pub fn rational_approximation(x: f64, max_den: i64, tol: f64) -> Option<(i64, i64)> {
    (1..=max_den).find_map(|q| {
        let p = (x * q as f64).round();
        ((x - p / q as f64).abs() <= tol * x.abs().max(1.0)).then_some((p as i64, q))
    })
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Samples of the pressure curve of one component.
#[derive(Clone, Debug)]
pub struct PressureCurve {
    pub component: usize,
    /// `(t, P(−t·r), dP/dt)`.
    pub samples: Vec<(f64, f64, f64)>,
    pub root: f64,
    pub derivative_at_root: f64,
}

impl PressureCurve {
    pub fn is_strictly_decreasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].1 < w[0].1) && self.samples.iter().all(|s| s.2 < 0.0)
    }

    /// Midpoint convexity on consecutive equally spaced samples.
    pub fn is_convex(&self, tol: f64) -> bool {
        self.samples
            .windows(3)
            .all(|w| w[1].1 <= 0.5 * (w[0].1 + w[2].1) + tol)
    }

    pub fn to_csv(&self) -> String {
        csv(
            &["t", "P", "dPdt"],
            self.samples.iter().map(|&(t, p, d)| vec![sci(t), sci(p), sci(d)]),
        )
    }
}

/// Critical exponents of all components and the maximal ones.
#[derive(Clone, Debug)]
pub struct SystemDelta {
    pub delta: f64,
    /// `(component, a_l)` for each nonzero component with a cycle.
    pub exponents: Vec<(usize, f64)>,
    pub maximal: Vec<usize>,
    pub transfers: Vec<ComponentTransfer>,
}

impl SystemDelta {
    pub fn maximal_transfer(&self) -> &ComponentTransfer {
        let c = self.maximal[0];
        self.transfers
            .iter()
            .find(|t| t.component == c)
            .expect("maximal component has a transfer")
    }
}

/// `a = max_l a_l` over components with cycles other than the zero state's,
/// and the components whose pressure vanishes at `a`.
pub fn system_delta<R: Roof + ?Sized>(roof: &R, graph: &ComponentGraph, depth: usize) -> Result<SystemDelta> {
    let zero_component = graph.component_of[roof.shift().zero()];
    let transfers = (0..graph.len())
        .filter(|&c| c != zero_component && graph.has_cycle[c])
        .map(|c| ComponentTransfer::new(roof, graph, c, depth))
        .collect::<Result<Vec<_>>>()?;
    if transfers.is_empty() {
        return Err(Error::EmptySpectrum(zero_component));
    }
    let exponents = transfers
        .iter()
        .map(|t| Ok((t.component, t.critical_exponent()?)))
        .collect::<Result<Vec<_>>>()?;
    let delta = exponents.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
    let mut maximal = Vec::new();
    for t in &transfers {
        if t.pressure(delta)?.abs() <= MAXIMAL_TOL {
            maximal.push(t.component);
        }
    }
    Ok(SystemDelta {
        delta,
        exponents,
        maximal,
        transfers,
    })
}

/// Largest number of maximal components met by one path in the component graph.
pub fn maximal_path_multiplicity(graph: &ComponentGraph, maximal: &[usize]) -> usize {
    let mut marked = vec![false; graph.len()];
    for &c in maximal {
        marked[c] = true;
    }
    graph.max_marked_on_path(&marked)
}
