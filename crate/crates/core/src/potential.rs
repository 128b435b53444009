//! The roof function on the augmented shift: values on terminating paths,
//! cylinder tables, Birkhoff sums and empirical Hölder oscillation.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::coding::AugmentedShift;
use crate::error::{Error, Result};
use crate::geometry::{Isometry, ModelSpace, Point};
use crate::group::Letter;
use crate::output::{csv, path_id, sci};

/// A potential on the augmented shift, evaluated on finite cylinders.
pub trait Roof: Sync {
    fn shift(&self) -> &AugmentedShift;

    /// The value assigned to the cylinder `path`: the roof of its
    /// terminating extension.
    fn cylinder_value(&self, path: &[usize]) -> f64;
}

/// The same value on every transition out of a nonzero state; used for
/// synthetic shifts without a group behind them.
#[derive(Clone, Debug)]
pub struct ConstantRoof {
    pub shift: AugmentedShift,
    pub value: f64,
}

impl Roof for ConstantRoof {
    fn shift(&self) -> &AugmentedShift {
        &self.shift
    }

    fn cylinder_value(&self, path: &[usize]) -> f64 {
        if path.len() > 1 && path[1] != self.shift.zero() {
            self.value
        } else {
            0.0
        }
    }
}

impl Roof for RoofFunction {
    fn shift(&self) -> &AugmentedShift {
        &self.shift
    }

    fn cylinder_value(&self, path: &[usize]) -> f64 {
        self.terminating(path).expect("cylinder paths are admissible")
    }
}

/// Roof values computed from displacements in a model space.
#[derive(Clone, Debug)]
pub struct RoofFunction {
    space: ModelSpace,
    basepoint: Point,
    shift: AugmentedShift,
}

impl RoofFunction {
    pub fn new(space: ModelSpace, basepoint: Point, shift: AugmentedShift) -> Result<Self> {
        space.validate_point(&basepoint)?;
        Ok(RoofFunction { space, basepoint, shift })
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn basepoint(&self) -> &Point {
        &self.basepoint
    }

    pub fn shift(&self) -> &AugmentedShift {
        &self.shift
    }

    /// `d(w·x₀, x₀)`.
    pub fn displacement(&self, word: &[Letter]) -> f64 {
        self.space.displacement(&self.space.word_isometry(word), &self.basepoint)
    }

    /// `d(g₀…g_{l−1}·x₀, x₀) − d(g₁…g_{l−1}·x₀, x₀)`, and 0 for the empty word.
    pub fn on_word(&self, word: &[Letter]) -> f64 {
        match word {
            [] => 0.0,
            [_, rest @ ..] => self.displacement(word) - self.displacement(rest),
        }
    }

    /// Generator labels along a path, stopping at the first zero state.
    pub fn labels(&self, path: &[usize]) -> Result<Vec<Letter>> {
        if path.is_empty() || !self.shift.is_admissible(path) {
            return Err(Error::Usage(format!("path {} is not admissible", path_id(path))));
        }
        let zero = self.shift.zero();
        let mut out = Vec::new();
        for p in path.windows(2) {
            if p[1] == zero {
                break;
            }
            out.push(self.shift.label(p[0], p[1]).expect("edges inside V carry labels"));
        }
        Ok(out)
    }

    /// Roof of the sequence `(v₀,…,v_l,0,0,…)`.
    pub fn terminating(&self, path: &[usize]) -> Result<f64> {
        Ok(self.on_word(&self.labels(path)?))
    }

    /// Birkhoff sum of the roof along the terminating extension of a path from
    /// the start, next to the displacement of the element it spells.
    pub fn birkhoff_displacement_check(&self, path: &[usize]) -> Result<(f64, f64)> {
        if path.first() != Some(&self.shift.start()) {
            return Err(Error::Usage("Birkhoff check needs a path from the start".to_string()));
        }
        let labels = self.labels(path)?;
        let lhs = (0..labels.len()).map(|k| self.on_word(&labels[k..])).sum();
        Ok((lhs, self.displacement(&labels)))
    }

    /// All paths `(v₀,…,v_n)` of `n` transitions avoiding the zero state.
    pub fn paths(&self, depth: usize) -> Vec<Vec<usize>> {
        let zero = self.shift.zero();
        let mut layer: Vec<Vec<usize>> = (0..self.shift.num_states())
            .filter(|&v| v != zero)
            .map(|v| vec![v])
            .collect();
        for _ in 0..depth {
            layer = layer
                .iter()
                .flat_map(|p| {
                    let last = *p.last().expect("paths are nonempty");
                    self.shift.successors(last).iter().filter(|&&v| v != zero).map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        layer
    }

    /// Cylinder values at depth `n`: each path gets the roof of its
    /// terminating extension.
    pub fn cylinder_potential(&self, depth: usize) -> CylinderPotential {
        let values = self
            .paths(depth)
            .into_par_iter()
            .map(|p| {
                let r = self.terminating(&p).expect("enumerated paths are admissible");
                (p, r)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .collect();
        CylinderPotential { depth, values }
    }

    /// For each depth `n`, the largest spread of roof values among terminating
    /// extensions of one cylinder by up to `extra` further transitions.
    pub fn hoelder_audit(&self, depths: &[usize], extra: usize) -> Result<Vec<(usize, f64)>> {
        depths
            .iter()
            .map(|&n| {
                if n < 2 {
                    return Err(Error::Usage(format!("audit depth {n} is below 2")));
                }
                let osc = self
                    .paths(n)
                    .into_par_iter()
                    .map(|p| self.cylinder_oscillation(&p, extra))
                    .reduce(|| 0.0, f64::max);
                Ok((n, osc))
            })
            .collect()
    }

    fn cylinder_oscillation(&self, path: &[usize], extra: usize) -> f64 {
        let labels = self.labels(path).expect("enumerated paths are admissible");
        let full = self.space.word_isometry(&labels);
        let tail = self.space.word_isometry(&labels[1..]);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let zero = self.shift.zero();
        let mut stack = vec![(*path.last().expect("nonempty"), full, tail, 0usize)];
        while let Some((v, full, tail, k)) = stack.pop() {
            let r = self.space.displacement(&full, &self.basepoint)
                - self.space.displacement(&tail, &self.basepoint);
            lo = lo.min(r);
            hi = hi.max(r);
            if k == extra {
                continue;
            }
            for &w in self.shift.successors(v) {
                if w == zero {
                    continue;
                }
                let step = self.space.word_isometry(&[self.shift.label(v, w).expect("labelled")]);
                let compose = |x: &Isometry| self.space.compose(x, &step).expect("one space");
                stack.push((w, compose(&full), compose(&tail), k + 1));
            }
        }
        hi - lo
    }
}

/// Roof values on depth-`n` cylinders.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderPotential {
    pub depth: usize,
    pub values: BTreeMap<Vec<usize>, f64>,
}

impl CylinderPotential {
    pub fn get(&self, path: &[usize]) -> Option<f64> {
        self.values.get(path).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_csv(&self) -> String {
        csv(
            &["path", "value"],
            self.values.iter().map(|(p, v)| vec![path_id(p), sci(*v)]),
        )
    }
}
