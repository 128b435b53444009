//! Orbit enumeration driven by the acceptors, with audited pruning, and the
//! count series built from it.

mod lengths;
mod series;

pub use lengths::{estimate_c, length_comparison_audit, tau, CEstimate, CTerm};
pub use series::{
    fit_rate, poincare_partial, poincare_transfer, CountSeries, Grid, Poincare, RateFit, SeriesKind,
};

use rayon::prelude::*;

use crate::coding::{LabeledAutomaton, SubgroupTag, START};
use crate::error::{Error, Result};
use crate::geometry::{check_ping_pong, isometric_circle, Isometry, Mat2, ModelSpace, Point};
use crate::group::{GeneratorSet, Letter, ReducedWord};

/// Lengths sampled when fitting the pruning envelope.
const ENVELOPE_SAMPLE_LEN: usize = 8;
/// The envelope slope is this fraction of the sampled asymptotic slope.
const ENVELOPE_SAFETY: f64 = 0.9;
const AUDIT_SLACK: f64 = 1e-9;
const DEDUP_TOL: f64 = 1e-9;

/// A model space with a basepoint: the orbit whose points are counted.
#[derive(Clone, Debug)]
pub struct OrbitSystem {
    pub space: ModelSpace,
    pub basepoint: Point,
}

impl OrbitSystem {
    pub fn new(space: ModelSpace, basepoint: Point) -> Result<Self> {
        space.validate_point(&basepoint)?;
        Ok(OrbitSystem { space, basepoint })
    }

    pub fn gens(&self) -> &GeneratorSet {
        self.space.gens()
    }

    pub fn displacement(&self, word: &[Letter]) -> f64 {
        self.space.displacement(&self.space.word_isometry(word), &self.basepoint)
    }

    pub fn point(&self, word: &[Letter]) -> Point {
        self.space
            .act(&self.space.word_isometry(word), &self.basepoint)
            .expect("basepoint belongs to the space")
    }

    /// On a tree based at the identity vertex, the displacement of a reduced
    /// word is its weighted length, which only grows along extensions.
    fn is_monotone(&self) -> bool {
        self.space.is_tree() && self.basepoint == Point::vertex(ReducedWord::identity())
    }

    /// For a half-plane family passing the ping-pong check with the basepoint
    /// outside every isometric circle, the circle of `l⁻¹` for each letter `l`.
    fn ping_pong_circles(&self) -> Option<Vec<(f64, f64)>> {
        let Point::HalfPlane { x, y } = self.basepoint else {
            return None;
        };
        let gens = self.gens();
        let letters: Vec<Letter> = gens.letters().collect();
        let mats: Vec<Mat2> = letters
            .iter()
            .filter(|&&l| l.index() < gens.inv(l).index())
            .map(|&l| self.space.letter_matrix(l))
            .collect::<Option<_>>()?;
        check_ping_pong(&mats).ok()?;
        let mut circles = vec![(0.0, 0.0); letters.len()];
        for &l in &letters {
            let (c, r) = isometric_circle(&self.space.letter_matrix(gens.inv(l))?)?;
            if (x - c).powi(2) + y * y <= r * r {
                return None;
            }
            circles[l.index()] = (c, r);
        }
        Some(circles)
    }

    pub fn conjugate(&self, u: &[Letter], g: &ReducedWord) -> ReducedWord {
        let gens = self.gens();
        gens.conjugate(&gens.reduce(u), g)
    }
}

/// What is measured on an accepted word `u`.
#[derive(Clone, Debug, PartialEq)]
pub enum Measure {
    /// `d(u·x₀, x₀)`.
    Displacement,
    /// `d(u⁻¹gu·x₀, x₀)`.
    Conjugate(ReducedWord),
}

/// Rule for abandoning a prefix during enumeration.
#[derive(Clone, Debug, PartialEq)]
pub enum Pruner {
    /// The measure never decreases along an extension; prune once it exceeds
    /// the threshold. Audited on every edge.
    Monotone,
    /// Every accepted word satisfies `value ≥ slope·|u| − intercept`; prune
    /// once the right side exceeds the threshold. Audited on every word.
    Linear { slope: f64, intercept: f64 },
    /// Disjoint isometric circles with the basepoint outside all of them: the
    /// orbit points of every extension of `w = w′l` lie in `w′` applied to the
    /// disc of `l⁻¹`, so the distance from the basepoint to that region bounds
    /// the whole subtree. Audited on every word and edge.
    PingPong,
}

/// Result of one enumeration.
#[derive(Clone, Debug, Default)]
pub struct Enumeration {
    /// Measured values at most the threshold, sorted.
    pub values: Vec<f64>,
    /// Conjugates, one per counted word, for the conjugacy measure.
    pub conjugates: Vec<Isometry>,
    pub max_depth: usize,
    pub visited: u64,
}

/// Depth-first enumeration of an acceptor's paths under a measure.
#[derive(Clone, Debug)]
pub struct Enumerator<'a> {
    system: &'a OrbitSystem,
    automaton: &'a LabeledAutomaton,
    measure: Measure,
    pruner: Pruner,
    /// Isometric circle of `l⁻¹`, indexed by `l`, for ping-pong pruning.
    circles: Vec<(f64, f64)>,
}

enum Node {
    Weight(f64),
    Iso(Isometry),
}

/// Per-word quantities the pruner looks at.
#[derive(Clone, Copy)]
struct Visit {
    value: f64,
    /// Lower bound for the value of every extension.
    bound: f64,
}

impl<'a> Enumerator<'a> {
    /// Chooses the pruning rule for displacements: exact monotone pruning on a
    /// tree based at the identity, ping-pong cones for a Schottky family.
    /// Otherwise, and always for conjugates, a linear envelope fitted to the
    /// minima of the measure over all accepted words up to length 8.
    pub fn new(system: &'a OrbitSystem, automaton: &'a LabeledAutomaton, measure: Measure) -> Result<Self> {
        let mut e = Enumerator {
            system,
            automaton,
            measure,
            pruner: Pruner::Monotone,
            circles: Vec::new(),
        };
        let circles = system.ping_pong_circles();
        if e.measure == Measure::Displacement && system.is_monotone() {
            e.pruner = Pruner::Monotone;
        } else if let (Measure::Displacement, Some(circles)) = (&e.measure, circles) {
            e.circles = circles;
            e.pruner = Pruner::PingPong;
        } else {
            e.pruner = e.estimate_envelope()?;
        }
        Ok(e)
    }

    pub fn with_pruner(mut self, pruner: Pruner) -> Result<Self> {
        if pruner == Pruner::PingPong {
            self.circles = self
                .system
                .ping_pong_circles()
                .ok_or_else(|| Error::Usage("ping-pong pruning needs disjoint isometric circles".to_string()))?;
        }
        self.pruner = pruner;
        Ok(self)
    }

    pub fn pruner(&self) -> &Pruner {
        &self.pruner
    }

    pub fn value(&self, word: &[Letter]) -> f64 {
        match &self.measure {
            Measure::Displacement => self.system.displacement(word),
            Measure::Conjugate(g) => self.system.displacement(self.system.conjugate(word, g).letters()),
        }
    }

    fn estimate_envelope(&self) -> Result<Pruner> {
        let mut minima = [f64::INFINITY; ENVELOPE_SAMPLE_LEN + 1];
        for w in self.automaton.words_up_to(ENVELOPE_SAMPLE_LEN) {
            let v = self.value(&w);
            minima[w.len()] = minima[w.len()].min(v);
        }
        let hi = minima.iter().rposition(|m| m.is_finite()).unwrap_or(0);
        if hi == 0 {
            // Only the empty word is accepted; nothing to prune.
            return Ok(Pruner::Linear { slope: 1.0, intercept: 0.0 });
        }
        let lo = hi / 2;
        let slope = ENVELOPE_SAFETY * (minima[hi] - minima[lo]) / (hi - lo) as f64;
        if !(slope > 0.0) {
            return Err(Error::PruningAudit(format!(
                "sampled minima do not grow (slope {slope}); no envelope exists"
            )));
        }
        let intercept = minima[..=hi]
            .iter()
            .enumerate()
            .map(|(n, m)| slope * n as f64 - m)
            .fold(f64::NEG_INFINITY, f64::max)
            + AUDIT_SLACK;
        Ok(Pruner::Linear { slope, intercept })
    }

    /// Longest word the enumeration reaches below `t_max`: a closed form for
    /// the monotone and linear rules, a dry run for ping-pong cones.
    pub fn max_length(&self, t_max: f64) -> Result<usize> {
        match self.pruner {
            Pruner::Monotone => {
                let min_w = self
                    .system
                    .gens()
                    .letters()
                    .map(|l| self.system.space.weight(l))
                    .fold(f64::INFINITY, f64::min);
                Ok((t_max / min_w + AUDIT_SLACK).floor() as usize)
            }
            Pruner::Linear { slope, intercept } => Ok(((t_max + intercept) / slope).floor().max(0.0) as usize),
            Pruner::PingPong => Ok(self.run_with_limit(&[], t_max, None)?.max_depth),
        }
    }

    fn start_node(&self, word: &[Letter]) -> Node {
        match self.measure {
            Measure::Displacement if self.pruner == Pruner::Monotone => Node::Weight(self.system.displacement(word)),
            _ => Node::Iso(self.system.space.word_isometry(word)),
        }
    }

    fn child(&self, node: &Node, l: Letter) -> Node {
        match node {
            Node::Weight(w) => Node::Weight(w + self.system.space.weight(l)),
            Node::Iso(iso) => Node::Iso(
                self.system
                    .space
                    .compose(iso, &self.system.space.word_isometry(&[l]))
                    .expect("one space"),
            ),
        }
    }

    fn measure_node(&self, node: &Node, word: &[Letter]) -> (Visit, Option<Isometry>) {
        let (value, conj) = match (&self.measure, node) {
            (Measure::Displacement, Node::Weight(w)) => (*w, None),
            (Measure::Displacement, Node::Iso(iso)) => (self.system.space.displacement(iso, &self.system.basepoint), None),
            (Measure::Conjugate(g), _) => {
                let c = self.system.conjugate(word, g);
                let iso = self.system.space.word_isometry(c.letters());
                (self.system.space.displacement(&iso, &self.system.basepoint), Some(iso))
            }
        };
        let bound = match self.pruner {
            Pruner::Monotone => value,
            Pruner::Linear { slope, intercept } => slope * word.len() as f64 - intercept,
            Pruner::PingPong => self.cone_bound(node, word),
        };
        (Visit { value, bound }, conj)
    }

    /// Distance from the basepoint to the cone of `w = w′l`, computed as the
    /// distance from `w′⁻¹·x₀` to the isometric circle of `l⁻¹`.
    fn cone_bound(&self, node: &Node, word: &[Letter]) -> f64 {
        let (Some(&last), Node::Iso(Isometry::Matrix(m)), Point::HalfPlane { x, y }) =
            (word.last(), node, &self.system.basepoint)
        else {
            return 0.0;
        };
        let (c, r) = self.circles[last.index()];
        let step = self.system.space.letter_matrix(last).expect("half-plane letter");
        let (zx, zy) = step.mul(&m.inverse()).apply(*x, *y);
        let sinh = ((zx - c).powi(2) + zy * zy - r * r) / (2.0 * r * zy);
        sinh.max(0.0).asinh()
    }

    /// All accepted words extending `prefix` whose measure is at most `t_max`.
    /// Fails if a coset acceptor would be used beyond its verified length.
    pub fn run(&self, prefix: &[Letter], t_max: f64) -> Result<Enumeration> {
        let limit = match self.automaton.subgroup() {
            SubgroupTag::Centralizer { .. } => Some(self.automaton.verified_len().unwrap_or(0)),
            _ => None,
        };
        self.run_with_limit(prefix, t_max, limit)
    }

    fn run_with_limit(&self, prefix: &[Letter], t_max: f64, limit: Option<usize>) -> Result<Enumeration> {
        let path = self.automaton.trace(prefix).ok_or_else(|| {
            Error::Usage(format!("prefix {} is not accepted", self.system.gens().format(prefix)))
        })?;
        let state = *path.last().expect("trace includes the start");
        let root = self.start_node(prefix);
        let (visit, conj) = self.measure_node(&root, prefix);
        self.audit(prefix.len(), visit, None)?;
        let mut out = Enumeration::default();
        if visit.bound > t_max {
            return Ok(out);
        }
        self.check_limit(prefix.len(), limit)?;
        out.visited = 1;
        out.max_depth = prefix.len();
        if visit.value <= t_max {
            out.values.push(visit.value);
            out.conjugates.extend(conj);
        }
        let branches = self
            .automaton
            .successors(state)
            .par_iter()
            .map(|&(l, t)| {
                let mut word = prefix.to_vec();
                word.push(l);
                let node = self.child(&root, l);
                self.dfs(word, t, node, visit, t_max, limit)
            })
            .collect::<Result<Vec<_>>>()?;
        for b in branches {
            out.values.extend(b.values);
            out.conjugates.extend(b.conjugates);
            out.max_depth = out.max_depth.max(b.max_depth);
            out.visited += b.visited;
        }
        out.values.sort_by(f64::total_cmp);
        Ok(out)
    }

    fn check_limit(&self, len: usize, limit: Option<usize>) -> Result<()> {
        match limit {
            Some(have) if len > have => Err(Error::Check(format!(
                "coset acceptor verified to length {have}, enumeration reaches length {len}"
            ))),
            _ => Ok(()),
        }
    }

    fn audit(&self, len: usize, visit: Visit, parent: Option<Visit>) -> Result<()> {
        let slack = AUDIT_SLACK * visit.value.abs().max(1.0);
        let ok = match self.pruner {
            Pruner::Monotone | Pruner::Linear { .. } => visit.value >= visit.bound - slack,
            Pruner::PingPong => {
                visit.value >= visit.bound - slack && parent.is_none_or(|p| visit.bound >= p.bound - slack)
            }
        } && (self.pruner != Pruner::Monotone || parent.is_none_or(|p| visit.value >= p.value - slack));
        if ok {
            Ok(())
        } else {
            Err(Error::PruningAudit(format!(
                "word of length {len} has value {} and bound {}, parent {:?}, under {:?}",
                visit.value,
                visit.bound,
                parent.map(|p| (p.value, p.bound)),
                self.pruner
            )))
        }
    }

    fn dfs(
        &self,
        word: Vec<Letter>,
        state: usize,
        node: Node,
        parent: Visit,
        t_max: f64,
        limit: Option<usize>,
    ) -> Result<Enumeration> {
        let mut out = Enumeration::default();
        let mut stack = vec![(word, state, node, parent)];
        while let Some((word, state, node, parent)) = stack.pop() {
            if let Pruner::Linear { slope, intercept } = self.pruner {
                if slope * word.len() as f64 - intercept > t_max {
                    continue;
                }
            }
            let (visit, conj) = self.measure_node(&node, &word);
            self.audit(word.len(), visit, Some(parent))?;
            if visit.bound > t_max {
                continue;
            }
            self.check_limit(word.len(), limit)?;
            out.visited += 1;
            out.max_depth = out.max_depth.max(word.len());
            if visit.value <= t_max {
                out.values.push(visit.value);
                out.conjugates.extend(conj);
            }
            for &(l, t) in self.automaton.successors(state).iter().rev() {
                let mut w = word.clone();
                w.push(l);
                let child = self.child(&node, l);
                stack.push((w, t, child, visit));
            }
        }
        Ok(out)
    }
}

/// `N(T) = #{g : d(g·x₀, x₀) ≤ T}` over the geodesic acceptor.
pub fn count_full_orbit(system: &OrbitSystem, acceptor: &LabeledAutomaton, grid: &Grid, t_max: f64) -> Result<CountSeries> {
    let e = Enumerator::new(system, acceptor, Measure::Displacement)?.run(&[], t_max)?;
    Ok(CountSeries::from_values(&e.values, grid, t_max, SeriesKind::FullOrbit))
}

/// `N_H(T)` for `H = Z(g)`, counting minimal coset representatives.
pub fn count_coset_orbit(system: &OrbitSystem, coset: &LabeledAutomaton, grid: &Grid, t_max: f64) -> Result<CountSeries> {
    count_cylinder_restricted(system, coset, &[], grid, t_max)
}

/// `N^u(T)`: coset representatives extending the accepted prefix `u`.
pub fn count_cylinder_restricted(
    system: &OrbitSystem,
    coset: &LabeledAutomaton,
    u: &[Letter],
    grid: &Grid,
    t_max: f64,
) -> Result<CountSeries> {
    let e = Enumerator::new(system, coset, Measure::Displacement)?.run(u, t_max)?;
    let kind = if u.is_empty() { SeriesKind::Coset } else { SeriesKind::CylinderRestricted };
    Ok(CountSeries::from_values(&e.values, grid, t_max, kind))
}

/// Counts conjugates `u⁻¹gu` over accepted `u` with displacement at most `T`,
/// failing if two accepted words give the same conjugate.
pub fn count_conjugacy_class(
    system: &OrbitSystem,
    coset: &LabeledAutomaton,
    g: &ReducedWord,
    grid: &Grid,
    t_max: f64,
) -> Result<CountSeries> {
    if g.is_empty() {
        return Err(Error::Usage("the identity has a finite conjugacy class".to_string()));
    }
    let e = Enumerator::new(system, coset, Measure::Conjugate(g.clone()))?.run(&[], t_max)?;
    check_distinct(system.gens(), &e.conjugates)?;
    Ok(CountSeries::from_values(&e.values, grid, t_max, SeriesKind::Conjugacy))
}

/// Fails if two isometries coincide: exact word equality on trees, entrywise
/// agreement to `1e-9` for normalized matrices.
pub fn check_distinct(gens: &GeneratorSet, isos: &[Isometry]) -> Result<()> {
    let mut words = Vec::new();
    let mut mats: Vec<Mat2> = Vec::new();
    for iso in isos {
        match iso {
            Isometry::Word(w) => words.push(w.letters().to_vec()),
            Isometry::Matrix(m) => mats.push(*m),
        }
    }
    words.sort();
    if let Some(w) = words.windows(2).find(|p| p[0] == p[1]) {
        return Err(Error::DuplicateConjugate(gens.format(&w[0])));
    }
    mats.sort_by(|x, y| x.a.total_cmp(&y.a));
    for i in 0..mats.len() {
        let scale = mats[i].max_abs().max(1.0);
        for j in i + 1..mats.len() {
            if mats[j].a - mats[i].a > DEDUP_TOL * scale {
                break;
            }
            if mats[i].approx_eq(&mats[j], DEDUP_TOL) {
                return Err(Error::DuplicateConjugate(format!("{:?}", mats[i])));
            }
        }
    }
    Ok(())
}

/// Displacements of all reduced words up to `max_len`, without any acceptor
/// or pruning.
pub fn raw_full_orbit_values(system: &OrbitSystem, max_len: usize) -> Vec<f64> {
    let mut v: Vec<f64> = system
        .gens()
        .reduced_words(max_len)
        .par_iter()
        .map(|w| system.displacement(w.letters()))
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Displacements of the distinct conjugates `h⁻¹gh` over all reduced `h` up
/// to `max_len`, deduplicated by reduced word.
pub fn raw_conjugacy_values(system: &OrbitSystem, g: &ReducedWord, max_len: usize) -> Vec<f64> {
    let gens = system.gens();
    let mut conj: Vec<Vec<Letter>> = gens
        .reduced_words(max_len)
        .par_iter()
        .map(|h| gens.conjugate(h, g).into_letters())
        .collect();
    conj.sort();
    conj.dedup();
    let mut v: Vec<f64> = conj.par_iter().map(|c| system.displacement(c)).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Accepted words of length exactly `len`.
pub fn accepted_of_length(automaton: &LabeledAutomaton, len: usize) -> Vec<Vec<Letter>> {
    let mut layer = vec![(Vec::new(), START)];
    for _ in 0..len {
        layer = layer
            .into_iter()
            .flat_map(|(w, v)| {
                automaton.successors(v).iter().map(move |&(l, t)| {
                    let mut x: Vec<Letter> = w.clone();
                    x.push(l);
                    (x, t)
                })
            })
            .collect();
    }
    layer.into_iter().map(|(w, _)| w).collect()
}
