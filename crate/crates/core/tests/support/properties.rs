//! Randomized property suites on a fixed seed, shared by the `properties`
//! and `acceptance` test targets. Each suite returns the first failure.

use clorbit::coding::{AugmentedShift, LabeledAutomaton};
use clorbit::geometry::{schottky_pair, Isometry, Mat2, ModelSpace, Point};
use clorbit::group::{GeneratorSet, Letter, ReducedWord};
use clorbit::potential::RoofFunction;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub const CASES: u32 = 10_000;
const SEED: [u8; 32] = *b"clorbit-property-suites-seed-001";
const REL_TOL: f64 = 1e-9;
/// Half-plane images of long words sit close to the boundary, where the
/// distance formula loses digits.
const HP_TOL: f64 = 1e-7;

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &SEED))
}

fn f2() -> GeneratorSet {
    GeneratorSet::free(2).unwrap()
}

fn word(gens: &GeneratorSet, idx: &[usize]) -> ReducedWord {
    let letters: Vec<Letter> = gens.letters().collect();
    gens.reduce(&idx.iter().map(|&i| letters[i % letters.len()]).collect::<Vec<_>>())
}

fn letters(max_len: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..4, 0..=max_len)
}

fn close(a: f64, b: f64) -> bool {
    close_to(a, b, REL_TOL)
}

fn close_to(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn trees() -> Vec<ModelSpace> {
    let gens = f2();
    vec![
        ModelSpace::weighted_tree(gens.clone(), &[1.0, 1.0]).unwrap(),
        ModelSpace::weighted_tree(gens, &[1.0, std::f64::consts::SQRT_2]).unwrap(),
    ]
}

fn schottky() -> ModelSpace {
    ModelSpace::half_plane(f2(), &schottky_pair(2.5, 3.2, 3.0).unwrap()).unwrap()
}

/// A tree point: a vertex, moved a fraction of its last edge towards the root.
fn tree_point(space: &ModelSpace, idx: &[usize], frac: f64) -> Point {
    let w = word(space.gens(), idx);
    let offset = match w.last() {
        Some(l) => frac * space.weight(l),
        None => 0.0,
    };
    Point::Tree { word: w, offset }
}

fn half_plane_point((x, log_y): (f64, f64)) -> Point {
    Point::half_plane(x, log_y.exp()).unwrap()
}

fn half_plane_coords() -> impl Strategy<Value = (f64, f64)> {
    (-5.0..5.0f64, -3.0..3.0f64)
}

/// `[[1, t], [0, 1]]·diag(λ, 1/λ)·rotation(θ)`.
fn sl2(t: f64, log_lambda: f64, theta: f64) -> Mat2 {
    let l = log_lambda.exp();
    let (s, c) = theta.sin_cos();
    let n = Mat2::new(1.0, t, 0.0, 1.0).unwrap();
    let a = Mat2::new(l, 0.0, 0.0, 1.0 / l).unwrap();
    let k = Mat2::new(c, -s, s, c).unwrap();
    n.mul(&a).mul(&k)
}

/// `d(g·p, g·q) = d(p, q)` for words acting on weighted trees, and for random
/// matrices and Schottky words acting on the half-plane.
pub fn isometry_invariance(cases: u32) -> Result<(), String> {
    let trees = trees();
    let hp = schottky();
    let strategy = (
        (letters(8), letters(8), letters(8), 0.0..1.0f64, 0.0..1.0f64),
        (half_plane_coords(), half_plane_coords()),
        (-5.0..5.0f64, -2.0..2.0f64, 0.0..std::f64::consts::TAU, letters(4)),
    );
    runner(cases)
        .run(&strategy, |((g, u, v, fu, fv), (p, q), (t, ll, th, w))| {
            for space in &trees {
                let iso = Isometry::Word(word(space.gens(), &g));
                let (p, q) = (tree_point(space, &u, fu), tree_point(space, &v, fv));
                let before = space.distance(&p, &q).unwrap();
                let after = space
                    .distance(&space.act(&iso, &p).unwrap(), &space.act(&iso, &q).unwrap())
                    .unwrap();
                check(close(before, after), || format!("tree: {before} vs {after}"))?;
            }
            let (p, q) = (half_plane_point(p), half_plane_point(q));
            let before = hp.distance(&p, &q).unwrap();
            let word_iso = hp.word_isometry(word(hp.gens(), &w).letters());
            for iso in [Isometry::Matrix(sl2(t, ll, th)), word_iso] {
                let after = hp.distance(&hp.act(&iso, &p).unwrap(), &hp.act(&iso, &q).unwrap()).unwrap();
                check(close_to(before, after, HP_TOL), || format!("half-plane: {before} vs {after}"))?;
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn gromov_checks(space: &ModelSpace, [x, y, z, w]: [&Point; 4], delta: f64) -> Result<(), TestCaseError> {
    let gp = |b: &Point, p: &Point, q: &Point| space.gromov_product(b, p, q).unwrap();
    let d = |p: &Point, q: &Point| space.distance(p, q).unwrap();
    let yz = gp(x, y, z);
    check(close(yz, gp(x, z, y)), || format!("asymmetric: {yz}"))?;
    check(yz >= -REL_TOL * d(x, y).max(1.0), || format!("negative product {yz}"))?;
    let bound = d(x, y).min(d(x, z));
    check(yz <= bound + REL_TOL * bound.max(1.0), || format!("product {yz} above {bound}"))?;
    let sum = yz + gp(y, x, z);
    check(close(sum, d(x, y)), || format!("(y|z)_x + (x|z)_y = {sum}, d(x, y) = {}", d(x, y)))?;
    let lower = gp(x, y, w).min(gp(x, w, z)) - delta;
    check(yz >= lower - REL_TOL * lower.abs().max(1.0), || {
        format!("four-point condition: {yz} < {lower}")
    })
}

/// Symmetry, the bounds `0 ≤ (y|z)_x ≤ min(d(x,y), d(x,z))`, the identity
/// `(y|z)_x + (x|z)_y = d(x, y)`, and the four-point condition: exact on
/// trees and with constant `log 2` on the half-plane.
pub fn gromov_identities(cases: u32) -> Result<(), String> {
    let trees = trees();
    let hp = schottky();
    let strategy = (
        prop::array::uniform4((letters(8), 0.0..1.0f64)),
        prop::array::uniform4(half_plane_coords()),
    );
    runner(cases)
        .run(&strategy, |(tree_pts, hp_pts)| {
            for space in &trees {
                let p = tree_pts.clone().map(|(w, f)| tree_point(space, &w, f));
                gromov_checks(space, [&p[0], &p[1], &p[2], &p[3]], 0.0)?;
            }
            let p = hp_pts.map(half_plane_point);
            gromov_checks(&hp, [&p[0], &p[1], &p[2], &p[3]], 2f64.ln())
        })
        .map_err(|e| e.to_string())
}

/// Free reduction, associativity, inverses, powers, conjugation invariance of
/// cyclic length, and the shortlex order.
pub fn word_axioms(cases: u32) -> Result<(), String> {
    let gens = f2();
    let strategy = (letters(12), letters(12), letters(12), -4i64..=4, -4i64..=4);
    runner(cases)
        .run(&strategy, |(u, v, w, j, k)| {
            let raw: Vec<Letter> = {
                let all: Vec<Letter> = gens.letters().collect();
                u.iter().map(|&i| all[i]).collect()
            };
            let r = gens.reduce(&raw);
            check(gens.is_reduced(r.letters()), || "reduce is not reduced".into())?;
            check(gens.reduce(r.letters()) == r, || "reduce is not idempotent".into())?;
            let (u, v, w) = (word(&gens, &u), word(&gens, &v), word(&gens, &w));
            let m = |a: &ReducedWord, b: &ReducedWord| gens.multiply(a, b);
            check(m(&m(&u, &v), &w) == m(&u, &m(&v, &w)), || "not associative".into())?;
            check(m(&u, &gens.invert(&u)).is_empty(), || "u·u⁻¹ ≠ e".into())?;
            check(m(&ReducedWord::identity(), &u) == u, || "e·u ≠ u".into())?;
            check(gens.invert(&m(&u, &v)) == m(&gens.invert(&v), &gens.invert(&u)), || {
                "(uv)⁻¹ ≠ v⁻¹u⁻¹".into()
            })?;
            check(gens.power(&u, j + k) == m(&gens.power(&u, j), &gens.power(&u, k)), || {
                format!("u^{j}·u^{k} ≠ u^{}", j + k)
            })?;
            if !v.is_empty() {
                let conj = gens.conjugate(&u, &v);
                let core = |x: &ReducedWord| gens.cyclic_reduce(x).0.len();
                check(core(&conj) == core(&v), || "conjugation changed the cyclic length".into())?;
                check(gens.commutes(&v, &gens.power(&v, j)), || "v does not commute with its power".into())?;
            }
            let (a, b) = (u.letters(), v.letters());
            let ab = gens.shortlex_cmp(a, b);
            check(ab == gens.shortlex_cmp(b, a).reverse(), || "shortlex is not antisymmetric".into())?;
            check(ab.is_eq() == (u == v), || "shortlex equality differs from word equality".into())?;
            if gens.shortlex_less(&u, &v) && gens.shortlex_less(&v, &w) {
                check(gens.shortlex_less(&u, &w), || "shortlex is not transitive".into())?;
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn geodesic_roofs() -> Vec<RoofFunction> {
    let shift = AugmentedShift::from_automaton(&LabeledAutomaton::geodesic(&f2()));
    let mut spaces = trees();
    spaces.push(schottky());
    spaces
        .into_iter()
        .map(|s| {
            let x0 = s.default_basepoint();
            RoofFunction::new(s, x0, shift.clone()).unwrap()
        })
        .collect()
}

/// The Birkhoff sum of the roof along a path from the start equals the
/// displacement of the element the path spells.
pub fn birkhoff_identity(cases: u32) -> Result<(), String> {
    let roofs = geodesic_roofs();
    let strategy = prop::collection::vec(any::<usize>(), 0..=12);
    runner(cases)
        .run(&strategy, |choices| {
            for roof in &roofs {
                let shift = roof.shift();
                let zero = shift.zero();
                let mut path = vec![shift.start()];
                for c in &choices {
                    let next: Vec<usize> = shift
                        .successors(*path.last().unwrap())
                        .iter()
                        .copied()
                        .filter(|&v| v != zero)
                        .collect();
                    if next.is_empty() {
                        break;
                    }
                    path.push(next[c % next.len()]);
                }
                let (lhs, rhs) = roof.birkhoff_displacement_check(&path).unwrap();
                check(close(lhs, rhs), || format!("path of length {}: {lhs} vs {rhs}", path.len()))?;
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Every suite, in order.
pub fn suites() -> [(&'static str, fn(u32) -> Result<(), String>); 4] {
    [
        ("isometry invariance", isometry_invariance),
        ("Gromov product identities", gromov_identities),
        ("word algebra axioms", word_axioms),
        ("Birkhoff identity", birkhoff_identity),
    ]
}
