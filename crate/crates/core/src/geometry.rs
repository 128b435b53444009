//! The two CAT(-1) model spaces: the upper half-plane with a Möbius action
//! and the Cayley tree of a free group with symmetric edge weights.

use rand::Rng;

use crate::error::{Error, Result};
use crate::group::{GeneratorSet, Letter, ReducedWord};

/// Arguments of arccosh closer than this to 1 use the series expansion.
const SERIES_SWITCH: f64 = 1e-9;

/// A 2×2 real matrix kept at determinant 1 with its first nonzero entry
/// positive, so that ±M (which act identically) share one representative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    /// Builds a normalized matrix; the determinant must be positive.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let m = Mat2 { a, b, c, d };
        let det = m.det();
        if !(det.is_finite() && det > 0.0) {
            return Err(Error::Usage(format!("matrix determinant {det} is not positive")));
        }
        Ok(m.normalized())
    }

    pub fn diag(lambda: f64) -> Self {
        Mat2 { a: lambda, b: 0.0, c: 0.0, d: 1.0 / lambda }.normalized()
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// Rescales to determinant 1 and fixes the sign.
    pub fn normalized(self) -> Self {
        let s = self.det().sqrt();
        Mat2 {
            a: self.a / s,
            b: self.b / s,
            c: self.c / s,
            d: self.d / s,
        }
        .sign_fixed()
    }

    /// Fixes the sign only. Products and inverses of determinant-1 matrices
    /// skip the rescaling: for long words `ad − bc` cancels catastrophically.
    fn sign_fixed(self) -> Self {
        let lead = [self.a, self.b, self.c, self.d].into_iter().find(|&x| x != 0.0).unwrap_or(1.0);
        if lead < 0.0 {
            Mat2 { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
        } else {
            self
        }
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
        .sign_fixed()
    }

    pub fn inverse(&self) -> Mat2 {
        Mat2 { a: self.d, b: -self.b, c: -self.c, d: self.a }.sign_fixed()
    }

    /// Möbius action z ↦ (az + b)/(cz + d), using det = 1 for the
    /// imaginary part.
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        // Numerator and denominator as complex numbers.
        let (nr, ni) = (self.a * x + self.b, self.a * y);
        let (dr, di) = (self.c * x + self.d, self.c * y);
        let den = dr * dr + di * di;
        ((nr * dr + ni * di) / den, y / den)
    }

    /// Entrywise comparison relative to the larger matrix norm.
    pub fn approx_eq(&self, o: &Mat2, tol: f64) -> bool {
        let scale = self.max_abs().max(o.max_abs()).max(1.0);
        [self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d]
            .iter()
            .all(|e| e.abs() <= tol * scale)
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    HalfPlane { x: f64, y: f64 },
    /// The point at distance `offset` from the vertex `word` towards the
    /// identity, on the last edge of `word`.
    Tree { word: ReducedWord, offset: f64 },
}

impl Point {
    pub fn half_plane(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0 && y.is_finite() && x.is_finite()) {
            return Err(Error::Usage(format!("({x}, {y}) is not in the upper half-plane")));
        }
        Ok(Point::HalfPlane { x, y })
    }

    pub fn vertex(word: ReducedWord) -> Self {
        Point::Tree { word, offset: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Isometry {
    Matrix(Mat2),
    Word(ReducedWord),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpaceKind {
    /// One matrix per letter; inverse letters carry inverse matrices.
    HalfPlane { matrices: Vec<Mat2> },
    /// One edge length per letter.
    WeightedTree { weights: Vec<f64> },
}

/// A model space together with the action of the free group on it.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpace {
    gens: GeneratorSet,
    kind: SpaceKind,
}

impl ModelSpace {
    /// Weighted Cayley tree. `weights[i]` is the length of the edges labelled
    /// by the `i`-th generator and its inverse (by name, `a`/`A`, `b`/`B`, ...).
    pub fn weighted_tree(gens: GeneratorSet, weights: &[f64]) -> Result<Self> {
        if weights.len() != gens.rank() {
            return Err(Error::Usage(format!(
                "expected {} weights, got {}",
                gens.rank(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Usage(format!("edge weight {w} is not positive")));
        }
        let per_letter = gens
            .letters()
            .map(|l| weights[generator_slot(&gens, l)])
            .collect();
        Ok(ModelSpace {
            gens,
            kind: SpaceKind::WeightedTree { weights: per_letter },
        })
    }

    /// Upper half-plane with one matrix per generator (by name); inverse
    /// letters act by the inverse matrices.
    pub fn half_plane(gens: GeneratorSet, matrices: &[Mat2]) -> Result<Self> {
        if matrices.len() != gens.rank() {
            return Err(Error::Usage(format!(
                "expected {} matrices, got {}",
                gens.rank(),
                matrices.len()
            )));
        }
        let per_letter = gens
            .letters()
            .map(|l| {
                let m = matrices[generator_slot(&gens, l)];
                if gens.name(l).is_ascii_lowercase() {
                    m
                } else {
                    m.inverse()
                }
            })
            .collect();
        Ok(ModelSpace {
            gens,
            kind: SpaceKind::HalfPlane { matrices: per_letter },
        })
    }

    pub fn gens(&self) -> &GeneratorSet {
        &self.gens
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    pub fn is_tree(&self) -> bool {
        matches!(self.kind, SpaceKind::WeightedTree { .. })
    }

    /// The natural basepoint: the identity vertex, or `i` in the half-plane.
    pub fn default_basepoint(&self) -> Point {
        match self.kind {
            SpaceKind::HalfPlane { .. } => Point::HalfPlane { x: 0.0, y: 1.0 },
            SpaceKind::WeightedTree { .. } => Point::vertex(ReducedWord::identity()),
        }
    }

    pub fn weight(&self, l: Letter) -> f64 {
        match &self.kind {
            SpaceKind::WeightedTree { weights } => weights[l.index()],
            SpaceKind::HalfPlane { .. } => self.displacement(
                &self.word_isometry(&[l]),
                &self.default_basepoint(),
            ),
        }
    }

    pub fn letter_matrix(&self, l: Letter) -> Option<Mat2> {
        match &self.kind {
            SpaceKind::HalfPlane { matrices } => Some(matrices[l.index()]),
            SpaceKind::WeightedTree { .. } => None,
        }
    }

    /// Checks that each letter and its paired inverse act as mutually inverse
    /// isometries, and that the pairing follows the capital-letter convention.
    pub fn check_involution(&self) -> Result<()> {
        if !self.gens.involution_matches_names() {
            return Err(Error::Check(
                "involution does not pair each letter with its capital".to_string(),
            ));
        }
        for l in self.gens.letters() {
            let li = self.gens.inv(l);
            let ok = match &self.kind {
                SpaceKind::WeightedTree { weights } => weights[l.index()] == weights[li.index()],
                SpaceKind::HalfPlane { matrices } => {
                    matrices[l.index()].mul(&matrices[li.index()]).approx_eq(&Mat2::IDENTITY, 1e-9)
                }
            };
            if !ok {
                return Err(Error::Check(format!(
                    "letters {} and {} do not act as inverse isometries",
                    self.gens.name(l),
                    self.gens.name(li)
                )));
            }
        }
        Ok(())
    }

    pub fn validate_point(&self, p: &Point) -> Result<()> {
        match (&self.kind, p) {
            (SpaceKind::HalfPlane { .. }, Point::HalfPlane { x, y }) => {
                Point::half_plane(*x, *y).map(|_| ())
            }
            (SpaceKind::WeightedTree { weights }, Point::Tree { word, offset }) => {
                self.gens.check_letters(word.letters())?;
                if !self.gens.is_reduced(word.letters()) {
                    return Err(Error::Usage("tree point word is not reduced".to_string()));
                }
                let max = word.last().map_or(0.0, |l| weights[l.index()]);
                if !(*offset >= 0.0 && *offset <= max) {
                    return Err(Error::Usage(format!(
                        "offset {offset} outside edge of length {max}"
                    )));
                }
                Ok(())
            }
            _ => Err(Error::Usage("point does not belong to this space".to_string())),
        }
    }

    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        match (&self.kind, p, q) {
            (
                SpaceKind::HalfPlane { .. },
                Point::HalfPlane { x: x1, y: y1 },
                Point::HalfPlane { x: x2, y: y2 },
            ) => Ok(half_plane_distance((*x1, *y1), (*x2, *y2))),
            (
                SpaceKind::WeightedTree { weights },
                Point::Tree { word: w1, offset: t1 },
                Point::Tree { word: w2, offset: t2 },
            ) => Ok(tree_distance(weights, (w1.letters(), *t1), (w2.letters(), *t2))),
            _ => Err(Error::Usage("points of different spaces".to_string())),
        }
    }

    pub fn gromov_product(&self, base: &Point, y: &Point, z: &Point) -> Result<f64> {
        Ok(0.5 * (self.distance(base, y)? + self.distance(base, z)? - self.distance(y, z)?))
    }

    pub fn identity(&self) -> Isometry {
        match self.kind {
            SpaceKind::HalfPlane { .. } => Isometry::Matrix(Mat2::IDENTITY),
            SpaceKind::WeightedTree { .. } => Isometry::Word(ReducedWord::identity()),
        }
    }

    /// The isometry of a word read left to right.
    pub fn word_isometry(&self, w: &[Letter]) -> Isometry {
        match &self.kind {
            SpaceKind::HalfPlane { matrices } => Isometry::Matrix(
                w.iter().fold(Mat2::IDENTITY, |acc, l| acc.mul(&matrices[l.index()])),
            ),
            SpaceKind::WeightedTree { .. } => Isometry::Word(self.gens.reduce(w)),
        }
    }

    /// `g ∘ h`.
    pub fn compose(&self, g: &Isometry, h: &Isometry) -> Result<Isometry> {
        match (g, h) {
            (Isometry::Matrix(a), Isometry::Matrix(b)) => Ok(Isometry::Matrix(a.mul(b))),
            (Isometry::Word(a), Isometry::Word(b)) => Ok(Isometry::Word(self.gens.multiply(a, b))),
            _ => Err(Error::Usage("isometries of different spaces".to_string())),
        }
    }

    pub fn act(&self, g: &Isometry, p: &Point) -> Result<Point> {
        match (&self.kind, g, p) {
            (SpaceKind::HalfPlane { .. }, Isometry::Matrix(m), Point::HalfPlane { x, y }) => {
                let (x, y) = m.apply(*x, *y);
                Ok(Point::HalfPlane { x, y })
            }
            (SpaceKind::WeightedTree { weights }, Isometry::Word(g), Point::Tree { word, offset }) => {
                Ok(self.tree_act(weights, g, word, *offset))
            }
            _ => Err(Error::Usage("isometry and point of different spaces".to_string())),
        }
    }

    fn tree_act(&self, weights: &[f64], g: &ReducedWord, w: &ReducedWord, t: f64) -> Point {
        let image = self.gens.multiply(g, w);
        let Some(last) = w.last() else {
            return Point::vertex(image);
        };
        if t == 0.0 {
            return Point::vertex(image);
        }
        // The point sits on the edge from w towards w·last⁻¹. Its image sits on
        // the edge from g·w towards g·w·last⁻¹, which is either the parent edge
        // of g·w or a child edge, depending on whether `last` survived reduction.
        if image.last() == Some(last) {
            normalize_tree_point(weights, image, t)
        } else {
            let child = self.gens.multiply(&image, &self.gens.assume_reduced(vec![self.gens.inv(last)]));
            let len = weights[last.index()];
            normalize_tree_point(weights, child, len - t)
        }
    }

    pub fn displacement(&self, g: &Isometry, basepoint: &Point) -> f64 {
        match (&self.kind, g, basepoint) {
            (SpaceKind::WeightedTree { weights }, Isometry::Word(w), Point::Tree { word, offset })
                if word.is_empty() && *offset == 0.0 =>
            {
                w.letters().iter().map(|l| weights[l.index()]).sum()
            }
            _ => {
                let image = self.act(g, basepoint).expect("isometry matches space");
                self.distance(basepoint, &image).expect("points of one space")
            }
        }
    }

    /// Translation length of the isometry represented by a cyclic word.
    pub fn translation_length(&self, w: &[Letter]) -> f64 {
        match &self.kind {
            SpaceKind::WeightedTree { weights } => {
                let (core, _) = self.gens.cyclic_reduce(&self.gens.reduce(w));
                core.letters().iter().map(|l| weights[l.index()]).sum()
            }
            SpaceKind::HalfPlane { .. } => match self.word_isometry(w) {
                Isometry::Matrix(m) => {
                    let tr = m.trace().abs();
                    if tr <= 2.0 {
                        0.0
                    } else {
                        2.0 * (tr / 2.0).acosh()
                    }
                }
                Isometry::Word(_) => unreachable!(),
            },
        }
    }

    pub fn strong_hyperbolicity_audit(&self, samples: &[[Point; 4]], r0: f64) -> Result<HyperbolicityAudit> {
        let mut audit = HyperbolicityAudit {
            max_defect: 0.0,
            fitted_l: 0.0,
            used: 0,
            skipped: 0,
        };
        for [x, y, z, t] in samples {
            let d = |p: &Point, q: &Point| self.distance(p, q);
            let r = d(x, y)? + d(z, t)? - d(x, z)? - d(y, t)?;
            if r < r0 {
                audit.skipped += 1;
                continue;
            }
            let defect = (d(x, y)? + d(z, t)? - d(x, t)? - d(z, y)?).abs();
            audit.used += 1;
            audit.max_defect = audit.max_defect.max(defect);
            audit.fitted_l = audit.fitted_l.max(defect * r.exp());
        }
        Ok(audit)
    }
}

/// Index of the generator a letter belongs to, by name (`a`/`A` → 0).
fn generator_slot(gens: &GeneratorSet, l: Letter) -> usize {
    (gens.name(l).to_ascii_lowercase() as u8 - b'a') as usize
}

/// Result of the strong-hyperbolicity audit: the largest four-point defect,
/// the implied constant `L = max defect · e^R`, and how many quadruples were
/// used or skipped for having `R < R0`.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperbolicityAudit {
    pub max_defect: f64,
    pub fitted_l: f64,
    pub used: usize,
    pub skipped: usize,
}

pub fn half_plane_distance((x1, y1): (f64, f64), (x2, y2): (f64, f64)) -> f64 {
    let (dx, dy) = (x1 - x2, y1 - y2);
    let u = (dx * dx + dy * dy) / (2.0 * y1 * y2);
    if u < SERIES_SWITCH {
        // arccosh(1 + u) = sqrt(2u) (1 - u/12 + 3u²/160 - ...)
        (2.0 * u).sqrt() * (1.0 - u / 12.0 + 3.0 * u * u / 160.0)
    } else {
        (u + (u * (2.0 + u)).sqrt()).ln_1p()
    }
}

/// Two hyperbolic matrices `[[cosh, k·sinh], [sinh/k, cosh]]` of half
/// translation lengths `l1/2` (with `k = 1`) and `l2/2`.
pub fn schottky_pair(l1: f64, l2: f64, k: f64) -> Result<[Mat2; 2]> {
    let (c1, s1) = ((l1 / 2.0).cosh(), (l1 / 2.0).sinh());
    let (c2, s2) = ((l2 / 2.0).cosh(), (l2 / 2.0).sinh());
    Ok([Mat2::new(c1, s1, s1, c1)?, Mat2::new(c2, k * s2, s2 / k, c2)?])
}

/// Isometric circle `|cz + d| = 1` of a matrix as (center, radius).
pub fn isometric_circle(m: &Mat2) -> Option<(f64, f64)> {
    (m.c != 0.0).then(|| (-m.d / m.c, 1.0 / m.c.abs()))
}

/// Ping-pong check: the isometric circles of all generators and their
/// inverses are pairwise disjoint, so the group is free and discrete.
pub fn check_ping_pong(generators: &[Mat2]) -> Result<()> {
    let mut circles = Vec::new();
    for m in generators {
        for x in [*m, m.inverse()] {
            circles.push(
                isometric_circle(&x)
                    .ok_or_else(|| Error::Check(format!("{x:?} fixes infinity")))?,
            );
        }
    }
    for (i, &(c1, r1)) in circles.iter().enumerate() {
        for &(c2, r2) in &circles[i + 1..] {
            if (c1 - c2).abs() <= r1 + r2 {
                return Err(Error::Check(format!(
                    "isometric circles around {c1} and {c2} intersect"
                )));
            }
        }
    }
    Ok(())
}

fn normalize_tree_point(weights: &[f64], word: ReducedWord, offset: f64) -> Point {
    match word.last() {
        Some(l) if offset >= weights[l.index()] => Point::vertex(word.prefix(word.len() - 1)),
        _ => Point::Tree { word, offset },
    }
}

/// Distance between points on the rays from the identity to `w1` and `w2`.
fn tree_distance(weights: &[f64], (w1, t1): (&[Letter], f64), (w2, t2): (&[Letter], f64)) -> f64 {
    let height = |w: &[Letter]| -> f64 { w.iter().map(|l| weights[l.index()]).sum() };
    let common = w1.iter().zip(w2).take_while(|(a, b)| a == b).count();
    let branch = height(&w1[..common]);
    let h1 = height(w1) - t1;
    let h2 = height(w2) - t2;
    let meet = h1.min(h2).min(branch);
    (h1 - meet) + (h2 - meet)
}

/// Random quadruples in the half-plane with two far-apart pairs of nearby
/// points, which is the regime where the four-point defect is exercised.
pub fn sample_half_plane_quadruples<R: Rng>(rng: &mut R, n: usize) -> Vec<[Point; 4]> {
    let around = |rng: &mut R, cx: f64, cy: f64, dist: f64| -> Point {
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let rot = Mat2::new((theta / 2.0).cos(), (theta / 2.0).sin(), -(theta / 2.0).sin(), (theta / 2.0).cos())
            .expect("rotation");
        let (x, y) = rot.apply(0.0, dist.exp());
        Point::HalfPlane { x: cx + cy * x, y: cy * y }
    };
    (0..n)
        .map(|_| {
            let cx = rng.gen_range(-1.0..1.0);
            let cy = rng.gen_range(-1.0f64..1.0).exp();
            let x = Point::HalfPlane { x: cx, y: cy };
            let far = rng.gen_range(4.0..10.0);
            let y = around(rng, cx, cy, far);
            let Point::HalfPlane { x: yx, y: yy } = y.clone() else { unreachable!() };
            let (rz, rt) = (rng.gen_range(0.0..0.5), rng.gen_range(0.0..0.5));
            let z = around(rng, cx, cy, rz);
            let t = around(rng, yx, yy, rt);
            [x, y, z, t]
        })
        .collect()
}
