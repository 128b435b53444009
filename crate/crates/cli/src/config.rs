//! Experiment configuration files: sections of `key = value` pairs in TOML.

use std::path::{Path, PathBuf};

use clorbit::counting::OrbitSystem;
use clorbit::geometry::{check_ping_pong, Mat2, ModelSpace, Point};
use clorbit::group::{GeneratorSet, ReducedWord};
use clorbit::{Error, Result};
use serde::Deserialize;
use sha2::{Digest, Sha256};

const DET_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub group: GroupSection,
    pub space: SpaceSection,
    pub element: ElementSection,
    #[serde(default)]
    pub coding: CodingSection,
    #[serde(default)]
    pub potential: PotentialSection,
    #[serde(default)]
    pub counting: CountingSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSection {
    pub rank: usize,
    /// Shortlex order of the letters, e.g. `"aAbB"`.
    pub order: Option<String>,
    /// Inverse pairs such as `["aA", "bB"]`; defaults to capital = inverse.
    pub involution: Option<Vec<String>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKindName {
    Tree,
    HalfPlane,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    pub kind: SpaceKindName,
    /// Edge length per generator, for trees.
    pub weights: Option<Vec<f64>>,
    /// `[a, b, c, d]` per generator, for the half-plane.
    pub matrices: Option<Vec<[f64; 4]>>,
    /// `[x, y]` in the half-plane; defaults to `i`.
    pub basepoint: Option<[f64; 2]>,
    /// Tree vertex word for the basepoint; defaults to the identity.
    pub basepoint_vertex: Option<String>,
    /// Distance from that vertex towards the identity.
    pub basepoint_offset: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSection {
    pub g: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CodingSection {
    pub signature_radius: Option<usize>,
    pub verify_len: usize,
    pub state_budget: usize,
}

impl Default for CodingSection {
    fn default() -> Self {
        CodingSection {
            signature_radius: None,
            verify_len: 8,
            state_budget: 100_000,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialSection {
    /// Cylinder depth of the transfer operators.
    pub depth: usize,
    /// Depths compared in the depth-stability table.
    pub stability_depths: Vec<usize>,
    /// `t` values of the pressure-curve CSV.
    pub pressure_t: Vec<f64>,
    pub hoelder_depths: Vec<usize>,
    pub hoelder_extra: usize,
    pub lattice_max_period: usize,
}

impl Default for PotentialSection {
    fn default() -> Self {
        PotentialSection {
            depth: 3,
            stability_depths: vec![2, 3],
            pressure_t: (0..=40).map(|k| k as f64 * 0.05).collect(),
            hoelder_depths: vec![2, 3, 4],
            hoelder_extra: 2,
            lattice_max_period: 8,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CountingSection {
    pub grid_step: f64,
    pub t_max_full: f64,
    pub t_max_coset: f64,
    pub t_max_conjugacy: f64,
    pub fit_window_full: [f64; 2],
    pub fit_window_coset: [f64; 2],
    pub fit_window_conjugacy: [f64; 2],
    pub audit_depths: Vec<usize>,
    pub audit_extension: usize,
    pub c_lengths: Vec<usize>,
    /// Reference threshold for the cylinder counts; defaults to `t_max_coset`.
    pub c_t_ref: Option<f64>,
    /// Offsets `s − δ` at which the Poincaré series is summed.
    pub poincare_offsets: Vec<f64>,
}

impl Default for CountingSection {
    fn default() -> Self {
        CountingSection {
            grid_step: 1.0,
            t_max_full: 12.0,
            t_max_coset: 12.0,
            t_max_conjugacy: 20.0,
            fit_window_full: [6.0, 12.0],
            fit_window_coset: [6.0, 12.0],
            fit_window_conjugacy: [7.0, 20.0],
            audit_depths: vec![1, 2, 3, 4],
            audit_extension: 3,
            c_lengths: vec![3, 4],
            c_t_ref: None,
            poincare_offsets: vec![0.2, 0.1, 0.05],
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

/// A validated configuration together with the objects it describes.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    /// SHA-256 of the configuration text, in hex.
    pub hash: String,
    pub system: OrbitSystem,
    pub g: ReducedWord,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Experiment> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)?.build(&text)
    }

    /// Validates the configuration and builds the group, space and element.
    pub fn build(self, text: &str) -> Result<Experiment> {
        let c = &self;
        if c.element.g.trim().is_empty() {
            return Err(Error::Config("element.g must be a nonempty word".to_string()));
        }
        let mut gens = GeneratorSet::free(c.group.rank)?;
        if let Some(order) = &c.group.order {
            gens = gens.with_order(order)?;
        }
        if let Some(pairs) = &c.group.involution {
            let pairs = pairs
                .iter()
                .map(|p| {
                    let cs: Vec<char> = p.chars().collect();
                    match cs[..] {
                        [x, y] => Ok((x, y)),
                        _ => Err(Error::Config(format!("involution pair {p:?} must have two letters"))),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            gens = gens.with_involution(&pairs)?;
        }
        let g = gens.parse(&c.element.g)?;
        if g.is_empty() {
            return Err(Error::Config(format!("element.g = {:?} reduces to the identity", c.element.g)));
        }
        let (space, basepoint) = match c.space.kind {
            SpaceKindName::Tree => {
                if c.space.matrices.is_some() || c.space.basepoint.is_some() {
                    return Err(Error::Config("a tree takes weights and basepoint_vertex".to_string()));
                }
                let weights = c
                    .space
                    .weights
                    .as_ref()
                    .ok_or_else(|| Error::Config("space.weights is required for a tree".to_string()))?;
                let space = ModelSpace::weighted_tree(gens.clone(), weights)?;
                let word = gens.parse(c.space.basepoint_vertex.as_deref().unwrap_or(""))?;
                let point = Point::Tree {
                    word,
                    offset: c.space.basepoint_offset.unwrap_or(0.0),
                };
                (space, point)
            }
            SpaceKindName::HalfPlane => {
                if c.space.weights.is_some() || c.space.basepoint_vertex.is_some() {
                    return Err(Error::Config("the half-plane takes matrices and basepoint".to_string()));
                }
                let rows = c
                    .space
                    .matrices
                    .as_ref()
                    .ok_or_else(|| Error::Config("space.matrices is required for the half-plane".to_string()))?;
                let mut mats = Vec::new();
                for [a, b, cc, d] in rows {
                    let det = a * d - b * cc;
                    if (det - 1.0).abs() > DET_TOL {
                        return Err(Error::Config(format!("matrix determinant {det} differs from 1")));
                    }
                    mats.push(Mat2::new(*a, *b, *cc, *d)?);
                }
                check_ping_pong(&mats)?;
                let [x, y] = c.space.basepoint.unwrap_or([0.0, 1.0]);
                (ModelSpace::half_plane(gens.clone(), &mats)?, Point::half_plane(x, y)?)
            }
        };
        let cn = &c.counting;
        if !(cn.grid_step > 0.0) {
            return Err(Error::Config("counting.grid_step must be positive".to_string()));
        }
        for (name, [lo, hi], t_max) in [
            ("fit_window_full", cn.fit_window_full, cn.t_max_full),
            ("fit_window_coset", cn.fit_window_coset, cn.t_max_coset),
            ("fit_window_conjugacy", cn.fit_window_conjugacy, cn.t_max_conjugacy),
        ] {
            if !(lo < hi && hi <= t_max) {
                return Err(Error::Config(format!("counting.{name} = [{lo}, {hi}] must lie below {t_max}")));
            }
        }
        if c.potential.depth == 0 || c.potential.stability_depths.contains(&0) {
            return Err(Error::Config("cylinder depths must be at least 1".to_string()));
        }
        if c.potential.pressure_t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("potential.pressure_t must be increasing".to_string()));
        }
        if c.counting.poincare_offsets.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::Config("counting.poincare_offsets must be positive".to_string()));
        }
        let system = OrbitSystem::new(space, basepoint)?;
        Ok(Experiment {
            hash: hash_text(text),
            config: self,
            system,
            g,
        })
    }
}

pub fn hash_text(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

impl Experiment {
    pub fn gens(&self) -> &GeneratorSet {
        self.system.gens()
    }

    /// Output directory: an explicit path, else the configured one, else
    /// `<root>/<name>` where the root comes from the environment or `out`.
    pub fn output_dir(&self, explicit: Option<&Path>, env_root: Option<&Path>) -> PathBuf {
        if let Some(p) = explicit {
            return p.to_path_buf();
        }
        if let Some(p) = &self.config.output.dir {
            return p.clone();
        }
        env_root.unwrap_or(Path::new("out")).join(&self.config.name)
    }
}
