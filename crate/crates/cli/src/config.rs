//! Experiment configuration, read from and written to a single JSON document.

use anyhow::{bail, ensure, Context, Result};
use num_complex::Complex64;
use qwalk_core::{
    branch_weighted_state, gaussian_particle_state, localized_state, superposition_state, Branch, Domain,
    FieldState, GridSpec, LatticeKind, ParticleStateSpec, WalkModel, WaveVector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Weyl,
    Dirac,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub family: Family,
    pub dimension: usize,
    #[serde(default)]
    pub mass: f64,
}

impl ModelConfig {
    pub fn build(&self) -> Result<WalkModel> {
        Ok(match self.family {
            Family::Weyl => {
                ensure!(self.mass == 0.0, "Weyl walks are massless, got mass {}", self.mass);
                WalkModel::weyl(self.dimension)?
            }
            Family::Dirac => WalkModel::dirac(self.dimension, self.mass)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Cubic,
    Bcc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub kind: GridKind,
    /// Cell counts per axis; a BCC grid has twice as many sites.
    pub sizes: Vec<usize>,
}

impl GridConfig {
    pub fn build(&self) -> Result<GridSpec> {
        let kind = match self.kind {
            GridKind::Cubic => LatticeKind::SimpleCubic,
            GridKind::Bcc => LatticeKind::Bcc,
        };
        Ok(GridSpec::new(kind, &self.sizes)?)
    }
}

/// Complex number as `[re, im]`.
pub type ComplexPair = [f64; 2];

fn complex(p: ComplexPair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// Branch label `(s, p)`; `p` is 0 for two-component walks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchConfig {
    pub s: i8,
    #[serde(default)]
    pub p: i8,
}

impl From<BranchConfig> for Branch {
    fn from(b: BranchConfig) -> Self {
        Branch { s: b.s, p: b.p }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum InitialState {
    /// Single site with a coin spinor.
    Localized { site: Vec<i64>, spinor: Vec<ComplexPair> },
    /// Gaussian particle state on one branch.
    Gaussian {
        k_prime: Vec<f64>,
        sigma: Vec<f64>,
        branch: BranchConfig,
    },
    /// `c+ |psi_+> + c- |psi_->` sharing one envelope.
    Superposition {
        k_prime: Vec<f64>,
        sigma: Vec<f64>,
        c_plus: ComplexPair,
        c_minus: ComplexPair,
        #[serde(default)]
        p: i8,
    },
    /// Common envelope with arbitrary weights in the walk eigenbasis.
    Weighted {
        k_prime: Vec<f64>,
        sigma: Vec<f64>,
        weights: Vec<ComplexPair>,
    },
    /// Normalised uniform random amplitudes drawn from the config seed.
    Random,
}

impl InitialState {
    /// Centre wave-vector, used by the truncated engine.
    pub fn k_prime(&self) -> WaveVector {
        match self {
            InitialState::Gaussian { k_prime, .. }
            | InitialState::Superposition { k_prime, .. }
            | InitialState::Weighted { k_prime, .. } => WaveVector::new(k_prime),
            _ => WaveVector::zero(),
        }
    }
}

fn sigma3(sigma: &[f64], d: usize) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    match sigma.len() {
        1 => out[..d].fill(sigma[0]),
        n if n == d => out[..d].copy_from_slice(sigma),
        n => bail!("sigma has {n} entries for a {d}-dimensional walk"),
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Engine {
    /// Step-by-step application of the transition matrices.
    Position,
    /// Exact spectral propagation.
    Spectral,
    /// Spectral propagation with a Taylor-truncated dispersion.
    Truncated { order: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    MeanPosition,
    Decomposition,
    NewtonWigner,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub initial: InitialState,
    pub engine: Engine,
    pub steps: u64,
    pub stride: u64,
    pub observables: Vec<Observable>,
    /// Steps at which probability marginals are written.
    #[serde(default)]
    pub snapshots: Vec<u64>,
    /// Axis sets kept in each snapshot marginal; empty keeps every axis.
    #[serde(default)]
    pub marginals: Vec<Vec<usize>>,
    /// Write binary state dumps at each snapshot.
    #[serde(default)]
    pub dumps: bool,
    /// Output directory; the command line or `QWALK_OUT_DIR` wins when set.
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).context("parsing experiment config")?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let model = self.model.build()?;
        let grid = self.grid.build()?;
        ensure!(
            grid.dimension() == model.dimension(),
            "grid dimension {} does not match walk dimension {}",
            grid.dimension(),
            model.dimension()
        );
        ensure!(
            grid.is_bcc() == (model.dimension() == 3),
            "three-dimensional walks run on BCC grids, lower dimensions on cubic grids"
        );
        ensure!(self.stride > 0, "stride must be positive");
        for &t in &self.snapshots {
            ensure!(t <= self.steps, "snapshot {t} is beyond the run length {}", self.steps);
        }
        for axes in &self.marginals {
            for &a in axes {
                ensure!(a < grid.dimension(), "marginal axis {a} out of range");
            }
        }
        if !model.is_dirac() {
            ensure!(
                !self.observables.iter().any(|o| *o != Observable::MeanPosition),
                "decomposition and Newton-Wigner observables need a Dirac walk"
            );
        }
        if let Engine::Truncated { order } = self.engine {
            ensure!((1..=2).contains(&order), "truncation order must be 1 or 2");
        }
        Ok(())
    }

    pub fn build_initial(&self, grid: &GridSpec, model: &WalkModel) -> Result<FieldState> {
        let d = grid.dimension();
        let state = match &self.initial {
            InitialState::Localized { site, spinor } => {
                ensure!(site.len() == d, "site has {} coordinates, expected {d}", site.len());
                let mut x = [0i64; 3];
                x[..d].copy_from_slice(site);
                let zeta: Vec<Complex64> = spinor.iter().copied().map(complex).collect();
                localized_state(grid, model, x, &zeta)?
            }
            InitialState::Gaussian {
                k_prime,
                sigma,
                branch,
            } => {
                let spec = ParticleStateSpec::new(WaveVector::new(k_prime), sigma3(sigma, d)?, (*branch).into());
                gaussian_particle_state(grid, model, &spec)?
            }
            InitialState::Superposition {
                k_prime,
                sigma,
                c_plus,
                c_minus,
                p,
            } => {
                let spec = ParticleStateSpec::new(WaveVector::new(k_prime), sigma3(sigma, d)?, Branch { s: 1, p: *p });
                superposition_state(grid, model, &spec, complex(*c_plus), complex(*c_minus))?
            }
            InitialState::Weighted {
                k_prime,
                sigma,
                weights,
            } => {
                let w: Vec<Complex64> = weights.iter().copied().map(complex).collect();
                branch_weighted_state(grid, model, WaveVector::new(k_prime), sigma3(sigma, d)?, &w)?
            }
            InitialState::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let len = grid.site_count() * model.coin_dim();
                let amps = (0..len)
                    .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect();
                let mut s = FieldState::new(grid.clone(), *model, Domain::Position, amps)?;
                s.normalize();
                s
            }
        };
        Ok(state)
    }
}
