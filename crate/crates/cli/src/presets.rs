//! Compiled-in experiments reproducing the paper's figures.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::config::*;

pub const NAMES: [&str; 5] = ["fig2", "fig3", "fig4", "fig5", "fig6"];

pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig2" => "3D Dirac positive-branch Gaussian, m=0.02, k'=(0,0.01,0), sigma=1/32, T=150",
        "fig3" => "3D Dirac localized state, m=0.03, spinor (1,0,0,0), snapshots 0/8/16/28",
        "fig4" => "fig3 state at t=28 with projections along y, x and onto the (x,y) plane",
        "fig5" => "1D Dirac particle/antiparticle superposition, m=0.15, sigma=1/40, k'=0.01 pi, T=150",
        "fig6" => "3D Dirac superposition, m=0.3, k'=(0,0.01 pi,0), sigma=1/32, T=200",
        _ => return None,
    })
}

fn dirac(dimension: usize, mass: f64) -> ModelConfig {
    ModelConfig {
        family: Family::Dirac,
        dimension,
        mass,
    }
}

fn bcc(n: usize) -> GridConfig {
    GridConfig {
        kind: GridKind::Bcc,
        sizes: vec![n; 3],
    }
}

fn localized_bcc(name: &str, steps: u64, snapshots: Vec<u64>, marginals: Vec<Vec<usize>>) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        model: dirac(3, 0.03),
        grid: bcc(32),
        initial: InitialState::Localized {
            site: vec![32, 32, 32],
            spinor: vec![[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
        },
        engine: Engine::Position,
        steps,
        stride: 1,
        observables: vec![Observable::MeanPosition],
        snapshots,
        marginals,
        dumps: false,
        output: None,
        seed: 0,
    }
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    Some(match name {
        "fig2" => ExperimentConfig {
            name: name.into(),
            model: dirac(3, 0.02),
            grid: bcc(64),
            initial: InitialState::Gaussian {
                k_prime: vec![0.0, 0.01, 0.0],
                sigma: vec![1.0 / 32.0],
                branch: BranchConfig { s: 1, p: 1 },
            },
            engine: Engine::Spectral,
            steps: 150,
            stride: 10,
            observables: vec![Observable::MeanPosition],
            snapshots: vec![0, 50, 100, 150],
            // Summed along z.
            marginals: vec![vec![0, 1]],
            dumps: false,
            output: None,
            seed: 0,
        },
        "fig3" => localized_bcc(name, 28, vec![0, 8, 16, 28], vec![vec![]]),
        "fig4" => localized_bcc(name, 28, vec![28], vec![vec![0, 2], vec![1, 2], vec![0, 1]]),
        "fig5" => ExperimentConfig {
            name: name.into(),
            model: dirac(1, 0.15),
            grid: GridConfig {
                kind: GridKind::Cubic,
                sizes: vec![2048],
            },
            initial: InitialState::Superposition {
                k_prime: vec![0.01 * PI],
                sigma: vec![1.0 / 40.0],
                c_plus: [FRAC_1_SQRT_2, 0.0],
                c_minus: [FRAC_1_SQRT_2, 0.0],
                p: 0,
            },
            engine: Engine::Spectral,
            steps: 150,
            stride: 1,
            observables: vec![Observable::MeanPosition, Observable::Decomposition, Observable::NewtonWigner],
            snapshots: vec![0, 50, 100, 150],
            marginals: vec![vec![]],
            dumps: false,
            output: None,
            seed: 0,
        },
        "fig6" => ExperimentConfig {
            name: name.into(),
            model: dirac(3, 0.3),
            grid: bcc(64),
            initial: InitialState::Weighted {
                k_prime: vec![0.0, 0.01 * PI, 0.0],
                sigma: vec![1.0 / 32.0],
                weights: vec![[FRAC_1_SQRT_2, 0.0], [0.0, 0.0], [FRAC_1_SQRT_2, 0.0], [0.0, 0.0]],
            },
            engine: Engine::Spectral,
            steps: 200,
            stride: 1,
            observables: vec![Observable::MeanPosition, Observable::Decomposition],
            snapshots: vec![],
            marginals: vec![],
            dumps: false,
            output: None,
            seed: 0,
        },
        _ => return None,
    })
}
