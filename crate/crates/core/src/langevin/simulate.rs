//! Fixed-step Euler–Maruyama for the stopped Langevin diffusion.
//!
//! Randomness comes from ChaCha20 (`rand_chacha` 0.9) seeded with
//! `seed_from_u64(seed)`; path `i` of a batch uses stream `i` of that
//! generator. Normal deviates use `rand_distr::StandardNormal` (ziggurat).
//! Both are portable and deterministic, so identical inputs give
//! bit-identical paths on every platform.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{
    generator_coefficients, psd_sqrt, upper_to_matrix, FloatGenerator, GeneratorCoefficients,
    PSD_TOL,
};
use crate::error::{Error, Result};
use crate::model::{RateVector, ReactionNetwork};

/// Axis-aligned box; paths stop on first leaving its closure.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Dimension {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
                return Err(Error::Simulation(format!(
                    "box bounds for coordinate {} must satisfy 0 <= lower < upper < inf",
                    i
                )));
            }
        }
        Ok(BoxDomain { lower, upper })
    }

    /// The same interval for every coordinate.
    pub fn uniform(n: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; n], vec![upper; n])
    }

    /// (1e-6, 1e3) in every coordinate.
    pub fn default_for(n: usize) -> Self {
        Self::uniform(n, 1e-6, 1e3).expect("valid default box")
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains_closed(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&v, (&lo, &hi))| v >= lo && v <= hi)
    }

    pub fn contains_open(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&v, (&lo, &hi))| v > lo && v < hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmConfig {
    pub step: f64,
    pub horizon: f64,
    pub seed: u64,
    /// When false, B is forced to zero and the scheme is explicit Euler on the ODE.
    pub diffusion: bool,
}

impl EmConfig {
    pub fn new(step: f64, horizon: f64, seed: u64) -> Self {
        EmConfig {
            step,
            horizon,
            seed,
            diffusion: true,
        }
    }

    pub fn without_diffusion(mut self) -> Self {
        self.diffusion = false;
        self
    }

    fn steps(&self) -> Result<usize> {
        if !(self.step > 0.0 && self.horizon > 0.0)
            || !self.step.is_finite()
            || !self.horizon.is_finite()
        {
            return Err(Error::Simulation(
                "step and horizon must be positive".into(),
            ));
        }
        if self.step >= self.horizon {
            return Err(Error::Simulation(
                "step must be smaller than horizon".into(),
            ));
        }
        Ok((self.horizon / self.step).round() as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPath {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub stopped: bool,
    /// Index of the first state outside the closed box.
    pub tau_index: Option<usize>,
}

/// Final state of a path, at the horizon or at the exit time.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnd {
    pub time: f64,
    pub state: Vec<f64>,
    pub stopped: bool,
}

struct Stepper<'a> {
    gen: &'a FloatGenerator,
    domain: &'a BoxDomain,
    cfg: &'a EmConfig,
    steps: usize,
}

impl<'a> Stepper<'a> {
    fn new(
        gen: &'a FloatGenerator,
        x0: &[f64],
        domain: &'a BoxDomain,
        cfg: &'a EmConfig,
    ) -> Result<Self> {
        let steps = cfg.steps()?;
        if x0.len() != gen.dim() || domain.dim() != gen.dim() {
            return Err(Error::Dimension {
                expected: gen.dim(),
                got: x0.len().max(domain.dim()),
            });
        }
        if !domain.contains_open(x0) {
            return Err(Error::Simulation(
                "initial state must lie inside the box".into(),
            ));
        }
        Ok(Stepper {
            gen,
            domain,
            cfg,
            steps,
        })
    }

    /// Runs one path, handing every state (including x0) to `visit`.
    /// Returns whether the path left the box.
    fn run(&self, x0: &[f64], stream: u64, mut visit: impl FnMut(usize, &[f64])) -> Result<bool> {
        let n = self.gen.dim();
        let h = self.cfg.step;
        let sqrt_h = h.sqrt();
        let mut rng = ChaCha20Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(stream);

        let mut x = x0.to_vec();
        let mut drift = vec![0.0; n];
        let mut upper = vec![0.0; n * (n + 1) / 2];
        let mut noise = DVector::<f64>::zeros(n);
        visit(0, &x);
        for k in 1..=self.steps {
            self.gen.drift_into(&x, &mut drift);
            if self.cfg.diffusion {
                self.gen.diffusion_upper_into(&x, &mut upper);
                for z in noise.iter_mut() {
                    *z = StandardNormal.sample(&mut rng);
                }
                let kick: DVector<f64> = if n == 1 {
                    noise.clone() * upper[0].max(0.0).sqrt()
                } else {
                    let sigma: DMatrix<f64> = psd_sqrt(&upper_to_matrix(n, &upper), PSD_TOL)?;
                    sigma * &noise
                };
                for i in 0..n {
                    x[i] += drift[i] * h + kick[i] * sqrt_h;
                }
            } else {
                for i in 0..n {
                    x[i] += drift[i] * h;
                }
            }
            visit(k, &x);
            if !self.domain.contains_closed(&x) {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// One Euler–Maruyama path of the CLE of (net, kappa), stopped on exit from
/// the closed box.
pub fn simulate_em(
    net: &ReactionNetwork,
    kappa: &RateVector,
    x0: &[f64],
    domain: &BoxDomain,
    step: f64,
    horizon: f64,
    seed: u64,
) -> Result<SimulationPath> {
    let gc = generator_coefficients(net, kappa)?;
    simulate_path(&gc, x0, domain, &EmConfig::new(step, horizon, seed))
}

fn path_with_stream(
    gen: &FloatGenerator,
    x0: &[f64],
    domain: &BoxDomain,
    cfg: &EmConfig,
    stream: u64,
) -> Result<SimulationPath> {
    let stepper = Stepper::new(gen, x0, domain, cfg)?;
    let mut times = Vec::with_capacity(stepper.steps + 1);
    let mut states = Vec::with_capacity(stepper.steps + 1);
    let stopped = stepper.run(x0, stream, |k, x| {
        times.push(k as f64 * cfg.step);
        states.push(x.to_vec());
    })?;
    let tau_index = stopped.then(|| states.len() - 1);
    Ok(SimulationPath {
        times,
        states,
        stopped,
        tau_index,
    })
}

pub fn simulate_path(
    gc: &GeneratorCoefficients,
    x0: &[f64],
    domain: &BoxDomain,
    cfg: &EmConfig,
) -> Result<SimulationPath> {
    path_with_stream(&FloatGenerator::new(gc), x0, domain, cfg, 0)
}

/// `paths` full paths; path i uses stream i of the master seed. Runs on the
/// current rayon pool, output in path order.
pub fn simulate_paths(
    gc: &GeneratorCoefficients,
    x0: &[f64],
    domain: &BoxDomain,
    cfg: &EmConfig,
    paths: usize,
) -> Result<Vec<SimulationPath>> {
    let gen = FloatGenerator::new(gc);
    (0..paths as u64)
        .into_par_iter()
        .map(|i| path_with_stream(&gen, x0, domain, cfg, i))
        .collect()
}

/// Like [`simulate_paths`] but keeps only the final state of each path.
pub fn simulate_endpoints(
    gc: &GeneratorCoefficients,
    x0: &[f64],
    domain: &BoxDomain,
    cfg: &EmConfig,
    paths: usize,
) -> Result<Vec<PathEnd>> {
    let gen = FloatGenerator::new(gc);
    let stepper = Stepper::new(&gen, x0, domain, cfg)?;
    (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut last = (0, x0.to_vec());
            let stopped = stepper.run(x0, i, |k, x| {
                last.0 = k;
                last.1.copy_from_slice(x);
            })?;
            Ok(PathEnd {
                time: last.0 as f64 * cfg.step,
                state: last.1,
                stopped,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_network;

    fn example_1_1() -> GeneratorCoefficients {
        let d = parse_network("0 -> 2 S [1]\n0 -> S [4]\nS -> 0 [1]\n0 -> 3 S [2]").unwrap();
        generator_coefficients(&d.network, &d.rates.unwrap()).unwrap()
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let gc = example_1_1();
        let dom = BoxDomain::uniform(1, 0.0, 200.0).unwrap();
        let cfg = EmConfig::new(1e-3, 1.0, 7);
        let a = simulate_path(&gc, &[2.0], &dom, &cfg).unwrap();
        let b = simulate_path(&gc, &[2.0], &dom, &cfg).unwrap();
        assert_eq!(a, b);
        let c = simulate_path(&gc, &[2.0], &dom, &EmConfig::new(1e-3, 1.0, 8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_diffusion_follows_euler() {
        let gc = example_1_1();
        let dom = BoxDomain::uniform(1, 0.0, 200.0).unwrap();
        let h = 1e-3;
        let path = simulate_path(
            &gc,
            &[0.5],
            &dom,
            &EmConfig::new(h, 1.0, 0).without_diffusion(),
        )
        .unwrap();
        let mut x = 0.5;
        for _ in 0..1000 {
            x += (12.0 - x) * h;
        }
        assert_eq!(*path.states.last().unwrap(), vec![x]);
        let exact = 12.0 - 11.5 * (-1.0f64).exp();
        assert!((x - exact).abs() < 5e-3);
        assert_eq!(path.times.len(), 1001);
        assert!((path.times[1000] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stops_at_first_exit() {
        let gc = example_1_1();
        // Drift pushes towards 12, so the upper wall at 3 is hit quickly.
        let dom = BoxDomain::uniform(1, 0.0, 3.0).unwrap();
        let path = simulate_path(&gc, &[2.0], &dom, &EmConfig::new(1e-3, 5.0, 3)).unwrap();
        assert!(path.stopped);
        let tau = path.tau_index.unwrap();
        assert_eq!(tau, path.states.len() - 1);
        assert!(!dom.contains_closed(&path.states[tau]));
        assert!(path.states[..tau].iter().all(|s| dom.contains_closed(s)));
    }

    #[test]
    fn endpoints_match_full_paths() {
        let gc = example_1_1();
        let dom = BoxDomain::uniform(1, 0.0, 200.0).unwrap();
        let cfg = EmConfig::new(1e-2, 1.0, 11);
        let full = simulate_paths(&gc, &[2.0], &dom, &cfg, 8).unwrap();
        let ends = simulate_endpoints(&gc, &[2.0], &dom, &cfg, 8).unwrap();
        for (p, e) in full.iter().zip(&ends) {
            assert_eq!(p.states.last().unwrap(), &e.state);
            assert_eq!(p.stopped, e.stopped);
        }
        assert_eq!(full[0], simulate_path(&gc, &[2.0], &dom, &cfg).unwrap());
    }

    #[test]
    fn two_species_path_stays_finite() {
        let d = parse_network("A0 -> 2 A1 [1]\nA0 -> A1 + A2 [1]\nA0 -> 2 A3 [1]\n0 -> A0 [5]\nA1 -> 0 [1]\nA2 -> 0 [1]\nA3 -> 0 [1]").unwrap();
        let gc = generator_coefficients(&d.network, &d.rates.unwrap()).unwrap();
        let dom = BoxDomain::default_for(4);
        let path = simulate_path(&gc, &[5.0; 4], &dom, &EmConfig::new(1e-3, 0.5, 1)).unwrap();
        assert!(path.states.iter().flatten().all(|v| v.is_finite()));
    }

    #[test]
    fn invalid_settings() {
        let gc = example_1_1();
        let dom = BoxDomain::uniform(1, 1.0, 200.0).unwrap();
        assert!(simulate_path(&gc, &[0.5], &dom, &EmConfig::new(1e-3, 1.0, 0)).is_err());
        assert!(simulate_path(&gc, &[2.0], &dom, &EmConfig::new(1.0, 1.0, 0)).is_err());
        assert!(simulate_path(&gc, &[2.0], &dom, &EmConfig::new(-1.0, 1.0, 0)).is_err());
        assert!(BoxDomain::uniform(1, 2.0, 1.0).is_err());
        assert!(BoxDomain::uniform(1, -1.0, 1.0).is_err());
    }
}
