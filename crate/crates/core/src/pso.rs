//! Particle swarm search over a single integer parameter.
//!
//! Particles start evenly spaced across `(t_min, t_max]` with zero velocity.
//! Each iteration moves every particle by the inertia / global-best /
//! personal-best update, clamps it to the bounds (zeroing velocity on a
//! clamp), then evaluates all particles at their rounded positions. Bests
//! change only on strict improvement, so earlier incumbents win ties.
//!
//! Evaluations within an iteration run in parallel; the update is serial, so
//! results do not depend on the thread count.

use rayon::prelude::*;
use thiserror::Error;

use crate::rng::StreamKey;

#[derive(Clone, Debug, PartialEq)]
pub struct SwarmConfig {
    pub n_particles: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub c1: f64,
    pub c2: f64,
    pub t_min: u64,
    pub t_max: u64,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            n_particles: 200,
            iterations: 50,
            inertia: 0.99,
            c1: 0.3,
            c2: 0.3,
            t_min: 100,
            t_max: 300_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SwarmConfigError {
    #[error("particle count must be at least 1")]
    NoParticles,
    #[error("iteration count must be at least 1")]
    NoIterations,
    #[error("bounds out of order: t_min {0} > t_max {1}")]
    Bounds(u64, u64),
    #[error("t_min must be at least 1")]
    ZeroLowerBound,
    #[error("coefficient {0} must be finite")]
    Coefficient(&'static str),
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<(), SwarmConfigError> {
        if self.n_particles == 0 {
            return Err(SwarmConfigError::NoParticles);
        }
        if self.iterations == 0 {
            return Err(SwarmConfigError::NoIterations);
        }
        if self.t_min > self.t_max {
            return Err(SwarmConfigError::Bounds(self.t_min, self.t_max));
        }
        if self.t_min == 0 {
            return Err(SwarmConfigError::ZeroLowerBound);
        }
        for (name, v) in [("w", self.inertia), ("c1", self.c1), ("c2", self.c2)] {
            if !v.is_finite() {
                return Err(SwarmConfigError::Coefficient(name));
            }
        }
        Ok(())
    }
}

/// Where a search draws its `r1`/`r2` coefficients from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PsoKeys {
    pub master_seed: u64,
    /// Separates independent searches sharing a seed.
    pub lane: u8,
    /// Outer loop round; each round restarts the swarm with fresh draws.
    pub meta_iter: u64,
}

impl PsoKeys {
    fn r(&self, iteration: usize, particle: usize, which: u64) -> f64 {
        StreamKey::pso(
            self.master_seed,
            self.lane,
            self.meta_iter,
            iteration as u64,
            particle as u64,
            which,
        )
        .uniform(0.0, 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Particle {
    pub pos: f64,
    pub vel: f64,
    pub best_pos: f64,
    pub best_fit: f64,
}

impl Particle {
    fn unevaluated(pos: f64) -> Self {
        Self {
            pos,
            vel: 0.0,
            best_pos: pos,
            best_fit: f64::NEG_INFINITY,
        }
    }

    /// One velocity/position update with explicit coefficients.
    pub fn advance(&mut self, global_best: f64, r1: f64, r2: f64, cfg: &SwarmConfig) {
        self.vel =
            cfg.inertia * self.vel + cfg.c1 * r1 * (global_best - self.pos) + cfg.c2 * r2 * (self.best_pos - self.pos);
        self.pos += self.vel;
        let (lo, hi) = (cfg.t_min as f64, cfg.t_max as f64);
        if self.pos < lo {
            self.pos = lo;
            self.vel = 0.0;
        } else if self.pos > hi {
            self.pos = hi;
            self.vel = 0.0;
        }
    }

    /// The integer parameter this particle is evaluated at.
    pub fn candidate(&self) -> u64 {
        self.pos.round() as u64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Swarm {
    pub particles: Vec<Particle>,
    pub best_pos: f64,
    pub best_fit: f64,
    pub iteration: usize,
}

impl Swarm {
    pub fn best_candidate(&self) -> u64 {
        self.best_pos.round() as u64
    }

    fn evaluate<F>(&mut self, fitness: &F)
    where
        F: Fn(u64) -> f64 + Sync,
    {
        let fits: Vec<f64> = self.particles.par_iter().map(|p| fitness(p.candidate())).collect();
        for (p, f) in self.particles.iter_mut().zip(fits) {
            if f > p.best_fit {
                p.best_fit = f;
                p.best_pos = p.pos;
            }
            if f > self.best_fit {
                self.best_fit = f;
                self.best_pos = p.pos;
            }
        }
    }
}

/// Evenly spaced particles at `t_min + (t_max - t_min) * k / n_P`, k = 1..=n_P.
pub fn init_swarm(cfg: &SwarmConfig) -> Swarm {
    let span = (cfg.t_max - cfg.t_min) as f64;
    let n = cfg.n_particles as f64;
    let particles = (1..=cfg.n_particles)
        .map(|k| Particle::unevaluated(cfg.t_min as f64 + span * (k as f64 / n)))
        .collect();
    Swarm {
        particles,
        best_pos: f64::NAN,
        best_fit: f64::NEG_INFINITY,
        iteration: 0,
    }
}

/// Evaluate a freshly initialised swarm.
pub fn evaluate_initial<F>(swarm: &mut Swarm, fitness: &F)
where
    F: Fn(u64) -> f64 + Sync,
{
    swarm.evaluate(fitness);
}

/// Move every particle once, then re-evaluate.
pub fn step<F>(swarm: &mut Swarm, fitness: &F, cfg: &SwarmConfig, keys: PsoKeys)
where
    F: Fn(u64) -> f64 + Sync,
{
    assert!(
        swarm.best_fit > f64::NEG_INFINITY,
        "swarm must be evaluated before stepping"
    );
    swarm.iteration += 1;
    let g = swarm.best_pos;
    let it = swarm.iteration;
    for (k, p) in swarm.particles.iter_mut().enumerate() {
        let r1 = keys.r(it, k, 0);
        let r2 = keys.r(it, k, 1);
        p.advance(g, r1, r2, cfg);
    }
    swarm.evaluate(fitness);
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsoOutcome {
    pub t_best: u64,
    pub best_fitness: f64,
    /// Global best fitness after the initial pass and after each step.
    pub history: Vec<f64>,
}

/// Full search: initialise, evaluate, then `iterations` steps.
pub fn optimize<F>(fitness: F, cfg: &SwarmConfig, keys: PsoKeys) -> Result<PsoOutcome, SwarmConfigError>
where
    F: Fn(u64) -> f64 + Sync,
{
    cfg.validate()?;
    let mut swarm = init_swarm(cfg);
    evaluate_initial(&mut swarm, &fitness);
    let mut history = Vec::with_capacity(cfg.iterations + 1);
    history.push(swarm.best_fit);
    for _ in 0..cfg.iterations {
        step(&mut swarm, &fitness, cfg, keys);
        history.push(swarm.best_fit);
    }
    Ok(PsoOutcome {
        t_best: swarm.best_candidate(),
        best_fitness: swarm.best_fit,
        history,
    })
}
