//! Keyed, counter-based random draws.
//!
//! Every value is a pure function of a [`StreamKey`]: the master seed, the
//! stream the draw belongs to and a handful of integer subkeys such as
//! `(agent, tick)`. There is no hidden consumption counter, so adding or
//! removing other consumers (technical agents, optimizer particles) never
//! shifts the draws seen by the normal agents. Re-running a simulation with
//! the same master seed replays exactly the same noise.
//!
//! The integer mixing is splitmix64, which is bit-exact on every platform.
//! Floats are produced by one fixed mapping of the top 53 bits.

use std::f64::consts::TAU;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// Which family of draws a key addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stream {
    /// Per-agent parameters drawn once at start: subkeys `[agent, param, 0, 0]`.
    AgentInit,
    /// Noise term of the expected return: subkeys `[agent, tick, 0, 0]`.
    NaEpsilon,
    /// Order-price scatter: subkeys `[agent, tick, 0, 0]`.
    NaRho,
    /// Swarm coefficients `r1`/`r2`. `lane` separates independent searches
    /// (one per strategy kind); subkeys `[meta_iter, iteration, particle, which]`.
    Pso { lane: u8 },
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::AgentInit => 0x01,
            Stream::NaEpsilon => 0x02,
            Stream::NaRho => 0x03,
            Stream::Pso { lane } => 0x100 | u64::from(lane),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub master_seed: u64,
    pub stream: Stream,
    pub subkeys: [u64; 4],
}

#[inline(always)]
fn splitmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline(always)]
fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl StreamKey {
    pub fn new(master_seed: u64, stream: Stream, subkeys: [u64; 4]) -> Self {
        Self {
            master_seed,
            stream,
            subkeys,
        }
    }

    pub fn agent_init(master_seed: u64, agent: u64, param: u64) -> Self {
        Self::new(master_seed, Stream::AgentInit, [agent, param, 0, 0])
    }

    pub fn na_epsilon(master_seed: u64, agent: u64, tick: u64) -> Self {
        Self::new(master_seed, Stream::NaEpsilon, [agent, tick, 0, 0])
    }

    pub fn na_rho(master_seed: u64, agent: u64, tick: u64) -> Self {
        Self::new(master_seed, Stream::NaRho, [agent, tick, 0, 0])
    }

    pub fn pso(master_seed: u64, lane: u8, meta_iter: u64, iteration: u64, particle: u64, which: u64) -> Self {
        Self::new(
            master_seed,
            Stream::Pso { lane },
            [meta_iter, iteration, particle, which],
        )
    }

    #[inline]
    fn state(&self) -> u64 {
        let mut h = splitmix(self.master_seed ^ self.stream.tag().wrapping_mul(GOLDEN));
        for (i, &k) in self.subkeys.iter().enumerate() {
            h = splitmix(h ^ splitmix(k.wrapping_add(GOLDEN.wrapping_mul(i as u64 + 1))));
        }
        h
    }

    /// The `counter`-th 64-bit word derived from this key.
    #[inline]
    pub fn bits(&self, counter: u64) -> u64 {
        splitmix(self.state().wrapping_add(GOLDEN.wrapping_mul(counter + 1)))
    }

    /// Uniform draw on `[lo, hi)`.
    #[inline]
    pub fn uniform(&self, lo: f64, hi: f64) -> f64 {
        assert!(lo < hi, "uniform: empty interval [{lo}, {hi})");
        let v = lo + (hi - lo) * unit_f64(self.bits(0));
        if v < hi {
            v
        } else {
            // rounding of lo + span*u can land on hi for wide spans
            hi.next_down()
        }
    }

    /// Zero-mean normal draw with standard deviation `sigma` (Box-Muller).
    #[inline]
    pub fn normal(&self, sigma: f64) -> f64 {
        assert!(sigma > 0.0, "normal: sigma must be positive, got {sigma}");
        let s = self.state();
        let u1 = 1.0 - unit_f64(splitmix(s.wrapping_add(GOLDEN))); // (0, 1]
        let u2 = unit_f64(splitmix(s.wrapping_add(GOLDEN.wrapping_mul(2))));
        sigma * (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
    }
}

/// Convenience free functions matching the key-first call style.
pub fn uniform(key: StreamKey, lo: f64, hi: f64) -> f64 {
    key.uniform(lo, hi)
}

pub fn normal(key: StreamKey, sigma: f64) -> f64 {
    key.normal(sigma)
}
