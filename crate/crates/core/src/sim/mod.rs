//! Seeded, reproducible samplers for every process in the family: plain and
//! weighted counts, thinning, stable/inverse-stable subordinators and their
//! paths, fractional fields, path integrals, and the Bernoulli-lattice
//! approximations.

mod counts;
mod fractional;
mod lattice;
mod stable;

pub use counts::{
    sample_gprf, sample_gprf_components, sample_gspp, sample_prf, sample_prf_pattern, thin_gprf,
    thin_prf, GprfMethod,
};
pub use fractional::{sample_fgprf, sample_fgspp, sample_gprf_integral};
pub use lattice::{lattice_exact_law, sample_lattice_field};
pub use stable::{
    sample_inverse_stable, sample_inverse_stable_path, sample_inverse_stable_path_with_step,
    sample_stable_subordinator, DEFAULT_PATH_STEP,
};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::model::{ModelError, RateVector, SkellamRates, Window};

/// Counter-based reproducible random stream: identical (seed, stream_id)
/// yield identical sequences; distinct stream ids are independent streams
/// of the same keyed generator, so Monte Carlo batches can run concurrently
/// and still produce order-independent, thread-count-independent output.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha12Rng,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Derive the child stream with the given index: independent of this
    /// stream's current state, deterministic in (seed, stream_id, child).
    pub fn substream(&self, child: u64) -> RngStream {
        let id = splitmix64(splitmix64(self.stream_id) ^ child.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        RngStream::new(self.seed, id)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

/// A realized point configuration: marked locations inside a window.
#[derive(Clone, Debug)]
pub struct PointPattern {
    window: Window,
    points: Vec<(Vec<f64>, u32)>,
}

impl PointPattern {
    pub(crate) fn new(window: Window, points: Vec<(Vec<f64>, u32)>) -> Self {
        PointPattern { window, points }
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn points(&self) -> &[(Vec<f64>, u32)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points carrying mark j.
    pub fn mark_count(&self, j: u32) -> u64 {
        self.points.iter().filter(|(_, m)| *m == j).count() as u64
    }

    /// Σ j · (count of mark j), the weighted field value.
    pub fn weighted_count(&self) -> u64 {
        self.points.iter().map(|(_, m)| *m as u64).sum()
    }
}

/// A non-decreasing subordinator (or inverse-subordinator) trajectory
/// evaluated on an increasing time grid.
#[derive(Clone, Debug)]
pub struct SubordinatorPath {
    grid: Vec<f64>,
    values: Vec<f64>,
    alpha: f64,
}

impl SubordinatorPath {
    pub(crate) fn new(grid: Vec<f64>, values: Vec<f64>, alpha: f64) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        SubordinatorPath {
            grid,
            values,
            alpha,
        }
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Bernoulli-lattice approximation at scale n: each of the ⌊ns⌋⌊nt⌋ cells
/// independently realizes weight j (or signed weight i·j) with probability
/// λ_j/n² (λ_j^{(i)}/n²), else 0.
#[derive(Clone, Debug)]
pub enum LatticeConfig {
    Gprf { n: u32, rates: RateVector },
    Skellam { n: u32, rates: SkellamRates },
}

impl LatticeConfig {
    pub fn scale(&self) -> u32 {
        match self {
            LatticeConfig::Gprf { n, .. } | LatticeConfig::Skellam { n, .. } => *n,
        }
    }

    /// Per-cell category probabilities as (signed weight, probability)
    /// pairs; validates that they form a strict sub-distribution.
    pub(crate) fn cell_law(&self) -> Result<Vec<(i64, f64)>, ModelError> {
        let n = self.scale();
        if n == 0 {
            return Err(ModelError::InvalidParams(
                "lattice scale must be at least 1".into(),
            ));
        }
        let n2 = (n as f64) * (n as f64);
        let law: Vec<(i64, f64)> = match self {
            LatticeConfig::Gprf { rates, .. } => rates
                .rates()
                .iter()
                .enumerate()
                .map(|(i, &l)| (i as i64 + 1, l / n2))
                .collect(),
            LatticeConfig::Skellam { rates, .. } => {
                let mut law = Vec::with_capacity(2 * rates.k());
                for (i, &l) in rates.plus().rates().iter().enumerate() {
                    law.push((i as i64 + 1, l / n2));
                }
                for (i, &l) in rates.minus().rates().iter().enumerate() {
                    law.push((-(i as i64 + 1), l / n2));
                }
                law
            }
        };
        let total: f64 = law.iter().map(|(_, p)| p).sum();
        if law.iter().any(|&(_, p)| !(p > 0.0 && p < 1.0)) || total >= 1.0 {
            return Err(ModelError::InvalidParams(format!(
                "lattice cell probabilities must lie in (0,1) with sum < 1; scale {n} is too \
                 coarse for these rates (sum {total})"
            )));
        }
        Ok(law)
    }
}
