//! Seeded random streams and exact samplers for balls, shells and spheres in
//! dimensions one to three.

use alloc::format;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::{cos, pow, sin, sqrt, PI};

/// Largest dimension the samplers support.
pub const MAX_SAMPLING_DIM: u32 = 3;

/// Monte Carlo work is split into batches of this many samples, each with its
/// own stream, so sequential and parallel runs agree bit for bit.
pub const BATCH: usize = 1 << 15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for sub-stream `stream` of run `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix(seed ^ splitmix(stream.wrapping_add(1))))
}

pub(crate) fn check_dim(n: u32) -> Result<()> {
    if n == 0 || n > MAX_SAMPLING_DIM {
        return Err(Error::Unsupported(format!(
            "Monte Carlo sampling needs 1 <= n <= {MAX_SAMPLING_DIM}, got {n}"
        )));
    }
    Ok(())
}

/// Writes a uniformly distributed unit vector of dimension `out.len()`.
pub fn unit_direction<R: Rng>(rng: &mut R, out: &mut [f64]) {
    match out.len() {
        1 => out[0] = if rng.random::<bool>() { 1.0 } else { -1.0 },
        2 => {
            let t = 2.0 * PI * rng.random::<f64>();
            out[0] = cos(t);
            out[1] = sin(t);
        }
        3 => {
            let z = 2.0 * rng.random::<f64>() - 1.0;
            let t = 2.0 * PI * rng.random::<f64>();
            let rho = sqrt((1.0 - z * z).max(0.0));
            out[0] = rho * cos(t);
            out[1] = rho * sin(t);
            out[2] = z;
        }
        d => panic!("unit_direction: unsupported dimension {d}"),
    }
}

/// Uniform point of the shell `r_in <= |y| <= r_out` (a ball when
/// `r_in = 0`), by inverting the radial distribution. Returns `|y|`.
pub fn uniform_in_shell<R: Rng>(rng: &mut R, r_in: f64, r_out: f64, out: &mut [f64]) -> f64 {
    let n = out.len() as f64;
    let lo = pow(r_in, n);
    let hi = pow(r_out, n);
    let radius = pow(lo + rng.random::<f64>() * (hi - lo), 1.0 / n);
    unit_direction(rng, out);
    for x in out.iter_mut() {
        *x *= radius;
    }
    radius
}

/// Point of the ball of radius `r_out` with density proportional to
/// `|y|^weight`, `weight > -n`. Returns `|y|`.
pub fn weighted_in_ball<R: Rng>(rng: &mut R, weight: f64, r_out: f64, out: &mut [f64]) -> f64 {
    let n = out.len() as f64;
    let radius = r_out * pow(rng.random::<f64>(), 1.0 / (weight + n));
    unit_direction(rng, out);
    for x in out.iter_mut() {
        *x *= radius;
    }
    radius
}

/// Running sums for a mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Moments {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }

    /// Standard error of the mean from the unbiased sample variance.
    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        sqrt(var / n)
    }
}
