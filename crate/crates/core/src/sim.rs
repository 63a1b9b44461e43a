//! Seeded Monte Carlo simulation of the channel.
//!
//! Random source: xoshiro256** seeded through SplitMix64, with standard
//! normals from the Box–Muller transform (both outputs used, the second
//! cached). Uniforms are `(x >> 11) · 2⁻⁵³`, and the Box–Muller radius uses
//! `1 - u` so the logarithm never sees zero. Trials are split into
//! `partitions` contiguous chunks; chunk `p` draws from its own stream
//! seeded with `splitmix64(seed ^ (p + 1)·0x9E3779B97F4A7C15)`, and chunk
//! sums are merged in chunk order, so a report is bit-reproducible for a
//! fixed `(seed, partitions)`.

use serde::Serialize;

use crate::error::{invalid_arg, Result};
use crate::linalg::Matrix;
use crate::model::{factor, fisher_information, trace_inverse, Design, Observation};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Minimum trials per vector for [`invariance_check`].
pub const MIN_INVARIANCE_TRIALS: usize = 100;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct Rng {
    s: [u64; 4],
    spare: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Self { s, spare: None }
    }

    /// Independent stream for partition `index` of a run seeded with `seed`.
    pub fn substream(seed: u64, index: u64) -> Self {
        let mut sm = seed ^ (index.wrapping_add(1)).wrapping_mul(GOLDEN_GAMMA);
        Self::new(splitmix64(&mut sm))
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Draws `Xᵢ ~ N(tᵢ·bᵢᵀμ, σ²tᵢ)` independently for every row.
pub fn sample_observation(
    design: &Design,
    mu: &[f64],
    noise_variance: f64,
    rng: &mut Rng,
) -> Result<Observation> {
    if mu.len() != design.n_params() {
        return Err(invalid_arg(format!("mu has length {}, expected {}", mu.len(), design.n_params())));
    }
    if !(noise_variance > 0.0) {
        return Err(invalid_arg("noise variance must be positive"));
    }
    let mean = design.apply(mu);
    let values = mean
        .iter()
        .zip(design.times())
        .map(|(m, &t)| t * m + (noise_variance * t).sqrt() * rng.standard_normal())
        .collect();
    Ok(Observation::new(values))
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub design: Design,
    pub mu: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// σ², strictly positive.
    pub noise_variance: f64,
    /// Skip the noise entirely; observations are exactly `T·B·μ`.
    pub zero_noise: bool,
    pub partitions: usize,
}

impl SimConfig {
    pub const DEFAULT_PARTITIONS: usize = 4;

    pub fn new(design: Design, mu: Vec<f64>, trials: usize, seed: u64) -> Self {
        Self {
            design,
            mu,
            trials,
            seed,
            noise_variance: 1.0,
            zero_noise: false,
            partitions: Self::DEFAULT_PARTITIONS,
        }
    }

    /// `μᵢ = i / N` for `i = 1 … N`.
    pub fn default_mu(n: usize) -> Vec<f64> {
        (1..=n).map(|i| i as f64 / n as f64).collect()
    }

    fn check(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid_arg("trials must be at least 1"));
        }
        if !(self.noise_variance > 0.0 && self.noise_variance.is_finite()) {
            return Err(invalid_arg("noise variance must be positive"));
        }
        if self.partitions == 0 {
            return Err(invalid_arg("partitions must be at least 1"));
        }
        if self.mu.len() != self.design.n_params() {
            return Err(invalid_arg(format!(
                "mu has length {}, expected {}",
                self.mu.len(),
                self.design.n_params()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    pub empirical_mse: f64,
    pub theoretical_mse: f64,
    pub mse_standard_error: f64,
    pub per_coordinate_bias: Vec<f64>,
    /// Standard error of each bias entry.
    pub bias_standard_error: Vec<f64>,
    pub empirical_covariance: Vec<Vec<f64>>,
    /// Standard error of each entry of the mean error outer product.
    pub covariance_standard_error: Vec<Vec<f64>>,
    pub trials: usize,
    pub seed: u64,
}

/// Running sums of one partition.
#[derive(Clone)]
struct Accumulator {
    count: usize,
    err: Vec<f64>,
    outer: Vec<f64>,
    outer_sq: Vec<f64>,
    sq_norm: f64,
    sq_norm_sq: f64,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Self {
            count: 0,
            err: vec![0.0; n],
            outer: vec![0.0; n * n],
            outer_sq: vec![0.0; n * n],
            sq_norm: 0.0,
            sq_norm_sq: 0.0,
        }
    }

    fn push(&mut self, e: &[f64]) {
        let n = e.len();
        self.count += 1;
        let mut norm = 0.0;
        for i in 0..n {
            self.err[i] += e[i];
            norm += e[i] * e[i];
            for j in 0..n {
                let p = e[i] * e[j];
                self.outer[i * n + j] += p;
                self.outer_sq[i * n + j] += p * p;
            }
        }
        self.sq_norm += norm;
        self.sq_norm_sq += norm * norm;
    }

    fn merge(&mut self, other: &Accumulator) {
        self.count += other.count;
        for (a, b) in self.err.iter_mut().zip(&other.err) {
            *a += b;
        }
        for (a, b) in self.outer.iter_mut().zip(&other.outer) {
            *a += b;
        }
        for (a, b) in self.outer_sq.iter_mut().zip(&other.outer_sq) {
            *a += b;
        }
        self.sq_norm += other.sq_norm;
        self.sq_norm_sq += other.sq_norm_sq;
    }
}

fn sample_variance(sum: f64, sum_sq: f64, count: usize) -> f64 {
    if count < 2 {
        return 0.0;
    }
    let c = count as f64;
    ((sum_sq - sum * sum / c) / (c - 1.0)).max(0.0)
}

/// Runs `trials` independent draws, ML-estimates each and summarizes the
/// estimation error `μ̂ - μ`.
pub fn simulate(config: &SimConfig) -> Result<SimReport> {
    config.check()?;
    let design = &config.design;
    let n = design.n_params();
    let chol = factor(design)?;
    let theoretical_mse = trace_inverse(&fisher_information(design)?)? * config.noise_variance;

    let parts = config.partitions.min(config.trials);
    let base = config.trials / parts;
    let extra = config.trials % parts;
    let run_partition = |p: usize| -> Result<Accumulator> {
        let count = base + usize::from(p < extra);
        let mut rng = Rng::substream(config.seed, p as u64);
        let mut acc = Accumulator::new(n);
        let noiseless = Observation::noiseless(design, &config.mu);
        for _ in 0..count {
            let x = if config.zero_noise {
                noiseless.clone()
            } else {
                sample_observation(design, &config.mu, config.noise_variance, &mut rng)?
            };
            let mut est = design.apply_transpose(&x.values);
            chol.solve_in_place(&mut est);
            let e: Vec<f64> = est.iter().zip(&config.mu).map(|(a, b)| a - b).collect();
            acc.push(&e);
        }
        Ok(acc)
    };

    let partials: Vec<Result<Accumulator>> = if parts == 1 {
        vec![run_partition(0)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..parts)
                .map(|p| scope.spawn(move || run_partition(p)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("simulation worker panicked")).collect()
        })
    };
    let mut total = Accumulator::new(n);
    for part in partials {
        total.merge(&part?);
    }

    let t = total.count as f64;
    let mean: Vec<f64> = total.err.iter().map(|s| s / t).collect();
    let mut cov = vec![vec![0.0; n]; n];
    let mut cov_se = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let s = total.outer[i * n + j];
            cov[i][j] = if total.count > 1 {
                (s - t * mean[i] * mean[j]) / (t - 1.0)
            } else {
                0.0
            };
            cov_se[i][j] = (sample_variance(s, total.outer_sq[i * n + j], total.count) / t).sqrt();
        }
    }
    let bias_se = (0..n)
        .map(|i| (sample_variance(total.err[i], total.outer[i * n + i], total.count) / t).sqrt())
        .collect();
    Ok(SimReport {
        empirical_mse: total.sq_norm / t,
        theoretical_mse,
        mse_standard_error: (sample_variance(total.sq_norm, total.sq_norm_sq, total.count) / t).sqrt(),
        per_coordinate_bias: mean,
        bias_standard_error: bias_se,
        empirical_covariance: cov,
        covariance_standard_error: cov_se,
        trials: config.trials,
        seed: config.seed,
    })
}

impl SimReport {
    pub fn covariance_matrix(&self) -> Matrix {
        Matrix::from_rows(&self.empirical_covariance)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub consistent: bool,
    pub reports: Vec<SimReport>,
    /// Largest `|mseᵢ - mseⱼ| / √(seᵢ² + seⱼ²)` over all pairs.
    pub max_z: f64,
}

/// Simulates each `μ` with `trials` draws from its own substream and checks
/// that all empirical MSEs agree within three joint standard errors.
pub fn invariance_check(
    design: &Design,
    mu_list: &[Vec<f64>],
    trials: usize,
    seed: u64,
) -> Result<InvarianceReport> {
    if mu_list.len() < 2 {
        return Err(invalid_arg("invariance check needs at least two mu vectors"));
    }
    if trials < MIN_INVARIANCE_TRIALS {
        return Err(invalid_arg(format!(
            "invariance check needs at least {MIN_INVARIANCE_TRIALS} trials, got {trials}"
        )));
    }
    let reports = mu_list
        .iter()
        .enumerate()
        .map(|(i, mu)| {
            let mut sm = seed ^ (i as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
            let cfg = SimConfig::new(design.clone(), mu.clone(), trials, splitmix64(&mut sm));
            simulate(&cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut max_z = 0.0f64;
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            let (a, b) = (&reports[i], &reports[j]);
            let se = (a.mse_standard_error.powi(2) + b.mse_standard_error.powi(2)).sqrt();
            let z = (a.empirical_mse - b.empirical_mse).abs() / se;
            max_z = max_z.max(if z.is_nan() { 0.0 } else { z });
        }
    }
    Ok(InvarianceReport {
        consistent: max_z <= 3.0,
        reports,
        max_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::identity_design;

    #[test]
    fn xoshiro_reference_stream() {
        // seed state 1,2,3,4 -> reference outputs of xoshiro256**
        let mut r = Rng {
            s: [1, 2, 3, 4],
            spare: None,
        };
        assert_eq!(r.next_u64(), 11520);
        assert_eq!(r.next_u64(), 0);
        assert_eq!(r.next_u64(), 1509978240);
        assert_eq!(r.next_u64(), 1215971899390074240);
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut r = Rng::new(7);
        for _ in 0..10_000 {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn normal_moments() {
        let mut r = Rng::new(11);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| r.standard_normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt());
    }

    #[test]
    fn single_row_observation_moments() {
        let d = Design::new(2, vec![vec![1, 1]], vec![2.0]).unwrap();
        let mut r = Rng::new(3);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_observation(&d, &[3.0, 4.0], 1.0, &mut r).unwrap().values[0])
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se_mean = (2.0 / n as f64).sqrt();
        assert!((mean - 14.0).abs() < 4.0 * se_mean, "{mean}");
        assert!((var - 2.0).abs() < 4.0 * 2.0 * (2.0 / n as f64).sqrt(), "{var}");
    }

    #[test]
    fn zero_noise_is_exact() {
        let mut cfg = SimConfig::new(identity_design(3).unwrap(), vec![0.3, -1.0, 2.0], 50, 1);
        cfg.zero_noise = true;
        let rep = simulate(&cfg).unwrap();
        assert_eq!(rep.empirical_mse, 0.0);
        assert!(rep.per_coordinate_bias.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn config_errors() {
        let d = identity_design(2).unwrap();
        let mut cfg = SimConfig::new(d.clone(), vec![0.0, 0.0], 0, 1);
        assert!(simulate(&cfg).is_err());
        cfg.trials = 10;
        cfg.noise_variance = 0.0;
        assert!(simulate(&cfg).is_err());
        let cfg = SimConfig::new(d.clone(), vec![0.0], 10, 1);
        assert!(simulate(&cfg).is_err());
        assert!(invariance_check(&d, &[vec![0.0, 0.0], vec![1.0, 1.0]], 1, 0).is_err());
        assert!(invariance_check(&d, &[vec![0.0, 0.0]], 1000, 0).is_err());
    }

    #[test]
    fn reproducible() {
        let cfg = SimConfig::new(identity_design(3).unwrap(), SimConfig::default_mu(3), 5000, 99);
        assert_eq!(simulate(&cfg).unwrap(), simulate(&cfg).unwrap());
        let mut other = cfg.clone();
        other.seed = 100;
        assert_ne!(simulate(&cfg).unwrap(), simulate(&other).unwrap());
    }
}
