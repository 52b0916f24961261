//! Effective link gain, the per-user rate upper bound, Monte-Carlo ergodic
//! rates and a Gaussian-mixture mutual-information estimator.

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;

use crate::beamforming::{
    coefficients_from_gains, link_beamformers, qam_constellation, BeamformerMode, Constellation,
};
use crate::channel::generate_channel;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::rng::{derive_stream, Domain};
use crate::Scalar;

/// Where a sample set came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMeta {
    pub config: SystemConfig,
    pub sampling_hash: String,
    pub seed: u64,
}

/// Monte-Carlo draws of the effective gain `a` for user 1.
///
/// The samples do not depend on the transmit power or the number of users,
/// so one set serves every `(K, ρ)` evaluation of an optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSampleSet<T> {
    samples: Vec<T>,
    meta: Option<SampleMeta>,
}

impl<T: Scalar> GainSampleSet<T> {
    /// Wraps hand-made samples; every value must be finite and non-negative.
    pub fn from_samples(samples: Vec<T>) -> Result<Self> {
        Self::with_meta(samples, None)
    }

    fn with_meta(samples: Vec<T>, meta: Option<SampleMeta>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("n_samples", "sample set must not be empty"));
        }
        if let Some(bad) = samples.iter().find(|a| !(a.is_finite() && **a >= T::zero())) {
            return Err(Error::invalid("samples", format!("gain sample {bad} is not finite and non-negative")));
        }
        Ok(Self { samples, meta })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn meta(&self) -> Option<&SampleMeta> {
        self.meta.as_ref()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn has_positive(&self) -> bool {
        self.samples.iter().any(|&a| a > T::zero())
    }
}

/// Mean and standard error of a rate, bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate<T> {
    pub value: T,
    pub std_error: T,
}

/// Variance of the link coefficients over uniform `(array, symbol)` pairs:
/// `mean|b|² − |mean b|²`.
///
/// Evaluated in two passes (`mean|b − mean b|²`), which is the same quantity
/// and is non-negative without any clamping.
pub fn effective_gain<T: Scalar>(b: &CMatrix<T>) -> Result<T> {
    let values = b.as_slice();
    if values.is_empty() {
        return Err(Error::invalid("b", "coefficient matrix must not be empty"));
    }
    let n = T::from_usize_lossy(values.len());
    let mean = values.iter().fold(Complex::new(T::zero(), T::zero()), |acc, z| acc + z).unscale(n);
    Ok(values.iter().map(|z| (z - mean).norm_sqr()).sum::<T>() / n)
}

/// `log₂(1 + ρ·a/k)`; `k` may be any positive real (relaxed user count).
pub fn rate_bound<T: Scalar>(a: T, rho: T, k: T) -> Result<T> {
    if !(a >= T::zero()) {
        return Err(Error::invalid("a", "effective gain must be non-negative"));
    }
    if !(rho >= T::zero()) {
        return Err(Error::invalid("rho", "transmit power must be non-negative"));
    }
    if !(k > T::zero()) {
        return Err(Error::invalid("k", "user count must be positive"));
    }
    Ok((rho * a / k).ln_1p() * T::LOG2_E())
}

/// One gain sample: channels from every antenna array to the user, their
/// beamformers, the link coefficients and finally `a`.
pub fn gain_sample<T: Scalar>(
    cfg: &SystemConfig,
    constellation: &Constellation<T>,
    index: u64,
) -> Result<T> {
    let mode = if cfg.phase_only_beamforming { BeamformerMode::PhaseOnly } else { BeamformerMode::Svd };
    let gains = (0..cfg.n_aa as u64)
        .map(|j| {
            let mut rng = derive_stream(cfg.seed, Domain::Channel, index, j);
            let h = generate_channel::<T, _>(cfg, &mut rng)?;
            let bf = link_beamformers(&h, mode)?;
            Ok(bf.effective_channel(&h))
        })
        .collect::<Result<Vec<_>>>()?;
    let b = coefficients_from_gains(&gains, constellation, T::lit(cfg.sigma2));
    effective_gain(&b)
}

/// Draws `cfg.n_samples` gain samples on the current rayon pool.
///
/// Sample `n` depends only on `(seed, n)`, so the result is identical for
/// every pool width.
pub fn sample_gains<T: Scalar>(cfg: &SystemConfig) -> Result<GainSampleSet<T>> {
    cfg.validate()?;
    let constellation = qam_constellation::<T>(cfg.mod_order)?;
    let samples = (0..cfg.n_samples as u64)
        .into_par_iter()
        .map(|n| gain_sample(cfg, &constellation, n))
        .collect::<Result<Vec<T>>>()?;
    let meta = SampleMeta {
        config: cfg.clone(),
        sampling_hash: cfg.sampling_hash(),
        seed: cfg.seed,
    };
    GainSampleSet::with_meta(samples, Some(meta))
}

/// [`sample_gains`] on a dedicated pool of `threads` workers.
pub fn sample_gains_with_threads<T: Scalar>(cfg: &SystemConfig, threads: usize) -> Result<GainSampleSet<T>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid("threads", e.to_string()))?;
    pool.install(|| sample_gains(cfg))
}

pub(crate) fn mean_and_std_error<T: Scalar>(values: impl Iterator<Item = T> + Clone) -> (T, T) {
    let (count, sum) = values.clone().fold((0usize, T::zero()), |(c, s), v| (c + 1, s + v));
    let n = T::from_usize_lossy(count);
    let mean = sum / n;
    if count < 2 {
        return (mean, T::zero());
    }
    let ss: T = values.map(|v| (v - mean) * (v - mean)).sum();
    let var = ss / (n - T::one());
    (mean, (var / n).sqrt())
}

/// Per-user ergodic rate `E[log₂(1 + ρa/k)]`; the sum-rate is `k` times this.
pub fn ergodic_rate<T: Scalar>(gains: &GainSampleSet<T>, rho: T, k: T) -> Result<RateEstimate<T>> {
    // Validates rho and k once.
    rate_bound(T::zero(), rho, k)?;
    let x = rho / k;
    let rates = gains.samples.iter().map(move |&a| (x * a).ln_1p() * T::LOG2_E());
    let (value, std_error) = mean_and_std_error(rates);
    Ok(RateEstimate { value, std_error })
}

fn log_sum_exp<T: Scalar>(terms: &[T]) -> T {
    let max = terms.iter().copied().fold(T::neg_infinity(), T::max);
    max + terms.iter().map(|&t| (t - max).exp()).sum::<T>().ln()
}

/// Monte-Carlo mutual information between the transmitted (array, symbol)
/// pair and `y = b[j][m] + z`, `z ~ CN(0, 1)`, in bits.
///
/// Each draw picks a mixture component uniformly, and contributes
/// `log₂ φ(z) − log₂ f_Y(y)`, i.e. the entropy `h(y)` estimate minus the
/// noise entropy estimated on the same noise draw. The noise term has mean
/// exactly `−log₂(πe)` but cancels most of the per-draw variance.
pub fn mutual_information_mc<T: Scalar, R: Rng + ?Sized>(
    b: &CMatrix<T>,
    n_mc: usize,
    rng: &mut R,
) -> Result<RateEstimate<T>> {
    let points = b.as_slice();
    if points.is_empty() {
        return Err(Error::invalid("b", "coefficient matrix must not be empty"));
    }
    if n_mc == 0 {
        return Err(Error::invalid("n_mc", "need at least one Monte-Carlo draw"));
    }
    let ln_count = T::from_usize_lossy(points.len()).ln();
    let half = T::FRAC_1_SQRT_2();
    let mut exponents = vec![T::zero(); points.len()];
    let draws: Vec<T> = (0..n_mc)
        .map(|_| {
            let centre = points[rng.random_range(0..points.len())];
            let z = Complex::new(T::sample_normal(rng) * half, T::sample_normal(rng) * half);
            let y = centre + z;
            for (e, p) in exponents.iter_mut().zip(points) {
                *e = -(y - p).norm_sqr();
            }
            // ln φ(z) − ln f(y); the 1/π factors cancel.
            (-z.norm_sqr() - log_sum_exp(&exponents) + ln_count) * T::LOG2_E()
        })
        .collect();
    let (value, std_error) = mean_and_std_error(draws.iter().copied());
    Ok(RateEstimate { value, std_error })
}

const CACHE_MAGIC: &str = "# smgee gain samples v1";

/// Writes the samples as CSV: comment header with the sampling hash and
/// seed, then a single `a` column in round-trip exact notation.
pub fn write_gain_cache<T: Scalar>(set: &GainSampleSet<T>, path: &Path) -> Result<()> {
    let meta = set.meta.as_ref().ok_or_else(|| Error::Cache {
        path: path.to_owned(),
        reason: "sample set has no generating config".into(),
    })?;
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{CACHE_MAGIC}")?;
    writeln!(out, "# sampling_hash={}", meta.sampling_hash)?;
    writeln!(out, "# seed={}", meta.seed)?;
    writeln!(out, "# n={}", set.samples.len())?;
    writeln!(out, "a")?;
    for a in &set.samples {
        writeln!(out, "{a:e}")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a cache written by [`write_gain_cache`] and checks it was produced
/// by a config with the same sampling parameters as `cfg`.
pub fn read_gain_cache<T: Scalar>(path: &Path, cfg: &SystemConfig) -> Result<GainSampleSet<T>> {
    let fail = |reason: String| Error::Cache { path: path.to_owned(), reason };
    let reader = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines();
    let mut next = || -> Result<String> {
        lines.next().transpose()?.ok_or_else(|| fail("unexpected end of file".into()))
    };
    if next()? != CACHE_MAGIC {
        return Err(fail("missing header".into()));
    }
    let field = |line: String, key: &str| -> Result<String> {
        line.strip_prefix(&format!("# {key}="))
            .map(str::to_owned)
            .ok_or_else(|| fail(format!("expected `{key}` header, got `{line}`")))
    };
    let hash = field(next()?, "sampling_hash")?;
    let seed: u64 = field(next()?, "seed")?.parse().map_err(|_| fail("bad seed".into()))?;
    let n: usize = field(next()?, "n")?.parse().map_err(|_| fail("bad sample count".into()))?;
    if next()? != "a" {
        return Err(fail("missing column header".into()));
    }
    if hash != cfg.sampling_hash() || seed != cfg.seed {
        return Err(fail("cache was generated by a different sampling config".into()));
    }
    let mut samples = Vec::with_capacity(n);
    for line in lines {
        let line = line?;
        let v: f64 = line.trim().parse().map_err(|_| fail(format!("bad value `{line}`")))?;
        samples.push(T::lit(v));
    }
    if samples.len() != n {
        return Err(fail(format!("header says {n} samples, found {}", samples.len())));
    }
    let meta = SampleMeta { config: cfg.clone(), sampling_hash: hash, seed };
    GainSampleSet::with_meta(samples, Some(meta))
}
