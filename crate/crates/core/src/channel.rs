//! ULA steering vectors and L-path geometric channel realizations.

use num_complex::Complex;
use rand::Rng;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::Scalar;

/// Uniform linear array with half-wavelength spacing, steered towards `angle`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UlaParams<T> {
    pub n_elements: usize,
    /// Radians.
    pub angle: T,
}

/// One propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParams<T> {
    /// Complex path gain, CN(0, 1).
    pub gain: Complex<T>,
    /// Angle of departure, radians.
    pub aod: T,
    /// Angle of arrival, radians.
    pub aoa: T,
}

/// Channel between one antenna array and one user, `n_rx × n_tx`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T> {
    pub matrix: CMatrix<T>,
    pub paths: Vec<PathParams<T>>,
}

/// `√(1/N)·[1, e^{jπ sin x}, …, e^{jπ(N−1) sin x}]ᵀ`.
pub fn steering_vector<T: Scalar>(p: &UlaParams<T>) -> Result<Vec<Complex<T>>> {
    if p.n_elements == 0 {
        return Err(Error::invalid("n_elements", "array needs at least one element"));
    }
    let amp = T::one() / T::from_usize_lossy(p.n_elements).sqrt();
    let step = T::PI() * p.angle.sin();
    Ok((0..p.n_elements)
        .map(|k| Complex::from_polar(amp, step * T::from_usize_lossy(k)))
        .collect())
}

impl<T: Scalar> ChannelRealization<T> {
    /// `H = √(N_T N_R / L) Σ_l α_l a_R(θ_l) a_T(φ_l)ᴴ`.
    pub fn from_paths(n_rx: usize, n_tx: usize, paths: Vec<PathParams<T>>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::invalid("n_paths", "channel needs at least one path"));
        }
        let mut matrix = CMatrix::zeros(n_rx, n_tx);
        for path in &paths {
            let a_r = steering_vector(&UlaParams { n_elements: n_rx, angle: path.aoa })?;
            let a_t = steering_vector(&UlaParams { n_elements: n_tx, angle: path.aod })?;
            let scaled: Vec<_> = a_r.iter().map(|z| z * path.gain).collect();
            matrix.add_assign(&CMatrix::outer(&scaled, &a_t));
        }
        let l = T::from_usize_lossy(paths.len());
        matrix.scale((T::from_usize_lossy(n_rx * n_tx) / l).sqrt());
        Ok(Self { matrix, paths })
    }

    pub fn n_rx(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n_tx(&self) -> usize {
        self.matrix.cols()
    }
}

/// Draws one realization: CN(0, 1) gains and angles uniform on (0, 2π].
pub fn generate_channel<T: Scalar, R: Rng + ?Sized>(
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<ChannelRealization<T>> {
    if cfg.n_paths == 0 {
        return Err(Error::invalid("n_paths", "must be at least 1"));
    }
    if cfg.n_tx_per_aa == 0 || cfg.n_rx == 0 {
        return Err(Error::invalid("n_tx_per_aa/n_rx", "antenna counts must be at least 1"));
    }
    let half = T::FRAC_1_SQRT_2();
    let paths = (0..cfg.n_paths)
        .map(|_| {
            let re = T::sample_normal(rng) * half;
            let im = T::sample_normal(rng) * half;
            let aod = T::TAU() * (T::one() - T::sample_unit(rng));
            let aoa = T::TAU() * (T::one() - T::sample_unit(rng));
            PathParams { gain: Complex::new(re, im), aod, aoa }
        })
        .collect();
    ChannelRealization::from_paths(cfg.n_rx, cfg.n_tx_per_aa, paths)
}
