//! Per-link analog beamformers, QAM constellations and the normalized link
//! coefficients `b[j][m] = (w_jᴴ H_j f_j) s_m / σ`.

use num_complex::Complex;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::linalg::{dominant_singular_pair, inner, normalize_phase, CMatrix};
use crate::Scalar;

/// Unit-norm transmit beamformer `f` (length N_T) and receive combiner `w`
/// (length N_R) of one link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBeamformers<T> {
    pub f: Vec<Complex<T>>,
    pub w: Vec<Complex<T>>,
}

impl<T: Scalar> LinkBeamformers<T> {
    /// `wᴴ H f`.
    pub fn effective_channel(&self, h: &ChannelRealization<T>) -> Complex<T> {
        inner(&self.w, &h.matrix.mul_vec(&self.f))
    }
}

/// How the transmit beamformer is shaped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BeamformerMode {
    /// Dominant singular vectors.
    #[default]
    Svd,
    /// Keep the phases of the singular vector, force magnitude `1/√N_T`.
    PhaseOnly,
}

/// Dominant right (`f`) and left (`w`) singular vectors of the channel, each
/// rotated so its first nonzero entry is real and non-negative.
pub fn link_beamformers<T: Scalar>(
    h: &ChannelRealization<T>,
    mode: BeamformerMode,
) -> Result<LinkBeamformers<T>> {
    let (_, mut w, mut f) = dominant_singular_pair(&h.matrix).ok_or(Error::DegenerateChannel)?;
    normalize_phase(&mut w);
    normalize_phase(&mut f);
    if mode == BeamformerMode::PhaseOnly {
        let amp = T::one() / T::from_usize_lossy(f.len()).sqrt();
        for z in &mut f {
            // Zero entries keep phase 0.
            *z = Complex::from_polar(amp, z.arg());
        }
    }
    Ok(LinkBeamformers { f, w })
}

/// M-ary constellation with unit average energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation<T> {
    pub symbols: Vec<Complex<T>>,
}

impl<T: Scalar> Constellation<T> {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn mean_energy(&self) -> T {
        self.symbols.iter().map(|s| s.norm_sqr()).sum::<T>() / T::from_usize_lossy(self.len())
    }
}

/// BPSK for `m = 2`, otherwise square QAM on the odd-integer grid, row-major
/// (imaginary part outer, real part inner, both ascending).
pub fn qam_constellation<T: Scalar>(m: usize) -> Result<Constellation<T>> {
    if m == 2 {
        return Ok(Constellation {
            symbols: vec![Complex::new(T::one(), T::zero()), Complex::new(-T::one(), T::zero())],
        });
    }
    let side = (m as f64).sqrt().round() as usize;
    if !matches!(m, 4 | 16 | 64) || side * side != m {
        return Err(Error::invalid("mod_order", format!("unsupported constellation size {m}")));
    }
    // Mean energy of the odd grid {±1, ±3, …}² is 2(M − 1)/3.
    let scale = T::one() / T::lit(2.0 * (m as f64 - 1.0) / 3.0).sqrt();
    let level = |i: usize| T::lit(2.0 * i as f64 - (side as f64 - 1.0)) * scale;
    let symbols = (0..side)
        .flat_map(|row| (0..side).map(move |col| (row, col)))
        .map(|(row, col)| Complex::new(level(col), level(row)))
        .collect();
    Ok(Constellation { symbols })
}

/// `b[j][m] = (w_jᴴ H_j f_j)·s_m / √σ²`, one row per antenna array.
pub fn link_coefficients<T: Scalar>(
    h_all: &[ChannelRealization<T>],
    bf_all: &[LinkBeamformers<T>],
    c: &Constellation<T>,
    sigma2: T,
) -> Result<CMatrix<T>> {
    if !(sigma2 > T::zero()) {
        return Err(Error::invalid("sigma2", "noise power must be positive"));
    }
    if h_all.len() != bf_all.len() {
        return Err(Error::invalid("bf_all", "one beamformer pair per channel required"));
    }
    let gains: Vec<Complex<T>> = h_all
        .iter()
        .zip(bf_all)
        .map(|(h, bf)| bf.effective_channel(h))
        .collect();
    Ok(coefficients_from_gains(&gains, c, sigma2))
}

/// Same as [`link_coefficients`] given the scalar gains `w_jᴴ H_j f_j`.
pub fn coefficients_from_gains<T: Scalar>(
    gains: &[Complex<T>],
    c: &Constellation<T>,
    sigma2: T,
) -> CMatrix<T> {
    let inv_sigma = T::one() / sigma2.sqrt();
    let data = gains
        .iter()
        .flat_map(|g| c.symbols.iter().map(move |s| (g * s).scale(inv_sigma)))
        .collect();
    CMatrix::from_row_major(gains.len(), c.len(), data)
}
