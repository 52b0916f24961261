//! Global energy efficiency objective and its stationarity conditions.
//!
//! `GEE(K, ρ) = B·K·E[log₂(1 + ρa/K)] / (ρ + K·P_c)` with the expectation
//! taken over a fixed [`GainSampleSet`]. The objective depends on `(K, ρ)`
//! only through `ρ/K`, up to the positive factor of the denominator, which
//! gives `ρ_s(K) = K·ρ_s(1)` and `K_s(ρ) = ρ/ρ_s(1)`.

use crate::error::{Error, Result};
use crate::rate::GainSampleSet;
use crate::roots::{bisect, expand_upper};
use crate::Scalar;

/// Relative tolerance of every scalar root solve.
pub const ROOT_REL_TOL: f64 = 1e-10;

/// One energy-efficiency maximization instance.
#[derive(Debug, Clone)]
pub struct GeeProblem<T> {
    pub gains: GainSampleSet<T>,
    /// Static power per served user, Watts.
    pub p_c: T,
    /// Transmit power budget, Watts.
    pub rho_max: T,
    pub k_min: usize,
    pub k_max: usize,
    /// Hz; scales the objective, never the argmax.
    pub bandwidth_b: T,
}

impl<T: Scalar> GeeProblem<T> {
    pub fn new(
        gains: GainSampleSet<T>,
        p_c: T,
        rho_max: T,
        k_min: usize,
        k_max: usize,
        bandwidth_b: T,
    ) -> Result<Self> {
        let prob = Self { gains, p_c, rho_max, k_min, k_max, bandwidth_b };
        prob.validate()?;
        Ok(prob)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_min == 0 || self.k_min > self.k_max {
            return Err(Error::invalid("k_min", format!("need 0 < k_min ≤ k_max, got {}..{}", self.k_min, self.k_max)));
        }
        if !(self.rho_max > T::zero() && self.rho_max.is_finite()) {
            return Err(Error::invalid("rho_max", "must be positive and finite"));
        }
        if !(self.p_c > T::zero() && self.p_c.is_finite()) {
            return Err(Error::invalid("p_c", "must be positive and finite"));
        }
        if !(self.bandwidth_b > T::zero() && self.bandwidth_b.is_finite()) {
            return Err(Error::invalid("bandwidth_b", "must be positive and finite"));
        }
        Ok(())
    }

    fn samples(&self) -> &[T] {
        self.gains.samples()
    }

    fn n(&self) -> T {
        T::from_usize_lossy(self.gains.len())
    }

    fn require_positive_gain(&self) -> Result<()> {
        if self.gains.has_positive() {
            Ok(())
        } else {
            Err(Error::NoPositiveGain)
        }
    }

    /// Objective with `B = 1`, in bits per Joule per Hz.
    pub(crate) fn gee_unit(&self, k: T, rho: T) -> T {
        let x = rho / k;
        let mean_ln: T = self.samples().iter().map(|&a| (x * a).ln_1p()).sum::<T>() / self.n();
        k * mean_ln * T::LOG2_E() / (rho + k * self.p_c)
    }

    /// `(ρ + kP_c)·mean[(a/k)/(1 + ρa/k)] − mean[ln(1 + ρa/k)]`, which has
    /// the sign of `∂GEE/∂ρ`.
    pub fn rho_stationarity(&self, k: T, rho: T) -> T {
        let inv_k = T::one() / k;
        let (slope, level) = self.samples().iter().fold((T::zero(), T::zero()), |(s, l), &a| {
            let u = a * inv_k;
            let x = rho * u;
            (s + u / (T::one() + x), l + x.ln_1p())
        });
        ((rho + k * self.p_c) * slope - level) / self.n()
    }

    /// `(ρ + KP_c)·g′(K) − P_c·g(K)` with `g(K) = K·mean ln(1 + ρa/K)`, which
    /// has the sign of `∂GEE/∂K`.
    pub fn k_stationarity(&self, rho: T, k: T) -> T {
        let (dg, lvl) = self.samples().iter().fold((T::zero(), T::zero()), |(d, l), &a| {
            let x = rho * a / k;
            (d + log1p_minus_ratio(x), l + x.ln_1p())
        });
        let n = self.n();
        ((rho + k * self.p_c) * dg - self.p_c * k * lvl) / n
    }
}

/// `ln(1 + x) − x/(1 + x)`, accurate for small `x`.
fn log1p_minus_ratio<T: Scalar>(x: T) -> T {
    if x < T::lit(1e-3) {
        // Σ_{n≥2} (−1)ⁿ (n−1)/n xⁿ
        let mut term = x * x;
        let mut acc = T::zero();
        for n in 2..10 {
            let coeff = T::lit((n - 1) as f64 / n as f64);
            acc = if n % 2 == 0 { acc + coeff * term } else { acc - coeff * term };
            term *= x;
        }
        acc
    } else {
        x.ln_1p() - x / (T::one() + x)
    }
}

/// Energy efficiency in bits per Joule; `k` may be any positive real.
pub fn gee<T: Scalar>(prob: &GeeProblem<T>, k: T, rho: T) -> Result<T> {
    if !(k > T::zero()) {
        return Err(Error::invalid("k", "user count must be positive"));
    }
    if !(rho >= T::zero()) {
        return Err(Error::invalid("rho", "transmit power must be non-negative"));
    }
    Ok(prob.bandwidth_b * prob.gee_unit(k, rho))
}

/// Interval known to hold a power-stationary point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoBracket<T> {
    pub lo: T,
    /// `None`: unbounded above, expanded geometrically from `lo`.
    pub hi: Option<T>,
}

impl<T: Scalar> RhoBracket<T> {
    pub fn unbounded() -> Self {
        Self { lo: T::zero(), hi: None }
    }

    /// Whether `x` lies inside, allowing a relative slack `tol`.
    pub fn contains(&self, x: T, tol: T) -> bool {
        let above = x >= self.lo * (T::one() - tol);
        let below = self.hi.is_none_or(|hi| x <= hi * (T::one() + tol));
        above && below
    }
}

/// Unique root of [`GeeProblem::rho_stationarity`] inside `bracket`.
pub fn stationary_rho_in<T: Scalar>(prob: &GeeProblem<T>, k: T, bracket: RhoBracket<T>) -> Result<T> {
    if !(k > T::zero()) {
        return Err(Error::invalid("k", "user count must be positive"));
    }
    prob.require_positive_gain()?;
    let phi = |rho: T| prob.rho_stationarity(k, rho);
    let tol = T::lit(ROOT_REL_TOL);
    let (lo, hi) = match bracket.hi {
        Some(hi) => (bracket.lo, hi),
        None => {
            let start = if bracket.lo > T::zero() { bracket.lo + bracket.lo } else { k };
            expand_upper(phi, bracket.lo, start)?
        }
    };
    bisect(phi, lo, hi, tol)
}

/// Power at which `∂GEE/∂ρ = 0` for `k` users.
///
/// `φ(0) = P_c·mean(a) > 0` and `φ → −∞`, so doubling an upper bound always
/// produces a bracket.
pub fn stationary_rho<T: Scalar>(prob: &GeeProblem<T>, k: T) -> Result<T> {
    stationary_rho_in(prob, k, RhoBracket::unbounded())
}

/// `min(ρ_max, ρ_s)`.
pub fn optimal_rho<T: Scalar>(prob: &GeeProblem<T>, k: T) -> Result<T> {
    Ok(stationary_rho(prob, k)?.min(prob.rho_max))
}

/// Relaxed user count at which `∂GEE/∂K = 0` for power `rho`.
pub fn stationary_k<T: Scalar>(prob: &GeeProblem<T>, rho: T) -> Result<T> {
    if !(rho > T::zero() && rho.is_finite()) {
        return Err(Error::invalid("rho", "stationary user count needs positive power"));
    }
    prob.require_positive_gain()?;
    let psi = |k: T| prob.k_stationarity(rho, k);
    let (lo, hi) = expand_upper(psi, T::zero(), T::one())?;
    bisect(psi, lo, hi, T::lit(ROOT_REL_TOL))
}

/// `max(K_min, min(K_max, K_s))`, found without leaving the feasible range:
/// the sign of `ψ` at the end points decides the clamped cases.
pub fn relaxed_optimal_k<T: Scalar>(prob: &GeeProblem<T>, rho: T) -> Result<T> {
    if !(rho > T::zero() && rho.is_finite()) {
        return Err(Error::invalid("rho", "optimal user count needs positive power"));
    }
    prob.require_positive_gain()?;
    let psi = |k: T| prob.k_stationarity(rho, k);
    let lo = T::from_usize_lossy(prob.k_min);
    let hi = T::from_usize_lossy(prob.k_max);
    if psi(lo) <= T::zero() {
        return Ok(lo);
    }
    if psi(hi) >= T::zero() {
        return Ok(hi);
    }
    bisect(psi, lo, hi, T::lit(ROOT_REL_TOL))
}

/// Best integer user count for power `rho`: the better of `⌊K̄⌋` and `⌈K̄⌉`,
/// preferring the smaller on a tie.
pub fn optimal_integer_k<T: Scalar>(prob: &GeeProblem<T>, rho: T) -> Result<usize> {
    let k_bar = relaxed_optimal_k(prob, rho)?;
    let floor = (k_bar.floor().to_usize().unwrap_or(prob.k_min)).clamp(prob.k_min, prob.k_max);
    let ceil = (k_bar.ceil().to_usize().unwrap_or(prob.k_max)).clamp(prob.k_min, prob.k_max);
    if floor == ceil {
        return Ok(floor);
    }
    let g_floor = prob.gee_unit(T::from_usize_lossy(floor), rho);
    let g_ceil = prob.gee_unit(T::from_usize_lossy(ceil), rho);
    Ok(if g_ceil > g_floor { ceil } else { floor })
}

/// Where the stationary power for `k_next` must lie, given the stationary
/// power found for the previous user count: the sign of `∂GEE/∂ρ` at
/// `(rho_prev, k_next)` tells which side of `rho_prev` it is on.
pub fn corollary1_bracket<T: Scalar>(prob: &GeeProblem<T>, k_next: T, rho_prev: T) -> RhoBracket<T> {
    if prob.rho_stationarity(k_next, rho_prev) >= T::zero() {
        RhoBracket { lo: rho_prev, hi: None }
    } else {
        RhoBracket { lo: T::zero(), hi: Some(rho_prev) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(a: f64, p_c: f64, rho_max: f64) -> GeeProblem<f64> {
        GeeProblem::new(GainSampleSet::from_samples(vec![a]).unwrap(), p_c, rho_max, 1, 8, 1.0).unwrap()
    }

    #[test]
    fn zero_power_zero_efficiency() {
        let p = single(2.0, 1.0, 10.0);
        for k in [1.0, 2.5, 7.0] {
            assert_eq!(gee(&p, k, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn hand_evaluated_efficiency() {
        let p = single(1.0, 1.0, 10.0);
        assert!((gee(&p, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bandwidth_scales_output() {
        let mut p = single(1.0, 1.0, 10.0);
        p.bandwidth_b = 1e6;
        assert!((gee(&p, 1.0, 1.0).unwrap() - 0.5e6).abs() < 1e-8);
    }

    #[test]
    fn invalid_arguments() {
        let p = single(1.0, 1.0, 10.0);
        assert!(gee(&p, 0.0, 1.0).is_err());
        assert!(gee(&p, 1.0, -1.0).is_err());
        assert!(stationary_k(&p, 0.0).is_err());
        assert!(GeeProblem::new(p.gains.clone(), 1.0, 10.0, 3, 2, 1.0).is_err());
        assert!(GeeProblem::new(p.gains.clone(), 0.0, 10.0, 1, 2, 1.0).is_err());
        assert!(GeeProblem::new(p.gains.clone(), 1.0, 0.0, 1, 2, 1.0).is_err());
    }

    #[test]
    fn all_zero_samples_have_no_stationary_point() {
        let p = GeeProblem::new(GainSampleSet::from_samples(vec![0.0, 0.0]).unwrap(), 1.0, 1.0, 1, 2, 1.0).unwrap();
        assert!(matches!(stationary_rho(&p, 1.0), Err(Error::NoPositiveGain)));
        assert!(matches!(stationary_k(&p, 1.0), Err(Error::NoPositiveGain)));
    }

    #[test]
    fn closed_form_stationary_power() {
        let p = single(1.0, 1.0, 10.0);
        let rho = stationary_rho(&p, 1.0).unwrap();
        assert!((rho - (std::f64::consts::E - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn budget_clamps_stationary_power() {
        assert_eq!(optimal_rho(&single(1.0, 1.0, 1.0), 1.0).unwrap(), 1.0);
        let free = optimal_rho(&single(1.0, 1.0, 10.0), 1.0).unwrap();
        assert!((free - (std::f64::consts::E - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn series_branch_matches_direct_formula() {
        for x in [1e-6f64, 1e-5, 1e-4, 5e-4, 9.99e-4] {
            let direct = x.ln_1p() - x / (1.0 + x);
            let series = log1p_minus_ratio(x);
            assert!((direct - series).abs() <= 1e-9 * series, "x = {x}");
        }
        let x = 1e-3f64;
        assert!((log1p_minus_ratio(x) - log1p_minus_ratio(x * (1.0 - 1e-12))).abs() < 1e-15);
    }

    #[test]
    fn integer_k_exact_and_clamped() {
        // Single sample a = 1, p_c = 1: ρ_s(1) = e − 1, so K_s(ρ) = ρ/(e − 1).
        let q = std::f64::consts::E - 1.0;
        let p = GeeProblem::new(GainSampleSet::from_samples(vec![1.0]).unwrap(), 1.0, 100.0, 1, 10, 1.0).unwrap();
        assert_eq!(optimal_integer_k(&p, 3.0 * q).unwrap(), 3);
        assert_eq!(optimal_integer_k(&p, 0.4 * q).unwrap(), 1);
        assert_eq!(optimal_integer_k(&p, 50.0 * q).unwrap(), 10);
    }

    #[test]
    fn bracket_contains() {
        let b = RhoBracket { lo: 1.0, hi: Some(2.0) };
        assert!(b.contains(1.5, 0.0));
        assert!(!b.contains(2.1, 1e-9));
        assert!(RhoBracket { lo: 1.0, hi: None }.contains(1e9, 0.0));
    }
}
