//! Hong-Ou-Mandel coincidence probabilities by three routes: the general
//! numeric double quadrature, the separable closed form, and the analytic
//! Gaussian-model master formula, plus the p > 1/2 entanglement witness.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::HomError;
use crate::grid::SpectralGrid;
use crate::spectra::{PhasematchShape, ProcessModel};
use crate::units::Delay;

/// Smallest |τ⁻| in ps the analytic engine accepts.
const TAU_MINUS_FLOOR: f64 = 1e-6;

/// Probabilities may stray this far past [0, 1] from rounding before being
/// clamped; anything worse is returned as-is so the caller sees the bug.
const BOUNDARY_SLOP: f64 = 1e-9;

fn clamp_probability(p: f64) -> f64 {
    if p < 0.0 && p >= -BOUNDARY_SLOP {
        0.0
    } else if p > 1.0 && p <= 1.0 + BOUNDARY_SLOP {
        1.0
    } else {
        p
    }
}

/// Provenance attached to a computed or ingested trace.
#[derive(Debug, Clone, Default)]
pub struct TraceMeta {
    /// Which route produced the probabilities ("numeric", "analytic", ...).
    pub engine: String,
    /// Free-form key = value provenance, kept sorted for stable output.
    pub params: BTreeMap<String, String>,
    /// Raw coincidence counts when the trace came from count data.
    pub counts: Option<Vec<f64>>,
}

/// A sampled coincidence trace p(τ).
#[derive(Debug, Clone)]
pub struct HomTrace {
    delays: Vec<Delay>,
    probabilities: Vec<f64>,
    pub meta: TraceMeta,
}

impl HomTrace {
    /// Validate lengths, ordering and probability range.
    pub fn new(delays: Vec<Delay>, probabilities: Vec<f64>, meta: TraceMeta) -> Result<Self, HomError> {
        if delays.len() != probabilities.len() {
            return Err(HomError::AxisMismatch(delays.len(), probabilities.len()));
        }
        for k in 1..delays.len() {
            if delays[k].ps() <= delays[k - 1].ps() {
                return Err(HomError::DelaysNotIncreasing(k));
            }
        }
        let probabilities: Vec<f64> = probabilities.into_iter().map(clamp_probability).collect();
        if let Some(k) = probabilities.iter().position(|p| !(0.0..=1.0).contains(p)) {
            return Err(HomError::ProbabilityOutOfRange { index: k, value: probabilities[k] });
        }
        Ok(HomTrace { delays, probabilities, meta })
    }

    pub fn delays(&self) -> &[Delay] {
        &self.delays
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.delays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays.is_empty()
    }

    pub fn max_probability(&self) -> Option<(Delay, f64)> {
        self.delays
            .iter()
            .zip(&self.probabilities)
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(d, p)| (*d, *p))
    }

    pub fn min_probability(&self) -> Option<(Delay, f64)> {
        self.delays
            .iter()
            .zip(&self.probabilities)
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(d, p)| (*d, *p))
    }
}

/// Reusable numeric engine: the exchange product and quadrature weights are
/// τ-independent and precomputed once per grid.
pub struct NumericHom {
    axis: Vec<f64>,
    step: f64,
    /// m[a][b] = w_a w_b F*(ω_a, ω_b) F(ω_b, ω_a) / ‖F‖².
    kernel: ndarray::Array2<C64>,
}

impl NumericHom {
    pub fn new(jsa: &SpectralGrid) -> Result<Self, HomError> {
        if !jsa.is_square() {
            return Err(HomError::NonSquareGrid);
        }
        let axis = jsa.omega_s_axis().to_vec();
        let w = SpectralGrid::weights(&axis);
        let amp = jsa.amplitude();
        let n = axis.len();

        let mut norm_sq = 0.0;
        for i in 0..n {
            for j in 0..n {
                norm_sq += w[i] * w[j] * amp[[i, j]].norm_sqr();
            }
        }
        if !(norm_sq.is_finite() && norm_sq > 0.0) {
            return Err(HomError::ZeroNorm);
        }

        let mut kernel = ndarray::Array2::<C64>::zeros((n, n));
        for a in 0..n {
            for b in 0..n {
                kernel[[a, b]] = amp[[a, b]].conj() * amp[[b, a]] * (w[a] * w[b] / norm_sq);
            }
        }
        let step = axis[1] - axis[0];
        Ok(NumericHom { axis, step, kernel })
    }

    /// p(τ) = 1/2 − 1/2·Re ∬ F*(ω_s, ω_i) F(ω_i, ω_s) e^{−iτ(ω_s−ω_i)}.
    pub fn probability(&self, tau: Delay) -> Result<f64, HomError> {
        let phase = tau.ps().abs() * self.step;
        if phase >= std::f64::consts::PI {
            return Err(HomError::DelayTooLargeForGrid { tau: tau.ps(), phase });
        }
        let e: Vec<C64> = self
            .axis
            .iter()
            .map(|&omega| C64::from_polar(1.0, -tau.ps() * omega))
            .collect();
        let mut acc = C64::new(0.0, 0.0);
        for (a, row) in self.kernel.rows().into_iter().enumerate() {
            let mut inner = C64::new(0.0, 0.0);
            for (b, m) in row.iter().enumerate() {
                inner += m * e[b].conj();
            }
            acc += e[a] * inner;
        }
        Ok(clamp_probability(0.5 - 0.5 * acc.re))
    }
}

/// One-shot numeric evaluation; sweeps should use [`NumericHom`] directly.
pub fn hom_numeric(jsa: &SpectralGrid, tau: Delay) -> Result<f64, HomError> {
    NumericHom::new(jsa)?.probability(tau)
}

/// Coincidence probability of a separable pair with signal amplitude `f1`
/// and idler amplitude `f2` sampled on a shared `axis`:
/// p = 1/2 − 1/2 |∫ f1* f2 e^{−iτω}|² / (∫|f1|² ∫|f2|²). Never exceeds 1/2.
pub fn hom_separable(axis: &[f64], f1: &[C64], f2: &[C64], tau: Delay) -> Result<f64, HomError> {
    if axis.len() != f1.len() || f1.len() != f2.len() {
        return Err(HomError::AxisMismatch(f1.len(), f2.len()));
    }
    if axis.len() < 2 {
        return Err(HomError::AxisMismatch(axis.len(), 2));
    }
    let step = axis[1] - axis[0];
    let phase = tau.ps().abs() * step;
    if phase >= std::f64::consts::PI {
        return Err(HomError::DelayTooLargeForGrid { tau: tau.ps(), phase });
    }
    let w = SpectralGrid::weights(axis);
    let mut overlap = C64::new(0.0, 0.0);
    let mut n1 = 0.0;
    let mut n2 = 0.0;
    for k in 0..axis.len() {
        overlap += f1[k].conj() * f2[k] * C64::from_polar(w[k], -tau.ps() * axis[k]);
        n1 += w[k] * f1[k].norm_sqr();
        n2 += w[k] * f2[k].norm_sqr();
    }
    if n1 <= 0.0 || n2 <= 0.0 {
        return Err(HomError::ZeroNorm);
    }
    Ok(clamp_probability(0.5 - 0.5 * overlap.norm_sqr() / (n1 * n2)))
}

/// Closed-form coincidence probability of the two-process Gaussian model,
/// parameterized directly by the derived quantities.
///
/// With τ± the group-delay sum/difference, C⁻ = (γ/2)Δω²(τ⁻)²,
/// C⁺ = 1 + (γ/2)σ²(τ⁺)² and ρ = 2r/(1+r²):
///
/// p(τ) = 1/2 − exp(−(τ−τ⁻)²/(2γ(τ⁻)²))/(2√C⁺)
///        · (exp(−C⁻/C⁺) + ρ·cos(Δω·τ + φ))
///        / (1 + exp(−C⁻)·ρ·cos(Δω·τ⁻ + φ))
///
/// The cosine carries +φ, matching a state whose second process enters with
/// weight r·e^{iφ}; see [`hom_analytic_weight_conjugate`] for the −φ twin.
#[allow(clippy::too_many_arguments)]
pub fn hom_analytic_parts(
    sigma: f64,
    tau_minus: f64,
    tau_plus: f64,
    delta_omega: f64,
    rho: f64,
    phi: f64,
    gamma: f64,
    tau: Delay,
) -> Result<f64, HomError> {
    if tau_minus.abs() < TAU_MINUS_FLOOR {
        return Err(HomError::DegenerateGroupDelay { tau_minus });
    }
    let c_minus = gamma / 2.0 * delta_omega * delta_omega * tau_minus * tau_minus;
    let c_plus = 1.0 + gamma / 2.0 * sigma * sigma * tau_plus * tau_plus;
    let d = tau.ps() - tau_minus;
    let envelope = (-d * d / (2.0 * gamma * tau_minus * tau_minus)).exp();
    let numer = (-c_minus / c_plus).exp() + rho * (delta_omega * tau.ps() + phi).cos();
    let denom = 1.0 + (-c_minus).exp() * rho * (delta_omega * tau_minus + phi).cos();
    Ok(clamp_probability(0.5 - envelope / (2.0 * c_plus.sqrt()) * numer / denom))
}

/// Analytic coincidence probability of a Gaussian-approximation model.
pub fn hom_analytic(model: &ProcessModel, tau: Delay) -> Result<f64, HomError> {
    if model.phasematch.shape != PhasematchShape::GaussianApprox {
        return Err(HomError::AnalyticRequiresGaussianShape);
    }
    let (delta_omega, rho, phi) = match &model.superposition {
        Some(sp) => (sp.delta_omega, sp.rho(), sp.phi),
        None => (0.0, 0.0, 0.0),
    };
    hom_analytic_parts(
        model.pump.sigma,
        model.phasematch.tau_minus(),
        model.phasematch.tau_plus(),
        delta_omega,
        rho,
        phi,
        model.phasematch.gamma,
        tau,
    )
}

/// The same closed form under the opposite phase convention, in which the
/// second process enters with weight r·e^{−iφ} and the cosines carry −φ.
/// Kept so the two conventions can be compared explicitly; the two routes
/// coincide at φ ∈ {0, π} and map into each other under φ → 2π − φ.
pub fn hom_analytic_weight_conjugate(model: &ProcessModel, tau: Delay) -> Result<f64, HomError> {
    if model.phasematch.shape != PhasematchShape::GaussianApprox {
        return Err(HomError::AnalyticRequiresGaussianShape);
    }
    let (delta_omega, rho, phi) = match &model.superposition {
        Some(sp) => (sp.delta_omega, sp.rho(), sp.phi),
        None => (0.0, 0.0, 0.0),
    };
    hom_analytic_parts(
        model.pump.sigma,
        model.phasematch.tau_minus(),
        model.phasematch.tau_plus(),
        delta_omega,
        rho,
        -phi,
        model.phasematch.gamma,
        tau,
    )
}

fn check_strictly_increasing(delays: &[Delay]) -> Result<(), HomError> {
    for k in 1..delays.len() {
        if delays[k].ps() <= delays[k - 1].ps() {
            return Err(HomError::DelaysNotIncreasing(k));
        }
    }
    Ok(())
}

/// Sweep the numeric engine across a strictly increasing delay axis.
/// Elements evaluate in parallel; output order is deterministic.
pub fn sweep_numeric(jsa: &SpectralGrid, delays: &[Delay]) -> Result<HomTrace, HomError> {
    check_strictly_increasing(delays)?;
    let engine = NumericHom::new(jsa)?;
    let results: Vec<Result<f64, HomError>> = delays
        .par_iter()
        .map(|&tau| engine.probability(tau))
        .collect();
    let mut probabilities = Vec::with_capacity(results.len());
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(p) => probabilities.push(p),
            Err(e) => {
                return Err(HomError::SweepElement {
                    index,
                    tau: delays[index].ps(),
                    source: Box::new(e),
                });
            }
        }
    }
    let mut meta = TraceMeta { engine: "numeric".into(), ..Default::default() };
    meta.params.insert("grid_samples".into(), jsa.omega_s_axis().len().to_string());
    meta.params.insert("grid_step_rad_per_ps".into(), format!("{:.9e}", jsa.step_s()));
    HomTrace::new(delays.to_vec(), probabilities, meta)
}

/// Sweep the analytic engine across a strictly increasing delay axis.
pub fn sweep_analytic(model: &ProcessModel, delays: &[Delay]) -> Result<HomTrace, HomError> {
    check_strictly_increasing(delays)?;
    let results: Vec<Result<f64, HomError>> = delays
        .par_iter()
        .map(|&tau| hom_analytic(model, tau))
        .collect();
    let mut probabilities = Vec::with_capacity(results.len());
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(p) => probabilities.push(p),
            Err(e) => {
                return Err(HomError::SweepElement {
                    index,
                    tau: delays[index].ps(),
                    source: Box::new(e),
                });
            }
        }
    }
    let mut meta = TraceMeta { engine: "analytic".into(), ..Default::default() };
    meta.params.insert("sigma_rad_per_ps".into(), format!("{:.9}", model.pump.sigma));
    meta.params.insert("tau_minus_ps".into(), format!("{:.9}", model.phasematch.tau_minus()));
    meta.params.insert("tau_plus_ps".into(), format!("{:.9}", model.phasematch.tau_plus()));
    meta.params.insert("gamma".into(), format!("{:.6}", model.phasematch.gamma));
    if let Some(sp) = &model.superposition {
        meta.params.insert("delta_omega_rad_per_ps".into(), format!("{:.9}", sp.delta_omega));
        meta.params.insert("r".into(), format!("{:.9}", sp.r));
        meta.params.insert("phi_rad".into(), format!("{:.9}", sp.phi));
    }
    HomTrace::new(delays.to_vec(), probabilities, meta)
}

/// Witness outcome. The test is one-sided: a trace that never clears the
/// threshold proves nothing about separability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Entangled,
    Inconclusive,
}

/// Result of applying the p > 1/2 witness to a trace.
#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub verdict: Verdict,
    /// Guard band actually used.
    pub epsilon: f64,
    pub max_probability: f64,
    pub max_at: Delay,
}

/// Apply the entanglement witness: `Entangled` iff max p > 1/2 + ε.
///
/// When `epsilon` is not given it defaults to 3× the estimated standard
/// error for traces carrying count statistics, else 1e-6.
pub fn witness(trace: &HomTrace, epsilon: Option<f64>) -> Result<WitnessReport, HomError> {
    if trace.is_empty() {
        return Err(HomError::EmptyTrace);
    }
    let eps = match epsilon {
        Some(e) => {
            if !(e >= 0.0) {
                return Err(HomError::InvalidGuardBand(e));
            }
            e
        }
        None => match &trace.meta.counts {
            Some(counts) => {
                let mut se_max = 0.0f64;
                for (p, c) in trace.probabilities.iter().zip(counts) {
                    let n = c.max(1.0);
                    se_max = se_max.max((p * (1.0 - p) / n).sqrt());
                }
                3.0 * se_max
            }
            None => 1e-6,
        },
    };
    let (max_at, max_probability) = trace.max_probability().expect("non-empty");
    let verdict = if max_probability > 0.5 + eps {
        Verdict::Entangled
    } else {
        Verdict::Inconclusive
    };
    Ok(WitnessReport { verdict, epsilon: eps, max_probability, max_at })
}

/// Dominant oscillation period of a mean-removed, uniformly sampled signal.
///
/// The beat rides on a slowly varying bump envelope, so the period is read
/// from the discrete spectrum: the magnitude is scanned over frequencies
/// between the window scale and Nyquist and the peak refined parabolically.
/// Returns the period in ps, or None when the window is too short or holds
/// no oscillation above the trend.
pub fn oscillation_period(delays: &[Delay], probabilities: &[f64]) -> Option<f64> {
    let n = probabilities.len();
    if n < 8 {
        return None;
    }
    let h = delays[1].ps() - delays[0].ps();
    let span = (n - 1) as f64 * h;
    let mean = probabilities.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = probabilities.iter().map(|p| p - mean).collect();

    let omega_min = 4.0 * std::f64::consts::PI / span;
    let omega_max = std::f64::consts::PI / h;
    if omega_min >= omega_max {
        return None;
    }
    // Hann taper keeps the trend's spectral leakage away from the beat line.
    let windowed: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / (n - 1) as f64).cos();
            v * w
        })
        .collect();
    let step = 2.0 * std::f64::consts::PI / (20.0 * span);
    let count = ((omega_max - omega_min) / step) as usize + 1;
    let power = |omega: f64| -> f64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, &v) in windowed.iter().enumerate() {
            let phase = omega * k as f64 * h;
            re += v * phase.cos();
            im -= v * phase.sin();
        }
        re * re + im * im
    };
    let mut best = (omega_min, f64::NEG_INFINITY);
    for k in 0..count {
        let omega = omega_min + step * k as f64;
        let p = power(omega);
        if p > best.1 {
            best = (omega, p);
        }
    }
    if best.1 <= 0.0 {
        return None;
    }
    // parabolic refinement around the scan peak
    let (w0, p0) = best;
    let (pm, pp) = (power(w0 - step), power(w0 + step));
    let denom = pm - 2.0 * p0 + pp;
    let w_star = if denom.abs() > 1e-300 {
        w0 + 0.5 * step * (pm - pp) / denom
    } else {
        w0
    };
    Some(2.0 * std::f64::consts::PI / w_star)
}
