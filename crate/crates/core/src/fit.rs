//! Least-squares fitting of the analytic coincidence model to measured or
//! synthetic traces, and the sinc-versus-displaced-Gaussian discrimination
//! report.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::FitError;
use crate::grid::linspace;
use crate::hom::{hom_analytic_parts, sweep_analytic, sweep_numeric, HomTrace, TraceMeta};
use crate::spectra::{build_jsa, GridSpec, PhasematchShape, ProcessModel};
use crate::units::Delay;

/// Number of independent simplex restarts; spaced to cover the 2π phase
/// ambiguity.
const RESTARTS: usize = 8;

/// Relative agreement between the two best restarts required to call the
/// fit converged.
const CONVERGENCE_REL: f64 = 1e-4;

/// Fittable parameters of the trace model
/// p(τ) = baseline + visibility·(p_model(τ + tau_offset) − 1/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitParam {
    DeltaOmega,
    Rho,
    Phi,
    TauMinus,
    TauPlus,
    Sigma,
    Visibility,
    Baseline,
    TauOffset,
}

impl FitParam {
    pub const ALL: [FitParam; 9] = [
        FitParam::DeltaOmega,
        FitParam::Rho,
        FitParam::Phi,
        FitParam::TauMinus,
        FitParam::TauPlus,
        FitParam::Sigma,
        FitParam::Visibility,
        FitParam::Baseline,
        FitParam::TauOffset,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FitParam::DeltaOmega => "delta_omega",
            FitParam::Rho => "rho",
            FitParam::Phi => "phi",
            FitParam::TauMinus => "tau_minus",
            FitParam::TauPlus => "tau_plus",
            FitParam::Sigma => "sigma",
            FitParam::Visibility => "visibility",
            FitParam::Baseline => "baseline",
            FitParam::TauOffset => "tau_offset",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            FitParam::DeltaOmega => "rad_per_ps",
            FitParam::Sigma => "rad_per_ps",
            FitParam::Phi => "rad",
            FitParam::TauMinus | FitParam::TauPlus | FitParam::TauOffset => "ps",
            _ => "",
        }
    }

    /// Angles are compared on the circle, not on the line.
    fn is_periodic(self) -> bool {
        matches!(self, FitParam::Phi)
    }
}

/// A full set of model parameter values in internal units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamValues {
    pub delta_omega: f64,
    pub rho: f64,
    pub phi: f64,
    pub tau_minus: f64,
    pub tau_plus: f64,
    pub sigma: f64,
    pub visibility: f64,
    pub baseline: f64,
    pub tau_offset: f64,
}

impl ParamValues {
    pub fn get(&self, p: FitParam) -> f64 {
        match p {
            FitParam::DeltaOmega => self.delta_omega,
            FitParam::Rho => self.rho,
            FitParam::Phi => self.phi,
            FitParam::TauMinus => self.tau_minus,
            FitParam::TauPlus => self.tau_plus,
            FitParam::Sigma => self.sigma,
            FitParam::Visibility => self.visibility,
            FitParam::Baseline => self.baseline,
            FitParam::TauOffset => self.tau_offset,
        }
    }

    pub fn set(&mut self, p: FitParam, v: f64) {
        match p {
            FitParam::DeltaOmega => self.delta_omega = v,
            FitParam::Rho => self.rho = v,
            FitParam::Phi => self.phi = v,
            FitParam::TauMinus => self.tau_minus = v,
            FitParam::TauPlus => self.tau_plus = v,
            FitParam::Sigma => self.sigma = v,
            FitParam::Visibility => self.visibility = v,
            FitParam::Baseline => self.baseline = v,
            FitParam::TauOffset => self.tau_offset = v,
        }
    }

    /// Defaults describing a bare dip: no superposition, unit visibility.
    pub fn baseline_defaults(sigma: f64, tau_minus: f64, tau_plus: f64) -> Self {
        ParamValues {
            delta_omega: 0.0,
            rho: 0.0,
            phi: 0.0,
            tau_minus,
            tau_plus,
            sigma,
            visibility: 1.0,
            baseline: 0.5,
            tau_offset: 0.0,
        }
    }

    /// Trace model value at one delay.
    pub fn evaluate(&self, gamma: f64, tau: Delay) -> Result<f64, FitError> {
        let shifted = Delay::from_ps(tau.ps() + self.tau_offset);
        let p = hom_analytic_parts(
            self.sigma,
            self.tau_minus,
            self.tau_plus,
            self.delta_omega,
            self.rho,
            self.phi,
            gamma,
            shifted,
        )?;
        Ok(self.baseline + self.visibility * (p - 0.5))
    }
}

/// What to fit: the free subset, start values and box bounds.
#[derive(Debug, Clone)]
pub struct FitSpec {
    pub free: Vec<FitParam>,
    pub initial: ParamValues,
    /// Box bounds per parameter; parameters absent here use the defaults.
    pub bounds: BTreeMap<FitParam, (f64, f64)>,
    /// Gaussian-approximation exponent held fixed during the fit.
    pub gamma: f64,
    /// Master seed for the restart jitter.
    pub seed: u64,
    /// Iteration cap per restart.
    pub max_iterations: usize,
}

impl FitSpec {
    pub fn new(free: Vec<FitParam>, initial: ParamValues) -> Result<Self, FitError> {
        if free.is_empty() {
            return Err(FitError::InvalidSpec("at least one free parameter is required".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for p in &free {
            if !seen.insert(*p) {
                return Err(FitError::InvalidSpec(format!("parameter {} listed twice", p.name())));
            }
        }
        let spec = FitSpec {
            free,
            initial,
            bounds: BTreeMap::new(),
            gamma: crate::spectra::DEFAULT_GAMMA,
            seed: 0,
            max_iterations: 2000,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_bounds(mut self, bounds: BTreeMap<FitParam, (f64, f64)>) -> Result<Self, FitError> {
        self.bounds = bounds;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn default_bounds(p: FitParam) -> (f64, f64) {
        match p {
            FitParam::DeltaOmega => (0.0, 1e3),
            FitParam::Rho => (0.0, 1.0),
            // periodic: wide window, normalized modulo 2π on report
            FitParam::Phi => (-1e3, 1e3),
            FitParam::TauMinus => (-1e3, 1e3),
            FitParam::TauPlus => (-1e3, 1e3),
            FitParam::Sigma => (1e-9, 1e3),
            FitParam::Visibility => (1e-6, 1.0),
            FitParam::Baseline => (0.0, 1.0),
            FitParam::TauOffset => (-1e3, 1e3),
        }
    }

    fn bound(&self, p: FitParam) -> (f64, f64) {
        self.bounds.get(&p).copied().unwrap_or_else(|| Self::default_bounds(p))
    }

    fn validate(&self) -> Result<(), FitError> {
        for (p, (lo, hi)) in &self.bounds {
            if !(lo < hi) {
                return Err(FitError::InvalidSpec(format!(
                    "bounds for {} are empty: [{lo}, {hi}]",
                    p.name()
                )));
            }
            let (dlo, dhi) = Self::default_bounds(*p);
            if matches!(p, FitParam::Rho | FitParam::Visibility | FitParam::Baseline)
                && (*lo < dlo || *hi > dhi)
            {
                return Err(FitError::InvalidSpec(format!(
                    "bounds for {} must stay within [{dlo}, {dhi}]",
                    p.name()
                )));
            }
        }
        for p in &self.free {
            let (lo, hi) = self.bound(*p);
            let v = self.initial.get(*p);
            if !(v >= lo && v <= hi) {
                return Err(FitError::InvalidSpec(format!(
                    "initial {} = {v} outside bounds [{lo}, {hi}]",
                    p.name()
                )));
            }
        }
        Ok(())
    }
}

/// Fit outcome: the recovered parameters with uncertainty estimates.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: ParamValues,
    pub free: Vec<FitParam>,
    pub residual_rms: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Standard errors from the quadratic model at the optimum, per free
    /// parameter; NaN when the curvature is not resolvable.
    pub param_stderr: BTreeMap<FitParam, f64>,
}

fn wrap_angle(phi: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    let mut v = phi % tau;
    if v < 0.0 {
        v += tau;
    }
    v
}

struct Objective<'a> {
    taus: &'a [Delay],
    data: &'a [f64],
    template: ParamValues,
    free: &'a [FitParam],
    gamma: f64,
}

impl Objective<'_> {
    fn ssr(&self, x: &[f64]) -> f64 {
        let mut params = self.template;
        for (k, p) in self.free.iter().enumerate() {
            params.set(*p, x[k]);
        }
        let mut acc = 0.0;
        for (tau, y) in self.taus.iter().zip(self.data) {
            match params.evaluate(self.gamma, *tau) {
                Ok(m) => {
                    let r = m - y;
                    acc += r * r;
                }
                Err(_) => return f64::INFINITY,
            }
        }
        acc
    }
}

struct SimplexOutcome {
    x: Vec<f64>,
    ssr: f64,
    iterations: usize,
    /// Best objective after each iteration; non-increasing by construction.
    #[cfg_attr(not(test), allow(dead_code))]
    history: Vec<f64>,
}

/// Standard Nelder-Mead with candidate points projected into the box.
fn nelder_mead(
    f: &Objective<'_>,
    x0: &[f64],
    lo: &[f64],
    hi: &[f64],
    max_iterations: usize,
) -> SimplexOutcome {
    let n = x0.len();
    let clamp = |x: &mut Vec<f64>| {
        for k in 0..n {
            x[k] = x[k].clamp(lo[k], hi[k]);
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for k in 0..n {
        let mut v = x0.to_vec();
        let span = hi[k] - lo[k];
        let step = if span.is_finite() { 0.05 * span } else { 0.1 * v[k].abs().max(1.0) };
        v[k] += if v[k] + step <= hi[k] { step } else { -step };
        clamp(&mut v);
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| f.ssr(x)).collect();
    let mut history = Vec::with_capacity(max_iterations);
    let mut iterations = 0;

    for _ in 0..max_iterations {
        iterations += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];
        history.push(values[best]);

        let spread = values[worst] - values[best];
        if spread <= 1e-14 * (values[best].abs() + 1e-14) {
            break;
        }

        let mut centroid = vec![0.0; n];
        for &idx in order.iter().take(n) {
            for k in 0..n {
                centroid[k] += simplex[idx][k] / n as f64;
            }
        }

        let blend = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
            let mut v: Vec<f64> = (0..n).map(|k| a[k] + t * (b[k] - a[k])).collect();
            for k in 0..n {
                v[k] = v[k].clamp(lo[k], hi[k]);
            }
            v
        };

        // reflect
        let reflected = blend(&centroid, &simplex[worst], -1.0);
        let f_reflected = f.ssr(&reflected);
        if f_reflected < values[best] {
            let expanded = blend(&centroid, &simplex[worst], -2.0);
            let f_expanded = f.ssr(&expanded);
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }
        // contract
        let contracted = if f_reflected < values[worst] {
            blend(&centroid, &reflected, 0.5)
        } else {
            blend(&centroid, &simplex[worst], 0.5)
        };
        let f_contracted = f.ssr(&contracted);
        if f_contracted < values[worst].min(f_reflected) {
            simplex[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }
        // shrink toward the best vertex
        let anchor = simplex[best].clone();
        for idx in 0..=n {
            if idx == best {
                continue;
            }
            simplex[idx] = blend(&anchor, &simplex[idx], 0.5);
            values[idx] = f.ssr(&simplex[idx]);
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap())
        .unwrap();
    history.push(values[best]);
    SimplexOutcome { x: simplex[best].clone(), ssr: values[best], iterations, history }
}

fn jittered_start(
    spec: &FitSpec,
    lo: &[f64],
    hi: &[f64],
    restart: usize,
) -> Vec<f64> {
    let mut x: Vec<f64> = spec.free.iter().map(|p| spec.initial.get(*p)).collect();
    if restart == 0 {
        return x;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    for (k, p) in spec.free.iter().enumerate() {
        let span = if hi[k].is_finite() && lo[k].is_finite() { hi[k] - lo[k] } else { x[k].abs().max(1.0) };
        let jitter_scale = if span.is_finite() { 0.10 * span } else { 0.5 };
        x[k] += rng.random_range(-1.0..1.0) * jitter_scale;
        if p.is_periodic() {
            // spread the phase starts around the circle
            x[k] = spec.initial.get(*p) + restart as f64 * 2.0 * std::f64::consts::PI / RESTARTS as f64
                + rng.random_range(-0.2..0.2);
        }
        x[k] = x[k].clamp(lo[k], hi[k]);
    }
    x
}

/// Central-difference Hessian of the objective, inverted for the standard
/// errors of a least-squares optimum: Cov ≈ 2·σ̂²·H⁻¹ with σ̂² = SSR/(n−p).
fn standard_errors(
    f: &Objective<'_>,
    x: &[f64],
    lo: &[f64],
    hi: &[f64],
    ssr: f64,
    samples: usize,
) -> Vec<f64> {
    let n = x.len();
    let dof = samples.saturating_sub(n);
    if dof == 0 {
        return vec![f64::NAN; n];
    }
    let sigma_sq = ssr / dof as f64;
    let mut h = vec![vec![0.0; n]; n];
    let steps: Vec<f64> = (0..n)
        .map(|k| {
            let span = if hi[k].is_finite() && lo[k].is_finite() { hi[k] - lo[k] } else { x[k].abs().max(1.0) };
            (1e-4 * span).max(1e-9)
        })
        .collect();
    let f0 = f.ssr(x);
    let at = |deltas: &[(usize, f64)]| -> f64 {
        let mut v = x.to_vec();
        for &(k, d) in deltas {
            v[k] += d;
        }
        f.ssr(&v)
    };
    for a in 0..n {
        let da = steps[a];
        h[a][a] = (at(&[(a, da)]) - 2.0 * f0 + at(&[(a, -da)])) / (da * da);
        for b in a + 1..n {
            let db = steps[b];
            let mixed = (at(&[(a, da), (b, db)]) - at(&[(a, da), (b, -db)])
                - at(&[(a, -da), (b, db)])
                + at(&[(a, -da), (b, -db)]))
                / (4.0 * da * db);
            h[a][b] = mixed;
            h[b][a] = mixed;
        }
    }
    match invert(&h) {
        Some(inv) => (0..n)
            .map(|k| {
                let v = 2.0 * sigma_sq * inv[k][k];
                if v > 0.0 {
                    v.sqrt()
                } else {
                    f64::NAN
                }
            })
            .collect(),
        None => vec![f64::NAN; n],
    }
}

/// Gauss-Jordan inverse for the small Hessian.
fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&a_, &b_| {
            a[a_][col].abs().partial_cmp(&a[b_][col].abs()).unwrap()
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = a[col][col];
        for j in 0..n {
            a[col][j] /= scale;
            inv[col][j] /= scale;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..n {
                a[row][j] -= factor * a[col][j];
                inv[row][j] -= factor * inv[col][j];
            }
        }
    }
    Some(inv)
}

/// Fit the analytic trace model to data by bounded derivative-free simplex
/// descent with eight jittered restarts. Restarts run in parallel and the
/// winner is picked deterministically (lowest SSR, ties by restart index).
pub fn fit_trace(data: &HomTrace, spec: &FitSpec) -> Result<FitResult, FitError> {
    spec.validate()?;
    let samples = data.len();
    if samples < 2 * spec.free.len() {
        return Err(FitError::TooFewSamples { samples, free: spec.free.len() });
    }
    if let Some(k) = data
        .probabilities()
        .iter()
        .zip(data.delays())
        .position(|(p, d)| !p.is_finite() || !d.ps().is_finite())
    {
        return Err(FitError::NonFiniteData(k));
    }

    let objective = Objective {
        taus: data.delays(),
        data: data.probabilities(),
        template: spec.initial,
        free: &spec.free,
        gamma: spec.gamma,
    };
    let lo: Vec<f64> = spec.free.iter().map(|p| spec.bound(*p).0).collect();
    let hi: Vec<f64> = spec.free.iter().map(|p| spec.bound(*p).1).collect();

    let mut outcomes: Vec<(usize, SimplexOutcome)> = (0..RESTARTS)
        .into_par_iter()
        .map(|restart| {
            let x0 = jittered_start(spec, &lo, &hi, restart);
            (restart, nelder_mead(&objective, &x0, &lo, &hi, spec.max_iterations))
        })
        .collect();
    outcomes.sort_by(|a, b| {
        a.1.ssr
            .partial_cmp(&b.1.ssr)
            .unwrap()
            .then_with(|| a.0.cmp(&b.0))
    });

    let best = &outcomes[0].1;
    let runner_up = &outcomes[1].1;
    let converged = spec.free.iter().enumerate().all(|(k, p)| {
        let (a, b) = (best.x[k], runner_up.x[k]);
        if p.is_periodic() {
            let mut d = (a - b).abs() % (2.0 * std::f64::consts::PI);
            if d > std::f64::consts::PI {
                d = 2.0 * std::f64::consts::PI - d;
            }
            d <= CONVERGENCE_REL * 2.0 * std::f64::consts::PI
        } else {
            (a - b).abs() <= CONVERGENCE_REL * a.abs().max(b.abs()).max(1e-12)
        }
    });

    let mut params = spec.initial;
    for (k, p) in spec.free.iter().enumerate() {
        let v = if p.is_periodic() { wrap_angle(best.x[k]) } else { best.x[k] };
        params.set(*p, v);
    }
    let stderr = standard_errors(&objective, &best.x, &lo, &hi, best.ssr, samples);
    let param_stderr: BTreeMap<FitParam, f64> = spec
        .free
        .iter()
        .zip(stderr)
        .map(|(p, e)| (*p, e))
        .collect();

    Ok(FitResult {
        params,
        free: spec.free.clone(),
        residual_rms: (best.ssr / samples as f64).sqrt(),
        iterations: best.iterations,
        converged,
        param_stderr,
    })
}

/// Normalize raw coincidence counts to probabilities by the asymptotic
/// plateau: p = counts / (2·plateau), plateau estimated from the outer 20%
/// of delay samples. Values are clipped to [0, 1]; the counts ride along in
/// the metadata for witness guard-band estimation.
pub fn trace_from_counts(delays: Vec<Delay>, counts: Vec<f64>) -> Result<HomTrace, FitError> {
    if counts.len() != delays.len() {
        return Err(FitError::InvalidSpec(format!(
            "got {} delays but {} counts",
            delays.len(),
            counts.len()
        )));
    }
    if counts.len() < 5 {
        return Err(FitError::TooFewSamples { samples: counts.len(), free: 1 });
    }
    if let Some(k) = counts.iter().position(|c| !c.is_finite() || *c < 0.0) {
        return Err(FitError::NonFiniteData(k));
    }
    let edge = (counts.len() / 10).max(1);
    let outer: Vec<f64> = counts[..edge].iter().chain(&counts[counts.len() - edge..]).copied().collect();
    let plateau = outer.iter().sum::<f64>() / outer.len() as f64;
    if plateau <= 0.0 {
        return Err(FitError::InvalidSpec("count plateau is zero; cannot normalize".into()));
    }
    let probabilities: Vec<f64> = counts.iter().map(|c| (c / (2.0 * plateau)).clamp(0.0, 1.0)).collect();
    let mut meta = TraceMeta { engine: "counts".into(), ..Default::default() };
    meta.params.insert("plateau_counts".into(), format!("{plateau:.6}"));
    meta.counts = Some(counts);
    HomTrace::new(delays, probabilities, meta).map_err(FitError::Hom)
}

/// Outcome of comparing a true-sinc process against the displaced-Gaussian
/// stand-in that models its side lobe.
#[derive(Debug, Clone)]
pub struct SincDiscrimination {
    /// Numeric trace of the bare sinc process (superposition stripped).
    pub sinc_trace: HomTrace,
    /// Analytic trace of the Gaussian pair with the model's Δω, r, φ.
    pub standin_trace: HomTrace,
    pub max_p_sinc: f64,
    pub max_p_standin: f64,
    pub sinc_exceeds_half: bool,
    pub standin_exceeds_half: bool,
    /// √∫(p_sinc − p_standin)² dτ over the common delay axis.
    pub l2_distance: f64,
}

/// Margin above 1/2 that counts as exceeding it.
pub const DISCRIMINATION_MARGIN: f64 = 1e-3;

/// Delay axis covering the dip envelope and several beat periods.
pub fn default_discrimination_delays(model: &ProcessModel, count: usize) -> Vec<Delay> {
    let tau_minus = model.phasematch.tau_minus();
    let gamma = model.phasematch.gamma;
    let env_reach = 6.0 * (gamma.sqrt() * tau_minus.abs()).max(0.2);
    let beat_reach = match &model.superposition {
        Some(sp) if sp.delta_omega.abs() > 0.0 => 3.0 * 2.0 * std::f64::consts::PI / sp.delta_omega.abs(),
        _ => 0.0,
    };
    let reach = env_reach.max(beat_reach);
    linspace(tau_minus - reach, tau_minus + reach, count)
        .into_iter()
        .map(Delay::from_ps)
        .collect()
}

/// Compare the two explanations of a structured trace: the true sinc
/// phasematching (numeric route, no superposition) against the two-Gaussian
/// stand-in (analytic route, with the model's superposition).
pub fn discriminate_sinc(model: &ProcessModel, delays: &[Delay]) -> Result<SincDiscrimination, FitError> {
    if delays.len() < 2 {
        return Err(FitError::TooFewSamples { samples: delays.len(), free: 1 });
    }
    let sinc_model = ProcessModel {
        phasematch: crate::spectra::PhasematchModel {
            shape: PhasematchShape::Sinc,
            ..model.phasematch
        },
        superposition: None,
        ..*model
    };
    let gauss_model = ProcessModel {
        phasematch: crate::spectra::PhasematchModel {
            shape: PhasematchShape::GaussianApprox,
            ..model.phasematch
        },
        ..*model
    };

    // The sweep must resolve the largest requested delay, which the span
    // derived from the sinc tails does not know about; pick the sample
    // count here.
    let tau_abs_max = delays
        .iter()
        .map(|d| d.ps().abs())
        .fold(0.0f64, f64::max);
    let resolved = crate::spectra::resolve_grid(&sinc_model, &GridSpec::default())
        .map_err(|e| FitError::InvalidSpec(format!("sinc grid: {e}")))?;
    let h_nyquist = std::f64::consts::PI / (1.05 * tau_abs_max.max(1e-9));
    let h_auto = 2.0 * resolved.half_span / (resolved.samples as f64 - 1.0);
    let samples = if h_auto <= h_nyquist {
        resolved.samples
    } else {
        ((2.0 * resolved.half_span / h_nyquist).ceil() as usize + 1).min(8192)
    };
    let spec = GridSpec {
        samples: Some(samples),
        half_span: Some(resolved.half_span),
        center: None,
    };

    let sinc_jsa = build_jsa(&sinc_model, &spec)
        .map_err(|e| FitError::InvalidSpec(format!("sinc JSA: {e}")))?;
    let sinc_trace = sweep_numeric(&sinc_jsa, delays)?;
    let standin_trace = sweep_analytic(&gauss_model, delays)?;

    let max_p_sinc = sinc_trace.max_probability().map(|(_, p)| p).unwrap_or(0.0);
    let max_p_standin = standin_trace.max_probability().map(|(_, p)| p).unwrap_or(0.0);
    let h = delays[1].ps() - delays[0].ps();
    let mut l2 = 0.0;
    for (k, (a, b)) in sinc_trace
        .probabilities()
        .iter()
        .zip(standin_trace.probabilities())
        .enumerate()
    {
        let w = if k == 0 || k == delays.len() - 1 { h / 2.0 } else { h };
        l2 += w * (a - b) * (a - b);
    }
    Ok(SincDiscrimination {
        max_p_sinc,
        max_p_standin,
        sinc_exceeds_half: max_p_sinc > 0.5 + DISCRIMINATION_MARGIN,
        standin_exceeds_half: max_p_standin > 0.5 + DISCRIMINATION_MARGIN,
        l2_distance: l2.sqrt(),
        sinc_trace,
        standin_trace,
    })
}
