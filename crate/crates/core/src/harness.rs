//! Monte Carlo driver: per-trial execution, histograms, sweeps, and fits.
//!
//! Trials are keyed by `(master_seed, trial_index)`, so any subset of trials
//! can be re-run bit-identically and the trial pool parallelizes without
//! shared RNG state. Parallel accumulation works over fixed-size chunks that
//! are reduced in index order, so results do not depend on scheduling.
//!
//! Under the stochastic Pauli model the fault Bernoulli draws live on their
//! own RNG stream; a look-ahead scan of that stream identifies trials with no
//! fault anywhere, which are exactly the identity and skip the statevector
//! simulation entirely. At the error rates of interest this covers the vast
//! majority of trials.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metrics::{compute_metrics, FailureMetrics, MetricBases};
use crate::noise::{random_input_angles, NoiseModel, RngStream};
use crate::{QecCode, Result, SimError};

/// Values below this land in the histogram's dedicated zero bin.
pub const HIST_FLOOR: f64 = 1e-12;
/// Values at least `1 - HIST_ONE_TOL` land in the dedicated one bin.
pub const HIST_ONE_TOL: f64 = 1e-9;
/// Log-spaced bins per decade.
pub const BINS_PER_DECADE: usize = 5;
/// Total log bins covering [1e-12, 1).
pub const N_BINS: usize = 60;
/// Trials per parallel accumulation chunk.
const CHUNK: u64 = 1024;

/// How the encoded input state of each trial is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InputStatePolicy {
    /// theta uniform on [0, pi), phi on [0, 2 pi), fresh per trial.
    Random,
    /// Round-robin over the six single-qubit stabilizer states.
    StabilizerSix,
    /// The same (theta, phi) for every trial.
    Fixed { theta: f64, phi: f64 },
}

/// (theta, phi) pairs of the six stabilizer states under
/// alpha = cos(theta), beta = sin(theta) e^{i phi}.
pub const STABILIZER_SIX: [(f64, f64); 6] = {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
    [
        (0.0, 0.0),
        (FRAC_PI_2, 0.0),
        (FRAC_PI_4, 0.0),
        (FRAC_PI_4, PI),
        (FRAC_PI_4, FRAC_PI_2),
        (FRAC_PI_4, 3.0 * FRAC_PI_2),
    ]
};

/// Which metric defines a trial failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureCriterion {
    PFailL,
    PFailL1,
    PFailPsi1,
    PFailPsi2,
    Infidelity,
}

impl FailureCriterion {
    pub fn value(self, m: &FailureMetrics) -> f64 {
        match self {
            Self::PFailL => m.p_fail_l,
            Self::PFailL1 => m.p_fail_l1,
            Self::PFailPsi1 => m.p_fail_psi1,
            Self::PFailPsi2 => m.p_fail_psi2,
            Self::Infidelity => 1.0 - m.fidelity_sq,
        }
    }

    /// The matching histogram of a [`HistogramSet`].
    pub fn histogram(self, h: &HistogramSet) -> &Histogram {
        match self {
            Self::PFailL => &h.p_fail_l,
            Self::PFailL1 => &h.p_fail_l1,
            Self::PFailPsi1 => &h.p_fail_psi1,
            Self::PFailPsi2 => &h.p_fail_psi2,
            Self::Infidelity => &h.infidelity,
        }
    }
}

/// One Monte Carlo point: everything needed to reproduce it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub master_seed: u64,
    pub n_trials: u64,
    /// QEC cycles per trial.
    pub cycles: usize,
    pub noise: NoiseModel,
    pub input: InputStatePolicy,
    /// Metric a trial failure is judged on.
    pub criterion: FailureCriterion,
    /// A trial counts as a failure when the criterion metric exceeds this.
    pub failure_threshold: f64,
}

/// Outcome of a single trial.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial_index: u64,
    pub theta: f64,
    pub phi: f64,
    pub metrics: FailureMetrics,
    /// True when the fault pre-scan proved the trial is the identity.
    pub clean_skip: bool,
}

/// Log-binned histogram over [0, 1] with point masses at 0 and 1.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Histogram {
    pub zero: u64,
    pub one: u64,
    pub bins: Vec<u64>,
    pub count: u64,
    pub sum: f64,
}

impl Default for Histogram {
    fn default() -> Self {
        Self {
            zero: 0,
            one: 0,
            bins: vec![0; N_BINS],
            count: 0,
            sum: 0.0,
        }
    }
}

impl Histogram {
    pub fn record(&mut self, v: f64) {
        self.count += 1;
        self.sum += v;
        if v < HIST_FLOOR {
            self.zero += 1;
        } else if v >= 1.0 - HIST_ONE_TOL {
            self.one += 1;
        } else {
            let idx = ((v.log10() + 12.0) * BINS_PER_DECADE as f64).floor() as usize;
            self.bins[idx.min(N_BINS - 1)] += 1;
        }
    }

    pub fn merge(&mut self, other: &Histogram) {
        self.zero += other.zero;
        self.one += other.one;
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            *a += b;
        }
        self.count += other.count;
        self.sum += other.sum;
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }

    /// Lower edge of log bin `i`.
    pub fn bin_lower(i: usize) -> f64 {
        10f64.powf(i as f64 / BINS_PER_DECADE as f64 - 12.0)
    }

    /// Geometric center of log bin `i`.
    pub fn bin_center(i: usize) -> f64 {
        10f64.powf((i as f64 + 0.5) / BINS_PER_DECADE as f64 - 12.0)
    }
}

/// Histograms of every per-trial metric.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct HistogramSet {
    pub p_fail_l: Histogram,
    pub p_fail_l1: Histogram,
    pub p_fail_psi1: Histogram,
    pub p_fail_psi2: Histogram,
    /// 1 - F^2.
    pub infidelity: Histogram,
    /// F^2 / P_code where defined.
    pub ratio: Histogram,
    /// 1 - F^2 / P_code: how far the code-space component has rotated away
    /// from the ideal codeword. The log bins resolve the small-deficit tail
    /// that the `ratio` histogram (clustered at 1) cannot.
    pub ratio_deficit: Histogram,
    pub ratio_undefined: u64,
}

impl HistogramSet {
    pub fn record(&mut self, m: &FailureMetrics) {
        self.p_fail_l.record(m.p_fail_l.max(0.0));
        self.p_fail_l1.record(m.p_fail_l1.max(0.0));
        self.p_fail_psi1.record(m.p_fail_psi1.max(0.0));
        self.p_fail_psi2.record(m.p_fail_psi2.max(0.0));
        self.infidelity.record((1.0 - m.fidelity_sq).max(0.0));
        match m.ratio {
            Some(r) => {
                self.ratio.record(r.clamp(0.0, 1.0));
                self.ratio_deficit.record((1.0 - r).clamp(0.0, 1.0));
            }
            None => self.ratio_undefined += 1,
        }
    }

    pub fn merge(&mut self, other: &HistogramSet) {
        self.p_fail_l.merge(&other.p_fail_l);
        self.p_fail_l1.merge(&other.p_fail_l1);
        self.p_fail_psi1.merge(&other.p_fail_psi1);
        self.p_fail_psi2.merge(&other.p_fail_psi2);
        self.infidelity.merge(&other.infidelity);
        self.ratio.merge(&other.ratio);
        self.ratio_deficit.merge(&other.ratio_deficit);
        self.ratio_undefined += other.ratio_undefined;
    }
}

/// Aggregate result of one Monte Carlo point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointSummary {
    pub config: RunConfig,
    pub histograms: HistogramSet,
    /// Trials proven identity by the fault pre-scan.
    pub clean_skips: u64,
    /// Trials with `p_fail_psi1` above the failure threshold.
    pub failures: u64,
    /// Wilson 95% interval on the failure fraction.
    pub failure_ci: (f64, f64),
}

impl PointSummary {
    /// Mean per-trial value of the configured criterion metric.
    pub fn mean_p_fail(&self) -> f64 {
        self.config.criterion.histogram(&self.histograms).mean()
    }

    /// Share of trials whose criterion metric exceeded the threshold.
    pub fn failure_fraction(&self) -> f64 {
        if self.config.n_trials == 0 {
            0.0
        } else {
            self.failures as f64 / self.config.n_trials as f64
        }
    }
}

/// Pre-built metric bases, keyed by the input policy.
pub enum BasesCache {
    Fixed(Box<MetricBases>),
    Six(Box<[MetricBases; 6]>),
    /// Random inputs: bases are built inside each trial.
    PerTrial,
}

impl BasesCache {
    pub fn build(code: &dyn QecCode, input: &InputStatePolicy) -> Result<Self> {
        match input {
            InputStatePolicy::Fixed { theta, phi } => {
                let (a, b) = amplitudes(*theta, *phi);
                Ok(Self::Fixed(Box::new(MetricBases::new(code, a, b)?)))
            }
            InputStatePolicy::StabilizerSix => {
                let mut all = Vec::with_capacity(6);
                for (theta, phi) in STABILIZER_SIX {
                    let (a, b) = amplitudes(theta, phi);
                    all.push(MetricBases::new(code, a, b)?);
                }
                let arr: [MetricBases; 6] = all.try_into().map_err(|_| {
                    SimError::SubspaceConstruction("stabilizer-six cache".into())
                })?;
                Ok(Self::Six(Box::new(arr)))
            }
            InputStatePolicy::Random => Ok(Self::PerTrial),
        }
    }
}

/// Eq-style amplitudes: alpha = cos(theta), beta = sin(theta) e^{i phi}.
pub fn amplitudes(theta: f64, phi: f64) -> (Complex64, Complex64) {
    (
        Complex64::new(theta.cos(), 0.0),
        Complex64::from_polar(theta.sin(), phi),
    )
}

/// Runs one trial. `allow_fast` enables the fault pre-scan shortcut; tests
/// disable it to prove the shortcut agrees with full simulation.
pub fn run_trial(
    code: &dyn QecCode,
    cfg: &RunConfig,
    trial: u64,
    cache: &BasesCache,
    allow_fast: bool,
) -> Result<TrialOutcome> {
    let mut rng = RngStream::new(cfg.master_seed, trial);
    let (theta, phi) = match cfg.input {
        InputStatePolicy::Random => random_input_angles(&mut rng),
        InputStatePolicy::StabilizerSix => STABILIZER_SIX[(trial % 6) as usize],
        InputStatePolicy::Fixed { theta, phi } => (theta, phi),
    };
    let (alpha, beta) = amplitudes(theta, phi);

    if allow_fast {
        if let NoiseModel::StochasticPauli { p } = cfg.noise {
            let draws = cfg.cycles * code.fault_draws_per_clean_cycle();
            if !rng.fork_fault_scanner().any_fault(p, draws) {
                return Ok(TrialOutcome {
                    trial_index: trial,
                    theta,
                    phi,
                    metrics: FailureMetrics {
                        p_fail_l: 0.0,
                        p_fail_l1: 0.0,
                        p_fail_psi1: 0.0,
                        p_fail_psi2: 0.0,
                        p_code: 1.0,
                        fidelity_sq: 1.0,
                        ratio: Some(1.0),
                    },
                    clean_skip: true,
                });
            }
        }
    }

    let local_bases;
    let bases = match cache {
        BasesCache::Fixed(b) => b.as_ref(),
        BasesCache::Six(b) => &b[(trial % 6) as usize],
        BasesCache::PerTrial => {
            local_bases = MetricBases::new(code, alpha, beta)?;
            &local_bases
        }
    };

    let mut state = code.encode(alpha, beta)?;
    for _ in 0..cfg.cycles {
        code.run_cycle(&mut state, &cfg.noise, &mut rng)?;
    }
    let metrics = compute_metrics(bases, &state)?;
    Ok(TrialOutcome {
        trial_index: trial,
        theta,
        phi,
        metrics,
        clean_skip: false,
    })
}

/// Metrics after one cycle of a chained run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainOutcome {
    /// 1-based cycle number.
    pub cycle: usize,
    pub metrics: FailureMetrics,
}

/// Runs `cycles` QEC cycles on one trial's state, evaluating the metrics
/// against the original input after every cycle.
pub fn run_chain(
    code: &dyn QecCode,
    cfg: &RunConfig,
    trial: u64,
    cache: &BasesCache,
) -> Result<Vec<ChainOutcome>> {
    let mut rng = RngStream::new(cfg.master_seed, trial);
    let (theta, phi) = match cfg.input {
        InputStatePolicy::Random => random_input_angles(&mut rng),
        InputStatePolicy::StabilizerSix => STABILIZER_SIX[(trial % 6) as usize],
        InputStatePolicy::Fixed { theta, phi } => (theta, phi),
    };
    let (alpha, beta) = amplitudes(theta, phi);
    let local_bases;
    let bases = match cache {
        BasesCache::Fixed(b) => b.as_ref(),
        BasesCache::Six(b) => &b[(trial % 6) as usize],
        BasesCache::PerTrial => {
            local_bases = MetricBases::new(code, alpha, beta)?;
            &local_bases
        }
    };
    let mut state = code.encode(alpha, beta)?;
    let mut out = Vec::with_capacity(cfg.cycles);
    for cycle in 1..=cfg.cycles {
        code.run_cycle(&mut state, &cfg.noise, &mut rng)?;
        out.push(ChainOutcome {
            cycle,
            metrics: compute_metrics(bases, &state)?,
        });
    }
    Ok(out)
}

#[derive(Default)]
struct Accum {
    histograms: HistogramSet,
    clean_skips: u64,
    failures: u64,
}

impl Accum {
    fn add(&mut self, out: &TrialOutcome, criterion: FailureCriterion, threshold: f64) {
        self.histograms.record(&out.metrics);
        if out.clean_skip {
            self.clean_skips += 1;
        }
        if criterion.value(&out.metrics) > threshold {
            self.failures += 1;
        }
    }

    fn merge(&mut self, other: &Accum) {
        self.histograms.merge(&other.histograms);
        self.clean_skips += other.clean_skips;
        self.failures += other.failures;
    }
}

/// Runs all trials of one point, in parallel, with deterministic aggregation.
pub fn run_point(code: &dyn QecCode, cfg: &RunConfig) -> Result<PointSummary> {
    cfg.noise.validate()?;
    let cache = BasesCache::build(code, &cfg.input)?;
    let n_chunks = cfg.n_trials.div_ceil(CHUNK);
    let chunks: Vec<Accum> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Accum::default();
            let end = ((c + 1) * CHUNK).min(cfg.n_trials);
            for trial in c * CHUNK..end {
                let out = run_trial(code, cfg, trial, &cache, true)?;
                acc.add(&out, cfg.criterion, cfg.failure_threshold);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = Accum::default();
    for acc in &chunks {
        total.merge(acc);
    }
    let ci = wilson_interval(total.failures, cfg.n_trials);
    Ok(PointSummary {
        config: cfg.clone(),
        histograms: total.histograms,
        clean_skips: total.clean_skips,
        failures: total.failures,
        failure_ci: ci,
    })
}

/// A whole sweep over noise strengths, with the pseudo-threshold estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSummary {
    pub points: Vec<PointSummary>,
    /// Physical rate where the failure fraction crosses the physical rate
    /// itself, from log-log interpolation; absent when no crossing.
    pub pseudothreshold: Option<f64>,
    /// Crossing interval obtained by interpolating the Wilson interval edges
    /// instead of the point estimates.
    pub pseudothreshold_ci: Option<(f64, f64)>,
}

/// Runs one point per noise strength. `make_noise` maps a strength to the
/// noise model (so the same sweep code serves both error models).
pub fn run_sweep(
    code: &dyn QecCode,
    base: &RunConfig,
    strengths: &[f64],
    make_noise: impl Fn(f64) -> NoiseModel,
) -> Result<SweepSummary> {
    let mut points = Vec::with_capacity(strengths.len());
    for &s in strengths {
        let cfg = RunConfig {
            noise: make_noise(s),
            ..base.clone()
        };
        points.push(run_point(code, &cfg)?);
    }
    let curve: Vec<(f64, f64)> = strengths
        .iter()
        .zip(&points)
        .map(|(&s, p)| (s, p.failure_fraction()))
        .collect();
    // A higher failure curve crosses y = x at a higher rate, so the Wilson
    // band maps monotonically onto a crossing interval.
    let lo_curve: Vec<(f64, f64)> = strengths
        .iter()
        .zip(&points)
        .map(|(&s, p)| (s, p.failure_ci.0))
        .collect();
    let hi_curve: Vec<(f64, f64)> = strengths
        .iter()
        .zip(&points)
        .map(|(&s, p)| (s, p.failure_ci.1))
        .collect();
    let ci = match (
        estimate_pseudothreshold(&lo_curve),
        estimate_pseudothreshold(&hi_curve),
    ) {
        (Some(a), Some(b)) => Some((a.min(b), a.max(b))),
        _ => None,
    };
    Ok(SweepSummary {
        points,
        pseudothreshold: estimate_pseudothreshold(&curve),
        pseudothreshold_ci: ci,
    })
}

/// Wilson 95% score interval for `k` successes out of `n`.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054f64;
    let n = n as f64;
    let phat = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Pseudo-threshold: the strength where the failure curve crosses y = x,
/// interpolated linearly in log-log coordinates. Points with nonpositive
/// values are skipped.
pub fn estimate_pseudothreshold(curve: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|&(x, y)| (x.ln(), (y / x).ln()))
        .collect();
    for w in pts.windows(2) {
        let (x0, g0) = w[0];
        let (x1, g1) = w[1];
        if g0 == 0.0 {
            return Some(x0.exp());
        }
        if g0.signum() != g1.signum() {
            let t = g0 / (g0 - g1);
            return Some((x0 + t * (x1 - x0)).exp());
        }
    }
    None
}

/// Result of a least-squares fit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FitResult {
    /// First model parameter (`a`, or the power-law amplitude).
    pub a: f64,
    /// Second model parameter (`b`, or the power-law exponent).
    pub b: f64,
    /// Root-mean-square residual in the fit's linearized coordinates.
    pub rms: f64,
}

/// Fits `y = exp(-a * ln^2(b x))` by quadratic least squares in
/// `(ln x, ln y)`. Points with nonpositive x or y are skipped; needs at
/// least three usable points and a concave quadratic.
pub fn fit_lognormal(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, &y)| x > 0.0 && y > 0.0)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(SimError::Config(
            "lognormal fit needs at least 3 positive points".into(),
        ));
    }
    let (c0, c1, c2) = quadratic_lsq(&pts)?;
    if c2 >= 0.0 {
        return Err(SimError::Config(format!(
            "lognormal fit: quadratic coefficient {c2} not concave"
        )));
    }
    let a = -c2;
    let b = (c1 / (2.0 * c2)).exp();
    let rms = rms_residual(&pts, |l| c0 + c1 * l + c2 * l * l);
    Ok(FitResult { a, b, rms })
}

/// Lognormal fit of a histogram, with its explanatory coverage.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LognormalHistFit {
    pub a: f64,
    pub b: f64,
    pub rms: f64,
    /// Fraction of all recorded trials that sit in interior bins where the
    /// fitted curve is within a factor of two of the observed count.
    pub coverage: f64,
}

/// Fits `count(P) = C exp(-a ln^2(b P))` to the interior log bins of a
/// histogram (point masses excluded) and reports how much of the
/// distribution the fitted shape explains. Needs at least 100 interior
/// counts spread over more than one bin.
pub fn fit_lognormal_hist(hist: &Histogram) -> Result<LognormalHistFit> {
    let interior: u64 = hist.bins.iter().sum();
    let occupied = hist.bins.iter().filter(|&&c| c > 0).count();
    if interior < 100 || occupied < 2 {
        return Err(SimError::Config(format!(
            "lognormal fit needs >= 100 interior counts in >= 2 bins (got {interior} in {occupied})"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &c) in hist.bins.iter().enumerate() {
        if c > 0 {
            xs.push(Histogram::bin_center(i));
            ys.push(c as f64);
        }
    }
    // Fit ln y = c0 + c1 L + c2 L^2; the vertical offset c0 absorbs the
    // normalization, and (a, b) follow from the curvature and peak position.
    let pts: Vec<(f64, f64)> = xs.iter().zip(&ys).map(|(&x, &y)| (x.ln(), y.ln())).collect();
    let (c0, c1, c2) = quadratic_lsq(&pts)?;
    if c2 >= 0.0 {
        return Err(SimError::Config(format!(
            "lognormal fit: quadratic coefficient {c2} not concave"
        )));
    }
    let a = -c2;
    let b = (c1 / (2.0 * c2)).exp();
    let model = |l: f64| c0 + c1 * l + c2 * l * l;
    let rms = rms_residual(&pts, model);
    let mut covered: u64 = 0;
    for (i, &c) in hist.bins.iter().enumerate() {
        if c > 0 {
            let predicted = model(Histogram::bin_center(i).ln()).exp();
            let ratio = predicted / c as f64;
            if (0.5..=2.0).contains(&ratio) {
                covered += c;
            }
        }
    }
    let coverage = if hist.count == 0 {
        0.0
    } else {
        covered as f64 / hist.count as f64
    };
    Ok(LognormalHistFit { a, b, rms, coverage })
}

/// The most populated interior bin's center: the distribution mode for
/// heavy-tailed metrics. Point masses are excluded; returns None when no
/// interior bin is occupied.
pub fn histogram_mode(hist: &Histogram) -> Option<f64> {
    let (idx, count) = hist
        .bins
        .iter()
        .copied()
        .enumerate()
        .max_by_key(|&(_, c)| c)?;
    if count == 0 {
        None
    } else {
        Some(Histogram::bin_center(idx))
    }
}

/// Fits `y = a x^b` by linear least squares in `(ln x, ln y)`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, &y)| x > 0.0 && y > 0.0)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(SimError::Config(
            "power-law fit needs at least 2 positive points".into(),
        ));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return Err(SimError::Config("power-law fit: degenerate x values".into()));
    }
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / n;
    let rms = rms_residual(&pts, |l| intercept + slope * l);
    Ok(FitResult {
        a: intercept.exp(),
        b: slope,
        rms,
    })
}

/// Least-squares quadratic `y = c0 + c1 x + c2 x^2` via normal equations.
fn quadratic_lsq(pts: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    let n = pts.len() as f64;
    let mut s = [0.0f64; 5];
    let mut t = [0.0f64; 3];
    for &(x, y) in pts {
        let mut xp = 1.0;
        for (k, sk) in s.iter_mut().enumerate() {
            if k > 0 {
                xp *= x;
            }
            *sk += xp;
        }
        t[0] += y;
        t[1] += x * y;
        t[2] += x * x * y;
    }
    s[0] = n;
    // Solve the symmetric 3x3 system by Gaussian elimination.
    let mut m = [
        [s[0], s[1], s[2], t[0]],
        [s[1], s[2], s[3], t[1]],
        [s[2], s[3], s[4], t[2]],
    ];
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        if m[pivot][col].abs() < 1e-300 {
            return Err(SimError::Config("quadratic fit: singular system".into()));
        }
        m.swap(col, pivot);
        for row in 0..3 {
            if row == col {
                continue;
            }
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    Ok((m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]))
}

fn rms_residual(pts: &[(f64, f64)], model: impl Fn(f64) -> f64) -> f64 {
    let ss: f64 = pts.iter().map(|&(x, y)| (y - model(x)).powi(2)).sum();
    (ss / pts.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_steane::SteaneCode;
    use approx::assert_abs_diff_eq;

    #[test]
    fn histogram_binning() {
        let mut h = Histogram::default();
        h.record(0.0);
        h.record(1e-13);
        h.record(1.0);
        h.record(1.0 - 1e-10);
        h.record(0.5);
        h.record(1e-12);
        assert_eq!(h.zero, 2);
        assert_eq!(h.one, 2);
        // 0.5: log10 = -0.301 -> idx floor((12 - 0.301) * 5) = 58.
        assert_eq!(h.bins[58], 1);
        // 1e-12 is the lowest finite bin.
        assert_eq!(h.bins[0], 1);
        assert_eq!(h.count, 6);
        // Edges invert the index map.
        assert_abs_diff_eq!(Histogram::bin_lower(0), 1e-12, epsilon = 1e-24);
        assert_abs_diff_eq!(Histogram::bin_lower(60), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn histogram_merge_matches_joint_recording() {
        let values = [0.0, 1e-7, 3e-4, 0.2, 0.9999999999, 1e-13];
        let mut joint = Histogram::default();
        for v in values {
            joint.record(v);
        }
        let mut a = Histogram::default();
        let mut b = Histogram::default();
        for (i, v) in values.iter().enumerate() {
            if i % 2 == 0 {
                a.record(*v);
            } else {
                b.record(*v);
            }
        }
        a.merge(&b);
        assert_eq!(a, joint);
    }

    #[test]
    fn wilson_interval_values() {
        // 0/100: lower edge 0, upper ~ z^2 / (n + z^2) = 0.0370.
        let (lo, hi) = wilson_interval(0, 100);
        assert_abs_diff_eq!(lo, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 0.0370, epsilon = 5e-4);
        // 50/100 is symmetric around 1/2.
        let (lo, hi) = wilson_interval(50, 100);
        assert_abs_diff_eq!((lo + hi) / 2.0, 0.5, epsilon = 1e-12);
        assert!(lo > 0.40 && hi < 0.60);
    }

    #[test]
    fn pseudothreshold_from_quadratic_curve() {
        // p_fail = 200 p^2 crosses y = p at exactly p = 1/200.
        let ps: Vec<f64> = (1..=10).map(|i| 1e-3 * i as f64).collect();
        let curve: Vec<(f64, f64)> = ps.iter().map(|&p| (p, 200.0 * p * p)).collect();
        let t = estimate_pseudothreshold(&curve).unwrap();
        assert_abs_diff_eq!(t, 0.005, epsilon = 1e-12);
    }

    #[test]
    fn pseudothreshold_absent_without_crossing() {
        let curve = [(1e-4, 1e-6), (1e-3, 1e-5)];
        assert!(estimate_pseudothreshold(&curve).is_none());
    }

    #[test]
    fn lognormal_fit_recovers_exact_parameters() {
        let (a, b) = (2.5, 30.0);
        let xs: Vec<f64> = (1..40).map(|i| 10f64.powf(-6.0 + i as f64 * 0.1)).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| (-a * (b * x).ln().powi(2)).exp()).collect();
        let fit = fit_lognormal(&xs, &ys).unwrap();
        assert_abs_diff_eq!(fit.a, a, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.b, b, epsilon = 1e-6);
        assert!(fit.rms < 1e-9);
    }

    #[test]
    fn power_law_fit_recovers_exact_parameters() {
        let xs = [1e-3f64, 2e-3, 5e-3, 1e-2, 2e-2];
        let ys: Vec<f64> = xs.iter().map(|&x| 5.0 * x.powi(4)).collect();
        let fit = fit_power_law(&xs, &ys).unwrap();
        assert_abs_diff_eq!(fit.a, 5.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.b, 4.0, epsilon = 1e-12);
    }

    fn steane_cfg(noise: NoiseModel, n_trials: u64) -> RunConfig {
        RunConfig {
            master_seed: 42,
            n_trials,
            cycles: 1,
            noise,
            input: InputStatePolicy::Fixed {
                theta: 0.7,
                phi: 0.4,
            },
            criterion: FailureCriterion::PFailPsi1,
            failure_threshold: 1e-6,
        }
    }

    #[test]
    fn chain_noiseless_keeps_fidelity() {
        let code = SteaneCode::new();
        let mut cfg = steane_cfg(NoiseModel::None, 0);
        cfg.cycles = 5;
        let cache = BasesCache::build(&code, &cfg.input).unwrap();
        let chain = run_chain(&code, &cfg, 0, &cache).unwrap();
        assert_eq!(chain.len(), 5);
        for c in &chain {
            assert!((c.metrics.fidelity_sq - 1.0).abs() < 1e-10);
        }
        assert_eq!(chain[4].cycle, 5);
    }

    #[test]
    fn chain_pulse_area_residual_stays_bounded() {
        // Coherent residuals must not accumulate over cycles: the median
        // codespace-alignment ratio over cycles 6-10 stays within a factor
        // of two of the median over cycles 1-5.
        let code = SteaneCode::new();
        let mut cfg = steane_cfg(NoiseModel::PulseArea { sigma: 0.005 }, 0);
        cfg.cycles = 10;
        let cache = BasesCache::build(&code, &cfg.input).unwrap();
        let median = |mut v: Vec<f64>| {
            v.sort_by(f64::total_cmp);
            v[v.len() / 2]
        };
        // Median over a few trials to damp single-trial flukes.
        let mut early = Vec::new();
        let mut late = Vec::new();
        for trial in 0..5 {
            let chain = run_chain(&code, &cfg, trial, &cache).unwrap();
            let ratios: Vec<f64> = chain
                .iter()
                .map(|c| c.metrics.ratio.expect("codespace mass present"))
                .collect();
            early.push(median(ratios[..5].to_vec()));
            late.push(median(ratios[5..].to_vec()));
        }
        let (early, late) = (median(early), median(late));
        assert!(
            late >= 0.5 * early,
            "late-cycle ratio {late} collapsed vs early {early}"
        );
    }

    #[test]
    fn lognormal_hist_fit_on_synthetic_counts() {
        // Populate interior bins from the model shape itself.
        let (a, b) = (2.0, 1000.0);
        let mut hist = Histogram::default();
        for i in 20..50 {
            let x = Histogram::bin_center(i);
            let c = (1000.0 * (-a * (b * x).ln().powi(2)).exp()).round() as u64;
            for _ in 0..c {
                hist.record(x);
            }
        }
        let fit = fit_lognormal_hist(&hist).unwrap();
        assert!((fit.a - a).abs() < 0.2, "a = {}", fit.a);
        assert!((fit.b / b).ln().abs() < 0.3, "b = {}", fit.b);
        assert!(fit.coverage > 0.9);
        // Mode sits at x = 1/b.
        let mode = histogram_mode(&hist).unwrap();
        assert!((mode * b).ln().abs() < 0.5, "mode = {mode}");
    }

    #[test]
    fn lognormal_hist_fit_rejects_degenerate() {
        let mut hist = Histogram::default();
        for _ in 0..500 {
            hist.record(1e-6);
        }
        assert!(fit_lognormal_hist(&hist).is_err());
        assert!(fit_lognormal_hist(&Histogram::default()).is_err());
    }

    #[test]
    fn fast_path_agrees_with_full_simulation() {
        let code = SteaneCode::new();
        let cfg = steane_cfg(NoiseModel::StochasticPauli { p: 2e-3 }, 0);
        let cache = BasesCache::build(&code, &cfg.input).unwrap();
        let mut skips = 0;
        for trial in 0..40 {
            let fast = run_trial(&code, &cfg, trial, &cache, true).unwrap();
            let slow = run_trial(&code, &cfg, trial, &cache, false).unwrap();
            if fast.clean_skip {
                skips += 1;
                assert!(slow.metrics.p_fail_psi2 < 1e-12);
                assert!((slow.metrics.fidelity_sq - 1.0).abs() < 1e-12);
            } else {
                assert_eq!(fast.metrics.p_fail_psi1, slow.metrics.p_fail_psi1);
            }
        }
        assert!(skips > 10, "expected mostly clean trials at p = 2e-3");
    }

    #[test]
    fn run_point_is_deterministic() {
        let code = SteaneCode::new();
        let cfg = steane_cfg(NoiseModel::StochasticPauli { p: 5e-3 }, 300);
        let a = run_point(&code, &cfg).unwrap();
        let b = run_point(&code, &cfg).unwrap();
        assert_eq!(a.histograms, b.histograms);
        assert_eq!(a.failures, b.failures);
        assert_eq!(a.clean_skips, b.clean_skips);
        assert_eq!(a.histograms.p_fail_psi1.count, 300);
    }

    #[test]
    fn stabilizer_six_round_robin() {
        let code = SteaneCode::new();
        let mut cfg = steane_cfg(NoiseModel::None, 0);
        cfg.input = InputStatePolicy::StabilizerSix;
        let cache = BasesCache::build(&code, &cfg.input).unwrap();
        for trial in 0..12u64 {
            let out = run_trial(&code, &cfg, trial, &cache, true).unwrap();
            let (theta, phi) = STABILIZER_SIX[(trial % 6) as usize];
            assert_eq!(out.theta, theta);
            assert_eq!(out.phi, phi);
            assert!((out.metrics.fidelity_sq - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn random_policy_is_reproducible_per_trial() {
        let code = SteaneCode::new();
        let mut cfg = steane_cfg(NoiseModel::PulseArea { sigma: 0.02 }, 0);
        cfg.input = InputStatePolicy::Random;
        let cache = BasesCache::build(&code, &cfg.input).unwrap();
        let a = run_trial(&code, &cfg, 7, &cache, true).unwrap();
        let b = run_trial(&code, &cfg, 7, &cache, true).unwrap();
        assert_eq!(a.theta, b.theta);
        assert_eq!(a.metrics.p_fail_psi1, b.metrics.p_fail_psi1);
        let c = run_trial(&code, &cfg, 8, &cache, true).unwrap();
        assert_ne!(a.theta, c.theta);
    }

    #[test]
    fn sweep_runs_and_reports_crossing_shape() {
        let code = SteaneCode::new();
        let cfg = steane_cfg(NoiseModel::None, 60);
        let sweep = run_sweep(&code, &cfg, &[2e-3, 8e-3], |p| {
            NoiseModel::StochasticPauli { p }
        })
        .unwrap();
        assert_eq!(sweep.points.len(), 2);
        // Failure grows with the physical rate.
        assert!(sweep.points[1].mean_p_fail() >= sweep.points[0].mean_p_fail());
    }
}
