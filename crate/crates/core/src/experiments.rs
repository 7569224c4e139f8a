//! Seeded Monte Carlo studies.
//!
//! Each trial draws from its own stream `stream(master_seed, cell_key(cell,
//! trial))`, and results are merged by index, so any [`Executor`] gives the
//! same record.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::cert::{estimate_sup, EstimatorParams, PureState};
use crate::ensembles::{sample_haar, EnsembleSpec};
use crate::error::{Error, Result};
use crate::rng::{cell_key, stream};
use crate::{math, MAX_DIM, MAX_KRAUS};

/// Runs independent indexed tasks and returns their results in index order.
pub trait Executor {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs tasks one after another on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Sample standard deviation over `sqrt(n)`; zero for fewer than two values.
pub fn standard_error(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    math::sqrt(var / n as f64)
}

/// Ordinary least squares fit of `y = intercept + slope x`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

/// `None` with fewer than two points or no spread in `x`.
pub fn ols(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let mx = mean(&x[..n]);
    let my = mean(&y[..n]);
    let sxx: f64 = x[..n].iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x[..n].iter().zip(&y[..n]).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
        points: n,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub standard_error: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        Self {
            count: xs.len(),
            mean: mean(xs),
            median: median(xs),
            standard_error: standard_error(xs),
        }
    }
}

// ---------------------------------------------------------------------------
// Scaling scan

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalingParams {
    pub ensemble: String,
    pub d_list: Vec<usize>,
    pub n_list: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    pub estimator: EstimatorParams,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalingTrial {
    pub d: usize,
    pub n: usize,
    pub trial: usize,
    /// `M-hat`, the estimated `sup ||Phi(rho) - Id/d||_inf`.
    pub estimate: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalingCell {
    pub d: usize,
    pub n: usize,
    /// Set when the cell was not run.
    pub skipped: Option<String>,
    pub deterministic: bool,
    pub summary: Option<Summary>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalingFit {
    pub d: usize,
    /// Fit of `ln(mean M-hat)` against `ln N`; `None` with fewer than two
    /// usable cells.
    pub fit: Option<LinearFit>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalingRecord {
    pub params: ScalingParams,
    pub cells: Vec<ScalingCell>,
    pub trials: Vec<ScalingTrial>,
    pub fits: Vec<ScalingFit>,
}

impl ScalingRecord {
    pub fn cell(&self, d: usize, n: usize) -> Option<&ScalingCell> {
        self.cells.iter().find(|c| c.d == d && c.n == n)
    }

    pub fn fit(&self, d: usize) -> Option<LinearFit> {
        self.fits.iter().find(|f| f.d == d).and_then(|f| f.fit)
    }
}

/// For every `(d, N)` cell and trial: build a channel and record
/// `estimate_sup`. Cells outside the caps, or that the ensemble cannot
/// produce, are kept with a skip marker. A full-family ensemble yields one
/// deterministic trial per cell and needs `N` equal to the family size.
pub fn run_scaling_scan<E: Executor>(
    spec: &EnsembleSpec,
    d_list: &[usize],
    n_list: &[usize],
    trials: usize,
    master_seed: u64,
    estimator: EstimatorParams,
    executor: &E,
) -> Result<ScalingRecord> {
    if trials == 0 {
        return Err(Error::param("trials", "must be positive"));
    }
    if d_list.is_empty() || n_list.is_empty() {
        return Err(Error::InvalidInput("empty d or N list".into()));
    }
    let params = ScalingParams {
        ensemble: spec.descriptor(),
        d_list: d_list.to_vec(),
        n_list: n_list.to_vec(),
        trials,
        master_seed,
        estimator,
    };

    struct Plan {
        d: usize,
        n: usize,
        cell: usize,
        trials: usize,
        source: Option<crate::ensembles::ChannelSource>,
        skipped: Option<String>,
    }

    let mut plans = Vec::new();
    for (di, &d) in d_list.iter().enumerate() {
        for (ni, &n) in n_list.iter().enumerate() {
            let cell = di * n_list.len() + ni;
            let mut plan = Plan {
                d,
                n,
                cell,
                trials: 0,
                source: None,
                skipped: None,
            };
            if d == 0 || d > MAX_DIM {
                plan.skipped = Some(format!("d = {d} is outside 1..={MAX_DIM}"));
            } else if n == 0 || n > MAX_KRAUS {
                plan.skipped = Some(format!("N = {n} is outside 1..={MAX_KRAUS}"));
            } else {
                match spec.instantiate(d) {
                    Err(e) => plan.skipped = Some(format!("{e}")),
                    Ok(source) => match &source {
                        crate::ensembles::ChannelSource::FullFamily(f) if f.len() != n => {
                            plan.skipped = Some(format!("the full family has {} elements, not N = {n}", f.len()));
                        }
                        _ => {
                            plan.trials = if source.is_deterministic() { 1 } else { trials };
                            plan.source = Some(source);
                        }
                    },
                }
            }
            plans.push(plan);
        }
    }

    let tasks: Vec<(usize, usize)> = plans
        .iter()
        .enumerate()
        .flat_map(|(p, plan)| (0..plan.trials).map(move |t| (p, t)))
        .collect();

    let results = executor.map(tasks.len(), |i| -> Result<ScalingTrial> {
        let (p, trial) = tasks[i];
        let plan = &plans[p];
        let source = plan.source.as_ref().expect("planned cell");
        let mut rng = stream(master_seed, cell_key(plan.cell, trial));
        let channel = source.build_channel(plan.n, &mut rng)?;
        let est = estimate_sup(&channel, estimator, &mut rng)?;
        Ok(ScalingTrial {
            d: plan.d,
            n: plan.n,
            trial,
            estimate: est.value,
            converged: est.converged,
        })
    });
    let trials_out: Vec<ScalingTrial> = results.into_iter().collect::<Result<_>>()?;

    let cells: Vec<ScalingCell> = plans
        .iter()
        .map(|plan| {
            let values: Vec<f64> = trials_out
                .iter()
                .filter(|t| t.d == plan.d && t.n == plan.n)
                .map(|t| t.estimate)
                .collect();
            ScalingCell {
                d: plan.d,
                n: plan.n,
                skipped: plan.skipped.clone(),
                deterministic: plan.source.as_ref().is_some_and(|s| s.is_deterministic()),
                summary: (!values.is_empty()).then(|| Summary::of(&values)),
            }
        })
        .collect();

    let mut fits = Vec::new();
    for &d in d_list {
        let (x, y): (Vec<f64>, Vec<f64>) = cells
            .iter()
            .filter(|c| c.d == d)
            .filter_map(|c| c.summary.filter(|s| s.mean > 0.0).map(|s| (math::ln(c.n as f64), math::ln(s.mean))))
            .unzip();
        if fits.iter().all(|f: &ScalingFit| f.d != d) {
            fits.push(ScalingFit { d, fit: ols(&x, &y) });
        }
    }

    Ok(ScalingRecord {
        params,
        cells,
        trials: trials_out,
        fits,
    })
}

// ---------------------------------------------------------------------------
// Coupon collector

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CouponParams {
    pub d: usize,
    pub trials: usize,
    pub master_seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CouponRecord {
    pub params: CouponParams,
    /// Draws needed in each trial, indexed by trial.
    pub draws: Vec<u64>,
    pub summary: Summary,
    /// `d H_d`.
    pub analytic_mean: f64,
}

/// `d (1 + 1/2 + ... + 1/d)`.
pub fn coupon_expectation(d: usize) -> f64 {
    d as f64 * (1..=d).map(|k| 1.0 / k as f64).sum::<f64>()
}

/// Residue class of a Fourier–Weyl index: `B^j A^k` sends the Fourier
/// vector `x_0` to `x_j`, and the family is indexed as `j d + k`.
pub fn fourier_image_class(index: usize, d: usize) -> usize {
    index / d
}

/// Draws uniform Fourier–Weyl elements until `Phi(P_{x_0})` reaches full
/// rank, i.e. until every image class `j` has been hit.
pub fn coupon_trial<R: Rng + ?Sized>(d: usize, rng: &mut R) -> u64 {
    let mut seen = vec![false; d];
    let mut missing = d;
    let mut draws = 0u64;
    while missing > 0 {
        let idx = rng.random_range(0..d * d);
        draws += 1;
        let j = fourier_image_class(idx, d);
        if !seen[j] {
            seen[j] = true;
            missing -= 1;
        }
    }
    draws
}

pub fn run_coupon<E: Executor>(d: usize, trials: usize, master_seed: u64, executor: &E) -> Result<CouponRecord> {
    if !(2..=MAX_DIM).contains(&d) {
        return Err(Error::param("d", format!("must lie in 2..={MAX_DIM}, got {d}")));
    }
    if trials == 0 {
        return Err(Error::param("trials", "must be positive"));
    }
    let draws = executor.map(trials, |t| coupon_trial(d, &mut stream(master_seed, cell_key(0, t))));
    let values: Vec<f64> = draws.iter().map(|&x| x as f64).collect();
    Ok(CouponRecord {
        params: CouponParams { d, trials, master_seed },
        draws,
        summary: Summary::of(&values),
        analytic_mean: coupon_expectation(d),
    })
}

// ---------------------------------------------------------------------------
// Concentration

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConcentrationParams {
    pub d: usize,
    pub n_list: Vec<usize>,
    pub delta: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub phi: PureState,
    pub psi: PureState,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConcentrationTrial {
    pub n: usize,
    pub trial: usize,
    /// `(1/N) sum_i |<psi|U_i|phi>|^2`.
    pub statistic: f64,
    /// `|statistic - 1/d| >= delta/d`.
    pub failed: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConcentrationCell {
    pub n: usize,
    pub trials: usize,
    pub failures: usize,
    pub frequency: f64,
    /// Binomial standard error `sqrt(f (1 - f) / trials)`.
    pub standard_error: f64,
    /// No failures observed; the frequency is only bounded by `1/trials`
    /// and the cell is left out of the fit.
    pub censored: bool,
    pub upper_bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConcentrationRecord {
    pub params: ConcentrationParams,
    pub cells: Vec<ConcentrationCell>,
    pub trials: Vec<ConcentrationTrial>,
    /// Fit of `ln(frequency)` against `N` over uncensored cells.
    pub fit: Option<LinearFit>,
}

impl ConcentrationRecord {
    /// Whether frequencies never increase along `n_list` by more than
    /// `k` combined standard errors.
    pub fn non_increasing_within(&self, k: f64) -> bool {
        self.cells.windows(2).all(|w| {
            let slack = k * math::sqrt(w[0].standard_error * w[0].standard_error + w[1].standard_error * w[1].standard_error);
            w[1].frequency <= w[0].frequency + slack
        })
    }
}

/// `run_concentration` with `phi = psi = e_0`.
pub fn run_concentration<E: Executor>(
    d: usize,
    n_list: &[usize],
    delta: f64,
    trials: usize,
    master_seed: u64,
    executor: &E,
) -> Result<ConcentrationRecord> {
    let e0 = PureState::basis(d.max(1), 0)?;
    run_concentration_with(d, n_list, delta, trials, master_seed, e0.clone(), e0, executor)
}

/// For every `N` and trial: draw `N` Haar unitaries and flag
/// `|(1/N) sum_i tr(U_i phi U_i^dagger psi) - 1/d| >= delta/d`.
#[allow(clippy::too_many_arguments)]
pub fn run_concentration_with<E: Executor>(
    d: usize,
    n_list: &[usize],
    delta: f64,
    trials: usize,
    master_seed: u64,
    phi: PureState,
    psi: PureState,
    executor: &E,
) -> Result<ConcentrationRecord> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    if d == 0 || d > MAX_DIM {
        return Err(Error::param("d", format!("must lie in 1..={MAX_DIM}, got {d}")));
    }
    if phi.dim() != d || psi.dim() != d {
        return Err(Error::InvalidInput("phi and psi must live in C^d".into()));
    }
    if trials == 0 || n_list.is_empty() {
        return Err(Error::param("trials", "need at least one trial and one N"));
    }
    if let Some(&n) = n_list.iter().find(|&&n| n == 0 || n > MAX_KRAUS) {
        return Err(Error::param("n", format!("N = {n} is outside 1..={MAX_KRAUS}")));
    }

    let target = 1.0 / d as f64;
    let tol = delta / d as f64;
    let tasks = n_list.len() * trials;
    let results = executor.map(tasks, |i| -> Result<ConcentrationTrial> {
        let (cell, trial) = (i / trials, i % trials);
        let n = n_list[cell];
        let mut rng = stream(master_seed, cell_key(cell, trial));
        let mut total = 0.0;
        for _ in 0..n {
            let u = sample_haar(d, &mut rng)?;
            total += u.sandwich(psi.vector(), phi.vector()).norm_sqr();
        }
        let statistic = total / n as f64;
        Ok(ConcentrationTrial {
            n,
            trial,
            statistic,
            failed: (statistic - target).abs() >= tol,
        })
    });
    let trials_out: Vec<ConcentrationTrial> = results.into_iter().collect::<Result<_>>()?;

    let cells: Vec<ConcentrationCell> = n_list
        .iter()
        .enumerate()
        .map(|(cell, &n)| {
            let slice = &trials_out[cell * trials..(cell + 1) * trials];
            let failures = slice.iter().filter(|t| t.failed).count();
            let f = failures as f64 / trials as f64;
            ConcentrationCell {
                n,
                trials,
                failures,
                frequency: f,
                standard_error: math::sqrt(f * (1.0 - f) / trials as f64),
                censored: failures == 0,
                upper_bound: (failures == 0).then(|| 1.0 / trials as f64),
            }
        })
        .collect();

    let (x, y): (Vec<f64>, Vec<f64>) = cells
        .iter()
        .filter(|c| !c.censored)
        .map(|c| (c.n as f64, math::ln(c.frequency)))
        .unzip();

    Ok(ConcentrationRecord {
        params: ConcentrationParams {
            d,
            n_list: n_list.to_vec(),
            delta,
            trials,
            master_seed,
            phi,
            psi,
        },
        cells,
        trials: trials_out,
        fit: ols(&x, &y),
    })
}

/// Any of the three experiment records.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", content = "data", rename_all = "snake_case"))]
pub enum ExperimentRecord {
    Scaling(ScalingRecord),
    Coupon(CouponRecord),
    Concentration(ConcentrationRecord),
}

impl ExperimentRecord {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Scaling(_) => "scaling",
            Self::Coupon(_) => "coupon",
            Self::Concentration(_) => "concentration",
        }
    }

    pub fn trial_count(&self) -> usize {
        match self {
            Self::Scaling(r) => r.trials.len(),
            Self::Coupon(r) => r.draws.len(),
            Self::Concentration(r) => r.trials.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{fourier_basis_vector, fourier_weyl_family};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    #[test]
    fn stats_basics() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(standard_error(&[1.0]), 0.0);
        assert_abs_diff_eq!(standard_error(&[1.0, 3.0]), 1.0, epsilon = 1e-15);
        let f = ols(&[1.0, 2.0, 3.0], &[1.0, 3.0, 5.0]).unwrap();
        assert_abs_diff_eq!(f.slope, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.intercept, -1.0, epsilon = 1e-14);
        assert!(ols(&[1.0], &[1.0]).is_none());
        assert!(ols(&[1.0, 1.0], &[1.0, 2.0]).is_none());
    }

    #[test]
    fn fourier_images_follow_first_index() {
        let d = 5;
        let family = fourier_weyl_family(d).unwrap();
        let x0 = fourier_basis_vector(d, 0);
        for (idx, u) in family.iter().enumerate() {
            let img = u.mul_vec(&x0);
            let xj = fourier_basis_vector(d, fourier_image_class(idx, d));
            let overlap: Complex64 = xj.iter().zip(&img).map(|(a, b)| a.conj() * b).sum();
            assert_abs_diff_eq!(overlap.norm_sqr(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn coupon_small_d() {
        assert_abs_diff_eq!(coupon_expectation(2), 3.0, epsilon = 1e-15);
        let r = run_coupon(2, 20000, 1, &Sequential).unwrap();
        assert!((r.summary.mean - 3.0).abs() < 0.1);
        assert!(r.draws.iter().all(|&x| x >= 2));
        let again = run_coupon(2, 20000, 1, &Sequential).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn single_unitary_scan() {
        let r = run_scaling_scan(
            &EnsembleSpec::Haar,
            &[2, 3],
            &[1],
            3,
            5,
            EstimatorParams::default(),
            &Sequential,
        )
        .unwrap();
        for d in [2, 3] {
            let m = r.cell(d, 1).unwrap().summary.unwrap().mean;
            assert_abs_diff_eq!(m, 1.0 - 1.0 / d as f64, epsilon = 1e-6);
        }
    }

    #[test]
    fn scan_marks_skipped_cells() {
        let spec = EnsembleSpec::Fourier { full_family: true };
        let r = run_scaling_scan(&spec, &[3, 100], &[9, 5], 4, 0, EstimatorParams::default(), &Sequential).unwrap();
        let ok = r.cell(3, 9).unwrap();
        assert!(ok.deterministic && ok.skipped.is_none());
        assert_eq!(ok.summary.unwrap().count, 1);
        assert!(ok.summary.unwrap().mean <= 1e-10);
        assert!(r.cell(3, 5).unwrap().skipped.is_some());
        assert!(r.cell(100, 9).unwrap().skipped.is_some());
        assert_eq!(r.trials.len(), 1);
    }

    #[test]
    fn concentration_large_delta_never_fails() {
        let r = run_concentration(4, &[400], 0.99, 50, 2, &Sequential).unwrap();
        assert_eq!(r.cells[0].failures, 0);
        assert!(r.cells[0].censored);
        assert_eq!(r.cells[0].upper_bound, Some(1.0 / 50.0));
        assert!(r.fit.is_none());
        assert!(run_concentration(4, &[10], 1.0, 5, 2, &Sequential).is_err());
    }
}
