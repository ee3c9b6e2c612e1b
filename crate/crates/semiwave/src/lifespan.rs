//! Amplitude sweeps and log-log fits of the lifespan scaling T(eps).
//!
//! Each sweep entry runs the march to its amplitude threshold and converts
//! the trace into a breakdown-time estimate; entries that reach the time
//! cap are censored and excluded from fits. A second method measures the
//! largest horizon for which the integral-equation iteration still
//! converges (a lower-bound proxy, fitted separately — the two methods are
//! never mixed in one fit).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::blowup;
use crate::data::{InitialData, NonlinearityParams};
use crate::error::Error;
use crate::march::{self, SolveStatus};
use crate::picard::{self, PicardOptions};

/// How a breakdown time was measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BreakdownMethod {
    /// March to the amplitude threshold, then fit the trace tail.
    MarchThreshold,
    /// Bisect the largest horizon with a convergent fixed-point iteration.
    PicardBisection,
}

impl fmt::Display for BreakdownMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BreakdownMethod::MarchThreshold => write!(f, "march_fit"),
            BreakdownMethod::PicardBisection => write!(f, "picard_bisect"),
        }
    }
}

/// One sweep entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifespanRecord {
    pub eps: f64,
    /// Observed breakdown time (equals the cap when censored).
    pub t_obs: f64,
    pub method: BreakdownMethod,
    pub h: f64,
    pub threshold: f64,
    /// Reached the time cap without breaking down.
    pub censored: bool,
}

/// Least-squares fit of log T against log eps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Per-point residuals in log T, in record order.
    pub residuals: Vec<f64>,
    pub expected_slope: f64,
    /// Relative tolerance on the slope.
    pub tolerance: f64,
    pub passed: bool,
    pub points: usize,
}

/// Sweep configuration; `t_cap = None` derives a cap of 10x the expected
/// breakdown time at the smallest amplitude.
#[derive(Debug, Clone, Copy)]
pub struct SweepConfig {
    pub h: f64,
    pub t_cap: Option<f64>,
    pub threshold: f64,
    pub method: BreakdownMethod,
    /// Worker threads for independent entries.
    pub jobs: usize,
}

impl SweepConfig {
    pub fn new(h: f64) -> Self {
        Self {
            h,
            t_cap: None,
            threshold: 1e6,
            method: BreakdownMethod::MarchThreshold,
            jobs: 1,
        }
    }
}

/// Default time cap: 10x the expected breakdown time at the smallest
/// amplitude (oracle time for the signed models, the conjectured power law
/// with unit constant otherwise).
pub fn default_t_cap(
    data: &InitialData,
    params: &NonlinearityParams,
    eps_min: f64,
) -> Result<f64, Error> {
    match params.special_sign() {
        Some(sign) => {
            let peak = data.peak_amplitude(sign);
            if peak.degenerate {
                return Err(Error::InfiniteLifespan);
            }
            Ok(10.0 * blowup::exact_blowup_time(peak.m, eps_min, params.p())?)
        }
        None => Ok(10.0 * eps_min.powf(params.expected_lifespan_slope())),
    }
}

/// One breakdown measurement.
fn measure(
    data: &InitialData,
    params: &NonlinearityParams,
    eps: f64,
    t_cap: f64,
    cfg: &SweepConfig,
) -> Result<LifespanRecord, Error> {
    let (t_obs, censored) = match cfg.method {
        BreakdownMethod::MarchThreshold => {
            let res = march::solve(data, params, eps, t_cap, cfg.h, cfg.threshold)?;
            match res.status {
                SolveStatus::Completed => (t_cap, true),
                SolveStatus::ThresholdCrossed { .. } | SolveStatus::BlowupDetected { .. } => {
                    let series = res.amplitude_series();
                    (blowup::estimate_blowup_time(&series, params.p())?, false)
                }
            }
        }
        BreakdownMethod::PicardBisection => {
            picard_breakdown_time(data, params, eps, cfg.h, t_cap, &PicardOptions::default())?
        }
    };
    Ok(LifespanRecord {
        eps,
        t_obs,
        method: cfg.method,
        h: cfg.h,
        threshold: cfg.threshold,
        censored,
    })
}

/// Largest horizon T <= t_cap at which the fixed-point iteration still
/// converges, located by bisection down to a resolution of
/// max(h, 2% of the answer). Returns (T, censored-at-cap). Each probe
/// runs a full iteration, so this is considerably more expensive than
/// the march.
pub fn picard_breakdown_time(
    data: &InitialData,
    params: &NonlinearityParams,
    eps: f64,
    h: f64,
    t_cap: f64,
    opts: &PicardOptions,
) -> Result<(f64, bool), Error> {
    let converges = |t: f64| -> Result<bool, Error> {
        Ok(picard::run(*data, *params, eps, t, h, opts)?.converged())
    };
    if converges(t_cap)? {
        return Ok((t_cap, true));
    }
    // walk down to a convergent horizon
    let mut hi = t_cap;
    let mut lo = 0.5 * t_cap;
    loop {
        if lo < h {
            return Ok((lo.max(h), false));
        }
        if converges(lo)? {
            break;
        }
        hi = lo;
        lo *= 0.5;
    }
    while hi - lo > h.max(0.02 * lo) {
        let mid = 0.5 * (lo + hi);
        if converges(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, false))
}

/// Run one breakdown measurement per amplitude; records come back sorted
/// by eps ascending. Entries are independent and run on up to `cfg.jobs`
/// threads.
pub fn sweep(
    data: &InitialData,
    params: &NonlinearityParams,
    eps_list: &[f64],
    cfg: &SweepConfig,
) -> Result<Vec<LifespanRecord>, Error> {
    if eps_list.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "a sweep needs at least 3 amplitudes, got {}",
            eps_list.len()
        )));
    }
    if eps_list.iter().any(|e| !e.is_finite() || *e <= 0.0) {
        return Err(Error::InvalidParams("amplitudes must be positive".into()));
    }
    let eps_min = eps_list.iter().copied().fold(f64::INFINITY, f64::min);
    let t_cap = match cfg.t_cap {
        Some(t) => t,
        None => default_t_cap(data, params, eps_min)?,
    };
    if !t_cap.is_finite() || t_cap <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "time cap must be positive, got {t_cap}"
        )));
    }

    let jobs = cfg.jobs.max(1).min(eps_list.len());
    let mut records: Vec<Option<Result<LifespanRecord, Error>>> = Vec::new();
    records.resize_with(eps_list.len(), || None);

    if jobs == 1 {
        for (slot, eps) in records.iter_mut().zip(eps_list) {
            *slot = Some(measure(data, params, *eps, t_cap, cfg));
        }
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots: Vec<std::sync::Mutex<Option<Result<LifespanRecord, Error>>>> = records
            .iter_mut()
            .map(|_| std::sync::Mutex::new(None))
            .collect();
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    let k = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if k >= eps_list.len() {
                        break;
                    }
                    let rec = measure(data, params, eps_list[k], t_cap, cfg);
                    *slots[k].lock().unwrap() = Some(rec);
                });
            }
        });
        for (slot, cell) in records.iter_mut().zip(slots) {
            *slot = cell.into_inner().unwrap();
        }
    }

    let mut out = Vec::with_capacity(records.len());
    for rec in records {
        out.push(rec.expect("every slot filled")?);
    }
    out.sort_by(|a, b| a.eps.total_cmp(&b.eps));
    Ok(out)
}

/// Ordinary least squares of log T_obs on log eps over the uncensored
/// records. Needs at least 3 of them, all measured by the same method.
pub fn fit_exponent(
    records: &[LifespanRecord],
    expected_slope: f64,
    tolerance: f64,
) -> Result<FitReport, Error> {
    let used: Vec<&LifespanRecord> = records.iter().filter(|r| !r.censored).collect();
    if used.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 uncensored records, got {}",
            used.len()
        )));
    }
    if used.windows(2).any(|w| w[0].method != w[1].method) {
        return Err(Error::InvalidParams(
            "records from different breakdown methods cannot share a fit".into(),
        ));
    }
    if used.iter().any(|r| r.t_obs <= 0.0) {
        return Err(Error::InvalidParams(
            "breakdown times must be positive".into(),
        ));
    }

    let n = used.len() as f64;
    let xs: Vec<f64> = used.iter().map(|r| r.eps.ln()).collect();
    let ys: Vec<f64> = used.iter().map(|r| r.t_obs.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - xbar) * (x - xbar);
        sxy += (x - xbar) * (y - ybar);
        syy += (y - ybar) * (y - ybar);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData(
            "all records share one amplitude".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let residuals: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (intercept + slope * x))
        .collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let r_squared = if syy == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / syy
    };
    let passed = (slope - expected_slope).abs() <= tolerance * expected_slope.abs();
    Ok(FitReport {
        slope,
        intercept,
        r_squared,
        residuals,
        expected_slope,
        tolerance,
        passed,
        points: used.len(),
    })
}
