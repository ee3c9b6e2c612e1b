//! One function per subcommand. Each prints a one-line summary to stdout,
//! writes machine-readable files when --out is given, and maps outcomes to
//! the exit-code contract (0 ok, 1 numerical, 2 config, 3 I/O).

use serde::Serialize;

use semiwave::lifespan::{self, FitReport, SweepConfig};
use semiwave::picard::{self, PicardOptions, PicardOutcome};
use semiwave::selftest::{self, SelftestConfig};
use semiwave::{blowup, march, Error, Variant};

use crate::config::RunConfig;
use crate::output::{fmt_f64, sibling, write_csv, write_json};
use crate::CliError;

pub fn cmd_selftest(cfg: &RunConfig) -> Result<(), CliError> {
    let st_cfg = SelftestConfig {
        h: cfg.h,
        t_final: cfg.t.unwrap_or(2.0 * cfg.r),
        r: cfg.r,
        seed: cfg.seed,
        n_random: 100,
    };
    let checks = selftest::run_all(&st_cfg)?;
    let failures: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
    for c in &checks {
        println!(
            "{} {:<28} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    println!(
        "selftest: {}/{} checks passed (seed {})",
        checks.len() - failures.len(),
        checks.len(),
        cfg.seed
    );
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "{} selftest check(s) failed",
            failures.len()
        )))
    }
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<(), CliError> {
    let data = cfg.initial_data()?;
    let params = cfg.params()?;
    let t_final = cfg.t.unwrap_or(4.0 * cfg.r);
    let res = march::solve(&data, &params, cfg.eps, t_final, cfg.h, cfg.threshold)?;

    if let Some(out) = &cfg.out {
        write_csv(
            out,
            cfg,
            "t,sup_a,sup_b,sup_u",
            res.trace().iter().map(|r| {
                format!(
                    "{},{},{},{}",
                    fmt_f64(r.t),
                    fmt_f64(r.sup_a),
                    fmt_f64(r.sup_b),
                    fmt_f64(r.sup_u)
                )
            }),
        )?;
    }

    let last = res.trace().last().expect("trace is never empty");
    match res.status {
        march::SolveStatus::Completed => {
            println!(
                "solve: completed t={} sup_a={} sup_b={} sup_u={}",
                fmt_f64(last.t),
                fmt_f64(last.sup_a),
                fmt_f64(last.sup_b),
                fmt_f64(last.sup_u)
            );
            Ok(())
        }
        march::SolveStatus::ThresholdCrossed { t_cross, x0, .. } => {
            println!(
                "solve: threshold_crossed t={} x0={}",
                fmt_f64(t_cross),
                fmt_f64(x0)
            );
            Err(CliError::Numerical(format!(
                "amplitude crossed {} at t={t_cross}",
                cfg.threshold
            )))
        }
        march::SolveStatus::BlowupDetected { t, x } => {
            println!("solve: blowup_detected t={} x={}", fmt_f64(t), fmt_f64(x));
            Err(CliError::Numerical(format!(
                "non-finite field value at t={t}, x={x}"
            )))
        }
    }
}

#[derive(Serialize)]
struct PicardReport<'a> {
    config: &'a RunConfig,
    outcome: String,
    converged: bool,
    iterations: usize,
    final_residual: Option<f64>,
    x_norm: f64,
    sup_v: f64,
    sup_w: f64,
    residuals: &'a [f64],
}

pub fn cmd_picard(cfg: &RunConfig) -> Result<(), CliError> {
    let data = cfg.initial_data()?;
    let params = cfg.params()?;
    let t_final = cfg.t.unwrap_or(4.0 * cfg.r);
    let opts = PicardOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        track_derivatives: false,
    };
    let run = picard::run(data, params, cfg.eps, t_final, cfg.h, &opts)?;

    let outcome = match run.outcome {
        PicardOutcome::Converged => "converged".to_string(),
        PicardOutcome::NotConverged => "not_converged".to_string(),
        PicardOutcome::BlowupIndicated { i, n } => {
            format!("blowup_indicated(i={i},n={n})")
        }
    };
    if let Some(out) = &cfg.out {
        write_json(
            out,
            &PicardReport {
                config: cfg,
                outcome: outcome.clone(),
                converged: run.converged(),
                iterations: run.iterations,
                final_residual: run.residuals.last().copied(),
                x_norm: run.x_norm,
                sup_v: run.v.sup_norm(),
                sup_w: run.w.sup_norm(),
                residuals: &run.residuals,
            },
        )?;
    }
    println!(
        "picard: {outcome} iterations={} residual={} x_norm={}",
        run.iterations,
        run.residuals
            .last()
            .map(|r| fmt_f64(*r))
            .unwrap_or_else(|| "-".into()),
        fmt_f64(run.x_norm)
    );
    if run.converged() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "iteration ended {outcome} after {} iterates",
            run.iterations
        )))
    }
}

pub fn cmd_blowup(cfg: &RunConfig) -> Result<(), CliError> {
    let data = cfg.initial_data()?;
    let params = cfg.params()?;
    let Some(sign) = params.special_sign() else {
        return Err(CliError::Config(
            "the blowup command needs a signed model (special+ or special-); \
             use sweep for exploratory product-model runs"
                .into(),
        ));
    };

    let peak = data.peak_amplitude(sign);
    if peak.degenerate {
        return Err(CliError::Numerical(
            "characteristic amplitude vanishes identically; no blow-up expected".into(),
        ));
    }
    let oracle_t0 = blowup::exact_blowup_time(peak.m, cfg.eps, params.p())?;
    let t_final = cfg.t.unwrap_or(1.25 * oracle_t0);

    if let Some(out) = &cfg.out {
        let curve = blowup::blowup_curve(&data, sign, cfg.eps, params.p(), 513)?;
        write_csv(
            out,
            cfg,
            "x0,M,t0",
            curve
                .iter()
                .map(|c| format!("{},{},{}", fmt_f64(c.x0), fmt_f64(c.m), fmt_f64(c.t0))),
        )?;
    }

    let res = march::solve(&data, &params, cfg.eps, t_final, cfg.h, cfg.threshold)?;
    if res.completed() {
        println!(
            "blowup: no_crossing T={} oracle_t0={}",
            fmt_f64(t_final),
            fmt_f64(oracle_t0)
        );
        return Err(CliError::Numerical(format!(
            "no threshold crossing up to T={t_final} although t0={oracle_t0}"
        )));
    }
    let estimate = blowup::estimate_blowup_time(&res.amplitude_series(), params.p())?;
    let rel = (estimate - oracle_t0).abs() / oracle_t0;
    println!(
        "blowup: estimated={} oracle={} rel_err={} m_star={} x_star={}",
        fmt_f64(estimate),
        fmt_f64(oracle_t0),
        fmt_f64(rel),
        fmt_f64(peak.m),
        fmt_f64(peak.x)
    );
    Ok(())
}

#[derive(Serialize)]
struct SweepReport<'a> {
    config: &'a RunConfig,
    method: String,
    exploratory: bool,
    fit: &'a FitReport,
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let data = cfg.initial_data()?;
    let params = cfg.params()?;
    let sweep_cfg = SweepConfig {
        h: cfg.h,
        t_cap: cfg.t,
        threshold: cfg.threshold,
        method: cfg.method()?,
        jobs: cfg.jobs,
    };
    let records = lifespan::sweep(&data, &params, &cfg.eps_list, &sweep_cfg)?;

    if let Some(out) = &cfg.out {
        write_csv(
            out,
            cfg,
            "eps,T_obs,method,h,threshold,censored",
            records.iter().map(|r| {
                format!(
                    "{},{},{},{},{},{}",
                    fmt_f64(r.eps),
                    fmt_f64(r.t_obs),
                    r.method,
                    fmt_f64(r.h),
                    fmt_f64(r.threshold),
                    r.censored
                )
            }),
        )?;
    }

    let expected = params.expected_lifespan_slope();
    let fit = lifespan::fit_exponent(&records, expected, 0.05).map_err(|e| match e {
        Error::InsufficientData(m) => {
            CliError::Numerical(format!("sweep produced too few usable records: {m}"))
        }
        other => CliError::from(other),
    })?;
    let exploratory = matches!(params.variant(), Variant::GeneralProduct);
    if let Some(out) = &cfg.out {
        write_json(
            &sibling(out, "fit.json"),
            &SweepReport {
                config: cfg,
                method: sweep_cfg.method.to_string(),
                exploratory,
                fit: &fit,
            },
        )?;
    }

    let label = if exploratory { " (exploratory)" } else { "" };
    println!(
        "sweep: slope={} expected={} r2={} points={} passed={}{label}",
        fmt_f64(fit.slope),
        fmt_f64(fit.expected_slope),
        fmt_f64(fit.r_squared),
        fit.points,
        fit.passed
    );
    if exploratory || fit.passed {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "fitted slope {} outside {}% of expected {}",
            fit.slope,
            fit.tolerance * 100.0,
            fit.expected_slope
        )))
    }
}

#[derive(Serialize)]
struct OracleReport<'a> {
    config: &'a RunConfig,
    m: f64,
    t0: Option<f64>,
}

pub fn cmd_oracle(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.params()?;
    let m = match cfg.m {
        Some(m) => m,
        None => {
            let data = cfg.initial_data()?;
            let Some(sign) = params.special_sign() else {
                return Err(CliError::Config(
                    "the oracle needs an explicit --m with the general model".into(),
                ));
            };
            data.peak_amplitude(sign).m
        }
    };
    match blowup::exact_blowup_time(m, cfg.eps, params.p()) {
        Ok(t0) => {
            if let Some(out) = &cfg.out {
                write_json(
                    out,
                    &OracleReport {
                        config: cfg,
                        m,
                        t0: Some(t0),
                    },
                )?;
            }
            println!(
                "oracle: t0={} m={} eps={} p={}",
                fmt_f64(t0),
                fmt_f64(m),
                fmt_f64(cfg.eps),
                fmt_f64(params.p())
            );
            Ok(())
        }
        Err(Error::InfiniteLifespan) => {
            if let Some(out) = &cfg.out {
                write_json(
                    out,
                    &OracleReport {
                        config: cfg,
                        m,
                        t0: None,
                    },
                )?;
            }
            println!("oracle: t0=inf m={} (no blow-up)", fmt_f64(m));
            Ok(())
        }
        Err(e) => Err(e.into()),
    }
}
