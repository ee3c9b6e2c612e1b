//! Effective run configuration: defaults, then the key=value config file,
//! then command-line flags, in increasing precedence.

use std::fs;

use serde::Serialize;

use semiwave::lifespan::BreakdownMethod;
use semiwave::{InitialData, NonlinearityParams, Sign};

use crate::{CliArgs, CliError};

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub model: String,
    pub p: f64,
    pub q: f64,
    pub eps: f64,
    pub eps_list: Vec<f64>,
    pub family: String,
    pub amp_f: f64,
    pub amp_g: f64,
    pub r: f64,
    pub h: f64,
    /// Final time / time cap; `None` lets each command derive one.
    pub t: Option<f64>,
    /// `None` uses the solver default 1e-10·max(eps, 1).
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub threshold: f64,
    pub out: Option<String>,
    pub jobs: usize,
    pub seed: u64,
    /// Explicit characteristic amplitude for the oracle command.
    pub m: Option<f64>,
    /// Breakdown measurement for sweeps: march | picard.
    pub method: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: "general".into(),
            p: 2.0,
            q: 2.0,
            eps: 0.1,
            eps_list: vec![0.4, 0.2, 0.1, 0.05],
            family: "bump".into(),
            amp_f: 1.0,
            amp_g: 1.0,
            r: 1.0,
            h: 1.0 / 64.0,
            t: None,
            tol: None,
            max_iter: 200,
            threshold: 1e6,
            out: None,
            jobs: 1,
            seed: 42,
            m: None,
            method: "march".into(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, val: &str) -> Result<T, CliError> {
    val.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("cannot parse {key}={val}")))
}

impl RunConfig {
    /// Defaults, overlaid by the config file, overlaid by flags.
    pub fn resolve(args: &CliArgs) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &args.config {
            cfg.apply_file(path)?;
        }
        cfg.apply_flags(args);
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_file(&mut self, path: &str) -> Result<(), CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {path}: {e}")))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, val)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "{path}:{}: expected key=value, got {line:?}",
                    lineno + 1
                )));
            };
            let key = key.trim();
            match key {
                "model" => self.model = val.trim().to_string(),
                "family" => self.family = val.trim().to_string(),
                "p" => self.p = parse(key, val)?,
                "q" => self.q = parse(key, val)?,
                "eps" => self.eps = parse(key, val)?,
                "eps_list" => {
                    self.eps_list = val
                        .split(',')
                        .map(|s| parse("eps_list", s))
                        .collect::<Result<_, _>>()?
                }
                "amp_f" => self.amp_f = parse(key, val)?,
                "amp_g" => self.amp_g = parse(key, val)?,
                "R" | "r" => self.r = parse(key, val)?,
                "h" => self.h = parse(key, val)?,
                "T" | "t" => self.t = Some(parse(key, val)?),
                "tol" => self.tol = Some(parse(key, val)?),
                "max_iter" => self.max_iter = parse(key, val)?,
                "threshold" => self.threshold = parse(key, val)?,
                "out" => self.out = Some(val.trim().to_string()),
                "jobs" => self.jobs = parse(key, val)?,
                "seed" => self.seed = parse(key, val)?,
                "m" | "M" => self.m = Some(parse(key, val)?),
                "method" => self.method = val.trim().to_string(),
                other => {
                    return Err(CliError::Config(format!(
                        "{path}:{}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(())
    }

    fn apply_flags(&mut self, args: &CliArgs) {
        macro_rules! take {
            ($field:ident) => {
                if let Some(v) = &args.$field {
                    self.$field = v.clone();
                }
            };
        }
        take!(model);
        take!(family);
        take!(eps_list);
        if let Some(v) = args.p {
            self.p = v;
        }
        if let Some(v) = args.q {
            self.q = v;
        }
        if let Some(v) = args.eps {
            self.eps = v;
        }
        if let Some(v) = args.amp_f {
            self.amp_f = v;
        }
        if let Some(v) = args.amp_g {
            self.amp_g = v;
        }
        if let Some(v) = args.r {
            self.r = v;
        }
        if let Some(v) = args.h {
            self.h = v;
        }
        if let Some(v) = args.t {
            self.t = Some(v);
        }
        if let Some(v) = args.tol {
            self.tol = Some(v);
        }
        if let Some(v) = args.max_iter {
            self.max_iter = v;
        }
        if let Some(v) = args.threshold {
            self.threshold = v;
        }
        if let Some(v) = &args.out {
            self.out = Some(v.clone());
        }
        if let Some(v) = args.jobs {
            self.jobs = v;
        }
        if let Some(v) = args.seed {
            self.seed = v;
        }
        if let Some(v) = args.m {
            self.m = Some(v);
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.h.is_nan() || self.h <= 0.0 || !self.h.is_finite() {
            return Err(CliError::Config(format!(
                "h must be positive, got {}",
                self.h
            )));
        }
        if let Some(t) = self.t {
            if t.is_nan() || t <= 0.0 || !t.is_finite() {
                return Err(CliError::Config(format!("T must be positive, got {t}")));
            }
        }
        if self.eps.is_nan() || self.eps < 0.0 || !self.eps.is_finite() {
            return Err(CliError::Config(format!(
                "eps must be nonnegative, got {}",
                self.eps
            )));
        }
        if self.jobs == 0 {
            return Err(CliError::Config("jobs must be at least 1".into()));
        }
        // data and model construction double as validation
        self.initial_data()?;
        self.params()?;
        self.method()?;
        Ok(())
    }

    pub fn method(&self) -> Result<BreakdownMethod, CliError> {
        match self.method.as_str() {
            "march" => Ok(BreakdownMethod::MarchThreshold),
            "picard" => Ok(BreakdownMethod::PicardBisection),
            other => Err(CliError::Config(format!(
                "unknown method {other:?} (expected march or picard)"
            ))),
        }
    }

    pub fn initial_data(&self) -> Result<InitialData, CliError> {
        let data = match self.family.as_str() {
            "bump" => InitialData::bump(self.amp_f, self.amp_g, self.r),
            "traveling+" => InitialData::traveling(self.amp_f, self.r, Sign::Plus),
            "traveling-" => InitialData::traveling(self.amp_f, self.r, Sign::Minus),
            other => {
                return Err(CliError::Config(format!(
                    "unknown family {other:?} (expected bump, traveling+ or traveling-)"
                )))
            }
        };
        data.map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn params(&self) -> Result<NonlinearityParams, CliError> {
        let params = match self.model.as_str() {
            "general" => NonlinearityParams::general(self.p, self.q),
            "special+" => NonlinearityParams::special(Sign::Plus, self.p),
            "special-" => NonlinearityParams::special(Sign::Minus, self.p),
            other => {
                return Err(CliError::Config(format!(
                    "unknown model {other:?} (expected general, special+ or special-)"
                )))
            }
        };
        params.map_err(|e| CliError::Config(e.to_string()))
    }

    /// Flat key=value lines mirroring the config-file syntax, embedded at
    /// the top of every output file.
    pub fn header_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("model={}", self.model),
            format!("p={}", fmt_f64(self.p)),
            format!("q={}", fmt_f64(self.q)),
            format!("eps={}", fmt_f64(self.eps)),
            format!(
                "eps_list={}",
                self.eps_list
                    .iter()
                    .map(|e| fmt_f64(*e))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            format!("family={}", self.family),
            format!("amp_f={}", fmt_f64(self.amp_f)),
            format!("amp_g={}", fmt_f64(self.amp_g)),
            format!("R={}", fmt_f64(self.r)),
            format!("h={}", fmt_f64(self.h)),
        ];
        if let Some(t) = self.t {
            lines.push(format!("T={}", fmt_f64(t)));
        }
        if let Some(tol) = self.tol {
            lines.push(format!("tol={}", fmt_f64(tol)));
        }
        lines.push(format!("max_iter={}", self.max_iter));
        lines.push(format!("threshold={}", fmt_f64(self.threshold)));
        lines.push(format!("jobs={}", self.jobs));
        lines.push(format!("seed={}", self.seed));
        lines.push(format!("method={}", self.method));
        if let Some(m) = self.m {
            lines.push(format!("m={}", fmt_f64(m)));
        }
        lines
    }
}

/// 17 significant digits: enough for exact f64 round-trips.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
