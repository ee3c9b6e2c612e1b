//! Closed-form blow-up oracle for the signed models and the numerical
//! blow-up time estimator.
//!
//! Along the characteristic with foot x0, the driving invariant solves the
//! scalar equation U' = |U|^(p-1) U with U(0) = M·eps, M = ±f'(x0) + g(x0).
//! For M > 0 the solution is
//!
//!   U(t) = {(M eps)^(1-p) - (p-1) t}^(-1/(p-1)),
//!
//! which diverges at t0 = (M eps)^(1-p)/(p-1); M < 0 mirrors to -U. The
//! transform U -> U^(1-p) is therefore exactly affine in t, which the
//! estimator exploits: it fits a line to amp^(1-p) over the trace tail and
//! returns the fitted zero crossing.

use serde::{Deserialize, Serialize};

use crate::data::{InitialData, Sign};
use crate::error::Error;

/// Closed-form solution of the characteristic equation for one foot point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupOracle {
    m: f64,
    eps: f64,
    p: f64,
}

impl BlowupOracle {
    /// Requires p > 1, eps > 0 and M != 0 (a vanishing amplitude means the
    /// characteristic never blows up, reported as [`Error::InfiniteLifespan`]).
    /// The sign of M only mirrors the solution, so |M| drives the time.
    pub fn new(m: f64, eps: f64, p: f64) -> Result<Self, Error> {
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::InvalidParams(format!(
                "blow-up oracle needs p > 1, got p={p}"
            )));
        }
        if !eps.is_finite() || eps <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "blow-up oracle needs eps > 0, got eps={eps}"
            )));
        }
        if !m.is_finite() {
            return Err(Error::InvalidParams(format!(
                "amplitude M={m} is not finite"
            )));
        }
        if m == 0.0 {
            return Err(Error::InfiniteLifespan);
        }
        Ok(Self { m, eps, p })
    }

    /// Exact blow-up time (|M| eps)^(1-p) / (p-1).
    pub fn t0(&self) -> f64 {
        (self.m.abs() * self.eps).powf(1.0 - self.p) / (self.p - 1.0)
    }

    /// U(t) for 0 <= t < t0, with the sign of M restored.
    pub fn amplitude(&self, t: f64) -> Result<f64, Error> {
        if !t.is_finite() || t < 0.0 || t >= self.t0() {
            return Err(Error::InvalidParams(format!(
                "time {t} outside [0, t0 = {})",
                self.t0()
            )));
        }
        let base = (self.m.abs() * self.eps).powf(1.0 - self.p) - (self.p - 1.0) * t;
        Ok(self.m.signum() * base.powf(-1.0 / (self.p - 1.0)))
    }
}

/// Convenience wrapper for [`BlowupOracle::t0`].
pub fn exact_blowup_time(m: f64, eps: f64, p: f64) -> Result<f64, Error> {
    BlowupOracle::new(m, eps, p).map(|o| o.t0())
}

/// Minimum of the trace amplitude relative to its start for a point to
/// enter the fit window.
const TAIL_FACTOR: f64 = 10.0;

/// Estimate the blow-up time from an amplitude trace (t, amp) by a
/// least-squares line through amp^(1-p) on the tail where
/// amp >= 10·amp(0); returns the fitted zero crossing.
///
/// Fails when the trace never leaves its initial level (no blow-up
/// signal), when the tail is not strictly increasing, or when it is too
/// short to fit.
pub fn estimate_blowup_time(trace: &[(f64, f64)], p: f64) -> Result<f64, Error> {
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::InvalidParams(format!(
            "estimator needs p > 1, got p={p}"
        )));
    }
    let Some(&(_, amp0)) = trace.first() else {
        return Err(Error::EstimationFailed("empty trace".into()));
    };
    if !amp0.is_finite() || amp0 <= 0.0 {
        return Err(Error::EstimationFailed(format!(
            "initial amplitude {amp0} carries no signal"
        )));
    }
    let cutoff = TAIL_FACTOR * amp0;
    let tail: Vec<(f64, f64)> = trace
        .iter()
        .copied()
        .filter(|(t, a)| t.is_finite() && a.is_finite() && *a >= cutoff)
        .collect();
    if tail.len() < 3 {
        return Err(Error::EstimationFailed(format!(
            "only {} trace points reach {TAIL_FACTOR}x the initial amplitude",
            tail.len()
        )));
    }
    for w in tail.windows(2) {
        if w[1].1 <= w[0].1 {
            return Err(Error::EstimationFailed(format!(
                "tail is not strictly increasing near t={}",
                w[1].0
            )));
        }
    }

    // least squares on y = amp^(1-p) against t
    let n = tail.len() as f64;
    let (mut st, mut sy) = (0.0, 0.0);
    for (t, a) in &tail {
        st += t;
        sy += a.powf(1.0 - p);
    }
    let (tbar, ybar) = (st / n, sy / n);
    let (mut stt, mut sty) = (0.0, 0.0);
    for (t, a) in &tail {
        let dt = t - tbar;
        stt += dt * dt;
        sty += dt * (a.powf(1.0 - p) - ybar);
    }
    if stt == 0.0 {
        return Err(Error::EstimationFailed("tail spans a single time".into()));
    }
    let slope = sty / stt;
    if slope >= 0.0 {
        return Err(Error::EstimationFailed(format!(
            "transformed amplitude does not decay (slope {slope})"
        )));
    }
    Ok(tbar - ybar / slope)
}

/// One sample of the per-characteristic blow-up time relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x0: f64,
    pub m: f64,
    pub t0: f64,
}

/// Sample (x0, t0(x0)) on [-R, R]. Feet with |M(x0)| below the degenerate
/// threshold do not blow up and are omitted.
pub fn blowup_curve(
    data: &InitialData,
    sign: Sign,
    eps: f64,
    p: f64,
    n_samples: usize,
) -> Result<Vec<CurvePoint>, Error> {
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::InvalidParams(format!(
            "blow-up curve needs p > 1, got p={p}"
        )));
    }
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "blow-up curve needs eps > 0, got eps={eps}"
        )));
    }
    if n_samples < 2 {
        return Err(Error::InvalidParams("need at least two samples".into()));
    }
    let r = data.r();
    let step = 2.0 * r / (n_samples - 1) as f64;
    let mut out = Vec::new();
    for k in 0..n_samples {
        let x0 = -r + k as f64 * step;
        let m = data.char_amplitude(sign, x0);
        match BlowupOracle::new(m, eps, p) {
            Ok(oracle) => out.push(CurvePoint {
                x0,
                m,
                t0: oracle.t0(),
            }),
            Err(Error::InfiniteLifespan) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn oracle_times_by_direct_evaluation() {
        assert_relative_eq!(
            exact_blowup_time(1.0, 0.1, 3.0).unwrap(),
            50.0,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            exact_blowup_time(2.0, 1.0, 2.0).unwrap(),
            0.5,
            max_relative = 1e-14
        );
        // mirrored data blows up at the same time
        assert_eq!(
            exact_blowup_time(-1.0, 0.1, 3.0).unwrap(),
            exact_blowup_time(1.0, 0.1, 3.0).unwrap()
        );
    }

    #[test]
    fn oracle_rejects_bad_params() {
        assert!(matches!(
            exact_blowup_time(0.0, 0.1, 2.0),
            Err(Error::InfiniteLifespan)
        ));
        assert!(exact_blowup_time(1.0, 0.1, 1.0).is_err());
        assert!(exact_blowup_time(1.0, 0.1, 0.5).is_err());
        assert!(exact_blowup_time(1.0, 0.0, 2.0).is_err());
        assert!(exact_blowup_time(1.0, -0.5, 2.0).is_err());
    }

    #[test]
    fn amplitude_profile() {
        let o = BlowupOracle::new(1.0, 1.0, 2.0).unwrap();
        assert_relative_eq!(o.amplitude(0.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(o.amplitude(0.5).unwrap(), 2.0, max_relative = 1e-14);
        assert!(o.amplitude(1.0).is_err()); // t0 = 1

        // diverges monotonically toward t0
        let mut prev = 0.0;
        for k in 1..100 {
            let t = 0.99 * k as f64 / 100.0;
            let u = o.amplitude(t).unwrap();
            assert!(u > prev);
            prev = u;
        }

        // sign of M is restored
        let o = BlowupOracle::new(-0.5, 1.0, 2.0).unwrap();
        assert!(o.amplitude(0.3).unwrap() < 0.0);
        assert_relative_eq!(o.amplitude(0.0).unwrap(), -0.5, max_relative = 1e-14);
    }

    #[test]
    fn amplitude_satisfies_the_characteristic_equation() {
        // centered differences of U against |U|^(p-1) U, O(h²)
        for p in [1.5, 2.0, 3.0] {
            let o = BlowupOracle::new(1.0, 0.5, p).unwrap();
            let t = 0.5 * o.t0();
            let err = |h: f64| {
                let fd = (o.amplitude(t + h).unwrap() - o.amplitude(t - h).unwrap()) / (2.0 * h);
                let u = o.amplitude(t).unwrap();
                (fd - u.abs().powf(p - 1.0) * u).abs()
            };
            let (e1, e2) = (err(1e-4 * o.t0()), err(5e-5 * o.t0()));
            assert!(e1 / e2 > 3.5, "p={p}: ratio {}", e1 / e2);
        }
    }

    #[test]
    fn estimator_inverts_the_closed_form() {
        for p in [1.5, 2.0, 3.0] {
            let o = BlowupOracle::new(1.0, 0.5, p).unwrap();
            let t0 = o.t0();
            let mut trace = Vec::new();
            let n = 4000;
            for k in 0..n {
                let t = t0 * k as f64 / n as f64;
                trace.push((t, o.amplitude(t).unwrap().abs()));
            }
            let est = estimate_blowup_time(&trace, p).unwrap();
            assert_relative_eq!(est, t0, max_relative = 1e-8);
        }
    }

    #[test]
    fn estimator_failure_modes() {
        // constant trace: no signal
        let flat: Vec<(f64, f64)> = (0..100).map(|k| (k as f64, 1.0)).collect();
        assert!(matches!(
            estimate_blowup_time(&flat, 2.0),
            Err(Error::EstimationFailed(_))
        ));
        // non-monotone tail
        let mut wiggly: Vec<(f64, f64)> = (0..100).map(|k| (k as f64, (k + 1) as f64)).collect();
        wiggly[80].1 = wiggly[79].1;
        assert!(matches!(
            estimate_blowup_time(&wiggly, 2.0),
            Err(Error::EstimationFailed(_))
        ));
        // zero initial amplitude
        let dead = vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)];
        assert!(estimate_blowup_time(&dead, 2.0).is_err());
        // p out of range
        assert!(estimate_blowup_time(&flat, 1.0).is_err());
    }

    #[test]
    fn curve_for_pure_g_bump() {
        let data = InitialData::bump(0.0, 1.0, 1.0).unwrap();
        let curve = blowup_curve(&data, Sign::Plus, 0.5, 2.0, 257).unwrap();
        assert!(!curve.is_empty());
        // minimum over the curve sits at x0 = 0 where M peaks at 1
        let min = curve.iter().min_by(|a, b| a.t0.total_cmp(&b.t0)).unwrap();
        assert_eq!(min.x0, 0.0);
        assert_relative_eq!(
            min.t0,
            exact_blowup_time(1.0, 0.5, 2.0).unwrap(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn curve_empty_for_cancelling_data() {
        let data = InitialData::traveling(1.0, 1.0, Sign::Plus).unwrap();
        let curve = blowup_curve(&data, Sign::Plus, 0.5, 2.0, 129).unwrap();
        assert!(curve.is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// t0(lambda·eps) = lambda^(1-p)·t0(eps) up to rounding.
        #[test]
        fn prop_scaling(
            m in 0.05f64..5.0,
            eps in 0.01f64..2.0,
            lambda in 0.1f64..10.0,
            p in 1.1f64..4.0,
        ) {
            let t_scaled = exact_blowup_time(m, lambda * eps, p).unwrap();
            let t_base = exact_blowup_time(m, eps, p).unwrap();
            let expect = lambda.powf(1.0 - p) * t_base;
            prop_assert!((t_scaled - expect).abs() <= 1e-12 * expect.abs());
        }

        /// t0 is strictly decreasing in |M| and in eps.
        #[test]
        fn prop_monotonicity(
            m in 0.05f64..5.0,
            eps in 0.01f64..2.0,
            p in 1.1f64..4.0,
            bump in 1.001f64..4.0,
        ) {
            let base = exact_blowup_time(m, eps, p).unwrap();
            prop_assert!(exact_blowup_time(m * bump, eps, p).unwrap() < base);
            prop_assert!(exact_blowup_time(m, eps * bump, p).unwrap() < base);
        }
    }
}
