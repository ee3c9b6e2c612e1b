//! Time-marching production solver in Riemann-invariant form.
//!
//! The fields a = u_t + u_x and b = u_t - u_x ride the two characteristic
//! families, both forced by the nonlinear source F(u_t, u_x):
//!
//!   (∂_t - ∂_x) a = F,    (∂_t + ∂_x) b = F.
//!
//! At unit CFL the foot of the characteristic through (x_i, t_{n+1}) is the
//! neighboring node, so transport is exact and only the forcing is
//! integrated, with one Heun (predictor-corrector trapezoid) step:
//!
//!   a*(i) = a(i+1, n) + h·F(i+1, n)
//!   a(i, n+1) = a(i+1, n) + h/2·[F(i+1, n) + F*(i)]
//!
//! and mirrored for b, where F*(i) is evaluated on the predicted pair. For
//! the signed plus-model F depends on a alone, making each a-characteristic
//! an independent scalar equation da/dt = |a|^(p-1) a — the march then is a
//! plain Heun integration of that equation along every characteristic.
//!
//! u itself is carried for diagnostics only, by trapezoid integration of
//! u_t = (a + b)/2 in time; the dynamics close on (a, b).

use crate::data::{InitialData, NonlinearityParams};
use crate::duhamel::CharGrid;
use crate::error::Error;

/// Per-level amplitude summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub sup_a: f64,
    pub sup_b: f64,
    pub sup_u: f64,
}

impl TraceRow {
    /// max over nodes of max(|a|, |b|) at this level.
    #[inline]
    pub fn max_amp(&self) -> f64 {
        self.sup_a.max(self.sup_b)
    }
}

/// Current-level fields and the amplitude trace of a march.
#[derive(Debug, Clone)]
pub struct FieldState {
    grid: CharGrid,
    a: Vec<f64>,
    b: Vec<f64>,
    u: Vec<f64>,
    n: usize,
    trace: Vec<TraceRow>,
    // scratch for one step
    a_next: Vec<f64>,
    b_next: Vec<f64>,
    f_cur: Vec<f64>,
}

impl FieldState {
    /// a(x,0) = eps·(g + f'), b(x,0) = eps·(g - f'), u(x,0) = eps·f.
    pub fn new(data: &InitialData, eps: f64, grid: CharGrid) -> Self {
        let nx = grid.nx();
        let mut a = vec![0.0; nx];
        let mut b = vec![0.0; nx];
        let mut u = vec![0.0; nx];
        for i in 0..nx {
            let x = grid.x(i);
            a[i] = eps * data.char_amplitude(crate::data::Sign::Plus, x);
            b[i] = eps * data.char_amplitude(crate::data::Sign::Minus, x);
            u[i] = eps * data.f(x);
        }
        let mut state = Self {
            grid,
            a,
            b,
            u,
            n: 0,
            trace: Vec::with_capacity(grid.n_levels()),
            a_next: vec![0.0; nx],
            b_next: vec![0.0; nx],
            f_cur: vec![0.0; nx],
        };
        state.push_trace();
        state
    }

    #[inline]
    pub fn grid(&self) -> CharGrid {
        self.grid
    }

    /// Current time index.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Current time n·h.
    #[inline]
    pub fn t(&self) -> f64 {
        self.grid.t(self.n)
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// Mutable field access, for perturbation experiments.
    pub fn a_mut(&mut self) -> &mut [f64] {
        &mut self.a
    }

    pub fn b_mut(&mut self) -> &mut [f64] {
        &mut self.b
    }

    pub fn trace(&self) -> &[TraceRow] {
        &self.trace
    }

    /// (t, max(|a|,|b|)) rows, the input to blow-up time estimation.
    pub fn amplitude_series(&self) -> Vec<(f64, f64)> {
        self.trace.iter().map(|r| (r.t, r.max_amp())).collect()
    }

    fn push_trace(&mut self) {
        let (lo, hi) = self.grid.cone_range(self.n);
        let mut sup_a = 0.0f64;
        let mut sup_b = 0.0f64;
        let mut sup_u = 0.0f64;
        for i in lo..=hi {
            sup_a = sup_a.max(self.a[i].abs());
            sup_b = sup_b.max(self.b[i].abs());
            sup_u = sup_u.max(self.u[i].abs());
        }
        self.trace.push(TraceRow {
            t: self.t(),
            sup_a,
            sup_b,
            sup_u,
        });
    }

    /// Column and dominant field of the current amplitude maximum;
    /// `true` means the a-field.
    pub fn argmax_amp(&self) -> (usize, bool) {
        let (lo, hi) = self.grid.cone_range(self.n);
        let mut best = f64::NEG_INFINITY;
        let mut at = lo;
        let mut is_a = true;
        for i in lo..=hi {
            if self.a[i].abs() > best {
                best = self.a[i].abs();
                at = i;
                is_a = true;
            }
            if self.b[i].abs() > best {
                best = self.b[i].abs();
                at = i;
                is_a = false;
            }
        }
        (at, is_a)
    }

    /// One Heun step. Returns the first column where a value left the
    /// finite range, leaving the state untouched in that case.
    pub fn step(&mut self, params: &NonlinearityParams) -> Option<usize> {
        let grid = self.grid;
        assert!(self.n < grid.n_t(), "stepping past the final grid level");
        let nx = grid.nx();
        let h = grid.h();
        let half_h = 0.5 * h;
        let quarter_h = 0.25 * h;
        let np = self.n + 1;

        let full_sweep = params.forces_vacuum();
        let (lo, hi) = if full_sweep {
            (0, nx - 1)
        } else {
            grid.cone_range(np)
        };

        // F on the current level, over one column beyond the update range.
        let flo = lo.saturating_sub(1);
        let fhi = (hi + 1).min(nx - 1);
        for i in flo..=fhi {
            self.f_cur[i] = params.eval_invariants(self.a[i], self.b[i]);
        }

        let mut bad = None;
        for i in lo..=hi {
            let (a_from, fa) = if i + 1 < nx {
                (self.a[i + 1], self.f_cur[i + 1])
            } else {
                (0.0, 0.0)
            };
            let (b_from, fb) = if i > 0 {
                (self.b[i - 1], self.f_cur[i - 1])
            } else {
                (0.0, 0.0)
            };
            let a_star = a_from + h * fa;
            let b_star = b_from + h * fb;
            let f_star = params.eval_invariants(a_star, b_star);
            let na = a_from + half_h * (fa + f_star);
            let nb = b_from + half_h * (fb + f_star);
            if !(na.is_finite() && nb.is_finite()) {
                bad = Some(i);
                break;
            }
            self.a_next[i] = na;
            self.b_next[i] = nb;
        }
        if let Some(i) = bad {
            return Some(i);
        }

        // the predictor values in f_cur are consumed; reuse it to stage the
        // u update so the state stays untouched when a value blows past the
        // finite range
        for i in lo..=hi {
            let nu =
                self.u[i] + quarter_h * (self.a[i] + self.b[i] + self.a_next[i] + self.b_next[i]);
            if !nu.is_finite() {
                return Some(i);
            }
            self.f_cur[i] = nu;
        }
        self.u[lo..=hi].copy_from_slice(&self.f_cur[lo..=hi]);
        self.a[lo..=hi].copy_from_slice(&self.a_next[lo..=hi]);
        self.b[lo..=hi].copy_from_slice(&self.b_next[lo..=hi]);
        self.n = np;
        self.push_trace();
        None
    }
}

/// How a march ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveStatus {
    /// Reached the final time with all amplitudes below the threshold.
    Completed,
    /// max(|a|,|b|) exceeded the threshold. `x0` is the x-intercept of the
    /// offending characteristic (x ± t for the a/b field).
    ThresholdCrossed { t_cross: f64, x_cross: f64, x0: f64 },
    /// A field value left the finite range.
    BlowupDetected { t: f64, x: f64 },
}

/// Final state plus status; the trace lives in the state.
#[derive(Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub state: FieldState,
}

impl SolveResult {
    pub fn trace(&self) -> &[TraceRow] {
        self.state.trace()
    }

    pub fn amplitude_series(&self) -> Vec<(f64, f64)> {
        self.state.amplitude_series()
    }

    pub fn completed(&self) -> bool {
        matches!(self.status, SolveStatus::Completed)
    }
}

/// March until t = T, the amplitude threshold is crossed, or a value blows
/// past the floating-point range.
pub fn solve(
    data: &InitialData,
    params: &NonlinearityParams,
    eps: f64,
    t_final: f64,
    h: f64,
    amp_threshold: f64,
) -> Result<SolveResult, Error> {
    if amp_threshold.is_nan() || amp_threshold <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "amplitude threshold must be positive, got {amp_threshold}"
        )));
    }
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::InvalidParams(format!(
            "amplitude eps must be nonnegative, got {eps}"
        )));
    }
    let grid = CharGrid::new(h, t_final, data.r())?;
    let mut state = FieldState::new(data, eps, grid);

    // data may already exceed the threshold
    if state.trace()[0].max_amp() > amp_threshold {
        let (i, is_a) = state.argmax_amp();
        let status = crossing_status(&state, i, is_a);
        return Ok(SolveResult { status, state });
    }

    while state.n() < grid.n_t() {
        if let Some(i) = state.step(params) {
            let status = SolveStatus::BlowupDetected {
                t: grid.t(state.n() + 1),
                x: grid.x(i),
            };
            return Ok(SolveResult { status, state });
        }
        let row = *state.trace().last().expect("trace is never empty");
        if row.max_amp() > amp_threshold {
            let (i, is_a) = state.argmax_amp();
            let status = crossing_status(&state, i, is_a);
            return Ok(SolveResult { status, state });
        }
    }
    Ok(SolveResult {
        status: SolveStatus::Completed,
        state,
    })
}

fn crossing_status(state: &FieldState, i: usize, is_a: bool) -> SolveStatus {
    let t_cross = state.t();
    let x_cross = state.grid().x(i);
    let x0 = if is_a {
        x_cross + t_cross
    } else {
        x_cross - t_cross
    };
    SolveStatus::ThresholdCrossed {
        t_cross,
        x_cross,
        x0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{InitialData, NonlinearityParams, Sign};
    use approx::assert_relative_eq;

    fn grid(h: f64, t: f64) -> CharGrid {
        CharGrid::new(h, t, 1.0).unwrap()
    }

    #[test]
    fn init_fields() {
        let data = InitialData::bump(1.0, 0.5, 1.0).unwrap();
        let g = grid(1.0 / 16.0, 1.0);
        let eps = 0.3;
        let st = FieldState::new(&data, eps, g);
        for i in 0..g.nx() {
            let x = g.x(i);
            assert_eq!(st.a()[i], eps * (data.f_prime(x) + data.g(x)));
            assert_eq!(st.b()[i], eps * (data.g(x) - data.f_prime(x)));
            assert_eq!(st.u()[i], eps * data.f(x));
        }
        // zero amplitude: all zero
        let st = FieldState::new(&data, 0.0, g);
        assert!(st.a().iter().all(|v| *v == 0.0));
        assert!(st.trace()[0].max_amp() == 0.0);
    }

    #[test]
    fn init_parity_for_even_data() {
        let data = InitialData::bump(1.0, 1.0, 1.0).unwrap();
        let g = grid(1.0 / 8.0, 1.0);
        let st = FieldState::new(&data, 1.0, g);
        let nx = g.nx();
        for i in 0..nx {
            assert_eq!(st.a()[i], st.b()[nx - 1 - i]);
        }
    }

    #[test]
    fn free_transport_is_an_exact_shift() {
        // g = -f' zeroes the a-field, so the plus-model source vanishes and
        // b is shifted one node right per step, exactly.
        let data = InitialData::traveling(1.0, 1.0, Sign::Plus).unwrap();
        let params = NonlinearityParams::special(Sign::Plus, 2.0).unwrap();
        let g = grid(1.0 / 16.0, 2.0);
        let mut st = FieldState::new(&data, 1.0, g);
        let b0 = st.b().to_vec();
        let steps = 20;
        for _ in 0..steps {
            assert_eq!(st.step(&params), None);
        }
        for i in 0..g.nx() {
            let expect = if i >= steps { b0[i - steps] } else { 0.0 };
            assert_eq!(st.b()[i], expect, "column {i}");
            assert_eq!(st.a()[i], 0.0);
        }
    }

    #[test]
    fn traveling_wave_u_second_order() {
        // the same data gives u(x,t) = eps·f(x-t); u is integrated in time
        // by trapezoid, O(h²)
        let data = InitialData::traveling(1.0, 1.0, Sign::Plus).unwrap();
        let params = NonlinearityParams::special(Sign::Plus, 2.0).unwrap();
        let eps = 1.0;
        let err_at = |h: f64| {
            let g = grid(h, 3.0);
            let mut st = FieldState::new(&data, eps, g);
            let mut sup = 0.0f64;
            while st.n() < g.n_t() {
                assert_eq!(st.step(&params), None);
                let t = st.t();
                for i in 0..g.nx() {
                    sup = sup.max((st.u()[i] - eps * data.f(g.x(i) - t)).abs());
                }
            }
            sup
        };
        let e1 = err_at(1.0 / 32.0);
        let e2 = err_at(1.0 / 64.0);
        assert!(
            e1 / e2 > 3.5,
            "u error ratio {} (e1={e1}, e2={e2})",
            e1 / e2
        );
    }

    #[test]
    fn outside_cone_stays_zero() {
        let data = InitialData::bump(1.0, 1.0, 1.0).unwrap();
        let params = NonlinearityParams::general(2.0, 2.0).unwrap();
        let g = grid(1.0 / 8.0, 2.0);
        let mut st = FieldState::new(&data, 0.5, g);
        while st.n() < g.n_t() {
            assert_eq!(st.step(&params), None);
            for i in 0..g.nx() {
                if !g.in_cone(i, st.n()) {
                    assert_eq!(st.a()[i], 0.0);
                    assert_eq!(st.b()[i], 0.0);
                    assert_eq!(st.u()[i], 0.0);
                }
            }
        }
    }

    #[test]
    fn strictly_growing_amplitude_for_positive_special_data() {
        let data = InitialData::bump(0.0, 1.0, 1.0).unwrap();
        let params = NonlinearityParams::special(Sign::Plus, 2.0).unwrap();
        let g = grid(1.0 / 64.0, 0.5);
        let mut st = FieldState::new(&data, 0.5, g);
        let mut prev = st.trace()[0].max_amp();
        while st.n() < g.n_t() {
            assert_eq!(st.step(&params), None);
            let cur = st.trace().last().unwrap().max_amp();
            assert!(cur > prev, "amplitude must grow strictly: {prev} -> {cur}");
            prev = cur;
        }
    }

    #[test]
    fn riemann_decoupling_bitwise() {
        // plus-model: the a-trajectory never reads b
        let data = InitialData::bump(1.0, 1.0, 1.0).unwrap();
        let params = NonlinearityParams::special(Sign::Plus, 3.0).unwrap();
        let g = grid(1.0 / 32.0, 1.0);
        // amplitude small enough that nothing blows up before T
        let mut st1 = FieldState::new(&data, 0.1, g);
        let mut st2 = FieldState::new(&data, 0.1, g);
        // perturb b inside the support
        let c = g.center();
        for (k, off) in [(c, 0.17), (c + 3, -0.55), (c - 7, 0.09)] {
            st2.b_mut()[k] += off;
        }
        while st1.n() < g.n_t() {
            assert_eq!(st1.step(&params), None);
            assert_eq!(st2.step(&params), None);
            assert_eq!(st1.a(), st2.a(), "a-field read the b-field");
        }
    }

    #[test]
    fn solve_completes_on_zero_data() {
        let data = InitialData::bump(1.0, 1.0, 1.0).unwrap();
        let params = NonlinearityParams::general(2.0, 2.0).unwrap();
        let res = solve(&data, &params, 0.0, 1.0, 1.0 / 16.0, 1e6).unwrap();
        assert!(res.completed());
        assert!(res.trace().iter().all(|r| r.max_amp() == 0.0));
    }

    #[test]
    fn solve_rejects_bad_threshold() {
        let data = InitialData::bump(1.0, 1.0, 1.0).unwrap();
        let params = NonlinearityParams::general(2.0, 2.0).unwrap();
        assert!(solve(&data, &params, 0.1, 1.0, 0.125, 0.0).is_err());
    }

    #[test]
    fn threshold_crossing_near_oracle_time() {
        // peak amplitude 1 at x0 = 0, p = 2, eps = 0.25: the critical
        // characteristic blows up at t0 = 4.
        let data = InitialData::bump(0.0, 1.0, 1.0).unwrap();
        let params = NonlinearityParams::special(Sign::Plus, 2.0).unwrap();
        let res = solve(&data, &params, 0.25, 6.0, 1.0 / 256.0, 1e6).unwrap();
        match res.status {
            SolveStatus::ThresholdCrossed { t_cross, x0, .. } => {
                assert_relative_eq!(t_cross, 4.0, max_relative = 0.02);
                assert!(x0.abs() < 0.05, "blow-up characteristic foot {x0}");
            }
            other => panic!("expected threshold crossing, got {other:?}"),
        }
    }

    #[test]
    fn cross_solver_agreement_second_order() {
        // march vs the fixed point of the integral-equation iteration:
        // both are O(h²), and their difference contracts at the same rate
        let data = InitialData::bump(1.0, 1.0, 1.0).unwrap();
        let params = NonlinearityParams::general(2.0, 2.0).unwrap();
        let eps = 0.2;
        let diff_at = |h: f64| {
            let run = crate::picard::run(
                data,
                params,
                eps,
                2.0,
                h,
                &crate::picard::PicardOptions::default(),
            )
            .unwrap();
            assert!(run.converged());
            let g = run.v.grid();
            let mut st = FieldState::new(&data, eps, g);
            let mut sup = 0.0f64;
            while st.n() < g.n_t() {
                assert_eq!(st.step(&params), None);
                let n = st.n();
                for i in 0..g.nx() {
                    let a_fix = run.v.get(i, n) + run.w.get(i, n);
                    let b_fix = run.v.get(i, n) - run.w.get(i, n);
                    sup = sup.max((st.a()[i] - a_fix).abs());
                    sup = sup.max((st.b()[i] - b_fix).abs());
                }
            }
            sup
        };
        let d1 = diff_at(1.0 / 32.0);
        let d2 = diff_at(1.0 / 64.0);
        assert!(
            d1 / d2 > 3.2,
            "expected O(h²) agreement, diffs {d1} / {d2}, ratio {}",
            d1 / d2
        );
    }
}
