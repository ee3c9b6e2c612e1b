//! Successive substitution for the coupled integral equations of
//! (u_t, u_x) on the characteristic grid.
//!
//! With v ~ u_t and w ~ u_x, the iteration is
//!
//!   v_{j+1} = eps·u⁰_t + integral_dt(F(v_j, w_j)),   v_1 = eps·u⁰_t,
//!   w_{j+1} = eps·u⁰_x + integral_dx(F(v_j, w_j)),   w_1 = eps·u⁰_x,
//!
//! where F is the nonlinear source. At the fixed point, u reconstructed as
//! eps·u⁰ + integral(F(v, w)) has v and w as its discrete time and space
//! derivatives up to the scheme order.
//!
//! [`PicardState::iterate_once`] applies one substitution in place with a
//! level-streamed sweep (two persistent space-time fields plus O(nx)
//! buffers); it computes node for node exactly what the composed public
//! operators would, which `fused_sweep_matches_operator_path` asserts
//! bitwise. Sweeps touch only the light cone unless the source is nonzero
//! on vanishing fields (p = q = 0).

use crate::data::{InitialData, NonlinearityParams};
use crate::duhamel::{self, CharGrid, GridFn};
use crate::error::Error;
use crate::freewave::FreeWave;

/// Tolerance, iteration cap and optional derivative-field tracking.
#[derive(Debug, Clone, Copy)]
pub struct PicardOptions {
    /// Residual tolerance; `None` uses 1e-10·max(eps, 1).
    pub tol: Option<f64>,
    pub max_iter: usize,
    /// Also iterate the spatial derivative fields (v_x, w_x). Only
    /// available for the general product model; costs five extra
    /// space-time arrays.
    pub track_derivatives: bool,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: None,
            max_iter: 200,
            track_derivatives: false,
        }
    }
}

impl PicardOptions {
    pub fn tolerance(&self, eps: f64) -> f64 {
        self.tol.unwrap_or(1e-10 * eps.max(1.0))
    }
}

/// Nodewise source field F(v, w). Errors on non-finite input values.
pub fn source(v: &GridFn, w: &GridFn, params: &NonlinearityParams) -> Result<GridFn, Error> {
    assert_eq!(v.grid(), w.grid(), "fields live on different grids");
    let grid = v.grid();
    let nx = grid.nx();
    let mut out = GridFn::zeros(grid);
    for (k, ((fv, vv), wv)) in out
        .values_mut()
        .iter_mut()
        .zip(v.values())
        .zip(w.values())
        .enumerate()
    {
        if !(vv.is_finite() && wv.is_finite()) {
            return Err(Error::NonFiniteInput {
                i: k % nx,
                n: k / nx,
            });
        }
        *fv = params.eval(*vv, *wv);
    }
    Ok(out)
}

/// One in-place substitution step. `Done` carries the residual
/// sup|Δv| + sup|Δw|; `NonFinite` reports the first node (sweep order:
/// level, then column) where the update left the finite range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IterateOutcome {
    Done { residual: f64 },
    NonFinite { i: usize, n: usize },
}

#[derive(Debug, Clone)]
pub struct PicardState {
    grid: CharGrid,
    data: InitialData,
    params: NonlinearityParams,
    eps: f64,
    pub v: GridFn,
    pub w: GridFn,
    pub vx: Option<GridFn>,
    pub wx: Option<GridFn>,
    j: usize,
    residuals: Vec<f64>,
}

impl PicardState {
    /// First iterate: (v, w) = eps·(u⁰_t, u⁰_x) sampled on the grid, and
    /// when tracked, (v_x, w_x) = eps·(u⁰_tx, u⁰_xx).
    pub fn new(
        data: InitialData,
        params: NonlinearityParams,
        eps: f64,
        grid: CharGrid,
        track_derivatives: bool,
    ) -> Self {
        let fw = FreeWave::new(data, eps);
        let v = GridFn::from_fn(grid, |x, t| eps * fw.ut(x, t));
        let w = GridFn::from_fn(grid, |x, t| eps * fw.ux(x, t));
        let (vx, wx) = if track_derivatives {
            (
                Some(GridFn::from_fn(grid, |x, t| eps * fw.utx(x, t))),
                Some(GridFn::from_fn(grid, |x, t| eps * fw.uxx(x, t))),
            )
        } else {
            (None, None)
        };
        Self {
            grid,
            data,
            params,
            eps,
            v,
            w,
            vx,
            wx,
            j: 1,
            residuals: Vec::new(),
        }
    }

    #[inline]
    pub fn grid(&self) -> CharGrid {
        self.grid
    }

    #[inline]
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn params(&self) -> &NonlinearityParams {
        &self.params
    }

    pub fn data(&self) -> &InitialData {
        &self.data
    }

    /// Iterate counter j (starts at 1).
    #[inline]
    pub fn iteration(&self) -> usize {
        self.j
    }

    /// Residual history r_j = sup|v_{j+1}-v_j| + sup|w_{j+1}-w_j|.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Replace (v, w) by the next iterate.
    pub fn iterate_once(&mut self) -> IterateOutcome {
        let grid = self.grid;
        let nx = grid.nx();
        let half_h = 0.5 * grid.h();
        let fw = FreeWave::new(self.data, self.eps);
        let full_sweep = self.params.forces_vacuum();

        let range = |n: usize| -> (usize, usize) {
            if full_sweep {
                (0, nx - 1)
            } else {
                grid.cone_range(n)
            }
        };

        // Rolling level buffers. Entries outside every written range stay
        // zero, and ranges only grow, so stale reads cannot occur.
        let mut f_prev = vec![0.0; nx];
        let mut f_cur = vec![0.0; nx];
        let mut p_prev = vec![0.0; nx];
        let mut p_cur = vec![0.0; nx];
        let mut q_prev = vec![0.0; nx];
        let mut q_cur = vec![0.0; nx];

        {
            let (lo, hi) = range(0);
            let v0 = self.v.level(0);
            let w0 = self.w.level(0);
            for i in lo..=hi {
                f_prev[i] = self.params.eval(v0[i], w0[i]);
            }
        }

        let mut res_v = 0.0f64;
        let mut res_w = 0.0f64;
        for n in 0..grid.n_t() {
            let np = n + 1;
            let t = grid.t(np);
            let (lo, hi) = range(np);
            {
                let v_np = self.v.level(np);
                let w_np = self.w.level(np);
                for i in lo..=hi {
                    let f = self.params.eval(v_np[i], w_np[i]);
                    if !f.is_finite() {
                        return IterateOutcome::NonFinite { i, n: np };
                    }
                    f_cur[i] = f;
                }
            }
            for i in lo..=hi {
                let ip = (i + 1).min(nx - 1);
                let im = i.saturating_sub(1);
                p_cur[i] = p_prev[ip] + half_h * (f_prev[ip] + f_cur[i]);
                q_cur[i] = q_prev[im] + half_h * (f_prev[im] + f_cur[i]);
            }
            let v_np = self.v.level_mut(np);
            for i in lo..=hi {
                let nv = self.eps * fw.ut(grid.x(i), t) + 0.5 * (p_cur[i] + q_cur[i]);
                if !nv.is_finite() {
                    return IterateOutcome::NonFinite { i, n: np };
                }
                res_v = res_v.max((nv - v_np[i]).abs());
                v_np[i] = nv;
            }
            let w_np = self.w.level_mut(np);
            for i in lo..=hi {
                let nw = self.eps * fw.ux(grid.x(i), t) + 0.5 * (p_cur[i] - q_cur[i]);
                if !nw.is_finite() {
                    return IterateOutcome::NonFinite { i, n: np };
                }
                res_w = res_w.max((nw - w_np[i]).abs());
                w_np[i] = nw;
            }
            std::mem::swap(&mut f_prev, &mut f_cur);
            std::mem::swap(&mut p_prev, &mut p_cur);
            std::mem::swap(&mut q_prev, &mut q_cur);
        }

        self.j += 1;
        let residual = res_v + res_w;
        self.residuals.push(residual);
        IterateOutcome::Done { residual }
    }

    /// Advance the derivative fields one substitution using the current
    /// (v, w, v_x, w_x). Call before [`iterate_once`](Self::iterate_once)
    /// so both updates read the same iterate.
    ///
    /// The derivative source is the x-derivative of |v|^p |w|^q by the
    /// chain rule: p|v|^(p-2) v v_x |w|^q + q|w|^(q-2) w w_x |v|^p.
    pub fn iterate_once_deriv(&mut self) -> Result<(), Error> {
        let (p, q) = (self.params.p(), self.params.q());
        if self.params.is_special() || p <= 1.0 || (q != 0.0 && q <= 1.0) {
            return Err(Error::InvalidParams(
                "derivative iteration needs the general product model with p > 1 and q > 1 or q = 0"
                    .into(),
            ));
        }
        let (Some(vx), Some(wx)) = (&self.vx, &self.wx) else {
            return Err(Error::InvalidParams(
                "derivative fields are not tracked; enable track_derivatives".into(),
            ));
        };

        let mut d = GridFn::zeros(self.grid);
        for (((dv, (v, w)), x1), x2) in d
            .values_mut()
            .iter_mut()
            .zip(self.v.values().iter().zip(self.w.values()))
            .zip(vx.values())
            .zip(wx.values())
        {
            let vterm = p * v.signum() * v.abs().powf(p - 1.0) * x1 * pow_abs_q(*w, q);
            let wterm = if q == 0.0 {
                0.0
            } else {
                q * w.signum() * w.abs().powf(q - 1.0) * x2 * pow_abs_q(*v, p)
            };
            *dv = vterm + wterm;
        }

        let fw = FreeWave::new(self.data, self.eps);
        let eps = self.eps;
        let lp = duhamel::integral_dt(&d);
        let lb = duhamel::integral_dx(&d);
        let free_tx = GridFn::from_fn(self.grid, |x, t| eps * fw.utx(x, t));
        let free_xx = GridFn::from_fn(self.grid, |x, t| eps * fw.uxx(x, t));
        self.vx = Some(free_tx.linear_comb(1.0, &lp, 1.0));
        self.wx = Some(free_xx.linear_comb(1.0, &lb, 1.0));
        Ok(())
    }
}

#[inline]
fn pow_abs_q(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        x.abs().powf(e)
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PicardOutcome {
    /// Residual fell at or below the tolerance.
    Converged,
    /// Iteration budget exhausted with finite fields.
    NotConverged,
    /// The update produced NaN or infinity; first offending node attached.
    BlowupIndicated { i: usize, n: usize },
}

/// The final iterate, its history, and the norm
/// sup|v| + sup|v_x| + sup|w| + sup|w_x| (derivative norms from centered
/// differences when the derivative fields were not tracked).
#[derive(Debug, Clone)]
pub struct PicardRun {
    pub outcome: PicardOutcome,
    pub v: GridFn,
    pub w: GridFn,
    pub vx: Option<GridFn>,
    pub wx: Option<GridFn>,
    /// Final iterate counter j.
    pub iterations: usize,
    pub residuals: Vec<f64>,
    pub x_norm: f64,
    data: InitialData,
    params: NonlinearityParams,
    eps: f64,
}

impl PicardRun {
    pub fn converged(&self) -> bool {
        self.outcome == PicardOutcome::Converged
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn params(&self) -> &NonlinearityParams {
        &self.params
    }

    pub fn data(&self) -> &InitialData {
        &self.data
    }

    /// u = eps·u⁰ + integral(F(v, w)), streamed so only the output array is
    /// allocated. Meaningful for converged runs.
    pub fn reconstruct_u(&self) -> GridFn {
        let grid = self.v.grid();
        let nx = grid.nx();
        let h2 = grid.h() * grid.h();
        let fw = FreeWave::new(self.data, self.eps);
        let full_sweep = self.params.forces_vacuum();
        let range = |n: usize| -> (usize, usize) {
            if full_sweep {
                (0, nx - 1)
            } else {
                grid.cone_range(n)
            }
        };

        let mut u = GridFn::zeros(grid);
        let mut f_level = vec![0.0; nx];
        if grid.n_t() >= 1 {
            let (lo, hi) = range(0);
            let v0 = self.v.level(0);
            let w0 = self.w.level(0);
            for i in lo..=hi {
                u.values_mut()[nx + i] = 0.5 * h2 * self.params.eval(v0[i], w0[i]);
            }
            for n in 1..grid.n_t() {
                let (lo, hi) = range(n);
                let vn = self.v.level(n);
                let wn = self.w.level(n);
                for i in lo..=hi {
                    f_level[i] = self.params.eval(vn[i], wn[i]);
                }
                let prev = (n - 1) * nx;
                let base = n * nx;
                let next = base + nx;
                let vals = u.values_mut();
                for i in lo..=hi {
                    let ip = (i + 1).min(nx - 1);
                    let im = i.saturating_sub(1);
                    vals[next + i] =
                        vals[base + ip] + vals[base + im] - vals[prev + i] + h2 * f_level[i];
                }
            }
        }
        // add the free part
        let eps = self.eps;
        for n in 0..grid.n_levels() {
            let t = grid.t(n);
            let base = n * nx;
            let vals = u.values_mut();
            for i in 0..nx {
                vals[base + i] += eps * fw.u(grid.x(i), t);
            }
        }
        u
    }
}

/// Iterate to the fixed point on a fresh grid covering [0, T].
pub fn run(
    data: InitialData,
    params: NonlinearityParams,
    eps: f64,
    t_final: f64,
    h: f64,
    opts: &PicardOptions,
) -> Result<PicardRun, Error> {
    let grid = CharGrid::new(h, t_final, data.r())?;
    run_on_grid(data, params, eps, grid, opts)
}

/// Largest space-time field the iteration will allocate (two persistent
/// fields of this size, three when reconstructing u).
pub const MAX_FIELD_NODES: u128 = 1 << 28;

/// Iterate to the fixed point on an existing grid.
pub fn run_on_grid(
    data: InitialData,
    params: NonlinearityParams,
    eps: f64,
    grid: CharGrid,
    opts: &PicardOptions,
) -> Result<PicardRun, Error> {
    if grid.nodes() > MAX_FIELD_NODES {
        return Err(Error::Grid(format!(
            "fixed-point fields would need {} nodes (> {MAX_FIELD_NODES}); shrink T or increase h",
            grid.nodes()
        )));
    }
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::InvalidParams(format!(
            "amplitude eps must be nonnegative, got {eps}"
        )));
    }
    if opts.max_iter == 0 {
        return Err(Error::InvalidParams("max_iter must be at least 1".into()));
    }
    let tol = opts.tolerance(eps);
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "tolerance must be positive, got {tol}"
        )));
    }

    let mut state = PicardState::new(data, params, eps, grid, opts.track_derivatives);
    let mut outcome = PicardOutcome::NotConverged;
    for _ in 0..opts.max_iter {
        if opts.track_derivatives {
            state.iterate_once_deriv()?;
        }
        match state.iterate_once() {
            IterateOutcome::Done { residual } => {
                if residual <= tol {
                    outcome = PicardOutcome::Converged;
                    break;
                }
            }
            IterateOutcome::NonFinite { i, n } => {
                outcome = PicardOutcome::BlowupIndicated { i, n };
                break;
            }
        }
    }

    let x_norm = x_norm_of(&state);
    Ok(PicardRun {
        outcome,
        iterations: state.j,
        residuals: state.residuals,
        x_norm,
        v: state.v,
        w: state.w,
        vx: state.vx,
        wx: state.wx,
        data,
        params,
        eps,
    })
}

fn x_norm_of(state: &PicardState) -> f64 {
    let dv = match &state.vx {
        Some(f) => f.sup_norm(),
        None => sup_centered_dx(&state.v),
    };
    let dw = match &state.wx {
        Some(f) => f.sup_norm(),
        None => sup_centered_dx(&state.w),
    };
    state.v.sup_norm() + dv + state.w.sup_norm() + dw
}

/// Sup of centered x-differences over interior columns.
fn sup_centered_dx(u: &GridFn) -> f64 {
    let grid = u.grid();
    let nx = grid.nx();
    let inv2h = 0.5 / grid.h();
    let mut sup = 0.0f64;
    for n in 0..grid.n_levels() {
        let lv = u.level(n);
        for i in 1..nx - 1 {
            sup = sup.max(((lv[i + 1] - lv[i - 1]) * inv2h).abs());
        }
    }
    sup
}
