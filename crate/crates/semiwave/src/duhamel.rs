//! Characteristic lattice and the three source integrals on it.
//!
//! The lattice uses unit CFL (Δx = Δt = h), which makes transport along
//! characteristics exact; the only approximation left is the quadrature of
//! the source along backward characteristics. Three operators act on grid
//! functions U:
//!
//!   integral(U)     — ½ ∫₀ᵗ ds ∫ over the backward light triangle of U
//!                     (the inhomogeneous part of the wave solution),
//!   integral_dt(U)  — its time derivative: the half-sum of the integrals
//!                     of U along the two backward characteristics,
//!   integral_dx(U)  — its space derivative: the half-difference.
//!
//! The characteristic integrals are accumulated with the trapezoid rule,
//!
//!   P(i, n+1) = P(i+1, n) + h/2·[U(i+1, n) + U(i, n+1)]   (x+t = const)
//!   Q(i, n+1) = Q(i-1, n) + h/2·[U(i-1, n) + U(i, n+1)]   (x-t = const)
//!
//! exact for integrands constant or affine in time, and the triangle
//! integral with the diamond identity
//!
//!   W(i, n+1) = W(i+1, n) + W(i-1, n) - W(i, n-1) + h²·U(i, n),
//!
//! a midpoint rule per characteristic diamond (O(h²) globally; exact for
//! constant U). Reads past the spatial edge clamp to the boundary column,
//! so constants integrate exactly on the whole rectangle; for cone-supported
//! inputs the boundary columns are identically zero (the grid always covers
//! the cone with a one-cell margin) and clamping coincides with reading
//! zeros.

use crate::error::Error;

/// Uniform space-time lattice at unit CFL covering the light cone
/// |x| <= t + R up to the final time.
///
/// Nodes are (x_i, t_n) with x_i = (i - c)·h for i = 0..nx-1 (c the center
/// index, so the grid is symmetric about x = 0 with an odd node count) and
/// t_n = n·h for n = 0..=n_t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharGrid {
    h: f64,
    r: f64,
    n_t: usize,
    /// Center column index; also the half-width in steps.
    center: usize,
    /// Support radius in steps, rounded up.
    r_steps: usize,
}

impl CharGrid {
    /// Build a grid with mesh h covering [0, T] in time; the spatial extent
    /// is T + R + h (rounded up to whole cells) on each side.
    pub fn new(h: f64, t_final: f64, r: f64) -> Result<Self, Error> {
        if !h.is_finite() || h <= 0.0 {
            return Err(Error::Grid(format!(
                "mesh width must be positive, got h={h}"
            )));
        }
        if !t_final.is_finite() || t_final <= 0.0 {
            return Err(Error::Grid(format!(
                "final time must be positive, got T={t_final}"
            )));
        }
        if !r.is_finite() || r < 1.0 {
            return Err(Error::Grid(format!(
                "support radius must be >= 1, got R={r}"
            )));
        }
        let n_t = (t_final / h - 1e-9).ceil().max(1.0) as usize;
        let r_steps = (r / h - 1e-9).ceil().max(1.0) as usize;
        let center = n_t + r_steps + 1;
        let nx = 2 * center + 1;
        let nodes = (n_t as u128 + 1) * nx as u128;
        // level-marching solvers only ever hold a few rows, so the grid
        // itself tolerates very large node counts; full-field allocations
        // are guarded where they happen
        if nodes > (1 << 42) {
            return Err(Error::Grid(format!(
                "grid with {nodes} nodes is beyond addressable size; shrink T or increase h"
            )));
        }
        Ok(Self {
            h,
            r,
            n_t,
            center,
            r_steps,
        })
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Final covered time n_t·h (>= the requested T).
    #[inline]
    pub fn t_final(&self) -> f64 {
        self.n_t as f64 * self.h
    }

    /// Number of time steps.
    #[inline]
    pub fn n_t(&self) -> usize {
        self.n_t
    }

    /// Number of time levels (n_t + 1).
    #[inline]
    pub fn n_levels(&self) -> usize {
        self.n_t + 1
    }

    /// Nodes per level (odd).
    #[inline]
    pub fn nx(&self) -> usize {
        2 * self.center + 1
    }

    /// Center column index (x = 0).
    #[inline]
    pub fn center(&self) -> usize {
        self.center
    }

    /// Half-width of the grid.
    #[inline]
    pub fn x_extent(&self) -> f64 {
        self.center as f64 * self.h
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        (i as isize - self.center as isize) as f64 * self.h
    }

    #[inline]
    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.h
    }

    #[inline]
    pub fn idx(&self, i: usize, n: usize) -> usize {
        n * self.nx() + i
    }

    /// Total node count, for storage estimates.
    pub fn nodes(&self) -> u128 {
        self.n_levels() as u128 * self.nx() as u128
    }

    /// Whether node (i, n) lies in the grid-aligned cone
    /// |x_i| <= t_n + ceil(R/h)·h. Nodes outside carry exact zeros for any
    /// cone-supported field.
    #[inline]
    pub fn in_cone(&self, i: usize, n: usize) -> bool {
        let di = i.abs_diff(self.center);
        di <= n + self.r_steps
    }

    /// Inclusive column range of the cone at level n. Never touches the
    /// outermost columns by construction.
    #[inline]
    pub fn cone_range(&self, n: usize) -> (usize, usize) {
        let reach = (n + self.r_steps).min(self.center);
        (self.center - reach, self.center + reach)
    }
}

/// Real values on every node of a [`CharGrid`], stored level-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    grid: CharGrid,
    values: Vec<f64>,
}

impl GridFn {
    pub fn zeros(grid: CharGrid) -> Self {
        Self {
            values: vec![0.0; grid.nx() * grid.n_levels()],
            grid,
        }
    }

    /// Sample a function of (x, t) on every node.
    pub fn from_fn(grid: CharGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let nx = grid.nx();
        let mut values = Vec::with_capacity(nx * grid.n_levels());
        for n in 0..grid.n_levels() {
            let t = grid.t(n);
            for i in 0..nx {
                values.push(f(grid.x(i), t));
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> CharGrid {
        self.grid
    }

    #[inline]
    pub fn get(&self, i: usize, n: usize) -> f64 {
        self.values[self.grid.idx(i, n)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, n: usize, v: f64) {
        let k = self.grid.idx(i, n);
        self.values[k] = v;
    }

    pub fn level(&self, n: usize) -> &[f64] {
        let nx = self.grid.nx();
        &self.values[n * nx..(n + 1) * nx]
    }

    pub fn level_mut(&mut self, n: usize) -> &mut [f64] {
        let nx = self.grid.nx();
        &mut self.values[n * nx..(n + 1) * nx]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sup norm of the difference with another field on the same grid.
    pub fn sup_diff(&self, other: &GridFn) -> f64 {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    fn same_grid(&self, other: &GridFn) -> CharGrid {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        self.grid
    }

    /// Elementwise a·self + b·other.
    pub fn linear_comb(&self, a: f64, other: &GridFn, b: f64) -> GridFn {
        let grid = self.same_grid(other);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        GridFn { grid, values }
    }
}

/// Trapezoid integral of U along the backward characteristic x + t = const
/// (the leg whose foot is at x + t on the initial line).
pub fn char_plus(u: &GridFn) -> GridFn {
    let grid = u.grid();
    let nx = grid.nx();
    let half_h = 0.5 * grid.h();
    let mut out = GridFn::zeros(grid);
    for n in 0..grid.n_t() {
        let base = n * nx;
        let next = base + nx;
        for i in 0..nx {
            let ip = (i + 1).min(nx - 1);
            out.values[next + i] =
                out.values[base + ip] + half_h * (u.values[base + ip] + u.values[next + i]);
        }
    }
    out
}

/// Trapezoid integral of U along the backward characteristic x - t = const.
pub fn char_minus(u: &GridFn) -> GridFn {
    let grid = u.grid();
    let nx = grid.nx();
    let half_h = 0.5 * grid.h();
    let mut out = GridFn::zeros(grid);
    for n in 0..grid.n_t() {
        let base = n * nx;
        let next = base + nx;
        for i in 0..nx {
            let im = i.saturating_sub(1);
            out.values[next + i] =
                out.values[base + im] + half_h * (u.values[base + im] + u.values[next + i]);
        }
    }
    out
}

/// Half-sum of the two characteristic integrals: the time derivative of the
/// triangle integral. Maps a source to the u_t-response.
pub fn integral_dt(u: &GridFn) -> GridFn {
    let p = char_plus(u);
    let q = char_minus(u);
    let mut out = p;
    for (o, qv) in out.values.iter_mut().zip(&q.values) {
        *o = 0.5 * (*o + *qv);
    }
    out
}

/// Half-difference of the two characteristic integrals: the space derivative
/// of the triangle integral. Maps a source to the u_x-response.
pub fn integral_dx(u: &GridFn) -> GridFn {
    let p = char_plus(u);
    let q = char_minus(u);
    let mut out = p;
    for (o, qv) in out.values.iter_mut().zip(&q.values) {
        *o = 0.5 * (*o - *qv);
    }
    out
}

/// Backward light-triangle integral of U (the inhomogeneous part of the wave
/// solution), via the diamond recurrence. O(h²) globally.
pub fn integral(u: &GridFn) -> GridFn {
    let grid = u.grid();
    let nx = grid.nx();
    let h2 = grid.h() * grid.h();
    let mut out = GridFn::zeros(grid);
    if grid.n_t() == 0 {
        return out;
    }
    for i in 0..nx {
        out.values[nx + i] = 0.5 * h2 * u.values[i];
    }
    for n in 1..grid.n_t() {
        let prev = (n - 1) * nx;
        let base = n * nx;
        let next = base + nx;
        for i in 0..nx {
            let ip = (i + 1).min(nx - 1);
            let im = i.saturating_sub(1);
            out.values[next + i] = out.values[base + ip] + out.values[base + im]
                - out.values[prev + i]
                + h2 * u.values[base + i];
        }
    }
    out
}
