//! Built-in invariant suites for the integral operators and the free-wave
//! evaluators, runnable from the command line. Checks that depend on
//! randomness draw from a seeded generator so runs are reproducible.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::data::InitialData;
use crate::duhamel::{self, CharGrid, GridFn};
use crate::error::Error;
use crate::freewave::FreeWave;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn pass(name: &'static str, detail: String) -> Self {
        Self {
            name,
            passed: true,
            detail,
        }
    }

    fn fail(name: &'static str, detail: String) -> Self {
        Self {
            name,
            passed: false,
            detail,
        }
    }

    fn assert(name: &'static str, ok: bool, detail: String) -> Self {
        if ok {
            Self::pass(name, detail)
        } else {
            Self::fail(name, detail)
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SelftestConfig {
    pub h: f64,
    pub t_final: f64,
    pub r: f64,
    pub seed: u64,
    /// Random fields per randomized check.
    pub n_random: usize,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self {
            h: 1.0 / 32.0,
            t_final: 2.0,
            r: 1.0,
            seed: 42,
            n_random: 100,
        }
    }
}

/// Run every suite; the error covers configuration problems only.
pub fn run_all(cfg: &SelftestConfig) -> Result<Vec<Check>, Error> {
    let grid = CharGrid::new(cfg.h, cfg.t_final, cfg.r)?;
    if cfg.n_random == 0 {
        return Err(Error::InvalidParams("n_random must be at least 1".into()));
    }
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let data = InitialData::bump(1.0, 1.0, cfg.r)
        .expect("selftest data is valid because r was checked by the grid");

    let mut checks = vec![
        check_operator_constants(grid),
        check_operator_linear_integrand(grid),
        check_domination(
            grid,
            &mut rng,
            cfg.n_random,
            duhamel::integral_dt,
            duhamel::integral_dx,
        ),
        check_sup_bound(grid, &mut rng, cfg.n_random),
        check_linearity(grid, &mut rng),
        check_cone_support(grid, &mut rng),
        check_quadrature_order(cfg),
    ];
    checks.extend(freewave_checks(&data, &mut rng));
    Ok(checks)
}

/// integral_dt(1) = t, integral_dx(1) = 0, integral(1) = t²/2.
pub fn check_operator_constants(grid: CharGrid) -> Check {
    let one = GridFn::from_fn(grid, |_, _| 1.0);
    let ldt = duhamel::integral_dt(&one);
    let ldx = duhamel::integral_dx(&one);
    let l = duhamel::integral(&one);
    let mut worst_dt = 0.0f64;
    let mut worst_dx = 0.0f64;
    let mut worst_l = 0.0f64;
    for n in 0..grid.n_levels() {
        let t = grid.t(n);
        for i in 0..grid.nx() {
            worst_dt = worst_dt.max((ldt.get(i, n) - t).abs());
            worst_dx = worst_dx.max(ldx.get(i, n).abs());
            let rel = (l.get(i, n) - 0.5 * t * t).abs() / (0.5 * t * t).max(1e-300);
            if n > 0 {
                worst_l = worst_l.max(rel);
            }
        }
    }
    Check::assert(
        "operator constants",
        worst_dt <= 1e-12 && worst_dx <= 1e-12 && worst_l <= 1e-9,
        format!(
            "half-sum dev {worst_dt:.2e}, half-diff dev {worst_dx:.2e}, triangle rel {worst_l:.2e}"
        ),
    )
}

/// The characteristic sums integrate U = t exactly (trapezoid on an affine
/// integrand).
pub fn check_operator_linear_integrand(grid: CharGrid) -> Check {
    let u = GridFn::from_fn(grid, |_, t| t);
    let p = duhamel::char_plus(&u);
    let mut worst = 0.0f64;
    for n in 0..grid.n_levels() {
        let t = grid.t(n);
        for i in 0..grid.nx() {
            worst = worst.max((p.get(i, n) - 0.5 * t * t).abs());
        }
    }
    Check::assert(
        "linear integrand exactness",
        worst <= 1e-12,
        format!("max deviation {worst:.2e}"),
    )
}

/// |half-difference| <= half-sum nodewise for nonnegative fields. The
/// operators are injectable so a deliberately broken operator is caught.
pub fn check_domination(
    grid: CharGrid,
    rng: &mut StdRng,
    n_random: usize,
    ldt: impl Fn(&GridFn) -> GridFn,
    ldx: impl Fn(&GridFn) -> GridFn,
) -> Check {
    for trial in 0..n_random {
        let mut u = GridFn::zeros(grid);
        for v in u.values_mut() {
            *v = rng.random_range(0.0..1.0);
        }
        let s = ldt(&u);
        let d = ldx(&u);
        for n in 0..grid.n_levels() {
            for i in 0..grid.nx() {
                if d.get(i, n).abs() > s.get(i, n) + 1e-12 {
                    return Check::fail(
                        "domination",
                        format!(
                            "trial {trial}: |half-diff| {} exceeds half-sum {} at (i={i}, n={n})",
                            d.get(i, n).abs(),
                            s.get(i, n)
                        ),
                    );
                }
            }
        }
    }
    Check::pass(
        "domination",
        format!("{n_random} nonnegative fields, slack 1e-12"),
    )
}

/// sup of the half-sum bounded by T times the sup of the input.
pub fn check_sup_bound(grid: CharGrid, rng: &mut StdRng, n_random: usize) -> Check {
    for trial in 0..n_random {
        let mut u = GridFn::zeros(grid);
        for v in u.values_mut() {
            *v = rng.random_range(0.0..1.0);
        }
        let bound = grid.t_final() * u.sup_norm() * (1.0 + 1e-12);
        let got = duhamel::integral_dt(&u).sup_norm();
        if got > bound {
            return Check::fail(
                "sup bound",
                format!("trial {trial}: half-sum sup {got} above T·sup bound {bound}"),
            );
        }
    }
    Check::pass("sup bound", format!("{n_random} fields within T·sup"))
}

pub fn check_linearity(grid: CharGrid, rng: &mut StdRng) -> Check {
    for trial in 0..10 {
        let mut u = GridFn::zeros(grid);
        let mut v = GridFn::zeros(grid);
        for x in u.values_mut() {
            *x = rng.random_range(-1.0..1.0);
        }
        for x in v.values_mut() {
            *x = rng.random_range(-1.0..1.0);
        }
        let (a, b): (f64, f64) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let combined = duhamel::integral_dt(&u.linear_comb(a, &v, b));
        let separate = duhamel::integral_dt(&u).linear_comb(a, &duhamel::integral_dt(&v), b);
        let dev = combined.sup_diff(&separate);
        let scale = 1.0 + separate.sup_norm();
        if dev > 1e-12 * scale {
            return Check::fail(
                "linearity",
                format!("trial {trial}: deviation {dev:.2e} on scale {scale:.2e}"),
            );
        }
    }
    Check::pass("linearity", "10 random combinations to rounding".into())
}

pub fn check_cone_support(grid: CharGrid, rng: &mut StdRng) -> Check {
    let mut u = GridFn::zeros(grid);
    for n in 0..grid.n_levels() {
        let (lo, hi) = grid.cone_range(n);
        for i in lo..=hi {
            u.set(i, n, rng.random_range(-1.0..1.0));
        }
    }
    for (tag, out) in [
        ("half-sum", duhamel::integral_dt(&u)),
        ("half-diff", duhamel::integral_dx(&u)),
        ("triangle", duhamel::integral(&u)),
    ] {
        for n in 0..grid.n_levels() {
            for i in 0..grid.nx() {
                if !grid.in_cone(i, n) && out.get(i, n) != 0.0 {
                    return Check::fail(
                        "cone support",
                        format!(
                            "{tag} leaks {} outside the cone at (i={i}, n={n})",
                            out.get(i, n)
                        ),
                    );
                }
            }
        }
    }
    Check::pass(
        "cone support",
        "all three operators preserve it exactly".into(),
    )
}

/// O(h²) convergence of the half-sum and the triangle integral against the
/// closed forms for U = x².
pub fn check_quadrature_order(cfg: &SelftestConfig) -> Check {
    let err_at = |h: f64| -> Result<(f64, f64), Error> {
        let grid = CharGrid::new(h, 1.0, cfg.r)?;
        let u = GridFn::from_fn(grid, |x, _| x * x);
        let ldt = duhamel::integral_dt(&u);
        let l = duhamel::integral(&u);
        let mut e_dt = 0.0f64;
        let mut e_l = 0.0f64;
        for n in 0..grid.n_levels() {
            let t = grid.t(n);
            for i in 0..grid.nx() {
                let x = grid.x(i);
                if x.abs() + t > grid.x_extent() - 2.0 * h {
                    continue;
                }
                let exact_dt = ((x + t).powi(3) - (x - t).powi(3)) / 6.0;
                let exact_l = 0.5 * x * x * t * t + t.powi(4) / 12.0;
                e_dt = e_dt.max((ldt.get(i, n) - exact_dt).abs());
                e_l = e_l.max((l.get(i, n) - exact_l).abs());
            }
        }
        Ok((e_dt, e_l))
    };
    let coarse = err_at(1.0 / 32.0);
    let fine = err_at(1.0 / 64.0);
    match (coarse, fine) {
        (Ok((dt1, l1)), Ok((dt2, l2))) => Check::assert(
            "quadrature order",
            dt1 / dt2 >= 3.5 && l1 / l2 >= 3.5,
            format!(
                "half-sum ratio {:.2}, triangle ratio {:.2}",
                dt1 / dt2,
                l1 / l2
            ),
        ),
        _ => Check::fail("quadrature order", "grid construction failed".into()),
    }
}

fn freewave_checks(data: &InitialData, rng: &mut StdRng) -> Vec<Check> {
    let fw = FreeWave::new(*data, 1.0);
    let r = data.r();
    let mut checks = Vec::new();

    // t = 0 traces
    let mut ok = true;
    for _ in 0..200 {
        let x: f64 = rng.random_range(-1.5 * r..1.5 * r);
        ok &= fw.u(x, 0.0) == data.f(x);
        ok &= fw.ut(x, 0.0) == data.g(x);
        ok &= fw.ux(x, 0.0) == data.f_prime(x);
        ok &= fw.utx(x, 0.0) == data.g_prime(x);
        ok &= fw.uxx(x, 0.0) == data.f_second(x);
    }
    checks.push(Check::assert(
        "free-wave initial traces",
        ok,
        "u, u_t, u_x, u_tx, u_xx reduce to the data at t = 0".into(),
    ));

    // support cone
    let mut ok = true;
    for _ in 0..1000 {
        let t: f64 = rng.random_range(0.0..10.0);
        let off: f64 = rng.random_range(1e-9..10.0);
        let x = (t + r + off) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        ok &= fw.u(x, t) == 0.0 && fw.ut(x, t) == 0.0 && fw.ux(x, t) == 0.0;
    }
    checks.push(Check::assert(
        "free-wave support cone",
        ok,
        "exact zeros outside |x| <= t + R".into(),
    ));

    // one-sided splitting: u_t ± u_x constant along characteristics
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let c: f64 = rng.random_range(-r..r);
        let (ut0, ux0) = fw.ut_ux(c, 0.0);
        let (base_p, base_m) = (ut0 + ux0, ut0 - ux0);
        for k in 1..10 {
            let t = 0.37 * k as f64;
            let (ut, ux) = fw.ut_ux(c - t, t);
            worst = worst.max((ut + ux - base_p).abs());
            let (ut, ux) = fw.ut_ux(c + t, t);
            worst = worst.max((ut - ux - base_m).abs());
        }
    }
    checks.push(Check::assert(
        "free-wave splitting",
        worst <= 1e-12,
        format!("max drift along characteristics {worst:.2e}"),
    ));

    // mixed derivative versus centered differences of u_t
    let mut ratio = f64::INFINITY;
    for _ in 0..50 {
        let x: f64 = rng.random_range(-0.9 * r..0.9 * r);
        let t: f64 = rng.random_range(0.1..2.0);
        let err = |h: f64| {
            let fd = (fw.ut(x + h, t) - fw.ut(x - h, t)) / (2.0 * h);
            (fd - fw.utx(x, t)).abs()
        };
        let (e1, e2) = (err(1e-3), err(5e-4));
        if e1 > 1e-10 {
            ratio = ratio.min(e1 / e2);
        }
    }
    checks.push(Check::assert(
        "free-wave mixed derivative",
        ratio >= 3.5,
        format!("worst halving ratio {ratio:.2}"),
    ));

    // wave identity: centered second time difference against u_xx
    let mut ratio = f64::INFINITY;
    for _ in 0..50 {
        let x: f64 = rng.random_range(-0.9 * r..0.9 * r);
        let t: f64 = rng.random_range(0.2..2.0);
        let err = |h: f64| {
            let fd = (fw.u(x, t + h) - 2.0 * fw.u(x, t) + fw.u(x, t - h)) / (h * h);
            (fd - fw.uxx(x, t)).abs()
        };
        let (e1, e2) = (err(1e-3), err(5e-4));
        if e1 > 1e-8 {
            ratio = ratio.min(e1 / e2);
        }
    }
    checks.push(Check::assert(
        "free-wave d'Alembert identity",
        ratio >= 3.0,
        format!("worst halving ratio {ratio:.2}"),
    ));

    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let checks = run_all(&SelftestConfig::default()).unwrap();
        assert!(!checks.is_empty());
        for c in &checks {
            assert!(c.passed, "{} failed: {}", c.name, c.detail);
        }
    }

    #[test]
    fn injected_sign_bug_is_caught() {
        // a half-difference with the wrong sign convention violates
        // domination and the check names it
        let grid = CharGrid::new(1.0 / 16.0, 1.0, 1.0).unwrap();
        let mut rng = StdRng::seed_from_u64(1);
        let broken_dx = |u: &GridFn| {
            // full difference instead of the half difference
            let p = duhamel::char_plus(u);
            let q = duhamel::char_minus(u);
            p.linear_comb(1.0, &q, -1.0)
        };
        let check = check_domination(grid, &mut rng, 20, duhamel::integral_dt, broken_dx);
        assert!(!check.passed);
        assert_eq!(check.name, "domination");
    }

    #[test]
    fn bad_config_is_rejected() {
        let cfg = SelftestConfig {
            h: 0.0,
            ..Default::default()
        };
        assert!(run_all(&cfg).is_err());
        let cfg = SelftestConfig {
            n_random: 0,
            ..Default::default()
        };
        assert!(run_all(&cfg).is_err());
    }
}
