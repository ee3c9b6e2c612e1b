//! Closed-form evaluators for the free wave u⁰ and its derivatives.
//!
//! With data (f, g) and G the antiderivative of g,
//!
//!   u⁰(x,t)    = ½{f(x+t) + f(x-t)} + ½{G(x+t) - G(x-t)}
//!   u⁰_t(x,t)  = ½{f'(x+t) - f'(x-t) + g(x+t) + g(x-t)}
//!   u⁰_x(x,t)  = ½{f'(x+t) + f'(x-t) + g(x+t) - g(x-t)}
//!   u⁰_tx(x,t) = ½{f''(x+t) - f''(x-t) + g'(x+t) + g'(x-t)}
//!   u⁰_xx(x,t) = ½{f''(x+t) + f''(x-t) + g'(x+t) - g'(x-t)} = u⁰_tt(x,t)
//!
//! These are evaluated from the exact data polynomials, never from a grid,
//! so the forcing terms fed to the iteration and the march are exact at
//! every lattice node. The evaluators are unscaled; callers multiply by
//! their amplitude factor (the stored eps is a convenience for them).

use crate::data::InitialData;

#[derive(Debug, Clone, Copy)]
pub struct FreeWave {
    data: InitialData,
    eps: f64,
}

impl FreeWave {
    pub fn new(data: InitialData, eps: f64) -> Self {
        Self { data, eps }
    }

    #[inline]
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn data(&self) -> &InitialData {
        &self.data
    }

    /// u⁰(x,t); equals f(x) at t = 0.
    pub fn u(&self, x: f64, t: f64) -> f64 {
        let d = &self.data;
        let (xp, xm) = (x + t, x - t);
        0.5 * (d.f(xp) + d.f(xm)) + 0.5 * (d.g_antideriv(xp) - d.g_antideriv(xm))
    }

    /// u⁰_t(x,t); equals g(x) at t = 0.
    #[inline]
    pub fn ut(&self, x: f64, t: f64) -> f64 {
        self.ut_ux(x, t).0
    }

    /// u⁰_x(x,t); equals f'(x) at t = 0.
    #[inline]
    pub fn ux(&self, x: f64, t: f64) -> f64 {
        self.ut_ux(x, t).1
    }

    /// (u⁰_t, u⁰_x) with the four data evaluations shared. This is the hot
    /// path of the grid sweeps.
    #[inline]
    pub fn ut_ux(&self, x: f64, t: f64) -> (f64, f64) {
        let d = &self.data;
        let (xp, xm) = (x + t, x - t);
        let fp = d.f_prime(xp);
        let fm = d.f_prime(xm);
        let gp = d.g(xp);
        let gm = d.g(xm);
        // grouped so the cancelling pair vanishes exactly at t = 0
        (0.5 * ((fp - fm) + (gp + gm)), 0.5 * ((fp + fm) + (gp - gm)))
    }

    /// u⁰_tx(x,t); equals g'(x) at t = 0.
    pub fn utx(&self, x: f64, t: f64) -> f64 {
        let d = &self.data;
        let (xp, xm) = (x + t, x - t);
        0.5 * ((d.f_second(xp) - d.f_second(xm)) + (d.g_prime(xp) + d.g_prime(xm)))
    }

    /// u⁰_xx(x,t); equals f''(x) at t = 0.
    pub fn uxx(&self, x: f64, t: f64) -> f64 {
        let d = &self.data;
        let (xp, xm) = (x + t, x - t);
        0.5 * ((d.f_second(xp) + d.f_second(xm)) + (d.g_prime(xp) - d.g_prime(xm)))
    }

    /// u⁰_tt(x,t) — identical to [`uxx`](Self::uxx) because u⁰ solves the
    /// homogeneous wave equation.
    #[inline]
    pub fn utt(&self, x: f64, t: f64) -> f64 {
        self.uxx(x, t)
    }
}
