//! Compactly supported initial data families and the nonlinearity model.
//!
//! Data pairs (f, g) are C² × C¹ piecewise polynomials supported in
//! |x| <= R, so every derivative and the antiderivative of g are evaluated
//! exactly — no quadrature error enters the free-wave formulas built on top
//! of them.

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Default sample count for [`InitialData::peak_amplitude`].
pub const PEAK_SAMPLES: usize = (1 << 16) + 1;

/// Amplitudes below this are reported as degenerate (identically zero data).
pub const DEGENERATE_AMPLITUDE: f64 = 1e-14;

/// Selects one of the two characteristic directions x ± t = const.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Nonlinearity variant on the right-hand side of the wave equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// |u_t|^p |u_x|^q
    GeneralProduct,
    /// |u_t + u_x|^(p-1) (u_t + u_x)
    SpecialPlus,
    /// |u_t - u_x|^(p-1) (u_t - u_x)
    SpecialMinus,
}

/// Exponents and variant of the derivative nonlinearity.
///
/// The general product model admits p, q in (1, inf) or exactly 0 (a factor
/// with exponent 0 is taken to be identically 1). The signed special models
/// need p > 1 and ignore q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearityParams {
    variant: Variant,
    p: f64,
    q: f64,
}

#[inline]
fn pow_abs(x: f64, e: f64) -> f64 {
    // |x|^e with fast paths for the exponents that dominate real runs.
    if e == 0.0 {
        1.0
    } else if e == 1.0 {
        x.abs()
    } else if e == 2.0 {
        x * x
    } else if e == 3.0 {
        let a = x.abs();
        a * a * a
    } else if e == 4.0 {
        let s = x * x;
        s * s
    } else {
        x.abs().powf(e)
    }
}

impl NonlinearityParams {
    pub fn general(p: f64, q: f64) -> Result<Self, Error> {
        let admissible = |e: f64| e.is_finite() && (e == 0.0 || e > 1.0);
        if !admissible(p) || !admissible(q) {
            return Err(Error::InvalidParams(format!(
                "general product model needs exponents in (1, inf) or 0, got p={p}, q={q}"
            )));
        }
        Ok(Self {
            variant: Variant::GeneralProduct,
            p,
            q,
        })
    }

    pub fn special(sign: Sign, p: f64) -> Result<Self, Error> {
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::InvalidParams(format!(
                "signed model needs p > 1, got p={p}"
            )));
        }
        let variant = match sign {
            Sign::Plus => Variant::SpecialPlus,
            Sign::Minus => Variant::SpecialMinus,
        };
        Ok(Self { variant, p, q: 0.0 })
    }

    #[inline]
    pub fn variant(&self) -> Variant {
        self.variant
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn is_special(&self) -> bool {
        !matches!(self.variant, Variant::GeneralProduct)
    }

    /// Characteristic direction whose amplitude drives the signed models.
    pub fn special_sign(&self) -> Option<Sign> {
        match self.variant {
            Variant::GeneralProduct => None,
            Variant::SpecialPlus => Some(Sign::Plus),
            Variant::SpecialMinus => Some(Sign::Minus),
        }
    }

    /// True when the source does not vanish on vanishing fields
    /// (p = q = 0 turns the right-hand side into the constant 1, which
    /// defeats every finite-propagation argument).
    #[inline]
    pub fn forces_vacuum(&self) -> bool {
        matches!(self.variant, Variant::GeneralProduct) && self.p == 0.0 && self.q == 0.0
    }

    /// Pointwise source term F(u_t, u_x).
    #[inline]
    pub fn eval(&self, v: f64, w: f64) -> f64 {
        match self.variant {
            Variant::GeneralProduct => pow_abs(v, self.p) * pow_abs(w, self.q),
            Variant::SpecialPlus => {
                let s = v + w;
                s.signum() * pow_abs(s, self.p)
            }
            Variant::SpecialMinus => {
                let s = v - w;
                s.signum() * pow_abs(s, self.p)
            }
        }
    }

    /// Source term from the Riemann invariants a = u_t + u_x and
    /// b = u_t - u_x. For the signed models this reads the driving
    /// invariant directly (F = sign(a)|a|^p resp. sign(b)|b|^p), so the
    /// value is exactly independent of the other field; the product model
    /// reconstructs (u_t, u_x) = ((a+b)/2, (a-b)/2).
    #[inline]
    pub fn eval_invariants(&self, a: f64, b: f64) -> f64 {
        match self.variant {
            Variant::GeneralProduct => self.eval(0.5 * (a + b), 0.5 * (a - b)),
            Variant::SpecialPlus => a.signum() * pow_abs(a, self.p),
            Variant::SpecialMinus => b.signum() * pow_abs(b, self.p),
        }
    }

    /// Exponent the lifespan T(eps) is expected to scale with on a log-log
    /// plot: -(p+q-1) for the product model, -(p-1) for the signed models.
    pub fn expected_lifespan_slope(&self) -> f64 {
        match self.variant {
            Variant::GeneralProduct => -(self.p + self.q - 1.0),
            Variant::SpecialPlus | Variant::SpecialMinus => -(self.p - 1.0),
        }
    }
}

/// Result of maximizing |±f' + g| over the support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakAmplitude {
    /// Maximum of |±f' + g| over the sample grid (0 when degenerate).
    pub m: f64,
    /// Leftmost sample attaining the maximum (0 when degenerate).
    pub x: f64,
    /// Set when the maximum is below [`DEGENERATE_AMPLITUDE`].
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
enum Family {
    /// f = amp_f (1-s²)³, g = amp_g (1-s²)², s = x/R.
    Bump { amp_f: f64, amp_g: f64 },
    /// f = amp_f (1-s²)³ and g = ∓f', so that ±f' + g vanishes identically
    /// for the direction in `cancels`; the wave equation then has the
    /// global traveling-wave solution u = eps·f(x ∓ t).
    Traveling { amp_f: f64, cancels: Sign },
}

/// A compactly supported data pair (f, g) with exact derivative and
/// antiderivative evaluators.
///
/// Every evaluator returns exactly 0.0 outside |x| <= R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    family: Family,
    r: f64,
}

// Shared polynomial kernels, s = x/r. All return exact zeros off support.

#[inline]
fn cube_bump(amp: f64, r: f64, x: f64) -> f64 {
    let s = x / r;
    let s2 = s * s;
    if s2 >= 1.0 {
        return 0.0;
    }
    let b = 1.0 - s2;
    amp * b * b * b
}

#[inline]
fn cube_bump_d1(amp: f64, r: f64, x: f64) -> f64 {
    let s = x / r;
    let s2 = s * s;
    if s2 >= 1.0 {
        return 0.0;
    }
    let b = 1.0 - s2;
    -6.0 * amp * s * b * b / r
}

#[inline]
fn cube_bump_d2(amp: f64, r: f64, x: f64) -> f64 {
    let s = x / r;
    let s2 = s * s;
    if s2 >= 1.0 {
        return 0.0;
    }
    let b = 1.0 - s2;
    6.0 * amp * b * (5.0 * s2 - 1.0) / (r * r)
}

#[inline]
fn square_bump(amp: f64, r: f64, x: f64) -> f64 {
    let s = x / r;
    let s2 = s * s;
    if s2 >= 1.0 {
        return 0.0;
    }
    let b = 1.0 - s2;
    amp * b * b
}

#[inline]
fn square_bump_d1(amp: f64, r: f64, x: f64) -> f64 {
    let s = x / r;
    let s2 = s * s;
    if s2 >= 1.0 {
        return 0.0;
    }
    -4.0 * amp * s * (1.0 - s2) / r
}

#[inline]
fn square_bump_int(amp: f64, r: f64, x: f64) -> f64 {
    let s = x / r;
    if s <= -1.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return amp * r * (16.0 / 15.0);
    }
    // integral of (1-s²)² from -1: s - 2s³/3 + s⁵/5 + 8/15
    let s3 = s * s * s;
    let s5 = s3 * s * s;
    amp * r * (s - 2.0 * s3 / 3.0 + s5 / 5.0 + 8.0 / 15.0)
}

impl InitialData {
    /// Polynomial bump pair on |x| <= R:
    ///
    ///   f(x) = amp_f (1 - (x/R)²)³        (C²: f, f', f'' vanish at ±R)
    ///   g(x) = amp_g (1 - (x/R)²)²        (C¹: g, g' vanish at ±R)
    ///
    /// Requires R >= 1.
    pub fn bump(amp_f: f64, amp_g: f64, r: f64) -> Result<Self, Error> {
        Self::check(r, &[amp_f, amp_g])?;
        Ok(Self {
            family: Family::Bump { amp_f, amp_g },
            r,
        })
    }

    /// Traveling-wave data: f is the C² bump and g = ∓f', chosen so that the
    /// amplitude ±f' + g for direction `cancels` is identically zero. The
    /// cancellation is exact in floating point (g negates the same product
    /// f' is built from), and G = ∓f in closed form.
    pub fn traveling(amp_f: f64, r: f64, cancels: Sign) -> Result<Self, Error> {
        Self::check(r, &[amp_f])?;
        Ok(Self {
            family: Family::Traveling { amp_f, cancels },
            r,
        })
    }

    fn check(r: f64, amps: &[f64]) -> Result<(), Error> {
        if !r.is_finite() || r < 1.0 {
            return Err(Error::InvalidData(format!(
                "support radius must satisfy R >= 1, got R={r}"
            )));
        }
        if amps.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidData("amplitudes must be finite".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn f(&self, x: f64) -> f64 {
        match self.family {
            Family::Bump { amp_f, .. } | Family::Traveling { amp_f, .. } => {
                cube_bump(amp_f, self.r, x)
            }
        }
    }

    pub fn f_prime(&self, x: f64) -> f64 {
        match self.family {
            Family::Bump { amp_f, .. } | Family::Traveling { amp_f, .. } => {
                cube_bump_d1(amp_f, self.r, x)
            }
        }
    }

    pub fn f_second(&self, x: f64) -> f64 {
        match self.family {
            Family::Bump { amp_f, .. } | Family::Traveling { amp_f, .. } => {
                cube_bump_d2(amp_f, self.r, x)
            }
        }
    }

    pub fn g(&self, x: f64) -> f64 {
        match self.family {
            Family::Bump { amp_g, .. } => square_bump(amp_g, self.r, x),
            Family::Traveling { amp_f, cancels } => {
                -cancels.factor() * cube_bump_d1(amp_f, self.r, x)
            }
        }
    }

    pub fn g_prime(&self, x: f64) -> f64 {
        match self.family {
            Family::Bump { amp_g, .. } => square_bump_d1(amp_g, self.r, x),
            Family::Traveling { amp_f, cancels } => {
                -cancels.factor() * cube_bump_d2(amp_f, self.r, x)
            }
        }
    }

    /// Antiderivative G(x) = integral of g over (-inf, x]; constant for
    /// x > R and zero for x < -R.
    pub fn g_antideriv(&self, x: f64) -> f64 {
        match self.family {
            Family::Bump { amp_g, .. } => square_bump_int(amp_g, self.r, x),
            Family::Traveling { amp_f, cancels } => -cancels.factor() * cube_bump(amp_f, self.r, x),
        }
    }

    /// Characteristic amplitude ±f'(x0) + g(x0); its sign and size at the
    /// foot of a characteristic decide whether that characteristic blows up.
    #[inline]
    pub fn char_amplitude(&self, sign: Sign, x0: f64) -> f64 {
        sign.factor() * self.f_prime(x0) + self.g(x0)
    }

    /// Maximum of |±f' + g| over a dense sample grid on [-R, R].
    pub fn peak_amplitude(&self, sign: Sign) -> PeakAmplitude {
        self.peak_amplitude_with(sign, PEAK_SAMPLES)
    }

    /// As [`peak_amplitude`](Self::peak_amplitude) with an explicit sample
    /// count. Ties resolve to the smallest x.
    pub fn peak_amplitude_with(&self, sign: Sign, samples: usize) -> PeakAmplitude {
        assert!(samples >= 2, "need at least two samples");
        let step = 2.0 * self.r / (samples - 1) as f64;
        let mut best = f64::NEG_INFINITY;
        let mut best_x = 0.0;
        for k in 0..samples {
            let x = -self.r + k as f64 * step;
            let m = self.char_amplitude(sign, x).abs();
            if m > best {
                best = m;
                best_x = x;
            }
        }
        if best < DEGENERATE_AMPLITUDE {
            PeakAmplitude {
                m: 0.0,
                x: 0.0,
                degenerate: true,
            }
        } else {
            PeakAmplitude {
                m: best,
                x: best_x,
                degenerate: false,
            }
        }
    }
}
