//! Floating point values carried as `mantissa * 2^exponent`.
//!
//! Orthonormal polynomials of degree in the thousands overflow `f64` long
//! before the Gaussian factor brings them back to order one, so every
//! evaluation path keeps a separate binary exponent and only reconstructs a
//! plain `f64` at the very end.

use std::f64::consts::LN_2;

/// Upper rescaling threshold for recurrence mantissas.
pub const RESCALE_HI: f64 = 1.157_920_892_373_162e77; // 2^256
/// Lower rescaling threshold for recurrence mantissas.
pub const RESCALE_LO: f64 = 8.636_168_555_094_445e-78; // 2^-256

/// `m * 2^e` without intermediate overflow or underflow.
pub fn ldexp(m: f64, e: i64) -> f64 {
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    let mut m = m;
    let mut e = e;
    while e > 1000 {
        m *= 2f64.powi(1000);
        e -= 1000;
        if m.is_infinite() {
            return m;
        }
    }
    while e < -1000 {
        m *= 2f64.powi(-1000);
        e += 1000;
        if m == 0.0 {
            return m;
        }
    }
    m * 2f64.powi(e as i32)
}

/// Binary exponent `j` with `2^j <= |v| < 2^(j+1)`; `v` must be finite and nonzero.
pub fn ilogb(v: f64) -> i64 {
    let bits = v.abs().to_bits();
    let raw = ((bits >> 52) & 0x7ff) as i64;
    if raw == 0 {
        // subnormal
        v.abs().log2().floor() as i64
    } else {
        raw - 1023
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub exponent: i64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled {
        mantissa: 0.0,
        exponent: 0,
    };

    pub fn from_f64(v: f64) -> Self {
        let mut s = Scaled {
            mantissa: v,
            exponent: 0,
        };
        s.normalize();
        s
    }

    pub fn from_parts(mantissa: f64, exponent: i64) -> Self {
        let mut s = Scaled { mantissa, exponent };
        s.normalize();
        s
    }

    /// Builds `sign * exp(ln_abs)`.
    pub fn from_ln(sign: f64, ln_abs: f64) -> Self {
        if ln_abs == f64::NEG_INFINITY || sign == 0.0 {
            return Self::ZERO;
        }
        let mut s = Scaled {
            mantissa: sign.signum(),
            exponent: 0,
        };
        s.mul_pow2(ln_abs / LN_2);
        s
    }

    /// Brings the mantissa into `[1, 2)` in absolute value.
    pub fn normalize(&mut self) {
        if self.mantissa == 0.0 || !self.mantissa.is_finite() {
            return;
        }
        let j = ilogb(self.mantissa);
        self.mantissa = ldexp(self.mantissa, -j);
        self.exponent += j;
    }

    /// Multiplies by `2^t` for a real `t`, splitting it into integer and
    /// fractional parts.
    pub fn mul_pow2(&mut self, t: f64) {
        let ti = t.floor();
        self.mantissa *= (t - ti).exp2();
        self.exponent += ti as i64;
        self.normalize();
    }

    pub fn mul(self, other: Scaled) -> Scaled {
        Scaled::from_parts(
            self.mantissa * other.mantissa,
            self.exponent + other.exponent,
        )
    }

    pub fn value(&self) -> f64 {
        ldexp(self.mantissa, self.exponent)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    pub fn signum(&self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa.signum()
        }
    }

    /// Natural log of the absolute value (`-inf` at zero).
    pub fn ln_abs(&self) -> f64 {
        if self.mantissa == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.mantissa.abs().ln() + self.exponent as f64 * LN_2
        }
    }

    /// Ratio `self / other` as a plain float.
    pub fn ratio(&self, other: &Scaled) -> f64 {
        ldexp(self.mantissa / other.mantissa, self.exponent - other.exponent)
    }
}
