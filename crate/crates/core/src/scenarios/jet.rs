//! Second-order jets of scalar functions of one variable, used for the radial
//! profiles of conical immersions.

use std::ops::{Add, Mul, Neg, Sub};

/// Value, first and second derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct J2 {
    pub v: f64,
    pub d: f64,
    pub dd: f64,
}

impl J2 {
    pub const fn constant(v: f64) -> Self {
        J2 { v, d: 0.0, dd: 0.0 }
    }

    pub const fn var(v: f64) -> Self {
        J2 { v, d: 1.0, dd: 0.0 }
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        J2 {
            v: e,
            d: e * self.d,
            dd: e * (self.dd + self.d * self.d),
        }
    }

    pub fn scale(self, c: f64) -> Self {
        J2 {
            v: c * self.v,
            d: c * self.d,
            dd: c * self.dd,
        }
    }

    /// Apply a scalar function given by its own value and two derivatives.
    pub fn compose(self, f: (f64, f64, f64)) -> Self {
        J2 {
            v: f.0,
            d: f.1 * self.d,
            dd: f.2 * self.d * self.d + f.1 * self.dd,
        }
    }
}

impl Add for J2 {
    type Output = J2;
    fn add(self, o: J2) -> J2 {
        J2 {
            v: self.v + o.v,
            d: self.d + o.d,
            dd: self.dd + o.dd,
        }
    }
}

impl Sub for J2 {
    type Output = J2;
    fn sub(self, o: J2) -> J2 {
        self + (-o)
    }
}

impl Neg for J2 {
    type Output = J2;
    fn neg(self) -> J2 {
        self.scale(-1.0)
    }
}

impl Mul for J2 {
    type Output = J2;
    fn mul(self, o: J2) -> J2 {
        J2 {
            v: self.v * o.v,
            d: self.d * o.v + self.v * o.d,
            dd: self.dd * o.v + 2.0 * self.d * o.d + self.v * o.dd,
        }
    }
}

/// Quintic smoothstep on `[lo, hi]`: 0 below, 1 above, C² in between.
/// Returns value and two derivatives.
pub fn smoothstep(x: f64, lo: f64, hi: f64) -> (f64, f64, f64) {
    let w = hi - lo;
    let y = (x - lo) / w;
    if y <= 0.0 {
        (0.0, 0.0, 0.0)
    } else if y >= 1.0 {
        (1.0, 0.0, 0.0)
    } else {
        let v = y * y * y * (10.0 - 15.0 * y + 6.0 * y * y);
        let d = 30.0 * y * y * (1.0 - y) * (1.0 - y) / w;
        let dd = 60.0 * y * (1.0 - y) * (1.0 - 2.0 * y) / (w * w);
        (v, d, dd)
    }
}
