use std::ops::{Add, Div, Mul, Neg, Sub};

use super::taylor::Taylor;

/// Number-like values that expressions and the geometric pipelines can be
/// evaluated over: plain `f64` or truncated Taylor polynomials.
pub trait Scalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// A constant living in the same space as `self`.
    fn lift(&self, c: f64) -> Self;
    /// Value at the expansion point.
    fn value(&self) -> f64;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn powf(&self, p: f64) -> Self;
    fn recip(&self) -> Self;

    fn powi(&self, n: i64) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut result = self.lift(1.0);
        let mut base = self.clone();
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        result
    }

    fn scale(&self, c: f64) -> Self {
        self.clone() * self.lift(c)
    }
}

impl Scalar for f64 {
    fn lift(&self, c: f64) -> f64 {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn exp(&self) -> f64 {
        f64::exp(*self)
    }
    fn ln(&self) -> f64 {
        f64::ln(*self)
    }
    fn sqrt(&self) -> f64 {
        f64::sqrt(*self)
    }
    fn sin(&self) -> f64 {
        f64::sin(*self)
    }
    fn cos(&self) -> f64 {
        f64::cos(*self)
    }
    fn powf(&self, p: f64) -> f64 {
        f64::powf(*self, p)
    }
    fn recip(&self) -> f64 {
        1.0 / *self
    }
    fn powi(&self, n: i64) -> f64 {
        match i32::try_from(n) {
            Ok(n) => f64::powi(*self, n),
            Err(_) => f64::powf(*self, n as f64),
        }
    }
    fn scale(&self, c: f64) -> f64 {
        self * c
    }
}

impl Scalar for Taylor {
    fn lift(&self, c: f64) -> Taylor {
        Taylor::constant(self.space(), c)
    }

    fn value(&self) -> f64 {
        Taylor::value(self)
    }

    fn exp(&self) -> Taylor {
        let e = self.value().exp();
        self.compose(&vec![e; self.space().order() + 1])
    }

    fn ln(&self) -> Taylor {
        let a = self.value();
        let mut derivs = vec![a.ln()];
        // d^k/dx^k ln x = (-1)^(k-1) (k-1)! / x^k
        let mut d = 1.0 / a;
        for k in 1..=self.space().order() {
            derivs.push(d);
            d *= -(k as f64) / a;
        }
        self.compose(&derivs)
    }

    fn sqrt(&self) -> Taylor {
        self.powf(0.5)
    }

    fn sin(&self) -> Taylor {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let derivs: Vec<f64> = (0..=self.space().order()).map(|k| cycle[k % 4]).collect();
        self.compose(&derivs)
    }

    fn cos(&self) -> Taylor {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let derivs: Vec<f64> = (0..=self.space().order()).map(|k| cycle[k % 4]).collect();
        self.compose(&derivs)
    }

    fn powf(&self, p: f64) -> Taylor {
        let a = self.value();
        let mut derivs = Vec::with_capacity(self.space().order() + 1);
        let mut falling = 1.0;
        for k in 0..=self.space().order() {
            derivs.push(falling * a.powf(p - k as f64));
            falling *= p - k as f64;
        }
        self.compose(&derivs)
    }

    fn recip(&self) -> Taylor {
        Taylor::recip(self)
    }

    fn scale(&self, c: f64) -> Taylor {
        Taylor::scale(self, c)
    }
}
