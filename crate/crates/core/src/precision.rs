//! Scalar arithmetic used by the switching engine, in binary64 or in
//! software floating point with a configurable mantissa.

use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PrecisionMode {
    Binary64,
    Extended { bits: usize },
}

impl PrecisionMode {
    pub fn label(&self) -> String {
        match self {
            PrecisionMode::Binary64 => "binary64".into(),
            PrecisionMode::Extended { bits } => format!("extended{bits}"),
        }
    }
}

impl fmt::Display for PrecisionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Minimal field-with-transcendentals interface. Methods take `&mut self`
/// because software backends cache constants.
pub trait Arith {
    type Num: Clone + fmt::Debug + Send + Sync;

    fn mode(&self) -> PrecisionMode;
    /// Unit roundoff `2^-p`.
    fn unit_roundoff(&self) -> f64;
    fn num(&mut self, v: f64) -> Self::Num;
    fn to_f64(&self, a: &Self::Num) -> f64;
    fn add(&mut self, a: &Self::Num, b: &Self::Num) -> Self::Num;
    fn sub(&mut self, a: &Self::Num, b: &Self::Num) -> Self::Num;
    fn mul(&mut self, a: &Self::Num, b: &Self::Num) -> Self::Num;
    fn div(&mut self, a: &Self::Num, b: &Self::Num) -> Self::Num;
    fn ln(&mut self, a: &Self::Num) -> Self::Num;
    fn exp(&mut self, a: &Self::Num) -> Self::Num;
    fn sin(&mut self, a: &Self::Num) -> Self::Num;
    fn cos(&mut self, a: &Self::Num) -> Self::Num;
    fn abs(&mut self, a: &Self::Num) -> Self::Num;
    fn pi(&mut self) -> Self::Num;
    fn is_negative(&self, a: &Self::Num) -> bool;
    fn is_zero(&self, a: &Self::Num) -> bool;
    fn lt(&self, a: &Self::Num, b: &Self::Num) -> bool;
    /// Decimal rendering with every significant digit kept.
    fn render(&self, a: &Self::Num) -> String;
    /// Inverse of [`Arith::render`].
    fn parse(&mut self, s: &str) -> Option<Self::Num>;

    fn mul_f64(&mut self, a: &Self::Num, v: f64) -> Self::Num {
        let b = self.num(v);
        self.mul(a, &b)
    }

    fn midpoint(&mut self, a: &Self::Num, b: &Self::Num) -> Self::Num {
        let d = self.sub(b, a);
        let h = self.mul_f64(&d, 0.5);
        self.add(a, &h)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Binary64;

impl Arith for Binary64 {
    type Num = f64;

    fn mode(&self) -> PrecisionMode {
        PrecisionMode::Binary64
    }
    fn unit_roundoff(&self) -> f64 {
        f64::EPSILON / 2.0
    }
    #[inline]
    fn num(&mut self, v: f64) -> f64 {
        v
    }
    #[inline]
    fn to_f64(&self, a: &f64) -> f64 {
        *a
    }
    #[inline]
    fn add(&mut self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    #[inline]
    fn sub(&mut self, a: &f64, b: &f64) -> f64 {
        a - b
    }
    #[inline]
    fn mul(&mut self, a: &f64, b: &f64) -> f64 {
        a * b
    }
    #[inline]
    fn div(&mut self, a: &f64, b: &f64) -> f64 {
        a / b
    }
    #[inline]
    fn ln(&mut self, a: &f64) -> f64 {
        a.ln()
    }
    #[inline]
    fn exp(&mut self, a: &f64) -> f64 {
        a.exp()
    }
    #[inline]
    fn sin(&mut self, a: &f64) -> f64 {
        a.sin()
    }
    #[inline]
    fn cos(&mut self, a: &f64) -> f64 {
        a.cos()
    }
    #[inline]
    fn abs(&mut self, a: &f64) -> f64 {
        a.abs()
    }
    fn pi(&mut self) -> f64 {
        std::f64::consts::PI
    }
    #[inline]
    fn is_negative(&self, a: &f64) -> bool {
        *a < 0.0
    }
    #[inline]
    fn is_zero(&self, a: &f64) -> bool {
        *a == 0.0
    }
    #[inline]
    fn lt(&self, a: &f64, b: &f64) -> bool {
        a < b
    }
    fn render(&self, a: &f64) -> String {
        format!("{a:.16e}")
    }
    fn parse(&mut self, s: &str) -> Option<f64> {
        s.parse().ok()
    }
}

/// Software floating point with `bits` of mantissa and round-to-nearest.
pub struct Extended {
    bits: usize,
    rm: RoundingMode,
    cc: Consts,
}

impl Extended {
    pub fn new(bits: usize) -> Self {
        let cc = Consts::new().expect("constant cache allocation");
        Self { bits: bits.max(64), rm: RoundingMode::ToEven, cc }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }
}

impl fmt::Debug for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Extended").field("bits", &self.bits).finish()
    }
}

impl Arith for Extended {
    type Num = BigFloat;

    fn mode(&self) -> PrecisionMode {
        PrecisionMode::Extended { bits: self.bits }
    }
    fn unit_roundoff(&self) -> f64 {
        2f64.powi(-(self.bits as i32))
    }
    fn num(&mut self, v: f64) -> BigFloat {
        BigFloat::from_f64(v, self.bits)
    }
    fn to_f64(&self, a: &BigFloat) -> f64 {
        if a.is_zero() {
            return 0.0;
        }
        // Display prints enough digits for a correctly rounded parse.
        let s = format!("{a}");
        s.parse::<f64>().unwrap_or(if a.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
    }
    fn add(&mut self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.bits, self.rm)
    }
    fn sub(&mut self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.bits, self.rm)
    }
    fn mul(&mut self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.bits, self.rm)
    }
    fn div(&mut self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.bits, self.rm)
    }
    fn ln(&mut self, a: &BigFloat) -> BigFloat {
        let v = a.ln(self.bits, self.rm, &mut self.cc);
        if v.is_nan() {
            panic!("extended ln of non-positive value");
        }
        v
    }
    fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(self.bits, self.rm, &mut self.cc)
    }
    fn sin(&mut self, a: &BigFloat) -> BigFloat {
        a.sin(self.bits, self.rm, &mut self.cc)
    }
    fn cos(&mut self, a: &BigFloat) -> BigFloat {
        a.cos(self.bits, self.rm, &mut self.cc)
    }
    fn abs(&mut self, a: &BigFloat) -> BigFloat {
        a.abs()
    }
    fn pi(&mut self) -> BigFloat {
        self.cc.pi(self.bits, self.rm)
    }
    fn is_negative(&self, a: &BigFloat) -> bool {
        a.is_negative() && !a.is_zero()
    }
    fn is_zero(&self, a: &BigFloat) -> bool {
        a.is_zero()
    }
    fn lt(&self, a: &BigFloat, b: &BigFloat) -> bool {
        a < b
    }
    fn render(&self, a: &BigFloat) -> String {
        format!("{a}")
    }
    fn parse(&mut self, s: &str) -> Option<BigFloat> {
        let v = BigFloat::parse(s, Radix::Dec, self.bits, self.rm, &mut self.cc);
        (!v.is_nan()).then_some(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extended_matches_binary64_on_transcendentals() {
        let mut x = Extended::new(128);
        let mut b = Binary64;
        for v in [0.3, 1.7, 12.5, -4.25] {
            let e = x.num(v);
            let s = x.sin(&e);
            assert!((x.to_f64(&s) - b.sin(&v)).abs() < 1e-15);
            let c = x.cos(&e);
            assert!((x.to_f64(&c) - b.cos(&v)).abs() < 1e-15);
            let p = x.exp(&e);
            assert!((x.to_f64(&p) / b.exp(&v) - 1.0).abs() < 1e-15);
            let a = x.abs(&e);
            let l = x.ln(&a);
            assert!((x.to_f64(&l) - v.abs().ln()).abs() < 1e-15);
        }
        let pi = x.pi();
        assert_eq!(x.to_f64(&pi), std::f64::consts::PI);
    }

    #[test]
    fn extended_resolves_below_binary64_spacing() {
        let mut x = Extended::new(256);
        let one = x.num(1.0);
        let tiny = x.num(1e-30);
        let s = x.add(&one, &tiny);
        assert!(x.lt(&one, &s));
        let d = x.sub(&s, &one);
        assert!((x.to_f64(&d) / 1e-30 - 1.0).abs() < 1e-12);
        assert!(x.unit_roundoff() < 1e-70);
        let back = x.parse(&x.render(&s)).unwrap();
        assert_eq!(back, s);
        let mut b = Binary64;
        let v = 0.1f64 + 0.2;
        assert_eq!(b.parse(&b.render(&v)), Some(v));
    }
}
