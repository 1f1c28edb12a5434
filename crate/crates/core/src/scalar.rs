//! Exact Gaussian and Eisenstein integers.
//!
//! A [`BaseScalar`] is `re + im·μ` where `μ = i` (Gaussian, `i² = −1`) or
//! `μ = ω = e^{2πi/3}` (Eisenstein, `ω² = −1 − ω`). Both parts are
//! arbitrary-precision integers so products of long Leibniz chains never wrap.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseRing {
    Gaussian,
    Eisenstein,
}

impl BaseRing {
    /// The generator `μ` of the ring over ℤ, embedded in ℂ.
    pub fn generator(self) -> Complex64 {
        match self {
            BaseRing::Gaussian => Complex64::new(0.0, 1.0),
            BaseRing::Eisenstein => Complex64::new(-0.5, 3f64.sqrt() / 2.0),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BaseRing::Gaussian => "i",
            BaseRing::Eisenstein => "ω",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BaseScalar {
    ring: BaseRing,
    re: BigInt,
    im: BigInt,
}

impl BaseScalar {
    pub fn new(ring: BaseRing, re: impl Into<BigInt>, im: impl Into<BigInt>) -> Self {
        BaseScalar {
            ring,
            re: re.into(),
            im: im.into(),
        }
    }

    pub fn zero(ring: BaseRing) -> Self {
        Self::new(ring, 0, 0)
    }

    pub fn one(ring: BaseRing) -> Self {
        Self::new(ring, 1, 0)
    }

    pub fn from_int(ring: BaseRing, n: impl Into<BigInt>) -> Self {
        Self::new(ring, n, 0)
    }

    /// The ring generator `i` or `ω` itself.
    pub fn unit_generator(ring: BaseRing) -> Self {
        Self::new(ring, 0, 1)
    }

    /// Uniform draw with both parts in `[-bound, bound]`.
    pub fn random<R: Rng + ?Sized>(ring: BaseRing, bound: i64, rng: &mut R) -> Self {
        Self::new(
            ring,
            rng.random_range(-bound..=bound),
            rng.random_range(-bound..=bound),
        )
    }

    pub fn ring(&self) -> BaseRing {
        self.ring
    }

    /// Coefficient of 1.
    pub fn re_part(&self) -> &BigInt {
        &self.re
    }

    /// Coefficient of `i` or `ω`.
    pub fn im_part(&self) -> &BigInt {
        &self.im
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    fn check_ring(&self, other: &Self) -> Result<()> {
        if self.ring == other.ring {
            Ok(())
        } else {
            Err(Error::RingMismatch {
                left: self.ring,
                right: other.ring,
            })
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        Ok(self.sub_unchecked(other))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn add_unchecked(&self, other: &Self) -> Self {
        BaseScalar {
            ring: self.ring,
            re: &self.re + &other.re,
            im: &self.im + &other.im,
        }
    }

    fn sub_unchecked(&self, other: &Self) -> Self {
        BaseScalar {
            ring: self.ring,
            re: &self.re - &other.re,
            im: &self.im - &other.im,
        }
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let ac = &self.re * &other.re;
        let bd = &self.im * &other.im;
        let cross = &self.re * &other.im + &self.im * &other.re;
        match self.ring {
            // (a+bi)(c+di) = (ac−bd) + (ad+bc)i
            BaseRing::Gaussian => BaseScalar {
                ring: self.ring,
                re: ac - bd,
                im: cross,
            },
            // (a+bω)(c+dω) = ac + (ad+bc)ω + bdω², ω² = −1−ω
            BaseRing::Eisenstein => BaseScalar {
                ring: self.ring,
                re: ac - &bd,
                im: cross - bd,
            },
        }
    }

    /// Scale by a rational integer.
    pub fn scale(&self, k: &BigInt) -> Self {
        BaseScalar {
            ring: self.ring,
            re: &self.re * k,
            im: &self.im * k,
        }
    }

    /// Complex conjugate, staying inside the ring (`ω̄ = ω² = −1 − ω`).
    pub fn conj(&self) -> Self {
        match self.ring {
            BaseRing::Gaussian => BaseScalar {
                ring: self.ring,
                re: self.re.clone(),
                im: -&self.im,
            },
            BaseRing::Eisenstein => BaseScalar {
                ring: self.ring,
                re: &self.re - &self.im,
                im: -&self.im,
            },
        }
    }

    /// `|z|²`: `a² + b²` (Gaussian) or `a² − ab + b²` (Eisenstein).
    pub fn abs_norm_sq(&self) -> BigInt {
        let aa = &self.re * &self.re;
        let bb = &self.im * &self.im;
        match self.ring {
            BaseRing::Gaussian => aa + bb,
            BaseRing::Eisenstein => aa - &self.re * &self.im + bb,
        }
    }

    pub fn is_unit(&self) -> bool {
        self.abs_norm_sq().is_one()
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one(self.ring);
        for _ in 0..exp {
            acc = acc.mul_unchecked(self);
        }
        acc
    }

    /// All units of the ring: `±1, ±i` or `±1, ±ω, ±ω²`.
    pub fn units(ring: BaseRing) -> Vec<Self> {
        match ring {
            BaseRing::Gaussian => vec![
                Self::new(ring, 1, 0),
                Self::new(ring, -1, 0),
                Self::new(ring, 0, 1),
                Self::new(ring, 0, -1),
            ],
            BaseRing::Eisenstein => vec![
                Self::new(ring, 1, 0),
                Self::new(ring, -1, 0),
                Self::new(ring, 0, 1),
                Self::new(ring, 0, -1),
                Self::new(ring, -1, -1),
                Self::new(ring, 1, 1),
            ],
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        let re = self.re.to_f64().unwrap_or(f64::NAN);
        let im = self.im.to_f64().unwrap_or(f64::NAN);
        Complex64::new(re, 0.0) + self.ring.generator() * im
    }
}

impl fmt::Display for BaseScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = self.ring.symbol();
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => {
                if self.im.is_one() {
                    write!(f, "{sym}")
                } else if (-&self.im).is_one() {
                    write!(f, "-{sym}")
                } else {
                    write!(f, "{}{sym}", self.im)
                }
            }
            (false, false) => {
                let sign = if self.im.is_negative() { '-' } else { '+' };
                let mag = self.im.abs();
                if mag.is_one() {
                    write!(f, "{}{sign}{sym}", self.re)
                } else {
                    write!(f, "{}{sign}{mag}{sym}", self.re)
                }
            }
        }
    }
}

// Operator impls panic on mismatched rings; the `try_*` methods report it.

impl Add for &BaseScalar {
    type Output = BaseScalar;
    fn add(self, rhs: &BaseScalar) -> BaseScalar {
        assert_eq!(self.ring, rhs.ring, "ring mismatch in add");
        self.add_unchecked(rhs)
    }
}

impl Sub for &BaseScalar {
    type Output = BaseScalar;
    fn sub(self, rhs: &BaseScalar) -> BaseScalar {
        assert_eq!(self.ring, rhs.ring, "ring mismatch in sub");
        self.sub_unchecked(rhs)
    }
}

impl Mul for &BaseScalar {
    type Output = BaseScalar;
    fn mul(self, rhs: &BaseScalar) -> BaseScalar {
        assert_eq!(self.ring, rhs.ring, "ring mismatch in mul");
        self.mul_unchecked(rhs)
    }
}

impl Neg for &BaseScalar {
    type Output = BaseScalar;
    fn neg(self) -> BaseScalar {
        BaseScalar {
            ring: self.ring,
            re: -&self.re,
            im: -&self.im,
        }
    }
}

impl AddAssign<&BaseScalar> for BaseScalar {
    fn add_assign(&mut self, rhs: &BaseScalar) {
        assert_eq!(self.ring, rhs.ring, "ring mismatch in add");
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&BaseScalar> for BaseScalar {
    fn sub_assign(&mut self, rhs: &BaseScalar) {
        assert_eq!(self.ring, rhs.ring, "ring mismatch in sub");
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

/// Exact ring product; errors on mismatched rings.
pub fn base_mul(x: &BaseScalar, y: &BaseScalar) -> Result<BaseScalar> {
    x.try_mul(y)
}
