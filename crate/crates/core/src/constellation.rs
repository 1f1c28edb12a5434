//! M-QAM and M-HEX alphabets built from √M-PAM pairs.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{BaseRing, BaseScalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstellationKind {
    Qam,
    Hex,
}

impl ConstellationKind {
    pub fn ring(self) -> BaseRing {
        match self {
            ConstellationKind::Qam => BaseRing::Gaussian,
            ConstellationKind::Hex => BaseRing::Eisenstein,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ConstellationKind::Qam => "QAM",
            ConstellationKind::Hex => "HEX",
        }
    }
}

/// `{a + μb : a, b ∈ √M-PAM}` with `μ = i` (QAM) or `ω` (HEX).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Constellation {
    kind: ConstellationKind,
    size: u32,
}

impl Constellation {
    /// `size` must be `4^t`, `t ≥ 1`.
    pub fn new(kind: ConstellationKind, size: u32) -> Result<Self> {
        let ok = size >= 4 && size.is_power_of_two() && size.trailing_zeros() % 2 == 0;
        if !ok {
            return Err(Error::InvalidConstellation(size));
        }
        Ok(Constellation { kind, size })
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn ring(&self) -> BaseRing {
        self.kind.ring()
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    /// √M.
    pub fn pam_order(&self) -> u32 {
        1 << (self.size.trailing_zeros() / 2)
    }

    /// `{−L+1, −L+3, …, L−1}` with `L = √M`.
    pub fn pam_levels(&self) -> Vec<i64> {
        let l = self.pam_order() as i64;
        (0..l).map(|u| 2 * u - (l - 1)).collect()
    }

    pub fn points(&self) -> Vec<BaseScalar> {
        let pam = self.pam_levels();
        let mut out = Vec::with_capacity(self.size as usize);
        for &a in &pam {
            for &b in &pam {
                out.push(BaseScalar::new(self.ring(), a, b));
            }
        }
        out
    }

    /// Mean of `|s|²` under uniform symbols, `2(M−1)/3` for both kinds
    /// (the `ab` cross term of the Eisenstein norm averages to zero).
    pub fn average_energy(&self) -> BigRational {
        let pts = self.points();
        let total: BigInt = pts.iter().map(BaseScalar::abs_norm_sq).sum();
        BigRational::new(total, BigInt::from(pts.len()))
    }

    pub fn average_energy_f64(&self) -> f64 {
        self.average_energy().to_f64().unwrap()
    }

    /// Exact Minkowski difference `A − A`, including zero.
    pub fn difference_set(&self) -> Vec<BaseScalar> {
        let pts = self.points();
        let mut set = BTreeSet::new();
        for p in &pts {
            for q in &pts {
                let d = p - q;
                set.insert((d.re_part().clone(), d.im_part().clone()));
            }
        }
        set.into_iter()
            .map(|(a, b)| BaseScalar::new(self.ring(), a, b))
            .collect()
    }
}

impl fmt::Display for Constellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.size, self.kind.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn sizes() {
        assert!(Constellation::new(ConstellationKind::Qam, 3).is_err());
        assert!(Constellation::new(ConstellationKind::Qam, 8).is_err());
        assert!(Constellation::new(ConstellationKind::Hex, 1).is_err());
        let q16 = Constellation::new(ConstellationKind::Qam, 16).unwrap();
        assert_eq!(q16.pam_levels(), vec![-3, -1, 1, 3]);
        assert_eq!(q16.points().len(), 16);
    }

    #[test]
    fn energies() {
        let e = |k, m| Constellation::new(k, m).unwrap().average_energy();
        let r = |n: i64| BigRational::from_integer(BigInt::from(n));
        assert_eq!(e(ConstellationKind::Qam, 4), r(2));
        assert_eq!(e(ConstellationKind::Qam, 16), r(10));
        assert_eq!(e(ConstellationKind::Hex, 4), r(2));
        assert_eq!(e(ConstellationKind::Hex, 64), r(42));
    }

    #[test]
    fn difference_sets() {
        let q4 = Constellation::new(ConstellationKind::Qam, 4).unwrap();
        let d = q4.difference_set();
        assert_eq!(d.len(), 9);
        assert!(d.iter().any(BaseScalar::is_zero));
        // nonzero differences are multiples of 2
        for x in d.iter().filter(|x| !x.is_zero()) {
            assert!((x.re_part() % 2i32).is_zero() && (x.im_part() % 2i32).is_zero());
        }
        let h4 = Constellation::new(ConstellationKind::Hex, 4).unwrap();
        let min = h4
            .difference_set()
            .iter()
            .filter(|x| !x.is_zero())
            .map(BaseScalar::abs_norm_sq)
            .min()
            .unwrap();
        assert_eq!(min, BigInt::from(4));
    }
}
