//! Published normalized minimum determinants, `δ = c / E^{n_t}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;

use crate::constellation::ConstellationKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceEntry {
    pub antennas: u32,
    pub code: &'static str,
    pub constellation: ConstellationKind,
    /// Denominator of `c` at the lower end of the stated range.
    pub lower_denominator: u64,
    pub upper_denominator: u64,
    /// Printed form of the value.
    pub display: &'static str,
}

impl ReferenceEntry {
    pub fn is_exact(&self) -> bool {
        self.lower_denominator == self.upper_denominator
    }

    fn evaluate(&self, denom: u64, energy: &BigRational) -> BigRational {
        BigRational::new(BigInt::from(1), BigInt::from(denom)) / energy.clone().pow(self.antennas)
    }

    pub fn lower(&self, energy: &BigRational) -> BigRational {
        self.evaluate(self.lower_denominator, energy)
    }

    pub fn upper(&self, energy: &BigRational) -> BigRational {
        self.evaluate(self.upper_denominator, energy)
    }
}

pub const REFERENCE_TABLE: [ReferenceEntry; 4] = [
    ReferenceEntry {
        antennas: 4,
        code: "perfect-4",
        constellation: ConstellationKind::Qam,
        lower_denominator: 1125,
        upper_denominator: 1125,
        display: "1/(1125E^4)",
    },
    ReferenceEntry {
        antennas: 4,
        code: "C4",
        constellation: ConstellationKind::Qam,
        lower_denominator: 256,
        upper_denominator: 256,
        display: "1/(256E^4)",
    },
    ReferenceEntry {
        antennas: 6,
        code: "perfect-6",
        constellation: ConstellationKind::Hex,
        lower_denominator: 729 * 16807,
        upper_denominator: 729 * 2401,
        display: "1/(3^6 7^5 E^6) <= delta_min <= 1/(3^6 7^4 E^6)",
    },
    ReferenceEntry {
        antennas: 6,
        code: "C6",
        constellation: ConstellationKind::Hex,
        lower_denominator: 531441,
        upper_denominator: 531441,
        display: "1/(3^12 E^6)",
    },
];

pub fn reference_entry(code: &str) -> Option<&'static ReferenceEntry> {
    REFERENCE_TABLE.iter().find(|e| e.code == code)
}
