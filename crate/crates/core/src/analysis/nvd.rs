use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use crate::code::{CodeDefinition, SymbolBlock};
use crate::cyclotomic::{exact_det, CycElement};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng::substream;
use crate::scalar::BaseScalar;

const NVD_STREAM: u64 = 0x4e_5644;
const NORM_STREAM: u64 = 0x4e4f_524d;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NvdViolation {
    pub sample: u64,
    pub reason: String,
    pub block: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NvdReport {
    pub code: String,
    pub samples: u64,
    pub coeff_bound: i64,
    pub seed: u64,
    /// Smallest unscaled `|det|²` seen.
    pub min_abs_det_sq: String,
    pub violations: Vec<NvdViolation>,
    pub passed: bool,
}

fn random_nonzero_block(code: &CodeDefinition, bound: i64, seed: u64, k: u64) -> SymbolBlock {
    let mut rng = substream(seed, NVD_STREAM, k);
    loop {
        let entries = (0..code.num_symbols())
            .map(|_| BaseScalar::random(code.ring(), bound, &mut rng))
            .collect();
        let s = SymbolBlock::from_entries(code.nt(), entries).expect("block size matches");
        if !s.is_zero() {
            return s;
        }
    }
}

/// Checks `|det S|² ≥ 1` and `det S ∈ O_F` for random nonzero blocks with
/// coefficients in `[−bound, bound]`.
pub fn nvd_sampling_test(
    code: &CodeDefinition,
    n_samples: u64,
    coeff_bound: i64,
    seed: u64,
    execution: Execution,
) -> Result<NvdReport> {
    if coeff_bound < 1 {
        return Err(Error::InvalidArgument("coeff_bound must be at least 1".into()));
    }
    let outcomes = execution.map_range(0, n_samples, |k| -> Result<(Option<BigInt>, Option<NvdViolation>)> {
        let s = random_nonzero_block(code, coeff_bound, seed, k);
        let det = exact_det(&code.assemble_exact(&s)?)?;
        let show = || s.entries().iter().map(|e| e.to_string()).collect();
        match det.reduce_to_base() {
            Err(_) => Ok((
                None,
                Some(NvdViolation {
                    sample: k,
                    reason: format!("determinant {det} is not in the base ring"),
                    block: show(),
                }),
            )),
            Ok(d) => {
                let v = d.abs_norm_sq();
                let bad = (v < BigInt::one()).then(|| NvdViolation {
                    sample: k,
                    reason: format!("|det|^2 = {v}"),
                    block: show(),
                });
                Ok((Some(v), bad))
            }
        }
    });
    let mut min: Option<BigInt> = None;
    let mut violations = Vec::new();
    for o in outcomes {
        let (v, bad) = o?;
        if let Some(v) = v {
            if min.as_ref().is_none_or(|m| v < *m) {
                min = Some(v);
            }
        }
        violations.extend(bad);
    }
    Ok(NvdReport {
        code: code.name().to_string(),
        samples: n_samples,
        coeff_bound,
        seed,
        min_abs_det_sq: min.map(|m| m.to_string()).unwrap_or_default(),
        passed: violations.is_empty(),
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormSampleReport {
    pub code: String,
    pub samples: u64,
    pub coeff_bound: i64,
    pub seed: u64,
    /// `(sample, t)` pairs with `N(a) = γᵗ`.
    pub violations: Vec<(u64, u32)>,
    pub passed: bool,
}

/// `N_{K/F}(a) = Π_t τ^t(a)`, reduced to the base ring.
pub fn relative_norm(code: &CodeDefinition, a: &CycElement) -> Result<BaseScalar> {
    let mut acc = a.clone();
    for t in 1..code.nt() as u32 {
        acc = acc.try_mul(&a.apply_tau_pow(code.tau_exp(), t)?)?;
    }
    acc.reduce_to_base()
}

/// Samples nonzero `a ∈ O_K` and checks `N(a) ≠ γᵗ`, `t = 1, …, n−1`.
pub fn norm_nonrepresentability_sample(
    code: &CodeDefinition,
    n_samples: u64,
    coeff_bound: i64,
    seed: u64,
    execution: Execution,
) -> Result<NormSampleReport> {
    if coeff_bound < 1 {
        return Err(Error::InvalidArgument("coeff_bound must be at least 1".into()));
    }
    let powers: Vec<BaseScalar> = (1..code.nt() as u32).map(|t| code.gamma().pow(t)).collect();
    let phi = code.basis()[0].coeffs().len();
    let outcomes = execution.map_range(0, n_samples, |k| -> Result<Vec<(u64, u32)>> {
        let mut rng = substream(seed, NORM_STREAM, k);
        let a = loop {
            let coeffs = (0..phi)
                .map(|_| BaseScalar::random(code.ring(), coeff_bound, &mut rng))
                .collect();
            let a = CycElement::from_coeffs(code.ring(), code.m(), coeffs)?;
            if !a.is_zero() {
                break a;
            }
        };
        let n = relative_norm(code, &a)?;
        Ok(powers
            .iter()
            .enumerate()
            .filter(|(_, g)| **g == n)
            .map(|(t, _)| (k, t as u32 + 1))
            .collect())
    });
    let mut violations = Vec::new();
    for o in outcomes {
        violations.extend(o?);
    }
    Ok(NormSampleReport {
        code: code.name().to_string(),
        samples: n_samples,
        coeff_bound,
        seed,
        passed: violations.is_empty(),
        violations,
    })
}
