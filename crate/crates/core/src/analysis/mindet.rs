use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::ser_rational;
use crate::code::{CodeDefinition, SymbolBlock};
use crate::constellation::{Constellation, ConstellationKind};
use crate::cyclotomic::exact_det;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::scalar::BaseScalar;

/// Unscaled `|det S|²` of the exact codeword for `s`; an integer since the
/// determinant lies in `O_F`.
pub fn det_abs_sq(code: &CodeDefinition, s: &SymbolBlock) -> Result<BigInt> {
    let det = exact_det(&code.assemble_exact(s)?)?;
    Ok(det.reduce_to_base()?.abs_norm_sq())
}

/// `|det(βS)|²` for symbols of average energy `energy`.
pub fn normalized_det(code: &CodeDefinition, s: &SymbolBlock, energy: &BigRational) -> Result<BigRational> {
    let raw = BigRational::from_integer(det_abs_sq(code, s)?);
    Ok(raw * code.beta_squared_exact(energy).pow(code.nt() as u32))
}

/// `(2β)^{2n_t} = (4/(λ·n_t·E))^{n_t}`: the least nonzero difference of
/// QAM/HEX symbols is 2 and the unscaled determinant has modulus ≥ 1.
pub fn min_det_analytic_bound(code: &CodeDefinition, energy: &BigRational) -> Result<BigRational> {
    if !energy.is_positive() {
        return Err(Error::InvalidArgument(format!("average energy {energy} must be positive")));
    }
    let four = BigRational::from_integer(BigInt::from(4));
    Ok((four * code.beta_squared_exact(energy)).pow(code.nt() as u32))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstellationInfo {
    pub size: u32,
    pub kind: ConstellationKind,
    #[serde(serialize_with = "ser_rational")]
    pub average_energy: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessEntry {
    pub layer: usize,
    pub index: usize,
    pub re: String,
    pub im: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinDetCertificate {
    pub code: String,
    pub constellation: ConstellationInfo,
    #[serde(serialize_with = "ser_rational")]
    pub analytic_bound: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub achieved_value: BigRational,
    pub achieved_value_f64: f64,
    /// Unscaled `|det|²` of the witness.
    pub unscaled_min: String,
    /// Nonzero entries of the minimizing difference block.
    pub witness: Vec<WitnessEntry>,
    #[serde(skip)]
    pub witness_block: SymbolBlock,
    pub search_scope: String,
    pub determinants_evaluated: u64,
    pub exhaustive: bool,
    pub certified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchOptions {
    /// Maximum number of determinants; the certificate is flagged
    /// non-exhaustive when the scope is larger.
    pub budget: Option<u64>,
    pub execution: Execution,
}

pub fn min_det_search(
    code: &CodeDefinition,
    constellation: &Constellation,
    support_limit: usize,
) -> Result<MinDetCertificate> {
    min_det_search_with(code, constellation, support_limit, &SearchOptions::default())
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Next k-subset of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exhaustive search over difference blocks with `1..=support_limit`
/// nonzero entries, each drawn from the nonzero part of `A − A`.
pub fn min_det_search_with(
    code: &CodeDefinition,
    constellation: &Constellation,
    support_limit: usize,
    options: &SearchOptions,
) -> Result<MinDetCertificate> {
    if support_limit == 0 {
        return Err(Error::InvalidArgument("support_limit must be at least 1".into()));
    }
    if constellation.ring() != code.ring() {
        return Err(Error::RingMismatch {
            left: code.ring(),
            right: constellation.ring(),
        });
    }
    let nsym = code.num_symbols();
    let support_limit = support_limit.min(nsym);
    let diffs: Vec<BaseScalar> = constellation
        .difference_set()
        .into_iter()
        .filter(|d| !d.is_zero())
        .collect();
    let nd = diffs.len();

    let total: f64 = (1..=support_limit)
        .map(|s| binomial(nsym, s) * (nd as f64).powi(s as i32))
        .sum();
    let budget = options.budget.unwrap_or(u64::MAX);
    if options.budget.is_none() && total > 1e8 {
        return Err(Error::TooLarge { size: total, limit: 1e8 });
    }

    // (positions, difference indices) per candidate, in enumeration order
    let mut candidates: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    'outer: for s in 1..=support_limit {
        let mut pos: Vec<usize> = (0..s).collect();
        loop {
            let mut digits = vec![0usize; s];
            loop {
                if candidates.len() as u64 >= budget {
                    break 'outer;
                }
                candidates.push((pos.clone(), digits.clone()));
                let mut k = s;
                let mut carried = true;
                while carried && k > 0 {
                    k -= 1;
                    digits[k] += 1;
                    carried = digits[k] == nd;
                    if carried {
                        digits[k] = 0;
                    }
                }
                if carried {
                    break;
                }
            }
            if !next_combination(&mut pos, nsym) {
                break;
            }
        }
    }
    let exhaustive = (candidates.len() as f64) >= total;

    let nt = code.nt();
    let build = |(pos, digits): &(Vec<usize>, Vec<usize>)| {
        let mut entries = vec![BaseScalar::zero(code.ring()); nsym];
        for (&p, &d) in pos.iter().zip(digits) {
            entries[p] = diffs[d].clone();
        }
        SymbolBlock::from_entries(nt, entries).expect("block size matches")
    };
    let values: Vec<Result<BigInt>> = options
        .execution
        .map(candidates.len(), |k| det_abs_sq(code, &build(&candidates[k])));
    let mut best: Option<(BigInt, usize)> = None;
    for (k, v) in values.into_iter().enumerate() {
        let v = v?;
        if v.is_zero() {
            return Err(Error::InvalidCode(format!(
                "{}: zero determinant for a nonzero difference",
                code.name()
            )));
        }
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, k));
        }
    }
    let (unscaled, k) = best.expect("at least one candidate");
    let witness_block = build(&candidates[k]);

    let energy = constellation.average_energy();
    let analytic_bound = min_det_analytic_bound(code, &energy)?;
    let achieved_value =
        BigRational::from_integer(unscaled.clone()) * code.beta_squared_exact(&energy).pow(nt as u32);
    let witness = (0..nsym)
        .filter_map(|p| {
            let e = &witness_block.entries()[p];
            (!e.is_zero()).then(|| WitnessEntry {
                layer: p / nt,
                index: p % nt,
                re: e.re_part().to_string(),
                im: e.im_part().to_string(),
            })
        })
        .collect();
    let certified = achieved_value == analytic_bound;
    Ok(MinDetCertificate {
        code: code.name().to_string(),
        constellation: ConstellationInfo {
            size: constellation.size(),
            kind: constellation.kind(),
            average_energy: energy,
        },
        achieved_value_f64: achieved_value.to_f64().unwrap_or(f64::NAN),
        analytic_bound,
        achieved_value,
        unscaled_min: unscaled.to_string(),
        witness,
        witness_block,
        search_scope: format!(
            "difference blocks with 1..={support_limit} nonzero symbols over the {nd} nonzero points of {constellation} - {constellation}"
        ),
        determinants_evaluated: candidates.len() as u64,
        exhaustive,
        certified,
    })
}

impl MinDetCertificate {
    /// Analytic bound divided by the achieved value (1 when certified).
    pub fn tightness(&self) -> BigRational {
        if self.achieved_value.is_zero() {
            BigRational::one()
        } else {
            &self.analytic_bound / &self.achieved_value
        }
    }
}
