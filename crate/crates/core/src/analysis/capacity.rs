use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::code::{CodeDefinition, ComplexMatrix};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng::substream;
use crate::sim::complex_normal;

/// Largest input alphabet enumerated per noise draw.
pub const ENUMERATION_LIMIT: f64 = 1e6;

const MI_STREAM: u64 = 0x4d49;

/// `log₂ det(I + (ρ/n_t) H Hᴴ)`.
pub fn gaussian_capacity(h: &ComplexMatrix, rho: f64) -> Result<f64> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(Error::InvalidArgument(format!("rho={rho} must be nonnegative")));
    }
    let nr = h.nrows();
    let nt = h.ncols() as f64;
    let m = DMatrix::<Complex64>::identity(nr, nr) + h * h.adjoint() * Complex64::from(rho / nt);
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::InvalidArgument("I + (rho/nt)HH^H is not positive definite".into()))?;
    Ok(2.0 * chol.l().diagonal().iter().map(|d| d.re.log2()).sum::<f64>())
}

#[derive(Debug, Clone, Copy)]
pub enum MiInput<'a> {
    /// One symbol per antenna per slot, `y = √β H s + n`.
    Uncoded,
    /// `vec(Y) = √ρ (I_T ⊗ H) G s + vec(N)` with `𝔼‖Gs‖² = T`.
    Coded(&'a CodeDefinition),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MiEstimate {
    /// Bits per channel use.
    pub bits: f64,
    pub stderr: f64,
    pub samples: u64,
}

/// Monte Carlo constellation-constrained mutual information, in the form
/// `(1/T)[k·log₂M − 𝔼 log₂ Σ_{s'} exp(−‖√ρB(s−s') + n‖² + ‖n‖²)]`.
pub fn cc_mutual_info_mc(
    h: &ComplexMatrix,
    input: MiInput<'_>,
    constellation: &Constellation,
    rho: f64,
    n_mc: u64,
    seed: u64,
    execution: Execution,
) -> Result<MiEstimate> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(Error::InvalidArgument(format!("rho={rho} must be nonnegative")));
    }
    if n_mc < 2 {
        return Err(Error::InvalidArgument("need at least two Monte Carlo draws".into()));
    }
    let nt = h.ncols();
    let energy = constellation.average_energy_f64();
    let (b, k, t) = match input {
        MiInput::Uncoded => (h / Complex64::from((nt as f64 * energy).sqrt()), nt, 1),
        MiInput::Coded(code) => {
            if code.nt() != nt {
                return Err(Error::Dimension(format!(
                    "channel has {nt} transmit antennas, code needs {}",
                    code.nt()
                )));
            }
            if code.ring() != constellation.ring() {
                return Err(Error::RingMismatch {
                    left: code.ring(),
                    right: constellation.ring(),
                });
            }
            let tl = code.block_length();
            let g = code.generator();
            let scale = (tl as f64 / (energy * g.norm_squared())).sqrt();
            let hbar = kron_identity(tl, h);
            (hbar * g * Complex64::from(scale), code.num_symbols(), tl)
        }
    };
    let size = (constellation.size() as f64).powi(k as i32);
    if size > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            size,
            limit: ENUMERATION_LIMIT,
        });
    }
    let count = size as usize;
    let points: Vec<Complex64> = constellation.points().iter().map(|p| p.to_complex()).collect();
    let m = points.len();
    let b = b * Complex64::from(rho.sqrt());
    let means: Vec<DVector<Complex64>> = (0..count)
        .map(|mut idx| {
            let x = DVector::from_fn(k, |_, _| {
                let p = points[idx % m];
                idx /= m;
                p
            });
            &b * x
        })
        .collect();
    let dim = b.nrows();

    let values = execution.map_range(0, n_mc, |draw| {
        let mut rng = substream(seed, MI_STREAM, draw);
        let sent = rng.random_range(0..count);
        let noise = DVector::from_fn(dim, |_, _| complex_normal(&mut rng));
        let base = noise.norm_squared();
        let exps: Vec<f64> = means
            .iter()
            .map(|u| base - (&means[sent] - u + &noise).norm_squared())
            .collect();
        let max = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = exps.iter().map(|e| (e - max).exp()).sum();
        (max + sum.ln()) / std::f64::consts::LN_2
    });
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let t = t as f64;
    Ok(MiEstimate {
        bits: (k as f64 * (m as f64).log2() - mean) / t,
        stderr: (var / n).sqrt() / t,
        samples: n_mc,
    })
}

/// `I_T ⊗ H`.
fn kron_identity(t: usize, h: &ComplexMatrix) -> ComplexMatrix {
    let (r, c) = h.shape();
    let mut out = ComplexMatrix::zeros(t * r, t * c);
    for b in 0..t {
        out.view_mut((b * r, b * c), (r, c)).copy_from(h);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::ConstellationKind;

    fn q4() -> Constellation {
        Constellation::new(ConstellationKind::Qam, 4).unwrap()
    }

    fn random_h(nr: usize, nt: usize, seed: u64) -> ComplexMatrix {
        let mut rng = substream(seed, 0, 0);
        DMatrix::from_fn(nr, nt, |_, _| complex_normal(&mut rng))
    }

    #[test]
    fn capacity_examples() {
        let i2 = ComplexMatrix::identity(2, 2);
        assert_eq!(gaussian_capacity(&i2, 0.0).unwrap(), 0.0);
        let one = ComplexMatrix::identity(1, 1);
        assert!((gaussian_capacity(&one, 3.0).unwrap() - 2.0).abs() < 1e-12);
        let h = random_h(3, 2, 4);
        let mut last = 0.0;
        for db in 0..30 {
            let c = gaussian_capacity(&h, 10f64.powf(db as f64 / 10.0)).unwrap();
            assert!(c >= last);
            last = c;
        }
        assert!(gaussian_capacity(&h, -1.0).is_err());
    }

    #[test]
    fn siso_limits() {
        let one = ComplexMatrix::identity(1, 1);
        let hi = cc_mutual_info_mc(&one, MiInput::Uncoded, &q4(), 1e3, 2000, 1, Execution::Parallel).unwrap();
        assert!((hi.bits - 2.0).abs() < 0.05, "{hi:?}");
        let zero = cc_mutual_info_mc(&one, MiInput::Uncoded, &q4(), 0.0, 2000, 1, Execution::Parallel).unwrap();
        assert!(zero.bits.abs() < 0.02, "{zero:?}");
    }

    #[test]
    fn below_gaussian_capacity() {
        for seed in 0..5 {
            let h = random_h(2, 2, seed);
            for rho in [0.5, 3.0, 20.0] {
                let est = cc_mutual_info_mc(&h, MiInput::Uncoded, &q4(), rho, 1500, seed, Execution::Parallel).unwrap();
                let cap = gaussian_capacity(&h, rho).unwrap();
                assert!(est.bits <= cap + 3.0 * est.stderr, "{est:?} vs {cap}");
                assert!(est.bits <= 4.0 + 3.0 * est.stderr);
            }
        }
    }

    #[test]
    fn coded_4x4_is_out_of_scale() {
        let c4 = CodeDefinition::builtin("C4").unwrap();
        let h = random_h(4, 4, 1);
        let err = cc_mutual_info_mc(&h, MiInput::Coded(&c4), &q4(), 1.0, 10, 1, Execution::Parallel);
        assert!(matches!(err, Err(Error::TooLarge { .. })));
    }

    #[test]
    fn deterministic_across_execution() {
        let h = random_h(2, 2, 7);
        let a = cc_mutual_info_mc(&h, MiInput::Uncoded, &q4(), 2.0, 300, 5, Execution::Sequential).unwrap();
        let b = cc_mutual_info_mc(&h, MiInput::Uncoded, &q4(), 2.0, 300, 5, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
