//! Space-time block codes from cyclic division algebras `(K/F, τ, γ)`.
//!
//! A codeword carries `n_t` layers; layer `i` holds
//! `a_i = Σ_j s_{ij} θ_j ∈ O_K` and the matrix entry `(r, c)` is
//! `τ^c(a_{(r−c) mod n_t})`, multiplied by `γ` above the diagonal.
//!
//! Symbol ordering is layer-major throughout: symbol `k = i·n_t + j` is
//! `s_{ij}`, the coefficient of basis element `θ_j` in layer `i`. Weight
//! matrices, the generator `G` and the realified simulator coordinates all
//! follow this order.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constellation::{Constellation, ConstellationKind};
use crate::cyclotomic::{CycElement, CycMatrix};
use crate::error::{Error, Result};
use crate::scalar::{BaseRing, BaseScalar};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Least `d ≥ 1` with `k^d ≡ 1 (mod m)`; `None` when `gcd(k, m) ≠ 1`.
pub(crate) fn order_mod(k: i64, m: i64) -> Option<u32> {
    if k.gcd(&m) != 1 {
        return None;
    }
    let k = k.rem_euclid(m);
    let mut acc = k;
    let mut d = 1;
    while acc != 1 % m {
        acc = (acc * k) % m;
        d += 1;
    }
    Some(d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodeDefinition {
    name: String,
    nt: usize,
    ring: BaseRing,
    m: u32,
    tau_exp: i64,
    gamma: BaseScalar,
    basis: Vec<CycElement>,
    lambda: f64,
    constellation: ConstellationKind,
    /// `conjugates[c][j] = τ^c(θ_j)`
    conjugates: Vec<Vec<CycElement>>,
}

impl CodeDefinition {
    /// Validates the definition: `|γ|² = 1`, `τ` of order `n_t`, and a
    /// basis whose conjugate matrix is nonsingular.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        nt: usize,
        ring: BaseRing,
        m: u32,
        tau_exp: i64,
        gamma: BaseScalar,
        basis: Vec<CycElement>,
        lambda: f64,
        constellation: ConstellationKind,
    ) -> Result<Self> {
        let name = name.into();
        let invalid = |msg: String| Err(Error::InvalidCode(format!("{name}: {msg}")));
        if nt == 0 {
            return invalid("nt must be positive".into());
        }
        if m < 3 {
            return invalid(format!("m={m} must be at least 3"));
        }
        if constellation.ring() != ring {
            return invalid(format!(
                "constellation {} does not live in the {:?} ring",
                constellation.name(),
                ring
            ));
        }
        match order_mod(tau_exp, m as i64) {
            None => return invalid(format!("tau_exp={tau_exp} is not coprime to m={m}")),
            Some(d) if d as usize != nt => {
                return invalid(format!(
                    "tau_exp={tau_exp} has multiplicative order {d} mod {m}, expected nt={nt}"
                ))
            }
            Some(_) => {}
        }
        if gamma.ring() != ring {
            return invalid("gamma is in the wrong ring".into());
        }
        if !gamma.is_unit() {
            return invalid(format!("|gamma|^2 = {} (must be 1)", gamma.abs_norm_sq()));
        }
        if basis.len() != nt {
            return invalid(format!("{} basis elements for nt={nt}", basis.len()));
        }
        if basis.iter().any(|b| b.ring() != ring || b.order() != m) {
            return invalid("basis element with wrong ring or m".into());
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return invalid(format!("lambda={lambda} must be positive"));
        }
        let mut conjugates = Vec::with_capacity(nt);
        for c in 0..nt as u32 {
            conjugates.push(
                basis
                    .iter()
                    .map(|b| b.apply_tau_pow(tau_exp, c))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let code = CodeDefinition {
            name,
            nt,
            ring,
            m,
            tau_exp,
            gamma,
            basis,
            lambda,
            constellation,
            conjugates,
        };
        let r = code.layer_generator();
        let scale = r.iter().map(|z| z.norm()).fold(0.0, f64::max).powi(nt as i32);
        if r.determinant().norm() <= 1e-9 * scale.max(1e-300) {
            return Err(Error::InvalidCode(format!(
                "{}: basis is not linearly independent over the fixed field of tau",
                code.name
            )));
        }
        Ok(code)
    }

    /// `C4` (`ℚ(i,ζ₅)/ℚ(i)`, `τ: ζ₅ ↦ ζ₅²`, `γ = i`) or
    /// `C6` (`ℚ(ω,ζ₇)/ℚ(ω)`, `τ: ζ₇ ↦ ζ₇³`, `γ = −ω`).
    pub fn builtin(name: &str) -> Result<Self> {
        let (nt, ring, m, k, gamma, lambda, kind) = match name {
            "C4" => (
                4,
                BaseRing::Gaussian,
                5,
                2,
                BaseScalar::new(BaseRing::Gaussian, 0, 1),
                4.0,
                ConstellationKind::Qam,
            ),
            "C6" => (
                6,
                BaseRing::Eisenstein,
                7,
                3,
                BaseScalar::new(BaseRing::Eisenstein, 0, -1),
                6.0,
                ConstellationKind::Hex,
            ),
            other => return Err(Error::UnknownCode(other.to_string())),
        };
        let basis = (0..nt as i64)
            .map(|e| CycElement::zeta_pow(ring, m, e))
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, nt, ring, m, k, gamma, basis, lambda, kind)
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &["C4", "C6"]
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Transmit antennas, equal to the block length `T` and `[K:F]`.
    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn block_length(&self) -> usize {
        self.nt
    }

    pub fn num_symbols(&self) -> usize {
        self.nt * self.nt
    }

    pub fn ring(&self) -> BaseRing {
        self.ring
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn tau_exp(&self) -> i64 {
        self.tau_exp
    }

    pub fn gamma(&self) -> &BaseScalar {
        &self.gamma
    }

    pub fn basis(&self) -> &[CycElement] {
        &self.basis
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `λ` as an exact rational (exact conversion of the stored double).
    pub fn lambda_exact(&self) -> BigRational {
        BigRational::from_float(self.lambda).expect("lambda is finite")
    }

    pub fn constellation_kind(&self) -> ConstellationKind {
        self.constellation
    }

    pub fn constellation(&self, size: u32) -> Result<Constellation> {
        Constellation::new(self.constellation, size)
    }

    /// `τ^c(θ_j)`.
    pub fn conjugate(&self, c: usize, j: usize) -> &CycElement {
        &self.conjugates[c][j]
    }

    fn check_block(&self, s: &SymbolBlock) -> Result<()> {
        if s.nt != self.nt {
            return Err(Error::Dimension(format!(
                "symbol block is {0}x{0}, code needs {1}x{1}",
                s.nt, self.nt
            )));
        }
        if let Some(bad) = s.entries.iter().find(|e| e.ring() != self.ring) {
            return Err(Error::RingMismatch {
                left: self.ring,
                right: bad.ring(),
            });
        }
        Ok(())
    }

    /// Unscaled codeword in `O_K^{n_t×n_t}`.
    pub fn assemble_exact(&self, s: &SymbolBlock) -> Result<CycMatrix> {
        self.check_block(s)?;
        let n = self.nt;
        // layer_conj[i][c] = τ^c(a_i) = Σ_j s_ij τ^c(θ_j)
        let mut layer_conj = vec![Vec::with_capacity(n); n];
        for (i, row) in layer_conj.iter_mut().enumerate() {
            for c in 0..n {
                let mut acc = CycElement::zero(self.ring, self.m)?;
                for j in 0..n {
                    let sij = s.get(i, j);
                    if !sij.is_zero() {
                        acc = acc.try_add(&self.conjugates[c][j].scale(sij)?)?;
                    }
                }
                row.push(acc);
            }
        }
        CycMatrix::from_fn(n, n, |r, c| {
            let layer = (r + n - c) % n;
            let entry = &layer_conj[layer][c];
            if r < c {
                entry.scale(&self.gamma)
            } else {
                Ok(entry.clone())
            }
        })
    }

    /// Embedded codeword scaled by `1/√λ`.
    pub fn assemble_complex(&self, s: &SymbolBlock) -> Result<ComplexMatrix> {
        let exact = self.assemble_exact(s)?;
        Ok(exact.embed_complex() / Complex64::from(self.lambda.sqrt()))
    }

    /// Layer generator `R[r][c] = τ^r(θ_c)/√λ`.
    pub fn layer_generator(&self) -> ComplexMatrix {
        let scale = 1.0 / self.lambda.sqrt();
        DMatrix::from_fn(self.nt, self.nt, |r, c| {
            self.conjugates[r][c].embed_complex() * scale
        })
    }

    /// `diag(1, …, 1, γ, …, γ)` with `i` trailing `γ`s.
    pub fn layer_scaler(&self, i: usize) -> Result<ComplexMatrix> {
        if i >= self.nt {
            return Err(Error::InvalidArgument(format!(
                "layer index {i} out of range for nt={}",
                self.nt
            )));
        }
        let g = self.gamma.to_complex();
        let n = self.nt;
        Ok(DMatrix::from_fn(n, n, |r, c| {
            if r != c {
                Complex64::from(0.0)
            } else if r >= n - i {
                g
            } else {
                Complex64::from(1.0)
            }
        }))
    }

    /// Weight matrices `A_k`, `k = i·n_t + j`, each the complex codeword
    /// with `s_{ij} = 1` and every other symbol zero.
    pub fn weight_matrices(&self) -> Vec<ComplexMatrix> {
        let mut out = Vec::with_capacity(self.num_symbols());
        for i in 0..self.nt {
            for j in 0..self.nt {
                let s = SymbolBlock::unit(self.ring, self.nt, i, j, BaseScalar::one(self.ring));
                out.push(self.assemble_complex(&s).expect("unit block matches code"));
            }
        }
        out
    }

    /// STBC generator `G = [vec(A_1) … vec(A_k)]` (column stacking).
    pub fn generator(&self) -> ComplexMatrix {
        let weights = self.weight_matrices();
        let rows = self.nt * self.block_length();
        DMatrix::from_fn(rows, weights.len(), |r, k| weights[k].as_slice()[r])
    }

    /// Scale `β` on the unscaled exact codeword giving `𝔼‖βS‖² = T` for
    /// i.i.d. zero-mean symbols of average energy `energy`.
    pub fn energy_normalizer(&self, energy: f64) -> f64 {
        let total: f64 = self
            .weight_matrices()
            .iter()
            .map(|a| a.norm_squared())
            .sum::<f64>()
            * self.lambda;
        (self.block_length() as f64 / (energy * total)).sqrt()
    }

    /// `β²` as an exact rational, `1/(λ·n_t·E)`; agrees with
    /// [`Self::energy_normalizer`] whenever the rows of `R` have unit norm.
    pub fn beta_squared_exact(&self, energy: &BigRational) -> BigRational {
        let denom = self.lambda_exact() * BigRational::from_integer(BigInt::from(self.nt)) * energy;
        denom.recip()
    }

    /// Scale applied to [`Self::assemble_complex`] output for unit average
    /// slot energy, `β·√λ`.
    pub fn transmit_scale(&self, energy: f64) -> f64 {
        self.energy_normalizer(energy) * self.lambda.sqrt()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CodeDefinitionJson = serde_json::from_str(text)?;
        doc.into_code()
    }

    pub fn to_json(&self) -> CodeDefinitionJson {
        let scalar = |s: &BaseScalar| ScalarJson {
            re: s.re_part().to_i64().expect("coefficient fits i64"),
            im: s.im_part().to_i64().expect("coefficient fits i64"),
        };
        let basis = self
            .basis
            .iter()
            .map(|b| {
                let mut coeffs: Vec<ScalarJson> = b.coeffs().iter().map(scalar).collect();
                while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.re == 0 && c.im == 0) {
                    coeffs.pop();
                }
                coeffs
            })
            .collect();
        CodeDefinitionJson {
            name: self.name.clone(),
            nt: self.nt,
            ring: self.ring,
            m: self.m,
            tau_exp: self.tau_exp,
            gamma: scalar(&self.gamma),
            basis,
            lambda: self.lambda,
            constellation: self.constellation,
        }
    }
}

/// Load a code from its JSON definition.
pub fn load_code_definition(text: &str) -> Result<CodeDefinition> {
    CodeDefinition::from_json(text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarJson {
    pub re: i64,
    pub im: i64,
}

/// On-disk code definition. Each basis element is its coefficient list on
/// `ζ^0, ζ^1, …` (at most `m` entries); `θ = ζ^e` is a single 1 at index `e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeDefinitionJson {
    pub name: String,
    pub nt: usize,
    pub ring: BaseRing,
    pub m: u32,
    pub tau_exp: i64,
    pub gamma: ScalarJson,
    pub basis: Vec<Vec<ScalarJson>>,
    pub lambda: f64,
    pub constellation: ConstellationKind,
}

impl CodeDefinitionJson {
    pub fn into_code(self) -> Result<CodeDefinition> {
        let ring = self.ring;
        if self.m < 3 {
            return Err(Error::InvalidCode(format!("{}: m={} must be at least 3", self.name, self.m)));
        }
        let basis = self
            .basis
            .iter()
            .map(|coeffs| {
                let coeffs = coeffs
                    .iter()
                    .map(|c| BaseScalar::new(ring, c.re, c.im))
                    .collect();
                CycElement::from_coeffs(ring, self.m, coeffs)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::InvalidCode(format!("{}: basis: {e}", self.name)))?;
        CodeDefinition::new(
            self.name,
            self.nt,
            ring,
            self.m,
            self.tau_exp,
            BaseScalar::new(ring, self.gamma.re, self.gamma.im),
            basis,
            self.lambda,
            self.constellation,
        )
    }
}

/// `n_t × n_t` information symbols; row = layer, column = basis index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolBlock {
    nt: usize,
    entries: Vec<BaseScalar>,
}

impl SymbolBlock {
    pub fn zeros(ring: BaseRing, nt: usize) -> Self {
        SymbolBlock {
            nt,
            entries: vec![BaseScalar::zero(ring); nt * nt],
        }
    }

    /// Layer-major entries (`k = i·n_t + j`).
    pub fn from_entries(nt: usize, entries: Vec<BaseScalar>) -> Result<Self> {
        if entries.len() != nt * nt {
            return Err(Error::Dimension(format!(
                "{} symbols for a {nt}x{nt} block",
                entries.len()
            )));
        }
        Ok(SymbolBlock { nt, entries })
    }

    /// All zero except `s_{ij} = value`.
    pub fn unit(ring: BaseRing, nt: usize, i: usize, j: usize, value: BaseScalar) -> Self {
        let mut s = Self::zeros(ring, nt);
        s.entries[i * nt + j] = value;
        s
    }

    /// Uniform i.i.d. symbols from `constellation`.
    pub fn random<R: Rng + ?Sized>(constellation: &Constellation, nt: usize, rng: &mut R) -> Self {
        let pam = constellation.pam_levels();
        let entries = (0..nt * nt)
            .map(|_| {
                let a = pam[rng.random_range(0..pam.len())];
                let b = pam[rng.random_range(0..pam.len())];
                BaseScalar::new(constellation.ring(), a, b)
            })
            .collect();
        SymbolBlock { nt, entries }
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn get(&self, layer: usize, j: usize) -> &BaseScalar {
        &self.entries[layer * self.nt + j]
    }

    pub fn set(&mut self, layer: usize, j: usize, value: BaseScalar) {
        self.entries[layer * self.nt + j] = value;
    }

    pub fn entries(&self) -> &[BaseScalar] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(BaseScalar::is_zero)
    }

    /// Count of nonzero symbols.
    pub fn support(&self) -> usize {
        self.entries.iter().filter(|e| !e.is_zero()).count()
    }
}
