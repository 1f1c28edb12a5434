//! Exact arithmetic in `O_F[ζ_m]` for `O_F = ℤ[i]` or `ℤ[ω]`.
//!
//! Elements are stored on the power basis `{1, ζ, …, ζ^{n−1}}` with
//! `n = φ(m)`. Products are first folded with `ζ^m = 1` and then reduced
//! modulo the m-th cyclotomic polynomial; for prime `m` that is the single
//! rule `ζ^{m−1} = −(1 + ζ + … + ζ^{m−2})`.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::scalar::{BaseRing, BaseScalar};

/// Integer coefficients of `Φ_m(X)`, lowest degree first.
pub fn cyclotomic_polynomial(m: u32) -> Vec<i64> {
    assert!(m >= 1);
    // Φ_m = (X^m − 1) / ∏_{d | m, d < m} Φ_d
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in 1..m {
        if m % d == 0 {
            num = poly_exact_div(&num, &cyclotomic_polynomial(d));
        }
    }
    num
}

fn poly_exact_div(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let lead = den[dd];
    let mut quot = vec![0i64; rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let q = rem[i + dd] / lead;
        quot[i] = q;
        for (j, &c) in den.iter().enumerate() {
            rem[i + j] -= q * c;
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0));
    quot
}

/// Euler's totient.
pub fn totient(m: u32) -> u32 {
    (1..=m).filter(|&k| k.gcd(&m) == 1).count() as u32
}

/// `ζ^j` expressed on the power basis, for `j = 0..m`.
struct Reduction {
    n: usize,
    rows: Vec<Vec<i64>>,
}

fn reduction(m: u32) -> &'static Reduction {
    static CACHE: OnceLock<RwLock<HashMap<u32, &'static Reduction>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(r) = cache.read().unwrap().get(&m) {
        return r;
    }
    let phi = cyclotomic_polynomial(m);
    let n = phi.len() - 1;
    let mut rows = Vec::with_capacity(m as usize);
    // X^j mod Φ_m, built incrementally: X^{j+1} = X·X^j, then eliminate X^n.
    let mut cur = vec![0i64; n];
    cur[0] = 1;
    for _ in 0..m {
        rows.push(cur.clone());
        let top = cur[n - 1];
        let mut next = vec![0i64; n];
        next[1..n].copy_from_slice(&cur[..n - 1]);
        for t in 0..n {
            next[t] -= top * phi[t];
        }
        cur = next;
    }
    let leaked: &'static Reduction = Box::leak(Box::new(Reduction { n, rows }));
    cache.write().unwrap().insert(m, leaked);
    leaked
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CycElement {
    ring: BaseRing,
    m: u32,
    coeffs: Vec<BaseScalar>,
}

impl CycElement {
    fn check_order(m: u32) -> Result<()> {
        if m < 3 {
            Err(Error::InvalidOrder(m))
        } else {
            Ok(())
        }
    }

    pub fn zero(ring: BaseRing, m: u32) -> Result<Self> {
        Self::check_order(m)?;
        let n = reduction(m).n;
        Ok(CycElement {
            ring,
            m,
            coeffs: vec![BaseScalar::zero(ring); n],
        })
    }

    pub fn from_base(x: BaseScalar, m: u32) -> Result<Self> {
        let mut out = Self::zero(x.ring(), m)?;
        out.coeffs[0] = x;
        Ok(out)
    }

    pub fn one(ring: BaseRing, m: u32) -> Result<Self> {
        Self::from_base(BaseScalar::one(ring), m)
    }

    /// `ζ_m^e`, any integer exponent.
    pub fn zeta_pow(ring: BaseRing, m: u32, e: i64) -> Result<Self> {
        Self::check_order(m)?;
        let mut folded = vec![BaseScalar::zero(ring); m as usize];
        folded[e.rem_euclid(m as i64) as usize] = BaseScalar::one(ring);
        Ok(Self::from_folded(ring, m, folded))
    }

    /// Coefficients on `ζ^0, ζ^1, …`; up to `m` entries are accepted and
    /// reduced to the power basis.
    pub fn from_coeffs(ring: BaseRing, m: u32, coeffs: Vec<BaseScalar>) -> Result<Self> {
        Self::check_order(m)?;
        if coeffs.len() > m as usize {
            return Err(Error::Dimension(format!(
                "{} coefficients given for m={m} (at most m allowed)",
                coeffs.len()
            )));
        }
        if let Some(c) = coeffs.iter().find(|c| c.ring() != ring) {
            return Err(Error::RingMismatch {
                left: ring,
                right: c.ring(),
            });
        }
        let mut folded = coeffs;
        folded.resize(m as usize, BaseScalar::zero(ring));
        Ok(Self::from_folded(ring, m, folded))
    }

    /// Reduce a vector indexed by `ζ^0..ζ^{m−1}`.
    fn from_folded(ring: BaseRing, m: u32, folded: Vec<BaseScalar>) -> Self {
        let red = reduction(m);
        let n = red.n;
        let mut coeffs: Vec<BaseScalar> = Vec::with_capacity(n);
        let mut iter = folded.into_iter();
        coeffs.extend(iter.by_ref().take(n));
        for (j, c) in (n..).zip(iter) {
            if c.is_zero() {
                continue;
            }
            for (t, &k) in red.rows[j].iter().enumerate() {
                match k {
                    0 => {}
                    1 => coeffs[t] += &c,
                    -1 => coeffs[t] -= &c,
                    _ => coeffs[t] += &c.scale(&BigInt::from(k)),
                }
            }
        }
        CycElement { ring, m, coeffs }
    }

    pub fn ring(&self) -> BaseRing {
        self.ring
    }

    pub fn order(&self) -> u32 {
        self.m
    }

    /// Power-basis coefficients (length φ(m)).
    pub fn coeffs(&self) -> &[BaseScalar] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(BaseScalar::is_zero)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch {
                left: self.ring,
                right: other.ring,
            });
        }
        if self.m != other.m {
            return Err(Error::OrderMismatch {
                left: self.m,
                right: other.m,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        CycElement {
            ring: self.ring,
            m: self.m,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let m = self.m as usize;
        let mut folded = vec![BaseScalar::zero(self.ring); m];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                folded[(i + j) % m] += &(a * b);
            }
        }
        Self::from_folded(self.ring, self.m, folded)
    }

    /// Multiply by an element of the base ring.
    pub fn scale(&self, s: &BaseScalar) -> Result<Self> {
        if s.ring() != self.ring {
            return Err(Error::RingMismatch {
                left: self.ring,
                right: s.ring(),
            });
        }
        Ok(CycElement {
            ring: self.ring,
            m: self.m,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        })
    }

    /// Image under the automorphism `ζ ↦ ζ^k` fixing the base ring.
    pub fn apply_tau(&self, k: i64) -> Result<Self> {
        let m = self.m as i64;
        if k.gcd(&m) != 1 {
            return Err(Error::NotCoprime { k, m });
        }
        let mut folded = vec![BaseScalar::zero(self.ring); self.m as usize];
        for (j, c) in self.coeffs.iter().enumerate() {
            folded[(j as i64 * k).rem_euclid(m) as usize] = c.clone();
        }
        Ok(Self::from_folded(self.ring, self.m, folded))
    }

    /// `τ^t` for `τ: ζ ↦ ζ^k`, i.e. `ζ ↦ ζ^{k^t}`.
    pub fn apply_tau_pow(&self, k: i64, t: u32) -> Result<Self> {
        let m = self.m as i64;
        let mut e = 1i64;
        for _ in 0..t {
            e = (e * k).rem_euclid(m);
        }
        self.apply_tau(e)
    }

    /// Complex embedding `ζ_m ↦ e^{2πi/m}`, `ω ↦ e^{2πi/3}`.
    pub fn embed_complex(&self) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c.to_complex() * Complex64::from_polar(1.0, TAU * j as f64 / self.m as f64))
            .sum()
    }

    pub fn in_base_field(&self) -> bool {
        self.coeffs[1..].iter().all(BaseScalar::is_zero)
    }

    /// The base-ring value of an element of `O_F`; errors if any higher
    /// coefficient is nonzero.
    pub fn reduce_to_base(&self) -> Result<BaseScalar> {
        if let Some(index) = self.coeffs.iter().skip(1).position(|c| !c.is_zero()) {
            return Err(Error::NotInBaseField { index: index + 1 });
        }
        Ok(self.coeffs[0].clone())
    }
}

impl fmt::Display for CycElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match j {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})ζ{}", self.m)?,
                _ => write!(f, "({c})ζ{}^{j}", self.m)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Product of two elements; errors on mismatched ring or `m`.
pub fn cyc_mul(x: &CycElement, y: &CycElement) -> Result<CycElement> {
    x.try_mul(y)
}

/// Dense matrix of [`CycElement`], row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycMatrix {
    rows: usize,
    cols: usize,
    data: Vec<CycElement>,
}

impl CycMatrix {
    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Result<CycElement>,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c)?);
            }
        }
        if let Some(first) = data.first() {
            if let Some(bad) = data.iter().find(|e| e.check_compatible(first).is_err()) {
                return Err(bad.check_compatible(first).unwrap_err());
            }
        }
        Ok(CycMatrix { rows, cols, data })
    }

    pub fn identity(ring: BaseRing, m: u32, n: usize) -> Result<Self> {
        Self::from_fn(n, n, |r, c| {
            if r == c {
                CycElement::one(ring, m)
            } else {
                CycElement::zero(ring, m)
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &CycElement {
        &self.data[r * self.cols + c]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(CycElement::is_zero)
    }

    pub fn scale(&self, s: &BaseScalar) -> Result<Self> {
        Ok(CycMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|e| e.scale(s)).collect::<Result<_>>()?,
        })
    }

    pub fn embed_complex(&self) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c).embed_complex())
    }
}

/// Exact determinant by cofactor expansion along rows, sharing minors
/// between branches (`n·2^{n−1}` ring products instead of `n·n!`).
pub fn exact_det(mat: &CycMatrix) -> Result<CycElement> {
    let n = mat.rows;
    if n != mat.cols {
        return Err(Error::NotSquare {
            rows: mat.rows,
            cols: mat.cols,
        });
    }
    if n == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    if n > 20 {
        return Err(Error::Unsupported(format!("exact determinant of size {n}")));
    }
    let first = mat.get(0, 0);
    let (ring, m) = (first.ring, first.m);
    match det_small(mat, ring, m) {
        Some(det) => Ok(det),
        None => det_big(mat, ring, m),
    }
}

fn det_big(mat: &CycMatrix, ring: BaseRing, m: u32) -> Result<CycElement> {
    let n = mat.rows;
    // minors[mask] = det(rows n−|mask|.., columns in mask)
    let mut minors: Vec<Option<CycElement>> = vec![None; 1 << n];
    minors[0] = Some(CycElement::one(ring, m)?);
    let mut masks: Vec<u32> = (1..(1u32 << n)).collect();
    masks.sort_by_key(|x| x.count_ones());
    for mask in masks {
        let k = mask.count_ones() as usize;
        let row = n - k;
        let mut acc = CycElement::zero(ring, m)?;
        for (pos, col) in (0..n).filter(|c| mask & (1 << c) != 0).enumerate() {
            let entry = mat.get(row, col);
            if entry.is_zero() {
                continue;
            }
            let sub = minors[(mask & !(1 << col)) as usize]
                .as_ref()
                .expect("minor computed at lower popcount");
            if sub.is_zero() {
                continue;
            }
            let term = entry.mul_unchecked(sub);
            acc = if pos % 2 == 0 {
                acc.try_add(&term)?
            } else {
                acc.try_sub(&term)?
            };
        }
        minors[mask as usize] = Some(acc);
    }
    Ok(minors[(1 << n) - 1].take().unwrap())
}

type Small = [i128; 2];

fn small_mul(ring: BaseRing, x: Small, y: Small) -> Option<Small> {
    let ac = x[0].checked_mul(y[0])?;
    let bd = x[1].checked_mul(y[1])?;
    let ad = x[0].checked_mul(y[1])?;
    let bc = x[1].checked_mul(y[0])?;
    let re = ac.checked_sub(bd)?;
    let im = ad.checked_add(bc)?;
    Some(match ring {
        BaseRing::Gaussian => [re, im],
        // ω² = −1 − ω
        BaseRing::Eisenstein => [re, im.checked_sub(bd)?],
    })
}

/// Same expansion as [`exact_det`] on machine integers in `ℤ[X]/(X^m − 1)`,
/// reduced mod `Φ_m` once at the end. `None` on overflow.
fn det_small(mat: &CycMatrix, ring: BaseRing, m: u32) -> Option<CycElement> {
    let n = mat.rows;
    let mu = m as usize;
    let entries: Vec<Vec<Small>> = mat
        .data
        .iter()
        .map(|e| {
            let mut v = vec![[0i128; 2]; mu];
            for (j, c) in e.coeffs.iter().enumerate() {
                v[j] = [c.re_part().to_i128()?, c.im_part().to_i128()?];
            }
            Some(v)
        })
        .collect::<Option<_>>()?;
    let mut minors: Vec<Vec<Small>> = vec![Vec::new(); 1 << n];
    let mut one = vec![[0i128; 2]; mu];
    one[0] = [1, 0];
    minors[0] = one;
    let mut masks: Vec<u32> = (1..(1u32 << n)).collect();
    masks.sort_by_key(|x| x.count_ones());
    let mut nonzero = Vec::with_capacity(mu);
    for mask in masks {
        let k = mask.count_ones() as usize;
        let row = n - k;
        let mut acc = vec![[0i128; 2]; mu];
        for (pos, col) in (0..n).filter(|c| mask & (1 << c) != 0).enumerate() {
            let entry = &entries[row * n + col];
            let sub = &minors[(mask & !(1 << col)) as usize];
            nonzero.clear();
            nonzero.extend((0..mu).filter(|&j| sub[j] != [0, 0]));
            for (i, &a) in entry.iter().enumerate() {
                if a == [0, 0] {
                    continue;
                }
                for &j in &nonzero {
                    let p = small_mul(ring, a, sub[j])?;
                    let slot = &mut acc[(i + j) % mu];
                    if pos % 2 == 0 {
                        slot[0] = slot[0].checked_add(p[0])?;
                        slot[1] = slot[1].checked_add(p[1])?;
                    } else {
                        slot[0] = slot[0].checked_sub(p[0])?;
                        slot[1] = slot[1].checked_sub(p[1])?;
                    }
                }
            }
        }
        minors[mask as usize] = acc;
    }
    let folded = minors[(1 << n) - 1]
        .iter()
        .map(|c| BaseScalar::new(ring, c[0], c[1]))
        .collect();
    Some(CycElement::from_folded(ring, m, folded))
}
