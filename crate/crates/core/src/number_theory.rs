//! Splitting of rational primes in cyclotomic extensions of `ℚ(i)` and
//! `ℚ(ω)`, checked by polynomial factorization over `𝔽_p`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cyclotomic::{cyclotomic_polynomial, totient};
use crate::error::{Error, Result};
use crate::scalar::{BaseRing, BaseScalar};

/// Relative discriminants of the two code fields, `5³ℤ[i]` and `7⁵ℤ[ω]`.
pub const RELATIVE_DISCRIMINANTS: [(BaseRing, u32, u64, u32); 2] =
    [(BaseRing::Gaussian, 5, 5, 3), (BaseRing::Eisenstein, 7, 7, 5)];

/// Least `d ≥ 1` with `q^d ≡ 1 (mod n)`.
pub fn mult_order(q: i64, n: i64) -> Result<u64> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!("modulus {n} must be positive")));
    }
    if q.gcd(&n) != 1 {
        return Err(Error::NotCoprime { k: q, m: n });
    }
    let (q, n) = (q.rem_euclid(n) as u128, n as u128);
    let mut acc = q % n;
    let mut d = 1;
    while acc != 1 % n {
        acc = acc * q % n;
        d += 1;
    }
    Ok(d)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Dense polynomials over `𝔽_p`, lowest degree first, no trailing zeros.
mod fp {
    use super::{mul_mod, pow_mod};

    pub type Poly = Vec<u64>;

    pub fn trim(mut a: Poly) -> Poly {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn deg(a: &Poly) -> Option<usize> {
        a.len().checked_sub(1)
    }

    pub fn add(a: &Poly, b: &Poly, p: u64) -> Poly {
        let n = a.len().max(b.len());
        let out = (0..n)
            .map(|k| (a.get(k).copied().unwrap_or(0) + b.get(k).copied().unwrap_or(0)) % p)
            .collect();
        trim(out)
    }

    pub fn sub(a: &Poly, b: &Poly, p: u64) -> Poly {
        let n = a.len().max(b.len());
        let out = (0..n)
            .map(|k| {
                let x = a.get(k).copied().unwrap_or(0);
                let y = b.get(k).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect();
        trim(out)
    }

    pub fn mul(a: &Poly, b: &Poly, p: u64) -> Poly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + mul_mod(x, y, p)) % p;
            }
        }
        trim(out)
    }

    /// `(quotient, remainder)`; `b` nonzero.
    pub fn divrem(a: &Poly, b: &Poly, p: u64) -> (Poly, Poly) {
        let db = deg(b).expect("nonzero divisor");
        let inv = pow_mod(b[db], p - 2, p);
        let mut r = a.clone();
        if r.len() <= db {
            return (Vec::new(), trim(r));
        }
        let mut q = vec![0u64; r.len() - db];
        for k in (db..r.len()).rev() {
            let c = mul_mod(r[k], inv, p);
            if c == 0 {
                continue;
            }
            q[k - db] = c;
            for (j, &bj) in b.iter().enumerate() {
                let idx = k - db + j;
                r[idx] = (r[idx] + p - mul_mod(c, bj, p)) % p;
            }
        }
        r.truncate(db);
        (trim(q), trim(r))
    }

    pub fn rem(a: &Poly, b: &Poly, p: u64) -> Poly {
        divrem(a, b, p).1
    }

    pub fn monic(a: &Poly, p: u64) -> Poly {
        match a.last() {
            None => Vec::new(),
            Some(&lead) => {
                let inv = pow_mod(lead, p - 2, p);
                a.iter().map(|&c| mul_mod(c, inv, p)).collect()
            }
        }
    }

    pub fn gcd(a: &Poly, b: &Poly, p: u64) -> Poly {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        monic(&a, p)
    }

    pub fn mulmod(a: &Poly, b: &Poly, f: &Poly, p: u64) -> Poly {
        rem(&mul(a, b, p), f, p)
    }

    /// `a^e mod f` with the exponent given as little-endian bits.
    pub fn powmod_bits(a: &Poly, bits: impl DoubleEndedIterator<Item = bool>, f: &Poly, p: u64) -> Poly {
        let mut r = rem(&vec![1], f, p);
        for bit in bits.rev() {
            r = mulmod(&r, &r, f, p);
            if bit {
                r = mulmod(&r, a, f, p);
            }
        }
        r
    }

    pub fn powmod(a: &Poly, e: u64, f: &Poly, p: u64) -> Poly {
        powmod_bits(a, (0..64).map(|k| (e >> k) & 1 == 1), f, p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplittingReport {
    pub m: u32,
    pub p: u64,
    pub phi: u32,
    /// Common degree of the irreducible factors.
    pub d: u64,
    /// Number of irreducible factors.
    pub g: u64,
    pub d_from_order: u64,
    /// Degree classes found by distinct-degree factorization, `(degree, count)`.
    pub ddf_classes: Vec<(u64, u64)>,
    pub methods_agree: bool,
    pub completely_split: bool,
    /// Monic irreducible factors of `Φ_m` over `𝔽_p`, lowest degree first.
    pub factors: Vec<Vec<u64>>,
}

fn phi_mod_p(m: u32, p: u64) -> fp::Poly {
    let pm = p as i64;
    fp::trim(
        cyclotomic_polynomial(m)
            .into_iter()
            .map(|c| c.rem_euclid(pm) as u64)
            .collect(),
    )
}

/// `(degree, product of all irreducible factors of that degree)`.
fn distinct_degree(f: &fp::Poly, p: u64) -> Vec<(u64, fp::Poly)> {
    let x: fp::Poly = vec![0, 1];
    let mut f = f.clone();
    let mut h = fp::rem(&x, &f, p);
    let mut out = Vec::new();
    let mut j = 0u64;
    while fp::deg(&f).unwrap_or(0) > 0 {
        j += 1;
        if 2 * j > fp::deg(&f).unwrap() as u64 {
            out.push((fp::deg(&f).unwrap() as u64, f.clone()));
            break;
        }
        h = fp::powmod(&h, p, &f, p);
        let g = fp::gcd(&f, &fp::sub(&h, &x, p), p);
        if fp::deg(&g).unwrap_or(0) > 0 {
            f = fp::divrem(&f, &g, p).0;
            h = fp::rem(&h, &f, p);
            out.push((j, g));
        }
    }
    out
}

/// Split a product of distinct monic irreducibles of degree `d`.
fn equal_degree(f: &fp::Poly, d: u64, p: u64, rng: &mut ChaCha8Rng) -> Vec<fp::Poly> {
    let n = fp::deg(f).unwrap_or(0) as u64;
    if n == d {
        return vec![fp::monic(f, p)];
    }
    let exponent = if p == 2 {
        BigUint::zero()
    } else {
        (BigUint::from(p).pow(d as u32) - 1u32) / 2u32
    };
    loop {
        let a: fp::Poly = fp::trim((0..n).map(|_| rng.random_range(0..p)).collect());
        if fp::deg(&a).unwrap_or(0) == 0 {
            continue;
        }
        let b = if p == 2 {
            // trace map a + a² + … + a^{2^{d−1}}
            let mut t = a.clone();
            let mut acc = a.clone();
            for _ in 1..d {
                t = fp::mulmod(&t, &t, f, p);
                acc = fp::add(&acc, &t, p);
            }
            acc
        } else {
            let bits: Vec<bool> = (0..exponent.bits()).map(|k| exponent.bit(k)).collect();
            fp::sub(&fp::powmod_bits(&a, bits.into_iter(), f, p), &vec![1], p)
        };
        let g = fp::gcd(f, &b, p);
        let dg = fp::deg(&g).unwrap_or(0) as u64;
        if dg > 0 && dg < n {
            let rest = fp::divrem(f, &g, p).0;
            let mut out = equal_degree(&g, d, p, rng);
            out.extend(equal_degree(&rest, d, p, rng));
            return out;
        }
    }
}

/// Factorization pattern of `Φ_m` over `𝔽_p` for `p ∤ m`.
pub fn cyclotomic_factor_degrees(m: u32, p: u64) -> Result<SplittingReport> {
    if m < 3 {
        return Err(Error::InvalidOrder(m));
    }
    if !is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    if m as u64 % p == 0 {
        return Err(Error::Unsupported(format!("p={p} divides m={m} (ramified)")));
    }
    let phi = totient(m);
    let d_from_order = mult_order((p % m as u64) as i64, m as i64)?;
    let f = phi_mod_p(m, p);
    let classes = distinct_degree(&f, p);
    let ddf_classes: Vec<(u64, u64)> = classes
        .iter()
        .map(|(d, g)| (*d, fp::deg(g).unwrap() as u64 / d))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(((m as u64) << 32) ^ p);
    let mut factors: Vec<Vec<u64>> = classes
        .iter()
        .flat_map(|(d, g)| equal_degree(g, *d, p, &mut rng))
        .collect();
    factors.sort();
    let d = ddf_classes.first().map_or(0, |c| c.0);
    let g = factors.len() as u64;
    let methods_agree = ddf_classes.len() == 1 && d == d_from_order && d * g == phi as u64;
    Ok(SplittingReport {
        m,
        p,
        phi,
        d,
        g,
        d_from_order,
        ddf_classes,
        methods_agree,
        completely_split: d == 1 && g == phi as u64,
        factors,
    })
}

fn nonzero(z: &BaseScalar) -> Result<()> {
    if z.is_zero() {
        Err(Error::InvalidArgument("zero is not a prime".into()))
    } else {
        Ok(())
    }
}

fn prime_big(n: &BigInt) -> bool {
    n.to_u64().is_some_and(is_prime)
}

/// `a + bi` is prime iff it lies on an axis with `|a|` or `|b|` a prime
/// `≡ 3 (mod 4)`, or both parts are nonzero and `a² + b²` is prime.
pub fn gaussian_prime_check(z: &BaseScalar) -> Result<bool> {
    if z.ring() != BaseRing::Gaussian {
        return Err(Error::RingMismatch {
            left: BaseRing::Gaussian,
            right: z.ring(),
        });
    }
    nonzero(z)?;
    let (a, b) = (z.re_part(), z.im_part());
    if a.is_zero() || b.is_zero() {
        let v = if a.is_zero() { b.abs() } else { a.abs() };
        return Ok(prime_big(&v) && (&v % 4u32) == BigInt::from(3));
    }
    Ok(prime_big(&z.abs_norm_sq()))
}

/// `a + bω` is prime iff it is a unit times a rational prime `≡ 2 (mod 3)`,
/// or its norm `a² − ab + b²` is prime. Associates of rational primes need
/// not lie on an axis (`2 + 2ω = −2ω²`), so the first case tests all six.
pub fn eisenstein_prime_check(z: &BaseScalar) -> Result<bool> {
    if z.ring() != BaseRing::Eisenstein {
        return Err(Error::RingMismatch {
            left: BaseRing::Eisenstein,
            right: z.ring(),
        });
    }
    nonzero(z)?;
    for u in BaseScalar::units(BaseRing::Eisenstein) {
        let w = z * &u;
        if w.im_part().is_zero() {
            let v = w.re_part().abs();
            if prime_big(&v) && (&v % 3u32) == BigInt::from(2) {
                return Ok(true);
            }
        }
    }
    Ok(prime_big(&z.abs_norm_sq()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseSplit {
    Split,
    Inert,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EfgReport {
    pub m: u32,
    pub p: u64,
    pub base: BaseRing,
    pub base_split: BaseSplit,
    /// A prime element of the base ring above `p`.
    pub base_prime: String,
    pub base_prime_is_prime: bool,
    /// `[K:F]`.
    pub relative_degree: u64,
    pub e: u64,
    /// Relative inertia degree of a base prime above `p`.
    pub f: u64,
    pub g: u64,
    pub completely_split_over_base: bool,
    /// Factorization of `Φ_m` over `𝔽_p` (splitting of `p` in `ℤ[ζ_m]`).
    pub cyclotomic: SplittingReport,
}

fn base_modulus(base: BaseRing) -> u64 {
    match base {
        BaseRing::Gaussian => 4,
        BaseRing::Eisenstein => 3,
    }
}

/// Prime element of norm `p` for a split `p`.
fn norm_representative(base: BaseRing, p: u64) -> Option<BaseScalar> {
    let limit = (2.0 * (p as f64).sqrt()) as i64 + 2;
    for a in 1..=limit {
        for b in 1..=limit {
            let z = BaseScalar::new(base, a, b);
            if z.abs_norm_sq() == BigInt::from(p) {
                return Some(z);
            }
        }
    }
    None
}

/// Splitting of the base-ring primes above `p` in `F(ζ_m)/F`.
pub fn efg_report(m: u32, p: u64, base: BaseRing) -> Result<EfgReport> {
    let cyclotomic = cyclotomic_factor_degrees(m, p)?;
    let q = base_modulus(base);
    if p % q == 0 || (q == 4 && p == 2) {
        return Err(Error::Unsupported(format!("p={p} ramifies in the {base:?} ring")));
    }
    if let Some(&(_, _, disc_prime, _)) = RELATIVE_DISCRIMINANTS.iter().find(|e| e.0 == base && e.1 == m) {
        if p == disc_prime {
            return Err(Error::Unsupported(format!("p={p} divides the relative discriminant")));
        }
    }
    // F(ζ_m) = ℚ(ζ_N) with N = lcm(q, m)
    let n_big = (q as i64).lcm(&(m as i64));
    let f_total = mult_order((p % n_big as u64) as i64, n_big)?;
    let f_base = mult_order((p % q) as i64, q as i64)?;
    let relative_degree = totient(n_big as u32) as u64 / 2;
    let f = f_total / f_base;
    let (base_split, base_prime) = if f_base == 1 {
        let z = norm_representative(base, p)
            .ok_or_else(|| Error::InvalidArgument(format!("no element of norm {p}")))?;
        (BaseSplit::Split, z)
    } else {
        (BaseSplit::Inert, BaseScalar::from_int(base, p))
    };
    let base_prime_is_prime = match base {
        BaseRing::Gaussian => gaussian_prime_check(&base_prime)?,
        BaseRing::Eisenstein => eisenstein_prime_check(&base_prime)?,
    };
    Ok(EfgReport {
        m,
        p,
        base,
        base_split,
        base_prime: base_prime.to_string(),
        base_prime_is_prime,
        relative_degree,
        e: 1,
        f,
        g: relative_degree / f,
        completely_split_over_base: f == 1,
        cyclotomic,
    })
}

/// Evaluate `poly` at `x` over `𝔽_p`.
pub fn eval_mod(poly: &[u64], x: u64, p: u64) -> u64 {
    poly.iter().rev().fold(0, |acc, &c| (mul_mod(acc, x, p) + c) % p)
}

impl SplittingReport {
    /// Product of the listed factors equals `Φ_m mod p`.
    pub fn factors_multiply_back(&self) -> bool {
        let prod = self.factors.iter().fold(vec![1u64], |acc, f| fp::mul(&acc, f, self.p));
        prod == phi_mod_p(self.m, self.p)
    }
}

/// `BigInt` view of a coefficient list, for display.
pub fn factor_to_string(f: &[u64]) -> String {
    let mut terms = Vec::new();
    for (k, &c) in f.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let coeff = if c == 1 && k > 0 { String::new() } else { c.to_string() };
        terms.push(match k {
            0 => coeff,
            1 => format!("{coeff}X"),
            _ => format!("{coeff}X^{k}"),
        });
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}
