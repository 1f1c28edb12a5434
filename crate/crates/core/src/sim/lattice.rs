//! Real-valued lattice model of `vec(Y) = √ρ (I_T ⊗ H) G s + vec(N)` and
//! exact ML detection over the PAM coordinate box.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::code::{CodeDefinition, ComplexMatrix, SymbolBlock};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::scalar::{BaseRing, BaseScalar};

/// Largest codebook the brute-force decoder will enumerate.
pub const EXHAUSTIVE_LIMIT: f64 = 1e6;

/// `[Re v; Im v]`.
pub fn realify(v: &DVector<Complex64>) -> DVector<f64> {
    let n = v.len();
    DVector::from_fn(2 * n, |r, _| if r < n { v[r].re } else { v[r - n].im })
}

/// Energy-normalized generator of a code for one constellation.
#[derive(Debug, Clone)]
pub struct Transmitter {
    nt: usize,
    block_length: usize,
    ring: BaseRing,
    /// `G` scaled so that `𝔼‖G s‖² = T`.
    generator: ComplexMatrix,
    alphabet: Vec<i64>,
    constellation: Constellation,
}

impl Transmitter {
    pub fn new(code: &CodeDefinition, constellation: &Constellation) -> Result<Self> {
        if code.ring() != constellation.ring() {
            return Err(Error::RingMismatch {
                left: code.ring(),
                right: constellation.ring(),
            });
        }
        let scale = code.transmit_scale(constellation.average_energy_f64());
        Ok(Transmitter {
            nt: code.nt(),
            block_length: code.block_length(),
            ring: code.ring(),
            generator: code.generator() * Complex64::from(scale),
            alphabet: constellation.pam_levels(),
            constellation: *constellation,
        })
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn num_symbols(&self) -> usize {
        self.generator.ncols()
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn generator(&self) -> &ComplexMatrix {
        &self.generator
    }

    /// Complex symbols for interleaved coordinates `(a_0, b_0, a_1, …)`.
    pub fn symbols(&self, coords: &[i64]) -> DVector<Complex64> {
        let mu = self.ring.generator();
        DVector::from_fn(coords.len() / 2, |k, _| {
            Complex64::from(coords[2 * k] as f64) + mu * coords[2 * k + 1] as f64
        })
    }

    pub fn block(&self, coords: &[i64]) -> SymbolBlock {
        let entries = coords
            .chunks(2)
            .map(|ab| BaseScalar::new(self.ring, ab[0], ab[1]))
            .collect();
        SymbolBlock::from_entries(self.nt, entries).expect("coordinate count matches code")
    }

    pub fn coords(&self, s: &SymbolBlock) -> Vec<i64> {
        s.entries()
            .iter()
            .flat_map(|e| {
                use num_traits::ToPrimitive;
                [e.re_part().to_i64().unwrap(), e.im_part().to_i64().unwrap()]
            })
            .collect()
    }

    /// `vec(S)` of the normalized codeword.
    pub fn codeword(&self, coords: &[i64]) -> DVector<Complex64> {
        &self.generator * self.symbols(coords)
    }

    pub fn lattice(&self, h: &ComplexMatrix, rho: f64) -> Result<RealLatticeModel> {
        if h.ncols() != self.nt {
            return Err(Error::Dimension(format!(
                "channel has {} transmit antennas, code needs {}",
                h.ncols(),
                self.nt
            )));
        }
        let (nr, t, k) = (h.nrows(), self.block_length, self.num_symbols());
        let mu = self.ring.generator();
        let sqrt_rho = Complex64::from(rho.sqrt());
        let mut effective = ComplexMatrix::zeros(nr * t, k);
        for slot in 0..t {
            let g_rows = self.generator.rows(slot * self.nt, self.nt);
            effective
                .rows_mut(slot * nr, nr)
                .copy_from(&(h * g_rows * sqrt_rho));
        }
        let rows = 2 * nr * t;
        let mut matrix = DMatrix::<f64>::zeros(rows, 2 * k);
        for sym in 0..k {
            let col = effective.column(sym).into_owned();
            matrix.set_column(2 * sym, &realify(&col));
            matrix.set_column(2 * sym + 1, &realify(&(col * mu)));
        }
        Ok(RealLatticeModel {
            matrix,
            alphabet: self.alphabet.clone(),
        })
    }
}

/// `y_real ≈ matrix · x`, `x` ranging over `alphabet^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealLatticeModel {
    pub matrix: DMatrix<f64>,
    pub alphabet: Vec<i64>,
}

impl RealLatticeModel {
    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn apply(&self, coords: &[i64]) -> DVector<f64> {
        let x = DVector::from_iterator(coords.len(), coords.iter().map(|&c| c as f64));
        &self.matrix * x
    }

    pub fn metric(&self, y: &DVector<f64>, coords: &[i64]) -> f64 {
        (y - self.apply(coords)).norm_squared()
    }

    pub fn codebook_size(&self) -> f64 {
        (self.alphabet.len() as f64).powi(self.dim() as i32)
    }

    fn tolerance(y: &DVector<f64>) -> f64 {
        1e-9 * (1.0 + y.norm_squared())
    }
}

/// Model of `code` under channel `h` at linear SNR `rho`.
pub fn build_real_lattice(
    code: &CodeDefinition,
    h: &ComplexMatrix,
    rho: f64,
    constellation: &Constellation,
) -> Result<RealLatticeModel> {
    Transmitter::new(code, constellation)?.lattice(h, rho)
}

/// Keeps the best point; within `tol` of the best metric the
/// lexicographically smaller vector wins.
fn better(metric: f64, x: &[i64], best: f64, best_x: &[i64], tol: f64) -> bool {
    if metric < best - tol {
        return true;
    }
    metric <= best + tol && x.cmp(best_x) == Ordering::Less
}

/// Column order of a sorted QR decomposition: greedy Gram–Schmidt that
/// takes the remaining column of least residual norm at each step.
fn sorted_qr_order(m: &DMatrix<f64>) -> Vec<usize> {
    let n = m.ncols();
    let mut q = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut norms: Vec<f64> = (0..n).map(|j| q.column(j).norm_squared()).collect();
    for i in 0..n {
        let k = (i..n)
            .min_by(|&a, &b| norms[a].partial_cmp(&norms[b]).unwrap_or(Ordering::Equal))
            .unwrap();
        q.swap_columns(i, k);
        perm.swap(i, k);
        norms.swap(i, k);
        let len = norms[i].max(0.0).sqrt();
        if len == 0.0 {
            continue;
        }
        let qi = q.column(i) / len;
        for j in i + 1..n {
            let rij = qi.dot(&q.column(j));
            q.column_mut(j).axpy(-rij, &qi, 1.0);
            norms[j] -= rij * rij;
        }
    }
    perm
}

/// Exact ML point by sorted QR and depth-first Schnorr–Euchner enumeration with
/// initial radius ∞.
pub fn sphere_decode(model: &RealLatticeModel, y: &DVector<f64>) -> Result<Vec<i64>> {
    let n = model.dim();
    if model.matrix.nrows() < n {
        return Err(Error::RankDeficient(0.0));
    }
    if y.len() != model.matrix.nrows() {
        return Err(Error::Dimension(format!(
            "received vector has {} entries, model expects {}",
            y.len(),
            model.matrix.nrows()
        )));
    }
    // detection starts from the last position, so strong columns go last
    let perm = sorted_qr_order(&model.matrix);
    let permuted = DMatrix::from_fn(model.matrix.nrows(), n, |i, j| model.matrix[(i, perm[j])]);
    let qr = permuted.qr();
    let rm = qr.r();
    let scale = rm.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for k in 0..n {
        if rm[(k, k)].abs() <= 1e-12 * scale.max(1e-300) {
            return Err(Error::RankDeficient(rm[(k, k)].abs()));
        }
    }
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let z = &qty.as_slice()[..n];
    // ‖y − Mx‖² = ‖z − Rx‖² + (‖y‖² − ‖z‖²)
    let offset = (y.norm_squared() - z.iter().map(|v| v * v).sum::<f64>()).max(0.0);
    let tol = RealLatticeModel::tolerance(y);
    // row-major upper triangle
    let r: Vec<f64> = (0..n * n).map(|k| rm[(k / n, k % n)]).collect();

    let alphabet = &model.alphabet;
    let l = alphabet.len();
    let mut x = vec![0i64; n];
    let mut best_x = vec![i64::MAX; n];
    // `x` in original coordinate order, for the tie rule
    let mut unpermuted = vec![0i64; n];
    let mut best = f64::INFINITY;
    // per level: alphabet indices in Schnorr–Euchner order and the cursor
    let mut order = vec![0usize; n * l];
    let mut cursor = vec![0usize; n];
    let mut partial = vec![0.0f64; n + 1];
    // z[level] − Σ_{j>level} r[level][j]·x[j]
    let mut residual = vec![0.0f64; n];

    let enter = |level: usize, x: &[i64], order: &mut [usize], cursor: &mut [usize], residual: &mut [f64]| {
        let row = &r[level * n..(level + 1) * n];
        let mut s = z[level];
        for j in level + 1..n {
            s -= row[j] * x[j] as f64;
        }
        residual[level] = s;
        let c = s / row[level];
        let idx = &mut order[level * l..(level + 1) * l];
        for (k, v) in idx.iter_mut().enumerate() {
            *v = k;
        }
        idx.sort_unstable_by(|&a, &b| {
            let da = (alphabet[a] as f64 - c).abs();
            let db = (alphabet[b] as f64 - c).abs();
            da.partial_cmp(&db).unwrap().then(alphabet[a].cmp(&alphabet[b]))
        });
        cursor[level] = 0;
    };

    let mut level = n - 1;
    enter(level, &x, &mut order, &mut cursor, &mut residual);
    loop {
        if cursor[level] >= l {
            if level == n - 1 {
                break;
            }
            level += 1;
            continue;
        }
        let a = order[level * l + cursor[level]];
        cursor[level] += 1;
        x[level] = alphabet[a];
        let s = residual[level] - r[level * n + level] * x[level] as f64;
        let metric = partial[level + 1] + s * s;
        if metric > best - offset + tol {
            // later candidates at this level are farther from the center
            cursor[level] = l;
            continue;
        }
        if level == 0 {
            let total = metric + offset;
            for (k, &pk) in perm.iter().enumerate() {
                unpermuted[pk] = x[k];
            }
            if better(total, &unpermuted, best, &best_x, tol) {
                best = best.min(total);
                best_x.copy_from_slice(&unpermuted);
            }
            continue;
        }
        partial[level] = metric;
        level -= 1;
        enter(level, &x, &mut order, &mut cursor, &mut residual);
    }
    Ok(best_x)
}

/// Brute-force ML over the whole coordinate box, same tie rule.
pub fn exhaustive_ml_decode(model: &RealLatticeModel, y: &DVector<f64>) -> Result<Vec<i64>> {
    let size = model.codebook_size();
    if size > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge {
            size,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let n = model.dim();
    let l = model.alphabet.len();
    let tol = RealLatticeModel::tolerance(y);
    let mut best = f64::INFINITY;
    let mut best_x = vec![i64::MAX; n];
    let mut digits = vec![0usize; n];
    let mut x = vec![0i64; n];
    for _ in 0..size as usize {
        for (k, &d) in digits.iter().enumerate() {
            x[k] = model.alphabet[d];
        }
        let metric = model.metric(y, &x);
        if better(metric, &x, best, &best_x, tol) {
            best = best.min(metric);
            best_x.copy_from_slice(&x);
        }
        // lexicographic increment from the last coordinate
        for k in (0..n).rev() {
            digits[k] += 1;
            if digits[k] < l {
                break;
            }
            digits[k] = 0;
        }
    }
    Ok(best_x)
}
