use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::code::CodeDefinition;

pub const SHAPING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapingReport {
    pub code: String,
    pub row_norms: Vec<f64>,
    pub col_norms: Vec<f64>,
    /// `‖RᴴR − I‖_F`.
    pub unitarity_residual: f64,
    /// `𝔼|S_rc|²` under unit-energy symbols, normalized codeword `S`.
    pub per_antenna_energy: Vec<Vec<f64>>,
    /// `𝔼‖R s_i‖² / 𝔼‖s_i‖²` per layer (C3.1 wants 1).
    pub layer_energy_ratio: Vec<f64>,
    /// Average energy spent on each symbol `s_ij`, layer-major (C3.2 wants
    /// these equal).
    pub symbol_energy: Vec<f64>,
    pub c31: bool,
    pub c32: bool,
    pub c4: bool,
    pub unit_rows_and_cols: bool,
    pub unitary: bool,
    pub satisfies_c31_c32_c4: bool,
}

fn all_close(xs: impl IntoIterator<Item = f64>, target: f64) -> bool {
    xs.into_iter().all(|x| (x - target).abs() <= SHAPING_TOLERANCE)
}

fn all_equal(xs: &[f64]) -> bool {
    xs.first().is_none_or(|&x0| all_close(xs.iter().copied(), x0))
}

pub fn shaping_report(code: &CodeDefinition) -> ShapingReport {
    let n = code.nt();
    let r = code.layer_generator();
    let row_norms: Vec<f64> = (0..n).map(|k| r.row(k).norm()).collect();
    let col_norms: Vec<f64> = (0..n).map(|k| r.column(k).norm()).collect();
    let gram = r.adjoint() * &r;
    let unitarity_residual = (gram - DMatrix::<Complex64>::identity(n, n)).norm();

    let weights = code.weight_matrices();
    let per_antenna_energy: Vec<Vec<f64>> = (0..n)
        .map(|row| {
            (0..n)
                .map(|col| weights.iter().map(|a| a[(row, col)].norm_sqr()).sum())
                .collect()
        })
        .collect();
    let symbol_energy: Vec<f64> = weights.iter().map(|a| a.norm_squared()).collect();
    // 𝔼‖D_i R s_i‖² = tr(RᴴR)·E with |γ| = 1, per unit of 𝔼‖s_i‖² = n E
    let layer_energy_ratio: Vec<f64> = (0..n)
        .map(|i| {
            let d = code.layer_scaler(i).expect("layer in range");
            (d * &r).norm_squared() / n as f64
        })
        .collect();

    let c31 = all_close(layer_energy_ratio.iter().copied(), 1.0);
    let c32 = all_equal(&symbol_energy);
    let c4 = all_equal(&per_antenna_energy.concat());
    let unit_rows_and_cols = all_close(row_norms.iter().chain(&col_norms).copied(), 1.0);
    let unitary = unitarity_residual <= SHAPING_TOLERANCE;
    ShapingReport {
        code: code.name().to_string(),
        row_norms,
        col_norms,
        unitarity_residual,
        per_antenna_energy,
        layer_energy_ratio,
        symbol_energy,
        c31,
        c32,
        c4,
        unit_rows_and_cols,
        unitary,
        satisfies_c31_c32_c4: c31 && c32 && c4,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c4_residual_matches_direct_product() {
        let c4 = CodeDefinition::builtin("C4").unwrap();
        let rep = shaping_report(&c4);
        // RᴴR = (5I − J)/4 so RᴴR − I = (I − J)/4: twelve entries of −1/4
        let direct = (12.0f64 / 16.0).sqrt();
        assert!((rep.unitarity_residual - direct).abs() < 1e-9);
        assert!((rep.unitarity_residual - 3f64.sqrt() / 2.0).abs() < 1e-9);
        assert!(rep.unit_rows_and_cols && rep.satisfies_c31_c32_c4 && !rep.unitary);
    }

    #[test]
    fn c6_rows_and_cols() {
        let c6 = CodeDefinition::builtin("C6").unwrap();
        let rep = shaping_report(&c6);
        assert!(rep.row_norms.iter().chain(&rep.col_norms).all(|x| (x - 1.0).abs() < 1e-12));
        assert!(rep.satisfies_c31_c32_c4 && !rep.unitary);
        for row in &rep.per_antenna_energy {
            for &e in row {
                assert!((e - 1.0).abs() < 1e-9);
            }
        }
    }
}
