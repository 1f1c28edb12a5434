use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::code::ComplexMatrix;

/// Circularly symmetric `CN(0, 1)`: real and imaginary parts `N(0, 1/2)`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `n_r × n_t` i.i.d. `CN(0, 1)` fading.
pub fn sample_channel<R: Rng + ?Sized>(nr: usize, nt: usize, rng: &mut R) -> ComplexMatrix {
    DMatrix::from_fn(nr, nt, |_, _| complex_normal(rng))
}

/// `n_r × T` i.i.d. `CN(0, 1)` noise.
pub fn sample_noise<R: Rng + ?Sized>(nr: usize, t: usize, rng: &mut R) -> ComplexMatrix {
    DMatrix::from_fn(nr, t, |_, _| complex_normal(rng))
}
