pub mod analysis;
pub mod code;
pub mod constellation;
pub mod cyclotomic;
pub mod error;
pub mod exec;
pub mod number_theory;
pub mod rng;
pub mod scalar;
pub mod sim;
