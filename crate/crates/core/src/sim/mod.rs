//! Quasi-static Rayleigh MIMO simulation, `Y = √ρ H S + N`.

mod cer;
mod channel;
mod lattice;

pub use cer::{
    run_cer, run_cer_with, wilson_interval, CerCurve, CerPoint, Decoder, SimConfig, DEFAULT_MAX_TRIALS,
    DEFAULT_TARGET_ERRORS,
};
pub use channel::{complex_normal, sample_channel, sample_noise};
pub use lattice::{
    build_real_lattice, exhaustive_ml_decode, realify, sphere_decode, RealLatticeModel, Transmitter,
    EXHAUSTIVE_LIMIT,
};
