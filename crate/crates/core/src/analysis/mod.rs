//! Exact certification and sampled checks of code properties.

mod capacity;
mod mindet;
mod nvd;
mod shaping;
mod table;

pub use capacity::{cc_mutual_info_mc, gaussian_capacity, MiEstimate, MiInput, ENUMERATION_LIMIT};
pub use mindet::{
    det_abs_sq, min_det_analytic_bound, min_det_search, min_det_search_with, normalized_det,
    ConstellationInfo, MinDetCertificate, SearchOptions, WitnessEntry,
};
pub use nvd::{
    norm_nonrepresentability_sample, nvd_sampling_test, relative_norm, NormSampleReport, NvdReport,
    NvdViolation,
};
pub use shaping::{shaping_report, ShapingReport, SHAPING_TOLERANCE};
pub use table::{reference_entry, ReferenceEntry, REFERENCE_TABLE};

use num_rational::BigRational;
use serde::Serializer;

pub(crate) fn ser_rational<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}
