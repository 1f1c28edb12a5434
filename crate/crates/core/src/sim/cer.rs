use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::channel::{sample_channel, sample_noise};
use super::lattice::{exhaustive_ml_decode, realify, sphere_decode, Transmitter, EXHAUSTIVE_LIMIT};
use crate::code::CodeDefinition;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng::substream;

pub const DEFAULT_TARGET_ERRORS: u64 = 100;
pub const DEFAULT_MAX_TRIALS: u64 = 1_000_000;

const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decoder {
    #[default]
    Sphere,
    Exhaustive,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub code: CodeDefinition,
    /// Constellation size `M`.
    pub constellation: u32,
    pub nr: usize,
    pub snr_db: Vec<f64>,
    pub target_errors: u64,
    pub max_trials: u64,
    pub seed: u64,
    pub decoder: Decoder,
    pub execution: Execution,
    /// Trials simulated per scheduling round; affects speed only.
    pub batch_size: u64,
}

impl SimConfig {
    pub fn new(code: CodeDefinition, constellation: u32, nr: usize, snr_db: Vec<f64>, seed: u64) -> Self {
        SimConfig {
            code,
            constellation,
            nr,
            snr_db,
            target_errors: DEFAULT_TARGET_ERRORS,
            max_trials: DEFAULT_MAX_TRIALS,
            seed,
            decoder: Decoder::Sphere,
            execution: Execution::Parallel,
            batch_size: 512,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.nr == 0 {
            return bad("nr must be at least 1".into());
        }
        if self.snr_db.is_empty() {
            return bad("SNR list is empty".into());
        }
        if let Some(s) = self.snr_db.iter().find(|s| !s.is_finite()) {
            return bad(format!("SNR {s} dB is not finite"));
        }
        if self.target_errors == 0 {
            return bad("target error count must be positive".into());
        }
        if self.max_trials < self.target_errors {
            return bad(format!(
                "max trials {} is below the target of {} errors",
                self.max_trials, self.target_errors
            ));
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive".into());
        }
        let cons = self.code.constellation(self.constellation)?;
        if self.decoder == Decoder::Exhaustive {
            let size = (cons.size() as f64).powi(self.code.num_symbols() as i32);
            if size > EXHAUSTIVE_LIMIT {
                return Err(Error::TooLarge {
                    size,
                    limit: EXHAUSTIVE_LIMIT,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CerPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub errors: u64,
    pub cer: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Mean `‖√ρ S‖²/(ρT)` over the simulated blocks.
    pub mean_energy_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CerCurve {
    pub code: String,
    pub constellation: String,
    pub nr: usize,
    pub seed: u64,
    pub decoder: Decoder,
    pub points: Vec<CerPoint>,
}

/// 95% Wilson score interval.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

struct Outcome {
    error: bool,
    energy: f64,
}

fn trial(
    tx: &Transmitter,
    config: &SimConfig,
    point: usize,
    rho: f64,
    index: u64,
) -> Result<Outcome> {
    let mut rng = substream(config.seed, point as u64, index);
    let alphabet = tx.constellation().pam_levels();
    let h = sample_channel(config.nr, tx.nt(), &mut rng);
    let coords: Vec<i64> = (0..2 * tx.num_symbols())
        .map(|_| alphabet[rng.random_range(0..alphabet.len())])
        .collect();
    let noise = sample_noise(config.nr, tx.block_length(), &mut rng);
    let model = tx.lattice(&h, rho)?;
    let noise = realify(&DVector::from_column_slice(noise.as_slice()));
    let y = model.apply(&coords) + noise;
    let decoded = match config.decoder {
        Decoder::Sphere => sphere_decode(&model, &y)?,
        Decoder::Exhaustive => exhaustive_ml_decode(&model, &y)?,
    };
    let energy = tx.codeword(&coords).norm_squared() / tx.block_length() as f64;
    Ok(Outcome {
        error: decoded != coords,
        energy,
    })
}

pub fn run_cer(config: &SimConfig) -> Result<CerCurve> {
    run_cer_with(config, |_| {})
}

/// Simulates each SNR point until `target_errors` codeword errors or
/// `max_trials` trials. Trial `t` at point `p` draws from its own
/// substream, so the curve depends only on the seed.
pub fn run_cer_with(config: &SimConfig, mut progress: impl FnMut(&CerPoint)) -> Result<CerCurve> {
    config.validate()?;
    let cons = config.code.constellation(config.constellation)?;
    let tx = Transmitter::new(&config.code, &cons)?;
    let mut points = Vec::with_capacity(config.snr_db.len());
    for (p, &snr_db) in config.snr_db.iter().enumerate() {
        let rho = 10f64.powf(snr_db / 10.0);
        let (mut trials, mut errors, mut energy) = (0u64, 0u64, 0.0f64);
        'point: while trials < config.max_trials {
            let hi = (trials + config.batch_size).min(config.max_trials);
            let batch = config
                .execution
                .map_range(trials, hi, |t| (t, trial(&tx, config, p, rho, t)));
            for (t, outcome) in batch {
                let o = outcome.map_err(|e| Error::Trial {
                    trial: t,
                    snr_db,
                    source: Box::new(e),
                })?;
                trials += 1;
                energy += o.energy;
                if o.error {
                    errors += 1;
                    if errors >= config.target_errors {
                        break 'point;
                    }
                }
            }
        }
        let (ci_low, ci_high) = wilson_interval(errors, trials);
        let point = CerPoint {
            snr_db,
            trials,
            errors,
            cer: errors as f64 / trials as f64,
            ci_low,
            ci_high,
            mean_energy_ratio: energy / trials as f64,
        };
        progress(&point);
        points.push(point);
    }
    Ok(CerCurve {
        code: config.code.name().to_string(),
        constellation: cons.to_string(),
        nr: config.nr,
        seed: config.seed,
        decoder: config.decoder,
        points,
    })
}

impl CerCurve {
    pub const CSV_HEADER: [&'static str; 9] =
        ["code", "constellation", "nr", "snr_db", "trials", "errors", "cer", "ci_low", "ci_high"];

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
        w.write_record(Self::CSV_HEADER).map_err(io)?;
        for p in &self.points {
            w.write_record([
                self.code.clone(),
                self.constellation.clone(),
                self.nr.to_string(),
                p.snr_db.to_string(),
                p.trials.to_string(),
                p.errors.to_string(),
                p.cer.to_string(),
                p.ci_low.to_string(),
                p.ci_high.to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
