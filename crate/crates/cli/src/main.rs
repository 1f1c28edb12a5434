use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use stbc_lab::analysis::{
    cc_mutual_info_mc, gaussian_capacity, min_det_search_with, norm_nonrepresentability_sample,
    nvd_sampling_test, shaping_report, MiInput, SearchOptions,
};
use stbc_lab::code::{CodeDefinition, ComplexMatrix};
use stbc_lab::constellation::{Constellation, ConstellationKind};
use stbc_lab::error::{Error, Result};
use stbc_lab::exec::{configure_threads, Execution};
use stbc_lab::number_theory::{cyclotomic_factor_degrees, efg_report};
use stbc_lab::rng::substream;
use stbc_lab::scalar::BaseRing;
use stbc_lab::sim::{run_cer_with, sample_channel, Decoder, SimConfig, DEFAULT_MAX_TRIALS, DEFAULT_TARGET_ERRORS};

#[derive(Parser)]
#[command(name = "stbc-lab", version, about = "Space-time block codes from cyclic division algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect or check a code (built-in name or JSON definition file).
    #[command(subcommand)]
    Code(CodeCommand),
    /// Certify the normalized minimum determinant.
    Mindet(MindetArgs),
    /// Monte Carlo codeword error rate over Rayleigh fading.
    Simulate(SimulateArgs),
    /// Splitting checks for the cyclotomic extensions.
    VerifyNt(VerifyNtArgs),
    /// Gaussian capacity and constellation-constrained mutual information.
    Capacity(CapacityArgs),
}

#[derive(Subcommand)]
enum CodeCommand {
    Show {
        code: String,
        /// JSON only.
        #[arg(long)]
        json: bool,
    },
    Check(CheckArgs),
}

#[derive(Args)]
struct CheckArgs {
    code: String,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 50)]
    bound: i64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct MindetArgs {
    code: String,
    #[arg(long = "M", default_value_t = 4)]
    m: u32,
    /// Maximum number of nonzero symbol differences.
    #[arg(long, default_value_t = 1)]
    support: usize,
    /// Stop after this many determinants.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecoderArg {
    Sphere,
    Exhaustive,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    code: String,
    #[arg(long)]
    nr: usize,
    #[arg(long = "M", default_value_t = 4)]
    m: u32,
    /// SNR grid in dB, `start:step:stop` or a single value.
    #[arg(long)]
    snr: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = DecoderArg::Sphere)]
    decoder: DecoderArg,
    #[arg(long, default_value_t = DEFAULT_TARGET_ERRORS)]
    target_errors: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_TRIALS)]
    max_trials: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress the per-point log on stderr.
    #[arg(long)]
    quiet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaseArg {
    Gaussian,
    Eisenstein,
}

impl From<BaseArg> for BaseRing {
    fn from(b: BaseArg) -> Self {
        match b {
            BaseArg::Gaussian => BaseRing::Gaussian,
            BaseArg::Eisenstein => BaseRing::Eisenstein,
        }
    }
}

#[derive(Args)]
struct VerifyNtArgs {
    #[arg(long, requires = "p")]
    m: Option<u32>,
    #[arg(long, requires = "m")]
    p: Option<u64>,
    #[arg(long, requires = "m")]
    base: Option<BaseArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelArg {
    Identity,
    Rayleigh,
}

#[derive(Args)]
struct CapacityArgs {
    #[arg(long, default_value_t = 1)]
    nr: usize,
    #[arg(long, default_value_t = 1)]
    nt: usize,
    /// SNR in dB.
    #[arg(long)]
    snr: f64,
    #[arg(long = "M", default_value_t = 4)]
    m: u32,
    #[arg(long, value_enum, default_value_t = KindArg::Qam)]
    kind: KindArg,
    #[arg(long, value_enum, default_value_t = ChannelArg::Rayleigh)]
    channel: ChannelArg,
    /// Evaluate the coded mutual information of this code.
    #[arg(long, conflicts_with = "kind")]
    code: Option<String>,
    #[arg(long, default_value_t = 2000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Qam,
    Hex,
}

fn load_code(reference: &str) -> Result<CodeDefinition> {
    if CodeDefinition::builtin_names().contains(&reference) {
        return CodeDefinition::builtin(reference);
    }
    let path = Path::new(reference);
    if path.is_file() {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        if text.trim().is_empty() {
            return Err(Error::InvalidCode(format!("{} is empty", path.display())));
        }
        return CodeDefinition::from_json(&text);
    }
    Err(Error::UnknownCode(reference.to_string()))
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn cmd_code_show(reference: &str, json_only: bool) -> Result<()> {
    let code = load_code(reference)?;
    let r = code.layer_generator();
    let g = code.generator();
    let n = code.nt();
    let rows: Vec<f64> = (0..n).map(|k| r.row(k).norm()).collect();
    let cols: Vec<f64> = (0..n).map(|k| r.column(k).norm()).collect();
    if !json_only {
        println!("code: {}", code.name());
        println!(
            "algebra: F = Q({}), K = F(zeta_{}), tau: zeta -> zeta^{}",
            code.ring().symbol(),
            code.m(),
            code.tau_exp()
        );
        println!("nt = T = {}, symbols = {}", n, code.num_symbols());
        println!("gamma = {}", code.gamma());
        println!("lambda = {}", code.lambda());
        println!("constellation: {}", code.constellation_kind().name());
        let basis: Vec<String> = code.basis().iter().map(|b| b.to_string()).collect();
        println!("basis: [{}]", basis.join(", "));
        println!("R row norms: {}", fmt_list(&rows));
        println!("R col norms: {}", fmt_list(&cols));
        println!("G: {}x{}", g.nrows(), g.ncols());
    }
    print_json(&json!({
        "definition": code.to_json(),
        "r_row_norms": rows,
        "r_col_norms": cols,
        "r_shape": [r.nrows(), r.ncols()],
        "g_shape": [g.nrows(), g.ncols()],
    }))
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.12}")).collect::<Vec<_>>().join(" ")
}

fn cmd_code_check(args: &CheckArgs) -> Result<bool> {
    let code = load_code(&args.code)?;
    let shaping = shaping_report(&code);
    let nvd = nvd_sampling_test(&code, args.samples, args.bound, args.seed, Execution::Parallel)?;
    let norm = norm_nonrepresentability_sample(&code, args.samples, args.bound, args.seed, Execution::Parallel)?;
    let all = shaping.satisfies_c31_c32_c4 && shaping.unit_rows_and_cols && nvd.passed && norm.passed;
    if args.json {
        print_json(&json!({
            "code": code.name(),
            "shaping": shaping,
            "nvd": nvd,
            "norm_sampling": norm,
            "passed": all,
        }))?;
        return Ok(all);
    }
    let line = |ok: bool, what: &str| println!("{} {what}", if ok { "PASS" } else { "FAIL" });
    line(shaping.c31, "C3.1 layer energy preserved on average");
    line(shaping.c32, "C3.2 equal average energy per symbol");
    line(shaping.c4, "C4 uniform average energy per antenna per slot");
    line(
        shaping.unit_rows_and_cols,
        &format!("rows and columns of R have unit norm (max deviation {:.1e})", max_dev(&shaping)),
    );
    if shaping.unitary {
        println!("note: R is unitary");
    } else {
        println!(
            "note: R is not unitary (||R^H R - I||_F = {:.12})",
            shaping.unitarity_residual
        );
    }
    line(
        nvd.passed,
        &format!(
            "NVD: {} random blocks, |det|^2 >= 1 and det in base ring (min {})",
            nvd.samples, nvd.min_abs_det_sq
        ),
    );
    line(
        norm.passed,
        &format!("non-norm: N(a) != gamma^t for {} random a", norm.samples),
    );
    Ok(all)
}

fn max_dev(s: &stbc_lab::analysis::ShapingReport) -> f64 {
    s.row_norms
        .iter()
        .chain(&s.col_norms)
        .map(|x| (x - 1.0).abs())
        .fold(0.0, f64::max)
}

fn cmd_mindet(args: &MindetArgs) -> Result<()> {
    let code = load_code(&args.code)?;
    let cons = code.constellation(args.m)?;
    let opts = SearchOptions {
        budget: args.budget,
        execution: Execution::Parallel,
    };
    let cert = min_det_search_with(&code, &cons, args.support, &opts)?;
    print_json(&cert)
}

/// `start:step:stop` (inclusive) or a single value.
fn parse_snr(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("bad SNR grid '{spec}' (expected start:step:stop)"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    match parts.as_slice() {
        [x] => Ok(vec![*x]),
        [start, step, stop] => {
            if *step <= 0.0 || stop < start {
                return Err(bad());
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..n).map(|k| start + k as f64 * step).collect())
        }
        _ => Err(bad()),
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let code = load_code(&args.code)?;
    let mut cfg = SimConfig::new(code, args.m, args.nr, parse_snr(&args.snr)?, args.seed);
    cfg.target_errors = args.target_errors;
    cfg.max_trials = args.max_trials;
    cfg.decoder = match args.decoder {
        DecoderArg::Sphere => Decoder::Sphere,
        DecoderArg::Exhaustive => Decoder::Exhaustive,
    };
    let quiet = args.quiet;
    let curve = run_cer_with(&cfg, |p| {
        if !quiet {
            eprintln!(
                "snr {:>6.2} dB: {} errors / {} trials, cer {:.3e} [{:.3e}, {:.3e}]",
                p.snr_db, p.errors, p.trials, p.cer, p.ci_low, p.ci_high
            );
        }
    })?;
    let text = match args.format {
        Format::Csv => curve.to_csv()?,
        Format::Json => curve.to_json()? + "\n",
    };
    match &args.out {
        Some(path) => fs::write(path, text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?,
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Error::InvalidArgument(format!("stdout: {e}")))?;
        }
    }
    Ok(())
}

fn cmd_verify_nt(args: &VerifyNtArgs) -> Result<bool> {
    let mut reports = Vec::new();
    let mut all = true;
    match (args.m, args.p) {
        (Some(m), Some(p)) => {
            let split = cyclotomic_factor_degrees(m, p)?;
            let pass = split.methods_agree;
            all &= pass;
            let mut entry = json!({
                "check": format!("Phi_{m} over F_{p}"),
                "m": m,
                "p": p,
                "d": split.d,
                "g": split.g,
                "completely_split": split.completely_split,
                "methods_agree": split.methods_agree,
                "pass": pass,
                "splitting": split,
            });
            if let Some(base) = args.base {
                entry["efg"] = serde_json::to_value(efg_report(m, p, base.into())?)?;
            }
            reports.push(entry);
        }
        _ => {
            for (m, p, base, label) in [
                (5u32, 769u64, BaseRing::Gaussian, "-25+12i does not split completely in Z[i,zeta_5]"),
                (7, 97, BaseRing::Eisenstein, "3-8w does not split completely in Z[w,zeta_7]"),
            ] {
                let efg = efg_report(m, p, base)?;
                let expected_g = if m == 5 { 2 } else { 3 };
                let split = &efg.cyclotomic;
                let pass = split.methods_agree
                    && split.d == 2
                    && split.g == expected_g
                    && !split.completely_split
                    && efg.base_prime_is_prime
                    && !efg.completely_split_over_base;
                all &= pass;
                reports.push(json!({
                    "check": label,
                    "m": m,
                    "p": p,
                    "d": split.d,
                    "g": split.g,
                    "completely_split": split.completely_split,
                    "methods_agree": split.methods_agree,
                    "pass": pass,
                    "efg": efg,
                }));
            }
        }
    }
    print_json(&reports)?;
    Ok(all)
}

fn cmd_capacity(args: &CapacityArgs) -> Result<()> {
    let code = args.code.as_deref().map(load_code).transpose()?;
    let nt = code.as_ref().map_or(args.nt, |c| c.nt());
    let h: ComplexMatrix = match args.channel {
        ChannelArg::Identity => ComplexMatrix::identity(args.nr, nt),
        ChannelArg::Rayleigh => sample_channel(args.nr, nt, &mut substream(args.seed, u64::MAX, 0)),
    };
    let rho = 10f64.powf(args.snr / 10.0);
    let cons = match &code {
        Some(c) => c.constellation(args.m)?,
        None => {
            let kind = match args.kind {
                KindArg::Qam => ConstellationKind::Qam,
                KindArg::Hex => ConstellationKind::Hex,
            };
            Constellation::new(kind, args.m)?
        }
    };
    let input = match &code {
        Some(c) => MiInput::Coded(c),
        None => MiInput::Uncoded,
    };
    let cap = gaussian_capacity(&h, rho)?;
    let mi = cc_mutual_info_mc(&h, input, &cons, rho, args.samples, args.seed, Execution::Parallel)?;
    print_json(&json!({
        "nr": args.nr,
        "nt": nt,
        "snr_db": args.snr,
        "constellation": cons.to_string(),
        "code": code.as_ref().map(|c| c.name().to_string()),
        "gaussian_capacity": cap,
        "cc_mutual_info": mi.bits,
        "stderr": mi.stderr,
        "samples": mi.samples,
    }))
}

fn run(cli: Cli) -> Result<bool> {
    if let Ok(v) = std::env::var("STBC_LAB_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("STBC_LAB_THREADS='{v}' is not a positive integer")))?;
        configure_threads(n)?;
    }
    match cli.command {
        Command::Code(CodeCommand::Show { code, json }) => cmd_code_show(&code, json).map(|_| true),
        Command::Code(CodeCommand::Check(args)) => cmd_code_check(&args),
        Command::Mindet(args) => cmd_mindet(&args).map(|_| true),
        Command::Simulate(args) => cmd_simulate(&args).map(|_| true),
        Command::VerifyNt(args) => cmd_verify_nt(&args),
        Command::Capacity(args) => cmd_capacity(&args).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_grids() {
        assert_eq!(parse_snr("4:2:24").unwrap().len(), 11);
        assert_eq!(parse_snr("10").unwrap(), vec![10.0]);
        assert_eq!(parse_snr("0:0.5:1").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_snr("4:0:24").is_err());
        assert!(parse_snr("24:2:4").is_err());
        assert!(parse_snr("a:b").is_err());
    }
}
