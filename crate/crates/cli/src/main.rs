//! `ksl`: build gamma representations, torus spectra and Dixmier-trace estimates.
//!
//! Exit codes: 0 success, 2 configuration or invariant failure, 3 non-convergence.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use ksl_core::clifford::{
    self, build_gamma, classify_fundamental_symmetry, fundamental_symmetry_from_reflection, random_spacelike_reflection,
    verify_clifford_relations, Signature, ALGEBRAIC_TOL,
};
use ksl_core::io::{
    self, write_convergence_csv, write_json, write_spectrum_csv, GammaRepJson, MatrixSpec, ModelConfig, TraceReport,
};
use ksl_core::krein::{convergence_table, Estimator, EstimatorMethod, Window};
use ksl_core::linalg::max_diff;
use ksl_core::torus::{signature_target, volume_target, AlgebraElement, Observable, TorusModel};
use ksl_core::Report;

const EXIT_INVALID: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "ksl", version, about = "Numerical workbench for semi-Riemannian spectral triples")]
#[command(after_help = "Set KSL_THREADS to cap the number of worker threads.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the gamma matrices of signature (n, k) and verify them.
    Gamma(GammaArgs),
    /// Write the Δ_J spectrum of the truncated torus as CSV.
    Spectrum(SpectrumArgs),
    /// Estimate a Dixmier trace and compare it with its limit.
    Dixmier(DixmierArgs),
    /// Check whether a spinor matrix J̃ is an admissible fundamental symmetry.
    Classify(ClassifyArgs),
}

#[derive(Args)]
struct GammaArgs {
    /// Dimension n.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Number k of negative directions.
    #[arg(long, default_value_t = 0)]
    k: usize,
    /// Random reflections used for the classification round trip.
    #[arg(long, default_value_t = 8)]
    samples: usize,
    /// Seed for the random reflections.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (gamma.json, gamma_report.json); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    /// JSON model config; the flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dimension n [default: 2].
    #[arg(long)]
    n: Option<usize>,
    /// Number k of negative directions [default: 0].
    #[arg(long)]
    k: Option<usize>,
    /// Lattice cutoff M: modes with |y_i| <= M [default: 8 for spectrum, 32 for dixmier, 1 for classify].
    #[arg(long = "M")]
    cutoff: Option<usize>,
    /// Θ: a JSON matrix file or "zero" [default: zero].
    #[arg(long)]
    theta: Option<String>,
    /// Spacelike reflection: a JSON matrix file or "standard" [default: standard].
    #[arg(long)]
    reflection: Option<String>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Output directory (spectrum.csv); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObservableArg {
    /// Tr_ω(a Δ_J^{−n}), limit τ(a)/c(n).
    Volume,
    /// Ratio Tr_ω(D² Δ_J^{−n−2}) / Tr_ω(Δ_J^{−n}), limit (−1)^k (n − 2k)/n.
    Signature,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Slope,
    Tail,
}

#[derive(Args)]
struct DixmierArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value_t = ObservableArg::Volume)]
    observable: ObservableArg,
    /// Algebra element, e.g. "3*u:0,0+u:1,0" (volume observable only) [default: 1].
    #[arg(long)]
    a: Option<String>,
    #[arg(long, value_enum, default_value_t = MethodArg::Slope)]
    estimator: MethodArg,
    /// Fraction of ln N_end covered by the fit window.
    #[arg(long, default_value_t = 0.75)]
    window: f64,
    /// Output directory (report.json, convergence.csv); report to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// JSON matrix file holding J̃ (entries [re, im] or reals).
    #[arg(long)]
    j: PathBuf,
    /// Output directory (classify.json); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure carrying its exit code.
struct Exit(u8);

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_INVALID);
    }
    let result = match cli.command {
        Command::Gamma(args) => cmd_gamma(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Dixmier(args) => cmd_dixmier(args),
        Command::Classify(args) => cmd_classify(args),
    };
    match result {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(Exit(code))) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("KSL_THREADS") {
        let threads: usize = v.parse().with_context(|| format!("KSL_THREADS must be a positive integer, got '{v}'"))?;
        if threads == 0 {
            bail!("KSL_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    Ok(())
}

fn matrix_spec(value: &str, name: &str) -> Result<MatrixSpec> {
    if value == name {
        return Ok(MatrixSpec::Named(name.into()));
    }
    let text = fs::read_to_string(value).with_context(|| format!("reading matrix file {value}"))?;
    let rows: Vec<Vec<f64>> = serde_json::from_str(&text).with_context(|| format!("parsing matrix file {value}"))?;
    Ok(MatrixSpec::Matrix(rows))
}

impl ModelArgs {
    fn config(&self, default_cutoff: usize) -> Result<ModelConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
                ModelConfig::from_json(&text).with_context(|| format!("parsing config {}", path.display()))?
            }
            None => ModelConfig::standard(2, 0, default_cutoff),
        };
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(m) = self.cutoff {
            cfg.cutoff = m;
        }
        if let Some(t) = &self.theta {
            cfg.theta = matrix_spec(t, "zero")?;
        }
        if let Some(r) = &self.reflection {
            cfg.reflection = matrix_spec(r, "standard")?;
        }
        Ok(cfg)
    }

    fn build(&self, default_cutoff: usize) -> Result<TorusModel> {
        let cfg = self.config(default_cutoff)?;
        log::info!("model n={} k={} M={}", cfg.n, cfg.k, cfg.cutoff);
        Ok(cfg.build()?)
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, file: &str, value: &T) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            write_json(&dir.join(file), value)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, value)?;
            writeln!(stdout)?;
        }
    }
    Ok(())
}

fn cmd_gamma(args: GammaArgs) -> Result<Option<Exit>> {
    let sig = Signature::new(args.n, args.k)?;
    let rep = build_gamma(sig);
    let mut report = verify_clifford_relations(&rep, ALGEBRAIC_TOL);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    for sample in 0..args.samples {
        let r = random_spacelike_reflection(sig, &mut rng, 0.7);
        let err = fundamental_symmetry_from_reflection(&rep, &r)
            .and_then(|j| classify_fundamental_symmetry(&rep, &j))
            .map(|back| max_diff(&clifford::real_to_complex(back.matrix()), &clifford::real_to_complex(r.matrix())))
            .unwrap_or(f64::INFINITY);
        report.push(format!("classification_round_trip_{sample}"), err, 1e-10);
    }
    let summary = io::GammaReport {
        n: args.n,
        k: args.k,
        dim: rep.dim,
        passed: report.passed(),
        report: &report,
    };
    emit_json(args.out.as_deref(), "gamma.json", &GammaRepJson::from(&rep))?;
    if let Some(dir) = &args.out {
        emit_json(Some(dir), "gamma_report.json", &summary)?;
    }
    print_checks(&report);
    Ok((!report.passed()).then_some(Exit(EXIT_INVALID)))
}

fn print_checks(report: &Report) {
    for c in &report.checks {
        eprintln!(
            "{} {} (value {:.3e}, tolerance {:.1e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        );
    }
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<Option<Exit>> {
    let model = args.model.build(8)?;
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let file = fs::File::create(dir.join("spectrum.csv"))?;
            let mut w = std::io::BufWriter::new(file);
            write_spectrum_csv(&model, &mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = std::io::BufWriter::new(std::io::stdout().lock());
            write_spectrum_csv(&model, &mut w)?;
            w.flush()?;
        }
    }
    Ok(None)
}

fn cmd_dixmier(args: DixmierArgs) -> Result<Option<Exit>> {
    let model = args.model.build(32)?;
    let n = model.signature().n();
    let window = Window::new(args.window).with_context(|| format!("window fraction {} outside (0, 1]", args.window))?;
    let method = match args.estimator {
        MethodArg::Slope => EstimatorMethod::Slope,
        MethodArg::Tail => EstimatorMethod::Tail,
    };
    let estimator = Estimator { method, window };

    let (report, sums) = match args.observable {
        ObservableArg::Volume => {
            let a = match &args.a {
                Some(s) => AlgebraElement::parse(s, n)?,
                None => AlgebraElement::one(n),
            };
            let traces = model.partial_traces(&a, Observable::Volume)?;
            let est = estimator.estimate_complex(&traces)?;
            let target = a.tau().re * volume_target(n);
            let mut report = TraceReport::new("volume", &est.re, target);
            report.imag = Some(est.im.value);
            report.converged = est.converged();
            report.residual = est.re.residual.max(est.im.residual);
            (report, traces.iter().map(|z| z.re).collect::<Vec<_>>())
        }
        ObservableArg::Signature => {
            if args.a.is_some() {
                bail!("--a applies to the volume observable only");
            }
            let ratio = model.signature_ratio(estimator)?;
            let mut report = TraceReport::new("signature", &ratio.numerator, signature_target(model.signature()));
            report.value = ratio.value;
            report.rel_error = io::relative_error(ratio.value, report.target);
            report.residual = ratio.numerator.residual.max(ratio.denominator.residual);
            report.converged = ratio.converged;
            (report, model.unit_partial_sums(Observable::Signature))
        }
    };

    match &args.out {
        Some(dir) => {
            emit_json(Some(dir), "report.json", &report)?;
            let file = fs::File::create(dir.join("convergence.csv"))?;
            let mut w = std::io::BufWriter::new(file);
            write_convergence_csv(&convergence_table(&sums, window), &mut w)?;
            w.flush()?;
        }
        None => emit_json(None, "", &report)?,
    }
    eprintln!(
        "{} estimate {:.6} target {:.6} rel_error {:.3e}",
        report.observable, report.value, report.target, report.rel_error
    );
    if !report.converged {
        eprintln!(
            "not converged: relative residual {:.3e} over window {:?}",
            report.residual, report.window
        );
        return Ok(Some(Exit(EXIT_NOT_CONVERGED)));
    }
    Ok(None)
}

#[derive(Serialize)]
struct ClassifyOutput<'a> {
    n: usize,
    k: usize,
    admissible: bool,
    theta_generic: bool,
    reflection: &'a Option<Vec<Vec<f64>>>,
    checks: &'a Report,
}

fn cmd_classify(args: ClassifyArgs) -> Result<Option<Exit>> {
    let model = args.model.build(1)?;
    let text = fs::read_to_string(&args.j).with_context(|| format!("reading {}", args.j.display()))?;
    let j = io::parse_matrix(&text).with_context(|| format!("parsing {}", args.j.display()))?;
    let result = model.admissibility_check(&j);
    let sig = model.signature();
    let out = ClassifyOutput {
        n: sig.n(),
        k: sig.k(),
        admissible: result.admissible(),
        theta_generic: result.theta_generic,
        reflection: &result.reflection,
        checks: &result.report,
    };
    emit_json(args.out.as_deref(), "classify.json", &out)?;
    print_checks(&result.report);
    Ok((!result.admissible()).then_some(Exit(EXIT_INVALID)))
}
