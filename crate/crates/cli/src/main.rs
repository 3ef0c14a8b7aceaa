use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hermwave::annihilator::{make_taylor, Annihilator, SpaceSpec};
use hermwave::filterbank::{BankFamily, Decomposition, FilterBank};
use hermwave::signal::{read_signal, read_signal_with_dim, sample_function, write_signal, Function, HermiteSignal};
use hermwave::subdivision::{closed_form_phi, make_mask, render_basic_limit};
use hermwave::verify::{self, VerifyConfig};
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Level-dependent Hermite multiwavelet filter banks.
///
/// Signals are CSV files in v-coordinates (component j of node k holds
/// 2^{-nj} f^(j)(2^{-n} k)) with a `# level=n dim=d+1` first line.
/// Set HERMWAVE_LOG=debug for diagnostics.
#[derive(Parser, Serialize)]
#[command(name = "hermwave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
enum Command {
    /// Write the mask and the four filter bank symbols of one level as JSON
    Filters(FiltersArgs),
    /// Run the identity checks and emit a JSON report; exit code 1 on failure
    Verify(VerifyArgs),
    /// Sample a test function into a signal file
    Sample(SampleArgs),
    /// Multilevel analysis of a signal file into a coefficient file
    Analyze(AnalyzeArgs),
    /// Rebuild a signal from a coefficient file
    Synthesize(SynthesizeArgs),
    /// Tabulate the basic limit functions on a dyadic grid
    Render(RenderArgs),
    /// Threshold the details and report sparsity and error
    Compress(CompressArgs),
}

#[derive(Args, Serialize, Clone, Copy)]
struct SpaceArgs {
    /// Polynomial degree p
    #[arg(long, default_value_t = 0)]
    p: usize,
    /// Frequency; 0 selects the stationary quintic scheme
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
}

impl SpaceArgs {
    fn spec(&self) -> Result<SpaceSpec> {
        if self.lambda == 0.0 {
            return Ok(if self.p == 0 { SpaceSpec::stationary() } else { SpaceSpec::polynomial(self.p) });
        }
        Ok(SpaceSpec::exponential(self.p, self.lambda)?)
    }
}

#[derive(Args, Serialize)]
struct FiltersArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long, default_value_t = 0)]
    level: u32,
    /// Emit only the Taylor operator of order d
    #[arg(long)]
    taylor: bool,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Output file (stdout if absent)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// Highest level checked; levels 0..=level are run
    #[arg(long, default_value_t = 4)]
    level: u32,
    /// Refinement steps of the spectral check
    #[arg(long, default_value_t = 4)]
    depth: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override a tolerance, e.g. `--tolerance spectral=1e-8` (repeatable)
    #[arg(long, value_name = "NAME=VALUE")]
    tolerance: Vec<String>,
    /// Shift one low-pass entry of every bank by this amount
    #[arg(long)]
    perturb: Option<f64>,
    /// Also compare the annihilator at level --n with the Taylor operator
    #[arg(long)]
    taylor_limit: bool,
    #[arg(long, default_value_t = 20)]
    n: u32,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SampleArgs {
    /// exp:RATE, cosh:LAMBDA, monomial:Q, sin:FREQ, or random
    #[arg(long)]
    function: String,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 6)]
    level: u32,
    #[arg(long, default_value_t = 0)]
    start: i64,
    #[arg(long, default_value_t = 64)]
    length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Serialize)]
struct AnalyzeArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// Number of analysis steps L
    #[arg(long)]
    depth: u32,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Serialize)]
struct SynthesizeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Signal to compare the reconstruction against
    #[arg(long)]
    reference: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct RenderArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long, default_value_t = 0)]
    level: u32,
    /// Grid step 2^-depth
    #[arg(long, default_value_t = 7)]
    depth: u32,
    /// Add the tabulated closed-form values and a deviation footer
    #[arg(long)]
    compare_closed_form: bool,
    /// Add first and second derivative columns
    #[arg(long)]
    derivatives: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct CompressArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long)]
    depth: u32,
    #[arg(long)]
    input: PathBuf,
    /// One or more thresholds, comma separated
    #[arg(long, value_delimiter = ',', default_value = "0")]
    threshold: Vec<f64>,
    /// JSON report file
    #[arg(long)]
    output: Option<PathBuf>,
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn filters(args: &FiltersArgs) -> Result<()> {
    if args.taylor {
        #[derive(Serialize)]
        struct Taylor {
            d: usize,
            taylor: hermwave::MatLaurent,
        }
        return write_json(&Taylor { d: args.d, taylor: make_taylor(args.d) }, args.output.as_deref());
    }
    let spec = args.space.spec()?;
    let mask = make_mask(spec, args.level)?;
    let bank = FilterBank::build(&mask)?;
    let residual = mask.interpolatory_residual();
    eprintln!("interpolatory residual max|A(z) + A(-z) - 2D| = {residual:e}");
    #[derive(Serialize)]
    struct Filters<'a> {
        spec: SpaceSpec,
        level: u32,
        interpolatory_residual: f64,
        mask: hermwave::Mask,
        bank: &'a FilterBank,
        annihilator: Annihilator,
    }
    write_json(
        &Filters {
            spec,
            level: args.level,
            interpolatory_residual: residual,
            mask: mask.mask(),
            bank: &bank,
            annihilator: Annihilator::new(spec, args.level)?,
        },
        args.output.as_deref(),
    )
}

fn run_verify(args: &VerifyArgs) -> Result<bool> {
    let mut config = VerifyConfig::new(args.space.spec()?);
    config.levels = (0..=args.level).collect();
    config.depth = args.depth;
    config.seed = args.seed;
    config.perturb = args.perturb;
    config.taylor_limit = args.taylor_limit.then_some(args.n);
    for item in &args.tolerance {
        let (name, value) = item
            .split_once('=')
            .with_context(|| format!("tolerance override `{item}` is not NAME=VALUE"))?;
        let value: f64 = value.parse().with_context(|| format!("`{value}` is not a number"))?;
        config.tolerances.set(name, value)?;
    }
    let report = verify::run(&config);
    for check in report.failures() {
        eprintln!(
            "FAIL {} (level {:?}): residual {:e} > {:e}{}",
            check.name,
            check.level,
            check.residual,
            check.tolerance,
            check.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default()
        );
    }
    eprintln!(
        "{} of {} checks passed",
        report.checks.iter().filter(|c| c.passed).count(),
        report.checks.len()
    );
    write_json(&report, args.output.as_deref())?;
    Ok(report.passed)
}

fn parse_function(text: &str) -> Result<Option<Function>> {
    if text == "random" {
        return Ok(None);
    }
    let (kind, value) = text
        .split_once(':')
        .with_context(|| format!("function `{text}` should look like exp:2 or monomial:3"))?;
    let f = match kind {
        "exp" => Function::Exp(value.parse()?),
        "cosh" => Function::cosh_pair(value.parse()?),
        "sin" => Function::Sin(value.parse()?),
        "monomial" => Function::Monomial(value.parse()?),
        _ => bail!("unknown function kind `{kind}`; use exp, cosh, sin, monomial or random"),
    };
    Ok(Some(f))
}

fn sample(args: &SampleArgs) -> Result<()> {
    let end = args.start + args.length as i64;
    let signal = match parse_function(&args.function)? {
        Some(f) => sample_function(&f, args.d, args.level, args.start..end)?,
        None => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
            let rows = (0..args.length)
                .map(|_| (0..=args.d).map(|_| rng.random_range(-1.0..=1.0)).collect())
                .collect();
            HermiteSignal::from_rows(args.level, args.start, rows)?
        }
    };
    write_signal(&signal, &args.output)?;
    Ok(())
}

fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let spec = args.space.spec()?;
    let signal = read_signal_with_dim(&args.input, spec.dim())
        .with_context(|| format!("reading {}", args.input.display()))?;
    let dec = hermwave::filterbank::analyze(spec, &signal, args.depth)?;
    for d in &dec.details {
        eprintln!("level {}: {} details, max |d| = {:e}", d.level, d.len(), d.max_abs());
    }
    eprintln!("max detail over all levels: {:e}", dec.max_detail());
    write_json(&dec, Some(&args.output))
}

fn synthesize(args: &SynthesizeArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let dec: Decomposition = serde_json::from_str(&text).with_context(|| format!("parsing {}", args.input.display()))?;
    let signal = hermwave::filterbank::synthesize(&dec)?;
    write_signal(&signal, &args.output)?;
    if let Some(reference) = &args.reference {
        let original = read_signal(reference)?;
        eprintln!("roundtrip max error: {:e}", signal.max_abs_diff(&original)?);
    }
    Ok(())
}

fn render(args: &RenderArgs) -> Result<()> {
    let spec = args.space.spec()?;
    let table = render_basic_limit(spec, args.level, args.depth)?;
    let dim = spec.dim();
    let mut out = sink(args.output.as_deref())?;
    let mut header: Vec<String> = vec!["x".into()];
    header.extend((0..dim).map(|j| format!("phi{j}")));
    if args.derivatives {
        for i in 1..dim {
            header.extend((0..dim).map(|j| format!("d{i}_phi{j}")));
        }
    }
    if args.compare_closed_form {
        header.extend((0..dim).map(|j| format!("closed_phi{j}")));
    }
    writeln!(out, "{}", header.join(","))?;
    let mut deviation = 0.0_f64;
    for (x, m) in table.grid.iter().zip(&table.values) {
        let mut row = vec![format!("{x:?}")];
        row.extend((0..dim).map(|j| format!("{:?}", m[(0, j)])));
        if args.derivatives {
            for i in 1..dim {
                row.extend((0..dim).map(|j| format!("{:?}", m[(i, j)])));
            }
        }
        if args.compare_closed_form {
            for j in 0..dim {
                let c = closed_form_phi(spec, args.level, j, *x);
                deviation = deviation.max((c - m[(0, j)]).abs());
                row.push(format!("{c:?}"));
            }
        }
        writeln!(out, "{}", row.join(","))?;
    }
    if args.compare_closed_form {
        writeln!(out, "# max deviation from closed form: {deviation:e}")?;
        eprintln!("max deviation from closed form: {deviation:e}");
    }
    out.flush()?;
    Ok(())
}

fn compress(args: &CompressArgs) -> Result<()> {
    let spec = args.space.spec()?;
    let signal = read_signal_with_dim(&args.input, spec.dim())?;
    let family = BankFamily::for_transform(spec, signal.level(), args.depth)?;
    let reports = args
        .threshold
        .iter()
        .map(|&t| family.compress(&signal, args.depth, t))
        .collect::<hermwave::Result<Vec<_>>>()?;
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "threshold,total,kept,dropped,sparsity,max_error,relative_error")?;
    for r in &reports {
        writeln!(
            stdout,
            "{:e},{},{},{},{:.6},{:e},{:e}",
            r.threshold, r.total, r.kept, r.dropped, r.sparsity, r.max_error, r.relative_error
        )?;
    }
    if let Some(path) = &args.output {
        write_json(&reports, Some(path))?;
    }
    Ok(())
}

fn main() -> Result<std::process::ExitCode> {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HERMWAVE_LOG", "warn")).init();
    let cli = Cli::parse();
    eprintln!("config: {}", serde_json::to_string(&cli)?);
    let ok = match &cli.command {
        Command::Filters(a) => filters(a).map(|_| true),
        Command::Verify(a) => run_verify(a),
        Command::Sample(a) => sample(a).map(|_| true),
        Command::Analyze(a) => analyze(a).map(|_| true),
        Command::Synthesize(a) => synthesize(a).map(|_| true),
        Command::Render(a) => render(a).map(|_| true),
        Command::Compress(a) => compress(a).map(|_| true),
    }?;
    Ok(if ok { std::process::ExitCode::SUCCESS } else { std::process::ExitCode::FAILURE })
}

#[cfg(test)]
mod tests {
    use super::*;
    use hermwave::signal::write_signal_to;

    #[test]
    fn zero_frequency_is_stationary() {
        let s = SpaceArgs { p: 0, lambda: 0.0 }.spec().unwrap();
        assert_eq!(s, SpaceSpec::stationary());
        assert!(SpaceArgs { p: 0, lambda: -1.0 }.spec().is_err());
    }

    #[test]
    fn function_parsing() {
        assert_eq!(parse_function("exp:2").unwrap(), Some(Function::Exp(2.0)));
        assert_eq!(parse_function("random").unwrap(), None);
        assert!(parse_function("gauss:1").is_err());
        assert!(parse_function("exp").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn stdout_sink_writes_csv() {
        let s = sample_function(&Function::Monomial(1), 2, 1, 0..2).unwrap();
        let mut buf = Vec::new();
        write_signal_to(&s, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("# level=1 dim=3\nk,f0,f1,f2\n"));
    }
}
