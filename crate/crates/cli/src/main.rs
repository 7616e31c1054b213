use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cpdd::numsim::{self, SlopeEstimate, SpinBathModel};
use cpdd::sequence::{self, PulseSequence, SequenceSummary};
use cpdd::symbolic;
use cpdd::{dsl, PauliAxis};
use serde::Serialize;

/// Concatenated-projection dynamical decoupling toolkit.
#[derive(Parser, Debug)]
#[command(name = "cpdd", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Elaborate an expression and print its pulses, class and order.
    Gen {
        #[arg(long)]
        seq: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the symbolic and numeric checks for an expression.
    Verify {
        #[arg(long)]
        seq: String,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate suppression orders from the log-log slope of D(τ_d).
    ///
    /// `--seq free` selects free evolution over two intervals.
    Slope {
        #[arg(long, required = true)]
        seq: Vec<String>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the table of known schemes and the K_min series.
    Catalog {
        #[arg(long, default_value_t = 4)]
        max_cdd: u32,
        #[arg(long, default_value_t = 3)]
        max_ga8: u32,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Number of bath spins (1..=6).
    #[arg(long, default_value_t = 4)]
    n_bath: usize,
    /// System-bath coupling strength.
    #[arg(long = "J", default_value_t = 1.0)]
    j: f64,
    /// Pure-bath Hamiltonian strength.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, env = "DD_DEFAULT_SEED", default_value_t = 42)]
    seed: u64,
}

impl ModelArgs {
    fn build(&self) -> Result<SpinBathModel> {
        numsim::build_model(self.n_bath, self.j, self.beta, self.seed).context("building spin-bath model")
    }
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    #[arg(long, default_value_t = 1e-3)]
    tau_min: f64,
    #[arg(long, default_value_t = 3e-2)]
    tau_max: f64,
    #[arg(long, default_value_t = 12)]
    points: usize,
}

impl GridArgs {
    fn grid(&self) -> Result<Vec<f64>> {
        if !(self.tau_min > 0.0 && self.tau_min < self.tau_max && self.tau_max.is_finite()) {
            bail!("need 0 < --tau-min < --tau-max, got {} and {}", self.tau_min, self.tau_max);
        }
        if self.points < 4 {
            bail!("--points must be at least 4, got {}", self.points);
        }
        Ok(numsim::log_grid(self.tau_min, self.tau_max, self.points))
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Csv,
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn compile(text: &str) -> Result<PulseSequence> {
    dsl::compile(text).with_context(|| format!("in expression '{text}'"))
}

#[derive(Serialize)]
struct GenReport {
    #[serde(flatten)]
    summary: SequenceSummary,
    odd_sites: bool,
    half_repeat: Option<bool>,
}

fn cmd_gen(text: &str, format: Format, w: &mut dyn Write) -> Result<()> {
    let seq = compile(text)?;
    let report = GenReport {
        summary: seq.summary(),
        odd_sites: seq.check_odd_sites(),
        half_repeat: seq.check_half_repeat().ok(),
    };
    match format {
        Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&report)?)?,
        Format::Text => {
            let s = &report.summary;
            writeln!(w, "sequence    {}", s.sequence)?;
            writeln!(w, "time order  {}", s.pulses.join(" "))?;
            writeln!(w, "K           {}", s.k)?;
            match (&s.class, s.n) {
                (Some(c), Some(n)) => {
                    writeln!(w, "class       {c}")?;
                    writeln!(w, "N           {n}")?;
                }
                _ => writeln!(w, "class       none (no projection provenance)")?,
            }
            writeln!(w, "cyclic      {}", s.cyclic)?;
            writeln!(w, "odd sites   {}", report.odd_sites)?;
            match report.half_repeat {
                Some(h) => writeln!(w, "half repeat {h}")?,
                None => writeln!(w, "half repeat n/a (odd K)")?,
            }
        }
        Format::Csv => bail!("gen supports --format text or json"),
    }
    Ok(())
}

#[derive(Serialize, Clone, Copy, PartialEq, Eq, Debug)]
#[serde(rename_all = "lowercase")]
enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
    detail: String,
}

impl Check {
    fn new(name: &'static str, pass: bool, detail: impl Into<String>) -> Self {
        let status = if pass { Status::Pass } else { Status::Fail };
        Check { name, status, residual: None, detail: detail.into() }
    }

    fn skipped(name: &'static str, detail: impl Into<String>) -> Self {
        Check { name, status: Status::Skipped, residual: None, detail: detail.into() }
    }
}

#[derive(Serialize)]
struct VerifyReport {
    sequence: String,
    avg_h0: serde_json::Value,
    avg_h1: serde_json::Value,
    checks: Vec<Check>,
    passed: bool,
}

fn verify_checks(seq: &PulseSequence, model: &ModelArgs) -> (symbolic::SbOperator, symbolic::SbOperator, Vec<Check>) {
    let h = symbolic::h0_generic();
    let h0bar = symbolic::sequence_map0(seq, &h);
    let h1bar = symbolic::avg_h1(&symbolic::interval_frames(seq, &h)).expect("sequences are non-empty");
    let mut checks = vec![
        Check::new("avg_h0", h0bar.is_hermitian(), format!("H̄⁽⁰⁾ = {h0bar}")),
        Check::new("avg_h1", h1bar.is_hermitian(), format!("H̄⁽¹⁾ has {} nonzero components", h1bar.support().len())),
    ];

    match seq.provenance() {
        Some(order) => {
            let chain = order.iter().rev().try_fold(h.clone(), |acc, &a| symbolic::project0(a, &acc));
            checks.push(match chain {
                Ok(c) => Check::new("project0_composition", c == h0bar, "projection chain matches H̄⁽⁰⁾"),
                Err(e) => Check::new("project0_composition", false, e.to_string()),
            });
            checks.push(composition_check(order));
        }
        None => {
            checks.push(Check::skipped("project0_composition", "no projection provenance"));
            checks.push(Check::skipped("composition", "no projection provenance"));
        }
    }

    checks.push(match model.build() {
        Ok(m) => {
            let r = numsim::numeric_check_h0(seq, &m);
            let mut c = Check::new("numeric_h0", r <= 1e-12, format!("relative residual {r:.2e} <= 1e-12"));
            c.residual = Some(r);
            c
        }
        Err(e) => Check::new("numeric_h0", false, format!("{e:#}")),
    });
    (h0bar, h1bar, checks)
}

/// Splits `p_{i_N}[B]` into its outermost projection and the remaining `B`.
fn composition_check(order: &[PauliAxis]) -> Check {
    let Some((&outer, inner)) = order.split_last() else {
        return Check::skipped("composition", "empty provenance");
    };
    if inner.is_empty() {
        return Check::skipped("composition", "single projection, no inner sequence");
    }
    let result = sequence::projection(outer)
        .and_then(|a| sequence::cpdd_from_order(inner).map(|b| (a, b)))
        .map_err(cpdd::Error::from)
        .and_then(|(a, b)| Ok(symbolic::verify_composition(&a, &b)?));
    match result {
        Ok(ok) => Check::new("composition", ok, format!("π of p_{}[B] equals π_B after π_{}", lc(outer), lc(outer))),
        Err(e) => Check::new("composition", false, e.to_string()),
    }
}

fn lc(a: PauliAxis) -> char {
    a.as_char().to_ascii_lowercase()
}

fn cmd_verify(text: &str, model: &ModelArgs, format: Format, w: &mut dyn Write) -> Result<bool> {
    let seq = compile(text)?;
    let (h0bar, h1bar, checks) = verify_checks(&seq, model);
    let passed = checks.iter().all(|c| c.status != Status::Fail);
    match format {
        Format::Json => {
            let report = VerifyReport {
                sequence: seq.paper_order(),
                avg_h0: h0bar.to_json(),
                avg_h1: h1bar.to_json(),
                checks,
                passed,
            };
            writeln!(w, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        Format::Text => {
            writeln!(w, "sequence {}", seq.paper_order())?;
            writeln!(w, "H̄⁽⁰⁾ = {h0bar}")?;
            writeln!(w, "H̄⁽¹⁾ = {h1bar}")?;
            for c in &checks {
                let tag = match c.status {
                    Status::Pass => "pass",
                    Status::Fail => "FAIL",
                    Status::Skipped => "skip",
                };
                writeln!(w, "[{tag}] {}: {}", c.name, c.detail)?;
            }
        }
        Format::Csv => bail!("verify supports --format text or json"),
    }
    Ok(passed)
}

#[derive(Serialize)]
struct CsvRow<'a> {
    sequence: &'a str,
    seed: u64,
    n_bath: usize,
    #[serde(rename = "J")]
    j: f64,
    beta: f64,
    tau_d: f64,
    #[serde(rename = "D")]
    d: f64,
}

#[derive(Serialize)]
struct SlopeSummary {
    sequence: String,
    slope: f64,
    #[serde(rename = "N_est")]
    n_est: f64,
    residual: f64,
    window: (f64, f64),
    points_used: usize,
}

fn run_slope(text: &str, model: &SpinBathModel, grid: &[f64]) -> Result<SlopeEstimate> {
    let est = if text.trim().eq_ignore_ascii_case("free") {
        numsim::estimate_order_with(grid, |t| numsim::distance(&numsim::evolve_free(model, t, 2)?))
    } else {
        numsim::estimate_order(&compile(text)?, model, grid)
    };
    est.with_context(|| format!("slope for '{text}'"))
}

fn cmd_slope(seqs: &[String], args: &ModelArgs, grid: &GridArgs, format: Format, w: &mut dyn Write) -> Result<()> {
    let grid = grid.grid()?;
    let model = args.build()?;
    let runs = seqs.iter().map(|s| Ok((s.as_str(), run_slope(s, &model, &grid)?))).collect::<Result<Vec<_>>>()?;
    let summaries: Vec<SlopeSummary> = runs
        .iter()
        .map(|(s, e)| SlopeSummary {
            sequence: s.to_string(),
            slope: e.slope,
            n_est: e.n_est,
            residual: e.residual,
            window: e.window,
            points_used: e.points_used,
        })
        .collect();
    match format {
        Format::Csv => {
            let mut out = csv::Writer::from_writer(w);
            for (s, e) in &runs {
                for (&tau_d, &d) in e.grid.iter().zip(&e.distances) {
                    out.serialize(CsvRow {
                        sequence: s,
                        seed: args.seed,
                        n_bath: args.n_bath,
                        j: args.j,
                        beta: args.beta,
                        tau_d,
                        d,
                    })?;
                }
            }
            out.flush()?;
            for s in &summaries {
                eprintln!("{}", serde_json::to_string(s)?);
            }
        }
        Format::Json => {
            let points: Vec<_> = runs
                .iter()
                .map(|(s, e)| serde_json::json!({ "sequence": s, "tau_d": e.grid, "D": e.distances }))
                .collect();
            let doc = serde_json::json!({
                "model": { "n_bath": args.n_bath, "J": args.j, "beta": args.beta, "seed": args.seed },
                "summary": summaries,
                "points": points,
            });
            writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
        Format::Text => {
            writeln!(w, "{:<24} {:>8} {:>8} {:>10} {:>7}", "sequence", "slope", "N_est", "residual", "points")?;
            for s in &summaries {
                writeln!(
                    w,
                    "{:<24} {:>8.4} {:>8.4} {:>10.2e} {:>7}",
                    s.sequence, s.slope, s.n_est, s.residual, s.points_used
                )?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct KMinRow {
    #[serde(rename = "N")]
    n: u32,
    #[serde(rename = "K_min")]
    k_min: u64,
    class: sequence::CpddClass,
}

fn cmd_catalog(max_cdd: u32, max_ga8: u32, format: Format, w: &mut dyn Write) -> Result<()> {
    if max_cdd > 6 || max_ga8 > 4 {
        bail!("--max-cdd must be at most 6 and --max-ga8 at most 4");
    }
    let rows = sequence::catalog(max_cdd, max_ga8);
    let k_min: Vec<KMinRow> =
        (1..=5).map(|n| KMinRow { n, k_min: sequence::k_min(n), class: sequence::oudd(n) }).collect();
    match format {
        Format::Json => {
            let doc = serde_json::json!({ "rows": rows, "k_min": k_min });
            writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
        Format::Csv => {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(["name", "class", "pattern", "K", "N"])?;
            for r in &rows {
                out.write_record([
                    r.name.clone(),
                    r.class.to_string(),
                    r.pattern.clone(),
                    r.k.to_string(),
                    r.n.to_string(),
                ])?;
            }
            out.flush()?;
        }
        Format::Text => {
            writeln!(w, "{:<12} {:<10} {:<24} {:>8} {:>3}", "scheme", "class", "pattern", "K", "N")?;
            for r in &rows {
                writeln!(w, "{:<12} {:<10} {:<24} {:>8} {:>3}", r.name, r.class.to_string(), r.pattern, r.k, r.n)?;
            }
            writeln!(w)?;
            writeln!(w, "{:>3} {:>6}  class", "N", "K_min")?;
            for r in &k_min {
                writeln!(w, "{:>3} {:>6}  {}", r.n, r.k_min, r.class)?;
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen { seq, format, out } => cmd_gen(&seq, format, &mut sink(&out)?).map(|_| true),
        Command::Verify { seq, model, format, out } => cmd_verify(&seq, &model, format, &mut sink(&out)?),
        Command::Slope { seq, model, grid, format, out } => {
            cmd_slope(&seq, &model, &grid, format, &mut sink(&out)?).map(|_| true)
        }
        Command::Catalog { max_cdd, max_ga8, format, out } => {
            cmd_catalog(max_cdd, max_ga8, format, &mut sink(&out)?).map(|_| true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
