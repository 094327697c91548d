use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use brs_core::io::{
    basis_from_json, basis_to_json, condition_entries, parse_reals, report_to_json, scheme_from_json, write_pairing,
    write_points, write_returns, write_trace,
};
use brs_core::real::{check_precision, format_real};
use brs_core::rug::Float;
use brs_core::*;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "brs", version, about = "Bounded remainder sets for toral rotations")]
struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true, env = PRECISION_ENV, default_value_t = DEFAULT_PRECISION)]
    precision: u32,

    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a special region by basis exchange.
    Construct {
        /// Rotation vector, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        /// Exchange directions as `1,2,1` or `rr:<count>` (default `rr:<s>`).
        #[arg(long)]
        steps: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the special-region and Rauzy conditions.
    Verify {
        #[arg(long)]
        basis: PathBuf,
        /// Random samples for the Rauzy checks.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Remainder `R(N) = #{n < N : x0 + n alpha in A} - N |A|`.
    Trace {
        #[arg(long)]
        basis: PathBuf,
        #[arg(long = "N")]
        n_max: u64,
        #[arg(long, default_value_t = 1)]
        stride: u64,
        /// Starting point, comma separated (default 0).
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Return times of the orbit to the region.
    Returns {
        #[arg(long)]
        basis: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, value_enum, default_value_t = Method::Renormalized)]
        method: Method,
        /// Starting point for the naive scan (default 0).
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        /// Give up after this many steps without a return.
        #[arg(long, default_value_t = brs_core::dynamics::DEFAULT_RETURN_CAP)]
        cap: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Points of a cut-and-project set.
    Cps(Window),
    /// Bounded-distance map from a cut-and-project set to a lattice.
    Bdmap(Window),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Naive,
    Renormalized,
}

#[derive(Args)]
struct Window {
    #[arg(long)]
    scheme: PathBuf,
    /// Section region; its rotation must be the scheme's first column.
    #[arg(long, conflicts_with = "steps")]
    basis: Option<PathBuf>,
    /// Build the section region from these steps instead.
    #[arg(long)]
    steps: Option<String>,
    /// Range of `n_1` as `lo:hi`.
    #[arg(long, allow_hyphen_values = true)]
    n1: String,
    /// Ranges of `n_2, ..., n_d`, comma separated `lo:hi` pairs.
    #[arg(long, allow_hyphen_values = true, default_value = "")]
    tail: String,
    /// Starting point in R^k, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_steps(text: &str, s: usize) -> anyhow::Result<Vec<usize>> {
    if let Some(count) = text.strip_prefix("rr:") {
        let count = count
            .parse()
            .with_context(|| format!("bad round-robin count {count:?}"))?;
        return Ok(round_robin(s, count));
    }
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|j| j.trim().parse::<usize>().with_context(|| format!("bad step {j:?}")))
        .collect()
}

fn parse_range(text: &str) -> anyhow::Result<(i64, i64)> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| anyhow!("range {text:?} is not lo:hi"))?;
    let range = (lo.trim().parse()?, hi.trim().parse()?);
    if range.0 > range.1 {
        bail!("empty range {text:?}");
    }
    Ok(range)
}

fn parse_ranges(text: &str) -> anyhow::Result<Vec<(i64, i64)>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(parse_range).collect()
}

fn start_point(text: Option<&str>, s: usize, precision: u32) -> anyhow::Result<Vec<Float>> {
    match text {
        None => Ok(vec![Float::new(precision); s]),
        Some(t) => {
            let x = parse_reals(t, precision)?;
            if x.len() != s {
                bail!("starting point has {} coordinates, expected {s}", x.len());
            }
            Ok(x)
        }
    }
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> Result<()>) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write in {}", dir.display()))?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut buf)?;
        buf.flush()?;
    }
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn read_basis(path: &Path, precision: u32) -> anyhow::Result<SpecialBasis> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(basis_from_json(&text, precision)?)
}

fn sectioned(w: &Window, precision: u32) -> anyhow::Result<(SectionedScheme, Vec<Float>)> {
    let text = fs::read_to_string(&w.scheme).with_context(|| format!("cannot read {}", w.scheme.display()))?;
    let scheme = scheme_from_json(&text, precision)?;
    let region = match &w.basis {
        Some(path) => read_basis(path, precision)?.geometry()?,
        None => {
            let s = scheme.s();
            let steps = parse_steps(w.steps.as_deref().unwrap_or(&format!("rr:{s}")), s)?;
            construct(&scheme.rotation()?, &steps)?.geometry()?
        }
    };
    let (offset, relabel) = match &w.x {
        Some(x) => {
            let folded = fold_offset(&scheme, &parse_reals(x, precision)?)?;
            (folded.offset, folded.relabel)
        }
        None => (vec![Float::new(precision); scheme.s()], Vec::new()),
    };
    Ok((SectionedScheme::new(scheme, region, offset)?, relabel))
}

fn relabel_note(relabel: &[Float]) -> String {
    if relabel.is_empty() {
        return String::new();
    }
    let r: Vec<String> = relabel.iter().map(format_real).collect();
    format!(" relabel=-({})", r.join(","))
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    check_precision(cli.precision)?;
    let p = cli.precision;
    log::debug!("working precision {p} bits, seed {}", cli.seed);
    match cli.command {
        Command::Construct { alpha, steps, out } => {
            let alpha: Vec<&str> = alpha.split(',').collect();
            let ctx = RotationContext::from_decimal(&alpha, p)?;
            let s = ctx.dim();
            let steps = parse_steps(steps.as_deref().unwrap_or(&format!("rr:{s}")), s)?;
            let basis = construct(&ctx, &steps)?;
            let geom = basis.geometry()?;
            let json = basis_to_json(&basis)?;
            write_atomic(&out, |w| Ok(w.write_all(json.as_bytes())?))?;
            println!("volume={}", format_real(geom.volume()));
            Ok(true)
        }
        Command::Verify { basis, samples, out } => {
            let basis = read_basis(&basis, p)?;
            let mut results = condition_entries(&check_conditions(&basis)?);
            let geom = basis.geometry()?;
            results.extend(verify_rauzy(&geom, samples, cli.seed)?.results);
            for r in &results {
                let mut line = format!("{} {}", r.condition, if r.pass { "pass" } else { "FAIL" });
                if let Some(res) = &r.max_residual {
                    line += &format!(" max_residual={}", res.to_f64());
                }
                if let Some(w) = &r.witness {
                    line += &format!(" ({w})");
                }
                println!("{line}");
            }
            if let Some(out) = out {
                let json = report_to_json(&results)?;
                write_atomic(&out, |w| Ok(w.write_all(json.as_bytes())?))?;
            }
            Ok(results.iter().all(|r| r.pass))
        }
        Command::Trace {
            basis,
            n_max,
            stride,
            x0,
            out,
        } => {
            if stride == 0 {
                bail!("stride must be positive");
            }
            let geom = read_basis(&basis, p)?.geometry()?;
            let x0 = start_point(x0.as_deref(), geom.dim(), p)?;
            let trace = remainder_trace(&geom, &x0, n_max, stride)?;
            write_atomic(&out, |w| write_trace(w, &trace))?;
            println!("max_remainder={} visits={}", format_real(&trace.max_abs), trace.visits);
            Ok(true)
        }
        Command::Returns {
            basis,
            count,
            method,
            x0,
            cap,
            out,
        } => {
            let geom = read_basis(&basis, p)?.geometry()?;
            let seq = match method {
                Method::Naive => naive_returns(&geom, &start_point(x0.as_deref(), geom.dim(), p)?, count, cap)?,
                Method::Renormalized => {
                    if x0.is_some() {
                        bail!("--x0 applies to the naive method only");
                    }
                    renormalized_returns(&geom, count)?
                }
            };
            write_atomic(&out, |w| write_returns(w, &seq, geom.dim()))?;
            println!(
                "last_return={}",
                seq.times().last().map_or("none".into(), i64::to_string)
            );
            Ok(true)
        }
        Command::Cps(w) => {
            let (ss, relabel) = sectioned(&w, p)?;
            let points = generate_points(&ss, &parse_ranges(&w.tail)?, parse_range(&w.n1)?)?;
            let (d, k) = (ss.scheme().d(), ss.scheme().k());
            write_atomic(&w.out, |f| write_points(f, &points, d, k))?;
            println!("points={}{}", points.len(), relabel_note(&relabel));
            Ok(true)
        }
        Command::Bdmap(w) => {
            let (ss, relabel) = sectioned(&w, p)?;
            let pairing = bd_pairing(&ss, &parse_ranges(&w.tail)?, parse_range(&w.n1)?)?;
            let d = ss.scheme().d();
            write_atomic(&w.out, |f| write_pairing(f, &pairing, d))?;
            println!(
                "sup_displacement={} pairs={}{}",
                format_real(&pairing.sup_displacement),
                pairing.len(),
                relabel_note(&relabel)
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<Error>() {
                Some(e) if e.is_precision_failure() => 2,
                Some(e) if e.is_verification_failure() => 3,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
