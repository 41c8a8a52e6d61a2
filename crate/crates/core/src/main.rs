use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use naqkd::channels::{NoiseConfig, NoiseKind};
use naqkd::encoding::adaptive_unitary;
use naqkd::experiments::{figure_preset, run_sweep, verify_suite, write_rows, Mode, SweepAxis, SweepSpec};
use naqkd::optimize::{adaptive_rate, conventional_rate, OptimizerSettings};
use naqkd::protocols::{prepare, ChannelConfig, GammaConstants, Protocol, BB84_GAMMA, LM05_GAMMA, SDC_GAMMA};
use naqkd::Error;

#[derive(Parser)]
#[command(name = "naqkd", version, about = "Key-rate bounds for two-way QKD with noise-adaptive encodings")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct ChannelArgs {
    #[arg(long, default_value = "sdc")]
    protocol: Protocol,
    #[arg(long, default_value = "bit_flip")]
    kind: NoiseKind,
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    /// Forward/backward correlation degree.
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    #[arg(long)]
    alpha: Option<f64>,
    /// pX,pY,pZ or pI,pX,pY,pZ for general_pauli.
    #[arg(long, value_delimiter = ',')]
    pauli_probs: Option<Vec<f64>>,
}

#[derive(Args, Clone)]
struct OptArgs {
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long)]
    refine_tol: Option<f64>,
}

impl OptArgs {
    fn settings(&self) -> OptimizerSettings {
        let d = OptimizerSettings::default();
        OptimizerSettings { grid_n: self.grid_n.unwrap_or(d.grid_n), refine_tol: self.refine_tol.unwrap_or(d.refine_tol) }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the rate bound at one unitary (JSON).
    Rate {
        #[command(flatten)]
        ch: ChannelArgs,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, default_value_t = 0.0)]
        chi: f64,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
    },
    /// Maximize the rate bound over the adaptive unitary (JSON).
    Optimize {
        #[command(flatten)]
        ch: ChannelArgs,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Run a sweep from a JSON config or from flags (CSV).
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        ch: ChannelArgs,
        #[command(flatten)]
        opt: OptArgs,
        #[arg(long, default_value = "p")]
        axis: String,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 0.5)]
        to: f64,
        #[arg(long, default_value_t = 51)]
        steps: usize,
        /// Comma-separated: adaptive, conventional, delta, dc_capacity, dc_capacity_fixed.
        #[arg(long, value_delimiter = ',', default_value = "adaptive,conventional,delta")]
        modes: Vec<String>,
        /// θ,χ,φ for dc_capacity_fixed.
        #[arg(long, value_delimiter = ',')]
        fixed_unitary: Option<Vec<f64>>,
        /// Fixed pX for the pY_pZ_grid axis.
        #[arg(long)]
        p_x: Option<f64>,
    },
    /// Emit the CSV for a figure preset (fig1a..fig5d).
    Figure {
        name: String,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Run the self-check suite; exits 1 on any failure.
    Verify {
        /// Seed for the random draws and the Monte-Carlo oracle.
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, hide = true, default_value_t = SDC_GAMMA)]
        gamma_sdc: f64,
        #[arg(long, hide = true, default_value_t = LM05_GAMMA)]
        gamma_lm05: f64,
        #[arg(long, hide = true, default_value_t = BB84_GAMMA)]
        gamma_bb84: f64,
    },
}

fn bad_len(field: &str, want: &str, v: &[f64]) -> Error {
    Error::ConfigError { field: field.into(), message: format!("expected {want} values, got {}", v.len()) }
}

fn pauli_probs(ch: &ChannelArgs) -> naqkd::Result<Option<[f64; 4]>> {
    ch.pauli_probs
        .as_ref()
        .map(|v| match v.as_slice() {
            [x, y, z] => Ok([1.0 - x - y - z, *x, *y, *z]),
            [i, x, y, z] => Ok([*i, *x, *y, *z]),
            v => Err(bad_len("pauli_probs", "3 or 4", v)),
        })
        .transpose()
}

fn channel(ch: &ChannelArgs) -> naqkd::Result<ChannelConfig> {
    let mut noise = NoiseConfig::new(ch.kind, ch.p).with_mu(ch.mu);
    noise.alpha = ch.alpha;
    noise.pauli_probs = pauli_probs(ch)?;
    noise.validate()?;
    let cfg = ChannelConfig::symmetric(noise);
    cfg.validate()?;
    Ok(cfg)
}

fn parse_json<T: serde::de::DeserializeOwned>(s: &str, field: &str) -> naqkd::Result<T> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|e| Error::ConfigError { field: field.into(), message: format!("'{s}': {e}") })
}

#[allow(clippy::too_many_arguments)]
fn sweep_from_flags(
    ch: &ChannelArgs,
    opt: &OptArgs,
    axis: &str,
    from: f64,
    to: f64,
    steps: usize,
    modes: &[String],
    fixed_unitary: &Option<Vec<f64>>,
    p_x: Option<f64>,
) -> naqkd::Result<SweepSpec> {
    let s = opt.settings();
    let spec = SweepSpec {
        protocol: ch.protocol,
        kind: ch.kind,
        p: ch.p,
        mu: ch.mu,
        alpha: ch.alpha,
        p_x,
        pauli_probs: pauli_probs(ch)?,
        axis: parse_json::<SweepAxis>(axis, "axis")?,
        from,
        to,
        steps,
        modes: modes.iter().map(|m| parse_json::<Mode>(m, "modes")).collect::<naqkd::Result<_>>()?,
        fixed_unitary: fixed_unitary
            .as_deref()
            .map(|v| match v {
                [t, c, f] => Ok([*t, *c, *f]),
                v => Err(bad_len("fixed_unitary", "3", v)),
            })
            .transpose()?,
        grid_n: s.grid_n,
        refine_tol: s.refine_tol,
    };
    spec.validate()?;
    Ok(spec)
}

fn sink(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(out: &Option<PathBuf>, v: &serde_json::Value) -> naqkd::Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, v).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> naqkd::Result<ExitCode> {
    match cli.cmd {
        Cmd::Rate { ch, theta, chi, phi } => {
            let cfg = channel(&ch)?;
            let w = adaptive_unitary(theta, chi, phi)?;
            let r = prepare(ch.protocol, &cfg)?.evaluate(&w);
            write_json(
                &cli.out,
                &json!({
                    "raw_rate": r.raw_rate,
                    "gamma_term": r.gamma_term,
                    "key_entropy": r.key_entropy,
                    "test_entropy": r.test_entropy,
                    "theta": theta,
                    "chi": chi,
                    "phi": phi,
                }),
            )?;
        }
        Cmd::Optimize { ch, opt } => {
            let cfg = channel(&ch)?;
            let (rate, res) = adaptive_rate(ch.protocol, &cfg, &opt.settings())?;
            let [theta, chi, phi] = res.best_params;
            let conv = conventional_rate(ch.protocol, &cfg)?;
            write_json(
                &cli.out,
                &json!({
                    "adaptive_rate": rate,
                    "conventional_rate": conv,
                    "best_value": res.best_value,
                    "theta": theta,
                    "chi": chi,
                    "phi": phi,
                    "grid_points": res.grid_points,
                    "refinement_iterations": res.refinement_iterations,
                    "co_maximizers": res.co_maximizers,
                }),
            )?;
        }
        Cmd::Sweep { config, ch, opt, axis, from, to, steps, modes, fixed_unitary, p_x } => {
            let spec = match config {
                Some(path) => {
                    let mut spec = SweepSpec::from_json(&std::fs::read_to_string(path)?)?;
                    if let Some(n) = opt.grid_n {
                        spec.grid_n = n;
                    }
                    if let Some(t) = opt.refine_tol {
                        spec.refine_tol = t;
                    }
                    spec.validate()?;
                    spec
                }
                None => sweep_from_flags(&ch, &opt, &axis, from, to, steps, &modes, &fixed_unitary, p_x)?,
            };
            let rows = run_sweep(&spec)?;
            write_rows(sink(&cli.out)?, &rows)?;
        }
        Cmd::Figure { name, opt } => {
            let mut rows = Vec::new();
            for mut spec in figure_preset(&name)? {
                if let Some(n) = opt.grid_n {
                    spec.grid_n = n;
                }
                if let Some(t) = opt.refine_tol {
                    spec.refine_tol = t;
                }
                rows.extend(run_sweep(&spec)?);
            }
            write_rows(sink(&cli.out)?, &rows)?;
        }
        Cmd::Verify { seed, gamma_sdc, gamma_lm05, gamma_bb84 } => {
            let g = GammaConstants { sdc: gamma_sdc, lm05: gamma_lm05, bb84: gamma_bb84 };
            let report = verify_suite(&g, seed);
            let v = serde_json::to_value(&report).map_err(|e| Error::Io(e.to_string()))?;
            write_json(&cli.out, &v)?;
            if !report.passed {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
