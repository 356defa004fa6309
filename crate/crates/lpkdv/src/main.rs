use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lpkdv::continuum::{integrate_dde, miura_q_to_a, miura_s, ContinuumState, DdeKind};
use lpkdv::error::{Error, Result};
use lpkdv::gen_sym::{flow_integrate, Characteristic};
use lpkdv::grid::{Grid, Staircase};
use lpkdv::lattice::{evolve, residual_max};
use lpkdv::painleve::{map_forward, painleve_generate, GenerateSeed, ReductionParams};
use lpkdv::params::LatticeParams;
use lpkdv::soliton::{soliton_grid, soliton_value, Mode, SolitonSpec};
use lpkdv::verify::{run_suite, VerifyConfig};

#[derive(Parser)]
#[command(name = "lpkdv", version, about = "Lattice potential KdV laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a soliton solution window as CSV
    Soliton {
        /// Lattice parameters "p,q"
        #[arg(long, default_value = "2,1")]
        params: String,
        /// Window "n0,m0,cols,rows"
        #[arg(long, default_value = "-20,-20,40,40", allow_hyphen_values = true)]
        window: String,
        /// Soliton mode "kappa0,c0"; repeat for a two-soliton solution
        #[arg(long = "mode", required = true)]
        modes: Vec<String>,
        /// Output file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evolve staircase initial data across the window it spans
    Evolve {
        /// Staircase CSV (parameters are read from its header)
        #[arg(long)]
        staircase: PathBuf,
        /// Residual bound checked after evolution
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite and emit a JSON report
    Verify {
        /// One of the named suites, or "all"
        #[arg(long, default_value = "all")]
        suite: String,
        /// Seed for every randomised ingredient
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the flow of a symmetry characteristic over a stored window
    Flow {
        /// Grid CSV produced by `soliton` or `evolve`
        #[arg(long)]
        input: PathBuf,
        /// Characteristic as JSON, e.g. {"kind":"Xn","k":0}
        #[arg(long = "char", default_value = r#"{"kind":"Xn","k":0}"#)]
        charac: String,
        #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
        eps: f64,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a window of the similarity-reduced equation
    Painleve {
        /// Similarity weight
        #[arg(long, default_value_t = 1.0)]
        w: f64,
        /// Constraint offset
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        c: f64,
        #[arg(long, default_value = "2,1")]
        params: String,
        #[arg(long, default_value = "1,1,38,38", allow_hyphen_values = true)]
        window: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 6000)]
        trials: usize,
        /// Write the band mapped back to the full quad equation instead
        #[arg(long)]
        mapped: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a differential-difference limit of a soliton profile
    Continuum {
        /// One of v, q_pot, dkdv, volterra
        #[arg(long, default_value = "volterra")]
        kind: String,
        /// Profile half-width in lattice sites
        #[arg(long, default_value_t = 150)]
        half_width: i64,
        #[arg(long, default_value_t = 0.2)]
        tau: f64,
        #[arg(long, default_value_t = 25)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn open_out(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn parse_window(s: &str) -> Result<(i64, i64, usize, usize)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(Error::Parse(format!("window must be n0,m0,cols,rows, got '{s}'")));
    }
    let n0 = parts[0].parse().map_err(|_| Error::Parse(format!("bad n0 '{}'", parts[0])))?;
    let m0 = parts[1].parse().map_err(|_| Error::Parse(format!("bad m0 '{}'", parts[1])))?;
    let nc = parts[2].parse().map_err(|_| Error::Parse(format!("bad cols '{}'", parts[2])))?;
    let mr = parts[3].parse().map_err(|_| Error::Parse(format!("bad rows '{}'", parts[3])))?;
    Ok((n0, m0, nc, mr))
}

fn parse_mode(s: &str) -> Result<Mode> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(Error::Parse(format!("mode must be kappa0,c0, got '{s}'")));
    }
    let kappa0 = parts[0].parse().map_err(|_| Error::Parse(format!("bad kappa0 '{}'", parts[0])))?;
    let c0 = parts[1].parse().map_err(|_| Error::Parse(format!("bad c0 '{}'", parts[1])))?;
    Ok(Mode { kappa0, c0 })
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Soliton { params, window, modes, out } => {
            let prm: LatticeParams = params.parse()?;
            let (n0, m0, nc, mr) = parse_window(&window)?;
            let modes = modes.iter().map(|m| parse_mode(m)).collect::<Result<Vec<_>>>()?;
            let spec = SolitonSpec { modes };
            let g = soliton_grid(&spec, &prm, n0, m0, nc, mr)?;
            g.write_csv(&mut open_out(&out)?, &prm)
        }
        Cmd::Evolve { staircase, tol, out } => {
            let file = BufReader::new(File::open(&staircase)?);
            let (stair, prm) = Staircase::read_csv(file)?;
            let g = evolve(&stair, &prm)?;
            let r = residual_max(&g, &prm)?;
            eprintln!("max residual {r:.3e} over {}x{}", g.n_cols(), g.m_rows());
            if r > tol {
                eprintln!("error: RESIDUAL_EXCEEDS_TOL {r:.3e} > {tol:.3e}");
                std::process::exit(1);
            }
            g.write_csv(&mut open_out(&out)?, &prm)
        }
        Cmd::Verify { suite, seed, out } => {
            let rep = run_suite(&suite, &VerifyConfig { seed })?;
            for case in &rep.cases {
                eprintln!(
                    "{} {} (metric {:.3e}, tolerance {:.3e})",
                    if case.pass { "PASS" } else { "FAIL" },
                    case.name,
                    case.metric,
                    case.tolerance
                );
            }
            let mut w = open_out(&out)?;
            w.write_all(rep.to_json().as_bytes())?;
            w.flush()?;
            if !rep.all_pass() {
                eprintln!(
                    "error: VERIFICATION_FAILED {} of {} cases failed in suite {}",
                    rep.failed(),
                    rep.cases.len(),
                    rep.suite
                );
                std::process::exit(1);
            }
            Ok(())
        }
        Cmd::Flow { input, charac, eps, steps, out } => {
            let file = BufReader::new(File::open(&input)?);
            let (g, prm) = Grid::read_csv(file)?;
            let c: Characteristic = serde_json::from_str(&charac)?;
            let flowed = flow_integrate(&c, &g, &prm, eps, steps)?;
            flowed.write_csv(&mut open_out(&out)?, &prm)
        }
        Cmd::Painleve { w, c, params, window, seed, trials, mapped, out } => {
            let prm: LatticeParams = params.parse()?;
            let rp = ReductionParams::new(w, c, prm.p, prm.q)?;
            let (n0, m0, nc, mr) = parse_window(&window)?;
            let g = painleve_generate(&rp, n0, m0, nc, mr, &GenerateSeed::Scan {
                rng_seed: seed,
                trials,
            })?;
            let g = if mapped { map_forward(&g, &prm)? } else { g };
            g.write_csv(&mut open_out(&out)?, &prm)
        }
        Cmd::Continuum { kind, half_width, tau, steps, out } => {
            let kind: DdeKind = kind.parse()?;
            let prm = LatticeParams::new(2.0, 1.0).unwrap();
            let spec = SolitonSpec::one(0.5, 1.0);
            let u = |k: i64| soliton_value(k, 0, &spec, &prm);
            let q: Vec<f64> = (-half_width..=half_width)
                .map(|k| Ok(2.0 * prm.p + u(k)? - u(k + 2)?))
                .collect::<Result<_>>()?;
            let k0 = -half_width;
            let state = match kind {
                DdeKind::V => ContinuumState::new(
                    k0,
                    0.0,
                    (-half_width..=half_width).map(u).collect::<Result<_>>()?,
                ),
                DdeKind::QPot => ContinuumState::new(k0, 0.0, q),
                DdeKind::DKdV => ContinuumState::new(k0, 0.0, miura_s(&q, k0, prm.p)?),
                DdeKind::Volterra => {
                    ContinuumState::new(k0 + 1, 0.0, miura_q_to_a(&q, k0, prm.p)?)
                }
            };
            let evolved = integrate_dde(kind, &state, prm.p, tau, steps)?;
            evolved.write_csv(&mut open_out(&out)?, prm.p)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {} {}", e.code(), e);
            ExitCode::from(e.exit_code())
        }
    }
}
