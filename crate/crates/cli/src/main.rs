//! `qng`: certify quantum non-Gaussianity from vacuum probabilities, print
//! threshold and figure tables, simulate detector runs and plan experiments.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qng_core::certification::{
    certify, optimal_witness, CertificationResult, OptimalWitness, Scheme, VacuumPair,
};
use qng_core::exec::Exec;
use qng_core::measurement_sim::{
    estimate_witness, simulate_double, simulate_single, DetectorConfig, Observation,
    WitnessEstimate,
};
use qng_core::planner::{required_runs, PlanResult};
use qng_core::state_models::StateSpec;
use qng_core::tables::{boundary_table, figure_table, FigureId};
use qng_core::Error;

#[derive(Parser)]
#[command(
    name = "qng",
    version,
    about = "Quantum non-Gaussianity from vacuum probabilities"
)]
struct Cli {
    /// Worker threads for parallel loops (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gaussian threshold curve as a table.
    Boundary {
        #[arg(long = "T")]
        t: f64,
        #[arg(long, default_value_t = 201)]
        v_points: usize,
        #[arg(long)]
        json: bool,
    },
    /// Verdict for a state or a measured vacuum pair.
    Certify {
        #[command(flatten)]
        source: Source,
        #[arg(long = "T")]
        t: f64,
        /// Runs behind the pair, used for the significance.
        #[arg(long = "N")]
        n: Option<u64>,
    },
    /// Data table behind one of the figures.
    Figure {
        id: String,
        /// Grid points per curve (default depends on the figure).
        #[arg(long, alias = "v-points")]
        points: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Monte Carlo run of a detection scheme, followed by certification.
    Simulate {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = SchemeArg::Double)]
        scheme: SchemeArg,
        #[arg(long = "T")]
        t: f64,
        #[arg(long = "eta-a", default_value_t = 1.0)]
        eta_a: f64,
        /// Efficiency of the second detector (double scheme, default 1).
        #[arg(long = "eta-b")]
        eta_b: Option<f64>,
        #[arg(long = "N")]
        n: u64,
        /// Attenuated runs of the single scheme (default N/2).
        #[arg(long = "K")]
        k: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Runs needed to certify a state with either scheme.
    Plan {
        #[command(flatten)]
        source: Source,
        #[arg(long = "T")]
        t: f64,
    },
}

/// Where the state comes from: a JSON spec file, the noisy single-photon
/// model, or a measured pair.
#[derive(Args)]
struct Source {
    #[arg(long, conflicts_with_all = ["eta", "nbar", "p0", "q0"])]
    state: Option<PathBuf>,
    /// Single-photon fraction of the noisy single-photon model.
    #[arg(long, conflicts_with_all = ["p0", "q0"])]
    eta: Option<f64>,
    /// Mean background photon number of the noisy single-photon model.
    #[arg(long, requires = "eta")]
    nbar: Option<f64>,
    #[arg(long, requires = "q0")]
    p0: Option<f64>,
    #[arg(long, requires = "p0")]
    q0: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Single,
    Double,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Single => Scheme::SingleApd,
            SchemeArg::Double => Scheme::DoubleApd,
        }
    }
}

const EXIT_INVALID: u8 = 2;
const EXIT_NONPHYSICAL: u8 = 3;
const EXIT_NOT_CERTIFIABLE: u8 = 4;

impl Source {
    fn spec(&self) -> anyhow::Result<Option<StateSpec>> {
        if let Some(path) = &self.state {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let spec = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidParams(format!("{}: {e}", path.display())))?;
            return Ok(Some(spec));
        }
        if let Some(eta) = self.eta {
            return Ok(Some(StateSpec::NoisySinglePhoton {
                eta,
                nbar: self.nbar.unwrap_or(0.0),
            }));
        }
        Ok(None)
    }

    fn pair(&self, t: f64) -> anyhow::Result<VacuumPair> {
        if let (Some(p0), Some(q0)) = (self.p0, self.q0) {
            return Ok(VacuumPair::new(p0, q0, t)?);
        }
        match self.spec()? {
            Some(spec) => {
                let (p0, q0) = spec.vacuum_pair(t)?;
                Ok(VacuumPair::new(p0, q0, t)?)
            }
            None => bail!(Error::InvalidParams(
                "give a state with --state, --eta [--nbar] or --p0 --q0".into()
            )),
        }
    }
}

#[derive(Serialize)]
struct EstimatedPair {
    p0: f64,
    q0: f64,
    /// Raw estimates fell outside the physical region and were moved onto it.
    projected: bool,
}

#[derive(Serialize)]
struct SimulationReport {
    state: StateSpec,
    #[serde(rename = "T")]
    t: f64,
    eta_a: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta_b: Option<f64>,
    seed: u64,
    tally: Observation,
    estimated: EstimatedPair,
    certification: Option<CertificationResult>,
    optimal_witness: Option<OptimalWitness>,
    witness_estimate: Option<WitnessEstimate>,
    /// `(W_hat - W_G) / sigma_hat` for the optimal witness.
    significance: Option<f64>,
}

#[derive(Serialize)]
struct PlanReport {
    #[serde(rename = "T")]
    t: f64,
    p0: f64,
    q0: f64,
    #[serde(flatten)]
    plan: PlanResult,
    /// Whole runs: `N_S` and `N_D` rounded up.
    runs_single: u64,
    runs_double: u64,
}

/// Moves estimates onto the physical region `p0 <= q0 <= 1 - T(1 - p0)`.
fn project(p0: f64, q0: f64, t: f64) -> EstimatedPair {
    let p = p0.clamp(0.0, 1.0);
    let q = q0.clamp(p, 1.0 - t * (1.0 - p));
    EstimatedPair {
        p0: p,
        q0: q,
        projected: p != p0 || q != q0,
    }
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    source: &Source,
    scheme: Scheme,
    t: f64,
    eta_a: f64,
    eta_b: Option<f64>,
    n: u64,
    k: Option<u64>,
    seed: u64,
) -> anyhow::Result<SimulationReport> {
    let Some(state) = source.spec()? else {
        bail!(Error::InvalidParams(
            "simulation needs a state: --state or --eta [--nbar]".into()
        ));
    };
    let dist = state.distribution()?;
    let tally = match scheme {
        Scheme::DoubleApd => {
            if k.is_some() {
                bail!(Error::InvalidParams(
                    "--K applies to the single scheme only".into()
                ));
            }
            let cfg = DetectorConfig::new(t, eta_a, eta_b.unwrap_or(1.0))?;
            Observation::Double(simulate_double(&dist, &cfg, n, seed)?)
        }
        Scheme::SingleApd => {
            if eta_b.is_some() {
                bail!(Error::InvalidParams(
                    "--eta-b applies to the double scheme only".into()
                ));
            }
            Observation::Single(simulate_single(
                &dist,
                t,
                eta_a,
                n,
                k.unwrap_or(n / 2),
                seed,
            )?)
        }
    };
    let (p_hat, q_hat) = match &tally {
        Observation::Double(x) => x.estimates(),
        Observation::Single(x) => x.estimates(),
    };
    let estimated = project(p_hat, q_hat, t);

    // a pair without vacuum events has no tangent witness
    let (certification, optimal, witness_estimate, significance) = if estimated.p0 > 0.0 {
        let pair = VacuumPair::new(estimated.p0, estimated.q0, t)?;
        let opt = optimal_witness(&pair, scheme, n)?;
        let est = estimate_witness(&tally, opt.lambda);
        let sig = est
            .var_hat
            .filter(|v| *v > 0.0)
            .map(|v| (est.w_hat - opt.w_g) / v.sqrt());
        (Some(certify(&pair)?), Some(opt), Some(est), sig)
    } else {
        (None, None, None, None)
    };
    Ok(SimulationReport {
        state,
        t,
        eta_a,
        eta_b: matches!(scheme, Scheme::DoubleApd).then(|| eta_b.unwrap_or(1.0)),
        seed,
        tally,
        estimated,
        certification,
        optimal_witness: optimal,
        witness_estimate,
        significance,
    })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let exec = Exec::default();
    let text = match cli.command {
        Command::Boundary { t, v_points, json } => {
            output::table(&boundary_table(t, v_points, exec)?, json)?
        }
        Command::Certify { source, t, n } => {
            let mut pair = source.pair(t)?;
            if let Some(n) = n {
                pair = pair.with_runs(n);
            }
            output::json(&certify(&pair)?)?
        }
        Command::Figure { id, points, json } => {
            let id: FigureId = id.parse()?;
            let points = points.unwrap_or(match id {
                FigureId::Fig2 | FigureId::Fig4 => 201,
                FigureId::Fig3 | FigureId::Fig5 => 41,
            });
            output::table(&figure_table(id, points, exec)?, json)?
        }
        Command::Simulate {
            source,
            scheme,
            t,
            eta_a,
            eta_b,
            n,
            k,
            seed,
        } => output::json(&simulate(
            &source,
            scheme.into(),
            t,
            eta_a,
            eta_b,
            n,
            k,
            seed,
        )?)?,
        Command::Plan { source, t } => {
            let pair = source.pair(t)?;
            let plan = required_runs(&pair)?;
            output::json(&PlanReport {
                t,
                p0: pair.p0,
                q0: pair.q0,
                plan,
                runs_single: plan.n_s.ceil() as u64,
                runs_double: plan.n_d.ceil() as u64,
            })?
        }
    };
    output::emit(cli.out.as_deref(), &text)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::NonphysicalPair { .. }) => EXIT_NONPHYSICAL,
        Some(Error::NotCertifiable(_)) => EXIT_NOT_CERTIFIABLE,
        Some(_) => EXIT_INVALID,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.threads {
        #[cfg(feature = "parallel")]
        Some(threads) => match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(|| run(cli)),
            Err(e) => Err(e.into()),
        },
        _ => run(cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
