//! The `omniport` command line.
//!
//! Exit codes: 0 on success, 1 for invalid input (bad flags, malformed or
//! physically invalid scenario, unwritable output), 2 for numerical failure
//! (root bracketing, unstable operating point, oracle non-convergence or
//! disagreement).

use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use omniport::error::{
    EmitError, MeanFieldError, MetricsError, OracleError, ScenarioError, SweepError,
};
use omniport::meanfield;
use omniport::metrics::{self, Direction, Excitation, Scenario, BLOCKADE_SPAN};
use omniport::model::{DetuningGrid, Drive, NetworkConfig, PortSignal};
use omniport::oracle::{self, NonlinearOptions, TrajectorySpec};
use omniport::response::solve_response;
use omniport::scenario::ScenarioDocument;
use omniport::sweep::{self, Metric, SweepOptions};
use omniport::table::{self, Format, Table};

/// Relative tolerance for the time-domain check of the rotating-wave response.
const RWA_ORACLE_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "omniport",
    version,
    about = "Steady-state simulator for multi-port optomechanical networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario document (TOML).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Output file; defaults to the document's output.path, then stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; defaults to the document's output.format, then csv.
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Worker threads for grid evaluation.
    #[arg(long, global = true, env = "OMNIPORT_THREADS")]
    threads: Option<usize>,
    /// Detuning grid "min:max:count", overriding the document.
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Suppress summaries and warnings on stderr.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a scenario document and report warnings.
    Validate,
    /// Mean-field branches of a physical network.
    Meanfield,
    /// Transmission rates, output energies and mechanical excitation over the grid.
    Spectrum,
    /// Parameter sweep described by the document's sweep section.
    Sweep,
    /// Isolation ratio over the grid, with blockade checks.
    Isolate,
    /// Output-energy routing under equal in-phase signals.
    Route,
    /// Cross-check the frequency-domain response against time-domain integration.
    OracleCheck,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Scenario(ScenarioError),
    Sweep(SweepError),
    Metrics(MetricsError),
    MeanField(MeanFieldError),
    Oracle(OracleError),
    Emit(EmitError),
    Mismatch(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Mismatch(m) => f.write_str(m),
            CliError::Scenario(e) => e.fmt(f),
            CliError::Sweep(e) => e.fmt(f),
            CliError::Metrics(e) => e.fmt(f),
            CliError::MeanField(e) => e.fmt(f),
            CliError::Oracle(e) => e.fmt(f),
            CliError::Emit(e) => e.fmt(f),
        }
    }
}

macro_rules! from_err {
    ($($t:ty => $v:ident),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self { CliError::$v(e) }
        }
    )*};
}
from_err!(ScenarioError => Scenario, SweepError => Sweep, MetricsError => Metrics,
          MeanFieldError => MeanField, OracleError => Oracle, EmitError => Emit);

fn meanfield_code(e: &MeanFieldError) -> i32 {
    match e {
        MeanFieldError::Model(_) => 1,
        _ => 2,
    }
}

// Every metrics failure is an input problem (bad ports, grid or drive).
fn scenario_code(e: &ScenarioError) -> i32 {
    match e {
        ScenarioError::MeanField(m) => meanfield_code(m),
        _ => 1,
    }
}

fn sweep_code(e: &SweepError) -> i32 {
    match e {
        SweepError::Point { source, .. } => sweep_code(source),
        SweepError::Scenario(s) => scenario_code(s),
        _ => 1,
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Emit(_) => 1,
            CliError::Scenario(e) => scenario_code(e),
            CliError::Sweep(e) => sweep_code(e),
            CliError::Metrics(_) => 1,
            CliError::MeanField(e) => meanfield_code(e),
            CliError::Oracle(OracleError::Model(_)) => 1,
            CliError::Oracle(OracleError::MeanField(e)) => meanfield_code(e),
            CliError::Oracle(_) | CliError::Mismatch(_) => 2,
        }
    }
}

/// Parse `argv` (including the program name), run the subcommand and return
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.common.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(CliError::Usage(format!("cannot start {n} threads: {e}"))),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(()) => 0,
        // A closed downstream pipe (`| head`) is not a failure.
        Err(CliError::Emit(EmitError::Io { source, .. }))
            if source.kind() == std::io::ErrorKind::BrokenPipe =>
        {
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

struct Context<'a> {
    common: &'a Common,
    doc: ScenarioDocument,
}

impl Context<'_> {
    fn note(&self, msg: impl fmt::Display) {
        if !self.common.quiet {
            eprintln!("{msg}");
        }
    }

    fn grid(&self) -> Result<DetuningGrid, CliError> {
        if let Some(spec) = &self.common.grid {
            return parse_grid(spec);
        }
        self.doc.grid()?.ok_or_else(|| {
            CliError::Usage("no detuning grid: add a [grid] section or pass --grid".into())
        })
    }

    fn emit(&self, table: &Table) -> Result<(), CliError> {
        let out = self.doc.output.as_ref();
        let format = self
            .common
            .format
            .or_else(|| out.and_then(|o| o.format))
            .unwrap_or_default();
        let path: Option<&Path> = self
            .common
            .out
            .as_deref()
            .or_else(|| out.and_then(|o| o.path.as_deref()).map(Path::new));
        table.write(path, format)?;
        Ok(())
    }

    fn hash(&self) -> Result<String, CliError> {
        Ok(self.doc.hash()?)
    }

    fn scenario(&self) -> Result<Scenario, CliError> {
        let warnings = self.doc.check()?;
        for w in warnings {
            self.note(format_args!("warning: {}", w.message));
        }
        Ok(self.doc.scenario()?.0)
    }
}

fn parse_grid(spec: &str) -> Result<DetuningGrid, CliError> {
    let bad = || CliError::Usage(format!("--grid expects min:max:count, got `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    DetuningGrid::linspace(a, b, n).map_err(|e| CliError::Usage(format!("--grid: {e}")))
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let path = cli
        .common
        .scenario
        .as_ref()
        .ok_or_else(|| CliError::Usage("--scenario is required".into()))?;
    let doc = ScenarioDocument::load(path)?;
    let ctx = Context {
        common: &cli.common,
        doc,
    };
    match cli.command {
        Command::Validate => validate(&ctx),
        Command::Meanfield => meanfield_cmd(&ctx),
        Command::Spectrum => spectrum_cmd(&ctx),
        Command::Sweep => sweep_cmd(&ctx),
        Command::Isolate => isolate_cmd(&ctx),
        Command::Route => route_cmd(&ctx),
        Command::OracleCheck => oracle_cmd(&ctx),
    }
}

fn validate(ctx: &Context) -> Result<(), CliError> {
    let warnings = ctx.doc.check()?;
    if let Some(spec) = &ctx.common.grid {
        parse_grid(spec)?;
    }
    for w in &warnings {
        ctx.note(format_args!("warning: {}", w.message));
    }
    ctx.note(format_args!("ok ({} warnings)", warnings.len()));
    Ok(())
}

fn meanfield_cmd(ctx: &Context) -> Result<(), CliError> {
    let warnings = ctx.doc.check()?;
    for w in warnings {
        ctx.note(format_args!("warning: {}", w.message));
    }
    let NetworkConfig::Physical(net) = ctx.doc.network_config()? else {
        return Err(CliError::Usage(
            "meanfield needs a network with level = \"physical\"".into(),
        ));
    };
    let branches = meanfield::solve_mean_fields(&net)?;
    let n = net.ports.len();
    let mut columns: Vec<String> = ["branch", "x", "stable", "beta_re", "beta_im"]
        .map(String::from)
        .to_vec();
    for j in 1..=n {
        for c in ["alpha_re", "alpha_im", "delta_eff", "G_mod", "G_phase"] {
            columns.push(format!("{c}{j}"));
        }
    }
    let records = branches
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let mut row = vec![
                (k + 1) as f64,
                b.x,
                if b.stable { 1.0 } else { 0.0 },
                b.beta.re,
                b.beta.im,
            ];
            for j in 0..n {
                let g = b.couplings[j];
                row.extend([
                    b.alpha[j].re,
                    b.alpha[j].im,
                    b.delta_eff[j],
                    g.norm(),
                    g.arg(),
                ]);
            }
            row
        })
        .collect();
    ctx.note(format_args!(
        "{} branch(es), {} stable",
        branches.len(),
        branches.iter().filter(|b| b.stable).count()
    ));
    ctx.emit(&Table {
        scenario_hash: ctx.hash()?,
        axes: Vec::new(),
        columns,
        records,
    })
}

fn spectrum_cmd(ctx: &Context) -> Result<(), CliError> {
    let sc = ctx.scenario()?;
    let grid = ctx.grid()?;
    let records = metrics::spectrum(&sc, &grid)?;
    ctx.emit(&table::spectrum_table(&ctx.hash()?, &records))
}

fn sweep_cmd(ctx: &Context) -> Result<(), CliError> {
    let sc = ctx.scenario()?;
    let axes = ctx.doc.sweep_axes()?;
    if axes.is_empty() {
        return Err(CliError::Usage("no [sweep] axes in the scenario".into()));
    }
    let section = ctx.doc.sweep.as_ref().expect("axes imply a sweep section");
    let metrics: Vec<Metric> = if section.metrics.is_empty() {
        match &sc.excitation {
            Excitation::Transmission { .. } => {
                vec![Metric::TFwd, Metric::TBwd, Metric::Log10Isolation]
            }
            Excitation::Drive(_) => (0..sc.network.len())
                .map(Metric::S)
                .chain([Metric::BAbs2])
                .collect(),
        }
    } else {
        section
            .metrics
            .iter()
            .map(|m| m.parse())
            .collect::<Result<_, SweepError>>()?
    };
    let grid = match &ctx.common.grid {
        Some(g) => Some(parse_grid(g)?),
        None => ctx.doc.grid()?,
    };
    let opts = SweepOptions {
        xi: section.xi,
        grid,
        parallel: true,
    };
    let result = sweep::run_sweep(&ctx.doc, &axes, &metrics, &opts)?;
    ctx.emit(&result.to_table(&ctx.hash()?))
}

fn isolate_cmd(ctx: &Context) -> Result<(), CliError> {
    let sc = ctx.scenario()?;
    if !matches!(sc.excitation, Excitation::Transmission { .. }) {
        return Err(MetricsError::NoTransmission.into());
    }
    let grid = ctx.grid()?;
    let records = metrics::spectrum(&sc, &grid)?;
    if grid.min() <= -BLOCKADE_SPAN && grid.max() >= BLOCKADE_SPAN {
        for (name, dir) in [
            ("forward", Direction::Forward),
            ("backward", Direction::Backward),
        ] {
            let r = metrics::fipb_check(&sc, &grid, dir)?;
            ctx.note(format_args!(
                "{name} blockade: {} (max rate {:e} at xi = {})",
                if r.holds { "yes" } else { "no" },
                r.max_rate,
                r.argmax
            ));
        }
    }
    ctx.emit(&table::isolation_table(&ctx.hash()?, &records))
}

fn route_cmd(ctx: &Context) -> Result<(), CliError> {
    let sc = ctx.scenario()?;
    let grid = ctx.grid()?;
    let report = metrics::routing_report(&sc, &grid)?;
    match report.synthesis_port {
        Some(p) => ctx.note(format_args!(
            "coherent synthesis into port {} at xi = 0",
            p + 1
        )),
        None if report.at_zero.degenerate => ctx.note("no output at xi = 0"),
        None => ctx.note("no single output port at xi = 0"),
    }
    ctx.emit(&table::routing_table(&ctx.hash()?, &report))
}

fn oracle_cmd(ctx: &Context) -> Result<(), CliError> {
    let warnings = ctx.doc.check()?;
    for w in warnings {
        ctx.note(format_args!("warning: {}", w.message));
    }
    let spec = TrajectorySpec::default();
    if let NetworkConfig::Physical(net) = ctx.doc.network_config()? {
        let zero = Drive::new(vec![PortSignal::default(); net.ports.len()]);
        let est =
            oracle::integrate_nonlinear(&net, &zero, 0.0, &spec, &NonlinearOptions::default())?;
        ctx.note(format_args!(
            "settled on branch {} (residual {:e})",
            est.branch + 1,
            est.settle_residual
        ));
        return ctx.emit(&Table {
            scenario_hash: ctx.hash()?,
            axes: Vec::new(),
            columns: vec!["branch".into(), "settle_residual".into(), "drift".into()],
            records: vec![vec![
                (est.branch + 1) as f64,
                est.settle_residual,
                est.drift,
            ]],
        });
    }
    let sc = ctx.doc.scenario()?.0;
    let grid = ctx.grid()?;
    let (drive, _) = sc.drives()?;
    let rows: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        grid.values()
            .par_iter()
            .map(|&xi| -> Result<Vec<f64>, CliError> {
                let exact = solve_response(&sc.network, &drive, xi).map_err(MetricsError::from)?;
                let rwa = oracle::integrate_rwa(&sc.network, &drive, xi, &spec)?;
                let top = exact.a_minus.iter().map(|a| a.norm()).fold(0.0, f64::max);
                let err = exact
                    .a_minus
                    .iter()
                    .zip(&rwa.state.a_minus)
                    .map(|(e, r)| (e - r).norm() / e.norm().max(1e-9 * top))
                    .fold(0.0, f64::max);
                let two = oracle::integrate_two_sideband(&sc.network, None, &drive, xi, &spec)?;
                Ok(vec![xi, err, two.rwa_error, two.stokes_ratio])
            })
            .collect::<Result<_, _>>()?
    };
    let worst = rows.iter().map(|r| r[1]).fold(0.0, f64::max);
    ctx.note(format_args!(
        "largest rotating-wave oracle deviation {worst:e}"
    ));
    let table = Table {
        scenario_hash: ctx.hash()?,
        axes: vec![table::AxisInfo {
            knob: "xi".into(),
            label: "xi".into(),
            values: grid.values().to_vec(),
        }],
        columns: [
            "xi",
            "rwa_oracle_err",
            "two_sideband_rwa_err",
            "stokes_ratio",
        ]
        .map(String::from)
        .to_vec(),
        records: rows,
    };
    ctx.emit(&table)?;
    if worst > RWA_ORACLE_TOL {
        return Err(CliError::Mismatch(format!(
            "time-domain response deviates by {worst:e} (> {RWA_ORACLE_TOL:e})"
        )));
    }
    Ok(())
}
