//! `nlsq`: scattering, quench, reconstruction, Darboux and verification runs.
//!
//! Each run writes one directory holding `config.json` (the resolved configuration),
//! the JSON results, CSV projections and `manifest.json`. Exit status 1 means a
//! configuration or I/O problem, 2 a numerical failure or a failed verification.

mod config;

use clap::{Parser, Subcommand};
use config::RunConfig;
use nls_quench::darboux::{apply_bt, dual_quench, strip_solitons, DarbouxConfig, DarbouxStep};
use nls_quench::glm::{reconstruct_field, RadiativeData, XGrid};
use nls_quench::io::{self, ProfileJson, QuenchReportJson, ScatteringJson, ZeroJson};
use nls_quench::model::{Asymptotics, FieldProfile, Regime};
use nls_quench::nls::{boundary_fraction, hamiltonian, isospectral_check, snapshots};
use nls_quench::quench::{classify_post_quench, default_x_samples, quench_map, verify_factorization};
use nls_quench::zeros::{find_zeros, ZeroRegion};
use nls_quench::zs::scatter_grid;
use nls_quench::Error;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "nlsq", version, about = "Inverse scattering for NLSE coupling quenches")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: nlsq-<command>)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the k and x loops
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Builtin profile: sech, kink, fd-focusing, zero, gaussian
    #[arg(long, global = true)]
    builtin: Option<String>,
}

#[derive(Subcommand, Clone, Copy, Debug)]
enum Command {
    /// Scattering data a(k), b(k) and the zeros of a
    Scatter,
    /// Scatter at the pre- and post-quench couplings and classify the outcome
    Quench,
    /// Zeros of a(k) in the upper half-plane
    Zeros,
    /// Split-step evolution to time t
    Evolve,
    /// Radiative field from scattering data
    Reconstruct,
    /// Darboux steps, soliton stripping or the dual quench
    Darboux,
    /// Determinant, factorization and isospectrality checks
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Scatter => "scatter",
            Command::Quench => "quench",
            Command::Zeros => "zeros",
            Command::Evolve => "evolve",
            Command::Reconstruct => "reconstruct",
            Command::Darboux => "darboux",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    /// Verification ran but at least one residual is above its threshold.
    Failed(String),
}

impl CliError {
    /// Library errors met while loading inputs are configuration errors.
    pub fn config(e: Error) -> CliError {
        CliError::Config(e.to_string())
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) | CliError::Failed(_) => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::InvalidCoupling(_) | Error::EmptyGrid(_) | Error::NonUniformGrid(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
            CliError::Failed(m) => write!(f, "verification failed: {m}"),
        }
    }
}

#[derive(Serialize)]
struct ManifestEntry {
    name: String,
    bytes: usize,
}

#[derive(Serialize)]
struct Manifest {
    command: &'static str,
    version: &'static str,
    files: Vec<ManifestEntry>,
}

/// The run directory; files are recorded in the order written.
struct Run {
    dir: PathBuf,
    manifest: Manifest,
}

impl Run {
    fn create(dir: &Path, command: Command) -> Result<Run, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Run {
            dir: dir.to_path_buf(),
            manifest: Manifest { command: command.name(), version: env!("CARGO_PKG_VERSION"), files: Vec::new() },
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        self.manifest.files.push(ManifestEntry { name: name.to_string(), bytes: bytes.len() });
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<(), CliError> {
        self.write(name, io::to_json(v).as_bytes())
    }

    fn csv(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<(), CliError> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| CliError::Config(e.to_string()))?;
        self.write(name, &buf)
    }

    fn profile(&mut self, stem: &str, p: &FieldProfile) -> Result<(), CliError> {
        self.json(&format!("{stem}.json"), &ProfileJson::from_profile(p))?;
        self.csv(&format!("{stem}.csv"), |w| io::profile_csv(w, p))
    }

    fn finish(self) -> Result<(), CliError> {
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, io::to_json(&self.manifest))
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
    }
}

fn zero_records(zeros: &[nls_quench::model::DiscreteEigenvalue]) -> Vec<ZeroJson> {
    zeros
        .iter()
        .map(|z| ZeroJson { re: z.position.re, im: z.position.im, order: z.order, norming: z.norming.map(Into::into) })
        .collect()
}

fn cmd_scatter(cfg: &RunConfig, run: &mut Run) -> Result<(), CliError> {
    let c = cfg.coupling();
    let p = cfg.profile()?;
    let kg = cfg.kgrid(p.asymptotics(), c)?;
    let sd = scatter_grid(&p, c, &kg, &cfg.integrator)?;
    run.json("scattering.json", &ScatteringJson::from_data(&sd))?;
    run.csv("scattering.csv", |w| io::scattering_csv(w, &sd))?;
    run.csv("zeros.csv", |w| io::zeros_csv(w, &sd.discrete))
}

fn cmd_quench(cfg: &RunConfig, run: &mut Run) -> Result<(), CliError> {
    let c = cfg.coupling();
    let cp = cfg.coupling_post.ok_or_else(|| CliError::Config("quench needs \"coupling_post\"".into()))?;
    let p = cfg.profile()?;
    let kg = cfg.kgrid(p.asymptotics(), c)?;
    let report = quench_map(&p, c, cp, &kg, &cfg.integrator)?;
    let cls = classify_post_quench(&report, cfg.nu.unwrap_or(cp.value().norm()));
    let resid = if cfg.factorization {
        let f = verify_factorization(&p, c, cp, &kg, &default_x_samples(&p), &cfg.integrator)?;
        Some(f.max_residual)
    } else {
        None
    };
    run.json("quench.json", &QuenchReportJson::new(&report, &cls, resid))?;
    run.csv("pre.csv", |w| io::scattering_csv(w, &report.pre))?;
    run.csv("post.csv", |w| io::scattering_csv(w, &report.post))?;
    run.csv("zeros.csv", |w| io::zeros_csv(w, &report.soliton_inventory))?;
    eprintln!("{:?}: predicted_N = {}, found_N = {}", cls.label, cls.predicted_n, cls.found_n);
    Ok(())
}

fn cmd_zeros(cfg: &RunConfig, run: &mut Run) -> Result<(), CliError> {
    let c = cfg.coupling();
    let p = cfg.profile()?;
    let kg = cfg.kgrid(p.asymptotics(), c)?;
    let region = cfg.region.unwrap_or_else(|| ZeroRegion::default_for(&p, c, &kg));
    let zeros = find_zeros(&p, c, &region, &cfg.integrator)?;
    #[derive(Serialize)]
    struct ZerosOut {
        region: ZeroRegion,
        zeros: Vec<ZeroJson>,
    }
    run.json("zeros.json", &ZerosOut { region, zeros: zero_records(&zeros) })?;
    run.csv("zeros.csv", |w| io::zeros_csv(w, &zeros))
}

fn cmd_evolve(cfg: &RunConfig, run: &mut Run) -> Result<(), CliError> {
    let c = cfg.coupling();
    let p = cfg.profile()?;
    let t = cfg.t.ok_or_else(|| CliError::Config("evolve needs \"t\"".into()))?;
    let snaps = snapshots(&p, c, t, cfg.snapshot_every.unwrap_or(0), &cfg.stepper)?;
    let (_, last) = snaps.last().expect("snapshots end with the final field");
    #[derive(Serialize)]
    struct EvolveOut {
        t: f64,
        mass_initial: f64,
        mass_final: f64,
        hamiltonian_initial: f64,
        hamiltonian_final: f64,
        boundary_fraction: f64,
    }
    let first = &snaps[0].1;
    run.json(
        "evolve.json",
        &EvolveOut {
            t,
            mass_initial: first.mass(),
            mass_final: last.mass(),
            hamiltonian_initial: hamiltonian(first, c),
            hamiltonian_final: hamiltonian(last, c),
            boundary_fraction: boundary_fraction(last),
        },
    )?;
    run.profile("final", last)?;
    if snaps.len() > 1 {
        let mut cols: [Vec<f64>; 5] = Default::default();
        for (tt, q) in &snaps {
            for (i, z) in q.values().iter().enumerate() {
                cols[0].push(*tt);
                cols[1].push(q.x(i));
                cols[2].push(z.re);
                cols[3].push(z.im);
                cols[4].push(z.norm());
            }
        }
        run.csv("snapshots.csv", |w| {
            io::write_csv(w, &["t", "x", "re", "im", "abs"], &[&cols[0], &cols[1], &cols[2], &cols[3], &cols[4]])
        })?;
    }
    Ok(())
}

fn cmd_reconstruct(cfg: &RunConfig, run: &mut Run) -> Result<(), CliError> {
    let (sd, xg) = match cfg.scattering_file()? {
        Some(sd) => (sd, cfg.xgrid.unwrap_or(XGrid { half_width: 20.0, n: 401 })),
        None => {
            let c = cfg.coupling();
            let p = cfg.profile()?;
            if p.asymptotics() != Asymptotics::Schwartz {
                return Err(CliError::Config("reconstruct handles rapidly decreasing fields only".into()));
            }
            let kg = cfg.kgrid(p.asymptotics(), c)?;
            let xg = cfg.xgrid.unwrap_or(XGrid { half_width: p.half_width(), n: p.len().min(201) });
            (scatter_grid(&p, c, &kg, &cfg.integrator)?, xg)
        }
    };
    let rd = RadiativeData::from_scattering(&sd).map_err(|e| CliError::Config(format!("refusing to reconstruct: {e}")))?;
    let c0 = cfg.c0.unwrap_or(sd.coupling);
    let q = reconstruct_field(&rd, c0, &xg, cfg.t.unwrap_or(0.0), &cfg.resolvent)?;
    run.profile("reconstructed", &q)
}

fn darboux_config(cfg: &RunConfig, p: &FieldProfile) -> Result<DarbouxConfig, CliError> {
    let mut dc = DarbouxConfig::new(cfg.kgrid(p.asymptotics(), cfg.coupling())?);
    dc.integrator = cfg.integrator;
    dc.region = cfg.region;
    dc.resolvent = cfg.resolvent;
    if let Some(m) = cfg.dual_mode {
        dc.dual_mode = m;
    }
    Ok(dc)
}

fn cmd_darboux(cfg: &RunConfig, run: &mut Run) -> Result<(), CliError> {
    let c = cfg.coupling();
    let p = cfg.profile()?;
    let dc = darboux_config(cfg, &p)?;
    #[derive(Serialize)]
    struct DarbouxOut {
        operation: &'static str,
        steps: Vec<DarbouxStep>,
    }
    let (q, out) = if let Some(c0) = cfg.c0 {
        let xg = cfg.xgrid.unwrap_or(XGrid { half_width: p.half_width(), n: p.len() });
        (dual_quench(&p, c, c0, &xg, &dc)?, DarbouxOut { operation: "dual_quench", steps: Vec::new() })
    } else if cfg.strip {
        let (q, steps) = strip_solitons(&p, c, &dc)?;
        (q, DarbouxOut { operation: "strip", steps })
    } else if !cfg.steps.is_empty() {
        let mut q = p;
        for s in &cfg.steps {
            q = apply_bt(&q, c, s, &dc)?;
        }
        (q, DarbouxOut { operation: "steps", steps: cfg.steps.clone() })
    } else {
        return Err(CliError::Config("darboux needs \"steps\", \"strip\": true or \"c0\"".into()));
    };
    run.json("darboux.json", &out)?;
    run.profile("transformed", &q)
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    threshold: f64,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    skipped: Option<String>,
}

impl Check {
    fn measured(name: &'static str, value: f64, threshold: f64) -> Check {
        Check { name, value: Some(value), threshold, passed: value <= threshold, skipped: None }
    }
    fn skipped(name: &'static str, threshold: f64, why: &str) -> Check {
        Check { name, value: None, threshold, passed: true, skipped: Some(why.to_string()) }
    }
}

fn cmd_verify(cfg: &RunConfig, run: &mut Run) -> Result<(), CliError> {
    let c = cfg.coupling();
    let p = cfg.profile()?;
    let th = cfg.thresholds;
    let kg = cfg.kgrid(p.asymptotics(), c)?;
    let sd = scatter_grid(&p, c, &kg, &cfg.integrator)?;
    let mut checks = vec![Check::measured("det_drift", sd.worst_det_drift().map_or(0.0, |d| d.1), th.det_drift)];

    let cp = cfg.coupling_post.or_else(|| nls_quench::model::Coupling::new(2.0 * c.value()).ok());
    match cp {
        Some(cp) if c.regime() != Regime::Free => {
            let f = verify_factorization(&p, c, cp, &kg, &default_x_samples(&p), &cfg.integrator)?;
            checks.push(Check::measured("factorization", f.max_residual, th.factorization));
            checks.push(Check::measured("factorization_std", f.max_std_across_x, th.factorization_std));
            checks.push(Check::measured("factorization_boundary", f.boundary_residual, th.factorization));
            checks.push(Check::measured("theta_unitarity", f.unitarity, th.theta_unitarity));
        }
        _ => checks.push(Check::skipped("factorization", th.factorization, "free coupling")),
    }

    let t = cfg.t.unwrap_or(0.1);
    if p.asymptotics() == Asymptotics::Schwartz && t > 0.0 {
        let iso = isospectral_check(&p, c, t, &kg, &cfg.stepper, &cfg.integrator)?;
        checks.push(Check::measured("abs_a_drift", iso.max_abs_a_drift, th.abs_a_drift));
        checks.push(Check::measured("phase_residual", iso.max_phase_residual_minus, th.phase_residual));
    } else {
        checks.push(Check::skipped("isospectrality", th.abs_a_drift, "needs a rapidly decreasing field and t > 0"));
    }

    let failed: Vec<&str> = checks.iter().filter(|ch| !ch.passed).map(|ch| ch.name).collect();
    #[derive(Serialize)]
    struct VerifyOut<'a> {
        passed: bool,
        checks: &'a [Check],
    }
    run.json("verify.json", &VerifyOut { passed: failed.is_empty(), checks: &checks })?;
    for ch in &checks {
        match (&ch.value, &ch.skipped) {
            (Some(v), _) => eprintln!("{:<24} {:.3e} (<= {:.1e}) {}", ch.name, v, ch.threshold, if ch.passed { "ok" } else { "FAIL" }),
            (None, Some(why)) => eprintln!("{:<24} skipped: {why}", ch.name),
            _ => {}
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("above threshold: {}", failed.join(", "))))
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(b) = &cli.builtin {
        cfg.set_builtin(b);
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    cfg.resolve()?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from(format!("nlsq-{}", cli.command.name())));
    let mut run = Run::create(&dir, cli.command)?;
    // the echo is what a rerun should be given, so the output path is left out
    let echo = RunConfig { out: None, ..cfg.clone() };
    run.json("config.json", &echo)?;
    let result = match cli.command {
        Command::Scatter => cmd_scatter(&cfg, &mut run),
        Command::Quench => cmd_quench(&cfg, &mut run),
        Command::Zeros => cmd_zeros(&cfg, &mut run),
        Command::Evolve => cmd_evolve(&cfg, &mut run),
        Command::Reconstruct => cmd_reconstruct(&cfg, &mut run),
        Command::Darboux => cmd_darboux(&cfg, &mut run),
        Command::Verify => cmd_verify(&cfg, &mut run),
    };
    // a failed verification still leaves its report and manifest behind
    match result {
        Ok(()) => run.finish(),
        Err(e @ CliError::Failed(_)) => {
            run.finish()?;
            Err(e)
        }
        Err(e) => Err(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nlsq: {e}");
            ExitCode::from(e.code())
        }
    }
}
