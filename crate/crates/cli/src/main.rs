//! Command-line driver for the honeycomb-lattice toolkit.
//!
//! Configuration comes from an optional JSON file plus flag overrides; the
//! fully resolved configuration is echoed into a JSON sidecar next to every
//! output so each CSV is self-describing. Exit codes: 0 success, 2 config
//! error, 3 numerical failure (with a machine-readable JSON report on
//! stderr).

mod config;
mod output;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use honeylatt::geometry::{build_geometry, dipole_depth};
use honeylatt::planewave::{
    critical_parameter, extract_t0_numeric, fit_critical_scaling, k_path, min_gap, solve_bands,
    DistortionFamily, GapSearch, KPathPreset, SweepOptions,
};
use honeylatt::potential::{locate_minima, locate_saddles, CriticalKind, Potential};
use honeylatt::semiclassics::{t0_harmonic, t0_semiclassical, InstantonResult, ZETA_DIMENSION_NOTE};
use honeylatt::tightbinding::{tb_bands, tb_dirac_points, tb_dos, HoppingSet};
use honeylatt::{BeamConfig64, Error as CoreError, Vec2f};
use output::{fmt_float, to_sidecar_json, write_atomic, CsvWriter};
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "honeylatt",
    about = "Band structure, tight-binding and semiclassical analysis of the three-beam honeycomb optical lattice",
    version
)]
struct Cli {
    /// JSON configuration file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Lattice depth V0/E_R.
    #[arg(long, global = true)]
    v0: Option<f64>,

    /// Beam strength factors.
    #[arg(long, global = true)]
    s1: Option<f64>,
    #[arg(long, global = true)]
    s2: Option<f64>,
    #[arg(long, global = true)]
    s3: Option<f64>,

    /// Beam rotation offsets (radians, counterclockwise).
    #[arg(long, global = true)]
    theta2: Option<f64>,
    #[arg(long, global = true)]
    theta3: Option<f64>,

    /// Standing-wave phase (radians; 0 = coherent three-beam lattice).
    #[arg(long, global = true)]
    phi: Option<f64>,

    /// Laser detuning side: blue or red.
    #[arg(long, global = true)]
    detuning: Option<String>,

    /// Output directory.
    #[arg(long, global = true)]
    out_dir: Option<String>,

    /// Output file prefix.
    #[arg(long, global = true)]
    prefix: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lattice vectors, Brillouin-zone corners and derived lengths.
    Geom(GeomArgs),
    /// Potential values on a rectangle, CSV rows (x, y, v).
    Pot(PotArgs),
    /// Potential minima and saddle points with barrier heights.
    Minima,
    /// Exact Bloch bands along a k-path.
    Bands(BandsArgs),
    /// Tight-binding bands along a k-path.
    TbBands(TbBandsArgs),
    /// Dirac points of the one-parameter hopping imbalance family.
    Dirac(DiracArgs),
    /// Tight-binding density of states histogram.
    Dos(DosArgs),
    /// Hopping magnitude: exact, semiclassical and harmonic estimates.
    T0(T0Args),
    /// Critical strength imbalance eta_c over a list of hbar_e values.
    SweepEta(SweepArgs),
    /// Critical angle mismatch theta_c over a list of hbar_e values.
    SweepTheta(SweepArgs),
    /// Band gap at the zone corner as a function of the phase phi.
    PhaseScan(PhaseArgs),
}

#[derive(Args)]
struct GeomArgs {
    /// Atomic linewidth Gamma (angular frequency units) for the depth helper.
    #[arg(long)]
    linewidth: Option<f64>,
    /// Laser detuning delta (same units as the linewidth).
    #[arg(long)]
    detuning_freq: Option<f64>,
    /// Peak intensity over saturation intensity I0/I_s.
    #[arg(long)]
    intensity_ratio: Option<f64>,
}

#[derive(Args)]
struct PotArgs {
    #[arg(long)]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    y_min: Option<f64>,
    #[arg(long)]
    y_max: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
}

#[derive(Args)]
struct BandsArgs {
    /// Path preset: K2-Kp3 or G-K-M-G.
    #[arg(long)]
    path: Option<String>,
    /// Samples per path segment.
    #[arg(long)]
    samples: Option<usize>,
    /// Number of bands (<= 8).
    #[arg(long, short = 'n')]
    n: Option<usize>,
    /// Plane-wave cutoff override.
    #[arg(long)]
    cutoff: Option<usize>,
}

#[derive(Args)]
struct TbBandsArgs {
    /// Hopping imbalance t1 = gamma t0.
    #[arg(long)]
    gamma: Option<f64>,
    /// On-site half-imbalance in units of |t0|.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    path: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args)]
struct DiracArgs {
    /// Single gamma value (overrides the config list).
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Args)]
struct DosArgs {
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args)]
struct T0Args {
    /// Comma-separated list of depths V0/E_R (defaults to the config list,
    /// or to the global --v0 when given).
    #[arg(long, value_delimiter = ',')]
    v0_list: Option<Vec<f64>>,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated hbar_e values.
    #[arg(long, value_delimiter = ',')]
    hbar_e: Option<Vec<f64>>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    bracket_hi: Option<f64>,
    #[arg(long)]
    line_samples: Option<usize>,
    #[arg(long)]
    cutoff: Option<usize>,
}

#[derive(Args)]
struct PhaseArgs {
    /// Scan endpoint (radians).
    #[arg(long)]
    phi_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    cutoff: Option<usize>,
}

/// Failure classified by exit code, with a machine-readable kind.
struct CliFailure {
    code: u8,
    kind: &'static str,
    message: String,
}

fn classify_core_error(e: &CoreError) -> (u8, &'static str) {
    match e {
        CoreError::InvalidInput(_) => (2, "invalid_input"),
        CoreError::DegenerateCell { .. } => (2, "degenerate_cell"),
        CoreError::ZeroDetuning => (2, "zero_detuning"),
        CoreError::TriangleInequalityViolated(..) => (2, "triangle_inequality_violated"),
        CoreError::PhaseVariant(_) => (2, "phase_variant"),
        CoreError::NonzeroMass(_) => (2, "nonzero_mass"),
        CoreError::NotCritical { .. } => (3, "not_critical"),
        CoreError::EigensolverFailure { .. } => (3, "eigensolver_failure"),
        CoreError::BracketingFailure(_) => (3, "bracketing_failure"),
        CoreError::NonConvergence { .. } => (3, "non_convergence"),
        CoreError::RankDeficient(_) => (3, "rank_deficient"),
    }
}

fn to_failure(e: anyhow::Error) -> CliFailure {
    if let Some(core) = e.downcast_ref::<CoreError>() {
        let (code, kind) = classify_core_error(core);
        return CliFailure {
            code,
            kind,
            message: format!("{e:#}"),
        };
    }
    // Everything reached through config loading and file handling is a
    // config error; unexpected failures fall back to exit 1.
    let msg = format!("{e:#}");
    if msg.contains("config") || msg.contains("unknown") || msg.contains("expected") {
        CliFailure {
            code: 2,
            kind: "config_error",
            message: msg,
        }
    } else {
        CliFailure {
            code: 1,
            kind: "io_error",
            message: msg,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let f = to_failure(e);
            eprintln!(
                "{}",
                serde_json::json!({ "error": { "kind": f.kind, "message": f.message } })
            );
            ExitCode::from(f.code)
        }
    }
}

#[derive(Serialize)]
struct Sidecar<'a, T: Serialize> {
    command: &'static str,
    config: &'a RunConfig,
    results: T,
}

fn emit<T: Serialize>(
    cfg: &RunConfig,
    command: &'static str,
    stem: &str,
    csv: Option<String>,
    results: T,
) -> anyhow::Result<()> {
    let dir = Path::new(&cfg.output.dir);
    let mut written = Vec::new();
    if let Some(text) = csv {
        let path = dir.join(format!("{}_{stem}.csv", cfg.output.prefix));
        write_atomic(&path, &text)?;
        written.push(path);
    }
    let sidecar = Sidecar {
        command,
        config: cfg,
        results,
    };
    let path = dir.join(format!("{}_{stem}.json", cfg.output.prefix));
    write_atomic(&path, &to_sidecar_json(&sidecar)?)?;
    written.push(path);
    for p in &written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;

    // Flag overrides.
    if let Some(v) = cli.v0 {
        cfg.beams.v0_over_er = v;
    }
    if let Some(s) = cli.s1 {
        cfg.beams.strengths[0] = s;
    }
    if let Some(s) = cli.s2 {
        cfg.beams.strengths[1] = s;
    }
    if let Some(s) = cli.s3 {
        cfg.beams.strengths[2] = s;
    }
    if let Some(t) = cli.theta2 {
        cfg.beams.theta2 = t;
    }
    if let Some(t) = cli.theta3 {
        cfg.beams.theta3 = t;
    }
    if let Some(p) = cli.phi {
        cfg.beams.phi = p;
    }
    if let Some(d) = cli.detuning {
        cfg.beams.detuning = d;
    }
    if let Some(d) = cli.out_dir {
        cfg.output.dir = d;
    }
    if let Some(p) = cli.prefix {
        cfg.output.prefix = p;
    }

    // Everything except the pure geometry requires the blue-detuned
    // honeycomb regime; the red-detuned triangular lattice is out of scope.
    if cfg.beams.is_red() && !matches!(cli.command, Command::Geom(_)) {
        bail!(CoreError::InvalidInput(
            "red detuning gives a triangular lattice, outside the band analysis scope".into()
        ));
    }

    match cli.command {
        Command::Geom(args) => cmd_geom(&cfg, &args),
        Command::Pot(args) => cmd_pot(&mut cfg, &args),
        Command::Minima => cmd_minima(&cfg),
        Command::Bands(args) => cmd_bands(&mut cfg, &args),
        Command::TbBands(args) => cmd_tb_bands(&mut cfg, &args),
        Command::Dirac(args) => cmd_dirac(&mut cfg, &args),
        Command::Dos(args) => cmd_dos(&mut cfg, &args),
        Command::T0(args) => cmd_t0(&mut cfg, &args, cli.v0),
        Command::SweepEta(args) => cmd_sweep(&mut cfg, &args, DistortionFamily::StrengthEta),
        Command::SweepTheta(args) => cmd_sweep(&mut cfg, &args, DistortionFamily::AngleTheta),
        Command::PhaseScan(args) => cmd_phase_scan(&mut cfg, &args),
    }
}

fn beams(cfg: &RunConfig) -> anyhow::Result<BeamConfig64> {
    cfg.beams.to_core()
}

fn parse_path(name: &str) -> anyhow::Result<KPathPreset> {
    KPathPreset::parse(name).ok_or_else(|| {
        anyhow!(CoreError::InvalidInput(format!(
            "unknown k-path preset '{name}' (expected K2-Kp3 or G-K-M-G)"
        )))
    })
}

#[derive(Serialize)]
struct VecOut {
    x: f64,
    y: f64,
}

impl From<Vec2f> for VecOut {
    fn from(v: Vec2f) -> Self {
        Self { x: v.x, y: v.y }
    }
}

fn cmd_geom(cfg: &RunConfig, args: &GeomArgs) -> anyhow::Result<()> {
    let core = beams(cfg)?;
    let g = build_geometry(&core)?;

    #[derive(Serialize)]
    struct DepthOut {
        v0: f64,
        regime: String,
        note: &'static str,
    }
    let depth = match (args.linewidth, args.detuning_freq, args.intensity_ratio) {
        (Some(gamma), Some(delta), Some(ratio)) => {
            let d = dipole_depth(gamma, delta, ratio)?;
            Some(DepthOut {
                v0: d.v0,
                regime: format!("{:?}", d.regime).to_lowercase(),
                note: "in units of hbar times the linewidth unit; the red regime is a triangular lattice outside the band analysis",
            })
        }
        (None, None, None) => None,
        _ => bail!(CoreError::InvalidInput(
            "depth conversion needs all of --linewidth, --detuning-freq, --intensity-ratio".into()
        )),
    };

    #[derive(Serialize)]
    struct GeomOut {
        beams: [VecOut; 3],
        b1: VecOut,
        b2: VecOut,
        a1: VecOut,
        a2: VecOut,
        c: [VecOut; 3],
        k_corner: VecOut,
        k_corner_prime: VecOut,
        kappa: f64,
        lambda: f64,
        a: f64,
        hbar_e: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        dipole_depth: Option<DepthOut>,
    }
    let out = GeomOut {
        beams: [g.beams[0].into(), g.beams[1].into(), g.beams[2].into()],
        b1: g.b1.into(),
        b2: g.b2.into(),
        a1: g.a1.into(),
        a2: g.a2.into(),
        c: [g.c[0].into(), g.c[1].into(), g.c[2].into()],
        k_corner: g.k_corner.into(),
        k_corner_prime: g.k_corner_prime.into(),
        kappa: g.kappa,
        lambda: g.lambda,
        a: g.a,
        hbar_e: core.hbar_e(),
        dipole_depth: depth,
    };
    emit(cfg, "geom", "geom", None, out)
}

fn cmd_pot(cfg: &mut RunConfig, args: &PotArgs) -> anyhow::Result<()> {
    if let Some(v) = args.x_min {
        cfg.pot.x_min = v;
    }
    if let Some(v) = args.x_max {
        cfg.pot.x_max = v;
    }
    if let Some(v) = args.y_min {
        cfg.pot.y_min = v;
    }
    if let Some(v) = args.y_max {
        cfg.pot.y_max = v;
    }
    if let Some(v) = args.nx {
        cfg.pot.nx = v;
    }
    if let Some(v) = args.ny {
        cfg.pot.ny = v;
    }
    let p = cfg.pot.clone();
    if p.nx < 2 || p.ny < 2 || !(p.x_max > p.x_min) || !(p.y_max > p.y_min) {
        bail!(CoreError::InvalidInput(
            "potential grid must have nx, ny >= 2 and a proper rectangle".into()
        ));
    }

    let core = beams(cfg)?;
    let pot = Potential::new(&core)?;
    let mut csv = CsvWriter::new(&["x", "y", "v"]);
    for i in 0..p.nx {
        let x = p.x_min + (p.x_max - p.x_min) * i as f64 / (p.nx - 1) as f64;
        for j in 0..p.ny {
            let y = p.y_min + (p.y_max - p.y_min) * j as f64 / (p.ny - 1) as f64;
            let v = pot.value(Vec2f::new(x, y));
            csv.row(&[fmt_float(x), fmt_float(y), fmt_float(v)]);
        }
    }

    #[derive(Serialize)]
    struct PotOut {
        rows: usize,
    }
    emit(cfg, "pot", "pot", Some(csv.finish()), PotOut { rows: p.nx * p.ny })
}

fn kind_name(kind: CriticalKind) -> &'static str {
    match kind {
        CriticalKind::Minimum => "minimum",
        CriticalKind::Maximum => "maximum",
        CriticalKind::Saddle => "saddle",
        CriticalKind::CubicSaddle => "cubic-saddle",
    }
}

fn cmd_minima(cfg: &RunConfig) -> anyhow::Result<()> {
    let core = beams(cfg)?;
    let (a, b) = locate_minima(&core)?;
    let saddles = locate_saddles(&core)?;

    let mut csv = CsvWriter::new(&["label", "x", "y", "v", "kind", "grad_norm", "barrier"]);
    for (label, p) in [("A", &a), ("B", &b)] {
        csv.row(&[
            label.into(),
            fmt_float(p.position.x),
            fmt_float(p.position.y),
            fmt_float(p.value),
            kind_name(p.kind).into(),
            fmt_float(p.grad_norm),
            String::new(),
        ]);
    }
    for (i, s) in saddles.iter().enumerate() {
        csv.row(&[
            format!("S{}", i + 1),
            fmt_float(s.point.position.x),
            fmt_float(s.point.position.y),
            fmt_float(s.point.value),
            kind_name(s.point.kind).into(),
            fmt_float(s.point.grad_norm),
            fmt_float(s.barrier),
        ]);
    }

    #[derive(Serialize)]
    struct MinimaOut {
        depth_a_v0: f64,
        depth_b_v0: f64,
        saddle_count: usize,
        merged_cubic: bool,
    }
    let out = MinimaOut {
        depth_a_v0: a.value,
        depth_b_v0: b.value,
        saddle_count: saddles.len(),
        merged_cubic: saddles
            .iter()
            .any(|s| s.point.kind == CriticalKind::CubicSaddle),
    };
    emit(cfg, "minima", "minima", Some(csv.finish()), out)
}

fn cmd_bands(cfg: &mut RunConfig, args: &BandsArgs) -> anyhow::Result<()> {
    if let Some(p) = &args.path {
        cfg.bands.path = p.clone();
    }
    if let Some(s) = args.samples {
        cfg.bands.samples_per_segment = s;
    }
    if let Some(n) = args.n {
        cfg.bands.n_bands = n;
    }
    if let Some(c) = args.cutoff {
        cfg.bands.cutoff = Some(c);
    }

    let core = beams(cfg)?;
    let geom = build_geometry(&core)?;
    let preset = parse_path(&cfg.bands.path)?;
    let samples = k_path(&geom, preset, cfg.bands.samples_per_segment);
    let grid = solve_bands(&core, &samples, cfg.bands.n_bands, cfg.bands.cutoff)?;

    let mut header: Vec<String> = vec!["path_s".into(), "k_x".into(), "k_y".into()];
    for b in 1..=cfg.bands.n_bands {
        header.push(format!("e{b}"));
    }
    header.push("residual".into());
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut csv = CsvWriter::new(&header_refs);
    for (s, e) in grid.samples.iter().zip(grid.energies.iter()) {
        let mut row = vec![fmt_float(s.s), fmt_float(s.k.x), fmt_float(s.k.y)];
        row.extend(e.iter().map(|x| fmt_float(*x)));
        row.push(fmt_float(grid.residual));
        csv.row(&row);
    }

    #[derive(Serialize)]
    struct BandsOut {
        path: &'static str,
        cutoff: usize,
        residual_er: f64,
        samples: usize,
    }
    let out = BandsOut {
        path: preset.name(),
        cutoff: grid.cutoff,
        residual_er: grid.residual,
        samples: grid.samples.len(),
    };
    emit(cfg, "bands", "bands", Some(csv.finish()), out)
}

fn cmd_tb_bands(cfg: &mut RunConfig, args: &TbBandsArgs) -> anyhow::Result<()> {
    if let Some(p) = &args.path {
        cfg.bands.path = p.clone();
    }
    if let Some(s) = args.samples {
        cfg.bands.samples_per_segment = s;
    }
    let gamma = args.gamma.unwrap_or(cfg.dos.gamma);
    let epsilon = args.epsilon.unwrap_or(cfg.dos.epsilon);

    let core = beams(cfg)?;
    let geom = build_geometry(&core)?;
    let mut h = HoppingSet::gamma_family(gamma, 1.0);
    h.epsilon = epsilon;
    h.validate()?;
    let preset = parse_path(&cfg.bands.path)?;
    let samples = k_path(&geom, preset, cfg.bands.samples_per_segment);

    let mut csv = CsvWriter::new(&["k_x", "k_y", "e_minus", "e_plus"]);
    for s in &samples {
        let (em, ep) = tb_bands(s.k, &h, &geom.c);
        csv.row(&[
            fmt_float(s.k.x),
            fmt_float(s.k.y),
            fmt_float(em),
            fmt_float(ep),
        ]);
    }

    #[derive(Serialize)]
    struct TbOut {
        gamma: f64,
        epsilon: f64,
        path: &'static str,
    }
    emit(
        cfg,
        "tb-bands",
        "tb_bands",
        Some(csv.finish()),
        TbOut {
            gamma,
            epsilon,
            path: preset.name(),
        },
    )
}

fn cmd_dirac(cfg: &mut RunConfig, args: &DiracArgs) -> anyhow::Result<()> {
    if let Some(g) = args.gamma {
        cfg.dirac.gammas = vec![g];
    }
    let core = beams(cfg)?;
    let geom = build_geometry(&core)?;

    let mut csv = CsvWriter::new(&["gamma", "k_Dx", "k_Dy", "exists", "merged"]);
    #[derive(Serialize)]
    struct DiracRow {
        gamma: f64,
        exists: bool,
        merged: bool,
    }
    let mut rows = Vec::new();
    for &gamma in &cfg.dirac.gammas {
        let h = HoppingSet::gamma_family(gamma, 1.0);
        match tb_dirac_points(&h, &geom)? {
            None => {
                println!("gamma = {gamma}: no Dirac points (norm inequalities violated)");
                csv.row(&[
                    fmt_float(gamma),
                    "nan".into(),
                    "nan".into(),
                    "0".into(),
                    "0".into(),
                ]);
                rows.push(DiracRow {
                    gamma,
                    exists: false,
                    merged: false,
                });
            }
            Some(pair) => {
                println!(
                    "gamma = {gamma}: k_D = ({:.6}, {:.6}){}",
                    pair.k_d.x,
                    pair.k_d.y,
                    if pair.merged { " [merged]" } else { "" }
                );
                csv.row(&[
                    fmt_float(gamma),
                    fmt_float(pair.k_d.x),
                    fmt_float(pair.k_d.y),
                    "1".into(),
                    if pair.merged { "1" } else { "0" }.into(),
                ]);
                rows.push(DiracRow {
                    gamma,
                    exists: true,
                    merged: pair.merged,
                });
            }
        }
    }
    emit(cfg, "dirac", "dirac", Some(csv.finish()), rows)
}

fn cmd_dos(cfg: &mut RunConfig, args: &DosArgs) -> anyhow::Result<()> {
    if let Some(g) = args.grid {
        cfg.dos.grid = g;
    }
    if let Some(b) = args.bins {
        cfg.dos.bins = b;
    }
    if let Some(g) = args.gamma {
        cfg.dos.gamma = g;
    }
    if let Some(e) = args.epsilon {
        cfg.dos.epsilon = e;
    }
    let core = beams(cfg)?;
    let geom = build_geometry(&core)?;
    let mut h = HoppingSet::gamma_family(cfg.dos.gamma, 1.0);
    h.epsilon = cfg.dos.epsilon;
    let dos = tb_dos(&h, &geom, cfg.dos.grid, cfg.dos.bins)?;

    let mut csv = CsvWriter::new(&["E", "rho"]);
    for (c, r) in dos.centers.iter().zip(dos.rho.iter()) {
        csv.row(&[fmt_float(*c), fmt_float(*r)]);
    }

    #[derive(Serialize)]
    struct DosOut {
        band_norm_minus: f64,
        band_norm_plus: f64,
        bin_width: f64,
        van_hove_center: f64,
        low_energy_slope: f64,
    }
    let out = DosOut {
        band_norm_minus: dos.band_norms.0,
        band_norm_plus: dos.band_norms.1,
        bin_width: dos.bin_width,
        van_hove_center: dos.peak_center(),
        low_energy_slope: dos.low_energy_slope(0.2),
    };
    emit(cfg, "dos", "dos", Some(csv.finish()), out)
}

fn cmd_t0(cfg: &mut RunConfig, args: &T0Args, global_v0: Option<f64>) -> anyhow::Result<()> {
    if let Some(list) = &args.v0_list {
        cfg.t0.v0_list = list.clone();
    } else if let Some(v0) = global_v0 {
        cfg.t0.v0_list = vec![v0];
    }
    let inst = InstantonResult::<f64>::compute().context("instanton prefactor")?;

    #[derive(Serialize, Clone)]
    struct T0Row {
        v0_over_er: f64,
        exact_gamma_gap: f64,
        exact_cone_slope: f64,
        semiclassical: f64,
        harmonic: f64,
        cutoff: usize,
        residual_er: f64,
        regime_warning: bool,
    }
    let rows: anyhow::Result<Vec<T0Row>> = cfg
        .t0
        .v0_list
        .iter()
        .map(|&v0| {
            let mut beams = cfg.beams.clone();
            beams.strengths = [1.0, 1.0, 1.0];
            beams.theta2 = 0.0;
            beams.theta3 = 0.0;
            beams.phi = 0.0;
            beams.v0_over_er = v0;
            let core = beams.to_core()?;
            let exact = extract_t0_numeric(&core)?;
            let semi = t0_semiclassical(v0, &inst)?;
            let harm = t0_harmonic(v0)?;
            Ok(T0Row {
                v0_over_er: v0,
                exact_gamma_gap: exact.from_gamma_gap,
                exact_cone_slope: exact.from_cone_slope,
                semiclassical: semi.t0_over_er,
                harmonic: harm.t0_over_er.abs(),
                cutoff: exact.cutoff,
                residual_er: exact.residual,
                regime_warning: semi.regime_warning,
            })
        })
        .collect();
    let rows = rows?;

    let mut csv = CsvWriter::new(&["v0_over_er", "method", "t0_over_er", "ratio_to_exact"]);
    for r in &rows {
        println!("V0/E_R = {}", r.v0_over_er);
        println!("  {:<16} {:<24} {}", "method", "|t0|/E_R", "ratio-to-exact");
        for (name, value) in [
            ("exact-gamma-gap", r.exact_gamma_gap),
            ("exact-cone", r.exact_cone_slope),
            ("semiclassical", r.semiclassical),
            ("harmonic", r.harmonic),
        ] {
            let ratio = value / r.exact_gamma_gap;
            println!("  {name:<16} {value:<24.6e} {ratio:.4}");
            csv.row(&[
                fmt_float(r.v0_over_er),
                name.into(),
                fmt_float(value),
                fmt_float(ratio),
            ]);
        }
        if r.regime_warning {
            println!("  (V0 < 10 E_R: tight-binding identification is marginal)");
        }
    }

    #[derive(Serialize)]
    struct InstOut {
        s0: f64,
        alpha1: f64,
        alpha2: f64,
        alpha: f64,
    }
    #[derive(Serialize)]
    struct T0Out {
        instanton: InstOut,
        rows: Vec<T0Row>,
    }
    let out = T0Out {
        instanton: InstOut {
            s0: inst.s0,
            alpha1: inst.alpha1,
            alpha2: inst.alpha2,
            alpha: inst.alpha,
        },
        rows,
    };
    emit(cfg, "t0", "t0", Some(csv.finish()), out)
}

fn cmd_sweep(cfg: &mut RunConfig, args: &SweepArgs, family: DistortionFamily) -> anyhow::Result<()> {
    if let Some(h) = &args.hbar_e {
        cfg.sweep.hbar_e = h.clone();
    }
    if let Some(r) = args.rel_tol {
        cfg.sweep.rel_tol = r;
    }
    if let Some(b) = args.bracket_hi {
        cfg.sweep.bracket_hi = Some(b);
    }
    if let Some(l) = args.line_samples {
        cfg.sweep.line_samples = l;
    }
    if let Some(c) = args.cutoff {
        cfg.sweep.cutoff = Some(c);
    }
    if cfg.sweep.hbar_e.len() < 4 {
        bail!(CoreError::InvalidInput(format!(
            "sweep needs >= 4 hbar_e values, got {}",
            cfg.sweep.hbar_e.len()
        )));
    }

    let mut hbar_list = cfg.sweep.hbar_e.clone();
    hbar_list.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let opts = SweepOptions {
        bracket_hi: cfg.sweep.bracket_hi,
        rel_tol: cfg.sweep.rel_tol,
        line_samples: cfg.sweep.line_samples,
        cutoff: cfg.sweep.cutoff,
    };

    #[derive(Serialize)]
    struct SweepRow {
        hbar_e: f64,
        critical_value: Option<f64>,
        status: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        threshold_er: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        cutoff: Option<usize>,
    }

    // Rows are independent; computed in parallel, emitted in hbar_e order.
    let beams_template = cfg.beams.clone();
    let rows: Vec<SweepRow> = hbar_list
        .par_iter()
        .map(|&hbar_e| {
            let mut beams = beams_template.clone();
            beams.strengths = [1.0, 1.0, 1.0];
            beams.theta2 = 0.0;
            beams.theta3 = 0.0;
            beams.phi = 0.0;
            beams.v0_over_er = 2.0 / (hbar_e * hbar_e);
            let core = match beams.to_core() {
                Ok(c) => c,
                Err(e) => {
                    return SweepRow {
                        hbar_e,
                        critical_value: None,
                        status: format!("error: {e:#}"),
                        threshold_er: None,
                        cutoff: None,
                    }
                }
            };
            match critical_parameter(&core, family, &opts) {
                Ok(res) => SweepRow {
                    hbar_e,
                    critical_value: Some(res.value),
                    status: "ok".into(),
                    threshold_er: Some(res.threshold_er),
                    cutoff: Some(res.cutoff),
                },
                Err(e) => SweepRow {
                    hbar_e,
                    critical_value: None,
                    status: format!("error: {e}"),
                    threshold_er: None,
                    cutoff: None,
                },
            }
        })
        .collect();

    let mut csv = CsvWriter::new(&["hbar_e", "critical_value", "status"]);
    for r in &rows {
        csv.row(&[
            fmt_float(r.hbar_e),
            r.critical_value.map(fmt_float).unwrap_or_else(|| "nan".into()),
            r.status.clone(),
        ]);
    }

    let good: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.critical_value.map(|v| (r.hbar_e, v)))
        .collect();

    #[derive(Serialize)]
    struct FitOut {
        alpha: f64,
        beta: f64,
        residual_norm: f64,
    }
    #[derive(Serialize)]
    struct SweepOut {
        family: &'static str,
        rows: Vec<SweepRow>,
        fit: Option<FitOut>,
    }

    let fit = if good.len() >= 4 {
        let f = fit_critical_scaling(&good)?;
        Some(FitOut {
            alpha: f.alpha,
            beta: f.beta,
            residual_norm: f.residual_norm,
        })
    } else {
        None
    };
    let fit_missing = fit.is_none();
    let (name, stem) = match family {
        DistortionFamily::StrengthEta => ("strength-eta", "sweep_eta"),
        DistortionFamily::AngleTheta => ("angle-theta", "sweep_theta"),
    };
    if let Some(f) = &fit {
        println!("{name}: fitted alpha = {:.5}, beta = {:.5}", f.alpha, f.beta);
    }
    let out = SweepOut {
        family: name,
        rows,
        fit,
    };
    emit(cfg, "sweep", stem, Some(csv.finish()), out)?;
    if fit_missing {
        bail!(CoreError::NonConvergence {
            what: format!("{name} sweep: fewer than 4 successful rows, no scaling fit"),
            drift: f64::NAN,
        });
    }
    Ok(())
}

fn cmd_phase_scan(cfg: &mut RunConfig, args: &PhaseArgs) -> anyhow::Result<()> {
    if let Some(p) = args.phi_max {
        cfg.phase.phi_max = p;
    }
    if let Some(s) = args.steps {
        cfg.phase.steps = s;
    }
    if let Some(c) = args.cutoff {
        cfg.phase.cutoff = Some(c);
    }
    if cfg.phase.steps < 3 {
        bail!(CoreError::InvalidInput("phase scan needs >= 3 steps".into()));
    }

    let phis: Vec<f64> = (0..cfg.phase.steps)
        .map(|i| cfg.phase.phi_max * i as f64 / (cfg.phase.steps - 1) as f64)
        .collect();

    #[derive(Serialize, Clone)]
    struct PhaseRow {
        phi: f64,
        gap_er: f64,
        k_x: f64,
        k_y: f64,
    }
    let rows: anyhow::Result<Vec<PhaseRow>> = phis
        .iter()
        .map(|&phi| {
            let mut beams = cfg.beams.clone();
            beams.phi = phi;
            let core = beams.to_core()?;
            let mg = min_gap(&core, &GapSearch::default(), cfg.phase.cutoff)?;
            Ok(PhaseRow {
                phi,
                gap_er: mg.gap_er,
                k_x: mg.k_star.x,
                k_y: mg.k_star.y,
            })
        })
        .collect();
    let rows = rows?;

    let mut csv = CsvWriter::new(&["phi", "gap_er", "k_x", "k_y"]);
    for r in &rows {
        csv.row(&[
            fmt_float(r.phi),
            fmt_float(r.gap_er),
            fmt_float(r.k_x),
            fmt_float(r.k_y),
        ]);
    }

    // Linear fit gap = slope * phi + intercept, with R^2.
    let n = rows.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for r in &rows {
        sx += r.phi;
        sy += r.gap_er;
        sxx += r.phi * r.phi;
        sxy += r.phi * r.gap_er;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let mean = sy / n;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for r in &rows {
        ss_res += (r.gap_er - slope * r.phi - intercept).powi(2);
        ss_tot += (r.gap_er - mean).powi(2);
    }
    let r_squared = 1.0 - ss_res / ss_tot;

    let v0 = cfg.beams.v0_over_er;
    let slope_over_v0 = slope / v0;
    let six_sqrt3 = 6.0 * 3f64.sqrt();
    let eight_over_sqrt3 = 8.0 / 3f64.sqrt();
    let closest = if (slope_over_v0 - six_sqrt3).abs() < (slope_over_v0 - eight_over_sqrt3).abs() {
        "six_sqrt3"
    } else {
        "eight_over_sqrt3"
    };

    #[derive(Serialize)]
    struct PhaseOut {
        rows: Vec<PhaseRow>,
        slope_er_per_rad: f64,
        intercept_er: f64,
        r_squared: f64,
        slope_over_v0: f64,
        coefficient_six_sqrt3: f64,
        coefficient_eight_over_sqrt3: f64,
        closest_form: &'static str,
        zeta_note: &'static str,
    }
    let out = PhaseOut {
        rows,
        slope_er_per_rad: slope,
        intercept_er: intercept,
        r_squared,
        slope_over_v0,
        coefficient_six_sqrt3: six_sqrt3,
        coefficient_eight_over_sqrt3: eight_over_sqrt3,
        closest_form: closest,
        zeta_note: ZETA_DIMENSION_NOTE,
    };
    println!(
        "phase scan: slope = {slope:.6e} E_R/rad ({slope_over_v0:.4} V0/rad), R^2 = {r_squared:.6}, closest coefficient form: {closest}"
    );
    emit(cfg, "phase-scan", "phase_scan", Some(csv.finish()), out)
}
