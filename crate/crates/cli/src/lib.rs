//! Command-line front end for `areamap`.
//!
//! Every command writes CSV or JSON to `--out` (or stdout) so that plots can
//! be produced by external tools. Exit codes: 0 on success, 1 on invalid
//! input or usage, 2 when a numeric procedure fails (no closed orbit, vertex
//! singularity, failed verification).

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use areamap::analysis::{fake_orbit, sigma, verify, VerifyOptions};
use areamap::billiard::{envelope_midpoint, orbit, MapConfig};
use areamap::geometry::Polygon;
use areamap::moebius::config_by_name;
use areamap::rotation::{plateau_bounds, rotation_number, staircase_sweep, RotationKind, RotationOptions, SweepOptions};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Default seed for randomized checks.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Parser)]
#[command(name = "areamap", version, about = "Constant-area chord maps on convex polygons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rotation number over a uniform grid of areas (CSV).
    Staircase(StaircaseArgs),
    /// Orbit dump (CSV).
    Orbit(OrbitArgs),
    /// Rotation number at one area.
    Rotnum(RotnumArgs),
    /// Edges of the plateau where the rotation number is p/q (JSON).
    Plateau(PlateauArgs),
    /// Chord-structure checks on an orbit segment (JSON report).
    Verify(VerifyArgs),
    /// Identity compositions of line-to-line area maps.
    Counterexample(CounterexampleArgs),
    /// Envelope points of the chord family (CSV).
    Table(TableArgs),
    /// Closed chain cutting a prescribed sequence of areas (JSON).
    FakeOrbit(FakeOrbitArgs),
}

#[derive(Debug, Args)]
struct PolygonArg {
    /// JSON array of [x, y] vertex pairs.
    #[arg(long)]
    polygon: PathBuf,
}

/// Cut area, given as A or as a = 2A.
#[derive(Debug, Args)]
struct AreaArg {
    /// Cut area A.
    #[arg(long, conflicts_with = "a", required_unless_present = "a")]
    area: Option<f64>,
    /// Doubled cut area a = 2A.
    #[arg(long)]
    a: Option<f64>,
    /// Read the area as a fraction of the polygon area.
    #[arg(long)]
    normalized: bool,
}

impl AreaArg {
    fn resolve(&self, poly: &Polygon) -> f64 {
        let raw = self.area.unwrap_or_else(|| self.a.unwrap_or(f64::NAN) / 2.0);
        scale_area(raw, self.normalized, false, poly)
    }
}

fn scale_area(raw: f64, normalized: bool, doubled: bool, poly: &Polygon) -> f64 {
    let a = if doubled { raw / 2.0 } else { raw };
    if normalized {
        a * poly.area()
    } else {
        a
    }
}

#[derive(Debug, Args)]
struct RotationArgs {
    /// Long-run iterations.
    #[arg(long, default_value_t = 200_000)]
    iters: u64,
    /// Largest denominator searched for exact rotation numbers.
    #[arg(long, default_value_t = 200)]
    qmax: u64,
    /// Displacement samples per polygon side.
    #[arg(long, default_value_t = 64)]
    grid: usize,
}

impl RotationArgs {
    fn options(&self) -> Result<RotationOptions, CliError> {
        positive("--iters", self.iters as f64)?;
        positive("--qmax", self.qmax as f64)?;
        if self.grid < 8 {
            return Err(CliError::Usage("--grid must be at least 8".into()));
        }
        Ok(RotationOptions {
            iterations: self.iters,
            q_max: self.qmax,
            grid: self.grid,
            ..RotationOptions::default()
        })
    }
}

#[derive(Debug, Args)]
struct OutArg {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StaircaseArgs {
    #[command(flatten)]
    polygon: PolygonArg,
    /// Lower end of the area range.
    #[arg(long = "a-lo", allow_negative_numbers = true)]
    a_lo: f64,
    /// Upper end of the area range.
    #[arg(long = "a-hi", allow_negative_numbers = true)]
    a_hi: f64,
    /// Read the range as fractions of the polygon area.
    #[arg(long)]
    normalized: bool,
    /// Read the range as doubled areas a = 2A.
    #[arg(long)]
    doubled: bool,
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[command(flatten)]
    rotation: RotationArgs,
    /// Insert midpoints where neighbouring rotation numbers differ by more.
    #[arg(long)]
    refine: Option<f64>,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct OrbitArgs {
    #[command(flatten)]
    polygon: PolygonArg,
    #[command(flatten)]
    area: AreaArg,
    /// Start point as a fraction of the perimeter from vertex 0.
    #[arg(long, default_value_t = 0.0)]
    start: f64,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct RotnumArgs {
    #[command(flatten)]
    polygon: PolygonArg,
    #[command(flatten)]
    area: AreaArg,
    #[command(flatten)]
    rotation: RotationArgs,
    /// Start of the long-run orbit.
    #[arg(long, default_value_t = 0.0)]
    start: f64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct PlateauArgs {
    #[command(flatten)]
    polygon: PolygonArg,
    #[arg(long)]
    p: u64,
    #[arg(long)]
    q: u64,
    /// Bracket start; the rotation number there must not exceed p/q.
    #[arg(long)]
    lo: f64,
    /// Bracket end; the rotation number there must not be below p/q.
    #[arg(long)]
    hi: f64,
    #[arg(long)]
    normalized: bool,
    #[arg(long)]
    doubled: bool,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 64)]
    grid: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    polygon: PolygonArg,
    #[command(flatten)]
    area: AreaArg,
    #[arg(long, default_value_t = 0.0)]
    start: f64,
    /// Finite-difference step as a fraction of the perimeter.
    #[arg(long, default_value_t = 1e-6)]
    h: f64,
    #[arg(long, default_value_t = 32)]
    steps: usize,
    #[arg(long, default_value_t = 50)]
    qmax: u64,
    /// Extra orbit segments from random starts.
    #[arg(long, default_value_t = 0)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct CounterexampleArgs {
    /// `triangle` or `parallelogram`.
    config: String,
    /// Slide one marked point along its line by this amount.
    #[arg(long, allow_negative_numbers = true)]
    perturb: Option<f64>,
    /// Marked point moved by --perturb.
    #[arg(long, default_value = "M2")]
    point: String,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[command(flatten)]
    polygon: PolygonArg,
    #[command(flatten)]
    area: AreaArg,
    #[arg(long, default_value_t = 400)]
    samples: usize,
    #[arg(long, default_value_t = 0.0)]
    start: f64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct FakeOrbitArgs {
    #[command(flatten)]
    polygon: PolygonArg,
    /// Comma-separated cut areas, one per step.
    #[arg(long, value_delimiter = ',', required = true)]
    areas: Vec<f64>,
    #[arg(long)]
    normalized: bool,
    /// Turns made by the closed chain.
    #[arg(long, default_value_t = 1)]
    p: u64,
    /// Start bracket `lo,hi`; searched over one turn when absent.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    bracket: Option<Vec<f64>>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
    Core(areamap::Error),
    Failed(String),
}

impl CliError {
    fn code(&self) -> i32 {
        use areamap::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Core(E::NoClosure | E::VertexNonSmooth | E::VertexAmbiguous | E::SingularMap) => 2,
            CliError::Core(_) => 1,
            CliError::Failed(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Failed(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<areamap::Error> for CliError {
    fn from(e: areamap::Error) -> Self {
        CliError::Core(e)
    }
}

fn io_err(e: impl fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

fn positive(flag: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{flag} must be positive, got {v}")))
    }
}

fn load_polygon(path: &Path) -> Result<Polygon, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(Polygon::from_json(&text)?)
}

fn emit(out: &OutArg, body: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &out.out {
        Some(path) => std::fs::write(path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => stdout.write_all(body.as_bytes()).map_err(io_err),
    }
}

fn csv_string<S: Serialize>(header: Option<&[&str]>, rows: impl IntoIterator<Item = S>) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(header.is_none())
        .from_writer(Vec::new());
    if let Some(h) = header {
        w.write_record(h).map_err(io_err)?;
    }
    for row in rows {
        w.serialize(row).map_err(io_err)?;
    }
    String::from_utf8(w.into_inner().map_err(io_err)?).map_err(io_err)
}

fn json_string<S: Serialize>(value: &S) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(io_err)?;
    s.push('\n');
    Ok(s)
}

/// Runs the command line `argv` (program name first), writing reports to
/// `stdout` and diagnostics to `stderr`. Returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.code()
        }
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Staircase(a) => staircase(a, stdout),
        Command::Orbit(a) => orbit_cmd(a, stdout),
        Command::Rotnum(a) => rotnum(a, stdout),
        Command::Plateau(a) => plateau(a, stdout),
        Command::Verify(a) => verify_cmd(a, stdout),
        Command::Counterexample(a) => counterexample(a, stdout),
        Command::Table(a) => table(a, stdout),
        Command::FakeOrbit(a) => fake_orbit_cmd(a, stdout),
    }
}

fn staircase(args: StaircaseArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let poly = load_polygon(&args.polygon.polygon)?;
    if args.samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    let opts = SweepOptions {
        rotation: args.rotation.options()?,
        refine_threshold: args.refine,
    };
    let lo = scale_area(args.a_lo, args.normalized, args.doubled, &poly);
    let hi = scale_area(args.a_hi, args.normalized, args.doubled, &poly);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = args.jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(io_err)?;
    let rows = pool.install(|| staircase_sweep(&poly, lo, hi, args.samples, &opts))?;
    emit(&args.out, &csv_string(None, &rows)?, stdout)
}

#[derive(Serialize)]
struct OrbitRow {
    step: usize,
    side: usize,
    t: f64,
    s_lift: f64,
    x: f64,
    y: f64,
    derivative: Option<f64>,
    sigma: Option<i8>,
}

fn orbit_cmd(args: OrbitArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let poly = load_polygon(&args.polygon.polygon)?;
    let cfg = MapConfig::new(&poly, args.area.resolve(&poly))?;
    let orb = orbit(&cfg, args.start, args.steps)?;
    let rows = orb.points.iter().enumerate().map(|(k, p)| {
        let next = orb.points.get(k + 1);
        OrbitRow {
            step: k,
            side: p.side,
            t: p.t,
            s_lift: orb.lift_values[k],
            x: p.xy.x,
            y: p.xy.y,
            derivative: next.map(|_| orb.step_derivatives[k]),
            sigma: next.and_then(|q| sigma(&poly, p, q).ok()).map(|s| s.value()),
        }
    });
    let header = ["step", "side", "t", "s_lift", "x", "y", "derivative", "sigma"];
    emit(&args.out, &csv_string(Some(&header), rows)?, stdout)
}

fn rotnum(args: RotnumArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let poly = load_polygon(&args.polygon.polygon)?;
    let cfg = MapConfig::new(&poly, args.area.resolve(&poly))?;
    let opts = RotationOptions {
        start: args.start,
        ..args.rotation.options()?
    };
    let est = rotation_number(&cfg, &opts);
    let text = match (est.kind, est.witness) {
        (RotationKind::Exact { p, q }, Some(w)) => format!(
            "exact {p}/{q}\nwitness s={} side={} t={} x={} y={}\n",
            est.witness_lift.unwrap_or(w.s),
            w.side,
            w.t,
            w.xy.x,
            w.xy.y
        ),
        (RotationKind::Exact { p, q }, None) => format!("exact {p}/{q}\n"),
        (RotationKind::LongRun, _) => format!(
            "longrun {} +/- {}\niterations {}\n",
            est.value, est.error_bound, est.iterations
        ),
    };
    emit(&args.out, &text, stdout)
}

#[derive(Serialize)]
struct PlateauReport {
    p: u64,
    q: u64,
    #[serde(rename = "A_lo")]
    a_lo: f64,
    #[serde(rename = "A_hi")]
    a_hi: f64,
    #[serde(rename = "A_lo_over_S")]
    a_lo_over_s: f64,
    #[serde(rename = "A_hi_over_S")]
    a_hi_over_s: f64,
}

fn plateau(args: PlateauArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let poly = load_polygon(&args.polygon.polygon)?;
    positive("--tol", args.tol)?;
    if args.q == 0 || args.p == 0 || args.p >= args.q {
        return Err(CliError::Usage("need 0 < p < q".into()));
    }
    let lo = scale_area(args.lo, args.normalized, args.doubled, &poly);
    let hi = scale_area(args.hi, args.normalized, args.doubled, &poly);
    let (a_lo, a_hi) = plateau_bounds(&poly, args.p, args.q, (lo, hi), args.tol, args.grid)?;
    let report = PlateauReport {
        p: args.p,
        q: args.q,
        a_lo,
        a_hi,
        a_lo_over_s: a_lo / poly.area(),
        a_hi_over_s: a_hi / poly.area(),
    };
    emit(&args.out, &json_string(&report)?, stdout)
}

#[derive(Serialize)]
struct TrialSummary {
    seed: u64,
    count: usize,
    passed: usize,
    /// Starts that failed a check.
    failed_starts: Vec<f64>,
    /// Starts skipped because the segment hit a vertex.
    skipped_starts: Vec<f64>,
}

#[derive(Serialize)]
struct VerifyOutput {
    report: areamap::VerificationReport,
    trials: TrialSummary,
    pass: bool,
}

fn verify_cmd(args: VerifyArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let poly = load_polygon(&args.polygon.polygon)?;
    positive("--h", args.h)?;
    if args.steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    let cfg = MapConfig::new(&poly, args.area.resolve(&poly))?;
    let opts = VerifyOptions {
        steps: args.steps,
        h: args.h,
        rotation: RotationOptions {
            q_max: args.qmax,
            ..VerifyOptions::default().rotation
        },
    };
    let report = verify(&cfg, args.start, &opts)?;

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let segment_opts = VerifyOptions {
        rotation: RotationOptions {
            q_max: 1,
            iterations: 1,
            ..opts.rotation
        },
        ..opts
    };
    let mut trials = TrialSummary {
        seed: args.seed,
        count: args.trials,
        passed: 0,
        failed_starts: Vec::new(),
        skipped_starts: Vec::new(),
    };
    for _ in 0..args.trials {
        let s: f64 = rng.gen_range(0.0..1.0);
        match verify(&cfg, s, &segment_opts) {
            Ok(r) if r.pass => trials.passed += 1,
            Ok(_) => trials.failed_starts.push(s),
            Err(_) => trials.skipped_starts.push(s),
        }
    }
    let pass = report.pass && trials.failed_starts.is_empty();
    let output = VerifyOutput { report, trials, pass };
    emit(&args.out, &json_string(&output)?, stdout)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Failed("verification failed; see report".into()))
    }
}

fn counterexample(args: CounterexampleArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = config_by_name(&args.config)?;
    if let Some(eps) = args.perturb {
        cfg = cfg.perturbed(&args.point, eps)?;
    }
    let m = cfg.composition()?;
    let mut text = format!("configuration {}\n", cfg.name);
    if let Some(eps) = args.perturb {
        text += &format!("perturbation {} by {eps}\n", args.point);
    }
    let [[a, b], [c, d]] = m.m;
    text += &format!("composition [[{a:.12}, {b:.12}], [{c:.12}, {d:.12}]]\n");
    text += &format!("identity distance {:.3e}\n", m.identity_distance());
    text += &format!("identity {}\n", if m.identity_distance() <= 1e-9 { "yes" } else { "no" });
    for chain in cfg.check_chains()? {
        let labels: Vec<String> = chain.labels.iter().map(|l| l.to_string()).collect();
        let fmt_vals = |v: &[areamap::ExtReal]| {
            v.iter()
                .map(|x| match x.finite() {
                    Some(u) => format!("{u:.12}"),
                    None => "inf".to_string(),
                })
                .collect::<Vec<_>>()
                .join(", ")
        };
        text += &format!("chain {}\n", labels.join(" -> "));
        text += &format!("  expected {}\n", fmt_vals(&chain.expected));
        text += &format!("  actual   {}\n", fmt_vals(&chain.actual));
        text += &format!("  max error {:.3e}\n", chain.max_error);
    }
    emit(&args.out, &text, stdout)
}

#[derive(Serialize)]
struct TableRow {
    s: f64,
    x: f64,
    y: f64,
}

fn table(args: TableArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let poly = load_polygon(&args.polygon.polygon)?;
    let cfg = MapConfig::new(&poly, args.area.resolve(&poly))?;
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let rows = (0..args.samples).map(|i| {
        let s = (args.start + i as f64 / args.samples as f64).rem_euclid(1.0);
        let m = envelope_midpoint(&cfg, &poly.point_at(s));
        TableRow { s, x: m.x, y: m.y }
    });
    emit(&args.out, &csv_string(None, rows)?, stdout)
}

#[derive(Serialize)]
struct FakeOrbitReport {
    areas: Vec<f64>,
    p: u64,
    start: f64,
    closure_error: f64,
    derivative_product: f64,
    finite_difference: bool,
    parabolic: bool,
    points: Vec<[f64; 2]>,
}

fn fake_orbit_cmd(args: FakeOrbitArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let poly = load_polygon(&args.polygon.polygon)?;
    let areas: Vec<f64> = args
        .areas
        .iter()
        .map(|&a| scale_area(a, args.normalized, false, &poly))
        .collect();
    let bracket = args.bracket.as_ref().map(|b| (b[0], b[1]));
    let fake = fake_orbit(&poly, &areas, args.p, bracket)?;
    let report = FakeOrbitReport {
        areas,
        p: args.p,
        start: fake.orbit.lift_values[0],
        closure_error: fake.derivative.closure_error,
        derivative_product: fake.derivative.product,
        finite_difference: fake.derivative.finite_difference,
        parabolic: fake.derivative.parabolic,
        points: fake.orbit.points.iter().map(|p| [p.xy.x, p.xy.y]).collect(),
    };
    emit(&args.out, &json_string(&report)?, stdout)
}
