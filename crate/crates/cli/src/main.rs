//! `qeilab`: scripted, seeded experiments over the qeilab library.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qeilab::fock::{self, FockModel, LanczosOptions, StateSample, VacuumEnergy};
use qeilab::qei_bounds::{self, BoundResult, QWeight, TwoPointKernel};
use qeilab::quantum_interest as qi;
use qeilab::sampling::{GridSpec, SamplerKind, SamplingFunction};
use qeilab::scaling::{self, FockAdapter, Homogeneous, ScalingModel, TestFunction};
use qeilab::weyl_wigner as ww;
use qeilab::{Complex64, VERSION};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
    fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Parser)]
#[command(name = "qeilab", version, about = "Quantum energy inequality laboratory")]
struct Cli {
    /// Directory for artifacts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Seed for random states.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Tolerance override NAME=VALUE (repeatable).
    #[arg(long = "tol", global = true, value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a closed-form, static or kernel QEI bound.
    Bounds(BoundsArgs),
    /// Verify a QEI state by state in a box Fock model.
    Verify(VerifyArgs),
    /// Quantum-interest constraints for delta pairs or profile files.
    Interest(InterestArgs),
    /// Weyl quantization, Wigner functions and Gårding constants.
    Wigner(WignerArgs),
    /// Scaling-limit fits and ζ/η trajectories.
    Scaling(ScalingArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum BoundKind {
    FordRoman,
    FewsterEveson,
    Flanagan,
    Fe2d,
    Static,
    Kernel,
}

#[derive(Debug, Args, Serialize)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    kind: BoundKind,
    /// Lorentzian width for ford-roman.
    #[arg(long)]
    tau: Option<f64>,
    /// Sampler: gaussian:τ | lorentzian:τ | bump:a,b | csv:PATH.
    #[arg(long)]
    g: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    mass: f64,
    /// Static weight: zero | fewster-eveson:m | lines:ω:μ,… | CSV path (u, Q).
    #[arg(long)]
    q: Option<String>,
    /// Kernel lines ω:μ,… for kind kernel.
    #[arg(long)]
    lines: Option<String>,
    /// Box model whose vacuum kernel is used for kind kernel.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Width grid for CSV output: geometric:start,stop,count.
    #[arg(long)]
    tau_grid: Option<String>,
}

#[derive(Debug, Args, Serialize)]
struct VerifyArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value = "gaussian:5")]
    g: String,
    /// random:N
    #[arg(long, default_value = "random:200")]
    states: String,
    #[arg(long, default_value_t = 0.0)]
    x0: f64,
    /// Number of ψ_α states to add.
    #[arg(long, default_value_t = 0)]
    egj_alphas: usize,
    /// Skip the lowest-eigenvector state.
    #[arg(long)]
    no_lowest: bool,
}

#[derive(Debug, Args, Serialize)]
struct InterestArgs {
    #[arg(long = "A")]
    a: Option<f64>,
    #[arg(long = "T")]
    t: Option<f64>,
    /// Repayment excess for an explicit admissibility check.
    #[arg(long)]
    eps: Option<f64>,
    /// Pulse width; default 1e-4/(6πA).
    #[arg(long)]
    sigma: Option<f64>,
    /// Also solve the Schrödinger problem numerically.
    #[arg(long)]
    numeric: bool,
    /// Profile JSON to test for admissibility.
    #[arg(long)]
    profile: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct WignerArgs {
    /// oscillator:n | random | csv:PATH (x, re, im).
    #[arg(long, default_value = "oscillator:1")]
    state: String,
    /// harmonic | diagonal-bump | csv:PATH (x, p, F on the symbol grid).
    #[arg(long, default_value = "harmonic")]
    symbol: String,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    #[arg(long, default_value_t = ww::DEFAULT_X)]
    x_max: f64,
    #[arg(long, default_value_t = ww::DEFAULT_N)]
    n: usize,
    /// ħ values for the Gårding scan of the diagonal bump.
    #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.25")]
    hbar_scan: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
struct ScalingArgs {
    /// homogeneous:h=2,C=1 | fock:PATH[,x0=0]
    #[arg(long)]
    model: String,
    /// geometric:start,stop,count
    #[arg(long = "lambda", default_value = "geometric:1,0.001,25")]
    lambda: String,
    /// One-dimensional test function (sampler descriptor).
    #[arg(long, default_value = "gaussian:1")]
    f: String,
}

enum CliError {
    Usage(String),
    Failure(String),
}

impl From<qeilab::Error> for CliError {
    fn from(e: qeilab::Error) -> Self {
        use qeilab::Error as E;
        match e {
            E::InvalidParameter(_)
            | E::InvalidWeight(_)
            | E::InvalidKernel(_)
            | E::GridTooCoarse { .. }
            | E::DimensionCap { .. }
            | E::DimensionMismatch { .. }
            | E::Precondition(_)
            | E::NotTimelike(_)
            | E::NotNull(_)
            | E::Io(_)
            | E::Csv(_)
            | E::Json(_) => CliError::Usage(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

type Res<T> = Result<T, CliError>;

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got {s}"))?;
    let v: f64 = v.parse().map_err(|e| format!("tolerance {k}: {e}"))?;
    if !(v >= 0.0 && v.is_finite()) {
        return Err(format!("tolerance {k} must be non-negative"));
    }
    Ok((k.to_string(), v))
}

/// Resolved tolerances: defaults, overridden by `--tol`; unknown names are rejected.
fn tolerances(cli: &Cli, defaults: &[(&str, f64)]) -> Res<BTreeMap<String, f64>> {
    let mut map: BTreeMap<String, f64> = defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for (k, v) in &cli.tol {
        match map.get_mut(k) {
            Some(slot) => *slot = *v,
            None => {
                let known: Vec<&str> = defaults.iter().map(|d| d.0).collect();
                return Err(usage(format!("unknown tolerance {k} (known: {})", known.join(", "))));
            }
        }
    }
    Ok(map)
}

fn num(s: &str, what: &str) -> Res<f64> {
    s.trim().parse().map_err(|_| usage(format!("{what}: cannot parse {s:?} as a number")))
}

fn parse_sampler(desc: &str) -> Res<SamplingFunction> {
    let (kind, rest) = desc.split_once(':').ok_or_else(|| usage(format!("sampler {desc:?} needs KIND:PARAMS")))?;
    Ok(match kind {
        "gaussian" => SamplingFunction::gaussian(num(rest, "gaussian width")?)?,
        "lorentzian" | "lorentzian-sqrt" => SamplingFunction::lorentzian_sqrt(num(rest, "lorentzian width")?)?,
        "bump" => {
            let (a, b) = rest.split_once(',').ok_or_else(|| usage("bump needs a,b"))?;
            SamplingFunction::bump(num(a, "bump a")?, num(b, "bump b")?)?
        }
        "csv" => SamplingFunction::read_csv(File::open(rest)?)?,
        _ => return Err(usage(format!("unknown sampler kind {kind:?}"))),
    })
}

/// Same sampler kind with width `tau`.
fn with_width(g: &SamplingFunction, tau: f64) -> Res<SamplingFunction> {
    let kind = match g.kind() {
        SamplerKind::Gaussian { .. } => SamplerKind::Gaussian { tau },
        SamplerKind::LorentzianSqrt { .. } => SamplerKind::LorentzianSqrt { tau },
        SamplerKind::Bump { .. } => SamplerKind::Bump { a: -0.5 * tau, b: 0.5 * tau },
        SamplerKind::Tabulated => return Err(usage("--tau-grid needs a closed-form sampler")),
    };
    Ok(SamplingFunction::new(kind, 0.0, GridSpec::Default)?)
}

fn parse_geometric(desc: &str) -> Res<Vec<f64>> {
    let rest = desc.strip_prefix("geometric:").ok_or_else(|| usage(format!("grid {desc:?} must be geometric:start,stop,count")))?;
    let parts: Vec<&str> = rest.split(',').collect();
    if parts.len() != 3 {
        return Err(usage("geometric grid needs start,stop,count"));
    }
    let (a, b) = (num(parts[0], "grid start")?, num(parts[1], "grid stop")?);
    let n: usize = parts[2].trim().parse().map_err(|_| usage("grid count must be an integer"))?;
    if !(a > 0.0 && b > 0.0) || n < 2 {
        return Err(usage("geometric grid needs positive endpoints and count >= 2"));
    }
    Ok((0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect())
}

fn parse_lines(desc: &str) -> Res<Vec<(f64, f64)>> {
    desc.split(',')
        .map(|item| {
            let (w, m) = item.split_once(':').ok_or_else(|| usage(format!("kernel line {item:?} must be ω:μ")))?;
            Ok((num(w, "line frequency")?, num(m, "line weight")?))
        })
        .collect()
}

fn parse_qweight(desc: &str) -> Res<QWeight> {
    if desc == "zero" {
        return Ok(QWeight::zero());
    }
    if let Some(m) = desc.strip_prefix("fewster-eveson:") {
        return Ok(QWeight::fewster_eveson(num(m, "mass")?)?);
    }
    if let Some(l) = desc.strip_prefix("lines:") {
        return Ok(QWeight::from_spectral_lines(&parse_lines(l)?)?);
    }
    Ok(QWeight::read_csv(File::open(desc)?)?)
}

fn load_model(path: &Path) -> Res<FockModel> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(FockModel::from_json(&text)?)
}

struct Artifacts<'a> {
    cli: &'a Cli,
    command: &'static str,
}

impl Artifacts<'_> {
    fn path(&self, suffix: &str) -> PathBuf {
        self.cli.out.join(format!("{}{suffix}", self.command))
    }

    fn write_json(&self, config: Value, tols: &BTreeMap<String, f64>, result: Value, pass: bool) -> Res<()> {
        let doc = json!({
            "tool": "qeilab",
            "version": VERSION,
            "command": self.command,
            "config": {
                "out": self.cli.out,
                "seed": self.cli.seed,
                "format": self.cli.format,
                "tolerances": tols,
                "arguments": config,
            },
            "pass": pass,
            "result": result,
        });
        if self.cli.format.json() {
            let f = BufWriter::new(File::create(self.path(".json"))?);
            serde_json::to_writer_pretty(f, &doc).map_err(|e| CliError::Failure(e.to_string()))?;
        }
        println!("{} pass={pass} ({})", self.command, self.cli.out.display());
        Ok(())
    }

    fn csv_file(&self, suffix: &str) -> Res<Option<BufWriter<File>>> {
        if !self.cli.format.csv() {
            return Ok(None);
        }
        Ok(Some(BufWriter::new(File::create(self.path(suffix))?)))
    }
}

fn write_rows(w: BufWriter<File>, header: &[&str], rows: &[Vec<f64>]) -> Res<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(header).map_err(|e| CliError::Failure(e.to_string()))?;
    for r in rows {
        csv.write_record(r.iter().map(|v| format!("{v:.17e}"))).map_err(|e| CliError::Failure(e.to_string()))?;
    }
    csv.flush()?;
    Ok(())
}

fn run_bounds(cli: &Cli, args: &BoundsArgs) -> Res<bool> {
    let tols = tolerances(cli, &[])?;
    let need_g = || -> Res<SamplingFunction> { parse_sampler(args.g.as_deref().ok_or_else(|| usage("--g is required for this kind"))?) };
    let kernel = || -> Res<TwoPointKernel> {
        match (&args.lines, &args.model) {
            (Some(l), None) => Ok(TwoPointKernel::new(parse_lines(l)?, None)?),
            (None, Some(m)) => Ok(load_model(m)?.basis()?.vacuum_kernel()),
            _ => Err(usage("kind kernel needs exactly one of --lines or --model")),
        }
    };
    let eval = |g: Option<&SamplingFunction>, tau: Option<f64>| -> Res<(BoundResult, Option<QWeight>)> {
        Ok(match args.kind {
            BoundKind::FordRoman => (qei_bounds::ford_roman_rhs(tau.ok_or_else(|| usage("--tau is required for ford-roman"))?)?, None),
            BoundKind::FewsterEveson => (qei_bounds::fewster_eveson_4d(g.unwrap(), args.mass)?, None),
            BoundKind::Flanagan => (qei_bounds::flanagan_2d(g.unwrap())?, None),
            BoundKind::Fe2d => (qei_bounds::fe_2d_massless(g.unwrap())?, None),
            BoundKind::Static => {
                let q = parse_qweight(args.q.as_deref().ok_or_else(|| usage("--q is required for static"))?)?;
                (qei_bounds::static_qei(g.unwrap(), &q)?, None)
            }
            BoundKind::Kernel => {
                let (b, q) = qei_bounds::worldline_bound_from_kernel(&kernel()?, g.unwrap())?;
                (b, Some(q))
            }
        })
    };
    let g = if args.kind == BoundKind::FordRoman { None } else { Some(need_g()?) };
    let (result, induced) = eval(g.as_ref(), args.tau)?;
    let art = Artifacts { cli, command: "bounds" };
    if let Some(w) = art.csv_file(".csv")? {
        let mut rows = Vec::new();
        if let Some(desc) = &args.tau_grid {
            for tau in parse_geometric(desc)? {
                let gt = g.as_ref().map(|g| with_width(g, tau)).transpose()?;
                rows.push(vec![tau, eval(gt.as_ref(), Some(tau))?.0.value]);
            }
        } else {
            let tau = args.tau.or(g.as_ref().map(|g| g.characteristic_width())).unwrap_or(f64::NAN);
            rows.push(vec![tau, result.value]);
        }
        write_rows(w, &["tau", "value"], &rows)?;
    }
    if let (Some(q), Some(w)) = (&induced, art.csv_file("_qweight.csv")?) {
        let top = q.domain_max().min(1e3).max(1.0);
        let grid: Vec<f64> = (0..=400).map(|i| top * i as f64 / 400.0).collect();
        q.write_csv(w, &grid)?;
    }
    let config = serde_json::to_value(args).map_err(|e| CliError::Failure(e.to_string()))?;
    let pass = result.value.is_finite() && result.value <= 0.0;
    art.write_json(config, &tols, result.to_json(), pass)?;
    Ok(pass)
}

fn run_verify(cli: &Cli, args: &VerifyArgs) -> Res<bool> {
    let tols = tolerances(cli, &[("qei", fock::QEI_REL_TOL), ("lanczos", LanczosOptions::default().rel_tol)])?;
    let model = load_model(&args.model)?;
    let random: usize = args
        .states
        .strip_prefix("random:")
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| usage(format!("--states {:?} must be random:N", args.states)))?;
    let g = parse_sampler(&args.g)?;
    let space = Arc::new(model.build(fock::DEFAULT_DIMENSION_CAP)?);
    let a = fock::smeared_energy(&space, &g, args.x0, VacuumEnergy::NormalOrdered)?;
    let (bound, _) = qei_bounds::worldline_bound_from_kernel(&space.basis().vacuum_kernel(), &g)?;
    let sample = StateSample {
        random,
        seed: cli.seed,
        include_vacuum: true,
        include_lowest: !args.no_lowest,
        egj_alphas: args.egj_alphas,
    };
    let lanczos = LanczosOptions { rel_tol: tols["lanczos"], ..LanczosOptions::default() };
    let rep = fock::verify_qei_with(&a, &bound, sample, tols["qei"], lanczos)?;
    let egj = fock::egj_parameters(&a)?;
    let art = Artifacts { cli, command: "verify" };
    if let Some(w) = art.csv_file(".csv")? {
        rep.write_csv(w)?;
    }
    let result = json!({
        "bound": rep.bound.to_json(),
        "tolerance": rep.tolerance,
        "dimension": rep.dimension,
        "min_expectation": rep.min_expectation,
        "max_expectation": rep.max_expectation,
        "lowest_eigenvalue": rep.lowest_eigenvalue,
        "lowest_residual": rep.lowest_residual,
        "violations": rep.violations,
        "states": rep.states.len(),
        "egj": {
            "zeta": egj.zeta,
            "eta": egj.eta,
            "bound": fock::egj_bound(egj.zeta, egj.eta)?,
        },
    });
    let config = serde_json::to_value(args).map_err(|e| CliError::Failure(e.to_string()))?;
    art.write_json(config, &tols, result, rep.pass)?;
    Ok(rep.pass)
}

fn run_interest(cli: &Cli, args: &InterestArgs) -> Res<bool> {
    let tols = tolerances(cli, &[("t_max", 0.02), ("eps", 0.03)])?;
    let mut result = serde_json::Map::new();
    let mut pass = true;
    let mut rows = Vec::new();
    if args.a.is_some() || args.t.is_some() {
        let a = args.a.ok_or_else(|| usage("--A is required with --T"))?;
        let t = args.t.ok_or_else(|| usage("--T is required with --A"))?;
        let c = qi::delta_pair_constraints(a, t)?;
        result.insert("T_max".into(), json!(c.t_max));
        result.insert("eps_min".into(), json!(c.eps_min));
        let sigma = args.sigma.unwrap_or(1e-4 / (6.0 * PI * a));
        if let Some(eps) = args.eps {
            let adm = qi::admissible(&qi::EnergyProfile::delta_pair(a, t, eps, sigma)?)?;
            result.insert("admissibility".into(), serde_json::to_value(adm).unwrap());
        }
        if args.numeric {
            let tb = qi::loan_term_boundary(a, sigma)?;
            let t_ok = (tb.value - c.t_max).abs() <= tols["t_max"] * c.t_max;
            let mut curve = Vec::new();
            let mut e_ok = true;
            for i in 1..=9 {
                let ti = 0.1 * i as f64 * c.t_max;
                let exact = qi::delta_pair_constraints(a, ti)?.eps_min.unwrap();
                let e = qi::eps_min_numeric(a, ti, sigma)?;
                e_ok &= (e.value - exact).abs() <= tols["eps"] * exact;
                curve.push(json!({"T": ti, "eps_exact": exact, "eps_numeric": e.value, "error_estimate": e.error_estimate}));
                rows.push(vec![ti, exact, e.value]);
            }
            result.insert("sigma".into(), json!(sigma));
            result.insert("loan_term_boundary".into(), serde_json::to_value(tb).unwrap());
            result.insert("eps_curve".into(), Value::Array(curve));
            result.insert("numeric_matches".into(), json!(t_ok && e_ok));
            pass &= t_ok && e_ok;
        }
    }
    if let Some(path) = &args.profile {
        let p = qi::EnergyProfile::load(path)?;
        let adm = qi::admissible(&p)?;
        let (lo, hi) = p.support().unwrap_or((0.0, 1.0));
        let span = (hi - lo).max(p.sigma());
        let fam = qi::TestFamily::gaussian_grid(lo - 0.2 * span, hi + 0.2 * span, 29, 0.02 * span, 20.0 * span, 25);
        let tf = qi::test_function_constraint(&p, &fam)?;
        let consistent = !(tf.certifies_inadmissible && adm.admissible);
        result.insert("profile".into(), json!({
            "admissibility": adm,
            "test_functions": tf,
            "consistent": consistent,
        }));
        pass &= consistent;
    }
    if result.is_empty() {
        return Err(usage("interest needs --A and --T, or --profile"));
    }
    let art = Artifacts { cli, command: "interest" };
    if let Some(w) = art.csv_file(".csv")? {
        write_rows(w, &["T", "eps_exact", "eps_numeric"], &rows)?;
    }
    let config = serde_json::to_value(args).map_err(|e| CliError::Failure(e.to_string()))?;
    art.write_json(config, &tols, Value::Object(result), pass)?;
    Ok(pass)
}

fn run_wigner(cli: &Cli, args: &WignerArgs) -> Res<bool> {
    let tols = tolerances(cli, &[("identity", 1e-8), ("normalization", 1e-8)])?;
    let grid = ww::PhaseGrid::new(args.x_max, args.n, args.hbar)?;
    let psi = match args.state.split_once(':') {
        Some(("oscillator", n)) => {
            let n: usize = n.parse().map_err(|_| usage("oscillator level must be an integer"))?;
            ww::WaveFunction::oscillator(grid, n)?
        }
        Some(("csv", path)) => ww::WaveFunction::read_csv(File::open(path)?, grid)?,
        None if args.state == "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let v = (0..grid.n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            ww::WaveFunction::normalized(grid, v)?
        }
        _ => return Err(usage(format!("unknown state {:?}", args.state))),
    };
    let symbol = match args.symbol.split_once(':') {
        None if args.symbol == "harmonic" => ww::PhaseSpaceSymbol::harmonic(grid)?,
        None if args.symbol == "diagonal-bump" => ww::PhaseSpaceSymbol::from_fn(grid, ww::PSupport::Compact, ww::diagonal_bump)?,
        Some(("csv", path)) => ww::PhaseSpaceSymbol::read_csv(File::open(path)?, grid, ww::PSupport::Compact)?,
        _ => return Err(usage(format!("unknown symbol {:?}", args.symbol))),
    };
    let w = ww::wigner(&psi)?;
    let a = ww::weyl_quantize(&symbol)?;
    let via_operator = psi.expectation(&a).re;
    let via_wigner = ww::expectation_via_wigner(&symbol, &psi)?;
    let identity_err = (via_operator - via_wigner).abs() / via_operator.abs().max(via_wigner.abs()).max(f64::MIN_POSITIVE);
    let norm_err = (w.normalization() - 1.0).abs();
    let marg_err = w
        .position_marginal()
        .iter()
        .zip(psi.values())
        .map(|(m, z)| (m - z.norm_sqr()).abs())
        .fold(0.0, f64::max);
    let scan = ww::garding_scan(grid, ww::PSupport::Compact, &args.hbar_scan, ww::diagonal_bump)?;
    let lowest = ww::eigenvalues(&a)[0];
    let pass = identity_err <= tols["identity"] && norm_err <= tols["normalization"] && marg_err <= tols["normalization"];
    let art = Artifacts { cli, command: "wigner" };
    if let Some(f) = art.csv_file(".csv")? {
        w.write_csv(f)?;
    }
    if let Some(f) = art.csv_file("_garding.csv")? {
        let rows: Vec<Vec<f64>> = scan.iter().map(|p| vec![p.hbar, p.constant]).collect();
        write_rows(f, &["hbar", "C"], &rows)?;
    }
    let (j0, k0) = (grid.n / 2, grid.n / 2);
    let result = json!({
        "W_origin": w.value(j0, k0),
        "W_min": w.min_value(),
        "normalization": w.normalization(),
        "position_marginal_error": marg_err,
        "imaginary_defect": w.imaginary_defect,
        "truncation_warning": w.truncation_warning(),
        "expectation_operator": via_operator,
        "expectation_wigner": via_wigner,
        "identity_relative_error": identity_err,
        "symbol_lowest_eigenvalue": lowest,
        "garding": scan,
    });
    let config = serde_json::to_value(args).map_err(|e| CliError::Failure(e.to_string()))?;
    art.write_json(config, &tols, result, pass)?;
    Ok(pass)
}

fn parse_kv(desc: &str) -> Res<BTreeMap<String, String>> {
    desc.split(',')
        .filter(|s| !s.is_empty())
        .map(|kv| {
            kv.split_once('=').map(|(k, v)| (k.trim().to_string(), v.trim().to_string())).ok_or_else(|| usage(format!("expected key=value, got {kv:?}")))
        })
        .collect()
}

fn run_scaling(cli: &Cli, args: &ScalingArgs) -> Res<bool> {
    let tols = tolerances(cli, &[])?;
    let mut lambdas = parse_geometric(&args.lambda)?;
    let f = TestFunction::one_dimensional(parse_sampler(&args.f)?);
    let (kind, rest) = args.model.split_once(':').ok_or_else(|| usage("--model must be homogeneous:… or fock:…"))?;
    let mut window = None;
    let model: Box<dyn ScalingModel> = match kind {
        "homogeneous" => {
            let kv = parse_kv(rest)?;
            let h = num(kv.get("h").ok_or_else(|| usage("homogeneous model needs h"))?, "h")?;
            let c = kv.get("C").map(|c| num(c, "C")).transpose()?.unwrap_or(1.0);
            if let Some(bad) = kv.keys().find(|k| !matches!(k.as_str(), "h" | "C")) {
                return Err(usage(format!("unknown homogeneous parameter {bad}")));
            }
            Box::new(Homogeneous::new(h, c)?)
        }
        "fock" => {
            let mut parts = rest.splitn(2, ',');
            let path = PathBuf::from(parts.next().unwrap());
            let kv = parse_kv(parts.next().unwrap_or(""))?;
            let x0 = kv.get("x0").map(|v| num(v, "x0")).transpose()?.unwrap_or(0.0);
            let ad = FockAdapter::new(&load_model(&path)?, x0)?;
            let (lo, hi) = ad.window(&f, &lambdas).ok_or_else(|| usage("no λ in the grid is resolved by the mode cutoff; use a wider --f or more modes"))?;
            lambdas.retain(|&l| l >= lo && l <= hi);
            window = Some((lo, hi));
            Box::new(ad)
        }
        _ => return Err(usage(format!("unknown model kind {kind:?}"))),
    };
    let traj = scaling::zeta_eta_trajectory(model.as_ref(), &f, &lambdas)?;
    let van = scaling::check_vanishing(&traj.fit);
    let art = Artifacts { cli, command: "scaling" };
    if let Some(w) = art.csv_file(".csv")? {
        traj.write_csv(w)?;
    }
    let (vanishing, van_json) = match van {
        Ok(v) => (v.monotone_final_decade, serde_json::to_value(&v).unwrap()),
        Err(e) => (false, json!({ "error": e.to_string() })),
    };
    let pass = vanishing && traj.zeta_increasing && traj.bound_decreasing;
    let result = json!({
        "model": model.tag(),
        "alpha": traj.fit.alpha,
        "canonical_dimension": traj.fit.canonical_dimension,
        "fit_residual": traj.fit.residual,
        "monotonicity_violations": traj.fit.monotonicity_violations,
        "lambda_window": window,
        "vanishing": van_json,
        "zeta_increasing": traj.zeta_increasing,
        "bound_decreasing": traj.bound_decreasing,
        "eta_ratio_spread": traj.eta_ratio_spread,
    });
    let config = serde_json::to_value(args).map_err(|e| CliError::Failure(e.to_string()))?;
    art.write_json(config, &tols, result, pass)?;
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = std::fs::create_dir_all(&cli.out) {
        eprintln!("error: cannot create {}: {e}", cli.out.display());
        return ExitCode::from(2);
    }
    let outcome = match &cli.command {
        Command::Bounds(a) => run_bounds(&cli, a),
        Command::Verify(a) => run_verify(&cli, a),
        Command::Interest(a) => run_interest(&cli, a),
        Command::Wigner(a) => run_wigner(&cli, a),
        Command::Scaling(a) => run_scaling(&cli, a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(1)
        }
    }
}
