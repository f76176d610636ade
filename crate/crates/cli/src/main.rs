//! `adjchar`: identity checks, curve tracing and adjoint verification on
//! structured-grid fields.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adjchar::analytic::{gamma_along, relative_spread, stripe_grid, BBox, StripeField};
use adjchar::identities::{run_suite, Fault, SuiteConfig};
use adjchar::{
    k_integrals, trace, CompatKind, Curve, Disk, Error, Family, FieldGrid, Gas, Sense, TraceConfig,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "adjchar",
    version,
    about = "Characteristic-curve checks of 2D Euler adjoint fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the randomized algebraic identity suite.
    Identities {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Trace one curve through a field and write it as CSV.
    Trace {
        #[command(flatten)]
        curve: CurveArgs,
        /// Curve CSV path; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace one curve and integrate its compatibility relations.
    Verify {
        #[command(flatten)]
        curve: CurveArgs,
        /// Integral kind; defaults to every kind of the family.
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        /// Largest accepted ratio of the integral to its largest subpart.
        #[arg(long, default_value_t = 0.02)]
        tol: f64,
        /// Report CSV path (the kind is appended when several are written).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write an analytic stripe-field fixture and the Gamma series along S, C+ and C-.
    StripeDemo {
        #[arg(long, default_value_t = 2.0)]
        mach: f64,
        /// Freestream angle in degrees.
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        /// Nodes per direction.
        #[arg(long, default_value_t = 512)]
        nodes: usize,
        /// Tracing step.
        #[arg(long, default_value_t = 1.0 / 512.0)]
        step: f64,
        /// Output directory.
        #[arg(long, default_value = "stripe_demo")]
        out: PathBuf,
    },
    /// Convert a column CSV to the field format.
    Convert {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Grid dimensions NI,NJ (required without i,j columns).
        #[arg(long, value_parser = parse_dims)]
        dims: Option<(usize, usize)>,
        #[arg(long, default_value_t = 1.4)]
        gamma: f64,
        #[arg(long)]
        periodic: bool,
    },
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long)]
    field: PathBuf,
    /// Start point X,Y.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    start: (f64, f64),
    #[arg(long, value_enum, default_value_t = FamilyArg::S)]
    family: FamilyArg,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long, default_value_t = 10.0)]
    max_length: f64,
    /// Stop outside the disk CX,CY,R.
    #[arg(long, value_parser = parse_disk, allow_hyphen_values = true)]
    clip: Option<Disk>,
    #[arg(long, value_enum, default_value_t = SenseArg::Against)]
    sense: SenseArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    S,
    Cplus,
    Cminus,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    S1,
    S2,
    Cplus,
    Cminus,
}

#[derive(Clone, Copy, ValueEnum)]
enum SenseArg {
    Against,
    With,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::S => Family::S,
            FamilyArg::Cplus => Family::CPlus,
            FamilyArg::Cminus => Family::CMinus,
        }
    }
}

impl From<KindArg> for CompatKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::S1 => CompatKind::S1,
            KindArg::S2 => CompatKind::S2,
            KindArg::Cplus => CompatKind::CPlus,
            KindArg::Cminus => CompatKind::CMinus,
        }
    }
}

fn parse_floats(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("`{s}`: {e}"))?;
    if v.len() != n || v.iter().any(|x| !x.is_finite()) {
        return Err(format!(
            "expected {n} comma-separated finite numbers, got `{s}`"
        ));
    }
    Ok(v)
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let v = parse_floats(s, 2)?;
    Ok((v[0], v[1]))
}

fn parse_disk(s: &str) -> Result<Disk, String> {
    let v = parse_floats(s, 3)?;
    Ok(Disk {
        cx: v[0],
        cy: v[1],
        r: v[2],
    })
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("`{s}`: {e}"))?;
    match v[..] {
        [a, b] => Ok((a, b)),
        _ => Err(format!("expected NI,NJ, got `{s}`")),
    }
}

const EXIT_VERIFY: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_PHYSICS: u8 = 3;
const EXIT_IO: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::OutOfDomain { .. }
        | Error::OutOfDomainAtStart { .. }
        | Error::DegenerateDirection(_)
        | Error::OutOfProfileDomain { .. }
        | Error::TooFewPoints { .. }
        | Error::StepFailure { .. } => EXIT_DOMAIN,
        Error::NonPhysicalState { .. }
        | Error::NonPhysicalNode { .. }
        | Error::SubsonicInput { .. }
        | Error::SubsonicAtStart { .. }
        | Error::StagnantState => EXIT_PHYSICS,
        Error::Io(_)
        | Error::Format { .. }
        | Error::DimensionMismatch { .. }
        | Error::InvalidArgument(_)
        | Error::MissingAdjoint
        | Error::FamilyMismatch { .. } => EXIT_IO,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_IO } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cmd: Command) -> adjchar::Result<u8> {
    match cmd {
        Command::Identities {
            seed,
            samples,
            inject_fault,
        } => identities(seed, samples, inject_fault),
        Command::Trace { curve, out } => {
            let c = trace_from(&curve)?;
            eprintln!(
                "{} points, length {:.6e}, termination {}",
                c.len(),
                c.length(),
                c.termination
            );
            match out {
                Some(p) => c.save_csv(p)?,
                None => c.write_csv(std::io::stdout().lock())?,
            }
            Ok(0)
        }
        Command::Verify {
            curve,
            kind,
            tol,
            out,
        } => verify(&curve, kind, tol, out.as_deref()),
        Command::StripeDemo {
            mach,
            alpha,
            nodes,
            step,
            out,
        } => stripe_demo(mach, alpha, nodes, step, &out),
        Command::Convert {
            csv,
            out,
            dims,
            gamma,
            periodic,
        } => {
            let gas = Gas::new(gamma)?;
            let grid = FieldGrid::from_csv(std::fs::File::open(csv)?, dims, gas, periodic)?;
            grid.save(&out)?;
            eprintln!(
                "wrote {} x {} field to {}",
                grid.ni(),
                grid.nj(),
                out.display()
            );
            Ok(0)
        }
    }
}

fn identities(seed: u64, samples: usize, inject_fault: bool) -> adjchar::Result<u8> {
    if samples == 0 {
        return Err(Error::InvalidArgument(
            "--samples must be at least 1".into(),
        ));
    }
    let cfg = SuiteConfig {
        seed,
        samples,
        fault: inject_fault.then_some(Fault::FlipC21x),
    };
    let results = run_suite(&cfg)?;
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    for r in &results {
        println!(
            "{:<width$}  max_err {:.3e}  tol {:.0e}  {}",
            r.name,
            r.max_error,
            r.tolerance,
            if r.passed() { "ok" } else { "FAILED" }
        );
    }
    let failed: Vec<_> = results
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.name)
        .collect();
    if failed.is_empty() {
        println!(
            "all {} identities hold over {samples} samples",
            results.len()
        );
        Ok(0)
    } else {
        eprintln!("failing identities: {}", failed.join(", "));
        Ok(EXIT_VERIFY)
    }
}

fn trace_from(a: &CurveArgs) -> adjchar::Result<Curve> {
    let grid = FieldGrid::load(&a.field)?;
    let cfg = TraceConfig {
        step: a.step,
        max_length: a.max_length,
        radius_limit: a.clip,
        sense: match a.sense {
            SenseArg::Against => Sense::AgainstFlow,
            SenseArg::With => Sense::WithFlow,
        },
        ..TraceConfig::default()
    };
    trace(&grid, a.start, a.family.into(), &cfg)
}

fn with_suffix(path: &Path, kind: CompatKind) -> PathBuf {
    let stem = path
        .file_stem()
        .map_or_else(|| "report".into(), |s| s.to_string_lossy().into_owned());
    let ext = path
        .extension()
        .map_or_else(|| "csv".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}_{kind}.{ext}"))
}

fn verify(
    a: &CurveArgs,
    kind: Option<KindArg>,
    tol: f64,
    out: Option<&Path>,
) -> adjchar::Result<u8> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "--tol must be a non-negative number, got {tol}"
        )));
    }
    let family: Family = a.family.into();
    let kinds: Vec<CompatKind> = match kind {
        Some(k) => vec![k.into()],
        None => CompatKind::for_family(family).to_vec(),
    };
    if let Some(k) = kinds.iter().find(|k| k.family() != family) {
        return Err(Error::FamilyMismatch {
            family: family.to_string(),
            kind: k.to_string(),
        });
    }
    let curve = trace_from(a)?;
    println!(
        "curve {family}: {} points, length {:.6e}, termination {}",
        curve.len(),
        curve.length(),
        curve.termination
    );
    let mut pass = true;
    for k in &kinds {
        let r = k_integrals(&curve, *k)?;
        let t = r.subpart_totals;
        println!(
            "kind {k}: K_total {:.6e}  subparts [{:.6e}, {:.6e}, {:.6e}, {:.6e}]",
            r.k_total, t[0], t[1], t[2], t[3]
        );
        println!(
            "kind {k}: max |subpart| {:.6e}  ratio {:.6e}  endpoint ratio {:.6e}",
            r.max_abs_subpart, r.ratio, r.total_ratio
        );
        let ok = r.ratio <= tol;
        println!("kind {k}: {}", if ok { "PASS" } else { "FAIL" });
        pass &= ok;
        if let Some(p) = out {
            let path = if kinds.len() > 1 {
                with_suffix(p, *k)
            } else {
                p.to_path_buf()
            };
            r.save(path)?;
        }
    }
    Ok(if pass { 0 } else { EXIT_VERIFY })
}

fn stripe_demo(
    mach: f64,
    alpha_deg: f64,
    nodes: usize,
    step: f64,
    out: &Path,
) -> adjchar::Result<u8> {
    let field = StripeField::<f64>::demo(mach, alpha_deg.to_radians())?;
    let bbox = BBox::square(1.5);
    let grid = stripe_grid(&field, bbox, nodes, nodes)?;
    std::fs::create_dir_all(out)?;
    grid.save(out.join("stripe_field.txt"))?;
    let cfg = TraceConfig {
        step,
        max_length: 10.0,
        ..TraceConfig::default()
    };
    for (family, start) in field.demo_starts() {
        let curve = trace(&grid, start, family, &cfg)?;
        for k in CompatKind::for_family(family) {
            let r = k_integrals(&curve, *k)?;
            println!("{family}: kind {k} ratio {:.3e}", r.ratio);
        }
        let g = gamma_along(&curve)?;
        let path = out.join(format!("gamma_{family}.csv"));
        let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Io(e.into()))?;
        w.write_record(["s", "gamma_s1", "gamma_s2", "gamma_cplus", "gamma_cminus"])
            .map_err(|e| Error::Io(e.into()))?;
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:.16e}"));
        for k in 0..g.s.len() {
            w.write_record([
                format!("{:.16e}", g.s[k]),
                format!("{:.16e}", g.s1[k]),
                format!("{:.16e}", g.s2[k]),
                opt(g.cplus[k]),
                opt(g.cminus[k]),
            ])
            .map_err(|e| Error::Io(e.into()))?;
        }
        w.flush()?;
        let own: Vec<f64> = match family {
            Family::S => g.s1.clone(),
            Family::CPlus => g.cplus.iter().flatten().copied().collect(),
            Family::CMinus => g.cminus.iter().flatten().copied().collect(),
        };
        let spread = relative_spread(&own);
        if family == Family::S {
            println!(
                "{family}: {} points, spread gamma_s1 {:.3e}, gamma_s2 {:.3e}",
                curve.len(),
                spread,
                relative_spread(&g.s2)
            );
        } else {
            println!(
                "{family}: {} points, spread gamma_{family} {:.3e}",
                curve.len(),
                spread
            );
        }
    }
    println!("wrote {}", out.display());
    Ok(0)
}
