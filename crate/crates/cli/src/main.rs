//! `qdsm`: analyze doubly stochastic quantum channels from the command line.
//!
//! Machine-readable JSON goes to stdout and a human summary to stderr.
//! Exit codes: 0 ok, 1 invalid input, 2 numerical or positivity failure,
//! 3 incomplete decomposition.

mod report;

use std::fs;
use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qdsm_core::conjugacy::{certificate_residual, data_matrix, spectrum_invariant};
use qdsm_core::extremality::{decompose_extremal, DEFAULT_MAX_DEPTH};
use qdsm_core::faces::{m2_index2_family, m3_real_face_scan, M2CanonicalForm};
use qdsm_core::io::{self, classification_value, permutation_decomposition_value, real_list};
use qdsm_core::numerics::c64;
use qdsm_core::spectral::{cyclic_projections, CyclicOutcome};
use qdsm_core::{birkhoff_decompose, catalog, classify, Channel, Complex64, Error, ExtremalityKind, KrausFamily, Tolerance};
use serde_json::{json, Value};

use report::Report;

#[derive(Parser)]
#[command(name = "qdsm", version, about = "Doubly stochastic quantum channel toolkit")]
struct Cli {
    /// Set all three tolerances (rank, PSD, equality) to this value.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Only write JSON; suppress the human summary on stderr.
    #[arg(long, global = true)]
    json: bool,
    /// Depth bound for recursive decompositions.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_DEPTH)]
    max_depth: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Cp,
    CpPhi,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a channel file and report index, extremality, spectrum and data invariants.
    Analyze {
        /// Channel file, or `-` for stdin.
        path: String,
        /// Also decompose into extremal channels.
        #[arg(long)]
        decompose: bool,
    },
    /// Decompose a channel into a convex combination of extremal channels.
    Decompose {
        path: String,
        /// Convex set; defaults to cp-phi for trace-preserving input, cp otherwise.
        #[arg(long, value_enum)]
        kind: Option<Kind>,
    },
    /// Compare conjugacy invariants and optionally verify a certificate.
    Conjugacy {
        a: String,
        b: String,
        #[arg(long)]
        certificate: Option<String>,
    },
    /// Birkhoff–von Neumann decomposition of a doubly stochastic matrix file.
    Birkhoff { path: String },
    /// Print a built-in example channel as a channel file.
    Example {
        /// ex2.4, ex2.8, ex2.9, ex2.10, ex2.11, ex2.12, m2, identity, swap, depolarizing
        name: String,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        /// Complex parameter as `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        z1: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        z2: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        z3: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        c1: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        c2: Option<f64>,
    },
    /// Ergodic classification, with cyclic projections for periodic channels.
    Classify { path: String },
    /// Classify a real grid of the M_3 Schur face; CSV on stdout.
    FaceScan {
        #[arg(long, default_value_t = 0.1)]
        step: f64,
    },
}

enum Failure {
    Core(Error),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = Result<ExitCode, Failure>;

fn read_source(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Input(format!("cannot read stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {path}: {e}")))
    }
}

struct Ctx {
    tol: Tolerance,
    quiet: bool,
    max_depth: usize,
}

impl Ctx {
    fn human(&self, text: &str) {
        if !self.quiet {
            eprint!("{text}");
            if !text.ends_with('\n') {
                eprintln!();
            }
        }
    }
}

fn emit(v: &Value) {
    print!("{}", io::to_pretty(v));
}

/// Parses `re,im` (or a bare real number).
fn complex_arg(s: Option<&String>) -> Result<Complex64, Failure> {
    let Some(s) = s else {
        return Ok(c64(0.0, 0.0));
    };
    let bad = || Failure::Input(format!("bad complex number {s:?}; expected re,im"));
    let parse = |t: &str| t.trim().parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(bad);
    match s.split(',').collect::<Vec<_>>().as_slice() {
        [re] => Ok(c64(parse(re)?, 0.0)),
        [re, im] => Ok(c64(parse(re)?, parse(im)?)),
        _ => Err(bad()),
    }
}

fn analyze(ctx: &Ctx, path: &str, decompose: bool) -> Outcome {
    let ch = io::read_channel(&read_source(path)?, &ctx.tol)?;
    let mut report = Report::build(&ch, &ctx.tol)?;
    let mut code = ExitCode::SUCCESS;
    if decompose {
        let kind = default_kind(&ch);
        let dec = decompose_extremal(&ch, kind, ctx.max_depth, &ctx.tol)?;
        if !dec.complete {
            code = ExitCode::from(3);
        }
        report.decomposition = Some(dec);
    }
    emit(&report.to_json());
    ctx.human(&report.to_text());
    Ok(code)
}

fn default_kind(ch: &Channel) -> ExtremalityKind {
    if ch.is_trace_preserving() {
        ExtremalityKind::CpPhi
    } else {
        ExtremalityKind::Cp
    }
}

fn decompose(ctx: &Ctx, path: &str, kind: Option<Kind>) -> Outcome {
    let ch = io::read_channel(&read_source(path)?, &ctx.tol)?;
    let kind = match kind {
        Some(Kind::Cp) => ExtremalityKind::Cp,
        Some(Kind::CpPhi) => ExtremalityKind::CpPhi,
        None => default_kind(&ch),
    };
    let dec = decompose_extremal(&ch, kind, ctx.max_depth, &ctx.tol)?;
    emit(&io::decomposition_value(&dec));
    let mut text = format!(
        "{} term(s), depth {}, reconstruction error {:.3e}\n",
        dec.terms.len(),
        dec.depth,
        dec.reconstruction_error(&ch)?
    );
    for t in &dec.terms {
        text.push_str(&format!("  weight {:.12}  index {}\n", t.weight, t.channel.numerical_index()));
    }
    if !dec.complete {
        text.push_str(&format!("incomplete: depth bound {} reached\n", ctx.max_depth));
    }
    ctx.human(&text);
    Ok(if dec.complete { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn conjugacy(ctx: &Ctx, a: &str, b: &str, certificate: Option<&str>) -> Outcome {
    let fa = io::read_family(&read_source(a)?)?;
    let fb = io::read_family(&read_source(b)?)?;
    if fa.dim() != fb.dim() {
        return Err(Failure::Input(format!(
            "channels act on M_{} and M_{}",
            fa.dim(),
            fb.dim()
        )));
    }
    let ca = Channel::from_family(&fa, &ctx.tol)?;
    let cb = Channel::from_family(&fb, &ctx.tol)?;
    let sa = spectrum_invariant(&data_matrix(&ca, None, &ctx.tol)?, &ctx.tol)?;
    let sb = spectrum_invariant(&data_matrix(&cb, None, &ctx.tol)?, &ctx.tol)?;
    let matches = sa.len() == sb.len()
        && sa
            .iter()
            .zip(&sb)
            .all(|(x, y)| (x - y).abs() <= qdsm_core::conjugacy::SPECTRUM_MATCH);
    let mut out = json!({
        "spectrum_a": real_list(&sa),
        "spectrum_b": real_list(&sb),
        "invariants_match": matches,
    });
    let mut text = if matches {
        "invariants agree\n".to_string()
    } else {
        "invariants differ: not conjugate\n".to_string()
    };
    if let Some(path) = certificate {
        let cert = io::read_certificate(&read_source(path)?)?;
        let residual = certificate_residual(&fa, &fb, &cert)?;
        let verified = residual <= ctx.tol.eq_abs;
        out["certificate_verified"] = json!(verified);
        out["certificate_residual"] = io::number(residual);
        text.push_str(&format!(
            "certificate {} (residual {residual:.3e})\n",
            if verified { "verified" } else { "rejected" }
        ));
    }
    emit(&out);
    ctx.human(&text);
    Ok(ExitCode::SUCCESS)
}

fn birkhoff(ctx: &Ctx, path: &str) -> Outcome {
    let s = io::read_ds_matrix(&read_source(path)?, &ctx.tol)?;
    let dec = birkhoff_decompose(&s, &ctx.tol)?;
    emit(&permutation_decomposition_value(&dec));
    let mut text = format!(
        "{} permutation(s), reconstruction error {:.3e}\n",
        dec.terms.len(),
        dec.reconstruction_error(&s)
    );
    for (w, p) in &dec.terms {
        text.push_str(&format!("  {w:.12}  {p:?}\n"));
    }
    ctx.human(&text);
    Ok(ExitCode::SUCCESS)
}

fn classify_cmd(ctx: &Ctx, path: &str) -> Outcome {
    let ch = io::read_channel(&read_source(path)?, &ctx.tol)?;
    let c = classify(&ch, &ctx.tol)?;
    let has_cycle = c.peripheral.len() > 1 && !c.aperiodic;
    let mut note = None;
    let family = if has_cycle {
        match cyclic_projections(&ch, &ctx.tol) {
            Ok(CyclicOutcome::Found(f)) => Some(f),
            Ok(CyclicOutcome::Refused(why)) => {
                note = Some(why);
                None
            }
            Err(e) => {
                note = Some(e.to_string());
                None
            }
        }
    } else {
        None
    };
    emit(&classification_value(&c, family.as_ref()));
    let mut text = format!(
        "fixed-point dim {}, ergodic {}, period {}, strongly mixing {}\n",
        c.fixed_dim,
        c.ergodic,
        c.period.map_or("n/a".to_string(), |p| p.to_string()),
        c.strongly_mixing
    );
    if let Some(f) = &family {
        text.push_str(&format!("cyclic family of {} projections\n", f.period()));
    }
    if let Some(n) = note {
        text.push_str(&format!("no cyclic family: {n}\n"));
    }
    ctx.human(&text);
    Ok(ExitCode::SUCCESS)
}

struct ExampleArgs {
    m: Option<usize>,
    lambda: Option<f64>,
    n: Option<usize>,
    z: Option<String>,
    z1: Option<String>,
    z2: Option<String>,
    z3: Option<String>,
    c1: Option<f64>,
    c2: Option<f64>,
}

fn example_family(name: &str, a: &ExampleArgs, tol: &Tolerance) -> Result<KrausFamily, Failure> {
    let z = |s: &Option<String>| complex_arg(s.as_ref());
    let family = match name {
        "ex2.4" => catalog::ex2_4_family(),
        "ex2.8" => catalog::ex2_8(z(&a.z)?, tol)?.kraus().clone(),
        "ex2.9" => catalog::ex2_9(z(&a.z1)?, z(&a.z2)?, z(&a.z3)?, tol)?
            .kraus()
            .clone(),
        "ex2.10" => {
            let (x1, x2, x3) = (z(&a.z1)?, z(&a.z2)?, z(&a.z3)?);
            if x1.im != 0.0 || x2.im != 0.0 || x3.im != 0.0 {
                return Err(Failure::Input("ex2.10 takes real parameters".into()));
            }
            catalog::ex2_10(x1.re, x2.re, x3.re, tol)?.kraus().clone()
        }
        "ex2.11" => catalog::ex2_11_family(),
        "ex2.12" => {
            let m = a.m.unwrap_or(2);
            match a.lambda {
                None => catalog::ex2_12_family(m)?,
                Some(_) => catalog::ex2_12(m, a.lambda, tol)?.kraus().clone(),
            }
        }
        "m2" => {
            let form = M2CanonicalForm::from_c(a.c1.unwrap_or(0.0), a.c2.unwrap_or(0.5), tol)?;
            m2_index2_family(&form)
        }
        "identity" => Channel::identity(a.n.unwrap_or(2)).kraus().clone(),
        "swap" => catalog::swap_channel(tol)?.kraus().clone(),
        "depolarizing" => qdsm_core::channel::depolarizing(a.n.unwrap_or(2), tol)?.kraus().clone(),
        other => return Err(Failure::Input(format!("unknown example {other:?}"))),
    };
    Ok(family)
}

fn example(ctx: &Ctx, name: &str, args: &ExampleArgs) -> Outcome {
    let family = example_family(name, args, &ctx.tol)?;
    print!("{}", io::write_family(&family));
    ctx.human(&format!("{name}: dimension {}, {} Kraus operator(s)\n", family.dim(), family.len()));
    Ok(ExitCode::SUCCESS)
}

fn face_scan(ctx: &Ctx, step: f64) -> Outcome {
    let scan = m3_real_face_scan(step, &ctx.tol)?;
    print!("{}", scan.to_csv());
    let fmt = |ps: &[[f64; 3]]| ps.iter().map(|p| format!("({},{},{})", p[0], p[1], p[2])).collect::<Vec<_>>();
    ctx.human(&format!(
        "{} points; vertices in the face: {}; {} extreme candidates\n",
        scan.points.len(),
        fmt(&scan.vertices).join(" "),
        scan.extreme_candidates.len()
    ));
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Outcome {
    let tol = match cli.tol {
        Some(t) => Tolerance::uniform(t)?,
        None => Tolerance::default(),
    };
    let ctx = Ctx {
        tol,
        quiet: cli.json,
        max_depth: cli.max_depth,
    };
    match cli.command {
        Command::Analyze { path, decompose } => analyze(&ctx, &path, decompose),
        Command::Decompose { path, kind } => decompose(&ctx, &path, kind),
        Command::Conjugacy { a, b, certificate } => conjugacy(&ctx, &a, &b, certificate.as_deref()),
        Command::Birkhoff { path } => birkhoff(&ctx, &path),
        Command::Example {
            name,
            m,
            lambda,
            n,
            z,
            z1,
            z2,
            z3,
            c1,
            c2,
        } => example(
            &ctx,
            &name,
            &ExampleArgs {
                m,
                lambda,
                n,
                z,
                z1,
                z2,
                z3,
                c1,
                c2,
            },
        ),
        Command::Classify { path } => classify_cmd(&ctx, &path),
        Command::FaceScan { step } => face_scan(&ctx, step),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 1 } else { 2 })
        }
    }
}
