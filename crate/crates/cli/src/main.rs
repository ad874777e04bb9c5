mod verify;

use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pseudo_bracket::bracket::{
    bracket, bracket_with, normalized_bracket, normalized_bracket_with, specialize_annular_to_planar, specialize_toroidal,
    torus_class_diagram, BracketError, Options, Variant, DEFAULT_MAX_CROSSINGS,
};
use pseudo_bracket::diagram::{parse_diagram, Diagram, DiagramError, Surface};
use pseudo_bracket::fixtures;
use pseudo_bracket::gen::random_diagram;
use pseudo_bracket::mixed::{annular_to_o_mixed, mixed_bracket, normalized_mixed_bracket, toroidal_to_h_mixed, MixedError};
use pseudo_bracket::poly::{Poly, PolyError, Var};
use serde_json::json;

#[derive(Parser)]
#[command(name = "pbracket", version, about = "Pseudo bracket polynomials of pseudo link diagrams on the plane, annulus and torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bracket, normalized bracket or Jones-type polynomial of a diagram.
    Compute {
        #[arg(long)]
        input: String,
        #[arg(long, value_parser = parse_variant)]
        variant: Variant,
        #[arg(long)]
        normalize: bool,
        /// Render in t with A = t^(-1/4); needs --normalize.
        #[arg(long)]
        jones: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_MAX_CROSSINGS)]
        max_crossings: usize,
    },
    /// Seeded random move sequences; checks the invariant never changes.
    Verify {
        #[arg(long, value_enum)]
        moves: verify::MoveSet,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        max_steps: usize,
        #[arg(long, conflicts_with = "corpus")]
        input: Option<String>,
        #[arg(long, value_enum)]
        corpus: Option<Corpus>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Mixed-link or forgetful planar form of a diagram.
    Convert {
        #[arg(long)]
        input: String,
        #[arg(long, value_enum)]
        to: Target,
        /// Also compute both sides and check they agree.
        #[arg(long)]
        check: bool,
    },
    /// Generate a diagram document.
    Gen {
        #[command(subcommand)]
        what: GenKind,
    },
    /// Internal consistency checks on the shipped fixtures.
    Selfcheck,
}

#[derive(Subcommand)]
enum GenKind {
    /// Closed torus-class curve with k parallel copies.
    TorusClass {
        #[arg(allow_negative_numbers = true)]
        p: i64,
        #[arg(allow_negative_numbers = true)]
        q: i64,
        k: u32,
        #[arg(value_parser = parse_surface)]
        target: Surface,
    },
    /// Random connected diagram grown from a loop by expansion moves.
    Random {
        #[arg(value_parser = parse_surface)]
        surface: Surface,
        crossings: usize,
        pre: usize,
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Corpus {
    Builtin,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    OMixed,
    HMixed,
    PlanarForgetful,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse()
}

fn parse_surface(s: &str) -> Result<Surface, String> {
    match s {
        "plane" | "planar" => Ok(Surface::Plane),
        "annulus" | "annular" => Ok(Surface::Annulus),
        "torus" | "toroidal" => Ok(Surface::Torus),
        _ => Err(format!("unknown surface {s:?}")),
    }
}

/// A failure reported as a JSON object on stderr.
#[derive(Debug)]
pub struct Failure {
    kind: &'static str,
    message: String,
    code: u8,
}

impl Failure {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Failure { kind, message: message.into(), code: 1 }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure { kind: "usage", message: message.into(), code: 2 }
    }
}

impl From<DiagramError> for Failure {
    fn from(e: DiagramError) -> Self {
        let kind = match e {
            DiagramError::Syntax(_) | DiagramError::Schema(_) => "parse",
            _ => "validation",
        };
        Failure::new(kind, e.to_string())
    }
}

impl From<BracketError> for Failure {
    fn from(e: BracketError) -> Self {
        match e {
            BracketError::Diagram(d) => d.into(),
            BracketError::VariantMismatch { .. } => Failure::new("variant", e.to_string()),
            BracketError::TooManyCrossings { .. } => Failure::new("limit", e.to_string()),
            BracketError::BadClass { .. } => Failure::new("parameter", e.to_string()),
            _ => Failure::new("bracket", e.to_string()),
        }
    }
}

impl From<MixedError> for Failure {
    fn from(e: MixedError) -> Self {
        match e {
            MixedError::Bracket(b) => b.into(),
            MixedError::Diagram(d) => d.into(),
            MixedError::Surface { .. } | MixedError::Variant { .. } => Failure::new("surface", e.to_string()),
            MixedError::Invalid(_) => Failure::new("validation", e.to_string()),
        }
    }
}

impl From<PolyError> for Failure {
    fn from(e: PolyError) -> Self {
        Failure::new("polynomial", e.to_string())
    }
}

pub fn read_diagram(path: &str) -> Result<Diagram, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::new("io", format!("{path}: {e}")))?;
    Ok(parse_diagram(&text)?)
}

fn compute(
    input: &str,
    variant: Variant,
    normalize: bool,
    jones: bool,
    format: Format,
    threads: Option<usize>,
    max_crossings: usize,
) -> Result<String, Failure> {
    if jones && !normalize {
        return Err(Failure::usage("--jones needs --normalize"));
    }
    let d = read_diagram(input)?;
    let opts = Options { threads, max_crossings, ..Options::default() };
    let p = if normalize { normalized_bracket_with(&d, variant, &opts)? } else { bracket_with(&d, variant, &opts)? };
    Ok(match (jones, format) {
        (true, Format::Text) => p.render_jones()?,
        (true, Format::Json) => json!({ "jones": p.render_jones()? }).to_string(),
        (false, Format::Text) => p.render_canonical(),
        (false, Format::Json) => p.to_json().to_string(),
    })
}

fn mismatch(what: &str, lhs: &Poly, rhs: &Poly) -> Failure {
    Failure::new("check", format!("{what}: {lhs} != {rhs}"))
}

fn check_equal(what: &str, lhs: Poly, rhs: Poly) -> Result<(), Failure> {
    if lhs == rhs {
        Ok(())
    } else {
        Err(mismatch(what, &lhs, &rhs))
    }
}

fn convert(input: &str, to: Target, check: bool) -> Result<(String, Vec<String>), Failure> {
    let d = read_diagram(input)?;
    let mut notes = Vec::new();
    let out = match to {
        Target::OMixed | Target::HMixed => {
            let (m, variants): (_, &[Variant]) = match to {
                Target::OMixed => (annular_to_o_mixed(&d)?, &[Variant::Annular, Variant::AnnularUniversal]),
                _ => (toroidal_to_h_mixed(&d)?, &[Variant::Toroidal, Variant::ToroidalUniversal, Variant::ToroidalReduced]),
            };
            if check {
                for &v in variants {
                    check_equal(v.name(), mixed_bracket(&m, v)?, bracket(&d, v)?)?;
                    check_equal(&format!("normalized {}", v.name()), normalized_mixed_bracket(&m, v)?, normalized_bracket(&d, v)?)?;
                    notes.push(format!("{}: mixed and surface brackets agree", v.name()));
                }
            }
            m.to_json_pretty()
        }
        Target::PlanarForgetful => {
            let f = d.forget_tags();
            if check {
                let planar = bracket(&f, Variant::Planar)?;
                match d.surface {
                    Surface::Plane => notes.push("planar input is unchanged".into()),
                    Surface::Annulus => {
                        check_equal("annular to planar", specialize_annular_to_planar(&bracket(&d, Variant::Annular)?)?, planar)?;
                        notes.push("specialized annular bracket equals the planar bracket".into());
                    }
                    Surface::Torus => {
                        let tb = bracket(&d, Variant::Toroidal)?;
                        let basic = tb.vars().iter().all(|v| !matches!(v, Var::Spq(..)) || matches!(v, Var::Spq(1, 0) | Var::Spq(0, 1)));
                        if basic {
                            check_equal("toroidal to planar", specialize_toroidal(&tb, Surface::Plane)?, planar)?;
                            notes.push("specialized toroidal bracket equals the planar bracket".into());
                        } else {
                            notes.push("states carry classes other than (1,0) and (0,1); no planar comparison".into());
                        }
                    }
                }
            }
            f.to_json_pretty()
        }
    };
    Ok((out, notes))
}

fn gen(what: GenKind) -> Result<String, Failure> {
    let d = match what {
        GenKind::TorusClass { p, q, k, target } => {
            if target == Surface::Torus {
                return Err(Failure::new("parameter", "torus-class diagrams live on the annulus or the plane"));
            }
            torus_class_diagram(p, q, k, target)?
        }
        GenKind::Random { surface, crossings, pre, seed } => {
            if pre > crossings {
                return Err(Failure::new("parameter", format!("{pre} precrossings out of {crossings} crossings")));
            }
            if crossings > 64 {
                return Err(Failure::new("parameter", format!("{crossings} crossings is above the generator limit of 64")));
            }
            random_diagram(surface, crossings, pre, seed)
        }
    };
    Ok(d.to_json_pretty())
}

fn selfcheck() -> Result<String, Failure> {
    let mut lines = Vec::new();
    for (name, d) in fixtures::all() {
        let v = Variant::plain(d.surface);
        let b = bracket(&d, v)?;
        let n = normalized_bracket(&d, v)?;
        for engine in [pseudo_bracket::bracket::Engine::Enumerate, pseudo_bracket::bracket::Engine::Contract] {
            let opts = Options { engine, ..Options::default() };
            check_equal(&format!("{name} {engine:?}"), bracket_with(&d, v, &opts)?, b.clone())?;
        }
        match d.surface {
            Surface::Annulus => {
                let m = annular_to_o_mixed(&d)?;
                check_equal(&format!("{name} o-mixed"), normalized_mixed_bracket(&m, v)?, n.clone())?;
            }
            Surface::Torus => {
                let m = toroidal_to_h_mixed(&d)?;
                check_equal(&format!("{name} h-mixed"), normalized_mixed_bracket(&m, v)?, n.clone())?;
            }
            Surface::Plane => {}
        }
        lines.push(format!("ok {name}: {b}"));
    }
    let report = verify::run(&verify::corpus(), verify::MoveSet::Full, 60, 1, 8, None)?;
    if report.failed > 0 {
        return Err(Failure::new("check", format!("{} invariance trials failed", report.failed)));
    }
    lines.push(format!("ok invariance: {} trials", report.trials));
    Ok(lines.join("\n"))
}

/// Prints a line; a closed pipe downstream is not an error.
fn emit(text: &str) -> Result<(), Failure> {
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::new("io", e.to_string())),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Compute { input, variant, normalize, jones, format, threads, max_crossings } => {
            emit(&compute(&input, variant, normalize, jones, format, threads, max_crossings)?)?;
        }
        Command::Verify { moves, trials, seed, max_steps, input, corpus, threads } => {
            let targets = match (input, corpus) {
                (Some(path), _) => vec![(path.clone(), read_diagram(&path)?)],
                (None, Some(Corpus::Builtin)) => verify::corpus(),
                (None, None) => return Err(Failure::usage("verify needs --input or --corpus builtin")),
            };
            if max_steps == 0 {
                return Err(Failure::usage("--max-steps must be positive"));
            }
            let report = verify::run(&targets, moves, trials, seed, max_steps, threads)?;
            emit(&serde_json::to_string_pretty(&report).expect("report serializes"))?;
            if report.failed > 0 {
                return Err(Failure::new("verify", format!("{} of {} trials failed", report.failed, report.trials)));
            }
        }
        Command::Convert { input, to, check } => {
            let (doc, notes) = convert(&input, to, check)?;
            emit(&doc)?;
            for n in notes {
                eprintln!("check: {n}");
            }
        }
        Command::Gen { what } => emit(&gen(what)?)?,
        Command::Selfcheck => emit(&selfcheck()?)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let f = Failure::usage(e.to_string().trim_end());
            eprintln!("{}", json!({ "error": { "kind": f.kind, "message": f.message } }));
            return ExitCode::from(f.code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", json!({ "error": { "kind": f.kind, "message": f.message } }));
            ExitCode::from(f.code)
        }
    }
}
