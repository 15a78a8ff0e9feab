mod commands;
mod presets;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use liesym::symmetry::STRUCTURAL_TOL;
use num_complex::Complex64;
use serde_json::json;

use commands::{CurrentsArgs, FieldArgs, Outcome, ReduceArgs};

#[derive(Debug)]
pub enum CliError {
    /// Bad input: exit code 2.
    Spec(String),
    /// A computation failed outright: exit code 1.
    Failure(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Spec(s) => write!(f, "invalid input: {s}"),
            CliError::Failure(s) => write!(f, "error: {s}"),
        }
    }
}

/// Lie point symmetries, conservation laws and reductions of fourth-order
/// linear plate and rod equations.
#[derive(Parser)]
#[command(name = "liesym", version)]
struct Cli {
    /// Equation spec (TOML).
    #[arg(long, global = true, conflicts_with = "preset")]
    input: Option<PathBuf>,
    /// Bundled equation spec; `list-presets` shows the names.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Write a JSON report to FILE, or to stdout when FILE is omitted.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "-", value_name = "FILE")]
    json: Option<String>,
    /// Seed for sample points and random jets.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Residual tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Field {
    #[arg(long, allow_hyphen_values = true)]
    xi1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    xi2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<String>,
}

impl Field {
    fn with_u(self, u: Option<String>) -> FieldArgs {
        FieldArgs {
            xi1: self.xi1,
            xi2: self.xi2,
            sigma: self.sigma,
            u,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Reduction {
    TravellingWave,
    Y3,
    Y4,
    PlateInvariant,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the equation and verify the listed generators.
    Classify,
    /// Test whether a vector field is a point symmetry.
    CheckSymmetry {
        #[command(flatten)]
        field: Field,
        /// Solution part `u(x) dw`.
        #[arg(long, allow_hyphen_values = true)]
        u: Option<String>,
    },
    /// Conserved currents, checked as divergence identities.
    Currents {
        /// Also print the generic rod table for a homogeneous beam.
        #[arg(long)]
        table: bool,
        /// Current generated by the solution symmetry `u dw`.
        #[arg(long, allow_hyphen_values = true)]
        u: Option<String>,
        #[command(flatten)]
        field: Field,
        /// Check conservation on this exact solution.
        #[arg(long, value_name = "W", allow_hyphen_values = true)]
        verify: Option<String>,
    },
    /// Symmetry reduction to an ODE, optionally lifting a profile.
    Reduce {
        #[arg(long, value_enum)]
        kind: Reduction,
        /// Wave speed.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        c: f64,
        /// Direction of travel, +1 or -1.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        sign: f64,
        /// Closed-form profile U(s).
        #[arg(long, allow_hyphen_values = true)]
        profile: Option<String>,
        /// Integrate the reduced ODE numerically and lift the result.
        #[arg(long)]
        integrate: bool,
        /// U, U', U'', U''' at s0.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [1.0, 0.0, 0.0, 0.0])]
        init: Vec<f64>,
        #[arg(long, allow_hyphen_values = true)]
        s0: Option<f64>,
        /// Weights of the four basis profiles of the invariant solution.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [1.0, 0.0, 0.0, 0.0])]
        coeffs: Vec<f64>,
    },
    /// Map a six-parameter plate to constant coefficients.
    Transform {
        /// Complex constants k1,k2,k3, e.g. "1,0,1+2*i".
        #[arg(long, default_value = "0,1,0", allow_hyphen_values = true)]
        k: String,
        /// Base point of the antiderivative, "x1,x2".
        #[arg(long, default_value = "1,1", allow_hyphen_values = true)]
        base: String,
    },
    /// Built-in identity battery and table suites.
    Selfcheck,
    /// Names of the bundled specs.
    ListPresets,
}

fn four(v: &[f64], flag: &str) -> Result<[f64; 4], CliError> {
    v.try_into()
        .map_err(|_| CliError::Spec(format!("{flag} needs four comma-separated numbers")))
}

fn parse_k(s: &str) -> Result<[Complex64; 3], CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Spec("--k needs three comma-separated complex numbers".into()));
    }
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = liesym::expr::parse_complex_constant(p.trim()).map_err(|e| CliError::Spec(format!("--k: {e}")))?;
    }
    Ok(out)
}

fn parse_base(s: &str) -> Result<[f64; 2], CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Spec(format!("--base: {e}")))?;
    match v[..] {
        [a, b] => Ok([a, b]),
        _ => Err(CliError::Spec("--base needs two numbers".into())),
    }
}

fn load(cli: &Cli) -> Result<spec::Loaded, CliError> {
    if let Some(p) = &cli.input {
        return spec::load(p, cli.seed);
    }
    if let Some(name) = &cli.preset {
        let text = presets::get(name).ok_or_else(|| CliError::Spec(format!("unknown preset {name:?}")))?;
        return spec::from_str(text, cli.seed);
    }
    Err(CliError::Spec("this command needs --input FILE or --preset NAME".into()))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Classify => "classify",
        Command::CheckSymmetry { .. } => "check-symmetry",
        Command::Currents { .. } => "currents",
        Command::Reduce { .. } => "reduce",
        Command::Transform { .. } => "transform",
        Command::Selfcheck => "selfcheck",
        Command::ListPresets => "list-presets",
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let cli_tol = cli.tol;
    if let Some(t) = cli_tol {
        if t.is_nan() || t <= 0.0 {
            return Err(CliError::Spec("--tol must be positive".into()));
        }
    }
    match cli.command {
        Command::Selfcheck => return commands::selfcheck(cli.seed.unwrap_or(7), cli_tol.unwrap_or(STRUCTURAL_TOL)),
        Command::ListPresets => {
            let mut out = Outcome {
                pass: true,
                ..Default::default()
            };
            for n in presets::names() {
                out.text.push(n.to_string());
                out.reports.push(json!({ "name": n }));
            }
            return Ok(out);
        }
        _ => {}
    }
    let l = load(&cli)?;
    let tol = cli_tol.or(l.tol).unwrap_or(STRUCTURAL_TOL);
    match cli.command {
        Command::Classify => commands::classify(&l, tol),
        Command::CheckSymmetry { field, u } => commands::check_symmetry(&l, &field.with_u(u), tol),
        Command::Currents { table, u, field, verify } => {
            let a = CurrentsArgs {
                table,
                u,
                field: field.with_u(None),
                verify,
            };
            commands::currents(&l, &a, cli.seed.unwrap_or(l.samples.seed), tol)
        }
        Command::Reduce {
            kind,
            c,
            sign,
            profile,
            integrate,
            init,
            s0,
            coeffs,
        } => {
            if sign.abs() != 1.0 {
                return Err(CliError::Spec("--sign must be 1 or -1".into()));
            }
            let kind = match kind {
                Reduction::TravellingWave => "travelling-wave",
                Reduction::Y3 => "y3",
                Reduction::Y4 => "y4",
                Reduction::PlateInvariant => "plate-invariant",
            };
            let a = ReduceArgs {
                kind: kind.into(),
                c,
                sign,
                profile,
                integrate,
                init: four(&init, "--init")?,
                s0,
                coeffs: four(&coeffs, "--coeffs")?,
            };
            commands::reduce(&l, &a, tol)
        }
        Command::Transform { k, base } => commands::transform(&l, parse_k(&k)?, parse_base(&base)?, tol),
        Command::Selfcheck | Command::ListPresets => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = command_name(&cli.command);
    let json_target = cli.json.clone();
    let result = run(cli);
    let (code, doc) = match &result {
        Ok(out) => (
            if out.pass { 0 } else { 1 },
            json!({ "schema": 1, "command": name, "pass": out.pass, "reports": out.reports }),
        ),
        Err(e) => {
            let (code, kind) = match e {
                CliError::Spec(_) => (2, "input"),
                CliError::Failure(_) => (1, "failure"),
            };
            (
                code,
                json!({ "schema": 1, "command": name, "pass": false, "reports": [], "error": { "kind": kind, "message": e.to_string() } }),
            )
        }
    };
    let to_stdout = json_target.as_deref() == Some("-");
    if !to_stdout {
        match &result {
            Ok(out) => {
                for l in &out.text {
                    println!("{l}");
                }
                if name != "list-presets" {
                    println!("{}", if out.pass { "PASS" } else { "FAIL" });
                }
            }
            Err(e) => eprintln!("{e}"),
        }
    }
    if let Some(t) = json_target {
        let s = serde_json::to_string_pretty(&doc).expect("json");
        if to_stdout {
            println!("{s}");
        } else if let Err(e) = std::fs::write(&t, s + "\n") {
            eprintln!("cannot write {t}: {e}");
            return ExitCode::from(2);
        }
    }
    ExitCode::from(code)
}
