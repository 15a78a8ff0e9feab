//! TOML equation specs.

use std::collections::BTreeMap;
use std::path::Path;

use liesym::expr::{parse_complex, parse_scalar, ScalarExpr};
use liesym::jet::JetCoord;
use liesym::operator::Operator4;
use liesym::plate::{self, AnalyticSeed, PlateEquation};
use liesym::rod::{KappaForm, RodEquation};
use liesym::verify::{Domain, SampleSet};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub equation: EquationSection,
    pub plate: Option<PlateSection>,
    pub rod: Option<RodSection>,
    pub general: Option<GeneralSection>,
    pub domain: Option<Domain>,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationSection {
    pub kind: Kind,
    pub name: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Plate,
    Rod,
    General,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlateSection {
    Coefficients {
        #[serde(default = "zero_str")]
        a11: String,
        #[serde(default = "zero_str")]
        a12: String,
        #[serde(default = "zero_str")]
        a22: String,
        #[serde(default = "zero_str")]
        a0: String,
    },
    Physical {
        d: f64,
        nu: f64,
        #[serde(default = "zero_str")]
        n11: String,
        #[serde(default = "zero_str")]
        n12: String,
        #[serde(default = "zero_str")]
        n22: String,
        #[serde(default = "zero_str")]
        k: String,
    },
    EOmega {
        omega: String,
    },
    Constant {
        kappa: f64,
    },
}

fn zero_str() -> String {
    "0".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RodSection {
    pub gamma: f64,
    #[serde(default)]
    pub chi11: f64,
    #[serde(default)]
    pub chi12: f64,
    #[serde(default)]
    pub chi22: f64,
    #[serde(default)]
    pub kappa: KappaSpec,
}

#[derive(Debug, Deserialize, Default)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum KappaSpec {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    Ridge {
        beta1: f64,
        beta2: f64,
        f: String,
    },
    InvSquareTime {
        kappa0: f64,
        beta: f64,
    },
    QuarticRidgeB {
        kappa0: f64,
        beta: f64,
    },
    SimilarityB {
        beta1: f64,
        beta2: f64,
        f: String,
    },
    PowFourThirds {
        kappa0: f64,
        beta: f64,
    },
    QuarticRidgeC {
        kappa0: f64,
        beta: f64,
    },
    SimilarityC {
        beta1: f64,
        beta2: f64,
        f: String,
    },
    General {
        expr: String,
    },
}

/// Coefficients of `D[w]` keyed by the derivative they multiply, e.g.
/// `w1111`, `w12`, `w`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralSection {
    pub coefficients: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub tol: Option<f64>,
    pub solution: Option<String>,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            samples: default_samples(),
            tol: None,
            solution: None,
        }
    }
}

fn default_samples() -> usize {
    48
}

pub enum Model {
    Plate {
        eq: PlateEquation,
        seed: Option<AnalyticSeed>,
        const_plate_kappa: Option<f64>,
    },
    Rod(RodEquation),
    General(Operator4),
}

impl Model {
    pub fn operator(&self) -> Result<Operator4, CliError> {
        match self {
            Model::Plate { eq, const_plate_kappa, .. } => Ok(match const_plate_kappa {
                Some(k) => plate::const_plate_operator(*k),
                None => eq.operator(),
            }),
            Model::Rod(eq) => eq.operator().map_err(|e| CliError::Spec(e.to_string())),
            Model::General(op) => Ok(op.clone()),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Model::Plate { .. } => "plate",
            Model::Rod(_) => "rod",
            Model::General(_) => "general",
        }
    }
}

pub struct Loaded {
    pub name: String,
    pub model: Model,
    pub samples: SampleSet,
    pub solution: Option<ScalarExpr>,
    pub tol: Option<f64>,
}

pub fn expr(src: &str, what: &str) -> Result<ScalarExpr, CliError> {
    parse_scalar(src).map_err(|e| CliError::Spec(format!("{what}: {e}")))
}

/// Expression in the single variable `s`, stored as `x1`.
pub fn profile_expr(src: &str, what: &str) -> Result<ScalarExpr, CliError> {
    let mut out = String::with_capacity(src.len());
    let chars: Vec<char> = src.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        let ident = |k: Option<&char>| k.is_some_and(|ch| ch.is_ascii_alphanumeric() || *ch == '_');
        if c == 's' && !ident(i.checked_sub(1).and_then(|j| chars.get(j))) && !ident(chars.get(i + 1)) {
            out.push_str("x1");
        } else {
            out.push(c);
        }
    }
    expr(&out, what)
}

fn kappa_form(k: &KappaSpec) -> Result<KappaForm, CliError> {
    use KappaSpec as S;
    Ok(match k {
        S::Zero => KappaForm::Zero,
        S::Constant { value } => KappaForm::Constant(*value),
        S::Ridge { beta1, beta2, f } => KappaForm::Ridge {
            beta1: *beta1,
            beta2: *beta2,
            f: profile_expr(f, "kappa profile")?,
        },
        S::InvSquareTime { kappa0, beta } => KappaForm::InvSquareTime {
            kappa0: *kappa0,
            beta: *beta,
        },
        S::QuarticRidgeB { kappa0, beta } => KappaForm::QuarticRidgeB {
            kappa0: *kappa0,
            beta: *beta,
        },
        S::SimilarityB { beta1, beta2, f } => KappaForm::SimilarityB {
            beta1: *beta1,
            beta2: *beta2,
            f: profile_expr(f, "kappa profile")?,
        },
        S::PowFourThirds { kappa0, beta } => KappaForm::PowFourThirds {
            kappa0: *kappa0,
            beta: *beta,
        },
        S::QuarticRidgeC { kappa0, beta } => KappaForm::QuarticRidgeC {
            kappa0: *kappa0,
            beta: *beta,
        },
        S::SimilarityC { beta1, beta2, f } => KappaForm::SimilarityC {
            beta1: *beta1,
            beta2: *beta2,
            f: profile_expr(f, "kappa profile")?,
        },
        S::General { expr: e } => KappaForm::General(expr(e, "kappa")?),
    })
}

/// `w1122` -> `w_(4,2)`.
fn coord_of(key: &str) -> Result<JetCoord, CliError> {
    let digits = key
        .strip_prefix('w')
        .ok_or_else(|| CliError::Spec(format!("coefficient key {key:?} must start with 'w'")))?;
    if digits.len() > 4 || !digits.chars().all(|c| c == '1' || c == '2') {
        return Err(CliError::Spec(format!("coefficient key {key:?}: expected up to four digits 1/2")));
    }
    Ok(JetCoord::new(digits.len(), digits.chars().filter(|&c| c == '2').count()))
}

pub fn load(path: &Path, seed_override: Option<u64>) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Spec(format!("{}: {e}", path.display())))?;
    from_str(&text, seed_override)
}

pub fn from_str(text: &str, seed_override: Option<u64>) -> Result<Loaded, CliError> {
    let spec: SpecFile = toml::from_str(text).map_err(|e| CliError::Spec(e.to_string()))?;
    let domain = spec.domain.clone().unwrap_or_else(|| Domain::rect((0.5, 2.0), (0.5, 2.0)));
    if !(domain.x1.0 < domain.x1.1 && domain.x2.0 < domain.x2.1) {
        return Err(CliError::Spec("domain bounds must be increasing".into()));
    }
    let seed = seed_override.or(spec.equation.seed).unwrap_or(1);
    let samples = SampleSet::new(&domain, spec.verify.samples.max(1), seed);
    let model = match spec.equation.kind {
        Kind::Rod => {
            let r = spec.rod.as_ref().ok_or_else(|| CliError::Spec("kind = \"rod\" needs a [rod] section".into()))?;
            let eq = RodEquation::new(r.gamma, [r.chi11, r.chi12, r.chi22], kappa_form(&r.kappa)?)
                .map_err(|e| CliError::Spec(e.to_string()))?;
            eq.kappa_expr().map_err(|e| CliError::Spec(e.to_string()))?;
            Model::Rod(eq)
        }
        Kind::Plate => {
            let p = spec
                .plate
                .as_ref()
                .ok_or_else(|| CliError::Spec("kind = \"plate\" needs a [plate] section".into()))?;
            match p {
                PlateSection::Coefficients { a11, a12, a22, a0 } => Model::Plate {
                    eq: PlateEquation::new(
                        [expr(a11, "a11")?, expr(a12, "a12")?, expr(a22, "a22")?],
                        expr(a0, "a0")?,
                    ),
                    seed: None,
                    const_plate_kappa: None,
                },
                PlateSection::Physical { d, nu, n11, n12, n22, k } => {
                    let n = [expr(n11, "n11")?, expr(n12, "n12")?, expr(n22, "n22")?];
                    let eq = PlateEquation::from_physical(*d, *nu, &n, &expr(k, "k")?, &samples)
                        .map_err(|e| CliError::Spec(e.to_string()))?;
                    Model::Plate {
                        eq,
                        seed: None,
                        const_plate_kappa: None,
                    }
                }
                PlateSection::EOmega { omega } => {
                    let om = parse_complex(omega).map_err(|e| CliError::Spec(format!("omega: {e}")))?;
                    let seed = AnalyticSeed::new(om).map_err(|e| CliError::Spec(e.to_string()))?;
                    Model::Plate {
                        eq: plate::e_omega(&seed),
                        seed: Some(seed),
                        const_plate_kappa: None,
                    }
                }
                PlateSection::Constant { kappa } => {
                    if kappa.is_nan() || *kappa <= 0.0 {
                        return Err(CliError::Spec("constant plate kappa must be positive".into()));
                    }
                    let op = plate::const_plate_operator(*kappa);
                    let a2 = [op.slot(2, 0).clone(), op.slot(2, 1).clone(), op.slot(2, 2).clone()];
                    Model::Plate {
                        eq: PlateEquation::new(a2, op.slot(0, 0).clone()),
                        seed: None,
                        const_plate_kappa: Some(*kappa),
                    }
                }
            }
        }
        Kind::General => {
            let g = spec
                .general
                .as_ref()
                .ok_or_else(|| CliError::Spec("kind = \"general\" needs a [general] section".into()))?;
            let mut applied = BTreeMap::new();
            for (k, v) in &g.coefficients {
                let c = coord_of(k)?;
                applied.insert((c.k as usize, c.j as usize), expr(v, k)?);
            }
            if !(0..=4).any(|j| applied.contains_key(&(4, j))) {
                return Err(CliError::Spec("general operator needs a fourth-order term".into()));
            }
            Model::General(Operator4::from_applied(|k, j| {
                applied.get(&(k, j)).cloned().unwrap_or_else(ScalarExpr::zero)
            }))
        }
    };
    let solution = spec.verify.solution.as_deref().map(|s| expr(s, "verify.solution")).transpose()?;
    Ok(Loaded {
        name: spec.equation.name.clone().unwrap_or_else(|| model.kind().to_string()),
        model,
        samples,
        solution,
        tol: spec.verify.tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rod_spec() {
        let l = from_str(
            r#"
[equation]
kind = "rod"
[rod]
gamma = 1.0
chi22 = 1.0
kappa = { form = "inv_square_time", kappa0 = 1.0, beta = 0.5 }
"#,
            None,
        )
        .unwrap();
        assert!(matches!(l.model, Model::Rod(ref r) if matches!(r.kappa, KappaForm::InvSquareTime { .. })));
    }

    #[test]
    fn rejects_bad_specs() {
        let degenerate = "[equation]\nkind = \"rod\"\n[rod]\ngamma = 1.0\nchi11 = 1.0\n";
        assert!(matches!(from_str(degenerate, None), Err(CliError::Spec(_))));
        let missing = "[equation]\nkind = \"plate\"\n";
        assert!(matches!(from_str(missing, None), Err(CliError::Spec(_))));
        let bad_key = "[equation]\nkind = \"general\"\n[general]\ncoefficients = { w13 = \"1\" }\n";
        assert!(matches!(from_str(bad_key, None), Err(CliError::Spec(_))));
    }

    #[test]
    fn general_coefficients() {
        let l = from_str(
            "[equation]\nkind = \"general\"\n[general]\ncoefficients = { w1111 = \"1\", w1122 = \"2\", w2222 = \"1\" }\n",
            None,
        )
        .unwrap();
        let op = l.model.operator().unwrap();
        assert_eq!(op.applied(4, 2).as_constant(), Some(2.0));
    }

    #[test]
    fn profile_variable() {
        let e = profile_expr("sin(s) + s^2 + sqrt(s)", "f").unwrap();
        let v = e.eval([0.5, 9.0]);
        assert!((v - (0.5f64.sin() + 0.25 + 0.5f64.sqrt())).abs() < 1e-15);
    }
}
