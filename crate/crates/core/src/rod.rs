//! Rods: `gamma w_1111 + chi^ab w_ab + kappa(x) w = 0` with constant `gamma`
//! and `chi`.
//!
//! The catalogue of `kappa` shapes admitting extra symmetries, the
//! classification into table rows, the currents `B(1)..B(4)` built from the
//! variational symmetries, the currents attached to solutions, the laws of
//! the homogeneous beam and three group-invariant reductions.

use std::fmt;

use num_rational::Rational64;

use crate::expr::{ExprError, Point, ScalarExpr};
use crate::jet::{JetError, JetExpr};
use crate::operator::{CurrentPair, Operator4};
use crate::symmetry::{self, VectorField, STRUCTURAL_TOL};
use crate::taylor::Taylor2;
use crate::verify::{self, OdeError, ReducedOde, SampleSet, SampledSolution, VerifyError, VerifyReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RodError {
    #[error("gamma must be nonzero")]
    Gamma,
    #[error("chi12 and chi22 both vanish: the equation is an ODE in x1")]
    Degenerate,
    #[error("ridge direction (beta1, beta2) must be nonzero")]
    RidgeDirection,
    #[error("{0} is undefined for this equation")]
    RatioUndefined(&'static str),
    #[error("incompatible reduction: {0}")]
    Incompatible(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

impl From<VerifyError> for RodError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Expr(e) => RodError::Expr(e),
            VerifyError::Jet(e) => RodError::Jet(e),
        }
    }
}

/// Shapes of `kappa(x)`. Profiles `f` are expressions in `x1`, which plays
/// the role of their single argument.
#[derive(Clone, Debug)]
pub enum KappaForm {
    Zero,
    Constant(f64),
    /// `f(beta2 x1 - beta1 x2)`.
    Ridge { beta1: f64, beta2: f64, f: ScalarExpr },
    /// `kappa0 (beta + x2)^-2`.
    InvSquareTime { kappa0: f64, beta: f64 },
    /// `kappa0 (beta + x1 - (chi12/chi22) x2)^-4`.
    QuarticRidgeB { kappa0: f64, beta: f64 },
    /// `(beta2 + x2)^-2 f(y)`, `y = (beta2 + x2)^(-1/2) (beta1 + x1 - (chi12/chi22) x2)`.
    SimilarityB { beta1: f64, beta2: f64, f: ScalarExpr },
    /// `kappa0 (beta + x2)^(-4/3)`.
    PowFourThirds { kappa0: f64, beta: f64 },
    /// `kappa0 (beta + 2 x1 - (chi11/chi12) x2)^-4`.
    QuarticRidgeC { kappa0: f64, beta: f64 },
    /// `(beta2 + x2)^(-4/3) f(y)`, `y = (beta2 + x2)^(-1/3) (beta1 + 2 x1 - (chi11/chi12) x2)`.
    SimilarityC { beta1: f64, beta2: f64, f: ScalarExpr },
    General(ScalarExpr),
}

/// What a profile reduces to on a probe set away from the origin.
enum ProfileShape {
    Constant(f64),
    InverseQuartic(f64),
    Other,
}

const PROBES: [f64; 8] = [-2.3, -1.1, -0.45, -0.2, 0.35, 0.9, 1.7, 2.6];

fn constant_on_probes(vals: &[f64]) -> Option<f64> {
    let finite: Vec<f64> = vals.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.len() < 3 {
        return None;
    }
    let c = finite[0];
    finite
        .iter()
        .all(|v| (v - c).abs() <= 1e-12 * c.abs().max(1.0))
        .then_some(c)
}

fn profile_shape(f: &ScalarExpr) -> ProfileShape {
    let vals: Vec<f64> = PROBES.iter().map(|&t| f.eval([t, 0.0])).collect();
    if let Some(c) = constant_on_probes(&vals) {
        return ProfileShape::Constant(c);
    }
    let scaled: Vec<f64> = PROBES.iter().zip(&vals).map(|(t, v)| v * t.powi(4)).collect();
    match constant_on_probes(&scaled) {
        Some(c) => ProfileShape::InverseQuartic(c),
        None => ProfileShape::Other,
    }
}

impl KappaForm {
    pub fn tag(&self) -> &'static str {
        match self {
            KappaForm::Zero => "zero",
            KappaForm::Constant(_) => "constant",
            KappaForm::Ridge { .. } => "ridge",
            KappaForm::InvSquareTime { .. } => "inv_square_time",
            KappaForm::QuarticRidgeB { .. } => "quartic_ridge_b",
            KappaForm::SimilarityB { .. } => "similarity_b",
            KappaForm::PowFourThirds { .. } => "pow_four_thirds",
            KappaForm::QuarticRidgeC { .. } => "quartic_ridge_c",
            KappaForm::SimilarityC { .. } => "similarity_c",
            KappaForm::General(_) => "general",
        }
    }

    /// Collapses special profiles onto the narrower forms they coincide with.
    pub fn normalize(&self) -> KappaForm {
        use KappaForm::*;
        let zero_or = |k0: f64, form: KappaForm| if k0 == 0.0 { Zero } else { form };
        match self {
            Constant(c) => zero_or(*c, Constant(*c)),
            Ridge { f, .. } => match profile_shape(f) {
                ProfileShape::Constant(c) => zero_or(c, Constant(c)),
                _ => self.clone(),
            },
            InvSquareTime { kappa0, .. }
            | QuarticRidgeB { kappa0, .. }
            | PowFourThirds { kappa0, .. }
            | QuarticRidgeC { kappa0, .. } => zero_or(*kappa0, self.clone()),
            SimilarityB { beta1, beta2, f } => match profile_shape(f) {
                ProfileShape::Constant(c) => zero_or(c, InvSquareTime { kappa0: c, beta: *beta2 }),
                ProfileShape::InverseQuartic(c) => zero_or(c, QuarticRidgeB { kappa0: c, beta: *beta1 }),
                ProfileShape::Other => self.clone(),
            },
            SimilarityC { beta1, beta2, f } => match profile_shape(f) {
                ProfileShape::Constant(c) => zero_or(c, PowFourThirds { kappa0: c, beta: *beta2 }),
                ProfileShape::InverseQuartic(c) => zero_or(c, QuarticRidgeC { kappa0: c, beta: *beta1 }),
                ProfileShape::Other => self.clone(),
            },
            Zero | General(_) => self.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subclass {
    /// `chi22 != 0`, `det chi != 0`.
    A,
    /// `chi22 != 0`, `det chi = 0`.
    B,
    /// `chi22 = 0` (hence `chi12 != 0`).
    C,
}

impl fmt::Display for Subclass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Subclass::A => "A",
            Subclass::B => "B",
            Subclass::C => "C",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct RodEquation {
    pub gamma: f64,
    pub chi11: f64,
    pub chi12: f64,
    pub chi22: f64,
    pub kappa: KappaForm,
}

fn lin(c: f64, a1: f64, a2: f64) -> ScalarExpr {
    ScalarExpr::add_all(vec![
        ScalarExpr::constant(c),
        ScalarExpr::x1() * a1,
        ScalarExpr::x2() * a2,
    ])
}

impl RodEquation {
    pub fn new(gamma: f64, chi: [f64; 3], kappa: KappaForm) -> Result<Self, RodError> {
        if gamma == 0.0 {
            return Err(RodError::Gamma);
        }
        if chi[1] == 0.0 && chi[2] == 0.0 {
            return Err(RodError::Degenerate);
        }
        if let KappaForm::Ridge { beta1, beta2, .. } = kappa {
            if beta1 == 0.0 && beta2 == 0.0 {
                return Err(RodError::RidgeDirection);
            }
        }
        Ok(RodEquation {
            gamma,
            chi11: chi[0],
            chi12: chi[1],
            chi22: chi[2],
            kappa,
        })
    }

    /// Homogeneous beam `EJ w_1111 + m w_22 = 0`.
    pub fn beam(ej: f64, m: f64) -> Self {
        RodEquation {
            gamma: ej,
            chi11: 0.0,
            chi12: 0.0,
            chi22: m,
            kappa: KappaForm::Zero,
        }
    }

    /// Beam of rigidity `k` and mass `m` on a foundation `kappa` under a
    /// follower force `p`.
    pub fn follower_beam(k: f64, p: f64, m: f64, kappa: KappaForm) -> Self {
        RodEquation {
            gamma: k,
            chi11: p,
            chi12: 0.0,
            chi22: m,
            kappa,
        }
    }

    /// Pipe of rigidity `ej` and mass `m` conveying fluid of mass `fluid`
    /// at speed `u`.
    pub fn pipe(ej: f64, m: f64, fluid: f64, u: f64) -> Self {
        RodEquation {
            gamma: ej,
            chi11: fluid * u * u,
            chi12: fluid * u,
            chi22: m + fluid,
            kappa: KappaForm::Zero,
        }
    }

    pub fn det(&self) -> f64 {
        self.chi11 * self.chi22 - self.chi12 * self.chi12
    }

    fn det_vanishes(&self) -> bool {
        let scale = (self.chi11 * self.chi22).abs().max(self.chi12 * self.chi12);
        self.det().abs() <= 1e-12 * scale
    }

    fn chi22_vanishes(&self) -> bool {
        let scale = self.chi11.abs().max(self.chi12.abs()).max(self.chi22.abs());
        self.chi22.abs() <= 1e-14 * scale
    }

    pub fn subclass(&self) -> Subclass {
        if self.chi22_vanishes() {
            Subclass::C
        } else if self.det_vanishes() {
            Subclass::B
        } else {
            Subclass::A
        }
    }

    /// `chi12 / chi22`.
    pub fn q(&self) -> Result<f64, RodError> {
        if self.chi22_vanishes() {
            Err(RodError::RatioUndefined("chi12/chi22"))
        } else {
            Ok(self.chi12 / self.chi22)
        }
    }

    /// `chi11 / chi12`.
    pub fn r(&self) -> Result<f64, RodError> {
        if self.chi12 == 0.0 {
            Err(RodError::RatioUndefined("chi11/chi12"))
        } else {
            Ok(self.chi11 / self.chi12)
        }
    }

    pub fn chi(&self, a: usize, b: usize) -> f64 {
        match (a, b) {
            (0, 0) => self.chi11,
            (1, 1) => self.chi22,
            _ => self.chi12,
        }
    }

    pub fn kappa_expr(&self) -> Result<ScalarExpr, RodError> {
        use KappaForm::*;
        let t = |beta: f64| lin(beta, 0.0, 1.0);
        Ok(match &self.kappa {
            Zero => ScalarExpr::zero(),
            Constant(c) => ScalarExpr::constant(*c),
            Ridge { beta1, beta2, f } => f.compose(&[lin(0.0, *beta2, -beta1), ScalarExpr::zero()]),
            InvSquareTime { kappa0, beta } => t(*beta).powi(-2) * *kappa0,
            QuarticRidgeB { kappa0, beta } => lin(*beta, 1.0, -self.q()?).powi(-4) * *kappa0,
            SimilarityB { beta1, beta2, f } => {
                let tt = t(*beta2);
                let y = &tt.powr(Rational64::new(-1, 2)) * &lin(*beta1, 1.0, -self.q()?);
                &tt.powi(-2) * &f.compose(&[y, ScalarExpr::zero()])
            }
            PowFourThirds { kappa0, beta } => t(*beta).powr(Rational64::new(-4, 3)) * *kappa0,
            QuarticRidgeC { kappa0, beta } => lin(*beta, 2.0, -self.r()?).powi(-4) * *kappa0,
            SimilarityC { beta1, beta2, f } => {
                let tt = t(*beta2);
                let y = &tt.powr(Rational64::new(-1, 3)) * &lin(*beta1, 2.0, -self.r()?);
                &tt.powr(Rational64::new(-4, 3)) * &f.compose(&[y, ScalarExpr::zero()])
            }
            General(k) => k.clone(),
        })
    }

    pub fn operator(&self) -> Result<Operator4, RodError> {
        let kappa = self.kappa_expr()?;
        let (g, c11, c12, c22) = (self.gamma, self.chi11, self.chi12, self.chi22);
        Ok(Operator4::from_applied(|k, j| match (k, j) {
            (4, 0) => ScalarExpr::constant(g),
            (2, 0) => ScalarExpr::constant(c11),
            (2, 1) => ScalarExpr::constant(2.0 * c12),
            (2, 2) => ScalarExpr::constant(c22),
            (0, 0) => kappa.clone(),
            _ => ScalarExpr::zero(),
        }))
    }
}

/// Nonuniform beam `B w_1111 + 2 B' w_111 + B'' w_11 + H w_22 = 0` with
/// `B`, `H` functions of `x1`.
pub fn nonuniform_beam_operator(b: &ScalarExpr, h: &ScalarExpr) -> Operator4 {
    let (b1, b2) = (b.diff(0), b.diff_n(2, 0));
    Operator4::from_applied(|k, j| match (k, j) {
        (4, 0) => b.clone(),
        (3, 0) => &b1 * 2.0,
        (2, 0) => b2.clone(),
        (2, 2) => h.clone(),
        _ => ScalarExpr::zero(),
    })
}

#[derive(Clone, Debug)]
pub struct Builtins {
    pub y1: VectorField,
    pub y2: VectorField,
    pub y3: Option<VectorField>,
    pub y4: Option<VectorField>,
}

/// Field `c1 Y1 + c2 Y2 + c3 Y3 + c4 Y4` (all with `sigma = 0`).
fn combo_field(eq: &RodEquation, c: [f64; 4]) -> Result<VectorField, RodError> {
    let q = if c[2] != 0.0 { eq.q()? } else { 0.0 };
    let r = if c[3] != 0.0 { eq.r()? } else { 0.0 };
    Ok(VectorField::new(
        lin(c[0], c[2] + c[3], c[2] * q + c[3] * r),
        lin(c[1], 0.0, 2.0 * c[2] + 3.0 * c[3]),
        ScalarExpr::zero(),
    ))
}

pub fn builtin_generators(eq: &RodEquation) -> Builtins {
    Builtins {
        y1: VectorField::translation(0),
        y2: VectorField::translation(1),
        y3: eq.q().ok().map(|_| combo_field(eq, [0.0, 0.0, 1.0, 0.0]).expect("q defined")),
        y4: eq.r().ok().map(|_| combo_field(eq, [0.0, 0.0, 0.0, 1.0]).expect("r defined")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VariationalTag {
    AsIs,
    /// Variational after adding the given multiple of `X0`.
    PlusX0(f64),
}

impl fmt::Display for VariationalTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VariationalTag::AsIs => f.write_str("variational"),
            VariationalTag::PlusX0(c) => write!(f, "variational after adding {c} X0"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RodGenerator {
    /// Symbolic combination as tabulated.
    pub label: String,
    /// Coefficients on `Y1..Y4`.
    pub combo: [f64; 4],
    pub field: VectorField,
    pub variational: VariationalTag,
}

impl RodGenerator {
    fn new(eq: &RodEquation, label: impl Into<String>, combo: [f64; 4]) -> Result<Self, RodError> {
        // sigma + div xi + lambda = 2 sigma + xi2_2 - 3 xi1_1 = -c3 for sigma = 0
        let variational = if combo[2] == 0.0 {
            VariationalTag::AsIs
        } else {
            VariationalTag::PlusX0(combo[2] / 2.0)
        };
        Ok(RodGenerator {
            label: label.into(),
            combo,
            field: combo_field(eq, combo)?,
            variational,
        })
    }

    /// The generator with the `X0` correction applied.
    pub fn variational_field(&self) -> VectorField {
        match self.variational {
            VariationalTag::AsIs => self.field.clone(),
            VariationalTag::PlusX0(c) => self.field.plus(&VectorField::x0().scaled(c)),
        }
    }

    pub fn combo_string(&self) -> String {
        let parts: Vec<String> = self
            .combo
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| format!("{c} Y{}", i + 1))
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassificationResult {
    pub subclass: Subclass,
    /// Table row, `None` when only the kernel symmetries are known.
    pub row: Option<u8>,
    pub kappa: KappaForm,
    pub generators: Vec<RodGenerator>,
    pub notes: Vec<String>,
}

/// `lambda = sigma - 4 xi^1_{,1}` for rod operators.
pub fn rod_lambda(x: &VectorField) -> ScalarExpr {
    &x.sigma - &(x.xi1.diff(0) * 4.0)
}

pub fn classify(eq: &RodEquation) -> Result<ClassificationResult, RodError> {
    use KappaForm::*;
    let kappa = eq.kappa.normalize();
    let eq = RodEquation {
        kappa: kappa.clone(),
        ..eq.clone()
    };
    let sub = eq.subclass();
    let mut notes = Vec::new();
    let g = |label: &str, c: [f64; 4]| RodGenerator::new(&eq, label, c);
    let (row, generators): (Option<u8>, Vec<RodGenerator>) = match (&kappa, sub) {
        (Zero, Subclass::A) => (Some(8), vec![g("Y1", [1.0, 0.0, 0.0, 0.0])?, g("Y2", [0.0, 1.0, 0.0, 0.0])?]),
        (Constant(_), Subclass::A) => (Some(8), vec![g("Y1", [1.0, 0.0, 0.0, 0.0])?, g("Y2", [0.0, 1.0, 0.0, 0.0])?]),
        (Constant(_), _) => (Some(9), vec![g("Y1", [1.0, 0.0, 0.0, 0.0])?, g("Y2", [0.0, 1.0, 0.0, 0.0])?]),
        (Zero, Subclass::B) => (
            Some(10),
            vec![
                g("Y1", [1.0, 0.0, 0.0, 0.0])?,
                g("Y2", [0.0, 1.0, 0.0, 0.0])?,
                g("Y3", [0.0, 0.0, 1.0, 0.0])?,
            ],
        ),
        (Zero, Subclass::C) => (
            Some(11),
            vec![
                g("Y1", [1.0, 0.0, 0.0, 0.0])?,
                g("Y2", [0.0, 1.0, 0.0, 0.0])?,
                g("Y4", [0.0, 0.0, 0.0, 1.0])?,
            ],
        ),
        (Ridge { beta1, beta2, .. }, _) => (Some(1), vec![g("b1 Y1 + b2 Y2", [*beta1, *beta2, 0.0, 0.0])?]),
        (InvSquareTime { beta, .. }, Subclass::B) => (
            Some(4),
            vec![g("Y1", [1.0, 0.0, 0.0, 0.0])?, g("2 b Y2 + Y3", [0.0, 2.0 * beta, 1.0, 0.0])?],
        ),
        (QuarticRidgeB { beta, .. }, Subclass::B) => {
            let q = eq.q()?;
            (
                Some(6),
                vec![
                    g("b Y1 + Y3", [*beta, 0.0, 1.0, 0.0])?,
                    g("(chi12/chi22) Y1 + Y2", [q, 1.0, 0.0, 0.0])?,
                ],
            )
        }
        (SimilarityB { beta1, beta2, .. }, Subclass::B) => {
            let q = eq.q()?;
            (
                Some(2),
                vec![g(
                    "(b1 + 2 (chi12/chi22) b2) Y1 + 2 b2 Y2 + Y3",
                    [beta1 + 2.0 * q * beta2, 2.0 * beta2, 1.0, 0.0],
                )?],
            )
        }
        (PowFourThirds { beta, .. }, Subclass::C) => (
            Some(5),
            vec![g("Y1", [1.0, 0.0, 0.0, 0.0])?, g("3 b Y2 + Y4", [0.0, 3.0 * beta, 0.0, 1.0])?],
        ),
        (QuarticRidgeC { beta, .. }, Subclass::C) => {
            let r = eq.r()?;
            (
                Some(7),
                vec![
                    g("b Y1 + 2 Y4", [*beta, 0.0, 0.0, 2.0])?,
                    g("(chi11/chi12) Y1 + 2 Y2", [r, 2.0, 0.0, 0.0])?,
                ],
            )
        }
        (SimilarityC { beta1, beta2, .. }, Subclass::C) => {
            let r = eq.r()?;
            (
                Some(3),
                vec![g(
                    "(b1 + 3 (chi11/chi12) b2) Y1 + 6 b2 Y2 + 2 Y4",
                    [beta1 + 3.0 * r * beta2, 6.0 * beta2, 0.0, 2.0],
                )?],
            )
        }
        // the remaining special forms are ridges outside their own subclass
        (InvSquareTime { .. } | PowFourThirds { .. }, _) => {
            notes.push(format!("{} depends on x2 only: a ridge with direction (1, 0)", kappa.tag()));
            (Some(1), vec![g("Y1", [1.0, 0.0, 0.0, 0.0])?])
        }
        (QuarticRidgeB { .. }, _) => {
            let q = eq.q()?;
            notes.push("quartic_ridge_b outside subclass B: a ridge in x1 - (chi12/chi22) x2".into());
            (Some(1), vec![g("(chi12/chi22) Y1 + Y2", [q, 1.0, 0.0, 0.0])?])
        }
        (QuarticRidgeC { .. }, _) => {
            let r = eq.r()?;
            notes.push("quartic_ridge_c outside subclass C: a ridge in 2 x1 - (chi11/chi12) x2".into());
            (Some(1), vec![g("(chi11/chi12) Y1 + 2 Y2", [r, 2.0, 0.0, 0.0])?])
        }
        (SimilarityB { .. } | SimilarityC { .. }, _) => {
            eq.kappa_expr()?;
            notes.push(format!("{} outside its subclass: kernel symmetries only", kappa.tag()));
            (None, Vec::new())
        }
        (General(_), _) => {
            notes.push(
                "kernel-only symmetries (X0 and solution symmetries); supply a structured kappa form or verify a candidate field explicitly"
                    .into(),
            );
            (None, Vec::new())
        }
    };
    Ok(ClassificationResult {
        subclass: sub,
        row,
        kappa,
        generators,
        notes,
    })
}

/// Currents `B(1)..B(4)`; `B(3)` needs `chi22 != 0` and `B(4)` needs
/// `chi12 != 0`.
#[derive(Clone, Debug)]
pub struct BCurrents {
    pub b1: CurrentPair,
    pub b2: CurrentPair,
    pub b3: Option<CurrentPair>,
    pub b4: Option<CurrentPair>,
}

impl BCurrents {
    /// `sum c_i B(i)`.
    pub fn combine(&self, c: [f64; 4]) -> Result<CurrentPair, RodError> {
        let mut out = self.b1.scale(&ScalarExpr::constant(c[0]));
        out = out.add(&self.b2.scale(&ScalarExpr::constant(c[1])));
        if c[2] != 0.0 {
            let b3 = self.b3.as_ref().ok_or(RodError::RatioUndefined("chi12/chi22"))?;
            out = out.add(&b3.scale(&ScalarExpr::constant(c[2])));
        }
        if c[3] != 0.0 {
            let b4 = self.b4.as_ref().ok_or(RodError::RatioUndefined("chi11/chi12"))?;
            out = out.add(&b4.scale(&ScalarExpr::constant(c[3])));
        }
        Ok(out)
    }
}

fn coord(k: usize, j: usize) -> JetExpr {
    JetExpr::coord(k, j)
}

pub fn conserved_currents_catalog(eq: &RodEquation) -> Result<BCurrents, RodError> {
    let g = eq.gamma;
    let kappa = eq.kappa_expr()?;
    let w = JetExpr::w();
    let (w1, w2, w11, w12, w111) = (coord(1, 0), coord(1, 1), coord(2, 0), coord(2, 1), coord(3, 0));
    // chi^{a mu} w_mu
    let chi_w = |a: usize| JetExpr::sum([w1.scale_f(eq.chi(a, 0)), w2.scale_f(eq.chi(a, 1))]);
    let half = |e: JetExpr| e.scale_f(0.5);
    let kw2 = w.mul(&w).scale(&kappa);

    let inner2 = w.mul(&chi_w(1));
    let b1_1 = JetExpr::sum([
        JetExpr::sum([
            w1.mul(&w111).scale_f(2.0 * g),
            w11.mul(&w11).scale_f(-g),
            w1.mul(&w1).scale_f(eq.chi11),
            w2.mul(&w2).scale_f(-eq.chi22),
            kw2.clone(),
        ])
        .scale_f(-0.5),
        half(inner2.total_derivative(1)?).scale_f(-1.0),
    ]);
    let b1_2 = JetExpr::sum([w1.mul(&chi_w(1)).scale_f(-1.0), half(inner2.total_derivative(0)?)]);

    let inner1 = JetExpr::sum([w1.mul(&w11).scale_f(g), w.mul(&chi_w(0)).scale_f(-1.0)]);
    let b2_1 = JetExpr::sum([
        w2.mul(&chi_w(0)).scale_f(-1.0),
        JetExpr::sum([w11.mul(&w12), w2.mul(&w111).scale_f(-1.0)]).scale_f(g),
        half(inner1.total_derivative(1)?).scale_f(-1.0),
    ]);
    let b2_2 = JetExpr::sum([
        JetExpr::sum([
            w11.mul(&w11).scale_f(g),
            w2.mul(&w2).scale_f(eq.chi22),
            w1.mul(&w1).scale_f(-eq.chi11),
            kw2,
        ])
        .scale_f(-0.5),
        half(inner1.total_derivative(0)?),
    ]);
    let b1 = CurrentPair::new(b1_1, b1_2);
    let b2 = CurrentPair::new(b2_1, b2_2);

    let x2 = ScalarExpr::x2();
    let b3 = eq.q().ok().map(|q| {
        let lead = lin(0.0, 1.0, q);
        let extra1 = JetExpr::sum([
            w.mul(&chi_w(0)),
            JetExpr::sum([w.mul(&w111), w1.mul(&w11).scale_f(-1.0)]).scale_f(0.5 * g),
        ]);
        let extra2 = w.mul(&chi_w(1));
        CurrentPair::new(
            JetExpr::sum([b1.p[0].scale(&lead), b2.p[0].scale(&(&x2 * 2.0)), extra1]),
            JetExpr::sum([b1.p[1].scale(&lead), b2.p[1].scale(&(&x2 * 2.0)), extra2]),
        )
    });
    let b4 = eq.r().ok().map(|r| {
        let lead = lin(0.0, 1.0, r);
        let extra1 = JetExpr::sum([
            w.mul(&chi_w(0)),
            w.mul(&w1).scale_f(eq.chi11),
            w.mul(&w2).scale_f(2.0 * eq.chi12),
            w1.mul(&w11).scale_f(-g),
        ])
        .scale_f(0.5);
        let extra2 = w.mul(&chi_w(1)).scale_f(0.5);
        CurrentPair::new(
            JetExpr::sum([b1.p[0].scale(&lead), b2.p[0].scale(&(&x2 * 3.0)), extra1]),
            JetExpr::sum([b1.p[1].scale(&lead), b2.p[1].scale(&(&x2 * 3.0)), extra2]),
        )
    });
    Ok(BCurrents { b1, b2, b3, b4 })
}

/// Conservation law of one classified generator: the current and the
/// characteristic `Q` with `D_a P^a = Q D[w]`.
#[derive(Clone, Debug)]
pub struct RodLaw {
    pub generator: RodGenerator,
    pub current: CurrentPair,
    pub characteristic: JetExpr,
}

/// The laws of the classified equation, one per generator, in table order.
pub fn rod_conservation_laws(eq: &RodEquation) -> Result<Vec<RodLaw>, RodError> {
    let cls = classify(eq)?;
    let eq = RodEquation {
        kappa: cls.kappa.clone(),
        ..eq.clone()
    };
    let cat = conserved_currents_catalog(&eq)?;
    cls.generators
        .into_iter()
        .map(|generator| {
            Ok(RodLaw {
                current: cat.combine(generator.combo)?,
                characteristic: generator.variational_field().characteristic(),
                generator,
            })
        })
        .collect()
}

/// Current attached to a solution `u`; its divergence is `u D[w] - w D[u]`.
pub fn p_u_current(eq: &RodEquation, u: &ScalarExpr) -> CurrentPair {
    let w = JetExpr::w();
    let g = eq.gamma;
    let du = |a: usize, b: usize| u.diff_n(a, b);
    let chi_part = |a: usize| {
        JetExpr::sum([
            coord(1, 0).scale(&(u * eq.chi(a, 0))),
            coord(1, 1).scale(&(u * eq.chi(a, 1))),
            w.scale(&-&(&(du(1, 0) * eq.chi(a, 0)) + &(du(0, 1) * eq.chi(a, 1)))),
        ])
    };
    let beam = JetExpr::sum([
        coord(3, 0).scale(u),
        coord(1, 0).scale(&du(2, 0)),
        w.scale(&-&du(3, 0)),
        coord(2, 0).scale(&-&du(1, 0)),
    ])
    .scale_f(g);
    CurrentPair::new(chi_part(0).add(&beam), chi_part(1))
}

/// Density, flux and characteristic of a beam law: `D_2 psi + D_1 flux = q D[w]`.
#[derive(Clone, Debug)]
pub struct BeamLaw {
    pub name: &'static str,
    pub generator_label: &'static str,
    pub generator: VectorField,
    pub psi: JetExpr,
    pub flux: JetExpr,
    pub q: JetExpr,
}

impl BeamLaw {
    /// `(P^1, P^2) = (flux, density)`.
    pub fn current(&self) -> CurrentPair {
        CurrentPair::new(self.flux.clone(), self.psi.clone())
    }
}

/// The six laws of `EJ w_1111 + m w_22 = 0`. For translations and the
/// scaling the density and flux are `(-B^2, -B^1)` up to a null divergence,
/// so `q` is minus the characteristic; solution symmetries carry `(P^2, P^1)`
/// of [`p_u_current`] with `q = u`.
pub fn beam_conservation_laws(ej: f64, m: f64) -> Vec<BeamLaw> {
    let w = JetExpr::w();
    let (w1, w2, w11, w12, w111) = (coord(1, 0), coord(1, 1), coord(2, 0), coord(2, 1), coord(3, 0));
    let x1 = ScalarExpr::x1();
    let x2 = ScalarExpr::x2();
    let psi1 = w1.mul(&w2).scale_f(m);
    let p1 = JetExpr::sum([
        w1.mul(&w111).scale_f(ej),
        w11.mul(&w11).scale_f(-0.5 * ej),
        w2.mul(&w2).scale_f(-0.5 * m),
    ]);
    let psi2 = JetExpr::sum([w11.mul(&w11).scale_f(0.5 * ej), w2.mul(&w2).scale_f(0.5 * m)]);
    let p2 = JetExpr::sum([w2.mul(&w111), w11.mul(&w12).scale_f(-1.0)]).scale_f(ej);
    let psi3 = JetExpr::sum([psi1.scale(&x1), psi2.scale(&(&x2 * 2.0)), w.mul(&w2).scale_f(-0.5 * m)]);
    let p3 = JetExpr::sum([
        p1.scale(&x1),
        p2.scale(&(&x2 * 2.0)),
        JetExpr::sum([w.mul(&w111), w1.mul(&w11)]).scale_f(-0.5 * ej),
    ]);
    let beam = RodEquation::beam(ej, m);
    let sol = |u: ScalarExpr| p_u_current(&beam, &u);
    let p5 = sol(ScalarExpr::one());
    let p6 = sol(x1.clone());
    let p7 = sol(x2.clone());
    let y3 = VectorField::new(x1.clone(), &x2 * 2.0, ScalarExpr::ratio(1, 2));
    vec![
        BeamLaw {
            name: "wave momentum",
            generator_label: "Y1",
            generator: VectorField::translation(0),
            psi: psi1,
            flux: p1,
            q: w1.clone(),
        },
        BeamLaw {
            name: "energy",
            generator_label: "Y2",
            generator: VectorField::translation(1),
            psi: psi2,
            flux: p2,
            q: w2.clone(),
        },
        BeamLaw {
            name: "scaling",
            generator_label: "Y3 + X0/2",
            q: y3.characteristic().scale_f(-1.0),
            generator: y3,
            psi: psi3,
            flux: p3,
        },
        BeamLaw {
            name: "linear momentum",
            generator_label: "Y5 = d/dw",
            generator: VectorField::solution(ScalarExpr::one()),
            psi: p5.p[1].clone(),
            flux: p5.p[0].clone(),
            q: JetExpr::constant(ScalarExpr::one()),
        },
        BeamLaw {
            name: "Eshelby-like",
            generator_label: "Y6 = x1 d/dw",
            generator: VectorField::solution(x1.clone()),
            psi: p6.p[1].clone(),
            flux: p6.p[0].clone(),
            q: JetExpr::constant(x1),
        },
        BeamLaw {
            name: "center of mass",
            generator_label: "Y7 = x2 d/dw",
            generator: VectorField::solution(x2.clone()),
            psi: p7.p[1].clone(),
            flux: p7.p[0].clone(),
            q: JetExpr::constant(x2),
        },
    ]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReductionKind {
    /// Invariants of `c Y1 -/+ Y2`: `s = x1 +/- c x2`; `sign` is `+1` or `-1`.
    TravellingWave { c: f64, sign: f64 },
    Y3,
    Y4,
}

#[derive(Clone, Debug)]
pub struct RodReduction {
    pub kind: ReductionKind,
    pub ode: ReducedOde,
    /// Profile `f(s)` of `kappa` along the reduction.
    pub profile: ScalarExpr,
    /// The `chi` cross term vanishes and the solutions are self-similar.
    pub self_similar: bool,
}

fn shape_check(kappa: &ScalarExpr, weight: &ScalarExpr, f: &ScalarExpr, s: &ScalarExpr, samples: &SampleSet) -> Result<(), RodError> {
    let lhs = weight * kappa;
    let rhs = f.compose(&[s.clone(), ScalarExpr::zero()]);
    for &p in &samples.points {
        let (a, b) = (lhs.eval(p), rhs.eval(p));
        if !(a - b).is_finite() || (a - b).abs() > 1e-9 * a.abs().max(b.abs()).max(1.0) {
            return Err(RodError::Incompatible(format!(
                "kappa does not have the required shape at {p:?} ({a} vs {b})"
            )));
        }
    }
    Ok(())
}

/// Reduced equation for group-invariant solutions `w = U(s)`. The shape of
/// `kappa` is checked on `samples`.
pub fn reduce(eq: &RodEquation, kind: ReductionKind, samples: &SampleSet) -> Result<RodReduction, RodError> {
    let kappa = eq.kappa_expr()?;
    let g = eq.gamma;
    let s_var = ScalarExpr::x1();
    let zero = ScalarExpr::zero();
    let c = ScalarExpr::constant;
    let half = Rational64::new(1, 2);
    let third = Rational64::new(1, 3);
    let x1 = ScalarExpr::x1();
    let x2 = ScalarExpr::x2();
    let (similarity, profile, coeffs, label, self_similar) = match kind {
        ReductionKind::TravellingWave { c: speed, sign } => {
            if sign.abs() != 1.0 {
                return Err(RodError::Incompatible("sign must be +1 or -1".into()));
            }
            let s = lin(0.0, 1.0, sign * speed);
            let f = kappa.compose(&[s_var.clone(), zero.clone()]);
            shape_check(&kappa, &ScalarExpr::one(), &f, &s, samples)?;
            let mid = eq.chi11 + 2.0 * sign * speed * eq.chi12 + speed * speed * eq.chi22;
            (
                s,
                f.clone(),
                [f, zero.clone(), c(mid), zero.clone(), c(g)],
                format!("travelling wave s = x1 + ({}) x2", sign * speed),
                false,
            )
        }
        ReductionKind::Y3 => {
            if eq.subclass() != Subclass::B {
                return Err(RodError::Incompatible("Y3 reduction needs chi22 != 0 and det chi = 0".into()));
            }
            let q = eq.q()?;
            let s = &(&x1 * &x2.powr(-half)) - &(x2.powr(half) * q);
            let f = kappa.compose(&[lin(q, 1.0, 0.0), ScalarExpr::one()]);
            shape_check(&kappa, &x2.powi(2), &f, &s, samples)?;
            (
                s,
                f.clone(),
                [
                    &f * 4.0,
                    &s_var * (3.0 * eq.chi22),
                    s_var.powi(2) * eq.chi22,
                    zero.clone(),
                    c(4.0 * g),
                ],
                "Y3-invariant s = x1 x2^(-1/2) - (chi12/chi22) x2^(1/2)".into(),
                eq.chi12 == 0.0,
            )
        }
        ReductionKind::Y4 => {
            if eq.subclass() != Subclass::C {
                return Err(RodError::Incompatible("Y4 reduction needs chi22 = 0".into()));
            }
            let r = eq.r()?;
            let s = &(&(&x1 * 2.0) * &x2.powr(-third)) - &(x2.powr(third * 2) * r);
            let f = kappa.compose(&[lin(r / 2.0, 0.5, 0.0), ScalarExpr::one()]);
            shape_check(&kappa, &x2.powr(third * 4), &f, &s, samples)?;
            (
                s,
                f.clone(),
                [
                    &f * 3.0,
                    c(-4.0 * eq.chi12),
                    &s_var * (-4.0 * eq.chi12),
                    zero.clone(),
                    c(48.0 * g),
                ],
                "Y4-invariant s = 2 x1 x2^(-1/3) - (chi11/chi12) x2^(2/3)".into(),
                eq.chi11 == 0.0,
            )
        }
    };
    Ok(RodReduction {
        kind,
        ode: ReducedOde {
            coeffs,
            similarity,
            multiplier: ScalarExpr::one(),
            label,
        },
        profile,
        self_similar,
    })
}

/// Smallest interval containing `s(x)` over the samples.
pub fn similarity_range(ode: &ReducedOde, samples: &SampleSet) -> (f64, f64) {
    samples.points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| {
        let s = ode.similarity.eval(p);
        (lo.min(s), hi.max(s))
    })
}

pub enum Profile<'a> {
    Closed(&'a ScalarExpr),
    Sampled(&'a SampledSolution),
}

/// Lifts `U` to `w = M U(s(x))` and evaluates the PDE residual on the
/// samples. Sampled profiles are composed through truncated Taylor series.
pub fn lift_and_verify(
    op: &Operator4,
    ode: &ReducedOde,
    profile: Profile<'_>,
    samples: &SampleSet,
    tol: f64,
) -> Result<VerifyReport, RodError> {
    match profile {
        Profile::Closed(u) => Ok(verify::residual_on_solution(op, &ode.lift(u), samples, tol)?),
        Profile::Sampled(sol) => {
            let d = op.apply();
            let mut items: Vec<(Point, f64)> = Vec::with_capacity(samples.len());
            for &p in &samples.points {
                let s = Taylor2::of_expr(&ode.similarity, p, 4);
                let u = sol.eval(s.value())?;
                let w = Taylor2::of_expr(&ode.multiplier, p, 4).mul(&s.compose(&u));
                items.push((p, d.eval(&w.to_jet(p))));
            }
            Ok(VerifyReport::from_points(items, tol))
        }
    }
}

/// Symmetries of the rod operator inside the span of the available `Y`s.
pub fn span_symmetry_count(eq: &RodEquation, samples: &SampleSet) -> Result<usize, RodError> {
    let b = builtin_generators(eq);
    let mut basis = vec![b.y1, b.y2];
    basis.extend(b.y3);
    basis.extend(b.y4);
    Ok(symmetry::symmetries_in_span(&eq.operator()?, &basis, samples, rod_lambda).len())
}

/// Determining-system check for every classified generator.
pub fn verify_generators(eq: &RodEquation, cls: &ClassificationResult, samples: &SampleSet) -> Result<Vec<symmetry::SymmetryReport>, RodError> {
    let eq = RodEquation {
        kappa: cls.kappa.clone(),
        ..eq.clone()
    };
    let op = eq.operator()?;
    Ok(cls
        .generators
        .iter()
        .map(|g| symmetry::determining_residuals(&op, &g.field, &rod_lambda(&g.field), samples, STRUCTURAL_TOL))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_scalar;
    use crate::symmetry::{determining_residuals, infer_lambda, is_variational};
    use crate::verify::{jet_identity, Domain, OdeOptions};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn samples() -> SampleSet {
        SampleSet::new(&Domain::rect((0.5, 2.0), (0.5, 2.0)), 40, 11)
    }

    fn p(s: &str) -> ScalarExpr {
        parse_scalar(s).unwrap()
    }

    #[test]
    fn builtins() {
        let b = builtin_generators(&RodEquation::beam(1.0, 1.0));
        assert_eq!(b.y3.as_ref().unwrap().xi1.eval([0.7, 0.3]), 0.7);
        assert_eq!(b.y3.unwrap().xi2.eval([0.7, 0.3]), 0.6);
        assert!(b.y4.is_none());
        let pipe = RodEquation::pipe(1.0, 2.0, 1.5, 0.5);
        let y3 = builtin_generators(&pipe).y3.unwrap();
        // chi12/chi22 = M U / (m + M)
        assert!((y3.xi1.eval([0.0, 1.0]) - 0.75 / 3.5).abs() < 1e-15);
        let c = RodEquation::new(1.0, [2.0, 1.0, 0.0], KappaForm::Zero).unwrap();
        let b = builtin_generators(&c);
        assert!(b.y3.is_none() && b.y4.is_some());
    }

    #[test]
    fn constructor_invariants() {
        assert_eq!(RodEquation::new(0.0, [1.0, 0.0, 1.0], KappaForm::Zero).unwrap_err(), RodError::Gamma);
        assert_eq!(RodEquation::new(1.0, [1.0, 0.0, 0.0], KappaForm::Zero).unwrap_err(), RodError::Degenerate);
        let ridge = KappaForm::Ridge {
            beta1: 0.0,
            beta2: 0.0,
            f: p("x1"),
        };
        assert_eq!(RodEquation::new(1.0, [1.0, 0.0, 1.0], ridge).unwrap_err(), RodError::RidgeDirection);
    }

    #[test]
    fn normalize_collapses() {
        let f = KappaForm::SimilarityB {
            beta1: 0.3,
            beta2: 0.2,
            f: p("2"),
        };
        assert!(matches!(f.normalize(), KappaForm::InvSquareTime { kappa0, beta } if kappa0 == 2.0 && beta == 0.2));
        let f = KappaForm::SimilarityB {
            beta1: 0.3,
            beta2: 0.2,
            f: p("5*x1^(-4)"),
        };
        assert!(matches!(f.normalize(), KappaForm::QuarticRidgeB { kappa0, beta } if (kappa0 - 5.0).abs() < 1e-12 && beta == 0.3));
        let f = KappaForm::SimilarityC {
            beta1: 0.3,
            beta2: 0.2,
            f: p("3"),
        };
        assert!(matches!(f.normalize(), KappaForm::PowFourThirds { kappa0, beta } if kappa0 == 3.0 && beta == 0.2));
        let f = KappaForm::SimilarityC {
            beta1: 0.3,
            beta2: 0.2,
            f: p("x1^(-4)"),
        };
        assert!(matches!(f.normalize(), KappaForm::QuarticRidgeC { .. }));
        let f = KappaForm::Ridge {
            beta1: 1.0,
            beta2: 0.0,
            f: p("0"),
        };
        assert!(matches!(f.normalize(), KappaForm::Zero));
        let f = KappaForm::Ridge {
            beta1: 1.0,
            beta2: 0.0,
            f: p("1 + x1^2"),
        };
        assert!(matches!(f.normalize(), KappaForm::Ridge { .. }));
    }

    #[test]
    fn subclasses() {
        assert_eq!(RodEquation::beam(1.0, 1.0).subclass(), Subclass::B);
        assert_eq!(RodEquation::pipe(1.0, 1.0, 1.0, 1.0).subclass(), Subclass::A);
        // m = 0: det chi = m M U^2 = 0
        assert_eq!(RodEquation::pipe(1.0, 0.0, 1.0, 1.0).subclass(), Subclass::B);
        assert_eq!(RodEquation::new(1.0, [1.0, 1.0, 0.0], KappaForm::Zero).unwrap().subclass(), Subclass::C);
    }

    #[test]
    fn classify_examples() {
        let s = samples();
        let eq = RodEquation::new(
            1.0,
            [1.0, 0.0, 1.0],
            KappaForm::Ridge {
                beta1: 0.0,
                beta2: 1.0,
                f: p("1 + x1^2"),
            },
        )
        .unwrap();
        let c = classify(&eq).unwrap();
        assert_eq!((c.subclass, c.row), (Subclass::A, Some(1)));
        assert!(c.generators[0].field.proportional_to(&VectorField::translation(1), &s, 1e-12).is_some());

        let eq = RodEquation::new(1.0, [0.0, 0.0, 1.0], KappaForm::InvSquareTime { kappa0: 2.0, beta: 0.5 }).unwrap();
        let c = classify(&eq).unwrap();
        assert_eq!(c.row, Some(4));
        let expect = VectorField::new(p("x1"), p("1 + 2*x2"), ScalarExpr::zero());
        assert!(c.generators[1].field.proportional_to(&expect, &s, 1e-12).is_some());
        for r in verify_generators(&eq, &c, &s).unwrap() {
            assert!(r.pass, "{}", r.max_abs);
        }
        assert_eq!(span_symmetry_count(&eq, &s).unwrap(), 2);

        let c = classify(&RodEquation::beam(1.0, 1.0)).unwrap();
        assert_eq!(c.row, Some(10));
        assert_eq!(c.generators.len(), 3);
        assert_eq!(c.generators[2].variational, VariationalTag::PlusX0(0.5));

        let general = RodEquation::new(1.0, [0.0, 0.0, 1.0], KappaForm::General(p("x1 + x2^2"))).unwrap();
        let c = classify(&general).unwrap();
        assert!(c.row.is_none() && c.generators.is_empty());
        assert_eq!(span_symmetry_count(&general, &s).unwrap(), 0);
    }

    #[test]
    fn collapse_lands_on_same_row() {
        let a = RodEquation::new(
            1.0,
            [0.25, 0.5, 1.0],
            KappaForm::SimilarityB {
                beta1: 0.1,
                beta2: 0.3,
                f: p("2"),
            },
        )
        .unwrap();
        let b = RodEquation {
            kappa: KappaForm::InvSquareTime { kappa0: 2.0, beta: 0.3 },
            ..a.clone()
        };
        let (ca, cb) = (classify(&a).unwrap(), classify(&b).unwrap());
        assert_eq!(ca.row, Some(4));
        assert_eq!(ca.row, cb.row);
        for (x, y) in ca.generators.iter().zip(&cb.generators) {
            assert_eq!(x.combo, y.combo);
        }
    }

    #[test]
    fn rod_lambda_matches_inference() {
        let s = samples();
        let eq = RodEquation::beam(2.0, 3.0);
        let y3 = builtin_generators(&eq).y3.unwrap();
        let lam = infer_lambda(&eq.operator().unwrap(), &y3, &s).unwrap();
        assert!((lam.eval([0.3, 0.4]) - rod_lambda(&y3).eval([0.3, 0.4])).abs() < 1e-15);
        assert!(determining_residuals(&eq.operator().unwrap(), &y3, &lam, &s, 1e-9).pass);
        assert!(!is_variational(&y3, &lam, &s, 1e-12).pass);
        let fixed = y3.plus(&VectorField::x0().scaled(0.5));
        assert!(is_variational(&fixed, &rod_lambda(&fixed), &s, 1e-12).pass);
    }

    #[test]
    fn b_currents_characteristic_identity() {
        // D_a B(1)^a = -w1 D[w] - kappa_1 w^2 / 2 for a kappa depending on x1
        let eq = RodEquation::new(1.3, [0.7, -0.4, 1.1], KappaForm::General(p("1 + x1^2 + x2"))).unwrap();
        let cat = conserved_currents_catalog(&eq).unwrap();
        let d = eq.operator().unwrap().apply();
        let w = JetExpr::w();
        let lhs = JetExpr::sum([
            cat.b1.divergence().unwrap(),
            JetExpr::coord(1, 0).mul(&d),
            w.mul(&w).scale(&p("x1")),
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(jet_identity(&lhs, &mut rng, 32, 6, 1e-9).pass);
        let lhs = JetExpr::sum([
            cat.b2.divergence().unwrap(),
            JetExpr::coord(1, 1).mul(&d),
            w.mul(&w).scale_f(0.5),
        ]);
        assert!(jet_identity(&lhs, &mut rng, 32, 6, 1e-9).pass);
    }

    #[test]
    fn rod_laws_are_characteristic_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let eqs = [
            RodEquation::beam(1.0, 2.0),
            RodEquation::new(2.0, [1.5, 0.5, 0.0], KappaForm::Zero).unwrap(),
            RodEquation::new(1.0, [0.25, 0.5, 1.0], KappaForm::QuarticRidgeB { kappa0: 1.5, beta: 3.0 }).unwrap(),
        ];
        for eq in eqs {
            let d = eq.operator().unwrap().apply();
            for law in rod_conservation_laws(&eq).unwrap() {
                let lhs = law.current.divergence().unwrap().sub(&law.characteristic.mul(&d));
                let r = jet_identity(&lhs, &mut rng, 24, 6, 1e-9);
                assert!(r.pass, "{}: {}", law.generator.label, r.max_abs);
            }
        }
    }

    #[test]
    fn p_u_divergence() {
        let eq = RodEquation::new(1.3, [0.7, -0.4, 1.1], KappaForm::General(p("x1*x2"))).unwrap();
        let u = p("sin(x1) * x2^2");
        let op = eq.operator().unwrap();
        let cur = p_u_current(&eq, &u);
        let lhs = JetExpr::sum([
            cur.divergence().unwrap(),
            op.apply().scale(&-&u),
            JetExpr::w().scale(&op.apply_to(&u)),
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert!(jet_identity(&lhs, &mut rng, 32, 6, 1e-9).pass);
        let zero = p_u_current(&eq, &ScalarExpr::zero());
        assert!(zero.p[0].is_zero() && zero.p[1].is_zero());
    }

    #[test]
    fn beam_laws_on_exact_solution() {
        let s = samples();
        let w = p("cos(x1 - x2)");
        for law in beam_conservation_laws(1.0, 1.0) {
            let r = verify::conservation_check(&law.current(), &w, &s, 1e-9).unwrap();
            assert!(r.pass, "{}: {}", law.name, r.max_abs);
        }
        let u1 = p_u_current(&RodEquation::beam(2.0, 3.0), &ScalarExpr::one());
        assert_eq!(u1.p[0].to_string(), JetExpr::coord(3, 0).scale_f(2.0).to_string());
    }

    #[test]
    fn pipe_travelling_wave() {
        let s = samples();
        let eq = RodEquation::pipe(1.0, 0.0, 1.0, 1.0);
        let red = reduce(&eq, ReductionKind::TravellingWave { c: 1.0, sign: 1.0 }, &s).unwrap();
        let c: Vec<f64> = red.ode.coeffs.iter().map(|e| e.eval([0.3, 0.0])).collect();
        assert_eq!(c, vec![0.0, 0.0, 4.0, 0.0, 1.0]);
        let op = eq.operator().unwrap();
        let r = lift_and_verify(&op, &red.ode, Profile::Closed(&p("cos(2*x1)")), &s, 1e-9).unwrap();
        assert!(r.pass, "{}", r.max_abs);
        let r = lift_and_verify(&op, &red.ode, Profile::Closed(&p("x1")), &s, 1e-12).unwrap();
        assert!(r.pass);
        // stationary profile
        let red = reduce(&eq, ReductionKind::TravellingWave { c: 0.0, sign: 1.0 }, &s).unwrap();
        assert_eq!(red.ode.coeffs[2].eval([0.0, 0.0]), 1.0);
    }

    #[test]
    fn travelling_wave_rejects_misaligned_ridge() {
        let s = samples();
        let eq = RodEquation::new(
            1.0,
            [1.0, 0.0, 1.0],
            KappaForm::Ridge {
                beta1: 0.0,
                beta2: 1.0,
                f: p("1 + x1^2"),
            },
        )
        .unwrap();
        assert!(reduce(&eq, ReductionKind::TravellingWave { c: 1.0, sign: 1.0 }, &s).is_err());
        assert!(reduce(&eq, ReductionKind::TravellingWave { c: 0.0, sign: 1.0 }, &s).is_ok());
    }

    #[test]
    fn y3_and_y4_reductions_lift() {
        let s = samples();
        let opts = OdeOptions::default();
        // Y3 with f = kappa0 (row 4, beta = 0)
        let eq = RodEquation::new(1.0, [0.25, 0.5, 1.0], KappaForm::InvSquareTime { kappa0: 0.7, beta: 0.0 }).unwrap();
        let red = reduce(&eq, ReductionKind::Y3, &s).unwrap();
        assert!(!red.self_similar);
        assert!((red.profile.eval([1.3, 0.0]) - 0.7).abs() < 1e-12);
        let (lo, hi) = similarity_range(&red.ode, &s);
        let sol = red.ode.integrate([1.0, 0.2, -0.3, 0.1], 0.5 * (lo + hi), lo - 0.1, hi + 0.1, opts).unwrap();
        let r = lift_and_verify(&eq.operator().unwrap(), &red.ode, Profile::Sampled(&sol), &s, 1e-5).unwrap();
        assert!(r.pass, "{}", r.max_abs);
        // Y4 with f = kappa0 (row 5, beta = 0)
        let eq = RodEquation::new(2.0, [0.6, 1.2, 0.0], KappaForm::PowFourThirds { kappa0: 0.4, beta: 0.0 }).unwrap();
        let red = reduce(&eq, ReductionKind::Y4, &s).unwrap();
        let (lo, hi) = similarity_range(&red.ode, &s);
        let sol = red.ode.integrate([0.5, -0.1, 0.2, 0.3], 0.5 * (lo + hi), lo - 0.1, hi + 0.1, opts).unwrap();
        let r = lift_and_verify(&eq.operator().unwrap(), &red.ode, Profile::Sampled(&sol), &s, 1e-5).unwrap();
        assert!(r.pass, "{}", r.max_abs);
        assert!(reduce(&eq, ReductionKind::Y3, &s).is_err());
    }

    #[test]
    fn y3_self_similar_closed_form() {
        // 4 U'''' + s^2 U'' + 3 s U' = 0 is solved by U = 1 and U = s
        let s = samples();
        let eq = RodEquation::beam(1.0, 1.0);
        let red = reduce(&eq, ReductionKind::Y3, &s).unwrap();
        assert!(red.self_similar);
        let op = eq.operator().unwrap();
        for u in ["1", "x1"] {
            let r = lift_and_verify(&op, &red.ode, Profile::Closed(&p(u)), &s, 1e-9).unwrap();
            let res = red.ode.residual_expr(&p(u));
            assert_eq!(r.pass, res.eval([0.7, 0.0]).abs() < 1e-12, "{u}");
        }
    }
}
