//! Plates of constant rigidity: `Delta^2 w + A^ab w_ab + A w = 0`.
//!
//! Invariants of the coefficients, the family `E_omega` generated by an
//! analytic function and its six-parameter group, the change of variables to
//! constant coefficients, and the constant-coefficient member of the family
//! together with one of its group-invariant solutions.

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::expr::{schwarzian, ComplexExpr, Point, ScalarExpr};
use crate::jet::{JetCoord, JetError, JetExpr};
use crate::operator::Operator4;
use crate::symmetry::{self, SymmetryError, VectorField, STRUCTURAL_TOL};
use crate::verify::{ReducedOde, SampleSet};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlateError {
    #[error("bending rigidity must be positive, got {0}")]
    Rigidity(f64),
    #[error("membrane stress is not divergence free (residual {residual:e} at {point:?})")]
    MembraneDivergence { residual: f64, point: Point },
    #[error("omega is constant")]
    DegenerateOmega,
    #[error("f = k1 omega1 + k2 omega2 + k3 omega3 vanishes identically")]
    ZeroF,
    #[error("integration path meets a zero of f near {point:?}")]
    SingularPath { point: Point },
    #[error("no closed form for the map; use point evaluation")]
    NoClosedForm,
    #[error("sigma - div(xi)/2 is not constant (spread {spread:e})")]
    NotRegaugeable { spread: f64 },
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Coefficients `A^11, A^12, A^22` and `A`; the fourth-order part is the
/// bilaplacian.
#[derive(Clone, Debug)]
pub struct PlateEquation {
    pub a2: [ScalarExpr; 3],
    pub a0: ScalarExpr,
}

#[derive(Clone, Debug)]
pub struct Invariants {
    pub s1: ScalarExpr,
    pub radicand2: ScalarExpr,
    pub s2: ScalarExpr,
    pub s3: ScalarExpr,
}

impl PlateEquation {
    pub fn new(a2: [ScalarExpr; 3], a0: ScalarExpr) -> Self {
        PlateEquation { a2, a0 }
    }

    pub fn biharmonic() -> Self {
        Self::new(
            [ScalarExpr::zero(), ScalarExpr::zero(), ScalarExpr::zero()],
            ScalarExpr::zero(),
        )
    }

    /// Plate of rigidity `d` on a Winkler foundation `k` under membrane
    /// stresses `n = (N11, N12, N22)`. With `d` constant Poisson's ratio drops
    /// out, so `nu` does not enter the coefficients.
    pub fn from_physical(
        d: f64,
        _nu: f64,
        n: &[ScalarExpr; 3],
        k: &ScalarExpr,
        samples: &SampleSet,
    ) -> Result<Self, PlateError> {
        if d.is_nan() || d <= 0.0 {
            return Err(PlateError::Rigidity(d));
        }
        let eq = Self::new(
            [&n[0] / d, &n[1] / d, &n[2] / d],
            k / d,
        );
        for div in eq.membrane_divergence() {
            for &p in &samples.points {
                let r = symmetry::scaled_residual(&div, p);
                if r > STRUCTURAL_TOL {
                    return Err(PlateError::MembraneDivergence { residual: r, point: p });
                }
            }
        }
        Ok(eq)
    }

    /// `A^{a mu}_{,mu}` for `a = 1, 2`.
    pub fn membrane_divergence(&self) -> [ScalarExpr; 2] {
        [
            self.a2[0].diff(0) + self.a2[1].diff(1),
            self.a2[1].diff(0) + self.a2[2].diff(1),
        ]
    }

    pub fn operator(&self) -> Operator4 {
        let mut op = Operator4::biharmonic();
        for j in 0..3 {
            op.set_slot(2, j, self.a2[j].clone());
        }
        op.set_slot(0, 0, self.a0.clone());
        op
    }

    pub fn invariants(&self) -> Invariants {
        let [a11, a12, a22] = &self.a2;
        let s1 = a11 + a22;
        let contraction = ScalarExpr::add_all(vec![a11 * a11, a12 * a12 * 2.0, a22 * a22]);
        let radicand2 = &(&self.a0 * 8.0) - &contraction;
        let s2 = radicand2.sqrt();
        let g1 = s1.diff(0);
        let g2 = s1.diff(1);
        let s3 = (-(&g1 * &g1 + &g2 * &g2)).cbrt();
        Invariants { s1, radicand2, s2, s3 }
    }
}

/// Operator of a plate with variable rigidity:
/// `Delta(d Delta w) - (1 - nu) e^am e^bn d_,ab w_mn + N^mn w_mn + k w`.
pub fn variable_rigidity_operator(d: &ScalarExpr, nu: f64, n: &[ScalarExpr; 3], k: &ScalarExpr) -> Operator4 {
    let lap = JetExpr::sum([JetExpr::coord(2, 0), JetExpr::coord(2, 2)]);
    let dl = lap.scale(d);
    let bilap = |e: &JetExpr| -> JetExpr {
        let a = e.total_derivative(0).and_then(|x| x.total_derivative(0)).expect("order fits");
        let b = e.total_derivative(1).and_then(|x| x.total_derivative(1)).expect("order fits");
        a.add(&b)
    };
    let twist = JetExpr::sum([
        JetExpr::coord(2, 2).scale(&d.diff_n(2, 0)),
        JetExpr::coord(2, 1).scale(&(d.diff_n(1, 1) * -2.0)),
        JetExpr::coord(2, 0).scale(&d.diff_n(0, 2)),
    ]);
    let total = JetExpr::sum([
        bilap(&dl),
        twist.scale_f(-(1.0 - nu)),
        JetExpr::coord(2, 0).scale(&n[0]),
        JetExpr::coord(2, 1).scale(&(&n[1] * 2.0)),
        JetExpr::coord(2, 2).scale(&n[2]),
        JetExpr::w().scale(k),
    ]);
    Operator4::from_applied(|kk, j| total.coefficient(&[JetCoord::new(kk, j)]))
}

/// Field of the form `xi^mu d_mu + (1/2) xi^mu_{,mu} w d_w`.
pub fn vs_generator(xi1: ScalarExpr, xi2: ScalarExpr) -> VectorField {
    let sigma = (xi1.diff(0) + xi2.diff(1)) * ScalarExpr::ratio(1, 2);
    VectorField::new(xi1, xi2, sigma)
}

/// Split `X` into its representative with `sigma = div(xi)/2` and the
/// constant multiple of `X0` it differs by.
pub fn regauge(x: &VectorField, samples: &SampleSet) -> Result<(VectorField, f64), PlateError> {
    let rep = vs_generator(x.xi1.clone(), x.xi2.clone());
    let diff = &x.sigma - &rep.sigma;
    let vals: Vec<f64> = samples.points.iter().map(|&p| diff.eval(p)).collect();
    let mean = vals.iter().sum::<f64>() / vals.len().max(1) as f64;
    let spread = vals.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    if spread > STRUCTURAL_TOL {
        return Err(PlateError::NotRegaugeable { spread });
    }
    let c = if (mean - mean.round()).abs() < 1e-12 { mean.round() } else { mean };
    Ok((VectorField { u: x.u.clone(), ..rep }, c))
}

/// `X0` and `X1..X6` of the bilaplacian.
pub fn biharmonic_generators() -> [VectorField; 7] {
    let x1 = ScalarExpr::x1();
    let x2 = ScalarExpr::x2();
    let z = ScalarExpr::zero();
    let sq = &(&x1 * &x1) - &(&x2 * &x2);
    [
        VectorField::x0(),
        VectorField::translation(0),
        VectorField::translation(1),
        VectorField::new(x2.clone(), -&x1, z.clone()),
        VectorField::new(x1.clone(), x2.clone(), z),
        VectorField::new(&x1 * &x2 * 2.0, -&sq, &x2 * 2.0),
        VectorField::new(sq, &x1 * &x2 * 2.0, &x1 * 2.0),
    ]
}

#[derive(Clone, Debug)]
pub struct PlateClassification {
    /// Whether `s1`, `s2` (via its radicand) and `s3` vanish on the samples.
    pub vanishing: [bool; 3],
    pub max_abs: [f64; 3],
    /// 6 when every invariant vanishes, otherwise at most 3.
    pub max_group_dim: usize,
    /// Dimension of the symmetries found inside the span of `X1..X6`
    /// (in the `sigma = div(xi)/2` gauge).
    pub span_symmetries: usize,
    pub invariant_coordinates: Vec<String>,
    pub notes: Vec<String>,
}

/// Symmetries of `op` inside `span{basis}` with `lambda = sigma - 2 div xi`.
pub fn symmetries_in_span(op: &Operator4, basis: &[VectorField], samples: &SampleSet) -> Vec<Vec<f64>> {
    symmetry::symmetries_in_span(op, basis, samples, |x| &x.sigma - &(x.divergence() * 2.0))
}

pub fn classify(eq: &PlateEquation, samples: &SampleSet) -> PlateClassification {
    let inv = eq.invariants();
    let fields = [&inv.s1, &inv.radicand2, &inv.s3];
    let mut vanishing = [false; 3];
    let mut max_abs = [0.0; 3];
    for (i, f) in fields.iter().enumerate() {
        let m = samples.points.iter().fold(0.0f64, |m, &p| {
            let v = f.eval(p).abs();
            m.max(if v.is_nan() { f64::INFINITY } else { v })
        });
        max_abs[i] = m;
        vanishing[i] = m <= STRUCTURAL_TOL;
    }
    let nonzero: Vec<usize> = (0..3).filter(|&i| !vanishing[i]).collect();
    let mut notes = Vec::new();
    let mut invariant_coordinates = Vec::new();
    let max_group_dim = if nonzero.is_empty() {
        notes.push("all invariants vanish: E_omega type, 6-parameter group of variational symmetries".into());
        6
    } else {
        notes.push("some invariant is nonzero: at most a 3-parameter group besides the kernel".into());
        3
    };
    if nonzero.len() >= 2 {
        for &k in &nonzero {
            invariant_coordinates.push(format!("U{} = w*sqrt(s{})", k + 1, k + 1));
        }
        for (a, &k) in nonzero.iter().enumerate() {
            for &l in &nonzero[a + 1..] {
                invariant_coordinates.push(format!("s{}/s{}", k + 1, l + 1));
            }
        }
    }
    if !vanishing[1] && samples.points.iter().any(|&p| inv.radicand2.eval(p) < 0.0) {
        notes.push("s2 is not real on part of the domain (negative radicand)".into());
    }
    let basis: Vec<VectorField> = biharmonic_generators()[1..]
        .iter()
        .map(|x| vs_generator(x.xi1.clone(), x.xi2.clone()))
        .collect();
    let span_symmetries = symmetries_in_span(&eq.operator(), &basis, samples).len();
    if span_symmetries == 0 {
        notes.push("no symmetry in the span of X1..X6: only the kernel group (X0 and solution symmetries) is detected".into());
    }
    PlateClassification {
        vanishing,
        max_abs,
        max_group_dim,
        span_symmetries,
        invariant_coordinates,
        notes,
    }
}

/// Analytic function `omega(z)` with its Schwarzian and the three functions
/// `1/omega'`, `omega/omega'`, `omega^2/omega'`.
#[derive(Clone, Debug)]
pub struct AnalyticSeed {
    pub omega: ComplexExpr,
    pub phi: ComplexExpr,
    pub omega1: ComplexExpr,
    pub omega2: ComplexExpr,
    pub omega3: ComplexExpr,
}

impl AnalyticSeed {
    pub fn new(omega: ComplexExpr) -> Result<Self, PlateError> {
        let d = omega.diff();
        let probes = [Complex64::new(0.7, 0.4), Complex64::new(1.3, -0.6), Complex64::new(-0.8, 1.1)];
        if d.as_constant().is_some_and(|c| c == Complex64::new(0.0, 0.0))
            || probes.iter().all(|&z| d.eval(z).norm() == 0.0)
        {
            return Err(PlateError::DegenerateOmega);
        }
        let r = d.recip();
        Ok(AnalyticSeed {
            phi: schwarzian(&omega),
            omega1: r.clone(),
            omega2: &omega * &r,
            omega3: &(&omega * &omega) * &r,
            omega,
        })
    }

    /// `omega = z^p`.
    pub fn power(p: f64) -> Result<Self, PlateError> {
        Self::new(ComplexExpr::z().powf(p))
    }
}

/// The plate `E_omega`: `A11 = -A22 = 4 Re phi`, `A12 = -4 Im phi`,
/// `A = 4 |phi|^2`.
pub fn e_omega(seed: &AnalyticSeed) -> PlateEquation {
    let (re, im) = seed.phi.realify();
    PlateEquation::new(
        [&re * 4.0, &im * -4.0, &re * -4.0],
        (&re * &re + &im * &im) * 4.0,
    )
}

/// `Z_(1..6)`: real and imaginary parts of `omega_k` and `i omega_k`, in the
/// `sigma = div(xi)/2` gauge.
pub fn e_omega_generators(seed: &AnalyticSeed) -> [VectorField; 6] {
    let i = ComplexExpr::i();
    let fs = [
        seed.omega1.clone(),
        &i * &seed.omega1,
        seed.omega2.clone(),
        &i * &seed.omega2,
        seed.omega3.clone(),
        &i * &seed.omega3,
    ];
    fs.map(|f| {
        let (a, b) = f.realify();
        vs_generator(a, b)
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Antiderivative {
    /// `f = c`.
    Linear { c: Complex64 },
    /// `f = c z`.
    Logarithmic { c: Complex64 },
    /// `f = c exp(a z)`.
    Exponential { c: Complex64, a: Complex64 },
    /// Gauss–Legendre quadrature along axis-parallel paths from `base`.
    Quadrature { base: Point },
}

/// `y = (Re, Im) int f^-1 dz`, `W = w U` with `U = |f|^-1`.
#[derive(Clone, Debug)]
pub struct ChangeOfVariables {
    pub f: ComplexExpr,
    pub kind: Antiderivative,
    /// Closed-form `y(x)`, when available.
    pub y: Option<[ScalarExpr; 2]>,
    /// Closed-form `x(y)`, written in the variables `x1, x2` standing for
    /// `y1, y2`.
    pub inverse: Option<[ScalarExpr; 2]>,
    pub multiplier: ScalarExpr,
    /// `jacobian[a][b] = dy^b / dx^a`.
    pub jacobian: [[ScalarExpr; 2]; 2],
}

fn snap(c: Complex64) -> Complex64 {
    let s = |v: f64| {
        let r = (v * 1000.0).round() / 1000.0;
        if (v - r).abs() < 1e-12 {
            r
        } else {
            v
        }
    };
    Complex64::new(s(c.re), s(c.im))
}

fn near_zero(v: Complex64, scale: f64) -> bool {
    v.norm() <= 1e-10 * scale.max(1.0)
}

fn detect(f: &ComplexExpr) -> Option<Antiderivative> {
    let probes = [Complex64::new(0.7, 0.3), Complex64::new(1.1, 0.9), Complex64::new(0.4, 1.3)];
    let df = f.diff();
    let vals: Vec<(Complex64, Complex64, Complex64)> = probes.iter().map(|&z| (z, f.eval(z), df.eval(z))).collect();
    if vals.iter().any(|(_, v, d)| !v.is_finite() || !d.is_finite()) {
        return None;
    }
    if vals.iter().all(|(_, v, d)| near_zero(*d, v.norm())) {
        return Some(Antiderivative::Linear { c: snap(vals[0].1) });
    }
    if vals.iter().all(|(z, v, d)| near_zero(v - z * d, v.norm())) {
        return Some(Antiderivative::Logarithmic { c: snap(vals[0].1 / vals[0].0) });
    }
    let a0 = vals[0].2 / vals[0].1;
    if vals.iter().all(|(_, v, d)| near_zero(d / v - a0, a0.norm())) {
        let a = snap(a0);
        let c = snap(vals[0].1 * (-a * vals[0].0).exp());
        return Some(Antiderivative::Exponential { c, a });
    }
    None
}

fn cconst(c: Complex64) -> ComplexExpr {
    ComplexExpr::constant(c)
}

/// Change of variables bringing `E_omega` to constant coefficients, for
/// `f = k1 omega1 + k2 omega2 + k3 omega3`. `base` anchors the quadrature
/// when no closed form applies.
pub fn to_constant_coefficients(seed: &AnalyticSeed, k: [Complex64; 3], base: Point) -> Result<ChangeOfVariables, PlateError> {
    let f = ComplexExpr::add_all(vec![
        &cconst(k[0]) * &seed.omega1,
        &cconst(k[1]) * &seed.omega2,
        &cconst(k[2]) * &seed.omega3,
    ]);
    let probes = [Complex64::new(0.7, 0.3), Complex64::new(1.1, 0.9), Complex64::new(0.4, 1.3)];
    if probes.iter().all(|&z| f.eval(z).norm() < 1e-14) {
        return Err(PlateError::ZeroF);
    }
    let z = ComplexExpr::z();
    let kind = detect(&f).unwrap_or(Antiderivative::Quadrature { base });
    let (fc, anti, inv): (ComplexExpr, Option<ComplexExpr>, Option<ComplexExpr>) = match kind {
        Antiderivative::Linear { c } => (cconst(c), Some(&z * &cconst(1.0 / c)), Some(&z * &cconst(c))),
        Antiderivative::Logarithmic { c } => (
            &cconst(c) * &z,
            Some(&z.ln() * &cconst(1.0 / c)),
            Some((&z * &cconst(c)).exp()),
        ),
        Antiderivative::Exponential { c, a } => (
            &cconst(c) * &(&cconst(a) * &z).exp(),
            Some(&(&cconst(-a) * &z).exp() * &cconst(-1.0 / (a * c))),
            Some(&(&z * &cconst(-a * c)).ln() * &cconst(-1.0 / a)),
        ),
        Antiderivative::Quadrature { .. } => (f.clone(), None, None),
    };
    let (fr, fi) = fc.realify();
    let multiplier = (&fr * &fr + &fi * &fi).powr(num_rational::Rational64::new(-1, 2));
    let (p, q) = fc.recip().realify();
    let jacobian = [[p.clone(), q.clone()], [-&q, p]];
    let y = anti.map(|a| {
        let (u, v) = a.realify();
        [u, v]
    });
    let inverse = inv.map(|a| {
        let (u, v) = a.realify();
        [u, v]
    });
    Ok(ChangeOfVariables {
        f,
        kind,
        y,
        inverse,
        multiplier,
        jacobian,
    })
}

impl ChangeOfVariables {
    /// `y(x)`, by closed form or quadrature.
    pub fn forward(&self, x: Point) -> Result<Point, PlateError> {
        if let Some(y) = &self.y {
            return Ok([y[0].eval(x), y[1].eval(x)]);
        }
        let Antiderivative::Quadrature { base } = self.kind else {
            unreachable!("closed forms carry y")
        };
        let gl = GaussLegendre::new(16).expect("degree 16 is valid");
        let inv = |z: Complex64| -> Result<Complex64, PlateError> {
            let v = 1.0 / self.f.eval(z);
            if !v.is_finite() || v.norm() > 1e12 {
                Err(PlateError::SingularPath { point: [z.re, z.im] })
            } else {
                Ok(v)
            }
        };
        let mut total = Complex64::new(0.0, 0.0);
        let corner = [x[0], base[1]];
        for (from, to) in [(base, corner), (corner, x)] {
            let a = Complex64::new(from[0], from[1]);
            let b = Complex64::new(to[0], to[1]);
            let len = (b - a).norm();
            if len == 0.0 {
                continue;
            }
            let panels = (len / 0.25).ceil() as usize;
            for k in 0..panels {
                let t0 = k as f64 / panels as f64;
                let t1 = (k + 1) as f64 / panels as f64;
                let mut err = None;
                let mut part = |comp: usize| {
                    gl.integrate(t0, t1, |t| {
                        let zt = a + (b - a) * t;
                        match inv(zt) {
                            Ok(v) => {
                                let d = v * (b - a);
                                if comp == 0 {
                                    d.re
                                } else {
                                    d.im
                                }
                            }
                            Err(e) => {
                                err = Some(e);
                                0.0
                            }
                        }
                    })
                };
                let re = part(0);
                let im = part(1);
                if let Some(e) = err {
                    return Err(e);
                }
                total += Complex64::new(re, im);
            }
        }
        Ok([total.re, total.im])
    }

    pub fn inverse_at(&self, y: Point) -> Option<Point> {
        self.inverse.as_ref().map(|m| [m[0].eval(y), m[1].eval(y)])
    }

    /// `w(x) = W(y(x)) / U(x)` for a field `W` written in `x1, x2` standing
    /// for `y1, y2`.
    pub fn pull_back(&self, big_w: &ScalarExpr) -> Result<ScalarExpr, PlateError> {
        let y = self.y.as_ref().ok_or(PlateError::NoClosedForm)?;
        Ok(big_w.compose(y) / self.multiplier.clone())
    }

    /// `D` rewritten in the new variables, as a jet expression in the
    /// derivatives of `W` with respect to `y` (coefficients still functions
    /// of `x`), normalized so that `W_(4,0)` has coefficient 1.
    pub fn transform(&self, op: &Operator4) -> Result<JetExpr, PlateError> {
        let start = JetExpr::w().scale(&self.multiplier.recip());
        let mut parts = Vec::new();
        for k in 0..=4 {
            for j in 0..=k {
                let c = op.applied(k, j);
                if c.is_zero() {
                    continue;
                }
                let mut e = start.clone();
                for _ in 0..(k - j) {
                    e = e.total_derivative_chain(0, &self.jacobian)?;
                }
                for _ in 0..j {
                    e = e.total_derivative_chain(1, &self.jacobian)?;
                }
                parts.push(e.scale(&c));
            }
        }
        let total = JetExpr::sum(parts);
        let lead = total.coefficient(&[JetCoord::new(4, 0)]);
        Ok(total.map_coefficients(|c| c / &lead))
    }
}

/// Constant-coefficient operator read off a transformed jet expression, or
/// the largest spread of a coefficient over the samples.
pub fn constant_operator(e: &JetExpr, samples: &SampleSet, tol: f64) -> Result<Operator4, f64> {
    let worst = std::cell::Cell::new(0.0f64);
    let op = Operator4::from_applied(|k, j| {
        let c = e.coefficient(&[JetCoord::new(k, j)]);
        let vals: Vec<f64> = samples.points.iter().map(|&p| c.eval(p)).collect();
        let mean = vals.iter().sum::<f64>() / vals.len().max(1) as f64;
        let spread = vals.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
        worst.set(worst.get().max(if spread.is_nan() { f64::INFINITY } else { spread / mean.abs().max(1.0) }));
        let r = (mean * 64.0).round() / 64.0;
        ScalarExpr::constant(if (mean - r).abs() <= tol * mean.abs().max(1.0) { r } else { mean })
    });
    if worst.get() <= tol {
        Ok(op)
    } else {
        Err(worst.get())
    }
}

/// `Delta^2 W - kappa W_11 + kappa W_22 + (kappa^2/4) W`, the member of the
/// family with `omega = exp(z sqrt(kappa/2))`.
pub fn const_plate_operator(kappa: f64) -> Operator4 {
    Operator4::from_applied(|k, j| match (k, j) {
        (4, 0) | (4, 4) => ScalarExpr::one(),
        (4, 2) => ScalarExpr::int(2),
        (2, 0) => ScalarExpr::constant(-kappa),
        (2, 2) => ScalarExpr::constant(kappa),
        (0, 0) => ScalarExpr::constant(kappa * kappa / 4.0),
        _ => ScalarExpr::zero(),
    })
}

/// Which form of a formula to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// As originally stated.
    Original,
    /// Corrected so that the defining identities hold.
    Amended,
}

/// `V1..V6` of the constant-coefficient equation, in variables `x1, x2`
/// standing for `y1, y2`.
pub fn const_plate_generators(kappa: f64, variant: Variant) -> [VectorField; 6] {
    let th = (kappa / 2.0).sqrt();
    let y1 = ScalarExpr::x1() * th;
    let y2 = ScalarExpr::x2() * th;
    let ep = y1.exp();
    let em = (-&y1).exp();
    let (c, s) = (y2.cos(), y2.sin());
    let v3 = VectorField::new(&ep * &c, &ep * &s, &ep * &c * th);
    let v5 = VectorField::new(&em * &c, -(&em * &s), -(&em * &c * th));
    let (v4, v6) = match variant {
        Variant::Amended => (
            VectorField::new(-(&ep * &s), &ep * &c, -(&ep * &s * th)),
            VectorField::new(&em * &s, &em * &c, -(&em * &s * th)),
        ),
        Variant::Original => (
            VectorField::new(-(&ep * &c), &ep * &c, -(&ep * &s * th)),
            VectorField::new(&em * &c, &em * &s, -(&ep * &c * th)),
        ),
    };
    [VectorField::translation(0), VectorField::translation(1), v3, v4, v5, v6]
}

/// Similarity variable `s = sin(theta y2) / cosh(theta y1)`.
pub fn const_plate_similarity(kappa: f64) -> ScalarExpr {
    let th = (kappa / 2.0).sqrt();
    (ScalarExpr::x2() * th).sin() / (ScalarExpr::x1() * th).cosh()
}

/// `ln((s+1)/(s-1))` taken as `ln|s+1| - ln|s-1|`.
fn log_ratio(s: &ScalarExpr) -> ScalarExpr {
    let a = (s + 1.0).powi(2).ln();
    let b = (s - 1.0).powi(2).ln();
    (a - b) * 0.5
}

/// Basis `1, L, s, s L` of the reduced equation, `L = ln|(s+1)/(s-1)|`, in
/// the variable `x1` standing for `s`.
pub fn const_plate_reduced_basis() -> [ScalarExpr; 4] {
    let s = ScalarExpr::x1();
    let l = log_ratio(&s);
    [ScalarExpr::one(), l.clone(), s.clone(), &s * &l]
}

/// `(s^2-1)^2 u'''' + 8 s (s^2-1) u''' + 4 (3 s^2 - 1) u'' = 0`, lifted by
/// `W = cosh(theta y1) u(s)`.
pub fn const_plate_reduced_ode(kappa: f64) -> ReducedOde {
    let s = ScalarExpr::x1();
    let q = &(&s * &s) - &ScalarExpr::one();
    let th = (kappa / 2.0).sqrt();
    ReducedOde {
        coeffs: [
            ScalarExpr::zero(),
            ScalarExpr::zero(),
            (&(&s * &s) * 3.0 - 1.0) * 4.0,
            &s * &q * 8.0,
            &q * &q,
        ],
        similarity: const_plate_similarity(kappa),
        multiplier: (ScalarExpr::x1() * th).cosh(),
        label: "H(V3+V5)-invariant".into(),
    }
}

/// Invariant solution `sum C_i W_i` in variables `x1, x2` standing for
/// `y1, y2`. The original form divides the last term by
/// `cosh(theta y1)` once more than `u(s) cosh(theta y1)` gives.
pub fn const_plate_invariant_solution(kappa: f64, c: [f64; 4], variant: Variant) -> ScalarExpr {
    let th = (kappa / 2.0).sqrt();
    let ch = (ScalarExpr::x1() * th).cosh();
    let sn = (ScalarExpr::x2() * th).sin();
    let s = const_plate_similarity(kappa);
    let l = log_ratio(&s);
    let last = match variant {
        Variant::Amended => &sn * &l,
        Variant::Original => &(&sn / &ch) * &l,
    };
    let terms = [ch.clone(), &ch * &l, sn.clone(), last];
    ScalarExpr::add_all(
        terms
            .into_iter()
            .zip(c)
            .filter(|(_, ci)| *ci != 0.0)
            .map(|(t, ci)| t * ci)
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_scalar;
    use crate::symmetry::{determining_residuals, infer_lambda, is_variational};
    use crate::verify::{residual_on_solution, Domain, Exclusion, OdeOptions};

    fn p(s: &str) -> ScalarExpr {
        parse_scalar(s).unwrap()
    }

    fn samples() -> SampleSet {
        SampleSet::new(&Domain::default(), 40, 5)
    }

    #[test]
    fn invariants_examples() {
        let s = samples();
        let pt = s.points[0];
        let eq = PlateEquation::new([p("1"), p("0"), p("1")], p("0"));
        let inv = eq.invariants();
        assert_eq!(inv.s1.eval(pt), 2.0);
        assert_eq!(inv.radicand2.eval(pt), -2.0);
        assert!(inv.s2.eval(pt).is_nan());
        assert_eq!(inv.s3.eval(pt), 0.0);
        let eq = PlateEquation::new([p("0"), p("0"), p("0")], p("1"));
        let inv = eq.invariants();
        assert!((inv.s2.eval(pt) - 8f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn physical_constructor() {
        let s = samples();
        let n = [p("x2"), p("0"), p("x1")];
        let a = PlateEquation::from_physical(2.0, 0.3, &n, &p("4"), &s).unwrap();
        let b = PlateEquation::from_physical(2.0, 0.1, &n, &p("4"), &s).unwrap();
        assert_eq!(a.a2[0].eval(s.points[1]), b.a2[0].eval(s.points[1]));
        assert_eq!(a.a0.eval(s.points[1]), 2.0);
        let bad = [p("x1"), p("0"), p("0")];
        assert!(matches!(
            PlateEquation::from_physical(1.0, 0.3, &bad, &p("0"), &s),
            Err(PlateError::MembraneDivergence { .. })
        ));
        assert!(matches!(
            PlateEquation::from_physical(0.0, 0.3, &n, &p("0"), &s),
            Err(PlateError::Rigidity(_))
        ));
    }

    #[test]
    fn variable_rigidity_is_self_adjoint() {
        // membrane stress from the Airy function x1^2 x2^2 + x1^3
        let n = [p("2*x1^2"), p("-4*x1*x2"), p("2*x2^2 + 6*x1")];
        let op = variable_rigidity_operator(&p("1 + x1^2*x2"), 0.3, &n, &p("x1*x2"));
        assert!(op.is_self_adjoint(1).pass);
        // constant rigidity reduces to the bilaplacian plus membrane terms
        let op = variable_rigidity_operator(&p("1"), 0.3, &[p("0"), p("0"), p("0")], &p("0"));
        assert_eq!(op.applied(4, 2).as_constant(), Some(2.0));
    }

    #[test]
    fn biharmonic_list_passes() {
        let op = Operator4::biharmonic();
        let s = samples();
        for x in biharmonic_generators() {
            let lam = infer_lambda(&op, &x, &s).unwrap();
            assert!(determining_residuals(&op, &x, &lam, &s, STRUCTURAL_TOL).pass, "{x}");
        }
        let (rep, c) = regauge(&biharmonic_generators()[4], &s).unwrap();
        assert_eq!(c, -1.0);
        assert_eq!(rep.sigma.as_constant(), Some(1.0));
    }

    #[test]
    fn e_omega_square() {
        let seed = AnalyticSeed::power(2.0).unwrap();
        let eq = e_omega(&seed);
        let s = samples();
        for &pt in &s.points {
            let (x, y) = (pt[0], pt[1]);
            let r2 = x * x + y * y;
            let a11 = -6.0 * (x * x - y * y) / (r2 * r2);
            let a12 = -12.0 * x * y / (r2 * r2);
            let a = 9.0 / (r2 * r2);
            assert!((eq.a2[0].eval(pt) - a11).abs() < 1e-12);
            assert!((eq.a2[1].eval(pt) - a12).abs() < 1e-12);
            assert!((eq.a2[2].eval(pt) + a11).abs() < 1e-12);
            assert!((eq.a0.eval(pt) - a).abs() < 1e-12);
        }
        let cls = classify(&eq, &s);
        assert_eq!(cls.vanishing, [true; 3]);
        assert_eq!(cls.max_group_dim, 6);
        let op = eq.operator();
        for z in e_omega_generators(&seed) {
            let lam = infer_lambda(&op, &z, &s).unwrap();
            assert!(determining_residuals(&op, &z, &lam, &s, STRUCTURAL_TOL).pass);
            assert!(is_variational(&z, &lam, &s, 1e-12).pass);
        }
    }

    #[test]
    fn classify_kernel_only() {
        let eq = PlateEquation::new([p("1"), p("0"), p("1")], p("x1 + 2*x2^2 + x1*x2"));
        let c = classify(&eq, &samples());
        assert_eq!(c.span_symmetries, 0);
        assert_eq!(c.max_group_dim, 3);
        let c = classify(&PlateEquation::biharmonic(), &samples());
        assert_eq!(c.span_symmetries, 6);
    }

    #[test]
    fn invariants_are_transported() {
        // A = c / rho^4 admits the scaling field
        let eq = PlateEquation::new([p("0"), p("0"), p("0")], p("3/(x1^2 + x2^2)^2"));
        let s = samples();
        let x = vs_generator(p("x1"), p("x2"));
        let lam = infer_lambda(&eq.operator(), &x, &s).unwrap();
        assert!(determining_residuals(&eq.operator(), &x, &lam, &s, STRUCTURAL_TOL).pass);
        let s2 = eq.invariants().s2;
        let t = &(&x.divergence() * &s2) + &(&x.xi1 * &s2.diff(0) + &x.xi2 * &s2.diff(1));
        assert!(s.points.iter().all(|&pt| t.eval(pt).abs() < 1e-12));
    }

    #[test]
    fn worked_change_of_variables() {
        let kappa: f64 = 8.0;
        let th = (kappa / 2.0).sqrt();
        let seed = AnalyticSeed::power(th).unwrap();
        let cov = to_constant_coefficients(&seed, [0.0.into(), th.into(), 0.0.into()], [1.0, 1.0]).unwrap();
        assert!(matches!(cov.kind, Antiderivative::Logarithmic { .. }));
        let s = samples();
        let y = cov.y.as_ref().unwrap();
        for &pt in &s.points {
            let r = pt[0].hypot(pt[1]);
            assert!((y[0].eval(pt) - r.ln()).abs() < 1e-12);
            assert!((y[1].eval(pt) - pt[1].atan2(pt[0])).abs() < 1e-12);
            assert!((cov.multiplier.eval(pt) - 1.0 / r).abs() < 1e-12);
            let back = cov.inverse_at([y[0].eval(pt), y[1].eval(pt)]).unwrap();
            assert!((back[0] - pt[0]).abs() < 1e-10 && (back[1] - pt[1]).abs() < 1e-10);
        }
        let t = cov.transform(&e_omega(&seed).operator()).unwrap();
        let op = constant_operator(&t, &s, 1e-9).unwrap();
        let expect = const_plate_operator(kappa);
        for k in 0..=4 {
            for j in 0..=k {
                assert_eq!(op.applied(k, j).as_constant(), expect.applied(k, j).as_constant(), "({k},{j})");
            }
        }
    }

    #[test]
    fn quadrature_agrees_with_closed_form() {
        let seed = AnalyticSeed::power(1.5).unwrap();
        let k = [Complex64::new(0.3, 0.2), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        let cov = to_constant_coefficients(&seed, k, [1.0, 0.5]).unwrap();
        assert!(matches!(cov.kind, Antiderivative::Quadrature { .. }));
        // 1/f = z^(1/2) * 1.5 / k1, antiderivative z^(3/2) / k1
        let prim = |x: Point| {
            let z = Complex64::new(x[0], x[1]);
            z.powf(1.5) / k[0]
        };
        let a = [1.7, 1.2];
        let b = [0.8, 1.9];
        let ya = cov.forward(a).unwrap();
        let yb = cov.forward(b).unwrap();
        let exact = prim(a) - prim(b);
        assert!((ya[0] - yb[0] - exact.re).abs() < 1e-12);
        assert!((ya[1] - yb[1] - exact.im).abs() < 1e-12);
    }

    #[test]
    fn const_plate_generators_amended_pass_original_fail() {
        let s = SampleSet::new(&Domain::rect((-1.0, 1.0), (-1.0, 1.0)), 30, 2);
        for kappa in [2.0, 8.0] {
            let op = const_plate_operator(kappa);
            for (i, v) in const_plate_generators(kappa, Variant::Amended).iter().enumerate() {
                let lam = infer_lambda(&op, v, &s).unwrap();
                assert!(determining_residuals(&op, v, &lam, &s, STRUCTURAL_TOL).pass, "V{}", i + 1);
                assert!(is_variational(v, &lam, &s, 1e-12).pass);
            }
            let original = const_plate_generators(kappa, Variant::Original);
            for i in [3, 5] {
                let v = &original[i];
                let ok = infer_lambda(&op, v, &s)
                    .map(|lam| determining_residuals(&op, v, &lam, &s, STRUCTURAL_TOL).pass)
                    .unwrap_or(false);
                assert!(!ok, "original V{} should fail", i + 1);
            }
        }
    }

    fn const_plate_samples() -> SampleSet {
        SampleSet::new(&Domain::rect((0.2, 1.2), (-1.0, 1.0)), 100, 4)
    }

    #[test]
    fn invariant_solution_basis() {
        let s = const_plate_samples();
        for kappa in [2.0, 8.0] {
            let op = const_plate_operator(kappa);
            for i in 0..4 {
                let mut c = [0.0; 4];
                c[i] = 1.0;
                let w = const_plate_invariant_solution(kappa, c, Variant::Amended);
                let r = residual_on_solution(&op, &w, &s, 1e-8).unwrap();
                assert!(r.pass, "kappa {kappa} C{}: {}", i + 1, r.max_abs);
            }
            let w = const_plate_invariant_solution(kappa, [0.0, 0.0, 0.0, 1.0], Variant::Original);
            assert!(!residual_on_solution(&op, &w, &s, 1e-8).unwrap().pass);
        }
    }

    #[test]
    fn reduced_ode_matches_substitution() {
        // D[cosh * u(s)] is proportional to the reduced operator applied to u,
        // with a factor that does not depend on u.
        let kappa = 2.0;
        let ode = const_plate_reduced_ode(kappa);
        let op = const_plate_operator(kappa);
        let us = [p("x1^3"), p("exp(x1)")];
        let pts = [[0.3, 0.4], [0.9, -0.7], [0.5, 0.1]];
        for pt in pts {
            let sv = ode.similarity.eval(pt);
            let ratios: Vec<f64> = us
                .iter()
                .map(|u| op.apply_to(&ode.lift(u)).eval(pt) / ode.residual_expr(u).eval([sv, 0.0]))
                .collect();
            assert!((ratios[0] - ratios[1]).abs() < 1e-9 * ratios[0].abs(), "{ratios:?}");
        }
        for u in const_plate_reduced_basis() {
            let r = ode.residual_expr(&u);
            for sv in [-0.8, -0.2, 0.4, 0.7] {
                assert!(r.eval([sv, 0.0]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn reduced_ode_integration_reproduces_basis() {
        let ode = const_plate_reduced_ode(2.0);
        for u in const_plate_reduced_basis() {
            let d: Vec<f64> = (0..4).map(|n| u.diff_n(n, 0).eval([0.0, 0.0])).collect();
            let sol = ode.integrate([d[0], d[1], d[2], d[3]], 0.0, -0.9, 0.9, OdeOptions::default()).unwrap();
            for i in 0..19 {
                let sv = -0.9 + 0.1 * i as f64;
                assert!((sol.eval(sv).unwrap()[0] - u.eval([sv, 0.0])).abs() < 1e-8, "{u} at {sv}");
            }
        }
    }

    #[test]
    fn pulled_back_solution_solves_e_omega() {
        let kappa: f64 = 8.0;
        let th = (kappa / 2.0).sqrt();
        let seed = AnalyticSeed::power(th).unwrap();
        let cov = to_constant_coefficients(&seed, [0.0.into(), th.into(), 0.0.into()], [1.0, 1.0]).unwrap();
        let d = Domain::rect((0.5, 2.0), (0.5, 2.0)).excluding(Exclusion::Disk {
            center: [0.5f64.sqrt(), 0.5f64.sqrt()],
            radius: 0.2,
        });
        let s = SampleSet::new(&d, 30, 8);
        let op = e_omega(&seed).operator();
        for i in 0..4 {
            let mut c = [0.0; 4];
            c[i] = 1.0;
            let w = cov.pull_back(&const_plate_invariant_solution(kappa, c, Variant::Amended)).unwrap();
            let r = residual_on_solution(&op, &w, &s, 1e-8).unwrap();
            assert!(r.pass, "C{}: {}", i + 1, r.max_abs);
        }
    }
}
