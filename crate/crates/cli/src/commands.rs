use liesym::expr::ScalarExpr;
use liesym::jet::JetExpr;
use liesym::operator::{self, CurrentPair, Operator4};
use liesym::plate::{self, Variant};
use liesym::rod::{self, Profile, ReductionKind, RodEquation};
use liesym::symmetry::{self, VectorField};
use liesym::verify::{self, Domain, OdeOptions, ReducedOde, SampleSet, VerifyReport};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::spec::{self, Loaded, Model};
use crate::CliError;

/// Tolerance for lifts of numerically integrated profiles.
pub const SAMPLED_TOL: f64 = 1e-5;

#[derive(Default)]
pub struct Outcome {
    pub pass: bool,
    pub reports: Vec<Value>,
    pub text: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            pass: true,
            ..Default::default()
        }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.text.push(s.into());
    }

    fn info(&mut self, name: &str, detail: Value) {
        self.reports.push(json!({ "name": name, "detail": detail }));
    }

    fn check(&mut self, name: &str, pass: bool, detail: Value) {
        self.pass &= pass;
        self.text.push(format!("[{}] {name}", if pass { "pass" } else { "FAIL" }));
        self.reports.push(json!({ "name": name, "pass": pass, "detail": detail }));
    }

    fn check_report(&mut self, name: &str, r: &VerifyReport) {
        let detail = serde_json::to_value(r).expect("report serializes");
        self.pass &= r.pass;
        self.text.push(format!(
            "[{}] {name}: max residual {:.3e} (tol {:.0e})",
            if r.pass { "pass" } else { "FAIL" },
            r.max_abs,
            r.tolerance
        ));
        self.reports.push(json!({ "name": name, "pass": r.pass, "detail": detail }));
    }
}

fn failure(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

fn spec_err(e: impl std::fmt::Display) -> CliError {
    CliError::Spec(e.to_string())
}

fn field_json(x: &VectorField) -> Value {
    json!({
        "xi1": x.xi1.to_string(),
        "xi2": x.xi2.to_string(),
        "sigma": x.sigma.to_string(),
        "u": x.u.to_string(),
    })
}

fn current_json(c: &CurrentPair) -> Value {
    json!({ "p1": c.p[0].to_string(), "p2": c.p[1].to_string() })
}

pub struct FieldArgs {
    pub xi1: Option<String>,
    pub xi2: Option<String>,
    pub sigma: Option<String>,
    pub u: Option<String>,
}

impl FieldArgs {
    pub fn given(&self) -> bool {
        self.xi1.is_some() || self.xi2.is_some() || self.sigma.is_some() || self.u.is_some()
    }

    pub fn field(&self) -> Result<VectorField, CliError> {
        let get = |v: &Option<String>, what: &str| spec::expr(v.as_deref().unwrap_or("0"), what);
        Ok(VectorField {
            xi1: get(&self.xi1, "xi1")?,
            xi2: get(&self.xi2, "xi2")?,
            sigma: get(&self.sigma, "sigma")?,
            u: get(&self.u, "u")?,
        })
    }
}

fn lambda_for(model: &Model, op: &Operator4, x: &VectorField, samples: &SampleSet) -> Result<ScalarExpr, CliError> {
    match model {
        Model::Rod(_) => Ok(rod::rod_lambda(x)),
        _ => symmetry::infer_lambda(op, x, samples).map_err(failure),
    }
}

/// `sigma + div xi + lambda` over the samples: zero, a constant `c` (fixed
/// by adding `-c/2 X0`), or neither.
fn variational_verdict(x: &VectorField, lambda: &ScalarExpr, samples: &SampleSet, tol: f64) -> (bool, String, Value) {
    let d = symmetry::variational_defect(x, lambda);
    let vals: Vec<f64> = samples.points.iter().map(|&p| d.eval(p)).collect();
    let max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max <= tol {
        return (true, "variational".into(), json!({ "verdict": "variational", "max_abs": max }));
    }
    let c = vals[0];
    if vals.iter().all(|v| (v - c).abs() <= tol) {
        let a = -c / 2.0;
        return (
            false,
            format!("needs {a} X0 added to be variational"),
            json!({ "verdict": "needs_x0", "x0_coefficient": a, "defect": c }),
        );
    }
    (false, "not variational".into(), json!({ "verdict": "not_variational", "max_abs": max }))
}

pub fn classify(l: &Loaded, tol: f64) -> Result<Outcome, CliError> {
    let mut out = Outcome::new();
    out.line(format!("{} ({})", l.name, l.model.kind()));
    match &l.model {
        Model::Rod(eq) => {
            let cls = rod::classify(eq).map_err(spec_err)?;
            let eqn = RodEquation {
                kappa: cls.kappa.clone(),
                ..eq.clone()
            };
            out.line(format!(
                "subclass {}, kappa form {}, table row {}",
                cls.subclass,
                cls.kappa.tag(),
                cls.row.map_or("none (kernel only)".to_string(), |r| r.to_string())
            ));
            out.info(
                "classification",
                json!({
                    "subclass": cls.subclass.to_string(),
                    "row": cls.row,
                    "kappa_form": cls.kappa.tag(),
                    "notes": cls.notes,
                }),
            );
            for n in &cls.notes {
                out.line(format!("note: {n}"));
            }
            let op = eqn.operator().map_err(spec_err)?;
            for g in &cls.generators {
                out.line(format!("  {}  =  {}  [{}]", g.label, g.combo_string(), g.variational));
                let rep = symmetry::determining_residuals(&op, &g.field, &rod::rod_lambda(&g.field), &l.samples, tol);
                let vf = g.variational_field();
                let var = symmetry::is_variational(&vf, &rod::rod_lambda(&vf), &l.samples, tol);
                let pass = rep.pass && var.pass;
                out.check(
                    &format!("generator {}", g.label),
                    pass,
                    json!({
                        "label": g.label,
                        "combo": g.combo,
                        "field": field_json(&g.field),
                        "variational": g.variational.to_string(),
                        "determining_max_abs": rep.max_abs,
                        "variational_max_abs": var.max_abs,
                    }),
                );
            }
            let span = rod::span_symmetry_count(&eqn, &l.samples).map_err(spec_err)?;
            let ok = cls.row.is_none() || span == cls.generators.len();
            out.check(
                &format!("symmetries in the span of the Y fields: {span}"),
                ok,
                json!({ "span_symmetries": span, "listed": cls.generators.len() }),
            );
        }
        Model::Plate { eq, seed, const_plate_kappa } => {
            let op = l.model.operator()?;
            if let Some(k) = const_plate_kappa {
                out.line(format!("constant-coefficient member with kappa = {k}"));
                for (i, v) in plate::const_plate_generators(*k, Variant::Amended).iter().enumerate() {
                    let lam = symmetry::infer_lambda(&op, v, &l.samples).map_err(failure)?;
                    let rep = symmetry::determining_residuals(&op, v, &lam, &l.samples, tol);
                    out.check(&format!("V{}", i + 1), rep.pass, json!({ "max_abs": rep.max_abs, "field": field_json(v) }));
                }
            }
            let pc = plate::classify(eq, &l.samples);
            out.line(format!(
                "invariants vanish: s1 {}, s2 {}, s3 {}; group dimension at most {}; symmetries found in span of X1..X6: {}",
                pc.vanishing[0], pc.vanishing[1], pc.vanishing[2], pc.max_group_dim, pc.span_symmetries
            ));
            for n in &pc.notes {
                out.line(format!("note: {n}"));
            }
            if pc.max_group_dim == 6 {
                out.line("6-parameter, E_omega type");
            }
            out.info(
                "plate classification",
                json!({
                    "vanishing": pc.vanishing,
                    "max_abs": pc.max_abs,
                    "max_group_dim": pc.max_group_dim,
                    "span_symmetries": pc.span_symmetries,
                    "invariant_coordinates": pc.invariant_coordinates,
                    "notes": pc.notes,
                }),
            );
            if let Some(seed) = seed {
                for (i, z) in plate::e_omega_generators(seed).iter().enumerate() {
                    let lam = symmetry::infer_lambda(&op, z, &l.samples).map_err(failure)?;
                    let rep = symmetry::determining_residuals(&op, z, &lam, &l.samples, tol);
                    let var = symmetry::is_variational(z, &lam, &l.samples, tol);
                    out.check(
                        &format!("Z{}", i + 1),
                        rep.pass && var.pass,
                        json!({ "determining_max_abs": rep.max_abs, "variational_max_abs": var.max_abs, "field": field_json(z) }),
                    );
                }
            }
        }
        Model::General(op) => {
            let sa = op.is_self_adjoint(0x5eed);
            out.line(format!(
                "self-adjoint: {} (residual {:.3e})",
                sa.pass, sa.max_residual
            ));
            out.info("self_adjoint", json!({ "pass": sa.pass, "max_residual": sa.max_residual }));
            out.line("kernel-only: X0 and solution symmetries; use check-symmetry to test a candidate field");
        }
    }
    Ok(out)
}

pub fn check_symmetry(l: &Loaded, f: &FieldArgs, tol: f64) -> Result<Outcome, CliError> {
    if !f.given() {
        return Err(CliError::Spec("check-symmetry needs at least one of --xi1, --xi2, --sigma, --u".into()));
    }
    let x = f.field()?;
    let op = l.model.operator()?;
    let mut out = Outcome::new();
    out.line(format!("field: {x}"));
    let lam = lambda_for(&l.model, &op, &x, &l.samples)?;
    let rep = symmetry::determining_residuals(&op, &x, &lam, &l.samples, tol);
    let worst = rep.worst_component().map(|c| c.label()).unwrap_or_default();
    out.line(format!("lambda = {lam}"));
    out.check(
        "determining equations",
        rep.pass,
        json!({
            "lambda": lam.to_string(),
            "max_abs": rep.max_abs,
            "worst_component": worst,
            "worst_point": rep.worst_point,
        }),
    );
    if !rep.pass {
        out.line(format!("worst component {worst}, residual {:.3e}", rep.max_abs));
    }
    if !x.u.is_zero() {
        let r = verify::residual_on_solution(&op, &x.u, &l.samples, tol).map_err(failure)?;
        out.check_report("u solves the equation", &r);
    }
    if rep.pass {
        let (ok, verdict, detail) = variational_verdict(&x, &lam, &l.samples, tol);
        out.line(format!("variational: {verdict}"));
        out.info("variational", json!({ "variational": ok, "verdict": detail }));
    }
    Ok(out)
}

fn verify_current(
    out: &mut Outcome,
    name: &str,
    current: &CurrentPair,
    q: &JetExpr,
    op: &Operator4,
    w: Option<&ScalarExpr>,
    samples: &SampleSet,
    rng: &mut ChaCha8Rng,
    tol: f64,
) -> Result<(), CliError> {
    let lhs = current.divergence().map_err(failure)?.sub(&q.mul(&op.apply()));
    let r = verify::jet_identity_on(&lhs, &samples.points, rng, 6, tol);
    out.check_report(&format!("{name}: D_a P^a = Q D[w]"), &r);
    if let Some(w) = w {
        let r = verify::conservation_check(current, w, samples, tol).map_err(failure)?;
        out.check_report(&format!("{name}: conserved on the solution"), &r);
    }
    Ok(())
}

pub struct CurrentsArgs {
    pub table: bool,
    pub u: Option<String>,
    pub field: FieldArgs,
    pub verify: Option<String>,
}

pub fn currents(l: &Loaded, a: &CurrentsArgs, seed: u64, tol: f64) -> Result<Outcome, CliError> {
    let op = l.model.operator()?;
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = match &a.verify {
        Some(s) => Some(spec::expr(s, "--verify")?),
        None => l.solution.clone(),
    };
    if let Some(w) = &w {
        let r = verify::residual_on_solution(&op, w, &l.samples, tol).map_err(failure)?;
        out.check_report(&format!("w = {w} solves the equation"), &r);
    }
    let w = w.as_ref();
    if let Some(u) = &a.u {
        let u = spec::expr(u, "--u")?;
        let r = verify::residual_on_solution(&op, &u, &l.samples, tol).map_err(failure)?;
        out.check_report(&format!("u = {u} solves the equation"), &r);
        let cur = match &l.model {
            Model::Rod(eq) => rod::p_u_current(eq, &u),
            _ => operator::current_for_solution_symmetry(&op, &u).map_err(failure)?,
        };
        out.line(format!("P1 = {}", cur.p[0]));
        out.line(format!("P2 = {}", cur.p[1]));
        out.info("current", json!({ "u": u.to_string(), "current": current_json(&cur) }));
        verify_current(&mut out, "P_u", &cur, &JetExpr::constant(u.clone()), &op, w, &l.samples, &mut rng, tol)?;
        return Ok(out);
    }
    if a.field.given() {
        let x = a.field.field()?;
        let cur = operator::current_for_variational_symmetry(&op, &x, &l.samples).map_err(failure)?;
        out.line(format!("field: {x}"));
        out.line(format!("P1 = {}", cur.p[0]));
        out.line(format!("P2 = {}", cur.p[1]));
        out.info("current", json!({ "field": field_json(&x), "current": current_json(&cur) }));
        verify_current(&mut out, "field current", &cur, &x.characteristic(), &op, w, &l.samples, &mut rng, tol)?;
        return Ok(out);
    }
    let Model::Rod(eq) = &l.model else {
        return Err(CliError::Spec("currents needs --u or a field (--xi1/--xi2/--sigma) for this equation kind".into()));
    };
    let beam = eq.chi11 == 0.0 && eq.chi12 == 0.0 && matches!(eq.kappa.normalize(), rod::KappaForm::Zero);
    if beam {
        out.line(format!("homogeneous beam EJ = {}, m = {}", eq.gamma, eq.chi22));
        for law in rod::beam_conservation_laws(eq.gamma, eq.chi22) {
            out.line(format!("{} ({}):", law.name, law.generator_label));
            out.line(format!("  density = {}", law.psi));
            out.line(format!("  flux    = {}", law.flux));
            out.info(
                law.name,
                json!({ "generator": law.generator_label, "density": law.psi.to_string(), "flux": law.flux.to_string() }),
            );
            verify_current(&mut out, law.name, &law.current(), &law.q, &op, w, &l.samples, &mut rng, tol)?;
        }
        if !a.table {
            return Ok(out);
        }
    }
    let laws = rod::rod_conservation_laws(eq).map_err(spec_err)?;
    if laws.is_empty() {
        out.line("no tabulated conservation laws: kernel-only classification");
    }
    for law in laws {
        let name = format!("law for {}", law.generator.label);
        out.line(format!("{name} ({}):", law.generator.combo_string()));
        out.line(format!("  P1 = {}", law.current.p[0]));
        out.line(format!("  P2 = {}", law.current.p[1]));
        out.info(&name, json!({ "combo": law.generator.combo, "current": current_json(&law.current) }));
        verify_current(&mut out, &name, &law.current, &law.characteristic, &op, w, &l.samples, &mut rng, tol)?;
    }
    Ok(out)
}

pub struct ReduceArgs {
    pub kind: String,
    pub c: f64,
    pub sign: f64,
    pub profile: Option<String>,
    pub integrate: bool,
    pub init: [f64; 4],
    pub s0: Option<f64>,
    pub coeffs: [f64; 4],
}

fn ode_string(ode: &ReducedOde) -> String {
    let primes = ["U", "U'", "U''", "U'''", "U''''"];
    let mut out = String::new();
    for n in (0..5).rev() {
        let c = &ode.coeffs[n];
        if c.is_zero() {
            continue;
        }
        let c = if c.is_constant() { ScalarExpr::constant(c.eval([0.0, 0.0])) } else { c.clone() };
        let (neg, c) = match c.as_constant() {
            Some(v) if v < 0.0 => (true, c.neg()),
            _ => (false, c.clone()),
        };
        let cs = c.display_with(["s", "x2"]).to_string();
        let term = if c.is_one() {
            primes[n].to_string()
        } else if c.is_constant() || !cs.contains([' ', '+', '-']) {
            format!("{cs} {}", primes[n])
        } else {
            format!("({cs}) {}", primes[n])
        };
        match (out.is_empty(), neg) {
            (true, false) => out.push_str(&term),
            (true, true) => out.push_str(&format!("-{term}")),
            (false, false) => out.push_str(&format!(" + {term}")),
            (false, true) => out.push_str(&format!(" - {term}")),
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    format!("{out} = 0")
}

pub fn reduce(l: &Loaded, a: &ReduceArgs, tol: f64) -> Result<Outcome, CliError> {
    let mut out = Outcome::new();
    let op = l.model.operator()?;
    match (&l.model, a.kind.as_str()) {
        (Model::Rod(eq), "travelling-wave" | "y3" | "y4") => {
            let kind = match a.kind.as_str() {
                "travelling-wave" => ReductionKind::TravellingWave { c: a.c, sign: a.sign },
                "y3" => ReductionKind::Y3,
                _ => ReductionKind::Y4,
            };
            let red = rod::reduce(eq, kind, &l.samples).map_err(spec_err)?;
            let ode = &red.ode;
            out.line(format!("{}; here s = {}", ode.label, ode.similarity));
            out.line(ode_string(ode));
            if red.self_similar {
                out.line("self-similar case");
            }
            out.info(
                "reduced equation",
                json!({
                    "label": ode.label,
                    "similarity": ode.similarity.to_string(),
                    "coefficients": ode.coeffs.iter().map(|c| c.display_with(["s", "x2"]).to_string()).collect::<Vec<_>>(),
                    "equation": ode_string(ode),
                    "self_similar": red.self_similar,
                }),
            );
            if let Some(p) = &a.profile {
                let u = spec::profile_expr(p, "--profile")?;
                let res = ode.residual_expr(&u);
                let (lo, hi) = rod::similarity_range(ode, &l.samples);
                let pts: Vec<_> = (0..=32).map(|i| [lo + (hi - lo) * i as f64 / 32.0, 0.0]).collect();
                let r = VerifyReport::from_points(pts.iter().map(|&p| (p, res.eval(p))), tol);
                out.check_report(&format!("U = {p} solves the reduced equation"), &r);
                let r = rod::lift_and_verify(&op, ode, Profile::Closed(&u), &l.samples, tol).map_err(failure)?;
                out.check_report("lifted profile solves the equation", &r);
            }
            if a.integrate {
                let (lo, hi) = rod::similarity_range(ode, &l.samples);
                let pad = 0.05 * (hi - lo).max(1e-3);
                let s0 = a.s0.unwrap_or(0.5 * (lo + hi));
                let sol = ode
                    .integrate(a.init, s0, (lo - pad).min(s0), (hi + pad).max(s0), OdeOptions::default())
                    .map_err(failure)?;
                let r = rod::lift_and_verify(&op, ode, Profile::Sampled(&sol), &l.samples, SAMPLED_TOL.max(tol))
                    .map_err(failure)?;
                out.check_report("integrated profile lifts to a solution", &r);
            }
        }
        (Model::Plate { const_plate_kappa: Some(k), .. }, "plate-invariant") => {
            let ode = plate::const_plate_reduced_ode(*k);
            out.line(format!("{}; here s = {}", ode.label, ode.similarity));
            out.line(ode_string(&ode));
            out.info(
                "reduced equation",
                json!({ "label": ode.label, "similarity": ode.similarity.to_string(), "equation": ode_string(&ode) }),
            );
            let w = plate::const_plate_invariant_solution(*k, a.coeffs, Variant::Amended);
            out.line(format!("W = {w}"));
            let r = verify::residual_on_solution(&op, &w, &l.samples, tol.max(1e-8)).map_err(failure)?;
            out.check_report("invariant solution", &r);
        }
        (_, k) => {
            return Err(CliError::Spec(format!(
                "reduction {k:?} does not apply to this {} equation (rods: travelling-wave, y3, y4; constant-coefficient plate: plate-invariant)",
                l.model.kind()
            )))
        }
    }
    Ok(out)
}

pub fn transform(l: &Loaded, k: [Complex64; 3], base: [f64; 2], tol: f64) -> Result<Outcome, CliError> {
    let Model::Plate { seed: Some(seed), .. } = &l.model else {
        return Err(CliError::Spec("transform needs a plate spec with form = \"e_omega\"".into()));
    };
    let op = l.model.operator()?;
    let mut out = Outcome::new();
    let cov = plate::to_constant_coefficients(seed, k, base).map_err(spec_err)?;
    out.line(format!("f = {}", cov.f));
    out.line(format!("map: {:?}", cov.kind));
    if let Some(y) = &cov.y {
        out.line(format!("y1 = {}", y[0]));
        out.line(format!("y2 = {}", y[1]));
    }
    out.line(format!("W = w * ({})", cov.multiplier));
    out.info(
        "change of variables",
        json!({
            "f": cov.f.to_string(),
            "kind": format!("{:?}", cov.kind),
            "y": cov.y.as_ref().map(|y| [y[0].to_string(), y[1].to_string()]),
            "multiplier": cov.multiplier.to_string(),
        }),
    );
    let t = cov.transform(&op).map_err(failure)?;
    match plate::constant_operator(&t, &l.samples, tol) {
        Ok(c) => {
            let mut coeffs = Vec::new();
            for kk in (0..=4).rev() {
                for j in 0..=kk {
                    let v = c.applied(kk, j);
                    if !v.is_zero() {
                        let name = format!("W{}", liesym::jet::JetCoord::new(kk, j).subscript());
                        coeffs.push((name, v.as_constant().unwrap_or(f64::NAN)));
                    }
                }
            }
            let mut s = String::new();
            for (i, (n, v)) in coeffs.iter().enumerate() {
                match (i, *v < 0.0) {
                    (0, _) => s.push_str(&format!("{v} {n}")),
                    (_, true) => s.push_str(&format!(" - {} {n}", -v)),
                    (_, false) => s.push_str(&format!(" + {v} {n}")),
                }
            }
            out.line(format!("transformed: {s} = 0"));
            out.check("constant coefficients", true, json!({ "coefficients": coeffs }));
        }
        Err(spread) => out.check("constant coefficients", false, json!({ "max_spread": spread })),
    }
    Ok(out)
}

/// Identity battery plus the table-driven suites.
pub fn selfcheck(seed: u64, tol: f64) -> Result<Outcome, CliError> {
    let mut out = Outcome::new();
    for r in verify::identity_battery(seed, 20, 64).map_err(failure)? {
        out.check_report(r.name, &r.report);
    }
    let s = SampleSet::new(&Domain::rect((0.5, 2.0), (0.5, 2.0)), 32, seed);

    let bih = Operator4::biharmonic();
    let ok = plate::biharmonic_generators().iter().all(|x| {
        symmetry::infer_lambda(&bih, x, &s)
            .map(|lam| symmetry::determining_residuals(&bih, x, &lam, &s, tol).pass)
            .unwrap_or(false)
    });
    out.check("biharmonic generators X0..X6", ok, json!({}));

    for (i, eq) in crate::presets::table_rows().into_iter().enumerate() {
        let cls = rod::classify(&eq).map_err(spec_err)?;
        let reps = rod::verify_generators(&eq, &cls, &s).map_err(spec_err)?;
        let mut ok = cls.row == Some(i as u8 + 1) && reps.iter().all(|r| r.pass);
        let op = eq.operator().map_err(spec_err)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i as u64);
        for law in rod::rod_conservation_laws(&eq).map_err(spec_err)? {
            let lhs = law.current.divergence().map_err(failure)?.sub(&law.characteristic.mul(&op.apply()));
            ok &= verify::jet_identity_on(&lhs, &s.points, &mut rng, 6, tol).pass;
        }
        out.check(&format!("rod table row {}", i + 1), ok, json!({ "row": cls.row }));
    }

    let w = spec::expr("cos(x1 - x2)", "beam solution")?;
    let ok = rod::beam_conservation_laws(1.0, 1.0).iter().all(|law| {
        verify::conservation_check(&law.current(), &w, &s, tol)
            .map(|r| r.pass)
            .unwrap_or(false)
    });
    out.check("beam conservation laws", ok, json!({}));

    let seed8 = plate::AnalyticSeed::power(2.0).map_err(failure)?;
    let op = plate::e_omega(&seed8).operator();
    let ok = plate::e_omega_generators(&seed8).iter().all(|z| {
        symmetry::infer_lambda(&op, z, &s)
            .map(|lam| {
                symmetry::determining_residuals(&op, z, &lam, &s, tol).pass
                    && symmetry::is_variational(z, &lam, &s, tol).pass
            })
            .unwrap_or(false)
    });
    out.check("E_omega generators (omega = z^2)", ok, json!({}));

    let ts = SampleSet::new(&Domain::rect((0.2, 1.2), (-1.0, 1.0)), 32, seed);
    let mut ok = true;
    for kappa in [2.0, 8.0] {
        for i in 0..4 {
            let mut c = [0.0; 4];
            c[i] = 1.0;
            let w = plate::const_plate_invariant_solution(kappa, c, Variant::Amended);
            ok &= verify::residual_on_solution(&plate::const_plate_operator(kappa), &w, &ts, 1e-8)
                .map(|r| r.pass)
                .unwrap_or(false);
        }
    }
    out.check("invariant solutions of the constant-coefficient plate", ok, json!({}));
    Ok(out)
}
