//! Numerical verification: sample sets, residual reports, randomized
//! identity batteries and the ODE integrator.

pub mod ode;
mod sample;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use ode::{OdeError, OdeOptions, ReducedOde, SampledSolution};
pub use sample::{Domain, Exclusion, SampleSet};

use crate::expr::{ExprError, Point, ScalarExpr};
use crate::jet::{euler_operator, JetError, JetExpr, JetPoint};
use crate::operator::{self, noether_operators, prolongation, reciprocity, CurrentPair, Operator4};
use crate::symmetry::VectorField;

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub max_abs: f64,
    pub mean_abs: f64,
    pub worst_point: Option<Point>,
    pub tolerance: f64,
    pub pass: bool,
}

impl VerifyReport {
    /// Aggregate pointwise residuals. NaN counts as an infinite residual.
    pub fn from_points(items: impl IntoIterator<Item = (Point, f64)>, tol: f64) -> Self {
        let mut max_abs: f64 = 0.0;
        let mut sum = 0.0;
        let mut n = 0usize;
        let mut worst_point = None;
        for (p, r) in items {
            let r = if r.is_nan() { f64::INFINITY } else { r.abs() };
            if worst_point.is_none() || r > max_abs {
                max_abs = max_abs.max(r);
                worst_point = Some(p);
            }
            sum += r;
            n += 1;
        }
        VerifyReport {
            max_abs,
            mean_abs: if n == 0 { 0.0 } else { sum / n as f64 },
            worst_point,
            tolerance: tol,
            pass: max_abs <= tol,
        }
    }

    pub fn merge(reports: &[VerifyReport]) -> VerifyReport {
        let worst = reports.iter().max_by(|a, b| a.max_abs.total_cmp(&b.max_abs));
        VerifyReport {
            max_abs: worst.map_or(0.0, |r| r.max_abs),
            mean_abs: if reports.is_empty() {
                0.0
            } else {
                reports.iter().map(|r| r.mean_abs).sum::<f64>() / reports.len() as f64
            },
            worst_point: worst.and_then(|r| r.worst_point),
            tolerance: worst.map_or(0.0, |r| r.tolerance),
            pass: reports.iter().all(|r| r.pass),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

fn sup_norm(e: &ScalarExpr, samples: &SampleSet, tol: f64) -> Result<VerifyReport, VerifyError> {
    let mut items = Vec::with_capacity(samples.len());
    for &p in &samples.points {
        items.push((p, e.try_eval(p)?));
    }
    Ok(VerifyReport::from_points(items, tol))
}

/// Sup-norm of `D[w]` over the samples.
pub fn residual_on_solution(op: &Operator4, w: &ScalarExpr, samples: &SampleSet, tol: f64) -> Result<VerifyReport, VerifyError> {
    sup_norm(&op.apply_to(w), samples, tol)
}

/// Sup-norm of `D_1 P^1 + D_2 P^2` evaluated on `w`.
pub fn conservation_check(current: &CurrentPair, w: &ScalarExpr, samples: &SampleSet, tol: f64) -> Result<VerifyReport, VerifyError> {
    let div = current.divergence()?.substitute_function(w);
    sup_norm(&div, samples, tol)
}

/// Evaluates a jet expression expected to vanish identically at random jet
/// points; residuals are relative to the magnitude of the largest term.
pub fn jet_identity(e: &JetExpr, rng: &mut ChaCha8Rng, n: usize, order: usize, tol: f64) -> VerifyReport {
    let items: Vec<(Point, f64)> = (0..n)
        .map(|_| {
            let p = JetPoint::random(rng, order);
            let (v, s) = e.eval_with_scale(&p);
            (p.x, v / s.max(1.0))
        })
        .collect();
    VerifyReport::from_points(items, tol)
}

/// Like [`jet_identity`], with the base points fixed to `points` (for
/// coefficients defined only on part of the plane).
pub fn jet_identity_on(e: &JetExpr, points: &[Point], rng: &mut ChaCha8Rng, order: usize, tol: f64) -> VerifyReport {
    let items: Vec<(Point, f64)> = points
        .iter()
        .map(|&x| {
            let mut p = JetPoint::random(rng, order);
            p.x = x;
            let (v, s) = e.eval_with_scale(&p);
            (x, v / s.max(1.0))
        })
        .collect();
    VerifyReport::from_points(items, tol)
}

/// Random jet polynomial of order `order`, degree at most two in the jet
/// coordinates, with polynomial coefficients.
pub fn random_lagrangian(rng: &mut ChaCha8Rng, order: usize) -> JetExpr {
    use crate::jet::JetCoord;
    use rand::Rng;
    let coords: Vec<JetCoord> = (0..=order).flat_map(|k| (0..=k).map(move |j| JetCoord::new(k, j))).collect();
    let mut parts = Vec::new();
    for _ in 0..4 {
        let a = coords[rng.gen_range(0..coords.len())];
        let b = coords[rng.gen_range(0..coords.len())];
        parts.push(JetExpr::monomial(&[a, b], operator::random_polynomial(rng, 1)));
    }
    let c = coords[rng.gen_range(0..coords.len())];
    parts.push(JetExpr::monomial(&[c], operator::random_polynomial(rng, 1)));
    JetExpr::sum(parts)
}

fn random_field(rng: &mut ChaCha8Rng) -> VectorField {
    VectorField {
        xi1: operator::random_polynomial(rng, 2),
        xi2: operator::random_polynomial(rng, 2),
        sigma: operator::random_polynomial(rng, 1),
        u: operator::random_polynomial(rng, 2),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityResult {
    pub name: &'static str,
    pub report: VerifyReport,
}

/// Noether identity, the divergence identity for `-w D[w]`, reciprocity,
/// `E((1/2) w D[w]) = D[w]` and self-adjointness of symmetrized operators,
/// each over `n_ops` random operators (or Lagrangians) and `n_points` random
/// jets.
pub fn identity_battery(seed: u64, n_ops: usize, n_points: usize) -> Result<Vec<IdentityResult>, JetError> {
    let tol = crate::symmetry::STRUCTURAL_TOL;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noet = Vec::new();
    let mut di = Vec::new();
    let mut rec = Vec::new();
    let mut el = Vec::new();
    let mut sa = Vec::new();
    for _ in 0..n_ops {
        // NoetId: pr X(L) + (div xi) L - Q E(L) - D_a N^a(L) = 0
        let l = random_lagrangian(&mut rng, 2);
        let x = random_field(&mut rng);
        let q = x.characteristic();
        let n = noether_operators(&q, &x.xi(), &l)?;
        let lhs = JetExpr::sum([
            prolongation(&x, &l)?,
            l.scale(&x.divergence()),
            q.mul(&euler_operator(&l)?).scale_f(-1.0),
            n.divergence()?.scale_f(-1.0),
        ]);
        noet.push(jet_identity(&lhs, &mut rng, n_points, 8, tol));

        let op = Operator4::random_polynomial(&mut rng, 1).symmetrize();
        let d = op.apply();
        let w = JetExpr::w();

        // DI: D_mu N^mu(-w D[w]) + w pr X(D[w]) + (eta + (div xi) w - 2Q) D[w] = 0
        let lw = w.mul(&d).scale_f(-1.0);
        let n = noether_operators(&q, &x.xi(), &lw)?;
        let eta = JetExpr::sum([w.scale(&x.sigma), JetExpr::constant(x.u.clone())]);
        let factor = JetExpr::sum([eta, w.scale(&x.divergence()), q.scale_f(-2.0)]);
        let lhs = JetExpr::sum([n.divergence()?, w.mul(&prolongation(&x, &d)?), factor.mul(&d)]);
        di.push(jet_identity(&lhs, &mut rng, n_points, 8, tol));

        // RecId: D_a P^a = v D[w] - w D[v]
        let v = operator::random_polynomial(&mut rng, 3);
        let p = reciprocity(&op, &v)?;
        let dv = op.apply_to(&v);
        let lhs = JetExpr::sum([p.divergence()?, d.scale(&-&v), w.scale(&dv)]);
        rec.push(jet_identity(&lhs, &mut rng, n_points, 8, tol));

        // E-L-1
        let lhs = euler_operator(&op.lagrangian())?.sub(&d);
        el.push(jet_identity(&lhs, &mut rng, n_points, 8, tol));

        let r = op.is_self_adjoint(rand::Rng::gen(&mut rng));
        sa.push(VerifyReport {
            max_abs: r.max_residual,
            mean_abs: r.max_residual,
            worst_point: None,
            tolerance: tol,
            pass: r.pass,
        });
    }
    Ok(vec![
        IdentityResult {
            name: "noether identity",
            report: VerifyReport::merge(&noet),
        },
        IdentityResult {
            name: "divergence identity",
            report: VerifyReport::merge(&di),
        },
        IdentityResult {
            name: "reciprocity",
            report: VerifyReport::merge(&rec),
        },
        IdentityResult {
            name: "euler-lagrange",
            report: VerifyReport::merge(&el),
        },
        IdentityResult {
            name: "self-adjoint",
            report: VerifyReport::merge(&sa),
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_scalar;

    fn beam() -> Operator4 {
        Operator4::from_applied(|k, j| match (k, j) {
            (4, 0) | (2, 2) => ScalarExpr::one(),
            _ => ScalarExpr::zero(),
        })
    }

    #[test]
    fn residual_examples() {
        let s = SampleSet::new(&Domain::default(), 50, 1);
        let op = beam();
        assert!(residual_on_solution(&op, &parse_scalar("cos(x1 - x2)").unwrap(), &s, 1e-10).unwrap().pass);
        assert!(residual_on_solution(&Operator4::biharmonic(), &parse_scalar("x1*x2").unwrap(), &s, 1e-10)
            .unwrap()
            .pass);
        let bad = residual_on_solution(&op, &parse_scalar("cos(2*x1 - x2)").unwrap(), &s, 1e-10).unwrap();
        assert!(!bad.pass && bad.max_abs > 1.0);
    }

    #[test]
    fn domain_errors_surface() {
        let s = SampleSet::from_points(vec![[-1.0, 0.5]]);
        let r = residual_on_solution(&Operator4::biharmonic(), &parse_scalar("x1^(1/2)").unwrap(), &s, 1e-10);
        assert!(matches!(r, Err(VerifyError::Expr(_))));
    }

    #[test]
    fn battery_passes_small() {
        for r in identity_battery(7, 3, 16).unwrap() {
            assert!(r.report.pass, "{}: {}", r.name, r.report.max_abs);
        }
    }

    #[test]
    fn report_aggregation() {
        let r = VerifyReport::from_points([([0.0, 0.0], 1e-3), ([1.0, 1.0], -2e-3), ([2.0, 2.0], f64::NAN)], 1e-2);
        assert!(!r.pass);
        assert_eq!(r.worst_point, Some([2.0, 2.0]));
        let r = VerifyReport::from_points([([0.0, 0.0], 1e-3), ([1.0, 1.0], -2e-3)], 1e-2);
        assert!(r.pass && (r.max_abs - 2e-3).abs() < 1e-18 && (r.mean_abs - 1.5e-3).abs() < 1e-18);
    }
}
