//! Fourth-order linear operators
//! `D[w] = A4 w_(4) + A3 w_(3) + A2 w_(2) + A1 w_(1) + A0 w` with symmetric
//! coefficient tensors, their adjoints, Lagrangians and Noether operators.
//!
//! Tensor components are stored per canonical slot `(k, j)`: `slot(k, j)` is
//! the component with `j` indices equal to 2. Lowering to jet coordinates
//! multiplies by the number of index orderings, so the biharmonic operator has
//! `A4 = (1, 0, 1/3, 0, 1)` and applies as `w_1111 + 2 w_1122 + w_2222`.

use std::collections::HashMap;

use rand::Rng;

use crate::expr::{Point, ScalarExpr};
use crate::jet::{binomial, euler_operator, JetCoord, JetError, JetExpr, JetPoint};
use crate::symmetry::{self, VectorField};
use crate::verify::SampleSet;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OperatorError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("operator is not self-adjoint (max residual {residual:e})")]
    NotSelfAdjoint { residual: f64 },
    #[error("field is not a variational symmetry: {0}")]
    NotVariational(String),
    #[error("current retains fourth-order terms after cancellation")]
    OrderNotReduced,
}

#[derive(Clone, Debug)]
pub struct Operator4 {
    /// `coeffs[k][j]`, `j = 0..=k`.
    coeffs: [Vec<ScalarExpr>; 5],
}

impl Operator4 {
    pub fn zero() -> Self {
        Operator4 {
            coeffs: std::array::from_fn(|k| vec![ScalarExpr::zero(); k + 1]),
        }
    }

    /// Build from tensor slots, highest order first.
    pub fn from_slots(
        a4: [ScalarExpr; 5],
        a3: [ScalarExpr; 4],
        a2: [ScalarExpr; 3],
        a1: [ScalarExpr; 2],
        a0: ScalarExpr,
    ) -> Self {
        Operator4 {
            coeffs: [vec![a0], a1.to_vec(), a2.to_vec(), a3.to_vec(), a4.to_vec()],
        }
    }

    /// Build from the coefficients of the jet coordinates `w_(k,j)` in the
    /// applied operator.
    pub fn from_applied(f: impl Fn(usize, usize) -> ScalarExpr) -> Self {
        let mut op = Self::zero();
        for k in 0..=4 {
            for j in 0..=k {
                op.coeffs[k][j] = &f(k, j) / (binomial(k, j) as f64);
            }
        }
        op
    }

    pub fn biharmonic() -> Self {
        let mut op = Self::zero();
        op.coeffs[4][0] = ScalarExpr::one();
        op.coeffs[4][2] = ScalarExpr::ratio(1, 3);
        op.coeffs[4][4] = ScalarExpr::one();
        op
    }

    pub fn slot(&self, k: usize, j: usize) -> &ScalarExpr {
        &self.coeffs[k][j]
    }

    pub fn set_slot(&mut self, k: usize, j: usize, e: ScalarExpr) {
        self.coeffs[k][j] = e;
    }

    /// Tensor component for an index tuple with entries 0 (`x1`) or 1 (`x2`).
    pub fn tensor(&self, idx: &[usize]) -> &ScalarExpr {
        let j = idx.iter().filter(|&&i| i == 1).count();
        &self.coeffs[idx.len()][j]
    }

    /// Applied coefficient of `w_(k,j)`.
    pub fn applied(&self, k: usize, j: usize) -> ScalarExpr {
        &self.coeffs[k][j] * (binomial(k, j) as f64)
    }

    pub fn apply(&self) -> JetExpr {
        let mut parts = Vec::new();
        for k in 0..=4 {
            for j in 0..=k {
                if self.coeffs[k][j].is_zero() {
                    continue;
                }
                parts.push(JetExpr::monomial(&[JetCoord::new(k, j)], self.applied(k, j)));
            }
        }
        JetExpr::sum(parts)
    }

    /// `D[u]` for a concrete field.
    pub fn apply_to(&self, u: &ScalarExpr) -> ScalarExpr {
        self.apply().substitute_function(u)
    }

    pub fn add(&self, o: &Operator4) -> Self {
        let mut out = self.clone();
        for k in 0..=4 {
            for j in 0..=k {
                out.coeffs[k][j] = &self.coeffs[k][j] + &o.coeffs[k][j];
            }
        }
        out
    }

    pub fn scale(&self, c: &ScalarExpr) -> Self {
        let mut out = self.clone();
        for v in out.coeffs.iter_mut().flatten() {
            *v = &*v * c;
        }
        out
    }

    /// Formal adjoint
    /// `D*[w] = D^4(A4 w) - D^3(A3 w) + D^2(A2 w) - D(A1 w) + A0 w`,
    /// in coefficient form.
    pub fn adjoint(&self) -> Self {
        let w = JetExpr::w();
        let mut parts = Vec::new();
        for k in 0..=4 {
            for j in 0..=k {
                let c = &self.coeffs[k][j];
                if c.is_zero() {
                    continue;
                }
                let weight = binomial(k, j) as f64 * if k % 2 == 1 { -1.0 } else { 1.0 };
                let d = w
                    .scale(c)
                    .total_derivative_n(k - j, j)
                    .expect("order 4 fits the default jet order");
                parts.push(d.scale_f(weight));
            }
        }
        let total = JetExpr::sum(parts);
        Operator4::from_applied(|k, j| total.coefficient(&[JetCoord::new(k, j)]))
    }

    /// `(D + D*) / 2`.
    pub fn symmetrize(&self) -> Self {
        self.add(&self.adjoint()).scale(&ScalarExpr::ratio(1, 2))
    }

    /// Randomized self-adjointness test: compares `D[w]` with `D*[w]` at 64
    /// random jet points.
    pub fn is_self_adjoint(&self, seed: u64) -> SelfAdjointReport {
        let lhs = self.apply();
        let rhs = self.adjoint().apply();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..64 {
            let p = JetPoint::random(&mut rng, 4);
            let (a, sa) = lhs.eval_with_scale(&p);
            let (b, sb) = rhs.eval_with_scale(&p);
            let r = (a - b).abs() / sa.max(sb).max(1.0);
            worst = if r.is_nan() { f64::INFINITY } else { worst.max(r) };
        }
        SelfAdjointReport {
            pass: worst <= SELF_ADJOINT_TOL,
            max_residual: worst,
        }
    }

    /// `L = (1/2) w D[w]`.
    pub fn lagrangian(&self) -> JetExpr {
        JetExpr::w().mul(&self.apply()).scale(&ScalarExpr::ratio(1, 2))
    }

    /// Operator with coefficients that are random polynomials of degree
    /// at most `degree` with coefficients in `[-1, 1]`.
    pub fn random_polynomial<R: Rng>(rng: &mut R, degree: usize) -> Self {
        let mut op = Self::zero();
        for k in 0..=4 {
            for j in 0..=k {
                op.coeffs[k][j] = random_polynomial(rng, degree);
            }
        }
        op
    }

    /// Evaluate all slots at a point (for reporting).
    pub fn slots_at(&self, p: Point) -> Vec<Vec<f64>> {
        self.coeffs.iter().map(|row| row.iter().map(|c| c.eval(p)).collect()).collect()
    }
}

/// Random polynomial in `x1`, `x2` of total degree at most `degree`.
pub fn random_polynomial<R: Rng>(rng: &mut R, degree: usize) -> ScalarExpr {
    let mut terms = Vec::new();
    for a in 0..=degree {
        for b in 0..=(degree - a) {
            let c = (rng.gen_range(-1.0..1.0f64) * 64.0).round() / 64.0;
            terms.push(ScalarExpr::constant(c) * ScalarExpr::x1().powi(a as i64) * ScalarExpr::x2().powi(b as i64));
        }
    }
    ScalarExpr::add_all(terms)
}

pub const SELF_ADJOINT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct SelfAdjointReport {
    pub pass: bool,
    pub max_residual: f64,
}

/// A pair of flux components `(P^1, P^2)`.
#[derive(Clone, Debug)]
pub struct CurrentPair {
    pub p: [JetExpr; 2],
}

impl CurrentPair {
    pub fn new(p1: JetExpr, p2: JetExpr) -> Self {
        CurrentPair { p: [p1, p2] }
    }

    /// `D_1 P^1 + D_2 P^2`.
    pub fn divergence(&self) -> Result<JetExpr, JetError> {
        Ok(self.p[0].total_derivative(0)?.add(&self.p[1].total_derivative(1)?))
    }

    pub fn order(&self) -> usize {
        self.p[0].order().max(self.p[1].order())
    }

    pub fn add(&self, o: &CurrentPair) -> Self {
        CurrentPair::new(self.p[0].add(&o.p[0]), self.p[1].add(&o.p[1]))
    }

    pub fn scale(&self, c: &ScalarExpr) -> Self {
        CurrentPair::new(self.p[0].scale(c), self.p[1].scale(c))
    }

    pub fn prune_zeros(&self, points: &[Point], tol: f64) -> Self {
        CurrentPair::new(self.p[0].prune_zeros(points, tol), self.p[1].prune_zeros(points, tol))
    }
}

/// Noether operators `N^alpha` applied to `L` for the characteristic `Q` and
/// horizontal components `xi`, truncated at the order of `L`. Derivatives with
/// respect to ordered index tuples use the symmetric convention.
pub fn noether_operators(q: &JetExpr, xi: &[ScalarExpr; 2], l: &JetExpr) -> Result<CurrentPair, JetError> {
    let ord = l.order();
    let mut dq: HashMap<(usize, usize), JetExpr> = HashMap::new();
    let mut out = Vec::with_capacity(2);
    for alpha in 0..2 {
        let mut parts = vec![l.scale(&xi[alpha])];
        for r in 0..ord {
            for s in 0..(ord - r) {
                let k = 1 + r + s;
                for jm in 0..=r {
                    for jn in 0..=s {
                        let jt = alpha + jm + jn;
                        let dl = l.partial(JetCoord::new(k, jt));
                        if dl.is_zero() {
                            continue;
                        }
                        let mut weight = (binomial(r, jm) * binomial(s, jn)) as f64 / binomial(k, jt) as f64;
                        if s % 2 == 1 {
                            weight = -weight;
                        }
                        let dqr = match dq.get(&(r, jm)) {
                            Some(e) => e.clone(),
                            None => {
                                let e = q.total_derivative_n(r - jm, jm)?;
                                dq.insert((r, jm), e.clone());
                                e
                            }
                        };
                        let dls = dl.total_derivative_n(s - jn, jn)?;
                        parts.push(dqr.mul(&dls).scale_f(weight));
                    }
                }
            }
        }
        out.push(JetExpr::sum(parts));
    }
    let p2 = out.pop().unwrap();
    let p1 = out.pop().unwrap();
    Ok(CurrentPair::new(p1, p2))
}

/// Current `N^alpha(-w D[w])` for the characteristic `v`, with `xi = 0`.
/// Its divergence is `v D[w] - w D[v]` for self-adjoint `D`.
pub fn reciprocity(op: &Operator4, v: &ScalarExpr) -> Result<CurrentPair, JetError> {
    let l = JetExpr::w().mul(&op.apply()).scale_f(-1.0);
    let z = [ScalarExpr::zero(), ScalarExpr::zero()];
    noether_operators(&JetExpr::constant(v.clone()), &z, &l)
}

/// Conserved current for the solution symmetry `X_u`. Requires `D`
/// self-adjoint; the divergence is `u D[w]` whenever `u` solves `D[u] = 0`.
pub fn current_for_solution_symmetry(op: &Operator4, u: &ScalarExpr) -> Result<CurrentPair, OperatorError> {
    let sa = op.is_self_adjoint(0x5eed);
    if !sa.pass {
        return Err(OperatorError::NotSelfAdjoint {
            residual: sa.max_residual,
        });
    }
    Ok(reciprocity(op, u)?)
}

/// Current for a variational symmetry, with the fourth-order terms removed by
/// the null-divergence correction. Its divergence is `Q D[w]`.
pub fn current_for_variational_symmetry(
    op: &Operator4,
    x: &VectorField,
    samples: &SampleSet,
) -> Result<CurrentPair, OperatorError> {
    let sa = op.is_self_adjoint(0x5eed);
    if !sa.pass {
        return Err(OperatorError::NotSelfAdjoint {
            residual: sa.max_residual,
        });
    }
    if !x.u.is_zero() {
        return Err(OperatorError::NotVariational(
            "field has an inhomogeneous part; use the solution-symmetry current".into(),
        ));
    }
    let lambda = symmetry::infer_lambda(op, x, samples).map_err(|e| OperatorError::NotVariational(e.to_string()))?;
    let rep = symmetry::determining_residuals(op, x, &lambda, samples, symmetry::STRUCTURAL_TOL);
    if !rep.pass {
        return Err(OperatorError::NotVariational(format!(
            "determining equations fail (max residual {:e})",
            rep.max_abs
        )));
    }
    let var = symmetry::is_variational(x, &lambda, samples, symmetry::STRUCTURAL_TOL);
    if !var.pass {
        return Err(OperatorError::NotVariational(format!(
            "divergence condition fails (max residual {:e})",
            var.max_abs
        )));
    }
    let l = op.lagrangian().scale_f(-1.0);
    let xi = [x.xi1.clone(), x.xi2.clone()];
    let n = noether_operators(&x.characteristic(), &xi, &l)?;
    // T^mu = A^{mu b c d} w_bcd
    let t: Vec<JetExpr> = (0..2)
        .map(|mu| {
            JetExpr::sum((0..=3).map(|j| {
                JetExpr::monomial(
                    &[JetCoord::new(3, j)],
                    op.slot(4, j + mu) * (binomial(3, j) as f64),
                )
            }))
        })
        .collect();
    let w = JetExpr::w();
    let mut corr = Vec::new();
    for alpha in 0..2 {
        let mut parts = Vec::new();
        for mu in 0..2 {
            let inner = w
                .mul(&t[mu])
                .scale(&xi[alpha])
                .sub(&w.mul(&t[alpha]).scale(&xi[mu]));
            parts.push(inner.total_derivative(mu)?.scale_f(0.5));
        }
        corr.push(JetExpr::sum(parts));
    }
    let b = CurrentPair::new(n.p[0].add(&corr[0]), n.p[1].add(&corr[1]));
    let b = b.prune_zeros(&samples.points, 1e-9);
    if b.order() > 3 {
        return Err(OperatorError::OrderNotReduced);
    }
    Ok(b)
}

/// Prolongation applied to a differential function:
/// `pr X(F) = sum_(k,j) D^(k,j) Q dF/dw_(k,j) + xi^a D_a F`.
pub fn prolongation(x: &VectorField, f: &JetExpr) -> Result<JetExpr, JetError> {
    let q = x.characteristic();
    let ord = f.order();
    let mut parts = Vec::new();
    for k in 0..=ord {
        for j in 0..=k {
            let p = f.partial(JetCoord::new(k, j));
            if p.is_zero() {
                continue;
            }
            parts.push(q.total_derivative_n(k - j, j)?.mul(&p));
        }
    }
    parts.push(f.total_derivative(0)?.scale(&x.xi1));
    parts.push(f.total_derivative(1)?.scale(&x.xi2));
    Ok(JetExpr::sum(parts))
}

/// `E(L)` for `L = (1/2) w D[w]`; equals `D[w]` when `D` is self-adjoint.
pub fn euler_lagrange(op: &Operator4) -> Result<JetExpr, JetError> {
    euler_operator(&op.lagrangian())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_scalar;
    use rand::SeedableRng;

    fn p(s: &str) -> ScalarExpr {
        parse_scalar(s).unwrap()
    }

    #[test]
    fn biharmonic_lowers_with_multiplicity() {
        let d = Operator4::biharmonic().apply();
        assert_eq!(d.coefficient(&[JetCoord::new(4, 0)]), ScalarExpr::one());
        assert_eq!(d.coefficient(&[JetCoord::new(4, 2)]), ScalarExpr::int(2));
        assert_eq!(d.coefficient(&[JetCoord::new(4, 4)]), ScalarExpr::one());
        assert_eq!(d.len(), 3);
    }

    #[test]
    fn adjoint_of_first_order_term() {
        // D = x1 d/dx1  =>  D* = -x1 d/dx1 - 1
        let mut op = Operator4::zero();
        op.set_slot(1, 0, ScalarExpr::x1());
        let a = op.adjoint();
        assert_eq!(*a.slot(1, 0), -ScalarExpr::x1());
        assert_eq!(*a.slot(0, 0), ScalarExpr::int(-1));
        assert!(!op.is_self_adjoint(1).pass);
    }

    #[test]
    fn adjoint_is_an_involution() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let op = Operator4::random_polynomial(&mut rng, 2);
        let back = op.adjoint().adjoint();
        let x = [0.3, -1.2];
        for (r1, r2) in op.slots_at(x).iter().zip(back.slots_at(x)) {
            for (a, b) in r1.iter().zip(r2) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symmetrized_operator_is_self_adjoint() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let op = Operator4::random_polynomial(&mut rng, 2);
        assert!(!op.is_self_adjoint(2).pass);
        assert!(op.symmetrize().is_self_adjoint(2).pass);
    }

    #[test]
    fn solution_current_for_beam() {
        // EJ w_1111 + m w_22, u = 1  =>  P = (EJ w_111, m w_2)
        let mut op = Operator4::zero();
        op.set_slot(4, 0, ScalarExpr::int(3));
        op.set_slot(2, 2, ScalarExpr::int(5));
        let c = current_for_solution_symmetry(&op, &ScalarExpr::one()).unwrap();
        assert_eq!(c.p[0].coefficient(&[JetCoord::new(3, 0)]), ScalarExpr::int(3));
        assert_eq!(c.p[0].len(), 1);
        assert_eq!(c.p[1].coefficient(&[JetCoord::new(1, 1)]), ScalarExpr::int(5));
        assert_eq!(c.p[1].len(), 1);
        // u = x2  =>  P^2 = m (x2 w_2 - w)
        let c = current_for_solution_symmetry(&op, &ScalarExpr::x2()).unwrap();
        let pt = JetPoint::random(&mut rand_chacha::ChaCha8Rng::seed_from_u64(1), 6);
        let expect = 5.0 * (pt.x[1] * pt.get(JetCoord::new(1, 1)) - pt.get(JetCoord::w()));
        assert!((c.p[1].eval(&pt) - expect).abs() < 1e-12);
    }

    #[test]
    fn non_self_adjoint_rejected_for_currents() {
        let mut op = Operator4::biharmonic();
        op.set_slot(1, 0, p("x1"));
        assert!(matches!(
            current_for_solution_symmetry(&op, &ScalarExpr::one()),
            Err(OperatorError::NotSelfAdjoint { .. })
        ));
    }
}
