//! Adaptive Dormand–Prince 5(4) integration, and fourth-order linear ODEs
//! with quintic-Hermite dense output.

use crate::expr::ScalarExpr;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("step limit exceeded at t = {t}")]
    TooManySteps { t: f64 },
    #[error("leading coefficient vanishes near s = {s}")]
    SingularLeading { s: f64 },
    #[error("s = {s} lies outside the integrated range [{lo}, {hi}]")]
    OutOfRange { s: f64, lo: f64, hi: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 200_000,
        }
    }
}

/// Accepted steps of an integration, in the order taken.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.y.last().expect("trajectory has the initial point")
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrate `y' = f(t, y)` from `t0` to `t1` (either direction).
pub fn dopri5<F>(mut f: F, t0: f64, y0: &[f64], t1: f64, opts: OdeOptions) -> Result<Trajectory, OdeError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut traj = Trajectory {
        t: vec![t0],
        y: vec![y0.to_vec()],
    };
    if span == 0.0 {
        return Ok(traj);
    }
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    f(t, &y, &mut k[0]);
    let mut h = (span * 1e-3).clamp(1e-8, 0.01) * dir;
    let mut steps = 0;
    while (t1 - t) * dir > 0.0 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(OdeError::TooManySteps { t });
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let stage = |coef: &[(usize, f64)], k: &Vec<Vec<f64>>, tmp: &mut Vec<f64>| {
            for i in 0..n {
                let mut s = y[i];
                for &(j, a) in coef {
                    s += h * a * k[j][i];
                }
                tmp[i] = s;
            }
        };
        stage(&[(0, A21)], &k, &mut tmp);
        let (head, tail) = k.split_at_mut(1);
        f(t + C2 * h, &tmp, &mut tail[0]);
        let _ = head;
        stage(&[(0, A31), (1, A32)], &k, &mut tmp);
        f(t + C3 * h, &tmp, &mut k[2]);
        stage(&[(0, A41), (1, A42), (2, A43)], &k, &mut tmp);
        f(t + C4 * h, &tmp, &mut k[3]);
        stage(&[(0, A51), (1, A52), (2, A53), (3, A54)], &k, &mut tmp);
        f(t + C5 * h, &tmp, &mut k[4]);
        stage(&[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)], &k, &mut tmp);
        f(t + h, &tmp, &mut k[5]);
        let mut ynew = vec![0.0; n];
        stage(&[(0, B1), (2, B3), (3, B4), (4, B5), (5, B6)], &k, &mut ynew);
        f(t + h, &ynew, &mut k[6]);
        let mut err: f64 = 0.0;
        for i in 0..n {
            let e = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            if ynew.iter().all(|v| v.is_finite()) {
                err = 1e10;
            } else {
                h *= 0.25;
                if h.abs() < 1e-14 * t.abs().max(1.0) {
                    return Err(OdeError::NonFinite { t });
                }
                continue;
            }
        }
        if err <= 1.0 {
            t += h;
            y = ynew;
            k.swap(0, 6);
            traj.t.push(t);
            traj.y.push(y.clone());
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(OdeError::StepUnderflow { t });
        }
    }
    Ok(traj)
}

/// Linear fourth-order ODE `c4 U'''' + c3 U''' + c2 U'' + c1 U' + c0 U = 0`
/// in the variable `s` (written as `x1` inside the coefficients), together
/// with the lift back to the plane: `w(x) = multiplier(x) * U(s(x))`.
#[derive(Clone, Debug)]
pub struct ReducedOde {
    /// `coeffs[n]` multiplies `U^(n)`.
    pub coeffs: [ScalarExpr; 5],
    pub similarity: ScalarExpr,
    pub multiplier: ScalarExpr,
    pub label: String,
}

impl ReducedOde {
    /// Residual of the ODE for a closed-form profile `u(s)` (variable `x1`).
    pub fn residual_expr(&self, u: &ScalarExpr) -> ScalarExpr {
        let mut parts = Vec::new();
        let mut d = u.clone();
        for c in &self.coeffs {
            parts.push(c * &d);
            d = d.diff(0);
        }
        ScalarExpr::add_all(parts)
    }

    /// Closed-form lift `w(x) = M(x) u(s(x))`.
    pub fn lift(&self, u: &ScalarExpr) -> ScalarExpr {
        let composed = u.compose(&[self.similarity.clone(), ScalarExpr::zero()]);
        &self.multiplier * &composed
    }

    fn coeff_at(&self, s: f64) -> [f64; 5] {
        std::array::from_fn(|n| self.coeffs[n].eval([s, 0.0]))
    }

    /// Integrate from `U^(0..3)(s0) = init` across `[lo, hi]`, which must
    /// contain `s0`.
    pub fn integrate(&self, init: [f64; 4], s0: f64, lo: f64, hi: f64, opts: OdeOptions) -> Result<SampledSolution, OdeError> {
        let probe = 200;
        for i in 0..=probe {
            let s = lo + (hi - lo) * i as f64 / probe as f64;
            let c4 = self.coeffs[4].eval([s, 0.0]);
            if !c4.is_finite() || c4.abs() < 1e-12 {
                return Err(OdeError::SingularLeading { s });
            }
        }
        let rhs = |s: f64, y: &[f64], dy: &mut [f64]| {
            let c = self.coeff_at(s);
            dy[0] = y[1];
            dy[1] = y[2];
            dy[2] = y[3];
            dy[3] = -(c[3] * y[3] + c[2] * y[2] + c[1] * y[1] + c[0] * y[0]) / c[4];
        };
        let fwd = dopri5(rhs, s0, &init, hi, opts)?;
        let bwd = dopri5(rhs, s0, &init, lo, opts)?;
        let mut t: Vec<f64> = bwd.t.iter().rev().copied().collect();
        let mut y: Vec<Vec<f64>> = bwd.y.iter().rev().cloned().collect();
        t.extend(fwd.t.iter().skip(1));
        y.extend(fwd.y.iter().skip(1).cloned());
        let dcoeffs: Vec<ScalarExpr> = self.coeffs.iter().map(|c| c.diff(0)).collect();
        let nodes = t
            .iter()
            .zip(&y)
            .map(|(&s, st)| {
                let c = self.coeff_at(s);
                let dc: Vec<f64> = dcoeffs.iter().map(|e| e.eval([s, 0.0])).collect();
                let u4 = -(c[3] * st[3] + c[2] * st[2] + c[1] * st[1] + c[0] * st[0]) / c[4];
                let u5 = -(dc[4] * u4
                    + dc[3] * st[3]
                    + c[3] * u4
                    + dc[2] * st[2]
                    + c[2] * st[3]
                    + dc[1] * st[1]
                    + c[1] * st[2]
                    + dc[0] * st[0]
                    + c[0] * st[1])
                    / c[4];
                [st[0], st[1], st[2], st[3], u4, u5]
            })
            .collect();
        Ok(SampledSolution {
            s: t,
            d: nodes,
            coeffs: self.coeffs.clone(),
        })
    }
}

/// Numerical solution of a [`ReducedOde`], with derivatives `U..U^(5)` stored
/// at each accepted step.
#[derive(Clone, Debug)]
pub struct SampledSolution {
    pub s: Vec<f64>,
    pub d: Vec<[f64; 6]>,
    coeffs: [ScalarExpr; 5],
}

fn hermite5(h: f64, tau: f64, p0: [f64; 3], p1: [f64; 3]) -> f64 {
    let t2 = tau * tau;
    let t3 = t2 * tau;
    let t4 = t3 * tau;
    let t5 = t4 * tau;
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = tau - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    let h3 = 0.5 * t3 - t4 + 0.5 * t5;
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    h0 * p0[0] + h * h1 * p0[1] + h * h * h2 * p0[2] + h * h * h3 * p1[2] + h * h4 * p1[1] + h5 * p1[0]
}

impl SampledSolution {
    pub fn range(&self) -> (f64, f64) {
        (self.s[0], *self.s.last().unwrap())
    }

    /// `[U, U', U'', U''', U'''']` at `s` by quintic Hermite interpolation of
    /// each state component; the fourth derivative comes from the equation.
    pub fn eval(&self, s: f64) -> Result<[f64; 5], OdeError> {
        let (lo, hi) = self.range();
        if s < lo || s > hi {
            return Err(OdeError::OutOfRange { s, lo, hi });
        }
        let i = match self.s.partition_point(|&v| v <= s) {
            0 => 0,
            n if n >= self.s.len() => self.s.len() - 2,
            n => n - 1,
        };
        let (a, b) = (self.s[i], self.s[i + 1]);
        let h = b - a;
        let tau = if h == 0.0 { 0.0 } else { (s - a) / h };
        let mut out = [0.0; 5];
        for (c, o) in out.iter_mut().enumerate().take(4) {
            let p0 = [self.d[i][c], self.d[i][c + 1], self.d[i][c + 2]];
            let p1 = [self.d[i + 1][c], self.d[i + 1][c + 1], self.d[i + 1][c + 2]];
            *o = hermite5(h, tau, p0, p1);
        }
        let c: Vec<f64> = self.coeffs.iter().map(|e| e.eval([s, 0.0])).collect();
        out[4] = -(c[3] * out[3] + c[2] * out[2] + c[1] * out[1] + c[0] * out[0]) / c[4];
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_scalar;

    #[test]
    fn harmonic_oscillator_accuracy() {
        let traj = dopri5(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            &[1.0, 0.0],
            10.0,
            OdeOptions::default(),
        )
        .unwrap();
        let y = traj.last();
        assert!((y[0] - 10f64.cos()).abs() < 1e-8);
        assert!((y[1] + 10f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn backward_integration() {
        let traj = dopri5(|_, y, dy| dy[0] = y[0], 0.0, &[1.0], -2.0, OdeOptions::default()).unwrap();
        assert!((traj.last()[0] - (-2f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn error_tracks_tolerance() {
        let mut errs = Vec::new();
        for tol in [1e-5, 1e-7, 1e-9] {
            let opts = OdeOptions {
                rtol: tol,
                atol: tol * 1e-2,
                max_steps: 100_000,
            };
            let traj = dopri5(
                |_, y, dy| {
                    dy[0] = y[1];
                    dy[1] = -y[0];
                },
                0.0,
                &[1.0, 0.0],
                20.0,
                opts,
            )
            .unwrap();
            errs.push((traj.last()[0] - 20f64.cos()).abs());
        }
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
        // fifth-order method: two decades of tolerance buy at least one decade of error
        assert!(errs[2] < errs[0] * 0.1, "{errs:?}");
    }

    #[test]
    fn dense_output_of_fourth_order_ode() {
        // U'''' + 4 U'' = 0, U = cos(2 s)
        let ode = ReducedOde {
            coeffs: [
                ScalarExpr::zero(),
                ScalarExpr::zero(),
                ScalarExpr::int(4),
                ScalarExpr::zero(),
                ScalarExpr::one(),
            ],
            similarity: ScalarExpr::x1(),
            multiplier: ScalarExpr::one(),
            label: "test".into(),
        };
        let sol = ode.integrate([1.0, 0.0, -4.0, 0.0], 0.0, -3.0, 3.0, OdeOptions::default()).unwrap();
        for i in 0..60 {
            let s = -2.95 + 0.1 * i as f64;
            let d = sol.eval(s).unwrap();
            let exact = [(2.0 * s).cos(), -2.0 * (2.0 * s).sin(), -4.0 * (2.0 * s).cos(), 8.0 * (2.0 * s).sin(), 16.0 * (2.0 * s).cos()];
            for (a, b) in d.iter().zip(exact) {
                assert!((a - b).abs() < 1e-7, "s={s}: {a} vs {b}");
            }
        }
        assert!(sol.eval(3.5).is_err());
        let u = parse_scalar("cos(2*x1)").unwrap();
        let r = ode.residual_expr(&u);
        assert!(r.eval([0.37, 0.0]).abs() < 1e-12);
    }

    #[test]
    fn singular_leading_coefficient_is_rejected() {
        let ode = ReducedOde {
            coeffs: [
                ScalarExpr::one(),
                ScalarExpr::zero(),
                ScalarExpr::zero(),
                ScalarExpr::zero(),
                ScalarExpr::x1(),
            ],
            similarity: ScalarExpr::x1(),
            multiplier: ScalarExpr::one(),
            label: "sing".into(),
        };
        assert!(matches!(
            ode.integrate([1.0, 0.0, 0.0, 0.0], 0.5, -1.0, 1.0, OdeOptions::default()),
            Err(OdeError::SingularLeading { .. })
        ));
    }
}
