//! First-order boundary value problems `u' = f(x, u)`, `g(u(0), u(∞)) = 0`,
//! and the built-in benchmark problems.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::newton::SolveResult;

/// Where a report quantity is read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportNode {
    Origin,
    /// Node `N`. The unknown there is finite even though the coordinate is not.
    Infinity,
}

/// A named scalar read from a converged grid solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub name: String,
    pub component: usize,
    pub node: ReportNode,
}

impl Report {
    pub fn new(name: &str, component: usize, node: ReportNode) -> Self {
        Self {
            name: name.to_string(),
            component,
            node,
        }
    }
}

/// Analytic derivatives of a problem's right-hand side and boundary function.
///
/// Matrices are `d × d`, row-major.
pub trait Derivatives {
    fn rhs_jacobian(&self, x: f64, u: &[f64], out: &mut [f64]);

    /// `∂g/∂u(0)` into `d0` and `∂g/∂u(∞)` into `dinf`.
    fn boundary_jacobian(&self, u0: &[f64], uinf: &[f64], d0: &mut [f64], dinf: &mut [f64]);
}

/// A two-point boundary value problem on `[0, ∞]`.
///
/// `rhs` is only ever called at finite `x`.
pub trait BvpProblem: Send + Sync {
    fn dim(&self) -> usize;

    fn rhs(&self, x: f64, u: &[f64], out: &mut [f64]);

    fn boundary(&self, u0: &[f64], uinf: &[f64], out: &mut [f64]);

    /// Initial Newton iterate at node coordinate `x` (which is `∞` at the last node).
    fn initial_iterate(&self, x: f64, out: &mut [f64]);

    fn derivatives(&self) -> Option<&dyn Derivatives> {
        None
    }

    fn reports(&self) -> Vec<Report> {
        Vec::new()
    }
}

/// Reads a named report quantity from a solution.
pub fn report_scalar(problem: &dyn BvpProblem, result: &SolveResult, name: &str) -> Result<f64> {
    let report = problem
        .reports()
        .into_iter()
        .find(|r| r.name == name)
        .ok_or_else(|| Error::UnknownQuantity(name.to_string()))?;
    let field = &result.solution;
    let node = match report.node {
        ReportNode::Origin => 0,
        ReportNode::Infinity => field.nodes() - 1,
    };
    Ok(field.node(node)[report.component])
}

/// Falkner-Skan boundary layer equation `f''' + f f'' + P (1 - f'^2) = 0`,
/// `f(0) = f'(0) = 0`, `f'(∞) = 1`, as a three-component system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FalknerSkan {
    /// Pressure-gradient parameter. `1/2` is Homann flow, `1` Hiemenz flow.
    pub p: f64,
}

impl Default for FalknerSkan {
    fn default() -> Self {
        Self { p: 1.0 }
    }
}

impl FalknerSkan {
    pub fn new(p: f64) -> Self {
        Self { p }
    }
}

impl BvpProblem for FalknerSkan {
    fn dim(&self) -> usize {
        3
    }

    fn rhs(&self, _x: f64, u: &[f64], out: &mut [f64]) {
        out[0] = u[1];
        out[1] = u[2];
        out[2] = -u[0] * u[2] - self.p * (1.0 - u[1] * u[1]);
    }

    fn boundary(&self, u0: &[f64], uinf: &[f64], out: &mut [f64]) {
        out[0] = u0[0];
        out[1] = u0[1];
        out[2] = uinf[1] - 1.0;
    }

    fn initial_iterate(&self, _x: f64, out: &mut [f64]) {
        out.copy_from_slice(&[0.5, 0.5, 1e-2]);
    }

    fn derivatives(&self) -> Option<&dyn Derivatives> {
        Some(self)
    }

    fn reports(&self) -> Vec<Report> {
        vec![
            Report::new("fpp0", 2, ReportNode::Origin),
            Report::new("fpp_inf", 2, ReportNode::Infinity),
        ]
    }
}

impl Derivatives for FalknerSkan {
    #[rustfmt::skip]
    fn rhs_jacobian(&self, _x: f64, u: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&[
            0.0,   1.0,                  0.0,
            0.0,   0.0,                  1.0,
            -u[2], 2.0 * self.p * u[1],  -u[0],
        ]);
    }

    fn boundary_jacobian(&self, _u0: &[f64], _uinf: &[f64], d0: &mut [f64], dinf: &mut [f64]) {
        d0.fill(0.0);
        dinf.fill(0.0);
        d0[0] = 1.0;
        d0[4] = 1.0;
        dinf[7] = 1.0;
    }
}

/// Deflection of a semi-infinite pile in soft soil,
/// `u'''' = -P1 (1 - exp(-P2 u))`, `u''(0) = 0`, `u'''(0) = P3`,
/// `u(∞) = u'(∞) = 0`, as a four-component system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pile {
    p1: f64,
    p2: f64,
    p3: f64,
}

impl Default for Pile {
    fn default() -> Self {
        Self {
            p1: 1.0,
            p2: 0.5,
            p3: 0.5,
        }
    }
}

impl Pile {
    pub fn new(p1: f64, p2: f64, p3: f64) -> Result<Self> {
        if !(p1 > 0.0 && p2 > 0.0) {
            return Err(Error::Argument(format!(
                "pile material constants must be positive (P1 = {p1}, P2 = {p2})"
            )));
        }
        if !p3.is_finite() {
            return Err(Error::Argument(format!("P3 must be finite, got {p3}")));
        }
        Ok(Self { p1, p2, p3 })
    }

    pub fn params(&self) -> (f64, f64, f64) {
        (self.p1, self.p2, self.p3)
    }
}

impl BvpProblem for Pile {
    fn dim(&self) -> usize {
        4
    }

    fn rhs(&self, _x: f64, u: &[f64], out: &mut [f64]) {
        out[0] = u[1];
        out[1] = u[2];
        out[2] = u[3];
        // -P1 (1 - e^{-P2 u})
        out[3] = self.p1 * (-self.p2 * u[0]).exp_m1();
    }

    fn boundary(&self, u0: &[f64], uinf: &[f64], out: &mut [f64]) {
        out[0] = u0[2];
        out[1] = u0[3] - self.p3;
        out[2] = uinf[0];
        out[3] = uinf[1];
    }

    fn initial_iterate(&self, _x: f64, out: &mut [f64]) {
        out.fill(1.0);
    }

    fn derivatives(&self) -> Option<&dyn Derivatives> {
        Some(self)
    }

    fn reports(&self) -> Vec<Report> {
        vec![
            Report::new("u0", 0, ReportNode::Origin),
            Report::new("du0", 1, ReportNode::Origin),
        ]
    }
}

impl Derivatives for Pile {
    fn rhs_jacobian(&self, _x: f64, u: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        out[1] = 1.0;
        out[6] = 1.0;
        out[11] = 1.0;
        out[12] = -self.p1 * self.p2 * (-self.p2 * u[0]).exp();
    }

    fn boundary_jacobian(&self, _u0: &[f64], _uinf: &[f64], d0: &mut [f64], dinf: &mut [f64]) {
        d0.fill(0.0);
        dinf.fill(0.0);
        d0[2] = 1.0;
        d0[7] = 1.0;
        dinf[8] = 1.0;
        dinf[13] = 1.0;
    }
}

type RhsFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;
type BoundaryFn = dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync;
type InitialFn = dyn Fn(f64, &mut [f64]) + Send + Sync;

/// A problem assembled from closures. Without analytic derivatives the
/// solver falls back to a finite-difference Jacobian.
#[derive(Clone)]
pub struct CustomProblem {
    dim: usize,
    rhs: Arc<RhsFn>,
    boundary: Arc<BoundaryFn>,
    initial: Arc<InitialFn>,
    reports: Vec<Report>,
}

impl CustomProblem {
    pub fn new(
        dim: usize,
        rhs: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
        boundary: impl Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument("problem dimension must be positive".into()));
        }
        Ok(Self {
            dim,
            rhs: Arc::new(rhs),
            boundary: Arc::new(boundary),
            initial: Arc::new(|_, out: &mut [f64]| out.fill(0.0)),
            reports: Vec::new(),
        })
    }

    pub fn with_initial(mut self, f: impl Fn(f64, &mut [f64]) + Send + Sync + 'static) -> Self {
        self.initial = Arc::new(f);
        self
    }

    pub fn with_report(mut self, report: Report) -> Self {
        self.reports.push(report);
        self
    }
}

impl std::fmt::Debug for CustomProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CustomProblem")
            .field("dim", &self.dim)
            .field("reports", &self.reports)
            .finish_non_exhaustive()
    }
}

impl BvpProblem for CustomProblem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn rhs(&self, x: f64, u: &[f64], out: &mut [f64]) {
        (self.rhs)(x, u, out)
    }

    fn boundary(&self, u0: &[f64], uinf: &[f64], out: &mut [f64]) {
        (self.boundary)(u0, uinf, out)
    }

    fn initial_iterate(&self, x: f64, out: &mut [f64]) {
        (self.initial)(x, out)
    }

    fn reports(&self) -> Vec<Report> {
        self.reports.clone()
    }
}

/// Looks up a built-in problem by CLI name.
pub fn builtin(name: &str, params: &ProblemParams) -> Result<Box<dyn BvpProblem>> {
    match name {
        "falkner-skan" => Ok(Box::new(FalknerSkan::new(params.p.unwrap_or(1.0)))),
        "pile" => {
            let d = Pile::default();
            Ok(Box::new(Pile::new(
                params.p1.unwrap_or(d.p1),
                params.p2.unwrap_or(d.p2),
                params.p3.unwrap_or(d.p3),
            )?))
        }
        other => Err(Error::Argument(format!(
            "unknown problem `{other}` (expected falkner-skan or pile)"
        ))),
    }
}

/// Optional parameter overrides for [`builtin`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ProblemParams {
    pub p: Option<f64>,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub p3: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn central_jacobian(p: &dyn BvpProblem, x: f64, u: &[f64]) -> Vec<f64> {
        let d = p.dim();
        let mut jac = vec![0.0; d * d];
        let (mut up, mut fp, mut fm) = (u.to_vec(), vec![0.0; d], vec![0.0; d]);
        for j in 0..d {
            let h = 1e-6 * (1.0 + u[j].abs());
            up[j] = u[j] + h;
            p.rhs(x, &up, &mut fp);
            up[j] = u[j] - h;
            p.rhs(x, &up, &mut fm);
            up[j] = u[j];
            for i in 0..d {
                jac[i * d + j] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        jac
    }

    #[test]
    fn falkner_skan_rhs() {
        let fs = FalknerSkan::default();
        let mut out = [0.0; 3];
        fs.rhs(0.0, &[0.0, 0.0, 1.232589], &mut out);
        assert_eq!(out, [0.0, 1.232589, -1.0]);
        fs.boundary(&[0.0, 0.0, 7.0], &[3.0, 1.0, -2.0], &mut out);
        assert_eq!(out, [0.0, 0.0, 0.0]);
        for x in [0.0, 3.0, f64::INFINITY] {
            fs.initial_iterate(x, &mut out);
            assert_eq!(out, [0.5, 0.5, 0.01]);
        }
    }

    #[test]
    fn pile_rhs() {
        let pile = Pile::default();
        let mut out = [0.0; 4];
        pile.rhs(4.2, &[0.0, 1.5, -2.0, 3.0], &mut out);
        assert_eq!(out, [1.5, -2.0, 3.0, 0.0]);
        pile.boundary(&[0.3, -0.7, 0.0, 0.5], &[0.0, 0.0, 1.0, 2.0], &mut out);
        assert_eq!(out, [0.0; 4]);
        pile.initial_iterate(f64::INFINITY, &mut out);
        assert_eq!(out, [1.0; 4]);
        assert!(Pile::new(0.0, 0.5, 0.5).is_err());
        assert!(Pile::new(1.0, -0.5, 0.5).is_err());
    }

    #[test]
    fn builtin_lookup() {
        let p = builtin("falkner-skan", &ProblemParams::default()).unwrap();
        assert_eq!(p.dim(), 3);
        let p = builtin(
            "pile",
            &ProblemParams {
                p1: Some(2.0),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(p.dim(), 4);
        assert!(builtin("blasius", &ProblemParams::default()).is_err());
        assert!(builtin(
            "pile",
            &ProblemParams {
                p2: Some(0.0),
                ..Default::default()
            }
        )
        .is_err());
    }

    fn assert_jacobian_matches(
        p: &dyn BvpProblem,
        x: f64,
        u: &[f64],
    ) -> std::result::Result<(), TestCaseError> {
        let d = p.dim();
        let mut analytic = vec![0.0; d * d];
        p.derivatives().unwrap().rhs_jacobian(x, u, &mut analytic);
        let fd = central_jacobian(p, x, u);
        for (a, f) in analytic.iter().zip(&fd) {
            prop_assert!((a - f).abs() <= 1e-6 * (1.0 + a.abs()), "{a} vs {f}");
        }
        Ok(())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn falkner_skan_jacobian(p in -0.5f64..2.0, u in prop::array::uniform3(-3.0f64..3.0)) {
            assert_jacobian_matches(&FalknerSkan::new(p), 1.0, &u)?;
        }

        #[test]
        fn pile_jacobian(p1 in 0.1f64..3.0, p2 in 0.1f64..2.0, u in prop::array::uniform4(-3.0f64..3.0)) {
            assert_jacobian_matches(&Pile::new(p1, p2, 0.5).unwrap(), 1.0, &u)?;
        }

        #[test]
        fn pile_restoring_force(u1 in 1e-9f64..20.0) {
            let mut out = [0.0; 4];
            Pile::default().rhs(0.0, &[u1, 0.0, 0.0, 0.0], &mut out);
            prop_assert!(out[3] < 0.0);
        }
    }
}
