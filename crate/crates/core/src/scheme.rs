//! Midpoint (box-type) discretization on a quasi-uniform grid.
//!
//! For every interval `n = 0..N` the discrete equation is
//!
//! ```text
//! U_{n+1} - U_n - step_n · f(x_{n+1/2}, w_next·U_{n+1} + w_here·U_n) = 0
//! ```
//!
//! followed by the `d` boundary equations `g(U_0, U_N) = 0`. Residuals are
//! stored node-major with the boundary rows last. The coordinate `x_N = ∞`
//! never enters: only midpoints and stencil coefficients are read.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Discretization, QuasiUniformGrid, StencilCoefficients};
use crate::problem::BvpProblem;

/// Grid function with `d` components per node, node-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    dim: usize,
    values: Vec<f64>,
}

impl GridField {
    pub fn zeros(dim: usize, nodes: usize) -> Self {
        Self {
            dim,
            values: vec![0.0; dim * nodes],
        }
    }

    pub fn from_values(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || values.is_empty() || !values.len().is_multiple_of(dim) {
            return Err(Error::Argument(format!(
                "{} values do not split into nodes of dimension {dim}",
                values.len()
            )));
        }
        Ok(Self { dim, values })
    }

    /// The problem's initial iterate sampled on the grid nodes.
    pub fn initial(problem: &dyn BvpProblem, grid: &QuasiUniformGrid) -> Self {
        let dim = problem.dim();
        let mut field = Self::zeros(dim, grid.nodes().len());
        for (n, &x) in grid.nodes().iter().enumerate() {
            problem.initial_iterate(x, field.node_mut(n));
        }
        field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn node(&self, n: usize) -> &[f64] {
        &self.values[n * self.dim..(n + 1) * self.dim]
    }

    pub fn node_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.values[n * self.dim..(n + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Values of one component across all nodes.
    pub fn component(&self, l: usize) -> Vec<f64> {
        self.values
            .iter()
            .skip(l)
            .step_by(self.dim)
            .copied()
            .collect()
    }
}

/// `w_here·u_n + w_next·u_next`
pub fn midpoint_value(
    coeffs: &StencilCoefficients,
    u_n: &[f64],
    u_next: &[f64],
) -> Result<Vec<f64>> {
    check_dims(u_n, u_next)?;
    let mut out = vec![0.0; u_n.len()];
    midpoint_into(coeffs, u_n, u_next, &mut out);
    Ok(out)
}

/// `(u_next - u_n) / step`
pub fn midpoint_derivative(
    coeffs: &StencilCoefficients,
    u_n: &[f64],
    u_next: &[f64],
) -> Result<Vec<f64>> {
    check_dims(u_n, u_next)?;
    Ok(u_n
        .iter()
        .zip(u_next)
        .map(|(a, b)| (b - a) / coeffs.step)
        .collect())
}

fn check_dims(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Argument(format!(
            "dimension mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

// Written as u_n + w_next (u_next - u_n), which equals
// w_here u_n + w_next u_next since the weights sum to one, and is exact on
// constants.
fn midpoint_into(coeffs: &StencilCoefficients, u_n: &[f64], u_next: &[f64], out: &mut [f64]) {
    for ((o, a), b) in out.iter_mut().zip(u_n).zip(u_next) {
        *o = a + coeffs.w_next * (b - a);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JacobianMode {
    Analytic,
    FiniteDifference,
}

/// Block structure of the Newton matrix.
///
/// Interior block row `n` couples `U_n` (`here[n]`) and `U_{n+1}` (`next[n]`);
/// the boundary block row couples `U_0` and `U_N`. All blocks are `d × d`,
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredJacobian {
    pub dim: usize,
    pub here: Vec<Vec<f64>>,
    pub next: Vec<Vec<f64>>,
    pub bc_origin: Vec<f64>,
    pub bc_infinity: Vec<f64>,
}

impl StructuredJacobian {
    pub fn zeros(dim: usize, intervals: usize) -> Self {
        Self {
            dim,
            here: vec![vec![0.0; dim * dim]; intervals],
            next: vec![vec![0.0; dim * dim]; intervals],
            bc_origin: vec![0.0; dim * dim],
            bc_infinity: vec![0.0; dim * dim],
        }
    }

    pub fn intervals(&self) -> usize {
        self.here.len()
    }

    /// Total number of unknowns, `d (N + 1)`.
    pub fn size(&self) -> usize {
        self.dim * (self.intervals() + 1)
    }

    /// Row-major dense copy with the row and column ordering of the residual.
    pub fn to_dense(&self) -> Vec<f64> {
        let (d, m) = (self.dim, self.size());
        let mut out = vec![0.0; m * m];
        let mut put = |row0: usize, col0: usize, block: &[f64]| {
            for i in 0..d {
                for j in 0..d {
                    out[(row0 + i) * m + col0 + j] += block[i * d + j];
                }
            }
        };
        for n in 0..self.intervals() {
            put(n * d, n * d, &self.here[n]);
            put(n * d, (n + 1) * d, &self.next[n]);
        }
        let last = self.intervals() * d;
        put(last, 0, &self.bc_origin);
        put(last, last, &self.bc_infinity);
        out
    }

    /// `J · v`
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; self.size()];
        let gemv = |block: &[f64], x: &[f64], y: &mut [f64]| {
            for i in 0..d {
                y[i] += (0..d).map(|j| block[i * d + j] * x[j]).sum::<f64>();
            }
        };
        for n in 0..self.intervals() {
            let row = &mut out[n * d..(n + 1) * d];
            gemv(&self.here[n], &v[n * d..(n + 1) * d], row);
            gemv(&self.next[n], &v[(n + 1) * d..(n + 2) * d], row);
        }
        let last = self.intervals() * d;
        let row = &mut out[last..];
        gemv(&self.bc_origin, &v[..d], row);
        gemv(&self.bc_infinity, &v[last..], row);
        out
    }
}

/// A problem bound to a grid: evaluates residuals and Jacobians.
pub struct Scheme<'a> {
    problem: &'a dyn BvpProblem,
    disc: Discretization,
}

impl<'a> Scheme<'a> {
    pub fn new(
        problem: &'a dyn BvpProblem,
        grid: &QuasiUniformGrid,
        continuation: bool,
    ) -> Result<Self> {
        if problem.dim() == 0 {
            return Err(Error::Argument("problem dimension must be positive".into()));
        }
        Ok(Self {
            problem,
            disc: grid.discretization(continuation)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.problem.dim()
    }

    pub fn intervals(&self) -> usize {
        self.disc.intervals()
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    /// The Jacobian mode used when none is requested explicitly.
    pub fn default_mode(&self) -> JacobianMode {
        if self.problem.derivatives().is_some() {
            JacobianMode::Analytic
        } else {
            JacobianMode::FiniteDifference
        }
    }

    fn check_field(&self, u: &GridField) -> Result<()> {
        if u.dim() != self.dim() || u.nodes() != self.intervals() + 1 {
            return Err(Error::Argument(format!(
                "field has {} nodes of dimension {}, scheme expects {} of dimension {}",
                u.nodes(),
                u.dim(),
                self.intervals() + 1,
                self.dim()
            )));
        }
        Ok(())
    }

    /// Residual block of interval `n` into `out`.
    fn interval_residual(
        &self,
        n: usize,
        u_n: &[f64],
        u_next: &[f64],
        mid: &mut [f64],
        out: &mut [f64],
    ) {
        let s = &self.disc.stencils[n];
        midpoint_into(s, u_n, u_next, mid);
        self.problem.rhs(self.disc.midpoints[n], mid, out);
        for l in 0..out.len() {
            out[l] = u_next[l] - u_n[l] - s.step * out[l];
        }
    }

    pub fn residual(&self, u: &GridField) -> Result<Vec<f64>> {
        self.check_field(u)?;
        let (d, big) = (self.dim(), self.intervals());
        let mut res = vec![0.0; d * (big + 1)];
        let mut mid = vec![0.0; d];
        for (n, block) in res.chunks_mut(d).take(big).enumerate() {
            self.interval_residual(n, u.node(n), u.node(n + 1), &mut mid, block);
            if block.iter().any(|v| !v.is_finite()) {
                return Err(Error::Evaluation {
                    node: n,
                    what: "right-hand side".into(),
                });
            }
        }
        self.problem
            .boundary(u.node(0), u.node(big), &mut res[big * d..]);
        if res[big * d..].iter().any(|v| !v.is_finite()) {
            return Err(Error::Evaluation {
                node: big,
                what: "boundary function".into(),
            });
        }
        Ok(res)
    }

    pub fn jacobian(&self, u: &GridField, mode: JacobianMode) -> Result<StructuredJacobian> {
        self.check_field(u)?;
        match mode {
            JacobianMode::Analytic => self.analytic_jacobian(u),
            JacobianMode::FiniteDifference => Ok(self.fd_jacobian(u)),
        }
    }

    fn analytic_jacobian(&self, u: &GridField) -> Result<StructuredJacobian> {
        let deriv = self
            .problem
            .derivatives()
            .ok_or(Error::MissingDerivatives)?;
        let (d, big) = (self.dim(), self.intervals());
        let mut jac = StructuredJacobian::zeros(d, big);
        let mut mid = vec![0.0; d];
        let mut df = vec![0.0; d * d];
        for n in 0..big {
            let s = &self.disc.stencils[n];
            midpoint_into(s, u.node(n), u.node(n + 1), &mut mid);
            deriv.rhs_jacobian(self.disc.midpoints[n], &mid, &mut df);
            let (here, next) = (&mut jac.here[n], &mut jac.next[n]);
            for i in 0..d {
                for j in 0..d {
                    let k = i * d + j;
                    let eye = if i == j { 1.0 } else { 0.0 };
                    here[k] = -eye - s.step * s.w_here * df[k];
                    next[k] = eye - s.step * s.w_next * df[k];
                }
            }
        }
        deriv.boundary_jacobian(
            u.node(0),
            u.node(big),
            &mut jac.bc_origin,
            &mut jac.bc_infinity,
        );
        Ok(jac)
    }

    fn fd_jacobian(&self, u: &GridField) -> StructuredJacobian {
        let (d, big) = (self.dim(), self.intervals());
        let eps = f64::EPSILON.sqrt();
        let mut jac = StructuredJacobian::zeros(d, big);
        let mut mid = vec![0.0; d];
        let (mut base, mut pert) = (vec![0.0; d], vec![0.0; d]);

        // Perturbs one column of (left, right) and writes the difference
        // quotient of `eval` into column j of `block`.
        let column = |block: &mut [f64], j: usize, h: f64, base: &[f64], pert: &[f64]| {
            for i in 0..d {
                block[i * d + j] = (pert[i] - base[i]) / h;
            }
        };

        for n in 0..big {
            let (mut left, mut right) = (u.node(n).to_vec(), u.node(n + 1).to_vec());
            self.interval_residual(n, &left, &right, &mut mid, &mut base);
            for j in 0..d {
                let h = eps * (1.0 + left[j].abs());
                let saved = left[j];
                left[j] = saved + h;
                self.interval_residual(n, &left, &right, &mut mid, &mut pert);
                left[j] = saved;
                column(&mut jac.here[n], j, h, &base, &pert);

                let h = eps * (1.0 + right[j].abs());
                let saved = right[j];
                right[j] = saved + h;
                self.interval_residual(n, &left, &right, &mut mid, &mut pert);
                right[j] = saved;
                column(&mut jac.next[n], j, h, &base, &pert);
            }
        }

        let (mut u0, mut un) = (u.node(0).to_vec(), u.node(big).to_vec());
        self.problem.boundary(&u0, &un, &mut base);
        for j in 0..d {
            let h = eps * (1.0 + u0[j].abs());
            let saved = u0[j];
            u0[j] = saved + h;
            self.problem.boundary(&u0, &un, &mut pert);
            u0[j] = saved;
            column(&mut jac.bc_origin, j, h, &base, &pert);

            let h = eps * (1.0 + un[j].abs());
            let saved = un[j];
            un[j] = saved + h;
            self.problem.boundary(&u0, &un, &mut pert);
            un[j] = saved;
            column(&mut jac.bc_infinity, j, h, &base, &pert);
        }
        jac
    }
}
