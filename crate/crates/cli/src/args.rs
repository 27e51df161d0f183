use std::path::PathBuf;

use clap::{Args, ValueEnum};
use qubvp::grid::{GridMap, MapKind};
use qubvp::linear::LinearSolver;
use qubvp::newton::SolverConfig;
use qubvp::problem::{builtin, BvpProblem, ProblemParams};
use qubvp::scheme::JacobianMode;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MapArg {
    Log,
    Alg,
    Tan,
}

impl From<MapArg> for MapKind {
    fn from(m: MapArg) -> Self {
        match m {
            MapArg::Log => MapKind::Logarithmic,
            MapArg::Alg => MapKind::Algebraic,
            MapArg::Tan => MapKind::Tangential,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum JacobianArg {
    Analytic,
    Fd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, value_enum, default_value = "log")]
    pub map: MapArg,
    /// Map scale.
    #[arg(long, default_value_t = 5.0)]
    pub c: f64,
    /// Number of intervals; a comma list for sweeps.
    #[arg(long = "N", value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
}

impl GridArgs {
    pub fn map(&self) -> Result<GridMap, CliError> {
        Ok(GridMap::new(self.map.into(), self.c)?)
    }

    pub fn single_n(&self) -> Result<usize, CliError> {
        match self.n.as_slice() {
            [n] => Ok(*n),
            _ => Err(CliError::Usage("expected a single --N value".into())),
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Built-in problem: falkner-skan or pile.
    #[arg(long, default_value = "falkner-skan")]
    pub problem: String,
    /// Falkner-Skan pressure-gradient parameter.
    #[arg(long = "P")]
    pub p: Option<f64>,
    #[arg(long = "P1")]
    pub p1: Option<f64>,
    #[arg(long = "P2")]
    pub p2: Option<f64>,
    #[arg(long = "P3")]
    pub p3: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 50)]
    pub max_iter: usize,
    /// Defaults to analytic when the problem provides derivatives.
    #[arg(long, value_enum)]
    pub jacobian: Option<JacobianArg>,
    /// Use the plain last-interval stencil instead of continuing the previous one.
    #[arg(long = "no-continuation")]
    pub no_continuation: bool,
}

impl RunArgs {
    pub fn problem(&self) -> Result<Box<dyn BvpProblem>, CliError> {
        let params = ProblemParams {
            p: self.p,
            p1: self.p1,
            p2: self.p2,
            p3: self.p3,
        };
        let used = match self.problem.as_str() {
            "falkner-skan" => [self.p1, self.p2, self.p3].iter().all(Option::is_none),
            _ => self.p.is_none(),
        };
        if !used {
            return Err(CliError::Usage(format!(
                "parameter flags do not apply to problem `{}`",
                self.problem
            )));
        }
        if [self.p, self.p1, self.p2, self.p3]
            .iter()
            .flatten()
            .any(|v| !v.is_finite())
        {
            return Err(CliError::Usage("problem parameters must be finite".into()));
        }
        Ok(builtin(&self.problem, &params)?)
    }

    pub fn config(&self) -> Result<SolverConfig, CliError> {
        let config = SolverConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            jacobian: self.jacobian.map(|j| match j {
                JacobianArg::Analytic => JacobianMode::Analytic,
                JacobianArg::Fd => JacobianMode::FiniteDifference,
            }),
            continuation: !self.no_continuation,
            linear_solver: LinearSolver::Bordered,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Decimal places in table output.
    #[arg(long, default_value_t = 6)]
    pub decimals: usize,
    /// Full precision (17 significant digits) instead of table rounding.
    #[arg(long)]
    pub raw: bool,
}
