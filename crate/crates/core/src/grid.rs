//! Grid-generating maps and quasi-uniform grids with a node at infinity.
//!
//! A uniform grid `ξ_n = n/N` on `[0, 1]` is pushed through a smooth,
//! strictly increasing map onto `[0, ∞]`, so the last node is exactly
//! `+∞`. Only the coordinate there is infinite: fractional nodes
//! `x_{n+α} = x((n+α)/N)` are finite for every interval, including the last
//! one, and they are all the discretization ever needs.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    /// `x = -c ln(1 - ξ)`
    Logarithmic,
    /// `x = c ξ / (1 - ξ)`
    Algebraic,
    /// `x = c tan(π ξ / 2)` on `[-1, 1]`, covering the whole real line.
    Tangential,
}

impl MapKind {
    pub fn is_semi_infinite(self) -> bool {
        !matches!(self, MapKind::Tangential)
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MapKind::Logarithmic => "log",
            MapKind::Algebraic => "alg",
            MapKind::Tangential => "tan",
        })
    }
}

impl FromStr for MapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "log" | "logarithmic" => Ok(MapKind::Logarithmic),
            "alg" | "algebraic" => Ok(MapKind::Algebraic),
            "tan" | "tangential" => Ok(MapKind::Tangential),
            other => Err(Error::Argument(format!("unknown map kind `{other}`"))),
        }
    }
}

/// A grid-generating function together with its control parameter `c > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMap {
    kind: MapKind,
    c: f64,
}

impl GridMap {
    pub fn new(kind: MapKind, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Argument(format!(
                "map control parameter must be positive and finite, got {c}"
            )));
        }
        Ok(Self { kind, c })
    }

    pub fn logarithmic(c: f64) -> Result<Self> {
        Self::new(MapKind::Logarithmic, c)
    }

    pub fn algebraic(c: f64) -> Result<Self> {
        Self::new(MapKind::Algebraic, c)
    }

    pub fn tangential(c: f64) -> Result<Self> {
        Self::new(MapKind::Tangential, c)
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Evaluates the map at `ξ`.
    ///
    /// `ξ ∈ [0, 1]` for the semi-infinite maps and `ξ ∈ [-1, 1]` for the
    /// tangential one. The endpoints at `|ξ| = 1` return `±∞` exactly.
    pub fn eval(&self, xi: f64) -> Result<f64> {
        let lo = if self.kind.is_semi_infinite() {
            0.0
        } else {
            -1.0
        };
        if !(lo..=1.0).contains(&xi) {
            return Err(Error::Domain(format!(
                "ξ = {xi} outside [{lo}, 1] for the {} map",
                self.kind
            )));
        }
        Ok(self.eval_unchecked(xi, 1.0 - xi))
    }

    /// Evaluates at `ξ = s / n`, forming `1 - ξ` as `(n - s) / n` so that
    /// nodes close to infinity keep full relative accuracy.
    pub(crate) fn eval_ratio(&self, s: f64, n: f64) -> f64 {
        self.eval_unchecked(s / n, (n - s) / n)
    }

    fn eval_unchecked(&self, xi: f64, one_minus_xi: f64) -> f64 {
        match self.kind {
            MapKind::Logarithmic => {
                if one_minus_xi <= 0.0 {
                    f64::INFINITY
                } else if xi == 0.0 {
                    0.0
                } else {
                    -self.c * one_minus_xi.ln()
                }
            }
            MapKind::Algebraic => {
                if one_minus_xi <= 0.0 {
                    f64::INFINITY
                } else {
                    self.c * xi / one_minus_xi
                }
            }
            MapKind::Tangential => {
                let t = xi.abs();
                let x = if t >= 1.0 {
                    f64::INFINITY
                } else {
                    self.c * (t * FRAC_PI_2).tan()
                };
                if xi < 0.0 {
                    -x
                } else {
                    x
                }
            }
        }
    }
}

/// Per-interval coefficients of the midpoint value and derivative stencils.
///
/// On interval `[x_n, x_{n+1}]`:
/// `u(x_{n+1/2}) ≈ w_here·u_n + w_next·u_{n+1}` and
/// `u'(x_{n+1/2}) ≈ (u_{n+1} - u_n) / step`, with
/// `step = 2 (x_{n+3/4} - x_{n+1/4})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StencilCoefficients {
    pub interval: usize,
    pub step: f64,
    pub w_next: f64,
    pub w_here: f64,
}

/// Grid nodes `x_0 < x_1 < … < x_N = ∞` obtained from a [`GridMap`].
///
/// For the tangential map the grid has `2N + 1` nodes running from `x_{-N} = -∞`
/// to `x_N = +∞`; positions in [`nodes`](Self::nodes) start at `x_{-N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiUniformGrid {
    map: GridMap,
    intervals: usize,
    nodes: Vec<f64>,
}

impl QuasiUniformGrid {
    pub fn new(map: GridMap, intervals: usize) -> Result<Self> {
        if intervals < 2 {
            return Err(Error::Argument(format!(
                "need at least 2 intervals, got {intervals}"
            )));
        }
        let n = intervals as f64;
        let nodes = if map.kind.is_semi_infinite() {
            (0..=intervals)
                .map(|i| map.eval_ratio(i as f64, n))
                .collect()
        } else {
            let big = intervals as i64;
            (-big..=big)
                .map(|i| map.eval_unchecked(i as f64 / n, 1.0 - i as f64 / n))
                .collect()
        };
        Ok(Self {
            map,
            intervals,
            nodes,
        })
    }

    pub fn map(&self) -> GridMap {
        self.map
    }

    /// `N`, the number of intervals on the positive half line.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of stencil intervals spanned by the grid (`N`, or `2N` for a
    /// whole-line grid).
    pub fn interval_count(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Node coordinates, including the infinite endpoint(s). Output only.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Uniform computational coordinate of node position `i`.
    pub fn xi(&self, i: usize) -> f64 {
        if self.map.kind.is_semi_infinite() {
            i as f64 / self.intervals as f64
        } else {
            (i as f64 - self.intervals as f64) / self.intervals as f64
        }
    }

    /// `x_{n+α}` for `0 ≤ n < interval_count()` and `0 < α < 1`; always finite.
    pub fn fractional_node(&self, n: usize, alpha: f64) -> Result<f64> {
        if n >= self.interval_count() {
            return Err(Error::Argument(format!(
                "interval {n} out of range 0..{}",
                self.interval_count()
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Argument(format!("α = {alpha} outside (0, 1)")));
        }
        Ok(self.fractional_unchecked(n, alpha))
    }

    fn fractional_unchecked(&self, n: usize, alpha: f64) -> f64 {
        let big = self.intervals as f64;
        if self.map.kind.is_semi_infinite() {
            self.map.eval_ratio(n as f64 + alpha, big)
        } else {
            let s = n as f64 + alpha - big;
            self.map.eval_unchecked(s / big, (big - s) / big)
        }
    }

    /// Stencil coefficients on interval `n`.
    ///
    /// Interior intervals use the literal node ratios. On the last interval
    /// the ratios degenerate (`x_N = ∞`): with `continuation` the weights of
    /// interval `N - 2` are reused, otherwise the limits `w_next = 0`,
    /// `w_here = 1` apply. The step uses the finite quarter nodes throughout.
    pub fn stencil_coefficients(
        &self,
        n: usize,
        continuation: bool,
    ) -> Result<StencilCoefficients> {
        if !self.map.kind.is_semi_infinite() {
            return Err(Error::Argument(
                "stencils are only defined on semi-infinite grids".into(),
            ));
        }
        if n >= self.intervals {
            return Err(Error::Argument(format!(
                "interval {n} out of range 0..{}",
                self.intervals
            )));
        }
        let step = 2.0 * (self.fractional_unchecked(n, 0.75) - self.fractional_unchecked(n, 0.25));
        let last = self.intervals - 1;
        let w_next = if n < last {
            self.interior_weight(n)
        } else if continuation {
            self.interior_weight(last - 1)
        } else {
            0.0
        };
        Ok(StencilCoefficients {
            interval: n,
            step,
            w_next,
            w_here: 1.0 - w_next,
        })
    }

    fn interior_weight(&self, n: usize) -> f64 {
        let lo = self.nodes[n];
        let hi = self.nodes[n + 1];
        (self.fractional_unchecked(n, 0.5) - lo) / (hi - lo)
    }

    /// Stencils and midpoints for every interval, in order.
    pub fn discretization(&self, continuation: bool) -> Result<Discretization> {
        let stencils = (0..self.intervals)
            .map(|n| self.stencil_coefficients(n, continuation))
            .collect::<Result<Vec<_>>>()?;
        let midpoints = (0..self.intervals)
            .map(|n| self.fractional_unchecked(n, 0.5))
            .collect();
        Ok(Discretization {
            stencils,
            midpoints,
        })
    }
}

/// Everything the scheme reads from a grid: finite midpoints and stencils.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub stencils: Vec<StencilCoefficients>,
    pub midpoints: Vec<f64>,
}

impl Discretization {
    pub fn intervals(&self) -> usize {
        self.stencils.len()
    }
}
