//! Grid-doubling sweeps, observed order of accuracy and nested Richardson
//! extrapolation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridMap, QuasiUniformGrid};
use crate::newton::{solve, SolverConfig};
use crate::problem::{report_scalar, BvpProblem};

/// Leading error term of `t_2n` for a method of order `p`:
/// `(t_2n - t_n) / (2^p - 1)`.
pub fn richardson_error(t_n: f64, t_2n: f64, p: f64) -> f64 {
    (t_2n - t_n) / (2f64.powf(p) - 1.0)
}

/// `log2(|t_n - t_ref| / |t_2n - t_ref|)`.
///
/// `+∞` when `t_2n` already equals the reference, NaN when both do.
pub fn observed_order(t_n: f64, t_2n: f64, t_ref: f64) -> f64 {
    let (e1, e2) = ((t_n - t_ref).abs(), (t_2n - t_ref).abs());
    (e1.ln() - e2.ln()) / std::f64::consts::LN_2
}

/// Rounds to `decimals` places the way the value would be printed.
pub fn round_to(v: f64, decimals: usize) -> f64 {
    if !v.is_finite() {
        return v;
    }
    format!("{v:.decimals$}").parse().unwrap_or(v)
}

fn same_printed(a: f64, b: f64, decimals: usize) -> bool {
    format!("{a:.decimals$}") == format!("{b:.decimals$}")
}

/// Values of one quantity on doubling grids `N, 2N, 4N, …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSeries {
    pub quantity: String,
    pub entries: Vec<(usize, f64)>,
    pub map: Option<GridMap>,
}

impl SweepSeries {
    pub fn new(quantity: impl Into<String>, entries: Vec<(usize, f64)>) -> Result<Self> {
        check_doubling(entries.iter().map(|e| e.0))?;
        Ok(Self {
            quantity: quantity.into(),
            entries,
            map: None,
        })
    }

    pub fn with_map(mut self, map: GridMap) -> Self {
        self.map = Some(map);
        self
    }
}

fn check_doubling(ns: impl Iterator<Item = usize>) -> Result<()> {
    let ns: Vec<usize> = ns.collect();
    for w in ns.windows(2) {
        if w[1] != 2 * w[0] {
            return Err(Error::Argument(format!(
                "grid sizes must double, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The newest column's last two entries print identically.
    Settled,
    /// The newest column's last entry prints the same as its parent's.
    Nested,
    /// Only one entry left; nothing more to combine.
    Exhausted,
}

/// Triangular table of nested extrapolations. Column `k` holds
/// `T^(k)` for rows `k..`, so `columns[k][j]` sits on row `j + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationTable {
    pub ns: Vec<usize>,
    pub columns: Vec<Vec<f64>>,
    pub stop: StopReason,
}

impl ExtrapolationTable {
    /// Entry of column `k` on row `row`, if present.
    pub fn get(&self, row: usize, k: usize) -> Option<f64> {
        let col = self.columns.get(k)?;
        row.checked_sub(k).and_then(|j| col.get(j)).copied()
    }

    /// Most extrapolated value (last entry of the last column).
    pub fn best(&self) -> f64 {
        *self
            .columns
            .last()
            .and_then(|c| c.last())
            .expect("table has a column")
    }
}

/// Builds `T^(k) = (2^{k+1} T^(k-1)_{2N} - T^(k-1)_N) / (2^{k+1} - 1)` column
/// by column. Nesting stops when a column's last two entries agree at
/// `print_decimals`, or when its last entry agrees with the parent's.
pub fn extrapolate_table(
    series: &SweepSeries,
    print_decimals: usize,
) -> Result<ExtrapolationTable> {
    if series.entries.len() < 2 {
        return Err(Error::Argument(format!(
            "extrapolation needs at least 2 grid levels, got {}",
            series.entries.len()
        )));
    }
    check_doubling(series.entries.iter().map(|e| e.0))?;

    let mut columns = vec![series.entries.iter().map(|e| e.1).collect::<Vec<_>>()];
    let stop = loop {
        let k = columns.len();
        let parent = &columns[k - 1];
        if parent.len() < 2 {
            break StopReason::Exhausted;
        }
        let w = 2f64.powi(k as i32 + 1);
        let col: Vec<f64> = parent
            .windows(2)
            .map(|p| (w * p[1] - p[0]) / (w - 1.0))
            .collect();
        let settled =
            col.len() >= 2 && same_printed(col[col.len() - 2], col[col.len() - 1], print_decimals);
        let nested = same_printed(
            *col.last().unwrap(),
            *parent.last().unwrap(),
            print_decimals,
        );
        columns.push(col);
        if settled {
            break StopReason::Settled;
        }
        if nested {
            break StopReason::Nested;
        }
    };

    Ok(ExtrapolationTable {
        ns: series.entries.iter().map(|e| e.0).collect(),
        columns,
        stop,
    })
}

/// Observed orders for a doubling series against its last entry.
///
/// Entry `i` (for `1 ≤ i < len - 1`) compares rows `i - 1` and `i`; the first
/// and last entries are `None`. With `decimals`, values are first rounded as
/// printed, which is what produces exact `∞`/NaN entries once the sweep
/// settles.
pub fn order_column(values: &[Option<f64>], decimals: Option<usize>) -> Vec<Option<f64>> {
    let m = values.len();
    let mut out = vec![None; m];
    if m < 3 {
        return out;
    }
    let round = |v: f64| decimals.map_or(v, |d| round_to(v, d));
    let Some(reference) = values[m - 1].map(round) else {
        return out;
    };
    for i in 1..m - 1 {
        out[i] = match (values[i - 1], values[i]) {
            (Some(a), Some(b)) => Some(observed_order(round(a), round(b), reference)),
            _ => Some(f64::NAN),
        };
    }
    out
}

/// Outcome of one grid level in a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Report quantities in the order of `Sweep::quantities`; `None` when the
    /// solve failed.
    pub values: Vec<Option<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub map: GridMap,
    pub quantities: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl Sweep {
    pub fn column(&self, quantity: &str) -> Result<Vec<Option<f64>>> {
        let q = self
            .quantities
            .iter()
            .position(|q| q == quantity)
            .ok_or_else(|| Error::UnknownQuantity(quantity.to_string()))?;
        Ok(self.rows.iter().map(|r| r.values[q]).collect())
    }

    pub fn orders(&self, quantity: &str, decimals: Option<usize>) -> Result<Vec<Option<f64>>> {
        Ok(order_column(&self.column(quantity)?, decimals))
    }

    /// Series of a quantity restricted to the successful rows.
    pub fn series(&self, quantity: &str) -> Result<SweepSeries> {
        let entries = self
            .rows
            .iter()
            .zip(self.column(quantity)?)
            .filter_map(|(r, v)| v.map(|v| (r.n, v)))
            .collect();
        Ok(SweepSeries::new(quantity, entries)?.with_map(self.map))
    }
}

/// Solves on every grid size in `ns` (which must double) and collects the
/// problem's report quantities. Solves run in parallel; a failed level is
/// recorded in its row and does not stop the sweep.
pub fn run_sweep(
    problem: &dyn BvpProblem,
    map: GridMap,
    ns: &[usize],
    config: &SolverConfig,
) -> Result<Sweep> {
    if ns.is_empty() {
        return Err(Error::Argument("sweep needs at least one grid size".into()));
    }
    check_doubling(ns.iter().copied())?;
    config.validate()?;
    let quantities: Vec<String> = problem.reports().into_iter().map(|r| r.name).collect();

    let rows = ns
        .par_iter()
        .map(|&n| {
            let attempt = QuasiUniformGrid::new(map, n).and_then(|g| solve(problem, &g, config));
            match attempt {
                Ok(res) => {
                    let values = quantities
                        .iter()
                        .map(|q| {
                            if res.converged {
                                report_scalar(problem, &res, q).ok()
                            } else {
                                None
                            }
                        })
                        .collect();
                    SweepRow {
                        n,
                        iterations: res.iterations,
                        converged: res.converged,
                        values,
                        error: (!res.converged).then(|| "did not converge".to_string()),
                    }
                }
                Err(e) => SweepRow {
                    n,
                    iterations: 0,
                    converged: false,
                    values: vec![None; quantities.len()],
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    Ok(Sweep {
        map,
        quantities,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn richardson_examples() {
        let r = richardson_error(1.234124, 1.232972, 2.0);
        // exact rational: -0.001152 / 3
        assert!((r - (-0.000384)).abs() < 1e-15);
        assert_eq!(richardson_error(0.7, 0.7, 3.0), 0.0);
    }

    #[test]
    fn observed_order_examples() {
        let p = observed_order(1.238724, 1.234124, 1.232589);
        assert!((p - 1.998825).abs() < 5e-7, "{p}");
        assert_eq!(observed_order(1.0, 2.0, 2.0), f64::INFINITY);
        assert!(observed_order(2.0, 2.0, 2.0).is_nan());
    }

    fn table(values: &[(usize, f64)]) -> ExtrapolationTable {
        extrapolate_table(&SweepSeries::new("q", values.to_vec()).unwrap(), 6).unwrap()
    }

    fn printed(v: Option<f64>) -> String {
        format!("{:.6}", v.unwrap())
    }

    #[test]
    fn falkner_skan_table() {
        let t = table(&[(40, 1.234124), (80, 1.232972), (160, 1.232684)]);
        assert_eq!(t.columns.len(), 2);
        assert_eq!(printed(t.get(1, 1)), "1.232588");
        assert_eq!(printed(t.get(2, 1)), "1.232588");
        assert_eq!(t.get(0, 1), None);
        assert_eq!(t.stop, StopReason::Settled);
    }

    #[test]
    fn pile_tables() {
        let t = table(&[(40, 1.421243), (80, 1.421469), (160, 1.421526)]);
        assert_eq!(printed(t.get(1, 1)), "1.421544");
        assert_eq!(printed(t.get(2, 1)), "1.421545");
        assert_eq!(printed(t.get(2, 2)), "1.421545");
        assert_eq!(t.columns.len(), 3);

        let t = table(&[(40, -0.807934), (80, -0.808094), (160, -0.808135)]);
        assert_eq!(printed(t.get(1, 1)), "-0.808147");
        assert_eq!(printed(t.get(2, 1)), "-0.808149");
        assert_eq!(printed(t.get(2, 2)), "-0.808149");
    }

    #[test]
    fn two_rows_give_one_step() {
        let t = table(&[(10, 1.0), (20, 0.25)]);
        assert_eq!(t.columns.len(), 2);
        assert_eq!(t.columns[1], vec![0.0]);
        assert_eq!(t.stop, StopReason::Exhausted);
    }

    #[test]
    fn nested_stop_rule() {
        // second column's last entry prints like the first column's
        let t = table(&[(10, 1.0), (20, 2.0), (40, 2.0)]);
        assert_eq!(t.columns.len(), 2);
        assert_eq!(t.stop, StopReason::Nested);
    }

    #[test]
    fn table_argument_errors() {
        assert!(SweepSeries::new("q", vec![(10, 1.0), (30, 1.0)]).is_err());
        let one = SweepSeries::new("q", vec![(10, 1.0)]).unwrap();
        assert!(extrapolate_table(&one, 6).is_err());
    }

    #[test]
    fn order_column_shapes() {
        assert_eq!(order_column(&[Some(1.0)], Some(6)), vec![None]);
        assert_eq!(
            order_column(&[Some(1.0), Some(2.0)], Some(6)),
            vec![None, None]
        );
        let col = order_column(&[Some(1.421540), Some(1.421544), Some(1.4215441)], Some(6));
        assert_eq!(col[1], Some(f64::INFINITY));
        let col = order_column(&[Some(0.808145), Some(0.808145), Some(0.808145)], Some(6));
        assert!(col[1].unwrap().is_nan());
        let col = order_column(&[Some(1.0), None, Some(1.0), Some(2.0)], None);
        assert!(col[1].unwrap().is_nan() && col[2].unwrap().is_nan());
    }

    proptest! {
        #[test]
        fn power_law_is_recovered(t8 in -8000i32..8000, c in 1u32..16, p in 1u32..5, k in 1i32..7) {
            // dyadic data: every value below is exactly representable
            let t_star = t8 as f64 / 8.0;
            let t = |m: f64| t_star + c as f64 * m.powi(-(p as i32));
            let n = 2f64.powi(k);
            let (t1, t2) = (t(n), t(2.0 * n));
            let order = observed_order(t1, t2, t_star);
            prop_assert!((order - p as f64).abs() <= 1e-12, "order {}", order);
            let corrected = t2 + richardson_error(t1, t2, p as f64);
            prop_assert!((corrected - t_star).abs() <= 1e-12 * (1.0 + t_star.abs()));
        }

        #[test]
        fn weights_are_affine(a in -5.0f64..5.0, b in -5.0f64..5.0, k in 1i32..8) {
            let w = 2f64.powi(k + 1);
            prop_assert_eq!(w / (w - 1.0) - 1.0 / (w - 1.0), 1.0);
            let v = (w * b - a) / (w - 1.0);
            let lo = a.min(b) - (a - b).abs();
            let hi = a.max(b) + (a - b).abs();
            prop_assert!(v >= lo && v <= hi);
        }
    }
}
