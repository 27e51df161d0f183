use std::path::Path;

use qubvp::convergence::{extrapolate_table, run_sweep, ExtrapolationTable, SweepSeries};
use qubvp::grid::QuasiUniformGrid;
use qubvp::newton::solve as newton;
use qubvp::problem::report_scalar;
use serde_json::{json, Map, Value};
use std::io::Write;

use crate::args::{Format, GridArgs, OutputArgs, RunArgs};
use crate::output::{sink, write_csv, write_json, Numbers};
use crate::CliError;

pub fn solve(run: &RunArgs, out: &OutputArgs) -> Result<(), CliError> {
    let problem = run.problem()?;
    let config = run.config()?;
    let n = run.grid.single_n()?;
    let grid = QuasiUniformGrid::new(run.grid.map()?, n)?;
    let result = newton(problem.as_ref(), &grid, &config)?;
    let num = Numbers::new(out);
    let d = problem.dim();

    let mut scalars = Vec::new();
    for r in problem.reports() {
        scalars.push((
            r.name.clone(),
            report_scalar(problem.as_ref(), &result, &r.name)?,
        ));
    }

    let mut w = sink(out)?;
    match out.format {
        Format::Csv => {
            let mut rows = vec![["n".to_string(), "x".to_string()]
                .into_iter()
                .chain((1..=d).map(|i| format!("u{i}")))
                .collect::<Vec<_>>()];
            for (i, x) in grid.nodes().iter().enumerate() {
                let mut row = vec![i.to_string(), num.text(*x)];
                row.extend(result.solution.node(i).iter().map(|v| num.text(*v)));
                rows.push(row);
            }
            write_csv(&mut *w, &rows)?;
            writeln!(w)?;
            let mut summary = vec![
                vec!["key".to_string(), "value".to_string()],
                vec!["problem".into(), run.problem.clone()],
                vec!["N".into(), n.to_string()],
                vec!["iterations".into(), result.iterations.to_string()],
                vec![
                    "final_increment".into(),
                    format!("{:e}", result.final_increment),
                ],
                vec!["converged".into(), result.converged.to_string()],
            ];
            summary.extend(scalars.iter().map(|(k, v)| vec![k.clone(), num.text(*v)]));
            write_csv(&mut *w, &summary)?;
        }
        Format::Json => {
            let mut summary = Map::new();
            summary.insert("problem".into(), json!(run.problem));
            summary.insert("N".into(), json!(n));
            summary.insert("iterations".into(), json!(result.iterations));
            summary.insert(
                "final_increment".into(),
                Numbers { raw: true, ..num }.json(result.final_increment),
            );
            summary.insert("converged".into(), json!(result.converged));
            for (k, v) in &scalars {
                summary.insert(k.clone(), num.json(*v));
            }
            let nodes: Vec<Value> = grid
                .nodes()
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    let u: Vec<Value> = result
                        .solution
                        .node(i)
                        .iter()
                        .map(|v| num.json(*v))
                        .collect();
                    json!({ "n": i, "x": num.json(*x), "u": u })
                })
                .collect();
            write_json(&mut *w, &json!({ "summary": summary, "nodes": nodes }))?;
        }
    }
    w.flush()?;

    if result.converged {
        Ok(())
    } else {
        Err(CliError::NotConverged(format!(
            "no convergence after {} iterations (last increment {:e})",
            result.iterations, result.final_increment
        )))
    }
}

pub fn sweep(run: &RunArgs, quantity: Option<&str>, out: &OutputArgs) -> Result<(), CliError> {
    let problem = run.problem()?;
    let config = run.config()?;
    let map = run.grid.map()?;
    let sweep = run_sweep(problem.as_ref(), map, &run.grid.n, &config)?;
    let quantities: Vec<String> = match quantity {
        Some(q) => {
            sweep.column(q)?;
            vec![q.to_string()]
        }
        None => sweep.quantities.clone(),
    };
    let num = Numbers::new(out);
    let order_decimals = (!out.raw).then_some(out.decimals);
    let mut orders = Vec::new();
    for q in &quantities {
        orders.push((sweep.column(q)?, sweep.orders(q, order_decimals)?));
    }

    let mut w = sink(out)?;
    match out.format {
        Format::Csv => {
            let mut header = vec!["N".to_string(), "iterations".into(), "converged".into()];
            for q in &quantities {
                header.push(q.clone());
                header.push(format!("p_{q}"));
            }
            header.push("error".into());
            let mut rows = vec![header];
            for (i, row) in sweep.rows.iter().enumerate() {
                let mut cells = vec![
                    row.n.to_string(),
                    row.iterations.to_string(),
                    row.converged.to_string(),
                ];
                for (values, p) in &orders {
                    cells.push(num.opt_text(values[i]));
                    cells.push(num.opt_text(p[i]));
                }
                cells.push(row.error.clone().unwrap_or_default());
                rows.push(cells);
            }
            write_csv(&mut *w, &rows)?;
        }
        Format::Json => {
            let rows: Vec<Value> = sweep
                .rows
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    let mut values = Map::new();
                    let mut ps = Map::new();
                    for (q, (v, p)) in quantities.iter().zip(&orders) {
                        values.insert(q.clone(), num.opt_json(v[i]));
                        ps.insert(q.clone(), num.opt_json(p[i]));
                    }
                    json!({
                        "N": row.n,
                        "iterations": row.iterations,
                        "converged": row.converged,
                        "values": values,
                        "orders": ps,
                        "error": row.error,
                    })
                })
                .collect();
            let doc = json!({
                "problem": run.problem,
                "map": map.kind().to_string(),
                "c": map.c(),
                "quantities": quantities,
                "rows": rows,
            });
            write_json(&mut *w, &doc)?;
        }
    }
    w.flush()?;

    let failed: Vec<usize> = sweep
        .rows
        .iter()
        .filter(|r| !r.converged)
        .map(|r| r.n)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::NotConverged(format!(
            "solves failed for N = {failed:?}"
        )))
    }
}

/// Reads one quantity column of a sweep CSV. Rows with a blank cell are skipped.
pub fn read_series(
    path: &Path,
    quantity: Option<&str>,
    only: &[usize],
) -> Result<SweepSeries, CliError> {
    let parse_err = |line: u64, msg: String| {
        CliError::Core(qubvp::Error::Parse {
            line: line as usize,
            msg,
        })
    };
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => CliError::Usage(format!("{}: {e}", path.display())),
            _ => parse_err(e.position().map_or(1, |p| p.line()), e.to_string()),
        })?;
    let header = reader
        .headers()
        .map_err(|e| parse_err(e.position().map_or(1, |p| p.line()), e.to_string()))?
        .clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let n_col = col("N").ok_or_else(|| parse_err(1, "missing `N` column".into()))?;
    let (name, q_col) = match quantity {
        Some(q) => (
            q.to_string(),
            col(q).ok_or_else(|| CliError::Core(qubvp::Error::UnknownQuantity(q.into())))?,
        ),
        None => header
            .iter()
            .enumerate()
            .find(|(_, h)| {
                !["N", "iterations", "converged", "error"].contains(h) && !h.starts_with("p_")
            })
            .map(|(i, h)| (h.to_string(), i))
            .ok_or_else(|| parse_err(1, "no quantity column".into()))?,
    };

    let mut entries = Vec::new();
    for record in reader.records() {
        let record =
            record.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).map(str::trim).unwrap_or("");
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let n: usize = field(n_col)
            .parse()
            .map_err(|_| parse_err(line, format!("bad grid size `{}`", field(n_col))))?;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let cell = field(q_col);
        if cell.is_empty() {
            continue;
        }
        let v: f64 = cell
            .parse()
            .map_err(|_| parse_err(line, format!("bad value `{cell}` in column `{name}`")))?;
        entries.push((n, v));
    }
    if let Some(missing) = only.iter().find(|n| !entries.iter().any(|e| e.0 == **n)) {
        return Err(CliError::Usage(format!(
            "no value for N = {missing} in {}",
            path.display()
        )));
    }
    Ok(SweepSeries::new(name, entries)?)
}

pub fn extrapolate(
    path: &Path,
    quantity: Option<&str>,
    only: &[usize],
    out: &OutputArgs,
) -> Result<(), CliError> {
    let series = read_series(path, quantity, only)?;
    let table = extrapolate_table(&series, out.decimals)?;
    let num = Numbers::new(out);
    let mut w = sink(out)?;
    match out.format {
        Format::Csv => write_csv(&mut *w, &table_rows(&table, &num))?,
        Format::Json => {
            let rows: Vec<Value> = table
                .ns
                .iter()
                .enumerate()
                .map(|(i, n)| {
                    let t: Vec<Value> = (0..table.columns.len())
                        .map(|k| num.opt_json(table.get(i, k)))
                        .collect();
                    json!({ "N": n, "T": t })
                })
                .collect();
            let doc = json!({
                "quantity": series.quantity,
                "stop": table.stop,
                "best": num.json(table.best()),
                "rows": rows,
            });
            write_json(&mut *w, &doc)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn table_rows(table: &ExtrapolationTable, num: &Numbers) -> Vec<Vec<String>> {
    let k = table.columns.len();
    let mut rows = vec![std::iter::once("N".to_string())
        .chain((0..k).map(|j| format!("T{j}")))
        .collect::<Vec<_>>()];
    for (i, n) in table.ns.iter().enumerate() {
        let mut row = vec![n.to_string()];
        row.extend((0..k).map(|j| num.opt_text(table.get(i, j))));
        rows.push(row);
    }
    rows
}

pub fn grid(args: &GridArgs, out: &OutputArgs) -> Result<(), CliError> {
    let n = args.single_n()?;
    let grid = QuasiUniformGrid::new(args.map()?, n)?;
    let num = Numbers::new(out);
    let offset = if args.map().map(|m| m.kind().is_semi_infinite())? {
        0
    } else {
        n as i64
    };
    let index = |i: usize| i as i64 - offset;
    let mut w = sink(out)?;
    match out.format {
        Format::Csv => {
            let mut rows = vec![vec!["n".to_string(), "xi".into(), "x".into()]];
            for (i, x) in grid.nodes().iter().enumerate() {
                rows.push(vec![
                    index(i).to_string(),
                    num.text(grid.xi(i)),
                    num.text(*x),
                ]);
            }
            write_csv(&mut *w, &rows)?;
        }
        Format::Json => {
            let rows: Vec<Value> = grid
                .nodes()
                .iter()
                .enumerate()
                .map(|(i, x)| json!({ "n": index(i), "xi": num.json(grid.xi(i)), "x": num.json(*x) }))
                .collect();
            write_json(
                &mut *w,
                &json!({ "map": grid.map().kind().to_string(), "c": grid.map().c(), "N": n, "nodes": rows }),
            )?;
        }
    }
    w.flush()?;
    Ok(())
}
