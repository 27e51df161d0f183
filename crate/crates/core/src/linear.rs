//! Linear solves with the Newton matrix.
//!
//! The bordered solver walks the block-bidiagonal structure once. It starts
//! from the `d` boundary rows, which couple `U_0` with `U_N`. At each
//! interval those carried rows are stacked with the interval's own `d` rows,
//! and the `d` columns of `U_n` are eliminated with partial pivoting over all
//! `2d` rows. The `d` leftover rows then refer only to `U_{n+1}` and `U_N`,
//! and they are carried to the next interval. At the end a `d × d` system in
//! `U_N` remains, and back substitution recovers the rest. Cost is
//! `O(d³ N)`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheme::StructuredJacobian;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearSolver {
    #[default]
    Bordered,
    Dense,
}

/// Largest system the dense solver accepts.
pub const DENSE_LIMIT: usize = 10_000;

const PIVOT_RTOL: f64 = 1e-14;

/// Solves `J x = rhs` where `rhs` uses the residual ordering.
pub fn linear_solve(
    jac: &StructuredJacobian,
    rhs: &[f64],
    method: LinearSolver,
) -> Result<Vec<f64>> {
    if rhs.len() != jac.size() {
        return Err(Error::Argument(format!(
            "right-hand side has length {}, expected {}",
            rhs.len(),
            jac.size()
        )));
    }
    match method {
        LinearSolver::Bordered => solve_bordered(jac, rhs),
        LinearSolver::Dense => solve_dense(jac, rhs),
    }
}

/// One row of the elimination workspace: `[U_n | U_{n+1} | U_N | rhs]`.
#[derive(Clone)]
struct Row {
    cols: Vec<f64>,
    rhs: f64,
}

fn solve_bordered(jac: &StructuredJacobian, rhs: &[f64]) -> Result<Vec<f64>> {
    let d = jac.dim;
    let big = jac.intervals();
    let width = 3 * d;
    let (here_off, next_off, tail_off) = (0, d, 2 * d);

    // Boundary rows, coupling U_0 and U_N.
    let mut carry: Vec<Row> = (0..d)
        .map(|i| {
            let mut cols = vec![0.0; width];
            cols[here_off..here_off + d].copy_from_slice(&jac.bc_origin[i * d..(i + 1) * d]);
            cols[tail_off..tail_off + d].copy_from_slice(&jac.bc_infinity[i * d..(i + 1) * d]);
            Row {
                cols,
                rhs: rhs[big * d + i],
            }
        })
        .collect();

    let mut pivots: Vec<Vec<Row>> = Vec::with_capacity(big);
    let mut work: Vec<Row> = Vec::with_capacity(2 * d);

    for n in 0..big {
        work.clear();
        work.append(&mut carry);
        let last = n + 1 == big;
        for i in 0..d {
            let mut cols = vec![0.0; width];
            cols[here_off..here_off + d].copy_from_slice(&jac.here[n][i * d..(i + 1) * d]);
            let target = if last { tail_off } else { next_off };
            for j in 0..d {
                cols[target + j] += jac.next[n][i * d + j];
            }
            work.push(Row {
                cols,
                rhs: rhs[n * d + i],
            });
        }

        eliminate(&mut work, d, n * d)?;

        carry = work.split_off(d);
        for row in carry.iter_mut() {
            row.cols.copy_within(next_off..next_off + d, here_off);
            row.cols[next_off..next_off + d].fill(0.0);
        }
        pivots.push(std::mem::take(&mut work));
    }

    // d × d system in U_N.
    let mut tail: Vec<f64> = Vec::with_capacity(d * d);
    let mut tail_rhs = Vec::with_capacity(d);
    for row in &carry {
        tail.extend_from_slice(&row.cols[tail_off..tail_off + d]);
        tail_rhs.push(row.rhs);
    }
    let u_tail = dense_lu_solve(&mut tail, &mut tail_rhs, d).map_err(|col| Error::Singular {
        iteration: 0,
        column: big * d + col,
    })?;

    let mut x = vec![0.0; d * (big + 1)];
    x[big * d..].copy_from_slice(&u_tail);
    for n in (0..big).rev() {
        let rows = &pivots[n];
        let (head, rest) = x.split_at_mut((n + 1) * d);
        let next = &rest[..d];
        let unknown = &mut head[n * d..];
        for k in (0..d).rev() {
            let r = &rows[k];
            let mut acc = r.rhs;
            for (a, u) in r.cols[here_off + k + 1..here_off + d]
                .iter()
                .zip(&unknown[k + 1..d])
            {
                acc -= a * u;
            }
            for j in 0..d {
                acc -= r.cols[next_off + j] * next[j] + r.cols[tail_off + j] * u_tail[j];
            }
            unknown[k] = acc / r.cols[here_off + k];
        }
    }
    Ok(x)
}

/// Gaussian elimination with row pivoting on the first `d` columns of `rows`.
fn eliminate(rows: &mut [Row], d: usize, column0: usize) -> Result<()> {
    let scale = rows
        .iter()
        .flat_map(|r| r.cols.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    for k in 0..d {
        let (p, best) = rows[k..]
            .iter()
            .enumerate()
            .map(|(i, r)| (i + k, r.cols[k].abs()))
            .fold(
                (k, -1.0),
                |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
            );
        if best.partial_cmp(&(PIVOT_RTOL * scale)) != Some(Ordering::Greater) || !best.is_finite() {
            return Err(Error::Singular {
                iteration: 0,
                column: column0 + k,
            });
        }
        rows.swap(k, p);
        let (top, bottom) = rows.split_at_mut(k + 1);
        let pivot = &top[k];
        for r in bottom.iter_mut() {
            let factor = r.cols[k] / pivot.cols[k];
            if factor != 0.0 {
                for (dst, src) in r.cols[k..].iter_mut().zip(&pivot.cols[k..]) {
                    *dst -= factor * src;
                }
                r.rhs -= factor * pivot.rhs;
            }
        }
    }
    Ok(())
}

fn solve_dense(jac: &StructuredJacobian, rhs: &[f64]) -> Result<Vec<f64>> {
    let m = jac.size();
    if m > DENSE_LIMIT {
        return Err(Error::Argument(format!(
            "dense solver limited to {DENSE_LIMIT} unknowns, system has {m}"
        )));
    }
    let mut a = jac.to_dense();
    let mut b = rhs.to_vec();
    dense_lu_solve(&mut a, &mut b, m).map_err(|column| Error::Singular {
        iteration: 0,
        column,
    })
}

/// In-place LU with partial pivoting (first maximal pivot wins). Returns the
/// offending column on a numerically singular pivot.
pub(crate) fn dense_lu_solve(
    a: &mut [f64],
    b: &mut [f64],
    m: usize,
) -> std::result::Result<Vec<f64>, usize> {
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    for k in 0..m {
        let mut p = k;
        let mut best = a[k * m + k].abs();
        for i in k + 1..m {
            let v = a[i * m + k].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best.partial_cmp(&(PIVOT_RTOL * scale)) != Some(Ordering::Greater) || !best.is_finite() {
            return Err(k);
        }
        if p != k {
            for j in 0..m {
                a.swap(k * m + j, p * m + j);
            }
            b.swap(k, p);
        }
        let pivot = a[k * m + k];
        for i in k + 1..m {
            let factor = a[i * m + k] / pivot;
            if factor == 0.0 {
                continue;
            }
            a[i * m + k] = 0.0;
            for j in k + 1..m {
                a[i * m + j] -= factor * a[k * m + j];
            }
            b[i] -= factor * b[k];
        }
    }
    let mut x = vec![0.0; m];
    for k in (0..m).rev() {
        let acc = (k + 1..m).fold(b[k], |acc, j| acc - a[k * m + j] * x[j]);
        x[k] = acc / a[k * m + k];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn identity(d: usize, big: usize) -> StructuredJacobian {
        let mut jac = StructuredJacobian::zeros(d, big);
        for n in 0..big {
            for i in 0..d {
                jac.here[n][i * d + i] = 1.0;
            }
        }
        for i in 0..d {
            jac.bc_infinity[i * d + i] = 1.0;
        }
        jac
    }

    /// Structured matrix in the same shape as a discretized BVP: `here ≈ -I`,
    /// `next ≈ I`, small random couplings, separated boundary rows.
    fn random_structured(rng: &mut ChaCha8Rng, d: usize, big: usize) -> StructuredJacobian {
        let mut jac = StructuredJacobian::zeros(d, big);
        for n in 0..big {
            for i in 0..d {
                for j in 0..d {
                    let eye = if i == j { 1.0 } else { 0.0 };
                    jac.here[n][i * d + j] = -eye + 0.3 * rng.gen_range(-1.0..1.0);
                    jac.next[n][i * d + j] = eye + 0.3 * rng.gen_range(-1.0..1.0);
                }
            }
        }
        let split = d / 2 + 1;
        for i in 0..d {
            for j in 0..d {
                let v = rng.gen_range(-1.0..1.0);
                if i < split {
                    jac.bc_origin[i * d + j] = v + if i == j { 2.0 } else { 0.0 };
                } else {
                    jac.bc_infinity[i * d + j] = v + if i == j { 2.0 } else { 0.0 };
                }
            }
        }
        jac
    }

    fn residual_inf(jac: &StructuredJacobian, x: &[f64], b: &[f64]) -> f64 {
        jac.apply(x)
            .iter()
            .zip(b)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    #[test]
    fn identity_system() {
        let jac = identity(3, 7);
        let b: Vec<f64> = (0..24).map(|i| i as f64 - 4.5).collect();
        for method in [LinearSolver::Bordered, LinearSolver::Dense] {
            let x = linear_solve(&jac, &b, method).unwrap();
            // identity on interior rows of U_n, boundary rows select U_N
            assert_eq!(jac.apply(&x), b);
        }
    }

    #[test]
    fn hand_system_d1_n2() {
        // rows: -U0 + U1 = 1, -2U1 + U2 = 0, U0 + U2 = 4
        // by substitution: U1 = U0 + 1, U2 = 2U0 + 2, 3U0 + 2 = 4
        let mut jac = StructuredJacobian::zeros(1, 2);
        jac.here = vec![vec![-1.0], vec![-2.0]];
        jac.next = vec![vec![1.0], vec![1.0]];
        jac.bc_origin = vec![1.0];
        jac.bc_infinity = vec![1.0];
        let b = [1.0, 0.0, 4.0];
        let expected = [2.0 / 3.0, 5.0 / 3.0, 10.0 / 3.0];
        for method in [LinearSolver::Bordered, LinearSolver::Dense] {
            let x = linear_solve(&jac, &b, method).unwrap();
            for (a, e) in x.iter().zip(expected) {
                assert!((a - e).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn singular_is_reported() {
        let jac = StructuredJacobian::zeros(2, 3);
        let b = vec![1.0; 8];
        for method in [LinearSolver::Bordered, LinearSolver::Dense] {
            assert!(matches!(
                linear_solve(&jac, &b, method),
                Err(Error::Singular { .. })
            ));
        }
        assert!(linear_solve(&jac, &[1.0; 3], LinearSolver::Bordered).is_err());
    }

    #[test]
    fn dense_limit() {
        let jac = identity(4, 2500);
        let b = vec![0.0; jac.size()];
        assert!(matches!(
            linear_solve(&jac, &b, LinearSolver::Dense),
            Err(Error::Argument(_))
        ));
        assert!(linear_solve(&jac, &b, LinearSolver::Bordered).is_ok());
    }

    #[test]
    fn dense_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let jac = random_structured(&mut rng, 3, 40);
        let b: Vec<f64> = (0..jac.size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x1 = linear_solve(&jac, &b, LinearSolver::Dense).unwrap();
        let x2 = linear_solve(&jac, &b, LinearSolver::Dense).unwrap();
        assert!(x1.iter().zip(&x2).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn bordered_matches_dense(seed: u64, d in 1usize..5, big in 2usize..60) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let jac = random_structured(&mut rng, d, big);
            let b: Vec<f64> = (0..jac.size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let xb = linear_solve(&jac, &b, LinearSolver::Bordered).unwrap();
            let xd = linear_solve(&jac, &b, LinearSolver::Dense).unwrap();
            let norm = xd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (a, e) in xb.iter().zip(&xd) {
                prop_assert!((a - e).abs() <= 1e-8 * (1.0 + norm), "{} vs {}", a, e);
            }
            let bnorm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(residual_inf(&jac, &xb, &b) <= 1e-10 * (1.0 + bnorm) * (1.0 + norm));
        }
    }
}
