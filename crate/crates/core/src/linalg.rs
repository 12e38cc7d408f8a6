//! Exact rank and inertia of rational matrices.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::Q;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

/// Rank by Gaussian elimination.
pub fn rank(m: &[Vec<Q>]) -> usize {
    let mut a: Vec<Vec<Q>> = m.to_vec();
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let pivot = a[r][c].clone();
        let prow: Vec<(usize, Q)> = (c..cols).filter(|&j| !a[r][j].is_zero()).map(|j| (j, &a[r][j] / &pivot)).collect();
        for i in r + 1..rows {
            if a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for (j, v) in &prow {
                let d = &f * v;
                a[i][*j] -= d;
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// Inertia of a symmetric matrix by congruence: `1×1` pivots on non-zero
/// diagonal entries, `2×2` pivots `[[0,b],[b,0]]` when the diagonal vanishes.
pub fn inertia(m: &[Vec<Q>]) -> Inertia {
    let mut a: Vec<Vec<Q>> = m.to_vec();
    let mut alive: Vec<usize> = (0..a.len()).collect();
    let mut out = Inertia::default();
    while !alive.is_empty() {
        if let Some(pos) = alive.iter().position(|&i| !a[i][i].is_zero()) {
            let p = alive.swap_remove(pos);
            let d = a[p][p].clone();
            if d.is_positive() {
                out.positive += 1;
            } else {
                out.negative += 1;
            }
            let row: Vec<(usize, Q)> = alive.iter().filter(|&&j| !a[p][j].is_zero()).map(|&j| (j, a[p][j].clone())).collect();
            for (i, ai) in &row {
                let f = ai / &d;
                for (j, aj) in &row {
                    let t = &f * aj;
                    a[*i][*j] -= t;
                }
            }
            continue;
        }
        let pair = alive.iter().enumerate().find_map(|(x, &i)| {
            alive.iter().enumerate().skip(x + 1).find(|(_, &j)| !a[i][j].is_zero()).map(|(y, _)| (x, y))
        });
        let Some((x, y)) = pair else {
            out.zero += alive.len();
            break;
        };
        let (p, q) = (alive[x], alive[y]);
        alive.swap_remove(y.max(x));
        alive.swap_remove(y.min(x));
        out.positive += 1;
        out.negative += 1;
        // Schur complement of [[0,b],[b,0]]: inverse is [[0,1/b],[1/b,0]]
        let b = a[p][q].clone();
        let rows: Vec<(usize, Q, Q)> = alive
            .iter()
            .filter(|&&j| !a[p][j].is_zero() || !a[q][j].is_zero())
            .map(|&j| (j, a[p][j].clone(), a[q][j].clone()))
            .collect();
        for (i, ip, iq) in &rows {
            for (j, jp, jq) in &rows {
                let t = (ip * jq + iq * jp) / &b;
                a[*i][*j] -= t;
            }
        }
    }
    out
}
