//! Transportation simplex (network simplex on the bipartite supply/demand tree)
//! with MODI potentials and a primal-dual certificate.

use crate::error::{Error, Result};

/// Optimal solution of `min sum c_ij x_ij` subject to row sums `a` and column sums `b`.
#[derive(Debug, Clone)]
pub struct TransportSolution {
    /// Row-major `a.len() x b.len()` flows.
    pub flow: Vec<f64>,
    pub cost: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// `|primal - dual| + max(u_i + v_j - c_ij, 0)`.
    pub dual_gap: f64,
    pub iterations: usize,
}

struct Tree {
    rows: usize,
    cols: usize,
    /// Basic cells `(i, j, flow)`.
    cells: Vec<(usize, usize, f64)>,
}

impl Tree {
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        // nodes: rows 0..n, columns n..n+m; entries (neighbor, cell index)
        let mut adj = vec![Vec::new(); self.rows + self.cols];
        for (e, &(i, j, _)) in self.cells.iter().enumerate() {
            adj[i].push((self.rows + j, e));
            adj[self.rows + j].push((i, e));
        }
        adj
    }

    fn potentials(&self, c: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (n, m) = (self.rows, self.cols);
        let adj = self.adjacency();
        let mut pot = vec![f64::NAN; n + m];
        let mut stack = vec![0usize];
        pot[0] = 0.0;
        while let Some(x) = stack.pop() {
            for &(y, e) in &adj[x] {
                if pot[y].is_nan() {
                    let (i, j, _) = self.cells[e];
                    pot[y] = c[i * m + j] - pot[x];
                    stack.push(y);
                }
            }
        }
        (pot[..n].to_vec(), pot[n..].to_vec())
    }

    /// Cell indices on the tree path from column node of `j` to row node `i`.
    fn path(&self, i: usize, j: usize) -> Vec<usize> {
        let n = self.rows;
        let adj = self.adjacency();
        let start = n + j;
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; n + self.cols];
        let mut seen = vec![false; n + self.cols];
        seen[start] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            if x == i {
                break;
            }
            for &(y, e) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    prev[y] = Some((x, e));
                    queue.push_back(y);
                }
            }
        }
        let mut out = Vec::new();
        let mut x = i;
        while let Some((p, e)) = prev[x] {
            out.push(e);
            x = p;
        }
        // out runs from row i back towards column j
        out
    }
}

fn northwest_corner(a: &[f64], b: &[f64]) -> Tree {
    let (n, m) = (a.len(), b.len());
    let (mut ra, mut rb) = (a.to_vec(), b.to_vec());
    let mut cells = Vec::with_capacity(n + m - 1);
    let (mut i, mut j) = (0, 0);
    loop {
        let x = ra[i].min(rb[j]);
        cells.push((i, j, x));
        ra[i] -= x;
        rb[j] -= x;
        if i == n - 1 && j == m - 1 {
            break;
        }
        if j == m - 1 || (i < n - 1 && ra[i] <= rb[j]) {
            i += 1;
        } else {
            j += 1;
        }
    }
    // the final cell absorbs any rounding residue
    let last = cells.len() - 1;
    cells[last].2 = cells[last].2.max(0.0);
    Tree { rows: n, cols: m, cells }
}

/// Solves the balanced transportation problem. `a` and `b` must be strictly
/// positive with equal sums; `c` is row-major.
pub fn solve(a: &[f64], b: &[f64], c: &[f64], tol: f64) -> Result<TransportSolution> {
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 || c.len() != n * m {
        return Err(Error::LengthMismatch { expected: n * m, got: c.len() });
    }
    let scale = c.iter().fold(1.0f64, |s, x| s.max(x.abs()));
    let enter_tol = 1e-13 * scale;
    let mut tree = northwest_corner(a, b);
    let max_iter = 50 * (n + m) * (n + m) + 1000;
    let mut degenerate_run = 0usize;
    let mut iterations = 0;
    loop {
        let (u, v) = tree.potentials(c);
        let mut basic = vec![false; n * m];
        for &(i, j, _) in &tree.cells {
            basic[i * m + j] = true;
        }
        let bland = degenerate_run > 2 * (n + m);
        let mut entering: Option<(usize, usize, f64)> = None;
        'scan: for i in 0..n {
            for j in 0..m {
                if basic[i * m + j] {
                    continue;
                }
                let r = c[i * m + j] - u[i] - v[j];
                if r < -enter_tol {
                    if bland {
                        entering = Some((i, j, r));
                        break 'scan;
                    }
                    if entering.is_none_or(|(_, _, best)| r < best) {
                        entering = Some((i, j, r));
                    }
                }
            }
        }
        let Some((ei, ej, _)) = entering else {
            let flow = dense(&tree, n, m);
            return certify(a, b, c, flow, u, v, iterations, tol * scale);
        };
        iterations += 1;
        if iterations > max_iter {
            return Err(Error::SolverFailure(format!("no optimum after {max_iter} pivots")));
        }
        let path = tree.path(ei, ej);
        // path[0] touches row ei and receives -theta; signs alternate from there
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (k, &e) in path.iter().enumerate() {
            if k % 2 == 0 {
                let x = tree.cells[e].2;
                let better = x < theta || (bland && x == theta && e < leave);
                if better {
                    theta = x;
                    leave = e;
                }
            }
        }
        for (k, &e) in path.iter().enumerate() {
            let x = &mut tree.cells[e].2;
            if k % 2 == 0 {
                *x = (*x - theta).max(0.0);
            } else {
                *x += theta;
            }
        }
        degenerate_run = if theta > 0.0 { 0 } else { degenerate_run + 1 };
        tree.cells[leave] = (ei, ej, theta);
    }
}

fn dense(tree: &Tree, n: usize, m: usize) -> Vec<f64> {
    let mut flow = vec![0.0; n * m];
    for &(i, j, x) in &tree.cells {
        flow[i * m + j] += x;
    }
    flow
}

#[allow(clippy::too_many_arguments)]
fn certify(
    a: &[f64],
    b: &[f64],
    c: &[f64],
    flow: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    iterations: usize,
    allowed: f64,
) -> Result<TransportSolution> {
    let m = b.len();
    let primal: f64 = flow.iter().zip(c).map(|(x, c)| x * c).sum();
    let dual: f64 = a.iter().zip(&u).map(|(a, u)| a * u).sum::<f64>() + b.iter().zip(&v).map(|(b, v)| b * v).sum::<f64>();
    let mut violation = 0.0f64;
    for (i, ui) in u.iter().enumerate() {
        for (j, vj) in v.iter().enumerate() {
            violation = violation.max(ui + vj - c[i * m + j]);
        }
    }
    let dual_gap = (primal - dual).abs() + violation;
    if !(dual_gap <= allowed) {
        return Err(Error::SolverFailure(format!("optimality certificate failed: gap {dual_gap:e}")));
    }
    Ok(TransportSolution {
        flow,
        cost: primal,
        u,
        v,
        dual_gap,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for k in 0..n {
                let mut q = p.clone();
                q.insert(k, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn uniform_square_matches_best_permutation() {
        // With equal uniform marginals the optimum is attained at a permutation matrix.
        let mut seed = 7u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for n in 2..=6 {
            let c: Vec<f64> = (0..n * n).map(|_| next()).collect();
            let a = vec![1.0 / n as f64; n];
            let s = solve(&a, &a, &c, 1e-10).unwrap();
            let best = permutations(n)
                .iter()
                .map(|p| p.iter().enumerate().map(|(i, &j)| c[i * n + j]).sum::<f64>() / n as f64)
                .fold(f64::INFINITY, f64::min);
            assert!((s.cost - best).abs() < 1e-12, "n={n}: {} vs {best}", s.cost);
            assert!(s.dual_gap <= 1e-10);
        }
    }

    #[test]
    fn degenerate_identity() {
        let a = [0.25; 4];
        let c: Vec<f64> = (0..16).map(|k| if k / 4 == k % 4 { 0.0 } else { 1.0 }).collect();
        let s = solve(&a, &a, &c, 1e-10).unwrap();
        assert!(s.cost.abs() < 1e-15);
    }
}
