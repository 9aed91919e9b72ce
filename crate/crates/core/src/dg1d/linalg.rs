//! Symmetric periodic block-tridiagonal systems arising from P¹ DG on a ring.
//!
//! Small and medium systems are factored with a banded Cholesky after
//! reordering cells as `0, N-1, 1, N-2, ...`, which folds the periodic wrap
//! into a band of half-width 5. Large systems use Jacobi-preconditioned CG.

use crate::error::{Error, Result};

pub type Block = [[f64; 2]; 2];

/// Largest mesh for which [`LinearSolver::Auto`] picks the direct path.
pub const DIRECT_SOLVE_MAX_CELLS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearSolver {
    /// Direct below [`DIRECT_SOLVE_MAX_CELLS`] cells, PCG with relative
    /// tolerance 1e-10 above.
    Auto,
    Direct,
    Pcg { rel_tol: f64, max_iter: usize },
}

impl Default for LinearSolver {
    fn default() -> Self {
        LinearSolver::Auto
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub rel_residual: f64,
}

/// Symmetric matrix with 2×2 blocks: `diag[j]` on cell `j` and `upper[j]`
/// coupling cell `j` (rows) to cell `j+1 mod N` (columns). The lower
/// blocks are the transposes.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCyclicMatrix {
    pub diag: Vec<Block>,
    pub upper: Vec<Block>,
}

fn transpose(b: &Block) -> Block {
    [[b[0][0], b[1][0]], [b[0][1], b[1][1]]]
}

impl BlockCyclicMatrix {
    pub fn zeros(n_cells: usize) -> Self {
        Self {
            diag: vec![[[0.0; 2]; 2]; n_cells],
            upper: vec![[[0.0; 2]; 2]; n_cells],
        }
    }

    pub fn n_cells(&self) -> usize {
        self.diag.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.diag.len()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n_cells();
        let mut y = vec![0.0; 2 * n];
        for j in 0..n {
            let r = (j + 1) % n;
            let d = &self.diag[j];
            let u = &self.upper[j];
            let (xj0, xj1) = (x[2 * j], x[2 * j + 1]);
            let (xr0, xr1) = (x[2 * r], x[2 * r + 1]);
            y[2 * j] += d[0][0] * xj0 + d[0][1] * xj1 + u[0][0] * xr0 + u[0][1] * xr1;
            y[2 * j + 1] += d[1][0] * xj0 + d[1][1] * xj1 + u[1][0] * xr0 + u[1][1] * xr1;
            // transpose block: row r, column j
            y[2 * r] += u[0][0] * xj0 + u[1][0] * xj1;
            y[2 * r + 1] += u[0][1] * xj0 + u[1][1] * xj1;
        }
        y
    }

    /// Dense copy, for tests and small oracles.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.n_cells();
        let mut m = nalgebra::DMatrix::zeros(2 * n, 2 * n);
        for j in 0..n {
            let r = (j + 1) % n;
            let ut = transpose(&self.upper[j]);
            for a in 0..2 {
                for b in 0..2 {
                    m[(2 * j + a, 2 * j + b)] += self.diag[j][a][b];
                    m[(2 * j + a, 2 * r + b)] += self.upper[j][a][b];
                    m[(2 * r + a, 2 * j + b)] += ut[a][b];
                }
            }
        }
        m
    }

    pub fn factor(&self) -> Result<BandedCholesky> {
        BandedCholesky::new(self)
    }

    pub fn solve(&self, rhs: &[f64], solver: LinearSolver) -> Result<(Vec<f64>, SolveStats)> {
        let direct = match solver {
            LinearSolver::Auto => self.n_cells() <= DIRECT_SOLVE_MAX_CELLS,
            LinearSolver::Direct => true,
            LinearSolver::Pcg { .. } => false,
        };
        if direct {
            let x = self.factor()?.solve(rhs);
            let rel = relative_residual(self, &x, rhs);
            Ok((
                x,
                SolveStats {
                    iterations: 1,
                    rel_residual: rel,
                },
            ))
        } else {
            let (tol, max_iter) = match solver {
                LinearSolver::Pcg { rel_tol, max_iter } => (rel_tol, max_iter),
                _ => (1e-10, 20 * self.dim()),
            };
            pcg_jacobi(self, rhs, tol, max_iter)
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn relative_residual(a: &BlockCyclicMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r: f64 = ax.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
    let nb = dot(b, b).sqrt();
    if nb == 0.0 {
        r.sqrt()
    } else {
        r.sqrt() / nb
    }
}

const BAND: usize = 5;

/// Banded Cholesky factor of a [`BlockCyclicMatrix`] in the folded ordering.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    /// position of cell `c` in the folded ordering
    pos: Vec<usize>,
    /// `l[i * (BAND + 1) + (i - j)] = L[i][j]`
    l: Vec<f64>,
}

fn folded_positions(n_cells: usize) -> Vec<usize> {
    let mut pos = vec![0; n_cells];
    for p in 0..n_cells {
        let cell = if p % 2 == 0 { p / 2 } else { n_cells - 1 - (p - 1) / 2 };
        pos[cell] = p;
    }
    pos
}

impl BandedCholesky {
    fn new(a: &BlockCyclicMatrix) -> Result<Self> {
        let nc = a.n_cells();
        let n = 2 * nc;
        let pos = folded_positions(nc);
        let w = BAND + 1;
        let mut l = vec![0.0; n * w];
        let mut put = |i: usize, j: usize, v: f64| {
            // store lower triangle only
            let (i, j) = if i >= j { (i, j) } else { (j, i) };
            debug_assert!(i - j <= BAND);
            l[i * w + (i - j)] += v;
        };
        for c in 0..nc {
            let r = (c + 1) % nc;
            let (pc, pr) = (2 * pos[c], 2 * pos[r]);
            for p in 0..2 {
                for q in 0..2 {
                    if pc + p >= pc + q {
                        put(pc + p, pc + q, a.diag[c][p][q]);
                    }
                    put(pc + p, pr + q, a.upper[c][p][q]);
                }
            }
        }
        for i in 0..n {
            let j0 = i.saturating_sub(BAND);
            for j in j0..=i {
                let mut s = l[i * w + (i - j)];
                let k0 = j0.max(j.saturating_sub(BAND));
                for k in k0..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::NotPositiveDefinite { row: i, pivot: s });
                    }
                    l[i * w] = s.sqrt();
                } else {
                    l[i * w + (i - j)] = s / l[j * w];
                }
            }
        }
        Ok(Self { n, pos, l })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let w = BAND + 1;
        let mut y = vec![0.0; n];
        for (c, &p) in self.pos.iter().enumerate() {
            y[2 * p] = rhs[2 * c];
            y[2 * p + 1] = rhs[2 * c + 1];
        }
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(BAND)..i {
                s -= self.l[i * w + (i - k)] * y[k];
            }
            y[i] = s / self.l[i * w];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..(i + BAND + 1).min(n) {
                s -= self.l[k * w + (k - i)] * y[k];
            }
            y[i] = s / self.l[i * w];
        }
        let mut x = vec![0.0; n];
        for (c, &p) in self.pos.iter().enumerate() {
            x[2 * c] = y[2 * p];
            x[2 * c + 1] = y[2 * p + 1];
        }
        x
    }
}

fn pcg_jacobi(
    a: &BlockCyclicMatrix,
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveStats)> {
    let n = a.dim();
    let inv_diag: Vec<f64> = (0..n)
        .map(|i| 1.0 / a.diag[i / 2][i % 2][i % 2])
        .collect();
    let nb = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if nb == 0.0 {
        return Ok((
            x,
            SolveStats {
                iterations: 0,
                rel_residual: 0.0,
            },
        ));
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        let ap = a.matvec(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotPositiveDefinite {
                row: it,
                pivot: pap,
            });
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        let rel = dot(&r, &r).sqrt() / nb;
        if rel <= rel_tol {
            return Ok((
                x,
                SolveStats {
                    iterations: it,
                    rel_residual: rel,
                },
            ));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverDiverged {
        iterations: max_iter,
        residual: relative_residual(a, &x, b),
    })
}
