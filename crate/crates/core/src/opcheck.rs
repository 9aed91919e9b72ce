//! Finite-difference checks of the weighted elliptic operator identities:
//! maximum principle, grad/div commutation, strain decomposition and the
//! scalar reduction of the matrix entropic-pressure equation.
//!
//! All grids are periodic with unit length. Stencils are chosen so that each
//! identity holds exactly in the discrete algebra, so residuals measure only
//! the dense solves.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, SMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

fn solve_dense(a: DMatrix<f64>, b: &DVector<f64>, what: &str) -> Result<DVector<f64>> {
    a.lu()
        .solve(b)
        .ok_or_else(|| Error::Singular(format!("{what} matrix is singular")))
}

fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = a.iter().map(|x| x * x).sum();
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

fn check_positive(name: &'static str, v: &[f64]) -> Result<()> {
    match v.iter().find(|x| !(**x > 0.0)) {
        Some(&x) => Err(Error::Domain { field: name, value: x }),
        None => Ok(()),
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha >= 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha must be non-negative, got {alpha}")))
    }
}

/// Periodic forward difference `(v[i+1] − v[i])/h`.
fn fwd(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let h = 1.0 / n as f64;
    (0..n).map(|i| (v[(i + 1) % n] - v[i]) / h).collect()
}

/// Periodic backward difference, the negative transpose of [`fwd`].
fn bwd(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let h = 1.0 / n as f64;
    (0..n).map(|i| (v[i] - v[(i + n - 1) % n]) / h).collect()
}

/// Face value between node `i` and `i+1`: arithmetic mean.
fn face_mean(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| 0.5 * (v[i] + v[(i + 1) % n])).collect()
}

/// Dense matrix of a linear map on `R^n`, column by column.
fn assemble(n: usize, op: impl Fn(&[f64]) -> Vec<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for c in 0..n {
        e[c] = 1.0;
        let col = op(&e);
        for r in 0..n {
            m[(r, c)] = col[r];
        }
        e[c] = 0.0;
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxPrincipleOutcome {
    pub min_phi: f64,
    pub max_g: f64,
    pub passed: bool,
}

/// `ρ⁻¹φ − α(ρ⁻¹φ_x)_x`, second-order conservative stencil with face
/// weights `mean(ρ⁻¹)`.
fn weighted_operator_1d(rho: &[f64], alpha: f64) -> DMatrix<f64> {
    let inv: Vec<f64> = rho.iter().map(|r| 1.0 / r).collect();
    let w = face_mean(&inv);
    assemble(rho.len(), |phi| {
        let flux: Vec<f64> = fwd(phi).iter().zip(&w).map(|(d, w)| w * d).collect();
        let div = bwd(&flux);
        (0..phi.len()).map(|i| inv[i] * phi[i] - alpha * div[i]).collect()
    })
}

/// Solve `ρ⁻¹φ − α(ρ⁻¹φ_x)_x = g` and check `min φ ≥ −1e−10·max|g|`.
pub fn max_principle_check(rho: &[f64], g: &[f64], alpha: f64) -> Result<MaxPrincipleOutcome> {
    if rho.len() != g.len() || rho.len() < 3 {
        return Err(Error::InvalidParameter("rho and g need equal length ≥ 3".into()));
    }
    check_positive("rho", rho)?;
    check_alpha(alpha)?;
    if let Some(&x) = g.iter().find(|x| !(**x >= 0.0)) {
        return Err(Error::InvalidParameter(format!("g must be non-negative, got {x}")));
    }
    let phi = solve_dense(weighted_operator_1d(rho, alpha), &DVector::from_column_slice(g), "max principle")?;
    let min_phi = phi.min();
    let max_g = g.iter().cloned().fold(0.0, f64::max);
    Ok(MaxPrincipleOutcome {
        min_phi,
        max_g,
        passed: min_phi >= -1e-10 * max_g,
    })
}

/// Staggered 1D operators: scalars on nodes, vectors on faces.
struct Staggered {
    rho_n: Vec<f64>,
    rho_f: Vec<f64>,
    alpha: f64,
}

impl Staggered {
    fn new(rho: &[f64], alpha: f64) -> Self {
        Self {
            rho_n: rho.to_vec(),
            rho_f: face_mean(rho),
            alpha,
        }
    }

    /// `L^v(ρ)u = ρu − α grad(ρ div u)`.
    fn vector_op(&self) -> DMatrix<f64> {
        assemble(self.rho_n.len(), |u| {
            let d: Vec<f64> = bwd(u).iter().zip(&self.rho_n).map(|(d, r)| r * d).collect();
            let g = fwd(&d);
            (0..u.len()).map(|i| self.rho_f[i] * u[i] - self.alpha * g[i]).collect()
        })
    }

    /// `L^s(ρ⁻¹)f = ρ⁻¹f − α div(ρ⁻¹ grad f)`, with face weight `1/ρ_f`.
    fn scalar_op_inverse_weight(&self) -> DMatrix<f64> {
        assemble(self.rho_n.len(), |f| {
            let flux: Vec<f64> = fwd(f).iter().zip(&self.rho_f).map(|(d, r)| d / r).collect();
            let div = bwd(&flux);
            (0..f.len()).map(|i| f[i] / self.rho_n[i] - self.alpha * div[i]).collect()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutationOutcome {
    /// `M_ρ (L^v(ρ))⁻¹ grad` vs `grad (L^s(ρ⁻¹))⁻¹ M_ρ⁻¹`.
    pub grad_residual: f64,
    /// `div (L^v(ρ))⁻¹ M_ρ` vs `M_ρ⁻¹ (L^s(ρ⁻¹))⁻¹ div`.
    pub div_residual: f64,
}

impl CommutationOutcome {
    pub fn max(&self) -> f64 {
        self.grad_residual.max(self.div_residual)
    }
}

/// Both commutation identities applied to the node field `f` (and to
/// `grad f` as a face field for the divergence side).
pub fn commutation_check(rho: &[f64], f: &[f64], alpha: f64) -> Result<CommutationOutcome> {
    if rho.len() != f.len() || rho.len() < 3 {
        return Err(Error::InvalidParameter("rho and f need equal length ≥ 3".into()));
    }
    check_positive("rho", rho)?;
    check_alpha(alpha)?;
    let st = Staggered::new(rho, alpha);
    let lv = st.vector_op();
    let ls = st.scalar_op_inverse_weight();

    let u = solve_dense(lv.clone(), &DVector::from_vec(fwd(f)), "vector operator")?;
    let lhs: Vec<f64> = u.iter().zip(&st.rho_f).map(|(u, r)| r * u).collect();
    let scaled: Vec<f64> = f.iter().zip(rho).map(|(f, r)| f / r).collect();
    let g = solve_dense(ls.clone(), &DVector::from_vec(scaled), "scalar operator")?;
    let rhs = fwd(g.as_slice());
    let grad_residual = rel_l2(&lhs, &rhs);

    let w = fwd(f);
    let rw: Vec<f64> = w.iter().zip(&st.rho_f).map(|(w, r)| r * w).collect();
    let v = solve_dense(lv, &DVector::from_vec(rw), "vector operator")?;
    let lhs = bwd(v.as_slice());
    let s = solve_dense(ls, &DVector::from_vec(bwd(&w)), "scalar operator")?;
    let rhs: Vec<f64> = s.iter().zip(rho).map(|(s, r)| s / r).collect();
    let div_residual = rel_l2(&lhs, &rhs);

    Ok(CommutationOutcome {
        grad_residual,
        div_residual,
    })
}

/// Parts of a velocity gradient: symmetric strain, spin, and the deviatoric
/// and isotropic pieces of the strain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrainParts<const D: usize> {
    pub s: SMatrix<f64, D, D>,
    pub omega: SMatrix<f64, D, D>,
    pub s_dev: SMatrix<f64, D, D>,
    pub s_iso: SMatrix<f64, D, D>,
}

pub fn strain_decompose<const D: usize>(j: &SMatrix<f64, D, D>) -> StrainParts<D> {
    let s = (j + j.transpose()) * 0.5;
    let omega = j - s;
    let s_iso = SMatrix::<f64, D, D>::identity() * (s.trace() / D as f64);
    StrainParts {
        s,
        omega,
        s_dev: s - s_iso,
        s_iso,
    }
}

/// Largest relative defect among the three trace identities.
pub fn strain_identity_residual<const D: usize>(j: &SMatrix<f64, D, D>) -> f64 {
    let p = strain_decompose(j);
    let tr_j2 = (j * j).trace();
    let scale = j.norm_squared().max(f64::MIN_POSITIVE);
    let r1 = (tr_j2 - (p.s.norm_squared() - p.omega.norm_squared())).abs() / scale;
    let r2 = (j.trace().powi(2) - p.s.trace().powi(2)).abs() / scale;
    let r3 = (tr_j2
        - ((p.s_dev * p.s_dev).trace() + p.s.trace().powi(2) / D as f64 + (p.omega * p.omega).trace()))
    .abs()
        / scale;
    r1.max(r2).max(r3)
}

/// Periodic `n × n` grid, row-major, fields of length `n²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FdGrid2 {
    pub n: usize,
}

impl FdGrid2 {
    fn len(&self) -> usize {
        self.n * self.n
    }

    fn shift(&self, idx: usize, axis: usize, by: isize) -> usize {
        let n = self.n as isize;
        let (r, c) = ((idx / self.n) as isize, (idx % self.n) as isize);
        let (r, c) = if axis == 0 { ((r + by).rem_euclid(n), c) } else { (r, (c + by).rem_euclid(n)) };
        (r * n + c) as usize
    }

    fn fwd(&self, v: &[f64], axis: usize) -> Vec<f64> {
        let h = 1.0 / self.n as f64;
        (0..v.len()).map(|i| (v[self.shift(i, axis, 1)] - v[i]) / h).collect()
    }

    fn bwd(&self, v: &[f64], axis: usize) -> Vec<f64> {
        let h = 1.0 / self.n as f64;
        (0..v.len()).map(|i| (v[i] - v[self.shift(i, axis, -1)]) / h).collect()
    }

    /// Face weights `mean(ρ⁻¹)` per axis.
    fn face_weights(&self, rho: &[f64]) -> [Vec<f64>; 2] {
        std::array::from_fn(|axis| {
            (0..rho.len())
                .map(|i| 0.5 * (1.0 / rho[i] + 1.0 / rho[self.shift(i, axis, 1)]))
                .collect()
        })
    }

    /// `∇·(ρ⁻¹ ∇·Σ)` for a 2×2 matrix field stored as `[Σ00, Σ01, Σ10, Σ11]`.
    fn div_weighted_div(&self, sigma: &[Vec<f64>; 4], w: &[Vec<f64>; 2]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for i in 0..2 {
            let mut v = self.fwd(&sigma[2 * i], 0);
            for (a, b) in v.iter_mut().zip(self.fwd(&sigma[2 * i + 1], 1)) {
                *a += b;
            }
            let flux: Vec<f64> = v.iter().zip(&w[i]).map(|(v, w)| v * w).collect();
            for (o, d) in out.iter_mut().zip(self.bwd(&flux, i)) {
                *o += d;
            }
        }
        out
    }
}

/// Coupled solve of `ρ⁻¹Σ − α∇·(ρ⁻¹∇·Σ)I = fI + G` against the reduction
/// `Σ = ρG + σI`, `ρ⁻¹σ − α∇·(ρ⁻¹∇σ) = f + α∇·(ρ⁻¹∇·(ρG))`. Returns the
/// relative Frobenius discrepancy.
pub fn matrix_elliptic_reduce_check(
    grid: FdGrid2,
    rho: &[f64],
    f: &[f64],
    g: &[Vec<f64>; 4],
    alpha: f64,
) -> Result<f64> {
    let m = grid.len();
    if grid.n < 3 || grid.n > 24 {
        return Err(Error::InvalidParameter(format!("grid size must be in 3..=24, got {}", grid.n)));
    }
    if rho.len() != m || f.len() != m || g.iter().any(|c| c.len() != m) {
        return Err(Error::InvalidParameter("field lengths must equal n²".into()));
    }
    check_positive("rho", rho)?;
    check_alpha(alpha)?;
    let w = grid.face_weights(rho);

    let coupled = assemble(4 * m, |x| {
        let sig: [Vec<f64>; 4] = std::array::from_fn(|c| x[c * m..(c + 1) * m].to_vec());
        let d = grid.div_weighted_div(&sig, &w);
        let mut out = vec![0.0; 4 * m];
        for c in 0..4 {
            for i in 0..m {
                out[c * m + i] = sig[c][i] / rho[i];
                if c == 0 || c == 3 {
                    out[c * m + i] -= alpha * d[i];
                }
            }
        }
        out
    });
    let mut b = vec![0.0; 4 * m];
    for c in 0..4 {
        for i in 0..m {
            b[c * m + i] = g[c][i] + if c == 0 || c == 3 { f[i] } else { 0.0 };
        }
    }
    let full = solve_dense(coupled, &DVector::from_vec(b), "coupled matrix")?;

    let scalar = assemble(m, |s| {
        let zero = vec![0.0; m];
        let d = grid.div_weighted_div(&[s.to_vec(), zero.clone(), zero, s.to_vec()], &w);
        (0..m).map(|i| s[i] / rho[i] - alpha * d[i]).collect()
    });
    let rho_g: [Vec<f64>; 4] = std::array::from_fn(|c| g[c].iter().zip(rho).map(|(g, r)| r * g).collect());
    let src = grid.div_weighted_div(&rho_g, &w);
    let rhs: Vec<f64> = (0..m).map(|i| f[i] + alpha * src[i]).collect();
    let sigma = solve_dense(scalar, &DVector::from_vec(rhs), "scalar")?;
    let mut reduced = vec![0.0; 4 * m];
    for c in 0..4 {
        for i in 0..m {
            reduced[c * m + i] = rho_g[c][i] + if c == 0 || c == 3 { sigma[i] } else { 0.0 };
        }
    }
    Ok(rel_l2(full.as_slice(), &reduced))
}

/// Smooth random periodic field with values in `[−1, 1]`.
fn smooth_1d(rng: &mut impl Rng, n: usize, modes: usize) -> Vec<f64> {
    let coef: Vec<(f64, f64)> = (0..modes).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm: f64 = coef.iter().map(|(a, b)| a.abs() + b.abs()).sum::<f64>().max(1e-12);
    (0..n)
        .map(|i| {
            let x = i as f64 / n as f64;
            coef.iter()
                .enumerate()
                .map(|(m, (a, b))| {
                    let k = 2.0 * PI * (m + 1) as f64;
                    a * (k * x).cos() + b * (k * x).sin()
                })
                .sum::<f64>()
                / norm
        })
        .collect()
}

fn smooth_2d(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let a = smooth_1d(rng, n, 3);
    let b = smooth_1d(rng, n, 3);
    let c: f64 = rng.gen_range(-1.0..1.0);
    (0..n * n).map(|i| 0.5 * (a[i / n] * b[i % n] + c * a[i % n])).collect()
}

/// `ρ = 10^s` for a smooth `s ∈ [−1, 1]`: log-uniform over `[0.1, 10]`.
fn random_density(s: &[f64]) -> Vec<f64> {
    s.iter().map(|s| 10f64.powf(*s)).collect()
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub instances: usize,
    /// Worst observed residual (for the maximum principle, the worst
    /// `−min φ / max g`).
    pub worst: f64,
    pub tolerance: f64,
    pub seed: u64,
    pub seconds: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteSizes {
    pub max_principle: usize,
    pub commutation: usize,
    pub strain: usize,
    pub matrix_reduce: usize,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        Self {
            max_principle: 500,
            commutation: 100,
            strain: 10_000,
            matrix_reduce: 40,
        }
    }
}

/// Instance `i` of a check seeded with `seed` uses `ChaCha8(seed + i)`,
/// so any failure replays in isolation.
fn instance_rng(seed: u64, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64))
}

pub fn run_max_principle(seed: u64, instances: usize) -> Result<CheckReport> {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..instances {
        let mut rng = instance_rng(seed, i);
        let n = rng.gen_range(8..=64);
        let rho = random_density(&smooth_1d(&mut rng, n, 4));
        let g: Vec<f64> = smooth_1d(&mut rng, n, 4).iter().map(|v| v * v).collect();
        let alpha = log_uniform(&mut rng, 1e-4, 1e-1);
        let out = max_principle_check(&rho, &g, alpha)?;
        worst = worst.max(-out.min_phi / out.max_g);
    }
    Ok(CheckReport {
        name: "max_principle",
        instances,
        worst,
        tolerance: 1e-10,
        seed,
        seconds: t.elapsed().as_secs_f64(),
    })
}

pub fn run_commutation(seed: u64, instances: usize) -> Result<CheckReport> {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..instances {
        let mut rng = instance_rng(seed, i);
        let n = 64;
        let rho = random_density(&smooth_1d(&mut rng, n, 4));
        let f = smooth_1d(&mut rng, n, 4);
        let alpha = log_uniform(&mut rng, 1e-4, 1e-1);
        worst = worst.max(commutation_check(&rho, &f, alpha)?.max());
    }
    Ok(CheckReport {
        name: "commutation",
        instances,
        worst,
        tolerance: 1e-10,
        seed,
        seconds: t.elapsed().as_secs_f64(),
    })
}

pub fn run_strain(seed: u64, instances: usize) -> Result<CheckReport> {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let j = SMatrix::<f64, 3, 3>::from_fn(|_, _| rng.gen_range(-10.0..10.0));
        worst = worst.max(strain_identity_residual(&j));
    }
    Ok(CheckReport {
        name: "strain_identities",
        instances,
        worst,
        tolerance: 1e-12,
        seed,
        seconds: t.elapsed().as_secs_f64(),
    })
}

pub fn run_matrix_reduce(seed: u64, instances: usize) -> Result<CheckReport> {
    let t = Instant::now();
    let grid = FdGrid2 { n: 16 };
    let mut worst: f64 = 0.0;
    for i in 0..instances {
        let mut rng = instance_rng(seed, i);
        let rho = random_density(&smooth_2d(&mut rng, grid.n));
        let f = smooth_2d(&mut rng, grid.n);
        let g: [Vec<f64>; 4] = std::array::from_fn(|_| smooth_2d(&mut rng, grid.n));
        let alpha = log_uniform(&mut rng, 1e-4, 1e-1);
        worst = worst.max(matrix_elliptic_reduce_check(grid, &rho, &f, &g, alpha)?);
    }
    Ok(CheckReport {
        name: "matrix_elliptic_reduce",
        instances,
        worst,
        tolerance: 1e-8,
        seed,
        seconds: t.elapsed().as_secs_f64(),
    })
}

/// All four checks, run in parallel.
pub fn run_suite(seed: u64, sizes: SuiteSizes) -> Result<Vec<CheckReport>> {
    let ((a, b), (c, d)) = rayon::join(
        || {
            rayon::join(
                || run_max_principle(seed, sizes.max_principle),
                || run_commutation(seed, sizes.commutation),
            )
        },
        || {
            rayon::join(
                || run_strain(seed, sizes.strain),
                || run_matrix_reduce(seed, sizes.matrix_reduce),
            )
        },
    );
    Ok(vec![a?, b?, c?, d?])
}
