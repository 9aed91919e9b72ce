//! Penalized weak derivative and the SIPG discretization of
//! `ρ⁻¹Σ − α(ρ⁻¹Σ_x)_x = f`.

use super::linalg::{BandedCholesky, Block, BlockCyclicMatrix, LinearSolver, SolveStats};
use super::{DgField, Mesh1D, GAUSS_NODES, GAUSS_WEIGHTS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyParams {
    pub c_penalty: f64,
    pub poly_order: u32,
}

impl Default for PenaltyParams {
    fn default() -> Self {
        Self {
            c_penalty: 20.0,
            poly_order: 1,
        }
    }
}

impl PenaltyParams {
    pub fn new(c_penalty: f64) -> Result<Self> {
        if !(c_penalty > 0.0) || !c_penalty.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "penalty constant must be positive, got {c_penalty}"
            )));
        }
        Ok(Self {
            c_penalty,
            poly_order: 1,
        })
    }

    /// Face penalty `C p² / h`.
    pub fn tau(&self, h: f64) -> f64 {
        let p = self.poly_order as f64;
        self.c_penalty * p * p / h
    }
}

// Jump of the test functions across a face, split by side: [[φ]] = φ_L − φ_R
// with φ_L evaluated at ξ = +1 and φ_R at ξ = −1.
const JUMP_L: [f64; 2] = [1.0, 1.0];
const JUMP_R: [f64; 2] = [-1.0, 1.0];

fn outer(a: &[f64; 2], b: &[f64; 2], s: f64) -> Block {
    [
        [s * a[0] * b[0], s * a[0] * b[1]],
        [s * a[1] * b[0], s * a[1] * b[1]],
    ]
}

fn add_block(dst: &mut Block, src: &Block) {
    for a in 0..2 {
        for b in 0..2 {
            dst[a][b] += src[a][b];
        }
    }
}

/// Left-hand side of the weak derivative: mass plus jump penalty.
fn derivative_matrix(mesh: &Mesh1D, params: &PenaltyParams) -> BlockCyclicMatrix {
    let n = mesh.n_cells();
    let h = mesh.h();
    let tau = params.tau(h);
    let mut m = BlockCyclicMatrix::zeros(n);
    for j in 0..n {
        m.diag[j] = [[h, 0.0], [0.0, h / 3.0]];
    }
    for f in 0..n {
        let r = mesh.right_of(f);
        add_block(&mut m.diag[f], &outer(&JUMP_L, &JUMP_L, tau));
        add_block(&mut m.diag[r], &outer(&JUMP_R, &JUMP_R, tau));
        add_block(&mut m.upper[f], &outer(&JUMP_L, &JUMP_R, tau));
    }
    m
}

/// Right-hand side `−∫u φ_x + Σ_f ⟨u⟩[[φ]]`.
fn derivative_load(u: &DgField) -> Vec<f64> {
    let mesh = u.mesh();
    let n = mesh.n_cells();
    let c = u.coeffs();
    let mut b = vec![0.0; 2 * n];
    for j in 0..n {
        b[2 * j + 1] = -2.0 * c[j][0];
    }
    for f in 0..n {
        let r = mesh.right_of(f);
        let avg = 0.5 * ((c[f][0] + c[f][1]) + (c[r][0] - c[r][1]));
        b[2 * f] += avg * JUMP_L[0];
        b[2 * f + 1] += avg * JUMP_L[1];
        b[2 * r] += avg * JUMP_R[0];
        b[2 * r + 1] += avg * JUMP_R[1];
    }
    b
}

/// The weak-derivative operator for a fixed mesh. Its matrix does not depend
/// on the differentiated field, so it is factored once and reused.
#[derive(Debug, Clone)]
pub struct DerivativeOperator {
    mesh: Mesh1D,
    params: PenaltyParams,
    matrix: BlockCyclicMatrix,
    factor: Option<BandedCholesky>,
    solver: LinearSolver,
}

impl DerivativeOperator {
    pub fn new(mesh: &Mesh1D, params: PenaltyParams) -> Result<Self> {
        Self::with_solver(mesh, params, LinearSolver::Auto)
    }

    pub fn with_solver(mesh: &Mesh1D, params: PenaltyParams, solver: LinearSolver) -> Result<Self> {
        let matrix = derivative_matrix(mesh, &params);
        let direct = match solver {
            LinearSolver::Auto => mesh.n_cells() <= super::linalg::DIRECT_SOLVE_MAX_CELLS,
            LinearSolver::Direct => true,
            LinearSolver::Pcg { .. } => false,
        };
        let factor = if direct { Some(matrix.factor()?) } else { None };
        Ok(Self {
            mesh: *mesh,
            params,
            matrix,
            factor,
            solver,
        })
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn params(&self) -> &PenaltyParams {
        &self.params
    }

    pub fn matrix(&self) -> &BlockCyclicMatrix {
        &self.matrix
    }

    /// `q` with `(q, φ) + Σ τ[[q]][[φ]] = −(u, φ_x) + Σ ⟨u⟩[[φ]]` for all φ.
    pub fn apply(&self, u: &DgField) -> Result<DgField> {
        if u.mesh() != &self.mesh {
            return Err(Error::InvalidParameter(
                "field and operator live on different meshes".into(),
            ));
        }
        let b = derivative_load(u);
        let x = match &self.factor {
            Some(f) => f.solve(&b),
            None => self.matrix.solve(&b, self.solver)?.0,
        };
        Ok(DgField::from_flat(&self.mesh, &x))
    }
}

pub fn weak_derivative(u: &DgField, params: &PenaltyParams) -> Result<DgField> {
    DerivativeOperator::new(u.mesh(), *params)?.apply(u)
}

/// Reciprocal density at the Gauss points and the two cell-edge traces,
/// rejecting non-positive values.
fn inverse_density(rho: &DgField) -> Result<(Vec<[f64; 3]>, Vec<[f64; 2]>)> {
    let mut quad = Vec::with_capacity(rho.coeffs().len());
    let mut edge = Vec::with_capacity(rho.coeffs().len());
    for c in rho.coeffs() {
        let (lo, hi) = (c[0] - c[1], c[0] + c[1]);
        for v in [c[0], lo, hi] {
            if !(v > 0.0) {
                return Err(Error::Domain {
                    field: "rho",
                    value: v,
                });
            }
        }
        quad.push(GAUSS_NODES.map(|xi| 1.0 / (c[0] + c[1] * xi)));
        edge.push([1.0 / lo, 1.0 / hi]);
    }
    Ok((quad, edge))
}

/// Assemble the SIPG matrix for `ρ⁻¹Σ − α(ρ⁻¹Σ_x)_x`.
pub fn sipg_matrix(rho: &DgField, alpha: f64, params: &PenaltyParams) -> Result<BlockCyclicMatrix> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "regularization area must be non-negative, got {alpha}"
        )));
    }
    let mesh = rho.mesh();
    let n = mesh.n_cells();
    let h = mesh.h();
    let tau = params.tau(h);
    let (aq, ae) = inverse_density(rho)?;
    let mut m = BlockCyclicMatrix::zeros(n);
    for j in 0..n {
        let a = &aq[j];
        let mut d = [[0.0; 2]; 2];
        let mut diff = 0.0;
        for q in 0..3 {
            let (w, xi) = (GAUSS_WEIGHTS[q], GAUSS_NODES[q]);
            let s = 0.5 * h * w * a[q];
            d[0][0] += s;
            d[0][1] += s * xi;
            d[1][1] += s * xi * xi;
            diff += w * a[q];
        }
        d[1][0] = d[0][1];
        d[1][1] += alpha * 2.0 / h * diff;
        m.diag[j] = d;
    }
    for f in 0..n {
        let r = mesh.right_of(f);
        // ⟨ρ⁻¹ φ_x⟩ split by side
        let g_l = [0.0, ae[f][1] / h];
        let g_r = [0.0, ae[r][0] / h];
        let face = |ja: &[f64; 2], ga: &[f64; 2], jb: &[f64; 2], gb: &[f64; 2]| -> Block {
            let mut b = [[0.0; 2]; 2];
            for p in 0..2 {
                for q in 0..2 {
                    b[p][q] = alpha * (tau * ja[p] * jb[q] - ja[p] * gb[q] - ga[p] * jb[q]);
                }
            }
            b
        };
        add_block(&mut m.diag[f], &face(&JUMP_L, &g_l, &JUMP_L, &g_l));
        add_block(&mut m.diag[r], &face(&JUMP_R, &g_r, &JUMP_R, &g_r));
        add_block(&mut m.upper[f], &face(&JUMP_L, &g_l, &JUMP_R, &g_r));
    }
    Ok(m)
}

/// Solve the SIPG problem with the default solver policy.
pub fn sipg_solve(
    rho: &DgField,
    alpha: f64,
    rhs: &DgField,
    params: &PenaltyParams,
) -> Result<DgField> {
    Ok(sipg_solve_with(rho, alpha, rhs, params, LinearSolver::Auto)?.0)
}

pub fn sipg_solve_with(
    rho: &DgField,
    alpha: f64,
    rhs: &DgField,
    params: &PenaltyParams,
    solver: LinearSolver,
) -> Result<(DgField, SolveStats)> {
    if rho.mesh() != rhs.mesh() {
        return Err(Error::InvalidParameter(
            "density and source live on different meshes".into(),
        ));
    }
    let m = sipg_matrix(rho, alpha, params)?;
    let h = rho.mesh().h();
    let b: Vec<f64> = rhs
        .coeffs()
        .iter()
        .flat_map(|c| [h * c[0], h * c[1] / 3.0])
        .collect();
    let (x, stats) = m.solve(&b, solver)?;
    Ok((DgField::from_flat(rho.mesh(), &x), stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg1d::project;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_density(mesh: &Mesh1D, seed: u64, lo: f64, hi: f64) -> DgField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..mesh.n_cells())
            .map(|_| {
                let a: f64 = rng.gen_range(lo..hi);
                let b: f64 = rng.gen_range(-0.9..0.9) * (a - 0.5 * lo).min(0.5 * a);
                [a, b]
            })
            .collect();
        DgField::from_coeffs(mesh, coeffs).unwrap()
    }

    fn random_field(mesh: &Mesh1D, rng: &mut ChaCha8Rng) -> DgField {
        let coeffs = (0..mesh.n_cells())
            .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        DgField::from_coeffs(mesh, coeffs).unwrap()
    }

    fn l2_error<F: Fn(f64) -> f64>(u: &DgField, f: F) -> f64 {
        let m = u.mesh();
        let mut s = 0.0;
        for j in 0..m.n_cells() {
            for (xi, w) in GAUSS_NODES.iter().zip(&GAUSS_WEIGHTS) {
                let d = u.value(j, *xi) - f(m.x_at(j, *xi));
                s += 0.5 * m.h() * w * d * d;
            }
        }
        s.sqrt()
    }

    #[test]
    fn penalty_validation() {
        assert!(PenaltyParams::new(0.0).is_err());
        assert!(PenaltyParams::new(-1.0).is_err());
        assert_eq!(PenaltyParams::default().tau(0.5), 40.0);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let m = Mesh1D::unit(16).unwrap();
        let q = weak_derivative(&DgField::constant(&m, 4.2), &PenaltyParams::default()).unwrap();
        assert!(q.max_abs_coeff() < 1e-13);
    }

    #[test]
    fn derivative_converges_at_second_order() {
        let err = |n: usize| {
            let m = Mesh1D::unit(n).unwrap();
            let u = project(&m, |x| (2.0 * PI * x).sin());
            let q = weak_derivative(&u, &PenaltyParams::default()).unwrap();
            l2_error(&q, |x| 2.0 * PI * (2.0 * PI * x).cos())
        };
        let e: Vec<f64> = [32, 64, 128, 256].iter().map(|&n| err(n)).collect();
        for w in e.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.8, "{e:?}");
        }
        assert!(e[2] < 1e-2);
    }

    /// Dense assembly from basis-function evaluations, independent of the
    /// block formulas above.
    fn dense_derivative(u: &DgField, c_pen: f64) -> DVector<f64> {
        let m = u.mesh();
        let n = m.n_cells();
        let h = m.h();
        let tau = c_pen / h;
        let phi = |k: usize, j: usize, xi: f64| -> f64 {
            if k / 2 != j {
                0.0
            } else if k % 2 == 0 {
                1.0
            } else {
                xi
            }
        };
        let dphi = |k: usize, j: usize| -> f64 {
            if k / 2 == j && k % 2 == 1 {
                2.0 / h
            } else {
                0.0
            }
        };
        let dim = 2 * n;
        let mut a = DMatrix::zeros(dim, dim);
        let mut b = DVector::zeros(dim);
        for k in 0..dim {
            for l in 0..dim {
                let mut v = 0.0;
                for j in 0..n {
                    for (xi, w) in GAUSS_NODES.iter().zip(&GAUSS_WEIGHTS) {
                        v += 0.5 * h * w * phi(k, j, *xi) * phi(l, j, *xi);
                    }
                }
                for f in 0..n {
                    let r = (f + 1) % n;
                    let jk = phi(k, f, 1.0) - phi(k, r, -1.0);
                    let jl = phi(l, f, 1.0) - phi(l, r, -1.0);
                    v += tau * jk * jl;
                }
                a[(k, l)] = v;
            }
            let mut v = 0.0;
            for j in 0..n {
                for (xi, w) in GAUSS_NODES.iter().zip(&GAUSS_WEIGHTS) {
                    v -= 0.5 * h * w * u.value(j, *xi) * dphi(k, j);
                }
            }
            for f in 0..n {
                let r = (f + 1) % n;
                let avg = 0.5 * (u.value(f, 1.0) + u.value(r, -1.0));
                v += avg * (phi(k, f, 1.0) - phi(k, r, -1.0));
            }
            b[k] = v;
        }
        a.lu().solve(&b).unwrap()
    }

    #[test]
    fn derivative_of_hat_matches_dense_oracle() {
        let m = Mesh1D::unit(16).unwrap();
        let u = project(&m, |x| if x < 0.5 { x } else { 0.0 });
        let q = weak_derivative(&u, &PenaltyParams::default()).unwrap();
        let d = dense_derivative(&u, 20.0);
        let flat = q.to_flat();
        // The penalty makes the system moderately ill-conditioned
        // (cond ≈ 1e4 at N = 16), so compare relative to the solution size.
        let scale = d.amax();
        for i in 0..32 {
            assert!((flat[i] - d[i]).abs() < 1e-11 * scale, "dof {i} {} {}", flat[i], d[i]);
        }
        assert!(q.max_abs_coeff().is_finite());
        // The jump of q at the discontinuity is controlled by the penalty.
        let t = &q.face_traces()[7];
        assert!(t.jump().abs() < 1.0);
    }

    #[test]
    fn pcg_and_direct_derivatives_agree() {
        let m = Mesh1D::unit(64).unwrap();
        let u = project(&m, |x| (2.0 * PI * x).sin() + (6.0 * PI * x).cos());
        let p = PenaltyParams::default();
        let a = DerivativeOperator::with_solver(&m, p, LinearSolver::Direct)
            .unwrap()
            .apply(&u)
            .unwrap();
        let b = DerivativeOperator::with_solver(
            &m,
            p,
            LinearSolver::Pcg {
                rel_tol: 1e-13,
                max_iter: 10_000,
            },
        )
        .unwrap()
        .apply(&u)
        .unwrap();
        let mut d = a.clone();
        d.axpy(-1.0, &b);
        assert!(d.max_abs_coeff() < 1e-9 * a.max_abs_coeff());
    }

    #[test]
    fn sipg_matrix_is_symmetric() {
        let m = Mesh1D::unit(24).unwrap();
        let rho = random_density(&m, 5, 0.1, 10.0);
        let a = sipg_matrix(&rho, 5.0 * m.h() * m.h(), &PenaltyParams::default())
            .unwrap()
            .to_dense();
        let amax = a.amax();
        assert!((&a - a.transpose()).amax() < 1e-13 * amax);
    }

    #[test]
    fn sipg_matrix_is_positive_definite() {
        for (n, seed) in [(8, 1u64), (16, 2), (32, 3)] {
            let m = Mesh1D::unit(n).unwrap();
            for (lo, hi) in [(0.5, 2.0), (0.125, 1.0), (0.1, 10.0)] {
                let rho = random_density(&m, seed, lo, hi);
                for alpha in [0.0, 5.0 * m.h() * m.h(), 1.0] {
                    let a = sipg_matrix(&rho, alpha, &PenaltyParams::default())
                        .unwrap()
                        .to_dense();
                    let ev = a.symmetric_eigenvalues();
                    let min = ev.iter().cloned().fold(f64::INFINITY, f64::min);
                    assert!(min > 0.0, "n={n} rho∈[{lo},{hi}] α={alpha}: λmin={min}");
                }
            }
        }
    }

    #[test]
    fn indefinite_system_is_reported() {
        // An under-resolved 8:1 density ramp: the unweighted face penalty is
        // too weak on the light side and Cholesky must say so.
        let m = Mesh1D::unit(16).unwrap();
        let w = |x: f64| 0.5 * (((x - 0.25) / 0.02).tanh() - ((x - 0.75) / 0.02).tanh());
        let rho = project(&m, |x| 0.125 + 0.875 * w(x));
        let alpha = 5.0 * m.h() * m.h();
        let a = sipg_matrix(&rho, alpha, &PenaltyParams::default()).unwrap();
        let min = a.to_dense().symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min < 0.0);
        let rhs = DgField::constant(&m, 1.0);
        let r = sipg_solve_with(&rho, alpha, &rhs, &PenaltyParams::default(), LinearSolver::Direct);
        assert!(matches!(r, Err(Error::NotPositiveDefinite { .. })), "{r:?}");
        // A larger constant restores definiteness.
        let strong = sipg_matrix(&rho, alpha, &PenaltyParams::new(200.0).unwrap()).unwrap();
        let min = strong.to_dense().symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min > 0.0);
    }

    #[test]
    fn sipg_penalty_is_plain_for_unit_density() {
        let m = Mesh1D::unit(4).unwrap();
        let alpha = 0.3;
        let a = sipg_matrix(&DgField::constant(&m, 1.0), alpha, &PenaltyParams::default()).unwrap();
        // Coupling block of face 0 with jumps [1, 1] | [−1, 1] and
        // one-sided gradients (0, 1/h).
        let (h, tau) = (m.h(), 20.0 / m.h());
        let want = [[-tau, tau - 1.0 / h], [-tau + 1.0 / h, tau - 2.0 / h]].map(|r| r.map(|v| alpha * v));
        let got = a.upper[0];
        for p in 0..2 {
            for q in 0..2 {
                assert!((got[p][q] - want[p][q]).abs() < 1e-12, "{got:?} vs {want:?}");
            }
        }
    }

    #[test]
    fn sipg_constant_solution() {
        let m = Mesh1D::unit(32).unwrap();
        let rho = DgField::constant(&m, 1.0);
        let rhs = DgField::constant(&m, 0.7);
        let s = sipg_solve(&rho, 0.01, &rhs, &PenaltyParams::default()).unwrap();
        for c in s.coeffs() {
            assert!((c[0] - 0.7).abs() < 1e-13 && c[1].abs() < 1e-13);
        }
        // Constant ρ other than one scales the solution.
        let rho = DgField::constant(&m, 2.5);
        let s = sipg_solve(&rho, 0.01, &rhs, &PenaltyParams::default()).unwrap();
        for c in s.coeffs() {
            assert!((c[0] - 1.75).abs() < 1e-12 && c[1].abs() < 1e-12);
        }
    }

    #[test]
    fn sipg_without_diffusion_is_weighted_projection() {
        let m = Mesh1D::unit(16).unwrap();
        let rho = random_density(&m, 11, 0.2, 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rhs = random_field(&m, &mut rng);
        let s = sipg_solve(&rho, 0.0, &rhs, &PenaltyParams::default()).unwrap();
        // Cellwise: ∫ρ⁻¹Σφ = ∫rhs φ under the three-point rule, evaluated
        // pointwise from the fields rather than through the block formulas.
        for j in 0..16 {
            for k in 0..2 {
                let phi = |xi: f64| if k == 0 { 1.0 } else { xi };
                let mut lhs = 0.0;
                let mut r = 0.0;
                for (xi, w) in GAUSS_NODES.iter().zip(&GAUSS_WEIGHTS) {
                    lhs += w * s.value(j, *xi) / rho.value(j, *xi) * phi(*xi);
                    r += w * rhs.value(j, *xi) * phi(*xi);
                }
                assert!((lhs - r).abs() < 1e-13, "cell {j} dof {k}");
            }
        }
        // Constant ρ: Σ = ρ·rhs coefficientwise.
        let rho1 = DgField::constant(&m, 2.0);
        let s = sipg_solve(&rho1, 0.0, &rhs, &PenaltyParams::default()).unwrap();
        for (a, b) in s.coeffs().iter().zip(rhs.coeffs()) {
            assert!((a[0] - 2.0 * b[0]).abs() < 1e-13 && (a[1] - 2.0 * b[1]).abs() < 1e-13);
        }
    }

    #[test]
    fn sipg_manufactured_solution_converges() {
        let err = |n: usize| {
            let m = Mesh1D::unit(n).unwrap();
            let alpha = 5.0 * m.h() * m.h();
            let rho = DgField::constant(&m, 1.0);
            let rhs = project(&m, |x| (1.0 + 4.0 * PI * PI * alpha) * (2.0 * PI * x).sin());
            let s = sipg_solve(&rho, alpha, &rhs, &PenaltyParams::default()).unwrap();
            l2_error(&s, |x| (2.0 * PI * x).sin())
        };
        let e: Vec<f64> = [32, 64, 128, 256].iter().map(|&n| err(n)).collect();
        for w in e.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.8, "{e:?}");
        }
    }

    #[test]
    fn sipg_variable_density_manufactured() {
        // Σ = sin(2πx), ρ = 2 + cos(2πx), α fixed: f = ρ⁻¹Σ − α(ρ⁻¹Σ_x)_x.
        let alpha = 1e-3;
        let f = |x: f64| {
            let k = 2.0 * PI;
            let r = 2.0 + (k * x).cos();
            let rp = -k * (k * x).sin();
            let s = (k * x).sin();
            let sp = k * (k * x).cos();
            let spp = -k * k * (k * x).sin();
            s / r - alpha * (spp / r - sp * rp / (r * r))
        };
        let err = |n: usize| {
            let m = Mesh1D::unit(n).unwrap();
            let rho = project(&m, |x| 2.0 + (2.0 * PI * x).cos());
            let s = sipg_solve(&rho, alpha, &project(&m, f), &PenaltyParams::default()).unwrap();
            l2_error(&s, |x| (2.0 * PI * x).sin())
        };
        let e: Vec<f64> = [32, 64, 128].iter().map(|&n| err(n)).collect();
        for w in e.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.8, "{e:?}");
        }
    }

    #[test]
    fn sipg_rejects_bad_density() {
        let m = Mesh1D::unit(8).unwrap();
        let mut rho = DgField::constant(&m, 1.0);
        rho.coeffs_mut()[3] = [0.5, 0.6];
        let rhs = DgField::constant(&m, 1.0);
        match sipg_solve(&rho, 0.1, &rhs, &PenaltyParams::default()) {
            Err(Error::Domain { field, .. }) => assert_eq!(field, "rho"),
            other => panic!("{other:?}"),
        }
        assert!(sipg_solve(&DgField::constant(&m, 1.0), -1.0, &rhs, &PenaltyParams::default())
            .is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn weak_derivative_is_linear(seed in any::<u64>(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
            let m = Mesh1D::unit(20).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = random_field(&m, &mut rng);
            let v = random_field(&m, &mut rng);
            let op = DerivativeOperator::new(&m, PenaltyParams::default()).unwrap();
            let lhs = op.apply(&DgField::linear_combination(a, &u, b, &v)).unwrap();
            let rhs = DgField::linear_combination(a, &op.apply(&u).unwrap(), b, &op.apply(&v).unwrap());
            let mut d = lhs.clone();
            d.axpy(-1.0, &rhs);
            prop_assert!(d.max_abs_coeff() < 1e-12 * (1.0 + lhs.max_abs_coeff()));
        }

        #[test]
        fn sipg_solve_is_linear(seed in any::<u64>(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
            let m = Mesh1D::unit(20).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_density(&m, seed ^ 0xabc, 0.2, 5.0);
            let u = random_field(&m, &mut rng);
            let v = random_field(&m, &mut rng);
            let p = PenaltyParams::default();
            let alpha = 5.0 * m.h() * m.h();
            let lhs = sipg_solve(&rho, alpha, &DgField::linear_combination(a, &u, b, &v), &p).unwrap();
            let rhs = DgField::linear_combination(
                a, &sipg_solve(&rho, alpha, &u, &p).unwrap(),
                b, &sipg_solve(&rho, alpha, &v, &p).unwrap());
            let mut d = lhs.clone();
            d.axpy(-1.0, &rhs);
            prop_assert!(d.max_abs_coeff() < 1e-12 * (1.0 + lhs.max_abs_coeff()));
        }
    }
}
