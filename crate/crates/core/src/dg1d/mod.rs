//! Periodic piecewise-linear discontinuous Galerkin space on a uniform mesh.
//!
//! Each cell carries two coefficients in the Legendre basis
//! `{1, ξ}` with `ξ = 2(x - x_c)/h ∈ [-1, 1]`. The mass matrix is
//! `diag(h, h/3)` per cell, the cell mean is the first coefficient and the
//! exact integral of a field is `h Σ mean`.
//!
//! Face `j` sits between cell `j` (its left neighbour) and cell `j + 1 mod N`.

mod linalg;
mod operators;

pub use linalg::{BlockCyclicMatrix, LinearSolver, SolveStats};
pub use operators::{
    sipg_matrix, sipg_solve, sipg_solve_with, weak_derivative, DerivativeOperator, PenaltyParams,
};

use crate::error::{Error, Result};

/// Gauss–Legendre abscissae on [-1, 1], three points.
pub const GAUSS_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
pub const GAUSS_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh1D {
    n_cells: usize,
    length: f64,
    h: f64,
}

impl Mesh1D {
    pub fn new(n_cells: usize, length: f64) -> Result<Self> {
        if n_cells < 4 {
            return Err(Error::InvalidParameter(format!(
                "mesh needs at least 4 cells, got {n_cells}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "domain length must be positive, got {length}"
            )));
        }
        Ok(Self {
            n_cells,
            length,
            h: length / n_cells as f64,
        })
    }

    pub fn unit(n_cells: usize) -> Result<Self> {
        Self::new(n_cells, 1.0)
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn periodic(&self) -> bool {
        true
    }

    pub fn cell_center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.h
    }

    /// Physical coordinate of reference point `xi` in cell `j`.
    pub fn x_at(&self, j: usize, xi: f64) -> f64 {
        self.cell_center(j) + 0.5 * self.h * xi
    }

    /// Physical coordinates of the three Gauss points of cell `j`.
    pub fn quad_points(&self, j: usize) -> [f64; 3] {
        GAUSS_NODES.map(|xi| self.x_at(j, xi))
    }

    /// Index of the cell right of face `f`.
    #[inline]
    pub fn right_of(&self, f: usize) -> usize {
        if f + 1 == self.n_cells {
            0
        } else {
            f + 1
        }
    }

    /// Index of the face left of cell `j`.
    #[inline]
    pub fn left_face(&self, j: usize) -> usize {
        if j == 0 {
            self.n_cells - 1
        } else {
            j - 1
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgField {
    mesh: Mesh1D,
    coeffs: Vec<[f64; 2]>,
}

/// One-sided limits at a face: `left` from the cell on the left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceTrace {
    pub left: f64,
    pub right: f64,
}

impl FaceTrace {
    pub fn jump(&self) -> f64 {
        self.left - self.right
    }

    pub fn average(&self) -> f64 {
        0.5 * (self.left + self.right)
    }
}

impl DgField {
    pub fn zeros(mesh: &Mesh1D) -> Self {
        Self {
            mesh: *mesh,
            coeffs: vec![[0.0; 2]; mesh.n_cells()],
        }
    }

    pub fn constant(mesh: &Mesh1D, value: f64) -> Self {
        Self {
            mesh: *mesh,
            coeffs: vec![[value, 0.0]; mesh.n_cells()],
        }
    }

    pub fn from_coeffs(mesh: &Mesh1D, coeffs: Vec<[f64; 2]>) -> Result<Self> {
        if coeffs.len() != mesh.n_cells() {
            return Err(Error::InvalidParameter(format!(
                "expected {} cell coefficient pairs, got {}",
                mesh.n_cells(),
                coeffs.len()
            )));
        }
        Ok(Self {
            mesh: *mesh,
            coeffs,
        })
    }

    /// Build from a flat vector laid out as `[mean_0, slope_0, mean_1, ...]`.
    pub(crate) fn from_flat(mesh: &Mesh1D, flat: &[f64]) -> Self {
        debug_assert_eq!(flat.len(), 2 * mesh.n_cells());
        Self {
            mesh: *mesh,
            coeffs: flat.chunks_exact(2).map(|c| [c[0], c[1]]).collect(),
        }
    }

    #[cfg(test)]
    pub(crate) fn to_flat(&self) -> Vec<f64> {
        self.coeffs.iter().flat_map(|c| c.iter().copied()).collect()
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn coeffs(&self) -> &[[f64; 2]] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [[f64; 2]] {
        &mut self.coeffs
    }

    pub fn mean(&self, j: usize) -> f64 {
        self.coeffs[j][0]
    }

    pub fn slope(&self, j: usize) -> f64 {
        self.coeffs[j][1]
    }

    /// Value at reference coordinate `xi ∈ [-1, 1]` of cell `j`.
    #[inline]
    pub fn value(&self, j: usize, xi: f64) -> f64 {
        self.coeffs[j][0] + self.coeffs[j][1] * xi
    }

    /// Derivative in `x`, constant per cell.
    pub fn dx(&self, j: usize) -> f64 {
        2.0 * self.coeffs[j][1] / self.mesh.h()
    }

    /// Evaluate at a physical coordinate, wrapping periodically. Points on a
    /// face take the value from the cell on the right.
    pub fn eval(&self, x: f64) -> f64 {
        let l = self.mesh.length();
        let xw = x.rem_euclid(l);
        let n = self.mesh.n_cells();
        let j = ((xw / self.mesh.h()).floor() as usize).min(n - 1);
        let xi = 2.0 * (xw - self.mesh.cell_center(j)) / self.mesh.h();
        self.value(j, xi)
    }

    /// Values at the three Gauss points of every cell.
    pub fn quad_values(&self) -> Vec<[f64; 3]> {
        self.coeffs
            .iter()
            .map(|c| GAUSS_NODES.map(|xi| c[0] + c[1] * xi))
            .collect()
    }

    pub fn face_traces(&self) -> Vec<FaceTrace> {
        face_traces(self)
    }

    pub fn integrate(&self) -> f64 {
        integrate(self)
    }

    pub fn axpy(&mut self, a: f64, other: &DgField) {
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            c[0] += a * o[0];
            c[1] += a * o[1];
        }
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.coeffs {
            c[0] *= a;
            c[1] *= a;
        }
    }

    pub fn linear_combination(a: f64, x: &DgField, b: f64, y: &DgField) -> DgField {
        let coeffs = x
            .coeffs
            .iter()
            .zip(&y.coeffs)
            .map(|(p, q)| [a * p[0] + b * q[0], a * p[1] + b * q[1]])
            .collect();
        DgField {
            mesh: x.mesh,
            coeffs,
        }
    }

    /// L² inner product, exact for the piecewise-linear representation.
    pub fn inner(&self, other: &DgField) -> f64 {
        let h = self.mesh.h();
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(p, q)| h * (p[0] * q[0] + p[1] * q[1] / 3.0))
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c[0].abs().max(c[1].abs()))
            .fold(0.0, f64::max)
    }
}

/// L² projection of a pointwise function onto P¹ per cell, using the
/// three-point Gauss rule.
pub fn project<F: Fn(f64) -> f64>(mesh: &Mesh1D, f: F) -> DgField {
    let values: Vec<[f64; 3]> = (0..mesh.n_cells())
        .map(|j| mesh.quad_points(j).map(&f))
        .collect();
    project_quad(mesh, &values)
}

/// L² projection of values sampled at the Gauss points of each cell.
pub fn project_quad(mesh: &Mesh1D, values: &[[f64; 3]]) -> DgField {
    let coeffs = values.iter().map(|v| project_cell(v)).collect();
    DgField {
        mesh: *mesh,
        coeffs,
    }
}

#[inline]
pub(crate) fn project_cell(v: &[f64; 3]) -> [f64; 2] {
    let [w0, w1, w2] = GAUSS_WEIGHTS;
    let [x0, _, x2] = GAUSS_NODES;
    [
        0.5 * (w0 * v[0] + w1 * v[1] + w2 * v[2]),
        1.5 * (w0 * x0 * v[0] + w2 * x2 * v[2]),
    ]
}

pub fn face_traces(u: &DgField) -> Vec<FaceTrace> {
    let mesh = u.mesh();
    (0..mesh.n_cells())
        .map(|f| {
            let l = u.coeffs[f];
            let r = u.coeffs[mesh.right_of(f)];
            FaceTrace {
                left: l[0] + l[1],
                right: r[0] - r[1],
            }
        })
        .collect()
}

pub fn integrate(u: &DgField) -> f64 {
    u.mesh().h() * u.coeffs.iter().map(|c| c[0]).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn mesh_invariants() {
        for n in [4, 16, 250, 256, 512, 1000] {
            let m = Mesh1D::unit(n).unwrap();
            assert_eq!(m.h() * n as f64, 1.0);
        }
        assert!(Mesh1D::unit(3).is_err());
        assert!(Mesh1D::new(8, 0.0).is_err());
    }

    #[test]
    fn project_constant_and_linear() {
        let m = Mesh1D::unit(8).unwrap();
        let one = project(&m, |_| 1.0);
        for c in one.coeffs() {
            assert!((c[0] - 1.0).abs() < 1e-15 && c[1].abs() < 1e-15);
        }
        let lin = project(&m, |x| x);
        for j in 1..7 {
            assert!((lin.mean(j) - m.cell_center(j)).abs() < 1e-15);
            assert!((lin.slope(j) - 0.5 * m.h()).abs() < 1e-15);
        }
    }

    #[test]
    fn projection_error_is_second_order() {
        let err = |n: usize| {
            let m = Mesh1D::unit(n).unwrap();
            let u = project(&m, |x| (2.0 * PI * x).sin());
            // Independent 5-point Gauss rule for the error integral.
            let xs = [
                -0.906_179_845_938_664,
                -0.538_469_310_105_683,
                0.0,
                0.538_469_310_105_683,
                0.906_179_845_938_664,
            ];
            let ws = [
                0.236_926_885_056_189,
                0.478_628_670_499_366,
                0.568_888_888_888_889,
                0.478_628_670_499_366,
                0.236_926_885_056_189,
            ];
            let mut s = 0.0;
            for j in 0..n {
                for (xi, w) in xs.iter().zip(&ws) {
                    let d = u.value(j, *xi) - (2.0 * PI * m.x_at(j, *xi)).sin();
                    s += 0.5 * m.h() * w * d * d;
                }
            }
            s.sqrt()
        };
        let e32 = err(32);
        let e64 = err(64);
        let e128 = err(128);
        assert!((e32 / e64).log2() > 1.9);
        assert!((e64 / e128).log2() > 1.9);
        assert!(err(64) < 20.0 * (1.0 / 64.0f64).powi(2));
    }

    #[test]
    fn traces_and_locality() {
        let m = Mesh1D::unit(8).unwrap();
        let c = DgField::constant(&m, 3.0);
        for t in c.face_traces() {
            assert_eq!(t.left, t.right);
        }
        let mut s = DgField::zeros(&m);
        s.coeffs_mut()[3][1] = 1.0;
        let t = s.face_traces();
        for (f, tr) in t.iter().enumerate() {
            let asym = tr.left != tr.right;
            assert_eq!(asym, f == 2 || f == 3, "face {f}");
        }
        // Periodic wrap: face N-1 couples the last and first cells.
        let mut w = DgField::zeros(&m);
        w.coeffs_mut()[0] = [1.0, 0.5];
        assert_eq!(w.face_traces()[7].right, 0.5);
    }

    #[test]
    fn traces_of_smooth_projection_converge() {
        let err = |n: usize| {
            let m = Mesh1D::unit(n).unwrap();
            let u = project(&m, |x| (2.0 * PI * x).sin());
            u.face_traces()
                .iter()
                .enumerate()
                .map(|(f, t)| {
                    let exact = (2.0 * PI * (f + 1) as f64 * m.h()).sin();
                    (t.left - exact).abs().max((t.right - exact).abs())
                })
                .fold(0.0, f64::max)
        };
        assert!((err(32) / err(64)).log2() > 1.8);
    }

    #[test]
    fn integrals() {
        let m = Mesh1D::new(10, 2.0).unwrap();
        assert!((DgField::constant(&m, 1.5).integrate() - 3.0).abs() < 1e-14);
        let mut s = DgField::zeros(&m);
        for c in s.coeffs_mut() {
            c[1] = 7.0;
        }
        assert_eq!(s.integrate(), 0.0);
        let m = Mesh1D::unit(64).unwrap();
        let u = project(&m, |x| (2.0 * PI * x).sin());
        assert!(u.integrate().abs() < 1e-14);
    }

    #[test]
    fn eval_wraps() {
        let m = Mesh1D::unit(4).unwrap();
        let u = project(&m, |x| x);
        assert!((u.eval(0.3) - 0.3).abs() < 1e-14);
        assert!((u.eval(1.3) - 0.3).abs() < 1e-14);
    }
}
