//! The 1D model systems and their DG semi-discretization.
//!
//! All models share the conservative variables `(ρ, ρu, E)` and a local
//! Lax–Friedrichs flux. The regularized ones add an entropic pressure `Σ`
//! obtained from an SIPG solve of `ρ⁻¹Σ − α(ρ⁻¹Σ_x)_x = f`, with `f` built
//! from auxiliary derivative fields:
//!
//! | model          | `f`                                                        |
//! |----------------|------------------------------------------------------------|
//! | IGR            | `2α u_x²`                                                  |
//! | HRE, HIGR      | `α[k u_x² + (γ−1)(ε_x − (γ−1)ε ρ_x/ρ)_x + γ(γ−1)²ε/2 (ρ_x/ρ)²]` |
//! | HIGRAblated    | `Σ_C` as HRE, plus `Σ_D` with `α u_x²`                     |
//! | HRENoCapillary | `α[u_x² + (ρ⁻¹p_x)_x]`                                     |
//!
//! The last row is the HRE kinetic-energy regularization without the
//! capillary energy. Its total pressure `P = p + Σ` then satisfies
//! `ρ⁻¹P − α(ρ⁻¹P_x)_x = ρ⁻¹p + α u_x²`, which gives acoustic waves the
//! dispersive speed `c_s/√(1 + αk²)`.

use std::fmt;
use std::str::FromStr;

use crate::dg1d::{
    project, project_quad, sipg_solve, DerivativeOperator, DgField, Mesh1D, PenaltyParams,
    GAUSS_NODES, GAUSS_WEIGHTS,
};
use crate::eos::IdealGasEos;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Euler,
    Igr,
    Hre,
    Higr,
    HigrAblated,
    HreNoCapillary,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Euler,
        ModelKind::Igr,
        ModelKind::Hre,
        ModelKind::Higr,
        ModelKind::HigrAblated,
        ModelKind::HreNoCapillary,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Euler => "Euler",
            ModelKind::Igr => "IGR",
            ModelKind::Hre => "HRE",
            ModelKind::Higr => "HIGR",
            ModelKind::HigrAblated => "HIGRAblated",
            ModelKind::HreNoCapillary => "HRENoCapillary",
        }
    }

    /// Lower-case name used in file names.
    pub fn slug(&self) -> String {
        self.name().to_ascii_lowercase()
    }

    /// Velocity-gradient coefficient in the elliptic source.
    pub fn default_k(&self) -> f64 {
        match self {
            ModelKind::Higr => 2.0,
            ModelKind::Igr => 2.0,
            _ => 1.0,
        }
    }

    pub fn is_regularized(&self) -> bool {
        !matches!(self, ModelKind::Euler)
    }

    /// Whether the kinetic energy carries the `½ραu_x²` term.
    pub fn has_gradient_kinetic_energy(&self) -> bool {
        matches!(
            self,
            ModelKind::Hre | ModelKind::Higr | ModelKind::HigrAblated | ModelKind::HreNoCapillary
        )
    }

    fn needs_thermo_gradients(&self) -> bool {
        self.has_gradient_kinetic_energy()
    }

    fn has_korteweg_flux(&self) -> bool {
        matches!(self, ModelKind::Hre | ModelKind::Higr)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| *c != '_' && *c != '-')
            .collect::<String>()
            .to_ascii_lowercase();
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name().to_ascii_lowercase() == key)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown model `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub alpha: f64,
    pub k: f64,
    pub eos: IdealGasEos,
    pub penalty: PenaltyParams,
    /// Multiplier on the LLF dissipation term.
    pub flux_dissipation_scale: f64,
    /// Drop the thermodynamic pressure entirely.
    pub pressureless: bool,
    pub positivity: PositivityCheck,
}

/// Where recovered `ε` must be positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PositivityCheck {
    /// Cell means of the quadrature values.
    #[default]
    CellMeans,
    /// Every Gauss point and every face trace.
    Pointwise,
}

impl ModelParams {
    pub fn new(kind: ModelKind, alpha: f64, gamma: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "regularization area must be non-negative, got {alpha}"
            )));
        }
        Ok(Self {
            kind,
            alpha,
            k: kind.default_k(),
            eos: IdealGasEos::new(gamma)?,
            penalty: PenaltyParams::default(),
            flux_dissipation_scale: 1.0,
            pressureless: false,
            positivity: PositivityCheck::default(),
        })
    }

    /// Parameters of the reference experiment: `γ = 1.4`, `α = 5h²`.
    pub fn sod_default(kind: ModelKind, mesh: &Mesh1D) -> Self {
        Self::new(kind, 5.0 * mesh.h() * mesh.h(), 1.4).expect("valid defaults")
    }

    pub fn gamma(&self) -> f64 {
        self.eos.gamma()
    }

    fn kinetic_alpha(&self) -> f64 {
        if self.kind.has_gradient_kinetic_energy() {
            self.alpha
        } else {
            0.0
        }
    }

    /// Specific internal energy from conservative point values.
    #[inline]
    pub fn recover_eps(&self, rho: f64, mom: f64, energy: f64, q_u: f64) -> f64 {
        let u = mom / rho;
        energy / rho - 0.5 * u * u - 0.5 * self.kinetic_alpha() * q_u * q_u
    }

    /// Total energy density from primitive point values.
    #[inline]
    pub fn total_energy(&self, rho: f64, u: f64, eps: f64, q_u: f64) -> f64 {
        rho * eps + 0.5 * rho * (u * u + self.kinetic_alpha() * q_u * q_u)
    }

    #[inline]
    fn pressure(&self, rho: f64, eps: f64) -> f64 {
        if self.pressureless {
            0.0
        } else {
            self.eos.p_raw(rho, eps)
        }
    }

    #[inline]
    fn sound_speed(&self, eps: f64) -> f64 {
        if self.pressureless {
            0.0
        } else {
            // a transient negative point value carries no sound speed
            self.eos.cs_raw(eps.max(0.0))
        }
    }

    /// Physical flux `(F_ρ, F_m, F_E)` at a point.
    pub fn physical_flux(&self, pt: &FluxPoint) -> [f64; 3] {
        let u = pt.mom / pt.rho;
        let p = self.pressure(pt.rho, pt.eps);
        let (s_mom, s_en) = match self.kind {
            ModelKind::Euler => (0.0, 0.0),
            ModelKind::HigrAblated => (pt.sigma + pt.sigma_d, pt.sigma),
            _ => (pt.sigma, pt.sigma),
        };
        let korteweg = if self.kind.has_korteweg_flux() {
            self.alpha * self.gamma() * p * pt.q_lnrho * pt.q_u
        } else {
            0.0
        };
        [
            pt.mom,
            pt.mom * u + p + s_mom,
            (pt.energy + p + s_en) * u + korteweg,
        ]
    }
}

/// Point values entering the physical flux.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FluxPoint {
    pub rho: f64,
    pub mom: f64,
    pub energy: f64,
    pub eps: f64,
    /// `Σ`, or `Σ_C` for the ablated model.
    pub sigma: f64,
    /// `Σ_D`, ablated model only.
    pub sigma_d: f64,
    pub q_u: f64,
    pub q_lnrho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub rho: DgField,
    pub mom: DgField,
    pub energy: DgField,
    pub time: f64,
}

/// Time derivatives of the conservative coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct StateRate {
    pub rho: DgField,
    pub mom: DgField,
    pub energy: DgField,
}

impl SimState {
    pub fn mesh(&self) -> &Mesh1D {
        self.rho.mesh()
    }

    pub fn constant(mesh: &Mesh1D, params: &ModelParams, rho: f64, u: f64, eps: f64) -> Self {
        Self {
            rho: DgField::constant(mesh, rho),
            mom: DgField::constant(mesh, rho * u),
            energy: DgField::constant(mesh, params.total_energy(rho, u, eps, 0.0)),
            time: 0.0,
        }
    }

    /// Project primitive profiles `(ρ, u, p)`. The energy uses the model's
    /// kinetic energy, including `½ραu_x²` where applicable.
    pub fn from_primitives<R, U, P>(
        mesh: &Mesh1D,
        params: &ModelParams,
        rho: R,
        u: U,
        p: P,
    ) -> Result<Self>
    where
        R: Fn(f64) -> f64,
        U: Fn(f64) -> f64,
        P: Fn(f64) -> f64,
    {
        let rho_f = project(mesh, &rho);
        let mom_f = project(mesh, |x| rho(x) * u(x));
        let u_f = project(mesh, &u);
        let q_u = DerivativeOperator::new(mesh, params.penalty)?.apply(&u_f)?;
        let qv = q_u.quad_values();
        let g1 = params.gamma() - 1.0;
        let e: Vec<[f64; 3]> = (0..mesh.n_cells())
            .map(|j| {
                let xs = mesh.quad_points(j);
                std::array::from_fn(|q| {
                    let (r, v) = (rho(xs[q]), u(xs[q]));
                    let eps = p(xs[q]) / (g1 * r);
                    params.total_energy(r, v, eps, qv[j][q])
                })
            })
            .collect();
        Ok(Self {
            rho: rho_f,
            mom: mom_f,
            energy: project_quad(mesh, &e),
            time: 0.0,
        })
    }

    /// `self + dt·rate`, time advanced by `dt`.
    pub fn advanced(&self, rate: &StateRate, dt: f64) -> SimState {
        let mut s = self.clone();
        s.rho.axpy(dt, &rate.rho);
        s.mom.axpy(dt, &rate.mom);
        s.energy.axpy(dt, &rate.energy);
        s.time += dt;
        s
    }

    /// `a·x + b·y`, fieldwise and in time.
    pub fn combine(a: f64, x: &SimState, b: f64, y: &SimState) -> SimState {
        SimState {
            rho: DgField::linear_combination(a, &x.rho, b, &y.rho),
            mom: DgField::linear_combination(a, &x.mom, b, &y.mom),
            energy: DgField::linear_combination(a, &x.energy, b, &y.energy),
            time: a * x.time + b * y.time,
        }
    }

    pub fn fields(&self) -> [&DgField; 3] {
        [&self.rho, &self.mom, &self.energy]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxFields {
    pub q_u: DgField,
    pub q_lnrho: Option<DgField>,
    pub q_eps: Option<DgField>,
}

/// Recovered primitive fields plus their Gauss-point values.
#[derive(Debug, Clone, PartialEq)]
pub struct Primitives {
    pub u: DgField,
    pub eps: DgField,
    pub aux: AuxFields,
    pub rho_q: Vec<[f64; 3]>,
    pub u_q: Vec<[f64; 3]>,
    pub eps_q: Vec<[f64; 3]>,
}

/// Source term(s) of the elliptic problem(s).
#[derive(Debug, Clone, PartialEq)]
pub enum EllipticRhs {
    None,
    Single(DgField),
    Split { c: DgField, d: DgField },
}

#[derive(Debug, Clone, PartialEq)]
pub enum EntropicPressure {
    None,
    Single(DgField),
    Split { sigma_c: DgField, sigma_d: DgField },
}

impl EntropicPressure {
    /// Pressure entering the momentum flux.
    pub fn momentum_part(&self, mesh: &Mesh1D) -> DgField {
        match self {
            EntropicPressure::None => DgField::zeros(mesh),
            EntropicPressure::Single(s) => s.clone(),
            EntropicPressure::Split { sigma_c, sigma_d } => {
                DgField::linear_combination(1.0, sigma_c, 1.0, sigma_d)
            }
        }
    }
}

/// A model bound to a mesh. Holds the factored weak-derivative operator,
/// which depends only on the mesh and penalty.
#[derive(Debug, Clone)]
pub struct Model {
    params: ModelParams,
    mesh: Mesh1D,
    deriv: DerivativeOperator,
}

fn positivity(quantity: &'static str, cell: usize, time: f64, value: f64) -> Error {
    Error::Positivity {
        quantity,
        cell,
        time,
        value,
    }
}

impl Model {
    pub fn new(params: ModelParams, mesh: &Mesh1D) -> Result<Self> {
        if !(params.flux_dissipation_scale >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "flux dissipation scale must be non-negative, got {}",
                params.flux_dissipation_scale
            )));
        }
        Ok(Self {
            params,
            mesh: *mesh,
            deriv: DerivativeOperator::new(mesh, params.penalty)?,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn kind(&self) -> ModelKind {
        self.params.kind
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn weak_derivative(&self, u: &DgField) -> Result<DgField> {
        self.deriv.apply(u)
    }

    fn check_density(&self, state: &SimState) -> Result<()> {
        for (j, c) in state.rho.coeffs().iter().enumerate() {
            let m = c[0].min(c[0] - c[1].abs());
            if !(m > 0.0) {
                return Err(positivity("rho", j, state.time, m));
            }
        }
        Ok(())
    }

    pub fn recover_primitives(&self, state: &SimState) -> Result<Primitives> {
        self.check_density(state)?;
        let p = &self.params;
        let rho_q = state.rho.quad_values();
        let mom_q = state.mom.quad_values();
        let e_q = state.energy.quad_values();
        let u_q: Vec<[f64; 3]> = rho_q
            .iter()
            .zip(&mom_q)
            .map(|(r, m)| std::array::from_fn(|q| m[q] / r[q]))
            .collect();
        let u = project_quad(&self.mesh, &u_q);
        let q_u = self.deriv.apply(&u)?;
        let qu_q = q_u.quad_values();
        let mut eps_q = Vec::with_capacity(rho_q.len());
        for j in 0..rho_q.len() {
            let e: [f64; 3] =
                std::array::from_fn(|q| p.recover_eps(rho_q[j][q], mom_q[j][q], e_q[j][q], qu_q[j][q]));
            if !p.pressureless {
                // Point values may dip transiently where colliding fronts
                // are under-resolved; the default only guards cell means.
                let bad = match p.positivity {
                    PositivityCheck::CellMeans => {
                        let [w0, w1, w2] = GAUSS_WEIGHTS;
                        let v = 0.5 * (w0 * e[0] + w1 * e[1] + w2 * e[2]);
                        (!(v > 0.0)).then_some(v)
                    }
                    PositivityCheck::Pointwise => e.into_iter().find(|v| !(*v > 0.0)),
                };
                if let Some(v) = bad {
                    return Err(positivity("eps", j, state.time, v));
                }
            }
            eps_q.push(e);
        }
        let eps = project_quad(&self.mesh, &eps_q);
        let (q_lnrho, q_eps) = if p.kind.needs_thermo_gradients() && !p.pressureless {
            let lnrho_q: Vec<[f64; 3]> = rho_q.iter().map(|r| r.map(f64::ln)).collect();
            let lnrho = project_quad(&self.mesh, &lnrho_q);
            (Some(self.deriv.apply(&lnrho)?), Some(self.deriv.apply(&eps)?))
        } else {
            (None, None)
        };
        Ok(Primitives {
            u,
            eps,
            aux: AuxFields {
                q_u,
                q_lnrho,
                q_eps,
            },
            rho_q,
            u_q,
            eps_q,
        })
    }

    pub fn elliptic_rhs(&self, prims: &Primitives) -> Result<EllipticRhs> {
        let p = &self.params;
        let a = p.alpha;
        let g1 = p.gamma() - 1.0;
        let qu = prims.aux.q_u.quad_values();
        let kinetic = |k: f64| -> Vec<[f64; 3]> {
            qu.iter().map(|v| v.map(|q| a * k * q * q)).collect()
        };
        let thermo = |capillary: bool, k: f64| -> Result<Vec<[f64; 3]>> {
            let lr = prims.aux.q_lnrho.as_ref().expect("thermo gradients").quad_values();
            let qe = prims.aux.q_eps.as_ref().expect("thermo gradients").quad_values();
            // flux-like inner term, differentiated once more
            let sign = if capillary { -g1 } else { 1.0 };
            let inner: Vec<[f64; 3]> = (0..qu.len())
                .map(|j| std::array::from_fn(|q| qe[j][q] + sign * prims.eps_q[j][q] * lr[j][q]))
                .collect();
            let d = self.deriv.apply(&project_quad(&self.mesh, &inner))?.quad_values();
            let gamma = p.gamma();
            Ok((0..qu.len())
                .map(|j| {
                    std::array::from_fn(|q| {
                        let mut v = k * qu[j][q] * qu[j][q] + g1 * d[j][q];
                        if capillary {
                            v += 0.5 * gamma * g1 * g1 * prims.eps_q[j][q] * lr[j][q] * lr[j][q];
                        }
                        a * v
                    })
                })
                .collect())
        };
        let field = |v: Vec<[f64; 3]>| project_quad(&self.mesh, &v);
        Ok(match p.kind {
            ModelKind::Euler => EllipticRhs::None,
            ModelKind::Igr => EllipticRhs::Single(field(kinetic(p.k))),
            _ if p.pressureless => match p.kind {
                ModelKind::HigrAblated => EllipticRhs::Split {
                    c: field(kinetic(1.0)),
                    d: field(kinetic(1.0)),
                },
                _ => EllipticRhs::Single(field(kinetic(p.k))),
            },
            ModelKind::Hre | ModelKind::Higr => EllipticRhs::Single(field(thermo(true, p.k)?)),
            ModelKind::HigrAblated => EllipticRhs::Split {
                c: field(thermo(true, 1.0)?),
                d: field(kinetic(1.0)),
            },
            ModelKind::HreNoCapillary => EllipticRhs::Single(field(thermo(false, p.k)?)),
        })
    }

    pub fn solve_pressure(&self, state: &SimState, rhs: &EllipticRhs) -> Result<EntropicPressure> {
        let (a, pen) = (self.params.alpha, &self.params.penalty);
        Ok(match rhs {
            EllipticRhs::None => EntropicPressure::None,
            EllipticRhs::Single(f) => EntropicPressure::Single(sipg_solve(&state.rho, a, f, pen)?),
            EllipticRhs::Split { c, d } => EntropicPressure::Split {
                sigma_c: sipg_solve(&state.rho, a, c, pen)?,
                sigma_d: sipg_solve(&state.rho, a, d, pen)?,
            },
        })
    }

    pub fn entropic_pressure(&self, state: &SimState) -> Result<EntropicPressure> {
        let prims = self.recover_primitives(state)?;
        self.solve_pressure(state, &self.elliptic_rhs(&prims)?)
    }

    /// `max(|u| + c_s)` over Gauss points.
    pub fn max_wave_speed(&self, state: &SimState) -> Result<f64> {
        let prims = self.recover_primitives(state)?;
        Ok(self.max_wave_speed_of(&prims))
    }

    pub fn max_wave_speed_of(&self, prims: &Primitives) -> f64 {
        let mut lam: f64 = 0.0;
        for (u, e) in prims.u_q.iter().zip(&prims.eps_q) {
            for q in 0..3 {
                lam = lam.max(u[q].abs() + self.params.sound_speed(e[q]));
            }
        }
        lam
    }

    pub fn semidiscrete_rhs(&self, state: &SimState) -> Result<StateRate> {
        let prims = self.recover_primitives(state)?;
        let pressure = self.solve_pressure(state, &self.elliptic_rhs(&prims)?)?;
        self.rhs_with_pressure(state, &prims, &pressure)
    }

    /// DG weak form of `−∂_x F` for given primitives and entropic pressure.
    pub fn rhs_with_pressure(
        &self,
        state: &SimState,
        prims: &Primitives,
        pressure: &EntropicPressure,
    ) -> Result<StateRate> {
        let p = &self.params;
        let n = self.mesh.n_cells();
        let h = self.mesh.h();
        let zero = DgField::zeros(&self.mesh);
        let (sig, sig_d) = match pressure {
            EntropicPressure::None => (&zero, &zero),
            EntropicPressure::Single(s) => (s, &zero),
            EntropicPressure::Split { sigma_c, sigma_d } => (sigma_c, sigma_d),
        };
        let q_u = &prims.aux.q_u;
        let q_lnrho = prims.aux.q_lnrho.as_ref().unwrap_or(&zero);
        let [rc, mc, ec] = state.fields().map(|f| f.coeffs());
        let (sc, sdc, quc, qlc) = (sig.coeffs(), sig_d.coeffs(), q_u.coeffs(), q_lnrho.coeffs());

        // Point state of cell j at reference coordinate xi.
        let point = |j: usize, xi: f64| -> FluxPoint {
            let v = |c: &[[f64; 2]]| c[j][0] + c[j][1] * xi;
            let (rho, mom, energy, qu) = (v(rc), v(mc), v(ec), v(quc));
            FluxPoint {
                rho,
                mom,
                energy,
                eps: p.recover_eps(rho, mom, energy, qu),
                sigma: v(sc),
                sigma_d: v(sdc),
                q_u: qu,
                q_lnrho: v(qlc),
            }
        };

        let mut fhat = vec![[0.0; 3]; n];
        for f in 0..n {
            let r = self.mesh.right_of(f);
            let l_pt = point(f, 1.0);
            let r_pt = point(r, -1.0);
            if p.positivity == PositivityCheck::Pointwise && !p.pressureless {
                if !(l_pt.eps > 0.0) {
                    return Err(positivity("eps", f, state.time, l_pt.eps));
                }
                if !(r_pt.eps > 0.0) {
                    return Err(positivity("eps", r, state.time, r_pt.eps));
                }
            }
            let fl = p.physical_flux(&l_pt);
            let fr = p.physical_flux(&r_pt);
            let speed = |pt: &FluxPoint| (pt.mom / pt.rho).abs() + p.sound_speed(pt.eps);
            let lam = p.flux_dissipation_scale * speed(&l_pt).max(speed(&r_pt));
            let ul = [l_pt.rho, l_pt.mom, l_pt.energy];
            let ur = [r_pt.rho, r_pt.mom, r_pt.energy];
            for c in 0..3 {
                fhat[f][c] = 0.5 * (fl[c] + fr[c]) - 0.5 * lam * (ur[c] - ul[c]);
            }
        }

        let [w0, w1, _] = GAUSS_WEIGHTS;
        let mut out = [vec![[0.0; 2]; n], vec![[0.0; 2]; n], vec![[0.0; 2]; n]];
        for j in 0..n {
            let fq = GAUSS_NODES.map(|xi| p.physical_flux(&point(j, xi)));
            let fl = &fhat[self.mesh.left_face(j)];
            let fr = &fhat[j];
            for c in 0..3 {
                // Σ w_q F_q − F̂_L − F̂_R, grouped so it vanishes exactly when
                // all values coincide.
                let vol = w0 * (fq[0][c] + fq[2][c] - fl[c] - fr[c])
                    + w1 * (fq[1][c] - 0.5 * (fl[c] + fr[c]));
                out[c][j] = [(fl[c] - fr[c]) / h, 3.0 * vol / h];
            }
        }
        let [a, b, c] = out;
        Ok(StateRate {
            rho: DgField::from_coeffs(&self.mesh, a)?,
            mom: DgField::from_coeffs(&self.mesh, b)?,
            energy: DgField::from_coeffs(&self.mesh, c)?,
        })
    }
}

/// Geometry of the periodized smoothed Sod data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SodSetup {
    pub x1: f64,
    pub x2: f64,
    pub delta: f64,
    /// Swap the two states, so the low-pressure gas sits between the ramps
    /// and the shocks converge on the middle.
    pub reflected: bool,
}

impl Default for SodSetup {
    fn default() -> Self {
        Self {
            x1: 0.25,
            x2: 0.75,
            delta: 0.02,
            reflected: false,
        }
    }
}

pub const SOD_LEFT: (f64, f64, f64) = (1.0, 0.0, 1.0);
pub const SOD_RIGHT: (f64, f64, f64) = (0.125, 0.0, 0.1);

impl SodSetup {
    pub fn validate(&self, length: f64) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.delta > 0.0) {
            return bad(format!("smoothing width must be positive, got {}", self.delta));
        }
        if !(0.0 < self.x1 && self.x1 < self.x2 && self.x2 < length) {
            return bad(format!(
                "need 0 < x1 < x2 < {length}, got x1 = {}, x2 = {}",
                self.x1, self.x2
            ));
        }
        if self.x2 - self.x1 < 4.0 * self.delta {
            return bad(format!(
                "ramps overlap: x2 - x1 = {} < 4 delta = {}",
                self.x2 - self.x1,
                4.0 * self.delta
            ));
        }
        let gap = length - self.x2 + self.x1;
        if gap < 4.0 * self.delta {
            return bad(format!(
                "ramps overlap across the periodic wrap: gap {gap} < 4 delta = {}",
                4.0 * self.delta
            ));
        }
        Ok(())
    }

    /// Blend weight of the state between the ramps, in [0, 1]. The tanh
    /// plateau is summed over neighbouring periodic images, which makes the
    /// profile periodic to round-off.
    pub fn weight(&self, x: f64, length: f64) -> f64 {
        let plateau =
            |y: f64| 0.5 * (((y - self.x1) / self.delta).tanh() - ((y - self.x2) / self.delta).tanh());
        let w: f64 = (-2..=2).map(|m| plateau(x + m as f64 * length)).sum();
        if self.reflected {
            1.0 - w
        } else {
            w
        }
    }

    /// Primitive `(ρ, u, p)` at `x` on a periodic domain of the given length.
    pub fn primitive(&self, x: f64, length: f64) -> (f64, f64, f64) {
        let w = self.weight(x, length);
        let mix = |a: f64, b: f64| b + w * (a - b);
        (
            mix(SOD_LEFT.0, SOD_RIGHT.0),
            mix(SOD_LEFT.1, SOD_RIGHT.1),
            mix(SOD_LEFT.2, SOD_RIGHT.2),
        )
    }
}

pub fn initial_condition_sod(mesh: &Mesh1D, params: &ModelParams, setup: &SodSetup) -> Result<SimState> {
    let len = mesh.length();
    setup.validate(len)?;
    SimState::from_primitives(
        mesh,
        params,
        |x| setup.primitive(x, len).0,
        |x| setup.primitive(x, len).1,
        |x| setup.primitive(x, len).2,
    )
}

/// Two smoothed shocks running into each other at the domain centre.
pub fn initial_condition_colliding(mesh: &Mesh1D, params: &ModelParams, setup: &SodSetup) -> Result<SimState> {
    let s = SodSetup {
        reflected: true,
        ..*setup
    };
    initial_condition_sod(mesh, params, &s)
}
