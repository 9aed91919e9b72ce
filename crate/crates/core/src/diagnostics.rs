//! Integral diagnostics: conserved totals, entropy, production rates,
//! generalized kinetic energy and the internal-energy spike metric.

use crate::dg1d::{DgField, GAUSS_WEIGHTS};
use crate::error::{Error, Result};
use crate::models::{EntropicPressure, Model, ModelKind, Primitives, SimState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub step: usize,
    pub total_mass: f64,
    pub total_momentum: f64,
    pub total_energy: f64,
    pub total_entropy: f64,
    pub entropy_production_rate: f64,
    pub generalized_kinetic_energy: f64,
    /// NaN when no window was requested.
    pub spike_amplitude: f64,
}

impl DiagnosticsRecord {
    pub const CSV_HEADER: &'static str = "time,step,total_mass,total_momentum,total_energy,\
total_entropy,entropy_production_rate,generalized_kinetic_energy,spike_amplitude";

    pub fn sample(
        model: &Model,
        state: &SimState,
        step: usize,
        spike_window: Option<(f64, f64)>,
    ) -> Result<Self> {
        let prims = model.recover_primitives(state)?;
        let [m, p, e] = conserved_totals(state);
        Ok(Self {
            time: state.time,
            step,
            total_mass: m,
            total_momentum: p,
            total_energy: e,
            total_entropy: entropy_of(model, &prims)?,
            entropy_production_rate: production_of(model, state, &prims)?,
            generalized_kinetic_energy: kinetic_of(state, &prims, kinetic_alpha(model)),
            spike_amplitude: match spike_window {
                Some((lo, hi)) => spike_of(&prims.eps, lo, hi)?,
                None => f64::NAN,
            },
        })
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.time,
            self.step,
            self.total_mass,
            self.total_momentum,
            self.total_energy,
            self.total_entropy,
            self.entropy_production_rate,
            self.generalized_kinetic_energy,
            self.spike_amplitude
        )
    }
}

/// `(∫ρ, ∫ρu, ∫E)`.
pub fn conserved_totals(state: &SimState) -> [f64; 3] {
    state.fields().map(|f| f.integrate())
}

/// Gauss-rule integral of per-cell point values.
fn quad_integral(h: f64, values: impl Iterator<Item = [f64; 3]>) -> f64 {
    values
        .map(|v| 0.5 * h * (0..3).map(|q| GAUSS_WEIGHTS[q] * v[q]).sum::<f64>())
        .sum()
}

fn entropy_of(model: &Model, prims: &Primitives) -> Result<f64> {
    let eos = model.params().eos;
    let h = model.mesh().h();
    let mut vals = Vec::with_capacity(prims.rho_q.len());
    for (r, e) in prims.rho_q.iter().zip(&prims.eps_q) {
        let mut v = [0.0; 3];
        for q in 0..3 {
            v[q] = r[q] * eos.entropy(r[q], e[q])?;
        }
        vals.push(v);
    }
    Ok(quad_integral(h, vals.into_iter()))
}

/// `S = ∫ρ s(ρ, ε)` with the model's internal-energy recovery.
pub fn total_entropy(model: &Model, state: &SimState) -> Result<f64> {
    entropy_of(model, &model.recover_primitives(state)?)
}

/// Pointwise entropy production density at the Gauss points.
///
/// IGR: `−ϑ⁻¹Σ u_x`. HIGR and ablated HIGR: `−αρϑ⁻¹u_x³`. Zero for the
/// conservative models.
pub fn production_integrand(
    model: &Model,
    state: &SimState,
    prims: &Primitives,
) -> Result<Vec<[f64; 3]>> {
    let alpha = model.params().alpha;
    let qu = prims.aux.q_u.quad_values();
    let n = qu.len();
    Ok(match model.kind() {
        ModelKind::Euler | ModelKind::Hre | ModelKind::HreNoCapillary => vec![[0.0; 3]; n],
        ModelKind::Igr => {
            let sigma = match model.solve_pressure(state, &model.elliptic_rhs(prims)?)? {
                EntropicPressure::Single(s) => s,
                _ => unreachable!("IGR has a single entropic pressure"),
            };
            let sq = sigma.quad_values();
            (0..n)
                .map(|j| std::array::from_fn(|q| -sq[j][q] * qu[j][q] / prims.eps_q[j][q]))
                .collect()
        }
        ModelKind::Higr | ModelKind::HigrAblated => (0..n)
            .map(|j| {
                std::array::from_fn(|q| {
                    let d = qu[j][q];
                    -alpha * prims.rho_q[j][q] * d * d * d / prims.eps_q[j][q]
                })
            })
            .collect(),
    })
}

fn production_of(model: &Model, state: &SimState, prims: &Primitives) -> Result<f64> {
    if matches!(
        model.kind(),
        ModelKind::Euler | ModelKind::Hre | ModelKind::HreNoCapillary
    ) {
        return Ok(0.0);
    }
    let v = production_integrand(model, state, prims)?;
    Ok(quad_integral(model.mesh().h(), v.into_iter()))
}

/// Model entropy production rate `Ṡ`.
pub fn entropy_production_rate(model: &Model, state: &SimState) -> Result<f64> {
    production_of(model, state, &model.recover_primitives(state)?)
}

fn kinetic_alpha(model: &Model) -> f64 {
    if model.kind().has_gradient_kinetic_energy() {
        model.params().alpha
    } else {
        0.0
    }
}

fn kinetic_of(state: &SimState, prims: &Primitives, alpha: f64) -> f64 {
    let qu = prims.aux.q_u.quad_values();
    let h = state.mesh().h();
    quad_integral(
        h,
        (0..qu.len()).map(|j| {
            std::array::from_fn(|q| {
                let u = prims.u_q[j][q];
                0.5 * prims.rho_q[j][q] * (u * u + alpha * qu[j][q] * qu[j][q])
            })
        }),
    )
}

/// `½∫ρ(u² + αu_x²)`, with the gradient term only for models whose energy
/// carries it.
pub fn generalized_kinetic_energy(model: &Model, state: &SimState) -> Result<f64> {
    let prims = model.recover_primitives(state)?;
    Ok(kinetic_of(state, &prims, kinetic_alpha(model)))
}

/// `|dK/dt − α∫ρu_x³|` (IGR-type) or `|dK/dt|` (HRE-type) for pressureless
/// runs, with `K = ½∫ρ(u² + αu_x²)` and `dK/dt` from a central difference
/// over three equally spaced snapshots.
pub fn kinetic_energy_budget_residual(
    model: &Model,
    before: &SimState,
    center: &SimState,
    after: &SimState,
) -> Result<f64> {
    if !model.params().pressureless {
        return Err(Error::InvalidParameter(
            "kinetic-energy budget is defined for pressureless runs".into(),
        ));
    }
    let dt = 0.5 * (after.time - before.time);
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(
            "snapshots must be ordered in time".into(),
        ));
    }
    let alpha = model.params().alpha;
    let k = |s: &SimState| -> Result<f64> {
        Ok(kinetic_of(s, &model.recover_primitives(s)?, alpha))
    };
    let dk = (k(after)? - k(before)?) / (2.0 * dt);
    let source = match model.kind() {
        ModelKind::Igr | ModelKind::Higr => {
            let prims = model.recover_primitives(center)?;
            let qu = prims.aux.q_u.quad_values();
            alpha
                * quad_integral(
                    center.mesh().h(),
                    (0..qu.len()).map(|j| {
                        std::array::from_fn(|q| prims.rho_q[j][q] * qu[j][q].powi(3))
                    }),
                )
        }
        _ => 0.0,
    };
    Ok((dk - source).abs())
}

/// `max |v − median(v)|` over cell centres inside `[lo, hi]`.
pub fn window_deviation(field: &DgField, lo: f64, hi: f64) -> Result<f64> {
    let m = field.mesh();
    let mut v: Vec<f64> = (0..m.n_cells())
        .filter(|&j| {
            let x = m.cell_center(j);
            x >= lo && x <= hi
        })
        .map(|j| field.mean(j))
        .collect();
    if v.is_empty() {
        return Err(Error::EmptyWindow { lo, hi });
    }
    let mut sorted = v.clone();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len();
    let median = if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    };
    v.iter_mut().for_each(|x| *x = (*x - median).abs());
    Ok(v.into_iter().fold(0.0, f64::max))
}

fn spike_of(eps: &DgField, lo: f64, hi: f64) -> Result<f64> {
    window_deviation(eps, lo, hi)
}

/// Internal-energy spike amplitude in a window.
pub fn spike_metric(model: &Model, state: &SimState, lo: f64, hi: f64) -> Result<f64> {
    spike_of(&model.recover_primitives(state)?.eps, lo, hi)
}

/// Pressure `(γ−1)ρε` at cell centres, as a P⁰ field.
pub fn pressure_field(model: &Model, state: &SimState) -> Result<DgField> {
    let prims = model.recover_primitives(state)?;
    let g1 = model.params().gamma() - 1.0;
    let m = state.mesh();
    let coeffs = (0..m.n_cells())
        .map(|j| [g1 * state.rho.mean(j) * prims.eps.mean(j), 0.0])
        .collect();
    DgField::from_coeffs(m, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg1d::{project, Mesh1D};
    use crate::models::{initial_condition_sod, ModelParams, SodSetup};
    use std::f64::consts::{E, PI};

    fn model(kind: ModelKind, n: usize, alpha: f64) -> Model {
        let m = Mesh1D::unit(n).unwrap();
        Model::new(ModelParams::new(kind, alpha, 1.4).unwrap(), &m).unwrap()
    }

    #[test]
    fn totals_of_constant_state() {
        let md = model(ModelKind::Igr, 16, 0.0);
        let s = SimState::constant(md.mesh(), md.params(), 2.0, 0.5, 3.0);
        let [m, p, e] = conserved_totals(&s);
        assert!((m - 2.0).abs() < 1e-14);
        assert!((p - 1.0).abs() < 1e-14);
        assert!((e - (6.0 + 0.25)).abs() < 1e-14);
    }

    #[test]
    fn sod_mass() {
        let md = model(ModelKind::Igr, 512, 5.0 / 512.0f64.powi(2));
        let s = initial_condition_sod(md.mesh(), md.params(), &SodSetup::default()).unwrap();
        let [m, p, _] = conserved_totals(&s);
        assert!((m - 0.5625).abs() < 0.02 * 0.875);
        assert_eq!(p, 0.0);
    }

    #[test]
    fn entropy_examples() {
        let md = model(ModelKind::Hre, 16, 1e-3);
        let s = SimState::constant(md.mesh(), md.params(), 1.0, 0.0, 2.5);
        assert!(total_entropy(&md, &s).unwrap().abs() < 1e-14);
        let s = SimState::constant(md.mesh(), md.params(), 1.0, 0.0, 2.5 * E);
        assert!((total_entropy(&md, &s).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn conservative_models_report_exact_zero_production() {
        for kind in [ModelKind::Euler, ModelKind::Hre, ModelKind::HreNoCapillary] {
            let md = model(kind, 64, 1e-3);
            let p = *md.params();
            let s = SimState::from_primitives(
                md.mesh(),
                &p,
                |x| 1.0 + 0.2 * (2.0 * PI * x).sin(),
                |x| (2.0 * PI * x).sin(),
                |_| 1.0,
            )
            .unwrap();
            assert_eq!(entropy_production_rate(&md, &s).unwrap(), 0.0);
        }
    }

    #[test]
    fn higr_production_for_uniform_compression() {
        // Synthetic q_u ≡ −c: rate = αρc³/ϑ over the unit domain.
        let md = model(ModelKind::Higr, 32, 0.01);
        let s = SimState::constant(md.mesh(), md.params(), 1.5, 0.0, 2.0);
        let mut prims = md.recover_primitives(&s).unwrap();
        let c = 0.7;
        prims.aux.q_u = DgField::constant(md.mesh(), -c);
        let rate = production_of(&md, &s, &prims).unwrap();
        let want = 0.01 * 1.5 * c * c * c / 2.0;
        assert!((rate - want).abs() < 1e-14 * want.max(1.0));
        assert!(rate > 0.0);
        assert_eq!(
            production_of(&md, &s, &md.recover_primitives(&s).unwrap()).unwrap(),
            0.0
        );
    }

    #[test]
    fn igr_production_vanishes_by_symmetry() {
        // Σ = 1, q_u = sin(2πx), ϑ = 1: the integrand is odd over a period.
        let m = Mesh1D::unit(64).unwrap();
        let h = m.h();
        let qu = project(&m, |x| (2.0 * PI * x).sin()).quad_values();
        let v = quad_integral(h, qu.iter().map(|q| q.map(|d| -d)));
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn higr_integrand_has_opposite_sign_to_divergence() {
        let md = model(ModelKind::Higr, 64, 5.0 / 4096.0);
        let p = *md.params();
        let s = SimState::from_primitives(
            md.mesh(),
            &p,
            |x| 1.0 + 0.2 * (2.0 * PI * x).cos(),
            |x| 0.3 * (2.0 * PI * x).sin(),
            |_| 1.0,
        )
        .unwrap();
        let prims = md.recover_primitives(&s).unwrap();
        let g = production_integrand(&md, &s, &prims).unwrap();
        let qu = prims.aux.q_u.quad_values();
        for j in 0..64 {
            for q in 0..3 {
                assert!(g[j][q] * qu[j][q] <= 0.0);
            }
        }
    }

    #[test]
    fn kinetic_energy_examples() {
        let n = 256;
        let md = model(ModelKind::Hre, n, 0.0);
        let p = *md.params();
        let s = SimState::from_primitives(md.mesh(), &p, |_| 1.0, |x| (2.0 * PI * x).sin(), |_| 1.0)
            .unwrap();
        assert!((generalized_kinetic_energy(&md, &s).unwrap() - 0.25).abs() < 1e-4);

        let alpha = 1e-3;
        let md = model(ModelKind::Hre, n, alpha);
        let p = *md.params();
        let s = SimState::from_primitives(md.mesh(), &p, |_| 1.0, |x| (2.0 * PI * x).sin(), |_| 1.0)
            .unwrap();
        let want = 0.25 + 0.5 * alpha * (2.0 * PI).powi(2) * 0.5;
        assert!((generalized_kinetic_energy(&md, &s).unwrap() - want).abs() < 1e-4);

        let s0 = SimState::constant(md.mesh(), &p, 1.0, 0.0, 1.0);
        assert_eq!(generalized_kinetic_energy(&md, &s0).unwrap(), 0.0);
    }

    #[test]
    fn static_budget_residual_is_zero() {
        let m = Mesh1D::unit(32).unwrap();
        let mut p = ModelParams::new(ModelKind::Igr, 1e-3, 1.4).unwrap();
        p.pressureless = true;
        let md = Model::new(p, &m).unwrap();
        let mut a = SimState::constant(&m, &p, 1.0, 0.0, 1.0);
        let mut b = a.clone();
        let mut c = a.clone();
        a.time = 0.0;
        b.time = 0.1;
        c.time = 0.2;
        assert_eq!(kinetic_energy_budget_residual(&md, &a, &b, &c).unwrap(), 0.0);
        let thermo = model(ModelKind::Igr, 32, 1e-3);
        assert!(kinetic_energy_budget_residual(&thermo, &a, &b, &c).is_err());
    }

    #[test]
    fn spike_metric_examples() {
        let m = Mesh1D::unit(100).unwrap();
        let flat = DgField::constant(&m, 2.0);
        assert_eq!(window_deviation(&flat, 0.4, 0.6).unwrap(), 0.0);
        let mut bump = flat.clone();
        bump.coeffs_mut()[50][0] += 0.3;
        assert!((window_deviation(&bump, 0.4, 0.6).unwrap() - 0.3).abs() < 1e-14);
        assert!(matches!(
            window_deviation(&flat, 0.501, 0.502),
            Err(Error::EmptyWindow { .. })
        ));
    }
}
