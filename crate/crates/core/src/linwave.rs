//! Linear acoustics: analytic dispersion relations, phase speeds measured
//! from small-amplitude runs, and the period-averaged acoustic energy rate.

use std::f64::consts::PI;

use crate::dg1d::{GAUSS_WEIGHTS, Mesh1D};
use crate::eos::IdealGasEos;
use crate::error::{Error, Result};
use crate::models::{Model, ModelKind, ModelParams, SimState};
use crate::timestep::{RunConfig, SnapshotCollector, run};

/// Plane-wave query about a constant state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionQuery {
    pub k: f64,
    pub rho0: f64,
    pub eps0: f64,
    pub u0: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Include the density-gradient energy `ρε_{|∇ρ|²} = (α/2)c_s²`.
    pub capillary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionBranches {
    pub omega_plus: f64,
    pub omega_minus: f64,
    /// Branches with `ω = k·u₀` (one entropy mode in 1D).
    pub degenerate: usize,
}

impl DispersionQuery {
    /// The linear problem seen by a model: regularizations that leave the
    /// kinetic energy untouched do not disperse sound.
    pub fn for_model(params: &ModelParams, k: f64, rho0: f64, eps0: f64, u0: f64) -> Self {
        let dispersive = params.kind.has_gradient_kinetic_energy();
        Self {
            k,
            rho0,
            eps0,
            u0,
            alpha: if dispersive { params.alpha } else { 0.0 },
            gamma: params.gamma(),
            capillary: params.kind != ModelKind::HreNoCapillary,
        }
    }
}

pub fn dispersion_omega(q: &DispersionQuery) -> Result<DispersionBranches> {
    let eos = IdealGasEos::new(q.gamma)?;
    let cs2 = eos.sound_speed_sq(q.rho0, q.eps0)?;
    if !(q.alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "regularization area must be non-negative, got {}",
            q.alpha
        )));
    }
    let k2 = q.k * q.k;
    let cap = if q.capillary { q.alpha * cs2 } else { 0.0 };
    let s = q.k.abs() * ((cs2 + cap * k2) / (1.0 + q.alpha * k2)).sqrt();
    let shift = q.k * q.u0;
    Ok(DispersionBranches {
        omega_plus: shift + s,
        omega_minus: shift - s,
        degenerate: 1,
    })
}

/// Small-amplitude travelling-wave experiment on a unit periodic domain.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpeedSetup {
    /// Signed integer wavenumber, `k = 2π·k_mode`.
    pub k_mode: i32,
    /// Relative density amplitude.
    pub amplitude: f64,
    /// Defaults to one domain crossing.
    pub t_measure: Option<f64>,
    pub samples: usize,
    pub rho0: f64,
    pub eps0: f64,
    pub u0: f64,
    pub cfl: f64,
}

impl Default for PhaseSpeedSetup {
    fn default() -> Self {
        Self {
            k_mode: 1,
            amplitude: 1e-6,
            t_measure: None,
            samples: 32,
            rho0: 1.0,
            eps0: 2.5,
            u0: 0.0,
            cfl: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMeasurement {
    /// Measured phase speed `−(dφ/dt)/k`.
    pub speed: f64,
    /// Analytic `ω₊/k` for the model's linear problem.
    pub analytic_speed: f64,
    pub times: Vec<f64>,
    /// Unwrapped phases of the k-th Fourier coefficient of `ρ`.
    pub phases: Vec<f64>,
}

impl PhaseMeasurement {
    pub fn rel_err(&self) -> f64 {
        (self.speed - self.analytic_speed).abs() / self.analytic_speed.abs()
    }
}

/// `∫ρ e^{−ikx} dx` by Gauss quadrature, background removed.
fn fourier_coefficient(state: &SimState, k: f64, rho0: f64) -> (f64, f64) {
    let mesh = state.mesh();
    let h = mesh.h();
    let (mut re, mut im) = (0.0, 0.0);
    for (j, vals) in state.rho.quad_values().iter().enumerate() {
        let xs = mesh.quad_points(j);
        for q in 0..3 {
            let w = 0.5 * h * GAUSS_WEIGHTS[q] * (vals[q] - rho0);
            re += w * (k * xs[q]).cos();
            im -= w * (k * xs[q]).sin();
        }
    }
    (re, im)
}

fn wrap(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

fn least_squares_slope(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let num: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let den: f64 = t.iter().map(|a| (a - tm) * (a - tm)).sum();
    num / den
}

/// Run a right-moving acoustic wave and fit its phase speed.
pub fn measure_phase_speed(model: &Model, setup: &PhaseSpeedSetup) -> Result<PhaseMeasurement> {
    let mesh: Mesh1D = *model.mesh();
    let params = model.params();
    if setup.k_mode == 0 {
        return Err(Error::InvalidParameter("k_mode must be non-zero".into()));
    }
    if !(setup.amplitude > 0.0 && setup.amplitude <= 1e-5) {
        return Err(Error::InvalidParameter(format!(
            "relative amplitude must lie in (0, 1e-5], got {}",
            setup.amplitude
        )));
    }
    if setup.samples < 3 {
        return Err(Error::InvalidParameter("need at least 3 phase samples".into()));
    }
    let k = 2.0 * PI * f64::from(setup.k_mode) / mesh.length();
    let branches =
        dispersion_omega(&DispersionQuery::for_model(params, k, setup.rho0, setup.eps0, setup.u0))?;
    let analytic_speed = branches.omega_plus / k;
    let cs = IdealGasEos::new(params.gamma())?.sound_speed_sq(setup.rho0, setup.eps0)?.sqrt();
    let t_measure = setup.t_measure.unwrap_or(mesh.length() / cs);
    if !(t_measure > 0.0) {
        return Err(Error::InvalidParameter(format!("t_measure must be positive, got {t_measure}")));
    }

    // Eigenvector of the model's own linear problem, so no counter-propagating
    // wave pollutes the phase. Pressure follows the isentrope.
    let (rho0, a, gamma) = (setup.rho0, setup.amplitude, params.gamma());
    let p0 = (gamma - 1.0) * rho0 * setup.eps0;
    let v_rel = analytic_speed - setup.u0;
    let rho = |x: f64| rho0 * (1.0 + a * (k * x).cos());
    let u = |x: f64| setup.u0 + v_rel * a * (k * x).cos();
    let p = |x: f64| p0 * (rho(x) / rho0).powf(gamma);
    let initial = SimState::from_primitives(&mesh, params, rho, u, p)?;

    let times: Vec<f64> = (1..=setup.samples)
        .map(|i| if i == setup.samples { t_measure } else { t_measure * i as f64 / setup.samples as f64 })
        .collect();
    let mut config = RunConfig::new(t_measure, setup.cfl)?.with_outputs(times.clone())?;
    config.diagnostics_every = 0;
    let mut collector = SnapshotCollector::default();
    run(model, initial.clone(), &config, &mut collector)?;

    let mut all_t = vec![0.0];
    all_t.extend(times);
    let mut phases = Vec::with_capacity(all_t.len());
    let floor = 1e-3 * 0.5 * a * rho0 * mesh.length();
    for s in std::iter::once(&initial).chain(&collector.snapshots) {
        let (re, im) = fourier_coefficient(s, k, rho0);
        if re.hypot(im) < floor {
            return Err(Error::PhaseFit(format!("mode {} lost its amplitude", setup.k_mode)));
        }
        let raw = im.atan2(re);
        match phases.last() {
            None => phases.push(raw),
            Some(&prev) => {
                let step = wrap(raw - prev);
                if step.abs() > 0.5 * PI {
                    return Err(Error::PhaseFit(format!(
                        "phase advanced {step:.3} rad between samples; shorten t_measure or add samples"
                    )));
                }
                phases.push(prev + step);
            }
        }
    }
    let slope = least_squares_slope(&all_t, &phases);
    Ok(PhaseMeasurement {
        speed: -slope / k,
        analytic_speed,
        times: all_t,
        phases,
    })
}

fn double_factorial(n: u32) -> f64 {
    (1..=n).rev().step_by(2).map(f64::from).product()
}

fn check_energy_args(n: u32, rho0: f64, rho_amp: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("power n must be at least 2, got {n}")));
    }
    if !(rho0 > 0.0 && rho_amp.abs() < rho0) {
        return Err(Error::InvalidParameter(format!(
            "need |rho'| < rho0, got rho0 = {rho0}, rho' = {rho_amp}"
        )));
    }
    Ok(())
}

fn sign(n: u32) -> f64 {
    if n % 2 == 0 { -1.0 } else { 1.0 }
}

/// Period average of `K̇_n` for an Euler plane wave, closed form.
pub fn acoustic_energy_rate_avg(n: u32, omega: f64, rho0: f64, rho_amp: f64) -> Result<f64> {
    check_energy_args(n, rho0, rho_amp)?;
    if n % 2 == 1 {
        return Ok(0.0);
    }
    let scale = omega.powi(n as i32) * rho_amp.powi(n as i32) / rho0.powi(n as i32 - 1);
    Ok(sign(n) * scale * 2.0 * PI * double_factorial(n - 1) / double_factorial(n))
}

/// The defining period integral by the `points`-node trapezoidal rule,
/// which is exact for the trigonometric integrand once `points > n + 1`.
pub fn acoustic_energy_rate_quadrature(
    n: u32,
    omega: f64,
    rho0: f64,
    rho_amp: f64,
    points: usize,
) -> Result<f64> {
    check_energy_args(n, rho0, rho_amp)?;
    if points < 2 {
        return Err(Error::InvalidParameter("need at least 2 quadrature points".into()));
    }
    let dt = 2.0 * PI / points as f64;
    let integral: f64 = (0..points)
        .map(|i| {
            let th = i as f64 * dt;
            (rho0 + rho_amp * th.cos()) * th.sin().powi(n as i32)
        })
        .sum::<f64>()
        * dt;
    Ok(sign(n) * (omega * rho_amp / rho0).powi(n as i32) * integral)
}
