//! Optical Bloch equations of the driven emitter in the laser rotating frame.
//!
//! ```text
//! ds/dt = -i D s - i W w - (G/2) s
//! dw/dt = -2i W* s + 2i W s* - G (1 + w)
//! ```
//!
//! with `D` the detuning, `W` the complex Rabi coupling and `G` the decay
//! rate at the laser frequency. `4|s|^2 + w^2` is conserved by the drive and
//! only contracted by the decay.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use thiserror::Error;

use crate::emission::{decay_rate, lamb_shift, EmissionError, Emitter, LambQuadrature};
use crate::linalg::SolverOptions;
use crate::scene::Scene;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlochError {
    #[error("time step {dt} exceeds the stability limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("no steady state: gamma_prime = 0 with nonzero drive")]
    NoSteadyState,
    #[error("invalid drive parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Emission(#[from] EmissionError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    omega_l: f64,
    rabi: Complex64,
    detuning: f64,
    gamma_prime: f64,
    delta_prime: f64,
}

impl DriveParams {
    /// Detuning is `omega0 - delta_prime - omega_l`.
    pub fn new(omega0: f64, omega_l: f64, rabi: Complex64, gamma_prime: f64, delta_prime: f64) -> Result<Self, BlochError> {
        if !(omega_l.is_finite() && omega_l > 0.0) {
            return Err(BlochError::InvalidParams(format!("omega_L must be > 0 (got {omega_l})")));
        }
        if !(gamma_prime.is_finite() && gamma_prime >= 0.0) {
            return Err(BlochError::InvalidParams(format!("gamma_prime must be >= 0 (got {gamma_prime})")));
        }
        if !(omega0.is_finite() && delta_prime.is_finite() && rabi.is_finite()) {
            return Err(BlochError::InvalidParams("non-finite parameter".into()));
        }
        Ok(Self {
            omega_l,
            rabi,
            detuning: omega0 - delta_prime - omega_l,
            gamma_prime,
            delta_prime,
        })
    }

    /// Parameters given directly by detuning, bypassing the frequencies.
    pub fn with_detuning(detuning: f64, rabi: Complex64, gamma_prime: f64) -> Result<Self, BlochError> {
        let mut p = Self::new(1.0, 1.0, rabi, gamma_prime, 0.0)?;
        if !detuning.is_finite() {
            return Err(BlochError::InvalidParams("non-finite detuning".into()));
        }
        p.detuning = detuning;
        Ok(p)
    }

    pub fn omega_l(&self) -> f64 {
        self.omega_l
    }

    pub fn rabi(&self) -> Complex64 {
        self.rabi
    }

    pub fn detuning(&self) -> f64 {
        self.detuning
    }

    pub fn gamma_prime(&self) -> f64 {
        self.gamma_prime
    }

    pub fn delta_prime(&self) -> f64 {
        self.delta_prime
    }

    /// Largest rate in the problem; sets the step-size limit.
    pub fn max_rate(&self) -> f64 {
        self.gamma_prime.max(self.rabi.norm()).max(self.detuning.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub s: Complex64,
    pub w: f64,
}

impl BlochState {
    pub const GROUND: Self = Self {
        s: Complex64 { re: 0.0, im: 0.0 },
        w: -1.0,
    };
    pub const EXCITED: Self = Self {
        s: Complex64 { re: 0.0, im: 0.0 },
        w: 1.0,
    };

    /// `4|s|^2 + w^2`; at most 1 for physical states.
    pub fn bloch_norm(&self) -> f64 {
        4.0 * self.s.norm_sqr() + self.w * self.w
    }

    fn axpy(&self, h: f64, d: &BlochState) -> Self {
        Self {
            s: self.s + d.s * h,
            w: self.w + d.w * h,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserRates {
    pub gamma_prime: f64,
    pub delta_prime: f64,
}

/// `Gamma'` and `delta'`: the decay rate and shift re-evaluated at `omega_l`.
pub fn rates_at_laser(
    emitter: &Emitter,
    scene: &Scene,
    omega_l: f64,
    quad: &LambQuadrature,
    include_nonresonant: bool,
    opts: &SolverOptions,
) -> Result<LaserRates, BlochError> {
    if !(omega_l.is_finite() && omega_l > 0.0) {
        return Err(BlochError::InvalidParams(format!("omega_L must be > 0 (got {omega_l})")));
    }
    let at_laser = emitter.with_omega0(omega_l)?;
    let gamma_prime = decay_rate(&at_laser, scene, opts)?;
    let delta_prime = lamb_shift(&at_laser, scene, quad, opts)?.delta(include_nonresonant);
    Ok(LaserRates {
        gamma_prime,
        delta_prime,
    })
}

pub fn bloch_rhs(state: &BlochState, params: &DriveParams) -> BlochState {
    let i = Complex64::i();
    let g = params.gamma_prime;
    let om = params.rabi;
    let s = state.s;
    let ds = -i * params.detuning * s - i * om * state.w - s * (g / 2.0);
    let dw = (-2.0 * i * om.conj() * s + 2.0 * i * om * s.conj()).re - g * (1.0 + state.w);
    BlochState { s: ds, w: dw }
}

/// Fixed-step RK4 from `t = 0` to `t_span`. The step is `t_span / n` with
/// `n = ceil(t_span / dt)`, so it never exceeds `dt`. Returns `(t, state)`
/// for every step including the initial one.
pub fn integrate_bloch(
    initial: BlochState,
    params: &DriveParams,
    t_span: f64,
    dt: f64,
) -> Result<Vec<(f64, BlochState)>, BlochError> {
    if !(t_span.is_finite() && t_span >= 0.0) {
        return Err(BlochError::InvalidParams(format!("t_span must be >= 0 (got {t_span})")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(BlochError::InvalidParams(format!("dt must be > 0 (got {dt})")));
    }
    let rate = params.max_rate();
    if rate > 0.0 && dt > 0.1 / rate {
        return Err(BlochError::StepTooLarge { dt, limit: 0.1 / rate });
    }
    if t_span == 0.0 {
        return Ok(vec![(0.0, initial)]);
    }
    let n = ((t_span / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = t_span / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    let mut y = initial;
    out.push((0.0, y));
    for k in 1..=n {
        let k1 = bloch_rhs(&y, params);
        let k2 = bloch_rhs(&y.axpy(h / 2.0, &k1), params);
        let k3 = bloch_rhs(&y.axpy(h / 2.0, &k2), params);
        let k4 = bloch_rhs(&y.axpy(h, &k3), params);
        y = BlochState {
            s: y.s + (k1.s + k2.s * 2.0 + k3.s * 2.0 + k4.s) * (h / 6.0),
            w: y.w + (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w) * (h / 6.0),
        };
        let t = if k == n { t_span } else { k as f64 * h };
        out.push((t, y));
    }
    Ok(out)
}

/// Fixed point of [`bloch_rhs`] from the real 3x3 system in `(Re s, Im s, w)`.
pub fn steady_state(params: &DriveParams) -> Result<BlochState, BlochError> {
    let g = params.gamma_prime;
    let (a, b) = (params.rabi.re, params.rabi.im);
    if g == 0.0 {
        if params.rabi == Complex64::new(0.0, 0.0) {
            return Ok(BlochState::GROUND);
        }
        return Err(BlochError::NoSteadyState);
    }
    let d = params.detuning;
    let m = Matrix3::new(
        -g / 2.0, d, b, //
        -d, -g / 2.0, -a, //
        -4.0 * b, 4.0 * a, -g,
    );
    let rhs = Vector3::new(0.0, 0.0, g);
    let x = m.lu().solve(&rhs).ok_or(BlochError::NoSteadyState)?;
    Ok(BlochState {
        s: Complex64::new(x[0], x[1]),
        w: x[2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn excited_state_decays() {
        let p = DriveParams::with_detuning(0.0, Complex64::new(0.0, 0.0), 0.3).unwrap();
        let d = bloch_rhs(&BlochState::EXCITED, &p);
        assert_eq!(d.w, -0.6);
        assert_eq!(d.s, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn phase_closure() {
        let p = DriveParams::with_detuning(0.0, Complex64::new(0.7, 0.0), 0.0).unwrap();
        let d = bloch_rhs(&BlochState { s: Complex64::new(0.0, 0.2), w: 0.3 }, &p);
        assert_eq!(d.s.re, 0.0);
    }

    #[test]
    fn detuning_from_frequencies() {
        let p = DriveParams::new(2.0, 1.5, Complex64::new(0.1, 0.0), 0.1, 0.2).unwrap();
        assert!((p.detuning() - 0.3).abs() < 1e-15);
        assert!(DriveParams::new(2.0, 0.0, Complex64::new(0.1, 0.0), 0.1, 0.0).is_err());
        assert!(DriveParams::new(2.0, 1.0, Complex64::new(0.1, 0.0), -0.1, 0.0).is_err());
    }

    #[test]
    fn undriven_closed_form() {
        let g = 0.5;
        let p = DriveParams::with_detuning(0.0, Complex64::new(0.0, 0.0), g).unwrap();
        let tr = integrate_bloch(BlochState::EXCITED, &p, 3.0 / g, 0.01).unwrap();
        let (t, y) = tr.last().unwrap();
        assert_eq!(*t, 6.0);
        assert!((y.w - (2.0 * (-g * t).exp() - 1.0)).abs() < 1e-6);
    }

    #[test]
    fn zero_span_and_step_limit() {
        let p = DriveParams::with_detuning(0.0, Complex64::new(1.0, 0.0), 0.1).unwrap();
        assert_eq!(integrate_bloch(BlochState::GROUND, &p, 0.0, 0.01).unwrap(), vec![(0.0, BlochState::GROUND)]);
        assert!(matches!(
            integrate_bloch(BlochState::GROUND, &p, 1.0, 0.5),
            Err(BlochError::StepTooLarge { .. })
        ));
    }

    #[test]
    fn steady_state_special_values() {
        let g = 0.4;
        let p = DriveParams::with_detuning(0.0, Complex64::new(0.0, 0.0), g).unwrap();
        assert_eq!(steady_state(&p).unwrap(), BlochState::GROUND);
        let p = DriveParams::with_detuning(0.0, Complex64::new(g / 8f64.sqrt(), 0.0), g).unwrap();
        assert!((steady_state(&p).unwrap().w + 0.5).abs() < 1e-14);
        let p = DriveParams::with_detuning(0.0, Complex64::new(1e6, 0.0), g).unwrap();
        assert!(steady_state(&p).unwrap().w.abs() < 1e-10);
        let p = DriveParams::with_detuning(0.0, Complex64::new(1.0, 0.0), 0.0).unwrap();
        assert_eq!(steady_state(&p), Err(BlochError::NoSteadyState));
    }

    #[test]
    fn resonant_steady_state_formula() {
        let g = 0.3;
        let om = Complex64::new(0.2, -0.5);
        let p = DriveParams::with_detuning(0.0, om, g).unwrap();
        let ss = steady_state(&p).unwrap();
        let w = -1.0 / (1.0 + 8.0 * om.norm_sqr() / (g * g));
        assert!((ss.w - w).abs() < 1e-14);
        let s = -2.0 * Complex64::i() * om * w / g;
        assert!((ss.s - s).norm() < 1e-14);
    }

    #[test]
    fn fourth_order_convergence() {
        let p = DriveParams::with_detuning(0.3, Complex64::new(1.0, 0.4), 0.2).unwrap();
        let end = |dt: f64| *integrate_bloch(BlochState::GROUND, &p, 5.0, dt).unwrap().last().unwrap();
        let (a, b, c) = (end(0.04).1, end(0.02).1, end(0.01).1);
        let e1 = (a.w - b.w).abs() + (a.s - b.s).norm();
        let e2 = (b.w - c.w).abs() + (b.s - c.s).norm();
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.3, "order {order}");
    }

    proptest! {
        #[test]
        fn fixed_point_is_stationary(d in -2.0..2.0f64, a in -2.0..2.0f64, b in -2.0..2.0f64, g in 0.05..2.0f64) {
            let p = DriveParams::with_detuning(d, Complex64::new(a, b), g).unwrap();
            let ss = steady_state(&p).unwrap();
            let r = bloch_rhs(&ss, &p);
            prop_assert!(r.s.norm() < 1e-12 && r.w.abs() < 1e-12);
            prop_assert!(ss.bloch_norm() <= 1.0 + 1e-12);
        }

        #[test]
        fn global_phase_covariance(d in -2.0..2.0f64, a in 0.01..2.0f64, g in 0.05..2.0f64, phi in -3.0..3.0f64) {
            let p0 = DriveParams::with_detuning(d, Complex64::new(a, 0.0), g).unwrap();
            let rot = Complex64::from_polar(1.0, phi);
            let p1 = DriveParams::with_detuning(d, Complex64::new(a, 0.0) * rot, g).unwrap();
            let (s0, s1) = (steady_state(&p0).unwrap(), steady_state(&p1).unwrap());
            prop_assert!((s1.s - s0.s * rot).norm() < 1e-12);
            prop_assert!((s1.w - s0.w).abs() < 1e-12);
        }
    }
}
