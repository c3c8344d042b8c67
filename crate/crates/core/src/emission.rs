//! Spontaneous-emission observables of a two-level emitter in a scene.
//!
//! Units: `hbar = c = 1`, frequencies in `1/L0`, dipoles in matching
//! natural units. The coupling kernel is
//! `B(w) = conj(mu) . w^2 G(x0, x0, w) . mu`, so that `Gamma = 2 Im B(w0)`
//! and `-delta = Re B(w0)`. The divergent real part of the bulk term is
//! taken as already absorbed in the input transition frequency `omega0`;
//! only the environment part `G_ref` contributes a shift.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::cda::SceneGreen;
use crate::dyadic::{cnorm3, norm3, sub3, CVec3, ComplexDyadic, Vec3, CZERO};
use crate::green::{im_green_coincident_homogeneous, GreenError};
use crate::linalg::SolverOptions;
use crate::materials::MaterialError;
use crate::quadrature::{composite_gauss, filon_linear};
use crate::scene::Scene;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmissionError {
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error("invalid emitter: {0}")]
    InvalidEmitter(String),
    #[error("invalid quadrature settings: {0}")]
    InvalidQuadrature(String),
    #[error("{what} quadrature not converged: relative change {change:.3e} on grid doubling")]
    QuadratureNotConverged { what: &'static str, change: f64 },
    #[error("Bromwich window too small: |S(0) - 1| = {deviation:.3e}")]
    WindowTooSmall { deviation: f64 },
    #[error("far-field request in the near zone: w0 R / c = {kr:.3} <= 10")]
    NearField { kr: f64 },
    #[error("decay rate vanishes; no decay time scale")]
    NoDecay,
}

impl From<MaterialError> for EmissionError {
    fn from(e: MaterialError) -> Self {
        Self::Green(GreenError::Material(e))
    }
}

impl EmissionError {
    /// True for failures of a numerical quadrature (as opposed to the solver).
    pub fn is_quadrature(&self) -> bool {
        matches!(
            self,
            Self::QuadratureNotConverged { .. } | Self::WindowTooSmall { .. } | Self::InvalidQuadrature(_)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Emitter {
    position: Vec3,
    dipole: CVec3,
    omega0: f64,
    smear_width: f64,
}

impl Emitter {
    /// `smear_width` is carried as metadata; the self-term it would produce
    /// is assumed to be part of `omega0` already.
    pub fn new(position: Vec3, dipole: CVec3, omega0: f64, smear_width: f64) -> Result<Self, EmissionError> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(EmissionError::InvalidEmitter(format!("omega0 must be > 0 (got {omega0})")));
        }
        let m = cnorm3(&dipole);
        if !(m.is_finite() && m > 0.0) {
            return Err(EmissionError::InvalidEmitter("dipole must be nonzero".into()));
        }
        if !(smear_width.is_finite() && smear_width >= 0.0) {
            return Err(EmissionError::InvalidEmitter("smear_width must be >= 0".into()));
        }
        if !position.iter().all(|v| v.is_finite()) {
            return Err(EmissionError::InvalidEmitter("position must be finite".into()));
        }
        Ok(Self {
            position,
            dipole,
            omega0,
            smear_width,
        })
    }

    pub fn position(&self) -> Vec3 {
        self.position
    }

    pub fn dipole(&self) -> CVec3 {
        self.dipole
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn smear_width(&self) -> f64 {
        self.smear_width
    }

    pub fn dipole_norm(&self) -> f64 {
        cnorm3(&self.dipole)
    }

    pub fn orientation(&self) -> CVec3 {
        let m = self.dipole_norm();
        [self.dipole[0] / m, self.dipole[1] / m, self.dipole[2] / m]
    }

    /// Same emitter with another transition frequency.
    pub fn with_omega0(&self, omega0: f64) -> Result<Self, EmissionError> {
        Self::new(self.position, self.dipole, omega0, self.smear_width)
    }
}

/// Projected LDOS and its bulk / environment split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ldos {
    pub total: f64,
    pub bulk: f64,
    pub reference: f64,
}

/// LDOS from a precomputed `G_ref(x0, x0, w)`.
pub fn ldos_from_reference(omega: f64, eps_b: Complex64, g_ref: &ComplexDyadic, n_hat: &CVec3) -> Ldos {
    let im_bulk = im_green_coincident_homogeneous(omega, eps_b).get(0, 0).re;
    let bulk = 6.0 * omega / PI * im_bulk;
    let reference = 6.0 * omega / PI * g_ref.sandwich(n_hat, n_hat).im;
    Ldos {
        total: bulk + reference,
        bulk,
        reference,
    }
}

fn check_unit(n_hat: &CVec3) -> Result<(), EmissionError> {
    if (cnorm3(n_hat) - 1.0).abs() > 1e-9 {
        return Err(EmissionError::InvalidEmitter("orientation must be a unit vector".into()));
    }
    Ok(())
}

/// `rho = (6 w / pi) Im[n* . G(x0, x0, w) . n]`, split as bulk + environment.
pub fn ldos(scene: &Scene, x0: &Vec3, n_hat: &CVec3, omega: f64, opts: &SolverOptions) -> Result<Ldos, EmissionError> {
    check_unit(n_hat)?;
    let eps_b = scene.background().eval_real(omega)?;
    if scene.is_empty() {
        return Ok(ldos_from_reference(omega, eps_b, &ComplexDyadic::zero(), n_hat));
    }
    let sg = SceneGreen::new(scene, omega, opts)?;
    let g_ref = sg.green_ref_coincident(x0)?;
    Ok(ldos_from_reference(omega, eps_b, &g_ref, n_hat))
}

/// Decay rate through the LDOS: `Gamma = (pi/3) w0 |mu|^2 rho`.
pub fn decay_rate(emitter: &Emitter, scene: &Scene, opts: &SolverOptions) -> Result<f64, EmissionError> {
    let rho = ldos(scene, &emitter.position, &emitter.orientation(), emitter.omega0, opts)?;
    Ok(PI / 3.0 * emitter.omega0 * emitter.dipole_norm().powi(2) * rho.total)
}

/// Decay rate straight from the kernel: `Gamma = 2 Im[mu* . w0^2 G . mu]`.
pub fn decay_rate_direct(emitter: &Emitter, scene: &Scene, opts: &SolverOptions) -> Result<f64, EmissionError> {
    let w = emitter.omega0;
    let eps_b = scene.background().eval_real(w)?;
    let im_bulk = im_green_coincident_homogeneous(w, eps_b);
    let g_ref = if scene.is_empty() {
        ComplexDyadic::zero()
    } else {
        SceneGreen::new(scene, w, opts)?.green_ref_coincident(&emitter.position)?
    };
    let mu = emitter.dipole;
    let im_g = im_bulk.sandwich(&mu, &mu).re + g_ref.sandwich(&mu, &mu).im;
    Ok(2.0 * w * w * im_g)
}

/// Environment kernel `B_ref(w) = mu* . w^2 G_ref(x0, x0, w) . mu` for real `w != 0`.
pub fn reference_kernel(emitter: &Emitter, scene: &Scene, omega: f64, opts: &SolverOptions) -> Result<Complex64, EmissionError> {
    if scene.is_empty() {
        return Ok(CZERO);
    }
    let sg = SceneGreen::new(scene, omega.abs(), opts)?;
    let g_ref = sg.green_ref_coincident(&emitter.position)?;
    let b = g_ref.sandwich(&emitter.dipole, &emitter.dipole) * (omega * omega);
    Ok(if omega < 0.0 { b.conj() } else { b })
}

/// Frequency grid for the Lamb-shift integrals over `[0, omega_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambQuadrature {
    pub omega_max: f64,
    pub n_points: usize,
}

impl LambQuadrature {
    pub const ORDER: usize = 8;

    pub fn for_emitter(emitter: &Emitter) -> Self {
        Self {
            omega_max: 20.0 * emitter.omega0,
            n_points: 4000,
        }
    }
}

/// The two integrals that make up `-delta`, plus the directly evaluated
/// `Re B_ref(w0)` for comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambShift {
    /// `(1/pi) PV int_0^inf Im B_ref(w) / (w - w0) dw`
    pub resonant: f64,
    /// `(1/pi) int_0^inf Im B_ref(w) / (w + w0) dw`
    pub nonresonant: f64,
    /// `Re B_ref(w0)`
    pub direct: f64,
}

impl LambShift {
    pub const ZERO: Self = Self {
        resonant: 0.0,
        nonresonant: 0.0,
        direct: 0.0,
    };

    /// Shift `delta`; the non-resonant term is excluded unless requested.
    pub fn delta(&self, include_nonresonant: bool) -> f64 {
        if include_nonresonant {
            -(self.resonant + self.nonresonant)
        } else {
            -self.resonant
        }
    }
}

fn lamb_integrals(
    emitter: &Emitter,
    scene: &Scene,
    omega_max: f64,
    n_points: usize,
    f0: f64,
    opts: &SolverOptions,
) -> Result<(f64, f64), EmissionError> {
    let w0 = emitter.omega0;
    let order = LambQuadrature::ORDER;
    let panels = (n_points / order).max(2);
    let lower = ((panels as f64 * w0 / omega_max).round() as usize).clamp(1, panels - 1);
    let (mut nodes, mut weights) = composite_gauss(0.0, w0, lower, order);
    let (n2, w2) = composite_gauss(w0, omega_max, panels - lower, order);
    nodes.extend(n2);
    weights.extend(w2);
    let im_b: Vec<f64> = nodes
        .par_iter()
        .map(|&w| reference_kernel(emitter, scene, w, opts).map(|b| b.im))
        .collect::<Result<_, _>>()?;
    let mut resonant = 0.0;
    let mut nonresonant = 0.0;
    for ((w, wt), f) in nodes.iter().zip(&weights).zip(&im_b) {
        resonant += wt * (f - f0) / (w - w0);
        nonresonant += wt * f / (w + w0);
    }
    resonant += f0 * ((omega_max - w0) / w0).ln();
    Ok((resonant / PI, nonresonant / PI))
}

/// Environment Lamb shift from the Kramers–Krönig integrals of `Im B_ref`.
///
/// The integrals are evaluated on `n_points` and `2 n_points` nodes; a
/// relative change above 1% is reported as non-convergence.
pub fn lamb_shift(
    emitter: &Emitter,
    scene: &Scene,
    quad: &LambQuadrature,
    opts: &SolverOptions,
) -> Result<LambShift, EmissionError> {
    let w0 = emitter.omega0;
    if !(quad.omega_max > 10.0 * w0) {
        return Err(EmissionError::InvalidQuadrature(format!(
            "omega_max = {} must exceed 10 omega0 = {}",
            quad.omega_max,
            10.0 * w0
        )));
    }
    if quad.n_points < 2 * LambQuadrature::ORDER {
        return Err(EmissionError::InvalidQuadrature("n_points too small".into()));
    }
    if scene.is_empty() {
        return Ok(LambShift::ZERO);
    }
    let b0 = reference_kernel(emitter, scene, w0, opts)?;
    let coarse = lamb_integrals(emitter, scene, quad.omega_max, quad.n_points, b0.im, opts)?;
    let fine = lamb_integrals(emitter, scene, quad.omega_max, 2 * quad.n_points, b0.im, opts)?;
    for (what, a, b) in [("resonant Lamb-shift", coarse.0, fine.0), ("non-resonant Lamb-shift", coarse.1, fine.1)] {
        let diff = (a - b).abs();
        if diff > 0.01 * b.abs() && diff > 1e-14 {
            return Err(EmissionError::QuadratureNotConverged {
                what,
                change: diff / b.abs().max(f64::MIN_POSITIVE),
            });
        }
    }
    Ok(LambShift {
        resonant: fine.0,
        nonresonant: fine.1,
        direct: b0.re,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionResult {
    pub omega0: f64,
    pub gamma: f64,
    pub delta: f64,
    pub omega_tilde: Complex64,
    pub ldos: Ldos,
    pub lamb: LambShift,
}

impl EmissionResult {
    pub fn new(omega0: f64, gamma: f64, delta: f64, ldos: Ldos, lamb: LambShift) -> Self {
        Self {
            omega0,
            gamma,
            delta,
            omega_tilde: Complex64::new(omega0 + delta, -gamma / 2.0),
            ldos,
            lamb,
        }
    }
}

/// Decay rate, LDOS and Lamb shift of an emitter in one call.
pub fn emission(
    emitter: &Emitter,
    scene: &Scene,
    quad: &LambQuadrature,
    include_nonresonant: bool,
    opts: &SolverOptions,
) -> Result<EmissionResult, EmissionError> {
    let rho = ldos(scene, &emitter.position, &emitter.orientation(), emitter.omega0, opts)?;
    let gamma = PI / 3.0 * emitter.omega0 * emitter.dipole_norm().powi(2) * rho.total;
    let lamb = lamb_shift(emitter, scene, quad, opts)?;
    Ok(EmissionResult::new(emitter.omega0, gamma, lamb.delta(include_nonresonant), rho, lamb))
}

/// Wigner–Weisskopf pole amplitude `S(t) = exp(-i (w0 + delta) t - Gamma t / 2)`.
pub fn ww_amplitude_pole(result: &EmissionResult, t: f64) -> Complex64 {
    (Complex64::new(0.0, -1.0) * result.omega_tilde * t).exp()
}

/// Settings of the real-frequency Bromwich quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BromwichQuadrature {
    /// Half-width of the dense core around `omega0`, in units of `Gamma`.
    pub core_halfwidth: f64,
    /// Half-width of the full window around `omega0`, in units of `omega0`.
    pub tail_halfwidth: f64,
    /// Contour shift `gamma`, in units of `Gamma`.
    pub shift: f64,
    pub core_intervals: usize,
    pub tail_intervals: usize,
    /// Accept when the sup-norm change under point doubling is below this.
    pub refine_tol: f64,
    pub max_refinements: usize,
}

impl Default for BromwichQuadrature {
    fn default() -> Self {
        Self {
            core_halfwidth: 50.0,
            tail_halfwidth: 5.0,
            shift: 1e-3,
            core_intervals: 2000,
            tail_intervals: 400,
            refine_tol: 1e-3,
            max_refinements: 6,
        }
    }
}

fn bromwich_grid(w0: f64, core: f64, tail: f64, n_core: usize, n_tail: usize) -> Vec<f64> {
    let mut upper = Vec::with_capacity(n_core / 2 + n_tail + 1);
    let half = n_core.div_ceil(2);
    for k in 1..=half {
        upper.push(core * k as f64 / half as f64);
    }
    if tail > core {
        let ratio = (tail / core).powf(1.0 / n_tail as f64);
        let mut d = core;
        for k in 1..=n_tail {
            d = if k == n_tail { tail } else { d * ratio };
            upper.push(d);
        }
    }
    let mut grid: Vec<f64> = upper.iter().rev().map(|d| w0 - d).collect();
    grid.push(w0);
    grid.extend(upper.iter().map(|d| w0 + d));
    grid
}

/// Full kernel `B(w)` on the real axis: environment part from the solver plus
/// the analytic bulk imaginary part `w^3 |mu|^2 Re n(w) / (6 pi)`.
fn full_kernel(emitter: &Emitter, scene: &Scene, omega: f64, opts: &SolverOptions) -> Result<Complex64, EmissionError> {
    if omega == 0.0 {
        return Ok(CZERO);
    }
    let w = omega.abs();
    let n = scene.background().index(w)?;
    let bulk_im = w.powi(3) * emitter.dipole_norm().powi(2) * n.re / (6.0 * PI);
    let b = reference_kernel(emitter, scene, w, opts)? + Complex64::new(0.0, bulk_im);
    Ok(if omega < 0.0 { b.conj() } else { b })
}

/// Numerical inverse Laplace transform of the exact amplitude
///
/// ```text
/// S(t) = e^{gt} int dw/(2 pi) e^{-iwt} / (g + i(w0 - w) - i B(w))
/// ```
///
/// along `p = g - i w`. The `1/w` tail is removed analytically with the
/// Lorentzian `1/(g_h + i(w0 - w))`, `g_h = g + Gamma/2`, whose transform is
/// `e^{-i w0 t - g_h t}`;
/// the remainder is integrated with a linear Filon rule.
pub fn ww_amplitude_numeric(
    emitter: &Emitter,
    scene: &Scene,
    t_grid: &[f64],
    quad: &BromwichQuadrature,
    opts: &SolverOptions,
) -> Result<Vec<Complex64>, EmissionError> {
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(EmissionError::InvalidQuadrature("times must be finite and >= 0".into()));
    }
    if quad.core_intervals < 4 || quad.tail_intervals < 1 || !(quad.shift > 0.0) || !(quad.core_halfwidth > 0.0) {
        return Err(EmissionError::InvalidQuadrature("bad Bromwich settings".into()));
    }
    let w0 = emitter.omega0;
    let gamma = decay_rate(emitter, scene, opts)?;
    if !(gamma > 0.0) {
        return Err(EmissionError::NoDecay);
    }
    let core = quad.core_halfwidth * gamma;
    let tail = quad.tail_halfwidth * w0;
    let shift = quad.shift * gamma;
    // Subtracted Lorentzian carries the Markovian pole, leaving a smooth remainder.
    let g_sub = shift + gamma / 2.0;
    let i = Complex64::i();

    // t = 0 is always evaluated so that the normalisation can be checked.
    let mut times = t_grid.to_vec();
    times.push(0.0);

    let evaluate = |n_core: usize, n_tail: usize| -> Result<Vec<Complex64>, EmissionError> {
        let grid = bromwich_grid(w0, core, tail, n_core, n_tail);
        let remainder: Vec<Complex64> = grid
            .par_iter()
            .map(|&w| {
                let b = full_kernel(emitter, scene, w, opts)?;
                let f = 1.0 / (shift + i * (w0 - w) - i * b);
                let h = 1.0 / (g_sub + i * (w0 - w));
                Ok(f - h)
            })
            .collect::<Result<_, EmissionError>>()?;
        Ok(times
            .par_iter()
            .map(|&t| {
                let analytic = (-i * w0 * t - g_sub * t).exp();
                let numeric = filon_linear(&grid, &remainder, t) / (2.0 * PI);
                (shift * t).exp() * (analytic + numeric)
            })
            .collect())
    };

    let mut n_core = quad.core_intervals;
    let mut n_tail = quad.tail_intervals;
    let mut prev = evaluate(n_core, n_tail)?;
    let mut change = f64::INFINITY;
    for _ in 0..quad.max_refinements {
        n_core *= 2;
        n_tail *= 2;
        let next = evaluate(n_core, n_tail)?;
        change = prev.iter().zip(&next).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prev = next;
        if change < quad.refine_tol {
            break;
        }
    }
    if !(change < quad.refine_tol) {
        return Err(EmissionError::QuadratureNotConverged {
            what: "Bromwich",
            change,
        });
    }
    let s0 = prev.pop().expect("t = 0 sample");
    let deviation = (s0 - 1.0).norm();
    if deviation > 1e-2 {
        return Err(EmissionError::WindowTooSmall { deviation });
    }
    Ok(prev)
}

/// Far-field single-photon field of the decaying emitter.
///
/// The smooth form factor `F = G e^{-i w0 n0 R}` is sampled at
/// `max(R, extraction_radius / w0)` along the observation direction and
/// carried back to `R` with the `1/R` law.
pub struct FarField<'a> {
    emitter: Emitter,
    result: EmissionResult,
    n0: f64,
    extraction_radius: f64,
    scene: &'a Scene,
    green: Option<SceneGreen<'a>>,
    eps_b: Complex64,
}

impl<'a> FarField<'a> {
    pub const DEFAULT_EXTRACTION: f64 = 50.0;

    pub fn new(
        emitter: &Emitter,
        result: &EmissionResult,
        scene: &'a Scene,
        extraction_radius: f64,
        opts: &SolverOptions,
    ) -> Result<Self, EmissionError> {
        let w0 = emitter.omega0;
        let eps_b = scene.background().eval_real(w0)?;
        let n0 = scene.background().index(w0)?.re;
        let green = if scene.is_empty() {
            None
        } else {
            Some(SceneGreen::new(scene, w0, opts)?)
        };
        Ok(Self {
            emitter: *emitter,
            result: *result,
            n0,
            extraction_radius,
            scene,
            green,
            eps_b,
        })
    }

    /// Background index used for the retardation `n0 R / c`.
    pub fn index(&self) -> f64 {
        self.n0
    }

    /// Form factor `F(x, x0, w0)`.
    pub fn form_factor(&self, x: &Vec3) -> Result<ComplexDyadic, EmissionError> {
        let x0 = self.emitter.position;
        let w0 = self.emitter.omega0;
        let d = sub3(x, &x0);
        let r = norm3(&d);
        let r_s = r.max(self.extraction_radius / w0);
        let xs = [x0[0] + d[0] * r_s / r, x0[1] + d[1] * r_s / r, x0[2] + d[2] * r_s / r];
        let g = match &self.green {
            None => crate::green::green_homogeneous(&xs, &x0, w0.into(), self.eps_b)?,
            Some(sg) => sg.green(&xs, &x0)?.total.ok_or(GreenError::CoincidentPoints)?,
        };
        let phase = Complex64::new(0.0, -w0 * self.n0 * r_s).exp();
        Ok(g.scale(phase * (r_s / r)))
    }

    pub fn field(&self, x: &Vec3, t: f64) -> Result<CVec3, EmissionError> {
        let x0 = self.emitter.position;
        let w0 = self.emitter.omega0;
        let r = norm3(&sub3(x, &x0));
        let kr = w0 * r;
        if !(kr > 10.0) {
            return Err(EmissionError::NearField { kr });
        }
        let retarded = t - self.n0 * r;
        if retarded < 0.0 {
            return Ok([CZERO; 3]);
        }
        if let Some(v) = self.scene.locate(x) {
            return Err(GreenError::ObservationInsideVoxel { position: *x, voxel: v }.into());
        }
        let f = self.form_factor(x)?;
        let amp = (Complex64::new(0.0, -1.0) * self.result.omega_tilde * retarded).exp() * (w0 * w0);
        let v = f.mul_vec(&self.emitter.dipole);
        Ok([v[0] * amp, v[1] * amp, v[2] * amp])
    }
}

/// One-shot far-field evaluation; see [`FarField`].
pub fn photon_field_farfield(
    emitter: &Emitter,
    result: &EmissionResult,
    scene: &Scene,
    x: &Vec3,
    t: f64,
    opts: &SolverOptions,
) -> Result<CVec3, EmissionError> {
    FarField::new(emitter, result, scene, FarField::DEFAULT_EXTRACTION, opts)?.field(x, t)
}

/// Power radiated by the decaying emitter, `hbar w0 Gamma e^{-Gamma t}`.
pub fn radiated_power(emitter: &Emitter, result: &EmissionResult, t: f64) -> f64 {
    emitter.omega0 * result.gamma * (-result.gamma * t).exp()
}

/// Energy emitted up to `t`, `hbar w0 (1 - e^{-Gamma t})`.
pub fn emitted_energy(emitter: &Emitter, result: &EmissionResult, t: f64) -> f64 {
    -emitter.omega0 * (-result.gamma * t).exp_m1()
}

/// Broadband detector signal `|E(x, t)|^2`.
pub fn detection_intensity(field: &CVec3) -> f64 {
    field.iter().map(|z| z.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z_emitter(mu: f64, w0: f64) -> Emitter {
        Emitter::new([0.0; 3], [CZERO, CZERO, Complex64::new(mu, 0.0)], w0, 0.0).unwrap()
    }

    #[test]
    fn vacuum_ldos_and_rate() {
        let s = Scene::vacuum();
        let e = z_emitter(1.0, 1.0);
        let rho = ldos(&s, &[0.0; 3], &e.orientation(), 1.0, &SolverOptions::default()).unwrap();
        assert!((rho.total - 1.0 / (PI * PI)).abs() < 1e-15);
        assert_eq!(rho.reference, 0.0);
        let g = decay_rate(&e, &s, &SolverOptions::default()).unwrap();
        assert!((g - 1.0 / (3.0 * PI)).abs() < 1e-15);
        let gd = decay_rate_direct(&e, &s, &SolverOptions::default()).unwrap();
        assert!((g - gd).abs() <= 1e-12 * g);
    }

    #[test]
    fn rate_scales_with_index_and_dipole() {
        let e = z_emitter(1.0, 1.0);
        let g1 = decay_rate(&e, &Scene::vacuum(), &SolverOptions::default()).unwrap();
        let s = Scene::homogeneous(crate::materials::PermittivityModel::constant_index(1.5).unwrap());
        let g15 = decay_rate(&e, &s, &SolverOptions::default()).unwrap();
        assert!((g15 / g1 - 1.5).abs() < 1e-14);
        let g2 = decay_rate(&z_emitter(2.0, 1.0), &Scene::vacuum(), &SolverOptions::default()).unwrap();
        assert!((g2 / g1 - 4.0).abs() < 1e-14);
    }

    #[test]
    fn invalid_emitters() {
        assert!(Emitter::new([0.0; 3], [CZERO; 3], 1.0, 0.0).is_err());
        assert!(Emitter::new([0.0; 3], [CZERO, CZERO, 1.0.into()], 0.0, 0.0).is_err());
        assert!(Emitter::new([0.0; 3], [CZERO, CZERO, 1.0.into()], 1.0, -1.0).is_err());
    }

    #[test]
    fn empty_scene_lamb_shift_is_zero() {
        let e = z_emitter(1.0, 1.0);
        let l = lamb_shift(&e, &Scene::vacuum(), &LambQuadrature::for_emitter(&e), &SolverOptions::default()).unwrap();
        assert_eq!(l, LambShift::ZERO);
        assert_eq!(l.delta(true), 0.0);
    }

    #[test]
    fn lamb_quadrature_window_checked() {
        let e = z_emitter(1.0, 1.0);
        let q = LambQuadrature {
            omega_max: 5.0,
            n_points: 100,
        };
        assert!(matches!(
            lamb_shift(&e, &Scene::vacuum(), &q, &SolverOptions::default()),
            Err(EmissionError::InvalidQuadrature(_))
        ));
    }

    #[test]
    fn pole_amplitude() {
        let r = EmissionResult::new(1.0, 0.2, 0.05, Ldos { total: 0.0, bulk: 0.0, reference: 0.0 }, LambShift::ZERO);
        assert_eq!(ww_amplitude_pole(&r, 0.0), Complex64::new(1.0, 0.0));
        assert!((ww_amplitude_pole(&r, 1.0 / 0.2).norm() - (-0.5f64).exp()).abs() < 1e-15);
        let a = ww_amplitude_pole(&r, 2.0);
        let b = ww_amplitude_pole(&r, 2.3);
        let dphi = (b / a).arg();
        assert!((dphi + 1.05 * 0.3).abs() < 1e-12);
    }

    #[test]
    fn energy_bookkeeping() {
        let e = z_emitter(1.0, 2.0);
        let r = EmissionResult::new(2.0, 0.1, 0.0, Ldos { total: 0.0, bulk: 0.0, reference: 0.0 }, LambShift::ZERO);
        assert_eq!(radiated_power(&e, &r, 0.0), 2.0 * 0.1);
        assert!((emitted_energy(&e, &r, 1e6) - 2.0).abs() < 1e-15);
        assert_eq!(emitted_energy(&e, &r, 0.0), 0.0);
    }

    #[test]
    fn bromwich_grid_symmetric() {
        let g = bromwich_grid(1.0, 0.05, 5.0, 10, 4);
        assert_eq!(g.len(), 2 * (5 + 4) + 1);
        assert_eq!(g[9], 1.0);
        for k in 0..9 {
            assert!(((g[k] - 1.0) + (g[18 - k] - 1.0)).abs() < 1e-15);
        }
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn far_field_causal_cutoff() {
        let e = z_emitter(1.0, 1.0);
        let s = Scene::vacuum();
        let r = EmissionResult::new(1.0, 0.1, 0.0, Ldos { total: 0.0, bulk: 0.0, reference: 0.0 }, LambShift::ZERO);
        let f = photon_field_farfield(&e, &r, &s, &[100.0, 0.0, 0.0], 99.999, &SolverOptions::default()).unwrap();
        assert_eq!(f, [CZERO; 3]);
        let f = photon_field_farfield(&e, &r, &s, &[100.0, 0.0, 0.0], 100.0, &SolverOptions::default()).unwrap();
        assert!(detection_intensity(&f) > 0.0);
        assert!(matches!(
            photon_field_farfield(&e, &r, &s, &[5.0, 0.0, 0.0], 100.0, &SolverOptions::default()),
            Err(EmissionError::NearField { .. })
        ));
    }
}
