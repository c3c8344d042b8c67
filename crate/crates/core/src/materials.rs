//! Causal dispersive permittivity models.
//!
//! A [`PermittivityModel`] is a Drude–Lorentz sum
//!
//! ```text
//! eps(w) = eps_inf + sum_j  s_j / (w0_j^2 - w^2 - i g_j w)
//! ```
//!
//! which is analytic in the upper half of the complex frequency plane,
//! satisfies `eps(-conj(w)) = conj(eps(w))` and has `Im eps(w) > 0` for
//! real `w > 0` whenever a term is present. Frequencies are in units of
//! `c / L0` where `L0` is the scene length unit.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("lorentz term: damping must be > 0 (got {0})")]
    NonPositiveDamping(f64),
    #[error("lorentz term: strength must be >= 0 (got {0})")]
    NegativeStrength(f64),
    #[error("lorentz term: resonance must be >= 0 (got {0})")]
    NegativeResonance(f64),
    #[error("eps_infinity must be >= 1 (got {0})")]
    EpsInfinityBelowOne(f64),
    #[error("non-finite parameter in permittivity model")]
    NonFinite,
    #[error("frequency {0} is too close to a pole of the permittivity")]
    PoleProximity(Complex64),
    #[error("frequency grid too coarse: spacing {spacing} exceeds damping/16 = {limit}")]
    GridTooCoarse { spacing: f64, limit: f64 },
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),
    #[error("tolerance must be > 0")]
    InvalidTolerance,
}

/// One Drude–Lorentz oscillator. `resonance == 0` is the Drude limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzTerm {
    strength: f64,
    resonance: f64,
    damping: f64,
}

impl LorentzTerm {
    pub fn new(strength: f64, resonance: f64, damping: f64) -> Result<Self, MaterialError> {
        if !(strength.is_finite() && resonance.is_finite() && damping.is_finite()) {
            return Err(MaterialError::NonFinite);
        }
        if damping <= 0.0 {
            return Err(MaterialError::NonPositiveDamping(damping));
        }
        if strength < 0.0 {
            return Err(MaterialError::NegativeStrength(strength));
        }
        if resonance < 0.0 {
            return Err(MaterialError::NegativeResonance(resonance));
        }
        Ok(Self {
            strength,
            resonance,
            damping,
        })
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn resonance(&self) -> f64 {
        self.resonance
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    fn denominator(&self, omega: Complex64) -> Complex64 {
        let i = Complex64::i();
        self.resonance * self.resonance - omega * omega - i * self.damping * omega
    }

    /// Roots of `w0^2 - w^2 - i g w`, i.e. the poles of this term.
    ///
    /// Both lie in the closed lower half-plane; for `resonance > 0` strictly
    /// below the real axis. The Drude limit has one root at the origin.
    pub fn poles(&self) -> [Complex64; 2] {
        let disc = Complex64::new(4.0 * self.resonance * self.resonance - self.damping * self.damping, 0.0).sqrt();
        let half_damp = Complex64::new(0.0, -self.damping / 2.0);
        [half_damp + disc / 2.0, half_damp - disc / 2.0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermittivityModel {
    eps_infinity: f64,
    terms: Vec<LorentzTerm>,
}

impl PermittivityModel {
    pub fn new(eps_infinity: f64, terms: Vec<LorentzTerm>) -> Result<Self, MaterialError> {
        if !eps_infinity.is_finite() {
            return Err(MaterialError::NonFinite);
        }
        if eps_infinity < 1.0 {
            return Err(MaterialError::EpsInfinityBelowOne(eps_infinity));
        }
        Ok(Self { eps_infinity, terms })
    }

    pub fn vacuum() -> Self {
        Self {
            eps_infinity: 1.0,
            terms: Vec::new(),
        }
    }

    /// Non-dispersive lossless medium of refractive index `n >= 1`.
    pub fn constant_index(n: f64) -> Result<Self, MaterialError> {
        Self::new(n * n, Vec::new())
    }

    pub fn eps_infinity(&self) -> f64 {
        self.eps_infinity
    }

    pub fn terms(&self) -> &[LorentzTerm] {
        &self.terms
    }

    pub fn is_dispersive(&self) -> bool {
        !self.terms.is_empty()
    }

    /// Evaluates the permittivity at a complex frequency.
    pub fn eval(&self, omega: Complex64) -> Result<Complex64, MaterialError> {
        let mut eps = Complex64::new(self.eps_infinity, 0.0);
        for term in &self.terms {
            let den = term.denominator(omega);
            let scale = term.resonance * term.resonance + omega.norm_sqr() + term.damping * omega.norm();
            if den.norm() <= 1e-300_f64.max(f64::EPSILON * f64::EPSILON * scale) {
                return Err(MaterialError::PoleProximity(omega));
            }
            eps += term.strength / den;
        }
        Ok(eps)
    }

    /// Evaluates the permittivity on the real frequency axis.
    pub fn eval_real(&self, omega: f64) -> Result<Complex64, MaterialError> {
        self.eval(Complex64::new(omega, 0.0))
    }

    /// Refractive index `sqrt(eps)` on the branch with `Re >= 0`
    /// (and `Im >= 0` when the real part vanishes).
    pub fn index(&self, omega: f64) -> Result<Complex64, MaterialError> {
        Ok(principal_sqrt(self.eval_real(omega)?))
    }
}

/// Square root with `Re >= 0`; on the cut (`Re == 0`) the root with
/// `Im >= 0` is returned so that waves decay away from the source.
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    let r = z.sqrt();
    if r.re < 0.0 || (r.re == 0.0 && r.im < 0.0) {
        -r
    } else {
        r
    }
}

/// Uniform frequency grid on `[0, omega_max]` with `n_points` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub omega_max: f64,
    pub n_points: usize,
}

impl FrequencyGrid {
    pub fn new(omega_max: f64, n_points: usize) -> Result<Self, MaterialError> {
        if !(omega_max.is_finite() && omega_max > 0.0) {
            return Err(MaterialError::InvalidGrid(format!("omega_max must be > 0 (got {omega_max})")));
        }
        if n_points < 3 {
            return Err(MaterialError::InvalidGrid("need at least 3 points".into()));
        }
        Ok(Self { omega_max, n_points })
    }

    pub fn spacing(&self) -> f64 {
        self.omega_max / (self.n_points - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KramersKronigReport {
    pub max_error: f64,
    pub pass: bool,
}

/// Reconstructs `Re eps - eps_inf` from `Im eps` via a principal-value
/// Hilbert transform on the grid and compares with the analytic real part.
///
/// The transform uses the odd extension of `Im eps` and the symmetric-pair
/// form `PV int f(u)/(u-w) du = int_0^inf [f(w+v) - f(w-v)] / v dv`,
/// integrated with the trapezoid rule. The error is normalised by the
/// largest `|eps - eps_inf|` on the grid, with any Drude conductivity pole
/// `i sigma / w` removed first.
pub fn check_kramers_kronig(
    model: &PermittivityModel,
    grid: &FrequencyGrid,
    tol: f64,
) -> Result<KramersKronigReport, MaterialError> {
    if !(tol > 0.0) {
        return Err(MaterialError::InvalidTolerance);
    }
    let h = grid.spacing();
    for term in &model.terms {
        let limit = term.damping / 16.0;
        if h > limit {
            return Err(MaterialError::GridTooCoarse { spacing: h, limit });
        }
    }
    let n = grid.n_points - 1;
    // Drude terms have a pole at w = 0. Its residue, the DC conductivity
    // `sum strength / damping` entering as `i sigma / w`, has no real-part
    // partner and is removed from Im before the transform; the remainder is
    // analytic in the closed upper half-plane. The w = 0 sample is skipped.
    let conductivity: f64 = model
        .terms
        .iter()
        .filter(|t| t.resonance == 0.0)
        .map(|t| t.strength / t.damping)
        .sum();
    let mut imag = Vec::with_capacity(n + 1);
    let mut real = Vec::with_capacity(n + 1);
    let mut scale: f64 = 0.0;
    for k in 0..=n {
        let w = k as f64 * h;
        match model.eval_real(w) {
            Ok(eps) => {
                let im = if k == 0 { 0.0 } else { eps.im - conductivity / w };
                let re = eps.re - model.eps_infinity;
                imag.push(im);
                real.push(Some(re));
                scale = scale.max(re.hypot(im));
            }
            Err(MaterialError::PoleProximity(_)) if k == 0 => {
                imag.push(0.0);
                real.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    if scale == 0.0 {
        return Ok(KramersKronigReport {
            max_error: 0.0,
            pass: true,
        });
    }
    let f = |idx: i64| -> f64 {
        let a = idx.unsigned_abs() as usize;
        if a > n {
            0.0
        } else if idx < 0 {
            -imag[a]
        } else {
            imag[a]
        }
    };
    let hilbert = odd_extension_hilbert(&imag);
    let mut max_error: f64 = 0.0;
    for i in 0..=n {
        let Some(re_exact) = real[i] else { continue };
        let ii = i as i64;
        // v = 0 endpoint: limit of [f(w+v) - f(w-v)]/v is 2 f'(w).
        let d0 = if i == 0 {
            (f(1) - f(-1)) / h
        } else if i == n {
            2.0 * (f(ii) - f(ii - 1)) / h
        } else {
            (f(ii + 1) - f(ii - 1)) / h
        };
        let re_kk = (0.5 * d0 * h + hilbert[i]) / std::f64::consts::PI;
        max_error = max_error.max((re_kk - re_exact).abs() / scale);
    }
    Ok(KramersKronigReport {
        max_error,
        pass: max_error < tol,
    })
}

/// `sum_{u != i} w_u f(u) / (u - i)` over the odd extension `u in [-n, n]`
/// of `imag`, trapezoid weights (`1/2` at `u = +-n`), for `i in 0..=n`.
/// Evaluated as one FFT convolution with the `1/m` kernel.
fn odd_extension_hilbert(imag: &[f64]) -> Vec<f64> {
    use rustfft::FftPlanner;
    let n = imag.len() - 1;
    if n == 0 {
        return vec![0.0];
    }
    let size = (6 * n + 2).next_power_of_two();
    let mut a = vec![Complex64::new(0.0, 0.0); size];
    for u in 0..=n {
        let w = if u == n { 0.5 } else { 1.0 };
        a[n + u] = Complex64::new(w * imag[u], 0.0);
        a[n - u] = Complex64::new(-w * imag[u], 0.0);
    }
    let mut k = vec![Complex64::new(0.0, 0.0); size];
    for m in 1..=2 * n {
        let v = 1.0 / m as f64;
        k[2 * n + m] = Complex64::new(v, 0.0);
        k[2 * n - m] = Complex64::new(-v, 0.0);
    }
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(size).process(&mut a);
    planner.plan_fft_forward(size).process(&mut k);
    for (x, y) in a.iter_mut().zip(&k) {
        *x *= y;
    }
    planner.plan_fft_inverse(size).process(&mut a);
    let norm = 1.0 / size as f64;
    (0..=n).map(|i| -a[i + 3 * n].re * norm).collect()
}
