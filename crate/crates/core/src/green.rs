//! Closed-form dyadic Green functions of a homogeneous medium.
//!
//! `G` solves `curl curl G - (w/c)^2 eps G = I delta(x - x')`, giving
//!
//! ```text
//! G(R) = e^{ikR}/(4 pi R) [ (1 + i/(kR) - 1/(kR)^2) I
//!                          + (3/(kR)^2 - 3i/(kR) - 1) R̂R̂ ],   k = (w/c) sqrt(eps)
//! ```
//!
//! The longitudinal `∇∇/k^2` part therefore carries the `1/eps` of the medium.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::dyadic::{norm3, sub3, ComplexDyadic, Vec3};
use crate::linalg::SolveError;
use crate::materials::{principal_sqrt, MaterialError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GreenError {
    #[error("source and observation points coincide; use the coincident imaginary part or G_ref")]
    CoincidentPoints,
    #[error("frequency must be nonzero")]
    ZeroFrequency,
    #[error("emitter at {position:?} lies inside voxel {voxel}")]
    EmitterInsideVoxel { position: Vec3, voxel: usize },
    #[error("observation point {position:?} lies inside voxel {voxel}")]
    ObservationInsideVoxel { position: Vec3, voxel: usize },
    #[error("polarization must be a unit vector orthogonal to the wave vector")]
    InvalidPolarization,
    #[error("wave vector must be nonzero and finite")]
    InvalidWaveVector,
    #[error("could not find a real frequency matching |k| in the dispersive background")]
    DispersionNotConverged,
    #[error("non-finite Green tensor")]
    NonFinite,
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Background wavenumber `(w/c) sqrt(eps_b)` on the decaying branch.
pub fn wavenumber(omega: Complex64, eps_b: Complex64) -> Complex64 {
    omega * principal_sqrt(eps_b)
}

/// Dyadic Green function of a homogeneous medium of permittivity `eps_b`.
pub fn green_homogeneous(
    x: &Vec3,
    xp: &Vec3,
    omega: Complex64,
    eps_b: Complex64,
) -> Result<ComplexDyadic, GreenError> {
    if omega == Complex64::new(0.0, 0.0) {
        return Err(GreenError::ZeroFrequency);
    }
    let d = sub3(x, xp);
    let r = norm3(&d);
    let scale = norm3(x).max(norm3(xp)).max(1.0);
    if r <= 1e-14 * scale {
        return Err(GreenError::CoincidentPoints);
    }
    let k = wavenumber(omega, eps_b);
    let g = green_from_wavenumber(&d, r, k);
    if !g.is_finite() {
        return Err(GreenError::NonFinite);
    }
    Ok(g)
}

/// Green tensor for separation `d` (with `r = |d| > 0`) and wavenumber `k`.
pub(crate) fn green_from_wavenumber(d: &Vec3, r: f64, k: Complex64) -> ComplexDyadic {
    let i = Complex64::i();
    let kr = k * r;
    let inv = kr.inv();
    let inv2 = inv * inv;
    let scalar = (i * kr).exp() / (4.0 * PI * r);
    let a = scalar * (1.0 + i * inv - inv2);
    let b = scalar * (3.0 * inv2 - 3.0 * i * inv - 1.0);
    let u = [d[0] / r, d[1] / r, d[2] / r];
    let mut m = ComplexDyadic::zero();
    for p in 0..3 {
        for q in 0..3 {
            m.0[p][q] = b * (u[p] * u[q]);
        }
        m.0[p][p] += a;
    }
    m
}

pub fn green_vacuum(x: &Vec3, xp: &Vec3, omega: Complex64) -> Result<ComplexDyadic, GreenError> {
    green_homogeneous(x, xp, omega, Complex64::new(1.0, 0.0))
}

/// `Im G(x0, x0, w)` of a homogeneous medium: `(w / 6 pi c) Re sqrt(eps_b) I`.
///
/// The returned tensor holds the imaginary part as real-valued entries.
pub fn im_green_coincident_homogeneous(omega: f64, eps_b: Complex64) -> ComplexDyadic {
    let n = principal_sqrt(eps_b);
    ComplexDyadic::scaled_identity(Complex64::new(omega / (6.0 * PI) * n.re, 0.0))
}
