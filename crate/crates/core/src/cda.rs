//! Coupled-dipole discretisation of the Lippmann–Schwinger equation.
//!
//! Every voxel becomes a point polarizability in the background medium.
//! For a source field `E_inc` the local fields solve
//!
//! ```text
//! E_i - sum_{j != i} k0^2 G_b(x_i, x_j) a_j E_j = E_inc(x_i)
//! ```
//!
//! and the scattered field anywhere outside the scatterer is
//! `sum_j k0^2 G_b(x, x_j) a_j E_j`.
//!
//! Self-term: the Clausius–Mossotti polarizability of a cube of volume `V`
//! embedded in the background, `a = 3 V eps_b (eps - eps_b) / (eps + 2 eps_b)`,
//! dressed by radiative reaction `a / (1 - i k0^2 k_b a / (6 pi))`. Only the
//! imaginary part of the coincident background Green tensor enters; its real
//! principal-value part is absorbed in Clausius–Mossotti.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dyadic::{norm3, sub3, CVec3, ComplexDyadic, Vec3, CZERO};
use crate::green::{green_from_wavenumber, wavenumber, GreenError};
use crate::linalg::{bicgstab, DenseLu, LinearOperator, SolverOptions};
use crate::scene::Scene;

/// Clausius–Mossotti polarizability of a voxel of volume `volume`.
pub fn clausius_mossotti(eps: Complex64, eps_b: Complex64, volume: f64) -> Complex64 {
    3.0 * volume * eps_b * (eps - eps_b) / (eps + 2.0 * eps_b)
}

/// Radiative-reaction dressing of a bare polarizability.
pub fn radiative_correction(alpha: Complex64, k0: f64, k_b: Complex64) -> Complex64 {
    let i = Complex64::i();
    alpha / (1.0 - i * k0 * k0 * k_b * alpha / (6.0 * PI))
}

/// Assembled coupled-dipole system at one real frequency.
///
/// The interaction matrix is kept implicit; blocks are evaluated on demand.
#[derive(Debug, Clone)]
pub struct CdaSystem {
    omega: f64,
    eps_b: Complex64,
    k_b: Complex64,
    positions: Vec<Vec3>,
    alpha_bare: Vec<Complex64>,
    alpha: Vec<Complex64>,
}

impl CdaSystem {
    pub fn assemble(scene: &Scene, omega: f64) -> Result<Self, GreenError> {
        if omega == 0.0 || !omega.is_finite() {
            return Err(GreenError::ZeroFrequency);
        }
        let eps_b = scene.background().eval_real(omega)?;
        let k_b = wavenumber(omega.into(), eps_b);
        let volume = scene.voxel_volume();
        let mut positions = Vec::with_capacity(scene.len());
        let mut alpha_bare = Vec::with_capacity(scene.len());
        let mut alpha = Vec::with_capacity(scene.len());
        for n in 0..scene.len() {
            let eps = scene.voxel_material(n).eval_real(omega)?;
            let a = clausius_mossotti(eps, eps_b, volume);
            positions.push(scene.voxel_center(n));
            alpha_bare.push(a);
            alpha.push(radiative_correction(a, omega, k_b));
        }
        Ok(Self {
            omega,
            eps_b,
            k_b,
            positions,
            alpha_bare,
            alpha,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn background_eps(&self) -> Complex64 {
        self.eps_b
    }

    pub fn background_wavenumber(&self) -> Complex64 {
        self.k_b
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    /// Dressed polarizabilities.
    pub fn polarizabilities(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn bare_polarizabilities(&self) -> &[Complex64] {
        &self.alpha_bare
    }

    pub fn voxel_count(&self) -> usize {
        self.positions.len()
    }

    /// Background Green tensor between two distinct points.
    pub fn background_green(&self, x: &Vec3, xp: &Vec3) -> ComplexDyadic {
        let d = sub3(x, xp);
        green_from_wavenumber(&d, norm3(&d), self.k_b)
    }

    /// `K_ij = k0^2 G_b(x_i, x_j) a_j` for `i != j`, zero on the diagonal.
    pub fn coupling_block(&self, i: usize, j: usize) -> ComplexDyadic {
        if i == j {
            return ComplexDyadic::zero();
        }
        let g = self.background_green(&self.positions[i], &self.positions[j]);
        g.scale(self.alpha[j] * self.omega * self.omega)
    }

    /// Block `(i, j)` of `A = I - K`.
    pub fn system_block(&self, i: usize, j: usize) -> ComplexDyadic {
        if i == j {
            ComplexDyadic::identity()
        } else {
            self.coupling_block(i, j).scale(Complex64::new(-1.0, 0.0))
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.voxel_count();
        let blocks: Vec<ComplexDyadic> = (0..n * n)
            .into_par_iter()
            .map(|ij| self.system_block(ij / n, ij % n))
            .collect();
        let mut m = DMatrix::from_element(3 * n, 3 * n, CZERO);
        for i in 0..n {
            for j in 0..n {
                let b = &blocks[i * n + j];
                for p in 0..3 {
                    for q in 0..3 {
                        m[(3 * i + p, 3 * j + q)] = b.0[p][q];
                    }
                }
            }
        }
        m
    }

    /// Scattered field at `x` produced by local voxel fields `local`.
    pub fn scattered_field(&self, x: &Vec3, local: &[CVec3]) -> CVec3 {
        let k0sq = self.omega * self.omega;
        let mut out = [CZERO; 3];
        for (j, e) in local.iter().enumerate() {
            let p = [e[0] * self.alpha[j], e[1] * self.alpha[j], e[2] * self.alpha[j]];
            let v = self.background_green(x, &self.positions[j]).mul_vec(&p);
            for a in 0..3 {
                out[a] += v[a] * k0sq;
            }
        }
        out
    }
}

impl LinearOperator for CdaSystem {
    fn dim(&self) -> usize {
        3 * self.voxel_count()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.voxel_count();
        y.par_chunks_mut(3).enumerate().for_each(|(i, yi)| {
            let mut acc = [x[3 * i], x[3 * i + 1], x[3 * i + 2]];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let xj = [x[3 * j], x[3 * j + 1], x[3 * j + 2]];
                let v = self.coupling_block(i, j).mul_vec(&xj);
                for a in 0..3 {
                    acc[a] -= v[a];
                }
            }
            yi.copy_from_slice(&acc);
        });
    }
}

/// A [`CdaSystem`] together with its solution strategy. Dense systems are
/// factorised once and reused for every right-hand side.
pub struct CdaSolver {
    system: CdaSystem,
    dense: Option<DenseLu>,
    opts: SolverOptions,
}

impl CdaSolver {
    pub fn new(system: CdaSystem, opts: &SolverOptions) -> Result<Self, GreenError> {
        let dense = if system.dim() <= opts.dense_max_unknowns {
            Some(DenseLu::new(system.to_dense())?)
        } else {
            None
        };
        Ok(Self {
            system,
            dense,
            opts: *opts,
        })
    }

    pub fn for_scene(scene: &Scene, omega: f64, opts: &SolverOptions) -> Result<Self, GreenError> {
        Self::new(CdaSystem::assemble(scene, omega)?, opts)
    }

    pub fn system(&self) -> &CdaSystem {
        &self.system
    }

    /// Local voxel fields for the incident field sampled at the voxel centres.
    pub fn solve_local(&self, incident: &[CVec3]) -> Result<Vec<CVec3>, GreenError> {
        let rhs: Vec<Complex64> = incident.iter().flatten().copied().collect();
        let x = match &self.dense {
            Some(lu) => lu.solve(&rhs)?,
            None => bicgstab(&self.system, &rhs, &self.opts)?.0,
        };
        Ok(x.chunks(3).map(|c| [c[0], c[1], c[2]]).collect())
    }

    /// Scattered part `G_ref(x, x0)` of the Green tensor for a point source at `x0`.
    pub fn green_ref(&self, x: &Vec3, x0: &Vec3) -> Result<ComplexDyadic, GreenError> {
        let sys = &self.system;
        if sys.voxel_count() == 0 {
            return Ok(ComplexDyadic::zero());
        }
        let inc: Vec<ComplexDyadic> = sys.positions.iter().map(|p| sys.background_green(p, x0)).collect();
        let mut cols = [[CZERO; 3]; 3];
        for (c, col) in cols.iter_mut().enumerate() {
            let incident: Vec<CVec3> = inc.iter().map(|g| g.column(c)).collect();
            let local = self.solve_local(&incident)?;
            *col = sys.scattered_field(x, &local);
        }
        let g = ComplexDyadic::from_columns(cols);
        if !g.is_finite() {
            return Err(GreenError::NonFinite);
        }
        Ok(g)
    }
}

/// Total Green tensor and its scattered part. `total` is `None` when the
/// observation point coincides with the source, where only `reference`
/// (= `G - G_b`) is finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenPair {
    pub total: Option<ComplexDyadic>,
    pub reference: ComplexDyadic,
}

/// Green tensors of a fixed scene at a fixed frequency, sharing one
/// factorisation across source/observation points.
pub struct SceneGreen<'a> {
    scene: &'a Scene,
    solver: CdaSolver,
}

impl<'a> SceneGreen<'a> {
    pub fn new(scene: &'a Scene, omega: f64, opts: &SolverOptions) -> Result<Self, GreenError> {
        Ok(Self {
            scene,
            solver: CdaSolver::for_scene(scene, omega, opts)?,
        })
    }

    pub fn solver(&self) -> &CdaSolver {
        &self.solver
    }

    pub fn green(&self, x: &Vec3, x0: &Vec3) -> Result<GreenPair, GreenError> {
        if let Some(v) = self.scene.locate(x0) {
            return Err(GreenError::EmitterInsideVoxel { position: *x0, voxel: v });
        }
        if let Some(v) = self.scene.locate(x) {
            return Err(GreenError::ObservationInsideVoxel { position: *x, voxel: v });
        }
        let reference = self.solver.green_ref(x, x0)?;
        let d = sub3(x, x0);
        let r = norm3(&d);
        let scale = norm3(x).max(norm3(x0)).max(1.0);
        let total = if r <= 1e-14 * scale {
            None
        } else {
            let gb = self.solver.system.background_green(x, x0);
            Some(gb + reference)
        };
        Ok(GreenPair { total, reference })
    }

    /// `G_ref(x0, x0)`.
    pub fn green_ref_coincident(&self, x0: &Vec3) -> Result<ComplexDyadic, GreenError> {
        Ok(self.green(x0, x0)?.reference)
    }
}

/// Total and scattered Green tensors `G(x, x0, w)` of the scene.
pub fn solve_green(
    scene: &Scene,
    x: &Vec3,
    x0: &Vec3,
    omega: f64,
    opts: &SolverOptions,
) -> Result<GreenPair, GreenError> {
    if let Some(v) = scene.locate(x0) {
        return Err(GreenError::EmitterInsideVoxel { position: *x0, voxel: v });
    }
    SceneGreen::new(scene, omega, opts)?.green(x, x0)
}

/// Self-consistent response of the scene to a plane wave; evaluates the
/// total field `E_inc + E_scat` anywhere outside the scatterer.
#[derive(Debug, Clone)]
pub struct PlaneWaveField {
    system: CdaSystem,
    wave_vector: CVec3,
    polarization: Vec3,
    local: Vec<CVec3>,
    voxel_lookup: Scene,
}

impl PlaneWaveField {
    pub fn omega(&self) -> f64 {
        self.system.omega
    }

    pub fn wave_vector(&self) -> CVec3 {
        self.wave_vector
    }

    pub fn local_fields(&self) -> &[CVec3] {
        &self.local
    }

    pub fn system(&self) -> &CdaSystem {
        &self.system
    }

    pub fn incident(&self, x: &Vec3) -> CVec3 {
        let i = Complex64::i();
        let phase = (i * (self.wave_vector[0] * x[0] + self.wave_vector[1] * x[1] + self.wave_vector[2] * x[2])).exp();
        [
            phase * self.polarization[0],
            phase * self.polarization[1],
            phase * self.polarization[2],
        ]
    }

    pub fn scattered(&self, x: &Vec3) -> Result<CVec3, GreenError> {
        if let Some(v) = self.voxel_lookup.locate(x) {
            return Err(GreenError::ObservationInsideVoxel { position: *x, voxel: v });
        }
        Ok(self.system.scattered_field(x, &self.local))
    }

    pub fn field(&self, x: &Vec3) -> Result<CVec3, GreenError> {
        let s = self.scattered(x)?;
        let e = self.incident(x);
        Ok([e[0] + s[0], e[1] + s[1], e[2] + s[2]])
    }
}

/// Solves the scattering of the plane wave `pol e^{i k.x}` by the scene.
///
/// The frequency follows from `|k| = w Re sqrt(eps_b(w))`; for a lossy
/// background the wave vector becomes `k̂ w sqrt(eps_b)` so that the
/// incident wave solves the background equations.
pub fn solve_plane_wave(
    scene: &Scene,
    k_vec: &Vec3,
    pol: &Vec3,
    opts: &SolverOptions,
) -> Result<PlaneWaveField, GreenError> {
    let k_mag = norm3(k_vec);
    if !(k_mag.is_finite() && k_mag > 0.0) {
        return Err(GreenError::InvalidWaveVector);
    }
    let k_hat = [k_vec[0] / k_mag, k_vec[1] / k_mag, k_vec[2] / k_mag];
    if (norm3(pol) - 1.0).abs() > 1e-9 || crate::dyadic::dot3(pol, &k_hat).abs() >= 1e-12 {
        return Err(GreenError::InvalidPolarization);
    }
    let omega = frequency_for_wavenumber(scene, k_mag)?;
    let system = CdaSystem::assemble(scene, omega)?;
    let k_b = system.k_b;
    let wave_vector = [k_b * k_hat[0], k_b * k_hat[1], k_b * k_hat[2]];
    let solver = CdaSolver::new(system, opts)?;
    let mut field = PlaneWaveField {
        system: solver.system().clone(),
        wave_vector,
        polarization: *pol,
        local: Vec::new(),
        voxel_lookup: scene.clone(),
    };
    let incident: Vec<CVec3> = field.system.positions.iter().map(|p| field.incident(p)).collect();
    field.local = solver.solve_local(&incident)?;
    Ok(field)
}

fn frequency_for_wavenumber(scene: &Scene, k_mag: f64) -> Result<f64, GreenError> {
    let bg = scene.background();
    let mut omega = k_mag / bg.eps_infinity().sqrt();
    if !bg.is_dispersive() {
        return Ok(omega);
    }
    for _ in 0..500 {
        let n = bg.index(omega)?.re;
        if n <= 0.0 {
            return Err(GreenError::DispersionNotConverged);
        }
        let next = k_mag / n;
        if (next - omega).abs() <= 1e-15 * omega {
            return Ok(next);
        }
        omega = next;
    }
    Err(GreenError::DispersionNotConverged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::green_homogeneous;
    use crate::materials::{LorentzTerm, PermittivityModel};
    use crate::scene::Voxel;

    fn lorentz() -> PermittivityModel {
        PermittivityModel::new(1.0, vec![LorentzTerm::new(1.0, 1.0, 0.1).unwrap()]).unwrap()
    }

    fn scene_with(indices: &[[i64; 3]]) -> Scene {
        Scene::new(
            PermittivityModel::vacuum(),
            0.1,
            [0.0, 0.0, 0.5],
            vec![lorentz()],
            indices.iter().map(|&index| Voxel { index, material: 0 }).collect(),
        )
        .unwrap()
    }

    #[test]
    fn empty_system() {
        let sys = CdaSystem::assemble(&Scene::vacuum(), 1.0).unwrap();
        assert_eq!(sys.dim(), 0);
        let pair = solve_green(&Scene::vacuum(), &[1.0, 0.0, 0.0], &[0.0; 3], 1.0, &SolverOptions::default()).unwrap();
        assert_eq!(pair.reference, ComplexDyadic::zero());
        let gb = green_homogeneous(&[1.0, 0.0, 0.0], &[0.0; 3], 1.0.into(), 1.0.into()).unwrap();
        assert_eq!(pair.total.unwrap(), gb);
    }

    #[test]
    fn one_voxel_is_identity_system() {
        let sys = CdaSystem::assemble(&scene_with(&[[0, 0, 0]]), 1.0).unwrap();
        let m = sys.to_dense();
        assert_eq!(m, DMatrix::identity(3, 3));
    }

    #[test]
    fn two_voxel_coupling_symmetric() {
        let sys = CdaSystem::assemble(&scene_with(&[[0, 0, 0], [1, 1, 0]]), 1.0).unwrap();
        let a = sys.coupling_block(0, 1);
        let b = sys.coupling_block(1, 0);
        assert!((a - b.transpose()).max_abs() < 1e-14 * a.max_abs());
        assert_eq!(sys.coupling_block(0, 0), ComplexDyadic::zero());
    }

    #[test]
    fn emitter_inside_voxel_rejected() {
        let s = scene_with(&[[0, 0, 0]]);
        let err = solve_green(&s, &[1.0, 0.0, 0.0], &[0.01, 0.0, 0.5], 1.0, &SolverOptions::default()).unwrap_err();
        assert!(matches!(err, GreenError::EmitterInsideVoxel { voxel: 0, .. }));
    }

    #[test]
    fn iterative_path_matches_dense() {
        let idx: Vec<[i64; 3]> = (0..3).flat_map(|i| (0..3).map(move |j| [i, j, 0])).collect();
        let s = scene_with(&idx);
        let dense = solve_green(&s, &[0.3, 0.2, -0.4], &[0.0, 0.1, 0.0], 1.1, &SolverOptions::default()).unwrap();
        let opts = SolverOptions {
            dense_max_unknowns: 0,
            ..Default::default()
        };
        let iter = solve_green(&s, &[0.3, 0.2, -0.4], &[0.0, 0.1, 0.0], 1.1, &opts).unwrap();
        let d = (dense.reference - iter.reference).max_abs() / dense.reference.max_abs();
        assert!(d < 1e-8, "relative difference {d}");
    }

    #[test]
    fn zero_contrast_gives_zero_reference() {
        let s = Scene::new(
            PermittivityModel::vacuum(),
            0.1,
            [0.0; 3],
            vec![PermittivityModel::vacuum()],
            vec![Voxel { index: [0, 0, 3], material: 0 }, Voxel { index: [1, 0, 3], material: 0 }],
        )
        .unwrap();
        let p = solve_green(&s, &[0.0; 3], &[0.0; 3], 1.0, &SolverOptions::default()).unwrap();
        assert_eq!(p.reference.max_abs(), 0.0);
        assert!(p.total.is_none());
    }

    #[test]
    fn plane_wave_empty_scene() {
        let f = solve_plane_wave(&Scene::vacuum(), &[0.0, 0.0, 2.0], &[1.0, 0.0, 0.0], &SolverOptions::default()).unwrap();
        assert_eq!(f.omega(), 2.0);
        let x = [0.3, -0.2, 0.7];
        let e = f.field(&x).unwrap();
        let expect = Complex64::new(0.0, 2.0 * 0.7).exp();
        assert!((e[0] - expect).norm() < 1e-15);
        assert_eq!(e[1], CZERO);
    }

    #[test]
    fn plane_wave_polarization_checked() {
        let err = solve_plane_wave(&Scene::vacuum(), &[0.0, 0.0, 1.0], &[0.0, 0.6, 0.8], &SolverOptions::default());
        assert_eq!(err.unwrap_err(), GreenError::InvalidPolarization);
    }

    #[test]
    fn dispersive_background_frequency() {
        let bg = PermittivityModel::new(2.0, vec![LorentzTerm::new(0.5, 3.0, 0.01).unwrap()]).unwrap();
        let s = Scene::homogeneous(bg.clone());
        let f = solve_plane_wave(&s, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &SolverOptions::default()).unwrap();
        let n = bg.index(f.omega()).unwrap().re;
        assert!((f.omega() * n - 1.0).abs() < 1e-12);
    }
}
