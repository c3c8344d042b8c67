use std::f64::consts::PI;

use pldos_core::cda::{solve_plane_wave, SceneGreen};
use pldos_core::dyadic::cdot;
use pldos_core::quadrature::gauss_legendre;
use pldos_core::*;

fn cluster(eps_material: PermittivityModel, n: i64) -> Scene {
    let mut voxels = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                voxels.push(Voxel { index: [i, j, k], material: 0 });
            }
        }
    }
    Scene::new(PermittivityModel::vacuum(), 0.1, [-0.1, -0.1, -0.1], vec![eps_material], voxels).unwrap()
}

/// Lossless scatterer: extinction from the forward amplitude equals the
/// scattered power integrated over the far-field sphere.
#[test]
fn optical_theorem_lossless_cluster() {
    let scene = cluster(PermittivityModel::constant_index(2.0).unwrap(), 3);
    let k = 2.0;
    let field = solve_plane_wave(&scene, &[0.0, 0.0, k], &[1.0, 0.0, 0.0], &SolverOptions::default()).unwrap();
    let r = 1e4;
    let amplitude = |dir: [f64; 3]| {
        let x = [r * dir[0], r * dir[1], r * dir[2]];
        let e = field.scattered(&x).unwrap();
        let ph = Complex64::new(0.0, -k * r).exp() * r;
        [e[0] * ph, e[1] * ph, e[2] * ph]
    };
    let fwd = amplitude([0.0, 0.0, 1.0]);
    let pol = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
    let sigma_ext = 4.0 * PI / k * cdot(&pol, &fwd).im;

    let (ct, wt) = gauss_legendre(24);
    let n_phi = 48;
    let mut sigma_sca = 0.0;
    for (c, w) in ct.iter().zip(&wt) {
        let s = (1.0 - c * c).sqrt();
        for p in 0..n_phi {
            let phi = 2.0 * PI * p as f64 / n_phi as f64;
            let f = amplitude([s * phi.cos(), s * phi.sin(), *c]);
            let i2: f64 = f.iter().map(|z| z.norm_sqr()).sum();
            sigma_sca += w * (2.0 * PI / n_phi as f64) * i2;
        }
    }
    assert!(sigma_ext > 0.0);
    assert!((sigma_sca / sigma_ext - 1.0).abs() < 2e-2, "sca {sigma_sca} ext {sigma_ext}");
}

#[test]
fn iterative_and_dense_solvers_agree() {
    let mat = PermittivityModel::new(1.0, vec![LorentzTerm::new(3.63, 0.0, 0.05).unwrap()]).unwrap();
    let scene = cluster(mat, 3);
    let dense = SolverOptions::default();
    let iterative = SolverOptions {
        dense_max_unknowns: 0,
        ..SolverOptions::default()
    };
    let x0 = [0.0, 0.0, 0.35];
    let x = [0.3, -0.2, 0.4];
    for omega in [0.8, 1.1] {
        let a = solve_green(&scene, &x, &x0, omega, &dense).unwrap();
        let b = solve_green(&scene, &x, &x0, omega, &iterative).unwrap();
        let d = (a.reference - b.reference).max_abs() / a.reference.max_abs();
        assert!(d < 1e-8, "omega {omega}: {d}");
    }
}

/// `G(-w) = conj(G(w))` for real frequencies.
#[test]
fn conjugation_symmetry_of_scene_green() {
    let mat = PermittivityModel::new(1.5, vec![LorentzTerm::new(2.0, 1.2, 0.2).unwrap()]).unwrap();
    let bg = PermittivityModel::new(1.2, vec![LorentzTerm::new(0.2, 3.0, 0.3).unwrap()]).unwrap();
    let scene = Scene::new(bg, 0.1, [0.0; 3], vec![mat], vec![Voxel { index: [0, 0, 0], material: 0 }, Voxel { index: [1, 0, 0], material: 0 }]).unwrap();
    let x = [0.4, 0.3, -0.2];
    let x0 = [-0.3, 0.1, 0.2];
    for omega in [0.7, 1.3] {
        let p = SceneGreen::new(&scene, omega, &SolverOptions::default()).unwrap().green(&x, &x0).unwrap();
        let m = SceneGreen::new(&scene, -omega, &SolverOptions::default()).unwrap().green(&x, &x0).unwrap();
        let a = p.total.unwrap();
        let b = m.total.unwrap();
        assert!((b - a.conj()).max_abs() < 1e-13 * a.max_abs());
    }
}

#[test]
fn homogeneous_green_reciprocity_and_conjugation() {
    let eps = Complex64::new(2.0, 0.3);
    let x = [0.1, 0.7, -0.2];
    let y = [-0.5, 0.2, 0.9];
    let a = green_homogeneous(&x, &y, Complex64::new(1.4, 0.0), eps).unwrap();
    let b = green_homogeneous(&y, &x, Complex64::new(1.4, 0.0), eps).unwrap().transpose();
    assert!((a - b).max_abs() < 1e-15 * a.max_abs());
    let c = green_homogeneous(&x, &y, Complex64::new(-1.4, 0.0), eps.conj()).unwrap();
    assert!((c - a.conj()).max_abs() < 1e-14 * a.max_abs());
}
