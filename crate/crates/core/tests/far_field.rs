use std::f64::consts::PI;

use pldos_core::dyadic::CZERO;
use pldos_core::emission::{detection_intensity, emission, FarField, LambQuadrature};
use pldos_core::*;

fn setup(scene: &Scene) -> (Emitter, EmissionResult) {
    let e = Emitter::new([0.0; 3], [CZERO, CZERO, Complex64::new(1.0, 0.0)], 1.0, 0.0).unwrap();
    let r = emission(&e, scene, &LambQuadrature::for_emitter(&e), false, &SolverOptions::default()).unwrap();
    (e, r)
}

fn polar(r: f64, theta: f64, phi: f64) -> Vec3 {
    [r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos()]
}

#[test]
fn dipole_pattern_follows_sin_theta() {
    let scene = Scene::vacuum();
    let (e, r) = setup(&scene);
    let ff = FarField::new(&e, &r, &scene, FarField::DEFAULT_EXTRACTION, &SolverOptions::default()).unwrap();
    let big_r = 200.0;
    let t = big_r + 3.0;
    let equator = detection_intensity(&ff.field(&polar(big_r, PI / 2.0, 0.0), t).unwrap()).sqrt();
    // analytic far field: w0^2 |mu| / (4 pi R) on the equator
    let retarded = t - big_r;
    let expect = 1.0 / (4.0 * PI * big_r) * (-r.gamma * retarded / 2.0).exp();
    assert!((equator / expect - 1.0).abs() < 1e-2);
    for theta in [PI / 6.0, PI / 4.0, PI / 3.0, 2.0 * PI / 3.0] {
        let m = detection_intensity(&ff.field(&polar(big_r, theta, 0.7), t).unwrap()).sqrt();
        assert!((m / equator - theta.sin()).abs() < 1e-2 * theta.sin(), "theta {theta}");
    }
}

#[test]
fn azimuthal_symmetry_and_inverse_square() {
    let scene = Scene::vacuum();
    let (e, r) = setup(&scene);
    let ff = FarField::new(&e, &r, &scene, FarField::DEFAULT_EXTRACTION, &SolverOptions::default()).unwrap();
    let theta = 1.1;
    let base = detection_intensity(&ff.field(&polar(50.0, theta, 0.0), 55.0).unwrap());
    for phi in [0.5, 2.0, 4.0] {
        let i = detection_intensity(&ff.field(&polar(50.0, theta, phi), 55.0).unwrap());
        assert!((i / base - 1.0).abs() < 1e-12);
    }
    // same retarded time at R and 2R
    let far = detection_intensity(&ff.field(&polar(100.0, theta, 0.0), 105.0).unwrap());
    assert!((base / far - 4.0).abs() < 4e-2);
}

#[test]
fn intensity_decays_at_gamma() {
    let bg = PermittivityModel::constant_index(1.5).unwrap();
    let scene = Scene::homogeneous(bg);
    let (e, r) = setup(&scene);
    let ff = FarField::new(&e, &r, &scene, FarField::DEFAULT_EXTRACTION, &SolverOptions::default()).unwrap();
    let x = polar(40.0, 1.0, 0.3);
    let cone = 1.5 * 40.0;
    let a = detection_intensity(&ff.field(&x, cone + 1.0).unwrap());
    let b = detection_intensity(&ff.field(&x, cone + 1.0 + 2.0 / r.gamma).unwrap());
    assert!((b / a - (-2.0f64).exp()).abs() < 1e-12);
    assert_eq!(detection_intensity(&ff.field(&x, cone * (1.0 - 1e-12)).unwrap()), 0.0);
}

#[test]
fn structured_scene_uses_extracted_pattern() {
    let mat = PermittivityModel::new(1.0, vec![LorentzTerm::new(3.0, 0.0, 0.1).unwrap()]).unwrap();
    let scene = Scene::new(PermittivityModel::vacuum(), 0.1, [0.2, 0.0, 0.0], vec![mat], vec![Voxel { index: [0, 0, 0], material: 0 }]).unwrap();
    let (e, r) = setup(&scene);
    let ff = FarField::new(&e, &r, &scene, FarField::DEFAULT_EXTRACTION, &SolverOptions::default()).unwrap();
    // beyond the extraction radius the pattern comes straight from the solver
    let x = polar(80.0, 1.2, 0.4);
    let f = ff.form_factor(&x).unwrap();
    let g = solve_green(&scene, &x, &[0.0; 3], 1.0, &SolverOptions::default()).unwrap().total.unwrap();
    let phase = Complex64::new(0.0, -80.0).exp();
    assert!((f - g.scale(phase)).max_abs() < 1e-12 * g.max_abs());
    // inside it, the 1/R law carries the extracted pattern back
    let near = polar(20.0, 1.2, 0.4);
    let far = polar(50.0, 1.2, 0.4);
    let fn_ = ff.form_factor(&near).unwrap();
    let ff_ = ff.form_factor(&far).unwrap();
    assert!((fn_.scale(Complex64::new(0.4, 0.0)) - ff_).max_abs() < 1e-12 * ff_.max_abs());
    // the scatterer changes the pattern relative to vacuum
    let vac = Scene::vacuum();
    let (_, rv) = setup(&vac);
    let fv = FarField::new(&e, &rv, &vac, FarField::DEFAULT_EXTRACTION, &SolverOptions::default()).unwrap();
    assert!((fv.form_factor(&x).unwrap() - f).max_abs() > 1e-4 * f.max_abs());
}
