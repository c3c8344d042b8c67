use std::f64::consts::PI;

use proptest::prelude::*;

use pldos_core::bloch::{integrate_bloch, steady_state, BlochState, DriveParams};
use pldos_core::cda::SceneGreen;
use pldos_core::dyadic::CZERO;
use pldos_core::emission::ldos_from_reference;
use pldos_core::*;

fn arb_material() -> impl Strategy<Value = PermittivityModel> {
    let term = (0.1..5.0f64, prop_oneof![Just(0.0), 0.2..3.0f64], 0.05..1.0f64)
        .prop_map(|(s, r, g)| LorentzTerm::new(s, r, g).unwrap());
    (1.0..4.0f64, prop::collection::vec(term, 1..3)).prop_map(|(e, t)| PermittivityModel::new(e, t).unwrap())
}

fn arb_scene() -> impl Strategy<Value = Scene> {
    let cells = prop::collection::btree_set((0i64..3, 0i64..3, 0i64..3), 1..=8);
    (arb_material(), cells, 0.05..0.3f64).prop_map(|(m, cells, pitch)| {
        let voxels = cells
            .into_iter()
            .map(|(i, j, k)| Voxel { index: [i, j, k], material: 0 })
            .collect();
        Scene::new(PermittivityModel::vacuum(), pitch, [0.0; 3], vec![m], voxels).unwrap()
    })
}

fn outside(pitch: f64, dir: (f64, f64), dist: f64) -> Vec3 {
    let (t, p) = dir;
    let c = pitch;
    let d = dist * pitch;
    [c + d * t.sin() * p.cos(), c + d * t.sin() * p.sin(), c + d * t.cos()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn passive_scenes_have_nonnegative_rates(
        scene in arb_scene(),
        dir in (0.1..3.0f64, 0.0..6.2f64),
        dist in 2.6..6.0f64,
        omega in 0.3..3.0f64,
    ) {
        let x0 = outside(scene.pitch(), dir, dist);
        let mu = [Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.0), Complex64::new(0.5, -0.4)];
        let e = Emitter::new(x0, mu, omega, 0.0).unwrap();
        let opts = SolverOptions::default();
        let g = decay_rate(&e, &scene, &opts).unwrap();
        prop_assert!(g >= 0.0);
        // both decay-rate formulas agree
        let gd = decay_rate_direct(&e, &scene, &opts).unwrap();
        prop_assert!((g - gd).abs() <= 1e-12 * g);
        // LDOS split is additive and consistent with the rate
        let rho = ldos(&scene, &x0, &e.orientation(), omega, &opts).unwrap();
        prop_assert!((rho.total - rho.bulk - rho.reference).abs() <= 1e-15 * rho.total.abs().max(1.0));
        let from_ldos = PI / 3.0 * omega * e.dipole_norm().powi(2) * rho.total;
        prop_assert!((g - from_ldos).abs() <= 1e-12 * g);
    }

    #[test]
    fn scene_green_is_reciprocal(
        scene in arb_scene(),
        d1 in (0.1..3.0f64, 0.0..6.2f64),
        d2 in (0.1..3.0f64, 0.0..6.2f64),
        omega in 0.3..3.0f64,
    ) {
        let x = outside(scene.pitch(), d1, 3.0);
        let x0 = outside(scene.pitch(), d2, 4.5);
        let sg = SceneGreen::new(&scene, omega, &SolverOptions::default()).unwrap();
        let a = sg.green(&x, &x0).unwrap().total.unwrap();
        let b = sg.green(&x0, &x).unwrap().total.unwrap().transpose();
        prop_assert!((a - b).max_abs() <= 1e-8 * a.max_abs());
    }

    #[test]
    fn coincident_reference_is_symmetric_and_passive(
        scene in arb_scene(),
        dir in (0.1..3.0f64, 0.0..6.2f64),
        omega in 0.3..3.0f64,
        n in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
    ) {
        let x0 = outside(scene.pitch(), dir, 3.5);
        let sg = SceneGreen::new(&scene, omega, &SolverOptions::default()).unwrap();
        let g = sg.green_ref_coincident(&x0).unwrap();
        prop_assert!((g - g.transpose()).max_abs() <= 1e-10 * g.max_abs().max(1e-300));
        let norm = (n.0 * n.0 + n.1 * n.1 + n.2 * n.2).sqrt().max(1e-3);
        let nh = [Complex64::new(n.0 / norm, 0.0), Complex64::new(n.1 / norm, 0.0), Complex64::new(n.2 / norm, 0.0)];
        prop_assume!((nh.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-9);
        let rho = ldos_from_reference(omega, Complex64::new(1.0, 0.0), &g, &nh);
        prop_assert!(rho.total >= -1e-10);
    }

    #[test]
    fn bloch_trajectories_stay_physical(
        det in -3.0..3.0f64,
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
        g in 0.0..2.0f64,
        w0 in -1.0..1.0f64,
        frac in 0.0..1.0f64,
        phase in -3.1..3.1f64,
    ) {
        let p = DriveParams::with_detuning(det, Complex64::new(a, b), g).unwrap();
        let rate = p.max_rate().max(1e-3);
        let init = BlochState { s: Complex64::from_polar(frac * (1.0 - w0 * w0).sqrt() / 2.0, phase), w: w0 };
        let tr = integrate_bloch(init, &p, 20.0 / rate, 0.1 / rate).unwrap();
        for (_, y) in &tr {
            prop_assert!(y.bloch_norm() <= 1.0 + 1e-9);
            prop_assert!(y.w >= -1.0 - 1e-9 && y.w <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn long_time_limit_is_steady_state(
        det in -1.0..1.0f64,
        a in -1.0..1.0f64,
        b in -1.0..1.0f64,
        g in 0.2..1.0f64,
    ) {
        let p = DriveParams::with_detuning(det, Complex64::new(a, b), g).unwrap();
        let dt = 0.05 / p.max_rate();
        let tr = integrate_bloch(BlochState::GROUND, &p, 40.0 / g, dt).unwrap();
        let end = tr.last().unwrap().1;
        let ss = steady_state(&p).unwrap();
        prop_assert!((end.s - ss.s).norm() < 1e-6 && (end.w - ss.w).abs() < 1e-6);
    }
}

#[test]
fn undriven_log_linear_decay() {
    let g = 0.8;
    let p = DriveParams::with_detuning(0.4, CZERO, g).unwrap();
    let init = BlochState { s: Complex64::new(0.2, 0.1), w: 0.5 };
    let tr = integrate_bloch(init, &p, 10.0, 0.005).unwrap();
    // least-squares slopes of ln|s| and ln(1 + w)
    let fit = |ys: Vec<(f64, f64)>| {
        let n = ys.len() as f64;
        let (sx, sy) = ys.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / n, sy / n);
        let sxy: f64 = ys.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = ys.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        let slope = sxy / sxx;
        let resid = ys.iter().map(|(x, y)| (y - (my + slope * (x - mx))).abs()).fold(0.0, f64::max);
        (slope, resid)
    };
    let (ks, rs) = fit(tr.iter().map(|(t, y)| (*t, y.s.norm().ln())).collect());
    let (kw, rw) = fit(tr.iter().map(|(t, y)| (*t, (1.0 + y.w).ln())).collect());
    assert!((ks + g / 2.0).abs() < 1e-6 && rs < 1e-6, "{ks} {rs}");
    assert!((kw + g).abs() < 1e-6 && rw < 1e-6, "{kw} {rw}");
}
