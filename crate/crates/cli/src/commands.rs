//! Subcommand drivers. Each returns the text of its main output; the caller
//! decides where it goes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use pldos_core::bloch::{integrate_bloch, rates_at_laser, steady_state, BlochError, BlochState, DriveParams};
use pldos_core::cda::{solve_plane_wave, SceneGreen};
use pldos_core::dyadic::{real_to_cvec, CVec3, Vec3};
use pldos_core::emission::{
    decay_rate, decay_rate_direct, emission, lamb_shift, ldos, ww_amplitude_numeric, ww_amplitude_pole,
    BromwichQuadrature, EmissionError, Emitter, LambQuadrature,
};
use pldos_core::materials::{check_kramers_kronig, FrequencyGrid};
use pldos_core::validation::run_all;
use pldos_core::{GreenError, Scene, SolverOptions};
use rayon::prelude::*;
use thiserror::Error;

use crate::args::{BlochArgs, Command, Common, DecayArgs, GridArgs, LdosMapArgs, RatesAt, ScatterArgs, ValidateArgs};
use crate::output::{fmt_cfg, fmt_num, sha256_hex, Table};
use crate::scene_file::{parse_scene, SceneFile};

pub const ENV_SOLVER_TOL: &str = "PLDOS_SOLVER_TOL";
pub const ENV_QUAD_TOL: &str = "PLDOS_QUAD_TOL";

const SOLVER_TOL_RANGE: (f64, f64) = (1e-14, 1e-3);
const QUAD_TOL_RANGE: (f64, f64) = (1e-8, 1e-1);

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("quadrature: {0}")]
    Quadrature(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io(_) => 1,
            Self::Parse(_) => 2,
            Self::Solver(_) => 3,
            Self::Quadrature(_) => 4,
            Self::Validation(_) => 5,
        }
    }
}

impl From<EmissionError> for CliError {
    fn from(e: EmissionError) -> Self {
        if e.is_quadrature() {
            Self::Quadrature(e.to_string())
        } else {
            Self::Solver(e.to_string())
        }
    }
}

impl From<GreenError> for CliError {
    fn from(e: GreenError) -> Self {
        Self::Solver(e.to_string())
    }
}

impl From<BlochError> for CliError {
    fn from(e: BlochError) -> Self {
        match e {
            BlochError::Emission(e) => e.into(),
            BlochError::NoSteadyState => Self::Solver(e.to_string()),
            BlochError::StepTooLarge { .. } | BlochError::InvalidParams(_) => Self::Parse(e.to_string()),
        }
    }
}

/// Settings shared by all subcommands after flags and environment are merged.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub solver: SolverOptions,
    pub bromwich: BromwichQuadrature,
    pub lamb_cutoff: f64,
    pub lamb_points: usize,
    pub include_nonresonant: bool,
}

fn in_range(name: &str, v: f64, (lo, hi): (f64, f64)) -> Result<f64, CliError> {
    if v.is_finite() && (lo..=hi).contains(&v) {
        Ok(v)
    } else {
        Err(CliError::Parse(format!("{name} = {v} outside [{lo:e}, {hi:e}]")))
    }
}

fn tolerance(flag: Option<f64>, env: Option<&str>, var: &str, default: f64, range: (f64, f64)) -> Result<f64, CliError> {
    let v = match (flag, env) {
        (Some(v), _) => v,
        (None, Some(s)) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Parse(format!("{var} = `{s}` is not a number")))?,
        (None, None) => default,
    };
    in_range(var, v, range)
}

impl RunConfig {
    /// `env` looks up override variables; flags win over the environment.
    pub fn resolve(common: &Common, env: impl Fn(&str) -> Option<String>) -> Result<Self, CliError> {
        let mut solver = SolverOptions::default();
        solver.rel_tol = tolerance(
            common.solver_tol,
            env(ENV_SOLVER_TOL).as_deref(),
            ENV_SOLVER_TOL,
            solver.rel_tol,
            SOLVER_TOL_RANGE,
        )?;
        let mut bromwich = BromwichQuadrature::default();
        bromwich.refine_tol = tolerance(
            common.quad_tol,
            env(ENV_QUAD_TOL).as_deref(),
            ENV_QUAD_TOL,
            bromwich.refine_tol,
            QUAD_TOL_RANGE,
        )?;
        if !(common.lamb_cutoff.is_finite() && common.lamb_cutoff > 10.0) {
            return Err(CliError::Parse(format!("lamb-cutoff = {} must exceed 10", common.lamb_cutoff)));
        }
        if !(64..=1_000_000).contains(&common.lamb_points) {
            return Err(CliError::Parse(format!("lamb-points = {} outside [64, 1000000]", common.lamb_points)));
        }
        Ok(Self {
            solver,
            bromwich,
            lamb_cutoff: common.lamb_cutoff,
            lamb_points: common.lamb_points,
            include_nonresonant: common.include_nonresonant,
        })
    }

    fn lamb(&self, omega0: f64) -> LambQuadrature {
        LambQuadrature {
            omega_max: self.lamb_cutoff * omega0,
            n_points: self.lamb_points,
        }
    }

    fn entries(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("solver_tol".into(), fmt_cfg(self.solver.rel_tol));
        m.insert("solver_max_iter".into(), self.solver.max_iter.to_string());
        m.insert("solver_dense_max_unknowns".into(), self.solver.dense_max_unknowns.to_string());
        m.insert("quad_tol".into(), fmt_cfg(self.bromwich.refine_tol));
        m.insert("lamb_cutoff".into(), fmt_cfg(self.lamb_cutoff));
        m.insert("lamb_points".into(), self.lamb_points.to_string());
        m.insert("include_nonresonant".into(), self.include_nonresonant.to_string());
        m
    }
}

/// A scene file read from disk together with the hash of its bytes.
pub struct LoadedScene {
    pub file: SceneFile,
    pub scene: Scene,
    pub sha256: String,
}

pub fn load_scene(path: &Path) -> Result<LoadedScene, CliError> {
    let bytes = std::fs::read(path)?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Parse(format!("{}: not valid UTF-8", path.display())))?;
    let file = parse_scene(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let scene = file
        .scene()
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    Ok(LoadedScene {
        file,
        scene,
        sha256: sha256_hex(&bytes),
    })
}

fn emitter_of(loaded: &LoadedScene) -> Result<Emitter, CliError> {
    loaded.file.emitter().map_err(CliError::Parse)
}

fn parse_list(name: &str, s: &str, n: usize) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(CliError::Parse(format!("--{name}: expected {n} comma-separated values, got `{s}`")));
    }
    parts
        .iter()
        .map(|p| match p.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(CliError::Parse(format!("--{name}: `{p}` is not a finite number"))),
        })
        .collect()
}

fn parse_vec3(name: &str, s: &str) -> Result<Vec3, CliError> {
    let v = parse_list(name, s, 3)?;
    Ok([v[0], v[1], v[2]])
}

/// Samples of `start,stop,n`; `n = 1` gives `start`, `n = 0` nothing.
pub fn parse_axis(name: &str, s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || CliError::Parse(format!("--{name}: expected `start,stop,n`, got `{s}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].parse().map_err(|_| bad())?;
    let b: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    if !(a.is_finite() && b.is_finite()) || n > 100_000 {
        return Err(bad());
    }
    Ok(match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    })
}

/// Grid points in x-major order, plus the count of points inside voxels.
fn grid_points(grid: &GridArgs, scene: &Scene) -> Result<(Vec<Vec3>, usize), CliError> {
    let xs = parse_axis("x", &grid.x)?;
    let ys = parse_axis("y", &grid.y)?;
    let zs = parse_axis("z", &grid.z)?;
    let mut pts = Vec::with_capacity(xs.len() * ys.len() * zs.len());
    let mut skipped = 0;
    for &x in &xs {
        for &y in &ys {
            for &z in &zs {
                let p = [x, y, z];
                if scene.locate(&p).is_some() {
                    skipped += 1;
                } else {
                    pts.push(p);
                }
            }
        }
    }
    Ok((pts, skipped))
}

fn grid_entries(cfg: &mut BTreeMap<String, String>, grid: &GridArgs) {
    cfg.insert("grid_x".into(), grid.x.clone());
    cfg.insert("grid_y".into(), grid.y.clone());
    cfg.insert("grid_z".into(), grid.z.clone());
}

pub fn ldos_map(args: &LdosMapArgs, cfg: &RunConfig) -> Result<String, CliError> {
    let loaded = load_scene(&args.scene)?;
    let emitter = loaded.file.emitter.as_ref().map(|_| emitter_of(&loaded)).transpose()?;
    let omega = match (args.omega, &emitter) {
        (Some(w), _) => w,
        (None, Some(e)) => e.omega0(),
        (None, None) => return Err(CliError::Parse("ldos-map needs --omega or an [emitter] block".into())),
    };
    if !(omega.is_finite() && omega > 0.0) {
        return Err(CliError::Parse(format!("--omega must be > 0 (got {omega})")));
    }
    let n_hat: CVec3 = match (&args.orientation, &emitter) {
        (Some(s), _) => {
            let v = parse_vec3("orientation", s)?;
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n == 0.0 {
                return Err(CliError::Parse("--orientation must be nonzero".into()));
            }
            real_to_cvec(&[v[0] / n, v[1] / n, v[2] / n])
        }
        (None, Some(e)) => e.orientation(),
        (None, None) => real_to_cvec(&[0.0, 0.0, 1.0]),
    };
    let (points, skipped) = grid_points(&args.grid, &loaded.scene)?;

    let mut entries = cfg.entries();
    grid_entries(&mut entries, &args.grid);
    entries.insert("omega".into(), fmt_cfg(omega));
    let dir: Vec<String> = n_hat
        .iter()
        .map(|z| format!("({},{})", fmt_cfg(z.re), fmt_cfg(z.im)))
        .collect();
    entries.insert("orientation".into(), dir.join(" "));

    let rows: Vec<_> = points
        .par_iter()
        .map(|p| ldos(&loaded.scene, p, &n_hat, omega, &cfg.solver))
        .collect::<Result<_, _>>()?;

    let mut t = Table::new("ldos-map", Some(&loaded.sha256), &entries);
    t.note("skipped_inside_voxels", skipped);
    t.columns(&["x", "y", "z", "omega", "ldos_total", "ldos_bulk", "ldos_ref"]);
    for (p, r) in points.iter().zip(&rows) {
        t.row(&[p[0], p[1], p[2], omega, r.total, r.bulk, r.reference]);
    }
    Ok(t.render())
}

/// Returns the summary table and, when requested, the `S(t)` series.
pub fn decay(args: &DecayArgs, cfg: &RunConfig) -> Result<(String, Option<String>), CliError> {
    let loaded = load_scene(&args.scene)?;
    let emitter = emitter_of(&loaded)?;
    let quad = cfg.lamb(emitter.omega0());
    let res = emission(&emitter, &loaded.scene, &quad, cfg.include_nonresonant, &cfg.solver)?;

    let entries = cfg.entries();
    let mut t = Table::new("decay", Some(&loaded.sha256), &entries);
    t.columns(&[
        "omega0",
        "gamma",
        "delta",
        "omega_tilde_re",
        "omega_tilde_im",
        "ldos_total",
        "ldos_bulk",
        "ldos_ref",
        "lamb_resonant",
        "lamb_nonresonant",
        "lamb_direct",
    ]);
    t.row(&[
        res.omega0,
        res.gamma,
        res.delta,
        res.omega_tilde.re,
        res.omega_tilde.im,
        res.ldos.total,
        res.ldos.bulk,
        res.ldos.reference,
        res.lamb.resonant,
        res.lamb.nonresonant,
        res.lamb.direct,
    ]);
    let summary = t.render();

    if args.series.is_none() {
        return Ok((summary, None));
    }
    let t_max = match args.t_max {
        Some(v) if v.is_finite() && v >= 0.0 => v,
        Some(v) => return Err(CliError::Parse(format!("--t-max must be >= 0 (got {v})"))),
        None if res.gamma > 0.0 => 5.0 / res.gamma,
        None => return Err(EmissionError::NoDecay.into()),
    };
    let times: Vec<f64> = match args.t_points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect(),
    };
    let numeric = if args.numeric && !times.is_empty() {
        Some(ww_amplitude_numeric(&emitter, &loaded.scene, &times, &cfg.bromwich, &cfg.solver)?)
    } else {
        None
    };

    let mut entries = cfg.entries();
    entries.insert("t_max".into(), fmt_cfg(t_max));
    entries.insert("t_points".into(), args.t_points.to_string());
    entries.insert("numeric".into(), args.numeric.to_string());
    let mut s = Table::new("decay-series", Some(&loaded.sha256), &entries);
    s.note("gamma", fmt_num(res.gamma));
    s.note("delta", fmt_num(res.delta));
    if numeric.is_some() {
        s.columns(&["t", "re_s_pole", "im_s_pole", "abs_s_pole", "re_s_num", "im_s_num", "abs_s_num"]);
    } else {
        s.columns(&["t", "re_s_pole", "im_s_pole", "abs_s_pole"]);
    }
    for (k, &tk) in times.iter().enumerate() {
        let p = ww_amplitude_pole(&res, tk);
        match &numeric {
            Some(num) => {
                let q = num[k];
                s.row(&[tk, p.re, p.im, p.norm(), q.re, q.im, q.norm()]);
            }
            None => s.row(&[tk, p.re, p.im, p.norm()]),
        }
    }
    Ok((summary, Some(s.render())))
}

pub fn bloch(args: &BlochArgs, cfg: &RunConfig) -> Result<String, CliError> {
    let loaded = load_scene(&args.scene)?;
    let emitter = emitter_of(&loaded)?;
    let drive = loaded.file.drive().map_err(CliError::Parse)?.clone();
    if args.stride == 0 {
        return Err(CliError::Parse("--stride must be >= 1".into()));
    }
    let (gamma_prime, delta_prime) = match args.rates_at {
        RatesAt::Laser => {
            let r = rates_at_laser(
                &emitter,
                &loaded.scene,
                drive.omega_l,
                &cfg.lamb(drive.omega_l),
                cfg.include_nonresonant,
                &cfg.solver,
            )?;
            (r.gamma_prime, r.delta_prime)
        }
        RatesAt::Transition => {
            let g = decay_rate(&emitter, &loaded.scene, &cfg.solver)?;
            let d = lamb_shift(&emitter, &loaded.scene, &cfg.lamb(emitter.omega0()), &cfg.solver)?
                .delta(cfg.include_nonresonant);
            (g, d)
        }
    };
    let params = DriveParams::new(emitter.omega0(), drive.omega_l, drive.rabi, gamma_prime, delta_prime)?;
    let dt = match args.dt {
        Some(v) => v,
        None if params.max_rate() > 0.0 => 0.05 / params.max_rate(),
        None => return Err(CliError::Parse("all rates vanish; pass --dt".into())),
    };
    let t_max = match args.t_max {
        Some(v) => v,
        None if gamma_prime > 0.0 => 30.0 / gamma_prime,
        None => return Err(CliError::Parse("gamma' vanishes; pass --t-max".into())),
    };
    let traj = integrate_bloch(BlochState::GROUND, &params, t_max, dt)?;

    let mut entries = cfg.entries();
    entries.insert(
        "rates_at".into(),
        match args.rates_at {
            RatesAt::Laser => "laser",
            RatesAt::Transition => "transition",
        }
        .into(),
    );
    entries.insert("dt".into(), fmt_cfg(dt));
    entries.insert("t_max".into(), fmt_cfg(t_max));
    entries.insert("stride".into(), args.stride.to_string());
    let mut t = Table::new("bloch", Some(&loaded.sha256), &entries);
    t.note("gamma_prime", fmt_num(gamma_prime));
    t.note("delta_prime", fmt_num(delta_prime));
    t.note("detuning", fmt_num(params.detuning()));
    match steady_state(&params) {
        Ok(ss) => {
            t.note("steady_re_s", fmt_num(ss.s.re));
            t.note("steady_im_s", fmt_num(ss.s.im));
            t.note("steady_w", fmt_num(ss.w));
        }
        Err(BlochError::NoSteadyState) => t.note("steady_state", "none"),
        Err(e) => return Err(e.into()),
    }
    t.columns(&["t", "re_s", "im_s", "w"]);
    let last = traj.len().saturating_sub(1);
    for (k, (tk, st)) in traj.iter().enumerate() {
        if k % args.stride == 0 || k == last {
            t.row(&[*tk, st.s.re, st.s.im, st.w]);
        }
    }
    Ok(t.render())
}

pub fn scatter(args: &ScatterArgs, cfg: &RunConfig) -> Result<String, CliError> {
    let loaded = load_scene(&args.scene)?;
    let k = parse_vec3("k", &args.k)?;
    let pol = parse_vec3("pol", &args.pol)?;
    let k_mag = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    let p_mag = (pol[0] * pol[0] + pol[1] * pol[1] + pol[2] * pol[2]).sqrt();
    if k_mag == 0.0 {
        return Err(CliError::Parse("--k must be nonzero".into()));
    }
    if (p_mag - 1.0).abs() > 1e-9 || (k[0] * pol[0] + k[1] * pol[1] + k[2] * pol[2]).abs() >= 1e-12 * k_mag {
        return Err(CliError::Parse("--pol must be a unit vector orthogonal to --k".into()));
    }
    let (points, skipped) = grid_points(&args.grid, &loaded.scene)?;
    let field = solve_plane_wave(&loaded.scene, &k, &pol, &cfg.solver)?;
    let values: Vec<CVec3> = points.par_iter().map(|p| field.field(p)).collect::<Result<_, _>>()?;

    let mut entries = cfg.entries();
    grid_entries(&mut entries, &args.grid);
    entries.insert("k".into(), args.k.clone());
    entries.insert("pol".into(), args.pol.clone());
    let mut t = Table::new("scatter", Some(&loaded.sha256), &entries);
    t.note("omega", fmt_num(field.omega()));
    t.note("skipped_inside_voxels", skipped);
    t.columns(&["x", "y", "z", "re_ex", "im_ex", "re_ey", "im_ey", "re_ez", "im_ez"]);
    for (p, e) in points.iter().zip(&values) {
        t.row(&[p[0], p[1], p[2], e[0].re, e[0].im, e[1].re, e[1].im, e[2].re, e[2].im]);
    }
    Ok(t.render())
}

/// Per-scene sanity checks: material causality, passivity, agreement of
/// the two decay-rate paths and reciprocity of `G_ref`.
fn scene_checks(path: &Path, loaded: &LoadedScene, cfg: &RunConfig) -> Vec<(String, bool, String)> {
    let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    let mut out = Vec::new();

    let mut models = vec![("background".to_string(), loaded.scene.background().clone())];
    models.extend(loaded.file.materials.iter().zip(loaded.scene.materials()).map(|((n, _), m)| (n.clone(), m.clone())));
    for (label, model) in &models {
        if !model.is_dispersive() {
            continue;
        }
        let min_damping = model.terms().iter().map(|t| t.damping()).fold(f64::INFINITY, f64::min);
        // The Drude remainder falls off as 1/w, so the window must be wide.
        let omega_max = 1e3 * model.terms().iter().map(|t| t.resonance() + t.damping()).fold(1.0, f64::max);
        let n_points = ((omega_max / (min_damping / 16.0)).ceil() as usize + 1).min(1 << 22);
        let check = FrequencyGrid::new(omega_max, n_points).and_then(|g| check_kramers_kronig(model, &g, 1e-2));
        let (ok, detail) = match check {
            Ok(r) => (r.pass, format!("max error {:.3e}", r.max_error)),
            Err(e) => (false, format!("error: {e}")),
        };
        out.push((format!("{name}: {label} Kramers-Kronig"), ok, detail));
    }

    let Some(_) = loaded.file.emitter else {
        return out;
    };
    let emitter = match emitter_of(loaded) {
        Ok(e) => e,
        Err(e) => {
            out.push((format!("{name}: emitter"), false, e.to_string()));
            return out;
        }
    };
    let rates = decay_rate(&emitter, &loaded.scene, &cfg.solver)
        .and_then(|g| Ok((g, decay_rate_direct(&emitter, &loaded.scene, &cfg.solver)?)));
    match rates {
        Ok((g, gd)) => {
            let rel = (g - gd).abs() / g.abs().max(f64::MIN_POSITIVE);
            out.push((format!("{name}: passivity"), g >= 0.0, format!("gamma {}", fmt_num(g))));
            out.push((format!("{name}: decay-rate paths"), rel <= 1e-8, format!("relative difference {rel:.3e}")));
        }
        Err(e) => out.push((format!("{name}: decay rate"), false, format!("error: {e}"))),
    }

    let x0 = emitter.position();
    let offset = 0.7 * loaded.scene.pitch().max(0.5);
    let x1 = [x0[0] + offset, x0[1] - 0.5 * offset, x0[2] + 0.3 * offset];
    let recip = SceneGreen::new(&loaded.scene, emitter.omega0(), &cfg.solver).and_then(|sg| {
        if loaded.scene.locate(&x1).is_some() {
            return Ok(None);
        }
        let a = sg.green(&x1, &x0)?.reference;
        let b = sg.green(&x0, &x1)?.reference.transpose();
        let scale = a.max_abs().max(b.max_abs()).max(f64::MIN_POSITIVE);
        let mut d: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                d = d.max((a.get(i, j) - b.get(i, j)).norm());
            }
        }
        Ok(Some(if a.max_abs() == 0.0 && b.max_abs() == 0.0 { 0.0 } else { d / scale }))
    });
    match recip {
        Ok(Some(rel)) => out.push((format!("{name}: reciprocity"), rel <= 1e-8, format!("relative asymmetry {rel:.3e}"))),
        Ok(None) => {}
        Err(e) => out.push((format!("{name}: reciprocity"), false, format!("error: {e}"))),
    }
    out
}

/// Returns the report and whether every check passed.
pub fn validate(args: &ValidateArgs, cfg: &RunConfig) -> Result<(String, bool), CliError> {
    let scenes: Vec<(PathBuf, LoadedScene)> = args
        .scenes
        .iter()
        .map(|p| load_scene(p).map(|l| (p.clone(), l)))
        .collect::<Result<_, _>>()?;

    let mut t = Table::new("validate", None, &cfg.entries());
    for (p, l) in &scenes {
        let name = p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned());
        t.note(&format!("scene_sha256.{name}"), &l.sha256);
    }
    let mut lines = Vec::new();
    let mut all = true;
    for c in run_all() {
        all &= c.passed;
        lines.push(c.line());
    }
    for (p, l) in &scenes {
        for (label, ok, detail) in scene_checks(p, l, cfg) {
            all &= ok;
            lines.push(format!("[{}] {label}: {detail}", if ok { "PASS" } else { "FAIL" }));
        }
    }
    t.note("result", if all { "pass" } else { "fail" });
    let mut text = t.render();
    for l in lines {
        text.push_str(&l);
        text.push('\n');
    }
    Ok((text, all))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

/// Runs one subcommand with an already resolved configuration.
pub fn run(command: &Command, common: &Common, cfg: &RunConfig) -> Result<(), CliError> {
    let out = common.output.as_deref();
    match command {
        Command::LdosMap(a) => write_out(out, &ldos_map(a, cfg)?),
        Command::Decay(a) => {
            let (summary, series) = decay(a, cfg)?;
            if let (Some(path), Some(text)) = (&a.series, series) {
                std::fs::write(path, text)?;
            }
            write_out(out, &summary)
        }
        Command::Bloch(a) => write_out(out, &bloch(a, cfg)?),
        Command::Scatter(a) => write_out(out, &scatter(a, cfg)?),
        Command::Validate(a) => {
            let (text, ok) = validate(a, cfg)?;
            write_out(out, &text)?;
            if ok {
                Ok(())
            } else {
                Err(CliError::Validation("one or more checks failed".into()))
            }
        }
    }
}
