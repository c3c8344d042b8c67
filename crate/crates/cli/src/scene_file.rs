//! Flat sectioned key-value scene format.
//!
//! ```text
//! [units]
//! length = 1e-7                  # L0 in metres, metadata only
//!
//! [background]
//! eps_infinity = 2.25
//!
//! [material gold]
//! eps_infinity = 1.0
//! lorentz = {strength = 3.63, resonance = 0.0, damping = 0.05}
//!
//! [voxels]
//! pitch = 0.05
//! origin = 0 0 0
//! voxel = 0 0 0 gold             # integer cell index, material name
//!
//! [emitter]
//! position = 0 0 0.2
//! dipole = 0 0 1
//! dipole_im = 0 0 0              # optional
//! omega0 = 1.0
//! smear_width = 0.0              # optional
//!
//! [drive]
//! omega_l = 1.0
//! rabi = 0.01 0.0                # re im
//! ```
//!
//! `#` starts a comment. Every key may appear once per section except
//! `lorentz` and `voxel`.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use num_complex::Complex64;
use pldos_core::dyadic::{CVec3, Vec3};
use pldos_core::emission::Emitter;
use pldos_core::materials::{LorentzTerm, PermittivityModel};
use pldos_core::scene::{Scene, Voxel};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialSpec {
    pub eps_infinity: f64,
    /// `(strength, resonance, damping)`
    pub lorentz: Vec<(f64, f64, f64)>,
}

impl Default for MaterialSpec {
    fn default() -> Self {
        Self {
            eps_infinity: 1.0,
            lorentz: Vec::new(),
        }
    }
}

impl MaterialSpec {
    pub fn model(&self) -> Result<PermittivityModel, pldos_core::MaterialError> {
        let terms = self
            .lorentz
            .iter()
            .map(|&(s, r, g)| LorentzTerm::new(s, r, g))
            .collect::<Result<Vec<_>, _>>()?;
        PermittivityModel::new(self.eps_infinity, terms)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoxelEntry {
    pub index: [i64; 3],
    pub material: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoxelBlock {
    pub pitch: f64,
    pub origin: Vec3,
    pub voxels: Vec<VoxelEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmitterSpec {
    pub position: Vec3,
    pub dipole: CVec3,
    pub omega0: f64,
    pub smear_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriveSpec {
    pub omega_l: f64,
    pub rabi: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneFile {
    pub length: f64,
    pub background: MaterialSpec,
    /// In declaration order.
    pub materials: Vec<(String, MaterialSpec)>,
    pub voxels: Option<VoxelBlock>,
    pub emitter: Option<EmitterSpec>,
    pub drive: Option<DriveSpec>,
}

impl SceneFile {
    pub fn scene(&self) -> Result<Scene, String> {
        let background = self.background.model().map_err(|e| format!("background: {e}"))?;
        let Some(block) = &self.voxels else {
            return Ok(Scene::homogeneous(background));
        };
        let mut models = Vec::with_capacity(self.materials.len());
        for (name, spec) in &self.materials {
            models.push(spec.model().map_err(|e| format!("material {name}: {e}"))?);
        }
        let voxels = block
            .voxels
            .iter()
            .map(|v| Voxel {
                index: v.index,
                material: self
                    .materials
                    .iter()
                    .position(|(n, _)| *n == v.material)
                    .expect("materials checked at parse time"),
            })
            .collect();
        Scene::new(background, block.pitch, block.origin, models, voxels).map_err(|e| e.to_string())
    }

    pub fn emitter(&self) -> Result<Emitter, String> {
        let spec = self.emitter.as_ref().ok_or("scene has no [emitter] block")?;
        Emitter::new(spec.position, spec.dipole, spec.omega0, spec.smear_width).map_err(|e| e.to_string())
    }

    pub fn drive(&self) -> Result<&DriveSpec, String> {
        self.drive.as_ref().ok_or_else(|| "scene has no [drive] block".to_string())
    }
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn vec3(v: &[f64; 3]) -> String {
    format!("{} {} {}", num(v[0]), num(v[1]), num(v[2]))
}

fn write_material(out: &mut String, spec: &MaterialSpec) {
    let _ = writeln!(out, "eps_infinity = {}", num(spec.eps_infinity));
    for (s, r, g) in &spec.lorentz {
        let _ = writeln!(
            out,
            "lorentz = {{strength = {}, resonance = {}, damping = {}}}",
            num(*s),
            num(*r),
            num(*g)
        );
    }
}

impl fmt::Display for SceneFile {
    /// Canonical text form; parsing it yields an equal `SceneFile`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        let _ = writeln!(out, "[units]\nlength = {}\n", num(self.length));
        out.push_str("[background]\n");
        write_material(&mut out, &self.background);
        for (name, spec) in &self.materials {
            let _ = writeln!(out, "\n[material {name}]");
            write_material(&mut out, spec);
        }
        if let Some(b) = &self.voxels {
            let _ = writeln!(out, "\n[voxels]\npitch = {}\norigin = {}", num(b.pitch), vec3(&b.origin));
            for v in &b.voxels {
                let _ = writeln!(out, "voxel = {} {} {} {}", v.index[0], v.index[1], v.index[2], v.material);
            }
        }
        if let Some(e) = &self.emitter {
            let re = [e.dipole[0].re, e.dipole[1].re, e.dipole[2].re];
            let im = [e.dipole[0].im, e.dipole[1].im, e.dipole[2].im];
            let _ = writeln!(
                out,
                "\n[emitter]\nposition = {}\ndipole = {}\ndipole_im = {}\nomega0 = {}\nsmear_width = {}",
                vec3(&e.position),
                vec3(&re),
                vec3(&im),
                num(e.omega0),
                num(e.smear_width)
            );
        }
        if let Some(d) = &self.drive {
            let _ = writeln!(
                out,
                "\n[drive]\nomega_l = {}\nrabi = {} {}",
                num(d.omega_l),
                num(d.rabi.re),
                num(d.rabi.im)
            );
        }
        f.write_str(&out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Units,
    Background,
    Material(usize),
    Voxels,
    Emitter,
    Drive,
}

/// A value token with its 1-based column.
struct Value<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

impl<'a> Value<'a> {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::at(self.line, self.column, msg)
    }

    fn words(&self) -> Vec<(usize, &'a str)> {
        let mut out = Vec::new();
        let mut start = None;
        for (i, c) in self.text.char_indices() {
            match (c.is_whitespace(), start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    out.push((s, &self.text[s..i]));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push((s, &self.text[s..]));
        }
        out
    }

    fn real_at(&self, offset: usize, word: &str, key: &str) -> Result<f64, ParseError> {
        match word.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(ParseError::at(
                self.line,
                self.column + offset,
                format!("{key}: expected a finite number, found `{word}`"),
            )),
        }
    }

    fn reals(&self, n: usize, key: &str) -> Result<Vec<f64>, ParseError> {
        let words = self.words();
        if words.len() != n {
            return Err(self.err(format!("{key}: expected {n} number(s), found {}", words.len())));
        }
        words.iter().map(|(o, w)| self.real_at(*o, w, key)).collect()
    }

    fn real(&self, key: &str) -> Result<f64, ParseError> {
        Ok(self.reals(1, key)?[0])
    }

    fn vec3(&self, key: &str) -> Result<Vec3, ParseError> {
        let v = self.reals(3, key)?;
        Ok([v[0], v[1], v[2]])
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn parse_lorentz(v: &Value<'_>) -> Result<(f64, f64, f64), ParseError> {
    let t = v.text.trim_end();
    if !(t.starts_with('{') && t.ends_with('}')) {
        return Err(v.err("lorentz: expected {strength = .., resonance = .., damping = ..}"));
    }
    let inner = &t[1..t.len() - 1];
    let mut fields: HashMap<&str, f64> = HashMap::new();
    let mut offset = 1;
    for part in inner.split(',') {
        let col = v.column + offset;
        offset += part.len() + 1;
        let Some((k, val)) = part.split_once('=') else {
            return Err(ParseError::at(v.line, col, "lorentz: expected `name = value`"));
        };
        let k = k.trim();
        if !matches!(k, "strength" | "resonance" | "damping") {
            return Err(ParseError::at(v.line, col, format!("lorentz: unknown field `{k}`")));
        }
        let word = val.trim();
        let x = match word.parse::<f64>() {
            Ok(x) if x.is_finite() => x,
            _ => {
                return Err(ParseError::at(
                    v.line,
                    col,
                    format!("lorentz.{k}: expected a finite number, found `{word}`"),
                ))
            }
        };
        if fields.insert(k, x).is_some() {
            return Err(ParseError::at(v.line, col, format!("lorentz: duplicate field `{k}`")));
        }
    }
    let get = |k: &str| fields.get(k).copied().ok_or_else(|| v.err(format!("lorentz.{k} required")));
    let term = (get("strength")?, get("resonance")?, get("damping")?);
    LorentzTerm::new(term.0, term.1, term.2).map_err(|e| v.err(format!("lorentz: {e}")))?;
    Ok(term)
}

#[derive(Default)]
struct Builder {
    length: Option<f64>,
    units_line: Option<usize>,
    background: Option<MaterialSpec>,
    materials: Vec<(String, MaterialSpec, usize)>,
    pitch: Option<f64>,
    origin: Option<Vec3>,
    voxel_section: Option<usize>,
    voxels: Vec<(VoxelEntry, usize, usize)>,
    emitter_section: Option<usize>,
    position: Option<(Vec3, usize)>,
    dipole: Option<Vec3>,
    dipole_im: Option<Vec3>,
    omega0: Option<f64>,
    smear_width: Option<f64>,
    drive_section: Option<usize>,
    omega_l: Option<f64>,
    rabi: Option<Complex64>,
    seen: HashMap<(String, &'static str), usize>,
}

pub fn parse_scene(text: &str) -> Result<SceneFile, ParseError> {
    let mut b = Builder::default();
    let mut section: Option<Section> = None;
    let mut section_names: HashMap<String, usize> = HashMap::new();

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        if trimmed.starts_with('[') {
            if !trimmed.ends_with(']') {
                return Err(ParseError::at(line, indent + 1, "unterminated section header"));
            }
            let header = trimmed[1..trimmed.len() - 1].trim();
            let mut parts = header.split_whitespace();
            let kind = parts.next().unwrap_or("");
            let rest: Vec<&str> = parts.collect();
            let sec = match (kind, rest.as_slice()) {
                ("units", []) => Section::Units,
                ("background", []) => Section::Background,
                ("voxels", []) => Section::Voxels,
                ("emitter", []) => Section::Emitter,
                ("drive", []) => Section::Drive,
                ("material", [name]) => {
                    if !valid_name(name) {
                        return Err(ParseError::at(line, indent + 1, format!("invalid material name `{name}`")));
                    }
                    b.materials.push((name.to_string(), MaterialSpec::default(), line));
                    Section::Material(b.materials.len() - 1)
                }
                ("material", _) => return Err(ParseError::at(line, indent + 1, "expected [material <name>]")),
                _ => return Err(ParseError::at(line, indent + 1, format!("unknown section [{header}]"))),
            };
            let key = match sec {
                Section::Material(i) => format!("material {}", b.materials[i].0),
                _ => kind.to_string(),
            };
            if let Some(first) = section_names.insert(key.clone(), line) {
                return Err(ParseError::at(
                    line,
                    indent + 1,
                    format!("duplicate section [{key}] (first at line {first})"),
                ));
            }
            match sec {
                Section::Units => b.units_line = Some(line),
                Section::Background => b.background = Some(MaterialSpec::default()),
                Section::Voxels => b.voxel_section = Some(line),
                Section::Emitter => b.emitter_section = Some(line),
                Section::Drive => b.drive_section = Some(line),
                Section::Material(_) => {}
            }
            section = Some(sec);
            continue;
        }
        let Some((key_raw, val_raw)) = content.split_once('=') else {
            return Err(ParseError::at(line, indent + 1, "expected `key = value`"));
        };
        let key = key_raw.trim();
        let val_start = key_raw.len() + 1 + (val_raw.len() - val_raw.trim_start().len());
        let value = Value {
            text: val_raw.trim(),
            line,
            column: val_start + 1,
        };
        let Some(sec) = section else {
            return Err(ParseError::at(line, indent + 1, format!("key `{key}` outside of any section")));
        };
        let sec_name = match sec {
            Section::Units => "units".to_string(),
            Section::Background => "background".to_string(),
            Section::Material(i) => format!("material {}", b.materials[i].0),
            Section::Voxels => "voxels".to_string(),
            Section::Emitter => "emitter".to_string(),
            Section::Drive => "drive".to_string(),
        };
        let repeatable = matches!(key, "lorentz" | "voxel");
        let known: &'static str = match (sec, key) {
            (Section::Units, "length") => "length",
            (Section::Background | Section::Material(_), "eps_infinity") => "eps_infinity",
            (Section::Background | Section::Material(_), "lorentz") => "lorentz",
            (Section::Voxels, "pitch") => "pitch",
            (Section::Voxels, "origin") => "origin",
            (Section::Voxels, "voxel") => "voxel",
            (Section::Emitter, "position") => "position",
            (Section::Emitter, "dipole") => "dipole",
            (Section::Emitter, "dipole_im") => "dipole_im",
            (Section::Emitter, "omega0") => "omega0",
            (Section::Emitter, "smear_width") => "smear_width",
            (Section::Drive, "omega_l") => "omega_l",
            (Section::Drive, "rabi") => "rabi",
            _ => {
                return Err(ParseError::at(
                    line,
                    indent + 1,
                    format!("unknown key `{key}` in [{sec_name}]"),
                ))
            }
        };
        if !repeatable {
            if let Some(first) = b.seen.insert((sec_name.clone(), known), line) {
                return Err(ParseError::at(
                    line,
                    indent + 1,
                    format!("duplicate key {sec_name}.{key} (first at line {first})"),
                ));
            }
        }
        let qualified = format!("{}.{key}", sec_name.replace(' ', "."));
        match (sec, known) {
            (Section::Units, _) => {
                let v = value.real(&qualified)?;
                if v <= 0.0 {
                    return Err(value.err(format!("{qualified} must be > 0")));
                }
                b.length = Some(v);
            }
            (Section::Background | Section::Material(_), "eps_infinity") => {
                let v = value.real(&qualified)?;
                if v < 1.0 {
                    return Err(value.err(format!("{qualified} must be >= 1")));
                }
                material_mut(&mut b, sec).eps_infinity = v;
            }
            (Section::Background | Section::Material(_), _) => {
                let t = parse_lorentz(&value)?;
                material_mut(&mut b, sec).lorentz.push(t);
            }
            (Section::Voxels, "pitch") => {
                let v = value.real(&qualified)?;
                if v <= 0.0 {
                    return Err(value.err(format!("{qualified} must be > 0")));
                }
                b.pitch = Some(v);
            }
            (Section::Voxels, "origin") => b.origin = Some(value.vec3(&qualified)?),
            (Section::Voxels, _) => {
                let words = value.words();
                if words.len() != 4 {
                    return Err(value.err("voxels.voxel: expected `i j k material`"));
                }
                let mut index = [0i64; 3];
                for a in 0..3 {
                    let (o, w) = words[a];
                    index[a] = w.parse().map_err(|_| {
                        ParseError::at(line, value.column + o, format!("voxels.voxel: expected an integer, found `{w}`"))
                    })?;
                }
                let (o, name) = words[3];
                b.voxels.push((
                    VoxelEntry {
                        index,
                        material: name.to_string(),
                    },
                    line,
                    value.column + o,
                ));
            }
            (Section::Emitter, "position") => b.position = Some((value.vec3(&qualified)?, line)),
            (Section::Emitter, "dipole") => b.dipole = Some(value.vec3(&qualified)?),
            (Section::Emitter, "dipole_im") => b.dipole_im = Some(value.vec3(&qualified)?),
            (Section::Emitter, "omega0") => {
                let v = value.real(&qualified)?;
                if v <= 0.0 {
                    return Err(value.err(format!("{qualified} must be > 0")));
                }
                b.omega0 = Some(v);
            }
            (Section::Emitter, _) => {
                let v = value.real(&qualified)?;
                if v < 0.0 {
                    return Err(value.err(format!("{qualified} must be >= 0")));
                }
                b.smear_width = Some(v);
            }
            (Section::Drive, "omega_l") => {
                let v = value.real(&qualified)?;
                if v <= 0.0 {
                    return Err(value.err(format!("{qualified} must be > 0")));
                }
                b.omega_l = Some(v);
            }
            (Section::Drive, _) => {
                let v = value.reals(2, &qualified)?;
                b.rabi = Some(Complex64::new(v[0], v[1]));
            }
        }
    }
    finish(b, text.lines().count().max(1))
}

fn material_mut(b: &mut Builder, sec: Section) -> &mut MaterialSpec {
    match sec {
        Section::Material(i) => &mut b.materials[i].1,
        _ => b.background.as_mut().expect("background section opened"),
    }
}

fn finish(b: Builder, last_line: usize) -> Result<SceneFile, ParseError> {
    let units_line = b.units_line.ok_or_else(|| ParseError::at(last_line, 1, "units.length required"))?;
    let length = b.length.ok_or_else(|| ParseError::at(units_line, 1, "units.length required"))?;

    let voxels = match b.voxel_section {
        None => None,
        Some(line) => {
            let pitch = b.pitch.ok_or_else(|| ParseError::at(line, 1, "voxels.pitch required"))?;
            let origin = b.origin.unwrap_or([0.0; 3]);
            let mut first_at: HashMap<[i64; 3], usize> = HashMap::new();
            for (v, vline, vcol) in &b.voxels {
                if !b.materials.iter().any(|(n, _, _)| *n == v.material) {
                    return Err(ParseError::at(
                        *vline,
                        *vcol,
                        format!("voxels.voxel: undefined material `{}`", v.material),
                    ));
                }
                if let Some(first) = first_at.insert(v.index, *vline) {
                    return Err(ParseError::at(
                        *vline,
                        1,
                        format!(
                            "voxels.voxel: duplicate voxel at index {:?} on lines {first} and {vline}",
                            v.index
                        ),
                    ));
                }
            }
            Some(VoxelBlock {
                pitch,
                origin,
                voxels: b.voxels.into_iter().map(|(v, _, _)| v).collect(),
            })
        }
    };

    let emitter = match b.emitter_section {
        None => None,
        Some(line) => {
            let (position, pos_line) = b.position.ok_or_else(|| ParseError::at(line, 1, "emitter.position required"))?;
            let re = b.dipole.ok_or_else(|| ParseError::at(line, 1, "emitter.dipole required"))?;
            let im = b.dipole_im.unwrap_or([0.0; 3]);
            let omega0 = b.omega0.ok_or_else(|| ParseError::at(line, 1, "emitter.omega0 required"))?;
            let dipole = [
                Complex64::new(re[0], im[0]),
                Complex64::new(re[1], im[1]),
                Complex64::new(re[2], im[2]),
            ];
            if dipole.iter().all(|z| z.norm() == 0.0) {
                return Err(ParseError::at(line, 1, "emitter.dipole must be nonzero"));
            }
            if let Some(block) = &voxels {
                for (n, v) in block.voxels.iter().enumerate() {
                    let inside = (0..3).all(|a| {
                        let c = block.origin[a] + block.pitch * v.index[a] as f64;
                        (position[a] - c).abs() <= 0.5 * block.pitch
                    });
                    if inside {
                        return Err(ParseError::at(
                            pos_line,
                            1,
                            format!("emitter.position lies inside voxel #{n} at index {:?}", v.index),
                        ));
                    }
                }
            }
            Some(EmitterSpec {
                position,
                dipole,
                omega0,
                smear_width: b.smear_width.unwrap_or(0.0),
            })
        }
    };

    let drive = match b.drive_section {
        None => None,
        Some(line) => Some(DriveSpec {
            omega_l: b.omega_l.ok_or_else(|| ParseError::at(line, 1, "drive.omega_l required"))?,
            rabi: b.rabi.ok_or_else(|| ParseError::at(line, 1, "drive.rabi required"))?,
        }),
    };

    for (name, spec, line) in &b.materials {
        spec.model()
            .map_err(|e| ParseError::at(*line, 1, format!("material {name}: {e}")))?;
    }

    Ok(SceneFile {
        length,
        background: b.background.unwrap_or_default(),
        materials: b.materials.into_iter().map(|(n, s, _)| (n, s)).collect(),
        voxels,
        emitter,
        drive,
    })
}
