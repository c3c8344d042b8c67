//! Background medium plus a voxelised scatterer on a uniform cubic grid.

use std::collections::HashMap;

use thiserror::Error;

use crate::dyadic::Vec3;
use crate::materials::PermittivityModel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error("voxel pitch must be a positive finite number (got {0})")]
    InvalidPitch(f64),
    #[error("voxel {second} duplicates the grid cell of voxel {first} at index {index:?}")]
    DuplicateVoxel {
        first: usize,
        second: usize,
        index: [i64; 3],
    },
    #[error("voxel {voxel} references undefined material #{material}")]
    UndefinedMaterial { voxel: usize, material: usize },
}

/// One occupied grid cell. `index` is the integer cell coordinate; the
/// centre is `origin + pitch * index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Voxel {
    pub index: [i64; 3],
    pub material: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    background: PermittivityModel,
    materials: Vec<PermittivityModel>,
    voxels: Vec<Voxel>,
    pitch: f64,
    origin: Vec3,
    lookup: HashMap<[i64; 3], usize>,
}

impl Scene {
    pub fn new(
        background: PermittivityModel,
        pitch: f64,
        origin: Vec3,
        materials: Vec<PermittivityModel>,
        voxels: Vec<Voxel>,
    ) -> Result<Self, SceneError> {
        if !(pitch.is_finite() && pitch > 0.0) {
            return Err(SceneError::InvalidPitch(pitch));
        }
        let mut lookup = HashMap::with_capacity(voxels.len());
        for (n, v) in voxels.iter().enumerate() {
            if v.material >= materials.len() {
                return Err(SceneError::UndefinedMaterial {
                    voxel: n,
                    material: v.material,
                });
            }
            if let Some(&first) = lookup.get(&v.index) {
                return Err(SceneError::DuplicateVoxel {
                    first,
                    second: n,
                    index: v.index,
                });
            }
            lookup.insert(v.index, n);
        }
        Ok(Self {
            background,
            materials,
            voxels,
            pitch,
            origin,
            lookup,
        })
    }

    /// Scene with no scatterers.
    pub fn homogeneous(background: PermittivityModel) -> Self {
        Self {
            background,
            materials: Vec::new(),
            voxels: Vec::new(),
            pitch: 1.0,
            origin: [0.0; 3],
            lookup: HashMap::new(),
        }
    }

    pub fn vacuum() -> Self {
        Self::homogeneous(PermittivityModel::vacuum())
    }

    pub fn background(&self) -> &PermittivityModel {
        &self.background
    }

    pub fn materials(&self) -> &[PermittivityModel] {
        &self.materials
    }

    pub fn voxels(&self) -> &[Voxel] {
        &self.voxels
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn voxel_volume(&self) -> f64 {
        self.pitch * self.pitch * self.pitch
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn voxel_center(&self, n: usize) -> Vec3 {
        let idx = self.voxels[n].index;
        [
            self.origin[0] + self.pitch * idx[0] as f64,
            self.origin[1] + self.pitch * idx[1] as f64,
            self.origin[2] + self.pitch * idx[2] as f64,
        ]
    }

    pub fn voxel_material(&self, n: usize) -> &PermittivityModel {
        &self.materials[self.voxels[n].material]
    }

    /// Returns the voxel whose closed cube contains `x`, if any.
    pub fn locate(&self, x: &Vec3) -> Option<usize> {
        if self.voxels.is_empty() {
            return None;
        }
        let rel = [
            (x[0] - self.origin[0]) / self.pitch,
            (x[1] - self.origin[1]) / self.pitch,
            (x[2] - self.origin[2]) / self.pitch,
        ];
        let base = [rel[0].round() as i64, rel[1].round() as i64, rel[2].round() as i64];
        // Points on a shared face may round to either neighbour.
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let idx = [base[0] + dx, base[1] + dy, base[2] + dz];
                    if let Some(&n) = self.lookup.get(&idx) {
                        let inside = (0..3).all(|a| (rel[a] - idx[a] as f64).abs() <= 0.5);
                        if inside {
                            return Some(n);
                        }
                    }
                }
            }
        }
        None
    }
}
