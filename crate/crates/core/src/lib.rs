//! Spontaneous emission of a two-level emitter in a voxelised dielectric
//! environment: permittivity models, dyadic Green functions through the
//! coupled-dipole approximation, decay rates and Lamb shifts, and the
//! optical Bloch equations of a driven emitter.

pub mod bloch;
pub mod cda;
pub mod dyadic;
pub mod emission;
pub mod green;
pub mod linalg;
pub mod materials;
pub mod quadrature;
pub mod scene;
pub mod validation;

pub use num_complex::Complex64;

pub use cda::{solve_green, solve_plane_wave, GreenPair, SceneGreen};
pub use dyadic::{CVec3, ComplexDyadic, Vec3};
pub use emission::{
    decay_rate, decay_rate_direct, emission, emitted_energy, ldos, photon_field_farfield, radiated_power,
    ww_amplitude_numeric, ww_amplitude_pole, Emitter, EmissionError, EmissionResult, Ldos,
};
pub use green::{green_homogeneous, green_vacuum, GreenError};
pub use linalg::{SolveError, SolverOptions};
pub use materials::{check_kramers_kronig, LorentzTerm, MaterialError, PermittivityModel};
pub use scene::{Scene, SceneError, Voxel};
