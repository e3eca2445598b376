//! Piecewise Lyapunov functions glued with offsets.

pub mod family;
pub mod region;
pub mod verify;

pub use family::{
    boundary_samples, choose_offsets, choose_offsets_on, Active, BoundarySample, Combine, Envelope, LyapunovPiece,
    PatchworkFamily, PatchworkW, C0_GRID, DELTA_GRID, SEPARATION_FACTOR,
};
pub use region::{Region, BOUNDARY_TOL};
pub use verify::{verify_patchwork, PatchworkCheck, PatchworkReport};
