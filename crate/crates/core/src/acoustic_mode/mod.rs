//! Gaussian standing-wave SAW mode: displacement field, mode volume,
//! zero-point motion and the position-dependent single-phonon coupling rate.
//!
//! Coordinates: x along the cavity axis, y across the beam, z normal to the
//! surface with the substrate at z < 0.

mod device;
mod field;
mod g0;
mod volume;

pub use device::DeviceConfig;
pub use field::{mode_field, ModeField};
pub use g0::{
    coupling_amplitudes, g0_at, g0_from_measurement, g0_profile, g0_profile_with, strain_envelope, G0Options,
    G0Profile, G0Projection,
};
pub use volume::{mode_volume, mode_volume_with, zero_point_displacement, ModeVolumeResult, QuadratureOptions};
