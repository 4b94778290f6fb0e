//! Volume data model, preprocessing, augmentation, synthetic data, and
//! dataset bookkeeping.

mod augment;
mod manifest;
mod preprocess;
mod synthetic;
mod tvol;

pub use augment::{augment, AugmentationSpec};
pub use manifest::{
    split_dataset, stratified_subset, DatasetManifest, ManifestRecord, Split, SplitSpec,
};
pub use preprocess::{clip_normalize, flip, resample_volume, Axis};
pub use synthetic::{generate_synthetic, Lesion, SyntheticDataset, SyntheticSpec};
pub use tvol::{read_volume, write_volume};

use crate::error::{Result, VoxError};

/// Intensity calibration of a volume's voxels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    /// Hounsfield units, unbounded.
    Hu,
    /// Min-max scaled intensities in [0, 1].
    Normalized,
}

/// Dense 3D scalar field with physical voxel spacing.
///
/// Voxels are stored x-fastest: index = x + dims[0] * (y + dims[1] * z).
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    pub dims: [usize; 3],
    /// Millimetres per voxel along each axis.
    pub spacing: [f32; 3],
    pub voxels: Vec<f32>,
    pub unit: Unit,
}

impl Volume {
    pub fn new(dims: [usize; 3], spacing: [f32; 3], voxels: Vec<f32>, unit: Unit) -> Result<Self> {
        let v = Volume {
            dims,
            spacing,
            voxels,
            unit,
        };
        v.validate()?;
        Ok(v)
    }

    /// Constant-valued volume.
    pub fn constant(dims: [usize; 3], spacing: [f32; 3], value: f32, unit: Unit) -> Result<Self> {
        Volume::new(dims, spacing, vec![value; dims[0] * dims[1] * dims[2]], unit)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.iter().any(|&d| d == 0) {
            return Err(VoxError::invalid("volume dims must be positive"));
        }
        if self.spacing.iter().any(|&s| !(s > 0.0)) {
            return Err(VoxError::invalid("voxel spacing must be positive"));
        }
        if self.voxels.len() != self.voxel_count() {
            return Err(VoxError::invalid(format!(
                "voxel payload length {} does not match dims product {}",
                self.voxels.len(),
                self.voxel_count()
            )));
        }
        if self.unit == Unit::Normalized
            && self.voxels.iter().any(|&x| !(0.0..=1.0).contains(&x))
        {
            return Err(VoxError::invalid(
                "normalized volume has voxels outside [0, 1]",
            ));
        }
        Ok(())
    }

    pub fn voxel_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, z: usize) -> f32 {
        self.voxels[self.index(x, y, z)]
    }
}
