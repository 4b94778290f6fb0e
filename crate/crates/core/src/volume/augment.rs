//! Seeded stochastic augmentation for normalized volumes.
//!
//! Transform order is fixed: flip, affine (rotation/scale/translation in a
//! single resampling pass), Gaussian smoothing, Gaussian noise, gamma
//! contrast. Parameters are sampled up front in that order, so the output is
//! a pure function of (volume, spec, seed). A stage whose sampled parameters
//! are exactly the identity is skipped, which keeps the all-identity spec
//! bit-exact.

use rand::Rng;

use super::preprocess::Axis;
use super::{Unit, Volume};
use crate::error::{Result, VoxError};
use crate::par;
use crate::rng::{derive_rng, sample_normal, streams};

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentationSpec {
    /// Flip probability per axis (x, y, z).
    pub flip_prob: [f32; 3],
    /// Max rotation magnitude about each axis, degrees.
    pub rotation_max_deg: f32,
    /// Isotropic scale factor range around 1.
    pub scale_range: [f32; 2],
    /// Max per-axis translation, voxels.
    pub translation_max_voxels: u32,
    /// Gaussian smoothing sigma range, voxels.
    pub smooth_sigma_range: [f32; 2],
    /// Additive Gaussian noise sigma in normalized-intensity units.
    pub noise_sigma: f32,
    /// Gamma contrast exponent range.
    pub contrast_gamma_range: [f32; 2],
}

impl AugmentationSpec {
    /// No-op spec: every stage samples its identity.
    pub fn identity() -> Self {
        Self {
            flip_prob: [0.0; 3],
            rotation_max_deg: 0.0,
            scale_range: [1.0, 1.0],
            translation_max_voxels: 0,
            smooth_sigma_range: [0.0, 0.0],
            noise_sigma: 0.0,
            contrast_gamma_range: [1.0, 1.0],
        }
    }

    /// Pretraining: sagittal/axial flips only.
    pub fn pretrain_default() -> Self {
        Self {
            flip_prob: [0.5, 0.0, 0.5],
            ..Self::identity()
        }
    }

    /// Fine-tuning: flips plus mild geometric and photometric jitter.
    pub fn finetune_default() -> Self {
        Self {
            flip_prob: [0.5, 0.0, 0.5],
            rotation_max_deg: 10.0,
            scale_range: [0.9, 1.1],
            translation_max_voxels: 4,
            smooth_sigma_range: [0.0, 1.0],
            noise_sigma: 0.01,
            contrast_gamma_range: [0.8, 1.25],
        }
    }

    /// Test-time augmentation: all-axis flips, doubled rotation and noise.
    pub fn aggressive() -> Self {
        Self {
            flip_prob: [0.5, 0.5, 0.5],
            rotation_max_deg: 20.0,
            noise_sigma: 0.02,
            ..Self::finetune_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for &p in &self.flip_prob {
            if !(0.0..=1.0).contains(&p) {
                return Err(VoxError::invalid(format!("flip probability {p} not in [0,1]")));
            }
        }
        if self.rotation_max_deg < 0.0 || self.noise_sigma < 0.0 {
            return Err(VoxError::invalid("rotation and noise magnitudes must be >= 0"));
        }
        for (name, r) in [
            ("scale_range", self.scale_range),
            ("smooth_sigma_range", self.smooth_sigma_range),
            ("contrast_gamma_range", self.contrast_gamma_range),
        ] {
            if !(r[0] <= r[1]) {
                return Err(VoxError::invalid(format!("{name} not ordered: {r:?}")));
            }
        }
        if self.smooth_sigma_range[0] < 0.0 || self.contrast_gamma_range[0] <= 0.0 {
            return Err(VoxError::invalid("sigma must be >= 0 and gamma > 0"));
        }
        Ok(())
    }
}

/// Parameters drawn for one augmentation pass.
struct Draw {
    flips: Vec<Axis>,
    angles_rad: [f32; 3],
    scale: f32,
    translation: [f32; 3],
    smooth_sigma: f32,
    gamma: f32,
}

fn sample_draw(spec: &AugmentationSpec, rng: &mut impl Rng) -> Draw {
    let mut flips = Vec::new();
    for axis in Axis::ALL {
        let u: f32 = rng.gen();
        if u < spec.flip_prob[axis.index()] {
            flips.push(axis);
        }
    }
    let mut angles_rad = [0f32; 3];
    for a in &mut angles_rad {
        let u: f32 = rng.gen();
        *a = (2.0 * u - 1.0) * spec.rotation_max_deg.to_radians();
    }
    let u: f32 = rng.gen();
    let scale = spec.scale_range[0] + u * (spec.scale_range[1] - spec.scale_range[0]);
    let mut translation = [0f32; 3];
    for t in &mut translation {
        let u: f32 = rng.gen();
        *t = (2.0 * u - 1.0) * spec.translation_max_voxels as f32;
    }
    let u: f32 = rng.gen();
    let smooth_sigma =
        spec.smooth_sigma_range[0] + u * (spec.smooth_sigma_range[1] - spec.smooth_sigma_range[0]);
    let u: f32 = rng.gen();
    let gamma = spec.contrast_gamma_range[0]
        + u * (spec.contrast_gamma_range[1] - spec.contrast_gamma_range[0]);
    Draw {
        flips,
        angles_rad,
        scale,
        translation,
        smooth_sigma,
        gamma,
    }
}

/// Apply the spec to a normalized volume. Pure in (v, spec, seed).
pub fn augment(v: &Volume, spec: &AugmentationSpec, rng_seed: u64) -> Result<Volume> {
    spec.validate()?;
    v.validate()?;
    if v.unit != Unit::Normalized {
        return Err(VoxError::invalid("augment expects a normalized volume"));
    }
    let mut rng = derive_rng(rng_seed, &[streams::AUGMENT]);
    let draw = sample_draw(spec, &mut rng);

    let mut out = if draw.flips.is_empty() {
        v.clone()
    } else {
        super::preprocess::flip(v, &draw.flips)?
    };

    let affine_identity = draw.angles_rad == [0.0; 3]
        && draw.scale == 1.0
        && draw.translation == [0.0; 3];
    if !affine_identity {
        out = apply_affine(&out, draw.angles_rad, draw.scale, draw.translation);
    }

    if draw.smooth_sigma > 0.0 {
        out = gaussian_smooth(&out, draw.smooth_sigma);
    }

    if spec.noise_sigma > 0.0 {
        for x in &mut out.voxels {
            *x += sample_normal(&mut rng) as f32 * spec.noise_sigma;
        }
    }

    if draw.gamma != 1.0 {
        for x in &mut out.voxels {
            *x = x.clamp(0.0, 1.0).powf(draw.gamma);
        }
    }

    for x in &mut out.voxels {
        *x = x.clamp(0.0, 1.0);
    }
    Ok(out)
}

/// Resample through the inverse affine map about the volume centre.
/// Out-of-range samples clamp to the boundary.
fn apply_affine(v: &Volume, angles: [f32; 3], scale: f32, translation: [f32; 3]) -> Volume {
    let (sx_a, cx) = angles[0].sin_cos();
    let (sy_a, cy) = angles[1].sin_cos();
    let (sz_a, cz) = angles[2].sin_cos();
    // R = Rz * Ry * Rx; sampling uses the inverse (transpose) rotation.
    let r = [
        [cz * cy, cz * sy_a * sx_a - sz_a * cx, cz * sy_a * cx + sz_a * sx_a],
        [sz_a * cy, sz_a * sy_a * sx_a + cz * cx, sz_a * sy_a * cx - cz * sx_a],
        [-sy_a, cy * sx_a, cy * cx],
    ];
    let [dx, dy, dz] = v.dims;
    let centre = [
        (dx as f32 - 1.0) * 0.5,
        (dy as f32 - 1.0) * 0.5,
        (dz as f32 - 1.0) * 0.5,
    ];
    let inv_scale = 1.0 / scale;
    let src = &v.voxels;

    let sample = |p: [f32; 3]| -> f32 {
        let mut idx = [0usize; 3];
        let mut hi = [0usize; 3];
        let mut t = [0f32; 3];
        for i in 0..3 {
            let c = p[i].clamp(0.0, (v.dims[i] - 1) as f32);
            idx[i] = c.floor() as usize;
            hi[i] = (idx[i] + 1).min(v.dims[i] - 1);
            t[i] = c - idx[i] as f32;
        }
        let fetch = |xi: usize, yi: usize, zi: usize| src[xi + dx * (yi + dy * zi)];
        let l = |a: f32, b: f32, tt: f32| a + tt * (b - a);
        let c00 = l(fetch(idx[0], idx[1], idx[2]), fetch(hi[0], idx[1], idx[2]), t[0]);
        let c10 = l(fetch(idx[0], hi[1], idx[2]), fetch(hi[0], hi[1], idx[2]), t[0]);
        let c01 = l(fetch(idx[0], idx[1], hi[2]), fetch(hi[0], idx[1], hi[2]), t[0]);
        let c11 = l(fetch(idx[0], hi[1], hi[2]), fetch(hi[0], hi[1], hi[2]), t[0]);
        l(l(c00, c10, t[1]), l(c01, c11, t[1]), t[2])
    };

    let planes = par::map_range(dz, |z| {
        let mut plane = vec![0f32; dx * dy];
        for y in 0..dy {
            for x in 0..dx {
                let q = [
                    (x as f32 - centre[0] - translation[0]) * inv_scale,
                    (y as f32 - centre[1] - translation[1]) * inv_scale,
                    (z as f32 - centre[2] - translation[2]) * inv_scale,
                ];
                // inverse rotation: transpose of r
                let p = [
                    r[0][0] * q[0] + r[1][0] * q[1] + r[2][0] * q[2] + centre[0],
                    r[0][1] * q[0] + r[1][1] * q[1] + r[2][1] * q[2] + centre[1],
                    r[0][2] * q[0] + r[1][2] * q[1] + r[2][2] * q[2] + centre[2],
                ];
                plane[x + dx * y] = sample(p);
            }
        }
        plane
    });
    let voxels = planes.into_iter().flatten().collect();
    Volume::new(v.dims, v.spacing, voxels, v.unit).expect("affine keeps shape")
}

/// Separable Gaussian blur; kernel truncated at 3 sigma and renormalized per
/// position at the borders.
fn gaussian_smooth(v: &Volume, sigma: f32) -> Volume {
    let radius = (3.0 * sigma).ceil() as isize;
    if radius == 0 {
        return v.clone();
    }
    let weights: Vec<f32> = (-radius..=radius)
        .map(|k| (-0.5 * (k as f32 / sigma).powi(2)).exp())
        .collect();

    let [dx, dy, _] = v.dims;
    let strides = [1usize, dx, dx * dy];
    let mut cur = v.voxels.clone();
    for axis in 0..3 {
        let dim = v.dims[axis];
        let stride = strides[axis];
        let prev = cur.clone();
        let n = v.voxels.len();
        let next = par::map_range(n, |i| {
            let pos = (i / stride) % dim;
            let mut acc = 0f32;
            let mut wsum = 0f32;
            for (wi, &w) in weights.iter().enumerate() {
                let k = wi as isize - radius;
                let p = pos as isize + k;
                if p < 0 || p >= dim as isize {
                    continue;
                }
                let j = (i as isize + k * stride as isize) as usize;
                acc += w * prev[j];
                wsum += w;
            }
            acc / wsum
        });
        cur = next;
    }
    Volume::new(v.dims, v.spacing, cur, v.unit).expect("smoothing keeps shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_volume(dims: [usize; 3]) -> Volume {
        let n = dims[0] * dims[1] * dims[2];
        let vox: Vec<f32> = (0..n).map(|i| (i % 97) as f32 / 96.0).collect();
        Volume::new(dims, [1.0; 3], vox, Unit::Normalized).unwrap()
    }

    #[test]
    fn identity_spec_is_bit_exact() {
        let v = ramp_volume([6, 5, 4]);
        let a = augment(&v, &AugmentationSpec::identity(), 1234).unwrap();
        assert_eq!(a, v);
    }

    #[test]
    fn same_seed_same_output() {
        let v = ramp_volume([8, 8, 8]);
        let spec = AugmentationSpec::finetune_default();
        let a = augment(&v, &spec, 42).unwrap();
        let b = augment(&v, &spec, 42).unwrap();
        assert_eq!(a, b);
        let c = augment(&v, &spec, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn output_stays_in_unit_interval() {
        let v = ramp_volume([12, 12, 12]);
        let spec = AugmentationSpec::aggressive();
        for seed in 0..8 {
            let a = augment(&v, &spec, seed).unwrap();
            assert!(a.voxels.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
    }

    #[test]
    fn rejects_hu_input() {
        let v = Volume::constant([4, 4, 4], [1.0; 3], 100.0, Unit::Hu).unwrap();
        assert!(augment(&v, &AugmentationSpec::identity(), 0).is_err());
    }

    #[test]
    fn rejects_unordered_range() {
        let spec = AugmentationSpec {
            scale_range: [1.1, 0.9],
            ..AugmentationSpec::identity()
        };
        let v = ramp_volume([4, 4, 4]);
        assert!(augment(&v, &spec, 0).is_err());
    }

    #[test]
    fn noise_mean_square_deviation_matches_sigma() {
        // >= 1e6 voxels, noise-only spec: MSE against the input estimates
        // sigma^2. Constant 0.5 keeps the draw far from the clamp bounds.
        let v = Volume::constant([101, 101, 101], [1.0; 3], 0.5, Unit::Normalized).unwrap();
        let sigma = 0.01f32;
        let spec = AugmentationSpec {
            noise_sigma: sigma,
            ..AugmentationSpec::identity()
        };
        let a = augment(&v, &spec, 7).unwrap();
        let mse: f64 = a
            .voxels
            .iter()
            .zip(v.voxels.iter())
            .map(|(&x, &y)| ((x - y) as f64).powi(2))
            .sum::<f64>()
            / a.voxels.len() as f64;
        let want = (sigma as f64).powi(2);
        assert!(
            (mse - want).abs() / want < 0.05,
            "mse {mse:.3e} vs sigma^2 {want:.3e}"
        );
    }

    #[test]
    fn smoothing_preserves_mean_roughly() {
        let v = ramp_volume([16, 16, 16]);
        let s = gaussian_smooth(&v, 1.0);
        let mean = |vv: &Volume| vv.voxels.iter().map(|&x| x as f64).sum::<f64>() / 4096.0;
        assert!((mean(&v) - mean(&s)).abs() < 0.02);
        // blurring shrinks variance
        let var = |vv: &Volume, m: f64| {
            vv.voxels.iter().map(|&x| (x as f64 - m).powi(2)).sum::<f64>() / 4096.0
        };
        assert!(var(&s, mean(&s)) < var(&v, mean(&v)));
    }

    #[test]
    fn pure_translation_shifts_content() {
        // single bright voxel moved by exactly +2 in x
        let mut v = Volume::constant([9, 9, 9], [1.0; 3], 0.0, Unit::Normalized).unwrap();
        let c = 4 + 9 * (4 + 9 * 4);
        v.voxels[c] = 1.0;
        let out = apply_affine(&v, [0.0; 3], 1.0, [2.0, 0.0, 0.0]);
        let shifted = 6 + 9 * (4 + 9 * 4);
        assert!((out.voxels[shifted] - 1.0).abs() < 1e-6);
        assert!(out.voxels[c].abs() < 1e-6);
    }

    #[test]
    fn rotation_by_90_degrees_permutes_plane() {
        // a voxel offset along +x about the centre moves to +y under Rz(90°)
        let mut v = Volume::constant([9, 9, 1], [1.0; 3], 0.0, Unit::Normalized).unwrap();
        v.voxels[6 + 9 * 4] = 1.0; // (6, 4), centre (4, 4)
        let out = apply_affine(&v, [0.0, 0.0, std::f32::consts::FRAC_PI_2], 1.0, [0.0; 3]);
        let at = |x: usize, y: usize| out.voxels[x + 9 * y];
        assert!((at(4, 6) - 1.0).abs() < 1e-4, "got {}", at(4, 6));
        assert!(at(6, 4).abs() < 1e-4);
    }
}
