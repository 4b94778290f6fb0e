//! Resampling, intensity windowing and axis flips.

use super::{Unit, Volume};
use crate::error::{Result, VoxError};
use crate::par;

/// Default HU window applied before min-max scaling.
pub const DEFAULT_CLIP_LO: f32 = -1200.0;
pub const DEFAULT_CLIP_HI: f32 = 800.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

fn lerp(a: f32, b: f32, t: f32) -> f32 {
    // a + t*(b-a): exact when a == b or t == 0, which keeps constant volumes
    // and identity resamples bit-for-bit stable.
    a + t * (b - a)
}

/// Trilinear resample onto a `new_size` grid.
///
/// Physical extent is preserved: per axis, the output spacing is
/// `dims * spacing / new_size`. Voxel centres are aligned, so the source
/// coordinate for destination index `i` is `(i + 0.5) * dims/new_size - 0.5`,
/// clamped to the source grid.
pub fn resample_volume(v: &Volume, new_size: [usize; 3]) -> Result<Volume> {
    v.validate()?;
    if new_size.iter().any(|&d| d == 0) {
        return Err(VoxError::invalid(format!(
            "new_size must be positive, got {new_size:?}"
        )));
    }

    let mut spacing = [0f32; 3];
    let mut scale = [0f32; 3];
    for i in 0..3 {
        spacing[i] = ((v.dims[i] as f64 * v.spacing[i] as f64) / new_size[i] as f64) as f32;
        scale[i] = v.dims[i] as f32 / new_size[i] as f32;
    }

    let [sx, sy, sz] = v.dims;
    let [dx, dy, dz] = new_size;
    let src = &v.voxels;

    // Per-axis neighbour indices and fractions, computed once.
    let axis_table = |dst: usize, dim: usize, sc: f32| -> Vec<(usize, usize, f32)> {
        (0..dst)
            .map(|i| {
                let c = ((i as f32 + 0.5) * sc - 0.5).clamp(0.0, (dim - 1) as f32);
                let lo = c.floor() as usize;
                let hi = (lo + 1).min(dim - 1);
                (lo, hi, c - lo as f32)
            })
            .collect()
    };
    let tab_x = axis_table(dx, sx, scale[0]);
    let tab_y = axis_table(dy, sy, scale[1]);
    let tab_z = axis_table(dz, sz, scale[2]);

    let planes = par::map_range(dz, |z| {
        let (z0, z1, tz) = tab_z[z];
        let mut plane = vec![0f32; dx * dy];
        for y in 0..dy {
            let (y0, y1, ty) = tab_y[y];
            for (x, &(x0, x1, tx)) in tab_x.iter().enumerate() {
                let fetch = |xi: usize, yi: usize, zi: usize| src[xi + sx * (yi + sy * zi)];
                let c00 = lerp(fetch(x0, y0, z0), fetch(x1, y0, z0), tx);
                let c10 = lerp(fetch(x0, y1, z0), fetch(x1, y1, z0), tx);
                let c01 = lerp(fetch(x0, y0, z1), fetch(x1, y0, z1), tx);
                let c11 = lerp(fetch(x0, y1, z1), fetch(x1, y1, z1), tx);
                plane[x + dx * y] = lerp(lerp(c00, c10, ty), lerp(c01, c11, ty), tz);
            }
        }
        plane
    });
    let voxels = planes.into_iter().flatten().collect();
    Volume::new(new_size, spacing, voxels, v.unit)
}

/// Window HU intensities to `[lo, hi]` and rescale to `[0, 1]`.
pub fn clip_normalize(v: &Volume, lo: f32, hi: f32) -> Result<Volume> {
    if !(lo < hi) {
        return Err(VoxError::invalid(format!(
            "window must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    if v.unit != Unit::Hu {
        return Err(VoxError::invalid(
            "clip_normalize expects HU intensities; input is already normalized",
        ));
    }
    v.validate()?;
    let span = hi - lo;
    let voxels = v
        .voxels
        .iter()
        .map(|&x| (x.clamp(lo, hi) - lo) / span)
        .collect();
    Volume::new(v.dims, v.spacing, voxels, Unit::Normalized)
}

/// Mirror the volume along a subset of axes.
pub fn flip(v: &Volume, axes: &[Axis]) -> Result<Volume> {
    v.validate()?;
    let mut sel = [false; 3];
    for a in axes {
        sel[a.index()] = true;
    }
    if sel == [false; 3] {
        return Ok(v.clone());
    }
    let [dx, dy, dz] = v.dims;
    let mut voxels = vec![0f32; v.voxels.len()];
    for z in 0..dz {
        let fz = if sel[2] { dz - 1 - z } else { z };
        for y in 0..dy {
            let fy = if sel[1] { dy - 1 - y } else { y };
            for x in 0..dx {
                let fx = if sel[0] { dx - 1 - x } else { x };
                voxels[fx + dx * (fy + dy * fz)] = v.voxels[x + dx * (y + dy * z)];
            }
        }
    }
    Volume::new(v.dims, v.spacing, voxels, v.unit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hu_volume() -> Volume {
        Volume::new(
            [2, 2, 1],
            [1.0; 3],
            vec![-1500.0, 800.0, -200.0, 1500.0],
            Unit::Hu,
        )
        .unwrap()
    }

    #[test]
    fn window_maps_endpoints_and_midpoint() {
        let n = clip_normalize(&hu_volume(), DEFAULT_CLIP_LO, DEFAULT_CLIP_HI).unwrap();
        // -1500 clamps to the lower bound, 800 is the upper bound,
        // -200 is the midpoint of [-1200, 800]
        assert_eq!(n.voxels[0], 0.0);
        assert_eq!(n.voxels[1], 1.0);
        assert_eq!(n.voxels[2], 0.5);
        assert_eq!(n.voxels[3], 1.0);
        assert_eq!(n.unit, Unit::Normalized);
    }

    #[test]
    fn window_rejects_degenerate_bounds() {
        assert!(clip_normalize(&hu_volume(), 800.0, 800.0).is_err());
        assert!(clip_normalize(&hu_volume(), 800.0, -1200.0).is_err());
    }

    #[test]
    fn window_rejects_normalized_input() {
        let v = Volume::constant([2, 2, 2], [1.0; 3], 0.5, Unit::Normalized).unwrap();
        let err = clip_normalize(&v, DEFAULT_CLIP_LO, DEFAULT_CLIP_HI).unwrap_err();
        assert!(matches!(err, VoxError::InvalidArgument(_)), "{err}");
    }

    #[test]
    fn window_is_monotone() {
        let v = Volume::new(
            [4, 1, 1],
            [1.0; 3],
            vec![-2000.0, -100.0, 0.0, 900.0],
            Unit::Hu,
        )
        .unwrap();
        let n = clip_normalize(&v, DEFAULT_CLIP_LO, DEFAULT_CLIP_HI).unwrap();
        for w in n.voxels.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn identity_resample_is_bit_exact() {
        let vox: Vec<f32> = (0..27).map(|i| (i as f32) * 0.03125 + 0.015625).collect();
        let v = Volume::new([3, 3, 3], [0.7, 1.3, 2.1], vox, Unit::Normalized).unwrap();
        let r = resample_volume(&v, v.dims).unwrap();
        assert_eq!(r, v);
    }

    #[test]
    fn halving_an_axis_doubles_its_spacing() {
        let v = Volume::constant([512, 1, 1], [0.703125, 1.0, 1.0], 0.0, Unit::Hu).unwrap();
        let r = resample_volume(&v, [256, 1, 1]).unwrap();
        assert_eq!(r.spacing[0], 1.40625);
    }

    #[test]
    fn resample_preserves_physical_extent() {
        let v = Volume::constant([13, 7, 5], [0.33, 1.9, 2.7], 1.0, Unit::Hu).unwrap();
        let r = resample_volume(&v, [9, 11, 4]).unwrap();
        for i in 0..3 {
            let before = v.dims[i] as f64 * v.spacing[i] as f64;
            let after = r.dims[i] as f64 * r.spacing[i] as f64;
            assert!(((before - after) / before).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_volume_stays_constant_through_resample() {
        let v = Volume::constant([5, 4, 3], [2.0, 2.0, 2.0], 0.3, Unit::Normalized).unwrap();
        let r = resample_volume(&v, [10, 8, 6]).unwrap();
        assert!(r.voxels.iter().all(|&x| x == 0.3));
    }

    #[test]
    fn zero_new_size_is_invalid() {
        let v = Volume::constant([4, 4, 4], [1.0; 3], 0.0, Unit::Hu).unwrap();
        assert!(resample_volume(&v, [0, 4, 4]).is_err());
    }

    #[test]
    fn linear_ramp_interpolates_linearly() {
        // voxels = x coordinate; sampling at 2x resolution lands between centres
        let v = Volume::new([4, 1, 1], [1.0; 3], vec![0.0, 1.0, 2.0, 3.0], Unit::Hu).unwrap();
        let r = resample_volume(&v, [8, 1, 1]).unwrap();
        let expect = [0.0, 0.25, 0.75, 1.25, 1.75, 2.25, 2.75, 3.0];
        for (a, b) in r.voxels.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn flip_is_an_involution() {
        let vox: Vec<f32> = (0..24).map(|i| i as f32).collect();
        let v = Volume::new([2, 3, 4], [1.0; 3], vox, Unit::Hu).unwrap();
        for axis in Axis::ALL {
            let back = flip(&flip(&v, &[axis]).unwrap(), &[axis]).unwrap();
            assert_eq!(back, v);
        }
        let both = [Axis::X, Axis::Z];
        let back = flip(&flip(&v, &both).unwrap(), &both).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn flip_with_no_axes_is_identity() {
        let v = Volume::new([2, 1, 1], [1.0; 3], vec![1.0, 2.0], Unit::Hu).unwrap();
        assert_eq!(flip(&v, &[]).unwrap(), v);
    }

    #[test]
    fn flip_x_reverses_rows() {
        let v = Volume::new([2, 1, 1], [1.0; 3], vec![1.0, 2.0], Unit::Hu).unwrap();
        let f = flip(&v, &[Axis::X]).unwrap();
        assert_eq!(f.voxels, vec![2.0, 1.0]);
    }
}
