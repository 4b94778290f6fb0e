//! Seed-deterministic synthetic volumes: smooth background texture plus
//! ellipsoidal "lesions" for positive classes. Serves as the desk-scale
//! stand-in corpus; every byte is a pure function of the spec.

use rand::Rng;

use super::manifest::{DatasetManifest, ManifestRecord};
use super::{Unit, Volume};
use crate::error::{Result, VoxError};
use crate::rng::{derive_rng, permutation, streams};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub dims: [usize; 3],
    pub n_volumes: usize,
    pub class_count: usize,
    /// Ellipsoid semi-axis range, voxels.
    pub lesion_radius_range: [f32; 2],
    /// Additive intensity step inside a lesion.
    pub lesion_intensity_delta: f32,
    /// Amplitude of the background texture field.
    pub background_texture_scale: f32,
    /// Positive fraction per class; realized counts are round(p * n).
    pub prevalence: Vec<f32>,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dims.iter().any(|&d| d == 0) {
            return Err(VoxError::invalid("dims must be positive"));
        }
        if self.class_count == 0 {
            return Err(VoxError::invalid("class_count must be >= 1"));
        }
        if self.prevalence.len() != self.class_count {
            return Err(VoxError::invalid(format!(
                "prevalence has {} entries for {} classes",
                self.prevalence.len(),
                self.class_count
            )));
        }
        if self.prevalence.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(VoxError::invalid("prevalence must lie in [0, 1]"));
        }
        let [lo, hi] = self.lesion_radius_range;
        if !(0.0 < lo && lo <= hi) {
            return Err(VoxError::invalid(format!(
                "lesion radius range not ordered positive: [{lo}, {hi}]"
            )));
        }
        let min_dim = *self.dims.iter().min().unwrap() as f32;
        if 2.0 * hi + 1.0 > min_dim {
            return Err(VoxError::invalid(format!(
                "lesion diameter {} does not fit inside dims {:?}",
                2.0 * hi,
                self.dims
            )));
        }
        if self.background_texture_scale < 0.0 || !self.lesion_intensity_delta.is_finite() {
            return Err(VoxError::invalid("texture scale/intensity delta out of range"));
        }
        Ok(())
    }
}

/// One injected ellipsoid; the generator's ground-truth mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Lesion {
    pub class_id: usize,
    pub center: [f32; 3],
    pub radii: [f32; 3],
}

impl Lesion {
    pub fn contains(&self, x: usize, y: usize, z: usize) -> bool {
        let p = [x as f32, y as f32, z as f32];
        let mut q = 0f32;
        for i in 0..3 {
            let d = (p[i] - self.center[i]) / self.radii[i];
            q += d * d;
        }
        q <= 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub volumes: Vec<Volume>,
    pub manifest: DatasetManifest,
    /// Per volume, one entry per positive class.
    pub lesions: Vec<Vec<Lesion>>,
}

const BACKGROUND_BASE: f32 = 0.4;

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticDataset> {
    spec.validate()?;
    let n = spec.n_volumes;

    // Exact positive counts per class: round(prevalence * n) positives,
    // placed by an independent seeded permutation per class.
    let mut labels = vec![vec![0u8; spec.class_count]; n];
    for c in 0..spec.class_count {
        let n_pos = (spec.prevalence[c] as f64 * n as f64).round() as usize;
        let mut rng = derive_rng(spec.seed, &[streams::SYNTH, 1 + c as u64]);
        let order = permutation(n, &mut rng);
        for &i in order.iter().take(n_pos) {
            labels[i][c] = 1;
        }
    }

    let mut volumes = Vec::with_capacity(n);
    let mut lesions = Vec::with_capacity(n);
    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = derive_rng(spec.seed, &[streams::SYNTH, 0, i as u64]);
        let mut v = background(spec, &mut rng);
        let mut case_lesions = Vec::new();
        for c in 0..spec.class_count {
            if labels[i][c] == 1 {
                let lesion = sample_lesion(spec, c, &mut rng);
                inject(&mut v, &lesion, spec.lesion_intensity_delta);
                case_lesions.push(lesion);
            }
        }
        for x in &mut v.voxels {
            *x = x.clamp(0.0, 1.0);
        }
        volumes.push(v);
        lesions.push(case_lesions);
        records.push(ManifestRecord {
            path: format!("vol_{i:05}.tvol"),
            labels: labels[i].clone(),
            subject: Some(format!("s{i:04}")),
        });
    }

    let classes = (0..spec.class_count).map(|c| format!("lesion{c}")).collect();
    let manifest = DatasetManifest::new(classes, records)?;
    Ok(SyntheticDataset {
        volumes,
        manifest,
        lesions,
    })
}

/// Smooth random field: a fixed base plus three low-frequency plane waves.
fn background(spec: &SyntheticSpec, rng: &mut impl Rng) -> Volume {
    let [dx, dy, dz] = spec.dims;
    let mut waves = [([0f32; 3], 0f32); 3];
    for w in &mut waves {
        // random direction (not normalized; frequency folded in)
        let mut d = [0f32; 3];
        for di in &mut d {
            let u: f32 = rng.gen();
            *di = 2.0 * u - 1.0;
        }
        let freq: f32 = 0.5 + 1.5 * rng.gen::<f32>();
        let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt().max(1e-6);
        for di in &mut d {
            *di *= freq / norm;
        }
        let phase: f32 = std::f32::consts::TAU * rng.gen::<f32>();
        *w = (d, phase);
    }
    let inv = [1.0 / dx as f32, 1.0 / dy as f32, 1.0 / dz as f32];
    let mut voxels = vec![0f32; dx * dy * dz];
    let mut idx = 0;
    for z in 0..dz {
        for y in 0..dy {
            for x in 0..dx {
                let p = [x as f32 * inv[0], y as f32 * inv[1], z as f32 * inv[2]];
                let mut t = 0f32;
                for (d, phase) in &waves {
                    let arg = std::f32::consts::TAU * (d[0] * p[0] + d[1] * p[1] + d[2] * p[2]);
                    t += (arg + phase).cos();
                }
                voxels[idx] = BACKGROUND_BASE + spec.background_texture_scale * (t / 3.0);
                idx += 1;
            }
        }
    }
    Volume {
        dims: spec.dims,
        spacing: [1.0; 3],
        voxels,
        unit: Unit::Normalized,
    }
}

fn sample_lesion(spec: &SyntheticSpec, class_id: usize, rng: &mut impl Rng) -> Lesion {
    let [lo, hi] = spec.lesion_radius_range;
    let mut radii = [0f32; 3];
    for r in &mut radii {
        let u: f32 = rng.gen();
        *r = lo + u * (hi - lo);
    }
    let mut center = [0f32; 3];
    for i in 0..3 {
        let margin = radii[i];
        let span = (spec.dims[i] - 1) as f32 - 2.0 * margin;
        let u: f32 = rng.gen();
        center[i] = margin + u * span;
    }
    Lesion {
        class_id,
        center,
        radii,
    }
}

fn inject(v: &mut Volume, lesion: &Lesion, delta: f32) {
    let [dx, dy, _dz] = v.dims;
    // bounding box keeps this O(lesion volume)
    let lohi = |i: usize| {
        let lo = (lesion.center[i] - lesion.radii[i]).floor().max(0.0) as usize;
        let hi = ((lesion.center[i] + lesion.radii[i]).ceil() as usize).min(v.dims[i] - 1);
        (lo, hi)
    };
    let (x0, x1) = lohi(0);
    let (y0, y1) = lohi(1);
    let (z0, z1) = lohi(2);
    for z in z0..=z1 {
        for y in y0..=y1 {
            for x in x0..=x1 {
                if lesion.contains(x, y, z) {
                    v.voxels[x + dx * (y + dy * z)] += delta;
                }
            }
        }
    }
}
