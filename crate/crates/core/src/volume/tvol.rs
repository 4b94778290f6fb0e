//! TVOL on-disk volume format.
//!
//! Little-endian layout: magic "TVL1" (4 bytes), dims x/y/z as three u32,
//! spacing x/y/z as three f32, one dtype byte (0 = 32-bit float), then the
//! raw voxel payload x-fastest. 29 bytes of header ahead of the payload.
//!
//! The unit is not stored: a payload lying entirely in [0, 1] reads back as
//! normalized, anything else as HU. Writers of HU data whose every voxel
//! happens to fall inside [0, 1] would see the unit flip on reload; real HU
//! ranges make this a non-issue.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Unit, Volume};
use crate::error::{Result, VoxError};

pub const MAGIC: &[u8; 4] = b"TVL1";
pub const DTYPE_F32: u8 = 0;

/// Serialize a volume to its TVOL byte representation.
pub fn encode_volume(v: &Volume) -> Result<Vec<u8>> {
    v.validate()?;
    let mut out = Vec::with_capacity(29 + 4 * v.voxels.len());
    out.extend_from_slice(MAGIC);
    for &d in &v.dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for &s in &v.spacing {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out.push(DTYPE_F32);
    for &x in &v.voxels {
        out.extend_from_slice(&x.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_volume(bytes: &[u8]) -> Result<Volume> {
    if bytes.len() < 29 {
        return Err(VoxError::format(format!(
            "file too short for TVOL header: {} bytes",
            bytes.len()
        )));
    }
    if &bytes[0..4] != MAGIC {
        return Err(VoxError::format(format!(
            "bad magic {:?}, expected {:?}",
            &bytes[0..4],
            MAGIC
        )));
    }
    let mut dims = [0usize; 3];
    for (i, d) in dims.iter_mut().enumerate() {
        let off = 4 + 4 * i;
        *d = u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as usize;
    }
    let mut spacing = [0f32; 3];
    for (i, s) in spacing.iter_mut().enumerate() {
        let off = 16 + 4 * i;
        *s = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    }
    let dtype = bytes[28];
    if dtype != DTYPE_F32 {
        return Err(VoxError::format(format!("unknown dtype code {dtype}")));
    }
    let count = dims[0] * dims[1] * dims[2];
    let payload = &bytes[29..];
    if payload.len() != 4 * count {
        return Err(VoxError::format(format!(
            "payload length mismatch: expected {} bytes for {} voxels, got {}",
            4 * count,
            count,
            payload.len()
        )));
    }
    let voxels: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let unit = if voxels.iter().all(|&x| (0.0..=1.0).contains(&x)) {
        Unit::Normalized
    } else {
        Unit::Hu
    };
    Volume::new(dims, spacing, voxels, unit)
}

pub fn write_volume(v: &Volume, path: impl AsRef<Path>) -> Result<()> {
    let bytes = encode_volume(v)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

pub fn read_volume(path: impl AsRef<Path>) -> Result<Volume> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode_volume(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_volume() -> Volume {
        Volume::new(
            [2, 2, 2],
            [1.0, 1.5, 2.0],
            vec![0.5; 8],
            Unit::Normalized,
        )
        .unwrap()
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let v = sample_volume();
        let back = decode_volume(&encode_volume(&v).unwrap()).unwrap();
        assert_eq!(v, back);
    }

    #[test]
    fn file_size_matches_format_arithmetic() {
        // 4 magic + 24 dims/spacing + 1 dtype byte + 4 bytes per voxel.
        let v = sample_volume();
        let bytes = encode_volume(&v).unwrap();
        assert_eq!(bytes.len(), 4 + 24 + 1 + 4 * v.voxel_count());
    }

    #[test]
    fn constant_half_payload_words_identical() {
        let v = sample_volume();
        let bytes = encode_volume(&v).unwrap();
        let words: Vec<[u8; 4]> = bytes[29..]
            .chunks_exact(4)
            .map(|c| c.try_into().unwrap())
            .collect();
        assert_eq!(words.len(), 8);
        assert!(words.iter().all(|w| *w == 0.5f32.to_le_bytes()));
    }

    #[test]
    fn bad_magic_is_format_error() {
        let mut bytes = encode_volume(&sample_volume()).unwrap();
        bytes[0..4].copy_from_slice(b"XXXX");
        let err = decode_volume(&bytes).unwrap_err();
        assert!(matches!(err, VoxError::Format(_)), "{err}");
    }

    #[test]
    fn truncated_payload_names_byte_counts() {
        let mut bytes = encode_volume(&sample_volume()).unwrap();
        bytes.truncate(bytes.len() - 4);
        let err = decode_volume(&bytes).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, VoxError::Format(_)));
        assert!(msg.contains("32") && msg.contains("28"), "{msg}");
    }

    #[test]
    fn unknown_dtype_is_format_error() {
        let mut bytes = encode_volume(&sample_volume()).unwrap();
        bytes[28] = 7;
        assert!(matches!(
            decode_volume(&bytes).unwrap_err(),
            VoxError::Format(_)
        ));
    }

    #[test]
    fn hu_payload_reads_back_as_hu() {
        let v = Volume::new([2, 1, 1], [1.0; 3], vec![-1000.0, 400.0], Unit::Hu).unwrap();
        let back = decode_volume(&encode_volume(&v).unwrap()).unwrap();
        assert_eq!(back.unit, Unit::Hu);
        assert_eq!(back, v);
    }
}
