//! Bit-exact raster persistence and PNG export.
//!
//! The canonical format is raw little-endian float32, row-major and
//! band-sequential, with a JSON sidecar `<path>.json` holding the
//! [`RasterHeader`]. Persistence is the only part of the crate touching the
//! filesystem; PNG export is for human inspection only and never feeds back
//! into computation.

use crate::error::{Error, Result};
use crate::image::{OpticalGuide, Raster, SarImage};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

pub const DTYPE_F32LE: &str = "f32le";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterHeader {
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    pub dtype: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub looks: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_names: Option<Vec<String>>,
}

impl RasterHeader {
    pub fn single_band(width: usize, height: usize) -> Self {
        Self { width, height, bands: 1, dtype: DTYPE_F32LE.into(), looks: None, band_names: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.bands == 0 {
            return Err(Error::Config("header dimensions and bands must be positive".into()));
        }
        if self.dtype != DTYPE_F32LE {
            return Err(Error::Config(format!("unsupported dtype {:?}, expected {DTYPE_F32LE:?}", self.dtype)));
        }
        if let Some(names) = &self.band_names {
            if names.len() != self.bands {
                return Err(Error::Config("band_names length must equal the band count".into()));
            }
        }
        Ok(())
    }

    pub fn samples(&self) -> usize {
        self.width * self.height * self.bands
    }
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".json");
    std::path::PathBuf::from(s)
}

/// Write payload and sidecar. Rejects non-finite samples so a later
/// [`read_raster`] always round-trips bit-identically.
pub fn write_raster(path: impl AsRef<Path>, header: &RasterHeader, data: &[f32]) -> Result<()> {
    let path = path.as_ref();
    header.validate()?;
    if data.len() != header.samples() {
        return Err(Error::Format {
            path: path.into(),
            reason: format!("payload {} samples, header declares {}", data.len(), header.samples()),
        });
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::format(path, "refusing to write non-finite samples"));
    }
    let mut bytes = Vec::with_capacity(data.len() * 4);
    for v in data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let json = serde_json::to_vec_pretty(header).expect("header serializes");
    fs::write(&side, json).map_err(|e| Error::io(side.clone(), e))?;
    Ok(())
}

/// Read payload plus sidecar, verifying size and finiteness.
pub fn read_raster(path: impl AsRef<Path>) -> Result<(RasterHeader, Vec<f32>)> {
    let path = path.as_ref();
    let side = sidecar_path(path);
    let header_bytes = fs::read(&side).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::format(path, format!("missing sidecar {}", side.display())),
        _ => Error::io(side.clone(), e),
    })?;
    let header: RasterHeader = serde_json::from_slice(&header_bytes)
        .map_err(|e| Error::format(&side, format!("corrupt sidecar: {e}")))?;
    header.validate()?;
    let payload = fs::read(path).map_err(|e| Error::io(path, e))?;
    let expect = header.samples() * 4;
    if payload.len() != expect {
        return Err(Error::format(
            path,
            format!("payload is {} bytes, header implies {expect}", payload.len()),
        ));
    }
    let mut data = Vec::with_capacity(header.samples());
    for chunk in payload.chunks_exact(4) {
        data.push(f32::from_le_bytes(chunk.try_into().expect("4-byte chunk")));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::format(path, "payload contains NaN or infinite samples"));
    }
    Ok((header, data))
}

/// Persist a SAR image (single band, look count in the header when finite).
pub fn write_sar(path: impl AsRef<Path>, sar: &SarImage) -> Result<()> {
    let header = RasterHeader {
        looks: sar.looks().is_finite().then_some(sar.looks()),
        ..RasterHeader::single_band(sar.width(), sar.height())
    };
    let data: Vec<f32> = sar.pixels().iter().map(|&p| p as f32).collect();
    write_raster(path, &header, &data)
}

/// Load a SAR image; `looks_override` wins over the header value.
pub fn read_sar(path: impl AsRef<Path>, looks_override: Option<f64>) -> Result<SarImage> {
    let path = path.as_ref();
    let (header, data) = read_raster(path)?;
    if header.bands != 1 {
        return Err(Error::format(path, format!("SAR input must be single-band, found {}", header.bands)));
    }
    let looks = looks_override.or(header.looks).ok_or_else(|| {
        Error::Config(format!(
            "{} declares no look count; pass it explicitly (e.g. --looks 1)",
            path.display()
        ))
    })?;
    SarImage::new(header.width, header.height, looks, data.into_iter().map(f64::from).collect())
}

pub fn write_guide(path: impl AsRef<Path>, guide: &OpticalGuide) -> Result<()> {
    let header = RasterHeader {
        width: guide.width(),
        height: guide.height(),
        bands: guide.bands(),
        dtype: DTYPE_F32LE.into(),
        looks: None,
        band_names: None,
    };
    let mut data = Vec::with_capacity(header.samples());
    for b in 0..guide.bands() {
        data.extend(guide.plane(b).iter().map(|&v| v as f32));
    }
    write_raster(path, &header, &data)
}

pub fn read_guide(path: impl AsRef<Path>) -> Result<OpticalGuide> {
    let (header, data) = read_raster(path)?;
    OpticalGuide::new(
        header.width,
        header.height,
        header.bands,
        data.into_iter().map(f64::from).collect(),
    )
}

pub fn write_single_band(path: impl AsRef<Path>, raster: &Raster) -> Result<()> {
    let header = RasterHeader::single_band(raster.width, raster.height);
    let data: Vec<f32> = raster.data.iter().map(|&v| v as f32).collect();
    write_raster(path, &header, &data)
}

/// Rendering mode for [`export_png`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PngMode {
    /// Global min-max stretch.
    Linear,
    /// Log stretch mapping `median * 10^(-span/20) ..= median * 10^(+span/20)`
    /// to black..white; nonpositive pixels clamp to black.
    LogDb { span_db: f64 },
}

/// 8-bit PNG export of a 1-band (gray) or 3-band (RGB) raster.
pub fn export_png(
    path: impl AsRef<Path>,
    data: &[f64],
    width: usize,
    height: usize,
    bands: usize,
    mode: PngMode,
) -> Result<()> {
    let path = path.as_ref();
    if bands != 1 && bands != 3 {
        return Err(Error::Config(format!("PNG export supports 1 or 3 bands, got {bands}")));
    }
    if data.len() != width * height * bands {
        return Err(Error::Dimension(format!(
            "payload {} does not match {bands} bands of {width}x{height}",
            data.len()
        )));
    }
    let to_byte: Box<dyn Fn(f64) -> u8> = match mode {
        PngMode::Linear => {
            let lo = data.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                let scale = 255.0 / (hi - lo);
                Box::new(move |v| ((v - lo) * scale).round().clamp(0.0, 255.0) as u8)
            } else {
                Box::new(|_| 128)
            }
        }
        PngMode::LogDb { span_db } => {
            let mut sorted: Vec<f64> = data.to_vec();
            sorted.sort_unstable_by(f64::total_cmp);
            let median = sorted[sorted.len() / 2];
            if median > 0.0 && span_db > 0.0 {
                let lo = median.log10() - span_db / 20.0;
                let hi = median.log10() + span_db / 20.0;
                let scale = 255.0 / (hi - lo);
                Box::new(move |v| {
                    if v <= 0.0 {
                        0
                    } else {
                        ((v.log10() - lo) * scale).round().clamp(0.0, 255.0) as u8
                    }
                })
            } else {
                Box::new(|_| 0)
            }
        }
    };

    let n = width * height;
    let mut buf = vec![0u8; n * bands];
    match bands {
        1 => {
            for (dst, &v) in buf.iter_mut().zip(data) {
                *dst = to_byte(v);
            }
        }
        _ => {
            // band-sequential input, interleaved PNG
            for i in 0..n {
                for b in 0..3 {
                    buf[i * 3 + b] = to_byte(data[b * n + i]);
                }
            }
        }
    }
    let color = if bands == 1 { image::ExtendedColorType::L8 } else { image::ExtendedColorType::Rgb8 };
    image::save_buffer(path, &buf, width as u32, height as u32, color)
        .map_err(|e| Error::format(path, format!("PNG encode failed: {e}")))
}

/// Fixed colormap stops for the predictor-count export: dark blue at one
/// predictor, through cyan and yellow, to red at the maximum.
const COUNT_STOPS: [[u8; 3]; 4] = [[0, 0, 112], [0, 160, 255], [255, 255, 0], [255, 0, 0]];

fn count_color(t: f64) -> [u8; 3] {
    let x = t.clamp(0.0, 1.0) * (COUNT_STOPS.len() - 1) as f64;
    let i = (x as usize).min(COUNT_STOPS.len() - 2);
    let f = x - i as f64;
    let (a, b) = (COUNT_STOPS[i], COUNT_STOPS[i + 1]);
    [
        (a[0] as f64 + f * (b[0] as f64 - a[0] as f64)).round() as u8,
        (a[1] as f64 + f * (b[1] as f64 - a[1] as f64)).round() as u8,
        (a[2] as f64 + f * (b[2] as f64 - a[2] as f64)).round() as u8,
    ]
}

/// False-color export of the predictor-count map. Counts run from 1 (dark
/// blue) to `max_count` (red); zero marks non-anchor pixels and renders
/// black.
pub fn export_count_map_png(
    path: impl AsRef<Path>,
    counts: &[u32],
    width: usize,
    height: usize,
    max_count: u32,
) -> Result<()> {
    let path = path.as_ref();
    if counts.len() != width * height {
        return Err(Error::Dimension(format!(
            "count map {} does not match {width}x{height}",
            counts.len()
        )));
    }
    if max_count == 0 {
        return Err(Error::Config("max_count must be positive".into()));
    }
    let denom = (max_count.max(2) - 1) as f64;
    let mut buf = vec![0u8; counts.len() * 3];
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let rgb = count_color((c.min(max_count) - 1) as f64 / denom);
        buf[i * 3..i * 3 + 3].copy_from_slice(&rgb);
    }
    image::save_buffer(path, &buf, width as u32, height as u32, image::ExtendedColorType::Rgb8)
        .map_err(|e| Error::format(path, format!("PNG encode failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn noise(n: usize, seed: u64) -> Vec<f32> {
        let mut state = seed.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
        (0..n)
            .map(|_| {
                state = state.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
                (state >> 40) as f32 / (1u64 << 24) as f32
            })
            .collect()
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("img.f32");
        let header = RasterHeader {
            looks: Some(1.0),
            band_names: Some(vec!["intensity".into()]),
            ..RasterHeader::single_band(64, 64)
        };
        let data = noise(64 * 64, 7);
        write_raster(&path, &header, &data).unwrap();
        let (h2, d2) = read_raster(&path).unwrap();
        assert_eq!(header, h2);
        assert_eq!(data.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                   d2.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn three_band_round_trip_preserves_band_order() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("guide.f32");
        let guide = OpticalGuide::new(
            4,
            3,
            3,
            (0..36).map(|i| i as f64 / 36.0).collect(),
        )
        .unwrap();
        write_guide(&path, &guide).unwrap();
        let back = read_guide(&path).unwrap();
        for b in 0..3 {
            for (a, g) in back.plane(b).iter().zip(guide.plane(b)) {
                assert_eq!(*a, *g as f32 as f64);
            }
        }
    }

    #[test]
    fn size_mismatch_is_detected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("short.f32");
        let header = RasterHeader::single_band(8, 8);
        write_raster(&path, &header, &noise(64, 1)).unwrap();
        // truncate payload behind the header's back
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 4]).unwrap();
        assert!(matches!(read_raster(&path), Err(Error::Format { .. })));
    }

    #[test]
    fn missing_or_corrupt_sidecar() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("orphan.f32");
        fs::write(&path, [0u8; 16]).unwrap();
        assert!(matches!(read_raster(&path), Err(Error::Format { .. })));
        fs::write(sidecar_path(&path), b"{not json").unwrap();
        assert!(matches!(read_raster(&path), Err(Error::Format { .. })));
    }

    #[test]
    fn non_finite_payload_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("nan.f32");
        let header = RasterHeader::single_band(2, 1);
        assert!(write_raster(&path, &header, &[1.0, f32::NAN]).is_err());
        // forge a NaN payload on disk
        write_raster(&path, &header, &[1.0, 2.0]).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes[4..8].copy_from_slice(&f32::NAN.to_le_bytes());
        fs::write(&path, bytes).unwrap();
        assert!(matches!(read_raster(&path), Err(Error::Format { .. })));
    }

    #[test]
    fn sar_round_trip_keeps_looks() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("sar.f32");
        let sar = SarImage::new(5, 4, 3.0, (1..=20).map(f64::from).collect()).unwrap();
        write_sar(&path, &sar).unwrap();
        let back = read_sar(&path, None).unwrap();
        assert_eq!(back.looks(), 3.0);
        assert_eq!(back.pixels(), sar.pixels());
        let overridden = read_sar(&path, Some(2.0)).unwrap();
        assert_eq!(overridden.looks(), 2.0);
    }

    #[test]
    fn sar_without_looks_needs_override() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("clean.f32");
        let clean = SarImage::constant(4, 4, f64::INFINITY, 1.0).unwrap();
        write_sar(&path, &clean).unwrap();
        assert!(read_sar(&path, None).is_err());
        assert_eq!(read_sar(&path, Some(1.0)).unwrap().looks(), 1.0);
    }

    #[test]
    fn constant_png_is_uniform_gray() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("flat.png");
        export_png(&path, &vec![5.0; 36], 6, 6, 1, PngMode::Linear).unwrap();
        let img = image::open(&path).unwrap().to_luma8();
        assert!(img.pixels().all(|p| p.0[0] == 128));
    }

    #[test]
    fn log_mode_clamps_zeros() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("log.png");
        let mut data = vec![1.0; 25];
        data[7] = 0.0;
        data[12] = 100.0;
        export_png(&path, &data, 5, 5, 1, PngMode::LogDb { span_db: 40.0 }).unwrap();
        let img = image::open(&path).unwrap().to_luma8();
        assert_eq!(img.get_pixel(2, 1).0[0], 0); // index 7 = (2,1)
        assert!(img.get_pixel(2, 2).0[0] > 200);
    }

    #[test]
    fn count_map_export_uses_fixed_stops() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("counts.png");
        let counts = vec![0u32, 1, 760, 1521];
        export_count_map_png(&path, &counts, 4, 1, 1521).unwrap();
        let img = image::open(&path).unwrap().to_rgb8();
        assert_eq!(img.get_pixel(0, 0).0, [0, 0, 0]);
        assert_eq!(img.get_pixel(1, 0).0, [0, 0, 112]);
        assert_eq!(img.get_pixel(3, 0).0, [255, 0, 0]);
        assert!(export_png(&path, &[1.0; 8], 2, 2, 2, PngMode::Linear).is_err());
    }
}
