//! Raw little-endian arrays with JSON sidecars, CSV study tables and PGM previews.
//!
//! An array stored at `path` keeps its values in `path` and its metadata in
//! `path.json`.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{ConvergenceRecord, ConvergenceStudy};
use crate::data::{Image, Sinogram};
use crate::error::{Error, Result};
use crate::geometry::{AngleKind, AngleSet, DetectorGrid, FanGeometry, ImageGrid};

/// Either array type, as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum Array {
    Image(Image),
    Sinogram(Sinogram),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ArrayKind {
    Image,
    Sinogram,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct FanSidecar {
    #[serde(rename = "R_E")]
    source_radius: f64,
    #[serde(rename = "R")]
    source_detector: f64,
    #[serde(rename = "W")]
    width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Sidecar {
    kind: ArrayKind,
    /// `[N, M]` for images, `[P, Q]` for sinograms.
    dims: [usize; 2],
    #[serde(skip_serializing_if = "Option::is_none", default)]
    delta_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    delta_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    detector_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    angle_set: Option<AngleKind>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    angles: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    geometry: Option<FanSidecar>,
}

/// Path of the metadata file belonging to `path`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = OsString::from(path.as_os_str());
    name.push(".json");
    PathBuf::from(name)
}

pub fn write_image(path: &Path, image: &Image) -> Result<()> {
    let grid = image.grid();
    let sidecar = Sidecar {
        kind: ArrayKind::Image,
        dims: [grid.n(), grid.m()],
        delta_x: Some(grid.delta_x()),
        delta_s: None,
        detector_width: None,
        angle_set: None,
        angles: None,
        weights: None,
        geometry: None,
    };
    write_pair(path, &sidecar, image.values())
}

pub fn write_sinogram(path: &Path, sino: &Sinogram) -> Result<()> {
    let detector = sino.detector();
    let angles = sino.angles();
    let sidecar = Sidecar {
        kind: ArrayKind::Sinogram,
        dims: [detector.count(), angles.len()],
        delta_x: None,
        delta_s: Some(detector.delta_s()),
        detector_width: Some(detector.width()),
        angle_set: Some(angles.kind()),
        angles: Some(angles.angles().to_vec()),
        weights: Some(angles.weights().to_vec()),
        geometry: sino.fan().map(|geo| FanSidecar {
            source_radius: geo.source_radius(),
            source_detector: geo.source_detector(),
            width: geo.width(),
        }),
    };
    write_pair(path, &sidecar, sino.values())
}

pub fn write_array(path: &Path, array: &Array) -> Result<()> {
    match array {
        Array::Image(image) => write_image(path, image),
        Array::Sinogram(sino) => write_sinogram(path, sino),
    }
}

fn write_pair(path: &Path, sidecar: &Sidecar, values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("refusing to write non-finite values".into()));
    }
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;
    let json = serde_json::to_string_pretty(sidecar).expect("sidecar serializes");
    fs::write(sidecar_path(path), json)?;
    Ok(())
}

pub fn read_array(path: &Path) -> Result<Array> {
    let meta_path = sidecar_path(path);
    let text = fs::read_to_string(&meta_path)?;
    let sidecar: Sidecar = serde_json::from_str(&text).map_err(|e| Error::Sidecar {
        path: meta_path.clone(),
        reason: e.to_string(),
    })?;
    let malformed = |reason: String| Error::Sidecar {
        path: meta_path.clone(),
        reason,
    };
    let missing = |field: &str| malformed(format!("missing field `{field}`"));

    let [a, b] = sidecar.dims;
    let values = read_values(path, a.checked_mul(b).ok_or_else(|| malformed("dims overflow".into()))?)?;
    match sidecar.kind {
        ArrayKind::Image => {
            let delta_x = sidecar.delta_x.ok_or_else(|| missing("delta_x"))?;
            let grid = ImageGrid::new(a, b, delta_x).map_err(|e| malformed(e.to_string()))?;
            Ok(Array::Image(Image::from_values(grid, values)?))
        }
        ArrayKind::Sinogram => {
            let kind = sidecar.angle_set.ok_or_else(|| missing("angle_set"))?;
            let angles = sidecar.angles.ok_or_else(|| missing("angles"))?;
            let weights = sidecar.weights.ok_or_else(|| missing("weights"))?;
            if angles.len() != b {
                return Err(malformed(format!("{} angles for Q = {b}", angles.len())));
            }
            let angles = AngleSet::from_parts(kind, angles, weights).map_err(|e| malformed(e.to_string()))?;
            let width = sidecar.detector_width.ok_or_else(|| missing("detector_width"))?;
            match sidecar.geometry {
                Some(fan) => {
                    let geo = FanGeometry::new(fan.source_radius, fan.source_detector, a)
                        .map_err(|e| malformed(e.to_string()))?;
                    if geo.width() != width || geo.width() != fan.width {
                        return Err(malformed(format!(
                            "detector width {width} does not match the fanbeam geometry ({})",
                            geo.width()
                        )));
                    }
                    Ok(Array::Sinogram(Sinogram::fan_from_values(geo, angles, values)?))
                }
                None => {
                    let detector = DetectorGrid::new(a, width).map_err(|e| malformed(e.to_string()))?;
                    Ok(Array::Sinogram(Sinogram::from_values(detector, angles, values)?))
                }
            }
        }
    }
}

pub fn read_image(path: &Path) -> Result<Image> {
    match read_array(path)? {
        Array::Image(image) => Ok(image),
        Array::Sinogram(_) => Err(Error::Sidecar {
            path: sidecar_path(path),
            reason: "expected an image, found a sinogram".into(),
        }),
    }
}

pub fn read_sinogram(path: &Path) -> Result<Sinogram> {
    match read_array(path)? {
        Array::Sinogram(sino) => Ok(sino),
        Array::Image(_) => Err(Error::Sidecar {
            path: sidecar_path(path),
            reason: "expected a sinogram, found an image".into(),
        }),
    }
}

fn read_values(path: &Path, count: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path)?;
    let expected = count as u64 * 8;
    if bytes.len() as u64 != expected {
        return Err(Error::Length {
            path: path.to_path_buf(),
            expected,
            actual: bytes.len() as u64,
        });
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

pub const CSV_HEADER: &str = "P,N,Q,delta_s,l2_error_full,l2_error_worst_projection,wall_time_s";

/// Writes one row per record, then each comment line prefixed with `# `.
pub fn write_csv_records(path: &Path, records: &[ConvergenceRecord], comments: &[String]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.detectors,
            r.size,
            r.angles,
            significant(r.delta_s),
            significant(r.l2_error_full),
            significant(r.l2_error_worst_projection),
            significant(r.wall_time)
        )?;
    }
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    out.flush()?;
    Ok(())
}

/// Slope summary lines for [`write_csv_records`].
pub fn slope_comments(study: &ConvergenceStudy) -> Vec<String> {
    let mut lines = Vec::new();
    if let Some(slope) = study.fitted_slope {
        lines.push(format!("fitted_slope_full={}", significant(slope)));
    }
    for (k, slope) in study.pair_slopes.iter().enumerate() {
        let (a, b) = (&study.records[k], &study.records[k + 1]);
        lines.push(format!(
            "pair_slope_full P={}->{}: {}",
            a.detectors,
            b.detectors,
            significant(*slope)
        ));
    }
    lines
}

/// Decimal notation with 12 significant digits.
pub fn significant(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Binary 16-bit PGM, min-max normalized. Images put `i` across and `j` down;
/// sinograms put the angle across and the detector down.
pub fn export_pgm(path: &Path, array: &Array) -> Result<()> {
    let (width, height, values): (usize, usize, Vec<f64>) = match array {
        Array::Image(image) => (image.grid().n(), image.grid().m(), image.values().to_vec()),
        Array::Sinogram(sino) => {
            let (p, q) = (sino.detector().count(), sino.angles().len());
            let transposed = (0..p).flat_map(|pp| (0..q).map(move |qq| (pp, qq))).map(|(pp, qq)| sino.get(pp, qq)).collect();
            (q, p, transposed)
        }
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "P5\n{width} {height}\n65535\n")?;
    for v in values {
        let level: u16 = if max > min {
            ((v - min) / (max - min) * 65535.0).round() as u16
        } else {
            32768
        };
        out.write_all(&level.to_be_bytes())?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pgm_levels(path: &Path) -> (String, Vec<u16>) {
        let bytes = fs::read(path).unwrap();
        // Header is three newline-terminated lines.
        let mut newlines = 0;
        let mut split = 0;
        for (k, &b) in bytes.iter().enumerate() {
            if b == b'\n' {
                newlines += 1;
                if newlines == 3 {
                    split = k + 1;
                    break;
                }
            }
        }
        let header = String::from_utf8(bytes[..split].to_vec()).unwrap();
        let levels = bytes[split..].chunks(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect();
        (header, levels)
    }

    #[test]
    fn image_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img");
        let grid = ImageGrid::new(7, 5, 0.1 + 0.2).unwrap();
        let image = Image::from_fn(grid, |i, j| (i as f64 * 0.1).sin() / (j as f64 + 0.3));
        write_image(&path, &image).unwrap();
        let back = read_image(&path).unwrap();
        assert_eq!(back.grid(), image.grid());
        for (a, b) in back.values().iter().zip(image.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn sparse_sidecar_records_kind_and_weights() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sino");
        let angles = AngleSet::sparse(vec![0.1, 0.7, 2.0]).unwrap();
        let sino = Sinogram::zeros(DetectorGrid::unit(4).unwrap(), angles);
        write_sinogram(&path, &sino).unwrap();
        let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(sidecar_path(&path)).unwrap()).unwrap();
        assert_eq!(json["kind"], "sinogram");
        assert_eq!(json["angle_set"]["kind"], "sparse");
        assert_eq!(json["weights"], serde_json::json!([1.0, 1.0, 1.0]));
        assert_eq!(read_sinogram(&path).unwrap(), sino);
    }

    #[test]
    fn fan_sinogram_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fan");
        let geo = FanGeometry::new(3.0, 6.0, 5).unwrap();
        let angles = AngleSet::full_uniform(3, 0.25, 2.0 * PI).unwrap();
        let values = (0..15).map(|k| k as f64 / 7.0).collect();
        let sino = Sinogram::fan_from_values(geo, angles, values).unwrap();
        write_sinogram(&path, &sino).unwrap();
        let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(sidecar_path(&path)).unwrap()).unwrap();
        assert_eq!(json["geometry"]["R_E"], 3.0);
        assert_eq!(read_sinogram(&path).unwrap(), sino);
    }

    #[test]
    fn truncated_file_reports_sizes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img");
        write_image(&path, &Image::zeros(ImageGrid::new(3, 2, 1.0).unwrap())).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..40]).unwrap();
        match read_array(&path) {
            Err(Error::Length { expected, actual, .. }) => assert_eq!((expected, actual), (48, 40)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x");
        fs::write(&path, [0u8; 8]).unwrap();
        fs::write(sidecar_path(&path), "{\"kind\": \"image\"").unwrap();
        assert!(matches!(read_array(&path), Err(Error::Sidecar { .. })));
        fs::write(sidecar_path(&path), "{\"kind\": \"image\", \"dims\": [1, 1]}").unwrap();
        assert!(matches!(read_array(&path), Err(Error::Sidecar { .. })));
    }

    #[test]
    fn wrong_kind_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img");
        write_image(&path, &Image::zeros(ImageGrid::new(1, 1, 1.0).unwrap())).unwrap();
        assert!(read_sinogram(&path).is_err());
    }

    fn record(p: usize) -> ConvergenceRecord {
        ConvergenceRecord {
            detectors: p,
            size: p,
            angles: p / 10,
            delta_s: 2.0 / p as f64,
            l2_error_full: 0.0123456789012345,
            l2_error_worst_projection: 1234.5,
            wall_time: 0.5,
        }
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv_records(&path, &[], &[]).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), format!("{CSV_HEADER}\n"));

        let records = vec![record(50), record(100), record(200)];
        write_csv_records(&path, &records, &["fitted_slope_full=1.0".into()]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "50,50,5,0.0400000000000,0.0123456789012,1234.50000000,0.500000000000");
        assert_eq!(lines[4], "# fitted_slope_full=1.0");
    }

    #[test]
    fn significant_digits() {
        assert_eq!(significant(1.0), "1.00000000000");
        assert_eq!(significant(-0.000123), "-0.000123000000000");
        assert_eq!(significant(0.0), "0");
        assert_eq!(significant(123456789012345.0), "123456789012345");
    }

    #[test]
    fn pgm_examples() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.pgm");
        let grid = ImageGrid::new(2, 2, 1.0).unwrap();
        let image = Image::from_values(grid, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        export_pgm(&path, &Array::Image(image)).unwrap();
        let (header, levels) = pgm_levels(&path);
        assert_eq!(header, "P5\n2 2\n65535\n");
        assert_eq!(levels, vec![0, 65535, 65535, 0]);

        let flat = Image::from_fn(grid, |_, _| 3.5);
        export_pgm(&path, &Array::Image(flat)).unwrap();
        assert_eq!(pgm_levels(&path).1, vec![32768; 4]);
    }

    #[test]
    fn pgm_sinogram_is_transposed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.pgm");
        // P = 2 detectors, Q = 3 angles; value = q.
        let sino = Sinogram::from_values(
            DetectorGrid::unit(2).unwrap(),
            AngleSet::half_turn(3).unwrap(),
            vec![0.0, 0.0, 1.0, 1.0, 2.0, 2.0],
        )
        .unwrap();
        export_pgm(&path, &Array::Sinogram(sino)).unwrap();
        let (header, levels) = pgm_levels(&path);
        assert_eq!(header, "P5\n3 2\n65535\n");
        assert_eq!(levels, vec![0, 32768, 65535, 0, 32768, 65535]);
    }
}
