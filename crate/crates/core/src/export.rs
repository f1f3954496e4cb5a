//! Byte-stable writers for rasters (binary PGM), tables (CSV) and point clouds
//! (ASCII PLY).
//!
//! Formats:
//!
//! * PGM: `P5\n{nx} {ny}\n255\n` followed by `nx·ny` bytes, row 0 first.
//! * CSV: one header line, comma separated, `\n` line ends, floats in shortest
//!   round-trip form.
//! * PLY: `ply`, `format ascii 1.0`, `element vertex {n}`, three
//!   `property float` lines for `x y z`, `end_header`, then one `x y z` line per
//!   vertex.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::dynamics::OrbitRecord;
use crate::error::{Error, Result};
use crate::fractal::{DimProfileEntry, EmbeddingPoint};
use crate::raster::Raster;

/// Affine map of `[lo, hi]` onto gray levels `0..=255`, clamped, rounded half up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorMap {
    pub lo: f64,
    pub hi: f64,
}

impl ColorMap {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "color map domain [{lo}, {hi}] is empty"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn purity() -> Self {
        Self { lo: 0.5, hi: 1.0 }
    }

    /// `[0, iters]`; negative entries (no cycle) map to white.
    pub fn cycle_entry(iters: usize) -> Self {
        Self {
            lo: 0.0,
            hi: iters.max(1) as f64,
        }
    }

    /// Non-finite values render as 255.
    pub fn level(&self, v: f64) -> u8 {
        if !v.is_finite() {
            return 255;
        }
        let t = ((v - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0);
        (t * 255.0 + 0.5).floor() as u8
    }

    pub fn quantize(&self, raster: &Raster<f64>) -> Raster<u8> {
        raster.map(|&v| self.level(v))
    }
}

/// Cycle-entry raster in gray levels; `-1` (no cycle) becomes 255.
pub fn quantize_cycle_entry(entry: &Raster<i32>, iters: usize) -> Raster<u8> {
    let cm = ColorMap::cycle_entry(iters);
    entry.map(|&e| if e < 0 { 255 } else { cm.level(e as f64) })
}

pub fn encode_pgm(raster: &Raster<u8>) -> Result<Vec<u8>> {
    if raster.is_empty() {
        return Err(Error::EmptyRaster);
    }
    let mut out = format!("P5\n{} {}\n255\n", raster.nx, raster.ny).into_bytes();
    out.extend_from_slice(&raster.data);
    Ok(out)
}

pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<Raster<u8>, String> {
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated header".into());
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|e| e.to_string())?);
    }
    if fields[0] != "P5" {
        return Err(format!("unsupported magic {:?}", fields[0]));
    }
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|e| format!("bad header field {s:?}: {e}"))
    };
    let (nx, ny, maxval) = (parse(fields[1])?, parse(fields[2])?, parse(fields[3])?);
    if maxval != 255 {
        return Err(format!("unsupported maxval {maxval}"));
    }
    // exactly one whitespace byte after maxval
    let payload = &bytes[pos + 1..];
    if payload.len() != nx * ny {
        return Err(format!(
            "payload has {} bytes, expected {}",
            payload.len(),
            nx * ny
        ));
    }
    Raster::from_vec(nx, ny, payload.to_vec()).map_err(|e| e.to_string())
}

pub fn write_pgm(raster: &Raster<u8>, path: &Path) -> Result<()> {
    let bytes = encode_pgm(raster)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_pgm(path: &Path) -> Result<Raster<u8>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes).map_err(|reason| Error::Format {
        path: path.to_path_buf(),
        reason,
    })
}

/// Quantizes `raster` through `colormap` and writes it.
pub fn write_pgm_mapped(raster: &Raster<f64>, colormap: &ColorMap, path: &Path) -> Result<()> {
    write_pgm(&colormap.quantize(raster), path)
}

/// Header plus rows, `\n` terminated.
pub fn encode_csv<R: AsRef<[String]>>(header: &[&str], rows: &[R]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.as_ref().join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv<R: AsRef<[String]>>(header: &[&str], rows: &[R], path: &Path) -> Result<()> {
    fs::write(path, encode_csv(header, rows)).map_err(|e| Error::io(path, e))
}

pub const ORBIT_COLUMNS: [&str; 8] = ["n", "a", "b", "c", "d", "population", "coherence", "purity"];
pub const DIM_PROFILE_COLUMNS: [&str; 3] = ["concurrence_sq", "dimension", "r2"];

pub fn orbit_rows(orbit: &OrbitRecord) -> Vec<Vec<String>> {
    orbit
        .states
        .iter()
        .zip(&orbit.observables)
        .enumerate()
        .map(|(n, (q, o))| {
            vec![
                n.to_string(),
                fmt_f64(q.a),
                fmt_f64(q.b),
                fmt_f64(q.c),
                fmt_f64(q.d),
                fmt_f64(o.population),
                fmt_f64(o.coherence),
                fmt_f64(o.purity),
            ]
        })
        .collect()
}

pub fn encode_orbit_csv(orbit: &OrbitRecord) -> String {
    encode_csv(&ORBIT_COLUMNS, &orbit_rows(orbit))
}

pub fn write_orbit_csv(orbit: &OrbitRecord, path: &Path) -> Result<()> {
    write_csv(&ORBIT_COLUMNS, &orbit_rows(orbit), path)
}

pub fn encode_dim_profile_csv(profile: &[DimProfileEntry]) -> String {
    let rows: Vec<Vec<String>> = profile
        .iter()
        .map(|e| {
            vec![
                fmt_f64(e.concurrence_sq),
                fmt_f64(e.dimension()),
                fmt_f64(e.r2()),
            ]
        })
        .collect();
    encode_csv(&DIM_PROFILE_COLUMNS, &rows)
}

pub fn write_dim_profile_csv(profile: &[DimProfileEntry], path: &Path) -> Result<()> {
    fs::write(path, encode_dim_profile_csv(profile)).map_err(|e| Error::io(path, e))
}

/// Parses a CSV written by [`encode_csv`] into its header and rows of floats.
pub fn parse_csv_f64(text: &str) -> std::result::Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or("missing header")?
        .split(',')
        .map(str::to_owned)
        .collect::<Vec<_>>();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|f| f.parse::<f64>().map_err(|e| format!("{f:?}: {e}")))
                .collect::<std::result::Result<Vec<_>, _>>()
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((header, rows))
}

/// Shortest decimal that parses back to `v`; `-0` prints as `0`.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        "0".to_owned()
    } else {
        v.to_string()
    }
}

pub fn encode_ply(points: &[EmbeddingPoint]) -> String {
    let mut out = String::with_capacity(96 + points.len() * 32);
    out.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", points.len());
    out.push_str("property float x\nproperty float y\nproperty float z\nend_header\n");
    for p in points {
        let _ = writeln!(out, "{} {} {}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z));
    }
    out
}

pub fn write_ply(points: &[EmbeddingPoint], path: &Path) -> Result<()> {
    fs::write(path, encode_ply(points)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{iterate, DephasingParams, System};
    use crate::quat::Quaternion;
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn pgm_two_by_two() {
        let r = Raster::from_vec(2, 2, vec![0.5, 1.0, 0.75, 0.5]).unwrap();
        let bytes = encode_pgm(&ColorMap::purity().quantize(&r)).unwrap();
        assert_eq!(&bytes[..11], b"P5\n2 2\n255\n");
        assert_eq!(&bytes[11..], &[0, 255, 128, 0]);
    }

    #[test]
    fn pgm_rejects_empty() {
        let err = encode_pgm(&Raster::filled(0, 3, 0u8)).unwrap_err();
        assert_eq!(err.to_string(), "empty raster");
    }

    #[test]
    fn pgm_size() {
        let bytes = encode_pgm(&Raster::filled(256, 256, 7u8)).unwrap();
        assert_eq!(bytes.len(), "P5\n256 256\n255\n".len() + 65_536);
    }

    #[test]
    fn colormap_levels() {
        let cm = ColorMap::purity();
        assert_eq!(cm.level(0.2), 0);
        assert_eq!(cm.level(1.3), 255);
        assert_eq!(cm.level(f64::NAN), 255);
        let entry = Raster::from_vec(3, 1, vec![-1, 0, 100]).unwrap();
        assert_eq!(quantize_cycle_entry(&entry, 100).data, vec![255, 0, 255]);
        assert!(ColorMap::new(1.0, 1.0).is_err());
    }

    #[test]
    fn orbit_csv_of_mixed_state() {
        let sys =
            System::Dephasing(DephasingParams::new(0.0, 0.01, Complex64::new(1.0, 0.1)).unwrap());
        let orbit = iterate(Quaternion::J, &sys, 3);
        let text = encode_orbit_csv(&orbit);
        let (header, rows) = parse_csv_f64(&text).unwrap();
        assert_eq!(header, ORBIT_COLUMNS);
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| (r[7] - 0.5).abs() < 1e-15));
    }

    #[test]
    fn empty_tables() {
        let rows: Vec<Vec<String>> = Vec::new();
        assert_eq!(
            encode_csv(&DIM_PROFILE_COLUMNS, &rows),
            "concurrence_sq,dimension,r2\n"
        );
        assert_eq!(encode_dim_profile_csv(&[]), "concurrence_sq,dimension,r2\n");
    }

    #[test]
    fn ply_examples() {
        let one = encode_ply(&[EmbeddingPoint::new(1.0, 0.0, -1.0)]);
        assert_eq!(
            one,
            "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n\
             property float z\nend_header\n1 0 -1\n"
        );
        assert!(encode_ply(&[]).contains("element vertex 0\n"));
        assert!(encode_ply(&[EmbeddingPoint::new(-0.0, 0.5, -0.0)]).ends_with("0 0.5 0\n"));
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.pgm");
        let r = Raster::from_fn(5, 3, |c, r| (c * 40 + r) as u8);
        write_pgm(&r, &path).unwrap();
        assert_eq!(read_pgm(&path).unwrap(), r);
        let bad = dir.path().join("missing").join("x.pgm");
        let err = write_pgm(&r, &bad).unwrap_err();
        assert!(err.to_string().contains("missing"));
    }

    proptest! {
        #[test]
        fn pgm_round_trips(nx in 1usize..20, ny in 1usize..20, seed in any::<u64>()) {
            let r = Raster::from_fn(nx, ny, |c, r| (seed.rotate_left((c * 7 + r) as u32) & 0xff) as u8);
            prop_assert_eq!(decode_pgm(&encode_pgm(&r).unwrap()).unwrap(), r);
        }

        #[test]
        fn floats_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
            let back: f64 = fmt_f64(v).parse().unwrap();
            prop_assert!(back == v);
        }

        #[test]
        fn colormap_is_monotone(x in 0.0..1.5f64, y in 0.0..1.5f64) {
            let cm = ColorMap::purity();
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            prop_assert!(cm.level(lo) <= cm.level(hi));
        }
    }
}
