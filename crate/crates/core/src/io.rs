//! Plain-text and netpbm export of images, masks and Fourier data.

use std::io::Write;

use serde::Serialize;

use crate::edge_detection::BinaryEdgeMap;
use crate::error::{invalid, Result};
use crate::grid::ImageVector;
use crate::masking::RegularizationMask;
use crate::sampling::{FourierData, FrequencySet};

/// Writes a 1D image as `x,value` rows or a 2D image as a matrix with one
/// row per `x` index.
pub fn write_image_csv<W: Write>(image: &ImageVector, out: W) -> Result<()> {
    let grid = image.grid;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    if grid.dims() == 1 {
        w.write_record(["x", "value"])?;
        for (i, v) in image.data.iter().enumerate() {
            w.write_record([grid.coord(i).to_string(), v.to_string()])?;
        }
    } else {
        for row in image.data.chunks(grid.n()) {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Maps `image` onto 16-bit gray levels over `[lo, hi]` (clamped) and writes
/// a binary PGM. 1D images are written as a single row. Pixel `(i, j)` is
/// placed at column `i`, row `n - 1 - j`, so `y` increases upwards.
pub fn write_pgm16<W: Write>(image: &ImageVector, lo: f64, hi: f64, mut out: W) -> Result<()> {
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return invalid(format!("PGM range must satisfy lo < hi, got [{lo}, {hi}]"));
    }
    let level = |v: f64| -> u16 {
        let t = if v.is_nan() { 0.0 } else { ((v - lo) / (hi - lo)).clamp(0.0, 1.0) };
        (t * 65535.0).round() as u16
    };
    let n = image.grid.n();
    let (width, height) = if image.grid.dims() == 1 { (n, 1) } else { (n, n) };
    write!(out, "P5\n{width} {height}\n65535\n")?;
    let mut bytes = Vec::with_capacity(2 * width * height);
    for r in 0..height {
        for c in 0..width {
            let v = if height == 1 { image.data[c] } else { image.at(c, n - 1 - r) };
            bytes.extend_from_slice(&level(v).to_be_bytes());
        }
    }
    out.write_all(&bytes)?;
    Ok(())
}

/// PGM over the data's own min/max range (a constant image maps to black).
pub fn write_pgm16_auto<W: Write>(image: &ImageVector, out: W) -> Result<()> {
    let lo = image.data.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = image.data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return invalid("image contains no finite values");
    }
    let hi = if hi > lo { hi } else { lo + 1.0 };
    write_pgm16(image, lo, hi, out)
}

/// Writes a 0/1 map as an ASCII PBM (1 = black). `bits[i * ny + j]` is
/// shown at column `i`, row `ny - 1 - j`, matching [`write_pgm16`]; use
/// `ny = 1` for 1D maps.
pub fn write_pbm<W: Write>(bits: &[u8], nx: usize, ny: usize, mut out: W) -> Result<()> {
    if bits.len() != nx * ny || nx == 0 || ny == 0 {
        return invalid(format!("{} bits for a {nx} x {ny} map", bits.len()));
    }
    writeln!(out, "P1\n{nx} {ny}")?;
    for r in 0..ny {
        let line: Vec<&str> = (0..nx).map(|c| if bits[c * ny + (ny - 1 - r)] != 0 { "1" } else { "0" }).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn write_binary_map<W: Write>(map: &BinaryEdgeMap, out: W) -> Result<()> {
    let n = map.grid.n();
    let ny = if map.grid.dims() == 1 { 1 } else { n };
    write_pbm(&map.indicator, n, ny, out)
}

/// Writes each mask of `mask` as a PBM with the zeroed (unregularized) rows
/// in black. Returns one buffer per mask.
pub fn mask_pbms(mask: &RegularizationMask, n: usize) -> Result<Vec<Vec<u8>>> {
    let mut out = Vec::new();
    for (a, m) in mask.masks.iter().enumerate() {
        let bits: Vec<u8> = m.iter().map(|&v| u8::from(v == 0.0)).collect();
        let (nx, ny) = match (mask.dims, a) {
            (1, _) => (m.len(), 1),
            // M^x: rows of differences along x, full length along y
            (_, 0) => (m.len() / n, n),
            _ => (n, m.len() / n),
        };
        let mut buf = Vec::new();
        write_pbm(&bits, nx, ny, &mut buf)?;
        out.push(buf);
    }
    Ok(out)
}

#[derive(Serialize)]
struct FourierRow1 {
    k: i64,
    lambda: f64,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct FourierRow2 {
    k1: i64,
    k2: i64,
    lambda1: f64,
    lambda2: f64,
    re: f64,
    im: f64,
}

/// Writes frequencies and data as `k,lambda,re,im` (1D) or
/// `k1,k2,lambda1,lambda2,re,im` (2D).
pub fn write_fourier_csv<W: Write>(freqs: &FrequencySet, data: &FourierData, out: W) -> Result<()> {
    data.check_aligned(freqs)?;
    let mut w = csv::Writer::from_writer(out);
    for (k, v) in data.values.iter().enumerate() {
        if freqs.dims() == 1 {
            w.serialize(FourierRow1 { k: freqs.nominal(k, 0), lambda: freqs.coord(k, 0), re: v.re, im: v.im })?;
        } else {
            w.serialize(FourierRow2 {
                k1: freqs.nominal(k, 0),
                k2: freqs.nominal(k, 1),
                lambda1: freqs.coord(k, 0),
                lambda2: freqs.coord(k, 1),
                re: v.re,
                im: v.im,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes any serializable rows with a header line.
pub fn write_rows<W: Write, T: Serialize>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
