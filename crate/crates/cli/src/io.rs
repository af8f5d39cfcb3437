//! PGM images, the `GVF1` binary field format and CSV outputs.
//!
//! `GVF1` layout: the 4 ASCII bytes `GVF1`, width (u32 LE), height (u32 LE), spacing (f32 LE),
//! then `width * height` f32 LE values in row-major order.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use gvf_core::levelset::{ContourSet, Polyline};
use gvf_core::{GridSpec, ScalarField};

use crate::error::{CliError, FormatError};

const FIELD_MAGIC: &[u8; 4] = b"GVF1";
const FIELD_HEADER: usize = 16;

fn grid_for(width: usize, height: usize, spacing: f64) -> Result<GridSpec, FormatError> {
    GridSpec::new(width, height, spacing).map_err(|e| FormatError::InvalidField(e.to_string()))
}

/// Whitespace-separated PGM tokens with `#` comments skipped. `pos` is just past the last token.
struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn token(&mut self) -> Option<&'a [u8]> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<usize, FormatError> {
        let tok = self.token().ok_or_else(|| FormatError::MalformedHeader(format!("missing {what}")))?;
        std::str::from_utf8(tok).ok().and_then(|s| s.parse().ok()).ok_or_else(|| {
            FormatError::MalformedHeader(format!("{what} is not a number: {:?}", String::from_utf8_lossy(tok)))
        })
    }
}

/// Decode a P2 or P5 image; intensities are divided by `maxval`.
pub fn decode_pgm(bytes: &[u8], spacing: f64) -> Result<ScalarField, FormatError> {
    let mut r = HeaderReader { bytes, pos: 0 };
    let magic = r.token().unwrap_or_default();
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        other => return Err(FormatError::UnsupportedMagic(String::from_utf8_lossy(other).into_owned())),
    };
    let width = r.number("width")?;
    let height = r.number("height")?;
    let maxval = r.number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(FormatError::MalformedHeader(format!("maxval {maxval} outside 1..=65535")));
    }
    let grid = grid_for(width, height, spacing)?;
    let n = width * height;
    let mut samples = Vec::with_capacity(n);
    if binary {
        // Exactly one whitespace byte separates maxval from the raster.
        let data = bytes.get(r.pos + 1..).unwrap_or_default();
        let bps = if maxval < 256 { 1 } else { 2 };
        if data.len() < n * bps {
            return Err(FormatError::TruncatedPayload { expected: n, actual: data.len() / bps });
        }
        for k in 0..n {
            samples.push(if bps == 1 {
                data[k] as usize
            } else {
                u16::from_be_bytes([data[2 * k], data[2 * k + 1]]) as usize
            });
        }
    } else {
        for k in 0..n {
            let tok = r.token().ok_or(FormatError::TruncatedPayload { expected: n, actual: k })?;
            let v = std::str::from_utf8(tok)
                .ok()
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(|| FormatError::InvalidField(format!("sample {k} is not a number")))?;
            samples.push(v);
        }
    }
    if let Some(v) = samples.iter().find(|&&v| v > maxval) {
        return Err(FormatError::InvalidField(format!("sample {v} exceeds maxval {maxval}")));
    }
    let values = samples.into_iter().map(|v| v as f64 / maxval as f64).collect();
    ScalarField::new(grid, values).map_err(|e| FormatError::InvalidField(e.to_string()))
}

/// Encode as binary P5 with maxval 255; values are clamped to `[0, 1]` and rounded half up.
pub fn encode_pgm(field: &ScalarField) -> Vec<u8> {
    let grid = field.grid();
    let mut out = format!("P5\n{} {}\n255\n", grid.width(), grid.height()).into_bytes();
    out.extend(field.values().iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8));
    out
}

pub fn encode_field(field: &ScalarField) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(FIELD_HEADER + 4 * grid.len());
    out.extend_from_slice(FIELD_MAGIC);
    out.extend_from_slice(&(grid.width() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.height() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.spacing() as f32).to_le_bytes());
    for &v in field.values() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode_field(bytes: &[u8]) -> Result<ScalarField, FormatError> {
    if bytes.len() < 4 || &bytes[..4] != FIELD_MAGIC {
        return Err(FormatError::BadMagic);
    }
    if bytes.len() < FIELD_HEADER {
        return Err(FormatError::SizeMismatch { expected: FIELD_HEADER, actual: bytes.len() });
    }
    let word = |k: usize| [bytes[k], bytes[k + 1], bytes[k + 2], bytes[k + 3]];
    let width = u32::from_le_bytes(word(4)) as usize;
    let height = u32::from_le_bytes(word(8)) as usize;
    let spacing = f32::from_le_bytes(word(12)) as f64;
    let payload = &bytes[FIELD_HEADER..];
    let expected = width.saturating_mul(height).saturating_mul(4);
    if payload.len() != expected {
        return Err(FormatError::SizeMismatch { expected, actual: payload.len() });
    }
    let grid = grid_for(width, height, spacing)?;
    let values = payload.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64).collect();
    ScalarField::new(grid, values).map_err(|e| FormatError::InvalidField(e.to_string()))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn format_err(path: &Path) -> impl FnOnce(FormatError) -> CliError + '_ {
    move |source| CliError::Format { path: path.to_path_buf(), source }
}

pub fn read_pgm(path: &Path, spacing: f64) -> Result<ScalarField, CliError> {
    decode_pgm(&read_bytes(path)?, spacing).map_err(format_err(path))
}

pub fn write_pgm(field: &ScalarField, path: &Path) -> Result<(), CliError> {
    write_bytes(path, &encode_pgm(field))
}

pub fn read_field(path: &Path) -> Result<ScalarField, CliError> {
    decode_field(&read_bytes(path)?).map_err(format_err(path))
}

pub fn write_field(field: &ScalarField, path: &Path) -> Result<(), CliError> {
    write_bytes(path, &encode_field(field))
}

/// PGM for `.pgm` files, the binary field format otherwise. `spacing` applies to PGM only.
pub fn read_image(path: &Path, spacing: f64) -> Result<ScalarField, CliError> {
    let is_pgm = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    if is_pgm {
        read_pgm(path, spacing)
    } else {
        read_field(path)
    }
}

/// One line per vertex: `contour_id,vertex_id,x,y,closed`.
pub fn contours_csv(contours: &ContourSet) -> String {
    let mut s = String::from("contour_id,vertex_id,x,y,closed\n");
    for (c, p) in contours.polylines.iter().enumerate() {
        for (k, (x, y)) in p.points.iter().enumerate() {
            writeln!(s, "{c},{k},{x},{y},{}", p.closed).unwrap();
        }
    }
    s
}

pub fn parse_contours_csv(text: &str) -> Result<ContourSet, FormatError> {
    let bad = |line: usize| FormatError::InvalidField(format!("contour csv line {line}"));
    let mut polylines: Vec<Polyline> = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(bad(n + 1));
        }
        let id: usize = cols[0].parse().map_err(|_| bad(n + 1))?;
        let x: f64 = cols[2].parse().map_err(|_| bad(n + 1))?;
        let y: f64 = cols[3].parse().map_err(|_| bad(n + 1))?;
        let closed: bool = cols[4].parse().map_err(|_| bad(n + 1))?;
        if id == polylines.len() {
            polylines.push(Polyline { points: Vec::new(), closed });
        } else if id + 1 != polylines.len() {
            return Err(bad(n + 1));
        }
        polylines[id].points.push((x, y));
    }
    Ok(ContourSet { polylines })
}

/// `step,energy`.
pub fn energy_csv(trace: &[(usize, f64)]) -> String {
    let mut s = String::from("step,energy\n");
    for (step, e) in trace {
        writeln!(s, "{step},{e}").unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(w: usize, h: usize) -> GridSpec {
        GridSpec::new(w, h, 1.0).unwrap()
    }

    #[test]
    fn p2_rescales() {
        let f = decode_pgm(b"P2\n# comment\n3 3\n255\n0 255 255\n0 0 0\n51 102 255\n", 1.0).unwrap();
        assert_eq!(&f.values()[..3], &[0.0, 1.0, 1.0]);
        assert_eq!(f.get(0, 2), 0.2);
    }

    #[test]
    fn p2_and_p5_agree() {
        let pixels = [0u8, 10, 200, 255, 7, 9, 128, 64, 32, 1, 2, 3];
        let mut p2 = String::from("P2 4 3 255\n");
        for p in pixels {
            p2.push_str(&format!("{p} "));
        }
        let mut p5 = b"P5\n4 3\n255\n".to_vec();
        p5.extend_from_slice(&pixels);
        assert_eq!(decode_pgm(p2.as_bytes(), 1.0).unwrap(), decode_pgm(&p5, 1.0).unwrap());
    }

    #[test]
    fn sixteen_bit_p5() {
        let mut p5 = b"P5 3 3 1000\n".to_vec();
        for v in [0u16, 500, 1000, 250, 750, 1, 2, 3, 4] {
            p5.extend_from_slice(&v.to_be_bytes());
        }
        let f = decode_pgm(&p5, 1.0).unwrap();
        assert_eq!(f.values()[1], 0.5);
        assert_eq!(f.values()[2], 1.0);
    }

    #[test]
    fn pgm_errors_are_distinct() {
        assert!(matches!(decode_pgm(b"P6\n3 3\n255\n", 1.0), Err(FormatError::UnsupportedMagic(_))));
        assert!(matches!(decode_pgm(b"P5\n3 x\n255\n", 1.0), Err(FormatError::MalformedHeader(_))));
        assert!(matches!(decode_pgm(b"P5\n3 3\n", 1.0), Err(FormatError::MalformedHeader(_))));
        assert_eq!(
            decode_pgm(b"P5\n3 3\n255\n\x01\x02", 1.0),
            Err(FormatError::TruncatedPayload { expected: 9, actual: 2 })
        );
        assert_eq!(
            decode_pgm(b"P2\n3 3\n255\n1 2 3", 1.0),
            Err(FormatError::TruncatedPayload { expected: 9, actual: 3 })
        );
    }

    #[test]
    fn pgm_round_trip_on_quantized_fields() {
        let f = ScalarField::from_fn(grid(16, 16), |i, j| ((i * 16 + j) % 256) as f64 / 255.0);
        let back = decode_pgm(&encode_pgm(&f), 1.0).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn write_rounds_half_up() {
        let f =
            ScalarField::new(grid(3, 3), vec![0.5 / 255.0, 1.5 / 255.0, 2.0, -1.0, 0.0, 1.0, 0.5, 0.25, 0.75]).unwrap();
        let bytes = encode_pgm(&f);
        let raster = &bytes[bytes.len() - 9..];
        assert_eq!(raster, &[1, 2, 255, 0, 0, 255, 128, 64, 191]);
    }

    #[test]
    fn field_round_trip_is_bitwise() {
        let f = ScalarField::from_fn(GridSpec::new(5, 4, 0.75).unwrap(), |i, j| {
            (((i * 7 + j * 13) as f64).sin() * 1e3) as f32 as f64
        });
        let back = decode_field(&encode_field(&f)).unwrap();
        assert_eq!(back.grid(), f.grid());
        for (a, b) in f.values().iter().zip(back.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(encode_field(&back), encode_field(&f));
    }

    #[test]
    fn field_errors() {
        assert_eq!(decode_field(b""), Err(FormatError::BadMagic));
        assert_eq!(decode_field(b"GVF2aaaaaaaaaaaa"), Err(FormatError::BadMagic));
        let mut bytes = encode_field(&ScalarField::zeros(grid(4, 4)));
        bytes.truncate(bytes.len() - 4);
        assert_eq!(decode_field(&bytes), Err(FormatError::SizeMismatch { expected: 64, actual: 60 }));
    }

    #[test]
    fn contour_csv_round_trip() {
        let cs = ContourSet {
            polylines: vec![
                Polyline { points: vec![(0.5, 1.0), (2.0, 1.25), (1.0, 3.0)], closed: true },
                Polyline { points: vec![(0.1, 0.2), (0.3, 0.4)], closed: false },
            ],
        };
        let text = contours_csv(&cs);
        assert!(text.starts_with("contour_id,vertex_id,x,y,closed\n0,0,0.5,1,true\n"));
        assert_eq!(parse_contours_csv(&text).unwrap(), cs);
    }

    #[test]
    fn energy_csv_format() {
        assert_eq!(energy_csv(&[(0, 1.5), (10, 0.25)]), "step,energy\n0,1.5\n10,0.25\n");
    }
}
