//! Grayscale image I/O (PGM), synthetic noise, and reconstruction metrics.

use crate::error::{DsError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::{Read as _, Write as _};
use std::path::Path;

/// Grayscale image in working units: `pixels[r*cols + c] = raw/255 * scale`.
#[derive(Clone, Debug)]
pub struct GrayImage {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<f64>,
    pub scale: f64,
}

impl GrayImage {
    pub fn new(rows: usize, cols: usize, pixels: Vec<f64>, scale: f64) -> Result<Self> {
        if rows == 0 || cols == 0 || pixels.len() != rows * cols {
            return Err(DsError::InvalidArgument(format!(
                "image shape {rows}x{cols} does not match {} pixels",
                pixels.len()
            )));
        }
        if !(scale > 0.0) {
            return Err(DsError::InvalidArgument(format!("scale must be positive, got {scale}")));
        }
        Ok(Self {
            rows,
            cols,
            pixels,
            scale,
        })
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

struct PgmReader {
    bytes: Vec<u8>,
    pos: usize,
}

impl PgmReader {
    fn fail(&self, path: &Path, msg: impl Into<String>) -> DsError {
        DsError::Format {
            path: path.display().to_string(),
            offset: self.pos,
            msg: msg.into(),
        }
    }

    /// Skip whitespace and `#` comments (which run to end of line).
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self, path: &Path) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.fail(path, "expected decimal integer"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.fail(path, "integer out of range"))
    }
}

/// Read an 8-bit PGM (P2 ascii or P5 binary, maxval 255) and map pixels to
/// `raw/255 * scale`.
pub fn load_pgm(path: impl AsRef<Path>, scale: f64) -> Result<GrayImage> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| DsError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
    let mut r = PgmReader { bytes, pos: 0 };
    let magic = r.bytes.get(..2).map(<[u8]>::to_vec);
    let binary = match magic.as_deref() {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return Err(r.fail(path, "expected P2 or P5 magic")),
    };
    r.pos = 2;
    let cols = r.token(path)?;
    let rows = r.token(path)?;
    let maxval = r.token(path)?;
    if maxval != 255 {
        return Err(r.fail(path, format!("only maxval 255 is supported, got {maxval}")));
    }
    if rows == 0 || cols == 0 {
        return Err(r.fail(path, "image dimensions must be positive"));
    }
    let n = rows * cols;
    let mut raw = Vec::with_capacity(n);
    if binary {
        // exactly one whitespace byte separates the header from the raster
        if r.pos >= r.bytes.len() || !r.bytes[r.pos].is_ascii_whitespace() {
            return Err(r.fail(path, "expected single whitespace before raster"));
        }
        r.pos += 1;
        if r.bytes.len() - r.pos < n {
            r.pos = r.bytes.len();
            return Err(r.fail(path, "truncated raster"));
        }
        raw.extend(r.bytes[r.pos..r.pos + n].iter().map(|b| *b as usize));
    } else {
        for _ in 0..n {
            let v = r.token(path)?;
            if v > 255 {
                return Err(r.fail(path, format!("sample {v} exceeds maxval")));
            }
            raw.push(v);
        }
    }
    let pixels = raw.iter().map(|v| *v as f64 / 255.0 * scale).collect();
    GrayImage::new(rows, cols, pixels, scale)
}

/// Write a binary (P5) PGM. Working values are mapped back with
/// `round(p/scale*255)` rounding half up, then clamped to 0..=255.
pub fn save_pgm(path: impl AsRef<Path>, image: &GrayImage) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("P5\n{} {}\n255\n", image.cols, image.rows).into_bytes();
    for p in &image.pixels {
        let v = (p / image.scale * 255.0 + 0.5).floor().clamp(0.0, 255.0);
        out.push(v as u8);
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(&out))
        .map_err(|e| DsError::Io {
            path: path.display().to_string(),
            source: e,
        })
}

/// Add iid N(0, std²) noise, seeded and portable: samples come from
/// `ChaCha8Rng::seed_from_u64(seed)` feeding the Box–Muller transform
/// (two uniforms in (0,1] per pair of normals). Values are NOT clamped.
pub fn add_gaussian_noise(pixels: &mut [f64], std: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut i = 0;
    while i < pixels.len() {
        let u1: f64 = 1.0 - rng.gen::<f64>(); // in (0,1]
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        pixels[i] += std * r * theta.cos();
        i += 1;
        if i < pixels.len() {
            pixels[i] += std * r * theta.sin();
            i += 1;
        }
    }
}

/// ISNR in dB: 10 log₁₀(‖x−b‖²/‖x−x_k‖²) for ground truth x, observation b,
/// and reconstruction x_k. Perfect reconstruction gives +∞; an exact copy of
/// a degraded observation gives 0; ‖x−b‖ = 0 with x_k ≠ x gives −∞.
pub fn isnr(truth: &[f64], observed: &[f64], reconstruction: &[f64]) -> f64 {
    let num: f64 = truth
        .iter()
        .zip(observed)
        .map(|(t, o)| (t - o) * (t - o))
        .sum();
    let den: f64 = truth
        .iter()
        .zip(reconstruction)
        .map(|(t, r)| (t - r) * (t - r))
        .sum();
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        10.0 * (num / den).log10()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("dsmooth-imaging-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn ascii_and_binary_agree() {
        let p2 = tmp("agree.p2.pgm");
        let p5 = tmp("agree.p5.pgm");
        std::fs::write(&p2, "P2\n# comment\n3 2\n255\n0 10 20\n250 255 128\n").unwrap();
        let mut b = b"P5\n3 2\n255\n".to_vec();
        b.extend_from_slice(&[0, 10, 20, 250, 255, 128]);
        std::fs::write(&p5, b).unwrap();
        let a = load_pgm(&p2, 0.1).unwrap();
        let c = load_pgm(&p5, 0.1).unwrap();
        assert_eq!(a.rows, 2);
        assert_eq!(a.cols, 3);
        assert_eq!(a.pixels, c.pixels);
        assert!((a.pixels[1] - 10.0 / 255.0 * 0.1).abs() < 1e-16);
    }

    #[test]
    fn save_load_round_trip_is_identity_on_8bit_grid() {
        let pixels: Vec<f64> = (0..=255).map(|v| v as f64 / 255.0 * 0.5).collect();
        let img = GrayImage::new(16, 16, pixels.clone(), 0.5).unwrap();
        let p = tmp("roundtrip.pgm");
        save_pgm(&p, &img).unwrap();
        let back = load_pgm(&p, 0.5).unwrap();
        for (a, b) in pixels.iter().zip(&back.pixels) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn save_rounds_half_up_and_clamps() {
        // 0.5/255*scale is exactly halfway between levels 0 and 1 → rounds to 1
        let img = GrayImage::new(1, 3, vec![0.5 / 255.0, -0.2, 3.0], 1.0).unwrap();
        let p = tmp("round.pgm");
        save_pgm(&p, &img).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        let raster = &bytes[bytes.len() - 3..];
        assert_eq!(raster, &[1, 0, 255]);
    }

    #[test]
    fn format_errors_carry_offsets() {
        let p = tmp("bad.pgm");
        std::fs::write(&p, "P3\n2 2\n255\n").unwrap();
        match load_pgm(&p, 1.0) {
            Err(DsError::Format { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("expected format error, got {other:?}"),
        }
        std::fs::write(&p, "P2\n2 2\n65535\n0 0 0 0\n").unwrap();
        assert!(matches!(load_pgm(&p, 1.0), Err(DsError::Format { .. })));
        let mut b = b"P5\n4 4\n255\n".to_vec();
        b.extend_from_slice(&[0; 7]); // 16 expected
        std::fs::write(&p, b).unwrap();
        assert!(matches!(load_pgm(&p, 1.0), Err(DsError::Format { .. })));
    }

    #[test]
    fn noise_is_deterministic_per_seed() {
        let mut a = vec![0.0; 64];
        let mut b = vec![0.0; 64];
        let mut c = vec![0.0; 64];
        add_gaussian_noise(&mut a, 0.01, 7);
        add_gaussian_noise(&mut b, 0.01, 7);
        add_gaussian_noise(&mut c, 0.01, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn noise_moments_match() {
        let n = 1_000_000;
        let mut x = vec![0.0; n];
        add_gaussian_noise(&mut x, 1.0, 12345);
        let mean: f64 = x.iter().sum::<f64>() / n as f64;
        // mean of n iid N(0,1) has std 1/√n = 1e-3; allow 4 sigma
        assert!(mean.abs() < 4e-3, "sample mean {mean}");
        let var: f64 = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
        assert!((var.sqrt() - 1.0).abs() < 0.01, "sample std {}", var.sqrt());
    }

    #[test]
    fn isnr_cases() {
        let truth = vec![1.0, 0.0];
        let observed = vec![0.5, 0.5];
        // reconstruction = observation → 0 dB
        assert_eq!(isnr(&truth, &observed, &observed), 0.0);
        // perfect reconstruction → +inf
        assert_eq!(isnr(&truth, &observed, &truth), f64::INFINITY);
        // observation already exact, reconstruction worse → -inf
        assert_eq!(isnr(&truth, &truth, &observed), f64::NEG_INFINITY);
        // halving the error doubles the ratio: 10 log10(4) ≈ 6.02
        let half = vec![0.75, 0.25];
        assert!((isnr(&truth, &observed, &half) - 10.0 * 4.0f64.log10()).abs() < 1e-12);
    }
}
