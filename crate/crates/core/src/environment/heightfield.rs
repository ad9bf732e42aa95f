//! Digital elevation model of the floor with bilinear height and slope queries.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Result of a field lookup. `clamped` is set when the query point was outside
/// the field and was moved onto its boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lookup<V> {
    pub value: V,
    pub clamped: bool,
}

/// Regular grid of floor heights.
///
/// Sample `(row, col)` sits at world position
/// `(origin.0 + col * resolution, origin.1 + row * resolution)`, so columns run
/// along `x` and rows along `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightField<T> {
    rows: usize,
    cols: usize,
    heights: Vec<T>,
    resolution: T,
    origin: (T, T),
}

impl<T: Real> HeightField<T> {
    /// Builds a field from row-major heights.
    pub fn from_grid(
        rows: usize,
        cols: usize,
        heights: Vec<T>,
        resolution: T,
        origin: (T, T),
    ) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::Format(format!(
                "height grid must be at least 2x2, got {rows}x{cols}"
            )));
        }
        if heights.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} heights for a {rows}x{cols} grid, got {}",
                rows * cols,
                heights.len()
            )));
        }
        if !(resolution > T::zero() && resolution.is_finite()) {
            return Err(Error::Domain(format!(
                "resolution must be > 0, got {resolution}"
            )));
        }
        if !origin.0.is_finite() || !origin.1.is_finite() {
            return Err(Error::Domain("origin must be finite".into()));
        }
        if let Some(bad) = heights.iter().position(|h| !h.is_finite()) {
            return Err(Error::Domain(format!("height {bad} is not finite")));
        }
        Ok(Self {
            rows,
            cols,
            heights,
            resolution,
            origin,
        })
    }

    /// Flat field covering a square of side `side` centred on `center`.
    pub fn flat(side: T, center: (T, T)) -> Result<Self> {
        let half = side / T::lit(2.0);
        Self::from_grid(
            2,
            2,
            vec![T::zero(); 4],
            side,
            (center.0 - half, center.1 - half),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn resolution(&self) -> T {
        self.resolution
    }

    pub fn origin(&self) -> (T, T) {
        self.origin
    }

    pub fn heights(&self) -> &[T] {
        &self.heights
    }

    /// Width (along `x`) and height (along `y`) in meters.
    pub fn extent(&self) -> (T, T) {
        (
            T::lit((self.cols - 1) as f64) * self.resolution,
            T::lit((self.rows - 1) as f64) * self.resolution,
        )
    }

    pub fn sample(&self, row: usize, col: usize) -> T {
        self.heights[row * self.cols + col]
    }

    pub fn contains(&self, x: T, y: T) -> bool {
        let (w, h) = self.extent();
        let (u, v) = (x - self.origin.0, y - self.origin.1);
        u >= T::zero() && v >= T::zero() && u <= w && v <= h
    }

    /// Cell indices, fractional offsets in `[0, 1]` and the clamp flags per axis.
    fn locate(&self, x: T, y: T) -> (usize, usize, T, T, bool, bool) {
        let (w, h) = self.extent();
        let u = (x - self.origin.0).max(T::zero()).min(w);
        let v = (y - self.origin.1).max(T::zero()).min(h);
        let clamped_x = u != x - self.origin.0;
        let clamped_y = v != y - self.origin.1;
        let gu = u / self.resolution;
        let gv = v / self.resolution;
        let col = gu.floor().to_usize().unwrap_or(0).min(self.cols - 2);
        let row = gv.floor().to_usize().unwrap_or(0).min(self.rows - 2);
        let fx = gu - T::lit(col as f64);
        let fy = gv - T::lit(row as f64);
        (row, col, fx, fy, clamped_x, clamped_y)
    }

    /// Bilinear height at `(x, y)`. Points outside the field take the value at
    /// the nearest boundary point.
    pub fn height_at(&self, x: T, y: T) -> Lookup<T> {
        let (row, col, fx, fy, cx, cy) = self.locate(x, y);
        let h00 = self.sample(row, col);
        let h10 = self.sample(row, col + 1);
        let h01 = self.sample(row + 1, col);
        let h11 = self.sample(row + 1, col + 1);
        let one = T::one();
        let value = (one - fx) * (one - fy) * h00
            + fx * (one - fy) * h10
            + (one - fx) * fy * h01
            + fx * fy * h11;
        Lookup {
            value,
            clamped: cx || cy,
        }
    }

    /// Analytic gradient of the bilinear patch containing `(x, y)`. The field
    /// is continued as a constant outside its extent, so clamped axes report a
    /// zero slope.
    pub fn gradient_at(&self, x: T, y: T) -> Lookup<[T; 2]> {
        let (row, col, fx, fy, cx, cy) = self.locate(x, y);
        let h00 = self.sample(row, col);
        let h10 = self.sample(row, col + 1);
        let h01 = self.sample(row + 1, col);
        let h11 = self.sample(row + 1, col + 1);
        let one = T::one();
        let mut gx = ((one - fy) * (h10 - h00) + fy * (h11 - h01)) / self.resolution;
        let mut gy = ((one - fx) * (h01 - h00) + fx * (h11 - h10)) / self.resolution;
        if cx {
            gx = T::zero();
        }
        if cy {
            gy = T::zero();
        }
        Lookup {
            value: [gx, gy],
            clamped: cx || cy,
        }
    }

    /// Horizontal acceleration induced by the floor slope, `-g * grad h`.
    pub fn slope_disturbance(&self, x: T, y: T, gravity: T) -> Lookup<[T; 2]> {
        let g = self.gradient_at(x, y);
        Lookup {
            value: [-gravity * g.value[0], -gravity * g.value[1]],
            clamped: g.clamped,
        }
    }

    /// Largest slope magnitude of the bilinear surface. Within a patch the
    /// gradient norm is convex in the offsets, so the corners bound it.
    pub fn max_slope(&self) -> T {
        let mut best = T::zero();
        for r in 0..self.rows - 1 {
            for c in 0..self.cols - 1 {
                let gx = [
                    self.sample(r, c + 1) - self.sample(r, c),
                    self.sample(r + 1, c + 1) - self.sample(r + 1, c),
                ];
                let gy = [
                    self.sample(r + 1, c) - self.sample(r, c),
                    self.sample(r + 1, c + 1) - self.sample(r, c + 1),
                ];
                for a in gx {
                    for b in gy {
                        best = best.max(a.hypot(b) / self.resolution);
                    }
                }
            }
        }
        best
    }
}

/// How grey levels map to heights when loading an image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageScaling<T> {
    /// Height of a full-scale pixel [m].
    pub height_scale: T,
    /// Sample spacing [m/px].
    pub resolution: T,
    /// World position of the bottom-left pixel.
    pub origin: (T, T),
}

/// Decoded portable graymap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    /// Row-major, top row first.
    pub pixels: Vec<u16>,
}

fn is_power_of_two_plus_one(n: usize) -> bool {
    n >= 2 && (n - 1).is_power_of_two()
}

impl<T: Real> HeightField<T> {
    /// Converts a grey-scale image into a field. The image must be square with
    /// a side of `2^N + 1` pixels. The top image row becomes the largest `y`.
    pub fn from_image(img: &GrayImage, scaling: ImageScaling<T>) -> Result<Self> {
        if img.width != img.height {
            return Err(Error::Format(format!(
                "height-map image must be square, got {}x{}",
                img.width, img.height
            )));
        }
        if !is_power_of_two_plus_one(img.width) {
            return Err(Error::Format(format!(
                "height-map side must be 2^N + 1 pixels, got {}",
                img.width
            )));
        }
        if img.maxval == 0 {
            return Err(Error::Format("maxval must be > 0".into()));
        }
        let n = img.width;
        let maxval = T::lit(img.maxval as f64);
        let mut heights = Vec::with_capacity(n * n);
        for row in 0..n {
            let src = n - 1 - row;
            heights.extend(
                img.pixels[src * n..(src + 1) * n]
                    .iter()
                    .map(|&p| T::lit(p as f64) / maxval * scaling.height_scale),
            );
        }
        Self::from_grid(n, n, heights, scaling.resolution, scaling.origin)
    }

    /// Quantizes the field into a 16-bit graymap, the inverse of [`Self::from_image`]
    /// for fields whose heights lie in `[0, height_scale]`.
    pub fn to_image(&self, height_scale: T) -> GrayImage {
        let max = T::lit(65535.0);
        let mut pixels = Vec::with_capacity(self.rows * self.cols);
        for row in (0..self.rows).rev() {
            for col in 0..self.cols {
                let v = (self.sample(row, col) / height_scale * max)
                    .round()
                    .max(T::zero())
                    .min(max);
                pixels.push(v.to_u16().unwrap_or(0));
            }
        }
        GrayImage {
            width: self.cols,
            height: self.rows,
            maxval: 65535,
            pixels,
        }
    }

    pub fn load_pgm(path: &Path, scaling: ImageScaling<T>) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_image(&parse_pgm(&bytes)?, scaling)
    }

    /// Parses a CSV grid whose first line is `resolution,origin_x,origin_y`
    /// followed by one comma-separated row of heights per line (row 0 = lowest y).
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty height CSV".into()))?;
        let head = parse_row::<T>(header)?;
        if head.len() != 3 {
            return Err(Error::Format(
                "first line must be `resolution,origin_x,origin_y`".into(),
            ));
        }
        let mut heights = Vec::new();
        let mut cols = None;
        let mut rows = 0;
        for line in lines {
            let row = parse_row::<T>(line)?;
            match cols {
                None => cols = Some(row.len()),
                Some(c) if c != row.len() => {
                    return Err(Error::Format(format!(
                        "row {rows} has {} entries, expected {c}",
                        row.len()
                    )))
                }
                _ => {}
            }
            heights.extend(row);
            rows += 1;
        }
        Self::from_grid(
            rows,
            cols.unwrap_or(0),
            heights,
            head[0],
            (head[1], head[2]),
        )
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text)
    }

    /// Smooth random floor made of superposed plane waves, scaled so that the
    /// steepest slope equals `max_slope`. Heights are shifted to start at 0.
    pub fn procedural(
        side_px: usize,
        resolution: T,
        origin: (T, T),
        max_slope: T,
        seed: u64,
    ) -> Result<Self> {
        if side_px < 2 {
            return Err(Error::Format(
                "procedural field needs at least 2 samples per side".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        const WAVES: usize = 12;
        let waves: Vec<(f64, f64, f64, f64)> = (0..WAVES)
            .map(|_| {
                let wavelength = rng.random_range(1.5..6.0);
                let heading = rng.random_range(0.0..std::f64::consts::TAU);
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                let k = std::f64::consts::TAU / wavelength;
                // amplitude ~ wavelength keeps each wave's slope comparable
                (k * heading.cos(), k * heading.sin(), phase, wavelength)
            })
            .collect();
        let res = resolution.to_f64_lossy();
        let mut raw = Vec::with_capacity(side_px * side_px);
        for row in 0..side_px {
            for col in 0..side_px {
                let (x, y) = (col as f64 * res, row as f64 * res);
                let h: f64 = waves
                    .iter()
                    .map(|&(kx, ky, phase, amp)| amp * (kx * x + ky * y + phase).sin())
                    .sum();
                raw.push(h);
            }
        }
        let lowest = raw.iter().copied().fold(f64::INFINITY, f64::min);
        let unscaled = Self::from_grid(
            side_px,
            side_px,
            raw.iter().map(|&h| T::lit(h - lowest)).collect(),
            resolution,
            origin,
        )?;
        let slope = unscaled.max_slope();
        let scale = if slope > T::zero() {
            max_slope / slope
        } else {
            T::zero()
        };
        let heights = unscaled.heights.iter().map(|&h| h * scale).collect();
        Self::from_grid(side_px, side_px, heights, resolution, origin)
    }
}

fn parse_row<T: Real>(line: &str) -> Result<Vec<T>> {
    line.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map(T::lit)
                .map_err(|_| Error::Format(format!("not a number: `{}`", tok.trim())))
        })
        .collect()
}

/// Decodes a P2 (ASCII) or P5 (binary) graymap with maxval up to 65535.
pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0usize;
    let next_token = |pos: &mut usize| -> Result<String> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err(Error::Format("truncated PGM header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };
    let magic = next_token(&mut pos)?;
    let number = |s: String| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::Format(format!("bad PGM header field `{s}`")))
    };
    let width = number(next_token(&mut pos)?)?;
    let height = number(next_token(&mut pos)?)?;
    let maxval = number(next_token(&mut pos)?)?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("PGM maxval {maxval} out of range")));
    }
    let count = width * height;
    let pixels = match magic.as_str() {
        "P2" => {
            let mut px = Vec::with_capacity(count);
            for _ in 0..count {
                let v = number(next_token(&mut pos)?)?;
                if v > maxval {
                    return Err(Error::Format(format!("pixel {v} exceeds maxval {maxval}")));
                }
                px.push(v as u16);
            }
            px
        }
        "P5" => {
            // exactly one whitespace byte separates the header from the raster
            pos += 1;
            let wide = maxval > 255;
            let need = count * if wide { 2 } else { 1 };
            if bytes.len() < pos + need {
                return Err(Error::Format(format!(
                    "PGM raster truncated: need {need} bytes, have {}",
                    bytes.len().saturating_sub(pos)
                )));
            }
            let raster = &bytes[pos..pos + need];
            if wide {
                raster
                    .chunks_exact(2)
                    .map(|b| u16::from_be_bytes([b[0], b[1]]))
                    .collect()
            } else {
                raster.iter().map(|&b| b as u16).collect()
            }
        }
        other => return Err(Error::Format(format!("unsupported PGM magic `{other}`"))),
    };
    Ok(GrayImage {
        width,
        height,
        maxval: maxval as u16,
        pixels,
    })
}

/// Encodes a binary (P5) graymap.
pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", img.width, img.height, img.maxval).into_bytes();
    if img.maxval > 255 {
        for &p in &img.pixels {
            out.extend_from_slice(&p.to_be_bytes());
        }
    } else {
        out.extend(img.pixels.iter().map(|&p| p as u8));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn plane(a: f64, b: f64, c: f64, n: usize, res: f64, origin: (f64, f64)) -> HeightField<f64> {
        let mut h = Vec::new();
        for r in 0..n {
            for col in 0..n {
                let x = origin.0 + col as f64 * res;
                let y = origin.1 + r as f64 * res;
                h.push(a * x + b * y + c);
            }
        }
        HeightField::from_grid(n, n, h, res, origin).unwrap()
    }

    #[test]
    fn two_by_two_plane() {
        let a = 0.7;
        let f = HeightField::from_grid(2, 2, vec![0.0, a, 0.0, a], 1.0, (0.0, 0.0)).unwrap();
        assert_eq!(f.height_at(0.5, 0.5).value, 0.5 * a);
        assert_eq!(f.gradient_at(0.25, 0.9).value, [a, 0.0]);
    }

    #[test]
    fn exact_at_samples_and_midpoints() {
        let f = HeightField::from_grid(2, 3, vec![1.0, 2.0, 4.0, 3.0, 5.0, 9.0], 0.5, (1.0, 2.0))
            .unwrap();
        // rows [1 2 4] and [3 5 9], columns 0.5 apart starting at x = 1
        assert_eq!(f.height_at(1.5, 2.0).value, 2.0);
        assert_eq!(f.height_at(2.0, 2.5).value, 9.0);
        assert_eq!(f.height_at(1.0, 2.5).value, 3.0);
        assert_eq!(f.height_at(1.25, 2.0).value, 1.5);
        assert!(!f.height_at(1.25, 2.0).clamped);
    }

    #[test]
    fn out_of_extent_is_clamped_and_flagged() {
        let f = HeightField::from_grid(2, 2, vec![0.0, 1.0, 0.0, 1.0], 1.0, (0.0, 0.0)).unwrap();
        let q = f.height_at(5.0, 0.5);
        assert!(q.clamped);
        assert_eq!(q.value, 1.0);
        let g = f.gradient_at(5.0, 0.5);
        assert!(g.clamped);
        assert_eq!(g.value, [0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(HeightField::from_grid(1, 3, vec![0.0; 3], 1.0, (0.0, 0.0)).is_err());
        assert!(HeightField::from_grid(2, 2, vec![0.0; 3], 1.0, (0.0, 0.0)).is_err());
        assert!(HeightField::from_grid(2, 2, vec![0.0; 4], 0.0, (0.0, 0.0)).is_err());
        assert!(
            HeightField::from_grid(2, 2, vec![0.0, f64::NAN, 0.0, 0.0], 1.0, (0.0, 0.0)).is_err()
        );
    }

    #[test]
    fn slope_of_tilted_plane() {
        let f = plane(0.001, 0.0, 0.0, 5, 0.25, (-0.5, -0.5));
        let d = f.slope_disturbance(0.1, 0.2, 9.81).value;
        assert!((d[0] + 0.00981).abs() < 1e-15);
        assert_eq!(d[1], 0.0);
        let flat = HeightField::flat(4.0, (0.0, 0.0)).unwrap();
        assert_eq!(flat.slope_disturbance(0.3, -1.2, 9.81).value, [0.0, 0.0]);
    }

    #[test]
    fn bowl_minimum_has_no_slope() {
        // bowl centred inside the middle cell
        let n = 4;
        let h = (0..n * n)
            .map(|i| {
                let (r, c) = ((i / n) as f64 - 1.5, (i % n) as f64 - 1.5);
                r * r + c * c
            })
            .collect();
        let f = HeightField::from_grid(n, n, h, 1.0, (-1.5, -1.5)).unwrap();
        assert_eq!(f.slope_disturbance(0.0, 0.0, 9.81).value, [0.0, 0.0]);
    }

    #[test]
    fn image_side_rules() {
        let img = |w: usize, h: usize, v: u16| GrayImage {
            width: w,
            height: h,
            maxval: 255,
            pixels: vec![v; w * h],
        };
        let scaling = ImageScaling {
            height_scale: 0.01,
            resolution: 0.02,
            origin: (0.0, 0.0),
        };
        assert!(HeightField::<f64>::from_image(&img(5, 3, 0), scaling).is_err());
        assert!(HeightField::<f64>::from_image(&img(6, 6, 0), scaling).is_err());
        let f = HeightField::<f64>::from_image(&img(5, 5, 128), scaling).unwrap();
        assert!(f.heights().iter().all(|&h| h == f.heights()[0]));
        assert_eq!(f.heights()[0], 128.0 / 255.0 * 0.01);
    }

    #[test]
    fn large_image_covers_ten_meters() {
        let img = GrayImage {
            width: 513,
            height: 513,
            maxval: 255,
            pixels: vec![0; 513 * 513],
        };
        let f = HeightField::<f64>::from_image(
            &img,
            ImageScaling {
                height_scale: 0.01,
                resolution: 0.02,
                origin: (0.0, 0.0),
            },
        )
        .unwrap();
        let (w, h) = f.extent();
        assert!((w - 10.24).abs() < 1e-12 && (h - 10.24).abs() < 1e-12);
    }

    #[test]
    fn pgm_ascii_and_binary() {
        let ascii = b"P2\n# comment\n3 3\n255\n0 1 2\n3 4 5\n6 7 255\n";
        let img = parse_pgm(ascii).unwrap();
        assert_eq!(img.pixels, vec![0, 1, 2, 3, 4, 5, 6, 7, 255]);
        let bin = write_pgm(&img);
        assert_eq!(parse_pgm(&bin).unwrap(), img);
        let wide = GrayImage {
            width: 2,
            height: 1,
            maxval: 65535,
            pixels: vec![1, 65535],
        };
        assert_eq!(parse_pgm(&write_pgm(&wide)).unwrap(), wide);
        assert!(parse_pgm(b"P6\n1 1\n255\n\0\0\0").is_err());
        assert!(parse_pgm(b"P5\n4 4\n255\n\0\0").is_err());
    }

    #[test]
    fn image_rows_flip_to_world_y() {
        let img = GrayImage {
            width: 3,
            height: 3,
            maxval: 2,
            pixels: vec![2, 2, 2, 1, 1, 1, 0, 0, 0],
        };
        let f = HeightField::<f64>::from_image(
            &img,
            ImageScaling {
                height_scale: 1.0,
                resolution: 1.0,
                origin: (0.0, 0.0),
            },
        )
        .unwrap();
        assert_eq!(f.height_at(1.0, 0.0).value, 0.0);
        assert_eq!(f.height_at(1.0, 2.0).value, 1.0);
        let back = HeightField::from_image(
            &f.to_image(1.0),
            ImageScaling {
                height_scale: 1.0,
                resolution: 1.0,
                origin: (0.0, 0.0),
            },
        )
        .unwrap();
        // 16-bit quantization
        for (a, b) in back.heights().iter().zip(f.heights()) {
            assert!((a - b).abs() <= 0.5 / 65535.0);
        }
    }

    #[test]
    fn csv_grid() {
        let f = HeightField::<f64>::parse_csv("0.5,-1,-1\n0,1\n2,3\n").unwrap();
        assert_eq!(f.rows(), 2);
        assert_eq!(f.origin(), (-1.0, -1.0));
        assert_eq!(f.height_at(-0.75, -1.0).value, 0.5);
        assert!(HeightField::<f64>::parse_csv("0.5,0\n0,1\n").is_err());
        assert!(HeightField::<f64>::parse_csv("1,0,0\n0,1\n2\n").is_err());
        assert!(HeightField::<f64>::parse_csv("1,0,0\n0,x\n1,2\n").is_err());
    }

    #[test]
    fn procedural_respects_slope_bound() {
        let f = HeightField::<f64>::procedural(65, 0.05, (-1.6, -1.6), 1e-3, 7).unwrap();
        assert!((f.max_slope() - 1e-3).abs() < 1e-12);
        assert!(f.heights().iter().all(|&h| h >= 0.0));
        let again = HeightField::<f64>::procedural(65, 0.05, (-1.6, -1.6), 1e-3, 7).unwrap();
        assert_eq!(f, again);
    }

    proptest! {
        #[test]
        fn affine_fields_are_reproduced(
            a in -0.01f64..0.01, b in -0.01f64..0.01, c in -1.0f64..1.0,
            u in 0.0f64..1.0, v in 0.0f64..1.0,
        ) {
            let f = plane(a, b, c, 9, 0.125, (-0.5, 0.25));
            let (x, y) = (-0.5 + u, 0.25 + v);
            prop_assert!((f.height_at(x, y).value - (a * x + b * y + c)).abs() < 1e-12);
            let d = f.slope_disturbance(x, y, 9.81).value;
            prop_assert!((d[0] + 9.81 * a).abs() < 1e-12);
            prop_assert!((d[1] + 9.81 * b).abs() < 1e-12);
        }
    }
}
