//! Raster rendering of attractor data over `[0,1) × [t_min, t_max]` and
//! binary PGM (P5) export. Row 0 is the top of the strip.

use thiserror::Error;

use crate::affine::BoundaryPair;
use crate::frac;

#[derive(Debug, Error, PartialEq)]
pub enum RasterError {
    #[error("nothing to render")]
    EmptyInput,
    #[error("raster dimensions must be positive")]
    BadDimensions,
    #[error("strip [{0}, {1}] does not cover the data range [{2}, {3}]")]
    StripTooSmall(f64, f64, f64, f64),
}

/// Intensity grid over the strip; `cells[row * width + col]`, row 0 at the
/// top (`t = t_max`).
#[derive(Debug, Clone)]
pub struct RasterImage {
    pub width: usize,
    pub height: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub cells: Vec<u8>,
}

impl RasterImage {
    fn blank(width: usize, height: usize, t_min: f64, t_max: f64) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::BadDimensions);
        }
        Ok(RasterImage { width, height, t_min, t_max, cells: vec![0; width * height] })
    }

    fn mark(&mut self, theta: f64, t: f64, value: u8) {
        let col = (frac(theta) * self.width as f64) as usize % self.width;
        let y = (self.t_max - t) / (self.t_max - self.t_min) * self.height as f64;
        if y < 0.0 {
            return;
        }
        let row = y as usize;
        if row < self.height {
            let cell = &mut self.cells[row * self.width + col];
            *cell = (*cell).max(value);
        }
    }

    /// Serializes as binary PGM (P5, maxval 255).
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.cells);
        out
    }
}

/// Renders a point cloud; every sample marks one cell at full intensity.
pub fn render_points(
    points: &[(f64, f64)],
    width: usize,
    height: usize,
    strip: (f64, f64),
) -> Result<RasterImage, RasterError> {
    if points.is_empty() {
        return Err(RasterError::EmptyInput);
    }
    let (lo, hi) = point_range(points);
    if lo < strip.0 || hi > strip.1 {
        return Err(RasterError::StripTooSmall(strip.0, strip.1, lo, hi));
    }
    let mut img = RasterImage::blank(width, height, strip.0, strip.1)?;
    for &(theta, t) in points {
        img.mark(theta, t, 255);
    }
    Ok(img)
}

fn point_range(points: &[(f64, f64)]) -> (f64, f64) {
    points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, t)| {
        (lo.min(t), hi.max(t))
    })
}

/// Renders the band between the boundaries at `band_value`, optionally
/// overlaying extra points (e.g. an invariant region) at full intensity.
pub fn render_band(
    pair: &BoundaryPair,
    width: usize,
    height: usize,
    strip: (f64, f64),
    band_value: u8,
    overlay: &[(f64, f64)],
) -> Result<RasterImage, RasterError> {
    let n = pair.n_grid();
    if n == 0 {
        return Err(RasterError::EmptyInput);
    }
    let mut img = RasterImage::blank(width, height, strip.0, strip.1)?;
    let step = (strip.1 - strip.0) / height as f64;
    for col in 0..width {
        let theta = (col as f64 + 0.5) / width as f64;
        let lo = pair.rho_minus.interpolate(theta);
        let hi = pair.rho_plus.interpolate(theta);
        let mut t = lo;
        while t <= hi {
            img.mark(theta, t, band_value);
            t += step;
        }
        img.mark(theta, hi, band_value);
    }
    for &(theta, t) in overlay {
        img.mark(theta, t, 255);
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::{boundary_fixed_point, sample_attractor, SkewParams};
    use crate::circle::{CircleFunction, TrigPoly, TrigTerm};

    #[test]
    fn empty_input_rejected() {
        assert_eq!(
            render_points(&[], 64, 64, (-1.0, 1.0)).unwrap_err(),
            RasterError::EmptyInput
        );
    }

    #[test]
    fn zero_band_is_single_line() {
        let p = SkewParams::new(2, 0.5, CircleFunction::zero(64)).unwrap();
        let b = boundary_fixed_point(&p, 64, 1e-8).unwrap();
        let img = render_band(&b, 64, 65, (-1.0, 1.0), 200, &[]).unwrap();
        // all marks confined to the middle row
        for row in 0..65 {
            let any = (0..64).any(|c| img.cells[row * 64 + c] > 0);
            assert_eq!(any, row == 32, "row {row}");
        }
    }

    #[test]
    fn samples_confined_to_band() {
        let tau = CircleFunction::from_trig_poly(
            TrigPoly::new(0.0, vec![TrigTerm::cos_term(1, 1.0)]),
            512,
        )
        .unwrap();
        let p = SkewParams::new(2, 0.9, tau).unwrap();
        let b = boundary_fixed_point(&p, 512, 1e-6).unwrap();
        let pts = sample_attractor(&p, 2000, 128, 3);
        let img = render_points(&pts, 128, 128, (-p.t0, p.t0)).unwrap();
        // every lit pixel's t-range intersects the band, one pixel slack
        let cell_h = 2.0 * p.t0 / 128.0;
        for row in 0..128 {
            for col in 0..128 {
                if img.cells[row * 128 + col] == 0 {
                    continue;
                }
                let theta = (col as f64 + 0.5) / 128.0;
                let t_top = p.t0 - row as f64 * cell_h;
                let t_bot = t_top - cell_h;
                let hi = b.rho_plus.interpolate(theta);
                let lo = b.rho_minus.interpolate(theta);
                assert!(
                    t_bot <= hi + cell_h && t_top >= lo - cell_h,
                    "pixel ({row},{col}) outside band"
                );
            }
        }
    }

    #[test]
    fn pgm_header_and_payload() {
        let img = render_points(&[(0.5, 0.0)], 4, 3, (-1.0, 1.0)).unwrap();
        let pgm = img.to_pgm();
        assert!(pgm.starts_with(b"P5\n4 3\n255\n"));
        assert_eq!(pgm.len(), b"P5\n4 3\n255\n".len() + 12);
    }

    #[test]
    fn strip_must_cover_data() {
        assert!(matches!(
            render_points(&[(0.1, 5.0)], 8, 8, (-1.0, 1.0)),
            Err(RasterError::StripTooSmall(..))
        ));
    }
}
