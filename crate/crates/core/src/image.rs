//! 8-bit grayscale rasters and deterministic synthetic covers.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::ImageError;
use crate::filter::box_sum_i64;
use crate::rng::SplitMix64;

/// Smallest admissible side length. The 5-point stencil and the 5x5 residual
/// kernel both need five samples along each axis.
pub const MIN_SIDE: usize = 5;

/// Row-major 8-bit grayscale image, at least [`MIN_SIDE`] pixels on each side.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImageError> {
        if width < MIN_SIDE || height < MIN_SIDE {
            return Err(ImageError::TooSmall { width, height, min: MIN_SIDE });
        }
        if pixels.len() != width * height {
            return Err(ImageError::RasterSize { expected: width * height, actual: pixels.len() });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, ImageError> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self, ImageError> {
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(row, col));
            }
        }
        Self::new(width, height, pixels)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    #[inline]
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.pixels[row * self.width + col] = value;
    }

    /// A copy with one pixel replaced.
    pub fn with_pixel(&self, row: usize, col: usize, value: u8) -> Self {
        let mut out = self.clone();
        out.set(row, col, value);
        out
    }

    /// Pixels with intensity 0 or 255.
    pub fn saturation_mask(&self) -> Vec<bool> {
        self.pixels.iter().map(|&p| p == 0 || p == 255).collect()
    }

    pub fn same_shape(&self, other: &GrayImage) -> Result<(), ImageError> {
        if self.width == other.width && self.height == other.height {
            Ok(())
        } else {
            Err(ImageError::DimensionMismatch(self.width, self.height, other.width, other.height))
        }
    }
}

impl fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GrayImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

/// Synthetic cover texture.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TextureSpec {
    /// Every pixel at one level.
    Flat(u8),
    /// Diagonal ramp from 16 (top-left) to 239 (bottom-right). Ignores the seed.
    Gradient,
    /// Uniform noise on `0..=255`, box-averaged over `kernel x kernel` with
    /// integer rounding. Larger kernels give smoother images.
    SmoothedNoise { kernel: usize },
    /// Left half smooth (9x9 smoothed noise), right half the same base plus
    /// uniform noise in `[-32, 32]`.
    TwoRegion,
}

impl fmt::Display for TextureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TextureSpec::Flat(level) => write!(f, "flat:{level}"),
            TextureSpec::Gradient => f.write_str("gradient"),
            TextureSpec::SmoothedNoise { kernel } => write!(f, "smoothed-noise:{kernel}"),
            TextureSpec::TwoRegion => f.write_str("two-region"),
        }
    }
}

impl FromStr for TextureSpec {
    type Err = ImageError;

    /// Parses `flat:<level>`, `gradient`, `smoothed-noise:<k>` or `two-region`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        match (name, arg) {
            ("flat", Some(a)) => a
                .parse::<u8>()
                .map(TextureSpec::Flat)
                .map_err(|_| ImageError::BadParameter("flat level must be in 0..=255")),
            ("gradient", None) => Ok(TextureSpec::Gradient),
            ("smoothed-noise", Some(a)) => {
                let kernel = a
                    .parse::<usize>()
                    .map_err(|_| ImageError::BadParameter("kernel must be a positive odd integer"))?;
                if kernel == 0 || kernel.is_multiple_of(2) {
                    return Err(ImageError::BadParameter("kernel must be a positive odd integer"));
                }
                Ok(TextureSpec::SmoothedNoise { kernel })
            }
            ("two-region", None) => Ok(TextureSpec::TwoRegion),
            _ => Err(ImageError::UnknownKind(s.to_string())),
        }
    }
}

fn uniform_noise(width: usize, height: usize, rng: &mut SplitMix64) -> Vec<i64> {
    (0..width * height).map(|_| rng.below(256) as i64).collect()
}

fn smoothed(noise: &[i64], width: usize, height: usize, kernel: usize) -> Vec<i64> {
    let area = (kernel * kernel) as i64;
    box_sum_i64(noise, width, height, kernel)
        .into_iter()
        .map(|s| (s + area / 2) / area)
        .collect()
}

/// Generates a deterministic synthetic cover for `(kind, width, height, seed)`.
pub fn synth_cover(kind: TextureSpec, width: usize, height: usize, seed: u64) -> Result<GrayImage, ImageError> {
    if width < MIN_SIDE || height < MIN_SIDE {
        return Err(ImageError::TooSmall { width, height, min: MIN_SIDE });
    }
    let mut rng = SplitMix64::new(seed);
    match kind {
        TextureSpec::Flat(level) => GrayImage::filled(width, height, level),
        TextureSpec::Gradient => {
            let span = (width + height - 2) as u64;
            GrayImage::from_fn(width, height, |r, c| (16 + (223 * (r + c) as u64 + span / 2) / span) as u8)
        }
        TextureSpec::SmoothedNoise { kernel } => {
            if kernel == 0 || kernel.is_multiple_of(2) {
                return Err(ImageError::BadParameter("kernel must be a positive odd integer"));
            }
            let noise = uniform_noise(width, height, &mut rng);
            let px = smoothed(&noise, width, height, kernel);
            GrayImage::new(width, height, px.into_iter().map(|v| v.clamp(0, 255) as u8).collect())
        }
        TextureSpec::TwoRegion => {
            let noise = uniform_noise(width, height, &mut rng);
            let base = smoothed(&noise, width, height, 9);
            let half = width / 2;
            let mut px = Vec::with_capacity(width * height);
            for row in 0..height {
                for col in 0..width {
                    let mut v = base[row * width + col];
                    if col >= half {
                        v += rng.below(65) as i64 - 32;
                    }
                    px.push(v.clamp(0, 255) as u8);
                }
            }
            GrayImage::new(width, height, px)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn variance(values: impl Iterator<Item = f64> + Clone) -> f64 {
        let n = values.clone().count() as f64;
        let mean = values.clone().sum::<f64>() / n;
        values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
    }

    #[test]
    fn rejects_small_images() {
        assert!(matches!(GrayImage::filled(4, 5, 0), Err(ImageError::TooSmall { .. })));
        assert!(matches!(GrayImage::new(5, 5, vec![0; 24]), Err(ImageError::RasterSize { .. })));
    }

    #[test]
    fn flat_cover() {
        let img = synth_cover(TextureSpec::Flat(128), 16, 16, 0).unwrap();
        assert!(img.pixels().iter().all(|&p| p == 128));
    }

    #[test]
    fn gradient_spans_its_range() {
        let img = synth_cover(TextureSpec::Gradient, 9, 7, 0).unwrap();
        assert_eq!(img.get(0, 0), 16);
        assert_eq!(img.get(6, 8), 239);
    }

    #[test]
    fn synthesis_is_deterministic() {
        for kind in [TextureSpec::SmoothedNoise { kernel: 3 }, TextureSpec::TwoRegion, TextureSpec::Gradient] {
            let a = synth_cover(kind, 20, 12, 5).unwrap();
            let b = synth_cover(kind, 20, 12, 5).unwrap();
            assert_eq!(a, b);
        }
        let a = synth_cover(TextureSpec::SmoothedNoise { kernel: 3 }, 20, 12, 5).unwrap();
        let c = synth_cover(TextureSpec::SmoothedNoise { kernel: 3 }, 20, 12, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn two_region_left_half_is_smoother() {
        let img = synth_cover(TextureSpec::TwoRegion, 64, 64, 7).unwrap();
        let left = (0..64).flat_map(|r| (0..32).map(move |c| (r, c)));
        let right = (0..64).flat_map(|r| (32..64).map(move |c| (r, c)));
        let vl = variance(left.map(|(r, c)| img.get(r, c) as f64));
        let vr = variance(right.map(|(r, c)| img.get(r, c) as f64));
        assert!(vl < vr, "left {vl} right {vr}");
    }

    #[test]
    fn smoothing_reduces_variance() {
        let rough = synth_cover(TextureSpec::SmoothedNoise { kernel: 1 }, 32, 32, 1).unwrap();
        let smooth = synth_cover(TextureSpec::SmoothedNoise { kernel: 7 }, 32, 32, 1).unwrap();
        let v = |img: &GrayImage| variance(img.pixels().iter().map(|&p| p as f64));
        assert!(v(&smooth) < v(&rough) / 10.0);
    }

    #[test]
    fn texture_spec_parsing() {
        assert_eq!("flat:7".parse::<TextureSpec>().unwrap(), TextureSpec::Flat(7));
        assert_eq!("smoothed-noise:5".parse::<TextureSpec>().unwrap(), TextureSpec::SmoothedNoise { kernel: 5 });
        assert_eq!("two-region".parse::<TextureSpec>().unwrap(), TextureSpec::TwoRegion);
        assert!(matches!("plasma".parse::<TextureSpec>(), Err(ImageError::UnknownKind(_))));
        assert!("smoothed-noise:4".parse::<TextureSpec>().is_err());
        for kind in [TextureSpec::Flat(3), TextureSpec::Gradient, TextureSpec::TwoRegion] {
            assert_eq!(kind.to_string().parse::<TextureSpec>().unwrap(), kind);
        }
    }
}
