//! Raster images as genotypes: the mean-squared-error quality gate against a
//! reference image, six aesthetic features, and the self-adaptive offset
//! random-walk mutation.
//!
//! A mutation picks one random RGB offset and one start pixel, then walks
//! `t_max` steps across the image (4-neighborhood, wrapping at the borders),
//! adding the offset to every visited pixel with saturating arithmetic.
//! `t_max` self-adapts: it grows by a factor F after a successful generation
//! and shrinks by F^(-1/k) after an unsuccessful one, clamped to
//! [t_lb, t_ub].

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diversity::EvolutionDomain;

/// Superpixel edge lengths probed by the global contrast factor, one per
/// resolution index; resolutions larger than the image are skipped.
const GCF_SUPERPIXEL_SIZES: [usize; 9] = [1, 2, 4, 8, 16, 25, 50, 100, 200];

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("image is {got_w}x{got_h}, expected {want_w}x{want_h}")]
    DimensionMismatch {
        want_w: usize,
        want_h: usize,
        got_w: usize,
        got_h: usize,
    },
    #[error("image must have positive dimensions")]
    EmptyImage,
    #[error("walk parameters: {0}")]
    BadParams(String),
    #[error("ppm: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A W x H grid of 8-bit RGB pixels, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyImage);
        }
        if pixels.len() != width * height {
            return Err(ImageError::Parse(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, pixel: [u8; 3]) -> Result<Self, ImageError> {
        Self::new(width, height, vec![pixel; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, value: [u8; 3]) {
        self.pixels[y * self.width + x] = value;
    }

    /// Normalized luminance of the pixel at (x, y), in [0,1].
    fn luminance(&self, x: usize, y: usize) -> f64 {
        let [r, g, b] = self.pixel(x, y);
        (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64) / 255.0
    }

    /// Gray value of the pixel at (x, y), in [0,255].
    fn gray(&self, x: usize, y: usize) -> f64 {
        let [r, g, b] = self.pixel(x, y);
        0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64
    }

    /// Writes the image as a binary portable pixmap (magic `P6`, maxval 255).
    pub fn write_ppm(&self, path: &Path) -> Result<(), ImageError> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        write!(file, "P6\n{} {}\n255\n", self.width, self.height)?;
        for pixel in &self.pixels {
            file.write_all(pixel)?;
        }
        Ok(())
    }

    pub fn read_ppm(path: &Path) -> Result<Self, ImageError> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_ppm_bytes(&bytes)
    }

    pub fn from_ppm_bytes(bytes: &[u8]) -> Result<Self, ImageError> {
        let mut pos = 0usize;

        // reads one whitespace-delimited token, skipping `#` comments
        let next_token = |pos: &mut usize| -> Result<String, ImageError> {
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
                return Err(ImageError::Parse("unexpected end of header".into()));
            }
            Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
        };

        let magic = next_token(&mut pos)?;
        if magic != "P6" {
            return Err(ImageError::Parse(format!("expected magic P6, got {magic}")));
        }
        let width: usize = next_token(&mut pos)?
            .parse()
            .map_err(|e| ImageError::Parse(format!("bad width: {e}")))?;
        let height: usize = next_token(&mut pos)?
            .parse()
            .map_err(|e| ImageError::Parse(format!("bad height: {e}")))?;
        let maxval: usize = next_token(&mut pos)?
            .parse()
            .map_err(|e| ImageError::Parse(format!("bad maxval: {e}")))?;
        if maxval != 255 {
            return Err(ImageError::Parse(format!("maxval must be 255, got {maxval}")));
        }
        pos += 1; // the single whitespace byte after the maxval

        let needed = width * height * 3;
        if bytes.len() < pos + needed {
            return Err(ImageError::Parse(format!(
                "truncated pixel data: need {needed} bytes, have {}",
                bytes.len().saturating_sub(pos)
            )));
        }
        let pixels = bytes[pos..pos + needed]
            .chunks_exact(3)
            .map(|c| [c[0], c[1], c[2]])
            .collect();
        Self::new(width, height, pixels)
    }
}

/// Deterministic reference image: hue sweeps horizontally, saturation
/// vertically, at constant brightness. Used as the bundled target for
/// desk-scale runs.
pub fn synthetic_reference(width: usize, height: usize) -> RasterImage {
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let h = 0.8 * x as f64 / (width.max(2) - 1) as f64;
            let s = 0.25 + 0.6 * y as f64 / (height.max(2) - 1) as f64;
            pixels.push(hsv_to_rgb(h, s, 0.85));
        }
    }
    RasterImage::new(width, height, pixels).expect("positive dimensions")
}

/// Mean squared error over all W*H*3 channel values. The quality gate for
/// images accepts values strictly below the configured limit.
pub fn mse(image: &RasterImage, reference: &RasterImage) -> Result<f64, ImageError> {
    if image.width != reference.width || image.height != reference.height {
        return Err(ImageError::DimensionMismatch {
            want_w: reference.width,
            want_h: reference.height,
            got_w: image.width,
            got_h: image.height,
        });
    }
    let mut total = 0.0;
    for (a, b) in image.pixels.iter().zip(&reference.pixels) {
        for c in 0..3 {
            let d = a[c] as f64 - b[c] as f64;
            total += d * d;
        }
    }
    Ok(total / (image.width * image.height * 3) as f64)
}

/// Standard hexcone RGB -> HSV conversion; all components in [0,1], hue in
/// [0,1) with gray mapping to hue 0.
pub fn rgb_to_hsv(pixel: [u8; 3]) -> (f64, f64, f64) {
    let r = pixel[0] as f64 / 255.0;
    let g = pixel[1] as f64 / 255.0;
    let b = pixel[2] as f64 / 255.0;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max == 0.0 { 0.0 } else { delta / max };
    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        ((g - b) / delta).rem_euclid(6.0) / 6.0
    } else if max == g {
        ((b - r) / delta + 2.0) / 6.0
    } else {
        ((r - g) / delta + 4.0) / 6.0
    };
    (h, s, v)
}

/// Inverse hexcone conversion; hue wraps modulo 1.
pub fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let h6 = h.rem_euclid(1.0) * 6.0;
    let sector = (h6.floor() as usize) % 6;
    let f = h6 - h6.floor();
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    let (r, g, b) = match sector {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    let to_byte = |x: f64| (x * 255.0).round().clamp(0.0, 255.0) as u8;
    [to_byte(r), to_byte(g), to_byte(b)]
}

/// Arithmetic mean of the per-pixel hue.
pub fn feature_mean_hue(image: &RasterImage) -> f64 {
    let sum: f64 = image.pixels.iter().map(|&p| rgb_to_hsv(p).0).sum();
    sum / image.pixels.len() as f64
}

/// Circular mean of the per-pixel hue (hue is an angle); result in [0,1).
pub fn feature_mean_hue_circular(image: &RasterImage) -> f64 {
    use std::f64::consts::TAU;
    let mut sin = 0.0;
    let mut cos = 0.0;
    for &p in &image.pixels {
        let angle = rgb_to_hsv(p).0 * TAU;
        sin += angle.sin();
        cos += angle.cos();
    }
    if sin == 0.0 && cos == 0.0 {
        return 0.0;
    }
    (sin.atan2(cos) / TAU).rem_euclid(1.0)
}

/// Population standard deviation of the per-pixel hue.
pub fn feature_sd_hue(image: &RasterImage) -> f64 {
    let hues: Vec<f64> = image.pixels.iter().map(|&p| rgb_to_hsv(p).0).collect();
    let mean = hues.iter().sum::<f64>() / hues.len() as f64;
    let variance = hues.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / hues.len() as f64;
    variance.sqrt()
}

/// Arithmetic mean of the per-pixel saturation.
pub fn feature_mean_saturation(image: &RasterImage) -> f64 {
    let sum: f64 = image.pixels.iter().map(|&p| rgb_to_hsv(p).1).sum();
    sum / image.pixels.len() as f64
}

/// Reflectional symmetry about the vertical axis:
/// 1 - mean |l(x,y) - l(W-1-x,y)| over all pixels, with l the normalized
/// luminance. Mirror-symmetric images score 1.
pub fn feature_symmetry(image: &RasterImage) -> f64 {
    let mut total = 0.0;
    for y in 0..image.height {
        for x in 0..image.width {
            total += (image.luminance(x, y) - image.luminance(image.width - 1 - x, y)).abs();
        }
    }
    1.0 - total / (image.width * image.height) as f64
}

/// Smoothness 1/(1 + var(l)) with l the normalized luminance; uniform
/// images score 1 and the value stays in (0,1].
pub fn feature_smoothness(image: &RasterImage) -> f64 {
    let n = (image.width * image.height) as f64;
    let mut sum = 0.0;
    for y in 0..image.height {
        for x in 0..image.width {
            sum += image.luminance(x, y);
        }
    }
    let mean = sum / n;
    let mut variance = 0.0;
    for y in 0..image.height {
        for x in 0..image.width {
            variance += (image.luminance(x, y) - mean).powi(2);
        }
    }
    1.0 / (1.0 + variance / n)
}

/// Global contrast factor: weighted sum over superpixel resolutions of the
/// mean absolute perceptual-luminance difference between 4-neighbors.
///
/// Perceptual luminance is L = 100 * sqrt(l_linear) with
/// l_linear = (gray/255)^2.2 averaged over each superpixel block.
/// Resolutions larger than the image are skipped and the remaining weights
/// rescaled to preserve their total mass.
pub fn feature_gcf(image: &RasterImage) -> f64 {
    let weight = |index: usize| {
        let x = index as f64 / 9.0;
        (-0.406385 * x + 0.334573) * x + 0.0877526
    };
    let total_weight: f64 = (1..=GCF_SUPERPIXEL_SIZES.len()).map(weight).sum();

    let mut used_weight = 0.0;
    let mut weighted_contrast = 0.0;
    for (i, &size) in GCF_SUPERPIXEL_SIZES.iter().enumerate() {
        if size > image.width.min(image.height) {
            continue;
        }
        let w = weight(i + 1);
        used_weight += w;
        weighted_contrast += w * resolution_contrast(image, size);
    }
    if used_weight == 0.0 {
        return 0.0;
    }
    weighted_contrast * (total_weight / used_weight)
}

/// Mean local contrast of the superpixel grid at one block size.
fn resolution_contrast(image: &RasterImage, size: usize) -> f64 {
    let grid_w = image.width.div_ceil(size);
    let grid_h = image.height.div_ceil(size);

    // perceptual luminance per superpixel: linear luminance averaged over
    // the block, then L = 100 * sqrt(l)
    let mut lum = vec![0.0f64; grid_w * grid_h];
    for gy in 0..grid_h {
        for gx in 0..grid_w {
            let x0 = gx * size;
            let y0 = gy * size;
            let x1 = (x0 + size).min(image.width);
            let y1 = (y0 + size).min(image.height);
            let mut sum = 0.0;
            for y in y0..y1 {
                for x in x0..x1 {
                    sum += (image.gray(x, y) / 255.0).powf(2.2);
                }
            }
            let linear = sum / ((x1 - x0) * (y1 - y0)) as f64;
            lum[gy * grid_w + gx] = 100.0 * linear.sqrt();
        }
    }

    let mut total = 0.0;
    for gy in 0..grid_h {
        for gx in 0..grid_w {
            let here = lum[gy * grid_w + gx];
            let mut diff = 0.0;
            let mut neighbors = 0;
            if gx > 0 {
                diff += (here - lum[gy * grid_w + gx - 1]).abs();
                neighbors += 1;
            }
            if gx + 1 < grid_w {
                diff += (here - lum[gy * grid_w + gx + 1]).abs();
                neighbors += 1;
            }
            if gy > 0 {
                diff += (here - lum[(gy - 1) * grid_w + gx]).abs();
                neighbors += 1;
            }
            if gy + 1 < grid_h {
                diff += (here - lum[(gy + 1) * grid_w + gx]).abs();
                neighbors += 1;
            }
            if neighbors > 0 {
                total += diff / neighbors as f64;
            }
        }
    }
    total / (grid_w * grid_h) as f64
}

/// Parameters of the offset random-walk mutation and its self-adaptation.
///
/// `t_max` is kept as a real value and floored to integer steps only when a
/// walk executes, so the F^(-1/k) decay cannot stall on rounding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkParams {
    /// Current walk length (steps); t_lb <= t_max <= t_ub.
    pub t_max: f64,
    pub t_lb: f64,
    pub t_ub: f64,
    /// Growth factor F > 1 applied on success.
    pub factor: f64,
    /// Failure attenuation exponent: failures shrink t_max by F^(-1/k).
    pub k: u32,
    /// Channel offsets are drawn uniformly from [-radius, radius].
    pub radius: i32,
}

impl Default for WalkParams {
    /// t_lb = 1000, t_ub = 20000, F = 2, k = 8, t_max = 1000 at
    /// initialization; offset radius 30.
    fn default() -> Self {
        Self {
            t_max: 1000.0,
            t_lb: 1000.0,
            t_ub: 20_000.0,
            factor: 2.0,
            k: 8,
            radius: 30,
        }
    }
}

impl WalkParams {
    pub fn validate(&self) -> Result<(), ImageError> {
        if !(self.t_lb >= 1.0 && self.t_lb <= self.t_max && self.t_max <= self.t_ub) {
            return Err(ImageError::BadParams(format!(
                "need 1 <= t_lb <= t_max <= t_ub, got t_lb={}, t_max={}, t_ub={}",
                self.t_lb, self.t_max, self.t_ub
            )));
        }
        if !(self.factor > 1.0) {
            return Err(ImageError::BadParams(format!(
                "factor must exceed 1, got {}",
                self.factor
            )));
        }
        if self.k < 1 {
            return Err(ImageError::BadParams("k must be at least 1".into()));
        }
        if self.radius < 0 {
            return Err(ImageError::BadParams(format!(
                "radius must be non-negative, got {}",
                self.radius
            )));
        }
        Ok(())
    }
}

/// Walk-length self-adaptation: success multiplies t_max by F (capped at
/// t_ub), failure multiplies by F^(-1/k) (floored at t_lb).
pub fn adapt_walk_length(params: &WalkParams, success: bool) -> WalkParams {
    let mut next = params.clone();
    next.t_max = if success {
        (params.factor * params.t_max).min(params.t_ub)
    } else {
        (params.factor.powf(-1.0 / params.k as f64) * params.t_max).max(params.t_lb)
    };
    next
}

/// Offset random-walk mutation: copies the image, draws one start pixel and
/// one offset o in [-r,r]^3 uniformly, then for floor(t_max) steps adds o to
/// the current pixel (saturating to [0,255]) and moves to a uniform
/// 4-neighbor, wrapping around the image borders. Revisited pixels receive
/// the offset again.
pub fn offset_random_walk_mutation(
    image: &RasterImage,
    params: &WalkParams,
    rng: &mut dyn RngCore,
) -> RasterImage {
    let steps = params.t_max.floor() as u64;
    let mut out = image.clone();
    let (w, h) = (image.width, image.height);
    let start = rng.gen_range(0..w * h);
    let mut x = start % w;
    let mut y = start / w;
    let offset = [
        rng.gen_range(-params.radius..=params.radius),
        rng.gen_range(-params.radius..=params.radius),
        rng.gen_range(-params.radius..=params.radius),
    ];
    for _ in 0..steps {
        let mut pixel = out.pixel(x, y);
        for c in 0..3 {
            pixel[c] = (pixel[c] as i32 + offset[c]).clamp(0, 255) as u8;
        }
        out.set_pixel(x, y, pixel);
        match rng.gen_range(0..4u8) {
            0 => x = if x == 0 { w - 1 } else { x - 1 },
            1 => x = if x + 1 == w { 0 } else { x + 1 },
            2 => y = if y == 0 { h - 1 } else { y - 1 },
            _ => y = if y + 1 == h { 0 } else { y + 1 },
        }
    }
    out
}

/// The image feature battery, addressable by config name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFeature {
    MeanHue,
    SdHue,
    MeanSaturation,
    Symmetry,
    Smoothness,
    Gcf,
}

impl ImageFeature {
    pub const ALL: [ImageFeature; 6] = [
        ImageFeature::MeanHue,
        ImageFeature::SdHue,
        ImageFeature::MeanSaturation,
        ImageFeature::Symmetry,
        ImageFeature::Smoothness,
        ImageFeature::Gcf,
    ];

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "mean_hue" => Some(ImageFeature::MeanHue),
            "sd_hue" => Some(ImageFeature::SdHue),
            "mean_saturation" => Some(ImageFeature::MeanSaturation),
            "symmetry" => Some(ImageFeature::Symmetry),
            "smoothness" => Some(ImageFeature::Smoothness),
            "gcf" => Some(ImageFeature::Gcf),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ImageFeature::MeanHue => "mean_hue",
            ImageFeature::SdHue => "sd_hue",
            ImageFeature::MeanSaturation => "mean_saturation",
            ImageFeature::Symmetry => "symmetry",
            ImageFeature::Smoothness => "smoothness",
            ImageFeature::Gcf => "gcf",
        }
    }

    pub fn extract(&self, image: &RasterImage, circular_hue_mean: bool) -> f64 {
        match self {
            ImageFeature::MeanHue => {
                if circular_hue_mean {
                    feature_mean_hue_circular(image)
                } else {
                    feature_mean_hue(image)
                }
            }
            ImageFeature::SdHue => feature_sd_hue(image),
            ImageFeature::MeanSaturation => feature_mean_saturation(image),
            ImageFeature::Symmetry => feature_symmetry(image),
            ImageFeature::Smoothness => feature_smoothness(image),
            ImageFeature::Gcf => feature_gcf(image),
        }
    }

    /// Desk-scale default scaling range (f_min, f_max), chosen around the
    /// neighborhoods reachable from the bundled gradient reference under
    /// the MSE gate.
    pub fn default_range(&self) -> (f64, f64) {
        match self {
            ImageFeature::MeanHue => (0.0, 1.0),
            ImageFeature::SdHue => (0.0, 0.5),
            ImageFeature::MeanSaturation => (0.0, 1.0),
            ImageFeature::Symmetry => (0.5, 1.0),
            ImageFeature::Smoothness => (0.8, 1.0),
            ImageFeature::Gcf => (0.0, 10.0),
        }
    }
}

/// Parameters of the image evolution domain.
#[derive(Debug, Clone)]
pub struct ImageParams {
    /// Quality gate: accepted images have mse strictly below this.
    pub mse_limit: f64,
    pub walk: WalkParams,
    /// Use the circular mean for the mean-hue feature.
    pub circular_hue_mean: bool,
}

impl Default for ImageParams {
    fn default() -> Self {
        Self {
            mse_limit: 500.0,
            walk: WalkParams::default(),
            circular_hue_mean: false,
        }
    }
}

/// The image side of the diversity optimizer. The population starts as
/// copies of the reference (mse 0) and drifts under the gate from there.
#[derive(Debug, Clone)]
pub struct ImageDomain {
    reference: RasterImage,
    params: ImageParams,
    features: Vec<ImageFeature>,
    walk: WalkParams,
}

impl ImageDomain {
    pub fn new(
        reference: RasterImage,
        params: ImageParams,
        features: Vec<ImageFeature>,
    ) -> Result<Self, ImageError> {
        params.walk.validate()?;
        if !(params.mse_limit > 0.0) {
            return Err(ImageError::BadParams(format!(
                "mse limit must be positive, got {}",
                params.mse_limit
            )));
        }
        if features.is_empty() {
            return Err(ImageError::BadParams("at least one feature required".into()));
        }
        let walk = params.walk.clone();
        Ok(Self {
            reference,
            params,
            features,
            walk,
        })
    }

    pub fn reference(&self) -> &RasterImage {
        &self.reference
    }

    pub fn walk(&self) -> &WalkParams {
        &self.walk
    }
}

impl EvolutionDomain for ImageDomain {
    type Genotype = RasterImage;
    type Error = ImageError;

    fn name(&self) -> &'static str {
        "image"
    }

    fn feature_count(&self) -> usize {
        self.features.len()
    }

    fn init_individual(
        &mut self,
        _rng: &mut dyn RngCore,
    ) -> Result<(Self::Genotype, f64), Self::Error> {
        Ok((self.reference.clone(), 0.0))
    }

    fn mutate(
        &mut self,
        parent: &Self::Genotype,
        rng: &mut dyn RngCore,
    ) -> Result<Self::Genotype, Self::Error> {
        Ok(offset_random_walk_mutation(parent, &self.walk, rng))
    }

    fn quality(
        &mut self,
        genotype: &Self::Genotype,
        _rng: &mut dyn RngCore,
    ) -> Result<f64, Self::Error> {
        mse(genotype, &self.reference)
    }

    fn gate_passes(&self, quality: f64) -> bool {
        quality < self.params.mse_limit
    }

    fn raw_features(&self, genotype: &Self::Genotype) -> Result<Vec<f64>, Self::Error> {
        Ok(self
            .features
            .iter()
            .map(|f| f.extract(genotype, self.params.circular_hue_mean))
            .collect())
    }

    fn observe_outcome(&mut self, success: bool) {
        self.walk = adapt_walk_length(&self.walk, success);
    }

    fn aux_trace(&self) -> Option<(&'static str, f64)> {
        Some(("t_max", self.walk.t_max))
    }
}
