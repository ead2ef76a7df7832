//! Raster frames, face-region crops, and PNG / binary PPM I/O.

use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageFormat, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rgb = [u8; 3];

/// An 8-bit RGB raster stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: u32,
    height: u32,
    pixels: Vec<Rgb>,
}

impl Frame {
    pub fn new(width: u32, height: u32, pixels: Vec<Rgb>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::validation(format!(
                "frame dimensions must be positive, got {width}x{height}"
            )));
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(Error::validation(format!(
                "pixel count {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        Ok(Frame {
            width,
            height,
            pixels,
        })
    }

    /// A frame with every pixel set to `color`.
    pub fn filled(width: u32, height: u32, color: Rgb) -> Result<Self> {
        Frame::new(width, height, vec![color; width as usize * height as usize])
    }

    /// Builds a frame by evaluating `f(x, y)` for every position.
    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> Rgb) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Frame::new(width, height, pixels)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<Rgb> {
        self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> Rgb {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn rows(&self) -> std::slice::Chunks<'_, Rgb> {
        self.pixels.chunks(self.width as usize)
    }

    pub fn full_box(&self) -> BoundingBox {
        BoundingBox {
            x: 0,
            y: 0,
            w: self.width,
            h: self.height,
        }
    }

    /// Same dimensions, new pixel buffer. Used by operators that preserve shape.
    pub(crate) fn with_pixels(&self, pixels: Vec<Rgb>) -> Frame {
        debug_assert_eq!(pixels.len(), self.pixels.len());
        Frame {
            width: self.width,
            height: self.height,
            pixels,
        }
    }
}

/// Axis-aligned face region in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl BoundingBox {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        BoundingBox { x, y, w, h }
    }

    pub fn fits(&self, width: u32, height: u32) -> bool {
        self.w > 0
            && self.h > 0
            && u64::from(self.x) + u64::from(self.w) <= u64::from(width)
            && u64::from(self.y) + u64::from(self.h) <= u64::from(height)
    }

    /// Expresses `inner`, given relative to this box, in the parent frame's coordinates.
    pub fn compose(&self, inner: &BoundingBox) -> BoundingBox {
        BoundingBox {
            x: self.x + inner.x,
            y: self.y + inner.y,
            w: inner.w,
            h: inner.h,
        }
    }
}

/// A frame on disk belonging to a participant's sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRef {
    pub participant_id: String,
    pub frame_index: u64,
    pub source_path: PathBuf,
}

pub fn crop(frame: &Frame, bbox: &BoundingBox) -> Result<Frame> {
    if !bbox.fits(frame.width, frame.height) {
        return Err(Error::validation(format!(
            "bounding box ({}, {}, {}, {}) exceeds {}x{} frame",
            bbox.x, bbox.y, bbox.w, bbox.h, frame.width, frame.height
        )));
    }
    let mut pixels = Vec::with_capacity(bbox.w as usize * bbox.h as usize);
    for row in frame.rows().skip(bbox.y as usize).take(bbox.h as usize) {
        pixels.extend_from_slice(&row[bbox.x as usize..(bbox.x + bbox.w) as usize]);
    }
    Frame::new(bbox.w, bbox.h, pixels)
}

/// Reads a PNG or binary PPM. Grayscale is replicated to RGB and alpha is dropped;
/// 16-bit and floating-point images are rejected.
pub fn load_frame(path: impl AsRef<Path>) -> Result<Frame> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let decode_err = |reason: String| Error::Decode {
        path: path.to_path_buf(),
        reason,
    };
    let format = image::guess_format(&bytes)
        .map_err(|e| decode_err(format!("unrecognized image format: {e}")))?;
    if !matches!(format, ImageFormat::Png | ImageFormat::Pnm) {
        return Err(decode_err(format!("unsupported format {format:?}")));
    }
    let image = image::load_from_memory_with_format(&bytes, format)
        .map_err(|e| decode_err(e.to_string()))?;
    let rgb: RgbImage = match image {
        DynamicImage::ImageRgb8(img) => img,
        DynamicImage::ImageRgba8(_) | DynamicImage::ImageLuma8(_) | DynamicImage::ImageLumaA8(_) => {
            image.to_rgb8()
        }
        other => {
            return Err(decode_err(format!(
                "unsupported color model {:?} (8-bit gray or RGB required)",
                other.color()
            )));
        }
    };
    let (width, height) = rgb.dimensions();
    let pixels = rgb.pixels().map(|p| p.0).collect();
    Frame::new(width, height, pixels)
}

/// Writes `frame` as PNG, or as binary PPM when the extension is `.ppm`.
/// Missing parent directories are created.
pub fn save_frame(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let bytes = encode_frame(frame, FrameFormat::from_path(path)).map_err(|reason| {
        Error::Encode {
            path: path.to_path_buf(),
            reason,
        }
    })?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameFormat {
    Png,
    Ppm,
}

impl FrameFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("ppm") => FrameFormat::Ppm,
            _ => FrameFormat::Png,
        }
    }
}

pub fn encode_frame(frame: &Frame, format: FrameFormat) -> Result<Vec<u8>, String> {
    match format {
        FrameFormat::Ppm => {
            let header = format!("P6\n{} {}\n255\n", frame.width, frame.height);
            let mut out = Vec::with_capacity(header.len() + frame.pixels.len() * 3);
            out.extend_from_slice(header.as_bytes());
            out.extend(frame.pixels.iter().flatten());
            Ok(out)
        }
        FrameFormat::Png => {
            let raw: Vec<u8> = frame.pixels.iter().flatten().copied().collect();
            let img = RgbImage::from_raw(frame.width, frame.height, raw)
                .ok_or_else(|| "pixel buffer size mismatch".to_string())?;
            let mut out = std::io::Cursor::new(Vec::new());
            img.write_to(&mut out, ImageFormat::Png)
                .map_err(|e| e.to_string())?;
            Ok(out.into_inner())
        }
    }
}

/// Image dimensions read from the file header only.
pub fn frame_dimensions(path: impl AsRef<Path>) -> Result<(u32, u32)> {
    let path = path.as_ref();
    image::image_dimensions(path).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn patterned(w: u32, h: u32) -> Frame {
        Frame::from_fn(w, h, |x, y| [(x * 17) as u8, (y * 31) as u8, (x ^ y) as u8]).unwrap()
    }

    #[test]
    fn rejects_mismatched_pixel_count() {
        assert!(Frame::new(2, 2, vec![[0; 3]; 3]).is_err());
        assert!(Frame::new(0, 1, vec![]).is_err());
    }

    #[test]
    fn full_crop_is_identity() {
        let f = patterned(4, 4);
        assert_eq!(crop(&f, &BoundingBox::new(0, 0, 4, 4)).unwrap(), f);
    }

    #[test]
    fn inner_crop_matches_direct_indexing() {
        let f = patterned(4, 4);
        let out = crop(&f, &BoundingBox::new(1, 1, 2, 2)).unwrap();
        assert_eq!((out.width(), out.height()), (2, 2));
        for j in 0..2 {
            for i in 0..2 {
                assert_eq!(out.get(i, j), f.get(1 + i, 1 + j));
            }
        }
    }

    #[test]
    fn crop_out_of_bounds() {
        let f = patterned(4, 4);
        let err = crop(&f, &BoundingBox::new(3, 3, 2, 2)).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn load_two_pixel_ppm() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.ppm");
        let mut bytes = b"P6\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 0, 0, 255, 255, 255]);
        fs::write(&path, bytes).unwrap();
        let f = load_frame(&path).unwrap();
        assert_eq!(f, Frame::new(2, 1, vec![[0, 0, 0], [255, 255, 255]]).unwrap());
    }

    #[test]
    fn truncated_file_names_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cut.ppm");
        fs::write(&path, b"P6\n4 4\n255\n\x00\x01").unwrap();
        let err = load_frame(&path).unwrap_err();
        assert!(matches!(err, Error::Decode { .. }));
        assert!(err.to_string().contains("cut.ppm"), "{err}");

        let png = dir.path().join("cut.png");
        let full = encode_frame(&patterned(8, 8), FrameFormat::Png).unwrap();
        fs::write(&png, &full[..full.len() / 2]).unwrap();
        assert!(load_frame(&png).unwrap_err().to_string().contains("cut.png"));
    }

    #[test]
    fn sixteen_bit_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("deep.png");
        let img = image::ImageBuffer::<image::Rgb<u16>, _>::from_pixel(2, 2, image::Rgb([1000, 2, 3]));
        img.save(&path).unwrap();
        let err = load_frame(&path).unwrap_err();
        assert!(err.to_string().contains("unsupported color model"), "{err}");
    }

    #[test]
    fn grayscale_promoted_and_alpha_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let gray = dir.path().join("g.png");
        image::GrayImage::from_pixel(3, 2, image::Luma([77])).save(&gray).unwrap();
        assert_eq!(load_frame(&gray).unwrap(), Frame::filled(3, 2, [77; 3]).unwrap());

        let rgba = dir.path().join("a.png");
        image::RgbaImage::from_pixel(1, 1, image::Rgba([1, 2, 3, 4])).save(&rgba).unwrap();
        assert_eq!(load_frame(&rgba).unwrap().pixels(), &[[1, 2, 3]]);
    }

    #[test]
    fn black_pixel_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/black.png");
        let f = Frame::filled(1, 1, [0; 3]).unwrap();
        save_frame(&f, &path).unwrap();
        assert_eq!(load_frame(&path).unwrap().pixels(), &[[0, 0, 0]]);
    }

    #[test]
    fn save_into_file_as_directory_fails() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("blocker");
        fs::write(&blocker, b"x").unwrap();
        let f = Frame::filled(1, 1, [0; 3]).unwrap();
        assert!(save_frame(&f, blocker.join("out.png")).is_err());
    }
}
