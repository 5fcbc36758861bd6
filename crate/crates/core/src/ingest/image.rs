//! 8-bit grayscale frames: binary PGM (`P5`) and PNG.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use crate::error::{Error, Result};

/// Row-major luminance plane. Values are kept as `f32` so resampled
/// templates and intensity-transformed images share the type; anything read
/// from disk holds whole numbers in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::param(
                "data",
                format!("{} values for a {width}x{height} image", data.len()),
            ));
        }
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        GrayImage {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_u8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        GrayImage::new(width, height, bytes.iter().map(|&b| f32::from(b)).collect())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }

    /// Pixel with coordinates clamped into the image (edge replication).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f32 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.get(cx, cy)
    }

    pub fn row(&self, y: usize) -> &[f32] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    /// Values rounded and saturated to bytes.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|&v| v.round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    /// Applies `a * v + b` to every pixel, without clamping.
    pub fn map_affine(&self, a: f32, b: f32) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| a * v + b).collect(),
        }
    }
}

/// Loads a PGM (`P5`) or PNG file, picked by magic bytes.
pub fn load_image(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes)
}

/// Loads an image and checks it against the camera's declared dimensions.
pub fn load_frame_image(path: &Path, width: u32, height: u32) -> Result<GrayImage> {
    let img = load_image(path)?;
    if img.width() != width as usize || img.height() != height as usize {
        return Err(Error::ImageDimensions {
            expected_w: width,
            expected_h: height,
            found_w: img.width() as u32,
            found_h: img.height() as u32,
        });
    }
    Ok(img)
}

pub fn decode_image(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.starts_with(b"P5") {
        decode_pgm(bytes)
    } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        decode_png(bytes)
    } else {
        Err(Error::UnsupportedImage(
            "expected a binary PGM (P5) or PNG file".into(),
        ))
    }
}

pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        *field = pgm_header_number(bytes, &mut pos)?;
    }
    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 255 {
        return Err(Error::UnsupportedImage(format!(
            "PGM maxval {maxval} (only 8-bit is supported)"
        )));
    }
    if width == 0 || height == 0 {
        return Err(Error::UnsupportedImage("PGM with zero dimension".into()));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(c) if c.is_ascii_whitespace() => pos += 1,
        _ => {
            return Err(Error::TruncatedImage {
                expected: width * height,
                found: 0,
            })
        }
    }
    let expected = width * height;
    let raster = &bytes[pos..];
    if raster.len() < expected {
        return Err(Error::TruncatedImage {
            expected,
            found: raster.len(),
        });
    }
    GrayImage::from_u8(width, height, &raster[..expected])
}

fn pgm_header_number(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        match bytes.get(*pos) {
            Some(b'#') => {
                while let Some(&c) = bytes.get(*pos) {
                    *pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            }
            Some(c) if c.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
            None => return Err(Error::UnsupportedImage("PGM header ended early".into())),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::UnsupportedImage("malformed PGM header".into()))
}

pub fn decode_png(bytes: &[u8]) -> Result<GrayImage> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::UnsupportedImage(format!("PNG: {e}")))?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf).map_err(|e| match e {
        png::DecodingError::IoError(_) | png::DecodingError::Format(_) => Error::TruncatedImage {
            expected: reader_expected(bytes),
            found: bytes.len(),
        },
        other => Error::UnsupportedImage(format!("PNG: {other}")),
    })?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedImage(format!(
            "PNG bit depth {:?} (only 8-bit is supported)",
            info.bit_depth
        )));
    }
    let (w, h) = (info.width as usize, info.height as usize);
    let buf = &buf[..info.buffer_size()];
    let channels = info.color_type.samples();
    let data: Vec<f32> = match info.color_type {
        png::ColorType::Grayscale | png::ColorType::GrayscaleAlpha => buf
            .chunks_exact(channels)
            .map(|px| f32::from(px[0]))
            .collect(),
        png::ColorType::Rgb | png::ColorType::Rgba => buf
            .chunks_exact(channels)
            .map(|px| luma(px[0], px[1], px[2]))
            .collect(),
        png::ColorType::Indexed => {
            return Err(Error::UnsupportedImage("unexpanded palette PNG".into()))
        }
    };
    GrayImage::new(w, h, data)
}

fn reader_expected(bytes: &[u8]) -> usize {
    // IHDR width/height live at fixed offsets 16..24
    if bytes.len() >= 24 {
        let w = u32::from_be_bytes([bytes[16], bytes[17], bytes[18], bytes[19]]) as usize;
        let h = u32::from_be_bytes([bytes[20], bytes[21], bytes[22], bytes[23]]) as usize;
        w * h
    } else {
        0
    }
}

/// `round(0.299 R + 0.587 G + 0.114 B)`.
pub fn luma(r: u8, g: u8, b: u8) -> f32 {
    (0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b)).round() as f32
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.to_u8());
    out
}

pub fn encode_png(img: &GrayImage) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width() as u32, img.height() as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().expect("in-memory PNG header");
        writer
            .write_image_data(&img.to_u8())
            .expect("in-memory PNG data");
    }
    out
}

pub fn save_pgm(img: &GrayImage, path: &Path) -> Result<()> {
    fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e))
}

pub fn save_png(img: &GrayImage, path: &Path) -> Result<()> {
    fs::write(path, encode_png(img)).map_err(|e| Error::io(path, e))
}
