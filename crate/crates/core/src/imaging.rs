//! RGB rasters, foreground masks, binary PPM I/O and nearest-neighbor resizing.

use std::path::Path;

use crate::error::{Error, Result};

/// Default normalized pedestrian crop size (width, height).
pub const DEFAULT_NORM_SIZE: (usize, usize) = (48, 128);

/// Row-major 24-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::arg(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::arg(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(ImageBuffer {
            width,
            height,
            pixels,
        })
    }

    /// Image filled with a single color.
    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        Self::new(width, height, vec![rgb; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
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
    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        self.pixels[y * self.width + x] = rgb;
    }
}

/// Row-major foreground mask; `true` marks a foreground pixel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

/// A mask annotating which pixels of an image belong to the person.
pub type ForegroundMask = Mask;

impl Mask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::arg(format!(
                "mask dimensions must be positive, got {width}x{height}"
            )));
        }
        if bits.len() != width * height {
            return Err(Error::arg(format!(
                "{width}x{height} mask needs {} bits, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(Mask {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self::new(width, height, bits)
    }

    /// Foreground wherever any channel of `img` is nonzero.
    pub fn from_image(img: &ImageBuffer) -> Self {
        Mask {
            width: img.width,
            height: img.height,
            bits: img
                .pixels
                .iter()
                .map(|p| p.iter().any(|&c| c != 0))
                .collect(),
        }
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
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Mask with every pixel marked as foreground.
pub fn full_mask(width: usize, height: usize) -> Result<ForegroundMask> {
    Mask::new(width, height, vec![true; width * height])
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::decode(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::decode(start, format!("{what} out of range")))
    }
}

/// Decodes a binary PPM (`P6`, maxval 255).
pub fn decode_ppm(bytes: &[u8]) -> Result<ImageBuffer> {
    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        return Err(Error::decode(0, "missing P6 magic"));
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    cur.skip_whitespace_and_comments();
    let maxval_at = cur.pos;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(Error::decode(
            maxval_at,
            format!("maxval {maxval} unsupported, expected 255"),
        ));
    }
    if width == 0 || height == 0 {
        return Err(Error::decode(
            maxval_at,
            format!("zero image dimension {width}x{height}"),
        ));
    }
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => {
            return Err(Error::decode(
                cur.pos,
                "expected single whitespace before pixel data",
            ))
        }
    }
    let needed = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| Error::decode(cur.pos, "image dimensions overflow"))?;
    let payload = &bytes[cur.pos..];
    if payload.len() < needed {
        return Err(Error::decode(
            bytes.len(),
            format!(
                "truncated pixel data: need {needed} bytes, found {}",
                payload.len()
            ),
        ));
    }
    let pixels = payload[..needed]
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    ImageBuffer::new(width, height, pixels)
}

/// Encodes an image as binary PPM with a minimal header.
pub fn encode_ppm(img: &ImageBuffer) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.reserve(img.pixels.len() * 3);
    for p in &img.pixels {
        out.extend_from_slice(p);
    }
    out
}

/// Decodes an in-memory raster. Binary PPM is always supported; BMP, PNG and
/// the remaining PNM variants need the `raster-formats` feature.
pub fn decode_image(bytes: &[u8]) -> Result<ImageBuffer> {
    if bytes.starts_with(b"P6") {
        return decode_ppm(bytes);
    }
    #[cfg(feature = "raster-formats")]
    {
        let decoded = image::load_from_memory(bytes)
            .map_err(|e| Error::decode(0, e.to_string()))?
            .to_rgb8();
        let (w, h) = (decoded.width() as usize, decoded.height() as usize);
        let pixels = decoded.pixels().map(|p| p.0).collect();
        ImageBuffer::new(w, h, pixels)
    }
    #[cfg(not(feature = "raster-formats"))]
    Err(Error::decode(0, "missing P6 magic"))
}

pub fn load_image(path: &Path) -> Result<ImageBuffer> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes).map_err(|e| Error::File {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Loads a mask image; any nonzero pixel is foreground.
pub fn load_mask(path: &Path) -> Result<ForegroundMask> {
    load_image(path).map(|img| Mask::from_image(&img))
}

pub fn save_ppm(path: &Path, img: &ImageBuffer) -> Result<()> {
    std::fs::write(path, encode_ppm(img)).map_err(|e| Error::io(path, e))
}

#[inline]
fn source_index(dst: usize, dst_len: usize, src_len: usize) -> usize {
    dst * src_len / dst_len
}

/// Nearest-neighbor resize: output (x, y) samples input
/// (floor(x * W_in / w), floor(y * H_in / h)).
pub fn resize_nearest(img: &ImageBuffer, width: usize, height: usize) -> Result<ImageBuffer> {
    if width == 0 || height == 0 {
        return Err(Error::arg(format!(
            "resize target must be positive, got {width}x{height}"
        )));
    }
    if (width, height) == (img.width, img.height) {
        return Ok(img.clone());
    }
    ImageBuffer::from_fn(width, height, |x, y| {
        img.get(
            source_index(x, width, img.width),
            source_index(y, height, img.height),
        )
    })
}

/// Same sampling rule as [`resize_nearest`], applied to a mask.
pub fn resize_mask_nearest(mask: &Mask, width: usize, height: usize) -> Result<Mask> {
    if width == 0 || height == 0 {
        return Err(Error::arg(format!(
            "resize target must be positive, got {width}x{height}"
        )));
    }
    Mask::from_fn(width, height, |x, y| {
        mask.get(
            source_index(x, width, mask.width),
            source_index(y, height, mask.height),
        )
    })
}
