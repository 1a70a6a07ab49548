//! Binary PGM images and the naive neighbourhood denoiser.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Row-major 8-bit grey image, 0 black to 255 white.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageGrid {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl ImageGrid {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::Domain(format!(
                "{} pixels do not fill a {width}x{height} grid",
                pixels.len()
            )));
        }
        Ok(ImageGrid {
            width,
            height,
            pixels,
        })
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }
}

/// Reads the next header token, skipping whitespace and `#` comments.
fn header_token<'a>(data: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        match data.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while data.get(*pos).is_some_and(|&b| b != b'\n') {
                    *pos += 1;
                }
            }
            Some(_) => break,
            None => return Err(Error::MalformedHeader("unexpected end of header".into())),
        }
    }
    let start = *pos;
    while data.get(*pos).is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#') {
        *pos += 1;
    }
    Ok(&data[start..*pos])
}

fn header_number(data: &[u8], pos: &mut usize, what: &str) -> Result<u32> {
    let tok = header_token(data, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::MalformedHeader(format!("bad {what} {:?}", String::from_utf8_lossy(tok))))
}

pub fn parse_pgm(data: &[u8]) -> Result<ImageGrid> {
    let mut pos = 0;
    let magic = header_token(data, &mut pos)?;
    if magic != b"P5" {
        return Err(Error::UnsupportedFormat(String::from_utf8_lossy(magic).into_owned()));
    }
    let width = header_number(data, &mut pos, "width")? as usize;
    let height = header_number(data, &mut pos, "height")? as usize;
    let maxval = header_number(data, &mut pos, "maxval")?;
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if !data.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(Error::MalformedHeader("missing separator after maxval".into()));
    }
    pos += 1;
    let expected = width * height;
    let raster = &data[pos..];
    if raster.len() < expected {
        return Err(Error::TruncatedPayload {
            expected,
            found: raster.len(),
        });
    }
    ImageGrid::new(width, height, raster[..expected].to_vec())
}

pub fn encode_pgm(grid: &ImageGrid) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", grid.width, grid.height).into_bytes();
    out.extend_from_slice(&grid.pixels);
    out
}

pub fn load_pgm(path: &Path) -> Result<ImageGrid> {
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(&data)
}

pub fn save_pgm(grid: &ImageGrid, path: &Path) -> Result<()> {
    fs::write(path, encode_pgm(grid)).map_err(|e| Error::io(path, e))
}

/// One simultaneous pass: a pixel is inverted when at least five of its
/// in-bounds neighbours have the other colour. Border pixels have fewer
/// neighbours but the same threshold.
pub fn naive_denoise(grid: &ImageGrid) -> Result<ImageGrid> {
    if let Some((i, &v)) = grid.pixels.iter().enumerate().find(|(_, &v)| v != 0 && v != 255) {
        return Err(Error::NotMonochrome(v, i));
    }
    let (w, h) = (grid.width as isize, grid.height as isize);
    let mut out = grid.pixels.clone();
    for r in 0..h {
        for c in 0..w {
            let here = grid.get(r as usize, c as usize);
            let mut differing = 0;
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (nr, nc) = (r + dr, c + dc);
                    if (dr, dc) == (0, 0) || nr < 0 || nc < 0 || nr >= h || nc >= w {
                        continue;
                    }
                    if grid.get(nr as usize, nc as usize) != here {
                        differing += 1;
                    }
                }
            }
            if differing >= 5 {
                out[(r * w + c) as usize] = 255 - here;
            }
        }
    }
    ImageGrid::new(grid.width, grid.height, out)
}
