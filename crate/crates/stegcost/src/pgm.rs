//! Binary PGM (`P5`, maxval 255) reading and writing.

use std::fs;
use std::path::Path;

use stegcost_core::image::MIN_SIDE;
use stegcost_core::GrayImage;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PgmError {
    #[error("byte {offset}: expected magic number `P5`")]
    BadMagic { offset: usize },
    #[error("byte {offset}: expected {field}")]
    BadHeader { offset: usize, field: &'static str },
    #[error("byte {offset}: unsupported maxval {maxval}, only 255 is accepted")]
    UnsupportedMaxval { offset: usize, maxval: u64 },
    #[error("byte {offset}: raster truncated, need {expected} bytes, found {actual}")]
    Truncated { offset: usize, expected: usize, actual: usize },
    #[error("byte {offset}: image is {width}x{height}, both sides must be at least {min}")]
    TooSmall { offset: usize, width: usize, height: usize, min: usize },
}

/// A decoded raster without the minimum-size requirement of [`GrayImage`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmRaster {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    /// Skips whitespace and `#` comments (which run to the end of the line).
    fn skip_separators(&mut self) {
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

    fn number(&mut self, field: &'static str) -> Result<(u64, usize), PgmError> {
        self.skip_separators();
        let start = self.pos;
        let mut value: u64 = 0;
        while let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add((b - b'0') as u64))
                .ok_or(PgmError::BadHeader { offset: start, field })?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(PgmError::BadHeader { offset: start, field });
        }
        Ok((value, start))
    }
}

/// Parses a `P5` file into a raster of any size.
pub fn parse_pgm(bytes: &[u8]) -> Result<PgmRaster, PgmError> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(PgmError::BadMagic { offset: 0 });
    }
    let mut cur = Cursor { bytes, pos: 2 };
    let (width, _) = cur.number("width")?;
    let (height, _) = cur.number("height")?;
    let (maxval, maxval_at) = cur.number("maxval")?;
    if maxval != 255 {
        return Err(PgmError::UnsupportedMaxval { offset: maxval_at, maxval });
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(PgmError::BadHeader { offset: cur.pos, field: "whitespace after maxval" }),
    }
    let (width, height) = (width as usize, height as usize);
    let expected = width
        .checked_mul(height)
        .ok_or(PgmError::BadHeader { offset: 2, field: "dimensions that fit in memory" })?;
    let available = bytes.len() - cur.pos;
    if available < expected {
        return Err(PgmError::Truncated { offset: cur.pos, expected, actual: available });
    }
    Ok(PgmRaster { width, height, pixels: bytes[cur.pos..cur.pos + expected].to_vec() })
}

/// Parses a `P5` file into a [`GrayImage`], enforcing the minimum size.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage, PgmError> {
    let raster = parse_pgm(bytes)?;
    if raster.width < MIN_SIDE || raster.height < MIN_SIDE {
        return Err(PgmError::TooSmall { offset: 2, width: raster.width, height: raster.height, min: MIN_SIDE });
    }
    Ok(GrayImage::new(raster.width, raster.height, raster.pixels).expect("size checked above"))
}

/// Canonical encoding: `P5\n<w> <h>\n255\n` followed by the raster.
pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

#[derive(Debug, Error)]
pub enum PgmFileError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: PgmError },
}

pub fn load_pgm(path: &Path) -> Result<GrayImage, PgmFileError> {
    let p = path.display().to_string();
    let bytes = fs::read(path).map_err(|source| PgmFileError::Io { path: p.clone(), source })?;
    read_pgm(&bytes).map_err(|source| PgmFileError::Parse { path: p, source })
}

pub fn save_pgm(path: &Path, img: &GrayImage) -> std::io::Result<()> {
    fs::write(path, write_pgm(img))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_raster(header: &str, raster: &[u8]) -> Vec<u8> {
        let mut v = header.as_bytes().to_vec();
        v.extend_from_slice(raster);
        v
    }

    #[test]
    fn tiny_raster_is_copied_verbatim() {
        let r = parse_pgm(&with_raster("P5\n2 2\n255\n", &[0, 255, 128, 7])).unwrap();
        assert_eq!((r.width, r.height), (2, 2));
        assert_eq!(r.pixels, vec![0, 255, 128, 7]);
    }

    #[test]
    fn comments_are_skipped() {
        let img = read_pgm(&with_raster("P5\n# c\n5 5\n255\n", &[0; 25])).unwrap();
        assert_eq!((img.width(), img.height()), (5, 5));
        assert!(img.pixels().iter().all(|&p| p == 0));
        let img = read_pgm(&with_raster("P5 #a\n 5\t#b\n6 255\n", &[3; 30])).unwrap();
        assert_eq!((img.width(), img.height()), (5, 6));
    }

    #[test]
    fn raster_bytes_that_look_like_whitespace_are_data() {
        let raster: Vec<u8> = (0..25).map(|i| if i % 2 == 0 { b'\n' } else { b'#' }).collect();
        let img = read_pgm(&with_raster("P5\n5 5\n255\n", &raster)).unwrap();
        assert_eq!(img.pixels(), &raster[..]);
    }

    #[test]
    fn distinct_errors_with_offsets() {
        assert_eq!(read_pgm(b"P2\n5 5\n255\n"), Err(PgmError::BadMagic { offset: 0 }));
        assert_eq!(read_pgm(b""), Err(PgmError::BadMagic { offset: 0 }));
        assert_eq!(
            read_pgm(b"P5\n5 5\n65535\n"),
            Err(PgmError::UnsupportedMaxval { offset: 7, maxval: 65535 })
        );
        assert_eq!(
            read_pgm(&with_raster("P5\n5 5\n255\n", &[1; 10])),
            Err(PgmError::Truncated { offset: 11, expected: 25, actual: 10 })
        );
        assert!(matches!(read_pgm(&with_raster("P5\n4 5\n255\n", &[1; 20])), Err(PgmError::TooSmall { .. })));
        assert_eq!(read_pgm(b"P5\nx 5\n255\n"), Err(PgmError::BadHeader { offset: 3, field: "width" }));
        assert!(matches!(read_pgm(b"P5\n5 5\n255"), Err(PgmError::BadHeader { .. })));
    }

    #[test]
    fn canonical_header() {
        let img = GrayImage::filled(5, 5, 128).unwrap();
        let bytes = write_pgm(&img);
        assert_eq!(&bytes[..11], b"P5\n5 5\n255\n");
        assert_eq!(&bytes[11..], &[0x80; 25]);
    }

    #[test]
    fn round_trips() {
        let noise = stegcost_core::synth_cover(stegcost_core::TextureSpec::SmoothedNoise { kernel: 1 }, 8, 8, 3).unwrap();
        let white = GrayImage::filled(6, 9, 255).unwrap();
        for img in [noise, white] {
            assert_eq!(read_pgm(&write_pgm(&img)).unwrap(), img);
        }
    }

    #[test]
    fn rewrite_drops_comments_only() {
        let src = with_raster("P5\n#x\n 5   5\n255\n", &[9; 25]);
        let canonical = with_raster("P5\n5 5\n255\n", &[9; 25]);
        assert_eq!(write_pgm(&read_pgm(&src).unwrap()), canonical);
    }
}
