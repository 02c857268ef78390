//! 16-bit binary PGM depth dumps: big-endian millimeters, 0 = no return.

use std::io::{self, Read, Write};

use dess_core::DepthImage;

pub const MAXVAL: u16 = 65535;

/// Millimeter value for one pixel. Valid depths round to at least 1 mm so
/// they never collide with the no-return code.
pub fn quantize(depth: Option<f64>) -> u16 {
    match depth {
        None => 0,
        Some(d) => (d * 1000.0).round().clamp(1.0, MAXVAL as f64) as u16,
    }
}

pub fn write_pgm<W: Write>(img: &DepthImage, mut out: W) -> io::Result<()> {
    write!(out, "P5\n{} {}\n{}\n", img.width(), img.height(), MAXVAL)?;
    let mut buf = Vec::with_capacity(img.data().len() * 2);
    for y in 0..img.height() {
        for x in 0..img.width() {
            let d = img.query(x, y).expect("in bounds");
            buf.extend_from_slice(&quantize(d).to_be_bytes());
        }
    }
    out.write_all(&buf)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: u32,
    pub height: u32,
    pub maxval: u16,
    /// Row-major samples.
    pub samples: Vec<u16>,
}

impl Pgm {
    pub fn get(&self, x: u32, y: u32) -> u16 {
        self.samples[(y * self.width + x) as usize]
    }

    /// Back to meters; zero samples become no-return pixels.
    pub fn to_depth_image(&self) -> DepthImage {
        DepthImage::from_fn(self.width, self.height, |x, y| match self.get(x, y) {
            0 => dess_core::INVALID_DEPTH,
            mm => mm as f32 / 1000.0,
        })
    }
}

fn bad(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_string())
}

/// Reads a binary (P5) PGM with 8- or 16-bit samples.
pub fn read_pgm<R: Read>(mut input: R) -> io::Result<Pgm> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated PGM header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ASCII PGM header"))?);
    }
    if fields[0] != "P5" {
        return Err(bad("not a binary PGM"));
    }
    let num = |s: &str| s.parse::<u32>().map_err(|_| bad("bad PGM header number"));
    let (width, height, maxval) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
    if maxval == 0 || maxval > 65535 {
        return Err(bad("PGM maxval out of range"));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let n = width as usize * height as usize;
    let wide = maxval > 255;
    let need = if wide { 2 * n } else { n };
    let raster = bytes.get(pos..pos + need).ok_or_else(|| bad("truncated PGM raster"))?;
    let samples = if wide {
        raster.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
    } else {
        raster.iter().map(|&b| b as u16).collect()
    };
    Ok(Pgm {
        width,
        height,
        maxval: maxval as u16,
        samples,
    })
}
