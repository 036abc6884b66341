//! Netpbm readers and writers: PBM (P1/P4) for binary images, PGM (P2/P5) for gray.
//!
//! PBM follows the netpbm convention `1 = black`, which matches the crate's
//! bit encoding. PGM sample `v` maps to `v / maxval` (`v / 255` for 8-bit files).

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{BinaryImage, GrayImage};

/// Write bytes to a sibling temp file and rename it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::parse(path, "path has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

struct Header<'a> {
    magic: [u8; 2],
    width: usize,
    height: usize,
    maxval: Option<usize>,
    body: &'a [u8],
}

fn skip_ws_and_comments(data: &[u8], mut pos: usize) -> usize {
    loop {
        while pos < data.len() && data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < data.len() && data[pos] == b'#' {
            while pos < data.len() && data[pos] != b'\n' {
                pos += 1;
            }
        } else {
            return pos;
        }
    }
}

fn read_uint(data: &[u8], pos: usize, path: &Path) -> Result<(usize, usize)> {
    let start = skip_ws_and_comments(data, pos);
    let mut end = start;
    while end < data.len() && data[end].is_ascii_digit() {
        end += 1;
    }
    if end == start {
        return Err(Error::parse(path, format!("expected an integer at byte {start}")));
    }
    let s = std::str::from_utf8(&data[start..end]).unwrap();
    let v = s
        .parse()
        .map_err(|_| Error::parse(path, format!("integer out of range: {s}")))?;
    Ok((v, end))
}

fn parse_header<'a>(data: &'a [u8], path: &Path) -> Result<Header<'a>> {
    if data.len() < 2 || data[0] != b'P' {
        return Err(Error::parse(path, "missing netpbm magic number"));
    }
    let magic = [data[0], data[1]];
    let (width, pos) = read_uint(data, 2, path)?;
    let (height, mut pos) = read_uint(data, pos, path)?;
    let mut maxval = None;
    if matches!(&magic, b"P2" | b"P5") {
        let (m, p) = read_uint(data, pos, path)?;
        if m == 0 || m > 255 {
            return Err(Error::parse(path, format!("unsupported maxval {m}, expected 1..=255")));
        }
        maxval = Some(m);
        pos = p;
    }
    if width == 0 || height == 0 {
        return Err(Error::parse(path, format!("empty image {width}x{height}")));
    }
    // raw formats: exactly one whitespace byte separates header and raster
    if matches!(&magic, b"P4" | b"P5") {
        if pos >= data.len() || !data[pos].is_ascii_whitespace() {
            return Err(Error::parse(path, "missing whitespace after header"));
        }
        pos += 1;
    }
    Ok(Header {
        magic,
        width,
        height,
        maxval,
        body: &data[pos..],
    })
}

fn plain_values(body: &[u8], n: usize, path: &Path) -> Result<Vec<usize>> {
    let mut values = Vec::with_capacity(n);
    let mut pos = 0;
    while values.len() < n {
        let (v, p) = read_uint(body, pos, path)?;
        values.push(v);
        pos = p;
    }
    Ok(values)
}

/// Plain PBM values may be written without separators ("0101"), so read digit by digit.
fn plain_bits(body: &[u8], n: usize, path: &Path) -> Result<Vec<u8>> {
    let mut bits = Vec::with_capacity(n);
    let mut pos = 0;
    while bits.len() < n {
        pos = skip_ws_and_comments(body, pos);
        match body.get(pos) {
            Some(b'0') => bits.push(0),
            Some(b'1') => bits.push(1),
            Some(&c) => {
                return Err(Error::parse(path, format!("unexpected byte {c:#x} in P1 raster")));
            }
            None => return Err(Error::parse(path, "truncated P1 raster")),
        }
        pos += 1;
    }
    Ok(bits)
}

pub fn decode_pbm(data: &[u8], path: &Path) -> Result<BinaryImage> {
    let hdr = parse_header(data, path)?;
    let (w, h) = (hdr.width, hdr.height);
    let bits = match &hdr.magic {
        b"P1" => plain_bits(hdr.body, w * h, path)?,
        b"P4" => {
            let row_bytes = w.div_ceil(8);
            if hdr.body.len() < row_bytes * h {
                return Err(Error::parse(path, "truncated P4 raster"));
            }
            let mut bits = Vec::with_capacity(w * h);
            for row in hdr.body.chunks(row_bytes).take(h) {
                for col in 0..w {
                    bits.push((row[col / 8] >> (7 - col % 8)) & 1);
                }
            }
            bits
        }
        m => {
            return Err(Error::parse(
                path,
                format!("expected PBM (P1/P4), found {}", String::from_utf8_lossy(m)),
            ));
        }
    };
    BinaryImage::new(w, h, bits).map_err(|e| Error::parse(path, e.to_string()))
}

pub fn decode_pgm(data: &[u8], path: &Path) -> Result<GrayImage> {
    let hdr = parse_header(data, path)?;
    let n = hdr.width * hdr.height;
    let raw: Vec<usize> = match &hdr.magic {
        b"P2" => plain_values(hdr.body, n, path)?,
        b"P5" => {
            if hdr.body.len() < n {
                return Err(Error::parse(path, "truncated P5 raster"));
            }
            hdr.body[..n].iter().map(|&b| b as usize).collect()
        }
        m => {
            return Err(Error::parse(
                path,
                format!("expected PGM (P2/P5), found {}", String::from_utf8_lossy(m)),
            ));
        }
    };
    let maxval = hdr.maxval.unwrap() as f64;
    if let Some(v) = raw.iter().find(|&&v| v as f64 > maxval) {
        return Err(Error::parse(path, format!("sample {v} exceeds maxval {maxval}")));
    }
    let values = raw.into_iter().map(|v| v as f64 / maxval).collect();
    GrayImage::new(hdr.width, hdr.height, values).map_err(|e| Error::parse(path, e.to_string()))
}

/// Raw PBM (P4) encoding.
pub fn encode_pbm(img: &BinaryImage) -> Vec<u8> {
    let row_bytes = img.width.div_ceil(8);
    let mut out = format!("P4\n{} {}\n", img.width, img.height).into_bytes();
    out.reserve(row_bytes * img.height);
    for row in img.bits.chunks(img.width) {
        let mut packed = vec![0u8; row_bytes];
        for (col, &b) in row.iter().enumerate() {
            packed[col / 8] |= b << (7 - col % 8);
        }
        out.extend_from_slice(&packed);
    }
    out
}

/// Raw 8-bit PGM (P5) encoding; values are rounded to the nearest of 256 levels.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(img.values.iter().map(|v| (v * 255.0).round() as u8));
    out
}

pub fn read_pbm(path: &Path) -> Result<BinaryImage> {
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pbm(&data, path)
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&data, path)
}

/// Read any of P1/P2/P4/P5 as a gray image (binary images render black as 0.0).
pub fn read_gray_any(path: &Path) -> Result<GrayImage> {
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    match data.get(..2) {
        Some(b"P1") | Some(b"P4") => Ok(decode_pbm(&data, path)?.to_gray()),
        _ => decode_pgm(&data, path),
    }
}

pub fn write_pbm(path: &Path, img: &BinaryImage) -> Result<()> {
    write_atomic(path, &encode_pbm(img))
}

pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    write_atomic(path, &encode_pgm(img))
}
