//! File formats for data matrices and aperture masks.
//!
//! Data matrix layout, all little-endian:
//!
//! ```text
//! bytes 0..8    magic  "ISARDATA"
//! bytes 8..12   u32    format version (1)
//! bytes 12..16  u32    reserved, zero
//! bytes 16..20  u32    N (angles)
//! bytes 20..24  u32    M (frequency steps)
//! then N·M pairs of f64 (re, im), row-major
//! ```
//!
//! Masks are text: a first line `nm_total <NM>` followed by one observed flat
//! index per line in ascending order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::model::{ApertureMask, DataMatrix};

pub const DATA_MAGIC: &[u8; 8] = b"ISARDATA";
pub const DATA_VERSION: u32 = 1;

fn format_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Format(msg.into()))
}

pub fn write_data(data: &DataMatrix, mut out: impl Write) -> Result<()> {
    let mut buf = Vec::with_capacity(24 + 16 * data.nm());
    buf.extend_from_slice(DATA_MAGIC);
    buf.extend_from_slice(&DATA_VERSION.to_le_bytes());
    buf.extend_from_slice(&0u32.to_le_bytes());
    for d in [data.n_angles(), data.n_freqs()] {
        let d = u32::try_from(d).map_err(|_| Error::Format(format!("dimension {d} exceeds u32")))?;
        buf.extend_from_slice(&d.to_le_bytes());
    }
    for v in data.as_vec() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_data(mut input: impl Read) -> Result<DataMatrix> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() < 24 {
        return format_err("data file shorter than its header");
    }
    if &bytes[..8] != DATA_MAGIC {
        return format_err("bad magic, not a data matrix file");
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"));
    let version = word(8);
    if version != DATA_VERSION {
        return format_err(format!("unsupported data format version {version}"));
    }
    let (n, m) = (word(16) as usize, word(20) as usize);
    let body = &bytes[24..];
    let expected = n.checked_mul(m).and_then(|k| k.checked_mul(16));
    if expected != Some(body.len()) {
        return format_err(format!("{n}x{m} header but {} payload bytes", body.len()));
    }
    let f = |c: &[u8]| f64::from_le_bytes(c.try_into().expect("8 bytes"));
    let entries = body.chunks_exact(16).map(|c| C64::new(f(&c[..8]), f(&c[8..]))).collect();
    DataMatrix::from_vec(n, m, entries)
}

pub fn save_data(data: &DataMatrix, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_data(data, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_data(path: &Path) -> Result<DataMatrix> {
    read_data(BufReader::new(File::open(path)?))
}

pub fn write_mask(mask: &ApertureMask, mut out: impl Write) -> Result<()> {
    writeln!(out, "nm_total {}", mask.nm_total())?;
    for i in mask.observed() {
        writeln!(out, "{i}")?;
    }
    Ok(())
}

pub fn read_mask(input: impl Read) -> Result<ApertureMask> {
    let mut lines = BufReader::new(input).lines();
    let first = lines.next().transpose()?.unwrap_or_default();
    let nm_total = match first.trim().strip_prefix("nm_total") {
        Some(rest) => rest.trim().parse::<usize>().map_err(|e| Error::Format(format!("nm_total: {e}")))?,
        None => return format_err("mask file must start with `nm_total <NM>`"),
    };
    let mut observed = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let idx = t.parse::<usize>().map_err(|e| Error::Format(format!("mask line {}: {e}", k + 2)))?;
        observed.push(idx);
    }
    ApertureMask::new(observed, nm_total)
}

pub fn save_mask(mask: &ApertureMask, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_mask(mask, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_mask(path: &Path) -> Result<ApertureMask> {
    read_mask(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{random_mask, synthesize_echo, RadarParams, Scene};

    #[test]
    fn data_round_trip_is_bit_exact() {
        let params = RadarParams::square_cells(5, 3, 10e9, 500e6).unwrap();
        let z = synthesize_echo(&Scene::quadcopter(), &params);
        let mut buf = Vec::new();
        write_data(&z, &mut buf).unwrap();
        assert_eq!(buf.len(), 24 + 16 * 15);
        assert_eq!(&buf[..8], DATA_MAGIC);
        let back = read_data(buf.as_slice()).unwrap();
        assert_eq!(back.n_angles(), 5);
        assert_eq!(back.as_vec(), z.as_vec());
    }

    #[test]
    fn corrupt_data_rejected() {
        let z = DataMatrix::zeros(2, 2);
        let mut buf = Vec::new();
        write_data(&z, &mut buf).unwrap();
        assert!(read_data(&buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_data(bad.as_slice()).is_err());
        let mut ver = buf;
        ver[8] = 9;
        assert!(read_data(ver.as_slice()).is_err());
    }

    #[test]
    fn mask_round_trip() {
        let mask = random_mask(100, 17, 3).unwrap();
        let mut buf = Vec::new();
        write_mask(&mask, &mut buf).unwrap();
        assert_eq!(read_mask(buf.as_slice()).unwrap(), mask);
        assert!(read_mask(&b"12\n3\n"[..]).is_err());
        assert!(read_mask(&b"nm_total 4\n7\n"[..]).is_err());
    }
}
