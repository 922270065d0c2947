//! EMB1 embedding container.
//!
//! ```text
//! offset  size  field
//! 0       4     magic  b"EMB1"
//! 4       2     version (u16 LE) = 1
//! 6       2     flags   (u16 LE); bit 0 = rows unit-normalized, others must be 0
//! 8       4     count   (u32 LE)
//! 12      4     dim     (u32 LE)
//! 16      4·count·dim  f32 LE payload, row-major
//! ```
//!
//! Readers reject anything after the payload, non-finite values and `dim = 0`.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use smisel_core::{EmbeddingKind, EmbeddingMatrix};

pub const MAGIC: [u8; 4] = *b"EMB1";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 16;
pub const FLAG_NORMALIZED: u16 = 1;

#[derive(Debug, thiserror::Error)]
pub enum Emb1Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic {0:?}, expected \"EMB1\"")]
    BadMagic([u8; 4]),
    #[error("unsupported EMB1 version {0}")]
    UnsupportedVersion(u16),
    #[error("reserved flag bits set: {0:#06x}")]
    ReservedFlags(u16),
    #[error("truncated file: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("unexpected data after the payload")]
    TrailingData,
    #[error("matrix of {count} x {dim} does not fit the 32-bit header fields")]
    TooLarge { count: usize, dim: usize },
    #[error("invalid matrix: {0}")]
    Matrix(#[from] smisel_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Emb1Header {
    pub version: u16,
    pub flags: u16,
    pub count: u32,
    pub dim: u32,
}

impl Emb1Header {
    pub fn for_matrix(matrix: &EmbeddingMatrix) -> Result<Self, Emb1Error> {
        let too_large = || Emb1Error::TooLarge {
            count: matrix.count(),
            dim: matrix.dim(),
        };
        Ok(Self {
            version: VERSION,
            flags: if matrix.is_normalized() { FLAG_NORMALIZED } else { 0 },
            count: u32::try_from(matrix.count()).map_err(|_| too_large())?,
            dim: u32::try_from(matrix.dim()).map_err(|_| too_large())?,
        })
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..4].copy_from_slice(&MAGIC);
        out[4..6].copy_from_slice(&self.version.to_le_bytes());
        out[6..8].copy_from_slice(&self.flags.to_le_bytes());
        out[8..12].copy_from_slice(&self.count.to_le_bytes());
        out[12..16].copy_from_slice(&self.dim.to_le_bytes());
        out
    }

    /// Decodes and validates magic, version and reserved flags.
    pub fn parse(bytes: &[u8; HEADER_LEN]) -> Result<Self, Emb1Error> {
        let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(Emb1Error::BadMagic(magic));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(Emb1Error::UnsupportedVersion(version));
        }
        let flags = u16::from_le_bytes([bytes[6], bytes[7]]);
        if flags & !FLAG_NORMALIZED != 0 {
            return Err(Emb1Error::ReservedFlags(flags));
        }
        Ok(Self {
            version,
            flags,
            count: u32::from_le_bytes(bytes[8..12].try_into().unwrap()),
            dim: u32::from_le_bytes(bytes[12..16].try_into().unwrap()),
        })
    }

    /// Payload size in bytes; saturates for headers no real file can satisfy.
    pub fn payload_len(&self) -> u64 {
        (u64::from(self.count) * u64::from(self.dim)).saturating_mul(4)
    }
}

/// Writes `matrix` and returns the number of bytes written (`16 + 4·N·d`).
pub fn write_emb1<W: Write>(matrix: &EmbeddingMatrix, mut sink: W) -> Result<usize, Emb1Error> {
    let header = Emb1Header::for_matrix(matrix)?;
    sink.write_all(&header.to_bytes())?;
    let mut payload = Vec::with_capacity(matrix.data().len() * 4);
    for v in matrix.data() {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    sink.write_all(&payload)?;
    sink.flush()?;
    Ok(HEADER_LEN + payload.len())
}

fn read_up_to<R: Read>(source: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match source.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// Reads one EMB1 matrix, tagging it with `kind`.
pub fn read_emb1<R: Read>(mut source: R, kind: EmbeddingKind) -> Result<EmbeddingMatrix, Emb1Error> {
    let mut head = [0u8; HEADER_LEN];
    let got = read_up_to(&mut source, &mut head)?;
    if got >= 4 && head[0..4] != MAGIC {
        return Err(Emb1Error::BadMagic(head[0..4].try_into().unwrap()));
    }
    if got < HEADER_LEN {
        return Err(Emb1Error::Truncated {
            expected: HEADER_LEN as u64,
            found: got as u64,
        });
    }
    let header = Emb1Header::parse(&head)?;
    if header.dim == 0 {
        return Err(smisel_core::Error::ZeroDimension.into());
    }
    let expected = header.payload_len();
    // grow with the data rather than trusting the header for the allocation size
    let mut payload = Vec::with_capacity(expected.min(1 << 20) as usize);
    (&mut source).take(expected).read_to_end(&mut payload)?;
    if (payload.len() as u64) < expected {
        return Err(Emb1Error::Truncated {
            expected: expected.saturating_add(HEADER_LEN as u64),
            found: HEADER_LEN as u64 + payload.len() as u64,
        });
    }
    let mut extra = [0u8; 1];
    if read_up_to(&mut source, &mut extra)? != 0 {
        return Err(Emb1Error::TrailingData);
    }
    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let matrix = EmbeddingMatrix::new(kind, header.count as usize, header.dim as usize, data)?;
    Ok(matrix.with_normalized_flag(header.flags & FLAG_NORMALIZED != 0))
}

pub fn read_emb1_file(path: &Path, kind: EmbeddingKind) -> Result<EmbeddingMatrix, Emb1Error> {
    read_emb1(BufReader::new(File::open(path)?), kind)
}

pub fn write_emb1_file(matrix: &EmbeddingMatrix, path: &Path) -> Result<usize, Emb1Error> {
    write_emb1(matrix, BufWriter::new(File::create(path)?))
}
