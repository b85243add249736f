//! FFM1 far-field archives.
//!
//! Layout, all little-endian:
//!
//! ```text
//! "FFM1"  u32 version  u32 N_θ  u32 N_φ  f64 ω
//! u32 media count, then (λ, μ, ρ) as f64 per medium (exterior first)
//! u8 role tag
//! 3N×3N entries row-major, each (re, im) as f64
//! u64 checksum: first 8 bytes of SHA-256 over everything before it
//! ```

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::geometry::DirectionGrid;
use crate::inversion::{FarFieldMatrix, Role};
use crate::linalg::{CMat, C64};
use crate::wavecore::ElasticMedium;
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"FFM1";
pub const ARCHIVE_VERSION: u32 = 1;

fn checksum(bytes: &[u8]) -> u64 {
    let h = Sha256::digest(bytes);
    u64::from_le_bytes(h[..8].try_into().expect("8 bytes"))
}

pub fn encode(f: &FarFieldMatrix) -> Vec<u8> {
    let n = f.dim();
    let mut out = Vec::with_capacity(64 + 16 * n * n);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&ARCHIVE_VERSION.to_le_bytes());
    out.extend_from_slice(&(f.grid.n_theta as u32).to_le_bytes());
    out.extend_from_slice(&(f.grid.n_phi as u32).to_le_bytes());
    out.extend_from_slice(&f.omega.to_le_bytes());
    out.extend_from_slice(&(f.media.len() as u32).to_le_bytes());
    for m in &f.media {
        for v in [m.lambda, m.mu, m.rho] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out.push(f.role.tag());
    for i in 0..n {
        for j in 0..n {
            let z = f.data[(i, j)];
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    let sum = checksum(&out);
    out.extend_from_slice(&sum.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(k).filter(|&e| e <= self.bytes.len()).ok_or_else(|| Error::Archive("truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<FarFieldMatrix> {
    if bytes.len() < 8 || &bytes[..4] != MAGIC {
        return Err(Error::Archive("not an FFM1 archive (bad magic)".into()));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    if checksum(body) != u64::from_le_bytes(tail.try_into().expect("8 bytes")) {
        return Err(Error::Archive("checksum mismatch".into()));
    }
    let mut r = Reader { bytes: body, pos: 4 };
    let version = r.u32()?;
    if version != ARCHIVE_VERSION {
        return Err(Error::Archive(format!("unsupported version {version}")));
    }
    let (nt, np) = (r.u32()? as usize, r.u32()? as usize);
    let omega = r.f64()?;
    let count = r.u32()? as usize;
    let mut media = Vec::with_capacity(count.min(16));
    for _ in 0..count {
        let (lambda, mu, rho) = (r.f64()?, r.f64()?, r.f64()?);
        media.push(ElasticMedium::new(lambda, mu, rho).map_err(|e| Error::Archive(format!("media table: {e}")))?);
    }
    if media.is_empty() {
        return Err(Error::Archive("empty media table".into()));
    }
    let tag = r.take(1)?[0];
    let role = Role::from_tag(tag).ok_or_else(|| Error::Archive(format!("unknown role tag {tag}")))?;
    let grid = DirectionGrid::new(nt, np).map_err(|e| Error::Archive(format!("header: {e}")))?;
    let n = grid.dim();
    if body.len() - r.pos != 16 * n * n {
        return Err(Error::Archive(format!("payload holds {} bytes, header implies {}", body.len() - r.pos, 16 * n * n)));
    }
    let mut data = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            data[(i, j)] = C64::new(r.f64()?, r.f64()?);
        }
    }
    Ok(FarFieldMatrix { grid, omega, media, role, data })
}

pub fn write_archive(path: &Path, f: &FarFieldMatrix) -> Result<()> {
    std::fs::write(path, encode(f))?;
    Ok(())
}

pub fn read_archive(path: &Path) -> Result<FarFieldMatrix> {
    decode(&std::fs::read(path)?).map_err(|e| Error::Archive(format!("{}: {e}", path.display())))
}
