//! Versioned binary checkpoints with a trailing SHA-256 digest.
//!
//! Network record, all integers and floats little-endian:
//!
//! ```text
//! magic "SGMLP\0" | version u32 | layer count+1 u64 | dims u64...
//! | learning rate f64 | per layer: weights (in x out, row-major) then biases
//! | sha256 of everything before it
//! ```
//!
//! A bundle groups several networks plus free-form `f64` state:
//!
//! ```text
//! magic "SGBDL\0" | version u32 | net count u64 | (length u64, record)...
//! | extra count u64 | extra f64... | sha256
//! ```

use std::path::Path;

use ndarray::{Array1, Array2};
use sha2::{Digest, Sha256};

use super::Mlp;
use crate::error::{Result, SimError};

const NET_MAGIC: &[u8; 6] = b"SGMLP\0";
const BUNDLE_MAGIC: &[u8; 6] = b"SGBDL\0";
const VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;

fn seal(mut body: Vec<u8>) -> Vec<u8> {
    let digest = Sha256::digest(&body);
    body.extend_from_slice(&digest);
    body
}

fn unseal<'a>(bytes: &'a [u8], magic: &[u8; 6]) -> Result<Reader<'a>> {
    if bytes.len() < magic.len() + 4 + DIGEST_LEN {
        return Err(SimError::Checkpoint("truncated record".into()));
    }
    let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
    if Sha256::digest(body).as_slice() != digest {
        return Err(SimError::Checkpoint("checksum mismatch".into()));
    }
    let mut r = Reader { bytes: body, pos: 0 };
    if r.take(magic.len())? != magic {
        return Err(SimError::Checkpoint("bad magic".into()));
    }
    let version = u32::from_le_bytes(r.take(4)?.try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(SimError::Checkpoint(format!("unsupported version {version}")));
    }
    Ok(r)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| SimError::Checkpoint("truncated record".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| SimError::Checkpoint("length overflow".into()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn finished(&self) -> Result<()> {
        if self.pos == self.bytes.len() {
            Ok(())
        } else {
            Err(SimError::Checkpoint("trailing bytes".into()))
        }
    }
}

pub fn encode(net: &Mlp) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + 8 * net.parameter_count());
    out.extend_from_slice(NET_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(net.dims().len() as u64).to_le_bytes());
    for &d in net.dims() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    out.extend_from_slice(&net.learning_rate.to_le_bytes());
    for p in net.parameters() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    seal(out)
}

pub fn decode(bytes: &[u8]) -> Result<Mlp> {
    let mut r = unseal(bytes, NET_MAGIC)?;
    let n_dims = r.usize()?;
    if !(2..=64).contains(&n_dims) {
        return Err(SimError::Checkpoint(format!("implausible layer count {n_dims}")));
    }
    let dims = (0..n_dims).map(|_| r.usize()).collect::<Result<Vec<_>>>()?;
    let lr = r.f64()?;
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for pair in dims.windows(2) {
        let w = (0..pair[0] * pair[1]).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let b = (0..pair[1]).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        weights.push(Array2::from_shape_vec((pair[0], pair[1]), w).expect("sized"));
        biases.push(Array1::from(b));
    }
    r.finished()?;
    Mlp::from_parts(dims, weights, biases, lr).map_err(|e| SimError::Checkpoint(e.to_string()))
}

pub fn encode_bundle(nets: &[&Mlp], extra: &[f64]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(BUNDLE_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(nets.len() as u64).to_le_bytes());
    for net in nets {
        let rec = encode(net);
        out.extend_from_slice(&(rec.len() as u64).to_le_bytes());
        out.extend_from_slice(&rec);
    }
    out.extend_from_slice(&(extra.len() as u64).to_le_bytes());
    for v in extra {
        out.extend_from_slice(&v.to_le_bytes());
    }
    seal(out)
}

pub fn decode_bundle(bytes: &[u8]) -> Result<(Vec<Mlp>, Vec<f64>)> {
    let mut r = unseal(bytes, BUNDLE_MAGIC)?;
    let count = r.usize()?;
    let mut nets = Vec::new();
    for _ in 0..count {
        let len = r.usize()?;
        nets.push(decode(r.take(len)?)?);
    }
    let n_extra = r.usize()?;
    let extra = (0..n_extra).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    r.finished()?;
    Ok((nets, extra))
}

pub fn save(net: &Mlp, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode(net))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Mlp> {
    decode(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;

    fn net() -> Mlp {
        let mut rng = seeds::substream(3, seeds::INIT);
        Mlp::new(&[7, 10, 10, 4], 1e-3, &mut rng).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let n = net();
        let back = decode(&encode(&n)).unwrap();
        assert_eq!(back, n);
        let bits: Vec<u64> = back.parameters().map(f64::to_bits).collect();
        let orig: Vec<u64> = n.parameters().map(f64::to_bits).collect();
        assert_eq!(bits, orig);
    }

    #[test]
    fn corruption_is_detected() {
        let mut bytes = encode(&net());
        bytes[40] ^= 1;
        assert!(matches!(decode(&bytes), Err(SimError::Checkpoint(_))));
        assert!(decode(&bytes[..20]).is_err());
    }

    #[test]
    fn bundle_round_trip() {
        let a = net();
        let b = Mlp::zeros(&[2, 3], 0.5).unwrap();
        let bytes = encode_bundle(&[&a, &b], &[1.5, -2.0]);
        let (nets, extra) = decode_bundle(&bytes).unwrap();
        assert_eq!(nets, vec![a, b]);
        assert_eq!(extra, vec![1.5, -2.0]);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.bin");
        let n = net();
        save(&n, &path).unwrap();
        assert_eq!(load(&path).unwrap(), n);
    }
}
