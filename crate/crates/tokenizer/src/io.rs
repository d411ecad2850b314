//! Little-endian binary containers for checkpoints and latent tokens, and the
//! loss-history CSV.
//!
//! ```text
//! checkpoint: "VTCK" | u32 version | u32 header_len | header (model config
//!             as key = value text) | u32 tensor_count | per tensor:
//!             u32 name_len | name | u32 rank | u64 dims[rank] | f64 values
//! tokens:     "VTTK" | u32 version | u32 K | u32 C | u8 has_sample
//!             | f64 mu[K*C] | f64 log_var[K*C] | f64 sample[K*C] if present
//! ```

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use diffkit::Tensor;

use crate::config::{parse_config_text, ModelConfig};
use crate::error::{Error, Result};
use crate::model::LatentTokens;
use crate::params::Params;
use crate::train::EpochLoss;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"VTCK";
pub const TOKEN_MAGIC: &[u8; 4] = b"VTTK";
const VERSION: u32 = 1;
/// Upper bound on any single length field, to fail fast on corrupt files.
const MAX_LEN: u64 = 1 << 32;

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?))
}

struct Reader<'a, R> {
    inner: R,
    path: &'a Path,
}

impl<R: Read> Reader<'_, R> {
    fn bytes(&mut self, n: usize) -> Result<Vec<u8>> {
        let mut buf = vec![0u8; n];
        self.inner.read_exact(&mut buf).map_err(|e| Error::io(self.path, e))?;
        Ok(buf)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.bytes(n * 8)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn magic(&mut self, expected: &[u8; 4]) -> Result<()> {
        let m = self.bytes(4)?;
        if m != expected {
            return Err(Error::Format(format!(
                "{}: expected magic {:?}, found {:?}",
                self.path.display(),
                String::from_utf8_lossy(expected),
                String::from_utf8_lossy(&m)
            )));
        }
        let v = self.u32()?;
        if v != VERSION {
            return Err(Error::Format(format!("{}: unsupported version {v}", self.path.display())));
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        let mut rest = [0u8; 1];
        if self.inner.read(&mut rest).map_err(|e| Error::io(self.path, e))? != 0 {
            return Err(Error::Format(format!("{}: trailing bytes", self.path.display())));
        }
        Ok(())
    }
}

fn bounded(v: u64, what: &str) -> Result<usize> {
    if v > MAX_LEN {
        return Err(Error::Format(format!("{what} {v} is implausibly large")));
    }
    Ok(v as usize)
}

fn put_f64s(w: &mut impl Write, values: &[f64]) -> std::io::Result<()> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_checkpoint(config: &ModelConfig, params: &Params, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let body = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        let header = config.to_text();
        w.write_all(&(header.len() as u32).to_le_bytes())?;
        w.write_all(header.as_bytes())?;
        w.write_all(&(params.len() as u32).to_le_bytes())?;
        for (name, t) in params.iter() {
            w.write_all(&(name.len() as u32).to_le_bytes())?;
            w.write_all(name.as_bytes())?;
            w.write_all(&(t.shape().len() as u32).to_le_bytes())?;
            for &d in t.shape() {
                w.write_all(&(d as u64).to_le_bytes())?;
            }
            put_f64s(w, t.data())?;
        }
        w.flush()
    };
    body(&mut w).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<(ModelConfig, Params)> {
    let path = path.as_ref();
    let mut r = Reader { inner: open(path)?, path };
    r.magic(CHECKPOINT_MAGIC)?;
    let header_len = bounded(r.u32()? as u64, "header length")?;
    let header = String::from_utf8(r.bytes(header_len)?)
        .map_err(|_| Error::Format("checkpoint header is not UTF-8".into()))?;
    let (config, _) = parse_config_text(&header)?;
    let count = r.u32()? as usize;
    let mut tensors = BTreeMap::new();
    for _ in 0..count {
        let name_len = bounded(r.u32()? as u64, "name length")?;
        let name = String::from_utf8(r.bytes(name_len)?)
            .map_err(|_| Error::Format("tensor name is not UTF-8".into()))?;
        let rank = r.u32()? as usize;
        let mut shape = Vec::with_capacity(rank.min(8));
        for _ in 0..rank {
            shape.push(bounded(r.u64()?, "dimension")?);
        }
        let n = shape.iter().try_fold(1usize, |a, &d| a.checked_mul(d));
        let n = bounded(n.map_or(u64::MAX, |n| n as u64), "tensor size")?;
        let data = r.f64s(n)?;
        tensors.insert(name, Tensor::new(shape, data)?);
    }
    r.finish()?;
    let params = Params::from_tensors(&config, tensors)?;
    Ok((config, params))
}

pub fn write_tokens(tokens: &LatentTokens, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (k, c) = (tokens.token_count(), tokens.channel_dim());
    let mut w = create(path)?;
    let body = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        w.write_all(TOKEN_MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(k as u32).to_le_bytes())?;
        w.write_all(&(c as u32).to_le_bytes())?;
        w.write_all(&[u8::from(tokens.sample.is_some())])?;
        put_f64s(w, tokens.mu.data())?;
        put_f64s(w, tokens.log_var.data())?;
        if let Some(s) = &tokens.sample {
            put_f64s(w, s.data())?;
        }
        w.flush()
    };
    body(&mut w).map_err(|e| Error::io(path, e))
}

pub fn read_tokens(path: impl AsRef<Path>) -> Result<LatentTokens> {
    let path = path.as_ref();
    let mut r = Reader { inner: open(path)?, path };
    r.magic(TOKEN_MAGIC)?;
    let k = bounded(r.u32()? as u64, "token count")?;
    let c = bounded(r.u32()? as u64, "channel count")?;
    let n = k * c;
    let has_sample = match r.u8()? {
        0 => false,
        1 => true,
        other => return Err(Error::Format(format!("bad sample flag {other}"))),
    };
    let mu = Tensor::new(vec![k, c], r.f64s(n)?)?;
    let log_var = Tensor::new(vec![k, c], r.f64s(n)?)?;
    let sample = if has_sample {
        Some(Tensor::new(vec![k, c], r.f64s(n)?)?)
    } else {
        None
    };
    r.finish()?;
    Ok(LatentTokens { mu, log_var, sample })
}

/// `epoch,bce,kl,total`, one row per epoch.
pub fn write_loss_csv(history: &[EpochLoss], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    for row in history {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_loss_csv(path: impl AsRef<Path>) -> Result<Vec<EpochLoss>> {
    let mut r = csv::Reader::from_path(path.as_ref())?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
