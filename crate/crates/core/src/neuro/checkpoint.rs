//! Versioned binary checkpoint container.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic            8 bytes  b"ACCENTOR"
//! version          u8       currently 1
//! head             u8       0 = local, 1 = global
//! optimizer        u8       0 = sgd, 1 = adam
//! beta1,beta2,eps  3 x f64  zeros for sgd
//! learning_rate    f64
//! vocab_size       u32      embedding rows, reserved ids included
//! embedding_dim    u32
//! hidden_units     u32
//! max_len          u32
//! batch_size       u32
//! epochs           u32
//! seed             u64
//! vocab            u32 count, then one u32 code point per character
//!                  (character i has id i + 3; ids 0-2 are PAD/UNK/SEP)
//! tensors          u8 count, then per tensor:
//!                    u8 name length, name bytes,
//!                    u8 ndim, u32 dims..., f64 data (row-major)
//! history          u32 count, then per epoch:
//!                    u32 epoch, f64 train_loss, u8 has_dev, f64 dev_accuracy
//! ```

use std::io::{Read, Write};

use crate::encoding::CharVocab;
use crate::error::CheckpointError;
use crate::models::EpochStats;

use super::params::ModelParams;
use super::{Head, ModelConfig, OptimizerKind};

pub const MAGIC: &[u8; 8] = b"ACCENTOR";
pub const FORMAT_VERSION: u8 = 1;

/// Everything a checkpoint holds.
#[derive(Debug, Clone)]
pub struct CheckpointContents {
    pub config: ModelConfig,
    pub vocab: CharVocab,
    pub params: ModelParams<f64>,
    pub history: Vec<EpochStats>,
}

struct Writer<W: Write> {
    sink: W,
}

impl<W: Write> Writer<W> {
    fn u8(&mut self, v: u8) -> Result<(), CheckpointError> {
        Ok(self.sink.write_all(&[v])?)
    }

    fn u32(&mut self, v: u32) -> Result<(), CheckpointError> {
        Ok(self.sink.write_all(&v.to_le_bytes())?)
    }

    fn u64(&mut self, v: u64) -> Result<(), CheckpointError> {
        Ok(self.sink.write_all(&v.to_le_bytes())?)
    }

    fn f64(&mut self, v: f64) -> Result<(), CheckpointError> {
        Ok(self.sink.write_all(&v.to_le_bytes())?)
    }

    fn tensor(&mut self, name: &str, dims: &[usize], data: &[f64]) -> Result<(), CheckpointError> {
        self.u8(name.len() as u8)?;
        self.sink.write_all(name.as_bytes())?;
        self.u8(dims.len() as u8)?;
        for &d in dims {
            self.u32(d as u32)?;
        }
        debug_assert_eq!(dims.iter().product::<usize>(), data.len());
        for &x in data {
            self.f64(x)?;
        }
        Ok(())
    }
}

pub fn write_checkpoint<W: Write>(
    sink: W,
    contents: &CheckpointContents,
) -> Result<(), CheckpointError> {
    let mut w = Writer { sink };
    let config = &contents.config;
    w.sink.write_all(MAGIC)?;
    w.u8(FORMAT_VERSION)?;
    w.u8(match config.head {
        Head::Local => 0,
        Head::Global => 1,
    })?;
    let (opt, b1, b2, eps) = match config.optimizer {
        OptimizerKind::Sgd => (0u8, 0.0, 0.0, 0.0),
        OptimizerKind::Adam {
            beta1,
            beta2,
            epsilon,
        } => (1u8, beta1, beta2, epsilon),
    };
    w.u8(opt)?;
    w.f64(b1)?;
    w.f64(b2)?;
    w.f64(eps)?;
    w.f64(config.learning_rate)?;
    w.u32(config.vocab_size as u32)?;
    w.u32(config.embedding_dim as u32)?;
    w.u32(config.hidden_units as u32)?;
    w.u32(config.max_len as u32)?;
    w.u32(config.batch_size as u32)?;
    w.u32(config.epochs as u32)?;
    w.u64(config.seed)?;

    let chars = contents.vocab.chars();
    w.u32(chars.len() as u32)?;
    for &c in chars {
        w.u32(c as u32)?;
    }

    let params = &contents.params;
    let h = config.hidden_units;
    w.u8(9)?;
    w.tensor(
        "embedding",
        &[config.vocab_size, config.embedding_dim],
        params.embedding.as_slice(),
    )?;
    for (prefix, dir) in [("fwd", &params.fwd), ("bwd", &params.bwd)] {
        w.tensor(
            &format!("{prefix}.w"),
            &[4 * h, config.embedding_dim],
            dir.w.as_slice(),
        )?;
        w.tensor(&format!("{prefix}.u"), &[4 * h, h], dir.u.as_slice())?;
        w.tensor(&format!("{prefix}.b"), &[4 * h], &dir.b)?;
    }
    w.tensor(
        "head.w",
        &[config.head_rows(), 2 * h],
        params.head_w.as_slice(),
    )?;
    w.tensor("head.b", &[config.head_rows()], &params.head_b)?;

    w.u32(contents.history.len() as u32)?;
    for entry in &contents.history {
        w.u32(entry.epoch as u32)?;
        w.f64(entry.train_loss)?;
        w.u8(entry.dev_accuracy.is_some() as u8)?;
        w.f64(entry.dev_accuracy.unwrap_or(0.0))?;
    }
    Ok(())
}

struct Reader<R: Read> {
    source: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], CheckpointError> {
        let mut buf = [0u8; N];
        self.source
            .read_exact(&mut buf)
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::UnexpectedEof => {
                    CheckpointError::Corrupt("unexpected end of file".into())
                }
                _ => CheckpointError::Io(e),
            })?;
        Ok(buf)
    }

    fn u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.bytes::<1>()?[0])
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn name(&mut self) -> Result<String, CheckpointError> {
        let len = self.u8()? as usize;
        let mut buf = vec![0u8; len];
        self.source
            .read_exact(&mut buf)
            .map_err(|_| CheckpointError::Corrupt("truncated tensor name".into()))?;
        String::from_utf8(buf).map_err(|_| CheckpointError::Corrupt("bad tensor name".into()))
    }
}

pub fn read_checkpoint<R: Read>(source: R) -> Result<CheckpointContents, CheckpointError> {
    let mut r = Reader { source };
    let magic: [u8; 8] = r.bytes()?;
    if &magic != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.u8()?;
    if version != FORMAT_VERSION {
        return Err(CheckpointError::Version(version));
    }
    let head = match r.u8()? {
        0 => Head::Local,
        1 => Head::Global,
        other => return Err(CheckpointError::Corrupt(format!("bad head byte {other}"))),
    };
    let opt_byte = r.u8()?;
    let (b1, b2, eps) = (r.f64()?, r.f64()?, r.f64()?);
    let optimizer = match opt_byte {
        0 => OptimizerKind::Sgd,
        1 => OptimizerKind::Adam {
            beta1: b1,
            beta2: b2,
            epsilon: eps,
        },
        other => {
            return Err(CheckpointError::Corrupt(format!(
                "bad optimizer byte {other}"
            )))
        }
    };
    let learning_rate = r.f64()?;
    let vocab_size = r.u32()? as usize;
    let embedding_dim = r.u32()? as usize;
    let hidden_units = r.u32()? as usize;
    let max_len = r.u32()? as usize;
    let batch_size = r.u32()? as usize;
    let epochs = r.u32()? as usize;
    let seed = r.u64()?;
    let config = ModelConfig {
        vocab_size,
        embedding_dim,
        hidden_units,
        max_len,
        head,
        learning_rate,
        batch_size,
        epochs,
        seed,
        optimizer,
    };

    let char_count = r.u32()? as usize;
    let mut chars = Vec::with_capacity(char_count);
    for _ in 0..char_count {
        let cp = r.u32()?;
        let c = char::from_u32(cp)
            .ok_or_else(|| CheckpointError::Corrupt(format!("bad code point {cp}")))?;
        chars.push(c);
    }
    let vocab = CharVocab::rebuild(chars);
    if vocab.len() != vocab_size {
        return Err(CheckpointError::Corrupt(format!(
            "vocab has {} ids but config says {vocab_size}",
            vocab.len()
        )));
    }

    let tensor_count = r.u8()?;
    if tensor_count != 9 {
        return Err(CheckpointError::Corrupt(format!(
            "expected 9 tensors, found {tensor_count}"
        )));
    }
    let mut params = ModelParams::<f64>::zeros(&config);
    let mut seen = Vec::new();
    for _ in 0..9 {
        let name = r.name()?;
        let ndim = r.u8()? as usize;
        let mut dims = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            dims.push(r.u32()? as usize);
        }
        let len: usize = dims.iter().product();
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(r.f64()?);
        }
        let slot: &mut [f64] = match name.as_str() {
            "embedding" => params.embedding.as_mut_slice(),
            "fwd.w" => params.fwd.w.as_mut_slice(),
            "fwd.u" => params.fwd.u.as_mut_slice(),
            "fwd.b" => &mut params.fwd.b,
            "bwd.w" => params.bwd.w.as_mut_slice(),
            "bwd.u" => params.bwd.u.as_mut_slice(),
            "bwd.b" => &mut params.bwd.b,
            "head.w" => params.head_w.as_mut_slice(),
            "head.b" => &mut params.head_b,
            other => {
                return Err(CheckpointError::Corrupt(format!(
                    "unknown tensor `{other}`"
                )))
            }
        };
        if slot.len() != data.len() {
            return Err(CheckpointError::Corrupt(format!(
                "tensor `{name}` has {} values, expected {}",
                data.len(),
                slot.len()
            )));
        }
        slot.copy_from_slice(&data);
        seen.push(name);
    }
    seen.sort();
    seen.dedup();
    if seen.len() != 9 {
        return Err(CheckpointError::Corrupt("duplicate tensor names".into()));
    }

    let history_len = r.u32()? as usize;
    let mut history = Vec::with_capacity(history_len);
    for _ in 0..history_len {
        let epoch = r.u32()? as usize;
        let train_loss = r.f64()?;
        let has_dev = r.u8()? != 0;
        let dev = r.f64()?;
        history.push(EpochStats {
            epoch,
            train_loss,
            dev_accuracy: has_dev.then_some(dev),
        });
    }
    Ok(CheckpointContents {
        config,
        vocab,
        params,
        history,
    })
}
