//! Versioned binary tensor container.
//!
//! Layout (all integers little-endian): the magic `PQTB`, a `u32` format
//! version, a `u32` byte length followed by a UTF-8 JSON header, a `u32`
//! tensor count, then per tensor a `u32` name length and name bytes, a
//! `u32` rank, `u64` dimensions and the `f64` entries in row-major order.

use std::path::Path;

use serde_json::Value;

pub const MAGIC: &[u8; 4] = b"PQTB";
pub const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum BlobError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a tensor blob (bad magic)")]
    BadMagic,
    #[error("unsupported blob version {0}")]
    Version(u32),
    #[error("blob truncated at byte {0}")]
    Truncated(usize),
    #[error("bad header: {0}")]
    Header(String),
    #[error("tensor `{0}` missing")]
    Missing(String),
    #[error("tensor `{name}` has shape {found:?}, expected {expected:?}")]
    Shape {
        name: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(name: impl Into<String>, shape: Vec<usize>, data: Vec<f64>) -> Self {
        assert_eq!(
            shape.iter().product::<usize>(),
            data.len(),
            "tensor data does not fill its shape"
        );
        Tensor {
            name: name.into(),
            shape,
            data,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Blob {
    pub header: Value,
    pub tensors: Vec<Tensor>,
}

impl Blob {
    pub fn new(header: Value) -> Self {
        Blob {
            header,
            tensors: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, shape: Vec<usize>, data: Vec<f64>) {
        self.tensors.push(Tensor::new(name, shape, data));
    }

    pub fn get(&self, name: &str) -> Result<&Tensor, BlobError> {
        self.tensors
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| BlobError::Missing(name.to_string()))
    }

    /// Tensor data after checking the stored shape.
    pub fn take(&self, name: &str, shape: &[usize]) -> Result<Vec<f64>, BlobError> {
        let t = self.get(name)?;
        if t.shape != shape {
            return Err(BlobError::Shape {
                name: name.to_string(),
                expected: shape.to_vec(),
                found: t.shape.clone(),
            });
        }
        Ok(t.data.clone())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = serde_json::to_vec(&self.header).expect("JSON values always serialize");
        let mut out = Vec::with_capacity(16 + header.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        out.extend_from_slice(&(self.tensors.len() as u32).to_le_bytes());
        for t in &self.tensors {
            out.extend_from_slice(&(t.name.len() as u32).to_le_bytes());
            out.extend_from_slice(t.name.as_bytes());
            out.extend_from_slice(&(t.shape.len() as u32).to_le_bytes());
            for &d in &t.shape {
                out.extend_from_slice(&(d as u64).to_le_bytes());
            }
            for &x in &t.data {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, BlobError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(BlobError::BadMagic);
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(BlobError::Version(version));
        }
        let hlen = r.u32()? as usize;
        let header: Value =
            serde_json::from_slice(r.take(hlen)?).map_err(|e| BlobError::Header(e.to_string()))?;
        let count = r.u32()? as usize;
        let mut tensors = Vec::with_capacity(count.min(1024));
        for _ in 0..count {
            let nlen = r.u32()? as usize;
            let name = String::from_utf8(r.take(nlen)?.to_vec())
                .map_err(|e| BlobError::Header(format!("tensor name: {e}")))?;
            let rank = r.u32()? as usize;
            let mut shape = Vec::with_capacity(rank.min(16));
            for _ in 0..rank {
                shape.push(r.u64()? as usize);
            }
            let len = shape
                .iter()
                .try_fold(1usize, |acc, &d| acc.checked_mul(d))
                .ok_or(BlobError::Truncated(r.pos))?;
            let raw = r.take(len.checked_mul(8).ok_or(BlobError::Truncated(r.pos))?)?;
            let data = raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
                .collect();
            tensors.push(Tensor { name, shape, data });
        }
        if r.pos != bytes.len() {
            return Err(BlobError::Header(format!(
                "{} trailing bytes",
                bytes.len() - r.pos
            )));
        }
        Ok(Blob { header, tensors })
    }

    pub fn write_file(&self, path: &Path) -> Result<(), BlobError> {
        crate::io::atomic_write(path, &self.to_bytes())?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<Self, BlobError> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], BlobError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(BlobError::Truncated(self.pos)),
        }
    }

    fn u32(&mut self) -> Result<u32, BlobError> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self) -> Result<u64, BlobError> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }
}
