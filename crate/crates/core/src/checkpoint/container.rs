//! The on-disk container: a little-endian header, raw dataset bytes, and a
//! table of contents at the end.
//!
//! ```text
//! header : "NMCK" | u32 version | u64 toc_offset
//! data   : raw i64 / f64 arrays, in write order
//! toc    : u64 count, then per entry
//!          u32 name_len | name | u8 dtype | u32 ndims | u64 dims.. | u64 offset | u64 nbytes
//! ```

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

use super::CheckpointError;

pub const MAGIC: [u8; 4] = *b"NMCK";
pub const VERSION: u32 = 1;
const HEADER_LEN: u64 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dtype {
    I64,
    F64,
}

impl Dtype {
    pub fn tag(self) -> u8 {
        match self {
            Dtype::I64 => 1,
            Dtype::F64 => 2,
        }
    }

    fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            1 => Some(Dtype::I64),
            2 => Some(Dtype::F64),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dtype::I64 => "i64",
            Dtype::F64 => "f64",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TocEntry {
    pub name: String,
    pub dtype: Dtype,
    pub shape: Vec<u64>,
    pub offset: u64,
    pub nbytes: u64,
}

impl TocEntry {
    pub fn len(&self) -> usize {
        self.shape.iter().product::<u64>() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sequential writer. Datasets are laid out in call order and the table of
/// contents is written by [`finish`](Self::finish).
pub struct CheckpointWriter<W: Write + Seek> {
    inner: W,
    toc: Vec<TocEntry>,
    names: HashSet<String>,
    pos: u64,
}

impl CheckpointWriter<BufWriter<File>> {
    pub fn create(path: impl AsRef<Path>) -> Result<Self, CheckpointError> {
        Self::new(BufWriter::new(File::create(path)?))
    }
}

impl<W: Write + Seek> CheckpointWriter<W> {
    pub fn new(mut inner: W) -> Result<Self, CheckpointError> {
        inner.write_all(&MAGIC)?;
        inner.write_all(&VERSION.to_le_bytes())?;
        inner.write_all(&0u64.to_le_bytes())?;
        Ok(Self {
            inner,
            toc: Vec::new(),
            names: HashSet::new(),
            pos: HEADER_LEN,
        })
    }

    pub fn has(&self, name: &str) -> bool {
        self.names.contains(name)
    }

    pub fn has_prefix(&self, prefix: &str) -> bool {
        self.names.iter().any(|n| n.starts_with(prefix))
    }

    pub fn entries(&self) -> &[TocEntry] {
        &self.toc
    }

    pub fn write_i64(&mut self, name: &str, data: &[i64]) -> Result<(), CheckpointError> {
        self.write_slices_i64(name, &[data])
    }

    pub fn write_f64(&mut self, name: &str, data: &[f64]) -> Result<(), CheckpointError> {
        self.write_slices_f64(name, &[data])
    }

    /// Writes one 1-d dataset from rank-ordered slices.
    pub fn write_slices_i64(&mut self, name: &str, slices: &[&[i64]]) -> Result<(), CheckpointError> {
        self.write_raw(name, Dtype::I64, slices.iter().map(|s| s.len()).sum(), |w| {
            for v in slices.iter().flat_map(|s| s.iter()) {
                w.write_all(&v.to_le_bytes())?;
            }
            Ok(())
        })
    }

    pub fn write_slices_f64(&mut self, name: &str, slices: &[&[f64]]) -> Result<(), CheckpointError> {
        self.write_raw(name, Dtype::F64, slices.iter().map(|s| s.len()).sum(), |w| {
            for v in slices.iter().flat_map(|s| s.iter()) {
                w.write_all(&v.to_le_bytes())?;
            }
            Ok(())
        })
    }

    fn write_raw(
        &mut self,
        name: &str,
        dtype: Dtype,
        len: usize,
        body: impl FnOnce(&mut W) -> std::io::Result<()>,
    ) -> Result<(), CheckpointError> {
        if !self.names.insert(name.to_owned()) {
            return Err(CheckpointError::DuplicateDataset { name: name.to_owned() });
        }
        body(&mut self.inner)?;
        let nbytes = 8 * len as u64;
        self.toc.push(TocEntry {
            name: name.to_owned(),
            dtype,
            shape: vec![len as u64],
            offset: self.pos,
            nbytes,
        });
        self.pos += nbytes;
        Ok(())
    }

    /// Writes the table of contents and patches the header.
    pub fn finish(mut self) -> Result<W, CheckpointError> {
        let toc_offset = self.pos;
        let w = &mut self.inner;
        w.write_all(&(self.toc.len() as u64).to_le_bytes())?;
        for e in &self.toc {
            w.write_all(&(e.name.len() as u32).to_le_bytes())?;
            w.write_all(e.name.as_bytes())?;
            w.write_all(&[e.dtype.tag()])?;
            w.write_all(&(e.shape.len() as u32).to_le_bytes())?;
            for d in &e.shape {
                w.write_all(&d.to_le_bytes())?;
            }
            w.write_all(&e.offset.to_le_bytes())?;
            w.write_all(&e.nbytes.to_le_bytes())?;
        }
        w.seek(SeekFrom::Start(8))?;
        w.write_all(&toc_offset.to_le_bytes())?;
        w.seek(SeekFrom::End(0))?;
        w.flush()?;
        Ok(self.inner)
    }
}

/// Random-access reader.
pub struct CheckpointReader<R: Read + Seek> {
    inner: R,
    toc: Vec<TocEntry>,
    index: HashMap<String, usize>,
}

impl CheckpointReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, CheckpointError> {
        Self::new(BufReader::new(File::open(path)?))
    }
}

fn corrupt(reason: impl Into<String>) -> CheckpointError {
    CheckpointError::VersionMismatch { reason: reason.into() }
}

impl<R: Read + Seek> CheckpointReader<R> {
    pub fn new(mut inner: R) -> Result<Self, CheckpointError> {
        let file_len = inner.seek(SeekFrom::End(0))?;
        inner.seek(SeekFrom::Start(0))?;
        let mut header = [0u8; HEADER_LEN as usize];
        inner
            .read_exact(&mut header)
            .map_err(|_| corrupt("file shorter than the header"))?;
        if header[..4] != MAGIC {
            return Err(corrupt(format!("bad magic {:?}", &header[..4])));
        }
        let version = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes"));
        if version != VERSION {
            return Err(corrupt(format!("version {version}, expected {VERSION}")));
        }
        let toc_offset = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes"));
        if toc_offset < HEADER_LEN || toc_offset > file_len {
            return Err(corrupt("table of contents offset out of range"));
        }
        inner.seek(SeekFrom::Start(toc_offset))?;
        let mut rest = Vec::new();
        inner.read_to_end(&mut rest)?;
        let toc = parse_toc(&rest, toc_offset)?;
        let index = toc.iter().enumerate().map(|(i, e)| (e.name.clone(), i)).collect();
        Ok(Self { inner, toc, index })
    }

    pub fn entries(&self) -> &[TocEntry] {
        &self.toc
    }

    pub fn has(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn entry(&self, name: &str) -> Result<&TocEntry, CheckpointError> {
        self.index
            .get(name)
            .map(|&i| &self.toc[i])
            .ok_or_else(|| CheckpointError::MissingDataset { name: name.to_owned() })
    }

    pub fn names_with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.toc
            .iter()
            .map(|e| e.name.as_str())
            .filter(move |n| n.starts_with(prefix))
    }

    fn read_words(
        &mut self,
        name: &str,
        dtype: Dtype,
        start: usize,
        len: usize,
    ) -> Result<Vec<[u8; 8]>, CheckpointError> {
        let e = self.entry(name)?.clone();
        if e.dtype != dtype {
            return Err(CheckpointError::DtypeMismatch {
                name: name.to_owned(),
                expected: dtype.name(),
                found: e.dtype.name(),
            });
        }
        if start + len > e.len() {
            return Err(CheckpointError::SizeMismatch {
                what: format!("range {}..{} of {name}", start, start + len),
                expected: e.len(),
                found: start + len,
            });
        }
        self.inner.seek(SeekFrom::Start(e.offset + 8 * start as u64))?;
        let mut buf = vec![0u8; 8 * len];
        self.inner.read_exact(&mut buf)?;
        Ok(buf.chunks_exact(8).map(|c| c.try_into().expect("8 bytes")).collect())
    }

    pub fn read_i64(&mut self, name: &str) -> Result<Vec<i64>, CheckpointError> {
        let len = self.entry(name)?.len();
        self.read_i64_range(name, 0, len)
    }

    pub fn read_f64(&mut self, name: &str) -> Result<Vec<f64>, CheckpointError> {
        let len = self.entry(name)?.len();
        self.read_f64_range(name, 0, len)
    }

    pub fn read_i64_range(&mut self, name: &str, start: usize, len: usize) -> Result<Vec<i64>, CheckpointError> {
        Ok(self
            .read_words(name, Dtype::I64, start, len)?
            .into_iter()
            .map(i64::from_le_bytes)
            .collect())
    }

    pub fn read_f64_range(&mut self, name: &str, start: usize, len: usize) -> Result<Vec<f64>, CheckpointError> {
        Ok(self
            .read_words(name, Dtype::F64, start, len)?
            .into_iter()
            .map(f64::from_le_bytes)
            .collect())
    }

    /// Reads a non-negative integer dataset as indices.
    pub fn read_usize(&mut self, name: &str) -> Result<Vec<usize>, CheckpointError> {
        let len = self.entry(name)?.len();
        self.read_usize_range(name, 0, len)
    }

    pub fn read_usize_range(&mut self, name: &str, start: usize, len: usize) -> Result<Vec<usize>, CheckpointError> {
        self.read_i64_range(name, start, len)?
            .into_iter()
            .map(|v| usize::try_from(v).map_err(|_| corrupt(format!("negative index in {name}"))))
            .collect()
    }
}

fn parse_toc(bytes: &[u8], toc_offset: u64) -> Result<Vec<TocEntry>, CheckpointError> {
    struct Cur<'a>(&'a [u8]);
    impl Cur<'_> {
        fn take(&mut self, n: usize) -> Result<&[u8], CheckpointError> {
            if self.0.len() < n {
                return Err(corrupt("truncated table of contents"));
            }
            let (head, tail) = self.0.split_at(n);
            self.0 = tail;
            Ok(head)
        }
        fn u8(&mut self) -> Result<u8, CheckpointError> {
            Ok(self.take(1)?[0])
        }
        fn u32(&mut self) -> Result<u32, CheckpointError> {
            Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
        }
        fn u64(&mut self) -> Result<u64, CheckpointError> {
            Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
        }
    }
    let mut cur = Cur(bytes);
    let count = cur.u64()?;
    let mut toc = Vec::new();
    let mut names = HashSet::new();
    for _ in 0..count {
        let name_len = cur.u32()? as usize;
        let name = String::from_utf8(cur.take(name_len)?.to_vec()).map_err(|_| corrupt("dataset name is not UTF-8"))?;
        let dtype = Dtype::from_tag(cur.u8()?).ok_or_else(|| corrupt(format!("unknown type tag in {name}")))?;
        let ndims = cur.u32()? as usize;
        let shape = (0..ndims).map(|_| cur.u64()).collect::<Result<Vec<_>, _>>()?;
        let offset = cur.u64()?;
        let nbytes = cur.u64()?;
        let expected = shape.iter().try_fold(8u64, |acc, &d| acc.checked_mul(d));
        if expected != Some(nbytes)
            || offset < HEADER_LEN
            || offset.checked_add(nbytes).is_none_or(|end| end > toc_offset)
        {
            return Err(corrupt(format!("bad extent for {name}")));
        }
        if !names.insert(name.clone()) {
            return Err(corrupt(format!("duplicate dataset {name}")));
        }
        toc.push(TocEntry {
            name,
            dtype,
            shape,
            offset,
            nbytes,
        });
    }
    Ok(toc)
}

#[cfg(test)]
mod tests {
    use std::io::Cursor;

    use super::*;

    fn sample() -> Vec<u8> {
        let mut w = CheckpointWriter::new(Cursor::new(Vec::new())).unwrap();
        w.write_i64("/a", &[1, -2, 3]).unwrap();
        w.write_slices_f64("/b", &[&[0.5], &[], &[1.5, 2.5]]).unwrap();
        w.finish().unwrap().into_inner()
    }

    #[test]
    fn round_trip() {
        let bytes = sample();
        assert_eq!(&bytes[..4], b"NMCK");
        let mut r = CheckpointReader::new(Cursor::new(bytes)).unwrap();
        assert_eq!(r.read_i64("/a").unwrap(), vec![1, -2, 3]);
        assert_eq!(r.read_f64("/b").unwrap(), vec![0.5, 1.5, 2.5]);
        assert_eq!(r.read_f64_range("/b", 1, 2).unwrap(), vec![1.5, 2.5]);
        assert_eq!(r.entries()[1].offset, 16 + 24);
        assert!(matches!(r.read_i64("/c"), Err(CheckpointError::MissingDataset { .. })));
        assert!(matches!(r.read_i64("/b"), Err(CheckpointError::DtypeMismatch { .. })));
    }

    #[test]
    fn bad_magic() {
        let mut bytes = sample();
        bytes[0] = b'X';
        assert!(matches!(
            CheckpointReader::new(Cursor::new(bytes)),
            Err(CheckpointError::VersionMismatch { .. })
        ));
    }

    #[test]
    fn duplicate_names() {
        let mut w = CheckpointWriter::new(Cursor::new(Vec::new())).unwrap();
        w.write_i64("/a", &[]).unwrap();
        assert!(matches!(
            w.write_i64("/a", &[]),
            Err(CheckpointError::DuplicateDataset { .. })
        ));
    }
}
