//! Binary index container.
//!
//! All integers are little-endian. Strings are a `u32` byte length followed
//! by UTF-8 bytes.
//!
//! ```text
//! magic        4 bytes   "SRIX"
//! version      u32       currently 1
//! -- analyzer --
//! lowercase    u8        0 or 1
//! stemmer      u8        0 = none, 1 = porter
//! n_stopwords  u32
//! stopword     string    × n_stopwords, sorted
//! -- collection statistics --
//! n_docs       u32
//! total_len    u64       Σ document lengths
//! -- document table, in ordinal order --
//! doc_id       string
//! doc_len      u32       × n_docs
//! -- postings --
//! n_terms      u32
//! term         string
//! n_postings   u32
//! (doc u32, tf u32)      × n_postings, strictly increasing doc
//!                        × n_terms, in term-ordinal order
//! ```
//!
//! The forward index and lookup tables are rebuilt on load. A file with a
//! different version is refused.

use std::io::{self, Read, Write};

use super::analyze::{AnalyzerConfig, Stemmer};
use super::index::{InvertedIndex, Posting};
use super::RetrievalError;

pub const MAGIC: &[u8; 4] = b"SRIX";
pub const FORMAT_VERSION: u32 = 1;

/// Strings longer than this are treated as corruption rather than allocated.
const MAX_STRING: u32 = 1 << 24;

fn put_u32<W: Write>(w: &mut W, v: u32) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_str<W: Write>(w: &mut W, s: &str) -> io::Result<()> {
    put_u32(w, s.len() as u32)?;
    w.write_all(s.as_bytes())
}

pub fn write_index<W: Write>(index: &InvertedIndex, mut w: W) -> Result<(), RetrievalError> {
    w.write_all(MAGIC)?;
    put_u32(&mut w, FORMAT_VERSION)?;

    let a = index.analyzer();
    w.write_all(&[u8::from(a.lowercase)])?;
    w.write_all(&[match a.stem {
        Stemmer::None => 0,
        Stemmer::Porter => 1,
    }])?;
    let mut stop: Vec<&String> = a.stopwords.iter().collect();
    stop.sort_unstable();
    put_u32(&mut w, stop.len() as u32)?;
    for s in stop {
        put_str(&mut w, s)?;
    }

    put_u32(&mut w, index.num_docs() as u32)?;
    w.write_all(&index.total_len().to_le_bytes())?;
    for (id, &len) in index.doc_ids.iter().zip(&index.doc_lens) {
        put_str(&mut w, id)?;
        put_u32(&mut w, len)?;
    }

    put_u32(&mut w, index.terms().len() as u32)?;
    for (term, list) in index.terms().iter().zip(index.term_postings()) {
        put_str(&mut w, term)?;
        put_u32(&mut w, list.len() as u32)?;
        for p in list {
            put_u32(&mut w, p.doc)?;
            put_u32(&mut w, p.tf)?;
        }
    }
    w.flush()?;
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], RetrievalError> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(truncated)?;
        Ok(buf)
    }

    fn u8(&mut self) -> Result<u8, RetrievalError> {
        Ok(self.bytes::<1>()?[0])
    }

    fn u32(&mut self) -> Result<u32, RetrievalError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64, RetrievalError> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn string(&mut self) -> Result<String, RetrievalError> {
        let len = self.u32()?;
        if len > MAX_STRING {
            return Err(RetrievalError::CorruptIndex(format!("string length {len} too large")));
        }
        let mut buf = vec![0u8; len as usize];
        self.inner.read_exact(&mut buf).map_err(truncated)?;
        String::from_utf8(buf).map_err(|_| RetrievalError::CorruptIndex("string is not UTF-8".into()))
    }
}

fn truncated(e: io::Error) -> RetrievalError {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        RetrievalError::CorruptIndex("unexpected end of file".into())
    } else {
        RetrievalError::Io(e)
    }
}

pub fn read_index<R: Read>(inner: R) -> Result<InvertedIndex, RetrievalError> {
    let mut r = Reader { inner };
    if &r.bytes::<4>()? != MAGIC {
        return Err(RetrievalError::BadMagic);
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(RetrievalError::UnsupportedVersion {
            found: version,
            expected: FORMAT_VERSION,
        });
    }

    let lowercase = match r.u8()? {
        0 => false,
        1 => true,
        v => return Err(RetrievalError::CorruptIndex(format!("bad lowercase flag {v}"))),
    };
    let stem = match r.u8()? {
        0 => Stemmer::None,
        1 => Stemmer::Porter,
        v => return Err(RetrievalError::CorruptIndex(format!("unknown stemmer {v}"))),
    };
    let n_stop = r.u32()?;
    let mut stopwords = std::collections::HashSet::new();
    for _ in 0..n_stop {
        stopwords.insert(r.string()?);
    }
    let analyzer = AnalyzerConfig {
        lowercase,
        stopwords,
        stem,
    };

    let n_docs = r.u32()? as usize;
    let total_len = r.u64()?;
    // Capacity hints are capped so a corrupt header cannot force a huge
    // allocation up front.
    let mut doc_ids = Vec::with_capacity(n_docs.min(1 << 20));
    let mut doc_lens = Vec::with_capacity(n_docs.min(1 << 20));
    for _ in 0..n_docs {
        doc_ids.push(r.string()?);
        doc_lens.push(r.u32()?);
    }
    let n_terms = r.u32()? as usize;
    let mut terms = Vec::with_capacity(n_terms.min(1 << 20));
    let mut postings = Vec::with_capacity(n_terms.min(1 << 20));
    for _ in 0..n_terms {
        terms.push(r.string()?);
        let n = r.u32()? as usize;
        let mut list = Vec::with_capacity(n.min(n_docs));
        for _ in 0..n {
            let doc = r.u32()?;
            let tf = r.u32()?;
            list.push(Posting { doc, tf });
        }
        postings.push(list);
    }
    let mut trailing = [0u8; 1];
    if r.inner.read(&mut trailing)? != 0 {
        return Err(RetrievalError::CorruptIndex("trailing bytes after postings".into()));
    }

    let index = InvertedIndex::from_parts(analyzer, doc_ids, doc_lens, terms, postings)?;
    if index.total_len() != total_len {
        return Err(RetrievalError::CorruptIndex(format!(
            "header total length {total_len} does not match postings ({})",
            index.total_len()
        )));
    }
    Ok(index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::Document;
    use crate::retrieval::{search, Bm25Params};

    fn sample() -> InvertedIndex {
        let docs = vec![
            Document::new("d1", "The cats sat on the mat."),
            Document::new("d2", "Cats chase dogs; dogs chase cats."),
            Document::new("d3", ""),
        ];
        InvertedIndex::build(&docs, AnalyzerConfig::default()).unwrap()
    }

    fn encode(idx: &InvertedIndex) -> Vec<u8> {
        let mut buf = Vec::new();
        write_index(idx, &mut buf).unwrap();
        buf
    }

    #[test]
    fn round_trip_preserves_search() {
        let idx = sample();
        let back = read_index(encode(&idx).as_slice()).unwrap();
        assert_eq!(back.analyzer(), idx.analyzer());
        assert_eq!(back.doc_ids(), idx.doc_ids());
        assert_eq!(back.avgdl(), idx.avgdl());
        let p = Bm25Params::default();
        assert_eq!(search(&back, &p, "cat dog", 10), search(&idx, &p, "cat dog", 10));
        assert_eq!(encode(&back), encode(&idx));
    }

    #[test]
    fn header_layout() {
        let buf = encode(&sample());
        assert_eq!(&buf[..4], b"SRIX");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
    }

    #[test]
    fn version_mismatch_is_explicit() {
        let mut buf = encode(&sample());
        buf[4..8].copy_from_slice(&7u32.to_le_bytes());
        assert!(matches!(
            read_index(buf.as_slice()),
            Err(RetrievalError::UnsupportedVersion { found: 7, expected: 1 })
        ));
    }

    #[test]
    fn bad_magic_and_truncation() {
        let mut buf = encode(&sample());
        assert!(matches!(read_index(&b"NOPE"[..]), Err(RetrievalError::BadMagic)));
        buf.truncate(buf.len() - 3);
        assert!(matches!(
            read_index(buf.as_slice()),
            Err(RetrievalError::CorruptIndex(_))
        ));
    }

    #[test]
    fn trailing_garbage_is_rejected() {
        let mut buf = encode(&sample());
        buf.push(0);
        assert!(matches!(
            read_index(buf.as_slice()),
            Err(RetrievalError::CorruptIndex(_))
        ));
    }
}
