//! On-disk cache for allowed words, reduced Markov matrices and reduced
//! collocation matrices.
//!
//! Each entry is one binary file: an 8-byte magic, a format version, a kind
//! tag, the key string, the payload, and a trailing SHA-256 of everything
//! before it. Files are written to a temporary name and renamed into place
//! while holding an exclusive lock on `<dir>/.lock`. A file that fails to
//! decode (wrong version, bad checksum, truncated) counts as a miss.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::subshift::{AllowedWords, ReducedMarkov};
use crate::transfer::ReducedBt;

const MAGIC: &[u8; 8] = b"CFDIMCAC";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Allowed = 1,
    Markov = 2,
    Bt = 3,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Allowed => "allowed",
            Kind::Markov => "markov",
            Kind::Bt => "bt",
        }
    }
}

#[derive(Default)]
struct Enc(Vec<u8>);

impl Enc {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u64(s.len() as u64);
        self.0.extend_from_slice(s.as_bytes());
    }
    fn bytes(&mut self, b: &[u8]) {
        self.u64(b.len() as u64);
        self.0.extend_from_slice(b);
    }
    fn u32s(&mut self, v: &[u32]) {
        self.u64(v.len() as u64);
        v.iter().for_each(|&x| self.u32(x));
    }
    fn u64s(&mut self, v: &[u64]) {
        self.u64(v.len() as u64);
        v.iter().for_each(|&x| self.u64(x));
    }
    fn f64s(&mut self, v: &[f64]) {
        self.u64(v.len() as u64);
        v.iter().for_each(|&x| self.u64(x.to_bits()));
    }
}

struct Dec<'a> {
    buf: &'a [u8],
    pos: usize,
}

fn bad(msg: &str) -> Error {
    Error::Cache(msg.to_string())
}

impl<'a> Dec<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or_else(|| bad("length overflow"))?;
        let s = self.buf.get(self.pos..end).ok_or_else(|| bad("truncated"))?;
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn len(&mut self, elem: usize) -> Result<usize> {
        let n = self.u64()? as usize;
        if n.saturating_mul(elem) > self.buf.len() - self.pos {
            return Err(bad("length exceeds file"));
        }
        Ok(n)
    }
    fn str(&mut self) -> Result<String> {
        let n = self.len(1)?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| bad("invalid utf-8"))
    }
    fn bytes(&mut self) -> Result<Vec<u8>> {
        let n = self.len(1)?;
        Ok(self.take(n)?.to_vec())
    }
    fn u32s(&mut self) -> Result<Vec<u32>> {
        let n = self.len(4)?;
        (0..n).map(|_| self.u32()).collect()
    }
    fn u64s(&mut self) -> Result<Vec<u64>> {
        let n = self.len(8)?;
        (0..n).map(|_| self.u64()).collect()
    }
    fn f64s(&mut self) -> Result<Vec<f64>> {
        Ok(self.u64s()?.into_iter().map(f64::from_bits).collect())
    }
    fn usizes(&mut self) -> Result<Vec<usize>> {
        Ok(self.u64s()?.into_iter().map(|x| x as usize).collect())
    }
}

fn encode(kind: Kind, key: &str, payload: Enc) -> Vec<u8> {
    let mut e = Enc::default();
    e.0.extend_from_slice(MAGIC);
    e.u32(FORMAT_VERSION);
    e.u8(kind as u8);
    e.str(key);
    e.0.extend_from_slice(&payload.0);
    let digest = Sha256::digest(&e.0);
    e.0.extend_from_slice(&digest);
    e.0
}

fn open_payload<'a>(buf: &'a [u8], kind: Kind, key: &str) -> Result<Dec<'a>> {
    if buf.len() < MAGIC.len() + 32 {
        return Err(bad("truncated"));
    }
    let (body, digest) = buf.split_at(buf.len() - 32);
    if Sha256::digest(body).as_slice() != digest {
        return Err(bad("checksum mismatch"));
    }
    let mut d = Dec { buf: body, pos: 0 };
    if d.take(MAGIC.len())? != MAGIC {
        return Err(bad("not a cache file"));
    }
    let v = d.u32()?;
    if v != FORMAT_VERSION {
        return Err(Error::Cache(format!("format version {v}, expected {FORMAT_VERSION}")));
    }
    if d.u8()? != kind as u8 {
        return Err(bad("wrong entry kind"));
    }
    if d.str()? != key {
        return Err(bad("key mismatch"));
    }
    Ok(d)
}

fn encode_allowed(a: &AllowedWords) -> Enc {
    let mut e = Enc::default();
    e.u8(a.alphabet_max);
    e.u64(a.n as u64);
    e.u8(a.n_override as u8);
    e.str(&a.provenance);
    e.u64s(a.packed());
    e
}

fn decode_allowed(d: &mut Dec) -> Result<AllowedWords> {
    let alphabet_max = d.u8()?;
    let n = d.u64()? as usize;
    let n_override = d.u8()? != 0;
    let provenance = d.str()?;
    let packed = d.u64s()?;
    Ok(AllowedWords::from_packed(alphabet_max, n, n_override, provenance, packed))
}

fn encode_markov(rm: &ReducedMarkov) -> Enc {
    let mut e = Enc::default();
    e.u64(rm.k as u64);
    e.u64(rm.k_rows as u64);
    e.bytes(&rm.matrix);
    e.u32s(&rm.row_map);
    e.u32s(&rm.col_map);
    let us = |v: &[usize]| v.iter().map(|&x| x as u64).collect::<Vec<_>>();
    e.u64s(&us(&rm.row_reps));
    e.u64s(&us(&rm.col_reps));
    e.u64(rm.suffix_bound as u64);
    e.u64(rm.raw_prefix_classes as u64);
    e.u64(rm.raw_suffix_classes as u64);
    e.u8(rm.irreducible as u8);
    e.u32s(&rm.essential);
    e.str(&rm.provenance);
    e
}

fn decode_markov(d: &mut Dec) -> Result<ReducedMarkov> {
    let rm = ReducedMarkov {
        k: d.u64()? as usize,
        k_rows: d.u64()? as usize,
        matrix: d.bytes()?,
        row_map: d.u32s()?,
        col_map: d.u32s()?,
        row_reps: d.usizes()?,
        col_reps: d.usizes()?,
        suffix_bound: d.u64()? as usize,
        raw_prefix_classes: d.u64()? as usize,
        raw_suffix_classes: d.u64()? as usize,
        irreducible: d.u8()? != 0,
        essential: d.u32s()?,
        provenance: d.str()?,
    };
    if rm.matrix.len() != rm.k * rm.k_rows || rm.row_map.len() != rm.col_map.len() {
        return Err(bad("inconsistent matrix shape"));
    }
    Ok(rm)
}

fn encode_bt(bt: &ReducedBt<f64>) -> Enc {
    let mut e = Enc::default();
    e.u64(bt.t.to_bits());
    e.u64(bt.m as u64);
    e.u32s(&bt.classes);
    e.u32(bt.precision_bits);
    e.str(&bt.provenance);
    e.f64s(&bt.matrix);
    e
}

fn decode_bt(d: &mut Dec) -> Result<ReducedBt<f64>> {
    let bt = ReducedBt {
        t: f64::from_bits(d.u64()?),
        m: d.u64()? as usize,
        classes: d.u32s()?,
        precision_bits: d.u32()?,
        provenance: d.str()?,
        matrix: d.f64s()?,
    };
    let n = bt.classes.len() * bt.m;
    if bt.matrix.len() != n * n {
        return Err(bad("inconsistent matrix shape"));
    }
    Ok(bt)
}

/// Key of a reduced collocation matrix at exponent `t`.
pub fn bt_key(provenance: &str, t: f64) -> String {
    format!("{provenance}:t{:016x}", t.to_bits())
}

/// A cache directory.
#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn open(dir: impl AsRef<Path>) -> Result<Cache> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(Cache {
            dir: dir.as_ref().to_path_buf(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// File name of an entry.
    pub fn path_for(&self, kind_name: &str, key: &str) -> PathBuf {
        let h = Sha256::digest(key.as_bytes());
        let hex: String = h[..16].iter().map(|b| format!("{b:02x}")).collect();
        self.dir.join(format!("{kind_name}-{hex}.bin"))
    }

    fn read(&self, kind: Kind, key: &str) -> Option<Vec<u8>> {
        fs::read(self.path_for(kind.name(), key)).ok()
    }

    fn write(&self, kind: Kind, key: &str, payload: Enc) -> Result<PathBuf> {
        let bytes = encode(kind, key, payload);
        let path = self.path_for(kind.name(), key);
        let lock = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(self.dir.join(".lock"))?;
        lock.lock()?;
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let res = (|| {
            let mut f = File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
            fs::rename(&tmp, &path)
        })();
        if res.is_err() {
            let _ = fs::remove_file(&tmp);
        }
        lock.unlock()?;
        res?;
        Ok(path)
    }

    fn load<T>(&self, kind: Kind, key: &str, dec: fn(&mut Dec) -> Result<T>) -> Option<T> {
        let buf = self.read(kind, key)?;
        match open_payload(&buf, kind, key).and_then(|mut d| dec(&mut d)) {
            Ok(v) => Some(v),
            Err(e) => {
                log::warn!("ignoring cache entry {}: {e}", self.path_for(kind.name(), key).display());
                None
            }
        }
    }

    pub fn load_allowed(&self, provenance: &str) -> Option<AllowedWords> {
        self.load(Kind::Allowed, provenance, decode_allowed)
            .filter(|a| a.provenance == provenance)
    }

    pub fn store_allowed(&self, a: &AllowedWords) -> Result<PathBuf> {
        self.write(Kind::Allowed, &a.provenance, encode_allowed(a))
    }

    pub fn load_markov(&self, provenance: &str) -> Option<ReducedMarkov> {
        self.load(Kind::Markov, provenance, decode_markov)
            .filter(|rm| rm.provenance == provenance)
    }

    pub fn store_markov(&self, rm: &ReducedMarkov) -> Result<PathBuf> {
        self.write(Kind::Markov, &rm.provenance, encode_markov(rm))
    }

    pub fn load_bt(&self, provenance: &str, t: f64) -> Option<ReducedBt<f64>> {
        self.load(Kind::Bt, &bt_key(provenance, t), decode_bt)
            .filter(|bt| bt.provenance == provenance && bt.t.to_bits() == t.to_bits())
    }

    pub fn store_bt(&self, bt: &ReducedBt<f64>) -> Result<PathBuf> {
        self.write(Kind::Bt, &bt_key(&bt.provenance, bt.t), encode_bt(bt))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_roundtrip() {
        let mut p = Enc::default();
        p.str("abc");
        p.f64s(&[1.5, -0.0, f64::MIN_POSITIVE]);
        let buf = encode(Kind::Bt, "key", p);
        let mut d = open_payload(&buf, Kind::Bt, "key").unwrap();
        assert_eq!(d.str().unwrap(), "abc");
        let v = d.f64s().unwrap();
        assert_eq!(v[1].to_bits(), (-0.0f64).to_bits());
        assert!(open_payload(&buf, Kind::Markov, "key").is_err());
        assert!(open_payload(&buf, Kind::Bt, "other").is_err());
        let mut flipped = buf.clone();
        flipped[20] ^= 1;
        assert!(open_payload(&flipped, Kind::Bt, "key").is_err());
    }
}
