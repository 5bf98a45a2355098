//! Technical metadata from the file system: one [`FileInfo`] per regular
//! file under a directory, with size, checksum and extension-derived type.

use std::fmt;
use std::fs::File;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use md5::Md5;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;
use walkdir::WalkDir;

use crate::model::{Checksum, EngMetaDataset, FileInfo};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Algorithm {
    Md5,
    #[default]
    Sha256,
}

impl Algorithm {
    /// Code used in `checksum/@algorithm`.
    pub fn code(self) -> &'static str {
        match self {
            Algorithm::Md5 => "MD5",
            Algorithm::Sha256 => "SHA-256",
        }
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "md5" => Ok(Algorithm::Md5),
            "sha256" | "sha-256" => Ok(Algorithm::Sha256),
            _ => Err(format!("unknown checksum algorithm `{s}` (md5, sha256)")),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Error)]
pub enum HarvestError {
    #[error("{0}: not a readable directory")]
    Root(PathBuf),
}

/// A harvested file. `error` is set when the file could not be read; the
/// entry then lacks a checksum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarvestEntry {
    pub file: FileInfo,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HarvestResult {
    pub algorithm: Algorithm,
    /// Sorted by relative path.
    pub entries: Vec<HarvestEntry>,
}

impl HarvestResult {
    pub fn files(&self) -> Vec<FileInfo> {
        self.entries.iter().map(|e| e.file.clone()).collect()
    }

    pub fn errors(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().filter_map(|e| e.error.as_deref().map(|m| (e.file.filename.as_str(), m)))
    }

    /// A dataset holding only the file list.
    pub fn to_dataset(&self) -> EngMetaDataset {
        EngMetaDataset { files: self.files(), ..Default::default() }
    }
}

/// Lowercased extension, e.g. `log` for `md.LOG`. Dot files such as
/// `.hidden` have none.
pub fn file_type(path: &Path) -> Option<String> {
    path.extension().and_then(|e| e.to_str()).filter(|e| !e.is_empty()).map(str::to_ascii_lowercase)
}

fn hash<D: Digest>(reader: &mut impl Read) -> io::Result<(u64, String)> {
    let mut hasher = D::new();
    let mut buf = vec![0u8; 64 * 1024];
    let mut total = 0u64;
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        total += n as u64;
    }
    Ok((total, hex::encode(hasher.finalize())))
}

/// Size in bytes and lowercase hex digest of a file's content.
pub fn digest_file(path: &Path, algorithm: Algorithm) -> io::Result<(u64, String)> {
    let mut f = File::open(path)?;
    match algorithm {
        Algorithm::Md5 => hash::<Md5>(&mut f),
        Algorithm::Sha256 => hash::<Sha256>(&mut f),
    }
}

fn relative(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/")
}

fn entry(root: &Path, path: &Path, algorithm: Algorithm) -> HarvestEntry {
    let mut file = FileInfo {
        filename: relative(root, path),
        file_type: file_type(path),
        ..Default::default()
    };
    match digest_file(path, algorithm) {
        Ok((size, digest)) => {
            file.size_bytes = Some(size as i64);
            file.checksum = Some(Checksum { algorithm: algorithm.code().into(), digest });
            HarvestEntry { file, error: None }
        }
        Err(e) => {
            file.size_bytes = path.metadata().ok().map(|m| m.len() as i64);
            HarvestEntry { file, error: Some(e.to_string()) }
        }
    }
}

/// Lists every regular file under `root`, hidden ones included. Symbolic
/// links are not followed. Files are checksummed in parallel; the result
/// is sorted by relative path.
pub fn harvest(root: &Path, algorithm: Algorithm) -> Result<HarvestResult, HarvestError> {
    if !root.is_dir() {
        return Err(HarvestError::Root(root.to_path_buf()));
    }
    let mut files = Vec::new();
    let mut broken = Vec::new();
    for item in WalkDir::new(root).follow_links(false) {
        match item {
            Ok(e) if e.file_type().is_file() => files.push(e.into_path()),
            Ok(_) => {}
            Err(e) => {
                let path = e.path().map(|p| relative(root, p)).unwrap_or_default();
                broken.push(HarvestEntry {
                    file: FileInfo { filename: path, ..Default::default() },
                    error: Some(e.to_string()),
                });
            }
        }
    }
    let mut entries: Vec<HarvestEntry> = files.par_iter().map(|p| entry(root, p, algorithm)).collect();
    entries.extend(broken);
    entries.sort_by(|a, b| a.file.filename.cmp(&b.file.filename));
    Ok(HarvestResult { algorithm, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    #[test]
    fn empty_directory() {
        let dir = tempfile::tempdir().unwrap();
        assert!(harvest(dir.path(), Algorithm::Sha256).unwrap().entries.is_empty());
    }

    #[test]
    fn known_digests() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("empty"), b"").unwrap();
        fs::write(dir.path().join("a.log"), b"hello").unwrap();
        let r = harvest(dir.path(), Algorithm::Sha256).unwrap();
        let names: Vec<_> = r.entries.iter().map(|e| e.file.filename.as_str()).collect();
        assert_eq!(names, vec!["a.log", "empty"]);
        let a = &r.entries[0].file;
        assert_eq!(a.size_bytes, Some(5));
        assert_eq!(a.file_type.as_deref(), Some("log"));
        assert_eq!(
            a.checksum.as_ref().unwrap().digest,
            "2cf24dba5fb0a30e26e83b2ac5b9e29e1b161e5c1fa7425e73043362938b9824"
        );
        let e = &r.entries[1].file;
        assert_eq!(e.file_type, None);
        assert_eq!(
            e.checksum.as_ref().unwrap().digest,
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        let md5 = harvest(dir.path(), Algorithm::Md5).unwrap();
        let c = md5.entries[0].file.checksum.as_ref().unwrap();
        assert_eq!(c.algorithm, "MD5");
        assert_eq!(c.digest, "5d41402abc4b2a76b9719d911017c592");
    }

    #[test]
    fn nested_and_hidden_files() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path().join("run/b")).unwrap();
        fs::write(dir.path().join("run/b/z.TRR"), b"x").unwrap();
        fs::write(dir.path().join(".hidden"), b"y").unwrap();
        let r = harvest(dir.path(), Algorithm::Md5).unwrap();
        let names: Vec<_> = r.entries.iter().map(|e| e.file.filename.as_str()).collect();
        assert_eq!(names, vec![".hidden", "run/b/z.TRR"]);
        assert_eq!(r.entries[1].file.file_type.as_deref(), Some("trr"));
    }

    #[cfg(unix)]
    #[test]
    fn symlinks_are_not_followed() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("real.dat"), b"1").unwrap();
        std::os::unix::fs::symlink(dir.path().join("real.dat"), dir.path().join("link.dat")).unwrap();
        let r = harvest(dir.path(), Algorithm::Sha256).unwrap();
        assert_eq!(r.entries.len(), 1);
    }

    #[test]
    fn algorithm_codes() {
        assert_eq!("SHA-256".parse::<Algorithm>().unwrap(), Algorithm::Sha256);
        assert_eq!("md5".parse::<Algorithm>().unwrap().code(), "MD5");
        assert!("crc32".parse::<Algorithm>().is_err());
    }
}
