//! Download helper for the political blogs network.
//!
//! The archive is fetched from a pinned URL. Its SHA-256 is checked against
//! `--sha256` when given, otherwise against the digest recorded by the
//! first successful download (`polblogs.sha256` in the data directory).

use std::io::{Cursor, Read};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use lrdpg::datasets::{data_dir, parse_polblogs_gml, POLBLOGS_FILE};
use sha2::{Digest, Sha256};

pub const POLBLOGS_URL: &str = "http://www-personal.umich.edu/~mejn/netdata/polblogs.zip";
const DIGEST_FILE: &str = "polblogs.sha256";

#[derive(Debug, Default, Clone)]
pub struct FetchOptions {
    /// Use a local copy (zip archive or GML) instead of downloading.
    pub from: Option<PathBuf>,
    /// Expected SHA-256 of the archive, hex encoded.
    pub sha256: Option<String>,
    pub force: bool,
    /// Overrides [`data_dir`].
    pub dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct Fetched {
    pub path: PathBuf,
    pub sha256: String,
    /// Whether the digest was recorded now rather than checked.
    pub first_use: bool,
    pub nodes: usize,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn download(url: &str) -> Result<Vec<u8>> {
    let client = reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs(60))
        .build()?;
    let resp = client
        .get(url)
        .send()
        .with_context(|| format!("downloading {url}"))?
        .error_for_status()
        .with_context(|| format!("downloading {url}"))?;
    Ok(resp.bytes()?.to_vec())
}

/// The GML text inside a zip archive, or the bytes themselves if they are
/// not a zip archive.
fn extract_gml(bytes: &[u8]) -> Result<String> {
    if !bytes.starts_with(b"PK") {
        return String::from_utf8(bytes.to_vec()).context("dataset is neither a zip archive nor UTF-8 text");
    }
    let mut archive = zip::ZipArchive::new(Cursor::new(bytes)).context("reading zip archive")?;
    for i in 0..archive.len() {
        let mut entry = archive.by_index(i)?;
        if entry.name().ends_with(".gml") {
            let mut text = String::new();
            entry.read_to_string(&mut text)?;
            return Ok(text);
        }
    }
    bail!("archive contains no .gml file")
}

fn check_digest(dir: &Path, actual: &str, expected: Option<&str>) -> Result<bool> {
    let recorded = dir.join(DIGEST_FILE);
    let expected = match expected {
        Some(e) => Some(e.trim().to_ascii_lowercase()),
        None if recorded.exists() => Some(
            std::fs::read_to_string(&recorded)?
                .split_whitespace()
                .next()
                .unwrap_or_default()
                .to_ascii_lowercase(),
        ),
        None => None,
    };
    match expected {
        Some(e) if e != actual => bail!("checksum mismatch: expected {e}, got {actual}"),
        Some(_) => Ok(false),
        None => {
            std::fs::write(&recorded, format!("{actual}  {POLBLOGS_URL}\n"))?;
            Ok(true)
        }
    }
}

pub fn fetch_polblogs(opts: &FetchOptions) -> Result<Fetched> {
    let dir = opts.dir.clone().unwrap_or_else(data_dir);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let target = dir.join(POLBLOGS_FILE);
    let bytes = match &opts.from {
        Some(p) => std::fs::read(p).with_context(|| format!("reading {}", p.display()))?,
        None if target.exists() && !opts.force => {
            let bytes = std::fs::read(&target)?;
            let ds = parse_polblogs_gml(std::str::from_utf8(&bytes)?)?;
            return Ok(Fetched {
                path: target,
                sha256: sha256_hex(&bytes),
                first_use: false,
                nodes: ds.graph.node_count(),
            });
        }
        None => download(POLBLOGS_URL)?,
    };
    let sha256 = sha256_hex(&bytes);
    let first_use = check_digest(&dir, &sha256, opts.sha256.as_deref())?;
    let text = extract_gml(&bytes)?;
    let ds = parse_polblogs_gml(&text).context("parsing the blogs network")?;
    std::fs::write(&target, text).with_context(|| format!("writing {}", target.display()))?;
    Ok(Fetched {
        path: target,
        sha256,
        first_use,
        nodes: ds.graph.node_count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    const GML: &str = "graph [ node [ id 1 value 0 ] node [ id 2 value 1 ] edge [ source 1 target 2 ] ]";

    fn zipped(text: &str) -> Vec<u8> {
        let mut buf = Cursor::new(Vec::new());
        {
            let mut w = zip::ZipWriter::new(&mut buf);
            w.start_file::<_, ()>("polblogs.txt", Default::default()).unwrap();
            w.write_all(b"readme").unwrap();
            w.start_file::<_, ()>("polblogs.gml", Default::default()).unwrap();
            w.write_all(text.as_bytes()).unwrap();
            w.finish().unwrap();
        }
        buf.into_inner()
    }

    #[test]
    fn local_archive_then_digest_is_enforced() {
        let dir = tempfile::tempdir().unwrap();
        let archive = dir.path().join("in.zip");
        std::fs::write(&archive, zipped(GML)).unwrap();
        let opts = FetchOptions {
            from: Some(archive.clone()),
            dir: Some(dir.path().join("data")),
            ..Default::default()
        };
        let first = fetch_polblogs(&opts).unwrap();
        assert!(first.first_use);
        assert_eq!(first.nodes, 2);
        assert_eq!(std::fs::read_to_string(&first.path).unwrap(), GML);
        let second = fetch_polblogs(&opts).unwrap();
        assert!(!second.first_use);

        std::fs::write(&archive, zipped(&GML.replace("value 1", "value 0"))).unwrap();
        let err = fetch_polblogs(&opts).unwrap_err().to_string();
        assert!(err.contains("checksum mismatch"), "{err}");
    }

    #[test]
    fn explicit_digest_and_plain_gml() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("blogs.gml");
        std::fs::write(&src, GML).unwrap();
        let mut opts = FetchOptions {
            from: Some(src),
            sha256: Some("00".into()),
            dir: Some(dir.path().to_path_buf()),
            ..Default::default()
        };
        assert!(fetch_polblogs(&opts).is_err());
        opts.sha256 = Some(sha256_hex(GML.as_bytes()).to_uppercase());
        assert!(!fetch_polblogs(&opts).unwrap().first_use);
    }
}
