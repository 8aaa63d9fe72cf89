use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Embedding, ReductionParams};
use crate::error::{Error, Result};

pub const EMBEDDING_MAGIC: &str = "severance-embedding";

/// Writes the text embedding format: one header line
/// `severance-embedding v1 n=<n> m=<m> hash=<hex> params=<canonical>`
/// optionally followed by extra `key=value` provenance tokens, then `n`
/// lines of `m` reals printed with 17 significant digits.
pub fn write_embedding(
    embedding: &Embedding,
    path: impl AsRef<Path>,
    extra: &[(&str, String)],
) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!(
        "{EMBEDDING_MAGIC} v1 n={} m={} hash={:016x} params={}",
        embedding.len(),
        embedding.dims(),
        embedding.dataset_hash,
        embedding.params.canonical()
    );
    for (k, v) in extra {
        debug_assert!(!v.contains(char::is_whitespace));
        let _ = write!(out, " {k}={v}");
    }
    out.push('\n');
    for i in 0..embedding.len() {
        for (d, x) in embedding.point(i).iter().enumerate() {
            if d > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{x:.16e}");
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_embedding(path: impl AsRef<Path>) -> Result<Embedding> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse {
        line: 1,
        detail: "empty embedding file".into(),
    })?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some(EMBEDDING_MAGIC) || tokens.next() != Some("v1") {
        return Err(Error::Parse {
            line: 1,
            detail: format!("not a `{EMBEDDING_MAGIC} v1` file"),
        });
    }
    let (mut n, mut m, mut hash, mut params) = (None, None, None, None);
    let header_err = |detail: String| Error::Parse { line: 1, detail };
    for tok in tokens {
        let Some((k, v)) = tok.split_once('=') else {
            return Err(header_err(format!("header token `{tok}` is not key=value")));
        };
        match k {
            "n" => n = Some(v.parse::<usize>().map_err(|_| header_err(format!("bad n `{v}`")))?),
            "m" => m = Some(v.parse::<usize>().map_err(|_| header_err(format!("bad m `{v}`")))?),
            "hash" => {
                hash = Some(
                    u64::from_str_radix(v, 16).map_err(|_| header_err(format!("bad hash `{v}`")))?,
                )
            }
            "params" => params = Some(v.parse::<ReductionParams>()?),
            _ => {} // provenance tokens
        }
    }
    let (Some(n), Some(m), Some(hash), Some(params)) = (n, m, hash, params) else {
        return Err(header_err("header must carry n, m, hash and params".into()));
    };

    let mut coords = Vec::with_capacity(n * m);
    let mut rows = 0;
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        if line.trim().is_empty() {
            continue;
        }
        let before = coords.len();
        for tok in line.split_whitespace() {
            coords.push(tok.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                detail: format!("`{tok}` is not a number"),
            })?);
        }
        if coords.len() - before != m {
            return Err(Error::Shape {
                line: line_no,
                expected: m,
                found: coords.len() - before,
            });
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Consistency(format!(
            "{}: header says n={n}, found {rows} rows",
            path.display()
        )));
    }
    if params.m != m {
        return Err(Error::Consistency(format!(
            "{}: header m={m} disagrees with params m={}",
            path.display(),
            params.m
        )));
    }
    Embedding::new(coords, m, params, hash)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let params = ReductionParams {
            m: 2,
            seed: 3,
            ..Default::default()
        };
        let coords = vec![0.1, -1.0 / 3.0, 1e-300, 12345.678901234567, -0.0, 9.999e10];
        let e = Embedding::new(coords, 2, params, 0xdead_beef_0000_0001).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.txt");
        write_embedding(&e, &p, &[("tool", "severance/0.1.0".into())]).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("severance-embedding v1 n=3 m=2 hash=deadbeef00000001 params=m=2;"));
        assert!(text.lines().next().unwrap().ends_with(" tool=severance/0.1.0"));
        assert_eq!(read_embedding(&p).unwrap(), e);
    }

    #[test]
    fn row_count_checked() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.txt");
        let params = ReductionParams::default().canonical();
        fs::write(&p, format!("severance-embedding v1 n=2 m=3 hash=00 params={params}\n1 2 3\n")).unwrap();
        assert!(matches!(read_embedding(&p), Err(Error::Consistency(_))));
        fs::write(&p, format!("severance-embedding v1 n=1 m=3 hash=00 params={params}\n1 2\n")).unwrap();
        assert!(matches!(read_embedding(&p), Err(Error::Shape { line: 2, .. })));
    }
}
