//! STL reading and writing.
//!
//! Both encodings store every coordinate as an `f32`. Binary files are an
//! 80-byte header, a little-endian `u32` triangle count and 50 bytes per
//! triangle (normal, three corners, a `u16` attribute). ASCII files are
//! `solid ... endsolid` blocks of `facet normal / outer loop / vertex`.

use std::fmt::Write as _;

use super::mesh::{Point, TriangleMesh};
use super::{GeometryError, Result};

const HEADER_LEN: usize = 80;
const RECORD_LEN: usize = 50;
const BINARY_HEADER: &[u8] = b"ridgeview binary STL";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StlFormat {
    Binary,
    Ascii,
}

pub fn parse_stl(bytes: &[u8]) -> Result<TriangleMesh> {
    if looks_binary(bytes) || !bytes.starts_with(b"solid") {
        parse_binary(bytes)
    } else {
        parse_ascii(bytes)
    }
}

// Binary files may also start with "solid"; an exact size match wins.
fn looks_binary(bytes: &[u8]) -> bool {
    if bytes.len() < HEADER_LEN + 4 {
        return false;
    }
    let count = u32::from_le_bytes(bytes[HEADER_LEN..HEADER_LEN + 4].try_into().unwrap()) as usize;
    count
        .checked_mul(RECORD_LEN)
        .and_then(|body| body.checked_add(HEADER_LEN + 4))
        == Some(bytes.len())
}

fn parse_binary(bytes: &[u8]) -> Result<TriangleMesh> {
    if bytes.len() < HEADER_LEN + 4 {
        return Err(GeometryError::ShortHeader);
    }
    let declared = u32::from_le_bytes(bytes[HEADER_LEN..HEADER_LEN + 4].try_into().unwrap());
    let body = &bytes[HEADER_LEN + 4..];
    let available = body.len() / RECORD_LEN;
    if (declared as usize) > available {
        return Err(GeometryError::Truncated { declared, available });
    }
    if declared == 0 {
        return Err(GeometryError::EmptyMesh);
    }
    let read = |rec: &[u8], k: usize| -> Point {
        let at = |i: usize| {
            let off = 4 * (3 * k + i);
            f64::from(f32::from_le_bytes(rec[off..off + 4].try_into().unwrap()))
        };
        [at(0), at(1), at(2)]
    };
    let triangles = body
        .chunks_exact(RECORD_LEN)
        .take(declared as usize)
        .map(|rec| (read(rec, 0), [read(rec, 1), read(rec, 2), read(rec, 3)]));
    TriangleMesh::from_triangles(triangles)
}

struct Tokens<'a> {
    inner: Box<dyn Iterator<Item = (usize, &'a str)> + 'a>,
    line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let inner = text
            .lines()
            .enumerate()
            .skip(1)
            .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)));
        Self {
            inner: Box::new(inner),
            line: 1,
        }
    }

    fn next(&mut self) -> Option<&'a str> {
        self.inner.next().map(|(line, t)| {
            self.line = line;
            t
        })
    }

    fn error(&self, message: String) -> GeometryError {
        GeometryError::MalformedAscii {
            line: self.line,
            message,
        }
    }

    fn expect(&mut self, keyword: &str) -> Result<()> {
        match self.next() {
            Some(t) if t == keyword => Ok(()),
            Some(t) => Err(self.error(format!("expected `{keyword}`, found `{t}`"))),
            None => Err(self.error(format!("expected `{keyword}`, found end of file"))),
        }
    }

    fn point(&mut self) -> Result<Point> {
        let mut p = [0.0; 3];
        for slot in &mut p {
            let t = self.next().ok_or_else(|| self.error("expected a number, found end of file".into()))?;
            let v: f32 = t
                .parse()
                .map_err(|_| self.error(format!("cannot parse `{t}` as a number")))?;
            *slot = f64::from(v);
        }
        Ok(p)
    }
}

fn parse_ascii(bytes: &[u8]) -> Result<TriangleMesh> {
    let text = std::str::from_utf8(bytes).map_err(|e| GeometryError::MalformedAscii {
        line: 0,
        message: format!("not UTF-8: {e}"),
    })?;
    // the first line is `solid [name]`; the name may contain anything
    let mut tokens = Tokens::new(text);
    let mut triangles = Vec::new();
    loop {
        match tokens.next() {
            Some("facet") => {
                tokens.expect("normal")?;
                let normal = tokens.point()?;
                tokens.expect("outer")?;
                tokens.expect("loop")?;
                let mut corners = [[0.0; 3]; 3];
                for c in &mut corners {
                    tokens.expect("vertex")?;
                    *c = tokens.point()?;
                }
                tokens.expect("endloop")?;
                tokens.expect("endfacet")?;
                triangles.push((normal, corners));
            }
            Some("endsolid") => break,
            Some(t) => return Err(tokens.error(format!("expected `facet` or `endsolid`, found `{t}`"))),
            None => return Err(tokens.error("missing `endsolid`".into())),
        }
    }
    if triangles.is_empty() {
        return Err(GeometryError::EmptyMesh);
    }
    TriangleMesh::from_triangles(triangles)
}

/// Canonical STL encoding of a mesh. Coordinates are narrowed to `f32`;
/// ASCII output uses 9 significant digits, enough to round-trip an `f32`.
pub fn serialize_stl(mesh: &TriangleMesh, format: StlFormat) -> Vec<u8> {
    match format {
        StlFormat::Binary => {
            let count = mesh.facets().len();
            let mut out = Vec::with_capacity(HEADER_LEN + 4 + RECORD_LEN * count);
            out.extend_from_slice(BINARY_HEADER);
            out.resize(HEADER_LEN, 0);
            out.extend_from_slice(&(count as u32).to_le_bytes());
            for (facet, normal) in mesh.facet_normals().iter().enumerate() {
                for p in std::iter::once(*normal).chain(mesh.triangle(facet)) {
                    for v in p {
                        out.extend_from_slice(&(v as f32).to_le_bytes());
                    }
                }
                out.extend_from_slice(&[0, 0]);
            }
            out
        }
        StlFormat::Ascii => {
            let mut s = String::from("solid ridgeview\n");
            let fmt = |p: Point| {
                let [x, y, z] = p.map(|v| v as f32);
                format!("{x:.8e} {y:.8e} {z:.8e}")
            };
            for (facet, normal) in mesh.facet_normals().iter().enumerate() {
                let _ = writeln!(s, "  facet normal {}", fmt(*normal));
                s.push_str("    outer loop\n");
                for p in mesh.triangle(facet) {
                    let _ = writeln!(s, "      vertex {}", fmt(p));
                }
                s.push_str("    endloop\n  endfacet\n");
            }
            s.push_str("endsolid ridgeview\n");
            s.into_bytes()
        }
    }
}
