//! graph6 encoding and decoding.
//!
//! Vertex counts up to 62 use the one-byte header; 63..=258047 use `~`
//! followed by 18 bits. The body packs the upper triangle column by column
//! (`x(0,1), x(0,2), x(1,2), x(0,3), ...`) six bits per byte, most significant
//! first, each byte offset by 63. Only canonical strings are accepted: short
//! header whenever it fits and zero padding bits, which makes
//! `write(parse(s)) == s` on the accepted domain.

use std::io::BufRead;

use crate::error::Graph6Error;
use crate::graph::{Graph, MAX_VERTICES};

const OPTIONAL_HEADER: &str = ">>graph6<<";
const LONG_FORM_MAX: usize = 258_047;

fn body_len(n: usize) -> usize {
    (n * n.saturating_sub(1) / 2).div_ceil(6)
}

/// Decodes one graph6 string (surrounding whitespace and the optional
/// `>>graph6<<` prefix are ignored).
pub fn parse_graph6(text: &str) -> Result<Graph, Graph6Error> {
    let s = text.trim();
    let s = s.strip_prefix(OPTIONAL_HEADER).unwrap_or(s);
    let bytes = s.as_bytes();
    if bytes.is_empty() {
        return Err(Graph6Error::Empty);
    }
    for (offset, &byte) in bytes.iter().enumerate() {
        if !(63..=126).contains(&byte) {
            return Err(Graph6Error::InvalidByte { byte, offset });
        }
    }

    let (n, body) = if bytes[0] != b'~' {
        ((bytes[0] - 63) as usize, &bytes[1..])
    } else {
        if bytes.len() < 4 {
            return Err(Graph6Error::BadHeader);
        }
        if bytes[1] == b'~' {
            // 36-bit form: n >= 258048, never constructible here.
            if bytes.len() < 8 {
                return Err(Graph6Error::BadHeader);
            }
            let n = bytes[2..8]
                .iter()
                .fold(0usize, |acc, &c| (acc << 6) | (c - 63) as usize);
            return Err(Graph6Error::TooLarge(n));
        }
        let n = bytes[1..4]
            .iter()
            .fold(0usize, |acc, &c| (acc << 6) | (c - 63) as usize);
        if n <= 62 {
            return Err(Graph6Error::NonCanonical("long header for n <= 62"));
        }
        (n, &bytes[4..])
    };
    debug_assert!(n <= LONG_FORM_MAX);
    if n > MAX_VERTICES {
        return Err(Graph6Error::TooLarge(n));
    }
    if n == 0 {
        return Err(Graph6Error::Graph(crate::error::GraphError::NoVertices));
    }
    let expected = body_len(n);
    if body.len() != expected {
        return Err(Graph6Error::BadLength {
            expected,
            got: body.len(),
        });
    }

    let mut g = Graph::empty(n)?;
    let mut k = 0usize;
    for j in 1..n {
        for i in 0..j {
            let byte = body[k / 6] - 63;
            if byte >> (5 - k % 6) & 1 == 1 {
                g.set_edge_unchecked(i, j, true);
            }
            k += 1;
        }
    }
    if !k.is_multiple_of(6) {
        let last = body[k / 6] - 63;
        if last & ((1 << (6 - k % 6)) - 1) != 0 {
            return Err(Graph6Error::NonCanonical("non-zero padding bits"));
        }
    }
    debug_assert!(g.validate().is_ok());
    Ok(g)
}

/// Encodes `g` as canonical graph6 (no trailing newline).
pub fn write_graph6(g: &Graph) -> String {
    let n = g.n();
    let mut out = Vec::with_capacity(4 + body_len(n));
    if n <= 62 {
        out.push(n as u8 + 63);
    } else {
        out.push(b'~');
        for shift in [12, 6, 0] {
            out.push(((n >> shift) & 0x3f) as u8 + 63);
        }
    }
    let mut acc = 0u8;
    let mut nbits = 0;
    for j in 1..n {
        for i in 0..j {
            acc = (acc << 1) | g.has_edge(i, j) as u8;
            nbits += 1;
            if nbits == 6 {
                out.push(acc + 63);
                acc = 0;
                nbits = 0;
            }
        }
    }
    if nbits > 0 {
        out.push((acc << (6 - nbits)) + 63);
    }
    String::from_utf8(out).expect("graph6 is ASCII")
}

/// Reads one graph per non-empty line.
pub fn read_graph6_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<Graph, ReadError>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Err(e) => Some(Err(ReadError::Io(e.to_string()))),
            Ok(l) if l.trim().is_empty() => None,
            Ok(l) => Some(parse_graph6(&l).map_err(|source| ReadError::Parse {
                line: i + 1,
                source,
            })),
        })
}

/// Line-oriented read failure.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReadError {
    #[error("I/O error: {0}")]
    Io(String),
    #[error("line {line}: {source}")]
    Parse { line: usize, source: Graph6Error },
}
