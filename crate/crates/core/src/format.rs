//! Plain-text stream files.
//!
//! ```text
//! n k mode          # mode is `ins` or `dyn`
//! + u v w           # insertion
//! - u v w           # deletion (dyn only)
//! ```
//!
//! Tokens are whitespace separated. Blank lines and lines starting with `#`
//! are skipped. In `dyn` mode `w` is a non-negative integer; in `ins` mode it
//! may be any non-negative decimal.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{Mode, Op, RealWeight, Stream, StreamElement, Vertex, Weight};

/// A parsed stream file; the header's mode picks the weight type.
#[derive(Clone, Debug, PartialEq)]
pub enum StreamFile {
    Ins(Stream<RealWeight>),
    Dyn(Stream<u64>),
}

impl StreamFile {
    pub fn mode(&self) -> Mode {
        match self {
            StreamFile::Ins(_) => Mode::InsertOnly,
            StreamFile::Dyn(_) => Mode::Dynamic,
        }
    }

    pub fn n(&self) -> u32 {
        match self {
            StreamFile::Ins(s) => s.n,
            StreamFile::Dyn(s) => s.n,
        }
    }

    pub fn k(&self) -> usize {
        match self {
            StreamFile::Ins(s) => s.k,
            StreamFile::Dyn(s) => s.k,
        }
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

struct Header {
    n: u32,
    k: usize,
    mode: Mode,
}

fn parse_header(line_no: usize, line: &str) -> Result<Header> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() != 3 {
        return Err(Error::parse(line_no, "header must be `n k mode`"));
    }
    let n = toks[0]
        .parse()
        .map_err(|_| Error::parse(line_no, format!("bad vertex count `{}`", toks[0])))?;
    let k = toks[1]
        .parse()
        .map_err(|_| Error::parse(line_no, format!("bad k `{}`", toks[1])))?;
    let mode = match toks[2] {
        "ins" => Mode::InsertOnly,
        "dyn" => Mode::Dynamic,
        other => return Err(Error::parse(line_no, format!("unknown mode `{other}`"))),
    };
    Ok(Header { n, k, mode })
}

fn parse_element<W: Weight>(line_no: usize, line: &str) -> Result<StreamElement<W>> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() != 4 {
        return Err(Error::parse(line_no, "element must be `+|- u v w`"));
    }
    let op = match toks[0] {
        "+" => Op::Insert,
        "-" => Op::Delete,
        other => return Err(Error::parse(line_no, format!("unknown op `{other}`"))),
    };
    let vertex = |t: &str| -> Result<Vertex> {
        t.parse()
            .map_err(|_| Error::parse(line_no, format!("bad vertex `{t}`")))
    };
    let (u, v) = (vertex(toks[1])?, vertex(toks[2])?);
    let wt = W::parse_decimal(toks[3]).ok_or_else(|| Error::parse(line_no, format!("bad weight `{}`", toks[3])))?;
    Ok(match op {
        Op::Insert => StreamElement::insert(u, v, wt),
        Op::Delete => StreamElement::delete(u, v, wt),
    })
}

fn parse_body<'a, W: Weight>(header: Header, lines: impl Iterator<Item = (usize, &'a str)>) -> Result<Stream<W>> {
    let mut stream = Stream::new(header.n, header.k, header.mode);
    for (line_no, line) in lines {
        stream.push(parse_element(line_no, line)?);
    }
    Ok(stream)
}

/// Parses a stream file. Syntax only: use
/// [`validate_stream`](crate::graph::validate_stream) for model checks.
pub fn parse_stream(text: &str) -> Result<StreamFile> {
    let mut lines = content_lines(text);
    let (line_no, first) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
    let header = parse_header(line_no, first)?;
    match header.mode {
        Mode::InsertOnly => Ok(StreamFile::Ins(parse_body(header, lines)?)),
        Mode::Dynamic => Ok(StreamFile::Dyn(parse_body(header, lines)?)),
    }
}

/// Renders a stream in the text format; output is byte-stable for equal streams.
pub fn write_stream<W: Weight>(stream: &Stream<W>) -> String {
    let mut out = String::with_capacity(16 * (stream.len() + 1));
    writeln!(out, "{} {} {}", stream.n, stream.k, stream.mode).unwrap();
    for el in &stream.elements {
        let sign = match el.op {
            Op::Insert => '+',
            Op::Delete => '-',
        };
        writeln!(out, "{sign} {}", el.edge).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::real;

    #[test]
    fn parses_dynamic_stream() {
        let text = "# comment\n5 2 dyn\n+ 0 1 3\n\n+ 4 2 1\n- 0 1 3\n";
        let StreamFile::Dyn(s) = parse_stream(text).unwrap() else {
            panic!("expected dyn stream");
        };
        assert_eq!((s.n, s.k, s.mode), (5, 2, Mode::Dynamic));
        assert_eq!(s.elements[1], StreamElement::insert(2, 4, 1));
        assert_eq!(s.elements[2].op, Op::Delete);
    }

    #[test]
    fn insert_only_accepts_decimals() {
        let StreamFile::Ins(s) = parse_stream("3 1 ins\n+ 0 2 2.75\n").unwrap() else {
            panic!("expected ins stream");
        };
        assert_eq!(s.elements[0].edge.weight(), real(2.75));
    }

    #[test]
    fn dynamic_rejects_decimal_weight() {
        let err = parse_stream("3 1 dyn\n+ 0 2 2.5\n").unwrap_err();
        assert_eq!(err, Error::parse(2, "bad weight `2.5`"));
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(parse_stream("").is_err());
        assert!(parse_stream("3 1 foo\n").is_err());
        assert!(parse_stream("3 1 ins\n* 0 1 1\n").is_err());
        assert!(parse_stream("3 1 ins\n+ 0 1\n").is_err());
        assert!(parse_stream("3 1 ins\n+ 0 1 -2\n").is_err());
    }

    #[test]
    fn header_only_file() {
        let s = parse_stream("4 2 ins\n").unwrap();
        assert_eq!(s.n(), 4);
        assert_eq!(s.k(), 2);
        let StreamFile::Ins(s) = s else { unreachable!() };
        assert!(s.is_empty());
        assert_eq!(write_stream(&s), "4 2 ins\n");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn write_then_parse_round_trips(
                els in proptest::collection::vec((any::<bool>(), 0u32..50, 0u32..50, 0u64..1_000_000), 0..40)
            ) {
                let mut s = Stream::new(50, 3, Mode::Dynamic);
                for (ins, u, v, w) in els {
                    s.push(if ins { StreamElement::insert(u, v, w) } else { StreamElement::delete(u, v, w) });
                }
                let text = write_stream(&s);
                prop_assert_eq!(parse_stream(&text).unwrap(), StreamFile::Dyn(s));
            }

            #[test]
            fn real_weights_round_trip(ws in proptest::collection::vec(0.0f64..1e9, 0..20)) {
                let mut s = Stream::new(10, 1, Mode::InsertOnly);
                for (i, w) in ws.into_iter().enumerate() {
                    s.push(StreamElement::insert(0, 1 + (i as u32 % 9), real(w)));
                }
                let text = write_stream(&s);
                prop_assert_eq!(parse_stream(&text).unwrap(), StreamFile::Ins(s));
            }
        }
    }
}
