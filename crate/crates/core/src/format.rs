//! Whitespace-separated text formats. Ids are 1-based on disk.
//!
//! ```text
//! kmedian <centers> <customers> <edges> <k>
//! <center> <customer> <cost>            (one line per edge)
//!
//! setcover <sets> <elements> <k>
//! <set> <element>                       (one line per membership)
//!
//! frac <centers> <customers>
//! x <center> <value>
//! y <center> <customer> <value>
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::instance::{Instance, SetCoverInstance};
use crate::sampling::{FractionalSolution, YEntry};

/// Which of the text formats a document is in, judged by its header word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    KMedian,
    SetCover,
    Frac,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(idx, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((idx + 1, line.split_whitespace().collect()))
        }
    })
}

fn field<T: FromStr>(line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("bad {what} {tok:?}")))
}

/// 1-based id on disk to 0-based index.
fn id(line: usize, tok: &str, what: &str, limit: usize) -> Result<usize> {
    let raw: usize = field(line, tok, what)?;
    if raw == 0 || raw > limit {
        return Err(parse_err(
            line,
            format!("{what} {raw} out of range 1..={limit}"),
        ));
    }
    Ok(raw - 1)
}

fn value(line: usize, tok: &str, what: &str) -> Result<f64> {
    let v: f64 = field(line, tok, what)?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("{what} must be finite")));
    }
    Ok(v)
}

fn expect_arity(line: usize, toks: &[&str], arity: usize) -> Result<()> {
    if toks.len() != arity {
        return Err(parse_err(
            line,
            format!("expected {arity} fields, found {}", toks.len()),
        ));
    }
    Ok(())
}

fn header<'a>(
    recs: &mut impl Iterator<Item = (usize, Vec<&'a str>)>,
    word: &str,
    arity: usize,
) -> Result<(usize, Vec<&'a str>)> {
    let (line, toks) = recs.next().ok_or_else(|| parse_err(1, "empty input"))?;
    if toks[0] != word {
        return Err(parse_err(
            line,
            format!("expected header {word:?}, found {:?}", toks[0]),
        ));
    }
    expect_arity(line, &toks, arity)?;
    Ok((line, toks))
}

pub fn detect(text: &str) -> Option<Format> {
    let (_, toks) = records(text).next()?;
    match toks[0] {
        "kmedian" => Some(Format::KMedian),
        "setcover" => Some(Format::SetCover),
        "frac" => Some(Format::Frac),
        _ => None,
    }
}

pub fn parse_kmedian(text: &str) -> Result<Instance> {
    let mut recs = records(text);
    let (hline, h) = header(&mut recs, "kmedian", 5)?;
    let u: usize = field(hline, h[1], "center count")?;
    let n: usize = field(hline, h[2], "customer count")?;
    let m: usize = field(hline, h[3], "edge count")?;
    let k: usize = field(hline, h[4], "k")?;
    let mut edges = Vec::with_capacity(m);
    let mut last = hline;
    for (line, toks) in recs {
        expect_arity(line, &toks, 3)?;
        let i = id(line, toks[0], "center", u)?;
        let j = id(line, toks[1], "customer", n)?;
        let c = value(line, toks[2], "cost")?;
        if c < 0.0 {
            return Err(parse_err(line, "cost must be nonnegative"));
        }
        edges.push((i, j, c));
        last = line;
    }
    if edges.len() != m {
        return Err(parse_err(
            last,
            format!("header declares {m} edges, found {}", edges.len()),
        ));
    }
    Instance::new(u, n, k, edges).map_err(|e| parse_err(hline, e.to_string()))
}

/// Shortest round-trip decimal for each cost.
pub fn write_kmedian(instance: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "kmedian {} {} {} {}",
        instance.num_centers(),
        instance.num_customers(),
        instance.num_edges(),
        instance.k()
    );
    for e in instance.edges() {
        let _ = writeln!(out, "{} {} {}", e.center + 1, e.customer + 1, e.cost);
    }
    out
}

pub fn parse_setcover(text: &str) -> Result<SetCoverInstance> {
    let mut recs = records(text);
    let (hline, h) = header(&mut recs, "setcover", 4)?;
    let s: usize = field(hline, h[1], "set count")?;
    let e: usize = field(hline, h[2], "element count")?;
    let k: usize = field(hline, h[3], "k")?;
    let mut sets = vec![Vec::new(); s];
    for (line, toks) in recs {
        expect_arity(line, &toks, 2)?;
        let set = id(line, toks[0], "set", s)?;
        let element = id(line, toks[1], "element", e)?;
        sets[set].push(element);
    }
    for members in &mut sets {
        members.sort_unstable();
        members.dedup();
    }
    Ok(SetCoverInstance {
        num_elements: e,
        k,
        sets,
    })
}

pub fn write_setcover(system: &SetCoverInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "setcover {} {} {}",
        system.sets.len(),
        system.num_elements,
        system.k
    );
    for (s, members) in system.sets.iter().enumerate() {
        for &e in members {
            let _ = writeln!(out, "{} {}", s + 1, e + 1);
        }
    }
    out
}

/// Returns the declared `(centers, customers)` alongside the solution;
/// unlisted entries are zero.
pub fn parse_frac(text: &str) -> Result<(usize, usize, FractionalSolution)> {
    let mut recs = records(text);
    let (hline, h) = header(&mut recs, "frac", 3)?;
    let u: usize = field(hline, h[1], "center count")?;
    let n: usize = field(hline, h[2], "customer count")?;
    let mut x = vec![0.0; u];
    let mut y = Vec::new();
    for (line, toks) in recs {
        match toks[0] {
            "x" => {
                expect_arity(line, &toks, 3)?;
                let i = id(line, toks[1], "center", u)?;
                x[i] = value(line, toks[2], "x value")?;
            }
            "y" => {
                expect_arity(line, &toks, 4)?;
                y.push(YEntry {
                    center: id(line, toks[1], "center", u)?,
                    customer: id(line, toks[2], "customer", n)?,
                    value: value(line, toks[3], "y value")?,
                });
            }
            other => return Err(parse_err(line, format!("unknown record {other:?}"))),
        }
    }
    Ok((u, n, FractionalSolution { x, y }))
}

/// Zero `x` entries are omitted.
pub fn write_frac(num_customers: usize, frac: &FractionalSolution) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "frac {} {}", frac.x.len(), num_customers);
    for (i, &v) in frac.x.iter().enumerate() {
        if v != 0.0 {
            let _ = writeln!(out, "x {} {}", i + 1, v);
        }
    }
    for e in &frac.y {
        let _ = writeln!(out, "y {} {} {}", e.center + 1, e.customer + 1, e.value);
    }
    out
}
