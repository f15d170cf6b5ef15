// Plain-text problem dump (see README, "Conic problem dump format").
//
//   unext-conic 1
//   label <free text to end of line>
//   form primal|dual
//   sense min|max
//   blocks <k> <n_1> ... <n_k>
//   objective <nnz>
//   <block> <row> <col> <re> <im>        (nnz lines)
//   constraint <index> <rhs> <nnz>
//   <block> <row> <col> <re> <im>        (nnz lines)
//   ...
//   end
//
// Standard data (C, A_i, b) are written exactly as stored; floats use Rust's
// shortest round-trip formatting, so read(write(p)) == p.

use super::{ConicProblem, Entry, Form, Sense};
use crate::error::{Error, Result};
use crate::linalg::C64;
use std::fmt::Write;

pub(super) fn write(p: &ConicProblem) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "unext-conic 1");
    let _ = writeln!(s, "label {}", p.label.replace('\n', " "));
    let _ = writeln!(s, "form {}", if p.form == Form::Primal { "primal" } else { "dual" });
    let _ = writeln!(s, "sense {}", if p.sense == Sense::Minimize { "min" } else { "max" });
    let _ = write!(s, "blocks {}", p.blocks.len());
    for n in &p.blocks {
        let _ = write!(s, " {n}");
    }
    s.push('\n');
    let entries = |s: &mut String, op: &[Entry]| {
        for e in op {
            let _ = writeln!(s, "{} {} {} {:?} {:?}", e.block, e.row, e.col, e.value.re, e.value.im);
        }
    };
    let _ = writeln!(s, "objective {}", p.c.len());
    entries(&mut s, &p.c);
    for (i, (row, rhs)) in p.a.iter().zip(&p.b).enumerate() {
        let _ = writeln!(s, "constraint {i} {rhs:?} {}", row.len());
        entries(&mut s, row);
    }
    s.push_str("end\n");
    s
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

pub(super) fn read(text: &str) -> Result<ConicProblem> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let mut next = || lines.next().ok_or_else(|| bad("unexpected end of dump"));
    if next()? != "unext-conic 1" {
        return Err(bad("missing header 'unext-conic 1'"));
    }
    let label = next()?.strip_prefix("label").ok_or_else(|| bad("expected label"))?.trim().to_string();
    let form = match next()? {
        "form primal" => Form::Primal,
        "form dual" => Form::Dual,
        l => return Err(bad(format!("bad form line '{l}'"))),
    };
    let sense = match next()? {
        "sense min" => Sense::Minimize,
        "sense max" => Sense::Maximize,
        l => return Err(bad(format!("bad sense line '{l}'"))),
    };
    let bl = next()?;
    let mut it = bl.split_whitespace();
    if it.next() != Some("blocks") {
        return Err(bad("expected blocks"));
    }
    let k: usize = parse(it.next())?;
    let blocks: Vec<usize> = (0..k).map(|_| parse(it.next())).collect::<Result<_>>()?;
    let mut c = Vec::new();
    let mut a = Vec::new();
    let mut b = Vec::new();
    let header = next()?;
    let mut it = header.split_whitespace();
    if it.next() != Some("objective") {
        return Err(bad("expected objective"));
    }
    let nnz: usize = parse(it.next())?;
    for _ in 0..nnz {
        c.push(entry(next()?, &blocks)?);
    }
    loop {
        let l = next()?;
        if l == "end" {
            break;
        }
        let mut it = l.split_whitespace();
        if it.next() != Some("constraint") {
            return Err(bad(format!("expected constraint, got '{l}'")));
        }
        let idx: usize = parse(it.next())?;
        if idx != a.len() {
            return Err(bad("constraints out of order"));
        }
        let rhs: f64 = parse(it.next())?;
        let nnz: usize = parse(it.next())?;
        let mut row = Vec::with_capacity(nnz);
        for _ in 0..nnz {
            row.push(entry(next()?, &blocks)?);
        }
        a.push(row);
        b.push(rhs);
    }
    Ok(ConicProblem { blocks, c, a, b, form, sense, label })
}

fn parse<T: std::str::FromStr>(tok: Option<&str>) -> Result<T> {
    let t = tok.ok_or_else(|| bad("missing field"))?;
    t.parse().map_err(|_| bad(format!("cannot parse '{t}'")))
}

fn entry(line: &str, blocks: &[usize]) -> Result<Entry> {
    let mut it = line.split_whitespace();
    let block: usize = parse(it.next())?;
    let row: usize = parse(it.next())?;
    let col: usize = parse(it.next())?;
    let re: f64 = parse(it.next())?;
    let im: f64 = parse(it.next())?;
    let n = *blocks.get(block).ok_or_else(|| bad(format!("block {block} out of range")))?;
    if row >= n || col >= n {
        return Err(bad(format!("entry ({row},{col}) outside block of order {n}")));
    }
    Ok(Entry { block, row, col, value: C64::new(re, im) })
}
