//! AIGER v1 reader and writer, ASCII (`aag`) and binary (`aig`).
//!
//! Only combinational files are accepted. Symbol tables and comments are
//! skipped on read and never emitted on write.

use super::{Aig, Lit, NodeId};
use crate::error::{Error, Result};

struct Header {
    binary: bool,
    max_var: u64,
    inputs: usize,
    outputs: usize,
    ands: usize,
}

fn parse_header(line: &str) -> Result<Header> {
    let mut tok = line.split_ascii_whitespace();
    let binary = match tok.next() {
        Some("aag") => false,
        Some("aig") => true,
        other => return Err(Error::BadHeader(format!("unknown format tag {other:?}"))),
    };
    let nums: Vec<u64> = tok
        .map(|t| t.parse::<u64>().map_err(|_| Error::BadHeader(format!("bad number {t:?}"))))
        .collect::<Result<_>>()?;
    if nums.len() < 5 {
        return Err(Error::BadHeader(format!("expected 5 counts, found {}", nums.len())));
    }
    // AIGER 1.9 extensions (bad, constraint, justice, fairness) are only
    // tolerated when empty.
    if nums[5..].iter().any(|&n| n != 0) {
        return Err(Error::Sequential(nums[5..].iter().sum::<u64>() as usize));
    }
    let (m, i, l, o, a) = (nums[0], nums[1], nums[2], nums[3], nums[4]);
    if l > 0 {
        return Err(Error::Sequential(l as usize));
    }
    if m < i + a {
        return Err(Error::BadHeader(format!("M={m} smaller than I+L+A={}", i + a)));
    }
    if binary && m != i + a {
        return Err(Error::BadHeader(format!("binary file needs M=I+L+A, got M={m}")));
    }
    Ok(Header {
        binary,
        max_var: m,
        inputs: i as usize,
        outputs: o as usize,
        ands: a as usize,
    })
}

/// Splits off the next `\n`-terminated line.
fn next_line<'a>(data: &'a [u8], pos: &mut usize) -> Option<&'a str> {
    if *pos >= data.len() {
        return None;
    }
    let rest = &data[*pos..];
    let end = rest.iter().position(|&c| c == b'\n').unwrap_or(rest.len());
    *pos += (end + 1).min(rest.len());
    std::str::from_utf8(&rest[..end]).ok().map(|s| s.trim_end_matches('\r'))
}

fn parse_lit(tok: Option<&str>, max_var: u64, what: &str) -> Result<u64> {
    let tok = tok.ok_or_else(|| Error::BadBody(format!("missing {what} literal")))?;
    let lit: u64 = tok
        .parse()
        .map_err(|_| Error::BadBody(format!("bad {what} literal {tok:?}")))?;
    if lit > 2 * max_var + 1 {
        return Err(Error::LiteralOutOfRange { lit, max: 2 * max_var + 1 });
    }
    Ok(lit)
}

fn read_varint(data: &[u8], pos: &mut usize) -> Result<u64> {
    let mut x: u64 = 0;
    let mut shift = 0;
    loop {
        let &byte = data.get(*pos).ok_or(Error::Truncated)?;
        *pos += 1;
        x |= u64::from(byte & 0x7f) << shift;
        if byte & 0x80 == 0 {
            return Ok(x);
        }
        shift += 7;
        if shift > 63 {
            return Err(Error::BadBody("varint overflow".into()));
        }
    }
}

fn write_varint(out: &mut Vec<u8>, mut x: u64) {
    while x >= 0x80 {
        out.push((x as u8 & 0x7f) | 0x80);
        x >>= 7;
    }
    out.push(x as u8);
}

/// Parses an AIGER file. Gates are created exactly as declared, without
/// structural hashing, so node counts match the file; AND gates that reach
/// no output are swept.
pub fn parse_aiger(data: &[u8]) -> Result<Aig> {
    let mut pos = 0;
    let header_line = next_line(data, &mut pos).ok_or_else(|| Error::BadHeader("empty file".into()))?;
    let h = parse_header(header_line)?;
    let mut aig = Aig::new();
    aig.strash_built = false;
    aig.nodes.reserve(1 + h.inputs + h.ands);
    let mut var_lit: Vec<Option<Lit>> = vec![None; h.max_var as usize + 1];
    var_lit[0] = Some(Lit::FALSE);

    if h.binary {
        for v in 1..=h.inputs {
            var_lit[v] = Some(aig.add_input());
        }
    } else {
        for _ in 0..h.inputs {
            let line = next_line(data, &mut pos).ok_or_else(|| Error::BadBody("missing input line".into()))?;
            let lit = parse_lit(line.split_ascii_whitespace().next(), h.max_var, "input")?;
            if lit < 2 || lit & 1 == 1 {
                return Err(Error::BadBody(format!("invalid input literal {lit}")));
            }
            let v = (lit / 2) as usize;
            if var_lit[v].is_some() {
                return Err(Error::BadBody(format!("variable {v} defined twice")));
            }
            var_lit[v] = Some(aig.add_input());
        }
    }

    let mut outputs = Vec::with_capacity(h.outputs);
    for _ in 0..h.outputs {
        let line = next_line(data, &mut pos).ok_or_else(|| Error::BadBody("missing output line".into()))?;
        outputs.push(parse_lit(line.split_ascii_whitespace().next(), h.max_var, "output")?);
    }

    let resolve = |var_lit: &[Option<Lit>], lit: u64| -> Result<Lit> {
        var_lit[(lit / 2) as usize]
            .map(|l| l.complement_if(lit & 1 == 1))
            .ok_or_else(|| Error::BadBody(format!("literal {lit} has no definition")))
    };

    if h.binary {
        for k in 0..h.ands {
            let lhs = 2 * (h.inputs + 1 + k) as u64;
            let d0 = read_varint(data, &mut pos)?;
            let d1 = read_varint(data, &mut pos)?;
            if d0 == 0 || d0 > lhs || d1 > lhs - d0 {
                return Err(Error::BadBody(format!("invalid deltas for AND {lhs}")));
            }
            let r0 = lhs - d0;
            let r1 = r0 - d1;
            let a = resolve(&var_lit, r0)?;
            let b = resolve(&var_lit, r1)?;
            var_lit[(lhs / 2) as usize] = Some(aig.add_and_raw(a, b));
        }
    } else {
        // ASCII gates may appear in any order; define them depth-first.
        let mut defs: Vec<Option<(u64, u64)>> = vec![None; h.max_var as usize + 1];
        let mut order = Vec::with_capacity(h.ands);
        for _ in 0..h.ands {
            let line = next_line(data, &mut pos).ok_or_else(|| Error::BadBody("missing AND line".into()))?;
            let mut tok = line.split_ascii_whitespace();
            let lhs = parse_lit(tok.next(), h.max_var, "AND output")?;
            let r0 = parse_lit(tok.next(), h.max_var, "AND input")?;
            let r1 = parse_lit(tok.next(), h.max_var, "AND input")?;
            if lhs < 2 || lhs & 1 == 1 {
                return Err(Error::BadBody(format!("invalid AND literal {lhs}")));
            }
            let v = (lhs / 2) as usize;
            if var_lit[v].is_some() || defs[v].is_some() {
                return Err(Error::BadBody(format!("variable {v} defined twice")));
            }
            defs[v] = Some((r0, r1));
            order.push(v);
        }
        let mut on_stack = vec![false; defs.len()];
        for &root in &order {
            let mut stack = vec![root];
            while let Some(&v) = stack.last() {
                if var_lit[v].is_some() {
                    stack.pop();
                    continue;
                }
                let (r0, r1) = defs[v].ok_or_else(|| Error::BadBody(format!("variable {v} has no definition")))?;
                on_stack[v] = true;
                let mut pending = false;
                for r in [r0, r1] {
                    let u = (r / 2) as usize;
                    if var_lit[u].is_none() {
                        if on_stack[u] {
                            return Err(Error::BadBody(format!("combinational cycle through variable {u}")));
                        }
                        stack.push(u);
                        pending = true;
                    }
                }
                if !pending {
                    let a = resolve(&var_lit, r0)?;
                    let b = resolve(&var_lit, r1)?;
                    var_lit[v] = Some(aig.add_and_raw(a, b));
                    on_stack[v] = false;
                    stack.pop();
                }
            }
        }
    }

    for lit in outputs {
        let l = resolve(&var_lit, lit)?;
        aig.add_output(l);
    }
    aig.sweep_dangling();
    Ok(aig)
}

/// Serialises the live part of the graph. Inputs keep their order, AND gates
/// are renumbered topologically, tombstones are dropped.
pub fn write_aiger(aig: &Aig, binary: bool) -> Vec<u8> {
    let order = aig.topo_order();
    let mut var: Vec<u64> = vec![0; aig.num_nodes()];
    for (k, &id) in aig.inputs().iter().enumerate() {
        var[id] = k as u64 + 1;
    }
    let first_and = aig.num_inputs() as u64 + 1;
    for (k, &id) in order.iter().enumerate() {
        var[id] = first_and + k as u64;
    }
    let map = |l: Lit| -> u64 { 2 * var[l.node()] + l.is_complemented() as u64 };

    let m = aig.num_inputs() + order.len();
    let mut out = Vec::new();
    let tag = if binary { "aig" } else { "aag" };
    out.extend_from_slice(
        format!("{tag} {m} {} 0 {} {}\n", aig.num_inputs(), aig.num_outputs(), order.len()).as_bytes(),
    );
    if !binary {
        for k in 0..aig.num_inputs() {
            out.extend_from_slice(format!("{}\n", 2 * (k + 1)).as_bytes());
        }
    }
    for &o in aig.outputs() {
        out.extend_from_slice(format!("{}\n", map(o)).as_bytes());
    }
    for &id in &order {
        let node = aig.node(id);
        let lhs = 2 * var[id as NodeId];
        let (mut r0, mut r1) = (map(node.fanin0()), map(node.fanin1()));
        if r0 < r1 {
            std::mem::swap(&mut r0, &mut r1);
        }
        if binary {
            write_varint(&mut out, lhs - r0);
            write_varint(&mut out, r0 - r1);
        } else {
            out.extend_from_slice(format!("{lhs} {r0} {r1}\n").as_bytes());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph() {
        let aig = parse_aiger(b"aag 0 0 0 0 0\n").unwrap();
        assert_eq!(aig.live_and_count(), 0);
        assert_eq!(aig.num_inputs(), 0);
        assert_eq!(write_aiger(&aig, false), b"aag 0 0 0 0 0\n");
    }

    #[test]
    fn single_and() {
        let aig = parse_aiger(b"aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n").unwrap();
        assert_eq!(aig.num_inputs(), 2);
        assert_eq!(aig.num_outputs(), 1);
        assert_eq!(aig.live_and_count(), 1);
        assert_eq!(write_aiger(&aig, false), b"aag 3 2 0 1 1\n2\n4\n6\n6 4 2\n");
    }

    #[test]
    fn ascii_out_of_order_gates() {
        // Gate 8 is declared before the gate 6 it reads.
        let aig = parse_aiger(b"aag 4 2 0 1 2\n2\n4\n9\n8 6 2\n6 2 5\n").unwrap();
        assert_eq!(aig.live_and_count(), 2);
        aig.check().unwrap();
    }

    #[test]
    fn duplicates_are_not_merged() {
        let aig = parse_aiger(b"aag 4 2 0 2 2\n2\n4\n6\n8\n6 2 4\n8 4 2\n").unwrap();
        assert_eq!(aig.live_and_count(), 2);
    }

    #[test]
    fn dangling_gates_are_swept() {
        let aig = parse_aiger(b"aag 4 2 0 1 2\n2\n4\n6\n6 2 4\n8 3 5\n").unwrap();
        assert_eq!(aig.live_and_count(), 1);
    }

    #[test]
    fn binary_roundtrip() {
        let src = b"aag 5 3 0 2 2\n2\n4\n6\n10\n9\n8 2 5\n10 8 7\n";
        let aig = parse_aiger(src).unwrap();
        let bin = write_aiger(&aig, true);
        assert!(bin.starts_with(b"aig 5 3 0 2 2\n"));
        let back = parse_aiger(&bin).unwrap();
        assert_eq!(write_aiger(&back, false), write_aiger(&aig, false));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_aiger(b""), Err(Error::BadHeader(_))));
        assert!(matches!(parse_aiger(b"aag 1 1\n"), Err(Error::BadHeader(_))));
        assert!(matches!(parse_aiger(b"xyz 0 0 0 0 0\n"), Err(Error::BadHeader(_))));
        assert!(matches!(parse_aiger(b"aag 2 1 1 0 0\n2\n4 2\n"), Err(Error::Sequential(1))));
        assert!(matches!(
            parse_aiger(b"aag 3 2 0 1 1\n2\n4\n6\n6 2 9\n"),
            Err(Error::LiteralOutOfRange { lit: 9, .. })
        ));
        assert!(matches!(parse_aiger(b"aig 3 2 0 1 1\n6\n\x02"), Err(Error::Truncated)));
        assert!(matches!(parse_aiger(b"aag 3 2 0 1 1\n2\n4\n6\n6 8 4\n"), Err(Error::LiteralOutOfRange { .. })));
        assert!(matches!(parse_aiger(b"aag 3 2 0 1 1\n2\n4\n6\n"), Err(Error::BadBody(_))));
        assert!(matches!(parse_aiger(b"aag 3 1 0 1 1\n2\n6\n6 2 4\n"), Err(Error::BadBody(_))));
    }

    #[test]
    fn comments_and_symbols_ignored() {
        let aig = parse_aiger(b"aag 3 2 0 1 1\n2\n4\n6\n6 2 4\ni0 a\no0 y\nc\nanything here\n").unwrap();
        assert_eq!(aig.live_and_count(), 1);
    }
}
