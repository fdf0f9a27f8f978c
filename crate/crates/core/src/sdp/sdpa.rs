//! SDPA sparse format (`.dat-s`).

use std::io::{self, Write};

use thiserror::Error;

use super::{SdpBlock, SdpStandard};

#[derive(Debug, Error)]
pub enum SdpaError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("unexpected end of input: {0}")]
    Truncated(&'static str),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// C-style `%.17g`.
pub fn fmt_g17(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    const P: i32 = 17;
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (_, exp) = sci.split_once('e').unwrap();
    let x: i32 = exp.parse().unwrap();
    if (-4..P).contains(&x) {
        let fixed = format!("{:.*}", (P - 1 - x) as usize, v);
        strip_zeros(&fixed).to_string()
    } else {
        let (mant, _) = sci.split_once('e').unwrap();
        let sign = if x < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_zeros(mant), x.abs())
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn export_sdpa(sdp: &SdpStandard, sink: &mut impl Write) -> io::Result<()> {
    writeln!(sink, "{}", sdp.num_vars)?;
    writeln!(sink, "{}", sdp.blocks.len())?;
    let sizes: Vec<String> =
        sdp.blocks.iter().map(|b| if b.diagonal { format!("-{}", b.size) } else { b.size.to_string() }).collect();
    writeln!(sink, "{}", sizes.join(" "))?;
    let costs: Vec<String> = sdp.cost.iter().map(|&c| fmt_g17(c)).collect();
    writeln!(sink, "{}", costs.join(" "))?;
    for k in 0..=sdp.num_vars {
        for (b, block) in sdp.blocks.iter().enumerate() {
            let mat = if k == 0 { Some(&block.constant) } else { block.coeffs.get(&(k - 1)) };
            for (&(i, j), &v) in mat.into_iter().flatten() {
                if v != 0.0 {
                    writeln!(sink, "{k} {} {} {} {}", b + 1, i + 1, j + 1, fmt_g17(v))?;
                }
            }
        }
    }
    writeln!(sink, "*offset {}", fmt_g17(sdp.offset))?;
    Ok(())
}

pub fn to_sdpa_string(sdp: &SdpStandard) -> String {
    let mut buf = Vec::new();
    export_sdpa(sdp, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Reads SDPA sparse input. Comment lines start with `*` or `"`; the
/// characters `{}(),` are treated as blanks. An `*offset v` comment sets
/// the objective offset.
pub fn import_sdpa(source: &str) -> Result<SdpStandard, SdpaError> {
    let mut offset = 0.0;
    let mut lines = Vec::new();
    for (n, raw) in source.lines().enumerate() {
        let line = n + 1;
        let t = raw.trim();
        if let Some(rest) = t.strip_prefix("*offset") {
            offset = parse_f(rest.trim(), line)?;
            continue;
        }
        if t.is_empty() || t.starts_with('*') || t.starts_with('"') {
            continue;
        }
        let cleaned: String = t.chars().map(|c| if "{}(),".contains(c) { ' ' } else { c }).collect();
        let toks: Vec<String> = cleaned.split_whitespace().map(str::to_string).collect();
        if !toks.is_empty() {
            lines.push((line, toks));
        }
    }
    let mut it = lines.into_iter();
    let (l, t) = it.next().ok_or(SdpaError::Truncated("variable count"))?;
    let m = parse_u(&t[0], l)?;
    let (l, t) = it.next().ok_or(SdpaError::Truncated("block count"))?;
    let nblocks = parse_u(&t[0], l)?;
    let (l, t) = it.next().ok_or(SdpaError::Truncated("block sizes"))?;
    if t.len() < nblocks {
        return Err(SdpaError::Malformed { line: l, msg: format!("expected {nblocks} block sizes") });
    }
    let mut blocks = Vec::with_capacity(nblocks);
    for tok in &t[..nblocks] {
        let v: i64 = tok.parse().map_err(|_| SdpaError::Malformed { line: l, msg: format!("bad block size '{tok}'") })?;
        if v == 0 {
            return Err(SdpaError::Malformed { line: l, msg: "zero block size".into() });
        }
        blocks.push(SdpBlock::new(v.unsigned_abs() as usize, v < 0));
    }
    let mut cost = Vec::with_capacity(m);
    while cost.len() < m {
        let (l, t) = it.next().ok_or(SdpaError::Truncated("cost vector"))?;
        for tok in &t {
            cost.push(parse_f(tok, l)?);
        }
    }
    if cost.len() != m {
        return Err(SdpaError::Malformed { line: 4, msg: format!("{} costs for {m} variables", cost.len()) });
    }
    for (l, t) in it {
        if t.len() != 5 {
            return Err(SdpaError::Malformed { line: l, msg: format!("expected 5 fields, found {}", t.len()) });
        }
        let k = parse_u(&t[0], l)?;
        let b = parse_u(&t[1], l)?;
        let i = parse_u(&t[2], l)?;
        let j = parse_u(&t[3], l)?;
        let v = parse_f(&t[4], l)?;
        let bad = |msg: String| SdpaError::Malformed { line: l, msg };
        if k > m {
            return Err(bad(format!("matrix index {k} above {m}")));
        }
        let block = blocks.get_mut(b.wrapping_sub(1)).ok_or_else(|| bad(format!("block {b} out of range")))?;
        if i == 0 || j == 0 || i > block.size || j > block.size {
            return Err(bad(format!("entry ({i}, {j}) outside block {b}")));
        }
        if block.diagonal && i != j {
            return Err(bad(format!("off-diagonal entry in diagonal block {b}")));
        }
        let (i, j) = (i.min(j) - 1, i.max(j) - 1);
        let var = if k == 0 { None } else { Some(k - 1) };
        let target = match var {
            None => &mut block.constant,
            Some(k) => block.coeffs.entry(k).or_default(),
        };
        target.insert((i, j), v);
    }
    Ok(SdpStandard { num_vars: m, blocks, cost, offset })
}

fn parse_u(tok: &str, line: usize) -> Result<usize, SdpaError> {
    tok.parse().map_err(|_| SdpaError::Malformed { line, msg: format!("expected an integer, found '{tok}'") })
}

fn parse_f(tok: &str, line: usize) -> Result<f64, SdpaError> {
    tok.parse().map_err(|_| SdpaError::Malformed { line, msg: format!("expected a number, found '{tok}'") })
}
