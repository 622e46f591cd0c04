//! Line-oriented text form for algorithm and RTL sources.
//!
//! This is the on-disk format `gen` writes and `verify-*` read back:
//!
//! ```text
//! alg divider_w4
//! input a_i : u4
//! input b_i : u4
//! output quotient_o : u4 = b_i == 0 ? 4'd15 : a_i / b_i
//! output divide_by_0_o : u1 = b_i == 0
//! ```
//!
//! ```text
//! rtl accum
//! clock clk_i
//! reset rst_i active_high
//! input x_in : u8
//! reg acc : u8 reset 8'd0 next = acc + x_in
//! output y_o : u8 = acc
//! ```
//!
//! One declaration per line; expressions run to the end of the line.
//! Blank lines and `#` comments are ignored. Types are `u<width>` or
//! `s<width>`. `write_*` and `parse_*` round-trip exactly.

use thiserror::Error;

use crate::expr::{BitVec, Signedness, Ty, MAX_WIDTH};

use super::{AlgSpec, Port, RegSpec, RtlSpec};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct TextError {
    pub line: usize,
    pub message: String,
}

impl TextError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        TextError { line, message: message.into() }
    }
}

fn parse_ty(line: usize, text: &str) -> Result<Ty, TextError> {
    let text = text.trim();
    let (sign, digits) = match text.split_at_checked(1) {
        Some(("u", d)) => (Signedness::Unsigned, d),
        Some(("s", d)) => (Signedness::Signed, d),
        _ => return Err(TextError::new(line, format!("bad type `{text}`, expected u<w> or s<w>"))),
    };
    let width: u32 = digits
        .parse()
        .map_err(|_| TextError::new(line, format!("bad type `{text}`, expected u<w> or s<w>")))?;
    if !(1..=MAX_WIDTH).contains(&width) {
        return Err(TextError::new(line, format!("type width {width} outside 1..={MAX_WIDTH}")));
    }
    Ok(Ty { width, sign })
}

fn show_ty(ty: Ty) -> String {
    let s = match ty.sign {
        Signedness::Unsigned => "u",
        Signedness::Signed => "s",
    };
    format!("{s}{}", ty.width)
}

/// Parses `name : type` into a port.
fn parse_port(line: usize, text: &str) -> Result<Port, TextError> {
    let (name, ty) = text
        .split_once(':')
        .ok_or_else(|| TextError::new(line, format!("expected `name : type`, got `{text}`")))?;
    let name = name.trim();
    if name.is_empty() {
        return Err(TextError::new(line, "empty signal name"));
    }
    Ok(Port::new(name, parse_ty(line, ty)?))
}

/// Parses a sized literal `w'dNNN` as written by `write_rtl` for reset
/// values.
fn parse_reset(line: usize, text: &str) -> Result<BitVec, TextError> {
    let text = text.trim();
    let bad = || TextError::new(line, format!("bad reset value `{text}`, expected like 8'd0"));
    let (w, v) = text.split_once("'d").ok_or_else(bad)?;
    let width: u32 = w.parse().map_err(|_| bad())?;
    let value: u128 = v.parse().map_err(|_| bad())?;
    if !(1..=MAX_WIDTH).contains(&width) {
        return Err(bad());
    }
    if width < MAX_WIDTH && value >> width != 0 {
        return Err(TextError::new(line, format!("reset value {value} does not fit {width} bits")));
    }
    Ok(BitVec::new(width, value))
}

/// Meaningful lines with their 1-based numbers; comments and blanks
/// dropped.
fn lines(src: &str) -> impl Iterator<Item = (usize, &str)> {
    src.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_alg(src: &str) -> Result<AlgSpec, TextError> {
    let mut it = lines(src);
    let (line, header) = it.next().ok_or_else(|| TextError::new(1, "empty file"))?;
    let name = header
        .strip_prefix("alg ")
        .ok_or_else(|| TextError::new(line, "expected `alg <name>` header"))?
        .trim()
        .to_string();
    let mut spec = AlgSpec { name, inputs: Vec::new(), locals: Vec::new(), outputs: Vec::new() };
    for (line, text) in it {
        if let Some(rest) = text.strip_prefix("input ") {
            spec.inputs.push(parse_port(line, rest)?);
        } else if let Some(rest) = text.strip_prefix("let ") {
            let (name, expr) = rest.split_once('=').ok_or_else(|| {
                TextError::new(line, "expected `let <name> = <expr>`")
            })?;
            spec.locals.push((name.trim().to_string(), expr.trim().to_string()));
        } else if let Some(rest) = text.strip_prefix("output ") {
            let (decl, expr) = rest.split_once('=').ok_or_else(|| {
                TextError::new(line, "expected `output <name> : <type> = <expr>`")
            })?;
            spec.outputs.push((parse_port(line, decl)?, expr.trim().to_string()));
        } else {
            return Err(TextError::new(line, format!("unrecognized line `{text}`")));
        }
    }
    Ok(spec)
}

pub fn write_alg(spec: &AlgSpec) -> String {
    let mut out = format!("alg {}\n", spec.name);
    for p in &spec.inputs {
        out.push_str(&format!("input {} : {}\n", p.name, show_ty(p.ty)));
    }
    for (name, expr) in &spec.locals {
        out.push_str(&format!("let {name} = {expr}\n"));
    }
    for (p, expr) in &spec.outputs {
        out.push_str(&format!("output {} : {} = {}\n", p.name, show_ty(p.ty), expr));
    }
    out
}

pub fn parse_rtl(src: &str) -> Result<RtlSpec, TextError> {
    let mut it = lines(src);
    let (line, header) = it.next().ok_or_else(|| TextError::new(1, "empty file"))?;
    let name = header
        .strip_prefix("rtl ")
        .ok_or_else(|| TextError::new(line, "expected `rtl <name>` header"))?
        .trim()
        .to_string();
    let mut spec = RtlSpec {
        name,
        clock: String::new(),
        reset: String::new(),
        reset_active_high: true,
        inputs: Vec::new(),
        regs: Vec::new(),
        outputs: Vec::new(),
    };
    for (line, text) in it {
        if let Some(rest) = text.strip_prefix("clock ") {
            spec.clock = rest.trim().to_string();
        } else if let Some(rest) = text.strip_prefix("reset ") {
            let mut parts = rest.split_whitespace();
            spec.reset = parts
                .next()
                .ok_or_else(|| TextError::new(line, "expected `reset <name> active_high|active_low`"))?
                .to_string();
            spec.reset_active_high = match parts.next() {
                Some("active_high") | None => true,
                Some("active_low") => false,
                Some(other) => {
                    return Err(TextError::new(line, format!("bad reset polarity `{other}`")))
                }
            };
        } else if let Some(rest) = text.strip_prefix("input ") {
            spec.inputs.push(parse_port(line, rest)?);
        } else if let Some(rest) = text.strip_prefix("reg ") {
            // reg <name> : <type> reset <value> next = <expr>
            let (decl, tail) = rest.split_once(" reset ").ok_or_else(|| {
                TextError::new(line, "expected `reg <name> : <type> reset <value> next = <expr>`")
            })?;
            let port = parse_port(line, decl)?;
            let (value, next) = tail.split_once(" next").ok_or_else(|| {
                TextError::new(line, "register is missing its `next = <expr>` part")
            })?;
            let next = next.trim().strip_prefix('=').ok_or_else(|| {
                TextError::new(line, "expected `=` after `next`")
            })?;
            let reset = parse_reset(line, value)?;
            if reset.width() != port.ty.width {
                return Err(TextError::new(
                    line,
                    format!(
                        "reset value is {} bits, register `{}` is {} bits",
                        reset.width(),
                        port.name,
                        port.ty.width
                    ),
                ));
            }
            spec.regs.push(RegSpec {
                name: port.name,
                ty: port.ty,
                reset,
                next: next.trim().to_string(),
            });
        } else if let Some(rest) = text.strip_prefix("output ") {
            let (decl, expr) = rest.split_once('=').ok_or_else(|| {
                TextError::new(line, "expected `output <name> : <type> = <expr>`")
            })?;
            spec.outputs.push((parse_port(line, decl)?, expr.trim().to_string()));
        } else {
            return Err(TextError::new(line, format!("unrecognized line `{text}`")));
        }
    }
    if spec.clock.is_empty() {
        return Err(TextError::new(1, "missing `clock` declaration"));
    }
    if spec.reset.is_empty() {
        return Err(TextError::new(1, "missing `reset` declaration"));
    }
    Ok(spec)
}

pub fn write_rtl(spec: &RtlSpec) -> String {
    let mut out = format!("rtl {}\n", spec.name);
    out.push_str(&format!("clock {}\n", spec.clock));
    let polarity = if spec.reset_active_high { "active_high" } else { "active_low" };
    out.push_str(&format!("reset {} {}\n", spec.reset, polarity));
    for p in &spec.inputs {
        out.push_str(&format!("input {} : {}\n", p.name, show_ty(p.ty)));
    }
    for r in &spec.regs {
        out.push_str(&format!(
            "reg {} : {} reset {:?} next = {}\n",
            r.name,
            show_ty(r.ty),
            r.reset,
            r.next
        ));
    }
    for (p, expr) in &spec.outputs {
        out.push_str(&format!("output {} : {} = {}\n", p.name, show_ty(p.ty), expr));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{mk_design, Selector};
    use super::*;

    #[test]
    fn alg_round_trips() {
        let src = "\
alg demo
input a : u8
input b : s4
let t = a + zext(b, 8)
output y : u8 = t * 8'd2
";
        let spec = parse_alg(src).unwrap();
        assert_eq!(spec.name, "demo");
        assert_eq!(spec.inputs.len(), 2);
        assert_eq!(spec.inputs[1].ty, Ty::signed(4));
        assert_eq!(spec.locals, vec![("t".to_string(), "a + zext(b, 8)".to_string())]);
        assert_eq!(write_alg(&spec), src);
    }

    #[test]
    fn rtl_round_trips() {
        let src = "\
rtl accum
clock clk_i
reset rst_i active_high
input x_in : u8
reg acc : u8 reset 8'd0 next = acc + x_in
output y_o : u8 = acc
";
        let spec = parse_rtl(src).unwrap();
        assert_eq!(spec.clock, "clk_i");
        assert!(spec.reset_active_high);
        assert_eq!(spec.regs[0].next, "acc + x_in");
        assert_eq!(write_rtl(&spec), src);
    }

    #[test]
    fn comments_and_blank_lines_skipped() {
        let src = "\
# a demo algorithm

alg c
input a : u4

# the only output
output y : u4 = a
";
        let spec = parse_alg(src).unwrap();
        assert_eq!(spec.outputs.len(), 1);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_alg("alg x\ninput a u8\n").unwrap_err();
        assert_eq!(err.line, 2);
        let err = parse_alg("alg x\nbogus line\n").unwrap_err();
        assert_eq!(err.line, 2);
        let err = parse_rtl("rtl x\nclock c\nreset r sideways\n").unwrap_err();
        assert_eq!(err.line, 3);
        let err = parse_rtl("rtl x\nclock c\nreset r\nreg a : u8 reset 4'd0 next = a\n")
            .unwrap_err();
        assert_eq!(err.line, 4);
        assert!(err.message.contains("4 bits"));
    }

    #[test]
    fn missing_clock_or_reset_rejected() {
        let err = parse_rtl("rtl x\nreset r active_high\n").unwrap_err();
        assert!(err.message.contains("clock"));
        let err = parse_rtl("rtl x\nclock c\n").unwrap_err();
        assert!(err.message.contains("reset"));
    }

    #[test]
    fn bundled_designs_round_trip() {
        for sel in ["divider:w=4", "fir:n=2,w=4", "enable_pipe"] {
            let bundle = mk_design(&Selector::parse(sel).unwrap()).unwrap();
            let alg = parse_alg(&write_alg(&bundle.alg_src)).unwrap();
            assert_eq!(alg, bundle.alg_src, "{sel} alg");
            let rtl = parse_rtl(&write_rtl(&bundle.rtl_src)).unwrap();
            assert_eq!(rtl, bundle.rtl_src, "{sel} rtl");
        }
    }
}
