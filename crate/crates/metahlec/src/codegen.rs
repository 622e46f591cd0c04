//! Verification collateral rendered from a model instance: a C
//! assertion harness over the untimed algorithm, a SystemVerilog
//! wrapper binding the RTL to the reference, and runscripts for
//! external tools.
//!
//! All text is produced through a small substitution/loop template
//! engine whose templates live under `templates/` as plain data files,
//! so the file shapes can be edited without touching this module. The
//! expression-to-C rendering is width-exact: every value gets a
//! bit-precise typedef, and constructs C lacks (slices, concatenation,
//! extension) become cast-and-shift idioms over those typedefs.
//!
//! Generation is deterministic: the same instance, design and template
//! set produces byte-identical artifacts.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use indexmap::IndexMap;
use serde::Deserialize;
use thiserror::Error;

use crate::bmc::{assumptions, check_interface, typed_requirement, BmcError};
use crate::design::{CheckedAlg, CheckedRtl, Port};
use crate::expr::{
    parse_expr, pretty_expr, Expr, ExtendKind, Signedness, Ty, TypedExpr, TypedExprKind, UnaryOp,
};
use crate::model::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArtifactKind {
    CHarness,
    SvWrapper,
    Runscript,
}

/// One generated file. `content` always ends with a newline and is
/// free of tab characters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratedArtifact {
    pub kind: ArtifactKind,
    pub filename: String,
    pub content: String,
}

impl GeneratedArtifact {
    /// Runscripts carry the executable bit when written to disk.
    pub fn is_executable(&self) -> bool {
        self.kind == ArtifactKind::Runscript
    }
}

/// Which runscript to generate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunProfile {
    /// Invoke a C bounded model checker on the generated harness.
    AlgorithmCheck,
    /// Document the mapping for adaptation to a commercial HLEC tool.
    Hlec,
}

#[derive(Debug, Error)]
pub enum CodegenError {
    #[error(transparent)]
    Spec(#[from] BmcError),
    #[error("template `{name}`: {message}")]
    Template { name: String, message: String },
    #[error("mapping references `{port}` which the RTL does not expose")]
    PortMismatch { port: String },
    #[error("cannot render `{what}` in {target}")]
    Unsupported { what: String, target: &'static str },
    #[error("instance declares no {what}, which the {profile} runscript needs")]
    Incomplete { what: &'static str, profile: &'static str },
    #[error("reading template directory: {0}")]
    Io(#[from] std::io::Error),
    #[error("tools.toml: {0}")]
    Config(#[from] toml::de::Error),
}

// ---------------------------------------------------------------------------
// Tool configuration

/// Command line for one external tool, read from `tools.toml`.
#[derive(Clone, Debug, Deserialize, PartialEq, Eq)]
pub struct ToolCmd {
    pub tool: String,
    #[serde(default)]
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, Deserialize, PartialEq, Eq)]
pub struct ToolsConfig {
    pub algorithm_check: ToolCmd,
    pub hlec: ToolCmd,
}

// ---------------------------------------------------------------------------
// Template engine

/// A value a template can substitute or iterate over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Str(String),
    Bool(bool),
    List(Vec<Ctx>),
}

impl Value {
    fn truthy(&self) -> bool {
        match self {
            Value::Str(s) => !s.is_empty(),
            Value::Bool(b) => *b,
            Value::List(l) => !l.is_empty(),
        }
    }
}

pub type Ctx = IndexMap<String, Value>;

fn sv(v: impl Into<String>) -> Value {
    Value::Str(v.into())
}

#[derive(Debug)]
enum Node {
    Text(String),
    Var(String),
    Each(String, Vec<Node>),
    If(String, Vec<Node>),
}

/// Parses a template. `{{name}}` substitutes; `{{#each name}}` /
/// `{{#if name}}` open blocks closed by `{{/each}}` / `{{/if}}`. Block
/// tags must stand alone on their line; such lines produce no output
/// themselves.
fn parse_template(name: &str, src: &str) -> Result<Vec<Node>, CodegenError> {
    let err = |message: String| CodegenError::Template { name: name.to_string(), message };
    let mut stack: Vec<(String, Vec<Node>)> = Vec::new();
    let mut nodes: Vec<Node> = Vec::new();
    for (lineno, line) in src.split_inclusive('\n').enumerate() {
        let trimmed = line.trim();
        let standalone = trimmed.starts_with("{{#") || trimmed.starts_with("{{/");
        if standalone && trimmed.ends_with("}}") && !trimmed[2..].contains("{{") {
            let tag = &trimmed[2..trimmed.len() - 2];
            if let Some(key) = tag.strip_prefix("#each ") {
                stack.push((format!("each {}", key.trim()), std::mem::take(&mut nodes)));
            } else if let Some(key) = tag.strip_prefix("#if ") {
                stack.push((format!("if {}", key.trim()), std::mem::take(&mut nodes)));
            } else if tag == "/each" || tag == "/if" {
                let want = &tag[1..];
                let (header, outer) = stack
                    .pop()
                    .ok_or_else(|| err(format!("line {}: stray {{{{{tag}}}}}", lineno + 1)))?;
                let (kind, key) = header.split_once(' ').unwrap();
                if kind != want {
                    return Err(err(format!(
                        "line {}: {{{{{tag}}}}} closes a {kind} block",
                        lineno + 1
                    )));
                }
                let body = std::mem::replace(&mut nodes, outer);
                nodes.push(match want {
                    "each" => Node::Each(key.to_string(), body),
                    _ => Node::If(key.to_string(), body),
                });
            } else {
                return Err(err(format!("line {}: unknown tag {{{{{tag}}}}}", lineno + 1)));
            }
            continue;
        }
        // An ordinary line: split around {{name}} occurrences.
        let mut rest = line;
        while let Some(start) = rest.find("{{") {
            let Some(end) = rest[start..].find("}}") else {
                return Err(err(format!("line {}: unterminated {{{{", lineno + 1)));
            };
            if start > 0 {
                nodes.push(Node::Text(rest[..start].to_string()));
            }
            let key = rest[start + 2..start + end].trim();
            if key.starts_with('#') || key.starts_with('/') {
                return Err(err(format!(
                    "line {}: block tag {{{{{key}}}}} must stand alone on its line",
                    lineno + 1
                )));
            }
            nodes.push(Node::Var(key.to_string()));
            rest = &rest[start + end + 2..];
        }
        if !rest.is_empty() {
            nodes.push(Node::Text(rest.to_string()));
        }
    }
    if let Some((header, _)) = stack.pop() {
        return Err(err(format!("unclosed {{{{#{header}}}}}")));
    }
    Ok(nodes)
}

fn lookup<'a>(scopes: &[&'a Ctx], key: &str) -> Option<&'a Value> {
    scopes.iter().rev().find_map(|c| c.get(key))
}

fn render_nodes(
    name: &str,
    nodes: &[Node],
    scopes: &mut Vec<&Ctx>,
    out: &mut String,
) -> Result<(), CodegenError> {
    let err = |message: String| CodegenError::Template { name: name.to_string(), message };
    for node in nodes {
        match node {
            Node::Text(t) => out.push_str(t),
            Node::Var(key) => match lookup(scopes, key) {
                Some(Value::Str(s)) => out.push_str(s),
                Some(Value::Bool(b)) => out.push_str(if *b { "true" } else { "false" }),
                Some(Value::List(_)) => {
                    return Err(err(format!("`{key}` is a list, not a substitutable value")))
                }
                None => return Err(err(format!("no value for `{key}`"))),
            },
            Node::Each(key, body) => {
                let Some(value) = lookup(scopes, key) else {
                    return Err(err(format!("no value for `{key}`")));
                };
                let Value::List(items) = value else {
                    return Err(err(format!("`{key}` is not a list")));
                };
                for item in items {
                    scopes.push(item);
                    let r = render_nodes(name, body, scopes, out);
                    scopes.pop();
                    r?;
                }
            }
            Node::If(key, body) => {
                let Some(value) = lookup(scopes, key) else {
                    return Err(err(format!("no value for `{key}`")));
                };
                if value.truthy() {
                    render_nodes(name, body, scopes, out)?;
                }
            }
        }
    }
    Ok(())
}

/// Renders `src` against `ctx`. Every referenced key must be present;
/// a missing key is an error, not an empty substitution, so template
/// and generator drift is caught immediately.
pub fn render_template(name: &str, src: &str, ctx: &Ctx) -> Result<String, CodegenError> {
    let nodes = parse_template(name, src)?;
    let mut out = String::new();
    render_nodes(name, &nodes, &mut vec![ctx], &mut out)?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Template set

/// The four file-shape templates plus the external-tool configuration.
#[derive(Clone, Debug)]
pub struct Templates {
    pub c_harness: String,
    pub sv_wrapper: String,
    pub run_algorithm_check: String,
    pub run_hlec: String,
    pub tools: ToolsConfig,
}

impl Templates {
    /// The template set compiled into the crate.
    pub fn builtin() -> Templates {
        Templates {
            c_harness: include_str!("../templates/c_harness.c.tmpl").to_string(),
            sv_wrapper: include_str!("../templates/sv_wrapper.sv.tmpl").to_string(),
            run_algorithm_check: include_str!("../templates/run_algorithm_check.sh.tmpl")
                .to_string(),
            run_hlec: include_str!("../templates/run_hlec.sh.tmpl").to_string(),
            tools: toml::from_str(include_str!("../templates/tools.toml"))
                .expect("bundled tools.toml parses"),
        }
    }

    /// Loads the same five files from a directory, for template
    /// experiments without rebuilding.
    pub fn from_dir(dir: &Path) -> Result<Templates, CodegenError> {
        let read = |f: &str| std::fs::read_to_string(dir.join(f));
        Ok(Templates {
            c_harness: read("c_harness.c.tmpl")?,
            sv_wrapper: read("sv_wrapper.sv.tmpl")?,
            run_algorithm_check: read("run_algorithm_check.sh.tmpl")?,
            run_hlec: read("run_hlec.sh.tmpl")?,
            tools: toml::from_str(&read("tools.toml")?)?,
        })
    }
}

// ---------------------------------------------------------------------------
// Expression-to-C rendering

/// Renders typed expressions as C over bit-precise typedefs (`u7` for
/// `unsigned __CPROVER_bitvector[7]` and so on), collecting the set of
/// typedefs the emitted text needs.
///
/// Compound subexpressions are always parenthesized, so operator
/// precedence never matters. Constructs without a C spelling map to
/// width-exact idioms:
///
/// * `x[h:l]` becomes `(uK)(x >> l)` with `K = h-l+1` (a narrowing
///   cast truncates);
/// * `{a, b}` becomes `((uN)(a) << width(b)) | (uN)(b)`;
/// * `zext`/`sext` become widening casts, reinterpreting the operand
///   first when its signedness disagrees with the extension kind;
/// * `signed(x)` / `unsigned(x)` become same-width casts.
///
/// Bare decimal literals are emitted where a sibling operand fixes
/// their width, as in the source expression language; elsewhere they
/// get an explicit width cast.
struct CWriter {
    types: BTreeSet<(bool, u32)>,
}

impl CWriter {
    fn new() -> CWriter {
        CWriter { types: BTreeSet::new() }
    }

    /// Registers and names the typedef for `ty`.
    fn ty(&mut self, ty: Ty) -> String {
        self.types.insert((ty.is_signed(), ty.width));
        Self::ty_name(ty)
    }

    fn ty_name(ty: Ty) -> String {
        format!("{}{}", if ty.is_signed() { "s" } else { "u" }, ty.width)
    }

    /// Sorted typedef declarations for everything rendered so far.
    fn typedefs(&self) -> Vec<(Ty, String)> {
        self.types
            .iter()
            .map(|&(signed, width)| {
                let ty = if signed { Ty::signed(width) } else { Ty::unsigned(width) };
                (ty, Self::ty_name(ty))
            })
            .collect()
    }

    /// Top-level rendering: no enclosing parentheses.
    fn expr(&mut self, e: &TypedExpr) -> Result<String, CodegenError> {
        self.render(e, false)
    }

    /// Operand position: parenthesized unless atomic.
    fn operand(&mut self, e: &TypedExpr) -> Result<String, CodegenError> {
        let atomic = matches!(e.kind, TypedExprKind::Var(_) | TypedExprKind::Literal(_));
        let text = self.render(e, false)?;
        Ok(if atomic { text } else { format!("({text})") })
    }

    /// Like `operand`, but a literal here has no sibling to size it,
    /// so it gets an explicit width cast.
    fn sized_operand(&mut self, e: &TypedExpr) -> Result<String, CodegenError> {
        if let TypedExprKind::Literal(b) = &e.kind {
            let ty = self.ty(e.ty);
            return Ok(format!("({ty})({})", b.value()));
        }
        self.operand(e)
    }

    fn is_literal(e: &TypedExpr) -> bool {
        matches!(e.kind, TypedExprKind::Literal(_))
    }

    fn render(&mut self, e: &TypedExpr, _nested: bool) -> Result<String, CodegenError> {
        match &e.kind {
            TypedExprKind::Literal(b) => Ok(format!("{}", b.value())),
            TypedExprKind::Var(name) => Ok(name.clone()),
            TypedExprKind::Unary(op, a) => {
                let sym = match op {
                    UnaryOp::Neg => "-",
                    UnaryOp::BitNot => "~",
                    UnaryOp::LogNot => "!",
                    UnaryOp::RedOr => {
                        return Ok(format!("{} != 0", self.sized_operand(a)?));
                    }
                    UnaryOp::RedAnd => {
                        let ones = crate::expr::BitVec::ones(a.ty.width).value();
                        return Ok(format!("{} == {ones}", self.sized_operand(a)?));
                    }
                    UnaryOp::RedXor => {
                        return Err(CodegenError::Unsupported {
                            what: "a parity reduction".to_string(),
                            target: "C",
                        })
                    }
                };
                Ok(format!("{sym} {}", self.sized_operand(a)?))
            }
            TypedExprKind::Binary(op, a, b) => {
                let (ra, rb) = if op.is_shift() {
                    // The amount cannot size the shifted value.
                    (self.sized_operand(a)?, self.operand(b)?)
                } else if Self::is_literal(a) && Self::is_literal(b) {
                    (self.sized_operand(a)?, self.operand(b)?)
                } else {
                    (self.operand(a)?, self.operand(b)?)
                };
                Ok(format!("{ra} {} {rb}", op.symbol()))
            }
            TypedExprKind::Ite(c, t, f) => {
                let rc = self.sized_operand(c)?;
                let (rt, rf) = if Self::is_literal(t) && Self::is_literal(f) {
                    (self.sized_operand(t)?, self.operand(f)?)
                } else {
                    (self.operand(t)?, self.operand(f)?)
                };
                Ok(format!("{rc} ? {rt} : {rf}"))
            }
            TypedExprKind::Slice(a, _, lo) => {
                let k = self.ty(Ty::unsigned(e.ty.width));
                let inner = if *lo == 0 {
                    self.sized_operand(a)?
                } else {
                    format!("{} >> {lo}", self.sized_operand(a)?)
                };
                Ok(format!("({k})({inner})"))
            }
            TypedExprKind::Concat(parts) => {
                let total = self.ty(Ty::unsigned(e.ty.width));
                let mut shift: u32 = parts.iter().map(|p| p.ty.width).sum();
                let mut pieces = Vec::new();
                for p in parts {
                    shift -= p.ty.width;
                    let raw = if p.ty.is_signed() {
                        let m = self.ty(Ty::unsigned(p.ty.width));
                        format!("({m}){}", self.operand(p)?)
                    } else {
                        self.operand(p)?
                    };
                    if shift > 0 {
                        pieces.push(format!("(({total})({raw}) << {shift})"));
                    } else {
                        pieces.push(format!("({total})({raw})"));
                    }
                }
                Ok(pieces.join(" | "))
            }
            TypedExprKind::Extend(kind, a) => {
                let (want_in, wide) = match kind {
                    ExtendKind::Zero => (Signedness::Unsigned, Ty::unsigned(e.ty.width)),
                    ExtendKind::Sign => (Signedness::Signed, Ty::signed(e.ty.width)),
                };
                let mut inner = self.operand(a)?;
                if a.ty.sign != want_in {
                    let m = self.ty(Ty { width: a.ty.width, sign: want_in });
                    inner = format!("({m}){inner}");
                }
                let w = self.ty(wide);
                let mut text = format!("({w})({inner})");
                if e.ty.sign != wide.sign {
                    let t = self.ty(e.ty);
                    text = format!("({t})({text})");
                }
                Ok(text)
            }
            TypedExprKind::Cast(a) => {
                let t = self.ty(e.ty);
                Ok(format!("({t}){}", self.operand(a)?))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Artifact generators

/// Renders the C assertion harness: the algorithm as a function over
/// bit-precise types, and one guarded block of labelled
/// `__CPROVER_assert` calls per requirement.
pub fn gen_c_harness(
    alg: &CheckedAlg,
    instance: &Instance,
    templates: &Templates,
) -> Result<GeneratedArtifact, CodegenError> {
    check_interface(alg, instance)?;
    let mut w = CWriter::new();

    let mut locals = Vec::new();
    for (name, e) in &alg.locals {
        let mut item = Ctx::new();
        item.insert("ty".into(), sv(w.ty(e.ty)));
        item.insert("ident".into(), sv(name.clone()));
        item.insert("expr".into(), sv(w.expr(e)?));
        locals.push(item);
    }
    let mut results = Vec::new();
    for (port, e) in &alg.outputs {
        let mut item = Ctx::new();
        item.insert("ident".into(), sv(port.name.clone()));
        item.insert("expr".into(), sv(w.expr(e)?));
        results.push(item);
    }

    let assume = assumptions(instance)?
        .iter()
        .map(|(_, e)| w.operand(e))
        .collect::<Result<Vec<_>, _>>()?
        .join(" && ");

    let mut requirements = Vec::new();
    for (ri, req) in instance.requirements.iter().enumerate() {
        let (guard, conjs) = typed_requirement(instance, req)?;
        let mut asserts = Vec::new();
        for (ci, conj) in conjs.iter().enumerate() {
            let mut item = Ctx::new();
            item.insert("gap".into(), sv(if ci == 0 { "" } else { "\n" }));
            item.insert("expr".into(), sv(w.expr(conj)?));
            item.insert("label".into(), sv(req.label(ci, conjs.len())));
            asserts.push(item);
        }
        let mut item = Ctx::new();
        item.insert("gap".into(), sv(if ri == 0 { "" } else { "\n\n" }));
        item.insert("index".into(), sv(ri.to_string()));
        item.insert("req_name".into(), sv(req.name.clone()));
        item.insert("guard".into(), sv(w.expr(&guard)?));
        item.insert("asserts".into(), Value::List(asserts));
        requirements.push(item);
    }

    let port_ctx = |w: &mut CWriter, ports: &[Port]| -> Vec<Ctx> {
        ports
            .iter()
            .map(|p| {
                let mut item = Ctx::new();
                item.insert("ty".into(), sv(w.ty(p.ty)));
                item.insert("ident".into(), sv(p.name.clone()));
                item
            })
            .collect()
    };
    let inputs = port_ctx(&mut w, &alg.inputs);
    let out_ports: Vec<Port> = alg.outputs.iter().map(|(p, _)| p.clone()).collect();
    let outputs = port_ctx(&mut w, &out_ports);

    let mut params = Vec::new();
    for p in &alg.inputs {
        params.push(format!("{} {}", w.ty(p.ty), p.name));
    }
    for p in &out_ports {
        params.push(format!("{} *{}", w.ty(p.ty), p.name));
    }
    let signature = params.join(", ");
    let arguments = alg
        .inputs
        .iter()
        .map(|p| p.name.clone())
        .chain(out_ports.iter().map(|p| format!("&{}", p.name)))
        .collect::<Vec<_>>()
        .join(", ");

    let nondet: BTreeSet<String> = alg.inputs.iter().map(|p| CWriter::ty_name(p.ty)).collect();
    let nondet = nondet
        .into_iter()
        .map(|alias| {
            let mut item = Ctx::new();
            item.insert("alias".into(), sv(alias));
            item
        })
        .collect();

    let types = w
        .typedefs()
        .into_iter()
        .map(|(ty, alias)| {
            let mut item = Ctx::new();
            item.insert("c_sign".into(), sv(ty.sign.to_string()));
            item.insert("width".into(), sv(ty.width.to_string()));
            item.insert("alias".into(), sv(alias));
            item
        })
        .collect();

    let mut ctx = Ctx::new();
    ctx.insert("name".into(), sv(instance.name.clone()));
    ctx.insert("types".into(), Value::List(types));
    ctx.insert("nondet".into(), Value::List(nondet));
    ctx.insert("signature".into(), sv(signature));
    ctx.insert("arguments".into(), sv(arguments));
    ctx.insert("locals".into(), Value::List(locals));
    ctx.insert("results".into(), Value::List(results));
    ctx.insert("inputs".into(), Value::List(inputs));
    ctx.insert("outputs".into(), Value::List(outputs));
    ctx.insert("assume".into(), sv(assume));
    ctx.insert("requirements".into(), Value::List(requirements));

    Ok(GeneratedArtifact {
        kind: ArtifactKind::CHarness,
        filename: format!("{}_harness.c", instance.name),
        content: render_template("c_harness", &templates.c_harness, &ctx)?,
    })
}

fn rename_vars(e: &mut Expr, rename: &impl Fn(&str) -> Option<String>) {
    match e {
        Expr::Literal { .. } => {}
        Expr::Var(name) => {
            if let Some(new) = rename(name) {
                *name = new;
            }
        }
        Expr::Unary(_, a) | Expr::Slice(a, _, _) | Expr::Extend(_, a, _) | Expr::Cast(_, a) => {
            rename_vars(a, rename)
        }
        Expr::Binary(_, a, b) => {
            rename_vars(a, rename);
            rename_vars(b, rename);
        }
        Expr::Ite(c, t, o) => {
            rename_vars(c, rename);
            rename_vars(t, rename);
            rename_vars(o, rename);
        }
        Expr::Concat(parts) => {
            for p in parts {
                rename_vars(p, rename);
            }
        }
    }
}

/// Renders the SystemVerilog wrapper: the implementation instantiated
/// under its mapped ports, delays documented per port, requirement
/// properties as comments, and helpers as concurrent assertions.
pub fn gen_sv_wrapper(
    rtl: &CheckedRtl,
    instance: &Instance,
    templates: &Templates,
) -> Result<GeneratedArtifact, CodegenError> {
    let canon = |text: &str| -> Result<String, CodegenError> {
        let e = parse_expr(text).map_err(|err| {
            CodegenError::Spec(BmcError::Parse { context: "wrapper expression".to_string(), err })
        })?;
        Ok(pretty_expr(&e))
    };

    let known_port = |name: &str| {
        rtl.inputs
            .iter()
            .chain(rtl.outputs.iter().map(|(p, _)| p))
            .any(|p| p.name == name)
    };
    for m in &instance.mappings {
        if !known_port(&m.rtl) {
            return Err(CodegenError::PortMismatch { port: m.rtl.clone() });
        }
    }

    // One wrapper port per RTL port, in declaration order. A stream
    // mapping lands several algorithm ports on the same RTL pin at
    // different delays, so the schedule goes in the comment.
    let schedule = |rtl_name: &str| -> Vec<&crate::model::PortMap> {
        instance.mappings.iter().filter(|m| m.rtl == rtl_name).collect()
    };
    let inputs = rtl
        .inputs
        .iter()
        .filter(|p| p.name != rtl.clock && p.name != rtl.reset)
        .map(|p| (p, true));
    let outputs = rtl.outputs.iter().map(|(p, _)| (p, false));
    let port_list: Vec<(&Port, bool)> = inputs.chain(outputs).collect();

    let mut ports = Vec::new();
    let mut bindings = Vec::new();
    let n = port_list.len();
    for (i, (port, input)) in port_list.iter().enumerate() {
        let maps = schedule(&port.name);
        let note = if maps.is_empty() {
            if *input {
                "  // control input, driven directly by the checker".to_string()
            } else {
                "  // not sampled".to_string()
            }
        } else {
            let verb = if *input { "drives" } else { "sampled from" };
            let entries: Vec<String> =
                maps.iter().map(|m| format!("{} @ delay {}", m.alg, m.delay)).collect();
            format!("  // {verb} imp.{}: {}", port.name, entries.join(", "))
        };
        let width = port.ty.width;
        let range = if width > 1 { format!("[{}:0] ", width - 1) } else { String::new() };
        let last = i + 1 == n;
        let mut item = Ctx::new();
        item.insert("dir".into(), sv(if *input { "input " } else { "output" }));
        item.insert("range".into(), sv(range));
        item.insert("ident".into(), sv(port.name.clone()));
        item.insert("comma".into(), sv(if last { "" } else { "," }));
        item.insert("delay_note".into(), sv(note));
        ports.push(item);

        let mut item = Ctx::new();
        item.insert("ident".into(), sv(port.name.clone()));
        item.insert("comma".into(), sv(if last { "" } else { "," }));
        bindings.push(item);
    }

    let horizon = instance.mappings.iter().map(|m| m.delay).max().unwrap_or(0);
    let mut properties = Vec::new();
    for req in &instance.requirements {
        let guard = canon(&req.guard)?;
        let action = canon(&req.action)?;
        let mut item = Ctx::new();
        item.insert(
            "text".into(),
            sv(format!("{}: ({guard}) |-> ##{horizon} ({action})", req.name)),
        );
        properties.push(item);
    }

    // Helper and stalling expressions may reach into pipeline state.
    // Wrapper ports stay bare; anything else becomes a hierarchical
    // reference through the instance.
    let hier = |text: &str| -> Result<String, CodegenError> {
        let mut e = parse_expr(text).map_err(|err| {
            CodegenError::Spec(BmcError::Parse { context: "wrapper expression".to_string(), err })
        })?;
        rename_vars(&mut e, &|name| {
            if known_port(name) {
                None
            } else {
                Some(format!("imp.{name}"))
            }
        });
        Ok(pretty_expr(&e))
    };

    let reset_expr =
        if rtl.reset_active_high { rtl.reset.clone() } else { format!("!{}", rtl.reset) };
    let mut helpers = Vec::new();
    for h in &instance.helpers {
        let mut item = Ctx::new();
        item.insert("helper_name".into(), sv(h.name.clone()));
        item.insert("expr".into(), sv(hier(&h.expr)?));
        item.insert("reset_expr".into(), sv(reset_expr.clone()));
        helpers.push(item);
    }

    let mut ctx = Ctx::new();
    ctx.insert("name".into(), sv(instance.name.clone()));
    ctx.insert("imp_name".into(), sv(rtl.name.clone()));
    ctx.insert("clock".into(), sv(rtl.clock.clone()));
    ctx.insert("reset".into(), sv(rtl.reset.clone()));
    ctx.insert("ports".into(), Value::List(ports));
    ctx.insert("bindings".into(), Value::List(bindings));
    ctx.insert("properties".into(), Value::List(properties));
    ctx.insert(
        "condition".into(),
        sv(instance.condition.as_ref().map(|c| canon(&c.expr)).transpose()?.unwrap_or_default()),
    );
    ctx.insert(
        "stalling".into(),
        sv(instance.stalling.as_ref().map(|c| hier(&c.expr)).transpose()?.unwrap_or_default()),
    );
    ctx.insert("helpers".into(), Value::List(helpers));

    Ok(GeneratedArtifact {
        kind: ArtifactKind::SvWrapper,
        filename: format!("{}_wrapper.sv", instance.name),
        content: render_template("sv_wrapper", &templates.sv_wrapper, &ctx)?,
    })
}

/// Renders one runscript. The `AlgorithmCheck` profile invokes the
/// configured C model checker on the generated harness; the `Hlec`
/// profile documents the mapping as a key=value block for adaptation
/// to a commercial tool.
pub fn gen_runscript(
    instance: &Instance,
    profile: RunProfile,
    templates: &Templates,
) -> Result<GeneratedArtifact, CodegenError> {
    let (template_name, template, cmd, filename) = match profile {
        RunProfile::AlgorithmCheck => (
            "run_algorithm_check",
            &templates.run_algorithm_check,
            &templates.tools.algorithm_check,
            "run_algorithm_check.sh",
        ),
        RunProfile::Hlec => ("run_hlec", &templates.run_hlec, &templates.tools.hlec, "run_hlec.sh"),
    };

    let mut ctx = Ctx::new();
    ctx.insert("name".into(), sv(instance.name.clone()));
    ctx.insert("tool".into(), sv(cmd.tool.clone()));
    let mut flags = String::new();
    for f in &cmd.flags {
        write!(flags, " \"{f}\"").unwrap();
    }
    ctx.insert("flags".into(), sv(flags));

    match profile {
        RunProfile::AlgorithmCheck => {
            ctx.insert("harness".into(), sv(format!("{}_harness.c", instance.name)));
            ctx.insert("entry".into(), sv(format!("{}_harness", instance.name)));
        }
        RunProfile::Hlec => {
            let clock = instance.clock.as_ref().ok_or(CodegenError::Incomplete {
                what: "clock",
                profile: "hlec",
            })?;
            let reset = instance.reset.as_ref().ok_or(CodegenError::Incomplete {
                what: "reset",
                profile: "hlec",
            })?;
            ctx.insert("spec_name".into(), sv(format!("{}_alg", instance.name)));
            ctx.insert("imp_name".into(), sv(instance.name.clone()));
            ctx.insert("clock".into(), sv(clock.rtl.clone()));
            ctx.insert("reset".into(), sv(reset.rtl.clone()));
            ctx.insert("reset_active_high".into(), sv(reset.active_high.to_string()));

            let is_input = |alg: &str| instance.inputs.iter().any(|p| p.name == alg);
            let width = |alg: &str| {
                instance
                    .inputs
                    .iter()
                    .chain(&instance.outputs)
                    .find(|p| p.name == alg)
                    .map(|p| p.width)
                    .unwrap_or(0)
            };
            let ports = instance
                .mappings
                .iter()
                .map(|m| {
                    let dir = if is_input(&m.alg) { "input" } else { "output" };
                    let mut item = Ctx::new();
                    item.insert(
                        "line".into(),
                        sv(format!(
                            "{dir} {} -> {} delay={} width={}",
                            m.alg,
                            m.rtl,
                            m.delay,
                            width(&m.alg)
                        )),
                    );
                    item
                })
                .collect();
            ctx.insert("ports".into(), Value::List(ports));
            ctx.insert(
                "condition".into(),
                sv(instance.condition.as_ref().map(|c| c.expr.clone()).unwrap_or_default()),
            );
            ctx.insert(
                "stalling".into(),
                sv(instance.stalling.as_ref().map(|c| c.expr.clone()).unwrap_or_default()),
            );
            let named = |list: &[crate::model::NamedExpr]| {
                Value::List(
                    list.iter()
                        .map(|x| {
                            let mut item = Ctx::new();
                            item.insert("ident".into(), sv(x.name.clone()));
                            item.insert("expr".into(), sv(x.expr.clone()));
                            item
                        })
                        .collect(),
                )
            };
            ctx.insert("constraints".into(), named(&instance.constraints));
            ctx.insert("helpers".into(), named(&instance.helpers));
        }
    }

    Ok(GeneratedArtifact {
        kind: ArtifactKind::Runscript,
        filename: filename.to_string(),
        content: render_template(template_name, template, &ctx)?,
    })
}

/// Everything `gen` emits for one design: harness, wrapper, and both
/// runscripts, in that order.
pub fn gen_all(
    alg: &CheckedAlg,
    rtl: &CheckedRtl,
    instance: &Instance,
    templates: &Templates,
) -> Result<Vec<GeneratedArtifact>, CodegenError> {
    Ok(vec![
        gen_c_harness(alg, instance, templates)?,
        gen_sv_wrapper(rtl, instance, templates)?,
        gen_runscript(instance, RunProfile::AlgorithmCheck, templates)?,
        gen_runscript(instance, RunProfile::Hlec, templates)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{mk_design, Selector};

    fn ctx(pairs: &[(&str, Value)]) -> Ctx {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn engine_substitutes_and_iterates() {
        let t = "hello {{who}}\n{{#each items}}\n- {{it}}{{suffix}}\n{{/each}}\ndone\n";
        let items = Value::List(vec![
            ctx(&[("it", sv("a"))]),
            ctx(&[("it", sv("b")), ("suffix", sv("!"))]),
        ]);
        let c = ctx(&[("who", sv("world")), ("suffix", sv("")), ("items", items)]);
        let out = render_template("t", t, &c).unwrap();
        assert_eq!(out, "hello world\n- a\n- b!\ndone\n");
    }

    #[test]
    fn engine_skips_false_branches_and_rejects_unknown_keys() {
        let t = "{{#if flag}}\nyes {{missing}}\n{{/if}}\nend\n";
        let c = ctx(&[("flag", Value::Bool(false))]);
        assert_eq!(render_template("t", t, &c).unwrap(), "end\n");

        let c = ctx(&[("flag", Value::Bool(true))]);
        let err = render_template("t", t, &c).unwrap_err();
        assert!(err.to_string().contains("no value for `missing`"), "{err}");
    }

    #[test]
    fn engine_reports_block_errors() {
        let unclosed = render_template("t", "{{#each xs}}\n", &ctx(&[])).unwrap_err();
        assert!(unclosed.to_string().contains("unclosed"), "{unclosed}");
        let crossed = render_template("t", "{{#if a}}\n{{/each}}\n", &ctx(&[])).unwrap_err();
        assert!(crossed.to_string().contains("closes a"), "{crossed}");
        let inline = render_template("t", "x {{#if a}} y\n", &ctx(&[])).unwrap_err();
        assert!(inline.to_string().contains("stand alone"), "{inline}");
    }

    fn strip_ws(s: &str) -> String {
        s.chars().filter(|c| !c.is_whitespace()).collect()
    }

    #[test]
    fn divider_harness_reproduces_the_reference_requirement_blocks() {
        let b = mk_design(&Selector::parse("divider:w=16").unwrap()).unwrap();
        let a = gen_c_harness(&b.alg, &b.instance, &Templates::builtin()).unwrap();
        let blocks = concat!(
            "//Requirement 0: Division by zero\n",
            "if((b_i == 0)){\n",
            "__CPROVER_assert((divide_by_0_o == 1), \"Flag set\");\n",
            "\n",
            "__CPROVER_assert(((~ quotient_o) == 0), \"Division by zero\");\n",
            "}\n",
            "\n",
            "\n",
            "//Requirement 1: Divisor not 0\n",
            "if((b_i != 0)){\n",
            "__CPROVER_assert((divide_by_0_o == 0), \"Flag clear\");\n",
            "\n",
            "__CPROVER_assert((quotient_o == (a_i / b_i)), \"Quotient\");\n",
            "}\n",
        );
        assert!(a.content.contains(blocks), "harness:\n{}", a.content);
        assert!(strip_ws(&a.content).contains(&strip_ws(blocks)));
    }

    #[test]
    fn divider_wrapper_documents_the_quotient_delay() {
        let b = mk_design(&Selector::parse("divider:w=16").unwrap()).unwrap();
        let a = gen_sv_wrapper(&b.rtl, &b.instance, &Templates::builtin()).unwrap();
        assert!(a.content.contains("sampled from imp.quotient_o: quotient_o @ delay 17"), "{}", a.content);
        assert!(a.content.contains("divider_w16 imp ("));
    }

    #[test]
    fn harness_without_requirements_has_no_asserts() {
        let b = mk_design(&Selector::parse("divider:w=4").unwrap()).unwrap();
        let mut instance = b.instance.clone();
        instance.requirements.clear();
        let a = gen_c_harness(&b.alg, &instance, &Templates::builtin()).unwrap();
        assert!(!a.content.contains("__CPROVER_assert"));
        assert!(a.content.contains("divider_w4_harness(void)"));
    }

    #[test]
    fn runscripts_carry_tool_and_mapping_details() {
        let b = mk_design(&Selector::parse("enable_pipe").unwrap()).unwrap();
        let t = Templates::builtin();
        let alg = gen_runscript(&b.instance, RunProfile::AlgorithmCheck, &t).unwrap();
        assert!(alg.is_executable());
        assert!(alg.content.contains("TOOL=\"cbmc\""));
        assert!(alg.content.contains("enable_pipe_w8_harness.c"));

        let ec = gen_runscript(&b.instance, RunProfile::Hlec, &t).unwrap();
        assert!(ec.content.contains("# spec_name=enable_pipe_w8_alg"));
        assert!(ec.content.contains("# imp_name=enable_pipe_w8"));
        assert!(ec.content.contains("# input x_i -> x_in delay=0 width=8"));
        assert!(ec.content.contains("# stalling=en_i == 0"));
        assert!(ec.content.contains("# helper result_bounded=s2_y <= 8'd201"));
    }

    #[test]
    fn hlec_runscript_requires_clock_and_reset() {
        let b = mk_design(&Selector::parse("divider:w=4").unwrap()).unwrap();
        let mut instance = b.instance.clone();
        instance.clock = None;
        let err = gen_runscript(&instance, RunProfile::Hlec, &Templates::builtin()).unwrap_err();
        assert!(err.to_string().contains("no clock"), "{err}");
    }

    #[test]
    fn wrapper_rejects_unknown_rtl_ports() {
        let b = mk_design(&Selector::parse("divider:w=4").unwrap()).unwrap();
        let mut instance = b.instance.clone();
        instance.mappings[0].rtl = "phantom_i".to_string();
        let err = gen_sv_wrapper(&b.rtl, &instance, &Templates::builtin()).unwrap_err();
        assert!(matches!(err, CodegenError::PortMismatch { ref port } if port == "phantom_i"));
    }

    #[test]
    fn artifacts_are_newline_terminated_and_tab_free() {
        let t = Templates::builtin();
        for sel in Selector::CANONICAL {
            let b = mk_design(&Selector::parse(sel).unwrap()).unwrap();
            for a in gen_all(&b.alg, &b.rtl, &b.instance, &t).unwrap() {
                assert!(a.content.ends_with('\n'), "{sel}/{}", a.filename);
                assert!(!a.content.contains('\t'), "{sel}/{}", a.filename);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let b = mk_design(&Selector::parse("minifloat_mul").unwrap()).unwrap();
        let t = Templates::builtin();
        let one = gen_all(&b.alg, &b.rtl, &b.instance, &t).unwrap();
        let two = gen_all(&b.alg, &b.rtl, &b.instance, &t).unwrap();
        assert_eq!(one, two);
    }
}
