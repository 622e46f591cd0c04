//! The verification metamodel and its XML form.
//!
//! An [`Instance`] captures everything the two verification phases
//! need beyond the design pair itself: the untimed interface, the
//! guard/action requirements checked against the algorithm, the
//! port-to-port mappings with their pipeline delays, clock and reset
//! binding, and the optional refinements (condition, stalling,
//! constraints, helpers).
//!
//! Instances serialize to a small XML dialect with a `metahlec` root
//! element. Parsing is strict: unknown elements or attributes are
//! errors, and every diagnostic carries the element path (for example
//! `metahlec/requirement[2]`) so a hand-edited file can be fixed
//! without guesswork. Expressions stay as text here; they are parsed
//! and typed on use.

use std::fmt::Write as _;

use thiserror::Error;

use crate::expr::{conjuncts, parse_expr, ParseError, Ty, TypeEnv};

pub const SCHEMA_VERSION: &str = "1";

/// One metamodel instance: the root `metahlec` element.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Instance {
    pub name: String,
    pub inputs: Vec<PortDecl>,
    pub outputs: Vec<PortDecl>,
    pub clock: Option<ClockSpec>,
    pub reset: Option<ResetSpec>,
    pub mappings: Vec<PortMap>,
    pub requirements: Vec<Requirement>,
    pub condition: Option<NamedExpr>,
    pub stalling: Option<NamedExpr>,
    pub constraints: Vec<NamedExpr>,
    pub helpers: Vec<NamedExpr>,
}

/// An untimed interface port of the algorithm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortDecl {
    pub name: String,
    pub width: u32,
    pub signed: bool,
}

impl PortDecl {
    pub fn ty(&self) -> Ty {
        if self.signed {
            Ty::signed(self.width)
        } else {
            Ty::unsigned(self.width)
        }
    }
}

/// A guard/action requirement: whenever `guard` holds on a
/// transaction, every conjunct of `action` must hold. `labels` names
/// the conjuncts one by one for assertion reporting; an empty list
/// means default labels derived from the requirement name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Requirement {
    pub name: String,
    pub guard: String,
    pub action: String,
    pub labels: Vec<String>,
}

impl Requirement {
    /// Label for conjunct `i` out of `n`, falling back to the
    /// requirement name when no explicit labels were given.
    pub fn label(&self, i: usize, n: usize) -> String {
        if let Some(l) = self.labels.get(i) {
            return l.clone();
        }
        if n == 1 {
            self.name.clone()
        } else {
            format!("{} {}", self.name, i + 1)
        }
    }
}

/// Binds an algorithm port to an RTL port with a pipeline delay in
/// clock cycles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortMap {
    pub alg: String,
    pub rtl: String,
    pub delay: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClockSpec {
    pub rtl: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResetSpec {
    pub rtl: String,
    pub active_high: bool,
}

/// A named expression used by the condition, stalling, constraint and
/// helper elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedExpr {
    pub name: String,
    pub expr: String,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("not well-formed XML: {0}")]
    Xml(#[from] roxmltree::Error),
    #[error("expected root element `metahlec`, found `{0}`")]
    BadRoot(String),
    #[error("unsupported schema_version `{0}` (this reader understands {SCHEMA_VERSION})")]
    UnsupportedVersion(String),
    #[error("{path}: unknown element")]
    UnknownElement { path: String },
    #[error("{path}: unknown attribute `{attr}`")]
    UnknownAttr { path: String, attr: String },
    #[error("{path}: missing attribute `{attr}`")]
    MissingAttr { path: String, attr: &'static str },
    #[error("{path}: attribute `{attr}` has invalid value `{value}`: {reason}")]
    BadAttr { path: String, attr: &'static str, value: String, reason: String },
    #[error("{path}: more than one `{element}` element")]
    Repeated { path: String, element: &'static str },
    #[error("{path}: duplicate name `{name}`")]
    DuplicateName { path: String, name: String },
    #[error("{path}: `{name}` does not match any declared port")]
    UnknownPort { path: String, name: String },
    #[error("{path}: duplicate mapping for rtl port `{rtl}` at delay {delay}")]
    DuplicateMapping { path: String, rtl: String, delay: u32 },
    #[error("{path}: attribute `{attr}` does not parse: {err}")]
    BadExpr { path: String, attr: &'static str, err: ParseError },
    #[error("{path}: {got} labels for {expected} action conjuncts")]
    LabelCount { path: String, expected: usize, got: usize },
}

/// The type environment a requirement is checked in: every declared
/// input and output port at its declared type.
pub fn interface_env(instance: &Instance) -> TypeEnv {
    instance
        .inputs
        .iter()
        .chain(&instance.outputs)
        .map(|p| (p.name.clone(), p.ty()))
        .collect()
}

/// The environment for transaction-level side conditions (condition
/// and constraint elements): input ports only.
pub fn input_env(instance: &Instance) -> TypeEnv {
    instance.inputs.iter().map(|p| (p.name.clone(), p.ty())).collect()
}

// ---------------------------------------------------------------------------
// Reading

struct ElementReader<'a, 'input> {
    node: roxmltree::Node<'a, 'input>,
    path: String,
}

impl ElementReader<'_, '_> {
    fn check_attrs(&self, allowed: &[&str]) -> Result<(), ModelError> {
        for a in self.node.attributes() {
            if !allowed.contains(&a.name()) {
                return Err(ModelError::UnknownAttr {
                    path: self.path.clone(),
                    attr: a.name().to_string(),
                });
            }
        }
        Ok(())
    }

    fn required(&self, attr: &'static str) -> Result<&str, ModelError> {
        self.node
            .attribute(attr)
            .ok_or_else(|| ModelError::MissingAttr { path: self.path.clone(), attr })
    }

    fn bad(&self, attr: &'static str, value: &str, reason: impl Into<String>) -> ModelError {
        ModelError::BadAttr {
            path: self.path.clone(),
            attr,
            value: value.to_string(),
            reason: reason.into(),
        }
    }

    fn width(&self) -> Result<u32, ModelError> {
        let raw = self.required("width")?;
        let w: u32 = raw.parse().map_err(|_| self.bad("width", raw, "not a number"))?;
        if !(1..=128).contains(&w) {
            return Err(self.bad("width", raw, "width must be between 1 and 128"));
        }
        Ok(w)
    }

    fn flag(&self, attr: &'static str, default: bool) -> Result<bool, ModelError> {
        match self.node.attribute(attr) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(other) => Err(self.bad(attr, other, "expected `true` or `false`")),
        }
    }

    fn delay(&self) -> Result<u32, ModelError> {
        let raw = self.required("delay")?;
        raw.parse().map_err(|_| self.bad("delay", raw, "not a number"))
    }

    fn named_expr(&self) -> Result<NamedExpr, ModelError> {
        self.check_attrs(&["name", "expr"])?;
        Ok(NamedExpr {
            name: self.required("name")?.to_string(),
            expr: self.required("expr")?.to_string(),
        })
    }
}

/// Parses an instance from XML and runs the structural checks.
pub fn parse_instance(text: &str) -> Result<Instance, ModelError> {
    let doc = roxmltree::Document::parse(text)?;
    let root = doc.root_element();
    if root.tag_name().name() != "metahlec" {
        return Err(ModelError::BadRoot(root.tag_name().name().to_string()));
    }
    let reader = ElementReader { node: root, path: "metahlec".to_string() };
    reader.check_attrs(&["name", "schema_version"])?;
    let version = reader.required("schema_version")?;
    if version != SCHEMA_VERSION {
        return Err(ModelError::UnsupportedVersion(version.to_string()));
    }

    let mut instance = Instance { name: reader.required("name")?.to_string(), ..Default::default() };
    let mut counts: std::collections::HashMap<&str, usize> = std::collections::HashMap::new();

    for child in root.children().filter(|c| c.is_element()) {
        let tag = child.tag_name().name();
        let n = counts.entry(tag).or_insert(0);
        *n += 1;
        let path = format!("metahlec/{tag}[{n}]");
        let el = ElementReader { node: child, path };
        match tag {
            "input" | "output" => {
                el.check_attrs(&["name", "width", "signed"])?;
                let decl = PortDecl {
                    name: el.required("name")?.to_string(),
                    width: el.width()?,
                    signed: el.flag("signed", false)?,
                };
                if tag == "input" {
                    instance.inputs.push(decl);
                } else {
                    instance.outputs.push(decl);
                }
            }
            "clock" => {
                el.check_attrs(&["rtl"])?;
                let spec = ClockSpec { rtl: el.required("rtl")?.to_string() };
                if instance.clock.replace(spec).is_some() {
                    return Err(ModelError::Repeated { path: el.path, element: "clock" });
                }
            }
            "reset" => {
                el.check_attrs(&["rtl", "active_high"])?;
                let spec = ResetSpec {
                    rtl: el.required("rtl")?.to_string(),
                    active_high: el.flag("active_high", true)?,
                };
                if instance.reset.replace(spec).is_some() {
                    return Err(ModelError::Repeated { path: el.path, element: "reset" });
                }
            }
            "mapping" => {
                el.check_attrs(&["alg", "rtl", "delay"])?;
                instance.mappings.push(PortMap {
                    alg: el.required("alg")?.to_string(),
                    rtl: el.required("rtl")?.to_string(),
                    delay: el.delay()?,
                });
            }
            "requirement" => {
                el.check_attrs(&["name", "guard", "action", "labels"])?;
                let labels = match el.node.attribute("labels") {
                    None => Vec::new(),
                    Some(raw) => raw.split(';').map(|s| s.trim().to_string()).collect(),
                };
                instance.requirements.push(Requirement {
                    name: el.required("name")?.to_string(),
                    guard: el.required("guard")?.to_string(),
                    action: el.required("action")?.to_string(),
                    labels,
                });
            }
            "condition" => {
                let e = el.named_expr()?;
                if instance.condition.replace(e).is_some() {
                    return Err(ModelError::Repeated { path: el.path, element: "condition" });
                }
            }
            "stalling" => {
                let e = el.named_expr()?;
                if instance.stalling.replace(e).is_some() {
                    return Err(ModelError::Repeated { path: el.path, element: "stalling" });
                }
            }
            "constraint" => instance.constraints.push(el.named_expr()?),
            "helper" => instance.helpers.push(el.named_expr()?),
            _ => return Err(ModelError::UnknownElement { path: el.path }),
        }
    }

    validate_instance(&instance)?;
    Ok(instance)
}

/// Structural validation: unique names, mappings that refer to
/// declared ports, expressions that parse, label counts that match
/// the action conjuncts. Type checking happens later, against a
/// design pair.
pub fn validate_instance(instance: &Instance) -> Result<(), ModelError> {
    let mut port_names = std::collections::HashSet::new();
    for (i, p) in instance.inputs.iter().enumerate() {
        if !port_names.insert(&p.name) {
            return Err(ModelError::DuplicateName {
                path: format!("metahlec/input[{}]", i + 1),
                name: p.name.clone(),
            });
        }
    }
    for (i, p) in instance.outputs.iter().enumerate() {
        if !port_names.insert(&p.name) {
            return Err(ModelError::DuplicateName {
                path: format!("metahlec/output[{}]", i + 1),
                name: p.name.clone(),
            });
        }
    }

    let mut seen_alg = std::collections::HashSet::new();
    let mut seen_in = std::collections::HashSet::new();
    let mut seen_out = std::collections::HashSet::new();
    for (i, m) in instance.mappings.iter().enumerate() {
        let path = format!("metahlec/mapping[{}]", i + 1);
        let is_input = instance.inputs.iter().any(|p| p.name == m.alg);
        let is_output = instance.outputs.iter().any(|p| p.name == m.alg);
        if !is_input && !is_output {
            return Err(ModelError::UnknownPort { path, name: m.alg.clone() });
        }
        if !seen_alg.insert(&m.alg) {
            return Err(ModelError::DuplicateName { path, name: m.alg.clone() });
        }
        // A stream design may feed one RTL input from several delayed
        // views of the transaction, so input mappings are only unique
        // per (rtl, delay) pair. Output mappings are unique per port.
        if is_input {
            if !seen_in.insert((&m.rtl, m.delay)) {
                return Err(ModelError::DuplicateMapping {
                    path,
                    rtl: m.rtl.clone(),
                    delay: m.delay,
                });
            }
        } else if !seen_out.insert(&m.rtl) {
            return Err(ModelError::DuplicateMapping { path, rtl: m.rtl.clone(), delay: m.delay });
        }
    }

    let mut req_names = std::collections::HashSet::new();
    for (i, r) in instance.requirements.iter().enumerate() {
        let path = format!("metahlec/requirement[{}]", i + 1);
        if !req_names.insert(&r.name) {
            return Err(ModelError::DuplicateName { path, name: r.name.clone() });
        }
        parse_expr(&r.guard).map_err(|err| ModelError::BadExpr {
            path: path.clone(),
            attr: "guard",
            err,
        })?;
        let action = parse_expr(&r.action).map_err(|err| ModelError::BadExpr {
            path: path.clone(),
            attr: "action",
            err,
        })?;
        let n = conjuncts(&action).len();
        if !r.labels.is_empty() && r.labels.len() != n {
            return Err(ModelError::LabelCount { path, expected: n, got: r.labels.len() });
        }
    }

    for (named, path) in instance
        .condition
        .iter()
        .map(|e| (e, "metahlec/condition[1]".to_string()))
        .chain(instance.stalling.iter().map(|e| (e, "metahlec/stalling[1]".to_string())))
        .chain(
            instance
                .constraints
                .iter()
                .enumerate()
                .map(|(i, e)| (e, format!("metahlec/constraint[{}]", i + 1))),
        )
        .chain(
            instance
                .helpers
                .iter()
                .enumerate()
                .map(|(i, e)| (e, format!("metahlec/helper[{}]", i + 1))),
        )
    {
        parse_expr(&named.expr).map_err(|err| ModelError::BadExpr {
            path,
            attr: "expr",
            err,
        })?;
    }

    Ok(())
}

// ---------------------------------------------------------------------------
// Writing

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Serializes an instance. Element order is fixed so equal instances
/// produce byte-identical files.
pub fn write_instance(instance: &Instance) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "<metahlec name=\"{}\" schema_version=\"{SCHEMA_VERSION}\">",
        escape(&instance.name)
    )
    .unwrap();
    for p in &instance.inputs {
        write_port(&mut out, "input", p);
    }
    for p in &instance.outputs {
        write_port(&mut out, "output", p);
    }
    if let Some(c) = &instance.clock {
        writeln!(out, "  <clock rtl=\"{}\"/>", escape(&c.rtl)).unwrap();
    }
    if let Some(r) = &instance.reset {
        writeln!(out, "  <reset rtl=\"{}\" active_high=\"{}\"/>", escape(&r.rtl), r.active_high)
            .unwrap();
    }
    for m in &instance.mappings {
        writeln!(
            out,
            "  <mapping alg=\"{}\" rtl=\"{}\" delay=\"{}\"/>",
            escape(&m.alg),
            escape(&m.rtl),
            m.delay
        )
        .unwrap();
    }
    for r in &instance.requirements {
        let mut line = format!(
            "  <requirement name=\"{}\" guard=\"{}\" action=\"{}\"",
            escape(&r.name),
            escape(&r.guard),
            escape(&r.action)
        );
        if !r.labels.is_empty() {
            write!(line, " labels=\"{}\"", escape(&r.labels.join("; "))).unwrap();
        }
        line.push_str("/>");
        out.push_str(&line);
        out.push('\n');
    }
    if let Some(c) = &instance.condition {
        write_named(&mut out, "condition", c);
    }
    if let Some(s) = &instance.stalling {
        write_named(&mut out, "stalling", s);
    }
    for c in &instance.constraints {
        write_named(&mut out, "constraint", c);
    }
    for h in &instance.helpers {
        write_named(&mut out, "helper", h);
    }
    out.push_str("</metahlec>\n");
    out
}

fn write_port(out: &mut String, tag: &str, p: &PortDecl) {
    let mut line = format!("  <{tag} name=\"{}\" width=\"{}\"", escape(&p.name), p.width);
    if p.signed {
        line.push_str(" signed=\"true\"");
    }
    line.push_str("/>");
    out.push_str(&line);
    out.push('\n');
}

fn write_named(out: &mut String, tag: &str, e: &NamedExpr) {
    writeln!(out, "  <{tag} name=\"{}\" expr=\"{}\"/>", escape(&e.name), escape(&e.expr)).unwrap();
}
