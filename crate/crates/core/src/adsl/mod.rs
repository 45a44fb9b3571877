//! Architecture specifications: components, ensembles, beyond-control
//! entities, periodic assignments, strategy, AM interface and initial states.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use thiserror::Error;

use crate::fcdsl::lexer::{lex, Tok, Token};
use crate::fcdsl::parser::Parser;
use crate::fcdsl::{ParseError, Pos};
use crate::fcl::{write_string, Component, Env, Expr, Formula, Snapshot, Value, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AttributeDef {
    pub id: String,
    pub display: Option<String>,
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ComponentDef {
    pub kind: String,
    pub display: Option<String>,
    pub description: Option<String>,
    pub attributes: Vec<AttributeDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EnsembleDef {
    pub id: String,
    /// Name used for the group in prompts and AM responses.
    pub group: String,
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeyondControl {
    pub kind: String,
    pub accessor: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub kind: String,
    pub label: String,
    /// Predicate over the component's attributes, written with bare names.
    pub filter: Option<Formula>,
    pub ensembles: Vec<String>,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmInterface {
    pub class: String,
    pub module: String,
    pub base: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    pub name: String,
    pub seed: u64,
    pub params: BTreeMap<String, f64>,
}

impl InitialState {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ArchitectureSpec {
    pub components: Vec<ComponentDef>,
    pub ensembles: Vec<EnsembleDef>,
    pub beyond_control: Vec<BeyondControl>,
    pub assignments: Vec<Assignment>,
    pub strategy: Option<String>,
    pub am_interface: Option<AmInterface>,
    pub initial_states: Vec<InitialState>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("ensemble `{0}` is declared twice")]
    DuplicateEnsemble(String),
    #[error("component type `{0}` is declared twice")]
    DuplicateComponent(String),
    #[error("assignment `{method}` uses undeclared ensemble `{ensemble}`")]
    UnknownEnsemble { method: String, ensemble: String },
    #[error("assignment `{method}` assigns undeclared component type `{kind}`")]
    UnknownAssignedType { method: String, kind: String },
    #[error("beyond-control `{accessor}` has undeclared type `{kind}`")]
    UnknownBeyondType { accessor: String, kind: String },
    #[error("assignment `{method}` maps group `{group}` to more than one ensemble")]
    AmbiguousGroup { method: String, group: String },
    #[error("`{0}` is not a valid identifier")]
    BadIdentifier(String),
    #[error("assignment method `{0}` is declared twice")]
    DuplicateMethod(String),
    #[error("initial state `{0}` is declared twice")]
    DuplicateInitialState(String),
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl ArchitectureSpec {
    pub fn component(&self, kind: &str) -> Option<&ComponentDef> {
        self.components.iter().find(|c| c.kind == kind)
    }

    pub fn ensemble(&self, id: &str) -> Option<&EnsembleDef> {
        self.ensembles.iter().find(|e| e.id == id)
    }

    pub fn assignment(&self, method: &str) -> Option<&Assignment> {
        self.assignments.iter().find(|a| a.method == method)
    }

    pub fn initial_state(&self, name: &str) -> Option<&InitialState> {
        self.initial_states.iter().find(|s| s.name == name)
    }

    /// Group ids accepted by an assignment, in declaration order.
    pub fn group_ids(&self, a: &Assignment) -> Vec<String> {
        a.ensembles
            .iter()
            .filter_map(|e| self.ensemble(e))
            .map(|e| e.group.clone())
            .collect()
    }

    /// Ensemble an assignment's group id stands for.
    pub fn ensemble_for_group(&self, a: &Assignment, group: &str) -> Option<&str> {
        a.ensembles
            .iter()
            .filter_map(|e| self.ensemble(e))
            .find(|e| e.group == group)
            .map(|e| e.id.as_str())
    }

    pub fn vocabulary(&self) -> Vocabulary {
        let mut v = Vocabulary::new();
        for e in &self.ensembles {
            v.add_ensemble(e.id.clone());
        }
        for c in &self.components {
            v.add_component_type(c.kind.clone());
        }
        v
    }

    pub fn attribute_names(&self) -> BTreeSet<String> {
        self.components
            .iter()
            .flat_map(|c| c.attributes.iter().map(|a| a.id.clone()))
            .collect()
    }

    pub fn validate(&self) -> Result<(), Vec<SpecError>> {
        let mut errors = Vec::new();
        let mut seen = BTreeSet::new();
        for e in &self.ensembles {
            if !seen.insert(e.id.as_str()) {
                errors.push(SpecError::DuplicateEnsemble(e.id.clone()));
            }
        }
        let mut kinds = BTreeSet::new();
        for c in &self.components {
            if !kinds.insert(c.kind.as_str()) {
                errors.push(SpecError::DuplicateComponent(c.kind.clone()));
            }
        }
        let mut methods = BTreeSet::new();
        for a in &self.assignments {
            if !methods.insert(a.method.as_str()) {
                errors.push(SpecError::DuplicateMethod(a.method.clone()));
            }
            if !is_identifier(&a.method) {
                errors.push(SpecError::BadIdentifier(a.method.clone()));
            }
            if self.component(&a.kind).is_none() {
                errors.push(SpecError::UnknownAssignedType {
                    method: a.method.clone(),
                    kind: a.kind.clone(),
                });
            }
            let mut groups = BTreeSet::new();
            for e in &a.ensembles {
                match self.ensemble(e) {
                    None => errors.push(SpecError::UnknownEnsemble {
                        method: a.method.clone(),
                        ensemble: e.clone(),
                    }),
                    Some(def) => {
                        if !groups.insert(def.group.as_str()) {
                            errors.push(SpecError::AmbiguousGroup {
                                method: a.method.clone(),
                                group: def.group.clone(),
                            });
                        }
                    }
                }
            }
        }
        for b in &self.beyond_control {
            if self.component(&b.kind).is_none() {
                errors.push(SpecError::UnknownBeyondType {
                    accessor: b.accessor.clone(),
                    kind: b.kind.clone(),
                });
            }
            if !is_identifier(&b.accessor) {
                errors.push(SpecError::BadIdentifier(b.accessor.clone()));
            }
        }
        if let Some(am) = &self.am_interface {
            for id in [&am.class, &am.module, &am.base] {
                if !is_identifier(id) {
                    errors.push(SpecError::BadIdentifier(id.clone()));
                }
            }
        }
        let mut states = BTreeSet::new();
        for s in &self.initial_states {
            if !states.insert(s.name.as_str()) {
                errors.push(SpecError::DuplicateInitialState(s.name.clone()));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }
}

impl Assignment {
    /// Whether a component belongs to this assignment's domain.
    pub fn admits(&self, id: &str, component: &Component) -> bool {
        if component.kind != self.kind {
            return false;
        }
        let Some(filter) = &self.filter else {
            return true;
        };
        let bound = bind_attributes(filter);
        let mut snapshot = Snapshot::new(0);
        snapshot.components.insert(id.to_string(), component.clone());
        let env: Env = vec![("self".to_string(), Value::Comp(id.to_string()))];
        crate::fcl::eval_state(&bound, &snapshot, &env, &[], &Vocabulary::new(), None).unwrap_or(false)
    }
}

/// Rewrites bare names in a filter into attribute reads on `self`.
fn bind_attributes(f: &Formula) -> Formula {
    fn expr(e: &Expr) -> Expr {
        match e {
            Expr::Var(name) => Expr::Attr(Box::new(Expr::Var("self".into())), name.clone()),
            Expr::Attr(b, a) => Expr::Attr(Box::new(expr(b)), a.clone()),
            Expr::Arith(op, a, b) => Expr::Arith(*op, Box::new(expr(a)), Box::new(expr(b))),
            other => other.clone(),
        }
    }
    match f {
        Formula::Cmp(a, op, b) => Formula::Cmp(expr(a), *op, expr(b)),
        Formula::In(e, s) => Formula::In(expr(e), s.clone()),
        Formula::Not(a) => Formula::not(bind_attributes(a)),
        Formula::And(a, b) => Formula::and(bind_attributes(a), bind_attributes(b)),
        Formula::Or(a, b) => Formula::or(bind_attributes(a), bind_attributes(b)),
        Formula::Implies(a, b) => Formula::implies(bind_attributes(a), bind_attributes(b)),
        other => other.clone(),
    }
}

// ---------------------------------------------------------------------------
// parsing

struct Cursor<'t> {
    toks: &'t [Token],
    at: usize,
}

type PResult<T> = Result<T, ParseError>;

fn err(pos: Pos, message: impl Into<String>, expected: Option<&str>) -> ParseError {
    ParseError {
        pos,
        message: message.into(),
        expected: expected.map(str::to_string),
    }
}

impl<'t> Cursor<'t> {
    fn peek(&self) -> &'t Token {
        &self.toks[self.at]
    }

    fn bump(&mut self) -> &'t Token {
        let t = &self.toks[self.at];
        if self.at < self.toks.len() - 1 {
            self.at += 1;
        }
        t
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let t = self.peek();
        err(t.pos, format!("unexpected {}", t.tok), Some(expected))
    }

    fn kw(&mut self, kw: &str) -> PResult<()> {
        if self.at_kw(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn sym(&mut self, sym: &str) -> PResult<()> {
        if self.peek().tok == Tok::Sym(leak_sym(sym)) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{sym}`")))
        }
    }

    fn opt_sym(&mut self, sym: &str) -> bool {
        if self.peek().tok == Tok::Sym(leak_sym(sym)) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn string(&mut self, what: &str) -> PResult<String> {
        match &self.peek().tok {
            Tok::Str(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    /// A quoted string or a bare word.
    fn text(&mut self, what: &str) -> PResult<String> {
        match &self.peek().tok {
            Tok::Str(_) => self.string(what),
            Tok::Ident(_) => self.ident(what),
            _ => Err(self.unexpected(what)),
        }
    }

    fn end_of_line(&self) -> PResult<()> {
        if self.peek().line_start {
            Ok(())
        } else {
            Err(self.unexpected("a line break"))
        }
    }

    /// Property lines (`name`, `description`) indented deeper than `col`.
    fn nested(&self, col: usize) -> bool {
        let t = self.peek();
        t.line_start && t.tok != Tok::Eof && t.pos.col > col
    }
}

fn leak_sym(sym: &str) -> &'static str {
    match sym {
        ":" => ":",
        "(" => "(",
        ")" => ")",
        "[" => "[",
        "]" => "]",
        "," => ",",
        "." => ".",
        "-" => "-",
        other => panic!("unsupported symbol {other}"),
    }
}

fn number(c: &mut Cursor<'_>) -> PResult<f64> {
    let negative = c.opt_sym("-");
    let v = match c.peek().tok {
        Tok::Int(k) => k as f64,
        Tok::Real(x) => x,
        _ => return Err(c.unexpected("a number")),
    };
    c.bump();
    Ok(if negative { -v } else { v })
}

pub fn parse_adsl(text: &str) -> Result<ArchitectureSpec, ParseError> {
    let toks = lex(text, 1)?;
    let mut c = Cursor { toks: &toks, at: 0 };
    let mut spec = ArchitectureSpec::default();
    while c.peek().tok != Tok::Eof {
        let head = c.peek();
        if !head.line_start || head.pos.col != 1 {
            return Err(c.unexpected("a declaration at the start of a line"));
        }
        let word = match &head.tok {
            Tok::Ident(s) => s.clone(),
            _ => return Err(c.unexpected("a declaration keyword")),
        };
        match word.as_str() {
            "component" => spec.components.push(component(&mut c)?),
            "ensemble" => spec.ensembles.push(ensemble(&mut c)?),
            "beyond" => spec.beyond_control.push(beyond(&mut c)?),
            "periodically" => spec.assignments.push(assignment(&mut c)?),
            "strategy" => {
                c.bump();
                c.sym(":")?;
                spec.strategy = Some(c.string("the strategy text")?);
                c.end_of_line()?;
            }
            "am_interface" => {
                c.bump();
                let class = c.ident("the AM class name")?;
                c.sym("(")?;
                let module = c.ident("a module name")?;
                c.sym(".")?;
                let base = c.ident("a base class name")?;
                c.sym(")")?;
                c.end_of_line()?;
                spec.am_interface = Some(AmInterface {
                    class,
                    module,
                    base,
                });
            }
            "initial" => spec.initial_states.push(initial_state(&mut c)?),
            _ => return Err(c.unexpected("`component`, `ensemble`, `beyond-control`, `periodically`, `strategy:`, `am_interface` or `initial state`")),
        }
    }
    Ok(spec)
}

fn component(c: &mut Cursor<'_>) -> PResult<ComponentDef> {
    let col = c.peek().pos.col;
    c.kw("component")?;
    let mut def = ComponentDef {
        kind: c.ident("a component type")?,
        ..Default::default()
    };
    c.end_of_line()?;
    while c.nested(col) {
        if c.at_kw("attribute") {
            let attr_col = c.peek().pos.col;
            c.bump();
            let mut attr = AttributeDef {
                id: c.ident("an attribute name")?,
                ..Default::default()
            };
            c.end_of_line()?;
            while c.nested(attr_col) {
                property(c, &mut attr.display, &mut attr.description)?;
            }
            def.attributes.push(attr);
        } else {
            property(c, &mut def.display, &mut def.description)?;
        }
    }
    Ok(def)
}

fn property(c: &mut Cursor<'_>, display: &mut Option<String>, description: &mut Option<String>) -> PResult<()> {
    let slot = if c.at_kw("name") {
        display
    } else if c.at_kw("description") {
        description
    } else {
        return Err(c.unexpected("`name` or `description`"));
    };
    c.bump();
    c.opt_sym(":");
    *slot = Some(c.text("a quoted text")?);
    c.end_of_line()
}

fn ensemble(c: &mut Cursor<'_>) -> PResult<EnsembleDef> {
    let col = c.peek().pos.col;
    let pos = c.peek().pos;
    c.kw("ensemble")?;
    let id = c.ident("an ensemble id")?;
    c.end_of_line()?;
    let mut group = None;
    let mut description = None;
    while c.nested(col) {
        property(c, &mut group, &mut description)?;
    }
    let group = group.ok_or_else(|| err(pos, format!("ensemble `{id}` has no group name"), Some("a `name` line")))?;
    Ok(EnsembleDef {
        id,
        group,
        description,
    })
}

fn beyond(c: &mut Cursor<'_>) -> PResult<BeyondControl> {
    c.kw("beyond")?;
    c.sym("-")?;
    c.kw("control")?;
    let kind = c.ident("a component type")?;
    let accessor = c.ident("an accessor name")?;
    let description = c.string("a quoted description")?;
    c.end_of_line()?;
    Ok(BeyondControl {
        kind,
        accessor,
        description,
    })
}

fn assignment(c: &mut Cursor<'_>) -> PResult<Assignment> {
    c.kw("periodically")?;
    c.kw("assign")?;
    let kind = c.ident("a component type")?;
    c.sym("[")?;
    c.sym("]")?;
    let label = c.string("a quoted label")?;
    c.end_of_line()?;
    let mut filter = None;
    if c.at_kw("if") {
        c.bump();
        let line = c.peek().pos.line;
        let start = c.at;
        while c.peek().tok != Tok::Eof && c.peek().pos.line == line {
            c.bump();
        }
        let mut part: Vec<Token> = c.toks[start..c.at].to_vec();
        part.push(Token {
            tok: Tok::Eof,
            pos: c.peek().pos,
            line_start: true,
        });
        let mut p = Parser::new(&part);
        let f = p.formula()?;
        if !p.at_end() {
            return Err(p.error("end of filter"));
        }
        filter = Some(f);
    }
    c.kw("into")?;
    c.kw("ensembles")?;
    let mut ensembles = vec![c.ident("an ensemble id")?];
    while c.opt_sym(",") {
        ensembles.push(c.ident("an ensemble id")?);
    }
    c.end_of_line()?;
    c.kw("as")?;
    let method = c.ident("a method name")?;
    c.end_of_line()?;
    Ok(Assignment {
        kind,
        label,
        filter,
        ensembles,
        method,
    })
}

fn initial_state(c: &mut Cursor<'_>) -> PResult<InitialState> {
    let col = c.peek().pos.col;
    let pos = c.peek().pos;
    c.kw("initial")?;
    c.kw("state")?;
    let name = c.string("a quoted state name")?;
    c.end_of_line()?;
    let mut seed = None;
    let mut params = BTreeMap::new();
    while c.nested(col) {
        let key_pos = c.peek().pos;
        let key = c.ident("a parameter name")?;
        c.sym(":")?;
        let value = number(c)?;
        c.end_of_line()?;
        if key == "random_seed" {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(err(key_pos, "random_seed must be a non-negative integer", None));
            }
            seed = Some(value as u64);
        } else if params.insert(key.clone(), value).is_some() {
            return Err(err(key_pos, format!("parameter `{key}` is set twice"), None));
        }
    }
    let seed = seed.ok_or_else(|| {
        err(
            pos,
            format!("initial state \"{name}\": seed required for repeatability"),
            Some("a `random_seed:` line"),
        )
    })?;
    Ok(InitialState { name, seed, params })
}

/// Parses a file holding only `initial state` blocks.
pub fn parse_initial_states(text: &str) -> Result<Vec<InitialState>, ParseError> {
    let spec = parse_adsl(text)?;
    if !spec.components.is_empty() || !spec.ensembles.is_empty() || !spec.assignments.is_empty() {
        return Err(err(
            Pos { line: 1, col: 1 },
            "expected only initial state blocks",
            None,
        ));
    }
    Ok(spec.initial_states)
}

// ---------------------------------------------------------------------------
// rendering

fn quoted(s: &str) -> String {
    let mut out = String::new();
    let _ = write_string(&mut out, s);
    out
}

fn fmt_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

pub fn render_initial_state(s: &InitialState) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "initial state {}", quoted(&s.name));
    let _ = writeln!(out, "  random_seed: {}", s.seed);
    for (k, v) in &s.params {
        let _ = writeln!(out, "  {k}: {}", fmt_number(*v));
    }
    out
}

/// Canonical text of a specification; parses back to the same value.
pub fn render_adsl(spec: &ArchitectureSpec) -> String {
    let mut out = String::new();
    for c in &spec.components {
        let _ = writeln!(out, "component {}", c.kind);
        if let Some(d) = &c.display {
            let _ = writeln!(out, "  name {}", quoted(d));
        }
        if let Some(d) = &c.description {
            let _ = writeln!(out, "  description {}", quoted(d));
        }
        for a in &c.attributes {
            let _ = writeln!(out, "  attribute {}", a.id);
            if let Some(d) = &a.display {
                let _ = writeln!(out, "    name {}", quoted(d));
            }
            if let Some(d) = &a.description {
                let _ = writeln!(out, "    description {}", quoted(d));
            }
        }
        out.push('\n');
    }
    for e in &spec.ensembles {
        let _ = writeln!(out, "ensemble {}", e.id);
        let _ = writeln!(out, "  name {}", quoted(&e.group));
        if let Some(d) = &e.description {
            let _ = writeln!(out, "  description {}", quoted(d));
        }
    }
    if !spec.ensembles.is_empty() {
        out.push('\n');
    }
    for b in &spec.beyond_control {
        let _ = writeln!(out, "beyond-control {} {} {}", b.kind, b.accessor, quoted(&b.description));
    }
    if !spec.beyond_control.is_empty() {
        out.push('\n');
    }
    for a in &spec.assignments {
        let _ = writeln!(out, "periodically assign {}[] {}", a.kind, quoted(&a.label));
        if let Some(f) = &a.filter {
            let _ = writeln!(out, "  if {f}");
        }
        let _ = writeln!(out, "into ensembles {}", a.ensembles.join(", "));
        let _ = writeln!(out, "as {}", a.method);
        out.push('\n');
    }
    if let Some(s) = &spec.strategy {
        let _ = writeln!(out, "strategy: {}\n", quoted(s));
    }
    if let Some(am) = &spec.am_interface {
        let _ = writeln!(out, "am_interface {}({}.{})\n", am.class, am.module, am.base);
    }
    for s in &spec.initial_states {
        out.push_str(&render_initial_state(s));
    }
    out
}
