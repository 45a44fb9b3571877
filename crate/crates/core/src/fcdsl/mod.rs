//! The constraint file format: a quoted description followed by an
//! indented body of `let` definitions and one formula.
//!
//! ```text
//! constraint "All farmers should stay in the Village"
//!   let Farmers = {v in Villagers | v.role == "Farmer"}
//!   forall f in Farmers: within[MAX, MAX] f.location == "Village"
//! ```

pub(crate) mod lexer;
pub(crate) mod parser;

use std::collections::BTreeSet;
use std::fmt::{self, Write};

use thiserror::Error;

pub use lexer::Pos;
use lexer::{lex, Tok, Token};
use parser::Parser;

use crate::fcl::names::check_names;
use crate::fcl::{write_string, Constraint, Formula, SetExpr, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
    pub expected: Option<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)?;
        if let Some(e) = &self.expected {
            write!(f, "; expected {e}")?;
        }
        Ok(())
    }
}

impl From<lexer::LexError> for ParseError {
    fn from(e: lexer::LexError) -> Self {
        ParseError {
            pos: e.pos,
            message: e.message,
            expected: None,
        }
    }
}

/// Where the parts of one constraint came from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintSource {
    pub header: Pos,
    pub lets: Vec<Pos>,
    pub formula: Pos,
    /// Start of every formula node, in post-order (children before parents,
    /// left to right, set predicates before the node using the set).
    pub nodes: Vec<Pos>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstraintDocument {
    pub constraints: Vec<Constraint>,
    pub sources: Vec<ConstraintSource>,
}

/// Formula nodes in the order their positions are recorded.
pub fn post_order(f: &Formula) -> Vec<&Formula> {
    fn set_nodes<'a>(s: &'a SetExpr, out: &mut Vec<&'a Formula>) {
        match s {
            SetExpr::Named(_) | SetExpr::Let(_) => {}
            SetExpr::Comprehension {
                source, predicate, ..
            } => {
                set_nodes(source, out);
                walk(predicate, out);
            }
            SetExpr::Intersect(a, b) | SetExpr::Union(a, b) => {
                set_nodes(a, out);
                set_nodes(b, out);
            }
        }
    }
    fn expr_nodes<'a>(e: &'a crate::fcl::Expr, out: &mut Vec<&'a Formula>) {
        use crate::fcl::Expr;
        match e {
            Expr::Count(s) => set_nodes(s, out),
            Expr::Attr(b, _) => expr_nodes(b, out),
            Expr::Arith(_, a, b) => {
                expr_nodes(a, out);
                expr_nodes(b, out);
            }
            Expr::Lit(_) | Expr::Var(_) | Expr::Endcount(_) => {}
        }
    }
    fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
        match f {
            Formula::Const(_) => {}
            Formula::Cmp(a, _, b) => {
                expr_nodes(a, out);
                expr_nodes(b, out);
            }
            Formula::In(e, s) => {
                expr_nodes(e, out);
                set_nodes(s, out);
            }
            Formula::Not(a) | Formula::Within { body: a, .. } => walk(a, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            Formula::Forall(_, s, body) | Formula::Exists(_, s, body) => {
                set_nodes(s, out);
                walk(body, out);
            }
        }
        out.push(f);
    }
    let mut out = Vec::new();
    walk(f, &mut out);
    out
}

fn eof_at(pos: Pos) -> Token {
    Token {
        tok: Tok::Eof,
        pos,
        line_start: true,
    }
}

pub fn parse_constraints(text: &str) -> Result<ConstraintDocument, ParseError> {
    let toks = lex(text, 1)?;
    let mut doc = ConstraintDocument::default();
    let mut at = 0;
    while toks[at].tok != Tok::Eof {
        let head = &toks[at];
        if !(head.tok == Tok::Ident("constraint".into()) && head.pos.col == 1) {
            return Err(ParseError {
                pos: head.pos,
                message: format!("unexpected {} at top level", head.tok),
                expected: Some("`constraint \"<description>\"` at the start of a line".into()),
            });
        }
        let header = head.pos;
        at += 1;
        let description = match &toks[at].tok {
            Tok::Str(s) if !toks[at].line_start => s.clone(),
            _ => {
                return Err(ParseError {
                    pos: toks[at].pos,
                    message: format!("unexpected {}", toks[at].tok),
                    expected: Some("a quoted description".into()),
                })
            }
        };
        if description.trim().is_empty() {
            return Err(ParseError {
                pos: toks[at].pos,
                message: "empty description".into(),
                expected: None,
            });
        }
        at += 1;
        if !toks[at].line_start {
            return Err(ParseError {
                pos: toks[at].pos,
                message: format!("unexpected {} after the description", toks[at].tok),
                expected: Some("a line break".into()),
            });
        }
        let start = at;
        while toks[at].tok != Tok::Eof && !(toks[at].line_start && toks[at].pos.col == 1) {
            if toks[at].line_start && toks[at].pos.col < 3 {
                return Err(ParseError {
                    pos: toks[at].pos,
                    message: "constraint body is not indented enough".into(),
                    expected: Some("at least two spaces of indentation".into()),
                });
            }
            at += 1;
        }
        let mut body: Vec<Token> = toks[start..at].to_vec();
        body.push(eof_at(toks[at].pos));
        let (constraint, source) = parse_body(&body, description, header)?;
        doc.constraints.push(constraint);
        doc.sources.push(source);
    }
    Ok(doc)
}

fn parse_body(toks: &[Token], description: String, header: Pos) -> Result<(Constraint, ConstraintSource), ParseError> {
    let mut p = Parser::new(toks);
    let mut lets = Vec::new();
    let mut source = ConstraintSource {
        header,
        ..Default::default()
    };
    if p.at_end() {
        return Err(p.error("a formula"));
    }
    while p.is_kw("let") {
        source.lets.push(p.pos());
        p.expect_kw("let")?;
        let name = p.ident("a set name")?;
        p.expect_sym("=")?;
        let set = p.set()?;
        if !p.lets.insert(name.clone()) {
            return Err(ParseError {
                pos: source.lets[source.lets.len() - 1],
                message: format!("`{name}` is defined twice"),
                expected: None,
            });
        }
        lets.push((name, set));
    }
    // let predicates are not part of the formula's node list
    p.nodes.clear();
    source.formula = p.pos();
    let body = p.formula()?;
    if !p.at_end() {
        return Err(p.error("end of constraint"));
    }
    source.nodes = std::mem::take(&mut p.nodes);
    Ok((
        Constraint {
            description,
            lets,
            body,
        },
        source,
    ))
}

/// Parses a single formula with no surrounding constraint.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text, 1)?;
    let mut p = Parser::new(&toks);
    let f = p.formula()?;
    if !p.at_end() {
        return Err(p.error("end of formula"));
    }
    Ok(f)
}

pub fn render_constraint(c: &Constraint) -> String {
    let mut out = String::from("constraint ");
    let _ = write_string(&mut out, &c.description);
    out.push('\n');
    for (name, set) in &c.lets {
        let _ = writeln!(out, "  let {name} = {set}");
    }
    let _ = writeln!(out, "  {}", c.body);
    out
}

pub fn render(constraints: &[Constraint]) -> String {
    constraints
        .iter()
        .map(render_constraint)
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("constraint {index} (\"{description}\"): {message}")]
pub struct ValidationError {
    pub index: usize,
    pub description: String,
    pub message: String,
}

/// Resolves set, variable and (optionally) attribute names.
pub fn validate(
    constraints: &[Constraint],
    vocab: &Vocabulary,
    attributes: Option<&BTreeSet<String>>,
) -> Result<(), Vec<ValidationError>> {
    let mut errors = Vec::new();
    for (index, c) in constraints.iter().enumerate() {
        let mut fail = |message: String| {
            errors.push(ValidationError {
                index,
                description: c.description.clone(),
                message,
            })
        };
        if let Err(e) = check_names(c, vocab) {
            fail(e.to_string());
        }
        let free = c.body.free_vars();
        if let Some(v) = free.iter().next() {
            fail(format!("unbound variable `{v}`"));
        }
        for (name, set) in &c.lets {
            let wrapper = Formula::Cmp(
                crate::fcl::Expr::Count(set.clone()),
                crate::fcl::CmpOp::Ge,
                crate::fcl::Expr::Lit(0i64.into()),
            );
            if let Some(v) = wrapper.free_vars().iter().next() {
                fail(format!("unbound variable `{v}` in let `{name}`"));
            }
            let mut temporal = false;
            set.visit_formulas(&mut |f| temporal |= matches!(f, Formula::Within { .. }));
            if temporal {
                fail(format!("let `{name}` uses a temporal operator"));
            }
        }
        if let Some(known) = attributes {
            let mut used = BTreeSet::new();
            c.body.attributes(&mut used);
            for (_, set) in &c.lets {
                set.visit_formulas(&mut |f| f.attributes(&mut used));
            }
            for a in used.difference(known) {
                fail(format!("unknown attribute `{a}`"));
            }
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}
