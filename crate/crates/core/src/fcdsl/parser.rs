//! Recursive-descent parser for formulas, expressions and sets.

use std::collections::BTreeSet;

use super::lexer::{Pos, Tok, Token};
use super::ParseError;
use crate::fcl::{ArithOp, Bound, CmpOp, Endcount, Expr, Formula, SetExpr, Value};

pub(crate) const KEYWORDS: [&str; 18] = [
    "within", "forall", "exists", "in", "and", "or", "not", "implies", "count", "let", "true", "false",
    "MAX", "BEG", "INF", "intersect", "union", "constraint",
];

pub(crate) struct Parser<'t> {
    toks: &'t [Token],
    at: usize,
    /// Names introduced by `let` so far.
    pub lets: BTreeSet<String>,
    /// Position of every formula node in construction (post-) order.
    pub nodes: Vec<Pos>,
}

type PResult<T> = Result<T, ParseError>;

impl<'t> Parser<'t> {
    pub fn new(toks: &'t [Token]) -> Self {
        Parser {
            toks,
            at: 0,
            lets: BTreeSet::new(),
            nodes: Vec::new(),
        }
    }

    pub fn peek(&self) -> &Token {
        &self.toks[self.at.min(self.toks.len() - 1)]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].tok
    }

    pub fn pos(&self) -> Pos {
        self.peek().pos
    }

    pub fn at_end(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    fn bump(&mut self) -> Token {
        let t = self.peek().clone();
        if self.at < self.toks.len() - 1 {
            self.at += 1;
        }
        t
    }

    pub fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn is_sym(&self, sym: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(s) if *s == sym)
    }

    pub fn error(&self, expected: &str) -> ParseError {
        let t = self.peek();
        ParseError {
            pos: t.pos,
            message: format!("unexpected {}", t.tok),
            expected: Some(expected.to_string()),
        }
    }

    pub fn expect_sym(&mut self, sym: &str) -> PResult<()> {
        if self.is_sym(sym) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("`{sym}`")))
        }
    }

    pub fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("`{kw}`")))
        }
    }

    pub fn ident(&mut self, what: &str) -> PResult<String> {
        match &self.peek().tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(what)),
        }
    }

    fn node(&mut self, pos: Pos, f: Formula) -> Formula {
        self.nodes.push(pos);
        f
    }

    // formulas ----------------------------------------------------------

    pub fn formula(&mut self) -> PResult<Formula> {
        if self.is_kw("forall") || self.is_kw("exists") {
            return self.quantifier();
        }
        self.implication()
    }

    fn quantifier(&mut self) -> PResult<Formula> {
        let pos = self.pos();
        let universal = self.is_kw("forall");
        self.bump();
        let var = self.ident("a variable name")?;
        self.expect_kw("in")?;
        let set = self.set()?;
        self.expect_sym(":")?;
        let body = Box::new(self.formula()?);
        let f = if universal {
            Formula::Forall(var, set, body)
        } else {
            Formula::Exists(var, set, body)
        };
        Ok(self.node(pos, f))
    }

    fn implication(&mut self) -> PResult<Formula> {
        let pos = self.pos();
        let lhs = self.disjunction()?;
        if self.is_kw("implies") || self.is_sym("=>") {
            self.bump();
            let rhs = self.formula()?;
            return Ok(self.node(pos, Formula::implies(lhs, rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let pos = self.pos();
        let mut lhs = self.conjunction()?;
        while self.is_kw("or") {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = self.node(pos, Formula::or(lhs, rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let pos = self.pos();
        let mut lhs = self.unary()?;
        while self.is_kw("and") {
            self.bump();
            let rhs = self.unary()?;
            lhs = self.node(pos, Formula::and(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Formula> {
        let pos = self.pos();
        if self.is_kw("not") {
            self.bump();
            let inner = self.unary()?;
            return Ok(self.node(pos, Formula::not(inner)));
        }
        if self.is_kw("within") {
            self.bump();
            self.expect_sym("[")?;
            let n = self.bound()?;
            self.expect_sym(",")?;
            let t = self.bound()?;
            self.expect_sym("]")?;
            let body = self.unary()?;
            return Ok(self.node(pos, Formula::within(n, t, body)));
        }
        if self.is_kw("forall") || self.is_kw("exists") {
            return self.quantifier();
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Formula> {
        let pos = self.pos();
        if self.is_sym("(") {
            // either a parenthesized formula or an expression starting with `(`
            let (save_at, save_nodes) = (self.at, self.nodes.len());
            if let Ok(f) = self.comparison(pos) {
                return Ok(f);
            }
            self.at = save_at;
            self.nodes.truncate(save_nodes);
            self.bump();
            let f = self.formula()?;
            self.expect_sym(")")?;
            return Ok(f);
        }
        if (self.is_kw("true") || self.is_kw("false")) && !self.continues_expression(1) {
            let value = self.is_kw("true");
            self.bump();
            return Ok(self.node(pos, Formula::Const(value)));
        }
        self.comparison(pos)
    }

    /// Whether the token `k` ahead continues an expression into a comparison.
    fn continues_expression(&self, k: usize) -> bool {
        matches!(
            self.peek_at(k),
            Tok::Sym("==" | "!=" | "<" | "<=" | ">" | ">=" | "+" | "-" | "*" | ".")
        ) || matches!(self.peek_at(k), Tok::Ident(s) if s == "in")
    }

    fn comparison(&mut self, pos: Pos) -> PResult<Formula> {
        let lhs = self.expr()?;
        if self.is_kw("in") {
            self.bump();
            let set = self.set()?;
            return Ok(self.node(pos, Formula::In(lhs, set)));
        }
        let op = match &self.peek().tok {
            Tok::Sym("==") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            _ => return Err(self.error("a comparison operator or `in`")),
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(self.node(pos, Formula::Cmp(lhs, op, rhs)))
    }

    // bounds ------------------------------------------------------------

    fn bound(&mut self) -> PResult<Bound> {
        let negative = self.is_sym("-");
        if negative {
            self.bump();
        }
        let b = match self.peek().tok.clone() {
            Tok::Int(k) if self.peek_at(1) == &Tok::Sym("*") => {
                self.bump();
                self.scaled(k as f64)?
            }
            Tok::Real(x) => {
                self.bump();
                if self.is_sym("*") {
                    self.scaled(x)?
                } else {
                    return Err(self.error("`*MAX` or `*BEG` after a fractional bound"));
                }
            }
            Tok::Int(k) => {
                self.bump();
                Bound::Lit(k)
            }
            Tok::Ident(s) if s == "MAX" => {
                self.bump();
                Bound::Max
            }
            Tok::Ident(s) if s == "BEG" => {
                self.bump();
                Bound::Beg
            }
            Tok::Ident(s) if s == "INF" => {
                self.bump();
                Bound::Inf
            }
            _ => return Err(self.error("a bound (integer, MAX, BEG, INF or factor*MAX)")),
        };
        match (negative, b) {
            (false, b) => Ok(b),
            (true, Bound::Lit(k)) => Ok(Bound::Lit(-k)),
            _ => Err(ParseError {
                pos: self.pos(),
                message: "only integer bounds can be negated".into(),
                expected: None,
            }),
        }
    }

    fn scaled(&mut self, factor: f64) -> PResult<Bound> {
        self.expect_sym("*")?;
        let endcount = if self.is_kw("MAX") {
            Endcount::Max
        } else if self.is_kw("BEG") {
            Endcount::Beg
        } else {
            return Err(self.error("`MAX` or `BEG`"));
        };
        self.bump();
        Ok(Bound::Scaled { factor, endcount })
    }

    // expressions -------------------------------------------------------

    pub fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.is_sym("+") {
                ArithOp::Add
            } else if self.is_sym("-") {
                ArithOp::Sub
            } else {
                return Ok(lhs);
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Arith(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.postfix()?;
        while self.is_sym("*") {
            self.bump();
            let rhs = self.postfix()?;
            lhs = Expr::Arith(ArithOp::Mul, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while self.is_sym(".") {
            self.bump();
            let attr = self.ident("an attribute name")?;
            e = Expr::Attr(Box::new(e), attr);
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let tok = self.peek().tok.clone();
        match tok {
            Tok::Int(k) => {
                self.bump();
                Ok(Expr::Lit(Value::Int(k)))
            }
            Tok::Real(x) => {
                self.bump();
                Ok(Expr::Lit(Value::Real(x)))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Lit(Value::Str(s)))
            }
            Tok::Sym("-") => match self.peek_at(1).clone() {
                Tok::Int(k) => {
                    self.at += 2;
                    Ok(Expr::Lit(Value::Int(-k)))
                }
                Tok::Real(x) => {
                    self.at += 2;
                    Ok(Expr::Lit(Value::Real(-x)))
                }
                _ => Err(self.error("a number after `-`")),
            },
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(s) => match s.as_str() {
                "true" | "false" => {
                    self.bump();
                    Ok(Expr::Lit(Value::Bool(s == "true")))
                }
                "MAX" => {
                    self.bump();
                    Ok(Expr::Endcount(Endcount::Max))
                }
                "BEG" => {
                    self.bump();
                    Ok(Expr::Endcount(Endcount::Beg))
                }
                "count" => {
                    self.bump();
                    self.expect_sym("(")?;
                    let set = self.set()?;
                    self.expect_sym(")")?;
                    Ok(Expr::Count(set))
                }
                _ => Ok(Expr::Var(self.ident("an expression")?)),
            },
            _ => Err(self.error("an expression")),
        }
    }

    // sets --------------------------------------------------------------

    pub fn set(&mut self) -> PResult<SetExpr> {
        let mut lhs = self.set_term()?;
        while self.is_kw("union") {
            self.bump();
            let rhs = self.set_term()?;
            lhs = SetExpr::Union(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn set_term(&mut self) -> PResult<SetExpr> {
        let mut lhs = self.set_atom()?;
        while self.is_kw("intersect") {
            self.bump();
            let rhs = self.set_atom()?;
            lhs = SetExpr::Intersect(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn set_atom(&mut self) -> PResult<SetExpr> {
        if self.is_sym("(") {
            self.bump();
            let s = self.set()?;
            self.expect_sym(")")?;
            return Ok(s);
        }
        if self.is_sym("{") {
            self.bump();
            let var = self.ident("a variable name")?;
            self.expect_kw("in")?;
            let source = self.set()?;
            self.expect_sym("|")?;
            let predicate = self.formula()?;
            self.expect_sym("}")?;
            return Ok(SetExpr::Comprehension {
                var,
                source: Box::new(source),
                predicate: Box::new(predicate),
            });
        }
        let name = self.ident("a set name or `{`")?;
        Ok(if self.lets.contains(&name) {
            SetExpr::Let(name)
        } else {
            SetExpr::Named(name)
        })
    }
}
