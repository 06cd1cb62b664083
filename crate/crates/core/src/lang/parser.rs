use super::ast::{Agent, Branch, Declaration, Setting};
use super::lexer::{tokenize, Tok, Token};
use super::LangError;
use crate::constraints::{Atom, Canon, Constraint, Linear, Rel, Term, Var};
use crate::rational::{self, Rational};
use num_traits::{One, Zero};
use std::collections::{BTreeMap, BTreeSet};

const KEYWORDS: &[&str] = &["stop", "tell", "now", "then", "else", "exists", "change", "ask", "cask", "cvar"];

pub(super) struct CallSite {
    pub name: String,
    pub arity: usize,
    pub line: usize,
    pub col: usize,
}

pub(super) struct Parser {
    toks: Vec<Token>,
    pos: usize,
    anon: u64,
    pub calls: Vec<CallSite>,
}

/// One side of a relation before it is classified as arithmetic or term-level.
enum Side {
    List(Term),
    Expr { coeffs: BTreeMap<Var, Rational>, constant: Rational, bare: Option<String> },
}

fn is_upper(name: &str) -> bool {
    name.starts_with(|c: char| c.is_uppercase() || c == '_')
}

fn ident_term(name: &str) -> Term {
    if is_upper(name) {
        Term::var(name)
    } else {
        Term::sym(name)
    }
}

impl Parser {
    pub fn new(src: &str) -> Result<Self, LangError> {
        Ok(Parser { toks: tokenize(src)?, pos: 0, anon: 0, calls: Vec::new() })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, LangError> {
        let t = &self.toks[self.pos];
        Err(LangError::Syntax { line: t.line, col: t.col, message: message.into() })
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) | Tok::Number(s) => format!("'{s}'"),
            Tok::Eof => "end of input".to_string(),
            other => format!("{other:?}"),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), LangError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}, found {}", self.describe()))
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self, what: &str) -> Result<String, LangError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.error(format!("expected {what}, found {}", self.describe())),
        }
    }

    fn fresh_anon(&mut self) -> String {
        self.anon += 1;
        format!("_{}", self.anon)
    }

    fn variable(&mut self) -> Result<Var, LangError> {
        let name = self.ident("a variable")?;
        Ok(if name == "_" { Var::new(self.fresh_anon()) } else { Var::new(name) })
    }

    pub fn at_end(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub fn finish(&self) -> Result<(), LangError> {
        if self.at_end() {
            Ok(())
        } else {
            self.error(format!("unexpected {}", self.describe()))
        }
    }

    // ---- programs ----

    pub fn program(&mut self) -> Result<(BTreeMap<String, Declaration>, BTreeSet<Var>), LangError> {
        let mut decls = BTreeMap::new();
        let mut cvars = BTreeSet::new();
        while !self.at_end() {
            if self.at_keyword("cvar") {
                self.bump();
                loop {
                    cvars.insert(self.variable()?);
                    if *self.peek() != Tok::Comma {
                        break;
                    }
                    self.bump();
                }
                self.expect(Tok::Dot, "'.'")?;
                continue;
            }
            let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
            let name = self.ident("a declaration name")?;
            let params = if *self.peek() == Tok::LParen { self.var_list_parens()? } else { Vec::new() };
            let distinct: BTreeSet<&Var> = params.iter().collect();
            if distinct.len() != params.len() {
                return Err(LangError::Syntax { line, col, message: format!("repeated parameter in {name}") });
            }
            self.expect(Tok::Neck, "':-'")?;
            let body = self.agent()?;
            self.expect(Tok::Dot, "'.' ending the declaration")?;
            if decls.insert(name.clone(), Declaration { params, body }).is_some() {
                return Err(LangError::Syntax { line, col, message: format!("duplicate declaration of {name}") });
            }
        }
        Ok((decls, cvars))
    }

    fn var_list_parens(&mut self) -> Result<Vec<Var>, LangError> {
        self.expect(Tok::LParen, "'('")?;
        let mut vars = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                vars.push(self.variable()?);
                if *self.peek() != Tok::Comma {
                    break;
                }
                self.bump();
            }
        }
        self.expect(Tok::RParen, "')'")?;
        Ok(vars)
    }

    // ---- agents ----

    pub fn agent(&mut self) -> Result<Agent, LangError> {
        let mut left = self.choice()?;
        while *self.peek() == Tok::ParallelBar {
            self.bump();
            let right = self.choice()?;
            left = Agent::par(left, right);
        }
        Ok(left)
    }

    fn choice(&mut self) -> Result<Agent, LangError> {
        if !(self.at_keyword("ask") || self.at_keyword("cask")) {
            return self.primary();
        }
        let mut branches = vec![self.branch()?];
        while *self.peek() == Tok::Plus {
            self.bump();
            branches.push(self.branch()?);
        }
        Ok(Agent::Choice(branches))
    }

    fn branch(&mut self) -> Result<Branch, LangError> {
        if self.at_keyword("ask") {
            self.bump();
            let guard = self.parenthesized_constraint()?;
            self.expect(Tok::Arrow, "'->' after ask guard")?;
            Ok(Branch::Ask(guard, self.primary()?))
        } else if self.at_keyword("cask") {
            self.bump();
            Ok(Branch::Cask(self.parenthesized_constraint()?))
        } else {
            self.error(format!("expected 'ask' or 'cask', found {}", self.describe()))
        }
    }

    fn parenthesized_constraint(&mut self) -> Result<Constraint, LangError> {
        self.expect(Tok::LParen, "'('")?;
        let c = self.constraint()?;
        self.expect(Tok::RParen, "')'")?;
        Ok(c)
    }

    fn primary(&mut self) -> Result<Agent, LangError> {
        let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let a = self.agent()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(a)
            }
            Tok::Ident(kw) => match kw.as_str() {
                "stop" => {
                    self.bump();
                    Ok(Agent::Stop)
                }
                "tell" => {
                    self.bump();
                    Ok(Agent::Tell(self.parenthesized_constraint()?))
                }
                "now" => {
                    self.bump();
                    let cond = self.constraint()?;
                    if !self.at_keyword("then") {
                        return self.error(format!("expected 'then', found {}", self.describe()));
                    }
                    self.bump();
                    let then = self.primary()?;
                    if !self.at_keyword("else") {
                        return self.error(format!("expected 'else', found {}", self.describe()));
                    }
                    self.bump();
                    let otherwise = self.primary()?;
                    Ok(Agent::now(cond, then, otherwise))
                }
                "exists" => {
                    self.bump();
                    let mut vars = vec![self.variable()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        vars.push(self.variable()?);
                    }
                    self.expect(Tok::LParen, "'(' after hidden variables")?;
                    let mut body = self.agent()?;
                    self.expect(Tok::RParen, "')'")?;
                    for v in vars.into_iter().rev() {
                        body = Agent::hide(v, body);
                    }
                    Ok(body)
                }
                "change" => {
                    self.bump();
                    self.expect(Tok::LParen, "'('")?;
                    let var = self.variable()?;
                    self.expect(Tok::Comma, "','")?;
                    let value = self.setting()?;
                    self.expect(Tok::Comma, "','")?;
                    let flow = self.setting()?;
                    self.expect(Tok::RParen, "')'")?;
                    Ok(Agent::Change { var, value, flow })
                }
                "ask" | "cask" => self.error("a choice must be parenthesized here"),
                k if KEYWORDS.contains(&k) => self.error(format!("unexpected keyword '{k}'")),
                _ => {
                    let name = self.ident("a process name")?;
                    let args = if *self.peek() == Tok::LParen { self.var_list_parens()? } else { Vec::new() };
                    self.calls.push(CallSite { name: name.clone(), arity: args.len(), line, col });
                    Ok(Agent::Call { name, args })
                }
            },
            _ => self.error(format!("expected an agent, found {}", self.describe())),
        }
    }

    fn setting(&mut self) -> Result<Setting, LangError> {
        if matches!(self.peek(), Tok::Ident(s) if s == "_") {
            self.bump();
            return Ok(Setting::Keep);
        }
        Ok(Setting::To(self.signed_rational()?))
    }

    fn signed_rational(&mut self) -> Result<Rational, LangError> {
        let negative = match self.peek() {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        let r = self.unsigned_rational()?;
        Ok(if negative { -r } else { r })
    }

    fn unsigned_rational(&mut self) -> Result<Rational, LangError> {
        let Tok::Number(text) = self.peek().clone() else {
            return self.error(format!("expected a number, found {}", self.describe()));
        };
        self.bump();
        let mut r = rational::parse(&text).expect("lexer yields valid numerals");
        if *self.peek() == Tok::Slash && matches!(self.peek_at(1), Tok::Number(_)) {
            self.bump();
            let Tok::Number(d) = self.bump() else { unreachable!() };
            let d = rational::parse(&d).expect("lexer yields valid numerals");
            if d.is_zero() {
                return self.error("division by zero");
            }
            r /= d;
        }
        Ok(r)
    }

    // ---- constraints ----

    pub fn constraint(&mut self) -> Result<Constraint, LangError> {
        let mut atoms = Vec::new();
        let mut falsified = false;
        loop {
            match self.atom()? {
                Some(Some(a)) => atoms.push(a),
                Some(None) => falsified = true,
                None => {}
            }
            if *self.peek() != Tok::And {
                break;
            }
            self.bump();
        }
        Ok(if falsified { Constraint::False } else { Constraint::from_atoms(atoms) })
    }

    /// `None` for `true`, `Some(None)` for `false`.
    fn atom(&mut self) -> Result<Option<Option<Atom>>, LangError> {
        if self.at_keyword_plain("true") {
            self.bump();
            return Ok(None);
        }
        if self.at_keyword_plain("false") {
            self.bump();
            return Ok(Some(None));
        }
        let left = self.side()?;
        let rel = match self.peek() {
            Tok::Eq => Some(Rel::Eq),
            Tok::Le => Some(Rel::Le),
            Tok::Lt => Some(Rel::Lt),
            Tok::Ge => Some(Rel::Ge),
            Tok::Gt => Some(Rel::Gt),
            Tok::Neq => None,
            _ => {
                return match left {
                    Side::Expr { bare: Some(name), .. } if !name.starts_with('_') => {
                        Ok(Some(Some(Atom::signal(&name))))
                    }
                    _ => self.error(format!("expected a relation, found {}", self.describe())),
                };
            }
        };
        self.bump();
        let right = self.side()?;
        match rel {
            None => {
                let l = self.side_term(left, &right)?;
                let r = self.side_term(right, &Side::List(Term::Nil))?;
                Ok(Some(Some(Atom::Neq(l, r))))
            }
            Some(Rel::Eq) if self.is_term_equation(&left, &right) => {
                let (l, r) = match (&left, &right) {
                    (Side::Expr { bare: Some(a), .. }, Side::Expr { bare: Some(b), .. })
                        if !is_upper(a) && is_upper(b) =>
                    {
                        (Term::var(b), Term::sym(a))
                    }
                    _ => {
                        let l = self.side_term(left, &right)?;
                        let r = self.side_term(right, &Side::List(Term::Nil))?;
                        (l, r)
                    }
                };
                Ok(Some(Some(Atom::Eq(l, r))))
            }
            Some(rel) => {
                let (Side::Expr { coeffs: lc, constant: lk, .. }, Side::Expr { coeffs: rc, constant: rk, .. }) =
                    (left, right)
                else {
                    return self.error("streams cannot appear in arithmetic relations");
                };
                let mut coeffs = lc;
                for (x, k) in rc {
                    *coeffs.entry(x).or_insert_with(Rational::zero) -= k;
                }
                coeffs.retain(|_, k| !k.is_zero());
                match Linear::new(coeffs, rel, rk - lk) {
                    Canon::Atom(l) => Ok(Some(Some(Atom::Lin(l)))),
                    Canon::Constant(true) => Ok(None),
                    Canon::Constant(false) => Ok(Some(None)),
                }
            }
        }
    }

    fn at_keyword_plain(&self, kw: &str) -> bool {
        self.at_keyword(kw) && !matches!(self.peek_at(1), Tok::Eq | Tok::Neq | Tok::Le | Tok::Lt | Tok::Ge | Tok::Gt)
    }

    fn is_term_equation(&self, left: &Side, right: &Side) -> bool {
        match (left, right) {
            (Side::List(_), _) | (_, Side::List(_)) => true,
            (Side::Expr { bare: Some(a), .. }, Side::Expr { bare: Some(b), .. }) => is_upper(a) || is_upper(b),
            _ => false,
        }
    }

    /// Converts a side to a term; a bare name facing a list is a variable.
    fn side_term(&mut self, side: Side, other: &Side) -> Result<Term, LangError> {
        match side {
            Side::List(t) => Ok(t),
            Side::Expr { bare: Some(name), .. } => {
                if matches!(other, Side::List(t) if *t != Term::Nil) {
                    Ok(Term::var(&name))
                } else {
                    Ok(ident_term(&name))
                }
            }
            Side::Expr { coeffs, constant, .. } if coeffs.is_empty() => Ok(Term::Num(constant)),
            _ => self.error("arithmetic expressions are not allowed in term equations"),
        }
    }

    fn side(&mut self) -> Result<Side, LangError> {
        if *self.peek() == Tok::LBracket {
            return Ok(Side::List(self.list()?));
        }
        let start = self.pos;
        let mut coeffs: BTreeMap<Var, Rational> = BTreeMap::new();
        let mut constant = Rational::zero();
        let mut sign = match self.peek() {
            Tok::Minus => {
                self.bump();
                -Rational::one()
            }
            Tok::Plus => {
                self.bump();
                Rational::one()
            }
            _ => Rational::one(),
        };
        loop {
            let (k, var) = self.product()?;
            let k = k * &sign;
            match var {
                Some(x) => *coeffs.entry(x).or_insert_with(Rational::zero) += k,
                None => constant += k,
            }
            sign = match self.peek() {
                Tok::Plus => Rational::one(),
                Tok::Minus => -Rational::one(),
                _ => break,
            };
            self.bump();
        }
        let bare = match &self.toks[start..self.pos] {
            [Token { tok: Tok::Ident(name), .. }] => Some(name.clone()),
            _ => None,
        };
        if bare.as_deref() == Some("_") {
            let name = self.fresh_anon();
            return Ok(Side::Expr { coeffs: BTreeMap::new(), constant, bare: Some(name) });
        }
        coeffs.retain(|_, k| !k.is_zero());
        Ok(Side::Expr { coeffs, constant, bare })
    }

    fn product(&mut self) -> Result<(Rational, Option<Var>), LangError> {
        let mut k = Rational::one();
        let mut var: Option<Var> = None;
        loop {
            match self.peek().clone() {
                Tok::Number(_) => k *= self.unsigned_rational()?,
                Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                    self.bump();
                    if var.is_some() {
                        return self.error("non-linear product of variables");
                    }
                    var = Some(Var::new(name));
                    if *self.peek() == Tok::Slash && matches!(self.peek_at(1), Tok::Number(_)) {
                        self.bump();
                        let d = self.unsigned_rational()?;
                        if d.is_zero() {
                            return self.error("division by zero");
                        }
                        k /= d;
                    }
                }
                _ => return self.error(format!("expected a number or variable, found {}", self.describe())),
            }
            if *self.peek() != Tok::Star {
                return Ok((k, var));
            }
            self.bump();
        }
    }

    fn list(&mut self) -> Result<Term, LangError> {
        self.expect(Tok::LBracket, "'['")?;
        let mut items = Vec::new();
        let mut tail = Term::Nil;
        if *self.peek() != Tok::RBracket {
            loop {
                items.push(self.list_element()?);
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                    }
                    Tok::Bar => {
                        self.bump();
                        tail = self.list_element()?;
                        break;
                    }
                    _ => break,
                }
            }
        }
        self.expect(Tok::RBracket, "']'")?;
        Ok(Term::list(items, tail))
    }

    fn list_element(&mut self) -> Result<Term, LangError> {
        match self.peek().clone() {
            Tok::LBracket => self.list(),
            Tok::Number(_) | Tok::Minus | Tok::Plus => Ok(Term::Num(self.signed_rational()?)),
            Tok::Ident(name) if name == "_" => {
                self.bump();
                Ok(Term::var(&self.fresh_anon()))
            }
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                self.bump();
                Ok(ident_term(&name))
            }
            _ => self.error(format!("expected a list element, found {}", self.describe())),
        }
    }
}
