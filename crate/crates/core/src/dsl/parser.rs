//! Line-oriented recursive-descent parser.
//!
//! ```text
//! line    := ε | "space" NAME INT | "param" NAME "=" ["-"] NUMBER
//!          | "op" NAME "=" expr | "tone" expr "omega" "=" expr
//! expr    := term (("+" | "-") term)*
//! term    := unary ("*" unary)*
//! unary   := "-" unary | primary
//! primary := NUMBER | IMAG | NAME | "(" expr ")"
//!          | BUILTIN "(" SPACE ["," INT "," INT] ")"
//!          | "kron" "(" expr "," expr ")"
//!          | "mat" "[" row ("," row)* "]"
//! row     := "[" expr ("," expr)* "]"
//! ```

use std::collections::HashMap;

use num_complex::Complex64;

use super::ast::*;
use super::error::{ParseError, ParseErrorKind};

/// Maximum expression tree depth.
pub const MAX_DEPTH: usize = 256;

pub const RESERVED: [&str; 16] =
    ["space", "param", "op", "tone", "omega", "mat", "kron", "id", "a", "adag", "sx", "sy", "sz", "sp", "sm", "proj"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number { value: f64, text: String },
    Imag(f64),
    Sym(char),
    Newline,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number { text, .. } => format!("number `{text}`"),
            Tok::Imag(v) => format!("imaginary literal `{v}i`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Newline => "end of line".to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut chars: Vec<char> = Vec::new();
    for raw_line in text.split('\n') {
        chars.clear();
        chars.extend(raw_line.trim_end_matches('\r').chars());
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let span = Span::new(line, i + 1);
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if is_ident_start(c) {
                let start = i;
                while i < chars.len() && is_ident_continue(chars[i]) {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), span));
                continue;
            }
            if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let value: f64 = text.parse().map_err(|_| ParseError::new(span, ParseErrorKind::BadNumber(text.clone())))?;
                if !value.is_finite() {
                    return Err(ParseError::new(span, ParseErrorKind::BadNumber(text)));
                }
                let next = chars.get(i).copied();
                let after = chars.get(i + 1).copied();
                if next == Some('i') && !after.is_some_and(is_ident_continue) {
                    i += 1;
                    out.push((Tok::Imag(value), span));
                } else if next.is_some_and(|n| is_ident_continue(n) || n == '.') {
                    let mut j = i;
                    while j < chars.len() && (is_ident_continue(chars[j]) || chars[j] == '.') {
                        j += 1;
                    }
                    return Err(ParseError::new(span, ParseErrorKind::BadNumber(chars[start..j].iter().collect())));
                } else {
                    out.push((Tok::Number { value, text }, span));
                }
                continue;
            }
            if "=+-*(),[]".contains(c) {
                out.push((Tok::Sym(c), span));
                i += 1;
                continue;
            }
            return Err(ParseError::new(span, ParseErrorKind::BadChar(c)));
        }
        out.push((Tok::Newline, Span::new(line, chars.len() + 1)));
        line += 1;
    }
    let last = out.last().map(|(_, s)| *s).unwrap_or(Span::new(1, 1));
    out.push((Tok::Eof, last));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    ast: ModelSpecAst,
    /// Value namespace: params and ops, with the scalar value when it has one.
    values: HashMap<String, Option<Complex64>>,
    spaces: HashMap<String, usize>,
}

type PResult<T> = Result<T, ParseError>;

fn syntax(found: &Tok, span: Span, expected: &[&str]) -> ParseError {
    ParseError::new(span, ParseErrorKind::Syntax { found: found.describe(), expected: expected.iter().map(|s| s.to_string()).collect() })
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        syntax(self.peek(), self.span(), expected)
    }

    fn expect_sym(&mut self, c: char) -> PResult<Span> {
        if *self.peek() == Tok::Sym(c) {
            Ok(self.bump().1)
        } else {
            Err(self.error(&[&format!("`{c}`")]))
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Span> {
        match self.peek() {
            Tok::Ident(s) if s == kw => Ok(self.bump().1),
            _ => Err(self.error(&[&format!("`{kw}`")])),
        }
    }

    /// A fresh, non-reserved name.
    fn expect_name(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.span();
                if RESERVED.contains(&s.as_str()) {
                    return Err(ParseError::new(span, ParseErrorKind::Reserved(s)));
                }
                self.bump();
                Ok((s, span))
            }
            _ => Err(self.error(&["name"])),
        }
    }

    fn expect_int(&mut self) -> PResult<(usize, Span)> {
        match self.peek().clone() {
            Tok::Number { value, text } if text.bytes().all(|b| b.is_ascii_digit()) && value <= usize::MAX as f64 => {
                let span = self.span();
                self.bump();
                let n: usize = text.parse().map_err(|_| ParseError::new(span, ParseErrorKind::BadNumber(text.clone())))?;
                Ok((n, span))
            }
            _ => Err(self.error(&["integer"])),
        }
    }

    fn end_of_line(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => Err(self.error(&["end of line"])),
        }
    }

    fn file(mut self) -> PResult<ModelSpecAst> {
        loop {
            match self.peek().clone() {
                Tok::Eof => return Ok(self.ast),
                Tok::Newline => {
                    self.bump();
                }
                Tok::Ident(kw) => {
                    match kw.as_str() {
                        "space" => self.space_stmt()?,
                        "param" => self.param_stmt()?,
                        "op" => self.op_stmt()?,
                        "tone" => self.tone_stmt()?,
                        _ => return Err(self.error(&["`space`", "`param`", "`op`", "`tone`"])),
                    }
                    self.end_of_line()?;
                }
                _ => return Err(self.error(&["`space`", "`param`", "`op`", "`tone`"])),
            }
        }
    }

    fn space_stmt(&mut self) -> PResult<()> {
        let span = self.bump().1;
        let (name, name_span) = self.expect_name()?;
        if self.spaces.contains_key(&name) {
            return Err(ParseError::new(name_span, ParseErrorKind::Duplicate { namespace: "space", name }));
        }
        let dim_span = self.span();
        let (dim, _) = match self.expect_int() {
            Ok(v) => v,
            Err(_) if matches!(self.peek(), Tok::Number { .. }) || *self.peek() == Tok::Sym('-') => {
                return Err(ParseError::new(dim_span, ParseErrorKind::BadDimension));
            }
            Err(e) => return Err(e),
        };
        if dim == 0 {
            return Err(ParseError::new(dim_span, ParseErrorKind::BadDimension));
        }
        self.spaces.insert(name.clone(), dim);
        self.ast.spaces.push(SpaceDecl { name, dim, span });
        Ok(())
    }

    fn declare_value(&mut self, name: &str, span: Span, scalar: Option<Complex64>) -> PResult<()> {
        if self.values.contains_key(name) {
            return Err(ParseError::new(span, ParseErrorKind::Duplicate { namespace: "value", name: name.to_string() }));
        }
        self.values.insert(name.to_string(), scalar);
        Ok(())
    }

    fn param_stmt(&mut self) -> PResult<()> {
        let span = self.bump().1;
        let (name, name_span) = self.expect_name()?;
        self.expect_sym('=')?;
        let negative = self.eat_sym('-');
        let value = match self.peek().clone() {
            Tok::Number { value, .. } => {
                self.bump();
                if negative {
                    -value
                } else {
                    value
                }
            }
            _ => return Err(self.error(&["real number"])),
        };
        self.declare_value(&name, name_span, Some(Complex64::new(value, 0.0)))?;
        self.ast.params.push(ParamDecl { name, value, span });
        Ok(())
    }

    fn op_stmt(&mut self) -> PResult<()> {
        let span = self.bump().1;
        let (name, name_span) = self.expect_name()?;
        self.expect_sym('=')?;
        let (expr, _) = self.expr()?;
        let scalar = self.scalar_value(&expr);
        self.declare_value(&name, name_span, scalar)?;
        self.ast.ops.push(OpDef { name, expr, span });
        Ok(())
    }

    fn tone_stmt(&mut self) -> PResult<()> {
        let span = self.bump().1;
        let (expr, _) = self.expr()?;
        self.expect_keyword("omega")?;
        self.expect_sym('=')?;
        let (omega, _) = self.expr()?;
        let value = match self.scalar_value(&omega) {
            Some(v) if v.im == 0.0 => v.re,
            _ => return Err(ParseError::new(omega.span, ParseErrorKind::NonRealFrequency)),
        };
        if !(value > 0.0 && value.is_finite()) {
            return Err(ParseError::new(omega.span, ParseErrorKind::NonPositiveFrequency));
        }
        self.ast.tones.push(ToneDecl { expr, omega, omega_value: value, span });
        Ok(())
    }

    /// Scalar value of an expression, or `None` if it involves operators.
    fn scalar_value(&self, e: &Expr) -> Option<Complex64> {
        let v = match &e.kind {
            ExprKind::Real(x) => Complex64::new(*x, 0.0),
            ExprKind::Imag(x) => Complex64::new(0.0, *x),
            ExprKind::Ident(n) => (*self.values.get(n)?)?,
            ExprKind::Call { .. } | ExprKind::Mat(_) => return None,
            ExprKind::Kron(a, b) => self.scalar_value(a)? * self.scalar_value(b)?,
            ExprKind::Neg(a) => -self.scalar_value(a)?,
            ExprKind::Binary { op, lhs, rhs } => {
                let (l, r) = (self.scalar_value(lhs)?, self.scalar_value(rhs)?);
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                }
            }
        };
        Some(v)
    }

    fn check_depth(depth: usize, span: Span) -> PResult<()> {
        if depth > MAX_DEPTH {
            Err(ParseError::new(span, ParseErrorKind::TooDeep(MAX_DEPTH)))
        } else {
            Ok(())
        }
    }

    fn expr(&mut self) -> PResult<(Expr, usize)> {
        self.expr_at(0)
    }

    // `level` counts syntactic nesting on the way down; the returned depth is
    // the height of the built tree. Both are capped.
    fn expr_at(&mut self, level: usize) -> PResult<(Expr, usize)> {
        Self::check_depth(level, self.span())?;
        let (mut lhs, mut depth) = self.term(level)?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok((lhs, depth)),
            };
            let span = self.bump().1;
            let (rhs, d) = self.term(level)?;
            depth = depth.max(d) + 1;
            Self::check_depth(depth, span)?;
            let start = lhs.span;
            lhs = Expr::new(ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }, start);
        }
    }

    fn term(&mut self, level: usize) -> PResult<(Expr, usize)> {
        let (mut lhs, mut depth) = self.unary(level)?;
        while *self.peek() == Tok::Sym('*') {
            let span = self.bump().1;
            let (rhs, d) = self.unary(level)?;
            depth = depth.max(d) + 1;
            Self::check_depth(depth, span)?;
            let start = lhs.span;
            lhs = Expr::new(ExprKind::Binary { op: BinOp::Mul, lhs: Box::new(lhs), rhs: Box::new(rhs) }, start);
        }
        Ok((lhs, depth))
    }

    fn unary(&mut self, level: usize) -> PResult<(Expr, usize)> {
        if *self.peek() == Tok::Sym('-') {
            let span = self.bump().1;
            Self::check_depth(level + 1, span)?;
            let (inner, d) = self.unary(level + 1)?;
            Self::check_depth(d + 1, span)?;
            return Ok((Expr::new(ExprKind::Neg(Box::new(inner)), span), d + 1));
        }
        self.primary(level)
    }

    fn primary(&mut self, level: usize) -> PResult<(Expr, usize)> {
        let (tok, span) = (self.peek().clone(), self.span());
        match tok {
            Tok::Number { value, .. } => {
                self.bump();
                Ok((Expr::new(ExprKind::Real(value), span), 1))
            }
            Tok::Imag(v) => {
                self.bump();
                Ok((Expr::new(ExprKind::Imag(v), span), 1))
            }
            Tok::Sym('(') => {
                self.bump();
                let (inner, d) = self.expr_at(level + 1)?;
                self.expect_sym(')')?;
                Ok((inner, d))
            }
            Tok::Ident(name) => {
                if name == "kron" {
                    return self.kron(level, span);
                }
                if name == "mat" {
                    return self.mat(level, span);
                }
                if let Some(builtin) = Builtin::from_name(&name) {
                    return self.call(builtin, span);
                }
                if RESERVED.contains(&name.as_str()) {
                    return Err(self.error(&["expression"]));
                }
                if !self.values.contains_key(&name) {
                    return Err(ParseError::new(span, ParseErrorKind::UnknownIdentifier(name)));
                }
                self.bump();
                Ok((Expr::new(ExprKind::Ident(name), span), 1))
            }
            _ => Err(self.error(&["expression"])),
        }
    }

    fn call(&mut self, builtin: Builtin, span: Span) -> PResult<(Expr, usize)> {
        self.bump();
        self.expect_sym('(')?;
        let space = match self.peek().clone() {
            Tok::Ident(s) => {
                if !self.spaces.contains_key(&s) {
                    return Err(ParseError::new(self.span(), ParseErrorKind::UnknownSpace(s)));
                }
                self.bump();
                s
            }
            _ => return Err(self.error(&["space name"])),
        };
        let indices = if builtin == Builtin::Proj {
            self.expect_sym(',')?;
            let (i, _) = self.expect_int()?;
            self.expect_sym(',')?;
            let (j, _) = self.expect_int()?;
            Some((i, j))
        } else {
            None
        };
        self.expect_sym(')')?;
        Ok((Expr::new(ExprKind::Call { builtin, space, indices }, span), 1))
    }

    fn kron(&mut self, level: usize, span: Span) -> PResult<(Expr, usize)> {
        self.bump();
        self.expect_sym('(')?;
        let (a, da) = self.expr_at(level + 1)?;
        self.expect_sym(',')?;
        let (b, db) = self.expr_at(level + 1)?;
        self.expect_sym(')')?;
        let depth = da.max(db) + 1;
        Self::check_depth(depth, span)?;
        Ok((Expr::new(ExprKind::Kron(Box::new(a), Box::new(b)), span), depth))
    }

    fn mat(&mut self, level: usize, span: Span) -> PResult<(Expr, usize)> {
        self.bump();
        self.expect_sym('[')?;
        let mut rows = Vec::new();
        let mut depth = 1;
        loop {
            self.expect_sym('[')?;
            let mut row = Vec::new();
            loop {
                let (e, d) = self.expr_at(level + 1)?;
                depth = depth.max(d + 1);
                row.push(e);
                if !self.eat_sym(',') {
                    break;
                }
            }
            self.expect_sym(']')?;
            rows.push(row);
            if !self.eat_sym(',') {
                break;
            }
        }
        self.expect_sym(']')?;
        Self::check_depth(depth, span)?;
        Ok((Expr::new(ExprKind::Mat(rows), span), depth))
    }
}

/// Parses a `.ham` document. Total: every input yields an AST or a located diagnostic.
pub fn parse_model(text: &str) -> Result<ModelSpecAst, ParseError> {
    let toks = lex(text)?;
    let parser = Parser { toks, pos: 0, ast: ModelSpecAst::default(), values: HashMap::new(), spaces: HashMap::new() };
    parser.file()
}
