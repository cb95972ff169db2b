//! Syntax tree for `.ham` model files.

use std::fmt;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl Span {
    pub fn new(line: usize, col: usize) -> Self {
        Self { line, col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Id,
    A,
    Adag,
    Sx,
    Sy,
    Sz,
    Sp,
    Sm,
    Proj,
}

impl Builtin {
    pub const ALL: [Builtin; 9] =
        [Builtin::Id, Builtin::A, Builtin::Adag, Builtin::Sx, Builtin::Sy, Builtin::Sz, Builtin::Sp, Builtin::Sm, Builtin::Proj];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Id => "id",
            Builtin::A => "a",
            Builtin::Adag => "adag",
            Builtin::Sx => "sx",
            Builtin::Sy => "sy",
            Builtin::Sz => "sz",
            Builtin::Sp => "sp",
            Builtin::Sm => "sm",
            Builtin::Proj => "proj",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Real(f64),
    /// Imaginary literal such as `2i`, holding the real factor.
    Imag(f64),
    Ident(String),
    Call { builtin: Builtin, space: String, indices: Option<(usize, usize)> },
    Mat(Vec<Vec<Expr>>),
    Kron(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Self { kind, span }
    }

    pub fn without_spans(&self) -> Expr {
        let kind = match &self.kind {
            ExprKind::Mat(rows) => ExprKind::Mat(rows.iter().map(|r| r.iter().map(Expr::without_spans).collect()).collect()),
            ExprKind::Kron(a, b) => ExprKind::Kron(Box::new(a.without_spans()), Box::new(b.without_spans())),
            ExprKind::Neg(a) => ExprKind::Neg(Box::new(a.without_spans())),
            ExprKind::Binary { op, lhs, rhs } => {
                ExprKind::Binary { op: *op, lhs: Box::new(lhs.without_spans()), rhs: Box::new(rhs.without_spans()) }
            }
            other => other.clone(),
        };
        Expr { kind, span: Span::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceDecl {
    pub name: String,
    pub dim: usize,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamDecl {
    pub name: String,
    pub value: f64,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpDef {
    pub name: String,
    pub expr: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToneDecl {
    pub expr: Expr,
    pub omega: Expr,
    /// Frequency evaluated at parse time; always positive and finite.
    pub omega_value: f64,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelSpecAst {
    pub spaces: Vec<SpaceDecl>,
    pub params: Vec<ParamDecl>,
    pub ops: Vec<OpDef>,
    pub tones: Vec<ToneDecl>,
}

impl ModelSpecAst {
    /// Copy with every span reset, for structural comparison.
    pub fn without_spans(&self) -> ModelSpecAst {
        let zero = Span::default();
        ModelSpecAst {
            spaces: self.spaces.iter().map(|s| SpaceDecl { span: zero, ..s.clone() }).collect(),
            params: self.params.iter().map(|p| ParamDecl { span: zero, ..p.clone() }).collect(),
            ops: self
                .ops
                .iter()
                .map(|o| OpDef { name: o.name.clone(), expr: o.expr.without_spans(), span: zero })
                .collect(),
            tones: self
                .tones
                .iter()
                .map(|t| ToneDecl { expr: t.expr.without_spans(), omega: t.omega.without_spans(), omega_value: t.omega_value, span: zero })
                .collect(),
        }
    }

    pub fn structurally_eq(&self, other: &ModelSpecAst) -> bool {
        self.without_spans() == other.without_spans()
    }
}
