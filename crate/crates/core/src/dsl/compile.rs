//! Evaluation of a parsed model into matrices on the full product space.
//!
//! Built-ins act on one declared factor and are padded with identities on the
//! others, factors ordered by declaration. Scalars combine with matrices as
//! multiples of the identity.

use std::collections::HashMap;

use num_complex::Complex64;

use super::ast::*;
use super::error::{CompileError, CompileErrorKind};
use crate::model::{MultiToneHamiltonian, ToneTerm};
use crate::operator::{make_standard_operator, Operator, OperatorError, StandardOp, MAX_DIM};

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Scalar(Complex64),
    Matrix(Operator),
}

struct Layout {
    dims: Vec<usize>,
    index: HashMap<String, usize>,
    total: usize,
}

impl Layout {
    fn new(spaces: &[SpaceDecl]) -> Result<Self, CompileError> {
        let mut total: usize = 1;
        let mut index = HashMap::new();
        for (k, s) in spaces.iter().enumerate() {
            total = total
                .checked_mul(s.dim)
                .filter(|&d| d <= MAX_DIM)
                .ok_or(CompileError::new(s.span, CompileErrorKind::DimensionCap { dim: total.saturating_mul(s.dim), cap: MAX_DIM }))?;
            index.insert(s.name.clone(), k);
        }
        Ok(Self { dims: spaces.iter().map(|s| s.dim).collect(), index, total })
    }

    /// `I ⊗ … ⊗ local ⊗ … ⊗ I` with `local` on factor `k`.
    fn embed(&self, local: &Operator, k: usize) -> Operator {
        let dk = self.dims[k];
        let left: usize = self.dims[..k].iter().product();
        let right: usize = self.dims[k + 1..].iter().product();
        let n = self.total;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for l in 0..left {
            for i in 0..dk {
                for j in 0..dk {
                    let v = local.get(i, j);
                    if v == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for r in 0..right {
                        let row = (l * dk + i) * right + r;
                        let col = (l * dk + j) * right + r;
                        data[row * n + col] = v;
                    }
                }
            }
        }
        Operator::from_vec(n, data).expect("embedded operator has the full dimension")
    }
}

struct Compiler<'a> {
    layout: Layout,
    env: HashMap<&'a str, Value>,
}

fn mismatch(span: Span, left: usize, right: usize) -> CompileError {
    CompileError::new(span, CompileErrorKind::DimensionMismatch { left, right })
}

fn map_op_error(span: Span, e: OperatorError) -> CompileError {
    let kind = match e {
        OperatorError::DimensionMismatch { left, right } => CompileErrorKind::DimensionMismatch { left, right },
        OperatorError::DimensionCap { dim, cap } => CompileErrorKind::DimensionCap { dim, cap },
        OperatorError::NonFinite { .. } => CompileErrorKind::NonFinite,
        _ => CompileErrorKind::NonFinite,
    };
    CompileError::new(span, kind)
}

impl<'a> Compiler<'a> {
    fn builtin(&self, builtin: Builtin, space: &str, indices: Option<(usize, usize)>, span: Span) -> Result<Operator, CompileError> {
        let k = self.layout.index[space];
        let dim = self.layout.dims[k];
        let kind = match builtin {
            Builtin::Id => StandardOp::Identity,
            Builtin::A => StandardOp::Annihilate,
            Builtin::Adag => StandardOp::Create,
            Builtin::Sx => StandardOp::SigmaX,
            Builtin::Sy => StandardOp::SigmaY,
            Builtin::Sz => StandardOp::SigmaZ,
            Builtin::Sp => StandardOp::SigmaPlus,
            Builtin::Sm => StandardOp::SigmaMinus,
            Builtin::Proj => {
                let (i, j) = indices.unwrap_or((0, 0));
                if i >= dim || j >= dim {
                    return Err(CompileError::new(span, CompileErrorKind::ProjIndex { i, j, dim }));
                }
                StandardOp::Projector(i, j)
            }
        };
        let pauli = matches!(builtin, Builtin::Sx | Builtin::Sy | Builtin::Sz | Builtin::Sp | Builtin::Sm);
        if pauli && dim != 2 {
            return Err(CompileError::new(span, CompileErrorKind::PauliDim { builtin: builtin.name(), space: space.to_string(), dim }));
        }
        let local = make_standard_operator(kind, dim).map_err(|e| map_op_error(span, e))?;
        Ok(self.layout.embed(&local, k))
    }

    fn eval(&self, e: &Expr) -> Result<Value, CompileError> {
        let span = e.span;
        Ok(match &e.kind {
            ExprKind::Real(x) => Value::Scalar(Complex64::new(*x, 0.0)),
            ExprKind::Imag(x) => Value::Scalar(Complex64::new(0.0, *x)),
            ExprKind::Ident(n) => self.env.get(n.as_str()).cloned().expect("parser resolved every name"),
            ExprKind::Call { builtin, space, indices } => Value::Matrix(self.builtin(*builtin, space, *indices, span)?),
            ExprKind::Mat(rows) => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(CompileError::new(span, CompileErrorKind::NotSquare { rows: n, lens: rows.iter().map(Vec::len).collect() }));
                }
                if n > MAX_DIM {
                    return Err(CompileError::new(span, CompileErrorKind::DimensionCap { dim: n, cap: MAX_DIM }));
                }
                let mut data = Vec::with_capacity(n * n);
                for entry in rows.iter().flatten() {
                    match self.eval(entry)? {
                        Value::Scalar(c) => data.push(c),
                        Value::Matrix(_) => return Err(CompileError::new(entry.span, CompileErrorKind::NonScalarEntry)),
                    }
                }
                Value::Matrix(Operator::from_vec(n, data).map_err(|e| map_op_error(span, e))?)
            }
            ExprKind::Kron(a, b) => match (self.eval(a)?, self.eval(b)?) {
                (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x * y),
                (Value::Scalar(x), Value::Matrix(m)) | (Value::Matrix(m), Value::Scalar(x)) => Value::Matrix(m.scale(x)),
                (Value::Matrix(x), Value::Matrix(y)) => Value::Matrix(x.tensor_product(&y).map_err(|e| map_op_error(span, e))?),
            },
            ExprKind::Neg(a) => match self.eval(a)? {
                Value::Scalar(x) => Value::Scalar(-x),
                Value::Matrix(m) => Value::Matrix(m.scale_real(-1.0)),
            },
            ExprKind::Binary { op, lhs, rhs } => binary(*op, self.eval(lhs)?, self.eval(rhs)?, span)?,
        })
    }
}

fn scalar_identity(c: Complex64, dim: usize) -> Operator {
    Operator::identity(dim).scale(c)
}

fn binary(op: BinOp, l: Value, r: Value, span: Span) -> Result<Value, CompileError> {
    use Value::{Matrix, Scalar};
    Ok(match (op, l, r) {
        (BinOp::Add, Scalar(x), Scalar(y)) => Scalar(x + y),
        (BinOp::Sub, Scalar(x), Scalar(y)) => Scalar(x - y),
        (BinOp::Mul, Scalar(x), Scalar(y)) => Scalar(x * y),
        (BinOp::Mul, Scalar(x), Matrix(m)) | (BinOp::Mul, Matrix(m), Scalar(x)) => Matrix(m.scale(x)),
        (BinOp::Mul, Matrix(a), Matrix(b)) => {
            if a.dim() != b.dim() {
                return Err(mismatch(span, a.dim(), b.dim()));
            }
            Matrix(&a * &b)
        }
        (op, Scalar(x), Matrix(m)) => {
            let s = scalar_identity(x, m.dim());
            Matrix(if op == BinOp::Add { &s + &m } else { &s - &m })
        }
        (op, Matrix(m), Scalar(x)) => {
            let s = scalar_identity(x, m.dim());
            Matrix(if op == BinOp::Add { &m + &s } else { &m - &s })
        }
        (op, Matrix(a), Matrix(b)) => {
            if a.dim() != b.dim() {
                return Err(mismatch(span, a.dim(), b.dim()));
            }
            Matrix(if op == BinOp::Add { &a + &b } else { &a - &b })
        }
    })
}

/// Compiles a parsed model. Without `space` declarations the model dimension
/// is taken from the first matrix-valued tone.
pub fn compile_model(ast: &ModelSpecAst) -> Result<MultiToneHamiltonian, CompileError> {
    let layout = Layout::new(&ast.spaces)?;
    let mut compiler = Compiler { layout, env: HashMap::new() };
    for p in &ast.params {
        compiler.env.insert(&p.name, Value::Scalar(Complex64::new(p.value, 0.0)));
    }
    for o in &ast.ops {
        let v = compiler.eval(&o.expr)?;
        compiler.env.insert(&o.name, v);
    }
    let values: Vec<(Value, &ToneDecl)> = ast.tones.iter().map(|t| Ok((compiler.eval(&t.expr)?, t))).collect::<Result<_, CompileError>>()?;
    let model_dim = if ast.spaces.is_empty() {
        values
            .iter()
            .find_map(|(v, _)| match v {
                Value::Matrix(m) => Some(m.dim()),
                Value::Scalar(_) => None,
            })
            .unwrap_or(1)
    } else {
        compiler.layout.total
    };
    let mut tones = Vec::with_capacity(values.len());
    for (v, decl) in values {
        let h = match v {
            Value::Scalar(c) => scalar_identity(c, model_dim),
            Value::Matrix(m) => m,
        };
        if h.dim() != model_dim {
            return Err(mismatch(decl.expr.span, h.dim(), model_dim));
        }
        if !h.is_finite() {
            return Err(CompileError::new(decl.expr.span, CompileErrorKind::NonFinite));
        }
        tones.push(ToneTerm::new(h, decl.omega_value));
    }
    let span = ast.tones.first().map(|t| t.span).unwrap_or(Span::new(1, 1));
    MultiToneHamiltonian::new(tones).map_err(|e| CompileError::new(span, CompileErrorKind::Model(e)))
}
