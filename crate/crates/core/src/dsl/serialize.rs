//! Canonical text form: spaces, params, ops, tones, with minimal parentheses.

use std::fmt::Write;

use super::ast::*;

const NEG_PRECEDENCE: u8 = 3;
const ATOM_PRECEDENCE: u8 = 4;

fn precedence(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary { op, .. } => op.precedence(),
        ExprKind::Neg(_) => NEG_PRECEDENCE,
        _ => ATOM_PRECEDENCE,
    }
}

fn write_wrapped(e: &Expr, paren: bool, out: &mut String) {
    if paren {
        out.push('(');
        write_expr(e, out);
        out.push(')');
    } else {
        write_expr(e, out);
    }
}

fn write_expr(e: &Expr, out: &mut String) {
    match &e.kind {
        ExprKind::Real(x) => {
            let _ = write!(out, "{x}");
        }
        ExprKind::Imag(x) => {
            let _ = write!(out, "{x}i");
        }
        ExprKind::Ident(n) => out.push_str(n),
        ExprKind::Call { builtin, space, indices } => {
            let _ = match indices {
                Some((i, j)) => write!(out, "{}({space}, {i}, {j})", builtin.name()),
                None => write!(out, "{}({space})", builtin.name()),
            };
        }
        ExprKind::Mat(rows) => {
            out.push_str("mat[");
            for (r, row) in rows.iter().enumerate() {
                if r > 0 {
                    out.push_str(", ");
                }
                out.push('[');
                for (c, entry) in row.iter().enumerate() {
                    if c > 0 {
                        out.push_str(", ");
                    }
                    write_expr(entry, out);
                }
                out.push(']');
            }
            out.push(']');
        }
        ExprKind::Kron(a, b) => {
            out.push_str("kron(");
            write_expr(a, out);
            out.push_str(", ");
            write_expr(b, out);
            out.push(')');
        }
        ExprKind::Neg(inner) => {
            out.push('-');
            write_wrapped(inner, precedence(inner) < NEG_PRECEDENCE, out);
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            write_wrapped(lhs, precedence(lhs) < p, out);
            let _ = write!(out, " {} ", op.symbol());
            write_wrapped(rhs, precedence(rhs) <= p, out);
        }
    }
}

pub fn serialize_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, &mut out);
    out
}

/// Canonical text; reparsing it yields a structurally equal AST.
pub fn serialize_model(ast: &ModelSpecAst) -> String {
    let mut sections = Vec::new();
    if !ast.spaces.is_empty() {
        sections.push(ast.spaces.iter().map(|s| format!("space {} {}\n", s.name, s.dim)).collect::<String>());
    }
    if !ast.params.is_empty() {
        sections.push(ast.params.iter().map(|p| format!("param {} = {}\n", p.name, p.value)).collect::<String>());
    }
    if !ast.ops.is_empty() {
        sections.push(ast.ops.iter().map(|o| format!("op {} = {}\n", o.name, serialize_expr(&o.expr))).collect::<String>());
    }
    if !ast.tones.is_empty() {
        sections.push(
            ast.tones
                .iter()
                .map(|t| format!("tone {} omega = {}\n", serialize_expr(&t.expr), serialize_expr(&t.omega)))
                .collect::<String>(),
        );
    }
    sections.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_model;

    fn round_trip(text: &str) -> String {
        let ast = parse_model(text).unwrap();
        let out = serialize_model(&ast);
        let again = parse_model(&out).unwrap_or_else(|e| panic!("{e}\n{out}"));
        assert!(ast.structurally_eq(&again), "{out}");
        out
    }

    #[test]
    fn minimal_canonical_text() {
        let out = round_trip("space qubit 2\nparam g = 0.1\nop drive = g * sp(qubit)\ntone drive omega = 10.0\n");
        assert_eq!(out, "space qubit 2\n\nparam g = 0.1\n\nop drive = g * sp(qubit)\n\ntone drive omega = 10\n");
    }

    #[test]
    fn parentheses_are_minimal_but_sufficient() {
        let out = round_trip("space q 2\nop x = (sx(q) - (sy(q) - sz(q))) * (-(sx(q) + 1)) * --2i\ntone x omega = 1\n");
        assert!(out.contains("op x = (sx(q) - (sy(q) - sz(q))) * -(sx(q) + 1) * --2i"), "{out}");
        let out = round_trip("space q 2\nop x = sx(q) * (sy(q) * sz(q)) + (1 + 2)\ntone x omega = 1\n");
        assert!(out.contains("op x = sx(q) * (sy(q) * sz(q)) + (1 + 2)"), "{out}");
    }

    #[test]
    fn interleaved_declarations_are_grouped() {
        let out = round_trip("space q 2\nop x = sx(q)\nparam g = -0.5\nspace c 3\ntone g * x omega = 2\nop y = a(c)\ntone y omega = 3.5\n");
        let kinds: Vec<&str> = out.lines().filter(|l| !l.is_empty()).map(|l| l.split(' ').next().unwrap()).collect();
        assert_eq!(kinds, vec!["space", "space", "param", "op", "op", "tone", "tone"]);
    }

    #[test]
    fn deterministic() {
        let text = "space r 3\nop p = proj(r, 2, 0) + mat[[0, 1e-3, 0], [0, 0, 0], [0, 0, 0.5i]]\nop k = kron(p, mat[[1]])\ntone k omega = 1.25e1\n";
        assert_eq!(round_trip(text), round_trip(text));
    }
}
