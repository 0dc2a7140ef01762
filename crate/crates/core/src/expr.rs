//! Coefficient expression language.
//!
//! Problem coefficients are stated as small text formulas over two
//! primitives: `S`, the staircase value at the current point, and `x`, the
//! physical abscissa itself. Grammar (whitespace insignificant):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := '-' factor | primary ('^' factor)?
//! primary := number | 'S' | 'x' | 'pi' | 'e' | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and unary minus binds looser than `^`, so
//! `-S^2` means `-(S^2)` and `2^3^2` means `2^(3^2)`. Supported functions:
//! `sin`, `cos`, `tan`, `exp`, `ln`, `sqrt`, `abs`. Number literals are
//! unsigned decimals with optional fraction and exponent.
//!
//! Errors carry 0-based byte offsets into the source text.

use std::fmt;

/// Errors from parsing, evaluating, or differentiating expressions.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("empty expression")]
    Empty,

    #[error("syntax error at byte {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },

    #[error("unknown function '{name}' at byte {offset}")]
    UnknownFunction { offset: usize, name: String },

    #[error("division by zero in '{node}'")]
    DivisionByZero { node: String },

    #[error("ln of non-positive value {value} in '{node}'")]
    LogDomain { node: String, value: f64 },

    #[error("sqrt of negative value {value} in '{node}'")]
    SqrtDomain { node: String, value: f64 },

    #[error("non-finite result in '{node}'")]
    NonFinite { node: String },

    #[error("no differentiation rule for '{node}'")]
    UnsupportedDerivative { node: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

impl fmt::Display for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientExpr {
    Number(f64),
    VarS,
    VarX,
    Pi,
    E,
    Neg(Box<CoefficientExpr>),
    Add(Box<CoefficientExpr>, Box<CoefficientExpr>),
    Sub(Box<CoefficientExpr>, Box<CoefficientExpr>),
    Mul(Box<CoefficientExpr>, Box<CoefficientExpr>),
    Div(Box<CoefficientExpr>, Box<CoefficientExpr>),
    Pow(Box<CoefficientExpr>, Box<CoefficientExpr>),
    Call(Func, Box<CoefficientExpr>),
}

/// Parse a formula into its expression tree.
pub fn parse_coefficient(source: &str) -> Result<CoefficientExpr, ExprError> {
    let mut p = Parser {
        src: source.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.at_end() {
        return Err(ExprError::Empty);
    }
    let e = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(ExprError::Syntax {
            offset: p.pos,
            expected: "end of input".into(),
        });
    }
    Ok(e)
}

/// Evaluate with `S` bound to `s_value` and `x` bound to `x_value`.
pub fn eval_coefficient(
    expr: &CoefficientExpr,
    s_value: f64,
    x_value: f64,
) -> Result<f64, ExprError> {
    use CoefficientExpr::*;
    let v = match expr {
        Number(v) => *v,
        VarS => s_value,
        VarX => x_value,
        Pi => std::f64::consts::PI,
        E => std::f64::consts::E,
        Neg(u) => -eval_coefficient(u, s_value, x_value)?,
        Add(a, b) => {
            eval_coefficient(a, s_value, x_value)? + eval_coefficient(b, s_value, x_value)?
        }
        Sub(a, b) => {
            eval_coefficient(a, s_value, x_value)? - eval_coefficient(b, s_value, x_value)?
        }
        Mul(a, b) => {
            eval_coefficient(a, s_value, x_value)? * eval_coefficient(b, s_value, x_value)?
        }
        Div(a, b) => {
            let den = eval_coefficient(b, s_value, x_value)?;
            if den == 0.0 {
                return Err(ExprError::DivisionByZero {
                    node: expr.to_string(),
                });
            }
            eval_coefficient(a, s_value, x_value)? / den
        }
        Pow(a, b) => {
            let base = eval_coefficient(a, s_value, x_value)?;
            let exponent = eval_coefficient(b, s_value, x_value)?;
            base.powf(exponent)
        }
        Call(func, arg) => {
            let v = eval_coefficient(arg, s_value, x_value)?;
            match func {
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Tan => v.tan(),
                Func::Exp => v.exp(),
                Func::Ln => {
                    if v <= 0.0 {
                        return Err(ExprError::LogDomain {
                            node: expr.to_string(),
                            value: v,
                        });
                    }
                    v.ln()
                }
                Func::Sqrt => {
                    if v < 0.0 {
                        return Err(ExprError::SqrtDomain {
                            node: expr.to_string(),
                            value: v,
                        });
                    }
                    v.sqrt()
                }
                Func::Abs => v.abs(),
            }
        }
    };
    if !v.is_finite() {
        return Err(ExprError::NonFinite {
            node: expr.to_string(),
        });
    }
    Ok(v)
}

/// Derivative with respect to `S`, by a node-level rule table.
///
/// Supported: constants, `S`, negation, the four arithmetic operations,
/// powers with a constant exponent, and `sin`/`cos`/`exp`. Anything else —
/// in particular `x`, `tan`, `ln`, `sqrt`, `abs`, and powers with a
/// non-constant exponent — has no rule and reports a capability error.
/// No simplification is attempted.
pub fn differentiate_s(expr: &CoefficientExpr) -> Result<CoefficientExpr, ExprError> {
    use CoefficientExpr::*;
    Ok(match expr {
        Number(_) | Pi | E => Number(0.0),
        VarS => Number(1.0),
        VarX => {
            return Err(ExprError::UnsupportedDerivative {
                node: expr.to_string(),
            })
        }
        Neg(u) => Neg(Box::new(differentiate_s(u)?)),
        Add(a, b) => Add(
            Box::new(differentiate_s(a)?),
            Box::new(differentiate_s(b)?),
        ),
        Sub(a, b) => Sub(
            Box::new(differentiate_s(a)?),
            Box::new(differentiate_s(b)?),
        ),
        Mul(a, b) => Add(
            Box::new(Mul(Box::new(differentiate_s(a)?), b.clone())),
            Box::new(Mul(a.clone(), Box::new(differentiate_s(b)?))),
        ),
        Div(a, b) => Div(
            Box::new(Sub(
                Box::new(Mul(Box::new(differentiate_s(a)?), b.clone())),
                Box::new(Mul(a.clone(), Box::new(differentiate_s(b)?))),
            )),
            Box::new(Mul(b.clone(), b.clone())),
        ),
        Pow(base, exponent) => match exponent.as_ref() {
            Number(c) => Mul(
                Box::new(Mul(
                    Box::new(Number(*c)),
                    Box::new(Pow(base.clone(), Box::new(Number(c - 1.0)))),
                )),
                Box::new(differentiate_s(base)?),
            ),
            _ => {
                return Err(ExprError::UnsupportedDerivative {
                    node: expr.to_string(),
                })
            }
        },
        Call(Func::Sin, u) => Mul(
            Box::new(Call(Func::Cos, u.clone())),
            Box::new(differentiate_s(u)?),
        ),
        Call(Func::Cos, u) => Neg(Box::new(Mul(
            Box::new(Call(Func::Sin, u.clone())),
            Box::new(differentiate_s(u)?),
        ))),
        Call(Func::Exp, u) => Mul(
            Box::new(Call(Func::Exp, u.clone())),
            Box::new(differentiate_s(u)?),
        ),
        Call(_, _) => {
            return Err(ExprError::UnsupportedDerivative {
                node: expr.to_string(),
            })
        }
    })
}

// ---------------------------------------------------------------------------
// Canonical rendering. `parse_coefficient(e.to_string())` reconstructs `e`
// exactly for any tree the parser can produce.

fn prec(e: &CoefficientExpr) -> u8 {
    use CoefficientExpr::*;
    match e {
        Add(..) | Sub(..) => 1,
        Mul(..) | Div(..) => 2,
        Neg(..) => 3,
        Pow(..) => 4,
        _ => 5,
    }
}

fn render(e: &CoefficientExpr, out: &mut String) {
    use CoefficientExpr::*;
    let child = |c: &CoefficientExpr, parent: u8, is_right: bool, out: &mut String| {
        let p = prec(c);
        let needs_paren = p < parent || (p == parent && is_right);
        if needs_paren {
            out.push('(');
            render(c, out);
            out.push(')');
        } else {
            render(c, out);
        }
    };
    match e {
        Number(v) => {
            // Negative constants only arise from hand-built or derivative
            // trees; parenthesize them so the rendering stays parseable.
            if *v < 0.0 {
                out.push_str(&format!("({v})"));
            } else {
                out.push_str(&format!("{v}"));
            }
        }
        VarS => out.push('S'),
        VarX => out.push('x'),
        Pi => out.push_str("pi"),
        E => out.push('e'),
        Neg(u) => {
            out.push('-');
            child(u, 3, false, out);
        }
        Add(a, b) => {
            child(a, 1, false, out);
            out.push('+');
            child(b, 1, true, out);
        }
        Sub(a, b) => {
            child(a, 1, false, out);
            out.push('-');
            child(b, 1, true, out);
        }
        Mul(a, b) => {
            child(a, 2, false, out);
            out.push('*');
            child(b, 2, true, out);
        }
        Div(a, b) => {
            child(a, 2, false, out);
            out.push('/');
            child(b, 2, true, out);
        }
        Pow(a, b) => {
            // Left operand of '^' must be a primary; the right operand may
            // be another power or a negation (right associativity, and the
            // grammar's '-' factor rule).
            let p = prec(a);
            if p < 5 {
                out.push('(');
                render(a, out);
                out.push(')');
            } else {
                render(a, out);
            }
            out.push('^');
            let p = prec(b);
            if p < 3 {
                out.push('(');
                render(b, out);
                out.push(')');
            } else {
                render(b, out);
            }
        }
        Call(func, arg) => {
            out.push_str(func.name());
            out.push('(');
            render(arg, out);
            out.push(')');
        }
    }
}

impl fmt::Display for CoefficientExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        render(self, &mut s);
        f.write_str(&s)
    }
}

// ---------------------------------------------------------------------------
// Recursive-descent parser over bytes (the grammar is pure ASCII).

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn expr(&mut self) -> Result<CoefficientExpr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = CoefficientExpr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = CoefficientExpr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<CoefficientExpr, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = CoefficientExpr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = CoefficientExpr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // factor := '-' factor | primary ('^' factor)?
    // Taking '-' at this level (instead of inside the exponent chain) makes
    // unary minus bind looser than '^'.
    fn factor(&mut self) -> Result<CoefficientExpr, ExprError> {
        self.skip_ws();
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.factor()?;
            return Ok(CoefficientExpr::Neg(Box::new(inner)));
        }
        let base = self.primary()?;
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exponent = self.factor()?;
            return Ok(CoefficientExpr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<CoefficientExpr, ExprError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(ExprError::Syntax {
                        offset: self.pos,
                        expected: "')'".into(),
                    });
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            _ => Err(ExprError::Syntax {
                offset: self.pos,
                expected: "a number, 'S', 'x', 'pi', 'e', a function call, or '('".into(),
            }),
        }
    }

    fn number(&mut self) -> Result<CoefficientExpr, ExprError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            if !matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                return Err(ExprError::Syntax {
                    offset: self.pos,
                    expected: "a digit after the decimal point".into(),
                });
            }
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if !matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                return Err(ExprError::Syntax {
                    offset: self.pos,
                    expected: "exponent digits".into(),
                });
            }
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        let value: f64 = text.parse().map_err(|_| ExprError::Syntax {
            offset: start,
            expected: "a number literal".into(),
        })?;
        if !value.is_finite() {
            return Err(ExprError::Syntax {
                offset: start,
                expected: "a finite number literal".into(),
            });
        }
        Ok(CoefficientExpr::Number(value))
    }

    fn identifier(&mut self) -> Result<CoefficientExpr, ExprError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii letters");
        match name {
            "S" => return Ok(CoefficientExpr::VarS),
            "x" => return Ok(CoefficientExpr::VarX),
            "pi" => return Ok(CoefficientExpr::Pi),
            "e" => return Ok(CoefficientExpr::E),
            _ => {}
        }
        let Some(func) = Func::from_name(name) else {
            return Err(ExprError::UnknownFunction {
                offset: start,
                name: name.to_string(),
            });
        };
        self.skip_ws();
        if self.peek() != Some(b'(') {
            return Err(ExprError::Syntax {
                offset: self.pos,
                expected: format!("'(' after function name '{func}'"),
            });
        }
        self.pos += 1;
        let arg = self.expr()?;
        self.skip_ws();
        if self.peek() != Some(b')') {
            return Err(ExprError::Syntax {
                offset: self.pos,
                expected: "')'".into(),
            });
        }
        self.pos += 1;
        Ok(CoefficientExpr::Call(func, Box::new(arg)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn eval_str(src: &str, s: f64, x: f64) -> f64 {
        eval_coefficient(&parse_coefficient(src).unwrap(), s, x).unwrap()
    }

    #[test]
    fn grammar_basics() {
        assert_eq!(eval_str("1/(1+S)", 1.0, 0.0), 0.5);
        assert_eq!(eval_str("S^2+1", 2.0, 0.0), 5.0);
        assert_eq!(eval_str("exp(-S)", 0.0, 0.0), 1.0);
        assert_eq!(eval_str("2^3^2", 0.0, 0.0), 512.0);
        assert_eq!(eval_str("1/(1+S^2)", 1.0, 0.0), 0.5);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        assert_eq!(eval_str("-2^2", 0.0, 0.0), -4.0);
        assert_eq!(eval_str("(-2)^2", 0.0, 0.0), 4.0);
        assert_eq!(eval_str("-S^2", 3.0, 0.0), -9.0);
        assert_eq!(eval_str("2^-1", 0.0, 0.0), 0.5);
    }

    #[test]
    fn variables_constants_and_whitespace() {
        assert_eq!(eval_str(" S + x ", 2.0, 3.0), 5.0);
        assert_relative_eq!(
            eval_str("pi*e", 0.0, 0.0),
            std::f64::consts::PI * std::f64::consts::E,
            max_relative = 1e-15
        );
        assert_eq!(eval_str("2e3", 0.0, 0.0), 2000.0);
        assert_eq!(eval_str("1.5E-1", 0.0, 0.0), 0.15);
    }

    #[test]
    fn exp_at_staircase_of_pi() {
        // S = pi^0.8 = 2.498733263046363, exp of it = 12.167071715442221.
        let s = std::f64::consts::PI.powf(0.8);
        assert_relative_eq!(s, 2.498733263046363, max_relative = 1e-15);
        assert_relative_eq!(
            eval_str("exp(S)", s, 0.0),
            12.167071715442221,
            max_relative = 1e-14
        );
    }

    #[test]
    fn division_by_zero_names_node() {
        let e = parse_coefficient("1/(1+S)").unwrap();
        let err = eval_coefficient(&e, -1.0, 0.0).unwrap_err();
        assert_eq!(
            err,
            ExprError::DivisionByZero {
                node: "1/(1+S)".into()
            }
        );
    }

    #[test]
    fn eval_domain_errors() {
        let e = parse_coefficient("ln(S)").unwrap();
        assert!(matches!(
            eval_coefficient(&e, 0.0, 0.0),
            Err(ExprError::LogDomain { .. })
        ));
        let e = parse_coefficient("sqrt(S)").unwrap();
        assert!(matches!(
            eval_coefficient(&e, -4.0, 0.0),
            Err(ExprError::SqrtDomain { .. })
        ));
        let e = parse_coefficient("exp(S)").unwrap();
        assert!(matches!(
            eval_coefficient(&e, 1e9, 0.0),
            Err(ExprError::NonFinite { .. })
        ));
    }

    #[test]
    fn syntax_error_offsets() {
        match parse_coefficient("1+") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("unexpected: {other:?}"),
        }
        match parse_coefficient("(1+S") {
            Err(ExprError::Syntax { offset, expected }) => {
                assert_eq!(offset, 4);
                assert_eq!(expected, "')'");
            }
            other => panic!("unexpected: {other:?}"),
        }
        match parse_coefficient("foo(S)") {
            Err(ExprError::UnknownFunction { offset, name }) => {
                assert_eq!(offset, 0);
                assert_eq!(name, "foo");
            }
            other => panic!("unexpected: {other:?}"),
        }
        match parse_coefficient("S x") {
            Err(ExprError::Syntax { offset, expected }) => {
                assert_eq!(offset, 2);
                assert_eq!(expected, "end of input");
            }
            other => panic!("unexpected: {other:?}"),
        }
        match parse_coefficient("1..2") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("unexpected: {other:?}"),
        }
        match parse_coefficient("2e") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("unexpected: {other:?}"),
        }
        assert_eq!(parse_coefficient(""), Err(ExprError::Empty));
        assert_eq!(parse_coefficient("  \t "), Err(ExprError::Empty));
    }

    #[test]
    fn derivative_rule_table() {
        let d = |src: &str| differentiate_s(&parse_coefficient(src).unwrap());
        // d/dS S^2 at S=3 -> 6
        let e = d("S^2").unwrap();
        assert_eq!(eval_coefficient(&e, 3.0, 0.0).unwrap(), 6.0);
        // product rule
        let e = d("S*sin(S)").unwrap();
        let s = 0.7;
        assert_relative_eq!(
            eval_coefficient(&e, s, 0.0).unwrap(),
            s.sin() + s * s.cos(),
            max_relative = 1e-14
        );
        // quotient rule
        let e = d("1/(1+S)").unwrap();
        let s = 2.0;
        assert_relative_eq!(
            eval_coefficient(&e, s, 0.0).unwrap(),
            -1.0 / ((1.0 + s) * (1.0 + s)),
            max_relative = 1e-14
        );
        // chain rule through exp, cos
        let e = d("exp(-S^2)").unwrap();
        let s = 0.4;
        assert_relative_eq!(
            eval_coefficient(&e, s, 0.0).unwrap(),
            -2.0 * s * (-s * s).exp(),
            max_relative = 1e-14
        );
        let e = d("cos(2*S)").unwrap();
        assert_relative_eq!(
            eval_coefficient(&e, s, 0.0).unwrap(),
            -2.0 * (2.0 * s).sin(),
            max_relative = 1e-14
        );
        // unsupported nodes
        assert!(matches!(d("x"), Err(ExprError::UnsupportedDerivative { .. })));
        assert!(matches!(d("tan(S)"), Err(ExprError::UnsupportedDerivative { .. })));
        assert!(matches!(d("ln(S)"), Err(ExprError::UnsupportedDerivative { .. })));
        assert!(matches!(d("S^S"), Err(ExprError::UnsupportedDerivative { .. })));
        assert!(matches!(d("sqrt(S)"), Err(ExprError::UnsupportedDerivative { .. })));
    }

    #[test]
    fn canonical_text_round_trips_handwritten() {
        for src in [
            "1/(1+S)",
            "1/(1+S^2)",
            "S^2+1",
            "exp(-S)",
            "-S^2",
            "(-S)^2",
            "2^3^2",
            "S*x+x^2",
            "1-(2-S)",
            "S/(x*pi)",
            "sin(cos(S))",
            "2^-3",
        ] {
            let e = parse_coefficient(src).unwrap();
            let printed = e.to_string();
            let reparsed = parse_coefficient(&printed).unwrap();
            assert_eq!(e, reparsed, "{src} printed as {printed}");
        }
    }

    fn arb_expr() -> impl Strategy<Value = CoefficientExpr> {
        let leaf = prop_oneof![
            (0.0..100.0f64).prop_map(CoefficientExpr::Number),
            Just(CoefficientExpr::VarS),
            Just(CoefficientExpr::VarX),
            Just(CoefficientExpr::Pi),
            Just(CoefficientExpr::E),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            let func = prop_oneof![
                Just(Func::Sin),
                Just(Func::Cos),
                Just(Func::Tan),
                Just(Func::Exp),
                Just(Func::Ln),
                Just(Func::Sqrt),
                Just(Func::Abs),
            ];
            prop_oneof![
                inner.clone().prop_map(|e| CoefficientExpr::Neg(Box::new(e))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| CoefficientExpr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| CoefficientExpr::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| CoefficientExpr::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| CoefficientExpr::Div(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| CoefficientExpr::Pow(Box::new(a), Box::new(b))),
                (func, inner).prop_map(|(f, e)| CoefficientExpr::Call(f, Box::new(e))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let printed = e.to_string();
            let reparsed = parse_coefficient(&printed)
                .unwrap_or_else(|err| panic!("{printed}: {err}"));
            prop_assert_eq!(&e, &reparsed, "printed: {}", printed);
        }

        #[test]
        fn evaluation_is_pure(e in arb_expr(), s in 0.0..10.0f64, x in 0.0..10.0f64) {
            let first = eval_coefficient(&e, s, x);
            let second = eval_coefficient(&e, s, x);
            match (first, second) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
                (Err(a), Err(b)) => prop_assert_eq!(a, b),
                (a, b) => prop_assert!(false, "diverging outcomes: {:?} vs {:?}", a, b),
            }
        }
    }
}
