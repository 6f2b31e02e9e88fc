//! Field expression language.
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := "-" factor | atom ("^" integer)?
//! atom   := number | ident | func "(" expr ")" | "(" expr ")"
//! func   := "sqrt" | "exp" | "sin" | "cos"
//! ident  := "x" digit+ | defined-name
//! ```

use std::fmt;

use crate::autodiff::{checked_div, AutodiffError, Scalar};

use super::FieldError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Sin,
    Cos,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based coordinate index (`x1` is `Var(0)`).
    Var(usize),
    /// A named definition and its slot in the evaluation order.
    Def(String, usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Evaluate at coordinates `x`, with `defs[k]` the value of definition
    /// slot `k`.
    pub fn eval<S: Scalar>(&self, x: &[S], defs: &[S]) -> Result<S, AutodiffError> {
        Ok(match self {
            Expr::Num(v) => S::from_f64(*v),
            Expr::Var(i) => *x.get(*i).ok_or_else(|| {
                AutodiffError::Domain(format!("x{} used in a {}-dimensional field", i + 1, x.len()))
            })?,
            Expr::Def(_, k) => defs[*k],
            Expr::Neg(e) => -e.eval(x, defs)?,
            Expr::Bin(op, l, r) => {
                let (l, r) = (l.eval(x, defs)?, r.eval(x, defs)?);
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => checked_div(l, r)?,
                }
            }
            Expr::Pow(e, k) => e.eval(x, defs)?.powi(*k as i32),
            Expr::Call(f, e) => {
                let v = e.eval(x, defs)?;
                match f {
                    Func::Sqrt => {
                        if v.value() < crate::autodiff::DENOMINATOR_FLOOR {
                            return Err(AutodiffError::Domain(format!(
                                "sqrt of {:e}",
                                v.value()
                            )));
                        }
                        v.sqrt()
                    }
                    Func::Exp => v.exp(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                }
            }
        })
    }

    /// The literal `0`, which lets callers skip terms.
    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    /// Largest coordinate index referenced, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Def(..) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.arity(),
            Expr::Bin(_, l, r) => l.arity().max(r.arity()),
        }
    }

    pub(crate) fn visit_defs<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Def(name, _) => out.push(name),
            Expr::Num(_) | Expr::Var(_) => {}
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.visit_defs(out),
            Expr::Bin(_, l, r) => {
                l.visit_defs(out);
                r.visit_defs(out);
            }
        }
    }

    pub(crate) fn relink(&mut self, slot_of: &dyn Fn(&str) -> usize) {
        match self {
            Expr::Def(name, k) => *k = slot_of(name),
            Expr::Num(_) | Expr::Var(_) => {}
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.relink(slot_of),
            Expr::Bin(_, l, r) => {
                l.relink(slot_of);
                r.relink(slot_of);
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Def(name, _) => f.write_str(name),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, l, r) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                };
                write!(f, "({l} {sym} {r})")
            }
            Expr::Pow(e, k) => write!(f, "({e})^{k}"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Int(u32),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize), FieldError> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[self.pos..];
        let Some(c) = rest.chars().next() else {
            return Ok((Tok::End, start));
        };
        if c.is_ascii_digit() || c == '.' {
            let bytes = rest.as_bytes();
            let mut end = 0;
            let mut is_int = true;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
            if end < bytes.len() && bytes[end] == b'.' {
                is_int = false;
                end += 1;
                while end < bytes.len() && bytes[end].is_ascii_digit() {
                    end += 1;
                }
            }
            if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                let mut k = end + 1;
                if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                    k += 1;
                }
                if k < bytes.len() && bytes[k].is_ascii_digit() {
                    while k < bytes.len() && bytes[k].is_ascii_digit() {
                        k += 1;
                    }
                    is_int = false;
                    end = k;
                }
            }
            let text = &rest[..end];
            self.pos += end;
            let v: f64 = text.parse().map_err(|_| FieldError::Syntax {
                offset: start,
                message: format!("malformed number '{text}'"),
            })?;
            let tok = match (is_int, text.parse::<u32>()) {
                (true, Ok(k)) => Tok::Int(k),
                _ => Tok::Num(v),
            };
            return Ok((tok, start));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let end = rest
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(rest.len());
            self.pos += end;
            return Ok((Tok::Ident(rest[..end].to_string()), start));
        }
        if "+-*/^()".contains(c) {
            self.pos += 1;
            return Ok((Tok::Op(c), start));
        }
        Err(FieldError::Syntax { offset: start, message: format!("unexpected character '{c}'") })
    }
}

struct Parser<'a, 'n> {
    lexer: Lexer<'a>,
    tok: Tok,
    at: usize,
    names: &'n [String],
}

impl<'a, 'n> Parser<'a, 'n> {
    fn new(src: &'a str, names: &'n [String]) -> Result<Self, FieldError> {
        let mut lexer = Lexer { src, pos: 0 };
        let (tok, at) = lexer.next()?;
        Ok(Parser { lexer, tok, at, names })
    }

    fn bump(&mut self) -> Result<(), FieldError> {
        let (tok, at) = self.lexer.next()?;
        self.tok = tok;
        self.at = at;
        Ok(())
    }

    fn syntax(&self, message: impl Into<String>) -> FieldError {
        FieldError::Syntax { offset: self.at, message: message.into() }
    }

    fn expect(&mut self, c: char) -> Result<(), FieldError> {
        if self.tok == Tok::Op(c) {
            self.bump()
        } else {
            Err(self.syntax(format!("expected '{c}'")))
        }
    }

    fn expr(&mut self) -> Result<Expr, FieldError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, FieldError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.tok {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, FieldError> {
        if self.tok == Tok::Op('-') {
            self.bump()?;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if self.tok != Tok::Op('^') {
            return Ok(base);
        }
        self.bump()?;
        match self.tok {
            Tok::Int(k) => {
                self.bump()?;
                Ok(Expr::Pow(Box::new(base), k))
            }
            _ => Err(FieldError::NonIntegerExponent { offset: self.at }),
        }
    }

    fn atom(&mut self) -> Result<Expr, FieldError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Expr::Num(v))
            }
            Tok::Int(k) => {
                self.bump()?;
                Ok(Expr::Num(f64::from(k)))
            }
            Tok::Op('(') => {
                self.bump()?;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let offset = self.at;
                self.bump()?;
                if let Some(func) = Func::from_name(&name) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                if let Some(k) = self.names.iter().position(|d| *d == name) {
                    return Ok(Expr::Def(name, k));
                }
                if let Some(digits) = name.strip_prefix('x') {
                    if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                        if let Ok(k) = digits.parse::<usize>() {
                            if k >= 1 {
                                return Ok(Expr::Var(k - 1));
                            }
                        }
                    }
                }
                Err(FieldError::UnknownIdentifier { name, offset })
            }
            Tok::End => Err(self.syntax("unexpected end of input")),
            Tok::Op(c) => Err(self.syntax(format!("unexpected '{c}'"))),
        }
    }
}

/// Parse an expression over the coordinates `x1, x2, ...` only.
pub fn parse_expr(text: &str) -> Result<Expr, FieldError> {
    parse_expr_with(text, &[])
}

/// Parse an expression that may also reference the given definition names.
/// `Def` slots index into `names`.
pub fn parse_expr_with(text: &str, names: &[String]) -> Result<Expr, FieldError> {
    let mut p = Parser::new(text, names)?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return Err(p.syntax("trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eval(text: &str, x: &[f64]) -> f64 {
        parse_expr(text).unwrap().eval(x, &[]).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(eval("4/(1+x1^2)^2", &[0.0]), 4.0);
        assert_eq!(eval("x1*x2 - x2*x1", &[0.3, -1.7]), 0.0);
        assert_eq!(eval("sqrt(x1^2+x2^2)", &[3.0, 4.0]), 5.0);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("-x1^2", &[3.0]), -9.0);
        assert_eq!(eval("2-3-4", &[]), -5.0);
        assert_eq!(eval("8/4/2", &[]), 1.0);
        assert_eq!(eval("1+2*3^2", &[]), 19.0);
        assert_eq!(eval("--x1", &[2.0]), 2.0);
        assert_eq!(eval("1.5e1 + .5", &[]), 15.5);
        assert!((eval("exp(0)+sin(0)+cos(0)", &[]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_offsets() {
        match parse_expr("x1 + * 2") {
            Err(FieldError::Syntax { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_expr("1 + foo"),
            Err(FieldError::UnknownIdentifier { ref name, offset: 4 }) if name == "foo"
        ));
        assert!(matches!(parse_expr("x1^2.5"), Err(FieldError::NonIntegerExponent { offset: 3 })));
        assert!(matches!(parse_expr("x1^x2"), Err(FieldError::NonIntegerExponent { .. })));
        assert!(matches!(parse_expr("x0"), Err(FieldError::UnknownIdentifier { .. })));
        assert!(matches!(parse_expr("(x1"), Err(FieldError::Syntax { .. })));
        assert!(matches!(parse_expr("x1 $"), Err(FieldError::Syntax { offset: 3, .. })));
    }

    #[test]
    fn division_guard() {
        let e = parse_expr("1/(x1-x1)").unwrap();
        assert!(e.eval(&[1.0], &[]).is_err());
    }

    #[test]
    fn defs_resolve_by_slot() {
        let names = vec!["rho".to_string()];
        let e = parse_expr_with("4/(1+rho)^2", &names).unwrap();
        assert_eq!(e.eval(&[0.0], &[1.0]).unwrap(), 1.0);
    }

    fn arb_expr() -> impl Strategy<Value = String> {
        let leaf = prop_oneof![
            (0u32..20).prop_map(|k| k.to_string()),
            (0.0f64..10.0).prop_map(|v| format!("{v:.3}")),
            (1usize..4).prop_map(|i| format!("x{i}")),
        ];
        leaf.prop_recursive(4, 32, 3, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} + {b}")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} * ({b})")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} - {b}/2")),
                inner.clone().prop_map(|a| format!("-{a}")),
                (inner.clone(), 0u32..4).prop_map(|(a, k)| format!("({a})^{k}")),
                inner.clone().prop_map(|a| format!("cos({a})")),
                inner.prop_map(|a| format!("exp(sin({a}))")),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(text in arb_expr()) {
            let e = parse_expr(&text).unwrap();
            let reparsed = parse_expr(&e.to_string()).unwrap();
            prop_assert_eq!(e, reparsed);
        }

        #[test]
        fn dual_value_slot_matches_real(text in arb_expr(), x in prop::array::uniform3(-0.8f64..0.8)) {
            use crate::autodiff::Dual;
            let e = parse_expr(&text).unwrap();
            let real = e.eval(&x, &[]);
            let lifted: Vec<Dual<f64, 3>> =
                x.iter().enumerate().map(|(i, &v)| Dual::variable(v, i)).collect();
            let dual = e.eval(&lifted, &[]);
            match (real, dual) {
                (Ok(r), Ok(d)) => prop_assert!(r == d.v || (r.is_nan() && d.v.is_nan())),
                (Err(_), Err(_)) => {}
                (r, d) => prop_assert!(false, "real {:?} vs dual {:?}", r, d.map(|d| d.v)),
            }
        }
    }
}
