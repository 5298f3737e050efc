//! Arithmetic expressions over named rationals, used to store table rows as
//! data.
//!
//! Grammar: `+ - * /`, integer powers `^`, parentheses, decimal or integer
//! literals, identifiers, and calls to the table helpers (`f`, `f1`, `f2`,
//! `g`, `f0`, `fm`, `g0`, `gm`, `f00`).

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::error::{QesError, Result};
use crate::scalar::{as_i64, parse_rational, q, Rational};

pub type Env = BTreeMap<String, Rational>;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Rational),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(r) => write!(f, "{r}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "{a}*{b}"),
            Expr::Div(a, b) => write!(f, "{a}/({b})"),
            Expr::Pow(a, b) => write!(f, "({a})^{b}"),
            Expr::Call(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(String),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            out.push(Token::Num(chars[start..i].iter().collect()));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(QesError::Expr(format!("unexpected character `{c}` in `{src}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn err(&self, msg: &str) -> QesError {
        QesError::Expr(format!("{msg} in `{}`", self.src))
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.peek_op() == Some(op) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected `{op}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.peek_op() == Some('+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = self.tokens.get(self.pos).cloned().ok_or_else(|| self.err("unexpected end"))?;
        self.pos += 1;
        match tok {
            Token::Num(s) => Ok(Expr::Num(parse_rational(&s)?)),
            Token::Ident(name) => {
                if self.peek_op() == Some('(') {
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while self.peek_op() == Some(',') {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    Ok(Expr::Call(name, args))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Token::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Token::Op(c) => Err(self.err(&format!("unexpected `{c}`"))),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser { tokens: tokenize(src)?, pos: 0, src };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

impl Expr {
    pub fn eval(&self, env: &Env) -> Result<Rational> {
        Ok(match self {
            Expr::Num(r) => r.clone(),
            Expr::Var(v) => {
                env.get(v).cloned().ok_or_else(|| QesError::Expr(format!("unbound variable `{v}`")))?
            }
            Expr::Neg(e) => -e.eval(env)?,
            Expr::Add(a, b) => a.eval(env)? + b.eval(env)?,
            Expr::Sub(a, b) => a.eval(env)? - b.eval(env)?,
            Expr::Mul(a, b) => a.eval(env)? * b.eval(env)?,
            Expr::Div(a, b) => {
                let d = b.eval(env)?;
                if d.is_zero() {
                    return Err(QesError::Pole(format!("division by zero in {self}")));
                }
                a.eval(env)? / d
            }
            Expr::Pow(a, b) => {
                let base = a.eval(env)?;
                let e = as_i64(&b.eval(env)?)
                    .ok_or_else(|| QesError::Expr(format!("non-integer exponent in {self}")))?;
                if e < 0 && base.is_zero() {
                    return Err(QesError::Pole(format!("zero to a negative power in {self}")));
                }
                num_traits::pow::Pow::pow(&base, e as i32)
            }
            Expr::Call(name, args) => {
                let vals = args.iter().map(|a| a.eval(env)).collect::<Result<Vec<_>>>()?;
                let ctx = HelperContext::from_env(env)?;
                helper(name, &vals, &ctx)?
            }
        })
    }

    /// Fails on calls to unknown helpers or with the wrong number of
    /// arguments.
    pub fn check_calls(&self) -> Result<()> {
        match self {
            Expr::Num(_) | Expr::Var(_) => Ok(()),
            Expr::Neg(e) => e.check_calls(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.check_calls()?;
                b.check_calls()
            }
            Expr::Call(name, args) => {
                let expected = HELPERS
                    .iter()
                    .find(|(n, _)| n == name)
                    .map(|(_, a)| *a)
                    .ok_or_else(|| QesError::UnknownHelper(name.clone()))?;
                if args.len() != expected {
                    return Err(QesError::HelperArity { name: name.clone(), expected, got: args.len() });
                }
                args.iter().try_for_each(Expr::check_calls)
            }
        }
    }

    /// Free variables referenced by the expression.
    pub fn vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Expr::Neg(e) => e.vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.vars(out)),
        }
    }
}

/// Quantities the helpers read implicitly: the block depth `N` and the
/// product of the couplings.
#[derive(Clone, Debug, PartialEq)]
pub struct HelperContext {
    pub n: Rational,
    pub alpha_gamma: Rational,
}

impl HelperContext {
    fn from_env(env: &Env) -> Result<Self> {
        let n = env.get("N").cloned().ok_or_else(|| QesError::Expr("unbound variable `N`".into()))?;
        let get = |k: &str| env.get(k).cloned().unwrap_or_else(Rational::zero);
        Ok(Self { n, alpha_gamma: get("alpha") * get("gamma") })
    }
}

pub const HELPERS: [(&str, usize); 9] =
    [("f", 1), ("f1", 2), ("f2", 2), ("g", 1), ("f0", 2), ("fm", 2), ("g0", 3), ("gm", 3), ("f00", 1)];

/// Evaluates a table helper exactly.
///
/// * `f(x) = -(1 + 4x^2) / (2x)`
/// * `f1(r, M) = (4M + 5)/(8r) - (4M + 1) r / 2`
/// * `f2(r, M) = -(4M + 3)(16 r^4 - 1) / (8 r^2)`
/// * `g(x) = x - 3 - 4N`
/// * `f0(r, t) = [(16 t^2 r^2 - 1)(N + 1) - r^2 + t^2 + ag (t + r)] / (2 r t)`
/// * `fm(r, t) = -[t^2 r (16N + 28) + t r^2 (16N + 20) + ag (4 r t + 1) - r (4N + 3) - t (4N + 1)] / (8 r t)`
/// * `g0(r, t, M) = (4M + 5)(16 t^2 r^2 - 1) / (8 r t)`
/// * `gm(r, t, M) = -(t + r)[t r (16M + 28) - 4M - 3] / (8 r t)`
/// * `f00(t) = (1 + 16 t^4 + 16 t^2) / (4 t^2)`
///
/// with `ag = alpha gamma`.
pub fn helper(name: &str, args: &[Rational], ctx: &HelperContext) -> Result<Rational> {
    let expected = HELPERS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, a)| *a)
        .ok_or_else(|| QesError::UnknownHelper(name.to_string()))?;
    if args.len() != expected {
        return Err(QesError::HelperArity { name: name.to_string(), expected, got: args.len() });
    }
    let pole = |x: &Rational, what: &str| -> Result<()> {
        if x.is_zero() {
            Err(QesError::Pole(format!("{name} at {what} = 0")))
        } else {
            Ok(())
        }
    };
    let i = |v: i64| q(v, 1);
    let n = &ctx.n;
    let ag = &ctx.alpha_gamma;
    Ok(match name {
        "f" => {
            let x = &args[0];
            pole(x, "x")?;
            -(i(1) + i(4) * x * x) / (i(2) * x)
        }
        "f1" => {
            let (r, m) = (&args[0], &args[1]);
            pole(r, "rho")?;
            (i(4) * m + i(5)) / (i(8) * r) - (i(4) * m + i(1)) * r / i(2)
        }
        "f2" => {
            let (r, m) = (&args[0], &args[1]);
            pole(r, "rho")?;
            -(i(4) * m + i(3)) * (i(16) * r * r * r * r - i(1)) / (i(8) * r * r)
        }
        "g" => &args[0] - i(3) - i(4) * n,
        "f0" => {
            let (r, t) = (&args[0], &args[1]);
            pole(r, "rho")?;
            pole(t, "tau")?;
            ((i(16) * t * t * r * r - i(1)) * (n + i(1)) - r * r + t * t + ag * (t + r)) / (i(2) * r * t)
        }
        "fm" => {
            let (r, t) = (&args[0], &args[1]);
            pole(r, "rho")?;
            pole(t, "tau")?;
            -(t * t * r * (i(16) * n + i(28)) + t * r * r * (i(16) * n + i(20)) + ag * (i(4) * r * t + i(1))
                - r * (i(4) * n + i(3))
                - t * (i(4) * n + i(1)))
                / (i(8) * r * t)
        }
        "g0" => {
            let (r, t, m) = (&args[0], &args[1], &args[2]);
            pole(r, "rho")?;
            pole(t, "tau")?;
            (i(4) * m + i(5)) * (i(16) * t * t * r * r - i(1)) / (i(8) * r * t)
        }
        "gm" => {
            let (r, t, m) = (&args[0], &args[1], &args[2]);
            pole(r, "rho")?;
            pole(t, "tau")?;
            -(t + r) * (t * r * (i(16) * m + i(28)) - i(4) * m - i(3)) / (i(8) * r * t)
        }
        "f00" => {
            let t = &args[0];
            pole(t, "tau")?;
            (i(1) + i(16) * t * t * t * t + i(16) * t * t) / (i(4) * t * t)
        }
        _ => unreachable!("checked against HELPERS"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(n: i64) -> HelperContext {
        HelperContext { n: q(n, 1), alpha_gamma: q(0, 1) }
    }

    #[test]
    fn helper_values() {
        assert_eq!(helper("f", &[q(1, 4)], &ctx(0)).unwrap(), q(-5, 2));
        assert_eq!(helper("g", &[q(0, 1)], &ctx(2)).unwrap(), q(-11, 1));
        assert_eq!(helper("f00", &[q(1, 2)], &ctx(0)).unwrap(), q(6, 1));
        assert!(matches!(helper("f", &[q(0, 1)], &ctx(0)), Err(QesError::Pole(_))));
        assert!(matches!(helper("f1", &[q(0, 1), q(1, 1)], &ctx(0)), Err(QesError::Pole(_))));
        assert!(matches!(helper("h", &[q(1, 1)], &ctx(0)), Err(QesError::UnknownHelper(_))));
        assert!(matches!(helper("f", &[], &ctx(0)), Err(QesError::HelperArity { .. })));
    }

    #[test]
    fn parses_and_evaluates() {
        let mut env = Env::new();
        env.insert("N".into(), q(1, 1));
        env.insert("a_0m".into(), q(1, 1));
        env.insert("rho".into(), q(1, 4));
        let e = parse("-(4*N+1)/4*a_0m").unwrap();
        assert_eq!(e.eval(&env).unwrap(), q(-5, 4));
        assert_eq!(parse("2^3 - -1").unwrap().eval(&env).unwrap(), q(9, 1));
        assert_eq!(parse("f(2*rho^2)").unwrap().eval(&env).unwrap(), q(-17, 4));
        assert_eq!(parse("0.5*rho").unwrap().eval(&env).unwrap(), q(1, 8));
        assert!(parse("1 +").is_err());
        assert!(parse("(1").is_err());
        assert!(parse("1 $ 2").is_err());
        assert!(matches!(parse("1/(rho-rho)").unwrap().eval(&env), Err(QesError::Pole(_))));
        assert!(parse("x").unwrap().eval(&env).is_err());
    }
}
