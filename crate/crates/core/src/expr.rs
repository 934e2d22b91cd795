//! A small closed-form expression language over two named variables.
//!
//! Grammar: `+ - * / ^`, unary minus, parentheses, `exp sin cos sqrt abs`,
//! the constants `pi` and `e`, and decimal literals with optional exponent.
//! `^` is right associative and binds tighter than unary minus, so `-x^2`
//! means `-(x^2)`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Exp,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

/// A parsed expression `f(a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    vars: [String; 2],
    root: Node,
}

impl Expr {
    /// Parses `source` with the two variable names in `vars`.
    pub fn parse(source: &str, vars: [&str; 2]) -> Result<Self> {
        let tokens = tokenize(source)?;
        let mut p = Parser {
            tokens: &tokens,
            pos: 0,
            vars,
        };
        let root = p.expr()?;
        if p.pos != tokens.len() {
            return Err(Error::Expression(format!(
                "unexpected {} in `{source}`",
                tokens[p.pos]
            )));
        }
        Ok(Self {
            source: source.to_string(),
            vars: [vars[0].to_string(), vars[1].to_string()],
            root,
        })
    }

    pub fn eval(&self, a: f64, b: f64) -> f64 {
        eval(&self.root, a, b)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn vars(&self) -> [&str; 2] {
        [&self.vars[0], &self.vars[1]]
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

fn eval(node: &Node, a: f64, b: f64) -> f64 {
    match node {
        Node::Num(v) => *v,
        Node::Var(0) => a,
        Node::Var(_) => b,
        Node::Neg(x) => -eval(x, a, b),
        Node::Bin(op, l, r) => {
            let (l, r) = (eval(l, a, b), eval(r, a, b));
            match op {
                Op::Add => l + r,
                Op::Sub => l - r,
                Op::Mul => l * r,
                Op::Div => l / r,
                Op::Pow => l.powf(r),
            }
        }
        Node::Call(func, x) => {
            let x = eval(x, a, b);
            match func {
                Func::Exp => x.exp(),
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Sqrt => x.sqrt(),
                Func::Abs => x.abs(),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Sym(char),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(v) => write!(f, "number {v}"),
            Token::Ident(s) => write!(f, "`{s}`"),
            Token::Sym(c) => write!(f, "`{c}`"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
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
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| Error::Expression(format!("bad number `{text}`")))?;
            out.push(Token::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Token::Sym(c));
            i += 1;
        } else {
            return Err(Error::Expression(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    vars: [&'a str; 2],
}

impl Parser<'_> {
    fn peek_sym(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token::Sym(c)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek_sym() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Expression(format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_sym() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == '+' { Op::Add } else { Op::Sub };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_sym() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { Op::Mul } else { Op::Div };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek_sym() {
            Some('-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek_sym() == Some('^') {
            self.pos += 1;
            // right associative; the exponent may carry its own sign
            let exp = self.unary()?;
            return Ok(Node::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Expression("unexpected end of expression".into()))?;
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(Node::Num(v)),
            Token::Sym('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Token::Ident(name) => {
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Node::Var(i));
                }
                let func = match name.as_str() {
                    "pi" => return Ok(Node::Num(std::f64::consts::PI)),
                    "e" => return Ok(Node::Num(std::f64::consts::E)),
                    "exp" => Func::Exp,
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "sqrt" => Func::Sqrt,
                    "abs" => Func::Abs,
                    _ => {
                        return Err(Error::Expression(format!(
                            "unknown identifier `{name}` (variables are `{}` and `{}`)",
                            self.vars[0], self.vars[1]
                        )))
                    }
                };
                self.expect('(')?;
                let arg = self.expr()?;
                self.expect(')')?;
                Ok(Node::Call(func, Box::new(arg)))
            }
            Token::Sym(c) => Err(Error::Expression(format!("unexpected `{c}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(src: &str, a: f64, b: f64) -> f64 {
        Expr::parse(src, ["x1", "x2"]).unwrap().eval(a, b)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", 0.0, 0.0), 7.0);
        assert_eq!(ev("2 ^ 3 ^ 2", 0.0, 0.0), 512.0);
        assert_eq!(ev("-x1^2", 3.0, 0.0), -9.0);
        assert_eq!(ev("(1 - x1) / x2", 3.0, 4.0), -0.5);
        assert_eq!(ev("2^-1", 0.0, 0.0), 0.5);
        assert_eq!(ev("1.5e-1 + 2E1", 0.0, 0.0), 20.15);
    }

    #[test]
    fn functions_and_constants() {
        assert!((ev("sin(pi / 2) + cos(0) + exp(0)", 0.0, 0.0) - 3.0).abs() < 1e-15);
        assert_eq!(ev("sqrt(x1^2 + x2^2)", 3.0, 4.0), 5.0);
        assert_eq!(ev("abs(x1 - x2)", 1.0, 4.0), 3.0);
        assert!((ev("e", 0.0, 0.0) - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in ["", "1 +", "(x1", "x3", "foo(1)", "1 $ 2", "x1 x2", "sin 1"] {
            assert!(
                matches!(Expr::parse(bad, ["x1", "x2"]), Err(Error::Expression(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn custom_variable_names() {
        let e = Expr::parse("c0 + c1", ["c0", "c1"]).unwrap();
        assert_eq!(e.eval(1.0, 2.0), 3.0);
        assert!(Expr::parse("x1", ["c0", "c1"]).is_err());
    }

    proptest! {
        #[test]
        fn linear_forms_evaluate_exactly(a in -10i32..10, b in -10i32..10, x in -5.0f64..5.0, y in -5.0f64..5.0) {
            let e = Expr::parse(&format!("{a} * x1 + ({b}) * x2"), ["x1", "x2"]).unwrap();
            prop_assert_eq!(e.eval(x, y), a as f64 * x + b as f64 * y);
        }
    }
}
