//! Recursive-descent parser for the RHS expression language.
//!
//! Grammar (see docs/dsl.md for the EBNF):
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | power
//! power  := atom ("^" integer)?
//! atom   := number | ident | ident "(" expr ("," arg)* ")" | "(" expr ")"
//! ```
//!
//! Precedence: power > unary minus > * / > + -. Identifiers are checked
//! against the declared signature (t, x1..xn, p1..pl, eps) and errors carry
//! line/column positions.

use std::sync::Arc;

use crate::error::DslError;

use super::ast::{Expr, ExprKind, Signature, Span, Var};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: Span,
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for (i, c) in src.char_indices() {
        if i >= offset {
            break;
        }
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

fn lex(src: &str) -> Result<Vec<Token>, DslError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                i += 1;
            }
            '+' | '-' | '*' | '/' | '^' | '(' | ')' | ',' => {
                let tok = match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    _ => Tok::Comma,
                };
                i += 1;
                out.push(Token {
                    tok,
                    span: Span::new(start, i),
                });
            }
            '0'..='9' | '.' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'.') {
                    j += 1;
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let text = &src[i..j];
                let value: f64 = text.parse().map_err(|_| {
                    let (line, col) = line_col(src, i);
                    DslError::Syntax {
                        line,
                        col,
                        msg: format!("malformed number `{text}`"),
                    }
                })?;
                i = j;
                out.push(Token {
                    tok: Tok::Num(value),
                    span: Span::new(start, i),
                });
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < bytes.len()
                    && ((bytes[j] as char).is_ascii_alphanumeric() || bytes[j] == b'_')
                {
                    j += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(src[i..j].to_string()),
                    span: Span::new(start, j),
                });
                i = j;
            }
            _ => {
                let (line, col) = line_col(src, i);
                return Err(DslError::Syntax {
                    line,
                    col,
                    msg: format!("unexpected character `{c}`"),
                });
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    sig: Signature,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn span(&self) -> Span {
        self.tokens
            .get(self.pos)
            .map(|t| t.span)
            .unwrap_or_else(|| Span::new(self.src.len(), self.src.len()))
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, msg: impl Into<String>) -> DslError {
        let (line, col) = line_col(self.src, self.span().start);
        DslError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Span, DslError> {
        match self.peek() {
            Some(t) if *t == tok => Ok(self.advance().unwrap().span),
            _ => Err(self.error_here(format!("expected {what}"))),
        }
    }

    fn parse_expr(&mut self) -> Result<Arc<Expr>, DslError> {
        let mut lhs = self.parse_term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.advance();
                    let rhs = self.parse_term()?;
                    let span = lhs.span.join(rhs.span);
                    lhs = Arc::new(Expr::new(ExprKind::Add(lhs, rhs), span));
                }
                Some(Tok::Minus) => {
                    self.advance();
                    let rhs = self.parse_term()?;
                    let span = lhs.span.join(rhs.span);
                    lhs = Arc::new(Expr::new(ExprKind::Sub(lhs, rhs), span));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Arc<Expr>, DslError> {
        let mut lhs = self.parse_unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.advance();
                    let rhs = self.parse_unary()?;
                    let span = lhs.span.join(rhs.span);
                    lhs = Arc::new(Expr::new(ExprKind::Mul(lhs, rhs), span));
                }
                Some(Tok::Slash) => {
                    self.advance();
                    let rhs = self.parse_unary()?;
                    let span = lhs.span.join(rhs.span);
                    lhs = Arc::new(Expr::new(ExprKind::Div(lhs, rhs), span));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<Arc<Expr>, DslError> {
        if let Some(Tok::Minus) = self.peek() {
            let start = self.span();
            self.advance();
            let inner = self.parse_unary()?;
            let span = start.join(inner.span);
            // fold negated literals so `-2.5` is one node
            if let ExprKind::Num(v) = inner.kind {
                return Ok(Arc::new(Expr::new(ExprKind::Num(-v), span)));
            }
            return Ok(Arc::new(Expr::new(ExprKind::Neg(inner), span)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Arc<Expr>, DslError> {
        let base = self.parse_atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.advance();
            let neg = if let Some(Tok::Minus) = self.peek() {
                self.advance();
                true
            } else {
                false
            };
            let sp = self.span();
            match self.advance().map(|t| t.tok) {
                Some(Tok::Num(v)) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => {
                    let n = v as i32 * if neg { -1 } else { 1 };
                    let span = base.span.join(sp);
                    return Ok(Arc::new(Expr::new(ExprKind::Pow(base, n), span)));
                }
                _ => {
                    let (line, col) = line_col(self.src, sp.start);
                    return Err(DslError::Syntax {
                        line,
                        col,
                        msg: "exponent must be an integer literal".into(),
                    });
                }
            }
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Arc<Expr>, DslError> {
        let span = self.span();
        match self.advance().map(|t| t.tok) {
            Some(Tok::Num(v)) => Ok(Arc::new(Expr::new(ExprKind::Num(v), span))),
            Some(Tok::LParen) => {
                let e = self.parse_expr()?;
                self.expect(Tok::RParen, "closing `)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => self.parse_ident(name, span),
            _ => Err({
                let (line, col) = line_col(self.src, span.start);
                DslError::Syntax {
                    line,
                    col,
                    msg: "expected an operand".into(),
                }
            }),
        }
    }

    fn parse_ident(&mut self, name: String, span: Span) -> Result<Arc<Expr>, DslError> {
        // Nullary names first.
        match name.as_str() {
            "t" => return Ok(Arc::new(Expr::new(ExprKind::Var(Var::T), span))),
            "eps" => return Ok(Arc::new(Expr::new(ExprKind::Var(Var::Eps), span))),
            "LogEps" => return Ok(Arc::new(Expr::new(ExprKind::LogEps, span))),
            _ => {}
        }
        if let Some(idx) = indexed(&name, 'x') {
            if idx == 0 || idx > self.sig.n_state {
                return Err(self.unknown(&name, span));
            }
            return Ok(Arc::new(Expr::new(ExprKind::Var(Var::X(idx - 1)), span)));
        }
        if let Some(idx) = indexed(&name, 'p') {
            if idx == 0 || idx > self.sig.n_param {
                return Err(self.unknown(&name, span));
            }
            return Ok(Arc::new(Expr::new(ExprKind::Var(Var::P(idx - 1)), span)));
        }

        let is_function = matches!(
            name.as_str(),
            "exp"
                | "log"
                | "sin"
                | "cos"
                | "atan"
                | "sqrt"
                | "abs_smooth"
                | "HeavisideMollified"
                | "MollifierScaled"
                | "MollifierDeriv"
        );
        if !is_function {
            return Err(self.unknown(&name, span));
        }

        self.expect(Tok::LParen, "`(` after function name")?;
        let mut args = vec![self.parse_expr()?];
        while let Some(Tok::Comma) = self.peek() {
            self.advance();
            args.push(self.parse_expr()?);
        }
        let close = self.expect(Tok::RParen, "closing `)`")?;
        let full = span.join(close);
        let (line, col) = line_col(self.src, span.start);
        let arity = |expected: usize, got: usize| DslError::Arity {
            name: name.clone(),
            expected,
            got,
            line,
            col,
        };

        let kind = match name.as_str() {
            "exp" | "log" | "sin" | "cos" | "atan" | "sqrt" | "HeavisideMollified"
            | "MollifierScaled" => {
                if args.len() != 1 {
                    return Err(arity(1, args.len()));
                }
                let a = args.pop().unwrap();
                match name.as_str() {
                    "exp" => ExprKind::Exp(a),
                    "log" => ExprKind::Log(a),
                    "sin" => ExprKind::Sin(a),
                    "cos" => ExprKind::Cos(a),
                    "atan" => ExprKind::Atan(a),
                    "sqrt" => ExprKind::Sqrt(a),
                    "HeavisideMollified" => ExprKind::HeavisideMollified(a),
                    _ => ExprKind::MollifierDeriv(a, 0),
                }
            }
            "abs_smooth" => {
                if args.len() > 2 || args.is_empty() {
                    return Err(arity(2, args.len()));
                }
                let tau = if args.len() == 2 {
                    match args.pop().unwrap().kind {
                        ExprKind::Num(v) if v > 0.0 => v,
                        _ => {
                            return Err(self.error_at(span, "abs_smooth: tau must be a positive number literal"))
                        }
                    }
                } else {
                    1e-3
                };
                ExprKind::AbsSmooth(args.pop().unwrap(), tau)
            }
            "MollifierDeriv" => {
                if args.len() != 2 {
                    return Err(arity(2, args.len()));
                }
                let k = match args.pop().unwrap().kind {
                    ExprKind::Num(v) if v.fract() == 0.0 && v >= 0.0 && v <= 32.0 => v as u32,
                    _ => {
                        return Err(
                            self.error_at(span, "MollifierDeriv: order must be an integer literal in 0..=32")
                        )
                    }
                };
                ExprKind::MollifierDeriv(args.pop().unwrap(), k)
            }
            _ => unreachable!(),
        };
        Ok(Arc::new(Expr::new(kind, full)))
    }

    fn unknown(&self, name: &str, span: Span) -> DslError {
        let (line, col) = line_col(self.src, span.start);
        DslError::UnknownIdentifier {
            name: name.to_string(),
            line,
            col,
        }
    }

    fn error_at(&self, span: Span, msg: &str) -> DslError {
        let (line, col) = line_col(self.src, span.start);
        DslError::Syntax {
            line,
            col,
            msg: msg.to_string(),
        }
    }
}

fn indexed(name: &str, prefix: char) -> Option<usize> {
    let mut chars = name.chars();
    if chars.next()? != prefix {
        return None;
    }
    let rest: String = chars.collect();
    if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

/// Parse `src` against the declared signature.
pub fn parse(src: &str, sig: Signature) -> Result<Arc<Expr>, DslError> {
    if src.trim().is_empty() {
        return Err(DslError::Syntax {
            line: 1,
            col: 1,
            msg: "empty expression".into(),
        });
    }
    let tokens = lex(src)?;
    let mut p = Parser {
        src,
        tokens,
        pos: 0,
        sig,
    };
    let e = p.parse_expr()?;
    if p.pos != p.tokens.len() {
        return Err(p.error_here("unexpected trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig1() -> Signature {
        Signature::new(1, 0)
    }

    #[test]
    fn parses_rhs_families() {
        // (1/ε)(2 - 1/(1+x²)) and x/ε
        let e = parse("(2 - 1/(1+x1^2))/eps", sig1()).unwrap();
        let printed = e.to_string();
        let e2 = parse(&printed, sig1()).unwrap();
        assert_eq!(*e, *e2);
        parse("x1/eps", sig1()).unwrap();
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse("x1 +", sig1()).unwrap_err();
        match err {
            DslError::Syntax { line, col, .. } => {
                assert_eq!(line, 1);
                assert_eq!(col, 5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_is_flagged() {
        let err = parse("x2 + 1", sig1()).unwrap_err();
        assert!(matches!(err, DslError::UnknownIdentifier { ref name, .. } if name == "x2"));
        let err = parse("foo(x1)", sig1()).unwrap_err();
        assert!(matches!(err, DslError::UnknownIdentifier { ref name, .. } if name == "foo"));
    }

    #[test]
    fn arity_is_checked() {
        let err = parse("sin(x1, t)", sig1()).unwrap_err();
        assert!(matches!(err, DslError::Arity { expected: 1, got: 2, .. }));
    }

    #[test]
    fn precedence_matches_convention() {
        // power > unary minus: -x1^2 == -(x1^2)
        let a = parse("-x1^2", sig1()).unwrap();
        let b = parse("-(x1^2)", sig1()).unwrap();
        assert_eq!(*a, *b);
        // unary minus > *: -x1*t == (-x1)*t
        let a = parse("-x1*t", sig1()).unwrap();
        let b = parse("(-x1)*t", sig1()).unwrap();
        assert_eq!(*a, *b);
        let a = parse("1 + t*x1^2", sig1()).unwrap();
        let b = parse("1 + (t*(x1^2))", sig1()).unwrap();
        assert_eq!(*a, *b);
    }

    #[test]
    fn negative_exponent() {
        let e = parse("x1^-2", sig1()).unwrap();
        assert!(matches!(e.kind, ExprKind::Pow(_, -2)));
    }

    #[test]
    fn mollifier_scaled_is_order_zero() {
        let e = parse("MollifierScaled(t)", sig1()).unwrap();
        assert!(matches!(e.kind, ExprKind::MollifierDeriv(_, 0)));
        let printed = e.to_string();
        assert_eq!(printed, "MollifierScaled(t)");
    }

    #[test]
    fn empty_source_rejected() {
        assert!(parse("  ", sig1()).is_err());
    }
}
