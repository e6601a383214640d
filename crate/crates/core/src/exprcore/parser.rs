//! Recursive-descent parser for the scalar expression language.
//!
//! ```text
//! expr     = term { ("+" | "-") term } ;
//! term     = unary { ("*" | "/") unary } ;
//! unary    = "-" unary | power ;
//! power    = primary [ "^" exponent ] ;
//! exponent = [ "-" ] number | "(" [ "-" ] number [ "/" number ] ")" ;
//! primary  = number | identifier | function "(" expr ")" | "(" expr ")" ;
//! function = "exp" | "ln" | "sqrt" | "sin" | "cos" ;
//! ```

use super::ast::{Exponent, Expr, Func};
use super::ExprError;

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
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    text: String,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let (mut line, mut column) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, column);
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            column += 1;
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            tokens.push(Token {
                tok,
                text: c.to_string(),
                line,
                column,
            });
            i += 1;
            column += 1;
            continue;
        }
        let begin = i;
        if c.is_ascii_digit() || c == '.' {
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
            let lit: String = chars[begin..i].iter().collect();
            let value: f64 = lit.parse().map_err(|_| ExprError::Lex {
                line: start_line,
                column: start_col,
                found: lit.clone(),
            })?;
            column += i - begin;
            tokens.push(Token {
                tok: Tok::Num(value),
                text: lit,
                line: start_line,
                column: start_col,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            while i < chars.len()
                && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
            {
                i += 1;
            }
            let name: String = chars[begin..i].iter().collect();
            column += i - begin;
            tokens.push(Token {
                tok: Tok::Ident(name.clone()),
                text: name,
                line: start_line,
                column: start_col,
            });
            continue;
        }
        return Err(ExprError::Lex {
            line,
            column,
            found: c.to_string(),
        });
    }
    tokens.push(Token {
        tok: Tok::End,
        text: "end of input".into(),
        line,
        column,
    });
    Ok(tokens)
}

/// Exact rational value of a decimal literal such as `2`, `0.5` or `1e2`.
fn literal_to_exponent(text: &str) -> Option<Exponent> {
    let lower = text.to_ascii_lowercase();
    let (mantissa, exp10) = match lower.split_once('e') {
        Some((m, e)) => (m.to_string(), e.parse::<i32>().ok()?),
        None => (lower, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((&mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    let mut num: i64 = if digits.is_empty() {
        0
    } else {
        digits.parse().ok()?
    };
    let mut den_pow = frac_part.len() as i32 - exp10;
    while den_pow < 0 {
        num = num.checked_mul(10)?;
        den_pow += 1;
    }
    let den = 10i64.checked_pow(den_pow as u32)?;
    Exponent::rational(num, den)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    coords: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ExprError {
        let t = self.peek();
        ExprError::Syntax {
            line: t.line,
            column: t.column,
            found: t.text.clone(),
            expected: expected.to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<Token, ExprError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::add(lhs, self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::mul(lhs, self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let exponent = self.exponent()?;
        Ok(Expr::pow(base, exponent))
    }

    fn signed_literal(&mut self) -> Result<Exponent, ExprError> {
        let negative = if self.peek().tok == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let t = self.peek().clone();
        let Tok::Num(_) = t.tok else {
            return Err(self.unexpected("constant exponent"));
        };
        self.bump();
        let e = literal_to_exponent(&t.text).ok_or_else(|| ExprError::Syntax {
            line: t.line,
            column: t.column,
            found: t.text.clone(),
            expected: "integer or rational exponent".into(),
        })?;
        Ok(if negative {
            Exponent::rational(-e.numerator(), e.denominator() as i64).expect("nonzero den")
        } else {
            e
        })
    }

    fn exponent(&mut self) -> Result<Exponent, ExprError> {
        if self.peek().tok != Tok::LParen {
            return self.signed_literal();
        }
        self.bump();
        let num = self.signed_literal()?;
        let result = if self.peek().tok == Tok::Slash {
            self.bump();
            let at = self.peek().clone();
            let den = self.signed_literal()?;
            // (p/q) / (r/s) = (p s) / (q r)
            let n = num.numerator() * den.denominator() as i64;
            let d = num.denominator() as i64 * den.numerator();
            Exponent::rational(n, d).ok_or(ExprError::Syntax {
                line: at.line,
                column: at.column,
                found: at.text,
                expected: "nonzero exponent denominator".into(),
            })?
        } else {
            num
        };
        self.expect(Tok::RParen, "')'")?;
        Ok(result)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if self.peek().tok == Tok::LParen {
                    let func = Func::from_name(&name).ok_or(ExprError::UnknownFunction {
                        name: name.clone(),
                        line: t.line,
                        column: t.column,
                    })?;
                    self.bump();
                    let mut args = Vec::new();
                    if self.peek().tok != Tok::RParen {
                        args.push(self.expr()?);
                        while self.peek().tok == Tok::Comma {
                            self.bump();
                            args.push(self.expr()?);
                        }
                    }
                    self.expect(Tok::RParen, "')' closing function call")?;
                    if args.len() != 1 {
                        return Err(ExprError::Arity {
                            name,
                            expected: 1,
                            found: args.len(),
                            line: t.line,
                            column: t.column,
                        });
                    }
                    return Ok(Expr::call(func, args.pop().expect("one argument")));
                }
                match self.coords.iter().position(|c| *c == name) {
                    Some(i) => Ok(Expr::Var(i)),
                    None => Err(ExprError::UnknownIdentifier {
                        name,
                        line: t.line,
                        column: t.column,
                    }),
                }
            }
            _ => Err(self.unexpected("number, identifier, function or '('")),
        }
    }
}

pub(crate) fn parse_tree(text: &str, coords: &[String]) -> Result<Expr, ExprError> {
    if text.trim().is_empty() {
        return Err(ExprError::Empty);
    }
    let tokens = lex(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        coords,
    };
    let tree = parser.expr()?;
    if parser.peek().tok != Tok::End {
        return Err(parser.unexpected("operator or end of input"));
    }
    Ok(tree)
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_literals() {
        assert_eq!(literal_to_exponent("2"), Some(Exponent::integer(2)));
        assert_eq!(literal_to_exponent("0.5"), Exponent::rational(1, 2));
        assert_eq!(literal_to_exponent("1e2"), Some(Exponent::integer(100)));
        assert_eq!(literal_to_exponent("2.5e-1"), Exponent::rational(1, 4));
    }

    #[test]
    fn lexer_tracks_lines() {
        let toks = lex("x +\n  y").unwrap();
        let y = toks.iter().find(|t| t.text == "y").unwrap();
        assert_eq!((y.line, y.column), (2, 3));
    }
}
