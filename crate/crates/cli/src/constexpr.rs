//! Constant expressions for numeric flags: `sqrt(16/15)`, `8/(3pi)`, `2×ln(2)`.
//!
//! Grammar: numbers, `pi`/`π`, `sqrt(…)`, `ln(…)`, parentheses, unary minus,
//! `+ - * / × ÷ −`, and implicit multiplication between adjacent factors.

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    Open,
    Close,
}

fn tokenize(src: &str) -> Result<Vec<Token>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // exponent, only when followed by a digit or sign+digit
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
                let v = text.parse::<f64>().map_err(|_| format!("bad number {text:?}"))?;
                out.push(Token::Num(v));
            }
            'π' => {
                out.push(Token::Ident("pi".into()));
                i += 1;
            }
            c if c.is_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_alphabetic() {
                    i += 1;
                }
                out.push(Token::Ident(chars[start..i].iter().collect()));
            }
            '+' | '*' | '/' => {
                out.push(Token::Op(c));
                i += 1;
            }
            '-' | '−' => {
                out.push(Token::Op('-'));
                i += 1;
            }
            '×' => {
                out.push(Token::Op('*'));
                i += 1;
            }
            '÷' => {
                out.push(Token::Op('/'));
                i += 1;
            }
            '(' => {
                out.push(Token::Open);
                i += 1;
            }
            ')' => {
                out.push(Token::Close);
                i += 1;
            }
            other => return Err(format!("unexpected character {other:?}")),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<f64, String> {
        let mut v = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            v = if op == '+' { v + rhs } else { v - rhs };
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<f64, String> {
        let mut v = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Op(op @ ('*' | '/'))) => {
                    let op = *op;
                    self.pos += 1;
                    let rhs = self.unary()?;
                    v = if op == '*' { v * rhs } else { v / rhs };
                }
                Some(Token::Num(_) | Token::Ident(_) | Token::Open) => v *= self.atom()?,
                _ => return Ok(v),
            }
        }
    }

    fn unary(&mut self) -> Result<f64, String> {
        match self.peek() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<f64, String> {
        match self.next() {
            Some(Token::Num(v)) => Ok(v),
            Some(Token::Open) => {
                let v = self.expr()?;
                self.close()?;
                Ok(v)
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "pi" => Ok(std::f64::consts::PI),
                "sqrt" | "ln" => {
                    if self.next() != Some(Token::Open) {
                        return Err(format!("{name} needs parentheses"));
                    }
                    let arg = self.expr()?;
                    self.close()?;
                    Ok(if name == "sqrt" { arg.sqrt() } else { arg.ln() })
                }
                other => Err(format!("unknown name {other:?}")),
            },
            Some(t) => Err(format!("unexpected {t:?}")),
            None => Err("unexpected end of expression".into()),
        }
    }

    fn close(&mut self) -> Result<(), String> {
        match self.next() {
            Some(Token::Close) => Ok(()),
            _ => Err("missing ')'".into()),
        }
    }
}

/// Evaluates a constant expression; the result must be finite.
pub fn eval(src: &str) -> Result<f64, String> {
    let mut p = Parser {
        tokens: tokenize(src)?,
        pos: 0,
    };
    let v = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(format!("trailing input in {src:?}"));
    }
    if !v.is_finite() {
        return Err(format!("{src:?} is not finite"));
    }
    Ok(v)
}

/// For clap's `value_parser`.
pub fn parse_f64(src: &str) -> Result<f64, String> {
    eval(src)
}
