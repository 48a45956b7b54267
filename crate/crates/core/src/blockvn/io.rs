//! Line-oriented text format for algebras and block operators.
//!
//! ```text
//! # comment
//! algebra: shapes=[2,1] weights_prefix=[0.5,0.25] tail_ratio=0.5
//! block 0: 1+0i 2-1i; 2+1i 3
//! block 1: 0.5i
//! tail: kind=scalar formula=exp(-0.5*k)*(1+2i)
//! ```
//!
//! `tail_ratio` may be omitted (or `none`) for a finite algebra; `tail_dim=d`
//! sets the size of the tail blocks. Rows of a block are separated by `;`.
//! A file with only the header describes an algebra.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use thiserror::Error;

use super::{BlockError, BlockOperator, FiniteBlockAlgebra, Formula, TailRule};
use crate::linops::CMatrix;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> FileError {
    FileError::Parse { line, column, message: message.into() }
}

/// Contents of an operator file.
#[derive(Clone, Debug, PartialEq)]
pub enum Parsed {
    Algebra(Arc<FiniteBlockAlgebra>),
    Operator(BlockOperator),
}

impl Parsed {
    pub fn algebra(&self) -> &Arc<FiniteBlockAlgebra> {
        match self {
            Parsed::Algebra(a) => a,
            Parsed::Operator(op) => op.algebra(),
        }
    }

    /// The operator, or the zero operator for an algebra-only file.
    pub fn into_operator(self) -> BlockOperator {
        match self {
            Parsed::Algebra(a) => BlockOperator::zero(a),
            Parsed::Operator(op) => op,
        }
    }
}

pub fn read_operator_file(path: &Path) -> Result<Parsed, FileError> {
    let text = std::fs::read_to_string(path)?;
    parse_operator(&text)
}

pub fn parse_operator(text: &str) -> Result<Parsed, FileError> {
    let mut algebra: Option<Arc<FiniteBlockAlgebra>> = None;
    let mut blocks: Vec<Option<CMatrix>> = Vec::new();
    let mut tail: Option<Formula> = None;
    let mut saw_body = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(colon) = content.find(':') else {
            return Err(perr(line_no, 1, "expected `keyword: ...`"));
        };
        let key = content[..colon].trim();
        let body_col = colon + 2;
        let body = &content[colon + 1..];
        if key == "algebra" {
            if algebra.is_some() {
                return Err(perr(line_no, 1, "duplicate algebra header"));
            }
            algebra = Some(Arc::new(parse_header(body, line_no, body_col)?));
            continue;
        }
        let Some(alg) = algebra.as_ref() else {
            return Err(perr(line_no, 1, "the algebra header must come first"));
        };
        saw_body = true;
        if let Some(rest) = key.strip_prefix("block") {
            let k: usize = rest
                .trim()
                .parse()
                .map_err(|_| perr(line_no, 7, format!("bad block index `{}`", rest.trim())))?;
            if !alg.contains_block(k) {
                return Err(perr(line_no, 7, format!("block {k} is outside the algebra")));
            }
            let m = parse_matrix(body, line_no, body_col)?;
            let expected = alg.dim(k);
            if m.dim() != expected {
                return Err(BlockError::DimensionMismatch { block: k, expected, found: m.dim() }.into());
            }
            if blocks.len() <= k {
                blocks.resize(k + 1, None);
            }
            if blocks[k].is_some() {
                return Err(perr(line_no, 1, format!("block {k} given twice")));
            }
            blocks[k] = Some(m);
        } else if key == "tail" {
            if tail.is_some() {
                return Err(perr(line_no, 1, "duplicate tail line"));
            }
            tail = Some(parse_tail(body, line_no, body_col)?);
        } else {
            return Err(perr(line_no, 1, format!("unknown keyword `{key}`")));
        }
    }

    let Some(alg) = algebra else {
        return Err(perr(1, 1, "missing algebra header"));
    };
    if !saw_body {
        return Ok(Parsed::Algebra(alg));
    }
    let mut prefix = Vec::with_capacity(blocks.len());
    for (k, b) in blocks.into_iter().enumerate() {
        match b {
            Some(m) => prefix.push(m),
            None => return Err(perr(0, 0, format!("block {k} missing; explicit blocks must be contiguous from 0"))),
        }
    }
    let op = BlockOperator::with_formula(alg, prefix, tail.unwrap_or_else(Formula::zero))?;
    Ok(Parsed::Operator(op))
}

/// Splits `key=value` fields, keeping bracketed lists intact.
fn fields(body: &str, line: usize, col0: usize) -> Result<Vec<(String, String, usize)>, FileError> {
    let mut out = Vec::new();
    let chars: Vec<char> = body.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let mut depth = 0i32;
        while i < chars.len() && (depth > 0 || !chars[i].is_whitespace()) {
            match chars[i] {
                '[' | '(' => depth += 1,
                ']' | ')' => depth -= 1,
                _ => {}
            }
            i += 1;
        }
        let tok: String = chars[start..i].iter().collect();
        let Some(eq) = tok.find('=') else {
            return Err(perr(line, col0 + start, format!("expected key=value, found `{tok}`")));
        };
        out.push((tok[..eq].to_string(), tok[eq + 1..].to_string(), col0 + start));
    }
    Ok(out)
}

fn parse_list<T: std::str::FromStr>(v: &str, line: usize, col: usize) -> Result<Vec<T>, FileError> {
    let inner = v
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| perr(line, col, "expected a bracketed list"))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|s| s.trim().parse::<T>().map_err(|_| perr(line, col, format!("bad list entry `{}`", s.trim()))))
        .collect()
}

fn parse_header(body: &str, line: usize, col0: usize) -> Result<FiniteBlockAlgebra, FileError> {
    let mut shapes = None;
    let mut weights = None;
    let mut ratio = None;
    let mut tail_dim = 1;
    for (k, v, col) in fields(body, line, col0)? {
        match k.as_str() {
            "shapes" => shapes = Some(parse_list::<usize>(&v, line, col)?),
            "weights_prefix" => weights = Some(parse_list::<f64>(&v, line, col)?),
            "tail_ratio" => {
                ratio = if v == "none" {
                    None
                } else {
                    Some(v.parse::<f64>().map_err(|_| perr(line, col, format!("bad tail ratio `{v}`")))?)
                }
            }
            "tail_dim" => tail_dim = v.parse().map_err(|_| perr(line, col, format!("bad tail dimension `{v}`")))?,
            _ => return Err(perr(line, col, format!("unknown field `{k}`"))),
        }
    }
    let shapes = shapes.ok_or_else(|| perr(line, col0, "missing shapes"))?;
    let weights = weights.ok_or_else(|| perr(line, col0, "missing weights_prefix"))?;
    Ok(FiniteBlockAlgebra::with_tail_dim(shapes, weights, ratio, tail_dim)?)
}

/// Parses `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`.
pub fn parse_complex(tok: &str) -> Option<C64> {
    let tok = tok.trim();
    let Some(body) = tok.strip_suffix('i') else {
        return tok.parse::<f64>().ok().map(|re| C64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&j| (bytes[j] == b'+' || bytes[j] == b'-') && !matches!(bytes[j - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(j) => (&body[..j], &body[j..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => s.parse::<f64>().ok()?,
    };
    Some(C64::new(re.parse::<f64>().ok()?, im))
}

fn parse_matrix(body: &str, line: usize, col0: usize) -> Result<CMatrix, FileError> {
    let mut entries = Vec::new();
    let mut width = None;
    let mut offset = 0;
    let rows: Vec<&str> = body.split(';').collect();
    for row in &rows {
        let mut count = 0;
        let mut pos = 0;
        for tok in row.split_whitespace() {
            let at = row[pos..].find(tok).map(|p| p + pos).unwrap_or(pos);
            pos = at + tok.len();
            let z = parse_complex(tok).ok_or_else(|| perr(line, col0 + offset + at, format!("bad complex number `{tok}`")))?;
            entries.push(z);
            count += 1;
        }
        match width {
            None => width = Some(count),
            Some(w) if w != count => return Err(perr(line, col0 + offset, format!("row has {count} entries, expected {w}"))),
            _ => {}
        }
        offset += row.len() + 1;
    }
    let n = width.unwrap_or(0);
    if n == 0 || rows.len() != n {
        return Err(perr(line, col0, format!("expected a square matrix, got {} rows of {n}", rows.len())));
    }
    CMatrix::from_rows(n, &entries).map_err(|e| perr(line, col0, e.to_string()))
}

fn parse_tail(body: &str, line: usize, col0: usize) -> Result<Formula, FileError> {
    let mut kind = None;
    let mut formula = None;
    for (k, v, col) in fields(body, line, col0)? {
        match k.as_str() {
            "kind" => kind = Some(v),
            "formula" => formula = Some(parse_formula(&v).map_err(|(c, m)| perr(line, col + 8 + c, m))?),
            _ => return Err(perr(line, col, format!("unknown field `{k}`"))),
        }
    }
    match kind.as_deref() {
        Some("zero") => Ok(Formula::zero()),
        Some("scalar") => formula.ok_or_else(|| perr(line, col0, "scalar tail needs formula=...")),
        Some(other) => Err(perr(line, col0, format!("unknown tail kind `{other}`"))),
        None => Err(perr(line, col0, "missing kind")),
    }
}

/// Parses a tail expression in `k`: `+ - * /`, integer powers `^n`, the
/// imaginary unit `i` (also as a number suffix, `2.5i`) and `exp(...)` of an
/// expression linear in `k`. Errors carry a 0-based character offset.
pub fn parse_formula(src: &str) -> Result<Formula, (usize, String)> {
    let mut p = ExprParser { chars: src.chars().collect(), pos: 0 };
    let f = p.expr()?;
    p.skip_ws();
    if p.pos != p.chars.len() {
        return Err((p.pos, format!("unexpected `{}`", p.chars[p.pos])));
    }
    Ok(f)
}

struct ExprParser {
    chars: Vec<char>,
    pos: usize,
}

type PResult = Result<Formula, (usize, String)>;

impl ExprParser {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self) -> PResult {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            if c != '+' && c != '-' {
                break;
            }
            let at = self.pos;
            self.pos += 1;
            let rhs = self.term()?;
            let r = if c == '+' { acc.add(&rhs) } else { acc.sub(&rhs) };
            acc = r.map_err(|e| (at, e.to_string()))?;
        }
        Ok(acc)
    }

    fn term(&mut self) -> PResult {
        let mut acc = self.unary()?;
        while let Some(c) = self.peek() {
            if c != '*' && c != '/' {
                break;
            }
            let at = self.pos;
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if c == '*' {
                acc.mul(&rhs)
            } else {
                match rhs.constant_value() {
                    Some(d) if d != C64::new(0.0, 0.0) => acc.scale(d.inv()),
                    _ => return Err((at, "division only by nonzero constants".into())),
                }
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> PResult {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> PResult {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let digits: String = self.chars[start..self.pos].iter().collect();
            let n: u32 = digits.parse().map_err(|_| (start, "expected a nonnegative integer exponent".to_string()))?;
            return Ok(base.pow(n));
        }
        Ok(base)
    }

    fn atom(&mut self) -> PResult {
        let Some(c) = self.peek() else {
            return Err((self.pos, "unexpected end of expression".into()));
        };
        let at = self.pos;
        if c == '(' {
            self.pos += 1;
            let inner = self.expr()?;
            if self.peek() != Some(')') {
                return Err((self.pos, "expected `)`".into()));
            }
            self.pos += 1;
            return Ok(inner);
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_alphanumeric() {
                self.pos += 1;
            }
            let ident: String = self.chars[start..self.pos].iter().collect();
            return match ident.as_str() {
                "k" => Ok(Formula::index()),
                "i" => Ok(Formula::constant(C64::new(0.0, 1.0))),
                "exp" => {
                    if self.peek() != Some('(') {
                        return Err((self.pos, "expected `(` after exp".into()));
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    if self.peek() != Some(')') {
                        return Err((self.pos, "expected `)`".into()));
                    }
                    self.pos += 1;
                    arg.exp_scaled(1.0).map_err(|e| (at, e.to_string()))
                }
                _ => Err((at, format!("unknown identifier `{ident}`"))),
            };
        }
        Err((at, format!("unexpected `{c}`")))
    }

    fn number(&mut self) -> PResult {
        let start = self.pos;
        let n = self.chars.len();
        while self.pos < n && (self.chars[self.pos].is_ascii_digit() || self.chars[self.pos] == '.') {
            self.pos += 1;
        }
        if self.pos < n && matches!(self.chars[self.pos], 'e' | 'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < n && matches!(self.chars[self.pos], '+' | '-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < n && self.chars[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                // `e` was not an exponent
                self.pos = save;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        let x: f64 = text.parse().map_err(|_| (start, format!("bad number `{text}`")))?;
        let imaginary = self.pos < n
            && self.chars[self.pos] == 'i'
            && !self.chars.get(self.pos + 1).is_some_and(|c| c.is_ascii_alphanumeric());
        if imaginary {
            self.pos += 1;
            return Ok(Formula::constant(C64::new(0.0, x)));
        }
        Ok(Formula::real_constant(x))
    }
}

fn fmt_entry(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", z.re, sign, z.im.abs())
}

/// Serializes an operator; `parse_operator` reads it back.
pub fn write_operator(op: &BlockOperator) -> String {
    let mut out = write_algebra(op.algebra());
    for (k, m) in op.prefix().iter().enumerate() {
        let rows: Vec<String> = (0..m.dim())
            .map(|r| (0..m.dim()).map(|c| fmt_entry(m[(r, c)])).collect::<Vec<_>>().join(" "))
            .collect();
        let _ = writeln!(out, "block {k}: {}", rows.join("; "));
    }
    match op.tail() {
        TailRule::Zero => out.push_str("tail: kind=zero\n"),
        TailRule::Scalar(f) => {
            let _ = writeln!(out, "tail: kind=scalar formula={}", f.to_string().replace(' ', ""));
        }
    }
    out
}

pub fn write_algebra(alg: &FiniteBlockAlgebra) -> String {
    let list = |xs: Vec<String>| format!("[{}]", xs.join(","));
    let shapes = list(alg.shape().iter().map(|n| n.to_string()).collect());
    let weights = list(alg.explicit_weights().iter().map(|w| w.to_string()).collect());
    let mut out = format!("algebra: shapes={shapes} weights_prefix={weights}");
    if let Some(t) = alg.tail() {
        let _ = write!(out, " tail_ratio={}", t.ratio);
        if t.block_dim != 1 {
            let _ = write!(out, " tail_dim={}", t.block_dim);
        }
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn minimal_file_is_zero() {
        let p = parse_operator("algebra: shapes=[1] weights_prefix=[1]\nblock 0: 0\n").unwrap();
        let op = p.into_operator();
        assert_eq!(op, BlockOperator::zero(op.algebra().clone()));
    }

    #[test]
    fn tail_k_is_unbounded() {
        let text = "algebra: shapes=[] weights_prefix=[] tail_ratio=0.5\ntail: kind=scalar formula=k\n";
        let op = parse_operator(text).unwrap().into_operator();
        assert!(!op.is_bounded());
        assert_eq!(op.block(7)[(0, 0)], c(7.0, 0.0));
    }

    #[test]
    fn malformed_weight_line() {
        let text = "# header\nalgebra: shapes=[1,1] weights_prefix=[0.5,x]\n";
        match parse_operator(text) {
            Err(FileError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_weights_and_dims() {
        let text = "algebra: shapes=[1,1] weights_prefix=[0.5,0.4]\n";
        assert!(matches!(parse_operator(text), Err(FileError::Block(BlockError::BadWeights(_)))));
        let text = "algebra: shapes=[2] weights_prefix=[1]\nblock 0: 1\n";
        assert!(matches!(
            parse_operator(text),
            Err(FileError::Block(BlockError::DimensionMismatch { block: 0, expected: 2, found: 1 }))
        ));
    }

    #[test]
    fn complex_tokens() {
        assert_eq!(parse_complex("1+2i"), Some(c(1.0, 2.0)));
        assert_eq!(parse_complex("-1.5e-3-2i"), Some(c(-1.5e-3, -2.0)));
        assert_eq!(parse_complex("-i"), Some(c(0.0, -1.0)));
        assert_eq!(parse_complex("3i"), Some(c(0.0, 3.0)));
        assert_eq!(parse_complex("2e+2"), Some(c(200.0, 0.0)));
        assert_eq!(parse_complex("1+1e-2i"), Some(c(1.0, 0.01)));
        assert_eq!(parse_complex("x"), None);
    }

    #[test]
    fn formula_expressions() {
        let f = parse_formula("2*k^2 - 3i*k + 1").unwrap();
        assert_eq!(f.eval(2), c(9.0, -6.0));
        let g = parse_formula("exp(-0.5*k)*(1+2i)").unwrap();
        assert!((g.eval(2) - c(1.0, 2.0) * (-1.0f64).exp()).norm() < 1e-15);
        assert!(parse_formula("exp(k^2)").is_err());
        assert!(parse_formula("k/0").is_err());
        assert!(parse_formula("exp(-k) + k").is_err());
    }

    #[test]
    fn display_round_trips_through_parser() {
        let fs = [
            Formula::index(),
            Formula::zero(),
            Formula::new(c(-0.5, 0.25), vec![c(2.0, -1.0), c(0.0, 0.5), c(1e-3, 0.0)]),
        ];
        for f in fs {
            let back = parse_formula(&f.to_string().replace(' ', "")).unwrap();
            for k in 0..6 {
                assert!((back.eval(k) - f.eval(k)).norm() <= 1e-12 * (1.0 + f.abs_at(k)), "{f}");
            }
        }
    }

    #[test]
    fn operator_round_trip() {
        let alg = Arc::new(FiniteBlockAlgebra::new(vec![2, 1], vec![0.5, 0.25], Some(0.5)).unwrap());
        let m = CMatrix::from_rows(2, &[c(1.0, 0.0), c(2.0, -1.0), c(2.0, 1.0), c(3.0, 0.0)]).unwrap();
        let op = BlockOperator::with_formula(
            alg,
            vec![m, CMatrix::scalar(1, c(0.0, 0.5))],
            Formula::new(c(-0.5, 0.0), vec![c(1.0, 2.0)]),
        )
        .unwrap();
        let text = write_operator(&op);
        let back = parse_operator(&text).unwrap().into_operator();
        assert_eq!(back.prefix(), op.prefix());
        assert!(back.max_block_diff(&op) < 1e-14, "{text}");
    }
}
