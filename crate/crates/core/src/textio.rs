//! Canonical text format for kernel values, with a hand-rolled
//! recursive-descent parser.
//!
//! A document is a header followed by a body:
//!
//! ```text
//! n=3; cap=6; kind=multivector;
//! x1 d2^d3 - x2 d1^d3 + x3 d1^d2
//! ```
//!
//! Kinds: `multivector` (basis factors `d<i>`), `form` (`dx<i>`),
//! `function` (a bare polynomial), and `map` (assignments
//! `x<i> -> expr` separated by `;`). Coefficient expressions use
//! `+ - * / ^` with integer literals, `/` restricted to division by a
//! nonzero constant, and juxtaposition allowed for multiplication.
//! Comments run from `#` to end of line; whitespace is insignificant.
//!
//! Canonical output lists tensor components by increasing index tuple,
//! each polynomial in graded-lex order with the leading term first,
//! rationals always as `p` or `p/q`, never floating point. `parse` after
//! `format` is the identity.

use crate::error::KernelError;
use crate::polymap::PolyMap;
use crate::polyring::{Mono, TruncPoly};
use crate::rat::Rat;
use crate::tensor::{Alt, Co, Contra, DiffForm, Multivector, Variance};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

// ---------------------------------------------------------------------
// formatting
// ---------------------------------------------------------------------

pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn format_mono(m: &Mono) -> String {
    let mut parts = Vec::new();
    for (i, e) in m.exps().into_iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("x{}", i + 1)),
            _ => parts.push(format!("x{}^{}", i + 1, e)),
        }
    }
    parts.join("*")
}

/// One rendered term: `magnitude-part` with an explicit leading sign
/// returned separately.
fn render_term(c: &Rat, mono: &Mono, basis: Option<&str>) -> (bool, String) {
    let negative = c.is_negative();
    let mag = c.abs();
    let mono_txt = format_mono(mono);
    let mut pieces: Vec<String> = Vec::new();
    let coeff_needed = !mag.is_one() || (mono_txt.is_empty() && basis.is_none());
    if coeff_needed {
        pieces.push(format_rat(&mag));
    }
    if !mono_txt.is_empty() {
        pieces.push(mono_txt);
    }
    let mut txt = pieces.join("*");
    if let Some(b) = basis {
        if txt.is_empty() {
            txt = b.to_string();
        } else {
            txt = format!("{txt} {b}");
        }
    }
    (negative, txt)
}

fn join_terms(terms: Vec<(bool, String)>) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (neg, txt)) in terms.into_iter().enumerate() {
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        out.push_str(&txt);
    }
    out
}

/// Polynomial terms in graded-lex order, leading term first.
pub fn format_poly(p: &TruncPoly) -> String {
    let terms: Vec<(bool, String)> = p
        .terms()
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .map(|(m, c)| render_term(c, m, None))
        .collect();
    join_terms(terms)
}

fn basis_text(idx: &[usize], prefix: &str) -> String {
    idx.iter()
        .map(|&i| format!("{prefix}{}", i + 1))
        .collect::<Vec<_>>()
        .join("^")
}

fn format_tensor_with_prefix<V: Variance>(t: &Alt<V>, prefix: &str) -> String {
    let mut terms = Vec::new();
    for (idx, p) in t.components() {
        let basis = if idx.is_empty() {
            None
        } else {
            Some(basis_text(idx, prefix))
        };
        for (m, c) in p.terms().collect::<Vec<_>>().into_iter().rev() {
            terms.push(render_term(c, m, basis.as_deref()));
        }
    }
    join_terms(terms)
}

pub fn format_multivector(t: &Multivector) -> String {
    format_tensor_with_prefix(t, "d")
}

pub fn format_form(t: &DiffForm) -> String {
    format_tensor_with_prefix(t, "dx")
}

pub fn format_map(map: &PolyMap) -> String {
    map.components()
        .iter()
        .enumerate()
        .map(|(i, p)| format!("x{} -> {}", i + 1, format_poly(p)))
        .collect::<Vec<_>>()
        .join(";\n")
}

/// Component polynomials of a map as canonical strings.
pub fn map_component_strings(map: &PolyMap) -> Vec<String> {
    map.components().iter().map(format_poly).collect()
}

// ---------------------------------------------------------------------
// documents
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocKind {
    Multivector,
    Form,
    Map,
    Function,
}

impl DocKind {
    pub fn name(&self) -> &'static str {
        match self {
            DocKind::Multivector => "multivector",
            DocKind::Form => "form",
            DocKind::Map => "map",
            DocKind::Function => "function",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DocBody {
    Multivector(Multivector),
    Form(DiffForm),
    Map(PolyMap),
    Function(TruncPoly),
}

/// A parsed input file: dimension, cap, and a type-checked body.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorDocument {
    pub n: usize,
    pub cap: u32,
    pub body: DocBody,
}

impl TensorDocument {
    pub fn kind(&self) -> DocKind {
        match &self.body {
            DocBody::Multivector(_) => DocKind::Multivector,
            DocBody::Form(_) => DocKind::Form,
            DocBody::Map(_) => DocKind::Map,
            DocBody::Function(_) => DocKind::Function,
        }
    }

    /// Tensor degree of the body (0 for functions; 1 for maps, whose
    /// components are vectors of polynomials).
    pub fn degree(&self) -> usize {
        match &self.body {
            DocBody::Multivector(t) => t.degree(),
            DocBody::Form(t) => t.degree(),
            DocBody::Map(_) => 1,
            DocBody::Function(_) => 0,
        }
    }

    pub fn format(&self) -> String {
        let body = match &self.body {
            DocBody::Multivector(t) => format_multivector(t),
            DocBody::Form(t) => format_form(t),
            DocBody::Map(m) => format_map(m),
            DocBody::Function(p) => format_poly(p),
        };
        format!(
            "n={}; cap={}; kind={};\n{}\n",
            self.n,
            self.cap,
            self.kind().name(),
            body
        )
    }
}

// ---------------------------------------------------------------------
// lexer
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Var(usize),
    DVec(usize),
    DForm(usize),
    Word(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Semi,
    Eq,
    Arrow,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(v) => format!("integer {v}"),
            Tok::Var(i) => format!("x{i}"),
            Tok::DVec(i) => format!("d{i}"),
            Tok::DForm(i) => format!("dx{i}"),
            Tok::Word(w) => format!("'{w}'"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Semi => "';'".into(),
            Tok::Eq => "'='".into(),
            Tok::Arrow => "'->'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

/// Syntax error with position and the token set that would have been
/// accepted.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{line}:{col}: {message} (expected {})", expected.join(" or "))]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseError {
    fn new(line: usize, col: usize, message: impl Into<String>, expected: &[&str]) -> Self {
        ParseError {
            line,
            col,
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }
    loop {
        let (tline, tcol) = (line, col);
        let Some(&c) = chars.peek() else { break };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
            }
            '0'..='9' => {
                let mut digits = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        digits.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                let v = BigInt::parse_bytes(digits.as_bytes(), 10).expect("digits");
                out.push(Spanned {
                    tok: Tok::Int(v),
                    line: tline,
                    col: tcol,
                });
            }
            'a'..='z' | 'A'..='Z' => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphabetic() {
                        word.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                let mut digits = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        digits.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                let tok = if digits.is_empty() {
                    Tok::Word(word)
                } else {
                    let idx: usize = digits.parse().map_err(|_| {
                        ParseError::new(tline, tcol, "index too large", &["small index"])
                    })?;
                    match word.as_str() {
                        "x" => Tok::Var(idx),
                        "d" => Tok::DVec(idx),
                        "dx" => Tok::DForm(idx),
                        _ => {
                            return Err(ParseError::new(
                                tline,
                                tcol,
                                format!("unknown symbol '{word}{digits}'"),
                                &["x<i>", "d<i>", "dx<i>"],
                            ))
                        }
                    }
                };
                out.push(Spanned {
                    tok,
                    line: tline,
                    col: tcol,
                });
            }
            _ => {
                bump!();
                let tok = match c {
                    '+' => Tok::Plus,
                    '-' => {
                        if chars.peek() == Some(&'>') {
                            bump!();
                            Tok::Arrow
                        } else {
                            Tok::Minus
                        }
                    }
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ';' => Tok::Semi,
                    '=' => Tok::Eq,
                    other => {
                        return Err(ParseError::new(
                            tline,
                            tcol,
                            format!("unexpected character '{other}'"),
                            &["an operator, index, or number"],
                        ))
                    }
                };
                out.push(Spanned {
                    tok,
                    line: tline,
                    col: tcol,
                });
            }
        }
    }
    out.push(Spanned {
        tok: Tok::End,
        line,
        col,
    });
    Ok(out)
}

// ---------------------------------------------------------------------
// parser
// ---------------------------------------------------------------------

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    n: usize,
    cap: u32,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn advance(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, message: impl Into<String>, expected: &[&str]) -> ParseError {
        let t = self.peek();
        ParseError::new(t.line, t.col, message, expected)
    }

    fn expect(&mut self, want: Tok, expected: &str) -> Result<Spanned, ParseError> {
        if self.peek().tok == want {
            Ok(self.advance())
        } else {
            Err(self.err(
                format!("found {}", self.peek().tok.describe()),
                &[expected],
            ))
        }
    }

    fn expect_int(&mut self, what: &str) -> Result<BigInt, ParseError> {
        match self.peek().tok.clone() {
            Tok::Int(v) => {
                self.advance();
                Ok(v)
            }
            other => Err(self.err(format!("found {}", other.describe()), &[what])),
        }
    }

    fn expect_word(&mut self, want: &str) -> Result<(), ParseError> {
        match &self.peek().tok {
            Tok::Word(w) if w == want => {
                self.advance();
                Ok(())
            }
            other => {
                let d = other.describe();
                Err(self.err(format!("found {d}"), &[&format!("'{want}'")]))
            }
        }
    }

    fn var_index(&mut self, idx: usize) -> Result<usize, ParseError> {
        if idx == 0 || idx > self.n {
            Err(self.err(
                format!("index {idx} out of range 1..={}", self.n),
                &["an index within the declared dimension"],
            ))
        } else {
            Ok(idx - 1)
        }
    }

    // expr := term (('+' | '-') term)*
    fn parse_expr(&mut self) -> Result<TruncPoly, ParseError> {
        let mut acc = self.parse_term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.advance();
                    let t = self.parse_term()?;
                    acc = acc.add(&t).expect("same shape");
                }
                Tok::Minus => {
                    self.advance();
                    let t = self.parse_term()?;
                    acc = acc.sub(&t).expect("same shape");
                }
                _ => return Ok(acc),
            }
        }
    }

    // term := power (('*' | '/') power | power)*   (juxtaposition = '*')
    fn parse_term(&mut self) -> Result<TruncPoly, ParseError> {
        let mut acc = self.parse_power()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.advance();
                    let p = self.parse_power()?;
                    acc = acc.mul(&p).expect("same shape");
                }
                Tok::Slash => {
                    self.advance();
                    let p = self.parse_power()?;
                    let c = constant_of(&p).ok_or_else(|| {
                        self.err(
                            "division is only defined by a nonzero constant",
                            &["a constant divisor"],
                        )
                    })?;
                    if c.is_zero() {
                        return Err(self.err("division by zero", &["a nonzero divisor"]));
                    }
                    acc = acc.scale(&(Rat::one() / c));
                }
                Tok::Int(_) | Tok::Var(_) | Tok::LParen => {
                    let p = self.parse_power()?;
                    acc = acc.mul(&p).expect("same shape");
                }
                _ => return Ok(acc),
            }
        }
    }

    // power := factor ('^' INT)?
    fn parse_power(&mut self) -> Result<TruncPoly, ParseError> {
        let base = self.parse_factor()?;
        if self.peek().tok == Tok::Caret {
            self.advance();
            let e = self.expect_int("a nonnegative integer exponent")?;
            let e: u32 = e.try_into().map_err(|_| {
                self.err("exponent out of range", &["a small nonnegative exponent"])
            })?;
            Ok(base.pow(e))
        } else {
            Ok(base)
        }
    }

    fn parse_factor(&mut self) -> Result<TruncPoly, ParseError> {
        match self.peek().tok.clone() {
            Tok::Int(v) => {
                self.advance();
                Ok(TruncPoly::constant(
                    self.n,
                    self.cap,
                    Rat::from_integer(v),
                ))
            }
            Tok::Var(i) => {
                self.advance();
                let idx = self.var_index(i)?;
                Ok(TruncPoly::var(self.n, self.cap, idx))
            }
            Tok::LParen => {
                self.advance();
                let e = self.parse_expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Minus => {
                self.advance();
                Ok(self.parse_factor()?.neg())
            }
            other => Err(self.err(
                format!("found {}", other.describe()),
                &["a number", "x<i>", "'('", "'-'"],
            )),
        }
    }

    /// Basis chain `d1^d2^...` (or `dx` for forms). Returns raw indices.
    fn parse_basis(&mut self, form: bool) -> Result<Option<Vec<usize>>, ParseError> {
        let first = match self.peek().tok {
            Tok::DVec(i) if !form => i,
            Tok::DForm(i) if form => i,
            Tok::DVec(_) => {
                return Err(self.err(
                    "found a multivector basis factor in a form document",
                    &["dx<i>"],
                ))
            }
            Tok::DForm(_) => {
                return Err(self.err(
                    "found a form basis factor in a multivector document",
                    &["d<i>"],
                ))
            }
            _ => return Ok(None),
        };
        self.advance();
        let mut idx = vec![self.var_index(first)?];
        while self.peek().tok == Tok::Caret {
            // a caret after a basis factor must continue the wedge
            self.advance();
            let next = match self.peek().tok {
                Tok::DVec(i) if !form => i,
                Tok::DForm(i) if form => i,
                _ => {
                    return Err(self.err(
                        format!("found {}", self.peek().tok.describe()),
                        &[if form { "dx<i>" } else { "d<i>" }],
                    ))
                }
            };
            self.advance();
            idx.push(self.var_index(next)?);
        }
        Ok(Some(idx))
    }

    /// Tensor body: a signed sum of `coefficient basis` terms.
    fn parse_tensor_terms(
        &mut self,
        form: bool,
    ) -> Result<Vec<(TruncPoly, Vec<usize>)>, ParseError> {
        let mut out = Vec::new();
        let mut first = true;
        loop {
            let negate = match self.peek().tok {
                Tok::Plus if !first => {
                    self.advance();
                    false
                }
                Tok::Minus => {
                    self.advance();
                    true
                }
                Tok::End | Tok::Semi => break,
                _ if first => false,
                _ => {
                    return Err(self.err(
                        format!("found {}", self.peek().tok.describe()),
                        &["'+'", "'-'", "end of input"],
                    ))
                }
            };
            first = false;
            // coefficient part (may be absent when the term is a bare basis)
            let coeff = match self.peek().tok {
                Tok::DVec(_) | Tok::DForm(_) => TruncPoly::one(self.n, self.cap),
                _ => {
                    let mut c = self.parse_term()?;
                    // allow products continuing right up to the basis
                    while matches!(self.peek().tok, Tok::Star) {
                        self.advance();
                        let p = self.parse_power()?;
                        c = c.mul(&p).expect("same shape");
                    }
                    c
                }
            };
            let coeff = if negate { coeff.neg() } else { coeff };
            let basis = self.parse_basis(form)?.unwrap_or_default();
            out.push((coeff, basis));
        }
        Ok(out)
    }
}

fn constant_of(p: &TruncPoly) -> Option<Rat> {
    if p.is_zero() {
        return Some(Rat::zero());
    }
    let mut terms = p.terms();
    let (m, c) = terms.next()?;
    if terms.next().is_none() && m.is_one() {
        Some(c.clone())
    } else {
        None
    }
}

/// Parses a complete document (header and body).
pub fn parse_document(text: &str) -> Result<TensorDocument, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        n: 0,
        cap: 0,
    };
    p.expect_word("n")?;
    p.expect(Tok::Eq, "'='")?;
    let n: usize = p
        .expect_int("the dimension")?
        .try_into()
        .map_err(|_| p.err("dimension out of range", &["a small dimension"]))?;
    if n == 0 {
        return Err(p.err("dimension must be positive", &["n >= 1"]));
    }
    p.expect(Tok::Semi, "';'")?;
    p.expect_word("cap")?;
    p.expect(Tok::Eq, "'='")?;
    let cap: u32 = p
        .expect_int("the truncation cap")?
        .try_into()
        .map_err(|_| p.err("cap out of range", &["a small cap"]))?;
    p.expect(Tok::Semi, "';'")?;
    p.expect_word("kind")?;
    p.expect(Tok::Eq, "'='")?;
    let kind = match &p.peek().tok {
        Tok::Word(w) => match w.as_str() {
            "multivector" => DocKind::Multivector,
            "form" => DocKind::Form,
            "map" => DocKind::Map,
            "function" => DocKind::Function,
            other => {
                let msg = format!("unknown kind '{other}'");
                return Err(p.err(msg, &["multivector", "form", "map", "function"]));
            }
        },
        other => {
            let msg = format!("found {}", other.describe());
            return Err(p.err(msg, &["multivector", "form", "map", "function"]));
        }
    };
    p.advance();
    p.expect(Tok::Semi, "';'")?;
    p.n = n;
    p.cap = cap;

    let body = match kind {
        DocKind::Function => {
            let e = p.parse_expr()?;
            p.expect(Tok::End, "end of input")?;
            DocBody::Function(e)
        }
        DocKind::Multivector | DocKind::Form => {
            let terms = p.parse_tensor_terms(kind == DocKind::Form)?;
            p.expect(Tok::End, "end of input")?;
            let degree = terms
                .iter()
                .find(|(c, _)| !c.is_zero())
                .map(|(_, b)| b.len());
            let degree = match degree {
                Some(d) => d,
                None => terms.first().map(|(_, b)| b.len()).unwrap_or(0),
            };
            for (c, b) in &terms {
                if b.len() != degree && !c.is_zero() {
                    return Err(ParseError::new(
                        1,
                        1,
                        format!(
                            "degree inconsistency: wedge tuples of length {} and {}",
                            degree,
                            b.len()
                        ),
                        &["terms of a single tensor degree"],
                    ));
                }
            }
            if kind == DocKind::Multivector {
                let mut t = Multivector::zero(n, degree, cap);
                for (c, b) in terms {
                    add_tensor_term(&mut t, &b, c)?;
                }
                DocBody::Multivector(t)
            } else {
                let mut t = DiffForm::zero(n, degree, cap);
                for (c, b) in terms {
                    add_tensor_term(&mut t, &b, c)?;
                }
                DocBody::Form(t)
            }
        }
        DocKind::Map => {
            let mut comps: Vec<Option<TruncPoly>> = vec![None; n];
            loop {
                if p.peek().tok == Tok::End {
                    break;
                }
                let idx = match p.peek().tok {
                    Tok::Var(i) => i,
                    _ => {
                        return Err(p.err(
                            format!("found {}", p.peek().tok.describe()),
                            &["x<i> on the left of an assignment"],
                        ))
                    }
                };
                p.advance();
                let i = p.var_index(idx)?;
                p.expect(Tok::Arrow, "'->'")?;
                let e = p.parse_expr()?;
                if comps[i].is_some() {
                    return Err(p.err(
                        format!("component x{} assigned twice", i + 1),
                        &["each component exactly once"],
                    ));
                }
                comps[i] = Some(e);
                if p.peek().tok == Tok::Semi {
                    p.advance();
                }
            }
            let missing: Vec<String> = comps
                .iter()
                .enumerate()
                .filter(|(_, c)| c.is_none())
                .map(|(i, _)| format!("x{}", i + 1))
                .collect();
            if !missing.is_empty() {
                return Err(p.err(
                    format!("map is missing components: {}", missing.join(", ")),
                    &["every component assigned"],
                ));
            }
            let map = PolyMap::new(comps.into_iter().map(Option::unwrap).collect())
                .map_err(|e| p.err(e.to_string(), &["an invertible map"]))?;
            DocBody::Map(map)
        }
    };
    Ok(TensorDocument { n, cap, body })
}

fn add_tensor_term<V: Variance>(
    t: &mut Alt<V>,
    idx: &[usize],
    c: TruncPoly,
) -> Result<(), ParseError> {
    t.add_term(idx, c).map_err(|e| match e {
        KernelError::Degree(msg) => ParseError::new(1, 1, msg, &["distinct wedge indices"]),
        other => ParseError::new(1, 1, other.to_string(), &["a well-formed term"]),
    })
}

/// Convenience wrappers for single-value documents.
pub fn multivector_document(t: &Multivector) -> TensorDocument {
    TensorDocument {
        n: t.nvars(),
        cap: t.cap(),
        body: DocBody::Multivector(t.clone()),
    }
}

pub fn form_document(t: &DiffForm) -> TensorDocument {
    TensorDocument {
        n: t.nvars(),
        cap: t.cap(),
        body: DocBody::Form(t.clone()),
    }
}

impl std::fmt::Display for DocKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

// mark as used for both variances (the formatter is generic)
const _: fn(&Alt<Contra>) -> String = |t| format_tensor_with_prefix(t, "d");
const _: fn(&Alt<Co>) -> String = |t| format_tensor_with_prefix(t, "dx");

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ratio};

    fn x(n: usize, cap: u32, i: usize) -> TruncPoly {
        TruncPoly::var(n, cap, i)
    }

    #[test]
    fn parse_euler_bivector() {
        let doc = parse_document(
            "n=3; cap=4; kind=multivector;\nx1 d2^d3 - x2 d1^d3 + x3 d1^d2\n",
        )
        .unwrap();
        let DocBody::Multivector(t) = &doc.body else {
            panic!("wrong body kind")
        };
        assert_eq!(t.degree(), 2);
        assert_eq!(t.component(&[1, 2]), x(3, 4, 0));
        assert_eq!(t.component(&[0, 2]), x(3, 4, 1).neg());
        assert_eq!(t.component(&[0, 1]), x(3, 4, 2));
    }

    #[test]
    fn parse_hyperbolic_function() {
        let doc =
            parse_document("n=2; cap=4; kind=function;\n1/2 * (x1^2 - x2^2)\n").unwrap();
        let DocBody::Function(p) = &doc.body else {
            panic!()
        };
        let expect = x(2, 4, 0)
            .pow(2)
            .sub(&x(2, 4, 1).pow(2))
            .unwrap()
            .scale(&ratio(1, 2));
        assert_eq!(p, &expect);
    }

    #[test]
    fn repeated_wedge_index_is_an_error() {
        let err = parse_document("n=2; cap=2; kind=multivector;\nd1^d1\n").unwrap_err();
        assert!(err.message.contains("repeated index"), "{err}");
    }

    #[test]
    fn parse_map_round_trip() {
        let text = "n=2; cap=5; kind=map;\nx1 -> x1 - 1/2*x2^2;\nx2 -> x2\n";
        let doc = parse_document(text).unwrap();
        let formatted = doc.format();
        let again = parse_document(&formatted).unwrap();
        assert_eq!(doc, again);
    }

    #[test]
    fn format_is_canonical_and_stable() {
        let doc = parse_document(
            "n=3;cap=3;kind=multivector;\n  x3 d1^d2 + x1 d2^d3 - x2 d1^d3 # comment\n",
        )
        .unwrap();
        let once = doc.format();
        let twice = parse_document(&once).unwrap().format();
        assert_eq!(once, twice);
        assert_eq!(
            once,
            "n=3; cap=3; kind=multivector;\nx3 d1^d2 - x2 d1^d3 + x1 d2^d3\n"
        );
    }

    #[test]
    fn zero_formats_as_zero() {
        let t = Multivector::zero(2, 1, 3);
        assert_eq!(format_multivector(&t), "0");
        let doc = parse_document("n=2; cap=3; kind=function;\n0\n").unwrap();
        let DocBody::Function(p) = &doc.body else { panic!() };
        assert!(p.is_zero());
    }

    #[test]
    fn poly_order_is_graded_lex_leading_first() {
        let p = x(2, 3, 0)
            .pow(2)
            .add(&x(2, 3, 1)).unwrap()
            .add(&TruncPoly::constant(2, 3, rat(7))).unwrap()
            .add(&x(2, 3, 0).mul(&x(2, 3, 1)).unwrap().scale(&rat(-3))).unwrap();
        assert_eq!(format_poly(&p), "x1^2 - 3*x1*x2 + x2 + 7");
    }

    #[test]
    fn error_carries_position_and_expectations() {
        let err = parse_document("n=2; cap=3; kind=multivector;\nx1 d2^x1\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(!err.expected.is_empty());
    }

    #[test]
    fn out_of_range_index_rejected() {
        let err = parse_document("n=2; cap=3; kind=function;\nx5\n").unwrap_err();
        assert!(err.message.contains("out of range"));
    }
}
