//! Reader and writer for the OpenQASM 2 subset used by benchmark files.
//!
//! Accepted statements: the `OPENQASM 2.0;` header, an optional
//! `include "qelib1.inc";` (not read, the gate set is built in), one `qreg`,
//! any number of `creg`s, the gates `x y z h s sdg sx sxdg rz(expr) cx`,
//! `barrier`, `measure q[i] -> c[j];`, and the extension `delay[n] q[i];`
//! which idles a qubit for `n` dt. Classical bit targets of `measure` are
//! checked but not kept: outcomes are always ordered by qubit index.

use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::ir::{Circuit, GateKind, Instruction, Qubit};

/// Largest register accepted by the parser.
pub const MAX_REGISTER_SIZE: usize = 4096;

/// 1-based source position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum QasmErrorKind {
    Syntax(String),
    UnsupportedGate(String),
    MultipleQreg,
    Semantic(String),
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("{span}: {}", describe(.kind))]
pub struct QasmError {
    pub kind: QasmErrorKind,
    pub span: SourceSpan,
}

fn describe(kind: &QasmErrorKind) -> String {
    match kind {
        QasmErrorKind::Syntax(msg) => format!("syntax error: {msg}"),
        QasmErrorKind::UnsupportedGate(name) => format!("unsupported gate \"{name}\""),
        QasmErrorKind::MultipleQreg => "only one qreg declaration is supported".into(),
        QasmErrorKind::Semantic(msg) => msg.clone(),
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Real(f64),
    Str(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Real(x) => write!(f, "`{x}`"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, SourceSpan)>, QasmError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let span = SourceSpan { line, column: col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance(&mut i, &mut line, &mut col, '/');
            advance(&mut i, &mut line, &mut col, '*');
            loop {
                if i >= chars.len() {
                    return Err(syntax(span, "unterminated block comment"));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    advance(&mut i, &mut line, &mut col, '*');
                    advance(&mut i, &mut line, &mut col, '/');
                    break;
                }
                { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
            }
            out.push((Tok::Ident(s), span));
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let mut s = String::new();
            let mut real = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
            }
            if i < chars.len() && chars[i] == '.' {
                real = true;
                s.push('.');
                advance(&mut i, &mut line, &mut col, '.');
                while i < chars.len() && chars[i].is_ascii_digit() {
                    s.push(chars[i]);
                    { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let sign = chars.get(i + 1).is_some_and(|&c| c == '+' || c == '-');
                let digit_at = if sign { i + 2 } else { i + 1 };
                if chars.get(digit_at).is_some_and(char::is_ascii_digit) {
                    real = true;
                    s.push('e');
                    { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
                    if sign {
                        s.push(chars[i]);
                        { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
                    }
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        s.push(chars[i]);
                        { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
                    }
                }
            }
            let tok = if real {
                Tok::Real(
                    s.parse()
                        .map_err(|_| syntax(span, format!("bad number `{s}`")))?,
                )
            } else {
                Tok::Int(
                    s.parse()
                        .map_err(|_| syntax(span, format!("integer `{s}` too large")))?,
                )
            };
            out.push((tok, span));
            continue;
        }
        if c == '"' {
            advance(&mut i, &mut line, &mut col, c);
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => return Err(syntax(span, "unterminated string")),
                    Some('"') => {
                        advance(&mut i, &mut line, &mut col, '"');
                        break;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        advance(&mut i, &mut line, &mut col, ch);
                    }
                }
            }
            out.push((Tok::Str(s), span));
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            advance(&mut i, &mut line, &mut col, '-');
            advance(&mut i, &mut line, &mut col, '>');
            out.push((Tok::Sym("->"), span));
            continue;
        }
        let sym = match c {
            ';' => ";",
            ',' => ",",
            '[' => "[",
            ']' => "]",
            '(' => "(",
            ')' => ")",
            '+' => "+",
            '-' => "-",
            '*' => "*",
            '/' => "/",
            '^' => "^",
            _ => return Err(syntax(span, format!("unexpected character {c:?}"))),
        };
        advance(&mut i, &mut line, &mut col, c);
        out.push((Tok::Sym(sym), span));
    }
    out.push((Tok::Eof, SourceSpan { line, column: col }));
    Ok(out)
}

fn syntax(span: SourceSpan, msg: impl Into<String>) -> QasmError {
    QasmError {
        kind: QasmErrorKind::Syntax(msg.into()),
        span,
    }
}

fn semantic(span: SourceSpan, msg: impl Into<String>) -> QasmError {
    QasmError {
        kind: QasmErrorKind::Semantic(msg.into()),
        span,
    }
}

struct Register {
    name: String,
    size: usize,
}

enum Operand {
    One(Qubit),
    All,
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    qreg: Option<Register>,
    cregs: Vec<Register>,
    circuit: Option<Circuit>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn next(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect_sym(&mut self, sym: &'static str) -> Result<(), QasmError> {
        let (tok, span) = self.next();
        if tok == Tok::Sym(sym) {
            Ok(())
        } else {
            Err(syntax(span, format!("expected `{sym}`, found {tok}")))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, SourceSpan), QasmError> {
        match self.next() {
            (Tok::Ident(s), span) => Ok((s, span)),
            (tok, span) => Err(syntax(span, format!("expected identifier, found {tok}"))),
        }
    }

    fn expect_int(&mut self) -> Result<(u64, SourceSpan), QasmError> {
        match self.next() {
            (Tok::Int(n), span) => Ok((n, span)),
            (tok, span) => Err(syntax(span, format!("expected integer, found {tok}"))),
        }
    }

    fn header(&mut self) -> Result<(), QasmError> {
        let (name, span) = self.expect_ident()?;
        if name != "OPENQASM" {
            return Err(syntax(span, "expected `OPENQASM 2.0;` header"));
        }
        match self.next() {
            (Tok::Real(2.0), _) => {}
            (tok, span) => {
                return Err(syntax(span, format!("expected version 2.0, found {tok}")))
            }
        }
        self.expect_sym(";")
    }

    fn program(mut self) -> Result<Circuit, QasmError> {
        self.header()?;
        loop {
            if self.peek() == &Tok::Eof {
                break;
            }
            self.statement()?;
        }
        Ok(self.circuit.unwrap_or_else(|| Circuit::new(0)))
    }

    fn statement(&mut self) -> Result<(), QasmError> {
        let (word, span) = self.expect_ident()?;
        match word.as_str() {
            "include" => {
                match self.next() {
                    (Tok::Str(s), _) if s == "qelib1.inc" => {}
                    (Tok::Str(s), span) => {
                        return Err(semantic(span, format!("unsupported include \"{s}\"")))
                    }
                    (tok, span) => {
                        return Err(syntax(span, format!("expected file name, found {tok}")))
                    }
                }
                self.expect_sym(";")
            }
            "qreg" | "creg" => {
                let (name, _) = self.expect_ident()?;
                self.expect_sym("[")?;
                let (size, size_span) = self.expect_int()?;
                self.expect_sym("]")?;
                self.expect_sym(";")?;
                let size = usize::try_from(size)
                    .ok()
                    .filter(|&s| s <= MAX_REGISTER_SIZE)
                    .ok_or_else(|| semantic(size_span, "register too large"))?;
                if self.is_register(&name) {
                    return Err(semantic(span, format!("register `{name}` already declared")));
                }
                if word == "qreg" {
                    if self.qreg.is_some() {
                        return Err(QasmError {
                            kind: QasmErrorKind::MultipleQreg,
                            span,
                        });
                    }
                    self.qreg = Some(Register { name, size });
                    self.circuit = Some(Circuit::new(size));
                } else {
                    self.cregs.push(Register { name, size });
                }
                Ok(())
            }
            "measure" => {
                let targets = self.qubit_operand()?;
                self.expect_sym("->")?;
                self.classical_operand(&targets)?;
                self.expect_sym(";")?;
                for q in self.expand(&targets) {
                    self.emit(GateKind::Measure, vec![q], span)?;
                }
                Ok(())
            }
            "barrier" => {
                let operands = self.operand_list()?;
                self.expect_sym(";")?;
                let mut qubits = Vec::new();
                for op in &operands {
                    for q in self.expand(op) {
                        if !qubits.contains(&q) {
                            qubits.push(q);
                        }
                    }
                }
                self.emit(GateKind::Barrier, qubits, span)
            }
            "delay" => {
                self.expect_sym("[")?;
                let (n, _) = self.expect_int()?;
                self.expect_sym("]")?;
                let operands = self.operand_list()?;
                self.expect_sym(";")?;
                for op in &operands {
                    for q in self.expand(op) {
                        self.emit(GateKind::Delay(n), vec![q], span)?;
                    }
                }
                Ok(())
            }
            "cx" | "CX" => {
                let operands = self.operand_list()?;
                self.expect_sym(";")?;
                match operands.as_slice() {
                    [Operand::One(a), Operand::One(b)] => {
                        self.emit(GateKind::CX, vec![*a, *b], span)
                    }
                    [_, _] => Err(semantic(span, "cx needs indexed qubit operands")),
                    _ => Err(semantic(span, "cx takes exactly two operands")),
                }
            }
            name => {
                let kind = match name {
                    "x" => GateKind::X,
                    "y" => GateKind::Y,
                    "z" => GateKind::Z,
                    "h" => GateKind::H,
                    "s" => GateKind::S,
                    "sdg" => GateKind::Sdg,
                    "sx" => GateKind::SX,
                    "sxdg" => GateKind::SXdg,
                    "rz" => GateKind::RZ(0.0),
                    _ => {
                        return Err(QasmError {
                            kind: QasmErrorKind::UnsupportedGate(name.to_string()),
                            span,
                        })
                    }
                };
                let kind = if let GateKind::RZ(_) = kind {
                    self.expect_sym("(")?;
                    let theta = self.expr()?;
                    self.expect_sym(")")?;
                    GateKind::RZ(theta)
                } else {
                    kind
                };
                let operands = self.operand_list()?;
                self.expect_sym(";")?;
                if operands.len() != 1 {
                    return Err(semantic(span, format!("{name} takes one operand")));
                }
                for q in self.expand(&operands[0]) {
                    self.emit(kind, vec![q], span)?;
                }
                Ok(())
            }
        }
    }

    fn is_register(&self, name: &str) -> bool {
        self.qreg.as_ref().is_some_and(|r| r.name == name)
            || self.cregs.iter().any(|r| r.name == name)
    }

    fn emit(&mut self, kind: GateKind, qubits: Vec<Qubit>, span: SourceSpan) -> Result<(), QasmError> {
        let circuit = self
            .circuit
            .as_mut()
            .ok_or_else(|| semantic(span, "statement before qreg declaration"))?;
        let instr = Instruction::new(kind, qubits).map_err(|e| semantic(span, e.to_string()))?;
        circuit
            .push(instr)
            .map_err(|e| semantic(span, e.to_string()))?;
        Ok(())
    }

    fn expand(&self, op: &Operand) -> Vec<Qubit> {
        match op {
            Operand::One(q) => vec![*q],
            Operand::All => (0..self.qreg.as_ref().map_or(0, |r| r.size)).collect(),
        }
    }

    fn operand_list(&mut self) -> Result<Vec<Operand>, QasmError> {
        let mut ops = vec![self.qubit_operand()?];
        while self.peek() == &Tok::Sym(",") {
            self.next();
            ops.push(self.qubit_operand()?);
        }
        Ok(ops)
    }

    fn qubit_operand(&mut self) -> Result<Operand, QasmError> {
        let (name, span) = self.expect_ident()?;
        let size = match &self.qreg {
            Some(r) if r.name == name => r.size,
            _ => return Err(semantic(span, format!("unknown quantum register `{name}`"))),
        };
        self.index_suffix(size)
            .map(|idx| idx.map_or(Operand::All, Operand::One))
    }

    fn classical_operand(&mut self, quantum: &Operand) -> Result<(), QasmError> {
        let (name, span) = self.expect_ident()?;
        let size = self
            .cregs
            .iter()
            .find(|r| r.name == name)
            .map(|r| r.size)
            .ok_or_else(|| semantic(span, format!("unknown classical register `{name}`")))?;
        let idx = self.index_suffix(size)?;
        match (quantum, idx) {
            (Operand::One(_), Some(_)) => Ok(()),
            (Operand::All, None) if size >= self.qreg.as_ref().map_or(0, |r| r.size) => Ok(()),
            _ => Err(semantic(span, "measure operands do not match")),
        }
    }

    fn index_suffix(&mut self, size: usize) -> Result<Option<usize>, QasmError> {
        if self.peek() != &Tok::Sym("[") {
            return Ok(None);
        }
        self.next();
        let (idx, idx_span) = self.expect_int()?;
        self.expect_sym("]")?;
        match usize::try_from(idx) {
            Ok(i) if i < size => Ok(Some(i)),
            _ => Err(semantic(
                idx_span,
                format!("index {idx} out of range for register of size {size}"),
            )),
        }
    }

    fn expr(&mut self) -> Result<f64, QasmError> {
        let mut value = self.term()?;
        loop {
            match self.peek() {
                Tok::Sym("+") => {
                    self.next();
                    value += self.term()?;
                }
                Tok::Sym("-") => {
                    self.next();
                    value -= self.term()?;
                }
                _ => return Ok(value),
            }
        }
    }

    fn term(&mut self) -> Result<f64, QasmError> {
        let mut value = self.unary()?;
        loop {
            match self.peek() {
                Tok::Sym("*") => {
                    self.next();
                    value *= self.unary()?;
                }
                Tok::Sym("/") => {
                    self.next();
                    value /= self.unary()?;
                }
                _ => return Ok(value),
            }
        }
    }

    fn unary(&mut self) -> Result<f64, QasmError> {
        match self.peek() {
            Tok::Sym("-") => {
                self.next();
                Ok(-self.unary()?)
            }
            Tok::Sym("+") => {
                self.next();
                self.unary()
            }
            _ => {
                let base = self.primary()?;
                if self.peek() == &Tok::Sym("^") {
                    self.next();
                    let exp = self.unary()?;
                    Ok(base.powf(exp))
                } else {
                    Ok(base)
                }
            }
        }
    }

    fn primary(&mut self) -> Result<f64, QasmError> {
        match self.next() {
            (Tok::Int(n), _) => Ok(n as f64),
            (Tok::Real(x), _) => Ok(x),
            (Tok::Ident(s), _) if s == "pi" => Ok(std::f64::consts::PI),
            (Tok::Sym("("), _) => {
                let v = self.expr()?;
                self.expect_sym(")")?;
                Ok(v)
            }
            (tok, span) => Err(syntax(span, format!("expected expression, found {tok}"))),
        }
    }
}

/// Parses OpenQASM text into a [`Circuit`].
pub fn parse(text: &str) -> Result<Circuit, QasmError> {
    let toks = lex(text)?;
    Parser {
        toks,
        pos: 0,
        qreg: None,
        cregs: Vec::new(),
        circuit: None,
    }
    .program()
}

/// Like [`parse`], for raw bytes that may not be valid UTF-8.
pub fn parse_bytes(bytes: &[u8]) -> Result<Circuit, QasmError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).unwrap_or_default();
            let line = valid.matches('\n').count() + 1;
            let column = valid.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            Err(syntax(SourceSpan { line, column }, "invalid UTF-8"))
        }
    }
}

/// Writes `c` in the accepted subset. Angles carry 17 significant digits, so
/// `parse(&serialize(c)) == c`.
pub fn serialize(c: &Circuit) -> String {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{}];", c.num_qubits());
    if c.has_measure() {
        let _ = writeln!(out, "creg c[{}];", c.num_qubits());
    }
    for instr in c.instructions() {
        let q = &instr.qubits;
        let _ = match instr.kind {
            GateKind::RZ(theta) => writeln!(out, "rz({theta:.16e}) q[{}];", q[0]),
            GateKind::Delay(n) => writeln!(out, "delay[{n}] q[{}];", q[0]),
            GateKind::CX => writeln!(out, "cx q[{}],q[{}];", q[0], q[1]),
            GateKind::Measure => writeln!(out, "measure q[{0}] -> c[{0}];", q[0]),
            GateKind::Barrier => {
                let args: Vec<String> = q.iter().map(|q| format!("q[{q}]")).collect();
                writeln!(out, "barrier {};", args.join(","))
            }
            k => writeln!(out, "{} q[{}];", k.name(), q[0]),
        };
    }
    out
}
