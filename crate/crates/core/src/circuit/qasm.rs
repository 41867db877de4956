//! OpenQASM 2.0 subset: one quantum register, at most one classical register,
//! and the gate kinds of [`GateKind`].

use std::f64::consts::PI;
use std::fmt::Write as _;

use thiserror::Error;

use super::{Circuit, CircuitError, Gate, GateKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QasmError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },

    #[error("unsupported gate `{name}` at {line}:{col}")]
    UnsupportedGate { name: String, line: usize, col: usize },

    #[error("register `{name}` redeclared at {line}:{col}; only one quantum and one classical register are supported")]
    Redeclaration { name: String, line: usize, col: usize },

    #[error("`{name}` at {line}:{col} takes {expected} qubit argument(s), got {found}")]
    Arity {
        name: String,
        line: usize,
        col: usize,
        expected: usize,
        found: usize,
    },

    #[error("invalid operation at {line}:{col}: {source}")]
    Operation {
        line: usize,
        col: usize,
        #[source]
        source: CircuitError,
    },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Str(String),
    Arrow,
    Sym(char),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, QasmError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, message: String| QasmError::Syntax { line, col, message };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
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
            let lexeme: String = chars[start..i].iter().collect();
            let value = lexeme
                .parse::<f64>()
                .map_err(|_| err(tl, tc, format!("malformed number `{lexeme}`")))?;
            col += i - start;
            out.push(Token {
                tok: Tok::Number(value),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c == '"' {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && chars[j] != '"' && chars[j] != '\n' {
                j += 1;
            }
            if j >= chars.len() || chars[j] != '"' {
                return Err(err(tl, tc, "unterminated string".into()));
            }
            out.push(Token {
                tok: Tok::Str(chars[start..j].iter().collect()),
                line: tl,
                col: tc,
            });
            col += j + 1 - i;
            i = j + 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(Token {
                tok: Tok::Arrow,
                line: tl,
                col: tc,
            });
            i += 2;
            col += 2;
            continue;
        }
        if ";,[]()+-*/^".contains(c) {
            out.push(Token {
                tok: Tok::Sym(c),
                line: tl,
                col: tc,
            });
            i += 1;
            col += 1;
            continue;
        }
        return Err(err(tl, tc, format!("unexpected character `{c}`")));
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Register {
    name: String,
    size: usize,
}

/// A register reference: `q[3]` or bare `q` (broadcast).
struct Arg {
    index: Option<usize>,
    line: usize,
    col: usize,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    qreg: Option<Register>,
    creg: Option<Register>,
    ops: Vec<(Gate, usize, usize)>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, tok: &Token, message: impl Into<String>) -> Result<T, QasmError> {
        Err(QasmError::Syntax {
            line: tok.line,
            col: tok.col,
            message: message.into(),
        })
    }

    fn expect_sym(&mut self, c: char) -> Result<(), QasmError> {
        let t = self.next();
        if t.tok == Tok::Sym(c) {
            Ok(())
        } else {
            self.syntax(&t, format!("expected `{c}`, found {}", describe(&t.tok)))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Token), QasmError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t.clone())),
            other => self.syntax(&t, format!("expected identifier, found {}", describe(other))),
        }
    }

    fn expect_size(&mut self) -> Result<usize, QasmError> {
        let t = self.next();
        match t.tok {
            Tok::Number(v) if v >= 0.0 && v.fract() == 0.0 => Ok(v as usize),
            ref other => self.syntax(&t, format!("expected non-negative integer, found {}", describe(other))),
        }
    }

    fn header(&mut self) -> Result<(), QasmError> {
        let t = self.next();
        if t.tok != Tok::Ident("OPENQASM".into()) {
            return self.syntax(&t, "program must start with `OPENQASM 2.0;`");
        }
        let v = self.next();
        match v.tok {
            Tok::Number(x) if (x - 2.0).abs() < 1e-12 => {}
            _ => return self.syntax(&v, "only OpenQASM version 2.0 is supported"),
        }
        self.expect_sym(';')
    }

    fn program(&mut self) -> Result<(), QasmError> {
        self.header()?;
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Eof => return Ok(()),
                Tok::Ident(word) => {
                    let word = word.clone();
                    self.next();
                    self.statement(&word, &t)?;
                }
                other => return self.syntax(&t, format!("expected statement, found {}", describe(other))),
            }
        }
    }

    fn statement(&mut self, word: &str, at: &Token) -> Result<(), QasmError> {
        match word {
            "include" => {
                let t = self.next();
                if !matches!(t.tok, Tok::Str(_)) {
                    return self.syntax(&t, "expected file name string after `include`");
                }
                self.expect_sym(';')
            }
            "qreg" | "creg" => self.register(word == "qreg"),
            "measure" => {
                let q = self.arg(true)?;
                let arrow = self.next();
                if arrow.tok != Tok::Arrow {
                    return self.syntax(&arrow, "expected `->` in measure");
                }
                let c = self.arg(false)?;
                self.expect_sym(';')?;
                self.measure(q, c)
            }
            "reset" => {
                let q = self.arg(true)?;
                self.expect_sym(';')?;
                for qubit in self.expand(&q)? {
                    self.ops.push((Gate::reset(qubit), at.line, at.col));
                }
                Ok(())
            }
            "barrier" => {
                let args = self.arg_list()?;
                self.expect_sym(';')?;
                let mut qubits = Vec::new();
                for a in &args {
                    for q in self.expand(a)? {
                        if !qubits.contains(&q) {
                            qubits.push(q);
                        }
                    }
                }
                self.ops.push((Gate::barrier(qubits), at.line, at.col));
                Ok(())
            }
            "gate" | "opaque" | "if" => self.syntax(at, format!("`{word}` statements are not supported")),
            name => self.gate(name, at),
        }
    }

    fn register(&mut self, quantum: bool) -> Result<(), QasmError> {
        let (name, t) = self.expect_ident()?;
        self.expect_sym('[')?;
        let size = self.expect_size()?;
        self.expect_sym(']')?;
        self.expect_sym(';')?;
        let slot = if quantum { &mut self.qreg } else { &mut self.creg };
        if slot.is_some() {
            return Err(QasmError::Redeclaration {
                name,
                line: t.line,
                col: t.col,
            });
        }
        *slot = Some(Register { name, size });
        Ok(())
    }

    fn arg(&mut self, quantum: bool) -> Result<Arg, QasmError> {
        let (name, t) = self.expect_ident()?;
        let reg = if quantum { &self.qreg } else { &self.creg };
        let size = match reg {
            Some(r) if r.name == name => r.size,
            _ => {
                let kind = if quantum { "quantum" } else { "classical" };
                return self.syntax(&t, format!("undeclared {kind} register `{name}`"));
            }
        };
        let mut index = None;
        if self.peek().tok == Tok::Sym('[') {
            self.next();
            let it = self.peek().clone();
            let i = self.expect_size()?;
            if i >= size {
                return self.syntax(&it, format!("index {i} out of range for register `{name}[{size}]`"));
            }
            self.expect_sym(']')?;
            index = Some(i);
        }
        Ok(Arg {
            index,
            line: t.line,
            col: t.col,
        })
    }

    fn arg_list(&mut self) -> Result<Vec<Arg>, QasmError> {
        let mut args = vec![self.arg(true)?];
        while self.peek().tok == Tok::Sym(',') {
            self.next();
            args.push(self.arg(true)?);
        }
        Ok(args)
    }

    fn expand(&self, arg: &Arg) -> Result<Vec<usize>, QasmError> {
        match arg.index {
            Some(i) => Ok(vec![i]),
            None => Ok((0..self.qreg.as_ref().map_or(0, |r| r.size)).collect()),
        }
    }

    fn measure(&mut self, q: Arg, c: Arg) -> Result<(), QasmError> {
        match (q.index, c.index) {
            (Some(qi), Some(ci)) => {
                self.ops.push((Gate::measure(qi, ci), q.line, q.col));
                Ok(())
            }
            (None, None) => {
                let qs = self.qreg.as_ref().map_or(0, |r| r.size);
                let cs = self.creg.as_ref().map_or(0, |r| r.size);
                if qs != cs {
                    return Err(QasmError::Syntax {
                        line: q.line,
                        col: q.col,
                        message: format!("register measure needs equal sizes, got {qs} and {cs}"),
                    });
                }
                for i in 0..qs {
                    self.ops.push((Gate::measure(i, i), q.line, q.col));
                }
                Ok(())
            }
            _ => Err(QasmError::Syntax {
                line: q.line,
                col: q.col,
                message: "cannot mix indexed and whole-register operands in measure".into(),
            }),
        }
    }

    fn gate(&mut self, name: &str, at: &Token) -> Result<(), QasmError> {
        let kind = GateKind::from_name(name)
            .filter(|k| k.is_unitary())
            .ok_or_else(|| QasmError::UnsupportedGate {
                name: name.to_string(),
                line: at.line,
                col: at.col,
            })?;
        let mut params = Vec::new();
        if self.peek().tok == Tok::Sym('(') {
            self.next();
            if self.peek().tok != Tok::Sym(')') {
                params.push(self.expr()?);
                while self.peek().tok == Tok::Sym(',') {
                    self.next();
                    params.push(self.expr()?);
                }
            }
            self.expect_sym(')')?;
        }
        let args = self.arg_list()?;
        self.expect_sym(';')?;
        let arity = kind.arity().unwrap_or(1);
        if args.len() != arity {
            return Err(QasmError::Arity {
                name: name.to_string(),
                line: at.line,
                col: at.col,
                expected: arity,
                found: args.len(),
            });
        }
        let op_err = |source| QasmError::Operation {
            line: at.line,
            col: at.col,
            source,
        };
        if arity == 1 {
            for q in self.expand(&args[0])? {
                let g = Gate::unitary(kind, params.clone(), vec![q]).map_err(op_err)?;
                self.ops.push((g, at.line, at.col));
            }
        } else {
            let mut qubits = Vec::with_capacity(2);
            for a in &args {
                match a.index {
                    Some(i) => qubits.push(i),
                    None => {
                        return Err(QasmError::Syntax {
                            line: a.line,
                            col: a.col,
                            message: format!("two-qubit gate `{name}` needs indexed operands"),
                        })
                    }
                }
            }
            let g = Gate::unitary(kind, params, qubits).map_err(op_err)?;
            self.ops.push((g, at.line, at.col));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<f64, QasmError> {
        let mut value = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Sym('+') => {
                    self.next();
                    value += self.term()?;
                }
                Tok::Sym('-') => {
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
            match self.peek().tok {
                Tok::Sym('*') => {
                    self.next();
                    value *= self.unary()?;
                }
                Tok::Sym('/') => {
                    self.next();
                    value /= self.unary()?;
                }
                _ => return Ok(value),
            }
        }
    }

    fn unary(&mut self) -> Result<f64, QasmError> {
        match self.peek().tok {
            Tok::Sym('-') => {
                self.next();
                Ok(-self.unary()?)
            }
            Tok::Sym('+') => {
                self.next();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<f64, QasmError> {
        let base = self.primary()?;
        if self.peek().tok == Tok::Sym('^') {
            self.next();
            let exp = self.unary()?;
            return Ok(base.powf(exp));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<f64, QasmError> {
        let t = self.next();
        match &t.tok {
            Tok::Number(v) => Ok(*v),
            Tok::Sym('(') => {
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            Tok::Ident(id) if id == "pi" => Ok(PI),
            Tok::Ident(id) => {
                let f: fn(f64) -> f64 = match id.as_str() {
                    "sin" => f64::sin,
                    "cos" => f64::cos,
                    "tan" => f64::tan,
                    "exp" => f64::exp,
                    "ln" => f64::ln,
                    "sqrt" => f64::sqrt,
                    _ => return self.syntax(&t, format!("unknown identifier `{id}` in expression")),
                };
                self.expect_sym('(')?;
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(f(v))
            }
            other => self.syntax(&t, format!("expected expression, found {}", describe(other))),
        }
    }

    fn finish(self) -> Result<Circuit, QasmError> {
        let nq = self.qreg.as_ref().map_or(0, |r| r.size);
        let nc = self.creg.as_ref().map_or(0, |r| r.size);
        let mut circuit = Circuit::new(nq, nc);
        for (gate, line, col) in self.ops {
            circuit
                .push(gate)
                .map_err(|source| QasmError::Operation { line, col, source })?;
        }
        Ok(circuit)
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Number(v) => format!("number {v}"),
        Tok::Str(s) => format!("string \"{s}\""),
        Tok::Arrow => "`->`".into(),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses an OpenQASM 2.0 program into a [`Circuit`]. Gates keep source order.
pub fn parse_qasm(text: &str) -> Result<Circuit, QasmError> {
    let toks = tokenize(text)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        qreg: None,
        creg: None,
        ops: Vec::new(),
    };
    parser.program()?;
    parser.finish()
}

/// Renders an angle, preferring a `k*pi/d` form when it is exact to rounding.
fn format_angle(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    for d in 1..=64i64 {
        let k = x * d as f64 / PI;
        let kr = k.round();
        if kr != 0.0 && (k - kr).abs() < 1e-12 && kr.abs() <= 1024.0 {
            let k = kr as i64;
            let num = match k {
                1 => "pi".to_string(),
                -1 => "-pi".to_string(),
                _ => format!("{k}*pi"),
            };
            return if d == 1 { num } else { format!("{num}/{d}") };
        }
    }
    format!("{x:?}")
}

/// Serializes a circuit as OpenQASM 2.0 with registers `q` and `c`.
pub fn emit_qasm(circuit: &Circuit) -> String {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    if circuit.num_qubits() > 0 {
        let _ = writeln!(out, "qreg q[{}];", circuit.num_qubits());
    }
    if circuit.num_clbits() > 0 {
        let _ = writeln!(out, "creg c[{}];", circuit.num_clbits());
    }
    for gate in circuit.gates() {
        let operands: Vec<String> = gate.qubits.iter().map(|q| format!("q[{q}]")).collect();
        match gate.kind {
            GateKind::Measure => {
                let c = gate.clbit.expect("measure carries a classical bit");
                let _ = writeln!(out, "measure {} -> c[{c}];", operands[0]);
            }
            _ => {
                out.push_str(gate.kind.name());
                if !gate.params.is_empty() {
                    let params: Vec<String> = gate.params.iter().map(|&p| format_angle(p)).collect();
                    let _ = write!(out, "({})", params.join(","));
                }
                let _ = writeln!(out, " {};", operands.join(","));
            }
        }
    }
    out
}
