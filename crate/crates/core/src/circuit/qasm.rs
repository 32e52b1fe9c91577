//! OpenQASM 2.0 subset: one quantum register, at most one classical register,
//! qelib1 gate names only, no user-defined gates, no `if`/`reset`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use super::{Circuit, CircuitError, Gate, GateKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QasmError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{line}:{col}: unsupported gate `{name}`")]
    UnsupportedGate {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}:{col}: unsupported statement `{keyword}`")]
    UnsupportedStatement {
        line: usize,
        col: usize,
        keyword: String,
    },
    #[error("{line}:{col}: index {index} out of range for register `{reg}` of size {size}")]
    IndexOutOfRange {
        line: usize,
        col: usize,
        reg: String,
        index: usize,
        size: usize,
    },
    #[error("{line}:{col}: multiple quantum registers are not supported")]
    MultipleQuantumRegisters { line: usize, col: usize },
    #[error("{line}:{col}: unknown register `{name}`")]
    UnknownRegister {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("missing quantum register declaration")]
    NoQuantumRegister,
    #[error("{line}:{col}: {source}")]
    Circuit {
        line: usize,
        col: usize,
        source: CircuitError,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Real(f64),
    Int(usize),
    Str(String),
    Sym(char),
    Arrow,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, QasmError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let syntax = |line, col, msg: &str| QasmError::Syntax {
        line,
        col,
        msg: msg.to_string(),
    };
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
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            i += 2;
            col += 2;
            loop {
                match chars.get(i) {
                    None => return Err(syntax(tl, tc, "unterminated block comment")),
                    Some('*') if chars.get(i + 1) == Some(&'/') => {
                        i += 2;
                        col += 2;
                        break;
                    }
                    Some('\n') => {
                        line += 1;
                        col = 1;
                        i += 1;
                    }
                    Some(_) => {
                        i += 1;
                        col += 1;
                    }
                }
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(s),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            let mut real = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                real = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    real = true;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if real {
                Tok::Real(s.parse().map_err(|_| syntax(tl, tc, "malformed number"))?)
            } else {
                Tok::Int(s.parse().map_err(|_| syntax(tl, tc, "integer too large"))?)
            };
            out.push(Token {
                tok,
                line: tl,
                col: tc,
            });
            continue;
        }
        if c == '"' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                i += 1;
            }
            if chars.get(i) != Some(&'"') {
                return Err(syntax(tl, tc, "unterminated string"));
            }
            let s: String = chars[start..i].iter().collect();
            i += 1;
            col += s.chars().count() + 2;
            out.push(Token {
                tok: Tok::Str(s),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            i += 2;
            col += 2;
            out.push(Token {
                tok: Tok::Arrow,
                line: tl,
                col: tc,
            });
            continue;
        }
        if "[](){};,+-*/^".contains(c) {
            i += 1;
            col += 1;
            out.push(Token {
                tok: Tok::Sym(c),
                line: tl,
                col: tc,
            });
            continue;
        }
        return Err(syntax(tl, tc, &format!("unexpected character `{c}`")));
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

enum Operand {
    Whole,
    Index(usize),
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    qreg: Option<Register>,
    creg: Option<Register>,
    circuit: Option<Circuit>,
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

    fn err_at(&self, t: &Token, msg: &str) -> QasmError {
        QasmError::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.to_string(),
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), QasmError> {
        let t = self.next();
        if t.tok == Tok::Sym(c) {
            Ok(())
        } else {
            Err(self.err_at(&t, &format!("expected `{c}`")))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Token), QasmError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t)),
            _ => Err(self.err_at(&t, "expected identifier")),
        }
    }

    fn expect_int(&mut self) -> Result<usize, QasmError> {
        let t = self.next();
        match t.tok {
            Tok::Int(n) => Ok(n),
            _ => Err(self.err_at(&t, "expected integer")),
        }
    }

    fn header(&mut self) -> Result<(), QasmError> {
        let (kw, t) = self.expect_ident()?;
        if kw != "OPENQASM" {
            return Err(self.err_at(&t, "expected `OPENQASM 2.0;` header"));
        }
        let v = self.next();
        match v.tok {
            Tok::Real(2.0) | Tok::Int(2) => {}
            _ => return Err(self.err_at(&v, "only OPENQASM 2.0 is supported")),
        }
        self.expect_sym(';')
    }

    fn program(&mut self) -> Result<Circuit, QasmError> {
        self.header()?;
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Eof => break,
                Tok::Ident(kw) => {
                    let kw = kw.clone();
                    self.statement(&kw, &t)?;
                }
                _ => return Err(self.err_at(&t, "expected statement")),
            }
        }
        self.circuit.take().ok_or(QasmError::NoQuantumRegister)
    }

    fn statement(&mut self, kw: &str, t: &Token) -> Result<(), QasmError> {
        match kw {
            "include" => {
                self.next();
                let s = self.next();
                if !matches!(s.tok, Tok::Str(_)) {
                    return Err(self.err_at(&s, "expected file name string"));
                }
                self.expect_sym(';')
            }
            "qreg" | "creg" => {
                self.next();
                let (name, _) = self.expect_ident()?;
                self.expect_sym('[')?;
                let size = self.expect_int()?;
                self.expect_sym(']')?;
                self.expect_sym(';')?;
                let reg = Register { name, size };
                if kw == "qreg" {
                    if self.qreg.is_some() {
                        return Err(QasmError::MultipleQuantumRegisters {
                            line: t.line,
                            col: t.col,
                        });
                    }
                    self.circuit = Some(Circuit::new(reg.name.clone(), size));
                    self.qreg = Some(reg);
                } else {
                    if self.creg.is_some() {
                        return Err(QasmError::UnsupportedStatement {
                            line: t.line,
                            col: t.col,
                            keyword: "second creg".to_string(),
                        });
                    }
                    self.creg = Some(reg);
                }
                Ok(())
            }
            "gate" | "opaque" | "if" | "reset" => Err(QasmError::UnsupportedStatement {
                line: t.line,
                col: t.col,
                keyword: kw.to_string(),
            }),
            _ => self.gate_statement(),
        }
    }

    fn gate_statement(&mut self) -> Result<(), QasmError> {
        let (name, nt) = self.expect_ident()?;
        let kind = GateKind::from_qasm_name(&name).ok_or(QasmError::UnsupportedGate {
            line: nt.line,
            col: nt.col,
            name: name.clone(),
        })?;
        let mut params = Vec::new();
        if self.peek().tok == Tok::Sym('(') {
            self.next();
            if self.peek().tok != Tok::Sym(')') {
                loop {
                    params.push(self.expr()?);
                    if self.peek().tok == Tok::Sym(',') {
                        self.next();
                    } else {
                        break;
                    }
                }
            }
            self.expect_sym(')')?;
        }
        let mut operands = Vec::new();
        loop {
            operands.push(self.qubit_operand()?);
            if self.peek().tok == Tok::Sym(',') {
                self.next();
            } else {
                break;
            }
        }
        if kind == GateKind::Measure {
            let a = self.next();
            if a.tok != Tok::Arrow {
                return Err(self.err_at(&a, "expected `->` in measure"));
            }
            self.classical_operand()?;
        }
        self.expect_sym(';')?;
        self.apply(kind, &params, &operands, &nt)
    }

    fn apply(
        &mut self,
        kind: GateKind,
        params: &[f64],
        operands: &[Operand],
        at: &Token,
    ) -> Result<(), QasmError> {
        let n = self.qreg.as_ref().ok_or(QasmError::NoQuantumRegister)?.size;
        let circuit = self.circuit.as_mut().ok_or(QasmError::NoQuantumRegister)?;
        let wrap = |source| QasmError::Circuit {
            line: at.line,
            col: at.col,
            source,
        };
        if kind == GateKind::Barrier {
            let mut qs = Vec::new();
            for op in operands {
                match op {
                    Operand::Whole => qs.extend(0..n),
                    Operand::Index(i) => qs.push(*i),
                }
            }
            let mut seen = alloc::vec![false; n];
            qs.retain(|&q| !core::mem::replace(&mut seen[q], true));
            return circuit.push(Gate::new(kind, &qs, params)).map_err(wrap);
        }
        let whole = operands.iter().any(|o| matches!(o, Operand::Whole));
        if whole {
            // Register broadcast only makes sense for single-operand gates here.
            if operands.len() != 1 {
                return Err(QasmError::Syntax {
                    line: at.line,
                    col: at.col,
                    msg: "register broadcast is only supported for single-qubit gates".to_string(),
                });
            }
            for q in 0..n {
                circuit.push(Gate::new(kind, &[q], params)).map_err(wrap)?;
            }
            return Ok(());
        }
        let qs: Vec<usize> = operands
            .iter()
            .map(|o| match o {
                Operand::Index(i) => *i,
                Operand::Whole => unreachable!(),
            })
            .collect();
        circuit.push(Gate::new(kind, &qs, params)).map_err(wrap)
    }

    fn qubit_operand(&mut self) -> Result<Operand, QasmError> {
        let (name, t) = self.expect_ident()?;
        let reg = match &self.qreg {
            Some(r) if r.name == name => r,
            _ => {
                return Err(QasmError::UnknownRegister {
                    line: t.line,
                    col: t.col,
                    name,
                })
            }
        };
        let size = reg.size;
        if self.peek().tok != Tok::Sym('[') {
            return Ok(Operand::Whole);
        }
        self.next();
        let it = self.peek().clone();
        let index = self.expect_int()?;
        self.expect_sym(']')?;
        if index >= size {
            return Err(QasmError::IndexOutOfRange {
                line: it.line,
                col: it.col,
                reg: name,
                index,
                size,
            });
        }
        Ok(Operand::Index(index))
    }

    fn classical_operand(&mut self) -> Result<(), QasmError> {
        let (name, t) = self.expect_ident()?;
        let size = match &self.creg {
            Some(r) if r.name == name => r.size,
            _ => {
                return Err(QasmError::UnknownRegister {
                    line: t.line,
                    col: t.col,
                    name,
                })
            }
        };
        if self.peek().tok == Tok::Sym('[') {
            self.next();
            let it = self.peek().clone();
            let index = self.expect_int()?;
            self.expect_sym(']')?;
            if index >= size {
                return Err(QasmError::IndexOutOfRange {
                    line: it.line,
                    col: it.col,
                    reg: name,
                    index,
                    size,
                });
            }
        }
        Ok(())
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<f64, QasmError> {
        let mut v = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Sym('+') => {
                    self.next();
                    v += self.term()?;
                }
                Tok::Sym('-') => {
                    self.next();
                    v -= self.term()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn term(&mut self) -> Result<f64, QasmError> {
        let mut v = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Sym('*') => {
                    self.next();
                    v *= self.unary()?;
                }
                Tok::Sym('/') => {
                    self.next();
                    v /= self.unary()?;
                }
                _ => return Ok(v),
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
        let base = self.atom()?;
        if self.peek().tok == Tok::Sym('^') {
            self.next();
            let e = self.unary()?;
            return Ok(libm::pow(base, e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<f64, QasmError> {
        let t = self.next();
        match &t.tok {
            Tok::Real(x) => Ok(*x),
            Tok::Int(n) => Ok(*n as f64),
            Tok::Ident(s) if s == "pi" => Ok(core::f64::consts::PI),
            Tok::Ident(f) => {
                let f = f.clone();
                self.expect_sym('(')?;
                let x = self.expr()?;
                self.expect_sym(')')?;
                match f.as_str() {
                    "sin" => Ok(libm::sin(x)),
                    "cos" => Ok(libm::cos(x)),
                    "tan" => Ok(libm::tan(x)),
                    "exp" => Ok(libm::exp(x)),
                    "ln" => Ok(libm::log(x)),
                    "sqrt" => Ok(libm::sqrt(x)),
                    _ => Err(self.err_at(&t, "unknown function in expression")),
                }
            }
            Tok::Sym('(') => {
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            _ => Err(self.err_at(&t, "expected expression")),
        }
    }
}

/// Parse OpenQASM 2.0 text into a [`Circuit`] named after its quantum register.
pub fn parse_qasm(text: &str) -> Result<Circuit, QasmError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        qreg: None,
        creg: None,
        circuit: None,
    };
    p.program()
}

/// Render a circuit as OpenQASM 2.0. `parse_qasm` of the output reproduces
/// the gate list exactly (angles use shortest round-trip formatting).
pub fn emit_qasm(circuit: &Circuit) -> String {
    let name = circuit.name();
    let valid = name.chars().next().is_some_and(|c| c.is_ascii_lowercase())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_reserved(name);
    let qreg = if valid { name } else { "q" };
    let creg = if qreg == "c" { "m" } else { "c" };
    emit_with_registers(circuit, qreg, creg)
}

fn is_reserved(name: &str) -> bool {
    matches!(
        name,
        "pi" | "include"
            | "qreg"
            | "creg"
            | "gate"
            | "opaque"
            | "if"
            | "reset"
            | "measure"
            | "barrier"
    ) || GateKind::from_qasm_name(name).is_some()
}

pub(crate) fn emit_with_registers(circuit: &Circuit, qreg: &str, creg: &str) -> String {
    let mut s = String::new();
    s.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(s, "qreg {qreg}[{}];", circuit.n_qubits());
    let has_measure = circuit.gates().iter().any(|g| g.kind == GateKind::Measure);
    if has_measure {
        let _ = writeln!(s, "creg {creg}[{}];", circuit.n_qubits());
    }
    for g in circuit.gates() {
        write_gate(&mut s, g, qreg, creg);
    }
    s
}

pub(crate) fn write_gate(s: &mut String, g: &Gate, qreg: &str, creg: &str) {
    if g.kind == GateKind::Measure {
        let q = g.qubits[0];
        let _ = writeln!(s, "measure {qreg}[{q}] -> {creg}[{q}];");
        return;
    }
    s.push_str(g.kind.qasm_name());
    if !g.params.is_empty() {
        s.push('(');
        for (i, p) in g.params.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{p:?}");
        }
        s.push(')');
    }
    for (i, q) in g.qubits.iter().enumerate() {
        s.push_str(if i == 0 { " " } else { "," });
        let _ = write!(s, "{qreg}[{q}]");
    }
    s.push_str(";\n");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_cx() {
        let c = parse_qasm("OPENQASM 2.0; qreg q[2]; cx q[0],q[1];").unwrap();
        assert_eq!(c.n_qubits(), 2);
        assert_eq!(c.gates(), &[Gate::cx(0, 1)]);
    }

    #[test]
    fn parses_rotation() {
        let c = parse_qasm("OPENQASM 2.0; qreg q[1]; rz(0.5) q[0];").unwrap();
        assert_eq!(c.n_qubits(), 1);
        assert_eq!(c.gates(), &[Gate::rotation(GateKind::Rz, 0.5, 0)]);
    }

    #[test]
    fn index_out_of_range() {
        let e = parse_qasm("OPENQASM 2.0; qreg q[2]; cx q[0],q[5];").unwrap_err();
        assert!(
            matches!(
                e,
                QasmError::IndexOutOfRange {
                    index: 5,
                    size: 2,
                    line: 1,
                    ..
                }
            ),
            "{e:?}"
        );
    }

    #[test]
    fn include_and_expressions() {
        let src = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\ncreg c[3];\n\
                   rx(-pi/2) q[1];\nrzz(2*0.25+1) q[0],q[2];\nh q;\nbarrier q;\nmeasure q[0] -> c[0];\n";
        let c = parse_qasm(src).unwrap();
        assert_eq!(c.len(), 1 + 1 + 3 + 1 + 1);
        assert!((c.gates()[0].params[0] + core::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(c.gates()[1].params[0], 1.5);
        assert_eq!(c.gates()[5].qubits, [0, 1, 2]);
    }

    #[test]
    fn error_positions() {
        let e = parse_qasm("OPENQASM 2.0;\nqreg q[2];\n  u3(0,0,0) q[0];").unwrap_err();
        assert_eq!(
            e,
            QasmError::UnsupportedGate {
                line: 3,
                col: 3,
                name: "u3".into()
            }
        );
        let e = parse_qasm("OPENQASM 2.0;\nqreg q[2];\ncx q[0] q[1];").unwrap_err();
        assert!(
            matches!(
                e,
                QasmError::Syntax {
                    line: 3,
                    col: 9,
                    ..
                }
            ),
            "{e:?}"
        );
        let e = parse_qasm("OPENQASM 2.0;\nqreg q[2];\nqreg r[2];").unwrap_err();
        assert!(matches!(
            e,
            QasmError::MultipleQuantumRegisters { line: 3, col: 1 }
        ));
        let e = parse_qasm("OPENQASM 2.0; qreg q[1]; reset q[0];").unwrap_err();
        assert!(matches!(e, QasmError::UnsupportedStatement { .. }));
        let e = parse_qasm("OPENQASM 3.0; qreg q[1];").unwrap_err();
        assert!(matches!(e, QasmError::Syntax { .. }));
    }

    #[test]
    fn emit_round_trip() {
        let src = "OPENQASM 2.0; qreg q[3]; creg c[3]; h q[0]; rz(0.1) q[1]; \
                   rzz(-3.3e-7) q[2],q[0]; ccx q[0],q[1],q[2]; measure q[2] -> c[2];";
        let c = parse_qasm(src).unwrap();
        let again = parse_qasm(&emit_qasm(&c)).unwrap();
        assert_eq!(c, again);
    }
}
