//! OpenQASM 2.0 frontend for the 1Q + CZ gate set.
//!
//! The parser accepts the subset of OpenQASM 2.0 that the rest of the
//! compiler consumes: one or more `qreg` declarations, a whitelist of
//! single-qubit gates, and `cz`. `barrier`, `measure`, `creg` and the
//! `include` line are accepted and ignored; any other two-qubit gate (e.g.
//! `cx`) is rejected with [`CompileError::UnsupportedGate`], signalling
//! that the input needs pre-transpilation outside this tool.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{CompileError, Result};

/// Single-qubit gate names accepted by the parser. Gate matrices are never
/// needed: every whitelisted gate is an opaque operation with the same
/// duration and fidelity.
pub const ONE_Q_GATES: &[&str] = &[
    "u1", "u2", "u3", "u", "rz", "rx", "ry", "h", "x", "y", "z", "s", "sdg", "t", "tdg", "id",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateKind {
    /// Opaque single-qubit gate, identified by its QASM name.
    OneQ(String),
    Cz,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    /// Logical qubit indices; length 1 for OneQ, 2 (distinct) for CZ.
    pub qubits: Vec<usize>,
    /// Raw parameter expressions as written in the source, kept only so a
    /// circuit can be re-serialized losslessly.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<String>,
    /// 1-based line in the source text.
    pub source_line: usize,
}

impl Gate {
    pub fn is_cz(&self) -> bool {
        self.kind == GateKind::Cz
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    pub name: String,
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn cz_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_cz()).count()
    }
}

/// Weighted CZ interaction graph: `w_ij` counts the CZ gates on the
/// unordered pair `{i, j}`. Pairs with zero count are absent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionGraph {
    pub num_qubits: usize,
    weights: BTreeMap<(usize, usize), u32>,
}

impl InteractionGraph {
    pub fn weight(&self, i: usize, j: usize) -> u32 {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.weights.get(&key).copied().unwrap_or(0)
    }

    /// Interacting pairs in ascending lexicographic order with their counts.
    pub fn pairs(&self) -> impl Iterator<Item = ((usize, usize), u32)> + '_ {
        self.weights.iter().map(|(&p, &w)| (p, w))
    }

    pub fn num_pairs(&self) -> usize {
        self.weights.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.values().map(|&w| w as u64).sum()
    }
}

/// Per-gate predecessor sets: the most recent prior gate on each of the
/// gate's qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyDag {
    preds: Vec<Vec<usize>>,
}

impl DependencyDag {
    pub fn preds(&self, gate: usize) -> &[usize] {
        &self.preds[gate]
    }

    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }
}

struct RegDef {
    name: String,
    offset: usize,
    size: usize,
}

/// Parse OpenQASM 2.0 text into a [`Circuit`]. Qubit indices are flattened
/// across `qreg` declarations in declaration order.
pub fn parse_qasm(text: &str) -> Result<Circuit> {
    let statements = split_statements(text)?;
    let mut regs: Vec<RegDef> = Vec::new();
    let mut num_qubits = 0usize;
    let mut gates: Vec<Gate> = Vec::new();
    let mut seen_version = false;

    for (line, stmt) in &statements {
        let line = *line;
        let stmt = stmt.trim();
        if stmt.is_empty() {
            continue;
        }
        let head = first_token(stmt);
        match head {
            "OPENQASM" => {
                let rest = stmt["OPENQASM".len()..].trim();
                if rest != "2.0" {
                    return Err(CompileError::Parse {
                        line,
                        msg: format!("unsupported OPENQASM version `{rest}`"),
                    });
                }
                seen_version = true;
            }
            "include" => {} // qelib1.inc (or anything else) is not resolved
            "qreg" => {
                let (name, size) = parse_reg_decl(stmt, line)?;
                if regs.iter().any(|r| r.name == name) {
                    return Err(CompileError::Parse {
                        line,
                        msg: format!("duplicate qreg `{name}`"),
                    });
                }
                regs.push(RegDef {
                    name,
                    offset: num_qubits,
                    size,
                });
                num_qubits += size;
            }
            "creg" | "barrier" | "measure" => {} // irrelevant to scheduling
            "gate" | "opaque" | "if" => {
                return Err(CompileError::Parse {
                    line,
                    msg: format!("unsupported statement `{head}`"),
                });
            }
            "reset" => {
                return Err(CompileError::UnsupportedGate {
                    name: "reset".into(),
                    line,
                });
            }
            _ => parse_gate_stmt(stmt, line, &regs, &mut gates)?,
        }
    }

    let _ = seen_version; // header optional: pre-transpiled files always carry it
    Ok(Circuit {
        name: String::new(),
        num_qubits,
        gates,
    })
}

/// Serialize a circuit back to OpenQASM 2.0 (the supported subset).
pub fn to_qasm(c: &Circuit) -> String {
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    out.push_str(&format!("qreg q[{}];\n", c.num_qubits));
    for g in &c.gates {
        match &g.kind {
            GateKind::OneQ(name) => {
                if g.params.is_empty() {
                    out.push_str(&format!("{} q[{}];\n", name, g.qubits[0]));
                } else {
                    out.push_str(&format!(
                        "{}({}) q[{}];\n",
                        name,
                        g.params.join(","),
                        g.qubits[0]
                    ));
                }
            }
            GateKind::Cz => {
                out.push_str(&format!("cz q[{}],q[{}];\n", g.qubits[0], g.qubits[1]));
            }
        }
    }
    out
}

/// Count CZ occurrences per unordered qubit pair.
pub fn interaction_graph(c: &Circuit) -> InteractionGraph {
    let mut weights = BTreeMap::new();
    for g in &c.gates {
        if g.is_cz() {
            let (a, b) = (g.qubits[0], g.qubits[1]);
            let key = if a <= b { (a, b) } else { (b, a) };
            *weights.entry(key).or_insert(0u32) += 1;
        }
    }
    InteractionGraph {
        num_qubits: c.num_qubits,
        weights,
    }
}

/// Build the gate dependency DAG: each gate depends on the most recent
/// prior gate touching each of its qubits.
pub fn dependency_dag(c: &Circuit) -> DependencyDag {
    let mut last_on_qubit: Vec<Option<usize>> = vec![None; c.num_qubits];
    let mut preds = Vec::with_capacity(c.gates.len());
    for (i, g) in c.gates.iter().enumerate() {
        let mut p: Vec<usize> = g.qubits.iter().filter_map(|&q| last_on_qubit[q]).collect();
        p.sort_unstable();
        p.dedup();
        preds.push(p);
        for &q in &g.qubits {
            last_on_qubit[q] = Some(i);
        }
    }
    DependencyDag { preds }
}

fn first_token(stmt: &str) -> &str {
    let end = stmt
        .find(|c: char| !(c.is_alphanumeric() || c == '_'))
        .unwrap_or(stmt.len());
    &stmt[..end]
}

/// Split source text into `;`-terminated statements with 1-based start lines.
fn split_statements(text: &str) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    let mut buf = String::new();
    let mut start_line = 1usize;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = match raw.find("//") {
            Some(p) => &raw[..p],
            None => raw,
        };
        for ch in content.chars() {
            if ch == ';' {
                let stmt = buf.trim().to_string();
                if !stmt.is_empty() {
                    out.push((start_line, stmt));
                }
                buf.clear();
            } else {
                if buf.trim().is_empty() && !ch.is_whitespace() {
                    start_line = line_no;
                }
                buf.push(ch);
            }
        }
        buf.push(' ');
    }
    if !buf.trim().is_empty() {
        return Err(CompileError::Parse {
            line: start_line,
            msg: "unterminated statement (missing `;`)".into(),
        });
    }
    Ok(out)
}

fn parse_reg_decl(stmt: &str, line: usize) -> Result<(String, usize)> {
    // form: qreg name[n]  (or creg)
    let body = stmt.split_whitespace().skip(1).collect::<Vec<_>>().join("");
    let open = body.find('[').ok_or_else(|| CompileError::Parse {
        line,
        msg: "register declaration missing `[size]`".into(),
    })?;
    let close = body.find(']').ok_or_else(|| CompileError::Parse {
        line,
        msg: "register declaration missing `]`".into(),
    })?;
    let name = body[..open].trim().to_string();
    if name.is_empty() {
        return Err(CompileError::Parse {
            line,
            msg: "register declaration missing name".into(),
        });
    }
    let size: usize = body[open + 1..close]
        .trim()
        .parse()
        .map_err(|_| CompileError::Parse {
            line,
            msg: "invalid register size".into(),
        })?;
    Ok((name, size))
}

#[derive(Debug)]
enum Operand {
    Indexed(String, usize),
    Whole(String),
}

fn parse_operand(tok: &str, line: usize) -> Result<Operand> {
    let tok = tok.trim();
    if tok.is_empty() {
        return Err(CompileError::Parse {
            line,
            msg: "empty operand".into(),
        });
    }
    if let Some(open) = tok.find('[') {
        let close = tok.rfind(']').ok_or_else(|| CompileError::Parse {
            line,
            msg: format!("malformed operand `{tok}`"),
        })?;
        let name = tok[..open].trim().to_string();
        let idx: usize = tok[open + 1..close]
            .trim()
            .parse()
            .map_err(|_| CompileError::Parse {
                line,
                msg: format!("invalid qubit index in `{tok}`"),
            })?;
        Ok(Operand::Indexed(name, idx))
    } else {
        Ok(Operand::Whole(tok.to_string()))
    }
}

fn resolve(op: &Operand, regs: &[RegDef], line: usize) -> Result<Vec<usize>> {
    let (name, idx) = match op {
        Operand::Indexed(n, i) => (n, Some(*i)),
        Operand::Whole(n) => (n, None),
    };
    let reg = regs
        .iter()
        .find(|r| &r.name == name)
        .ok_or_else(|| CompileError::Parse {
            line,
            msg: format!("undeclared register `{name}`"),
        })?;
    match idx {
        Some(i) => {
            if i >= reg.size {
                return Err(CompileError::Parse {
                    line,
                    msg: format!("qubit index {i} out of bounds for `{name}[{}]`", reg.size),
                });
            }
            Ok(vec![reg.offset + i])
        }
        None => Ok((reg.offset..reg.offset + reg.size).collect()),
    }
}

fn parse_gate_stmt(stmt: &str, line: usize, regs: &[RegDef], gates: &mut Vec<Gate>) -> Result<()> {
    let name = first_token(stmt);
    if name.is_empty() {
        return Err(CompileError::Parse {
            line,
            msg: format!("malformed statement `{stmt}`"),
        });
    }
    let mut rest = stmt[name.len()..].trim_start();

    // optional parameter list
    let mut params: Vec<String> = Vec::new();
    if rest.starts_with('(') {
        let mut depth = 0usize;
        let mut end = None;
        for (i, ch) in rest.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        end = Some(i);
                        break;
                    }
                }
                _ => {}
            }
        }
        let end = end.ok_or_else(|| CompileError::Parse {
            line,
            msg: "unbalanced parentheses in parameter list".into(),
        })?;
        let inner = &rest[1..end];
        if !inner.trim().is_empty() {
            params = split_top_level(inner)
                .into_iter()
                .map(|s| s.trim().to_string())
                .collect();
        }
        rest = rest[end + 1..].trim_start();
    }

    let operands: Vec<Operand> = split_top_level(rest)
        .into_iter()
        .map(|s| parse_operand(&s, line))
        .collect::<Result<_>>()?;
    if operands.is_empty() {
        return Err(CompileError::Parse {
            line,
            msg: format!("gate `{name}` has no operands"),
        });
    }

    if name == "cz" {
        if operands.len() != 2 {
            return Err(CompileError::Parse {
                line,
                msg: "cz takes exactly two qubit operands".into(),
            });
        }
        let a = single_qubit(&operands[0], regs, line)?;
        let b = single_qubit(&operands[1], regs, line)?;
        if a == b {
            return Err(CompileError::Parse {
                line,
                msg: "cz operands must be distinct qubits".into(),
            });
        }
        gates.push(Gate {
            kind: GateKind::Cz,
            qubits: vec![a, b],
            params: Vec::new(),
            source_line: line,
        });
        return Ok(());
    }

    if ONE_Q_GATES.contains(&name) {
        if operands.len() != 1 {
            return Err(CompileError::Parse {
                line,
                msg: format!("gate `{name}` takes exactly one operand"),
            });
        }
        // whole-register operand broadcasts in ascending index order
        for q in resolve(&operands[0], regs, line)? {
            gates.push(Gate {
                kind: GateKind::OneQ(name.to_string()),
                qubits: vec![q],
                params: params.clone(),
                source_line: line,
            });
        }
        return Ok(());
    }

    Err(CompileError::UnsupportedGate {
        name: name.to_string(),
        line,
    })
}

fn single_qubit(op: &Operand, regs: &[RegDef], line: usize) -> Result<usize> {
    match op {
        Operand::Indexed(..) => Ok(resolve(op, regs, line)?[0]),
        Operand::Whole(name) => Err(CompileError::Parse {
            line,
            msg: format!("cz requires indexed qubit operands, got whole register `{name}`"),
        }),
    }
}

/// Split on commas that are not nested inside parentheses or brackets.
fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' | '[' => {
                depth += 1;
                cur.push(ch);
            }
            ')' | ']' => {
                depth -= 1;
                cur.push(ch);
            }
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
            }
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}
