//! OpenQASM 2.0 subset: one `qreg`, at most one `creg`, and the gates
//! `x`, `cx`, `ccx`, `measure`.

use std::fmt::Write;

use thiserror::Error;

use super::{Circuit, CircuitError, Gate};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QasmError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: CircuitError },
}

/// Serializes the circuit; output is a pure function of the gate list and
/// widths, with LF line endings.
pub fn export_qasm(circuit: &Circuit) -> String {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    if circuit.num_qubits() > 0 {
        writeln!(out, "qreg q[{}];", circuit.num_qubits()).unwrap();
    }
    if circuit.num_clbits() > 0 {
        writeln!(out, "creg c[{}];", circuit.num_clbits()).unwrap();
    }
    for gate in circuit.gates() {
        match *gate {
            Gate::X { target } => writeln!(out, "x q[{}];", target.0),
            Gate::Cnot { control, target } => writeln!(out, "cx q[{}],q[{}];", control.0, target.0),
            Gate::Ccnot { controls: [a, b], target } => writeln!(out, "ccx q[{}],q[{}],q[{}];", a.0, b.0, target.0),
            Gate::Measure { qubit, clbit } => writeln!(out, "measure q[{}] -> c[{}];", qubit.0, clbit.0),
        }
        .unwrap();
    }
    out
}

struct Registers {
    qreg: Option<(String, usize)>,
    creg: Option<(String, usize)>,
}

fn syntax(line: usize, message: impl Into<String>) -> QasmError {
    QasmError::Syntax { line, message: message.into() }
}

// `name[index]`
fn parse_ref(text: &str, line: usize) -> Result<(&str, usize), QasmError> {
    let text = text.trim();
    let open = text.find('[').ok_or_else(|| syntax(line, format!("expected `reg[index]`, found `{text}`")))?;
    if !text.ends_with(']') {
        return Err(syntax(line, format!("expected `reg[index]`, found `{text}`")));
    }
    let name = text[..open].trim();
    let index =
        text[open + 1..text.len() - 1].trim().parse().map_err(|_| syntax(line, format!("bad index in `{text}`")))?;
    Ok((name, index))
}

impl Registers {
    fn qubit(&self, text: &str, line: usize) -> Result<usize, QasmError> {
        let (name, index) = parse_ref(text, line)?;
        match &self.qreg {
            Some((q, _)) if q == name => Ok(index),
            _ => Err(syntax(line, format!("unknown quantum register `{name}`"))),
        }
    }

    fn clbit(&self, text: &str, line: usize) -> Result<usize, QasmError> {
        let (name, index) = parse_ref(text, line)?;
        match &self.creg {
            Some((c, _)) if c == name => Ok(index),
            _ => Err(syntax(line, format!("unknown classical register `{name}`"))),
        }
    }
}

/// Parses the subset written by [`export_qasm`].
pub fn import_qasm(text: &str) -> Result<Circuit, QasmError> {
    let mut regs = Registers { qreg: None, creg: None };
    let mut gates: Vec<(usize, Gate)> = Vec::new();
    let mut saw_header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let code = raw.split("//").next().unwrap_or("").trim();
        for stmt in code.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (head, rest) = stmt.split_once(char::is_whitespace).unwrap_or((stmt, ""));
            let rest = rest.trim();
            let operands = || rest.split(',').map(str::trim).collect::<Vec<_>>();
            match head {
                "OPENQASM" => {
                    if rest != "2.0" {
                        return Err(syntax(line, format!("unsupported version `{rest}`")));
                    }
                    saw_header = true;
                }
                "include" => {}
                "qreg" | "creg" => {
                    let (name, size) = parse_ref(rest, line)?;
                    let slot = if head == "qreg" { &mut regs.qreg } else { &mut regs.creg };
                    if slot.replace((name.to_string(), size)).is_some() {
                        return Err(syntax(line, format!("only one `{head}` is supported")));
                    }
                }
                "x" | "cx" | "ccx" => {
                    if !saw_header {
                        return Err(syntax(line, "missing `OPENQASM 2.0;` header"));
                    }
                    let ops = operands();
                    let want = match head {
                        "x" => 1,
                        "cx" => 2,
                        _ => 3,
                    };
                    if ops.len() != want {
                        return Err(syntax(line, format!("`{head}` takes {want} operands")));
                    }
                    let q: Vec<usize> = ops.iter().map(|o| regs.qubit(o, line)).collect::<Result<_, _>>()?;
                    let gate = match want {
                        1 => Gate::x(q[0]),
                        2 => Gate::cnot(q[0], q[1]),
                        _ => Gate::ccnot(q[0], q[1], q[2]),
                    };
                    gates.push((line, gate));
                }
                "measure" => {
                    let (src, dst) =
                        rest.split_once("->").ok_or_else(|| syntax(line, "expected `measure q[i] -> c[j]`"))?;
                    gates.push((line, Gate::measure(regs.qubit(src, line)?, regs.clbit(dst, line)?)));
                }
                other => return Err(syntax(line, format!("unsupported statement `{other}`"))),
            }
        }
    }
    if !saw_header {
        return Err(syntax(1, "missing `OPENQASM 2.0;` header"));
    }
    let mut circuit = Circuit::new(regs.qreg.map_or(0, |r| r.1), regs.creg.map_or(0, |r| r.1));
    for (line, gate) in gates {
        circuit.append(gate).map_err(|source| QasmError::Invalid { line, source })?;
    }
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x_then_measure() {
        let c = Circuit::from_gates(1, 1, [Gate::x(0), Gate::measure(0, 0)]).unwrap();
        let text = export_qasm(&c);
        let x = text.find("x q[0];").unwrap();
        let m = text.find("measure q[0] -> c[0];").unwrap();
        assert!(x < m);
    }

    #[test]
    fn empty_two_qubit() {
        assert_eq!(export_qasm(&Circuit::new(2, 0)), "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\n");
    }

    #[test]
    fn round_trip() {
        let c = Circuit::from_gates(
            4,
            2,
            [Gate::x(0), Gate::cnot(0, 3), Gate::ccnot(0, 3, 1), Gate::measure(1, 1), Gate::measure(3, 0)],
        )
        .unwrap();
        assert_eq!(import_qasm(&export_qasm(&c)).unwrap().gates(), c.gates());
    }

    #[test]
    fn import_accepts_spacing_and_comments() {
        let text = "OPENQASM 2.0; include \"qelib1.inc\";\n// test\nqreg r[3];\ncreg m[1];\ncx r[0], r[2]; measure r[2]->m[0]; // done\n";
        let c = import_qasm(text).unwrap();
        assert_eq!(c.gates(), &[Gate::cnot(0, 2), Gate::measure(2, 0)]);
    }

    #[test]
    fn import_errors() {
        assert!(matches!(import_qasm("qreg q[1];\nx q[0];"), Err(QasmError::Syntax { .. })));
        assert!(matches!(import_qasm("OPENQASM 2.0;\nqreg q[1];\nh q[0];"), Err(QasmError::Syntax { line: 3, .. })));
        assert!(matches!(
            import_qasm("OPENQASM 2.0;\nqreg q[2];\ncx q[1],q[1];"),
            Err(QasmError::Invalid { line: 3, source: CircuitError::RepeatedQubit(_) })
        ));
        assert!(matches!(import_qasm("OPENQASM 2.0;\nqreg q[2];\nx p[0];"), Err(QasmError::Syntax { .. })));
    }
}
