//! Line-oriented rule DSL.
//!
//! ```text
//! # comment
//! inputs: A, B, C            (optional, fixes input order)
//! rule R1: A & B -> X
//! rule: X | !C -> Y
//! outputs: Y
//! ```
//!
//! Precedence is `!` > `&` > `|` > `=>`; `&` and `|` associate left, `=>`
//! associates right and is only accepted in constraint files, which replace
//! `-> fact` with a bare formula and may declare `symptoms:` / `diagnoses:`.

use std::fmt;

use thiserror::Error;

use super::{BoolExpr, FactId, Rule, RuleError, RuleNetwork};

/// Syntax error with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    And,
    Or,
    Not,
    LParen,
    RParen,
    Arrow,
    Implies,
    Colon,
    Comma,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::And => f.write_str("`&`"),
            Tok::Or => f.write_str("`|`"),
            Tok::Not => f.write_str("`!`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Implies => f.write_str("`=>`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Comma => f.write_str("`,`"),
        }
    }
}

fn lex_line(line: &str, line_no: usize) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        let next = chars.get(i + 1).copied();
        match c {
            '#' => break,
            c if c.is_whitespace() => {}
            '&' => toks.push((Tok::And, col)),
            '|' => toks.push((Tok::Or, col)),
            '!' => toks.push((Tok::Not, col)),
            '(' => toks.push((Tok::LParen, col)),
            ')' => toks.push((Tok::RParen, col)),
            ':' => toks.push((Tok::Colon, col)),
            ',' => toks.push((Tok::Comma, col)),
            '-' if next == Some('>') => {
                toks.push((Tok::Arrow, col));
                i += 1;
            }
            '=' if next == Some('>') => {
                toks.push((Tok::Implies, col));
                i += 1;
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && super::is_fact_char(chars[i])
                    && !(chars[i] == '-' && chars.get(i + 1) == Some(&'>'))
                {
                    i += 1;
                }
                toks.push((Tok::Ident(chars[start..i].iter().collect()), col));
                continue;
            }
            other => {
                return Err(ParseError {
                    line: line_no,
                    column: col,
                    message: format!("unexpected character `{other}`"),
                });
            }
        }
        i += 1;
    }
    Ok(toks)
}

struct LineParser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    line: usize,
    end_col: usize,
    allow_implies: bool,
}

impl<'a> LineParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(_, c)| *c)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError { line: self.line, column: self.col(), message: message.into() }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {t}")),
            None => self.error(format!("expected {wanted}, found end of line")),
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    fn ident(&mut self) -> Result<FactId, ParseError> {
        match self.peek() {
            Some(Tok::Ident(name)) => {
                let fact = FactId::new(name.clone()).map_err(|e| self.error(e.to_string()))?;
                self.pos += 1;
                Ok(fact)
            }
            _ => Err(self.unexpected("a fact name")),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<FactId>, ParseError> {
        let mut out = vec![self.ident()?];
        while self.eat(&Tok::Comma) {
            out.push(self.ident()?);
        }
        Ok(out)
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.unexpected("end of line")),
        }
    }

    // implication = disjunction ["=>" implication]
    fn expr(&mut self) -> Result<BoolExpr, ParseError> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Implies) {
            if !self.allow_implies {
                return Err(self.error("`=>` is only allowed in constraint files"));
            }
            self.pos += 1;
            let rhs = self.expr()?;
            return Ok(BoolExpr::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<BoolExpr, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Tok::Or) {
            lhs = BoolExpr::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<BoolExpr, ParseError> {
        let mut lhs = self.factor()?;
        while self.eat(&Tok::And) {
            lhs = BoolExpr::and(lhs, self.factor()?);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<BoolExpr, ParseError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(BoolExpr::not(self.factor()?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(_)) => Ok(BoolExpr::Atom(self.ident()?)),
            _ => Err(self.unexpected("an expression")),
        }
    }
}

enum Line {
    Rule { name: Option<String>, expr: BoolExpr, consequent: Option<FactId> },
    Decl { keyword: String, facts: Vec<FactId> },
}

const DECLARATIONS: [&str; 4] = ["inputs", "outputs", "symptoms", "diagnoses"];

fn parse_line(toks: &[(Tok, usize)], line: usize, end_col: usize, constraint: bool) -> Result<Line, ParseError> {
    let mut p = LineParser { toks, pos: 0, line, end_col, allow_implies: constraint };
    let keyword = match p.peek() {
        Some(Tok::Ident(k)) => k.clone(),
        _ => return Err(p.unexpected("`rule` or a declaration")),
    };
    p.pos += 1;
    if keyword == "rule" {
        let name = match p.peek() {
            Some(Tok::Ident(n)) => {
                let n = n.clone();
                p.pos += 1;
                Some(n)
            }
            _ => None,
        };
        p.expect(&Tok::Colon)?;
        let expr = p.expr()?;
        let consequent = if constraint {
            if p.peek() == Some(&Tok::Arrow) {
                return Err(p.error("constraints are formulas; use `=>` for implication"));
            }
            None
        } else {
            p.expect(&Tok::Arrow)?;
            Some(p.ident()?)
        };
        p.finish()?;
        return Ok(Line::Rule { name, expr, consequent });
    }
    let allowed = if constraint { &DECLARATIONS[2..] } else { &DECLARATIONS[..2] };
    if !allowed.contains(&keyword.as_str()) {
        p.pos -= 1;
        let wanted = std::iter::once("`rule`".to_string())
            .chain(allowed.iter().map(|k| format!("`{k}:`")))
            .collect::<Vec<_>>()
            .join(", ");
        return Err(p.unexpected(&format!("one of {wanted}")));
    }
    p.expect(&Tok::Colon)?;
    let facts = p.ident_list()?;
    p.finish()?;
    Ok(Line::Decl { keyword, facts })
}

fn lines(text: &str, constraint: bool) -> impl Iterator<Item = Result<(usize, Line), ParseError>> + '_ {
    text.lines().enumerate().filter_map(move |(i, raw)| {
        let line_no = i + 1;
        let toks = match lex_line(raw, line_no) {
            Ok(t) => t,
            Err(e) => return Some(Err(e)),
        };
        if toks.is_empty() {
            return None;
        }
        Some(parse_line(&toks, line_no, raw.chars().count() + 1, constraint).map(|l| (line_no, l)))
    })
}

fn duplicate_decl(line: usize, keyword: &str) -> ParseError {
    ParseError { line, column: 1, message: format!("`{keyword}:` declared twice") }
}

/// Parses rule-DSL text into a validated network.
///
/// Without an `inputs:` line the inputs are every non-concluded fact in
/// first-mention order. Without `outputs:` the outputs are the consequents
/// no antecedent uses.
pub fn parse_rules(text: &str) -> Result<RuleNetwork, RuleError> {
    let mut rules = Vec::new();
    let mut declared_inputs: Option<Vec<FactId>> = None;
    let mut outputs: Option<Vec<FactId>> = None;
    for item in lines(text, false) {
        let (line_no, line) = item?;
        match line {
            Line::Rule { name, expr, consequent } => {
                let consequent = consequent.expect("rule mode always parses a consequent");
                rules.push(Rule { name, antecedent: expr, consequent });
            }
            Line::Decl { keyword, facts } => {
                let slot = if keyword == "inputs" { &mut declared_inputs } else { &mut outputs };
                if slot.replace(facts).is_some() {
                    return Err(duplicate_decl(line_no, &keyword).into());
                }
            }
        }
    }
    let inputs = match declared_inputs {
        Some(inputs) => inputs,
        None => {
            let mut inputs: Vec<FactId> = Vec::new();
            for rule in &rules {
                for atom in rule.antecedent.atoms() {
                    if !inputs.contains(atom) && !rules.iter().any(|r| &r.consequent == atom) {
                        inputs.push(atom.clone());
                    }
                }
            }
            inputs
        }
    };
    RuleNetwork::new(inputs, rules, outputs)
}

/// Formula of a constraint line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintBody {
    Formula(BoolExpr),
    /// `rule: any_symptom_implies_diagnosis`, i.e.
    /// `(s1 | ... | sn) => (d1 | ... | dm)` over the declared vocabulary.
    AnySymptomImpliesDiagnosis,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedConstraint {
    pub name: Option<String>,
    pub body: ConstraintBody,
}

/// Parsed constraint file; declarations are optional.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintFile {
    pub symptoms: Option<Vec<FactId>>,
    pub diagnoses: Option<Vec<FactId>>,
    pub constraints: Vec<NamedConstraint>,
}

pub const ANY_SYMPTOM_IMPLIES_DIAGNOSIS: &str = "any_symptom_implies_diagnosis";

pub fn parse_constraints(text: &str) -> Result<ConstraintFile, ParseError> {
    let mut file = ConstraintFile::default();
    for item in lines(text, true) {
        let (line_no, line) = item?;
        match line {
            Line::Rule { name, expr, .. } => {
                let body = match &expr {
                    BoolExpr::Atom(f) if f.as_str() == ANY_SYMPTOM_IMPLIES_DIAGNOSIS => {
                        ConstraintBody::AnySymptomImpliesDiagnosis
                    }
                    _ => ConstraintBody::Formula(expr),
                };
                file.constraints.push(NamedConstraint { name, body });
            }
            Line::Decl { keyword, facts } => {
                let slot = if keyword == "symptoms" { &mut file.symptoms } else { &mut file.diagnoses };
                if slot.replace(facts).is_some() {
                    return Err(duplicate_decl(line_no, &keyword));
                }
            }
        }
    }
    Ok(file)
}

const PREC_IMPLIES: u8 = 0;
const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_UNARY: u8 = 3;

fn write_expr(e: &BoolExpr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let (prec, lhs, op, rhs) = match e {
        BoolExpr::Atom(name) => return write!(f, "{name}"),
        BoolExpr::Not(inner) => {
            f.write_str("!")?;
            return write_expr(inner, PREC_UNARY, f);
        }
        BoolExpr::And(a, b) => (PREC_AND, (a, PREC_AND), " & ", (b, PREC_UNARY)),
        BoolExpr::Or(a, b) => (PREC_OR, (a, PREC_OR), " | ", (b, PREC_AND)),
        BoolExpr::Implies(a, b) => (PREC_IMPLIES, (a, PREC_OR), " => ", (b, PREC_IMPLIES)),
    };
    let paren = prec < min;
    if paren {
        f.write_str("(")?;
    }
    write_expr(lhs.0, lhs.1, f)?;
    f.write_str(op)?;
    write_expr(rhs.0, rhs.1, f)?;
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, PREC_IMPLIES, f)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.name {
            Some(name) => write!(f, "rule {name}: {} -> {}", self.antecedent, self.consequent),
            None => write!(f, "rule: {} -> {}", self.antecedent, self.consequent),
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, keyword: &str, facts: &[FactId]) -> fmt::Result {
    let names: Vec<&str> = facts.iter().map(FactId::as_str).collect();
    writeln!(f, "{keyword}: {}", names.join(", "))
}

/// Canonical DSL text; always reparses to an identical network.
impl fmt::Display for RuleNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.inputs.is_empty() {
            write_list(f, "inputs", &self.inputs)?;
        }
        for rule in &self.rules {
            writeln!(f, "{rule}")?;
        }
        if !self.outputs.is_empty() {
            write_list(f, "outputs", &self.outputs)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(facts: &[FactId]) -> Vec<&str> {
        facts.iter().map(FactId::as_str).collect()
    }

    #[test]
    fn single_and_rule() {
        let net = parse_rules("rule: A & B -> X").unwrap();
        assert_eq!(names(net.inputs()), ["A", "B"]);
        assert_eq!(net.rules().len(), 1);
        assert_eq!(names(net.outputs()), ["X"]);
    }

    #[test]
    fn empty_text_is_empty_network() {
        assert_eq!(parse_rules(""), Err(RuleError::EmptyNetwork));
        assert_eq!(parse_rules("# nothing\n\n"), Err(RuleError::EmptyNetwork));
    }

    #[test]
    fn worked_three_rule_text() {
        let text = "# worked example\nrule R1: A & B -> X\nrule R2: X | C -> Y\nrule R3: Y & (D | E) -> R\n";
        let net = parse_rules(text).unwrap();
        assert_eq!(names(net.inputs()), ["A", "B", "C", "D", "E"]);
        let consequents: Vec<&str> = net.rules().iter().map(|r| r.consequent.as_str()).collect();
        assert_eq!(consequents, ["X", "Y", "R"]);
        assert_eq!(names(net.outputs()), ["R"]);
        assert_eq!(net.rules()[0].name.as_deref(), Some("R1"));
    }

    #[test]
    fn precedence() {
        let net = parse_rules("rule: !A & B | C & D -> X").unwrap();
        let expected = BoolExpr::or(
            BoolExpr::and(BoolExpr::not(BoolExpr::atom("A").unwrap()), BoolExpr::atom("B").unwrap()),
            BoolExpr::and(BoolExpr::atom("C").unwrap(), BoolExpr::atom("D").unwrap()),
        );
        assert_eq!(net.rules()[0].antecedent, expected);
    }

    #[test]
    fn hyphenated_names_and_arrow() {
        let net = parse_rules("rule: T0-N1->I-B").unwrap();
        assert_eq!(names(net.inputs()), ["T0-N1"]);
        assert_eq!(names(net.outputs()), ["I-B"]);
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_rules("rule: A & B -> X\nrule: A & & B -> Y\n").unwrap_err();
        match err {
            RuleError::Parse(e) => {
                assert_eq!((e.line, e.column), (2, 11));
            }
            other => panic!("{other:?}"),
        }
        let err = parse_rules("rule: A $ B -> X").unwrap_err();
        assert!(matches!(err, RuleError::Parse(ParseError { line: 1, column: 9, .. })));
        let err = parse_rules("rule: (A | B -> X").unwrap_err();
        assert!(matches!(err, RuleError::Parse(ParseError { line: 1, column: 14, .. })));
    }

    #[test]
    fn implication_rejected_in_rules() {
        let err = parse_rules("rule: A => B -> X").unwrap_err();
        assert!(err.to_string().contains("constraint files"), "{err}");
    }

    #[test]
    fn unknown_output_and_duplicate_consequent() {
        assert!(matches!(parse_rules("rule: A -> X\noutputs: Q"), Err(RuleError::UnknownAtom(_))));
        assert!(matches!(parse_rules("rule: A -> X\nrule: B -> X"), Err(RuleError::DuplicateConsequent(_))));
        assert!(matches!(parse_rules("inputs: A\nrule: A & B -> X"), Err(RuleError::UnknownAtom(_))));
        assert!(matches!(parse_rules("rule: Y -> X\nrule: X -> Y"), Err(RuleError::Cycle(_))));
    }

    #[test]
    fn inputs_only_network() {
        let net = parse_rules("inputs: A, B\noutputs: A, B").unwrap();
        assert!(net.rules().is_empty());
        assert_eq!(names(net.outputs()), ["A", "B"]);
    }

    #[test]
    fn explicit_outputs_keep_order() {
        let net = parse_rules("rule: A -> X\nrule: X & B -> Y\noutputs: Y, X, A").unwrap();
        assert_eq!(names(net.outputs()), ["Y", "X", "A"]);
    }

    #[test]
    fn pretty_print_parenthesizes_minimally() {
        let a = || BoolExpr::atom("a").unwrap();
        let b = || BoolExpr::atom("b").unwrap();
        let c = || BoolExpr::atom("c").unwrap();
        assert_eq!(BoolExpr::and(a(), BoolExpr::or(b(), c())).to_string(), "a & (b | c)");
        assert_eq!(BoolExpr::and(BoolExpr::and(a(), b()), c()).to_string(), "a & b & c");
        assert_eq!(BoolExpr::and(a(), BoolExpr::and(b(), c())).to_string(), "a & (b & c)");
        assert_eq!(BoolExpr::not(BoolExpr::or(a(), b())).to_string(), "!(a | b)");
        assert_eq!(BoolExpr::implies(BoolExpr::implies(a(), b()), c()).to_string(), "(a => b) => c");
        assert_eq!(BoolExpr::implies(a(), BoolExpr::implies(b(), c())).to_string(), "a => b => c");
    }

    #[test]
    fn constraint_file() {
        let text = "symptoms: s1, s2\ndiagnoses: d1, d2\nrule R1: any_symptom_implies_diagnosis\nrule R2: d2 => s1\n";
        let file = parse_constraints(text).unwrap();
        assert_eq!(names(file.symptoms.as_ref().unwrap()), ["s1", "s2"]);
        assert_eq!(file.constraints.len(), 2);
        assert_eq!(file.constraints[0].body, ConstraintBody::AnySymptomImpliesDiagnosis);
        assert_eq!(
            file.constraints[1].body,
            ConstraintBody::Formula(BoolExpr::implies(BoolExpr::atom("d2").unwrap(), BoolExpr::atom("s1").unwrap()))
        );
        assert!(parse_constraints("rule: a -> b").is_err());
        assert!(parse_constraints("outputs: a").is_err());
        assert!(parse_constraints("symptoms: a\nsymptoms: b").is_err());
    }
}
