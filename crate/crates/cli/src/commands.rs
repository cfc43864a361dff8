use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use qrbs_core::categorical::{ConstraintRule, LogicBase, Vocabulary, DEFAULT_MAX_ATTRIBUTES};
use qrbs_core::circuit::{export_qasm, import_qasm};
use qrbs_core::compiler::verify_compilation;
use qrbs_core::idc::{build_idc_network, classify_tnm, reference_stages, ClinicalFindings, Staging, REFERENCE_RESULTS};
use qrbs_core::rules::parse_constraints;
use qrbs_core::sim::{ClassicalBits, FinalState, SimConfig, StateVector};
use qrbs_core::{
    compile_network, diagnose, parse_rules, reduce_to_rlb, run, BasisIndex, CompileOptions, CompiledCircuit, Diagnosis,
    IdcStager, RuleNetwork, TnmClass,
};

use crate::{
    CompileArgs, CompileOpts, ExportArgs, ExportFormat, RlbArgs, SimulateArgs, StageArgs, VerifyCompileArgs,
    VerifyIdcArgs,
};

/// Widest circuit whose final state `simulate --state` will print.
const STATE_DUMP_MAX_QUBITS: usize = 8;

type Outcome = Result<bool>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn print_json(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("JSON values serialize"));
}

impl CompileOpts {
    fn options(&self) -> CompileOptions {
        CompileOptions { share_subexpressions: !self.no_share, ancilla_budget: self.budget, ..Default::default() }
    }
}

fn load_rules(path: &Path) -> Result<RuleNetwork> {
    parse_rules(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn map_json(compiled: &CompiledCircuit) -> Value {
    let inputs: serde_json::Map<String, Value> =
        compiled.input_map.iter().map(|(f, q)| (f.to_string(), json!(q.0))).collect();
    let outputs: serde_json::Map<String, Value> =
        compiled.output_map.iter().map(|(f, (q, c))| (f.to_string(), json!({ "qubit": q.0, "clbit": c.0 }))).collect();
    json!({
        "input_map": inputs,
        "output_map": outputs,
        "ancilla_count": compiled.ancilla_count,
        "num_qubits": compiled.circuit.num_qubits(),
        "num_clbits": compiled.circuit.num_clbits(),
    })
}

fn staging_json(tnm: TnmClass, staging: &Staging) -> Value {
    json!({
        "tnm": tnm.collapsed().to_string(),
        "qubit": staging.activated.0,
        "bits": staging.run.clbits.to_string(),
        "stages": staging.stages.stages().map(|s| s.name()).collect::<Vec<_>>(),
    })
}

pub fn stage(args: StageArgs, json: bool) -> Outcome {
    let (tnm, findings) = match (args.tnm, &args.findings) {
        (Some(tnm), _) => (tnm, None),
        (None, Some(path)) => {
            let findings: ClinicalFindings =
                serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
            findings.validate()?;
            (classify_tnm(&findings), Some(findings))
        }
        (None, None) => unreachable!("clap requires --tnm or --findings"),
    };
    let stager = IdcStager::new(CompileOptions::default(), SimConfig::from_env())?;
    let staging = stager.stage(tnm, args.engine)?;
    if json {
        let mut value = staging_json(tnm, &staging);
        value["engine"] = json!(args.engine.to_string());
        if let Some(f) = findings {
            value["findings"] = serde_json::to_value(f)?;
        }
        print_json(&value);
    } else if args.explain {
        println!("tnm:     {}", tnm.collapsed());
        println!("qubit:   q{} ({})", staging.activated.0, tnm.collapsed().compact());
        println!("bits:    {} (c7..c0)", staging.run.clbits);
        println!("stages:  {}", staging.stages);
    } else {
        println!("{}  {}", staging.run.clbits, staging.stages);
    }
    Ok(true)
}

pub fn rlb(args: RlbArgs, json: bool) -> Outcome {
    let file =
        parse_constraints(&read(&args.constraints)?).with_context(|| format!("in {}", args.constraints.display()))?;
    let vocab = Vocabulary::for_file(&file, Some(args.symptoms), Some(args.diagnoses))?;
    let elb = LogicBase::expanded(vocab.clone(), DEFAULT_MAX_ATTRIBUTES)?;
    let rlb = reduce_to_rlb(&elb, &ConstraintRule::from_file(&file, &vocab))?;
    let diagnosis = args.case.as_ref().map(|case| diagnose(case, &rlb)).transpose()?;

    if json {
        let mut value = json!({
            "symptoms": vocab.symptoms().iter().map(|f| f.as_str()).collect::<Vec<_>>(),
            "diagnoses": vocab.diagnoses().iter().map(|f| f.as_str()).collect::<Vec<_>>(),
            "elb_size": elb.len(),
            "rlb": rlb.labels(),
        });
        if let (Some(case), Some(d)) = (&args.case, &diagnosis) {
            value["case"] = match d {
                Diagnosis::Inconsistent => json!({ "symptoms": case.to_string(), "consistent": false }),
                Diagnosis::Verdict(v) => json!({
                    "symptoms": case.to_string(),
                    "consistent": true,
                    "compatible": v.compatible.iter().map(ToString::to_string).collect::<Vec<_>>(),
                    "statuses": v.statuses.iter().map(|(f, s)| (f.to_string(), json!(s.to_string()))).collect::<serde_json::Map<_, _>>(),
                }),
            };
        }
        print_json(&value);
        return Ok(true);
    }

    println!("ELB: {} associations", elb.len());
    println!("RLB: {}", rlb.labels().join(" "));
    if let (Some(case), Some(d)) = (&args.case, &diagnosis) {
        match d {
            Diagnosis::Inconsistent => println!("case {case}: inconsistent with the reduced logic base"),
            Diagnosis::Verdict(v) => {
                let compatible: Vec<String> = v.compatible.iter().map(ToString::to_string).collect();
                println!("case {case}: compatible diagnoses {}", compatible.join(" "));
                for (fact, status) in &v.statuses {
                    println!("  {fact}: {status}");
                }
            }
        }
    }
    Ok(true)
}

pub fn compile(args: CompileArgs, json: bool) -> Outcome {
    let network = load_rules(&args.rules)?;
    let compiled = compile_network(&network, args.opts.options())?;
    let qasm = export_qasm(&compiled.circuit);
    let map = map_json(&compiled);
    if let Some(path) = &args.map {
        write(path, &(serde_json::to_string_pretty(&map)? + "\n"))?;
    }
    match &args.output {
        Some(path) => {
            write(path, &qasm)?;
            if json {
                print_json(
                    &json!({ "circuit": path.display().to_string(), "map": map, "gate_counts": compiled.circuit.gate_counts() }),
                );
            } else {
                let counts = compiled.circuit.gate_counts();
                println!(
                    "{}: {} qubits ({} inputs, {} ancillae), {} clbits, {} gates",
                    path.display(),
                    counts.num_qubits,
                    compiled.input_map.len(),
                    compiled.ancilla_count,
                    counts.num_clbits,
                    counts.total
                );
            }
        }
        None if json => print_json(&json!({ "qasm": qasm, "map": map })),
        None => print!("{qasm}"),
    }
    Ok(true)
}

fn state_dump(state: &FinalState, num_qubits: usize) -> Vec<(String, [f64; 2])> {
    match state {
        FinalState::Basis(index) => vec![(format!("{:0width$b}", index.0, width = num_qubits.max(1)), [1.0, 0.0])],
        FinalState::Dense(sv) => dense_dump(sv),
    }
}

fn dense_dump(state: &StateVector) -> Vec<(String, [f64; 2])> {
    let width = state.num_qubits().max(1);
    state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() != 0.0)
        .map(|(i, a)| (format!("{i:0width$b}"), [a.re, a.im]))
        .collect()
}

pub fn simulate(args: SimulateArgs, json: bool) -> Outcome {
    let circuit = import_qasm(&read(&args.circuit)?).with_context(|| format!("in {}", args.circuit.display()))?;
    let n = circuit.num_qubits();
    if args.input.len() > n {
        bail!("--input has {} bits but the circuit has {n} qubits", args.input.len());
    }
    let (initial, _) = BasisIndex::parse_msb_first(&args.input)?;
    let mut config = SimConfig::from_env();
    if let Some(max) = args.max_qubits {
        config.max_qubits = max;
    }
    if args.state && n > STATE_DUMP_MAX_QUBITS {
        bail!("--state is limited to {STATE_DUMP_MAX_QUBITS} qubits, circuit has {n}");
    }
    let result = run(&circuit, initial, args.engine, &config)?;
    let dump = args.state.then(|| state_dump(&result.final_state, n));
    if json {
        let mut value = json!({ "engine": args.engine.to_string(), "clbits": result.clbits.to_string() });
        if let Some(dump) = dump {
            value["state"] =
                dump.into_iter().map(|(basis, [re, im])| json!({ "basis": basis, "re": re, "im": im })).collect();
        }
        print_json(&value);
    } else {
        println!("{}", result.clbits);
        for (basis, [re, im]) in dump.unwrap_or_default() {
            println!("|{basis}>: {re:+.6}{im:+.6}i");
        }
    }
    Ok(true)
}

pub fn export(args: ExportArgs, json: bool) -> Outcome {
    let network = match &args.rules {
        Some(path) => load_rules(path)?,
        None => build_idc_network(),
    };
    let compiled = compile_network(&network, args.opts.options())?;
    let text = match args.format {
        ExportFormat::Qasm => export_qasm(&compiled.circuit),
        ExportFormat::Json => {
            let mut value = serde_json::to_value(compiled.metadata())?;
            value["map"] = map_json(&compiled);
            serde_json::to_string_pretty(&value)? + "\n"
        }
    };
    match &args.output {
        Some(path) => {
            write(path, &text)?;
            if json {
                print_json(
                    &json!({ "output": path.display().to_string(), "format": format!("{:?}", args.format).to_lowercase() }),
                );
            } else {
                println!("wrote {}", path.display());
            }
        }
        None => print!("{text}"),
    }
    Ok(true)
}

pub fn verify_idc(args: VerifyIdcArgs, json: bool) -> Outcome {
    let stager = IdcStager::new(args.opts.options(), SimConfig::from_env())?;
    let mut rows = Vec::new();
    for (tnm_text, qubit, expected) in REFERENCE_RESULTS {
        let tnm: TnmClass = tnm_text.parse()?;
        let staging = stager.stage(tnm, args.engine)?;
        let expected_bits: ClassicalBits = expected.parse()?;
        let pass = staging.activated.0 == qubit
            && staging.run.clbits == expected_bits
            && staging.stages == reference_stages(tnm);
        rows.push((tnm, qubit, expected, staging, pass));
    }
    let passed = rows.iter().filter(|r| r.4).count();
    if json {
        let cases: Vec<Value> = rows
            .iter()
            .map(|(tnm, qubit, expected, staging, pass)| {
                let mut v = staging_json(*tnm, staging);
                v["expected_qubit"] = json!(qubit);
                v["expected_bits"] = json!(expected);
                v["pass"] = json!(pass);
                v
            })
            .collect();
        print_json(
            &json!({ "engine": args.engine.to_string(), "passed": passed, "total": rows.len(), "cases": cases }),
        );
    } else {
        println!("{:<6} {:<9} {:<9} {:<9} {:<14} result", "qubit", "tnm", "expected", "measured", "stages");
        for (tnm, qubit, expected, staging, pass) in &rows {
            println!(
                "{:<6} {:<9} {:<9} {:<9} {:<14} {}",
                format!("q{qubit}"),
                tnm.to_string(),
                expected,
                staging.run.clbits.to_string(),
                staging.stages.to_string(),
                if *pass { "pass" } else { "FAIL" }
            );
        }
        println!("{passed}/{} passed ({} engine)", rows.len(), args.engine);
    }
    Ok(passed == rows.len())
}

pub fn verify_compile(args: VerifyCompileArgs, json: bool) -> Outcome {
    let network = load_rules(&args.rules)?;
    let compiled = compile_network(&network, args.opts.options())?;
    let report = verify_compilation(&network, &compiled)?;
    let fmt_bits = |bits: &[bool]| bits.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>();
    if json {
        let mismatches: Vec<Value> = report
            .mismatches
            .iter()
            .map(|m| json!({ "inputs": fmt_bits(&m.inputs), "expected": fmt_bits(&m.expected), "measured": fmt_bits(&m.measured) }))
            .collect();
        print_json(&json!({
            "inputs": network.inputs().iter().map(|f| f.as_str()).collect::<Vec<_>>(),
            "outputs": network.outputs().iter().map(|f| f.as_str()).collect::<Vec<_>>(),
            "assignments_checked": report.assignments_checked,
            "mismatches": mismatches,
        }));
    } else {
        for m in &report.mismatches {
            println!(
                "mismatch: inputs {} expected {} measured {}",
                fmt_bits(&m.inputs),
                fmt_bits(&m.expected),
                fmt_bits(&m.measured)
            );
        }
        println!("{} assignments checked, {} mismatches", report.assignments_checked, report.mismatches.len());
    }
    Ok(report.is_ok())
}
