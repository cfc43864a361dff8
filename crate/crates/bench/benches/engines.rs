use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use qrbs_bench::{activated_idc_circuit, chain_rules};
use qrbs_core::idc::build_idc_network;
use qrbs_core::sim::{run_fast, run_statevector, BasisIndex, SimConfig};
use qrbs_core::{compile_network, parse_rules, CompileOptions};

fn fast_engine(c: &mut Criterion) {
    let circuits: Vec<_> = (0..15).map(|q| activated_idc_circuit(CompileOptions::default(), q)).collect();
    c.bench_function("idc/fast/all-15", |b| {
        b.iter(|| {
            for circuit in &circuits {
                black_box(run_fast(circuit, BasisIndex(0)).unwrap());
            }
        })
    });
}

fn statevector_engine(c: &mut Criterion) {
    let mut group = c.benchmark_group("idc/statevector");
    group.sample_size(10);
    let config = SimConfig { max_qubits: 25 };
    for (label, share) in [("24q-shared", true), ("25q-unshared", false)] {
        let circuit = activated_idc_circuit(CompileOptions { share_subexpressions: share, ..Default::default() }, 6);
        group.bench_function(label, |b| {
            b.iter(|| black_box(run_statevector(&circuit, BasisIndex(0), &config).unwrap()))
        });
    }
    group.finish();
}

fn compilation(c: &mut Criterion) {
    let idc = build_idc_network();
    c.bench_function("compile/idc", |b| {
        b.iter(|| black_box(compile_network(&idc, CompileOptions::default()).unwrap()))
    });
    let mut group = c.benchmark_group("compile/chain");
    for n in [8, 64, 512] {
        let net = parse_rules(&chain_rules(n)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &net, |b, net| {
            b.iter(|| black_box(compile_network(net, CompileOptions::default()).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, fast_engine, statevector_engine, compilation);
criterion_main!(benches);
