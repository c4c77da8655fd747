//! Closed-loop property: every schedule the compiler produces replays
//! cleanly through the validator, across randomized circuits and all four
//! method configurations.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use atomroute_core::metrics::count_ops;
use atomroute_core::pipeline::{compile, CompileOptions, Outcome};
use atomroute_core::placement::AnnealOptions;
use atomroute_core::qasm::{Circuit, Gate, GateKind};
use atomroute_core::transpile::{validate_schedule, Method};

fn random_circuit(rng: &mut ChaCha8Rng, max_qubits: usize, max_gates: usize) -> Circuit {
    let n = rng.gen_range(4..=max_qubits);
    let n_gates = rng.gen_range(10..=max_gates);
    let mut gates = Vec::with_capacity(n_gates);
    for k in 0..n_gates {
        if rng.gen_bool(0.35) {
            gates.push(Gate {
                kind: GateKind::OneQ("h".into()),
                qubits: vec![rng.gen_range(0..n)],
                params: vec![],
                source_line: k + 1,
            });
        } else {
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n);
            while b == a {
                b = rng.gen_range(0..n);
            }
            gates.push(Gate {
                kind: GateKind::Cz,
                qubits: vec![a, b],
                params: vec![],
                source_line: k + 1,
            });
        }
    }
    Circuit {
        name: format!("random_{n}q_{n_gates}g"),
        num_qubits: n,
        gates,
    }
}

fn options_for(method: Method, seed: u64) -> CompileOptions {
    let mut opts = CompileOptions {
        anneal: AnnealOptions {
            maxiter: 1200,
            seed,
            ..Default::default()
        },
        ..Default::default()
    };
    method.apply(&mut opts.compile);
    opts
}

#[test]
fn randomized_circuits_validate_across_all_methods() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC10C);
    let mut compiles = 0usize;
    for case in 0..18 {
        let circuit = random_circuit(&mut rng, 12, 200);
        for method in Method::ALL {
            let opts = options_for(method, case as u64);
            let artifact = compile(&circuit, &opts).expect("structurally valid input");
            match artifact.outcome {
                Outcome::Ok => {
                    let schedule = artifact.schedule.as_ref().unwrap();
                    let report = validate_schedule(
                        schedule,
                        &circuit,
                        &artifact.layout,
                        &artifact.config.operating_point,
                    );
                    assert!(
                        report.is_ok(),
                        "{} under {:?}: {}",
                        circuit.name,
                        method,
                        report.first_violation.unwrap()
                    );
                    let counts = count_ops(schedule);
                    let metrics = artifact.metrics.as_ref().unwrap();
                    assert!(metrics.m2_exec_time_us <= metrics.exec_time_us);
                    assert_eq!(counts.cz, circuit.cz_count());
                    compiles += 1;
                }
                // transport can be structurally closed on unlucky layouts;
                // that is a legitimate outcome, not a validation failure
                Outcome::NoValidTransport { .. } => {}
                Outcome::BudgetExceeded { .. } => {
                    panic!("default budget cannot trip on these sizes")
                }
            }
        }
    }
    assert!(compiles > 40, "only {compiles} compiles succeeded");
}

#[test]
fn hub_methods_prefer_shuttles_over_swaps() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut shuttled = 0usize;
    for case in 0..8 {
        let circuit = random_circuit(&mut rng, 10, 80);
        let artifact = compile(&circuit, &options_for(Method::ProposedRing, case)).unwrap();
        if let (Outcome::Ok, Some(m)) = (&artifact.outcome, &artifact.metrics) {
            // zero-SWAP dominance: whenever every transport decision had a
            // shuttle route available, no SWAP macros appear
            let schedule = artifact.schedule.as_ref().unwrap();
            let all_had_shuttles = schedule
                .stats
                .transport_decisions
                .iter()
                .all(|d| d.shuttle_candidates + d.eviction_candidates > 0);
            if all_had_shuttles {
                assert_eq!(m.counts.swaps, 0, "swaps issued despite shuttle routes");
            }
            shuttled += m.counts.shuttles;
        }
    }
    assert!(shuttled > 0, "suite never exercised shuttling");
}
