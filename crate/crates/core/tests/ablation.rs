//! Method-matrix behavior on two structurally different fixtures: a
//! routing-heavy two-cluster circuit where hub shuttling displaces SWAP
//! chains and improves the fidelity proxy, and a local circuit that the
//! placement alone resolves, where every ablation produces numerically
//! identical results.

use std::path::Path;

use atomroute_core::pipeline::{compile, CompileArtifact, CompileOptions};
use atomroute_core::placement::AnnealOptions;
use atomroute_core::qasm::parse_qasm;
use atomroute_core::transpile::{validate_schedule, Method};

fn compile_fixture(name: &str, method: Method) -> CompileArtifact {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name);
    let mut circuit = parse_qasm(&std::fs::read_to_string(path).unwrap()).unwrap();
    circuit.name = name.trim_end_matches(".qasm").to_string();
    let mut opts = CompileOptions {
        anneal: AnnealOptions {
            maxiter: 3000,
            ..Default::default()
        },
        ..Default::default()
    };
    method.apply(&mut opts.compile);
    let artifact = compile(&circuit, &opts).unwrap();
    assert!(artifact.outcome.is_ok(), "{name} under {method:?}");
    let report = validate_schedule(
        artifact.schedule.as_ref().unwrap(),
        &circuit,
        &artifact.layout,
        &artifact.config.operating_point,
    );
    assert!(report.is_ok(), "{}", report.first_violation.unwrap());
    artifact
}

#[test]
fn interaction_weights_sum_to_the_cz_count_on_every_fixture() {
    for name in [
        "adder_9_synthetic.qasm",
        "qft_10_synthetic.qasm",
        "clusters_18.qasm",
        "bell.qasm",
    ] {
        let path = Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/fixtures")
            .join(name);
        let circuit = parse_qasm(&std::fs::read_to_string(path).unwrap()).unwrap();
        let graph = atomroute_core::qasm::interaction_graph(&circuit);
        assert_eq!(graph.total_weight(), circuit.cz_count() as u64, "{name}");
    }
}

#[test]
fn hub_shuttling_displaces_swaps_on_the_routing_heavy_fixture() {
    let ring = compile_fixture("clusters_18.qasm", Method::ProposedRing);
    let no_hub = compile_fixture("clusters_18.qasm", Method::NoHub);
    let (m_ring, m_no_hub) = (ring.metrics.unwrap(), no_hub.metrics.unwrap());

    assert!(m_ring.counts.shuttles > 0, "full method never shuttled");
    assert_eq!(m_no_hub.counts.shuttles, 0, "no-hub cannot shuttle");
    assert!(
        m_no_hub.counts.swaps > m_ring.counts.swaps,
        "SWAP-only routing should issue more SWAPs ({} vs {})",
        m_no_hub.counts.swaps,
        m_ring.counts.swaps
    );
    assert!(
        m_ring.log_fidelity > m_no_hub.log_fidelity,
        "hub shuttling should improve the fidelity proxy ({} vs {})",
        m_ring.log_fidelity,
        m_no_hub.log_fidelity
    );
}

#[test]
fn ablations_coincide_when_placement_absorbs_the_circuit() {
    let baseline = compile_fixture("adder_9_synthetic.qasm", Method::ProposedRing);
    let base_metrics = baseline.metrics.unwrap();
    assert_eq!(base_metrics.counts.swaps, 0);
    assert_eq!(base_metrics.counts.shuttles, 0);
    for method in [Method::Proposed, Method::NoEviction, Method::NoHub] {
        let other = compile_fixture("adder_9_synthetic.qasm", method).metrics.unwrap();
        assert_eq!(other.counts, base_metrics.counts, "{method:?}");
        assert_eq!(
            other.log_fidelity.to_bits(),
            base_metrics.log_fidelity.to_bits(),
            "{method:?}"
        );
        assert_eq!(
            other.exec_time_us.to_bits(),
            base_metrics.exec_time_us.to_bits(),
            "{method:?}"
        );
    }
}
