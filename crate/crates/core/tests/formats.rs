mod common;

use common::*;
use na_evalkit_core::arch::{parse_architecture, QubitPlacement};
use na_evalkit_core::rsqasm::{parse_program, parse_program_bytes, parse_program_with_lines, serialize_program};
use na_evalkit_core::{ArchitectureSpec, GateKind};
use proptest::prelude::*;

fn fidelity() -> impl Strategy<Value = f64> {
    (1u32..=1_000_000).prop_map(|k| f64::from(k) / 1e6)
}

fn positive() -> impl Strategy<Value = f64> {
    (1e-3f64..1e9).prop_filter("finite", |v| v.is_finite())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn program_round_trips((_, p) in legal_program(16)) {
        let text = serialize_program(&p);
        let back = parse_program(&text).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(serialize_program(&back), text.clone());
        let stage_lines = text.lines().skip(1).filter(|l| !l.trim().is_empty()).count();
        prop_assert_eq!(back.stages.len(), stage_lines);
    }

    #[test]
    fn stage_lines_point_at_stages((_, p) in legal_program(8)) {
        let text = serialize_program(&p).replace('\n', "\n// note\n\n");
        let (back, lines) = parse_program_with_lines(&text).unwrap();
        prop_assert_eq!(&back, &p);
        let src: Vec<&str> = text.lines().collect();
        for (stage, line) in back.stages.iter().zip(lines) {
            prop_assert_eq!(src[line - 1], stage.to_string());
        }
    }

    #[test]
    fn parser_survives_arbitrary_bytes(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let _ = parse_program_bytes(&bytes);
        let mut doc = b"RSQASM 1.0;\n".to_vec();
        doc.extend_from_slice(&bytes);
        let _ = parse_program_bytes(&doc);
    }

    #[test]
    fn parser_survives_instruction_like_noise(body in "[a-z()\\[\\]q0-9,;. \\-+*/\n]{0,120}") {
        let _ = parse_program(&format!("RSQASM 1.0;\n{body}"));
        let _ = na_evalkit_core::ingest::parse_flat_qasm(&body);
    }

    #[test]
    fn architecture_round_trips(
        side in 1u32..40,
        raw in prop::collection::btree_set(any::<u32>(), 0..20),
        times in prop::collection::vec(0.0f64..100.0, 7),
        fids in prop::collection::vec(fidelity(), 7),
        speed in positive(),
        spacing in positive(),
        transfer in 0.0f64..100.0,
        f_trans in fidelity(),
        t1 in positive(),
        t2 in positive(),
        excite in fidelity(),
    ) {
        let cells = side as u64 * side as u64;
        let mut spec = ArchitectureSpec::example_grid(side, 0);
        let positions: std::collections::BTreeSet<u64> = raw.iter().map(|&r| u64::from(r) % cells).collect();
        spec.qubits = positions
            .into_iter()
            .enumerate()
            .map(|(i, c)| QubitPlacement { id: 100 - i as u32, x: (c % u64::from(side)) as u32, y: (c / u64::from(side)) as u32 })
            .collect();
        for (i, g) in GateKind::ALL.into_iter().enumerate() {
            spec.gate_times.set(g, times[i]);
            spec.gate_fidelities.set(g, fids[i]);
        }
        spec.move_speed = speed;
        spec.inter_qubit_distance = spacing;
        spec.aod_transfer_time = transfer;
        spec.transfer_fidelity = f_trans;
        spec.t1 = t1;
        spec.t2 = t2;
        spec.excitement_fidelity = excite;
        spec.validate().unwrap();

        let text = spec.to_json_string();
        let back = parse_architecture(&text).unwrap();
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(back.to_json_string(), text);
        prop_assert!(spec.effective_coherence_time() < t1.min(t2));
    }
}
