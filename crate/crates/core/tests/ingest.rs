use std::collections::BTreeMap;

use na_evalkit_core::eval::evaluate_unified;
use na_evalkit_core::grid::{self, Cell};
use na_evalkit_core::ingest::{parse_flat_qasm, row_major_cells, to_rsqasm, FlatOp, Packing};
use na_evalkit_core::{ArchitectureSpec, GateKind, Instruction};
use proptest::prelude::*;

fn flat_source(n: usize) -> impl Strategy<Value = String> {
    let op = (0u8..9, 0..n, 0..n, -8i32..8).prop_map(move |(k, a, b, t)| match k {
        0 => format!("h q[{a}];"),
        1 => format!("s q[{a}];"),
        2 => format!("t q[{a}];"),
        3 => format!("rz({t}*pi/4) q[{a}];"),
        4 => format!("rx(0.{}) q[{a}];", t.unsigned_abs()),
        5 | 6 if a != b => format!("cz q[{a}], q[{b}];"),
        7 if a != b => format!("barrier q[{a}], q[{b}];"),
        8 => "barrier q;".to_string(),
        _ => format!("ry(-1.5) q[{b}];"),
    });
    prop::collection::vec(op, 0..40).prop_map(move |ops| {
        format!(
            "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[{n}];\n{}\n",
            ops.join("\n")
        )
    })
}

/// Stage index of every gate on each logical qubit, in source order.
fn stage_sequence(spec: &ArchitectureSpec, n: usize, src: &str, packing: Packing) -> Vec<Vec<usize>> {
    let c = parse_flat_qasm(src).unwrap();
    let p = to_rsqasm(&c, spec, packing).unwrap();
    let logical: BTreeMap<Cell, usize> = row_major_cells(spec).into_iter().take(n).zip(0..).collect();
    let mut seq = vec![Vec::new(); n];
    for (i, stage) in p.stages.iter().enumerate() {
        for op in stage.ops() {
            for cell in op.cells() {
                seq[logical[&cell]].push(i);
            }
        }
    }
    seq
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn packing_preserves_order_and_legality((n, src) in (1usize..8).prop_flat_map(|n| (Just(n), flat_source(n)))) {
        let spec = ArchitectureSpec::example_grid(5, 10);
        let c = parse_flat_qasm(&src).unwrap();
        let one = to_rsqasm(&c, &spec, Packing::OnePerStage).unwrap();
        let greedy = to_rsqasm(&c, &spec, Packing::Greedy).unwrap();

        prop_assert_eq!(one.stages.len(), c.gate_count());
        prop_assert!(greedy.stages.len() <= one.stages.len());
        for p in [&one, &greedy] {
            prop_assert_eq!(p.move_count(), 0);
            prop_assert_eq!(p.gate_count(), c.gate_count());
            prop_assert!(grid::simulate(p, &grid::initial_state(&spec)).is_ok());
        }
        for packing in [Packing::OnePerStage, Packing::Greedy] {
            for seq in stage_sequence(&spec, n, &src, packing) {
                prop_assert!(seq.windows(2).all(|w| w[0] < w[1]), "{:?}", seq);
            }
        }
        let barriers = c.ops.iter().filter(|o| matches!(o, FlatOp::Barrier { .. })).count();
        prop_assert_eq!(barriers, src.matches("barrier").count());
    }
}

#[test]
fn barrier_after_cz_is_not_a_second_gate() {
    let c = parse_flat_qasm("cz q[1], q[2]; barrier q[1], q[2];").unwrap();
    assert_eq!(c.gate_count(), 1);
    let spec = ArchitectureSpec::example_grid(50, 30);
    let b = evaluate_unified(&to_rsqasm(&c, &spec, Packing::Greedy).unwrap(), &spec).unwrap();
    assert_eq!(b.two_qubit_gate_count, 1);
    assert_eq!(b.gate_count, 1);
}

#[test]
fn rotation_angles_survive_ingest() {
    let c = parse_flat_qasm("qreg q[1];\nrz(pi/2) q[0];").unwrap();
    let p = to_rsqasm(&c, &ArchitectureSpec::example_grid(3, 1), Packing::OnePerStage).unwrap();
    assert_eq!(
        p.stages[0].ops(),
        [Instruction::gate(
            GateKind::Rz,
            Some(std::f64::consts::FRAC_PI_2),
            vec![Cell(0)]
        )]
    );
}
