use surfweave::allocate::{AllocationMode, StabType};
use surfweave::arch::Architecture;
use surfweave::circuit::{circuit_for, gen_measurement_circuit, parse_layers, propagate, stabilizer_of, verify_stabilizer, Gate, PauliString};
use surfweave::driver::find_layout;

fn configs() -> Vec<(Architecture, AllocationMode)> {
    vec![
        (Architecture::Square, AllocationMode::Pair3),
        (Architecture::Square, AllocationMode::Center4),
        (Architecture::HeavySquare, AllocationMode::Pair3),
        (Architecture::HeavySquare, AllocationMode::Center4),
        (Architecture::Hexagon, AllocationMode::Pair3),
        (Architecture::HeavyHexagon, AllocationMode::Pair3),
    ]
}

#[test]
fn every_candidate_circuit_measures_its_stabilizer() {
    for (arch, mode) in configs() {
        for d in [3, 5] {
            let (_, layout, _) = find_layout(arch, d, mode).unwrap();
            for r in &layout.syndrome_rects {
                let stab = stabilizer_of(r);
                for (i, t) in r.trees.iter().enumerate() {
                    let c = circuit_for(r, i).unwrap();
                    verify_stabilizer(&c, &stab).unwrap_or_else(|m| panic!("{arch} d={d} stabilizer {}: {m:?}", r.id));
                    let (w, b) = (t.weight(), t.bridge_count());
                    assert_eq!(c.cnot_count(), w + 2 * (b - 1));
                    assert!(propagate(&c, &PauliString::new()).is_identity());
                    assert_eq!(parse_layers(&c.to_text()).unwrap(), c.layers);
                }
            }
        }
    }
}

#[test]
fn both_types_share_depth_beyond_one_ancilla() {
    for (arch, mode) in configs() {
        let (_, layout, _) = find_layout(arch, 3, mode).unwrap();
        for r in &layout.syndrome_rects {
            let t = &r.trees[0];
            let x = gen_measurement_circuit(StabType::X, t).unwrap();
            let z = gen_measurement_circuit(StabType::Z, t).unwrap();
            assert_eq!(x.cnot_count(), z.cnot_count());
            if t.bridge_count() >= 2 {
                assert_eq!(x.depth(), z.depth(), "{arch} stabilizer {}", r.id);
            } else {
                assert_eq!(x.depth(), z.depth() + 2);
            }
        }
    }
}

#[test]
fn reference_circuit_sizes() {
    let cases = [
        (Architecture::Square, AllocationMode::Center4, 1, 4, 8),
        (Architecture::Square, AllocationMode::Pair3, 2, 6, 10),
        (Architecture::HeavySquare, AllocationMode::Pair3, 3, 8, 12),
    ];
    for (arch, mode, b, cnots, depth) in cases {
        let (_, layout, _) = find_layout(arch, 5, mode).unwrap();
        let bulk_x = layout.syndrome_rects.iter().find(|r| r.weight() == 4 && r.stab_type == StabType::X).unwrap();
        let c = circuit_for(bulk_x, 0).unwrap();
        assert_eq!((c.tree.bridge_count(), c.cnot_count(), c.depth()), (b, cnots, depth), "{arch} {mode}");
        assert!(c.layers[0].iter().all(|g| matches!(g, Gate::Reset(_))));
    }
}
