use molqa::coupling::{find_e_z, pair_couplings, qubit_params, Encoding, PairGeometry};
use molqa::experiments::{
    run_chain_1d, run_lattice_2d, run_two_qubit, scan_constant, stack_3d_parameters, working_point, ScanSpec,
    Setup, StackShape, SweptConstant,
};
use molqa::lattice::{effective_ising, LatticeConfig};
use molqa::molecule::{FieldPoint, MoleculeConstants, MoleculeModel, DEFAULT_N_MAX};

mod common;
use common::rel_err;

fn setup() -> Setup {
    Setup::srf().unwrap()
}

#[test]
fn checkerboard_wins_on_2x3() {
    let s = setup();
    let r = &run_lattice_2d(&s, 2, 3, &[10.0], 400).unwrap()[0];
    let ground: Vec<u64> = r.ground.configs.iter().map(|c| c.bits).collect();
    assert_eq!(ground.len(), 2);
    assert_eq!(ground[0] ^ ground[1], 0b111111);
    let best = (0..r.final_valid.len())
        .max_by(|&a, &b| r.final_valid[a].total_cmp(&r.final_valid[b]))
        .unwrap() as u64;
    assert!(ground.contains(&best));
}

#[test]
fn two_qubit_chain_is_the_pair_experiment() {
    let s = setup();
    let chain = &run_chain_1d(&s, 2, &[15.0], 200).unwrap()[0];
    let pair = run_two_qubit(&s, 15.0, 200).unwrap().anneal;
    for (a, b) in chain.final_valid.iter().zip(&pair.final_valid) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!((chain.p_invalid.last().unwrap() - pair.p_invalid.last().unwrap()).abs() < 1e-12);
}

#[test]
fn pair_anneal_is_symmetric_and_converged() {
    let s = setup();
    let coarse = run_two_qubit(&s, 15.0, 200).unwrap().anneal;
    let fine = run_two_qubit(&s, 15.0, 2000).unwrap().anneal;
    let v = &coarse.final_valid;
    assert!((v[0b01] - v[0b10]).abs() < 1e-9);
    assert!((v[0b00] - v[0b11]).abs() < 1e-9);
    for (a, b) in coarse.final_valid.iter().zip(&fine.final_valid) {
        assert!((a - b).abs() < 1e-3);
    }
}

#[test]
fn stack_biases_alternate() {
    let s = setup();
    let points = stack_3d_parameters(&s, StackShape::default(), 5).unwrap();
    for p in &points {
        assert!(p.h_middle.abs() <= 1e-9 * p.h_top.abs().max(1.0));
        assert!((p.h_bottom + p.h_top).abs() <= 1e-9 * p.h_top.abs());
    }
    let end = points.last().unwrap();
    assert!(end.j_intra_layer > 0.0);
    assert!(end.h_top != 0.0);
}

#[test]
fn crossing_fields_fall_with_rotational_constant() {
    let spec = ScanSpec {
        values: vec![0.2, 0.22, 0.25, 0.3],
        ..ScanSpec::default_for(SweptConstant::RotationalConstant)
    };
    let rows = scan_constant(&spec).unwrap();
    let (found, missing) = rows.split_at(3);
    let perp: Vec<f64> = found.iter().map(|r| r.point.unwrap().e_perp).collect();
    let ez: Vec<f64> = found.iter().map(|r| r.point.unwrap().e_z).collect();
    assert!(perp.windows(2).all(|w| w[1] < w[0]), "{perp:?}");
    assert!(ez.windows(2).all(|w| w[1] < w[0]), "{ez:?}");
    assert!(missing[0].point.is_none() && missing[0].error.is_some());
}

#[test]
fn bias_is_odd_in_field_offset() {
    let s = setup();
    let f = FieldPoint::new(s.e_end, 600.0);
    let g = PairGeometry::new(500.0, 0.0).unwrap();
    let up = qubit_params(&s.model, &f, &f.with_offset(10.0), &g).unwrap();
    let down = qubit_params(&s.model, &f, &f.with_offset(-10.0), &g).unwrap();
    assert!(up.h_q != 0.0);
    assert!(rel_err(-down.h_q, up.h_q) < 1e-2);
    let swapped = qubit_params(&s.model, &f.with_offset(10.0), &f, &g).unwrap();
    assert!(rel_err(-swapped.h_q, up.h_q) < 1e-9);
}

#[test]
fn working_point_converged_in_rotational_cutoff() {
    let base = working_point(&MoleculeModel::new(MoleculeConstants::srf(), DEFAULT_N_MAX).unwrap(), 600.0).unwrap();
    let more = working_point(&MoleculeModel::new(MoleculeConstants::srf(), DEFAULT_N_MAX + 1).unwrap(), 600.0).unwrap();
    assert!(rel_err(more.e_cross, base.e_cross) < 1e-3);
    assert!(rel_err(more.e_perp, base.e_perp) < 1e-3);
    assert!(rel_err(more.e_z, base.e_z) < 1e-2);
}

#[test]
fn sri_working_point_sits_near_its_crossing() {
    let m = MoleculeModel::new(MoleculeConstants::sri(), DEFAULT_N_MAX).unwrap();
    let wp = working_point(&m, 100.0).unwrap();
    assert!(rel_err(wp.e_perp, 0.99) < 0.02, "{}", wp.e_perp);
    assert!(wp.e_z > wp.e_perp);
}

#[test]
fn unit_ratio_lies_between_working_fields() {
    let s = setup();
    let e1 = find_e_z(&s.model, 600.0, s.e_start, 1.0, s.e_end + 1.0).unwrap();
    assert!(e1 > s.e_start && e1 < s.e_end);
}

#[test]
fn head_to_head_matches_pair_sum() {
    let s = setup();
    let (r1, pitch) = (500.0, 1500.0);
    let config = LatticeConfig::head_to_head(r1, pitch, 600.0).unwrap();
    let ising = effective_ising(&s.model, &config, s.e_end).unwrap();
    let f = FieldPoint::new(s.e_end, 600.0);
    let jz = |r: f64| {
        pair_couplings(&s.model, &f, &PairGeometry::new(r, 0.0).unwrap(), Encoding::default())
            .unwrap()
            .j_z
    };
    let oracle = 2.0 * jz(pitch) - jz(pitch + r1) - jz(pitch - r1);
    assert!(rel_err(ising.j[(0, 1)], oracle) < 1e-6, "{} vs {oracle}", ising.j[(0, 1)]);
}

#[test]
fn crossed_qubits_decouple() {
    let s = setup();
    let config = LatticeConfig::cross(500.0, 1000.0, 600.0).unwrap();
    let ising = effective_ising(&s.model, &config, s.e_end).unwrap();
    let side = effective_ising(&s.model, &LatticeConfig::two_qubit(500.0, 1000.0, 600.0).unwrap(), s.e_end).unwrap();
    assert!(ising.j[(0, 1)].abs() < 1e-9 * side.j[(0, 1)].abs());
}
