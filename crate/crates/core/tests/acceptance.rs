//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion.
//!
//! A criterion that aborts always fails the run. Failed checks fail the run
//! only when `MOLQA_ACCEPTANCE_STRICT` is set; otherwise they are reported.

mod common;

use std::f64::consts::FRAC_PI_2;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use molqa::coupling::{pair_couplings, projected_block, qubit_params, Encoding, PairCouplings, PairGeometry};
use molqa::dynamics::{
    apply_propagator, build_sector_hamiltonian, propagate, propagate_with, AnnealResult, Method, PropagatorOptions,
    Schedule,
};
use molqa::experiments::{
    field_range_scan, log_grid, scaling_study, scan_constant, two_qubit_trace, working_point, Family, ScanSpec,
    Setup, SweptConstant, ANNEAL_TIMES_MS, STEPS_1D,
};
use molqa::lattice::{ising_from_tables, LatticeConfig, SpinConfig, TableBuilder};
use molqa::molecule::{find_avoided_crossing, FieldPoint, MoleculeConstants, MoleculeModel, DEFAULT_N_MAX};
use molqa::sector::SectorBasis;
use nalgebra::DMatrix;
use num_complex::Complex;

use common::{exact_3j, full_space_hamiltonian, quadratic_fit, random_tables, rel_err, total_sz};

struct Check {
    what: String,
    pass: bool,
}

#[derive(Default)]
struct Report {
    checks: Vec<Check>,
}

impl Report {
    fn check(&mut self, pass: bool, what: String) {
        self.checks.push(Check { what, pass });
    }

    fn near(&mut self, name: &str, got: f64, want: f64, rel_tol: f64) {
        let e = rel_err(got, want);
        self.check(e <= rel_tol, format!("{name} = {got:.6} vs {want} (rel {e:.2e}, tol {rel_tol})"));
    }

    fn below(&mut self, name: &str, got: f64, tol: f64) {
        self.check(got <= tol, format!("{name} = {got:.3e} (tol {tol:.0e})"));
    }
}

fn srf() -> MoleculeModel<f64> {
    MoleculeModel::new(MoleculeConstants::srf(), DEFAULT_N_MAX).unwrap()
}

fn non_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0])
}

fn monotone_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn monotone_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn crossing_anchors(r: &mut Report) {
    let sri = MoleculeModel::new(MoleculeConstants::sri(), DEFAULT_N_MAX).unwrap();
    let srf = srf();
    for (name, model, b, want) in [
        ("SrF 538 mT", &srf, 538.0, 1.18),
        ("SrF 600 mT", &srf, 600.0, 6.69),
        ("SrI 100 mT", &sri, 100.0, 0.99),
    ] {
        let (e, _) = find_avoided_crossing(model, b, (0.0, 40.0)).unwrap();
        r.near(&format!("E_x {name}"), e, want, 0.02);
    }
}

fn working_fields(r: &mut Report) {
    let wp = working_point(&srf(), 600.0).unwrap();
    r.near("E_perp", wp.e_perp, 6.695, 0.01);
    r.near("E_z", wp.e_z, 7.289, 0.01);
}

fn coupling_anchors(r: &mut Report) {
    let setup = Setup::srf().unwrap();
    let m = &setup.model;
    let at = |e: f64, rn: f64, th: f64| {
        pair_couplings(m, &FieldPoint::new(e, 600.0), &PairGeometry::new(rn, th).unwrap(), Encoding::default())
            .unwrap()
    };
    r.near("J_perp(0, 500 nm, E_perp)", at(setup.e_start, 500.0, 0.0).j_perp, -1034.3, 0.05);
    r.near("J_perp(pi/2, 1000 nm, E_perp)", at(setup.e_start, 1000.0, FRAC_PI_2).j_perp, 64.6, 0.05);
    r.near("J_z(0, 500 nm, E_z)", at(setup.e_end, 500.0, 0.0).j_z, -2200.0, 0.05);
    let end = *two_qubit_trace(&setup, 2).unwrap().last().unwrap();
    r.near("J_ab(E_z)", end.j_ab, 196.6, 0.05);
    r.near("Delta(E_z)", end.delta_a, -22.0, 0.20);
}

fn coupling_range(r: &mut Report) {
    let b: Vec<f64> = (0..=8).map(|i| 540.0 + 10.0 * i as f64).collect();
    let rows = field_range_scan(&srf(), &b, 1000.0).unwrap();
    let first = rows.first().unwrap();
    let last = rows.last().unwrap();
    r.near("|J(1000 nm)| at 540 mT", first.j_z.abs(), 300.0, 0.20);
    r.near("|J(1000 nm)| at 620 mT", last.j_z.abs(), 2500.0, 0.20);
    let lo = rows.iter().map(|x| x.point.e_z).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|x| x.point.e_z).fold(f64::NEG_INFINITY, f64::max);
    r.check(
        lo >= 1.6 * 0.9 && hi <= 8.5 * 1.1,
        format!("E_z window [{lo:.3}, {hi:.3}] inside [1.44, 9.35] kV/cm"),
    );
}

fn bias_scale(r: &mut Report) {
    let setup = Setup::srf().unwrap();
    let f = FieldPoint::new(setup.e_end, 600.0);
    let g = PairGeometry::new(500.0, 0.0).unwrap();
    let q = qubit_params(&setup.model, &f, &f.with_offset(10.0), &g).unwrap();
    let j_ab = two_qubit_trace(&setup, 2).unwrap()[1].j_ab;
    let ratio = q.h_q.abs() / j_ab.abs();
    r.check(
        (0.5..=2.0).contains(&ratio),
        format!("|h_q| = {:.1} Hz, J_ab = {j_ab:.1} Hz, ratio {ratio:.1} (want 0.5..2)", q.h_q.abs()),
    );
}

fn exact_properties(r: &mut Report) {
    let m = srf();
    let mut asym: f64 = 0.0;
    for e in [0.0, 1.3, 6.7, 20.0] {
        let h = m.hamiltonian(&FieldPoint::new(e, 600.0));
        asym = asym.max((&h - h.transpose()).amax());
    }
    let tables = random_tables(8, 7);
    let basis = SectorBasis::new(8, 4, 1 << 20).unwrap();
    let hs = build_sector_hamiltonian(&tables, &basis).unwrap().to_dense();
    asym = asym.max((&hs - hs.transpose()).amax());
    r.below("max |H - H^T| (Hz)", asym, 1e-9);

    let full = full_space_hamiltonian(&tables);
    let sz = total_sz(8);
    r.below("||[H, Sz]||", (&full * &sz - &sz * &full).amax(), 1e-8);
    let block = DMatrix::from_fn(basis.len(), basis.len(), |i, j| {
        full[(basis.unrank(i) as usize, basis.unrank(j) as usize)]
    });
    r.below("sector block vs full space", (&block - &hs).amax(), 1e-8);
    let eig = full.clone().symmetric_eigen();
    let start = basis.unrank(17) as usize;
    let tau = 2.0 * std::f64::consts::PI * 3e-3;
    let mut leak = 0.0;
    for row in 0..1usize << 8 {
        let mut amp = Complex::new(0.0, 0.0);
        for k in 0..eig.eigenvalues.len() {
            let ph = Complex::from_polar(1.0, -tau * eig.eigenvalues[k]);
            amp += ph * eig.eigenvectors[(row, k)] * eig.eigenvectors[(start, k)];
        }
        if row.count_ones() != 4 {
            leak += amp.norm_sqr();
        }
    }
    r.below("weight leaving the Sz sector", leak, 1e-8);

    let setup = Setup::srf().unwrap();
    let chain = LatticeConfig::chain_1d_af(6, 500.0, 1000.0, 600.0).unwrap();
    let run = propagate(&setup.model, &chain, &setup.schedule(15.0, STEPS_1D).unwrap(), &setup.options).unwrap();
    r.below("|norm - 1| after 6-qubit anneal", (run.final_state.norm() - 1.0).abs(), 1e-8);

    let f = FieldPoint::new(6.9, 600.0);
    let pc = |rn: f64, th: f64| {
        pair_couplings(&m, &f, &PairGeometry::new(rn, th).unwrap(), Encoding::default()).unwrap()
    };
    let (a, b) = (pc(450.0, 0.3), pc(900.0, 0.3));
    let cube = [a.j_perp / b.j_perp, a.j_z / b.j_z, a.w / b.w, a.k / b.k];
    r.below("1/R^3 scaling", cube.iter().map(|x| rel_err(*x, 8.0)).fold(0.0, f64::max), 1e-12);
    let (z, p) = (pc(700.0, 0.0), pc(700.0, FRAC_PI_2));
    r.below("theta 0 vs pi/2 factor -2", rel_err(z.j_perp / p.j_perp, -2.0).max(rel_err(z.j_z / p.j_z, -2.0)), 1e-12);

    let labels = m.labels(600.0).unwrap();
    let d1 = m.dressed_pair(&f, &labels, Encoding::default()).unwrap();
    let d2 = m.dressed_pair(&f.with_offset(250.0), &labels, Encoding::default()).unwrap();
    let blk = projected_block(&d1, &d2, 1e-9);
    let back = PairCouplings::from_block(&blk).reconstruct();
    let mut recon: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            recon = recon.max((back[i][j] - blk[i][j]).abs());
        }
    }
    r.below("XXZ reconstruction of the projected block (Hz)", recon, 1e-10);

    let mut dev: f64 = 0.0;
    for a in 0..=6i64 {
        for b in 0..=6 {
            for c in 0..=6 {
                for x in -a..=a {
                    for y in -b..=b {
                        let z: i64 = -x - y;
                        if z.abs() > c {
                            continue;
                        }
                        let got = molqa::wigner::wigner_3j::<f64>(
                            molqa::wigner::HalfInt::from_twice(a as i32),
                            molqa::wigner::HalfInt::from_twice(b as i32),
                            molqa::wigner::HalfInt::from_twice(c as i32),
                            molqa::wigner::HalfInt::from_twice(x as i32),
                            molqa::wigner::HalfInt::from_twice(y as i32),
                            molqa::wigner::HalfInt::from_twice(z as i32),
                        );
                        dev = dev.max((got - exact_3j([a, b, c], [x, y, z])).abs());
                    }
                }
            }
        }
    }
    r.below("3j vs exact rational oracle", dev, 1e-12);

    let mut exact = true;
    for n in 1..=16usize {
        for k in 0..=n {
            let count = (0u32..1 << n).filter(|v| v.count_ones() as usize == k).count();
            exact &= SectorBasis::new(n, k, 1 << 20).unwrap().len() == count;
        }
    }
    r.check(exact, "sector dimensions equal popcount enumeration for n <= 16".into());
}

/// Ground set by direct enumeration of the Ising energy.
fn enumerate_ground(ising: &molqa::lattice::IsingModel<f64>) -> Vec<u64> {
    let n = ising.h.len();
    let energy = |bits: u64| {
        let s = |a: usize| if bits >> a & 1 == 0 { 0.5 } else { -0.5 };
        let mut e = 0.0;
        for a in 0..n {
            e += ising.h[a] * s(a);
            for b in a + 1..n {
                e += ising.j[(a, b)] * s(a) * s(b);
            }
        }
        e
    };
    let all: Vec<(u64, f64)> = (0..1u64 << n).map(|b| (b, energy(b))).collect();
    let min = all.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let scale = all.iter().map(|x| x.1.abs()).fold(0.0, f64::max);
    all.iter().filter(|x| x.1 - min <= 1e-9 * scale).map(|x| x.0).collect()
}

fn dynamics_trends(r: &mut Report) {
    let setup = Setup::srf().unwrap();
    let chain = LatticeConfig::chain_1d_af(6, setup.r1_nm, setup.r2_nm, setup.b_mt).unwrap();
    let runs: Vec<AnnealResult<f64>> = ANNEAL_TIMES_MS
        .iter()
        .map(|&t| propagate(&setup.model, &chain, &setup.schedule(t, STEPS_1D).unwrap(), &setup.options).unwrap())
        .collect();
    let ps: Vec<f64> = runs.iter().map(|x| x.final_p_solution()).collect();
    let pi: Vec<f64> = runs.iter().map(|x| x.final_p_invalid()).collect();
    r.check(non_decreasing(&ps), format!("p_solution non-decreasing in T: {ps:.4?}"));
    r.check(non_decreasing(&pi), format!("p_invalid non-decreasing in T: {pi:.4?}"));

    let r15 = &runs[2];
    let best_other = r15
        .final_valid
        .iter()
        .enumerate()
        .filter(|(b, _)| !r15.ground.contains(&SpinConfig::new(*b as u64, 6)))
        .map(|(_, p)| *p)
        .fold(0.0, f64::max);
    r.check(
        r15.final_p_solution() > best_other,
        format!("15 ms: solution mass {:.4} > largest other outcome {best_other:.4}", r15.final_p_solution()),
    );
    let builder = TableBuilder::new(&setup.model, &chain).unwrap();
    let ising = ising_from_tables(&chain, &builder.tables(setup.e_end).unwrap());
    let mut oracle = enumerate_ground(&ising);
    let mut ours: Vec<u64> = r15.ground.configs.iter().map(|c| c.bits).collect();
    oracle.sort();
    ours.sort();
    let neel: Vec<u64> = vec![0b010101, 0b101010];
    r.check(
        ours == oracle && ours == neel,
        format!("solution set {:?} = enumeration {:?} = Neel pair", ours, oracle),
    );
}

fn scaling(r: &mut Report) {
    let setup = Setup::srf().unwrap();
    let times = ANNEAL_TIMES_MS;
    let fm = scaling_study(&setup, Family::Fm1d, &Family::Fm1d.default_sizes(false), &times, STEPS_1D).unwrap();
    let worst = fm.iter().map(|x| x.p_invalid).fold(0.0, f64::max);
    r.check(worst < 0.05, format!("1D-FM max p_invalid {worst:.4} < 0.05"));
    let one = &fm[0];
    r.check(
        one.p_invalid.abs() < 1e-12 && (one.p_solution - 1.0).abs() < 1e-9,
        format!("1 qubit: p_solution {:.6}, p_invalid {:.1e}", one.p_solution, one.p_invalid),
    );
    for family in [Family::Af1d, Family::Af2d] {
        let rows = scaling_study(&setup, family, &family.default_sizes(false), &times, family.default_steps()).unwrap();
        let pi: Vec<f64> = rows.iter().map(|x| x.p_invalid).collect();
        r.check(non_decreasing(&pi), format!("{} p_invalid grows with size: {pi:.4?}", family.name()));
        let last = rows.last().unwrap();
        let ratio = last.p_solution.max(last.p_invalid) / last.p_solution.min(last.p_invalid);
        r.check(
            ratio <= 3.0,
            format!(
                "{} {}x{}: p_solution {:.4}, p_invalid {:.4}, ratio {ratio:.2} <= 3",
                family.name(),
                last.rows,
                last.cols,
                last.p_solution,
                last.p_invalid
            ),
        );
    }
}

fn integrator(r: &mut Report) {
    let setup = Setup::srf().unwrap();
    let mut worst: f64 = 0.0;
    for (config, t) in [
        (LatticeConfig::two_qubit(500.0, 1000.0, 600.0).unwrap(), 15.0),
        (LatticeConfig::chain_1d_af(6, 500.0, 1000.0, 600.0).unwrap(), 15.0),
    ] {
        let a = propagate(&setup.model, &config, &setup.schedule(t, STEPS_1D).unwrap(), &setup.options).unwrap();
        let b = propagate(&setup.model, &config, &setup.schedule(t, 2 * STEPS_1D).unwrap(), &setup.options).unwrap();
        for k in 0..=STEPS_1D {
            for (x, y) in [
                (a.p_solution[k], b.p_solution[2 * k]),
                (a.p_invalid[k], b.p_invalid[2 * k]),
                (a.p_valid_other[k], b.p_valid_other[2 * k]),
            ] {
                worst = worst.max((x - y).abs());
            }
        }
        for (x, y) in a.final_valid.iter().zip(&b.final_valid) {
            worst = worst.max((x - y).abs());
        }
    }
    r.below("max probability change on doubling n_steps", worst, 1e-3);

    let tables = random_tables(14, 11);
    let basis = SectorBasis::new(14, 5, 1 << 20).unwrap();
    let h = build_sector_hamiltonian(&tables, &basis).unwrap();
    let opts = PropagatorOptions {
        dense_max_dim: 4096,
        ..PropagatorOptions::default()
    };
    let n = basis.len();
    let mut dense: Vec<Complex<f64>> = (0..n)
        .map(|i| Complex::new(((i * 7) % 13) as f64 - 6.0, ((i * 5) % 11) as f64 - 5.0))
        .collect();
    let norm = dense.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    dense.iter_mut().for_each(|c| *c /= norm);
    let mut krylov = dense.clone();
    for _ in 0..2 {
        apply_propagator(&h, &mut dense, 2e-4, Method::Dense, &opts).unwrap();
        apply_propagator(&h, &mut krylov, 2e-4, Method::Krylov, &opts).unwrap();
    }
    let diff = dense.iter().zip(&krylov).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    r.below(&format!("Krylov vs dense amplitudes, dim {n}"), diff, 1e-8);

    // full anneal on the same sector through both paths
    let config = LatticeConfig::chain_1d_af(5, 500.0, 1000.0, 600.0).unwrap();
    let builder = TableBuilder::new(&setup.model, &config).unwrap();
    let schedule = Schedule::new(setup.e_start, setup.e_end, 5.0, 20).unwrap();
    let mut o = setup.options;
    o.propagator.dense_max_dim = 0;
    let kr = propagate_with(&config, |e| builder.tables(e), &schedule, &o).unwrap();
    o.propagator.dense_max_dim = 4096;
    let de = propagate_with(&config, |e| builder.tables(e), &schedule, &o).unwrap();
    let pd = kr.final_valid.iter().zip(&de.final_valid).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    r.below("Krylov vs dense anneal probabilities, 5-qubit chain", pd, 1e-8);
}

fn molecular_scans(r: &mut Report) {
    let spec = ScanSpec::default_for(SweptConstant::Dipole);
    let rows = scan_constant(&spec).unwrap();
    let ok = rows.iter().all(|x| x.point.is_some());
    r.check(ok, format!("dipole sweep: crossing found at all {} points", rows.len()));
    let d: Vec<f64> = rows.iter().map(|x| x.value).collect();
    let ep: Vec<f64> = rows.iter().filter_map(|x| x.point.map(|p| p.e_perp)).collect();
    let ez: Vec<f64> = rows.iter().filter_map(|x| x.point.map(|p| p.e_z)).collect();
    r.check(monotone_decreasing(&ep), "dipole sweep: E_perp decreasing".into());
    r.check(monotone_decreasing(&ez), "dipole sweep: E_z decreasing".into());
    for (name, y) in [
        ("J_perp@E_perp", rows.iter().map(|x| x.j_perp_at_e_perp).collect::<Vec<_>>()),
        ("J_z@E_z", rows.iter().map(|x| x.j_z_at_e_z).collect()),
    ] {
        let (_, r2) = quadratic_fit(&d, &y);
        r.check(r2 >= 0.99, format!("dipole sweep: {name} = c d^2 fit R^2 = {r2:.6}"));
    }

    let base = working_point(&srf(), 600.0).unwrap();
    let spec = ScanSpec::default_for(SweptConstant::SpinRotation);
    let rows = scan_constant(&spec).unwrap();
    let points: Vec<_> = rows.iter().filter_map(|x| x.point).collect();
    r.check(points.len() == rows.len(), format!("gamma sweep: crossing found at all {} points", rows.len()));
    let dev = points.iter().map(|p| rel_err(p.e_perp, base.e_perp)).fold(0.0, f64::max);
    r.check(
        dev <= 0.01,
        format!("gamma sweep: max E_perp deviation {:.2}% from {:.4} (tol 1%)", 100.0 * dev, base.e_perp),
    );
    let ez: Vec<f64> = points.iter().map(|p| p.e_z).collect();
    r.check(
        monotone_increasing(&ez),
        format!("gamma sweep: E_z increasing {:.3} -> {:.3}", ez[0], ez[ez.len() - 1]),
    );
    let _ = log_grid;
}

type Criterion = (u32, &'static str, fn(&mut Report));

const CRITERIA: [Criterion; 10] = [
    (1, "avoided-crossing anchors", crossing_anchors),
    (2, "working fields", working_fields),
    (3, "coupling anchors", coupling_anchors),
    (4, "coupling range across B", coupling_range),
    (5, "bias scale", bias_scale),
    (6, "exact properties", exact_properties),
    (7, "dynamics trends", dynamics_trends),
    (8, "scaling study", scaling),
    (9, "integrator oracle", integrator),
    (10, "molecular-constant sweeps", molecular_scans),
];

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let selected: Vec<&Criterion> = CRITERIA
        .iter()
        .filter(|(id, name, _)| {
            filter.is_empty() || filter.iter().any(|f| *f == id.to_string() || name.contains(f.as_str()))
        })
        .collect();
    panic::set_hook(Box::new(|_| {}));
    let outcomes: Vec<(Report, Option<String>, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = selected
            .iter()
            .map(|(_, _, f)| {
                s.spawn(move || {
                    let start = Instant::now();
                    let mut report = Report::default();
                    let err = panic::catch_unwind(AssertUnwindSafe(|| f(&mut report))).err().map(|e| {
                        e.downcast_ref::<String>()
                            .cloned()
                            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                            .unwrap_or_else(|| "panic".into())
                    });
                    (report, err, start.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let mut failed = 0;
    let mut aborted = 0;
    for ((id, name, _), (report, err, secs)) in selected.iter().zip(&outcomes) {
        let pass = err.is_none() && report.checks.iter().all(|c| c.pass);
        if !pass {
            failed += 1;
        }
        println!("{} criterion {id}: {name} ({secs:.1} s)", if pass { "PASS" } else { "FAIL" });
        for c in &report.checks {
            println!("    [{}] {}", if c.pass { "ok" } else { "FAILED" }, c.what);
        }
        if let Some(e) = err {
            aborted += 1;
            println!("    [FAILED] aborted: {e}");
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed of {}",
        selected.len() - failed,
        selected.len()
    );
    let strict = std::env::var_os("MOLQA_ACCEPTANCE_STRICT").is_some();
    if aborted == 0 && (failed == 0 || !strict) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
