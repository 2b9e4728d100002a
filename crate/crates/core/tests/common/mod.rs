//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use molqa::lattice::CouplingTables;
use nalgebra::DMatrix;
use num_rational::Ratio;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Q = Ratio<i128>;

fn fact(n: i64) -> i128 {
    (1..=n as i128).product()
}

/// 3j symbol from exact rational arithmetic; arguments are twice the
/// angular momenta.
pub fn exact_3j(tj: [i64; 3], tm: [i64; 3]) -> f64 {
    let [a, b, c] = tj;
    let [x, y, z] = tm;
    if x + y + z != 0 || (a + b + c) % 2 != 0 {
        return 0.0;
    }
    if c > a + b || c < (a - b).abs() {
        return 0.0;
    }
    for k in 0..3 {
        if tm[k].abs() > tj[k] || (tj[k] + tm[k]) % 2 != 0 {
            return 0.0;
        }
    }
    let h = |v: i64| v / 2;
    let tri = Q::new(
        fact(h(a + b - c)) * fact(h(a - b + c)) * fact(h(-a + b + c)),
        fact(h(a + b + c) + 1),
    );
    let proj = Q::from_integer(
        fact(h(a + x)) * fact(h(a - x)) * fact(h(b + y)) * fact(h(b - y)) * fact(h(c + z)) * fact(h(c - z)),
    );
    let mut sum = Q::from_integer(0);
    for t in 0..=h(a + b + c) {
        let d = [
            t,
            h(c - b + x) + t,
            h(c - a - y) + t,
            h(a + b - c) - t,
            h(a - x) - t,
            h(b + y) - t,
        ];
        if d.iter().any(|&v| v < 0) {
            continue;
        }
        let den: i128 = d.iter().map(|&v| fact(v)).product();
        let term = Q::new(1, den);
        sum = if t % 2 == 0 { sum + term } else { sum - term };
    }
    let sq = tri * proj * sum * sum;
    let phase = if h(a - b - z).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let sign = if sum < Q::from_integer(0) { -phase } else { phase };
    sign * (*sq.numer() as f64 / *sq.denom() as f64).sqrt()
}

/// Full 2ⁿ-dimensional XXZ Hamiltonian built from Kronecker products of
/// spin-½ operators. Bit i of a basis index is molecule i (set = ↑).
pub fn full_space_hamiltonian(t: &CouplingTables<f64>) -> DMatrix<f64> {
    let n = t.n();
    let sz = DMatrix::from_row_slice(2, 2, &[-0.5, 0.0, 0.0, 0.5]);
    let sp = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]);
    let sm = sp.transpose();
    let id = DMatrix::<f64>::identity(2, 2);
    let site = |op: &DMatrix<f64>, i: usize| -> DMatrix<f64> {
        let mut m = DMatrix::<f64>::identity(1, 1);
        for k in (0..n).rev() {
            m = m.kronecker(if k == i { op } else { &id });
        }
        m
    };
    let dim = 1 << n;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let z: Vec<DMatrix<f64>> = (0..n).map(|i| site(&sz, i)).collect();
    let p: Vec<DMatrix<f64>> = (0..n).map(|i| site(&sp, i)).collect();
    let m: Vec<DMatrix<f64>> = (0..n).map(|i| site(&sm, i)).collect();
    for i in 0..n {
        h += &z[i] * t.h[i];
        for j in i + 1..n {
            h += &z[i] * &z[j] * t.j_z[(i, j)];
            h += (&p[i] * &m[j] + &m[i] * &p[j]) * (0.5 * t.j_perp[(i, j)]);
        }
    }
    h
}

/// Total Sz in the full space.
pub fn total_sz(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(1 << n, 1 << n, |r, c| {
        if r == c {
            r.count_ones() as f64 - n as f64 / 2.0
        } else {
            0.0
        }
    })
}

/// Seeded coupling tables with Hz-scale entries.
pub fn random_tables(n: usize, seed: u64) -> CouplingTables<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut t = CouplingTables::zeros(n);
    for i in 0..n {
        t.h[i] = rng.gen_range(-300.0..300.0);
        for j in i + 1..n {
            let jp = rng.gen_range(-1000.0..1000.0);
            let jz = rng.gen_range(-2000.0..2000.0);
            t.j_perp[(i, j)] = jp;
            t.j_perp[(j, i)] = jp;
            t.j_z[(i, j)] = jz;
            t.j_z[(j, i)] = jz;
        }
    }
    t
}

/// Least-squares fit y = c·x² through the origin; returns (c, R²).
pub fn quadratic_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let sxx: f64 = x.iter().map(|v| v.powi(4)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * a * b).sum();
    let c = sxy / sxx;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - c * a * a).powi(2)).sum();
    (c, 1.0 - ss_res / ss_tot)
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}
