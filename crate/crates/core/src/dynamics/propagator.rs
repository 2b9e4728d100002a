//! Sector Hamiltonian and the per-step propagator exp(−i 2π H Δt).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::CouplingTables;
use crate::scalar::{lit, to_f64, Real};
use crate::sector::SectorBasis;

/// Real symmetric sector Hamiltonian in Hz, diagonal plus CSR off-diagonal.
#[derive(Clone, Debug)]
pub struct SectorHamiltonian<T> {
    diag: Vec<T>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<T>,
}

/// Sz_i Sz_j + h_i Sz_i energies plus J⊥/2 hops between strings that
/// differ by exchanging one ↑ and one ↓.
pub fn build_sector_hamiltonian<T: Real>(
    tables: &CouplingTables<T>,
    basis: &SectorBasis,
) -> Result<SectorHamiltonian<T>> {
    let n = basis.n();
    if tables.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: tables.n(),
        });
    }
    let half: T = lit(0.5);
    let quarter: T = lit(0.25);
    let rows: Vec<(T, Vec<(u32, T)>)> = basis
        .states()
        .par_iter()
        .map(|&bits| {
            let up = |i: usize| bits >> i & 1 == 1;
            let mut d = T::zero();
            let mut hops = Vec::new();
            for i in 0..n {
                d += if up(i) { tables.h[i] * half } else { -tables.h[i] * half };
                for j in i + 1..n {
                    let zz = if up(i) == up(j) { quarter } else { -quarter };
                    d += tables.j_z[(i, j)] * zz;
                    let jp = tables.j_perp[(i, j)];
                    if up(i) != up(j) && jp != T::zero() {
                        let target = bits ^ (1 << i) ^ (1 << j);
                        let col = basis.rank(target).expect("hop stays in the sector");
                        hops.push((col as u32, jp * half));
                    }
                }
            }
            hops.sort_by_key(|h| h.0);
            (d, hops)
        })
        .collect();
    let mut h = SectorHamiltonian {
        diag: Vec::with_capacity(rows.len()),
        row_ptr: vec![0],
        cols: Vec::new(),
        vals: Vec::new(),
    };
    for (d, hops) in rows {
        h.diag.push(d);
        for (c, v) in hops {
            h.cols.push(c);
            h.vals.push(v);
        }
        h.row_ptr.push(h.cols.len());
    }
    Ok(h)
}

impl<T: Real> SectorHamiltonian<T> {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn nnz_offdiag(&self) -> usize {
        self.vals.len()
    }

    pub fn diagonal(&self) -> &[T] {
        &self.diag
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for r in 0..n {
            m[(r, r)] = self.diag[r];
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k] as usize)] = self.vals[k];
            }
        }
        m
    }

    /// y = (H − shift) x
    pub fn apply(&self, x: &[Complex<T>], shift: T, y: &mut [Complex<T>]) {
        y.par_iter_mut().enumerate().for_each(|(r, out)| {
            let mut acc = x[r] * (self.diag[r] - shift);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += x[self.cols[k] as usize] * self.vals[k];
            }
            *out = acc;
        });
    }

    fn mean_diagonal(&self) -> T {
        let mut s = T::zero();
        for &d in &self.diag {
            s += d;
        }
        s / lit(self.dim().max(1) as f64)
    }
}

/// Numerical settings of the propagator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagatorOptions {
    /// largest sector handled by full diagonalization
    pub dense_max_dim: usize,
    /// local error bound per Krylov step
    pub krylov_tol: f64,
    pub krylov_max_dim: usize,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        PropagatorOptions {
            dense_max_dim: 256,
            krylov_tol: 1e-9,
            krylov_max_dim: 40,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Dense,
    Krylov,
}

pub fn choose_method(dim: usize, options: &PropagatorOptions) -> Method {
    if dim <= options.dense_max_dim {
        Method::Dense
    } else {
        Method::Krylov
    }
}

fn cexp<T: Real>(phase: T) -> Complex<T> {
    Complex::new(phase.cos(), phase.sin())
}

/// ψ ← exp(−i 2π H dt_s) ψ with `dt_s` in seconds (may be negative).
pub fn apply_propagator<T: Real>(
    h: &SectorHamiltonian<T>,
    psi: &mut [Complex<T>],
    dt_s: T,
    method: Method,
    options: &PropagatorOptions,
) -> Result<()> {
    if psi.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: psi.len(),
        });
    }
    let tau = T::two_pi() * dt_s;
    // a constant shift only changes the global phase
    let shift = h.mean_diagonal();
    match method {
        Method::Dense => dense_step(h, psi, tau, shift),
        Method::Krylov => krylov_step(h, psi, tau, shift, options, 0),
    }
}

fn dense_step<T: Real>(h: &SectorHamiltonian<T>, psi: &mut [Complex<T>], tau: T, shift: T) -> Result<()> {
    let n = h.dim();
    let mut m = h.to_dense();
    for i in 0..n {
        m[(i, i)] -= shift;
    }
    let eig = SymmetricEigen::new(m);
    let v = &eig.eigenvectors;
    let re = DVector::from_iterator(n, psi.iter().map(|c| c.re));
    let im = DVector::from_iterator(n, psi.iter().map(|c| c.im));
    let pr = v.tr_mul(&re);
    let pi = v.tr_mul(&im);
    let mut qr = DVector::zeros(n);
    let mut qi = DVector::zeros(n);
    for k in 0..n {
        let c = Complex::new(pr[k], pi[k]) * cexp(-tau * eig.eigenvalues[k]);
        qr[k] = c.re;
        qi[k] = c.im;
    }
    let out_r = v * qr;
    let out_i = v * qi;
    for k in 0..n {
        psi[k] = Complex::new(out_r[k], out_i[k]);
    }
    Ok(())
}

fn dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    let mut s = Complex::new(T::zero(), T::zero());
    for (x, y) in a.iter().zip(b) {
        s += x.conj() * y;
    }
    s
}

fn norm<T: Real>(a: &[Complex<T>]) -> T {
    let mut s = T::zero();
    for x in a {
        s += x.norm_sqr();
    }
    s.sqrt()
}

/// exp(−iτT) e₁ for the symmetric tridiagonal T.
fn tridiagonal_exp<T: Real>(alpha: &[T], beta: &[T], tau: T) -> Vec<Complex<T>> {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[j]
        } else if j + 1 == i {
            beta[i]
        } else {
            T::zero()
        }
    });
    let eig = SymmetricEigen::new(t);
    let q = &eig.eigenvectors;
    (0..m)
        .map(|i| {
            let mut s = Complex::new(T::zero(), T::zero());
            for k in 0..m {
                s += cexp(-tau * eig.eigenvalues[k]) * (q[(i, k)] * q[(0, k)]);
            }
            s
        })
        .collect()
}

const MAX_SUBDIVISION: u32 = 24;

fn krylov_step<T: Real>(
    h: &SectorHamiltonian<T>,
    psi: &mut [Complex<T>],
    tau: T,
    shift: T,
    options: &PropagatorOptions,
    depth: u32,
) -> Result<()> {
    let n = h.dim();
    let beta0 = norm(psi);
    if beta0 == T::zero() {
        return Ok(());
    }
    let tol: T = lit(options.krylov_tol);
    let m_max = options.krylov_max_dim.max(2).min(n);
    let mut basis: Vec<Vec<Complex<T>>> = vec![psi.iter().map(|c| c / beta0).collect()];
    // beta[j] couples v_{j-1} and v_j; beta[0] unused
    let mut alpha: Vec<T> = Vec::new();
    let mut beta: Vec<T> = vec![T::zero()];
    let mut w = vec![Complex::new(T::zero(), T::zero()); n];
    let mut coeffs = None;
    for j in 0..m_max {
        h.apply(&basis[j], shift, &mut w);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= vk * c;
                }
            }
        }
        let b = norm(&w);
        let c = tridiagonal_exp(&alpha, &beta, tau);
        let breakdown = b <= lit::<T>(1e-13) * (alpha.iter().fold(T::zero(), |m, x| m.max(x.abs())) + T::one());
        let err = b * c[j].norm_sqr().sqrt() * beta0;
        if breakdown || err <= tol || j + 1 == n {
            coeffs = Some(c);
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    match coeffs {
        Some(c) => {
            for (k, out) in psi.iter_mut().enumerate() {
                let mut s = Complex::new(T::zero(), T::zero());
                for (j, v) in basis.iter().enumerate().take(c.len()) {
                    s += v[k] * c[j];
                }
                *out = s * beta0;
            }
            Ok(())
        }
        None => {
            if depth >= MAX_SUBDIVISION {
                return Err(Error::Convergence(format!(
                    "local error above {:.1e} after {} subdivisions",
                    options.krylov_tol, depth
                )));
            }
            let half = tau * lit(0.5);
            krylov_step(h, psi, half, shift, options, depth + 1)?;
            krylov_step(h, psi, half, shift, options, depth + 1)
        }
    }
}

/// Norm of an amplitude vector.
pub fn state_norm<T: Real>(psi: &[Complex<T>]) -> T {
    norm(psi)
}

/// |<a|b>|².
pub fn fidelity<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    dot(a, b).norm_sqr()
}

pub(crate) fn drift<T: Real>(psi: &[Complex<T>]) -> f64 {
    (to_f64(norm(psi)) - 1.0).abs()
}
