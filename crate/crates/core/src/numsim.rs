//! Dense numerical verification on small spin baths.
//!
//! The qubit is the first tensor factor: a joint index is `s * d_B + b` with
//! `s ∈ {0, 1}` the system state and `b` the bath state.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::pauli::{PauliAxis, PhasedPauli};
use crate::sequence::PulseSequence;
use crate::symbolic::{self, BathSymbol, SbOperator};

pub type CMatrix = DMatrix<Complex64>;

/// Distances at or below this value are treated as numerical noise by the slope fit.
pub const DISTANCE_FLOOR: f64 = 1e-12;

/// Largest supported bath.
pub const MAX_BATH_SPINS: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("bath size {0} outside supported range 1..={MAX_BATH_SPINS}")]
    DimensionLimit(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("Hermitian eigendecomposition did not converge")]
    EigenFailure,
    #[error("matrix dimension {0} is not divisible by the 2-dimensional system factor")]
    OddDimension(usize),
    #[error("pulse interval must be positive and finite, got {0}")]
    BadInterval(f64),
    #[error("grid needs at least 4 points, got {0}")]
    GridTooShort(usize),
    #[error("grid must be strictly increasing and positive")]
    GridNotIncreasing,
    #[error("only {usable} grid points have D above the {floor:e} floor; need at least 3")]
    TooFewPoints { usable: usize, floor: f64 },
    #[error("‖H0‖·τ_c = {0:.3} ≥ π; the principal logarithm is not guaranteed")]
    BranchCut(f64),
}

pub type Result<T> = std::result::Result<T, SimError>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// 2×2 matrix of a bare Pauli operator.
pub fn pauli_matrix(axis: PauliAxis) -> CMatrix {
    let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
    let v = match axis {
        PauliAxis::I => [o, z, z, o],
        PauliAxis::X => [z, o, o, z],
        PauliAxis::Y => [z, c(0.0, -1.0), c(0.0, 1.0), z],
        PauliAxis::Z => [o, z, z, -o],
    };
    DMatrix::from_row_slice(2, 2, &v)
}

/// 2×2 matrix of a pulse, phase included.
pub fn pulse_matrix(p: PhasedPauli) -> CMatrix {
    let (re, im) = p.phase().as_pair();
    pauli_matrix(p.axis()) * c(re as f64, im as f64)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `‖U†U − 1‖_max`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let d = u.nrows();
    max_abs(&(u.adjoint() * u - CMatrix::identity(d, d)))
}

fn eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let eig = SymmetricEigen::try_new(hermitian_part(m), f64::EPSILON, 100_000).ok_or(SimError::EigenFailure)?;
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) || eig.eigenvectors.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(SimError::EigenFailure);
    }
    Ok((values, eig.eigenvectors))
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_norm(m: &CMatrix) -> Result<f64> {
    Ok(eigh(m)?.0.iter().fold(0.0, |a: f64, v| a.max(v.abs())))
}

/// Dense matrix of an `n`-qubit Pauli string `i^{|x∧z|} X^x Z^z`.
fn pauli_string(n: usize, xmask: usize, zmask: usize) -> CMatrix {
    let d = 1usize << n;
    let ny = (xmask & zmask).count_ones();
    let base = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)][(ny % 4) as usize];
    let mut m = CMatrix::zeros(d, d);
    for col in 0..d {
        let sign = if (col & zmask).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        m[(col ^ xmask, col)] = base * sign;
    }
    m
}

/// Qubit coupled to a few bath spins with seeded random couplings:
/// `H0 = Σ_α σ_α⊗B_α + 1⊗H_B`.
#[derive(Clone, Debug)]
pub struct SpinBathModel {
    n_bath: usize,
    j: f64,
    beta: f64,
    seed: u64,
    /// Indexed by [`BathSymbol::index`]: `H_B, B_x, B_y, B_z`.
    bath: [CMatrix; 4],
    h0: CMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

/// Random spin-bath model.
///
/// Each of `B_x, B_y, B_z, H_B` is a sum over all non-identity bath Pauli
/// strings with standard-normal coefficients. The three couplings share one
/// rescaling so that `max_α ‖B_α‖ = j`; `H_B` is rescaled to `‖H_B‖ = beta`.
pub fn build_model(n_bath: usize, j: f64, beta: f64, seed: u64) -> Result<SpinBathModel> {
    if !(1..=MAX_BATH_SPINS).contains(&n_bath) {
        return Err(SimError::DimensionLimit(n_bath));
    }
    if !(j.is_finite() && j >= 0.0) {
        return Err(SimError::InvalidParameter(format!("J must be finite and non-negative, got {j}")));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(SimError::InvalidParameter(format!("beta must be finite and non-negative, got {beta}")));
    }
    let d = 1usize << n_bath;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bath: [CMatrix; 4] = std::array::from_fn(|_| CMatrix::zeros(d, d));
    for xmask in 0..d {
        for zmask in 0..d {
            if xmask == 0 && zmask == 0 {
                continue;
            }
            let p = pauli_string(n_bath, xmask, zmask);
            for op in bath.iter_mut() {
                let g: f64 = StandardNormal.sample(&mut rng);
                *op += &p * c(g, 0.0);
            }
        }
    }
    for op in bath.iter_mut() {
        *op = hermitian_part(op);
    }
    let coupling_norm = bath[1..].iter().map(hermitian_norm).try_fold(0.0f64, |a, n| n.map(|n| a.max(n)))?;
    if coupling_norm > 0.0 {
        for op in bath[1..].iter_mut() {
            *op *= c(j / coupling_norm, 0.0);
        }
    }
    let hb_norm = hermitian_norm(&bath[0])?;
    if hb_norm > 0.0 {
        bath[0] *= c(beta / hb_norm, 0.0);
    }
    let h0 = assemble(&bath);
    let (eigenvalues, eigenvectors) = eigh(&h0)?;
    Ok(SpinBathModel { n_bath, j, beta, seed, bath, h0, eigenvalues, eigenvectors })
}

fn assemble(bath: &[CMatrix; 4]) -> CMatrix {
    PauliAxis::ALL
        .iter()
        .zip(bath)
        .map(|(&a, b)| kron(&pauli_matrix(a), b))
        .fold(None, |acc: Option<CMatrix>, m| Some(acc.map_or(m.clone(), |s| s + m)))
        .expect("four terms")
}

impl SpinBathModel {
    pub fn n_bath(&self) -> usize {
        self.n_bath
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bath_dim(&self) -> usize {
        1 << self.n_bath
    }

    pub fn dim(&self) -> usize {
        2 * self.bath_dim()
    }

    pub fn h0(&self) -> &CMatrix {
        &self.h0
    }

    /// Bath-space matrix substituted for a symbol (`B0 ↦ H_B`).
    pub fn bath_operator(&self, s: BathSymbol) -> &CMatrix {
        &self.bath[s.index()]
    }

    /// `‖H0 − Σ_α σ_α⊗B_α − 1⊗H_B‖_max`.
    pub fn reassembly_residual(&self) -> f64 {
        max_abs(&(&self.h0 - assemble(&self.bath)))
    }

    /// Spectral norm of `H0`.
    pub fn h0_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |a: f64, v| a.max(v.abs()))
    }
}

/// `exp(−i H0 τ)` from the cached spectral decomposition of `H0`.
pub fn free_propagator(model: &SpinBathModel, tau: f64) -> Result<CMatrix> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(SimError::BadInterval(tau));
    }
    let v = &model.eigenvectors;
    let mut scaled = v.clone();
    for (k, &lambda) in model.eigenvalues.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -lambda * tau);
        for z in scaled.column_mut(k).iter_mut() {
            *z *= phase;
        }
    }
    Ok(scaled * v.adjoint())
}

/// Left-multiplies `m` by `P ⊗ 1_B`.
pub fn apply_system_pulse(p: PhasedPauli, m: &CMatrix) -> CMatrix {
    let pm = pulse_matrix(p);
    let db = m.nrows() / 2;
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    for a in 0..2 {
        for b in 0..2 {
            let w = pm[(a, b)];
            if w == c(0.0, 0.0) {
                continue;
            }
            let src = m.rows(b * db, db) * w;
            let mut dst = out.rows_mut(a * db, db);
            dst += src;
        }
    }
    out
}

/// Evolution operator of a pulse train.
#[derive(Clone, Debug)]
pub struct Propagator {
    pub u: CMatrix,
    pub tau_d: f64,
    pub seq: PulseSequence,
}

/// `U = Π_{j=K..1} (P_j⊗1) exp(−i H0 τ_d)`: free evolution, then pulse `j`.
pub fn evolve(seq: &PulseSequence, model: &SpinBathModel, tau_d: f64) -> Result<Propagator> {
    let free = free_propagator(model, tau_d)?;
    let d = model.dim();
    let u = seq.pulses().iter().fold(CMatrix::identity(d, d), |u, &p| apply_system_pulse(p, &(&free * u)));
    Ok(Propagator { u, tau_d, seq: seq.clone() })
}

/// Pulse-free evolution for `intervals` steps of length `tau_d`.
pub fn evolve_free(model: &SpinBathModel, tau_d: f64, intervals: usize) -> Result<CMatrix> {
    let free = free_propagator(model, tau_d)?;
    let d = model.dim();
    Ok((0..intervals).fold(CMatrix::identity(d, d), |u, _| &free * u))
}

/// `Tr_S[U]`: sum of the two diagonal system blocks.
pub fn partial_trace_system(u: &CMatrix) -> Result<CMatrix> {
    let d = u.nrows();
    if !d.is_multiple_of(2) || u.ncols() != d {
        return Err(SimError::OddDimension(d));
    }
    let db = d / 2;
    Ok(u.view((0, 0), (db, db)) + u.view((db, db), (db, db)))
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    m.clone().singular_values().iter().sum()
}

/// `sqrt(1 − ‖Tr_S U‖_Tr / d_H)` evaluated literally. Loses all accuracy
/// below `D ≈ 1e−8`; see [`distance`].
pub fn distance_direct(u: &CMatrix) -> Result<f64> {
    let gamma = partial_trace_system(u)?;
    let x = 1.0 - trace_norm(&gamma) / u.nrows() as f64;
    Ok(x.max(0.0).sqrt().min(1.0))
}

/// Distance `D(U, 1_S) = sqrt(1 − ‖Γ‖_Tr / d_H)` with `Γ = Tr_S U`.
///
/// With `U` split into system blocks `U_ab`, unitarity gives
/// `4 − Γ†Γ = M := Δ†Δ + 2(U_10†U_10 + U_01†U_01)` where `Δ = U_00 − U_11`.
/// The singular values of `Γ` are `s_k = sqrt(4 − m_k)` for the eigenvalues
/// `m_k` of `M`, so `1 − s_k/2 = (m_k/4) / (1 + sqrt(1 − m_k/4))` is formed
/// without cancellation and `D` stays accurate down to roughly `1e−14`.
pub fn distance(u: &CMatrix) -> Result<f64> {
    let d = u.nrows();
    if !d.is_multiple_of(2) || u.ncols() != d {
        return Err(SimError::OddDimension(d));
    }
    let db = d / 2;
    let delta = u.view((0, 0), (db, db)) - u.view((db, db), (db, db));
    let u01 = u.view((0, db), (db, db));
    let u10 = u.view((db, 0), (db, db));
    let m = delta.adjoint() * &delta + (u10.adjoint() * u10 + u01.adjoint() * u01) * c(2.0, 0.0);
    let (values, _) = eigh(&m)?;
    let d2: f64 = values
        .iter()
        .map(|&mk| {
            let q = (mk / 4.0).clamp(0.0, 1.0);
            q / (1.0 + (1.0 - q).sqrt())
        })
        .sum::<f64>()
        / db as f64;
    Ok(d2.max(0.0).sqrt().min(1.0))
}

/// `n` log-spaced points from `min` to `max` inclusive.
pub fn log_grid(min: f64, max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![min];
    }
    let (a, b) = (min.ln(), max.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Log-log fit of `D` against `τ_d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeEstimate {
    pub grid: Vec<f64>,
    pub distances: Vec<f64>,
    pub slope: f64,
    /// `slope − 1`.
    pub n_est: f64,
    /// Root-mean-square residual of the fit in natural-log units.
    pub residual: f64,
    /// Smallest and largest `τ_d` that entered the fit.
    pub window: (f64, f64),
    pub points_used: usize,
}

/// Ordinary least squares on `(ln x, ln y)`; returns `(slope, intercept, rms residual)`.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    (slope, intercept, (ss / n).sqrt())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 4 {
        return Err(SimError::GridTooShort(grid.len()));
    }
    if grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SimError::GridNotIncreasing);
    }
    Ok(())
}

/// Fits `D ∼ τ_d^{N+1}` for any per-interval distance function.
pub fn estimate_order_with<F>(grid: &[f64], distance_at: F) -> Result<SlopeEstimate>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    check_grid(grid)?;
    let distances = grid.par_iter().map(|&t| distance_at(t)).collect::<Result<Vec<f64>>>()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        grid.iter().zip(&distances).filter(|(_, &d)| d > DISTANCE_FLOOR).map(|(&t, &d)| (t, d)).unzip();
    if xs.len() < 3 {
        return Err(SimError::TooFewPoints { usable: xs.len(), floor: DISTANCE_FLOOR });
    }
    let (slope, _, residual) = loglog_fit(&xs, &ys);
    Ok(SlopeEstimate {
        grid: grid.to_vec(),
        distances,
        slope,
        n_est: slope - 1.0,
        residual,
        window: (xs[0], xs[xs.len() - 1]),
        points_used: xs.len(),
    })
}

/// Suppression order from the log-log slope of `D(τ_d)`.
pub fn estimate_order(seq: &PulseSequence, model: &SpinBathModel, grid: &[f64]) -> Result<SlopeEstimate> {
    estimate_order_with(grid, |t| distance(&evolve(seq, model, t)?.u))
}

/// Substitutes the model's bath matrices for the symbols, and `tau_d` for `τ_d`.
pub fn instantiate(op: &SbOperator, model: &SpinBathModel, tau_d: f64) -> CMatrix {
    let db = model.bath_dim();
    let mut out = CMatrix::zeros(2 * db, 2 * db);
    for axis in PauliAxis::ALL {
        let poly = op.component(axis);
        if poly.is_zero() {
            continue;
        }
        let mut bath = CMatrix::zeros(db, db);
        for (term, coeff) in poly.terms() {
            let word = term.word.iter().fold(CMatrix::identity(db, db), |acc, &s| acc * model.bath_operator(s));
            let re = *coeff.re.numer() as f64 / *coeff.re.denom() as f64;
            let im = *coeff.im.numer() as f64 / *coeff.im.denom() as f64;
            bath += word * (c(re, im) * tau_d.powi(term.grade as i32));
        }
        out += kron(&pauli_matrix(axis), &bath);
    }
    out
}

/// `(1/K) Σ_{j=1..K} U_j† H0 U_j` with `U_j` built from 2×2 pulse matrices.
pub fn direct_average_h0(seq: &PulseSequence, model: &SpinBathModel) -> CMatrix {
    let db = model.bath_dim();
    let id_b = CMatrix::identity(db, db);
    let mut u = CMatrix::identity(2, 2);
    let mut sum = CMatrix::zeros(2 * db, 2 * db);
    for &p in seq.pulses() {
        u = pulse_matrix(p) * u;
        let full = kron(&u, &id_b);
        sum += full.adjoint() * model.h0() * full;
    }
    sum / c(seq.len() as f64, 0.0)
}

/// `(−i τ_d / 2K) Σ_{j>k} [H_j, H_k]` with `H_j` the dense interval frames.
pub fn direct_average_h1(seq: &PulseSequence, model: &SpinBathModel, tau_d: f64) -> CMatrix {
    let db = model.bath_dim();
    let id_b = CMatrix::identity(db, db);
    let mut u = CMatrix::identity(2, 2);
    let mut frames = Vec::with_capacity(seq.len());
    for &p in seq.pulses() {
        let full = kron(&u, &id_b);
        frames.push(full.adjoint() * model.h0() * full);
        u = pulse_matrix(p) * u;
    }
    let d = 2 * db;
    let mut sum = CMatrix::zeros(d, d);
    for j in 0..frames.len() {
        for k in 0..j {
            sum += &frames[j] * &frames[k] - &frames[k] * &frames[j];
        }
    }
    sum * c(0.0, -tau_d / (2.0 * frames.len() as f64))
}

/// Relative max-norm gap between the instantiated symbolic `H̄⁽⁰⁾` and the
/// direct matrix average. The denominator is never below `max|H0|`, so an
/// average that cancels exactly is compared against the size of its terms.
pub fn numeric_check_h0(seq: &PulseSequence, model: &SpinBathModel) -> f64 {
    let sym = symbolic::sequence_map0(seq, &symbolic::h0_generic());
    let direct = direct_average_h0(seq, model);
    let scale = max_abs(&direct).max(max_abs(model.h0()));
    max_abs(&(instantiate(&sym, model, 1.0) - direct)) / scale
}

/// Relative max-norm gap between the instantiated symbolic `H̄⁽¹⁾` and the
/// dense commutator sum, with the denominator floored at `τ_d·max|H0|²`.
pub fn numeric_check_h1(seq: &PulseSequence, model: &SpinBathModel, tau_d: f64) -> f64 {
    let frames = symbolic::interval_frames(seq, &symbolic::h0_generic());
    let sym = symbolic::avg_h1(&frames).expect("sequences are non-empty");
    let direct = direct_average_h1(seq, model, tau_d);
    let scale = max_abs(&direct).max(tau_d * max_abs(model.h0()).powi(2));
    max_abs(&(instantiate(&sym, model, tau_d) - direct)) / scale
}

/// Principal logarithm of a unitary close to the identity, via the Cayley
/// transform `C = i(1 − U)(1 + U)⁻¹`, which is Hermitian with eigenvalues
/// `tan(θ/2)` for eigenphases `θ` of `U`.
pub fn unitary_log(u: &CMatrix) -> Result<CMatrix> {
    let d = u.nrows();
    let id = CMatrix::identity(d, d);
    let inv = (&id + u).try_inverse().ok_or(SimError::BranchCut(std::f64::consts::PI))?;
    let cayley = (&id - u) * inv * c(0.0, 1.0);
    let (values, w) = eigh(&cayley)?;
    let mut scaled = w.clone();
    for (k, &t) in values.iter().enumerate() {
        let theta = 2.0 * t.atan();
        for z in scaled.column_mut(k).iter_mut() {
            *z *= c(0.0, theta);
        }
    }
    Ok(scaled * w.adjoint())
}

/// Effective Hamiltonian `L = i log(Ũ)/τ_c` of the toggling-frame propagator
/// `Ũ = (U_c(τ_c)†⊗1) U`.
pub fn effective_hamiltonian(seq: &PulseSequence, model: &SpinBathModel, tau_d: f64) -> Result<CMatrix> {
    let tau_c = tau_d * seq.len() as f64;
    let bound = model.h0_norm() * tau_c;
    if bound >= std::f64::consts::PI {
        return Err(SimError::BranchCut(bound));
    }
    let prop = evolve(seq, model, tau_d)?;
    let uc = seq.pulses().iter().fold(CMatrix::identity(2, 2), |acc, &p| pulse_matrix(p) * acc);
    let db = model.bath_dim();
    let toggled = kron(&uc.adjoint(), &CMatrix::identity(db, db)) * prop.u;
    Ok(hermitian_part(&(unitary_log(&toggled)? * c(0.0, 1.0 / tau_c))))
}

/// `(L − H̄⁽⁰⁾)/τ_d`: a numerical estimate of the first-order Magnus coefficient,
/// to compare with the instantiated `H̄⁽¹⁾/τ_d`.
pub fn magnus_log_oracle(seq: &PulseSequence, model: &SpinBathModel, tau_d: f64) -> Result<CMatrix> {
    let l = effective_hamiltonian(seq, model, tau_d)?;
    let frames = symbolic::interval_frames(seq, &symbolic::h0_generic());
    let h0bar = symbolic::avg_h0(&frames).expect("sequences are non-empty");
    Ok((l - instantiate(&h0bar, model, tau_d)) / c(tau_d, 0.0))
}

/// Instantiated first-order coefficient `H̄⁽¹⁾/τ_d`.
pub fn first_order_coefficient(seq: &PulseSequence, model: &SpinBathModel) -> CMatrix {
    let frames = symbolic::interval_frames(seq, &symbolic::h0_generic());
    let h1 = symbolic::avg_h1(&frames).expect("sequences are non-empty");
    instantiate(&h1, model, 1.0)
}
