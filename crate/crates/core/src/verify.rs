//! Certification of witness properties.
//!
//! - QW condition (i) is decided exactly: `ρ ↦ tr(ρQ)` is linear and the
//!   classical states form a simplex, so the minimum sits at a vertex.
//! - EW condition (i) is estimated by see-saw minimisation over pure
//!   product states (separable states are mixtures of those). See-saw only
//!   gives an upper bound on the true minimum; for `d_a·d_b ≤ 6` a grid
//!   search over the qubit factor plus local polish cross-checks it.
//! - Condition (ii) comes from the spectrum.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    block_layout, classical_state, classical_state_vertices, random_block_matrix, random_element_with,
    BipartiteAlgebra, ClassicalStateWeights,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::{
    anticommutator, commutator, expectation, hermitian_eigensystem, tensor_vec, ComplexMatrix, HermitianOperator, C64,
};
use crate::states::{dirichlet_uniform, random_unit_vector, DensityMatrix};
use crate::witnesses::{qubit_qw, QubitQWParams};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_RESTARTS: usize = 32;
pub const DEFAULT_SEED: u64 = 42;

pub const SEESAW_MAX_ITERS: usize = 500;
pub const SEESAW_CONVERGENCE: f64 = 1e-12;
/// Largest `d_a·d_b` for which the grid oracle runs.
pub const ORACLE_MAX_DIM: usize = 6;
pub const ORACLE_STEP_DEGREES: usize = 5;
/// Allowed gap between see-saw and grid-oracle minima.
pub const ORACLE_AGREEMENT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Confirmed,
    Refuted,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub verdict: Verdict,
    pub min_classical_expectation: Option<f64>,
    pub min_product_expectation: Option<f64>,
    pub min_eigenvalue: f64,
    #[serde(rename = "certificate")]
    pub certificate_state: Option<DensityMatrix>,
    pub violating_vertex: Option<usize>,
    pub restarts_used: usize,
    pub tolerance: f64,
    pub heuristic: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub oracle_min_product_expectation: Option<f64>,
}

impl WitnessReport {
    pub fn is_confirmed(&self) -> bool {
        self.verdict == Verdict::Confirmed
    }
}

/// Rounding floor below which a negative minimum is treated as zero.
fn roundoff_floor(op: &HermitianOperator) -> f64 {
    64.0 * f64::EPSILON * op.matrix().frobenius_norm().max(1.0)
}

/// Bottom eigenvalue/projector restricted to the blocks of `alg`, so the
/// certificate is itself an element of the algebra.
fn blockwise_bottom(q: &HermitianOperator, alg: &BipartiteAlgebra) -> (f64, DensityMatrix) {
    let mut best: Option<(f64, Vec<usize>, Vec<C64>)> = None;
    for slot in block_layout(alg) {
        let idx = alg.block_indices(slot.k, slot.l);
        let sub = HermitianOperator::new(q.matrix().submatrix(&idx)).expect("principal submatrix");
        let es = hermitian_eigensystem(&sub);
        if best.as_ref().is_none_or(|b| es.values[0] < b.0) {
            best = Some((es.values[0], idx, es.vectors[0].clone()));
        }
    }
    let (val, idx, v) = best.expect("algebra has at least one block");
    let mut full = vec![C64::new(0.0, 0.0); q.dim()];
    for (&i, z) in idx.iter().zip(v) {
        full[i] = z;
    }
    (val, projector(&full))
}

fn projector(v: &[C64]) -> DensityMatrix {
    DensityMatrix::new(ComplexMatrix::outer(v, v)).expect("unit-vector projector")
}

pub fn check_quantumness_witness(q: &HermitianOperator, alg: &BipartiteAlgebra) -> Result<WitnessReport> {
    check_quantumness_witness_with(q, alg, DEFAULT_TOLERANCE)
}

pub fn check_quantumness_witness_with(
    q: &HermitianOperator,
    alg: &BipartiteAlgebra,
    tol: f64,
) -> Result<WitnessReport> {
    alg.check_member(q.matrix(), DEFAULT_TOLERANCE)?;

    let vertices = classical_state_vertices(alg);
    let mut min_classical = f64::INFINITY;
    let mut argmin = 0;
    for (i, rho) in vertices.iter().enumerate() {
        let e = expectation(rho, q)?;
        if e < min_classical {
            min_classical = e;
            argmin = i;
        }
    }
    let (min_eig, bottom) = blockwise_bottom(q, alg);

    let (verdict, certificate, vertex) = if min_classical < -tol {
        (Verdict::Refuted, vertices[argmin].clone(), Some(argmin))
    } else if min_eig >= -tol {
        (Verdict::Refuted, bottom, None)
    } else {
        (Verdict::Confirmed, bottom, None)
    };
    Ok(WitnessReport {
        verdict,
        min_classical_expectation: Some(min_classical),
        min_product_expectation: None,
        min_eigenvalue: min_eig,
        certificate_state: Some(certificate),
        violating_vertex: vertex,
        restarts_used: 0,
        tolerance: tol,
        heuristic: false,
        oracle_min_product_expectation: None,
    })
}

/// Options for [`check_entanglement_witness`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EwOptions {
    pub restarts: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for EwOptions {
    fn default() -> Self {
        Self { restarts: DEFAULT_RESTARTS, seed: DEFAULT_SEED, tolerance: DEFAULT_TOLERANCE }
    }
}

/// Best pure product state found, `|a⟩ ⊗ |b⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductMinimum {
    pub value: f64,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
}

impl ProductMinimum {
    pub fn state(&self) -> DensityMatrix {
        projector(&tensor_vec(&self.a, &self.b))
    }
}

/// `M_a[i][j] = Σ_{k,l} conj(b_k) E[(i,k),(j,l)] b_l`
fn contract_over_b(e: &ComplexMatrix, d_a: usize, d_b: usize, b: &[C64]) -> HermitianOperator {
    let mut m = ComplexMatrix::zeros(d_a);
    for i in 0..d_a {
        for j in 0..d_a {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..d_b {
                for l in 0..d_b {
                    acc += b[k].conj() * e[(i * d_b + k, j * d_b + l)] * b[l];
                }
            }
            m[(i, j)] = acc;
        }
    }
    HermitianOperator::new(m).expect("compression of a Hermitian operator")
}

/// `M_b[k][l] = Σ_{i,j} conj(a_i) E[(i,k),(j,l)] a_j`
fn contract_over_a(e: &ComplexMatrix, d_a: usize, d_b: usize, a: &[C64]) -> HermitianOperator {
    let mut m = ComplexMatrix::zeros(d_b);
    for k in 0..d_b {
        for l in 0..d_b {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..d_a {
                for j in 0..d_a {
                    acc += a[i].conj() * e[(i * d_b + k, j * d_b + l)] * a[j];
                }
            }
            m[(k, l)] = acc;
        }
    }
    HermitianOperator::new(m).expect("compression of a Hermitian operator")
}

fn bottom(h: &HermitianOperator) -> (f64, Vec<C64>) {
    let es = hermitian_eigensystem(h);
    (es.values[0], es.vectors[0].clone())
}

fn product_value(e: &ComplexMatrix, a: &[C64], b: &[C64]) -> f64 {
    let v = tensor_vec(a, b);
    let ev = e.apply(&v);
    crate::linalg::inner(&v, &ev).re
}

enum Start {
    A(Vec<C64>),
    B(Vec<C64>),
}

/// Alternating bottom-eigenvector updates until the value changes by less
/// than [`SEESAW_CONVERGENCE`] or [`SEESAW_MAX_ITERS`] is reached.
fn alternate(e: &ComplexMatrix, d_a: usize, d_b: usize, start: Start) -> ProductMinimum {
    let (mut a, mut b) = match start {
        Start::B(b) => (bottom(&contract_over_b(e, d_a, d_b, &b)).1, b),
        Start::A(a) => {
            let b = bottom(&contract_over_a(e, d_a, d_b, &a)).1;
            (bottom(&contract_over_b(e, d_a, d_b, &b)).1, b)
        }
    };
    let mut prev = f64::INFINITY;
    for _ in 0..SEESAW_MAX_ITERS {
        let (_, nb) = bottom(&contract_over_a(e, d_a, d_b, &a));
        b = nb;
        let (val, na) = bottom(&contract_over_b(e, d_a, d_b, &b));
        a = na;
        if (prev - val).abs() < SEESAW_CONVERGENCE {
            break;
        }
        prev = val;
    }
    ProductMinimum { value: product_value(e, &a, &b), a, b }
}

fn check_dims(e: &HermitianOperator, d_a: usize, d_b: usize) -> Result<()> {
    if d_a == 0 || d_b == 0 || d_a * d_b != e.dim() {
        return Err(Error::DimensionMismatch { expected: d_a * d_b, found: e.dim() });
    }
    Ok(())
}

/// See-saw minimum of `⟨a⊗b|E|a⊗b⟩` over `restarts` random starts.
///
/// Restart `r` draws its initial `|b⟩` from ChaCha stream `r` of `seed`;
/// restarts run in parallel and are reduced in index order, keeping the
/// first of equal minima.
pub fn see_saw_minimize(
    e: &HermitianOperator,
    d_a: usize,
    d_b: usize,
    restarts: usize,
    seed: u64,
) -> Result<ProductMinimum> {
    check_dims(e, d_a, d_b)?;
    if restarts == 0 {
        return Err(invalid("see-saw needs at least one restart"));
    }
    let results: Vec<ProductMinimum> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let b0 = random_unit_vector(&mut rng, d_b);
            alternate(e.matrix(), d_a, d_b, Start::B(b0))
        })
        .collect();
    Ok(results
        .into_iter()
        .reduce(|best, next| if next.value < best.value { next } else { best })
        .expect("at least one restart"))
}

fn qubit_grid() -> Vec<Vec<C64>> {
    let step = ORACLE_STEP_DEGREES as f64 * PI / 180.0;
    let n_theta = 180 / ORACLE_STEP_DEGREES;
    let n_phi = 360 / ORACLE_STEP_DEGREES;
    let mut out = Vec::new();
    for t in 0..=n_theta {
        let theta = t as f64 * step;
        for p in 0..n_phi {
            let phi = p as f64 * step;
            out.push(vec![C64::new((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)]);
        }
    }
    out
}

/// Grid search over the factor of dimension ≤ 2 (5° Bloch grid), exact
/// minimisation over the other factor, then see-saw polish from the best
/// grid point. `None` when `d_a·d_b > ORACLE_MAX_DIM`.
pub fn product_grid_oracle(e: &HermitianOperator, d_a: usize, d_b: usize) -> Result<Option<ProductMinimum>> {
    check_dims(e, d_a, d_b)?;
    if d_a * d_b > ORACLE_MAX_DIM {
        return Ok(None);
    }
    let m = e.matrix();
    if d_a == 1 || d_b == 1 {
        // Every state of the nontrivial factor is a product state.
        let (value, v) = bottom(e);
        let one = vec![C64::new(1.0, 0.0)];
        let (a, b) = if d_a == 1 { (one, v) } else { (v, one) };
        return Ok(Some(ProductMinimum { value, a, b }));
    }
    let grid_on_a = d_a <= 2;
    let mut best: Option<(f64, Vec<C64>)> = None;
    for g in qubit_grid() {
        let val = if grid_on_a {
            bottom(&contract_over_a(m, d_a, d_b, &g)).0
        } else {
            bottom(&contract_over_b(m, d_a, d_b, &g)).0
        };
        if best.as_ref().is_none_or(|b| val < b.0) {
            best = Some((val, g));
        }
    }
    let (_, g) = best.expect("nonempty grid");
    let start = if grid_on_a { Start::A(g) } else { Start::B(g) };
    Ok(Some(alternate(m, d_a, d_b, start)))
}

pub fn check_entanglement_witness(
    e: &HermitianOperator,
    d_a: usize,
    d_b: usize,
    opts: &EwOptions,
) -> Result<WitnessReport> {
    let seesaw = see_saw_minimize(e, d_a, d_b, opts.restarts, opts.seed)?;
    let oracle = product_grid_oracle(e, d_a, d_b)?;
    let mut best = seesaw.clone();
    if let Some(o) = &oracle {
        if (o.value - seesaw.value).abs() > ORACLE_AGREEMENT {
            return Err(Error::OracleDisagreement { seesaw: seesaw.value, oracle: o.value });
        }
        if o.value < best.value {
            best = o.clone();
        }
    }

    let es = hermitian_eigensystem(e);
    let min_eig = es.values[0];
    let eig_cert = projector(&es.vectors[0]);
    let tol = opts.tolerance;
    let floor = roundoff_floor(e);

    let (verdict, cert) = if min_eig >= -tol {
        (Verdict::Refuted, eig_cert)
    } else if best.value < -tol {
        (Verdict::Refuted, best.state())
    } else if best.value < -floor {
        (Verdict::Inconclusive, best.state())
    } else {
        (Verdict::Confirmed, eig_cert)
    };
    Ok(WitnessReport {
        verdict,
        min_classical_expectation: None,
        min_product_expectation: Some(best.value),
        min_eigenvalue: min_eig,
        certificate_state: Some(cert),
        violating_vertex: None,
        restarts_used: opts.restarts,
        tolerance: tol,
        heuristic: true,
        oracle_min_product_expectation: oracle.map(|o| o.value),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImplicationReport {
    pub ew: WitnessReport,
    pub qw: WitnessReport,
    /// `ew confirmed ⇒ qw confirmed`
    pub implication_holds: bool,
}

/// Runs both checks on the full algebra `B(C^d_a) ⊗ B(C^d_b)`, whose only
/// classical state is `I/(d_a d_b)`.
pub fn ew_implies_qw(e: &HermitianOperator, d_a: usize, d_b: usize, opts: &EwOptions) -> Result<ImplicationReport> {
    let ew = check_entanglement_witness(e, d_a, d_b, opts)?;
    let alg = BipartiteAlgebra::full(d_a, d_b)?;
    let qw = check_quantumness_witness_with(e, &alg, opts.tolerance)?;
    let implication_holds = !ew.is_confirmed() || qw.is_confirmed();
    Ok(ImplicationReport { ew, qw, implication_holds })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKind {
    Theorem1,
    Lemma,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairSource {
    Random,
    Fallback,
}

/// Positive `X, Y` whose anticommutator has a negative eigenvalue.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessPair {
    pub x: HermitianOperator,
    pub y: HermitianOperator,
    pub min_eigenvalue: f64,
    pub source: PairSource,
    pub trial: Option<usize>,
}

/// Non-classical state on which a positive pair has negative anticommutator.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaCounterexample {
    pub state: DensityMatrix,
    pub x: HermitianOperator,
    pub y: HermitianOperator,
    pub expectation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub kind: ProbeKind,
    pub algebra: BipartiteAlgebra,
    pub commutative: bool,
    pub trials: usize,
    pub seed: u64,
    pub violations: usize,
    /// `theorem1`: smallest anticommutator eigenvalue seen.
    /// `lemma`: smallest `tr(ρ{X, Y})` seen.
    pub extremal_value: f64,
    /// `theorem1` on a commutative algebra: largest `‖[X, Y]‖_F`.
    /// `lemma`: largest `|tr(ρXY) − tr(ρC†C)|`.
    pub max_identity_residual: f64,
    pub witness_pair: Option<WitnessPair>,
    pub counterexample: Option<LemmaCounterexample>,
    pub passed: bool,
}

/// Embeds the qubit witness with `u = ẑ`, `v = x̂`, `α = β = 1` into the
/// first two basis vectors of the first block of size ≥ 2.
fn embedded_qubit_pair(alg: &BipartiteAlgebra) -> Option<(HermitianOperator, HermitianOperator, f64, Vec<usize>)> {
    let slot = block_layout(alg).into_iter().find(|s| s.size >= 2)?;
    let idx = alg.block_indices(slot.k, slot.l);
    let p = QubitQWParams::new(1.0, 1.0, [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]).expect("valid qubit parameters");
    let w = qubit_qw(&p);
    let n = alg.total_dim();
    let lift = |small: &ComplexMatrix| {
        let mut m = ComplexMatrix::zeros(n);
        for r in 0..2 {
            for c in 0..2 {
                m[(idx[r], idx[c])] = small[(r, c)];
            }
        }
        HermitianOperator::new(m).expect("embedded Hermitian")
    };
    Some((lift(w.x.matrix()), lift(w.y.matrix()), w.lambda_minus, idx[..2].to_vec()))
}

fn anticommutator_op(x: &HermitianOperator, y: &HermitianOperator) -> HermitianOperator {
    HermitianOperator::new(anticommutator(x.matrix(), y.matrix()).expect("same dim")).expect("Hermitian")
}

/// Randomized evidence for "commutative ⇔ positive pairs have positive
/// anticommutators" on `alg`.
///
/// Commutative algebras: every trial must give `[X, Y] = 0` and
/// `{X, Y} ≥ 0`. Noncommutative algebras: random positive pairs are searched
/// for a negative anticommutator; if none turns up the embedded qubit pair
/// is reported instead.
pub fn theorem1_probe(alg: &BipartiteAlgebra, trials: usize, seed: u64) -> Result<ProbeReport> {
    if trials == 0 {
        return Err(invalid("probe needs at least one trial"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let commutative = alg.is_commutative();
    let mut violations = 0;
    let mut extremal = f64::INFINITY;
    let mut max_comm: f64 = 0.0;
    let mut witness = None;

    for t in 0..trials {
        let x = random_element_with(alg, &mut rng, true);
        let y = random_element_with(alg, &mut rng, true);
        let q = anticommutator_op(&x, &y);
        let min = q.min_eigenvalue();
        extremal = extremal.min(min);
        let neg_bound = -DEFAULT_TOLERANCE * q.matrix().frobenius_norm().max(1.0);
        if commutative {
            let comm = commutator(x.matrix(), y.matrix())?.frobenius_norm();
            max_comm = max_comm.max(comm);
            let scale = (x.matrix().frobenius_norm() * y.matrix().frobenius_norm()).max(1.0);
            if min < neg_bound || comm > DEFAULT_TOLERANCE * scale {
                violations += 1;
            }
        } else if min < neg_bound {
            witness = Some(WitnessPair { x, y, min_eigenvalue: min, source: PairSource::Random, trial: Some(t) });
            break;
        }
    }

    if !commutative && witness.is_none() {
        let (x, y, _, _) = embedded_qubit_pair(alg).expect("noncommutative algebra has a block of size ≥ 2");
        let min = anticommutator_op(&x, &y).min_eigenvalue();
        extremal = extremal.min(min);
        witness = Some(WitnessPair { x, y, min_eigenvalue: min, source: PairSource::Fallback, trial: None });
    }

    let passed = if commutative { violations == 0 } else { witness.as_ref().is_some_and(|w| w.min_eigenvalue < 0.0) };
    Ok(ProbeReport {
        kind: ProbeKind::Theorem1,
        algebra: alg.clone(),
        commutative,
        trials,
        seed,
        violations,
        extremal_value: extremal,
        max_identity_residual: max_comm,
        witness_pair: witness,
        counterexample: None,
        passed,
    })
}

fn complex_trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.dim();
    let mut acc = C64::new(0.0, 0.0);
    for r in 0..n {
        for c in 0..n {
            acc += a[(r, c)] * b[(c, r)];
        }
    }
    acc
}

/// Randomized check that classical states see nonnegative anticommutators
/// of positive pairs, together with the intermediate identity
/// `tr(ρXY) = tr(ρC†C)`, `X = A†A`, `Y = B†B`, `C = AB†`.
pub fn classical_lemma_test(alg: &BipartiteAlgebra, trials: usize, seed: u64) -> Result<ProbeReport> {
    if trials == 0 {
        return Err(invalid("probe needs at least one trial"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = block_layout(alg);
    let (na, nb) = (alg.blocks_a().len(), alg.blocks_b().len());
    let mut violations = 0;
    let mut extremal = f64::INFINITY;
    let mut max_residual: f64 = 0.0;

    for _ in 0..trials {
        let w = dirichlet_uniform(&mut rng, layout.len());
        let mut p = vec![vec![0.0; nb]; na];
        for (slot, wi) in layout.iter().zip(&w) {
            p[slot.k][slot.l] = *wi;
        }
        let total: f64 = w.iter().sum();
        p.iter_mut().flatten().for_each(|x| *x /= total);
        let rho = classical_state(alg, &ClassicalStateWeights { p })?;

        let a = random_block_matrix(alg, &mut rng);
        let b = random_block_matrix(alg, &mut rng);
        let x = a.adjoint().matmul(&a)?;
        let y = b.adjoint().matmul(&b)?;
        let c = a.matmul(&b.adjoint())?;
        let cc = c.adjoint().matmul(&c)?;

        let anti = complex_trace_product(rho.matrix(), &anticommutator(&x, &y)?).re;
        let rho_xy = complex_trace_product(rho.matrix(), &x.matmul(&y)?);
        let rho_cc = complex_trace_product(rho.matrix(), &cc);
        let residual = (rho_xy - rho_cc).norm();

        extremal = extremal.min(anti);
        max_residual = max_residual.max(residual);
        if anti < -DEFAULT_TOLERANCE
            || rho_cc.re < -DEFAULT_TOLERANCE
            || residual > DEFAULT_TOLERANCE * rho_cc.norm().max(1.0)
        {
            violations += 1;
        }
    }

    let counterexample = if alg.is_commutative() {
        None
    } else {
        let (x, y, lambda_minus, idx) = embedded_qubit_pair(alg).expect("noncommutative block");
        let q = anticommutator_op(&x, &y);
        let small = q.matrix().submatrix(&idx);
        let (_, v) = bottom(&HermitianOperator::new(small)?);
        let mut full = vec![C64::new(0.0, 0.0); alg.total_dim()];
        full[idx[0]] = v[0];
        full[idx[1]] = v[1];
        let state = projector(&full);
        let value = expectation(&state, &q)?;
        debug_assert!((value - lambda_minus).abs() < 1e-10);
        Some(LemmaCounterexample { state, x, y, expectation: value })
    };

    Ok(ProbeReport {
        kind: ProbeKind::Lemma,
        algebra: alg.clone(),
        commutative: alg.is_commutative(),
        trials,
        seed,
        violations,
        extremal_value: extremal,
        max_identity_residual: max_residual,
        witness_pair: None,
        counterexample,
        passed: violations == 0,
    })
}

/// Re-evaluates `tr(certificate · op)`.
pub fn certificate_expectation(report: &WitnessReport, op: &HermitianOperator) -> Option<Result<f64>> {
    report.certificate_state.as_ref().map(|c| expectation(c, op))
}
