//! Witness operators: swap, Bell-CHSH, the two anticommutator
//! factorisations of the Bell operator, the qubit anticommutator witness
//! `{X, Y}` and the shifted swap `ξI + S = {X_ξ, Y_ξ}`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    anticommutator, bloch_operator, commutator, is_positive_semidefinite, pauli_x, pauli_y, tensor, ComplexMatrix,
    HermitianOperator, C64,
};
use crate::states::{gaussian_complex, random_gaussian_matrix};

/// Bound on `‖A² − I‖_F` for dichotomic observables.
pub const DICHOTOMIC_TOLERANCE: f64 = 1e-10;

/// Number of θ samples used by [`fig1_surfaces`].
pub const FIG1_THETA_POINTS: usize = 1024;

const DEGENERATE_EIGENVALUE: f64 = 1e-12;

/// Swap `S|i⟩⊗|j⟩ = |j⟩⊗|i⟩` on `C^d ⊗ C^d`.
pub fn swap_operator(d: usize) -> Result<HermitianOperator> {
    if d < 2 {
        return Err(invalid(format!("swap needs d ≥ 2, got {d}")));
    }
    let mut m = ComplexMatrix::zeros(d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + j, j * d + i)] = C64::new(1.0, 0.0);
        }
    }
    HermitianOperator::new(m)
}

/// Basis order `|00⟩, |01⟩, |10⟩, |02⟩, |20⟩, …, |11⟩, |12⟩, |21⟩, …` that
/// groups every exchange pair `{|ij⟩, |ji⟩}` next to each other; entry `n`
/// is the lexicographic index of the `n`-th basis vector.
pub fn sector_basis_order(d: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(d * d);
    for i in 0..d {
        order.push(i * d + i);
        for j in i + 1..d {
            order.push(i * d + j);
            order.push(j * d + i);
        }
    }
    order
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Sign::Plus),
            "minus" | "-" => Ok(Sign::Minus),
            other => Err(invalid(format!("sign must be plus or minus, got {other:?}"))),
        }
    }
}

/// Local ±1-valued settings `A1, A2` (Alice) and `B1, B2` (Bob).
#[derive(Clone, Debug)]
pub struct DichotomicSettings {
    pub a1: HermitianOperator,
    pub a2: HermitianOperator,
    pub b1: HermitianOperator,
    pub b2: HermitianOperator,
    pub sign: Sign,
}

fn dichotomic_residual(a: &HermitianOperator) -> f64 {
    let sq = a.matrix().matmul(a.matrix()).expect("square");
    sq.distance(&ComplexMatrix::identity(a.dim()))
}

impl DichotomicSettings {
    pub fn new(
        a1: HermitianOperator,
        a2: HermitianOperator,
        b1: HermitianOperator,
        b2: HermitianOperator,
        sign: Sign,
    ) -> Result<Self> {
        if a1.dim() != a2.dim() {
            return Err(Error::DimensionMismatch { expected: a1.dim(), found: a2.dim() });
        }
        if b1.dim() != b2.dim() {
            return Err(Error::DimensionMismatch { expected: b1.dim(), found: b2.dim() });
        }
        for op in [&a1, &a2, &b1, &b2] {
            let residual = dichotomic_residual(op);
            if residual > DICHOTOMIC_TOLERANCE {
                return Err(Error::NotDichotomic { residual });
            }
        }
        Ok(Self { a1, a2, b1, b2, sign })
    }

    pub fn dim_a(&self) -> usize {
        self.a1.dim()
    }

    pub fn dim_b(&self) -> usize {
        self.b1.dim()
    }

    pub fn with_sign(mut self, sign: Sign) -> Self {
        self.sign = sign;
        self
    }

    fn id(&self) -> ComplexMatrix {
        ComplexMatrix::identity(self.dim_a() * self.dim_b())
    }

    fn ab(&self, a: &HermitianOperator, b: &HermitianOperator) -> ComplexMatrix {
        tensor(a.matrix(), b.matrix())
    }

    /// `[A1, A2] ⊗ [B1, B2]`
    pub fn commutator_product(&self) -> ComplexMatrix {
        let ca = commutator(self.a1.matrix(), self.a2.matrix()).expect("same dim");
        let cb = commutator(self.b1.matrix(), self.b2.matrix()).expect("same dim");
        tensor(&ca, &cb)
    }
}

/// `A1 = σx, A2 = σy, B1 = (σx + σy)/√2, B2 = (σx − σy)/√2`.
pub fn standard_bell_settings(sign: Sign) -> DichotomicSettings {
    let x = pauli_x();
    let y = pauli_y();
    let b1 = (&x + &y).scale_real(FRAC_1_SQRT_2);
    let b2 = (&x - &y).scale_real(FRAC_1_SQRT_2);
    let h = |m: ComplexMatrix| HermitianOperator::new(m).expect("Pauli combinations are Hermitian");
    DichotomicSettings::new(h(x), h(y), h(b1), h(b2), sign).expect("standard settings are dichotomic")
}

/// Random unitary from Gram–Schmidt on a complex Gaussian matrix.
fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = random_gaussian_matrix(rng, d);
    let mut cols: Vec<Vec<C64>> = (0..d).map(|c| (0..d).map(|r| g[(r, c)]).collect()).collect();
    for c in 0..d {
        for p in 0..c {
            let proj = crate::linalg::inner(&cols[p], &cols[c]);
            let prev = cols[p].clone();
            for (x, q) in cols[c].iter_mut().zip(&prev) {
                *x -= proj * q;
            }
        }
        let n = crate::linalg::norm(&cols[c]);
        for x in cols[c].iter_mut() {
            *x /= n;
        }
    }
    let mut u = ComplexMatrix::zeros(d);
    for (c, col) in cols.iter().enumerate() {
        for (r, &z) in col.iter().enumerate() {
            u[(r, c)] = z;
        }
    }
    u
}

/// `U diag(±1) U†` with random signs and Haar-like `U`.
fn random_dichotomic<R: Rng + ?Sized>(rng: &mut R, d: usize) -> HermitianOperator {
    let u = random_unitary(rng, d);
    let signs: Vec<f64> = (0..d).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    let m = u.matmul(&ComplexMatrix::diag_real(&signs)).unwrap().matmul(&u.adjoint()).unwrap();
    HermitianOperator::new(m).expect("unitary conjugate of a real diagonal")
}

/// Random dichotomic settings on `C^d_a ⊗ C^d_b`.
pub fn random_dichotomic_settings(d_a: usize, d_b: usize, sign: Sign, seed: u64) -> Result<DichotomicSettings> {
    if d_a == 0 || d_b == 0 {
        return Err(invalid("local dimensions must be ≥ 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a1 = random_dichotomic(&mut rng, d_a);
    let a2 = random_dichotomic(&mut rng, d_a);
    let b1 = random_dichotomic(&mut rng, d_b);
    let b2 = random_dichotomic(&mut rng, d_b);
    DichotomicSettings::new(a1, a2, b1, b2, sign)
}

/// `E_Bell = 2 ± (A1⊗B1 + A1⊗B2 + A2⊗B1 − A2⊗B2)`
pub fn bell_chsh(s: &DichotomicSettings) -> HermitianOperator {
    let sum = &(&(&s.ab(&s.a1, &s.b1) + &s.ab(&s.a1, &s.b2)) + &s.ab(&s.a2, &s.b1)) - &s.ab(&s.a2, &s.b2);
    let e = &s.id().scale_real(2.0) + &sum.scale_real(s.sign.value());
    HermitianOperator::new(e).expect("sum of Hermitian products of commuting factors")
}

/// Positive pair `X, Y` and `Q = {X, Y}`, plus the residual of the closed
/// form for `Q`.
#[derive(Clone, Debug)]
pub struct AvrWitness {
    pub x: HermitianOperator,
    pub y: HermitianOperator,
    pub q: HermitianOperator,
    /// `‖Q − closed form‖_F`
    pub residual: f64,
}

fn positive_pair(
    s: &DichotomicSettings,
    x_terms: ComplexMatrix,
    y_terms: ComplexMatrix,
) -> Result<(HermitianOperator, HermitianOperator, HermitianOperator)> {
    let two = s.id().scale_real(2.0);
    let sign = s.sign.value();
    let x = HermitianOperator::new(&two + &x_terms.scale_real(sign))?;
    let y = HermitianOperator::new(&two + &y_terms.scale_real(sign))?;
    for op in [&x, &y] {
        let (psd, min) = is_positive_semidefinite(op);
        if !psd {
            return Err(invalid(format!("factor is not positive (min eigenvalue {min:e})")));
        }
    }
    let q = HermitianOperator::new(anticommutator(x.matrix(), y.matrix())?)?;
    Ok((x, y, q))
}

/// `X = 2 ± A1⊗(B1 + B2)`, `Y = 2 ± A2⊗(B1 − B2)`, for which
/// `{X, Y} = 4E_Bell − [A1, A2]⊗[B1, B2]`.
pub fn avr_asymmetric(s: &DichotomicSettings) -> Result<AvrWitness> {
    let xt = &s.ab(&s.a1, &s.b1) + &s.ab(&s.a1, &s.b2);
    let yt = &s.ab(&s.a2, &s.b1) - &s.ab(&s.a2, &s.b2);
    let (x, y, q) = positive_pair(s, xt, yt)?;
    let closed = &bell_chsh(s).matrix().scale_real(4.0) - &s.commutator_product();
    let residual = q.matrix().distance(&closed);
    Ok(AvrWitness { x, y, q, residual })
}

/// `X = 2 ± (A1⊗B1 − A2⊗B2)`, `Y = 2 ± (A1⊗B2 + A2⊗B1)`, symmetric under
/// `A ↔ B`, for which `{X, Y} = 4E_Bell` for any settings.
pub fn avr_symmetric(s: &DichotomicSettings) -> Result<AvrWitness> {
    let xt = &s.ab(&s.a1, &s.b1) - &s.ab(&s.a2, &s.b2);
    let yt = &s.ab(&s.a1, &s.b2) + &s.ab(&s.a2, &s.b1);
    let (x, y, q) = positive_pair(s, xt, yt)?;
    let residual = q.matrix().distance(&bell_chsh(s).matrix().scale_real(4.0));
    Ok(AvrWitness { x, y, q, residual })
}

/// `XY = 2E_Bell + [A1,A2]⊗I + I⊗[B1,B2]` for the symmetric pair.
pub fn symmetric_product_residual(s: &DichotomicSettings, w: &AvrWitness) -> f64 {
    let xy = w.x.matrix().matmul(w.y.matrix()).expect("same dim");
    let ca = commutator(s.a1.matrix(), s.a2.matrix()).expect("same dim");
    let cb = commutator(s.b1.matrix(), s.b2.matrix()).expect("same dim");
    let want = &(&bell_chsh(s).matrix().scale_real(2.0) + &tensor(&ca, &ComplexMatrix::identity(s.dim_b())))
        + &tensor(&ComplexMatrix::identity(s.dim_a()), &cb);
    xy.distance(&want)
}

/// Parameters of `X = α(1 + u·σ)/2`, `Y = β(1 + v·σ)/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitQWParams {
    pub alpha: f64,
    pub beta: f64,
    pub u: [f64; 3],
    pub v: [f64; 3],
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn len(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

impl QubitQWParams {
    pub fn new(alpha: f64, beta: f64, u: [f64; 3], v: [f64; 3]) -> Result<Self> {
        let finite = [alpha, beta].iter().chain(&u).chain(&v).all(|x| x.is_finite());
        if !finite {
            return Err(invalid("qubit witness parameters must be finite"));
        }
        if alpha <= 0.0 || beta <= 0.0 {
            return Err(invalid("alpha and beta must be strictly positive"));
        }
        if len(u) > 1.0 + 1e-12 || len(v) > 1.0 + 1e-12 {
            return Err(invalid("|u| and |v| must not exceed 1"));
        }
        Ok(Self { alpha, beta, u, v })
    }

    /// Vectors `u = u_len·ẑ`, `v = v_len(sin θ, 0, cos θ)`.
    pub fn from_lengths(alpha: f64, beta: f64, u_len: f64, v_len: f64, theta: f64) -> Result<Self> {
        Self::new(alpha, beta, [0.0, 0.0, u_len], [v_len * theta.sin(), 0.0, v_len * theta.cos()])
    }

    /// Angle between `u` and `v`; zero when either vanishes.
    pub fn theta(&self) -> f64 {
        let denom = len(self.u) * len(self.v);
        if denom == 0.0 {
            return 0.0;
        }
        (dot(self.u, self.v) / denom).clamp(-1.0, 1.0).acos()
    }

    /// Closed-form `(λ+, λ−) = αβ(1 + u·v ± |u + v|)/2`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let s = [self.u[0] + self.v[0], self.u[1] + self.v[1], self.u[2] + self.v[2]];
        let base = 1.0 + dot(self.u, self.v);
        let half = 0.5 * self.alpha * self.beta;
        (half * (base + len(s)), half * (base - len(s)))
    }
}

#[derive(Clone, Debug)]
pub struct QubitQW {
    pub x: HermitianOperator,
    pub y: HermitianOperator,
    pub q: HermitianOperator,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

fn half_bloch(weight: f64, n: [f64; 3]) -> HermitianOperator {
    let m = (&ComplexMatrix::identity(2) + &bloch_operator(n)).scale_real(0.5 * weight);
    HermitianOperator::new(m).expect("Bloch operators are Hermitian")
}

pub fn qubit_qw(p: &QubitQWParams) -> QubitQW {
    let x = half_bloch(p.alpha, p.u);
    let y = half_bloch(p.beta, p.v);
    let q = HermitianOperator::new(anticommutator(x.matrix(), y.matrix()).expect("2×2"))
        .expect("anticommutator of Hermitian operators");
    let (lambda_plus, lambda_minus) = p.eigenvalues();
    QubitQW { x, y, q, lambda_plus, lambda_minus }
}

/// `cos²θ < (u² + v² − 1)/(u²v²)`, evaluated as the equivalent
/// `(1 − u²)(1 − v²) < u²v² sin²θ`, which is well defined at `u = 0` or
/// `v = 0` and exact at `θ = 0`.
pub fn qubit_qw_condition(u_len: f64, v_len: f64, theta: f64) -> bool {
    let (u2, v2) = (u_len * u_len, v_len * v_len);
    let s = theta.sin();
    (1.0 - u2) * (1.0 - v2) < u2 * v2 * s * s
}

/// Upper bound on `cos²θ` for the qubit witness to have `λ− < 0`.
pub fn cos2_theta_bound(u_len: f64, v_len: f64) -> f64 {
    (u_len * u_len + v_len * v_len - 1.0) / (u_len * u_len * v_len * v_len)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fig1Row {
    pub u: f64,
    pub v: f64,
    pub bound: f64,
    /// `min_θ λ−/λ+` over θ with `λ− < 0`; `None` if `λ− ≥ 0` for every θ.
    pub min_ratio: Option<f64>,
}

/// Smallest `λ−/λ+` over a uniform `θ ∈ [0, π]` grid, restricted to `λ− < 0`.
pub fn min_ratio_over_theta(u_len: f64, v_len: f64, theta_points: usize) -> Option<f64> {
    let mut best: Option<f64> = None;
    for j in 0..theta_points {
        let theta = PI * j as f64 / (theta_points - 1) as f64;
        let p = QubitQWParams::from_lengths(1.0, 1.0, u_len, v_len, theta).ok()?;
        let (lp, lm) = p.eigenvalues();
        // At u = −v the operator vanishes and the ratio is rounding noise.
        if lm < 0.0 && lp > DEGENERATE_EIGENVALUE {
            let r = lm / lp;
            best = Some(best.map_or(r, |b| b.min(r)));
        }
    }
    best
}

/// `(u, v, bound, min_ratio)` over the grid `u, v ∈ {1/n, 2/n, …, 1}`.
pub fn fig1_surfaces(grid_n: usize) -> Result<Vec<Fig1Row>> {
    if grid_n < 2 {
        return Err(invalid("fig1 grid needs at least 2 points per axis"));
    }
    let mut rows = Vec::with_capacity(grid_n * grid_n);
    for i in 1..=grid_n {
        for j in 1..=grid_n {
            let u = i as f64 / grid_n as f64;
            let v = j as f64 / grid_n as f64;
            rows.push(Fig1Row {
                u,
                v,
                bound: cos2_theta_bound(u, v),
                min_ratio: min_ratio_over_theta(u, v, FIG1_THETA_POINTS),
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftedSwapParams {
    pub xi: f64,
    pub phi: f64,
    pub d: usize,
}

impl ShiftedSwapParams {
    pub fn new(xi: f64, phi: f64, d: usize) -> Result<Self> {
        if !(xi > 0.0 && xi < 1.0) {
            return Err(invalid(format!("xi must lie strictly between 0 and 1, got {xi}")));
        }
        if !phi.is_finite() {
            return Err(invalid("phi must be finite"));
        }
        if d < 2 {
            return Err(invalid(format!("local dimension must be ≥ 2, got {d}")));
        }
        Ok(Self { xi, phi: phi.rem_euclid(2.0 * PI), d })
    }

    /// Qubit parameters realising `ξI + σz = {X, Y}` in a `(|λ+⟩, |λ−⟩)` sector:
    /// `α = β = ξ^{-1/2}`, `u, v = (±√(1−ξ²) cos φ, ±√(1−ξ²) sin φ, ξ)`.
    pub fn sector_params(&self) -> QubitQWParams {
        let s = (1.0 - self.xi * self.xi).sqrt();
        let (c, sn) = (self.phi.cos(), self.phi.sin());
        let w = 1.0 / self.xi.sqrt();
        QubitQWParams { alpha: w, beta: w, u: [s * c, s * sn, self.xi], v: [-s * c, -s * sn, self.xi] }
    }

    /// Angle between `u` and `v`: `ξ = cos(θ/2)`.
    pub fn theta(&self) -> f64 {
        2.0 * self.xi.acos()
    }
}

#[derive(Clone, Debug)]
pub struct ShiftedSwapFactors {
    pub x: HermitianOperator,
    pub y: HermitianOperator,
    /// `‖{X_ξ, Y_ξ} − (ξI + S)‖_F`
    pub residual: f64,
}

/// `ξI + S`
pub fn shifted_swap(d: usize, xi: f64) -> Result<HermitianOperator> {
    let s = swap_operator(d)?;
    HermitianOperator::new(&ComplexMatrix::identity(d * d).scale_real(xi) + s.matrix())
}

/// Builds `X_ξ, Y_ξ ≥ 0` with `{X_ξ, Y_ξ} = ξI + S`, sector by sector.
///
/// Each exchange pair `{|ij⟩, |ji⟩}`, `i < j`, carries the qubit pair of
/// [`ShiftedSwapParams::sector_params`] written in the basis
/// `|λ±⟩ = (|ij⟩ ± |ji⟩)/√2`; each `|ii⟩` gets `√((1+ξ)/2)` in both factors.
pub fn shifted_swap_factors(p: &ShiftedSwapParams) -> Result<ShiftedSwapFactors> {
    let p = ShiftedSwapParams::new(p.xi, p.phi, p.d)?;
    let d = p.d;
    let qw = qubit_qw(&p.sector_params());
    let diag = C64::new(((1.0 + p.xi) / 2.0).sqrt(), 0.0);

    let mut x = ComplexMatrix::zeros(d * d);
    let mut y = ComplexMatrix::zeros(d * d);
    for i in 0..d {
        x[(i * d + i, i * d + i)] = diag;
        y[(i * d + i, i * d + i)] = diag;
        for j in i + 1..d {
            let (ij, ji) = (i * d + j, j * d + i);
            let h = FRAC_1_SQRT_2;
            // columns: |λ+⟩, |λ−⟩ in terms of (|ij⟩, |ji⟩)
            let basis = [[h, h], [h, -h]];
            for (m, sector) in [(&mut x, qw.x.matrix()), (&mut y, qw.y.matrix())] {
                for (r_local, &r) in [ij, ji].iter().enumerate() {
                    for (c_local, &c) in [ij, ji].iter().enumerate() {
                        let mut acc = C64::new(0.0, 0.0);
                        for a in 0..2 {
                            for b in 0..2 {
                                acc += sector[(a, b)] * basis[a][r_local] * basis[b][c_local];
                            }
                        }
                        m[(r, c)] = acc;
                    }
                }
            }
        }
    }
    let x = HermitianOperator::new(x)?;
    let y = HermitianOperator::new(y)?;
    let target = shifted_swap(d, p.xi)?;
    let residual = anticommutator(x.matrix(), y.matrix())?.distance(target.matrix());
    Ok(ShiftedSwapFactors { x, y, residual })
}

/// Random sample used by witness property tests.
pub fn random_bloch_vector<R: Rng + ?Sized>(rng: &mut R, max_len: f64) -> [f64; 3] {
    let z = gaussian_complex(rng);
    let w = gaussian_complex(rng);
    let v = [z.re, z.im, w.re];
    let l = len(v).max(1e-300);
    let r = max_len * rng.random::<f64>();
    [v[0] / l * r, v[1] / l * r, v[2] / l * r]
}
