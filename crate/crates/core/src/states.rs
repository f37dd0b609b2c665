//! Density matrices: named pure states and seeded samplers.
//!
//! Samplers draw from `ChaCha8Rng::seed_from_u64(seed)`, so every output is
//! bit-reproducible for a fixed seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, norm, tensor, ComplexMatrix, HermitianOperator, C64, PSD_TOLERANCE};

/// Allowed `|tr ρ − 1|`.
pub const TRACE_TOLERANCE: f64 = 1e-12;

/// Positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DensityMatrix(HermitianOperator);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let h = HermitianOperator::new(m)?;
        let tr = h.matrix().trace().re;
        if (tr - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::NotDensity(format!("trace {tr} ≠ 1")));
        }
        let min = h.min_eigenvalue();
        if min < -PSD_TOLERANCE {
            return Err(Error::NotDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self(h))
    }

    /// Skips the eigenvalue check; for constructions that are PSD and
    /// normalised by design.
    pub(crate) fn from_trusted(m: ComplexMatrix) -> Self {
        debug_assert!((m.trace().re - 1.0).abs() < 1e-9);
        Self(HermitianOperator::new(m).expect("trusted density matrix must be Hermitian"))
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(d: usize) -> Self {
        Self::from_trusted(ComplexMatrix::identity(d).scale_real(1.0 / d as f64))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.0.matrix()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// `tr(ρσ)`; equals the fidelity when either state is pure.
    pub fn overlap(&self, other: &DensityMatrix) -> Result<f64> {
        linalg::trace_product(self.matrix(), other.matrix())
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self::from_trusted(tensor(self.matrix(), other.matrix()))
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = ComplexMatrix::deserialize(d)?;
        DensityMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableTerm {
    pub p: f64,
    #[serde(rename = "rhoA")]
    pub rho_a: DensityMatrix,
    #[serde(rename = "rhoB")]
    pub rho_b: DensityMatrix,
}

/// `ρ = Σ_k p_k ρ_k ⊗ σ_k`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableDecomposition {
    pub terms: Vec<SeparableTerm>,
}

impl SeparableDecomposition {
    pub fn to_density(&self) -> DensityMatrix {
        let first = &self.terms[0];
        let n = first.rho_a.dim() * first.rho_b.dim();
        let mut acc = ComplexMatrix::zeros(n);
        for t in &self.terms {
            acc = &acc + &tensor(t.rho_a.matrix(), t.rho_b.matrix()).scale_real(t.p);
        }
        DensityMatrix::from_trusted(acc)
    }

    pub fn total_weight(&self) -> f64 {
        self.terms.iter().map(|t| t.p).sum()
    }
}

/// Normalised projector `vv†/‖v‖²`.
pub fn pure_state(amplitudes: &[C64]) -> Result<DensityMatrix> {
    let n = norm(amplitudes);
    if amplitudes.is_empty() || n == 0.0 || !n.is_finite() {
        return Err(invalid("pure state needs a nonzero finite amplitude vector"));
    }
    let v: Vec<C64> = amplitudes.iter().map(|z| z / n).collect();
    Ok(DensityMatrix::from_trusted(ComplexMatrix::outer(&v, &v)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellKind {
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus, BellKind::PsiMinus];
}

impl std::str::FromStr for BellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi+" => Ok(BellKind::PhiPlus),
            "phi-" => Ok(BellKind::PhiMinus),
            "psi+" => Ok(BellKind::PsiPlus),
            "psi-" => Ok(BellKind::PsiMinus),
            other => Err(invalid(format!("unknown Bell state {other:?}"))),
        }
    }
}

pub fn bell_vector(kind: BellKind) -> [C64; 4] {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z = C64::new(0.0, 0.0);
    match kind {
        BellKind::PhiPlus => [h, z, z, h],
        BellKind::PhiMinus => [h, z, z, -h],
        BellKind::PsiPlus => [z, h, h, z],
        BellKind::PsiMinus => [z, h, -h, z],
    }
}

pub fn bell_state(kind: BellKind) -> DensityMatrix {
    let v = bell_vector(kind);
    DensityMatrix::from_trusted(ComplexMatrix::outer(&v, &v))
}

/// `|χ⟩ ∝ a|+⟩⊗|−⟩ + b|−⟩⊗|+⟩` with `|±⟩ = (|0⟩ ± |1⟩)/√2`.
pub fn chi_vector(a: C64, b: C64) -> Result<Vec<C64>> {
    let plus = [C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
    let minus = [C64::new(1.0, 0.0), C64::new(-1.0, 0.0)];
    let pm = linalg::tensor_vec(&plus, &minus);
    let mp = linalg::tensor_vec(&minus, &plus);
    let v: Vec<C64> = pm.iter().zip(&mp).map(|(x, y)| a * x + b * y).collect();
    if norm(&v) == 0.0 {
        return Err(invalid("chi state needs (a, b) ≠ (0, 0)"));
    }
    let n = norm(&v);
    Ok(v.into_iter().map(|z| z / n).collect())
}

pub fn chi_state(a: C64, b: C64) -> Result<DensityMatrix> {
    pure_state(&chi_vector(a, b)?)
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Haar-random unit vector (normalised complex Gaussian).
pub(crate) fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..d).map(|_| gaussian_complex(rng)).collect();
        let n = norm(&v);
        if n > 1e-300 {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

pub(crate) fn random_gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let data = (0..d * d).map(|_| gaussian_complex(rng)).collect();
    ComplexMatrix::from_vec(d, data).expect("gaussian matrix is finite")
}

fn projector(v: &[C64]) -> DensityMatrix {
    DensityMatrix::from_trusted(ComplexMatrix::outer(v, v))
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.contains(&0) {
        return Err(invalid("dimensions must be ≥ 1"));
    }
    Ok(())
}

fn product_term<R: Rng + ?Sized>(rng: &mut R, d_a: usize, d_b: usize) -> (DensityMatrix, DensityMatrix) {
    let a = random_unit_vector(rng, d_a);
    let b = random_unit_vector(rng, d_b);
    (projector(&a), projector(&b))
}

/// Random pure product state `|a⟩⟨a| ⊗ |b⟩⟨b|` with its one-term decomposition.
pub fn random_pure_product(d_a: usize, d_b: usize, seed: u64) -> Result<(DensityMatrix, SeparableDecomposition)> {
    check_dims(&[d_a, d_b])?;
    let mut rng = rng_for(seed);
    let (rho_a, rho_b) = product_term(&mut rng, d_a, d_b);
    let dec = SeparableDecomposition { terms: vec![SeparableTerm { p: 1.0, rho_a, rho_b }] };
    Ok((dec.to_density(), dec))
}

/// Default number of product terms for [`random_separable`].
pub fn default_separable_terms(d_a: usize, d_b: usize) -> usize {
    2 * d_a * d_b
}

/// Dirichlet(1,…,1) mixture of `num_terms` random pure product states.
///
/// The product vectors are drawn first, in term order, from the same stream
/// as [`random_pure_product`]; weights are drawn afterwards. With
/// `num_terms = 1` the output is therefore bit-identical to
/// `random_pure_product(d_a, d_b, seed)`.
pub fn random_separable(
    d_a: usize,
    d_b: usize,
    num_terms: usize,
    seed: u64,
) -> Result<(DensityMatrix, SeparableDecomposition)> {
    check_dims(&[d_a, d_b])?;
    if num_terms == 0 {
        return Err(invalid("separable sampler needs at least one term"));
    }
    let mut rng = rng_for(seed);
    let factors: Vec<_> = (0..num_terms).map(|_| product_term(&mut rng, d_a, d_b)).collect();
    let weights = dirichlet_uniform(&mut rng, num_terms);
    let terms = factors.into_iter().zip(weights).map(|((rho_a, rho_b), p)| SeparableTerm { p, rho_a, rho_b }).collect();
    let dec = SeparableDecomposition { terms };
    Ok((dec.to_density(), dec))
}

/// Uniform point on the probability simplex. All weights are strictly
/// positive.
pub(crate) fn dirichlet_uniform<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let raw: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1).max(1e-300)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Hilbert–Schmidt random state `G†G / tr(G†G)`.
pub fn random_density(d: usize, seed: u64) -> Result<DensityMatrix> {
    check_dims(&[d])?;
    let mut rng = rng_for(seed);
    let g = random_gaussian_matrix(&mut rng, d);
    let gg = g.adjoint().matmul(&g)?;
    let tr = gg.trace().re;
    Ok(DensityMatrix::from_trusted(gg.scale_real(1.0 / tr)))
}
