//! Seeded, reproducible instance generators.
//!
//! Every generator draws from a ChaCha20 stream keyed by a 64-bit seed
//! (`ChaCha20Rng::seed_from_u64`). Trial `t` of a run seeded with `s` uses the
//! derived seed [`derive_seed`]`(s, t)`, a SplitMix64 finalizer applied to
//! `s + (t + 1)·0x9E3779B97F4A7C15`, so any trial can be regenerated on its own and
//! parallel runs do not depend on scheduling order.
//!
//! Distributions:
//! * Hermitian: GUE-style `(G + G†)/2`, `G` with i.i.d. standard complex Gaussian
//!   entries (`E|g|² = 1`).
//! * Densities: Wishart `W = GG†` normalised to unit trace.
//! * Unitaries: QR of a complex Gaussian matrix with the phases of `diag(R)` moved
//!   into `Q` (Haar distributed).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgebraElement, BlockAlgebra};
use crate::error::{Error, Result};
use crate::hermitian::{hermitize, ComplexMatrix, HermitianMatrix};
use crate::maps::{MapFamily, PositiveAssignment, TracialMap};

/// SplitMix64 mix of a base seed with a trial counter.
pub fn derive_seed(seed: u64, counter: u64) -> u64 {
    let mut z = seed.wrapping_add(counter.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub struct Sampler {
    rng: ChaCha20Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha20Rng::seed_from_u64(seed) }
    }

    pub fn for_trial(seed: u64, trial: u64) -> Self {
        Self::new(derive_seed(seed, trial))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.random()
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.random::<bool>()
    }

    pub fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn complex_gaussian(&mut self) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(s * self.gaussian(), s * self.gaussian())
    }

    /// Complex Ginibre matrix.
    pub fn ginibre(&mut self, n: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.complex_gaussian();
            }
        }
        m
    }

    pub fn hermitian(&mut self, n: usize) -> HermitianMatrix {
        let g = self.ginibre(n);
        hermitize(&g).expect("square and finite")
    }

    /// `GG†` with square `G`, positive definite almost surely.
    pub fn wishart(&mut self, n: usize) -> HermitianMatrix {
        let g = self.ginibre(n);
        hermitize(&(&g * g.adjoint())).expect("square and finite")
    }

    pub fn density(&mut self, n: usize) -> HermitianMatrix {
        let w = self.wishart(n);
        let tr = w.as_matrix().trace().re;
        hermitize(&w.as_matrix().unscale(tr)).expect("square and finite")
    }

    pub fn unitary(&mut self, n: usize) -> ComplexMatrix {
        let g = self.ginibre(n);
        let qr = g.qr();
        let (mut q, r) = qr.unpack();
        for j in 0..n {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
        q
    }

    pub fn element(&mut self, alg: &BlockAlgebra) -> AlgebraElement {
        let blocks = alg.dims().iter().map(|&n| self.ginibre(n)).collect();
        AlgebraElement::new(alg.clone(), blocks).expect("shapes match")
    }

    pub fn hermitian_element(&mut self, alg: &BlockAlgebra) -> AlgebraElement {
        let blocks = alg.dims().iter().map(|&n| self.hermitian(n).into_matrix()).collect();
        AlgebraElement::new(alg.clone(), blocks).expect("shapes match")
    }

    pub fn wishart_element(&mut self, alg: &BlockAlgebra) -> AlgebraElement {
        let blocks = alg.dims().iter().map(|&n| self.wishart(n).into_matrix()).collect();
        AlgebraElement::new(alg.clone(), blocks).expect("shapes match")
    }

    /// Wishart element normalised to total trace one.
    pub fn density_element(&mut self, alg: &BlockAlgebra) -> AlgebraElement {
        let w = self.wishart_element(alg);
        let tr = w.trace().re;
        w.scale_real(1.0 / tr)
    }

    pub fn unitary_blocks(&mut self, alg: &BlockAlgebra) -> Vec<ComplexMatrix> {
        alg.dims().iter().map(|&n| self.unitary(n)).collect()
    }

    /// Hermitian element `U diag(λ) U†` with eigenvalues drawn uniformly from `[lo, hi]`,
    /// each negated with probability one half when `signed`.
    pub fn spectral_element(&mut self, alg: &BlockAlgebra, lo: f64, hi: f64, signed: bool) -> AlgebraElement {
        let blocks = alg
            .dims()
            .iter()
            .map(|&n| {
                let u = self.unitary(n);
                let mut d = ComplexMatrix::zeros(n, n);
                for i in 0..n {
                    let mut v = self.uniform_range(lo, hi);
                    if signed && self.coin() {
                        v = -v;
                    }
                    d[(i, i)] = Complex64::new(v, 0.0);
                }
                hermitize(&(&u * d * u.adjoint())).expect("finite").into_matrix()
            })
            .collect();
        AlgebraElement::new(alg.clone(), blocks).expect("shapes match")
    }

    /// Nonnegative coefficient rows normalised so that `Σᵢ c_ji nᵢ = 1`.
    pub fn unital_coefficients(&mut self, domain: &BlockAlgebra, k: usize) -> Vec<Vec<f64>> {
        (0..k)
            .map(|_| {
                let raw: Vec<f64> = domain.dims().iter().map(|_| self.uniform_range(0.05, 1.0)).collect();
                let s: f64 = raw.iter().zip(domain.dims()).map(|(c, &n)| c * n as f64).sum();
                raw.into_iter().map(|c| c / s).collect()
            })
            .collect()
    }

    /// `k` random PSD targets normalised to sum to the identity of `codomain`.
    pub fn unital_assignment(&mut self, codomain: &BlockAlgebra, k: usize) -> Result<PositiveAssignment> {
        let raw = (0..k).map(|_| self.wishart_element(codomain)).collect();
        PositiveAssignment::normalized(codomain, raw)
    }

    pub fn tracial_map(
        &mut self,
        domain: &BlockAlgebra,
        family: MapFamily,
        k: usize,
        codomain: &BlockAlgebra,
    ) -> Result<TracialMap> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        match family {
            MapFamily::UsualTrace => Ok(TracialMap::usual_trace(domain)),
            MapFamily::CenterExpectation => Ok(TracialMap::center_expectation(domain)),
            MapFamily::ScaledBlockTrace => {
                let c = self.unital_coefficients(domain, k);
                TracialMap::scaled_block_trace(domain, c)
            }
            MapFamily::Composite => {
                let c = self.unital_coefficients(domain, k);
                let outer = self.unital_assignment(codomain, k)?;
                TracialMap::composite(domain, c, outer)
            }
        }
    }
}

fn positive_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    Ok(())
}

pub fn random_hermitian(dim: usize, seed: u64) -> Result<HermitianMatrix> {
    positive_dim(dim)?;
    Ok(Sampler::new(seed).hermitian(dim))
}

pub fn random_density(dim: usize, seed: u64) -> Result<HermitianMatrix> {
    positive_dim(dim)?;
    Ok(Sampler::new(seed).density(dim))
}

pub fn random_unitary(dim: usize, seed: u64) -> Result<ComplexMatrix> {
    positive_dim(dim)?;
    Ok(Sampler::new(seed).unitary(dim))
}

pub fn random_phi_density(map: &TracialMap, seed: u64) -> Result<AlgebraElement> {
    map.make_phi_density(seed)
}

/// A random unital map of the given family. `Composite` targets live in `M₂`.
pub fn random_tracial_map(domain: &BlockAlgebra, family: MapFamily, k: usize, seed: u64) -> Result<TracialMap> {
    let codomain = BlockAlgebra::full(2)?;
    Sampler::new(seed).tracial_map(domain, family, k, &codomain)
}
