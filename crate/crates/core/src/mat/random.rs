//! Seeded random matrices for sampling-based checks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{hermitian_part, ComplexMatrix, HermitianOperator, C64};

pub type SampleRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with independent standard complex Gaussian entries.
pub fn random_complex<R: rand::Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        C64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn random_hermitian<R: rand::Rng>(rng: &mut R, d: usize) -> HermitianOperator {
    HermitianOperator::from_hermitian_part(&hermitian_part(&random_complex(rng, d, d)))
}

/// `G G† / Tr(G G†)` for a Ginibre matrix `G`.
pub fn random_density<R: rand::Rng>(rng: &mut R, d: usize) -> HermitianOperator {
    let g = random_complex(rng, d, d);
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    HermitianOperator::from_hermitian_part(&(rho / C64::new(tr, 0.0)))
}

/// Haar-ish unitary from the QR factorization of a Ginibre matrix.
pub fn random_unitary<R: rand::Rng>(rng: &mut R, d: usize) -> ComplexMatrix {
    let qr = random_complex(rng, d, d).qr();
    let (q, r) = qr.unpack();
    let phases = ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j && r[(i, i)].norm() > 0.0 {
            r[(i, i)] / r[(i, i)].norm()
        } else if i == j {
            C64::new(1.0, 0.0)
        } else {
            C64::default()
        }
    });
    q * phases
}
