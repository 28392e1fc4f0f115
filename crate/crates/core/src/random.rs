//! Seeded random sampling of algebra elements.
//!
//! Every trial stream is a ChaCha8 generator keyed by a 64-bit seed with the
//! stream number set to the trial index, so trials can be replayed in any order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, TracialAlgebra, C64};

pub type TrialRng = ChaCha8Rng;

/// Generator for trial `index` of the stream keyed by `seed`.
pub fn trial_rng(seed: u64, index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mixes a label into a seed so that different checks draw independent streams.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    // FNV-1a over the label, folded into the seed with a SplitMix64 finalizer.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Complex Gaussian matrix restricted to the block pattern of the algebra.
pub fn gaussian<R: Rng + ?Sized>(alg: &TracialAlgebra, rng: &mut R) -> ComplexMatrix {
    let n = alg.dim();
    ComplexMatrix::from_fn(n, |i, j| {
        let (re, im) = (normal(rng), normal(rng));
        if alg.block_of(i) == alg.block_of(j) {
            C64::new(re, im)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn hermitian<R: Rng + ?Sized>(alg: &TracialAlgebra, rng: &mut R) -> ComplexMatrix {
    gaussian(alg, rng).hermitian_part()
}

pub fn skew<R: Rng + ?Sized>(alg: &TracialAlgebra, rng: &mut R) -> ComplexMatrix {
    gaussian(alg, rng).skew_part()
}

/// Random skew-Hermitian element with prescribed operator norm.
pub fn skew_with_norm<R: Rng + ?Sized>(alg: &TracialAlgebra, rng: &mut R, norm: f64) -> ComplexMatrix {
    loop {
        let z = skew(alg, rng);
        let s = z.op_norm();
        if s > 1e-8 {
            return z.scale(norm / s);
        }
    }
}

/// Random Hermitian element with prescribed operator norm.
pub fn hermitian_with_norm<R: Rng + ?Sized>(alg: &TracialAlgebra, rng: &mut R, norm: f64) -> ComplexMatrix {
    loop {
        let z = hermitian(alg, rng);
        let s = z.op_norm();
        if s > 1e-8 {
            return z.scale(norm / s);
        }
    }
}

/// Haar-distributed unitary of the algebra (QR of a Gaussian matrix with phase correction).
pub fn unitary<R: Rng + ?Sized>(alg: &TracialAlgebra, rng: &mut R) -> ComplexMatrix {
    let g = gaussian(alg, rng);
    let qr = g.into_inner().qr();
    let (q, r) = qr.unpack();
    let n = alg.dim();
    let phases: Vec<C64> = (0..n)
        .map(|i| {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        })
        .collect();
    let q = ComplexMatrix::from_inner(q).expect("square");
    let u = &q * &ComplexMatrix::from_diagonal(&phases);
    // Householder QR mixes zero off-block entries only at rounding level; clean them.
    ComplexMatrix::from_fn(n, |i, j| if alg.block_of(i) == alg.block_of(j) { u[(i, j)] } else { C64::new(0.0, 0.0) })
}

/// Random skew-Hermitian element with operator norm uniform in `[0, max_norm)`.
pub fn skew_up_to<R: Rng + ?Sized>(alg: &TracialAlgebra, rng: &mut R, max_norm: f64) -> ComplexMatrix {
    let norm = max_norm * rng.random::<f64>();
    skew_with_norm(alg, rng, norm)
}

/// Random Hermitian element with operator norm uniform in `[lo, hi)`.
pub fn hermitian_between<R: Rng + ?Sized>(alg: &TracialAlgebra, rng: &mut R, lo: f64, hi: f64) -> ComplexMatrix {
    let norm = rng.random_range(lo..hi);
    hermitian_with_norm(alg, rng, norm)
}

/// Random point on the unit sphere of coefficient space.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..k).map(|_| normal(rng)).collect();
        let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if s > 1e-8 {
            return v.into_iter().map(|x| x / s).collect();
        }
    }
}

/// Random linear combination `sum c_k b_k` with standard normal coefficients.
pub fn combination<R: Rng + ?Sized>(basis: &[ComplexMatrix], n: usize, rng: &mut R) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(n);
    for b in basis {
        out.add_scaled(normal(rng), b);
    }
    out
}
