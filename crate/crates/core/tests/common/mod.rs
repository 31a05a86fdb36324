use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rcrt_core::{dynamic_range_check, GammaModuli, ResidueTable};

pub struct Instance {
    pub gm: GammaModuli,
    pub xs: Vec<BigInt>,
    pub errors: Vec<Vec<BigInt>>,
    pub delta: BigRational,
}

impl Instance {
    pub fn table(&self) -> ResidueTable {
        ResidueTable::with_errors(self.gm.clone(), &self.xs, &self.errors).unwrap()
    }
}

const POOL: [u64; 13] = [5, 7, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29, 31];

/// A random instance with `δ < Γ/(4N)` that satisfies the dynamic-range
/// conditions, with integer errors uniform in `[−⌊δ⌋, ⌊δ⌋]`.
pub fn instance(seed: u64, n: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma: u64 = rng.random_range(40..=200);
    let count = rng.random_range(2..=4);
    let parts = loop {
        let parts: Vec<u64> = POOL.choose_multiple(&mut rng, count).copied().collect();
        if parts.iter().enumerate().all(|(i, a)| parts[i + 1..].iter().all(|b| a.gcd(b) == 1)) {
            break parts;
        }
    };
    let gm = GammaModuli::from_u64s(gamma, &parts).unwrap();
    let bound = (gamma - 1) / (4 * n as u64);
    let delta = BigRational::from_integer(BigInt::from(bound));
    let product: u64 = parts.iter().product();
    // largest folding spread d with 2·C(N,k)·(d/2)^k < ∏M_l for every k
    let mut d = 1u64;
    while d + 1 < product && (2..=n).all(|k| 2.0 * binomial(n, k) * ((d + 1) as f64 / 2.0).powi(k as i32) < product as f64) {
        d += 1;
    }
    let widest = ((d - 1) * gamma).saturating_sub(2 * bound);
    loop {
        let spread = rng.random_range(0..=widest);
        let low = rng.random_range(0..=gamma * product / n as u64);
        let mut xs: Vec<u64> = (0..n).map(|_| low + rng.random_range(0..=spread)).collect();
        xs[0] = low;
        let width = xs.iter().max().unwrap() - low;
        let total: u64 = xs.iter().sum();
        let report = dynamic_range_check(n, &BigInt::from(width), &delta, &gm, &BigInt::from(total));
        if !report.pass {
            continue;
        }
        let e = bound as i64;
        let errors = (0..n).map(|_| (0..count).map(|_| BigInt::from(rng.random_range(-e..=e))).collect()).collect();
        return Instance { gm, xs: xs.into_iter().map(BigInt::from).collect(), errors, delta };
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
