use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

const WITNESSES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Miller-Rabin with the first thirteen prime bases; deterministic below
/// 3.3e24, probabilistic above.
pub fn is_prime(n: &BigInt) -> bool {
    if !n.is_positive() || n.is_one() {
        return false;
    }
    if let Some(small) = n.to_u64() {
        if small < 4 {
            return true;
        }
    }
    for &p in &WITNESSES {
        let p = BigInt::from(p);
        if *n == p {
            return true;
        }
        if n.is_multiple_of(&p) {
            return false;
        }
    }
    let n_minus_one: BigInt = n - 1u32;
    let twos = n_minus_one.trailing_zeros().unwrap_or(0);
    let odd = &n_minus_one >> twos;
    'witness: for &a in &WITNESSES {
        let mut x = BigInt::from(a).modpow(&odd, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..twos {
            x = (&x * &x).mod_floor(n);
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// All primes in `[lo, hi]` by a segmented sieve of Eratosthenes.
pub fn primes_in_range(lo: u64, hi: u64) -> Vec<u64> {
    if hi < 2 || lo > hi {
        return Vec::new();
    }
    let lo = lo.max(2);
    let root = (hi as f64).sqrt() as u64 + 1;
    let mut base = vec![true; (root + 1) as usize];
    let mut small = Vec::new();
    for i in 2..=root {
        if base[i as usize] {
            small.push(i);
            let mut j = i * i;
            while j <= root {
                base[j as usize] = false;
                j += i;
            }
        }
    }
    let mut segment = vec![true; (hi - lo + 1) as usize];
    for &p in &small {
        let start = (p * p).max(lo.div_ceil(p) * p);
        let mut j = start;
        while j <= hi {
            segment[(j - lo) as usize] = false;
            j += p;
        }
    }
    segment
        .iter()
        .enumerate()
        .filter(|(_, &keep)| keep)
        .map(|(i, _)| lo + i as u64)
        .collect()
}
