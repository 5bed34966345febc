//! Prime enumeration and the two-modulus Chinese remainder step.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PrimesError {
    #[error("moduli {0} and {1} are not coprime")]
    NonCoprimeModuli(i128, i128),
    #[error("sieve limit must be at least 2")]
    LimitTooSmall,
}

/// All primes `<= limit`, ascending. Segmented over odd numbers so the
/// working set stays cache-sized even for limits near 10^8.
pub fn prime_sieve(limit: u64) -> Result<Vec<u64>, PrimesError> {
    if limit < 2 {
        return Err(PrimesError::LimitTooSmall);
    }
    let mut primes = vec![2u64];
    if limit == 2 {
        return Ok(primes);
    }
    let root = (limit as f64).sqrt() as u64 + 1;

    // Base sieve of odd numbers up to sqrt(limit).
    let base_len = (root / 2 + 1) as usize;
    let mut base_composite = vec![false; base_len];
    let mut base_odd_primes: Vec<u64> = Vec::new();
    for i in 1..base_len {
        if !base_composite[i] {
            let p = 2 * i as u64 + 1;
            base_odd_primes.push(p);
            let mut j = (p * p) / 2;
            while (j as usize) < base_len {
                base_composite[j as usize] = true;
                j += p;
            }
        }
    }

    const SEGMENT: u64 = 1 << 16;
    let mut mark = vec![false; SEGMENT as usize];
    let mut low = 3u64;
    while low <= limit {
        let high = (low + 2 * SEGMENT - 2).min(limit); // odd values low..=high
        let len = ((high - low) / 2 + 1) as usize;
        mark[..len].fill(false);
        for &p in &base_odd_primes {
            if p * p > high {
                break;
            }
            let mut start = p * p;
            if start < low {
                let k = (low - start).div_ceil(2 * p);
                start += 2 * p * k;
            }
            let mut idx = (start - low) / 2;
            while (idx as usize) < len {
                mark[idx as usize] = true;
                idx += p;
            }
        }
        for (i, &composite) in mark[..len].iter().enumerate() {
            let n = low + 2 * i as u64;
            if !composite && n >= 3 {
                primes.push(n);
            }
        }
        low = high + 2;
    }
    Ok(primes)
}

/// Prime-counting helper over a sieve output.
pub fn count_up_to(primes: &[u64], x: u64) -> usize {
    primes.partition_point(|&p| p <= x)
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// The unique `x` in `[0, n1*n2)` with `x = a1 mod n1` and `x = a2 mod n2`.
pub fn crt_pair(a1: i128, n1: i128, a2: i128, n2: i128) -> Result<i128, PrimesError> {
    assert!(n1 > 0 && n2 > 0, "moduli must be positive");
    let (g, u, _) = ext_gcd(n1, n2);
    if g != 1 {
        return Err(PrimesError::NonCoprimeModuli(n1, n2));
    }
    let n = n1 * n2;
    let a1 = a1.rem_euclid(n1);
    let a2 = a2.rem_euclid(n2);
    // x = a1 + n1 * u * (a2 - a1) mod n
    let diff = (a2 - a1).rem_euclid(n2);
    let x = (a1 + ((n1 * (u.rem_euclid(n2))) % n) * diff) % n;
    Ok(x.rem_euclid(n))
}
