//! Univariate polynomials over a prime field `F_p`, with squarefree testing
//! and distinct-degree factorization. Only the factor degrees are needed
//! downstream (they give the cycle type of Frobenius), so no equal-degree
//! splitting is done.

use thiserror::Error;

use crate::residue::is_prime_u64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("coefficient field characteristic {0} is not prime")]
    NotPrime(u64),
    #[error("polynomial is not squarefree mod {0}")]
    NotSquarefree(u64),
    #[error("zero polynomial")]
    Zero,
}

/// Dense polynomial over `F_p`, coefficients ascending, normalized so the
/// leading coefficient is nonzero.
#[derive(Clone, PartialEq, Eq)]
pub struct PolyOverFp {
    p: u64,
    coeffs: Vec<u64>,
}

impl PolyOverFp {
    /// Coefficients ascending (constant term first), arbitrary integers.
    pub fn new(p: u64, coeffs: &[i128]) -> Result<Self, PolyError> {
        if !is_prime_u64(p) {
            return Err(PolyError::NotPrime(p));
        }
        let reduced: Vec<u64> = coeffs
            .iter()
            .map(|&c| c.rem_euclid(p as i128) as u64)
            .collect();
        let mut poly = PolyOverFp { p, coeffs: reduced };
        poly.normalize();
        Ok(poly)
    }

    /// Coefficients descending (leading term first), the CLI convention.
    pub fn from_descending(p: u64, coeffs: &[i128]) -> Result<Self, PolyError> {
        let asc: Vec<i128> = coeffs.iter().rev().copied().collect();
        PolyOverFp::new(p, &asc)
    }

    pub fn zero(p: u64) -> Self {
        PolyOverFp { p, coeffs: vec![] }
    }

    pub fn one(p: u64) -> Self {
        PolyOverFp { p, coeffs: vec![1] }
    }

    pub fn x(p: u64) -> Self {
        PolyOverFp {
            p,
            coeffs: vec![0, 1],
        }
    }

    fn normalize(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<u64> {
        self.coeffs.last().copied()
    }

    pub fn eval(&self, x: u64) -> u64 {
        let p = self.p as u128;
        let x = (x as u128) % p;
        let mut acc: u128 = 0;
        for &c in self.coeffs.iter().rev() {
            acc = (acc * x + c as u128) % p;
        }
        acc as u64
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == Some(1)
    }

    pub fn monic(&self) -> Result<PolyOverFp, PolyError> {
        let lead = self.leading().ok_or(PolyError::Zero)?;
        if lead == 1 {
            return Ok(self.clone());
        }
        let inv = mod_inv(lead, self.p);
        Ok(self.scale(inv))
    }

    pub fn scale(&self, s: u64) -> PolyOverFp {
        let p = self.p as u128;
        let s = s as u128 % p;
        let mut out = PolyOverFp {
            p: self.p,
            coeffs: self
                .coeffs
                .iter()
                .map(|&c| (c as u128 * s % p) as u64)
                .collect(),
        };
        out.normalize();
        out
    }

    pub fn add(&self, other: &PolyOverFp) -> PolyOverFp {
        assert_eq!(self.p, other.p);
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![0u64; n];
        for (i, c) in coeffs.iter_mut().enumerate() {
            let x = self.coeffs.get(i).copied().unwrap_or(0);
            let y = other.coeffs.get(i).copied().unwrap_or(0);
            *c = (x + y) % self.p;
        }
        let mut out = PolyOverFp { p: self.p, coeffs };
        out.normalize();
        out
    }

    pub fn sub(&self, other: &PolyOverFp) -> PolyOverFp {
        assert_eq!(self.p, other.p);
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![0u64; n];
        for (i, c) in coeffs.iter_mut().enumerate() {
            let x = self.coeffs.get(i).copied().unwrap_or(0);
            let y = other.coeffs.get(i).copied().unwrap_or(0);
            *c = (x + self.p - y) % self.p;
        }
        let mut out = PolyOverFp { p: self.p, coeffs };
        out.normalize();
        out
    }

    pub fn mul(&self, other: &PolyOverFp) -> PolyOverFp {
        assert_eq!(self.p, other.p);
        if self.is_zero() || other.is_zero() {
            return PolyOverFp::zero(self.p);
        }
        let p = self.p as u128;
        let mut coeffs = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &x) in self.coeffs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in other.coeffs.iter().enumerate() {
                let idx = i + j;
                coeffs[idx] = ((coeffs[idx] as u128 + x as u128 * y as u128) % p) as u64;
            }
        }
        let mut out = PolyOverFp { p: self.p, coeffs };
        out.normalize();
        out
    }

    /// Remainder of `self` by a nonzero divisor.
    pub fn rem(&self, divisor: &PolyOverFp) -> PolyOverFp {
        assert_eq!(self.p, divisor.p);
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let p = self.p as u128;
        let dlead_inv = mod_inv(divisor.leading().unwrap(), self.p) as u128;
        let dd = divisor.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        while rem.len() > dd && !rem.is_empty() {
            let lead = *rem.last().unwrap() as u128;
            if lead == 0 {
                rem.pop();
                continue;
            }
            let q = lead * dlead_inv % p;
            let shift = rem.len() - 1 - dd;
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                let idx = shift + j;
                let sub = q * dc as u128 % p;
                rem[idx] = ((rem[idx] as u128 + p - sub) % p) as u64;
            }
            rem.pop();
        }
        let mut out = PolyOverFp {
            p: self.p,
            coeffs: rem,
        };
        out.normalize();
        out
    }

    pub fn is_divisible_by(&self, candidate_divisor: &PolyOverFp) -> bool {
        self.rem(candidate_divisor).is_zero()
    }

    /// Quotient assuming exact division.
    pub fn div_exact(&self, divisor: &PolyOverFp) -> PolyOverFp {
        assert_eq!(self.p, divisor.p);
        let p = self.p as u128;
        let dlead_inv = mod_inv(divisor.leading().expect("nonzero divisor"), self.p) as u128;
        let dd = divisor.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0u64; self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd {
            let lead = *rem.last().unwrap() as u128;
            let shift = rem.len() - 1 - dd;
            if lead != 0 {
                let q = lead * dlead_inv % p;
                quot[shift] = q as u64;
                for (j, &dc) in divisor.coeffs.iter().enumerate() {
                    let idx = shift + j;
                    let sub = q * dc as u128 % p;
                    rem[idx] = ((rem[idx] as u128 + p - sub) % p) as u64;
                }
            }
            rem.pop();
        }
        let mut r = PolyOverFp {
            p: self.p,
            coeffs: rem,
        };
        r.normalize();
        assert!(r.is_zero(), "div_exact with nonzero remainder");
        let mut out = PolyOverFp {
            p: self.p,
            coeffs: quot,
        };
        out.normalize();
        out
    }

    pub fn gcd(&self, other: &PolyOverFp) -> PolyOverFp {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic().unwrap()
        }
    }

    pub fn derivative(&self) -> PolyOverFp {
        if self.coeffs.len() <= 1 {
            return PolyOverFp::zero(self.p);
        }
        let p = self.p as u128;
        let coeffs: Vec<u64> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| (c as u128 * (i as u128 % p) % p) as u64)
            .collect();
        let mut out = PolyOverFp { p: self.p, coeffs };
        out.normalize();
        out
    }

    pub fn is_squarefree(&self) -> bool {
        if self.is_zero() {
            return false;
        }
        let g = self.gcd(&self.derivative());
        g.degree() == Some(0)
    }

    /// `x^e mod self`, by repeated squaring in the quotient ring.
    pub fn pow_x_mod(&self, e: u64) -> PolyOverFp {
        let mut acc = PolyOverFp::one(self.p);
        let mut base = PolyOverFp::x(self.p).rem(self);
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(self);
            }
            base = base.mul(&base).rem(self);
            e >>= 1;
        }
        acc
    }
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // Fermat; p prime, a nonzero mod p.
    let mut acc: u128 = 1;
    let mut b = a as u128 % p as u128;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p as u128;
        }
        b = b * b % p as u128;
        e >>= 1;
    }
    acc as u64
}

/// Distinct-degree factorization of a squarefree polynomial: the multiset of
/// irreducible-factor degrees, as ascending `(degree, count)` pairs.
pub fn distinct_degree_factor(f: &PolyOverFp) -> Result<Vec<(usize, usize)>, PolyError> {
    let deg = f.degree().ok_or(PolyError::Zero)?;
    if deg == 0 {
        return Ok(vec![]);
    }
    if !f.is_squarefree() {
        return Err(PolyError::NotSquarefree(f.p));
    }
    let mut remaining = f.monic()?;
    let mut out = Vec::new();
    // h starts as x^p mod f and is raised to the p-th power each round,
    // so at round d it is x^(p^d) mod (current remaining factor).
    let mut h = remaining.pow_x_mod(f.p);
    let mut d = 1usize;
    while remaining.degree().unwrap_or(0) >= 1 {
        let rdeg = remaining.degree().unwrap();
        if rdeg < 2 * d {
            // What is left is a single irreducible factor.
            out.push((rdeg, 1));
            break;
        }
        let diff = h.sub(&PolyOverFp::x(f.p));
        let g = remaining.gcd(&diff);
        if let Some(gdeg) = g.degree() {
            if gdeg > 0 {
                assert_eq!(gdeg % d, 0);
                out.push((d, gdeg / d));
                remaining = remaining.div_exact(&g);
                h = h.rem(&remaining);
            }
        }
        d += 1;
        if remaining.degree().unwrap_or(0) == 0 {
            break;
        }
        // Raise to the p-th power once per degree round.
        let mut step = h.clone();
        let mut acc = PolyOverFp::one(f.p);
        let mut e = f.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&step).rem(&remaining);
            }
            step = step.mul(&step).rem(&remaining);
            e >>= 1;
        }
        h = acc;
    }
    out.sort_unstable();
    Ok(out)
}

/// Least common multiple of the factor degrees: the order of the permutation
/// induced by Frobenius on the roots.
pub fn factor_degree_lcm(degrees: &[(usize, usize)]) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    degrees
        .iter()
        .fold(1u64, |acc, &(d, _)| acc / gcd(acc, d as u64) * d as u64)
}

/// Brute-force factoring oracle used by tests in this crate: factor by trial
/// division against every monic polynomial of degree at most `deg(f)/2`,
/// smallest degree first. Independent of the distinct-degree route.
#[cfg(test)]
pub(crate) fn factor_degrees_bruteforce(f: &PolyOverFp) -> Vec<(usize, usize)> {
    let p = f.p();
    let mut remaining = f.monic().unwrap();
    let mut counts: std::collections::BTreeMap<usize, usize> = Default::default();
    let total_deg = remaining.degree().unwrap();
    for d in 1..=total_deg / 2 {
        // All monic polynomials of degree d.
        let count = (p as u128).pow(d as u32);
        for idx in 0..count {
            let mut coeffs: Vec<i128> = Vec::with_capacity(d + 1);
            let mut n = idx;
            for _ in 0..d {
                coeffs.push((n % p as u128) as i128);
                n /= p as u128;
            }
            coeffs.push(1);
            let cand = PolyOverFp::new(p, &coeffs).unwrap();
            // Dividing out smaller degrees first makes every degree-d
            // divisor of the cofactor irreducible.
            while remaining.is_divisible_by(&cand) && remaining.degree().unwrap() >= d {
                remaining = remaining.div_exact(&cand);
                *counts.entry(d).or_insert(0) += 1;
            }
            if remaining.degree() == Some(0) {
                break;
            }
        }
    }
    if let Some(d) = remaining.degree() {
        if d > 0 {
            *counts.entry(d).or_insert(0) += 1;
        }
    }
    counts.into_iter().collect()
}
