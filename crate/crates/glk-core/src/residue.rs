//! Exact elements of `Z/p^m` with tracked precision.
//!
//! Values are kept in the canonical range `[0, p^m)`. Arithmetic between
//! operands with different `(p, m)` is a bug in the caller and panics;
//! lowering precision is only done through the explicit [`ResidueInt::reduce`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResidueError {
    #[error("modulus base {0} is not prime")]
    NotPrime(u64),
    #[error("precision exponent must be at least 1")]
    ZeroPrecision,
    #[error("p^m overflows the supported width (p={p}, m={m})")]
    ModulusOverflow { p: u64, m: u32 },
    #[error("cannot raise precision from {have} to {want}")]
    PrecisionRaise { have: u32, want: u32 },
    #[error("{0} is not a unit")]
    NotAUnit(u128),
}

/// Deterministic Miller-Rabin over the bases that decide primality for all
/// 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n.is_multiple_of(q) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let pow = |mut b: u64, mut e: u64| -> u64 {
        let mut acc: u128 = 1;
        let m = n as u128;
        let mut bb = b as u128 % m;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * bb % m;
            }
            bb = bb * bb % m;
            e >>= 1;
        }
        b = acc as u64;
        b
    };
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = pow(x, 2);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The shared modulus `p^m` of a family of residues.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Modulus {
    p: u64,
    m: u32,
    pm: u128,
}

impl Modulus {
    pub fn new(p: u64, m: u32) -> Result<Self, ResidueError> {
        if !is_prime_u64(p) {
            return Err(ResidueError::NotPrime(p));
        }
        if m == 0 {
            return Err(ResidueError::ZeroPrecision);
        }
        let mut pm: u128 = 1;
        for _ in 0..m {
            pm = pm
                .checked_mul(p as u128)
                .ok_or(ResidueError::ModulusOverflow { p, m })?;
        }
        Ok(Modulus { p, m, pm })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.m
    }

    pub fn value(&self) -> u128 {
        self.pm
    }

    /// `p^e` for `e <= m`.
    pub fn p_power(&self, e: u32) -> u128 {
        assert!(e <= self.m);
        (0..e).fold(1u128, |acc, _| acc * self.p as u128)
    }

    pub fn reduce_to(&self, m: u32) -> Result<Modulus, ResidueError> {
        if m > self.m {
            return Err(ResidueError::PrecisionRaise {
                have: self.m,
                want: m,
            });
        }
        Modulus::new(self.p, m)
    }

    fn mul_mod(&self, a: u128, b: u128) -> u128 {
        if self.pm <= u64::MAX as u128 {
            return a * b % self.pm;
        }
        // Double-and-add: operands may exceed 64 bits, so a plain widening
        // multiply is not available.
        let mut acc: u128 = 0;
        let mut a = a % self.pm;
        let mut b = b % self.pm;
        while b > 0 {
            if b & 1 == 1 {
                acc += a;
                if acc >= self.pm {
                    acc -= self.pm;
                }
            }
            a <<= 1;
            if a >= self.pm {
                a -= self.pm;
            }
            b >>= 1;
        }
        acc
    }
}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.p, self.m)
    }
}

/// An exact element of `Z/p^m`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResidueInt {
    value: u128,
    modulus: Modulus,
}

impl ResidueInt {
    pub fn new(value: u128, modulus: Modulus) -> Self {
        ResidueInt {
            value: value % modulus.pm,
            modulus,
        }
    }

    pub fn from_i128(value: i128, modulus: Modulus) -> Self {
        let pm = modulus.pm as i128;
        let mut v = value % pm;
        if v < 0 {
            v += pm;
        }
        ResidueInt {
            value: v as u128,
            modulus,
        }
    }

    pub fn zero(modulus: Modulus) -> Self {
        ResidueInt { value: 0, modulus }
    }

    pub fn one(modulus: Modulus) -> Self {
        ResidueInt::new(1, modulus)
    }

    pub fn value(&self) -> u128 {
        self.value
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    /// Units are exactly the residues prime to `p`.
    pub fn is_unit(&self) -> bool {
        !self.value.is_multiple_of(self.modulus.p as u128)
    }

    /// Exact truncation to a lower precision `m2 <= m`.
    pub fn reduce(&self, m2: u32) -> Result<ResidueInt, ResidueError> {
        let modulus = self.modulus.reduce_to(m2)?;
        Ok(ResidueInt::new(self.value % modulus.pm, modulus))
    }

    pub fn pow(&self, mut exp: u128) -> ResidueInt {
        let mut base = self.value;
        let mut acc: u128 = 1;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.modulus.mul_mod(acc, base);
            }
            base = self.modulus.mul_mod(base, base);
            exp >>= 1;
        }
        ResidueInt {
            value: acc,
            modulus: self.modulus,
        }
    }

    /// Inverse of a unit: Fermat inverse mod `p`, then Hensel-lifted up to `p^m`.
    pub fn inverse(&self) -> Result<ResidueInt, ResidueError> {
        if !self.is_unit() {
            return Err(ResidueError::NotAUnit(self.value));
        }
        let p = self.modulus.p as u128;
        let a_mod_p = self.value % p;
        let mut inv: u128 = {
            // a^(p-2) mod p
            let mut acc: u128 = 1;
            let mut b = a_mod_p;
            let mut e = self.modulus.p - 2;
            while e > 0 {
                if e & 1 == 1 {
                    acc = acc * b % p;
                }
                b = b * b % p;
                e >>= 1;
            }
            acc
        };
        // x <- x(2 - ax) doubles the precision each step.
        let mut prec: u32 = 1;
        while prec < self.modulus.m {
            prec = (prec * 2).min(self.modulus.m);
            let md = Modulus::new(self.modulus.p, prec).expect("sub-modulus");
            let ax = md.mul_mod(self.value % md.pm, inv % md.pm);
            let two_minus = if ax <= 2 { 2 - ax } else { md.pm + 2 - ax };
            inv = md.mul_mod(inv % md.pm, two_minus);
        }
        Ok(ResidueInt {
            value: inv % self.modulus.pm,
            modulus: self.modulus,
        })
    }

    fn assert_same(&self, other: &ResidueInt) {
        assert_eq!(
            self.modulus, other.modulus,
            "mixed moduli: {:?} vs {:?}; reduce() explicitly first",
            self.modulus, other.modulus
        );
    }
}

impl Add for ResidueInt {
    type Output = ResidueInt;
    fn add(self, rhs: ResidueInt) -> ResidueInt {
        self.assert_same(&rhs);
        let mut v = self.value + rhs.value;
        if v >= self.modulus.pm {
            v -= self.modulus.pm;
        }
        ResidueInt {
            value: v,
            modulus: self.modulus,
        }
    }
}

impl Sub for ResidueInt {
    type Output = ResidueInt;
    fn sub(self, rhs: ResidueInt) -> ResidueInt {
        self.assert_same(&rhs);
        let v = if self.value >= rhs.value {
            self.value - rhs.value
        } else {
            self.modulus.pm - rhs.value + self.value
        };
        ResidueInt {
            value: v,
            modulus: self.modulus,
        }
    }
}

impl Mul for ResidueInt {
    type Output = ResidueInt;
    fn mul(self, rhs: ResidueInt) -> ResidueInt {
        self.assert_same(&rhs);
        ResidueInt {
            value: self.modulus.mul_mod(self.value, rhs.value),
            modulus: self.modulus,
        }
    }
}

impl Neg for ResidueInt {
    type Output = ResidueInt;
    fn neg(self) -> ResidueInt {
        if self.value == 0 {
            self
        } else {
            ResidueInt {
                value: self.modulus.pm - self.value,
                modulus: self.modulus,
            }
        }
    }
}

impl fmt::Debug for ResidueInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {:?})", self.value, self.modulus)
    }
}

impl fmt::Display for ResidueInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Power of the cyclotomic character: evaluation at a prime `r != p`
/// is `r^k mod p^m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CyclotomicChar {
    modulus: Modulus,
    k: u32,
}

impl CyclotomicChar {
    pub fn new(modulus: Modulus, k: u32) -> Self {
        CyclotomicChar { modulus, k }
    }

    pub fn weight(&self) -> u32 {
        self.k
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn eval(&self, r: u64) -> ResidueInt {
        assert_ne!(r, self.modulus.p, "evaluation only away from p");
        ResidueInt::new(r as u128, self.modulus).pow(self.k as u128)
    }
}
