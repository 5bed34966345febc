//! Selection of integer Frobenius characteristic polynomials
//! `x^2 - a*x + r^k` under congruence constraints, with the weight-`k`
//! purity condition `a^2 < 4 r^k` on the roots.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::primes::{crt_pair, PrimesError};
use crate::residue::is_prime_u64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharPolyError {
    #[error("no representative of the trace class lies in the purity window for r={r}, k={k}")]
    Infeasible { r: u64, k: u32 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("r must differ from the constraint primes")]
    ConstraintClash,
    #[error(transparent)]
    Crt(#[from] PrimesError),
    #[error("modulus p^m overflows the supported width")]
    ModulusOverflow,
}

/// A trace congruence `a = t mod p^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceConstraint {
    pub p: u64,
    pub m: u32,
    pub t: i128,
}

impl TraceConstraint {
    pub fn new(p: u64, m: u32, t: i128) -> Result<Self, CharPolyError> {
        if !is_prime_u64(p) {
            return Err(CharPolyError::NotPrime(p));
        }
        Ok(TraceConstraint { p, m, t })
    }

    pub fn modulus(&self) -> Result<i128, CharPolyError> {
        let mut pm: i128 = 1;
        for _ in 0..self.m {
            pm = pm
                .checked_mul(self.p as i128)
                .ok_or(CharPolyError::ModulusOverflow)?;
        }
        Ok(pm)
    }
}

/// A chosen polynomial `x^2 - a*x + r^k` together with the constraints it
/// satisfies and its purity status.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharPolyChoice {
    pub r: u64,
    pub k: u32,
    pub a: i128,
    pub constraints: Vec<TraceConstraint>,
    pub pure: bool,
}

impl CharPolyChoice {
    pub fn satisfies_constraints(&self) -> bool {
        self.constraints.iter().all(|c| {
            let pm = match c.modulus() {
                Ok(pm) => pm,
                Err(_) => return false,
            };
            (self.a - c.t).rem_euclid(pm) == 0
        })
    }
}

/// `4 r^k` when it fits; `None` stands for "larger than any square we test".
fn four_r_k(r: u64, k: u32) -> Option<u128> {
    (r as u128).checked_pow(k)?.checked_mul(4)
}

fn square_below(a: i128, bound: Option<u128>) -> bool {
    match bound {
        None => true,
        Some(b) => a
            .unsigned_abs()
            .checked_mul(a.unsigned_abs())
            .is_some_and(|sq| sq < b),
    }
}

fn square_at_most(a: i128, bound: Option<u128>) -> bool {
    match bound {
        None => true,
        Some(b) => a
            .unsigned_abs()
            .checked_mul(a.unsigned_abs())
            .is_some_and(|sq| sq <= b),
    }
}

/// Representative of `t mod modulus` with minimal absolute value. The
/// modulus is odd here, so the representative is unique.
fn centered_representative(t: i128, modulus: i128) -> i128 {
    let r = t.rem_euclid(modulus);
    if 2 * r > modulus {
        r - modulus
    } else {
        r
    }
}

/// Both roots of `x^2 - a*x + r^k` have absolute value `r^(k/2)` exactly when
/// `a^2 <= 4 r^k`; the boundary is admitted (the double root is rational).
pub fn is_weil(a: i128, r: u64, k: u32) -> bool {
    square_at_most(a, four_r_k(r, k))
}

/// `(p^m / 2)^(2/k)`: every prime strictly above this is guaranteed a pure
/// choice for every trace residue mod `p^m`. The bound is sufficient, not
/// sharp; feasible primes below it exist.
pub fn feasibility_threshold(p: u64, m: u32, k: u32) -> f64 {
    let half = (p as f64).powi(m as i32) / 2.0;
    half.powf(2.0 / k as f64)
}

/// The trace of minimal absolute value meeting one congruence constraint,
/// required strictly inside the purity window (`a^2 < 4 r^k`).
pub fn purity_window(
    r: u64,
    k: u32,
    constraint: TraceConstraint,
) -> Result<CharPolyChoice, CharPolyError> {
    choose(r, k, &[constraint], true)
}

/// Same selection without the purity requirement (the weight-0 escape hatch);
/// always succeeds and records whether the choice happens to be pure.
pub fn unconstrained_window(
    r: u64,
    k: u32,
    constraint: TraceConstraint,
) -> Result<CharPolyChoice, CharPolyError> {
    choose(r, k, &[constraint], false)
}

/// Minimal-|a| trace meeting two congruence constraints at distinct primes,
/// combined by the Chinese remainder theorem.
pub fn compatible_choice(
    r: u64,
    k: u32,
    c1: TraceConstraint,
    c2: TraceConstraint,
) -> Result<CharPolyChoice, CharPolyError> {
    choose(r, k, &[c1, c2], true)
}

fn choose(
    r: u64,
    k: u32,
    constraints: &[TraceConstraint],
    require_pure: bool,
) -> Result<CharPolyChoice, CharPolyError> {
    if !is_prime_u64(r) {
        return Err(CharPolyError::NotPrime(r));
    }
    if constraints.iter().any(|c| c.p == r) {
        return Err(CharPolyError::ConstraintClash);
    }
    let (mut t, mut modulus) = (0i128, 1i128);
    for c in constraints {
        let pm = c.modulus()?;
        t = crt_pair(t, modulus, c.t, pm)?;
        modulus = modulus
            .checked_mul(pm)
            .ok_or(CharPolyError::ModulusOverflow)?;
    }
    let a = centered_representative(t, modulus);
    let bound = four_r_k(r, k);
    let pure = square_below(a, bound);
    if require_pure && !pure {
        // |a| is minimal in its class, so every other representative has a
        // larger square.
        return Err(CharPolyError::Infeasible { r, k });
    }
    Ok(CharPolyChoice {
        r,
        k,
        a,
        constraints: constraints.to_vec(),
        pure,
    })
}

/// Characteristic polynomial `(X - x)(X - y)` of an upper-triangular
/// Frobenius image with the given diagonal, as `(trace, det)` over the
/// diagonal entries' ring.
pub fn ramified_charpoly(
    x: crate::residue::ResidueInt,
    y: crate::residue::ResidueInt,
) -> (crate::residue::ResidueInt, crate::residue::ResidueInt) {
    (x + y, x * y)
}
