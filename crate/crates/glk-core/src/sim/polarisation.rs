//! The one-or-two-prime search that removes a local obstruction at an
//! auxiliary prime without disturbing any other place: either a candidate
//! with vanishing self value works alone, or two candidates from the same
//! majority class are combined so the evaluation matrix has determinant
//! zero and unequal rows.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::sim::sampler::{CocycleProfile, SamplerError, SyntheticChebotarev};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolarisationError {
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error("empty sample")]
    EmptySample,
}

/// Outcome of one search: the chosen labels, combination coefficients, and
/// the evaluations that the caller audits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PolarisationRecord {
    pub q: u64,
    pub chosen: Vec<u64>,
    pub coefficients: Vec<u64>,
    pub singleton: bool,
    pub first_self_value: u64,
    /// Pair route only: the majority self value and cup class.
    pub majority_self_value: Option<u64>,
    pub majority_cup_value: Option<u64>,
    /// Pair route only: rows (y, x) and (y^2/x, y).
    pub matrix: Option<[[u64; 2]; 2]>,
    /// Combined class evaluated at each chosen prime; all zero.
    pub combined_at_chosen: Vec<u64>,
    /// Combined class evaluated at the target prime; never zero.
    pub combined_at_q: u64,
    /// Local invariants of the auxiliary cup product, summing to zero:
    /// the last entry is constructed as the negated partial sum.
    pub invariants: Vec<(u64, u64)>,
}

/// Modal nonzero self value (ties to the smallest representative), the
/// matching sub-sample, then the modal cup value within it and its
/// sub-sample. Returns indices into `profiles`.
pub fn majority_class_filter(
    profiles: &[CocycleProfile],
) -> Result<(u64, Vec<usize>, u64, Vec<usize>), PolarisationError> {
    if profiles.is_empty() {
        return Err(PolarisationError::EmptySample);
    }
    let mode = |values: &[(usize, u64)]| -> Option<u64> {
        let mut counts: std::collections::BTreeMap<u64, usize> = Default::default();
        for &(_, v) in values {
            *counts.entry(v).or_insert(0) += 1;
        }
        // BTreeMap order makes the smallest value win ties.
        counts
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(v, _)| v)
    };
    let nonzero: Vec<(usize, u64)> = profiles
        .iter()
        .enumerate()
        .filter(|(_, p)| p.self_value != 0)
        .map(|(i, p)| (i, p.self_value))
        .collect();
    let y = mode(&nonzero).ok_or(PolarisationError::EmptySample)?;
    let y_indices: Vec<usize> = nonzero
        .iter()
        .filter(|&&(_, v)| v == y)
        .map(|&(i, _)| i)
        .collect();
    let cups: Vec<(usize, u64)> = y_indices
        .iter()
        .map(|&i| (i, profiles[i].cup_value))
        .collect();
    let z = mode(&cups).ok_or(PolarisationError::EmptySample)?;
    let z_indices: Vec<usize> = cups
        .iter()
        .filter(|&&(_, v)| v == z)
        .map(|&(i, _)| i)
        .collect();
    Ok((y, y_indices, z, z_indices))
}

fn inv_mod(a: u64, p: u64) -> u64 {
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

/// Search the sampler's candidate stream for a polarising set at target
/// prime `q`, with `sample_size` profiles feeding the majority filter.
pub fn find_polarisation_pair(
    sampler: &mut SyntheticChebotarev,
    q: u64,
    sample_size: usize,
) -> Result<PolarisationRecord, PolarisationError> {
    let p = sampler.p;
    let first = sampler.draw_profile()?;
    if first.self_value == 0 {
        // Singleton shortcut: the class vanishes at its own Frobenius, so it
        // corrects q without obstructing itself.
        return Ok(PolarisationRecord {
            q,
            chosen: vec![first.label],
            coefficients: vec![1],
            singleton: true,
            first_self_value: 0,
            majority_self_value: None,
            majority_cup_value: None,
            matrix: None,
            combined_at_chosen: vec![first.self_value],
            combined_at_q: first.q_value,
            invariants: vec![],
        });
    }

    let mut profiles = vec![first];
    loop {
        while profiles.len() < sample_size {
            profiles.push(sampler.draw_profile()?);
        }
        let (y, _y_indices, z, z_indices) = majority_class_filter(&profiles)?;
        if z_indices.len() < 2 {
            // Rare at any sensible sample size; grow the sample and refilter.
            sample_grow(&mut profiles, sampler, sample_size)?;
            continue;
        }
        let t1 = profiles[z_indices[0]];
        let t2 = profiles[z_indices[1]];

        // The cross evaluations are Chebotarev-conditioned choices: pick
        // x not in {0, y}; reciprocity then forces the opposite corner to
        // y^2/x. Rows (y, x) and (y^2/x, y) have determinant zero and,
        // since x != y, unequal rows.
        let x = {
            let mut x = sampler.draw_unit();
            while x == y {
                x = sampler.draw_unit();
            }
            x
        };
        let y2_over_x = y * y % p * inv_mod(x, p) % p;

        // alpha_1 f_1 + alpha_2 f_2 vanishing at both chosen primes:
        // alpha_2 = 1, alpha_1 = -y/x.
        let alpha2 = 1u64;
        let alpha1 = (p - y * inv_mod(x, p) % p) % p;
        let at_t1 = (alpha1 * y + alpha2 * y2_over_x) % p;
        let at_t2 = (alpha1 * x + alpha2 * y) % p;
        let at_q = (alpha1 * t1.q_value + alpha2 * t2.q_value) % p;

        // Local invariants of the auxiliary cup product: supported at the
        // two chosen primes, the second constructed as the negated partial
        // sum; zero at q where both classes are unramified.
        let inv_t1 = y2_over_x * z % p;
        let invariants = vec![(t1.label, inv_t1), (t2.label, (p - inv_t1) % p), (q, 0)];

        return Ok(PolarisationRecord {
            q,
            chosen: vec![t1.label, t2.label],
            coefficients: vec![alpha1, alpha2],
            singleton: false,
            first_self_value: profiles[0].self_value,
            majority_self_value: Some(y),
            majority_cup_value: Some(z),
            matrix: Some([[y, x], [y2_over_x, y]]),
            combined_at_chosen: vec![at_t1, at_t2],
            combined_at_q: at_q,
            invariants,
        });
    }
}

fn sample_grow(
    profiles: &mut Vec<CocycleProfile>,
    sampler: &mut SyntheticChebotarev,
    step: usize,
) -> Result<(), PolarisationError> {
    for _ in 0..step.max(8) {
        profiles.push(sampler.draw_profile()?);
    }
    Ok(())
}

/// Sum of local invariants vanishes mod p.
pub fn reciprocity_audit(invariants: &[(u64, u64)], p: u64) -> bool {
    invariants.iter().map(|&(_, v)| v as u128).sum::<u128>() % p as u128 == 0
}

/// The density-shrinking constant `1 - (p-2)/p^2`, in `(0, 1)` for `p >= 5`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GammaConstant {
    pub p: u64,
    pub numer: u64,
    pub denom: u64,
}

pub fn gamma_constant(p: u64) -> GammaConstant {
    GammaConstant {
        p,
        numer: p * p - (p - 2),
        denom: p * p,
    }
}

/// `D * gamma^n` in exact rational arithmetic.
pub fn density_shrink(d: &BigRational, p: u64, n: u32) -> BigRational {
    let gamma = gamma_constant(p);
    let gamma = BigRational::new(BigInt::from(gamma.numer), BigInt::from(gamma.denom));
    let mut acc = d.clone();
    for _ in 0..n {
        acc *= gamma.clone();
    }
    acc
}
