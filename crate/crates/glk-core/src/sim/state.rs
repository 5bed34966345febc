//! Stage bookkeeping for the inductive lifting driver: the ramified support
//! set, the auxiliary and polarisation primes of the current stage, the
//! pinned characteristic polynomials at small unramified primes, and the
//! per-stage audits.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::charpoly::{
    feasibility_threshold, purity_window, unconstrained_window, CharPolyChoice, TraceConstraint,
};
use crate::deform::{correct_obstruction, versal_lift, DeformError, LiftSnapshot, LocalLift};
use crate::primes::prime_sieve;
use crate::residue::Modulus;
use crate::selmer::{sha_elimination_plan, Ledger, PlaceEntry};
use crate::sim::growth::{
    growth_schedule, growth_violation_check, CountingFunction, GrowthError, GrowthSchedule,
    ViolationReport,
};
use crate::sim::polarisation::{
    find_polarisation_pair, reciprocity_audit, PolarisationError, PolarisationRecord,
};
use crate::sim::sampler::{SamplerConfig, SyntheticChebotarev};
use crate::sim::EPISTEMIC_NOTE;

/// Structured diagnosis carried by a stage-invariant failure; serializable
/// so callers can consume it mechanically.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StageDiagnosis {
    AuditFailures { audits: StageAudits },
    InfeasiblePinnedPrime { r: u64, detail: String },
}

impl std::fmt::Display for StageDiagnosis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StageDiagnosis::AuditFailures { audits } => write!(f, "audit failures: {:?}", audits),
            StageDiagnosis::InfeasiblePinnedPrime { r, detail } => {
                write!(f, "pinned prime {} has no admissible choice: {}", r, detail)
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("stage {stage} invariant violated: {diagnosis}")]
    StageInvariantViolated {
        stage: u32,
        diagnosis: StageDiagnosis,
    },
    #[error(transparent)]
    Polarisation(#[from] PolarisationError),
    #[error(transparent)]
    Deform(#[from] DeformError),
    #[error(transparent)]
    Growth(#[from] GrowthError),
    #[error("p must be a prime at least 5")]
    BadPrime,
    #[error("weight k must be at least 1")]
    BadWeight,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub p: u64,
    pub k: u32,
    /// Number of stage blocks; the first block carries stage index 2.
    pub stages: u32,
    pub seed: u64,
    /// One auxiliary prime per dual-basis element.
    pub dual_selmer_dim: u32,
    pub sha1_dim: u32,
    pub sha1_dual_dim: u32,
    /// Extra initially ramified primes besides p.
    pub ramified: Vec<u64>,
    pub max_draws: u32,
    pub profile_sample: usize,
    pub m_step: u32,
    /// Synthetic density and epsilon for the growth section of the report.
    pub growth_density: f64,
    pub growth_epsilon: f64,
}

impl SimConfig {
    pub fn new(p: u64, k: u32, stages: u32, seed: u64) -> Self {
        SimConfig {
            p,
            k,
            stages,
            seed,
            dual_selmer_dim: 2,
            sha1_dim: 1,
            sha1_dual_dim: 1,
            ramified: vec![],
            max_draws: 65_536,
            profile_sample: 32,
            m_step: 1,
            growth_density: 0.2,
            growth_epsilon: 0.5,
        }
    }
}

/// A pinned characteristic polynomial at an unramified prime.
#[derive(Debug, Clone, Serialize)]
pub struct PinnedPrime {
    pub r: u64,
    pub added_stage: u32,
    pub constraint: TraceConstraint,
    pub choice: CharPolyChoice,
}

/// The mutable bookkeeping of one stage.
#[derive(Debug, Clone, Default)]
pub struct SimState {
    pub stage: u32,
    pub m: u32,
    /// S: p, the initial ramified primes, the kernel-killing primes, and all
    /// auxiliary/polarisation primes absorbed from earlier stages.
    pub support: BTreeSet<u64>,
    /// Q: this stage's auxiliary primes.
    pub auxiliary: BTreeSet<u64>,
    /// V: this stage's polarisation primes.
    pub polarisation: BTreeSet<u64>,
    /// R: unramified primes with pinned characteristic polynomials.
    pub pinned: BTreeMap<u64, PinnedPrime>,
    /// Local lifts at the current stage's auxiliary and polarisation primes.
    pub lifts: BTreeMap<u64, LocalLift>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    SimulationStarted {
        p: u64,
        k: u32,
        seed: u64,
        stages: u32,
    },
    KernelPrimesChosen {
        primes: Vec<u64>,
        dim_sha1: u32,
        dim_sha1_dual: u32,
    },
    StageStarted {
        n: u32,
        m: u32,
        r_threshold: f64,
    },
    CharpolyPinned {
        r: u64,
        stage: u32,
        modulus_exponent: u32,
        trace: u128,
        a: i128,
        pure: bool,
    },
    AuxiliaryDrawn {
        q: u64,
        alpha: u64,
    },
    PolarisationChosen {
        record: PolarisationRecord,
    },
    ObstructionCorrected {
        q: u64,
        alpha: u64,
        beta: u64,
        lift: LiftSnapshot,
    },
    LedgerAudited {
        n: u32,
        difference: i64,
    },
    StageCompleted {
        n: u32,
        audits: StageAudits,
    },
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
pub struct StageAudits {
    /// S/Q/V/R pairwise disjoint and the stage recursion respected.
    pub set_algebra: bool,
    /// |V| <= 2|Q|.
    pub v_at_most_twice_q: bool,
    /// Every pinned prime added above the previous threshold carries a
    /// strictly pure choice; every choice satisfies its congruence.
    pub purity: bool,
    /// The unramified-chase ledger balances to zero.
    pub ledger_zero: bool,
    /// All auxiliary and polarisation lifts are unobstructed.
    pub unobstructed: bool,
    /// Every polarisation record passes evaluation and reciprocity checks.
    pub polarisation: bool,
}

impl StageAudits {
    pub fn all(&self) -> bool {
        self.set_algebra
            && self.v_at_most_twice_q
            && self.purity
            && self.ledger_zero
            && self.unobstructed
            && self.polarisation
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageBlock {
    pub n: u32,
    pub m: u32,
    pub r_threshold: f64,
    pub support_size: usize,
    pub auxiliary_size: usize,
    pub polarisation_size: usize,
    pub pinned_size: usize,
    pub new_pinned: usize,
    pub singleton_searches: usize,
    pub ledger_difference: i64,
    pub audits: StageAudits,
    pub polarisation_records: Vec<PolarisationRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimHeader {
    pub seed: u64,
    pub p: u64,
    pub k: u32,
    pub stages: u32,
    pub dual_selmer_dim: u32,
    pub epistemic_note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthSection {
    pub density: f64,
    pub epsilon: f64,
    pub schedule: GrowthSchedule,
    pub violation: ViolationReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimReport {
    pub header: SimHeader,
    pub stage_blocks: Vec<StageBlock>,
    pub growth: GrowthSection,
}

struct Driver {
    cfg: SimConfig,
    sampler: SyntheticChebotarev,
    state: SimState,
    events: Vec<Event>,
}

impl Driver {
    fn new(cfg: SimConfig) -> Result<Self, SimError> {
        if cfg.p < 5 || !crate::residue::is_prime_u64(cfg.p) {
            return Err(SimError::BadPrime);
        }
        if cfg.k == 0 {
            return Err(SimError::BadWeight);
        }
        // Candidate nice primes live strictly above the last stage's
        // pinned-prime bound, so the stage sets can never collide.
        let final_m = 2 + cfg.stages.saturating_sub(1) * cfg.m_step;
        let floor = feasibility_threshold(cfg.p, final_m, cfg.k).ceil() as u64 + 1;
        let mut sampler_cfg = SamplerConfig::new(cfg.p, cfg.seed, floor);
        sampler_cfg.max_draws = cfg.max_draws;
        let sampler = SyntheticChebotarev::new(&sampler_cfg);
        Ok(Driver {
            cfg,
            sampler,
            state: SimState::default(),
            events: vec![],
        })
    }

    fn violated(&self, diagnosis: StageDiagnosis) -> SimError {
        SimError::StageInvariantViolated {
            stage: self.state.stage,
            diagnosis,
        }
    }

    /// Stage 2: assemble the initial support, pin the first batch of
    /// characteristic polynomials (purity not guaranteed below the first
    /// threshold), and run the auxiliary/polarisation machinery.
    fn init_stage(&mut self) -> Result<StageBlock, SimError> {
        let cfg = self.cfg.clone();
        self.state.stage = 2;
        self.state.m = 2;
        self.state.support.insert(cfg.p);
        for &r in &cfg.ramified {
            self.state.support.insert(r);
        }
        let kernel_count = sha_elimination_plan(cfg.sha1_dim, cfg.sha1_dual_dim);
        let mut kernel_primes = vec![];
        for _ in 0..kernel_count {
            let t = self
                .sampler
                .draw_nice_prime()
                .map_err(PolarisationError::from)?;
            kernel_primes.push(t);
            self.state.support.insert(t);
        }
        self.events.push(Event::KernelPrimesChosen {
            primes: kernel_primes,
            dim_sha1: cfg.sha1_dim,
            dim_sha1_dual: cfg.sha1_dual_dim,
        });
        let threshold = feasibility_threshold(cfg.p, 2, cfg.k);
        self.events.push(Event::StageStarted {
            n: 2,
            m: 2,
            r_threshold: threshold,
        });
        // First batch: every prime below the threshold, minimal |a| without
        // a purity guarantee.
        let new_pinned = self.extend_pinned(threshold, 2, false)?;
        let records = self.run_auxiliary_round()?;
        self.finish_stage(threshold, new_pinned, records)
    }

    /// Stage n -> n+1.
    fn advance_stage(&mut self) -> Result<StageBlock, SimError> {
        let cfg = self.cfg.clone();
        let m_old = self.state.m;
        let n_new = self.state.stage + 1;
        let m_new = m_old + cfg.m_step;

        // S grows by the previous stage's auxiliary and polarisation primes.
        let absorbed: Vec<u64> = self
            .state
            .auxiliary
            .iter()
            .chain(self.state.polarisation.iter())
            .copied()
            .collect();
        for q in absorbed {
            self.state.support.insert(q);
        }
        self.state.auxiliary.clear();
        self.state.polarisation.clear();
        self.state.lifts.clear();
        self.state.stage = n_new;
        self.state.m = m_new;

        let threshold = feasibility_threshold(cfg.p, m_new, cfg.k);
        self.events.push(Event::StageStarted {
            n: n_new,
            m: m_new,
            r_threshold: threshold,
        });
        // New pinned primes are constrained at the pre-lift precision and
        // sit above the previous threshold, so purity is guaranteed.
        let new_pinned = self.extend_pinned(threshold, m_old, true)?;
        let records = self.run_auxiliary_round()?;
        self.finish_stage(threshold, new_pinned, records)
    }

    /// Pin choices for every prime below `threshold` not already placed.
    fn extend_pinned(
        &mut self,
        threshold: f64,
        constraint_exponent: u32,
        require_pure: bool,
    ) -> Result<usize, SimError> {
        let cfg = self.cfg.clone();
        let bound = threshold.floor() as u64;
        let mut added = 0;
        if bound < 2 {
            return Ok(0);
        }
        let md = Modulus::new(cfg.p, constraint_exponent).expect("prime modulus");
        for r in prime_sieve(bound).expect("bound >= 2") {
            if self.state.support.contains(&r) || self.state.pinned.contains_key(&r) {
                continue;
            }
            let trace = self.sampler.draw_residue(md.value());
            let constraint = TraceConstraint::new(cfg.p, constraint_exponent, trace as i128)
                .expect("p is prime");
            let choice = if require_pure {
                purity_window(r, cfg.k, constraint).map_err(|e| {
                    self.violated(StageDiagnosis::InfeasiblePinnedPrime {
                        r,
                        detail: e.to_string(),
                    })
                })?
            } else {
                unconstrained_window(r, cfg.k, constraint).map_err(|e| {
                    self.violated(StageDiagnosis::InfeasiblePinnedPrime {
                        r,
                        detail: e.to_string(),
                    })
                })?
            };
            self.events.push(Event::CharpolyPinned {
                r,
                stage: self.state.stage,
                modulus_exponent: constraint_exponent,
                trace,
                a: choice.a,
                pure: choice.pure,
            });
            self.state.pinned.insert(
                r,
                PinnedPrime {
                    r,
                    added_stage: self.state.stage,
                    constraint,
                    choice,
                },
            );
            added += 1;
        }
        Ok(added)
    }

    /// Draw the auxiliary primes, then remove each of their obstructions
    /// with a polarising combination that leaves every other place alone.
    fn run_auxiliary_round(&mut self) -> Result<Vec<PolarisationRecord>, SimError> {
        let cfg = self.cfg.clone();
        let p = cfg.p;
        let m = self.state.m;
        let mut records = vec![];
        for _ in 0..cfg.dual_selmer_dim {
            let q = self
                .sampler
                .draw_nice_prime()
                .map_err(PolarisationError::from)?;
            self.state.auxiliary.insert(q);
            let alpha = self.sampler.draw_fp();
            self.events.push(Event::AuxiliaryDrawn { q, alpha });

            let md = Modulus::new(p, m).expect("prime modulus");
            let a_raw = alpha as u128 * md.p_power(m - 1) % md.value();
            let b_raw = self.sampler.draw_unit() as u128 * md.p_power(m - 1) % md.value();
            let lift = versal_lift(q, p, m, a_raw, b_raw)?;

            let record = find_polarisation_pair(&mut self.sampler, q, cfg.profile_sample)?;
            for &t in &record.chosen {
                self.state.polarisation.insert(t);
                // Polarisation primes pick up tame ramification with no
                // obstruction: the combination vanishes at their Frobenius.
                let b_raw = self.sampler.draw_unit() as u128 * md.p_power(m - 1) % md.value();
                let t_lift = versal_lift(t, p, m, 0, b_raw)?;
                self.state.lifts.insert(t, t_lift);
            }
            let corrected = if alpha == 0 {
                lift
            } else {
                let (beta, corrected) = correct_obstruction(&lift, record.combined_at_q)?;
                self.events.push(Event::ObstructionCorrected {
                    q,
                    alpha,
                    beta,
                    lift: corrected.snapshot(),
                });
                corrected
            };
            self.state.lifts.insert(q, corrected);
            self.events.push(Event::PolarisationChosen {
                record: record.clone(),
            });
            records.push(record);
        }
        Ok(records)
    }

    /// The stage's balance ledger: auxiliary places carry full conditions,
    /// the ambient block contributes one invariant dimension per auxiliary
    /// place, and the difference must vanish.
    fn stage_ledger(&self) -> Ledger {
        let mut ledger = Ledger::new();
        let n = self.state.auxiliary.len();
        for i in 0..n {
            ledger
                .push(PlaceEntry::tame(format!("ambient{}", i), 1, 0, 0).expect("valid"))
                .expect("fresh");
        }
        for q in &self.state.auxiliary {
            ledger
                .push(PlaceEntry::nice(format!("q={}", q), 2).expect("valid"))
                .expect("fresh");
        }
        ledger
    }

    fn finish_stage(
        &mut self,
        threshold: f64,
        new_pinned: usize,
        records: Vec<PolarisationRecord>,
    ) -> Result<StageBlock, SimError> {
        let cfg = &self.cfg;
        let st = &self.state;
        let ledger = self.stage_ledger();
        let difference = ledger.wiles_difference();
        self.events.push(Event::LedgerAudited {
            n: st.stage,
            difference,
        });

        let set_algebra = {
            let disjoint = st.support.is_disjoint(&st.auxiliary)
                && st.support.is_disjoint(&st.polarisation)
                && st.auxiliary.is_disjoint(&st.polarisation)
                && st.pinned.keys().all(|r| {
                    !st.support.contains(r)
                        && !st.auxiliary.contains(r)
                        && !st.polarisation.contains(r)
                });
            disjoint
        };
        let v_at_most_twice_q = st.polarisation.len() <= 2 * st.auxiliary.len();
        let purity = st.pinned.values().all(|pin| {
            let prev_threshold = feasibility_threshold(cfg.p, pin.constraint.m, cfg.k);
            let above = pin.r as f64 > prev_threshold;
            let pure_ok = if pin.added_stage > 2 {
                pin.choice.pure && above
            } else {
                true
            };
            pure_ok && pin.choice.satisfies_constraints()
        });
        let ledger_zero = difference == 0;
        let unobstructed = st
            .auxiliary
            .iter()
            .chain(st.polarisation.iter())
            .all(|q| st.lifts.get(q).is_some_and(|l| l.is_unobstructed()));
        let polarisation_ok = records.iter().all(|rec| {
            rec.combined_at_chosen.iter().all(|&v| v == 0)
                && rec.combined_at_q != 0
                && reciprocity_audit(&rec.invariants, cfg.p)
                && rec.chosen.len() <= 2
                && !rec.chosen.is_empty()
        });
        let audits = StageAudits {
            set_algebra,
            v_at_most_twice_q,
            purity,
            ledger_zero,
            unobstructed,
            polarisation: polarisation_ok,
        };
        self.events.push(Event::StageCompleted {
            n: st.stage,
            audits,
        });
        if !audits.all() {
            return Err(self.violated(StageDiagnosis::AuditFailures { audits }));
        }
        Ok(StageBlock {
            n: st.stage,
            m: st.m,
            r_threshold: threshold,
            support_size: st.support.len(),
            auxiliary_size: st.auxiliary.len(),
            polarisation_size: st.polarisation.len(),
            pinned_size: st.pinned.len(),
            new_pinned,
            singleton_searches: records.iter().filter(|r| r.singleton).count(),
            ledger_difference: difference,
            audits,
            polarisation_records: records,
        })
    }
}

/// Advance one stage: the externally callable step operation.
pub fn run_stage(driver: &mut Simulation) -> Result<&StageBlock, SimError> {
    let block = if driver.driver.state.stage == 0 {
        driver.driver.init_stage()?
    } else {
        driver.driver.advance_stage()?
    };
    driver.blocks.push(block);
    Ok(driver.blocks.last().expect("just pushed"))
}

/// A running simulation: configuration, sampler state, stage state, and the
/// blocks produced so far.
pub struct Simulation {
    driver: Driver,
    blocks: Vec<StageBlock>,
}

impl Simulation {
    pub fn new(cfg: SimConfig) -> Result<Self, SimError> {
        let mut driver = Driver::new(cfg.clone())?;
        driver.events.push(Event::SimulationStarted {
            p: cfg.p,
            k: cfg.k,
            seed: cfg.seed,
            stages: cfg.stages,
        });
        Ok(Simulation {
            driver,
            blocks: vec![],
        })
    }

    pub fn state(&self) -> &SimState {
        &self.driver.state
    }

    pub fn events(&self) -> &[Event] {
        &self.driver.events
    }

    pub fn blocks(&self) -> &[StageBlock] {
        &self.blocks
    }
}

/// Run the configured number of stages and assemble the full report.
pub fn run_simulation(cfg: &SimConfig) -> Result<(SimReport, Vec<Event>), SimError> {
    let mut sim = Simulation::new(cfg.clone())?;
    for _ in 0..cfg.stages {
        run_stage(&mut sim)?;
    }
    let schedule = growth_schedule(
        &CountingFunction::SyntheticDensity {
            density: cfg.growth_density,
        },
        cfg.stages.max(1),
        2,
        cfg.m_step,
    )?;
    let violation = growth_violation_check(&schedule, cfg.growth_epsilon);
    let report = SimReport {
        header: SimHeader {
            seed: cfg.seed,
            p: cfg.p,
            k: cfg.k,
            stages: cfg.stages,
            dual_selmer_dim: cfg.dual_selmer_dim,
            epistemic_note: EPISTEMIC_NOTE.to_string(),
        },
        stage_blocks: sim.blocks,
        growth: GrowthSection {
            density: cfg.growth_density,
            epsilon: cfg.growth_epsilon,
            schedule,
            violation,
        },
    };
    Ok((report, sim.driver.events))
}
