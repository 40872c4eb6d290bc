//! Seeded scenario suites that turn the identities and inequalities of the
//! observables into pass/fail verdicts.
//!
//! A check holds when its violation is at most `failure_multiplier` times
//! the combined error estimate of the quantities it compares, or at most a
//! pinned tolerance where the suite states one. Cases run on the rayon
//! pool and are collected in index order, so a seed and a configuration
//! always produce the same verdict.

mod causal;
mod config;
mod current;
mod moments;
mod probability;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{Frame, Region, SliceRef, Vec3};
use crate::grid::GridSpec;
use crate::mantle::MantleSpec;
use crate::state::StateSpec;

pub use config::*;

/// Names of the tested statements, carried into every check.
pub mod anchors {
    pub const NORMALIZATION: &str = "full-slice normalization";
    pub const A_DEFORMED_NW: &str = "A as a deformation of Newton-Wigner";
    pub const A_ENERGY_DENSITY: &str = "A from the energy density";
    pub const M_OPERATOR: &str = "M operator form";
    pub const M_CURRENT: &str = "M current form";
    pub const FIRST_MOMENT: &str = "first-moment identity";
    pub const SECOND_MOMENT: &str = "second-moment identity";
    pub const HEISENBERG: &str = "corrected Heisenberg inequality";
    pub const EHRENFEST: &str = "time evolution of the first moment";
    pub const WORLDLINE: &str = "timelike mean worldline";
    pub const CURRENT_CAUSAL: &str = "causal conserved current";
    pub const MANTLE: &str = "mantle flux balance";
    pub const CAUSAL_TIME: &str = "causal time evolution of A";
    pub const CASTRIGIANO: &str = "causality of M across frames";
    pub const NW_ACAUSAL: &str = "acausality of Newton-Wigner";
    pub const ALMOST_LOCALIZED: &str = "almost-localized sequence";
    pub const COVARIANCE: &str = "Poincare covariance";
    pub const OPEN_A_FRAMES: &str = "causality of A across frames (open)";
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Normalization,
    DualFormula,
    Moments,
    CurrentCausality,
    MantleFlux,
    CausalEvolution,
    CastrigianoM,
    NwViolation,
    AlmostLocalized,
    Covariance,
    ExploratoryA,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Normalization,
        Suite::DualFormula,
        Suite::Moments,
        Suite::CurrentCausality,
        Suite::MantleFlux,
        Suite::CausalEvolution,
        Suite::CastrigianoM,
        Suite::NwViolation,
        Suite::AlmostLocalized,
        Suite::Covariance,
        Suite::ExploratoryA,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Normalization => "normalization",
            Suite::DualFormula => "dual-formula",
            Suite::Moments => "moments",
            Suite::CurrentCausality => "current-causality",
            Suite::MantleFlux => "mantle-flux",
            Suite::CausalEvolution => "causal-evolution",
            Suite::CastrigianoM => "castrigiano-m",
            Suite::NwViolation => "nw-violation",
            Suite::AlmostLocalized => "almost-localized",
            Suite::Covariance => "covariance",
            Suite::ExploratoryA => "exploratory-a",
        }
    }

    pub fn expectation(self) -> Expectation {
        match self {
            Suite::NwViolation => Expectation::ViolationExpected,
            Suite::ExploratoryA => Expectation::Exploratory,
            _ => Expectation::Pass,
        }
    }

    fn salt(self) -> u64 {
        let i = Suite::ALL.iter().position(|s| *s == self).unwrap_or(0) as u64;
        (i + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|x| x.name()).collect();
                Error::InvalidParameter(format!(
                    "unknown suite '{s}'; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// What a suite is supposed to find.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    /// Every check holds.
    Pass,
    /// At least one designated check is violated beyond its error, and
    /// the others hold.
    ViolationExpected,
    /// Margins are reported, nothing is asserted.
    Exploratory,
}

/// What a single check is supposed to show.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    Hold,
    Violate,
    Report,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NoVerdict,
}

/// One asserted relation between two numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub anchor: String,
    pub lhs: f64,
    pub rhs: f64,
    /// How far the relation fails; non-positive when it holds exactly.
    pub violation: f64,
    pub err_est: f64,
    /// Largest violation accepted.
    pub allowance: f64,
    /// `violation / allowance`; the check holds iff this is at most 1.
    pub margin: f64,
    pub holds: bool,
    pub expect: Expect,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        anchor: &str,
        lhs: f64,
        rhs: f64,
        violation: f64,
        err_est: f64,
        allowance: f64,
    ) -> Check {
        let margin = if allowance > 0.0 {
            violation / allowance
        } else if violation > 0.0 {
            f64::MAX
        } else {
            0.0
        };
        Check {
            name: name.into(),
            anchor: anchor.into(),
            lhs,
            rhs,
            violation,
            err_est,
            allowance,
            margin,
            holds: violation <= allowance,
            expect: Expect::Hold,
        }
    }

    /// `lhs ≤ rhs` up to `mult · err_est`.
    pub fn le(
        name: impl Into<String>,
        anchor: &str,
        lhs: f64,
        rhs: f64,
        err_est: f64,
        mult: f64,
    ) -> Check {
        Check::new(name, anchor, lhs, rhs, lhs - rhs, err_est, mult * err_est)
    }

    /// `lhs = rhs` up to `mult · err_est`.
    pub fn close(
        name: impl Into<String>,
        anchor: &str,
        lhs: f64,
        rhs: f64,
        err_est: f64,
        mult: f64,
    ) -> Check {
        Check::new(
            name,
            anchor,
            lhs,
            rhs,
            (lhs - rhs).abs(),
            err_est,
            mult * err_est,
        )
    }

    /// `|lhs - rhs| ≤ tol` with a pinned tolerance; `err_est` is recorded
    /// only.
    pub fn within(
        name: impl Into<String>,
        anchor: &str,
        lhs: f64,
        rhs: f64,
        err_est: f64,
        tol: f64,
    ) -> Check {
        Check::new(name, anchor, lhs, rhs, (lhs - rhs).abs(), err_est, tol)
    }

    /// Strict `lhs < rhs`.
    pub fn below(name: impl Into<String>, anchor: &str, lhs: f64, rhs: f64) -> Check {
        let mut c = Check::new(name, anchor, lhs, rhs, lhs - rhs, 0.0, 0.0);
        c.holds = lhs < rhs;
        c
    }

    pub fn expecting(mut self, expect: Expect) -> Check {
        self.expect = expect;
        self
    }
}

/// Everything needed to rebuild a case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub suite: Suite,
    pub seed: u64,
    pub index: usize,
    pub label: String,
    pub grid: GridSpec,
    pub state: StateSpec,
    pub state_frame: Frame,
    /// Frame of the detectors (`n₀`) where one is involved.
    pub generator: Option<Frame>,
    pub slices: Vec<SliceRef>,
    pub region: Option<Region>,
    pub mantle: Option<MantleSpec>,
    pub params: BTreeMap<String, f64>,
    pub failure_multiplier: f64,
}

impl Scenario {
    /// Leading 16 hex digits of the SHA-256 of the JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("scenario serializes");
        Sha256::digest(&bytes)[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn param(&self, key: &str) -> f64 {
        self.params.get(key).copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub index: usize,
    pub label: String,
    pub hash: String,
    pub scenario: Scenario,
    pub checks: Vec<Check>,
    /// Named intermediate values worth reporting.
    pub values: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub error: Option<String>,
}

impl CaseRecord {
    fn new(scenario: Scenario) -> CaseRecord {
        CaseRecord {
            index: scenario.index,
            label: scenario.label.clone(),
            hash: scenario.hash(),
            scenario,
            checks: Vec::new(),
            values: BTreeMap::new(),
            notes: Vec::new(),
            error: None,
        }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn value(&mut self, key: &str, v: f64) {
        self.values.insert(key.into(), v);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    /// An error, or a check expected to hold that does not.
    pub fn failed(&self) -> bool {
        self.error.is_some()
            || self
                .checks
                .iter()
                .any(|c| c.expect == Expect::Hold && !c.holds)
    }

    /// A check expected to be violated that is.
    pub fn detected(&self) -> bool {
        self.checks
            .iter()
            .any(|c| c.expect == Expect::Violate && !c.holds)
    }

    /// The check with the largest margin, preferring asserted ones.
    pub fn worst(&self) -> Option<&Check> {
        let key = |c: &&Check| (c.expect == Expect::Hold, c.margin);
        self.checks.iter().max_by(|a, b| {
            key(a)
                .partial_cmp(&key(b))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(mut v: Vec<f64>) -> Stats {
        v.retain(|x| x.is_finite());
        if v.is_empty() {
            return Stats::default();
        }
        v.sort_by(|a, b| a.total_cmp(b));
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        };
        Stats {
            count: n,
            min: v[0],
            median,
            max: v[n - 1],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteVerdict {
    pub suite: Suite,
    pub expectation: Expectation,
    pub verdict: Verdict,
    pub seed: u64,
    /// Tested statements, in order of first use.
    pub anchors: Vec<String>,
    pub cases_run: usize,
    /// Full records of the failing cases.
    pub failures: Vec<CaseRecord>,
    /// Cases where an expected violation was found.
    pub violations_found: usize,
    /// Margins of the asserted checks.
    pub margin: Stats,
    pub err_est: Stats,
    pub notes: Vec<String>,
    pub cases: Vec<CaseRecord>,
}

impl SuiteVerdict {
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    pub fn case(&self, label: &str) -> impl Iterator<Item = &CaseRecord> {
        let label = label.to_string();
        self.cases.iter().filter(move |c| c.label == label)
    }

    /// All checks with the given name.
    pub fn checks<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Check> + 'a {
        self.cases
            .iter()
            .flat_map(|c| c.checks.iter())
            .filter(move |c| c.name == name)
    }
}

fn assemble(suite: Suite, seed: u64, cases: Vec<CaseRecord>, notes: Vec<String>) -> SuiteVerdict {
    let expectation = suite.expectation();
    let failures: Vec<CaseRecord> = cases.iter().filter(|c| c.failed()).cloned().collect();
    let violations_found = cases.iter().filter(|c| c.detected()).count();
    let mut anchors: Vec<String> = Vec::new();
    for c in cases.iter().flat_map(|c| &c.checks) {
        if !anchors.contains(&c.anchor) {
            anchors.push(c.anchor.clone());
        }
    }
    // exploratory suites only report, so their margins are the result
    let summarized = if expectation == Expectation::Exploratory {
        Expect::Report
    } else {
        Expect::Hold
    };
    let asserted = || {
        cases
            .iter()
            .flat_map(|c| &c.checks)
            .filter(|c| c.expect == summarized)
    };
    let margin = Stats::of(asserted().map(|c| c.margin).collect());
    let err_est = Stats::of(asserted().map(|c| c.err_est).collect());
    let verdict = match expectation {
        Expectation::Pass if failures.is_empty() => Verdict::Pass,
        Expectation::ViolationExpected if failures.is_empty() && violations_found > 0 => {
            Verdict::Pass
        }
        Expectation::Exploratory if failures.is_empty() => Verdict::NoVerdict,
        _ => Verdict::Fail,
    };
    log::info!(
        "{suite}: {} cases, {} failures, {violations_found} violations found, verdict {verdict:?}",
        cases.len(),
        failures.len()
    );
    SuiteVerdict {
        suite,
        expectation,
        verdict,
        seed,
        anchors,
        cases_run: cases.len(),
        failures,
        violations_found,
        margin,
        err_est,
        notes,
        cases,
    }
}

pub fn run_suite(suite: Suite, cfg: &HarnessConfig) -> Result<SuiteVerdict> {
    cfg.validate()?;
    let (cases, notes) = match suite {
        Suite::Normalization => probability::normalization(cfg)?,
        Suite::DualFormula => probability::dual_formula(cfg)?,
        Suite::Covariance => probability::covariance(cfg)?,
        Suite::Moments => moments::moments(cfg)?,
        Suite::AlmostLocalized => moments::almost_localized(cfg)?,
        Suite::CurrentCausality => current::current_causality(cfg)?,
        Suite::MantleFlux => current::mantle_flux(cfg)?,
        Suite::CausalEvolution => causal::causal_evolution(cfg)?,
        Suite::CastrigianoM => causal::castrigiano_m(cfg)?,
        Suite::ExploratoryA => causal::exploratory_a(cfg)?,
        Suite::NwViolation => causal::nw_violation(cfg)?,
    };
    Ok(assemble(suite, cfg.seed, cases, notes))
}

pub fn run_all(cfg: &HarnessConfig) -> Result<Vec<SuiteVerdict>> {
    Suite::ALL.iter().map(|s| run_suite(*s, cfg)).collect()
}

type SuiteOutput = (Vec<CaseRecord>, Vec<String>);

/// Per-suite seeding and scenario boilerplate.
struct Ctx {
    suite: Suite,
    seed: u64,
    mult: f64,
}

impl Ctx {
    fn new(suite: Suite, cfg: &HarnessConfig) -> Ctx {
        Ctx {
            suite,
            seed: cfg.seed,
            mult: cfg.failure_multiplier,
        }
    }

    fn rng(&self, index: usize) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed ^ self.suite.salt());
        r.set_stream(index as u64);
        r
    }

    fn scenario(&self, index: usize, label: &str, grid: GridSpec, state: StateSpec) -> Scenario {
        Scenario {
            suite: self.suite,
            seed: self.seed,
            index,
            label: label.into(),
            grid,
            state,
            state_frame: Frame::rest(),
            generator: None,
            slices: Vec::new(),
            region: None,
            mantle: None,
            params: BTreeMap::new(),
            failure_multiplier: self.mult,
        }
    }
}

fn run_cases<F>(n: usize, f: F) -> Vec<CaseRecord>
where
    F: Fn(usize) -> CaseRecord + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Runs `body` on a fresh record; an error is stored on the record.
fn evaluate(
    scenario: Scenario,
    body: impl FnOnce(&Scenario, &mut CaseRecord) -> Result<()>,
) -> CaseRecord {
    let sc = scenario.clone();
    let mut rec = CaseRecord::new(scenario);
    if let Err(e) = body(&sc, &mut rec) {
        log::warn!("{} case {} ({}): {e}", sc.suite, sc.index, rec.hash);
        rec.error = Some(e.to_string());
    }
    rec
}

// Scenario generators. Components beyond the grid dimension stay zero.

fn rand_vec(rng: &mut ChaCha8Rng, dim: usize, half: f64) -> Vec3 {
    std::array::from_fn(|a| {
        if a < dim {
            rng.gen_range(-half..half)
        } else {
            0.0
        }
    })
}

fn random_gaussian(rng: &mut ChaCha8Rng, dim: usize) -> StateSpec {
    StateSpec::Gaussian {
        center: rand_vec(rng, dim, 1.0),
        width: rng.gen_range(0.6..1.2),
        position: rand_vec(rng, dim, 1.0),
    }
}

fn random_bump(rng: &mut ChaCha8Rng, dim: usize) -> StateSpec {
    StateSpec::Bump {
        center: rand_vec(rng, dim, 0.8),
        width: rng.gen_range(2.0..4.0),
        position: rand_vec(rng, dim, 1.0),
    }
}

/// Gaussians, with every third state a momentum-space bump.
fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> StateSpec {
    if rng.gen_range(0..3) == 0 {
        random_bump(rng, dim)
    } else {
        random_gaussian(rng, dim)
    }
}

fn random_ball(rng: &mut ChaCha8Rng, dim: usize, half: f64, r: (f64, f64)) -> Region {
    Region::ball(rand_vec(rng, dim, half), rng.gen_range(r.0..r.1))
}

/// A frame moving with speed in `[0, max_speed)` in a random direction.
fn random_frame(rng: &mut ChaCha8Rng, dim: usize, max_speed: f64) -> Result<Frame> {
    let mut dir = rand_vec(rng, dim, 1.0);
    let n = dir.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-12);
    let speed = rng.gen_range(0.0..max_speed);
    dir.iter_mut().for_each(|c| *c *= speed / n);
    Frame::from_velocity(dir)
}

/// A frame moving along one coordinate axis with velocity `±speed`.
fn axis_frame(rng: &mut ChaCha8Rng, dim: usize, speed: f64) -> Result<Frame> {
    let axis = rng.gen_range(0..dim);
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let mut v = [0.0; 3];
    v[axis] = sign * speed;
    Frame::from_velocity(v)
}

/// A detector frame in a random direction and a slice frame boosted along
/// one axis by at least 0.05.
fn detector_and_slice_frames(
    rng: &mut ChaCha8Rng,
    dim: usize,
    max_speed: f64,
) -> Result<(Frame, Frame)> {
    let gen = random_frame(rng, dim, max_speed)?;
    let speed = rng.gen_range(0.05..max_speed);
    Ok((gen, axis_frame(rng, dim, speed)?))
}

fn truncate(v: Vec3, dim: usize) -> Vec3 {
    std::array::from_fn(|a| if a < dim { v[a] } else { 0.0 })
}
