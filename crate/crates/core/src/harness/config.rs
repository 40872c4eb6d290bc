use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::grid::{GridSpec, MomentumGrid};

/// Settings for every suite. Unknown keys are rejected; every field has a
/// default, so a configuration only names what it changes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub seed: u64,
    /// A check fails when its violation exceeds this many error estimates.
    pub failure_multiplier: f64,
    /// Relative tolerance `τ_c` of pointwise sign checks.
    pub causal_tol: f64,
    /// Grid of the suites that do not set their own.
    pub grid: GridSpec,
    pub normalization: NormalizationConfig,
    pub dual_formula: DualFormulaConfig,
    pub moments: MomentsConfig,
    pub current_causality: CurrentCausalityConfig,
    pub mantle_flux: MantleFluxConfig,
    pub causal_evolution: CausalEvolutionConfig,
    pub castrigiano_m: CastrigianoConfig,
    pub nw_violation: NwViolationConfig,
    pub almost_localized: AlmostLocalizedConfig,
    pub covariance: CovarianceConfig,
    pub exploratory_a: ExploratoryConfig,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            seed: 20_140_901,
            failure_multiplier: 3.0,
            causal_tol: 1e-10,
            grid: GridSpec::default(),
            normalization: Default::default(),
            dual_formula: Default::default(),
            moments: Default::default(),
            current_causality: Default::default(),
            mantle_flux: Default::default(),
            causal_evolution: Default::default(),
            castrigiano_m: Default::default(),
            nw_violation: Default::default(),
            almost_localized: Default::default(),
            covariance: Default::default(),
            exploratory_a: Default::default(),
        }
    }
}

fn line(n: usize, p_max: f64) -> GridSpec {
    GridSpec {
        dim: 1,
        n,
        p_max,
        mass: 1.0,
    }
}

impl HarnessConfig {
    /// A few cases per suite on small grids; for smoke runs.
    pub fn quick() -> Self {
        let mut c = HarnessConfig {
            grid: GridSpec {
                dim: 2,
                n: 64,
                p_max: 8.0,
                mass: 1.0,
            },
            ..Default::default()
        };
        c.normalization.cases = 2;
        c.dual_formula.cases = 2;
        c.moments.cases = 2;
        c.moments.boosted_copies = 1;
        c.moments.masses = vec![1.0, 100.0];
        c.current_causality.cases = 2;
        c.mantle_flux.cases = 2;
        c.mantle_flux.grid = GridSpec {
            dim: 2,
            n: 32,
            p_max: 8.0,
            mass: 1.0,
        };
        c.causal_evolution.cases = 2;
        c.causal_evolution.cheap_cases = 4;
        c.castrigiano_m.cases = 2;
        c.nw_violation.radii = vec![1.0];
        c.nw_violation.times = vec![0.0, 0.5];
        c.almost_localized.steps = vec![0, 4, 16];
        c.covariance.cases = 2;
        c.covariance.exact_cases = 2;
        c.exploratory_a.cases = 2;
        c
    }

    /// Checks ranges; the message names the offending key.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, why: &str| Err(Error::InvalidParameter(format!("{key}: {why}")));
        if !(self.failure_multiplier > 0.0) {
            return bad("failure_multiplier", "must be positive");
        }
        if !(self.causal_tol >= 0.0) {
            return bad("causal_tol", "must be non-negative");
        }
        let grids = [
            ("grid", Some(self.grid)),
            ("normalization.grid", self.normalization.grid),
            ("dual_formula.grid", self.dual_formula.grid),
            ("moments.grid", self.moments.grid),
            ("moments.tight_grid", Some(self.moments.tight_grid)),
            ("moments.sweep_grid", Some(self.moments.sweep_grid)),
            ("current_causality.grid", self.current_causality.grid),
            ("mantle_flux.grid", Some(self.mantle_flux.grid)),
            ("causal_evolution.grid", self.causal_evolution.grid),
            (
                "causal_evolution.cheap_grid",
                Some(self.causal_evolution.cheap_grid),
            ),
            ("castrigiano_m.grid", self.castrigiano_m.grid),
            ("nw_violation.grid", Some(self.nw_violation.grid)),
            ("almost_localized.grid", Some(self.almost_localized.grid)),
            ("covariance.grid", self.covariance.grid),
            ("exploratory_a.grid", self.exploratory_a.grid),
        ];
        for (key, g) in grids {
            if let Some(g) = g {
                if let Err(e) = MomentumGrid::new(g) {
                    return bad(key, &e.to_string());
                }
            }
        }
        let speeds = [
            ("normalization.max_boost", self.normalization.max_boost),
            ("dual_formula.max_boost", self.dual_formula.max_boost),
            ("moments.max_boost", self.moments.max_boost),
            (
                "current_causality.max_boost",
                self.current_causality.max_boost,
            ),
            ("covariance.max_boost", self.covariance.max_boost),
        ];
        for (key, v) in speeds {
            if !(v > 0.0 && v < 1.0) {
                return bad(key, "must lie in (0, 1)");
            }
        }
        for (key, list) in [
            ("castrigiano_m.speeds", &self.castrigiano_m.speeds),
            ("exploratory_a.speeds", &self.exploratory_a.speeds),
        ] {
            if list.is_empty() || list.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
                return bad(key, "needs speeds in (0, 1)");
            }
        }
        let v2: f64 = self
            .castrigiano_m
            .generator_velocity
            .iter()
            .map(|v| v * v)
            .sum();
        if !(v2 < 1.0) {
            return bad(
                "castrigiano_m.generator_velocity",
                "must be slower than light",
            );
        }
        for (key, lo, hi) in [
            (
                "castrigiano_m.min_gap",
                self.castrigiano_m.min_gap,
                self.castrigiano_m.max_gap,
            ),
            (
                "exploratory_a.min_gap",
                self.exploratory_a.min_gap,
                self.exploratory_a.max_gap,
            ),
        ] {
            if !(lo > 0.0 && hi > lo) {
                return bad(key, "needs 0 < min_gap < max_gap");
            }
        }
        for (key, n) in [
            ("normalization.cases", self.normalization.cases),
            ("dual_formula.cases", self.dual_formula.cases),
            ("moments.cases", self.moments.cases),
            ("current_causality.cases", self.current_causality.cases),
            ("mantle_flux.cases", self.mantle_flux.cases),
            ("castrigiano_m.cases", self.castrigiano_m.cases),
            ("exploratory_a.cases", self.exploratory_a.cases),
        ] {
            if n == 0 {
                return bad(key, "must be at least 1");
            }
        }
        if self.causal_evolution.cases + self.causal_evolution.cheap_cases == 0 {
            return bad("causal_evolution.cases", "no cases on either grid");
        }
        if self.covariance.cases + self.covariance.exact_cases == 0 {
            return bad("covariance.cases", "no cases of either kind");
        }
        if !(self.moments.ehrenfest_dt > 0.0) {
            return bad("moments.ehrenfest_dt", "must be positive");
        }
        if !(self.moments.tight_width > 0.0) {
            return bad("moments.tight_width", "must be positive");
        }
        if self.moments.masses.iter().any(|m| !(*m > 0.0)) {
            return bad("moments.masses", "must be positive");
        }
        if !(self.causal_evolution.max_dt > 0.0) {
            return bad("causal_evolution.max_dt", "must be positive");
        }
        if self.causal_evolution.union_every == 0 {
            return bad("causal_evolution.union_every", "must be at least 1");
        }
        if self.mantle_flux.union_every == 0 {
            return bad("mantle_flux.union_every", "must be at least 1");
        }
        if self.mantle_flux.n_u == 0 || self.mantle_flux.n_theta == 0 || self.mantle_flux.n_phi == 0
        {
            return bad("mantle_flux", "mantle grid sizes must be positive");
        }
        if self.castrigiano_m.same_frame_every == 0 {
            return bad("castrigiano_m.same_frame_every", "must be at least 1");
        }
        let nw = &self.nw_violation;
        if nw.radii.iter().any(|r| !(*r > 0.0)) {
            return bad("nw_violation.radii", "must be positive");
        }
        if nw.times.iter().any(|t| !(*t >= 0.0)) {
            return bad("nw_violation.times", "must be non-negative");
        }
        if !(nw.profile_fraction > 0.0 && nw.profile_fraction < 1.0) {
            return bad("nw_violation.profile_fraction", "must lie in (0, 1)");
        }
        let al = &self.almost_localized;
        if !(al.radius > 0.0) {
            return bad("almost_localized.radius", "must be positive");
        }
        if al.shift.iter().all(|c| *c == 0.0) {
            return bad("almost_localized.shift", "must be non-zero");
        }
        if al.steps.is_empty() {
            return bad("almost_localized.steps", "must not be empty");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizationConfig {
    pub cases: usize,
    pub tolerance: f64,
    pub max_boost: f64,
    pub grid: Option<GridSpec>,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        NormalizationConfig {
            cases: 20,
            tolerance: 1e-6,
            max_boost: 0.5,
            grid: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DualFormulaConfig {
    pub cases: usize,
    pub max_boost: f64,
    pub grid: Option<GridSpec>,
}

impl Default for DualFormulaConfig {
    fn default() -> Self {
        DualFormulaConfig {
            cases: 50,
            max_boost: 0.5,
            grid: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentsConfig {
    pub cases: usize,
    /// First moments of `A` and `Q` agree to this fraction of the width.
    pub width_tolerance: f64,
    pub ehrenfest_dt: f64,
    /// Leading cases whose boosted copy is also checked.
    pub boosted_copies: usize,
    pub max_boost: f64,
    pub tight_width: f64,
    pub tight_grid: GridSpec,
    pub tight_tolerance: f64,
    pub masses: Vec<f64>,
    /// Grid of the mass sweep; its mass is replaced.
    pub sweep_grid: GridSpec,
    pub heavy_tolerance: f64,
    pub grid: Option<GridSpec>,
}

impl Default for MomentsConfig {
    fn default() -> Self {
        MomentsConfig {
            cases: 100,
            width_tolerance: 1e-6,
            ehrenfest_dt: 1e-3,
            boosted_copies: 10,
            max_boost: 0.5,
            tight_width: 0.01,
            tight_grid: line(4096, 2.0),
            tight_tolerance: 1e-3,
            masses: vec![0.5, 1.0, 10.0, 100.0],
            sweep_grid: line(1024, 8.0),
            heavy_tolerance: 1e-3,
            grid: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurrentCausalityConfig {
    pub cases: usize,
    pub max_boost: f64,
    /// Bound on `max |∂·J|` relative to its pointwise scale.
    pub conservation_tol: f64,
    pub grid: Option<GridSpec>,
}

impl Default for CurrentCausalityConfig {
    fn default() -> Self {
        CurrentCausalityConfig {
            cases: 50,
            max_boost: 0.5,
            conservation_tol: 1e-6,
            grid: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MantleFluxConfig {
    pub cases: usize,
    /// Mantle sums are direct, so this grid is smaller than the desk grid.
    pub grid: GridSpec,
    pub n_u: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    /// Every this many cases the source is a union of two balls.
    pub union_every: usize,
}

impl Default for MantleFluxConfig {
    fn default() -> Self {
        MantleFluxConfig {
            cases: 30,
            grid: GridSpec {
                dim: 3,
                n: 32,
                p_max: 8.0,
                mass: 1.0,
            },
            n_u: 16,
            n_theta: 16,
            n_phi: 32,
            union_every: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CausalEvolutionConfig {
    pub cases: usize,
    pub grid: Option<GridSpec>,
    pub cheap_cases: usize,
    pub cheap_grid: GridSpec,
    pub max_dt: f64,
    pub union_every: usize,
}

impl Default for CausalEvolutionConfig {
    fn default() -> Self {
        CausalEvolutionConfig {
            cases: 50,
            grid: None,
            cheap_cases: 500,
            cheap_grid: line(4096, 32.0),
            max_dt: 1.0,
            union_every: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CastrigianoConfig {
    pub cases: usize,
    pub grid: Option<GridSpec>,
    /// Velocity of the detector frame `n₀`.
    pub generator_velocity: Vec3,
    /// Slice boost speeds, cycled over the cases.
    pub speeds: Vec<f64>,
    /// Range of the clearance between the source region and the target
    /// slice, in target-frame time.
    pub min_gap: f64,
    pub max_gap: f64,
    /// Every this many cases both slices share a frame.
    pub same_frame_every: usize,
    /// Also evaluate the operator form and record the route difference.
    pub cross_check: bool,
}

impl Default for CastrigianoConfig {
    fn default() -> Self {
        CastrigianoConfig {
            cases: 30,
            grid: None,
            generator_velocity: [0.2, 0.1, 0.0],
            speeds: vec![0.1, 0.3, 0.5],
            min_gap: 0.1,
            max_gap: 0.6,
            same_frame_every: 5,
            cross_check: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NwViolationConfig {
    pub grid: GridSpec,
    pub radii: Vec<f64>,
    pub times: Vec<f64>,
    /// Support radius of the smooth profile as a fraction of the ball.
    pub profile_fraction: f64,
}

impl Default for NwViolationConfig {
    fn default() -> Self {
        NwViolationConfig {
            grid: line(4096, 64.0),
            radii: vec![1.0, 2.0],
            times: vec![0.0, 0.25, 0.5, 1.0],
            profile_fraction: 0.9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlmostLocalizedConfig {
    pub grid: GridSpec,
    pub radius: f64,
    pub shift: Vec3,
    pub steps: Vec<u32>,
    /// `A` of the ball at the last step must exceed this.
    pub threshold: f64,
}

impl Default for AlmostLocalizedConfig {
    fn default() -> Self {
        AlmostLocalizedConfig {
            grid: line(4096, 64.0),
            radius: 1.0,
            shift: [1.0, 0.0, 0.0],
            steps: vec![0, 1, 2, 4, 8, 16],
            threshold: 0.95,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CovarianceConfig {
    /// Boost cases.
    pub cases: usize,
    /// Translation and right-angle rotation cases.
    pub exact_cases: usize,
    pub exact_tolerance: f64,
    pub max_boost: f64,
    pub grid: Option<GridSpec>,
}

impl Default for CovarianceConfig {
    fn default() -> Self {
        CovarianceConfig {
            cases: 20,
            exact_cases: 10,
            exact_tolerance: 1e-9,
            max_boost: 0.5,
            grid: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExploratoryConfig {
    pub cases: usize,
    pub grid: Option<GridSpec>,
    pub speeds: Vec<f64>,
    pub min_gap: f64,
    pub max_gap: f64,
}

impl Default for ExploratoryConfig {
    fn default() -> Self {
        ExploratoryConfig {
            cases: 10,
            grid: None,
            speeds: vec![0.1, 0.3, 0.5],
            min_gap: 0.1,
            max_gap: 0.6,
        }
    }
}
