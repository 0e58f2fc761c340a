//! Seeded property verification: random generators for SPD and Grassmann
//! points, the property suites, and a machine-readable report.
//!
//! Every trial owns a ChaCha stream derived from `(seed, dim index, trial)`, so
//! a report depends only on its configuration and never on thread scheduling.

mod suites;

use std::fmt;
use std::str::FromStr;

use nalgebra::QR;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GyroError, Result};
use crate::grassmann::{identity_frame_matrix, GrTangentAtI, OnbFrame, CUT_LOCUS_EPS};
use crate::matker::{Mat, SpdMatrix};

/// Redraws allowed before a generator gives up.
pub const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteId {
    SpdAxioms,
    SpdIsometries,
    SpdMlr,
    GrAxioms,
    GrIsometries,
    GrOnbConsistency,
    Kernels,
    Kgc,
}

impl SuiteId {
    pub const ALL: [SuiteId; 8] = [
        SuiteId::SpdAxioms,
        SuiteId::SpdIsometries,
        SuiteId::SpdMlr,
        SuiteId::GrAxioms,
        SuiteId::GrIsometries,
        SuiteId::GrOnbConsistency,
        SuiteId::Kernels,
        SuiteId::Kgc,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            SuiteId::SpdAxioms => "spd_axioms",
            SuiteId::SpdIsometries => "spd_isometries",
            SuiteId::SpdMlr => "spd_mlr",
            SuiteId::GrAxioms => "gr_axioms",
            SuiteId::GrIsometries => "gr_isometries",
            SuiteId::GrOnbConsistency => "gr_onb_consistency",
            SuiteId::Kernels => "kernels",
            SuiteId::Kgc => "kgc",
        }
    }

    /// Whether the suite's dims are `(n, p)` pairs rather than matrix orders.
    pub fn on_grassmann(self) -> bool {
        matches!(
            self,
            SuiteId::GrAxioms | SuiteId::GrIsometries | SuiteId::GrOnbConsistency | SuiteId::Kgc
        )
    }

    pub fn default_dims(self) -> Vec<Dim> {
        let spd = |ns: &[usize]| ns.iter().map(|&n| Dim::spd(n)).collect();
        let gr = |ps: &[(usize, usize)]| ps.iter().map(|&(n, p)| Dim::gr(n, p)).collect();
        match self {
            SuiteId::SpdAxioms | SuiteId::SpdIsometries | SuiteId::Kernels => spd(&[2, 3, 5, 8]),
            SuiteId::SpdMlr => spd(&[2, 3]),
            SuiteId::GrAxioms | SuiteId::GrIsometries | SuiteId::GrOnbConsistency => {
                gr(&[(4, 2), (6, 2), (6, 3)])
            }
            SuiteId::Kgc => gr(&[(4, 2), (5, 2)]),
        }
    }
}

impl fmt::Display for SuiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SuiteId {
    type Err = GyroError;

    fn from_str(s: &str) -> Result<Self> {
        SuiteId::ALL
            .into_iter()
            .find(|id| id.tag() == s)
            .ok_or_else(|| GyroError::InvalidConfig(format!("unknown suite {s:?}")))
    }
}

/// A matrix order `n`, or a Grassmann shape `(n, p)` written `NxP`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dim {
    pub n: usize,
    pub p: Option<usize>,
}

impl Dim {
    pub fn spd(n: usize) -> Self {
        Dim { n, p: None }
    }

    pub fn gr(n: usize, p: usize) -> Self {
        Dim { n, p: Some(p) }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.p {
            Some(p) => write!(f, "{}x{}", self.n, p),
            None => write!(f, "{}", self.n),
        }
    }
}

impl FromStr for Dim {
    type Err = GyroError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || GyroError::InvalidConfig(format!("bad dimension {s:?}, expected N or NxP"));
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        match s.split_once('x') {
            Some((n, p)) => Ok(Dim::gr(num(n)?, num(p)?)),
            None => Ok(Dim::spd(num(s)?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub suite: SuiteId,
    pub dims: Vec<Dim>,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
}

impl SuiteConfig {
    /// Default dims for `suite`, tolerance 1e-8.
    pub fn new(suite: SuiteId, trials: usize, seed: u64) -> Self {
        SuiteConfig {
            suite,
            dims: suite.default_dims(),
            trials,
            seed,
            tol: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(GyroError::InvalidConfig("trials must be at least 1".into()));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(GyroError::InvalidConfig(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.dims.is_empty() {
            return Err(GyroError::InvalidConfig("no dimensions given".into()));
        }
        for d in &self.dims {
            match (self.suite.on_grassmann(), d.p) {
                (true, Some(p)) if p >= 1 && p < d.n => {}
                (false, None) if d.n >= 1 => {}
                (true, _) => {
                    return Err(GyroError::InvalidConfig(format!(
                        "{} needs NxP dims with 1 ≤ P < N, got {d}",
                        self.suite
                    )))
                }
                (false, _) => {
                    return Err(GyroError::InvalidConfig(format!(
                        "{} needs matrix orders N ≥ 1, got {d}",
                        self.suite
                    )))
                }
            }
        }
        Ok(())
    }
}

/// How a check's pass threshold relates to the configured tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// The configured tolerance.
    Suite,
    /// The configured tolerance, capped at a property-specific bound.
    AtMost(f64),
    /// A numeric-oracle or rate threshold independent of the configuration.
    Fixed(f64),
}

impl Tolerance {
    pub fn resolve(self, tol: f64) -> f64 {
        match self {
            Tolerance::Suite => tol,
            Tolerance::AtMost(t) => tol.min(t),
            Tolerance::Fixed(t) => t,
        }
    }
}

/// A registered property: the suite that exercises it and where it comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Property {
    pub name: &'static str,
    pub suite: SuiteId,
    pub anchor: &'static str,
    pub tolerance: Tolerance,
}

pub fn registry() -> &'static [Property] {
    suites::REGISTRY
}

pub fn property(name: &str) -> Option<&'static Property> {
    registry().iter().find(|p| p.name == name)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub anchor: String,
    pub trials: usize,
    pub tol: f64,
    /// `None` (serialized as null) if any trial produced a non-finite residual
    /// or a domain error.
    pub max_residual: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: SuiteId,
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
    pub dims: Vec<String>,
    /// Largest condition number among generated SPD points.
    pub max_condition: Option<f64>,
    pub checks: Vec<CheckOutcome>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        crate::cli::json::to_document_string(self).expect("report serializes")
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Residuals recorded by one trial.
#[derive(Debug, Default)]
pub(crate) struct Recorder {
    rows: Vec<(String, f64)>,
    max_condition: Option<f64>,
}

impl Recorder {
    /// Records the residual of `f`, or NaN if it fails with a domain error.
    pub(crate) fn check(&mut self, name: impl Into<String>, f: impl FnOnce() -> Result<f64>) {
        let r = f().unwrap_or(f64::NAN);
        self.rows.push((name.into(), r));
    }

    pub(crate) fn note_condition(&mut self, c: f64) {
        self.max_condition = Some(self.max_condition.map_or(c, |m| m.max(c)));
    }
}

/// `‖lhs − rhs‖_F / (1 + ‖rhs‖_F)`
pub fn rel_residual(lhs: &Mat, rhs: &Mat) -> f64 {
    (lhs - rhs).norm() / (1.0 + rhs.norm())
}

/// `|lhs − rhs| / (1 + |rhs|)`
pub fn rel_residual_scalar(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / (1.0 + rhs.abs())
}

/// The RNG of one trial.
pub fn trial_rng(seed: u64, dim_index: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((dim_index as u64) << 40) | trial as u64);
    rng
}

fn gaussian_mat<R: Rng + ?Sized>(rng: &mut R, r: usize, c: usize) -> Mat {
    Mat::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

/// A generated SPD point with its 2-norm condition number.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdSample {
    pub point: SpdMatrix,
    pub condition: f64,
}

/// `A·Aᵀ + 0.1·I` with `A` standard normal.
pub fn gen_spd<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<SpdSample> {
    let a = gaussian_mat(rng, n, n);
    let point = SpdMatrix::new(&a * a.transpose() + Mat::identity(n, n) * 0.1)?;
    let eig = point.eig();
    let condition = eig.values[0] / eig.values[n - 1];
    Ok(SpdSample { point, condition })
}

fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, p: usize) -> Mat {
    QR::new(gaussian_mat(rng, p, p)).q()
}

/// Orthonormalized Gaussian `n × p` frame, redrawn until it is clear of the
/// cut locus of `span(Ĩ_{n,p})`.
pub fn gen_onb<R: Rng + ?Sized>(rng: &mut R, n: usize, p: usize) -> Result<OnbFrame> {
    for _ in 0..MAX_REDRAWS {
        let q = QR::new(gaussian_mat(rng, n, p)).q();
        if let Ok(u) = OnbFrame::new(q) {
            if u.top_block_sigma_min() > CUT_LOCUS_EPS {
                return Ok(u);
            }
        }
    }
    Err(GyroError::GeneratorStall(MAX_REDRAWS))
}

/// A frame whose principal angles to `span(Ĩ_{n,p})` have 2-norm at most
/// `radius`, in a random basis of its subspace.
pub fn gen_onb_within<R: Rng + ?Sized>(rng: &mut R, n: usize, p: usize, radius: f64) -> Result<OnbFrame> {
    for _ in 0..MAX_REDRAWS {
        let b = gaussian_mat(rng, p, n - p);
        let len: f64 = rng.random_range(0.05..=1.0) * radius;
        let b = &b * (len / b.norm().max(f64::MIN_POSITIVE));
        let u = GrTangentAtI::new(n, b)?.flow() * identity_frame_matrix(n, p) * random_orthogonal(rng, p);
        if let Ok(u) = OnbFrame::new(u) {
            if u.top_block_sigma_min() > CUT_LOCUS_EPS {
                return Ok(u);
            }
        }
    }
    Err(GyroError::GeneratorStall(MAX_REDRAWS))
}

struct Tally {
    name: String,
    trials: usize,
    max: f64,
    finite: bool,
}

/// Runs every property of `cfg.suite` on `cfg.trials` random instances per dim.
pub fn run_suite(cfg: &SuiteConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let body = suites::body(cfg.suite);
    let mut tallies: Vec<Tally> = Vec::new();
    let mut max_condition: Option<f64> = None;
    for (di, &dim) in cfg.dims.iter().enumerate() {
        let recs: Vec<Recorder> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(cfg.seed, di, t);
                let mut rec = Recorder::default();
                body(&mut rng, dim, &mut rec).map(|_| rec)
            })
            .collect::<Result<_>>()?;
        for rec in recs {
            if let Some(c) = rec.max_condition {
                max_condition = Some(max_condition.map_or(c, |m: f64| m.max(c)));
            }
            for (name, r) in rec.rows {
                let i = match tallies.iter().position(|t| t.name == name) {
                    Some(i) => i,
                    None => {
                        tallies.push(Tally {
                            name,
                            trials: 0,
                            max: 0.0,
                            finite: true,
                        });
                        tallies.len() - 1
                    }
                };
                let t = &mut tallies[i];
                t.trials += 1;
                if r.is_finite() {
                    t.max = t.max.max(r);
                } else {
                    t.finite = false;
                }
            }
        }
    }
    let checks: Vec<CheckOutcome> = tallies
        .into_iter()
        .map(|t| {
            let prop = property(property_of(&t.name)).expect("every recorded check is registered");
            let tol = prop.tolerance.resolve(cfg.tol);
            let max_residual = t.finite.then_some(t.max);
            CheckOutcome {
                pass: max_residual.is_some_and(|m| m <= tol),
                name: t.name,
                anchor: prop.anchor.to_string(),
                trials: t.trials,
                tol,
                max_residual,
            }
        })
        .collect();
    Ok(VerifyReport {
        suite: cfg.suite,
        seed: cfg.seed,
        trials: cfg.trials,
        tol: cfg.tol,
        dims: cfg.dims.iter().map(|d| d.to_string()).collect(),
        max_condition,
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

/// Property name of a check name `property/variant`.
pub fn property_of(check: &str) -> &str {
    check.split('/').next().unwrap_or(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn gen_spd_is_deterministic_and_admissible() {
        let a = gen_spd(&mut trial_rng(42, 0, 0), 3).unwrap();
        let b = gen_spd(&mut trial_rng(42, 0, 0), 3).unwrap();
        assert_eq!(a, b);
        assert!(a.point.eig().values[2] > 0.0 && a.condition >= 1.0);
        let c = gen_spd(&mut trial_rng(43, 0, 0), 3).unwrap();
        assert_ne!(a.point, c.point);
    }

    #[test]
    fn gen_onb_is_orthonormal_and_clear_of_cut_locus() {
        let mut rng = trial_rng(1, 0, 0);
        for _ in 0..20 {
            let u = gen_onb(&mut rng, 6, 3).unwrap();
            let m = u.as_mat();
            assert!((m.transpose() * m - Mat::identity(3, 3)).norm() < 1e-12);
            assert!(u.top_block_sigma_min() > CUT_LOCUS_EPS);
            let w = gen_onb_within(&mut rng, 6, 3, 0.4).unwrap();
            let d = crate::grassmann::principal_angle_distance(&OnbFrame::identity(6, 3).unwrap(), &w).unwrap();
            assert!(d <= 0.4 + 1e-12);
        }
        assert_eq!(gen_onb(&mut trial_rng(9, 0, 0), 4, 2), gen_onb(&mut trial_rng(9, 0, 0), 4, 2));
    }

    #[test]
    fn config_validation() {
        let mut cfg = SuiteConfig::new(SuiteId::SpdAxioms, 1, 0);
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        cfg.trials = 1;
        cfg.tol = 0.0;
        assert!(cfg.validate().is_err());
        cfg.tol = 1e-8;
        cfg.dims = vec![Dim::gr(4, 2)];
        assert!(cfg.validate().is_err());
        let mut cfg = SuiteConfig::new(SuiteId::GrAxioms, 1, 0);
        cfg.dims = vec![Dim::spd(4)];
        assert!(cfg.validate().is_err());
        assert_eq!("6x3".parse::<Dim>().unwrap(), Dim::gr(6, 3));
        assert_eq!("5".parse::<Dim>().unwrap(), Dim::spd(5));
        assert!("x".parse::<Dim>().is_err());
        assert_eq!("gr_onb_consistency".parse::<SuiteId>().unwrap(), SuiteId::GrOnbConsistency);
    }

    #[test]
    fn registry_maps_each_property_to_one_suite() {
        let mut seen = HashSet::new();
        for p in registry() {
            assert!(seen.insert(p.name), "{} registered twice", p.name);
            assert!(!p.name.contains('/'));
        }
        for id in SuiteId::ALL {
            let mut cfg = SuiteConfig::new(id, 1, 3);
            cfg.dims.truncate(1);
            let report = run_suite(&cfg).unwrap();
            let ran: HashSet<&str> = report.checks.iter().map(|c| property_of(&c.name)).collect();
            let owned: HashSet<&str> = registry().iter().filter(|p| p.suite == id).map(|p| p.name).collect();
            assert_eq!(ran, owned, "{id}");
        }
    }

    #[test]
    fn small_run_passes_and_is_reproducible() {
        let mut cfg = SuiteConfig::new(SuiteId::SpdAxioms, 5, 42);
        cfg.dims = vec![Dim::spd(2), Dim::spd(3)];
        let a = run_suite(&cfg).unwrap();
        assert!(a.pass, "{}", a.to_json());
        assert_eq!(a.to_json(), run_suite(&cfg).unwrap().to_json());
    }

    #[test]
    fn unattainable_tolerance_fails_with_residuals() {
        let mut cfg = SuiteConfig::new(SuiteId::SpdAxioms, 3, 42);
        cfg.dims = vec![Dim::spd(3)];
        cfg.tol = 1e-30;
        let report = run_suite(&cfg).unwrap();
        assert!(!report.pass);
        assert!(report.failures().all(|c| c.max_residual.is_some()));
    }
}
