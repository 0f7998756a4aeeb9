//! Seeded randomized checks of the lattice lemmas. Trials are independent
//! given their derived seeds and run in parallel; reports are assembled in
//! trial order, so identical configs give identical reports (up to wall time).

use std::sync::Arc;
use std::time::Instant;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{
    element_lattice_depth, lattice_membership, min_exponent, nilpotent_break, parse_q, point_in_torus_apartment,
    render_q, sample_g_x0, sample_nilpotent, t_perp_decompose, ApartmentPoint, Depth, GroupKind, TorusData,
};
use crate::matrix::Matrix;
use crate::padic::{LocalField, Scalar, DEFAULT_PRECISION, Q};
use crate::regular::{certify, check_deepness, s_gamma, torus_of};

/// Resampling attempts per trial after precision aborts.
pub const PRECISION_RETRY_CAP: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lemma {
    Lemma32,
    Lemma33,
    Prop34,
    Deepness,
}

impl std::str::FromStr for Lemma {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lemma32" => Ok(Lemma::Lemma32),
            "lemma33" => Ok(Lemma::Lemma33),
            "prop34" => Ok(Lemma::Prop34),
            "deepness" => Ok(Lemma::Deepness),
            other => Err(Error::Config(format!("unknown lemma {other}"))),
        }
    }
}

fn default_precision() -> i64 {
    DEFAULT_PRECISION
}

fn default_kind() -> GroupKind {
    GroupKind::GL
}

/// Harness configuration, as read from JSON.
///
/// `depths` means: the depth `r` of the sampled nilpotent for `lemma32`; the
/// depth `−t` of the sampled `Z` for `lemma33`; the positive `r` for `prop34`.
/// `deepness` ignores it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzConfig {
    #[serde(default = "default_kind")]
    pub group: GroupKind,
    pub p: u64,
    #[serde(default = "default_precision")]
    pub precision: i64,
    pub x: Vec<String>,
    /// Matrices over `Q_p`, cycled through by trial index.
    pub gammas: Vec<Vec<Vec<String>>>,
    #[serde(default)]
    pub depths: Vec<String>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

/// Validated harness state.
#[derive(Debug, Clone)]
pub struct FuzzSetup {
    pub kind: GroupKind,
    pub field: Arc<LocalField>,
    pub x: ApartmentPoint,
    pub tori: Vec<TorusData>,
    pub depths: Vec<Q>,
    pub trials: usize,
    pub seed: u64,
}

impl FuzzSetup {
    pub fn new(cfg: &FuzzConfig, lemma: Lemma) -> Result<Self> {
        if cfg.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if cfg.gammas.is_empty() {
            return Err(Error::Config("at least one gamma is required".into()));
        }
        let field = LocalField::qp(cfg.p, cfg.precision)?;
        let x = ApartmentPoint::parse(&cfg.x)?;
        let depths = cfg.depths.iter().map(|d| parse_q(d)).collect::<Result<Vec<_>>>()?;
        let mut tori = Vec::new();
        for rows in &cfg.gammas {
            let g = Matrix::parse_rows(&field, rows)?;
            if g.n() != x.n() {
                return Err(Error::Dimension("gamma and x have different rank".into()));
            }
            let cert = certify(&g, cfg.group)?;
            if !cert.regular {
                return Err(Error::NotRegular("gamma is not regular".into()));
            }
            if !cert.compact {
                return Err(Error::NotCompact("gamma is not compact".into()));
            }
            let torus = torus_of(&g, None)?;
            if lemma != Lemma::Deepness && !point_in_torus_apartment(&torus, &x)? {
                return Err(Error::PointNotFixed(format!("x = {:?} is not in the apartment of a gamma", cfg.x)));
            }
            tori.push(torus);
        }
        match lemma {
            Lemma::Lemma32 | Lemma::Lemma33 => {
                if depths.is_empty() {
                    return Err(Error::Config("depths are required".into()));
                }
                for d in &depths {
                    if nilpotent_break(&x, *d).is_empty() {
                        return Err(Error::Config(format!("{} is not a root-space break at x", render_q(d))));
                    }
                }
            }
            Lemma::Prop34 => {
                if depths.is_empty() {
                    return Err(Error::Config("depths are required".into()));
                }
                for d in &depths {
                    if !d.is_positive() {
                        return Err(Error::NonPositiveDepth(render_q(d)));
                    }
                }
            }
            Lemma::Deepness => {}
        }
        Ok(FuzzSetup { kind: cfg.group, field, x, tori, depths, trials: cfg.trials, seed: cfg.seed })
    }

    fn torus(&self, trial: usize) -> &TorusData {
        &self.tori[trial % self.tori.len()]
    }

    fn depth(&self, trial: usize) -> Q {
        self.depths[(trial / self.tori.len()) % self.depths.len()]
    }
}

/// Seed of trial `idx`, derived from the run seed.
pub fn trial_seed(seed: u64, idx: usize) -> u64 {
    let mut z = seed ^ (idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzFailure {
    pub trial: usize,
    pub seed: u64,
    pub detail: String,
    pub inputs: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzReport {
    pub lemma: Lemma,
    pub trials: usize,
    pub hypothesis_fired: usize,
    pub vacuous: usize,
    pub precision_aborts: usize,
    pub failures: Vec<FuzzFailure>,
    pub wall_time_ms: u128,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn fired_rate(&self) -> f64 {
        self.hypothesis_fired as f64 / self.trials.max(1) as f64
    }
}

/// Result of one trial attempt.
#[derive(Debug, Clone)]
pub enum TrialOutcome {
    Pass,
    Vacuous,
    Fail { detail: String, inputs: serde_json::Value },
}

fn matrix_json(m: &Matrix) -> serde_json::Value {
    serde_json::to_value(m.render()).expect("rendered matrices serialize")
}

fn gamma_inputs(torus: &TorusData, extra: &[(&str, serde_json::Value)]) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    map.insert("gamma".into(), matrix_json(&torus.gamma));
    for (k, v) in extra {
        map.insert((*k).into(), v.clone());
    }
    serde_json::Value::Object(map)
}

fn lemma32_trial(setup: &FuzzSetup, trial: usize, rng: &mut ChaCha8Rng) -> Result<TrialOutcome> {
    let torus = setup.torus(trial);
    let r = setup.depth(trial);
    let x = sample_nilpotent(&setup.field, &setup.x, Depth::at(r), rng)?;
    let (_, z) = t_perp_decompose(&x, torus)?;
    let dz = element_lattice_depth(&z, &setup.x)?;
    if dz == Depth::at(r) {
        return Ok(TrialOutcome::Pass);
    }
    Ok(TrialOutcome::Fail {
        detail: format!("depth of Z is {dz}, expected {}", render_q(&r)),
        inputs: gamma_inputs(torus, &[("X", matrix_json(&x)), ("Z", matrix_json(&z))]),
    })
}

/// A matrix in `g_{x,d}` with a few random digits above each entry's threshold.
fn sample_lattice_element(field: &Arc<LocalField>, x: &ApartmentPoint, d: Q, rng: &mut ChaCha8Rng) -> Matrix {
    let n = x.n();
    let p = field.p() as i64;
    let mut m = Matrix::zeros(field, n);
    for i in 0..n {
        for j in 0..n {
            let e = min_exponent(Depth::at(d), x.diff(i, j));
            let mut s = Scalar::zero(field);
            for k in 0..3 {
                let digit = rng.random_range(0..p);
                if digit != 0 {
                    s = &s + &Scalar::from_int(field, digit).shift(e + k);
                }
            }
            m.set(i, j, s);
        }
    }
    m
}

fn lemma33_trial(setup: &FuzzSetup, trial: usize, rng: &mut ChaCha8Rng) -> Result<TrialOutcome> {
    let torus = setup.torus(trial);
    let d = setup.depth(trial);
    let s = s_gamma(torus)?;
    for _ in 0..4 {
        let m = sample_lattice_element(&setup.field, &setup.x, d, rng);
        let (_, z) = t_perp_decompose(&m, torus)?;
        if z.is_zero() || element_lattice_depth(&z, &setup.x)? != Depth::at(d) {
            continue;
        }
        let gz = torus.gamma.mul(&z).mul(&torus.gamma.inverse()?).sub(&z);
        if lattice_membership(&gz, &setup.x, Depth::plus(d + s))? {
            return Ok(TrialOutcome::Fail {
                detail: format!("gamma Z - Z lies in g_{{x,{}}}", Depth::plus(d + s)),
                inputs: gamma_inputs(torus, &[("Z", matrix_json(&z))]),
            });
        }
        return Ok(TrialOutcome::Pass);
    }
    Ok(TrialOutcome::Vacuous)
}

/// Nilpotent-attainable depths in `(lo, hi]`.
fn nilpotent_depths_in(x: &ApartmentPoint, lo: Q, hi: Q) -> Vec<Q> {
    let mut out = Vec::new();
    for i in 0..x.n() {
        for j in 0..x.n() {
            if i == j {
                continue;
            }
            let c = x.diff(i, j);
            let mut v = c + Q::from_integer((lo - c).floor().to_integer());
            while v <= hi {
                if v > lo && !out.contains(&v) {
                    out.push(v);
                }
                v += Q::from_integer(1);
            }
        }
    }
    out.sort();
    out
}

fn prop34_trial(setup: &FuzzSetup, trial: usize, rng: &mut ChaCha8Rng) -> Result<TrialOutcome> {
    let torus = setup.torus(trial);
    let r = setup.depth(trial);
    let s = s_gamma(torus)?;
    let two = Q::from_integer(2);
    let choices = nilpotent_depths_in(&setup.x, -two * r, -r + Q::from_integer(1));
    let d = choices[rng.random_range(0..choices.len())];
    let x = sample_nilpotent(&setup.field, &setup.x, Depth::at(d), rng)?;
    let diff = torus.gamma.mul(&x).mul(&torus.gamma.inverse()?).sub(&x);
    if !lattice_membership(&diff, &setup.x, Depth::plus(-r))? {
        return Ok(TrialOutcome::Vacuous);
    }
    if lattice_membership(&x, &setup.x, Depth::plus(-r - s))? {
        return Ok(TrialOutcome::Pass);
    }
    Ok(TrialOutcome::Fail {
        detail: format!("X is not in g_{{x,{}}}", Depth::plus(-r - s)),
        inputs: gamma_inputs(torus, &[("X", matrix_json(&x)), ("r", render_q(&r).into())]),
    })
}

/// `γ′ = 1 + p^k h(γ)` with `h` an integral polynomial and `k > s(γ)`: a
/// `k`-rational element of `T_{s(γ)+}`.
pub fn sample_deep_torus_element(torus: &TorusData, rng: &mut ChaCha8Rng) -> Result<Matrix> {
    let field = torus.base_field().clone();
    let n = torus.n();
    let s = s_gamma(torus)?;
    let k = s.floor().to_integer() + 1 + rng.random_range(0..2);
    let p = field.p() as i64;
    let mut h = Matrix::zeros(&field, n);
    let mut power = Matrix::identity(&field, n);
    for _ in 0..n {
        let c = Scalar::from_int(&field, rng.random_range(-p..=p));
        h = h.add(&power.scale(&c));
        power = power.mul(&torus.gamma);
    }
    Ok(Matrix::identity(&field, n).add(&h.shift(k)))
}

fn deepness_trial(setup: &FuzzSetup, trial: usize, rng: &mut ChaCha8Rng) -> Result<TrialOutcome> {
    let torus = setup.torus(trial);
    let s = s_gamma(torus)?;
    let gp = sample_deep_torus_element(torus, rng)?;
    let report = check_deepness(torus, &gp, setup.kind)?;
    let mut problems = Vec::new();
    if !report.passed {
        problems.push("check_deepness comparison failed".to_string());
    }
    let (g, g_inv) = sample_g_x0(&setup.field, &setup.x, rng);
    let conj = g.mul(&torus.gamma).mul(&g_inv);
    let s_conj = s_gamma(&torus_of(&conj, Some(&torus.splitting))?)?;
    if s_conj != s {
        problems.push(format!("s(g gamma g^-1) = {} but s(gamma) = {}", render_q(&s_conj), render_q(&s)));
    }
    let p = setup.field.p() as i64;
    let z = Scalar::from_int(&setup.field, rng.random_range(1..p) + p * rng.random_range(0..3));
    let twisted = torus.gamma.scale(&z);
    let s_twist = s_gamma(&torus_of(&twisted, Some(&torus.splitting))?)?;
    if s_twist != s {
        problems.push(format!("s(gamma z) = {} but s(gamma) = {}", render_q(&s_twist), render_q(&s)));
    }
    if problems.is_empty() {
        return Ok(TrialOutcome::Pass);
    }
    Ok(TrialOutcome::Fail {
        detail: problems.join("; "),
        inputs: gamma_inputs(
            torus,
            &[("gamma_prime", matrix_json(&gp)), ("g", matrix_json(&g)), ("z", z.render().into())],
        ),
    })
}

/// One trial with precision-abort resampling. Returns the outcome and the
/// number of aborts; `None` when the retry cap was hit.
pub fn run_trial(setup: &FuzzSetup, lemma: Lemma, trial: usize) -> (Option<TrialOutcome>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(setup.seed, trial));
    let mut aborts = 0;
    for _ in 0..PRECISION_RETRY_CAP {
        let res = match lemma {
            Lemma::Lemma32 => lemma32_trial(setup, trial, &mut rng),
            Lemma::Lemma33 => lemma33_trial(setup, trial, &mut rng),
            Lemma::Prop34 => prop34_trial(setup, trial, &mut rng),
            Lemma::Deepness => deepness_trial(setup, trial, &mut rng),
        };
        match res {
            Ok(o) => return (Some(o), aborts),
            Err(e) if e.is_precision() => aborts += 1,
            Err(e) => {
                return (
                    Some(TrialOutcome::Fail {
                        detail: format!("{}: {e}", e.kind()),
                        inputs: gamma_inputs(setup.torus(trial), &[]),
                    }),
                    aborts,
                )
            }
        }
    }
    (None, aborts)
}

pub fn run_fuzz(cfg: &FuzzConfig, lemma: Lemma) -> Result<FuzzReport> {
    let setup = FuzzSetup::new(cfg, lemma)?;
    Ok(run_setup(&setup, lemma))
}

pub fn run_setup(setup: &FuzzSetup, lemma: Lemma) -> FuzzReport {
    let start = Instant::now();
    let outcomes: Vec<_> = (0..setup.trials).into_par_iter().map(|i| run_trial(setup, lemma, i)).collect();
    let mut report = FuzzReport {
        lemma,
        trials: setup.trials,
        hypothesis_fired: 0,
        vacuous: 0,
        precision_aborts: 0,
        failures: Vec::new(),
        wall_time_ms: 0,
    };
    for (i, (outcome, aborts)) in outcomes.into_iter().enumerate() {
        report.precision_aborts += aborts;
        match outcome {
            Some(TrialOutcome::Pass) => report.hypothesis_fired += 1,
            Some(TrialOutcome::Vacuous) => report.vacuous += 1,
            Some(TrialOutcome::Fail { detail, inputs }) => {
                report.hypothesis_fired += 1;
                report.failures.push(FuzzFailure { trial: i, seed: trial_seed(setup.seed, i), detail, inputs });
            }
            None => {}
        }
    }
    report.wall_time_ms = start.elapsed().as_millis();
    report
}

pub fn fuzz_lemma32(cfg: &FuzzConfig) -> Result<FuzzReport> {
    run_fuzz(cfg, Lemma::Lemma32)
}

pub fn fuzz_lemma33(cfg: &FuzzConfig) -> Result<FuzzReport> {
    run_fuzz(cfg, Lemma::Lemma33)
}

pub fn fuzz_prop34(cfg: &FuzzConfig) -> Result<FuzzReport> {
    run_fuzz(cfg, Lemma::Prop34)
}

pub fn fuzz_deepness(cfg: &FuzzConfig) -> Result<FuzzReport> {
    run_fuzz(cfg, Lemma::Deepness)
}
