use std::collections::BTreeMap;
use std::sync::Arc;

use charconst::fuzz::{run_fuzz, FuzzConfig, Lemma};
use charconst::group::{
    chevalley_ad, chevalley_direct, parse_q, render_q, ApartmentPoint, CartanOrRoot, ChevalleyElement, GroupKind,
    GroupSpec, Root,
};
use charconst::kirillov::{
    check_cor36_exhaustive, enumerate_characters, triviality_depth, Intertwiner, TrivialityDepth,
    DEFAULT_ENUMERATION_CAP, DEFAULT_SEARCH_BOUND,
};
use charconst::padic::parse_rational;
use charconst::regular::{constancy_radius, neighborhood_descriptor, regular_depth_report, torus_of};
use charconst::{Error, LocalField, Matrix, Result, Scalar, Q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::config::Settings;

/// Result of a command: JSON fields to emit and whether a check failed.
pub struct Outcome {
    pub fields: Map<String, Value>,
    pub failed: bool,
}

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("command results are JSON objects"),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize to JSON")
}

fn base_field(s: &Settings) -> Result<Arc<LocalField>> {
    LocalField::qp(s.p()?, s.precision)
}

fn group_for(s: &Settings, field: &Arc<LocalField>, n: usize) -> Result<GroupSpec> {
    s.check_n(n)?;
    GroupSpec::new(s.group, n, field.clone())
}

fn matrix(field: &Arc<LocalField>, rows: &[Vec<String>]) -> Result<Matrix> {
    Matrix::parse_rows(field, rows)
}

/// `e:f:c_0,...,c_e`; each `c_k` is a rational or `a|b|...` coordinates over
/// the unramified step. Empty coefficients are allowed when `e = 1`.
pub fn parse_extension(base: &Arc<LocalField>, text: &str) -> Result<Arc<LocalField>> {
    let bad = |msg: &str| Error::Config(format!("--extension {text:?}: {msg}"));
    let mut parts = text.splitn(3, ':');
    let e: u32 = parts.next().unwrap_or("").trim().parse().map_err(|_| bad("e is not an integer"))?;
    let f: u32 = parts.next().ok_or_else(|| bad("expected e:f:coeffs"))?.trim().parse().map_err(|_| bad("f is not an integer"))?;
    let coeff_text = parts.next().unwrap_or("").trim();
    let coeffs = if coeff_text.is_empty() {
        Vec::new()
    } else {
        coeff_text
            .split(',')
            .map(|c| c.split('|').map(|q| parse_rational(q.trim())).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?
    };
    if e == 0 {
        return Err(bad("e must be at least 1"));
    }
    if e > 1 && coeffs.len() != e as usize + 1 {
        return Err(bad("an Eisenstein polynomial of degree e needs e + 1 coefficients"));
    }
    let field = LocalField::make_extension(base, f, &coeffs)?;
    if field.e() != e {
        return Err(bad("coefficients do not match e"));
    }
    Ok(field)
}

fn gamma_and_hint(s: &Settings, field: &Arc<LocalField>) -> Result<(Matrix, Option<Arc<LocalField>>)> {
    let gamma = matrix(field, Settings::required(&s.gamma, "gamma")?)?;
    group_for(s, field, gamma.n())?;
    let hint = s.extension.as_deref().map(|t| parse_extension(field, t)).transpose()?;
    Ok((gamma, hint))
}

pub fn radius(s: &Settings) -> Result<Outcome> {
    let field = base_field(s)?;
    let (gamma, hint) = gamma_and_hint(s, &field)?;
    let rho = parse_q(Settings::required(&s.rho_pi, "rho_pi")?)?;
    let torus = torus_of(&gamma, hint.as_ref())?;
    let report = regular_depth_report(&torus, s.group)?;
    let radius = constancy_radius(&torus, rho, s.group)?;
    let desc = neighborhood_descriptor(&torus, rho, s.group)?;
    let mut out = obj(to_value(&report));
    out.insert("rho_pi".into(), render_q(&radius.rho_pi).into());
    out.insert("radius".into(), to_value(&radius.radius));
    out.insert("descriptor".into(), to_value(&desc.summary()));
    out.insert("torus".into(), to_value(&torus.summary()));
    if let Some(rows) = &s.candidate {
        let cand = matrix(&field, rows)?;
        out.insert("candidate_accepted".into(), desc.accepts(&cand)?.into());
    }
    Ok(Outcome { fields: out, failed: false })
}

pub fn sgamma(s: &Settings) -> Result<Outcome> {
    let field = base_field(s)?;
    let (gamma, hint) = gamma_and_hint(s, &field)?;
    let torus = torus_of(&gamma, hint.as_ref())?;
    let mut out = obj(to_value(&regular_depth_report(&torus, s.group)?));
    out.insert("torus".into(), to_value(&torus.summary()));
    Ok(Outcome { fields: out, failed: false })
}

pub fn verify(s: &Settings, lemma: Lemma, timing: bool) -> Result<Outcome> {
    let x = Settings::required(&s.x, "x")?;
    s.check_n(x.len())?;
    let cfg = FuzzConfig {
        group: s.group,
        p: s.p()?,
        precision: s.precision,
        x: x.clone(),
        gammas: Settings::required(&s.gammas, "gammas")?.clone(),
        depths: s.depths.clone().unwrap_or_default(),
        trials: s.trials.unwrap_or(1000),
        seed: s.seed,
    };
    if let Some(g) = cfg.gammas.first() {
        GroupSpec::new(s.group, g.len(), LocalField::qp(cfg.p, cfg.precision)?)?;
    }
    let report = run_fuzz(&cfg, lemma)?;
    let mut out = obj(to_value(&report));
    if !timing {
        out.remove("wall_time_ms");
    }
    out.insert("passed".into(), report.passed().into());
    out.insert("fired_rate".into(), format!("{}/{}", report.hypothesis_fired, report.trials).into());
    Ok(Outcome { fields: out, failed: !report.passed() })
}

struct CosetInput {
    field: Arc<LocalField>,
    x: ApartmentPoint,
    r: Q,
    t: Q,
    cap: u64,
}

fn coset_input(s: &Settings) -> Result<CosetInput> {
    if s.group != GroupKind::GL {
        return Err(Error::InvalidGroup("character cosets are enumerated for gl_n only".into()));
    }
    let field = base_field(s)?;
    let x = ApartmentPoint::parse(Settings::required(&s.x, "x")?)?;
    group_for(s, &field, x.n())?;
    Ok(CosetInput {
        field,
        x,
        r: parse_q(Settings::required(&s.r, "r")?)?,
        t: parse_q(Settings::required(&s.t, "t")?)?,
        cap: s.cap.unwrap_or(DEFAULT_ENUMERATION_CAP),
    })
}

pub fn kirillov_enumerate(s: &Settings) -> Result<Outcome> {
    let c = coset_input(s)?;
    let en = enumerate_characters(&c.field, &c.x, c.r, c.t, c.cap)?;
    let depths = en.par_map(|coset| triviality_depth(&coset));
    let mut histogram: BTreeMap<String, u64> = BTreeMap::new();
    for d in depths {
        let key = match d? {
            TrivialityDepth::BelowR => "BELOW_R".to_string(),
            TrivialityDepth::At(d) => d.to_string(),
        };
        *histogram.entry(key).or_default() += 1;
    }
    let out = json!({ "cosets": en.len(), "triviality_depths": histogram });
    Ok(Outcome { fields: obj(out), failed: false })
}

pub fn kirillov_check_cor36(s: &Settings) -> Result<Outcome> {
    let c = coset_input(s)?;
    let gamma = matrix(&c.field, Settings::required(&s.gamma, "gamma")?)?;
    s.check_n(gamma.n())?;
    let it = Intertwiner::new(&gamma, &c.x, s.group)?;
    let en = enumerate_characters(&c.field, &c.x, c.r, c.t, c.cap)?;
    let summary = check_cor36_exhaustive(&it, &en, s.search_bound.unwrap_or(DEFAULT_SEARCH_BOUND));
    let mut out = obj(to_value(&summary));
    out.insert("s_gamma".into(), it.s().ok().map(|q| render_q(&q)).into());
    let failed = summary.fails > 0;
    Ok(Outcome { fields: out, failed })
}

fn random_scalar(field: &Arc<LocalField>, rng: &mut ChaCha8Rng) -> Scalar {
    Scalar::from_int(field, rng.random_range(-500..501)).shift(rng.random_range(-3..4))
}

fn random_unit_scalar(field: &Arc<LocalField>, rng: &mut ChaCha8Rng) -> Scalar {
    let p = field.p() as i64;
    Scalar::from_int(field, rng.random_range(1..p) + p * rng.random_range(-20..21)).shift(rng.random_range(-2..3))
}

pub fn chevalley_check(s: &Settings) -> Result<Outcome> {
    let field = base_field(s)?;
    let ranks = match s.n {
        Some(n) => vec![n],
        None => vec![2, 3],
    };
    let samples = s.samples.unwrap_or(100);
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut checks = 0u64;
    let mut mismatches = Vec::new();
    for &n in &ranks {
        GroupSpec::new(s.group, n, field.clone())?;
        for b in Root::all(n) {
            let mut cases: Vec<(ChevalleyElement, CartanOrRoot)> = Vec::new();
            for _ in 0..samples {
                for c in Root::all(n) {
                    cases.push((ChevalleyElement::Unipotent(b, random_scalar(&field, &mut rng)), CartanOrRoot::Root(c)));
                }
                let h = (0..n).map(|_| random_scalar(&field, &mut rng)).collect();
                cases.push((ChevalleyElement::Unipotent(b, random_scalar(&field, &mut rng)), CartanOrRoot::Cartan(h)));
                let t = (0..n).map(|_| random_unit_scalar(&field, &mut rng)).collect();
                cases.push((ChevalleyElement::Torus(t), CartanOrRoot::Root(b)));
            }
            for (g, c) in cases {
                let closed = chevalley_ad(&field, n, &g, &c)?;
                let direct = chevalley_direct(&field, n, &g, &c)?;
                checks += 1;
                if !closed.eq_at_precision(&direct) {
                    mismatches.push(json!({
                        "n": n,
                        "element": g.matrix(&field, n).render(),
                        "target": c.matrix(&field, n).render(),
                        "closed_form": closed.render(),
                        "direct": direct.render(),
                    }));
                }
            }
        }
    }
    let failed = !mismatches.is_empty();
    let out = json!({ "ranks": ranks, "checks": checks, "mismatches": mismatches, "passed": !failed });
    Ok(Outcome { fields: obj(out), failed })
}
