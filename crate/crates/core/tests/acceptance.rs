//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always reach stdout.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use charconst::fuzz::{run_fuzz, FuzzConfig, FuzzReport, Lemma};
use charconst::group::{
    chevalley_ad, chevalley_direct, element_lattice_depth, group_membership, lattice_generators, lattice_membership,
    parahoric_membership, point_in_torus_apartment, t_perp_decompose, torus_membership, ApartmentPoint,
    CartanOrRoot, ChevalleyElement, Depth, GroupKind, Root,
};
use charconst::kirillov::{
    check_cor36_exhaustive, coset_character, enumerate_characters, gamma_intertwines, is_degenerate, sample_g_xr,
    verify_duality, CharacterCoset, Intertwiner, DEFAULT_ENUMERATION_CAP, DEFAULT_SEARCH_BOUND,
};
use charconst::padic::{frac_principal, parse_scalar};
use charconst::regular::{certify, constancy_radius, s_alpha, s_gamma, torus_of};
use charconst::{LocalField, Matrix, Scalar, Q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q5() -> Arc<LocalField> {
    LocalField::qp(5, 24).unwrap()
}

fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

fn half_point() -> ApartmentPoint {
    ApartmentPoint::new(vec![Q::new(1, 2), qi(0)])
}

fn strs(rows: &[&[&str]]) -> Vec<Vec<String>> {
    rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect()
}

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn criterion_1_radius() -> Result<String, String> {
    let f = q5();
    let table: [(&[&[i64]], Q, Q, Q); 3] = [
        (&[&[6, 0], &[0, 1]], qi(1), qi(0), qi(2)),
        (&[&[1, 1], &[5, 1]], Q::new(1, 2), Q::new(3, 2), qi(2)),
        (&[&[2, 0], &[0, 1]], qi(0), qi(0), qi(0)),
    ];
    for (rows, s, rho, r) in table {
        let torus = torus_of(&Matrix::from_i64(&f, rows), None).map_err(|e| e.to_string())?;
        let got_s = s_gamma(&torus).map_err(|e| e.to_string())?;
        ensure(got_s == s, format!("s = {got_s}, expected {s}"))?;
        let cr = constancy_radius(&torus, rho, GroupKind::GL).map_err(|e| e.to_string())?;
        ensure(cr.radius == Depth::plus(r), format!("radius {} expected {r}+", cr.radius))?;
    }
    Ok("3/3 instances exact".into())
}

fn criterion_2_example() -> Result<String, String> {
    let f = q5();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x0 = ApartmentPoint::origin(2);
    let torus = torus_of(&Matrix::from_i64(&f, &[&[6, 0], &[0, 1]]), None).unwrap();
    let mut done = 0;
    while done < 100 {
        let (a, b, c, d) = {
            let mut pick = || Scalar::from_int(&f, rng.random_range(-60..61)).shift(rng.random_range(0..3));
            (pick(), pick(), pick(), pick())
        };
        let det = &(&a * &d) - &(&b * &c);
        if det.val().finite() != Some(qi(0)) {
            continue;
        }
        let xv = Scalar::from_int(&f, rng.random_range(1..200)).shift(rng.random_range(-3..4));
        let k = Matrix::from_rows(&f, vec![vec![a.clone(), b], vec![c.clone(), d]]).unwrap();
        let mut n = Matrix::zeros(&f, 2);
        n.set(0, 1, xv.clone());
        let direct = n.conjugate_by(&k).map_err(|e| e.to_string())?;
        let coef = xv.div(&det).unwrap();
        let formula = Matrix::from_rows(
            &f,
            vec![vec![-(&a * &c), &a * &a], vec![-(&c * &c), &a * &c]],
        )
        .unwrap()
        .scale(&coef);
        ensure(direct.eq_at_precision(&formula), "closed form differs from conjugation")?;
        let dx = element_lattice_depth(&direct, &x0).map_err(|e| e.to_string())?;
        let (_, z) = t_perp_decompose(&direct, &torus).map_err(|e| e.to_string())?;
        let dz = element_lattice_depth(&z, &x0).map_err(|e| e.to_string())?;
        ensure(dx == dz, format!("depth of Z {dz} differs from depth of X {dx}"))?;
        done += 1;
    }
    Ok("100/100 conjugates match, depth(Z) = depth(X)".into())
}

fn fuzz_cfg(x: &[&str], depths: &[&str], trials: usize, seed: u64) -> FuzzConfig {
    FuzzConfig {
        group: GroupKind::GL,
        p: 5,
        precision: 24,
        x: x.iter().map(|s| s.to_string()).collect(),
        gammas: vec![strs(&[&["6", "0"], &["0", "1"]]), strs(&[&["1", "1"], &["5", "1"]])],
        depths: depths.iter().map(|s| s.to_string()).collect(),
        trials,
        seed,
    }
}

fn criterion_3_fuzz() -> Result<String, String> {
    let runs: [(Lemma, FuzzConfig, bool); 4] = [
        (Lemma::Lemma32, fuzz_cfg(&["1/2", "0"], &["-1/2", "1/2", "3/2"], 1000, 31), true),
        (Lemma::Lemma33, fuzz_cfg(&["1/2", "0"], &["-3/2", "-1/2", "1/2"], 1000, 32), true),
        (Lemma::Prop34, fuzz_cfg(&["1/2", "0"], &["1/2", "1", "3/2"], 1000, 33), false),
        (Lemma::Deepness, fuzz_cfg(&["1/2", "0"], &[], 1000, 34), false),
    ];
    let mut parts = Vec::new();
    for (lemma, cfg, needs_rate) in runs {
        let r: FuzzReport = run_fuzz(&cfg, lemma).map_err(|e| e.to_string())?;
        ensure(r.trials >= 1000, "too few trials")?;
        ensure(r.failures.is_empty(), format!("{lemma:?}: {} failures, first {:?}", r.failures.len(), r.failures.first()))?;
        if needs_rate {
            ensure(r.fired_rate() >= 0.3, format!("{lemma:?}: fired rate {:.2}", r.fired_rate()))?;
        }
        parts.push(format!("{lemma:?} {}/{} fired", r.hypothesis_fired, r.trials));
    }
    // Split torus at the origin, integer breaks.
    let x0 = FuzzConfig { gammas: vec![strs(&[&["6", "0"], &["0", "1"]])], ..fuzz_cfg(&["0", "0"], &["-1", "0", "1"], 300, 35) };
    let r = run_fuzz(&x0, Lemma::Lemma32).map_err(|e| e.to_string())?;
    ensure(r.failures.is_empty(), "lemma32 failures at x0")?;
    Ok(parts.join(", "))
}

fn kirillov_instance(x: &ApartmentPoint, seed: u64) -> Result<(), String> {
    let f = q5();
    let (r, t) = (qi(1), qi(2));
    let en = enumerate_characters(&f, x, r, t, DEFAULT_ENUMERATION_CAP).map_err(|e| e.to_string())?;
    // Index from break data: entries with x_i − x_j ∈ Z contribute one digit each
    // between −t and −r (open at the bottom) shifted by the offset.
    let mut expected: u64 = 1;
    for i in 0..x.n() {
        for j in 0..x.n() {
            let c = x.diff(i, j);
            let steps = (-r - c).floor().to_integer() - (-t - c).floor().to_integer();
            expected *= 5u64.pow(steps as u32);
        }
    }
    ensure(en.len() == 625 && expected == 625, format!("{} cosets, index {expected}", en.len()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(Matrix, Matrix)> =
        (0..8).map(|_| (sample_g_xr(&f, x, Depth::at(r), &mut rng), sample_g_xr(&f, x, Depth::at(r), &mut rng))).collect();
    let deep: Vec<Matrix> = (0..4).map(|_| sample_g_xr(&f, x, Depth::at(t), &mut rng)).collect();
    let bad: Vec<String> = en
        .par_map(|c| {
            let d = coset_character(&c).map_err(|e| e.to_string())?;
            for (g, h) in &pairs {
                let lhs = d.eval(&g.mul(h)).map_err(|e| e.to_string())?;
                let rhs = &d.eval(g).map_err(|e| e.to_string())? + &d.eval(h).map_err(|e| e.to_string())?;
                if lhs != rhs {
                    return Err("homomorphism".to_string());
                }
            }
            for g in &deep {
                if !d.eval(g).map_err(|e| e.to_string())?.is_zero() {
                    return Err("nontrivial on G_{x,t}".into());
                }
            }
            if !d.trivial_on(Depth::at(t)).map_err(|e| e.to_string())? {
                return Err("nontrivial on generators of G_{x,t}".into());
            }
            if d.trivial_on(Depth::at(r)).map_err(|e| e.to_string())? != c.is_zero_coset() {
                return Err("perfect pairing".into());
            }
            Ok(())
        })
        .into_iter()
        .filter_map(|r| r.err())
        .collect();
    ensure(bad.is_empty(), format!("{} coset failures: {:?}", bad.len(), bad.first()))?;
    ensure(verify_duality(&f, x, r).map_err(|e| e.to_string())?, "duality at r")?;
    ensure(verify_duality(&f, x, Q::new(1, 2)).map_err(|e| e.to_string())?, "duality at 1/2")?;
    Ok(())
}

fn criterion_4_kirillov() -> Result<String, String> {
    kirillov_instance(&ApartmentPoint::origin(2), 4)?;
    kirillov_instance(&half_point(), 5)?;
    Ok("2 x 625 cosets, homomorphism/triviality/pairing/duality hold".into())
}

fn criterion_5_cor36() -> Result<String, String> {
    let f = q5();
    let (r, t) = (qi(1), qi(2));
    let half = half_point();
    let it = Intertwiner::new(&Matrix::from_i64(&f, &[&[1, 1], &[5, 1]]), &half, GroupKind::GL).map_err(|e| e.to_string())?;
    ensure(it.s().unwrap() == Q::new(1, 2), "s = 1/2")?;
    let en = enumerate_characters(&f, &half, r, t, DEFAULT_ENUMERATION_CAP).map_err(|e| e.to_string())?;
    let sum = check_cor36_exhaustive(&it, &en, DEFAULT_SEARCH_BOUND);
    ensure(sum.fails == 0 && sum.undecided == 0 && sum.precision_aborts == 0, format!("{sum:?}"))?;
    // The verdict is triviality on G_{x,3/2}; check it through the character too.
    for c in en.iter() {
        if it.intertwines(&c).unwrap() && is_degenerate(&c, DEFAULT_SEARCH_BOUND).unwrap().is_degenerate() {
            let d = coset_character(&c).unwrap();
            ensure(d.trivial_on(Depth::at(Q::new(3, 2))).unwrap(), "degenerate intertwined coset nontrivial on G_{x,3/2}")?;
        }
    }
    let x0 = ApartmentPoint::origin(2);
    let g2 = Matrix::from_i64(&f, &[&[2, 0], &[0, 1]]);
    let en0 = enumerate_characters(&f, &x0, r, t, DEFAULT_ENUMERATION_CAP).unwrap();
    let mut found = Vec::new();
    for c in en0.iter() {
        if gamma_intertwines(&g2, &c, GroupKind::GL).unwrap() && is_degenerate(&c, DEFAULT_SEARCH_BOUND).unwrap().is_degenerate() {
            found.push(c.is_zero_coset());
        }
    }
    ensure(found == vec![true], format!("degenerate intertwined cosets for diag(2,1): {found:?}"))?;
    Ok(format!("ramified: {} degenerate, {} intertwined, 0 violations; split: only the zero coset", sum.degenerate, sum.intertwined))
}

fn random_lambda(f: &Arc<LocalField>, rng: &mut ChaCha8Rng) -> Scalar {
    Scalar::from_int(f, rng.random_range(-500..501)).shift(rng.random_range(-3..4))
}

fn criterion_6_chevalley() -> Result<String, String> {
    let f = q5();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checks = 0;
    for n in [2usize, 3] {
        for b in Root::all(n) {
            for c in Root::all(n) {
                for _ in 0..100 {
                    let g = ChevalleyElement::Unipotent(b, random_lambda(&f, &mut rng));
                    let tgt = CartanOrRoot::Root(c);
                    let closed = chevalley_ad(&f, n, &g, &tgt).unwrap();
                    let direct = chevalley_direct(&f, n, &g, &tgt).unwrap();
                    ensure(closed.sub(&direct).is_exact_zero(), format!("root pair {b:?} {c:?}"))?;
                    checks += 1;
                }
            }
            for _ in 0..100 {
                let h: Vec<Scalar> = (0..n).map(|_| random_lambda(&f, &mut rng)).collect();
                let g = ChevalleyElement::Unipotent(b, random_lambda(&f, &mut rng));
                let tgt = CartanOrRoot::Cartan(h);
                let closed = chevalley_ad(&f, n, &g, &tgt).unwrap();
                ensure(closed.sub(&chevalley_direct(&f, n, &g, &tgt).unwrap()).is_exact_zero(), "cartan")?;
                let t: Vec<Scalar> = (0..n).map(|_| Scalar::one(&f).shift(rng.random_range(-2..3))).collect();
                let tg = ChevalleyElement::Torus(t);
                let tgt = CartanOrRoot::Root(b);
                ensure(
                    chevalley_ad(&f, n, &tg, &tgt).unwrap().sub(&chevalley_direct(&f, n, &tg, &tgt).unwrap()).is_exact_zero(),
                    "torus",
                )?;
                checks += 2;
            }
        }
    }
    Ok(format!("{checks} exact comparisons"))
}

fn random_integral_conjugator(f: &Arc<LocalField>, n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    loop {
        let vals: Vec<i64> = (0..n * n).map(|_| rng.random_range(-30..31)).collect();
        let g = Matrix::from_fn(f, n, |i, j| Scalar::from_int(f, vals[i * n + j]));
        if g.det().val().finite() == Some(qi(0)) {
            return g;
        }
    }
}

fn criterion_7_invariance() -> Result<String, String> {
    let f = q5();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let gammas: Vec<Matrix> = vec![
        Matrix::from_i64(&f, &[&[6, 0], &[0, 1]]),
        Matrix::from_i64(&f, &[&[1, 1], &[5, 1]]),
        Matrix::from_i64(&f, &[&[0, 1], &[-1, 0]]),
        Matrix::from_i64(&f, &[&[26, 0, 0], &[0, 1, 0], &[0, 0, 2]]),
    ];
    let tori: Vec<_> = gammas.iter().map(|g| torus_of(g, None).unwrap()).collect();
    let s: Vec<Q> = tori.iter().map(|t| s_gamma(t).unwrap()).collect();
    for i in 0..500 {
        let k = i % gammas.len();
        let g = random_integral_conjugator(&f, gammas[k].n(), &mut rng);
        let conj = gammas[k].conjugate_by(&g).unwrap();
        let sc = s_gamma(&torus_of(&conj, Some(&tori[k].splitting)).map_err(|e| e.to_string())?).unwrap();
        ensure(sc == s[k], format!("s changed under conjugation: {sc} vs {}", s[k]))?;
    }
    for i in 0..100 {
        let k = i % gammas.len();
        let z = Scalar::from_int(&f, rng.random_range(1..5) + 5 * rng.random_range(-9..10));
        let sz = s_gamma(&torus_of(&gammas[k].scale(&z), Some(&tori[k].splitting)).unwrap()).unwrap();
        ensure(sz == s[k], "s changed under a central twist")?;
    }
    let mut triples = 0;
    while triples < 100 {
        let (gamma, x) = match triples % 3 {
            0 => {
                let a = rng.random_range(1..5) + 5 * rng.random_range(0..5);
                let b = rng.random_range(1..5) + 5 * rng.random_range(0..5);
                if a == b {
                    continue;
                }
                let x = ApartmentPoint::new(vec![Q::new(rng.random_range(-4..5), 4), Q::new(rng.random_range(-4..5), 3)]);
                (Matrix::from_i64(&f, &[&[a, 0], &[0, b]]), x)
            }
            1 => {
                let a = rng.random_range(1..5);
                let b = 1 + 5 * rng.random_range(0..3);
                (Matrix::from_i64(&f, &[&[a, b], &[5 * b, a]]), half_point().translate(Q::new(rng.random_range(-3..4), 2)))
            }
            _ => (gammas[3].clone(), ApartmentPoint::new(vec![Q::new(1, 3), qi(0), Q::new(-2, 5)])),
        };
        let torus = torus_of(&gamma, None).map_err(|e| e.to_string())?;
        if !certify(&gamma, GroupKind::GL).unwrap().compact {
            continue;
        }
        ensure(point_in_torus_apartment(&torus, &x).map_err(|e| e.to_string())?, "constructed x not in the apartment")?;
        let r = Q::new(rng.random_range(-8..9), 4);
        let inv = gamma.inverse().unwrap();
        for gen in lattice_generators(&f, &x, Depth::at(r)) {
            let fwd = gamma.mul(&gen).mul(&inv);
            ensure(lattice_membership(&fwd, &x, Depth::at(r)).unwrap(), "Ad(gamma) moved a lattice generator out")?;
        }
        triples += 1;
    }
    Ok("500 conjugations, 100 twists, 100 stability triples".into())
}

fn criterion_8_precision() -> Result<String, String> {
    let f = q5();
    let approx_one = parse_scalar(&f, "1+O(5^24)").unwrap();
    let noise = &approx_one - &Scalar::one(&f);
    let x0 = ApartmentPoint::origin(2);
    let deep = Depth::at(qi(30));
    let noisy = Matrix::from_fn(&f, 2, |i, j| if i == j { noise.clone() } else { Scalar::zero(&f) });
    let ident = Matrix::identity(&f, 2);
    let t_gamma = torus_of(&Matrix::from_i64(&f, &[&[6, 0], &[0, 1]]), None).unwrap();
    let coarse = parse_scalar(&f, "1/125+O(5^-1)").unwrap();
    type Probe<'a> = (&'a str, Box<dyn Fn() -> charconst::Result<String> + 'a>);
    let probes: Vec<Probe> = vec![
        ("valuation", Box::new(|| noise.val().require("probe").map(|v| v.to_string()))),
        ("lattice_membership", Box::new(|| lattice_membership(&noisy, &x0, deep).map(|b| b.to_string()))),
        ("element_lattice_depth", Box::new(|| element_lattice_depth(&noisy, &x0).map(|d| d.to_string()))),
        ("group_membership", Box::new(|| group_membership(&ident.add(&noisy), &x0, deep).map(|b| b.to_string()))),
        ("parahoric_membership", Box::new(|| parahoric_membership(&noisy, &x0).map(|b| b.to_string()))),
        ("torus_membership", Box::new(|| torus_membership(&t_gamma, &ident.add(&noisy), deep).map(|b| b.to_string()))),
        ("frac_principal", Box::new(|| frac_principal(&coarse).map(|q| q.to_string()))),
        ("coset_representative", Box::new(|| {
            CharacterCoset::new(x0.clone(), qi(1), qi(2), &noisy.shift(-25)).map(|c| format!("{:?}", c.representative().render()))
        })),
        ("s_alpha", Box::new(|| {
            let mut t = t_gamma.clone();
            t.eigenvalues[0] = &t.eigenvalues[1] + &noise;
            s_alpha(&t, 0, 1).map(|v| v.to_string())
        })),
    ];
    let mut wrong = Vec::new();
    for (name, probe) in &probes {
        match probe() {
            Err(e) if e.kind() == "InsufficientPrecision" => {}
            other => wrong.push(format!("{name}: {other:?}")),
        }
    }
    ensure(wrong.is_empty(), wrong.join("; "))?;
    match certify(&ident.add(&noisy), GroupKind::GL) {
        Err(e) if e.is_precision() => {}
        other => return Err(format!("certify: {other:?}")),
    }
    Ok(format!("{} probes raise InsufficientPrecision", probes.len()))
}

fn main() -> std::process::ExitCode {
    let criteria: [(u32, &str, Check, Duration); 8] = [
        (1, "radius formula", criterion_1_radius, Duration::from_secs(1)),
        (2, "conjugation example and depth of Z", criterion_2_example, Duration::from_secs(5)),
        (3, "lemma fuzz suites", criterion_3_fuzz, Duration::from_secs(120)),
        (4, "Kirillov exhaustive", criterion_4_kirillov, Duration::from_secs(30)),
        (5, "corollary exhaustive", criterion_5_cor36, Duration::from_secs(30)),
        (6, "Chevalley closed forms", criterion_6_chevalley, Duration::from_secs(5)),
        (7, "invariance suite", criterion_7_invariance, Duration::from_secs(120)),
        (8, "precision honesty", criterion_8_precision, Duration::from_secs(60)),
    ];
    let mut failed = Vec::new();
    for (id, name, check, limit) in criteria {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let res = res.and_then(|msg| {
            if elapsed <= limit {
                Ok(msg)
            } else {
                Err(format!("took {elapsed:?}, limit {limit:?}"))
            }
        });
        match res {
            Ok(msg) => println!("criterion {id} PASS  {name}: {msg} [{} ms]", elapsed.as_millis()),
            Err(msg) => {
                println!("criterion {id} FAIL  {name}: {msg} [{} ms]", elapsed.as_millis());
                failed.push(id);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: 8/8 criteria passed");
        std::process::ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::ExitCode::FAILURE
    }
}
