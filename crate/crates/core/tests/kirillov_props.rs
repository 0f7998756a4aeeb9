use std::sync::Arc;

use charconst::group::{sample_g_x0, ApartmentPoint, Depth};
use charconst::kirillov::{
    coset_character, enumerate_characters, sample_g_xr, verify_duality, CharacterCoset, DEFAULT_ENUMERATION_CAP,
};
use charconst::{LocalField, Q};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn qp(p: u64) -> Arc<LocalField> {
    LocalField::qp(p, 24).unwrap()
}

fn points() -> Vec<ApartmentPoint> {
    vec![ApartmentPoint::origin(2), ApartmentPoint::new(vec![Q::new(1, 2), Q::from_integer(0)])]
}

fn one() -> Q {
    Q::from_integer(1)
}

fn two() -> Q {
    Q::from_integer(2)
}

#[test]
fn characters_are_homomorphisms_and_pair_perfectly() {
    for p in [3u64, 5] {
        let f = qp(p);
        for (k, x) in points().into_iter().enumerate() {
            let en = enumerate_characters(&f, &x, one(), two(), DEFAULT_ENUMERATION_CAP).unwrap();
            assert_eq!(en.len(), p.pow(4));
            let mut rng = ChaCha8Rng::seed_from_u64(p * 10 + k as u64);
            let pairs: Vec<_> = (0..100)
                .map(|_| (sample_g_xr(&f, &x, Depth::at(one()), &mut rng), sample_g_xr(&f, &x, Depth::at(one()), &mut rng)))
                .collect();
            let bad: Vec<String> = en
                .par_map(|c| {
                    let d = coset_character(&c).unwrap();
                    for (g, h) in &pairs {
                        if d.eval(&g.mul(h)).unwrap() != &d.eval(g).unwrap() + &d.eval(h).unwrap() {
                            return Some(format!("{:?}", c.representative().render()));
                        }
                    }
                    if d.trivial_on(Depth::at(one())).unwrap() != c.is_zero_coset() {
                        return Some("pairing".into());
                    }
                    None
                })
                .into_iter()
                .flatten()
                .collect();
            assert!(bad.is_empty(), "p = {p}, x = {:?}: {bad:?}", x.render());
        }
    }
}

#[test]
fn duals_are_the_plus_lattices() {
    for p in [3u64, 5, 7] {
        let f = qp(p);
        for x in points() {
            for r in [Q::new(-1, 2), Q::from_integer(0), Q::new(1, 2), one(), Q::new(5, 2)] {
                assert!(verify_duality(&f, &x, r).unwrap(), "p = {p}, r = {r}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn characters_are_equivariant(idx in 0u64..625, half in any::<bool>(), seed in any::<u64>()) {
        let f = qp(5);
        let x = points()[half as usize].clone();
        let en = enumerate_characters(&f, &x, one(), two(), DEFAULT_ENUMERATION_CAP).unwrap();
        let c = en.get(idx);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (k, k_inv) = sample_g_x0(&f, &x, &mut rng);
        let moved = k.mul(c.representative()).mul(&k_inv);
        let c2 = CharacterCoset::new(x.clone(), one(), two(), &moved).unwrap();
        let (d, d2) = (coset_character(&c).unwrap(), coset_character(&c2).unwrap());
        for _ in 0..5 {
            let g = sample_g_xr(&f, &x, Depth::at(one()), &mut rng);
            let g2 = k.mul(&g).mul(&k_inv);
            prop_assert_eq!(d2.eval(&g2).unwrap(), d.eval(&g).unwrap());
        }
    }
}
