use nastynoise::codes::{erasure_list_decode, gen_random_code, ReceivedWord};
use nastynoise::learn::{argmin_first, ice_filter, multiset};
use nastynoise::noise::{nasty_with_budget, tv_distance_weights, FlipRandom, RandomReplace};
use nastynoise::{LabeledExample, RngHandle, Sample};
use proptest::prelude::*;

fn sample(max_points: usize, max_len: usize) -> impl Strategy<Value = Sample> {
    prop::collection::vec(0..2 * max_points, 0..max_len)
        .prop_map(|v| v.into_iter().map(LabeledExample::from_labeled_index).collect())
}

fn dyadic(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0u32..16, len).prop_filter_map("all zero", |v| {
        let total: u32 = v.iter().sum();
        // Normalizing to a power-of-two total keeps every weight exact.
        (total > 0).then(|| {
            let mut w: Vec<f64> = v.iter().map(|&x| x as f64).collect();
            let pow = total.next_power_of_two();
            w[0] += (pow - total) as f64;
            w.iter().map(|x| x / pow as f64).collect()
        })
    })
}

proptest! {
    #[test]
    fn ice_is_idempotent(s in sample(5, 40)) {
        let once = ice_filter(&s);
        prop_assert_eq!(ice_filter(&once), once);
    }

    #[test]
    fn ice_leaves_no_contradiction(s in sample(5, 40)) {
        let out = ice_filter(&s);
        for e in &out {
            prop_assert!(!out.iter().any(|f| *f == e.contradiction()));
        }
        prop_assert_eq!((s.len() - out.len()) % 2, 0);
    }

    #[test]
    fn ice_commutes_with_permutation(s in sample(5, 40), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut shuffled = s.clone().into_vec();
        shuffled.shuffle(&mut RngHandle::from_seed(seed).rng());
        let a = ice_filter(&s);
        let b = ice_filter(&Sample::from_vec(shuffled));
        prop_assert_eq!(multiset(a.as_slice()), multiset(b.as_slice()));
    }

    #[test]
    fn nasty_ledger_is_consistent(s in sample(6, 60), z in 0usize..80, seed in any::<u64>(), replace in any::<bool>()) {
        let mut rng = RngHandle::from_seed(seed).rng();
        let (out, ledger) = if replace {
            nasty_with_budget(&s, z, &RandomReplace { domain_size: 6 }, &mut rng).unwrap()
        } else {
            nasty_with_budget(&s, z, &FlipRandom, &mut rng).unwrap()
        };
        prop_assert!(ledger.is_consistent());
        prop_assert!(ledger.budget <= z.min(s.len()));
        for i in 0..s.len() {
            if !ledger.is_corrupted(i) {
                prop_assert_eq!(out[i], s[i]);
            }
        }
    }

    #[test]
    fn encoding_is_linear(k in 1usize..12, extra in 0usize..20, seed in any::<u64>(), a in any::<u64>(), b in any::<u64>()) {
        let g = gen_random_code(k, k + extra, &mut RngHandle::from_seed(seed).rng()).unwrap();
        let mask = (1u64 << k) - 1;
        let (a, b) = (a & mask, b & mask);
        prop_assert_eq!(g.encode(a ^ b).unwrap().bits, g.encode(a).unwrap().bits ^ g.encode(b).unwrap().bits);
    }

    #[test]
    fn erasure_decoding_keeps_the_truth(seed in any::<u64>(), msg in any::<u64>(), mask in any::<u64>()) {
        let g = gen_random_code(6, 16, &mut RngHandle::from_seed(seed).rng()).unwrap();
        let m = msg & 0x3f;
        let r = ReceivedWord::erase(&g.encode(m).unwrap(), mask & 0xffff);
        let list = erasure_list_decode(&g, &r, 1 << 6).unwrap();
        prop_assert!(list.contains(&m));
        for x in list {
            prop_assert!(r.agrees_with(&g.encode(x).unwrap()));
        }
    }

    #[test]
    fn tv_is_a_metric(p in dyadic(6), q in dyadic(6), r in dyadic(6)) {
        let d = |a: &[f64], b: &[f64]| tv_distance_weights(a, b).unwrap();
        prop_assert_eq!(d(&p, &p), 0.0);
        prop_assert_eq!(d(&p, &q), d(&q, &p));
        prop_assert!(d(&p, &r) <= d(&p, &q) + d(&q, &r));
        prop_assert!((0.0..=1.0).contains(&d(&p, &q)));
    }

    #[test]
    fn argmin_is_first_minimum(v in prop::collection::vec(0u8..5, 1..30)) {
        let f: Vec<f64> = v.iter().map(|&x| x as f64).collect();
        let i = argmin_first(&f).unwrap();
        let min = f.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(f[i], min);
        prop_assert!(f[..i].iter().all(|&x| x > min));
        let mut longer = f.clone();
        longer.push(min);
        prop_assert_eq!(argmin_first(&longer), Some(i));
    }
}
