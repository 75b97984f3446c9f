use std::collections::BTreeSet;

use proptest::prelude::*;
use tuatara_core::binstr::{bin_inv, is_prefix_free, BitString};
use tuatara_core::complexity::{floor_log2, nabla, plain_k, ExecutableMachine};
use tuatara_core::egyptian::{egyptian_floor_capped, kraft_chaitin, unit_sum_to_prefix_free};
use tuatara_core::machines::{
    classify, omega_enclosure, zeta_enclosure, Builtin, Class, FiniteTable, MachineSpec,
};
use tuatara_core::numerics::{certified_decimal, digits, int, ratio, Enclosure, Rational};

fn bits(max: usize) -> impl Strategy<Value = BitString> {
    prop::collection::vec(any::<bool>(), 0..=max).prop_map(BitString::from_bits)
}

fn prefix_free(max_len: usize) -> impl Strategy<Value = BTreeSet<BitString>> {
    prop::collection::vec(bits(max_len), 0..10).prop_map(|ws| {
        let mut set = BTreeSet::new();
        for w in ws {
            if set.iter().all(|v: &BitString| !v.is_prefix_of(&w) && !w.is_prefix_of(v)) {
                set.insert(w);
            }
        }
        set
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prefix_free_machines_are_tuatara(set in prefix_free(8)) {
        let m = MachineSpec::finite(set).unwrap();
        let (z, o) = classify(&m, 100).unwrap();
        prop_assert_eq!(z.class, Class::Tuatara);
        prop_assert_eq!(o.class, Class::Tuatara);
    }

    #[test]
    fn larger_budgets_never_widen(set in prefix_free(5), small in 1usize..40) {
        let m = MachineSpec::TuataraOf(Box::new(MachineSpec::Product(Box::new(
            MachineSpec::finite(set.into_iter().filter(|w| !w.is_empty()).chain([BitString::from_bits(vec![true; 6])])).unwrap(),
        ))));
        if m.validate(0).is_err() {
            return Ok(());
        }
        let a = zeta_enclosure(&m, small).unwrap();
        let b = zeta_enclosure(&m, small * 4).unwrap();
        prop_assert!(b.lo() >= a.lo());
        if let (Some(ha), Some(hb)) = (a.hi(), b.hi()) {
            prop_assert!(hb <= ha);
        }
    }

    #[test]
    fn kraft_codes_are_prefix_free(lengths in prop::collection::vec(1usize..12, 0..40)) {
        let total: Rational = lengths.iter().map(|&l| ratio(1, 1i64 << l)).sum();
        match kraft_chaitin(lengths.clone()) {
            Ok(code) => {
                prop_assert!(total <= int(1));
                prop_assert!(is_prefix_free(&code.words));
                prop_assert_eq!(code.lengths(), lengths);
            }
            Err(_) => prop_assert!(total > int(1)),
        }
    }

    #[test]
    fn unit_sums_become_prefix_free_codes(ms in prop::collection::vec(2u64..40, 1..6)) {
        let ms: Vec<u64> = ms.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let total: Rational = ms.iter().map(|&m| ratio(1, m as i64)).sum();
        prop_assume!(total <= int(1));
        let code = unit_sum_to_prefix_free(ms.iter().copied(), 30).unwrap();
        prop_assert!(is_prefix_free(&code.words));
        prop_assert!(code.omega() <= total);
    }

    #[test]
    fn egyptian_expansions_sum_exactly(n in 1i64..40, d in 1i64..40, floor in 2u64..8) {
        let q = ratio(n, d);
        if let Ok(list) = egyptian_floor_capped(&q, floor, 4096) {
            prop_assert_eq!(list.sum(), q);
            prop_assert!(list.denominators.iter().all(|m| *m >= floor.into()));
        }
    }

    #[test]
    fn printed_digits_lie_in_the_enclosure(a in 0i64..1000, w in 1i64..1000) {
        let lo = ratio(a, 1000);
        let hi = ratio(a + w, 1000).min(int(1));
        let e = Enclosure::new(lo.clone(), hi.clone()).unwrap();
        let d = digits(&e, 16);
        let x = tuatara_core::binstr::rational_of_prefix(&d.digits);
        let ulp = ratio(1, 1i64 << d.determined_count);
        // Every point of the enclosure starts with these digits.
        prop_assert!(x <= lo && hi <= &x + &ulp);
        if let Some(s) = certified_decimal(&e, 6) {
            let shown = tuatara_core::numerics::parse_rational(&s).unwrap();
            let places = s.split_once('.').map_or(0, |(_, f)| f.len() as u32);
            let step = ratio(1, 10i64.pow(places));
            prop_assert!(shown <= lo && hi < &shown + &step);
        }
    }

    #[test]
    fn natural_complexity_tracks_plain(entries in prop::collection::btree_map(bits(6), bits(2), 1..10)) {
        let t = FiniteTable::with_outputs(entries.iter().map(|(w, o)| (w.clone(), Some(o.clone())))).unwrap();
        let m = ExecutableMachine::table(t).unwrap();
        for x in entries.values() {
            let k = plain_k(&m, x, 1000).unwrap().unwrap();
            let n = nabla(&m, x, 1000).unwrap().unwrap();
            prop_assert_eq!(k.length() as u64, floor_log2(&n));
            prop_assert_eq!(bin_inv(&k.input), n);
        }
    }
}

#[test]
fn lukasiewicz_omega_is_one() {
    let e = omega_enclosure(&MachineSpec::Builtin(Builtin::Lukasiewicz), 2000).unwrap();
    assert_eq!(e.exact_value(), Some(&int(1)));
}
