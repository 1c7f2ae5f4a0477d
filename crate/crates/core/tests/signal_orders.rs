use std::collections::BTreeSet;

use dropcase_core::{
    dominates, is_minimal_k, k_constraint_automaton, k_minimal_automaton, minimal_filter,
    minimal_signals_bfs, Signal,
};
use proptest::prelude::*;

fn all_signals(len: usize) -> Vec<Signal> {
    (0..1u32 << len)
        .map(|v| Signal::new((0..len).map(|i| ((v >> (len - 1 - i)) & 1) as u8).collect()).unwrap())
        .collect()
}

fn has_zero_run(s: &Signal, run: usize) -> bool {
    let mut cur = 0;
    for &b in s.bits() {
        cur = if b == 0 { cur + 1 } else { 0 };
        if cur >= run {
            return true;
        }
    }
    false
}

#[test]
fn dominance_is_a_partial_order() {
    for len in 1..=6 {
        let all = all_signals(len);
        for a in &all {
            assert!(dominates(a, a));
            for b in &all {
                if dominates(a, b) && dominates(b, a) {
                    assert_eq!(a, b);
                }
                for c in &all {
                    if dominates(a, b) && dominates(b, c) {
                        assert!(dominates(a, c), "{a} {b} {c}");
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn dominance_laws_up_to_ten_bits(len in 1usize..=10, a in any::<u16>(), b in any::<u16>(), c in any::<u16>()) {
        let mk = |v: u16| Signal::new((0..len).map(|i| ((v >> i) & 1) as u8).collect()).unwrap();
        let (a, b, c) = (mk(a), mk(b), mk(c));
        prop_assert!(dominates(&a, &a));
        if dominates(&a, &b) && dominates(&b, &a) {
            prop_assert_eq!(&a, &b);
        }
        if dominates(&a, &b) && dominates(&b, &c) {
            prop_assert!(dominates(&a, &c));
        }
        // meet is below both
        let meet = Signal::new(a.bits().iter().zip(b.bits()).map(|(x, y)| x & y).collect()).unwrap();
        prop_assert!(dominates(&meet, &a) && dominates(&meet, &b));
    }
}

#[test]
fn constraint_language_is_no_long_zero_run() {
    for k in 1..=3 {
        let a = k_constraint_automaton(k);
        for len in 1..=10 {
            let got = a.enumerate_admissible(len);
            let expected: BTreeSet<Signal> =
                all_signals(len).into_iter().filter(|s| !has_zero_run(s, k + 1)).collect();
            assert_eq!(got.iter().cloned().collect::<BTreeSet<_>>(), expected, "k={k} T={len}");
            for s in got.iter() {
                assert!(a.is_admissible(s));
            }
        }
    }
}

#[test]
fn minimal_generators_agree() {
    for k in 1..=3 {
        let a = k_constraint_automaton(k);
        for len in 1..=14 {
            let filtered = minimal_filter(&a.enumerate_admissible(len));
            let fast = minimal_signals_bfs(k, len);
            assert_eq!(fast, filtered, "k={k} T={len}");
            for s in fast.iter() {
                assert!(a.is_admissible(s));
            }
            let closed_form: BTreeSet<Signal> = a
                .enumerate_admissible(len)
                .iter()
                .filter(|s| is_minimal_k(s, k))
                .cloned()
                .collect();
            assert_eq!(filtered.iter().cloned().collect::<BTreeSet<_>>(), closed_form, "k={k} T={len}");
        }
    }
}

#[test]
fn minimal_automaton_paths_are_admissible() {
    for k in 1..=3 {
        let m = k_minimal_automaton(k);
        let c = k_constraint_automaton(k);
        for len in 1..=10 {
            for s in m.enumerate_admissible(len).iter() {
                assert!(c.is_admissible(s), "k={k} {s}");
            }
        }
    }
}

#[test]
fn non_minimal_signals_admit_an_admissible_flip() {
    for k in 1..=3 {
        let a = k_constraint_automaton(k);
        for len in 1..=12 {
            let admissible = a.enumerate_admissible(len);
            let minimal = minimal_filter(&admissible);
            for s in admissible.iter() {
                let ones: Vec<usize> = s.support().collect();
                // search nonempty subsets of the 1-positions
                let flippable = (1u32..1 << ones.len()).any(|mask| {
                    let mut bits = s.bits().to_vec();
                    for (j, &pos) in ones.iter().enumerate() {
                        if mask >> j & 1 == 1 {
                            bits[pos] = 0;
                        }
                    }
                    a.is_admissible(&Signal::new(bits).unwrap())
                });
                assert_eq!(flippable, !minimal.contains(s), "k={k} {s}");
            }
        }
    }
}
