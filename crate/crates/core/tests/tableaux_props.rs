use proptest::prelude::*;
use schurtwirl::tableaux::{enumerate_partitions, hook_dimension, standard_tableaux, weyl_dimension, Partition};

/// Hook-content formula, an independent route to the Weyl dimension.
fn content_dimension(p: &Partition, d: usize) -> f64 {
    let mut acc = 1.0;
    for (r, &len) in p.rows().iter().enumerate() {
        for c in 0..len {
            acc *= (d as f64 + c as f64 - r as f64) / p.hook(r, c) as f64;
        }
    }
    acc
}

#[test]
fn blocks_fill_the_tensor_space() {
    for d in 1..=32usize {
        let mut t = 1;
        while d.pow(t as u32) <= 1024 {
            let total: u64 = enumerate_partitions(t, d)
                .iter()
                .map(|p| weyl_dimension(p, d).unwrap() * hook_dimension(p))
                .sum();
            assert_eq!(total, d.pow(t as u32) as u64, "d={d}, t={t}");
            t += 1;
            if d == 1 && t > 10 {
                break;
            }
        }
    }
}

#[test]
fn tableau_count_is_hook_dimension() {
    for t in 1..=6 {
        for p in enumerate_partitions(t, t) {
            let tabs = standard_tableaux(&p);
            assert_eq!(tabs.len() as u64, hook_dimension(&p), "{p}");
            let mut words: Vec<_> = tabs.iter().map(|t| t.reading_word()).collect();
            words.dedup();
            assert_eq!(words.len(), tabs.len());
        }
    }
}

#[test]
fn enumeration_is_deterministic() {
    assert_eq!(enumerate_partitions(6, 3), enumerate_partitions(6, 3));
    let ps = enumerate_partitions(7, 4);
    assert!(ps.windows(2).all(|w| w[0].rows() > w[1].rows()));
    assert!(ps.iter().all(|p| p.len() <= 4 && p.size() == 7));
}

proptest! {
    #[test]
    fn weyl_matches_hook_content(t in 1usize..8, d in 1usize..7) {
        for p in enumerate_partitions(t, d) {
            let exact = weyl_dimension(&p, d).unwrap() as f64;
            prop_assert!((exact - content_dimension(&p, d)).abs() < 1e-6);
        }
    }
}
