mod common;

use common::shaping_oracle::{exists, random_levels, single_codes};
use edray_core::extraction::{shaping_select, Shaping};
use edray_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn check(d: &[Vec<Shaping>], width: usize, want: usize) {
    let expected = exists(d, width, want, &[0, 1], &[0, 1]);
    match shaping_select(d, want) {
        Ok(sel) => {
            assert_eq!(sel.len(), want);
            assert!(sel.verify(d).is_empty(), "{:?}", sel.verify(d));
            assert!(expected, "selection found where the oracle sees none");
        }
        Err(Error::NeedsLargerHorizon { .. }) => assert!(!expected, "oracle found a selection of length {want}"),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn exhaustive_two_levels_width_two() {
    let mut shapings = Vec::new();
    for single in single_codes(2) {
        for p in 0..2 {
            shapings.push(Shaping::new(single.clone(), move |_, _| p));
        }
    }
    for a in &shapings {
        for b in &shapings {
            for c in &shapings {
                let d = vec![vec![a.clone()], vec![b.clone(), c.clone()]];
                for want in 1..=2 {
                    check(&d, 2, want);
                }
            }
        }
    }
}

#[test]
fn exhaustive_two_levels_width_three_constant_pairs() {
    let shapings: Vec<Shaping> = single_codes(3).into_iter().map(|s| Shaping::new(s, |_, _| 0)).collect();
    for a in &shapings {
        for b in &shapings {
            for c in &shapings {
                let d = vec![vec![a.clone()], vec![b.clone(), c.clone()]];
                for want in 1..=2 {
                    check(&d, 3, want);
                }
            }
        }
    }
}

#[test]
fn random_instances_agree_with_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for round in 0..200 {
        let levels = 2 + round % 11;
        let width = 3 + round % 4;
        let d = random_levels(&mut rng, levels, width, 2, 2);
        for want in 1..=3 {
            check(&d, width, want);
        }
    }
}

#[test]
fn undefined_level_asks_for_more_window() {
    let d = vec![vec![Shaping::new(vec![None, None], |_, _| 0)]];
    assert!(matches!(shaping_select(&d, 1), Err(Error::NeedsLargerHorizon { .. })));
}

#[test]
fn monochrome_levels_select_everything() {
    let d: Vec<Vec<Shaping>> = (1..=4)
        .map(|i| (0..i).map(|_| Shaping::new(vec![Some(0); 4], |_, _| 1)).collect())
        .collect();
    let sel = shaping_select(&d, 4).unwrap();
    assert_eq!(sel.levels, vec![1, 2, 3, 4]);
    assert_eq!(sel.indices, vec![0, 1, 2, 3]);
    assert_eq!(sel.sets[3], vec![0, 1, 2, 3]);
}
