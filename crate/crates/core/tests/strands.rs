mod common;

use std::time::Instant;

use common::strand_families::{degrees, lemma_violations, word_counts, ShapeCache};
use edray_core::extraction::{check_parity, check_strand_degrees, extract_ray};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn synthetic_aligned_families_satisfy_strand_lemmas() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut cache = ShapeCache::new();
    for round in 0..1000 {
        let k = 2 + round % 3;
        let len = rng.gen_range(1..=5);
        let fam = cache.draw(&mut rng, k, len);
        let s = &fam.strand;
        let violations = lemma_violations(&fam);
        assert!(violations.is_empty(), "round {round}: {violations:?}");
        let start_ones = degrees(s)
            .iter()
            .filter(|(v, &d)| d == 1 && s.start().separator.contains(v))
            .count();
        let (lvr, rvl) = word_counts(&fam.shapes[0]);

        let report = check_strand_degrees(s);
        assert!(report.passed(), "round {round}: {:?}", report.violations);
        assert_eq!(report.degree_one_start.len(), start_ones);
        let parity = check_parity(s);
        assert!(parity.holds, "round {round}: {parity:?}");
        assert_eq!((parity.lvr, parity.rvl), (lvr, rvl));
        let ray = extract_ray(s).unwrap();
        assert!(s.start().separator.contains(&ray[0]));
        assert!(s.frontier().separator.contains(ray.last().unwrap()));
    }
    assert!(started.elapsed().as_secs() < 30);
}

#[test]
fn broken_piece_is_reported() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut cache = ShapeCache::new();
    let mut fam = cache.draw(&mut rng, 3, 3);
    while fam.strand.pieces[1].is_empty() {
        fam = cache.draw(&mut rng, 3, 3);
    }
    let mut pieces = fam.strand.pieces.clone();
    pieces[1].pop();
    let broken = edray_core::extraction::Strand::from_parts(1, 0, fam.strand.crossings.clone(), pieces).unwrap();
    assert!(!check_strand_degrees(&broken).passed());
}
