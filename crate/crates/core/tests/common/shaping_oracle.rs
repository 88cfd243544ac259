use edray_core::extraction::Shaping;
use rand::Rng;

fn increasing(from: usize, to: usize, len: usize) -> Vec<Vec<usize>> {
    if len == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for x in from..to {
        for mut rest in increasing(x + 1, to, len - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

fn words(alphabet: &[u32], len: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                alphabet.iter().map(move |&c| {
                    let mut w = w.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out
}

/// Whether a selection of length `want` exists, by enumerating every choice
/// of levels, indices and colours and taking each set maximal.
pub fn exists(d: &[Vec<Shaping>], width: usize, want: usize, c1: &[u32], c2: &[u32]) -> bool {
    if want == 0 {
        return true;
    }
    for levels in increasing(0, d.len(), want) {
        if levels.iter().enumerate().any(|(t, &l)| d[l].len() < t + 1) {
            continue;
        }
        for idx in increasing(0, width, want) {
            for singles in words(c1, want) {
                for pairs in words(c2, want - 1) {
                    let ok = (0..want).all(|t| {
                        let count = d[levels[t]]
                            .iter()
                            .filter(|s| {
                                s.c1(idx[t]) == Some(singles[t])
                                    && (t + 1 == want
                                        || (s.c1(idx[t + 1]) == Some(singles[t + 1])
                                            && s.c2(idx[t], idx[t + 1]) == pairs[t]))
                            })
                            .count();
                        count > t
                    });
                    if ok {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Level `i` (from 1) holds `i` random shapings; every shaping has at least
/// one defined single colour.
pub fn random_levels<R: Rng>(rng: &mut R, levels: usize, width: usize, c1: u32, c2: u32) -> Vec<Vec<Shaping>> {
    (1..=levels)
        .map(|i| {
            (0..i)
                .map(|_| {
                    let mut single: Vec<Option<u32>> = (0..width)
                        .map(|_| if rng.gen_bool(0.2) { None } else { Some(rng.gen_range(0..c1)) })
                        .collect();
                    if single.iter().all(Option::is_none) {
                        let j = rng.gen_range(0..width);
                        single[j] = Some(rng.gen_range(0..c1));
                    }
                    let pair: Vec<u32> = (0..width * width).map(|_| rng.gen_range(0..c2)).collect();
                    Shaping::new(single, move |a, b| pair[a * width + b])
                })
                .collect()
        })
        .collect()
}

/// Every single-colour table over `width` indices with colours in {0, 1}
/// and at least one defined entry.
pub fn single_codes(width: usize) -> Vec<Vec<Option<u32>>> {
    let mut out = vec![Vec::new()];
    for _ in 0..width {
        out = out
            .into_iter()
            .flat_map(|w: Vec<Option<u32>>| {
                [None, Some(0), Some(1)].into_iter().map(move |c| {
                    let mut w = w.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out.retain(|w| w.iter().any(Option::is_some));
    out
}
