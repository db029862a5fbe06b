use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{decode, encode, PointSet};
use crate::error::{check_budget, invalid, Result};
use crate::geometry::{enumerate_projective, line_points, Line};

/// Largest grid `N^n` the exact search accepts.
pub const MAX_BRUTEFORCE_GRID: u128 = 20;

/// For each direction, the bitmasks of its lines.
fn line_masks(modulus: u64, dim: usize) -> Result<Vec<Vec<u32>>> {
    let grid = modulus.pow(dim as u32);
    let dirs = enumerate_projective(modulus, dim)?;
    Ok(dirs
        .into_iter()
        .map(|d| {
            let mut masks: Vec<u32> = (0..grid)
                .map(|code| {
                    let line = Line::new(decode(code, modulus, dim), d.clone()).expect("dims agree");
                    line_points(&line)
                        .iter()
                        .fold(0u32, |m, x| m | 1 << encode(x, modulus))
                })
                .collect();
            masks.sort_unstable();
            masks.dedup();
            masks
        })
        .collect())
}

/// Exact minimum size of a Kakeya set in `(Z/NZ)^n` for `N^n ≤ 20`, with
/// the first minimum in increasing bitmask order as witness.
pub fn min_kakeya_bruteforce(modulus: u64, dim: usize) -> Result<(usize, PointSet)> {
    if modulus < 2 || dim == 0 {
        return Err(invalid("need N >= 2 and n >= 1"));
    }
    let grid = (modulus as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    check_budget("exhaustive subset search grid", grid, MAX_BRUTEFORCE_GRID)?;
    let grid = grid as u32;
    let masks = line_masks(modulus, dim)?;
    let covers = |s: u32| masks.iter().all(|ls| ls.iter().any(|&l| l & s == l));
    // any Kakeya set contains a whole line
    for size in modulus as u32..=grid {
        let mut s: u32 = (1u32 << size) - 1;
        let limit = 1u32 << grid;
        while s < limit {
            if covers(s) {
                let codes = (0..grid).filter(|b| s >> b & 1 == 1).map(u64::from).collect();
                return Ok((size as usize, PointSet::from_codes(modulus, dim, codes)));
            }
            // next subset of the same size (Gosper)
            let c = s & s.wrapping_neg();
            let r = s + c;
            if r == 0 {
                break;
            }
            s = (((r ^ s) >> 2) / c) | r;
        }
    }
    unreachable!("the full grid is a Kakeya set")
}

/// Greedy Kakeya set: directions are visited in a seeded random order and
/// each uncovered direction gets the line sharing the most points with the
/// set so far, ties broken by the same generator.
pub fn greedy_kakeya(modulus: u64, dim: usize, seed: u64) -> Result<PointSet> {
    if modulus < 2 || dim == 0 {
        return Err(invalid("need N >= 2 and n >= 1"));
    }
    let grid = (modulus as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    check_budget("greedy grid", grid, 1 << 24)?;
    let mut dirs = enumerate_projective(modulus, dim)?;
    check_budget("greedy work", grid * dirs.len() as u128, 1 << 32)?;
    let grid = grid as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    dirs.shuffle(&mut rng);
    let f = crate::ring::factorize(modulus)?;
    let mut chosen = vec![false; grid as usize];
    for d in &dirs {
        let lab = crate::geometry::LineLabeler::new(d, &f)?;
        let mut overlap: std::collections::HashMap<u64, u64> = Default::default();
        for code in 0..grid {
            let entry = overlap.entry(lab.label(&decode(code, modulus, dim))).or_default();
            *entry += u64::from(chosen[code as usize]);
        }
        if overlap.values().any(|&c| c == modulus) {
            continue;
        }
        let best = *overlap.values().max().expect("lines exist");
        let mut ties: Vec<u64> = overlap
            .into_iter()
            .filter(|&(_, c)| c == best)
            .map(|(l, _)| l)
            .collect();
        ties.sort_unstable();
        let pick = ties[rng.gen_range(0..ties.len())];
        let line = Line::new(decode(pick, modulus, dim), d.clone())?;
        for x in line_points(&line) {
            chosen[encode(&x, modulus) as usize] = true;
        }
    }
    let codes = (0..grid).filter(|&c| chosen[c as usize]).collect();
    Ok(PointSet::from_codes(modulus, dim, codes))
}
