use super::*;
use crate::geometry::{canonicalize, enumerate_projective, Line};
use crate::kakeya::construct_kakeya_pk;
use crate::linalg::{kronecker, Ring};

fn dir(rep: &[u64], modulus: u64) -> Direction {
    canonicalize(rep, modulus).unwrap()
}

#[test]
fn small_m_examples() {
    let m = build_m(2, 1, 1).unwrap();
    let dense = m.to_ring_matrix().unwrap();
    let ring = m.ring().unwrap();
    assert_eq!(dense.get(0, 0), &ring.one());
    assert_eq!(dense.get(0, 1), &ring.one());
    assert_eq!(dense.get(1, 0), &ring.one());
    assert_eq!(dense.get(1, 1), &ring.monomial(1));
    assert_eq!(build_m(2, 2, 1).unwrap().rank().unwrap(), 4);
    assert!(build_m(4, 1, 1).is_err());
    assert!(build_m(2, 14, 1).is_err());
}

#[test]
fn streamed_rank_matches_dense_rank() {
    for (p, ell, n) in [(2, 1, 1), (2, 1, 2), (2, 2, 1), (2, 2, 2), (3, 1, 2), (3, 1, 1), (5, 1, 1)] {
        let m = build_m(p, ell, n).unwrap();
        assert_eq!(m.rank().unwrap(), m.to_ring_matrix().unwrap().rank(), "{p} {ell} {n}");
    }
}

#[test]
fn m_is_kronecker_power() {
    for (p, ell) in [(2, 1), (2, 2), (3, 1)] {
        let m1 = build_m(p, ell, 1).unwrap().to_ring_matrix().unwrap();
        let m2 = build_m(p, ell, 2).unwrap().to_ring_matrix().unwrap();
        assert_eq!(kronecker(&m1, &m1).unwrap(), m2);
    }
}

#[test]
fn valuation_examples_and_floor_oracle() {
    assert_eq!(diag_valuation(0, 5), 0);
    assert_eq!(diag_valuation(3, 2), 4);
    assert_eq!(diag_valuation(5, 3), 7);
    for p in [2u64, 3, 5, 7] {
        for j in 0..500u64 {
            let mut floor_form = 0;
            let mut pt = 1;
            while pt <= j {
                floor_form += (j / pt - j / (pt * p)) * pt;
                pt *= p;
            }
            assert_eq!(diag_valuation(j, p), floor_form);
        }
    }
}

#[test]
fn relaxed_bound_dominates_valuation() {
    for p in [2u64, 3, 5] {
        for ell in 1..=4 {
            for j in 0..p.pow(ell) {
                assert!(rational_int(diag_valuation(j, p)) <= relaxed_valuation(j, p, ell));
            }
            assert!(relaxed_rank_bound(p, ell, 2).unwrap() <= diag_rank_bound(p, ell, 2).unwrap());
        }
    }
}

/// `w`-adic valuation of an element of `F_p[z]/⟨z^q - 1⟩` under `z = 1 + w`.
fn w_valuation(coeffs: &[u64], p: u64) -> Option<usize> {
    let q = coeffs.len();
    let mut w = vec![0u64; q];
    for (i, &c) in coeffs.iter().enumerate() {
        if c == 0 {
            continue;
        }
        for (t, slot) in w.iter_mut().enumerate().take(i + 1) {
            *slot = (*slot + c * crate::ring::lucas_binom(i as u64, t as u64, p)) % p;
        }
    }
    w.iter().position(|&x| x != 0)
}

#[test]
fn diagonal_products_have_predicted_valuation() {
    for (p, ell) in [(2u64, 1u32), (2, 2), (2, 3), (2, 4), (2, 5), (2, 6), (3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (7, 2)] {
        let ring = FpQuot::tbar(p, ell).unwrap();
        let q = p.pow(ell);
        for j in 0..q as usize {
            let mut prod = ring.one();
            for i in 0..j {
                prod = ring.mul(&prod, &ring.sub(&ring.monomial(j), &ring.monomial(i)));
            }
            let predicted = diag_valuation(j as u64, p);
            match w_valuation(&prod, p) {
                Some(v) => assert_eq!(v as u64, predicted, "p={p} ell={ell} j={j}"),
                None => assert!(predicted >= q, "p={p} ell={ell} j={j}"),
            }
        }
    }
}

#[test]
fn rank_bound_examples() {
    let u = |x: u32| BigUint::from(x);
    assert_eq!(diag_rank_bound(2, 2, 1).unwrap(), u(3));
    assert_eq!(diag_rank_bound(2, 2, 2).unwrap(), u(6));
    assert_eq!(diag_rank_bound(2, 3, 1).unwrap(), u(4));
    let i = |x: i32| BigInt::from(x);
    assert_eq!(binom_rank_bound(2, 2, 1).unwrap(), i(3));
    assert_eq!(binom_rank_bound(2, 2, 2).unwrap(), i(6));
    assert_eq!(binom_rank_bound(3, 2, 2).unwrap(), i(18));
    assert!(!relaxed_threshold_holds(3, 2).unwrap());
    assert!(relaxed_threshold_holds(2, 2).unwrap());
}

#[test]
fn rank_dominates_diagonal_bound() {
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        for ell in 1..=10u32 {
            for n in 1..=4usize {
                if p.checked_pow(ell * n as u32).map_or(true, |s| s > 1000) {
                    continue;
                }
                let rank = build_m(p, ell, n).unwrap().rank().unwrap();
                let diag = diag_rank_bound(p, ell, n).unwrap();
                assert!(BigUint::from(rank) >= diag, "p={p} ell={ell} n={n}");
                if ell >= 2 {
                    assert!(
                        BigInt::from(diag) >= binom_rank_bound(p, ell, n).unwrap(),
                        "p={p} ell={ell} n={n}"
                    );
                }
            }
        }
    }
}

#[test]
fn restricted_rank_examples() {
    for (p, ell, n) in [(2, 2, 2), (2, 2, 1), (3, 2, 1), (2, 1, 2), (3, 1, 2), (2, 3, 2), (2, 2, 3)] {
        let r = verify_restricted_rank(p, ell, n).unwrap();
        assert!(r.equal(), "{r:?}");
    }
    assert_eq!(verify_restricted_rank(2, 2, 1).unwrap().restricted_rows, 2);
}

#[test]
fn lift_examples() {
    let lifted = lift_directions(&[dir(&[1, 0], 2)], 2, 1, 2).unwrap();
    let mut got = lifted.lifted.clone();
    got.sort();
    assert_eq!(got, vec![vec![1, 0], vec![1, 2], vec![3, 0], vec![3, 2]]);
    assert!(lift_directions(&[dir(&[1, 0], 4)], 2, 2, 1).is_err());
    assert!(lift_directions(&[dir(&[1, 0], 4)], 2, 1, 2).is_err());
}

#[test]
fn gl_enumeration() {
    assert_eq!(gl_order(2, 2, 2).unwrap(), 96);
    let all = enumerate_gl(2, 2, 2).unwrap();
    assert_eq!(all.len(), 96);
    let distinct: HashSet<_> = all.iter().collect();
    assert_eq!(distinct.len(), 96);
    assert_eq!(enumerate_gl(3, 1, 2).unwrap().len(), 48);
    for w in sample_gl(5, 2, 3, 50, 7).unwrap() {
        assert_ne!(det_mod_p(w.entries(), 3, 5), 0);
    }
    assert!(RotationMatrix::new(2, 1, 2, vec![1, 1, 1, 1]).is_err());
}

#[test]
fn rotation_search_examples() {
    let r = best_rotation_rank(2, 1, 1, &[dir(&[1, 0], 2)], 1000, 0).unwrap();
    assert!(r.exhaustive);
    assert_eq!(r.rank, 2);
    assert_eq!(r.rank_bound, BigInt::from(2));
    assert!(r.meets_bound());

    let dirs = enumerate_projective(4, 2).unwrap();
    let half: Vec<Direction> = dirs.iter().step_by(2).cloned().collect();
    let r = best_rotation_rank(2, 2, 2, &half, 1000, 0).unwrap();
    assert!(r.exhaustive);
    assert_eq!(r.candidates, 96);
    assert!(r.meets_bound(), "{r:?}");

    let sampled = best_rotation_rank(2, 2, 2, &half, 10, 3).unwrap();
    assert!(!sampled.exhaustive);
    assert!(sampled.rank <= r.rank);
}

#[test]
fn rotation_tie_break_is_least_matrix() {
    let all = enumerate_projective(3, 2).unwrap();
    let r = best_rotation_rank(3, 1, 1, &all, 1000, 0).unwrap();
    // the full direction set is rotation invariant
    assert_eq!(r.best, enumerate_gl(3, 1, 2).unwrap().into_iter().min().unwrap());
}

#[test]
fn rich_line_examples() {
    let full = PointSet::full(2, 2).unwrap();
    let mut wit = KakeyaWitness::new();
    for d in enumerate_projective(2, 2).unwrap() {
        wit.insert(Line::new(vec![0, 0], d).unwrap());
    }
    let r = rich_line_rank_inequality(&full, 2, 1, &wit).unwrap();
    assert_eq!((r.lhs.clone(), r.rhs), (BigUint::from(4u32), 3));
    assert!(r.pass());

    let empty = rich_line_rank_inequality(&full, 2, 1, &KakeyaWitness::new()).unwrap();
    assert_eq!(empty.rhs, 0);
    assert!(empty.pass());

    let c = construct_kakeya_pk(2, 1, 2).unwrap();
    let m = c.set.modulus();
    for ell in [3, 4] {
        let r = rich_line_rank_inequality(&c.set, m, ell, &c.witness).unwrap();
        assert!(r.rejected.is_empty());
        assert!(r.pass(), "{r:?}");
    }
    assert!(rich_line_rank_inequality(&c.set, m, 2, &c.witness).is_err());
}

#[test]
fn rich_line_rejects_poor_witnesses() {
    let set = PointSet::new(3, 2, vec![vec![0, 0], vec![1, 0], vec![2, 0]]).unwrap();
    let mut wit = KakeyaWitness::new();
    wit.insert(Line::new(vec![0, 0], dir(&[1, 0], 3)).unwrap());
    wit.insert(Line::new(vec![0, 0], dir(&[0, 1], 3)).unwrap());
    let r = rich_line_rank_inequality(&set, 3, 1, &wit).unwrap();
    assert_eq!(r.directions, 1);
    assert_eq!(r.rejected, vec![dir(&[0, 1], 3)]);
}
