use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::cyclotomic::{CycloField, CycloPoly};
use crate::ring::rational;

fn rand_elem(ring: &FpQuot, rng: &mut ChaCha8Rng) -> Vec<u64> {
    (0..ring.degree()).map(|_| rng.gen_range(0..ring.p())).collect()
}

fn rand_matrix(ring: &FpQuot, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> RingMatrix<FpQuot> {
    RingMatrix::from_fn(ring.clone(), rows, cols, |_, _| rand_elem(ring, rng))
}

fn rand_fp(field: Fp, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> RingMatrix<Fp> {
    RingMatrix::from_fn(field, rows, cols, |_, _| rng.gen_range(0..field.p()))
}

/// Random matrix of rank at most `r`, as a product of `rows×r` and `r×cols`.
fn planted_fp(field: Fp, rows: usize, cols: usize, r: usize, rng: &mut ChaCha8Rng) -> RingMatrix<Fp> {
    let a = rand_fp(field, rows, r, rng);
    let b = rand_fp(field, r, cols, rng);
    a.mul(&b).unwrap()
}

fn rand_modulus(p: u64, d: usize, rng: &mut ChaCha8Rng) -> FpQuot {
    let mut m: Vec<u64> = (0..d).map(|_| rng.gen_range(0..p)).collect();
    m.push(1);
    FpQuot::new(p, m).unwrap()
}

/// A product of random elementary row operations and unit scalings.
fn rand_invertible(ring: &FpQuot, n: usize, rng: &mut ChaCha8Rng) -> RingMatrix<FpQuot> {
    let mut m = RingMatrix::identity(ring.clone(), n);
    for _ in 0..3 * n {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let mut e = RingMatrix::identity(ring.clone(), n);
        if i != j {
            e.entries[i * n + j] = rand_elem(ring, rng);
        } else {
            let unit = ring.monomial(rng.gen_range(0..ring.degree()));
            e.entries[i * n + i] = ring.mul(&unit, &ring.embed(&rng.gen_range(1..ring.p())));
        }
        m = e.mul(&m).unwrap();
    }
    m
}

/// Columns of `a` combined with scalar weights `c`.
fn combine(a: &RingMatrix<FpQuot>, c: &[u64]) -> Vec<Vec<u64>> {
    let ring = a.ring();
    (0..a.rows())
        .map(|r| {
            (0..a.cols()).fold(ring.zero(), |acc, j| {
                ring.add(&acc, &ring.mul(a.get(r, j), &ring.embed(&c[j])))
            })
        })
        .collect()
}

#[test]
fn coeff_matrix_examples() {
    let ring = FpQuot::cyclic(2, 2).unwrap();
    let a = RingMatrix::new(ring, 1, 1, vec![vec![1, 1]]).unwrap();
    let c = coeff_matrix(&a);
    assert_eq!((c.rows(), c.cols()), (2, 1));
    assert_eq!(c.entries(), &[1, 1]);

    let ring = FpQuot::cyclic(3, 2).unwrap();
    let id = RingMatrix::identity(ring, 3);
    let c = coeff_matrix(&id);
    assert_eq!(c.rows(), 6);
    for r in 0..6 {
        let expect: Vec<u64> = (0..3).map(|j| u64::from(r < 3 && r == j)).collect();
        assert_eq!(c.row(r), expect.as_slice());
    }
}

#[test]
fn field_rank_examples() {
    let f = Fp::new(5).unwrap();
    assert_eq!(rank(&RingMatrix::identity(f, 4)), 4);
    assert_eq!(rank(&RingMatrix::zeros(f, 3, 4)), 0);
    let q = CycloField::new(2, 1).unwrap();
    let m = RingMatrix::from_fn(q, 2, 2, |r, c| q.from_int([[1, 2], [2, 4]][r][c]));
    assert_eq!(rank(&m), 1);
    let k = CycloField::new(3, 1).unwrap();
    let m = RingMatrix::from_fn(k, 2, 2, |r, c| k.zeta_pow((r * c) as i64));
    assert_eq!(rank(&m), 2);
}

#[test]
fn quotient_rank_examples() {
    let ring = FpQuot::tbar(2, 2).unwrap();
    let one = RingMatrix::new(ring.clone(), 1, 1, vec![ring.one()]).unwrap();
    assert_eq!(rank_fp_quot(&one), 1);

    let z = ring.monomial(1);
    let z2 = ring.monomial(2);
    // second column is z times the first, which is not an F_2 multiple
    let a = RingMatrix::new(ring.clone(), 2, 2, vec![ring.one(), z.clone(), z.clone(), z2]).unwrap();
    assert_eq!(rank_fp_quot(&a), 2);
    let b = RingMatrix::new(ring.clone(), 2, 2, vec![ring.one(), ring.one(), z.clone(), z]).unwrap();
    assert_eq!(rank_fp_quot(&b), 1);

    let r1 = FpQuot::tbar(2, 1).unwrap();
    let m21 = RingMatrix::new(r1.clone(), 2, 2, vec![r1.one(), r1.one(), r1.one(), r1.monomial(1)])
        .unwrap();
    assert_eq!(coeff_matrix(&m21).rows(), 4);
    assert_eq!(rank_fp_quot(&m21), 2);
}

#[test]
fn construction_validates() {
    let ring = FpQuot::tbar(3, 1).unwrap();
    assert!(matches!(
        RingMatrix::new(ring.clone(), 2, 2, vec![ring.one()]),
        Err(Error::DimensionMismatch(_))
    ));
    assert!(matches!(
        RingMatrix::new(ring.clone(), 1, 1, vec![vec![5, 0, 0]]),
        Err(Error::RingMismatch(_))
    ));
    assert!(FpQuot::new(3, vec![1, 2]).is_err());
}

#[test]
fn rank_matches_kernel_count() {
    // |ker| = p^{cols - rank}; count kernel vectors by brute force
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ring = FpQuot::cyclic(3, 3).unwrap();
    for _ in 0..500 {
        let rows = rng.gen_range(1..=5);
        let cols = rng.gen_range(1..=5);
        let mut a = rand_matrix(&ring, rows, cols, &mut rng);
        if rng.gen_bool(0.5) && cols > 1 {
            // plant a dependency among the columns
            let w: Vec<u64> = (0..cols - 1).map(|_| rng.gen_range(0..3)).collect();
            for r in 0..rows {
                let mut acc = ring.zero();
                for (j, &wj) in w.iter().enumerate() {
                    acc = ring.add(&acc, &ring.mul(a.get(r, j), &ring.embed(&wj)));
                }
                a.entries[r * cols + cols - 1] = acc;
            }
        }
        let mut kernel = 0u32;
        for code in 0..3u64.pow(cols as u32) {
            let c = crate::ring::p_digits(code, 3, cols as u32).unwrap();
            if combine(&a, &c).iter().all(|e| ring.is_zero(e)) {
                kernel += 1;
            }
        }
        assert_eq!(3u32.pow((cols - a.rank()) as u32), kernel);
    }
}

#[test]
fn coeff_kernel_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for &(p, ell) in &[(2u64, 2u32), (3, 1), (2, 3), (5, 1)] {
        let ring = FpQuot::tbar(p, ell).unwrap();
        for _ in 0..200 {
            let rows = rng.gen_range(1..=4);
            let cols = rng.gen_range(1..=4);
            let a = rand_matrix(&ring, rows, cols, &mut rng);
            let c: Vec<u64> = (0..cols).map(|_| rng.gen_range(0..p)).collect();
            let over_ring = combine(&a, &c).iter().all(|e| ring.is_zero(e));
            let coeff = coeff_matrix(&a);
            let over_field = (0..coeff.rows()).all(|r| {
                coeff.row(r).iter().zip(&c).map(|(x, y)| x * y).sum::<u64>() % p == 0
            });
            assert_eq!(over_ring, over_field);
        }
    }
}

#[test]
fn crank_examples() {
    let f = Fp::new(2).unwrap();
    let e1 = RingMatrix::new(f, 1, 2, vec![1, 0]).unwrap();
    let e2 = RingMatrix::new(f, 1, 2, vec![0, 1]).unwrap();
    assert_eq!(crank(&MatrixFamily::new(vec![e1.clone(), e2]).unwrap()), 2);
    assert_eq!(crank(&MatrixFamily::new(vec![e1.clone()]).unwrap()), 1);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ring = FpQuot::tbar(3, 1).unwrap();
    let a = rand_matrix(&ring, 3, 3, &mut rng);
    assert_eq!(crank(&MatrixFamily::new(vec![a.clone(), a.clone()]).unwrap()), a.rank());

    let wide = RingMatrix::new(f, 1, 3, vec![1, 0, 0]).unwrap();
    assert!(matches!(
        MatrixFamily::new(vec![e1, wide]),
        Err(Error::DimensionMismatch(_))
    ));
    assert!(MatrixFamily::<Fp>::new(vec![]).is_err());
}

#[test]
fn crank_drops_under_multiplication() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let p = [2u64, 3, 5][rng.gen_range(0..3)];
        let ring = rand_modulus(p, rng.gen_range(1..=3), &mut rng);
        let cols = rng.gen_range(1..=4);
        let fam: Vec<_> = (0..rng.gen_range(1..=3))
            .map(|_| rand_matrix(&ring, rng.gen_range(1..=3), cols, &mut rng))
            .collect();
        let multiplied: Vec<_> = fam
            .iter()
            .map(|a| {
                let h = rand_matrix(&ring, rng.gen_range(1..=3), a.rows(), &mut rng);
                h.mul(a).unwrap()
            })
            .collect();
        let before = crank(&MatrixFamily::new(fam).unwrap());
        let after = crank(&MatrixFamily::new(multiplied).unwrap());
        assert!(before >= after);
    }
}

#[test]
fn crank_of_tensor_families() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let p = [2u64, 3][rng.gen_range(0..2)];
        let field = Fp::new(p).unwrap();
        let ring = rand_modulus(p, rng.gen_range(1..=2), &mut rng);
        let ca = rng.gen_range(1..=3);
        let cb = rng.gen_range(1..=3);
        let a_fam: Vec<_> = (0..rng.gen_range(1..=2))
            .map(|_| rand_matrix(&ring, rng.gen_range(1..=2), ca, &mut rng))
            .collect();
        let b_fams: Vec<Vec<_>> = a_fam
            .iter()
            .map(|_| {
                let r = rng.gen_range(0..=cb);
                (0..rng.gen_range(1..=3))
                    .map(|_| planted_fp(field, rng.gen_range(1..=3), cb, r, &mut rng))
                    .collect()
            })
            .collect();
        let r1 = crank(&MatrixFamily::new(a_fam.clone()).unwrap());
        let r2 = b_fams
            .iter()
            .map(|bs| crank(&MatrixFamily::new(bs.clone()).unwrap()))
            .min()
            .unwrap();
        let mut tensors = Vec::new();
        for (a, bs) in a_fam.iter().zip(&b_fams) {
            for b in bs {
                tensors.push(kronecker_with_scalar(a, b).unwrap());
            }
        }
        assert!(crank(&MatrixFamily::new(tensors).unwrap()) >= r1 * r2);
    }
}

#[test]
fn coeff_commutes_with_scalar_tensor() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        let ring = rand_modulus(3, rng.gen_range(1..=3), &mut rng);
        let a = rand_matrix(&ring, rng.gen_range(1..=3), rng.gen_range(1..=3), &mut rng);
        let b = rand_fp(*ring.base(), rng.gen_range(1..=3), rng.gen_range(1..=3), &mut rng);
        let lhs = coeff_matrix(&kronecker_with_scalar(&a, &b).unwrap());
        let rhs = kronecker(&coeff_matrix(&a), &b).unwrap();
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn kronecker_examples() {
    let f = Fp::new(7).unwrap();
    let b = RingMatrix::new(f, 2, 2, vec![1, 2, 3, 4]).unwrap();
    let k = kronecker(&RingMatrix::identity(f, 2), &b).unwrap();
    let expect = [
        [1, 2, 0, 0],
        [3, 4, 0, 0],
        [0, 0, 1, 2],
        [0, 0, 3, 4],
    ];
    for (r, row) in expect.iter().enumerate() {
        assert_eq!(k.row(r), row);
    }
    let s = RingMatrix::new(f, 1, 1, vec![3]).unwrap();
    let k = kronecker(&s, &b).unwrap();
    assert_eq!(k.entries(), &[3, 6, 2, 5]);

    let other = FpQuot::tbar(7, 1).unwrap();
    let a = RingMatrix::identity(FpQuot::cyclic(7, 2).unwrap(), 1);
    assert!(matches!(
        kronecker(&a, &RingMatrix::identity(other, 1)),
        Err(Error::RingMismatch(_))
    ));
}

#[test]
fn kronecker_mixed_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ring = FpQuot::tbar(2, 2).unwrap();
    for _ in 0..500 {
        let dims: Vec<usize> = (0..6).map(|_| rng.gen_range(1..=3)).collect();
        let a1 = rand_matrix(&ring, dims[0], dims[1], &mut rng);
        let b1 = rand_matrix(&ring, dims[1], dims[2], &mut rng);
        let a2 = rand_matrix(&ring, dims[3], dims[4], &mut rng);
        let b2 = rand_matrix(&ring, dims[4], dims[5], &mut rng);
        let lhs = kronecker(&a1, &a2).unwrap().mul(&kronecker(&b1, &b2).unwrap()).unwrap();
        let rhs = kronecker(&a1.mul(&b1).unwrap(), &a2.mul(&b2).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn rank_invariances() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..500 {
        let p = [2u64, 3][rng.gen_range(0..2)];
        let ring = FpQuot::tbar(p, rng.gen_range(1..=2)).unwrap();
        let rows = rng.gen_range(1..=4);
        let cols = rng.gen_range(1..=4);
        let a = rand_matrix(&ring, rows, cols, &mut rng);
        let r = a.rank();

        let mut rp: Vec<usize> = (0..rows).collect();
        let mut cp: Vec<usize> = (0..cols).collect();
        for i in (1..rows).rev() {
            rp.swap(i, rng.gen_range(0..=i));
        }
        for i in (1..cols).rev() {
            cp.swap(i, rng.gen_range(0..=i));
        }
        assert_eq!(a.permute_rows(&rp).permute_cols(&cp).rank(), r);

        let u = rand_invertible(&ring, rows, &mut rng);
        assert_eq!(u.mul(&a).unwrap().rank(), r);
        let v = rand_fp(*ring.base(), cols, cols, &mut rng);
        if v.rank() == cols {
            let v = v.map(ring.clone(), |x| ring.embed(x));
            assert_eq!(a.mul(&v).unwrap().rank(), r);
        }
    }
}

#[test]
fn quotient_rank_pair_examples() {
    let field = CycloField::new(2, 2).unwrap();
    let ring = CycloQuot::t_ring(field, 2).unwrap();
    let p = RingMatrix::new(ring.clone(), 1, 1, vec![ring.embed(&field.from_int(2))]).unwrap();
    assert_eq!(quotient_rank_pair(&p).unwrap(), (1, 0));
    let one = RingMatrix::identity(ring.clone(), 1);
    assert_eq!(quotient_rank_pair(&one).unwrap(), (1, 1));
    let half = RingMatrix::new(
        ring.clone(),
        1,
        1,
        vec![ring.embed(&field.from_rational(rational(1, 2)))],
    )
    .unwrap();
    assert!(matches!(
        quotient_rank_pair(&half),
        Err(Error::NotPIntegral { .. })
    ));
}

#[test]
fn quotient_rank_inequality_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let field = CycloField::new(2, 2).unwrap();
    let ring = CycloQuot::t_ring(field, 2).unwrap();
    for _ in 0..500 {
        let rows = rng.gen_range(1..=3);
        let cols = rng.gen_range(1..=3);
        let a = RingMatrix::from_fn(ring.clone(), rows, cols, |_, _| {
            let coeffs = (0..4)
                .map(|_| {
                    let c = field.from_int(rng.gen_range(-2..=2));
                    &c * &field.zeta_pow(rng.gen_range(0..4))
                })
                .collect();
            CycloPoly::new(field, coeffs)
        });
        let (q, f) = quotient_rank_pair(&a).unwrap();
        assert!(q >= f, "{a:?}");
    }
}
