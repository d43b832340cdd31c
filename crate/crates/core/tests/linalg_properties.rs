use fracnl::linalg::{linear_solver, linear_solvers, norm_inf, SparseMatrix};
use proptest::prelude::*;

fn dense_matvec(n: usize, a: &[f64], x: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum())
        .collect()
}

/// Gaussian elimination with partial pivoting, kept independent of the crate.
fn oracle_solve(n: usize, mut a: Vec<f64>, mut b: Vec<f64>) -> Vec<f64> {
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
            .unwrap();
        for j in 0..n {
            a.swap(k * n + j, p * n + j);
        }
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i * n + k] / a[k * n + k];
            for j in k..n {
                a[i * n + j] -= f * a[k * n + j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i * n + j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i * n + i];
    }
    x
}

fn triplets(n: usize) -> impl Strategy<Value = Vec<(usize, usize, f64)>> {
    prop::collection::vec((0..n, 0..n, -5.0..5.0f64), 0..60)
}

proptest! {
    #[test]
    fn spmv_matches_dense(t in triplets(9), x in prop::collection::vec(-3.0..3.0f64, 9)) {
        let a = SparseMatrix::from_triplets(9, 9, &t).unwrap();
        let y = a.spmv(&x).unwrap();
        let expect = dense_matvec(9, &a.to_dense(), &x);
        for (p, q) in y.iter().zip(&expect) {
            prop_assert!((p - q).abs() <= 1e-12 * (1.0 + q.abs()));
        }
    }

    #[test]
    fn triplet_order_is_irrelevant(t in triplets(7), seed in any::<u64>()) {
        let mut shuffled = t.clone();
        let mut s = seed;
        for i in (1..shuffled.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let a = SparseMatrix::from_triplets(7, 7, &t).unwrap();
        let b = SparseMatrix::from_triplets(7, 7, &shuffled).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn solvers_match_oracle_on_spd(
        entries in prop::collection::vec(-1.0..1.0f64, 400),
        rhs in prop::collection::vec(-1.0..1.0f64, 20),
    ) {
        let n = 20;
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                // B Bᵀ + n I
                dense[i * n + j] = (0..n).map(|k| entries[i * n + k] * entries[j * n + k]).sum::<f64>();
            }
            dense[i * n + i] += n as f64;
        }
        let a = SparseMatrix::from_dense(n, n, &dense).unwrap();
        let expect = oracle_solve(n, dense.clone(), rhs.clone());
        for name in linear_solvers().names() {
            let x = linear_solver(name).unwrap().solve(&a, &rhs).unwrap();
            let diff: Vec<f64> = x.iter().zip(&expect).map(|(p, q)| p - q).collect();
            prop_assert!(norm_inf(&diff) < 1e-9, "{} off by {}", name, norm_inf(&diff));
        }
    }
}

#[test]
fn bordered_sparse_system() {
    // tridiagonal block with one dense row and column, the shape Newton produces
    let n = 41;
    let mut t = Vec::new();
    for i in 0..n - 1 {
        t.push((i, i, 4.0));
        if i + 1 < n - 1 {
            t.push((i, i + 1, -1.0));
            t.push((i + 1, i, -1.0));
        }
        t.push((i, n - 1, 0.1));
        t.push((n - 1, i, 0.05));
    }
    t.push((n - 1, n - 1, 1.0));
    let a = SparseMatrix::from_triplets(n, n, &t).unwrap();
    let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
    let expect = oracle_solve(n, a.to_dense(), b.clone());
    for name in linear_solvers().names() {
        let x = linear_solver(name).unwrap().solve(&a, &b).unwrap();
        let diff: Vec<f64> = x.iter().zip(&expect).map(|(p, q)| p - q).collect();
        assert!(norm_inf(&diff) < 1e-10, "{name}");
    }
}
