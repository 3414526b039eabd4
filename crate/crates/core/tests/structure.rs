use fdec::complex::{incidence, Box3, Grid3};
use fdec::forms::Cochain;
use fdec::operators::{assemble_di, assemble_drld, OperatorSet};
use fdec::sparsekit::{from_triplet_csv, kron, lower_triangular_solve, matmul, to_triplet_csv, SparseMatrix, TripletBuilder};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = SparseMatrix> {
    proptest::collection::vec(prop_oneof![Just(0.0), -2.0..2.0f64], rows * cols).prop_map(move |v| {
        let mut b = TripletBuilder::new(rows, cols);
        for (k, x) in v.into_iter().enumerate() {
            if x != 0.0 {
                b.push(k / cols, k % cols, x);
            }
        }
        b.finalize()
    })
}

fn lower_triangular(n: usize) -> impl Strategy<Value = SparseMatrix> {
    (matrix(n, n), proptest::collection::vec(0.5..3.0f64, n)).prop_map(move |(m, diag)| {
        let mut b = TripletBuilder::new(n, n);
        for (i, j, v) in m.triplets().filter(|&(i, j, _)| j < i) {
            b.push(i, j, v);
        }
        for (i, d) in diag.into_iter().enumerate() {
            b.push(i, i, d);
        }
        b.finalize()
    })
}

fn axis(max_cells: usize) -> impl Strategy<Value = Vec<f64>> {
    (-1.0..1.0f64, proptest::collection::vec(0.05..1.0f64, 1..=max_cells)).prop_map(|(start, steps)| {
        let mut v = vec![start];
        for s in steps {
            v.push(v.last().unwrap() + s);
        }
        v
    })
}

fn grid(max_cells: usize) -> impl Strategy<Value = Grid3> {
    (axis(max_cells), axis(max_cells), axis(max_cells)).prop_map(|(x, y, z)| Grid3::from_axes(x, y, z).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn kron_mixed_product(a in matrix(2, 3), b in matrix(3, 2), c in matrix(3, 2), d in matrix(2, 3)) {
        let lhs = matmul(&kron(&a, &b).unwrap(), &kron(&c, &d).unwrap()).unwrap();
        let rhs = kron(&matmul(&a, &c).unwrap(), &matmul(&b, &d).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn triangular_solve_inverts(l in lower_triangular(7), x in proptest::collection::vec(-1.0..1.0f64, 7)) {
        let b = l.mul_vec(&x).unwrap();
        let y = lower_triangular_solve(&l, &b).unwrap();
        for (u, v) in x.iter().zip(&y) {
            prop_assert!((u - v).abs() <= 1e-9);
        }
    }

    #[test]
    fn triplet_csv_round_trip(m in matrix(4, 5)) {
        let back = from_triplet_csv(to_triplet_csv(&m).as_bytes(), 4, 5).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn incidence_squares_to_zero(g in grid(4)) {
        for p in 0..2 {
            let dd = matmul(&incidence(&g, p + 1).unwrap(), &incidence(&g, p).unwrap()).unwrap();
            prop_assert_eq!(dd.max_abs(), 0.0);
        }
    }

    #[test]
    fn fractional_integrals_are_lower_triangular(g in grid(3), beta in 0.0..1.0f64) {
        for p in 0..=3 {
            let di = assemble_di(&g, p, beta).unwrap();
            prop_assert!(di.check_lower_triangular_positive().is_ok(), "p={} beta={}", p, beta);
        }
    }

    #[test]
    fn fdec_sequence_is_exact(g in grid(3), alpha in 0.05..0.95f64, seed in 0u64..1000) {
        let ops = OperatorSet::for_alpha(g.clone(), alpha).unwrap();
        for p in 0..2 {
            let n = g.num_cells(p).unwrap();
            let c = Cochain::new(p, (0..n).map(|i| ((i as u64 * 7919 + seed) % 97) as f64 / 48.0 - 1.0).collect());
            let once = ops.apply_fdec(p, &c).unwrap();
            let twice = ops.apply_fdec(p + 1, &once).unwrap();
            let scale = once.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            let worst = twice.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(worst <= 1e-11 * scale, "p={} residual {}", p, worst);
        }
    }
}

#[test]
fn euler_characteristic_of_a_box() {
    let g = Grid3::uniform(&Box3::unit(), [3, 2, 4]).unwrap();
    let c = g.counts();
    let chi = c.total(0) as i64 - c.total(1) as i64 + c.total(2) as i64 - c.total(3) as i64;
    assert_eq!(chi, 1);
}

#[test]
fn incidence_rows_have_boundary_sizes() {
    let g = Grid3::uniform(&Box3::unit(), [2, 3, 2]).unwrap();
    for (p, k) in [(0, 2), (1, 4), (2, 6)] {
        let d = incidence(&g, p).unwrap();
        for i in 0..d.nrows() {
            let (cols, vals) = d.row(i);
            assert_eq!(cols.len(), k);
            assert!(vals.iter().all(|v| v.abs() == 1.0));
            assert_eq!(vals.iter().sum::<f64>(), 0.0);
        }
    }
}

#[test]
fn discrete_rl_derivative_is_lower_triangular() {
    let g = Grid3::uniform(&Box3::unit(), [2, 2, 2]).unwrap();
    for p in 0..=3 {
        let d = assemble_drld(&g, p, 0.5).unwrap();
        assert!(d.is_lower_triangular());
    }
    assert_eq!(assemble_drld(&g, 0, 0.5).unwrap(), SparseMatrix::identity(27));
}
