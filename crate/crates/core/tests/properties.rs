use std::sync::OnceLock;

use proptest::prelude::*;
use wavegal::assembly::*;
use wavegal::basis2d::build_augmented_set;
use wavegal::geometry::{InterfaceCurve, Side};
use wavegal::harness::{compute_errors, order, registry_get};
use wavegal::solver::solve_direct;
use wavegal::sparse::CsrMatrix;

fn flower3_solution() -> &'static (ProblemSpec, Solution) {
    static CELL: OnceLock<(ProblemSpec, Solution)> = OnceLock::new();
    CELL.get_or_init(|| {
        let p = registry_get("flower3-unknown").unwrap();
        let set = build_augmented_set(3, 4, &p.curve).unwrap();
        let mut asm = assemble_full(&p, &set, &AssemblyOptions::default()).unwrap();
        asm.system.normalize(Normalization::Energy).unwrap();
        let s = solve_direct(&asm.system.matrix, &asm.system.rhs).unwrap();
        let c = asm.system.level_coefficients(&s.coeffs);
        let u = compose_solution(&c, &set, &asm.mesh, Some(&asm.lifting)).unwrap();
        (p, u)
    })
}

fn spd(entries: &[f64], n: usize) -> CsrMatrix {
    // MᵀM + I
    let mut t = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v: f64 = (0..n)
                .map(|k| entries[k * n + i] * entries[k * n + j])
                .sum();
            t.push((i, j, v + if i == j { 1.0 } else { 0.0 }));
        }
    }
    CsrMatrix::from_triplets(n, n, &t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn order_recovers_the_rate(e in 1e-6f64..1.0, n in 10usize..100_000, p in 0.0f64..3.0) {
        // four times the unknowns, error down by 2^p
        let got = order(e, e / 2f64.powf(p), n, 4 * n);
        prop_assert!((got - p).abs() < 1e-9);
    }

    #[test]
    fn relative_errors_of_a_scaled_field(s in -0.5f64..0.5) {
        let c = InterfaceCurve::circle(0.25).unwrap();
        let u = |_: Side, x: f64, y: f64| ((x * 3.0).sin() + y, [3.0 * (x * 3.0).cos(), 1.0]);
        let v = |side: Side, x: f64, y: f64| {
            let (a, g) = u(side, x, y);
            ((1.0 + s) * a, [(1.0 + s) * g[0], (1.0 + s) * g[1]])
        };
        let e = compute_errors(&c, 5, v, u);
        prop_assert!((e.rel_l2 - s.abs()).abs() < 1e-12);
        prop_assert!((e.rel_h1 - s.abs()).abs() < 1e-12);
    }

    #[test]
    fn energy_scaling_preserves_the_solution(
        entries in prop::collection::vec(-2.0f64..2.0, 36),
        rhs in prop::collection::vec(-1.0f64..1.0, 6),
        weights in prop::collection::vec(0.01f64..100.0, 6),
    ) {
        // a badly scaled SPD matrix D M D
        let base = spd(&entries, 6);
        let t: Vec<_> = (0..6)
            .flat_map(|i| (0..6).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, weights[i] * base.get(i, j) * weights[j]))
            .collect();
        let matrix = CsrMatrix::from_triplets(6, 6, &t);
        let plain = solve_direct(&matrix, &rhs).unwrap().coeffs;
        let mut sys = GalerkinSystem { matrix, rhs, scale: vec![1.0; 6] };
        sys.normalize(Normalization::Energy).unwrap();
        for d in sys.matrix.diagonal() {
            prop_assert!((d - 1.0).abs() < 1e-14);
        }
        let scaled = sys.level_coefficients(&solve_direct(&sys.matrix, &sys.rhs).unwrap().coeffs);
        let size = plain.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (a, b) in plain.iter().zip(&scaled) {
            prop_assert!((a - b).abs() <= 1e-9 * size);
        }
    }

    #[test]
    fn jump_condition_holds_anywhere_on_the_curve(t in 0.0f64..std::f64::consts::TAU) {
        let (p, u) = flower3_solution();
        let [x, y] = p.curve.point(t);
        let jump = u.eval_side(Side::Plus, x, y).0 - u.eval_side(Side::Minus, x, y).0;
        prop_assert!((jump - (p.jump)(t)).abs() < 1e-8);
    }
}
