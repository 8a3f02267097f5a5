use std::sync::Arc;

use interpband::bands::{build_bands, covers, rejects_zero};
use interpband::mc::{simulate_sample, McDesign};
use interpband::seed::stream_rng;
use interpband::{BootstrapConfig, GridField, TargetKind, TensorGrid};
use proptest::prelude::*;

fn grid_strategy() -> impl Strategy<Value = TensorGrid> {
    (1usize..=3, 2usize..=6)
        .prop_flat_map(|(d, l)| {
            (
                prop::collection::vec((-5.0f64..5.0, 0.1f64..4.0), d),
                Just(l),
            )
        })
        .prop_map(|(axes, l)| {
            let lo: Vec<f64> = axes.iter().map(|a| a.0).collect();
            let hi: Vec<f64> = axes.iter().map(|a| a.0 + a.1).collect();
            TensorGrid::new(lo, hi, l).unwrap()
        })
}

fn field_and_point() -> impl Strategy<Value = (GridField, Vec<f64>)> {
    grid_strategy().prop_flat_map(|g| {
        let g = Arc::new(g);
        let n = g.len();
        let d = g.dim();
        (
            prop::collection::vec(-10.0f64..10.0, n),
            prop::collection::vec(0.0f64..=1.0, d),
        )
            .prop_map(move |(values, u)| {
                let x: Vec<f64> = (0..d).map(|k| g.lo()[k] + u[k] * (g.hi()[k] - g.lo()[k])).collect();
                (GridField::new(g.clone(), values).unwrap(), x.iter().enumerate().map(|(k, v)| v.clamp(g.lo()[k], g.hi()[k])).collect())
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn vertices_are_reproduced_bitwise((field, _) in field_and_point(), pick in any::<prop::sample::Index>()) {
        let g = field.grid();
        let i = pick.index(g.len());
        prop_assert_eq!(field.eval(&g.node_at(i)).unwrap().to_bits(), field.values()[i].to_bits());
    }

    #[test]
    fn interpolant_stays_within_cell_extrema((field, x) in field_and_point()) {
        let cell = field.grid().locate(&x).unwrap();
        let (lo, hi) = field.cell_vertex_range(&cell);
        let v = field.eval(&x).unwrap();
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
    }

    #[test]
    fn multilinear_functions_are_exact(g in grid_strategy(), coef in prop::collection::vec(-3.0f64..3.0, 8), u in prop::collection::vec(0.0f64..=1.0, 3)) {
        let d = g.dim();
        let f = |x: &[f64]| -> f64 {
            (0..1usize << d)
                .map(|s| coef[s] * (0..d).filter(|k| s >> k & 1 == 1).map(|k| x[k]).product::<f64>())
                .sum()
        };
        let x: Vec<f64> = (0..d).map(|k| g.lo()[k] + u[k] * (g.hi()[k] - g.lo()[k])).collect();
        let field = GridField::from_fn(Arc::new(g), f).unwrap();
        let exact = f(&x);
        prop_assert!((field.eval(&x).unwrap() - exact).abs() <= 1e-10 * exact.abs().max(1.0));
    }

    #[test]
    fn convex_functions_are_overestimated(g in grid_strategy(), u in prop::collection::vec(0.0f64..=1.0, 3)) {
        let d = g.dim();
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>() + (x[0] - x[d - 1]).abs();
        let x: Vec<f64> = (0..d).map(|k| g.lo()[k] + u[k] * (g.hi()[k] - g.lo()[k])).collect();
        let field = GridField::from_fn(Arc::new(g), f).unwrap();
        prop_assert!(field.eval(&x).unwrap() >= f(&x) - 1e-10);
    }
}

#[test]
fn band_structure_on_random_designs() {
    let alphas = [0.10, 0.05, 0.01];
    for seed in 0..30u64 {
        let mut design = McDesign::new(1 + (seed % 2) as usize, 200, 1.0, 0.3);
        design.dgp.delta = [0.0, 0.3, 0.8][(seed % 3) as usize];
        let sample = simulate_sample(&design, &mut stream_rng(seed, 0)).unwrap();
        let d = design.dim;
        let grid = Arc::new(TensorGrid::new(vec![-1.2; d], vec![1.5; d], 6 + seed as usize % 5).unwrap());
        let config = BootstrapConfig::multinomial(99, seed);
        let bands = build_bands(&sample, TargetKind::Dtt, &grid, &config, &alphas, None).unwrap();
        let probe = grid.probe(3).unwrap();
        for band in &bands {
            assert_eq!(rejects_zero(band), !covers(band, |_| 0.0, &probe).unwrap());
        }
        for x in probe.points() {
            let p: Vec<_> = bands.iter().map(|b| b.at(&x).unwrap()).collect();
            for w in p.windows(2) {
                assert!(w[1].lower <= w[0].lower + 1e-12 && w[1].upper >= w[0].upper - 1e-12);
            }
            for (b, pt) in bands.iter().zip(&p) {
                let width = pt.upper - pt.lower;
                let expected = 2.0 * b.scale_half_width(&x).unwrap();
                assert!((width - expected).abs() <= 1e-12 * expected.max(1.0));
                assert!(pt.lower <= pt.center && pt.center <= pt.upper);
            }
        }
    }
}
