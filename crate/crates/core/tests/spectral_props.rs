use dampwave::spectral::{forward_transform, inverse_transform};
use dampwave::{Complex64, Grid, SpectralField};
use proptest::prelude::*;

fn field_strategy() -> impl Strategy<Value = SpectralField> {
    (1usize..=2, prop::sample::select(vec![8usize, 16, 32]), 1.0f64..20.0).prop_flat_map(|(dim, n, len)| {
        let count = n.pow(dim as u32);
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), count).prop_map(move |vals| {
            let grid = Grid::new(dim, n, len).unwrap();
            let v = vals.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
            SpectralField::from_values(&grid, v).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn round_trip(v in field_strategy()) {
        let back = inverse_transform(forward_transform(&v), v.grid()).unwrap();
        let scale = v.sup_norm().max(1e-300);
        prop_assert!(back.max_abs_diff(&v).unwrap() / scale < 1e-12);
    }

    #[test]
    fn parseval(v in field_strategy()) {
        // ‖v‖₂² = L⁻ⁿ Σ|v̂|² for the h-scaled transform
        let g = v.grid();
        let spec = forward_transform(&v);
        let energy: f64 = spec.iter().map(|z| z.norm_sqr()).sum::<f64>() / g.volume();
        let l2 = v.lp_norm(2.0).unwrap();
        prop_assert!((energy.sqrt() - l2).abs() <= 1e-12 * l2.max(1e-300));
    }

    #[test]
    fn lp_homogeneity(v in field_strategy(), c in 0.01f64..100.0, p in 1.0f64..8.0) {
        let a = v.scaled(Complex64::new(c, 0.0)).lp_norm(p).unwrap();
        let b = c * v.lp_norm(p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
    }

    #[test]
    fn lp_triangle(v in field_strategy(), p in 1.0f64..6.0) {
        let w = v.map(|z| z * z);
        let lhs = v.add(&w).unwrap().lp_norm(p).unwrap();
        let rhs = v.lp_norm(p).unwrap() + w.lp_norm(p).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn unit_multiplier_is_identity(v in field_strategy()) {
        let w = v.multiply_spectrum(|_, _| Complex64::new(1.0, 0.0));
        prop_assert!(w.max_abs_diff(&v).unwrap() <= 1e-12 * v.sup_norm().max(1e-300));
    }
}

#[test]
fn dilation_composes_for_band_limited_data() {
    let grid = Grid::new(2, 64, 24.0).unwrap();
    let v = SpectralField::from_real_fn(&grid, |x| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp());
    let twice = v.dilate(1.25).unwrap().dilate(1.6).unwrap();
    let once = v.dilate(2.0).unwrap();
    assert!(twice.max_abs_diff(&once).unwrap() < 1e-9);
}
