use geoecon::heatmap::{heatmap_pixels, render_heatmap, BOUNDARY, CLEAR, MASKED, SHADED};
use geoecon::sustainability::{
    collapse_curve, sustainability_grid, unsustainability_at, GridSpec, DEFAULT_DELTAS, DEFAULT_THRESHOLD,
};
use geoecon::TrajectorySource;
use proptest::prelude::*;

fn coarse(delta: f64, fraction: f64, source: TrajectorySource) -> GridSpec {
    let mut spec = GridSpec::at_period_fraction(delta, fraction);
    spec.grid_step = 0.05;
    spec.source = source;
    spec
}

#[test]
fn worker_count_does_not_change_the_field() {
    let spec = coarse(0.3, 0.4, TrajectorySource::Paper);
    let one = sustainability_grid(&spec, 1).unwrap();
    let four = sustainability_grid(&spec, 4).unwrap();
    assert_eq!(one.to_csv(), four.to_csv());
}

#[test]
fn shaded_cells_lie_inside_the_disc() {
    for source in [TrajectorySource::Paper, TrajectorySource::Exact] {
        for fraction in [0.0, 0.2, 0.4, 0.6, 0.8] {
            let field = sustainability_grid(&coarse(0.1, fraction, source), 2).unwrap();
            for (r1, r2, a) in field.cells() {
                if a.is_some_and(|a| a < DEFAULT_THRESHOLD) {
                    assert!(r1 * r1 + r2 * r2 < 1.0);
                }
            }
        }
    }
}

#[test]
fn collapse_is_monotone_on_a_coarse_grid() {
    let mut template = GridSpec::new(0.1, 0.0);
    template.grid_step = 0.05;
    let curve = collapse_curve(&DEFAULT_DELTAS, DEFAULT_THRESHOLD, &template, 2).unwrap();
    for w in curve.windows(2) {
        assert!(w[1].1 <= w[0].1);
    }
    assert!(curve.last().unwrap().1 < curve[0].1);
}

#[test]
fn heatmap_dimensions_match_grid() {
    let field = sustainability_grid(&coarse(0.2, 0.2, TrajectorySource::Paper), 1).unwrap();
    let px = heatmap_pixels(&field, DEFAULT_THRESHOLD);
    assert_eq!(px.len(), field.side() * field.side());
    assert!(px.iter().all(|p| [MASKED, BOUNDARY, SHADED, CLEAR].contains(p)));
    let text = render_heatmap(&field, DEFAULT_THRESHOLD);
    assert!(text.starts_with(&format!("P2\n{0} {0}\n255\n", field.side())));
}

proptest! {
    #[test]
    fn unsustainability_is_non_negative(r1 in -0.7f64..0.7, r2 in -0.7f64..0.7, delta in 0.05f64..2.0, t in 0.0f64..10.0) {
        let spec = GridSpec::new(delta, t);
        if let Some(a) = unsustainability_at(&spec, r1, r2) {
            prop_assert!(a >= 0.0 && a.is_finite());
        }
    }

    #[test]
    fn origin_row_symmetry(r in 0.0f64..0.9, delta in 0.05f64..2.0, t in 0.0f64..10.0) {
        // The exact rotation is isotropic in the plane, so A depends on |r(0)| only.
        let mut spec = GridSpec::new(delta, t);
        spec.source = TrajectorySource::Exact;
        let a = unsustainability_at(&spec, r, 0.0);
        let b = unsustainability_at(&spec, 0.0, r);
        match (a, b) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-9 * a.max(1.0)),
            (None, None) => {}
            _ => prop_assert!(false),
        }
    }
}
