//! Property-based invariants of scores, partitions and the DM machinery.

use std::sync::Arc;

use proptest::prelude::*;

use ppscore::catalog::{intensity_forecast, product_density_forecast, ForecastSpec};
use ppscore::elementary::{BregmanGenerator, LogScore};
use ppscore::evaluation::{dm_test, preference_table_from_scores, DmSpec};
use ppscore::patterns::{count_in_cells, count_in_intervals, GridPartition, IntervalPartition, SpatialPattern, TemporalPattern, Window};
use ppscore::scores::{
    bin_reports_from_intensity, kappa_st, score_bin, score_intensity_combined, score_intensity_poisson,
    score_product_density,
};

fn points() -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec((0.0..1.0f64, 0.0..1.0f64).prop_map(|(x, y)| [x, y]), 0..25)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * 1f64.max(a.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scores_ignore_point_order(pts in points(), seed in any::<u64>()) {
        let w = Window::unit_square();
        let mut shuffled = pts.clone();
        // deterministic Fisher-Yates driven by the seed
        let mut s = seed | 1;
        for i in (1..shuffled.len()).rev() {
            s ^= s << 13; s ^= s >> 7; s ^= s << 17;
            shuffled.swap(i, (s % (i as u64 + 1)) as usize);
        }
        let a = SpatialPattern::from_points(&pts, w.clone()).unwrap();
        let b = SpatialPattern::from_points(&shuffled, w.clone()).unwrap();
        let f = intensity_forecast(&ForecastSpec::parse("f4").unwrap(), &w).unwrap();
        let rho = product_density_forecast(&ForecastSpec::parse("f2").unwrap(), &w).unwrap();
        let grid = GridPartition::uniform(w.clone(), 7).unwrap();
        let bins = bin_reports_from_intensity(&f, &grid).unwrap();
        let sq = BregmanGenerator::squared_error();
        prop_assert!(close(score_intensity_poisson(&f, &a).unwrap(), score_intensity_poisson(&f, &b).unwrap()));
        prop_assert!(close(
            score_intensity_combined(&f, &a, &LogScore, &sq, 0.1).unwrap(),
            score_intensity_combined(&f, &b, &LogScore, &sq, 0.1).unwrap()
        ));
        prop_assert!(close(score_product_density(&rho, &a, 1e-5).unwrap(), score_product_density(&rho, &b, 1e-5).unwrap()));
        prop_assert!(close(kappa_st(&a, 0.2).unwrap(), kappa_st(&b, 0.2).unwrap()));
        prop_assert!(close(score_bin(&bins, &a).unwrap(), score_bin(&bins, &b).unwrap()));
    }

    #[test]
    fn grid_cells_partition_the_pattern(pts in points(), nx in 1usize..12, ny in 1usize..12) {
        let w = Window::rectangle(0.0, 1.0, 0.0, 1.0).unwrap();
        let grid = GridPartition::new(w.clone(), vec![nx, ny]).unwrap();
        let p = SpatialPattern::from_points(&pts, w).unwrap();
        let counts = count_in_cells(&p, &grid).unwrap();
        prop_assert_eq!(counts.len(), nx * ny);
        prop_assert_eq!(counts.iter().sum::<usize>(), pts.len());
        for (i, q) in p.points().enumerate() {
            let cell = grid.cell(grid.cell_index_of(q));
            prop_assert!(cell.contains(q), "point {} not in its cell", i);
        }
        let volume: f64 = grid.cells().map(|c| c.volume()).sum();
        prop_assert!((volume - 1.0).abs() < 1e-12);
    }

    #[test]
    fn intervals_partition_the_events(mut times in prop::collection::vec(1e-9..10.0f64, 0..40), n in 1usize..60) {
        times.sort_by(f64::total_cmp);
        times.dedup();
        let p = TemporalPattern::new(times.clone(), 10.0).unwrap();
        let part = IntervalPartition::uniform(10.0, n).unwrap();
        let counts = count_in_intervals(&p, &part).unwrap();
        prop_assert_eq!(counts.iter().sum::<usize>(), times.len());
        for &t in &times {
            let i = part.interval_index_of(t).unwrap();
            let (a, b) = part.interval(i);
            prop_assert!(t > a && t <= b);
        }
    }

    #[test]
    fn dm_statistic_is_scale_equivariant(d in prop::collection::vec(-5.0..5.0f64, 3..60), scale in 0.01..100.0f64) {
        prop_assume!(d.iter().any(|&x| (x - d[0]).abs() > 1e-6));
        let scaled: Vec<f64> = d.iter().map(|x| x * scale).collect();
        let a = dm_test(&d, 0.05).unwrap();
        let b = dm_test(&scaled, 0.05).unwrap();
        prop_assert!((a.t - b.t).abs() <= 1e-9 * 1f64.max(a.t.abs()));
        prop_assert!((a.mean * scale - b.mean).abs() <= 1e-9 * 1f64.max(b.mean.abs()));
        prop_assert_eq!(a.decision, b.decision);
        let negated: Vec<f64> = d.iter().map(|x| -x).collect();
        prop_assert!((dm_test(&negated, 0.05).unwrap().t + a.t).abs() < 1e-9);
    }

    #[test]
    fn preference_fractions_are_complementary(raw in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 12), 1..6)) {
        // three forecasts: the second is the first plus noise, the third is shifted
        let reps: Vec<Vec<Vec<f64>>> = raw
            .iter()
            .map(|noise| {
                let a: Vec<f64> = (0..12).map(|i| i as f64).collect();
                let b: Vec<f64> = a.iter().zip(noise).map(|(x, e)| x + e - 0.5).collect();
                let c: Vec<f64> = a.iter().map(|x| x + 0.5).collect();
                vec![a, b, c]
            })
            .collect();
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let t = preference_table_from_scores(&labels, &reps, DmSpec::one_sided(0.05)).unwrap();
        for i in 0..3 {
            prop_assert!(t.fractions[i][i].is_nan());
            for j in 0..3 {
                if i != j {
                    let sum = t.fractions[i][j] + t.fractions[j][i];
                    prop_assert!((0.0..=1.0 + 1e-12).contains(&sum));
                }
            }
        }
        // a constant shift has zero variance: a degenerate test never decides
        prop_assert_eq!(t.fractions[0][2], 0.0);
    }
}

#[test]
fn intensity_score_is_reported_per_forecast_window() {
    let w = Window::unit_square();
    let other = Window::rectangle(0.0, 2.0, 0.0, 1.0).unwrap();
    let f = ppscore::scores::IntensityForecast::new("c", Arc::new(|_: &[f64]| 1.0), w).unwrap();
    let p = SpatialPattern::empty(other);
    assert!(score_intensity_poisson(&f, &p).is_err());
}
