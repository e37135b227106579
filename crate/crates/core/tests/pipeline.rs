//! End-to-end properties of the approximation run against independent bounds.

use proptest::prelude::*;

use tspn_core::baselines::min_box_tour;
use tspn_core::geom::tour_feasible;
use tspn_core::harness::{emit_svg, run_ptas};
use tspn_core::instance::{parse_result, write_result, Instance, RunConfig};

fn quick(eps: f64, path: bool) -> RunConfig {
    RunConfig {
        epsilon: eps,
        path_mode: path,
        samples: 4,
        restarts: 3,
        order_cap: 3,
        config_cap: 4,
        guess_cap: 64,
        refine_rounds: 1,
        ..RunConfig::default()
    }
}

fn instance_2d() -> impl Strategy<Value = Instance> {
    prop::collection::vec((-4i64..=4, -4i64..=4, -8i64..=8), 1..7).prop_map(|rows| {
        let rows = rows
            .into_iter()
            .map(|(a, b, c)| if a == 0 && b == 0 { vec![1, 0, c] } else { vec![a, b, c] })
            .collect();
        Instance::new(2, rows).unwrap()
    })
}

/// Largest gap between two parallel input lines; any closed tour crosses it twice.
fn parallel_gap(inst: &Instance) -> f64 {
    let hs = inst.hyperplanes();
    let mut gap: f64 = 0.0;
    for a in &hs {
        for b in &hs {
            if (a.normal() - b.normal()).amax() < 1e-12 {
                gap = gap.max((a.offset() - b.offset()).abs());
            }
        }
    }
    gap
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ptas_is_feasible_and_bracketed(inst in instance_2d(), eps in prop::sample::select(vec![0.25, 0.5, 1.0])) {
        let hs = inst.hyperplanes();
        let rec = run_ptas(&inst, &quick(eps, false)).unwrap();
        prop_assert!(tour_feasible(&rec.tour(), &hs).is_feasible());
        let boxed = min_box_tour(&hs, true).unwrap().tour.length();
        prop_assert!(rec.length <= (1.0 + eps) * boxed + 1e-9);
        prop_assert!(rec.length >= 2.0 * parallel_gap(&inst) - 1e-9);
    }

    #[test]
    fn rectangle_lines_match_the_diagonal(a in 1i64..6, b in 1i64..6) {
        // A closed curve spanning widths a and b has length at least 2√(a² + b²),
        // which the back-and-forth diagonal attains.
        let inst = Instance::new(2, vec![vec![1, 0, 0], vec![1, 0, a], vec![0, 1, 0], vec![0, 1, b]]).unwrap();
        let opt = 2.0 * ((a * a + b * b) as f64).sqrt();
        let rec = run_ptas(&inst, &quick(0.25, false)).unwrap();
        prop_assert!(rec.length >= opt - 1e-7, "{} < {}", rec.length, opt);
        prop_assert!(rec.length <= 1.25 * opt + 1e-9);
    }

    #[test]
    fn records_round_trip(inst in instance_2d()) {
        let rec = run_ptas(&inst, &quick(0.5, true)).unwrap();
        let back = parse_result(&write_result(&rec)).unwrap();
        prop_assert_eq!(&back, &rec);
        prop_assert!(!back.closed);
        let svg = emit_svg(&inst.hyperplanes(), &[("ptas", &back.tour())]).unwrap();
        prop_assert_eq!(svg.matches("<circle").count(), back.waypoints.len());
    }
}

#[test]
fn three_dimensional_box_instance() {
    // Six axis planes bounding [0,1]×[0,2]×[0,3]; a closed tour must span each width twice.
    let rows = vec![
        vec![1, 0, 0, 0],
        vec![1, 0, 0, 1],
        vec![0, 1, 0, 0],
        vec![0, 1, 0, 2],
        vec![0, 0, 1, 0],
        vec![0, 0, 1, 3],
    ];
    let inst = Instance::new(3, rows).unwrap();
    let rec = run_ptas(&inst, &quick(0.5, false)).unwrap();
    let diag = 2.0 * 14f64.sqrt();
    assert!(rec.feasible);
    assert!(rec.length >= diag - 1e-7 && rec.length <= 1.5 * diag + 1e-9, "{}", rec.length);
}
