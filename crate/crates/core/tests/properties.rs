//! Randomized invariants of the dispatch model, coupling, statistics and
//! sensor pipeline.

use chrono::{Duration, NaiveDate, NaiveDateTime};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wellgrid::coupling::{
    chi, circulation_modifier, cost_modifier, evaluate_psi, preset, renewable_modifier, select_optimal, Baseline, Kpis,
};
use wellgrid::fixtures::{calibrated_means, default_agent_config, reference_model, REFERENCE_BASELINE};
use wellgrid::mabs::{dispatch_hour, simulate_year, AgentConfig, HourlyState, PolicyIndices, PolicyParams, Profiles};
use wellgrid::sensor::{
    cleanse, gap_fill, CleanseRules, DemandProfile, GenerationProfile, ProfileUnit, Quality, Sample, SensorKind,
    SensorSeries, SimYear,
};
use wellgrid::stats::{correlation_p_value, pearson_r};
use wellgrid::survey::{fit_ols, predict, Classification, ItemDescriptor, SurveyMatrix};
use wellgrid::sweep::{ternary_coords, Candidate, CandidateSet};
use wellgrid::HOURS_PER_YEAR;

fn config_with_efficiency(eta: f64) -> AgentConfig {
    let mut c = default_agent_config();
    c.battery.efficiency = eta;
    c
}

/// Hourly per-unit PV, per-metre hydro and demand drawn from one seed.
fn random_profiles(seed: u64) -> Profiles {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pv = Vec::with_capacity(HOURS_PER_YEAR);
    let mut hydro = Vec::with_capacity(HOURS_PER_YEAR);
    let mut demand = Vec::with_capacity(HOURS_PER_YEAR);
    for h in 0..HOURS_PER_YEAR {
        let daylight = matches!(h % 24, 6..=18);
        pv.push(if daylight { rng.random_range(0.0..0.9) } else { 0.0 });
        hydro.push(rng.random_range(0.0..5.0));
        demand.push(rng.random_range(5.0..40.0));
    }
    Profiles {
        pv: GenerationProfile::from_hourly(ProfileUnit::PerKw, pv).unwrap(),
        hydro: GenerationProfile::from_hourly(ProfileUnit::PerMeterDrop, hydro).unwrap(),
        demand: DemandProfile::from_hourly(demand).unwrap(),
    }
}

fn template_indices() -> PolicyIndices {
    simulate_year(&PolicyParams::none(), &random_profiles(0), &default_agent_config()).unwrap()
}

fn candidate_set(kpis: &[(f64, f64, f64)]) -> CandidateSet {
    let template = template_indices();
    CandidateSet {
        candidates: kpis
            .iter()
            .enumerate()
            .map(|(i, &(p, u, d))| Candidate {
                params: PolicyParams::new(i + 1, 0.0, 0.0, 0.0),
                indices: PolicyIndices {
                    cost_p: p,
                    utilization_u: u,
                    circulation_d: d,
                    ..template
                },
            })
            .collect(),
    }
}

fn kpi_triple() -> impl Strategy<Value = (f64, f64, f64)> {
    (1.0e5..5.0e7f64, 0.0..=1.0f64, 0.0..=1.0f64)
}

fn hour(i: usize) -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2023, 1, 1)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap()
        + Duration::hours(i as i64)
}

/// A temperature series over a random subset of hours with random faults.
fn raw_series(seed: u64, coverage: f64) -> SensorSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::new();
    let mut value: f64 = 10.0;
    for i in 0..HOURS_PER_YEAR {
        if !rng.random_bool(coverage) {
            continue;
        }
        value += rng.random_range(-2.0..2.0);
        let roll: f64 = rng.random();
        let sample = if roll < 0.02 {
            Sample {
                ts: hour(i),
                value: f64::NAN,
                quality: Quality::Missing,
            }
        } else if roll < 0.04 {
            Sample::ok(hour(i), rng.random_range(60.0..200.0))
        } else if roll < 0.06 {
            Sample::ok(hour(i), rng.random_range(-200.0..-50.0))
        } else {
            Sample::ok(hour(i), value)
        };
        samples.push(sample);
    }
    SensorSeries::new(SensorKind::AirTemperature, "P1", samples).unwrap()
}

fn survey_matrix(rows: &[Vec<f64>]) -> SurveyMatrix {
    let mut items: Vec<ItemDescriptor> = (0..rows[0].len() - 1)
        .map(|j| ItemDescriptor::new(&format!("v{j}"), Classification::Other, "item"))
        .collect();
    items.push(ItemDescriptor::new("y", Classification::Response, "response"));
    SurveyMatrix {
        raw_max: vec![1.0; items.len()],
        items,
        rows: rows.to_vec(),
        dropped_rows: 0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dispatch_conserves_energy_and_respects_battery_bounds(
        capacity in 0.0..500.0f64,
        eta in 0.05..=1.0f64,
        steps in prop::collection::vec((0.0..300.0f64, 0.0..300.0f64), 1..200),
    ) {
        let config = config_with_efficiency(eta);
        let mut state = HourlyState::new(capacity);
        for (generation, demand) in steps {
            let before = state.charge;
            let f = dispatch_hour(&mut state, generation, demand, &config);
            prop_assert!(f.imbalance().abs() <= 1e-9);
            prop_assert!(state.charge >= 0.0 && state.charge <= capacity + 1e-12);
            prop_assert!((before + f.charged - f.drawn - state.charge).abs() <= 1e-9);
            prop_assert!(f.discharged <= f.drawn + 1e-12);
            prop_assert!(f.grid_import >= 0.0 && f.curtailed >= 0.0 && f.charged >= 0.0);
        }
    }

    #[test]
    fn utilization_is_monotone_in_capacity(
        seed in any::<u64>(),
        pv in 0.0..200.0f64,
        hydro in 0.0..10.0f64,
        battery in 0.0..300.0f64,
        extra in 0.0..200.0f64,
        which in 0..3u8,
    ) {
        let profiles = random_profiles(seed);
        let config = default_agent_config();
        let small = PolicyParams::new(1, pv, hydro, battery);
        let big = match which {
            0 => PolicyParams::new(2, pv + extra, hydro, battery),
            1 => PolicyParams::new(2, pv, hydro + extra / 20.0, battery),
            _ => PolicyParams::new(2, pv, hydro, battery + extra),
        };
        let a = simulate_year(&small, &profiles, &config).unwrap();
        let b = simulate_year(&big, &profiles, &config).unwrap();
        prop_assert!(b.utilization_u >= a.utilization_u - 1e-12);
    }

    #[test]
    fn annual_generation_is_linear_in_size(seed in any::<u64>(), pv in 0.0..1000.0f64, hydro in 0.0..100.0f64) {
        let profiles = random_profiles(seed);
        let r = simulate_year(&PolicyParams::new(1, pv, hydro, 0.0), &profiles, &default_agent_config()).unwrap();
        let close = |got: f64, want: f64| (got - want).abs() <= 1e-9 * want.abs().max(1.0);
        prop_assert!(close(r.annual_pv_kwh, pv * profiles.pv.annual_per_unit));
        prop_assert!(close(r.annual_hydro_kwh, hydro * profiles.hydro.annual_per_unit));
    }

    #[test]
    fn selection_equals_exhaustive_scan(
        kpis in prop::collection::vec(kpi_triple(), 1..60),
        dup in any::<prop::sample::Index>(),
        type_name in prop::sample::select(vec!["A", "B", "C"]),
    ) {
        let mut kpis = kpis;
        let copy = kpis[dup.index(kpis.len())];
        kpis.push(copy);
        let set = candidate_set(&kpis);
        let model = reference_model();
        let means = calibrated_means();
        let spec = preset(type_name).unwrap();
        let result = select_optimal(&set, &model, &means, &spec, &REFERENCE_BASELINE).unwrap();
        let mut best_k = 0;
        let mut best = f64::NEG_INFINITY;
        for c in &set.candidates {
            let psi = evaluate_psi(&model, &means, &spec, &Kpis::from(&c.indices), &REFERENCE_BASELINE).unwrap();
            if psi > best {
                best = psi;
                best_k = c.params.k;
            }
        }
        prop_assert_eq!(result.k_opt, best_k);
        prop_assert_eq!(result.psi_opt, best);
    }

    #[test]
    fn modifiers_are_one_at_baseline(p0 in 1.0..1.0e8f64, s in 0.001..0.999f64, u0 in 0.0..=1.0f64, d0 in 0.0..=1.0f64) {
        prop_assert_eq!(cost_modifier(p0, p0, s).unwrap(), 1.0);
        prop_assert_eq!(renewable_modifier(u0, u0).unwrap(), 1.0);
        prop_assert_eq!(circulation_modifier(d0, d0).unwrap(), 1.0);
    }

    #[test]
    fn chi_at_baseline_is_the_plain_term(
        x in 0.0..=1.0f64,
        p0 in 1.0e5..1.0e7f64,
        u0 in 0.0..=1.0f64,
        d0 in 0.0..=1.0f64,
        type_name in prop::sample::select(vec!["A", "B", "C"]),
        var in prop::sample::select(vec!["x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8"]),
    ) {
        let baseline = Baseline { p0, u0, d0 };
        let spec = preset(type_name).unwrap();
        prop_assert_eq!(chi(x, &spec, &baseline.as_kpis(), &baseline, var).unwrap(), x);
    }

    #[test]
    fn ternary_shares_sum_to_one(kpis in prop::collection::vec(kpi_triple(), 1..100)) {
        let set = candidate_set(&kpis);
        for t in ternary_coords(&set).unwrap() {
            prop_assert!((t.social + t.ecological + t.economic - 1.0).abs() <= 1e-9);
            for share in [t.social, t.ecological, t.economic] {
                prop_assert!((0.0..=1.0).contains(&share));
            }
        }
    }

    #[test]
    fn pearson_is_symmetric_and_affine_invariant(
        pairs in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 5..80),
        scale in prop_oneof![-50.0..-0.1f64, 0.1..50.0f64],
        shift in -100.0..100.0f64,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let r = match pearson_r(&x, &y) {
            Ok(r) => r,
            Err(_) => return Ok(()),
        };
        prop_assert!((pearson_r(&y, &x).unwrap() - r).abs() <= 1e-12);
        let moved: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
        prop_assert!((pearson_r(&moved, &y).unwrap() - scale.signum() * r).abs() <= 1e-9);
    }

    #[test]
    fn p_value_is_a_probability_decreasing_in_strength(r1 in 0.0..0.99f64, r2 in 0.0..0.99f64, n in 3usize..2000) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let p_lo = correlation_p_value(lo, n).unwrap().p_value;
        let p_hi = correlation_p_value(hi, n).unwrap().p_value;
        prop_assert!((0.0..=1.0).contains(&p_lo) && (0.0..=1.0).contains(&p_hi));
        prop_assert!(p_hi <= p_lo + 1e-15);
        prop_assert!((correlation_p_value(-lo, n).unwrap().p_value - p_lo).abs() <= 1e-15);
    }

    #[test]
    fn prediction_is_affine(x in prop::collection::vec(0.0..=1.0f64, 8), y in prop::collection::vec(0.0..=1.0f64, 8)) {
        let m = reference_model();
        let b0 = m.intercept.beta;
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let lhs = predict(&m, &sum).unwrap() - b0;
        let rhs = (predict(&m, &x).unwrap() - b0) + (predict(&m, &y).unwrap() - b0);
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn ols_residuals_are_orthogonal_and_r_squared_consistent(
        rows in prop::collection::vec(prop::collection::vec(0.0..=1.0f64, 4), 20..120),
    ) {
        let matrix = survey_matrix(&rows);
        let ids: Vec<String> = (0..3).map(|j| format!("v{j}")).collect();
        let model = match fit_ols(&matrix, "y", &ids) {
            Ok(m) => m,
            Err(_) => return Ok(()),
        };
        let res = &model.residuals;
        prop_assert_eq!(res.len(), rows.len());
        prop_assert!(res.iter().sum::<f64>().abs() <= 1e-9);
        for j in 0..3 {
            let dot: f64 = rows.iter().zip(res).map(|(r, e)| r[j] * e).sum();
            prop_assert!(dot.abs() <= 1e-9);
        }
        let y: Vec<f64> = rows.iter().map(|r| r[3]).collect();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
        let ssr: f64 = res.iter().map(|e| e * e).sum();
        prop_assert!((model.r_squared - (1.0 - ssr / sst)).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cleansing_is_idempotent(seed in any::<u64>(), coverage in 0.3..1.0f64) {
        let rules = CleanseRules::for_kind(SensorKind::AirTemperature);
        let (once, _) = cleanse(&raw_series(seed, coverage), &rules);
        let (twice, report) = cleanse(&once, &rules);
        prop_assert_eq!(once.to_csv(), twice.to_csv());
        prop_assert_eq!(report.dropped, 0);
    }

    #[test]
    fn gap_fill_keeps_existing_samples(seed in any::<u64>(), coverage in 0.2..1.0f64) {
        let rules = CleanseRules::for_kind(SensorKind::AirTemperature);
        let (series, _) = cleanse(&raw_series(seed, coverage), &rules);
        let donor = SensorSeries::new(
            SensorKind::AirTemperature,
            "D1",
            (0..HOURS_PER_YEAR).map(|i| Sample::ok(hour(i), 15.0)).collect(),
        )
        .unwrap();
        let (filled, n) = gap_fill(&series, &donor, SimYear::new(2023)).unwrap();
        prop_assert_eq!(filled.len(), series.len() + n);
        let kept: Vec<&Sample> = filled.samples.iter().filter(|s| s.quality != Quality::Filled).collect();
        prop_assert_eq!(kept.len(), series.len());
        for (a, b) in kept.iter().zip(&series.samples) {
            prop_assert_eq!(a.ts, b.ts);
            prop_assert!(a.value == b.value || (a.value.is_nan() && b.value.is_nan()));
            prop_assert_eq!(a.quality, b.quality);
        }
    }
}
