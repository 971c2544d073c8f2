use editdist::approx::approx_align;
use editdist::pipeline::{scaling_benchmark, BenchOptions};
use editdist::{edit_distance_cost, edit_distance_fast, BitString, ChannelParams, ChannelSample, ParamBounds, PipelineConfig};
use proptest::prelude::*;

fn widening() -> PipelineConfig {
    PipelineConfig {
        auto_widen: true,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fast_is_an_upper_bound(a in proptest::collection::vec(0u8..2, 0..300),
                              b in proptest::collection::vec(0u8..2, 0..300)) {
        let fast = edit_distance_fast(&a, &b, &widening()).unwrap();
        prop_assert!(fast.cost >= edit_distance_cost(&a, &b));
        prop_assert_eq!(fast.alignment.cost(&a, &b).unwrap(), fast.cost);
    }
}

#[test]
fn pipeline_is_deterministic() {
    let s = ChannelSample::draw(3000, &ParamBounds::default().extremal_params(), 77).unwrap();
    let (a, b) = (s.s1.to_symbols(), s.s2.to_symbols());
    let cfg = PipelineConfig::default();
    let x = edit_distance_fast(&a, &b, &cfg).unwrap();
    let y = edit_distance_fast(&a, &b, &cfg).unwrap();
    assert_eq!(x.cost, y.cost);
    assert_eq!(x.alignment, y.alignment);
    assert_eq!(x.report.band_cells, y.report.band_cells);
}

#[test]
fn unmutated_source_anchors_on_diagonal() {
    let s = BitString::random(4096, 3).to_symbols();
    let f = approx_align(&s, &s, &ParamBounds::default()).unwrap();
    assert!(f.samples.iter().all(|&(r, c)| r == c));
    assert!(f.len() > 1);
}

#[test]
fn single_sample_gives_diagonal_band() {
    let bounds = ParamBounds::default();
    let s = BitString::random(200, 4).to_symbols();
    let f = approx_align(&s, &s, &bounds).unwrap();
    assert_eq!(f.samples, vec![(1, 1)]);
}

#[test]
fn band_area_tracks_n_log_n() {
    let params = ParamBounds::default().extremal_params();
    let opts = BenchOptions {
        n_oracle_max: 0,
        parallel: true,
    };
    let rows = scaling_benchmark(&[2048, 4096, 8192, 16384], 2, &PipelineConfig::default(), &params, 5, &opts).unwrap();
    let per: Vec<f64> = rows
        .iter()
        .map(|r| r.mean_band_cells / (r.n as f64 * (r.n as f64).ln()))
        .collect();
    let (lo, hi) = per.iter().fold((f64::MAX, 0f64), |(l, h), &x| (l.min(x), h.max(x)));
    assert!(hi / lo < 2.0, "{per:?}");
}

#[test]
fn substitution_mode_matches_on_channel_pairs() {
    let params = ChannelParams::substitution_only(0.02).unwrap();
    let cfg = PipelineConfig::substitution_only(ParamBounds::default());
    for seed in 0..20 {
        let s = ChannelSample::draw(2000, &params, seed).unwrap();
        let (a, b) = (s.s1.to_symbols(), s.s2.to_symbols());
        assert_eq!(edit_distance_fast(&a, &b, &cfg).unwrap().cost, edit_distance_cost(&a, &b));
    }
}
