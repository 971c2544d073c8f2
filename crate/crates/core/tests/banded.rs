use editdist::dp::diagonal_band;
use editdist::{edit_distance_banded, edit_distance_cost, edit_distance_full, Band, BitString, ChannelParams, ChannelSample};
use proptest::prelude::*;

fn bitvec(max: usize) -> impl Strategy<Value = Vec<u8>> {
    proptest::collection::vec(0u8..2, 0..=max)
}

/// Rows `[lo, hi]` clamped around a per-row centre; connected whenever the
/// centres move monotonically by at most `radius` per row.
fn band_around_path(centres: &[usize], n2: usize, radius: usize) -> Band {
    let rows = centres
        .iter()
        .map(|&c| (c.saturating_sub(radius), (c + radius).min(n2)))
        .collect();
    Band::new(centres.len() - 1, n2, rows).unwrap()
}

proptest! {
    #[test]
    fn banded_never_undercuts_full(a in bitvec(40), b in bitvec(40), radius in 0usize..12) {
        let full = edit_distance_cost(&a, &b);
        if let Ok(band) = diagonal_band(a.len(), b.len(), radius) {
            if let Ok(r) = edit_distance_banded(&a, &b, &band) {
                prop_assert!(r.cost >= full);
                prop_assert!(band.contains_path(&r.alignment));
                prop_assert_eq!(r.alignment.cost(&a, &b).unwrap(), r.cost);
                prop_assert!(r.cells <= band.area());
            }
        }
    }

    #[test]
    fn full_rectangle_band_is_full_dp(a in bitvec(60), b in bitvec(60)) {
        let band = Band::full(a.len(), b.len());
        let r = edit_distance_banded(&a, &b, &band).unwrap();
        let full = edit_distance_full(&a, &b);
        prop_assert_eq!(r.cost, full.cost);
        prop_assert_eq!(r.cells, (a.len() + 1) * (b.len() + 1));
        let wide = diagonal_band(a.len(), b.len(), a.len().max(b.len())).unwrap();
        prop_assert_eq!(&wide, &band);
    }
}

#[test]
fn band_around_optimal_path_recovers_optimum() {
    for seed in 0..20 {
        let a = BitString::random(256, 2 * seed).to_symbols();
        let b = BitString::random(256, 2 * seed + 1).to_symbols();
        let full = edit_distance_full(&a, &b);
        let f = full.alignment.alignment_function_table();
        let band = band_around_path(&f, b.len(), 32);
        assert!(band.contains_path(&full.alignment));
        let banded = edit_distance_banded(&a, &b, &band).unwrap();
        assert_eq!(banded.cost, full.cost, "seed {seed}");
    }
}

#[test]
fn substitution_band_on_channel_pairs() {
    let n = 2048;
    let params = ChannelParams::substitution_only(0.02).unwrap();
    let radius = (24.0 * (n as f64).ln()).ceil() as usize;
    let mut matches = 0;
    for seed in 0..200 {
        let s = ChannelSample::draw(n, &params, seed).unwrap();
        let (a, b) = (s.s1.to_symbols(), s.s2.to_symbols());
        let band = diagonal_band(n, n, radius).unwrap();
        let banded = edit_distance_banded(&a, &b, &band).unwrap();
        matches += usize::from(banded.cost == edit_distance_cost(&a, &b));
    }
    assert!(matches >= 198, "{matches}/200");
}
