//! Regression against the committed golden CSVs. Regenerate them with
//! `strobosim fig2 --out crates/core/golden/fig2.csv` and
//! `strobosim figS1 --out crates/core/golden/figS1.csv`.

use strobosim::experiments::{
    compare_golden, figure2_experiment, figure_s1_experiment, Figure2Settings, FIGURE2_SPLITS,
    FIGURE_S1_N0, FIGURE_S1_S, FIGURE_S1_SPLIT,
};
use strobosim::ProtocolConfig;

const TOLERANCE: f64 = 1e-9;

fn golden(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("golden").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn fig2_matches_golden_and_picks_scan_split() {
    let result = figure2_experiment(&FIGURE2_SPLITS, &Figure2Settings::default()).unwrap();
    assert!(result.aborted.is_none());
    let worst = compare_golden(&golden("fig2.csv"), &result.to_csv()).unwrap();
    assert!(worst <= TOLERANCE, "deviation {worst:e}");
    let best = result.best_split().unwrap();
    assert_eq!((best.periods, best.kicks_per_period), FIGURE_S1_SPLIT);
}

#[test]
fn fig_s1_matches_golden() {
    let base = ProtocolConfig::figure2(FIGURE_S1_SPLIT.0, FIGURE_S1_SPLIT.1);
    let result = figure_s1_experiment(&FIGURE_S1_S, &FIGURE_S1_N0, FIGURE_S1_SPLIT, &base, 4).unwrap();
    let worst = compare_golden(&golden("figS1.csv"), &result.to_csv()).unwrap();
    assert!(worst <= TOLERANCE, "deviation {worst:e}");
}
