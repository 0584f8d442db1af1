//! Parameter sweeps and the shipped experiments.
//!
//! Sweep cells run on a bounded rayon pool and are joined in axis order, so
//! the output table does not depend on the number of workers.

use serde::{Deserialize, Serialize};

use rayon::prelude::*;

use crate::analysis::{
    cut_distance, negativity_report, optimal_lambda, squeezing_report, LambdaRange,
    NegativityReport, SqueezingReport,
};
use crate::error::{Result, SimError};
use crate::grid::GridSpec;
use crate::protocol::{run_protocol, ProtocolConfig, PARAMETER_NAMES};
use crate::states::exact_nonlinear_gaussian;

pub const SWEEP_HEADER: &str = "# strobosim sweep v1";

/// Splits of 24 kicks shipped with the squeezing experiment.
pub const FIGURE2_SPLITS: [(usize, usize); 8] =
    [(1, 24), (2, 12), (3, 8), (4, 6), (6, 4), (8, 3), (12, 2), (24, 1)];

/// Squeezing and temperature axes of the shipped initial-state scan.
pub const FIGURE_S1_S: [f64; 5] = [1.0, 1.25, 1.5, 1.75, 2.0];
pub const FIGURE_S1_N0: [f64; 5] = [0.0, 0.05, 0.1, 0.2, 0.3];

/// Split used by the initial-state scan; the best split of the squeezing
/// experiment on the default grid.
pub const FIGURE_S1_SPLIT: (usize, usize) = (2, 12);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Sigma3Min,
    LambdaStar,
    MinWigner,
    NegativityVolume,
}

impl Observable {
    pub fn name(&self) -> &'static str {
        match self {
            Observable::Sigma3Min => "sigma3_min",
            Observable::LambdaStar => "lambda_star",
            Observable::MinWigner => "min_wigner",
            Observable::NegativityVolume => "negativity_volume",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: ProtocolConfig,
    pub axis1: SweepAxis,
    #[serde(default)]
    pub axis2: Option<SweepAxis>,
    pub observable: Observable,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        for axis in std::iter::once(&self.axis1).chain(self.axis2.as_ref()) {
            if !PARAMETER_NAMES.contains(&axis.name.as_str()) {
                return Err(SimError::UnknownParameter(axis.name.clone()));
            }
            if axis.values.is_empty() {
                return Err(SimError::InvalidParameter(format!("axis `{}` has no values", axis.name)));
            }
            if let Some(v) = axis.values.iter().find(|v| !v.is_finite()) {
                return Err(SimError::InvalidParameter(format!("axis `{}` has value {v}", axis.name)));
            }
        }
        if let Some(a2) = &self.axis2 {
            if a2.name == self.axis1.name {
                return Err(SimError::InvalidParameter(format!("axis `{}` is swept twice", a2.name)));
            }
        }
        Ok(())
    }

    fn cells(&self) -> Vec<(f64, Option<f64>)> {
        match &self.axis2 {
            None => self.axis1.values.iter().map(|&v| (v, None)).collect(),
            Some(a2) => self
                .axis1
                .values
                .iter()
                .flat_map(|&v1| a2.values.iter().map(move |&v2| (v1, Some(v2))))
                .collect(),
        }
    }

    fn config_for(&self, v1: f64, v2: Option<f64>) -> Result<ProtocolConfig> {
        let mut c = self.base.with_parameter(&self.axis1.name, v1)?;
        if let (Some(a2), Some(v2)) = (&self.axis2, v2) {
            c = c.with_parameter(&a2.name, v2)?;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub v1: f64,
    pub v2: Option<f64>,
    /// `None` when the cell failed; the reason is in `error`.
    pub value: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axis1: String,
    pub axis2: Option<String>,
    pub observable: Observable,
    pub cells: Vec<SweepCell>,
}

/// Runs the protocol for one config and extracts the observable.
pub fn evaluate(config: &ProtocolConfig, observable: Observable) -> Result<f64> {
    let w = run_protocol(config, false)?.final_state;
    Ok(match observable {
        Observable::Sigma3Min => optimal_lambda(&w)?.1,
        Observable::LambdaStar => optimal_lambda(&w)?.0,
        Observable::MinWigner => negativity_report(&w).min_value,
        Observable::NegativityVolume => negativity_report(&w).negativity_volume,
    })
}

/// Evaluates the observable on every cell using at most `parallelism`
/// workers. Failing cells are recorded and the sweep continues.
pub fn run_sweep(spec: &SweepSpec, parallelism: usize) -> Result<SweepTable> {
    spec.validate()?;
    if parallelism == 0 {
        return Err(SimError::InvalidParameter("parallelism must be >= 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| SimError::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    let cells = pool.install(|| {
        spec.cells()
            .into_par_iter()
            .map(|(v1, v2)| {
                let outcome = spec.config_for(v1, v2).and_then(|c| evaluate(&c, spec.observable));
                match outcome {
                    Ok(value) => SweepCell { v1, v2, value: Some(value), error: None },
                    Err(e) => {
                        log::warn!("sweep cell ({v1}, {v2:?}) failed: {e}");
                        SweepCell { v1, v2, value: None, error: Some(e.to_string()) }
                    }
                }
            })
            .collect()
    });
    Ok(SweepTable {
        axis1: spec.axis1.name.clone(),
        axis2: spec.axis2.as_ref().map(|a| a.name.clone()),
        observable: spec.observable,
        cells,
    })
}

impl SweepTable {
    /// CSV with shortest round-trip floats; failed cells leave the value
    /// empty and carry the reason in the `error` column.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{SWEEP_HEADER}\n{}", self.axis1);
        if let Some(a2) = &self.axis2 {
            out.push(',');
            out.push_str(a2);
        }
        out.push_str(&format!(",{},error\n", self.observable.name()));
        for c in &self.cells {
            out.push_str(&format!("{:?}", c.v1));
            if let Some(v2) = c.v2 {
                out.push_str(&format!(",{v2:?}"));
            }
            let value = c.value.map(|v| format!("{v:?}")).unwrap_or_default();
            let error = c.error.as_deref().map(crate::io::csv_field).unwrap_or_default();
            out.push_str(&format!(",{value},{error}\n"));
        }
        out
    }

    /// `(rows, cols, values)` with axis1 along rows; `None` for a 1-D sweep.
    pub fn as_matrix(&self) -> Option<(usize, usize, Vec<Option<f64>>)> {
        self.axis2.as_ref()?;
        let cols = self.cells.iter().take_while(|c| c.v1 == self.cells[0].v1).count();
        Some((self.cells.len() / cols, cols, self.cells.iter().map(|c| c.value).collect()))
    }
}

/// Settings shared by all splits of the squeezing experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure2Settings {
    /// Template; `periods` and `kicks_per_period` are replaced per split.
    pub base: ProtocolConfig,
    pub lambda_range: LambdaRange,
}

impl Default for Figure2Settings {
    fn default() -> Self {
        Figure2Settings {
            base: ProtocolConfig::figure2(1, 24),
            lambda_range: LambdaRange::default(),
        }
    }
}

impl Figure2Settings {
    pub fn on_grid(grid: GridSpec) -> Self {
        let mut s = Figure2Settings::default();
        s.base.grid = grid;
        s
    }
}

#[derive(Debug, Clone)]
pub struct SplitResult {
    pub periods: usize,
    pub kicks_per_period: usize,
    pub squeezing: SqueezingReport,
    pub negativity: NegativityReport,
    /// L2 distance of the `W(0, p)` cut to the reference cut.
    pub cut_distance: f64,
    pub norm: f64,
}

#[derive(Debug, Clone)]
pub struct Figure2Result {
    /// Single gate of the full gain on the initial state, with no rotation
    /// and no damping.
    pub reference_squeezing: SqueezingReport,
    pub reference_negativity: NegativityReport,
    pub splits: Vec<SplitResult>,
    /// Set when a split failed; `splits` then holds the completed prefix.
    pub aborted: Option<String>,
}

impl Figure2Result {
    /// Split with the smallest `sigma3_min`.
    pub fn best_split(&self) -> Option<&SplitResult> {
        self.splits
            .iter()
            .min_by(|a, b| a.squeezing.sigma3_min.total_cmp(&b.squeezing.sigma3_min))
    }

    /// Split whose cut is closest to the reference cut.
    pub fn closest_cut(&self) -> Option<&SplitResult> {
        self.splits.iter().min_by(|a, b| a.cut_distance.total_cmp(&b.cut_distance))
    }

    /// Summary table, 12 significant digits, golden-comparable.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "# strobosim fig2 v1\nperiods,kicks_per_period,lambda_star,sigma3_min,vacuum_threshold,beats_vacuum,beats_shot_noise,min_wigner,negativity_volume,cut_distance\n",
        );
        let mut row = |m: usize, n: usize, s: &SqueezingReport, neg: &NegativityReport, d: f64| {
            out.push_str(&format!(
                "{m},{n},{},{},{},{},{},{},{},{}\n",
                sig12(s.lambda_star),
                sig12(s.sigma3_min),
                sig12(s.vacuum_threshold_at_star),
                s.beats_vacuum,
                s.beats_shot_noise,
                sig12(neg.min_value),
                sig12(neg.negativity_volume),
                sig12(d)
            ));
        };
        row(0, 0, &self.reference_squeezing, &self.reference_negativity, 0.0);
        for s in &self.splits {
            row(s.periods, s.kicks_per_period, &s.squeezing, &s.negativity, s.cut_distance);
        }
        if let Some(msg) = &self.aborted {
            out.push_str(&format!("# aborted: {}\n", crate::io::csv_field(msg)));
        }
        out
    }

    /// `p` followed by the reference cut and one column per split.
    pub fn cuts_csv(&self) -> String {
        let mut out = String::from("# strobosim cuts v1\np,reference");
        for s in &self.splits {
            out.push_str(&format!(",M{}_N{}", s.periods, s.kicks_per_period));
        }
        out.push('\n');
        for (k, (p, w)) in self.reference_negativity.cut.iter().enumerate() {
            out.push_str(&format!("{p},{w}"));
            for s in &self.splits {
                out.push_str(&format!(",{}", s.negativity.cut[k].1));
            }
            out.push('\n');
        }
        out
    }

    /// sigma3 curves: reference first, then each split.
    pub fn curves_csv(&self) -> String {
        let mut labels = vec!["reference".to_string()];
        let mut reports = vec![&self.reference_squeezing];
        for s in &self.splits {
            labels.push(format!("M{}_N{}", s.periods, s.kicks_per_period));
            reports.push(&s.squeezing);
        }
        crate::io::curves_csv(&labels, &reports)
    }
}

/// Runs the protocol for every `(periods, kicks)` split and the exact
/// single-gate reference. A failing split stops the experiment; the
/// completed splits are kept and the failure is recorded in `aborted`.
pub fn figure2_experiment(splits: &[(usize, usize)], settings: &Figure2Settings) -> Result<Figure2Result> {
    if splits.is_empty() {
        return Err(SimError::InvalidParameter("no splits given".into()));
    }
    if let Some(bad) = splits.iter().find(|(m, n)| *m == 0 || *n == 0) {
        return Err(SimError::InvalidParameter(format!("split {bad:?} must be positive")));
    }
    let base = &settings.base;
    base.validate()?;
    let reference = exact_nonlinear_gaussian(&base.grid, base.initial, base.total_gain, base.order)?;
    let reference_squeezing = squeezing_report(&reference, settings.lambda_range)?;
    let reference_negativity = negativity_report(&reference);
    let mut result = Figure2Result {
        reference_squeezing,
        reference_negativity,
        splits: Vec::new(),
        aborted: None,
    };
    for &(periods, kicks) in splits {
        let mut config = base.clone();
        config.periods = periods;
        config.kicks_per_period = kicks;
        let outcome = run_protocol(&config, false).and_then(|trace| {
            let w = trace.final_state;
            let negativity = negativity_report(&w);
            Ok(SplitResult {
                periods,
                kicks_per_period: kicks,
                squeezing: squeezing_report(&w, settings.lambda_range)?,
                cut_distance: cut_distance(&negativity.cut, &result.reference_negativity.cut)?,
                negativity,
                norm: w.norm(),
            })
        });
        match outcome {
            Ok(r) => result.splits.push(r),
            Err(e) => {
                log::error!("split ({periods}, {kicks}) failed: {e}");
                result.aborted = Some(format!("split ({periods}, {kicks}): {e}"));
                break;
            }
        }
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureS1Result {
    pub s_values: Vec<f64>,
    pub n0_values: Vec<f64>,
    pub split: (usize, usize),
    /// `sigma3_min[i][j]` for `s_values[i]`, `n0_values[j]`.
    pub sigma3_min: Vec<Vec<Option<f64>>>,
    pub table: SweepTable,
}

impl FigureS1Result {
    /// 12-significant-digit table, golden-comparable; missing cells empty.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# strobosim figS1 v1 periods={} kicks_per_period={}\ns,n0,sigma3_min\n",
            self.split.0, self.split.1
        );
        for (i, s) in self.s_values.iter().enumerate() {
            for (j, n0) in self.n0_values.iter().enumerate() {
                let v = self.sigma3_min[i][j].map(sig12).unwrap_or_default();
                out.push_str(&format!("{},{},{}\n", sig12(*s), sig12(*n0), v));
            }
        }
        out
    }
}

/// `min_lambda sigma3` over an `(s, n0)` scan at the total gain of `base`,
/// using `split`. Cells that fail (e.g. states too wide for the grid) are
/// recorded as missing.
pub fn figure_s1_experiment(
    s_values: &[f64],
    n0_values: &[f64],
    split: (usize, usize),
    base: &ProtocolConfig,
    parallelism: usize,
) -> Result<FigureS1Result> {
    if let Some(s) = s_values.iter().find(|s| !(0.5..=3.0).contains(*s)) {
        return Err(SimError::InvalidParameter(format!("s = {s} outside [0.5, 3]")));
    }
    if let Some(n0) = n0_values.iter().find(|n| !(0.0..=1.0).contains(*n)) {
        return Err(SimError::InvalidParameter(format!("n0 = {n0} outside [0, 1]")));
    }
    let mut config = base.clone();
    config.periods = split.0;
    config.kicks_per_period = split.1;
    let spec = SweepSpec {
        base: config,
        axis1: SweepAxis { name: "s".into(), values: s_values.to_vec() },
        axis2: Some(SweepAxis { name: "n0".into(), values: n0_values.to_vec() }),
        observable: Observable::Sigma3Min,
    };
    let table = run_sweep(&spec, parallelism)?;
    let sigma3_min = table
        .cells
        .chunks(n0_values.len())
        .map(|row| row.iter().map(|c| c.value).collect())
        .collect();
    Ok(FigureS1Result {
        s_values: s_values.to_vec(),
        n0_values: n0_values.to_vec(),
        split,
        sigma3_min,
        table,
    })
}

/// 12 significant digits in scientific notation.
pub fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

/// Largest absolute difference between two golden-style CSVs. Comment lines
/// and the header must match exactly; booleans and integers must match;
/// float fields are compared numerically.
pub fn compare_golden(expected: &str, actual: &str) -> Result<f64> {
    let data = |s: &str| -> Vec<String> {
        s.lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with("# aborted"))
            .map(str::to_string)
            .collect()
    };
    let (e, a) = (data(expected), data(actual));
    if e.len() != a.len() {
        return Err(SimError::Csv(format!("expected {} lines, got {}", e.len(), a.len())));
    }
    let mut worst: f64 = 0.0;
    for (k, (le, la)) in e.iter().zip(&a).enumerate() {
        if le.starts_with('#') || k == 1 {
            if le != la {
                return Err(SimError::Csv(format!("line {}: `{la}` differs from `{le}`", k + 1)));
            }
            continue;
        }
        let (fe, fa): (Vec<&str>, Vec<&str>) = (le.split(',').collect(), la.split(',').collect());
        if fe.len() != fa.len() {
            return Err(SimError::Csv(format!("line {}: column count differs", k + 1)));
        }
        for (x, y) in fe.iter().zip(&fa) {
            match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(x), Ok(y)) => worst = worst.max((x - y).abs()),
                _ if x == y => {}
                _ => return Err(SimError::Csv(format!("line {}: `{y}` differs from `{x}`", k + 1))),
            }
        }
    }
    Ok(worst)
}
