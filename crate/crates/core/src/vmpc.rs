//! Multi-view prompt compliance scoring and the agreement statistics used
//! to check graders against each other.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One grader's verdict on one view. Every field is 0 or 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewCriteria {
    /// View present.
    pub v: u8,
    /// Mark correct.
    pub m: u8,
    /// Encoding correct.
    pub e: u8,
    /// No hallucinated data.
    pub h: u8,
    /// Requested linking works.
    pub l: u8,
}

impl ViewCriteria {
    pub const ALL_MET: ViewCriteria = ViewCriteria {
        v: 1,
        m: 1,
        e: 1,
        h: 1,
        l: 1,
    };

    pub fn new(v: u8, m: u8, e: u8, h: u8, l: u8) -> Self {
        ViewCriteria { v, m, e, h, l }
    }

    pub fn values(&self) -> [u8; 5] {
        [self.v, self.m, self.e, self.h, self.l]
    }

    pub fn sum(&self) -> u32 {
        self.values().iter().map(|&c| u32::from(c)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraderRecord {
    /// Execution gate: did anything render.
    pub x: u8,
    pub views: Vec<ViewCriteria>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    /// Information visualization.
    I,
    /// Scientific visualization.
    S,
    /// Both.
    C,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptResult {
    pub prompt: String,
    pub n_views: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<Category>,
    /// Which system produced the graded output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    /// When false, every view's `l` counts as 1 whatever was recorded.
    #[serde(default = "yes")]
    pub linking_requested: bool,
    pub graders: Vec<GraderRecord>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScoreError {
    #[error("a record needs at least one view")]
    NoViews,
    #[error("a prompt result needs at least one grader")]
    NoGraders,
    #[error("{field} must be 0 or 1, found {value}")]
    NotBinary { field: &'static str, value: u8 },
    #[error("view {view}: {rule}")]
    Inconsistent { view: usize, rule: &'static str },
    #[error("grader {grader} scored {found} views; the prompt has {expected}")]
    ViewCount {
        grader: usize,
        expected: usize,
        found: usize,
    },
}

fn binary(field: &'static str, value: u8) -> Result<(), ScoreError> {
    if value > 1 {
        return Err(ScoreError::NotBinary { field, value });
    }
    Ok(())
}

impl GraderRecord {
    /// Binary fields and the per-view consistency rules: an absent view has
    /// no mark and no encoding, and a present view with no mark cannot
    /// hallucinate. Views are not checked when nothing executed.
    pub fn validate(&self) -> Result<(), ScoreError> {
        binary("x", self.x)?;
        if self.views.is_empty() {
            return Err(ScoreError::NoViews);
        }
        if self.x == 0 {
            return Ok(());
        }
        for (i, view) in self.views.iter().enumerate() {
            for (field, value) in ["v", "m", "e", "h", "l"].into_iter().zip(view.values()) {
                binary(field, value)?;
            }
            if view.v == 0 && (view.m == 1 || view.e == 1) {
                return Err(ScoreError::Inconsistent {
                    view: i,
                    rule: "an absent view cannot have a correct mark or encoding",
                });
            }
            if view.v == 1 && view.m == 0 && view.h == 0 {
                return Err(ScoreError::Inconsistent {
                    view: i,
                    rule: "a view with no mark shows no data to hallucinate",
                });
            }
        }
        Ok(())
    }
}

/// `X / (5N)` times the sum of all criteria over the `N` views.
pub fn vmpc(record: &GraderRecord) -> Result<f64, ScoreError> {
    record.validate()?;
    if record.x == 0 {
        return Ok(0.0);
    }
    let total: u32 = record.views.iter().map(ViewCriteria::sum).sum();
    Ok(total as f64 / (5 * record.views.len()) as f64)
}

/// Per-criterion means across graders for one view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriteriaMeans {
    pub v: f64,
    pub m: f64,
    pub e: f64,
    pub h: f64,
    pub l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub x: f64,
    pub views: Vec<CriteriaMeans>,
    /// Mean of the graders' individual scores.
    pub vmpc: f64,
    /// The formula applied to the mean criteria instead; equal to `vmpc`
    /// whenever graders agree on `x`.
    pub vmpc_of_means: f64,
}

impl PromptResult {
    /// Grader records with the no-linking rule applied.
    pub fn effective_graders(&self) -> Vec<GraderRecord> {
        self.graders
            .iter()
            .map(|g| {
                let mut g = g.clone();
                if !self.linking_requested {
                    for v in &mut g.views {
                        v.l = 1;
                    }
                }
                g
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), ScoreError> {
        if self.n_views == 0 {
            return Err(ScoreError::NoViews);
        }
        if self.graders.is_empty() {
            return Err(ScoreError::NoGraders);
        }
        for (i, g) in self.effective_graders().iter().enumerate() {
            if g.views.len() != self.n_views {
                return Err(ScoreError::ViewCount {
                    grader: i,
                    expected: self.n_views,
                    found: g.views.len(),
                });
            }
            g.validate()?;
        }
        Ok(())
    }
}

pub fn aggregate(result: &PromptResult) -> Result<Aggregate, ScoreError> {
    result.validate()?;
    let graders = result.effective_graders();
    let k = graders.len() as f64;
    let x = graders.iter().map(|g| f64::from(g.x)).sum::<f64>() / k;
    let views: Vec<CriteriaMeans> = (0..result.n_views)
        .map(|i| {
            let mean = |f: fn(&ViewCriteria) -> u8| {
                graders
                    .iter()
                    .map(|g| f64::from(f(&g.views[i])))
                    .sum::<f64>()
                    / k
            };
            CriteriaMeans {
                v: mean(|c| c.v),
                m: mean(|c| c.m),
                e: mean(|c| c.e),
                h: mean(|c| c.h),
                l: mean(|c| c.l),
            }
        })
        .collect();
    let mut scores = Vec::with_capacity(graders.len());
    for g in &graders {
        scores.push(vmpc(g)?);
    }
    let vmpc_mean = scores.iter().sum::<f64>() / k;
    let criteria_sum: f64 = views.iter().map(|c| c.v + c.m + c.e + c.h + c.l).sum();
    Ok(Aggregate {
        x,
        views,
        vmpc: vmpc_mean,
        vmpc_of_means: x * criteria_sum / (5 * result.n_views) as f64,
    })
}

/// Mean aggregated score per system and category, plus an overall row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryTable {
    pub systems: Vec<String>,
    /// Row label (`I`, `S`, `C` or `all`) to one mean per system; `None`
    /// where a system has no prompt in that row.
    pub rows: Vec<(String, Vec<Option<f64>>)>,
}

pub fn summarize(results: &[PromptResult]) -> Result<SummaryTable, ScoreError> {
    let mut cells: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    let mut systems: Vec<String> = Vec::new();
    for r in results {
        let score = aggregate(r)?.vmpc;
        let system = r.system.clone().unwrap_or_else(|| "system".into());
        if !systems.contains(&system) {
            systems.push(system.clone());
        }
        if let Some(c) = r.category {
            cells
                .entry((format!("{c:?}"), system.clone()))
                .or_default()
                .push(score);
        }
        cells.entry(("all".into(), system)).or_default().push(score);
    }
    let rows = ["I", "S", "C", "all"]
        .iter()
        .filter(|row| {
            systems
                .iter()
                .any(|s| cells.contains_key(&(row.to_string(), s.clone())))
        })
        .map(|row| {
            let means = systems
                .iter()
                .map(|s| {
                    cells
                        .get(&(row.to_string(), s.clone()))
                        .map(|v| v.iter().sum::<f64>() / v.len() as f64)
                })
                .collect();
            (row.to_string(), means)
        })
        .collect();
    Ok(SummaryTable { systems, rows })
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("need at least {0}")]
    TooFew(&'static str),
    #[error("series have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("a series has zero variance")]
    ZeroVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alpha {
    pub alpha: f64,
    /// Set when every pairable rating is identical, so expected
    /// disagreement is zero and alpha is 1 by convention.
    pub degenerate: bool,
}

/// Krippendorff's alpha with the nominal difference function.
/// `ratings[grader][item]`; `None` marks a missing rating. Items with fewer
/// than two ratings are not pairable and are skipped.
pub fn krippendorff_alpha(ratings: &[Vec<Option<u32>>]) -> Result<Alpha, StatsError> {
    if ratings.len() < 2 {
        return Err(StatsError::TooFew("two graders"));
    }
    let items = ratings[0].len();
    if let Some(r) = ratings.iter().find(|r| r.len() != items) {
        return Err(StatsError::LengthMismatch(items, r.len()));
    }
    if items < 2 {
        return Err(StatsError::TooFew("two items"));
    }
    // Coincidence matrix, keyed by (value, value).
    let mut coincidences: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for item in 0..items {
        let values: Vec<u32> = ratings.iter().filter_map(|r| r[item]).collect();
        let m = values.len();
        if m < 2 {
            continue;
        }
        let w = 1.0 / (m - 1) as f64;
        for (i, a) in values.iter().enumerate() {
            for (j, b) in values.iter().enumerate() {
                if i != j {
                    *coincidences.entry((*a, *b)).or_default() += w;
                }
            }
        }
    }
    let mut marginals: BTreeMap<u32, f64> = BTreeMap::new();
    for ((c, _), o) in &coincidences {
        *marginals.entry(*c).or_default() += o;
    }
    let n: f64 = marginals.values().sum();
    if n < 2.0 {
        return Err(StatsError::TooFew("two pairable ratings"));
    }
    let observed: f64 = coincidences
        .iter()
        .filter(|((c, k), _)| c != k)
        .map(|(_, o)| o)
        .sum();
    let expected: f64 = marginals
        .iter()
        .flat_map(|(c, nc)| {
            marginals
                .iter()
                .filter(move |(k, _)| *k != c)
                .map(move |(_, nk)| nc * nk)
        })
        .sum::<f64>()
        / (n - 1.0);
    if expected == 0.0 {
        return Ok(Alpha {
            alpha: 1.0,
            degenerate: true,
        });
    }
    Ok(Alpha {
        alpha: 1.0 - observed / expected,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlations {
    pub pearson: f64,
    pub spearman: f64,
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// 1-based ranks with ties given their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson's r and Spearman's rho (Pearson on average ranks).
pub fn correlations(xs: &[f64], ys: &[f64]) -> Result<Correlations, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(StatsError::TooFew("two observations"));
    }
    Ok(Correlations {
        pearson: pearson(xs, ys)?,
        spearman: pearson(&average_ranks(xs), &average_ranks(ys))?,
    })
}
