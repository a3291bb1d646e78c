use std::cmp::Ordering;

use crate::config::{ModelConfig, Variant};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_serial, EvalReport};
use crate::vocab::Vocabulary;

/// Candidate values for the searched hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperGrid {
    pub dims: Vec<usize>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
}

impl HyperGrid {
    /// `d in {10, 20, 50, 100, 200}`, each margin in `{0.1, 1, 2, 5, 10}`.
    pub fn standard() -> Self {
        let margins = vec![0.1, 1.0, 2.0, 5.0, 10.0];
        HyperGrid {
            dims: vec![10, 20, 50, 100, 200],
            alphas: margins.clone(),
            betas: margins.clone(),
            gammas: margins,
        }
    }

    /// All combinations, ordered lexicographically by `(dim, alpha, beta, gamma)`
    /// in the order the values were listed.
    pub fn points(&self, fixed: &ModelConfig) -> Vec<ModelConfig> {
        let mut out = Vec::with_capacity(self.dims.len() * self.alphas.len() * self.betas.len() * self.gammas.len());
        for &dim in &self.dims {
            for &alpha in &self.alphas {
                for &beta in &self.betas {
                    for &gamma in &self.gammas {
                        out.push(ModelConfig {
                            dim,
                            alpha,
                            beta,
                            gamma,
                            ..*fixed
                        });
                    }
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.dims.len() * self.alphas.len() * self.betas.len() * self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub struct GridPoint {
    pub config: ModelConfig,
    pub report: EvalReport,
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    /// Every point in grid order.
    pub points: Vec<GridPoint>,
    pub best: usize,
}

impl GridOutcome {
    pub fn best_config(&self) -> &ModelConfig {
        &self.points[self.best].config
    }

    pub fn best_report(&self) -> &EvalReport {
        &self.points[self.best].report
    }
}

/// Lower average rank first, then higher Hit@10, higher Hit@1, then the
/// smaller configuration.
fn selection_order(a: &GridPoint, b: &GridPoint) -> Ordering {
    a.report
        .avg_rank
        .total_cmp(&b.report.avg_rank)
        .then(b.report.hit_at_10.total_cmp(&a.report.hit_at_10))
        .then(b.report.hit_at_1.total_cmp(&a.report.hit_at_1))
        .then(a.config.grid_cmp(&b.config))
}

pub(crate) fn select_best(points: &[GridPoint]) -> usize {
    (0..points.len())
        .min_by(|&i, &j| selection_order(&points[i], &points[j]))
        .expect("non-empty grid")
}

fn run_point(dataset: &Dataset, vocab: &Vocabulary, config: ModelConfig, variant: Variant) -> Result<GridPoint> {
    let (table, _) = super::train(dataset, vocab, &config, variant)?;
    let report = evaluate_serial(&table, &dataset.valid, variant)?;
    Ok(GridPoint { config, report })
}

/// Trains one deterministic model per grid point and picks the best on the
/// validation split. Points are trained in parallel when the `parallel`
/// feature is on; the outcome does not depend on it.
pub fn grid_search(
    dataset: &Dataset,
    vocab: &Vocabulary,
    grid: &HyperGrid,
    fixed: &ModelConfig,
    variant: Variant,
) -> Result<GridOutcome> {
    if grid.is_empty() {
        return Err(Error::Config("hyperparameter grid is empty".into()));
    }
    if dataset.valid.is_empty() {
        return Err(Error::Config("grid search needs a non-empty validation split".into()));
    }
    let configs = grid.points(fixed);
    for c in &configs {
        c.validate()?;
    }

    #[cfg(feature = "parallel")]
    let points: Vec<GridPoint> = {
        use rayon::prelude::*;
        configs
            .into_par_iter()
            .map(|c| run_point(dataset, vocab, c, variant))
            .collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let points: Vec<GridPoint> = configs
        .into_iter()
        .map(|c| run_point(dataset, vocab, c, variant))
        .collect::<Result<_>>()?;

    let best = select_best(&points);
    Ok(GridOutcome { points, best })
}
