//! Per-voter brute-force fitting and k-fold cross-validation.
//!
//! Every voter is fitted on her own rounds only. For each fold, the grid point
//! that agrees with the most training votes is applied to the held-out rounds;
//! ties go to the earliest point in the grid's canonical order.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{classify_poll_type, dominated_counts, Dataset, PollType};
use crate::error::{Error, Result};
use crate::model::{decide, Candidate, Family, ModelSpec, Round};

pub const DEFAULT_FOLDS: usize = 10;

/// Best-model weights are multiples of `1 / WEIGHT_UNITS`; 2520 is divisible
/// by every tie size up to the number of families, so splits stay exact.
pub const WEIGHT_UNITS: u64 = 2520;

/// Per-voter quantities some default grids depend on. Derived from utilities
/// and polls only, never from votes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridContext {
    pub m: usize,
    /// Median poll total over the voter's rounds (lower median).
    pub poll_total: u64,
    /// `max u(q1) - min u(qm)` over the voter's rounds.
    pub utility_range: f64,
}

impl GridContext {
    pub fn from_rounds(rounds: &[Round]) -> Result<Self> {
        let first = rounds
            .first()
            .ok_or_else(|| Error::invalid("no rounds to derive a grid from"))?;
        let mut totals: Vec<u64> = rounds.iter().map(|r| r.poll.total()).collect();
        totals.sort_unstable();
        let hi = rounds
            .iter()
            .map(|r| r.utilities.as_slice()[0])
            .fold(f64::NEG_INFINITY, f64::max);
        let lo = rounds
            .iter()
            .map(|r| *r.utilities.as_slice().last().expect("m >= 2"))
            .fold(f64::INFINITY, f64::min);
        Ok(GridContext {
            m: first.m(),
            poll_total: totals[(totals.len() - 1) / 2],
            utility_range: hi - lo,
        })
    }

    /// Fixed AU epsilon: a tenth of the utility range, or 0.1 when the range is 0.
    pub fn au_eps(&self) -> f64 {
        let eps = 0.1 * self.utility_range;
        if eps > 0.0 {
            eps
        } else {
            0.1
        }
    }
}

/// Explicit parameter value lists replacing the default grids, keyed by family
/// and parameter name, e.g. `{"LD": {"r": [0.0, 0.05, 0.1]}}`.
pub type GridOverrides = BTreeMap<Family, BTreeMap<String, Vec<f64>>>;

/// Ordered, duplicate-free list of parameter points for one family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    family: Family,
    points: Vec<ModelSpec>,
}

impl ParamGrid {
    pub fn new(family: Family, points: Vec<ModelSpec>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid(format!("{family} grid is empty")));
        }
        let mut seen = HashSet::new();
        for p in &points {
            if p.family() != family {
                return Err(Error::invalid(format!("{p} in the {family} grid")));
            }
            p.validate()?;
            if !seen.insert(p.to_string()) {
                return Err(Error::invalid(format!("duplicate grid point {p}")));
            }
        }
        Ok(ParamGrid { family, points })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn points(&self) -> &[ModelSpec] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn steps(count: usize, denom: f64) -> Vec<f64> {
    (0..count).map(|i| i as f64 / denom).collect()
}

const AT_BETAS: [f64; 8] = [0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0];
const AU_EPS_VALUES: [f64; 5] = [0.1, 1.0, 5.0, 11.0, 20.0];

/// The default grid of `family` for a voter, with any overrides applied.
///
/// Default grids run from the most sincere parameter value to the most
/// strategic one, so that when several points fit the training rounds equally
/// well the fit settles on the more truthful explanation. Override lists are
/// used in the order given.
///
/// * KP: `k = m, m-1, ..., 1`
/// * CV: `eta` in `2, 4, ..., 1024, n, 2n, 10n`, deduplicated ascending
/// * LD: `r = 0.00, 0.01, ..., 0.30, 0.5`
/// * LDLB: `r = 0.5, 0.30, 0.29, ..., 0.00` (0.5 makes every candidate a
///   possible winner, which is truthful voting)
/// * AT: `beta` in `0.5, 1, 2, 5, 10, 20, 50, 100`
/// * AU: `alpha = 2.0, 1.9, ..., 0.0` x the AT betas, `eps` fixed by [`GridContext::au_eps`]
/// * AU_EPS: as AU with `eps` in `0.1, 1, 5, 11, 20`
pub fn default_grid(family: Family, ctx: &GridContext, overrides: &GridOverrides) -> Result<ParamGrid> {
    let empty = BTreeMap::new();
    let over = overrides.get(&family).unwrap_or(&empty);
    let values = |name: &str, default: Vec<f64>| -> Vec<f64> {
        over.get(name).cloned().unwrap_or(default)
    };
    if let Some(name) = over.keys().find(|k| !param_names(family).contains(&k.as_str())) {
        return Err(Error::Config(format!("grid override {family}.{name} is not a parameter")));
    }
    let integers = |name: &str, v: Vec<f64>| -> Result<Vec<u64>> {
        v.into_iter()
            .map(|x| {
                if x >= 1.0 && x.fract() == 0.0 {
                    Ok(x as u64)
                } else {
                    Err(Error::Config(format!("grid override {family}.{name}: {x} is not a positive integer")))
                }
            })
            .collect()
    };

    let points: Vec<ModelSpec> = match family {
        Family::Truth => vec![ModelSpec::Truth],
        Family::FreqBaseline => vec![ModelSpec::FreqBaseline],
        Family::Kp => {
            let ks = integers("k", values("k", (1..=ctx.m).rev().map(|k| k as f64).collect()))?;
            ks.into_iter().map(|k| ModelSpec::Kp { k: k as usize }).collect()
        }
        Family::Cv => {
            let n = ctx.poll_total as f64;
            let mut default: Vec<f64> = (1..=10).map(|i| 2f64.powi(i)).collect();
            default.extend([n, 2.0 * n, 10.0 * n]);
            let mut etas = integers("eta", values("eta", default))?;
            etas.sort_unstable();
            etas.dedup();
            etas.into_iter().map(|eta| ModelSpec::Cv { eta }).collect()
        }
        Family::Ld | Family::Ldlb => {
            let mut default = steps(31, 100.0);
            default.push(0.5);
            if family == Family::Ldlb {
                default.reverse();
            }
            values("r", default)
                .into_iter()
                .map(|r| {
                    if family == Family::Ld {
                        ModelSpec::Ld { r }
                    } else {
                        ModelSpec::Ldlb { r }
                    }
                })
                .collect()
        }
        Family::At => values("beta", AT_BETAS.to_vec())
            .into_iter()
            .map(|beta| ModelSpec::At { beta })
            .collect(),
        Family::Au | Family::AuEps => {
            let alphas = values("alpha", steps(21, 10.0).into_iter().rev().collect());
            let betas = values("beta", AT_BETAS.to_vec());
            let epsilons = if family == Family::Au {
                values("eps", vec![ctx.au_eps()])
            } else {
                values("eps", AU_EPS_VALUES.to_vec())
            };
            let mut pts = Vec::with_capacity(alphas.len() * betas.len() * epsilons.len());
            for &alpha in &alphas {
                for &beta in &betas {
                    for &eps in &epsilons {
                        pts.push(if family == Family::Au {
                            ModelSpec::Au { alpha, beta, eps }
                        } else {
                            ModelSpec::AuEps { alpha, beta, eps }
                        });
                    }
                }
            }
            pts
        }
    };
    for p in &points {
        p.validate_for(ctx.m)
            .map_err(|e| Error::Config(format!("grid for {family}: {e}")))?;
    }
    ParamGrid::new(family, points)
}

fn param_names(family: Family) -> &'static [&'static str] {
    match family {
        Family::Truth | Family::FreqBaseline => &[],
        Family::Kp => &["k"],
        Family::Cv => &["eta"],
        Family::Ld | Family::Ldlb => &["r"],
        Family::At => &["beta"],
        Family::Au | Family::AuEps => &["alpha", "beta", "eps"],
    }
}

/// Fold id of every round, keyed by round index.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldAssignment {
    folds: usize,
    by_round: BTreeMap<u64, usize>,
}

impl FoldAssignment {
    pub fn folds(&self) -> usize {
        self.folds
    }

    pub fn fold_of(&self, round_index: u64) -> Option<usize> {
        self.by_round.get(&round_index).copied()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.folds];
        for &f in self.by_round.values() {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Round-robin folds over the sorted round indices; fewer than `folds` rounds
/// fall back to leave-one-out.
pub fn kfold_split(round_indices: &[u64], folds: usize) -> Result<FoldAssignment> {
    if folds < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {folds}")));
    }
    let mut sorted = round_indices.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != round_indices.len() {
        return Err(Error::invalid("duplicate round indices"));
    }
    if sorted.len() < 2 {
        return Err(Error::UnfitableVoter {
            voter_id: String::new(),
            rounds: sorted.len(),
        });
    }
    let folds = folds.min(sorted.len());
    Ok(FoldAssignment {
        folds,
        by_round: sorted
            .into_iter()
            .enumerate()
            .map(|(j, idx)| (idx, j % folds))
            .collect(),
    })
}

fn observed(rounds: &[Round]) -> Result<Vec<Candidate>> {
    rounds
        .iter()
        .map(|r| r.vote.ok_or_else(|| Error::invalid("round without an observed vote")))
        .collect()
}

/// Predictions of every grid point on every round.
fn prediction_matrix(grid: &ParamGrid, rounds: &[Round]) -> Result<Vec<Vec<Candidate>>> {
    grid.points()
        .iter()
        .map(|spec| rounds.iter().map(|r| decide(spec, r)).collect())
        .collect()
}

fn best_point(agreement: impl Iterator<Item = usize>) -> (usize, usize) {
    agreement
        .enumerate()
        .fold((0, 0), |(bi, ba), (i, a)| if a > ba { (i, a) } else { (bi, ba) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub spec: ModelSpec,
    /// Number of training rounds the fitted point reproduces.
    pub agreement: usize,
}

/// Grid point agreeing with the most training votes; earliest point on ties.
pub fn fit_voter(grid: &ParamGrid, training: &[Round]) -> Result<FitResult> {
    if training.is_empty() {
        return Err(Error::invalid("empty training set"));
    }
    let votes = observed(training)?;
    let preds = prediction_matrix(grid, training)?;
    let (best, agreement) = best_point(
        preds
            .iter()
            .map(|row| row.iter().zip(&votes).filter(|(p, v)| p == v).count()),
    );
    Ok(FitResult {
        spec: grid.points()[best],
        agreement,
    })
}

/// Held-out predictions of one family for one voter.
#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    /// Prediction for each round, aligned with the input rounds.
    pub predictions: Vec<Candidate>,
    /// Fitted point per fold.
    pub fitted: Vec<ModelSpec>,
    pub misses: usize,
    pub prediction_error: f64,
}

/// k-fold cross-validation of `grid` on one voter's rounds (in round order).
pub fn cross_validate(grid: &ParamGrid, rounds: &[Round], folds: usize) -> Result<CvOutcome> {
    let votes = observed(rounds)?;
    let positions: Vec<u64> = (0..rounds.len() as u64).collect();
    let assignment = kfold_split(&positions, folds)?;
    let preds = prediction_matrix(grid, rounds)?;
    let fold_of: Vec<usize> = positions
        .iter()
        .map(|&p| assignment.fold_of(p).expect("assigned"))
        .collect();

    let mut predictions = vec![Candidate::new(0); rounds.len()];
    let mut fitted = Vec::with_capacity(assignment.folds());
    for fold in 0..assignment.folds() {
        let (best, _) = best_point(preds.iter().map(|row| {
            row.iter()
                .zip(&votes)
                .zip(&fold_of)
                .filter(|((p, v), &f)| f != fold && p == v)
                .count()
        }));
        fitted.push(grid.points()[best]);
        for (j, &f) in fold_of.iter().enumerate() {
            if f == fold {
                predictions[j] = preds[best][j];
            }
        }
    }
    Ok(outcome(predictions, fitted, &votes))
}

fn outcome(predictions: Vec<Candidate>, fitted: Vec<ModelSpec>, votes: &[Candidate]) -> CvOutcome {
    let misses = predictions.iter().zip(votes).filter(|(p, v)| p != v).count();
    CvOutcome {
        prediction_error: misses as f64 / votes.len() as f64,
        predictions,
        fitted,
        misses,
    }
}

/// Per-voter frequency baseline: in each fold, predicts the voter's most
/// frequent preference rank among training rounds with the same poll ordering,
/// or over all training rounds when that ordering was not seen. Ties go to the
/// lower rank.
pub fn frequency_baseline(rounds: &[Round], folds: usize) -> Result<CvOutcome> {
    let votes = observed(rounds)?;
    let positions: Vec<u64> = (0..rounds.len() as u64).collect();
    let assignment = kfold_split(&positions, folds)?;
    let m = rounds[0].m();
    let keys: Vec<Vec<Candidate>> = rounds.iter().map(|r| r.poll.ranking()).collect();
    let mut predictions = vec![Candidate::new(0); rounds.len()];
    for fold in 0..assignment.folds() {
        let mut by_key: HashMap<&[Candidate], Vec<usize>> = HashMap::new();
        let mut global = vec![0usize; m];
        for (j, v) in votes.iter().enumerate() {
            if assignment.fold_of(j as u64) == Some(fold) {
                continue;
            }
            by_key.entry(keys[j].as_slice()).or_insert_with(|| vec![0; m])[v.index()] += 1;
            global[v.index()] += 1;
        }
        for j in 0..rounds.len() {
            if assignment.fold_of(j as u64) != Some(fold) {
                continue;
            }
            let counts = by_key.get(keys[j].as_slice()).unwrap_or(&global);
            predictions[j] = Candidate::new(modal(counts));
        }
    }
    let fitted = vec![ModelSpec::FreqBaseline; assignment.folds()];
    Ok(outcome(predictions, fitted, &votes))
}

fn modal(counts: &[usize]) -> usize {
    best_point(counts.iter().copied()).0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundPrediction {
    pub round_index: u64,
    pub observed: Candidate,
    pub predicted: Candidate,
    pub hit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyResult {
    pub family: Family,
    /// Fitted parameters, one entry per fold.
    pub fold_params: Vec<ModelSpec>,
    pub predictions: Vec<RoundPrediction>,
    pub misses: usize,
    pub prediction_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoterReport {
    pub voter_id: String,
    pub rounds: usize,
    pub results: Vec<FamilyResult>,
    /// Best families for this voter with weights in units of 1/[`WEIGHT_UNITS`].
    pub best: Vec<(Family, u64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedVoter {
    pub voter_id: String,
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominatedRow {
    pub voter_id: String,
    pub rounds: usize,
    pub dominated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverallRow {
    pub family: Family,
    pub voters: usize,
    pub mean_error: f64,
    pub std_dev: f64,
    /// Two standard errors of the mean across voters.
    pub err_bar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PollTypeRow {
    pub family: Family,
    pub poll_type: PollType,
    pub rounds: usize,
    pub misses: usize,
    pub error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundsRow {
    pub family: Family,
    pub rounds_played: usize,
    pub voters: usize,
    pub mean_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestModelRow {
    pub family: Family,
    /// Fractional number of voters for whom this family is (jointly) best.
    pub voters: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub overall: Vec<OverallRow>,
    /// Pooled held-out error per poll type; empty unless `m = 3`.
    pub poll_type: Vec<PollTypeRow>,
    pub rounds: Vec<RoundsRow>,
    pub best_model: Vec<BestModelRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub dataset: String,
    pub m: usize,
    pub folds: usize,
    pub families: Vec<Family>,
    pub voters: Vec<VoterReport>,
    pub excluded: Vec<ExcludedVoter>,
    pub dominated: Vec<DominatedRow>,
    pub aggregate: Option<Aggregate>,
    pub notes: Vec<String>,
}

impl FitReport {
    pub fn fitted_voters(&self) -> usize {
        self.voters.len()
    }
}

/// Cross-validates one family for one voter, building its grid from the voter's rounds.
pub fn evaluate_family(
    family: Family,
    rounds: &[Round],
    overrides: &GridOverrides,
    folds: usize,
) -> Result<CvOutcome> {
    if family == Family::FreqBaseline {
        return frequency_baseline(rounds, folds);
    }
    let ctx = GridContext::from_rounds(rounds)?;
    let grid = default_grid(family, &ctx, overrides)?;
    cross_validate(&grid, rounds, folds)
}

/// Runs every family on every voter and assembles the report. Voters are
/// fitted in parallel; results are merged in voter-id order.
pub fn evaluate_all(
    dataset: &Dataset,
    families: &[Family],
    overrides: &GridOverrides,
    folds: usize,
) -> Result<FitReport> {
    let mut families_unique = Vec::new();
    for &f in families {
        if !families_unique.contains(&f) {
            families_unique.push(f);
        }
    }
    if families_unique.len() as u64 > 9 {
        return Err(Error::invalid("too many families"));
    }
    if folds < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {folds}")));
    }
    let voters = dataset.voters();
    let counts = dominated_counts(dataset);
    let dominated = voters
        .iter()
        .map(|(id, recs)| DominatedRow {
            voter_id: id.to_string(),
            rounds: recs.len(),
            dominated: counts.get(*id).copied().unwrap_or(0),
        })
        .collect();

    let (fit, excluded): (Vec<_>, Vec<_>) = voters.iter().partition(|(_, recs)| recs.len() >= 2);
    let excluded: Vec<ExcludedVoter> = excluded
        .into_iter()
        .map(|(id, recs)| ExcludedVoter {
            voter_id: id.to_string(),
            rounds: recs.len(),
        })
        .collect();

    let mut notes = Vec::new();
    if families_unique.is_empty() {
        notes.push("no model families requested; aggregates omitted".to_string());
    }
    if !excluded.is_empty() {
        notes.push(format!(
            "{} voter(s) with fewer than 2 rounds excluded from fitting",
            excluded.len()
        ));
    }

    let voter_reports: Vec<VoterReport> = fit
        .par_iter()
        .map(|(id, recs)| -> Result<VoterReport> {
            let rounds: Vec<Round> = recs.iter().map(|r| r.round()).collect();
            let mut results = Vec::with_capacity(families_unique.len());
            for &family in &families_unique {
                let cv = evaluate_family(family, &rounds, overrides, folds)?;
                let predictions = recs
                    .iter()
                    .zip(&cv.predictions)
                    .map(|(r, &p)| RoundPrediction {
                        round_index: r.round_index,
                        observed: r.vote,
                        predicted: p,
                        hit: p == r.vote,
                    })
                    .collect();
                results.push(FamilyResult {
                    family,
                    fold_params: cv.fitted,
                    predictions,
                    misses: cv.misses,
                    prediction_error: cv.prediction_error,
                });
            }
            let best = best_families(&results);
            Ok(VoterReport {
                voter_id: id.to_string(),
                rounds: recs.len(),
                results,
                best,
            })
        })
        .collect::<Result<_>>()?;

    let aggregate = if families_unique.is_empty() {
        None
    } else {
        Some(aggregate(dataset, &families_unique, &voter_reports))
    };

    Ok(FitReport {
        dataset: dataset.name.clone(),
        m: dataset.m(),
        folds,
        families: families_unique,
        voters: voter_reports,
        excluded,
        dominated,
        aggregate,
        notes,
    })
}

fn best_families(results: &[FamilyResult]) -> Vec<(Family, u64)> {
    let Some(least) = results.iter().map(|r| r.misses).min() else {
        return Vec::new();
    };
    let leaders: Vec<Family> = results
        .iter()
        .filter(|r| r.misses == least)
        .map(|r| r.family)
        .collect();
    let share = WEIGHT_UNITS / leaders.len() as u64;
    leaders.into_iter().map(|f| (f, share)).collect()
}

fn aggregate(dataset: &Dataset, families: &[Family], voters: &[VoterReport]) -> Aggregate {
    let mut overall = Vec::new();
    let mut rounds_rows = Vec::new();
    let mut best_model = Vec::new();
    let mut poll_type = Vec::new();

    let poll_types: HashMap<(&str, u64), PollType> = if dataset.m() == 3 {
        dataset
            .records()
            .iter()
            .filter_map(|r| {
                classify_poll_type(&r.poll)
                    .ok()
                    .map(|t| ((r.voter_id.as_str(), r.round_index), t))
            })
            .collect()
    } else {
        HashMap::new()
    };

    for (fi, &family) in families.iter().enumerate() {
        let errors: Vec<f64> = voters.iter().map(|v| v.results[fi].prediction_error).collect();
        let n = errors.len();
        let mean = if n > 0 { errors.iter().sum::<f64>() / n as f64 } else { 0.0 };
        let std_dev = if n > 1 {
            (errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let err_bar = if n > 0 { 2.0 * std_dev / (n as f64).sqrt() } else { 0.0 };
        overall.push(OverallRow {
            family,
            voters: n,
            mean_error: mean,
            std_dev,
            err_bar,
        });

        let mut by_rounds: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for v in voters {
            by_rounds.entry(v.rounds).or_default().push(v.results[fi].prediction_error);
        }
        for (rounds_played, errs) in by_rounds {
            rounds_rows.push(RoundsRow {
                family,
                rounds_played,
                voters: errs.len(),
                mean_error: errs.iter().sum::<f64>() / errs.len() as f64,
            });
        }

        let units: u64 = voters
            .iter()
            .flat_map(|v| v.best.iter())
            .filter(|(f, _)| *f == family)
            .map(|(_, w)| w)
            .sum();
        best_model.push(BestModelRow {
            family,
            voters: units as f64 / WEIGHT_UNITS as f64,
        });

        if dataset.m() == 3 {
            let mut tally: BTreeMap<PollType, (usize, usize)> = BTreeMap::new();
            for v in voters {
                for p in &v.results[fi].predictions {
                    if let Some(&t) = poll_types.get(&(v.voter_id.as_str(), p.round_index)) {
                        let e = tally.entry(t).or_default();
                        e.0 += 1;
                        if !p.hit {
                            e.1 += 1;
                        }
                    }
                }
            }
            for t in PollType::TABLE_ORDER {
                let (rounds, misses) = tally.get(&t).copied().unwrap_or((0, 0));
                poll_type.push(PollTypeRow {
                    family,
                    poll_type: t,
                    rounds,
                    misses,
                    error: (rounds > 0).then(|| misses as f64 / rounds as f64),
                });
            }
        }
    }

    Aggregate {
        overall,
        poll_type,
        rounds: rounds_rows,
        best_model,
    }
}
