//! Synthetic experiments: random polls, model-driven votes with optional
//! trembles, and i.i.d. outcome sampling with tie-split rewards.
//!
//! All randomness comes from ChaCha8 (`rand_chacha`), seeded from a `u64`.
//! Each voter draws from its own ChaCha stream (stream id = voter index), so
//! datasets are reproducible across platforms and independent of the order in
//! which voters are generated.

use std::collections::BTreeMap;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, RoundRecord};
use crate::error::{Error, Result};
use crate::model::{decide, tie_split_utility, Candidate, ModelSpec, Poll, Round, Utilities, WinnerSet};

pub type SimRng = ChaCha8Rng;

/// Seeded generator for voter `stream`.
pub fn rng_for(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationComponent {
    pub spec: ModelSpec,
    pub weight: f64,
    /// Probability of replacing the model's vote with a uniform-random one.
    #[serde(default)]
    pub tremble: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSpec {
    pub components: Vec<PopulationComponent>,
    pub rounds_per_voter: usize,
    pub num_voters: usize,
    /// Utilities shared by every voter; defaults to evenly spaced `10 .. 0`.
    #[serde(default)]
    pub utilities: Option<Vec<f64>>,
}

impl PopulationSpec {
    pub fn validate(&self, m: usize) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(msg));
        if self.components.is_empty() {
            return cfg("population.components is empty".into());
        }
        if self.num_voters == 0 {
            return cfg("population.num_voters must be at least 1".into());
        }
        if self.rounds_per_voter == 0 {
            return cfg("population.rounds_per_voter must be at least 1".into());
        }
        let mut total = 0.0;
        for (i, c) in self.components.iter().enumerate() {
            if !(c.weight >= 0.0 && c.weight.is_finite()) {
                return cfg(format!("population.components[{i}].weight = {} is invalid", c.weight));
            }
            if !(0.0..=1.0).contains(&c.tremble) {
                return cfg(format!(
                    "population.components[{i}].tremble = {} must lie in [0, 1]",
                    c.tremble
                ));
            }
            if let Err(e) = c.spec.validate() {
                return cfg(format!("population.components[{i}].spec: {e}"));
            }
            match c.spec {
                ModelSpec::FreqBaseline => {
                    return cfg(format!(
                        "population.components[{i}].spec: FREQ_BASELINE cannot generate votes"
                    ))
                }
                ModelSpec::Kp { k } if k > m => {
                    return cfg(format!("population.components[{i}].spec: k = {k} exceeds m = {m}"))
                }
                _ => {}
            }
            total += c.weight;
        }
        if total <= 0.0 {
            return cfg("population.components weights sum to 0".into());
        }
        if let Some(u) = &self.utilities {
            if u.len() != m {
                return cfg(format!("population.utilities has {} entries, m = {m}", u.len()));
            }
            Utilities::new(u.clone()).map_err(|e| Error::Config(format!("population.utilities: {e}")))?;
        }
        Ok(())
    }

    pub fn utilities(&self, m: usize) -> Result<Utilities> {
        match &self.utilities {
            Some(u) => Utilities::new(u.clone()),
            None => Utilities::new(
                (0..m)
                    .map(|i| 10.0 * (m - 1 - i) as f64 / (m - 1) as f64)
                    .collect(),
            ),
        }
    }

    /// Component index of every voter: exact quotas by largest remainder
    /// (ties to the earlier component), voters filled in component order.
    pub fn assignments(&self) -> Vec<usize> {
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        let n = self.num_voters;
        let raw: Vec<f64> = self
            .components
            .iter()
            .map(|c| n as f64 * c.weight / total)
            .collect();
        let mut counts: Vec<usize> = raw.iter().map(|q| q.floor() as usize).collect();
        let mut left = n - counts.iter().sum::<usize>();
        let mut by_remainder: Vec<usize> = (0..raw.len()).collect();
        by_remainder.sort_by(|&a, &b| {
            let (fa, fb) = (raw[a] - raw[a].floor(), raw[b] - raw[b].floor());
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        for &i in by_remainder.iter().cycle() {
            if left == 0 {
                break;
            }
            counts[i] += 1;
            left -= 1;
        }
        counts
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| std::iter::repeat_n(i, c))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PollScheme {
    /// A uniformly random ordering of the candidates, with consecutive scores
    /// separated by at least `min_gap` votes.
    UniformOrderings {
        #[serde(default)]
        min_gap: u64,
    },
    /// Shares drawn from a symmetric Dirichlet, rounded to integers summing to `n`.
    Dirichlet { concentration: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PollGenConfig {
    pub m: usize,
    pub n: u64,
    pub scheme: PollScheme,
    #[serde(default)]
    pub seed: u64,
}

impl PollGenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::Config(format!("pollgen.m = {} must be at least 2", self.m)));
        }
        if self.n < self.m as u64 {
            return Err(Error::Config(format!(
                "pollgen.n = {} must be at least m = {}",
                self.n, self.m
            )));
        }
        match self.scheme {
            PollScheme::UniformOrderings { min_gap } => {
                let m = self.m as u64;
                let needed = min_gap.saturating_mul(m * (m - 1) / 2);
                if needed > self.n {
                    return Err(Error::Config(format!(
                        "pollgen.scheme.min_gap = {min_gap} is infeasible for n = {}",
                        self.n
                    )));
                }
            }
            PollScheme::Dirichlet { concentration } => {
                if !(concentration > 0.0 && concentration.is_finite()) {
                    return Err(Error::Config(format!(
                        "pollgen.scheme.concentration = {concentration} must be positive"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Draws one poll with total exactly `config.n`.
pub fn sample_poll<R: Rng + ?Sized>(config: &PollGenConfig, rng: &mut R) -> Result<Poll> {
    config.validate()?;
    let (m, n) = (config.m, config.n);
    let scores = match config.scheme {
        PollScheme::UniformOrderings { min_gap } => {
            // descending parts y of n' = n - gap offsets, then x_i = y_i + (m-1-i)*gap
            let offsets: Vec<u64> = (0..m).map(|i| (m - 1 - i) as u64 * min_gap).collect();
            let free = n - offsets.iter().sum::<u64>();
            let mut parts = uniform_composition(free, m, rng);
            parts.sort_unstable_by(|a, b| b.cmp(a));
            let sorted: Vec<u64> = parts.iter().zip(&offsets).map(|(y, o)| y + o).collect();
            let mut order: Vec<usize> = (0..m).collect();
            order.shuffle(rng);
            let mut scores = vec![0u64; m];
            for (rank, &cand) in order.iter().enumerate() {
                scores[cand] = sorted[rank];
            }
            scores
        }
        PollScheme::Dirichlet { concentration } => {
            let gamma = Gamma::new(concentration, 1.0)
                .map_err(|e| Error::Config(format!("pollgen.scheme.concentration: {e}")))?;
            let mut draws: Vec<f64> = (0..m).map(|_| gamma.sample(rng)).collect();
            let total: f64 = draws.iter().sum();
            if total > 0.0 {
                draws.iter_mut().for_each(|d| *d /= total);
            } else {
                draws = vec![1.0 / m as f64; m];
            }
            round_to_total(&draws, n)
        }
    };
    Poll::new(scores)
}

/// Uniformly random composition of `total` into `parts` non-negative parts
/// (stars and bars).
fn uniform_composition<R: Rng + ?Sized>(total: u64, parts: usize, rng: &mut R) -> Vec<u64> {
    let slots = total as usize + parts - 1;
    let mut bars: Vec<usize> = index::sample(rng, slots, parts - 1).into_vec();
    bars.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0usize;
    for (i, &b) in bars.iter().enumerate() {
        out.push((b - prev - if i == 0 { 0 } else { 1 }) as u64);
        prev = b;
    }
    let last_start = if bars.is_empty() { 0 } else { prev + 1 };
    out.push((slots - last_start) as u64);
    out
}

/// Largest-remainder rounding of `shares * total` to integers summing to `total`.
fn round_to_total(shares: &[f64], total: u64) -> Vec<u64> {
    let raw: Vec<f64> = shares.iter().map(|s| s * total as f64).collect();
    let mut out: Vec<u64> = raw.iter().map(|r| r.floor() as u64).collect();
    let assigned: u64 = out.iter().sum();
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (raw[a] - raw[a].floor(), raw[b] - raw[b].floor());
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().cycle().take(total.saturating_sub(assigned) as usize) {
        out[i] += 1;
    }
    out
}

/// The model's vote, replaced by a uniform-random candidate with probability `tremble`.
pub fn simulate_vote<R: Rng + ?Sized>(
    spec: &ModelSpec,
    tremble: f64,
    round: &Round,
    rng: &mut R,
) -> Result<Candidate> {
    let draw: f64 = rng.random();
    if draw < tremble {
        Ok(Candidate::new(rng.random_range(0..round.m())))
    } else {
        decide(spec, round)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectionOutcome {
    pub final_scores: Vec<u64>,
    pub winners: WinnerSet,
    pub reward: f64,
}

/// Samples `n` i.i.d. ballots from the poll shares, adds the subject's vote and
/// pays the tie-split utility of the plurality winners.
pub fn sample_election_outcome<R: Rng + ?Sized>(
    u: &Utilities,
    s: &Poll,
    subject_vote: Candidate,
    rng: &mut R,
) -> Result<ElectionOutcome> {
    if u.m() != s.m() || subject_vote.index() >= s.m() {
        return Err(Error::invalid("utilities, poll and vote disagree on m"));
    }
    let cumulative: Vec<u64> = s
        .as_slice()
        .iter()
        .scan(0u64, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect();
    let mut final_scores = vec![0u64; s.m()];
    for _ in 0..s.total() {
        let ticket = rng.random_range(0..s.total());
        let c = cumulative.partition_point(|&edge| edge <= ticket);
        final_scores[c] += 1;
    }
    final_scores[subject_vote.index()] += 1;
    let winners = WinnerSet::from_scores(&final_scores);
    let reward = tie_split_utility(u, &winners)?;
    Ok(ElectionOutcome {
        final_scores,
        winners,
        reward,
    })
}

/// What generated a synthetic voter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoterLabel {
    pub component: usize,
    pub spec: ModelSpec,
    pub tremble: f64,
    /// Sum of sampled-election rewards over the voter's rounds.
    pub total_reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub voters: BTreeMap<String, VoterLabel>,
}

/// Full simulation config as accepted on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    #[serde(default = "default_dataset_name")]
    pub dataset: String,
    pub population: PopulationSpec,
    pub pollgen: PollGenConfig,
}

fn default_dataset_name() -> String {
    "SYNTHETIC".into()
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.pollgen.validate()?;
        self.population.validate(self.pollgen.m)
    }
}

pub fn voter_id(index: usize, num_voters: usize) -> String {
    let width = num_voters.saturating_sub(1).to_string().len();
    format!("v{index:0width$}")
}

/// Generates a dataset plus the ground-truth model of every voter.
pub fn generate_dataset(
    name: &str,
    pop: &PopulationSpec,
    pollgen: &PollGenConfig,
    seed: u64,
) -> Result<(Dataset, GroundTruth)> {
    pollgen.validate()?;
    pop.validate(pollgen.m)?;
    let utilities = pop.utilities(pollgen.m)?;
    let mut records = Vec::with_capacity(pop.num_voters * pop.rounds_per_voter);
    let mut voters = BTreeMap::new();
    for (v, &component) in pop.assignments().iter().enumerate() {
        let comp = &pop.components[component];
        let id = voter_id(v, pop.num_voters);
        let mut rng = rng_for(seed, v as u64);
        let mut total_reward = 0.0;
        for r in 0..pop.rounds_per_voter {
            let poll = sample_poll(pollgen, &mut rng)?;
            let round = Round::new(utilities.clone(), poll, None)?;
            let vote = simulate_vote(&comp.spec, comp.tremble, &round, &mut rng)?;
            let outcome = sample_election_outcome(&utilities, &round.poll, vote, &mut rng)?;
            total_reward += outcome.reward;
            records.push(RoundRecord {
                dataset: name.to_string(),
                voter_id: id.clone(),
                round_index: r as u64,
                utilities: utilities.clone(),
                poll: round.poll,
                vote,
                reward_scheme_tag: None,
            });
        }
        voters.insert(
            id,
            VoterLabel {
                component,
                spec: comp.spec,
                tremble: comp.tremble,
                total_reward,
            },
        );
    }
    Ok((Dataset::new(name, records)?, GroundTruth { seed, voters }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{classify_poll_type, is_dominated_action, load_dataset, write_csv, Format, PollType};
    use std::collections::HashMap;

    fn uniform(m: usize, n: u64, min_gap: u64) -> PollGenConfig {
        PollGenConfig {
            m,
            n,
            scheme: PollScheme::UniformOrderings { min_gap },
            seed: 0,
        }
    }

    fn population(components: Vec<(ModelSpec, f64, f64)>, voters: usize, rounds: usize) -> PopulationSpec {
        PopulationSpec {
            components: components
                .into_iter()
                .map(|(spec, weight, tremble)| PopulationComponent { spec, weight, tremble })
                .collect(),
            rounds_per_voter: rounds,
            num_voters: voters,
            utilities: None,
        }
    }

    #[test]
    fn dirichlet_polls_are_seeded() {
        let cfg = PollGenConfig {
            m: 4,
            n: 1000,
            scheme: PollScheme::Dirichlet { concentration: 2.0 },
            seed: 0,
        };
        let a: Vec<Poll> = {
            let mut rng = rng_for(7, 0);
            (0..20).map(|_| sample_poll(&cfg, &mut rng).unwrap()).collect()
        };
        let mut rng = rng_for(7, 0);
        for p in &a {
            assert_eq!(p, &sample_poll(&cfg, &mut rng).unwrap());
            assert_eq!(p.total(), 1000);
        }
    }

    #[test]
    fn uniform_orderings_are_balanced() {
        let cfg = uniform(3, 1000, 1);
        let mut rng = rng_for(11, 0);
        let mut counts: HashMap<PollType, usize> = HashMap::new();
        let draws = 6000;
        for _ in 0..draws {
            let p = sample_poll(&cfg, &mut rng).unwrap();
            assert_eq!(p.total(), 1000);
            *counts.entry(classify_poll_type(&p).unwrap()).or_default() += 1;
        }
        for t in PollType::TABLE_ORDER {
            let freq = counts[&t] as f64 / draws as f64;
            assert!((freq - 1.0 / 6.0).abs() < 0.02, "{t}: {freq}");
        }
    }

    #[test]
    fn tight_gap_forces_unique_shape() {
        let cfg = uniform(3, 3, 1);
        let mut rng = rng_for(3, 0);
        for _ in 0..50 {
            let mut s = sample_poll(&cfg, &mut rng).unwrap().as_slice().to_vec();
            s.sort_unstable();
            assert_eq!(s, vec![0, 1, 2]);
        }
        assert!(uniform(3, 2, 1).validate().is_err());
    }

    #[test]
    fn composition_is_complete() {
        let mut rng = rng_for(1, 0);
        for total in [0u64, 1, 5, 100] {
            for parts in [1usize, 2, 5] {
                let c = uniform_composition(total, parts, &mut rng);
                assert_eq!(c.len(), parts);
                assert_eq!(c.iter().sum::<u64>(), total);
            }
        }
        assert_eq!(round_to_total(&[0.5, 0.25, 0.25], 3).iter().sum::<u64>(), 3);
    }

    #[test]
    fn tremble_zero_is_decide() {
        let cfg = uniform(3, 100, 0);
        let mut rng = rng_for(5, 0);
        let u = Utilities::new(vec![10.0, 5.0, 0.0]).unwrap();
        let spec = ModelSpec::Kp { k: 2 };
        for _ in 0..200 {
            let round = Round::new(u.clone(), sample_poll(&cfg, &mut rng).unwrap(), None).unwrap();
            assert_eq!(
                simulate_vote(&spec, 0.0, &round, &mut rng).unwrap(),
                decide(&spec, &round).unwrap()
            );
        }
    }

    #[test]
    fn tremble_one_is_uniform() {
        let u = Utilities::new(vec![10.0, 5.0, 0.0]).unwrap();
        let round = Round::new(u, Poll::new(vec![50, 30, 20]).unwrap(), None).unwrap();
        let mut rng = rng_for(9, 0);
        let mut counts = [0usize; 3];
        for _ in 0..1000 {
            counts[simulate_vote(&ModelSpec::Truth, 1.0, &round, &mut rng).unwrap().index()] += 1;
        }
        for c in counts {
            assert!((c as f64 / 1000.0 - 1.0 / 3.0).abs() < 0.05, "{counts:?}");
        }
        let replay = |seed| {
            let mut rng = rng_for(seed, 0);
            (0..30)
                .map(|_| simulate_vote(&ModelSpec::Truth, 0.5, &round, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(replay(4), replay(4));
    }

    #[test]
    fn degenerate_poll_outcome() {
        let u = Utilities::new(vec![10.0, 5.0, 0.0]).unwrap();
        let s = Poll::new(vec![0, 40, 0]).unwrap();
        let mut rng = rng_for(2, 0);
        for vote in 0..3 {
            let out = sample_election_outcome(&u, &s, Candidate::new(vote), &mut rng).unwrap();
            assert_eq!(out.winners.as_slice(), &[Candidate::new(1)]);
            assert_eq!(out.reward, 5.0);
            assert_eq!(out.final_scores.iter().sum::<u64>(), 41);
        }
    }

    #[test]
    fn tied_outcome_splits_reward() {
        let u = Utilities::new(vec![10.0, 5.0, 0.0]).unwrap();
        let w = WinnerSet::new(vec![Candidate::new(0), Candidate::new(1)]).unwrap();
        assert_eq!(tie_split_utility(&u, &w).unwrap(), 7.5);
        // poll (1, 0, 0): the other voter votes q1; a q2 vote ties it
        let s = Poll::new(vec![1, 0, 0]).unwrap();
        let out = sample_election_outcome(&u, &s, Candidate::new(1), &mut rng_for(0, 0)).unwrap();
        assert_eq!(out.reward, 7.5);
    }

    #[test]
    fn outcome_frequencies_match_independent_sampler() {
        let u = Utilities::new(vec![40.0, 30.0, 20.0, 10.0, 0.0]).unwrap();
        let s = Poll::new(vec![25, 70, 20, 100, 80]).unwrap();
        let samples = 10_000;
        let mut ours = [0.0f64; 5];
        let mut rng = rng_for(123, 0);
        for _ in 0..samples {
            let out = sample_election_outcome(&u, &s, Candidate::new(0), &mut rng).unwrap();
            for w in out.winners.as_slice() {
                ours[w.index()] += 1.0 / out.winners.len() as f64;
            }
        }
        // independent oracle: sequential binomial draws from float shares
        let mut theirs = [0.0f64; 5];
        let mut rng = ChaCha8Rng::seed_from_u64(999);
        let shares: Vec<f64> = s.as_slice().iter().map(|&x| x as f64 / 295.0).collect();
        for _ in 0..samples {
            let mut counts = [0u64; 5];
            let mut left = 295u64;
            let mut mass = 1.0;
            for i in 0..4 {
                let p = (shares[i] / mass).min(1.0);
                let k = (0..left).filter(|_| rng.random::<f64>() < p).count() as u64;
                counts[i] = k;
                left -= k;
                mass -= shares[i];
            }
            counts[4] = left;
            counts[0] += 1;
            let top = *counts.iter().max().unwrap();
            let tied = counts.iter().filter(|&&c| c == top).count() as f64;
            for i in 0..5 {
                if counts[i] == top {
                    theirs[i] += 1.0 / tied;
                }
            }
        }
        for i in 0..5 {
            let (a, b) = (ours[i] / samples as f64, theirs[i] / samples as f64);
            assert!((a - b).abs() < 0.01, "q{}: {a} vs {b}", i + 1);
        }
    }

    #[test]
    fn generate_counts_and_truthful_population() {
        let pop = population(vec![(ModelSpec::Truth, 1.0, 0.0)], 100, 36);
        let (ds, truth) = generate_dataset("T", &pop, &uniform(3, 1000, 1), 42).unwrap();
        assert_eq!(ds.len(), 3600);
        assert_eq!(truth.voters.len(), 100);
        assert!(ds.records().iter().all(|r| r.vote == Candidate::new(0)));
    }

    #[test]
    fn generation_roundtrips_and_is_deterministic() {
        let pop = population(
            vec![(ModelSpec::Kp { k: 2 }, 1.0, 0.1), (ModelSpec::Ldlb { r: 0.05 }, 1.0, 0.0)],
            7,
            5,
        );
        let cfg = uniform(3, 1000, 1);
        let (a, ta) = generate_dataset("R", &pop, &cfg, 3).unwrap();
        let (b, tb) = generate_dataset("R", &pop, &cfg, 3).unwrap();
        assert_eq!(ta, tb);
        let (mut fa, mut fb) = (Vec::new(), Vec::new());
        write_csv(&a, &mut fa).unwrap();
        write_csv(&b, &mut fb).unwrap();
        assert_eq!(fa, fb);
        assert_eq!(load_dataset(fa.as_slice(), Format::Csv).unwrap(), a);
        let (c, _) = generate_dataset("R", &pop, &cfg, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn no_dominated_votes_without_tremble() {
        let specs = [
            ModelSpec::Kp { k: 2 },
            ModelSpec::Ld { r: 0.1 },
            ModelSpec::Ldlb { r: 0.05 },
            ModelSpec::At { beta: 5.0 },
            ModelSpec::Au { alpha: 0.8, beta: 5.0, eps: 1.0 },
            ModelSpec::Cv { eta: 64 },
        ];
        let pop = population(specs.iter().map(|&s| (s, 1.0, 0.0)).collect(), 12, 30);
        let (ds, _) = generate_dataset("D", &pop, &uniform(3, 1000, 0), 17).unwrap();
        assert!(ds
            .records()
            .iter()
            .all(|r| !is_dominated_action(&r.utilities, &r.poll, r.vote)));
    }

    #[test]
    fn quotas_are_exact() {
        let pop = population(
            vec![
                (ModelSpec::Truth, 1.0, 0.0),
                (ModelSpec::Truth, 1.0, 0.0),
                (ModelSpec::Truth, 1.0, 0.0),
                (ModelSpec::Truth, 1.0, 1.0),
            ],
            10,
            1,
        );
        let a = pop.assignments();
        assert_eq!(a, vec![0, 0, 0, 1, 1, 1, 2, 2, 3, 3]);
    }

    #[test]
    fn config_errors_name_fields() {
        let pop = population(vec![(ModelSpec::Truth, 0.0, 0.0)], 10, 1);
        let err = pop.validate(3).unwrap_err().to_string();
        assert!(err.contains("weights sum to 0"), "{err}");
        let pop = population(vec![(ModelSpec::Kp { k: 4 }, 1.0, 0.0)], 10, 1);
        assert!(pop.validate(3).unwrap_err().to_string().contains("components[0]"));
        let pop = population(vec![(ModelSpec::Truth, 1.0, 1.5)], 10, 1);
        assert!(pop.validate(3).unwrap_err().to_string().contains("tremble"));
    }

    #[test]
    fn sim_config_json() {
        let text = r#"{
            "population": {
                "components": [{"spec": {"family": "KP", "k": 2}, "weight": 1.0}],
                "rounds_per_voter": 4, "num_voters": 3
            },
            "pollgen": {"m": 3, "n": 1000, "scheme": {"type": "UNIFORM_ORDERINGS", "min_gap": 1}}
        }"#;
        let cfg: SimConfig = serde_json::from_str(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.dataset, "SYNTHETIC");
        assert_eq!(cfg.population.components[0].tremble, 0.0);
    }

    #[test]
    fn voter_ids_sort_numerically() {
        assert_eq!(voter_id(7, 100), "v07");
        assert_eq!(voter_id(7, 101), "v007");
        assert_eq!(voter_id(0, 1), "v0");
    }
}
