//! Domain types and the poll-only decision models.
//!
//! Every model is a pure function of the voter's utilities and the poll.
//! Candidates are indexed by preference rank, so `u` is non-increasing and
//! `q1` is always the truthful vote.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pivot;

/// A candidate, identified by the voter's preference rank (`q1` is the favourite).
///
/// Stored zero-based; serialized and displayed by its one-based rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "usize", try_from = "usize")]
pub struct Candidate(usize);

impl Candidate {
    /// Candidate at zero-based position `index`.
    pub const fn new(index: usize) -> Self {
        Candidate(index)
    }

    /// Candidate with one-based preference rank `rank` (`1` is `q1`).
    pub fn from_rank(rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::invalid("candidate ranks start at 1"));
        }
        Ok(Candidate(rank - 1))
    }

    pub const fn index(self) -> usize {
        self.0
    }

    pub const fn rank(self) -> usize {
        self.0 + 1
    }
}

impl From<Candidate> for usize {
    fn from(c: Candidate) -> usize {
        c.rank()
    }
}

impl TryFrom<usize> for Candidate {
    type Error = Error;

    fn try_from(rank: usize) -> Result<Self> {
        Candidate::from_rank(rank)
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.rank())
    }
}

/// Cardinal utilities indexed by preference rank: non-increasing, not all equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Utilities(Vec<f64>);

impl Utilities {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 candidates, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("utility {v} is not finite")));
        }
        if let Some(w) = values.windows(2).position(|w| w[0] < w[1]) {
            return Err(Error::invalid(format!(
                "utilities must be non-increasing in preference rank (u{} < u{})",
                w + 1,
                w + 2
            )));
        }
        if values[0] <= values[values.len() - 1] {
            return Err(Error::invalid("utilities express no strict preference"));
        }
        Ok(Utilities(values))
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }

    pub fn of(&self, c: Candidate) -> f64 {
        self.0[c.index()]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `u(q1) - u(qm)`, always positive.
    pub fn range(&self) -> f64 {
        self.0[0] - self.0[self.0.len() - 1]
    }

    /// Multiplies every utility by `factor` (must be positive).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Utilities::new(self.0.iter().map(|u| u * factor).collect())
    }
}

impl TryFrom<Vec<f64>> for Utilities {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Utilities::new(v)
    }
}

impl From<Utilities> for Vec<f64> {
    fn from(u: Utilities) -> Vec<f64> {
        u.0
    }
}

/// Poll scores per candidate, indexed by the voter's preference rank.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct Poll {
    scores: Vec<u64>,
    total: u64,
}

impl Poll {
    pub fn new(scores: Vec<u64>) -> Result<Self> {
        if scores.len() < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 candidates, got {}",
                scores.len()
            )));
        }
        let total = scores.iter().sum::<u64>();
        if total == 0 {
            return Err(Error::invalid("poll total must be at least 1"));
        }
        Ok(Poll { scores, total })
    }

    pub fn m(&self) -> usize {
        self.scores.len()
    }

    /// The total number of polled voters, `n`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn score(&self, c: Candidate) -> u64 {
        self.scores[c.index()]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.scores
    }

    /// Normalized vote share `s(c) / n`.
    pub fn share(&self, c: Candidate) -> f64 {
        self.scores[c.index()] as f64 / self.total as f64
    }

    /// Highest-scored candidate; equal scores go to the lower index.
    pub fn leader(&self) -> Candidate {
        self.ranking()[0]
    }

    /// All candidates sorted by score, highest first, equal scores by lower index.
    pub fn ranking(&self) -> Vec<Candidate> {
        let mut order: Vec<Candidate> = candidates(self.m()).collect();
        order.sort_by(|a, b| self.score(*b).cmp(&self.score(*a)).then(a.cmp(b)));
        order
    }
}

impl TryFrom<Vec<u64>> for Poll {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        Poll::new(v)
    }
}

impl From<Poll> for Vec<u64> {
    fn from(p: Poll) -> Vec<u64> {
        p.scores
    }
}

/// One voting decision: utilities, the poll shown, and the observed vote if known.
#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    pub utilities: Utilities,
    pub poll: Poll,
    pub vote: Option<Candidate>,
}

impl Round {
    pub fn new(utilities: Utilities, poll: Poll, vote: Option<Candidate>) -> Result<Self> {
        if utilities.m() != poll.m() {
            return Err(Error::invalid(format!(
                "utilities have {} candidates but the poll has {}",
                utilities.m(),
                poll.m()
            )));
        }
        if let Some(v) = vote {
            if v.index() >= poll.m() {
                return Err(Error::invalid(format!(
                    "vote {} out of range for {} candidates",
                    v.rank(),
                    poll.m()
                )));
            }
        }
        Ok(Round {
            utilities,
            poll,
            vote,
        })
    }

    pub fn m(&self) -> usize {
        self.poll.m()
    }
}

/// Non-empty set of tied winners.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WinnerSet(Vec<Candidate>);

impl WinnerSet {
    pub fn new(mut winners: Vec<Candidate>) -> Result<Self> {
        if winners.is_empty() {
            return Err(Error::invalid("winner set is empty"));
        }
        winners.sort();
        winners.dedup();
        Ok(WinnerSet(winners))
    }

    /// The argmax set of a final score vector.
    pub fn from_scores(scores: &[u64]) -> Self {
        let top = scores.iter().copied().max().unwrap_or(0);
        WinnerSet(
            scores
                .iter()
                .enumerate()
                .filter(|(_, &s)| s == top)
                .map(|(i, _)| Candidate::new(i))
                .collect(),
        )
    }

    pub fn as_slice(&self) -> &[Candidate] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, c: Candidate) -> bool {
        self.0.binary_search(&c).is_ok()
    }
}

pub(crate) fn candidates(m: usize) -> impl Iterator<Item = Candidate> {
    (0..m).map(Candidate::new)
}

/// Utility of a (possibly tied) outcome: the mean utility of the winners.
pub fn tie_split_utility(u: &Utilities, winners: &WinnerSet) -> Result<f64> {
    if winners.is_empty() {
        return Err(Error::invalid("winner set is empty"));
    }
    if let Some(c) = winners.as_slice().iter().find(|c| c.index() >= u.m()) {
        return Err(Error::invalid(format!("{c} out of range for {} candidates", u.m())));
    }
    let total: f64 = winners.as_slice().iter().map(|&c| u.of(c)).sum();
    Ok(total / winners.len() as f64)
}

/// Highest utility wins; equal utilities go to the lower index.
pub fn canonical_tiebreak(set: &[Candidate], u: &Utilities) -> Result<Candidate> {
    best_by_utility(set.iter().copied(), u).ok_or_else(|| Error::invalid("empty candidate set"))
}

fn best_by_utility(set: impl IntoIterator<Item = Candidate>, u: &Utilities) -> Option<Candidate> {
    set.into_iter().fold(None, |best, c| match best {
        None => Some(c),
        Some(b) if u.of(c) > u.of(b) || (u.of(c) == u.of(b) && c < b) => Some(c),
        keep => keep,
    })
}

/// Lowest utility; equal utilities go to the higher index.
fn worst_by_utility(set: &[Candidate], u: &Utilities) -> Option<Candidate> {
    set.iter().copied().fold(None, |worst, c| match worst {
        None => Some(c),
        Some(w) if u.of(c) < u.of(w) || (u.of(c) == u.of(w) && c > w) => Some(c),
        keep => keep,
    })
}

/// Argmax of `scores` with canonical tiebreak. Scores within `tol` of the maximum
/// count as tied. Returns `None` when every score is `-inf`.
pub(crate) fn argmax_scores(scores: &[f64], u: &Utilities, tol: f64) -> Option<Candidate> {
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return None;
    }
    best_by_utility(
        scores
            .iter()
            .enumerate()
            .filter(|(_, &s)| s >= top - tol)
            .map(|(i, _)| Candidate::new(i)),
        u,
    )
}

pub fn truth_decide(u: &Utilities) -> Candidate {
    best_by_utility(candidates(u.m()), u).expect("at least two candidates")
}

/// k-pragmatist: the favourite among the `k` highest-scored candidates.
pub fn kp_decide(u: &Utilities, s: &Poll, k: usize) -> Result<Candidate> {
    if k == 0 || k > s.m() {
        return Err(Error::invalid(format!(
            "k = {k} out of range for {} candidates",
            s.m()
        )));
    }
    let top = &s.ranking()[..k];
    Ok(best_by_utility(top.iter().copied(), u).expect("k >= 1"))
}

/// Attainability of a candidate with normalized poll share `share`:
/// `atan(beta * (share - 1/m)) / pi + 1/2`.
pub fn attainability(share: f64, beta: f64, m: usize) -> f64 {
    (beta * (share - 1.0 / m as f64)).atan() / std::f64::consts::PI + 0.5
}

/// Attainability choice: argmax of `A(c) * u(c)`. Non-positive utilities are
/// never chosen; if no candidate has positive utility the vote is truthful.
pub fn at_decide(u: &Utilities, s: &Poll, beta: f64) -> Candidate {
    let scores: Vec<f64> = candidates(s.m())
        .map(|c| {
            let uc = u.of(c);
            if uc > 0.0 {
                attainability(s.share(c), beta, s.m()) * uc
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    argmax_scores(&scores, u, 0.0).unwrap_or_else(|| truth_decide(u))
}

/// Attainability-utility: argmax of `(eps + u)^alpha * A^(2 - alpha)`.
///
/// Compared in log space. Candidates with `eps + u <= 0` are excluded; if all
/// are, the vote is truthful.
pub fn au_decide(u: &Utilities, s: &Poll, alpha: f64, beta: f64, eps: f64) -> Candidate {
    let scores: Vec<f64> = candidates(s.m())
        .map(|c| {
            let shifted = eps + u.of(c);
            if shifted <= 0.0 {
                return f64::NEG_INFINITY;
            }
            let att = attainability(s.share(c), beta, s.m());
            let util_term = if alpha == 0.0 { 0.0 } else { alpha * shifted.ln() };
            let att_term = if alpha == 2.0 { 0.0 } else { (2.0 - alpha) * att.ln() };
            util_term + att_term
        })
        .collect();
    argmax_scores(&scores, u, 0.0).unwrap_or_else(|| truth_decide(u))
}

/// Candidates whose score is at least `max(s) - 2 r n`.
pub fn possible_winners(s: &Poll, r: f64) -> Vec<Candidate> {
    let top = s.as_slice().iter().copied().max().unwrap_or(0) as f64;
    let threshold = top - 2.0 * r * s.total() as f64;
    candidates(s.m())
        .filter(|&c| s.score(c) as f64 >= threshold)
        .collect()
}

/// Local dominance: with several possible winners, the favourite among them
/// after dropping the least preferred one; with a single possible winner, truthful.
pub fn ld_decide(u: &Utilities, s: &Poll, r: f64) -> Candidate {
    let pw = possible_winners(s, r);
    if pw.len() < 2 {
        return truth_decide(u);
    }
    let worst = worst_by_utility(&pw, u).expect("non-empty");
    best_by_utility(pw.into_iter().filter(|&c| c != worst), u).expect("|PW| >= 2")
}

/// Local dominance with leader bias: votes for the poll leader when it is the
/// only possible winner, otherwise identical to [`ld_decide`].
pub fn ldlb_decide(u: &Utilities, s: &Poll, r: f64) -> Candidate {
    if possible_winners(s, r).len() == 1 {
        s.leader()
    } else {
        ld_decide(u, s, r)
    }
}

/// Model family tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Family {
    Truth,
    Kp,
    Cv,
    Ld,
    Ldlb,
    At,
    Au,
    AuEps,
    FreqBaseline,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::Truth,
        Family::Kp,
        Family::Cv,
        Family::Ld,
        Family::Ldlb,
        Family::At,
        Family::Au,
        Family::AuEps,
        Family::FreqBaseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Truth => "TRUTH",
            Family::Kp => "KP",
            Family::Cv => "CV",
            Family::Ld => "LD",
            Family::Ldlb => "LDLB",
            Family::At => "AT",
            Family::Au => "AU",
            Family::AuEps => "AU_EPS",
            Family::FreqBaseline => "FREQ_BASELINE",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase().replace('-', "_");
        match upper.as_str() {
            "FREQ" => return Ok(Family::FreqBaseline),
            "AUEPS" => return Ok(Family::AuEps),
            _ => {}
        }
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name() == upper)
            .ok_or_else(|| Error::invalid(format!("unknown model family '{s}'")))
    }
}

/// A model family together with its parameter values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelSpec {
    Truth,
    Kp { k: usize },
    Cv { eta: u64 },
    Ld { r: f64 },
    Ldlb { r: f64 },
    At { beta: f64 },
    Au { alpha: f64, beta: f64, eps: f64 },
    AuEps { alpha: f64, beta: f64, eps: f64 },
    FreqBaseline,
}

impl ModelSpec {
    pub fn family(&self) -> Family {
        match self {
            ModelSpec::Truth => Family::Truth,
            ModelSpec::Kp { .. } => Family::Kp,
            ModelSpec::Cv { .. } => Family::Cv,
            ModelSpec::Ld { .. } => Family::Ld,
            ModelSpec::Ldlb { .. } => Family::Ldlb,
            ModelSpec::At { .. } => Family::At,
            ModelSpec::Au { .. } => Family::Au,
            ModelSpec::AuEps { .. } => Family::AuEps,
            ModelSpec::FreqBaseline => Family::FreqBaseline,
        }
    }

    /// Checks parameter ranges that do not depend on the round.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(format!("{self}: {msg}")));
        match *self {
            ModelSpec::Kp { k: 0 } => bad("k must be at least 1".into()),
            ModelSpec::Cv { eta: 0 } => bad("eta must be at least 1".into()),
            ModelSpec::Ld { r } | ModelSpec::Ldlb { r } if !(r >= 0.0 && r.is_finite()) => {
                bad(format!("r = {r} must be finite and >= 0"))
            }
            ModelSpec::At { beta } if !(beta > 0.0 && beta.is_finite()) => {
                bad(format!("beta = {beta} must be positive"))
            }
            ModelSpec::Au { alpha, beta, eps } | ModelSpec::AuEps { alpha, beta, eps } => {
                if !(0.0..=2.0).contains(&alpha) {
                    bad(format!("alpha = {alpha} must lie in [0, 2]"))
                } else if !(beta > 0.0 && beta.is_finite()) {
                    bad(format!("beta = {beta} must be positive"))
                } else if !(eps > 0.0 && eps.is_finite()) {
                    bad(format!("eps = {eps} must be positive"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// [`validate`](Self::validate) plus the checks that need the number of candidates.
    pub fn validate_for(&self, m: usize) -> Result<()> {
        self.validate()?;
        match *self {
            ModelSpec::Kp { k } if k > m => Err(Error::invalid(format!(
                "k = {k} exceeds the {m} candidates"
            ))),
            _ => Ok(()),
        }
    }

    /// Builds a spec from a family and `name=value` parameters.
    pub fn from_params(family: Family, params: &[(String, f64)]) -> Result<Self> {
        let get = |name: &str| -> Result<f64> {
            params
                .iter()
                .find(|(k, _)| k.eq_ignore_ascii_case(name))
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::invalid(format!("{family} needs parameter '{name}'")))
        };
        let allowed: &[&str] = match family {
            Family::Truth | Family::FreqBaseline => &[],
            Family::Kp => &["k"],
            Family::Cv => &["eta"],
            Family::Ld | Family::Ldlb => &["r"],
            Family::At => &["beta"],
            Family::Au | Family::AuEps => &["alpha", "beta", "eps"],
        };
        if let Some((k, _)) = params
            .iter()
            .find(|(k, _)| !allowed.iter().any(|a| a.eq_ignore_ascii_case(k)))
        {
            return Err(Error::invalid(format!("{family} takes no parameter '{k}'")));
        }
        let whole = |name: &str| -> Result<u64> {
            let v = get(name)?;
            if v < 0.0 || v.fract() != 0.0 {
                return Err(Error::invalid(format!("{name} must be a non-negative integer")));
            }
            Ok(v as u64)
        };
        let spec = match family {
            Family::Truth => ModelSpec::Truth,
            Family::FreqBaseline => ModelSpec::FreqBaseline,
            Family::Kp => ModelSpec::Kp { k: whole("k")? as usize },
            Family::Cv => ModelSpec::Cv { eta: whole("eta")? },
            Family::Ld => ModelSpec::Ld { r: get("r")? },
            Family::Ldlb => ModelSpec::Ldlb { r: get("r")? },
            Family::At => ModelSpec::At { beta: get("beta")? },
            Family::Au => ModelSpec::Au {
                alpha: get("alpha")?,
                beta: get("beta")?,
                eps: get("eps")?,
            },
            Family::AuEps => ModelSpec::AuEps {
                alpha: get("alpha")?,
                beta: get("beta")?,
                eps: get("eps")?,
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Truth => write!(f, "TRUTH"),
            ModelSpec::Kp { k } => write!(f, "KP(k={k})"),
            ModelSpec::Cv { eta } => write!(f, "CV(eta={eta})"),
            ModelSpec::Ld { r } => write!(f, "LD(r={r})"),
            ModelSpec::Ldlb { r } => write!(f, "LDLB(r={r})"),
            ModelSpec::At { beta } => write!(f, "AT(beta={beta})"),
            ModelSpec::Au { alpha, beta, eps } => {
                write!(f, "AU(alpha={alpha},beta={beta},eps={eps})")
            }
            ModelSpec::AuEps { alpha, beta, eps } => {
                write!(f, "AU_EPS(alpha={alpha},beta={beta},eps={eps})")
            }
            ModelSpec::FreqBaseline => write!(f, "FREQ_BASELINE"),
        }
    }
}

/// Applies a decision model to a round. The observed vote is ignored.
pub fn decide(spec: &ModelSpec, round: &Round) -> Result<Candidate> {
    spec.validate()?;
    let (u, s) = (&round.utilities, &round.poll);
    Ok(match *spec {
        ModelSpec::Truth => truth_decide(u),
        ModelSpec::Kp { k } => kp_decide(u, s, k)?,
        ModelSpec::Cv { eta } => pivot::cv_decide(u, s, eta)?,
        ModelSpec::Ld { r } => ld_decide(u, s, r),
        ModelSpec::Ldlb { r } => ldlb_decide(u, s, r),
        ModelSpec::At { beta } => at_decide(u, s, beta),
        ModelSpec::Au { alpha, beta, eps } | ModelSpec::AuEps { alpha, beta, eps } => {
            au_decide(u, s, alpha, beta, eps)
        }
        ModelSpec::FreqBaseline => {
            return Err(Error::invalid(
                "FREQ_BASELINE is fitted from a voter's history and has no per-round rule",
            ))
        }
    })
}
