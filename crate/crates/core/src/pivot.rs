//! Calculus of voting under a multinomial belief induced by the poll.
//!
//! The other voters' ballots are modelled as `eta` i.i.d. draws with
//! probabilities `s(c) / n`. When the number of possible score vectors is
//! small enough the expected utility of each vote is computed exactly by
//! enumerating them. Otherwise the classic pivot-probability gain
//! `sum_{c' != c} P(c', c) (u(c) - u(c'))` is evaluated with pairwise pivot
//! probabilities kept in log space, so that beliefs over tens of thousands of
//! voters still produce a well-defined argmax.

use crate::error::{Error, Result};
use crate::model::{argmax_scores, candidates, truth_decide, Candidate, Poll, Utilities};

/// Largest multinomial support (number of compositions of `eta` into `m`
/// parts) that is enumerated exactly.
pub const EXACT_SUPPORT_CAP: u128 = 2_000_000;

/// Multinomial belief over the scores of `eta` other voters.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotBelief {
    eta: u64,
    p: Vec<f64>,
}

impl PivotBelief {
    pub fn new(eta: u64, p: Vec<f64>) -> Result<Self> {
        if p.len() < 2 {
            return Err(Error::invalid("belief needs at least 2 candidates"));
        }
        if p.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::invalid("probabilities must be finite and non-negative"));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(PivotBelief { eta, p })
    }

    /// Belief with vote probabilities `s(c) / n`.
    pub fn from_poll(s: &Poll, eta: u64) -> Self {
        let n = s.total() as f64;
        PivotBelief {
            eta,
            p: s.as_slice().iter().map(|&x| x as f64 / n).collect(),
        }
    }

    pub fn eta(&self) -> u64 {
        self.eta
    }

    pub fn m(&self) -> usize {
        self.p.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    /// `C(eta + m - 1, m - 1)`, saturating at `u128::MAX`.
    pub fn support_size(&self) -> u128 {
        compositions(self.eta, self.m())
    }
}

/// Number of compositions of `total` into `parts` non-negative parts.
pub fn compositions(total: u64, parts: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 1..parts as u128 {
        // acc = C(total + i - 1, i - 1) here, so acc * (total + i) / i is exact.
        match acc.checked_mul(total as u128 + i) {
            Some(v) => acc = v / i,
            None => return u128::MAX,
        }
    }
    acc
}

struct LnFactorial(Vec<f64>);

impl LnFactorial {
    fn up_to(n: u64) -> Self {
        let mut table = Vec::with_capacity(n as usize + 1);
        let mut acc = 0.0;
        table.push(0.0);
        for k in 1..=n {
            acc += (k as f64).ln();
            table.push(acc);
        }
        LnFactorial(table)
    }

    fn get(&self, k: u64) -> f64 {
        self.0[k as usize]
    }
}

/// `k * ln p`, with `0 * ln 0 = 0`.
fn count_log(k: u64, ln_p: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * ln_p
    }
}

/// Streaming log-sum-exp.
#[derive(Debug, Clone, Copy)]
struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl LogSumExp {
    fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.scaled += (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

fn check_m(u: &Utilities, belief: &PivotBelief) -> Result<()> {
    if u.m() != belief.m() {
        return Err(Error::invalid(format!(
            "utilities have {} candidates but the belief has {}",
            u.m(),
            belief.m()
        )));
    }
    Ok(())
}

/// Exact expected utility of every possible vote.
///
/// Entry `c` is `E[u(W(t + e_c))]` for `t ~ Multinomial(eta, p)`, where `W`
/// is the (tie-split) set of plurality winners.
pub fn exact_expected_utilities(u: &Utilities, belief: &PivotBelief) -> Result<Vec<f64>> {
    check_m(u, belief)?;
    let support = belief.support_size();
    if support > EXACT_SUPPORT_CAP {
        return Err(Error::Unsupported(format!(
            "multinomial support {support} exceeds the exact cap {EXACT_SUPPORT_CAP}"
        )));
    }
    let mut acc = vec![0.0; belief.m()];
    Enumerator::new(belief).walk(&mut |scores, log_prob| {
        let w = log_prob.exp();
        if w == 0.0 {
            return;
        }
        let (top, tied, sum) = leaders(u.as_slice(), scores);
        for (c, slot) in acc.iter_mut().enumerate() {
            *slot += w * vote_value(u.as_slice(), scores, c, top, tied, sum);
        }
    });
    Ok(acc)
}

/// Exact expected gain of every vote over abstaining,
/// `E[u(W(t + e_c))] - E[u(W(t))]`, divided by a common positive constant.
///
/// Only score vectors where the vote changes the winner set contribute; their
/// positive and negative parts are summed in log space, so gains whose
/// probabilities lie far below `f64` resolution relative to the utilities
/// (large `eta`, lopsided polls) keep their order.
pub fn exact_gains(u: &Utilities, belief: &PivotBelief) -> Result<Vec<f64>> {
    check_m(u, belief)?;
    let support = belief.support_size();
    if support > EXACT_SUPPORT_CAP {
        return Err(Error::Unsupported(format!(
            "multinomial support {support} exceeds the exact cap {EXACT_SUPPORT_CAP}"
        )));
    }
    let m = belief.m();
    let mut pos = vec![LogSumExp::new(); m];
    let mut neg = vec![LogSumExp::new(); m];
    Enumerator::new(belief).walk(&mut |scores, log_prob| {
        let (top, tied, sum) = leaders(u.as_slice(), scores);
        let base = sum / tied as f64;
        for c in 0..m {
            if scores[c] + 1 < top {
                continue;
            }
            let delta = vote_value(u.as_slice(), scores, c, top, tied, sum) - base;
            if delta > 0.0 {
                pos[c].add(log_prob + delta.ln());
            } else if delta < 0.0 {
                neg[c].add(log_prob + (-delta).ln());
            }
        }
    });
    let scale = pos
        .iter()
        .chain(&neg)
        .map(LogSumExp::value)
        .fold(f64::NEG_INFINITY, f64::max);
    if scale == f64::NEG_INFINITY {
        return Ok(vec![0.0; m]);
    }
    Ok((0..m)
        .map(|c| (pos[c].value() - scale).exp() - (neg[c].value() - scale).exp())
        .collect())
}

/// Top score, number of candidates at it, and the sum of their utilities.
fn leaders(u: &[f64], scores: &[u64]) -> (u64, usize, f64) {
    let top = scores.iter().copied().max().unwrap_or(0);
    let (mut tied, mut sum) = (0usize, 0.0);
    for (i, &s) in scores.iter().enumerate() {
        if s == top {
            tied += 1;
            sum += u[i];
        }
    }
    (top, tied, sum)
}

/// Tie-split utility after adding one vote for `c` to `scores`.
fn vote_value(u: &[f64], scores: &[u64], c: usize, top: u64, tied: usize, sum: f64) -> f64 {
    if scores[c] == top {
        u[c]
    } else if scores[c] + 1 == top {
        (sum + u[c]) / (tied + 1) as f64
    } else {
        sum / tied as f64
    }
}

/// Exact expected utility of voting for `c`.
pub fn exact_expected_utility(u: &Utilities, belief: &PivotBelief, c: Candidate) -> Result<f64> {
    if c.index() >= belief.m() {
        return Err(Error::invalid(format!("{c} out of range")));
    }
    Ok(exact_expected_utilities(u, belief)?[c.index()])
}

/// Walks every composition of `eta` into `m` parts with its multinomial log probability.
struct Enumerator {
    ln_p: Vec<f64>,
    zero: Vec<bool>,
    lnf: LnFactorial,
    eta: u64,
}

impl Enumerator {
    fn new(belief: &PivotBelief) -> Self {
        Enumerator {
            ln_p: belief.p.iter().map(|p| p.ln()).collect(),
            zero: belief.p.iter().map(|&p| p == 0.0).collect(),
            lnf: LnFactorial::up_to(belief.eta),
            eta: belief.eta,
        }
    }

    fn walk(&self, visit: &mut dyn FnMut(&[u64], f64)) {
        let mut scores = vec![0u64; self.ln_p.len()];
        self.step(0, self.eta, 0.0, &mut scores, visit);
    }

    fn step(&self, pos: usize, remaining: u64, log_w: f64, scores: &mut [u64], visit: &mut dyn FnMut(&[u64], f64)) {
        let last = scores.len() - 1;
        if pos == last {
            if self.zero[pos] && remaining > 0 {
                return;
            }
            scores[pos] = remaining;
            let lw = log_w + count_log(remaining, self.ln_p[pos]) - self.lnf.get(remaining);
            visit(scores, self.lnf.get(self.eta) + lw);
            return;
        }
        let max_here = if self.zero[pos] { 0 } else { remaining };
        for k in 0..=max_here {
            scores[pos] = k;
            let lw = log_w + count_log(k, self.ln_p[pos]) - self.lnf.get(k);
            self.step(pos + 1, remaining - k, lw, scores, visit);
        }
        scores[pos] = 0;
    }
}

/// Log of the conditional probability that a candidate carrying fraction `q`
/// of the `rest` leftover ballots ends with at most `bound` of them. Uses the
/// Chernoff bound `-rest * KL(bound/rest || q)` below the mean and 0 above it;
/// exact when `q` is 0 or 1.
fn rest_log_cdf(rest: u64, q: f64, bound: u64) -> f64 {
    let mean = rest as f64 * q;
    if bound as f64 >= mean {
        return 0.0;
    }
    let f = bound as f64 / rest as f64;
    let kl = rel_entropy_term(f, q) + rel_entropy_term(1.0 - f, 1.0 - q);
    -(rest as f64) * kl
}

fn rel_entropy_term(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else if b <= 0.0 {
        f64::INFINITY
    } else {
        a * (a / b).ln()
    }
}

/// Log probability that a vote for `y` is pivotal against `x`.
///
/// Sums, in log space, over the trinomial `(t(x), t(y), rest)` the event
/// that `x` leads and `y` trails it by at most one vote, weighting each term
/// by the (approximate) probability that every other candidate stays at or
/// below `t(y)`. Each other candidate's count given the leftover ballots is
/// binomial; its tail enters through [`rest_log_cdf`], which makes the sum
/// exact for three candidates.
pub fn pairwise_pivot_logprob(belief: &PivotBelief, x: Candidate, y: Candidate) -> Result<f64> {
    let m = belief.m();
    if x == y {
        return Err(Error::invalid("pivot pair needs two distinct candidates"));
    }
    if x.index() >= m || y.index() >= m {
        return Err(Error::invalid("candidate out of range"));
    }
    Ok(pair_logprob(belief, x.index(), y.index(), &LnFactorial::up_to(belief.eta)))
}

fn pair_logprob(belief: &PivotBelief, x: usize, y: usize, lnf: &LnFactorial) -> f64 {
    let eta = belief.eta;
    let p = &belief.p;
    let others: Vec<f64> = (0..p.len())
        .filter(|&i| i != x && i != y)
        .map(|i| p[i])
        .collect();
    let p_rest: f64 = others.iter().sum();
    let cond: Vec<f64> = others
        .iter()
        .map(|&pz| if p_rest > 0.0 { pz / p_rest } else { 0.0 })
        .collect();
    let (ln_px, ln_py, ln_pr) = (p[x].ln(), p[y].ln(), p_rest.ln());

    let mut lse = LogSumExp::new();
    for tx in 0..=eta {
        for ty in [tx.checked_sub(1), Some(tx)].into_iter().flatten() {
            if tx + ty > eta {
                continue;
            }
            let rest = eta - tx - ty;
            let base = lnf.get(eta) - lnf.get(tx) - lnf.get(ty) - lnf.get(rest)
                + count_log(tx, ln_px)
                + count_log(ty, ln_py)
                + count_log(rest, ln_pr);
            if base.is_nan() || base == f64::NEG_INFINITY {
                continue;
            }
            let penalty: f64 = if rest == 0 {
                0.0
            } else {
                cond.iter().map(|&q| rest_log_cdf(rest, q, ty)).sum()
            };
            lse.add(base + penalty);
        }
    }
    lse.value()
}

/// Log pivot probabilities for every ordered pair; entry `(x, y)` is
/// `log P(x, y)`, the diagonal is `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotTable {
    log_p: Vec<Vec<f64>>,
}

impl PivotTable {
    pub fn new(belief: &PivotBelief) -> Self {
        let m = belief.m();
        let lnf = LnFactorial::up_to(belief.eta);
        let log_p = (0..m)
            .map(|x| {
                (0..m)
                    .map(|y| {
                        if x == y {
                            f64::NEG_INFINITY
                        } else {
                            pair_logprob(belief, x, y, &lnf)
                        }
                    })
                    .collect()
            })
            .collect();
        PivotTable { log_p }
    }

    pub fn get(&self, x: Candidate, y: Candidate) -> f64 {
        self.log_p[x.index()][y.index()]
    }

    /// Largest off-diagonal entry.
    pub fn max_log(&self) -> f64 {
        self.log_p
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Pivot-probability gains of each vote, rescaled by the largest pair
/// probability so that relative magnitudes survive underflow.
pub fn cv_gains(u: &Utilities, belief: &PivotBelief) -> Result<Vec<f64>> {
    check_m(u, belief)?;
    let table = PivotTable::new(belief);
    let top = table.max_log();
    let m = belief.m();
    if top == f64::NEG_INFINITY {
        return Ok(vec![0.0; m]);
    }
    Ok(candidates(m)
        .map(|c| {
            candidates(m)
                .filter(|&other| other != c)
                .map(|other| (table.get(other, c) - top).exp() * (u.of(c) - u.of(other)))
                .sum()
        })
        .collect())
}

/// Gains within `1e-9` of the largest gain magnitude count as tied.
fn tie_tolerance(gains: &[f64]) -> f64 {
    1e-9 * gains.iter().fold(0.0f64, |a, g| a.max(g.abs()))
}

/// Calculus-of-voting vote via exact enumeration (errors above the support cap).
pub fn cv_decide_exact(u: &Utilities, s: &Poll, eta: u64) -> Result<Candidate> {
    let gains = exact_gains(u, &PivotBelief::from_poll(s, eta))?;
    Ok(argmax_scores(&gains, u, tie_tolerance(&gains)).unwrap_or_else(|| truth_decide(u)))
}

/// Calculus-of-voting vote via the pairwise pivot approximation.
pub fn cv_decide_approx(u: &Utilities, s: &Poll, eta: u64) -> Result<Candidate> {
    let gains = cv_gains(u, &PivotBelief::from_poll(s, eta))?;
    Ok(argmax_scores(&gains, u, tie_tolerance(&gains)).unwrap_or_else(|| truth_decide(u)))
}

/// Calculus-of-voting vote: exact expected-utility maximization when the
/// support is at most [`EXACT_SUPPORT_CAP`], the pivot approximation otherwise.
/// Gains within `1e-9` of the largest gain magnitude count as tied.
pub fn cv_decide(u: &Utilities, s: &Poll, eta: u64) -> Result<Candidate> {
    if eta == 0 {
        return Err(Error::invalid("eta must be at least 1"));
    }
    if compositions(eta, s.m()) <= EXACT_SUPPORT_CAP {
        cv_decide_exact(u, s, eta)
    } else {
        cv_decide_approx(u, s, eta)
    }
}
