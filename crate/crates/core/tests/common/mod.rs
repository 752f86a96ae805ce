//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use pollvote::{Candidate, Poll, Round, Utilities};
use rand::Rng;

pub fn q(rank: usize) -> Candidate {
    Candidate::from_rank(rank).unwrap()
}

/// The five-candidate worked example: u = (40,30,20,10,0), s = (25,70,20,100,80).
pub fn fig1() -> Round {
    Round::new(
        Utilities::new(vec![40.0, 30.0, 20.0, 10.0, 0.0]).unwrap(),
        Poll::new(vec![25, 70, 20, 100, 80]).unwrap(),
        None,
    )
    .unwrap()
}

/// Random non-increasing utilities with `u1 > um`, integer-valued in `lo..=hi`.
pub fn random_utilities<R: Rng>(rng: &mut R, m: usize, lo: i32, hi: i32) -> Utilities {
    loop {
        let mut u: Vec<f64> = (0..m).map(|_| rng.random_range(lo..=hi) as f64).collect();
        u.sort_by(|a, b| b.partial_cmp(a).unwrap());
        if u[0] > u[m - 1] {
            return Utilities::new(u).unwrap();
        }
    }
}

/// Random poll with every score in `0..=max` and a positive total.
pub fn random_poll<R: Rng>(rng: &mut R, m: usize, max: u64) -> Poll {
    loop {
        let s: Vec<u64> = (0..m).map(|_| rng.random_range(0..=max)).collect();
        if s.iter().sum::<u64>() > 0 {
            return Poll::new(s).unwrap();
        }
    }
}

fn tie_split(u: &[f64], scores: &[u64]) -> f64 {
    let top = *scores.iter().max().unwrap();
    let winners: Vec<usize> = (0..u.len()).filter(|&c| scores[c] == top).collect();
    winners.iter().map(|&c| u[c]).sum::<f64>() / winners.len() as f64
}

/// Calls `visit(counts, probability)` for each of the `m^eta` sequences of the
/// other voters' ballots. Independent of the library's composition walk.
fn for_each_sequence(p: &[f64], eta: u32, mut visit: impl FnMut(&[u64], f64)) {
    let m = p.len();
    let mut seq = vec![0usize; eta as usize];
    loop {
        let prob: f64 = seq.iter().map(|&c| p[c]).product();
        if prob > 0.0 {
            let mut counts = vec![0u64; m];
            for &c in &seq {
                counts[c] += 1;
            }
            visit(&counts, prob);
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == seq.len() {
                return;
            }
            seq[i] += 1;
            if seq[i] < m {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
    }
}

/// Expected tie-split utility of every vote.
pub fn brute_force_eu(u: &[f64], p: &[f64], eta: u32) -> Vec<f64> {
    let mut eu = vec![0.0; u.len()];
    for_each_sequence(p, eta, |counts, prob| {
        for (own, slot) in eu.iter_mut().enumerate() {
            let mut fin = counts.to_vec();
            fin[own] += 1;
            *slot += prob * tie_split(u, &fin);
        }
    });
    eu
}

/// Expected gain of every vote over abstaining, summed term by term so that
/// tiny differences are not swamped by the utilities themselves.
pub fn brute_force_gains(u: &[f64], p: &[f64], eta: u32) -> Vec<f64> {
    let mut gains = vec![0.0; u.len()];
    for_each_sequence(p, eta, |counts, prob| {
        let base = tie_split(u, counts);
        for (own, slot) in gains.iter_mut().enumerate() {
            let mut fin = counts.to_vec();
            fin[own] += 1;
            *slot += prob * (tie_split(u, &fin) - base);
        }
    });
    gains
}

/// Argmax with values within `1e-9` of the largest magnitude treated as tied,
/// ties to the higher utility and then the lower index.
pub fn oracle_argmax(values: &[f64], u: &[f64]) -> usize {
    let tol = 1e-9 * values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (0..values.len())
        .filter(|&c| values[c] >= best - tol)
        .fold(None, |acc: Option<usize>, c| match acc {
            Some(b) if u[b] >= u[c] => Some(b),
            _ => Some(c),
        })
        .unwrap()
}
