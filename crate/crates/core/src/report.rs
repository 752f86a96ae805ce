//! Plot-ready CSV tables rendered from a [`FitReport`].

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fitting::FitReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    Overall,
    PollType,
    Rounds,
    BestModel,
    Dominated,
}

impl ReportKind {
    pub const ALL: [ReportKind; 5] = [
        ReportKind::Overall,
        ReportKind::PollType,
        ReportKind::Rounds,
        ReportKind::BestModel,
        ReportKind::Dominated,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReportKind::Overall => "overall",
            ReportKind::PollType => "polltype",
            ReportKind::Rounds => "rounds",
            ReportKind::BestModel => "bestmodel",
            ReportKind::Dominated => "dominated",
        }
    }

    /// File name used when `evaluate` writes the table.
    pub fn file_name(self) -> String {
        format!("{}.csv", self.name())
    }
}

impl fmt::Display for ReportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReportKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ReportKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown report kind {s:?}")))
    }
}

fn num(x: f64) -> String {
    format!("{x:.6}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn to_csv(header: Vec<String>, rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::invalid(format!("csv: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn family_header(first: &[&str], report: &FitReport) -> Vec<String> {
    first
        .iter()
        .map(|s| s.to_string())
        .chain(report.families.iter().map(|f| f.name().to_string()))
        .collect()
}

/// Renders one table. Tables built from aggregates are header-only when the
/// report has none; the poll-type table needs a three-candidate dataset.
pub fn render(report: &FitReport, kind: ReportKind) -> Result<String> {
    match kind {
        ReportKind::Overall => {
            let header = ["family", "voters", "mean_error", "std_dev", "err_bar"];
            let rows = report
                .aggregate
                .iter()
                .flat_map(|a| &a.overall)
                .map(|r| {
                    vec![
                        r.family.name().to_string(),
                        r.voters.to_string(),
                        num(r.mean_error),
                        num(r.std_dev),
                        num(r.err_bar),
                    ]
                })
                .collect();
            to_csv(header.map(String::from).to_vec(), rows)
        }
        ReportKind::PollType => {
            if report.m != 3 {
                return Err(Error::Unsupported(format!(
                    "poll-type table needs 3 candidates, report has {}",
                    report.m
                )));
            }
            let header = family_header(&["poll_type", "rounds"], report);
            let mut rows = Vec::new();
            if let Some(a) = &report.aggregate {
                let per_family = crate::data::PollType::TABLE_ORDER.len();
                for (i, t) in crate::data::PollType::TABLE_ORDER.iter().enumerate() {
                    let mut row = vec![t.name().to_string(), a.poll_type[i].rounds.to_string()];
                    for fi in 0..report.families.len() {
                        row.push(opt(a.poll_type[fi * per_family + i].error));
                    }
                    rows.push(row);
                }
            }
            to_csv(header, rows)
        }
        ReportKind::Rounds => {
            let header = family_header(&["rounds_played", "voters"], report);
            let mut rows: Vec<Vec<String>> = Vec::new();
            if let Some(a) = &report.aggregate {
                let mut buckets: Vec<(usize, usize)> = a
                    .rounds
                    .iter()
                    .map(|r| (r.rounds_played, r.voters))
                    .collect();
                buckets.sort_unstable();
                buckets.dedup();
                for (played, voters) in buckets {
                    let mut row = vec![played.to_string(), voters.to_string()];
                    for f in &report.families {
                        let cell = a
                            .rounds
                            .iter()
                            .find(|r| r.family == *f && r.rounds_played == played)
                            .map(|r| num(r.mean_error))
                            .unwrap_or_default();
                        row.push(cell);
                    }
                    rows.push(row);
                }
            }
            to_csv(header, rows)
        }
        ReportKind::BestModel => {
            let rows = report
                .aggregate
                .iter()
                .flat_map(|a| &a.best_model)
                .map(|r| vec![r.family.name().to_string(), num(r.voters)])
                .collect();
            to_csv(vec!["family".into(), "voters".into()], rows)
        }
        ReportKind::Dominated => {
            let rows = report
                .dominated
                .iter()
                .map(|d| vec![d.voter_id.clone(), d.rounds.to_string(), d.dominated.to_string()])
                .collect();
            to_csv(vec!["voter_id".into(), "rounds".into(), "dominated".into()], rows)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::{evaluate_all, GridOverrides};
    use crate::model::{Family, ModelSpec};
    use crate::simulate::{generate_dataset, PollGenConfig, PollScheme, PopulationComponent, PopulationSpec};

    fn report(families: &[Family]) -> FitReport {
        let pop = PopulationSpec {
            components: vec![
                PopulationComponent { spec: ModelSpec::Truth, weight: 1.0, tremble: 0.0 },
                PopulationComponent { spec: ModelSpec::Kp { k: 2 }, weight: 1.0, tremble: 0.2 },
            ],
            rounds_per_voter: 12,
            num_voters: 6,
            utilities: None,
        };
        let pollgen = PollGenConfig { m: 3, n: 200, scheme: PollScheme::UniformOrderings { min_gap: 1 }, seed: 4 };
        let (ds, _) = generate_dataset("T", &pop, &pollgen, 4).unwrap();
        evaluate_all(&ds, families, &GridOverrides::new(), 10).unwrap()
    }

    #[test]
    fn kinds_parse() {
        for k in ReportKind::ALL {
            assert_eq!(k.name().parse::<ReportKind>().unwrap(), k);
        }
        assert!("bogus".parse::<ReportKind>().is_err());
    }

    #[test]
    fn tables_have_expected_shape() {
        let r = report(&[Family::Truth, Family::Kp, Family::FreqBaseline]);
        let poll = render(&r, ReportKind::PollType).unwrap();
        let lines: Vec<&str> = poll.lines().collect();
        assert_eq!(lines[0], "poll_type,rounds,TRUTH,KP,FREQ_BASELINE");
        assert_eq!(lines.len(), 7);
        assert!(lines[1].starts_with("Q1_Q2_Q3,"));
        assert!(lines[6].starts_with("Q3_Q2_Q1,"));

        let best = render(&r, ReportKind::BestModel).unwrap();
        let total: f64 = best.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
        assert!((total - 6.0).abs() < 1e-5);

        let dom = render(&r, ReportKind::Dominated).unwrap();
        assert_eq!(dom.lines().count(), 7);
        assert_eq!(render(&r, ReportKind::Overall).unwrap().lines().count(), 4);
        assert_eq!(render(&r, ReportKind::Rounds).unwrap().lines().count(), 2);
    }

    #[test]
    fn empty_family_list_gives_header_only() {
        let r = report(&[]);
        assert!(r.aggregate.is_none());
        assert!(!r.notes.is_empty());
        assert_eq!(render(&r, ReportKind::Overall).unwrap().lines().count(), 1);
        assert_eq!(render(&r, ReportKind::Dominated).unwrap().lines().count(), 7);
    }
}
