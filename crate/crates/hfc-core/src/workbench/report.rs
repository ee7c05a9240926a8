use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::experiment::{Experiment, ExperimentSummary};
use crate::error::{HfcError, Result};
use crate::layout::Spin;
use crate::mitigation::{Bound, Verdict};

/// Rendered report documents, keyed by file name.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub files: Vec<(String, String)>,
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    experiments: Vec<SummaryEntry<'a>>,
}

#[derive(Serialize)]
struct SummaryEntry<'a> {
    molecule: &'a str,
    pipeline: String,
    seed: u64,
    n_runs: usize,
    accepted: usize,
    summary: Option<&'a ExperimentSummary>,
}

fn verdict_text(v: &Verdict) -> String {
    match v {
        Verdict::Accepted => "accepted".into(),
        Verdict::Rejected { violations } => violations
            .iter()
            .map(|x| {
                let bound = match x.bound {
                    Bound::Lower => "below -eps",
                    Bound::Upper => "above 1+eps",
                };
                format!("{} occupation {} = {:.5} {bound}", x.spin, x.index, x.eigenvalue)
            })
            .collect::<Vec<_>>()
            .join("; "),
    }
}

fn occupations_csv(exps: &[Experiment]) -> String {
    let mut s = String::from("molecule,pipeline,run,accepted,spin,index,occupation,exact\n");
    for e in exps {
        let exact = e.summary.as_ref().map(|x| &x.exact_occupations);
        for r in &e.records {
            for spin in Spin::BOTH {
                for (i, x) in r.occupations.block(spin).iter().enumerate() {
                    let ex = exact.map(|o| format!("{:.9}", o.block(spin)[i])).unwrap_or_default();
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{spin},{i},{x:.9},{ex}",
                        e.molecule,
                        r.pipeline,
                        r.run,
                        r.verdict.is_accepted()
                    );
                }
            }
        }
    }
    s
}

fn hfc_csv(exps: &[Experiment]) -> String {
    let mut s = String::from("molecule,pipeline,run,accepted,nucleus,active,inactive,total,exact_total,verdict\n");
    for e in exps {
        for r in &e.records {
            for (k, h) in r.hfc.iter().enumerate() {
                let exact = e
                    .summary
                    .as_ref()
                    .map(|x| format!("{:.6}", x.nuclei[k].exact_total))
                    .unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{:.6},{:.6},{:.6},{exact},\"{}\"",
                    e.molecule,
                    r.pipeline,
                    r.run,
                    r.verdict.is_accepted(),
                    h.nucleus,
                    h.active,
                    h.inactive,
                    h.total,
                    verdict_text(&r.verdict)
                );
            }
        }
    }
    s
}

fn table_csv(exps: &[Experiment]) -> String {
    let mut s = String::from("molecule,pipeline,nucleus,accepted,n_runs,mean,std,exact_total,reference_total\n");
    for e in exps {
        let Some(sum) = &e.summary else {
            let _ = writeln!(s, "{},{},,0,{},,,,", e.molecule, e.config.pipeline, e.records.len());
            continue;
        };
        for n in &sum.nuclei {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{:.3},{:.3},{:.3},{:.1}",
                e.molecule, sum.pipeline, n.nucleus, n.accepted, sum.n_runs, n.mean, n.std, n.exact_total, n.reference_total
            );
        }
    }
    s
}

/// Strip of occupation numbers per spin orbital: one dot per run, a bar for the exact value.
fn occupations_svg(exps: &[Experiment]) -> String {
    let lanes: Vec<(String, Spin, usize)> = exps
        .iter()
        .flat_map(|e| {
            let n = e.records.first().map(|r| r.occupations.alpha.len()).unwrap_or(0);
            Spin::BOTH
                .into_iter()
                .flat_map(move |s| (0..n).map(move |i| (e.molecule.clone(), s, i)))
                .collect::<Vec<_>>()
        })
        .collect();
    let (w, lane_w, h, top) = (60 + 40 * lanes.len().max(1), 40.0, 320.0, 20.0);
    let y = |v: f64| top + (1.2 - v.clamp(-0.2, 1.2)) / 1.4 * (h - 2.0 * top);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"10\">"
    );
    for v in [0.0, 0.5, 1.0] {
        let _ = writeln!(
            s,
            "<line x1=\"40\" x2=\"{w}\" y1=\"{0:.2}\" y2=\"{0:.2}\" stroke=\"#ccc\"/><text x=\"5\" y=\"{1:.2}\">{v:.1}</text>",
            y(v),
            y(v) + 3.0
        );
    }
    let mut lane = 0usize;
    for e in exps {
        let n = e.records.first().map(|r| r.occupations.alpha.len()).unwrap_or(0);
        for spin in Spin::BOTH {
            for i in 0..n {
                let x = 60.0 + lane_w * lane as f64;
                for r in &e.records {
                    let color = if r.verdict.is_accepted() { "#1f77b4" } else { "#d62728" };
                    let _ = writeln!(
                        s,
                        "<circle cx=\"{x:.2}\" cy=\"{:.2}\" r=\"2\" fill=\"{color}\"/>",
                        y(r.occupations.block(spin)[i])
                    );
                }
                if let Some(sum) = &e.summary {
                    let ey = y(sum.exact_occupations.block(spin)[i]);
                    let _ = writeln!(
                        s,
                        "<line x1=\"{:.2}\" x2=\"{:.2}\" y1=\"{ey:.2}\" y2=\"{ey:.2}\" stroke=\"black\" stroke-dasharray=\"3,2\"/>",
                        x - 12.0,
                        x + 12.0
                    );
                }
                let _ = writeln!(
                    s,
                    "<text x=\"{:.2}\" y=\"{:.2}\">{}{i}{}</text>",
                    x - 12.0,
                    h - 5.0,
                    e.molecule,
                    spin.symbol()
                );
                lane += 1;
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Renders CSV tables, a JSON summary and an SVG occupation plot.
/// Timing fields are left out so the bytes depend only on the records.
pub fn report(exps: &[Experiment]) -> Result<Report> {
    if exps.is_empty() || exps.iter().all(|e| e.records.is_empty()) {
        return Err(HfcError::InvalidArgument("nothing to report".into()));
    }
    let doc = SummaryDoc {
        experiments: exps
            .iter()
            .map(|e| SummaryEntry {
                molecule: &e.molecule,
                pipeline: e.config.pipeline.to_string(),
                seed: e.config.seed,
                n_runs: e.records.len(),
                accepted: e.records.iter().filter(|r| r.verdict.is_accepted()).count(),
                summary: e.summary.as_ref(),
            })
            .collect(),
    };
    let mut json = serde_json::to_string_pretty(&doc)?;
    json.push('\n');
    Ok(Report {
        files: vec![
            ("summary.json".into(), json),
            ("summary.csv".into(), table_csv(exps)),
            ("hfc.csv".into(), hfc_csv(exps)),
            ("occupations.csv".into(), occupations_csv(exps)),
            ("occupations.svg".into(), occupations_svg(exps)),
        ],
    })
}

impl Report {
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        self.files
            .iter()
            .map(|(name, body)| {
                let p = dir.join(name);
                fs::write(&p, body)?;
                Ok(p)
            })
            .collect()
    }
}

/// Reads every `*.json` experiment file in `dir`, in file-name order.
pub fn load_experiments(dir: &Path) -> Result<Vec<Experiment>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| Ok(serde_json::from_str(&fs::read_to_string(p)?)?))
        .collect()
}
