//! Append-only JSON-lines run log and CSV exports.
//!
//! Each log line is one [`RunLogEntry`]. Lines are never rewritten. A reader
//! ignores a trailing fragment without a newline, which is what a concurrent
//! writer can leave mid-append.

use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::analytics::{Cohort, LoggedRun};
use crate::error::{Error, Result};
use crate::optimizer::GridCell;
use crate::scenario::AttackScenario;
use crate::session::RunRecord;
use crate::sim::{DecisionSchedule, SimConfig, Trajectory};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default run-log path.
pub const LOG_PATH_ENV: &str = "CYBERSIM_LOG";

/// Money in tables and reports: M$ with six fraction digits.
pub fn fmt_money(v: f64) -> String {
    format!("{v:.6}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLogEntry {
    pub schema_version: u32,
    pub cohort: String,
    pub practice: bool,
    pub logged_at_ms: u64,
    #[serde(flatten)]
    pub record: RunRecord,
}

impl RunLogEntry {
    pub fn new(record: RunRecord, cohort: impl Into<String>, practice: bool, logged_at_ms: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            cohort: cohort.into(),
            practice,
            logged_at_ms,
            record,
        }
    }

    pub fn to_line(&self) -> Result<String> {
        let mut line = serde_json::to_string(self)?;
        line.push('\n');
        Ok(line)
    }
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

/// Single-writer handle on a log file.
#[derive(Debug)]
pub struct RunLog {
    path: PathBuf,
    file: Mutex<File>,
}

impl RunLog {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self {
            path,
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends one entry as a single write of one whole line.
    pub fn append(&self, entry: &RunLogEntry) -> Result<()> {
        let line = entry.to_line()?;
        let mut file = self.file.lock().unwrap_or_else(|e| e.into_inner());
        file.write_all(line.as_bytes())?;
        file.flush()?;
        Ok(())
    }

    pub fn append_run(&self, record: &RunRecord, cohort: &str, practice: bool) -> Result<()> {
        self.append(&RunLogEntry::new(record.clone(), cohort, practice, now_ms()))
    }
}

/// Parses every whole line of a log.
pub fn read_entries(text: &str) -> Result<Vec<RunLogEntry>> {
    let complete = match text.rfind('\n') {
        Some(end) => &text[..=end],
        None => "",
    };
    let mut entries = Vec::new();
    for (k, line) in complete.lines().enumerate() {
        let line_no = k + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("unsupported schema_version {v}"),
                })
            }
            None => {
                return Err(Error::Parse {
                    line: line_no,
                    message: "missing schema_version".into(),
                })
            }
        }
        let entry: RunLogEntry = serde_json::from_value(value).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let r = &entry.record;
        if r.monthly_profit.len() != r.accumulated_profit.len() || r.monthly_profit.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "profit series are empty or of unequal length".into(),
            });
        }
        entries.push(entry);
    }
    Ok(entries)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionReport {
    pub cohort: String,
    pub total_runs: usize,
    pub incomplete_runs: usize,
    pub incomplete_pct: f64,
    /// Practice runs found under this cohort label; never ingested.
    pub practice_skipped: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Cohorts {
    /// In order of first appearance in the log.
    pub cohorts: Vec<Cohort>,
    pub exclusions: Vec<ExclusionReport>,
}

impl Cohorts {
    pub fn get(&self, label: &str) -> Option<&Cohort> {
        self.cohorts.iter().find(|c| c.label == label)
    }
}

/// Groups scored runs by cohort, player and level. Practice runs are counted
/// and dropped.
pub fn group_entries(entries: Vec<RunLogEntry>) -> Cohorts {
    let mut out = Cohorts::default();
    for entry in entries {
        let idx = match out.cohorts.iter().position(|c| c.label == entry.cohort) {
            Some(i) => i,
            None => {
                out.cohorts.push(Cohort::new(entry.cohort.clone()));
                out.exclusions.push(ExclusionReport {
                    cohort: entry.cohort.clone(),
                    total_runs: 0,
                    incomplete_runs: 0,
                    incomplete_pct: 0.0,
                    practice_skipped: 0,
                });
                out.cohorts.len() - 1
            }
        };
        let report = &mut out.exclusions[idx];
        if entry.practice {
            report.practice_skipped += 1;
            continue;
        }
        report.total_runs += 1;
        if !entry.record.complete {
            report.incomplete_runs += 1;
        }
        out.cohorts[idx].push(LoggedRun {
            record: entry.record,
            logged_at_ms: entry.logged_at_ms,
        });
    }
    for r in &mut out.exclusions {
        if r.total_runs > 0 {
            r.incomplete_pct = 100.0 * r.incomplete_runs as f64 / r.total_runs as f64;
        }
    }
    out
}

pub fn load_cohorts(reader: impl Read) -> Result<Cohorts> {
    let mut text = String::new();
    let mut reader = reader;
    reader.read_to_string(&mut text)?;
    Ok(group_entries(read_entries(&text)?))
}

pub fn load_cohorts_from_path(path: impl AsRef<Path>) -> Result<Cohorts> {
    load_cohorts(File::open(path)?)
}

/// Everything needed to regenerate a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryHeader {
    pub config: SimConfig,
    pub schedule: DecisionSchedule,
    pub scenario: AttackScenario,
    pub seed: u64,
}

const TRAJECTORY_MAGIC: &str = "# cybersim trajectory v1";
const TRAJECTORY_COLUMNS: &str =
    "month,snr,sr,as,asd,c_p,c_d,c_rr,p_alloc,d_alloc,r_alloc,ci,profit_rate,month_profit,accumulated_profit";

/// CSV with `#` header lines carrying config, schedule, scenario and seed.
pub fn trajectory_csv(header: &TrajectoryHeader, trajectory: &Trajectory) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "{TRAJECTORY_MAGIC}");
    let _ = writeln!(out, "# config: {}", serde_json::to_string(&header.config)?);
    let _ = writeln!(out, "# schedule: {}", serde_json::to_string(&header.schedule)?);
    let _ = writeln!(out, "# scenario: {}", serde_json::to_string(&header.scenario)?);
    let _ = writeln!(out, "# seed: {}", header.seed);
    let _ = writeln!(out, "{TRAJECTORY_COLUMNS}");
    for s in &trajectory.samples {
        let st = &s.state;
        let d = &s.decisions;
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{}",
            s.month,
            st.snr,
            st.sr,
            st.as_,
            st.asd,
            st.c_p,
            st.c_d,
            st.c_rr,
            d.p_alloc,
            d.d_alloc,
            d.r_alloc,
            s.ci,
            fmt_money(s.profit_rate),
            fmt_money(s.month_profit),
            fmt_money(s.accumulated_profit)
        );
    }
    Ok(out)
}

pub fn read_trajectory_header(csv: &str) -> Result<TrajectoryHeader> {
    let mut lines = csv.lines().enumerate();
    match lines.next() {
        Some((_, TRAJECTORY_MAGIC)) => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: "not a trajectory file".into(),
            })
        }
    }
    let mut take = |key: &str| -> Result<(usize, String)> {
        let (k, line) = lines.next().ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("missing {key} header"),
        })?;
        let prefix = format!("# {key}: ");
        line.strip_prefix(&prefix)
            .map(|v| (k + 1, v.to_string()))
            .ok_or_else(|| Error::Parse {
                line: k + 1,
                message: format!("expected {key} header"),
            })
    };
    let parse_err = |line: usize| {
        move |e: serde_json::Error| Error::Parse {
            line,
            message: e.to_string(),
        }
    };
    let (l, config) = take("config")?;
    let config = serde_json::from_str(&config).map_err(parse_err(l))?;
    let (l, schedule) = take("schedule")?;
    let schedule = serde_json::from_str(&schedule).map_err(parse_err(l))?;
    let (l, scenario) = take("scenario")?;
    let scenario = serde_json::from_str(&scenario).map_err(parse_err(l))?;
    let (l, seed) = take("seed")?;
    let seed = seed.trim().parse().map_err(|e| Error::Parse {
        line: l,
        message: format!("seed: {e}"),
    })?;
    Ok(TrajectoryHeader {
        config,
        schedule,
        scenario,
        seed,
    })
}

pub fn grid_csv(table: &[GridCell]) -> String {
    let mut out = String::from("p_alloc,d_alloc,r_alloc,total_spend,accumulated_profit\n");
    for c in table {
        let _ = writeln!(
            out,
            "{:.6},{:.6},{:.6},{:.6},{}",
            c.vector.p_alloc,
            c.vector.d_alloc,
            c.vector.r_alloc,
            c.total_spend,
            fmt_money(c.accumulated_profit)
        );
    }
    out
}
