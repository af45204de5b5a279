//! Panel CSV: header `subject,t,y`, one row per observation, rows sorted by
//! subject then time, every subject on the same time column.

use std::io::{Read, Write};

use mixfbm_core::{Panel, SamplingGrid};

pub const HEADER: [&str; 3] = ["subject", "t", "y"];

#[derive(Debug, thiserror::Error)]
pub enum PanelFileError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("inconsistent grid: {0}")]
    Grid(String),
}

/// Write with shortest round-trip float formatting, LF line endings.
pub fn write_panel<W: Write>(out: W, panel: &Panel) -> Result<(), PanelFileError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER)?;
    for (i, row) in panel.rows().enumerate() {
        let subject = (i + 1).to_string();
        for (t, y) in panel.grid().times().iter().zip(row) {
            w.write_record([subject.as_str(), &t.to_string(), &y.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_panel<R: Read>(input: R) -> Result<Panel, PanelFileError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().map(str::trim).ne(HEADER) {
        return Err(PanelFileError::Parse {
            line: 1,
            message: format!("expected header `subject,t,y`, found `{}`", header.iter().collect::<Vec<_>>().join(",")),
        });
    }

    let mut subjects: Vec<(i64, Vec<f64>, Vec<f64>)> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let parse_err = |message: String| PanelFileError::Parse { line, message };
        if record.len() != 3 {
            return Err(parse_err(format!("expected 3 fields, found {}", record.len())));
        }
        let subject: i64 = record[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("invalid subject id `{}`", &record[0])))?;
        let t: f64 = parse_real(&record[1]).ok_or_else(|| parse_err(format!("invalid time `{}`", &record[1])))?;
        let y: f64 = parse_real(&record[2]).ok_or_else(|| parse_err(format!("invalid value `{}`", &record[2])))?;

        match subjects.last_mut() {
            Some((id, ts, ys)) if *id == subject => {
                if t <= *ts.last().expect("non-empty") {
                    return Err(parse_err(format!("times of subject {subject} are not strictly increasing")));
                }
                ts.push(t);
                ys.push(y);
            }
            Some((id, _, _)) if *id > subject => {
                return Err(parse_err(format!("rows are not sorted by subject ({subject} after {id})")));
            }
            _ => subjects.push((subject, vec![t], vec![y])),
        }
    }

    let Some((_, first_times, _)) = subjects.first() else {
        return Err(PanelFileError::Parse {
            line: 1,
            message: "panel has no rows".into(),
        });
    };
    let first_times = first_times.clone();
    for (id, ts, _) in &subjects {
        if ts != &first_times {
            return Err(PanelFileError::Grid(format!(
                "subject {id} does not share the time column of subject {}",
                subjects[0].0
            )));
        }
    }
    let grid = SamplingGrid::new(first_times).map_err(|e| PanelFileError::Grid(e.to_string()))?;
    let rows = subjects.into_iter().map(|(_, _, ys)| ys).collect();
    Panel::new(grid, rows).map_err(|e| PanelFileError::Grid(e.to_string()))
}

fn parse_real(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}
