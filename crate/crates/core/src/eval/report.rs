//! CSV and plain-text result tables.
//!
//! The text table prints accuracy, ironic-class precision and recall, and
//! macro F-score; the CSV carries every per-class and macro value.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::matrix::ExperimentSpec;
use super::metrics::{ConfusionMatrix, Metrics};
use super::{io_err, EvalError};

/// The contents of a `<id>.metrics.json` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub id: String,
    pub label: String,
    pub spec: ExperimentSpec,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
}

/// Reads every `*.metrics.json` in `dir`, in report order.
pub fn read_results(dir: &Path) -> Result<Vec<ResultRecord>, EvalError> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if !path.to_string_lossy().ends_with(".metrics.json") {
            continue;
        }
        let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
        let rec: ResultRecord = serde_json::from_str(&text).map_err(|e| EvalError::Format {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    sort(&mut out);
    Ok(out)
}

fn sort(records: &mut [ResultRecord]) {
    records.sort_by_key(|r| r.spec.sort_key());
}

fn ordered(records: &[ResultRecord]) -> Result<Vec<ResultRecord>, EvalError> {
    if records.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut v = records.to_vec();
    sort(&mut v);
    Ok(v)
}

pub fn report_csv(records: &[ResultRecord]) -> Result<String, EvalError> {
    let mut out = String::from(
        "experiment,model,train,test,accuracy,precision_pos,recall_pos,f1_pos,\
         precision_neg,recall_neg,f1_neg,macro_precision,macro_recall,macro_f1\n",
    );
    for r in ordered(records)? {
        let m = &r.metrics;
        let langs =
            |ls: &[crate::corpus::Lang]| ls.iter().map(|l| l.code()).collect::<Vec<_>>().join("+");
        write!(
            out,
            "{},{},{},{}",
            r.label,
            r.spec.model,
            langs(&r.spec.train_langs),
            langs(&r.spec.test_langs)
        )
        .unwrap();
        for v in [
            m.accuracy,
            m.precision_pos,
            m.recall_pos,
            m.f1_pos,
            m.precision_neg,
            m.recall_neg,
            m.f1_neg,
            m.macro_precision,
            m.macro_recall,
            m.macro_f1,
        ] {
            write!(out, ",{v:.1}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn report_text(records: &[ResultRecord]) -> Result<String, EvalError> {
    let records = ordered(records)?;
    let header = ["Experiment", "Model", "A", "P", "R", "F"];
    let rows: Vec<[String; 6]> = records
        .iter()
        .map(|r| {
            let m = &r.metrics;
            [
                r.label.clone(),
                r.spec.model.to_string(),
                format!("{:.1}", m.accuracy),
                format!("{:.1}", m.precision_pos),
                format!("{:.1}", m.recall_pos),
                format!("{:.1}", m.macro_f1),
            ]
        })
        .collect();
    let mut width = header.map(|h| h.chars().count());
    for row in &rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (i, (c, w)) in cells.iter().zip(width).enumerate() {
            let pad = w - c.chars().count();
            if i < 2 {
                s.push_str(c);
                s.push_str(&" ".repeat(pad));
            } else {
                s.push_str(&" ".repeat(pad));
                s.push_str(c);
            }
            if i + 1 < cells.len() {
                s.push_str("  ");
            }
        }
        s.trim_end().to_owned() + "\n"
    };
    let mut out = line(&header.map(String::from));
    out.push_str(&line(&width.map(|w| "-".repeat(w))));
    for row in &rows {
        out.push_str(&line(row));
    }
    out.push_str("\nP and R are for the ironic class; F is the macro average over both classes.\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{crosslingual_specs, metrics, ModelFamily};

    fn record(spec: ExperimentSpec) -> ResultRecord {
        let cm = ConfusionMatrix {
            tp: 50,
            fp: 10,
            fn_: 20,
            tn: 20,
        };
        ResultRecord {
            id: spec.id(),
            label: spec.label(),
            spec,
            confusion: cm,
            metrics: metrics(&cm).unwrap(),
        }
    }

    #[test]
    fn single_row() {
        let spec = ExperimentSpec::new(
            &[crate::Lang::Ar],
            &[crate::Lang::Ar],
            ModelFamily::CnnMono,
            1,
        )
        .unwrap();
        let text = report_text(&[record(spec)]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0].split_whitespace().collect::<Vec<_>>(),
            ["Experiment", "Model", "A", "P", "R", "F"]
        );
        assert_eq!(
            lines[2].split_whitespace().collect::<Vec<_>>(),
            ["Ar", "cnn_mono", "70.0", "83.3", "71.4", "67.0"]
        );
        let csv = report_csv(&[record(
            ExperimentSpec::new(
                &[crate::Lang::Ar],
                &[crate::Lang::Ar],
                ModelFamily::CnnMono,
                1,
            )
            .unwrap(),
        )])
        .unwrap();
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "Ar,cnn_mono,ar,ar,70.0,83.3,71.4,76.9,50.0,66.7,57.1,66.7,69.0,67.0"
        );
    }

    #[test]
    fn crosslingual_rows_keep_table_order() {
        let mut recs: Vec<ResultRecord> = crosslingual_specs(&[ModelFamily::CnnCrosslingual], 1)
            .unwrap()
            .into_iter()
            .map(record)
            .collect();
        recs.reverse();
        let text = report_text(&recs).unwrap();
        let labels: Vec<&str> = text
            .lines()
            .skip(2)
            .take(8)
            .map(|l| l.split_whitespace().next().unwrap())
            .collect();
        assert_eq!(
            labels,
            [
                "Ar→Fr",
                "Fr→Ar",
                "Ar→En",
                "En→Ar",
                "Fr→En",
                "En→Fr",
                "(En/Fr)→Ar",
                "Ar→(En/Fr)"
            ]
        );
    }

    #[test]
    fn empty_is_an_error() {
        assert!(matches!(report_text(&[]), Err(EvalError::Empty)));
        assert!(matches!(report_csv(&[]), Err(EvalError::Empty)));
    }
}
