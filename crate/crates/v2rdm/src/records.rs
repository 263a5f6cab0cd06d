//! Result rows, their CSV form and a gnuplot script over that CSV.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

pub const CSV_HEADER: [&str; 15] = [
    "system",
    "condition",
    "coordinate",
    "energy",
    "fci_energy",
    "error",
    "log10_abs_error",
    "n_variance",
    "lambda",
    "iterations",
    "gap",
    "primal_residual",
    "dual_residual",
    "wall_s",
    "converged",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    /// (2,2)-positivity.
    TwoTwo,
    /// (2,2) plus the degree-3 anticommutator block.
    TwoThreePartial,
    /// Full (2,3)-positivity.
    TwoThreeFull,
    /// Exact diagonalization.
    Fci,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Condition::TwoTwo,
        Condition::TwoThreePartial,
        Condition::TwoThreeFull,
        Condition::Fci,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Condition::TwoTwo => "2_2",
            Condition::TwoThreePartial => "2_3_partial",
            Condition::TwoThreeFull => "2_3_full",
            Condition::Fci => "fci",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown condition '{0}' (expected 2_2, 2_3_partial, 2_3_full or fci)")]
pub struct UnknownCondition(String);

impl FromStr for Condition {
    type Err = UnknownCondition;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Condition::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| UnknownCondition(s.to_string()))
    }
}

/// One CSV row.
///
/// Solver fields are `None` on exact-diagonalization rows; `error` and
/// `log10_abs_error` are `None` unless the run converged and a reference
/// energy exists.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub system: String,
    pub condition: Condition,
    pub coordinate: String,
    pub energy: f64,
    pub fci_energy: Option<f64>,
    pub error: Option<f64>,
    pub log10_abs_error: Option<f64>,
    pub n_variance: Option<f64>,
    pub lambda: Option<f64>,
    pub iterations: Option<usize>,
    pub gap: Option<f64>,
    pub primal_residual: Option<f64>,
    pub dual_residual: Option<f64>,
    pub wall_s: f64,
    pub converged: bool,
}

impl RunRecord {
    /// Fills `error` and `log10_abs_error` from `energy` and `fci_energy`.
    pub fn with_error_fields(mut self) -> Self {
        self.error = match (self.converged, self.fci_energy) {
            (true, Some(reference)) => Some(self.energy - reference),
            _ => None,
        };
        self.log10_abs_error = self.error.filter(|e| *e != 0.0).map(|e| e.abs().log10());
        self
    }
}

/// 17 significant digits: enough to round-trip any double.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

/// A coordinate such as `kappa/tau`, in the CSV number format.
pub fn format_coordinate(x: f64) -> String {
    format_number(x)
}

fn opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

impl RunRecord {
    fn fields(&self) -> [String; 15] {
        [
            self.system.clone(),
            self.condition.label().to_string(),
            self.coordinate.clone(),
            format_number(self.energy),
            opt(self.fci_energy),
            opt(self.error),
            opt(self.log10_abs_error),
            opt(self.n_variance),
            opt(self.lambda),
            self.iterations.map(|i| i.to_string()).unwrap_or_default(),
            opt(self.gap),
            opt(self.primal_residual),
            opt(self.dual_residual),
            format_number(self.wall_s),
            self.converged.to_string(),
        ]
    }
}

/// Streams records as CSV rows, header first.
pub struct CsvSink<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> CsvSink<W> {
    pub fn new(writer: W) -> csv::Result<Self> {
        let mut inner = csv::Writer::from_writer(writer);
        inner.write_record(CSV_HEADER)?;
        inner.flush()?;
        Ok(CsvSink { inner })
    }

    pub fn write(&mut self, record: &RunRecord) -> csv::Result<()> {
        self.inner.write_record(record.fields())?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W, csv::Error> {
        self.inner.into_inner().map_err(|e| e.into_error().into())
    }
}

pub fn write_csv<W: Write>(writer: W, records: &[RunRecord]) -> csv::Result<W> {
    let mut sink = CsvSink::new(writer)?;
    for r in records {
        sink.write(r)?;
    }
    sink.into_inner()
}

#[derive(Debug, thiserror::Error)]
pub enum CsvReadError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {row}: header mismatch")]
    Header { row: usize },
    #[error("row {row}, column {column}: cannot parse '{value}'")]
    Field {
        row: usize,
        column: &'static str,
        value: String,
    },
}

/// Parses CSV produced by [`write_csv`].
pub fn read_csv(text: &str) -> Result<Vec<RunRecord>, CsvReadError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    if reader.headers()?.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(CsvReadError::Header { row: 1 });
    }
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let get = |c: usize| row.get(c).unwrap_or("");
        let bad = |c: usize| CsvReadError::Field {
            row: line,
            column: CSV_HEADER[c],
            value: get(c).to_string(),
        };
        let num = |c: usize| -> Result<f64, CsvReadError> { get(c).parse().map_err(|_| bad(c)) };
        let opt_num = |c: usize| -> Result<Option<f64>, CsvReadError> {
            match get(c) {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| bad(c)),
            }
        };
        out.push(RunRecord {
            system: get(0).to_string(),
            condition: get(1).parse().map_err(|_| bad(1))?,
            coordinate: get(2).to_string(),
            energy: num(3)?,
            fci_energy: opt_num(4)?,
            error: opt_num(5)?,
            log10_abs_error: opt_num(6)?,
            n_variance: opt_num(7)?,
            lambda: opt_num(8)?,
            iterations: match get(9) {
                "" => None,
                s => Some(s.parse().map_err(|_| bad(9))?),
            },
            gap: opt_num(10)?,
            primal_residual: opt_num(11)?,
            dual_residual: opt_num(12)?,
            wall_s: num(13)?,
            converged: get(14).parse().map_err(|_| bad(14))?,
        });
    }
    Ok(out)
}

/// Gnuplot script drawing energies (top) and `log10|error|` (bottom) per
/// condition against the sweep coordinate of `csv_path`.
pub fn gnuplot_script(csv_path: &Path, conditions: &[Condition]) -> String {
    let file = csv_path.display().to_string().replace('\'', "''");
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 800,900\n");
    s.push_str(&format!("set output '{file}.png'\n"));
    s.push_str("set multiplot layout 2,1\n");
    s.push_str("set xlabel 'coordinate'\n");
    let curve = |col: usize, cond: Condition| {
        format!(
            "'{file}' using 3:(strcol(2) eq '{label}' ? ${col} : 1/0) with linespoints title '{label}'",
            label = cond.label()
        )
    };
    s.push_str("set ylabel 'energy'\n");
    let energy: Vec<String> = conditions.iter().map(|&c| curve(4, c)).collect();
    s.push_str(&format!("plot {}\n", energy.join(", \\\n     ")));
    s.push_str("set ylabel 'log10 |E - E_FCI|'\n");
    let errors: Vec<String> = conditions
        .iter()
        .filter(|&&c| c != Condition::Fci)
        .map(|&c| curve(7, c))
        .collect();
    if errors.is_empty() {
        s.push_str("unset multiplot\n");
        return s;
    }
    s.push_str(&format!("plot {}\n", errors.join(", \\\n     ")));
    s.push_str("unset multiplot\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(condition: Condition, converged: bool) -> RunRecord {
        RunRecord {
            system: "ring".into(),
            condition,
            coordinate: format_coordinate(0.75),
            energy: -3.5026861807875,
            fci_energy: Some(-3.502686180787501),
            error: None,
            log10_abs_error: None,
            n_variance: Some(1.0 / 3.0),
            lambda: Some(0.0),
            iterations: Some(421),
            gap: Some(1.2e-8),
            primal_residual: Some(9.75e-8),
            dual_residual: Some(2.28e-8),
            wall_s: 0.3,
            converged,
        }
        .with_error_fields()
    }

    #[test]
    fn condition_labels_round_trip() {
        for c in Condition::ALL {
            assert_eq!(c.label().parse::<Condition>().unwrap(), c);
        }
        assert!("2_4".parse::<Condition>().is_err());
    }

    #[test]
    fn header_only_for_no_records() {
        let out = write_csv(Vec::new(), &[]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), CSV_HEADER.join(",") + "\n");
    }

    #[test]
    fn non_converged_rows_leave_error_empty() {
        let r = record(Condition::TwoTwo, false);
        assert_eq!(r.error, None);
        let out = String::from_utf8(write_csv(Vec::new(), &[r]).unwrap()).unwrap();
        let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[5], "");
        assert_eq!(row[6], "");
        assert_eq!(row[14], "false");
    }

    #[test]
    fn csv_round_trip() {
        let records = vec![
            record(Condition::TwoTwo, true),
            record(Condition::TwoThreeFull, false),
        ];
        let out = String::from_utf8(write_csv(Vec::new(), &records).unwrap()).unwrap();
        assert_eq!(read_csv(&out).unwrap(), records);
        assert!(out.contains(",3.3333333333333331e-1,"));
    }

    #[test]
    fn script_mentions_every_condition() {
        let s = gnuplot_script(Path::new("out.csv"), &[Condition::TwoTwo, Condition::Fci]);
        assert!(s.contains("'2_2'"));
        assert!(s.contains("'fci'"));
        assert!(s.contains("set datafile separator ','"));
    }
}
