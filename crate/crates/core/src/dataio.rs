//! Delimited-text ingestion, lift table rendering and result documents.

use std::fs::File;
use std::io::{BufReader, Read, Write as _};
use std::path::Path;

use flate2::read::GzDecoder;
use serde::{Deserialize, Serialize};

use crate::distribution::{CategoricalColumn, Column, Dataset, JointTable};
use crate::error::{Error, Result};
use crate::metrics::{lift, LiftTable};
use crate::search::{Candidate, SearchConfig, Skipped};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Categorical,
    Continuous,
    Group,
    Target,
    Ignore,
}

/// How to read a delimited file. Columns not named in any list are
/// categorical.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetSchema {
    /// Column names; taken from the header row when absent.
    pub names: Option<Vec<String>>,
    pub target: String,
    pub continuous: Vec<String>,
    pub groups: Vec<String>,
    pub ignore: Vec<String>,
    pub missing: String,
    pub delimiter: char,
    pub header: bool,
}

impl Default for DatasetSchema {
    fn default() -> Self {
        DatasetSchema {
            names: None,
            target: String::new(),
            continuous: Vec::new(),
            groups: Vec::new(),
            ignore: Vec::new(),
            missing: "?".to_string(),
            delimiter: ',',
            header: true,
        }
    }
}

impl DatasetSchema {
    pub fn new(target: impl Into<String>) -> Self {
        DatasetSchema {
            target: target.into(),
            ..DatasetSchema::default()
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })
    }

    pub fn kind_of(&self, name: &str) -> ColumnKind {
        let has = |list: &[String]| list.iter().any(|n| n == name);
        if name == self.target {
            ColumnKind::Target
        } else if has(&self.ignore) {
            ColumnKind::Ignore
        } else if has(&self.groups) {
            ColumnKind::Group
        } else if has(&self.continuous) {
            ColumnKind::Continuous
        } else {
            ColumnKind::Categorical
        }
    }

    fn check(&self, names: &[String]) -> Result<()> {
        if self.target.is_empty() {
            return Err(Error::SchemaMismatch("no target column given".into()));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::SchemaMismatch(format!("duplicate column name '{dup}'")));
        }
        let lists = [&self.continuous, &self.groups, &self.ignore];
        for name in std::iter::once(&self.target).chain(lists.into_iter().flatten()) {
            if !names.contains(name) {
                return Err(Error::SchemaMismatch(format!("no column named '{name}'")));
            }
        }
        if self.missing.is_empty() {
            return Err(Error::SchemaMismatch("missing marker must be nonempty".into()));
        }
        if !self.delimiter.is_ascii() {
            return Err(Error::SchemaMismatch("delimiter must be an ASCII character".into()));
        }
        Ok(())
    }
}

fn open(path: &Path) -> Result<Box<dyn Read>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    if path.extension().is_some_and(|e| e == "gz") {
        Ok(Box::new(GzDecoder::new(reader)))
    } else {
        Ok(Box::new(reader))
    }
}

enum Builder {
    Categorical(Vec<Option<String>>),
    Continuous(Vec<Option<f64>>),
    Skip,
}

/// Reads a delimited file (gzip-compressed when the name ends in `.gz`).
///
/// Rows whose target is missing are dropped and counted in
/// [`Dataset::rejected_rows`]; other missing values stay in place and are
/// excluded per subset.
pub fn load_csv(path: &Path, schema: &DatasetSchema) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(schema.delimiter as u8)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let mut records = reader.records();
    let malformed = |e: csv::Error| {
        let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            kind => Error::Malformed {
                line,
                message: format!("{kind:?}"),
            },
        }
    };

    let header = if schema.header {
        match records.next() {
            Some(r) => Some(r.map_err(malformed)?.iter().map(str::to_string).collect::<Vec<_>>()),
            None => {
                return Err(Error::Malformed {
                    line: 1,
                    message: "file is empty".into(),
                })
            }
        }
    } else {
        None
    };
    let names = match (&schema.names, header) {
        (Some(names), Some(header)) if *names != header => {
            return Err(Error::SchemaMismatch(format!(
                "header {header:?} does not match schema names {names:?}"
            )))
        }
        (Some(names), _) => names.clone(),
        (None, Some(header)) => header,
        (None, None) => {
            return Err(Error::SchemaMismatch("file has no header and no names were given".into()))
        }
    };
    schema.check(&names)?;

    let kinds: Vec<ColumnKind> = names.iter().map(|n| schema.kind_of(n)).collect();
    let target = kinds.iter().position(|&k| k == ColumnKind::Target).expect("checked");
    let mut builders: Vec<Builder> = kinds
        .iter()
        .map(|k| match k {
            ColumnKind::Continuous => Builder::Continuous(Vec::new()),
            ColumnKind::Ignore => Builder::Skip,
            _ => Builder::Categorical(Vec::new()),
        })
        .collect();

    let mut rejected = 0;
    let mut data_rows = 0;
    for record in records {
        let record = record.map_err(malformed)?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != names.len() {
            return Err(Error::Malformed {
                line,
                message: format!("expected {} fields, found {}", names.len(), record.len()),
            });
        }
        data_rows += 1;
        if &record[target] == schema.missing.as_str() {
            rejected += 1;
            continue;
        }
        for (j, field) in record.iter().enumerate() {
            let missing = field == schema.missing;
            match &mut builders[j] {
                Builder::Categorical(v) => v.push((!missing).then(|| field.to_string())),
                Builder::Continuous(v) => {
                    if missing {
                        v.push(None);
                        continue;
                    }
                    match field.parse::<f64>() {
                        Ok(x) if x.is_finite() => v.push(Some(x)),
                        _ => {
                            return Err(Error::Malformed {
                                line,
                                message: format!("column '{}': '{field}' is not a finite number", names[j]),
                            })
                        }
                    }
                }
                Builder::Skip => {}
            }
        }
    }
    if data_rows == 0 {
        return Err(Error::Malformed {
            line: 1,
            message: "file contains no data rows".into(),
        });
    }

    let mut kept_names = Vec::new();
    let mut columns = Vec::new();
    let (mut kept_target, mut groups) = (0, Vec::new());
    for ((name, kind), builder) in names.into_iter().zip(kinds).zip(builders) {
        let column = match builder {
            Builder::Skip => continue,
            Builder::Continuous(v) => Column::Continuous(v),
            Builder::Categorical(v) => {
                Column::Categorical(CategoricalColumn::from_values(v.iter().map(|s| s.as_deref())))
            }
        };
        match kind {
            ColumnKind::Target => kept_target = columns.len(),
            ColumnKind::Group => groups.push(columns.len()),
            _ => {}
        }
        kept_names.push(name);
        columns.push(column);
    }
    if columns[kept_target].is_empty() {
        return Err(Error::InsufficientData("every row has a missing target".into()));
    }
    Ok(Dataset::new(kept_names, columns, kept_target, groups)?.with_rejected_rows(rejected))
}

/// `1234567` as `1,234,567`.
pub fn thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

/// Three significant digits, keeping trailing zeros (`1.00`, `0.0766`, `14.2`).
pub fn significant3(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v:.2}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (2 - magnitude).max(0) as usize;
    let text = format!("{v:.decimals$}");
    // Rounding can carry into a new digit (9.996 -> 10.00).
    let rounded: f64 = text.parse().unwrap_or(v);
    if rounded.abs().log10().floor() as i32 > magnitude {
        let decimals = decimals.saturating_sub(1);
        return format!("{v:.decimals$}");
    }
    text
}

/// Markdown-style grid of lifts with counts in parentheses and the marginal
/// relative frequencies in the last row and column.
pub fn render_lift_table(l: &LiftTable<'_>) -> String {
    let t = l.base();
    let total = t.total() as f64;
    let mut rows: Vec<Vec<String>> = Vec::with_capacity(t.n_x() + 2);
    let mut head = vec![String::new()];
    head.extend(t.y_labels().iter().cloned());
    head.push("Relative Frequency".into());
    rows.push(head);
    for x in 0..t.n_x() {
        let mut row = vec![t.x_labels()[x].clone()];
        for y in 0..t.n_y() {
            row.push(format!("{} ({})", significant3(l.get(x, y)), thousands(t.count(x, y))));
        }
        row.push(format!("{:.3}", t.row_sum(x) as f64 / total));
        rows.push(row);
    }
    let mut last = vec!["Relative Frequency".to_string()];
    last.extend(t.col_sums().iter().map(|&c| format!("{:.3}", c as f64 / total)));
    last.push(format!("{:.3}", 1.0));
    rows.push(last);

    let widths: Vec<usize> = (0..rows[0].len())
        .map(|j| rows.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
        .collect();
    let line = |r: &[String]| {
        let cells: Vec<String> = r
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:>w$}"))
            .collect();
        format!("| {} |\n", cells.join(" | "))
    };
    let mut out = line(&rows[0]);
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    out.push_str(&format!("|-{}-|\n", rule.join("-|-")));
    for r in &rows[1..] {
        out.push_str(&line(r));
    }
    out
}

/// The full lift table of one subset, as stored in a result document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub features: Vec<String>,
    pub x_labels: Vec<String>,
    pub y_labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
    pub lifts: Vec<Vec<f64>>,
    pub row_frequencies: Vec<f64>,
    pub column_frequencies: Vec<f64>,
    pub total: u64,
    pub rendered: String,
}

impl TableReport {
    pub fn new(features: Vec<String>, t: &JointTable) -> Result<Self> {
        let l = lift(t)?;
        let total = t.total() as f64;
        Ok(TableReport {
            features,
            x_labels: t.x_labels().to_vec(),
            y_labels: t.y_labels().to_vec(),
            counts: t.count_matrix(),
            lifts: (0..t.n_x()).map(|x| l.row(x).to_vec()).collect(),
            row_frequencies: t.row_sums().iter().map(|&c| c as f64 / total).collect(),
            column_frequencies: t.col_sums().iter().map(|&c| c as f64 / total).collect(),
            total: t.total(),
            rendered: render_lift_table(&l),
        })
    }
}

/// Inputs needed to re-run a search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub data: String,
    pub schema: DatasetSchema,
    pub features: Vec<String>,
    pub target_value: Option<String>,
    pub search: SearchConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub tool_version: String,
    pub algorithm: String,
    pub config: ConfigEcho,
    pub rows: usize,
    pub rejected_rows: usize,
    pub subsets_evaluated: usize,
    pub candidates: Vec<Candidate>,
    pub diagnostics: Vec<Skipped>,
    pub top_table: Option<TableReport>,
}

/// Canonical JSON: sorted keys, shortest round-trip floats, trailing newline.
pub fn to_canonical_json(doc: &ResultDocument) -> Result<String, serde_json::Error> {
    let value = serde_json::to_value(doc)?;
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    Ok(text)
}

pub fn write_results(doc: &ResultDocument, path: &Path) -> Result<()> {
    let text = to_canonical_json(doc).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_results(path: &Path) -> Result<ResultDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::search::{select_profile, Locus};
    use std::io::Write;

    fn write_temp(contents: &str, suffix: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn number_formatting() {
        assert_eq!(thousands(0), "0");
        assert_eq!(thousands(999), "999");
        assert_eq!(thousands(35344), "35,344");
        assert_eq!(thousands(1234567), "1,234,567");
        assert_eq!(significant3(1.0), "1.00");
        assert_eq!(significant3(1.462962963), "1.46");
        assert_eq!(significant3(0.0766), "0.0766");
        assert_eq!(significant3(14.24), "14.2");
        assert_eq!(significant3(9.996), "10.0");
        assert_eq!(significant3(0.0), "0.00");
    }

    #[test]
    fn rendered_cells() {
        let t1 = fixtures::table1();
        let text = render_lift_table(&lift(&t1).unwrap());
        assert!(text.contains("1.46 (13)"));
        let t7 = fixtures::table7();
        let text = render_lift_table(&lift(&t7).unwrap());
        assert!(text.contains("4.94 (35,344)"));
        assert!(text.contains("0.00 (0)"));
        let uniform = JointTable::from_counts(
            vec!["a".into(), "b".into()],
            vec!["p".into(), "q".into()],
            &[vec![25, 25], vec![25, 25]],
        )
        .unwrap();
        let text = render_lift_table(&lift(&uniform).unwrap());
        assert_eq!(text.matches("1.00 (25)").count(), 4);
        assert!(text.contains("0.500"));
    }

    #[test]
    fn loads_with_missing_markers() {
        let f = write_temp("republican,n,y,?\ndemocrat,y,?,n\n?,y,y,y\n", ".data");
        let mut schema = DatasetSchema::new("party");
        schema.names = Some(vec!["party".into(), "a".into(), "b".into(), "c".into()]);
        schema.header = false;
        let d = load_csv(f.path(), &schema).unwrap();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.rejected_rows(), 1);
        let c = d.column(3).as_categorical().unwrap();
        assert_eq!(c.missing_count(), 1);
        assert_eq!(d.target_column().levels(), &["democrat", "republican"]);
    }

    #[test]
    fn header_and_kinds() {
        let f = write_temp("y;u;v;w;g\na;1.5;x;9;g1\nb;2;?;8;g2\n", ".csv");
        let schema = DatasetSchema {
            target: "y".into(),
            continuous: vec!["u".into()],
            groups: vec!["g".into()],
            ignore: vec!["w".into()],
            delimiter: ';',
            ..DatasetSchema::default()
        };
        let d = load_csv(f.path(), &schema).unwrap();
        assert_eq!(d.names(), &["y", "u", "v", "g"]);
        assert_eq!(d.column(1).as_continuous().unwrap(), &[Some(1.5), Some(2.0)]);
        assert_eq!(d.group_columns(), &[3]);
    }

    #[test]
    fn gzip_input() {
        use flate2::write::GzEncoder;
        let mut enc = GzEncoder::new(Vec::new(), flate2::Compression::default());
        enc.write_all(b"y,x\na,1\nb,2\n").unwrap();
        let mut f = tempfile::Builder::new().suffix(".csv.gz").tempfile().unwrap();
        f.write_all(&enc.finish().unwrap()).unwrap();
        let d = load_csv(f.path(), &DatasetSchema::new("y")).unwrap();
        assert_eq!(d.n_rows(), 2);
    }

    #[test]
    fn malformed_rows_report_lines() {
        let f = write_temp("y,x\na,1\nb,2,3\n", ".csv");
        match load_csv(f.path(), &DatasetSchema::new("y")) {
            Err(Error::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let f = write_temp("y,x\na,1\nb,oops\n", ".csv");
        let schema = DatasetSchema {
            continuous: vec!["x".into()],
            ..DatasetSchema::new("y")
        };
        match load_csv(f.path(), &schema) {
            Err(Error::Malformed { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("oops"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let empty = write_temp("", ".csv");
        assert!(matches!(load_csv(empty.path(), &DatasetSchema::new("y")), Err(Error::Malformed { line: 1, .. })));
        let header_only = write_temp("y,x\n", ".csv");
        assert!(matches!(
            load_csv(header_only.path(), &DatasetSchema::new("y")),
            Err(Error::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            load_csv(f.path(), &DatasetSchema::new("nope")),
            Err(Error::SchemaMismatch(_))
        ));
    }

    fn document(candidates: Vec<Candidate>, diagnostics: Vec<Skipped>) -> ResultDocument {
        ResultDocument {
            tool_version: TOOL_VERSION.into(),
            algorithm: "select-profile".into(),
            config: ConfigEcho {
                data: "votes.data".into(),
                schema: DatasetSchema::new("party"),
                features: vec!["a".into()],
                target_value: Some("republican".into()),
                search: SearchConfig::default(),
            },
            rows: 3,
            rejected_rows: 0,
            subsets_evaluated: 1,
            candidates,
            diagnostics,
            top_table: Some(TableReport::new(vec!["a".into()], &fixtures::table7()).unwrap()),
        }
    }

    #[test]
    fn result_round_trip_is_canonical() {
        let f = write_temp("y,a\nr,n\nr,n\nd,y\nd,n\n", ".csv");
        let data = load_csv(f.path(), &DatasetSchema::new("y")).unwrap();
        let found = select_profile(&data, &[1], "r", &SearchConfig::default()).unwrap();
        assert!(matches!(found.candidates[0].locus, Locus::Profile { .. }));
        let doc = document(found.candidates, found.skipped);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        write_results(&doc, &path).unwrap();
        let back = read_results(&path).unwrap();
        assert_eq!(back, doc);
        let first = std::fs::read_to_string(&path).unwrap();
        assert!(first.ends_with('\n'));
        write_results(&back, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), first);

        let empty = document(
            Vec::new(),
            vec![Skipped {
                features: vec!["a".into()],
                reason: "no complete case".into(),
            }],
        );
        write_results(&empty, &path).unwrap();
        assert_eq!(read_results(&path).unwrap(), empty);
        assert!(matches!(
            write_results(&empty, &dir.path().join("missing/out.json")),
            Err(Error::Io { .. })
        ));
    }
}
