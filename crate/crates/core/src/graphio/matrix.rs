use ndarray::Array2;

use crate::error::{Error, Result};

/// Dense matrix with row labels (node ids) and column labels (feature names).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    pub values: Array2<f64>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
}

impl LabeledMatrix {
    pub fn new(values: Array2<f64>, row_labels: Vec<String>, col_labels: Vec<String>) -> Result<Self> {
        if row_labels.len() != values.nrows() || col_labels.len() != values.ncols() {
            return Err(Error::Format(format!(
                "{}x{} matrix with {} row labels and {} column labels",
                values.nrows(),
                values.ncols(),
                row_labels.len(),
                col_labels.len()
            )));
        }
        Ok(Self { values, row_labels, col_labels })
    }

    /// Numbered labels `prefix0, prefix1, ...` for unlabeled data.
    pub fn unlabeled(values: Array2<f64>, row_prefix: &str, col_prefix: &str) -> Self {
        let row_labels = (0..values.nrows()).map(|i| format!("{row_prefix}{i}")).collect();
        let col_labels = (0..values.ncols()).map(|j| format!("{col_prefix}{j}")).collect();
        Self { values, row_labels, col_labels }
    }

    /// CSV with a header row; the first column holds the row label.
    pub fn read_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).comment(Some(b'#')).from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| Error::Format(format!("csv header: {e}")))?.clone();
        if header.is_empty() {
            return Err(Error::Format("csv header is empty".into()));
        }
        let col_labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let ncols = col_labels.len();
        let mut row_labels = Vec::new();
        let mut values = Vec::new();
        for (idx, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Format(format!("csv record {}: {e}", idx + 1)))?;
            let line = record.position().map(|p| p.line() as usize).unwrap_or(idx + 2);
            if record.len() != ncols + 1 {
                return Err(Error::parse(line, format!("expected {} fields, got {}", ncols + 1, record.len())));
            }
            row_labels.push(record[0].to_string());
            for field in record.iter().skip(1) {
                let v: f64 =
                    field.trim().parse().map_err(|_| Error::parse(line, format!("value {field:?} is not a number")))?;
                if !v.is_finite() {
                    return Err(Error::parse(line, format!("value {field:?} is not finite")));
                }
                values.push(v);
            }
        }
        let values =
            Array2::from_shape_vec((row_labels.len(), ncols), values).map_err(|e| Error::Format(e.to_string()))?;
        Self::new(values, row_labels, col_labels)
    }

    pub fn write_csv(&self, corner: &str) -> String {
        let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
        let mut header = vec![corner.to_string()];
        header.extend(self.col_labels.iter().cloned());
        writer.write_record(&header).expect("in-memory csv write");
        for (i, label) in self.row_labels.iter().enumerate() {
            let mut rec = vec![label.clone()];
            rec.extend(self.values.row(i).iter().map(|v| v.to_string()));
            writer.write_record(&rec).expect("in-memory csv write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
    }

    /// Reject negative entries (factorization inputs must be non-negative).
    pub fn ensure_nonnegative(&self) -> Result<()> {
        if let Some(((i, j), v)) = self.values.indexed_iter().find(|(_, &v)| v < 0.0) {
            return Err(Error::Input(format!(
                "negative entry {v} at row {:?}, column {:?}",
                self.row_labels[i], self.col_labels[j]
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn csv_round_trip() {
        let m = LabeledMatrix::new(
            array![[1.0, 0.1 + 0.2], [1e-300, 7.0]],
            vec!["a".into(), "b,c".into()],
            vec!["deg".into(), "wdeg".into()],
        )
        .unwrap();
        let text = m.write_csv("node");
        assert_eq!(LabeledMatrix::read_csv(&text).unwrap(), m);
    }

    #[test]
    fn ragged_row_is_error() {
        assert!(LabeledMatrix::read_csv("node,x,y\na,1\n").is_err());
        assert!(LabeledMatrix::read_csv("node,x\na,zz\n").is_err());
    }
}
