use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TrkError};

/// Reads a CSV with header `x1,...,xD[,y]`. Returns the inputs and, when a
/// `y` column is present, the responses.
pub fn read_points(path: impl AsRef<Path>) -> Result<(DMatrix<f64>, Option<DVector<f64>>)> {
    let mut r = csv::Reader::from_path(path.as_ref())?;
    let header = r.headers()?.clone();
    let y_col = header.iter().position(|h| h.trim() == "y");
    let x_cols: Vec<usize> = (0..header.len()).filter(|c| Some(*c) != y_col).collect();
    if x_cols.is_empty() {
        return Err(TrkError::InvalidArgument(format!("{} has no input columns", path.as_ref().display())));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |c: usize| -> Result<f64> {
            rec.get(c).unwrap_or("").trim().parse::<f64>().map_err(|e| {
                TrkError::InvalidArgument(format!("row {}, column {}: {e}", line + 1, c + 1))
            })
        };
        for c in &x_cols {
            xs.push(parse(*c)?);
        }
        if let Some(c) = y_col {
            ys.push(parse(c)?);
        }
    }
    let n = xs.len() / x_cols.len();
    let points = DMatrix::from_row_slice(n, x_cols.len(), &xs);
    Ok((points, y_col.map(|_| DVector::from_vec(ys))))
}

/// Reads a dataset CSV; the `y` column is required.
pub fn read_dataset(path: impl AsRef<Path>) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let (x, y) = read_points(path.as_ref())?;
    let y = y.ok_or_else(|| TrkError::InvalidArgument(format!("{} has no `y` column", path.as_ref().display())))?;
    Ok((x, y))
}

/// Writes `x1,...,xD[,y]` rows.
pub fn write_points<W: std::io::Write>(out: W, points: &DMatrix<f64>, y: Option<&[f64]>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=points.ncols()).map(|k| format!("x{k}")).collect();
    if y.is_some() {
        header.push("y".into());
    }
    w.write_record(&header)?;
    for i in 0..points.nrows() {
        let mut rec: Vec<String> = points.row(i).iter().map(|v| v.to_string()).collect();
        if let Some(y) = y {
            rec.push(y[i].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dataset(path: impl AsRef<Path>, points: &DMatrix<f64>, y: &[f64]) -> Result<()> {
    write_points(std::fs::File::create(path)?, points, Some(y))
}
