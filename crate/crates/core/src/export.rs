//! CSV and JSON writers shared by the data types.

use std::io::{self, Write};

/// Writes equal-length columns as CSV, each value with 17 significant digits.
pub fn write_csv<W: Write>(mut w: W, header: &[&str], columns: &[&[f64]]) -> io::Result<()> {
    assert_eq!(header.len(), columns.len());
    let n = columns.first().map_or(0, |c| c.len());
    assert!(columns.iter().all(|c| c.len() == n), "columns differ in length");
    writeln!(w, "{}", header.join(","))?;
    let mut line = String::new();
    for i in 0..n {
        line.clear();
        for (j, c) in columns.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&fmt_f64(c[i]));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
