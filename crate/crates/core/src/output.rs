//! Text formatting shared by every CSV and JSON artifact.

use std::fmt::Write as _;

/// A float with 17 significant digits in scientific notation.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders rows as CSV with a header line. Fields are written verbatim, so
/// callers must not pass values containing commas.
pub fn csv<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let fields: Vec<String> = row.into_iter().collect();
        let _ = writeln!(s, "{}", fields.join(","));
    }
    s
}

/// Dash-separated state ids, as used for paths in CSV files.
pub fn path_id(path: &[usize]) -> String {
    path.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("-")
}
