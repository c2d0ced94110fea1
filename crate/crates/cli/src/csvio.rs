//! CSV emission with a bit-exact reproducibility contract: comma separator,
//! dot decimal, one header row, LF line endings, and reals rendered with 17
//! significant digits so that re-parsing recovers the exact double.

/// Render a real with 17 significant digits (scientific notation).
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Assemble a CSV document from a header and rows.
pub fn csv_document(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
