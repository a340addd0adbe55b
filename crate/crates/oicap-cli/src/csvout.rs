//! CSV emission: 17-significant-digit float formatting (round-trip exact),
//! LF line endings, `#` metadata lines, then header and rows.

/// Formats a float with 17 significant digits so the value round-trips.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    format!("{x:.16e}")
}

pub fn fmt_bool(b: bool) -> String {
    if b { "true" } else { "false" }.to_string()
}

/// Assembles a full CSV document.
pub fn document(meta: &[String], header: &[&str], rows: &[String]) -> String {
    let mut out = String::new();
    for line in meta {
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    out
}
