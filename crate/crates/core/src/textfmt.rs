//! Minimal text formatting shared by the report writers: float formatting
//! that survives a round-trip through text, and JSON string escaping.

/// Format a float so that parsing the text recovers the exact bits.
///
/// Finite values use 17 significant digits in scientific notation, which is
/// always sufficient for f64 round-tripping; non-finite values map to the
/// JSON-compatible spellings used throughout the reports.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "null".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "1e400".to_string() } else { "-1e400".to_string() }
    } else {
        format!("{x:.16e}")
    }
}

/// Escape a string for inclusion in a JSON document (without the quotes).
pub fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}
