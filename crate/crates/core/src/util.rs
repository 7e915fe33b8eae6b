//! Small formatting helpers shared by reports.

/// Shortest decimal rendering after rounding to 10 significant digits.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let r: f64 = format!("{x:.9e}").parse().unwrap_or(x);
    if r != 0.0 && !(1e-4..1e15).contains(&r.abs()) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

/// CSV rendering of a real with 17 significant digits.
pub fn fmt_csv(x: f64) -> String {
    format!("{x:.16e}")
}
