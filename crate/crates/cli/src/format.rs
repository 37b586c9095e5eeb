//! Number formatting: six significant digits for people.

pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        format!("{:.*}", (5 - mag).max(0) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

pub fn partition(rows: &[usize]) -> String {
    let inner: Vec<String> = rows.iter().map(|r| r.to_string()).collect();
    format!("[{}]", inner.join(","))
}
