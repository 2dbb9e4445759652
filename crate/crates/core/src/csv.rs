//! Minimal CSV emission: header row, comma separated, floats with six
//! significant digits.

use std::io::Write;

/// Formats `x` with six significant digits, `%g` style.
pub fn sig6(x: f64) -> String {
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    // rounding can bump the exponent (e.g. 999999.7)
    let rounded: f64 = format!("{:.5e}", x).parse().unwrap_or(x);
    let exp = if rounded != 0.0 { rounded.abs().log10().floor() as i32 } else { exp };
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, rounded);
        trim_zeros(&s)
    } else {
        let s = format!("{:.5e}", x);
        match s.split_once('e') {
            Some((mant, e)) => format!("{}e{}", trim_zeros(mant), e),
            None => s,
        }
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Writes a header and rows of pre-formatted cells.
pub fn write_table<W: Write>(mut w: W, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        writeln!(w, "{}", r.join(","))?;
    }
    Ok(())
}
