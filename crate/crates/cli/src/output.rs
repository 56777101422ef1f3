//! Table rendering: full-precision CSV, rounded text and JSON.

use ruin_core::RuinTable;
use serde_json::{json, Value};

/// `x` rounded to `digits` decimals, ties away from zero, applied to the
/// shortest decimal form of `x` so that `0.0625` becomes `0.063`.
pub fn round_half_away(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let text = format!("{}", x.abs());
    let (int, frac) = text.split_once('.').unwrap_or((&text, ""));
    let mut digits_kept: Vec<u8> = int.bytes().chain(frac.bytes().chain(std::iter::repeat(b'0')).take(digits)).collect();
    if frac.as_bytes().get(digits).is_some_and(|&d| d >= b'5') {
        let mut i = digits_kept.len();
        loop {
            if i == 0 {
                digits_kept.insert(0, b'1');
                break;
            }
            i -= 1;
            if digits_kept[i] == b'9' {
                digits_kept[i] = b'0';
            } else {
                digits_kept[i] += 1;
                break;
            }
        }
    }
    let split = digits_kept.len() - digits;
    let body = String::from_utf8(digits_kept).expect("ascii digits");
    let (i, f) = body.split_at(split);
    let rounded = if digits == 0 { i.to_string() } else { format!("{i}.{f}") };
    let negative = x.is_sign_negative() && rounded.bytes().any(|b| b.is_ascii_digit() && b != b'0');
    if negative {
        format!("-{rounded}")
    } else {
        rounded
    }
}

/// Shortest text that parses back to the same `f64`.
pub fn full_precision(x: f64) -> String {
    format!("{x}")
}

fn rows(table: &RuinTable, cell: impl Fn(f64) -> String) -> Vec<(String, Vec<String>)> {
    let mut out: Vec<(String, Vec<String>)> = (1..=table.t_max())
        .map(|t| (t.to_string(), table.finite.horizon_row(t).into_iter().map(&cell).collect()))
        .collect();
    let inf = match &table.ultimate {
        Some(psi) => psi.iter().map(|&p| cell(p)).collect(),
        None => vec![String::new(); table.u_max() + 1],
    };
    out.push(("inf".to_string(), inf));
    out
}

pub fn table_csv(table: &RuinTable) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = std::iter::once("u".to_string()).chain((0..=table.u_max()).map(|u| u.to_string())).collect();
    w.write_record(&header)?;
    for (label, cells) in rows(table, full_precision) {
        w.write_record(std::iter::once(label).chain(cells))?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("utf-8 csv"))
}

pub fn table_pretty(table: &RuinTable) -> String {
    let body = rows(table, |p| round_half_away(p, 3));
    let width = body.iter().flat_map(|(_, c)| c.iter().map(String::len)).max().unwrap_or(5).max(5);
    let mut out = format!("{:>4}", "T\\u");
    for u in 0..=table.u_max() {
        out.push_str(&format!(" {u:>width$}"));
    }
    out.push('\n');
    for (label, cells) in body {
        out.push_str(&format!("{label:>4}"));
        for c in cells {
            let c = if c.is_empty() { "n/a".to_string() } else { c };
            out.push_str(&format!(" {c:>width$}"));
        }
        out.push('\n');
    }
    out
}

pub fn table_json(table: &RuinTable, model: Value) -> Value {
    let rows: Vec<Value> = (1..=table.t_max())
        .map(|t| json!({ "horizon": t.to_string(), "psi": table.finite.horizon_row(t) }))
        .chain(std::iter::once(json!({ "horizon": "inf", "psi": table.ultimate })))
        .collect();
    json!({
        "model": model,
        "u_max": table.u_max(),
        "t_max": table.t_max(),
        "start_season": table.finite.start_season(),
        "finite_method": table.finite_method,
        "ultimate": table.source,
        "rows": rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_ties_go_away_from_zero() {
        assert_eq!(round_half_away(0.0625, 3), "0.063");
        assert_eq!(round_half_away(0.0005, 3), "0.001");
        assert_eq!(round_half_away(0.0004999, 3), "0.000");
        assert_eq!(round_half_away(0.9995, 3), "1.000");
        assert_eq!(round_half_away(9.9996, 3), "10.000");
        assert_eq!(round_half_away(-0.0625, 3), "-0.063");
        assert_eq!(round_half_away(-0.0001, 3), "0.000");
        assert_eq!(round_half_away(0.877, 3), "0.877");
        assert_eq!(round_half_away(1.0, 3), "1.000");
        assert_eq!(round_half_away(2.5, 0), "3");
    }

    #[test]
    fn full_precision_round_trips() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 0.8774000000000001, 0.0] {
            assert_eq!(full_precision(x).parse::<f64>().unwrap(), x);
        }
    }
}
