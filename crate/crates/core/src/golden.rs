//! Published ruin tables for the three built-in models, kept as printed.
//!
//! Each table has rows `T = 1..=10, 20` and `inf`, and columns
//! `u = 0..=10, 20`. Cells are compared numerically, not as strings, since
//! the printed values mix three- and four-decimal rounding.

use std::fmt;

use serde::Serialize;

use crate::error::{Result, RuinError};

/// Half a unit in the third decimal place.
pub const GOLDEN_TOLERANCE: f64 = 5e-4;

/// Allowance for rounding error in the computed value. Some exact answers
/// sit precisely on a rounding tie (`psi(2, 3) = 0.1275` is printed as
/// `0.128`), so a difference of exactly the tolerance must still pass.
pub const FLOAT_SLACK: f64 = 1e-12;

pub const TABLE_CSV: [&str; 3] = [
    include_str!("../golden/table1.csv"),
    include_str!("../golden/table2.csv"),
    include_str!("../golden/table3.csv"),
];

/// Built-in model behind each table, by index.
pub const TABLE_MODELS: [&str; 3] = ["first", "poisson", "geometric"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Horizon {
    Finite(usize),
    Infinite,
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Horizon::Finite(t) => write!(f, "{t}"),
            Horizon::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenRow {
    pub horizon: Horizon,
    /// Cell text as printed.
    pub printed: Vec<String>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenTable {
    pub name: String,
    pub surpluses: Vec<usize>,
    pub rows: Vec<GoldenRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub table: String,
    pub horizon: Horizon,
    pub u: usize,
    pub printed: String,
    pub computed: f64,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: T={} u={} printed {} computed {:.6}",
            self.table, self.horizon, self.u, self.printed, self.computed
        )
    }
}

impl GoldenTable {
    /// Parses `label,u0,u1,...` followed by rows `T,cell,...`; `inf` marks the ultimate row.
    pub fn parse(name: &str, text: &str) -> Result<GoldenTable> {
        let bad = |msg: String| RuinError::Parse(format!("golden table {name}: {msg}"));
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| bad("empty".into()))?;
        let surpluses = header
            .split(',')
            .skip(1)
            .map(|c| c.trim().parse::<usize>().map_err(|_| bad(format!("bad surplus '{c}'"))))
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::new();
        for line in lines {
            let mut cells = line.split(',').map(str::trim);
            let label = cells.next().unwrap_or_default();
            let horizon = match label {
                "inf" | "∞" => Horizon::Infinite,
                t => Horizon::Finite(t.parse().map_err(|_| bad(format!("bad horizon '{t}'")))?),
            };
            let printed: Vec<String> = cells.map(str::to_string).collect();
            if printed.len() != surpluses.len() {
                return Err(bad(format!("row {label} has {} cells, expected {}", printed.len(), surpluses.len())));
            }
            let values = printed
                .iter()
                .map(|c| c.parse::<f64>().map_err(|_| bad(format!("bad cell '{c}'"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(GoldenRow { horizon, printed, values });
        }
        Ok(GoldenTable { name: name.to_string(), surpluses, rows })
    }

    /// Table `index` in `1..=3`.
    pub fn builtin(index: usize) -> GoldenTable {
        GoldenTable::parse(&format!("table{index}"), TABLE_CSV[index - 1]).expect("embedded table parses")
    }

    pub fn cell_count(&self) -> usize {
        self.rows.len() * self.surpluses.len()
    }

    pub fn max_horizon(&self) -> usize {
        self.rows
            .iter()
            .filter_map(|r| match r.horizon {
                Horizon::Finite(t) => Some(t),
                Horizon::Infinite => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn max_surplus(&self) -> usize {
        self.surpluses.iter().copied().max().unwrap_or(0)
    }

    /// Cells where `computed` differs from the printed value by more than
    /// `tolerance` (plus [`FLOAT_SLACK`]).
    pub fn compare(&self, computed: impl Fn(Horizon, usize) -> f64, tolerance: f64) -> Vec<Mismatch> {
        let mut out = Vec::new();
        for row in &self.rows {
            for ((&u, printed), &golden) in self.surpluses.iter().zip(&row.printed).zip(&row.values) {
                let value = computed(row.horizon, u);
                if !((value - golden).abs() <= tolerance + FLOAT_SLACK) {
                    out.push(Mismatch {
                        table: self.name.clone(),
                        horizon: row.horizon,
                        u,
                        printed: printed.clone(),
                        computed: value,
                    });
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_tables_have_144_cells() {
        for i in 1..=3 {
            let t = GoldenTable::builtin(i);
            assert_eq!(t.cell_count(), 144);
            assert_eq!(t.max_horizon(), 20);
            assert_eq!(t.max_surplus(), 20);
            assert_eq!(t.rows.last().unwrap().horizon, Horizon::Infinite);
        }
    }

    #[test]
    fn printed_cells_are_kept_verbatim() {
        let t = GoldenTable::builtin(2);
        let row = t.rows.iter().find(|r| r.horizon == Horizon::Finite(20)).unwrap();
        assert_eq!(row.printed[9], "0.0003");
        assert_eq!(GoldenTable::builtin(1).rows[0].printed[0], "0.5");
    }

    #[test]
    fn compare_reports_offending_cells() {
        let t = GoldenTable::parse("t", "T,0,1\n1,0.5,0.25\ninf,0.9,0.8\n").unwrap();
        let exact = |h: Horizon, u: usize| match h {
            Horizon::Finite(_) => [0.5, 0.25][u],
            Horizon::Infinite => [0.9, 0.8][u],
        };
        assert!(t.compare(exact, 5e-4).is_empty());
        let m = t.compare(|h, u| if h == Horizon::Infinite && u == 1 { 0.7 } else { exact(h, u) }, 5e-4);
        assert_eq!(m.len(), 1);
        assert_eq!((m[0].horizon, m[0].u, m[0].printed.as_str()), (Horizon::Infinite, 1, "0.8"));
        assert!(t.compare(|_, _| f64::NAN, 5e-4).len() == 4);
        // A value on the rounding tie passes; one just past it does not.
        assert!(t.compare(|h, u| if (h, u) == (Horizon::Finite(1), 1) { 0.2505 } else { exact(h, u) }, 5e-4).is_empty());
        assert_eq!(t.compare(|h, u| if (h, u) == (Horizon::Finite(1), 1) { 0.2506 } else { exact(h, u) }, 5e-4).len(), 1);
        assert!(GoldenTable::parse("t", "T,0\n1,0.5,0.1\n").is_err());
        assert!(GoldenTable::parse("t", "T,0\nx,0.5\n").is_err());
    }
}
