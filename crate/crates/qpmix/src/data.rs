//! Mixed datasets: n rows over discrete-then-continuous columns.
//!
//! Column order matches the marked-graph vertex order, so vertex `v` is
//! discrete column `v` when `v < n_discrete` and continuous column
//! `v - n_discrete` otherwise.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Mark;
use crate::io_util::{atomic_write, fmt_f64};

#[derive(Debug, Clone, PartialEq)]
pub struct MixedDataset {
    n: usize,
    levels: Vec<usize>,
    /// row-major `n x n_discrete`
    discrete: Vec<u32>,
    /// `n x n_continuous`
    continuous: DMatrix<f64>,
}

impl MixedDataset {
    pub fn new(
        n: usize,
        levels: Vec<usize>,
        discrete: Vec<u32>,
        continuous: DMatrix<f64>,
    ) -> Result<Self> {
        let nd = levels.len();
        if discrete.len() != n * nd {
            return Err(Error::DimensionMismatch(format!(
                "{} discrete entries for {n} rows x {nd} columns",
                discrete.len()
            )));
        }
        if continuous.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} continuous rows for {n} observations",
                continuous.nrows()
            )));
        }
        for row in 0..n {
            for col in 0..nd {
                let v = discrete[row * nd + col];
                if (v as usize) >= levels[col] {
                    return Err(Error::DimensionMismatch(format!(
                        "discrete value {v} out of range for column {col} with {} levels",
                        levels[col]
                    )));
                }
            }
        }
        Ok(Self { n, levels, discrete, continuous })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_discrete(&self) -> usize {
        self.levels.len()
    }

    pub fn n_continuous(&self) -> usize {
        self.continuous.ncols()
    }

    pub fn p(&self) -> usize {
        self.n_discrete() + self.n_continuous()
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn mark(&self, vertex: usize) -> Mark {
        if vertex < self.n_discrete() {
            Mark::Discrete
        } else {
            Mark::Continuous
        }
    }

    pub fn is_discrete(&self, vertex: usize) -> bool {
        vertex < self.n_discrete()
    }

    /// Discrete value of vertex `v` (must be discrete) in `row`.
    pub fn discrete_value(&self, row: usize, vertex: usize) -> u32 {
        debug_assert!(vertex < self.n_discrete());
        self.discrete[row * self.n_discrete() + vertex]
    }

    /// Continuous value of vertex `v` (must be continuous) in `row`.
    pub fn continuous_value(&self, row: usize, vertex: usize) -> f64 {
        debug_assert!(vertex >= self.n_discrete());
        self.continuous[(row, vertex - self.n_discrete())]
    }

    /// CSV with a `name:mark` header; discrete values as integers,
    /// continuous as decimal floats.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (0..self.p())
            .map(|v| {
                if self.is_discrete(v) {
                    format!("x{v}:d")
                } else {
                    format!("x{v}:c")
                }
            })
            .collect();
        let _ = writeln!(out, "{}", header.join(","));
        for row in 0..self.n {
            let mut fields = Vec::with_capacity(self.p());
            for col in 0..self.n_discrete() {
                fields.push(self.discrete[row * self.n_discrete() + col].to_string());
            }
            for col in 0..self.n_continuous() {
                fields.push(fmt_f64(self.continuous[(row, col)]));
            }
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        atomic_write(path, self.to_csv_string().as_bytes())
    }

    pub fn parse_csv(text: &str, origin: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            path: origin.to_string(),
            line,
            msg,
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| err(1, "empty dataset file".into()))?;
        let mut marks = Vec::new();
        for (idx, name) in header.split(',').enumerate() {
            let name = name.trim();
            if let Some(_base) = name.strip_suffix(":d") {
                marks.push(Mark::Discrete);
            } else if let Some(_base) = name.strip_suffix(":c") {
                marks.push(Mark::Continuous);
            } else {
                return Err(err(
                    1,
                    format!("column {} (`{name}`) lacks a `:d` or `:c` mark suffix", idx + 1),
                ));
            }
        }
        let nd = marks.iter().take_while(|&&m| m == Mark::Discrete).count();
        if marks[nd..].contains(&Mark::Discrete) {
            return Err(err(1, "discrete columns must precede continuous columns".into()));
        }
        let nc = marks.len() - nd;
        let mut discrete: Vec<u32> = Vec::new();
        let mut continuous: Vec<f64> = Vec::new();
        let mut n = 0usize;
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != marks.len() {
                return Err(err(
                    idx + 1,
                    format!("{} fields, expected {}", fields.len(), marks.len()),
                ));
            }
            for (col, field) in fields.iter().enumerate() {
                let field = field.trim();
                if col < nd {
                    let v: u32 = field.parse().map_err(|_| {
                        err(idx + 1, format!("bad discrete value `{field}` in column {}", col + 1))
                    })?;
                    discrete.push(v);
                } else {
                    let v: f64 = field.parse().map_err(|_| {
                        err(idx + 1, format!("bad numeric value `{field}` in column {}", col + 1))
                    })?;
                    continuous.push(v);
                }
            }
            n += 1;
        }
        // level cardinalities: one past the largest observed code
        let mut levels = vec![0usize; nd];
        for row in 0..n {
            for col in 0..nd {
                let v = discrete[row * nd + col] as usize;
                levels[col] = levels[col].max(v + 1);
            }
        }
        for l in &mut levels {
            *l = (*l).max(1);
        }
        let continuous = DMatrix::from_row_iterator(n, nc, continuous);
        Self::new(n, levels, discrete, continuous)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_csv(&text, &path.display().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> MixedDataset {
        MixedDataset::new(
            3,
            vec![2],
            vec![0, 0, 1],
            DMatrix::from_row_slice(3, 2, &[1.0, 0.5, 3.0, -0.25, 5.0, 2.0]),
        )
        .unwrap()
    }

    #[test]
    fn accessors_follow_vertex_order() {
        let d = toy();
        assert_eq!(d.p(), 3);
        assert_eq!(d.discrete_value(2, 0), 1);
        assert_eq!(d.continuous_value(1, 1), 3.0);
        assert_eq!(d.continuous_value(0, 2), 0.5);
    }

    #[test]
    fn out_of_range_discrete_is_rejected() {
        let bad = MixedDataset::new(
            1,
            vec![2],
            vec![2],
            DMatrix::zeros(1, 0),
        );
        assert!(bad.is_err());
    }

    #[test]
    fn csv_round_trip_is_byte_identical() {
        let d = toy();
        let text = d.to_csv_string();
        let back = MixedDataset::parse_csv(&text, "mem").unwrap();
        assert_eq!(text, back.to_csv_string());
        assert_eq!(d, back);
    }

    #[test]
    fn csv_header_is_marked() {
        let text = toy().to_csv_string();
        assert!(text.starts_with("x0:d,x1:c,x2:c\n"));
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let text = "x0:d,x1:c\n0,1.5\n1,oops\n";
        match MixedDataset::parse_csv(text, "d.csv") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        let text = "x0:c,x1:d\n1.5,0\n";
        assert!(MixedDataset::parse_csv(text, "d.csv").is_err());
    }
}
