//! Feasibility scan over the dimensionless coupling plane (B/D, F/D).
//!
//! Every grid cell runs the tailoring solver with D normalized to 1; feasible
//! cells record their best solution (largest gap, ties broken toward smaller
//! E). The grid serializes to CSV for analysis and to a PGM image in which
//! the feasible region appears as the black area.

use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

use super::{solve, Ce3Solution, NoSolution};

/// Invalid scan request.
#[derive(Debug, Clone, Error)]
pub enum ScanError {
    #[error("invalid scan range: {0}")]
    InvalidRange(String),
}

/// A rectangular scan request over B/D and F/D, with D fixed at 1.
#[derive(Debug, Clone, Copy)]
pub struct ScanSpec {
    pub b_min: f64,
    pub b_max: f64,
    pub f_min: f64,
    pub f_max: f64,
    /// Number of B samples (rows), inclusive of both endpoints.
    pub nb: usize,
    /// Number of F samples (columns), inclusive of both endpoints.
    pub nf: usize,
    pub gap_min: f64,
}

impl ScanSpec {
    fn validate(&self) -> Result<(), ScanError> {
        let fin = [self.b_min, self.b_max, self.f_min, self.f_max, self.gap_min];
        if fin.iter().any(|x| !x.is_finite()) {
            return Err(ScanError::InvalidRange("bounds must be finite".into()));
        }
        if self.b_min > self.b_max || self.f_min > self.f_max {
            return Err(ScanError::InvalidRange(format!(
                "empty interval: b [{}, {}], f [{}, {}]",
                self.b_min, self.b_max, self.f_min, self.f_max
            )));
        }
        if self.nb < 2 || self.nf < 2 {
            return Err(ScanError::InvalidRange(format!(
                "grid must be at least 2x2, got {}x{}",
                self.nb, self.nf
            )));
        }
        if self.gap_min < 0.0 {
            return Err(ScanError::InvalidRange("gap_min must be non-negative".into()));
        }
        Ok(())
    }
}

/// One scanned cell: feasibility flag plus the best solution when feasible.
#[derive(Debug, Clone)]
pub struct RegionCell {
    pub feasible: bool,
    pub best: Option<Ce3Solution>,
}

/// Scan result: axis sample values plus a row-major cell array
/// (`cells[i * nf + j]` is B index i, F index j).
#[derive(Debug, Clone)]
pub struct RegionGrid {
    b_axis: Vec<f64>,
    f_axis: Vec<f64>,
    cells: Vec<RegionCell>,
    gap_min: f64,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + i as f64 * step })
        .collect()
}

fn best_of(sols: Vec<Ce3Solution>) -> Option<Ce3Solution> {
    // `solve` returns ascending E, so on equal gaps the earlier (smaller E)
    // entry wins by keeping only strict improvements.
    let mut best: Option<Ce3Solution> = None;
    for s in sols {
        if best.as_ref().is_none_or(|b| s.gap > b.gap) {
            best = Some(s);
        }
    }
    best
}

/// Scan the (B/D, F/D) rectangle on an inclusive grid. Cells are evaluated
/// independently (in parallel) and assembled by index, so the result is
/// identical under any worker schedule.
pub fn scan_region(spec: &ScanSpec) -> Result<RegionGrid, ScanError> {
    spec.validate()?;
    let b_axis = linspace(spec.b_min, spec.b_max, spec.nb);
    let f_axis = linspace(spec.f_min, spec.f_max, spec.nf);
    let cells: Vec<RegionCell> = (0..spec.nb * spec.nf)
        .into_par_iter()
        .map(|idx| {
            let b = b_axis[idx / spec.nf];
            let f = f_axis[idx % spec.nf];
            match solve(b, 1.0, f, spec.gap_min) {
                Ok(sols) => RegionCell { feasible: true, best: best_of(sols) },
                Err(NoSolution { .. }) => RegionCell { feasible: false, best: None },
            }
        })
        .collect();
    Ok(RegionGrid { b_axis, f_axis, cells, gap_min: spec.gap_min })
}

impl RegionGrid {
    pub fn b_axis(&self) -> &[f64] {
        &self.b_axis
    }

    pub fn f_axis(&self) -> &[f64] {
        &self.f_axis
    }

    pub fn gap_min(&self) -> f64 {
        self.gap_min
    }

    pub fn cell(&self, i_b: usize, j_f: usize) -> &RegionCell {
        &self.cells[i_b * self.f_axis.len() + j_f]
    }

    pub fn cells(&self) -> &[RegionCell] {
        &self.cells
    }

    /// Fraction of cells that are feasible.
    pub fn feasible_fraction(&self) -> f64 {
        let k = self.cells.iter().filter(|c| c.feasible).count();
        k as f64 / self.cells.len() as f64
    }

    /// Index of the cell whose (B, F) sample is nearest the query point.
    pub fn nearest_cell(&self, b: f64, f: f64) -> (usize, usize) {
        let nearest = |axis: &[f64], x: f64| {
            axis.iter()
                .enumerate()
                .min_by(|(_, p), (_, q)| {
                    (*p - x).abs().partial_cmp(&(*q - x).abs()).unwrap()
                })
                .map(|(i, _)| i)
                .unwrap()
        };
        (nearest(&self.b_axis, b), nearest(&self.f_axis, f))
    }

    /// Sizes of the 4-connected components of feasible cells, largest first.
    pub fn component_sizes(&self) -> Vec<usize> {
        let (nb, nf) = (self.b_axis.len(), self.f_axis.len());
        let mut seen = vec![false; nb * nf];
        let mut sizes = Vec::new();
        for start in 0..nb * nf {
            if seen[start] || !self.cells[start].feasible {
                continue;
            }
            let mut size = 0usize;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(idx) = stack.pop() {
                size += 1;
                let (i, j) = (idx / nf, idx % nf);
                let mut push = |ni: usize, nj: usize| {
                    let nidx = ni * nf + nj;
                    if !seen[nidx] && self.cells[nidx].feasible {
                        seen[nidx] = true;
                        stack.push(nidx);
                    }
                };
                if i > 0 {
                    push(i - 1, j);
                }
                if i + 1 < nb {
                    push(i + 1, j);
                }
                if j > 0 {
                    push(i, j - 1);
                }
                if j + 1 < nf {
                    push(i, j + 1);
                }
            }
            sizes.push(size);
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    /// Write one CSV row per cell. Numeric solution fields are left empty for
    /// infeasible cells.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "b_over_d,f_over_d,feasible,a_over_d,e_over_d,gap_over_d")?;
        for (i, &b) in self.b_axis.iter().enumerate() {
            for (j, &f) in self.f_axis.iter().enumerate() {
                let cell = self.cell(i, j);
                match &cell.best {
                    Some(s) => writeln!(
                        w,
                        "{b},{f},1,{},{},{}",
                        s.params.a, s.params.e, s.gap
                    )?,
                    None => writeln!(w, "{b},{f},0,,,")?,
                }
            }
        }
        Ok(())
    }

    /// Write a plain-text PGM (P2) image: one pixel per cell, 0 (black) for
    /// feasible and 255 for infeasible, F increasing rightward and B
    /// increasing downward.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> io::Result<()> {
        let (nb, nf) = (self.b_axis.len(), self.f_axis.len());
        writeln!(w, "P2")?;
        writeln!(w, "{nf} {nb}")?;
        writeln!(w, "255")?;
        for i in 0..nb {
            let row: Vec<&str> = (0..nf)
                .map(|j| if self.cell(i, j).feasible { "0" } else { "255" })
                .collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> ScanSpec {
        ScanSpec {
            b_min: 0.1,
            b_max: 0.5,
            f_min: 0.5,
            f_max: 1.5,
            nb: 5,
            nf: 5,
            gap_min: 0.2,
        }
    }

    #[test]
    fn rejects_bad_ranges() {
        let mut s = small_spec();
        s.nb = 1;
        assert!(matches!(scan_region(&s), Err(ScanError::InvalidRange(_))));
        let mut s = small_spec();
        s.b_min = 0.9;
        assert!(scan_region(&s).is_err());
        let mut s = small_spec();
        s.f_max = f64::INFINITY;
        assert!(scan_region(&s).is_err());
    }

    #[test]
    fn axes_are_inclusive_and_exact_at_endpoints() {
        let g = scan_region(&small_spec()).unwrap();
        assert_eq!(g.b_axis(), &[0.1, 0.2, 0.30000000000000004, 0.4, 0.5]);
        assert_eq!(g.f_axis().first(), Some(&0.5));
        assert_eq!(g.f_axis().last(), Some(&1.5));
        assert_eq!(g.cells().len(), 25);
    }

    #[test]
    fn reference_cell_is_feasible_and_stores_its_solution() {
        let spec = ScanSpec {
            b_min: 0.3,
            b_max: 0.4,
            f_min: 1.0,
            f_max: 1.1,
            nb: 2,
            nf: 2,
            gap_min: 0.2,
        };
        let g = scan_region(&spec).unwrap();
        let cell = g.cell(0, 0);
        assert!(cell.feasible);
        let s = cell.best.as_ref().unwrap();
        assert!((s.gap - crate::ce3::tests::REF_GAP).abs() < 1e-10);
        assert!(s.is_valid());
    }

    #[test]
    fn nonpositive_coupling_rows_are_infeasible() {
        let spec = ScanSpec {
            b_min: -0.2,
            b_max: 0.0,
            f_min: 0.5,
            f_max: 1.5,
            nb: 3,
            nf: 3,
            gap_min: 0.0,
        };
        let g = scan_region(&spec).unwrap();
        assert!(g.cells().iter().all(|c| !c.feasible));
        assert_eq!(g.feasible_fraction(), 0.0);
        assert!(g.component_sizes().is_empty());
    }

    #[test]
    fn csv_and_pgm_shapes() {
        let g = scan_region(&small_spec()).unwrap();
        let mut csv = Vec::new();
        g.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "b_over_d,f_over_d,feasible,a_over_d,e_over_d,gap_over_d"
        );
        assert_eq!(lines.count(), 25);
        for line in text.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 6);
            match fields[2] {
                "1" => assert!(fields[3..].iter().all(|x| x.parse::<f64>().is_ok())),
                "0" => assert!(fields[3..].iter().all(|x| x.is_empty())),
                other => panic!("bad feasible flag {other}"),
            }
        }

        let mut pgm = Vec::new();
        g.write_pgm(&mut pgm).unwrap();
        let text = String::from_utf8(pgm).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("P2"));
        assert_eq!(lines.next(), Some("5 5"));
        assert_eq!(lines.next(), Some("255"));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 5);
        for row in rows {
            assert_eq!(row.split_whitespace().count(), 5);
            assert!(row.split_whitespace().all(|p| p == "0" || p == "255"));
        }
    }

    #[test]
    fn component_sizes_counts_the_plus_shape() {
        // Build a grid by hand: feasibility pattern
        //   . X .
        //   X X X
        //   . X .
        // is one 4-connected component of size 5.
        let sol = crate::ce3::solve(0.3, 1.0, 1.0, 0.2).unwrap().remove(0);
        let mk = |feasible: bool| RegionCell {
            feasible,
            best: feasible.then_some(sol),
        };
        let pattern = [false, true, false, true, true, true, false, true, false];
        let g = RegionGrid {
            b_axis: vec![0.1, 0.2, 0.3],
            f_axis: vec![0.5, 1.0, 1.5],
            cells: pattern.iter().map(|&p| mk(p)).collect(),
            gap_min: 0.2,
        };
        assert_eq!(g.component_sizes(), vec![5]);
        assert!((g.feasible_fraction() - 5.0 / 9.0).abs() < 1e-15);
        assert_eq!(g.nearest_cell(0.21, 1.4), (1, 2));
    }
}
