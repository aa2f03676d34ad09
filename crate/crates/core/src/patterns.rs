//! Observation windows, finite point configurations and the partitions used
//! by the binned scores.
//!
//! Spatial points are stored flat (`dim` coordinates per point). Windows are
//! axis-aligned boxes in one to three dimensions.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

/// Axis-aligned box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Window {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::InvalidWindow(format!(
                "lower has {} coordinates, upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.is_empty() || lower.len() > MAX_DIM {
            return Err(Error::InvalidWindow(format!(
                "dimension {} not in 1..={MAX_DIM}",
                lower.len()
            )));
        }
        for (axis, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidWindow(format!(
                    "axis {axis}: need lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The unit square `[0,1]²`.
    pub fn unit_square() -> Self {
        Self {
            lower: vec![0.0, 0.0],
            upper: vec![1.0, 1.0],
        }
    }

    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        Self::new(vec![x0, y0], vec![x1, y1])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.side(k)).product()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (lo, hi))| *x >= *lo && *x <= *hi)
    }

    /// Window grown by `margin` on every side.
    pub fn expanded(&self, margin: f64) -> Result<Self> {
        Self::new(
            self.lower.iter().map(|v| v - margin).collect(),
            self.upper.iter().map(|v| v + margin).collect(),
        )
    }

    /// The eroded window `W ⊖ r`, or `None` when it is empty.
    pub fn eroded(&self, r: f64) -> Option<Self> {
        Self::new(
            self.lower.iter().map(|v| v + r).collect(),
            self.upper.iter().map(|v| v - r).collect(),
        )
        .ok()
    }

    /// Volume of `W ∩ (W + z)` for a displacement `z`.
    pub fn overlap_with_shift(&self, z: &[f64]) -> f64 {
        z.iter()
            .enumerate()
            .map(|(k, dz)| (self.side(k) - dz.abs()).max(0.0))
            .product()
    }

    pub fn min_side(&self) -> f64 {
        (0..self.dim())
            .map(|k| self.side(k))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A finite set of points inside a window. Point order carries no meaning.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialPattern {
    coords: Vec<f64>,
    window: Window,
}

impl SpatialPattern {
    /// Builds a pattern from flat coordinates (`dim` values per point).
    pub fn new(coords: Vec<f64>, window: Window) -> Result<Self> {
        let d = window.dim();
        if coords.len() % d != 0 {
            return Err(Error::InvalidWindow(format!(
                "{} coordinates do not split into points of dimension {d}",
                coords.len()
            )));
        }
        for (index, p) in coords.chunks_exact(d).enumerate() {
            if !window.contains(p) {
                return Err(Error::PointOutsideWindow {
                    index,
                    coords: p.to_vec(),
                });
            }
        }
        Ok(Self { coords, window })
    }

    pub fn from_points(points: &[[f64; 2]], window: Window) -> Result<Self> {
        Self::new(points.iter().flatten().copied().collect(), window)
    }

    pub fn empty(window: Window) -> Self {
        Self {
            coords: Vec::new(),
            window,
        }
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim())
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn read_csv<R: Read>(reader: R, window: Window) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let d = window.dim();
        let headers = rdr.headers()?.clone();
        let expected = ["x", "y", "z"];
        if headers.len() != d || headers.iter().zip(expected).any(|(h, e)| h.trim() != e) {
            return Err(Error::InvalidWindow(format!(
                "expected header {:?}, found {:?}",
                &expected[..d],
                headers.iter().collect::<Vec<_>>()
            )));
        }
        let mut coords = Vec::new();
        for record in rdr.records() {
            let record = record?;
            for field in record.iter() {
                coords.push(parse_field(field)?);
            }
        }
        Self::new(coords, window)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(&["x", "y", "z"][..self.dim()])?;
        for p in self.points() {
            wtr.write_record(p.iter().map(|v| format!("{v}")))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn parse_field(field: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Domain(format!("cannot parse `{field}` as a number")))
}

/// Event times `0 < t₁ < … < tₙ ≤ T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalPattern {
    times: Vec<f64>,
    horizon: f64,
}

impl TemporalPattern {
    pub fn new(times: Vec<f64>, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidTimes(format!("horizon {horizon} must be positive")));
        }
        let mut prev = 0.0;
        for (i, &t) in times.iter().enumerate() {
            if !(t > prev && t <= horizon) {
                return Err(Error::InvalidTimes(format!(
                    "time #{i} = {t} breaks 0 < t₁ < … ≤ {horizon}"
                )));
            }
            prev = t;
        }
        Ok(Self { times, horizon })
    }

    pub fn empty(horizon: f64) -> Result<Self> {
        Self::new(Vec::new(), horizon)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn read_csv<R: Read>(reader: R, horizon: f64) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 1 || headers[0].trim() != "t" {
            return Err(Error::InvalidTimes(format!(
                "expected header `t`, found {:?}",
                headers.iter().collect::<Vec<_>>()
            )));
        }
        let mut times = Vec::new();
        for record in rdr.records() {
            times.push(parse_field(&record?[0])?);
        }
        Self::new(times, horizon)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["t"])?;
        for t in &self.times {
            wtr.write_record([format!("{t}")])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Regular grid of axis-aligned cells covering a window.
///
/// Cells are half-open `[lo, hi)` along each axis, except the last cell per
/// axis which is closed, so every point of the window lies in exactly one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPartition {
    window: Window,
    cells_per_axis: Vec<usize>,
}

impl GridPartition {
    pub fn new(window: Window, cells_per_axis: Vec<usize>) -> Result<Self> {
        if cells_per_axis.len() != window.dim() || cells_per_axis.contains(&0) {
            return Err(Error::InvalidPartition(format!(
                "need one positive cell count per axis, got {cells_per_axis:?}"
            )));
        }
        Ok(Self {
            window,
            cells_per_axis,
        })
    }

    /// `n` cells along every axis, `n^d` cells in total.
    pub fn uniform(window: Window, n: usize) -> Result<Self> {
        let d = window.dim();
        Self::new(window, vec![n; d])
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn cells_per_axis(&self) -> &[usize] {
        &self.cells_per_axis
    }

    pub fn num_cells(&self) -> usize {
        self.cells_per_axis.iter().product()
    }

    fn axis_edge(&self, axis: usize, i: usize) -> f64 {
        let n = self.cells_per_axis[axis];
        if i == n {
            return self.window.upper()[axis];
        }
        self.window.lower()[axis] + self.window.side(axis) * (i as f64) / (n as f64)
    }

    fn axis_index(&self, axis: usize, x: f64) -> usize {
        let n = self.cells_per_axis[axis];
        let lo = self.window.lower()[axis];
        let raw = ((x - lo) / self.window.side(axis) * n as f64).floor();
        let mut i = if raw < 0.0 { 0 } else { (raw as usize).min(n - 1) };
        // keep the index consistent with the edges used by `cell`
        while i > 0 && x < self.axis_edge(axis, i) {
            i -= 1;
        }
        while i + 1 < n && x >= self.axis_edge(axis, i + 1) {
            i += 1;
        }
        i
    }

    /// Multi-index of a cell, last axis fastest.
    pub fn cell_multi_index(&self, flat: usize) -> Vec<usize> {
        let mut rem = flat;
        let mut idx = vec![0; self.window.dim()];
        for axis in (0..self.window.dim()).rev() {
            let n = self.cells_per_axis[axis];
            idx[axis] = rem % n;
            rem /= n;
        }
        idx
    }

    pub fn cell_index_of(&self, p: &[f64]) -> usize {
        p.iter()
            .enumerate()
            .fold(0, |acc, (axis, &x)| acc * self.cells_per_axis[axis] + self.axis_index(axis, x))
    }

    pub fn cell(&self, flat: usize) -> Window {
        let idx = self.cell_multi_index(flat);
        let lower = idx
            .iter()
            .enumerate()
            .map(|(axis, &i)| self.axis_edge(axis, i))
            .collect();
        let upper = idx
            .iter()
            .enumerate()
            .map(|(axis, &i)| self.axis_edge(axis, i + 1))
            .collect();
        Window { lower, upper }
    }

    pub fn cells(&self) -> impl Iterator<Item = Window> + '_ {
        (0..self.num_cells()).map(|i| self.cell(i))
    }

    pub fn count(&self, pattern: &SpatialPattern) -> Result<Vec<usize>> {
        count_in_cells(pattern, self)
    }
}

/// Partition of `(0, T]` into left-open right-closed intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalPartition {
    breakpoints: Vec<f64>,
}

impl IntervalPartition {
    pub fn new(breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || breakpoints[0] != 0.0 {
            return Err(Error::InvalidPartition(
                "breakpoints must start at 0 and define at least one interval".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) || !breakpoints.iter().all(|b| b.is_finite()) {
            return Err(Error::InvalidPartition("breakpoints must be strictly increasing".into()));
        }
        Ok(Self { breakpoints })
    }

    /// `n` intervals `((i-1)T/n, iT/n]`.
    pub fn uniform(horizon: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPartition("need at least one interval".into()));
        }
        let mut b: Vec<f64> = (0..=n).map(|i| horizon * i as f64 / n as f64).collect();
        b[n] = horizon;
        Self::new(b)
    }

    pub fn horizon(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Interval `i` as `(a, b]`.
    pub fn interval(&self, i: usize) -> (f64, f64) {
        (self.breakpoints[i], self.breakpoints[i + 1])
    }

    pub fn intervals(&self) -> impl ExactSizeIterator<Item = (f64, f64)> + '_ {
        self.breakpoints.windows(2).map(|w| (w[0], w[1]))
    }

    /// Index of the interval containing `t ∈ (0, T]`.
    pub fn interval_index_of(&self, t: f64) -> Option<usize> {
        if !(t > 0.0 && t <= self.horizon()) {
            return None;
        }
        let j = self.breakpoints.partition_point(|&a| a < t);
        Some(j - 1)
    }
}

pub fn count_in_cells(pattern: &SpatialPattern, partition: &GridPartition) -> Result<Vec<usize>> {
    if pattern.window() != partition.window() {
        return Err(Error::WindowMismatch);
    }
    let mut counts = vec![0; partition.num_cells()];
    for p in pattern.points() {
        counts[partition.cell_index_of(p)] += 1;
    }
    Ok(counts)
}

pub fn count_in_intervals(pattern: &TemporalPattern, partition: &IntervalPartition) -> Result<Vec<usize>> {
    if pattern.horizon() != partition.horizon() {
        return Err(Error::HorizonMismatch {
            partition: partition.horizon(),
            pattern: pattern.horizon(),
        });
    }
    let mut counts = vec![0; partition.len()];
    // times are sorted, so a single merge pass suffices
    let mut i = 0;
    for &t in pattern.times() {
        while t > partition.breakpoints[i + 1] {
            i += 1;
        }
        counts[i] += 1;
    }
    Ok(counts)
}

/// All ordered displacements `x_i − x_j`, `i ≠ j`, as flat coordinates.
pub fn pairwise_differences(pattern: &SpatialPattern) -> Vec<Vec<f64>> {
    let n = pattern.len();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.push(
                    pattern
                        .point(i)
                        .iter()
                        .zip(pattern.point(j))
                        .map(|(a, b)| a - b)
                        .collect(),
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pattern(n: usize, seed: u64) -> SpatialPattern {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coords = (0..2 * n).map(|_| rng.gen::<f64>()).collect();
        SpatialPattern::new(coords, Window::unit_square()).unwrap()
    }

    #[test]
    fn window_validation() {
        assert!(Window::new(vec![0.0], vec![0.0]).is_err());
        assert!(Window::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(Window::new(vec![0.0; 4], vec![1.0; 4]).is_err());
        let w = Window::rectangle(0.0, 2.0, 1.0, 4.0).unwrap();
        assert_eq!(w.volume(), 6.0);
        assert!(w.eroded(1.0).is_none());
        assert_eq!(w.eroded(0.5).unwrap().volume(), 2.0);
    }

    #[test]
    fn point_outside_window_rejected() {
        let err = SpatialPattern::from_points(&[[0.5, 1.5]], Window::unit_square()).unwrap_err();
        assert!(matches!(err, Error::PointOutsideWindow { index: 0, .. }));
    }

    #[test]
    fn temporal_order_enforced() {
        assert!(TemporalPattern::new(vec![1.0, 1.0], 2.0).is_err());
        assert!(TemporalPattern::new(vec![0.0], 2.0).is_err());
        assert!(TemporalPattern::new(vec![2.5], 2.0).is_err());
        assert!(TemporalPattern::new(vec![0.5, 2.0], 2.0).is_ok());
    }

    #[test]
    fn empty_pattern_counts_zero() {
        let g = GridPartition::uniform(Window::unit_square(), 3).unwrap();
        let c = count_in_cells(&SpatialPattern::empty(Window::unit_square()), &g).unwrap();
        assert_eq!(c, vec![0; 9]);
    }

    #[test]
    fn centre_point_goes_to_upper_right_cell() {
        let g = GridPartition::uniform(Window::unit_square(), 2).unwrap();
        let p = SpatialPattern::from_points(&[[0.5, 0.5]], Window::unit_square()).unwrap();
        let c = count_in_cells(&p, &g).unwrap();
        let idx = c.iter().position(|&v| v == 1).unwrap();
        assert_eq!(c.iter().sum::<usize>(), 1);
        let cell = g.cell(idx);
        assert_eq!(cell.lower(), &[0.5, 0.5]);
        assert_eq!(cell.upper(), &[1.0, 1.0]);
    }

    #[test]
    fn boundary_points_land_in_closed_last_cell() {
        let g = GridPartition::uniform(Window::unit_square(), 4).unwrap();
        let p = SpatialPattern::from_points(&[[1.0, 1.0], [0.0, 0.0], [1.0, 0.25]], Window::unit_square()).unwrap();
        let c = count_in_cells(&p, &g).unwrap();
        assert_eq!(c[15], 1);
        assert_eq!(c[0], 1);
        // x in last column, y = 0.25 starts the second row
        assert_eq!(c[3 * 4 + 1], 1);
    }

    #[test]
    fn cell_counts_match_brute_force() {
        let p = random_pattern(100, 11);
        let g = GridPartition::uniform(Window::unit_square(), 4).unwrap();
        let counts = count_in_cells(&p, &g).unwrap();
        assert_eq!(counts.iter().sum::<usize>(), 100);
        for (i, cell) in g.cells().enumerate() {
            let brute = p
                .points()
                .filter(|q| {
                    (0..2).all(|k| {
                        let closed = cell.upper()[k] == 1.0;
                        q[k] >= cell.lower()[k] && (q[k] < cell.upper()[k] || (closed && q[k] <= 1.0))
                    })
                })
                .count();
            assert_eq!(counts[i], brute, "cell {i}");
        }
    }

    #[test]
    fn mismatched_windows_rejected() {
        let p = random_pattern(5, 1);
        let g = GridPartition::uniform(Window::rectangle(0.0, 2.0, 0.0, 1.0).unwrap(), 2).unwrap();
        assert!(matches!(count_in_cells(&p, &g), Err(Error::WindowMismatch)));
    }

    #[test]
    fn refined_grid_nests() {
        let coarse = GridPartition::uniform(Window::unit_square(), 3).unwrap();
        let fine = GridPartition::uniform(Window::unit_square(), 6).unwrap();
        for f in fine.cells() {
            let centre: Vec<f64> = (0..2).map(|k| 0.5 * (f.lower()[k] + f.upper()[k])).collect();
            let c = coarse.cell(coarse.cell_index_of(&centre));
            for k in 0..2 {
                assert!(f.lower()[k] >= c.lower()[k] - 1e-15 && f.upper()[k] <= c.upper()[k] + 1e-15);
            }
        }
        let p = random_pattern(200, 5);
        let cc = coarse.count(&p).unwrap();
        let fc = fine.count(&p).unwrap();
        let mut agg = vec![0; 9];
        for (i, v) in fc.iter().enumerate() {
            let m = fine.cell_multi_index(i);
            agg[(m[0] / 2) * 3 + m[1] / 2] += v;
        }
        assert_eq!(agg, cc);
    }

    #[test]
    fn interval_counts() {
        let part = IntervalPartition::new(vec![0.0, 1.0, 2.0]).unwrap();
        let p = TemporalPattern::new(vec![0.5, 1.5], 2.0).unwrap();
        assert_eq!(count_in_intervals(&p, &part).unwrap(), vec![1, 1]);
        let edge = TemporalPattern::new(vec![1.0, 2.0], 2.0).unwrap();
        assert_eq!(count_in_intervals(&edge, &part).unwrap(), vec![1, 1]);
        let empty = TemporalPattern::empty(2.0).unwrap();
        assert_eq!(count_in_intervals(&empty, &part).unwrap(), vec![0, 0]);
        let other = TemporalPattern::empty(3.0).unwrap();
        assert!(matches!(count_in_intervals(&other, &part), Err(Error::HorizonMismatch { .. })));
    }

    #[test]
    fn interval_counts_match_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut times: Vec<f64> = (0..500).map(|_| rng.gen_range(0.0..50.0)).filter(|t| *t > 0.0).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let p = TemporalPattern::new(times, 50.0).unwrap();
        let part = IntervalPartition::uniform(50.0, 1000).unwrap();
        let counts = count_in_intervals(&p, &part).unwrap();
        assert_eq!(counts.iter().sum::<usize>(), p.len());
        for (i, (a, b)) in part.intervals().enumerate() {
            let brute = p.times().iter().filter(|&&t| t > a && t <= b).count();
            assert_eq!(counts[i], brute);
        }
    }

    #[test]
    fn pairwise_differences_small_cases() {
        let w = Window::unit_square();
        assert!(pairwise_differences(&SpatialPattern::empty(w.clone())).is_empty());
        let one = SpatialPattern::from_points(&[[0.2, 0.3]], w.clone()).unwrap();
        assert!(pairwise_differences(&one).is_empty());
        let two = SpatialPattern::from_points(&[[0.2, 0.3], [0.5, 0.9]], w).unwrap();
        let d = pairwise_differences(&two);
        assert_eq!(d.len(), 2);
        assert_eq!(d[0], vec![-d[1][0], -d[1][1]]);
    }

    #[test]
    fn pairwise_differences_match_double_loop() {
        let p = random_pattern(10, 2);
        let mut got = pairwise_differences(&p);
        let mut brute = Vec::new();
        let pts: Vec<&[f64]> = p.points().collect();
        for a in &pts {
            for b in &pts {
                if !std::ptr::eq(*a, *b) {
                    brute.push(vec![a[0] - b[0], a[1] - b[1]]);
                }
            }
        }
        assert_eq!(got.len(), 90);
        let key = |v: &Vec<f64>| (v[0].to_bits(), v[1].to_bits());
        got.sort_by_key(key);
        brute.sort_by_key(key);
        assert_eq!(got, brute);
    }

    #[test]
    fn csv_round_trip() {
        let p = random_pattern(7, 9);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"x,y\n"));
        let back = SpatialPattern::read_csv(buf.as_slice(), Window::unit_square()).unwrap();
        assert_eq!(back, p);

        let t = TemporalPattern::new(vec![0.25, 1.0, 3.5], 4.0).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(TemporalPattern::read_csv(buf.as_slice(), 4.0).unwrap(), t);
        assert!(TemporalPattern::read_csv(&b"x\n1\n"[..], 4.0).is_err());
    }
}
