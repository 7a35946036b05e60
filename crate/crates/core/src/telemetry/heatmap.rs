use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::geom::{Point, Rect};

/// A regular grid anchored at `origin` (the lower corner of cell (0, 0)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub origin: Point,
    pub cell_size: f64,
    pub width: usize,
    pub height: usize,
}

impl GridSpec {
    /// The smallest grid of `cell_size` cells covering `extent`, including
    /// its upper boundary.
    pub fn covering(extent: Rect, cell_size: f64) -> Self {
        assert!(cell_size > 0.0, "cell size must be positive");
        GridSpec {
            origin: Point::new(extent.x_min, extent.y_min),
            cell_size,
            width: (extent.width() / cell_size).floor() as usize + 1,
            height: (extent.height() / cell_size).floor() as usize + 1,
        }
    }

    /// Cell (column, row) holding `p`, if inside the grid.
    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        let col = ((p.x - self.origin.x) / self.cell_size).floor();
        let row = ((p.y - self.origin.y) / self.cell_size).floor();
        let inside = col >= 0.0 && row >= 0.0 && (col as usize) < self.width && (row as usize) < self.height;
        inside.then_some((col as usize, row as usize))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeatMode {
    /// Each point adds 1 to its cell.
    Bin,
    /// Each point spreads unit mass over cells whose centres lie within
    /// 3 sigma, Gaussian-weighted and renormalised.
    Gaussian { sigma: f64 },
}

impl fmt::Display for HeatMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeatMode::Bin => f.write_str("bin"),
            HeatMode::Gaussian { sigma } => write!(f, "gaussian:{sigma}"),
        }
    }
}

impl FromStr for HeatMode {
    type Err = String;

    /// `bin` or `gaussian:SIGMA`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            None if s == "bin" => Ok(HeatMode::Bin),
            Some(("gaussian", sigma)) => match sigma.parse::<f64>() {
                Ok(sigma) if sigma > 0.0 && sigma.is_finite() => Ok(HeatMode::Gaussian { sigma }),
                _ => Err(format!("invalid gaussian sigma {sigma:?}")),
            },
            _ => Err(format!("unknown heat-map mode {s:?}; expected bin or gaussian:SIGMA")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub spec: GridSpec,
    // row-major, row 0 at origin.y
    values: Vec<f64>,
}

impl DensityGrid {
    pub fn zeros(spec: GridSpec) -> Self {
        DensityGrid {
            spec,
            values: vec![0.0; spec.width * spec.height],
        }
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.spec.width + col]
    }

    fn add(&mut self, col: usize, row: usize, v: f64) {
        self.values[row * self.spec.width + col] += v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// One CSV line per grid row, row 0 first.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for row in self.values.chunks(self.spec.width) {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Plain (P2) PGM, darker where denser. The top image row is the
    /// highest grid row so that north is up.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> io::Result<()> {
        let max = self.max();
        writeln!(w, "P2\n{} {}\n255", self.spec.width, self.spec.height)?;
        for row in self.values.chunks(self.spec.width).rev() {
            let px: Vec<String> = row
                .iter()
                .map(|v| {
                    let level = if max > 0.0 { (v / max * 255.0).round() as u32 } else { 0 };
                    (255 - level.min(255)).to_string()
                })
                .collect();
            writeln!(w, "{}", px.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapResult {
    pub grid: DensityGrid,
    /// Points outside the grid; they add no mass.
    pub out_of_extent: usize,
}

pub fn heatmap(points: &[Point], spec: GridSpec, mode: HeatMode) -> HeatmapResult {
    let mut grid = DensityGrid::zeros(spec);
    let mut out_of_extent = 0;
    for &p in points {
        let Some((col, row)) = spec.cell_of(p) else {
            out_of_extent += 1;
            continue;
        };
        match mode {
            HeatMode::Bin => grid.add(col, row, 1.0),
            HeatMode::Gaussian { sigma } => spread(&mut grid, p, col, row, sigma),
        }
    }
    HeatmapResult { grid, out_of_extent }
}

fn spread(grid: &mut DensityGrid, p: Point, col: usize, row: usize, sigma: f64) {
    let spec = grid.spec;
    let cs = spec.cell_size;
    // work relative to the origin so shifting points and grid together is exact
    let rx = p.x - spec.origin.x;
    let ry = p.y - spec.origin.y;
    let reach = 3.0 * sigma;
    let span = |centre: f64, n: usize| {
        let lo = ((centre - reach) / cs - 0.5).ceil().max(0.0) as usize;
        let hi = (((centre + reach) / cs - 0.5).floor().max(-1.0) + 1.0) as usize;
        lo..hi.min(n)
    };
    let mut weights = Vec::new();
    let mut sum = 0.0;
    for r in span(ry, spec.height) {
        let dy = (r as f64 + 0.5) * cs - ry;
        for c in span(rx, spec.width) {
            let dx = (c as f64 + 0.5) * cs - rx;
            let d2 = dx * dx + dy * dy;
            if d2 <= reach * reach {
                let w = (-d2 / (2.0 * sigma * sigma)).exp();
                weights.push((c, r, w));
                sum += w;
            }
        }
    }
    if sum > 0.0 {
        for (c, r, w) in weights {
            grid.add(c, r, w / sum);
        }
    } else {
        // kernel narrower than a cell
        grid.add(col, row, 1.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> GridSpec {
        GridSpec::covering(Rect::new(0.0, 0.0, 100.0, 50.0).unwrap(), 10.0)
    }

    #[test]
    fn covering_includes_upper_boundary() {
        let s = spec();
        assert_eq!((s.width, s.height), (11, 6));
        assert_eq!(s.cell_of(Point::new(100.0, 50.0)), Some((10, 5)));
        assert_eq!(s.cell_of(Point::new(0.0, 0.0)), Some((0, 0)));
        assert_eq!(s.cell_of(Point::new(-0.1, 0.0)), None);
        assert_eq!(s.cell_of(Point::new(110.0, 0.0)), None);
    }

    #[test]
    fn identical_points_share_a_cell() {
        let pts = vec![Point::new(15.0, 25.0); 3];
        let h = heatmap(&pts, spec(), HeatMode::Bin);
        assert_eq!(h.grid.get(1, 2), 3.0);
        assert_eq!(h.grid.total(), 3.0);
    }

    #[test]
    fn gaussian_conserves_mass() {
        let pts = vec![Point::new(0.5, 0.5), Point::new(55.0, 25.0), Point::new(99.0, 49.0), Point::new(500.0, 0.0)];
        let h = heatmap(&pts, spec(), HeatMode::Gaussian { sigma: 12.0 });
        assert_eq!(h.out_of_extent, 1);
        assert!((h.grid.total() - 3.0).abs() < 1e-9);
        // narrow kernel falls back to the point's own cell
        let h = heatmap(&pts[..1], spec(), HeatMode::Gaussian { sigma: 0.1 });
        assert_eq!(h.grid.get(0, 0), 1.0);
    }

    #[test]
    fn gaussian_is_symmetric_around_cell_centre() {
        let h = heatmap(&[Point::new(55.0, 25.0)], spec(), HeatMode::Gaussian { sigma: 10.0 });
        let g = &h.grid;
        assert!((g.get(4, 2) - g.get(6, 2)).abs() < 1e-15);
        assert!((g.get(5, 1) - g.get(5, 3)).abs() < 1e-15);
        assert!(g.get(5, 2) > g.get(4, 2));
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("bin".parse::<HeatMode>().unwrap(), HeatMode::Bin);
        assert_eq!("gaussian:2.5".parse::<HeatMode>().unwrap(), HeatMode::Gaussian { sigma: 2.5 });
        assert!("gaussian:-1".parse::<HeatMode>().is_err());
        assert!("kde".parse::<HeatMode>().is_err());
    }

    #[test]
    fn outputs() {
        let s = GridSpec::covering(Rect::new(0.0, 0.0, 10.0, 10.0).unwrap(), 10.0);
        let h = heatmap(&[Point::new(1.0, 1.0), Point::new(1.0, 1.0), Point::new(15.0, 15.0)], s, HeatMode::Bin);
        let mut csv = Vec::new();
        h.grid.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "2,0\n0,1\n");
        let mut pgm = Vec::new();
        h.grid.write_pgm(&mut pgm).unwrap();
        assert_eq!(String::from_utf8(pgm).unwrap(), "P2\n2 2\n255\n255 127\n0 255\n");
    }
}
