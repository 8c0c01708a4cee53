//! Functions known through samples on a strictly increasing grid.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::scalar::{linspace, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction<T> {
    x: Vec<T>,
    u: Vec<T>,
}

impl<T: Real> SampledFunction<T> {
    pub fn new(x: Vec<T>, u: Vec<T>) -> Result<Self> {
        if x.len() != u.len() {
            return Err(Error::InvalidInput(format!("{} abscissae but {} values", x.len(), u.len())));
        }
        if x.len() < 2 {
            return Err(Error::InvalidInput("a sampled function needs at least two points".into()));
        }
        if x.iter().chain(&u).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("samples must be finite".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("abscissae must be strictly increasing".into()));
        }
        Ok(Self { x, u })
    }

    /// Values on `0, 1, 2, ...`; handy when only the value sequence matters.
    pub fn from_values(u: Vec<T>) -> Result<Self> {
        let x = (0..u.len()).map(T::from_usize_lossy).collect();
        Self::new(x, u)
    }

    pub fn from_fn(x: Vec<T>, f: impl Fn(T) -> T) -> Result<Self> {
        let u = x.iter().map(|&v| f(v)).collect();
        Self::new(x, u)
    }

    pub fn uniform(lo: T, hi: T, n: usize, f: impl Fn(T) -> T) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput("a sampled function needs at least two points".into()));
        }
        Self::from_fn(linspace(lo, hi, n), f)
    }

    pub fn abscissae(&self) -> &[T] {
        &self.x
    }

    pub fn values(&self) -> &[T] {
        &self.u
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn start(&self) -> T {
        self.x[0]
    }

    pub fn end(&self) -> T {
        self.x[self.x.len() - 1]
    }

    /// Same values on new abscissae.
    pub fn with_abscissae(&self, x: Vec<T>) -> Result<Self> {
        Self::new(x, self.u.clone())
    }

    pub fn map_values(&self, f: impl Fn(T) -> T) -> Self {
        Self { x: self.x.clone(), u: self.u.iter().map(|&v| f(v)).collect() }
    }

    /// Samples at indices `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Self> {
        Self::new(self.x[range.clone()].to_vec(), self.u[range].to_vec())
    }

    pub fn min_value(&self) -> T {
        self.u.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_value(&self) -> T {
        self.u.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Piecewise-linear interpolation; `None` outside `[start, end]`.
    pub fn interpolate(&self, x: T) -> Option<T> {
        if x < self.start() || x > self.end() {
            return None;
        }
        let i = self.x.partition_point(|&v| v <= x);
        if i == 0 {
            return Some(self.u[0]);
        }
        if i == self.x.len() {
            return Some(self.u[i - 1]);
        }
        let (x0, x1) = (self.x[i - 1], self.x[i]);
        if x == x0 {
            return Some(self.u[i - 1]);
        }
        let t = (x - x0) / (x1 - x0);
        Some(self.u[i - 1] + t * (self.u[i] - self.u[i - 1]))
    }

    /// True when the spacing is constant to relative `1e-9`.
    pub fn is_uniform(&self) -> bool {
        let h = (self.end() - self.start()) / T::from_usize_lossy(self.len() - 1);
        self.x.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= T::lit(1e-9) * h)
    }

    /// Writes a two-column `x,u` CSV, optionally preceded by a `#` comment line.
    pub fn write_csv<W: Write>(&self, out: W, comment: Option<&str>) -> Result<()> {
        let mut out = out;
        if let Some(c) = comment {
            writeln!(out, "# {c}").map_err(io_err)?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "u"]).map_err(csv_err)?;
        for (x, u) in self.x.iter().zip(&self.u) {
            w.write_record([x.to_string(), u.to_string()]).map_err(csv_err)?;
        }
        w.flush().map_err(io_err)
    }

    /// Reads the format written by [`write_csv`](Self::write_csv); `#` lines are skipped.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(input);
        let (mut x, mut u) = (Vec::new(), Vec::new());
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let field = |i: usize| -> Result<T> {
                rec.get(i)
                    .and_then(|v| v.parse::<f64>().ok())
                    .and_then(T::from_f64)
                    .ok_or_else(|| Error::InvalidInput(format!("record {}: bad column {i}", line + 1)))
            };
            x.push(field(0)?);
            u.push(field(1)?);
        }
        Self::new(x, u)
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::InvalidInput(format!("i/o: {e}"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

/// Both functions interpolated on the union of their abscissae inside the common range.
fn common_grid<T: Real>(f: &SampledFunction<T>, g: &SampledFunction<T>) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    let lo = f.start().max(g.start());
    let hi = f.end().min(g.end());
    if !(hi > lo) {
        return Err(Error::EmptyOverlap);
    }
    let mut grid: Vec<T> = f.abscissae().iter().chain(g.abscissae()).copied().filter(|&x| x >= lo && x <= hi).collect();
    grid.push(lo);
    grid.push(hi);
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite abscissae"));
    grid.dedup();
    let fv = grid.iter().map(|&x| f.interpolate(x).expect("inside range")).collect();
    let gv = grid.iter().map(|&x| g.interpolate(x).expect("inside range")).collect();
    Ok((grid, fv, gv))
}

/// Trapezoidal `L^1` norm of `f - g` over the common range.
pub fn l1_distance<T: Real>(f: &SampledFunction<T>, g: &SampledFunction<T>) -> Result<T> {
    let (x, a, b) = common_grid(f, g)?;
    let d: Vec<T> = a.iter().zip(&b).map(|(&p, &q)| (p - q).abs()).collect();
    let half = T::lit(0.5);
    Ok(x.windows(2).zip(d.windows(2)).map(|(xw, dw)| half * (xw[1] - xw[0]) * (dw[0] + dw[1])).sum())
}

/// Largest `|f - g|` on the common grid.
pub fn linf_distance<T: Real>(f: &SampledFunction<T>, g: &SampledFunction<T>) -> Result<T> {
    let (_, a, b) = common_grid(f, g)?;
    Ok(a.iter().zip(&b).map(|(&p, &q)| (p - q).abs()).fold(T::zero(), T::max))
}
