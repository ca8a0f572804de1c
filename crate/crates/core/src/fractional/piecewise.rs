use crate::error::{Error, Result};
use crate::fractional::grid::{Grid, SampledFunction};
use crate::problem::{Branch, Partition};

/// Default sampling density, in panels per unit length.
pub const DEFAULT_DENSITY: f64 = 512.0;

/// One subinterval of the partition with its samples. The first node holds
/// the right limit at `start`, the last node the value at `end`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub branch: Branch,
    pub start: f64,
    pub end: f64,
    pub samples: SampledFunction,
}

/// A function in PC(J, ℝ): continuous on every subinterval of the partition
/// and left-continuous at the breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFunction {
    partition: Partition,
    density: f64,
    segments: Vec<Segment>,
}

/// Even panel count for a segment of the given length.
pub fn panels_for(length: f64, density: f64) -> usize {
    let n = (length * density - 1e-9).ceil().max(2.0) as usize;
    n + n % 2
}

impl PiecewiseFunction {
    /// Sample `f(branch, τ)` on the standard grid of `partition`.
    pub fn from_fn(
        partition: &Partition,
        density: f64,
        mut f: impl FnMut(Branch, f64) -> f64,
    ) -> Result<Self> {
        Self::try_from_fn(partition, density, |b, t| Ok(f(b, t)))
    }

    pub fn try_from_fn(
        partition: &Partition,
        density: f64,
        mut f: impl FnMut(Branch, f64) -> Result<f64>,
    ) -> Result<Self> {
        if !(density > 0.0) || !density.is_finite() {
            return Err(Error::Structure(format!("grid density {density} must be positive")));
        }
        let mut segments = Vec::new();
        for iv in partition.intervals() {
            let grid = Grid::uniform(iv.start, iv.end, panels_for(iv.end - iv.start, density))?;
            let values = grid
                .nodes()
                .iter()
                .map(|&t| f(iv.branch, t))
                .collect::<Result<Vec<_>>>()?;
            let samples = SampledFunction::new(grid, values).map_err(|e| match e {
                Error::Structure(msg) => Error::Evaluation {
                    branch: iv.branch.to_string(),
                    tau: f64::NAN,
                    detail: msg,
                },
                other => other,
            })?;
            segments.push(Segment {
                branch: iv.branch,
                start: iv.start,
                end: iv.end,
                samples,
            });
        }
        Ok(Self {
            partition: partition.clone(),
            density,
            segments,
        })
    }

    pub fn zeros(partition: &Partition, density: f64) -> Result<Self> {
        Self::from_fn(partition, density, |_, _| 0.0)
    }

    /// Build from segment values laid out on the standard grid.
    pub fn from_values(partition: &Partition, density: f64, values: Vec<Vec<f64>>) -> Result<Self> {
        let template = Self::zeros(partition, density)?;
        if values.len() != template.segments.len() {
            return Err(Error::Structure(format!(
                "{} segment value lists for {} segments",
                values.len(),
                template.segments.len()
            )));
        }
        let mut segments = Vec::with_capacity(values.len());
        for (seg, vals) in template.segments.into_iter().zip(values) {
            let samples = SampledFunction::new(seg.samples.grid().clone(), vals)?;
            segments.push(Segment { samples, ..seg });
        }
        Ok(Self {
            partition: partition.clone(),
            density,
            segments,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, branch: Branch) -> Option<&Segment> {
        self.segments.iter().find(|s| s.branch == branch)
    }

    /// Value at τ; a breakpoint returns the left limit, τ = 0 the initial value.
    pub fn eval(&self, tau: f64) -> Result<f64> {
        if tau == 0.0 {
            return Ok(self.segments[0].samples.values()[0]);
        }
        let branch = self.partition.classify(tau)?;
        let seg = self
            .segment(branch)
            .ok_or_else(|| Error::Structure(format!("no segment for {branch}")))?;
        Ok(seg.samples.interpolate(tau))
    }

    /// True when `other` lives on the same partition and node layout.
    pub fn same_layout(&self, other: &PiecewiseFunction) -> bool {
        self.partition == other.partition
            && self.segments.len() == other.segments.len()
            && self
                .segments
                .iter()
                .zip(&other.segments)
                .all(|(a, b)| a.branch == b.branch && a.samples.grid() == b.samples.grid())
    }

    fn check_layout(&self, other: &PiecewiseFunction) -> Result<()> {
        if self.same_layout(other) {
            Ok(())
        } else {
            Err(Error::Structure("piecewise functions live on different grids".into()))
        }
    }

    /// Pointwise `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &PiecewiseFunction, b: f64) -> Result<Self> {
        self.check_layout(other)?;
        let mut out = self.clone();
        for (seg, o) in out.segments.iter_mut().zip(&other.segments) {
            for (v, w) in seg.samples.values_mut().iter_mut().zip(o.samples.values()) {
                *v = a * *v + b * w;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &PiecewiseFunction) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    pub fn map(&self, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut out = self.clone();
        for seg in &mut out.segments {
            let nodes = seg.samples.grid().nodes().to_vec();
            for (v, t) in seg.samples.values_mut().iter_mut().zip(nodes) {
                *v = f(t, *v);
            }
        }
        out
    }

    /// Every stored node as `(segment index, branch, τ, value)`, in time order.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, Branch, f64, f64)> + '_ {
        self.segments.iter().enumerate().flat_map(|(i, seg)| {
            seg.samples
                .grid()
                .nodes()
                .iter()
                .zip(seg.samples.values())
                .map(move |(&t, &v)| (i, seg.branch, t, v))
        })
    }

    /// Every other node of each segment; `None` if a segment has an odd
    /// panel count.
    pub fn coarsen(&self) -> Option<Self> {
        let mut segments = Vec::with_capacity(self.segments.len());
        for seg in &self.segments {
            let g = seg.samples.grid();
            if g.panels() % 2 != 0 || g.panels() < 4 {
                return None;
            }
            let grid = Grid::uniform(seg.start, seg.end, g.panels() / 2).ok()?;
            let values = seg.samples.values().iter().step_by(2).copied().collect();
            segments.push(Segment {
                samples: SampledFunction::from_parts_unchecked(grid, values),
                ..seg.clone()
            });
        }
        Some(Self {
            partition: self.partition.clone(),
            density: self.density / 2.0,
            segments,
        })
    }

    /// CSV rows `tau,value,segment_index,branch_tag`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["tau", "value", "segment_index", "branch_tag"])
            .map_err(|e| Error::Io(e.to_string()))?;
        for (i, branch, t, v) in self.nodes() {
            w.write_record([
                format!("{t:.16e}"),
                format!("{v:.16e}"),
                i.to_string(),
                branch.tag().to_string(),
            ])
            .map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}
