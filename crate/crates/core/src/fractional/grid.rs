use crate::error::{Error, Result};

/// Ascending sample points covering `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    uniform: bool,
}

impl Grid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Structure(format!("grid needs at least 2 nodes, got {}", nodes.len())));
        }
        if nodes.iter().any(|v| !v.is_finite()) {
            return Err(Error::Structure("grid nodes must be finite".into()));
        }
        if let Some(w) = nodes.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Structure(format!("grid nodes not strictly increasing at index {}", w + 1)));
        }
        let n = nodes.len() - 1;
        let (a, b) = (nodes[0], nodes[n]);
        let h = (b - a) / n as f64;
        let uniform = nodes
            .iter()
            .enumerate()
            .all(|(k, &x)| (x - (a + k as f64 * h)).abs() <= 1e-12 * (b - a).max(1.0));
        Ok(Self { nodes, uniform })
    }

    /// `panels + 1` equally spaced nodes; the endpoints are exact.
    pub fn uniform(a: f64, b: f64, panels: usize) -> Result<Self> {
        if panels == 0 || !(b > a) {
            return Err(Error::Structure(format!("bad uniform grid [{a}, {b}] with {panels} panels")));
        }
        let h = (b - a) / panels as f64;
        let mut nodes: Vec<f64> = (0..=panels).map(|k| a + k as f64 * h).collect();
        nodes[panels] = b;
        Ok(Self { nodes, uniform: true })
    }

    pub fn a(&self) -> f64 {
        self.nodes[0]
    }

    pub fn b(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn panels(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn uniform_step(&self) -> Option<f64> {
        self.uniform.then(|| (self.b() - self.a()) / self.panels() as f64)
    }

    /// Index `j` of the panel `[x_j, x_{j+1}]` containing `t` (clamped).
    pub fn locate(&self, t: f64) -> usize {
        let n = self.panels();
        if t <= self.nodes[0] {
            return 0;
        }
        if t >= self.nodes[n] {
            return n - 1;
        }
        if let Some(h) = self.uniform_step() {
            let j = ((t - self.a()) / h).floor() as usize;
            return j.min(n - 1);
        }
        match self.nodes.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(k) => k.min(n - 1),
            Err(k) => k - 1,
        }
    }
}

/// A function known through its values at the nodes of a grid; between nodes
/// it is read as the piecewise-linear interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Structure(format!(
                "{} values for {} grid nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Structure(format!("non-finite sample at node {k}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        Self::new(grid, values)
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn interpolate(&self, t: f64) -> f64 {
        let j = self.grid.locate(t);
        let (x0, x1) = (self.grid.nodes()[j], self.grid.nodes()[j + 1]);
        let (y0, y1) = (self.values[j], self.values[j + 1]);
        let w = (t - x0) / (x1 - x0);
        y0 + (y1 - y0) * w
    }
}
