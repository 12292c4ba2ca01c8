//! Soft-output depth-first sphere decoder with a single tree search.
//!
//! One traversal of the detection tree finds the maximum-likelihood symbol
//! vector together with, for every bit, the best metric among vectors whose
//! label for that bit disagrees with the ML label (the counter-hypothesis).
//! The max-log LLR of a bit is the gap between the two metrics scaled by
//! `1 / (2 sigma^2)`.
//!
//! Clipping is applied inside the search: a counter-hypothesis metric is never
//! allowed to exceed `lambda_ml + 2 sigma^2 * clip`. The pruning radius is built
//! from those bounded metrics, so a smaller clip level cuts more of the tree
//! while the output stays exactly the element-wise clamp of the unclipped LLRs.
//!
//! Traversal order is fixed: antennas are detected from the last row of `r`
//! upwards, and the children of a node are visited in ascending partial
//! metric, ties broken by ascending constellation index. A node counts as
//! visited when its partial Euclidean distance is tested against the pruning
//! radius; the root is not counted.

use num_complex::Complex64;

use crate::linalg::ComplexMatrix;
use crate::modem::Constellation;
use crate::{Error, Result};

/// Inputs of one soft detection.
#[derive(Debug, Clone, Copy)]
pub struct DetectionProblem<'a> {
    /// Upper-triangular factor with a real positive diagonal.
    pub r: &'a ComplexMatrix,
    /// Rotated received vector `q^H y`.
    pub y_rot: &'a [Complex64],
    pub constellation: &'a Constellation,
    /// Per-dimension noise variance.
    pub sigma2: f64,
    /// LLR magnitude bound; `f64::INFINITY` disables clipping.
    pub clip: f64,
}

impl DetectionProblem<'_> {
    pub fn num_tx(&self) -> usize {
        self.r.cols()
    }

    pub fn num_bits(&self) -> usize {
        self.num_tx() * self.constellation.bits_per_symbol()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.r.rows();
        if self.r.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "r must be square, got {}x{}",
                n,
                self.r.cols()
            )));
        }
        if self.y_rot.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "rotated vector has {} entries, r has {n} rows",
                self.y_rot.len()
            )));
        }
        for i in 0..n {
            let d = self.r[(i, i)];
            if !(d.re > 0.0) || d.im != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "r[{i}][{i}] = {d} is not real positive"
                )));
            }
        }
        if !(self.sigma2 > 0.0) || !self.sigma2.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sigma2 must be positive and finite, got {}",
                self.sigma2
            )));
        }
        if !(self.clip > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "clip level must be positive, got {}",
                self.clip
            )));
        }
        if self
            .y_rot
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidArgument(
                "rotated vector is not finite".into(),
            ));
        }
        Ok(())
    }
}

/// Per-bit LLRs of one channel use, ordered antenna-major with the first
/// label bit of each symbol first.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftDetectionResult {
    pub llrs: Vec<f64>,
    pub visited_nodes: u64,
    /// Smallest `||y_rot - r s||^2` over all symbol vectors.
    pub ml_metric: f64,
    /// Symbol indices of the ML vector, one per antenna.
    pub ml_symbols: Vec<usize>,
}

/// Runs one detection with freshly allocated buffers.
pub fn detect(p: &DetectionProblem<'_>) -> Result<SoftDetectionResult> {
    SphereDecoder::default().detect(p)
}

/// Sphere decoder with working buffers reused across calls.
#[derive(Debug, Default, Clone)]
pub struct SphereDecoder {
    children: Vec<Vec<(f64, usize)>>,
    cursor: Vec<usize>,
    path: Vec<usize>,
    ped: Vec<f64>,
    counter: Vec<f64>,
    ml_bits: Vec<u8>,
    ml_symbols: Vec<usize>,
}

impl SphereDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn detect(&mut self, p: &DetectionProblem<'_>) -> Result<SoftDetectionResult> {
        p.validate()?;
        let n = p.num_tx();
        let c = p.constellation;
        let q = c.order();
        let bps = c.bits_per_symbol();
        let nb = n * bps;
        let metric_clip = 2.0 * p.sigma2 * p.clip;

        self.children.resize_with(n, Vec::new);
        for ch in &mut self.children {
            ch.clear();
            ch.reserve(q);
        }
        self.cursor.clear();
        self.cursor.resize(n, 0);
        self.path.clear();
        self.path.resize(n, 0);
        self.ped.clear();
        self.ped.resize(n + 1, 0.0);
        self.counter.clear();
        self.counter.resize(nb, f64::INFINITY);
        self.ml_bits.clear();
        self.ml_bits.resize(nb, 0);
        self.ml_symbols.clear();
        self.ml_symbols.resize(n, 0);

        let mut search = Search {
            r: p.r,
            y: p.y_rot,
            c,
            bps,
            metric_clip,
            lambda_ml: f64::INFINITY,
            st: self,
            visited: 0,
        };
        search.run(n);

        let lambda_ml = search.lambda_ml;
        let visited = search.visited;
        let scale = 1.0 / (2.0 * p.sigma2);
        let llrs = self
            .counter
            .iter()
            .zip(&self.ml_bits)
            .map(|(&counter, &bit)| {
                debug_assert!(counter.is_finite());
                let magnitude = ((counter - lambda_ml) * scale).min(p.clip);
                if bit == 1 {
                    magnitude
                } else {
                    -magnitude
                }
            })
            .collect();

        Ok(SoftDetectionResult {
            llrs,
            visited_nodes: visited,
            ml_metric: lambda_ml,
            ml_symbols: self.ml_symbols.clone(),
        })
    }
}

struct Search<'a, 'p> {
    r: &'p ComplexMatrix,
    y: &'p [Complex64],
    c: &'p Constellation,
    bps: usize,
    metric_clip: f64,
    lambda_ml: f64,
    st: &'a mut SphereDecoder,
    visited: u64,
}

impl Search<'_, '_> {
    fn run(&mut self, n: usize) {
        let top = n - 1;
        let mut level = top;
        self.expand(level);
        loop {
            let q = self.c.order();
            if self.st.cursor[level] == q {
                if level == top {
                    break;
                }
                level += 1;
                continue;
            }
            let (d, idx) = self.st.children[level][self.st.cursor[level]];
            self.st.cursor[level] += 1;
            self.visited += 1;

            // Children are sorted, so once the loosest radius any sibling
            // could have is exceeded the whole level is done.
            if d > self.level_radius(level) {
                self.st.cursor[level] = q;
                continue;
            }
            if d > self.node_radius(level, idx) {
                continue;
            }
            self.st.path[level] = idx;
            if level == 0 {
                self.leaf(d);
            } else {
                self.st.ped[level] = d;
                level -= 1;
                self.expand(level);
            }
        }
    }

    /// Computes and sorts the partial metrics of all children at `level`.
    fn expand(&mut self, level: usize) {
        let n = self.r.rows();
        let parent = if level + 1 == n {
            0.0
        } else {
            self.st.ped[level + 1]
        };
        let mut b = self.y[level];
        for j in level + 1..n {
            b -= self.r[(level, j)] * self.c.point(self.st.path[j]);
        }
        let diag = self.r[(level, level)].re;
        let children = &mut self.st.children[level];
        children.clear();
        children.extend(
            self.c
                .points()
                .iter()
                .enumerate()
                .map(|(i, &pt)| (parent + (b - pt * diag).norm_sqr(), i)),
        );
        children.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        self.st.cursor[level] = 0;
    }

    /// Largest metric that fixed ancestors above `level` still allow to improve.
    fn path_radius(&self, level: usize) -> f64 {
        let n = self.r.rows();
        let mut radius = self.lambda_ml;
        for j in level + 1..n {
            let sym = self.st.path[j];
            for b in 0..self.bps {
                let k = j * self.bps + b;
                if self.c.label_bit(sym, b) != self.st.ml_bits[k] {
                    radius = radius.max(self.st.counter[k]);
                }
            }
        }
        radius
    }

    /// Upper bound of [`Self::node_radius`] over every child at `level`.
    fn level_radius(&self, level: usize) -> f64 {
        if self.lambda_ml == f64::INFINITY {
            return f64::INFINITY;
        }
        let free = self.st.counter[..(level + 1) * self.bps]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        self.path_radius(level).max(free)
    }

    /// Pruning radius of the node that extends the current path with `idx`.
    fn node_radius(&self, level: usize, idx: usize) -> f64 {
        if self.lambda_ml == f64::INFINITY {
            return f64::INFINITY;
        }
        let mut radius = self.path_radius(level);
        for b in 0..self.bps {
            let k = level * self.bps + b;
            if self.c.label_bit(idx, b) != self.st.ml_bits[k] {
                radius = radius.max(self.st.counter[k]);
            }
        }
        let below = self.st.counter[..level * self.bps]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        radius.max(below)
    }

    fn leaf(&mut self, d: f64) {
        let n = self.r.rows();
        let bps = self.bps;
        if d < self.lambda_ml {
            let first = self.lambda_ml == f64::INFINITY;
            for j in 0..n {
                let sym = self.st.path[j];
                for b in 0..bps {
                    let k = j * bps + b;
                    let bit = self.c.label_bit(sym, b);
                    if !first && bit != self.st.ml_bits[k] {
                        // the displaced ML vector is now the best counter-hypothesis
                        self.st.counter[k] = self.lambda_ml;
                    }
                    self.st.ml_bits[k] = bit;
                }
                self.st.ml_symbols[j] = sym;
            }
            self.lambda_ml = d;
        } else {
            for j in 0..n {
                let sym = self.st.path[j];
                for b in 0..bps {
                    let k = j * bps + b;
                    if self.c.label_bit(sym, b) != self.st.ml_bits[k] {
                        self.st.counter[k] = self.st.counter[k].min(d);
                    }
                }
            }
        }
        if self.metric_clip.is_finite() {
            let bound = self.lambda_ml + self.metric_clip;
            for v in &mut self.st.counter {
                *v = v.min(bound);
            }
        }
    }
}
