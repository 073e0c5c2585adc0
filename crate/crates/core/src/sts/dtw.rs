//! Banded dynamic time warping.

use thiserror::Error;

/// Default Sakoe-Chiba radius in frames.
pub const DEFAULT_BAND: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DtwError {
    #[error("empty sequence")]
    Empty,
    #[error("feature dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
}

/// Frames are rows of `dims` values stored contiguously.
#[derive(Debug, Clone, Copy)]
pub struct Frames<'a> {
    pub values: &'a [f64],
    pub dims: usize,
}

impl<'a> Frames<'a> {
    pub fn new(values: &'a [f64], dims: usize) -> Self {
        assert!(dims > 0 && values.len().is_multiple_of(dims), "values must be whole frames");
        Self { values, dims }
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dims
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn frame(&self, i: usize) -> &'a [f64] {
        &self.values[i * self.dims..(i + 1) * self.dims]
    }
}

/// Minimum accumulated cost and the length (cells) of the path achieving it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    pub cost: f64,
    pub path_len: usize,
}

impl Alignment {
    pub fn normalized(&self) -> f64 {
        self.cost / self.path_len as f64
    }

    fn better_than(&self, other: &Alignment) -> bool {
        self.cost < other.cost || (self.cost == other.cost && self.path_len < other.path_len)
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Unnormalized DTW with steps (1,0), (0,1), (1,1), Euclidean local cost and
/// a Sakoe-Chiba band `|i - j| <= max(band, |n - m|)`. Among minimum-cost
/// paths the shortest is reported.
pub fn dtw_alignment(a: Frames<'_>, b: Frames<'_>, band: usize) -> Result<Alignment, DtwError> {
    if a.is_empty() || b.is_empty() {
        return Err(DtwError::Empty);
    }
    if a.dims != b.dims {
        return Err(DtwError::Dimension(a.dims, b.dims));
    }
    let (n, m) = (a.len(), b.len());
    let r = band.max(n.abs_diff(m));
    let unreachable = Alignment {
        cost: f64::INFINITY,
        path_len: usize::MAX,
    };
    let mut prev = vec![unreachable; m];
    let mut cur = vec![unreachable; m];
    for i in 0..n {
        let lo = i.saturating_sub(r);
        let hi = (i + r).min(m - 1);
        cur.fill(unreachable);
        for j in lo..=hi {
            let local = euclidean(a.frame(i), b.frame(j));
            let best = if i == 0 && j == 0 {
                Alignment { cost: 0.0, path_len: 0 }
            } else {
                let mut best = unreachable;
                for cand in [
                    (i > 0).then(|| prev[j]),
                    (j > 0).then(|| cur[j - 1]),
                    (i > 0 && j > 0).then(|| prev[j - 1]),
                ]
                .into_iter()
                .flatten()
                {
                    if cand.better_than(&best) {
                        best = cand;
                    }
                }
                best
            };
            if best.cost.is_finite() {
                cur[j] = Alignment {
                    cost: best.cost + local,
                    path_len: best.path_len + 1,
                };
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

/// DTW cost divided by warping-path length.
pub fn dtw_distance(a: Frames<'_>, b: Frames<'_>, band: usize) -> Result<f64, DtwError> {
    dtw_alignment(a, b, band).map(|al| al.normalized())
}
