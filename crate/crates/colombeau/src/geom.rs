//! Axis-aligned boxes standing in for the open sets and compacts of the
//! ambient geometry.
//!
//! Open sets are represented by open boxes, compacts by closed boxes, and
//! `K ⊂⊂ U` becomes strict box containment with positive margin, so every
//! containment test is decidable and exact. Degenerate boxes (zero width on
//! some axis) are allowed as compacts: a single point is a valid `L`.

use serde::Serialize;

use crate::error::GeomError;

/// Product of closed intervals `[lower_i, upper_i]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxDomain {
    /// Requires `lower.len() == upper.len()`, finite bounds and `lower <= upper`
    /// componentwise. Zero-width axes are permitted.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, GeomError> {
        if lower.len() != upper.len() {
            return Err(GeomError::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for i in 0..lower.len() {
            if !lower[i].is_finite() || !upper[i].is_finite() || lower[i] > upper[i] {
                return Err(GeomError::InvalidBounds {
                    axis: i,
                    lower: lower[i],
                    upper: upper[i],
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// 1-dimensional interval.
    pub fn interval(lo: f64, hi: f64) -> Result<Self, GeomError> {
        Self::new(vec![lo], vec![hi])
    }

    /// The single point `{x}` as a degenerate box.
    pub fn point(x: &[f64]) -> Result<Self, GeomError> {
        Self::new(x.to_vec(), x.to_vec())
    }

    /// Box `[c - r, c + r]^n` around a centre.
    pub fn ball_inf(center: &[f64], r: f64) -> Result<Self, GeomError> {
        if r < 0.0 || !r.is_finite() {
            return Err(GeomError::InvalidRadius(r));
        }
        Self::new(
            center.iter().map(|c| c - r).collect(),
            center.iter().map(|c| c + r).collect(),
        )
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

    pub fn width(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn min_width(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.width(i))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    /// True when every axis has strictly positive width (usable as a domain).
    pub fn is_solid(&self) -> bool {
        self.lower.iter().zip(&self.upper).all(|(a, b)| a < b)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&xi, (&lo, &hi))| xi >= lo - tol && xi <= hi + tol)
    }

    /// Largest violation of the box constraints at `x` (<= 0 means inside).
    pub fn violation(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&xi, (&lo, &hi))| (lo - xi).max(xi - hi))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Distance from `x` to the complement, i.e. how far inside the box `x`
    /// sits (negative when outside).
    pub fn interior_margin(&self, x: &[f64]) -> f64 {
        -self.violation(x)
    }

    /// Margin by which `inner` sits strictly inside `self`
    /// (minimum face-to-face gap; negative when not contained).
    pub fn containment_margin(&self, inner: &BoxDomain) -> f64 {
        if inner.dim() != self.dim() {
            return f64::NEG_INFINITY;
        }
        (0..self.dim())
            .map(|i| (inner.lower[i] - self.lower[i]).min(self.upper[i] - inner.upper[i]))
            .fold(f64::INFINITY, f64::min)
    }

    /// `inner ⊂⊂ self` as boxes: containment with strictly positive margin.
    pub fn compactly_contains(&self, inner: &BoxDomain) -> bool {
        self.containment_margin(inner) > 0.0
    }

    /// Minkowski inflation by `r` on every axis.
    pub fn inflate(&self, r: f64) -> BoxDomain {
        BoxDomain {
            lower: self.lower.iter().map(|a| a - r).collect(),
            upper: self.upper.iter().map(|b| b + r).collect(),
        }
    }

    /// Shrink every face inward by `r` (clamps to the midpoint).
    pub fn shrink(&self, r: f64) -> BoxDomain {
        let mut lower = self.lower.clone();
        let mut upper = self.upper.clone();
        for i in 0..self.dim() {
            let c = 0.5 * (lower[i] + upper[i]);
            lower[i] = (lower[i] + r).min(c);
            upper[i] = (upper[i] - r).max(c);
        }
        BoxDomain { lower, upper }
    }

    /// Inflate each axis by `factor` times its own half-width (plus a floor
    /// for zero-width axes).
    pub fn inflate_relative(&self, factor: f64, floor: f64) -> BoxDomain {
        let mut lower = self.lower.clone();
        let mut upper = self.upper.clone();
        for i in 0..self.dim() {
            let r = (0.5 * self.width(i) * factor).max(floor);
            lower[i] -= r;
            upper[i] += r;
        }
        BoxDomain { lower, upper }
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &BoxDomain) -> BoxDomain {
        BoxDomain {
            lower: self
                .lower
                .iter()
                .zip(&other.lower)
                .map(|(a, b)| a.min(*b))
                .collect(),
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(a, b)| a.max(*b))
                .collect(),
        }
    }

    /// Bounding box of a nonempty point set.
    pub fn hull_of_points<'a, I: IntoIterator<Item = &'a [f64]>>(points: I) -> Option<BoxDomain> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut lower = first.to_vec();
        let mut upper = first.to_vec();
        for p in it {
            for i in 0..lower.len() {
                lower[i] = lower[i].min(p[i]);
                upper[i] = upper[i].max(p[i]);
            }
        }
        Some(BoxDomain { lower, upper })
    }

    /// Cartesian product `self × other`.
    pub fn product(&self, other: &BoxDomain) -> BoxDomain {
        let mut lower = self.lower.clone();
        let mut upper = self.upper.clone();
        lower.extend_from_slice(&other.lower);
        upper.extend_from_slice(&other.upper);
        BoxDomain { lower, upper }
    }

    /// Sub-box over axes `range`.
    pub fn slice(&self, start: usize, len: usize) -> BoxDomain {
        BoxDomain {
            lower: self.lower[start..start + len].to_vec(),
            upper: self.upper[start..start + len].to_vec(),
        }
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for i in 0..self.dim() {
            x[i] = x[i].clamp(self.lower[i], self.upper[i]);
        }
    }

    /// Deterministic tensor lattice with `per_axis` points per non-degenerate
    /// axis (endpoints included). Degenerate axes contribute their single value.
    pub fn lattice(&self, per_axis: usize) -> Lattice<'_> {
        let counts: Vec<usize> = (0..self.dim())
            .map(|i| if self.width(i) > 0.0 { per_axis.max(2) } else { 1 })
            .collect();
        Lattice {
            domain: self,
            counts,
            next: 0,
            total: 0,
        }
        .init()
    }

    /// Deterministic low-discrepancy interior points (Halton sequence mapped
    /// slightly inside the box).
    pub fn halton_interior(&self, count: usize) -> Vec<Vec<f64>> {
        let bases = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];
        (0..count)
            .map(|k| {
                (0..self.dim())
                    .map(|i| {
                        let u = halton(k as u64 + 1, bases[i % bases.len()]);
                        self.lower[i] + self.width(i) * (0.002 + 0.996 * u)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Iterator over a tensor-product lattice of a box.
pub struct Lattice<'a> {
    domain: &'a BoxDomain,
    counts: Vec<usize>,
    next: usize,
    total: usize,
}

impl<'a> Lattice<'a> {
    fn init(mut self) -> Self {
        self.total = self.counts.iter().product();
        self
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }
}

impl<'a> Iterator for Lattice<'a> {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        if self.next >= self.total {
            return None;
        }
        let mut idx = self.next;
        self.next += 1;
        let mut point = Vec::with_capacity(self.domain.dim());
        for i in 0..self.domain.dim() {
            let c = self.counts[i];
            let j = idx % c;
            idx /= c;
            let x = if c == 1 {
                self.domain.lower[i]
            } else {
                let t = j as f64 / (c - 1) as f64;
                self.domain.lower[i] + t * self.domain.width(i)
            };
            point.push(x);
        }
        Some(point)
    }
}

/// Van der Corput radical inverse in the given base.
pub fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// Target of a c-boundedness check: a bounded open box or all of `ℝⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Ambient {
    Boxed(BoxDomain),
    All(usize),
}

impl Ambient {
    pub fn dim(&self) -> usize {
        match self {
            Ambient::Boxed(b) => b.dim(),
            Ambient::All(n) => *n,
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self {
            Ambient::Boxed(b) => b.contains(x, tol),
            Ambient::All(n) => x.len() == *n && x.iter().all(|v| v.is_finite()),
        }
    }

    /// Compact exhaustion used for escape detection: for a bounded box the
    /// levels shrink the box by `2^{-j} * width`, for `ℝⁿ` they are the cubes
    /// `[-2^j, 2^j]^n`.
    pub fn exhaustion(&self, levels: usize) -> Vec<BoxDomain> {
        match self {
            Ambient::Boxed(b) => (1..=levels)
                .map(|j| {
                    let r = b.min_width() * 0.5f64.powi(j as i32);
                    b.shrink(r)
                })
                .collect(),
            Ambient::All(n) => (0..levels)
                .map(|j| {
                    let r = 2.0f64.powi(j as i32);
                    BoxDomain::ball_inf(&vec![0.0; *n], r).expect("finite radius")
                })
                .collect(),
        }
    }
}

/// Euclidean norm, scaled to stay finite for entries up to f64::MAX.
pub fn norm2(x: &[f64]) -> f64 {
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    m * x.iter().map(|v| (v / m) * (v / m)).sum::<f64>().sqrt()
}

/// Euclidean distance.
pub fn dist2(x: &[f64], y: &[f64]) -> f64 {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    norm2(&d)
}
