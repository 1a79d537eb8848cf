//! Pairwise comparison matrices with entries in a group.
//!
//! A PC matrix has identity diagonal and reciprocal entries
//! `a[j][i] = a[i][j]⁻¹`. Entries may be absent ("gaps") when the matrix is
//! assembled from a triangulation whose comparison graph is not complete; the
//! gap pattern is then symmetric.
//!
//! Consistency comes in two orders:
//!
//! * covariant: `a[i][j]·a[j][k] = a[i][k]`
//! * contravariant: `a[j][k]·a[i][j] = a[i][k]`
//!
//! and a consistent matrix is generated by a gauge vector `λ`, with
//! `a[i][j] = λ_i⁻¹·λ_j` (covariant) or `a[i][j] = λ_j·λ_i⁻¹` (contravariant).

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Element, Group, ALGEBRA_TOL};

/// Default tolerance for consistency checks.
pub const DEFAULT_CONSISTENCY_TOL: f64 = 1e-9;

/// Which multiplication order consistency is checked in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    #[default]
    Covariant,
    Contravariant,
}

impl Variance {
    pub fn flipped(self) -> Self {
        match self {
            Variance::Covariant => Variance::Contravariant,
            Variance::Contravariant => Variance::Covariant,
        }
    }
}

/// The axiom a matrix entry breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Diagonal,
    Reciprocity,
    GapPattern,
    WrongGroup,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::Diagonal => "diagonal",
            Axiom::Reciprocity => "reciprocity",
            Axiom::GapPattern => "gap pattern",
            Axiom::WrongGroup => "wrong group",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub i: usize,
    pub j: usize,
    pub axiom: Axiom,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}): {}", self.i, self.j, self.axiom)
    }
}

/// An `n × n` matrix of optional group elements.
///
/// Construction only checks shape and group membership; use
/// [`PcMatrix::validate`] (or [`PcMatrix::new`]) for the PC axioms.
#[derive(Debug, Clone, PartialEq)]
pub struct PcMatrix {
    group: Group,
    n: usize,
    entries: Vec<Option<Element>>,
    variance: Variance,
}

/// A triad `(i, j, k)`, `i < j < k`, with `x = a[i][j]`, `y = a[i][k]`,
/// `z = a[j][k]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triad {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub x: Element,
    pub y: Element,
    pub z: Element,
}

/// Worst-triad score. `triad` is `None` only when there are no triads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriadScore {
    pub value: f64,
    pub triad: Option<(usize, usize, usize)>,
}

/// Result of a consistency test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyCheck {
    pub consistent: bool,
    /// Largest defect `d(composition, a[i][k])` over all index triples.
    pub max_defect: f64,
    /// Worst triple, reported when the matrix is inconsistent.
    pub witness: Option<(usize, usize, usize)>,
}

/// An indicator map `In: G → ℝ` with `In(1_G) = 0`.
pub trait IndicatorMap {
    fn eval(&self, g: &Element) -> f64;
}

impl<F: Fn(&Element) -> f64> IndicatorMap for F {
    fn eval(&self, g: &Element) -> f64 {
        self(g)
    }
}

/// Built-in indicator maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indicator {
    /// `In(g) = d(1_G, g⁻¹)`.
    #[default]
    Distance,
    /// `In(g) = 1 − exp(−d(1_G, g⁻¹))`; on ℝ₊* this is Koczkodaj's ii₃ of the triad.
    Ii3Scale,
}

impl IndicatorMap for Indicator {
    fn eval(&self, g: &Element) -> f64 {
        let d = g.inverse().norm();
        match self {
            Indicator::Distance => d,
            Indicator::Ii3Scale => 1.0 - (-d).exp(),
        }
    }
}

/// Gauge vector `(λ_0, …, λ_{n−1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeVector {
    elems: Vec<Element>,
}

impl GaugeVector {
    pub fn new(elems: Vec<Element>) -> Result<Self> {
        let Some(first) = elems.first() else {
            return Err(Error::InvalidArgument("empty gauge vector".into()));
        };
        let g = first.group();
        if let Some(bad) = elems.iter().find(|e| e.group() != g) {
            return Err(Error::GroupMismatch(g.tag(), bad.group().tag()));
        }
        Ok(GaugeVector { elems })
    }

    pub fn identity(group: Group, n: usize) -> Self {
        GaugeVector {
            elems: vec![group.identity(); n],
        }
    }

    pub fn random<R: Rng + ?Sized>(group: Group, n: usize, rng: &mut R) -> Result<Self> {
        let elems = (0..n)
            .map(|_| group.haar_sample(rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(GaugeVector { elems })
    }

    pub fn group(&self) -> Group {
        self.elems[0].group()
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn as_slice(&self) -> &[Element] {
        &self.elems
    }

    pub fn into_vec(self) -> Vec<Element> {
        self.elems
    }

    /// Fixes the global translation so that `λ_0 = 1_G`: left translation by
    /// `λ_0⁻¹` for covariant matrices, right translation for contravariant.
    pub fn normalized(&self, variance: Variance) -> Result<Self> {
        let inv = self.elems[0].inverse();
        let elems = self
            .elems
            .iter()
            .enumerate()
            .map(|(i, e)| {
                if i == 0 {
                    Ok(e.group().identity())
                } else {
                    match variance {
                        Variance::Covariant => inv.mul(e),
                        Variance::Contravariant => e.mul(&inv),
                    }
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GaugeVector { elems })
    }

    /// Largest elementwise distance to another gauge vector.
    pub fn max_distance(&self, other: &GaugeVector) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        self.elems
            .iter()
            .zip(&other.elems)
            .try_fold(0.0f64, |m, (a, b)| Ok(m.max(a.distance(b)?)))
    }
}

impl PcMatrix {
    /// Builds a matrix from row-major entries without checking the PC axioms.
    pub fn from_entries(
        group: Group,
        n: usize,
        entries: Vec<Option<Element>>,
        variance: Variance,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("matrix size must be positive".into()));
        }
        if entries.len() != n * n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        Ok(PcMatrix {
            group,
            n,
            entries,
            variance,
        })
    }

    /// Like [`PcMatrix::from_entries`], but fails unless every axiom holds.
    pub fn new(
        group: Group,
        n: usize,
        entries: Vec<Option<Element>>,
        variance: Variance,
    ) -> Result<Self> {
        let m = Self::from_entries(group, n, entries, variance)?;
        m.ensure_valid()?;
        Ok(m)
    }

    /// Builds a gap-free matrix from its strict upper triangle, listed row by
    /// row (`a01, a02, …, a0(n-1), a12, …`).
    pub fn from_upper(group: Group, n: usize, upper: &[Element], variance: Variance) -> Result<Self> {
        let expected = n * n.saturating_sub(1) / 2;
        if upper.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: upper.len(),
            });
        }
        if let Some(bad) = upper.iter().find(|e| e.group() != group) {
            return Err(Error::GroupMismatch(group.tag(), bad.group().tag()));
        }
        let mut entries = vec![None; n * n];
        let mut it = upper.iter();
        for i in 0..n {
            entries[i * n + i] = Some(group.identity());
            for j in i + 1..n {
                let a = *it.next().expect("length checked");
                entries[i * n + j] = Some(a);
                entries[j * n + i] = Some(a.inverse());
            }
        }
        Self::from_entries(group, n, entries, variance)
    }

    pub fn identity(group: Group, n: usize, variance: Variance) -> Self {
        let entries = (0..n * n).map(|_| Some(group.identity())).collect();
        PcMatrix {
            group,
            n,
            entries,
            variance,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    pub fn with_variance(mut self, variance: Variance) -> Self {
        self.variance = variance;
        self
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&Element> {
        self.entries[i * self.n + j].as_ref()
    }

    pub fn entries(&self) -> &[Option<Element>] {
        &self.entries
    }

    pub fn has_gaps(&self) -> bool {
        self.entries.iter().any(Option::is_none)
    }

    /// Strict upper triangle, row by row. `None` marks gaps.
    pub fn upper_triangle(&self) -> Vec<Option<Element>> {
        (0..self.n)
            .flat_map(|i| (i + 1..self.n).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j).copied())
            .collect()
    }

    fn entry(&self, i: usize, j: usize) -> Result<&Element> {
        self.get(i, j).ok_or(Error::GapsPresent)
    }

    /// Checks the PC axioms; the empty list means the matrix is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let id = self.group.identity();
        for i in 0..self.n {
            for j in 0..self.n {
                if let Some(e) = self.get(i, j) {
                    if e.group() != self.group {
                        out.push(Violation {
                            i,
                            j,
                            axiom: Axiom::WrongGroup,
                        });
                    }
                }
            }
        }
        if !out.is_empty() {
            return out;
        }
        for i in 0..self.n {
            match self.get(i, i) {
                Some(d) if d.distance(&id).unwrap_or(f64::INFINITY) <= ALGEBRA_TOL => {}
                _ => out.push(Violation {
                    i,
                    j: i,
                    axiom: Axiom::Diagonal,
                }),
            }
        }
        for i in 0..self.n {
            for j in i + 1..self.n {
                match (self.get(i, j), self.get(j, i)) {
                    (None, None) => {}
                    (Some(a), Some(b)) => {
                        let defect = a.inverse().distance(b).unwrap_or(f64::INFINITY);
                        if defect > ALGEBRA_TOL {
                            out.push(Violation {
                                i: j,
                                j: i,
                                axiom: Axiom::Reciprocity,
                            });
                        }
                    }
                    _ => out.push(Violation {
                        i: j,
                        j: i,
                        axiom: Axiom::GapPattern,
                    }),
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidMatrix(v))
        }
    }

    fn ensure_valid_gap_free(&self) -> Result<()> {
        self.ensure_valid()?;
        if self.has_gaps() {
            Err(Error::GapsPresent)
        } else {
            Ok(())
        }
    }

    /// The transpose `b[i][j] = a[j][i] = a[i][j]⁻¹`, with the variance flipped.
    pub fn dualize(&self) -> Result<PcMatrix> {
        self.ensure_valid()?;
        let n = self.n;
        let entries = (0..n * n)
            .map(|idx| self.entries[(idx % n) * n + idx / n])
            .collect();
        Ok(PcMatrix {
            group: self.group,
            n,
            entries,
            variance: self.variance.flipped(),
        })
    }

    /// Composition compared against `a[i][k]` in the matrix's variance.
    fn composition(&self, i: usize, j: usize, k: usize) -> Result<Element> {
        let ij = self.entry(i, j)?;
        let jk = self.entry(j, k)?;
        match self.variance {
            Variance::Covariant => ij.mul(jk),
            Variance::Contravariant => jk.mul(ij),
        }
    }

    /// Tests consistency over every index triple, in the recorded variance.
    pub fn is_consistent(&self, tol: f64) -> Result<ConsistencyCheck> {
        self.ensure_valid_gap_free()?;
        let mut worst = (0.0f64, None);
        for i in 0..self.n {
            for j in 0..self.n {
                for k in 0..self.n {
                    let d = self.composition(i, j, k)?.distance(self.entry(i, k)?)?;
                    if d > worst.0 {
                        worst = (d, Some((i, j, k)));
                    }
                }
            }
        }
        let consistent = worst.0 <= tol;
        Ok(ConsistencyCheck {
            consistent,
            max_defect: worst.0,
            witness: if consistent { None } else { worst.1 },
        })
    }

    pub fn triad(&self, i: usize, j: usize, k: usize) -> Result<Triad> {
        if !(i < j && j < k && k < self.n) {
            return Err(Error::InvalidArgument(format!(
                "triad ({i}, {j}, {k}) is not an increasing triple below {}",
                self.n
            )));
        }
        let gap = || Error::GapOnTriad(i, j, k);
        Ok(Triad {
            i,
            j,
            k,
            x: *self.get(i, j).ok_or_else(gap)?,
            y: *self.get(i, k).ok_or_else(gap)?,
            z: *self.get(j, k).ok_or_else(gap)?,
        })
    }

    /// Holonomy around the triad: `a[k][i]·a[j][k]·a[i][j]` for contravariant
    /// matrices, `a[i][j]·a[j][k]·a[k][i]` for covariant ones.
    pub fn triad_holonomy(&self, i: usize, j: usize, k: usize) -> Result<Element> {
        let n = self.n;
        if i >= n || j >= n || k >= n || i == j || j == k || i == k {
            return Err(Error::InvalidArgument(format!(
                "triad ({i}, {j}, {k}) needs distinct indices below {n}"
            )));
        }
        let gap = || Error::GapOnTriad(i, j, k);
        let ij = self.get(i, j).ok_or_else(gap)?;
        let jk = self.get(j, k).ok_or_else(gap)?;
        let ki = self.get(k, i).ok_or_else(gap)?;
        match self.variance {
            Variance::Contravariant => ki.mul(jk)?.mul(ij),
            Variance::Covariant => ij.mul(jk)?.mul(ki),
        }
    }

    fn triples(&self) -> impl Iterator<Item = (usize, usize, usize)> {
        let n = self.n;
        (0..n).flat_map(move |i| {
            (i + 1..n).flat_map(move |j| (j + 1..n).map(move |k| (i, j, k)))
        })
    }

    fn scan_triads<F>(&self, skip_gaps: bool, mut score: F) -> Result<TriadScore>
    where
        F: FnMut(usize, usize, usize) -> Result<f64>,
    {
        let mut best = TriadScore {
            value: 0.0,
            triad: None,
        };
        for (i, j, k) in self.triples() {
            if skip_gaps && self.triad(i, j, k).is_err() {
                continue;
            }
            let v = score(i, j, k)?;
            if best.triad.is_none() || v > best.value {
                best = TriadScore {
                    value: v,
                    triad: Some((i, j, k)),
                };
            }
        }
        Ok(best)
    }

    /// Koczkodaj's indicator: the worst `ii3` over all triads of an ℝ₊* matrix.
    pub fn ii3_matrix(&self) -> Result<TriadScore> {
        if self.group != Group::RPlus {
            return Err(Error::RequiresRPlus("ii3_matrix"));
        }
        self.ensure_valid_gap_free()?;
        self.scan_triads(false, |i, j, k| {
            let t = self.triad(i, j, k)?;
            ii3(scalar(&t.x), scalar(&t.y), scalar(&t.z))
        })
    }

    /// Chain indicator: compares each `a[i][j]` with the consecutive product
    /// `a[i][i+1]·…·a[j−1][j]`.
    pub fn ii_n_chain(&self) -> Result<f64> {
        if self.group != Group::RPlus {
            return Err(Error::RequiresRPlus("ii_n_chain"));
        }
        self.ensure_valid_gap_free()?;
        let mut min_ratio = 1.0f64;
        for i in 0..self.n {
            let mut chain = 1.0;
            for j in i + 1..self.n {
                chain *= scalar(self.entry(j - 1, j)?);
                let a = scalar(self.entry(i, j)?);
                let r = a / chain;
                min_ratio = min_ratio.min(r.min(1.0 / r));
            }
        }
        Ok(1.0 - min_ratio)
    }

    /// Worst indicator value `In(Hol)` over all triads.
    pub fn ii_indicator<I: IndicatorMap + ?Sized>(&self, indicator: &I) -> Result<TriadScore> {
        check_indicator(self.group, indicator)?;
        self.ensure_valid_gap_free()?;
        self.scan_triads(false, |i, j, k| {
            Ok(indicator.eval(&self.triad_holonomy(i, j, k)?))
        })
    }

    /// As [`PcMatrix::ii_indicator`], but only over triads whose three entries
    /// are present. Used for matrices assembled with gaps.
    pub fn ii_indicator_present_triads<I: IndicatorMap + ?Sized>(
        &self,
        indicator: &I,
    ) -> Result<TriadScore> {
        check_indicator(self.group, indicator)?;
        self.ensure_valid()?;
        self.scan_triads(true, |i, j, k| {
            Ok(indicator.eval(&self.triad_holonomy(i, j, k)?))
        })
    }

    /// Vertex gauge action. Contravariant matrices transform as
    /// `a[i][j] ↦ μ_j·a[i][j]·μ_i⁻¹`, covariant ones as
    /// `a[i][j] ↦ μ_i⁻¹·a[i][j]·μ_j`; triad holonomies are conjugated in both
    /// cases.
    pub fn gauge_transform(&self, mu: &GaugeVector) -> Result<PcMatrix> {
        self.ensure_valid()?;
        if mu.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: mu.len(),
            });
        }
        if mu.group() != self.group {
            return Err(Error::GroupMismatch(self.group.tag(), mu.group().tag()));
        }
        let m = mu.as_slice();
        let n = self.n;
        let mut entries = self.entries.clone();
        for i in 0..n {
            entries[i * n + i] = Some(self.group.identity());
            for j in i + 1..n {
                if let Some(a) = self.get(i, j) {
                    let t = match self.variance {
                        Variance::Contravariant => m[j].mul(a)?.mul(&m[i].inverse())?,
                        Variance::Covariant => m[i].inverse().mul(a)?.mul(&m[j])?,
                    };
                    entries[i * n + j] = Some(t);
                    entries[j * n + i] = Some(t.inverse());
                }
            }
        }
        Ok(PcMatrix {
            entries,
            ..self.clone()
        })
    }
}

fn scalar(e: &Element) -> f64 {
    match e {
        Element::RPlus(x) => *x,
        _ => unreachable!("caller checked the group"),
    }
}

fn check_indicator<I: IndicatorMap + ?Sized>(group: Group, indicator: &I) -> Result<()> {
    let at_identity = indicator.eval(&group.identity());
    if at_identity.abs() > ALGEBRA_TOL || at_identity.is_nan() {
        return Err(Error::NotIndicatorMap(at_identity));
    }
    Ok(())
}

/// Koczkodaj's triad indicator `1 − min(y/(xz), xz/y)`.
pub fn ii3(x: f64, y: f64, z: f64) -> Result<f64> {
    for v in [x, y, z] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::NonPositive(v));
        }
    }
    let r = y / (x * z);
    Ok(1.0 - r.min(1.0 / r))
}

/// Consistent covariant matrix `a[i][j] = λ_i⁻¹·λ_j`.
pub fn from_gauge_vector(lambda: &GaugeVector) -> Result<PcMatrix> {
    from_gauge_vector_with(lambda, Variance::Covariant)
}

/// Consistent matrix of the given variance generated by `λ`.
pub fn from_gauge_vector_with(lambda: &GaugeVector, variance: Variance) -> Result<PcMatrix> {
    let group = lambda.group();
    let l = lambda.as_slice();
    let n = l.len();
    let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            upper.push(match variance {
                Variance::Covariant => l[i].inverse().mul(&l[j])?,
                Variance::Contravariant => l[j].mul(&l[i].inverse())?,
            });
        }
    }
    PcMatrix::from_upper(group, n, &upper, variance)
}

/// Recovers the normalized gauge vector (`λ_0 = 1_G`, `λ_j = a[0][j]`) of a
/// consistent matrix.
pub fn gauge_extract(a: &PcMatrix, tol: f64) -> Result<GaugeVector> {
    let check = a.is_consistent(tol)?;
    if let Some(w) = check.witness {
        return Err(Error::NoGaugeVector(w));
    }
    let elems = (0..a.n())
        .map(|j| {
            if j == 0 {
                a.group().identity()
            } else {
                *a.get(0, j).expect("gap-free")
            }
        })
        .collect();
    GaugeVector::new(elems)
}

/// Random covariant matrix with i.i.d. Haar upper-triangle entries.
pub fn random_pc_matrix<R: Rng + ?Sized>(group: Group, n: usize, rng: &mut R) -> Result<PcMatrix> {
    if !group.is_compact() {
        return Err(Error::NoHaarMeasure(group.tag()));
    }
    let upper = (0..n * n.saturating_sub(1) / 2)
        .map(|_| group.haar_sample(rng))
        .collect::<Result<Vec<_>>>()?;
    PcMatrix::from_upper(group, n, &upper, Variance::Covariant)
}
