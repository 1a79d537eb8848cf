//! Concrete groups used as coefficient sets for comparison matrices and edge
//! fields.
//!
//! Four groups are supported:
//!
//! * `rplus`: the multiplicative positive reals, carried as an `f64`.
//! * `u1`: the circle group, carried as an angle in `(-π, π]`.
//! * `su2`: unit quaternions `(w, x, y, z)`.
//! * `zmod:<m>`: the cyclic group of order `m`, with exact arithmetic.
//!
//! Every metric here is bi-invariant, so `d(g·x, g·y) = d(x·g, y·g) = d(x, y)`.
//! Indicator values built from the metric are therefore unchanged by
//! conjugation.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Tolerance for algebraic identities (group axioms, reciprocity).
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Tolerance for exp/log round trips.
pub const EXP_LOG_TOL: f64 = 1e-9;

const TWO_PI: f64 = 2.0 * PI;

/// A group tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    RPlus,
    U1,
    Su2,
    ZMod(u32),
}

/// A group element. Constructors enforce the carrier invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element {
    RPlus(f64),
    U1(f64),
    Su2([f64; 4]),
    ZMod { m: u32, r: u32 },
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(t: f64) -> f64 {
    let r = (t + PI).rem_euclid(TWO_PI) - PI;
    if r <= -PI {
        PI
    } else {
        r
    }
}

fn quat_mul(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    let [a0, a1, a2, a3] = *a;
    let [b0, b1, b2, b3] = *b;
    [
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ]
}

fn quat_normalize(q: [f64; 4]) -> Option<[f64; 4]> {
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !n.is_finite() || n < 1e-300 {
        return None;
    }
    Some([q[0] / n, q[1] / n, q[2] / n, q[3] / n])
}

impl Group {
    pub fn identity(&self) -> Element {
        match *self {
            Group::RPlus => Element::RPlus(1.0),
            Group::U1 => Element::U1(0.0),
            Group::Su2 => Element::Su2([1.0, 0.0, 0.0, 0.0]),
            Group::ZMod(m) => Element::ZMod { m, r: 0 },
        }
    }

    /// Dimension of the Lie algebra (0 for finite groups).
    pub fn lie_dim(&self) -> usize {
        match self {
            Group::RPlus | Group::U1 => 1,
            Group::Su2 => 3,
            Group::ZMod(_) => 0,
        }
    }

    pub fn is_compact(&self) -> bool {
        !matches!(self, Group::RPlus)
    }

    pub fn is_abelian(&self) -> bool {
        !matches!(self, Group::Su2)
    }

    pub fn tag(&self) -> String {
        self.to_string()
    }

    fn check(&self, e: &Element) -> Result<()> {
        if e.group() == *self {
            Ok(())
        } else {
            Err(Error::GroupMismatch(self.tag(), e.group().tag()))
        }
    }

    /// Bi-invariant distance between two elements.
    pub fn distance(&self, a: &Element, b: &Element) -> Result<f64> {
        self.check(a)?;
        a.distance(b)
    }

    /// Exponential map from Lie-algebra coordinates.
    ///
    /// For `su2` the coordinates are a pure quaternion `v`, mapped to
    /// `(cos|v|, sin|v|·v/|v|)`, so that `d(1, exp v) = |v|` for `|v| ≤ π`.
    pub fn exp_coords(&self, v: &[f64]) -> Result<Element> {
        if v.len() != self.lie_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.lie_dim(),
                got: v.len(),
            });
        }
        Ok(match *self {
            Group::RPlus => Element::rplus(v[0].exp())?,
            Group::U1 => Element::u1(v[0]),
            Group::Su2 => {
                let t = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                // sin(t)/t, with the series near zero
                let s = if t < 1e-6 {
                    1.0 - t * t / 6.0
                } else {
                    t.sin() / t
                };
                Element::su2([t.cos(), s * v[0], s * v[1], s * v[2]])?
            }
            Group::ZMod(m) => Element::ZMod { m, r: 0 },
        })
    }

    /// Logarithm into Lie-algebra coordinates; inverse of [`Group::exp_coords`]
    /// on the principal branch.
    pub fn log_coords(&self, g: &Element) -> Result<Vec<f64>> {
        self.check(g)?;
        Ok(match *g {
            Element::RPlus(x) => vec![x.ln()],
            Element::U1(t) => vec![t],
            Element::Su2(q) => {
                let vn = (q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
                let angle = vn.atan2(q[0]);
                if PI - angle < EXP_LOG_TOL {
                    return Err(Error::LogBranchSingularity);
                }
                let s = if vn < 1e-12 { 1.0 } else { angle / vn };
                vec![s * q[1], s * q[2], s * q[3]]
            }
            Element::ZMod { .. } => Vec::new(),
        })
    }

    /// Draws one element from the normalized Haar measure.
    pub fn haar_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Element> {
        match *self {
            Group::RPlus => Err(Error::NoHaarMeasure(self.tag())),
            Group::U1 => {
                let u: f64 = rng.random();
                Ok(Element::U1(wrap_angle(PI - TWO_PI * u)))
            }
            Group::Su2 => loop {
                let q = [
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                ];
                let n2: f64 = q.iter().map(|x| x * x).sum();
                if n2 > 1e-12 {
                    if let Some(q) = quat_normalize(q) {
                        return Ok(Element::Su2(q));
                    }
                }
            },
            Group::ZMod(m) => Ok(Element::ZMod {
                m,
                r: rng.random_range(0..m),
            }),
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::RPlus => write!(f, "rplus"),
            Group::U1 => write!(f, "u1"),
            Group::Su2 => write!(f, "su2"),
            Group::ZMod(m) => write!(f, "zmod:{m}"),
        }
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rplus" => Ok(Group::RPlus),
            "u1" => Ok(Group::U1),
            "su2" => Ok(Group::Su2),
            _ => {
                let m = s
                    .strip_prefix("zmod:")
                    .and_then(|m| m.parse::<u32>().ok())
                    .filter(|&m| m >= 1)
                    .ok_or_else(|| Error::UnknownGroup(s.to_string()))?;
                Ok(Group::ZMod(m))
            }
        }
    }
}

impl Element {
    pub fn rplus(x: f64) -> Result<Self> {
        if x.is_finite() && x > 0.0 {
            Ok(Element::RPlus(x))
        } else {
            Err(Error::InvalidElement {
                group: "rplus".into(),
                reason: format!("{x} is not a positive finite real"),
            })
        }
    }

    /// A U(1) element; the angle is wrapped into `(-π, π]`.
    pub fn u1(theta: f64) -> Self {
        Element::U1(wrap_angle(theta))
    }

    /// An SU(2) element; the quaternion is normalized.
    pub fn su2(q: [f64; 4]) -> Result<Self> {
        quat_normalize(q)
            .map(Element::Su2)
            .ok_or_else(|| Error::InvalidElement {
                group: "su2".into(),
                reason: format!("{q:?} cannot be normalized"),
            })
    }

    pub fn zmod(m: u32, r: i64) -> Result<Self> {
        if m == 0 {
            return Err(Error::UnknownGroup("zmod:0".into()));
        }
        Ok(Element::ZMod {
            m,
            r: r.rem_euclid(m as i64) as u32,
        })
    }

    pub fn group(&self) -> Group {
        match *self {
            Element::RPlus(_) => Group::RPlus,
            Element::U1(_) => Group::U1,
            Element::Su2(_) => Group::Su2,
            Element::ZMod { m, .. } => Group::ZMod(m),
        }
    }

    fn same_group(&self, other: &Element) -> Result<()> {
        if self.group() == other.group() {
            Ok(())
        } else {
            Err(Error::GroupMismatch(self.group().tag(), other.group().tag()))
        }
    }

    /// Group product `self · other`.
    pub fn mul(&self, other: &Element) -> Result<Element> {
        self.same_group(other)?;
        Ok(match (*self, *other) {
            (Element::RPlus(a), Element::RPlus(b)) => Element::rplus(a * b)?,
            (Element::U1(a), Element::U1(b)) => Element::u1(a + b),
            (Element::Su2(a), Element::Su2(b)) => Element::su2(quat_mul(&a, &b))?,
            (Element::ZMod { m, r: a }, Element::ZMod { r: b, .. }) => Element::ZMod {
                m,
                r: ((a as u64 + b as u64) % m as u64) as u32,
            },
            _ => unreachable!(),
        })
    }

    pub fn inverse(&self) -> Element {
        match *self {
            Element::RPlus(a) => Element::RPlus(1.0 / a),
            Element::U1(a) => Element::u1(-a),
            Element::Su2([w, x, y, z]) => Element::Su2([w, -x, -y, -z]),
            Element::ZMod { m, r } => Element::ZMod { m, r: (m - r) % m },
        }
    }

    /// Bi-invariant distance.
    pub fn distance(&self, other: &Element) -> Result<f64> {
        self.same_group(other)?;
        Ok(match (*self, *other) {
            (Element::RPlus(a), Element::RPlus(b)) => (a / b).ln().abs(),
            (Element::U1(a), Element::U1(b)) => wrap_angle(a - b).abs(),
            (Element::Su2(a), Element::Su2(b)) => {
                // arccos⟨a, b⟩, evaluated as 2·atan2(|a − b|, |a + b|) to keep
                // full precision near 0 and π
                let diff = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
                let sum = a.iter().zip(&b).map(|(x, y)| (x + y).powi(2)).sum::<f64>();
                2.0 * diff.sqrt().atan2(sum.sqrt())
            }
            (Element::ZMod { m, r: a }, Element::ZMod { r: b, .. }) => {
                let k = (a as i64 - b as i64).rem_euclid(m as i64) as u32;
                TWO_PI * k.min(m - k) as f64 / m as f64
            }
            _ => unreachable!(),
        })
    }

    /// Distance to the identity.
    pub fn norm(&self) -> f64 {
        self.distance(&self.group().identity())
            .expect("identity is in the same group")
    }

    /// Conjugation `g · self · g⁻¹`.
    pub fn conjugate_by(&self, g: &Element) -> Result<Element> {
        g.mul(self)?.mul(&g.inverse())
    }

    /// Normalized real character: `cos θ` for U(1), `½ tr` for SU(2),
    /// `cos(2πr/m)` for ℤ_m. Undefined on ℝ₊*.
    pub fn character(&self) -> Option<f64> {
        match *self {
            Element::RPlus(_) => None,
            Element::U1(t) => Some(t.cos()),
            Element::Su2(q) => Some(q[0]),
            Element::ZMod { m, r } => Some((TWO_PI * r as f64 / m as f64).cos()),
        }
    }
}

/// Multiplies a sequence left to right; the empty product is the identity.
pub fn product<'a, I>(group: Group, elems: I) -> Result<Element>
where
    I: IntoIterator<Item = &'a Element>,
{
    elems
        .into_iter()
        .try_fold(group.identity(), |acc, e| acc.mul(e))
}
