//! The envelope of a distribution: the levels that dominate `|L(beta)|` for
//! some real `beta`, i.e. the upper convex hull of the points `(E_j, ln k_j)`.
//!
//! Between two adjacent members only those two terms matter, so the amplitude
//! behaves like a two-level system there and its zeros sit on a vertical line
//! at the crossing temperature. Runs of collinear members are multilevel
//! groups; if they are also equally spaced in energy the group is a geometric
//! sum with closed-form zeros.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::amplitude::{ComplexTime, EnergyDistribution};
use crate::zeros::{Provenance, Rect, Zero, ZeroSet};

/// Absolute tolerance on `ln k` for collinearity on the hull.
pub const COLLINEAR_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeLevel {
    pub index: usize,
    pub energy: f64,
    pub log_population: f64,
}

/// Two adjacent members with nothing collinear between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: usize,
    pub b: usize,
    /// `ln(k_a / k_b) / (E_a - E_b)`
    pub beta: f64,
    /// `2 pi / |E_a - E_b|`
    pub period: f64,
}

/// Three or more collinear members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultilevelGroup {
    pub members: Vec<usize>,
    /// `k_{j0} / k_{jm}` for the edge members.
    pub kappa: f64,
    /// Crossing temperature of the edge pair.
    pub beta: f64,
    /// Energy span of the group.
    pub span: f64,
    /// Common spacing when the members are equidistant in energy.
    pub spacing: Option<f64>,
}

impl MultilevelGroup {
    pub fn is_equidistant(&self) -> bool {
        self.spacing.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Chain {
    TwoLevel(Segment),
    Multilevel(MultilevelGroup),
}

impl Chain {
    pub fn beta(&self) -> f64 {
        match self {
            Self::TwoLevel(s) => s.beta,
            Self::Multilevel(g) => g.beta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub members: Vec<EnvelopeLevel>,
    /// Chains in increasing energy order, hence decreasing `beta`.
    pub chains: Vec<Chain>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeDiagnostics {
    /// Second-largest over largest envelope population; 0 for a single member.
    pub ratio_r: f64,
    /// Distribution index of the most populated level.
    pub max_index: usize,
    /// The maximum sits in a multilevel group with `kappa = 1`, so its zeros
    /// lie on the time axis.
    pub multilevel_at_axis: bool,
}

/// Upper hull of `(E_j, ln k_j)` including members collinear within
/// [`COLLINEAR_TOLERANCE`].
pub fn compute_envelope(dist: &EnergyDistribution) -> Envelope {
    let e = dist.energies();
    let y = dist.log_populations();
    let n = dist.len();

    let mut hull: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            if y[a] <= chord(e, y, o, i, e[a]) + COLLINEAR_TOLERANCE {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }

    let mut members = Vec::with_capacity(hull.len());
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        members.push(a);
        members.extend(
            (a + 1..b).filter(|&c| (y[c] - chord(e, y, a, b, e[c])).abs() <= COLLINEAR_TOLERANCE),
        );
    }
    members.extend(hull.last());

    let env = Envelope::from_members(dist, &members);
    debug_assert!(env.satisfies_dominance(dist));
    env
}

fn chord(e: &[f64], y: &[f64], a: usize, b: usize, x: f64) -> f64 {
    y[a] + (y[b] - y[a]) * (x - e[a]) / (e[b] - e[a])
}

impl Envelope {
    /// Builds chains from an ordered list of member indices into `dist`.
    pub fn from_members(dist: &EnergyDistribution, members: &[usize]) -> Self {
        let e = dist.energies();
        let y = dist.log_populations();
        let levels: Vec<EnvelopeLevel> = members
            .iter()
            .map(|&i| EnvelopeLevel {
                index: i,
                energy: e[i],
                log_population: y[i],
            })
            .collect();

        let collinear = |from: usize, to: usize| {
            (from + 1..to).all(|m| {
                let c = members[m];
                (y[c] - chord(e, y, members[from], members[to], e[c])).abs() <= COLLINEAR_TOLERANCE
            })
        };

        let mut chains = Vec::new();
        let mut i = 0;
        while i + 1 < members.len() {
            let mut j = i + 1;
            while j + 1 < members.len() && collinear(i, j + 1) {
                j += 1;
            }
            let (a, b) = (members[i], members[j]);
            let beta = (y[a] - y[b]) / (e[a] - e[b]);
            if j == i + 1 {
                chains.push(Chain::TwoLevel(Segment {
                    a,
                    b,
                    beta,
                    period: TAU / (e[b] - e[a]).abs(),
                }));
            } else {
                let group = &members[i..=j];
                let span = e[b] - e[a];
                let unit = span / (group.len() - 1) as f64;
                let equidistant = group
                    .windows(2)
                    .all(|w| ((e[w[1]] - e[w[0]]) - unit).abs() <= 1e-9 * span.abs().max(1.0));
                chains.push(Chain::Multilevel(MultilevelGroup {
                    members: group.to_vec(),
                    kappa: (y[a] - y[b]).exp(),
                    beta,
                    span,
                    spacing: equidistant.then_some(unit),
                }));
            }
            i = j;
        }
        Self {
            members: levels,
            chains,
        }
    }

    pub fn member_indices(&self) -> Vec<usize> {
        self.members.iter().map(|m| m.index).collect()
    }

    pub fn segments(&self) -> impl Iterator<Item = &Segment> {
        self.chains.iter().filter_map(|c| match c {
            Chain::TwoLevel(s) => Some(s),
            Chain::Multilevel(_) => None,
        })
    }

    pub fn groups(&self) -> impl Iterator<Item = &MultilevelGroup> {
        self.chains.iter().filter_map(|c| match c {
            Chain::Multilevel(g) => Some(g),
            Chain::TwoLevel(_) => None,
        })
    }

    /// Literal dominance test between every adjacent member pair `(a, b)` and
    /// every level `c`: `-(E_b - E_a) ln k_c >= (E_c - E_b) ln k_a + (E_a - E_c) ln k_b`.
    pub fn satisfies_dominance(&self, dist: &EnergyDistribution) -> bool {
        let e = dist.energies();
        let y = dist.log_populations();
        self.members.windows(2).all(|w| {
            let (a, b) = (w[0].index, w[1].index);
            let d_ba = e[b] - e[a];
            (0..dist.len()).all(|c| {
                let lhs = -d_ba * y[c];
                let rhs = (e[c] - e[b]) * y[a] + (e[a] - e[c]) * y[b];
                lhs >= rhs - COLLINEAR_TOLERANCE * d_ba.abs()
            })
        })
    }

    /// Chain temperatures decrease strictly with energy.
    pub fn is_monotone(&self) -> bool {
        self.chains.windows(2).all(|w| w[0].beta() > w[1].beta())
    }

    pub fn diagnostics(&self) -> EnvelopeDiagnostics {
        let mut order: Vec<&EnvelopeLevel> = self.members.iter().collect();
        order.sort_by(|a, b| b.log_population.total_cmp(&a.log_population));
        let top = order[0];
        let ratio_r = order
            .get(1)
            .map_or(0.0, |second| (second.log_population - top.log_population).exp());
        let multilevel_at_axis = self.groups().any(|g| {
            g.members.contains(&top.index) && g.kappa.ln().abs() <= COLLINEAR_TOLERANCE
        });
        EnvelopeDiagnostics {
            ratio_r,
            max_index: top.index,
            multilevel_at_axis,
        }
    }

    /// Closed-form zeros of the envelope approximation inside `window`.
    ///
    /// A two-level chain `(a, b)` vanishes at `beta_ab + i T (n + 1/2)`. An
    /// equidistant group of `m + 1` members is a geometric sum vanishing at
    /// `beta + i (2 pi / spacing)(n + n0 / (m + 1))`, `n0 = 1..m`. Other groups
    /// fall back to their edge pair and are flagged `multilevel`.
    pub fn approximate_zeros(&self, window: &Rect) -> ZeroSet {
        let mut zeros = Vec::new();
        for (id, chain) in self.chains.iter().enumerate() {
            let beta = chain.beta();
            if !(window.beta_min..=window.beta_max).contains(&beta) {
                continue;
            }
            let (period, offsets, multilevel): (f64, Vec<f64>, bool) = match chain {
                Chain::TwoLevel(s) => (s.period, vec![0.5], false),
                Chain::Multilevel(g) => match g.spacing {
                    Some(unit) => {
                        let m = g.members.len() - 1;
                        let offsets = (1..=m).map(|n0| n0 as f64 / (m + 1) as f64).collect();
                        (TAU / unit, offsets, false)
                    }
                    None => (TAU / g.span.abs(), vec![0.5], true),
                },
            };
            for off in offsets {
                let n_lo = (window.t_min / period - off).ceil() as i64;
                let n_hi = (window.t_max / period - off).floor() as i64;
                for n in n_lo..=n_hi {
                    let t = period * (n as f64 + off);
                    zeros.push(Zero {
                        z: ComplexTime::new(beta, t),
                        multiplicity: 1,
                        provenance: Provenance::Approximate,
                        chain_id: Some(id as i64),
                        multilevel,
                    });
                }
            }
        }
        ZeroSet::new(zeros)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}
