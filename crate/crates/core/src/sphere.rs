//! Centrally symmetric quadrature rules on the unit sphere.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereQuadrature {
    pub nodes: Vec<Vec3>,
    /// Positive weights summing to `4π`.
    pub weights: Vec<f64>,
    /// Highest total degree integrated exactly.
    pub degree: u32,
}

/// Node counts with a built-in rule.
pub const SUPPORTED_COUNTS: [usize; 6] = [12, 14, 26, 38, 50, 110];

/// All distinct vectors obtained from `base` by coordinate permutations and sign flips.
fn orbit(base: Vec3) -> Vec<Vec3> {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out: Vec<Vec3> = Vec::new();
    for p in PERMS {
        for signs in 0..8u32 {
            let mut v = [0.0; 3];
            for i in 0..3 {
                let s = if signs >> i & 1 == 1 { -1.0 } else { 1.0 };
                v[i] = s * base[p[i]];
            }
            if !out.iter().any(|w| (0..3).all(|i| w[i] == v[i])) {
                out.push(v);
            }
        }
    }
    out
}

/// Like [`orbit`] but only cyclic permutations (keeps a chiral orbit intact).
fn cyclic_orbit(base: Vec3) -> Vec<Vec3> {
    let mut out: Vec<Vec3> = Vec::new();
    for shift in 0..3 {
        for signs in 0..8u32 {
            let mut v = [0.0; 3];
            for i in 0..3 {
                let s = if signs >> i & 1 == 1 { -1.0 } else { 1.0 };
                v[i] = s * base[(i + shift) % 3];
            }
            if !out.iter().any(|w| (0..3).all(|i| w[i] == v[i])) {
                out.push(v);
            }
        }
    }
    out
}

struct Builder {
    nodes: Vec<Vec3>,
    weights: Vec<f64>,
}

impl Builder {
    fn new() -> Self {
        Builder { nodes: Vec::new(), weights: Vec::new() }
    }
    fn add(&mut self, pts: Vec<Vec3>, w: f64) -> &mut Self {
        for p in pts {
            self.nodes.push(p);
            self.weights.push(w);
        }
        self
    }
    fn a1(&mut self, w: f64) -> &mut Self {
        self.add(orbit([1.0, 0.0, 0.0]), w)
    }
    fn a2(&mut self, w: f64) -> &mut Self {
        let s = 0.5f64.sqrt();
        self.add(orbit([0.0, s, s]), w)
    }
    fn a3(&mut self, w: f64) -> &mut Self {
        let s = (1.0f64 / 3.0).sqrt();
        self.add(orbit([s, s, s]), w)
    }
    fn bk(&mut self, l: f64, w: f64) -> &mut Self {
        let m = (1.0 - 2.0 * l * l).sqrt();
        self.add(orbit([l, l, m]), w)
    }
    fn c1(&mut self, p: f64, w: f64) -> &mut Self {
        let q = (1.0 - p * p).sqrt();
        self.add(orbit([p, q, 0.0]), w)
    }
    fn finish(&mut self, degree: u32) -> SphereQuadrature {
        let total: f64 = self.weights.iter().sum();
        let weights = self.weights.iter().map(|w| w * 4.0 * PI / total).collect();
        SphereQuadrature { nodes: std::mem::take(&mut self.nodes), weights, degree }
    }
}

impl SphereQuadrature {
    /// Rule with exactly `count` nodes: 12 (icosahedron vertices) or a
    /// Lebedev rule with 14, 26, 38, 50 or 110 nodes.
    pub fn with_nodes(count: usize) -> Result<Self> {
        let mut b = Builder::new();
        Ok(match count {
            12 => {
                let phi = 0.5 * (1.0 + 5f64.sqrt());
                let norm = (1.0 + phi * phi).sqrt();
                b.add(cyclic_orbit([0.0, 1.0 / norm, phi / norm]), 1.0).finish(5)
            }
            14 => b.a1(1.0 / 15.0).a3(3.0 / 40.0).finish(5),
            26 => b.a1(1.0 / 21.0).a2(4.0 / 105.0).a3(9.0 / 280.0).finish(7),
            38 => b.a1(1.0 / 105.0).a3(9.0 / 280.0).c1(0.459_700_843_380_983_1, 1.0 / 35.0).finish(9),
            50 => b
                .a1(4.0 / 315.0)
                .a2(64.0 / 2835.0)
                .a3(27.0 / 1280.0)
                .bk(1.0 / 11f64.sqrt(), 14641.0 / 725760.0)
                .finish(11),
            110 => b
                .a1(0.003_828_270_494_937_162)
                .a3(0.009_793_737_512_487_512)
                .bk(0.185_115_635_344_736_2, 0.008_211_737_283_191_111)
                .bk(0.690_421_048_382_292_2, 0.009_942_814_891_178_103)
                .bk(0.395_689_473_055_941_9, 0.009_595_471_336_070_963)
                .c1(0.478_369_028_812_150_2, 0.009_694_996_361_663_028)
                .finish(17),
            _ => {
                return Err(Error::invalid(format!(
                    "no sphere rule with {count} nodes; supported counts are {SUPPORTED_COUNTS:?}"
                )))
            }
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// One representative of each antipodal pair, carrying the pair's total weight.
    ///
    /// Valid for integrands invariant under `ω -> -ω`.
    pub fn folded(&self) -> (Vec<Vec3>, Vec<f64>) {
        let mut nodes = Vec::with_capacity(self.len() / 2);
        let mut weights = Vec::with_capacity(self.len() / 2);
        for (p, &w) in self.nodes.iter().zip(&self.weights) {
            let first_nonzero = p.iter().find(|c| c.abs() > 1e-14).copied().unwrap_or(0.0);
            if first_nonzero > 0.0 {
                nodes.push(*p);
                weights.push(2.0 * w);
            }
        }
        (nodes, weights)
    }

    pub fn integrate<F: Fn(Vec3) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(p, w)| w * f(*p)).sum()
    }
}
