//! Four-variable Hill-function network for the epithelial / senescent /
//! mesenchymal decision (states `S, E, N, P`).
//!
//! ```text
//! dS/dt = a1 Hb(E,k1) + a2 H(S,k2) H(E,k3) H(N,k4) + bS - S
//! dE/dt = a3 Hb(S,k5) + a4 H(E,k6) H(S,k7) Hb(N,k8) + bE - E
//! dN/dt = a5 H(S,k9) + a6 H(E,k10) + a7 H(N,k11) + a8 H(P,k12) + bN - N
//! dP/dt = a9 Hb(S,k13) [a10 H(E,k14) H(N,k15) + a11 H(P,k16)] + bP - P
//! ```
//!
//! `H(x,k) = x^p / (x^p + k^p)` and `Hb = 1 - H`, with one shared exponent
//! `p`. The parameter vector is `alpha_1..alpha_11, k_1..k_16, beta_S,
//! beta_E, beta_N, beta_P`, optionally followed by `p`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynsys::ParamModel;
use crate::error::{Error, Result};

pub const N_ALPHA: usize = 11;
pub const N_K: usize = 16;
pub const N_BETA: usize = 4;
const K0: usize = N_ALPHA;
const B0: usize = N_ALPHA + N_K;
const P_INDEX: usize = N_ALPHA + N_K + N_BETA;

pub const STATE_NAMES: [&str; 4] = ["S", "E", "N", "P"];
const BETA_NAMES: [&str; 4] = ["beta_S", "beta_E", "beta_N", "beta_P"];

/// Variables each half-activation acts on, used for phenotype thresholds.
const K_INPUT: [usize; N_K] = [1, 0, 1, 2, 0, 1, 0, 2, 0, 1, 2, 3, 0, 1, 2, 3];

#[derive(Debug, Clone)]
pub struct Emt {
    /// Hill exponent used when `p` is not part of the parameter vector.
    pub hill_exponent: f64,
    pub controllable_exponent: bool,
    names: Vec<String>,
}

impl Emt {
    pub fn new(hill_exponent: f64, controllable_exponent: bool) -> Self {
        let mut names: Vec<String> = (1..=N_ALPHA)
            .map(|i| format!("alpha_{i}"))
            .chain((1..=N_K).map(|i| format!("k_{i}")))
            .chain(BETA_NAMES.iter().map(|s| s.to_string()))
            .collect();
        if controllable_exponent {
            names.push("p".to_string());
        }
        Self {
            hill_exponent,
            controllable_exponent,
            names,
        }
    }

    fn exponent(&self, params: &DVector<f64>) -> f64 {
        if self.controllable_exponent {
            params[P_INDEX]
        } else {
            self.hill_exponent
        }
    }

    /// Half-activation threshold of each state variable: the mean of the
    /// `k_j` through which that variable acts.
    pub fn thresholds(&self, params: &DVector<f64>) -> [f64; 4] {
        let mut sum = [0.0; 4];
        let mut count = [0usize; 4];
        for (j, &var) in K_INPUT.iter().enumerate() {
            sum[var] += params[K0 + j];
            count[var] += 1;
        }
        [0, 1, 2, 3].map(|v| sum[v] / count[v] as f64)
    }

    /// Boolean image of a state, thresholded at [`Emt::thresholds`].
    pub fn boolean_pattern(&self, x: &DVector<f64>, params: &DVector<f64>) -> [bool; 4] {
        let t = self.thresholds(params);
        [0, 1, 2, 3].map(|i| x[i] > t[i])
    }

    /// Phenotype of a stable state by its `(S, E, P)` pattern.
    pub fn phenotype(&self, x: &DVector<f64>, params: &DVector<f64>) -> Phenotype {
        match self.boolean_pattern(x, params) {
            [false, true, _, false] => Phenotype::Epithelial,
            [false, true, _, true] => Phenotype::Senescent,
            [true, false, _, false] => Phenotype::Mesenchymal,
            _ => Phenotype::Other,
        }
    }
}

impl Default for Emt {
    fn default() -> Self {
        Self::new(DEFAULT_HILL_EXPONENT, false)
    }
}

pub const DEFAULT_HILL_EXPONENT: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phenotype {
    Epithelial,
    Senescent,
    Mesenchymal,
    Other,
}

/// Hill activation with its partial derivatives in `x`, `k` and `p`.
#[derive(Debug, Clone, Copy)]
struct Hill {
    v: f64,
    dx: f64,
    dk: f64,
    dp: f64,
}

impl Hill {
    fn act(x: f64, k: f64, p: f64) -> Self {
        if x <= 0.0 {
            return Self {
                v: 0.0,
                dx: 0.0,
                dk: 0.0,
                dp: 0.0,
            };
        }
        // r = (x/k)^p keeps the ratio well scaled
        let r = (x / k).powf(p);
        let denom = 1.0 + r;
        let v = r / denom;
        let common = v / denom; // r / (1+r)^2
        Self {
            v,
            dx: p * common / x,
            dk: -p * common / k,
            dp: common * (x / k).ln(),
        }
    }

    fn rep(x: f64, k: f64, p: f64) -> Self {
        let h = Self::act(x, k, p);
        Self {
            v: 1.0 - h.v,
            dx: -h.dx,
            dk: -h.dk,
            dp: -h.dp,
        }
    }
}

struct Terms {
    h: [Hill; N_K],
}

impl Terms {
    fn new(x: &DVector<f64>, params: &DVector<f64>, p: f64) -> Self {
        let (s, e, n, pp) = (x[0], x[1], x[2], x[3]);
        let k = |j: usize| params[K0 + j - 1];
        Self {
            h: [
                Hill::rep(e, k(1), p),
                Hill::act(s, k(2), p),
                Hill::act(e, k(3), p),
                Hill::act(n, k(4), p),
                Hill::rep(s, k(5), p),
                Hill::act(e, k(6), p),
                Hill::act(s, k(7), p),
                Hill::rep(n, k(8), p),
                Hill::act(s, k(9), p),
                Hill::act(e, k(10), p),
                Hill::act(n, k(11), p),
                Hill::act(pp, k(12), p),
                Hill::rep(s, k(13), p),
                Hill::act(e, k(14), p),
                Hill::act(n, k(15), p),
                Hill::act(pp, k(16), p),
            ],
        }
    }

    /// Hill term indexed by its half-activation number `k_j`.
    fn k(&self, j: usize) -> Hill {
        self.h[j - 1]
    }
}

fn alpha(params: &DVector<f64>, i: usize) -> f64 {
    params[i - 1]
}

impl ParamModel for Emt {
    fn state_dim(&self) -> usize {
        4
    }

    fn param_names(&self) -> &[String] {
        &self.names
    }

    fn check_params(&self, params: &DVector<f64>) -> Result<()> {
        for i in (0..N_ALPHA).chain(B0..B0 + N_BETA) {
            if !(params[i] >= 0.0) {
                return Err(Error::ParamDomain {
                    name: self.names[i].clone(),
                    value: params[i],
                });
            }
        }
        for j in 0..N_K {
            let k = params[K0 + j];
            if !(k > 0.0) {
                return Err(Error::ParamDomain {
                    name: self.names[K0 + j].clone(),
                    value: k,
                });
            }
        }
        let p = self.exponent(params);
        if !(p >= 1.0) {
            return Err(Error::ParamDomain {
                name: "p".into(),
                value: p,
            });
        }
        Ok(())
    }

    fn field(&self, x: &DVector<f64>, params: &DVector<f64>) -> DVector<f64> {
        let p = self.exponent(params);
        let t = Terms::new(x, params, p);
        let a = |i| alpha(params, i);
        let b = |i: usize| params[B0 + i];
        let inner_p = a(10) * t.k(14).v * t.k(15).v + a(11) * t.k(16).v;
        DVector::from_vec(vec![
            a(1) * t.k(1).v + a(2) * t.k(2).v * t.k(3).v * t.k(4).v + b(0) - x[0],
            a(3) * t.k(5).v + a(4) * t.k(6).v * t.k(7).v * t.k(8).v + b(1) - x[1],
            a(5) * t.k(9).v + a(6) * t.k(10).v + a(7) * t.k(11).v + a(8) * t.k(12).v + b(2) - x[2],
            a(9) * t.k(13).v * inner_p + b(3) - x[3],
        ])
    }

    fn jacobian_x(&self, x: &DVector<f64>, params: &DVector<f64>) -> Option<DMatrix<f64>> {
        let p = self.exponent(params);
        let t = Terms::new(x, params, p);
        let a = |i| alpha(params, i);
        let (s, e, n, pp) = (0, 1, 2, 3);
        let mut j = DMatrix::<f64>::zeros(4, 4);

        // dS
        j[(0, e)] += a(1) * t.k(1).dx;
        j[(0, s)] += a(2) * t.k(2).dx * t.k(3).v * t.k(4).v;
        j[(0, e)] += a(2) * t.k(2).v * t.k(3).dx * t.k(4).v;
        j[(0, n)] += a(2) * t.k(2).v * t.k(3).v * t.k(4).dx;
        j[(0, s)] -= 1.0;
        // dE
        j[(1, s)] += a(3) * t.k(5).dx;
        j[(1, e)] += a(4) * t.k(6).dx * t.k(7).v * t.k(8).v;
        j[(1, s)] += a(4) * t.k(6).v * t.k(7).dx * t.k(8).v;
        j[(1, n)] += a(4) * t.k(6).v * t.k(7).v * t.k(8).dx;
        j[(1, e)] -= 1.0;
        // dN
        j[(2, s)] += a(5) * t.k(9).dx;
        j[(2, e)] += a(6) * t.k(10).dx;
        j[(2, n)] += a(7) * t.k(11).dx;
        j[(2, pp)] += a(8) * t.k(12).dx;
        j[(2, n)] -= 1.0;
        // dP
        let inner = a(10) * t.k(14).v * t.k(15).v + a(11) * t.k(16).v;
        j[(3, s)] += a(9) * t.k(13).dx * inner;
        j[(3, e)] += a(9) * t.k(13).v * a(10) * t.k(14).dx * t.k(15).v;
        j[(3, n)] += a(9) * t.k(13).v * a(10) * t.k(14).v * t.k(15).dx;
        j[(3, pp)] += a(9) * t.k(13).v * a(11) * t.k(16).dx;
        j[(3, pp)] -= 1.0;
        Some(j)
    }

    fn jacobian_p(&self, x: &DVector<f64>, params: &DVector<f64>) -> Option<DMatrix<f64>> {
        let p = self.exponent(params);
        let t = Terms::new(x, params, p);
        let a = |i| alpha(params, i);
        let ka = |jn: usize| K0 + jn - 1;
        let mut m = DMatrix::<f64>::zeros(4, self.names.len());

        // interaction strengths
        m[(0, 0)] = t.k(1).v;
        m[(0, 1)] = t.k(2).v * t.k(3).v * t.k(4).v;
        m[(1, 2)] = t.k(5).v;
        m[(1, 3)] = t.k(6).v * t.k(7).v * t.k(8).v;
        m[(2, 4)] = t.k(9).v;
        m[(2, 5)] = t.k(10).v;
        m[(2, 6)] = t.k(11).v;
        m[(2, 7)] = t.k(12).v;
        let inner = a(10) * t.k(14).v * t.k(15).v + a(11) * t.k(16).v;
        m[(3, 8)] = t.k(13).v * inner;
        m[(3, 9)] = a(9) * t.k(13).v * t.k(14).v * t.k(15).v;
        m[(3, 10)] = a(9) * t.k(13).v * t.k(16).v;

        // half-activations; the same product structure with d/dk in place of the value
        m[(0, ka(1))] = a(1) * t.k(1).dk;
        m[(0, ka(2))] = a(2) * t.k(2).dk * t.k(3).v * t.k(4).v;
        m[(0, ka(3))] = a(2) * t.k(2).v * t.k(3).dk * t.k(4).v;
        m[(0, ka(4))] = a(2) * t.k(2).v * t.k(3).v * t.k(4).dk;
        m[(1, ka(5))] = a(3) * t.k(5).dk;
        m[(1, ka(6))] = a(4) * t.k(6).dk * t.k(7).v * t.k(8).v;
        m[(1, ka(7))] = a(4) * t.k(6).v * t.k(7).dk * t.k(8).v;
        m[(1, ka(8))] = a(4) * t.k(6).v * t.k(7).v * t.k(8).dk;
        m[(2, ka(9))] = a(5) * t.k(9).dk;
        m[(2, ka(10))] = a(6) * t.k(10).dk;
        m[(2, ka(11))] = a(7) * t.k(11).dk;
        m[(2, ka(12))] = a(8) * t.k(12).dk;
        m[(3, ka(13))] = a(9) * t.k(13).dk * inner;
        m[(3, ka(14))] = a(9) * t.k(13).v * a(10) * t.k(14).dk * t.k(15).v;
        m[(3, ka(15))] = a(9) * t.k(13).v * a(10) * t.k(14).v * t.k(15).dk;
        m[(3, ka(16))] = a(9) * t.k(13).v * a(11) * t.k(16).dk;

        for i in 0..N_BETA {
            m[(i, B0 + i)] = 1.0;
        }

        if self.controllable_exponent {
            let d = |jn: usize| t.k(jn).dp;
            let v = |jn: usize| t.k(jn).v;
            m[(0, P_INDEX)] =
                a(1) * d(1) + a(2) * (d(2) * v(3) * v(4) + v(2) * d(3) * v(4) + v(2) * v(3) * d(4));
            m[(1, P_INDEX)] =
                a(3) * d(5) + a(4) * (d(6) * v(7) * v(8) + v(6) * d(7) * v(8) + v(6) * v(7) * d(8));
            m[(2, P_INDEX)] = a(5) * d(9) + a(6) * d(10) + a(7) * d(11) + a(8) * d(12);
            let d_inner = a(10) * (d(14) * v(15) + v(14) * d(15)) + a(11) * d(16);
            m[(3, P_INDEX)] = a(9) * (d(13) * inner + v(13) * d_inner);
        }
        Some(m)
    }
}

/// Checked-in default parameter set.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmtDefaults {
    pub hill_exponent: f64,
    pub alpha: Vec<f64>,
    pub k: Vec<f64>,
    pub beta: Vec<f64>,
}

pub const EMT_DEFAULTS_JSON: &str = include_str!("../../data/emt_default.json");

pub fn emt_defaults() -> EmtDefaults {
    serde_json::from_str(EMT_DEFAULTS_JSON).expect("checked-in EMT defaults parse")
}

/// Default parameter vector for `model` (31 entries, or 32 when the Hill
/// exponent is controllable).
pub fn emt_default_parameters(model: &Emt) -> DVector<f64> {
    let d = emt_defaults();
    let mut v: Vec<f64> = d.alpha.iter().chain(&d.k).chain(&d.beta).copied().collect();
    if model.controllable_exponent {
        v.push(d.hill_exponent);
    }
    DVector::from_vec(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_have_expected_shape() {
        let d = emt_defaults();
        assert_eq!(d.alpha.len(), N_ALPHA);
        assert_eq!(d.k.len(), N_K);
        assert_eq!(d.beta.len(), N_BETA);
        let m = Emt::default();
        let p = emt_default_parameters(&m);
        assert_eq!(p.len(), 31);
        assert!(p.iter().all(|v| *v > 0.0));
        assert_eq!(emt_default_parameters(&Emt::new(4.0, true)).len(), 32);
    }

    #[test]
    fn hill_at_half_activation() {
        let (k, p) = (1.7, 4.0);
        let h = Hill::act(k, k, p);
        assert!((h.v - 0.5).abs() < 1e-15);
        assert!((h.dx - p / (4.0 * k)).abs() < 1e-14);
    }

    #[test]
    fn source_column_is_unit() {
        let m = Emt::default();
        let p = emt_default_parameters(&m);
        let jp = m
            .jacobian_p(&DVector::from_vec(vec![0.3, 1.2, 0.8, 2.0]), &p)
            .unwrap();
        let col: Vec<f64> = jp.column(B0).iter().copied().collect();
        assert_eq!(col, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_nonpositive_half_activation() {
        let m = Emt::default();
        let mut p = emt_default_parameters(&m);
        p[K0 + 4] = 0.0;
        match m.check_params(&p) {
            Err(Error::ParamDomain { name, .. }) => assert_eq!(name, "k_5"),
            other => panic!("{other:?}"),
        }
    }
}
