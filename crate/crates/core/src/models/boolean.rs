//! Synchronous four-gene boolean network over `(S, E, N, P)`.
//!
//! ```text
//! S' = !E | (S & E & N)
//! E' = !S | (S & E & !N)
//! N' = S | E | N | P
//! P' = !S & ((E & N) | P)
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use super::emt::Phenotype;

/// A boolean state `(S, E, N, P)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BoolState(pub [bool; 4]);

impl BoolState {
    pub fn from_bits(s: u8, e: u8, n: u8, p: u8) -> Self {
        Self([s != 0, e != 0, n != 0, p != 0])
    }

    /// Encoding with `S` as the most significant bit.
    pub fn index(self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn from_index(i: usize) -> Self {
        Self([i & 8 != 0, i & 4 != 0, i & 2 != 0, i & 1 != 0])
    }

    pub fn all() -> impl Iterator<Item = BoolState> {
        (0..16).map(Self::from_index)
    }
}

impl fmt::Display for BoolState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = |v: bool| if v { '1' } else { '0' };
        write!(
            f,
            "({},{},{},{})",
            b(self.0[0]),
            b(self.0[1]),
            b(self.0[2]),
            b(self.0[3])
        )
    }
}

pub fn boolean_step(state: BoolState) -> BoolState {
    let [s, e, n, p] = state.0;
    BoolState([
        !e || (s && e && n),
        !s || (s && e && !n),
        s || e || n || p,
        !s && ((e && n) || p),
    ])
}

/// A fixed point (one state) or limit cycle, starting from its smallest
/// state index, together with every state that reaches it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BooleanAttractor {
    pub states: Vec<BoolState>,
    pub basin: Vec<BoolState>,
}

impl BooleanAttractor {
    pub fn is_fixed_point(&self) -> bool {
        self.states.len() == 1
    }
}

/// Follows the synchronous map from `start` until a state repeats; returns
/// the cycle reached and the number of steps taken before entering it.
fn reach_cycle(start: BoolState) -> (Vec<BoolState>, usize) {
    let mut path = vec![start];
    loop {
        let next = boolean_step(*path.last().expect("non-empty path"));
        if let Some(pos) = path.iter().position(|s| *s == next) {
            let mut cycle = path[pos..].to_vec();
            let min = cycle
                .iter()
                .enumerate()
                .min_by_key(|(_, s)| s.index())
                .map(|(i, _)| i)
                .unwrap_or(0);
            cycle.rotate_left(min);
            return (cycle, pos);
        }
        path.push(next);
    }
}

/// Exhaustive enumeration of the attractors of [`boolean_step`], ordered by
/// the index of their first state.
pub fn boolean_attractors() -> Vec<BooleanAttractor> {
    let mut attractors: Vec<BooleanAttractor> = Vec::new();
    for state in BoolState::all() {
        let (cycle, _) = reach_cycle(state);
        match attractors.iter_mut().find(|a| a.states == cycle) {
            Some(a) => a.basin.push(state),
            None => attractors.push(BooleanAttractor {
                states: cycle,
                basin: vec![state],
            }),
        }
    }
    attractors.sort_by_key(|a| a.states[0].index());
    attractors
}

/// Steps needed from `state` to enter its attractor.
pub fn transient_length(state: BoolState) -> usize {
    reach_cycle(state).1
}

/// Reference phenotype patterns.
pub const PHENOTYPE_TABLE: [(Phenotype, [u8; 4]); 3] = [
    (Phenotype::Epithelial, [0, 1, 1, 0]),
    (Phenotype::Senescent, [0, 1, 1, 1]),
    (Phenotype::Mesenchymal, [1, 0, 1, 0]),
];

/// How one reference phenotype pattern behaves under the update rules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhenotypeCheck {
    pub phenotype: Phenotype,
    pub state: BoolState,
    pub image: BoolState,
    pub is_fixed_point: bool,
    /// Set when the reference pattern is not a fixed point of the rules.
    pub discrepancy: bool,
}

pub fn phenotype_checks() -> Vec<PhenotypeCheck> {
    PHENOTYPE_TABLE
        .iter()
        .map(|(phenotype, b)| {
            let state = BoolState::from_bits(b[0], b[1], b[2], b[3]);
            let image = boolean_step(state);
            PhenotypeCheck {
                phenotype: *phenotype,
                state,
                image,
                is_fixed_point: image == state,
                discrepancy: image != state,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_fixed_points() {
        let m = BoolState::from_bits(1, 0, 1, 0);
        let s = BoolState::from_bits(0, 1, 1, 1);
        assert_eq!(boolean_step(m), m);
        assert_eq!(boolean_step(s), s);
    }

    #[test]
    fn epithelial_pattern_is_not_fixed() {
        let e = BoolState::from_bits(0, 1, 1, 0);
        assert_eq!(boolean_step(e), BoolState::from_bits(0, 1, 1, 1));
    }

    #[test]
    fn index_round_trip() {
        for i in 0..16 {
            assert_eq!(BoolState::from_index(i).index(), i);
        }
        assert_eq!(BoolState::from_bits(1, 0, 1, 0).index(), 10);
    }

    #[test]
    fn basins_partition_state_space() {
        let attractors = boolean_attractors();
        let mut seen: Vec<usize> = attractors
            .iter()
            .flat_map(|a| a.basin.iter().map(|s| s.index()))
            .collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..16).collect::<Vec<_>>());
        for a in &attractors {
            for s in &a.states {
                assert!(a.basin.contains(s));
            }
        }
    }

    #[test]
    fn transients_are_short() {
        for s in BoolState::all() {
            assert!(transient_length(s) <= 16);
        }
    }
}
