//! Synthetic preference distributions with seeded reproducibility.
//!
//! A [`PreferenceSpec`] fixes the distribution kind and a master seed. Each
//! simulation instance regenerates preferences with a fresh `draw` index;
//! randomness that must stay fixed across instances (an employee's disliked
//! shifts) is derived from the master seed and the employee id only, so the
//! same employee dislikes the same shifts in every draw.

use crate::model::{ModelError, PreferenceProfile};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const PERTURBED_WINDOW: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PreferenceKind {
    /// All employees rank shifts identically.
    FixedRanked,
    /// Each employee's fixed set of `disliked` shifts sinks to the tail.
    Undesirable { disliked: usize },
    /// Shifts split into two equal halves; each employee prefers one half.
    Grouped,
    /// Each shift's rank is jittered inside a sliding window.
    Perturbed { window: u32 },
    /// Perturbed ranking with the employee's disliked shifts at the tail.
    PerturbedUndesirable { disliked: usize, window: u32 },
    /// Uniformly random permutation.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferenceSpec {
    pub kind: PreferenceKind,
    pub seed: u64,
}

impl PreferenceSpec {
    pub fn new(kind: PreferenceKind, seed: u64) -> Self {
        PreferenceSpec { kind, seed }
    }
}

/// Stable seed mixing (splitmix64 over the parts), identical on every
/// platform.
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    for &p in parts {
        state = state.wrapping_add(p).wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        state = z ^ (z >> 31);
    }
    state
}

fn disliked_shifts(seed: u64, employee: usize, count: usize, shifts: usize) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, 0xd15, employee as u64]));
    let mut ids: Vec<usize> = (0..shifts).collect();
    ids.shuffle(&mut rng);
    let mut mask = vec![false; shifts];
    for &l in ids.iter().take(count) {
        mask[l] = true;
    }
    mask
}

/// Moves masked shifts to the tail, preserving relative order in both parts.
fn sink_disliked(list: &[usize], mask: &[bool]) -> Vec<usize> {
    let (liked, disliked): (Vec<usize>, Vec<usize>) =
        list.iter().partition(|&&l| !mask[l]);
    liked.into_iter().chain(disliked).collect()
}

fn perturbed_list(rng: &mut ChaCha8Rng, shifts: usize, window: u32) -> Vec<usize> {
    let w = window as i64;
    let mut keyed: Vec<(i64, usize)> = (0..shifts)
        .map(|l| (l as i64 + rng.gen_range(-w..=w), l))
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, l)| l).collect()
}

/// Generates one preference profile. `draw` distinguishes simulation
/// instances: per-instance randomness (perturbation, grouping, uniform
/// orders) varies with it, while each employee's disliked set does not.
pub fn generate(
    spec: &PreferenceSpec,
    employees: usize,
    shifts: usize,
    draw: u64,
) -> Result<PreferenceProfile, ModelError> {
    let base: Vec<usize> = (0..shifts).collect();
    let emp_rng = |employee: usize| {
        ChaCha8Rng::seed_from_u64(derive_seed(&[spec.seed, draw, employee as u64]))
    };
    let lists: Vec<Vec<usize>> = match &spec.kind {
        PreferenceKind::FixedRanked => vec![base; employees],
        PreferenceKind::Undesirable { disliked } => {
            if *disliked >= shifts {
                return Err(ModelError::InvalidPreferences(format!(
                    "disliked count {disliked} must be below the shift count {shifts}"
                )));
            }
            (0..employees)
                .map(|i| sink_disliked(&base, &disliked_shifts(spec.seed, i, *disliked, shifts)))
                .collect()
        }
        PreferenceKind::Grouped => {
            if !shifts.is_multiple_of(2) {
                return Err(ModelError::InvalidPreferences(
                    "grouped preferences need an even shift count".into(),
                ));
            }
            let half = shifts / 2;
            (0..employees)
                .map(|i| {
                    let first_half: bool = emp_rng(i).gen();
                    let (a, b) = base.split_at(half);
                    let (pref, other) = if first_half { (a, b) } else { (b, a) };
                    pref.iter().chain(other).copied().collect()
                })
                .collect()
        }
        PreferenceKind::Perturbed { window } => (0..employees)
            .map(|i| perturbed_list(&mut emp_rng(i), shifts, *window))
            .collect(),
        PreferenceKind::PerturbedUndesirable { disliked, window } => {
            if *disliked >= shifts {
                return Err(ModelError::InvalidPreferences(format!(
                    "disliked count {disliked} must be below the shift count {shifts}"
                )));
            }
            (0..employees)
                .map(|i| {
                    let perturbed = perturbed_list(&mut emp_rng(i), shifts, *window);
                    sink_disliked(
                        &perturbed,
                        &disliked_shifts(spec.seed, i, *disliked, shifts),
                    )
                })
                .collect()
        }
        PreferenceKind::Uniform => (0..employees)
            .map(|i| {
                let mut list = base.clone();
                list.shuffle(&mut emp_rng(i));
                list
            })
            .collect(),
    };
    PreferenceProfile::new(lists, shifts)
}
