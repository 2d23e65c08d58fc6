use super::AssembleError;
use crate::geom::{FootprintPolygon, EPS_MERGE};
use crate::rng::{derive_indexed, stream};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};

/// Plan IDs assigned to floors, lowest floor first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StackingOrder {
    pub plan_ids: Vec<String>,
}

/// `n! / (n - r)!`.
pub fn permutation_count(n: u64, r: u64) -> Result<u128, AssembleError> {
    if r > n {
        return Err(AssembleError::Permutation { n, r });
    }
    Ok((n - r + 1..=n).fold(1u128, |acc, k| acc.saturating_mul(k as u128)))
}

#[cfg(test)]
fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Groups floors whose footprints are congruent after moving each bounding
/// box's minimum corner to the origin. Classes are numbered by first
/// occurrence from the ground floor up.
pub fn floor_classes(footprints: &[FootprintPolygon]) -> Vec<usize> {
    let canon = |p: &FootprintPolygon| p.translated(-p.bbox().0);
    let mut reps: Vec<FootprintPolygon> = Vec::new();
    footprints
        .iter()
        .map(|fp| {
            let c = canon(fp);
            reps.iter().position(|r| r.congruent_to(&c, EPS_MERGE)).unwrap_or_else(|| {
                reps.push(c);
                reps.len() - 1
            })
        })
        .collect()
}

/// Ways to fill `slots` floors from `plans` plans of one class.
enum ClassSpace {
    /// Sequences without repeats, ranked lexicographically.
    Injective { n: usize, k: usize },
    /// Every plan used, `k - n` of them twice.
    Reuse(Vec<Vec<usize>>),
}

impl ClassSpace {
    fn new(class: usize, n: usize, k: usize) -> Result<Self, AssembleError> {
        if n == 0 {
            return Err(AssembleError::NoPlans { class });
        }
        if n >= k {
            return Ok(Self::Injective { n, k });
        }
        if k > 2 * n {
            return Err(AssembleError::InsufficientPlans { class, plans: n, floors: k });
        }
        let mut out = Vec::new();
        let mut seq = Vec::with_capacity(k);
        let mut uses = vec![0u8; n];
        reuse_dfs(n, k, k - n, &mut seq, &mut uses, &mut out);
        Ok(Self::Reuse(out))
    }

    fn count(&self) -> u128 {
        match self {
            Self::Injective { n, k } => permutation_count(*n as u64, *k as u64).unwrap_or(0),
            Self::Reuse(v) => v.len() as u128,
        }
    }

    fn unrank(&self, mut idx: u128) -> Vec<usize> {
        match self {
            Self::Injective { n, k } => {
                let mut left: Vec<usize> = (0..*n).collect();
                let mut out = Vec::with_capacity(*k);
                for pos in 0..*k {
                    let block = permutation_count((n - pos - 1) as u64, (k - pos - 1) as u64).unwrap_or(1);
                    out.push(left.remove((idx / block) as usize));
                    idx %= block;
                }
                out
            }
            Self::Reuse(v) => v[idx as usize].clone(),
        }
    }
}

fn reuse_dfs(n: usize, k: usize, repeats: usize, seq: &mut Vec<usize>, uses: &mut [u8], out: &mut Vec<Vec<usize>>) {
    if seq.len() == k {
        if uses.iter().all(|&u| u >= 1) {
            out.push(seq.clone());
        }
        return;
    }
    let doubled = uses.iter().filter(|&&u| u == 2).count();
    for p in 0..n {
        if uses[p] == 2 || (uses[p] == 1 && doubled == repeats) {
            continue;
        }
        uses[p] += 1;
        seq.push(p);
        reuse_dfs(n, k, repeats, seq, uses, out);
        seq.pop();
        uses[p] -= 1;
    }
}

/// Number of reuse-once orders of `n` plans on `k > n` floors.
#[cfg(test)]
pub(crate) fn reuse_count(n: u64, k: u64) -> u128 {
    if k <= n || k > 2 * n {
        return 0;
    }
    let r = k - n;
    binomial(n, r) * permutation_count(k, k).unwrap_or(0) / (1u128 << r)
}

/// Distinct stacking orders for floors whose footprint classes are
/// `floor_class` (lowest first), drawing class `c`'s plans from
/// `plans_by_class[c]`.
///
/// Plans are permuted across the floors of each class. When a building has
/// more than one floor and the top floor is alone in its class, that slot is
/// not permuted: each order gets a seeded choice among the class's plans.
/// If the theoretical count exceeds `cap`, `cap` distinct orders are drawn
/// uniformly with the given seed; the result is always sorted by rank.
pub fn enumerate_stackings(
    plans_by_class: &[Vec<String>],
    floor_class: &[usize],
    cap: Option<usize>,
    seed: u64,
) -> Result<Vec<StackingOrder>, AssembleError> {
    let mut seen = HashSet::new();
    for id in plans_by_class.iter().flatten() {
        if !seen.insert(id) {
            return Err(AssembleError::DuplicatePlan(id.clone()));
        }
    }
    let floors = floor_class.len();
    if floors == 0 {
        return Ok(Vec::new());
    }
    if let Some(&c) = floor_class.iter().find(|&&c| c >= plans_by_class.len()) {
        return Err(AssembleError::NoPlans { class: c });
    }
    let top_class = floor_class[floors - 1];
    let top_fixed = floors > 1 && floor_class.iter().filter(|&&c| c == top_class).count() == 1;
    if top_fixed && plans_by_class[top_class].is_empty() {
        return Err(AssembleError::NoPlans { class: top_class });
    }

    let mut classes: Vec<usize> = floor_class[..floors - top_fixed as usize].to_vec();
    classes.sort_unstable();
    classes.dedup();
    let mut spaces = Vec::new();
    for &c in &classes {
        let slots: Vec<usize> = (0..floors - top_fixed as usize).filter(|&f| floor_class[f] == c).collect();
        spaces.push((c, slots.clone(), ClassSpace::new(c, plans_by_class[c].len(), slots.len())?));
    }
    let total = spaces.iter().fold(1u128, |acc, (_, _, s)| acc.saturating_mul(s.count()));

    let ranks: Vec<u128> = match cap {
        Some(cap) if (cap as u128) < total => {
            let mut rng = stream(seed, "stackings");
            let mut picked = BTreeSet::new();
            while picked.len() < cap {
                picked.insert(rng.gen_range(0..total));
            }
            picked.into_iter().collect()
        }
        _ => (0..total).collect(),
    };

    Ok(ranks
        .into_iter()
        .map(|rank| {
            let mut ids = vec![String::new(); floors];
            let mut rest = rank;
            for (c, slots, space) in spaces.iter().rev() {
                let here = space.count();
                let choice = space.unrank(rest % here);
                rest /= here;
                for (&f, &p) in slots.iter().zip(&choice) {
                    ids[f] = plans_by_class[*c][p].clone();
                }
            }
            if top_fixed {
                let plans = &plans_by_class[top_class];
                let mut rng = ChaCha8Rng::seed_from_u64(derive_indexed(seed, "top", rank as u64));
                ids[floors - 1] = plans[rng.gen_range(0..plans.len())].clone();
            }
            StackingOrder { plan_ids: ids }
        })
        .collect())
}
