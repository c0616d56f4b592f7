//! Set families over a ground set `[n]` stored as bitmasks; element `i` is
//! bit `i - 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_GROUND_SET: u32 = 30;
pub const MAX_ENUMERATION_N: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FamilyFile", into = "FamilyFile")]
pub struct SetFamily {
    n: u32,
    sets: Vec<u32>,
}

/// On-disk form: either 1-indexed element lists or raw masks.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFile {
    n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sets: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    masks: Option<Vec<u32>>,
}

impl TryFrom<FamilyFile> for SetFamily {
    type Error = Error;

    fn try_from(file: FamilyFile) -> Result<Self> {
        match (file.sets, file.masks) {
            (Some(sets), None) => SetFamily::from_element_lists(file.n, &sets),
            (None, Some(masks)) => SetFamily::new(file.n, masks),
            _ => Err(Error::InvalidFamily("expected exactly one of \"sets\" or \"masks\"".into())),
        }
    }
}

impl From<SetFamily> for FamilyFile {
    fn from(f: SetFamily) -> Self {
        FamilyFile {
            n: f.n,
            sets: Some(f.element_lists()),
            masks: None,
        }
    }
}

impl SetFamily {
    /// Builds a family from distinct masks; they are stored sorted.
    pub fn new(n: u32, masks: impl IntoIterator<Item = u32>) -> Result<Self> {
        if !(1..=MAX_GROUND_SET).contains(&n) {
            return Err(Error::InvalidFamily(format!("n = {n} outside 1..={MAX_GROUND_SET}")));
        }
        let mut sets: Vec<u32> = masks.into_iter().collect();
        if sets.is_empty() {
            return Err(Error::InvalidFamily("family is empty".into()));
        }
        if let Some(&m) = sets.iter().find(|&&m| m >> n != 0) {
            return Err(Error::InvalidFamily(format!("mask {m} has bits outside [{n}]")));
        }
        sets.sort_unstable();
        if let Some(w) = sets.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidFamily(format!("duplicate set {}", w[0])));
        }
        Ok(SetFamily { n, sets })
    }

    pub fn from_element_lists(n: u32, lists: &[Vec<u32>]) -> Result<Self> {
        let mut masks = Vec::with_capacity(lists.len());
        for list in lists {
            let mut mask = 0u32;
            for &e in list {
                if e == 0 || e > n {
                    return Err(Error::InvalidFamily(format!("element {e} outside [{n}]")));
                }
                mask |= 1 << (e - 1);
            }
            masks.push(mask);
        }
        SetFamily::new(n, masks)
    }

    /// All `2^n` subsets of `[n]`.
    pub fn power_set(n: u32) -> Result<Self> {
        if n > 20 {
            return Err(Error::Resource(format!("power set of [{n}] is too large")));
        }
        SetFamily::new(n, 0..(1u32 << n))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn sets(&self) -> &[u32] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn contains(&self, mask: u32) -> bool {
        self.sets.binary_search(&mask).is_ok()
    }

    pub fn element_lists(&self) -> Vec<Vec<u32>> {
        self.sets
            .iter()
            .map(|&m| (1..=self.n).filter(|&e| m >> (e - 1) & 1 == 1).collect())
            .collect()
    }

    /// True for the family `{∅}`.
    pub fn is_empty_set_only(&self) -> bool {
        self.sets == [0]
    }
}

pub fn is_union_closed(f: &SetFamily) -> bool {
    f.sets
        .iter()
        .enumerate()
        .all(|(i, &a)| f.sets[i + 1..].iter().all(|&b| f.contains(a | b)))
}

/// `{A ∪ B : A, B ∈ f}`.
pub fn union_product(f: &SetFamily) -> SetFamily {
    let mut out: Vec<u32> = f
        .sets
        .iter()
        .flat_map(|&a| f.sets.iter().map(move |&b| a | b))
        .collect();
    out.sort_unstable();
    out.dedup();
    SetFamily { n: f.n, sets: out }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyReport {
    /// `counts[i]` is the number of sets containing element `i + 1`.
    pub counts: Vec<usize>,
    pub family_size: usize,
    pub max_ratio: f64,
}

impl FrequencyReport {
    pub fn ratio(&self, element: u32) -> f64 {
        self.counts[element as usize - 1] as f64 / self.family_size as f64
    }
}

pub fn frequencies(f: &SetFamily) -> FrequencyReport {
    let counts: Vec<usize> = (0..f.n)
        .map(|bit| f.sets.iter().filter(|&&m| m >> bit & 1 == 1).count())
        .collect();
    let max = counts.iter().copied().max().unwrap_or(0);
    FrequencyReport {
        max_ratio: max as f64 / f.len() as f64,
        counts,
        family_size: f.len(),
    }
}

/// Every union-closed family on `[n]` other than `{∅}`, in a fixed order.
///
/// Masks are decided in increasing order. Adding `m` to a closed family only
/// introduces unions `x | m ≥ m`, so earlier decisions are never revisited
/// and each closed family is reached by exactly one path.
pub fn enumerate_union_closed(n: u32) -> Result<Vec<SetFamily>> {
    if n == 0 {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    if n > MAX_ENUMERATION_N {
        return Err(Error::Resource(format!(
            "enumeration is limited to n <= {MAX_ENUMERATION_N}, got {n}"
        )));
    }
    let universe = 1u32 << n;
    let mut out = Vec::new();
    let mut stack: Vec<(u32, u64)> = vec![(0, 0)];
    while let Some((next, family)) = stack.pop() {
        let Some(m) = (next..universe).find(|&m| family >> m & 1 == 0) else {
            if family != 0 && family != 1 {
                let masks = (0..universe).filter(|&m| family >> m & 1 == 1);
                out.push(SetFamily::new(n, masks)?);
            }
            continue;
        };
        let mut grown = family | 1 << m;
        for x in (0..universe).filter(|&x| family >> x & 1 == 1) {
            grown |= 1 << (x | m);
        }
        // Pushed last so the branch containing `m` is explored first.
        stack.push((m + 1, family));
        stack.push((m + 1, grown));
    }
    Ok(out)
}

/// Same output as [`enumerate_union_closed`] (up to order) by filtering all
/// `2^(2^n)` subfamilies. Only meant as a cross-check.
pub fn enumerate_union_closed_naive(n: u32) -> Result<Vec<SetFamily>> {
    if n == 0 || n > MAX_ENUMERATION_N {
        return Err(Error::Precondition(format!("naive enumeration needs 1 <= n <= {MAX_ENUMERATION_N}")));
    }
    let universe = 1u32 << n;
    let mut out = Vec::new();
    for sub in 2u64..(1u64 << universe) {
        let masks: Vec<u32> = (0..universe).filter(|&m| sub >> m & 1 == 1).collect();
        let closed = masks
            .iter()
            .all(|&a| masks.iter().all(|&b| sub >> (a | b) & 1 == 1));
        if closed {
            out.push(SetFamily::new(n, masks)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjectureReport {
    pub n: u32,
    pub threshold: f64,
    pub families: usize,
    pub min_max_ratio: f64,
    /// First family in enumeration order attaining `min_max_ratio`.
    pub minimizer: SetFamily,
    pub violations: Vec<SetFamily>,
}

impl ConjectureReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every union-closed family on `[n]` has an element in at
/// least `threshold · |F|` sets.
pub fn conjecture_check(n: u32, threshold: f64) -> Result<ConjectureReport> {
    if !(threshold > 0.0 && threshold <= 0.5) {
        return Err(Error::Precondition(format!("threshold {threshold} outside (0, 1/2]")));
    }
    let families = enumerate_union_closed(n)?;
    let mut min_ratio = f64::INFINITY;
    let mut minimizer = None;
    let mut violations = Vec::new();
    for f in &families {
        let r = frequencies(f).max_ratio;
        if r < min_ratio {
            min_ratio = r;
            minimizer = Some(f.clone());
        }
        if r < threshold {
            violations.push(f.clone());
        }
    }
    Ok(ConjectureReport {
        n,
        threshold,
        families: families.len(),
        min_max_ratio: min_ratio,
        minimizer: minimizer.expect("enumeration is nonempty for n >= 1"),
        violations,
    })
}
