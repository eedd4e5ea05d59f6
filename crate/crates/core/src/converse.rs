//! Lower bound on the worst-case load under uncoded placement.
//!
//! With distinct demands, delivery is an index-coding problem whose messages
//! are the requested subfiles `W_{d_𝒰,𝒯}` (`𝒯 ∩ 𝒰 = ∅`). Any acyclic vertex
//! set of its side-information graph lower-bounds the broadcast size by the
//! total size of its subfiles. Each cache order `c` yields such a set; the
//! bounds are averaged over all distinct demands and all `Λ!` orders, which
//! collapses to `Σ_{t'} f(t')·x_{t'}` with `f(t') = C(Λ, t'+λ)/C(Λ, t')` and
//! `x_{t'}` the fraction of the library stored at replication level `t'`.
//! Minimising over `x` under the memory budget gives a piecewise-linear curve
//! through `(t'N/Λ, f(t'))`.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;

use crate::combinatorics::{
    binomial, choose, factorial, full_mask, submasks, CachePermutation, GroundSet, KSubset,
    MaskCombinations,
};
use crate::error::{MaccError, Result};
use crate::model::{DemandVector, SubfileId};
use crate::scalar::Scalar;
use crate::scheme::Placement;

/// Largest `Λ` for which per-subfile size tables (`N·2^Λ` entries) are built.
pub const MAX_SYMBOLIC_CACHES: usize = 20;

/// A requested subfile as an index-coding message: user `𝒰` wants
/// `W_{d_𝒰,𝒯}` with `𝒯 ∩ 𝒰 = ∅`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub user: KSubset,
    pub subfile: SubfileId,
}

/// Side-information graph of the delivery problem for one distinct demand.
///
/// Edge `(𝒰₁,𝒯₁) → (𝒰₂,𝒯₂)` iff `𝒰₁ ≠ 𝒰₂` and `𝒯₁ ∩ 𝒰₂ ≠ ∅`, i.e. user `𝒰₂`
/// caches the subfile wanted by `𝒰₁`.
#[derive(Debug, Clone)]
pub struct SideInfoGraph {
    vertices: Vec<Vertex>,
    index: HashMap<SubfileId, usize>,
    out_edges: Vec<Vec<usize>>,
}

impl SideInfoGraph {
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_edges.iter().map(Vec::len).sum()
    }

    pub fn contains(&self, id: &SubfileId) -> bool {
        self.index.contains_key(id)
    }

    fn lookup(&self, id: &SubfileId) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| MaccError::UnknownVertex {
                file: id.file,
                stored_by: id.stored_by.to_string(),
            })
    }

    pub fn has_edge(&self, from: &SubfileId, to: &SubfileId) -> Result<bool> {
        let (a, b) = (self.lookup(from)?, self.lookup(to)?);
        Ok(self.out_edges[a].contains(&b))
    }

    /// Out-neighbours of `id`.
    pub fn successors(&self, id: &SubfileId) -> Result<impl Iterator<Item = &SubfileId>> {
        let a = self.lookup(id)?;
        Ok(self.out_edges[a]
            .iter()
            .map(move |&b| &self.vertices[b].subfile))
    }
}

fn check_demand(demand: &DemandVector, num_caches: usize, access: usize) -> Result<()> {
    GroundSet::new(num_caches)?;
    if access == 0 || access > num_caches {
        return Err(MaccError::InvalidParameter {
            name: "access",
            value: access.to_string(),
            reason: format!("must lie in [1, {num_caches}]"),
        });
    }
    let users = choose(num_caches, access) as usize;
    if demand.files().len() != users {
        return Err(MaccError::DemandLength {
            got: demand.files().len(),
            expected: users,
        });
    }
    if !demand.is_distinct() {
        return Err(MaccError::NonDistinctDemand);
    }
    Ok(())
}

pub fn build_side_info_graph(
    demand: &DemandVector,
    num_caches: usize,
    access: usize,
) -> Result<SideInfoGraph> {
    check_demand(demand, num_caches, access)?;
    let full = full_mask(num_caches);
    let mut vertices = Vec::new();
    for (i, user_mask) in MaskCombinations::new(num_caches, access).enumerate() {
        let user = KSubset::from_mask(user_mask, num_caches);
        let file = demand.file_of_index(i);
        let mut ts: Vec<u64> = submasks(full & !user_mask).collect();
        ts.sort_unstable();
        for t in ts {
            vertices.push(Vertex {
                user,
                subfile: SubfileId::new(file, KSubset::from_mask(t, num_caches)),
            });
        }
    }
    let index = vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (v.subfile, i))
        .collect();
    let out_edges = vertices
        .iter()
        .map(|from| {
            vertices
                .iter()
                .enumerate()
                .filter(|(_, to)| {
                    to.user != from.user && from.subfile.stored_by.intersects(&to.user)
                })
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    Ok(SideInfoGraph {
        vertices,
        index,
        out_edges,
    })
}

/// Whether the subgraph induced by `selection` admits a topological order
/// (Kahn's algorithm).
pub fn is_acyclic(graph: &SideInfoGraph, selection: &[SubfileId]) -> Result<bool> {
    let ids = selection
        .iter()
        .map(|id| graph.lookup(id))
        .collect::<Result<Vec<_>>>()?;
    let local: HashMap<usize, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = local.len();
    let mut indegree = vec![0usize; n];
    let mut adj = vec![Vec::new(); n];
    for (&v, &i) in &local {
        for w in &graph.out_edges[v] {
            if let Some(&j) = local.get(w) {
                adj[i].push(j);
                indegree[j] += 1;
            }
        }
    }
    let mut ready: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut seen = 0;
    while let Some(i) = ready.pop_front() {
        seen += 1;
        for &j in &adj[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.push_back(j);
            }
        }
    }
    Ok(seen == n)
}

/// One `(𝒰, 𝒯)` pair picked by a cache order, before files are attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternEntry {
    /// Prefix length `i` at which the entry was added.
    pub step: usize,
    pub user: KSubset,
    pub stored_by: KSubset,
}

/// For the order `c₁ … c_Λ` and every `i ∈ [λ, Λ]`: all users inside
/// `{c₁…c_i}` that contain `c_i`, each paired with every `𝒯` avoiding
/// `{c₁…c_i}`. The result depends only on the order, not on the demand.
pub fn selection_pattern(perm: &CachePermutation, access: usize) -> Vec<PatternEntry> {
    let size = perm.len();
    let full = full_mask(size);
    let mut out = Vec::new();
    for i in access..=size {
        let prefix = perm.prefix(i).mask();
        let newest = 1u64 << (perm.order()[i - 1] - 1);
        let mut users: Vec<u64> = submasks(prefix)
            .filter(|&u| u & newest != 0 && u.count_ones() as usize == access)
            .collect();
        users.sort_unstable();
        let mut ts: Vec<u64> = submasks(full & !prefix).collect();
        ts.sort_unstable();
        for &u in &users {
            for &t in &ts {
                out.push(PatternEntry {
                    step: i,
                    user: KSubset::from_mask(u, size),
                    stored_by: KSubset::from_mask(t, size),
                });
            }
        }
    }
    out
}

/// The acyclic vertex set induced by a cache order for a given demand.
#[derive(Debug, Clone)]
pub struct AcyclicSelection {
    pub demand: DemandVector,
    pub perm: CachePermutation,
    pub entries: Vec<PatternEntry>,
}

impl AcyclicSelection {
    pub fn vertices(&self) -> Vec<SubfileId> {
        self.entries
            .iter()
            .map(|e| SubfileId::new(self.demand.file_of(&e.user), e.stored_by))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn acyclic_selection(
    demand: &DemandVector,
    perm: &CachePermutation,
    access: usize,
) -> Result<AcyclicSelection> {
    check_demand(demand, perm.len(), access)?;
    Ok(AcyclicSelection {
        demand: demand.clone(),
        perm: perm.clone(),
        entries: selection_pattern(perm, access),
    })
}

/// Sizes `|W_{n,𝒯}|` of an arbitrary uncoded split of every file over all
/// `2^Λ` cache subsets. Units are free (bits, or fractions of a file).
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicSizes<S> {
    num_caches: usize,
    num_files: usize,
    file_size: S,
    sizes: Vec<S>,
}

impl<S: Scalar> SymbolicSizes<S> {
    /// Builds from a size function; checks non-negativity and that each
    /// file's subfiles sum to `file_size`.
    pub fn new(
        num_caches: usize,
        num_files: usize,
        file_size: S,
        size_of: impl Fn(&SubfileId) -> S,
    ) -> Result<Self> {
        GroundSet::new(num_caches)?;
        if num_caches > MAX_SYMBOLIC_CACHES {
            return Err(MaccError::InvalidSizes(format!(
                "size tables are limited to {MAX_SYMBOLIC_CACHES} caches"
            )));
        }
        let width = 1usize << num_caches;
        let mut sizes = Vec::with_capacity(num_files * width);
        for n in 1..=num_files {
            let mut total = S::zero();
            for mask in 0..width as u64 {
                let s = size_of(&SubfileId::new(n, KSubset::from_mask(mask, num_caches)));
                if s.is_negative() {
                    return Err(MaccError::InvalidSizes(format!(
                        "negative size for a subfile of file {n}"
                    )));
                }
                total = total + s.clone();
                sizes.push(s);
            }
            if total != file_size {
                return Err(MaccError::InvalidSizes(format!(
                    "subfiles of file {n} sum to {total:?}, expected {file_size:?}"
                )));
            }
        }
        Ok(Self {
            num_caches,
            num_files,
            file_size,
            sizes,
        })
    }

    /// All mass on `|𝒯| = t`, split evenly.
    pub fn t_regular(num_caches: usize, num_files: usize, t: usize, file_size: S) -> Result<Self> {
        let mut profile = vec![S::zero(); num_caches + 1];
        *profile
            .get_mut(t)
            .ok_or_else(|| MaccError::InvalidParameter {
                name: "t",
                value: t.to_string(),
                reason: format!("must lie in [0, {num_caches}]"),
            })? = S::one();
        Self::from_profile(num_caches, num_files, file_size, &profile)
    }

    /// Fraction `profile[t']` of every file spread evenly over the
    /// `C(Λ, t')` subsets of size `t'`.
    pub fn from_profile(
        num_caches: usize,
        num_files: usize,
        file_size: S,
        profile: &[S],
    ) -> Result<Self> {
        if profile.len() != num_caches + 1 {
            return Err(MaccError::InvalidSizes(format!(
                "profile has {} levels, expected {}",
                profile.len(),
                num_caches + 1
            )));
        }
        let per_subset: Vec<S> = profile
            .iter()
            .enumerate()
            .map(|(t, x)| {
                x.clone() * file_size.clone() / S::from_usize(choose(num_caches, t) as usize)
            })
            .collect();
        Self::new(num_caches, num_files, file_size.clone(), |id| {
            per_subset[id.stored_by.len()].clone()
        })
    }

    pub fn num_caches(&self) -> usize {
        self.num_caches
    }

    pub fn num_files(&self) -> usize {
        self.num_files
    }

    pub fn file_size(&self) -> &S {
        &self.file_size
    }

    pub fn size(&self, id: &SubfileId) -> Option<&S> {
        if id.file == 0
            || id.file > self.num_files
            || id.stored_by.ground().size() != self.num_caches
        {
            return None;
        }
        self.sizes
            .get(((id.file - 1) << self.num_caches) + id.stored_by.mask() as usize)
    }

    /// Total size at each replication level: `Σ_n Σ_{|𝒯|=t'} |W_{n,𝒯}|`.
    pub fn level_totals(&self) -> Vec<S> {
        let mut totals = vec![S::zero(); self.num_caches + 1];
        for (i, s) in self.sizes.iter().enumerate() {
            let mask = i & ((1usize << self.num_caches) - 1);
            let level = mask.count_ones() as usize;
            totals[level] = totals[level].clone() + s.clone();
        }
        totals
    }

    /// `x_{t'} = Σ_n Σ_{|𝒯|=t'} |W_{n,𝒯}| / (N·B)`; a probability vector.
    pub fn profile(&self) -> Vec<S> {
        let denom = S::from_usize(self.num_files) * self.file_size.clone();
        self.level_totals()
            .into_iter()
            .map(|total| total / denom.clone())
            .collect()
    }

    /// Cumulative memory `Σ_c |cache c|`, in files: `Σ_{t'} t'·x_{t'}·N`.
    pub fn memory(&self) -> S {
        self.profile()
            .into_iter()
            .enumerate()
            .fold(S::zero(), |acc, (t, x)| acc + S::from_usize(t) * x)
            * S::from_usize(self.num_files)
            / S::from_usize(self.num_caches)
    }

    pub fn scaled(&self, factor: &S) -> Self {
        Self {
            num_caches: self.num_caches,
            num_files: self.num_files,
            file_size: self.file_size.clone() * factor.clone(),
            sizes: self
                .sizes
                .iter()
                .map(|s| s.clone() * factor.clone())
                .collect(),
        }
    }
}

impl SymbolicSizes<BigRational> {
    /// Sizes in bits of a concrete placement's split.
    pub fn from_placement(placement: &Placement) -> Result<Self> {
        let p = placement.params();
        Self::new(
            p.num_caches(),
            p.num_files(),
            BigRational::from_integer(p.file_size_bits().into()),
            |id| {
                placement
                    .subfile(id)
                    .map(|b| BigRational::from_integer(b.len().into()))
                    .unwrap_or_else(BigRational::zero)
            },
        )
    }
}

/// `R(d, c)`: total size of the selected subfiles.
pub fn bound_value<S: Scalar>(selection: &AcyclicSelection, sizes: &SymbolicSizes<S>) -> Result<S> {
    selection.vertices().iter().try_fold(S::zero(), |acc, id| {
        sizes
            .size(id)
            .map(|s| acc + s.clone())
            .ok_or_else(|| MaccError::MissingSize {
                file: id.file,
                stored_by: id.stored_by.to_string(),
            })
    })
}

fn check_level(num_caches: usize, access: usize, t: usize) -> Result<()> {
    GroundSet::new(num_caches)?;
    if access == 0 || access > num_caches {
        return Err(MaccError::InvalidParameter {
            name: "access",
            value: access.to_string(),
            reason: format!("must lie in [1, {num_caches}]"),
        });
    }
    if t > num_caches {
        return Err(MaccError::InvalidParameter {
            name: "t'",
            value: t.to_string(),
            reason: format!("must lie in [0, {num_caches}]"),
        });
    }
    Ok(())
}

/// How often a fixed subfile `W_{n,𝒯}` with `|𝒯| = t'` appears across all
/// bounds `R(d, c)`, `d` distinct and `c` any cache order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountCoefficient {
    /// `a_{t'}`.
    pub total: BigUint,
    /// Cache orders placing a given user `𝒰` entirely before a given `𝒯`:
    /// `λ!·t'!·(Λ−λ−t')!·C(Λ, t'+λ)`.
    pub permutation_count: BigUint,
    /// Distinct demands in which a given user requests a given file:
    /// `C(N,K)·K!/N`.
    pub demands_per_request: BigUint,
}

pub fn count_coefficient(
    num_caches: usize,
    access: usize,
    num_files: usize,
    t: usize,
) -> Result<CountCoefficient> {
    check_level(num_caches, access, t)?;
    let users = choose(num_caches, access);
    if (num_files as u64) < users {
        return Err(MaccError::TooFewFiles {
            files: num_files,
            users: users as usize,
        });
    }
    let (l, a, tt) = (num_caches as i64, access as i64, t as i64);
    let demands_per_request =
        binomial(num_files as i64, users as i64) * factorial(users) / BigUint::from(num_files);
    let permutation_count = if t + access > num_caches {
        BigUint::zero()
    } else {
        factorial(access as u64)
            * factorial(t as u64)
            * factorial((num_caches - access - t) as u64)
            * binomial(l, tt + a)
    };
    let total = binomial(l - tt, a) * &permutation_count * &demands_per_request;
    Ok(CountCoefficient {
        total,
        permutation_count,
        demands_per_request,
    })
}

/// `f(t') = C(Λ, t'+λ) / C(Λ, t')`.
pub fn f_ratio<S: Scalar>(num_caches: usize, access: usize, t: usize) -> Result<S> {
    check_level(num_caches, access, t)?;
    let (l, a, t) = (num_caches as i64, access as i64, t as i64);
    Ok(S::from_ratio(&binomial(l, t + a), &binomial(l, t)))
}

/// Average of `R(d, c)/B` over all distinct demands and all cache orders,
/// evaluated through the counting coefficients `a_{t'}`.
pub fn averaged_bound<S: Scalar>(access: usize, sizes: &SymbolicSizes<S>) -> Result<S> {
    let (l, n) = (sizes.num_caches(), sizes.num_files());
    let users = choose(l, access);
    let pairs = binomial(n as i64, users as i64) * factorial(users) * factorial(l as u64);
    let totals = sizes.level_totals();
    let mut acc = S::zero();
    for (t, total) in totals.into_iter().enumerate() {
        let a = count_coefficient(l, access, n, t)?.total;
        acc = acc + S::from_ratio(&a, &pairs) * total;
    }
    Ok(acc / sizes.file_size().clone())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CornerPoint<S> {
    pub t: usize,
    pub memory: S,
    pub load: S,
}

/// Piecewise-linear rate-memory curve given by its corner points.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurve<S> {
    pub corner_points: Vec<CornerPoint<S>>,
}

impl<S: Scalar> BoundCurve<S> {
    /// Linear interpolation between the corners enclosing `memory`.
    pub fn evaluate(&self, memory: &S) -> Result<S> {
        let pts = &self.corner_points;
        let out_of_range = || MaccError::InvalidParameter {
            name: "memory",
            value: format!("{memory:?}"),
            reason: "outside the curve's memory range".into(),
        };
        let first = pts.first().ok_or_else(out_of_range)?;
        if *memory < first.memory {
            return Err(out_of_range());
        }
        for w in pts.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if *memory <= b.memory {
                let frac =
                    (memory.clone() - a.memory.clone()) / (b.memory.clone() - a.memory.clone());
                return Ok(a.load.clone() + frac * (b.load.clone() - a.load.clone()));
            }
        }
        if *memory == pts[pts.len() - 1].memory {
            return Ok(pts[pts.len() - 1].load.clone());
        }
        Err(out_of_range())
    }

    /// Memory strictly increasing, load non-increasing, slopes non-decreasing.
    pub fn is_well_shaped(&self) -> bool {
        let pts = &self.corner_points;
        let increasing = pts.windows(2).all(|w| w[0].memory < w[1].memory);
        let non_increasing = pts.windows(2).all(|w| w[1].load <= w[0].load);
        if !increasing || !non_increasing {
            return false;
        }
        let slopes: Vec<S> = pts
            .windows(2)
            .map(|w| {
                (w[1].load.clone() - w[0].load.clone())
                    / (w[1].memory.clone() - w[0].memory.clone())
            })
            .collect();
        slopes.windows(2).all(|s| s[0] <= s[1])
    }
}

/// Corners `(tN/Λ, f(t))` for `t ∈ [0, Λ]`.
pub fn lower_bound_curve<S: Scalar>(
    num_caches: usize,
    access: usize,
    num_files: usize,
) -> Result<BoundCurve<S>> {
    let corner_points = (0..=num_caches)
        .map(|t| {
            Ok(CornerPoint {
                t,
                memory: S::from_usize(t * num_files) / S::from_usize(num_caches),
                load: f_ratio(num_caches, access, t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundCurve { corner_points })
}

/// Optimum of `min Σ f(t')x_{t'}` s.t. `Σ x = 1`, `Σ t'x_{t'} ≤ ΛM/N`, `x ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<S> {
    pub value: S,
    /// `x_{t'}` for `t' = 0..=Λ`.
    pub weights: Vec<S>,
}

impl<S: Scalar> LpSolution<S> {
    pub fn support(&self) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(t, _)| t)
            .collect()
    }
}

/// Closed-form optimum. Since `f` is decreasing and convex, the budget is
/// spent fully and the optimum splits mass between `⌊ΛM/N⌋` and `⌈ΛM/N⌉`.
pub fn solve_lp<S: Scalar>(
    num_caches: usize,
    access: usize,
    num_files: usize,
    memory: &S,
) -> Result<LpSolution<S>> {
    let budget = memory.clone() * S::from_usize(num_caches) / S::from_usize(num_files);
    let lower = budget
        .floor_usize()
        .filter(|&f| f <= num_caches)
        .ok_or_else(|| MaccError::InvalidParameter {
            name: "memory",
            value: format!("{memory:?}"),
            reason: format!("must lie in [0, {num_files}]"),
        })?;
    let upper_share = budget - S::from_usize(lower);
    let mut weights = vec![S::zero(); num_caches + 1];
    let mut value = f_ratio::<S>(num_caches, access, lower)?;
    if upper_share.is_zero() {
        weights[lower] = S::one();
    } else {
        let lower_share = S::one() - upper_share.clone();
        let hi = f_ratio::<S>(num_caches, access, lower + 1)?;
        value = lower_share.clone() * value + upper_share.clone() * hi;
        weights[lower] = lower_share;
        weights[lower + 1] = upper_share;
    }
    Ok(LpSolution { value, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::enumerate_permutations;
    use crate::model::SystemParams;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    fn identity_demand(l: usize, a: usize) -> DemandVector {
        let k = choose(l, a) as usize;
        let p = SystemParams::new(l, a, k, 8, 0).unwrap();
        DemandVector::new(&p, (1..=k).collect()).unwrap()
    }

    fn sub(l: usize, xs: &[usize]) -> KSubset {
        KSubset::new(GroundSet::new(l).unwrap(), xs).unwrap()
    }

    /// Subfile wanted by `user` under the identity demand.
    fn w(l: usize, user: &[usize], t: &[usize]) -> SubfileId {
        let u = sub(l, user);
        let file = crate::combinatorics::rank_ksubset(&u) as usize + 1;
        SubfileId::new(file, sub(l, t))
    }

    #[test]
    fn graph_size() {
        let g = build_side_info_graph(&identity_demand(4, 2), 4, 2).unwrap();
        assert_eq!(g.vertex_count(), 24);
        for l in 1..=6 {
            for a in 1..=l {
                let g = build_side_info_graph(&identity_demand(l, a), l, a).unwrap();
                assert_eq!(g.vertex_count(), choose(l, a) as usize * (1 << (l - a)));
            }
        }
    }

    #[test]
    fn edges_follow_side_information() {
        let g = build_side_info_graph(&identity_demand(4, 2), 4, 2).unwrap();
        let from = w(4, &[1, 2], &[3]);
        for t in [&[][..], &[2], &[4], &[2, 4]] {
            assert!(g.has_edge(&from, &w(4, &[1, 3], t)).unwrap());
        }
        // Same user: never an edge.
        assert!(!g.has_edge(&from, &w(4, &[1, 2], &[4])).unwrap());
        // Empty 𝒯 is cached nowhere.
        let empty = w(4, &[1, 2], &[]);
        assert_eq!(g.successors(&empty).unwrap().count(), 0);
    }

    #[test]
    fn requested_subfiles_only() {
        let g = build_side_info_graph(&identity_demand(4, 2), 4, 2).unwrap();
        assert!(g
            .vertices()
            .iter()
            .all(|v| !v.subfile.stored_by.intersects(&v.user)));
        assert!(matches!(
            g.has_edge(&w(4, &[1, 2], &[1]), &w(4, &[1, 3], &[])),
            Err(MaccError::UnknownVertex { .. })
        ));
    }

    #[test]
    fn graph_refuses_repeated_files() {
        let p = SystemParams::new(4, 2, 6, 8, 0).unwrap();
        let d = DemandVector::new(&p, vec![1, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(
            build_side_info_graph(&d, 4, 2).unwrap_err(),
            MaccError::NonDistinctDemand
        );
    }

    #[test]
    fn selection_for_identity_order() {
        let d = identity_demand(4, 2);
        let perm = CachePermutation::identity(GroundSet::new(4).unwrap());
        let sel = acyclic_selection(&d, &perm, 2).unwrap();
        assert_eq!(sel.len(), 11);
        let at = |i| sel.entries.iter().filter(|e| e.step == i).count();
        assert_eq!((at(2), at(3), at(4)), (4, 4, 3));
        let step2_users: Vec<_> = sel
            .entries
            .iter()
            .filter(|e| e.step == 2)
            .map(|e| e.user)
            .collect();
        assert!(step2_users.iter().all(|u| *u == sub(4, &[1, 2])));
        assert!(sel
            .entries
            .iter()
            .filter(|e| e.step == 4)
            .all(|e| e.stored_by.is_empty()));
    }

    #[test]
    fn full_access_selection_is_one_vertex() {
        let d = identity_demand(3, 3);
        for perm in enumerate_permutations(GroundSet::new(3).unwrap(), 8).unwrap() {
            let sel = acyclic_selection(&d, &perm, 3).unwrap();
            assert_eq!(sel.vertices(), vec![SubfileId::new(1, sub(3, &[]))]);
        }
    }

    #[test]
    fn selections_are_acyclic_vertex_subsets() {
        for l in 1..=6 {
            for a in 1..=l {
                let d = identity_demand(l, a);
                let g = build_side_info_graph(&d, l, a).unwrap();
                for perm in enumerate_permutations(GroundSet::new(l).unwrap(), 8).unwrap() {
                    let sel = acyclic_selection(&d, &perm, a).unwrap();
                    let verts = sel.vertices();
                    assert!(verts.iter().all(|v| g.contains(v)));
                    assert!(is_acyclic(&g, &verts).unwrap(), "order {perm}");
                }
            }
        }
    }

    #[test]
    fn cycle_detection_examples() {
        let g = build_side_info_graph(&identity_demand(4, 2), 4, 2).unwrap();
        let pair = [w(4, &[1, 2], &[3]), w(4, &[1, 3], &[2])];
        assert!(!is_acyclic(&g, &pair).unwrap());
        assert!(is_acyclic(&g, &[]).unwrap());
        assert!(is_acyclic(&g, &pair[..1]).unwrap());
        assert!(matches!(
            is_acyclic(&g, &[w(4, &[1, 2], &[2])]),
            Err(MaccError::UnknownVertex { .. })
        ));
    }

    #[test]
    fn bound_values() {
        let d = identity_demand(4, 2);
        let perm = CachePermutation::identity(GroundSet::new(4).unwrap());
        let sel = acyclic_selection(&d, &perm, 2).unwrap();
        let b = q(4096, 1);
        let t1 = SymbolicSizes::t_regular(4, 6, 1, b.clone()).unwrap();
        assert_eq!(bound_value(&sel, &t1).unwrap(), b);
        let zero = SymbolicSizes::new(4, 6, q(0, 1), |_| q(0, 1)).unwrap();
        assert_eq!(bound_value(&sel, &zero).unwrap(), q(0, 1));
        let t0 = SymbolicSizes::t_regular(4, 6, 0, b.clone()).unwrap();
        assert_eq!(bound_value(&sel, &t0).unwrap(), b * q(6, 1));
    }

    #[test]
    fn bound_value_reports_missing_sizes() {
        let d = identity_demand(4, 2);
        let perm = CachePermutation::identity(GroundSet::new(4).unwrap());
        let sel = acyclic_selection(&d, &perm, 2).unwrap();
        let short = SymbolicSizes::t_regular(4, 3, 1, q(1, 1)).unwrap();
        assert!(matches!(
            bound_value(&sel, &short),
            Err(MaccError::MissingSize { .. })
        ));
    }

    #[test]
    fn t_regular_bound_ignores_the_order() {
        for l in 1..=5 {
            for a in 1..=l {
                let d = identity_demand(l, a);
                for t in 0..=l {
                    let sizes = SymbolicSizes::t_regular(l, d.files().len(), t, q(1, 1)).unwrap();
                    let mut values = enumerate_permutations(GroundSet::new(l).unwrap(), 8)
                        .unwrap()
                        .map(|p| {
                            bound_value(&acyclic_selection(&d, &p, a).unwrap(), &sizes).unwrap()
                        });
                    let first = values.next().unwrap();
                    assert!(values.all(|v| v == first));
                }
            }
        }
    }

    #[test]
    fn sizes_validation() {
        assert!(SymbolicSizes::new(3, 2, q(1, 1), |_| q(1, 8)).is_ok());
        assert!(matches!(
            SymbolicSizes::new(3, 2, q(1, 1), |_| q(1, 7)),
            Err(MaccError::InvalidSizes(_))
        ));
        assert!(matches!(
            SymbolicSizes::new(2, 1, q(0, 1), |id| if id.stored_by.is_empty() {
                q(-1, 1)
            } else {
                q(1, 3)
            }),
            Err(MaccError::InvalidSizes(_))
        ));
        let s = SymbolicSizes::from_profile(
            4,
            6,
            q(1, 1),
            &[q(1, 2), q(1, 2), q(0, 1), q(0, 1), q(0, 1)],
        )
        .unwrap();
        assert_eq!(
            s.profile(),
            vec![q(1, 2), q(1, 2), q(0, 1), q(0, 1), q(0, 1)]
        );
        assert_eq!(s.memory(), q(3, 4));
    }

    #[test]
    fn sizes_from_scheme_placement() {
        let p = SystemParams::with_default_bits(4, 2, 6, 2).unwrap();
        let lib = crate::model::Library::random(&p, 1);
        let placement = crate::scheme::place(&lib, &p).unwrap();
        let sizes = SymbolicSizes::from_placement(&placement).unwrap();
        let mut expected = vec![q(0, 1); 5];
        expected[2] = q(1, 1);
        assert_eq!(sizes.profile(), expected);
        assert_eq!(sizes.memory(), p.memory());
    }

    #[test]
    fn coefficient_examples() {
        let c = count_coefficient(4, 2, 6, 1).unwrap();
        assert_eq!(c.total, BigUint::from(2880u32));
        assert_eq!(c.permutation_count, BigUint::from(8u32));
        assert_eq!(c.demands_per_request, BigUint::from(120u32));
        assert!(count_coefficient(4, 2, 6, 3).unwrap().total.is_zero());
        assert!(count_coefficient(4, 2, 6, 5).is_err());
        assert!(count_coefficient(4, 2, 5, 1).is_err());
    }

    #[test]
    fn permutation_count_by_enumeration() {
        // Orders placing all of 𝒰 before all of 𝒯.
        for l in 1..=6 {
            let g = GroundSet::new(l).unwrap();
            for a in 1..=l {
                for t in 0..=(l - a) {
                    let u = KSubset::from_mask(full_mask(a), l);
                    let tt = KSubset::from_mask(full_mask(a + t) & !full_mask(a), l);
                    let count = enumerate_permutations(g, 8)
                        .unwrap()
                        .filter(|p| {
                            let pos = |c: usize| p.order().iter().position(|&x| x == c).unwrap();
                            u.iter().all(|x| tt.iter().all(|y| pos(x) < pos(y)))
                        })
                        .count();
                    assert_eq!(
                        BigUint::from(count),
                        count_coefficient(l, a, choose(l, a) as usize, t)
                            .unwrap()
                            .permutation_count
                    );
                }
            }
        }
    }

    #[test]
    fn aggregation_identity_example() {
        let c = count_coefficient(4, 2, 6, 1).unwrap();
        let lhs = BigRational::new(
            (BigUint::from(6u32) * c.total).into(),
            (factorial(6) * factorial(4)).into(),
        );
        assert_eq!(lhs, q(1, 1));
        assert_eq!(f_ratio::<BigRational>(4, 2, 1).unwrap(), lhs);
    }

    #[test]
    fn f_examples() {
        assert_eq!(f_ratio::<BigRational>(4, 2, 0).unwrap(), q(6, 1));
        assert_eq!(f_ratio::<BigRational>(4, 2, 2).unwrap(), q(1, 6));
        assert_eq!(f_ratio::<BigRational>(4, 2, 4).unwrap(), q(0, 1));
        assert!(f_ratio::<BigRational>(4, 2, 5).is_err());
        assert!(f_ratio::<BigRational>(4, 0, 1).is_err());
    }

    #[test]
    fn curve_for_4_2_6() {
        let c = lower_bound_curve::<BigRational>(4, 2, 6).unwrap();
        let pts: Vec<(BigRational, BigRational)> = c
            .corner_points
            .iter()
            .map(|p| (p.memory.clone(), p.load.clone()))
            .collect();
        assert_eq!(
            pts,
            vec![
                (q(0, 1), q(6, 1)),
                (q(3, 2), q(1, 1)),
                (q(3, 1), q(1, 6)),
                (q(9, 2), q(0, 1)),
                (q(6, 1), q(0, 1)),
            ]
        );
        assert!(c.is_well_shaped());
        assert_eq!(c.evaluate(&q(3, 4)).unwrap(), q(7, 2));
        assert!(c.evaluate(&q(7, 1)).is_err());
        assert!(c.evaluate(&q(-1, 1)).is_err());
    }

    #[test]
    fn single_user_curve() {
        for l in 1..=6 {
            let c = lower_bound_curve::<BigRational>(l, l, 1).unwrap();
            assert_eq!(c.corner_points[0].load, q(1, 1));
            assert!(c.corner_points[1..].iter().all(|p| p.load.is_zero()));
        }
    }

    #[test]
    fn curve_matches_scheme_corners() {
        for l in 1..=6 {
            for a in 1..=l {
                let n = choose(l, a) as usize + 2;
                let c = lower_bound_curve::<BigRational>(l, a, n).unwrap();
                for p in &c.corner_points {
                    assert_eq!(
                        p.load,
                        crate::scheme::corner_point_load::<BigRational>(l, a, p.t).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn lp_examples() {
        let at = |m: BigRational| solve_lp(4, 2, 6, &m).unwrap();
        assert_eq!(at(q(0, 1)).value, q(6, 1));
        assert_eq!(at(q(0, 1)).support(), vec![0]);
        let mid = at(q(3, 4));
        assert_eq!(mid.value, q(7, 2));
        assert_eq!(mid.weights[..2], [q(1, 2), q(1, 2)]);
        assert_eq!(at(q(6, 1)).value, q(0, 1));
        assert!(solve_lp(4, 2, 6, &q(13, 2)).is_err());
        assert!(solve_lp(4, 2, 6, &q(-1, 2)).is_err());
        assert!((solve_lp(4, 2, 6, &0.75f64).unwrap().value - 3.5).abs() < 1e-12);
    }

    #[test]
    fn lp_agrees_with_curve() {
        let c = lower_bound_curve::<BigRational>(5, 2, 10).unwrap();
        for j in 0..=40 {
            let m = q(j, 4);
            assert_eq!(
                solve_lp(5, 2, 10, &m).unwrap().value,
                c.evaluate(&m).unwrap()
            );
        }
    }

    #[test]
    fn closed_form_average_examples() {
        let t1 = SymbolicSizes::t_regular(4, 6, 1, q(1, 1)).unwrap();
        assert_eq!(averaged_bound(2, &t1).unwrap(), q(1, 1));
        let t0 = SymbolicSizes::t_regular(4, 6, 0, q(1, 1)).unwrap();
        assert_eq!(averaged_bound(2, &t0).unwrap(), q(6, 1));
        // Bits or file fractions give the same normalised value.
        let bits = SymbolicSizes::t_regular(4, 6, 1, q(4096, 1)).unwrap();
        assert_eq!(averaged_bound(2, &bits).unwrap(), q(1, 1));
    }
}
