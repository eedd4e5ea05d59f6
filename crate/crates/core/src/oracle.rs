//! Brute-force re-derivations of the converse's counting and optimisation
//! results. Everything here enumerates literally (all distinct demands with
//! `N = K`, all cache orders, all LP vertices) and never calls the closed
//! forms it is meant to check.

use std::time::Instant;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::combinatorics::{
    choose, enumerate_permutations, factorial, CachePermutation, GroundSet, KSubset,
    LexPermutations, MaskCombinations,
};
use crate::converse::{
    averaged_bound, build_side_info_graph, count_coefficient, is_acyclic, selection_pattern,
    solve_lp, SymbolicSizes,
};
use crate::error::{MaccError, Result};
use crate::model::{DemandVector, SubfileId, SystemParams};
use crate::scalar::{fmt_exact, Scalar};

/// Caps checked before any exhaustive loop starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    /// Largest `Λ` whose `Λ!` cache orders may be enumerated.
    pub max_caches: usize,
    /// Largest number of candidate supports in LP vertex enumeration.
    pub max_vertices: usize,
    /// Largest number of `(demand, order)` pairs, `K!·Λ!`.
    pub max_pairs: u64,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self {
            max_caches: 5,
            max_vertices: 10_000,
            max_pairs: 1_000_000,
        }
    }
}

impl EnumerationBudget {
    pub fn check_orders(&self, check: &'static str, num_caches: usize) -> Result<()> {
        if num_caches > self.max_caches {
            return Err(MaccError::BudgetExceeded {
                check,
                required: format!("{num_caches}! cache orders"),
                budget: format!("at most {} caches", self.max_caches),
            });
        }
        Ok(())
    }

    /// `K!·Λ!` pairs, with `N = K`.
    pub fn check_pairs(
        &self,
        check: &'static str,
        num_caches: usize,
        access: usize,
    ) -> Result<u64> {
        self.check_orders(check, num_caches)?;
        let users = choose(num_caches, access);
        let pairs = factorial(users) * factorial(num_caches as u64);
        match pairs.to_u64() {
            Some(p) if p <= self.max_pairs => Ok(p),
            _ => Err(MaccError::BudgetExceeded {
                check,
                required: format!("{pairs} (demand, order) pairs"),
                budget: format!("{} pairs", self.max_pairs),
            }),
        }
    }

    pub fn check_vertices(&self, check: &'static str, num_caches: usize) -> Result<()> {
        let candidates = (num_caches + 1) * (num_caches + 2) / 2;
        if candidates > self.max_vertices {
            return Err(MaccError::BudgetExceeded {
                check,
                required: format!("{candidates} LP supports"),
                budget: format!("{} supports", self.max_vertices),
            });
        }
        Ok(())
    }
}

fn check_shape(num_caches: usize, access: usize) -> Result<GroundSet> {
    let g = GroundSet::new(num_caches)?;
    if access == 0 || access > num_caches {
        return Err(MaccError::InvalidParameter {
            name: "access",
            value: access.to_string(),
            reason: format!("must lie in [1, {num_caches}]"),
        });
    }
    Ok(g)
}

/// Visits every `(d, c)` pair with `N = K`: `d` ranges over the `K!` ways to
/// hand out files `1..=K`, `c` over all cache orders. The visitor receives
/// the file per user index and the order's `(user index, 𝒯)` pattern.
fn for_each_pair(
    num_caches: usize,
    access: usize,
    mut visit: impl FnMut(&[usize], &[(usize, KSubset)]),
) -> Result<()> {
    let g = GroundSet::new(num_caches)?;
    let users = choose(num_caches, access) as usize;
    let patterns: Vec<Vec<(usize, KSubset)>> = enumerate_permutations(g, num_caches)?
        .map(|perm| {
            selection_pattern(&perm, access)
                .into_iter()
                .map(|e| {
                    (
                        crate::combinatorics::rank_ksubset(&e.user) as usize,
                        e.stored_by,
                    )
                })
                .collect()
        })
        .collect();
    for demand in LexPermutations::new((1..=users).collect()) {
        for pattern in &patterns {
            visit(&demand, pattern);
        }
    }
    Ok(())
}

/// Occurrence counts of every subfile across all `R(d, c)` with `N = K`.
#[derive(Debug, Clone)]
pub struct SubfileCountTable {
    num_caches: usize,
    num_files: usize,
    pub pairs: u64,
    counts: Vec<u64>,
}

impl SubfileCountTable {
    pub fn count(&self, id: &SubfileId) -> u64 {
        self.counts[((id.file - 1) << self.num_caches) + id.stored_by.mask() as usize]
    }

    /// Counts for every `(n, 𝒯)` with `|𝒯| = level`.
    pub fn counts_at_level(&self, level: usize) -> Vec<(SubfileId, u64)> {
        let mut out = Vec::new();
        for n in 1..=self.num_files {
            for m in MaskCombinations::new(self.num_caches, level) {
                let id = SubfileId::new(n, KSubset::from_mask(m, self.num_caches));
                out.push((id, self.count(&id)));
            }
        }
        out
    }
}

pub fn subfile_count_table(
    num_caches: usize,
    access: usize,
    budget: &EnumerationBudget,
) -> Result<SubfileCountTable> {
    check_shape(num_caches, access)?;
    let pairs = budget.check_pairs("subfile_count", num_caches, access)?;
    let num_files = choose(num_caches, access) as usize;
    let mut counts = vec![0u64; num_files << num_caches];
    for_each_pair(num_caches, access, |demand, pattern| {
        for &(user, t) in pattern {
            counts[((demand[user] - 1) << num_caches) + t.mask() as usize] += 1;
        }
    })?;
    Ok(SubfileCountTable {
        num_caches,
        num_files,
        pairs,
        counts,
    })
}

/// Times `target` appears across all `R(d, c)` with `N = K`.
pub fn exhaustive_subfile_count(
    num_caches: usize,
    access: usize,
    target: &SubfileId,
    budget: &EnumerationBudget,
) -> Result<u64> {
    let table = subfile_count_table(num_caches, access, budget)?;
    if target.file == 0
        || target.file > table.num_files
        || target.stored_by.ground().size() != num_caches
    {
        return Err(MaccError::FileOutOfRange {
            file: target.file,
            files: table.num_files,
        });
    }
    Ok(table.count(target))
}

/// Minimum of `Σ f(t')x_{t'}` over every vertex of
/// `{x ≥ 0, Σx = 1, Σt'x ≤ τ}`: singletons `t' ≤ τ` and pairs `t₁ < τ < t₂`
/// with the budget tight. `f` is evaluated from raw binomials here.
pub fn lp_vertex_enumeration<S: Scalar>(
    num_caches: usize,
    access: usize,
    num_files: usize,
    memory: &S,
    budget: &EnumerationBudget,
) -> Result<S> {
    check_shape(num_caches, access)?;
    budget.check_vertices("lp_vertex_enumeration", num_caches)?;
    let tau = memory.clone() * S::from_usize(num_caches) / S::from_usize(num_files);
    if tau.is_negative() || tau > S::from_usize(num_caches) {
        return Err(MaccError::InvalidParameter {
            name: "memory",
            value: format!("{memory:?}"),
            reason: format!("must lie in [0, {num_files}]"),
        });
    }
    let objective: Vec<S> = (0..=num_caches)
        .map(|t| {
            S::from_ratio(
                &BigUint::from(choose(num_caches, t + access)),
                &BigUint::from(choose(num_caches, t)),
            )
        })
        .collect();
    let mut best: Option<S> = None;
    let mut consider = |v: S| {
        if best.as_ref().is_none_or(|b| v < *b) {
            best = Some(v);
        }
    };
    for (t, value) in objective.iter().enumerate() {
        if S::from_usize(t) <= tau {
            consider(value.clone());
        }
    }
    for lo in 0..=num_caches {
        for hi in lo + 1..=num_caches {
            let (a, b) = (S::from_usize(lo), S::from_usize(hi));
            if a < tau && tau < b {
                let w_hi = (tau.clone() - a.clone()) / (b.clone() - a);
                let w_lo = S::one() - w_hi.clone();
                consider(w_lo * objective[lo].clone() + w_hi * objective[hi].clone());
            }
        }
    }
    Ok(best.expect("t' = 0 is always feasible"))
}

/// Outcome of the cycle check over all cache orders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcyclicityReport {
    pub orders: u64,
    pub acyclic: u64,
    pub counterexamples: Vec<CachePermutation>,
}

/// Checks every order's selection for the canonical demand `d_𝒰 = rank(𝒰)+1`.
pub fn exhaustive_acyclicity(
    num_caches: usize,
    access: usize,
    budget: &EnumerationBudget,
) -> Result<AcyclicityReport> {
    let g = check_shape(num_caches, access)?;
    budget.check_orders("acyclicity", num_caches)?;
    let users = choose(num_caches, access) as usize;
    let params = SystemParams::new(num_caches, access, users, 8, 0)?;
    let demand = DemandVector::new_distinct(&params, (1..=users).collect())?;
    let graph = build_side_info_graph(&demand, num_caches, access)?;
    let mut report = AcyclicityReport {
        orders: 0,
        acyclic: 0,
        counterexamples: Vec::new(),
    };
    for perm in enumerate_permutations(g, num_caches)? {
        let vertices: Vec<SubfileId> = selection_pattern(&perm, access)
            .into_iter()
            .map(|e| SubfileId::new(demand.file_of(&e.user), e.stored_by))
            .collect();
        report.orders += 1;
        if is_acyclic(&graph, &vertices)? {
            report.acyclic += 1;
        } else {
            report.counterexamples.push(perm);
        }
    }
    Ok(report)
}

/// `(Σ_d Σ_c R(d, c)) / (K!·Λ!·B)` by literal summation, `N = K`.
pub fn averaged_bound_bruteforce<S: Scalar>(
    access: usize,
    sizes: &SymbolicSizes<S>,
    budget: &EnumerationBudget,
) -> Result<S> {
    let l = sizes.num_caches();
    check_shape(l, access)?;
    let users = choose(l, access) as usize;
    if sizes.num_files() != users {
        return Err(MaccError::InvalidSizes(format!(
            "brute force needs N = K = {users} files, sizes describe {}",
            sizes.num_files()
        )));
    }
    let pairs = budget.check_pairs("averaged_bound", l, access)?;
    let mut sum = S::zero();
    let mut failure = None;
    for_each_pair(l, access, |demand, pattern| {
        for &(user, t) in pattern {
            match sizes.size(&SubfileId::new(demand[user], t)) {
                Some(s) => sum = sum.clone() + s.clone(),
                None => failure = Some((demand[user], t)),
            }
        }
    })?;
    if let Some((file, t)) = failure {
        return Err(MaccError::MissingSize {
            file,
            stored_by: t.to_string(),
        });
    }
    Ok(sum / S::from_biguint(&BigUint::from(pairs)) / sizes.file_size().clone())
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub instances: u64,
    pub failures: Vec<String>,
    pub elapsed_ms: u64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn timed(check: &str, run: impl FnOnce() -> Result<(u64, Vec<String>)>) -> Result<CheckReport> {
    let start = Instant::now();
    let (instances, failures) = run()?;
    Ok(CheckReport {
        check: check.to_string(),
        instances,
        failures,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

/// Size profiles exercised by the averaged-bound check: every `t`-regular
/// split plus, when `Λ ≥ 1`, the half/half mix of levels 0 and 1.
fn test_profiles(num_caches: usize) -> Vec<Vec<BigRational>> {
    let zero = BigRational::zero();
    let one = BigRational::from_integer(1.into());
    let mut out: Vec<Vec<BigRational>> = (0..=num_caches)
        .map(|t| {
            let mut p = vec![zero.clone(); num_caches + 1];
            p[t] = one.clone();
            p
        })
        .collect();
    let mut mixed = vec![zero; num_caches + 1];
    let half = BigRational::new(1.into(), 2.into());
    mixed[0] = half.clone();
    mixed[1] = half;
    out.push(mixed);
    out
}

/// Runs all four oracles against the closed forms. Budgets are checked up
/// front so a refusal happens before any work.
pub fn run_verification(
    num_caches: usize,
    access: usize,
    budget: &EnumerationBudget,
) -> Result<Vec<CheckReport>> {
    check_shape(num_caches, access)?;
    budget.check_orders("acyclicity", num_caches)?;
    budget.check_pairs("subfile_count", num_caches, access)?;
    budget.check_vertices("lp_vertex_enumeration", num_caches)?;
    let users = choose(num_caches, access) as usize;
    let mut reports = Vec::new();

    reports.push(timed("subfile_count", || {
        let table = subfile_count_table(num_caches, access, budget)?;
        let mut failures = Vec::new();
        for level in 0..=num_caches {
            let expected = count_coefficient(num_caches, access, users, level)?.total;
            for (id, got) in table.counts_at_level(level) {
                if BigUint::from(got) != expected {
                    failures.push(format!(
                        "W[{}, {}]: counted {got}, closed form {expected}",
                        id.file, id.stored_by
                    ));
                }
            }
        }
        Ok((table.pairs, failures))
    })?);

    reports.push(timed("lp_vertex_enumeration", || {
        let mut failures = Vec::new();
        let points = 100u64;
        for j in 0..points {
            let m = BigRational::new((j as usize * users).into(), ((points - 1) as usize).into());
            let brute = lp_vertex_enumeration(num_caches, access, users, &m, budget)?;
            let closed = solve_lp(num_caches, access, users, &m)?.value;
            if brute != closed {
                failures.push(format!(
                    "M = {}: vertices {}, closed form {}",
                    fmt_exact(&m),
                    fmt_exact(&brute),
                    fmt_exact(&closed)
                ));
            }
        }
        Ok((points, failures))
    })?);

    reports.push(timed("acyclicity", || {
        let r = exhaustive_acyclicity(num_caches, access, budget)?;
        let failures = r
            .counterexamples
            .iter()
            .map(|p| format!("order {p} yields a cycle"))
            .collect();
        Ok((r.orders, failures))
    })?);

    reports.push(timed("averaged_bound", || {
        let mut failures = Vec::new();
        let mut evaluations = 0;
        let one = BigRational::from_integer(1.into());
        for profile in test_profiles(num_caches) {
            let sizes = SymbolicSizes::from_profile(num_caches, users, one.clone(), &profile)?;
            let brute = averaged_bound_bruteforce(access, &sizes, budget)?;
            let closed = averaged_bound(access, &sizes)?;
            evaluations += budget.check_pairs("averaged_bound", num_caches, access)?;
            if brute != closed {
                let shown: Vec<String> = profile.iter().map(fmt_exact).collect();
                failures.push(format!(
                    "profile [{}]: brute force {}, closed form {}",
                    shown.join(", "),
                    fmt_exact(&brute),
                    fmt_exact(&closed)
                ));
            }
        }
        Ok((evaluations, failures))
    })?);

    Ok(reports)
}
