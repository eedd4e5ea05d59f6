//! Achievability: cache-level MAN placement, XOR multicast over
//! `(t+λ)`-subsets of caches, per-user decoding and exact load accounting.
//!
//! Subfile `W_{n,𝒯}` with `|𝒯| = t` is stored in every cache of `𝒯`. For each
//! span `S` with `|S| = t + λ` the server sends
//!
//! ```text
//! X_S = XOR over users 𝒰 ⊆ S, |𝒰| = λ, of W_{d_𝒰, S∖𝒰}
//! ```
//!
//! User `𝒰 ⊆ S` holds every other term, since `(S∖𝒰') ∩ 𝒰 ≠ ∅` whenever
//! `𝒰' ≠ 𝒰`, and recovers `W_{d_𝒰, S∖𝒰}`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bits::Bits;
use crate::combinatorics::{binomial, enumerate_ksubsets, submasks, KSubset};
use crate::error::{MaccError, Result};
use crate::model::{split_file, DemandVector, Library, SubfileId, SystemParams};
use crate::scalar::Scalar;

/// Uncoded cache contents: every cache stores verbatim copies of subfiles.
#[derive(Debug, Clone)]
pub struct Placement {
    params: SystemParams,
    cache_contents: Vec<BTreeSet<SubfileId>>,
    subfiles: BTreeMap<SubfileId, Bits>,
}

impl Placement {
    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// Subfiles held by `cache` (1-based).
    pub fn cache(&self, cache: usize) -> &BTreeSet<SubfileId> {
        &self.cache_contents[cache - 1]
    }

    /// Bits stored in `cache`.
    pub fn cache_bits(&self, cache: usize) -> u64 {
        self.cache(cache)
            .iter()
            .map(|id| self.subfiles[id].len() as u64)
            .sum()
    }

    /// Server-side copy of a subfile (the server holds the whole library).
    pub fn subfile(&self, id: &SubfileId) -> Option<&Bits> {
        self.subfiles.get(id)
    }

    pub fn subfile_ids(&self) -> impl Iterator<Item = &SubfileId> {
        self.subfiles.keys()
    }
}

fn check_library(library: &Library, params: &SystemParams) -> Result<()> {
    if library.num_files() != params.num_files()
        || library.bits_per_file() != params.file_size_bits()
    {
        return Err(MaccError::InvalidParameter {
            name: "library",
            value: format!(
                "{} files of {} bits",
                library.num_files(),
                library.bits_per_file()
            ),
            reason: format!(
                "expected {} files of {} bits",
                params.num_files(),
                params.file_size_bits()
            ),
        });
    }
    Ok(())
}

pub fn place(library: &Library, params: &SystemParams) -> Result<Placement> {
    check_library(library, params)?;
    let mut cache_contents = vec![BTreeSet::new(); params.num_caches()];
    let mut subfiles = BTreeMap::new();
    for n in 1..=params.num_files() {
        let file = library.file(n);
        let mut offset = 0usize;
        for (id, bits) in split_file(n, params)? {
            let end = offset + bits as usize;
            subfiles.insert(id, file.slice(offset..end));
            offset = end;
            for c in id.stored_by.iter() {
                cache_contents[c - 1].insert(id);
            }
        }
    }
    Ok(Placement {
        params: *params,
        cache_contents,
        subfiles,
    })
}

/// Everything user `𝒰` can read from its caches: `{W_{n,𝒯} : 𝒯 ∩ 𝒰 ≠ ∅}`.
pub fn accessible_subfiles(user: &KSubset, placement: &Placement) -> BTreeSet<SubfileId> {
    user.iter()
        .flat_map(|c| placement.cache(c).iter().copied())
        .collect()
}

/// Read access restricted to the caches a user is wired to.
struct CacheView<'a> {
    user: KSubset,
    placement: &'a Placement,
}

impl<'a> CacheView<'a> {
    fn get(&self, id: &SubfileId) -> Option<&'a Bits> {
        self.user
            .iter()
            .any(|c| self.placement.cache(c).contains(id))
            .then(|| &self.placement.subfiles[id])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct XorTerm {
    pub user: KSubset,
    pub file: usize,
    pub stored_by: KSubset,
}

impl XorTerm {
    pub fn subfile(&self) -> SubfileId {
        SubfileId::new(self.file, self.stored_by)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulticastMessage {
    pub span: KSubset,
    pub terms: Vec<XorTerm>,
    pub payload: Bits,
}

/// One line of the delivery transcript.
#[derive(Debug, Clone, Serialize)]
pub struct TranscriptRecord {
    pub span: KSubset,
    pub xor_terms: Vec<XorTerm>,
    pub payload_hash: String,
}

impl MulticastMessage {
    pub fn payload_hash(&self) -> String {
        hex::encode(Sha256::digest(self.payload.as_bytes()))
    }

    pub fn transcript_record(&self) -> TranscriptRecord {
        TranscriptRecord {
            span: self.span,
            xor_terms: self.terms.clone(),
            payload_hash: self.payload_hash(),
        }
    }
}

/// The `λ`-subsets of `span`, colex ordered.
fn users_within(span: &KSubset, access: usize) -> Vec<KSubset> {
    let mut masks: Vec<u64> = submasks(span.mask())
        .filter(|m| m.count_ones() as usize == access)
        .collect();
    masks.sort_unstable();
    masks
        .into_iter()
        .map(|m| KSubset::from_mask(m, span.ground().size()))
        .collect()
}

/// One message per `(t+λ)`-subset of caches, in colex order of the span.
pub fn deliver(placement: &Placement, demand: &DemandVector) -> Result<Vec<MulticastMessage>> {
    let params = placement.params();
    if demand.files().len() != params.num_users() {
        return Err(MaccError::DemandLength {
            got: demand.files().len(),
            expected: params.num_users(),
        });
    }
    let span_size = params.cache_param() + params.access_degree();
    if span_size > params.num_caches() {
        return Ok(Vec::new());
    }
    let payload_bits = params.subfile_bits()? as usize;
    enumerate_ksubsets(params.ground(), span_size)?
        .into_iter()
        .map(|span| {
            let terms: Vec<XorTerm> = users_within(&span, params.access_degree())
                .into_iter()
                .map(|user| XorTerm {
                    user,
                    file: demand.file_of(&user),
                    stored_by: span.difference(&user),
                })
                .collect();
            let mut payload = Bits::zeros(payload_bits);
            for term in &terms {
                payload.xor_assign(&placement.subfiles[&term.subfile()]);
            }
            Ok(MulticastMessage {
                span,
                terms,
                payload,
            })
        })
        .collect()
}

/// Rebuilds the file requested by `user` from its caches and the broadcast.
pub fn decode(
    user: &KSubset,
    demand: &DemandVector,
    messages: &[MulticastMessage],
    placement: &Placement,
) -> Result<Bits> {
    let params = placement.params();
    let view = CacheView {
        user: *user,
        placement,
    };
    let by_span: HashMap<KSubset, &MulticastMessage> =
        messages.iter().map(|m| (m.span, m)).collect();
    let wanted = demand.file_of(user);
    let mut out = Bits::default();
    for (id, _) in split_file(wanted, params)? {
        if let Some(cached) = view.get(&id) {
            out.append(cached);
            continue;
        }
        let span = id.stored_by.union(user);
        let msg = by_span
            .get(&span)
            .ok_or_else(|| MaccError::MissingMessage {
                span: span.to_string(),
            })?;
        let mut piece = msg.payload.clone();
        let mut found = false;
        for term in &msg.terms {
            if term.user == *user && term.subfile() == id {
                found = true;
                continue;
            }
            let side = view
                .get(&term.subfile())
                .ok_or_else(|| MaccError::Undecodable {
                    user: user.to_string(),
                    file: term.file,
                    stored_by: term.stored_by.to_string(),
                })?;
            piece.xor_assign(side);
        }
        if !found {
            return Err(MaccError::Undecodable {
                user: user.to_string(),
                file: id.file,
                stored_by: id.stored_by.to_string(),
            });
        }
        out.append(&piece);
    }
    Ok(out)
}

/// Transmitted bits normalised by the file size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    #[serde(serialize_with = "crate::scalar::serialize_exact")]
    pub load: BigRational,
    pub message_count: u64,
    pub per_message_bits: u64,
}

impl LoadReport {
    pub fn measure(messages: &[MulticastMessage], file_bits: u64) -> Self {
        let per_message_bits = messages.first().map_or(0, |m| m.payload.len() as u64);
        debug_assert!(messages
            .iter()
            .all(|m| m.payload.len() as u64 == per_message_bits));
        let message_count = messages.len() as u64;
        Self {
            load: BigRational::new(
                BigInt::from(message_count * per_message_bits),
                BigInt::from(file_bits),
            ),
            message_count,
            per_message_bits,
        }
    }

    pub fn transmitted_bits(&self) -> u64 {
        self.message_count * self.per_message_bits
    }
}

/// End-to-end run at one corner point.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub placement: Placement,
    pub messages: Vec<MulticastMessage>,
    pub report: LoadReport,
    /// Decoded file per user, in topology order.
    pub decoded: Vec<Bits>,
}

impl Simulation {
    /// Number of users whose output equals the requested library file.
    pub fn correct_users(&self, library: &Library, demand: &DemandVector) -> usize {
        self.decoded
            .iter()
            .enumerate()
            .filter(|(i, bits)| *bits == library.file(demand.file_of_index(*i)))
            .count()
    }
}

pub fn simulate(
    library: &Library,
    params: &SystemParams,
    demand: &DemandVector,
) -> Result<Simulation> {
    let placement = place(library, params)?;
    let messages = deliver(&placement, demand)?;
    let report = LoadReport::measure(&messages, params.file_size_bits());
    let users = enumerate_ksubsets(params.ground(), params.access_degree())?;
    let decoded = users
        .iter()
        .map(|u| decode(u, demand, &messages, &placement))
        .collect::<Result<Vec<_>>>()?;
    Ok(Simulation {
        placement,
        messages,
        report,
        decoded,
    })
}

/// `R(t) = C(Λ, t+λ) / C(Λ, t)`.
pub fn corner_point_load<S: Scalar>(num_caches: usize, access: usize, t: usize) -> Result<S> {
    if t > num_caches {
        return Err(MaccError::InvalidParameter {
            name: "t",
            value: t.to_string(),
            reason: format!("must lie in [0, {num_caches}]"),
        });
    }
    let (l, a, t) = (num_caches as i64, access as i64, t as i64);
    Ok(S::from_ratio(&binomial(l, t + a), &binomial(l, t)))
}

/// Memory-shared load at fractional `t ∈ [0, Λ]`: linear between the corner
/// loads at `⌊t⌋` and `⌈t⌉`.
pub fn achievable_load<S: Scalar>(num_caches: usize, access: usize, t: &S) -> Result<S> {
    let lower = t
        .floor_usize()
        .filter(|&f| f <= num_caches)
        .ok_or_else(|| MaccError::InvalidParameter {
            name: "t",
            value: format!("{t:?}"),
            reason: format!("must lie in [0, {num_caches}]"),
        })?;
    let lo_load = corner_point_load::<S>(num_caches, access, lower)?;
    let frac = t.clone() - S::from_usize(lower);
    if frac.is_zero() {
        return Ok(lo_load);
    }
    let hi_load = corner_point_load::<S>(num_caches, access, lower + 1)?;
    Ok(lo_load.clone() + frac * (hi_load - lo_load))
}

/// [`achievable_load`] at memory `M`, i.e. `t = ΛM/N`.
pub fn achievable_load_at_memory<S: Scalar>(
    num_caches: usize,
    access: usize,
    num_files: usize,
    memory: &S,
) -> Result<S> {
    let t = memory.clone() * S::from_usize(num_caches) / S::from_usize(num_files);
    achievable_load(num_caches, access, &t)
}

/// How a non-corner memory point splits each file between two corner schemes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemorySharing {
    /// `⌊t⌋`, applied to the file suffix.
    pub lower: usize,
    /// `⌈t⌉`, applied to the file prefix.
    pub upper: usize,
    /// Fraction of every file handled at `upper`: `t − ⌊t⌋`.
    pub upper_share: BigRational,
}

impl MemorySharing {
    pub fn new(num_caches: usize, num_files: usize, memory: &BigRational) -> Result<Self> {
        let t = memory * BigRational::from_integer(num_caches.into())
            / BigRational::from_integer(num_files.into());
        let lower = t
            .floor_usize()
            .filter(|&f| f <= num_caches)
            .ok_or_else(|| MaccError::InvalidParameter {
                name: "memory",
                value: crate::scalar::fmt_exact(memory),
                reason: format!("must lie in [0, {num_files}]"),
            })?;
        let upper_share = t - BigRational::from_integer(lower.into());
        let upper = if upper_share.is_zero() {
            lower
        } else {
            lower + 1
        };
        if upper > num_caches {
            return Err(MaccError::InvalidParameter {
                name: "memory",
                value: crate::scalar::fmt_exact(memory),
                reason: format!("must lie in [0, {num_files}]"),
            });
        }
        Ok(Self {
            lower,
            upper,
            upper_share,
        })
    }

    pub fn is_corner(&self) -> bool {
        self.upper_share.is_zero()
    }

    /// Bits of every file that go to the `upper` scheme, or `None` when the
    /// split is not integral or either part does not divide evenly.
    pub fn prefix_bits(&self, num_caches: usize, file_bits: u64) -> Option<u64> {
        let scaled = &self.upper_share * BigRational::from_integer(BigInt::from(file_bits));
        if !scaled.is_integer() {
            return None;
        }
        let prefix: u64 = scaled.to_integer().try_into().ok()?;
        let suffix = file_bits - prefix;
        let parts = |t: usize| crate::combinatorics::choose(num_caches, t);
        (prefix.is_multiple_of(parts(self.upper)) && suffix.is_multiple_of(parts(self.lower)))
            .then_some(prefix)
    }

    /// Smallest byte-friendly `B` for which [`prefix_bits`](Self::prefix_bits) succeeds.
    pub fn default_file_bits(&self, num_caches: usize) -> u64 {
        let den: u64 = self
            .upper_share
            .denom()
            .try_into()
            .expect("denominator fits in u64");
        let parts = |t: usize| crate::combinatorics::choose(num_caches, t);
        8 * den * parts(self.upper).lcm(&parts(self.lower))
    }
}

/// Result of a memory-shared run: the prefix part at `⌈t⌉`, the suffix part
/// at `⌊t⌋`, and the combined outcome.
#[derive(Debug, Clone)]
pub struct SharedSimulation {
    pub upper: Option<Simulation>,
    pub lower: Option<Simulation>,
    pub load: BigRational,
    pub decoded: Vec<Bits>,
}

pub fn simulate_memory_sharing(
    library: &Library,
    num_caches: usize,
    access: usize,
    demand: &DemandVector,
    plan: &MemorySharing,
) -> Result<SharedSimulation> {
    let file_bits = library.bits_per_file();
    let prefix = plan
        .prefix_bits(num_caches, file_bits)
        .ok_or(MaccError::Divisibility {
            bits: file_bits,
            required: plan.default_file_bits(num_caches),
        })?;
    let num_files = library.num_files();
    let part = |range: std::ops::Range<usize>, t: usize| -> Result<Option<Simulation>> {
        if range.is_empty() {
            return Ok(None);
        }
        let params = SystemParams::new(num_caches, access, num_files, range.len() as u64, t)?;
        let sub = Library::new(
            library
                .files()
                .iter()
                .map(|f| f.slice(range.clone()))
                .collect(),
        )?;
        let demand = DemandVector::new(&params, demand.files().to_vec())?;
        simulate(&sub, &params, &demand).map(Some)
    };
    let upper = part(0..prefix as usize, plan.upper)?;
    let lower = part(prefix as usize..file_bits as usize, plan.lower)?;
    let transmitted: u64 = [&upper, &lower]
        .iter()
        .filter_map(|s| s.as_ref())
        .map(|s| s.report.transmitted_bits())
        .sum();
    let users = demand.files().len();
    let decoded = (0..users)
        .map(|i| {
            let mut bits = Bits::default();
            for s in [&upper, &lower].into_iter().flatten() {
                bits.append(&s.decoded[i]);
            }
            bits
        })
        .collect();
    Ok(SharedSimulation {
        upper,
        lower,
        load: BigRational::new(BigInt::from(transmitted), BigInt::from(file_bits)),
        decoded,
    })
}

/// Coding gain `C(t+λ, λ)`: users served by each multicast message.
pub fn coding_gain(access: usize, t: usize) -> BigUint {
    binomial((t + access) as i64, access as i64)
}
