//! Problem instances: parameters, the combinatorial topology, library
//! contents, demand vectors and the subfile partition.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::combinatorics::{choose, enumerate_ksubsets, rank_ksubset, GroundSet, KSubset};
use crate::error::{MaccError, Result};

/// `(Λ, λ, N, B, t)`: caches, caches per user, files, bits per file and the
/// corner-point index `t = ΛM/N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemParams {
    num_caches: usize,
    access_degree: usize,
    num_files: usize,
    file_size_bits: u64,
    cache_param: usize,
}

impl SystemParams {
    pub fn new(
        num_caches: usize,
        access_degree: usize,
        num_files: usize,
        file_size_bits: u64,
        cache_param: usize,
    ) -> Result<Self> {
        let ground = GroundSet::new(num_caches)?;
        if access_degree == 0 || access_degree > num_caches {
            return Err(MaccError::InvalidParameter {
                name: "access",
                value: access_degree.to_string(),
                reason: format!("must lie in [1, {num_caches}]"),
            });
        }
        if cache_param > num_caches {
            return Err(MaccError::InvalidParameter {
                name: "t",
                value: cache_param.to_string(),
                reason: format!("must lie in [0, {num_caches}]"),
            });
        }
        if file_size_bits == 0 {
            return Err(MaccError::InvalidParameter {
                name: "bits",
                value: "0".into(),
                reason: "files must be non-empty".into(),
            });
        }
        let users = choose(ground.size(), access_degree) as usize;
        if num_files < users {
            return Err(MaccError::TooFewFiles {
                files: num_files,
                users,
            });
        }
        Ok(Self {
            num_caches,
            access_degree,
            num_files,
            file_size_bits,
            cache_param,
        })
    }

    /// Parameters with `B = 8·C(Λ, t)`, the smallest byte-friendly file size
    /// that splits evenly.
    pub fn with_default_bits(
        num_caches: usize,
        access_degree: usize,
        num_files: usize,
        cache_param: usize,
    ) -> Result<Self> {
        let bits = default_file_bits(num_caches, cache_param);
        Self::new(num_caches, access_degree, num_files, bits, cache_param)
    }

    pub fn num_caches(&self) -> usize {
        self.num_caches
    }

    pub fn access_degree(&self) -> usize {
        self.access_degree
    }

    pub fn num_files(&self) -> usize {
        self.num_files
    }

    pub fn file_size_bits(&self) -> u64 {
        self.file_size_bits
    }

    pub fn cache_param(&self) -> usize {
        self.cache_param
    }

    pub fn ground(&self) -> GroundSet {
        GroundSet::new(self.num_caches).expect("validated at construction")
    }

    /// `K = C(Λ, λ)`.
    pub fn num_users(&self) -> usize {
        choose(self.num_caches, self.access_degree) as usize
    }

    /// `M = tN/Λ`, in files.
    pub fn memory(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.cache_param * self.num_files),
            BigInt::from(self.num_caches),
        )
    }

    /// `γ = M/N = t/Λ`.
    pub fn gamma(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.cache_param),
            BigInt::from(self.num_caches),
        )
    }

    /// `C(Λ, t)` subfiles per file.
    pub fn subfiles_per_file(&self) -> u64 {
        choose(self.num_caches, self.cache_param)
    }

    pub fn subfile_bits(&self) -> Result<u64> {
        let parts = self.subfiles_per_file();
        if !self.file_size_bits.is_multiple_of(parts) {
            return Err(MaccError::Divisibility {
                bits: self.file_size_bits,
                required: parts,
            });
        }
        Ok(self.file_size_bits / parts)
    }
}

pub fn default_file_bits(num_caches: usize, cache_param: usize) -> u64 {
    8 * choose(num_caches, cache_param).max(1)
}

/// JSON instance description accepted by the CLI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub lambda_caps: usize,
    pub access: usize,
    pub files: usize,
    #[serde(default)]
    pub bits: Option<u64>,
    pub t: usize,
    #[serde(default)]
    pub seed: u64,
}

impl InstanceFile {
    pub fn params(&self) -> Result<SystemParams> {
        let bits = self
            .bits
            .unwrap_or_else(|| default_file_bits(self.lambda_caps, self.t));
        SystemParams::new(self.lambda_caps, self.access, self.files, bits, self.t)
    }
}

/// Users as `λ`-subsets in colex order, and the reverse cache → users map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    users: Vec<KSubset>,
    cache_to_users: Vec<Vec<usize>>,
}

impl Topology {
    pub fn users(&self) -> &[KSubset] {
        &self.users
    }

    /// Indices (into [`users`](Self::users)) of the users wired to `cache`.
    pub fn users_of_cache(&self, cache: usize) -> &[usize] {
        &self.cache_to_users[cache - 1]
    }

    pub fn user_index(&self, user: &KSubset) -> Option<usize> {
        let i = rank_ksubset(user) as usize;
        (self.users.get(i) == Some(user)).then_some(i)
    }
}

pub fn derive_topology(params: &SystemParams) -> Topology {
    let users = enumerate_ksubsets(params.ground(), params.access_degree())
        .expect("access degree validated");
    let mut cache_to_users = vec![Vec::new(); params.num_caches()];
    for (i, u) in users.iter().enumerate() {
        for c in u.iter() {
            cache_to_users[c - 1].push(i);
        }
    }
    Topology {
        users,
        cache_to_users,
    }
}

/// `d_𝒰` for every user, indexed by the user's colex rank. Files are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DemandVector {
    files: Vec<usize>,
    num_files: usize,
    distinct: bool,
}

impl DemandVector {
    pub fn new(params: &SystemParams, files: Vec<usize>) -> Result<Self> {
        let expected = params.num_users();
        if files.len() != expected {
            return Err(MaccError::DemandLength {
                got: files.len(),
                expected,
            });
        }
        if let Some(&bad) = files.iter().find(|&&f| f == 0 || f > params.num_files()) {
            return Err(MaccError::FileOutOfRange {
                file: bad,
                files: params.num_files(),
            });
        }
        let mut sorted = files.clone();
        sorted.sort_unstable();
        let distinct = sorted.windows(2).all(|w| w[0] != w[1]);
        Ok(Self {
            files,
            num_files: params.num_files(),
            distinct,
        })
    }

    /// Like [`new`](Self::new), but refuses repeated files.
    pub fn new_distinct(params: &SystemParams, files: Vec<usize>) -> Result<Self> {
        let d = Self::new(params, files)?;
        if !d.distinct {
            return Err(MaccError::NonDistinctDemand);
        }
        Ok(d)
    }

    pub fn files(&self) -> &[usize] {
        &self.files
    }

    pub fn num_files(&self) -> usize {
        self.num_files
    }

    pub fn is_distinct(&self) -> bool {
        self.distinct
    }

    pub fn file_of_index(&self, user_index: usize) -> usize {
        self.files[user_index]
    }

    /// `d_𝒰`. Panics if `user` is not a user of this instance.
    pub fn file_of(&self, user: &KSubset) -> usize {
        self.files[rank_ksubset(user) as usize]
    }
}

/// Seeded uniform draw from the injections `[K] → [N]`.
pub fn worst_case_demands(params: &SystemParams, seed: u64) -> Result<DemandVector> {
    let users = params.num_users();
    if params.num_files() < users {
        return Err(MaccError::TooFewFiles {
            files: params.num_files(),
            users,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let files = index::sample(&mut rng, params.num_files(), users)
        .into_iter()
        .map(|i| i + 1)
        .collect();
    DemandVector::new_distinct(params, files)
}

/// Seeded demands drawn with replacement; repeats are allowed.
pub fn arbitrary_demands(params: &SystemParams, seed: u64) -> DemandVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let files = (0..params.num_users())
        .map(|_| rng.gen_range(1..=params.num_files()))
        .collect();
    DemandVector::new(params, files).expect("drawn in range")
}

/// `W_{n,𝒯}`: the part of file `n` stored exclusively by the caches in `𝒯`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SubfileId {
    pub file: usize,
    pub stored_by: KSubset,
}

impl SubfileId {
    pub fn new(file: usize, stored_by: KSubset) -> Self {
        Self { file, stored_by }
    }
}

/// The `N` files of `B` bits each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Library {
    bits_per_file: u64,
    files: Vec<Bits>,
}

impl Library {
    pub fn new(files: Vec<Bits>) -> Result<Self> {
        let bits_per_file = files.first().map_or(0, |f| f.len() as u64);
        if files.is_empty() || bits_per_file == 0 {
            return Err(MaccError::InvalidParameter {
                name: "library",
                value: format!("{} files", files.len()),
                reason: "needs at least one non-empty file".into(),
            });
        }
        if let Some(f) = files.iter().find(|f| f.len() as u64 != bits_per_file) {
            return Err(MaccError::InvalidParameter {
                name: "library",
                value: format!("file of {} bits", f.len()),
                reason: format!("all files must have {bits_per_file} bits"),
            });
        }
        Ok(Self {
            bits_per_file,
            files,
        })
    }

    /// Seeded pseudo-random contents sized for `params`.
    pub fn random(params: &SystemParams, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let files = (0..params.num_files())
            .map(|_| Bits::random(&mut rng, params.file_size_bits() as usize))
            .collect();
        Self::new(files).expect("uniform non-empty files")
    }

    pub fn bits_per_file(&self) -> u64 {
        self.bits_per_file
    }

    pub fn num_files(&self) -> usize {
        self.files.len()
    }

    /// File `n`, 1-based.
    pub fn file(&self, n: usize) -> &Bits {
        &self.files[n - 1]
    }

    pub fn files(&self) -> &[Bits] {
        &self.files
    }
}

/// The `C(Λ, t)` subfiles of file `n` with their sizes in bits, colex ordered
/// by `𝒯`. Subfiles occupy consecutive bit ranges of the file in this order.
pub fn split_file(n: usize, params: &SystemParams) -> Result<Vec<(SubfileId, u64)>> {
    if n == 0 || n > params.num_files() {
        return Err(MaccError::FileOutOfRange {
            file: n,
            files: params.num_files(),
        });
    }
    let bits = params.subfile_bits()?;
    Ok(enumerate_ksubsets(params.ground(), params.cache_param())?
        .into_iter()
        .map(|t| (SubfileId::new(n, t), bits))
        .collect())
}
