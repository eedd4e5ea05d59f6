use thiserror::Error;

/// Errors raised by the library. Every refusal names the offending value.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MaccError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: String,
        reason: String,
    },

    #[error("subset size {k} is outside [0, {ground}]")]
    SubsetSize { k: usize, ground: usize },

    #[error("element {element} is outside the ground set [1, {ground}]")]
    ElementOutOfRange { element: usize, ground: usize },

    #[error("rank {index} is outside [0, {count})")]
    RankOutOfRange { index: u64, count: u64 },

    #[error("permutation enumeration over {size} caches exceeds the cap of {cap}")]
    PermutationCap { size: usize, cap: usize },

    #[error("{files} files cannot serve {users} users with distinct demands")]
    TooFewFiles { files: usize, users: usize },

    #[error("file size of {bits} bits is not a multiple of {required}")]
    Divisibility { bits: u64, required: u64 },

    #[error("demand vector must assign pairwise-distinct files")]
    NonDistinctDemand,

    #[error("demand vector has {got} entries but the topology has {expected} users")]
    DemandLength { got: usize, expected: usize },

    #[error("file index {file} is outside [1, {files}]")]
    FileOutOfRange { file: usize, files: usize },

    #[error(
        "user {user} cannot decode: term W[{file}, {stored_by}] is neither desired nor cached"
    )]
    Undecodable {
        user: String,
        file: usize,
        stored_by: String,
    },

    #[error("no multicast message spans {span}")]
    MissingMessage { span: String },

    #[error("subfile W[{file}, {stored_by}] is not a vertex of the side-information graph")]
    UnknownVertex { file: usize, stored_by: String },

    #[error("no size entry for subfile W[{file}, {stored_by}]")]
    MissingSize { file: usize, stored_by: String },

    #[error("subfile sizes are inconsistent: {0}")]
    InvalidSizes(String),

    #[error("{check} needs {required} enumeration steps, over the budget of {budget}")]
    BudgetExceeded {
        check: &'static str,
        required: String,
        budget: String,
    },
}

pub type Result<T> = std::result::Result<T, MaccError>;
