//! Seeded generation of categories and queries, differential verification
//! of the compiler against the oracle, and counterexample shrinking.

mod category;
mod query;
mod shrink;
mod verify;

pub use category::{floyd_warshall, gen_category, GroundTruth};
pub use query::{constructs_of, gen_query, Construct, Features};
pub use shrink::{case_size, shrink};
pub use verify::{
    case_seed, check_case, corpus_from_report, export_corpus, import_corpus, run_case, verify, CaseResult, CorpusCase,
    Counterexample, Outcome, VerifyConfig, VerifyReport,
};

/// Size limits for generated categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_objects: usize,
    pub max_elements: usize,
    pub max_morphisms: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_objects: 5,
            max_elements: 6,
            max_morphisms: 6,
        }
    }
}
