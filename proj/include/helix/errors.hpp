#pragma once

#include <stdexcept>
#include <string>

namespace helix {

// Every condition the framework treats as a caller or environment fault is a
// distinct type so tests and the CLI can tell them apart.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define HELIX_DEFINE_ERROR(NAME)            \
  struct NAME : Error {                     \
    using Error::Error;                     \
  }

// core model
HELIX_DEFINE_ERROR(DanglingParentError);
HELIX_DEFINE_ERROR(DuplicateIdError);
HELIX_DEFINE_ERROR(UnknownIdError);

// selection
HELIX_DEFINE_ERROR(NonFiniteObjectiveError);

// diversity / embeddings
HELIX_DEFINE_ERROR(ProviderUnavailableError);
HELIX_DEFINE_ERROR(EmbeddingDimensionError);

// policy-gradient math
HELIX_DEFINE_ERROR(GroupTooSmallError);
HELIX_DEFINE_ERROR(NonPositiveRatioError);
HELIX_DEFINE_ERROR(EmptySequenceError);

// prompting
HELIX_DEFINE_ERROR(BudgetTooSmallError);

// mutators
HELIX_DEFINE_ERROR(MalformedDiffError);
HELIX_DEFINE_ERROR(EndpointUnavailableError);
HELIX_DEFINE_ERROR(UnparseableParentError);

// tasks
HELIX_DEFINE_ERROR(FunctionDimensionError);
HELIX_DEFINE_ERROR(DegenerateTargetsError);
HELIX_DEFINE_ERROR(ValueDomainError);
HELIX_DEFINE_ERROR(SpawnFailureError);
HELIX_DEFINE_ERROR(ExpressionParseError);

// datasets
HELIX_DEFINE_ERROR(NonFiniteGroundTruthError);

// engine / persistence / config
HELIX_DEFINE_ERROR(NoInitialSolutionsError);
HELIX_DEFINE_ERROR(TaskMisconfiguredError);
HELIX_DEFINE_ERROR(IoError);
HELIX_DEFINE_ERROR(CorruptLogError);
HELIX_DEFINE_ERROR(ConfigMismatchError);
HELIX_DEFINE_ERROR(MissingCheckpointError);
HELIX_DEFINE_ERROR(ConfigError);

#undef HELIX_DEFINE_ERROR

// apply_diff failure carries the index of the offending block.
struct SearchNotFoundError : Error {
  SearchNotFoundError(std::size_t block_index, const std::string& what)
      : Error(what), block_index(block_index) {}
  std::size_t block_index;
};

}  // namespace helix
