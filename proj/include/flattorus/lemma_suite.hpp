#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flattorus/embedding.hpp"
#include "flattorus/lattice.hpp"

namespace flattorus {

/// One lattice of a property-suite corpus.  When `cuts` is set, the
/// filtration-dependent properties run on that filtration of the KZ basis
/// instead of the coarsened one, which is how violations are injected.
struct CorpusEntry {
  std::string id;
  Lattice lattice;
  std::optional<std::vector<int>> cuts;
};

/// 200 random integer lattices with n <= 4, 20 with n in {5, 6}, and the
/// structured families (hypercubic, skewed diagonal, near-dense projection).
std::vector<CorpusEntry> default_corpus(std::uint64_t seed = 0);

struct SuiteOptions {
  EmbeddingSpec spec;
  /// Random torus points per lattice for the cheap checks.
  int points = 4;
  /// Pairs per lattice for checks that evaluate full multi-scale embeddings.
  int embedding_pairs = 2;
  /// Floor asserted on the measured contraction constant.
  double contraction_floor = 1e-3;
};

/// Result of one property over the whole corpus.  Slack is the normalized
/// margin by which a check held; negative slack means it failed.
struct LedgerEntry {
  std::string id;
  std::string statement;
  bool passed = true;
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::optional<double> worst_slack;
  /// Constant measured by the property, when it has one.
  std::optional<double> measured;
  /// First failure: lattice id and a short reason.
  std::string first_failure;
};

struct LemmaLedger {
  std::uint64_t seed = 0;
  std::size_t lattices = 0;
  std::vector<LedgerEntry> entries;

  bool all_passed() const;
  const LedgerEntry& entry(const std::string& id) const;
};

/// Runs every property on every corpus entry.  An exception inside a check
/// marks that entry failed for the lattice and never aborts the run.
LemmaLedger run_lemma_suite(const std::vector<CorpusEntry>& corpus, std::uint64_t seed,
                            const SuiteOptions& options = {});

}  // namespace flattorus
