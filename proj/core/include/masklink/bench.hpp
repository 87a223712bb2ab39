#pragma once

// Engine comparison harness: the same targets and source stream go through
// MaskLink and the grid baseline at several source sizes.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "masklink/linkage.hpp"
#include "masklink/synth.hpp"

namespace masklink {

struct BenchConfig {
  LinkMode mode = LinkMode::Topological;
  double theta = 0.0;
  double cell_size = kDefaultCellSize;
  unsigned workers = 4;
  bool lazy_masks = false;
  int repeats = 1;  // times are the minimum over repeats
  SynthOptions synth;
  std::vector<std::size_t> sizes{1000, 2000, 4000};
};

/// Order-insensitive digest of a link multiset.
struct LinkFingerprint {
  std::uint64_t count = 0;
  std::uint64_t sum = 0;
  std::uint64_t xor_ = 0;

  void add(const Link& link);
  friend bool operator==(const LinkFingerprint&, const LinkFingerprint&) = default;
};

struct BenchRow {
  std::string engine;  // "masklink" or "baseline"
  std::size_t sources = 0;
  double preprocess_s = 0.0;  // grid (+ masks)
  double link_s = 0.0;
  ComparisonStats stats;
  LinkFingerprint links;
  // Filled on masklink rows, relative to the baseline row of the same size.
  double mean_k = 0.0;
  double predicted_gain = 0.0;   // predict_gain(estimated p, mean k)
  double measured_gain = 0.0;    // (mask + refinement tests) / baseline refinement tests
  double refinement_ratio = 0.0; // refinement tests / baseline refinement tests
  double time_ratio = 0.0;       // total time / baseline total time
  bool links_match = true;

  double total_s() const { return preprocess_s + link_s; }
};

struct BenchReport {
  LinkMode mode = LinkMode::Topological;
  double theta = 0.0;
  std::uint64_t seed = kDefaultSeed;
  std::size_t targets = 0;
  std::size_t cells = 0;
  std::vector<BenchRow> rows;

  void write_csv(std::ostream& out) const;
  void write_table(std::ostream& out) const;
  bool engines_agree() const;
};

BenchReport run_bench(const BenchConfig& config);

}  // namespace masklink
