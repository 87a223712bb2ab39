#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace masklink {

enum class RelationKind : std::uint8_t { Within, Covers, Overlaps, Meets, Disjoint, Nearby };

const char* to_string(RelationKind k) noexcept;
std::optional<RelationKind> parse_relation(std::string_view name);

struct Relation {
  RelationKind kind = RelationKind::Disjoint;
  double theta = 0.0;  // Nearby only

  friend bool operator==(const Relation&, const Relation&) = default;
  friend auto operator<=>(const Relation&, const Relation&) = default;
};

struct Link {
  std::string source_id;
  Relation relation;
  std::string target_id;

  friend bool operator==(const Link&, const Link&) = default;
  friend std::partial_ordering operator<=>(const Link& a, const Link& b) {
    if (auto c = a.source_id <=> b.source_id; c != 0) return c;
    if (auto c = a.target_id <=> b.target_id; c != 0) return c;
    return a.relation <=> b.relation;
  }
};

/// Comparison counters. `mask_tests` counts (entity, cell) mask checks,
/// `refinement_tests` counts exact pair tests.
struct ComparisonStats {
  std::uint64_t sources = 0;
  std::uint64_t source_errors = 0;
  std::uint64_t mask_tests = 0;
  std::uint64_t filtered_by_mask = 0;
  std::uint64_t refinement_tests = 0;
  std::uint64_t candidates_seen = 0;
  std::uint64_t links_emitted = 0;
  // Debug re-verification of mask inferences.
  std::uint64_t verified_inferences = 0;
  std::uint64_t verify_contradictions = 0;
  std::uint64_t verify_band = 0;

  std::uint64_t comparisons() const { return mask_tests + refinement_tests; }
  /// Empirical p: fraction of mask tests that filtered the cell.
  double estimated_p() const {
    return mask_tests == 0 ? 0.0 : static_cast<double>(filtered_by_mask) / static_cast<double>(mask_tests);
  }

  ComparisonStats& operator+=(const ComparisonStats& o);
  friend bool operator==(const ComparisonStats&, const ComparisonStats&) = default;
};

}  // namespace masklink
