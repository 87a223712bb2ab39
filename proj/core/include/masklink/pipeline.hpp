#pragma once

// Streaming driver: one reader pulls source entities, a bounded pool of
// workers runs the filter step and the chunked refinement tasks.

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "masklink/linkage.hpp"
#include "masklink/record.hpp"

namespace masklink {

struct PipelineOptions {
  unsigned workers = 4;
  std::size_t max_in_flight = 0;  // entities buffered at once; 0 picks 4 * workers
  std::size_t chunk_size = 16;    // targets per refinement task
};

using SourcePull = std::function<std::optional<SourceItem>()>;
/// Receives every link of one entity at once; calls are serialized.
using LinkSink = std::function<void(const std::vector<Link>&)>;
using ErrorSink = std::function<void(const RecordError&)>;

/// Runs `engine` over the stream. An entity whose geometry fails during
/// filtering or refinement emits no links and one RecordError instead.
/// Returns the merged statistics (source_errors includes upstream errors).
ComparisonStats run_pipeline(const SourcePull& next, const Engine& engine,
                             const PipelineOptions& options, const LinkSink& sink,
                             const ErrorSink& errors);

}  // namespace masklink
