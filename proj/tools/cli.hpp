#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "masklink/bench.hpp"
#include "masklink/dataset.hpp"
#include "masklink/link_writer.hpp"
#include "masklink/synth.hpp"

namespace masklink::cli {

enum ExitCode : int { kOk = 0, kFatal = 1, kUsage = 2, kRowErrors = 3 };

enum class JobMode { Topological, Nearby, BaselineTopological, BaselineNearby, Oracle };

struct JobConfig {
  JobMode mode = JobMode::Topological;
  std::string target_path;
  std::string source_path = "-";
  std::optional<std::string> output_path;  // stdout when unset
  double cell_size = kDefaultCellSize;
  std::optional<double> theta;
  unsigned workers = 4;
  LinkFormat format = LinkFormat::Tsv;
  bool skip_header = false;
  bool suppress_disjoint = false;
  bool lazy_masks = false;
  bool debug_verify = false;
  std::optional<std::string> stats_path;
  std::optional<std::string> dump_masks_path;
};

/// Checks the JobConfig invariants; returns a message when violated.
std::optional<std::string> validate(const JobConfig& config);

int cmd_link(const JobConfig& config, std::ostream& out, std::ostream& log);

struct GenerateConfig {
  SynthOptions synth;
  std::size_t n_sources = 1000;
  std::string target_path;
  std::string source_path;
};

int cmd_generate(const GenerateConfig& config, std::ostream& log);

int cmd_bench(const BenchConfig& config, const std::optional<std::string>& csv_path,
              std::ostream& out, std::ostream& log);

/// Parses argv and dispatches to a subcommand.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& log);

}  // namespace masklink::cli
