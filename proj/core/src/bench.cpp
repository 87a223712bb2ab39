#include "masklink/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>

#include "masklink/link_writer.hpp"
#include "masklink/pipeline.hpp"

namespace masklink {

void LinkFingerprint::add(const Link& link) {
  const auto mix = [](std::uint64_t h, std::uint64_t v) {
    return (h ^ v) * 0x100000001B3ull + (h >> 29);
  };
  std::uint64_t h = std::hash<std::string>{}(link.source_id);
  h = mix(h, std::hash<std::string>{}(link.target_id));
  h = mix(h, static_cast<std::uint64_t>(link.relation.kind));
  h = mix(h, std::hash<double>{}(link.relation.theta));
  ++count;
  sum += h;
  xor_ ^= h;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Run {
  double preprocess_s = 0.0;
  double link_s = 0.0;
  ComparisonStats stats;
  LinkFingerprint links;
};

Run run_engine(const BenchConfig& cfg, const std::vector<Target>& targets,
               const std::vector<EntityRecord>& sources, std::size_t n, Strategy strategy) {
  Run run;
  const auto t0 = Clock::now();
  const GridIndex grid = build_grid(targets, cfg.cell_size);
  std::optional<MaskStore> masks;
  if (strategy == Strategy::MaskLink) {
    MaskOptions mo;
    mo.kind = cfg.mode == LinkMode::Nearby ? MaskKind::Buffered : MaskKind::Plain;
    mo.theta = cfg.mode == LinkMode::Nearby ? cfg.theta : 0.0;
    mo.lazy = cfg.lazy_masks;
    mo.threads = cfg.workers;
    masks.emplace(build_masks(grid, mo));
  }
  run.preprocess_s = seconds_since(t0);

  EngineOptions eo;
  eo.mode = cfg.mode;
  eo.strategy = strategy;
  eo.theta = cfg.theta;
  const Engine engine(grid, masks ? &*masks : nullptr, eo);
  PipelineOptions po;
  po.workers = cfg.workers;
  std::size_t i = 0;
  const SourcePull pull = [&]() -> std::optional<SourceItem> {
    if (i >= n) return std::nullopt;
    return SourceItem{sources[i++]};
  };
  const auto t1 = Clock::now();
  run.stats = run_pipeline(
      pull, engine, po, [&](const std::vector<Link>& ls) { for (const auto& l : ls) run.links.add(l); },
      [](const RecordError&) {});
  run.link_s = seconds_since(t1);
  return run;
}

BenchRow make_row(Strategy strategy, std::size_t n) {
  BenchRow row;
  row.engine = strategy == Strategy::MaskLink ? "masklink" : "baseline";
  row.sources = n;
  row.preprocess_s = std::numeric_limits<double>::infinity();
  row.link_s = std::numeric_limits<double>::infinity();
  return row;
}

void keep_best(BenchRow& row, Run run) {
  row.preprocess_s = std::min(row.preprocess_s, run.preprocess_s);
  row.link_s = std::min(row.link_s, run.link_s);
  row.stats = run.stats;
  row.links = run.links;
}

double ratio(double a, double b) { return b == 0.0 ? 0.0 : a / b; }

const char* mode_name(LinkMode m) { return m == LinkMode::Nearby ? "nearby" : "topological"; }

}  // namespace

BenchReport run_bench(const BenchConfig& cfg) {
  if (cfg.sizes.empty()) throw Error(ErrorCode::UsageError, "bench needs at least one size");
  if (cfg.mode == LinkMode::Nearby && !(cfg.theta > 0.0)) {
    throw Error(ErrorCode::NonPositiveTheta, "nearby bench needs theta > 0");
  }
  BenchReport report;
  report.mode = cfg.mode;
  report.theta = cfg.theta;
  report.seed = cfg.synth.seed;

  const std::vector<Target> targets = generate_targets(cfg.synth);
  report.targets = targets.size();
  report.cells = build_grid(targets, cfg.cell_size).cell_count();

  // Every size uses a prefix of the same source stream.
  const std::size_t largest = *std::max_element(cfg.sizes.begin(), cfg.sizes.end());
  std::vector<EntityRecord> sources;
  sources.reserve(largest);
  SourceGenerator gen(cfg.synth, largest);
  while (auto s = gen.next()) sources.push_back(EntityRecord{std::move(s->first), std::move(s->second), 0});

  for (std::size_t n : cfg.sizes) {
    // Repeats alternate between engines so drift in machine load hits both.
    BenchRow base = make_row(Strategy::Baseline, n);
    BenchRow mask = make_row(Strategy::MaskLink, n);
    for (int r = 0; r < std::max(1, cfg.repeats); ++r) {
      keep_best(base, run_engine(cfg, targets, sources, n, Strategy::Baseline));
      keep_best(mask, run_engine(cfg, targets, sources, n, Strategy::MaskLink));
    }
    const auto base_refine = static_cast<double>(base.stats.refinement_tests);
    mask.mean_k = std::max(1.0, ratio(base_refine, static_cast<double>(mask.stats.mask_tests)));
    mask.predicted_gain = predict_gain(mask.stats.estimated_p(), mask.mean_k);
    mask.measured_gain = ratio(static_cast<double>(mask.stats.comparisons()), base_refine);
    mask.refinement_ratio = ratio(static_cast<double>(mask.stats.refinement_tests), base_refine);
    mask.time_ratio = ratio(mask.total_s(), base.total_s());
    mask.links_match = mask.links == base.links;
    base.links_match = mask.links_match;
    report.rows.push_back(std::move(mask));
    report.rows.push_back(std::move(base));
  }
  return report;
}

bool BenchReport::engines_agree() const {
  return std::all_of(rows.begin(), rows.end(), [](const BenchRow& r) { return r.links_match; });
}

void BenchReport::write_csv(std::ostream& out) const {
  out << "mode,engine,sources,preprocess_s,link_s,total_s,mask_tests,filtered_by_mask,"
         "refinement_tests,links,estimated_p,mean_k,predicted_gain,measured_gain,"
         "refinement_ratio,time_ratio,links_match\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%zu,%.6f,%.6f,%.6f,%llu,%llu,%llu,%llu,%.6f,%.4f,%.6f,%.6f,%.6f,%.6f,%s\n",
                  mode_name(mode), r.engine.c_str(), r.sources, r.preprocess_s, r.link_s, r.total_s(),
                  static_cast<unsigned long long>(r.stats.mask_tests),
                  static_cast<unsigned long long>(r.stats.filtered_by_mask),
                  static_cast<unsigned long long>(r.stats.refinement_tests),
                  static_cast<unsigned long long>(r.links.count), r.stats.estimated_p(), r.mean_k,
                  r.predicted_gain, r.measured_gain, r.refinement_ratio, r.time_ratio,
                  r.links_match ? "yes" : "no");
    out << buf;
  }
}

void BenchReport::write_table(std::ostream& out) const {
  char buf[512];
  std::snprintf(buf, sizeof buf, "mode=%s theta=%g seed=%llu targets=%zu cells=%zu (times in seconds)\n",
                mode_name(mode), theta, static_cast<unsigned long long>(seed), targets, cells);
  out << buf;
  std::snprintf(buf, sizeof buf, "%-9s %8s %9s %9s %9s %12s %12s %6s %8s %8s %8s %8s %5s\n", "engine",
                "sources", "prep", "link", "total", "mask_tests", "refine", "p", "pred", "gain",
                "refine_r", "time_r", "match");
  out << buf;
  for (const auto& r : rows) {
    const bool m = r.engine == "masklink";
    std::snprintf(buf, sizeof buf, "%-9s %8zu %9.3f %9.3f %9.3f %12llu %12llu %6.3f %8.3f %8.3f %8.3f %8.3f %5s\n",
                  r.engine.c_str(), r.sources, r.preprocess_s, r.link_s, r.total_s(),
                  static_cast<unsigned long long>(r.stats.mask_tests),
                  static_cast<unsigned long long>(r.stats.refinement_tests),
                  m ? r.stats.estimated_p() : 0.0, r.predicted_gain, r.measured_gain,
                  r.refinement_ratio, r.time_ratio, r.links_match ? "yes" : "NO");
    out << buf;
  }
}

}  // namespace masklink
