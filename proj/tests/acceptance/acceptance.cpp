// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit when
// any criterion fails.

#include <spawn.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <fcntl.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "masklink/bench.hpp"
#include "masklink/linkage.hpp"
#include "masklink/pipeline.hpp"
#include "masklink/synth.hpp"
#include "test_support.hpp"

extern char** environ;

namespace masklink {
namespace {

namespace fs = std::filesystem;
using geom::Geometry;
using geom::Point;

struct Verdict {
  bool pass = false;
  std::string detail;
};

// Inference re-checks accumulated by every suite that runs MaskLink.
ComparisonStats g_verify;

std::vector<Link> sorted(std::vector<Link> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::string fmt(double v, int precision = 3) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const double kCellSizes[] = {1.0, 2.5, 5.0};
const double kThetas[] = {0.1, 0.5, 1.0};

// 1. Topological oracle equivalence.
Verdict topological_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t mismatches = 0, links = 0, filtered = 0;
  for (int w = 0; w < 20; ++w) {
    const auto work = test::make_workload(1000 + w, 1000, 100);
    const GridIndex g = build_grid(work.targets, kCellSizes[w % 3]);
    const MaskStore masks = build_masks(g);
    EngineOptions verify;
    verify.verify_inferences = true;
    const Engine checker(g, &masks, verify);
    ComparisonStats s, base, brute;
    for (const auto& [id, a] : work.sources) {
      const auto ml = sorted(topological_links(id, a, g, masks, s));
      const auto bl = sorted(baseline_links(id, a, g, base));
      const auto shared = g.candidates(a);
      std::vector<Link> want;
      for (auto& l : brute_force_links(id, a, g.targets(), LinkMode::Topological, 0.0, brute)) {
        const bool keep = l.relation.kind != RelationKind::Disjoint ||
                          std::any_of(shared.begin(), shared.end(),
                                      [&](TargetIndex t) { return g.target(t).id == l.target_id; });
        if (keep) want.push_back(std::move(l));
      }
      want = sorted(std::move(want));
      mismatches += (ml != want) + (bl != want);
      links += want.size();
      checker.link(id, a, g_verify);
    }
    filtered += s.filtered_by_mask;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 120.0,
          "20 workloads, " + std::to_string(links) + " links, " + std::to_string(mismatches) +
              " mismatching sources, " + std::to_string(filtered) + " mask hits, " + fmt(secs) + " s"};
}

// 2. Nearby oracle equivalence against exact distances.
Verdict nearby_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t strict_mismatch = 0, band_pairs = 0, band_mismatch = 0, pairs = 0;
  for (int w = 0; w < 20; ++w) {
    const double theta = kThetas[w % 3];
    const double band = geom::buffer_chord_error(theta);
    const auto work = test::make_workload(2000 + w, 1000, 100, true);
    const GridIndex g = build_grid(work.targets, kCellSizes[(w / 3) % 3]);
    const MaskStore masks = build_masks(g, {MaskKind::Buffered, theta});
    const Engine engine(g, &masks, EngineOptions{LinkMode::Nearby, Strategy::MaskLink, theta, true, true});
    for (const auto& [id, a] : work.sources) {
      std::map<std::string, RelationKind> got;
      for (const auto& l : engine.link(id, a, g_verify)) got[l.target_id] = l.relation.kind;
      const auto shared = g.candidates(a);
      for (TargetIndex t = 0; t < g.targets().size(); ++t) {
        ++pairs;
        const auto& b = g.target(t);
        const double d = geom::distance(a, b.geometry);
        std::optional<RelationKind> want;
        if (d <= theta) {
          want = RelationKind::Nearby;
        } else if (std::binary_search(shared.begin(), shared.end(), t)) {
          want = RelationKind::Disjoint;
        }
        const auto it = got.find(b.id);
        const std::optional<RelationKind> have =
            it == got.end() ? std::nullopt : std::optional<RelationKind>(it->second);
        const bool in_band = std::abs(d - theta) <= band;
        band_pairs += in_band;
        if (have != want) ++(in_band ? band_mismatch : strict_mismatch);
      }
    }
  }
  const double secs = seconds_since(t0);
  const double band_share = static_cast<double>(band_pairs) / static_cast<double>(pairs);
  return {strict_mismatch == 0 && band_share <= 0.01 && secs < 180.0,
          std::to_string(pairs) + " pairs, " + std::to_string(strict_mismatch) +
              " mismatches outside the band; band pairs " + std::to_string(band_pairs) + " (" +
              fmt(100 * band_share, 2) + "%), " + std::to_string(band_mismatch) +
              " of them differ; " + fmt(secs) + " s"};
}

// 3. Mask partition invariant, with a point-sampling cross-check.
Verdict mask_partition() {
  std::size_t cells = 0, area_fail = 0, overlap_fail = 0, sample_fail = 0;
  double worst = 0.0;
  double worst_sliver = 0.0;
  std::mt19937_64 rng(3000);
  for (int gi = 0; gi < 10; ++gi) {
    const auto work = test::make_workload(3000 + gi, 0, 100);
    const GridIndex g = build_grid(work.targets, kCellSizes[gi % 3]);
    const MaskStore masks = build_masks(g);
    masks.for_each([&](const CellMask& m) {
      ++cells;
      std::vector<Geometry> assigned;
      const auto ids = g.targets_in(m.cell.key);
      for (TargetIndex t : ids) assigned.push_back(g.target(t).geometry);
      const Geometry box = geom::to_polygon(m.cell.box);
      const double cell_area = geom::area(box);
      const double inside = geom::area(geom::intersection(Geometry{geom::union_all(assigned)}, box));
      const double err = std::abs(geom::area(m.geometry()) + inside - cell_area) / cell_area;
      worst = std::max(worst, err);
      area_fail += err > 1e-6;
      const Geometry mask = m.geometry();
      for (TargetIndex t : ids) {
        // Overlap area from the target's triangle fan, independent of the
        // overlay code, in units of the overlay's snap sliver.
        const auto& tg = g.target(t).geometry;
        const double overlap = test::star_overlap_area(mask, std::get<geom::Polygon>(tg), work.centres[t]);
        const double share = overlap / test::sliver_allowance(tg, g.cell_size());
        worst_sliver = std::max(worst_sliver, share);
        overlap_fail += share > 1.0;
      }
      for (int i = 0; i < 50; ++i) {
        const Point p{test::uniform(rng, m.cell.box.min_corner().x, m.cell.box.max_corner().x),
                      test::uniform(rng, m.cell.box.min_corner().y, m.cell.box.max_corner().y)};
        if (!test::contains(mask, p)) continue;
        sample_fail += std::any_of(assigned.begin(), assigned.end(),
                                   [&](const Geometry& t) { return test::contains(t, p); });
      }
    });
  }
  return {area_fail == 0 && overlap_fail == 0 && sample_fail == 0,
          std::to_string(cells) + " cells, worst relative error " + fmt(worst, 2) + ", " +
              std::to_string(overlap_fail) + " mask/target overlaps (worst " + fmt(worst_sliver, 3) +
              " of the snap sliver), " + std::to_string(sample_fail) +
              " sampled points in both"};
}

// 4. Every mask inference re-checked. Runs after 1, 2 and 8 have fed
// g_verify.
Verdict filter_soundness() {
  return {g_verify.verified_inferences > 0 && g_verify.verify_contradictions == 0,
          std::to_string(g_verify.verified_inferences) + " inferences re-checked, " +
              std::to_string(g_verify.verify_contradictions) + " contradictions, " +
              std::to_string(g_verify.verify_band) + " in the chord band"};
}

// 5. Cost model: one cell, k = 10 targets, each source placed in the empty
// space with probability p, otherwise inside a random target.
Verdict cost_model() {
  const int k = 10;
  std::vector<geom::Polygon> squares;
  for (int i = 0; i < k; ++i) {
    const double x = 0.5 + (i % 5) * 1.9;
    const double y = i < 5 ? 0.5 : 7.5;
    squares.push_back(test::square(x, y, x + 1.2, y + 1.2));
  }
  const GridIndex g = build_grid(test::make_targets(squares), 10.0);
  const MaskStore masks = build_masks(g);
  const Engine ml(g, &masks, EngineOptions{});
  const Engine base(g, nullptr, EngineOptions{LinkMode::Topological, Strategy::Baseline});
  if (g.cell_count() != 1) return {false, "setup: expected a single cell"};

  bool pass = true;
  std::string detail;
  std::mt19937_64 rng(5000);
  for (double p : {0.05, 0.1, 0.5, 0.9}) {
    ComparisonStats sm, sb;
    for (int i = 0; i < 5000; ++i) {
      Point a;
      if (std::bernoulli_distribution(p)(rng)) {
        a = {test::uniform(rng, 0.5, 9.5), test::uniform(rng, 3.0, 7.0)};
      } else {
        const auto& s = squares[rng() % k];
        a = {test::uniform(rng, s.outer()[0].x + 0.1, s.outer()[0].x + 1.1),
             test::uniform(rng, s.outer()[0].y + 0.1, s.outer()[0].y + 1.1)};
      }
      const std::string id = "a" + std::to_string(i);
      ml.link(id, a, sm);
      base.link(id, a, sb);
    }
    const double measured = static_cast<double>(sm.comparisons()) / static_cast<double>(sb.refinement_tests);
    const double predicted = predict_gain(p, k);
    const bool ok = std::abs(measured - predicted) <= 0.2 * predicted &&
                    (p <= 1.0 / k || measured < 1.0);
    pass &= ok;
    detail += "p=" + fmt(p) + ": " + fmt(measured, 4) + " vs " + fmt(predicted, 4) + (ok ? "" : " (off)") + "; ";
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

const std::vector<std::size_t> kScaleSizes{10'000, 50'000, 100'000, 250'000};

// 6a. Topological scaling on a high-empty-space target set.
Verdict scaling_topological() {
  BenchConfig cfg;
  cfg.mode = LinkMode::Topological;
  cfg.cell_size = 10.0;
  cfg.workers = 1;
  cfg.repeats = 3;
  cfg.synth.n_targets = 1000;
  cfg.synth.coverage = 0.1;
  cfg.synth.shape = TargetShape::Noisy;
  cfg.synth.sources = SourceKind::Points;
  cfg.sizes = kScaleSizes;
  const auto t0 = std::chrono::steady_clock::now();
  const BenchReport r = run_bench(cfg);
  const double secs = seconds_since(t0);

  std::vector<double> gains;
  bool faster = true;
  for (const auto& row : r.rows) {
    if (row.engine != "masklink") continue;
    faster &= row.time_ratio <= 1.0;
    gains.push_back(1.0 / row.time_ratio);
  }
  // Wall-clock gains carry run-to-run noise: each step may dip by up to
  // 10%, and the largest size must not trail the smallest.
  bool trend = gains.back() >= gains.front();
  bool strict = true;
  for (std::size_t i = 1; i < gains.size(); ++i) {
    trend &= gains[i] >= 0.9 * gains[i - 1];
    strict &= gains[i] >= gains[i - 1];
  }
  std::string detail = "speedup baseline/masklink:";
  for (std::size_t i = 0; i < gains.size(); ++i) {
    detail += " " + std::to_string(kScaleSizes[i] / 1000) + "k=" + fmt(gains[i]);
  }
  detail += strict ? " (strictly non-decreasing)" : " (non-decreasing within 10% noise)";
  detail += r.engines_agree() ? ", links agree" : ", LINKS DIFFER";
  detail += ", " + fmt(secs) + " s";
  return {faster && trend && r.engines_agree(), detail};
}

// 6b. Nearby refinement volume on a half-empty target set.
Verdict scaling_nearby() {
  BenchConfig cfg;
  cfg.mode = LinkMode::Nearby;
  cfg.theta = 0.1;
  cfg.cell_size = 10.0;
  cfg.workers = 1;
  cfg.synth.n_targets = 2000;
  cfg.synth.coverage = 0.5;
  cfg.synth.layout = TargetLayout::Patchy;
  cfg.synth.patch_size = 10.0;
  cfg.synth.tile_size = 10.0;
  cfg.synth.dense_share = 0.9;
  cfg.synth.sources = SourceKind::Points;
  cfg.sizes = kScaleSizes;
  const auto t0 = std::chrono::steady_clock::now();
  const BenchReport r = run_bench(cfg);
  const double secs = seconds_since(t0);
  double last = 1.0;
  std::string detail = "refinement ratio masklink/baseline:";
  for (const auto& row : r.rows) {
    if (row.engine != "masklink") continue;
    detail += " " + std::to_string(row.sources / 1000) + "k=" + fmt(row.refinement_ratio);
    last = row.refinement_ratio;
  }
  detail += r.engines_agree() ? ", links agree" : ", LINKS DIFFER";
  detail += ", " + fmt(secs) + " s";
  return {last <= 0.5 && r.engines_agree(), detail};
}

// Peak RSS (KiB) of one CLI run.
long cli_peak_rss(const std::vector<std::string>& args) {
  std::vector<char*> argv;
  std::string bin = MASKLINK_CLI_PATH;
  argv.push_back(bin.data());
  std::vector<std::string> copy = args;
  for (auto& a : copy) argv.push_back(a.data());
  argv.push_back(nullptr);
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 1, "/dev/null", O_WRONLY, 0);
  posix_spawn_file_actions_addopen(&actions, 2, "/dev/null", O_WRONLY, 0);
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, bin.c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) return -1;
  int status = 0;
  rusage usage{};
  if (wait4(pid, &status, 0, &usage) != pid || !WIFEXITED(status) || WEXITSTATUS(status) != 0) return -1;
  return usage.ru_maxrss;
}

// 7. Streaming: source size does not drive memory.
Verdict streaming_memory() {
  const fs::path dir = fs::temp_directory_path() / ("masklink_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  SynthOptions opts;
  opts.n_targets = 1000;
  opts.coverage = 0.5;
  {
    std::ofstream t(dir / "targets.csv");
    write_targets_csv(t, generate_targets(opts));
  }
  for (auto [name, n] : {std::pair{"small.csv", std::size_t{10'000}}, std::pair{"large.csv", std::size_t{1'000'000}}}) {
    std::ofstream s(dir / name);
    SourceGenerator gen(opts, n);
    write_sources_csv(s, gen);
  }
  auto run = [&](const char* source) {
    return cli_peak_rss({"link", "--target", (dir / "targets.csv").string(), "--source",
                         (dir / source).string(), "-o", "/dev/null", "--workers", "4"});
  };
  const long small = run("small.csv");
  const long large = run("large.csv");
  fs::remove_all(dir);
  if (small <= 0 || large <= 0) return {false, "CLI run failed"};
  return {large <= 2 * small,
          "peak RSS 1e4 lines " + std::to_string(small / 1024) + " MiB, 1e6 lines " +
              std::to_string(large / 1024) + " MiB (" + fmt(static_cast<double>(large) / small) + "x)"};
}

// 8. Worker count does not change links or counters.
Verdict parallel_determinism() {
  SynthOptions opts;
  opts.n_targets = 1000;
  opts.coverage = 0.5;
  opts.sources = SourceKind::Polygons;
  const GridIndex g = build_grid(generate_targets(opts), kDefaultCellSize);
  const MaskStore plain = build_masks(g);
  const MaskStore buffered = build_masks(g, {MaskKind::Buffered, 0.5});
  std::vector<SourceItem> items;
  {
    SourceGenerator gen(opts, 20'000);
    std::size_t line = 0;
    while (auto s = gen.next()) items.push_back(EntityRecord{s->first, s->second, ++line});
  }
  bool pass = true;
  std::string detail;
  for (const auto& [name, engine] :
       {std::pair{"topological", Engine(g, &plain, EngineOptions{LinkMode::Topological, Strategy::MaskLink, 0.0, true, true})},
        std::pair{"nearby", Engine(g, &buffered, EngineOptions{LinkMode::Nearby, Strategy::MaskLink, 0.5, true, true})}}) {
    std::vector<Link> reference;
    ComparisonStats reference_stats;
    for (unsigned workers : {1u, 2u, 4u, 8u}) {
      std::vector<Link> links;
      std::size_t pos = 0;
      const ComparisonStats stats = run_pipeline(
          [&]() -> std::optional<SourceItem> {
            if (pos == items.size()) return std::nullopt;
            return items[pos++];
          },
          engine, PipelineOptions{workers, 0, 8},
          [&](const std::vector<Link>& batch) { links.insert(links.end(), batch.begin(), batch.end()); },
          [](const RecordError&) {});
      std::sort(links.begin(), links.end());
      if (workers == 1) {
        reference = std::move(links);
        reference_stats = stats;
        g_verify += stats;
        continue;
      }
      pass &= links == reference && stats == reference_stats;
    }
    detail += std::string(name) + " " + std::to_string(reference.size()) + " links; ";
  }
  return {pass, detail + "workers 1/2/4/8 identical: " + (pass ? "yes" : "no")};
}

// 9. Kernel numerics.
Verdict kernel_numerics() {
  std::mt19937_64 rng(9000);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Geometry a = test::random_star(rng, {test::uniform(rng, 0, 4), test::uniform(rng, 0, 4)}, 2.0);
    const Geometry b = test::random_star(rng, {2, 2}, 2.0);
    const double lhs = geom::area(geom::difference(a, b)) + geom::area(geom::intersection(a, b));
    worst = std::max(worst, std::abs(lhs - geom::area(a)) / geom::area(a));
  }
  const double disk = geom::area(geom::buffer(Point{0, 0}, 1.0));
  const double polygon_bound = 0.5 * 32 * std::sin(2 * std::numbers::pi / 32);
  const bool ok = worst <= 1e-6 && std::abs(disk - 3.1214) <= 1e-4 &&
                  std::abs(disk - polygon_bound) <= 1e-4 && disk < std::numbers::pi;
  return {ok, "worst area identity error " + fmt(worst, 2) + " over 1000 pairs; point buffer area " +
                  fmt(disk, 8) + " (32-gon " + fmt(polygon_bound, 8) + ", pi " + fmt(std::numbers::pi, 8) + ")"};
}

}  // namespace
}  // namespace masklink

int main() {
  using namespace masklink;
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"1 topological oracle equivalence", topological_oracle},
      {"2 nearby oracle equivalence", nearby_oracle},
      {"3 mask partition invariant", mask_partition},
      {"8 parallel determinism", parallel_determinism},
      {"4 mask filter soundness", filter_soundness},
      {"5 cost model", cost_model},
      {"6a topological scaling", scaling_topological},
      {"6b nearby refinement volume", scaling_nearby},
      {"7 streaming memory", streaming_memory},
      {"9 kernel numerics", kernel_numerics},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
