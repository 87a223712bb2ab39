#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <unordered_set>

#include "masklink/pipeline.hpp"
#include "masklink/wkt.hpp"

namespace masklink::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool is_nearby(JobMode m) { return m == JobMode::Nearby || m == JobMode::BaselineNearby; }

int exit_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::UsageError:
    case ErrorCode::DomainError:
    case ErrorCode::NonPositiveTheta:
      return kUsage;
    default:
      return kFatal;
  }
}

void log_error(std::ostream& log, const RecordError& e) {
  log << "line " << e.line;
  if (!e.id.empty()) log << " (" << e.id << ")";
  log << ": " << e.message << '\n';
}

// Output stream: a file when a path is given, else `fallback`.
class OutputTarget {
 public:
  OutputTarget(const std::optional<std::string>& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path) return;
    file_.open(*path, std::ios::binary | std::ios::trunc);
    if (!file_) throw Error(ErrorCode::IoError, "cannot write '" + *path + "'");
    stream_ = &file_;
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

struct JobSummary {
  std::size_t targets = 0;
  std::size_t target_errors = 0;
  std::size_t cells = 0;
  double preprocess_s = 0.0;
  double link_s = 0.0;
};

void write_stats(const std::string& path, const JobConfig& cfg, const JobSummary& s,
                 const ComparisonStats& st) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  static constexpr const char* kModes[] = {"topological", "nearby", "baseline-topological",
                                           "baseline-nearby", "oracle"};
  f << "mode=" << kModes[static_cast<int>(cfg.mode)] << '\n'
    << "cell_size=" << cfg.cell_size << '\n'
    << "theta=" << cfg.theta.value_or(0.0) << '\n'
    << "workers=" << cfg.workers << '\n'
    << "targets=" << s.targets << '\n'
    << "target_errors=" << s.target_errors << '\n'
    << "cells=" << s.cells << '\n'
    << "sources=" << st.sources << '\n'
    << "source_errors=" << st.source_errors << '\n'
    << "mask_tests=" << st.mask_tests << '\n'
    << "filtered_by_mask=" << st.filtered_by_mask << '\n'
    << "refinement_tests=" << st.refinement_tests << '\n'
    << "comparisons=" << st.comparisons() << '\n'
    << "candidates_seen=" << st.candidates_seen << '\n'
    << "links_emitted=" << st.links_emitted << '\n'
    << "estimated_p=" << st.estimated_p() << '\n'
    << "verified_inferences=" << st.verified_inferences << '\n'
    << "verify_contradictions=" << st.verify_contradictions << '\n'
    << "verify_band=" << st.verify_band << '\n'
    << "preprocess_seconds=" << s.preprocess_s << '\n'
    << "link_seconds=" << s.link_s << '\n';
  if (!f) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

void dump_masks(const std::string& path, const MaskStore& masks) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  masks.for_each([&](const CellMask& m) {
    f << m.cell.key.ix << '\t' << m.cell.key.iy << '\t'
      << (m.empty() ? std::string("MULTIPOLYGON EMPTY") : to_wkt(geom::Geometry{m.geometry()}))
      << '\n';
  });
}

ComparisonStats run_oracle(const JobConfig& cfg, const GridIndex& grid, DatasetReader& sources,
                           LinkWriter& writer, std::ostream& log) {
  ComparisonStats stats;
  const LinkMode mode = cfg.theta ? LinkMode::Nearby : LinkMode::Topological;
  while (auto item = sources.next()) {
    if (auto* err = std::get_if<RecordError>(&*item)) {
      ++stats.source_errors;
      log_error(log, *err);
      continue;
    }
    const auto& rec = std::get<EntityRecord>(*item);
    try {
      std::unordered_set<std::string> shared;
      for (TargetIndex t : grid.candidates(rec.geometry)) shared.insert(grid.target(t).id);
      ComparisonStats local;
      auto links = brute_force_links(rec.id, rec.geometry, grid.targets(), mode,
                                     cfg.theta.value_or(0.0), local);
      std::erase_if(links, [&](const Link& l) {
        return l.relation.kind == RelationKind::Disjoint &&
               (cfg.suppress_disjoint || !shared.contains(l.target_id));
      });
      local.links_emitted = links.size();
      stats += local;
      writer.write(links);
    } catch (const Error& e) {
      ++stats.sources;
      ++stats.source_errors;
      log_error(log, RecordError{rec.line, rec.id, e.what()});
    }
  }
  return stats;
}

}  // namespace

std::optional<std::string> validate(const JobConfig& c) {
  if (c.target_path.empty()) return "--target is required";
  if (!(c.cell_size > 0.0)) return "--cell-size must be > 0";
  if (c.workers < 1) return "--workers must be >= 1";
  const bool needs_theta = is_nearby(c.mode);
  if (needs_theta && !c.theta) return "--theta is required for nearby linking";
  if (!needs_theta && c.mode != JobMode::Oracle && c.theta) return "--theta only applies to nearby linking";
  if (c.theta && !(*c.theta > 0.0)) return "--theta must be > 0";
  return std::nullopt;
}

int cmd_link(const JobConfig& cfg, std::ostream& out, std::ostream& log) {
  if (auto msg = validate(cfg)) {
    log << "usage error: " << *msg << '\n';
    return kUsage;
  }
  try {
    JobSummary summary;
    const auto t0 = Clock::now();
    std::vector<RecordError> target_errors;
    auto target_reader = DatasetReader::open(
        cfg.target_path, {format_for_path(cfg.target_path), cfg.skip_header});
    std::vector<Target> targets = load_targets(target_reader, target_errors);
    for (const auto& e : target_errors) log_error(log, e);
    summary.target_errors = target_errors.size();
    summary.targets = targets.size();
    const GridIndex grid = build_grid(std::move(targets), cfg.cell_size);
    summary.cells = grid.cell_count();

    const bool masklink = cfg.mode == JobMode::Topological || cfg.mode == JobMode::Nearby;
    std::optional<MaskStore> masks;
    if (masklink) {
      MaskOptions mo;
      mo.kind = cfg.mode == JobMode::Nearby ? MaskKind::Buffered : MaskKind::Plain;
      mo.theta = cfg.mode == JobMode::Nearby ? *cfg.theta : 0.0;
      mo.lazy = cfg.lazy_masks;
      mo.threads = cfg.workers;
      masks.emplace(build_masks(grid, mo));
    }
    summary.preprocess_s = seconds_since(t0);
    if (cfg.dump_masks_path) {
      if (masks) {
        dump_masks(*cfg.dump_masks_path, *masks);
      } else {
        log << "note: --dump-masks ignored, this mode builds no masks\n";
      }
    }

    OutputTarget sink(cfg.output_path, out);
    LinkWriter writer(sink.get(), cfg.format);
    auto source_reader = DatasetReader::open(
        cfg.source_path,
        {cfg.source_path == "-" ? DatasetFormat::Csv : format_for_path(cfg.source_path), cfg.skip_header});

    const auto t1 = Clock::now();
    ComparisonStats stats;
    if (cfg.mode == JobMode::Oracle) {
      stats = run_oracle(cfg, grid, source_reader, writer, log);
    } else {
      EngineOptions eo;
      eo.mode = is_nearby(cfg.mode) ? LinkMode::Nearby : LinkMode::Topological;
      eo.strategy = masklink ? Strategy::MaskLink : Strategy::Baseline;
      eo.theta = cfg.theta.value_or(0.0);
      eo.emit_disjoint = !cfg.suppress_disjoint;
      eo.verify_inferences = cfg.debug_verify;
      const Engine engine(grid, masks ? &*masks : nullptr, eo);
      PipelineOptions po;
      po.workers = cfg.workers;
      stats = run_pipeline([&] { return source_reader.next(); }, engine, po,
                           [&](const std::vector<Link>& links) { writer.write(links); },
                           [&](const RecordError& e) { log_error(log, e); });
    }
    summary.link_s = seconds_since(t1);

    if (cfg.stats_path) write_stats(*cfg.stats_path, cfg, summary, stats);
    log << "targets=" << summary.targets << " cells=" << summary.cells
        << " preprocess_s=" << summary.preprocess_s << " sources=" << stats.sources
        << " links=" << writer.written() << " mask_tests=" << stats.mask_tests
        << " refinement_tests=" << stats.refinement_tests << " link_s=" << summary.link_s << '\n';
    if (cfg.debug_verify) {
      log << "verified_inferences=" << stats.verified_inferences
          << " contradictions=" << stats.verify_contradictions << " band=" << stats.verify_band << '\n';
    }
    const std::size_t row_errors = summary.target_errors + stats.source_errors;
    if (row_errors > 0) {
      log << row_errors << " row error(s)\n";
      return kRowErrors;
    }
    return kOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return exit_for(e);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kFatal;
  }
}

int cmd_generate(const GenerateConfig& cfg, std::ostream& log) {
  try {
    check_options(cfg.synth);
    log << "seed=" << cfg.synth.seed << '\n';
    const auto targets = generate_targets(cfg.synth);
    {
      std::ofstream f(cfg.target_path, std::ios::binary | std::ios::trunc);
      if (!f) throw Error(ErrorCode::IoError, "cannot write '" + cfg.target_path + "'");
      write_targets_csv(f, targets);
      if (!f) throw Error(ErrorCode::IoError, "failed writing '" + cfg.target_path + "'");
    }
    {
      std::ofstream f(cfg.source_path, std::ios::binary | std::ios::trunc);
      if (!f) throw Error(ErrorCode::IoError, "cannot write '" + cfg.source_path + "'");
      SourceGenerator gen(cfg.synth, cfg.n_sources);
      write_sources_csv(f, gen);
      if (!f) throw Error(ErrorCode::IoError, "failed writing '" + cfg.source_path + "'");
    }
    log << "targets=" << targets.size() << " sources=" << cfg.n_sources << '\n';
    return kOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return exit_for(e);
  }
}

int cmd_bench(const BenchConfig& cfg, const std::optional<std::string>& csv_path, std::ostream& out,
              std::ostream& log) {
  try {
    log << "seed=" << cfg.synth.seed << '\n';
    const BenchReport report = run_bench(cfg);
    report.write_table(out);
    if (csv_path) {
      std::ofstream f(*csv_path, std::ios::trunc);
      if (!f) throw Error(ErrorCode::IoError, "cannot write '" + *csv_path + "'");
      report.write_csv(f);
    }
    if (!report.engines_agree()) {
      log << "error: masklink and baseline link sets differ\n";
      return kFatal;
    }
    return kOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return exit_for(e);
  }
}

namespace {

void add_job_options(CLI::App& sub, JobConfig& cfg, std::string& format, bool theta_required) {
  sub.add_option("--target", cfg.target_path, "Target dataset (CSV/TSV with id, wkt)")->required();
  sub.add_option("--source", cfg.source_path, "Source dataset, or - for stdin")->capture_default_str();
  sub.add_option("--output,-o", cfg.output_path, "Link output file (default stdout)");
  sub.add_option("--cell-size", cfg.cell_size, "Grid cell edge")->capture_default_str();
  auto* theta = sub.add_option("--theta", cfg.theta, "Distance threshold for nearby");
  if (theta_required) theta->required();
  sub.add_option("--workers", cfg.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  sub.add_option("--format", format, "Link format")->check(CLI::IsMember({"tsv", "ntriples"}))->capture_default_str();
  sub.add_flag("--suppress-disjoint", cfg.suppress_disjoint, "Do not emit disjoint links");
  sub.add_option("--stats-out", cfg.stats_path, "Write key=value statistics");
  sub.add_option("--dump-masks", cfg.dump_masks_path, "Write cell masks as WKT");
  sub.add_flag("--lazy-masks", cfg.lazy_masks, "Compute masks on first use");
  sub.add_flag("--skip-header", cfg.skip_header, "First line of each dataset is a header");
  sub.add_flag("--debug-verify", cfg.debug_verify, "Re-check every mask inference");
}

void add_synth_options(CLI::App& sub, SynthOptions& s, std::string& layout, std::string& shape,
                       std::string& kind, std::vector<double>& extent) {
  sub.add_option("--seed", s.seed, "Random seed")->capture_default_str();
  sub.add_option("--targets", s.n_targets, "Target polygons")->capture_default_str();
  sub.add_option("--coverage", s.coverage, "Covered fraction of the extent, in (0,1)")->capture_default_str();
  sub.add_option("--extent", extent, "x0,y0,x1,y1")->delimiter(',')->expected(4);
  sub.add_option("--layout", layout, "uniform|patchy")->check(CLI::IsMember({"uniform", "patchy"}))->capture_default_str();
  sub.add_option("--shape", shape, "axis|rotated|noisy|mixed")
      ->check(CLI::IsMember({"axis", "rotated", "noisy", "mixed"}))
      ->capture_default_str();
  sub.add_option("--source-kind", kind, "points|polygons")->check(CLI::IsMember({"points", "polygons"}))->capture_default_str();
  sub.add_option("--source-size", s.source_size, "Radius of polygon sources")->capture_default_str();
  sub.add_option("--noisy-vertices", s.noisy_vertices, "Vertices of noisy polygons")->capture_default_str();
  sub.add_option("--noise-depth", s.noise_depth, "Radial noise of noisy polygons, in [0,1)")->capture_default_str();
  sub.add_option("--max-aspect", s.max_aspect, "Largest rectangle aspect ratio")->capture_default_str();
  sub.add_option("--size-spread", s.size_spread, "Largest/smallest target radius")->capture_default_str();
  sub.add_option("--patch-size", s.patch_size, "Patchy: patch edge")->capture_default_str();
  sub.add_option("--tile-size", s.tile_size, "Patchy: tile edge in dense patches")->capture_default_str();
  sub.add_option("--dense-share", s.dense_share, "Patchy: share of coverage from dense patches")
      ->capture_default_str();
}

void apply_synth(SynthOptions& s, const std::string& layout, const std::string& shape,
                 const std::string& kind, const std::vector<double>& extent) {
  static const std::map<std::string, TargetShape> shapes{
      {"axis", TargetShape::Axis}, {"rotated", TargetShape::Rotated},
      {"noisy", TargetShape::Noisy}, {"mixed", TargetShape::Mixed}};
  s.layout = layout == "patchy" ? TargetLayout::Patchy : TargetLayout::Uniform;
  s.shape = shapes.at(shape);
  s.sources = kind == "polygons" ? SourceKind::Polygons : SourceKind::Points;
  if (extent.size() == 4) s.extent = geom::Box{{extent[0], extent[1]}, {extent[2], extent[3]}};
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& log) {
  CLI::App app{"Spatial link discovery with per-cell empty-space masks", "masklink"};
  app.require_subcommand(1);

  JobConfig link_cfg, nearby_cfg, base_cfg, oracle_cfg;
  std::string link_fmt = "tsv", nearby_fmt = "tsv", base_fmt = "tsv", oracle_fmt = "tsv";
  auto* link = app.add_subcommand("link", "Topological links with plain masks");
  add_job_options(*link, link_cfg, link_fmt, false);
  auto* nearby = app.add_subcommand("nearby", "Nearby links with theta-buffered masks");
  add_job_options(*nearby, nearby_cfg, nearby_fmt, true);
  auto* base = app.add_subcommand("baseline", "Grid-only filtering (nearby when --theta is set)");
  add_job_options(*base, base_cfg, base_fmt, false);
  auto* oracle = app.add_subcommand("oracle", "Brute force over every pair (nearby when --theta is set)");
  add_job_options(*oracle, oracle_cfg, oracle_fmt, false);

  GenerateConfig gen_cfg;
  std::string gen_layout = "uniform", gen_shape = "mixed", gen_kind = "points";
  std::vector<double> gen_extent;
  auto* generate = app.add_subcommand("generate", "Write a synthetic target and source dataset");
  add_synth_options(*generate, gen_cfg.synth, gen_layout, gen_shape, gen_kind, gen_extent);
  generate->add_option("--sources", gen_cfg.n_sources, "Source entities")->capture_default_str();
  generate->add_option("--target-out", gen_cfg.target_path, "Target CSV path")->required();
  generate->add_option("--source-out", gen_cfg.source_path, "Source CSV path")->required();

  BenchConfig bench_cfg;
  std::string bench_mode = "topological", bench_layout = "uniform", bench_shape = "mixed",
              bench_kind = "points";
  std::vector<double> bench_extent;
  std::optional<std::string> bench_csv;
  auto* bench = app.add_subcommand("bench", "Compare MaskLink with the grid baseline");
  add_synth_options(*bench, bench_cfg.synth, bench_layout, bench_shape, bench_kind, bench_extent);
  bench->add_option("--mode", bench_mode, "topological|nearby")
      ->check(CLI::IsMember({"topological", "nearby"}))
      ->capture_default_str();
  bench->add_option("--theta", bench_cfg.theta, "Distance threshold (nearby)");
  bench->add_option("--sizes", bench_cfg.sizes, "Source sizes")->delimiter(',')->capture_default_str();
  bench->add_option("--cell-size", bench_cfg.cell_size, "Grid cell edge")->capture_default_str();
  bench->add_option("--workers", bench_cfg.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--repeats", bench_cfg.repeats, "Runs per engine; minimum time is kept")->capture_default_str();
  bench->add_flag("--lazy-masks", bench_cfg.lazy_masks, "Compute masks on first use");
  bench->add_option("--csv", bench_csv, "Also write the report as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    log << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  auto job = [&](JobConfig& cfg, const std::string& fmt, JobMode mode) {
    cfg.mode = mode;
    cfg.format = fmt == "ntriples" ? LinkFormat::NTriples : LinkFormat::Tsv;
    return cmd_link(cfg, out, log);
  };
  if (link->parsed()) return job(link_cfg, link_fmt, JobMode::Topological);
  if (nearby->parsed()) return job(nearby_cfg, nearby_fmt, JobMode::Nearby);
  if (base->parsed()) {
    return job(base_cfg, base_fmt, base_cfg.theta ? JobMode::BaselineNearby : JobMode::BaselineTopological);
  }
  if (oracle->parsed()) return job(oracle_cfg, oracle_fmt, JobMode::Oracle);
  if (generate->parsed()) {
    apply_synth(gen_cfg.synth, gen_layout, gen_shape, gen_kind, gen_extent);
    return cmd_generate(gen_cfg, log);
  }
  apply_synth(bench_cfg.synth, bench_layout, bench_shape, bench_kind, bench_extent);
  bench_cfg.mode = bench_mode == "nearby" ? LinkMode::Nearby : LinkMode::Topological;
  return cmd_bench(bench_cfg, bench_csv, out, log);
}

}  // namespace masklink::cli
