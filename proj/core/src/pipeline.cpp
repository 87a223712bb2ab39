#include "masklink/pipeline.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <thread>

namespace masklink {

namespace {

struct Entity {
  EntityRecord record;
  LinkPlan plan;
  std::mutex mutex;
  std::vector<Link> links;
  std::optional<std::string> error;
  std::atomic<std::size_t> remaining{0};

  void fail(std::string message) {
    std::lock_guard lock(mutex);
    if (!error) error = std::move(message);
  }
};

std::string describe(std::exception_ptr e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown failure";
  }
}

// Filter step. Returns the number of refinement chunks to schedule.
std::size_t run_filter(const Engine& engine, Entity& e, std::size_t chunk, ComparisonStats& stats) {
  ++stats.sources;
  try {
    e.plan = engine.plan(e.record.geometry, stats);
    std::vector<Link> out;
    engine.emit_inferred(e.record.id, e.record.geometry, e.plan.inferred_disjoint, stats, out);
    e.links = std::move(out);
  } catch (...) {
    e.fail(describe(std::current_exception()));
    return 0;
  }
  return (e.plan.tests() + chunk - 1) / chunk;
}

// Refines plan targets [begin, end); indices past `refine` address the ring.
void run_refine(const Engine& engine, Entity& e, std::size_t begin, std::size_t end,
                ComparisonStats& stats) {
  std::vector<Link> out;
  const std::size_t shared = e.plan.refine.size();
  for (std::size_t i = begin; i < end; ++i) {
    const bool in_shared = i < shared;
    const TargetIndex t = in_shared ? e.plan.refine[i] : e.plan.refine_ring[i - shared];
    try {
      engine.refine(e.record.id, e.record.geometry, t, in_shared, stats, out);
    } catch (...) {
      e.fail(describe(std::current_exception()));
    }
  }
  std::lock_guard lock(e.mutex);
  e.links.insert(e.links.end(), std::make_move_iterator(out.begin()),
                 std::make_move_iterator(out.end()));
}

class Pool {
 public:
  Pool(const Engine& engine, const PipelineOptions& options, const LinkSink& sink,
       const ErrorSink& errors)
      : engine_(engine), options_(options), sink_(sink), errors_(errors),
        per_worker_(options.workers) {
    limit_ = options.max_in_flight ? options.max_in_flight : 4 * static_cast<std::size_t>(options.workers);
    for (unsigned w = 0; w < options.workers; ++w) {
      threads_.emplace_back([this, w] { work(per_worker_[w]); });
    }
  }

  void submit(EntityRecord record) {
    auto e = std::make_shared<Entity>();
    e->record = std::move(record);
    std::unique_lock lock(mutex_);
    room_.wait(lock, [&] { return in_flight_ < limit_; });
    ++in_flight_;
    queue_.push_back(Task{std::move(e), true, 0, 0});
    ready_.notify_one();
  }

  void report(const RecordError& err) {
    std::lock_guard lock(sink_mutex_);
    errors_(err);
  }

  ComparisonStats finish() {
    {
      std::unique_lock lock(mutex_);
      room_.wait(lock, [&] { return in_flight_ == 0; });
      closed_ = true;
    }
    ready_.notify_all();
    for (auto& t : threads_) t.join();
    ComparisonStats total;
    for (const auto& s : per_worker_) total += s;
    if (sink_failure_) std::rethrow_exception(sink_failure_);
    return total;
  }

 private:
  struct Task {
    std::shared_ptr<Entity> entity;
    bool filter = true;
    std::size_t begin = 0;
    std::size_t end = 0;
  };

  void work(ComparisonStats& stats) {
    for (;;) {
      Task task;
      {
        std::unique_lock lock(mutex_);
        ready_.wait(lock, [&] { return closed_ || !queue_.empty(); });
        if (queue_.empty()) return;
        task = std::move(queue_.front());
        queue_.pop_front();
      }
      Entity& e = *task.entity;
      if (!task.filter) {
        run_refine(engine_, e, task.begin, task.end, stats);
        if (e.remaining.fetch_sub(1) == 1) complete(e, stats);
        continue;
      }
      const std::size_t chunks = run_filter(engine_, e, options_.chunk_size, stats);
      if (chunks == 0) {
        complete(e, stats);
        continue;
      }
      e.remaining.store(chunks);
      const std::size_t total = e.plan.tests();
      {
        // Refinement goes to the front so started entities drain first.
        std::lock_guard lock(mutex_);
        for (std::size_t c = chunks; c-- > 0;) {
          const std::size_t b = c * options_.chunk_size;
          queue_.push_front(Task{task.entity, false, b, std::min(total, b + options_.chunk_size)});
        }
      }
      ready_.notify_all();
    }
  }

  void complete(Entity& e, ComparisonStats& stats) {
    {
      std::lock_guard lock(sink_mutex_);
      if (e.error) ++stats.source_errors;
      if (!sink_failure_) {
        try {
          if (e.error) {
            errors_(RecordError{e.record.line, e.record.id, *e.error});
          } else if (!e.links.empty()) {
            sink_(e.links);
          }
        } catch (...) {
          sink_failure_ = std::current_exception();
        }
      }
    }
    e.links = {};
    {
      std::lock_guard lock(mutex_);
      --in_flight_;
    }
    room_.notify_all();
  }

  const Engine& engine_;
  const PipelineOptions& options_;
  const LinkSink& sink_;
  const ErrorSink& errors_;
  std::vector<ComparisonStats> per_worker_;
  std::vector<std::thread> threads_;

  std::mutex mutex_;
  std::condition_variable ready_;
  std::condition_variable room_;
  std::deque<Task> queue_;
  std::size_t in_flight_ = 0;
  std::size_t limit_ = 0;
  bool closed_ = false;

  std::mutex sink_mutex_;
  std::exception_ptr sink_failure_;
};

ComparisonStats run_inline(const SourcePull& next, const Engine& engine,
                           const PipelineOptions& options, const LinkSink& sink,
                           const ErrorSink& errors) {
  ComparisonStats stats;
  while (auto item = next()) {
    if (auto* err = std::get_if<RecordError>(&*item)) {
      ++stats.source_errors;
      errors(*err);
      continue;
    }
    Entity e;
    e.record = std::move(std::get<EntityRecord>(*item));
    if (run_filter(engine, e, options.chunk_size, stats) > 0) {
      run_refine(engine, e, 0, e.plan.tests(), stats);
    }
    if (e.error) {
      ++stats.source_errors;
      errors(RecordError{e.record.line, e.record.id, *e.error});
    } else if (!e.links.empty()) {
      sink(e.links);
    }
  }
  return stats;
}

}  // namespace

ComparisonStats run_pipeline(const SourcePull& next, const Engine& engine,
                             const PipelineOptions& options, const LinkSink& sink,
                             const ErrorSink& errors) {
  if (options.workers == 0) throw Error(ErrorCode::UsageError, "workers must be >= 1");
  if (options.chunk_size == 0) throw Error(ErrorCode::UsageError, "chunk size must be >= 1");
  if (options.workers == 1) return run_inline(next, engine, options, sink, errors);

  Pool pool(engine, options, sink, errors);
  ComparisonStats reader;
  std::exception_ptr failure;
  try {
    while (auto item = next()) {
      if (auto* err = std::get_if<RecordError>(&*item)) {
        ++reader.source_errors;
        pool.report(*err);
        continue;
      }
      pool.submit(std::move(std::get<EntityRecord>(*item)));
    }
  } catch (...) {
    failure = std::current_exception();
  }
  ComparisonStats total = pool.finish();
  if (failure) std::rethrow_exception(failure);
  total += reader;
  return total;
}

}  // namespace masklink
