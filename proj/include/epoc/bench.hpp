#ifndef EPOC_BENCH_HPP
#define EPOC_BENCH_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <future>
#include <latch>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "epoc/io.hpp"
#include "epoc/tokenizer.hpp"

namespace epoc {

/// Piecewise-constant color regions (random Voronoi cells) with soft shading,
/// a cheap stand-in for natural images.
inline RasterImage synthetic_image(int size, std::uint64_t seed, int regions = 24) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.0, size);
  std::uniform_int_distribution<int> channel(0, 255);
  struct Site {
    double y, x;
    int r, g, b;
  };
  std::vector<Site> sites(static_cast<std::size_t>(regions));
  for (auto& s : sites) s = {pos(rng), pos(rng), channel(rng), channel(rng), channel(rng)};

  RasterImage img(size, size, 3);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::max();
      for (std::size_t i = 0; i < sites.size(); ++i) {
        const double dy = y - sites[i].y, dx = x - sites[i].x;
        const double d = dy * dy + dx * dx;
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      const double shade = 0.85 + 0.15 * std::sin(0.02 * x) * std::cos(0.03 * y);
      const auto& s = sites[best];
      img(y, x, 0) = static_cast<std::uint8_t>(std::clamp(s.r * shade, 0.0, 255.0));
      img(y, x, 1) = static_cast<std::uint8_t>(std::clamp(s.g * shade, 0.0, 255.0));
      img(y, x, 2) = static_cast<std::uint8_t>(std::clamp(s.b * shade, 0.0, 255.0));
    }
  }
  return img;
}

/// Smooth random boundary map in [0, 1]: a sum of random sinusoids, rescaled.
inline FloatMap synthetic_boundary_map(int height, int width, std::uint64_t seed, int waves = 6) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(0.02, 0.25), phase(0.0, 6.283185307179586);
  struct Wave {
    double fy, fx, p;
  };
  std::vector<Wave> ws(static_cast<std::size_t>(waves));
  for (auto& w : ws) w = {freq(rng), freq(rng), phase(rng)};
  FloatMap map(height, width, 1);
  double lo = std::numeric_limits<double>::max(), hi = std::numeric_limits<double>::lowest();
  std::vector<double> raw(map.pixel_count());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double v = 0;
      for (const auto& w : ws) v += std::sin(w.fy * y + w.fx * x + w.p);
      raw[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  auto data = map.data();
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t i = 0; i < raw.size(); ++i) data[i] = static_cast<float>((raw[i] - lo) / span);
  return map;
}

struct BenchConfig {
  TokenizerSpec tokenizer;
  std::vector<int> worker_counts{1};
  int batch_size = 10;
  /// Stop condition: total images per level, or wall seconds per level.
  std::optional<std::size_t> count = 10;
  std::optional<double> seconds;
  /// Directory of PNG inputs; synthetic images when empty.
  std::string input_dir;
  int image_size = 768;
  int synthetic_pool = 10;
  std::uint64_t seed = 0;

  void validate() const {
    tokenizer.validate();
    if (worker_counts.empty()) throw ValidationError("bench: worker_counts must not be empty");
    for (std::size_t i = 0; i < worker_counts.size(); ++i) {
      if (worker_counts[i] < 1) throw ValidationError("bench: worker counts must be >= 1");
      if (i > 0 && worker_counts[i] <= worker_counts[i - 1]) {
        throw ValidationError("bench: worker counts must be strictly ascending");
      }
    }
    if (batch_size < 1) throw ValidationError("bench: batch size must be >= 1");
    if (count.has_value() == seconds.has_value()) {
      throw ValidationError("bench: exactly one of count or seconds must be set");
    }
    if (count && *count < 1) throw ValidationError("bench: count must be >= 1");
    if (seconds && !(*seconds > 0)) throw ValidationError("bench: seconds must be > 0");
    if (input_dir.empty() && image_size < 1) throw ValidationError("bench: image size must be >= 1");
  }
};

struct LevelResult {
  int workers = 0;
  double seconds = 0;
  std::size_t images = 0;
  double fps = 0;
  std::vector<std::size_t> per_worker_images;
};

struct BenchReport {
  std::vector<LevelResult> levels;
  double peak_fps = 0;

  void write_csv(std::ostream& out) const {
    out << "workers,seconds,images,fps\n";
    for (const auto& l : levels) out << l.workers << ',' << l.seconds << ',' << l.images << ',' << l.fps << '\n';
  }
};

inline std::vector<RasterImage> load_bench_inputs(const BenchConfig& cfg) {
  std::vector<RasterImage> pool;
  if (cfg.input_dir.empty()) {
    for (int i = 0; i < cfg.synthetic_pool; ++i) {
      pool.push_back(synthetic_image(cfg.image_size, cfg.seed + static_cast<std::uint64_t>(i)));
    }
  } else {
    std::vector<std::filesystem::path> files;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(cfg.input_dir, ec)) {
      if (entry.is_regular_file() && has_png_extension(entry.path().string())) files.push_back(entry.path());
    }
    if (ec) throw IoError("cannot list " + cfg.input_dir);
    std::sort(files.begin(), files.end());
    for (const auto& f : files) pool.push_back(read_png(f.string()));
  }
  if (pool.empty()) throw ValidationError("bench: empty input set");
  return pool;
}

namespace detail {

inline std::size_t bench_worker(const TokenizerSpec& spec, const std::vector<RasterImage>& pool,
                                std::size_t offset, std::optional<std::size_t> quota,
                                std::optional<double> seconds, int batch_size, std::latch& start) {
  start.arrive_and_wait();
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(seconds.value_or(0.0)));
  std::size_t done = 0;
  std::uint64_t sink = 0;
  for (;;) {
    std::size_t batch = static_cast<std::size_t>(batch_size);
    if (quota) {
      if (done >= *quota) break;
      batch = std::min(batch, *quota - done);
    } else if (std::chrono::steady_clock::now() >= deadline) {
      break;
    }
    for (std::size_t i = 0; i < batch; ++i) {
      const auto& img = pool[(offset + done + i) % pool.size()];
      sink += tokenize_image(spec, img).n_tokens();
    }
    done += batch;
  }
  // Keeps the tokenizer calls observable.
  if (sink == std::numeric_limits<std::uint64_t>::max()) std::this_thread::yield();
  return done;
}

}  // namespace detail

/**
 * Throughput sweep. For each worker level, spawns that many independent
 * workers that loop batches through the tokenizer until the stop condition,
 * then reports images per wall-clock second (steady clock). In count mode the
 * total is split evenly across workers.
 */
inline BenchReport run_bench(const BenchConfig& cfg, const std::vector<RasterImage>& pool) {
  cfg.validate();
  if (pool.empty()) throw ValidationError("bench: empty input set");
  BenchReport report;
  for (int workers : cfg.worker_counts) {
    std::latch start(workers + 1);
    std::vector<std::future<std::size_t>> results;
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) {
      std::optional<std::size_t> quota;
      if (cfg.count) {
        const auto n = *cfg.count;
        const auto k = static_cast<std::size_t>(workers);
        quota = n / k + (static_cast<std::size_t>(w) < n % k ? 1 : 0);
      }
      std::packaged_task<std::size_t()> task([&cfg, &pool, &start, quota, w] {
        return detail::bench_worker(cfg.tokenizer, pool, static_cast<std::size_t>(w) * 7919u, quota,
                                    cfg.seconds, cfg.batch_size, start);
      });
      results.push_back(task.get_future());
      threads.emplace_back(std::move(task));
    }
    const auto t0 = std::chrono::steady_clock::now();
    start.arrive_and_wait();
    for (auto& t : threads) t.join();
    const auto t1 = std::chrono::steady_clock::now();

    LevelResult level;
    level.workers = workers;
    level.seconds = std::chrono::duration<double>(t1 - t0).count();
    for (auto& r : results) {
      level.per_worker_images.push_back(r.get());
      level.images += level.per_worker_images.back();
    }
    level.fps = level.seconds > 0 ? static_cast<double>(level.images) / level.seconds : 0.0;
    report.peak_fps = std::max(report.peak_fps, level.fps);
    report.levels.push_back(std::move(level));
  }
  return report;
}

inline BenchReport run_bench(const BenchConfig& cfg) {
  cfg.validate();
  return run_bench(cfg, load_bench_inputs(cfg));
}

}  // namespace epoc

#endif  // EPOC_BENCH_HPP
