/* Copyright 2026 The plf Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "plf/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "plf/checkpoint.hpp"
#include "plf/filter.hpp"
#include "plf/gradients.hpp"
#include "plf/lattice.hpp"

namespace plf::cli {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

Embedding embedding_for(const RunConfig& cfg) {
  if (cfg.bandwidth.size() != 1 && cfg.bandwidth.size() != static_cast<std::size_t>(cfg.d)) {
    throw std::invalid_argument("--bandwidth takes 1 or d values");
  }
  return make_embedding(cfg.d, cfg.bandwidth);
}

FilterOptions filter_options(const RunConfig& cfg) {
  FilterOptions opts;
  opts.normalize = cfg.normalize;
  opts.threads = cfg.threads;
  opts.refinement = cfg.refinement;
  return opts;
}

void check_run_config(const RunConfig& cfg) {
  if (cfg.n == 0 || cfg.d <= 0 || cfg.channels == 0 || cfg.threads <= 0 || cfg.cap == 0) {
    throw std::invalid_argument("n, d, channels, threads and cap must be positive");
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Matrix gaussian_matrix(std::size_t n, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(n, cols);
  for (auto& x : m.data()) x = g(rng);
  return m;
}

// ---- bilateral ----

Image bilateral_filter(const Image& img, double spatial, double range, int threads,
                       int refinement) {
  if (!(spatial > 0.0) || !(range > 0.0)) throw std::invalid_argument("bandwidths must be positive");
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  const int c = img.channels;
  FeatureMatrix f(n, 2 + c);
  DescriptorMatrix v(n, c);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * img.width + x;
      f(i, 0) = x / spatial;
      f(i, 1) = y / spatial;
      for (int k = 0; k < c; ++k) {
        const double s = img.at(x, y, k);
        f(i, 2 + k) = s / range;
        v(i, k) = s;
      }
    }
  }
  FilterOptions opts;
  opts.threads = threads;
  opts.refinement = refinement;
  const auto out = permutohedral_filter(make_embedding(2 + c), f, v, opts);

  Image result = img;
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < c; ++k) {
      const double s = std::clamp(out(i, k), 0.0, static_cast<double>(img.maxval));
      result.samples[i * c + k] = static_cast<std::uint16_t>(std::nearbyint(s));
    }
  }
  return result;
}

int cmd_bilateral(const BilateralConfig& cfg, std::ostream& log) {
  if (cfg.output.empty()) throw std::invalid_argument("bilateral needs --out");
  const auto img = read_image(cfg.input);
  const double range = cfg.range.value_or(0.1 * img.maxval);
  const auto out = bilateral_filter(img, cfg.spatial, range, cfg.threads, cfg.refinement);
  write_image(out, cfg.output);
  log << "bilateral " << img.width << "x" << img.height << "x" << img.channels
      << " spatial=" << cfg.spatial << " range=" << range << " -> " << cfg.output.string() << "\n";
  return kPass;
}

// ---- oracle comparison ----

OracleRow run_oracle_compare(const RunConfig& cfg, const OracleThresholds& thresholds) {
  check_run_config(cfg);
  if (cfg.n > cfg.cap) {
    throw CapExceeded("n = " + std::to_string(cfg.n) + " exceeds dense cap " + std::to_string(cfg.cap));
  }
  std::mt19937_64 rng(cfg.seed);
  const auto f = gaussian_matrix(cfg.n, cfg.d, rng);
  const auto v = gaussian_matrix(cfg.n, cfg.channels, rng);
  const auto emb = embedding_for(cfg);

  const auto approx = permutohedral_filter(emb, f, v, filter_options(cfg));
  // The dense oracle works in bandwidth units.
  FeatureMatrix scaled = f;
  for (std::size_t i = 0; i < cfg.n; ++i) {
    for (int a = 0; a < cfg.d; ++a) scaled(i, a) /= emb.bandwidth()[a];
  }
  const auto exact = nlm_dense(scaled, v, Kernel::kGaussian, cfg.normalize, cfg.cap, cfg.threads);

  OracleRow row{cfg.n, cfg.d, cfg.channels, cfg.seed, compare(approx, exact), false};
  row.passed = row.metrics.mean_rel_l2 < thresholds.max_mean_rel_l2 &&
               row.metrics.correlation > thresholds.min_correlation;
  return row;
}

void write_oracle_csv(std::ostream& out, const std::vector<OracleRow>& rows) {
  out << "n,d,channels,seed,mean_rel_l2,max_rel_l2,correlation\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.d << ',' << r.channels << ',' << r.seed << ','
        << format_double(r.metrics.mean_rel_l2) << ',' << format_double(r.metrics.max_rel_l2) << ','
        << format_double(r.metrics.correlation) << '\n';
  }
}

int cmd_oracle_compare(const RunConfig& cfg, std::ostream& log) {
  const auto row = run_oracle_compare(cfg);
  if (!cfg.out.empty()) {
    auto out = open_output(cfg.out);
    write_oracle_csv(out, {row});
  } else {
    write_oracle_csv(log, {row});
  }
  log << (row.passed ? "PASS" : "FAIL") << " oracle-compare n=" << row.n << " d=" << row.d
      << " mean_rel_l2=" << format_double(row.metrics.mean_rel_l2)
      << " correlation=" << format_double(row.metrics.correlation) << "\n";
  return row.passed ? kPass : kViolation;
}

// ---- gradient check ----

int cmd_gradcheck(const RunConfig& cfg, bool inject_fault, std::ostream& log) {
  check_run_config(cfg);
  std::mt19937_64 rng(cfg.seed);
  const auto f = gaussian_matrix(cfg.n, cfg.d, rng);
  const auto v = gaussian_matrix(cfg.n, cfg.channels, rng);
  GradCheckOptions check;
  check.inject_feature_sign_flip = inject_fault;
  const auto report =
      finite_difference_check(embedding_for(cfg), f, v, filter_options(cfg), cfg.seed, check);
  const auto text = report.to_string();
  log << text;
  if (!cfg.out.empty()) open_output(cfg.out) << text;
  return report.passed ? kPass : kViolation;
}

// ---- benchmark ----

std::vector<BenchRecord> run_bench(const BenchConfig& cfg, std::ostream* progress) {
  RunConfig checked = cfg.run;
  checked.n = 1;
  check_run_config(checked);
  for (auto n : cfg.sizes) {
    if (n == 0) throw std::invalid_argument("bench sizes must be positive");
  }
  if (cfg.repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  if (!(cfg.density > 0.0) || !(cfg.tube_width > 0.0)) {
    throw std::invalid_argument("density and tube width must be positive");
  }
  for (const auto& m : cfg.methods) {
    if (m != "lattice" && m != "dense") throw std::invalid_argument("unknown method '" + m + "'");
  }
  const auto emb = embedding_for(cfg.run);
  const auto opts = filter_options(cfg.run);
  const int d = cfg.run.d;

  std::vector<BenchRecord> rows;
  for (const std::size_t n : cfg.sizes) {
    std::mt19937_64 rng(cfg.run.seed + n);
    FeatureMatrix f;
    if (cfg.workload == Workload::kTube) {
      const double length = static_cast<double>(n) / cfg.density;
      std::uniform_real_distribution<double> u(0.0, 1.0);
      f = FeatureMatrix(n, d);
      for (std::size_t i = 0; i < n; ++i) {
        f(i, 0) = u(rng) * length;
        for (int a = 1; a < d; ++a) f(i, a) = u(rng) * cfg.tube_width;
      }
    } else if (cfg.workload == Workload::kUniform) {
      const double side = std::pow(static_cast<double>(n) / cfg.density, 1.0 / d);
      std::uniform_real_distribution<double> u(0.0, side);
      f = FeatureMatrix(n, d);
      for (auto& x : f.data()) x = u(rng);
    } else {
      f = gaussian_matrix(n, d, rng);
    }
    const auto v = gaussian_matrix(n, cfg.run.channels, rng);
    FeatureMatrix scaled = f;
    for (std::size_t i = 0; i < n; ++i) {
      for (int a = 0; a < d; ++a) scaled(i, a) /= emb.bandwidth()[a];
    }

    std::optional<DescriptorMatrix> reference;
    const bool dense_ok = n <= cfg.run.cap;
    if (dense_ok) {
      reference = nlm_dense(scaled, v, Kernel::kGaussian, cfg.run.normalize, cfg.run.cap, cfg.run.threads);
    }

    for (const auto& method : cfg.methods) {
      if (method == "dense" && !dense_ok) continue;
      DescriptorMatrix result;
      auto once = [&] {
        if (method == "lattice") {
          result = permutohedral_filter(emb, f, v, opts);
        } else {
          result = nlm_dense(scaled, v, Kernel::kGaussian, cfg.run.normalize, cfg.run.cap,
                             cfg.run.threads);
        }
      };
      auto t0 = std::chrono::steady_clock::now();
      once();  // warm-up
      const double warm = seconds_since(t0);
      const int inner = warm >= cfg.min_rep_seconds
                            ? 1
                            : static_cast<int>(std::ceil(cfg.min_rep_seconds / std::max(warm, 1e-7)));
      std::vector<double> times;
      for (int r = 0; r < cfg.repetitions; ++r) {
        t0 = std::chrono::steady_clock::now();
        for (int k = 0; k < inner; ++k) once();
        times.push_back(seconds_since(t0) / inner);
      }
      std::nth_element(times.begin(), times.begin() + times.size() / 2, times.end());
      BenchRecord rec{n, static_cast<std::size_t>(d), cfg.run.channels, method,
                      times[times.size() / 2], std::nan("")};
      if (reference) rec.rel_error = compare(result, *reference).mean_rel_l2;
      if (progress) {
        *progress << "bench " << method << " n=" << n << " seconds=" << format_double(rec.seconds)
                  << "\n";
      }
      rows.push_back(rec);
    }
  }
  return rows;
}

double loglog_slope(const std::vector<BenchRecord>& rows, const std::string& method) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) {
    if (r.method == method && r.seconds > 0.0) {
      pts.emplace_back(std::log(static_cast<double>(r.n)), std::log(r.seconds));
    }
  }
  if (pts.size() < 2) return std::nan("");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= pts.size();
  my /= pts.size();
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::nan("");
}

int cmd_bench(const BenchConfig& cfg, std::ostream& log) {
  const auto rows = run_bench(cfg, &log);
  if (!cfg.run.out.empty()) {
    auto out = open_output(cfg.run.out);
    write_bench_csv(out, rows);
  } else {
    write_bench_csv(log, rows);
  }
  for (const auto& m : cfg.methods) {
    log << "slope " << m << " " << format_double(loglog_slope(rows, m)) << "\n";
  }
  return kPass;
}

// ---- toy training ----

void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace) {
  out << "step,loss,accuracy,eval_accuracy\n";
  for (const auto& t : trace) {
    out << t.step << ',' << format_double(t.loss) << ',' << format_double(t.accuracy) << ','
        << (t.eval_accuracy ? format_double(*t.eval_accuracy) : std::string()) << '\n';
  }
}

int cmd_train(const TrainCommand& cfg, std::ostream& log) {
  const auto seed = cfg.options.seed;
  auto model = init_toy_model(cfg.task, cfg.feature_channels, cfg.descriptor_channels,
                              !cfg.baseline, seed, cfg.concat_input);
  const auto result = train_toy(cfg.task, std::move(model), cfg.options);
  if (result.diverged_at) {
    log << "diverged: non-finite loss at step " << *result.diverged_at << "\n";
    return kViolation;
  }
  if (!cfg.out.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec) throw std::runtime_error("cannot create " + cfg.out.string() + ": " + ec.message());
    auto trace = open_output(cfg.out / "trace.csv");
    write_trace_csv(trace, result.trace);
    save_checkpoint(result.model, cfg.out / "checkpoint");
  }
  log << (cfg.baseline ? "baseline" : "pam") << " accuracy " << format_double(result.final_accuracy)
      << " after " << result.trace.size() << " steps\n";
  if (!cfg.min_gain) return kPass;

  auto base = init_toy_model(cfg.task, cfg.feature_channels, cfg.descriptor_channels, false, seed);
  const auto other = train_toy(cfg.task, std::move(base), cfg.options);
  const double gain = result.final_accuracy - other.final_accuracy;
  log << "baseline accuracy " << format_double(other.final_accuracy) << " gain "
      << format_double(gain) << "\n";
  return gain >= *cfg.min_gain ? kPass : kViolation;
}

}  // namespace plf::cli
