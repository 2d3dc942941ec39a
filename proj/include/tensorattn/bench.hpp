#pragma once

// Complexity-scaling benchmark: deterministic inputs per (variant, n, seed),
// warmup then timed repetitions on a monotonic clock, FNV-1a checksums of the
// outputs, CSV / JSONL records and a median + doubling-ratio summary.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "tensorattn/checksum.hpp"
#include "tensorattn/mechanisms.hpp"
#include "tensorattn/random.hpp"
#include "tensorattn/tensor_attention.hpp"

namespace tensorattn {

enum class BenchFormat { Csv, Jsonl };

struct BenchConfig {
  std::vector<std::string> variants;
  std::vector<std::size_t> n_values;
  std::size_t d = 32;
  std::size_t d_v = 32;
  std::vector<std::uint64_t> seeds{0};
  std::size_t repetitions = 5;
  std::size_t warmup = 1;
  std::string output_path;  // empty: standard output
  BenchFormat format = BenchFormat::Csv;

  void validate() const;
};

/// Kernel ids accepted by the benchmark: every mechanism plus the two
/// diagonal routes.
inline bool is_bench_kernel(std::string_view id) {
  return id == "diag-fast" || id == "diag-naive" || is_known_mechanism(id);
}

namespace detail {

[[noreturn]] inline void config_error(std::string_view field, const std::string& what) {
  throw Error(ErrorCode::InvalidConfig, "field '" + std::string(field) + "': " + what);
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto item = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class U>
U parse_unsigned(std::string_view field, std::string_view text) {
  U value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    config_error(field, "'" + std::string(text) + "' is not a non-negative integer");
  }
  return value;
}

}  // namespace detail

inline BenchFormat parse_bench_format(std::string_view text) {
  if (text == "csv") return BenchFormat::Csv;
  if (text == "jsonl") return BenchFormat::Jsonl;
  detail::config_error("format", "expected csv or jsonl, got '" + std::string(text) + "'");
}

inline void BenchConfig::validate() const {
  if (variants.empty()) detail::config_error("variants", "at least one variant is required");
  for (const auto& v : variants) {
    if (!is_bench_kernel(v)) detail::config_error("variants", "unknown variant '" + v + "'");
    if (is_known_mechanism(v) && mechanism_info(v).requires_dv_eq_d && d_v != d) {
      detail::config_error("d_v", "variant '" + v + "' requires d_v = d");
    }
  }
  if (n_values.empty()) detail::config_error("n_values", "at least one value is required");
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (n_values[i] == 0) detail::config_error("n_values", "values must be >= 1");
    if (i > 0 && n_values[i] <= n_values[i - 1]) detail::config_error("n_values", "must be strictly increasing");
  }
  if (d == 0) detail::config_error("d", "must be >= 1");
  if (d_v == 0) detail::config_error("d_v", "must be >= 1");
  if (seeds.empty()) detail::config_error("seeds", "at least one seed is required");
  if (repetitions < 3) detail::config_error("repetitions", "must be >= 3");
}

/// Parses flat `key = value` lines; `#` starts a comment. Lists are comma
/// separated. Unset keys keep their defaults.
inline BenchConfig parse_bench_config(std::istream& in) {
  using namespace detail;
  BenchConfig c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key == "variants") {
      c.variants = split_list(value);
    } else if (key == "n_values") {
      c.n_values.clear();
      for (const auto& s : split_list(value)) c.n_values.push_back(parse_unsigned<std::size_t>(key, s));
    } else if (key == "d") {
      c.d = parse_unsigned<std::size_t>(key, value);
    } else if (key == "d_v") {
      c.d_v = parse_unsigned<std::size_t>(key, value);
    } else if (key == "seeds") {
      c.seeds.clear();
      for (const auto& s : split_list(value)) c.seeds.push_back(parse_unsigned<std::uint64_t>(key, s));
    } else if (key == "repetitions") {
      c.repetitions = parse_unsigned<std::size_t>(key, value);
    } else if (key == "warmup") {
      c.warmup = parse_unsigned<std::size_t>(key, value);
    } else if (key == "output_path") {
      c.output_path = value;
    } else if (key == "format") {
      c.format = parse_bench_format(value);
    } else {
      config_error(key, "unknown key");
    }
  }
  return c;
}

inline BenchConfig parse_bench_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_bench_config(in);
}

inline BenchConfig load_bench_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open config file '" + path + "'");
  return parse_bench_config(in);
}

struct BenchRecord {
  std::string variant;
  std::size_t n = 0;
  std::size_t d = 0;
  std::uint64_t seed = 0;
  std::size_t rep = 0;
  std::int64_t wall_nanos = 1;
  std::uint64_t checksum = 0;
};

/// Q, K, V uniform in [-1, 1], fixed by (seed, n, d, d_v).
inline RealAttnInputs bench_inputs(std::uint64_t seed, std::size_t n, std::size_t d, std::size_t dv) {
  Rng rng(mix_seed(seed ^ mix_seed(n ^ mix_seed(d ^ mix_seed(dv)))));
  RealMatrix q = random_matrix(rng, n, d);
  RealMatrix k = random_matrix(rng, n, d);
  RealMatrix v = random_matrix(rng, n, dv);
  return RealAttnInputs(std::move(q), std::move(k), std::move(v));
}

/// Runs one kernel and returns the checksum of its output bytes.
using BenchKernel = std::function<std::uint64_t(const RealAttnInputs&)>;

inline BenchKernel make_bench_kernel(std::string_view id) {
  if (id == "diag-fast" || id == "diag-naive") {
    const bool fast = id == "diag-fast";
    return [fast](const RealAttnInputs& in) {
      const auto dg = fast ? diag_fast(in.q(), in.k()) : diag_naive(in.q(), in.k());
      Fnv1a h;
      h.update(std::span<const double>(dg));
      return h.value();
    };
  }
  auto mech = make_mechanism(id);
  return [mech](const RealAttnInputs& in) { return checksum(mech(in)); };
}

/// Executes every (variant, n, seed) cell: `warmup` discarded runs then
/// `repetitions` timed runs. With threads > 1 cells are spread over workers
/// but timing windows are serialized, so no two measurements overlap.
/// Records come back in (variant, n, seed, rep) order regardless of threads.
inline std::vector<BenchRecord> run_bench(const BenchConfig& config, std::size_t threads = 1) {
  config.validate();
  struct Cell {
    std::size_t variant;
    std::size_t n;
  };
  std::vector<Cell> cells;
  for (std::size_t v = 0; v < config.variants.size(); ++v)
    for (std::size_t n : config.n_values) cells.push_back({v, n});

  const std::size_t per_cell = config.seeds.size() * config.repetitions;
  std::vector<BenchRecord> records(cells.size() * per_cell);
  std::mutex timing;

  auto run_cell = [&](std::size_t ci) {
    const Cell& cell = cells[ci];
    const std::string& id = config.variants[cell.variant];
    const BenchKernel kernel = make_bench_kernel(id);
    const std::size_t dv = is_known_mechanism(id) ? config.d_v : config.d;
    for (std::size_t s = 0; s < config.seeds.size(); ++s) {
      const auto inputs = bench_inputs(config.seeds[s], cell.n, config.d, dv);
      std::lock_guard lock(timing);
      for (std::size_t w = 0; w < config.warmup; ++w) kernel(inputs);
      for (std::size_t r = 0; r < config.repetitions; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        const std::uint64_t sum = kernel(inputs);
        const auto t1 = std::chrono::steady_clock::now();
        const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
        records[ci * per_cell + s * config.repetitions + r] =
            BenchRecord{id, cell.n, config.d, config.seeds[s], r, std::max<std::int64_t>(ns, 1), sum};
      }
    }
  };

  if (threads <= 1 || cells.size() <= 1) {
    for (std::size_t ci = 0; ci < cells.size(); ++ci) run_cell(ci);
    return records;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, cells.size()); ++t) {
    pool.emplace_back([&] {
      for (std::size_t ci = next++; ci < cells.size(); ci = next++) {
        try {
          run_cell(ci);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return records;
}

inline constexpr std::string_view kBenchCsvHeader = "variant,n,d,seed,rep,wall_nanos,checksum";

inline std::string checksum_hex(std::uint64_t c) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << c;
  return os.str();
}

inline void write_csv(std::ostream& os, const std::vector<BenchRecord>& records) {
  os << kBenchCsvHeader << '\n';
  for (const auto& r : records) {
    os << r.variant << ',' << r.n << ',' << r.d << ',' << r.seed << ',' << r.rep << ','
       << r.wall_nanos << ',' << checksum_hex(r.checksum) << '\n';
  }
}

inline nlohmann::json to_json(const BenchRecord& r) {
  return nlohmann::json{{"variant", r.variant}, {"n", r.n},
                        {"d", r.d},             {"seed", r.seed},
                        {"rep", r.rep},         {"wall_nanos", r.wall_nanos},
                        {"checksum", checksum_hex(r.checksum)}};
}

inline void write_jsonl(std::ostream& os, const std::vector<BenchRecord>& records) {
  for (const auto& r : records) os << to_json(r).dump() << '\n';
}

inline void write_records(std::ostream& os, const std::vector<BenchRecord>& records, BenchFormat f) {
  if (f == BenchFormat::Csv) {
    write_csv(os, records);
  } else {
    write_jsonl(os, records);
  }
}

struct BenchCellSummary {
  std::string variant;
  std::size_t n = 0;
  double median_nanos = 0.0;
};

struct DoublingRatio {
  std::string variant;
  std::size_t n_small = 0;
  std::size_t n_large = 0;
  double ratio = 0.0;
};

struct BenchSummary {
  std::vector<BenchCellSummary> cells;
  /// time(n_large) / time(n_small) for consecutive n values with n_large = 2 n_small.
  std::vector<DoublingRatio> ratios;
  std::vector<std::string> warnings;

  const DoublingRatio* ratio(std::string_view variant, std::size_t n_small) const {
    for (const auto& r : ratios) {
      if (r.variant == variant && r.n_small == n_small) return &r;
    }
    return nullptr;
  }
};

inline double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 == 1 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

inline BenchSummary summarize(const std::vector<BenchRecord>& records) {
  BenchSummary s;
  std::vector<std::string> order;
  std::map<std::string, std::map<std::size_t, std::vector<double>>> groups;
  for (const auto& r : records) {
    if (!groups.count(r.variant)) order.push_back(r.variant);
    groups[r.variant][r.n].push_back(static_cast<double>(r.wall_nanos));
  }
  for (const auto& variant : order) {
    std::optional<BenchCellSummary> prev;
    for (const auto& [n, times] : groups[variant]) {
      const BenchCellSummary cur{variant, n, median(times)};
      s.cells.push_back(cur);
      if (cur.median_nanos < 1000.0) {
        s.warnings.push_back("timer resolution: median for " + variant + " at n=" + std::to_string(n) +
                             " is below 1 us");
      }
      if (prev && cur.n == 2 * prev->n) {
        s.ratios.push_back({variant, prev->n, cur.n, cur.median_nanos / prev->median_nanos});
      }
      prev = cur;
    }
  }
  return s;
}

inline void print_summary(std::ostream& os, const BenchSummary& s) {
  os << "variant,n,median_nanos\n";
  for (const auto& c : s.cells) {
    os << c.variant << ',' << c.n << ',' << std::fixed << std::setprecision(0) << c.median_nanos << '\n';
  }
  for (const auto& r : s.ratios) {
    os << "doubling ratio " << r.variant << " n=" << r.n_small << "->" << r.n_large << ": "
       << std::setprecision(3) << r.ratio << '\n';
  }
  os.unsetf(std::ios::floatfield);
  for (const auto& w : s.warnings) os << "warning: " << w << '\n';
}

}  // namespace tensorattn
