// Command-line front end: identity verification, benchmarks and a ViT demo.
// Exit codes: 0 success, 1 verification or runtime failure, 2 usage/config error.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tensorattn/tensorattn.hpp"

namespace ta = tensorattn;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

bool is_usage_error(const ta::Error& e) {
  return e.code() == ta::ErrorCode::InvalidConfig || e.code() == ta::ErrorCode::UnknownVariant;
}

int cmd_verify(bool negative_control) {
  ta::VerifyOptions opts;
  opts.negative_control = negative_control;
  const auto report = ta::run_verify(opts);
  ta::print_verify_report(std::cout, report);
  return report.all_pass() ? 0 : kExitFailure;
}

struct BenchArgs {
  std::string config;
  std::size_t threads = 1;
  std::optional<std::string> format;
  std::optional<std::string> out;
};

int cmd_bench(const BenchArgs& args) {
  ta::BenchConfig cfg = ta::load_bench_config(args.config);
  if (args.format) cfg.format = ta::parse_bench_format(*args.format);
  if (args.out) cfg.output_path = *args.out;
  cfg.validate();

  openblas_set_num_threads(1);
  const auto records = ta::run_bench(cfg, args.threads);
  const auto summary = ta::summarize(records);
  if (cfg.output_path.empty()) {
    ta::write_records(std::cout, records, cfg.format);
    ta::print_summary(std::cerr, summary);
  } else {
    std::ofstream out(cfg.output_path);
    if (!out) throw ta::Error(ta::ErrorCode::InvalidConfig, "field 'output_path': cannot open '" + cfg.output_path + "'");
    ta::write_records(out, records, cfg.format);
    ta::print_summary(std::cout, summary);
  }
  return 0;
}

struct DemoArgs {
  std::string mechanism = "softmax";
  std::uint64_t seed = 0;
  std::size_t n = 4;
  std::size_t d = 8;
  std::size_t layers = 2;
  std::size_t patch_dim = 16;
};

int cmd_demo(const DemoArgs& args) {
  ta::ViTConfig cfg;
  cfg.mechanism = args.mechanism;
  cfg.n_patches = args.n;
  cfg.d = args.d;
  cfg.layers = args.layers;
  cfg.patch_dim = args.patch_dim;

  const auto params = ta::vit_init(cfg, args.seed);
  const auto patches = ta::random_patches(cfg, args.seed);
  const auto t0 = std::chrono::steady_clock::now();
  const auto y = ta::vit_forward(params, patches);
  const auto t1 = std::chrono::steady_clock::now();

  double norm2 = 0.0;
  for (double v : y) norm2 += v * v;
  ta::Fnv1a h;
  h.update(std::span<const double>(y));
  std::cout << "mechanism " << args.mechanism << " heads " << cfg.head_count() << " N " << args.n << " d "
            << args.d << " L " << args.layers << " seed " << args.seed << '\n'
            << "output_norm " << std::sqrt(norm2) << '\n'
            << "checksum " << ta::checksum_hex(h.value()) << '\n'
            << "params_checksum " << ta::checksum_hex(ta::params_checksum(params)) << '\n'
            << "wall_nanos " << std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count() << '\n';
  return std::isfinite(norm2) ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TensorAttention toolkit: verify identities, benchmark scaling, run a ViT demo"};
  app.require_subcommand(1);

  bool negative_control = false;
  auto* verify = app.add_subcommand("verify", "Run the fixed-seed identity suite");
  verify->add_flag("--negative-control", negative_control, "Plant a row-stacking vec convention that must fail");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Time variants over a sweep of sequence lengths");
  bench->add_option("--config", bench_args.config, "key=value config file")->required()->check(CLI::ExistingFile);
  bench->add_option("--threads", bench_args.threads, "Worker threads for independent cells")->check(CLI::PositiveNumber);
  bench->add_option("--format", bench_args.format, "Output format")->check(CLI::IsMember({"csv", "jsonl"}));
  bench->add_option("--out", bench_args.out, "Output file (default: standard output)");

  DemoArgs demo_args;
  auto* demo = app.add_subcommand("demo", "ViT forward pass with a chosen attention mechanism");
  demo->add_option("--mechanism", demo_args.mechanism, "Mechanism id");
  demo->add_option("--seed", demo_args.seed, "Initialization seed");
  demo->add_option("--n", demo_args.n, "Number of patches")->check(CLI::PositiveNumber);
  demo->add_option("--d", demo_args.d, "Model width")->check(CLI::PositiveNumber);
  demo->add_option("--layers", demo_args.layers, "Encoder layers");
  demo->add_option("--patch-dim", demo_args.patch_dim, "Flattened patch length")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*verify) return cmd_verify(negative_control);
    if (*bench) return cmd_bench(bench_args);
    if (!ta::is_known_mechanism(demo_args.mechanism)) {
      std::cerr << "error: unknown mechanism '" << demo_args.mechanism << "'\n" << demo->help() << "known mechanisms:";
      for (const auto& m : ta::mechanisms()) std::cerr << ' ' << m.id;
      std::cerr << '\n';
      return kExitUsage;
    }
    return cmd_demo(demo_args);
  } catch (const ta::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_usage_error(e) ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
