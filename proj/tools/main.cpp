#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "regionprove/engine.hpp"
#include "regionprove/errors.hpp"
#include "regionprove/io.hpp"
#include "regionprove/network.hpp"
#include "regionprove/oracle.hpp"
#include "regionprove/tolerance.hpp"

namespace {

using namespace regionprove;

std::string format_pct(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", rate * 100.0);
  return std::string(buf) + "%";
}

std::string format_time(double seconds) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3fs", seconds);
  return buf;
}

std::string format_g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

int default_threads() {
  if (const char* env = std::getenv("REGION_PROVE_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

Network load_network(const std::string& path, bool no_normalize) {
  Network net = parse_network_file(path);
  if (no_normalize && net.normalization()) return net.without_normalization();
  return net;
}

struct VerifyOptions {
  std::string network_path;
  std::string property_path;
  double alpha = 0.999;
  double rate = 0.995;
  std::optional<std::int64_t> n;
  std::optional<std::int64_t> m;
  std::string heuristic = "h5";
  int max_splits = 18;
  std::optional<double> eps;
  std::uint64_t seed = 0;
  int threads = 0;
  double beta = 0.05;
  bool no_normalize = false;
};

void add_verify_options(CLI::App* cmd, VerifyOptions& opt) {
  cmd->add_option("network", opt.network_path, "network file (.nnet or .json)")->required();
  cmd->add_option("property", opt.property_path, "property file (.json)")->required();
  cmd->add_option("--alpha", opt.alpha, "joint confidence target");
  cmd->add_option("--rate", opt.rate, "per-region safe fraction lower bound");
  cmd->add_option("--n", opt.n, "samples per region (overrides --m)");
  cmd->add_option("--m", opt.m, "region count bound used to derive n");
  cmd->add_option("--heuristic", opt.heuristic, "split heuristic h1..h5");
  cmd->add_option("--max-splits", opt.max_splits, "refinement depth cap");
  cmd->add_option("--eps", opt.eps, "stop refining below this side length");
  cmd->add_option("--seed", opt.seed, "master seed");
  cmd->add_option("--threads", opt.threads, "worker threads (default: REGION_PROVE_THREADS or hardware)");
  cmd->add_option("--beta", opt.beta, "minimum split fraction");
  cmd->add_flag("--no-normalize", opt.no_normalize, "ignore .nnet normalization");
}

EngineConfig resolve_config(const VerifyOptions& opt) {
  EngineConfig config;
  config.tolerance.alpha = opt.alpha;
  config.tolerance.rate = opt.rate;
  if (opt.n && opt.m) {
    std::cerr << "warning: both --m and --n given; --n wins\n";
    config.tolerance.n = *opt.n;
    config.tolerance.m = *opt.m;
  } else if (opt.n) {
    config.tolerance.n = *opt.n;
  } else if (opt.m) {
    config.tolerance.m = *opt.m;
    config.tolerance.n = required_sample_size(opt.alpha, opt.rate, *opt.m);
  }
  config.heuristic = heuristic_from_string(opt.heuristic);
  config.max_splits = opt.max_splits;
  config.min_side_eps = opt.eps;
  config.master_seed = opt.seed;
  config.min_split_fraction = opt.beta;
  config.threads = opt.threads >= 1 ? opt.threads : default_threads();
  return config;
}

std::string summary_line(const VerificationOutcome& outcome) {
  return "regions=" + std::to_string(outcome.safe.size()) +
         " safe_rate=" + format_pct(outcome.safe_rate) +
         " unsafe_regions=" + std::to_string(outcome.unsafe.size()) +
         " unsafe_rate=" + format_pct(outcome.unsafe_rate) +
         " unknown_regions=" + std::to_string(outcome.unknown.size()) +
         " unknown_rate=" + format_pct(outcome.unknown_rate) +
         " time=" + format_time(outcome.wall_time_s);
}

int cmd_verify(const VerifyOptions& opt, const std::vector<std::string>& formats,
               const std::string& out_prefix) {
  const Network net = load_network(opt.network_path, opt.no_normalize);
  const SafetyProperty prop = parse_property_file(opt.property_path);
  const EngineConfig config = resolve_config(opt);
  const VerificationOutcome outcome = run_eprove(net, prop, config);

  for (const std::string& format : formats) {
    if (format == "csv") {
      write_text_file(out_prefix + ".regions.csv", write_regions_csv(outcome));
    } else if (format == "json") {
      write_text_file(out_prefix + ".json", write_outcome_json(outcome));
    } else if (format == "svg") {
      write_text_file(out_prefix + ".svg", render_svg_2d(outcome, 800, 800));
    } else {
      throw std::invalid_argument("unknown format '" + format + "' (expected csv, json or svg)");
    }
  }
  std::cout << summary_line(outcome) << "\n";
  return 0;
}

int cmd_samplesize(double alpha, double rate, std::int64_t m) {
  const std::int64_t n = required_sample_size(alpha, rate, m);
  std::cout << "n=" << n << " confidence_single=" << format_g9(confidence_single(n, rate))
            << " confidence_joint=" << format_g9(confidence_joint(n, rate, m)) << "\n";
  return 0;
}

int cmd_oracle(const std::string& network_path, const std::string& property_path,
               const std::string& method, std::int64_t cells, std::int64_t samples,
               std::uint64_t seed, int threads, bool no_normalize, const std::string& out_path) {
  const Network net = load_network(network_path, no_normalize);
  const SafetyProperty prop = parse_property_file(property_path);
  const AugmentedNetwork augmented = augment(net, prop);
  OracleReport report;
  if (method == "grid") {
    report = grid_safe_rate(augmented, prop.domain, cells, threads);
  } else if (method == "mc") {
    report = mc_safe_rate(augmented, prop.domain, samples, seed, threads);
  } else {
    throw std::invalid_argument("unknown oracle method '" + method + "' (expected grid or mc)");
  }
  const std::string text = write_oracle_report_json(report);
  if (out_path.empty())
    std::cout << text << "\n";
  else
    write_text_file(out_path, text);
  return 0;
}

int cmd_compare_heuristics(const VerifyOptions& opt, double timeout_s) {
  const Network net = load_network(opt.network_path, opt.no_normalize);
  const SafetyProperty prop = parse_property_file(opt.property_path);

  struct Row {
    std::string name;
    std::optional<VerificationOutcome> outcome;
  };
  std::vector<Row> rows;
  for (const char* name : {"h1", "h2", "h3", "h4", "h5"}) {
    VerifyOptions per = opt;
    per.heuristic = name;
    EngineConfig config = resolve_config(per);
    config.time_limit_s = timeout_s;
    Row row{name, std::nullopt};
    try {
      row.outcome = run_eprove(net, prop, config);
    } catch (const TimeoutError&) {
      // reported as a dash row
    }
    rows.push_back(std::move(row));
  }

  double best_rate = -1.0;
  for (const Row& row : rows)
    if (row.outcome && row.outcome->safe_rate > best_rate) best_rate = row.outcome->safe_rate;
  std::size_t best_index = rows.size();
  std::size_t best_regions = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& row = rows[i];
    if (!row.outcome || row.outcome->safe_rate < best_rate - 0.005) continue;
    if (best_index == rows.size() || row.outcome->safe.size() < best_regions) {
      best_index = i;
      best_regions = row.outcome->safe.size();
    }
  }

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& row = rows[i];
    std::string line = "heuristic=" + row.name;
    if (row.outcome) {
      line += " regions=" + std::to_string(row.outcome->safe.size()) +
              " safe_rate=" + format_pct(row.outcome->safe_rate) +
              " time=" + format_time(row.outcome->wall_time_s);
    } else {
      line += " regions=- safe_rate=- time=-";
    }
    if (i == best_index) line += " best=1";
    std::cout << line << "\n";
  }
  return 0;
}

int cmd_audit(const std::string& outcome_path, const std::string& network_path, bool no_normalize,
              std::int64_t cells, int threads) {
  const VerificationOutcome outcome = read_outcome_file(outcome_path);
  const Network net = load_network(network_path, no_normalize);
  const AugmentedNetwork augmented = augment(net, outcome.property);
  const AuditReport report = audit_safe_regions(outcome, [&](const Hyperrectangle& box) {
    return region_violation_fraction(augmented, box, cells, threads);
  });
  for (std::size_t i = 0; i < report.violation_fractions.size(); ++i)
    std::cout << "region=" << i
              << " violation_fraction=" << format_g9(report.violation_fractions[i]) << "\n";
  std::cout << "regions=" << report.violation_fractions.size()
            << " exceed_count=" << report.exceed_count
            << " threshold=" << format_g9(report.threshold) << "\n";
  return 0;
}

int cmd_plot(const std::string& outcome_path, const std::string& out_path, int width, int height) {
  const VerificationOutcome outcome = read_outcome_file(outcome_path);
  write_text_file(out_path, render_svg_2d(outcome, width, height));
  return 0;
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic enumeration of safe input regions for ReLU networks"};
  app.require_subcommand(1);

  VerifyOptions verify_opt;
  std::vector<std::string> formats{"csv", "json"};
  std::string out_prefix = "outcome";
  CLI::App* verify = app.add_subcommand("verify", "enumerate safe/unsafe regions");
  add_verify_options(verify, verify_opt);
  verify->add_option("--format", formats, "artifacts to write (csv, json, svg)")
      ->delimiter(',');
  verify->add_option("--out-prefix", out_prefix, "output file prefix");

  double ss_alpha = 0.999;
  double ss_rate = 0.995;
  std::int64_t ss_m = 10000;
  CLI::App* samplesize = app.add_subcommand("samplesize", "samples needed for a confidence target");
  samplesize->add_option("--alpha", ss_alpha, "joint confidence target");
  samplesize->add_option("--rate", ss_rate, "per-region safe fraction lower bound");
  samplesize->add_option("--m", ss_m, "region count bound");

  std::string oracle_network;
  std::string oracle_property;
  std::string oracle_method = "grid";
  std::int64_t oracle_cells = 1000;
  std::int64_t oracle_samples = 1000000;
  std::uint64_t oracle_seed = 0;
  int oracle_threads = 0;
  bool oracle_no_normalize = false;
  std::string oracle_out;
  CLI::App* oracle = app.add_subcommand("oracle", "baseline safe-rate estimate");
  oracle->add_option("network", oracle_network, "network file")->required();
  oracle->add_option("property", oracle_property, "property file")->required();
  oracle->add_option("--method", oracle_method, "grid or mc");
  oracle->add_option("--cells", oracle_cells, "grid cells per dimension");
  oracle->add_option("--samples", oracle_samples, "Monte Carlo sample count");
  oracle->add_option("--seed", oracle_seed, "Monte Carlo seed");
  oracle->add_option("--threads", oracle_threads, "worker threads");
  oracle->add_flag("--no-normalize", oracle_no_normalize, "ignore .nnet normalization");
  oracle->add_option("--out", oracle_out, "write the report here instead of stdout");

  VerifyOptions compare_opt;
  double compare_timeout = 300.0;
  CLI::App* compare = app.add_subcommand("compare-heuristics", "run every heuristic once");
  add_verify_options(compare, compare_opt);
  compare->add_option("--timeout", compare_timeout, "per-heuristic wall-clock limit in seconds");

  std::string audit_outcome;
  std::string audit_network;
  bool audit_no_normalize = false;
  std::int64_t audit_cells = 100;
  int audit_threads = 0;
  CLI::App* audit = app.add_subcommand("audit", "grid-check every safe region of an outcome");
  audit->add_option("outcome", audit_outcome, "outcome JSON from verify")->required();
  audit->add_option("network", audit_network, "network file")->required();
  audit->add_flag("--no-normalize", audit_no_normalize, "ignore .nnet normalization");
  audit->add_option("--cells", audit_cells, "grid cells per dimension and region");
  audit->add_option("--threads", audit_threads, "worker threads");

  std::string plot_outcome;
  std::string plot_out = "outcome.svg";
  int plot_width = 800;
  int plot_height = 800;
  CLI::App* plot = app.add_subcommand("plot", "render a 2-D outcome as SVG");
  plot->add_option("outcome", plot_outcome, "outcome JSON from verify")->required();
  plot->add_option("--out", plot_out, "output SVG path");
  plot->add_option("--width", plot_width, "width in pixels");
  plot->add_option("--height", plot_height, "height in pixels");

  CLI11_PARSE(app, argc, argv);

  if (verify->parsed())
    return guarded([&] { return cmd_verify(verify_opt, formats, out_prefix); });
  if (samplesize->parsed())
    return guarded([&] { return cmd_samplesize(ss_alpha, ss_rate, ss_m); });
  if (oracle->parsed())
    return guarded([&] {
      return cmd_oracle(oracle_network, oracle_property, oracle_method, oracle_cells,
                        oracle_samples, oracle_seed,
                        oracle_threads >= 1 ? oracle_threads : default_threads(),
                        oracle_no_normalize, oracle_out);
    });
  if (compare->parsed())
    return guarded([&] { return cmd_compare_heuristics(compare_opt, compare_timeout); });
  if (audit->parsed())
    return guarded([&] {
      return cmd_audit(audit_outcome, audit_network, audit_no_normalize, audit_cells,
                       audit_threads >= 1 ? audit_threads : default_threads());
    });
  if (plot->parsed())
    return guarded([&] { return cmd_plot(plot_outcome, plot_out, plot_width, plot_height); });
  return 1;
}
