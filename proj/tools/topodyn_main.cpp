#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "topodyn/topodyn.hpp"

namespace fs = std::filesystem;

namespace {

const std::vector<std::pair<std::string, std::string>> kOperations = {
    {"scan", "Transitivity scan over ball pairs or a grid"},
    {"almost-scan", "Almost-transitivity scan (either direction counts)"},
    {"recurrent", "Construct a nested-ball recurrence certificate"},
    {"verify-cert", "Independently verify a certificate"},
    {"salas", "Partial-product criterion for a weighted shift"},
    {"witness", "Exact transitivity witness battery for a shift"},
    {"power-check", "Witness battery for T^p"},
    {"unimodular-check", "Witness battery for lambda*T"},
    {"span", "Orbit span basis and compressed operator"},
    {"gdelta", "G-delta membership formula on the forward orbit"},
    {"jset", "Prolongational limit set witness search"},
    {"limit", "Limit set / recurrence witness (y defaults to x)"},
    {"orbit", "Print an orbit segment"},
};

void print_error(const std::string& type, const std::string& message) {
  topodyn::ordered_json err;
  err["tool"] = std::string(topodyn::kToolName);
  err["version"] = std::string(topodyn::kVersion);
  err["error"] = topodyn::ordered_json::object();
  err["error"]["type"] = type;
  err["error"]["message"] = message;
  std::cout << topodyn::dump_deterministic(err);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"topodyn: desk-scale experiments in topological transitivity"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(topodyn::kVersion));

  std::string config_path;
  std::string out_dir;
  long long seed_override = -1;
  bool seed_given = false;
  int jobs = 1;

  for (const auto& [name, desc] : kOperations) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "Experiment config (JSON)")
        ->required();
    sub->add_option("--seed", seed_override, "Override the config seed")
        ->each([&](const std::string&) { seed_given = true; });
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--jobs", jobs, "Worker threads for scans")
        ->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\nRun with --help for more information.\n";
    print_error("invalid-arguments", e.what());
    return 2;
  }
  const std::string operation = app.get_subcommands().front()->get_name();

  if (out_dir.empty()) {
    if (const char* env = std::getenv("TOPODYN_OUT_DIR")) out_dir = env;
    if (out_dir.empty()) out_dir = ".";
  }

  topodyn::ordered_json doc;
  try {
    std::ifstream in(config_path);
    if (!in) {
      print_error("config-not-found", "cannot open config: " + config_path);
      return 2;
    }
    in >> doc;
  } catch (const std::exception& e) {
    print_error("config-parse-error", e.what());
    return 2;
  }

  try {
    if (seed_given) doc["seed"] = static_cast<std::uint64_t>(seed_override);
    topodyn::ExperimentConfig cfg = topodyn::parse_config(doc, operation);
    topodyn::RunOutcome outcome = topodyn::run_experiment(cfg, jobs);

    fs::create_directories(out_dir);
    fs::path report_path = fs::path(out_dir) / cfg.report_name;
    write_file(report_path, topodyn::dump_deterministic(outcome.report));
    if (outcome.certificate_doc) {
      fs::path cert_path = fs::path(out_dir) / cfg.certificate_name;
      write_file(cert_path, topodyn::dump_deterministic(*outcome.certificate_doc));
      std::cout << "certificate: " << cert_path.string() << "\n";
    }
    if (outcome.csv) {
      fs::path csv_path = fs::path(out_dir) / cfg.csv_name;
      write_file(csv_path, *outcome.csv);
      std::cout << "csv: " << csv_path.string() << "\n";
    }
    std::cout << (outcome.passed ? "[PASS] " : "[FAIL] ") << operation << ": "
              << outcome.summary << "\n";
    std::cout << "report: " << report_path.string() << "\n";
    std::fprintf(stderr, "wall time: %.3f ms\n", outcome.wall_ms);
    return outcome.exit_code;
  } catch (const topodyn::invalid_input& e) {
    print_error("invalid-input", e.what());
    return 2;
  } catch (const topodyn::enclosure_blowup& e) {
    print_error("enclosure-blowup", e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("error", e.what());
    return 2;
  }
}
