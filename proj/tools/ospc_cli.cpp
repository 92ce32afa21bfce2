// ospc: delay/energy tradeoff tables, PFS comparison, finite-K convergence,
// single-system simulation and the acceptance suite.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ospc/commands.hpp"

namespace {

struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  bool paper_scale = false;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "experiment JSON");
  sub->add_option("--out", f.out, "output file (default stdout)");
  sub->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--seed", f.seed, "base seed");
  sub->add_option("--threads", f.threads, "worker threads (0 = all cores)");
  sub->add_flag("--paper-scale", f.paper_scale, "1000-system ensembles");
}

void write_text(const std::optional<std::string>& path, const std::string& text) {
  if (!path) {
    std::cout << text;
    return;
  }
  std::ofstream out(*path, std::ios::binary);
  if (!out) ospc::fail(ospc::ErrorKind::kConfigInvalid, "cannot write " + *path);
  out << text;
}

int emit(const ospc::ResultTable& table, const ospc::ExperimentConfig& cfg, const Flags& f) {
  const std::string format = f.format.value_or(cfg.format);
  const auto path = f.out ? f.out : cfg.output_path;
  if (format == "json") {
    write_text(path, table.to_json().dump(2) + "\n");
  } else {
    write_text(path, table.to_csv());
    // CSV has no room for the metadata block; keep it next to the table.
    if (path) write_text(*path + ".meta.json", table.metadata.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Opportunistic superposition-coding scheduler: analysis and simulation"};
  app.set_version_flag("--version", OSPC_VERSION);
  app.require_subcommand(1);

  Flags flags;
  auto* tradeoff = app.add_subcommand("tradeoff", "Eb/N0 against delay");
  auto* compare = app.add_subcommand("compare-pfs", "OSPC against proportional-fair scheduling");
  auto* convergence = app.add_subcommand("convergence", "finite-K ensembles vs the asymptote");
  auto* simulate = app.add_subcommand("simulate", "one slotted system, per-user metrics");
  auto* validate = app.add_subcommand("validate", "acceptance suite");
  for (auto* sub : {tradeoff, compare, convergence, simulate}) {
    add_common(sub, flags);
    sub->get_option("--config")->required();
  }
  add_common(validate, flags);
  std::optional<int> criterion;
  validate->add_option("--criterion", criterion, "run a single check by id");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    ospc::ExperimentConfig cfg;
    if (flags.config) cfg = ospc::ExperimentConfig::load(*flags.config);
    if (flags.seed) cfg.seed = *flags.seed;
    const ospc::RunOptions opts{flags.threads, flags.paper_scale};

    if (tradeoff->parsed()) return emit(ospc::cmd_tradeoff(cfg, opts), cfg, flags);
    if (compare->parsed()) return emit(ospc::cmd_compare_pfs(cfg, opts), cfg, flags);
    if (convergence->parsed()) return emit(ospc::cmd_convergence(cfg, opts), cfg, flags);
    if (simulate->parsed()) return emit(ospc::cmd_simulate(cfg, opts), cfg, flags);

    const auto table = ospc::cmd_validate(cfg, opts, criterion);
    emit(table, cfg, flags);
    for (const auto& row : table.rows) {
      std::cerr << (std::get<bool>(row[2]) ? "PASS " : "FAIL ") << std::get<std::int64_t>(row[0])
                << " " << std::get<std::string>(row[1]) << "\n";
    }
    return table.metadata["all_passed"].get<bool>() ? 0 : 1;
  } catch (const ospc::Error& e) {
    std::cerr << "ospc: " << e.what() << "\n";
    return e.kind() == ospc::ErrorKind::kConfigInvalid ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "ospc: " << e.what() << "\n";
    return 1;
  }
}
