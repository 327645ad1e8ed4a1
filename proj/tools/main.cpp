#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fracperim/error.hpp"
#include "fracperim/experiments.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string format = "csv";
  std::optional<int> threads;
  std::optional<double> rel_tol;
  std::optional<double> trunc;
  std::optional<int> near_cutoff;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON experiment configuration")->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output file (default: stdout)");
  cmd->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--rel-tol", f.rel_tol, "relative tolerance of near-field weights")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--trunc", f.trunc, "truncation radius for J^2")->check(CLI::PositiveNumber);
  cmd->add_option("--near-cutoff", f.near_cutoff, "max-norm offset up to which weights are integrated")
      ->check(CLI::NonNegativeNumber);
}

int run(fracperim::ExperimentKind kind, const Flags& f) {
  using namespace fracperim;
  ExperimentConfig cfg = f.config.empty() ? parse_config(nlohmann::json::object()) : load_config(f.config);
  cfg.kind = kind;
  if (f.threads) cfg.threads = *f.threads;
  if (f.rel_tol) cfg.rel_tol = *f.rel_tol;
  if (f.trunc) cfg.r_trunc = *f.trunc;
  if (f.near_cutoff) cfg.near_cutoff = *f.near_cutoff;
  std::string out_path = f.out.empty() ? cfg.output : f.out;

  const Table table = run_experiment(cfg);

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw Error(ErrorKind::config, "cannot write " + out_path);
  }
  std::ostream& out = out_path.empty() ? std::cout : file;
  if (f.format == "json")
    write_json(table, out);
  else
    write_csv(table, out);
  out.flush();
  if (table.non_converged) {
    std::cerr << "fracperim: sweep limit reached before a fixed point\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  using fracperim::ExperimentKind;
  CLI::App app{"Fractional perimeter functionals on voxelized sets"};
  app.require_subcommand(1);
  Flags flags;
  std::optional<ExperimentKind> chosen;
  for (ExperimentKind k : {ExperimentKind::compute, ExperimentKind::converge, ExperimentKind::halfspace,
                           ExperimentKind::coarea, ExperimentKind::translation, ExperimentKind::minimize,
                           ExperimentKind::glue}) {
    CLI::App* cmd = app.add_subcommand(fracperim::to_string(k));
    add_flags(cmd, flags);
    cmd->callback([&chosen, k] { chosen = k; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  try {
    return run(*chosen, flags);
  } catch (const fracperim::Error& e) {
    std::cerr << "fracperim: " << fracperim::to_string(e.kind()) << ": " << e.what() << '\n';
    switch (e.kind()) {
      case fracperim::ErrorKind::config: return 2;
      case fracperim::ErrorKind::non_convergence: return 3;
      default: return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "fracperim: " << e.what() << '\n';
    return 1;
  }
}
