#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qp2loc/config.hpp"
#include "qp2loc/numerics.hpp"
#include "qp2loc/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"qp2loc: batch experiments for a two-particle quasiperiodic lattice model"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  long long seed = -1;
  int threads = 0;

  const std::vector<std::string> commands = {
      "symmetry", "levelset",  "green-scan",       "arith-count", "spectrum", "decay",
      "poisson",  "annulus",   "double-resonance", "multiscale",  "sweep"};
  for (const auto& name : commands) {
    CLI::App* sub = app.add_subcommand(name, "run the '" + name + "' experiment");
    sub->add_option("--config", config_path, "TOML or JSON experiment config")->required();
    sub->add_option("--seed", seed, "seed overriding the config value");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads (QP2LOC_THREADS honored)");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (threads > 0) qp2loc::set_thread_count(threads);
    qp2loc::RunOptions opt;
    opt.command = app.get_subcommands().front()->get_name();
    opt.config = qp2loc::load_config(config_path);
    if (opt.config.contains("command") &&
        opt.config.at("command").get<std::string>() != opt.command)
      throw qp2loc::ConfigError("config command '" +
                                opt.config.at("command").get<std::string>() +
                                "' does not match subcommand '" + opt.command + "'");
    opt.seed = seed >= 0 ? static_cast<std::uint64_t>(seed)
                         : opt.config.value("seed", std::uint64_t{42});
    opt.out_dir = out_dir;
    qp2loc::run_command(opt);
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = e.what();
    err["command"] = app.get_subcommands().empty() ? std::string("?")
                                                   : app.get_subcommands().front()->get_name();
    std::cerr << err.dump() << std::endl;
    return 1;
  }
  return 0;
}
