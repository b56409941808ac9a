#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "qp2loc/hamiltonian.hpp"

namespace qp2loc {

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 42;
  std::string out_dir = ".";
};

// Executes one batch command, writing CSV/JSON/SVG artifacts plus a manifest
// into out_dir. Throws ConfigError / std::exception on invalid input.
void run_command(const RunOptions& opt);

// Config fragment parsers shared with tests.
double parse_omega(const nlohmann::json& j);
FourierPotential parse_potential(const nlohmann::json& j);
InteractionPotential parse_interaction(const nlohmann::json& j);
ElementaryRegion parse_region(const nlohmann::json& j);

// 17-significant-digit float formatting used for all CSV output.
std::string fmt_double(double x);
// RFC-4180 quoting.
std::string csv_field(const std::string& s);

}  // namespace qp2loc
