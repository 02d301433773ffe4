#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "ruelle/io.hpp"

namespace ruelle {

struct RunConfig {
  std::string command;       // toric, estimate-flow, counterexample, check, orbits
  std::string check;         // main-inequality, sandwich, trace-bound, dyn-convexity
  std::string region;        // path or inline JSON
  std::string outer;         // sandwich: outer region
  double tol = 1e-9;         // quadrature relative tolerance
  std::uint64_t seed = 0;
  double T = 200.0;
  long samples = 1000;
  double t_max = 3.0;        // orbit period cutoff
  double c_target = 50.0;
  double epsilon = 0.1;
  std::optional<double> L;
  std::string out;           // empty: stdout
  std::string format = "json";
  std::string dump;          // CSV side output
  bool timing = false;
};

Report cmd_toric(const RunConfig& config);
Report cmd_estimate_flow(const RunConfig& config);
Report cmd_counterexample(const RunConfig& config);
Report cmd_check(const RunConfig& config);
Report cmd_orbits(const RunConfig& config);

// Exit codes: 0 success, 1 input error, 2 computation error, 3 a report
// assertion failed. Reports are written once, atomically when --out is set.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace ruelle
