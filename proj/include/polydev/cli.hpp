#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polydev/experiments.hpp"

namespace polydev {

/// Everything a subcommand run depends on.  An accepted config round-trips
/// through to_json/from_json unchanged, so runs can be archived and replayed.
struct RunConfig {
  std::string command;
  std::string body;
  std::string density = "uniform";
  std::string poly_path;        // deviate: polytope JSON to load
  double p = 1.0;               // asp exponent
  double scale = 1.0;           // deviate: body is scaled by this factor
  std::string method = "auto";  // deviate: auto | radial | decomposed
  std::string cmode = "auto";   // construct/scaling: auto | asymptotic | empirical
  int n_points = 0;             // construct / single-N deficit
  int trials = 0;               // 0 = subcommand default
  std::vector<int> schedule;    // scaling / deficit
  std::int64_t samples = 0;     // 0 = subcommand default
  std::uint64_t seed = 1729;    // fixed default, never time-based
  int workers = 1;
  std::string format = "csv";   // csv | json
  std::string out;              // output path; empty = stdout
  std::string witness_out;      // construct: witness polytope JSON path
  std::string plot;             // scaling: SVG path

  bool operator==(const RunConfig&) const = default;

  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
};

/// `ball:r=<f>,n=<int>` | `ellipsoid:a=<f>,b=<f>[,c=<f>,...]` |
/// `curve2d:<path.json>` where the file holds {"a0": ..., "harmonics":
/// [[k, a_k, b_k], ...]}.  Malformed specs throw contract_violation naming
/// the --body flag.
ConvexBody parse_body(const std::string& spec);

/// `uniform` | `fn` | `custom:<path.json>` (2-D only; the file holds
/// trigonometric weight coefficients in the curve2d layout).
Density parse_density(const ConvexBody& body, const std::string& spec,
                      std::uint64_t seed);

/// Parses argv into a RunConfig and executes the subcommand.  Returns 0 on
/// success, 1 on configuration errors, 2 on numerical failures.
int run_command(const std::vector<std::string>& args);
int run_command(int argc, const char* const* argv);

}  // namespace polydev
