#pragma once

// Random perceptron instances: an M x N Gaussian disorder matrix X, a margin
// kappa, and the seed that produced X. A vector theta is feasible when every
// normalized row margin <X_i, theta>/sqrt(N) clears kappa.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdisc {

// All user-facing failures are raised as PdiscError; the CLI prefixes the
// message with "EPDISC:" and maps it to exit code 2.
class PdiscError : public std::runtime_error {
 public:
  explicit PdiscError(const std::string& what) : std::runtime_error(what) {}
};

struct Instance {
  std::size_t m = 0;  // rows / constraints
  std::size_t n = 0;  // columns / variables
  double kappa = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> x;  // row-major, m*n entries

  const double* row(std::size_t i) const { return x.data() + i * n; }
};

struct SolutionReport {
  bool feasible = false;
  bool binary = false;
  double min_margin = 0.0;  // min_i <X_i,chi>/sqrt(N) - kappa
  std::vector<std::size_t> violated_rows;
};

Instance generate_instance(std::size_t m, std::size_t n, double kappa,
                           std::uint64_t seed);

std::vector<double> margins(const Instance& inst,
                            const std::vector<double>& theta);

double min_margin(const Instance& inst, const std::vector<double>& theta);

SolutionReport verify_solution(const Instance& inst,
                               const std::vector<double>& chi, double kappa);

// PDISC1 container: text header (magic, M, N, kappa, seed), optionally
// followed by the raw matrix as little-endian doubles. Header-only files
// regenerate X from the seed on load.
void write_instance(std::ostream& os, const Instance& inst,
                    bool include_matrix);
void write_instance_file(const std::string& path, const Instance& inst,
                         bool include_matrix);
Instance read_instance(std::istream& is);
Instance read_instance_file(const std::string& path);

}  // namespace pdisc
