#include "pdisc/instance.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "pdisc/rng.hpp"

namespace pdisc {

Instance generate_instance(std::size_t m, std::size_t n, double kappa,
                           std::uint64_t seed) {
  if (m < 1 || n < 1) throw PdiscError("instance dimensions must be >= 1");
  // Guard the multiplication; 1e8 entries (800 MB) is already past anything
  // the experiments ask for.
  if (n != 0 && m > std::numeric_limits<std::size_t>::max() / n)
    throw PdiscError("instance size M*N overflows");
  if (m * n > std::size_t(200'000'000))
    throw PdiscError("instance size M*N exceeds the 2e8 entry limit");

  Instance inst;
  inst.m = m;
  inst.n = n;
  inst.kappa = kappa;
  inst.seed = seed;
  inst.x.resize(m * n);
  Rng gen(seed, kStreamInstance);
  gen.fill_normal(inst.x.data(), inst.x.size());
  return inst;
}

std::vector<double> margins(const Instance& inst,
                            const std::vector<double>& theta) {
  if (theta.size() != inst.n)
    throw PdiscError("theta length does not match instance N");
  std::vector<double> out(inst.m);
  const double inv_sqrt_n = 1.0 / std::sqrt(double(inst.n));
  for (std::size_t i = 0; i < inst.m; ++i) {
    const double* r = inst.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < inst.n; ++j) acc += r[j] * theta[j];
    out[i] = acc * inv_sqrt_n;
  }
  return out;
}

double min_margin(const Instance& inst, const std::vector<double>& theta) {
  auto mv = margins(inst, theta);
  return *std::min_element(mv.begin(), mv.end());
}

SolutionReport verify_solution(const Instance& inst,
                               const std::vector<double>& chi, double kappa) {
  SolutionReport rep;
  rep.binary = true;
  for (double v : chi)
    if (v != 1.0 && v != -1.0) {
      rep.binary = false;
      break;
    }
  auto mv = margins(inst, chi);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mv.size(); ++i) {
    worst = std::min(worst, mv[i]);
    if (mv[i] < kappa) rep.violated_rows.push_back(i);
  }
  rep.min_margin = worst - kappa;
  rep.feasible = rep.violated_rows.empty();
  return rep;
}

namespace {

// The header is decimal text for diffability; the payload (if present) is raw
// IEEE doubles. We only target little-endian hosts and say so loudly.
static_assert(std::endian::native == std::endian::little,
              "PDISC1 payload assumes a little-endian host");

std::string read_header_line(std::istream& is, const char* what) {
  std::string line;
  if (!std::getline(is, line))
    throw PdiscError(std::string("truncated instance header: missing ") +
                     what);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

void write_instance(std::ostream& os, const Instance& inst,
                    bool include_matrix) {
  os << "PDISC1\n" << inst.m << "\n" << inst.n << "\n";
  // Round-trip-exact kappa via max_digits10.
  std::ostringstream k;
  k.precision(17);
  k << inst.kappa;
  os << k.str() << "\n" << inst.seed << "\n";
  if (include_matrix)
    os.write(reinterpret_cast<const char*>(inst.x.data()),
             std::streamsize(inst.x.size() * sizeof(double)));
  if (!os) throw PdiscError("failed writing instance stream");
}

void write_instance_file(const std::string& path, const Instance& inst,
                         bool include_matrix) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw PdiscError("cannot open for writing: " + path);
  write_instance(f, inst, include_matrix);
}

Instance read_instance(std::istream& is) {
  std::string magic = read_header_line(is, "magic");
  if (magic != "PDISC1")
    throw PdiscError("bad instance magic (expected PDISC1): " + magic);
  Instance inst;
  try {
    inst.m = std::stoull(read_header_line(is, "M"));
    inst.n = std::stoull(read_header_line(is, "N"));
    inst.kappa = std::stod(read_header_line(is, "kappa"));
    inst.seed = std::stoull(read_header_line(is, "seed"));
  } catch (const std::exception&) {
    throw PdiscError("malformed instance header field");
  }
  if (inst.m < 1 || inst.n < 1)
    throw PdiscError("instance header has non-positive dimensions");

  // Peek for a payload: header-only files regenerate from the seed.
  std::size_t count = inst.m * inst.n;
  inst.x.resize(count);
  is.read(reinterpret_cast<char*>(inst.x.data()),
          std::streamsize(count * sizeof(double)));
  std::size_t got_bytes = std::size_t(is.gcount());
  if (got_bytes == 0) {
    Instance regen =
        generate_instance(inst.m, inst.n, inst.kappa, inst.seed);
    inst.x = std::move(regen.x);
  } else if (got_bytes != count * sizeof(double)) {
    throw PdiscError("instance payload truncated");
  }
  for (double v : inst.x)
    if (!std::isfinite(v)) throw PdiscError("instance payload has non-finite entries");
  return inst;
}

Instance read_instance_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw PdiscError("cannot open instance file: " + path);
  return read_instance(f);
}

}  // namespace pdisc
