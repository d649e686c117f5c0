#include "pdisc/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "pdisc/instance.hpp"

namespace pdisc {

double wasserstein2(std::vector<double> samples,
                    const std::function<double(double)>& quantile,
                    int grid_size) {
  if (samples.empty()) throw PdiscError("wasserstein2: empty sample set");
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  double acc = 0.0;
  for (int k = 0; k < grid_size; ++k) {
    double p = (k + 0.5) / grid_size;
    // Empirical quantile: left-continuous step function of the sorted data.
    std::size_t idx = std::min(n - 1, std::size_t(p * double(n)));
    double d = samples[idx] - quantile(p);
    acc += d * d;
  }
  return std::sqrt(acc / grid_size);
}

}  // namespace pdisc
