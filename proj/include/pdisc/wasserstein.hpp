#pragma once

// 1-D 2-Wasserstein distance between an empirical sample and a target law
// given by its quantile function. Used to compare realized LP margins with
// the predicted limiting law.

#include <functional>
#include <vector>

namespace pdisc {

// W2 via quantile coupling: sort the samples, evaluate both quantile
// functions on a uniform grid of `grid_size` midpoints in (0,1), and
// return sqrt(mean squared difference).
double wasserstein2(std::vector<double> samples,
                    const std::function<double(double)>& quantile,
                    int grid_size = 4096);

}  // namespace pdisc
