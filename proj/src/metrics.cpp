#include "juice/metrics.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>

namespace juice {

double srr(const IndexSet& truth, const IndexSet& detected) {
  if (truth.empty()) throw std::invalid_argument("srr: true support must be nonempty");
  IndexSet common;
  std::set_intersection(truth.begin(), truth.end(), detected.begin(), detected.end(),
                        std::back_inserter(common));
  IndexSet diff;
  std::set_symmetric_difference(truth.begin(), truth.end(), detected.begin(), detected.end(),
                                std::back_inserter(diff));
  const auto k = static_cast<double>(truth.size());
  return static_cast<double>(common.size()) / (static_cast<double>(diff.size()) + k);
}

NaseTerms nase_accumulate(const CMatrix& x_true, const CMatrix& x_hat, const IndexSet& truth) {
  if (x_true.rows() != x_hat.rows() || x_true.cols() != x_hat.cols())
    throw std::invalid_argument("nase_accumulate: shape mismatch");
  NaseTerms t;
  for (int i : truth) {
    t.squared_error += (x_true.col(i) - x_hat.col(i)).squaredNorm();
    t.reference_energy += x_true.col(i).squaredNorm();
  }
  return t;
}

double MeanAccumulator::std_error() const {
  if (count_ < 2) return 0.0;
  const double n = static_cast<double>(count_);
  const double var = std::max(0.0, (sum_sq_ - sum_ * sum_ / n) / (n - 1.0));
  return std::sqrt(var / n);
}

}  // namespace juice
