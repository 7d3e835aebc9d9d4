#pragma once

#include <cmath>
#include <cstddef>

#include "juice/types.hpp"

namespace juice {

/// |S n S^| / (|S (sym. diff) S^| + K), K = |S|. Both sets must be sorted.
double srr(const IndexSet& truth, const IndexSet& detected);

struct NaseTerms {
  double squared_error = 0.0;     // ||X_S - X^_S||_F^2
  double reference_energy = 0.0;  // ||X_S||_F^2
};

/// Error and energy restricted to the true-support columns.
NaseTerms nase_accumulate(const CMatrix& x_true, const CMatrix& x_hat, const IndexSet& truth);

inline double to_db(double linear) { return 10.0 * std::log10(linear); }

/// Ratio-of-sums NASE over trials.
class NaseAccumulator {
 public:
  void add(const NaseTerms& t) {
    error_ += t.squared_error;
    energy_ += t.reference_energy;
  }
  void merge(const NaseAccumulator& o) {
    error_ += o.error_;
    energy_ += o.energy_;
  }
  double value() const { return error_ / energy_; }
  double value_db() const { return to_db(value()); }
  double error() const { return error_; }
  double energy() const { return energy_; }

 private:
  double error_ = 0.0;
  double energy_ = 0.0;
};

/// Running mean and standard error of a scalar.
class MeanAccumulator {
 public:
  void add(double v) {
    ++count_;
    sum_ += v;
    sum_sq_ += v * v;
  }
  std::size_t count() const { return count_; }
  double mean() const { return count_ ? sum_ / static_cast<double>(count_) : 0.0; }
  double std_error() const;

 private:
  std::size_t count_ = 0;
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
};

}  // namespace juice
