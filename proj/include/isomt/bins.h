#pragma once

#include <string>
#include <vector>

namespace isomt {

// Equal-frequency duration bins. A value v falls into the number of
// thresholds strictly below it, so ties at a threshold go to the lower bin.
struct BinBoundaries {
  std::vector<double> thresholds;

  int num_bins() const { return static_cast<int>(thresholds.size()) + 1; }
  int Assign(double value) const;

  // "#isomt-bins 1" header, then one threshold per line.
  void Save(const std::string& path) const;
  static BinBoundaries Load(const std::string& path);
};

// Thresholds at the empirical quantiles k*N/n_bins (the largest value of
// each chunk of the sorted sample), nudged upward where ties would repeat one.
BinBoundaries LearnBins(std::vector<double> values, int n_bins);

}  // namespace isomt
