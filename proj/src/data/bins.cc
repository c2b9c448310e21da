#include "isomt/bins.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "isomt/errors.h"

namespace isomt {

int BinBoundaries::Assign(double value) const {
  return static_cast<int>(std::lower_bound(thresholds.begin(), thresholds.end(), value) -
                          thresholds.begin());
}

BinBoundaries LearnBins(std::vector<double> values, int n_bins) {
  if (values.empty()) throw ValidationError("cannot learn bins from an empty sample");
  if (n_bins < 1) throw ValidationError("bin count must be at least 1");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<long long>(values.size());
  BinBoundaries bins;
  for (int k = 1; k < n_bins; ++k) {
    const long long pos = std::max<long long>(0, (k * n + n_bins - 1) / n_bins - 1);
    double t = values[static_cast<std::size_t>(std::min(pos, n - 1))];
    if (!bins.thresholds.empty() && t <= bins.thresholds.back()) {
      t = std::nextafter(bins.thresholds.back(), std::numeric_limits<double>::infinity());
    }
    bins.thresholds.push_back(t);
  }
  return bins;
}

void BinBoundaries::Save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write bins " + path);
  out << "#isomt-bins 1\n" << std::setprecision(17);
  for (double t : thresholds) out << t << '\n';
}

BinBoundaries BinBoundaries::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open bins " + path);
  std::string line;
  if (!std::getline(in, line) || line != "#isomt-bins 1") {
    throw ParseError("missing bins header in " + path, 1);
  }
  BinBoundaries bins;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    try {
      bins.thresholds.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw ParseError("bad threshold in " + path, line_no);
    }
    if (bins.thresholds.size() > 1 &&
        bins.thresholds.back() <= bins.thresholds[bins.thresholds.size() - 2]) {
      throw ParseError("thresholds not strictly increasing in " + path, line_no);
    }
  }
  return bins;
}

}  // namespace isomt
