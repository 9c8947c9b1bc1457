#pragma once

#include "nmsub/manifold.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nmsub {

/// Data points on a common manifold with optional ground-truth labels.
struct LabeledDataset {
  std::string name;
  Manifold point_manifold = Manifold::euclidean(1);
  std::vector<Matrix> points;
  std::vector<int> labels;  // empty when no ground truth
  std::map<std::string, std::string> meta;

  int size() const { return static_cast<int>(points.size()); }
  bool hasLabels() const { return !labels.empty(); }
  int labelCount() const;

  /// Throws InvalidInput on shape/membership/label violations.
  void validate(double membership_tol = 1e-8) const;

  /// Points stacked column-wise as vec(point); cached on first use.
  const Matrix& stacked() const;

 private:
  mutable Matrix stacked_;
};

/// One row per point, coordinates flattened row-major, optional trailing
/// integer label column. A key-value sidecar at <path>.meta carries the
/// manifold descriptor and provenance.
void writeCsv(const LabeledDataset& data, const std::string& path);
LabeledDataset readCsv(const std::string& path);

/// Plain numeric CSV without a sidecar (iris-style exports). Non-numeric
/// trailing columns are mapped to integer labels when labels="last";
/// a header row is skipped automatically.
LabeledDataset readPlainCsv(const std::string& path, const std::string& labels,
                            bool normalize_rows = false);

}  // namespace nmsub
