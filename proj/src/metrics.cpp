#include "nmsub/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace nmsub {

Partition Partition::fromAssignments(std::vector<int> a) {
  Partition p;
  p.assignments = std::move(a);
  for (int v : p.assignments) p.l = std::max(p.l, v + 1);
  p.validate();
  return p;
}

void Partition::validate() const {
  if (assignments.empty()) throw InvalidInput("partition: empty");
  for (int v : assignments)
    if (v < 0 || v >= l) throw InvalidInput("partition: label out of range");
}

namespace {

Matrix contingency(const Partition& pred, const Partition& truth) {
  Matrix c = Matrix::Zero(pred.l, truth.l);
  for (std::size_t i = 0; i < pred.assignments.size(); ++i)
    c(pred.assignments[i], truth.assignments[i]) += 1.0;
  return c;
}

double entropy(const Vector& counts, double n) {
  double h = 0.0;
  for (Index i = 0; i < counts.size(); ++i)
    if (counts(i) > 0.0) h -= counts(i) / n * std::log(counts(i) / n);
  return h;
}

}  // namespace

ClusterScores homogeneityCompletenessV(const Partition& pred, const Partition& truth) {
  pred.validate();
  truth.validate();
  if (pred.assignments.size() != truth.assignments.size())
    throw InvalidInput("cluster metrics: partition length mismatch");
  const double n = static_cast<double>(pred.assignments.size());
  const Matrix c = contingency(pred, truth);
  const Vector pred_counts = c.rowwise().sum();
  const Vector truth_counts = c.colwise().sum();

  const double h_truth = entropy(truth_counts, n);
  const double h_pred = entropy(pred_counts, n);

  // Conditional entropies from the joint distribution.
  double h_truth_given_pred = 0.0;
  double h_pred_given_truth = 0.0;
  for (Index i = 0; i < c.rows(); ++i)
    for (Index j = 0; j < c.cols(); ++j) {
      const double nij = c(i, j);
      if (nij <= 0.0) continue;
      h_truth_given_pred -= nij / n * std::log(nij / pred_counts(i));
      h_pred_given_truth -= nij / n * std::log(nij / truth_counts(j));
    }

  ClusterScores s;
  s.homogeneity = h_truth == 0.0 ? 1.0 : std::max(0.0, 1.0 - h_truth_given_pred / h_truth);
  s.completeness = h_pred == 0.0 ? 1.0 : std::max(0.0, 1.0 - h_pred_given_truth / h_pred);
  const double sum = s.homogeneity + s.completeness;
  s.v_measure = sum == 0.0 ? 0.0 : 2.0 * s.homogeneity * s.completeness / sum;
  return s;
}

double adjustedRandIndex(const Partition& pred, const Partition& truth) {
  pred.validate();
  truth.validate();
  if (pred.assignments.size() != truth.assignments.size())
    throw InvalidInput("ari: partition length mismatch");
  if (pred.assignments.size() < 2) throw InvalidInput("ari: needs at least two points");

  const Matrix c = contingency(pred, truth);
  const auto choose2 = [](double m) { return 0.5 * m * (m - 1.0); };

  double sum_ij = 0.0;
  for (Index i = 0; i < c.rows(); ++i)
    for (Index j = 0; j < c.cols(); ++j) sum_ij += choose2(c(i, j));
  double sum_pred = 0.0, sum_truth = 0.0;
  const Vector pred_counts = c.rowwise().sum();
  const Vector truth_counts = c.colwise().sum();
  for (Index i = 0; i < pred_counts.size(); ++i) sum_pred += choose2(pred_counts(i));
  for (Index j = 0; j < truth_counts.size(); ++j) sum_truth += choose2(truth_counts(j));

  const double total = choose2(static_cast<double>(pred.assignments.size()));
  const double expected = sum_pred * sum_truth / total;
  const double maximum = 0.5 * (sum_pred + sum_truth);
  if (maximum == expected) return 1.0;  // both partitions trivial
  return (sum_ij - expected) / (maximum - expected);
}

void ProfileTable::validate() const {
  if (solvers.empty() || problems.empty()) throw InvalidInput("profile: empty table");
  if (costs.rows() != static_cast<Index>(solvers.size()) ||
      costs.cols() != static_cast<Index>(problems.size()))
    throw InvalidInput("profile: cost matrix shape mismatch");
  for (Index s = 0; s < costs.rows(); ++s)
    for (Index p = 0; p < costs.cols(); ++p)
      if (!(costs(s, p) > 0.0))  // failures are +inf, still > 0
        throw InvalidInput("profile: costs must be positive (use +inf for failures)");
}

ProfileCurve performanceProfile(const ProfileTable& table) {
  table.validate();
  const Index ns = table.costs.rows();

  // Ratios to the per-problem best; drop problems where every solver failed.
  std::vector<Vector> ratio_cols;
  for (Index p = 0; p < table.costs.cols(); ++p) {
    const double best = table.costs.col(p).minCoeff();
    if (!std::isfinite(best)) continue;
    ratio_cols.push_back(table.costs.col(p) / best);
  }
  if (ratio_cols.empty()) throw InvalidInput("profile: every problem failed on every solver");
  const double np = static_cast<double>(ratio_cols.size());

  std::set<double> breakpoints{1.0};
  for (const Vector& r : ratio_cols)
    for (Index s = 0; s < ns; ++s)
      if (std::isfinite(r(s))) breakpoints.insert(r(s));

  ProfileCurve curve;
  curve.solvers = table.solvers;
  curve.taus.assign(breakpoints.begin(), breakpoints.end());
  curve.rho.resize(static_cast<Index>(curve.taus.size()), ns);
  for (std::size_t t = 0; t < curve.taus.size(); ++t)
    for (Index s = 0; s < ns; ++s) {
      int count = 0;
      for (const Vector& r : ratio_cols)
        if (r(s) <= curve.taus[t]) ++count;
      curve.rho(static_cast<Index>(t), s) = static_cast<double>(count) / np;
    }
  return curve;
}

std::string formatProfile(const ProfileCurve& curve) {
  std::ostringstream out;
  out << "tau";
  for (const std::string& s : curve.solvers) out << "," << s;
  out << "\n";
  out.precision(12);
  for (std::size_t t = 0; t < curve.taus.size(); ++t) {
    out << curve.taus[t];
    for (Index s = 0; s < curve.rho.cols(); ++s)
      out << "," << curve.rho(static_cast<Index>(t), s);
    out << "\n";
  }
  return out.str();
}

}  // namespace nmsub
