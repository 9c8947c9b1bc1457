#include "nmsub/dataset.hpp"

#include "nmsub/geometry.hpp"
#include "nmsub/keyval.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace nmsub {

namespace {

std::string kindName(Manifold::Kind k) {
  switch (k) {
    case Manifold::Kind::Euclidean: return "euclidean";
    case Manifold::Kind::Sphere: return "sphere";
    case Manifold::Kind::Stiefel: return "stiefel";
    case Manifold::Kind::Grassmann: return "grassmann";
    case Manifold::Kind::Product: return "product";
  }
  return "?";
}

Manifold pointManifoldFromMeta(const KeyVal& meta) {
  const std::string kind = meta.getString("kind");
  const Index rows = meta.getInt("rows");
  const Index cols = meta.getInt("cols", 1);
  if (kind == "euclidean") return Manifold::euclidean(rows, cols);
  if (kind == "sphere") return Manifold::sphere(rows);
  if (kind == "stiefel") return Manifold::stiefel(rows, cols);
  if (kind == "grassmann") return Manifold::grassmann(rows, cols);
  throw InvalidInput("dataset metadata: unsupported kind: " + kind);
}

}  // namespace

int LabeledDataset::labelCount() const {
  int l = 0;
  for (int v : labels) l = std::max(l, v + 1);
  return l;
}

void LabeledDataset::validate(double membership_tol) const {
  if (points.empty()) throw InvalidInput("dataset " + name + ": empty");
  if (!labels.empty() && labels.size() != points.size())
    throw InvalidInput("dataset " + name + ": label count does not match point count");
  for (int v : labels)
    if (v < 0) throw InvalidInput("dataset " + name + ": negative label");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Blocks x{points[i]};
    if (!geometry::onManifold(point_manifold, x, membership_tol))
      throw InvalidInput("dataset " + name + ": point " + std::to_string(i) +
                         " fails the manifold membership check");
  }
}

const Matrix& LabeledDataset::stacked() const {
  if (stacked_.size() == 0 && !points.empty()) {
    const Index d = points.front().size();
    stacked_.resize(d, static_cast<Index>(points.size()));
    for (std::size_t j = 0; j < points.size(); ++j)
      stacked_.col(static_cast<Index>(j)) =
          Eigen::Map<const Vector>(points[j].data(), points[j].size());
  }
  return stacked_;
}

void writeCsv(const LabeledDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  out << std::setprecision(17);
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    const Matrix& p = data.points[i];
    bool first = true;
    for (Index r = 0; r < p.rows(); ++r)
      for (Index c = 0; c < p.cols(); ++c) {
        if (!first) out << ",";
        out << p(r, c);
        first = false;
      }
    if (data.hasLabels()) out << "," << data.labels[i];
    out << "\n";
  }

  KeyVal meta;
  meta.set("name", data.name);
  meta.set("kind", kindName(data.point_manifold.kind()));
  meta.set("rows", std::to_string(data.point_manifold.rows()));
  meta.set("cols", std::to_string(data.point_manifold.cols()));
  meta.set("has_labels", data.hasLabels() ? "true" : "false");
  meta.set("count", std::to_string(data.size()));
  for (const auto& [k, v] : data.meta) meta.set(k, v);
  meta.save(path + ".meta");
}

LabeledDataset readCsv(const std::string& path) {
  const KeyVal meta = KeyVal::load(path + ".meta");
  LabeledDataset data;
  data.name = meta.getString("name", path);
  data.point_manifold = pointManifoldFromMeta(meta);
  const bool has_labels = meta.getBool("has_labels", false);
  for (const auto& [k, v] : meta.entries()) data.meta[k] = v;

  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open dataset file: " + path);
  const Index rows = data.point_manifold.rows();
  const Index cols = data.point_manifold.cols();
  const Index coord_count = rows * cols;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ','))
      vals.push_back(std::stod(cell));
    const Index expected = coord_count + (has_labels ? 1 : 0);
    if (static_cast<Index>(vals.size()) != expected)
      throw InvalidInput(path + " line " + std::to_string(lineno) + ": expected " +
                         std::to_string(expected) + " fields, got " +
                         std::to_string(vals.size()));
    Matrix p(rows, cols);
    Index k = 0;
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) p(r, c) = vals[static_cast<std::size_t>(k++)];
    data.points.push_back(std::move(p));
    if (has_labels) data.labels.push_back(static_cast<int>(vals.back()));
  }
  data.validate();
  return data;
}

LabeledDataset readPlainCsv(const std::string& path, const std::string& labels,
                            bool normalize_rows) {
  if (labels != "last" && labels != "none")
    throw InvalidInput("readPlainCsv: labels must be 'last' or 'none'");
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open dataset file: " + path);

  std::vector<std::vector<std::string>> raw;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!cells.empty()) raw.push_back(std::move(cells));
  }
  if (raw.empty()) throw InvalidInput("empty dataset file: " + path);

  auto isNumber = [](const std::string& s) {
    double v;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    return r.ec == std::errc() && r.ptr == s.data() + s.size();
  };
  // Header row: skip if its leading cells are not numeric.
  std::size_t start = 0;
  if (!isNumber(raw[0][0])) start = 1;
  if (start >= raw.size()) throw InvalidInput("dataset has a header but no rows: " + path);

  const std::size_t ncols = raw[start].size();
  const std::size_t coord_cols = labels == "last" ? ncols - 1 : ncols;
  if (coord_cols == 0) throw InvalidInput("dataset has no coordinate columns: " + path);

  LabeledDataset data;
  data.name = path;
  std::map<std::string, int> label_ids;
  for (std::size_t i = start; i < raw.size(); ++i) {
    if (raw[i].size() != ncols)
      throw InvalidInput(path + ": ragged row " + std::to_string(i + 1));
    Matrix p(static_cast<Index>(coord_cols), 1);
    for (std::size_t c = 0; c < coord_cols; ++c) {
      if (!isNumber(raw[i][c]))
        throw InvalidInput(path + ": non-numeric value '" + raw[i][c] + "' in row " +
                           std::to_string(i + 1));
      p(static_cast<Index>(c), 0) = std::stod(raw[i][c]);
    }
    if (normalize_rows) {
      const double n = p.norm();
      if (n == 0.0) throw InvalidInput(path + ": zero row cannot be normalized");
      p /= n;
    }
    data.points.push_back(std::move(p));
    if (labels == "last") {
      const std::string& tag = raw[i].back();
      const auto it = label_ids.try_emplace(tag, static_cast<int>(label_ids.size())).first;
      data.labels.push_back(it->second);
    }
  }
  data.point_manifold = normalize_rows ? Manifold::sphere(static_cast<Index>(coord_cols))
                                       : Manifold::euclidean(static_cast<Index>(coord_cols));
  data.validate();
  return data;
}

}  // namespace nmsub
