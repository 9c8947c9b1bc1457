#include "nmsub/dataset.hpp"

#include "nmsub/keyval.hpp"
#include "nmsub/synthgen.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace nmsub;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("nmsub_test_" + std::to_string(std::rand()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("keyval parsing") {
  const KeyVal kv = KeyVal::parse("a = 1\n# comment\nsolver.x.sigma = 1e-4\nlist = a, b,c\n");
  CHECK(kv.getInt("a") == 1);
  CHECK(kv.getDouble("solver.x.sigma") == doctest::Approx(1e-4));
  CHECK(kv.getList("list") == std::vector<std::string>{"a", "b", "c"});
  CHECK(kv.getString("missing", "fallback") == "fallback");
  CHECK_THROWS_AS(kv.getString("missing"), InvalidInput);
  CHECK_THROWS_AS(KeyVal::parse("novalue\n"), InvalidInput);
  CHECK_THROWS_AS(kv.getInt("list"), InvalidInput);
}

TEST_CASE("dataset csv round trip with labels") {
  TempDir tmp;
  Rng rng(1);
  VmfClustersSpec spec;
  spec.l = 2;
  spec.n_per = 5;
  spec.ambient_dim = 4;
  spec.kappa = 9.0;
  LabeledDataset data = genVmfClusters(spec, rng);
  data.meta["seed"] = "1";
  const std::string path = tmp.file("sphere.csv");
  writeCsv(data, path);

  const LabeledDataset loaded = readCsv(path);
  CHECK(loaded.point_manifold.kind() == Manifold::Kind::Sphere);
  CHECK(loaded.size() == data.size());
  CHECK(loaded.labels == data.labels);
  for (int i = 0; i < data.size(); ++i)
    CHECK((loaded.points[static_cast<std::size_t>(i)] -
           data.points[static_cast<std::size_t>(i)])
              .norm() == 0.0);
}

TEST_CASE("stiefel dataset round trip keeps matrix shape") {
  TempDir tmp;
  Rng rng(2);
  FrameClustersSpec spec;
  spec.n = 5;
  spec.p = 2;
  spec.l = 2;
  spec.n_per = 3;
  LabeledDataset data = genFrameClusters(spec, rng);
  const std::string path = tmp.file("frames.csv");
  writeCsv(data, path);
  const LabeledDataset loaded = readCsv(path);
  CHECK(loaded.point_manifold.rows() == 5);
  CHECK(loaded.point_manifold.cols() == 2);
  CHECK((loaded.points[4] - data.points[4]).norm() == 0.0);
}

TEST_CASE("same seed produces identical csv bytes") {
  TempDir tmp;
  GaussianClustersSpec spec;
  spec.l = 2;
  spec.n_per = 4;
  spec.dim = 3;
  for (const char* name : {"a.csv", "b.csv"}) {
    Rng rng(77);
    writeCsv(genGaussianClusters(spec, rng), tmp.file(name));
  }
  std::ifstream fa(tmp.file("a.csv")), fb(tmp.file("b.csv"));
  std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(sa == sb);
}

TEST_CASE("plain csv with header and string labels") {
  TempDir tmp;
  const std::string path = tmp.file("plain.csv");
  {
    std::ofstream out(path);
    out << "f1,f2,tag\n1.0,2.0,red\n3.0,4.0,blue\n5.0,6.0,red\n";
  }
  const LabeledDataset data = readPlainCsv(path, "last");
  CHECK(data.size() == 3);
  CHECK(data.point_manifold.kind() == Manifold::Kind::Euclidean);
  CHECK(data.point_manifold.rows() == 2);
  CHECK(data.labels == std::vector<int>{0, 1, 0});
  CHECK(data.points[1](0) == 3.0);

  const LabeledDataset unlabeled = readPlainCsv(path, "none");
  CHECK_FALSE(unlabeled.hasLabels());
  CHECK(unlabeled.point_manifold.rows() == 3);
}

TEST_CASE("plain csv normalization lands on the sphere") {
  TempDir tmp;
  const std::string path = tmp.file("norm.csv");
  {
    std::ofstream out(path);
    out << "3.0,4.0\n1.0,0.0\n";
  }
  const LabeledDataset data = readPlainCsv(path, "none", true);
  CHECK(data.point_manifold.kind() == Manifold::Kind::Sphere);
  CHECK(data.points[0](0) == doctest::Approx(0.6));
  CHECK(data.points[0](1) == doctest::Approx(0.8));
}

TEST_CASE("dataset validation failures") {
  LabeledDataset data;
  data.point_manifold = Manifold::sphere(2);
  CHECK_THROWS_AS(data.validate(), InvalidInput);  // empty

  data.points.push_back(2.0 * Vector::Unit(2, 0));
  CHECK_THROWS_AS(data.validate(), InvalidInput);  // off manifold

  data.points[0] = Vector::Unit(2, 0);
  data.labels = {0, 1};
  CHECK_THROWS_AS(data.validate(), InvalidInput);  // label length mismatch

  TempDir tmp;
  CHECK_THROWS_AS(readCsv(tmp.file("missing.csv")), InvalidInput);
  const std::string ragged = tmp.file("ragged.csv");
  {
    std::ofstream out(ragged);
    out << "1.0,2.0\n3.0\n";
  }
  CHECK_THROWS_AS(readPlainCsv(ragged, "none"), InvalidInput);
}

TEST_CASE("stacked matrix mirrors the point list") {
  Rng rng(3);
  GaussianClustersSpec spec;
  spec.l = 2;
  spec.n_per = 3;
  spec.dim = 4;
  LabeledDataset data = genGaussianClusters(spec, rng);
  const Matrix& s = data.stacked();
  CHECK(s.rows() == 4);
  CHECK(s.cols() == 6);
  for (int j = 0; j < 6; ++j)
    CHECK((s.col(j) - data.points[static_cast<std::size_t>(j)].col(0)).norm() == 0.0);
}
