#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "drc/data.hpp"
#include "drc/error.hpp"
#include "drc/metrics.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "drc_test_data";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<char> slurp(const fs::path& p) {
  std::vector<char> bytes(fs::file_size(p));
  std::ifstream(p, std::ios::binary).read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  return bytes;
}

void spit(const fs::path& p, const std::vector<char>& bytes) {
  std::ofstream(p, std::ios::binary | std::ios::trunc).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

bool same(const drc::Dataset& a, const drc::Dataset& b) {
  return a.x.shape() == b.x.shape() && std::equal(a.x.data().begin(), a.x.data().end(), b.x.data().begin()) &&
         a.y == b.y && a.k_true == b.k_true;
}

}  // namespace

TEST_CASE("blobs are deterministic, balanced and class-major") {
  drc::BlobsParams p;
  p.k = 3;
  p.n_per = 20;
  p.d = 4;
  p.seed = 5;
  const auto a = drc::gen_blobs(p);
  CHECK(same(a, drc::gen_blobs(p)));
  CHECK(a.size() == 60);
  CHECK(a.dim() == 4);
  CHECK(a.k_true == 3);
  for (std::size_t i = 0; i < 60; ++i) CHECK((*a.y)[i] == static_cast<int>(i / 20));
  p.seed = 6;
  CHECK_FALSE(same(a, drc::gen_blobs(p)));
}

TEST_CASE("zero-spread blobs sit on their centers") {
  drc::BlobsParams p;
  p.sigma = 0.0;
  p.n_per = 10;
  const auto ds = drc::gen_blobs(p);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const std::size_t first = (i / 10) * 10;
    for (std::size_t j = 0; j < ds.dim(); ++j) CHECK(ds.x(i, j) == ds.x(first, j));
  }
}

TEST_CASE("blob centers are at least six sigma apart") {
  drc::BlobsParams p;
  p.k = 8;
  p.n_per = 2000;
  p.d = 3;
  p.center_spread = 1.0;
  p.sigma = 0.2;
  const auto ds = drc::gen_blobs(p);
  std::vector<std::vector<double>> centroid(8, std::vector<double>(3, 0.0));
  for (std::size_t i = 0; i < ds.size(); ++i)
    for (std::size_t j = 0; j < 3; ++j) centroid[i / 2000][j] += ds.x(i, j) / 2000.0;
  // Sample centroids sit within a few hundredths of the true centers.
  for (std::size_t a = 0; a < 8; ++a)
    for (std::size_t b = a + 1; b < 8; ++b) {
      double d2 = 0;
      for (std::size_t j = 0; j < 3; ++j) d2 += std::pow(centroid[a][j] - centroid[b][j], 2);
      CHECK(std::sqrt(d2) >= 6 * 0.2 - 0.05);
    }
}

TEST_CASE("impossible blob geometry is reported") {
  drc::BlobsParams p;
  p.k = 10;
  p.d = 1;
  p.center_spread = 1.0;
  p.sigma = 1.0;
  CHECK_THROWS_AS(drc::gen_blobs(p), drc::GeometryError);
  p = {};
  p.k = 0;
  CHECK_THROWS_AS(drc::gen_blobs(p), drc::ParameterError);
}

TEST_CASE("default blobs are separable by a nearest-centroid oracle") {
  const auto ds = drc::gen_blobs(drc::BlobsParams{});
  CHECK(ds.size() == 2000);
  const auto pred = oracle::nearest_centroid(ds.x, *ds.y, 4);
  CHECK(drc::acc(pred, *ds.y, 4) >= 0.99);
}

TEST_CASE("rings") {
  drc::RingsParams p;
  p.noise = 0.0;
  p.n_per = 50;
  p.k = 3;
  p.radius_gap = 1.5;
  const auto ds = drc::gen_rings(p);
  CHECK(ds.size() == 150);
  CHECK(ds.dim() == 2);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double r = std::hypot(ds.x(i, 0), ds.x(i, 1));
    CHECK(r == doctest::Approx(1.5 * ((*ds.y)[i] + 1)).epsilon(1e-12));
  }
  CHECK(same(drc::gen_rings(p), ds));
}

TEST_CASE("rings defeat k-means on raw coordinates but not a radius threshold") {
  const auto ds = drc::gen_rings(drc::RingsParams{});
  const auto km = oracle::lloyd_kmeans(ds.x, 2, 10, 1, 0);
  CHECK(drc::acc(km, *ds.y, 2) < 0.8);
  std::vector<int> by_radius;
  for (std::size_t i = 0; i < ds.size(); ++i) by_radius.push_back(std::hypot(ds.x(i, 0), ds.x(i, 1)) > 1.5 ? 1 : 0);
  CHECK(drc::acc(by_radius, *ds.y, 2) == 1.0);
}

TEST_CASE("drcd layout and round trip") {
  CHECK(drc::kDrcdHeaderBytes == 29);
  drc::BlobsParams p;
  p.n_per = 7;
  p.d = 3;
  const auto ds = drc::gen_blobs(p);
  const auto path = scratch("blobs.drcd");
  drc::save_drcd(ds, path);
  CHECK(fs::file_size(path) == 29 + 28 * 3 * 8 + 28 * 4);
  const auto bytes = slurp(path);
  CHECK(std::string(bytes.data(), 4) == "DRCD");
  CHECK(bytes[4] == 1);
  CHECK(bytes[24] == 1);
  CHECK(bytes[25] == 4);
  CHECK(same(drc::load_drcd(path), ds));
  CHECK(same(drc::load_dataset(path), ds));

  drc::Dataset unlabeled = ds;
  unlabeled.y.reset();
  unlabeled.k_true = 0;
  drc::save_drcd(unlabeled, path);
  CHECK(fs::file_size(path) == 29 + 28 * 3 * 8);
  const auto back = drc::load_drcd(path);
  CHECK_FALSE(back.labeled());
  CHECK(back.k_true == 0);
}

TEST_CASE("drcd errors name what is wrong") {
  drc::BlobsParams p;
  p.n_per = 5;
  p.d = 2;
  const auto path = scratch("broken.drcd");
  drc::save_drcd(drc::gen_blobs(p), path);
  const auto bytes = slurp(path);
  const std::size_t full = bytes.size();

  spit(path, std::vector<char>(bytes.begin(), bytes.end() - 3));
  try {
    drc::load_drcd(path);
    FAIL("expected FormatError");
  } catch (const drc::FormatError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("expected " + std::to_string(full)) != std::string::npos);
    CHECK(msg.find(std::to_string(full - 3)) != std::string::npos);
  }

  auto magic = bytes;
  magic[1] = 'X';
  spit(path, magic);
  CHECK_THROWS_AS(drc::load_drcd(path), drc::FormatError);

  auto version = bytes;
  version[4] = 2;
  spit(path, version);
  try {
    drc::load_drcd(path);
    FAIL("expected FormatError");
  } catch (const drc::FormatError& e) {
    CHECK(std::string(e.what()).find("offset 4") != std::string::npos);
  }

  spit(path, std::vector<char>(bytes.begin(), bytes.begin() + 10));
  CHECK_THROWS_AS(drc::load_drcd(path), drc::FormatError);

  auto label = bytes;
  label[full - 4] = 9;
  spit(path, label);
  CHECK_THROWS_AS(drc::load_drcd(path), drc::FormatError);

  CHECK_THROWS_AS(drc::load_drcd(scratch("nope.drcd")), drc::IoError);
}

TEST_CASE("csv import") {
  const auto path = scratch("small.csv");
  std::ofstream(path) << "a,b,label\n1.5,2,0\n-3,4e-1,2\n\n0,0,1\n";
  const auto ds = drc::load_dataset(path);
  CHECK(ds.size() == 3);
  CHECK(ds.dim() == 2);
  CHECK(ds.x(1, 1) == 0.4);
  CHECK(*ds.y == std::vector<int>{0, 2, 1});
  CHECK(ds.k_true == 3);

  std::ofstream(path) << "a,b\n1,2\n3,4\n";
  const auto plain = drc::load_csv(path);
  CHECK_FALSE(plain.labeled());

  std::ofstream(path) << "a,b\n1,2\n3\n";
  CHECK_THROWS_AS(drc::load_csv(path), drc::FormatError);
  std::ofstream(path) << "a,b\n1,x\n";
  CHECK_THROWS_AS(drc::load_csv(path), drc::FormatError);
  std::ofstream(path) << "a,b\n";
  CHECK_THROWS_AS(drc::load_csv(path), drc::FormatError);
  std::ofstream(path) << "a,label\n1,-1\n";
  CHECK_THROWS_AS(drc::load_csv(path), drc::FormatError);
}

TEST_CASE("cifar binary checks record layout") {
  const auto dir = scratch("cifar");
  fs::create_directories(dir);
  std::vector<char> batch(3073 * 10000, 0);
  for (const char* name : {"data_batch_1.bin", "data_batch_2.bin", "data_batch_3.bin", "data_batch_4.bin",
                           "data_batch_5.bin", "test_batch.bin"}) {
    spit(dir / name, batch);
  }
  auto bad = batch;
  bad[3073 * 2] = 12;
  spit(dir / "data_batch_3.bin", bad);
  try {
    drc::load_cifar10_binary(dir);
    FAIL("expected FormatError");
  } catch (const drc::FormatError& e) {
    CHECK(std::string(e.what()).find("label byte 12") != std::string::npos);
  }
  spit(dir / "data_batch_3.bin", std::vector<char>(3073 * 10));
  CHECK_THROWS_AS(drc::load_cifar10_binary(dir), drc::FormatError);
  fs::remove_all(dir);
}

TEST_CASE("class subsets, feature std and z-scoring") {
  drc::BlobsParams p;
  p.k = 4;
  p.n_per = 10;
  p.d = 3;
  const auto ds = drc::gen_blobs(p);
  const auto sub = drc::subset_classes(ds, {3, 1}, 15);
  CHECK(sub.size() == 15);
  CHECK(sub.k_true == 2);
  for (std::size_t i = 0; i < 10; ++i) CHECK((*sub.y)[i] == 1);
  for (std::size_t i = 10; i < 15; ++i) CHECK((*sub.y)[i] == 0);
  CHECK(sub.x(0, 0) == ds.x(10, 0));

  const auto sd = drc::feature_std(drc::Tensor::from_rows({{1, 5}, {3, 5}}));
  CHECK(sd == std::vector<double>{1.0, 0.0});

  const auto z = drc::zscore(ds);
  const auto zsd = drc::feature_std(z.x);
  for (double v : zsd) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t j = 0; j < 3; ++j) {
    double m = 0;
    for (std::size_t i = 0; i < z.size(); ++i) m += z.x(i, j);
    CHECK(std::abs(m / z.size()) <= 1e-12);
  }
}

TEST_CASE("dataset validation") {
  drc::Dataset ds{drc::Tensor::zeros({2, 2}), std::vector<int>{0, 3}, 2, "bad"};
  CHECK_THROWS_AS(drc::validate(ds), drc::FormatError);
  ds.y = std::vector<int>{0};
  CHECK_THROWS_AS(drc::validate(ds), drc::FormatError);
}
