#include "drc/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "binary_io.hpp"
#include "drc/error.hpp"

namespace drc {

namespace binio {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace binio

namespace {
constexpr std::uint32_t kDrcdVersion = 1;
}

void validate(const Dataset& ds) {
  if (!ds.x.defined() || ds.size() == 0 || ds.dim() == 0) {
    throw FormatError("dataset '" + ds.name + "' is empty");
  }
  if (!ds.y) return;
  if (ds.y->size() != ds.size()) {
    throw FormatError("dataset '" + ds.name + "' has " + std::to_string(ds.y->size()) +
                      " labels for " + std::to_string(ds.size()) + " rows");
  }
  for (std::size_t i = 0; i < ds.y->size(); ++i) {
    const int label = (*ds.y)[i];
    if (label < 0 || static_cast<std::size_t>(label) >= ds.k_true) {
      throw FormatError("dataset '" + ds.name + "': label " + std::to_string(label) + " at row " +
                        std::to_string(i) + " outside [0, " + std::to_string(ds.k_true) + ")");
    }
  }
}

Dataset gen_blobs(const BlobsParams& p) {
  if (p.k == 0 || p.n_per == 0 || p.d == 0 || !(p.center_spread > 0.0) || !(p.sigma >= 0.0)) {
    throw ParameterError("gen_blobs: k, n_per, d and center_spread must be positive and sigma >= 0");
  }
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> coord(-p.center_spread, p.center_spread);
  const double min_dist = 6.0 * p.sigma;

  std::vector<std::vector<double>> centers;
  int tries = 0;
  while (centers.size() < p.k) {
    if (++tries > 10000) {
      throw GeometryError("gen_blobs: could not place " + std::to_string(p.k) +
                          " centers 6σ apart within spread " + std::to_string(p.center_spread));
    }
    std::vector<double> c(p.d);
    for (double& v : c) v = coord(rng);
    const bool far = std::all_of(centers.begin(), centers.end(), [&](const std::vector<double>& o) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < p.d; ++j) d2 += (c[j] - o[j]) * (c[j] - o[j]);
      return std::sqrt(d2) >= min_dist;
    });
    if (far) centers.push_back(std::move(c));
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> x;
  x.reserve(p.k * p.n_per * p.d);
  std::vector<int> y;
  y.reserve(p.k * p.n_per);
  for (std::size_t c = 0; c < p.k; ++c) {
    for (std::size_t i = 0; i < p.n_per; ++i) {
      for (std::size_t j = 0; j < p.d; ++j) x.push_back(centers[c][j] + p.sigma * noise(rng));
      y.push_back(static_cast<int>(c));
    }
  }
  return Dataset{Tensor({p.k * p.n_per, p.d}, std::move(x)), std::move(y), p.k, "blobs"};
}

Dataset gen_rings(const RingsParams& p) {
  if (p.k == 0 || p.n_per == 0 || !(p.radius_gap > 0.0) || !(p.noise >= 0.0)) {
    throw ParameterError("gen_rings: k, n_per and radius_gap must be positive and noise >= 0");
  }
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> radial(0.0, 1.0);
  std::vector<double> x;
  std::vector<int> y;
  for (std::size_t c = 0; c < p.k; ++c) {
    const double radius = static_cast<double>(c + 1) * p.radius_gap;
    for (std::size_t i = 0; i < p.n_per; ++i) {
      const double a = angle(rng);
      const double r = radius + p.noise * radial(rng);
      x.push_back(r * std::cos(a));
      x.push_back(r * std::sin(a));
      y.push_back(static_cast<int>(c));
    }
  }
  return Dataset{Tensor({p.k * p.n_per, 2}, std::move(x)), std::move(y), p.k, "rings"};
}

void save_drcd(const Dataset& ds, const std::filesystem::path& path) {
  validate(ds);
  binio::Writer w;
  w.bytes("DRCD", 4);
  w.u32(kDrcdVersion);
  w.u64(ds.size());
  w.u64(ds.dim());
  w.u8(ds.labeled() ? 1 : 0);
  w.u32(ds.labeled() ? static_cast<std::uint32_t>(ds.k_true) : 0);
  for (double v : ds.x.data()) w.f64(v);
  if (ds.labeled()) {
    for (int label : *ds.y) w.i32(label);
  }
  binio::write_file(path.string(), w.buffer());
}

Dataset load_drcd(const std::filesystem::path& path) {
  const auto bytes = binio::read_file(path.string());
  const std::string what = "dataset " + path.string();
  binio::Reader r(bytes, what);
  r.magic("DRCD");
  const std::size_t version_at = r.offset();
  const std::uint32_t version = r.u32();
  if (version != kDrcdVersion) {
    throw FormatError(what + ": unsupported version " + std::to_string(version) + " at byte offset " +
                      std::to_string(version_at));
  }
  const std::uint64_t n = r.u64();
  const std::uint64_t d = r.u64();
  const std::uint8_t has_labels = r.u8();
  const std::uint32_t k_true = r.u32();
  if (n == 0 || d == 0) throw FormatError(what + ": zero extent in header");
  if (has_labels > 1) {
    throw FormatError(what + ": has_labels byte is " + std::to_string(has_labels) + " at byte offset 24");
  }
  const std::uint64_t expected = kDrcdHeaderBytes + n * d * 8 + (has_labels ? n * 4 : 0);
  if (bytes.size() != expected) {
    throw FormatError(what + ": expected " + std::to_string(expected) + " bytes, file has " +
                      std::to_string(bytes.size()));
  }
  std::vector<double> x(n * d);
  for (double& v : x) v = r.f64();
  Dataset ds{Tensor({n, d}, std::move(x)), std::nullopt, has_labels ? k_true : 0,
             path.stem().string()};
  if (has_labels) {
    std::vector<int> y(n);
    for (int& label : y) label = r.i32();
    ds.y = std::move(y);
  }
  validate(ds);
  return ds;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell.erase(0, cell.find_first_not_of(" \t\r"));
      cell.erase(cell.find_last_not_of(" \t\r") + 1);
      cells.push_back(cell);
    }
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": missing header row");
  const auto header = split(line);
  const bool labeled = !header.empty() && header.back() == "label";
  const std::size_t d = header.size() - (labeled ? 1 : 0);
  if (d == 0) throw FormatError(path.string() + ": no feature columns");

  std::vector<double> x;
  std::vector<int> y;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    ++row;
    if (cells.size() != header.size()) {
      throw FormatError(path.string() + ": line " + std::to_string(row + 1) + " has " +
                        std::to_string(cells.size()) + " columns, header has " +
                        std::to_string(header.size()));
    }
    try {
      for (std::size_t j = 0; j < d; ++j) x.push_back(std::stod(cells[j]));
      if (labeled) y.push_back(std::stoi(cells.back()));
    } catch (const std::logic_error&) {
      throw FormatError(path.string() + ": unparsable number on line " + std::to_string(row + 1));
    }
  }
  if (row == 0) throw FormatError(path.string() + ": no data rows");
  Dataset ds{Tensor({row, d}, std::move(x)), std::nullopt, 0, path.stem().string()};
  if (labeled) {
    ds.k_true = static_cast<std::size_t>(*std::max_element(y.begin(), y.end())) + 1;
    ds.y = std::move(y);
  }
  validate(ds);
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return load_csv(path);
  return load_drcd(path);
}

Dataset load_cifar10_binary(const std::filesystem::path& dir) {
  constexpr std::size_t kRecord = 3073, kPerFile = 10000, kPixels = 3072;
  const char* files[] = {"data_batch_1.bin", "data_batch_2.bin", "data_batch_3.bin",
                         "data_batch_4.bin", "data_batch_5.bin", "test_batch.bin"};
  std::vector<double> x;
  std::vector<int> y;
  for (const char* name : files) {
    const auto path = dir / name;
    const auto bytes = binio::read_file(path.string());
    if (bytes.size() != kRecord * kPerFile) {
      throw FormatError(path.string() + ": expected " + std::to_string(kPerFile) + " records of " +
                        std::to_string(kRecord) + " bytes, file has " + std::to_string(bytes.size()) +
                        " bytes");
    }
    for (std::size_t r = 0; r < kPerFile; ++r) {
      const std::uint8_t* rec = bytes.data() + r * kRecord;
      if (rec[0] > 9) {
        throw FormatError(path.string() + ": label byte " + std::to_string(rec[0]) + " at byte offset " +
                          std::to_string(r * kRecord));
      }
      y.push_back(rec[0]);
      for (std::size_t j = 0; j < kPixels; ++j) x.push_back(rec[1 + j] / 255.0);
    }
  }
  const std::size_t n = y.size();
  return Dataset{Tensor({n, kPixels}, std::move(x)), std::move(y), 10, "cifar10"};
}

Dataset subset_classes(const Dataset& ds, const std::vector<int>& classes, std::size_t max_total) {
  if (!ds.labeled()) throw ParameterError("subset_classes needs a labeled dataset");
  std::vector<double> x;
  std::vector<int> y;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto it = std::find(classes.begin(), classes.end(), (*ds.y)[i]);
    if (it == classes.end()) continue;
    const auto row = ds.x.row(i);
    x.insert(x.end(), row.begin(), row.end());
    y.push_back(static_cast<int>(it - classes.begin()));
    if (max_total && y.size() == max_total) break;
  }
  if (y.empty()) throw ParameterError("subset_classes selected no samples");
  const std::size_t n = y.size();
  return Dataset{Tensor({n, ds.dim()}, std::move(x)), std::move(y), classes.size(), ds.name + "-subset"};
}

std::vector<double> feature_std(const Tensor& x) {
  const std::size_t n = x.rows(), d = x.cols();
  std::vector<double> mean(d, 0.0), var(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j);
  }
  for (double& m : mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) var[j] += (x(i, j) - mean[j]) * (x(i, j) - mean[j]);
  }
  for (double& v : var) v = std::sqrt(v / static_cast<double>(n));
  return var;
}

Dataset zscore(const Dataset& ds) {
  const std::size_t n = ds.size(), d = ds.dim();
  const auto sd = feature_std(ds.x);
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += ds.x(i, j);
  }
  for (double& m : mean) m /= static_cast<double>(n);
  std::vector<double> x(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) x[i * d + j] = sd[j] > 0.0 ? (ds.x(i, j) - mean[j]) / sd[j] : 0.0;
  }
  Dataset out = ds;
  out.x = Tensor(ds.x.shape(), std::move(x));
  return out;
}

}  // namespace drc
