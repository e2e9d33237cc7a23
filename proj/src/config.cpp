#include "drc/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace drc {

namespace {

std::string trim(std::string s) {
  s.erase(0, s.find_first_not_of(" \t\r"));
  s.erase(s.find_last_not_of(" \t\r") + 1);
  return s;
}

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out = "configuration errors:";
  for (const auto& p : problems) out += "\n  " + p;
  return out;
}

double to_double(const std::string& v) {
  std::size_t used = 0;
  const double d = std::stod(v, &used);
  if (used != v.size()) throw std::invalid_argument("trailing characters");
  return d;
}

std::size_t to_size(const std::string& v) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw std::invalid_argument("not a nonnegative integer");
  return out;
}

std::uint64_t to_u64(const std::string& v) { return static_cast<std::uint64_t>(to_size(v)); }

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw std::invalid_argument("not a boolean");
}

template <typename T, typename F>
std::vector<T> to_list(const std::string& v, F convert) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(static_cast<T>(convert(item)));
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string fmt(bool v) { return v ? "true" : "false"; }

template <typename T>
std::string fmt_list(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + std::to_string(xs[i]);
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"train.k", [](RunConfig& c, const std::string& v) { c.train.k = to_size(v); c.k_from_data = false; }},
      {"train.lr", [](RunConfig& c, const std::string& v) { c.train.lr = to_double(v); }},
      {"train.epochs", [](RunConfig& c, const std::string& v) { c.train.epochs = to_size(v); }},
      {"train.batch_size", [](RunConfig& c, const std::string& v) { c.train.batch_size = to_size(v); }},
      {"train.lambda", [](RunConfig& c, const std::string& v) { c.train.lambda = to_double(v); }},
      {"train.t_af", [](RunConfig& c, const std::string& v) { c.train.t_af = to_double(v); }},
      {"train.t_ap", [](RunConfig& c, const std::string& v) { c.train.t_ap = to_double(v); }},
      {"train.views_per_sample", [](RunConfig& c, const std::string& v) { c.train.views_per_sample = to_size(v); }},
      {"train.seed", [](RunConfig& c, const std::string& v) { c.train.seed = to_u64(v); }},
      {"train.beta1", [](RunConfig& c, const std::string& v) { c.train.beta1 = to_double(v); }},
      {"train.beta2", [](RunConfig& c, const std::string& v) { c.train.beta2 = to_double(v); }},
      {"train.eps", [](RunConfig& c, const std::string& v) { c.train.eps = to_double(v); }},
      {"train.normalize_af", [](RunConfig& c, const std::string& v) { c.train.normalize_af = to_bool(v); }},
      {"ablate.disable_af", [](RunConfig& c, const std::string& v) { c.train.disable_af = to_bool(v); }},
      {"ablate.disable_ap", [](RunConfig& c, const std::string& v) { c.train.disable_ap = to_bool(v); }},
      {"ablate.disable_cr", [](RunConfig& c, const std::string& v) { c.train.disable_cr = to_bool(v); }},
      {"augment.kind", [](RunConfig& c, const std::string& v) { c.augment.kind = parse_augment_kind(v); }},
      {"augment.noise_sigma", [](RunConfig& c, const std::string& v) { c.augment.noise_sigma = to_double(v); }},
      {"augment.relative_sigma", [](RunConfig& c, const std::string& v) { c.augment_relative_sigma = to_bool(v); }},
      {"augment.dropout_prob", [](RunConfig& c, const std::string& v) { c.augment.dropout_prob = to_double(v); }},
      {"augment.flip_prob", [](RunConfig& c, const std::string& v) { c.augment.flip_prob = to_double(v); }},
      {"augment.crop_padding", [](RunConfig& c, const std::string& v) { c.augment.crop_padding = to_size(v); }},
      {"augment.jitter_strength", [](RunConfig& c, const std::string& v) { c.augment.jitter_strength = to_double(v); }},
      {"augment.image_channels", [](RunConfig& c, const std::string& v) { c.augment.image_channels = to_size(v); }},
      {"augment.image_height", [](RunConfig& c, const std::string& v) { c.augment.image_height = to_size(v); }},
      {"augment.image_width", [](RunConfig& c, const std::string& v) { c.augment.image_width = to_size(v); }},
      {"augment.seed", [](RunConfig& c, const std::string& v) { c.augment.seed = to_u64(v); }},
      {"data.path", [](RunConfig& c, const std::string& v) { c.data.path = v; }},
      {"data.generator",
       [](RunConfig& c, const std::string& v) {
         if (v != "blobs" && v != "rings" && v != "cifar10" && !v.empty()) {
           throw std::invalid_argument("expected blobs, rings or cifar10");
         }
         c.data.generator = v;
       }},
      {"data.zscore", [](RunConfig& c, const std::string& v) { c.data.zscore = to_bool(v); }},
      {"data.k",
       [](RunConfig& c, const std::string& v) {
         c.data.blobs.k = to_size(v);
         c.data.rings.k = c.data.blobs.k;
       }},
      {"data.n_per",
       [](RunConfig& c, const std::string& v) {
         c.data.blobs.n_per = to_size(v);
         c.data.rings.n_per = c.data.blobs.n_per;
       }},
      {"data.d", [](RunConfig& c, const std::string& v) { c.data.blobs.d = to_size(v); }},
      {"data.center_spread", [](RunConfig& c, const std::string& v) { c.data.blobs.center_spread = to_double(v); }},
      {"data.sigma", [](RunConfig& c, const std::string& v) { c.data.blobs.sigma = to_double(v); }},
      {"data.radius_gap", [](RunConfig& c, const std::string& v) { c.data.rings.radius_gap = to_double(v); }},
      {"data.noise", [](RunConfig& c, const std::string& v) { c.data.rings.noise = to_double(v); }},
      {"data.seed",
       [](RunConfig& c, const std::string& v) {
         c.data.blobs.seed = to_u64(v);
         c.data.rings.seed = c.data.blobs.seed;
       }},
      {"data.cifar_dir", [](RunConfig& c, const std::string& v) { c.data.cifar_dir = v; }},
      {"data.classes", [](RunConfig& c, const std::string& v) { c.data.classes = to_list<int>(v, to_size); }},
      {"data.max_samples", [](RunConfig& c, const std::string& v) { c.data.max_samples = to_size(v); }},
      {"model.hidden", [](RunConfig& c, const std::string& v) { c.hidden = to_list<std::size_t>(v, to_size); }},
      {"run.trials", [](RunConfig& c, const std::string& v) { c.trials = to_size(v); }},
      {"run.out_dir", [](RunConfig& c, const std::string& v) { c.out_dir = v; }},
  };
  return table;
}

std::string canonical_key(const std::string& key) {
  if (key.find('.') != std::string::npos) return key;
  if (key.rfind("disable_", 0) == 0) return "ablate." + key;
  if (key == "trials") return "run.trials";
  if (key == "hidden") return "model.hidden";
  return "train." + key;
}

void check_invariants(const RunConfig& c, std::vector<std::string>& problems) {
  if (c.trials < 1) problems.push_back("run.trials must be >= 1");
  if (c.data.path.empty() && c.data.generator.empty()) {
    problems.push_back("one of data.path or data.generator is required");
  }
  if (c.data.generator == "cifar10" && c.data.cifar_dir.empty()) {
    problems.push_back("data.generator=cifar10 needs data.cifar_dir");
  }
  for (std::size_t h : c.hidden) {
    if (h == 0) problems.push_back("model.hidden sizes must be positive");
  }
  try {
    TrainConfig t = c.train;
    if (c.k_from_data) t.k = std::max<std::size_t>(t.k, 2);
    validate(t);
  } catch (const Error& e) {
    problems.push_back(e.what());
  }
  try {
    validate(c.augment);
  } catch (const Error& e) {
    problems.push_back(e.what());
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : ParameterError(join_problems(problems)), problems_(std::move(problems)) {}

void apply_setting(RunConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = canonical_key(trim(raw_key));
  const std::string value = trim(raw_value);
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError({"unknown key '" + key + "'"});
  try {
    it->second(cfg, value);
  } catch (const ParameterError& e) {
    throw ConfigError({key + ": " + e.what()});
  } catch (const std::exception&) {
    throw ConfigError({key + ": invalid value '" + value + "'"});
  }
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::vector<std::string> problems;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back("line " + std::to_string(line_no) + ": expected key=value");
      continue;
    }
    try {
      apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      for (const auto& p : e.problems()) problems.push_back("line " + std::to_string(line_no) + ": " + p);
    }
  }
  check_invariants(cfg, problems);
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::map<std::string, std::string> to_key_values(const RunConfig& c) {
  std::map<std::string, std::string> kv{
      {"train.lr", fmt(c.train.lr)},
      {"train.epochs", std::to_string(c.train.epochs)},
      {"train.batch_size", std::to_string(c.train.batch_size)},
      {"train.lambda", fmt(c.train.lambda)},
      {"train.t_af", fmt(c.train.t_af)},
      {"train.t_ap", fmt(c.train.t_ap)},
      {"train.views_per_sample", std::to_string(c.train.views_per_sample)},
      {"train.seed", std::to_string(c.train.seed)},
      {"train.beta1", fmt(c.train.beta1)},
      {"train.beta2", fmt(c.train.beta2)},
      {"train.eps", fmt(c.train.eps)},
      {"train.normalize_af", fmt(c.train.normalize_af)},
      {"ablate.disable_af", fmt(c.train.disable_af)},
      {"ablate.disable_ap", fmt(c.train.disable_ap)},
      {"ablate.disable_cr", fmt(c.train.disable_cr)},
      {"augment.kind", to_string(c.augment.kind)},
      {"augment.noise_sigma", fmt(c.augment.noise_sigma)},
      {"augment.relative_sigma", fmt(c.augment_relative_sigma)},
      {"augment.dropout_prob", fmt(c.augment.dropout_prob)},
      {"augment.flip_prob", fmt(c.augment.flip_prob)},
      {"augment.crop_padding", std::to_string(c.augment.crop_padding)},
      {"augment.jitter_strength", fmt(c.augment.jitter_strength)},
      {"augment.image_channels", std::to_string(c.augment.image_channels)},
      {"augment.image_height", std::to_string(c.augment.image_height)},
      {"augment.image_width", std::to_string(c.augment.image_width)},
      {"augment.seed", std::to_string(c.augment.seed)},
      {"data.path", c.data.path},
      {"data.generator", c.data.generator},
      {"data.zscore", fmt(c.data.zscore)},
      {"data.k", std::to_string(c.data.blobs.k)},
      {"data.n_per", std::to_string(c.data.blobs.n_per)},
      {"data.d", std::to_string(c.data.blobs.d)},
      {"data.center_spread", fmt(c.data.blobs.center_spread)},
      {"data.sigma", fmt(c.data.blobs.sigma)},
      {"data.radius_gap", fmt(c.data.rings.radius_gap)},
      {"data.noise", fmt(c.data.rings.noise)},
      {"data.seed", std::to_string(c.data.blobs.seed)},
      {"data.cifar_dir", c.data.cifar_dir},
      {"data.classes", fmt_list(c.data.classes)},
      {"data.max_samples", std::to_string(c.data.max_samples)},
      {"model.hidden", fmt_list(c.hidden)},
      {"run.trials", std::to_string(c.trials)},
      {"run.out_dir", c.out_dir},
  };
  if (!c.k_from_data) kv["train.k"] = std::to_string(c.train.k);
  return kv;
}

std::string format_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : to_key_values(cfg)) out += k + "=" + v + "\n";
  return out;
}

std::vector<std::size_t> layer_sizes(const RunConfig& cfg, std::size_t d) {
  std::vector<std::size_t> sizes{d};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(cfg.train.k);
  return sizes;
}

}  // namespace drc
