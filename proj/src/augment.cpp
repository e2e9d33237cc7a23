#include "drc/augment.hpp"

#include <cmath>
#include <numbers>

#include "drc/error.hpp"

namespace drc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct ImageGeometry {
  std::size_t channels, height, width;
};

ImageGeometry image_geometry(const AugmentSpec& spec, std::size_t d) {
  const std::size_t c = spec.image_channels;
  if (c == 0 || d % c != 0) {
    throw DimensionError("image_basic: feature count " + std::to_string(d) +
                         " is not divisible by " + std::to_string(c) + " channels");
  }
  const std::size_t plane = d / c;
  std::size_t h = spec.image_height, w = spec.image_width;
  if (h == 0 && w == 0) {
    h = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(plane))));
    w = h;
  } else if (h == 0) {
    h = plane / w;
  } else if (w == 0) {
    w = plane / h;
  }
  if (h == 0 || w == 0 || h * w != plane) {
    throw DimensionError("image_basic: feature count " + std::to_string(d) +
                         " does not factor as channels×height×width");
  }
  if (spec.crop_padding >= h || spec.crop_padding >= w) {
    throw DimensionError("image_basic: crop padding " + std::to_string(spec.crop_padding) +
                         " must be smaller than the image extents");
  }
  return {c, h, w};
}

// Mirror index without repeating the edge pixel.
std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  const auto len = static_cast<std::ptrdiff_t>(n);
  if (i < 0) i = -i;
  if (i >= len) i = 2 * len - 2 - i;
  return static_cast<std::size_t>(i);
}

void augment_image(std::span<const double> in, std::span<double> out, const ImageGeometry& g,
                   const AugmentSpec& spec, CounterRng& rng) {
  const bool flip = rng.uniform() < spec.flip_prob;
  const auto pad = static_cast<std::ptrdiff_t>(spec.crop_padding);
  std::ptrdiff_t oy = 0, ox = 0;
  if (pad > 0) {
    oy = static_cast<std::ptrdiff_t>(rng.next_u64() % static_cast<std::uint64_t>(2 * pad + 1)) - pad;
    ox = static_cast<std::ptrdiff_t>(rng.next_u64() % static_cast<std::uint64_t>(2 * pad + 1)) - pad;
  }
  for (std::size_t c = 0; c < g.channels; ++c) {
    const double gain =
        spec.jitter_strength > 0.0 ? 1.0 + spec.jitter_strength * (2.0 * rng.uniform() - 1.0) : 1.0;
    const std::size_t base = c * g.height * g.width;
    for (std::size_t y = 0; y < g.height; ++y) {
      const std::size_t sy = reflect(static_cast<std::ptrdiff_t>(y) + oy, g.height);
      for (std::size_t x = 0; x < g.width; ++x) {
        const std::size_t fx = flip ? g.width - 1 - x : x;
        const std::size_t sx = reflect(static_cast<std::ptrdiff_t>(fx) + ox, g.width);
        out[base + y * g.width + x] = gain * in[base + sy * g.width + sx];
      }
    }
  }
}

}  // namespace

std::string to_string(AugmentKind kind) {
  switch (kind) {
    case AugmentKind::gaussian_noise: return "gaussian_noise";
    case AugmentKind::feature_dropout: return "feature_dropout";
    case AugmentKind::image_basic: return "image_basic";
  }
  return "unknown";
}

AugmentKind parse_augment_kind(const std::string& name) {
  if (name == "gaussian_noise") return AugmentKind::gaussian_noise;
  if (name == "feature_dropout") return AugmentKind::feature_dropout;
  if (name == "image_basic") return AugmentKind::image_basic;
  throw ParameterError("unknown augmentation kind '" + name + "'");
}

void validate(const AugmentSpec& spec) {
  auto prob = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ParameterError(std::string(name) + " must lie in [0,1], got " + std::to_string(v));
    }
  };
  if (!(spec.noise_sigma >= 0.0)) throw ParameterError("noise_sigma must be >= 0");
  for (double s : spec.feature_scale) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ParameterError("feature_scale entries must be finite and >= 0");
  }
  prob(spec.dropout_prob, "dropout_prob");
  prob(spec.flip_prob, "flip_prob");
  prob(spec.jitter_strength, "jitter_strength");
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t step, std::uint64_t index)
    : key_(splitmix64(splitmix64(splitmix64(seed) ^ step) ^ index)) {}

std::uint64_t CounterRng::next_u64() { return splitmix64(key_ ^ splitmix64(counter_++)); }

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box–Muller; 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Tensor augment_batch(const Tensor& x, const AugmentSpec& spec, std::uint64_t step,
                     std::span<const std::size_t> indices) {
  validate(spec);
  const std::size_t n = x.rows(), d = x.cols();
  if (!indices.empty() && indices.size() != n) {
    throw DimensionError("augment_batch: " + std::to_string(indices.size()) + " indices for " +
                         std::to_string(n) + " rows");
  }
  if (spec.kind == AugmentKind::gaussian_noise && !spec.feature_scale.empty() &&
      spec.feature_scale.size() != d) {
    throw DimensionError("augment_batch: feature_scale has " + std::to_string(spec.feature_scale.size()) +
                         " entries for " + std::to_string(d) + " features");
  }
  ImageGeometry geometry{};
  if (spec.kind == AugmentKind::image_basic) geometry = image_geometry(spec, d);

  std::vector<double> out(x.data().begin(), x.data().end());
  for (std::size_t r = 0; r < n; ++r) {
    CounterRng rng(spec.seed, step, indices.empty() ? r : indices[r]);
    const auto in = x.row(r);
    std::span<double> dst(out.data() + r * d, d);
    switch (spec.kind) {
      case AugmentKind::gaussian_noise:
        for (std::size_t c = 0; c < d; ++c) {
          const double sigma = spec.noise_sigma * (spec.feature_scale.empty() ? 1.0 : spec.feature_scale[c]);
          dst[c] = in[c] + sigma * rng.normal();
        }
        break;
      case AugmentKind::feature_dropout: {
        const double keep = 1.0 - spec.dropout_prob;
        for (std::size_t c = 0; c < d; ++c) {
          const bool drop = rng.uniform() < spec.dropout_prob;
          dst[c] = drop ? 0.0 : in[c] / keep;
        }
        break;
      }
      case AugmentKind::image_basic:
        augment_image(in, dst, geometry, spec, rng);
        break;
    }
  }
  return Tensor(x.shape(), std::move(out));
}

}  // namespace drc
