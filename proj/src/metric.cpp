#include "lshir/metric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lshir {

Metric parse_metric(std::string_view name) {
  if (name == "cosine") return Metric::cosine;
  if (name == "euclidean") return Metric::euclidean;
  throw std::invalid_argument("unknown metric '" + std::string(name) + "'");
}

std::string_view to_string(Metric metric) noexcept {
  return metric == Metric::cosine ? "cosine" : "euclidean";
}

double dot(std::span<const float> a, std::span<const float> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

double euclidean_distance(std::span<const float> a, std::span<const float> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double cosine_distance(std::span<const float> a, std::span<const float> b) noexcept {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    ab += x * y;
    aa += x * x;
    bb += y * y;
  }
  if (aa == 0.0 || bb == 0.0) return 1.0;
  // sqrt(aa * aa) == aa exactly, so identical inputs give exactly 0.
  const double c = std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
  return 1.0 - c;
}

double distance(Metric metric, std::span<const float> a, std::span<const float> b) noexcept {
  return metric == Metric::cosine ? cosine_distance(a, b) : euclidean_distance(a, b);
}

}  // namespace lshir
