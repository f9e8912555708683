#pragma once

#include <span>
#include <string>
#include <string_view>

namespace lshir {

enum class Metric { cosine, euclidean };

Metric parse_metric(std::string_view name);
std::string_view to_string(Metric metric) noexcept;

/// Dot product accumulated in double, left to right.
double dot(std::span<const float> a, std::span<const float> b) noexcept;

double euclidean_distance(std::span<const float> a, std::span<const float> b) noexcept;

/// 1 - cos(a, b), in [0, 2]. Defined as 1 when either vector is zero.
/// Exactly 0 for a vector against itself and exactly 2 against its negation.
double cosine_distance(std::span<const float> a, std::span<const float> b) noexcept;

double distance(Metric metric, std::span<const float> a, std::span<const float> b) noexcept;

}  // namespace lshir
