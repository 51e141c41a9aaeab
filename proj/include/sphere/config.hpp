#pragma once

#include <span>
#include <string>
#include <vector>

namespace sphere {

// Finitely supported probability measure on S^{d-1}: N unit-vector atoms
// with nonnegative weights summing to 1.  Points are stored row-major with
// stride d.
struct SphericalConfig {
  int d = 0;
  std::vector<double> points;   // N*d
  std::vector<double> weights;  // N

  int size() const { return static_cast<int>(weights.size()); }
  std::span<const double> point(int i) const { return {points.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)}; }
  std::span<double> point_mut(int i) { return {points.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)}; }

  // Throws std::domain_error if any invariant fails: unit norms within
  // 1e-12, weights >= 0 summing to 1 within 1e-12, N >= 1.
  void validate() const;

  static SphericalConfig create(int d, std::vector<double> points, std::vector<double> weights);
  static SphericalConfig equal_weights(int d, std::vector<double> points);

  // drops atoms with weight <= floor (keeps at least one atom)
  SphericalConfig without_zero_weights(double floor = 1e-14) const;
};

// Reference configurations with exact coordinates and equal weights.
// Names: onb, simplex, cross-polytope, ngon:k (d=2), icosahedron (d=3),
// cube (d=3).
SphericalConfig builtin_config(const std::string& name, int d);

// CSV (header x1,..,xd,weight) and JSON ({d, points, weights}) formats.
SphericalConfig load_config(const std::string& path_or_builtin);
void save_config_csv(const SphericalConfig& config, const std::string& path);
std::string config_to_json(const SphericalConfig& config);
SphericalConfig config_from_json(const std::string& json_text);

}  // namespace sphere
