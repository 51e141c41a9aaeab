#include "sphere/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nlohmann/json.hpp"
#include "sphere/common.hpp"

namespace sphere {

void SphericalConfig::validate() const {
  if (d < 2) throw std::domain_error("config: d must be >= 2");
  if (weights.empty()) throw std::domain_error("config: need at least one atom");
  if (points.size() != weights.size() * static_cast<std::size_t>(d))
    throw std::domain_error("config: points/weights size mismatch");
  double mass = 0.0;
  for (int i = 0; i < size(); ++i) {
    if (weights[i] < -kWeightTol)
      throw std::domain_error("config: negative weight at atom " + std::to_string(i));
    mass += weights[i];
    const double n = norm(point(i));
    if (std::fabs(n - 1.0) > kUnitTol)
      throw std::domain_error("config: atom " + std::to_string(i) + " is not a unit vector (|x| = " +
                              std::to_string(n) + ")");
  }
  if (std::fabs(mass - 1.0) > kWeightTol)
    throw std::domain_error("config: weights sum to " + std::to_string(mass) + ", expected 1");
}

SphericalConfig SphericalConfig::create(int d, std::vector<double> points,
                                        std::vector<double> weights) {
  SphericalConfig c{d, std::move(points), std::move(weights)};
  c.validate();
  return c;
}

SphericalConfig SphericalConfig::equal_weights(int d, std::vector<double> points) {
  const std::size_t n = points.size() / static_cast<std::size_t>(d);
  return create(d, std::move(points), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

SphericalConfig SphericalConfig::without_zero_weights(double floor) const {
  SphericalConfig out;
  out.d = d;
  for (int i = 0; i < size(); ++i) {
    if (weights[i] > floor) {
      out.weights.push_back(weights[i]);
      const auto p = point(i);
      out.points.insert(out.points.end(), p.begin(), p.end());
    }
  }
  if (out.weights.empty()) {
    // keep the heaviest atom rather than returning an empty measure
    int best = 0;
    for (int i = 1; i < size(); ++i)
      if (weights[i] > weights[best]) best = i;
    const auto p = point(best);
    out.points.assign(p.begin(), p.end());
    out.weights.assign(1, weights[best]);
  }
  double mass = 0.0;
  for (double w : out.weights) mass += w;
  for (double& w : out.weights) w /= mass;
  return out;
}

namespace {

SphericalConfig make_onb(int d) {
  std::vector<double> pts(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) pts[static_cast<std::size_t>(i) * d + i] = 1.0;
  return SphericalConfig::equal_weights(d, std::move(pts));
}

SphericalConfig make_cross_polytope(int d) {
  std::vector<double> pts(static_cast<std::size_t>(2 * d) * d, 0.0);
  for (int i = 0; i < d; ++i) {
    pts[static_cast<std::size_t>(2 * i) * d + i] = 1.0;
    pts[static_cast<std::size_t>(2 * i + 1) * d + i] = -1.0;
  }
  return SphericalConfig::equal_weights(d, std::move(pts));
}

// Regular simplex via the Helmert basis of the hyperplane 1^perp in R^{d+1}:
// vertex i has coordinates sqrt((d+1)/d) * h_k[i], pairwise Gram -1/d.
SphericalConfig make_simplex(int d) {
  const int n = d + 1;
  std::vector<double> pts(static_cast<std::size_t>(n) * d, 0.0);
  const double scale = std::sqrt((d + 1.0) / d);
  for (int i = 0; i < n; ++i) {
    for (int k = 1; k <= d; ++k) {
      double h;
      const double denom = std::sqrt(static_cast<double>(k) * (k + 1.0));
      if (i < k)
        h = 1.0 / denom;
      else if (i == k)
        h = -static_cast<double>(k) / denom;
      else
        h = 0.0;
      pts[static_cast<std::size_t>(i) * d + (k - 1)] = scale * h;
    }
  }
  return SphericalConfig::equal_weights(d, std::move(pts));
}

SphericalConfig make_ngon(int k) {
  if (k < 2) throw std::domain_error("builtin ngon:k needs k >= 2");
  std::vector<double> pts;
  pts.reserve(2 * static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const double a = 2.0 * M_PI * i / k;
    pts.push_back(std::cos(a));
    pts.push_back(std::sin(a));
  }
  return SphericalConfig::equal_weights(2, std::move(pts));
}

SphericalConfig make_icosahedron() {
  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  const double s = 1.0 / std::sqrt(1.0 + phi * phi);
  std::vector<double> pts;
  for (double a : {1.0, -1.0})
    for (double b : {phi, -phi}) {
      pts.insert(pts.end(), {0.0, a * s, b * s});
      pts.insert(pts.end(), {a * s, b * s, 0.0});
      pts.insert(pts.end(), {b * s, 0.0, a * s});
    }
  return SphericalConfig::equal_weights(3, std::move(pts));
}

SphericalConfig make_cube() {
  const double s = 1.0 / std::sqrt(3.0);
  std::vector<double> pts;
  for (double x : {s, -s})
    for (double y : {s, -s})
      for (double z : {s, -s}) pts.insert(pts.end(), {x, y, z});
  return SphericalConfig::equal_weights(3, std::move(pts));
}

}  // namespace

SphericalConfig builtin_config(const std::string& name, int d) {
  if (name == "onb") return make_onb(d);
  if (name == "simplex") return make_simplex(d);
  if (name == "cross-polytope") return make_cross_polytope(d);
  if (name.rfind("ngon:", 0) == 0) {
    if (d != 2) throw std::domain_error("builtin ngon requires d = 2");
    return make_ngon(std::stoi(name.substr(5)));
  }
  if (name == "icosahedron") {
    if (d != 3) throw std::domain_error("builtin icosahedron requires d = 3");
    return make_icosahedron();
  }
  if (name == "cube") {
    if (d != 3) throw std::domain_error("builtin cube requires d = 3");
    return make_cube();
  }
  throw std::domain_error("unknown builtin config '" + name + "'");
}

SphericalConfig load_config(const std::string& path_or_builtin) {
  if (path_or_builtin.rfind("builtin:", 0) == 0) {
    const std::string name = path_or_builtin.substr(8);
    // infer d for the named families that pin it
    int d = 3;
    if (name.rfind("ngon:", 0) == 0) d = 2;
    return builtin_config(name, d);
  }
  std::ifstream in(path_or_builtin);
  if (!in) throw std::domain_error("config: cannot open '" + path_or_builtin + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return config_from_json(text);

  // CSV with header x1,...,xd,weight
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) throw std::domain_error("config: empty file");
  int cols = 1;
  for (char c : line)
    if (c == ',') ++cols;
  const int d = cols - 1;
  std::vector<double> pts, ws;
  while (std::getline(ss, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream row(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
    if (static_cast<int>(vals.size()) != cols)
      throw std::domain_error("config: row with wrong column count");
    for (int i = 0; i < d; ++i) pts.push_back(vals[i]);
    ws.push_back(vals.back());
  }
  return SphericalConfig::create(d, std::move(pts), std::move(ws));
}

void save_config_csv(const SphericalConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write '" + path + "'");
  out.precision(17);
  for (int i = 0; i < config.d; ++i) out << "x" << (i + 1) << ",";
  out << "weight\n";
  for (int i = 0; i < config.size(); ++i) {
    for (double x : config.point(i)) out << x << ",";
    out << config.weights[i] << "\n";
  }
}

std::string config_to_json(const SphericalConfig& config) {
  nlohmann::json j;
  j["d"] = config.d;
  auto pts = nlohmann::json::array();
  for (int i = 0; i < config.size(); ++i) {
    const auto p = config.point(i);
    pts.push_back(std::vector<double>(p.begin(), p.end()));
  }
  j["points"] = std::move(pts);
  j["weights"] = config.weights;
  return j.dump();
}

SphericalConfig config_from_json(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  const int d = j.at("d").get<int>();
  std::vector<double> pts;
  for (const auto& row : j.at("points")) {
    const auto v = row.get<std::vector<double>>();
    if (static_cast<int>(v.size()) != d) throw std::domain_error("config json: point of wrong dimension");
    pts.insert(pts.end(), v.begin(), v.end());
  }
  return SphericalConfig::create(d, std::move(pts), j.at("weights").get<std::vector<double>>());
}

}  // namespace sphere
