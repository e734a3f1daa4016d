#include <bit>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "biorec/error.hpp"
#include "biorec/features.hpp"

namespace biorec {

namespace {

constexpr int kMaxPoints = 20;

struct Sample {
  int y0, x0;
  double w00, w01, w10, w11;  // bilinear weights for (y0,x0),(y0,x0+1),(y0+1,x0),(y0+1,x0+1)
};

double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < 1e-9 ? r : v;
}

std::vector<Sample> sampling_pattern(int points, int radius) {
  std::vector<Sample> pattern(static_cast<std::size_t>(points));
  for (int p = 0; p < points; ++p) {
    const double angle = 2.0 * std::numbers::pi * p / points;
    const double dx = snap(radius * std::cos(angle));
    const double dy = snap(-radius * std::sin(angle));
    const double fy = std::floor(dy);
    const double fx = std::floor(dx);
    const double ty = dy - fy;
    const double tx = dx - fx;
    pattern[static_cast<std::size_t>(p)] = {static_cast<int>(fy), static_cast<int>(fx),
                                            (1 - ty) * (1 - tx), (1 - ty) * tx, ty * (1 - tx),
                                            ty * tx};
  }
  return pattern;
}

double sample(const Image& img, int y, int x, const Sample& s) {
  const int y0 = y + s.y0;
  const int x0 = x + s.x0;
  double v = s.w00 * img(y0, x0);
  if (s.w01 != 0) v += s.w01 * img(y0, x0 + 1);
  if (s.w10 != 0) v += s.w10 * img(y0 + 1, x0);
  if (s.w11 != 0) v += s.w11 * img(y0 + 1, x0 + 1);
  return v;
}

std::uint32_t code_at(const Image& img, int y, int x, const std::vector<Sample>& pattern) {
  const double centre = img(y, x);
  std::uint32_t code = 0;
  for (std::size_t p = 0; p < pattern.size(); ++p)
    if (sample(img, y, x, pattern[p]) >= centre) code |= 1u << p;
  return code;
}

void check_points_radius(int points, int radius) {
  if (points < 4 || points > kMaxPoints)
    throw InvalidArgument(fmt::format("LBP points must lie in [4, {}], got {}", kMaxPoints, points));
  if (radius < 1) throw InvalidArgument(fmt::format("LBP radius must be >= 1, got {}", radius));
}

}  // namespace

void LbpConfig::validate() const {
  check_points_radius(points, radius);
  if (grid_y < 1 || grid_x < 1) throw InvalidArgument("LBP grid must be at least 1x1");
}

std::uint32_t lbp_code(const Image& image, int y, int x, int points, int radius) {
  check_points_radius(points, radius);
  if (y < radius || x < radius || y + radius >= image.rows() || x + radius >= image.cols())
    throw InvalidArgument(fmt::format("({}, {}) is not an interior pixel for radius {}", y, x,
                                      radius));
  return code_at(image, y, x, sampling_pattern(points, radius));
}

int lbp_transitions(std::uint32_t code, int points) {
  const std::uint32_t mask = points >= 32 ? ~0u : (1u << points) - 1u;
  const std::uint32_t rotated = ((code >> 1) | (code << (points - 1))) & mask;
  return std::popcount((code ^ rotated) & mask);
}

UniformLbpTable::UniformLbpTable(int points) {
  check_points_radius(points, 1);
  const std::uint32_t n = 1u << points;
  bins_.assign(n, 0);
  int next = 0;
  for (std::uint32_t code = 0; code < n; ++code)
    if (lbp_transitions(code, points) <= 2) bins_[code] = next++;
  for (std::uint32_t code = 0; code < n; ++code)
    if (lbp_transitions(code, points) > 2) bins_[code] = next;
  num_bins_ = next + 1;
}

Vector lbp_descriptor(const Image& image, const LbpConfig& cfg) {
  cfg.validate();
  const int r = cfg.radius;
  const int inner_h = static_cast<int>(image.rows()) - 2 * r;
  const int inner_w = static_cast<int>(image.cols()) - 2 * r;
  if (inner_h < cfg.grid_y || inner_w < cfg.grid_x)
    throw InvalidArgument(fmt::format("{}x{} image too small for LBP radius {} on a {}x{} grid",
                                      image.rows(), image.cols(), r, cfg.grid_y, cfg.grid_x));

  // Lookup tables are small except for large P; build once per point count.
  thread_local std::vector<std::pair<int, UniformLbpTable>> tables;
  const UniformLbpTable* table = nullptr;
  for (const auto& [p, t] : tables)
    if (p == cfg.points) table = &t;
  if (!table) table = &tables.emplace_back(cfg.points, UniformLbpTable(cfg.points)).second;

  const auto pattern = sampling_pattern(cfg.points, r);
  const int block_h = inner_h / cfg.grid_y;
  const int block_w = inner_w / cfg.grid_x;
  const int bins = cfg.bins_per_block();
  Vector out = Vector::Zero(cfg.descriptor_length());
  for (int y = r; y < r + inner_h; ++y) {
    const int by = std::min((y - r) / block_h, cfg.grid_y - 1);
    for (int x = r; x < r + inner_w; ++x) {
      const int bx = std::min((x - r) / block_w, cfg.grid_x - 1);
      const int bin = table->bin(code_at(image, y, x, pattern));
      out[(by * cfg.grid_x + bx) * bins + bin] += 1.0;
    }
  }
  return out;
}

std::string to_string(Channel c) {
  switch (c) {
    case Channel::raw: return "raw";
    case Channel::lbp: return "lbp";
    case Channel::hog: return "hog";
  }
  return "raw";
}

Channel channel_from_string(const std::string& name) {
  if (name == "raw") return Channel::raw;
  if (name == "lbp") return Channel::lbp;
  if (name == "hog") return Channel::hog;
  throw ConfigError(fmt::format("unknown channel '{}'", name));
}

}  // namespace biorec
