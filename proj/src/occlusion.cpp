#include "percept/occlusion.hpp"

#include <algorithm>
#include <utility>

namespace percept {

std::optional<Rect> intersect(const Rect& a, const Rect& b) {
  Rect r{std::max(a.u0, b.u0), std::max(a.v0, b.v0), std::min(a.u1, b.u1), std::min(a.v1, b.v1)};
  if (r.empty()) return std::nullopt;
  return r;
}

double union_area(std::span<const Rect> rects) {
  std::vector<double> xs;
  xs.reserve(rects.size() * 2);
  for (const auto& r : rects) {
    if (r.empty()) continue;
    xs.push_back(r.u0);
    xs.push_back(r.u1);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  double area = 0.0;
  std::vector<std::pair<double, double>> spans;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double a = xs[i];
    const double b = xs[i + 1];
    spans.clear();
    for (const auto& r : rects) {
      if (!r.empty() && r.u0 <= a && r.u1 >= b) spans.emplace_back(r.v0, r.v1);
    }
    if (spans.empty()) continue;
    std::sort(spans.begin(), spans.end());
    double covered = 0.0;
    double lo = spans.front().first;
    double hi = spans.front().second;
    for (const auto& [s0, s1] : spans) {
      if (s0 > hi) {
        covered += hi - lo;
        lo = s0;
        hi = s1;
      } else {
        hi = std::max(hi, s1);
      }
    }
    covered += hi - lo;
    area += covered * (b - a);
  }
  return area;
}

double visible_fraction(const Rect& target, std::span<const Rect> occluders, std::span<const Rect> window) {
  const double total = target.area();
  if (!(total > 0.0)) return 0.0;

  std::vector<Rect> in_window;
  for (const auto& w : window) {
    if (auto r = intersect(target, w)) in_window.push_back(*r);
  }
  double visible = 0.0;
  for (const auto& r : in_window) visible += r.area();  // window pieces are disjoint
  if (visible <= 0.0) return 0.0;

  std::vector<Rect> covered;
  for (const auto& piece : in_window) {
    for (const auto& o : occluders) {
      if (auto r = intersect(piece, o)) covered.push_back(*r);
    }
  }
  visible -= union_area(covered);
  return std::clamp(visible / total, 0.0, 1.0);
}

double occlusion_fraction(const ImageBox& target, std::span<const ImageBox> occluders) {
  std::vector<Rect> nearer;
  for (const auto& o : occluders) {
    if (o.depth < target.depth) nearer.push_back(o.rect);
  }
  const Rect window[] = {target.rect};
  return visible_fraction(target.rect, nearer, window);
}

}  // namespace percept
