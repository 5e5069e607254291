#pragma once
// Image-plane rectangle algebra used by the occlusion model.

#include <optional>
#include <span>
#include <vector>

namespace percept {

/// Axis-aligned rectangle [u0, u1] x [v0, v1]. Empty when u1 <= u0 or v1 <= v0.
struct Rect {
  double u0 = 0.0;
  double v0 = 0.0;
  double u1 = 0.0;
  double v1 = 0.0;

  double area() const { return empty() ? 0.0 : (u1 - u0) * (v1 - v0); }
  bool empty() const { return !(u1 > u0) || !(v1 > v0); }
  bool contains(double u, double v) const { return u >= u0 && u <= u1 && v >= v0 && v <= v1; }
};

std::optional<Rect> intersect(const Rect& a, const Rect& b);

/// Exact area of a union of rectangles by coordinate sweep.
double union_area(std::span<const Rect> rects);

/// Image box plus the range of the box center, used to order occluders.
struct ImageBox {
  Rect rect;
  double depth = 0.0;
};

/// Fraction of `target` not covered by strictly nearer occluders.
/// A zero-area target is treated as invisible.
double occlusion_fraction(const ImageBox& target, std::span<const ImageBox> occluders);

/// General form: visible area of the target restricted to a window (a union
/// of disjoint rectangles, e.g. a field of view), divided by the full target
/// area. Occluders are used as given; depth ordering is the caller's job.
double visible_fraction(const Rect& target, std::span<const Rect> occluders, std::span<const Rect> window);

}  // namespace percept
