#pragma once

#include "retraction_kit/analysis.hpp"
#include "retraction_kit/builtin.hpp"

#include <initializer_list>

namespace rkit::testing {

inline Vec vec(std::initializer_list<double> values) {
  Vec out(static_cast<Index>(values.size()));
  Index i = 0;
  for (double v : values) out(i++) = v;
  return out;
}

inline Point point(const Manifold& F, std::initializer_list<double> x) { return Point::on(F, vec(x)); }

inline Tangent tangent(const Manifold& F, std::initializer_list<double> x, std::initializer_list<double> v) {
  return Tangent::at(F, point(F, x), vec(v));
}

//! Max-norm distance between two vectors.
inline double gap(const Vec& a, const Vec& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline std::vector<Manifold> all_builtins() {
  return {circle<double>(),          sphere<double>(3),        sphere<double>(5),
          ellipse<double>(2.0, 1.0), ellipsoid<double>(3.0, 2.0, 1.0), torus<double>(2.0, 0.5),
          ortho_columns<double>(3, 2), ortho_columns<double>(5, 2)};
}

}  // namespace rkit::testing
