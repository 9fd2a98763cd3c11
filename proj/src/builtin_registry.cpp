#include "retraction_kit/builtin.hpp"

#include <charconv>
#include <cmath>

namespace rkit {

namespace {

std::vector<double> parse_params(std::string_view text, std::string_view spec) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string_view token = text.substr(start, comma - start);
    double value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size() ||
        !std::isfinite(value))
      throw Error(ErrorCode::InvalidArgument,
                  "bad parameter '" + std::string(token) + "' in manifold '" + std::string(spec) + "'");
    out.push_back(value);
    start = comma + 1;
  }
  return out;
}

void expect_count(const std::vector<double>& p, std::size_t count, std::string_view spec) {
  if (p.size() != count)
    throw Error(ErrorCode::InvalidArgument, "manifold '" + std::string(spec) + "' expects " +
                                                std::to_string(count) + " parameter(s)");
}

Index as_index(double value, std::string_view spec) {
  if (value != std::floor(value) || value < 1 || value > 1e6)
    throw Error(ErrorCode::InvalidArgument,
                "manifold '" + std::string(spec) + "' expects integer parameters");
  return static_cast<Index>(value);
}

}  // namespace

template <typename Scalar>
ConstraintMap<Scalar> make_builtin(std::string_view spec) {
  const std::size_t colon = spec.find(':');
  const std::string_view name = spec.substr(0, colon);
  const auto p = parse_params(colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1), spec);

  if (name == "circle") {
    expect_count(p, 0, spec);
    return circle<Scalar>();
  }
  if (name == "sphere") {
    if (p.empty()) return sphere<Scalar>(3);
    expect_count(p, 1, spec);
    return sphere<Scalar>(as_index(p[0], spec));
  }
  if (name == "ellipse") {
    expect_count(p, 2, spec);
    return ellipse<Scalar>(Scalar(p[0]), Scalar(p[1]));
  }
  if (name == "ellipsoid") {
    expect_count(p, 3, spec);
    return ellipsoid<Scalar>(Scalar(p[0]), Scalar(p[1]), Scalar(p[2]));
  }
  if (name == "torus") {
    expect_count(p, 2, spec);
    return torus<Scalar>(Scalar(p[0]), Scalar(p[1]));
  }
  if (name == "ortho-columns" || name == "orthocolumns") {
    expect_count(p, 2, spec);
    return ortho_columns<Scalar>(as_index(p[0], spec), as_index(p[1], spec));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown manifold '" + std::string(name) + "'");
}

template ConstraintMap<double> make_builtin<double>(std::string_view);
template ConstraintMap<long double> make_builtin<long double>(std::string_view);

std::vector<std::string> builtin_names() {
  return {"circle", "sphere[:n]", "ellipse:a,b", "ellipsoid:a,b,c", "torus:R,r", "ortho-columns:n,p"};
}

}  // namespace rkit
