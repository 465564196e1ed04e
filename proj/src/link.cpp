#include "bife/link.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bife/error.hpp"

namespace bife {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double logistic_cdf(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logistic_pdf(double z) {
  const double e = std::exp(-std::abs(z));
  const double d = 1.0 + e;
  return e / (d * d);
}

double parse_double(const std::string& s, std::string_view spec) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error("bad link spec '" + std::string(spec) + "'");
  }
  if (used != s.size()) throw Error("bad link spec '" + std::string(spec) + "'");
  return v;
}

}  // namespace

LinkFamily LinkFamily::uniform(double lo, double hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw Error("uniform link needs finite lo < hi");
  return LinkFamily(LinkKind::Uniform, lo, hi);
}

LinkFamily LinkFamily::parse(std::string_view spec) {
  if (spec == "probit") return probit();
  if (spec == "logit") return logit();
  if (spec == "uniform") return uniform();
  if (spec.rfind("uniform:", 0) == 0) {
    const std::string rest(spec.substr(8));
    const auto colon = rest.find(':');
    if (colon == std::string::npos) throw Error("bad link spec '" + std::string(spec) + "'");
    return uniform(parse_double(rest.substr(0, colon), spec), parse_double(rest.substr(colon + 1), spec));
  }
  throw Error("unknown link '" + std::string(spec) + "' (expected probit, logit or uniform:lo:hi)");
}

std::string LinkFamily::name() const {
  switch (kind_) {
    case LinkKind::Probit:
      return "probit";
    case LinkKind::Logit:
      return "logit";
    case LinkKind::Uniform: {
      std::ostringstream os;
      os.precision(17);
      os << "uniform:" << lo_ << ":" << hi_;
      return os.str();
    }
  }
  return "?";
}

double LinkFamily::cdf(double z) const {
  switch (kind_) {
    case LinkKind::Probit:
      return 0.5 * std::erfc(-z * kInvSqrt2);
    case LinkKind::Logit:
      return logistic_cdf(z);
    case LinkKind::Uniform:
      if (z <= lo_) return 0.0;
      if (z >= hi_) return 1.0;
      return (z - lo_) / (hi_ - lo_);
  }
  return 0.0;
}

double LinkFamily::ccdf(double z) const {
  switch (kind_) {
    case LinkKind::Probit:
      return 0.5 * std::erfc(z * kInvSqrt2);
    case LinkKind::Logit:
      return logistic_cdf(-z);
    case LinkKind::Uniform:
      if (z <= lo_) return 1.0;
      if (z >= hi_) return 0.0;
      return (hi_ - z) / (hi_ - lo_);
  }
  return 0.0;
}

double LinkFamily::pdf(double z) const {
  switch (kind_) {
    case LinkKind::Probit:
      return kInvSqrt2Pi * std::exp(-0.5 * z * z);
    case LinkKind::Logit:
      return logistic_pdf(z);
    case LinkKind::Uniform:
      return (z > lo_ && z < hi_) ? 1.0 / (hi_ - lo_) : 0.0;
  }
  return 0.0;
}

double LinkFamily::pdf_deriv(double z) const {
  switch (kind_) {
    case LinkKind::Probit:
      return -z * pdf(z);
    case LinkKind::Logit: {
      // g' = g (1 - 2G) = g (G(-z) - G(z))
      return logistic_pdf(z) * (logistic_cdf(-z) - logistic_cdf(z));
    }
    case LinkKind::Uniform:
      return 0.0;
  }
  return 0.0;
}

}  // namespace bife
