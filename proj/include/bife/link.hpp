#pragma once

#include <string>
#include <string_view>

namespace bife {

enum class LinkKind { Probit, Logit, Uniform };

/// Error distribution of the latent threshold: CDF G, density g, and g'.
class LinkFamily {
 public:
  static LinkFamily probit() { return LinkFamily(LinkKind::Probit, 0.0, 0.0); }
  static LinkFamily logit() { return LinkFamily(LinkKind::Logit, 0.0, 0.0); }
  /// Uniform on (lo, hi); defaults to (-0.5, 0.5).
  static LinkFamily uniform(double lo = -0.5, double hi = 0.5);

  /// "probit" | "logit" | "uniform" | "uniform:lo:hi".
  static LinkFamily parse(std::string_view spec);

  LinkKind kind() const { return kind_; }
  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }
  std::string name() const;

  double cdf(double z) const;
  /// 1 - cdf(z), evaluated without cancellation in the upper tail.
  double ccdf(double z) const;
  double pdf(double z) const;
  double pdf_deriv(double z) const;

 private:
  LinkFamily(LinkKind kind, double lo, double hi) : kind_(kind), lo_(lo), hi_(hi) {}

  LinkKind kind_;
  double lo_;
  double hi_;
};

}  // namespace bife
