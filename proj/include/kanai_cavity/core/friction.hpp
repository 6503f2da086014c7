#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "kanai_cavity/error.hpp"

namespace kanai_cavity {

/// Value of the friction law and its rate at one round-trip number.
struct FrictionSample {
  double g = 0.0;
  double gdot = 0.0;
};

/// g(n) = gamma * n.
struct ConstantFriction {
  double gamma = 0.0;
};

/// Monotone piecewise-cubic (Fritsch-Carlson) interpolant through samples of
/// g at increasing n. The first sample must sit at n = 0 with g = 0.
class TabulatedFriction {
 public:
  TabulatedFriction(std::vector<double> n, std::vector<double> g)
      : n_(std::move(n)), g_(std::move(g)) {
    if (n_.size() != g_.size()) {
      throw ValidationError("friction table: column lengths differ");
    }
    if (n_.size() < 2) {
      throw ValidationError("friction table: need at least two samples");
    }
    for (std::size_t i = 0; i < n_.size(); ++i) {
      if (!std::isfinite(n_[i]) || !std::isfinite(g_[i])) {
        throw ValidationError("friction table: non-finite entry");
      }
      if (i > 0 && !(n_[i] > n_[i - 1])) {
        throw ValidationError("friction table: n must be strictly increasing");
      }
      if (i > 0 && g_[i] < g_[i - 1]) {
        throw ValidationError("friction table: g must be nondecreasing");
      }
    }
    if (n_.front() != 0.0) {
      throw ValidationError("friction table: first sample must be at n = 0");
    }
    if (std::abs(g_.front()) > 1e-12) {
      throw ValidationError("friction table: g(0) must be 0");
    }
    build_slopes();
  }

  double n_min() const { return n_.front(); }
  double n_max() const { return n_.back(); }
  const std::vector<double>& nodes() const { return n_; }
  const std::vector<double>& values() const { return g_; }

  FrictionSample operator()(double n) const {
    if (!(n >= n_.front() && n <= n_.back())) {
      throw DomainError("friction table does not cover n = " + std::to_string(n));
    }
    auto it = std::upper_bound(n_.begin(), n_.end(), n);
    std::size_t i = it == n_.begin() ? 0 : static_cast<std::size_t>(it - n_.begin()) - 1;
    if (i >= n_.size() - 1) i = n_.size() - 2;

    const double h = n_[i + 1] - n_[i];
    const double t = (n - n_[i]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    const double g = h00 * g_[i] + h10 * h * d_[i] + h01 * g_[i + 1] + h11 * h * d_[i + 1];

    const double dh00 = (6 * t2 - 6 * t) / h;
    const double dh10 = 3 * t2 - 4 * t + 1;
    const double dh01 = (-6 * t2 + 6 * t) / h;
    const double dh11 = 3 * t2 - 2 * t;
    const double gdot = dh00 * g_[i] + dh10 * d_[i] + dh01 * g_[i + 1] + dh11 * d_[i + 1];
    return {g, gdot};
  }

 private:
  void build_slopes() {
    const std::size_t m = n_.size();
    std::vector<double> delta(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) {
      delta[i] = (g_[i + 1] - g_[i]) / (n_[i + 1] - n_[i]);
    }
    d_.assign(m, 0.0);
    if (m == 2) {
      d_[0] = d_[1] = delta[0];
      return;
    }
    for (std::size_t i = 1; i + 1 < m; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) {
        d_[i] = 0.0;
      } else {
        // weighted harmonic mean
        const double h0 = n_[i] - n_[i - 1];
        const double h1 = n_[i + 1] - n_[i];
        const double w1 = 2 * h1 + h0;
        const double w2 = h1 + 2 * h0;
        d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
      }
    }
    d_[0] = endpoint_slope(n_[1] - n_[0], n_[2] - n_[1], delta[0], delta[1]);
    d_[m - 1] = endpoint_slope(n_[m - 1] - n_[m - 2], n_[m - 2] - n_[m - 3], delta[m - 2],
                               delta[m - 3]);
  }

  // Three-point one-sided estimate with the usual shape-preserving clamps.
  static double endpoint_slope(double h0, double h1, double m0, double m1) {
    double d = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (d * m0 <= 0.0) return 0.0;
    if (m0 * m1 <= 0.0 && std::abs(d) > std::abs(3 * m0)) return 3 * m0;
    return d;
  }

  std::vector<double> n_;
  std::vector<double> g_;
  std::vector<double> d_;
};

/// Damping law g(n), with n the (continuous) round-trip number.
class FrictionProfile {
 public:
  static FrictionProfile constant(double gamma) {
    if (!std::isfinite(gamma) || gamma < 0.0) {
      throw ValidationError("friction: gamma must be finite and >= 0");
    }
    return FrictionProfile(ConstantFriction{gamma});
  }

  static FrictionProfile tabulated(std::vector<double> n, std::vector<double> g) {
    return FrictionProfile(TabulatedFriction(std::move(n), std::move(g)));
  }

  bool is_constant() const { return std::holds_alternative<ConstantFriction>(kind_); }

  /// Only meaningful when is_constant().
  double gamma() const {
    if (const auto* c = std::get_if<ConstantFriction>(&kind_)) return c->gamma;
    throw ValidationError("friction: gamma requested from a tabulated profile");
  }

  const TabulatedFriction* table() const { return std::get_if<TabulatedFriction>(&kind_); }

  /// Upper end of the evaluation domain (infinite for constant friction).
  double n_max() const {
    if (const auto* t = table()) return t->n_max();
    return std::numeric_limits<double>::infinity();
  }

  FrictionSample operator()(double n) const {
    if (!(n >= 0.0)) throw DomainError("friction: n must be >= 0");
    return std::visit(
        [n](const auto& k) -> FrictionSample {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, ConstantFriction>) {
            return {k.gamma * n, k.gamma};
          } else {
            return k(n);
          }
        },
        kind_);
  }

  double g(double n) const { return (*this)(n).g; }

 private:
  explicit FrictionProfile(std::variant<ConstantFriction, TabulatedFriction> k)
      : kind_(std::move(k)) {}

  std::variant<ConstantFriction, TabulatedFriction> kind_;
};

inline FrictionSample eval_friction(const FrictionProfile& profile, double n) {
  return profile(n);
}

/// Parses a two-column "n,g" CSV (header row required).
inline FrictionProfile parse_friction_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("friction csv: empty input");
  auto strip = [](std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); }),
            s.end());
    return s;
  };
  if (strip(line) != "n,g") {
    throw ValidationError("friction csv: header must be \"n,g\"");
  }
  std::vector<double> ns;
  std::vector<double> gs;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = strip(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw ValidationError("friction csv: row " + std::to_string(row) + " needs two columns");
    }
    try {
      std::size_t pos = 0;
      const std::string a = line.substr(0, comma);
      const std::string b = line.substr(comma + 1);
      ns.push_back(std::stod(a, &pos));
      if (pos != a.size()) throw std::invalid_argument(a);
      gs.push_back(std::stod(b, &pos));
      if (pos != b.size()) throw std::invalid_argument(b);
    } catch (const std::logic_error&) {
      throw ValidationError("friction csv: unparsable number on row " + std::to_string(row));
    }
  }
  return FrictionProfile::tabulated(std::move(ns), std::move(gs));
}

inline FrictionProfile load_friction_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("friction csv: cannot open " + path);
  return parse_friction_csv(in);
}

}  // namespace kanai_cavity
