#pragma once

// Implicit surface fields. Every field is negative inside the enclosed
// region, zero on the surface and positive outside.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "paraclip/core_math.hpp"
#include "paraclip/errors.hpp"
#include "paraclip/frame.hpp"
#include "paraclip/jet.hpp"

namespace paraclip {

struct FieldSample {
  double value = 0.0;
  Vec3 gradient;
  Mat3 hessian;
};

class LevelSetField {
 public:
  virtual ~LevelSetField() = default;

  virtual FieldSample sample(const Vec3& x) const = 0;
  virtual double value(const Vec3& x) const { return sample(x).value; }
  virtual Vec3 gradient(const Vec3& x) const { return sample(x).gradient; }
  Mat3 hessian(const Vec3& x) const { return sample(x).hessian; }

  /// Closed-form enclosed volume, when the surface is closed and has one.
  virtual std::optional<double> enclosed_volume() const { return std::nullopt; }
};

inline double exact_enclosed_volume(const LevelSetField& field) {
  if (auto v = field.enclosed_volume()) return *v;
  throw ParameterError("no closed-form volume");
}

// ---------------------------------------------------------------------------

/// Distance form |x - c| - R.
class SphereField final : public LevelSetField {
 public:
  SphereField(const Vec3& center, double radius) : center_(center), radius_(radius) {
    if (!(radius > 0.0)) throw ParameterError("sphere radius must be positive");
  }

  double radius() const { return radius_; }
  const Vec3& center() const { return center_; }

  double value(const Vec3& x) const override { return norm(x - center_) - radius_; }

  FieldSample sample(const Vec3& x) const override {
    const Vec3 d = x - center_;
    const double r = norm(d);
    if (r == 0.0) throw NumericalError("singular evaluation point");
    const Vec3 n = d / r;
    return {r - radius_, n, (Mat3::identity() - outer(n, n)) * (1.0 / r)};
  }

  std::optional<double> enclosed_volume() const override {
    return 4.0 * std::numbers::pi * radius_ * radius_ * radius_ / 3.0;
  }

 private:
  Vec3 center_;
  double radius_;
};

/// sum ((x_i - c_i) / a_i)^2 - 1
class EllipsoidField final : public LevelSetField {
 public:
  EllipsoidField(const Vec3& center, double a, double b, double c) : center_(center), axes_{a, b, c} {
    if (!(a > 0.0 && b > 0.0 && c > 0.0)) throw ParameterError("ellipsoid semiaxes must be positive");
  }

  double value(const Vec3& x) const override {
    double s = -1.0;
    for (int i = 0; i < 3; ++i) {
      const double q = (x[i] - center_[i]) / axes_[i];
      s += q * q;
    }
    return s;
  }

  FieldSample sample(const Vec3& x) const override {
    FieldSample out;
    out.value = value(x);
    for (int i = 0; i < 3; ++i) {
      const double inv = 1.0 / (axes_[i] * axes_[i]);
      out.gradient[i] = 2.0 * (x[i] - center_[i]) * inv;
      out.hessian(i, i) = 2.0 * inv;
    }
    return out;
  }

  std::optional<double> enclosed_volume() const override {
    return 4.0 * std::numbers::pi * axes_[0] * axes_[1] * axes_[2] / 3.0;
  }

 private:
  Vec3 center_;
  std::array<double, 3> axes_;
};

/// <n, x> - d with a unit normal n.
class PlaneField final : public LevelSetField {
 public:
  PlaneField(const Vec3& normal, double offset) : offset_(offset) {
    const double nn = norm(normal);
    if (!(nn > 0.0)) throw ParameterError("plane normal must be nonzero");
    normal_ = normal / nn;
    offset_ = offset / nn;
  }

  const Vec3& normal() const { return normal_; }
  double offset() const { return offset_; }

  double value(const Vec3& x) const override { return dot(normal_, x) - offset_; }
  FieldSample sample(const Vec3& x) const override { return {value(x), normal_, Mat3{}}; }

 private:
  Vec3 normal_;
  double offset_;
};

/// Distance to the z-parallel axis through c, minus R.
class CylinderField final : public LevelSetField {
 public:
  CylinderField(const Vec3& center, double radius) : center_(center), radius_(radius) {
    if (!(radius > 0.0)) throw ParameterError("cylinder radius must be positive");
  }

  double value(const Vec3& x) const override { return std::hypot(x.x - center_.x, x.y - center_.y) - radius_; }

  FieldSample sample(const Vec3& x) const override {
    const Vec3 d{x.x - center_.x, x.y - center_.y, 0.0};
    const double r = norm(d);
    if (r == 0.0) throw NumericalError("singular evaluation point");
    const Vec3 n = d / r;
    Mat3 h = Mat3::diagonal(1.0, 1.0, 0.0) - outer(n, n);
    return {r - radius_, n, h * (1.0 / r)};
  }

 private:
  Vec3 center_;
  double radius_;
};

/// The paraboloid of a frame, as a field.
class ParaboloidField final : public LevelSetField {
 public:
  explicit ParaboloidField(const ParaboloidFrame& frame) : frame_(frame) {}

  const ParaboloidFrame& frame() const { return frame_; }

  double value(const Vec3& x) const override { return frame_.value(x); }
  FieldSample sample(const Vec3& x) const override {
    return {frame_.value(x), frame_.gradient(x), frame_.hessian()};
  }

 private:
  ParaboloidFrame frame_;
};

// ---------------------------------------------------------------------------
// Perturbed sphere
// ---------------------------------------------------------------------------

/// SplitMix64 stream; next_unit() yields values in the open interval (0, 1).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double next_unit() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Index of (l, m) in a coefficient vector ordered by l, then m = -l..l.
constexpr std::size_t harmonic_index(int l, int m) { return static_cast<std::size_t>(l * l + l + m); }

/// Normalization of the real tesseral harmonic of degree l and order |m|.
inline double harmonic_norm(int l, int m) {
  const int am = std::abs(m);
  double ratio = 1.0;  // (l-|m|)! / (l+|m|)!
  for (int k = l - am + 1; k <= l + am; ++k) ratio /= k;
  double n = std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi) * ratio);
  if (m != 0) n *= std::numbers::sqrt2;
  return n;
}

/// lambda(x) = r^3 - sum_lm c_lm Y_lm(x / r), r = |x - center|. The harmonics
/// are orthonormal real harmonics without the Condon-Shortley phase, evaluated
/// in Cartesian form so that derivatives follow from automatic
/// differentiation without any polar singularity.
class PerturbedSphereField final : public LevelSetField {
 public:
  PerturbedSphereField(const Vec3& center, int max_order, std::vector<double> coefficients)
      : center_(center), order_(max_order), coeffs_(std::move(coefficients)) {
    if (max_order < 0) throw ParameterError("harmonic order must be non-negative");
    if (coeffs_.size() != static_cast<std::size_t>((max_order + 1) * (max_order + 1)))
      throw ParameterError("perturbed sphere: coefficient count must be (L+1)^2");
    if (!(coeffs_[0] > 0.0)) throw ParameterError("perturbed sphere: c00 must be positive");
    norms_.resize(coeffs_.size());
    for (int l = 0; l <= order_; ++l)
      for (int m = -l; m <= l; ++m) norms_[harmonic_index(l, m)] = harmonic_norm(l, m);
  }

  int max_order() const { return order_; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  const Vec3& center() const { return center_; }

  FieldSample sample(const Vec3& x) const override {
    const Jet j = evaluate(x);
    return {j.v, j.g, j.h};
  }

  /// At the centre itself only the angular mean -c00 Y00 is meaningful; it is
  /// enough to classify a mesh vertex sitting there.
  double value(const Vec3& x) const override {
    const Vec3 d = x - center_;
    if (dot(d, d) == 0.0) return -coeffs_[0] / (2.0 * std::sqrt(std::numbers::pi));
    return evaluate(x).v;
  }

  std::optional<double> enclosed_volume() const override {
    return coeffs_[0] * std::sqrt(4.0 * std::numbers::pi) / 3.0;
  }

  /// Real harmonic Y_lm at a unit direction (plain values, used by tests).
  static double harmonic(int l, int m, const Vec3& dir) {
    const Vec3 u = normalized(dir);
    const int am = std::abs(m);
    double c = 1.0, s = 0.0;
    for (int k = 0; k < am; ++k) {
      const double cn = c * u.x - s * u.y;
      s = c * u.y + s * u.x;
      c = cn;
    }
    double q_prev = 0.0;
    double q = 1.0;
    for (int k = 1; k <= am; ++k) q *= (2.0 * k - 1.0);
    if (l > am) {
      q_prev = q;
      q = u.z * (2.0 * am + 1.0) * q_prev;
      for (int k = am + 2; k <= l; ++k) {
        const double qn = ((2.0 * k - 1.0) * u.z * q - (k + am - 1.0) * q_prev) / (k - am);
        q_prev = q;
        q = qn;
      }
    }
    const double azimuth = m > 0 ? c : (m < 0 ? s : 1.0);
    return harmonic_norm(l, m) * q * azimuth;
  }

 private:
  Jet evaluate(const Vec3& x) const {
    const Vec3 d = x - center_;
    const double r2 = dot(d, d);
    if (r2 == 0.0) throw NumericalError("singular evaluation point");
    const Jet jx = Jet::variable(0, d.x);
    const Jet jy = Jet::variable(1, d.y);
    const Jet jz = Jet::variable(2, d.z);
    const Jet r = sqrt(jx * jx + jy * jy + jz * jz);
    const Jet inv_r = reciprocal(r);
    const Jet ux = jx * inv_r;
    const Jet uy = jy * inv_r;
    const Jet uz = jz * inv_r;

    Jet sum = r * r * r;

    // cos/sin of m*phi times sin^m(theta): real and imaginary parts of (ux + i uy)^m.
    Jet c_m(1.0);
    Jet s_m(0.0);
    double qmm = 1.0;  // (2m-1)!!
    for (int m = 0; m <= order_; ++m) {
      if (m > 0) {
        const Jet cn = c_m * ux - s_m * uy;
        s_m = c_m * uy + s_m * ux;
        c_m = cn;
        qmm *= (2.0 * m - 1.0);
      }
      // Q_l^m for l = m..L via the three-term recurrence.
      Jet q_prev;
      Jet q(qmm);
      for (int l = m; l <= order_; ++l) {
        if (l == m + 1) {
          q_prev = q;
          q = uz * ((2.0 * m + 1.0) * qmm);
        } else if (l > m + 1) {
          Jet qn = (uz * q * (2.0 * l - 1.0) - q_prev * (l + m - 1.0)) * (1.0 / (l - m));
          q_prev = q;
          q = std::move(qn);
        }
        if (m == 0) {
          const double c = coeffs_[harmonic_index(l, 0)] * norms_[harmonic_index(l, 0)];
          if (c != 0.0) sum -= q * c;
        } else {
          const double cp = coeffs_[harmonic_index(l, m)] * norms_[harmonic_index(l, m)];
          const double cn = coeffs_[harmonic_index(l, -m)] * norms_[harmonic_index(l, -m)];
          if (cp != 0.0 || cn != 0.0) sum -= q * (c_m * cp + s_m * cn);
        }
      }
    }
    return sum;
  }

  Vec3 center_;
  int order_;
  std::vector<double> coeffs_;
  std::vector<double> norms_;
};

/// Random coefficients: c00 = sqrt(4 pi) R0^3 and, for l > 0, Box-Muller
/// samples sqrt(var) sqrt(-2 ln g1) cos(2 pi g2). The stream draws g1 then g2
/// for each (l, m), l ascending and m from -l to l.
inline std::vector<double> sample_perturbed_sphere_coefficients(double r0, int max_order, double variance,
                                                                std::uint64_t seed) {
  if (!(r0 > 0.0)) throw ParameterError("perturbed sphere: radius must be positive");
  if (max_order < 0) throw ParameterError("perturbed sphere: order must be non-negative");
  if (!(variance >= 0.0)) throw ParameterError("perturbed sphere: variance must be non-negative");
  std::vector<double> c(static_cast<std::size_t>((max_order + 1) * (max_order + 1)), 0.0);
  c[0] = std::sqrt(4.0 * std::numbers::pi) * r0 * r0 * r0;
  SplitMix64 rng(seed);
  const double amp = std::sqrt(variance);
  for (int l = 1; l <= max_order; ++l) {
    for (int m = -l; m <= l; ++m) {
      const double g1 = rng.next_unit();
      const double g2 = rng.next_unit();
      c[harmonic_index(l, m)] = amp * std::sqrt(-2.0 * std::log(g1)) * std::cos(2.0 * std::numbers::pi * g2);
    }
  }
  return c;
}

inline PerturbedSphereField sample_perturbed_sphere(double r0, int max_order, double variance, std::uint64_t seed,
                                                    const Vec3& center = {}) {
  return PerturbedSphereField(center, max_order, sample_perturbed_sphere_coefficients(r0, max_order, variance, seed));
}

// ---------------------------------------------------------------------------
// Descriptor strings: "kind:key=value,key=value"
// ---------------------------------------------------------------------------

struct Descriptor {
  std::string kind;
  std::map<std::string, std::string, std::less<>> params;

  bool has(std::string_view key) const { return params.find(key) != params.end(); }

  double number(std::string_view key) const {
    auto it = params.find(key);
    if (it == params.end()) throw ParseError("descriptor '" + kind + "': missing parameter '" + std::string(key) + "'");
    return parse_number(it->second, key);
  }
  double number(std::string_view key, double fallback) const { return has(key) ? number(key) : fallback; }

  long long integer(std::string_view key) const {
    const double v = number(key);
    if (v != std::floor(v)) throw ParseError("descriptor '" + kind + "': parameter '" + std::string(key) + "' must be an integer");
    return static_cast<long long>(v);
  }
  long long integer(std::string_view key, long long fallback) const { return has(key) ? integer(key) : fallback; }

 private:
  double parse_number(const std::string& text, std::string_view key) const {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
      throw ParseError("descriptor '" + kind + "': parameter '" + std::string(key) + "' is not a number: '" + text + "'");
    return v;
  }
};

/// Splits "kind:k1=v1,k2=v2". A bare "kind" has no parameters.
inline Descriptor parse_descriptor(std::string_view text) {
  Descriptor d;
  const auto colon = text.find(':');
  d.kind = std::string(text.substr(0, colon));
  if (d.kind.empty()) throw ParseError("empty descriptor");
  if (colon == std::string_view::npos) return d;
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw ParseError("descriptor '" + d.kind + "': expected key=value, got '" + std::string(item) + "'");
    d.params.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return d;
}

/// Builds a field from a surface descriptor:
///   sphere:r=0.8            ellipsoid:a=0.75,b=0.5,c=0.25
///   psphere:r=0.8,L=3,var=5e-4,seed=1
///   plane:nx=0,ny=0,nz=1,d=0.3          cylinder:r=0.5
/// Every kind accepts an optional center cx,cy,cz (plane excepted).
inline std::shared_ptr<const LevelSetField> make_surface(std::string_view text) {
  const Descriptor d = parse_descriptor(text);
  const Vec3 c{d.number("cx", 0.0), d.number("cy", 0.0), d.number("cz", 0.0)};
  if (d.kind == "sphere") return std::make_shared<SphereField>(c, d.number("r"));
  if (d.kind == "ellipsoid")
    return std::make_shared<EllipsoidField>(c, d.number("a"), d.number("b"), d.number("c"));
  if (d.kind == "psphere") {
    const long long seed = d.integer("seed", 1);
    if (seed < 0) throw ParseError("descriptor 'psphere': seed must be non-negative");
    return std::make_shared<PerturbedSphereField>(sample_perturbed_sphere(
        d.number("r"), static_cast<int>(d.integer("L")), d.number("var"), static_cast<std::uint64_t>(seed), c));
  }
  if (d.kind == "plane")
    return std::make_shared<PlaneField>(Vec3{d.number("nx"), d.number("ny"), d.number("nz")}, d.number("d", 0.0));
  if (d.kind == "cylinder") return std::make_shared<CylinderField>(c, d.number("r"));
  throw ParseError("unknown surface kind '" + d.kind + "'");
}

}  // namespace paraclip
