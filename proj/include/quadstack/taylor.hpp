#pragma once

#include <array>
#include <cmath>

namespace quadstack {

// Scalar carrying its value and first four time derivatives. Arithmetic
// propagates derivatives exactly (Leibniz), which is what lets the trajectory
// generators hand out velocity through snap without any finite differencing.
class Jet {
 public:
  Jet() : d_{} {}
  explicit Jet(double value) : d_{} { d_[0] = value; }

  static Jet constant(double value) { return Jet(value); }

  double d(int k) const { return d_[size_t(k)]; }
  void set_d(int k, double v) { d_[size_t(k)] = v; }
  double value() const { return d_[0]; }

  friend Jet operator+(const Jet& a, const Jet& b) {
    Jet r;
    for (int n = 0; n <= 4; ++n) r.d_[n] = a.d_[n] + b.d_[n];
    return r;
  }
  friend Jet operator-(const Jet& a, const Jet& b) {
    Jet r;
    for (int n = 0; n <= 4; ++n) r.d_[n] = a.d_[n] - b.d_[n];
    return r;
  }
  friend Jet operator-(const Jet& a) {
    Jet r;
    for (int n = 0; n <= 4; ++n) r.d_[n] = -a.d_[n];
    return r;
  }
  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (int n = 0; n <= 4; ++n) {
      double acc = 0.0;
      for (int k = 0; k <= n; ++k) acc += binom(n, k) * a.d_[k] * b.d_[n - k];
      r.d_[n] = acc;
    }
    return r;
  }
  friend Jet operator/(const Jet& a, const Jet& b) {
    Jet r;
    for (int n = 0; n <= 4; ++n) {
      double acc = a.d_[n];
      for (int k = 1; k <= n; ++k) acc -= binom(n, k) * b.d_[k] * r.d_[n - k];
      r.d_[n] = acc / b.d_[0];
    }
    return r;
  }
  friend Jet operator+(double a, const Jet& b) { return Jet(a) + b; }
  friend Jet operator+(const Jet& a, double b) { return a + Jet(b); }
  friend Jet operator-(double a, const Jet& b) { return Jet(a) - b; }
  friend Jet operator-(const Jet& a, double b) { return a - Jet(b); }
  friend Jet operator*(double a, const Jet& b) {
    Jet r;
    for (int n = 0; n <= 4; ++n) r.d_[n] = a * b.d_[n];
    return r;
  }
  friend Jet operator*(const Jet& a, double b) { return b * a; }
  friend Jet operator/(const Jet& a, double b) { return (1.0 / b) * a; }

  // sin and cos must be advanced together: each order of one feeds the next
  // order of the other through s' = c f', c' = -s f'.
  friend void jet_sincos(const Jet& f, Jet& s, Jet& c) {
    s.d_[0] = std::sin(f.d_[0]);
    c.d_[0] = std::cos(f.d_[0]);
    for (int n = 1; n <= 4; ++n) {
      double sa = 0.0;
      double ca = 0.0;
      for (int k = 0; k <= n - 1; ++k) {
        const double b = binom(n - 1, k);
        sa += b * c.d_[k] * f.d_[n - k];
        ca += b * s.d_[k] * f.d_[n - k];
      }
      s.d_[n] = sa;
      c.d_[n] = -ca;
    }
  }

  friend Jet sqrt(const Jet& f) {
    Jet r;
    r.d_[0] = std::sqrt(f.d_[0]);
    for (int n = 1; n <= 4; ++n) {
      double acc = f.d_[n];
      for (int k = 1; k <= n - 1; ++k) acc -= binom(n, k) * r.d_[k] * r.d_[n - k];
      r.d_[n] = acc / (2.0 * r.d_[0]);
    }
    return r;
  }

 private:
  static double binom(int n, int k) {
    static constexpr double table[5][5] = {{1, 0, 0, 0, 0},
                                           {1, 1, 0, 0, 0},
                                           {1, 2, 1, 0, 0},
                                           {1, 3, 3, 1, 0},
                                           {1, 4, 6, 4, 1}};
    return table[n][k];
  }

  std::array<double, 5> d_;
};

}  // namespace quadstack
