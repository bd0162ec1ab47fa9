#include "quadstack/generators.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "quadstack/taylor.hpp"

namespace quadstack {
namespace {

// Planar curve parameterized by an angle theta with a 2*pi period:
// position (x, y) and the parametric speed sigma = ||d(x,y)/d theta||.
// All three are evaluated in jet arithmetic so time derivatives of theta
// propagate through to position derivatives.
struct Curve {
  std::function<void(const Jet& theta, Jet& x, Jet& y)> position;
  std::function<Jet(const Jet& theta)> sigma;
  // Follow the path tangent with the nose instead of holding heading.
  bool heading_yaw{false};
};

Curve make_circle(double radius) {
  Curve c;
  c.position = [radius](const Jet& th, Jet& x, Jet& y) {
    Jet s, co;
    jet_sincos(th, s, co);
    x = radius * co;
    y = radius * s;
  };
  c.sigma = [radius](const Jet&) { return Jet::constant(radius); };
  return c;
}

Curve make_lemniscate(double amp) {
  Curve c;
  c.position = [amp](const Jet& th, Jet& x, Jet& y) {
    Jet s, co;
    jet_sincos(th, s, co);
    const Jet den = 1.0 + s * s;
    x = amp * co / den;
    y = amp * s * co / den;
  };
  c.sigma = [amp](const Jet& th) {
    Jet s, co;
    jet_sincos(th, s, co);
    const Jet s2 = s * s;
    const Jet den = 1.0 + s2;
    const Jet xp = (-amp) * s * (3.0 - s2) / (den * den);
    // dy/dtheta in double angles: 2A(3 cos 2th - 1)/(3 - cos 2th)^2
    const Jet c2 = 1.0 - 2.0 * s2;
    const Jet den2 = 3.0 - c2;
    const Jet yp = (2.0 * amp) * (3.0 * c2 - 1.0) / (den2 * den2);
    return sqrt(xp * xp + yp * yp);
  };
  // Heading-hold through the 70-degree banked tips needs more yaw torque
  // than the rotors can produce differentially, so the nose tracks the path.
  c.heading_yaw = true;
  return c;
}

// Jet whose k-th derivative is the (k+1)-th of the argument, i.e. the
// derivative of a with respect to a's own variable. Loses the top order.
Jet jet_deriv(const Jet& a) {
  Jet r;
  for (int k = 0; k < 4; ++k) r.set_d(k, a.d(k + 1));
  return r;
}

// Speed profile: constant cruise speed with optional cosine ramps at both
// ends. C1 in time; the jet carries the analytic derivatives of each piece.
struct SpeedProfile {
  double cruise{0.0};
  double ramp{0.0};
  double duration{0.0};

  Jet at(double t) const {
    Jet v;
    if (ramp > 0.0 && t < ramp) {
      fill_ramp(v, t, 1.0);
    } else if (ramp > 0.0 && t > duration - ramp) {
      fill_ramp(v, duration - t, -1.0);
    } else {
      v.set_d(0, cruise);
    }
    return v;
  }

 private:
  // v(u) = cruise (1 - cos(pi u / ramp)) / 2 evaluated at u, with du/dt = sign.
  void fill_ramp(Jet& v, double u, double sign) const {
    const double k = M_PI / ramp;
    const double su = std::sin(k * u);
    const double cu = std::cos(k * u);
    const double h = 0.5 * cruise;
    v.set_d(0, h * (1.0 - cu));
    v.set_d(1, sign * h * k * su);
    v.set_d(2, h * k * k * cu);
    v.set_d(3, -sign * h * k * k * k * su);
    v.set_d(4, -h * k * k * k * k * cu);
  }
};

double arc_length_per_lap(const Curve& curve) {
  // Composite Simpson over one period.
  const int n = 20000;  // even
  const double h = 2.0 * M_PI / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * curve.sigma(Jet::constant(i * h)).value();
  }
  return acc * h / 3.0;
}

// Promote theta(t0) to a full jet using theta' = speed(t)/sigma(theta).
// Each pass extends the number of correct derivatives by at least one.
Jet theta_jet(const Curve& curve, const Jet& speed, double theta0) {
  Jet th = Jet::constant(theta0);
  for (int pass = 0; pass < 4; ++pass) {
    const Jet g = speed / curve.sigma(th);
    for (int n = 0; n < 4; ++n) th.set_d(n + 1, g.d(n));
  }
  return th;
}

SampledTrajectory generate_parametric(const Curve& curve, const Vec2& center,
                                      double z, double speed, int laps,
                                      double ramp_time,
                                      const QuadrotorModel& model) {
  if (!(speed > 0.0)) throw std::invalid_argument("trajectory: speed must be positive");
  if (laps < 1) throw std::invalid_argument("trajectory: laps must be >= 1");
  if (ramp_time < 0.0) throw std::invalid_argument("trajectory: negative ramp time");
  model.validate();

  const double total_arc = laps * arc_length_per_lap(curve);
  if (ramp_time > 0.0 && speed * ramp_time > total_arc)
    throw std::invalid_argument("trajectory: ramps longer than the path");
  // Each cosine ramp covers cruise*ramp/2 of distance, so the two ramps
  // together cost one extra ramp_time over flying everything at cruise.
  const double duration =
      ramp_time > 0.0 ? total_arc / speed + ramp_time : total_arc / speed;

  SpeedProfile profile{speed, ramp_time, duration};

  SampledTrajectory traj;
  const double dt = 1.0 / kTrajectorySampleRate;
  const int n_sub = 8;  // ODE substeps between samples

  double theta = 0.0;
  double t_prev = 0.0;
  bool done = false;
  for (int k = 0; !done; ++k) {
    double t = k * dt;
    if (t >= duration - 1e-9) {
      t = duration;
      done = true;
    }
    // Advance theta from t_prev to t with RK4 on theta' = v(t)/sigma(theta).
    if (t > t_prev) {
      const double h = (t - t_prev) / n_sub;
      auto rate = [&](double tt, double th) {
        return profile.at(tt).value() / curve.sigma(Jet::constant(th)).value();
      };
      for (int i = 0; i < n_sub; ++i) {
        const double t0 = t_prev + i * h;
        const double k1 = rate(t0, theta);
        const double k2 = rate(t0 + 0.5 * h, theta + 0.5 * h * k1);
        const double k3 = rate(t0 + 0.5 * h, theta + 0.5 * h * k2);
        const double k4 = rate(t0 + h, theta + h * k3);
        theta += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      t_prev = t;
    }

    const Jet th = theta_jet(curve, profile.at(t), theta);
    Jet xj, yj;
    curve.position(th, xj, yj);

    FlatOutput flat;
    flat.t = t;
    flat.p = Vec3(center.x() + xj.d(0), center.y() + yj.d(0), z);
    flat.v = Vec3(xj.d(1), yj.d(1), 0.0);
    flat.a = Vec3(xj.d(2), yj.d(2), 0.0);
    flat.j = Vec3(xj.d(3), yj.d(3), 0.0);
    flat.s = Vec3(xj.d(4), yj.d(4), 0.0);
    if (curve.heading_yaw) {
      // Heading as a function of theta: psi = atan2(y', x'). Its theta
      // derivatives come from jets seeded with theta as the variable, then
      // the chain rule maps them to time through theta(t). Well defined at
      // zero speed, where the rates vanish with theta-dot.
      Jet thv = Jet::constant(theta);
      thv.set_d(1, 1.0);
      Jet xv, yv;
      curve.position(thv, xv, yv);
      const Jet xp = jet_deriv(xv);
      const Jet yp = jet_deriv(yv);
      const Jet dpsi =
          (xp * jet_deriv(yp) - yp * jet_deriv(xp)) / (xp * xp + yp * yp);
      const double td1 = th.d(1);
      const double td2 = th.d(2);
      flat.yaw = std::atan2(yp.value(), xp.value());
      flat.yaw_rate = dpsi.value() * td1;
      flat.yaw_acc = dpsi.d(1) * td1 * td1 + dpsi.value() * td2;
    }
    traj.setpoints.push_back(flatness_setpoint(flat, model));
  }
  traj.validate();
  return traj;
}

}  // namespace

SampledTrajectory generate_circle(const Vec2& center, double radius,
                                  double speed, double z, int laps,
                                  const QuadrotorModel& model,
                                  double ramp_time) {
  if (!(radius > 0.0)) throw std::invalid_argument("circle: radius must be positive");
  return generate_parametric(make_circle(radius), center, z, speed, laps,
                             ramp_time, model);
}

SampledTrajectory generate_lemniscate(const Vec2& center, double amplitude,
                                      double speed, double z, int laps,
                                      const QuadrotorModel& model,
                                      double ramp_time) {
  if (!(amplitude > 0.0))
    throw std::invalid_argument("lemniscate: amplitude must be positive");
  return generate_parametric(make_lemniscate(amplitude), center, z, speed,
                             laps, ramp_time, model);
}

}  // namespace quadstack
