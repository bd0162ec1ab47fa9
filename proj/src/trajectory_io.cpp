#include "quadstack/trajectory_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "quadstack/errors.hpp"

namespace quadstack {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void write_row(std::ostream& out, const QuadState& st) {
  const double cols[27] = {
      st.t,     st.p.x(), st.p.y(), st.p.z(), st.q.w(),  st.q.x(), st.q.y(),
      st.q.z(), st.v.x(), st.v.y(), st.v.z(), st.w.x(),  st.w.y(), st.w.z(),
      st.a.x(), st.a.y(), st.a.z(), st.j.x(), st.j.y(),  st.j.z(), st.s.x(),
      st.s.y(), st.s.z(), st.fd(0), st.fd(1), st.fd(2),  st.fd(3)};
  for (int i = 0; i < 27; ++i) {
    if (i) out << ',';
    out << format_g17(cols[i]);
  }
  out << '\n';
}

bool parse_double(const std::string& field, double* out) {
  if (field.empty()) return false;
  const char* s = field.c_str();
  char* end = nullptr;
  *out = std::strtod(s, &end);
  return end == s + field.size();
}

}  // namespace

void trajectory_save(const SampledTrajectory& traj, std::ostream& out) {
  traj.validate();
  out << kTrajectoryHeader << '\n';
  for (const auto& sp : traj.setpoints) write_row(out, sp.state);
}

void trajectory_save(const SampledTrajectory& traj,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  trajectory_save(traj, out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

SampledTrajectory trajectory_load(std::istream& in, const std::string& name) {
  std::string line;
  int lineno = 0;

  if (!std::getline(in, line))
    throw ParseError(name + ":1: empty file", 1);
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrajectoryHeader)
    throw ParseError(name + ":1: bad header", 1);

  SampledTrajectory traj;
  double prev_t = 0.0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (in.peek() == EOF) break;  // tolerate one trailing newline
      throw ParseError(name + ":" + std::to_string(lineno) + ": blank line",
                       lineno);
    }

    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    if (fields.size() != 27)
      throw ParseError(name + ":" + std::to_string(lineno) + ": expected 27 columns, got " +
                           std::to_string(fields.size()),
                       lineno);

    double vals[27];
    for (int i = 0; i < 27; ++i) {
      if (!parse_double(fields[i], &vals[i]))
        throw ParseError(name + ":" + std::to_string(lineno) +
                             ": column " + std::to_string(i + 1) + " is not a number",
                         lineno);
    }

    QuadState st;
    st.t = vals[0];
    st.p = Vec3(vals[1], vals[2], vals[3]);
    st.q = Quat(vals[4], vals[5], vals[6], vals[7]);
    st.v = Vec3(vals[8], vals[9], vals[10]);
    st.w = Vec3(vals[11], vals[12], vals[13]);
    st.a = Vec3(vals[14], vals[15], vals[16]);
    st.j = Vec3(vals[17], vals[18], vals[19]);
    st.s = Vec3(vals[20], vals[21], vals[22]);
    st.fd = Vec4(vals[23], vals[24], vals[25], vals[26]);
    st.f = st.fd;

    const double qn = st.q.norm();
    if (std::abs(qn - 1.0) > 1e-3)
      throw ParseError(name + ":" + std::to_string(lineno) + ": quaternion norm " +
                           std::to_string(qn),
                       lineno);
    st.q.normalize();

    if (!traj.setpoints.empty() && !(st.t > prev_t))
      throw ParseError(name + ":" + std::to_string(lineno) +
                           ": timestamps not strictly increasing",
                       lineno);
    prev_t = st.t;

    Setpoint sp;
    sp.state = st;
    sp.input = Command::single_rotor(st.t, st.fd);
    traj.setpoints.push_back(sp);
  }

  if (traj.setpoints.size() < 2)
    throw ParseError(name + ": fewer than 2 setpoints", lineno);
  return traj;
}

SampledTrajectory trajectory_load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  return trajectory_load(in, path.filename().string());
}

}  // namespace quadstack
