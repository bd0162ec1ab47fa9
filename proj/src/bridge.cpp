#include "quadstack/bridge.hpp"

#include "quadstack/simulator.hpp"
#include "quadstack/trajectory_io.hpp"

namespace quadstack {

bool SimBridge::send(const Command& cmd, double send_time) {
  if (!sim_ || !cmd.valid()) return false;
  Command stamped = cmd;
  stamped.set_time(send_time);
  sim_->push_command(stamped);
  return true;
}

LogBridge::LogBridge(const std::filesystem::path& path)
    : out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("log bridge: cannot open " + path.string());
  out_ << kCommandLogHeader << '\n';
}

bool LogBridge::send(const Command& cmd, double send_time) {
  if (!out_) return false;
  const bool srt = cmd.mode() == CommandMode::kSingleRotorThrusts;
  const Vec4 f = srt ? cmd.thrusts() : Vec4::Zero();
  const double ct = srt ? 0.0 : cmd.collective_thrust();
  const Vec3 w = srt ? Vec3::Zero() : cmd.bodyrate();

  out_ << format_g17(send_time) << ',' << (srt ? "srt" : "ctbr");
  const double rest[8] = {f(0), f(1), f(2), f(3), ct, w.x(), w.y(), w.z()};
  for (double v : rest) out_ << ',' << format_g17(v);
  out_ << '\n';
  return bool(out_);
}

void LogBridge::flush() { out_.flush(); }

}  // namespace quadstack
