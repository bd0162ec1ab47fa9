#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <vector>

#include "quadstack/types.hpp"

namespace quadstack {

class Simulator;

inline constexpr const char* kCommandLogHeader =
    "t,mode,f1,f2,f3,f4,ct,wx,wy,wz";

// Transport for commands leaving the pilot. send() stamps the command with
// the send time and returns whether the transport accepted it.
class Bridge {
 public:
  virtual ~Bridge() = default;
  virtual bool send(const Command& cmd, double send_time) = 0;
};

// Feeds a simulator's command delay line.
class SimBridge : public Bridge {
 public:
  explicit SimBridge(Simulator* sim) : sim_(sim) {}
  bool send(const Command& cmd, double send_time) override;

 private:
  Simulator* sim_;
};

// Appends commands to a CSV file. Unused fields of a mode are written as 0.
class LogBridge : public Bridge {
 public:
  explicit LogBridge(const std::filesystem::path& path);
  bool send(const Command& cmd, double send_time) override;
  void flush();

 private:
  std::ofstream out_;
};

// Fans a command out to several transports; acks only when all of them do.
class CompositeBridge : public Bridge {
 public:
  explicit CompositeBridge(std::vector<std::shared_ptr<Bridge>> parts)
      : parts_(std::move(parts)) {}
  bool send(const Command& cmd, double send_time) override {
    bool ok = true;
    for (auto& p : parts_) ok = p->send(cmd, send_time) && ok;
    return ok;
  }

 private:
  std::vector<std::shared_ptr<Bridge>> parts_;
};

}  // namespace quadstack
