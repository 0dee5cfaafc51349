#pragma once

// Line-delimited JSON bridge for agents that live in another process.
//
// Every message is one JSON object on one line and carries "v" (protocol
// version) and "type". The harness sends; the agent answers each request with
// exactly one response.
//
//   hello  {v}                               -> hello {v}   (or error on version mismatch)
//   reset  {v, task:{length, horizon, target, boundary}, obs, seed}
//                                            -> act {v, action}
//   step   {v, obs, reward, done}            -> act {v, action}   when done is false
//                                            -> ack {v}           when done is true
//   any malformed request                    -> error {v, message}
//
// Actions use the log form: "flip(i)" or "no_op".

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rulebench/agents.hpp"
#include "rulebench/environment.hpp"
#include "rulebench/io.hpp"

namespace rulebench {

inline constexpr int kBridgeProtocolVersion = 1;

class BridgeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace bridge {

Json hello(int version = kBridgeProtocolVersion);
Json reset(const EpisodeStart& start);
Json step(const Tape& observation, double reward, bool done);
Json act(const Action& action);
Json ack();
Json error(const std::string& message);

// Parses a line and checks its version and type; throws BridgeError.
Json parse_message(const std::string& line, const std::string& expected_type);
Action parse_action(const Json& message, std::size_t length);

}  // namespace bridge

// Child process running `/bin/sh -c command` with piped stdin/stdout.
class Subprocess {
 public:
  explicit Subprocess(const std::string& command);
  ~Subprocess();
  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  void write_line(const std::string& line);
  // Empty on timeout; throws BridgeError on EOF.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);
  void terminate();
  bool running() const { return pid_ > 0; }

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

// Harness-side agent forwarding every decision to a subprocess. A process that
// times out or misbehaves is killed and restarted on the next episode.
class BridgeAgent final : public Agent {
 public:
  explicit BridgeAgent(AgentConfig cfg);

  void begin_episode(const EpisodeStart& start) override;
  Action act(const Tape& observation) override;
  void observe(const Transition& transition, double reward, bool done) override;

 private:
  Json request(const Json& message, const std::string& expected_type);
  void ensure_started();

  AgentConfig cfg_;
  std::unique_ptr<Subprocess> process_;
  std::size_t length_ = 0;
  std::optional<Action> pending_;
};

// Serves `agent` over a request/response stream until EOF. Returns 0 on clean
// EOF, 1 after rejecting a protocol-version handshake.
int serve_agent(Agent& agent, std::istream& in, std::ostream& out,
                int version = kBridgeProtocolVersion);

}  // namespace rulebench
