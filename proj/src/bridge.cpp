#include "rulebench/bridge.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <ostream>

namespace rulebench {

namespace bridge {

namespace {

Json envelope(const char* type) {
  Json j;
  j["v"] = kBridgeProtocolVersion;
  j["type"] = type;
  return j;
}

}  // namespace

Json hello(int version) {
  Json j;
  j["v"] = version;
  j["type"] = "hello";
  return j;
}

Json reset(const EpisodeStart& start) {
  Json j = envelope("reset");
  Json task;
  task["length"] = start.task.length;
  task["horizon"] = start.task.horizon;
  task["target"] = start.task.target.to_string();
  task["boundary"] = std::string(to_string(start.task.boundary));
  j["task"] = std::move(task);
  j["obs"] = start.observation.to_string();
  j["seed"] = start.episode_seed;
  return j;
}

Json step(const Tape& observation, double reward, bool done) {
  Json j = envelope("step");
  j["obs"] = observation.to_string();
  j["reward"] = reward;
  j["done"] = done;
  return j;
}

Json act(const Action& action) {
  Json j = envelope("act");
  j["action"] = action.to_string();
  return j;
}

Json ack() { return envelope("ack"); }

Json error(const std::string& message) {
  Json j = envelope("error");
  j["message"] = message;
  return j;
}

Json parse_message(const std::string& line, const std::string& expected_type) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::exception&) {
    throw BridgeError("malformed bridge line: " + line);
  }
  if (!j.is_object() || !j.contains("v") || !j.contains("type") || !j["v"].is_number_integer() ||
      !j["type"].is_string()) {
    throw BridgeError("bridge message lacks v/type: " + line);
  }
  const auto type = j["type"].get<std::string>();
  if (type == "error" && expected_type != "error") {
    throw BridgeError("peer reported error: " + j.value("message", std::string("(no message)")));
  }
  if (j["v"].get<int>() != kBridgeProtocolVersion) {
    throw BridgeError("bridge protocol version mismatch: expected " +
                      std::to_string(kBridgeProtocolVersion) + ", got " +
                      std::to_string(j["v"].get<int>()));
  }
  if (type != expected_type) {
    throw BridgeError("expected bridge message '" + expected_type + "', got '" + type + "'");
  }
  return j;
}

Action parse_action(const Json& message, std::size_t length) {
  if (!message.contains("action") || !message["action"].is_string()) {
    throw BridgeError("act message lacks an action");
  }
  try {
    const Action a = Action::parse(message["action"].get<std::string>());
    if (!a.is_no_op() && a.flip_index() >= length) throw DomainError("flip index out of range");
    return a;
  } catch (const DomainError& e) {
    throw BridgeError(std::string("invalid action: ") + e.what());
  }
}

}  // namespace bridge

Subprocess::Subprocess(const std::string& command) {
  int in_pipe[2];
  int out_pipe[2];
  if (pipe2(in_pipe, O_CLOEXEC) != 0) throw BridgeError(std::string("pipe failed: ") + std::strerror(errno));
  if (pipe2(out_pipe, O_CLOEXEC) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw BridgeError(std::string("pipe failed: ") + std::strerror(errno));
  }
  const pid_t pid = fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    throw BridgeError(std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

Subprocess::~Subprocess() { terminate(); }

void Subprocess::write_line(const std::string& line) {
  if (to_child_ < 0) throw BridgeError("bridge process is not running");
  std::string data = line + "\n";
  std::size_t written = 0;
  while (written < data.size()) {
    const ssize_t n = ::write(to_child_, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw BridgeError(std::string("write to bridge process failed: ") + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> Subprocess::read_line(std::chrono::milliseconds timeout) {
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + timeout;
  for (;;) {
    if (auto pos = buffer_.find('\n'); pos != std::string::npos) {
      std::string line = buffer_.substr(0, pos);
      buffer_.erase(0, pos + 1);
      return line;
    }
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now());
    if (remaining.count() <= 0) return std::nullopt;
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = poll(&pfd, 1, static_cast<int>(remaining.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw BridgeError(std::string("poll failed: ") + std::strerror(errno));
    }
    if (ready == 0) return std::nullopt;
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw BridgeError(std::string("read from bridge process failed: ") + std::strerror(errno));
    }
    if (n == 0) throw BridgeError("bridge process closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void Subprocess::terminate() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    kill(pid_, SIGKILL);
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

BridgeAgent::BridgeAgent(AgentConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.command.empty()) throw ConfigError("bridge agent '" + cfg_.name + "' has no command");
  // Writes to a dead child must surface as errors, not kill the harness.
  signal(SIGPIPE, SIG_IGN);
}

void BridgeAgent::ensure_started() {
  if (process_ && process_->running()) return;
  process_ = std::make_unique<Subprocess>(cfg_.command);
  request(bridge::hello(), "hello");
}

Json BridgeAgent::request(const Json& message, const std::string& expected_type) {
  try {
    process_->write_line(message.dump());
    auto line = process_->read_line(cfg_.step_timeout);
    if (!line) {
      throw BridgeError("bridge agent '" + cfg_.name + "' timed out after " +
                        std::to_string(cfg_.step_timeout.count()) + " ms");
    }
    return bridge::parse_message(*line, expected_type);
  } catch (const BridgeError&) {
    process_.reset();
    throw;
  }
}

void BridgeAgent::begin_episode(const EpisodeStart& start) {
  ensure_started();
  length_ = start.task.length;
  pending_ = bridge::parse_action(request(bridge::reset(start), "act"), length_);
}

Action BridgeAgent::act(const Tape&) {
  if (!pending_) throw BridgeError("bridge agent has no pending action");
  Action a = *pending_;
  pending_.reset();
  return a;
}

void BridgeAgent::observe(const Transition& transition, double reward, bool done) {
  const Json msg = bridge::step(transition.next_state, reward, done);
  if (done) {
    request(msg, "ack");
  } else {
    pending_ = bridge::parse_action(request(msg, "act"), length_);
  }
}

int serve_agent(Agent& agent, std::istream& in, std::ostream& out, int version) {
  auto send = [&](const Json& j) { out << j.dump() << '\n' << std::flush; };
  auto send_error = [&](const std::string& message) {
    Json j = bridge::error(message);
    j["v"] = version;
    send(j);
  };

  bool in_episode = false;
  Tape last_obs;
  std::optional<Action> last_action;
  std::size_t length = 0;

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json msg;
    try {
      msg = Json::parse(line);
    } catch (const Json::exception&) {
      send_error("malformed line: not JSON");
      in_episode = false;
      continue;
    }
    if (!msg.is_object() || !msg.contains("v") || !msg["v"].is_number_integer() ||
        !msg.contains("type") || !msg["type"].is_string()) {
      send_error("malformed line: missing v or type");
      in_episode = false;
      continue;
    }
    const int v = msg["v"].get<int>();
    const auto type = msg["type"].get<std::string>();
    if (v != version) {
      send_error("protocol version mismatch: this agent speaks v" + std::to_string(version) +
                 ", request used v" + std::to_string(v));
      if (type == "hello") return 1;
      in_episode = false;
      continue;
    }

    try {
      if (type == "hello") {
        send(bridge::hello(version));
      } else if (type == "reset") {
        const auto& task = msg.at("task");
        EpisodeStart start;
        start.task.length = task.at("length").get<std::size_t>();
        start.task.horizon = task.at("horizon").get<std::size_t>();
        start.task.target = Tape::from_string(task.at("target").get<std::string>());
        start.task.boundary = parse_boundary(task.value("boundary", std::string("periodic")));
        start.observation = Tape::from_string(msg.at("obs").get<std::string>());
        start.episode_seed = msg.at("seed").get<std::uint64_t>();
        if (start.observation.length() != start.task.length) {
          throw DomainError("observation length differs from task length");
        }
        length = start.task.length;
        agent.begin_episode(start);
        last_obs = start.observation;
        last_action = agent.act(last_obs);
        in_episode = true;
        send(bridge::act(*last_action));
      } else if (type == "step") {
        if (!in_episode || !last_action) throw DomainError("step outside an episode");
        Tape obs = Tape::from_string(msg.at("obs").get<std::string>());
        if (obs.length() != length) throw DomainError("observation length changed mid-episode");
        const double reward = msg.at("reward").get<double>();
        const bool done = msg.at("done").get<bool>();
        agent.observe(Transition{last_obs, *last_action, obs}, reward, done);
        last_obs = std::move(obs);
        if (done) {
          agent.end_episode();
          in_episode = false;
          last_action.reset();
          send(bridge::ack());
        } else {
          last_action = agent.act(last_obs);
          send(bridge::act(*last_action));
        }
      } else {
        throw DomainError("unknown message type '" + type + "'");
      }
    } catch (const std::exception& e) {
      send_error(std::string("request rejected: ") + e.what());
      in_episode = false;
      last_action.reset();
    }
  }
  return 0;
}

}  // namespace rulebench
