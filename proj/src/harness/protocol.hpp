#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/rng.hpp"
#include "core/search_tree.hpp"
#include "core/trajectory.hpp"
#include "envs/value.hpp"
#include "hardattn/model.hpp"
#include "search/policy.hpp"
#include "tracecodec/token.hpp"

namespace treebandit {

// Line grammar, one message per line:
//   INIT <family> <T> <root>                      env -> agent
//   FEEDBACK <state> <value> CHILDREN <c1> ...    env -> agent
//   SELECT <state>                                agent -> env
//   DONE <status>                                 env -> agent
// Every FEEDBACK is answered by exactly one SELECT. The env sends FEEDBACK
// for the root and for selections 1..T-1; the T-th SELECT is followed by
// DONE. Rewards never cross the wire.

enum class MessageKind { Init, Feedback, Select, Done };

struct ProtocolMessage {
  MessageKind kind = MessageKind::Done;
  Family family = Family::Tree;  // INIT
  int budget = 0;                // INIT
  std::string state;             // INIT root, FEEDBACK, SELECT
  double value = 0.0;            // FEEDBACK
  std::vector<std::string> children;
  std::string status;  // DONE

  static ProtocolMessage init(Family f, int budget, std::string root);
  static ProtocolMessage feedback(std::string state, double value, std::vector<std::string> children);
  static ProtocolMessage select(std::string state);
  static ProtocolMessage done(std::string status);

  /// Without the trailing newline. Values use the shortest round-trip form.
  std::string to_line() const;
  /// Throws ParseError on anything outside the grammar.
  static ProtocolMessage parse(std::string_view line);
};

/// Newline-delimited byte stream.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  /// nullopt at end of stream; throws ProtocolError when nothing arrives
  /// within `timeout_s` and ParseError for lines over 1 MiB.
  virtual std::optional<std::string> read_line(double timeout_s) = 0;
  /// Throws IoError when the peer is gone.
  virtual void write_line(const std::string& line) = 0;
};

/// Channel over a pair of file descriptors (pipes or one socket).
class FdChannel final : public LineChannel {
 public:
  FdChannel(int read_fd, int write_fd, bool owns);
  ~FdChannel() override;
  FdChannel(const FdChannel&) = delete;
  FdChannel& operator=(const FdChannel&) = delete;

  std::optional<std::string> read_line(double timeout_s) override;
  void write_line(const std::string& line) override;
  /// Closes the write side (the peer then reads end of stream).
  void close_write();

 private:
  int rfd_;
  int wfd_;
  bool owns_;
  std::string buf_;
};

/// Two connected channels (socketpair), for in-process agents.
std::pair<std::unique_ptr<FdChannel>, std::unique_ptr<FdChannel>> channel_pair();

/// `/bin/sh -c command` with its stdin/stdout attached to a channel; stderr
/// is inherited. The destructor closes the pipes and reaps the child.
class ChildProcess {
 public:
  explicit ChildProcess(const std::string& command);
  ~ChildProcess();
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  FdChannel& channel() { return *channel_; }
  int pid() const { return pid_; }

 private:
  int pid_ = -1;
  std::unique_ptr<FdChannel> channel_;
};

/// Listening TCP socket on host:port (port 0 picks a free one).
class TcpListener {
 public:
  TcpListener(const std::string& host, int port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  int port() const { return port_; }
  /// Waits for one connection; throws ProtocolError on timeout.
  std::unique_ptr<FdChannel> accept(double timeout_s);

 private:
  int fd_ = -1;
  int port_ = 0;
};

std::unique_ptr<FdChannel> tcp_connect(const std::string& host, int port);

struct ServeResult {
  Trajectory trajectory;
  TraceRecord trace;  // empirical format
  /// ok, exhausted, illegal, malformed, timeout or disconnected.
  std::string status;
  std::string error;
  /// "env> ..." and "agent> ..." lines in wire order.
  std::vector<std::string> log;

  bool failed() const { return status != "ok" && status != "exhausted"; }
};

/// Environment side of one session. Values are drawn from
/// rng.split("value") exactly as run_search draws them.
ServeResult serve_session(const SearchTree& tree, int budget, const ValueEstimator& estimator, const RngStream& rng,
                          LineChannel& channel, double timeout_s);

/// Decision rule of an in-process protocol agent.
class AgentBrain {
 public:
  virtual ~AgentBrain() = default;
  /// A session opens; `root` is the root step as first reported.
  virtual void begin(Family family, int budget, const StepRecord& root) = 0;
  virtual void observe(const StepRecord& step) = 0;
  /// Frontier member to select next.
  virtual StateId choose() = 0;
};

/// Internal policy. Session k draws from RngStream(seed, "agent").split(k).split("select").
std::unique_ptr<AgentBrain> policy_brain(const Policy& policy, std::uint64_t seed);
/// Constructed model; `model` null builds one per session for (T, branching).
std::unique_ptr<AgentBrain> model_brain(const Policy& policy, int branching, std::uint64_t seed,
                                        std::shared_ptr<const HardAttnModel> model = nullptr);
/// Replays fixed state names, one per SELECT.
std::unique_ptr<AgentBrain> scripted_brain(std::vector<std::string> selections);

/// Agent side: answers sessions on `channel` until end of stream. State
/// names on the wire are mapped to local ids in order of appearance.
/// Returns the number of sessions that reached DONE.
int run_agent(LineChannel& channel, AgentBrain& brain, double timeout_s);

}  // namespace treebandit
