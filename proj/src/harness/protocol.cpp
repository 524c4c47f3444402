#include "harness/protocol.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <thread>
#include <unordered_map>

#include "core/errors.hpp"
#include "hardattn/agent.hpp"
#include "search/run_search.hpp"
#include "search/selection.hpp"
#include "tracecodec/empirical.hpp"
#include "tracecodec/names.hpp"

extern char** environ;

namespace treebandit {

namespace {

constexpr std::size_t kMaxLine = 1 << 20;

std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    const std::size_t j = line.find(' ', i);
    const std::size_t end = j == std::string_view::npos ? line.size() : j;
    if (end > i) out.push_back(line.substr(i, end - i));
    i = end;
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError("bad number '" + std::string(s) + "'");
  }
  return v;
}

int parse_int(std::string_view s) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ParseError("bad integer '" + std::string(s) + "'");
  return v;
}

[[noreturn]] void sys_fail(const std::string& what) { throw IoError(what + ": " + std::strerror(errno)); }

}  // namespace

ProtocolMessage ProtocolMessage::init(Family f, int budget, std::string root) {
  ProtocolMessage m;
  m.kind = MessageKind::Init;
  m.family = f;
  m.budget = budget;
  m.state = std::move(root);
  return m;
}

ProtocolMessage ProtocolMessage::feedback(std::string state, double value, std::vector<std::string> children) {
  ProtocolMessage m;
  m.kind = MessageKind::Feedback;
  m.state = std::move(state);
  m.value = value;
  m.children = std::move(children);
  return m;
}

ProtocolMessage ProtocolMessage::select(std::string state) {
  ProtocolMessage m;
  m.kind = MessageKind::Select;
  m.state = std::move(state);
  return m;
}

ProtocolMessage ProtocolMessage::done(std::string status) {
  ProtocolMessage m;
  m.kind = MessageKind::Done;
  m.status = std::move(status);
  return m;
}

std::string ProtocolMessage::to_line() const {
  switch (kind) {
    case MessageKind::Init:
      return "INIT " + std::string(family_name(family)) + " " + std::to_string(budget) + " " + state;
    case MessageKind::Feedback: {
      std::string s = "FEEDBACK " + state + " " + format_double(value) + " CHILDREN";
      for (const auto& c : children) s += " " + c;
      return s;
    }
    case MessageKind::Select:
      return "SELECT " + state;
    case MessageKind::Done:
      return "DONE " + status;
  }
  return {};
}

ProtocolMessage ProtocolMessage::parse(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto f = fields(line);
  if (f.empty()) throw ParseError("empty message");
  if (f[0] == "INIT") {
    if (f.size() != 4) throw ParseError("INIT takes <family> <T> <root>");
    const int budget = parse_int(f[2]);
    if (budget < 1) throw ParseError("INIT budget must be positive");
    Family family;
    try {
      family = parse_family(f[1]);
    } catch (const ParameterError& e) {
      throw ParseError(e.what());
    }
    return init(family, budget, std::string(f[3]));
  }
  if (f[0] == "FEEDBACK") {
    if (f.size() < 4 || f[3] != "CHILDREN") throw ParseError("FEEDBACK takes <state> <value> CHILDREN <children...>");
    std::vector<std::string> kids(f.begin() + 4, f.end());
    return feedback(std::string(f[1]), parse_double(f[2]), std::move(kids));
  }
  if (f[0] == "SELECT") {
    if (f.size() != 2) throw ParseError("SELECT takes exactly one state");
    return select(std::string(f[1]));
  }
  if (f[0] == "DONE") {
    if (f.size() != 2) throw ParseError("DONE takes exactly one status");
    return done(std::string(f[1]));
  }
  throw ParseError("unknown message '" + std::string(f[0]) + "'");
}

FdChannel::FdChannel(int read_fd, int write_fd, bool owns) : rfd_(read_fd), wfd_(write_fd), owns_(owns) {}

FdChannel::~FdChannel() {
  if (!owns_) return;
  if (rfd_ >= 0) ::close(rfd_);
  if (wfd_ >= 0 && wfd_ != rfd_) ::close(wfd_);
}

std::optional<std::string> FdChannel::read_line(double timeout_s) {
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + std::chrono::duration<double>(timeout_s);
  while (true) {
    const auto nl = buf_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buf_.substr(0, nl);
      buf_.erase(0, nl + 1);
      return line;
    }
    if (buf_.size() > kMaxLine) throw ParseError("line longer than 1 MiB");
    int wait_ms = -1;
    if (timeout_s > 0) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
      if (left <= 0) throw ProtocolError("timed out waiting for the peer");
      wait_ms = static_cast<int>(std::min<long long>(left, 1 << 30));
    }
    pollfd p{rfd_, POLLIN, 0};
    const int rc = ::poll(&p, 1, wait_ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      sys_fail("poll");
    }
    if (rc == 0) throw ProtocolError("timed out waiting for the peer");
    char chunk[4096];
    ssize_t n = ::read(rfd_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      if (errno != ECONNRESET) sys_fail("read");
      n = 0;
    }
    if (n <= 0) {
      if (buf_.empty()) return std::nullopt;
      std::string line = std::move(buf_);
      buf_.clear();
      return line;
    }
    buf_.append(chunk, static_cast<std::size_t>(n));
  }
}

void FdChannel::write_line(const std::string& line) {
  const std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::send(wfd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == ENOTSOCK) n = ::write(wfd_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      sys_fail("write");
    }
    off += static_cast<std::size_t>(n);
  }
}

void FdChannel::close_write() {
  if (wfd_ < 0) return;
  if (wfd_ == rfd_) {
    ::shutdown(wfd_, SHUT_WR);
  } else {
    ::close(wfd_);
    wfd_ = -1;
  }
}

std::pair<std::unique_ptr<FdChannel>, std::unique_ptr<FdChannel>> channel_pair() {
  int sv[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) sys_fail("socketpair");
  return {std::make_unique<FdChannel>(sv[0], sv[0], true), std::make_unique<FdChannel>(sv[1], sv[1], true)};
}

ChildProcess::ChildProcess(const std::string& command) {
  int sv[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) sys_fail("socketpair");
  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  posix_spawn_file_actions_adddup2(&fa, sv[1], 0);
  posix_spawn_file_actions_adddup2(&fa, sv[1], 1);
  const char* argv[] = {"sh", "-c", command.c_str(), nullptr};
  const int rc = ::posix_spawn(&pid_, "/bin/sh", &fa, nullptr, const_cast<char* const*>(argv), environ);
  posix_spawn_file_actions_destroy(&fa);
  ::close(sv[1]);
  if (rc != 0) {
    ::close(sv[0]);
    errno = rc;
    sys_fail("cannot start agent '" + command + "'");
  }
  channel_ = std::make_unique<FdChannel>(sv[0], sv[0], true);
}

ChildProcess::~ChildProcess() {
  channel_.reset();
  if (pid_ <= 0) return;
  // Give the agent a moment to exit on end of stream before forcing it.
  for (int i = 0; i < 200; ++i) {
    if (::waitpid(pid_, nullptr, WNOHANG) == pid_) return;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ::kill(pid_, SIGKILL);
  ::waitpid(pid_, nullptr, 0);
}

TcpListener::TcpListener(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (::getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints, &res) != 0 || !res) {
    throw IoError("cannot resolve " + host);
  }
  fd_ = ::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC, res->ai_protocol);
  if (fd_ < 0) {
    ::freeaddrinfo(res);
    sys_fail("socket");
  }
  const int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(fd_, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd_, 4) != 0) {
    ::freeaddrinfo(res);
    ::close(fd_);
    sys_fail("cannot listen on " + host + ":" + service);
  }
  ::freeaddrinfo(res);
  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = addr.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
                                     : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<FdChannel> TcpListener::accept(double timeout_s) {
  pollfd p{fd_, POLLIN, 0};
  const int rc = ::poll(&p, 1, timeout_s > 0 ? static_cast<int>(timeout_s * 1000) : -1);
  if (rc < 0) sys_fail("poll");
  if (rc == 0) throw ProtocolError("no agent connected within the timeout");
  const int c = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
  if (c < 0) sys_fail("accept");
  return std::make_unique<FdChannel>(c, c, true);
}

std::unique_ptr<FdChannel> tcp_connect(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0 || !res) throw IoError("cannot resolve " + host);
  int fd = -1;
  for (addrinfo* a = res; a; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype | SOCK_CLOEXEC, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw IoError("cannot connect to " + host + ":" + service);
  return std::make_unique<FdChannel>(fd, fd, true);
}

ServeResult serve_session(const SearchTree& tree, int budget, const ValueEstimator& estimator, const RngStream& rng,
                          LineChannel& channel, double timeout_s) {
  if (budget < 1) throw ParameterError("budget must be at least 1");
  ServeResult r;
  RngStream value_rng = rng.split("value");
  // Only states the agent has been told about can be selected.
  std::unordered_map<std::string, StateId> known;
  auto name = [&](StateId s) {
    std::string n = state_name(tree, s);
    known.emplace(n, s);
    return n;
  };
  auto send = [&](const ProtocolMessage& m) {
    const std::string line = m.to_line();
    r.log.push_back("env> " + line);
    channel.write_line(line);
  };
  auto feedback = [&](const StepRecord& step) {
    std::vector<std::string> kids;
    for (StateId c : step.children) kids.push_back(name(c));
    send(ProtocolMessage::feedback(name(step.state), step.value, std::move(kids)));
  };

  r.trajectory.steps.push_back(observe(tree, tree.root(), estimator, value_rng));
  Frontier frontier(r.trajectory.steps[0]);
  try {
    send(ProtocolMessage::init(tree.family(), budget, name(tree.root())));
    for (int t = 1; t <= budget; ++t) {
      if (frontier.empty()) {
        r.trajectory.exhausted = true;
        r.status = "exhausted";
        break;
      }
      feedback(r.trajectory.steps.back());
      const auto line = channel.read_line(timeout_s);
      if (!line) {
        r.status = "disconnected";
        r.error = "agent closed the stream";
        break;
      }
      r.log.push_back("agent> " + *line);
      ProtocolMessage m;
      try {
        m = ProtocolMessage::parse(*line);
      } catch (const ParseError& e) {
        r.status = "malformed";
        r.error = e.what();
        break;
      }
      if (m.kind != MessageKind::Select) {
        r.status = "malformed";
        r.error = "expected SELECT";
        break;
      }
      const auto it = known.find(m.state);
      if (it == known.end() || !frontier.contains(it->second)) {
        r.status = "illegal";
        r.error = "'" + m.state + "' is not in the frontier";
        break;
      }
      StepRecord step = observe(tree, it->second, estimator, value_rng);
      frontier.visit(step);
      r.trajectory.steps.push_back(std::move(step));
    }
    if (r.status.empty()) r.status = "ok";
  } catch (const ProtocolError& e) {
    r.status = "timeout";
    r.error = e.what();
  } catch (const ParseError& e) {
    r.status = "malformed";
    r.error = e.what();
  } catch (const IoError& e) {
    r.status = "disconnected";
    r.error = e.what();
  }
  try {
    send(ProtocolMessage::done(r.status));
  } catch (const IoError&) {
  }
  r.trace = encode_empirical(r.trajectory, tree);
  return r;
}

namespace {

class PolicyBrain final : public AgentBrain {
 public:
  PolicyBrain(const Policy& p, std::uint64_t seed) : policy_(p), base_(seed, "agent"), rng_(base_) {}

  void begin(Family, int, const StepRecord& root) override {
    state_.emplace(root);
    rng_ = base_.split(session_++).split("select");
  }
  void observe(const StepRecord& step) override { state_->record(step); }
  StateId choose() override {
    const Selection sel = select_next(policy_, *state_, rng_);
    // A stuck N(s) walk answers with the visited leaf it ended on, which the
    // environment rejects as illegal.
    return sel.dead_end() ? sel.path.back() : *sel.state;
  }

 private:
  Policy policy_;
  RngStream base_;
  RngStream rng_;
  std::uint64_t session_ = 0;
  std::optional<SearchState> state_;
};

class ModelBrain final : public AgentBrain {
 public:
  ModelBrain(const Policy& p, int branching, std::uint64_t seed, std::shared_ptr<const HardAttnModel> model)
      : policy_(p), branching_(branching), fixed_(std::move(model)), base_(seed, "agent"), rng_(base_) {}

  void begin(Family, int budget, const StepRecord& root) override {
    agent_.reset();
    if (!fixed_ && (!model_ || model_->budget != budget)) {
      model_ = std::make_shared<const HardAttnModel>(build_model(budget, branching_, policy_));
    }
    agent_.emplace(fixed_ ? *fixed_ : *model_, root);
    rng_ = base_.split(session_++).split("select");
  }
  void observe(const StepRecord& step) override { agent_->record(step, agent_->state().path_to(step.state)); }
  StateId choose() override {
    const Selection sel = agent_->sample(rng_);
    return sel.dead_end() ? sel.path.back() : *sel.state;
  }

 private:
  Policy policy_;
  int branching_;
  std::shared_ptr<const HardAttnModel> fixed_;
  std::shared_ptr<const HardAttnModel> model_;
  RngStream base_;
  RngStream rng_;
  std::uint64_t session_ = 0;
  std::optional<ModelPolicy> agent_;
};

}  // namespace

std::unique_ptr<AgentBrain> policy_brain(const Policy& policy, std::uint64_t seed) {
  return std::make_unique<PolicyBrain>(policy, seed);
}

std::unique_ptr<AgentBrain> model_brain(const Policy& policy, int branching, std::uint64_t seed,
                                        std::shared_ptr<const HardAttnModel> model) {
  return std::make_unique<ModelBrain>(policy, branching, seed, std::move(model));
}

int run_agent(LineChannel& channel, AgentBrain& brain, double timeout_s) {
  int sessions = 0;
  bool open = false;
  bool started = false;
  Family family = Family::Tree;
  int budget = 0;
  std::unordered_map<std::string, StateId> ids;
  std::vector<std::string> names;
  auto id_of = [&](const std::string& n) {
    const auto [it, fresh] = ids.emplace(n, StateId{static_cast<std::uint32_t>(names.size())});
    if (fresh) names.push_back(n);
    return it->second;
  };
  while (const auto line = channel.read_line(timeout_s)) {
    const ProtocolMessage m = ProtocolMessage::parse(*line);
    switch (m.kind) {
      case MessageKind::Init:
        ids.clear();
        names.clear();
        id_of(m.state);
        family = m.family;
        budget = m.budget;
        open = true;
        started = false;
        break;
      case MessageKind::Feedback: {
        if (!open) throw ProtocolError("FEEDBACK outside a session");
        StepRecord step;
        step.state = id_of(m.state);
        step.value = m.value;
        for (const auto& c : m.children) step.children.push_back(id_of(c));
        if (!started) {
          brain.begin(family, budget, step);
          started = true;
        } else {
          brain.observe(step);
        }
        channel.write_line(ProtocolMessage::select(names.at(brain.choose().value)).to_line());
        break;
      }
      case MessageKind::Done:
        open = false;
        ++sessions;
        break;
      case MessageKind::Select:
        throw ProtocolError("agent received SELECT");
    }
  }
  return sessions;
}

}  // namespace treebandit
