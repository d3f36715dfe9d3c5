#pragma once
// JSON-RPC 2.0 tool server, MCP-style but reduced to three methods:
// initialize, tools/list and tools/call (plus shutdown). Frames are UTF-8
// JSON, one per line, over stdio or a local TCP socket. Tool handlers mutate
// per-session state under a per-session lock; the handlers themselves are
// stateless.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "sageforge/common.hpp"
#include "sageforge/scene.hpp"

namespace sageforge {

// JSON-RPC 2.0 error codes; -32000 carries application errors with the
// Errc name in error.data.type so clients can rethrow faithfully.
constexpr int kRpcParseError = -32700;
constexpr int kRpcInvalidRequest = -32600;
constexpr int kRpcMethodNotFound = -32601;
constexpr int kRpcInvalidParams = -32602;
constexpr int kRpcAppError = -32000;

constexpr const char* kProtocolVersion = "0.1";
constexpr const char* kServerName = "sage-forge";
constexpr const char* kServerVersion = "1.0.0";

struct ToolDescriptor {
  std::string name;
  std::string description;
  nlohmann::ordered_json input_schema;
  nlohmann::ordered_json output_schema;
};

inline nlohmann::ordered_json to_json(const ToolDescriptor& d) {
  return {{"name", d.name},
          {"description", d.description},
          {"inputSchema", d.input_schema},
          {"outputSchema", d.output_schema}};
}

// One scene per session. The event log is append-only; tools push a digest of
// every call so sessions can be audited after the fact.
struct SessionState {
  std::string id;
  Scene scene;
  int iteration = 0;
  Rng rng{0};
  std::vector<nlohmann::ordered_json> log;
};

using ToolHandler =
    std::function<nlohmann::ordered_json(SessionState&, const nlohmann::ordered_json&)>;

class ToolServer {
 public:
  using json = nlohmann::ordered_json;

  void register_tool(const ToolDescriptor& desc, ToolHandler handler) {
    for (const auto& t : tools_)
      if (t.first.name == desc.name)
        fail(Errc::DuplicateName, "tool already registered: " + desc.name);
    tools_.emplace_back(desc, std::move(handler));
  }

  std::vector<ToolDescriptor> list_tools() const {
    std::vector<ToolDescriptor> out;
    for (const auto& t : tools_) out.push_back(t.first);
    return out;
  }

  bool has_tool(const std::string& name) const {
    for (const auto& t : tools_)
      if (t.first.name == name) return true;
    return false;
  }

  // Invoke a tool directly (same path tools/call takes after unwrapping).
  // Throws Error on application failure.
  json call_tool(const std::string& session_id, const std::string& name,
                 const json& args) {
    const ToolHandler* handler = nullptr;
    for (const auto& t : tools_)
      if (t.first.name == name) handler = &t.second;
    if (!handler) fail(Errc::InvalidArgument, "unknown tool: " + name);
    SessionState& st = session(session_id);
    std::lock_guard<std::mutex> lock(session_lock(session_id));
    st.iteration += 1;
    json result = (*handler)(st, args);
    st.log.push_back(json{{"iteration", st.iteration},
                          {"tool", name},
                          {"digest", hex64(fnv1a64(result.dump()))}});
    return result;
  }

  SessionState& session(const std::string& id) {
    std::lock_guard<std::mutex> lock(map_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) {
      it = sessions_.emplace(id, SessionState{}).first;
      it->second.id = id;
    }
    return it->second;
  }

  void erase_session(const std::string& id) {
    std::lock_guard<std::mutex> lock(map_mutex_);
    sessions_.erase(id);
  }

  bool shutdown_requested() const { return shutdown_.load(); }
  void request_shutdown() { shutdown_.store(true); }

  // Raw frame in, raw frame out. Returns "" for notifications (no id).
  std::string handle_request(const std::string& raw) {
    json req;
    try {
      req = json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
      return error_frame(nullptr, kRpcParseError,
                         std::string("parse error: ") + e.what())
          .dump();
    }
    json resp = handle(req);
    return resp.is_null() ? std::string() : resp.dump();
  }

  // Parsed request in, response document out (null for notifications).
  // Malformed requests are answered even without an id (echoed as null);
  // well-formed requests without an id are notifications and stay silent.
  json handle(const json& req) {
    if (!req.is_object())
      return error_frame(nullptr, kRpcInvalidRequest, "request must be an object");
    json id;
    bool has_id = req.contains("id");
    if (has_id) id = req.at("id");
    if (!req.contains("jsonrpc") || req.at("jsonrpc") != "2.0")
      return error_frame(id, kRpcInvalidRequest, "missing jsonrpc: \"2.0\"");
    if (!req.contains("method") || !req.at("method").is_string())
      return error_frame(id, kRpcInvalidRequest, "method must be a string");
    std::string method = req.at("method");
    json params = req.value("params", json::object());

    json resp;
    if (method == "initialize") {
      resp = result_frame(id, json{{"protocolVersion", kProtocolVersion},
                                   {"serverInfo", json{{"name", kServerName},
                                                       {"version", kServerVersion}}},
                                   {"capabilities", json{{"tools", json::object()}}}});
    } else if (method == "tools/list") {
      json tools = json::array();
      for (const auto& t : tools_) tools.push_back(to_json(t.first));
      resp = result_frame(id, json{{"tools", tools}});
    } else if (method == "tools/call") {
      resp = handle_call(id, params);
    } else if (method == "shutdown") {
      request_shutdown();
      resp = result_frame(id, json{{"ok", true}});
    } else {
      resp = error_frame(id, kRpcMethodNotFound, "method not found: " + method);
    }
    // Notifications never get a response frame, not even on errors.
    return has_id ? resp : json();
  }

 private:
  json handle_call(const json& id, const json& params) {
    if (!params.is_object() || !params.contains("name") ||
        !params.at("name").is_string())
      return error_frame(id, kRpcInvalidParams, "params.name must be a string");
    std::string name = params.at("name");
    if (!has_tool(name))
      return error_frame(id, kRpcInvalidParams, "unknown tool: " + name);
    json args = params.value("arguments", json::object());
    std::string session_id = params.value("session", "default");
    try {
      return result_frame(id, call_tool(session_id, name, args));
    } catch (const Error& e) {
      json err = error_frame(id, kRpcAppError, e.what());
      err["error"]["data"] = json{{"type", errc_name(e.code())}};
      return err;
    } catch (const nlohmann::json::exception& e) {
      return error_frame(id, kRpcInvalidParams,
                         std::string("bad arguments: ") + e.what());
    } catch (const std::exception& e) {
      return error_frame(id, kRpcAppError, e.what());
    }
  }

  static json result_frame(const json& id, json result) {
    return json{{"jsonrpc", "2.0"}, {"id", id}, {"result", std::move(result)}};
  }

  static json error_frame(const json& id, int code, std::string msg) {
    return json{{"jsonrpc", "2.0"},
                {"id", id},
                {"error", json{{"code", code}, {"message", std::move(msg)}}}};
  }

  std::mutex& session_lock(const std::string& id) {
    std::lock_guard<std::mutex> lock(map_mutex_);
    auto& slot = locks_[id];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
  }

  std::vector<std::pair<ToolDescriptor, ToolHandler>> tools_;
  std::map<std::string, SessionState> sessions_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
  std::mutex map_mutex_;
  std::atomic<bool> shutdown_{false};
};

// ---------------------------------------------------------------------------
// Serve loops

// Newline-delimited frames on the given streams until EOF or shutdown.
inline int run_stdio(ToolServer& server, std::istream& in, std::ostream& out) {
  std::string line;
  while (!server.shutdown_requested() && std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::string resp = server.handle_request(line);
    if (!resp.empty()) out << resp << "\n" << std::flush;
  }
  return 0;
}

namespace detail {

// Incremental line reader over a file descriptor.
class FdLineReader {
 public:
  explicit FdLineReader(int fd) : fd_(fd) {}

  std::optional<std::string> next() {
    for (;;) {
      size_t nl = buf_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      char chunk[4096];
      ssize_t n = ::read(fd_, chunk, sizeof(chunk));
      if (n <= 0) {
        if (buf_.empty()) return std::nullopt;
        std::string line = std::move(buf_);
        buf_.clear();
        return line;
      }
      buf_.append(chunk, size_t(n));
    }
  }

 private:
  int fd_;
  std::string buf_;
};

inline void write_all(int fd, const std::string& bytes) {
  size_t off = 0;
  while (off < bytes.size()) {
    ssize_t n = ::write(fd, bytes.data() + off, bytes.size() - off);
    if (n <= 0) {
      if (errno == EINTR) continue;
      fail(Errc::BindFailure, std::string("socket write: ") + std::strerror(errno));
    }
    off += size_t(n);
  }
}

}  // namespace detail

// TCP front end on 127.0.0.1. Binds in the constructor so an occupied port
// fails fast; pass port 0 to let the kernel pick one (see port()).
class TcpServer {
 public:
  TcpServer(ToolServer& server, uint16_t port) : server_(server) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0)
      fail(Errc::BindFailure, std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      int err = errno;
      ::close(listen_fd_);
      listen_fd_ = -1;
      fail(Errc::BindFailure, "bind port " + std::to_string(port) + ": " +
                                  std::strerror(err));
    }
    if (::listen(listen_fd_, 8) != 0) {
      int err = errno;
      ::close(listen_fd_);
      listen_fd_ = -1;
      fail(Errc::BindFailure, std::string("listen: ") + std::strerror(err));
    }
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
  }

  ~TcpServer() { stop(); }

  uint16_t port() const { return port_; }

  // Blocking accept loop; returns once shutdown is requested or stop() runs.
  void run() {
    while (!stopping_.load() && !server_.shutdown_requested()) {
      int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd < 0) {
        if (errno == EINTR) continue;
        break;  // listener closed
      }
      std::lock_guard<std::mutex> lock(threads_mutex_);
      workers_.emplace_back([this, fd] { serve_connection(fd); });
    }
  }

  void start() {
    accept_thread_ = std::thread([this] { run(); });
  }

  void stop() {
    bool expected = false;
    if (!stopping_.compare_exchange_strong(expected, true)) {
      if (accept_thread_.joinable()) accept_thread_.join();
      return;
    }
    if (listen_fd_ >= 0) {
      ::shutdown(listen_fd_, SHUT_RDWR);
      ::close(listen_fd_);
      listen_fd_ = -1;
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    std::lock_guard<std::mutex> lock(threads_mutex_);
    for (auto& t : workers_)
      if (t.joinable()) t.join();
    workers_.clear();
  }

 private:
  void serve_connection(int fd) {
    detail::FdLineReader reader(fd);
    while (!server_.shutdown_requested()) {
      std::optional<std::string> line = reader.next();
      if (!line) break;
      if (trim(*line).empty()) continue;
      std::string resp = server_.handle_request(*line);
      if (!resp.empty()) detail::write_all(fd, resp + "\n");
    }
    ::close(fd);
  }

  ToolServer& server_;
  int listen_fd_ = -1;
  uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::mutex threads_mutex_;
  std::vector<std::thread> workers_;
};

// ---------------------------------------------------------------------------
// Client side

class LineTransport {
 public:
  virtual ~LineTransport() = default;
  virtual void send_line(const std::string& line) = 0;
  virtual std::optional<std::string> recv_line() = 0;
};

// Frames go straight into an in-process server. Using real frame bytes here
// keeps local and remote code paths literally identical.
class LoopbackTransport : public LineTransport {
 public:
  explicit LoopbackTransport(ToolServer& server) : server_(server) {}

  void send_line(const std::string& line) override {
    std::string resp = server_.handle_request(line);
    if (!resp.empty()) pending_.push_back(resp);
  }

  std::optional<std::string> recv_line() override {
    if (pending_.empty()) return std::nullopt;
    std::string out = pending_.front();
    pending_.erase(pending_.begin());
    return out;
  }

 private:
  ToolServer& server_;
  std::vector<std::string> pending_;
};

class TcpTransport : public LineTransport {
 public:
  TcpTransport(const std::string& host, uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0)
      fail(Errc::BindFailure, std::string("socket: ") + std::strerror(errno));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
      fail(Errc::InvalidArgument, "bad IPv4 address: " + host);
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      int err = errno;
      ::close(fd_);
      fd_ = -1;
      fail(Errc::BindFailure, "connect " + host + ":" + std::to_string(port) +
                                  ": " + std::strerror(err));
    }
    reader_ = std::make_unique<detail::FdLineReader>(fd_);
  }

  ~TcpTransport() override {
    if (fd_ >= 0) ::close(fd_);
  }

  void send_line(const std::string& line) override {
    detail::write_all(fd_, line + "\n");
  }

  std::optional<std::string> recv_line() override { return reader_->next(); }

 private:
  int fd_ = -1;
  std::unique_ptr<detail::FdLineReader> reader_;
};

// Child process speaking frames on its stdin/stdout (e.g. `serve --stdio`).
class PipeTransport : public LineTransport {
 public:
  explicit PipeTransport(const std::vector<std::string>& argv) {
    if (argv.empty()) fail(Errc::InvalidArgument, "empty argv");
    int to_child[2], from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0)
      fail(Errc::BindFailure, std::string("pipe: ") + std::strerror(errno));
    pid_ = ::fork();
    if (pid_ < 0) fail(Errc::BindFailure, std::string("fork: ") + std::strerror(errno));
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      std::vector<char*> cargv;
      for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
      cargv.push_back(nullptr);
      ::execvp(cargv[0], cargv.data());
      std::perror("execvp");
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
    reader_ = std::make_unique<detail::FdLineReader>(read_fd_);
  }

  ~PipeTransport() override { wait(); }

  void send_line(const std::string& line) override {
    detail::write_all(write_fd_, line + "\n");
  }

  std::optional<std::string> recv_line() override { return reader_->next(); }

  // Close the child's stdin (EOF ends its serve loop) and reap it.
  int wait() {
    if (pid_ < 0) return exit_code_;
    if (write_fd_ >= 0) {
      ::close(write_fd_);
      write_fd_ = -1;
    }
    int status = 0;
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
    if (read_fd_ >= 0) {
      ::close(read_fd_);
      read_fd_ = -1;
    }
    exit_code_ = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return exit_code_;
  }

 private:
  pid_t pid_ = -1;
  int write_fd_ = -1;
  int read_fd_ = -1;
  int exit_code_ = 0;
  std::unique_ptr<detail::FdLineReader> reader_;
};

// Thin JSON-RPC client. Application errors carried in error.data.type are
// rethrown as the same Errc the server-side handler raised, so callers cannot
// tell a remote tool from a local one.
class JsonRpcClient {
 public:
  explicit JsonRpcClient(LineTransport& transport) : transport_(transport) {}

  nlohmann::ordered_json call(const std::string& method,
                              const nlohmann::ordered_json& params) {
    int64_t id = next_id_++;
    nlohmann::ordered_json req{{"jsonrpc", "2.0"}, {"id", id}, {"method", method}};
    if (!params.is_null()) req["params"] = params;
    transport_.send_line(req.dump());
    std::optional<std::string> line = transport_.recv_line();
    if (!line) fail(Errc::BindFailure, "connection closed mid-call");
    nlohmann::ordered_json resp = nlohmann::ordered_json::parse(*line);
    if (resp.value("id", nlohmann::ordered_json()) != nlohmann::ordered_json(id))
      fail(Errc::ParseError, "response id mismatch");
    if (resp.contains("error")) {
      const auto& err = resp.at("error");
      std::string msg = err.value("message", "rpc error");
      if (err.contains("data") && err.at("data").contains("type"))
        throw Error(errc_from_name(err.at("data").at("type")), msg);
      fail(Errc::InvalidArgument,
           "rpc error " + std::to_string(int(err.value("code", 0))) + ": " + msg);
    }
    return resp.at("result");
  }

  nlohmann::ordered_json initialize() {
    return call("initialize", nlohmann::ordered_json::object());
  }

  std::vector<ToolDescriptor> list_tools() {
    nlohmann::ordered_json r = call("tools/list", nlohmann::ordered_json::object());
    std::vector<ToolDescriptor> out;
    for (const auto& t : r.at("tools"))
      out.push_back({t.at("name"), t.at("description"), t.at("inputSchema"),
                     t.at("outputSchema")});
    return out;
  }

  nlohmann::ordered_json call_tool(const std::string& name,
                                   const nlohmann::ordered_json& args,
                                   const std::string& session = "default") {
    return call("tools/call", nlohmann::ordered_json{{"name", name},
                                                     {"arguments", args},
                                                     {"session", session}});
  }

  void shutdown() { call("shutdown", nlohmann::ordered_json::object()); }

 private:
  LineTransport& transport_;
  int64_t next_id_ = 1;
};

}  // namespace sageforge
