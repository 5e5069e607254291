// POSIX transport for the external predictor: a child process over pipes or
// a TCP connection, both carrying newline-delimited JSON.

#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "percept/predictor.hpp"

namespace percept {

namespace {

constexpr std::size_t kMaxLine = 16u << 20;

[[noreturn]] void transport_error(const std::string& what) {
  throw PredictorError(PredictorErrorKind::transport, what + ": " + std::strerror(errno));
}

void ignore_sigpipe() {
  static const bool once = [] {
    std::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)once;
}

int connect_tcp(const std::string& host, const std::string& port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0)
    throw PredictorError(PredictorErrorKind::transport, "cannot resolve " + host + ":" + port + ": " + gai_strerror(rc));
  int fd = -1;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  freeaddrinfo(res);
  if (fd < 0) transport_error("cannot connect to " + host + ":" + port);
  return fd;
}

}  // namespace

ExternalPredictor::ExternalPredictor(std::string endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {
  ignore_sigpipe();
  connect();
  try {
    send_line(nlohmann::json{{"type", "hello"}, {"protocol_version", kProtocolVersion}}.dump());
    const std::string line = read_line();
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw PredictorError(PredictorErrorKind::malformed_json, "malformed JSON in handshake", line);
    }
    if (!doc.is_object() || doc.value("type", std::string{}) != "hello" ||
        !doc.contains("protocol_version") || doc["protocol_version"] != kProtocolVersion)
      throw PredictorError(PredictorErrorKind::protocol, "handshake failed: expected hello with protocol_version 1",
                           line);
  } catch (...) {
    close_all();
    throw;
  }
}

ExternalPredictor::~ExternalPredictor() { close_all(); }

void ExternalPredictor::connect() {
  const std::string tcp = "tcp:";
  if (endpoint_.rfind(tcp, 0) == 0) {
    const std::string rest = endpoint_.substr(tcp.size());
    const auto colon = rest.rfind(':');
    const std::string host = colon == std::string::npos ? "127.0.0.1" : rest.substr(0, colon);
    const std::string port = colon == std::string::npos ? rest : rest.substr(colon + 1);
    read_fd_ = connect_tcp(host, port);
    write_fd_ = ::dup(read_fd_);
    return;
  }

  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0) transport_error("pipe");
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    transport_error("pipe");
  }
  const pid_t pid = ::fork();
  if (pid < 0) transport_error("fork");
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", endpoint_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  ::fcntl(to_child[1], F_SETFD, FD_CLOEXEC);
  ::fcntl(from_child[0], F_SETFD, FD_CLOEXEC);
  write_fd_ = to_child[1];
  read_fd_ = from_child[0];
  child_pid_ = pid;
}

void ExternalPredictor::send_line(const std::string& line) {
  std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(write_fd_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      transport_error("write to predictor failed");
    }
    off += static_cast<std::size_t>(n);
  }
}

std::string ExternalPredictor::read_line() {
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    if (buffer_.size() > kMaxLine) throw PredictorError(PredictorErrorKind::protocol, "response line too long");
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0)
      throw PredictorError(PredictorErrorKind::timeout,
                           "predictor timed out after " + std::to_string(timeout_.count()) + " ms", buffer_);
    pollfd pfd{read_fd_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      transport_error("poll failed");
    }
    if (rc == 0) continue;
    char chunk[4096];
    const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      transport_error("read from predictor failed");
    }
    if (n == 0) throw PredictorError(PredictorErrorKind::transport, "predictor closed the connection", buffer_);
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void ExternalPredictor::close_all() {
  if (write_fd_ >= 0) ::close(write_fd_);
  if (read_fd_ >= 0) ::close(read_fd_);
  write_fd_ = read_fd_ = -1;
  if (child_pid_ > 0) {
    // Give the child a moment to exit on EOF before forcing it.
    int status = 0;
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(child_pid_, &status, WNOHANG) != 0) {
        child_pid_ = -1;
        return;
      }
      ::usleep(10000);
    }
    ::kill(child_pid_, SIGKILL);
    ::waitpid(child_pid_, &status, 0);
    child_pid_ = -1;
  }
}

}  // namespace percept
