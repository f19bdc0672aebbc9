// SPDX-License-Identifier: Apache-2.0
//
// Service mode: a workspace exposed over TCP with the newline-delimited
// protocol. A line is either a UNI envelope {"domain_id", "message"} that is
// answered with the UniResponse line, or a lifecycle operation {"op", ...}.
// Requests are processed one at a time across all connections.
#pragma once

#include <atomic>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "tsnfv/uni.hpp"
#include "tsnfv/workspace.hpp"

namespace tsnfv {

struct ListenAddress {
  std::string host = "127.0.0.1";
  int port = 0;

  /// "host:port", ":port" or "port". Throws ValidationError.
  static ListenAddress parse(std::string_view text);
};

/// Answers one request line; the returned line ends with '\n'. Never throws
/// for bad input: malformed lines get a failed/malformed response.
std::string handle_service_line(Workspace& ws, std::string_view line);

class Server {
 public:
  /// Binds immediately; throws BindError.
  Server(Workspace& ws, const std::string& listen, std::optional<std::filesystem::path> state_file = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Bound port (useful after binding port 0).
  int port() const { return port_; }

  /// Serves until `stop` becomes true, then closes every connection.
  void run(const std::atomic<bool>& stop);

 private:
  void serve_connection(int fd, const std::atomic<bool>& stop);

  Workspace* ws_;
  std::optional<std::filesystem::path> state_file_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::mutex mutex_;
};

/// Blocking line-oriented TCP client.
class LineClient {
 public:
  /// Throws TransportError.
  explicit LineClient(const std::string& address);
  ~LineClient();
  LineClient(const LineClient&) = delete;
  LineClient& operator=(const LineClient&) = delete;

  /// Sends `line` (a trailing '\n' is added when missing) and returns the
  /// reply line including its '\n'. Throws TransportError.
  std::string request(std::string_view line);

 private:
  int fd_ = -1;
  std::string buffer_;
};

/// UNI channel to CNCs hosted by a remote `serve` process.
class TcpChannel final : public UniChannel {
 public:
  explicit TcpChannel(std::string address) : address_(std::move(address)) {}
  UniResponse exchange(const std::string& domain_id, const UniRequest& request) override;

 private:
  std::string address_;
  std::optional<LineClient> client_;
  std::mutex mutex_;
};

}  // namespace tsnfv
