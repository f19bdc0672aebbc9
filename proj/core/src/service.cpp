// SPDX-License-Identifier: Apache-2.0
#include "tsnfv/service.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>
#include <vector>

#include "tsnfv/descriptors.hpp"
#include "tsnfv/error.hpp"
#include "tsnfv/json_io.hpp"

namespace tsnfv {

using io::Json;

namespace {

constexpr std::size_t kMaxLine = 16u << 20;
constexpr int kPollMs = 100;

std::string error_name(const std::exception& e) {
  if (dynamic_cast<const AdmissionFailed*>(&e)) return "admission_failed";
  if (dynamic_cast<const CapabilityError*>(&e)) return "capability";
  if (dynamic_cast<const UpdateFailed*>(&e)) return "update_failed";
  if (dynamic_cast<const UnknownInstance*>(&e)) return "unknown_instance";
  if (dynamic_cast<const AlreadyTerminated*>(&e)) return "already_terminated";
  if (dynamic_cast<const InstanceNotActive*>(&e)) return "instance_not_active";
  if (dynamic_cast<const PreconditionError*>(&e)) return "precondition";
  if (dynamic_cast<const SimConfigError*>(&e)) return "sim_config";
  if (dynamic_cast<const ParseError*>(&e)) return "parse";
  if (dynamic_cast<const ValidationError*>(&e)) return "validation";
  if (dynamic_cast<const NoPath*>(&e)) return "no_path";
  return "error";
}

std::string failed_line(const std::exception& e) {
  return Json{{"status", "failed"}, {"error", error_name(e)}, {"exit_code", exit_code_of(e)}, {"detail", e.what()}}
             .dump() +
         "\n";
}

std::string lifecycle(Workspace& ws, const Json& j) {
  constexpr std::string_view ctx = "lifecycle request";
  try {
    const auto op = io::get<std::string>(j, "op", ctx);
    if (op == "instantiate") {
      const NsInstance& inst =
          ws.instantiate(parse_nsd(io::field(j, "nsd", ctx)), parse_placement(io::field(j, "placement", ctx)));
      return Json{{"status", "ok"}, {"instance", to_json(inst)}}.dump() + "\n";
    }
    if (op == "terminate") {
      const NsInstance& inst = ws.terminate(io::get<std::string>(j, "instance_id", ctx));
      return Json{{"status", "ok"}, {"instance", to_json(inst)}}.dump() + "\n";
    }
    if (op == "update") {
      const NsInstance& inst = ws.update(io::get<std::string>(j, "instance_id", ctx),
                                         parse_nsd(io::field(j, "nsd", ctx)),
                                         parse_placement(io::field(j, "placement", ctx)));
      return Json{{"status", "ok"}, {"instance", to_json(inst)}}.dump() + "\n";
    }
    if (op == "verify") {
      SimConfig cfg;
      if (auto b = io::get_optional<double>(j, "bg_load", ctx)) cfg.bg_load = *b;
      if (auto s = io::get_optional<std::uint64_t>(j, "seed", ctx)) cfg.seed = *s;
      const VerifyResult r = ws.verify(io::get<std::string>(j, "instance_id", ctx), cfg);
      return Json{{"status", r.pass ? "ok" : "failed"}, {"result", to_json(r)}}.dump() + "\n";
    }
    if (op == "state") return Json{{"status", "ok"}, {"state", ws.to_json()}}.dump() + "\n";
    throw ValidationError("unknown op '" + op + "'");
  } catch (const Error& e) {
    return failed_line(e);
  }
}

void write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("send failed: ") + std::strerror(errno));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

int connect_to(const std::string& address) {
  const ListenAddress a = ListenAddress::parse(address);
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(a.port);
  if (::getaddrinfo(a.host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr)
    throw TransportError("cannot resolve " + address);
  const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0) {
    ::freeaddrinfo(res);
    throw TransportError("socket() failed");
  }
  if (::connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
    const std::string why = std::strerror(errno);
    ::freeaddrinfo(res);
    ::close(fd);
    throw TransportError("cannot connect to " + address + ": " + why);
  }
  ::freeaddrinfo(res);
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return fd;
}

}  // namespace

ListenAddress ListenAddress::parse(std::string_view text) {
  ListenAddress a;
  std::string_view port = text;
  if (const auto colon = text.rfind(':'); colon != std::string_view::npos) {
    if (colon > 0) a.host = std::string(text.substr(0, colon));
    port = text.substr(colon + 1);
  }
  if (port.empty()) throw ValidationError("listen address '" + std::string(text) + "' has no port");
  int value = 0;
  for (char c : port) {
    if (c < '0' || c > '9') throw ValidationError("bad port in '" + std::string(text) + "'");
    value = value * 10 + (c - '0');
    if (value > 65535) throw ValidationError("port out of range in '" + std::string(text) + "'");
  }
  a.port = value;
  if (a.host == "localhost") a.host = "127.0.0.1";
  return a;
}

std::string handle_service_line(Workspace& ws, std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  Json j;
  try {
    j = Json::parse(line.begin(), line.end());
  } catch (const nlohmann::json::exception& e) {
    UniResponse r;
    r.cause = UniCause::malformed;
    r.detail = std::string("malformed line: ") + e.what();
    return encode(r);
  }
  if (j.is_object() && j.contains("op")) return lifecycle(ws, j);

  UniResponse bad;
  bad.cause = UniCause::malformed;
  try {
    if (!j.is_object()) throw DecodeError("line is not an object");
    const auto domain = io::get<std::string>(j, "domain_id", "uni envelope");
    UniRequest req;
    try {
      req = request_from_json(io::field(j, "message", "uni envelope"));
    } catch (const DecodeError&) {
      throw;
    } catch (const Error& e) {
      throw DecodeError(e.what());
    }
    bad.request_id = request_id_of(req);
    return encode(ws.dispatch(req, domain));
  } catch (const Error& e) {
    if (j.is_object()) {
      if (auto m = j.find("message"); m != j.end() && m->is_object()) {
        if (auto id = m->find("request_id"); id != m->end() && id->is_number_unsigned())
          bad.request_id = id->get<RequestId>();
      }
    }
    bad.detail = e.what();
    return encode(bad);
  }
}

Server::Server(Workspace& ws, const std::string& listen, std::optional<std::filesystem::path> state_file)
    : ws_(&ws), state_file_(std::move(state_file)) {
  const ListenAddress a = ListenAddress::parse(listen);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(a.port));
  if (a.host.empty() || a.host == "0.0.0.0" || a.host == "*") {
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
  } else if (::inet_pton(AF_INET, a.host.c_str(), &addr.sin_addr) != 1) {
    throw BindError("cannot bind to host '" + a.host + "' (IPv4 literal expected)");
  }
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw BindError("socket() failed");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 16) != 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw BindError("cannot listen on " + listen + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

Server::~Server() {
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void Server::run(const std::atomic<bool>& stop) {
  std::vector<std::thread> workers;
  while (!stop.load()) {
    pollfd p{listen_fd_, POLLIN, 0};
    const int n = ::poll(&p, 1, kPollMs);
    if (n <= 0 || (p.revents & POLLIN) == 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    workers.emplace_back([this, fd, &stop] { serve_connection(fd, stop); });
  }
  for (auto& t : workers) t.join();
}

void Server::serve_connection(int fd, const std::atomic<bool>& stop) {
  std::string buffer;
  char chunk[4096];
  try {
    while (!stop.load()) {
      pollfd p{fd, POLLIN, 0};
      const int n = ::poll(&p, 1, kPollMs);
      if (n < 0 && errno != EINTR) break;
      if (n <= 0) continue;
      const ssize_t got = ::recv(fd, chunk, sizeof chunk, 0);
      if (got < 0 && errno == EINTR) continue;
      if (got <= 0) break;
      buffer.append(chunk, static_cast<std::size_t>(got));
      if (buffer.size() > kMaxLine && buffer.find('\n') == std::string::npos) break;
      std::size_t nl;
      while ((nl = buffer.find('\n')) != std::string::npos) {
        const std::string line = buffer.substr(0, nl);
        buffer.erase(0, nl + 1);
        if (line.empty()) continue;
        std::string reply;
        {
          std::lock_guard<std::mutex> lock(mutex_);
          reply = handle_service_line(*ws_, line);
          if (state_file_) ws_->save(*state_file_);
        }
        write_all(fd, reply);
      }
    }
  } catch (const std::exception&) {
    // connection dropped; the workspace stays consistent
  }
  ::close(fd);
}

LineClient::LineClient(const std::string& address) : fd_(connect_to(address)) {}

LineClient::~LineClient() {
  if (fd_ >= 0) ::close(fd_);
}

std::string LineClient::request(std::string_view line) {
  std::string out(line);
  if (out.empty() || out.back() != '\n') out.push_back('\n');
  write_all(fd_, out);
  char chunk[4096];
  std::size_t nl;
  while ((nl = buffer_.find('\n')) == std::string::npos) {
    const ssize_t got = ::recv(fd_, chunk, sizeof chunk, 0);
    if (got < 0 && errno == EINTR) continue;
    if (got <= 0) throw TransportError("connection closed before a reply arrived");
    buffer_.append(chunk, static_cast<std::size_t>(got));
  }
  std::string reply = buffer_.substr(0, nl + 1);
  buffer_.erase(0, nl + 1);
  return reply;
}

UniResponse TcpChannel::exchange(const std::string& domain_id, const UniRequest& request) {
  std::lock_guard<std::mutex> lock(mutex_);
  try {
    if (!client_) client_.emplace(address_);
    const std::string reply = client_->request(encode_envelope(domain_id, request));
    return decode_response(reply);
  } catch (const DecodeError& e) {
    client_.reset();
    throw TransportError(std::string("bad reply from ") + address_ + ": " + e.what());
  } catch (const TransportError&) {
    client_.reset();
    throw;
  }
}

}  // namespace tsnfv
