#include "limbswap/server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <openssl/evp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <map>
#include <stdexcept>

#include "limbswap/error.hpp"

namespace limbswap {

namespace pr = protocol;

// ---------------------------------------------------------------------------- SessionRunner

SessionRunner::SessionRunner(const Catalog& catalog, SessionConfig config)
    : catalog_(&catalog), state_(create_session(config, catalog)) {}

void SessionRunner::drop(std::string detail) {
  state_.pending_events.push_back({"DroppedInput", state_.tick, std::nullopt, std::nullopt, std::move(detail)});
}

void SessionRunner::push_pose(const HandPoseFrame& frame) {
  if (buffer_.size() >= kMaxBufferedPoses) {
    buffer_.pop_front();
    drop("input buffer full");
  }
  buffer_.push_back(frame);
}

std::vector<pr::ServerMessage> SessionRunner::tick() {
  const double now = static_cast<double>(state_.tick) * (1.0 / state_.config.tick_rate_hz);

  std::deque<HandPoseFrame> waiting;
  std::optional<HandPoseFrame> newest;
  for (auto& frame : buffer_) {
    if (!std::isfinite(frame.timestamp_s)) {
      drop("non-finite timestamp");
    } else if (frame.timestamp_s > now) {
      waiting.push_back(std::move(frame));
    } else if (!newest || frame.timestamp_s >= newest->timestamp_s) {
      if (newest) drop("superseded by newer input");
      newest = std::move(frame);
    } else {
      drop("superseded by newer input");
    }
  }
  buffer_ = std::move(waiting);

  StepResult result = step(std::move(state_), newest);
  state_ = std::move(result.state);

  std::vector<pr::ServerMessage> out;
  if (!result.frame) return out;
  const RenderFrame& frame = *result.frame;
  for (const auto& event : frame.events) out.emplace_back(pr::EventMessage{event});
  const bool metrics_changed = frame.metrics_snapshot != last_metrics_;
  last_metrics_ = frame.metrics_snapshot;
  out.insert(out.begin(), pr::FrameMessage{std::move(*result.frame)});
  if (metrics_changed && last_metrics_) out.emplace_back(pr::MetricsMessage{*last_metrics_});
  return out;
}

void SessionRunner::rebuild(SessionConfig config, bool keep_hand) {
  SessionState next = create_session(config, *catalog_, state_.tick);
  if (keep_hand && state_.has_input) {
    next.has_input = true;
    next.latest_input = state_.latest_input;
    next.segment_start = state_.segment_start;
    next.current_pose = state_.current_pose;
    next.detector = state_.detector;
    next.smoothed = retarget(state_.current_pose, next.spec);
  }
  next.pending_events = std::move(state_.pending_events);
  state_ = std::move(next);
  last_metrics_.reset();
}

std::vector<pr::ServerMessage> SessionRunner::handle(const pr::ClientMessage& message) {
  std::vector<pr::ServerMessage> out;
  if (const auto* m = std::get_if<pr::Pose>(&message)) {
    push_pose(m->frame);
  } else if (const auto* m = std::get_if<pr::SelectProsthesis>(&message)) {
    if (find_spec(*catalog_, m->id) == nullptr) {
      out.emplace_back(pr::ErrorMessage{pr::Code::UnknownProsthesis, "unknown prosthesis '" + m->id + "'"});
    } else {
      SessionConfig config = state_.config;
      config.prosthesis_id = m->id;
      rebuild(std::move(config), true);
    }
  } else if (const auto* m = std::get_if<pr::SelectTask>(&message)) {
    try {
      SessionConfig config = state_.config;
      config.task = task_config_from_json(m->id, m->config);
      rebuild(std::move(config), true);
    } catch (const Error& e) {
      const auto code = e.code() == ErrorCode::UnknownTask ? pr::Code::UnknownTask : pr::Code::BadConfig;
      out.emplace_back(pr::ErrorMessage{code, e.detail()});
    }
  } else if (std::holds_alternative<pr::Reset>(message)) {
    buffer_.clear();
    rebuild(state_.config, false);
  } else if (std::holds_alternative<pr::ListProstheses>(message)) {
    out.emplace_back(pr::CatalogMessage{pr::summarize(*catalog_)});
  } else {
    out.emplace_back(pr::ErrorMessage{pr::Code::UnknownState, "hello already received"});
  }
  return out;
}

pr::HelloAck SessionRunner::hello_ack() const {
  pr::HelloAck ack;
  ack.catalog = pr::summarize(*catalog_);
  ack.tasks = {"ball", "draw"};
  ack.prosthesis = state_.config.prosthesis_id;
  ack.task = std::string(task_id(state_.config.task));
  ack.tick_rate_hz = state_.config.tick_rate_hz;
  ack.output_frame_rate_hz = state_.config.output_frame_rate_hz;
  return ack;
}

// ---------------------------------------------------------------------------- WebSocket framing

namespace ws {

std::string accept_key(std::string_view client_key) {
  static constexpr std::string_view kGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
  const std::string input = std::string(client_key) + std::string(kGuid);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(input.data(), input.size(), digest, &length, EVP_sha1(), nullptr) != 1) {
    throw std::runtime_error("SHA-1 digest failed");
  }
  std::string encoded(4 * ((length + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(encoded.data()), digest, static_cast<int>(length));
  encoded.resize(static_cast<std::size_t>(n));
  return encoded;
}

std::string encode_frame(std::string_view payload, std::uint8_t opcode) {
  std::string out;
  out.push_back(static_cast<char>(0x80 | (opcode & 0x0f)));
  const std::uint64_t n = payload.size();
  if (n < 126) {
    out.push_back(static_cast<char>(n));
  } else if (n < 65536) {
    out.push_back(static_cast<char>(126));
    out.push_back(static_cast<char>((n >> 8) & 0xff));
    out.push_back(static_cast<char>(n & 0xff));
  } else {
    out.push_back(static_cast<char>(127));
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((n >> shift) & 0xff));
  }
  out.append(payload);
  return out;
}

std::vector<Decoder::Frame> Decoder::feed(std::string_view bytes) {
  buffer_.append(bytes);
  std::vector<Frame> out;
  for (;;) {
    if (buffer_.size() < 2) break;
    const auto byte = [this](std::size_t i) { return static_cast<std::uint8_t>(buffer_[i]); };
    const bool fin = (byte(0) & 0x80) != 0;
    const std::uint8_t opcode = byte(0) & 0x0f;
    if ((byte(1) & 0x80) == 0) throw std::runtime_error("client frames must be masked");
    std::uint64_t length = byte(1) & 0x7f;
    std::size_t pos = 2;
    if (length == 126) {
      if (buffer_.size() < 4) break;
      length = (std::uint64_t{byte(2)} << 8) | byte(3);
      pos = 4;
    } else if (length == 127) {
      if (buffer_.size() < 10) break;
      length = 0;
      for (std::size_t i = 2; i < 10; ++i) length = (length << 8) | byte(i);
      pos = 10;
    }
    if (length > kMaxMessage) throw std::runtime_error("frame too large");
    if (buffer_.size() < pos + 4 + length) break;
    const std::size_t mask_at = pos;
    pos += 4;
    std::string payload = buffer_.substr(pos, static_cast<std::size_t>(length));
    for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<char>(payload[i] ^ buffer_[mask_at + i % 4]);
    buffer_.erase(0, pos + static_cast<std::size_t>(length));

    if (opcode >= 8) {
      out.push_back({opcode, std::move(payload)});
      continue;
    }
    if (opcode == 0) {
      if (partial_opcode_ == 0) throw std::runtime_error("continuation without a message");
      partial_ += payload;
    } else {
      if (partial_opcode_ != 0) throw std::runtime_error("new message inside a fragmented one");
      partial_opcode_ = opcode;
      partial_ = std::move(payload);
    }
    if (partial_.size() > kMaxMessage) throw std::runtime_error("message too large");
    if (fin) {
      out.push_back({partial_opcode_, std::move(partial_)});
      partial_.clear();
      partial_opcode_ = 0;
    }
  }
  return out;
}

}  // namespace ws

// ---------------------------------------------------------------------------- Server

std::pair<std::string, std::uint16_t> parse_bind(std::string_view bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string_view::npos) throw Error(ErrorCode::BadConfig, "bind address must be host:port");
  std::string host(bind.substr(0, colon));
  const std::string port_text(bind.substr(colon + 1));
  if (host.empty()) host = "127.0.0.1";
  if (port_text.empty() || port_text.find_first_not_of("0123456789") != std::string::npos || port_text.size() > 5) {
    throw Error(ErrorCode::BadConfig, "bad port '" + port_text + "'");
  }
  const int port = std::stoi(port_text);
  if (port > 65535) throw Error(ErrorCode::BadConfig, "port out of range: " + port_text);
  return {host, static_cast<std::uint16_t>(port)};
}

Server::Server(Catalog catalog, ServerOptions options) : catalog_(std::move(catalog)), options_(std::move(options)) {
  if (!(options_.time_scale > 0.0) || !std::isfinite(options_.time_scale)) {
    throw Error(ErrorCode::BadConfig, "time scale must be positive");
  }
  create_session(options_.defaults, catalog_);  // fail fast on bad defaults
}

Server::~Server() {
  stop();
  reap(true);
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

std::uint16_t Server::listen() {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* found = nullptr;
  const std::string port = std::to_string(options_.port);
  if (const int rc = ::getaddrinfo(options_.host.c_str(), port.c_str(), &hints, &found); rc != 0) {
    throw Error(ErrorCode::Io, "cannot resolve " + options_.host + ": " + gai_strerror(rc));
  }
  const int fd = ::socket(found->ai_family, found->ai_socktype, found->ai_protocol);
  if (fd < 0) {
    ::freeaddrinfo(found);
    throw Error(ErrorCode::Io, std::string("socket: ") + std::strerror(errno));
  }
  const int yes = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  if (::bind(fd, found->ai_addr, found->ai_addrlen) != 0 || ::listen(fd, 64) != 0) {
    const std::string why = std::strerror(errno);
    ::freeaddrinfo(found);
    ::close(fd);
    throw Error(ErrorCode::Io, "cannot listen on " + options_.host + ":" + port + ": " + why);
  }
  ::freeaddrinfo(found);
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
  listen_fd_ = fd;
  return ntohs(bound.sin_port);
}

void Server::run() {
  if (listen_fd_ < 0) listen();
  while (!stopping_) {
    pollfd p{listen_fd_, POLLIN, 0};
    const int ready = ::poll(&p, 1, 100);
    if (ready <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    reap(false);
    auto done = std::make_shared<std::atomic<bool>>(false);
    workers_.push_back({std::thread([this, fd, done] {
                          try {
                            serve(fd);
                          } catch (const std::exception& e) {
                            log(std::string("connection error: ") + e.what());
                          }
                          ::close(fd);
                          *done = true;
                        }),
                        done});
  }
  reap(true);
}

void Server::stop() { stopping_ = true; }

void Server::reap(bool all) {
  for (auto it = workers_.begin(); it != workers_.end();) {
    if (all || *it->done) {
      if (it->thread.joinable()) it->thread.join();
      it = workers_.erase(it);
    } else {
      ++it;
    }
  }
}

void Server::log(const std::string& line) {
  if (!options_.verbose) return;
  std::lock_guard lock(log_mutex_);
  std::cerr << "limbswap serve: " << line << '\n';
}

namespace {

bool sendAll(int fd, std::string_view bytes) {
  while (!bytes.empty()) {
    const ssize_t n = ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

struct HttpRequest {
  std::string method;
  std::string target;
  std::map<std::string, std::string> headers;  // lower-case names
};

HttpRequest parseHttp(const std::string& head) {
  HttpRequest req;
  std::size_t line_end = head.find("\r\n");
  const std::string request_line = head.substr(0, line_end);
  const auto sp1 = request_line.find(' ');
  const auto sp2 = request_line.find(' ', sp1 == std::string::npos ? sp1 : sp1 + 1);
  if (sp1 != std::string::npos) {
    req.method = request_line.substr(0, sp1);
    req.target = request_line.substr(sp1 + 1, sp2 == std::string::npos ? std::string::npos : sp2 - sp1 - 1);
  }
  std::size_t pos = line_end == std::string::npos ? head.size() : line_end + 2;
  while (pos < head.size()) {
    line_end = head.find("\r\n", pos);
    if (line_end == std::string::npos) line_end = head.size();
    const std::string line = head.substr(pos, line_end - pos);
    if (const auto colon = line.find(':'); colon != std::string::npos) {
      req.headers[lower(trim(line.substr(0, colon)))] = trim(line.substr(colon + 1));
    }
    pos = line_end + 2;
  }
  return req;
}

std::string httpResponse(int status, std::string_view reason, std::string_view type, std::string_view body) {
  std::string out = "HTTP/1.1 " + std::to_string(status) + " " + std::string(reason) + "\r\n";
  out += "Content-Type: " + std::string(type) + "\r\n";
  out += "Content-Length: " + std::to_string(body.size()) + "\r\nConnection: close\r\n\r\n";
  out.append(body);
  return out;
}

std::string_view contentType(const std::string& path) {
  static const std::map<std::string, std::string_view> kTypes{
      {".html", "text/html; charset=utf-8"}, {".js", "text/javascript"}, {".mjs", "text/javascript"},
      {".css", "text/css"},                  {".json", "application/json"}, {".svg", "image/svg+xml"},
      {".png", "image/png"},                 {".wasm", "application/wasm"}, {".map", "application/json"},
      {".obj", "text/plain"}};
  const auto dot = path.rfind('.');
  if (dot != std::string::npos) {
    if (const auto it = kTypes.find(lower(path.substr(dot))); it != kTypes.end()) return it->second;
  }
  return "application/octet-stream";
}

std::string staticResponse(const HttpRequest& req, const std::optional<std::string>& ui_dir) {
  if (req.method != "GET") return httpResponse(405, "Method Not Allowed", "text/plain", "GET only\n");
  if (!ui_dir) return httpResponse(404, "Not Found", "text/plain", "no UI directory configured\n");
  std::string path = req.target.substr(0, req.target.find('?'));
  if (path.empty() || path.front() != '/') return httpResponse(400, "Bad Request", "text/plain", "bad path\n");
  if (path.find("..") != std::string::npos) return httpResponse(403, "Forbidden", "text/plain", "forbidden\n");
  if (path.back() == '/') path += "index.html";
  try {
    const std::string body = json_util::readFile(*ui_dir + path);
    return httpResponse(200, "OK", contentType(path), body);
  } catch (const Error&) {
    return httpResponse(404, "Not Found", "text/plain", "not found\n");
  }
}

constexpr std::size_t kMaxLine = 1 << 20;
constexpr std::size_t kMaxHttpHead = 1 << 16;

}  // namespace

void Server::serve(int fd) {
  using Clock = std::chrono::steady_clock;
  enum class Mode { Unknown, HttpHead, Lines, WebSocket };
  Mode mode = Mode::Unknown;
  std::string incoming;
  ws::Decoder decoder;
  std::optional<SessionRunner> runner;
  Clock::time_point start;
  std::int64_t ticks_run = 0;
  bool open = true;

  const auto send = [&](const pr::ServerMessage& message) {
    std::string text = pr::encode(message);
    if (mode == Mode::WebSocket) {
      open = open && sendAll(fd, ws::encode_frame(text));
    } else {
      text += '\n';
      open = open && sendAll(fd, text);
    }
  };
  const auto fail = [&](pr::Code code, std::string message) {
    send(pr::ErrorMessage{code, std::move(message)});
  };
  const double ticks_per_wall_second = options_.defaults.tick_rate_hz * options_.time_scale;
  const auto deadline = [&](std::int64_t tick) {
    return start + std::chrono::duration_cast<Clock::duration>(
                       std::chrono::duration<double>(static_cast<double>(tick) / ticks_per_wall_second));
  };

  const auto handleText = [&](const std::string& text) {
    if (!runner) {
      const auto type = pr::peek_type(text);
      if (type && *type != "hello" && pr::is_client_type(*type)) {
        fail(pr::Code::UnknownState, "expected hello before " + *type);
        open = false;
        return;
      }
    }
    pr::ClientMessage message;
    try {
      message = pr::decode_client(text);
    } catch (const pr::ProtocolError& e) {
      fail(e.code(), e.detail());
      if (!runner) open = false;
      return;
    }
    if (!runner) {
      const auto* hello = std::get_if<pr::Hello>(&message);
      if (hello == nullptr) {
        fail(pr::Code::UnknownState, "expected hello before " + std::string(pr::type_of(message)));
        open = false;
      } else if (hello->version != pr::kVersion) {
        fail(pr::Code::VersionMismatch, "server speaks version " + std::to_string(pr::kVersion) + ", client sent " +
                                            std::to_string(hello->version));
        open = false;
      } else {
        runner.emplace(catalog_, options_.defaults);
        send(runner->hello_ack());
        start = Clock::now();
        ticks_run = 0;
        log("hello from '" + hello->client_name + "'");
      }
      return;
    }
    for (const auto& reply : runner->handle(message)) send(reply);
  };

  while (open && !stopping_) {
    int timeout_ms = 100;
    if (runner) {
      const auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(deadline(ticks_run) - Clock::now());
      timeout_ms = static_cast<int>(std::clamp<std::int64_t>(wait.count(), 0, 100));
    }
    pollfd p{fd, POLLIN, 0};
    const int ready = ::poll(&p, 1, timeout_ms);
    if (ready < 0 && errno != EINTR) break;
    if (ready > 0) {
      char chunk[65536];
      const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
      if (n <= 0) break;
      incoming.append(chunk, static_cast<std::size_t>(n));

      if (mode == Mode::Unknown) {
        static constexpr std::string_view kGet = "GET ";
        const std::size_t k = std::min(incoming.size(), kGet.size());
        if (incoming.compare(0, k, kGet.substr(0, k)) == 0) {
          if (incoming.size() < kGet.size()) continue;
          mode = Mode::HttpHead;
        } else {
          mode = Mode::Lines;
        }
      }
      if (mode == Mode::HttpHead) {
        const auto end = incoming.find("\r\n\r\n");
        if (end == std::string::npos) {
          if (incoming.size() > kMaxHttpHead) break;
          continue;
        }
        const HttpRequest req = parseHttp(incoming.substr(0, end));
        incoming.erase(0, end + 4);
        const auto upgrade = req.headers.find("upgrade");
        const auto key = req.headers.find("sec-websocket-key");
        if (upgrade != req.headers.end() && lower(upgrade->second) == "websocket" && key != req.headers.end()) {
          const std::string reply = "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                                    "Sec-WebSocket-Accept: " +
                                    ws::accept_key(key->second) + "\r\n\r\n";
          if (!sendAll(fd, reply)) break;
          mode = Mode::WebSocket;
        } else {
          sendAll(fd, staticResponse(req, options_.ui_dir));
          break;
        }
      }

      std::vector<std::string> texts;
      if (mode == Mode::Lines) {
        std::size_t nl;
        while ((nl = incoming.find('\n')) != std::string::npos) {
          std::string line = incoming.substr(0, nl);
          incoming.erase(0, nl + 1);
          if (!line.empty() && line.back() == '\r') line.pop_back();
          if (!line.empty()) texts.push_back(std::move(line));
        }
        if (incoming.size() > kMaxLine) {
          fail(pr::Code::Malformed, "message exceeds 1 MiB");
          break;
        }
      } else if (mode == Mode::WebSocket) {
        std::vector<ws::Decoder::Frame> frames;
        try {
          frames = decoder.feed(incoming);
        } catch (const std::exception& e) {
          log(std::string("websocket error: ") + e.what());
          sendAll(fd, ws::encode_frame("", 8));
          break;
        }
        incoming.clear();
        for (auto& f : frames) {
          if (f.opcode == 8) {
            sendAll(fd, ws::encode_frame("", 8));
            open = false;
          } else if (f.opcode == 9) {
            open = open && sendAll(fd, ws::encode_frame(f.payload, 10));
          } else if (f.opcode == 1 || f.opcode == 2) {
            texts.push_back(std::move(f.payload));
          }
        }
      }
      for (const auto& text : texts) {
        if (!open) break;
        handleText(text);
      }
    }

    if (runner) {
      const auto now = Clock::now();
      while (open && deadline(ticks_run) <= now) {
        for (const auto& message : runner->tick()) send(message);
        ++ticks_run;
      }
    }
  }
  log("connection closed");
}

}  // namespace limbswap
