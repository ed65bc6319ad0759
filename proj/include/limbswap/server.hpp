#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "limbswap/protocol.hpp"
#include "limbswap/session.hpp"

namespace limbswap {

/// One live session with its input buffer. Has no notion of wall time: the caller decides when a
/// tick is due, so the same pose/tick sequence always yields the same messages.
class SessionRunner {
 public:
  static constexpr std::size_t kMaxBufferedPoses = 4096;

  SessionRunner(const Catalog& catalog, SessionConfig config);

  /// Queues an input frame. It is consumed by the first tick whose time reaches its timestamp;
  /// when several are due at once the newest wins and the rest become DroppedInput events.
  void push_pose(const HandPoseFrame& frame);

  /// Advances one tick. Returns the frame (on output ticks), its events and changed metrics.
  std::vector<protocol::ServerMessage> tick();

  /// select_prosthesis, select_task, reset and list_prostheses. hello/pose are not accepted here.
  std::vector<protocol::ServerMessage> handle(const protocol::ClientMessage& message);

  protocol::HelloAck hello_ack() const;
  const SessionState& state() const { return state_; }
  std::size_t buffered() const { return buffer_.size(); }

 private:
  void rebuild(SessionConfig config, bool keep_hand);
  void drop(std::string detail);

  const Catalog* catalog_;
  SessionState state_;
  std::deque<HandPoseFrame> buffer_;
  std::optional<TaskMetrics> last_metrics_;
};

namespace ws {

/// Sec-WebSocket-Accept value for a client key.
std::string accept_key(std::string_view client_key);

/// Unmasked server frame. opcode 1 = text, 8 = close, 10 = pong.
std::string encode_frame(std::string_view payload, std::uint8_t opcode = 1);

/// Incremental decoder for masked client frames; reassembles fragmented messages.
class Decoder {
 public:
  struct Frame {
    std::uint8_t opcode = 0;
    std::string payload;
  };
  static constexpr std::size_t kMaxMessage = 1 << 20;

  /// Appends bytes and returns complete messages and control frames. Throws std::runtime_error
  /// on protocol violations (unmasked frames, oversize messages).
  std::vector<Frame> feed(std::string_view bytes);

 private:
  std::string buffer_;
  std::string partial_;
  std::uint8_t partial_opcode_ = 0;
};

}  // namespace ws

struct ServerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 7878;  // 0 picks a free port
  std::optional<std::string> ui_dir;
  /// Engine seconds per wall-clock second.
  double time_scale = 1.0;
  SessionConfig defaults;
  bool verbose = false;
};

/// "host:port" or ":port". Throws Error{BadConfig}.
std::pair<std::string, std::uint16_t> parse_bind(std::string_view bind);

/// TCP service: newline-delimited protocol messages, or WebSocket text frames after an HTTP upgrade.
/// Plain HTTP GETs serve static files from ui_dir when set. One thread and one session per connection.
class Server {
 public:
  Server(Catalog catalog, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and listens; returns the bound port. Throws Error{Io}.
  std::uint16_t listen();
  /// Accept loop; returns after stop().
  void run();
  void stop();

 private:
  void serve(int fd);
  void log(const std::string& line);

  Catalog catalog_;
  ServerOptions options_;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };
  void reap(bool all);

  std::mutex log_mutex_;
  std::vector<Worker> workers_;
};

}  // namespace limbswap
