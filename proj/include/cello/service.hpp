#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "cello/error.hpp"
#include "cello/json.hpp"
#include "cello/latency.hpp"
#include "cello/pipeline.hpp"
#include "cello/session.hpp"

namespace cello {

using ConnectionId = std::uint64_t;

struct ServiceOptions {
  // When set, start requests for any other user fail with UnknownUser.
  std::optional<std::set<std::string>> users;
};

struct EndResult {
  SessionRecord record;
  LatencyStats latency;
};

/**
 * Session lifecycle independent of the transport. Each session is bound to
 * the connection that started it. Calls for different sessions may run in
 * parallel; calls for one session are serialized.
 */
class SessionService {
 public:
  // store may be null, in which case records are built but not persisted.
  SessionService(std::shared_ptr<const Engine> engine, std::shared_ptr<SessionStore> store,
                 ServiceOptions options = {});

  // Throws Error(UnknownUser), Error(BadConfig) or Error(BadRequest).
  std::string start_session(ConnectionId conn, const std::string& user_id,
                            const Json& overrides);
  // Throws Error(UnknownSession) or Error(NonMonotonicTime); the latter
  // leaves the session untouched.
  FrameMessage submit_frame(ConnectionId conn, const std::string& token,
                            const FramePacket& packet);
  // Throws Error(UnknownSession) or Error(EmptySession). Either way the
  // token is no longer valid afterwards.
  EndResult end_session(ConnectionId conn, const std::string& token);

  // Config snapshot of a live session. Throws Error(UnknownSession).
  EngineConfig session_config(ConnectionId conn, const std::string& token) const;

  // Wire protocol. Never throws: failures become error messages.
  Json handle_message(ConnectionId conn, const Json& message);
  std::string handle_text(ConnectionId conn, std::string_view text);

  // Drops every session bound to conn.
  void disconnect(ConnectionId conn);

  std::size_t live_sessions() const;
  const Engine& engine() const { return *engine_; }

 private:
  struct Session {
    Session(const Engine& engine, const EngineConfig& cfg) : pipeline(engine, cfg) {}
    std::mutex mutex;
    ConnectionId owner = 0;
    std::string user_id;
    std::string started_at;
    SessionPipeline pipeline;
    std::vector<double> latencies_us;
  };

  std::shared_ptr<Session> find(ConnectionId conn, const std::string& token) const;
  std::string new_token();

  std::shared_ptr<const Engine> engine_;
  std::shared_ptr<SessionStore> store_;
  ServiceOptions options_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

Json error_message(ErrorCode code, std::string_view detail);
Json summary_message(const EndResult& end);

/**
 * WebSocket front end. One thread per connection, synchronous I/O, text
 * frames carrying one JSON message each.
 */
class WebSocketServer {
 public:
  // port 0 picks an ephemeral port. Throws Error(IoError) if binding fails.
  WebSocketServer(SessionService& service, const std::string& address, unsigned short port);
  ~WebSocketServer();

  WebSocketServer(const WebSocketServer&) = delete;
  WebSocketServer& operator=(const WebSocketServer&) = delete;

  unsigned short port() const;

  // Blocks until stop() or, with stop_on_signal, SIGINT/SIGTERM. Open
  // connections are closed and their threads joined before returning.
  // on_ready runs once signal handling is in place.
  void run(bool stop_on_signal = false, const std::function<void()>& on_ready = {});
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Minimal blocking client, used by tests and the drive command.
class WebSocketClient {
 public:
  // Throws Error(IoError).
  WebSocketClient(const std::string& host, unsigned short port);
  ~WebSocketClient();

  void send(const Json& message);
  Json receive();
  Json request(const Json& message) {
    send(message);
    return receive();
  }
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cello
