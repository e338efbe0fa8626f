#include "cello/service.hpp"

#include <sys/socket.h>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <csignal>
#include <list>
#include <random>
#include <sstream>

#include "cello/error.hpp"

namespace cello {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

const std::string& require_string(const Json& msg, const char* key) {
  auto it = msg.find(key);
  if (it == msg.end() || !it->is_string()) {
    throw Error(ErrorCode::BadRequest, std::string("missing string field '") + key + "'");
  }
  return it->get_ref<const std::string&>();
}

}  // namespace

SessionService::SessionService(std::shared_ptr<const Engine> engine,
                               std::shared_ptr<SessionStore> store, ServiceOptions options)
    : engine_(std::move(engine)), store_(std::move(store)), options_(std::move(options)) {
  if (!engine_) throw std::logic_error("SessionService needs an engine");
}

std::string SessionService::new_token() {
  static thread_local std::mt19937_64 gen{std::random_device{}()};
  std::ostringstream out;
  out << std::hex;
  for (int i = 0; i < 2; ++i) {
    out.width(16);
    out.fill('0');
    out << gen();
  }
  return out.str();
}

std::string SessionService::start_session(ConnectionId conn, const std::string& user_id,
                                          const Json& overrides) {
  if (!is_valid_identifier(user_id)) {
    throw Error(ErrorCode::BadRequest, "invalid user id '" + user_id + "'");
  }
  if (options_.users && !options_.users->contains(user_id)) {
    throw Error(ErrorCode::UnknownUser, "unknown user '" + user_id + "'");
  }
  EngineConfig cfg = overrides.is_null() ? engine_->config
                                         : apply_overrides(engine_->config, overrides);
  auto session = std::make_shared<Session>(*engine_, cfg);
  session->owner = conn;
  session->user_id = user_id;
  session->started_at = iso8601_now();

  std::lock_guard lock(mutex_);
  std::string token = new_token();
  while (sessions_.contains(token)) token = new_token();
  sessions_.emplace(token, std::move(session));
  return token;
}

std::shared_ptr<SessionService::Session> SessionService::find(ConnectionId conn,
                                                              const std::string& token) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(token);
  if (it == sessions_.end() || it->second->owner != conn) {
    throw Error(ErrorCode::UnknownSession, "no live session for this token");
  }
  return it->second;
}

FrameMessage SessionService::submit_frame(ConnectionId conn, const std::string& token,
                                          const FramePacket& packet) {
  auto session = find(conn, token);
  std::lock_guard lock(session->mutex);
  const auto t0 = std::chrono::steady_clock::now();
  FrameMessage message = session->pipeline.process(packet);
  const auto t1 = std::chrono::steady_clock::now();
  session->latencies_us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
  return message;
}

EndResult SessionService::end_session(ConnectionId conn, const std::string& token) {
  std::shared_ptr<Session> session;
  {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(token);
    if (it == sessions_.end() || it->second->owner != conn) {
      throw Error(ErrorCode::UnknownSession, "no live session for this token");
    }
    session = std::move(it->second);
    sessions_.erase(it);
  }
  std::lock_guard lock(session->mutex);
  EndResult out;
  out.record.summary = session->pipeline.summary();
  out.record.session_id = token;
  out.record.user_id = session->user_id;
  out.record.started_at = session->started_at;
  out.record.config = config_to_json(session->pipeline.config());
  out.record.wrist_model_digest = engine_->wrist_model_digest;
  out.record.elbow_model_digest = engine_->elbow_model_digest;
  out.record.stream_digest = session->pipeline.stream_digest();
  out.latency = latency_stats(session->latencies_us);
  if (store_) store_->persist(out.record);
  return out;
}

EngineConfig SessionService::session_config(ConnectionId conn, const std::string& token) const {
  auto session = find(conn, token);
  std::lock_guard lock(session->mutex);
  return session->pipeline.config();
}

void SessionService::disconnect(ConnectionId conn) {
  std::lock_guard lock(mutex_);
  std::erase_if(sessions_, [conn](const auto& kv) { return kv.second->owner == conn; });
}

std::size_t SessionService::live_sessions() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

Json error_message(ErrorCode code, std::string_view detail) {
  return Json{{"type", "error"}, {"code", to_string(code)}, {"detail", detail}};
}

Json summary_message(const EndResult& end) {
  return Json{{"type", "summary"},
              {"session_id", end.record.session_id},
              {"summary", summary_to_json(end.record.summary)},
              {"stream_digest", end.record.stream_digest},
              {"latency", latency_to_json(end.latency)}};
}

Json SessionService::handle_message(ConnectionId conn, const Json& msg) {
  try {
    if (!msg.is_object()) throw Error(ErrorCode::BadRequest, "message must be an object");
    const std::string& type = require_string(msg, "type");
    if (type == "start") {
      Json overrides = msg.contains("config") ? msg["config"] : Json();
      return Json{{"type", "started"},
                  {"token", start_session(conn, require_string(msg, "user"), overrides)}};
    }
    if (type == "frame") {
      const std::string& token = require_string(msg, "token");
      if (!msg.contains("packet")) throw Error(ErrorCode::BadRequest, "missing field 'packet'");
      FramePacket packet = parse_frame(msg["packet"]);
      return frame_message_to_json(submit_frame(conn, token, packet));
    }
    if (type == "end") {
      return summary_message(end_session(conn, require_string(msg, "token")));
    }
    throw Error(ErrorCode::BadRequest, "unknown message type '" + type + "'");
  } catch (const Error& e) {
    return error_message(e.code(), e.what());
  } catch (const Json::exception& e) {
    return error_message(ErrorCode::BadRequest, e.what());
  }
}

std::string SessionService::handle_text(ConnectionId conn, std::string_view text) {
  Json msg;
  try {
    msg = Json::parse(text);
  } catch (const Json::parse_error& e) {
    return error_message(ErrorCode::BadRequest, e.what()).dump();
  }
  return handle_message(conn, msg).dump();
}

// ---------------------------------------------------------------------------

struct WebSocketServer::Impl {
  SessionService& service;
  asio::io_context ioc;
  tcp::acceptor acceptor;
  std::atomic<bool> stopping{false};
  std::atomic<ConnectionId> next_conn{1};

  std::mutex conn_mutex;
  std::map<ConnectionId, tcp::socket::native_handle_type> open_sockets;
  std::list<std::thread> threads;

  Impl(SessionService& svc, const std::string& address, unsigned short port)
      : service(svc), acceptor(ioc) {
    try {
      tcp::endpoint ep(asio::ip::make_address(address), port);
      acceptor.open(ep.protocol());
      acceptor.set_option(asio::socket_base::reuse_address(true));
      acceptor.bind(ep);
      acceptor.listen();
    } catch (const std::exception& e) {
      throw Error(ErrorCode::IoError,
                  "cannot listen on " + address + ":" + std::to_string(port) + ": " + e.what());
    }
  }

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec || stopping) return;
      const ConnectionId id = next_conn++;
      std::lock_guard lock(conn_mutex);
      open_sockets[id] = socket.native_handle();
      threads.emplace_back([this, id, s = std::move(socket)]() mutable { serve(id, std::move(s)); });
      accept();
    });
  }

  void serve(ConnectionId id, tcp::socket socket) {
    try {
      websocket::stream<tcp::socket> ws(std::move(socket));
      ws.accept();
      ws.text(true);
      beast::flat_buffer buffer;
      while (true) {
        ws.read(buffer);
        std::string reply = service.handle_text(id, beast::buffers_to_string(buffer.data()));
        buffer.consume(buffer.size());
        ws.write(asio::buffer(reply));
      }
    } catch (const std::exception&) {
      // Peer closed or shutdown requested.
    }
    service.disconnect(id);
    std::lock_guard lock(conn_mutex);
    open_sockets.erase(id);
  }

  void shutdown_connections() {
    std::lock_guard lock(conn_mutex);
    for (const auto& [id, fd] : open_sockets) ::shutdown(fd, SHUT_RDWR);
  }
};

WebSocketServer::WebSocketServer(SessionService& service, const std::string& address,
                                 unsigned short port)
    : impl_(std::make_unique<Impl>(service, address, port)) {}

WebSocketServer::~WebSocketServer() {
  stop();
  for (auto& t : impl_->threads) {
    if (t.joinable()) t.join();
  }
}

unsigned short WebSocketServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void WebSocketServer::run(bool stop_on_signal, const std::function<void()>& on_ready) {
  std::optional<asio::signal_set> signals;
  if (stop_on_signal) {
    signals.emplace(impl_->ioc, SIGINT, SIGTERM);
    signals->async_wait([this](beast::error_code ec, int) {
      if (!ec) stop();
    });
  }
  impl_->accept();
  if (on_ready) on_ready();
  impl_->ioc.run();
  impl_->shutdown_connections();
  std::list<std::thread> threads;
  {
    std::lock_guard lock(impl_->conn_mutex);
    threads.swap(impl_->threads);
  }
  for (auto& t : threads) t.join();
}

void WebSocketServer::stop() {
  if (impl_->stopping.exchange(true)) return;
  asio::post(impl_->ioc, [this] {
    beast::error_code ec;
    impl_->acceptor.close(ec);
    impl_->ioc.stop();
  });
  impl_->shutdown_connections();
}

// ---------------------------------------------------------------------------

struct WebSocketClient::Impl {
  asio::io_context ioc;
  websocket::stream<tcp::socket> ws{ioc};
  beast::flat_buffer buffer;
};

WebSocketClient::WebSocketClient(const std::string& host, unsigned short port)
    : impl_(std::make_unique<Impl>()) {
  try {
    tcp::resolver resolver(impl_->ioc);
    auto results = resolver.resolve(host, std::to_string(port));
    asio::connect(impl_->ws.next_layer(), results.begin(), results.end());
    impl_->ws.handshake(host, "/");
    impl_->ws.text(true);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::IoError,
                "cannot connect to " + host + ":" + std::to_string(port) + ": " + e.what());
  }
}

WebSocketClient::~WebSocketClient() {
  try {
    close();
  } catch (...) {
  }
}

void WebSocketClient::send(const Json& message) {
  try {
    impl_->ws.write(asio::buffer(message.dump()));
  } catch (const std::exception& e) {
    throw Error(ErrorCode::IoError, std::string("send failed: ") + e.what());
  }
}

Json WebSocketClient::receive() {
  try {
    impl_->buffer.consume(impl_->buffer.size());
    impl_->ws.read(impl_->buffer);
    return Json::parse(beast::buffers_to_string(impl_->buffer.data()));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("bad reply: ") + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::IoError, std::string("receive failed: ") + e.what());
  }
}

void WebSocketClient::close() {
  if (impl_->ws.is_open()) {
    beast::error_code ec;
    impl_->ws.close(websocket::close_code::normal, ec);
  }
}

}  // namespace cello
