#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "tsv/framing.hpp"

namespace tsv {

class ExtractionService;

struct ServerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks an ephemeral port
  /// Browser (WebSocket) endpoint; disabled when unset, 0 picks a port.
  std::optional<std::uint16_t> ws_port;
  std::uint32_t max_frame = kDefaultMaxFrame;
};

/// Framed TCP listener plus an optional WebSocket listener, both forwarding
/// every message to the same ExtractionService. Each connection is served by
/// its own thread; malformed frames are answered and the connection kept.
class Server {
 public:
  /// Binds the listeners; throws Error when a port cannot be bound.
  Server(ExtractionService& service, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const;
  std::optional<std::uint16_t> ws_port() const;

  /// Accepts connections on a background thread.
  void start();
  /// Accepts connections on the calling thread until stop().
  void run();
  /// Closes listeners and connections and joins all threads. Idempotent.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Blocking client for the framed TCP protocol.
class FramedClient {
 public:
  FramedClient(const std::string& host, std::uint16_t port);
  ~FramedClient();
  FramedClient(const FramedClient&) = delete;
  FramedClient& operator=(const FramedClient&) = delete;

  /// Sends one framed request and waits for its reply.
  std::string request(std::string_view payload);
  /// Writes raw bytes without framing.
  void send_raw(std::string_view bytes);
  /// Reads one reply frame. Throws Error when the connection is closed.
  std::string read_frame();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Blocking client for the browser endpoint; one text message per request.
class WebSocketClient {
 public:
  WebSocketClient(const std::string& host, std::uint16_t port);
  ~WebSocketClient();
  WebSocketClient(const WebSocketClient&) = delete;
  WebSocketClient& operator=(const WebSocketClient&) = delete;

  std::string request(std::string_view payload);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tsv
