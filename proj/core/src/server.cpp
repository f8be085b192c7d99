#include "tsv/server.hpp"

#include <sys/socket.h>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include <array>
#include <atomic>
#include <map>
#include <mutex>
#include <thread>
#include <unordered_set>
#include <vector>

#include "tsv/errors.hpp"
#include "tsv/service.hpp"

namespace tsv {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

tcp::acceptor bind_acceptor(asio::io_context& io, const std::string& host, std::uint16_t port) {
  boost::system::error_code ec;
  const auto address = asio::ip::make_address(host, ec);
  if (ec) throw Error("invalid listen address '" + host + "'");
  tcp::acceptor acceptor(io);
  const tcp::endpoint ep(address, port);
  acceptor.open(ep.protocol(), ec);
  if (!ec) acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) acceptor.bind(ep, ec);
  if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) {
    throw Error("cannot listen on " + host + ":" + std::to_string(port) + ": " + ec.message());
  }
  return acceptor;
}

void write_frame(tcp::socket& socket, std::string_view payload) {
  const auto header = encode_frame_header(static_cast<std::uint32_t>(payload.size()));
  const std::array<asio::const_buffer, 2> buffers{asio::buffer(header),
                                                  asio::buffer(payload.data(), payload.size())};
  asio::write(socket, buffers);
}

// Reads and discards `n` bytes.
void drain(tcp::socket& socket, std::uint64_t n) {
  std::array<char, 64 * 1024> sink;
  while (n > 0) {
    const std::size_t chunk = static_cast<std::size_t>(std::min<std::uint64_t>(n, sink.size()));
    asio::read(socket, asio::buffer(sink.data(), chunk));
    n -= chunk;
  }
}

}  // namespace

struct Server::Impl {
  Impl(ExtractionService& s, ServerOptions o)
      : service(s),
        options(std::move(o)),
        tcp_acceptor(bind_acceptor(io, options.host, options.port)) {
    if (options.ws_port) ws_acceptor.emplace(bind_acceptor(io, options.host, *options.ws_port));
  }

  ~Impl() { stop(); }

  void accept(tcp::acceptor& acceptor, bool websocket_endpoint) {
    acceptor.async_accept([this, &acceptor, websocket_endpoint](boost::system::error_code ec,
                                                                tcp::socket socket) {
      if (ec) {
        if (ec != asio::error::operation_aborted) spdlog::warn("accept failed: {}", ec.message());
        if (!stopping) accept(acceptor, websocket_endpoint);
        return;
      }
      spawn(std::move(socket), websocket_endpoint);
      accept(acceptor, websocket_endpoint);
    });
  }

  void spawn(tcp::socket socket, bool websocket_endpoint) {
    std::lock_guard lock(mutex);
    if (stopping) return;
    for (std::uint64_t id : finished) {
      const auto it = workers.find(id);
      if (it != workers.end()) {
        it->second.join();
        workers.erase(it);
      }
    }
    finished.clear();
    const int fd = socket.native_handle();
    const std::uint64_t id = next_worker++;
    open_fds.insert(fd);
    workers.emplace(id, std::thread([this, fd, id, websocket_endpoint, s = std::move(socket)]() mutable {
      try {
        if (websocket_endpoint) {
          serve_websocket(s);
        } else {
          serve_framed(s);
        }
      } catch (const std::exception& e) {
        spdlog::debug("connection closed: {}", e.what());
      }
      std::lock_guard inner(mutex);
      open_fds.erase(fd);
      finished.push_back(id);
      // The socket object is destroyed (and the descriptor closed) after the
      // descriptor leaves the set, so stop() never shuts a reused descriptor.
    }));
  }

  void serve_framed(tcp::socket& socket) {
    for (;;) {
      std::array<unsigned char, kFrameHeaderSize> header;
      boost::system::error_code ec;
      asio::read(socket, asio::buffer(header), ec);
      if (ec) return;  // orderly close or reset
      const std::uint32_t length = decode_frame_header(header);
      std::string reply;
      if (length > options.max_frame) {
        drain(socket, length);
        reply = ExtractionService::bad_frame_reply("frame of " + std::to_string(length) +
                                                   " bytes exceeds the limit of " +
                                                   std::to_string(options.max_frame));
      } else {
        std::string payload(length, '\0');
        asio::read(socket, asio::buffer(payload));
        reply = service.handle(payload);
      }
      write_frame(socket, reply);
    }
  }

  void serve_websocket(tcp::socket& socket) {
    websocket::stream<tcp::socket&> ws(socket);
    ws.read_message_max(options.max_frame);
    ws.accept();
    for (;;) {
      beast::flat_buffer buffer;
      boost::system::error_code ec;
      ws.read(buffer, ec);
      if (ec == websocket::error::closed) return;
      if (ec) throw boost::system::system_error(ec);
      std::string reply;
      if (!ws.got_text()) {
        reply = ExtractionService::bad_frame_reply("binary messages are not accepted");
      } else {
        reply = service.handle(beast::buffers_to_string(buffer.data()));
      }
      ws.text(true);
      ws.write(asio::buffer(reply));
    }
  }

  void start() {
    accept(tcp_acceptor, false);
    if (ws_acceptor) accept(*ws_acceptor, true);
  }

  void run() {
    start();
    io.run();
  }

  void stop() {
    {
      std::lock_guard lock(mutex);
      if (stopped) return;
      stopped = true;
      stopping = true;
    }
    asio::post(io, [this] {
      boost::system::error_code ec;
      tcp_acceptor.close(ec);
      if (ws_acceptor) ws_acceptor->close(ec);
    });
    io.stop();
    if (runner.joinable()) runner.join();
    std::map<std::uint64_t, std::thread> joining;
    {
      std::lock_guard lock(mutex);
      for (int fd : open_fds) ::shutdown(fd, SHUT_RDWR);
      joining.swap(workers);
      finished.clear();
    }
    for (auto& entry : joining) entry.second.join();
    boost::system::error_code ec;
    tcp_acceptor.close(ec);
    if (ws_acceptor) ws_acceptor->close(ec);
  }

  ExtractionService& service;
  ServerOptions options;
  asio::io_context io;
  tcp::acceptor tcp_acceptor;
  std::optional<tcp::acceptor> ws_acceptor;
  std::mutex mutex;
  std::unordered_set<int> open_fds;
  std::map<std::uint64_t, std::thread> workers;
  std::vector<std::uint64_t> finished;
  std::uint64_t next_worker = 0;
  std::thread runner;
  std::atomic<bool> stopping{false};
  bool stopped = false;
};

Server::Server(ExtractionService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

Server::~Server() = default;

std::uint16_t Server::port() const { return impl_->tcp_acceptor.local_endpoint().port(); }

std::optional<std::uint16_t> Server::ws_port() const {
  if (!impl_->ws_acceptor) return std::nullopt;
  return impl_->ws_acceptor->local_endpoint().port();
}

void Server::start() {
  impl_->start();
  impl_->runner = std::thread([this] { impl_->io.run(); });
}

void Server::run() { impl_->run(); }

void Server::stop() { impl_->stop(); }

struct FramedClient::Impl {
  asio::io_context io;
  tcp::socket socket{io};
};

FramedClient::FramedClient(const std::string& host, std::uint16_t port)
    : impl_(std::make_unique<Impl>()) {
  tcp::resolver resolver(impl_->io);
  boost::system::error_code ec;
  asio::connect(impl_->socket, resolver.resolve(host, std::to_string(port)), ec);
  if (ec) throw Error("cannot connect to " + host + ":" + std::to_string(port) + ": " + ec.message());
}

FramedClient::~FramedClient() = default;

std::string FramedClient::request(std::string_view payload) {
  write_frame(impl_->socket, payload);
  return read_frame();
}

void FramedClient::send_raw(std::string_view bytes) {
  asio::write(impl_->socket, asio::buffer(bytes.data(), bytes.size()));
}

std::string FramedClient::read_frame() {
  std::array<unsigned char, kFrameHeaderSize> header;
  boost::system::error_code ec;
  asio::read(impl_->socket, asio::buffer(header), ec);
  if (ec) throw Error("connection closed while reading a frame header: " + ec.message());
  std::string payload(decode_frame_header(header), '\0');
  asio::read(impl_->socket, asio::buffer(payload), ec);
  if (ec) throw Error("connection closed while reading a frame: " + ec.message());
  return payload;
}

struct WebSocketClient::Impl {
  asio::io_context io;
  websocket::stream<tcp::socket> ws{io};
};

WebSocketClient::WebSocketClient(const std::string& host, std::uint16_t port)
    : impl_(std::make_unique<Impl>()) {
  tcp::resolver resolver(impl_->io);
  asio::connect(impl_->ws.next_layer(), resolver.resolve(host, std::to_string(port)));
  impl_->ws.handshake(host + ":" + std::to_string(port), "/");
  impl_->ws.text(true);
}

WebSocketClient::~WebSocketClient() {
  boost::system::error_code ec;
  impl_->ws.close(websocket::close_code::normal, ec);
}

std::string WebSocketClient::request(std::string_view payload) {
  impl_->ws.write(asio::buffer(payload.data(), payload.size()));
  beast::flat_buffer buffer;
  impl_->ws.read(buffer);
  return beast::buffers_to_string(buffer.data());
}

}  // namespace tsv
