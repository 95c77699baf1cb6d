// Copyright 2026 The ssmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SSMPC__LIVE__SERVER_HPP_
#define SSMPC__LIVE__SERVER_HPP_

/**
 * @file
 * @brief WebSocket front end for live sessions (Boost.Beast).
 *
 * One Connection owns one Session. All of a connection's handlers run on the io_context
 * thread, so the session has a single writer without locks.
 */

#include "ssmpc/live/session.hpp"

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/strand.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <chrono>
#include <deque>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

namespace ssmpc::live
{

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = boost::beast::websocket;
using tcp = boost::asio::ip::tcp;

struct ServerOptions
{
  std::string bind{"127.0.0.1:8787"};
  /// Wall-clock speed multiplier; 2 runs the simulation twice as fast as real time.
  double speed{1.0};
  ScenarioSpec defaults{};
};

inline tcp::endpoint parse_endpoint(const std::string & bind)
{
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument("bind address '" + bind + "' must be host:port");
  }
  const std::string host = bind.substr(0, colon);
  const std::string port_text = bind.substr(colon + 1);
  unsigned long port = 0;
  try {
    std::size_t used = 0;
    port = std::stoul(port_text, &used);
    if (used != port_text.size() || port > 65535) {
      throw std::out_of_range("port");
    }
  } catch (const std::exception &) {
    throw std::invalid_argument("bind address '" + bind + "' has an invalid port");
  }
  boost::system::error_code ec;
  const auto addr = net::ip::make_address(host, ec);
  if (ec) {
    throw std::invalid_argument("bind address '" + bind + "' has an invalid host");
  }
  return {addr, static_cast<unsigned short>(port)};
}

class Connection : public std::enable_shared_from_this<Connection>
{
public:
  Connection(tcp::socket socket, const ServerOptions & opt, std::atomic<int> & live_count)
  : ws_(std::move(socket)), timer_(ws_.get_executor()), session_(opt.defaults),
    speed_(opt.speed), live_count_(live_count)
  {
    ++live_count_;
  }

  ~Connection() { --live_count_; }

  void run()
  {
    ws_.text(true);
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (!ec) {
        self->read();
      }
    });
  }

private:
  using Clock = std::chrono::steady_clock;

  void read()
  {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->on_read(ec);
    });
  }

  void on_read(beast::error_code ec)
  {
    if (ec) {
      // Disconnect: stop ticking; the last handler holding a reference frees the session.
      closed_ = true;
      timer_.cancel();
      return;
    }
    const std::string frame = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    const bool was_running = session_.running();
    Reply reply = session_.handle(frame);
    bool fresh_episode = false;
    for (auto & m : reply.messages) {
      fresh_episode = fresh_episode || m.value("type", "") == "tick";
      send(m.dump());
    }
    if (reply.close) {
      closing_ = true;
      flush_or_close();
      return;
    }
    if (session_.running() && (!was_running || fresh_episode)) {
      // Started, resumed or reset: the next step is one period from now.
      pacer_.emplace(Clock::now(), period());
      arm();
    }
    read();
  }

  Clock::duration period() const
  {
    const double seconds = session_.spec().dt / speed_;
    return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds));
  }

  void arm()
  {
    if (!pacer_ || closed_) {
      return;
    }
    timer_.expires_at(pacer_->next_deadline());
    const auto generation = ++timer_generation_;
    timer_.async_wait([self = shared_from_this(), generation](beast::error_code ec) {
      if (!ec && generation == self->timer_generation_) {
        self->on_timer();
      }
    });
  }

  void on_timer()
  {
    if (closed_ || !pacer_) {
      return;
    }
    const int due = pacer_->take_due(Clock::now());
    for (int i = 0; i < due && session_.running(); ++i) {
      if (auto m = session_.tick()) {
        send(m->dump());
      }
    }
    if (session_.running()) {
      arm();
    } else {
      pacer_.reset();
    }
  }

  void send(std::string text)
  {
    outbox_.push_back(std::move(text));
    if (outbox_.size() == 1) {
      write_next();
    }
  }

  void write_next()
  {
    ws_.async_write(
      net::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
        self->outbox_.pop_front();
        if (ec) {
          self->closed_ = true;
          self->timer_.cancel();
          return;
        }
        if (!self->outbox_.empty()) {
          self->write_next();
        } else {
          self->flush_or_close();
        }
      });
  }

  void flush_or_close()
  {
    if (closing_ && outbox_.empty() && !closed_) {
      closed_ = true;
      timer_.cancel();
      ws_.async_close(websocket::close_code::policy_error, [self = shared_from_this()](beast::error_code) {});
    }
  }

  websocket::stream<beast::tcp_stream> ws_;
  net::steady_timer timer_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  Session session_;
  std::optional<Pacer<Clock>> pacer_{};
  double speed_;
  std::atomic<int> & live_count_;
  std::uint64_t timer_generation_{0};
  bool closing_{false};
  bool closed_{false};
};

class Server
{
public:
  /// Binds immediately; throws std::runtime_error naming the address when that fails.
  Server(net::io_context & ioc, ServerOptions opt) : ioc_(ioc), acceptor_(ioc), opt_(std::move(opt))
  {
    if (!(opt_.speed > 0.0)) {
      throw std::invalid_argument("speed multiplier must be positive");
    }
    validate(opt_.defaults);
    const tcp::endpoint ep = parse_endpoint(opt_.bind);
    beast::error_code ec;
    acceptor_.open(ep.protocol(), ec);
    if (!ec) {
      acceptor_.set_option(net::socket_base::reuse_address(true), ec);
    }
    if (!ec) {
      acceptor_.bind(ep, ec);
    }
    if (!ec) {
      acceptor_.listen(net::socket_base::max_listen_connections, ec);
    }
    if (ec) {
      throw std::runtime_error("cannot bind " + opt_.bind + ": " + ec.message());
    }
  }

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  /// Connections currently alive (accepted and not yet released).
  int active_sessions() const { return live_count_.load(); }

  void start() { accept(); }

  void stop()
  {
    beast::error_code ec;
    acceptor_.close(ec);
  }

private:
  void accept()
  {
    acceptor_.async_accept(net::make_strand(ioc_), [this](beast::error_code ec, tcp::socket s) {
      if (ec) {
        return;
      }
      std::make_shared<Connection>(std::move(s), opt_, live_count_)->run();
      accept();
    });
  }

  net::io_context & ioc_;
  tcp::acceptor acceptor_;
  ServerOptions opt_;
  std::atomic<int> live_count_{0};
};

}  // namespace ssmpc::live

#endif  // SSMPC__LIVE__SERVER_HPP_
