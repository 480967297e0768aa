#include "glovelink/gateway.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "glovelink/error.hpp"
#include "glovelink/pipeline.hpp"
#include "glovelink/protocol.hpp"

namespace glovelink {

void OutboundQueue::set_state(std::string frame) {
  if (state_) ++dropped_;
  state_ = std::move(frame);
}

bool OutboundQueue::push(std::string frame) {
  if (frames_.size() >= kMaxQueued) return false;
  frames_.push_back(std::move(frame));
  return true;
}

std::optional<std::string> OutboundQueue::pop() {
  if (!frames_.empty()) {
    std::string f = std::move(frames_.front());
    frames_.pop_front();
    return f;
  }
  std::optional<std::string> s = std::move(state_);
  state_.reset();
  return s;
}

namespace {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using Clock = std::chrono::steady_clock;

class Session;

struct Inbound {
  std::shared_ptr<Session> from;
  std::optional<wire::Message> msg;  // empty: the client went away
  Clock::time_point received;
};

class Session : public std::enable_shared_from_this<Session> {
 public:
  using Deliver = std::function<void(Inbound)>;

  Session(tcp::socket socket, std::size_t id, Deliver deliver)
      : ws_(std::move(socket)), id_(id), deliver_(std::move(deliver)) {}

  std::size_t id() const { return id_; }

  void run() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(64 << 20);
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return self->gone();
      self->read();
    });
  }

  /// Lossless frame; overflow closes the connection.
  void send(std::string frame) {
    bool ok;
    {
      std::lock_guard lock(mu_);
      ok = queue_.push(std::move(frame));
    }
    if (!ok) {
      close();
      return;
    }
    kick();
  }

  void send_state(std::string frame) {
    {
      std::lock_guard lock(mu_);
      queue_.set_state(std::move(frame));
    }
    kick();
  }

  void close() {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      if (self->closing_) return;
      self->closing_ = true;
      if (!self->writing_) self->finish_close();
    });
  }

 private:
  void kick() {
    net::post(ws_.get_executor(), [self = shared_from_this()] { self->write_next(); });
  }

  void write_next() {
    if (writing_ || closing_) return;
    {
      std::lock_guard lock(mu_);
      auto next = queue_.pop();
      if (!next) return;
      current_ = std::move(*next);
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(current_), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->writing_ = false;
      if (ec) return;
      if (self->closing_) return self->finish_close();
      self->write_next();
    });
  }

  // At most one write-side operation may be in flight, close included.
  void finish_close() {
    ws_.async_close(websocket::close_code::policy_error, [self = shared_from_this()](beast::error_code) {});
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->gone();
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      const auto received = Clock::now();
      try {
        self->deliver_({self, wire::parse(text), received});
      } catch (const wire::ProtocolError& e) {
        self->send(wire::serialize(wire::ErrorMsg{e.code(), e.what()}));
      }
      self->read();
    });
  }

  void gone() {
    if (announced_gone_) return;
    announced_gone_ = true;
    deliver_({shared_from_this(), std::nullopt, Clock::now()});
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::size_t id_;
  Deliver deliver_;
  beast::flat_buffer buffer_;
  std::mutex mu_;
  OutboundQueue queue_;
  std::string current_;
  bool writing_ = false;
  bool closing_ = false;
  bool announced_gone_ = false;
};

enum class Role { Operator, Observer };

}  // namespace

struct Gateway::Impl {
  explicit Impl(GatewayOptions o) : opts(std::move(o)), acceptor(ioc) {}

  GatewayOptions opts;
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::thread io_thread;
  std::thread control_thread;
  std::atomic<bool> running{false};
  std::atomic<std::size_t> next_id{1};

  std::mutex inbox_mu;
  std::condition_variable inbox_cv;
  std::vector<Inbound> inbox;

  // Control thread only.
  std::map<std::size_t, std::pair<std::shared_ptr<Session>, Role>> peers;
  std::optional<std::size_t> operator_id;
  std::optional<GestureLabel> override_label;
  std::optional<TraceFile> recording;

  mutable std::mutex stats_mu;
  LatencyStats stats;
  std::atomic<std::size_t> n_clients{0};
  std::atomic<std::size_t> n_states{0};
  unsigned short bound_port = 0;

  std::mutex stop_mu;
  std::condition_variable stop_cv;
  bool stopped = false;

  void post(Inbound in) {
    {
      std::lock_guard lock(inbox_mu);
      inbox.push_back(std::move(in));
    }
    inbox_cv.notify_one();
  }

  void accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      auto s = std::make_shared<Session>(std::move(socket), next_id++,
                                         [this](Inbound in) { post(std::move(in)); });
      s->run();
      accept();
    });
  }

  void record(TraceRecord r) {
    if (recording) recording->records.push_back(std::move(r));
  }

  void broadcast(const std::string& frame) {
    for (auto& [id, peer] : peers) peer.first->send(frame);
  }

  void reply_error(Session& s, std::string code, std::string message) {
    s.send(wire::serialize(wire::ErrorMsg{std::move(code), std::move(message)}));
  }

  nlohmann::json session_snapshot(const ControlLoop& loop) const {
    nlohmann::json j = loop.settings();
    j["eta"] = loop.settings().control.eta();
    return j;
  }

  void control_main() {
    const auto t0 = Clock::now();
    auto seconds = [t0](Clock::time_point tp) { return std::chrono::duration<double>(tp - t0).count(); };
    ControlLoop loop(opts.settings, opts.model, opts.tip_home, 0.0);

    const auto tick = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(opts.settings.sim.tick_period()));
    const auto bcast = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(1.0 / opts.settings.session.broadcast_rate));
    auto next_tick = t0 + tick;
    auto next_bcast = t0 + bcast;

    auto on_tick = [this](const SimPsmState& s) {
      if (recording) record(SimStateRecord{s.time, s.tip, s.jaw, s.at_goal});
    };

    std::vector<Inbound> batch;
    while (running) {
      {
        std::unique_lock lock(inbox_mu);
        inbox_cv.wait_until(lock, std::min(next_tick, next_bcast),
                            [this] { return !inbox.empty() || !running; });
        batch.swap(inbox);
      }
      if (!running) break;

      // Only the newest hand sample of a backlog is classified.
      std::size_t last_hand = batch.size();
      for (std::size_t i = 0; i < batch.size(); ++i) {
        if (batch[i].msg && std::holds_alternative<wire::HandInput>(*batch[i].msg)) last_hand = i;
      }
      for (std::size_t i = 0; i < batch.size(); ++i) {
        handle(loop, batch[i], i != last_hand, seconds);
      }
      batch.clear();

      const auto now = Clock::now();
      if (now >= next_tick) {
        loop.advance_to(seconds(now), on_tick);
        while (next_tick <= now) next_tick += tick;
      }
      if (now >= next_bcast) {
        publish_state(loop);
        next_bcast += bcast;
        if (next_bcast <= now) next_bcast = now + bcast;
      }
    }
  }

  void publish_state(const ControlLoop& loop) {
    const SimPsmState& s = loop.sim().state();
    const TeleopState& ts = loop.teleop().state();
    wire::RobotState rs;
    rs.t = s.time;
    rs.pos = s.tip.position;
    rs.quat = s.tip.orientation;
    rs.jaw = s.jaw;
    rs.clutch = ts.clutch == ClutchPhase::Engaged;
    rs.tracking = ts.tracking;
    rs.haptic = ts.haptic_on;
    rs.energy = ts.energy_on;
    rs.at_goal = s.at_goal;
    rs.gesture = loop.gesture();
    const std::string frame = wire::serialize(rs);
    for (auto& [id, peer] : peers) peer.first->send_state(frame);
    ++n_states;
  }

  template <class Seconds>
  void handle(ControlLoop& loop, Inbound& in, bool skip_classifier, const Seconds& seconds) {
    Session& s = *in.from;
    if (!in.msg) {
      peers.erase(s.id());
      if (operator_id == s.id()) {
        operator_id.reset();
        override_label.reset();
      }
      n_clients = peers.size();
      return;
    }
    const wire::Message& msg = *in.msg;

    if (std::holds_alternative<wire::Hello>(msg)) {
      auto it = peers.find(s.id());
      if (it == peers.end()) {
        const Role role = operator_id ? Role::Observer : Role::Operator;
        if (role == Role::Operator) operator_id = s.id();
        it = peers.emplace(s.id(), std::make_pair(in.from, role)).first;
        n_clients = peers.size();
      }
      wire::Ack ack;
      ack.of = "hello";
      ack.role = it->second.second == Role::Operator ? "operator" : "observer";
      ack.session = session_snapshot(loop);
      s.send(wire::serialize(ack));
      return;
    }
    const auto peer = peers.find(s.id());
    if (peer == peers.end()) return reply_error(s, "hello_required", "send hello first");

    const bool is_operator = peer->second.second == Role::Operator;
    const bool drives = std::holds_alternative<wire::HandInput>(msg) ||
                        std::holds_alternative<wire::GestureOverride>(msg) ||
                        std::holds_alternative<wire::SetConfig>(msg);
    if (!drives) {
      return reply_error(s, "unexpected_type",
                         "clients may not send " + std::string(wire::type_name(msg)));
    }
    if (!is_operator) return reply_error(s, "operator_taken", "another client is the operator");

    if (const auto* h = std::get_if<wire::HandInput>(&msg)) {
      on_hand_input(loop, *h, in.received, skip_classifier, seconds);
    } else if (const auto* g = std::get_if<wire::GestureOverride>(&msg)) {
      override_label = g->label;
      s.send(wire::serialize(wire::Ack{"gesture_override", {}, {}, {}, {}}));
    } else if (const auto* c = std::get_if<wire::SetConfig>(&msg)) {
      on_set_config(loop, s, *c, seconds);
    }
  }

  template <class Seconds>
  void on_hand_input(ControlLoop& loop, const wire::HandInput& h, Clock::time_point received,
                     bool skip_classifier, const Seconds& seconds) {
    // The server clock stamps every sample, keeping one monotone time base.
    const double t = std::max(seconds(Clock::now()), loop.sim().state().time);
    loop.advance_to(t, [this](const SimPsmState& st) {
      if (recording) record(SimStateRecord{st.time, st.tip, st.jaw, st.at_goal});
    });
    HandInput input;
    input.t = t;
    input.pose = Pose{h.pos, h.quat};
    input.finger_dist = h.finger_dist;
    input.landmarks = h.landmarks;
    input.raw_gesture = override_label;
    input.skip_classifier = skip_classifier;
    LoopOutput out;
    try {
      out = loop.on_hand(input);
    } catch (const Error& e) {
      if (operator_id) {
        if (auto it = peers.find(*operator_id); it != peers.end()) {
          reply_error(*it->second.first, "rejected", e.what());
        }
      }
      return;
    }
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - received).count();
    {
      std::lock_guard lock(stats_mu);
      ++stats.count;
      stats.mean_ms += (ms - stats.mean_ms) / static_cast<double>(stats.count);
      stats.max_ms = std::max(stats.max_ms, ms);
    }

    if (recording) {
      record(HandRecord{t, input.pose, h.landmarks, h.finger_dist});
      if (out.gesture_changed) record(GestureRecord{t, out.gesture});
    }
    for (TeleopEvent e : out.events) {
      record(EventRecord{t, e});
      broadcast(wire::serialize(wire::Event{e, t}));
    }
    if (out.command) record(GoalRecord{t, out.command->goal, out.command->jaw});
  }

  template <class Seconds>
  void on_set_config(ControlLoop& loop, Session& s, const wire::SetConfig& c, const Seconds& seconds) {
    wire::Ack ack;
    ack.of = "set_config";
    try {
      ControlConfig control = loop.teleop().config();
      if (c.hand_cube) control.hand_cube = *c.hand_cube;
      if (c.tip_cube) control.tip_cube = *c.tip_cube;
      if (c.eta) control.set_eta(*c.eta);
      control.validate();
      if (c.latency) loop.set_latency(*c.latency);
      if (c.hand_cube) loop.set_hand_cube(control.hand_cube);
      if (c.tip_cube || c.eta) loop.set_tip_cube(control.tip_cube);
    } catch (const Error& e) {
      return reply_error(s, "invalid_config", e.what());
    }
    if (c.record) {
      if (*c.record) {
        recording = TraceFile{};
        recording->config = loop.settings();
        // A recording begins mid-session, so its segments start from the live state.
        recording->config["control"]["start_tracking"] = loop.teleop().state().tracking &&
                                                         loop.teleop().state().clutch == ClutchPhase::Disengaged;
      } else if (recording) {
        loop.advance_to(seconds(Clock::now()), [this](const SimPsmState& st) {
          record(SimStateRecord{st.time, st.tip, st.jaw, st.at_goal});
        });
        TraceFile trace = std::move(*recording);
        recording.reset();
        TrialSummary summary;
        try {
          summary = summarize_trace(trace);
        } catch (const Error&) {
          summary = summarize_trace(trace, {}, 0.0);
        }
        std::ostringstream os;
        write_trace(os, trace);
        ack.summary = to_json(summary);
        ack.trace = os.str();
      }
    }
    ack.session = session_snapshot(loop);
    s.send(wire::serialize(ack));
  }
};

Gateway::Gateway(GatewayOptions opts) : impl_(std::make_unique<Impl>(std::move(opts))) {
  impl_->opts.settings.control.validate();
  impl_->opts.settings.sim.validate();
  impl_->opts.settings.session.validate();
}

Gateway::~Gateway() { stop(); }

void Gateway::start() {
  Impl& im = *impl_;
  boost::system::error_code ec;
  const auto address = net::ip::make_address(im.opts.address, ec);
  if (ec) throw Error(ErrorCode::BindFailure, "bad bind address " + im.opts.address);
  const tcp::endpoint endpoint(address, im.opts.port);
  im.acceptor.open(endpoint.protocol(), ec);
  if (!ec) im.acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) im.acceptor.bind(endpoint, ec);
  if (!ec) im.acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    throw Error(ErrorCode::BindFailure, "cannot bind " + im.opts.address + ":" +
                                            std::to_string(im.opts.port) + ": " + ec.message());
  }
  im.bound_port = im.acceptor.local_endpoint().port();
  im.running = true;
  im.accept();
  im.io_thread = std::thread([&im] { im.ioc.run(); });
  im.control_thread = std::thread([&im] { im.control_main(); });
}

void Gateway::stop() {
  Impl& im = *impl_;
  if (im.running.exchange(false)) {
    im.inbox_cv.notify_all();
    if (im.control_thread.joinable()) im.control_thread.join();
    net::post(im.ioc, [&im] {
      boost::system::error_code ec;
      im.acceptor.close(ec);
    });
    im.ioc.stop();
    if (im.io_thread.joinable()) im.io_thread.join();
    im.peers.clear();
    std::lock_guard lock(im.inbox_mu);
    im.inbox.clear();
  }
  {
    std::lock_guard lock(im.stop_mu);
    im.stopped = true;
  }
  im.stop_cv.notify_all();
}

void Gateway::wait() {
  std::unique_lock lock(impl_->stop_mu);
  impl_->stop_cv.wait(lock, [this] { return impl_->stopped; });
}

unsigned short Gateway::port() const { return impl_->bound_port; }

LatencyStats Gateway::latency() const {
  std::lock_guard lock(impl_->stats_mu);
  return impl_->stats;
}

std::size_t Gateway::clients() const { return impl_->n_clients; }
std::size_t Gateway::robot_states_broadcast() const { return impl_->n_states; }

}  // namespace glovelink
