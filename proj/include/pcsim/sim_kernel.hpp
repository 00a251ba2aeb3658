// Val/rdy channels and the two-phase (settle, commit) cycle loop.
//
// Every cycle starts with all channel signals deasserted. Components then
// drive their outputs from registered state and the current input signals;
// this repeats until no signal changes (bounded by kMaxSettlePasses). The
// commit phase latches val&&rdy on every channel and lets each component
// update its registers exactly once.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pcsim/mem_msg.hpp"

namespace pcsim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxSettlePasses = 8;

inline std::string trace_text(const MemRequest& req) { return format_request(req); }
inline std::string trace_text(const MemResponse& resp) { return format_response(resp); }

class ChannelBase {
 public:
  explicit ChannelBase(std::string name) : name_(std::move(name)) {}
  virtual ~ChannelBase() = default;
  ChannelBase(const ChannelBase&) = delete;
  ChannelBase& operator=(const ChannelBase&) = delete;

  const std::string& name() const { return name_; }
  bool val() const { return val_; }
  bool rdy() const { return rdy_; }
  bool fired() const { return fired_; }
  std::uint64_t transfers() const { return transfers_; }

  // "." idle, "#" valid but not ready, otherwise the transferred message.
  std::string render() const;

 protected:
  virtual std::string message_text() const = 0;

  void drive_val(bool v) { val_ = v; }
  void drive_rdy(bool r) { rdy_ = r; }

  // Settle compares the signals at the end of a pass against the values
  // recorded at its start; intermediate writes within a pass do not count.
  virtual void mark_message() = 0;
  virtual bool message_changed() const = 0;

 private:
  friend class System;
  void reset_signals() { val_ = rdy_ = fired_ = false; }
  void mark() {
    marked_val_ = val_;
    marked_rdy_ = rdy_;
    mark_message();
  }
  bool changed_since_mark() const {
    return val_ != marked_val_ || rdy_ != marked_rdy_ || (val_ && message_changed());
  }
  void latch() {
    fired_ = val_ && rdy_;
    if (fired_) ++transfers_;
  }

  std::string name_;
  bool val_ = false;
  bool rdy_ = false;
  bool fired_ = false;
  bool marked_val_ = false;
  bool marked_rdy_ = false;
  std::uint64_t transfers_ = 0;
};

template <class T>
class Channel final : public ChannelBase {
 public:
  using ChannelBase::ChannelBase;

  const T& msg() const { return msg_; }

  void offer(const T& m) {
    msg_ = m;
    drive_val(true);
  }
  void withdraw() { drive_val(false); }
  void set_ready(bool r) { drive_rdy(r); }

 protected:
  std::string message_text() const override { return trace_text(msg_); }
  void mark_message() override { marked_msg_ = msg_; }
  bool message_changed() const override { return !(msg_ == marked_msg_); }

 private:
  T msg_{};
  T marked_msg_{};
};

// Producer end. An unbound port never sees ready.
template <class T>
class OutPort {
 public:
  void send(const T& msg) const {
    if (ch_) ch_->offer(msg);
  }
  void idle() const {
    if (ch_) ch_->withdraw();
  }
  bool ready() const { return ch_ && ch_->rdy(); }
  bool fired() const { return ch_ && ch_->fired(); }
  bool bound() const { return ch_ != nullptr; }

 private:
  friend class System;
  Channel<T>* ch_ = nullptr;
};

// Consumer end. An unbound port never sees valid.
template <class T>
class InPort {
 public:
  bool valid() const { return ch_ && ch_->val(); }
  const T& peek() const { return ch_->msg(); }
  void set_ready(bool r) const {
    if (ch_) ch_->set_ready(r);
  }
  bool fired() const { return ch_ && ch_->fired(); }
  bool bound() const { return ch_ != nullptr; }

 private:
  friend class System;
  Channel<T>* ch_ = nullptr;
};

class Component {
 public:
  explicit Component(std::string name) : name_(std::move(name)) {}
  virtual ~Component() = default;
  Component(const Component&) = delete;
  Component& operator=(const Component&) = delete;

  const std::string& name() const { return name_; }

  // Drives every output signal as a pure function of registered state and
  // current input signals. Must be idempotent within a cycle.
  virtual void evaluate() const = 0;
  // Applies the cycle's transfers to registered state.
  virtual void commit() = 0;
  // Short FSM mnemonic for line traces.
  virtual std::string state_name() const = 0;

 private:
  std::string name_;
};

struct RunOutcome {
  std::uint64_t cycles = 0;  // cycles elapsed during this run
  bool completed = false;
  std::string diagnostic;  // set when max_cycles was hit
};

class System {
 public:
  System() = default;
  System(const System&) = delete;
  System& operator=(const System&) = delete;
  System(System&&) = default;
  System& operator=(System&&) = default;

  template <class C, class... Args>
  C& add(Args&&... args) {
    auto owned = std::make_unique<C>(std::forward<Args>(args)...);
    C& ref = *owned;
    components_.push_back(std::move(owned));
    return ref;
  }

  template <class T>
  Channel<T>& connect(OutPort<T>& producer, InPort<T>& consumer,
                      std::string name) {
    if (producer.ch_ || consumer.ch_)
      throw ConfigError("connect: port already bound (" + name + ")");
    auto owned = std::make_unique<Channel<T>>(std::move(name));
    Channel<T>& ch = *owned;
    producer.ch_ = &ch;
    consumer.ch_ = &ch;
    channels_.push_back(std::move(owned));
    return ch;
  }

  void step();
  RunOutcome run_until(const std::function<bool()>& done,
                       std::uint64_t max_cycles);

  std::uint64_t cycle() const { return cycle_; }
  const std::vector<std::unique_ptr<ChannelBase>>& channels() const {
    return channels_;
  }
  const std::vector<std::unique_ptr<Component>>& components() const {
    return components_;
  }

  // Per-cycle line trace; nullptr disables.
  void set_trace(std::ostream* out) {
    trace_ = out;
    trace_header_done_ = false;
  }
  // "name=STATE ..." for every component, used in deadlock reports.
  std::string state_summary() const;

 private:
  void settle();
  void write_trace_line();

  std::vector<std::unique_ptr<Component>> components_;
  std::vector<std::unique_ptr<ChannelBase>> channels_;
  std::uint64_t cycle_ = 0;
  std::ostream* trace_ = nullptr;
  bool trace_header_done_ = false;
};

}  // namespace pcsim
