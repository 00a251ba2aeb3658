#include "pcsim/sim_kernel.hpp"

#include <fmt/format.h>

#include <ostream>

namespace pcsim {

std::string ChannelBase::render() const {
  if (fired_) return message_text();
  if (val_) return "#";
  return ".";
}

void System::settle() {
  for (auto& ch : channels_) ch->reset_signals();
  for (int pass = 0; pass < kMaxSettlePasses; ++pass) {
    for (auto& ch : channels_) ch->mark();
    for (const auto& comp : components_) comp->evaluate();
    bool changed = false;
    for (const auto& ch : channels_) changed |= ch->changed_since_mark();
    if (!changed) return;
  }
  throw SimError(fmt::format(
      "cycle {}: val/rdy signals did not settle within {} passes "
      "(combinational loop?) [{}]",
      cycle_, kMaxSettlePasses, state_summary()));
}

void System::step() {
  settle();
  for (auto& ch : channels_) ch->latch();
  // States are traced as they were while this cycle's transfers happened.
  if (trace_) write_trace_line();
  for (auto& comp : components_) comp->commit();
  ++cycle_;
}

RunOutcome System::run_until(const std::function<bool()>& done,
                             std::uint64_t max_cycles) {
  PCSIM_REQUIRE(max_cycles > 0, "run_until: max_cycles must be positive");
  RunOutcome out;
  const std::uint64_t start = cycle_;
  while (!done()) {
    if (cycle_ - start >= max_cycles) {
      out.cycles = cycle_ - start;
      out.diagnostic = fmt::format("no completion after {} cycles: {}",
                                   max_cycles, state_summary());
      return out;
    }
    step();
  }
  out.cycles = cycle_ - start;
  out.completed = true;
  return out;
}

std::string System::state_summary() const {
  std::string out;
  for (const auto& comp : components_) {
    if (!out.empty()) out += ' ';
    out += comp->name() + "=" + comp->state_name();
  }
  return out;
}

void System::write_trace_line() {
  if (!trace_header_done_) {
    std::string header = fmt::format("{:>7}", "cycle");
    for (const auto& comp : components_)
      header += fmt::format(" | {:<5}", comp->name());
    for (const auto& ch : channels_) header += " | " + ch->name();
    *trace_ << header << '\n';
    trace_header_done_ = true;
  }
  std::string line = fmt::format("{:>7}", cycle_);
  for (const auto& comp : components_)
    line += fmt::format(" | {:<5}", comp->state_name());
  for (const auto& ch : channels_) line += " | " + ch->render();
  *trace_ << line << '\n';
}

}  // namespace pcsim
