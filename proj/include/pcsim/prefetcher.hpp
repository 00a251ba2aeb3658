// Pointer-chase prefetcher placed between the cache and memory.
//
// Four direct-mapped entries hold prefetched lines. Each entry has separate
// tag-valid and data-valid bits: a tag that is valid while its data is not
// marks a prefetch fill that is still in the memory pipeline, so a demand
// access to that line waits for the fill instead of issuing a second read.
//
// Memory traffic is tagged through the opaque field: 0 for requests
// forwarded on behalf of the cache, 1 for next-node prefetches. Only one
// prefetch may be outstanding; it is tracked by the buffer address register.

#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "pcsim/mem_msg.hpp"
#include "pcsim/sim_kernel.hpp"

namespace pcsim {

struct PrefetchEntry {
  std::uint32_t tag = 0;  // 26 bits
  bool tag_valid = false;
  bool data_valid = false;
  Line data{};
  // Bookkeeping for the useful-prefetch counter; not part of the datapath.
  bool from_prefetch = false;
  bool demanded = false;
};

struct BufferAddressRegister {
  Addr next_addr = 0;
  bool busy = false;  // a prefetch for next_addr is in the memory pipeline
};

enum class PrefetchState : std::uint8_t {
  Idle,
  TagCheck,
  Init,
  PushNext,
  BufferToMemory,
  WaitMem,
  StallMem,
  WaitDataInvalid,
};

const char* prefetch_state_mnemonic(PrefetchState s);

struct PrefetchStats {
  std::uint64_t read_hits = 0;
  std::uint64_t readcp_hits = 0;
  std::uint64_t read_misses = 0;
  std::uint64_t readcp_misses = 0;
  std::uint64_t writes = 0;
  std::uint64_t write_hits = 0;
  std::uint64_t prefetches_issued = 0;
  // Next-node addresses discarded because a prefetch was already outstanding.
  std::uint64_t prefetches_dropped = 0;
  std::uint64_t prefetch_fills = 0;
  // Fills whose entry was invalidated by a write while in flight.
  std::uint64_t fills_discarded = 0;
  std::uint64_t useful_prefetch_hits = 0;
  std::uint64_t null_pointers = 0;
  std::uint64_t data_invalid_waits = 0;
};

struct PrefetcherOptions {
  // Fault injection: every lookup misses and nothing is prefetched.
  bool disable_prefetch = false;
};

struct TagLookup {
  bool hit = false;
  std::uint32_t index = 0;
  std::uint32_t offset = 0;
};

class PointerChasePrefetcher final : public Component {
 public:
  static constexpr unsigned kEntries = kPrefetchGeometry.entries();
  using Entries = std::array<PrefetchEntry, kEntries>;

  explicit PointerChasePrefetcher(std::string name, PrefetcherOptions opts = {});

  InPort<MemRequest> cache_req;
  OutPort<MemResponse> cache_resp;
  OutPort<MemRequest> mem_req;
  InPort<MemResponse> mem_resp;

  void evaluate() const override;
  void commit() override;
  std::string state_name() const override { return prefetch_state_mnemonic(state_); }

  TagLookup tag_check(Addr addr) const { return lookup(entries_, addr); }
  static TagLookup lookup(const Entries& entries, Addr addr);

  PrefetchState state() const { return state_; }
  const Entries& entries() const { return entries_; }
  const BufferAddressRegister& buffer() const { return buffer_; }
  const PrefetchStats& stats() const { return stats_; }
  std::uint64_t prefetches_in_flight() const {
    return stats_.prefetches_issued - stats_.prefetch_fills - stats_.fills_discarded;
  }
  bool idle() const { return state_ == PrefetchState::Idle; }

 private:
  bool fill_arriving() const;
  // Entries as they will be after this cycle's fill, if one is arriving.
  // Tag checks use this view so a same-cycle fill is visible.
  Entries effective_entries() const;
  bool chases() const;
  MemRequest forwarded_request() const;
  MemResponse hit_response(const PrefetchEntry& e) const;

  void apply_fill(const MemResponse& fill);
  void mark_demanded(PrefetchEntry& e);
  void enter_push_next(const Line& line);
  void accept_or_idle();

  PrefetcherOptions opts_;
  Entries entries_{};
  BufferAddressRegister buffer_;
  PrefetchState state_ = PrefetchState::Idle;
  MemRequest req_{};
  bool write_hit_ = false;
  Line chase_line_{};
  unsigned chase_offset_ = 0;
  PrefetchStats stats_;
};

// Next-node address: the pointer stored at the requested word of the line.
inline Addr agu_next_address(const Line& line, unsigned offset) {
  return word_in_line(line, offset);
}

}  // namespace pcsim
