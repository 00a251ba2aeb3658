// Direct-mapped, blocking, write-back / write-allocate data cache.

#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "pcsim/mem_msg.hpp"
#include "pcsim/sim_kernel.hpp"

namespace pcsim {

struct CacheLine {
  std::uint32_t tag = 0;
  bool valid = false;
  bool dirty = false;
  Line data{};
};

enum class CacheState : std::uint8_t {
  Idle,
  TagCheck,
  ReadDataAccess,
  WriteDataAccess,
  EvictRequest,
  EvictWait,
  RefillRequest,
  RefillWait,
  RefillUpdate,
  FlushScan,
};

const char* cache_state_mnemonic(CacheState s);

struct CacheStats {
  std::uint64_t read_hits = 0;
  std::uint64_t read_misses = 0;
  std::uint64_t write_hits = 0;
  std::uint64_t write_misses = 0;
  std::uint64_t readcp_hits = 0;
  std::uint64_t readcp_misses = 0;
  std::uint64_t evictions = 0;  // dirty write-backs caused by misses
  std::uint64_t flush_writes = 0;
  std::uint64_t downstream_requests = 0;
};

class BlockingCache final : public Component {
 public:
  static constexpr unsigned kLines = kCacheGeometry.entries();

  explicit BlockingCache(std::string name);

  InPort<MemRequest> core_req;
  OutPort<MemResponse> core_resp;
  OutPort<MemRequest> mem_req;
  InPort<MemResponse> mem_resp;

  void evaluate() const override;
  void commit() override;
  std::string state_name() const override { return cache_state_mnemonic(state_); }

  // Starts writing back every dirty line; the cache returns to Idle once done.
  // Requires the cache to be idle.
  void begin_flush();
  bool idle() const { return state_ == CacheState::Idle && !flushing_; }

  CacheState state() const { return state_; }
  const CacheStats& stats() const { return stats_; }
  const std::array<CacheLine, kLines>& lines() const { return lines_; }

 private:
  AddrParts request_parts() const { return split_address(req_.addr, kCacheGeometry); }
  MemResponse core_response() const;
  MemRequest evict_request() const;
  MemRequest refill_request() const;
  void finish_tag_check();
  void advance_flush();

  std::array<CacheLine, kLines> lines_{};
  CacheState state_ = CacheState::Idle;
  MemRequest req_{};
  bool hit_ = false;
  Line refill_data_{};
  unsigned victim_index_ = 0;
  bool flushing_ = false;
  unsigned flush_next_ = 0;
  CacheStats stats_;
};

}  // namespace pcsim
