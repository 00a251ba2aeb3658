// Benchmark generators. Each produces a token program plus the initial
// memory image it runs against. Generators are pure functions of their
// parameters and seed.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pcsim/core_model.hpp"
#include "pcsim/pipelined_memory.hpp"

namespace pcsim {

// Classical ANSI C rand() recurrence: (1103515245 * s + 12345) mod 2^31.
constexpr std::uint32_t lcg_next(std::uint32_t state) {
  return (1103515245u * state + 12345u) & 0x7fffffffu;
}

class Lcg {
 public:
  explicit Lcg(std::uint32_t seed) : state_(seed) {}
  std::uint32_t next() { return state_ = lcg_next(state_); }
  // Uniform-ish in [0, n).
  std::uint32_t below(std::uint32_t n) { return next() % n; }

 private:
  std::uint32_t state_;
};

// Fixed address map shared by the generators.
inline constexpr Addr kGlobalsBase = 0x0000'0800;
inline constexpr Addr kBucketBase = 0x0000'8000;
inline constexpr Addr kHeapBase = 0x0001'0000;
inline constexpr Addr kHanoiBase = 0x0002'0000;
inline constexpr Addr kHanoiLogBase = 0x0003'0000;
inline constexpr Addr kArrayBase = 0x0004'0000;
inline constexpr Addr kRandomBase = 0x0005'0000;

struct FreeListParams {
  Addr base = kHeapBase;
  unsigned node_size = 16;      // bytes; multiple of 4, at least 8
  unsigned node_count = 64;
  std::uint32_t seed = 1;
  unsigned nodes_per_line = 1;  // 1 or 2
  std::uint32_t region_bytes = 0x1'0000;
};

// Array of nodes linked in a seeded random order. Word 0 of every node is
// the address of its successor; the last node holds 0. With two nodes per
// line the lines are visited in random order and the two nodes sharing a
// line are consecutive in the chain.
struct FreeList {
  FreeListParams params;
  std::vector<Addr> chain;  // node addresses in link order
  MemoryImage image;

  Addr head() const { return chain.empty() ? 0 : chain.front(); }
};

FreeList build_free_list(const FreeListParams& params);

struct Workload {
  std::string name;
  Program program;
  MemoryImage image;
};

Workload gen_traversal(const FreeList& list, unsigned compute_gap,
                       bool payload_read = true);

// Keeps the first `list_length` nodes of `pool` as the list (head stored at
// kGlobalsBase) and splices `inserts` nodes taken from the rest of the pool
// at random positions, then traverses the result. With zero inserts the
// program is exactly gen_traversal of the list.
Workload gen_insertion(const FreeList& pool, unsigned list_length,
                       unsigned inserts, std::uint32_t seed,
                       unsigned compute_gap);

Workload gen_hashtable(unsigned buckets, unsigned keys, unsigned lookups,
                       std::uint32_t seed, unsigned compute_gap);

// A `disks`-node list walked twice per move for 2^disks - 1 moves, with each
// move appended to a log. The list and its head pointer stay cache
// resident; the log streams through the remaining cache lines.
Workload gen_hanoi_like(unsigned disks, unsigned compute_gap,
                        std::uint32_t seed = 1);

// In-place update over a dense array; no ReadCP tokens.
Workload gen_array_kernel(unsigned elements, unsigned compute_gap);

struct RequestMix {
  unsigned read_pct = 50;
  unsigned write_pct = 20;
  unsigned readcp_pct = 30;
};

// Fixed-address stream over a 1 KiB region whose words all hold pointers
// into the region.
Workload gen_random_stream(unsigned requests, RequestMix mix,
                           std::uint32_t seed);

struct WorkloadSpec {
  std::string name = "traversal";
  unsigned nodes = 64;
  unsigned nodes_per_line = 1;
  std::optional<unsigned> gap;  // per-workload default when unset
  std::uint32_t seed = 1;
  unsigned buckets = 16;
  unsigned keys = 64;
  unsigned lookups = 64;
  unsigned inserts = 16;
  unsigned disks = 6;
  unsigned elements = 256;
  unsigned requests = 10000;
  // "file" workload: fixed trace in the token-program text format plus an
  // optional memory image file.
  std::string program_path;
  std::string image_path;
};

unsigned default_gap(const std::string& workload);
const std::vector<std::string>& workload_names();
// Throws ConfigError for unknown names or invalid parameters.
Workload make_workload(const WorkloadSpec& spec);

}  // namespace pcsim
