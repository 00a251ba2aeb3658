// Message formats carried on the val/rdy channels plus the address
// arithmetic shared by the cache and the prefetcher.

#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pcsim {

using Addr = std::uint32_t;
using Word = std::uint32_t;

inline constexpr unsigned kLineBytes = 16;
inline constexpr unsigned kWordsPerLine = kLineBytes / 4;

// Raised when a caller breaks an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

#define PCSIM_REQUIRE(cond, msg)                                   \
  do {                                                             \
    if (!(cond)) throw ::pcsim::ContractViolation(msg);            \
  } while (0)

// 128-bit cache line. Word 0 occupies byte offsets 0-3.
struct Line {
  std::array<Word, kWordsPerLine> words{};

  friend bool operator==(const Line&, const Line&) = default;
};

enum class MsgKind : std::uint8_t { Init, Read, Write, ReadCP };

struct MemRequest {
  MsgKind kind = MsgKind::Read;
  Addr addr = 0;
  std::uint8_t opaque = 0;
  std::uint8_t len = 0;  // bytes; 0 means full width of the port
  Line data{};           // word accesses use data.words[0]

  friend bool operator==(const MemRequest&, const MemRequest&) = default;
};

struct MemResponse {
  MsgKind kind = MsgKind::Read;
  std::uint8_t opaque = 0;
  std::uint8_t len = 0;
  Line data{};
  bool hit = false;  // observability only; memory always reports false

  friend bool operator==(const MemResponse&, const MemResponse&) = default;
};

struct AddrGeometry {
  unsigned offset_bits;
  unsigned index_bits;

  constexpr unsigned tag_bits() const { return 32 - offset_bits - index_bits; }
  constexpr unsigned entries() const { return 1u << index_bits; }
};

// 256 B direct-mapped cache with 16 B lines.
inline constexpr AddrGeometry kCacheGeometry{4, 4};
// 4-entry prefetch buffer, 26-bit tags.
inline constexpr AddrGeometry kPrefetchGeometry{4, 2};

struct AddrParts {
  std::uint32_t tag = 0;
  std::uint32_t index = 0;
  std::uint32_t offset = 0;

  friend bool operator==(const AddrParts&, const AddrParts&) = default;
};

constexpr AddrParts split_address(Addr addr, AddrGeometry geo) {
  const std::uint32_t index_mask = (1u << geo.index_bits) - 1;
  const std::uint32_t offset_mask = (1u << geo.offset_bits) - 1;
  return {addr >> (geo.offset_bits + geo.index_bits),
          (addr >> geo.offset_bits) & index_mask, addr & offset_mask};
}

constexpr Addr join_address(const AddrParts& parts, AddrGeometry geo) {
  // tag_bits may be 32 - 4 - 0; shifting a 32-bit value by 32 is UB
  const unsigned tag_shift = geo.offset_bits + geo.index_bits;
  const Addr tag_part = tag_shift >= 32 ? 0 : parts.tag << tag_shift;
  return tag_part | (parts.index << geo.offset_bits) | parts.offset;
}

constexpr Addr line_base(Addr addr) { return addr & ~Addr{kLineBytes - 1}; }

Word word_in_line(const Line& line, unsigned offset);
void set_word_in_line(Line& line, unsigned offset, Word value);

const char* kind_mnemonic(MsgKind kind);

// `rd|wr|cp|in <addr-hex> op=<opaque> [data=<hex>]`
std::string format_request(const MemRequest& req);
// `rd|wr|cp|in op=<opaque> [data=<hex>] hit=0|1`
std::string format_response(const MemResponse& resp);
// 32 hex digits, most significant word (word 3) first.
std::string format_line(const Line& line);

}  // namespace pcsim
