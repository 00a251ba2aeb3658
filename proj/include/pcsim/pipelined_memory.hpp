// Magic backing store behind a fixed-latency, inelastic, in-order pipeline.

#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pcsim/mem_msg.hpp"
#include "pcsim/sim_kernel.hpp"

namespace pcsim {

struct MemorySegment {
  Addr addr = 0;
  std::vector<std::uint8_t> bytes;
};

// Sparse line-granular store. Untouched lines read as zero.
class MemoryImage {
 public:
  Line read_line(Addr addr) const;
  void write_line(Addr addr, const Line& line);
  Word read_word(Addr addr) const;
  void write_word(Addr addr, Word value);

  // Later segments overwrite earlier ones. Bytes are little-endian within
  // each word.
  void load(std::span<const MemorySegment> segments);

  const std::map<Addr, Line>& lines() const { return lines_; }
  // Drops all-zero lines so images built along different paths compare equal.
  MemoryImage normalized() const;

  friend bool operator==(const MemoryImage&, const MemoryImage&) = default;

 private:
  std::map<Addr, Line> lines_;
};

// Text format: `<hex-addr>: <32 hex digits>` per line, `#` starts a comment.
// The 32 digits are the 128-bit line value, word 3 first.
MemoryImage parse_memory_image(std::istream& in);
void write_memory_image(std::ostream& out, const MemoryImage& image);

struct MemoryStats {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t stall_cycles = 0;
  std::uint64_t max_occupancy = 0;
};

class PipelinedMemory final : public Component {
 public:
  PipelinedMemory(std::string name, unsigned latency);

  InPort<MemRequest> req;
  OutPort<MemResponse> resp;

  void evaluate() const override;
  void commit() override;
  std::string state_name() const override;

  unsigned latency() const { return latency_; }
  std::size_t occupancy() const { return pipe_.size(); }
  bool quiescent() const { return pipe_.empty(); }

  MemoryImage& image() { return image_; }
  const MemoryImage& image() const { return image_; }
  void load_image(std::span<const MemorySegment> segments) { image_.load(segments); }

  const MemoryStats& stats() const { return stats_; }

 private:
  struct InFlight {
    MemResponse resp;
    unsigned remaining;  // cycles until the response may leave
  };

  bool head_ready() const { return !pipe_.empty() && pipe_.front().remaining == 0; }

  unsigned latency_;
  MemoryImage image_;
  std::deque<InFlight> pipe_;
  MemoryStats stats_;
};

}  // namespace pcsim
