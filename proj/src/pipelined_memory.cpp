#include "pcsim/pipelined_memory.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

namespace pcsim {

Line MemoryImage::read_line(Addr addr) const {
  auto it = lines_.find(line_base(addr));
  return it == lines_.end() ? Line{} : it->second;
}

void MemoryImage::write_line(Addr addr, const Line& line) {
  lines_[line_base(addr)] = line;
}

Word MemoryImage::read_word(Addr addr) const {
  return word_in_line(read_line(addr), (addr & (kLineBytes - 1)) & ~3u);
}

void MemoryImage::write_word(Addr addr, Word value) {
  set_word_in_line(lines_[line_base(addr)], (addr & (kLineBytes - 1)) & ~3u,
                   value);
}

void MemoryImage::load(std::span<const MemorySegment> segments) {
  for (const auto& seg : segments) {
    PCSIM_REQUIRE(seg.addr % 4 == 0, "load_image: segment must be word-aligned");
    for (std::size_t i = 0; i < seg.bytes.size(); ++i) {
      const Addr a = seg.addr + static_cast<Addr>(i);
      Line& line = lines_[line_base(a)];
      const unsigned off = a & (kLineBytes - 1);
      Word& w = line.words[off / 4];
      const unsigned shift = 8 * (off % 4);
      w = (w & ~(Word{0xff} << shift)) | (Word{seg.bytes[i]} << shift);
    }
  }
}

MemoryImage MemoryImage::normalized() const {
  MemoryImage out;
  for (const auto& [addr, line] : lines_)
    if (line != Line{}) out.lines_.emplace(addr, line);
  return out;
}

MemoryImage parse_memory_image(std::istream& in) {
  MemoryImage image;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    const auto first = raw.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto colon = raw.find(':');
    auto fail = [&](const char* what) {
      return ConfigError(fmt::format("memory image line {}: {}", lineno, what));
    };
    if (colon == std::string::npos) throw fail("expected '<addr>: <data>'");
    std::string addr_text = raw.substr(first, colon - first);
    std::string data_text = raw.substr(colon + 1);
    auto trim = [](std::string& s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
    };
    trim(addr_text);
    trim(data_text);
    if (data_text.size() != 32) throw fail("data must be 32 hex digits");
    Addr addr = 0;
    try {
      std::size_t used = 0;
      addr = static_cast<Addr>(std::stoul(addr_text, &used, 16));
      if (used != addr_text.size()) throw fail("bad address");
      Line line;
      for (unsigned w = 0; w < kWordsPerLine; ++w) {
        const std::string chunk = data_text.substr(8 * (kWordsPerLine - 1 - w), 8);
        line.words[w] = static_cast<Word>(std::stoul(chunk, &used, 16));
        if (used != 8) throw fail("bad hex data");
      }
      if (addr % kLineBytes != 0) throw fail("address must be 16-byte aligned");
      image.write_line(addr, line);
    } catch (const std::invalid_argument&) {
      throw fail("bad hex number");
    } catch (const std::out_of_range&) {
      throw fail("number out of range");
    }
  }
  return image;
}

void write_memory_image(std::ostream& out, const MemoryImage& image) {
  for (const auto& [addr, line] : image.lines())
    out << fmt::format("{:08x}: {}\n", addr, format_line(line));
}

PipelinedMemory::PipelinedMemory(std::string name, unsigned latency)
    : Component(std::move(name)), latency_(latency) {
  if (latency == 0)
    throw ConfigError("pipelined memory: latency must be at least 1 cycle");
}

void PipelinedMemory::evaluate() const {
  if (head_ready())
    resp.send(pipe_.front().resp);
  else
    resp.idle();
  const bool stalled = head_ready() && !resp.ready();
  req.set_ready(!stalled);
}

void PipelinedMemory::commit() {
  const bool stalled = head_ready() && !resp.fired();
  if (resp.fired()) pipe_.pop_front();
  if (stalled) {
    ++stats_.stall_cycles;
  } else {
    for (auto& e : pipe_)
      if (e.remaining > 0) --e.remaining;
  }

  if (req.fired()) {
    const MemRequest& r = req.peek();
    MemResponse out;
    out.kind = r.kind;
    out.opaque = r.opaque;
    out.len = r.len;
    switch (r.kind) {
      case MsgKind::Read:
      case MsgKind::ReadCP:
        out.data = image_.read_line(r.addr);
        if (r.len == 4) out.data = Line{{image_.read_word(r.addr), 0, 0, 0}};
        ++stats_.reads;
        break;
      case MsgKind::Write:
      case MsgKind::Init:
        if (r.len == 4)
          image_.write_word(r.addr, r.data.words[0]);
        else
          image_.write_line(r.addr, r.data);
        ++stats_.writes;
        break;
    }
    pipe_.push_back({out, latency_ - 1});
    stats_.max_occupancy =
        std::max<std::uint64_t>(stats_.max_occupancy, pipe_.size());
  }
}

std::string PipelinedMemory::state_name() const {
  return fmt::format("{}{}", pipe_.size(),
                     head_ready() && pipe_.size() > 0 ? "*" : "");
}

}  // namespace pcsim
