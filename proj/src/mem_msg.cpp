#include "pcsim/mem_msg.hpp"

#include <fmt/format.h>

namespace pcsim {

Word word_in_line(const Line& line, unsigned offset) {
  PCSIM_REQUIRE(offset < kLineBytes && offset % 4 == 0,
                "word_in_line: offset must be a word-aligned line offset");
  return line.words[offset / 4];
}

void set_word_in_line(Line& line, unsigned offset, Word value) {
  PCSIM_REQUIRE(offset < kLineBytes && offset % 4 == 0,
                "set_word_in_line: offset must be a word-aligned line offset");
  line.words[offset / 4] = value;
}

const char* kind_mnemonic(MsgKind kind) {
  switch (kind) {
    case MsgKind::Init: return "in";
    case MsgKind::Read: return "rd";
    case MsgKind::Write: return "wr";
    case MsgKind::ReadCP: return "cp";
  }
  return "??";
}

std::string format_line(const Line& line) {
  return fmt::format("{:08x}{:08x}{:08x}{:08x}", line.words[3], line.words[2],
                     line.words[1], line.words[0]);
}

namespace {

std::string format_payload(const Line& data, std::uint8_t len) {
  if (len == 4) return fmt::format("{:08x}", data.words[0]);
  return format_line(data);
}

}  // namespace

std::string format_request(const MemRequest& req) {
  std::string out = fmt::format("{} {:08x} op={}", kind_mnemonic(req.kind),
                                req.addr, req.opaque);
  if (req.kind == MsgKind::Write || req.kind == MsgKind::Init)
    out += " data=" + format_payload(req.data, req.len);
  return out;
}

std::string format_response(const MemResponse& resp) {
  std::string out =
      fmt::format("{} op={}", kind_mnemonic(resp.kind), resp.opaque);
  if (resp.kind == MsgKind::Read || resp.kind == MsgKind::ReadCP)
    out += " data=" + format_payload(resp.data, resp.len);
  out += resp.hit ? " hit=1" : " hit=0";
  return out;
}

}  // namespace pcsim
