#include "pcsim/prefetcher.hpp"

#include <fmt/format.h>

namespace pcsim {

const char* prefetch_state_mnemonic(PrefetchState s) {
  switch (s) {
    case PrefetchState::Idle: return "I";
    case PrefetchState::TagCheck: return "TC";
    case PrefetchState::Init: return "IN";
    case PrefetchState::PushNext: return "PN";
    case PrefetchState::BufferToMemory: return "BM";
    case PrefetchState::WaitMem: return "WM";
    case PrefetchState::StallMem: return "SM";
    case PrefetchState::WaitDataInvalid: return "DI";
  }
  return "?";
}

PointerChasePrefetcher::PointerChasePrefetcher(std::string name,
                                               PrefetcherOptions opts)
    : Component(std::move(name)), opts_(opts) {}

TagLookup PointerChasePrefetcher::lookup(const Entries& entries, Addr addr) {
  const AddrParts p = split_address(addr, kPrefetchGeometry);
  const PrefetchEntry& e = entries[p.index];
  return {e.tag_valid && e.tag == p.tag, p.index, p.offset};
}

bool PointerChasePrefetcher::fill_arriving() const {
  return mem_resp.valid() && mem_resp.peek().opaque == 1;
}

PointerChasePrefetcher::Entries PointerChasePrefetcher::effective_entries() const {
  if (!fill_arriving() || !buffer_.busy) return entries_;
  Entries view = entries_;
  const AddrParts p = split_address(buffer_.next_addr, kPrefetchGeometry);
  PrefetchEntry& e = view[p.index];
  if (e.tag_valid && e.tag == p.tag) {
    e.data = mem_resp.peek().data;
    e.data_valid = true;
  }
  return view;
}

bool PointerChasePrefetcher::chases() const {
  return req_.kind == MsgKind::ReadCP && !opts_.disable_prefetch;
}

MemRequest PointerChasePrefetcher::forwarded_request() const {
  MemRequest r = req_;
  r.opaque = 0;
  return r;
}

MemResponse PointerChasePrefetcher::hit_response(const PrefetchEntry& e) const {
  MemResponse r;
  r.kind = req_.kind;
  r.opaque = req_.opaque;
  r.data = e.data;
  r.hit = true;
  return r;
}

void PointerChasePrefetcher::evaluate() const {
  bool accept = false;
  bool mem_resp_ready = fill_arriving();
  cache_resp.idle();
  mem_req.idle();

  switch (state_) {
    case PrefetchState::Idle:
      accept = true;
      break;

    case PrefetchState::TagCheck: {
      if (req_.kind == MsgKind::Init) break;
      if (req_.kind == MsgKind::Write) {
        mem_req.send(forwarded_request());
        break;
      }
      const Entries view = effective_entries();
      const TagLookup t = lookup(view, req_.addr);
      if (t.hit && !opts_.disable_prefetch) {
        if (view[t.index].data_valid) {
          cache_resp.send(hit_response(view[t.index]));
          accept = !chases() && cache_resp.ready();
        }
      } else {
        mem_req.send(forwarded_request());
      }
      break;
    }

    case PrefetchState::Init: {
      MemResponse r;
      r.kind = MsgKind::Init;
      r.opaque = req_.opaque;
      cache_resp.send(r);
      accept = cache_resp.ready();
      break;
    }

    case PrefetchState::PushNext:
      break;

    case PrefetchState::BufferToMemory: {
      MemRequest r;
      r.kind = MsgKind::Read;
      r.addr = line_base(buffer_.next_addr);
      r.opaque = 1;
      mem_req.send(r);
      accept = mem_req.ready();
      break;
    }

    case PrefetchState::WaitMem:
    case PrefetchState::StallMem:
      if (mem_resp.valid() && mem_resp.peek().opaque == 0) {
        MemResponse r = mem_resp.peek();
        r.kind = req_.kind;
        r.opaque = req_.opaque;
        r.hit = req_.kind == MsgKind::Write && write_hit_;
        cache_resp.send(r);
        mem_resp_ready = cache_resp.ready();
        accept = !chases() && cache_resp.ready();
      }
      break;

    case PrefetchState::WaitDataInvalid: {
      const Entries view = effective_entries();
      const TagLookup t = lookup(view, req_.addr);
      if (t.hit && view[t.index].data_valid) {
        cache_resp.send(hit_response(view[t.index]));
        accept = !chases() && cache_resp.ready();
      }
      break;
    }
  }

  cache_req.set_ready(accept);
  mem_resp.set_ready(mem_resp_ready);
}

void PointerChasePrefetcher::apply_fill(const MemResponse& fill) {
  if (!buffer_.busy)
    throw SimError(fmt::format(
        "{}: prefetch response (opaque=1) with no prefetch outstanding", name()));
  const AddrParts p = split_address(buffer_.next_addr, kPrefetchGeometry);
  PrefetchEntry& e = entries_[p.index];
  if (e.tag_valid && e.tag == p.tag) {
    e.data = fill.data;
    e.data_valid = true;
    e.from_prefetch = true;
    e.demanded = false;
    ++stats_.prefetch_fills;
  } else {
    ++stats_.fills_discarded;
  }
  buffer_.busy = false;
}

void PointerChasePrefetcher::mark_demanded(PrefetchEntry& e) {
  if (e.from_prefetch && !e.demanded) ++stats_.useful_prefetch_hits;
  e.demanded = true;
}

void PointerChasePrefetcher::enter_push_next(const Line& line) {
  chase_line_ = line;
  chase_offset_ = req_.addr & (kLineBytes - 4);
  state_ = PrefetchState::PushNext;
}

void PointerChasePrefetcher::accept_or_idle() {
  if (cache_req.fired()) {
    req_ = cache_req.peek();
    state_ = PrefetchState::TagCheck;
  } else {
    state_ = PrefetchState::Idle;
  }
}

void PointerChasePrefetcher::commit() {
  // The fill path runs alongside the FSM and lands first, so the FSM below
  // sees the same entries that evaluate() exposed through the bypass.
  if (mem_resp.fired() && mem_resp.peek().opaque == 1) apply_fill(mem_resp.peek());

  switch (state_) {
    case PrefetchState::Idle:
      accept_or_idle();
      break;

    case PrefetchState::TagCheck: {
      if (req_.kind == MsgKind::Init) {
        state_ = PrefetchState::Init;
        break;
      }
      const TagLookup t = lookup(entries_, req_.addr);
      if (req_.kind == MsgKind::Write) {
        if (mem_req.fired()) {
          ++stats_.writes;
          write_hit_ = t.hit;
          if (t.hit) {
            ++stats_.write_hits;
            entries_[t.index].tag_valid = false;
            entries_[t.index].data_valid = false;
          }
          state_ = PrefetchState::WaitMem;
        }
        break;
      }
      const bool cp = req_.kind == MsgKind::ReadCP;
      if (t.hit && !opts_.disable_prefetch) {
        PrefetchEntry& e = entries_[t.index];
        if (!e.data_valid) {
          ++(cp ? stats_.readcp_hits : stats_.read_hits);
          ++stats_.data_invalid_waits;
          state_ = PrefetchState::WaitDataInvalid;
        } else if (cache_resp.fired()) {
          ++(cp ? stats_.readcp_hits : stats_.read_hits);
          mark_demanded(e);
          if (chases())
            enter_push_next(e.data);
          else
            accept_or_idle();
        }
      } else if (mem_req.fired()) {
        ++(cp ? stats_.readcp_misses : stats_.read_misses);
        state_ = PrefetchState::WaitMem;
      }
      break;
    }

    case PrefetchState::Init:
      if (cache_resp.fired()) {
        const AddrParts p = split_address(req_.addr, kPrefetchGeometry);
        entries_[p.index] = PrefetchEntry{p.tag, true, true, req_.data, false, false};
        accept_or_idle();
      }
      break;

    case PrefetchState::PushNext: {
      const Addr next = agu_next_address(chase_line_, chase_offset_);
      state_ = PrefetchState::Idle;
      if (next == 0) {
        ++stats_.null_pointers;
      } else if (buffer_.busy) {
        ++stats_.prefetches_dropped;
      } else {
        buffer_.next_addr = next;
        const AddrParts p = split_address(next, kPrefetchGeometry);
        entries_[p.index] = PrefetchEntry{p.tag, true, false, Line{}, false, false};
        state_ = PrefetchState::BufferToMemory;
      }
      break;
    }

    case PrefetchState::BufferToMemory:
      if (mem_req.fired()) {
        buffer_.busy = true;
        ++stats_.prefetches_issued;
        accept_or_idle();
      }
      break;

    case PrefetchState::WaitMem:
    case PrefetchState::StallMem:
      if (cache_resp.fired()) {
        if (!chases()) {
          accept_or_idle();
        } else if (buffer_.busy) {
          ++stats_.prefetches_dropped;
          state_ = PrefetchState::Idle;
        } else {
          enter_push_next(mem_resp.peek().data);
        }
      } else if (mem_resp.valid() && mem_resp.peek().opaque == 0) {
        state_ = PrefetchState::StallMem;
      }
      break;

    case PrefetchState::WaitDataInvalid: {
      const TagLookup t = lookup(entries_, req_.addr);
      if (!t.hit) {
        state_ = PrefetchState::TagCheck;
      } else if (cache_resp.fired()) {
        PrefetchEntry& e = entries_[t.index];
        mark_demanded(e);
        if (chases())
          enter_push_next(e.data);
        else
          accept_or_idle();
      }
      break;
    }
  }
}

}  // namespace pcsim
