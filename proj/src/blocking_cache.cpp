#include "pcsim/blocking_cache.hpp"

namespace pcsim {

const char* cache_state_mnemonic(CacheState s) {
  switch (s) {
    case CacheState::Idle: return "I";
    case CacheState::TagCheck: return "TC";
    case CacheState::ReadDataAccess: return "RD";
    case CacheState::WriteDataAccess: return "WD";
    case CacheState::EvictRequest: return "ER";
    case CacheState::EvictWait: return "EW";
    case CacheState::RefillRequest: return "RR";
    case CacheState::RefillWait: return "RW";
    case CacheState::RefillUpdate: return "RU";
    case CacheState::FlushScan: return "FS";
  }
  return "?";
}

BlockingCache::BlockingCache(std::string name) : Component(std::move(name)) {}

MemResponse BlockingCache::core_response() const {
  MemResponse r;
  r.kind = req_.kind;
  r.opaque = req_.opaque;
  r.len = 4;
  r.hit = hit_;
  if (req_.kind != MsgKind::Write) {
    const AddrParts p = request_parts();
    r.data.words[0] = word_in_line(lines_[p.index].data, p.offset & ~3u);
  }
  return r;
}

MemRequest BlockingCache::evict_request() const {
  const CacheLine& victim = lines_[victim_index_];
  MemRequest r;
  r.kind = MsgKind::Write;
  r.addr = join_address({victim.tag, victim_index_, 0}, kCacheGeometry);
  r.data = victim.data;
  return r;
}

MemRequest BlockingCache::refill_request() const {
  MemRequest r;
  // Write misses allocate with a plain read; ReadCP keeps its kind and the
  // full address so the prefetcher can locate the next pointer.
  r.kind = req_.kind == MsgKind::ReadCP ? MsgKind::ReadCP : MsgKind::Read;
  r.addr = req_.addr;
  return r;
}

void BlockingCache::evaluate() const {
  core_req.set_ready(state_ == CacheState::Idle && !flushing_);
  mem_resp.set_ready(state_ == CacheState::EvictWait ||
                     state_ == CacheState::RefillWait);

  if (state_ == CacheState::ReadDataAccess ||
      state_ == CacheState::WriteDataAccess)
    core_resp.send(core_response());
  else
    core_resp.idle();

  if (state_ == CacheState::EvictRequest)
    mem_req.send(evict_request());
  else if (state_ == CacheState::RefillRequest)
    mem_req.send(refill_request());
  else
    mem_req.idle();
}

void BlockingCache::begin_flush() {
  PCSIM_REQUIRE(idle(), "flush requires an idle cache");
  flushing_ = true;
  flush_next_ = 0;
  state_ = CacheState::FlushScan;
}

void BlockingCache::advance_flush() {
  while (flush_next_ < kLines && !lines_[flush_next_].dirty) ++flush_next_;
  if (flush_next_ == kLines) {
    flushing_ = false;
    state_ = CacheState::Idle;
    return;
  }
  victim_index_ = flush_next_++;
  state_ = CacheState::EvictRequest;
}

void BlockingCache::finish_tag_check() {
  const AddrParts p = request_parts();
  const CacheLine& line = lines_[p.index];
  hit_ = line.valid && line.tag == p.tag;

  switch (req_.kind) {
    case MsgKind::Read: ++(hit_ ? stats_.read_hits : stats_.read_misses); break;
    case MsgKind::Write: ++(hit_ ? stats_.write_hits : stats_.write_misses); break;
    case MsgKind::ReadCP: ++(hit_ ? stats_.readcp_hits : stats_.readcp_misses); break;
    case MsgKind::Init: break;
  }

  if (hit_) {
    state_ = req_.kind == MsgKind::Write ? CacheState::WriteDataAccess
                                         : CacheState::ReadDataAccess;
  } else if (line.valid && line.dirty) {
    victim_index_ = p.index;
    state_ = CacheState::EvictRequest;
  } else {
    state_ = CacheState::RefillRequest;
  }
}

void BlockingCache::commit() {
  switch (state_) {
    case CacheState::Idle:
      if (core_req.fired()) {
        req_ = core_req.peek();
        PCSIM_REQUIRE(req_.addr % 4 == 0, "cache: misaligned core request");
        PCSIM_REQUIRE(req_.kind != MsgKind::Init,
                      "cache: init requests are not accepted from the core");
        state_ = CacheState::TagCheck;
      }
      break;
    case CacheState::TagCheck:
      finish_tag_check();
      break;
    case CacheState::ReadDataAccess:
      if (core_resp.fired()) state_ = CacheState::Idle;
      break;
    case CacheState::WriteDataAccess:
      if (core_resp.fired()) {
        const AddrParts p = request_parts();
        set_word_in_line(lines_[p.index].data, p.offset & ~3u, req_.data.words[0]);
        lines_[p.index].dirty = true;
        state_ = CacheState::Idle;
      }
      break;
    case CacheState::EvictRequest:
      if (mem_req.fired()) {
        ++stats_.downstream_requests;
        ++(flushing_ ? stats_.flush_writes : stats_.evictions);
        state_ = CacheState::EvictWait;
      }
      break;
    case CacheState::EvictWait:
      if (mem_resp.fired()) {
        lines_[victim_index_].dirty = false;
        if (flushing_)
          advance_flush();
        else
          state_ = CacheState::RefillRequest;
      }
      break;
    case CacheState::RefillRequest:
      if (mem_req.fired()) {
        ++stats_.downstream_requests;
        state_ = CacheState::RefillWait;
      }
      break;
    case CacheState::RefillWait:
      if (mem_resp.fired()) {
        refill_data_ = mem_resp.peek().data;
        state_ = CacheState::RefillUpdate;
      }
      break;
    case CacheState::RefillUpdate: {
      const AddrParts p = request_parts();
      lines_[p.index] = CacheLine{p.tag, true, false, refill_data_};
      state_ = req_.kind == MsgKind::Write ? CacheState::WriteDataAccess
                                           : CacheState::ReadDataAccess;
      break;
    }
    case CacheState::FlushScan:
      advance_flush();
      break;
  }
}

}  // namespace pcsim
