#include "pcsim/workloads.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <numeric>

namespace pcsim {

FreeList build_free_list(const FreeListParams& params) {
  if (params.node_count < 1) throw ConfigError("free list: node_count must be >= 1");
  if (params.node_size < 8 || params.node_size % 4 != 0)
    throw ConfigError("free list: node_size must be a multiple of 4 and >= 8");
  if (params.nodes_per_line != 1 && params.nodes_per_line != 2)
    throw ConfigError("free list: nodes_per_line must be 1 or 2");
  if (params.node_size * params.nodes_per_line > kLineBytes)
    throw ConfigError("free list: nodes_per_line * node_size exceeds a line");
  if (params.base % kLineBytes != 0)
    throw ConfigError("free list: base must be line-aligned");

  const unsigned per_line = params.nodes_per_line;
  const unsigned lines = (params.node_count + per_line - 1) / per_line;
  if (std::uint64_t{lines} * kLineBytes > params.region_bytes)
    throw ConfigError(fmt::format("free list: {} nodes need {} bytes, region is {}",
                                  params.node_count, lines * kLineBytes,
                                  params.region_bytes));

  std::vector<unsigned> order(lines);
  std::iota(order.begin(), order.end(), 0u);
  Lcg rng(params.seed);
  for (unsigned i = lines; i-- > 1;) std::swap(order[i], order[rng.below(i + 1)]);

  FreeList list;
  list.params = params;
  for (unsigned line : order)
    for (unsigned slot = 0; slot < per_line; ++slot)
      if (line * per_line + slot < params.node_count)
        list.chain.push_back(params.base + line * kLineBytes + slot * params.node_size);

  for (std::size_t i = 0; i < list.chain.size(); ++i) {
    const Addr node = list.chain[i];
    list.image.write_word(node, i + 1 < list.chain.size() ? list.chain[i + 1] : 0);
    for (unsigned off = 4; off < params.node_size; off += 4)
      list.image.write_word(node + off, rng.next());
  }
  return list;
}

namespace {

// Emits the ReadCP chain that walks `count` nodes starting from the node
// whose address is in register `start`. Returns the register holding the
// last loaded pointer.
std::uint8_t emit_walk(std::vector<CoreToken>& out, std::uint8_t start,
                       std::uint8_t spare_a, std::uint8_t spare_b,
                       std::size_t count, bool payload_read, unsigned gap) {
  std::uint8_t cur = start;
  for (std::size_t k = 0; k < count; ++k) {
    const std::uint8_t nxt = (k % 2 == 0) ? spare_a : spare_b;
    out.push_back(CoreToken::load_rel(TokenKind::ReadCP, nxt, cur, 0));
    if (payload_read) out.push_back(CoreToken::load_rel(TokenKind::Read, 4, cur, 4));
    if (gap > 0) out.push_back(CoreToken::compute(gap));
    cur = nxt;
  }
  return cur;
}

}  // namespace

Workload gen_traversal(const FreeList& list, unsigned compute_gap, bool payload_read) {
  Workload w;
  w.name = "traversal";
  w.image = list.image;
  if (list.head() == 0) return w;
  w.program.init_regs[1] = list.head();
  emit_walk(w.program.tokens, 1, 2, 3, list.chain.size(), payload_read, compute_gap);
  return w;
}

Workload gen_insertion(const FreeList& pool, unsigned list_length,
                       unsigned inserts, std::uint32_t seed,
                       unsigned compute_gap) {
  if (std::size_t{list_length} + inserts > pool.chain.size())
    throw ConfigError("insertion: pool too small for list plus inserts");

  FreeList list = pool;
  list.chain.resize(list_length);
  if (list_length > 0) list.image.write_word(list.chain.back(), 0);
  const Addr head_var = kGlobalsBase;
  list.image.write_word(head_var, list.head());

  if (inserts == 0) {
    Workload w = gen_traversal(list, compute_gap);
    w.name = "insertion";
    return w;
  }

  Workload w;
  w.name = "insertion";
  w.image = list.image;
  auto& out = w.program.tokens;

  std::vector<Addr> shadow = list.chain;
  std::size_t next_free = list_length;
  // Free pointer and its successor alternate between r5 and r6.
  std::uint8_t free_reg = 5;
  std::uint8_t tmp_reg = 6;
  w.program.init_regs[free_reg] = pool.chain[next_free];

  Lcg rng(seed);
  for (unsigned i = 0; i < inserts; ++i) {
    const Addr node = pool.chain[next_free++];
    const auto pos = rng.below(static_cast<std::uint32_t>(shadow.size()) + 1);
    out.push_back(CoreToken::load_rel(TokenKind::ReadCP, tmp_reg, free_reg, 0));
    if (pos == 0) {
      out.push_back(CoreToken::read_cp(head_var, 7));
      out.push_back(CoreToken::store_rel(free_reg, 0, 7));
      out.push_back(CoreToken::store_rel(0, static_cast<std::int32_t>(head_var), free_reg));
    } else {
      out.push_back(CoreToken::read_cp(head_var, 1));
      const std::uint8_t cur = emit_walk(out, 1, 2, 3, pos - 1, false, 0);
      out.push_back(CoreToken::load_rel(TokenKind::ReadCP, 7, cur, 0));
      out.push_back(CoreToken::store_rel(free_reg, 0, 7));
      out.push_back(CoreToken::store_rel(cur, 0, free_reg));
    }
    shadow.insert(shadow.begin() + pos, node);
    if (compute_gap > 0) out.push_back(CoreToken::compute(compute_gap));
    std::swap(free_reg, tmp_reg);
  }

  out.push_back(CoreToken::read_cp(head_var, 1));
  emit_walk(out, 1, 2, 3, shadow.size(), true, compute_gap);
  return w;
}

Workload gen_hashtable(unsigned buckets, unsigned keys, unsigned lookups,
                       std::uint32_t seed, unsigned compute_gap) {
  if (buckets < 1) throw ConfigError("hashtable: buckets must be >= 1");
  if (std::uint64_t{buckets} * 4 > kHeapBase - kBucketBase)
    throw ConfigError("hashtable: too many buckets");

  Workload w;
  w.name = "hashtable";
  FreeList pool;
  if (keys > 0) {
    FreeListParams p;
    p.node_count = keys;
    p.seed = seed;
    pool = build_free_list(p);
  }
  w.image = pool.image;

  auto bucket_addr = [](unsigned b) { return kBucketBase + 4 * b; };
  std::vector<std::vector<Addr>> chains(buckets);  // head first
  std::vector<Word> key_of(keys);
  Lcg rng(seed ^ 0x5eed);
  for (unsigned k = 0; k < keys; ++k) {
    const Addr node = pool.chain[k];
    const Word key = rng.next();
    const unsigned b = key % buckets;
    key_of[k] = key;
    auto& chain = chains[b];
    w.image.write_word(node, chain.empty() ? 0 : chain.front());
    w.image.write_word(node + 4, key);
    w.image.write_word(node + 8, k);
    chain.insert(chain.begin(), node);
  }
  for (unsigned b = 0; b < buckets; ++b)
    w.image.write_word(bucket_addr(b), chains[b].empty() ? 0 : chains[b].front());

  auto& out = w.program.tokens;
  for (unsigned i = 0; i < lookups; ++i) {
    if (keys == 0) {
      out.push_back(CoreToken::read(bucket_addr(rng.below(buckets)), 1));
    } else {
      const Word key = key_of[rng.below(keys)];
      const auto& chain = chains[key % buckets];
      out.push_back(CoreToken::read(bucket_addr(key % buckets), 1));
      std::uint8_t cur = 1;
      for (std::size_t j = 0; j < chain.size(); ++j) {
        const std::uint8_t nxt = (j % 2 == 0) ? 2 : 3;
        out.push_back(CoreToken::load_rel(TokenKind::ReadCP, nxt, cur, 0));
        out.push_back(CoreToken::load_rel(TokenKind::Read, 4, cur, 4));
        out.push_back(CoreToken::compute(2));
        if (w.image.read_word(chain[j] + 4) == key) break;
        cur = nxt;
      }
    }
    if (compute_gap > 0) out.push_back(CoreToken::compute(compute_gap));
  }
  return w;
}

Workload gen_hanoi_like(unsigned disks, unsigned compute_gap, std::uint32_t seed) {
  constexpr unsigned kCacheLines = kCacheGeometry.entries();
  if (disks < 1) throw ConfigError("hanoi: disks must be >= 1");
  if (disks + 2 > kCacheLines)
    throw ConfigError(fmt::format("hanoi: at most {} disks", kCacheLines - 2));

  FreeListParams p;
  p.base = kHanoiBase;
  p.node_count = disks;
  p.seed = seed;
  FreeList list = build_free_list(p);

  Workload w;
  w.name = "hanoi";
  w.image = list.image;
  const Addr tower_head = kHanoiBase + disks * kLineBytes;
  w.image.write_word(tower_head, list.head());

  // Log records go to the cache indices the list and head do not use.
  std::vector<unsigned> log_indices;
  for (unsigned idx = disks + 1; idx < kCacheLines; ++idx) log_indices.push_back(idx);
  const auto log_record = [&](unsigned m) {
    const unsigned n = static_cast<unsigned>(log_indices.size());
    return kHanoiLogBase + (m / n) * kLineBytes * kCacheLines +
           log_indices[m % n] * kLineBytes;
  };

  auto& out = w.program.tokens;
  out.push_back(CoreToken::read_cp(tower_head, 1));
  const unsigned moves = (1u << disks) - 1;
  for (unsigned m = 1; m <= moves; ++m) {
    for (int pass = 0; pass < 2; ++pass)
      emit_walk(out, 1, 2, 3, disks, false, compute_gap);
    const Addr rec = log_record(m - 1);
    out.push_back(CoreToken::write(rec, m));
    out.push_back(CoreToken::write(rec + 4, (m & (m - 1)) % 3));
    out.push_back(CoreToken::write(rec + 8, ((m | (m - 1)) + 1) % 3));
  }
  return w;
}

Workload gen_array_kernel(unsigned elements, unsigned compute_gap) {
  Workload w;
  w.name = "array";
  for (unsigned i = 0; i < elements; ++i) w.image.write_word(kArrayBase + 4 * i, i);
  auto& out = w.program.tokens;
  for (unsigned i = 0; i < elements; ++i) {
    const Addr a = kArrayBase + 4 * i;
    out.push_back(CoreToken::read(a, 1));
    if (compute_gap > 0) out.push_back(CoreToken::compute(compute_gap));
    out.push_back(CoreToken::write(a, 3 * i + 1));
  }
  return w;
}

Workload gen_random_stream(unsigned requests, RequestMix mix, std::uint32_t seed) {
  const unsigned total = mix.read_pct + mix.write_pct + mix.readcp_pct;
  if (total == 0) throw ConfigError("random stream: empty request mix");
  constexpr unsigned kRegionWords = 256;

  Workload w;
  w.name = "random";
  Lcg rng(seed);
  auto random_word_addr = [&] { return kRandomBase + 4 * rng.below(kRegionWords); };
  for (unsigned i = 0; i < kRegionWords; ++i)
    w.image.write_word(kRandomBase + 4 * i, random_word_addr());

  auto& out = w.program.tokens;
  for (unsigned i = 0; i < requests; ++i) {
    const unsigned pick = rng.below(total);
    const Addr addr = random_word_addr();
    if (pick < mix.read_pct) {
      out.push_back(CoreToken::read(addr));
    } else if (pick < mix.read_pct + mix.write_pct) {
      // Mostly pointers back into the region, occasionally null.
      out.push_back(CoreToken::write(addr, rng.below(8) == 0 ? 0 : random_word_addr()));
    } else {
      out.push_back(CoreToken::read_cp(addr));
    }
    if (rng.below(4) == 0) out.push_back(CoreToken::compute(rng.below(4)));
  }
  return w;
}

unsigned default_gap(const std::string& workload) {
  if (workload == "hanoi") return 2;
  if (workload == "array") return 8;
  if (workload == "random") return 0;
  return 8;
}

const std::vector<std::string>& workload_names() {
  static const std::vector<std::string> names = {"traversal", "insertion", "hashtable",
                                                 "hanoi", "array", "random", "file"};
  return names;
}

Workload make_workload(const WorkloadSpec& spec) {
  const unsigned gap = spec.gap.value_or(default_gap(spec.name));
  if (spec.name == "traversal") {
    FreeListParams p;
    p.node_count = spec.nodes;
    p.nodes_per_line = spec.nodes_per_line;
    p.node_size = kLineBytes / spec.nodes_per_line;
    p.seed = spec.seed;
    if (spec.nodes_per_line != 1 && spec.nodes_per_line != 2)
      throw ConfigError("nodes_per_line must be 1 or 2");
    return gen_traversal(build_free_list(p), gap);
  }
  if (spec.name == "insertion") {
    FreeListParams p;
    p.node_count = spec.nodes + spec.inserts;
    p.seed = spec.seed;
    return gen_insertion(build_free_list(p), spec.nodes, spec.inserts, spec.seed, gap);
  }
  if (spec.name == "hashtable")
    return gen_hashtable(spec.buckets, spec.keys, spec.lookups, spec.seed, gap);
  if (spec.name == "hanoi") return gen_hanoi_like(spec.disks, gap, spec.seed);
  if (spec.name == "array") return gen_array_kernel(spec.elements, gap);
  if (spec.name == "random") return gen_random_stream(spec.requests, {}, spec.seed);
  if (spec.name == "file") {
    Workload w;
    w.name = "file";
    std::ifstream prog(spec.program_path);
    if (!prog) throw ConfigError("cannot open program file '" + spec.program_path + "'");
    w.program = parse_program(prog);
    if (!spec.image_path.empty()) {
      std::ifstream img(spec.image_path);
      if (!img) throw ConfigError("cannot open image file '" + spec.image_path + "'");
      w.image = parse_memory_image(img);
    }
    return w;
  }
  throw ConfigError("unknown workload '" + spec.name + "'");
}

}  // namespace pcsim
