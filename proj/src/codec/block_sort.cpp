#include "block_sort.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "ncdnet/error.hpp"
#include "range_coder.hpp"
#include "varint.hpp"

namespace ncdnet::codec {
namespace {

constexpr std::uint8_t kMagic = 0xB5;

// Prefix-doubling sort of cyclic shifts with counting sort per round.
// `s` must contain a unique minimum symbol so cyclic order == suffix order.
std::vector<std::int32_t> sort_cyclic_shifts(const std::vector<std::int32_t>& s, int alphabet) {
  const auto n = static_cast<std::int32_t>(s.size());
  std::vector<std::int32_t> p(n), c(n), pn(n), cn(n);
  std::vector<std::int32_t> cnt(std::max<std::int32_t>(alphabet, n), 0);

  for (auto v : s) ++cnt[v];
  for (int i = 1; i < alphabet; ++i) cnt[i] += cnt[i - 1];
  for (std::int32_t i = n - 1; i >= 0; --i) p[--cnt[s[i]]] = i;
  c[p[0]] = 0;
  std::int32_t classes = 1;
  for (std::int32_t i = 1; i < n; ++i) {
    if (s[p[i]] != s[p[i - 1]]) ++classes;
    c[p[i]] = classes - 1;
  }

  for (std::int64_t h = 1; h < n && classes < n; h <<= 1) {
    for (std::int32_t i = 0; i < n; ++i) {
      pn[i] = static_cast<std::int32_t>((p[i] - h + n) % n);
    }
    std::fill(cnt.begin(), cnt.begin() + classes, 0);
    for (std::int32_t i = 0; i < n; ++i) ++cnt[c[pn[i]]];
    for (std::int32_t i = 1; i < classes; ++i) cnt[i] += cnt[i - 1];
    for (std::int32_t i = n - 1; i >= 0; --i) p[--cnt[c[pn[i]]]] = pn[i];

    cn[p[0]] = 0;
    classes = 1;
    for (std::int32_t i = 1; i < n; ++i) {
      const auto cur = std::pair{c[p[i]], c[(p[i] + h) % n]};
      const auto prev = std::pair{c[p[i - 1]], c[(p[i - 1] + h) % n]};
      if (cur != prev) ++classes;
      cn[p[i]] = classes - 1;
    }
    c.swap(cn);
  }
  return p;
}

// Symbols after MTF: RUNA/RUNB encode zero-run lengths in bijective base 2,
// nonzero ranks are literals.
enum : int { kRunA = 0, kRunB = 1 };

constexpr int kContexts = 4;

int context_after_run() { return 0; }
int context_after_literal(int rank) {
  if (rank == 1) return 1;
  if (rank <= 3) return 2;
  return 3;
}

struct SymbolModel {
  std::array<Prob, kContexts> is_run;
  std::array<Prob, kContexts> run_digit;
  std::array<std::array<Prob, 256>, kContexts> literal;

  SymbolModel() {
    is_run.fill(kProbInit);
    run_digit.fill(kProbInit);
    for (auto& t : literal) t.fill(kProbInit);
  }
};

void encode_run(RangeEncoder& enc, SymbolModel& model, int& ctx, std::uint64_t run) {
  if (run == 0) return;
  std::uint64_t pending = run - 1;
  for (;;) {
    enc.encode(model.is_run[ctx], 1);
    enc.encode(model.run_digit[ctx], (pending & 1) ? kRunB : kRunA);
    ctx = context_after_run();
    if (pending < 2) break;
    pending = (pending - 2) / 2;
  }
}

void encode_literal(RangeEncoder& enc, SymbolModel& model, int& ctx, int rank) {
  enc.encode(model.is_run[ctx], 0);
  auto& tree = model.literal[ctx];
  const int value = rank - 1;
  int node = 1;
  for (int bit = 7; bit >= 0; --bit) {
    const int b = (value >> bit) & 1;
    enc.encode(tree[node], b);
    node = (node << 1) | b;
  }
  ctx = context_after_literal(rank);
}

}  // namespace

BwtResult bwt_forward(ByteView x) {
  const std::size_t n = x.size();
  BwtResult result;
  if (n == 0) return result;

  std::vector<std::int32_t> s(n + 1);
  for (std::size_t i = 0; i < n; ++i) s[i] = x[i] + 1;
  s[n] = 0;
  const auto order = sort_cyclic_shifts(s, 257);

  result.last.reserve(n);
  for (std::size_t row = 0; row <= n; ++row) {
    const auto start = static_cast<std::size_t>(order[row]);
    if (start == 0) {
      result.marker_row = row;
    } else {
      result.last.push_back(x[start - 1]);
    }
  }
  return result;
}

Bytes bwt_inverse(ByteView last, std::size_t marker_row) {
  const std::size_t n = last.size();
  if (n == 0) return {};
  if (marker_row > n) throw Error(Errc::CorruptStream, "BWT marker row out of range");

  // Column symbols with the marker as 0 and byte b as b+1.
  auto symbol_at = [&](std::size_t row) -> int {
    if (row == marker_row) return 0;
    return last[row < marker_row ? row : row - 1] + 1;
  };

  std::array<std::size_t, 258> first{};
  for (std::size_t row = 0; row <= n; ++row) ++first[symbol_at(row) + 1];
  for (std::size_t i = 1; i < first.size(); ++i) first[i] += first[i - 1];

  std::vector<std::uint32_t> lf(n + 1);
  std::array<std::size_t, 257> seen{};
  for (std::size_t row = 0; row <= n; ++row) {
    const int sym = symbol_at(row);
    lf[row] = static_cast<std::uint32_t>(first[sym] + seen[sym]++);
  }

  Bytes out(n);
  std::size_t row = 0;  // the rotation that starts with the marker
  for (std::size_t i = n; i-- > 0;) {
    const int sym = symbol_at(row);
    if (sym == 0) throw Error(Errc::CorruptStream, "BWT cycle reached marker early");
    out[i] = static_cast<std::uint8_t>(sym - 1);
    row = lf[row];
  }
  return out;
}

Bytes mtf_encode(ByteView x) {
  std::array<std::uint8_t, 256> table;
  std::iota(table.begin(), table.end(), std::uint8_t{0});
  Bytes out;
  out.reserve(x.size());
  for (auto b : x) {
    std::uint8_t rank = 0;
    while (table[rank] != b) ++rank;
    out.push_back(rank);
    std::move_backward(table.begin(), table.begin() + rank, table.begin() + rank + 1);
    table[0] = b;
  }
  return out;
}

Bytes mtf_decode(ByteView ranks) {
  std::array<std::uint8_t, 256> table;
  std::iota(table.begin(), table.end(), std::uint8_t{0});
  Bytes out;
  out.reserve(ranks.size());
  for (auto rank : ranks) {
    const std::uint8_t b = table[rank];
    out.push_back(b);
    std::move_backward(table.begin(), table.begin() + rank, table.begin() + rank + 1);
    table[0] = b;
  }
  return out;
}

// Stream layout: magic, varint n, [varint marker_row, range-coded symbols].
Bytes block_sort_compress(ByteView x) {
  Bytes out{kMagic};
  put_varint(out, x.size());
  if (x.empty()) return out;

  const auto bwt = bwt_forward(x);
  put_varint(out, bwt.marker_row);
  const auto ranks = mtf_encode(bwt.last);

  RangeEncoder enc(out);
  SymbolModel model;
  int ctx = 0;
  std::uint64_t run = 0;
  for (auto rank : ranks) {
    if (rank == 0) {
      ++run;
      continue;
    }
    encode_run(enc, model, ctx, run);
    run = 0;
    encode_literal(enc, model, ctx, rank);
  }
  encode_run(enc, model, ctx, run);
  enc.flush();
  return out;
}

Bytes block_sort_decompress(ByteView y) {
  std::size_t pos = 0;
  if (y.empty() || y[pos++] != kMagic) throw Error(Errc::CorruptStream, "not a block-sorting stream");
  const std::uint64_t n = get_varint(y, pos);
  if (n == 0) {
    if (pos != y.size()) throw Error(Errc::CorruptStream, "trailing bytes after empty stream");
    return {};
  }
  if (n > y.size() * 1024ull * 1024ull) throw Error(Errc::CorruptStream, "implausible length");
  const std::uint64_t marker_row = get_varint(y, pos);
  if (marker_row > n) throw Error(Errc::CorruptStream, "BWT marker row out of range");

  RangeDecoder dec(y, pos);
  SymbolModel model;
  int ctx = 0;
  Bytes ranks;
  ranks.reserve(n);
  std::uint64_t run = 0;
  std::uint64_t weight = 1;

  auto flush_run = [&] {
    if (run > n - ranks.size()) throw Error(Errc::CorruptStream, "zero run overflows block");
    ranks.insert(ranks.end(), run, std::uint8_t{0});
    run = 0;
    weight = 1;
  };

  while (ranks.size() + run < n) {
    if (dec.decode(model.is_run[ctx]) != 0) {
      const int digit = dec.decode(model.run_digit[ctx]);
      if (weight > n) throw Error(Errc::CorruptStream, "zero run too long");
      run += (digit == kRunB ? 2 : 1) * weight;
      weight <<= 1;
      ctx = context_after_run();
      continue;
    }
    flush_run();
    auto& tree = model.literal[ctx];
    int node = 1;
    for (int bit = 0; bit < 8; ++bit) node = (node << 1) | dec.decode(tree[node]);
    const int rank = (node & 0xFF) + 1;
    if (rank > 255) throw Error(Errc::CorruptStream, "literal rank out of range");
    ranks.push_back(static_cast<std::uint8_t>(rank));
    ctx = context_after_literal(rank);
  }
  flush_run();
  if (ranks.size() != n) throw Error(Errc::CorruptStream, "symbol stream length mismatch");

  return bwt_inverse(mtf_decode(ranks), marker_row);
}

}  // namespace ncdnet::codec
