#include <doctest.h>

#include <random>

#include "ncdnet/bytes.hpp"
#include "ncdnet/compressor.hpp"
#include "ncdnet/error.hpp"
#include "oracles.hpp"

using namespace ncdnet;

namespace {

const CompressorId kBzip{CompressorKind::block_sorting, kDefaultBlockCapacity};
const CompressorId kDeflate{CompressorKind::deflate_like, kDefaultBlockCapacity};
const CompressorId kRle{CompressorKind::run_length, kDefaultBlockCapacity};
const CompressorId kAll[] = {kBzip, kDeflate, kRle};

std::vector<Bytes> tricky_inputs() {
  std::vector<Bytes> v;
  v.push_back({});
  v.push_back({0});
  v.push_back({255});
  v.push_back(to_bytes("abcabcabc"));
  v.push_back(to_bytes("banana"));
  v.push_back(to_bytes("mississippi"));
  v.push_back(Bytes(1000, 0x41));
  v.push_back(Bytes(70000, 0));
  Bytes ramp;
  for (int i = 0; i < 3000; ++i) ramp.push_back(static_cast<std::uint8_t>(i % 256));
  v.push_back(ramp);
  Bytes runs;
  for (int r = 1; r < 300; r += 7) runs.insert(runs.end(), static_cast<std::size_t>(r), static_cast<std::uint8_t>(r));
  v.push_back(runs);
  Bytes two;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 5000; ++i) two.push_back(rng() & 1 ? 'a' : 'b');
  v.push_back(two);
  v.push_back(oracle::random_bytes(4096, 11));
  return v;
}

}  // namespace

TEST_CASE("compress is deterministic") {
  const Bytes x = oracle::random_bytes(2048, 5);
  for (const auto& c : kAll) CHECK(compress(x, c) == compress(x, c));
}

TEST_CASE("round trip on edge-case inputs for every codec") {
  for (const auto& c : kAll)
    for (const auto& x : tricky_inputs()) {
      CAPTURE(compressor_name(c.kind));
      CAPTURE(x.size());
      CHECK(decompress(compress(x, c), c) == x);
    }
}

TEST_CASE("random 4096-byte inputs round trip") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Bytes x = oracle::random_bytes(4096, seed);
    for (const auto& c : kAll) CHECK(decompress(compress(x, c), c) == x);
  }
}

TEST_CASE("1000 repeats of 0x41 compress to a pinned length") {
  const Bytes x(1000, 0x41);
  CHECK(compressed_len(x, kBzip) == 13);
  CHECK(compressed_len(x, kDeflate) == 20);
  CHECK(compressed_len(x, kRle) == 19);
  for (const auto& c : kAll) CHECK(compressed_len(x, c) < 100);
}

TEST_CASE("empty input yields the fixed two-byte header") {
  for (const auto& c : kAll) {
    CHECK(compress({}, c).size() == 2);
    CHECK(decompress(compress({}, c), c).empty());
  }
}

TEST_CASE("compressed_len matches compress output size") {
  for (const auto& c : kAll)
    for (const auto& x : tricky_inputs()) CHECK(compressed_len(x, c) == compress(x, c).size());
}

TEST_CASE("redundancy is exploited") {
  const Bytes runs(1000, 0x41);
  const Bytes noise = oracle::random_bytes(1000, 7);
  CHECK(compressed_len(runs, kBzip) < compressed_len(noise, kBzip));
  CHECK(compressed_len(noise, kBzip) == 1032);

  const Bytes x = oracle::random_bytes(4096, 1);
  Bytes xx = x;
  xx.insert(xx.end(), x.begin(), x.end());
  CHECK(compressed_len(x, kBzip) == 4202);
  CHECK(compressed_len(xx, kBzip) == 4218);
  CHECK(compressed_len(xx, kBzip) < 2 * compressed_len(x, kBzip));
  CHECK(compressed_len(xx, kDeflate) < 2 * compressed_len(x, kDeflate));
}

TEST_CASE("block-sorting codec compresses repeated-byte strings below 5%") {
  for (int b = 0; b < 100; ++b) {
    const Bytes x(4096, static_cast<std::uint8_t>(b * 37 % 256));
    CHECK(static_cast<double>(compressed_len(x, kBzip)) < 0.05 * 4096);
  }
}

TEST_CASE("inputs beyond block capacity are rejected") {
  const CompressorId small{CompressorKind::block_sorting, 100};
  CHECK_NOTHROW(compress(Bytes(100, 1), small));
  try {
    compress(Bytes(101, 1), small);
    FAIL("expected InputTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InputTooLarge);
  }
  CHECK_THROWS_AS(compressed_len(Bytes(101, 1), CompressorId{CompressorKind::deflate_like, 100}), Error);
}

TEST_CASE("malformed streams raise CorruptStream") {
  for (const auto& c : kAll) {
    const Bytes good = compress(oracle::random_bytes(500, 9), c);
    auto expect_corrupt = [&](const Bytes& y) {
      try {
        const Bytes out = decompress(y, c);
        FAIL("decoded a corrupt stream of size " << y.size());
      } catch (const Error& e) {
        CHECK(e.code() == Errc::CorruptStream);
      }
    };
    CAPTURE(compressor_name(c.kind));
    expect_corrupt({});
    expect_corrupt({0x00, 0x01});
    expect_corrupt(Bytes(good.begin(), good.begin() + static_cast<long>(good.size() / 2)));
    Bytes bad_magic = good;
    bad_magic[0] ^= 0xFF;
    expect_corrupt(bad_magic);
  }
}

TEST_CASE("compressor names") {
  CHECK(parse_compressor("bzip").kind == CompressorKind::block_sorting);
  CHECK(parse_compressor("deflate").kind == CompressorKind::deflate_like);
  CHECK(parse_compressor("rle").kind == CompressorKind::run_length);
  CHECK(parse_compressor("block_sorting").kind == CompressorKind::block_sorting);
  CHECK(CompressorId{}.kind == CompressorKind::block_sorting);
  CHECK(CompressorId{}.block_capacity == 900000);
  CHECK_THROWS_AS(parse_compressor("zstd"), Error);
}

TEST_CASE("concat") {
  CHECK(concat(to_bytes("ab"), to_bytes("cd")) == to_bytes("abcd"));
  const Bytes x = to_bytes("xyz");
  CHECK(concat(x, {}) == x);
  CHECK(concat({}, x) == x);
  CHECK(concat(Bytes(10, 1), Bytes(7, 2)).size() == 17);
  CHECK_THROWS_AS(concat(Bytes(6, 1), Bytes(5, 2), 10), Error);
}

TEST_CASE("quantize_features") {
  Eigen::VectorXd v(3);
  v << 0.0, 1.0, 0.5;
  CHECK(quantize_features(v) == Bytes{0, 255, 128});
  CHECK(quantize_features(Eigen::VectorXd::Zero(7)) == Bytes(7, 0));
  Eigen::VectorXd w(4);
  w << 1.2, -0.3, 0.25, std::nan("");
  CHECK(quantize_features(w) == Bytes{255, 0, 64, 0});
}
