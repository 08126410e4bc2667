#include <gtest/gtest.h>

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "fedsplit/federation/crypto.hpp"
#include "fedsplit/federation/frame.hpp"

using namespace fedsplit;

namespace {

struct GoldenFrame {
  std::string name;
  std::map<std::string, std::string> fields;
};

struct GoldenFile {
  std::string key;
  std::vector<GoldenFrame> frames;
};

GoldenFile load_golden() {
  std::ifstream in(std::string(FEDSPLIT_GOLDEN_DIR) + "/frames.txt");
  if (!in) throw std::runtime_error("missing golden/frames.txt");
  GoldenFile g;
  std::string line;
  GoldenFrame* cur = nullptr;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto sp = line.find(' ');
    const std::string k = line.substr(0, sp);
    const std::string v = sp == std::string::npos ? "" : line.substr(sp + 1);
    if (k == "key") {
      g.key = v;
    } else if (k == "frame") {
      g.frames.push_back({v, {}});
      cur = &g.frames.back();
    } else if (k == "end") {
      cur = nullptr;
    } else if (cur) {
      cur->fields[k] = v;
    }
  }
  return g;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) {
    double v = 0;
    auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (r.ec != std::errc{}) throw std::runtime_error("bad number " + tok);
    out.push_back(v);
  }
  return out;
}

std::uint64_t le(const Bytes& b, std::size_t at, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b[at + i]) << (8 * i);
  return v;
}

}  // namespace

TEST(GoldenFrames, FileHasAllVectors) {
  const GoldenFile g = load_golden();
  EXPECT_EQ(g.key.size(), 64u);
  ASSERT_EQ(g.frames.size(), 3u);
}

TEST(GoldenFrames, HeaderLayoutByHand) {
  for (const auto& gf : load_golden().frames) {
    const Bytes wire = from_hex(gf.fields.at("wire"));
    EXPECT_EQ(le(wire, 0, 4), wire.size() - 4) << gf.name;
    EXPECT_EQ(wire[4], 1) << gf.name;
    EXPECT_EQ(wire[5], gf.fields.at("type") == "HELLO" ? 1 : 2) << gf.name;
    EXPECT_EQ(to_hex(std::span(wire).subspan(6, 16)), gf.fields.at("sender"));
    if (gf.fields.count("epoch")) {
      EXPECT_EQ(le(wire, 22, 4), std::stoull(gf.fields.at("epoch")));
      EXPECT_EQ(le(wire, 26, 8), std::stoull(gf.fields.at("seq")));
      const std::string layer = gf.fields.at("layer");
      EXPECT_EQ(le(wire, 34, 2), layer.size());
      EXPECT_EQ(std::string(wire.begin() + 36, wire.begin() + 36 + layer.size()), layer);
      const std::size_t n_at = 36 + layer.size();
      EXPECT_EQ(le(wire, n_at, 2), 24u);
      EXPECT_EQ(to_hex(std::span(wire).subspan(n_at + 2, 24)), gf.fields.at("nonce"));
    }
  }
}

TEST(GoldenFrames, DecodeOpenAndReencode) {
  const GoldenFile g = load_golden();
  const SharedKey key = SharedKey::from_hex(g.key);
  for (const auto& gf : g.frames) {
    SCOPED_TRACE(gf.name);
    const Bytes wire = from_hex(gf.fields.at("wire"));
    const GradientFrame f = decode_frame(wire);
    EXPECT_EQ(encode_frame(f), wire);
    EXPECT_EQ(sender_hex(f.sender_id), gf.fields.at("sender"));
    if (gf.fields.at("type") == "HELLO") {
      EXPECT_EQ(f.msg_type, MsgType::kHello);
      EXPECT_EQ(encode_frame(make_hello(f.sender_id)), wire);
      continue;
    }

    const auto shape = parse_doubles(gf.fields.at("shape"));
    const auto weights = parse_doubles(gf.fields.at("weights"));
    const auto bias = parse_doubles(gf.fields.at("bias"));
    const LayerDelta want{gf.fields.at("layer"),
                          Matrix(static_cast<std::size_t>(shape[0]), static_cast<std::size_t>(shape[1]), weights),
                          bias};
    EXPECT_EQ(open(f, key), want);
    EXPECT_EQ(f.epoch, std::stoul(gf.fields.at("epoch")));
    EXPECT_EQ(f.seq, std::stoull(gf.fields.at("seq")));

    // AEAD is deterministic given key and nonce, so resealing is byte-exact.
    Nonce nonce;
    const Bytes nb = from_hex(gf.fields.at("nonce"));
    std::copy(nb.begin(), nb.end(), nonce.begin());
    Bytes again = encode_frame(seal(want, key, f.epoch, f.sender_id, nonce));
    stamp_seq(again, f.seq);
    EXPECT_EQ(again, wire);

    // A fresh nonce changes the ciphertext but not what it decrypts to.
    const GradientFrame fresh = seal(want, key, f.epoch, f.sender_id);
    EXPECT_NE(encode_frame(fresh), wire);
    EXPECT_EQ(open(fresh, key), want);
  }
}
