#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <random>
#include <vector>

#include "ntpsim/md5.hpp"
#include "ntpsim/wire.hpp"

using namespace ntpsim;

namespace {

constexpr uint64_t kRoundTripSeed = 0x5eed0001;
constexpr int kRoundTrips = 120000;

// Reference serializer, written independently of the library encoder: fields
// appended one byte at a time in wire order. Round trips are judged against
// these bytes, not against the encoder's own output.
void ref_put32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(uint8_t(v >> 24));
  out.push_back(uint8_t((v >> 16) & 0xff));
  out.push_back(uint8_t((v >> 8) & 0xff));
  out.push_back(uint8_t(v & 0xff));
}

std::vector<uint8_t> ref_serialize(const NtpPacket& p) {
  std::vector<uint8_t> out;
  out.push_back(uint8_t((p.leap << 6) | (p.version << 3) | uint8_t(p.mode)));
  out.push_back(p.stratum);
  out.push_back(uint8_t(p.poll));
  out.push_back(uint8_t(p.precision));
  ref_put32(out, p.root_delay);
  ref_put32(out, p.root_dispersion);
  for (uint8_t b : p.reference_id) out.push_back(b);
  for (const NtpTimestamp* ts : {&p.reference_ts, &p.origin_ts, &p.receive_ts, &p.transmit_ts}) {
    ref_put32(out, ts->seconds);
    ref_put32(out, ts->fraction);
  }
  if (p.mac) {
    ref_put32(out, p.mac->key_id);
    for (uint8_t b : p.mac->digest) out.push_back(b);
  }
  return out;
}

NtpPacket random_packet(std::mt19937_64& rng, bool with_mac) {
  auto u32 = [&] { return uint32_t(rng()); };
  NtpPacket p;
  p.leap = uint8_t(rng() % 4);
  p.version = uint8_t(rng() % 8);
  p.mode = PacketMode(1 + rng() % 5);
  p.stratum = uint8_t(rng() % 17);
  p.poll = int8_t(rng());
  p.precision = int8_t(rng());
  p.root_delay = u32();
  p.root_dispersion = u32();
  for (auto& b : p.reference_id) b = uint8_t(rng());
  p.reference_ts = {u32(), u32()};
  p.origin_ts = {u32(), u32()};
  p.receive_ts = {u32(), u32()};
  p.transmit_ts = {u32(), u32()};
  if (with_mac) {
    Mac m;
    m.key_id = u32();
    for (auto& b : m.digest) b = uint8_t(rng());
    p.mac = m;
  }
  return p;
}

// The pinned header used for frozen-digest checks: leap 0 / version 4 /
// mode 3, stratum 16, poll 6, precision -20, all-zero middle fields,
// transmit 3800000100.5 in NTP scale.
NtpPacket pinned_packet() {
  NtpPacket p;
  p.leap = 0;
  p.version = 4;
  p.mode = PacketMode::client;
  p.stratum = 16;
  p.poll = 6;
  p.precision = -20;
  p.transmit_ts = {3800000100u, 0x80000000u};
  return p;
}

const std::vector<uint8_t> kPinnedHeader = {
    0x23, 0x10, 0x06, 0xec, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
    0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
    0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
    0x00, 0x00, 0x00, 0x00, 0xe2, 0x7f, 0x66, 0x64, 0x80, 0x00, 0x00, 0x00};

SymmetricKey test_key() {
  return SymmetricKey{1, {'t', 'h', 'e', 'k', 'e', 'y'}};
}

std::array<uint8_t, 16> digest_of(std::vector<uint8_t> prefix, const std::vector<uint8_t>& body) {
  prefix.insert(prefix.end(), body.begin(), body.end());
  return md5(prefix);
}

}  // namespace

TEST_CASE("Md5: frozen reference digests") {
  // Digests computed with an independent implementation and frozen here.
  auto hex = [](const std::vector<uint8_t>& in) { return hex_digest(md5(in)); };
  CHECK(hex({}) == "d41d8cd98f00b204e9800998ecf8427e");
  CHECK(hex({'a'}) == "0cc175b9c0f1b6a831c399e269772661");
  CHECK(hex({'a', 'b', 'c'}) == "900150983cd24fb0d6963f7d28e17f72");
  std::vector<uint8_t> md(std::begin("message digest"), std::end("message digest") - 1);
  CHECK(hex(md) == "f96b697d7cb7938d525a2f31aaf161d0");
  std::vector<uint8_t> alpha;
  for (char c = 'a'; c <= 'z'; ++c) alpha.push_back(uint8_t(c));
  CHECK(hex(alpha) == "c3fcd3d76192e4007dfb496cca67e13b");
  CHECK(hex(std::vector<uint8_t>(48, 0x00)) == "b203621a65475445e6fcdca717c667b5");
  CHECK(hex(std::vector<uint8_t>(48, 0x23)) == "c659d43beebe8cd5161fdf952835c593");
  // Padding boundaries: 56 bytes forces an extra block, 64 is exactly one.
  CHECK(hex(std::vector<uint8_t>(56, 'x')) == "668a72d5ba17f08e62dabcafad6db14b");
  CHECK(hex(std::vector<uint8_t>(64, 'x')) == "c1bb4f81d892b2d57947682aeb252456");
  std::vector<uint8_t> alnum80;
  for (int i = 0; i < 8; ++i)
    for (char c : {'1', '2', '3', '4', '5', '6', '7', '8', '9', '0'}) alnum80.push_back(uint8_t(c));
  CHECK(hex(alnum80) == "57edf4a22be3c955ac49da2e2107b67a");
}

TEST_CASE("Wire: encoder matches the pinned header bytes") {
  auto encoded = encode(pinned_packet());
  REQUIRE(encoded.ok());
  CHECK(*encoded == kPinnedHeader);
  CHECK(encoded->size() == kHeaderBytes);
}

TEST_CASE("Wire: keyed digest over the pinned header matches frozen values") {
  // Expected digests frozen from an independent md5 over secret || header.
  SymmetricKey key = test_key();
  Mac mac = compute_mac(pinned_packet(), key);
  CHECK(mac.key_id == 1);
  CHECK(hex_digest(mac.digest) == "db89ec8cc58e148d275b4d7624c0e5d6");
  CHECK(hex_digest(md5(kPinnedHeader)) == "8c3fcd20a8adebc49faebdf6f0bef0a9");

  // Single header-bit flip (stratum 16 -> 17) must change the digest to the
  // independently computed value, not merely "something different".
  std::vector<uint8_t> flipped = kPinnedHeader;
  flipped[1] ^= 0x01;
  std::vector<uint8_t> keyed(key.secret);
  keyed.insert(keyed.end(), flipped.begin(), flipped.end());
  CHECK(hex_digest(md5(keyed)) == "1061870610ae33e5f923d6010ff6b925");
}

TEST_CASE("Wire: random packets round trip through the reference serializer") {
  std::mt19937_64 rng(kRoundTripSeed);
  int with_mac = 0;
  for (int i = 0; i < kRoundTrips; ++i) {
    bool mac = (rng() & 1) != 0;
    with_mac += mac ? 1 : 0;
    NtpPacket p = random_packet(rng, mac);
    auto bytes = encode(p);
    REQUIRE(bytes.ok());
    CHECK(*bytes == ref_serialize(p));
    CHECK(bytes->size() == (mac ? kHeaderBytes + kMacBytes : kHeaderBytes));
    auto back = decode(*bytes);
    REQUIRE(back.ok());
    CHECK(*back == p);
  }
  // The coin must actually have been flipped both ways.
  CHECK(with_mac > kRoundTrips / 3);
  CHECK(with_mac < 2 * kRoundTrips / 3);
}

TEST_CASE("Wire: decode rejects malformed lengths") {
  for (size_t len : {size_t(0), size_t(1), size_t(47), size_t(49), size_t(67), size_t(69), size_t(96), size_t(1000)}) {
    auto r = decode(std::vector<uint8_t>(len, 0x23));
    CHECK_FALSE(r.ok());
    CHECK(r.error == "bad length");
  }
}

TEST_CASE("Wire: decode rejects control, private, and reserved modes") {
  std::vector<uint8_t> bytes = kPinnedHeader;
  for (uint8_t mode : {0, 6, 7}) {
    bytes[0] = uint8_t((bytes[0] & ~0x7) | mode);
    auto r = decode(bytes);
    CHECK_FALSE(r.ok());
    CHECK(r.error == "unsupported mode");
  }
  for (uint8_t mode = 1; mode <= 5; ++mode) {
    bytes[0] = uint8_t((bytes[0] & ~0x7) | mode);
    CHECK(decode(bytes).ok());
  }
}

TEST_CASE("Wire: decode rejects stratum beyond 16") {
  std::vector<uint8_t> bytes = kPinnedHeader;
  bytes[1] = 17;
  CHECK_FALSE(decode(bytes).ok());
  bytes[1] = 255;
  CHECK_FALSE(decode(bytes).ok());
  bytes[1] = 16;
  CHECK(decode(bytes).ok());
}

TEST_CASE("Wire: encode rejects out-of-range fields") {
  NtpPacket p = pinned_packet();
  p.leap = 4;
  CHECK_FALSE(encode(p).ok());
  p = pinned_packet();
  p.version = 8;
  CHECK_FALSE(encode(p).ok());
  p = pinned_packet();
  p.mode = PacketMode(0);
  CHECK_FALSE(encode(p).ok());
  p.mode = PacketMode(6);
  CHECK_FALSE(encode(p).ok());
  p = pinned_packet();
  p.stratum = 17;
  CHECK_FALSE(encode(p).ok());
}

TEST_CASE("Wire: MAC verification is a strict tri-state") {
  SymmetricKey key = test_key();
  NtpPacket p = pinned_packet();

  SUBCASE("no MAC is unauthenticated, not invalid") {
    CHECK(verify_mac(p, key) == MacStatus::unauthenticated);
  }

  SUBCASE("correct MAC verifies") {
    p.mac = compute_mac(p, key);
    CHECK(verify_mac(p, key) == MacStatus::valid);
  }

  SUBCASE("any digest bit flip invalidates") {
    p.mac = compute_mac(p, key);
    for (size_t byte = 0; byte < 16; ++byte) {
      NtpPacket q = p;
      q.mac->digest[byte] ^= 0x01;
      CHECK(verify_mac(q, key) == MacStatus::invalid);
    }
  }

  SUBCASE("wrong key id invalidates") {
    p.mac = compute_mac(p, key);
    p.mac->key_id = 2;
    CHECK(verify_mac(p, key) == MacStatus::invalid);
  }

  SUBCASE("different secret invalidates") {
    p.mac = compute_mac(p, key);
    SymmetricKey other{1, {'o', 't', 'h', 'e', 'r'}};
    CHECK(verify_mac(p, other) == MacStatus::invalid);
  }

  SUBCASE("header mutation after signing invalidates") {
    p.mac = compute_mac(p, key);
    p.stratum = 2;
    CHECK(verify_mac(p, key) == MacStatus::invalid);
  }
}

TEST_CASE("Wire: MAC survives the wire round trip") {
  SymmetricKey key = test_key();
  NtpPacket p = pinned_packet();
  p.mac = compute_mac(p, key);
  auto bytes = encode(p);
  REQUIRE(bytes.ok());
  REQUIRE(bytes->size() == kHeaderBytes + kMacBytes);
  auto back = decode(*bytes);
  REQUIRE(back.ok());
  CHECK(verify_mac(*back, key) == MacStatus::valid);

  // Flip one bit anywhere in the frame: either decode still succeeds and the
  // MAC fails, or (first-byte mode bits) decode itself rejects.
  for (size_t byte = 0; byte < bytes->size(); ++byte) {
    std::vector<uint8_t> tampered = *bytes;
    tampered[byte] ^= 0x80;
    auto r = decode(tampered);
    if (r.ok()) CHECK(verify_mac(*r, key) != MacStatus::valid);
  }
}

TEST_CASE("Wire: keyed digest equals md5(secret || header bytes)") {
  // compute_mac must hash exactly secret || 48-byte header, nothing else.
  SymmetricKey key = test_key();
  std::mt19937_64 rng(kRoundTripSeed ^ 0xff);
  for (int i = 0; i < 2000; ++i) {
    NtpPacket p = random_packet(rng, false);
    auto header = encode(p);
    REQUIRE(header.ok());
    CHECK(compute_mac(p, key).digest == digest_of(key.secret, *header));
    // The MAC field itself is excluded from the digest input.
    NtpPacket q = p;
    q.mac = Mac{key.key_id, {}};
    CHECK(compute_mac(q, key).digest == compute_mac(p, key).digest);
  }
}

TEST_CASE("Wire: rate kiss has the contracted shape") {
  NtpTimestamp origin{0xe27f6664u, 0x12345678u};
  NtpPacket kod = make_kod(6, origin);
  CHECK(kod.mode == PacketMode::server);
  CHECK(kod.stratum == 0);
  CHECK(kod.leap == 0);
  CHECK(kod.poll == 6);
  CHECK(kod.reference_id == KissCode::kRate);
  CHECK(kod.origin_ts == origin);
  CHECK(is_kod(kod));

  // It must survive the wire: kiss identity is judged on decoded bytes.
  auto bytes = encode(kod);
  REQUIRE(bytes.ok());
  auto back = decode(*bytes);
  REQUIRE(back.ok());
  CHECK(is_kod(*back));
}

TEST_CASE("Wire: kiss detection requires mode 4, stratum 0, and the RATE code") {
  NtpPacket kod = make_kod(6, NtpTimestamp{1, 2});
  NtpPacket p = kod;
  p.stratum = 2;
  CHECK_FALSE(is_kod(p));
  p = kod;
  p.mode = PacketMode::broadcast;
  CHECK_FALSE(is_kod(p));
  p = kod;
  p.reference_id = {'R', 'A', 'T', 'X'};
  CHECK_FALSE(is_kod(p));
  // A genuine stratum-0 server packet without the code is not a kiss.
  p = kod;
  p.reference_id = {0, 0, 0, 0};
  CHECK_FALSE(is_kod(p));
}

TEST_CASE("Wire: negative kiss poll clamps to zero") {
  NtpPacket kod = make_kod(-3, NtpTimestamp{});
  CHECK(kod.poll == 0);
}

TEST_CASE("Wire: timestamp u64 conversion is exact in both directions") {
  std::mt19937_64 rng(kRoundTripSeed ^ 0xabcd);
  for (int i = 0; i < 100000; ++i) {
    uint64_t v = rng();
    CHECK(NtpTimestamp::from_u64(v).to_u64() == v);
  }
  NtpTimestamp ts{0xe27f6664u, 0x80000000u};
  CHECK(ts.to_u64() == 0xe27f666480000000ull);
  CHECK_FALSE(ts.is_null());
  CHECK(NtpTimestamp{}.is_null());
}
