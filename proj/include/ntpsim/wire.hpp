#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ntpsim {

// Lightweight ok-or-message result for operations on untrusted input.
template <typename T>
struct Result {
  std::optional<T> value;
  std::string error;

  bool ok() const { return value.has_value(); }
  const T& operator*() const { return *value; }
  T& operator*() { return *value; }
  const T* operator->() const { return &*value; }

  static Result success(T v) { return Result{std::move(v), {}}; }
  static Result failure(std::string msg) { return Result{std::nullopt, std::move(msg)}; }
};

// 64-bit NTP timestamp: seconds since the 1900 epoch plus a 2^-32 fraction.
// The all-zero value is the protocol's NULL timestamp.
struct NtpTimestamp {
  uint32_t seconds = 0;
  uint32_t fraction = 0;

  constexpr uint64_t to_u64() const {
    return (static_cast<uint64_t>(seconds) << 32) | fraction;
  }
  static constexpr NtpTimestamp from_u64(uint64_t v) {
    return NtpTimestamp{static_cast<uint32_t>(v >> 32), static_cast<uint32_t>(v)};
  }
  constexpr bool is_null() const { return seconds == 0 && fraction == 0; }

  bool operator==(const NtpTimestamp&) const = default;
};

enum class PacketMode : uint8_t {
  symmetric_active = 1,
  symmetric_passive = 2,
  client = 3,
  server = 4,
  broadcast = 5,
};

// ASCII code carried in the reference id of a stratum-0 "kiss" packet.
// Only the rate-limiting kiss appears in these scenarios.
struct KissCode {
  static constexpr std::array<uint8_t, 4> kRate = {'R', 'A', 'T', 'E'};
};

// Trailing authenticator: 32-bit key id plus a 16-byte keyed MD5 digest of
// the 48-byte header.
struct Mac {
  uint32_t key_id = 0;
  std::array<uint8_t, 16> digest{};

  bool operator==(const Mac&) const = default;
};

struct SymmetricKey {
  uint32_t key_id = 0;
  std::vector<uint8_t> secret;
};

// One NTP packet as structured fields. Encoding is big-endian; a packet is
// 48 bytes bare or 68 bytes with the authenticator appended.
struct NtpPacket {
  uint8_t leap = 0;       // 2 bits
  uint8_t version = 4;    // 3 bits
  PacketMode mode = PacketMode::client;
  uint8_t stratum = 0;    // 0..16; 16 = unsynchronized
  int8_t poll = 0;        // log2 seconds
  int8_t precision = 0;   // log2 seconds
  uint32_t root_delay = 0;       // 16.16 fixed point, kept raw
  uint32_t root_dispersion = 0;  // 16.16 fixed point, kept raw
  std::array<uint8_t, 4> reference_id{};
  NtpTimestamp reference_ts;
  NtpTimestamp origin_ts;
  NtpTimestamp receive_ts;
  NtpTimestamp transmit_ts;
  std::optional<Mac> mac;

  bool operator==(const NtpPacket&) const = default;
};

inline constexpr size_t kHeaderBytes = 48;
inline constexpr size_t kMacBytes = 20;

// Serializes to 48 or 68 bytes. Fails on structurally invalid field values
// (stratum beyond 16, leap beyond 2 bits, mode outside 1..5).
Result<std::vector<uint8_t>> encode(const NtpPacket& pkt);

// Parses 48- or 68-byte datagrams. Anything else is malformed, as are the
// control/private modes 6 and 7, mode 0, and stratum > 16.
Result<NtpPacket> decode(const std::vector<uint8_t>& bytes);

// Keyed digest over secret || 48-byte header.
Mac compute_mac(const NtpPacket& pkt, const SymmetricKey& key);

enum class MacStatus { valid, invalid, unauthenticated };

// unauthenticated when the packet carries no MAC; invalid when it carries
// one that does not verify against the given key (wrong digest or key id).
MacStatus verify_mac(const NtpPacket& pkt, const SymmetricKey& key);

// Builds the rate-limiting kiss: stratum 0, mode 4, reference id "RATE",
// poll advertising the refrain interval, origin echoing the offender's
// transmit timestamp so a genuine client will accept it.
NtpPacket make_kod(int8_t poll_exponent, NtpTimestamp echoed_origin);

bool is_kod(const NtpPacket& pkt);

}  // namespace ntpsim
