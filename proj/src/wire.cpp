#include "ntpsim/wire.hpp"

#include "ntpsim/md5.hpp"

namespace ntpsim {
namespace {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

uint32_t get_u32(const std::vector<uint8_t>& in, size_t off) {
  return static_cast<uint32_t>(in[off]) << 24 | static_cast<uint32_t>(in[off + 1]) << 16 |
         static_cast<uint32_t>(in[off + 2]) << 8 | static_cast<uint32_t>(in[off + 3]);
}

void put_ts(std::vector<uint8_t>& out, NtpTimestamp ts) {
  put_u32(out, ts.seconds);
  put_u32(out, ts.fraction);
}

NtpTimestamp get_ts(const std::vector<uint8_t>& in, size_t off) {
  return NtpTimestamp{get_u32(in, off), get_u32(in, off + 4)};
}

std::vector<uint8_t> encode_header(const NtpPacket& pkt) {
  std::vector<uint8_t> out;
  out.reserve(kHeaderBytes);
  out.push_back(static_cast<uint8_t>((pkt.leap & 0x3) << 6 | (pkt.version & 0x7) << 3 |
                                     (static_cast<uint8_t>(pkt.mode) & 0x7)));
  out.push_back(pkt.stratum);
  out.push_back(static_cast<uint8_t>(pkt.poll));
  out.push_back(static_cast<uint8_t>(pkt.precision));
  put_u32(out, pkt.root_delay);
  put_u32(out, pkt.root_dispersion);
  out.insert(out.end(), pkt.reference_id.begin(), pkt.reference_id.end());
  put_ts(out, pkt.reference_ts);
  put_ts(out, pkt.origin_ts);
  put_ts(out, pkt.receive_ts);
  put_ts(out, pkt.transmit_ts);
  return out;
}

}  // namespace

Result<std::vector<uint8_t>> encode(const NtpPacket& pkt) {
  if (pkt.leap > 3) return Result<std::vector<uint8_t>>::failure("leap indicator out of range");
  if (pkt.version > 7) return Result<std::vector<uint8_t>>::failure("version out of range");
  uint8_t mode = static_cast<uint8_t>(pkt.mode);
  if (mode < 1 || mode > 5) return Result<std::vector<uint8_t>>::failure("mode out of range");
  if (pkt.stratum > 16) return Result<std::vector<uint8_t>>::failure("stratum out of range");

  std::vector<uint8_t> out = encode_header(pkt);
  if (pkt.mac) {
    put_u32(out, pkt.mac->key_id);
    out.insert(out.end(), pkt.mac->digest.begin(), pkt.mac->digest.end());
  }
  return Result<std::vector<uint8_t>>::success(std::move(out));
}

Result<NtpPacket> decode(const std::vector<uint8_t>& bytes) {
  if (bytes.size() != kHeaderBytes && bytes.size() != kHeaderBytes + kMacBytes)
    return Result<NtpPacket>::failure("bad length");

  NtpPacket pkt;
  pkt.leap = bytes[0] >> 6;
  pkt.version = (bytes[0] >> 3) & 0x7;
  uint8_t mode = bytes[0] & 0x7;
  if (mode < 1 || mode > 5) return Result<NtpPacket>::failure("unsupported mode");
  pkt.mode = static_cast<PacketMode>(mode);
  pkt.stratum = bytes[1];
  if (pkt.stratum > 16) return Result<NtpPacket>::failure("stratum out of range");
  pkt.poll = static_cast<int8_t>(bytes[2]);
  pkt.precision = static_cast<int8_t>(bytes[3]);
  pkt.root_delay = get_u32(bytes, 4);
  pkt.root_dispersion = get_u32(bytes, 8);
  for (int i = 0; i < 4; ++i) pkt.reference_id[i] = bytes[12 + i];
  pkt.reference_ts = get_ts(bytes, 16);
  pkt.origin_ts = get_ts(bytes, 24);
  pkt.receive_ts = get_ts(bytes, 32);
  pkt.transmit_ts = get_ts(bytes, 40);

  if (bytes.size() == kHeaderBytes + kMacBytes) {
    Mac mac;
    mac.key_id = get_u32(bytes, 48);
    for (int i = 0; i < 16; ++i) mac.digest[i] = bytes[52 + i];
    pkt.mac = mac;
  }
  return Result<NtpPacket>::success(std::move(pkt));
}

Mac compute_mac(const NtpPacket& pkt, const SymmetricKey& key) {
  std::vector<uint8_t> buf = key.secret;
  std::vector<uint8_t> header = encode_header(pkt);
  buf.insert(buf.end(), header.begin(), header.end());
  Mac mac;
  mac.key_id = key.key_id;
  mac.digest = md5(buf);
  return mac;
}

MacStatus verify_mac(const NtpPacket& pkt, const SymmetricKey& key) {
  if (!pkt.mac) return MacStatus::unauthenticated;
  if (pkt.mac->key_id != key.key_id) return MacStatus::invalid;
  Mac expected = compute_mac(pkt, key);
  return expected.digest == pkt.mac->digest ? MacStatus::valid : MacStatus::invalid;
}

NtpPacket make_kod(int8_t poll_exponent, NtpTimestamp echoed_origin) {
  NtpPacket pkt;
  pkt.leap = 0;
  pkt.version = 4;
  pkt.mode = PacketMode::server;
  pkt.stratum = 0;
  pkt.poll = poll_exponent < 0 ? 0 : poll_exponent;
  pkt.reference_id = KissCode::kRate;
  pkt.origin_ts = echoed_origin;
  return pkt;
}

bool is_kod(const NtpPacket& pkt) {
  return pkt.mode == PacketMode::server && pkt.stratum == 0 && pkt.reference_id == KissCode::kRate;
}

}  // namespace ntpsim
