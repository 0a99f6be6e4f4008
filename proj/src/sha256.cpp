// SPDX-License-Identifier: Apache-2.0
#include "siri/node_id.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace siri {

NodeId sha256(BytesView data) {
  NodeId id;
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), id.digest.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != id.digest.size()) {
    throw std::runtime_error("sha256: digest computation failed");
  }
  return id;
}

std::string to_hex(BytesView b) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(b.size() * 2);
  for (std::uint8_t c : b) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 0xf]);
  }
  return out;
}

static int hex_val(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw std::invalid_argument("from_hex: bad hex digit");
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("from_hex: odd length");
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(hex_val(hex[i]) * 16 + hex_val(hex[i + 1])));
  }
  return out;
}

}  // namespace siri
