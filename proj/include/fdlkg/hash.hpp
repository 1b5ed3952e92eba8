#pragma once

#include <openssl/evp.h>

#include <cstdio>
#include <string>
#include <string_view>

#include "fdlkg/domain.hpp"

namespace fdlkg {

// Hash of "blob <len>\0<content>", hex-encoded; matches `git hash-object`.
inline std::string git_blob_sha1(std::string_view content) {
  std::string msg = "blob " + std::to_string(content.size());
  msg.push_back('\0');
  msg.append(content);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(msg.data(), msg.size(), digest, &len, EVP_sha1(), nullptr) != 1)
    throw config_error("sha1 digest failed");
  std::string hex(2 * len, '0');
  static const char* alphabet = "0123456789abcdef";
  for (unsigned int i = 0; i < len; ++i) {
    hex[2 * i] = alphabet[digest[i] >> 4];
    hex[2 * i + 1] = alphabet[digest[i] & 0xf];
  }
  return hex;
}

}  // namespace fdlkg
