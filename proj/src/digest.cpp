#include "cello/digest.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace cello {

struct Sha256::Impl {
  EVP_MD_CTX* ctx = nullptr;
  ~Impl() { EVP_MD_CTX_free(ctx); }
};

Sha256::Sha256() : impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_MD_CTX_new();
  if (impl_->ctx == nullptr || EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1) {
    throw std::logic_error("SHA-256 initialization failed");
  }
}

Sha256::~Sha256() = default;
Sha256::Sha256(Sha256&&) noexcept = default;
Sha256& Sha256::operator=(Sha256&&) noexcept = default;

void Sha256::update(std::string_view bytes) {
  if (EVP_DigestUpdate(impl_->ctx, bytes.data(), bytes.size()) != 1) {
    throw std::logic_error("SHA-256 update failed");
  }
}

std::string Sha256::hex_digest() const {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  Impl copy;
  copy.ctx = EVP_MD_CTX_new();
  if (copy.ctx == nullptr || EVP_MD_CTX_copy_ex(copy.ctx, impl_->ctx) != 1 ||
      EVP_DigestFinal_ex(copy.ctx, digest, &len) != 1) {
    throw std::logic_error("SHA-256 finalization failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes);
  return h.hex_digest();
}

}  // namespace cello
