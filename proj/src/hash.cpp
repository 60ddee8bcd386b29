#include "kinesim/hash.hpp"

#include <openssl/evp.h>

#include <cstring>
#include <stdexcept>

namespace kinesim {

namespace {

std::string to_hex(const unsigned char* digest, unsigned int len) {
    static const char* k = "0123456789abcdef";
    std::string out(2 * len, '0');
    for (unsigned int i = 0; i < len; ++i) {
        out[2 * i] = k[digest[i] >> 4];
        out[2 * i + 1] = k[digest[i] & 0xF];
    }
    return out;
}

}  // namespace

struct DigestWriter::Impl {
    EVP_MD_CTX* ctx = nullptr;
};

DigestWriter::DigestWriter() : impl_(std::make_unique<Impl>()) {
    impl_->ctx = EVP_MD_CTX_new();
    if (!impl_->ctx || EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 init failed");
}

DigestWriter::~DigestWriter() {
    if (impl_ && impl_->ctx) EVP_MD_CTX_free(impl_->ctx);
}

void DigestWriter::bytes(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(impl_->ctx, data, n) != 1)
        throw std::runtime_error("sha256 update failed");
}

void DigestWriter::u64(std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(buf, 8);
}

void DigestWriter::f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    u64(bits);
}

void DigestWriter::str(std::string_view s) {
    u64(s.size());
    bytes(s.data(), s.size());
}

std::string DigestWriter::hex() {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(impl_->ctx, digest, &len) != 1)
        throw std::runtime_error("sha256 final failed");
    return to_hex(digest, len);
}

std::string sha256_hex(std::string_view data) {
    DigestWriter w;
    w.bytes(data.data(), data.size());
    return w.hex();
}

}  // namespace kinesim
