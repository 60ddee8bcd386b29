#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace kinesim {

std::string sha256_hex(std::string_view bytes);

/// Incremental SHA-256 writer for canonical state digests. Scalars are fed as
/// fixed-width little-endian bit patterns so that digests compare doubles
/// exactly, not through decimal formatting.
class DigestWriter {
public:
    DigestWriter();
    ~DigestWriter();
    DigestWriter(const DigestWriter&) = delete;
    DigestWriter& operator=(const DigestWriter&) = delete;

    void bytes(const void* data, std::size_t n);
    void u64(std::uint64_t v);
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v);
    void str(std::string_view s);

    /// Finalize and return the hex digest. The writer must not be reused.
    std::string hex();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace kinesim
