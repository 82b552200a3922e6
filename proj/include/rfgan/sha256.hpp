#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

namespace rfgan {

// Minimal SHA-256, used to fingerprint parameter bytes.
class Sha256 {
public:
    Sha256();
    void update(const void* data, std::size_t len);
    std::array<std::uint8_t, 32> digest(); // finalizes; do not update afterwards
    std::string hex();                     // finalizes

private:
    void process(const std::uint8_t* block);

    std::uint32_t h_[8];
    std::uint8_t buf_[64];
    std::size_t buf_len_ = 0;
    std::uint64_t total_ = 0;
    bool done_ = false;
    std::array<std::uint8_t, 32> out_{};
};

std::string sha256_hex(const void* data, std::size_t len);

} // namespace rfgan
