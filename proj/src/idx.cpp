#include <cstdint>
#include <fstream>
#include <vector>

#include "rfgan/common.hpp"
#include "rfgan/data.hpp"

namespace rfgan {

namespace {

std::uint32_t read_be_u32(std::ifstream& is, const std::string& what) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    require(bool(is), "idx: truncated file while reading " + what);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

} // namespace

TensorF load_idx(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(bool(is), "idx: cannot open '" + path + "'");
    const std::uint32_t magic = read_be_u32(is, "magic");
    require(magic == 0x00000803u,
            "idx: '" + path + "' is not a u8 3-D image tensor (magic " + std::to_string(magic) +
                ", expected 2051)");
    const std::uint32_t n = read_be_u32(is, "image count");
    const std::uint32_t h = read_be_u32(is, "height");
    const std::uint32_t w = read_be_u32(is, "width");
    require(n > 0 && h > 0 && w > 0, "idx: zero dimension in '" + path + "'");
    const std::size_t count = std::size_t(n) * h * w;
    std::vector<unsigned char> raw(count);
    is.read(reinterpret_cast<char*>(raw.data()), std::streamsize(count));
    require(bool(is) && std::size_t(is.gcount()) == count,
            "idx: truncated pixel data in '" + path + "'");
    std::vector<float> data(count);
    for (std::size_t i = 0; i < count; ++i) data[i] = float(raw[i]);
    return TensorF({std::size_t(n), std::size_t(h), std::size_t(w)}, std::move(data));
}

} // namespace rfgan
