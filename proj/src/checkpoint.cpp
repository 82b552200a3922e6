#include "rfgan/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "rfgan/common.hpp"

static_assert(std::endian::native == std::endian::little,
              "RFGN checkpoint I/O assumes a little-endian host");

namespace rfgan {

namespace {

constexpr char kMagic[4] = {'R', 'F', 'G', 'N'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kDtypeF32 = 0;

template <class U>
void put(std::ofstream& os, U v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(U));
}

template <class U>
U get(std::ifstream& is, const std::string& what) {
    U v;
    is.read(reinterpret_cast<char*>(&v), sizeof(U));
    require(bool(is), "checkpoint: truncated file while reading " + what);
    return v;
}

} // namespace

void save_checkpoint(const std::string& path, const NamedTensors& tensors) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    require(bool(os), "checkpoint: cannot open '" + path + "' for writing");
    os.write(kMagic, 4);
    put<std::uint32_t>(os, kVersion);
    put<std::uint32_t>(os, std::uint32_t(tensors.size()));
    for (const auto& [name, t] : tensors) {
        require(name.size() <= std::numeric_limits<std::uint16_t>::max(),
                "checkpoint: tensor name too long");
        put<std::uint16_t>(os, std::uint16_t(name.size()));
        os.write(name.data(), std::streamsize(name.size()));
        require(t.rank() <= 255, "checkpoint: rank exceeds format limit");
        put<std::uint8_t>(os, std::uint8_t(t.rank()));
        for (std::size_t d : t.shape()) {
            require(d <= std::numeric_limits<std::uint32_t>::max(), "checkpoint: dim too large");
            put<std::uint32_t>(os, std::uint32_t(d));
        }
        put<std::uint8_t>(os, kDtypeF32);
        os.write(reinterpret_cast<const char*>(t.data()),
                 std::streamsize(t.size() * sizeof(float)));
    }
    require(bool(os), "checkpoint: write failed for '" + path + "'");
}

NamedTensors load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(bool(is), "checkpoint: cannot open '" + path + "'");
    char magic[4];
    is.read(magic, 4);
    require(bool(is) && std::memcmp(magic, kMagic, 4) == 0,
            "checkpoint: bad magic in '" + path + "'");
    const auto version = get<std::uint32_t>(is, "version");
    require(version == kVersion, "checkpoint: unsupported version " + std::to_string(version));
    const auto count = get<std::uint32_t>(is, "tensor count");
    NamedTensors out;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto name_len = get<std::uint16_t>(is, "name length");
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        require(bool(is), "checkpoint: truncated name");
        const auto rank = get<std::uint8_t>(is, "rank");
        std::vector<std::size_t> shape(rank);
        std::size_t n = 1;
        for (auto& d : shape) {
            d = get<std::uint32_t>(is, "dim");
            require(d > 0, "checkpoint: zero extent in '" + name + "'");
            n *= d;
        }
        const auto dtype = get<std::uint8_t>(is, "dtype");
        require(dtype == kDtypeF32,
                "checkpoint: unknown dtype tag " + std::to_string(int(dtype)));
        std::vector<float> data(n);
        is.read(reinterpret_cast<char*>(data.data()), std::streamsize(n * sizeof(float)));
        require(bool(is), "checkpoint: truncated data for '" + name + "'");
        out.emplace_back(std::move(name), TensorF(std::move(shape), std::move(data)));
    }
    return out;
}

const TensorF& find_tensor(const NamedTensors& tensors, const std::string& name) {
    for (const auto& [n, t] : tensors)
        if (n == name) return t;
    fail("checkpoint: tensor '" + name + "' not found");
}

bool has_tensor(const NamedTensors& tensors, const std::string& name) {
    for (const auto& [n, t] : tensors)
        if (n == name) return true;
    return false;
}

} // namespace rfgan
