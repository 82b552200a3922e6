#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "rfgan/checkpoint.hpp"
#include "rfgan/rng.hpp"

using namespace rfgan;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const char* name) {
    fs::path dir = fs::temp_directory_path() / "rfgan_ckpt_tests";
    fs::create_directories(dir);
    return (dir / name).string();
}

} // namespace

TEST_CASE("checkpoint round-trips names, shapes, and bytes") {
    Rng rng(8);
    NamedTensors ts;
    TensorF a({3, 4});
    rng.fill_gaussian(a.span());
    TensorF b({8});
    rng.fill_gaussian(b.span());
    TensorF c({2, 2, 2});
    rng.fill_gaussian(c.span());
    ts.emplace_back("G.0.W", a);
    ts.emplace_back("head.w2", b);
    ts.emplace_back("E.1.W", c);

    const std::string path = temp_path("roundtrip.rfgn");
    save_checkpoint(path, ts);
    NamedTensors back = load_checkpoint(path);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].first == ts[i].first);
        REQUIRE(back[i].second.shape() == ts[i].second.shape());
        for (std::size_t j = 0; j < ts[i].second.size(); ++j)
            CHECK(back[i].second[j] == ts[i].second[j]);
    }
    CHECK(find_tensor(back, "head.w2").size() == 8);
    CHECK_THROWS_AS(find_tensor(back, "missing"), Error);
}

TEST_CASE("checkpoint header layout is exactly as specified") {
    NamedTensors ts;
    ts.emplace_back("ab", TensorF({2}, {1.0f, 2.0f}));
    const std::string path = temp_path("layout.rfgn");
    save_checkpoint(path, ts);

    std::ifstream is(path, std::ios::binary);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                     std::istreambuf_iterator<char>());
    // magic, version=1 LE, count=1 LE
    REQUIRE(bytes.size() == 4 + 4 + 4 + 2 + 2 + 1 + 4 + 1 + 8);
    CHECK(bytes[0] == 'R');
    CHECK(bytes[1] == 'F');
    CHECK(bytes[2] == 'G');
    CHECK(bytes[3] == 'N');
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 0);
    CHECK(bytes[8] == 1);
    // name length u16 = 2, then "ab"
    CHECK(bytes[12] == 2);
    CHECK(bytes[14] == 'a');
    CHECK(bytes[15] == 'b');
    // rank u8 = 1, dim u32 = 2, dtype u8 = 0
    CHECK(bytes[16] == 1);
    CHECK(bytes[17] == 2);
    CHECK(bytes[21] == 0);
}

TEST_CASE("checkpoint rejects bad magic and truncation") {
    const std::string path = temp_path("bad.rfgn");
    {
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        os << "NOPE";
    }
    CHECK_THROWS_AS(load_checkpoint(path), Error);

    NamedTensors ts;
    ts.emplace_back("w", TensorF({4}, {1, 2, 3, 4}));
    save_checkpoint(path, ts);
    const auto full_size = fs::file_size(path);
    fs::resize_file(path, full_size - 6);
    CHECK_THROWS_AS(load_checkpoint(path), Error);
}
