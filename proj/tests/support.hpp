#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "specfor/image.hpp"
#include "specfor/matrix.hpp"
#include "specfor/rng.hpp"

namespace specfor::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        Rng rng(std::hash<std::string>{}(tag) ^ reinterpret_cast<std::uintptr_t>(this));
        path_ = std::filesystem::temp_directory_path() /
                ("specfor_" + tag + "_" + std::to_string(rng.next_u64() % 1000000007ULL));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::vector<char> read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline FloatMatrix random_matrix(std::size_t h, std::size_t w, std::uint64_t seed) {
    Rng rng(seed);
    FloatMatrix m(h, w);
    for (auto& v : m.data) v = static_cast<float>(rng.uniform());
    return m;
}

inline ImageTensor random_image(std::size_t h, std::size_t w, std::size_t channels, std::uint64_t seed) {
    Rng rng(seed);
    ImageTensor img(h, w, channels);
    for (auto& v : img.data()) v = static_cast<float>(rng.uniform());
    return img;
}

} // namespace specfor::testing
