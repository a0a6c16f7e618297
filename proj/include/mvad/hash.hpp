#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace mvad {

// FNV-1a 64-bit; used for determinism checks and checkpoint fingerprints.
class Fnv1a {
public:
    void update(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001B3ULL;
        }
    }
    void update(const std::vector<double>& v) {
        update(v.data(), v.size() * sizeof(double));
    }
    void update(const std::string& s) { update(s.data(), s.size()); }
    std::uint64_t digest() const { return h_; }

private:
    std::uint64_t h_ = 0xCBF29CE484222325ULL;
};

std::uint64_t hash_file(const std::string& path);
std::string hash_hex(std::uint64_t h);

} // namespace mvad
