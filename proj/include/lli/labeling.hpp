#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lli {

// Hidden ground truth for the binary case: bits over {0,1}.
struct BinaryLabeling {
    std::vector<std::uint8_t> bits;

    BinaryLabeling() = default;
    explicit BinaryLabeling(std::vector<std::uint8_t> b) : bits(std::move(b)) { validate(); }

    std::size_t size() const { return bits.size(); }
    void validate() const {
        if (bits.empty()) throw std::invalid_argument("BinaryLabeling: N must be >= 1");
        for (auto b : bits)
            if (b > 1) throw std::invalid_argument("BinaryLabeling: entries must be 0 or 1");
    }
};

// K-ary ground truth: classes over 1..K.
struct KaryLabeling {
    std::uint32_t num_classes = 0;
    std::vector<std::uint32_t> classes;

    KaryLabeling() = default;
    KaryLabeling(std::uint32_t k, std::vector<std::uint32_t> c)
        : num_classes(k), classes(std::move(c)) {
        validate();
    }

    std::size_t size() const { return classes.size(); }
    void validate() const {
        if (classes.empty()) throw std::invalid_argument("KaryLabeling: N must be >= 1");
        if (num_classes < 2) throw std::invalid_argument("KaryLabeling: K must be >= 2");
        for (auto c : classes)
            if (c < 1 || c > num_classes)
                throw std::invalid_argument("KaryLabeling: class out of range 1..K");
    }
};

inline std::uint64_t labeling_hash(const std::vector<std::uint8_t>& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (auto b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace lli
