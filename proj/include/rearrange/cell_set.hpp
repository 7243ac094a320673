#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace rearrange {

/// Dynamic bitset over grid-cell indices.
class CellSet {
public:
    CellSet() = default;
    explicit CellSet(std::size_t num_cells) : words_((num_cells + 63) / 64, 0), size_(num_cells) {}
    CellSet(std::size_t num_cells, std::initializer_list<std::size_t> cells) : CellSet(num_cells) {
        for (auto c : cells) insert(c);
    }

    [[nodiscard]] std::size_t universe() const noexcept { return size_; }

    void insert(std::size_t c) { words_.at(c / 64) |= std::uint64_t{1} << (c % 64); }
    void erase(std::size_t c) { words_.at(c / 64) &= ~(std::uint64_t{1} << (c % 64)); }
    void flip(std::size_t c) { words_.at(c / 64) ^= std::uint64_t{1} << (c % 64); }

    [[nodiscard]] bool contains(std::size_t c) const noexcept {
        return c < size_ && ((words_[c / 64] >> (c % 64)) & 1u);
    }

    [[nodiscard]] bool intersects(const CellSet& o) const noexcept {
        const std::size_t n = std::min(words_.size(), o.words_.size());
        for (std::size_t i = 0; i < n; ++i)
            if (words_[i] & o.words_[i]) return true;
        return false;
    }

    [[nodiscard]] bool empty() const noexcept {
        for (auto w : words_)
            if (w) return false;
        return true;
    }

    [[nodiscard]] std::size_t count() const noexcept {
        std::size_t n = 0;
        for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }

    /// Members of *this that are not in `o`.
    [[nodiscard]] CellSet minus(const CellSet& o) const {
        CellSet out = *this;
        for (std::size_t i = 0; i < out.words_.size() && i < o.words_.size(); ++i) out.words_[i] &= ~o.words_[i];
        return out;
    }

    /// Subset test: every member of *this is in `o`.
    [[nodiscard]] bool subset_of(const CellSet& o) const noexcept {
        for (std::size_t i = 0; i < words_.size(); ++i) {
            const std::uint64_t other = i < o.words_.size() ? o.words_[i] : 0;
            if (words_[i] & ~other) return false;
        }
        return true;
    }

    [[nodiscard]] std::vector<std::size_t> members() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < words_.size(); ++i) {
            std::uint64_t w = words_[i];
            while (w) {
                out.push_back(i * 64 + static_cast<std::size_t>(std::countr_zero(w)));
                w &= w - 1;
            }
        }
        return out;
    }

    friend bool operator==(const CellSet&, const CellSet&) = default;

private:
    std::vector<std::uint64_t> words_;
    std::size_t size_{0};
};

} // namespace rearrange
