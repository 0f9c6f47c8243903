#pragma once

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "deeprat/rng.hpp"

namespace deeprat::nn {

// Fixed-capacity FIFO transition store with uniform sampling without
// replacement within a batch.
template <typename Transition>
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("replay capacity must be > 0");
        items_.reserve(capacity);
    }

    void push(Transition t) {
        if (items_.size() < capacity_) {
            items_.push_back(std::move(t));
        } else {
            items_[cursor_] = std::move(t);
        }
        cursor_ = (cursor_ + 1) % capacity_;
    }

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }

    // i = 0 is the oldest stored transition.
    const Transition& at(std::size_t i) const {
        if (i >= items_.size()) throw std::out_of_range("replay index");
        if (items_.size() < capacity_) return items_[i];
        return items_[(cursor_ + i) % capacity_];
    }

    // k distinct uniform indices via partial Fisher-Yates.
    std::vector<std::size_t> sample_indices(std::size_t k, rng::Stream& rs) const {
        if (k > items_.size())
            throw std::invalid_argument("replay sample larger than buffer");
        std::vector<std::size_t> idx(items_.size());
        std::iota(idx.begin(), idx.end(), std::size_t(0));
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + rs.uniform_int(idx.size() - i);
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

private:
    std::size_t capacity_;
    std::vector<Transition> items_;
    std::size_t cursor_ = 0;
};

}  // namespace deeprat::nn
