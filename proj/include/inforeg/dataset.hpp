#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "density.hpp"

namespace inforeg {

struct LabeledPoint {
    Vec x;
    int y = 1; // -1 or +1
};

struct LabeledDataset {
    std::vector<LabeledPoint> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }

    std::size_t dim() const {
        if (points.empty())
            throw std::invalid_argument("LabeledDataset: empty");
        return points.front().x.size();
    }

    void validate() const {
        if (points.empty()) return;
        const std::size_t d = points.front().x.size();
        if (d == 0) throw std::invalid_argument("LabeledDataset: zero dim");
        for (const auto& p : points) {
            if (p.x.size() != d)
                throw std::invalid_argument(
                    "LabeledDataset: dimension mismatch");
            if (p.y != 1 && p.y != -1)
                throw std::invalid_argument(
                    "LabeledDataset: labels must be -1 or +1");
        }
    }
};

struct UnlabeledDataset {
    std::vector<Vec> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }

    std::size_t dim() const {
        if (points.empty())
            throw std::invalid_argument("UnlabeledDataset: empty");
        return points.front().size();
    }

    void validate() const {
        if (points.empty()) return;
        const std::size_t d = points.front().size();
        if (d == 0) throw std::invalid_argument("UnlabeledDataset: zero dim");
        for (const auto& p : points)
            if (p.size() != d)
                throw std::invalid_argument(
                    "UnlabeledDataset: dimension mismatch");
    }
};

/// Append the constant-1 bias feature.
inline Vec augment(const Vec& x) {
    Vec out = x;
    out.push_back(1.0);
    return out;
}

inline LabeledDataset augment(const LabeledDataset& ds) {
    LabeledDataset out;
    out.points.reserve(ds.size());
    for (const auto& p : ds.points) out.points.push_back({augment(p.x), p.y});
    return out;
}

inline UnlabeledDataset augment(const UnlabeledDataset& ds) {
    UnlabeledDataset out;
    out.points.reserve(ds.size());
    for (const auto& p : ds.points) out.points.push_back(augment(p));
    return out;
}

} // namespace inforeg
