#include "wclust/point_set.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wclust {

PointSet PointSet::from_rows(const std::vector<Vec>& rows) {
    if (rows.empty()) {
        return PointSet{};
    }
    PointSet out(rows.front().size());
    for (const auto& r : rows) {
        out.push_back(r);
    }
    return out;
}

void PointSet::push_back(std::span<const double> point) {
    if (dim_ == 0 && data_.empty()) {
        dim_ = point.size();
    }
    if (point.size() != dim_) {
        throw std::invalid_argument("PointSet::push_back: expected dimension " + std::to_string(dim_) +
                                    ", got " + std::to_string(point.size()));
    }
    data_.insert(data_.end(), point.begin(), point.end());
}

PointSet PointSet::scaled(double factor) const {
    PointSet out = *this;
    for (auto& v : out.data_) {
        v *= factor;
    }
    return out;
}

PointSet Dataset::normalized_points() const {
    if (normalized) {
        return points;
    }
    return points.scaled(1.0 / sigma);
}

void Dataset::validate() const {
    if (points.empty()) {
        throw std::invalid_argument("dataset is empty");
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("dataset sigma must be positive and finite");
    }
    for (double v : points.flat()) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("dataset contains a non-finite coordinate");
        }
    }
    if (labels && labels->size() != points.size()) {
        throw std::invalid_argument("dataset label count does not match point count");
    }
}

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        acc += diff * diff;
    }
    return acc;
}

double distance(std::span<const double> a, std::span<const double> b) noexcept {
    return std::sqrt(squared_distance(a, b));
}

double norm(std::span<const double> a) noexcept {
    double acc = 0.0;
    for (double v : a) {
        acc += v * v;
    }
    return std::sqrt(acc);
}

}  // namespace wclust
