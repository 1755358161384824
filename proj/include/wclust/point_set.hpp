#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace wclust {

using Vec = std::vector<double>;

// Dense row-major collection of N points in R^d.
class PointSet {
public:
    PointSet() = default;
    explicit PointSet(std::size_t dim) : dim_(dim) {}
    PointSet(std::size_t count, std::size_t dim) : dim_(dim), data_(count * dim, 0.0) {}

    static PointSet from_rows(const std::vector<Vec>& rows);

    std::size_t size() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return data_.empty(); }

    std::span<const double> row(std::size_t i) const noexcept {
        return {data_.data() + i * dim_, dim_};
    }
    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * dim_, dim_}; }

    void push_back(std::span<const double> point);

    std::span<const double> flat() const noexcept { return data_; }

    // Returns a copy with every coordinate multiplied by `factor`.
    PointSet scaled(double factor) const;

private:
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

// Measurement vectors with known per-coordinate noise std `sigma`.
// When `normalized` is set the points are already divided by sigma.
struct Dataset {
    PointSet points;
    double sigma = 1.0;
    bool normalized = false;
    std::optional<std::vector<int>> labels;

    std::size_t size() const noexcept { return points.size(); }
    std::size_t dim() const noexcept { return points.dim(); }

    // Points in the unit-covariance frame (raw / sigma).
    PointSet normalized_points() const;
    // Throws std::invalid_argument when the dataset violates its invariants.
    void validate() const;
};

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;
double distance(std::span<const double> a, std::span<const double> b) noexcept;
double norm(std::span<const double> a) noexcept;

}  // namespace wclust
