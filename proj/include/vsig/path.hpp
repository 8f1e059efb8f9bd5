#pragma once

/**
 * @file path.hpp
 * @brief Piecewise-linear paths on strictly increasing time grids.
 */

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace vsig {

class TimeGrid {
public:
    TimeGrid() = default;
    explicit TimeGrid(std::vector<double> times);

    static TimeGrid uniform(double t0, double t1, std::size_t segments);

    std::size_t nodes() const { return t_.size(); }
    std::size_t segments() const { return t_.empty() ? 0 : t_.size() - 1; }
    double operator[](std::size_t i) const { return t_[i]; }
    double dt(std::size_t i) const { return t_[i + 1] - t_[i]; }
    double front() const { return t_.front(); }
    double back() const { return t_.back(); }
    const std::vector<double>& times() const { return t_; }

    /// True when all segment lengths agree to relative tolerance tol.
    bool is_uniform(double tol = 1e-10) const;

    /// Node index whose time matches t within tol times the local step.
    std::optional<std::size_t> find(double t, double tol = 1e-9) const;

    /// Node index of t, throwing std::invalid_argument when off-grid.
    std::size_t index_of(double t) const;

private:
    std::vector<double> t_;
};

class Path {
public:
    Path() = default;
    /// values has one row per grid node and one column per channel.
    Path(TimeGrid grid, Eigen::MatrixXd values);

    const TimeGrid& grid() const { return grid_; }
    const Eigen::MatrixXd& values() const { return values_; }
    int dim() const { return static_cast<int>(values_.cols()); }
    std::size_t nodes() const { return grid_.nodes(); }
    std::size_t segments() const { return grid_.segments(); }

    Eigen::VectorXd increment(std::size_t i) const { return (values_.row(static_cast<Eigen::Index>(i) + 1) - values_.row(static_cast<Eigen::Index>(i))).transpose(); }
    Eigen::VectorXd slope(std::size_t i) const { return increment(i) / grid_.dt(i); }

    /// Segment increments, one row per segment.
    Eigen::MatrixXd increments() const;

    /// Sub-path on nodes lo..hi inclusive.
    Path slice(std::size_t lo, std::size_t hi) const;

private:
    TimeGrid grid_;
    Eigen::MatrixXd values_;
};

Path from_samples(const std::vector<double>& times, const Eigen::MatrixXd& values);

struct AugmentModes {
    bool cumulative_abs_increment = false;
    bool time = false;
};

/// Appends cumulative |increment| channels (one per original channel) and then a time channel.
Path augment(const Path& path, AugmentModes modes);

/// Moves node t_i to rho(t_i) keeping values; rho must fix both endpoints and be increasing.
Path reparameterize(const Path& path, const std::function<double(double)>& rho);

/// Reads a CSV with a header row holding "t" and one column per channel.
Path read_path_csv(const std::string& file);

}  // namespace vsig
