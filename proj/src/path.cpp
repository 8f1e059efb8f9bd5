#include "vsig/path.hpp"

#include "csv.hpp"
#include "vsig/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vsig {

TimeGrid::TimeGrid(std::vector<double> times) : t_(std::move(times)) {
    if (t_.empty()) throw std::invalid_argument("time grid needs at least one node");
    for (double t : t_)
        if (!std::isfinite(t)) throw std::invalid_argument("non-finite grid time");
    for (std::size_t i = 1; i < t_.size(); ++i)
        if (!(t_[i] > t_[i - 1])) throw std::invalid_argument("grid times must be strictly increasing");
}

TimeGrid TimeGrid::uniform(double t0, double t1, std::size_t segments) {
    if (segments == 0 || !(t1 > t0)) throw std::invalid_argument("uniform grid needs t1 > t0 and at least one segment");
    std::vector<double> t(segments + 1);
    const double h = (t1 - t0) / static_cast<double>(segments);
    for (std::size_t i = 0; i <= segments; ++i) t[i] = t0 + h * static_cast<double>(i);
    t[segments] = t1;
    return TimeGrid(std::move(t));
}

bool TimeGrid::is_uniform(double tol) const {
    if (t_.size() < 3) return true;
    const double h = (t_.back() - t_.front()) / static_cast<double>(segments());
    for (std::size_t i = 0; i + 1 < t_.size(); ++i)
        if (std::abs(dt(i) - h) > tol * h) return false;
    return true;
}

std::optional<std::size_t> TimeGrid::find(double t, double tol) const {
    if (t_.empty()) return std::nullopt;
    auto it = std::lower_bound(t_.begin(), t_.end(), t);
    const double scale = t_.size() > 1 ? (t_.back() - t_.front()) / static_cast<double>(segments()) : 1.0;
    std::optional<std::size_t> best;
    double best_err = tol * scale;
    for (auto cand : {it, it == t_.begin() ? it : std::prev(it)}) {
        if (cand == t_.end()) continue;
        const double err = std::abs(*cand - t);
        if (err <= best_err) {
            best_err = err;
            best = static_cast<std::size_t>(cand - t_.begin());
        }
    }
    return best;
}

std::size_t TimeGrid::index_of(double t) const {
    auto i = find(t);
    if (!i) throw std::invalid_argument("time " + std::to_string(t) + " is not a grid node");
    return *i;
}

Path::Path(TimeGrid grid, Eigen::MatrixXd values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.rows()) != grid_.nodes())
        throw std::invalid_argument("value count does not match grid node count");
    if (values_.cols() < 1) throw std::invalid_argument("path needs at least one channel");
    if (!values_.allFinite()) throw std::invalid_argument("non-finite path value");
}

Eigen::MatrixXd Path::increments() const {
    const Eigen::Index n = static_cast<Eigen::Index>(segments());
    return values_.bottomRows(n) - values_.topRows(n);
}

Path Path::slice(std::size_t lo, std::size_t hi) const {
    if (lo > hi || hi >= nodes()) throw std::out_of_range("slice bounds out of range");
    std::vector<double> t(grid_.times().begin() + static_cast<std::ptrdiff_t>(lo),
                          grid_.times().begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    return Path(TimeGrid(std::move(t)),
                values_.middleRows(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi - lo + 1)));
}

Path from_samples(const std::vector<double>& times, const Eigen::MatrixXd& values) {
    if (times.size() != static_cast<std::size_t>(values.rows()))
        throw std::invalid_argument("times and values have different counts");
    return Path(TimeGrid(times), values);
}

Path augment(const Path& path, AugmentModes modes) {
    const Eigen::Index n = static_cast<Eigen::Index>(path.nodes());
    const Eigen::Index d = path.dim();
    const Eigen::Index extra = (modes.cumulative_abs_increment ? d : 0) + (modes.time ? 1 : 0);
    Eigen::MatrixXd out(n, d + extra);
    out.leftCols(d) = path.values();
    Eigen::Index col = d;
    if (modes.cumulative_abs_increment) {
        out.block(0, col, 1, d).setZero();
        for (Eigen::Index i = 1; i < n; ++i)
            out.block(i, col, 1, d) = out.block(i - 1, col, 1, d) + (path.values().row(i) - path.values().row(i - 1)).cwiseAbs();
        col += d;
    }
    if (modes.time)
        for (Eigen::Index i = 0; i < n; ++i) out(i, col) = path.grid()[static_cast<std::size_t>(i)];
    return Path(path.grid(), std::move(out));
}

Path reparameterize(const Path& path, const std::function<double(double)>& rho) {
    const auto& g = path.grid();
    std::vector<double> t(g.nodes());
    for (std::size_t i = 0; i < g.nodes(); ++i) t[i] = rho(g[i]);
    const double tol = 1e-12 * std::max(1.0, std::abs(g.back() - g.front()));
    if (std::abs(t.front() - g.front()) > tol || std::abs(t.back() - g.back()) > tol)
        throw std::invalid_argument("reparameterization must fix both endpoints");
    t.front() = g.front();
    t.back() = g.back();
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) throw std::invalid_argument("reparameterization must be strictly increasing on nodes");
    return Path(TimeGrid(std::move(t)), path.values());
}

Path read_path_csv(const std::string& file) {
    const auto table = detail::read_csv(file);
    const auto tcol = std::find(table.header.begin(), table.header.end(), "t");
    if (tcol == table.header.end()) throw DataError(file + ": header has no \"t\" column");
    const std::size_t ti = static_cast<std::size_t>(tcol - table.header.begin());
    const std::size_t d = table.header.size() - 1;
    if (d == 0) throw DataError(file + ": no channel columns");
    if (table.rows.empty()) throw DataError(file + ": no data rows");

    std::vector<double> times(table.rows.size());
    Eigen::MatrixXd values(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = file + ":" + std::to_string(table.line_numbers[r]);
        if (row.size() != table.header.size()) throw DataError(where + ": wrong number of columns");
        std::size_t c = 0;
        for (std::size_t k = 0; k < row.size(); ++k) {
            double v;
            if (!detail::parse_double(row[k], v) || !std::isfinite(v)) throw DataError(where + ": invalid number '" + row[k] + "'");
            if (k == ti)
                times[r] = v;
            else
                values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c++)) = v;
        }
        if (r > 0 && !(times[r] > times[r - 1])) throw DataError(where + ": times not strictly increasing");
    }
    return Path(TimeGrid(std::move(times)), std::move(values));
}

}  // namespace vsig
