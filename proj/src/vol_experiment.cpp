#include "vsig/errors.hpp"
#include "vsig/experiments.hpp"
#include "vsig/parallel.hpp"
#include "vsig/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>

namespace vsig {

namespace {

using Window = std::pair<std::size_t, std::size_t>;

/// Flat terminal signatures of the windows; an empty kernel means the classical signature.
Eigen::MatrixXd window_features(const Path& path, const std::optional<Kernel>& kernel, int L, const std::vector<Window>& windows) {
    const int m = path.dim();
    const auto F = static_cast<Eigen::Index>(series_size(static_cast<std::size_t>(m), L));
    Eigen::MatrixXd out(static_cast<Eigen::Index>(windows.size()), F);
    constexpr std::size_t block = 64;
    const std::size_t blocks = (windows.size() + block - 1) / block;
    const Eigen::MatrixXd dx = path.increments();
    parallel_for(blocks, [&](std::size_t b) {
        const std::size_t lo = b * block, hi = std::min(windows.size(), lo + block);
        if (kernel) {
            const std::vector<Window> part(windows.begin() + static_cast<std::ptrdiff_t>(lo), windows.begin() + static_cast<std::ptrdiff_t>(hi));
            out.middleRows(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi - lo)) = lift_window_features(path, *kernel, L, part);
            return;
        }
        for (std::size_t w = lo; w < hi; ++w) {
            auto S = TensorSeries::unit(m, L);
            for (std::size_t i = windows[w].first; i < windows[w].second; ++i)
                S = tensor_mul(S, tensor_exp(TensorSeries::Vector(dx.row(static_cast<Eigen::Index>(i)).transpose()), L), L);
            out.row(static_cast<Eigen::Index>(w)) = S.flat().transpose();
        }
    });
    return out;
}

struct Split {
    std::vector<std::size_t> origins;  // all usable origins, in time order
    std::size_t n_fit = 0, n_train = 0;
};

struct Tuned {
    int L = 0;
    double eta = 0.0;
    double val_mse = std::numeric_limits<double>::infinity();
    std::optional<double> val_r2;
};

/// Best (L, eta) on the validation rows for fixed features; eta varies fastest, ties keep the earlier pair.
Tuned tune_level_eta(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Split& s, int m, const std::vector<int>& L_grid,
                     const std::vector<double>& eta_grid) {
    RidgeAccumulator acc(X.cols());
    acc.add(X.topRows(static_cast<Eigen::Index>(s.n_fit)), y.head(static_cast<Eigen::Index>(s.n_fit)));
    const auto nv = static_cast<Eigen::Index>(s.n_train - s.n_fit);
    const Eigen::MatrixXd Xv = X.middleRows(static_cast<Eigen::Index>(s.n_fit), nv);
    const Eigen::VectorXd yv = y.segment(static_cast<Eigen::Index>(s.n_fit), nv);
    Tuned best;
    for (int L : L_grid) {
        const auto k = static_cast<Eigen::Index>(series_size(static_cast<std::size_t>(m), L));
        for (double eta : eta_grid) {
            const RidgeModel model = acc.solve(eta, k);
            const Metrics met = metrics(model.predict(Xv.leftCols(k)), yv);
            if (std::isfinite(met.mse) && met.mse < best.val_mse) best = {L, eta, met.mse, met.r2};
        }
    }
    if (best.L == 0) throw std::runtime_error("no finite validation score in the (L, eta) grid");
    return best;
}

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }
std::string opt_text(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

}  // namespace

std::vector<Kernel> two_exp_candidates(const std::vector<double>& lambdas, const std::vector<double>& alphas, int d) {
    std::vector<double> lam = lambdas;
    std::sort(lam.begin(), lam.end());
    lam.erase(std::unique(lam.begin(), lam.end()), lam.end());
    std::vector<std::pair<double, double>> pairs;
    for (double a1 : alphas)
        for (double a2 : alphas) {
            const double r = a1 / a2;
            const bool seen = std::any_of(pairs.begin(), pairs.end(), [&](const auto& p) { return std::abs(p.first / p.second - r) <= 1e-12 * r; });
            if (!seen) pairs.emplace_back(a1, a2);
        }
    std::vector<Kernel> out;
    for (double l : lam) out.emplace_back(ScalarExpKernel{1.0, l, d});
    for (std::size_t i = 0; i < lam.size(); ++i)
        for (std::size_t j = i + 1; j < lam.size(); ++j)
            for (const auto& [a1, a2] : pairs) out.emplace_back(DiagSumExpKernel{{a1, a2}, {lam[i], lam[j]}, d});
    return out;
}

Report run_vol_forecast(const VolConfig& cfg) {
    if (cfg.synthetic) return run_vol_forecast(cfg, synthetic_rv_series(cfg.synthetic_params));
    if (cfg.data.empty()) throw ConfigError("volforecast needs a data file or synthetic = true");
    auto in = ingest_rv_csv(cfg.data, cfg.columns);
    for (const auto& w : in.warnings) std::cerr << "warning: " << w << '\n';
    return run_vol_forecast(cfg, in.series);
}

Report run_vol_forecast(const VolConfig& cfg, const RvSeries& series) {
    const auto n = static_cast<std::size_t>(series.x.size());
    if (series.v.size() != series.x.size() || series.dates.size() != n) throw DataError("series columns have different lengths");
    const auto p_max = static_cast<std::size_t>(*std::max_element(cfg.windows.begin(), cfg.windows.end()));
    const auto q_max = static_cast<std::size_t>(*std::max_element(cfg.horizons.begin(), cfg.horizons.end()));
    const std::size_t first = std::max(p_max, har_min_origin);
    if (n < first + q_max + 20) throw DataError("insufficient history for the largest window and horizon: " + std::to_string(n) + " observations");

    Split split;
    for (std::size_t o = first; o + q_max < n; ++o) split.origins.push_back(o);
    const std::size_t O = split.origins.size();
    split.n_train = static_cast<std::size_t>(std::floor(cfg.train_fraction * static_cast<double>(O)));
    split.n_fit = split.n_train - static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(split.n_train)));
    if (split.n_fit < 10 || split.n_train - split.n_fit < 5 || O - split.n_train < 5) throw DataError("too few origins for the train/validation/test split");

    // Augmented path (x, cumulative |dx|, t) on the trading-day clock.
    Eigen::MatrixXd vals(static_cast<Eigen::Index>(n), 1);
    vals.col(0) = series.x;
    const Path path = augment(Path(TimeGrid::uniform(0.0, static_cast<double>(n - 1) / cfg.time_unit, n - 1), vals), {true, true});
    const int m = path.dim();

    auto windows_for = [&](std::size_t p) {
        std::vector<Window> w;
        for (std::size_t o : split.origins) w.emplace_back(o - p, o);
        return w;
    };
    auto targets_for = [&](std::size_t q) {
        Eigen::VectorXd y(static_cast<Eigen::Index>(O));
        for (std::size_t r = 0; r < O; ++r) {
            if (split.origins[r] + q <= split.origins[r]) throw std::logic_error("look-ahead guard: target does not follow its window");
            y(static_cast<Eigen::Index>(r)) = series.v(static_cast<Eigen::Index>(split.origins[r] + q));
        }
        return y;
    };
    const int L_max = *std::max_element(cfg.L_grid.begin(), cfg.L_grid.end());

    // Kernel selection at the reference window and the shortest horizon.
    const std::size_t p_ref = cfg.reference_window > 0 ? static_cast<std::size_t>(cfg.reference_window) : p_max;
    if (p_ref > first) throw ConfigError("reference_window exceeds the available history per origin");
    const std::size_t q_ref = static_cast<std::size_t>(*std::min_element(cfg.horizons.begin(), cfg.horizons.end()));
    const auto candidates = two_exp_candidates(cfg.lambda_grid, cfg.alpha_grid, m);
    const auto ref_windows = windows_for(p_ref);
    const Eigen::VectorXd y_ref = targets_for(q_ref);
    std::vector<Window> train_windows(ref_windows.begin(), ref_windows.begin() + static_cast<std::ptrdiff_t>(split.n_train));
    std::vector<Tuned> cand_scores(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const Eigen::MatrixXd X = window_features(path, candidates[c], L_max, train_windows);
        cand_scores[c] = tune_level_eta(X, y_ref.head(static_cast<Eigen::Index>(split.n_train)), split, m, cfg.L_grid, cfg.eta_grid);
    }
    std::size_t best_c = 0;
    for (std::size_t c = 1; c < candidates.size(); ++c)
        if (cand_scores[c].val_mse < cand_scores[best_c].val_mse) best_c = c;
    const Kernel& kernel = candidates[best_c];

    // HAR depends on the horizon only.
    std::vector<std::size_t> train_origins(split.origins.begin(), split.origins.begin() + static_cast<std::ptrdiff_t>(split.n_train));
    std::vector<std::size_t> test_origins(split.origins.begin() + static_cast<std::ptrdiff_t>(split.n_train), split.origins.end());
    std::map<int, HarResult> har;
    for (int q : cfg.horizons) har[q] = har_fit_predict(series.v, q, train_origins, test_origins, {cfg.har_raw_lags});

    Report rep;
    rep.experiment = "volforecast";
    rep.config = to_json(cfg);
    rep.table.header = {"q", "p", "sig_test_r2", "vsig_test_r2", "har_test_r2", "sig_val_r2", "vsig_val_r2", "sig_train_r2", "vsig_train_r2", "sig_L", "vsig_L"};
    rep.predictions.header = {"date", "q", "p", "target", "Sig", "VSig", "HAR"};
    nlohmann::json cells = nlohmann::json::array();

    const auto nt = static_cast<Eigen::Index>(split.n_train);
    const auto ntest = static_cast<Eigen::Index>(O - split.n_train);
    for (int q : cfg.horizons) {
        const Eigen::VectorXd y = targets_for(static_cast<std::size_t>(q));
        const Eigen::VectorXd y_test = y.tail(ntest);
        const Metrics har_test = metrics(har[q].predictions, y_test);
        for (int p : cfg.windows) {
            const auto win = windows_for(static_cast<std::size_t>(p));
            struct Fit {
                Tuned tuned;
                Metrics train, test;
                Eigen::VectorXd pred;
            };
            auto fit = [&](const std::optional<Kernel>& k) {
                const Eigen::MatrixXd X = window_features(path, k, L_max, win);
                Fit f;
                f.tuned = tune_level_eta(X.topRows(nt), y.head(nt), split, m, cfg.L_grid, cfg.eta_grid);
                const auto cols = static_cast<Eigen::Index>(series_size(static_cast<std::size_t>(m), f.tuned.L));
                RidgeAccumulator acc(cols);
                acc.add(X.topRows(nt).leftCols(cols), y.head(nt));
                const RidgeModel model = acc.solve(f.tuned.eta);
                f.train = metrics(model.predict(X.topRows(nt).leftCols(cols)), y.head(nt));
                f.pred = model.predict(X.bottomRows(ntest).leftCols(cols));
                f.test = metrics(f.pred, y_test);
                return f;
            };
            const Fit sig = fit(std::nullopt), vsig = fit(kernel);
            rep.table.rows.push_back({std::to_string(q), std::to_string(p), opt_text(sig.test.r2), opt_text(vsig.test.r2), opt_text(har_test.r2),
                                      opt_text(sig.tuned.val_r2), opt_text(vsig.tuned.val_r2), opt_text(sig.train.r2), opt_text(vsig.train.r2),
                                      std::to_string(sig.tuned.L), std::to_string(vsig.tuned.L)});
            auto method_json = [&](const Fit& f) {
                return nlohmann::json{{"L", f.tuned.L},
                                      {"eta", f.tuned.eta},
                                      {"validation_mse", f.tuned.val_mse},
                                      {"validation_r2", opt_json(f.tuned.val_r2)},
                                      {"train_r2", opt_json(f.train.r2)},
                                      {"test_r2", opt_json(f.test.r2)},
                                      {"test_mse", f.test.mse}};
            };
            cells.push_back({{"q", q}, {"p", p}, {"Sig", method_json(sig)}, {"VSig", method_json(vsig)}, {"HAR", {{"test_r2", opt_json(har_test.r2)}, {"test_mse", har_test.mse}}}});
            for (Eigen::Index r = 0; r < ntest; ++r)
                rep.predictions.rows.push_back({series.dates[test_origins[static_cast<std::size_t>(r)]], std::to_string(q), std::to_string(p), format_number(y_test(r)),
                                                format_number(sig.pred(r)), format_number(vsig.pred(r)), format_number(har[q].predictions(r))});
        }
    }

    nlohmann::json scores = nlohmann::json::array();
    for (std::size_t c = 0; c < candidates.size(); ++c)
        scores.push_back({{"kernel", kernel_to_json(candidates[c])}, {"L", cand_scores[c].L}, {"eta", cand_scores[c].eta}, {"validation_mse", cand_scores[c].val_mse}});
    nlohmann::json har_json = nlohmann::json::object();
    for (const auto& [q, h] : har) har_json[std::to_string(q)] = std::vector<double>(h.coefficients.data(), h.coefficients.data() + h.coefficients.size());
    rep.results = {{"kernel", kernel_to_json(kernel)},
                   {"kernel_selection", {{"reference_window", p_ref}, {"horizon", q_ref}, {"candidates", scores}}},
                   {"split", {{"origins", O}, {"fit", split.n_fit}, {"validation", split.n_train - split.n_fit}, {"test", O - split.n_train}}},
                   {"har_coefficients", har_json},
                   {"cells", cells}};
    return rep;
}

}  // namespace vsig
