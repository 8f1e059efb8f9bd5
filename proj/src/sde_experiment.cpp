#include "vsig/errors.hpp"
#include "vsig/experiments.hpp"
#include "vsig/parallel.hpp"
#include "vsig/statespace.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

namespace vsig {

namespace {

enum class FeatureEngine { classical, lift, general };

struct Method {
    std::string name;
    FeatureEngine engine;
    std::vector<Kernel> candidates;
};

/// Scalar kernel k turned into k * I_d.
Kernel scalar_times_identity(const Kernel& k, int d) {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
    if (const auto* s = std::get_if<ConstantKernel>(&k.spec())) return Kernel(ConstantKernel{s->A(0, 0) * I});
    if (const auto* s = std::get_if<FractionalKernel>(&k.spec())) return Kernel(FractionalKernel{s->beta, s->A(0, 0) * I});
    if (const auto* s = std::get_if<ScalarExpKernel>(&k.spec())) return Kernel(ScalarExpKernel{s->alpha, s->lambda, d});
    if (const auto* s = std::get_if<DiagSumExpKernel>(&k.spec())) return Kernel(DiagSumExpKernel{s->alpha, s->lambda, d});
    if (const auto* s = std::get_if<StateSpaceKernel>(&k.spec())) {
        StateSpaceKernel out = *s;
        for (auto& a : out.A) a = a(0, 0) * I;
        return Kernel(std::move(out));
    }
    if (const auto* s = std::get_if<TabulatedKernel>(&k.spec())) {
        TabulatedKernel out = *s;
        for (auto& v : out.values) v = v(0, 0) * I;
        return Kernel(std::move(out));
    }
    throw ConfigError("kernel type " + k.type_name() + " cannot be used as a feature kernel");
}

Eigen::MatrixXd node_features(const Path& p, const Kernel& k, int L, FeatureEngine e, QuadratureRule rule) {
    switch (e) {
        case FeatureEngine::classical: {
            const auto sigs = classical_signature(p, L);
            Eigen::MatrixXd X(static_cast<Eigen::Index>(sigs.size()), static_cast<Eigen::Index>(series_size(static_cast<std::size_t>(p.dim()), L)));
            for (std::size_t i = 0; i < sigs.size(); ++i) X.row(static_cast<Eigen::Index>(i)) = sigs[i].flat().transpose();
            return X;
        }
        case FeatureEngine::lift: return lift_solve(p, k, L).diagonal().features();
        case FeatureEngine::general: return diagonal_signature(p, k, L, {rule, 1}).features();
    }
    return {};
}

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

Path sde_input_path(const TimeGrid& grid, const VsdeSample& s) {
    Eigen::MatrixXd v(static_cast<Eigen::Index>(grid.nodes()), 2);
    for (std::size_t i = 0; i < grid.nodes(); ++i) v(static_cast<Eigen::Index>(i), 0) = grid[i];
    v.col(1) = s.B;
    return Path(grid, std::move(v));
}

Report run_sde_experiment(const SdeConfig& cfg) { return run_sde_experiment(cfg, simulate_linear_vsde(cfg.sim)); }

Report run_sde_experiment(const SdeConfig& cfg, const std::vector<VsdeSample>& data) {
    const TimeGrid& grid = cfg.sim.grid;
    const std::size_t M = data.size();
    const auto n_train = static_cast<std::size_t>(std::floor(cfg.train_fraction * static_cast<double>(M)));
    const auto n_val = static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(n_train)));
    const std::size_t n_fit = n_train - n_val;
    if (n_val < 1 || n_fit < 2 || M - n_train < 2) throw ConfigError("too few samples for the train/validation/test split");
    const std::size_t i1 = grid.index_of(cfg.fit_horizon);
    const auto nodes = static_cast<Eigen::Index>(grid.nodes());
    const auto fit_rows = static_cast<Eigen::Index>(i1) + 1;
    const int L = cfg.L;

    std::vector<Method> methods;
    methods.push_back({"Sig", FeatureEngine::classical, {Kernel(ConstantKernel{Eigen::MatrixXd::Identity(2, 2)})}});
    {
        Kernel k = scalar_times_identity(cfg.sim.kernel, 2);
        const FeatureEngine e = k.state_space() ? FeatureEngine::lift : FeatureEngine::general;
        methods.push_back({"VSig_k", e, {std::move(k)}});
    }
    {
        Method m{"VSig_klambda", FeatureEngine::lift, {}};
        for (double lam : cfg.lambda_grid) m.candidates.emplace_back(ScalarExpKernel{1.0, lam, 2});
        methods.push_back(std::move(m));
    }

    const std::size_t chunk = std::max<std::size_t>(16, 4 * thread_limit());
    // Computes features for samples [lo, hi) in parallel and hands them over in sample order.
    auto sweep = [&](const Method& m, const Kernel& k, std::size_t lo, std::size_t hi, bool training, auto&& consume) {
        for (std::size_t a = lo; a < hi; a += chunk) {
            const std::size_t b = std::min(hi, a + chunk);
            std::vector<Eigen::MatrixXd> F(b - a);
            parallel_for(b - a, [&](std::size_t r) {
                const Path full = sde_input_path(grid, data[a + r]);
                if (training) {
                    const Path p = full.slice(0, i1);
                    F[r] = node_features(p, k, L, m.engine, cfg.rule);
                    if (p.grid().back() > cfg.fit_horizon + 1e-9 || F[r].rows() != fit_rows)
                        throw std::logic_error("leakage guard: training features extend beyond the fit horizon");
                } else {
                    F[r] = node_features(full, k, L, m.engine, cfg.rule);
                }
            });
            for (std::size_t r = 0; r < F.size(); ++r) consume(a + r, F[r]);
        }
    };

    const auto F = static_cast<Eigen::Index>(series_size(2, L));
    const auto labels = feature_labels(2, L);
    nlohmann::json results = nlohmann::json::array();
    std::vector<std::vector<Eigen::VectorXd>> test_pred(methods.size());
    Table table{{"method", "mse_0_" + format_number(cfg.fit_horizon), "r2_0_" + format_number(cfg.fit_horizon),
                 "mse_0_" + format_number(grid.back()), "r2_0_" + format_number(grid.back())},
                {}};

    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        const Method& m = methods[mi];
        std::vector<RidgeAccumulator> accs;
        nlohmann::json validation = nlohmann::json::array();
        double best_score = std::numeric_limits<double>::infinity();
        std::size_t best_c = 0;
        double best_eta = cfg.eta_grid.front();
        for (std::size_t c = 0; c < m.candidates.size(); ++c) {
            const Kernel& k = m.candidates[c];
            RidgeAccumulator acc(F);
            sweep(m, k, 0, n_fit, true, [&](std::size_t s, const Eigen::MatrixXd& X) { acc.add(X, data[s].Y.head(fit_rows)); });
            std::vector<Eigen::MatrixXd> vx;
            sweep(m, k, n_fit, n_train, true, [&](std::size_t, const Eigen::MatrixXd& X) { vx.push_back(X); });
            for (double eta : cfg.eta_grid) {
                const RidgeModel model = acc.solve(eta);
                MetricsAccumulator ma;
                for (std::size_t v = 0; v < vx.size(); ++v) ma.add(model.predict(vx[v]), data[n_fit + v].Y.head(fit_rows));
                const Metrics met = ma.result();
                const double score = std::isfinite(met.mse) ? met.mse : std::numeric_limits<double>::infinity();
                validation.push_back({{"kernel", kernel_to_json(k)}, {"eta", eta}, {"mse", met.mse}});
                if (score < best_score) {
                    best_score = score;
                    best_c = c;
                    best_eta = eta;
                }
            }
            for (std::size_t v = 0; v < vx.size(); ++v) acc.add(vx[v], data[n_fit + v].Y.head(fit_rows));
            accs.push_back(std::move(acc));
        }
        const RidgeModel model = accs[best_c].solve(best_eta);

        MetricsAccumulator on_fit, on_all;
        sweep(m, m.candidates[best_c], n_train, M, false, [&](std::size_t s, const Eigen::MatrixXd& X) {
            Eigen::VectorXd yh = model.predict(X);
            on_fit.add(yh.head(fit_rows), data[s].Y.head(fit_rows));
            on_all.add(yh, data[s].Y);
            test_pred[mi].push_back(std::move(yh));
        });
        const Metrics a = on_fit.result(), b = on_all.result();
        table.rows.push_back({m.name, format_number(a.mse), opt_number(a.r2), format_number(b.mse), opt_number(b.r2)});
        results.push_back({{"method", m.name},
                           {"kernel", kernel_to_json(m.candidates[best_c])},
                           {"eta", best_eta},
                           {"validation_mse", best_score},
                           {"validation", validation},
                           {"test", {{"mse_fit_interval", a.mse}, {"r2_fit_interval", opt_json(a.r2)}, {"mse_full", b.mse}, {"r2_full", opt_json(b.r2)}}},
                           {"model", model_to_json(model, labels)}});
    }

    Report rep;
    rep.experiment = "sde";
    rep.config = to_json(cfg);
    rep.results = {{"methods", results},
                   {"split", {{"fit_samples", n_fit}, {"validation_samples", n_val}, {"test_samples", M - n_train}}},
                   {"fit_nodes", fit_rows}};
    rep.table = std::move(table);
    rep.predictions.header = {"sample", "t", "target"};
    for (const auto& m : methods) rep.predictions.header.push_back(m.name);
    for (std::size_t s = n_train; s < M; ++s)
        for (Eigen::Index i = 0; i < nodes; ++i) {
            std::vector<std::string> row{std::to_string(s), format_number(grid[static_cast<std::size_t>(i)]), format_number(data[s].Y(i))};
            for (std::size_t mi = 0; mi < methods.size(); ++mi) row.push_back(format_number(test_pred[mi][s - n_train](i)));
            rep.predictions.rows.push_back(std::move(row));
        }
    return rep;
}

void write_sde_dataset(const std::vector<VsdeSample>& data, const TimeGrid& grid, const std::string& dir, DatasetDump mode) {
    namespace fs = std::filesystem;
    if (mode == DatasetDump::none) return;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
    auto rows = [&](std::ostream& out, const VsdeSample& s, const std::string& prefix) {
        for (std::size_t i = 0; i < grid.nodes(); ++i) {
            const auto I = static_cast<Eigen::Index>(i);
            out << prefix << format_number(grid[i]) << ',' << format_number(s.B(I)) << ',' << format_number(s.Y(I)) << '\n';
        }
    };
    if (mode == DatasetDump::wide) {
        const fs::path file = fs::path(dir) / "dataset.csv";
        std::ofstream out(file, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + file.string());
        out << "sample,t,B,Y\n";
        for (std::size_t s = 0; s < data.size(); ++s) rows(out, data[s], std::to_string(s) + ",");
        return;
    }
    const fs::path sub = fs::path(dir) / "dataset";
    fs::create_directories(sub, ec);
    if (ec) throw std::runtime_error("cannot create " + sub.string() + ": " + ec.message());
    for (std::size_t s = 0; s < data.size(); ++s) {
        char name[32];
        std::snprintf(name, sizeof name, "sample_%05zu.csv", s);
        std::ofstream out(sub / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (sub / name).string());
        out << "t,B,Y\n";
        rows(out, data[s], "");
    }
}

}  // namespace vsig
