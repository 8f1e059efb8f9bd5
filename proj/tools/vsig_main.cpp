#include "vsig/engine.hpp"
#include "vsig/errors.hpp"
#include "vsig/experiments.hpp"
#include "vsig/sig_kernel.hpp"
#include "vsig/statespace.hpp"
#include "vsig/tensor_io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace vsig;

namespace {

constexpr int exit_config = 2;
constexpr int exit_data = 3;

nlohmann::json read_kernel_arg(const std::string& arg) {
    if (!arg.empty() && arg.front() == '{') {
        try {
            return nlohmann::json::parse(arg);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(std::string("invalid inline kernel JSON: ") + e.what());
        }
    }
    return load_config_file(arg);
}

QuadratureRule parse_rule(const std::string& s) {
    if (s == "left") return QuadratureRule::left;
    if (s == "trapezoid") return QuadratureRule::trapezoid;
    if (s == "product_integration") return QuadratureRule::product_integration;
    throw ConfigError("unknown quadrature rule \"" + s + "\"");
}

/// Writes to the named file, or stdout for "" or "-".
void write_output(const std::string& file, const std::string& text) {
    if (file.empty() || file == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file);
    out << text;
}

struct SigArgs {
    std::string path, kernel = R"({"type":"constant"})", rule = "trapezoid", engine = "general", out;
    int level = 3;
    int refine = 1;
    bool all_nodes = false;
};

int run_sig(const SigArgs& a) {
    if (a.refine < 1) throw ConfigError("refine must be at least 1");
    const Path path = refine(read_path_csv(a.path), a.refine);
    const Kernel kernel = kernel_from_json(read_kernel_arg(a.kernel), path.dim());
    if (kernel.cols() != path.dim()) throw ConfigError("kernel input dimension does not match the path");
    if (a.level < 0) throw ConfigError("level must be non-negative");
    DiagonalSignatureField field = [&] {
        if (a.engine == "lift") return lift_solve(path, kernel, a.level).diagonal();
        if (a.engine == "general") return diagonal_signature(path, kernel, a.level, {parse_rule(a.rule), 1});
        throw ConfigError("engine must be general or lift");
    }();
    if (!a.all_nodes) {
        write_output(a.out, to_json(field.terminal()).dump(2) + "\n");
        return 0;
    }
    std::ostringstream s;
    const auto labels = feature_labels(field.alphabet(), field.depth());
    s << "t";
    for (const auto& l : labels) s << ",\"" << l << '"';
    s << '\n';
    const Eigen::MatrixXd F = field.features();
    for (Eigen::Index i = 0; i < F.rows(); ++i) {
        s << format_number(field.grid()[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < F.cols(); ++j) s << ',' << format_number(F(i, j));
        s << '\n';
    }
    write_output(a.out, s.str());
    return 0;
}

struct GramArgs {
    std::vector<std::string> paths;
    std::string kernel = R"({"type":"constant"})", engine = "integral", rule = "trapezoid", out;
    int level = 6;
    int refine = 1;
};

int run_gram(const GramArgs& a) {
    std::vector<Path> paths;
    if (a.refine < 1) throw ConfigError("refine must be at least 1");
    for (const auto& f : a.paths) paths.push_back(refine(read_path_csv(f), a.refine));
    const Kernel kernel = kernel_from_json(read_kernel_arg(a.kernel), paths.front().dim());
    GramEngine engine;
    if (a.engine == "integral") engine = GramEngine::integral;
    else if (a.engine == "pde") engine = GramEngine::pde;
    else if (a.engine == "truncated") engine = GramEngine::truncated;
    else throw ConfigError("engine must be integral, pde or truncated");
    const Eigen::MatrixXd G = gram_matrix(paths, kernel, engine, a.level, {parse_rule(a.rule), 1});
    std::ostringstream s;
    for (Eigen::Index i = 0; i < G.rows(); ++i) {
        for (Eigen::Index j = 0; j < G.cols(); ++j) s << (j ? "," : "") << format_number(G(i, j));
        s << '\n';
    }
    write_output(a.out, s.str());
    std::cerr << "psd margin (min eigenvalue / trace): " << psd_margin(G) << '\n';
    return 0;
}

struct ExperimentArgs {
    std::string config, data, output;
    bool no_timestamp = false;
};

int run_sde(const ExperimentArgs& a) {
    SdeConfig cfg = parse_sde_config(load_config_file(a.config));
    if (!a.output.empty()) cfg.output_dir = a.output;
    const auto data = simulate_linear_vsde(cfg.sim);
    write_sde_dataset(data, cfg.sim.grid, cfg.output_dir, cfg.dump);
    const Report rep = run_sde_experiment(cfg, data);
    emit_report(rep, cfg.output_dir, a.no_timestamp ? "" : utc_timestamp());
    for (const auto& r : rep.table.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) std::cout << (i ? "  " : "") << r[i];
        std::cout << '\n';
    }
    return 0;
}

int run_volforecast(const ExperimentArgs& a) {
    VolConfig cfg = parse_vol_config(load_config_file(a.config));
    if (!a.output.empty()) cfg.output_dir = a.output;
    if (!a.data.empty()) {
        cfg.data = a.data;
        cfg.synthetic = false;
    }
    const Report rep = run_vol_forecast(cfg);
    emit_report(rep, cfg.output_dir, a.no_timestamp ? "" : utc_timestamp());
    std::cout << "q  p  Sig/VSig/HAR test R2\n";
    for (const auto& r : rep.table.rows) std::cout << r[0] << "  " << r[1] << "  " << r[2] << " / " << r[3] << " / " << r[4] << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Volterra signatures: features, signature kernels and experiment drivers"};
    app.require_subcommand(1);

    SigArgs sig;
    auto* sig_cmd = app.add_subcommand("sig", "Diagonal Volterra signature of a path");
    sig_cmd->add_option("--path", sig.path, "CSV with a t column and one column per channel")->required();
    sig_cmd->add_option("--kernel", sig.kernel, "kernel JSON file or inline JSON object");
    sig_cmd->add_option("-L,--level", sig.level, "truncation level");
    sig_cmd->add_option("--quadrature", sig.rule, "left, trapezoid or product_integration");
    sig_cmd->add_option("--engine", sig.engine, "general or lift");
    sig_cmd->add_option("--refine", sig.refine, "split every segment into this many pieces first");
    sig_cmd->add_flag("--all-nodes", sig.all_nodes, "emit a CSV row per grid node instead of the terminal JSON");
    sig_cmd->add_option("-o,--out", sig.out, "output file (default stdout)");

    GramArgs gram;
    auto* gram_cmd = app.add_subcommand("gram", "Signature-kernel Gram matrix of several paths");
    gram_cmd->add_option("--paths", gram.paths, "path CSV files")->required()->expected(1, -1);
    gram_cmd->add_option("--kernel", gram.kernel, "kernel JSON file or inline JSON object");
    gram_cmd->add_option("--engine", gram.engine, "integral, pde or truncated");
    gram_cmd->add_option("-L,--level", gram.level, "truncation level for the truncated engine");
    gram_cmd->add_option("--quadrature", gram.rule, "left, trapezoid or product_integration");
    gram_cmd->add_option("--refine", gram.refine, "split every segment into this many pieces first");
    gram_cmd->add_option("-o,--out", gram.out, "output CSV (default stdout)");

    ExperimentArgs sde;
    auto* sde_cmd = app.add_subcommand("sde", "Learn the solution map of a linear Volterra SDE");
    sde_cmd->add_option("--config", sde.config, "JSON config")->required();
    sde_cmd->add_option("--output", sde.output, "output directory (overrides the config)");
    sde_cmd->add_flag("--no-timestamp", sde.no_timestamp, "omit the timestamp from report.json");

    ExperimentArgs vol;
    auto* vol_cmd = app.add_subcommand("volforecast", "Realized volatility forecasting");
    vol_cmd->add_option("--config", vol.config, "JSON config")->required();
    vol_cmd->add_option("--data", vol.data, "realized volatility CSV (overrides the config)");
    vol_cmd->add_option("--output", vol.output, "output directory (overrides the config)");
    vol_cmd->add_flag("--no-timestamp", vol.no_timestamp, "omit the timestamp from report.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config;
    }

    try {
        if (*sig_cmd) return run_sig(sig);
        if (*gram_cmd) return run_gram(gram);
        if (*sde_cmd) return run_sde(sde);
        if (*vol_cmd) return run_volforecast(vol);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return exit_data;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
