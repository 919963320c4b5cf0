#pragma once

// Command-line surface: fit, simulate, qq and diagnose.
//
// Exit codes:
//   0 success
//   2 usage error (bad flags or option values)
//   3 input error (unreadable or malformed file, invalid panel)
//   4 degenerate design (log means do not vary enough)
//   5 singular Gamma_hat
//   6 invalid residuals (diagnose)
//   7 other numerical domain error

#include <cstdint>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tlaw/asymptotics.hpp"
#include "tlaw/diagnostics.hpp"
#include "tlaw/error.hpp"
#include "tlaw/estimator.hpp"
#include "tlaw/io.hpp"
#include "tlaw/panel.hpp"
#include "tlaw/simulation.hpp"
#include "tlaw/version.hpp"

namespace tlaw::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 2,
    exit_input = 3,
    exit_degenerate_design = 4,
    exit_singular_gamma = 5,
    exit_invalid_residuals = 6,
    exit_domain = 7,
};

inline int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::usage: return exit_usage;
        case ErrorCode::parse:
        case ErrorCode::invalid_panel: return exit_input;
        case ErrorCode::degenerate_design: return exit_degenerate_design;
        case ErrorCode::singular_gamma: return exit_singular_gamma;
        case ErrorCode::invalid_residuals: return exit_invalid_residuals;
        case ErrorCode::domain: return exit_domain;
    }
    return exit_domain;
}

using json = nlohmann::ordered_json;

namespace detail {

struct InputFlags {
    std::string input;
    std::string layout = "wide";
    std::string delimiter = ",";
    bool no_header = false;

    DatasetFile dataset() const {
        if (delimiter.size() != 1)
            throw Error(ErrorCode::usage, "--delimiter must be a single character");
        return {input, layout == "long" ? Layout::long_format : Layout::wide, delimiter[0],
                !no_header};
    }
};

inline void add_input_flags(CLI::App* cmd, InputFlags& f) {
    cmd->add_option("--input", f.input, "panel CSV file")->required();
    cmd->add_option("--layout", f.layout, "wide (rows = sites) or long (site,time,value)")
        ->check(CLI::IsMember({"wide", "long"}))
        ->capture_default_str();
    cmd->add_option("--delimiter", f.delimiter, "field delimiter")->capture_default_str();
    cmd->add_flag("--no-header", f.no_header, "input has no header row");
}

struct FitFlags {
    InputFlags in;
    std::string axis = "spatial";
    double alpha = 0.05;
    std::string variance = "biased";
    std::string rescale = "none";
    std::string bias_correction = "on";
    std::string degenerate_times = "keep";
    std::string format = "json";
    std::string out;
};

struct DgpFlags {
    std::string dgp = "poisson";
    double p = 0.5;
    std::string profile = "exp_cos";
    std::vector<double> lambdas;

    DgpSpec spec() const {
        static const std::map<std::string, DgpKind> kinds = {
            {"poisson", DgpKind::poisson},
            {"chisq1", DgpKind::chisq1},
            {"poisson_mixture", DgpKind::poisson_mixture},
            {"zero_inflated_chisq1", DgpKind::zero_inflated_chisq1},
            {"exact_tl", DgpKind::exact_tl}};
        static const std::map<std::string, LambdaProfile> profiles = {
            {"exp_cos", LambdaProfile::exp_cos},
            {"three_plus_cos", LambdaProfile::three_plus_cos},
            {"custom", LambdaProfile::custom}};
        DgpSpec s;
        s.kind = kinds.at(dgp);
        s.profile = profiles.at(profile);
        s.custom_lambdas = lambdas;
        s.p = (s.kind == DgpKind::zero_inflated_chisq1) ? p : 1.0;
        if (s.profile == LambdaProfile::custom && lambdas.empty())
            throw Error(ErrorCode::usage, "--profile custom requires --lambdas");
        try {
            s.validate();
        } catch (const Error& e) {
            throw Error(ErrorCode::usage, e.what());
        }
        return s;
    }
};

inline void add_dgp_flags(CLI::App* cmd, DgpFlags& f) {
    cmd->add_option("--dgp", f.dgp, "data-generating process")
        ->check(CLI::IsMember(
            {"poisson", "chisq1", "poisson_mixture", "zero_inflated_chisq1", "exact_tl"}))
        ->capture_default_str();
    cmd->add_option("--p", f.p, "retention probability for zero_inflated_chisq1")
        ->capture_default_str();
    cmd->add_option("--profile", f.profile, "lambda_t profile")
        ->check(CLI::IsMember({"exp_cos", "three_plus_cos", "custom"}))
        ->capture_default_str();
    cmd->add_option("--lambdas", f.lambdas, "custom lambda_t values (cycled over t)")
        ->delimiter(',');
}

inline json dgp_json(const DgpSpec& s) {
    json j;
    j["kind"] = to_string(s.kind);
    j["profile"] = to_string(s.profile);
    if (s.profile == LambdaProfile::custom) j["lambdas"] = s.custom_lambdas;
    if (s.kind == DgpKind::zero_inflated_chisq1) j["p"] = s.p;
    const auto [alpha, beta] = dgp_true_params(s);
    j["true_alpha"] = alpha;
    j["true_beta"] = beta;
    return j;
}

inline void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty())
        out << content;
    else
        write_file_atomic(path, content);
}

inline std::string provenance_comment(const std::string& command, const json& flags) {
    return "# tool=tlaw version=" + std::string(version) + " command=" + command + "\n# flags=" +
           flags.dump() + "\n";
}

inline json interval_json(const Interval& i) { return json::array({i.lower, i.upper}); }

inline json sym_json(const SymMatrix2& m) {
    return json{{"a11", m.a11}, {"a12", m.a12}, {"a22", m.a22}};
}

inline std::vector<GridCell> parse_grid(const std::string& text) {
    std::vector<GridCell> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto x = item.find('x');
        if (x == std::string::npos)
            throw Error(ErrorCode::usage, "grid cell '" + item + "' is not of the form NxT");
        try {
            const long n = std::stol(item.substr(0, x));
            const long t = std::stol(item.substr(x + 1));
            if (n < 2 || t < 2) throw Error(ErrorCode::usage, "grid cells need n >= 2 and T >= 2");
            grid.push_back({static_cast<std::size_t>(n), static_cast<std::size_t>(t)});
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::usage, "grid cell '" + item + "' is not of the form NxT");
        }
    }
    if (grid.empty()) throw Error(ErrorCode::usage, "empty --grid");
    return grid;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

inline int run_fit(const FitFlags& f, std::ostream& out) {
    const DatasetFile file = f.in.dataset();
    const std::string bytes = read_file(file.path);
    Panel panel = parse_csv(bytes, file.layout, file.delimiter, file.header);

    const bool temporal = f.axis == "temporal";
    if (temporal) panel = transpose_axis(panel);
    double rescale_divisor = 1.0;
    if (f.rescale == "grand_mean") {
        rescale_divisor = grand_mean(panel);
        panel = rescale_panel(panel, RescaleMode::grand_mean);
    }

    FitOptions opts;
    opts.variance = f.variance == "unbiased" ? VarianceMode::unbiased : VarianceMode::biased;
    opts.degenerate = f.degenerate_times == "drop" ? DegenerateTimes::drop : DegenerateTimes::keep;
    const bool correction = f.bias_correction == "on";
    const PanelInference inf = infer(panel, opts, f.alpha, correction);
    const TLFit& fit = inf.fit;
    const AsymptoticReport& a = inf.asymptotic;

    json warnings = json::array();
    if (fit.design.zero_mean_count > 0 || fit.design.zero_var_count > 0)
        warnings.push_back(std::to_string(fit.design.zero_mean_count) + " time(s) with zero mean and " +
                           std::to_string(fit.design.zero_var_count) + " with zero variance (" +
                           (opts.degenerate == DegenerateTimes::keep ? "logs replaced by 0"
                                                                     : "times dropped") +
                           ")");
    if (a.skipped_times > 0)
        warnings.push_back(std::to_string(a.skipped_times) +
                           " time(s) excluded from Gamma_hat and E_hat");

    json conventional = nullptr;
    ConventionalCi conv;
    bool have_conv = false;
    try {
        conv = conventional_ci(inf.summaries, fit, f.alpha);
        have_conv = true;
        if (conv.degenerate)
            warnings.push_back("conventional regression: zero residual sum of squares, "
                               "intervals have zero width");
        conventional = json{{"theta1", interval_json(conv.intercept)},
                            {"beta", interval_json(conv.slope)},
                            {"rss", conv.rss},
                            {"dof", conv.dof},
                            {"degenerate", conv.degenerate}};
    } catch (const Error& e) {
        warnings.push_back(std::string("conventional regression unavailable: ") + e.what());
    }

    const json flags = {{"input", f.in.input},
                        {"layout", f.in.layout},
                        {"delimiter", f.in.delimiter},
                        {"header", !f.in.no_header},
                        {"axis", f.axis},
                        {"alpha", f.alpha},
                        {"variance", f.variance},
                        {"rescale", f.rescale},
                        {"bias_correction", f.bias_correction},
                        {"degenerate_times", f.degenerate_times},
                        {"format", f.format}};

    if (f.format == "csv") {
        std::string s = provenance_comment("fit", flags);
        s += "# input_fnv1a64=" + fnv1a64_hex(bytes) + "\n";
        s += "parameter,estimate,lower_uncorrected,upper_uncorrected,lower_corrected,"
             "upper_corrected,lower_conventional,upper_conventional\n";
        const char* names[2] = {"theta1", "beta"};
        for (int i = 0; i < 2; ++i) {
            const Interval cv = !have_conv ? Interval{std::nan(""), std::nan("")}
                                           : (i == 0 ? conv.intercept : conv.slope);
            s += std::string(names[i]) + "," + format_double(fit.theta()[i]) + "," +
                 format_double(a.intervals_uncorrected[i].lower) + "," +
                 format_double(a.intervals_uncorrected[i].upper) + "," +
                 format_double(a.intervals_corrected[i].lower) + "," +
                 format_double(a.intervals_corrected[i].upper) + "," + format_double(cv.lower) +
                 "," + format_double(cv.upper) + "\n";
        }
        emit(f.out, s, out);
        return exit_ok;
    }

    json doc;
    doc["tool"] = "tlaw";
    doc["version"] = version;
    doc["command"] = "fit";
    doc["provenance"] = {{"input_fnv1a64", fnv1a64_hex(bytes)}, {"seed", nullptr}, {"flags", flags}};
    doc["data"] = {{"n_sites", panel.n_sites()},
                   {"n_times", panel.n_times()},
                   {"axis", f.axis},
                   {"rescale_divisor", rescale_divisor}};
    doc["fit"] = {{"theta1", fit.theta1},
                  {"beta", fit.theta2},
                  {"alpha_hat", fit.alpha_hat},
                  {"D", sym_json(fit.design.D)},
                  {"N", fit.design.N},
                  {"T_total", fit.design.T_total},
                  {"T_used", fit.design.T_used},
                  {"zero_mean_count", fit.design.zero_mean_count},
                  {"zero_var_count", fit.design.zero_var_count},
                  {"variance_mode", to_string(fit.variance_mode)},
                  {"degenerate_times", to_string(fit.degenerate_mode)}};
    doc["asymptotic"] = {
        {"primary", correction ? "corrected" : "uncorrected"},
        {"alpha", a.alpha},
        {"quantile", a.quantile},
        {"n", a.n},
        {"T", a.T},
        {"gamma_hat", sym_json(a.gamma_hat)},
        {"c_hat", sym_json(a.c_hat)},
        {"e_hat", a.e_hat},
        {"h_n", sym_json(a.h_n)},
        {"m_n", a.m_n},
        {"min_eigen_gamma", a.min_eigen_gamma},
        {"used_times", a.used_times},
        {"skipped_times", a.skipped_times},
        {"theta1",
         {{"corrected", interval_json(a.intervals_corrected[0])},
          {"uncorrected", interval_json(a.intervals_uncorrected[0])}}},
        {"beta",
         {{"corrected", interval_json(a.intervals_corrected[1])},
          {"uncorrected", interval_json(a.intervals_uncorrected[1])}}}};
    doc["conventional"] = conventional;
    doc["warnings"] = warnings;
    emit(f.out, doc.dump(2) + "\n", out);
    return exit_ok;
}

// ---------------------------------------------------------------------------
// simulate / qq
// ---------------------------------------------------------------------------

struct SimulateFlags {
    DgpFlags dgp;
    std::string grid = "25x50,50x50,100x50,200x50";
    int reps = 100;
    std::uint64_t seed = 1;
    std::string out;
};

inline int run_simulate(const SimulateFlags& f, std::ostream& out) {
    const DgpSpec spec = f.dgp.spec();
    const auto grid = parse_grid(f.grid);
    const McResult r = rmse_experiment(spec, grid, f.reps, f.seed);
    const json flags = {{"dgp", dgp_json(spec)}, {"grid", f.grid}, {"reps", f.reps},
                        {"seed", f.seed}};
    std::string s = provenance_comment("simulate", flags);
    s += "n,T,replicates,rmse_beta,rmse_theta1,failures\n";
    for (const auto& c : r.grid)
        s += std::to_string(c.n) + "," + std::to_string(c.T) + "," + std::to_string(c.replicates) +
             "," + format_double(c.rmse_beta) + "," + format_double(c.rmse_theta1) + "," +
             std::to_string(c.failures) + "\n";
    emit(f.out, s, out);
    return exit_ok;
}

struct QqFlags {
    DgpFlags dgp;
    std::size_t n = 100;
    std::size_t t = 100;
    int reps = 1000;
    std::uint64_t seed = 1;
    std::string out;
};

inline int run_qq(const QqFlags& f, std::ostream& out) {
    const DgpSpec spec = f.dgp.spec();
    const QqSample q = qq_experiment(spec, f.n, f.t, f.reps, f.seed);
    const json flags = {{"dgp", dgp_json(spec)}, {"n", f.n}, {"t", f.t}, {"reps", f.reps},
                        {"seed", f.seed}};
    std::string s = provenance_comment("qq", flags);
    s += "# failures=" + std::to_string(q.failures) + "\n";
    s += "rep,stat1_nc,stat2_nc,stat1_c,stat2_c,normal_quantile\n";
    for (std::size_t i = 0; i < q.corrected.size(); ++i)
        s += std::to_string(q.replicate[i]) + "," + format_double(q.uncorrected[i][0]) + "," +
             format_double(q.uncorrected[i][1]) + "," + format_double(q.corrected[i][0]) + "," +
             format_double(q.corrected[i][1]) + "," + format_double(q.theoretical_quantiles[i]) +
             "\n";
    emit(f.out, s, out);
    return exit_ok;
}

// ---------------------------------------------------------------------------
// diagnose
// ---------------------------------------------------------------------------

struct DiagnoseFlags {
    InputFlags in;
    int lags = 3;
    double alpha = 0.05;
    std::uint64_t max_pairs = 20000;
    std::uint64_t seed = 0;
    std::string out;
};

inline int run_diagnose(const DiagnoseFlags& f, std::ostream& out) {
    const DatasetFile file = f.in.dataset();
    const std::string bytes = read_file(file.path);
    const Panel panel = parse_csv(bytes, file.layout, file.delimiter, file.header);
    const ResidualPanel res = residual_panel(panel);
    const CorrelationReport temporal = temporal_independence_report(res, f.lags, f.alpha);
    const CorrelationReport spatial = spatial_independence_report(res, f.alpha, f.max_pairs, f.seed);

    const json flags = {{"input", f.in.input}, {"layout", f.in.layout},
                        {"delimiter", f.in.delimiter}, {"header", !f.in.no_header},
                        {"lags", f.lags}, {"alpha", f.alpha}, {"max_pairs", f.max_pairs},
                        {"seed", f.seed}};
    std::string s = provenance_comment("diagnose", flags);
    s += "# input_fnv1a64=" + fnv1a64_hex(bytes) + "\n";
    s += "# residual sampling error in the column mean and sd is neglected\n";
    s += "test,lag,alpha,coverage_pct,tested,excluded,pairs_tested,valid_times\n";
    for (const auto& lc : temporal.per_lag_coverage)
        s += "temporal," + std::to_string(lc.lag) + "," + format_double(f.alpha) + "," +
             format_double(lc.coverage) + "," + std::to_string(lc.tested) + "," +
             std::to_string(lc.excluded) + ",," + std::to_string(temporal.valid_times) + "\n";
    s += "spatial,," + format_double(f.alpha) + "," + format_double(spatial.spatial_coverage) +
         "," + std::to_string(spatial.pairs_tested - spatial.pairs_excluded) + "," +
         std::to_string(spatial.pairs_excluded) + "," + std::to_string(spatial.pairs_tested) +
         "," + std::to_string(spatial.valid_times) + "\n";
    emit(f.out, s, out);
    return exit_ok;
}

} // namespace detail

// Entry point shared by the executable and the tests.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Taylor's power law estimation and inference for abundance panels", "tlaw"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version));

    detail::FitFlags fit;
    auto* fit_cmd = app.add_subcommand("fit", "fit the power law and compute confidence intervals");
    detail::add_input_flags(fit_cmd, fit.in);
    fit_cmd->add_option("--axis", fit.axis, "spatial (moments across sites) or temporal")
        ->check(CLI::IsMember({"spatial", "temporal"}))
        ->capture_default_str();
    fit_cmd->add_option("--alpha", fit.alpha, "1 - confidence level")
        ->check(CLI::Range(1e-12, 1.0 - 1e-12))
        ->capture_default_str();
    fit_cmd->add_option("--variance", fit.variance, "sample variance normalization")
        ->check(CLI::IsMember({"biased", "unbiased"}))
        ->capture_default_str();
    fit_cmd->add_option("--rescale", fit.rescale, "divide by the grand mean before fitting")
        ->check(CLI::IsMember({"grand_mean", "none"}))
        ->capture_default_str();
    fit_cmd->add_option("--bias-correction", fit.bias_correction, "primary interval family")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    fit_cmd->add_option("--degenerate-times", fit.degenerate_times,
                        "keep (log of zero -> 0) or drop times with zero mean or variance")
        ->check(CLI::IsMember({"keep", "drop"}))
        ->capture_default_str();
    fit_cmd->add_option("--format", fit.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    fit_cmd->add_option("--out", fit.out, "output file (default: stdout)");

    detail::SimulateFlags sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo RMSE of the fit over an (n, T) grid");
    detail::add_dgp_flags(sim_cmd, sim.dgp);
    sim_cmd->add_option("--grid", sim.grid, "comma-separated NxT cells, e.g. 25x50,50x50")
        ->capture_default_str();
    sim_cmd->add_option("--reps", sim.reps, "replicates per cell")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sim_cmd->add_option("--seed", sim.seed, "master seed")->capture_default_str();
    sim_cmd->add_option("--out", sim.out, "output CSV (default: stdout)");

    detail::QqFlags qq;
    auto* qq_cmd = app.add_subcommand("qq", "normalized statistics for quantile-quantile plots");
    detail::add_dgp_flags(qq_cmd, qq.dgp);
    qq_cmd->add_option("--n", qq.n, "number of sites")->check(CLI::Range(2, 1 << 30))->capture_default_str();
    qq_cmd->add_option("--t", qq.t, "number of times")->check(CLI::Range(2, 1 << 30))->capture_default_str();
    qq_cmd->add_option("--reps", qq.reps, "replicates")->check(CLI::Range(2, 1 << 30))->capture_default_str();
    qq_cmd->add_option("--seed", qq.seed, "master seed")->capture_default_str();
    qq_cmd->add_option("--out", qq.out, "output CSV (default: stdout)");

    detail::DiagnoseFlags diag;
    auto* diag_cmd = app.add_subcommand("diagnose", "residual independence diagnostics");
    detail::add_input_flags(diag_cmd, diag.in);
    diag_cmd->add_option("--lags", diag.lags, "largest autocorrelation lag")
        ->check(CLI::Range(1, 1 << 20))
        ->capture_default_str();
    diag_cmd->add_option("--alpha", diag.alpha, "1 - confidence level")
        ->check(CLI::Range(1e-12, 1.0 - 1e-12))
        ->capture_default_str();
    diag_cmd->add_option("--max-pairs", diag.max_pairs, "site pairs tested at most")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    diag_cmd->add_option("--seed", diag.seed, "seed for pair subsampling")->capture_default_str();
    diag_cmd->add_option("--out", diag.out, "output CSV (default: stdout)");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("tlaw");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return exit_usage;
    }

    try {
        if (fit_cmd->parsed()) return detail::run_fit(fit, out);
        if (sim_cmd->parsed()) return detail::run_simulate(sim, out);
        if (qq_cmd->parsed()) return detail::run_qq(qq, out);
        if (diag_cmd->parsed()) return detail::run_diagnose(diag, out);
    } catch (const Error& e) {
        err << "error[" << to_string(e.code()) << "]: " << e.what() << "\n";
        return exit_code_for(e.code());
    }
    return exit_usage;
}

} // namespace tlaw::cli
