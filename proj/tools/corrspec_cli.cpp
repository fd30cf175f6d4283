// Command-line pipelines over the corrspec library: simulation, spectral
// solving, MP fitting, panel estimation, cluster filtering, bootstrap and
// statistical testing. Every subcommand is a pure function of
// (config, seed): re-runs emit byte-identical reports.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "corrspec/corrspec.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace corrspec;

namespace {

struct GlobalOpts {
    std::uint64_t seed = 0;
    std::string out = ".";
    unsigned threads = 1;
};

void add_global_opts(CLI::App* cmd, GlobalOpts& g) {
    cmd->add_option("--seed", g.seed, "master RNG seed");
    cmd->add_option("--out", g.out, "output directory");
    cmd->add_option("--threads", g.threads, "worker thread count")->check(CLI::Range(1u, 64u));
}

json report_skeleton(const std::string& command, const GlobalOpts& g, json config_echo) {
    json rep;
    rep["schema_version"] = 1;
    rep["library"] = "corrspec";
    rep["version"] = corrspec::version;
    rep["command"] = command;
    rep["seed"] = g.seed;
    rep["config"] = std::move(config_echo);   // thread count deliberately omitted: reruns at any parallelism must byte-match
    return rep;
}

void write_report(const GlobalOpts& g, const json& rep) {
    fs::create_directories(g.out);
    std::ofstream out(fs::path(g.out) / "report.json");
    if (!out) throw std::runtime_error("cannot write report.json under '" + g.out + "'");
    out << rep.dump(2) << '\n';
}

// ---- model flags shared by simulate / theory-spectrum -------------------

struct ModelOpts {
    Eigen::Index n = 0;
    Eigen::Index t = 0;
    std::vector<Eigen::Index> cluster_sizes;
    std::vector<double> cluster_gammas;
    std::vector<double> cluster_rhos;
    double gamma_n = 0.0;
};

void add_model_opts(CLI::App* cmd, ModelOpts& m) {
    cmd->add_option("--n", m.n, "asset count N")->required();
    cmd->add_option("--t", m.t, "observation count T")->required();
    cmd->add_option("--cluster-size", m.cluster_sizes, "cluster sizes N_k");
    cmd->add_option("--cluster-gamma", m.cluster_gammas, "cluster couplings gamma_k");
    cmd->add_option("--cluster-rho", m.cluster_rhos,
                    "cluster intra-correlations rho_k (alternative to --cluster-gamma)");
    cmd->add_option("--gamma-n", m.gamma_n, "common-mode coupling gamma_N");
}

FactorModelConfig to_config(const ModelOpts& m, std::uint64_t seed) {
    if (!m.cluster_gammas.empty() && !m.cluster_rhos.empty())
        throw std::invalid_argument("give either --cluster-gamma or --cluster-rho, not both");
    FactorModelConfig cfg;
    cfg.n_assets = m.n;
    cfg.n_obs = m.t;
    cfg.common_mode = m.gamma_n;
    cfg.seed = seed;
    if (!m.cluster_rhos.empty()) {
        if (m.gamma_n != 0.0)
            throw std::invalid_argument("--cluster-rho requires --gamma-n 0");
        if (m.cluster_rhos.size() != m.cluster_sizes.size())
            throw std::invalid_argument("--cluster-rho count must match --cluster-size");
        BlockModel block;
        for (std::size_t k = 0; k < m.cluster_sizes.size(); ++k)
            block.clusters.push_back({m.cluster_sizes[k], m.cluster_rhos[k]});
        block.n_background = 0;
        FactorModelConfig from_block = config_for_block(block, m.t, seed);
        cfg.clusters = from_block.clusters;
    } else {
        if (m.cluster_gammas.size() != m.cluster_sizes.size())
            throw std::invalid_argument("--cluster-gamma count must match --cluster-size");
        for (std::size_t k = 0; k < m.cluster_sizes.size(); ++k)
            cfg.clusters.push_back({m.cluster_sizes[k], m.cluster_gammas[k]});
    }
    return cfg;
}

json model_echo(const ModelOpts& m) {
    json j;
    j["n"] = m.n;
    j["t"] = m.t;
    j["cluster_sizes"] = m.cluster_sizes;
    if (!m.cluster_gammas.empty()) j["cluster_gammas"] = m.cluster_gammas;
    if (!m.cluster_rhos.empty()) j["cluster_rhos"] = m.cluster_rhos;
    j["gamma_n"] = m.gamma_n;
    return j;
}

json bulk_stats(const std::vector<double>& values, double gap) {
    json bulks = json::array();
    for (const auto& bulk : split_into_bulks(values, gap)) {
        double mean = 0.0;
        for (double v : bulk) mean += v;
        mean /= static_cast<double>(bulk.size());
        json b;
        b["count"] = bulk.size();
        b["min"] = bulk.front();
        b["max"] = bulk.back();
        b["mean"] = mean;
        bulks.push_back(std::move(b));
    }
    return bulks;
}

ReturnMatrix load_panel(const std::string& path, const std::string& kind) {
    if (kind == "prices") return returns_from_prices(ingest_prices(path));
    if (kind == "returns") return ingest_returns(path).first;
    throw std::invalid_argument("--kind must be 'prices' or 'returns'");
}

// ---- subcommands --------------------------------------------------------

int run_simulate(const GlobalOpts& g, const ModelOpts& m, int sims, std::size_t bins,
                 double bulk_gap, double bulk_cut) {
    std::vector<std::vector<double>> per_sim(static_cast<std::size_t>(sims));
    parallel_for_index(static_cast<std::size_t>(sims), g.threads, [&](std::size_t s) {
        FactorModelConfig cfg = to_config(m, derive_seed(g.seed, s));
        const auto decomp = sym_eigen(pearson_estimator(standardize(simulate(cfg))));
        per_sim[s] = decomp.eigenvalues;
    });

    std::vector<double> all;
    std::vector<double> largest;
    for (const auto& eigs : per_sim) {
        all.insert(all.end(), eigs.begin(), eigs.end());
        largest.push_back(eigs.back());
    }
    std::vector<double> bulk_sample;
    for (double v : all)
        if (bulk_cut <= 0.0 || v <= bulk_cut) bulk_sample.push_back(v);

    const auto [mn, mx] = std::minmax_element(bulk_sample.begin(), bulk_sample.end());
    const DensityCurve hist = histogram(bulk_sample, bins, std::max(0.0, *mn * 0.95), *mx * 1.05);

    write_eigs_csv(fs::path(g.out) / "eigs_sim.csv", all);
    write_density_csv(fs::path(g.out) / "density_sim.csv", hist);

    json config = model_echo(m);
    config["sims"] = sims;
    config["bins"] = bins;
    config["bulk_gap"] = bulk_gap;
    config["bulk_cut"] = bulk_cut;
    json rep = report_skeleton("simulate", g, std::move(config));
    rep["results"]["eigenvalue_count"] = all.size();
    rep["results"]["bulks"] = bulk_stats(bulk_sample, bulk_gap);
    json largest_json;
    if (largest.size() >= 2) {
        const auto [lmean, lsd] = normal_fit(largest);
        largest_json = {{"mean", lmean}, {"sd", lsd}, {"sample", largest}};
    } else {
        largest_json = {{"mean", largest.front()}, {"sample", largest}};
    }
    rep["results"]["largest_eigenvalue"] = std::move(largest_json);
    write_report(g, rep);
    return 0;
}

int run_theory_spectrum(const GlobalOpts& g, const ModelOpts& m, bool strong) {
    FactorModelConfig cfg = to_config(m, g.seed);

    json rep = report_skeleton("theory-spectrum", g, model_echo(m));
    json entries = json::array();
    std::vector<double> flat;
    if (strong) {
        const AnalyticSpectrum spec = analytic_spectrum_strong_clusters(cfg);
        for (const auto& [lam, mult] : spec.entries) {
            entries.push_back({{"eigenvalue", lam}, {"multiplicity", mult}});
            for (Eigen::Index i = 0; i < mult; ++i) flat.push_back(lam);
        }
    } else {
        const auto decomp = sym_eigen(theoretical_correlation(cfg));
        flat = decomp.eigenvalues;
        for (double v : flat) entries.push_back({{"eigenvalue", v}, {"multiplicity", 1}});
    }
    write_eigs_csv(fs::path(g.out) / "eigs_theory.csv", flat);
    rep["config"]["strong_limit"] = strong;
    rep["results"]["spectrum"] = std::move(entries);
    write_report(g, rep);
    return 0;
}

int run_solve_density(const GlobalOpts& g, const std::vector<double>& lambdas,
                      const std::vector<double>& weights, double q, double epsilon,
                      double grid_min, double grid_max, std::size_t grid_points) {
    if (lambdas.size() != weights.size())
        throw std::invalid_argument("--lambda and --weight counts must match");
    DegenerateSpectrum spec;
    for (std::size_t i = 0; i < lambdas.size(); ++i) spec.entries.emplace_back(lambdas[i], weights[i]);
    spec.validate();

    SolverConfig cfg;
    cfg.epsilon = epsilon;
    cfg.auto_grid_points = grid_points;
    if (grid_min > 0.0 && grid_max > grid_min) {
        cfg.grid.resize(grid_points);
        for (std::size_t i = 0; i < grid_points; ++i)
            cfg.grid[i] = grid_min + (grid_max - grid_min) * static_cast<double>(i) /
                                         static_cast<double>(grid_points - 1);
    }
    const DensityCurve curve = density_from_spectrum(spec, q, cfg);
    write_density_csv(fs::path(g.out) / "density_solved.csv", curve);

    json config;
    config["lambda"] = lambdas;
    config["weight"] = weights;
    config["q"] = q;
    config["epsilon"] = epsilon;
    config["grid_points"] = grid_points;
    if (!cfg.grid.empty()) {
        config["grid_min"] = grid_min;
        config["grid_max"] = grid_max;
    }
    json rep = report_skeleton("solve-density", g, std::move(config));
    rep["results"]["mass"] = curve.mass;
    rep["results"]["first_moment"] = curve.first_moment();
    json edges = json::array();
    for (const auto& [lo, hi] : curve.edges) edges.push_back({{"lower", lo}, {"upper", hi}});
    rep["results"]["support_edges"] = std::move(edges);
    write_report(g, rep);
    return 0;
}

int run_mp(const GlobalOpts& g, double q, double sigma, std::size_t grid_points) {
    const MPParams p{q, sigma};
    const auto [lo, hi] = mp_edges(p);
    DensityCurve curve;
    const double a = std::max(1e-6, lo * 0.9);
    const double b = hi * 1.1;
    curve.lambda.resize(grid_points);
    curve.rho.resize(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
        curve.lambda[i] = x;
        curve.rho[i] = mp_density(x, p);
    }
    curve.mass = trapezoid_mass(curve.lambda, curve.rho);
    curve.edges = detect_support_edges(curve.lambda, curve.rho);
    write_density_csv(fs::path(g.out) / "density_mp.csv", curve);

    json rep = report_skeleton("mp", g, {{"q", q}, {"sigma", sigma}, {"grid_points", grid_points}});
    rep["results"]["edges"] = {{"lower", lo}, {"upper", hi}};
    rep["results"]["mass"] = curve.mass;
    write_report(g, rep);
    return 0;
}

int run_fit_mp(const GlobalOpts& g, const std::string& input, double q0, double sigma0,
               std::size_t bins) {
    const auto values = read_values_csv(input);
    const MPFit fit = mp_fit(values, {q0, sigma0}, bins);
    json rep = report_skeleton("fit-mp", g,
                               {{"input", input}, {"q0", q0}, {"sigma0", sigma0}, {"bins", bins}});
    rep["results"]["q"] = fit.params.q;
    rep["results"]["sigma"] = fit.params.sigma;
    rep["results"]["residual"] = fit.residual;
    rep["results"]["converged"] = fit.converged;
    write_report(g, rep);
    return 0;
}

int run_estimate(const GlobalOpts& g, const std::string& input, const std::string& kind) {
    const ReturnMatrix r = load_panel(input, kind);
    const CorrelationEstimate c = pearson_estimator(standardize(r));
    const auto decomp = sym_eigen(c);
    write_eigs_csv(fs::path(g.out) / "eigs_est.csv", decomp.eigenvalues);

    json rep = report_skeleton("estimate", g, {{"input", input}, {"kind", kind}});
    rep["results"]["n"] = r.n_assets();
    rep["results"]["t"] = r.n_obs();
    rep["results"]["q"] = c.rect_ratio;
    const std::size_t top = std::min<std::size_t>(5, decomp.eigenvalues.size());
    json largest = json::array();
    for (std::size_t i = 0; i < top; ++i)
        largest.push_back(decomp.eigenvalues[decomp.eigenvalues.size() - 1 - i]);
    rep["results"]["largest"] = std::move(largest);
    write_report(g, rep);
    return 0;
}

ClusterPartition filter_panel(const CorrelationEstimate& c, const FilterThresholds& th,
                              Eigen::Index min_size, Eigen::Index max_size) {
    th.validate();
    const auto cluster = find_cluster(c, th.rho_U, min_size, max_size);
    if (!cluster)
        throw std::runtime_error("filter: no cluster of the requested size satisfies rho_U");
    ClusterPartition p;
    p.cluster_idx = *cluster;
    p.background_idx = find_background(c, *cluster, th.rho_D1, th.rho_D2);
    p.source_dim = c.dim();
    return p;
}

int run_filter(const GlobalOpts& g, const std::string& input, const std::string& kind,
               const FilterThresholds& th, Eigen::Index min_size, Eigen::Index max_size) {
    const ReturnMatrix r = load_panel(input, kind);
    const CorrelationEstimate c = pearson_estimator(standardize(r));
    const ClusterPartition p = filter_panel(c, th, min_size, max_size);
    const CorrelationEstimate assembled = assemble(c, p);
    const auto decomp = sym_eigen(assembled);
    write_eigs_csv(fs::path(g.out) / "eigs_filtered.csv", decomp.eigenvalues);

    json config{{"input", input},          {"kind", kind},   {"rho_u", th.rho_U},
                {"rho_d1", th.rho_D1},     {"rho_d2", th.rho_D2},
                {"min_size", min_size},    {"max_size", max_size}};
    json rep = report_skeleton("filter", g, std::move(config));
    rep["results"]["cluster"] = p.cluster_idx;
    rep["results"]["background"] = p.background_idx;
    rep["results"]["mean_rho"] = mean_rho(c, p.cluster_idx);
    rep["results"]["partition_valid"] = partition_is_valid(c, p, th);
    rep["results"]["largest_eigenvalue"] = decomp.eigenvalues.back();
    write_report(g, rep);
    return 0;
}

int run_bootstrap(const GlobalOpts& g, const std::string& input, const std::string& kind,
                  const FilterThresholds& th, Eigen::Index min_size, Eigen::Index max_size,
                  int iterations, Eigen::Index keep, bool do_reshuffle, std::size_t bins,
                  double hist_max, int large_eig_count, double lambda2, double bulk_gap) {
    const ReturnMatrix r = load_panel(input, kind);
    const CorrelationEstimate c = pearson_estimator(standardize(r));
    const ClusterPartition p = filter_panel(c, th, min_size, max_size);

    BootstrapSpec spec;
    spec.iterations = iterations;
    spec.keep_background =
        keep > 0 ? keep : static_cast<Eigen::Index>(p.background_idx.size());
    spec.reshuffle = do_reshuffle;
    spec.seed = g.seed;
    spec.hist_bins = bins;
    spec.hist_max = hist_max;
    const BootstrapResult boot = bootstrap_spectra(r, p, spec);

    std::vector<double> all;
    for (const auto& eigs : boot.eigenvalues) all.insert(all.end(), eigs.begin(), eigs.end());
    write_eigs_csv(fs::path(g.out) / "eigs_bootstrap.csv", all);
    write_density_csv(fs::path(g.out) / "density_bootstrap.csv", boot.aggregate);

    // theoretical overlay for the bootstrapped panel size
    const auto n_panel = static_cast<double>(p.cluster_idx.size()) +
                         static_cast<double>(spec.keep_background);
    const double q_eff = (n_panel - static_cast<double>(large_eig_count)) /
                         static_cast<double>(r.n_obs());
    const DegenerateSpectrum overlay = overlay_spectrum(p, c, large_eig_count, lambda2);
    const DensityCurve solved = density_from_spectrum(overlay, q_eff);
    write_density_csv(fs::path(g.out) / "density_overlay.csv", solved);

    std::vector<double> bulk_sample;
    for (double v : all)
        if (v <= hist_max) bulk_sample.push_back(v);

    json config{{"input", input},       {"kind", kind},         {"rho_u", th.rho_U},
                {"rho_d1", th.rho_D1},  {"rho_d2", th.rho_D2},  {"min_size", min_size},
                {"max_size", max_size}, {"iterations", iterations},
                {"keep", spec.keep_background}, {"reshuffle", do_reshuffle},
                {"bins", bins},         {"hist_max", hist_max},
                {"large_eig_count", large_eig_count}, {"lambda2", lambda2},
                {"bulk_gap", bulk_gap}};
    json rep = report_skeleton("bootstrap", g, std::move(config));
    rep["results"]["cluster"] = p.cluster_idx;
    rep["results"]["mean_rho"] = mean_rho(c, p.cluster_idx);
    rep["results"]["bulks"] = bulk_stats(bulk_sample, bulk_gap);
    json ov = json::array();
    for (const auto& [lam, w] : overlay.entries) ov.push_back({{"lambda", lam}, {"weight", w}});
    rep["results"]["overlay_spectrum"] = std::move(ov);
    rep["results"]["overlay_q"] = q_eff;
    write_report(g, rep);
    return 0;
}

int run_test(const GlobalOpts& g, const std::string& input, std::vector<std::string> which) {
    const auto values = read_values_csv(input);
    if (which.empty()) which = {"ks", "jb", "lilliefors"};
    const auto [mean, sd] = normal_fit(values);

    json rep = report_skeleton("test", g, {{"input", input}, {"tests", which}});
    json tests = json::array();
    for (const auto& name : which) {
        TestReport tr;
        if (name == "ks") {
            tr = ks_test(values, std::function<double(double)>([mean = mean, sd = sd](double x) {
                             return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
                         }));
        } else if (name == "jb") {
            tr = jarque_bera(values);
        } else if (name == "lilliefors") {
            tr = lilliefors(values);
        } else {
            throw std::invalid_argument("unknown test '" + name + "'");
        }
        json t;
        t["name"] = tr.test_name;
        t["statistic"] = tr.statistic;
        t["n"] = tr.sample_size;
        json cvs = json::array();
        for (const auto& [alpha, cv] : tr.critical_values)
            cvs.push_back({{"alpha", alpha}, {"cv", cv}, {"reject", tr.reject.at(alpha)}});
        t["decisions"] = std::move(cvs);
        tests.push_back(std::move(t));
    }
    rep["results"]["normal_fit"] = {{"mean", mean}, {"sd", sd}};
    rep["results"]["tests"] = std::move(tests);
    write_report(g, rep);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"correlation-matrix spectra toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file with [section] headers");

    GlobalOpts g;

    // simulate
    auto* sim = app.add_subcommand("simulate", "simulate a factor model and emit sample spectra");
    ModelOpts sim_model;
    int sims = 1;
    std::size_t sim_bins = 60;
    double sim_bulk_gap = 0.1, sim_bulk_cut = 0.0;
    add_global_opts(sim, g);
    add_model_opts(sim, sim_model);
    sim->add_option("--sims", sims, "number of Monte Carlo repetitions")->check(CLI::PositiveNumber);
    sim->add_option("--bins", sim_bins, "histogram bins");
    sim->add_option("--bulk-gap", sim_bulk_gap, "gap separating eigenvalue bulks");
    sim->add_option("--bulk-cut", sim_bulk_cut, "ignore eigenvalues above this in bulk stats (0 = keep all)");

    // theory-spectrum
    auto* theory = app.add_subcommand("theory-spectrum", "closed-form spectrum of the model correlation matrix");
    ModelOpts th_model;
    bool strong = false;
    add_global_opts(theory, g);
    add_model_opts(theory, th_model);
    theory->add_flag("--strong", strong, "use the strong-cluster (gamma_k -> 1) closed form");

    // solve-density
    auto* solve = app.add_subcommand("solve-density", "noise-dressed density of a degenerate spectrum");
    std::vector<double> sd_lambda, sd_weight;
    double sd_q = 0.25, sd_eps = 1e-6, sd_gmin = 0.0, sd_gmax = 0.0;
    std::size_t sd_points = 2000;
    add_global_opts(solve, g);
    solve->add_option("--lambda", sd_lambda, "distinct eigenvalues")->required();
    solve->add_option("--weight", sd_weight, "weights (sum to 1)")->required();
    solve->add_option("--q", sd_q, "rectangularity ratio")->required();
    solve->add_option("--epsilon", sd_eps, "imaginary offset");
    solve->add_option("--grid-min", sd_gmin, "grid lower end (0 = auto)");
    solve->add_option("--grid-max", sd_gmax, "grid upper end (0 = auto)");
    solve->add_option("--grid-points", sd_points, "grid size");

    // mp
    auto* mp = app.add_subcommand("mp", "closed-form Marcenko-Pastur density");
    double mp_q = 0.25, mp_sigma = 1.0;
    std::size_t mp_points = 2000;
    add_global_opts(mp, g);
    mp->add_option("--q", mp_q, "rectangularity ratio")->required();
    mp->add_option("--sigma", mp_sigma, "scale");
    mp->add_option("--grid-points", mp_points, "grid size");

    // fit-mp
    auto* fit = app.add_subcommand("fit-mp", "fit MP parameters to an eigenvalue sample");
    std::string fit_input;
    double fit_q0 = 0.25, fit_sigma0 = 1.0;
    std::size_t fit_bins = 80;
    add_global_opts(fit, g);
    fit->add_option("--input", fit_input, "eigenvalue file, one value per line")->required();
    fit->add_option("--q0", fit_q0, "initial q");
    fit->add_option("--sigma0", fit_sigma0, "initial sigma");
    fit->add_option("--bins", fit_bins, "histogram bins");

    // estimate
    auto* est = app.add_subcommand("estimate", "Pearson correlation spectrum of a CSV panel");
    std::string est_input, est_kind = "prices";
    add_global_opts(est, g);
    est->add_option("--input", est_input, "CSV panel")->required();
    est->add_option("--kind", est_kind, "'prices' or 'returns'");

    // filter
    auto* flt = app.add_subcommand("filter", "extract cluster and background index sets");
    std::string flt_input, flt_kind = "prices";
    FilterThresholds flt_th;
    Eigen::Index flt_min = 3, flt_max = 50;
    add_global_opts(flt, g);
    flt->add_option("--input", flt_input, "CSV panel")->required();
    flt->add_option("--kind", flt_kind, "'prices' or 'returns'");
    flt->add_option("--rho-u", flt_th.rho_U, "intra-cluster lower bound");
    flt->add_option("--rho-d1", flt_th.rho_D1, "cluster-background bound");
    flt->add_option("--rho-d2", flt_th.rho_D2, "background-background bound");
    flt->add_option("--min-size", flt_min, "minimum cluster size");
    flt->add_option("--max-size", flt_max, "maximum cluster size");

    // bootstrap
    auto* boot = app.add_subcommand("bootstrap", "bootstrap / reshuffle spectra of a filtered panel");
    std::string boot_input, boot_kind = "prices";
    FilterThresholds boot_th;
    Eigen::Index boot_min = 3, boot_max = 50, boot_keep = 0;
    int boot_iters = 100, boot_lec = 1;
    bool boot_reshuffle = false;
    std::size_t boot_bins = 60;
    double boot_hist_max = 2.0, boot_lambda2 = 1.0, boot_bulk_gap = 0.1;
    add_global_opts(boot, g);
    boot->add_option("--input", boot_input, "CSV panel")->required();
    boot->add_option("--kind", boot_kind, "'prices' or 'returns'");
    boot->add_option("--rho-u", boot_th.rho_U, "intra-cluster lower bound");
    boot->add_option("--rho-d1", boot_th.rho_D1, "cluster-background bound");
    boot->add_option("--rho-d2", boot_th.rho_D2, "background-background bound");
    boot->add_option("--min-size", boot_min, "minimum cluster size");
    boot->add_option("--max-size", boot_max, "maximum cluster size");
    boot->add_option("--iterations", boot_iters, "bootstrap iterations");
    boot->add_option("--keep", boot_keep, "background rows per iteration (0 = all)");
    boot->add_flag("--reshuffle", boot_reshuffle, "reshuffle background returns per iteration");
    boot->add_option("--bins", boot_bins, "aggregate histogram bins");
    boot->add_option("--hist-max", boot_hist_max, "aggregate histogram upper end");
    boot->add_option("--large-eig-count", boot_lec, "isolated eigenvalues excluded from overlay weights");
    boot->add_option("--lambda2", boot_lambda2, "right-bulk overlay eigenvalue (1 = theoretical)");
    boot->add_option("--bulk-gap", boot_bulk_gap, "gap separating eigenvalue bulks");

    // test
    auto* tst = app.add_subcommand("test", "normality test battery on a sample file");
    std::string tst_input;
    std::vector<std::string> tst_which;
    add_global_opts(tst, g);
    tst->add_option("--input", tst_input, "sample file, one value per line")->required();
    tst->add_option("--tests", tst_which, "subset of {ks, jb, lilliefors}");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    int rc = 0;
    try {
        fs::create_directories(g.out);
        if (sim->parsed())
            rc = run_simulate(g, sim_model, sims, sim_bins, sim_bulk_gap, sim_bulk_cut);
        else if (theory->parsed())
            rc = run_theory_spectrum(g, th_model, strong);
        else if (solve->parsed())
            rc = run_solve_density(g, sd_lambda, sd_weight, sd_q, sd_eps, sd_gmin, sd_gmax, sd_points);
        else if (mp->parsed())
            rc = run_mp(g, mp_q, mp_sigma, mp_points);
        else if (fit->parsed())
            rc = run_fit_mp(g, fit_input, fit_q0, fit_sigma0, fit_bins);
        else if (est->parsed())
            rc = run_estimate(g, est_input, est_kind);
        else if (flt->parsed())
            rc = run_filter(g, flt_input, flt_kind, flt_th, flt_min, flt_max);
        else if (boot->parsed())
            rc = run_bootstrap(g, boot_input, boot_kind, boot_th, boot_min, boot_max, boot_iters,
                               boot_keep, boot_reshuffle, boot_bins, boot_hist_max, boot_lec,
                               boot_lambda2, boot_bulk_gap);
        else if (tst->parsed())
            rc = run_test(g, tst_input, tst_which);
    } catch (const BranchSelectionError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation failure: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "validation failure: " << e.what() << '\n';
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "validation failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
    std::cerr << "done in " << elapsed.count() << " s\n";   // timing stays out of report.json
    return rc;
}
