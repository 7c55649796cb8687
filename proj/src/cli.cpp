#include "ldpd/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ldpd/diagnostics.hpp"
#include "ldpd/draw_store.hpp"
#include "ldpd/errors.hpp"
#include "ldpd/simgen.hpp"

namespace ldpd {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    return out;
}

fs::path output_dir(Config& cfg) {
    const fs::path dir = cfg.require_string("output.dir");
    fs::create_directories(dir);
    return dir;
}

void reject_unused(const Config& cfg) {
    const auto unused = cfg.unused_keys();
    if (unused.empty()) return;
    std::string msg = "unknown configuration key(s):";
    for (const auto& k : unused) msg += " " + k;
    throw ConfigError(msg);
}

void write_resolved(const Config& cfg, const fs::path& path) {
    auto out = open_out(path);
    out << cfg.resolved();
}

/// A single value means value * I; otherwise d*d entries in row-major order.
Matrix matrix_setting(Config& cfg, const std::string& key, const Matrix& fallback) {
    const auto d = fallback.rows();
    if (!cfg.has(key)) {
        if (fallback.isDiagonal() && (fallback.diagonal().array() == fallback(0, 0)).all())
            cfg.get_doubles(key, {fallback(0, 0)});
        else
            cfg.get_doubles(key, std::vector<double>(fallback.data(), fallback.data() + fallback.size()));
        return fallback;
    }
    const auto v = cfg.get_doubles(key, {});
    if (v.size() == 1) return v[0] * Matrix::Identity(d, d);
    if (v.size() != static_cast<std::size_t>(d * d))
        throw ConfigError(key + ": expected 1 or " + std::to_string(d * d) + " values");
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = v[static_cast<std::size_t>(i * d + j)];
    return m;
}

Vector vector_setting(Config& cfg, const std::string& key, const Vector& fallback) {
    const auto d = fallback.size();
    if (!cfg.has(key)) {
        cfg.get_doubles(key, std::vector<double>(fallback.data(), fallback.data() + d));
        return fallback;
    }
    const auto v = cfg.get_doubles(key, {});
    if (v.size() == 1) return Vector::Constant(d, v[0]);
    if (v.size() != static_cast<std::size_t>(d)) throw ConfigError(key + ": expected 1 or " + std::to_string(d) + " values");
    return Eigen::Map<const Vector>(v.data(), d);
}

PriorSpec prior_from_config(Config& cfg, std::size_t n, std::size_t p, std::size_t q) {
    PriorSpec s = PriorSpec::defaults(n, p, q);
    s.lambda = cfg.get_double("prior.lambda", s.lambda);
    s.alpha0 = cfg.get_double("prior.alpha0", s.alpha0);
    s.alpha1 = cfg.get_double("prior.alpha1", s.alpha1);
    s.mu_b = cfg.get_double("prior.mu_b", s.mu_b);
    s.sigma_b = cfg.get_double("prior.sigma_b", s.sigma_b);
    s.nu = cfg.get_double("prior.nu", s.nu);
    s.Omega = matrix_setting(cfg, "prior.Omega", s.Omega);
    s.gamma = cfg.get_double("prior.gamma", s.gamma);
    s.Gamma = matrix_setting(cfg, "prior.Gamma", s.Gamma);
    s.eta = vector_setting(cfg, "prior.eta", s.eta);
    s.Upsilon = matrix_setting(cfg, "prior.Upsilon", s.Upsilon);
    s.truncation_level = cfg.get_uint("prior.truncation", s.truncation_level);
    return s;
}

ChainConfig chain_from_config(Config& cfg) {
    ChainConfig c;
    c.iterations = cfg.get_uint("chain.iterations", c.iterations);
    c.burn_in = cfg.get_uint("chain.burn_in", c.burn_in);
    c.thin = cfg.get_uint("chain.thin", c.thin);
    c.seed = cfg.require_uint("chain.seed");
    c.n_chains = cfg.get_uint("chain.n_chains", c.n_chains);
    c.check_invariants = cfg.get_bool("chain.check_invariants", c.check_invariants);
    return c;
}

CsvSchema schema_from_config(Config& cfg) {
    CsvSchema s;
    s.onset_columns = cfg.get_strings("data.onset_columns", {});
    s.event_columns = cfg.get_strings("data.event_columns", {});
    s.n_items = cfg.get_uint("data.n_items", 0);
    return s;
}

std::string fmt(double x) { return format_double(x); }

json component_json(const MixtureComponent& c) {
    return json{{"weight", c.weight},
                {"mean", {c.mean(0), c.mean(1)}},
                {"covariance", {{c.covariance(0, 0), c.covariance(0, 1)}, {c.covariance(1, 0), c.covariance(1, 1)}}}};
}

void write_curve(const FunctionalGrid& g, const fs::path& path) {
    auto out = open_out(path);
    out << "time,mean,hpd_lo,hpd_hi,profile_id\n";
    for (std::size_t i = 0; i < g.times.size(); ++i)
        out << fmt(g.times[i]) << ',' << fmt(g.mean[i]) << ',' << fmt(g.hpd_lo[i]) << ',' << fmt(g.hpd_hi[i]) << ','
            << g.profile_id << '\n';
}

std::string coordinate_label(std::size_t k, std::size_t n) {
    return k < n ? "onset" + std::to_string(k + 1) : "gap" + std::to_string(k - n + 1);
}

/// Distinct covariate rows of each item (first-appearance order, at most 8).
std::vector<CovariateProfile> profiles_from_data(const Dataset& data) {
    std::vector<CovariateProfile> out;
    for (std::size_t j = 0; j < data.n_items; ++j) {
        std::vector<std::pair<Vector, Vector>> seen;
        for (const auto& u : data.units) {
            const auto& rec = u.items[j];
            if (!rec.present) continue;
            const bool known = std::any_of(seen.begin(), seen.end(), [&](const auto& s) {
                return s.first == rec.onset_covariates && s.second == rec.event_covariates;
            });
            if (!known) seen.emplace_back(rec.onset_covariates, rec.event_covariates);
            if (seen.size() == 8) break;
        }
        for (std::size_t k = 0; k < seen.size(); ++k) {
            for (const Target t : {Target::Onset, Target::Gap}) {
                CovariateProfile p;
                p.id = "item" + std::to_string(j + 1) + "_cov" + std::to_string(k + 1) +
                       (t == Target::Onset ? "_onset" : "_gap");
                p.onset_covariates = seen[k].first;
                p.event_covariates = seen[k].second;
                p.item = j;
                p.target = t;
                out.push_back(std::move(p));
            }
        }
    }
    return out;
}

std::vector<double> collect(const std::vector<Snapshot>& draws, const auto& f) {
    std::vector<double> out;
    out.reserve(draws.size());
    for (const auto& s : draws) out.push_back(f(s));
    return out;
}

}  // namespace

std::vector<CovariateProfile> profiles_from_config(Config& cfg, std::size_t p, std::size_t q) {
    std::vector<CovariateProfile> out;
    for (const auto& section : cfg.sections_with_prefix("profile.")) {
        const auto name = section.substr(std::string("profile.").size());
        if (name.empty()) throw ConfigError("profile section needs a name");
        const auto onset = cfg.get_doubles(section + ".onset", {});
        const auto event = cfg.get_doubles(section + ".event", {});
        if (onset.size() != p) throw ConfigError(section + ".onset: expected " + std::to_string(p) + " values");
        if (event.size() != q) throw ConfigError(section + ".event: expected " + std::to_string(q) + " values");
        const auto item = cfg.get_uint(section + ".item", 1);
        if (item < 1) throw ConfigError(section + ".item: items are numbered from 1");
        const auto target = cfg.get_string(section + ".target", "both");
        std::vector<Target> targets;
        if (target == "onset") targets = {Target::Onset};
        else if (target == "gap") targets = {Target::Gap};
        else if (target == "both") targets = {Target::Onset, Target::Gap};
        else throw ConfigError(section + ".target: expected onset, gap or both");
        for (const auto t : targets) {
            CovariateProfile prof;
            prof.id = target == "both" ? name + (t == Target::Onset ? "_onset" : "_gap") : name;
            prof.onset_covariates = Eigen::Map<const Vector>(onset.data(), static_cast<Eigen::Index>(p));
            prof.event_covariates = Eigen::Map<const Vector>(event.data(), static_cast<Eigen::Index>(q));
            prof.item = item - 1;
            prof.target = t;
            out.push_back(std::move(prof));
        }
    }
    return out;
}

void cmd_simulate(Config& cfg, std::ostream& log) {
    Scenario scenario;
    try {
        scenario = parse_scenario(cfg.require_string("simulate.scenario"));
    } catch (const ValidationError& e) {
        throw UsageError(e.what());
    }
    const auto m = cfg.get_uint("simulate.m", 500);
    const auto seed = cfg.require_uint("simulate.seed");
    VisitSchedule schedule;
    schedule.first_visit_mean = cfg.get_double("simulate.first_visit_mean", schedule.first_visit_mean);
    schedule.first_visit_sd = cfg.get_double("simulate.first_visit_sd", schedule.first_visit_sd);
    schedule.gap_mean = cfg.get_double("simulate.visit_gap_mean", schedule.gap_mean);
    schedule.gap_sd = cfg.get_double("simulate.visit_gap_sd", schedule.gap_sd);
    schedule.n_visits = cfg.get_uint("simulate.n_visits", schedule.n_visits);
    const auto dir = output_dir(cfg);
    reject_unused(cfg);
    if (m < 2 || m % 2 != 0) throw ValidationError("simulate.m must be a positive even number (two equal groups)");

    const auto truth_a = scenario_truth(scenario, Group::A);
    const auto truth_b = scenario_truth(scenario, Group::B);
    const auto sim = generate(truth_a, truth_b, m / 2, schedule, seed);
    export_csv(sim.data, dir / "data.csv");
    write_truth_csv(sim.truth, dir / "truth.csv");

    json groups = json::object();
    for (const auto& [name, truth] : {std::pair{"A", &truth_a}, std::pair{"B", &truth_b}}) {
        json comps = json::array();
        for (const auto& c : truth->components) comps.push_back(component_json(c));
        groups[name] = std::move(comps);
    }
    json manifest{{"command", "simulate"},
                  {"scenario", scenario_name(scenario)},
                  {"m", m},
                  {"m_per_group", m / 2},
                  {"seed", seed},
                  {"visit_schedule",
                   {{"first_visit_mean", schedule.first_visit_mean},
                    {"first_visit_sd", schedule.first_visit_sd},
                    {"visit_gap_mean", schedule.gap_mean},
                    {"visit_gap_sd", schedule.gap_sd},
                    {"n_visits", schedule.n_visits}}},
                  {"truth", std::move(groups)},
                  {"files", {"data.csv", "truth.csv"}}};
    auto out = open_out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
    write_resolved(cfg, dir / "config.resolved");
    log << "simulated scenario " << scenario_name(scenario) << ": " << m << " subjects (" << m / 2
        << " per group) -> " << (dir / "data.csv").string() << '\n';
}

void cmd_fit(Config& cfg, bool resume, std::ostream& log) {
    const fs::path data_path = cfg.require_string("data.path");
    const auto schema = schema_from_config(cfg);
    const auto chain = chain_from_config(cfg);
    const auto dir = output_dir(cfg);
    // The dataset fixes the prior dimensions, so it is read before the prior keys.
    if (!fs::exists(data_path)) throw ValidationError("data file not found: " + data_path.string());
    Dataset data = ingest_csv(data_path, schema);
    const auto priors = prior_from_config(cfg, data.n_items, data.p, data.q);
    reject_unused(cfg);
    chain.validate();
    ModelContext ctx(std::move(data), priors);

    const auto draws_dir = dir / "draws";
    DrawStore store;
    std::vector<ChainCheckpoint> checkpoints;
    if (resume) {
        store = load_draw_store(draws_dir);
        const auto& m = store.manifest;
        if (m.dims.n_items != ctx.data.n_items || m.dims.p != ctx.data.p || m.dims.q != ctx.data.q ||
            m.dims.truncation != priors.truncation_level)
            throw ValidationError("resume: draw store dimensions do not match the data and prior");
        if (m.seed != chain.seed || m.burn_in != chain.burn_in || m.thin != chain.thin ||
            store.chains.size() != chain.n_chains)
            throw ValidationError("resume: seed, burn_in, thin and n_chains must match the stored run");
        for (std::size_t c = 0; c < chain.n_chains; ++c) {
            checkpoints.push_back(load_checkpoint(checkpoint_path(draws_dir, c)));
            if (checkpoints.back().completed_iterations > chain.iterations)
                throw ValidationError("resume: chain.iterations is below the completed sweep count");
        }
    } else {
        store.chains.resize(chain.n_chains);
        store.traces.resize(chain.n_chains);
    }

    const auto started = std::chrono::steady_clock::now();
    auto results = run_chains(ctx, chain, std::move(checkpoints));
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    auto& man = store.manifest;
    man.dims = {ctx.data.n_items, ctx.data.p, ctx.data.q, priors.truncation_level};
    man.iterations = chain.iterations;
    man.burn_in = chain.burn_in;
    man.thin = chain.thin;
    man.seed = chain.seed;
    man.lambda = priors.lambda;
    man.onset_covariate_names = ctx.data.onset_covariate_names;
    man.event_covariate_names = ctx.data.event_covariate_names;
    for (auto& r : results) {
        auto& kept = store.chains[r.chain_id];
        kept.insert(kept.end(), std::make_move_iterator(r.states.begin()), std::make_move_iterator(r.states.end()));
        auto& tr = store.traces[r.chain_id];
        if (tr.log_likelihood.empty()) tr.first_iteration = r.first_iteration;
        tr.log_likelihood.insert(tr.log_likelihood.end(), r.log_likelihood_trace.begin(), r.log_likelihood_trace.end());
        tr.occupied.insert(tr.occupied.end(), r.occupied_trace.begin(), r.occupied_trace.end());
    }
    save_draw_store(store, draws_dir);
    for (const auto& r : results) save_checkpoint(r.checkpoint, checkpoint_path(draws_dir, r.chain_id));

    {
        auto out = open_out(dir / "report.txt");
        out << "ldpd fit report\n\n";
        out << "data: " << data_path.string() << " (" << ctx.data.size() << " units, n=" << ctx.data.n_items
            << ", p=" << ctx.data.p << ", q=" << ctx.data.q << ")\n";
        out << "chains: " << chain.n_chains << ", iterations: " << chain.iterations << ", burn-in: " << chain.burn_in
            << ", thin: " << chain.thin << ", seed: " << chain.seed << ", truncation: " << priors.truncation_level
            << (resume ? " (resumed)" : "") << '\n';
        out << "wall-clock seconds (this invocation): " << std::fixed << std::setprecision(2) << seconds << "\n\n";
        out << std::setprecision(4);
        for (const auto& r : results) {
            const auto& acc = r.acceptance;
            const auto& tr = store.traces[r.chain_id];
            const auto& kept = store.chains[r.chain_id];
            out << "chain " << r.chain_id << ": " << tr.occupied.size() << " sweeps, " << kept.size()
                << " snapshots kept\n";
            out << "  acceptance  a spike/slab jump: " << acc.trans_accepted << "/" << acc.trans_proposed << " ("
                << AcceptanceCounts::rate(acc.trans_accepted, acc.trans_proposed) << ")\n";
            out << "              logit(a) walk:     " << acc.slab_accepted << "/" << acc.slab_proposed << " ("
                << AcceptanceCounts::rate(acc.slab_accepted, acc.slab_proposed) << ")\n";
            out << "              log(b + a) walk:   " << acc.b_accepted << "/" << acc.b_proposed << " ("
                << AcceptanceCounts::rate(acc.b_accepted, acc.b_proposed) << ")\n";
            if (!tr.occupied.empty()) {
                double mean = 0.0;
                std::size_t lo = tr.occupied.front();
                std::size_t hi = lo;
                for (auto k : tr.occupied) {
                    mean += static_cast<double>(k);
                    lo = std::min(lo, k);
                    hi = std::max(hi, k);
                }
                mean /= static_cast<double>(tr.occupied.size());
                out << "  occupied clusters  mean " << mean << ", min " << lo << ", max " << hi << ", final "
                    << tr.occupied.back() << '\n';
                out << "  occupied trace (sweep:clusters)";
                const std::size_t step = std::max<std::size_t>(1, tr.occupied.size() / 20);
                for (std::size_t i = step - 1; i < tr.occupied.size(); i += step)
                    out << ' ' << tr.first_iteration + i << ':' << tr.occupied[i];
                out << '\n';
            }
            if (!kept.empty()) {
                double zero = 0.0;
                for (const auto& s : kept) zero += s.pd.a == 0.0;
                out << "  P(a = 0 | data) " << zero / static_cast<double>(kept.size()) << '\n';
            }
            out << '\n';
        }
    }
    write_resolved(cfg, dir / "config.resolved");
    log << "fit: " << chain.n_chains << " chain(s), " << store.total_draws() << " draws -> "
        << draws_dir.string() << " (" << std::fixed << std::setprecision(1) << seconds << " s)\n";
}

void cmd_summarize(Config& cfg, std::ostream& log) {
    const auto dir = output_dir(cfg);
    const double mass = cfg.get_double("summarize.mass", 0.95);
    const auto points = cfg.get_uint("summarize.grid_points", 201);
    const auto grid_min = cfg.get_double("summarize.grid_min", 0.0);
    const auto grid_max = cfg.get_double("summarize.grid_max", 0.0);
    const auto kinds = cfg.get_strings("summarize.curves", {"survival", "cdf", "density", "hazard"});
    const DrawStore store = load_draw_store(dir / "draws");
    auto profiles = profiles_from_config(cfg, store.manifest.dims.p, store.manifest.dims.q);
    reject_unused(cfg);
    if (!(mass > 0.0 && mass < 1.0)) throw ValidationError("summarize.mass must lie in (0, 1)");
    if (points < 2) throw ValidationError("summarize.grid_points must be at least 2");
    const bool fixed_grid = grid_min > 0.0 || grid_max > 0.0;
    if (fixed_grid && !(grid_min > 0.0 && grid_max > grid_min))
        throw ValidationError("summarize.grid_min and grid_max must satisfy 0 < min < max");
    std::vector<CurveKind> curve_kinds;
    for (const auto& k : kinds) {
        if (k == "survival") curve_kinds.push_back(CurveKind::Survival);
        else if (k == "cdf") curve_kinds.push_back(CurveKind::Cdf);
        else if (k == "density") curve_kinds.push_back(CurveKind::Density);
        else if (k == "hazard") curve_kinds.push_back(CurveKind::Hazard);
        else throw ConfigError("summarize.curves: unknown curve '" + k + "'");
    }

    const auto draws = store.pooled();
    if (draws.empty()) throw ValidationError("draw store " + (dir / "draws").string() + " holds no draws");
    const auto n = store.manifest.dims.n_items;

    if (profiles.empty()) {
        // Fall back to the covariate patterns of the fitted data.
        const auto fit_config = dir / "config.resolved";
        if (fs::exists(fit_config)) {
            Config fc = Config::load(fit_config);
            const fs::path data_path = fc.get_string("data.path", "");
            if (!data_path.empty() && fs::exists(data_path))
                profiles = profiles_from_data(ingest_csv(data_path, schema_from_config(fc)));
        }
    }
    for (const auto& prof : profiles)
        if (prof.item >= n) throw ValidationError("profile " + prof.id + ": item out of range");

    fs::create_directories(dir / "tables");
    fs::create_directories(dir / "curves");

    const auto correlations = log_scale_correlations(draws, mass);
    {
        auto out = open_out(dir / "tables" / "correlations.csv");
        out << "pair,mean,hpd_lo,hpd_hi\n";
        for (const auto& c : correlations)
            out << c.label << ',' << fmt(c.summary.mean) << ',' << fmt(c.summary.lo) << ',' << fmt(c.summary.hi)
                << '\n';
    }
    {
        const auto r = 2 * n;
        Matrix mean_corr = Matrix::Identity(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
        for (const auto& c : correlations) {
            const auto i = static_cast<Eigen::Index>(c.row);
            const auto j = static_cast<Eigen::Index>(c.col);
            mean_corr(i, j) = mean_corr(j, i) = c.summary.mean;
        }
        auto out = open_out(dir / "tables" / "correlation_matrix.csv");
        out << "coordinate";
        for (std::size_t k = 0; k < r; ++k) out << ',' << coordinate_label(k, n);
        out << '\n';
        for (std::size_t i = 0; i < r; ++i) {
            out << coordinate_label(i, n);
            for (std::size_t k = 0; k < r; ++k)
                out << ',' << fmt(mean_corr(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
            out << '\n';
        }
    }
    const auto bf = bayes_factor_spike(draws, store.manifest.lambda);
    {
        auto out = open_out(dir / "tables" / "bayes_factor.csv");
        out << "posterior_prob_zero,prior_prob_zero,bayes_factor,degenerate\n";
        out << fmt(bf.posterior_prob_zero) << ',' << fmt(bf.prior_prob_zero) << ',' << fmt(bf.bayes_factor) << ','
            << (bf.degenerate ? "true" : "false") << '\n';
    }
    {
        auto out = open_out(dir / "tables" / "medians.csv");
        out << "profile,item,mean,hpd_lo,hpd_hi\n";
        for (const auto& prof : profiles) {
            const auto s = summarize_draws(collect(draws, [&](const Snapshot& d) { return median_at(d, prof); }), mass);
            out << prof.id << ',' << prof.item + 1 << ',' << fmt(s.mean) << ',' << fmt(s.lo) << ',' << fmt(s.hi)
                << '\n';
        }
    }
    for (const auto& prof : profiles) {
        const auto grid = fixed_grid ? log_spaced(grid_min, grid_max, points) : default_time_grid(draws, prof, points);
        for (const auto kind : curve_kinds) {
            const auto g = posterior_curves(draws, prof, grid, kind, mass);
            write_curve(g, dir / "curves" / (prof.id + "_" + curve_kind_name(kind) + ".csv"));
        }
    }
    write_resolved(cfg, dir / "summarize.resolved");

    log << "draws: " << draws.size() << " from " << store.chains.size() << " chain(s)\n";
    log << "Bayes factor (a > 0 against a = 0): " << fmt(bf.bayes_factor) << "  [P(a = 0 | data) = "
        << fmt(bf.posterior_prob_zero) << (bf.degenerate ? ", degenerate" : "") << "]\n";
    for (const auto& c : correlations)
        log << "corr " << c.label << ": " << fmt(c.summary.mean) << " (" << fmt(c.summary.lo) << ", "
            << fmt(c.summary.hi) << ")\n";
    log << profiles.size() << " profile(s) summarized -> " << (dir / "tables").string() << ", "
        << (dir / "curves").string() << '\n';
}

void cmd_diagnose(Config& cfg, std::ostream& log) {
    const auto dir = output_dir(cfg);
    const auto rhat_threshold = cfg.get_double("diagnose.rhat_threshold", 1.01);
    const auto max_trend_points = cfg.get_uint("diagnose.trend_points", 2000);
    reject_unused(cfg);
    const DrawStore store = load_draw_store(dir / "draws");
    if (store.chains.empty()) throw ValidationError("diagnose needs at least one chain");
    if (store.total_draws() == 0) throw ValidationError("draw store holds no draws");
    const auto& dims = store.manifest.dims;

    std::vector<std::pair<std::string, std::function<double(const Snapshot&)>>> params{
        {"a", [](const Snapshot& s) { return s.pd.a; }},
        {"b", [](const Snapshot& s) { return s.pd.b; }},
        {"omega1", [](const Snapshot& s) { return s.sticks.weights().front(); }},
    };
    const auto r = static_cast<Eigen::Index>(dims.latent_dim());
    for (Eigen::Index j = 0; j < r; ++j)
        for (Eigen::Index k = j; k < r; ++k)
            params.emplace_back("Sigma" + std::to_string(j + 1) + "_" + std::to_string(k + 1),
                                [j, k](const Snapshot& s) { return s.Sigma(j, k); });
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(dims.coef_dim()); ++k)
        params.emplace_back("m" + std::to_string(k + 1), [k](const Snapshot& s) { return s.base_mean(k); });
    params.emplace_back("loglik", [](const Snapshot& s) { return s.log_likelihood; });
    params.emplace_back("occupied", [](const Snapshot& s) { return static_cast<double>(s.occupied); });

    const bool short_chains = std::all_of(store.chains.begin(), store.chains.end(),
                                          [](const auto& c) { return c.size() < 4; });
    fs::create_directories(dir / "tables");
    std::vector<std::string> flagged;
    {
        auto out = open_out(dir / "tables" / "diagnostics.csv");
        out << "parameter,mean,sd,q025,q500,q975,ess,rhat,flag\n";
        for (const auto& [name, f] : params) {
            std::vector<std::vector<double>> chains;
            for (const auto& c : store.chains) chains.push_back(collect(c, f));
            const auto s = summarize_trace(name, chains);
            const bool flag = std::isfinite(s.rhat) && s.rhat > rhat_threshold;
            if (flag) flagged.push_back(name);
            out << name << ',' << fmt(s.mean) << ',' << fmt(s.sd) << ',' << fmt(s.q025) << ',' << fmt(s.q500) << ','
                << fmt(s.q975) << ',' << fmt(s.ess) << ',' << fmt(s.rhat) << ',' << (flag ? "rhat_high" : "") << '\n';
        }
    }
    {
        auto out = open_out(dir / "tables" / "trend.csv");
        out << "chain,points,statistic,z,p_value\n";
        for (std::size_t c = 0; c < store.traces.size(); ++c) {
            const auto& tr = store.traces[c];
            std::vector<double> post;
            for (std::size_t i = 0; i < tr.log_likelihood.size(); ++i)
                if (tr.first_iteration + i > store.manifest.burn_in) post.push_back(tr.log_likelihood[i]);
            std::vector<double> sub;
            const std::size_t step = std::max<std::size_t>(1, (post.size() + max_trend_points - 1) / std::max<std::uint64_t>(max_trend_points, 1));
            for (std::size_t i = 0; i < post.size(); i += step) sub.push_back(post[i]);
            const auto mk = mann_kendall(sub);
            out << c << ',' << sub.size() << ',' << fmt(mk.statistic) << ',' << fmt(mk.z) << ',' << fmt(mk.p_value)
                << '\n';
        }
    }
    write_resolved(cfg, dir / "diagnose.resolved");
    log << params.size() << " parameters diagnosed over " << store.chains.size() << " chain(s) -> "
        << (dir / "tables" / "diagnostics.csv").string() << '\n';
    if (short_chains) log << "notice: chains shorter than 4 draws; split R-hat skipped, ESS only\n";
    if (!flagged.empty()) {
        log << "R-hat above " << fmt(rhat_threshold) << ":";
        for (const auto& n : flagged) log << ' ' << n;
        log << '\n';
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Linear dependent Poisson-Dirichlet mixtures for doubly-interval-censored data", "ldpd"};
    app.require_subcommand(1);
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;

    auto common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config_path, "configuration file");
        sub->add_option("-s,--set", overrides, "override, section.key=value (repeatable)");
        sub->add_option("-o,--out", out_dir, "output directory (output.dir)");
    };

    std::string scenario;
    std::string sim_m;
    std::string seed;
    auto* sim = app.add_subcommand("simulate", "simulate a scenario data set");
    common(sim);
    sim->add_option("--scenario", scenario, "I or II");
    sim->add_option("--m", sim_m, "total number of subjects");
    sim->add_option("--seed", seed, "random seed");

    std::string data_path;
    std::string iterations;
    std::string chains;
    bool resume = false;
    auto* fit = app.add_subcommand("fit", "run the blocked Gibbs sampler");
    common(fit);
    fit->add_option("--data", data_path, "data CSV (data.path)");
    fit->add_option("--iterations", iterations, "total sweeps per chain");
    fit->add_option("--chains", chains, "number of chains");
    fit->add_option("--seed", seed, "master seed");
    fit->add_flag("--resume", resume, "continue the chains stored in <out>/draws");

    auto* summarize = app.add_subcommand("summarize", "posterior tables and curves");
    common(summarize);
    auto* diagnose = app.add_subcommand("diagnose", "convergence diagnostics");
    common(diagnose);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    try {
        Config cfg = config_path.empty() ? Config{} : Config::load(config_path);
        if (!out_dir.empty()) cfg.set("output.dir", out_dir);
        if (*sim) {
            if (!scenario.empty()) cfg.set("simulate.scenario", scenario);
            if (!sim_m.empty()) cfg.set("simulate.m", sim_m);
            if (!seed.empty()) cfg.set("simulate.seed", seed);
        }
        if (*fit) {
            if (!data_path.empty()) cfg.set("data.path", fs::absolute(data_path).string());
            if (!iterations.empty()) cfg.set("chain.iterations", iterations);
            if (!chains.empty()) cfg.set("chain.n_chains", chains);
            if (!seed.empty()) cfg.set("chain.seed", seed);
        }
        for (const auto& o : overrides) cfg.apply_override(o);

        if (*sim) cmd_simulate(cfg, out);
        else if (*fit) cmd_fit(cfg, resume, out);
        else if (*summarize) cmd_summarize(cfg, out);
        else cmd_diagnose(cfg, out);
        return kExitOk;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ParseError& e) {
        err << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const DomainError& e) {
        err << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace ldpd
