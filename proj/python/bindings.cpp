#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "ldpd/cli.hpp"
#include "ldpd/config.hpp"
#include "ldpd/diagnostics.hpp"
#include "ldpd/draw_store.hpp"
#include "ldpd/errors.hpp"
#include "ldpd/functionals.hpp"
#include "ldpd/mcmc.hpp"
#include "ldpd/pdprocess.hpp"
#include "ldpd/simgen.hpp"

namespace py = pybind11;
using namespace ldpd;

namespace {

PriorSpec prior_defaults(std::size_t n, std::size_t p, std::size_t q) { return PriorSpec::defaults(n, p, q); }

py::tuple cli_call(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = 0;
    {
        py::gil_scoped_release release;
        code = run_cli(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_ldpd, m) {
    m.doc() = "LDPD mixture model for doubly-interval-censored survival data";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    py::enum_<Scenario>(m, "Scenario").value("I", Scenario::I).value("II", Scenario::II);
    py::enum_<Group>(m, "Group").value("A", Group::A).value("B", Group::B);
    py::enum_<Target>(m, "Target").value("Onset", Target::Onset).value("Gap", Target::Gap);
    py::enum_<CurveKind>(m, "CurveKind")
        .value("Survival", CurveKind::Survival)
        .value("Cdf", CurveKind::Cdf)
        .value("Density", CurveKind::Density)
        .value("Hazard", CurveKind::Hazard);

    py::class_<Rng>(m, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed") = 1)
        .def("uniform", &Rng::uniform)
        .def("normal", &Rng::normal);

    // data
    py::class_<CensoringInterval>(m, "CensoringInterval")
        .def(py::init([](double lo, double hi) { return CensoringInterval{lo, hi}; }))
        .def_readwrite("lower", &CensoringInterval::lower)
        .def_readwrite("upper", &CensoringInterval::upper)
        .def("contains", &CensoringInterval::contains)
        .def("__repr__", [](const CensoringInterval& c) {
            return "(" + format_double(c.lower) + ", " + format_double(c.upper) + "]";
        });
    py::class_<ItemRecord>(m, "ItemRecord")
        .def_readonly("present", &ItemRecord::present)
        .def_readonly("onset", &ItemRecord::onset)
        .def_readonly("event", &ItemRecord::event)
        .def_readonly("onset_covariates", &ItemRecord::onset_covariates)
        .def_readonly("event_covariates", &ItemRecord::event_covariates);
    py::class_<IntervalObservation>(m, "IntervalObservation")
        .def_readonly("unit_id", &IntervalObservation::unit_id)
        .def_readonly("items", &IntervalObservation::items);
    py::class_<Dataset>(m, "Dataset")
        .def_readonly("units", &Dataset::units)
        .def_readonly("n_items", &Dataset::n_items)
        .def_readonly("p", &Dataset::p)
        .def_readonly("q", &Dataset::q)
        .def_readonly("onset_covariate_names", &Dataset::onset_covariate_names)
        .def_readonly("event_covariate_names", &Dataset::event_covariate_names)
        .def("__len__", &Dataset::size)
        .def("validate", &Dataset::validate);
    m.def("ingest_csv", [](const std::filesystem::path& p) { return ingest_csv(p); }, py::arg("path"));
    m.def("export_csv", &export_csv, py::arg("data"), py::arg("path"));

    // model and sampler
    py::class_<PDParams>(m, "PDParams")
        .def(py::init([](double a, double b) { return PDParams{a, b}; }), py::arg("a"), py::arg("b"))
        .def_readwrite("a", &PDParams::a)
        .def_readwrite("b", &PDParams::b)
        .def("valid", &PDParams::valid);
    py::class_<PriorSpec>(m, "PriorSpec")
        .def_static("defaults", &prior_defaults, py::arg("n_items"), py::arg("p"), py::arg("q"))
        .def_readwrite("lambda_", &PriorSpec::lambda)
        .def_readwrite("alpha0", &PriorSpec::alpha0)
        .def_readwrite("alpha1", &PriorSpec::alpha1)
        .def_readwrite("mu_b", &PriorSpec::mu_b)
        .def_readwrite("sigma_b", &PriorSpec::sigma_b)
        .def_readwrite("nu", &PriorSpec::nu)
        .def_readwrite("Omega", &PriorSpec::Omega)
        .def_readwrite("gamma", &PriorSpec::gamma)
        .def_readwrite("Gamma", &PriorSpec::Gamma)
        .def_readwrite("eta", &PriorSpec::eta)
        .def_readwrite("Upsilon", &PriorSpec::Upsilon)
        .def_readwrite("truncation_level", &PriorSpec::truncation_level)
        .def("validate", &PriorSpec::validate);
    py::class_<ChainConfig>(m, "ChainConfig")
        .def(py::init([](std::size_t iterations, std::size_t burn_in, std::size_t thin, std::uint64_t seed,
                         std::size_t n_chains) {
                 ChainConfig c;
                 c.iterations = iterations;
                 c.burn_in = burn_in;
                 c.thin = thin;
                 c.seed = seed;
                 c.n_chains = n_chains;
                 return c;
             }),
             py::arg("iterations") = 1000, py::arg("burn_in") = 0, py::arg("thin") = 1, py::arg("seed") = 1,
             py::arg("n_chains") = 1)
        .def_readwrite("iterations", &ChainConfig::iterations)
        .def_readwrite("burn_in", &ChainConfig::burn_in)
        .def_readwrite("thin", &ChainConfig::thin)
        .def_readwrite("seed", &ChainConfig::seed)
        .def_readwrite("n_chains", &ChainConfig::n_chains)
        .def_readwrite("check_invariants", &ChainConfig::check_invariants)
        .def("validate", &ChainConfig::validate);
    py::class_<ModelContext>(m, "ModelContext")
        .def(py::init<Dataset, PriorSpec>(), py::arg("data"), py::arg("priors"))
        .def_readonly("data", &ModelContext::data)
        .def_readonly("priors", &ModelContext::priors);
    py::class_<StickState>(m, "StickState")
        .def(py::init<std::vector<double>>())
        .def_property_readonly("sticks", &StickState::sticks)
        .def_property_readonly("weights", &StickState::weights);
    py::class_<Snapshot>(m, "Snapshot")
        .def_readonly("iteration", &Snapshot::iteration)
        .def_property_readonly("a", [](const Snapshot& s) { return s.pd.a; })
        .def_property_readonly("b", [](const Snapshot& s) { return s.pd.b; })
        .def_property_readonly("weights", [](const Snapshot& s) { return s.sticks.weights(); })
        .def_property_readonly("sticks", [](const Snapshot& s) { return s.sticks.sticks(); })
        .def_readonly("atoms", &Snapshot::atoms)
        .def_readonly("Sigma", &Snapshot::Sigma)
        .def_readonly("base_mean", &Snapshot::base_mean)
        .def_readonly("base_cov", &Snapshot::base_cov)
        .def_readonly("log_likelihood", &Snapshot::log_likelihood)
        .def_readonly("occupied", &Snapshot::occupied);
    py::class_<PosteriorDraws>(m, "PosteriorDraws")
        .def_readonly("chain_id", &PosteriorDraws::chain_id)
        .def_readonly("states", &PosteriorDraws::states)
        .def_readonly("log_likelihood_trace", &PosteriorDraws::log_likelihood_trace)
        .def_readonly("occupied_trace", &PosteriorDraws::occupied_trace);
    m.def(
        "run_chain",
        [](const ModelContext& ctx, const ChainConfig& cfg, std::size_t chain_id) {
            py::gil_scoped_release release;
            return run_chain(ctx, cfg, chain_id);
        },
        py::arg("ctx"), py::arg("config"), py::arg("chain_id") = 0);
    m.def(
        "run_chains",
        [](const ModelContext& ctx, const ChainConfig& cfg) {
            py::gil_scoped_release release;
            return run_chains(ctx, cfg);
        },
        py::arg("ctx"), py::arg("config"));

    // Poisson-Dirichlet prior
    m.def(
        "sample_sticks_prior",
        [](const PDParams& pd, std::size_t n, Rng& rng) { return sample_sticks_prior(pd, n, rng); }, py::arg("params"),
        py::arg("truncation"), py::arg("rng"));
    m.def("expected_tail_mass", &expected_tail_mass, py::arg("params"), py::arg("truncation"));
    m.def("prior_cluster_counts", &prior_cluster_counts, py::arg("params"), py::arg("m"), py::arg("reps"),
          py::arg("rng"));

    // functionals
    py::class_<CovariateProfile>(m, "CovariateProfile")
        .def(py::init([](std::string id, Vector onset, Vector event, std::size_t item, Target target) {
                 return CovariateProfile{std::move(id), std::move(onset), std::move(event), item, target};
             }),
             py::arg("id"), py::arg("onset_covariates"), py::arg("event_covariates"), py::arg("item") = 0,
             py::arg("target") = Target::Onset)
        .def_readonly("id", &CovariateProfile::id)
        .def_readonly("onset_covariates", &CovariateProfile::onset_covariates)
        .def_readonly("event_covariates", &CovariateProfile::event_covariates)
        .def_readonly("item", &CovariateProfile::item)
        .def_readonly("target", &CovariateProfile::target);
    py::class_<FunctionalGrid>(m, "FunctionalGrid")
        .def_readonly("profile_id", &FunctionalGrid::profile_id)
        .def_readonly("kind", &FunctionalGrid::kind)
        .def_readonly("times", &FunctionalGrid::times)
        .def_readonly("mean", &FunctionalGrid::mean)
        .def_readonly("hpd_lo", &FunctionalGrid::hpd_lo)
        .def_readonly("hpd_hi", &FunctionalGrid::hpd_hi)
        .def_readonly("per_draw", &FunctionalGrid::per_draw);
    m.def("survival_at", &survival_at, py::arg("draw"), py::arg("profile"), py::arg("t"));
    m.def("density_at", &density_at, py::arg("draw"), py::arg("profile"), py::arg("t"));
    m.def("hazard_at", &hazard_at, py::arg("draw"), py::arg("profile"), py::arg("t"));
    m.def("mean_at", &mean_at, py::arg("draw"), py::arg("profile"));
    m.def("median_at", &median_at, py::arg("draw"), py::arg("profile"));
    m.def("hpd_interval", &hpd_interval, py::arg("values"), py::arg("mass") = 0.95);
    m.def(
        "posterior_curves",
        [](const std::vector<Snapshot>& draws, const CovariateProfile& profile, const std::vector<double>& grid,
           CurveKind kind, double mass) {
            py::gil_scoped_release release;
            return posterior_curves(draws, profile, grid, kind, mass);
        },
        py::arg("draws"), py::arg("profile"), py::arg("grid"), py::arg("kind") = CurveKind::Survival,
        py::arg("mass") = 0.95);
    m.def("default_time_grid", &default_time_grid, py::arg("draws"), py::arg("profile"), py::arg("points") = 201);
    py::class_<BayesFactorResult>(m, "BayesFactorResult")
        .def_readonly("posterior_prob_zero", &BayesFactorResult::posterior_prob_zero)
        .def_readonly("prior_prob_zero", &BayesFactorResult::prior_prob_zero)
        .def_readonly("bayes_factor", &BayesFactorResult::bayes_factor)
        .def_readonly("degenerate", &BayesFactorResult::degenerate);
    m.def("bayes_factor_from_probability", &bayes_factor_from_probability, py::arg("posterior_prob_zero"),
          py::arg("lam"));
    m.def("bayes_factor_spike", &bayes_factor_spike, py::arg("draws"), py::arg("lam"));
    m.def(
        "log_scale_correlations",
        [](const std::vector<Snapshot>& draws, double mass) {
            py::list out;
            for (const auto& c : log_scale_correlations(draws, mass))
                out.append(py::make_tuple(c.label, c.summary.mean, c.summary.lo, c.summary.hi));
            return out;
        },
        py::arg("draws"), py::arg("mass") = 0.95);
    m.def("count_local_maxima", &count_local_maxima, py::arg("values"), py::arg("window") = 5);

    // simulation
    py::class_<VisitSchedule>(m, "VisitSchedule")
        .def(py::init<>())
        .def_readwrite("first_visit_mean", &VisitSchedule::first_visit_mean)
        .def_readwrite("first_visit_sd", &VisitSchedule::first_visit_sd)
        .def_readwrite("gap_mean", &VisitSchedule::gap_mean)
        .def_readwrite("gap_sd", &VisitSchedule::gap_sd)
        .def_readwrite("n_visits", &VisitSchedule::n_visits);
    py::class_<ScenarioTruth>(m, "ScenarioTruth");
    py::class_<TrueTimes>(m, "TrueTimes")
        .def_readonly("unit_id", &TrueTimes::unit_id)
        .def_readonly("group", &TrueTimes::group)
        .def_readonly("onset", &TrueTimes::onset)
        .def_readonly("gap", &TrueTimes::gap);
    py::class_<SimulatedData>(m, "SimulatedData")
        .def_readonly("data", &SimulatedData::data)
        .def_readonly("truth", &SimulatedData::truth);
    m.def("scenario_truth", &scenario_truth, py::arg("scenario"), py::arg("group"));
    m.def("generate", &generate, py::arg("truth_a"), py::arg("truth_b"), py::arg("m_per_group"),
          py::arg("schedule") = VisitSchedule{}, py::arg("seed") = 1);
    m.def("bracket", &bracket, py::arg("t"), py::arg("visits"));
    m.def("group_profile", &group_profile, py::arg("group"), py::arg("target"));
    m.def("truth_survival", &truth_survival, py::arg("truth"), py::arg("target"), py::arg("t"));
    m.def("truth_density", &truth_density, py::arg("truth"), py::arg("target"), py::arg("t"));

    // diagnostics
    m.def("effective_sample_size", py::overload_cast<const std::vector<std::vector<double>>&>(&effective_sample_size),
          py::arg("chains"));
    m.def("split_rhat", &split_rhat, py::arg("chains"));
    m.def("batch_means_se", &batch_means_se, py::arg("trace"), py::arg("batches") = 50);
    m.def(
        "mann_kendall",
        [](const std::vector<double>& s) {
            const auto r = mann_kendall(s);
            return py::make_tuple(r.statistic, r.z, r.p_value);
        },
        py::arg("series"));

    // draw store and command line
    py::class_<DrawStore>(m, "DrawStore")
        .def_property_readonly("seed", [](const DrawStore& s) { return s.manifest.seed; })
        .def_property_readonly("lambda_", [](const DrawStore& s) { return s.manifest.lambda; })
        .def_readonly("chains", &DrawStore::chains)
        .def("total_draws", &DrawStore::total_draws)
        .def("pooled", &DrawStore::pooled);
    m.def("load_draw_store", &load_draw_store, py::arg("dir"));
    m.def("run_cli", &cli_call, py::arg("args"),
          "Runs the command-line tool in process. Returns (exit_code, stdout, stderr).");
}
