#include "ldpd/draw_store.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "ldpd/errors.hpp"

namespace ldpd {

using json = nlohmann::json;

namespace {

double parse_real(std::string_view text, std::size_t line) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (!text.empty() && text.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw ParseError("malformed number '" + std::string(text) + "'", line);
    return v;
}

std::size_t parse_count(std::string_view text, std::size_t line) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ParseError("malformed integer '" + std::string(text) + "'", line);
    return v;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ',';
        out += parts[i];
    }
    return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path.string());
    return in;
}

std::string chain_file(const char* stem, std::size_t chain, const char* ext) {
    return std::string(stem) + "_" + std::to_string(chain) + ext;
}

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"values", std::move(rows)}};
}

Matrix matrix_from(const json& j) {
    Matrix m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
    const auto& rows = j.at("values");
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index k = 0; k < m.cols(); ++k) m(i, k) = rows.at(i).at(k).get<double>();
    return m;
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

std::vector<std::string> draw_column_names(const DrawDimensions& dims) {
    std::vector<std::string> cols{"iteration", "a", "b"};
    const std::size_t d = dims.coef_dim();
    const std::size_t r = dims.latent_dim();
    for (std::size_t l = 1; l <= dims.truncation; ++l) cols.push_back("V" + std::to_string(l));
    for (std::size_t l = 1; l <= dims.truncation; ++l)
        for (std::size_t k = 1; k <= d; ++k) cols.push_back("beta" + std::to_string(l) + "_" + std::to_string(k));
    for (std::size_t j = 1; j <= r; ++j)
        for (std::size_t k = 1; k <= r; ++k) cols.push_back("Sigma" + std::to_string(j) + "_" + std::to_string(k));
    for (std::size_t k = 1; k <= d; ++k) cols.push_back("m" + std::to_string(k));
    for (std::size_t j = 1; j <= d; ++j)
        for (std::size_t k = 1; k <= d; ++k) cols.push_back("S" + std::to_string(j) + "_" + std::to_string(k));
    cols.push_back("loglik");
    cols.push_back("occupied");
    return cols;
}

void write_chain_draws(const std::vector<Snapshot>& draws, const DrawDimensions& dims, std::ostream& out) {
    out << join(draw_column_names(dims)) << '\n';
    const auto d = static_cast<Eigen::Index>(dims.coef_dim());
    const auto r = static_cast<Eigen::Index>(dims.latent_dim());
    for (const auto& s : draws) {
        if (s.atoms.size() != dims.truncation || s.Sigma.rows() != r || s.base_mean.size() != d)
            throw DomainError("write_chain_draws: snapshot dimensions do not match the store");
        out << s.iteration << ',' << format_double(s.pd.a) << ',' << format_double(s.pd.b);
        for (double v : s.sticks.sticks()) out << ',' << format_double(v);
        for (const auto& atom : s.atoms)
            for (Eigen::Index k = 0; k < d; ++k) out << ',' << format_double(atom(k));
        for (Eigen::Index j = 0; j < r; ++j)
            for (Eigen::Index k = 0; k < r; ++k) out << ',' << format_double(s.Sigma(j, k));
        for (Eigen::Index k = 0; k < d; ++k) out << ',' << format_double(s.base_mean(k));
        for (Eigen::Index j = 0; j < d; ++j)
            for (Eigen::Index k = 0; k < d; ++k) out << ',' << format_double(s.base_cov(j, k));
        out << ',' << format_double(s.log_likelihood) << ',' << s.occupied << '\n';
    }
}

std::vector<Snapshot> read_chain_draws(std::istream& in, const DrawDimensions& dims) {
    const auto expected = draw_column_names(dims);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty draw file", 1);
    if (line != join(expected)) throw ParseError("draw file header does not match the manifest dimensions", 1);
    const auto d = static_cast<Eigen::Index>(dims.coef_dim());
    const auto r = static_cast<Eigen::Index>(dims.latent_dim());
    std::vector<Snapshot> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != expected.size())
            throw ParseError("expected " + std::to_string(expected.size()) + " fields, found " +
                                 std::to_string(f.size()),
                             line_no);
        std::size_t c = 0;
        auto real = [&] { return parse_real(f[c++], line_no); };
        Snapshot s;
        s.iteration = parse_count(f[c++], line_no);
        s.pd.a = real();
        s.pd.b = real();
        std::vector<double> sticks(dims.truncation);
        for (auto& v : sticks) v = real();
        s.sticks = StickState(std::move(sticks));
        s.atoms.assign(dims.truncation, Vector(d));
        for (auto& atom : s.atoms)
            for (Eigen::Index k = 0; k < d; ++k) atom(k) = real();
        s.Sigma = Matrix(r, r);
        for (Eigen::Index j = 0; j < r; ++j)
            for (Eigen::Index k = 0; k < r; ++k) s.Sigma(j, k) = real();
        s.base_mean = Vector(d);
        for (Eigen::Index k = 0; k < d; ++k) s.base_mean(k) = real();
        s.base_cov = Matrix(d, d);
        for (Eigen::Index j = 0; j < d; ++j)
            for (Eigen::Index k = 0; k < d; ++k) s.base_cov(j, k) = real();
        s.log_likelihood = real();
        s.occupied = parse_count(f[c++], line_no);
        out.push_back(std::move(s));
    }
    return out;
}

std::size_t DrawStore::total_draws() const {
    std::size_t n = 0;
    for (const auto& c : chains) n += c.size();
    return n;
}

std::vector<Snapshot> DrawStore::pooled() const {
    std::vector<Snapshot> out;
    out.reserve(total_draws());
    for (const auto& c : chains) out.insert(out.end(), c.begin(), c.end());
    return out;
}

void save_draw_store(const DrawStore& store, const std::filesystem::path& dir) {
    if (store.traces.size() != store.chains.size())
        throw DomainError("save_draw_store: one trace per chain required");
    std::filesystem::create_directories(dir);
    const auto& m = store.manifest;
    json chains = json::array();
    for (std::size_t c = 0; c < store.chains.size(); ++c) {
        std::vector<std::size_t> kept;
        for (const auto& s : store.chains[c]) kept.push_back(s.iteration);
        chains.push_back({{"id", c},
                          {"draws", chain_file("chain", c, ".csv")},
                          {"trace", chain_file("trace", c, ".csv")},
                          {"checkpoint", chain_file("chain", c, ".state")},
                          {"iterations", kept}});

        auto out = open_out(dir / chain_file("chain", c, ".csv"));
        write_chain_draws(store.chains[c], m.dims, out);

        auto tout = open_out(dir / chain_file("trace", c, ".csv"));
        const auto& tr = store.traces[c];
        tout << "iteration,loglik,occupied\n";
        for (std::size_t i = 0; i < tr.log_likelihood.size(); ++i)
            tout << tr.first_iteration + i << ',' << format_double(tr.log_likelihood[i]) << ',' << tr.occupied[i]
                 << '\n';
    }
    json manifest{{"format_version", m.format_version},
                  {"n_items", m.dims.n_items},
                  {"p", m.dims.p},
                  {"q", m.dims.q},
                  {"truncation", m.dims.truncation},
                  {"iterations", m.iterations},
                  {"burn_in", m.burn_in},
                  {"thin", m.thin},
                  {"seed", m.seed},
                  {"lambda", m.lambda},
                  {"onset_covariates", m.onset_covariate_names},
                  {"event_covariates", m.event_covariate_names},
                  {"columns", draw_column_names(m.dims)},
                  {"chains", std::move(chains)}};
    auto out = open_out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
}

DrawStore load_draw_store(const std::filesystem::path& dir) {
    DrawStore store;
    json manifest;
    try {
        auto in = open_in(dir / "manifest.json");
        manifest = json::parse(in);
        auto& m = store.manifest;
        m.format_version = manifest.at("format_version").get<int>();
        if (m.format_version != 1) throw ValidationError("unsupported draw store version");
        m.dims.n_items = manifest.at("n_items").get<std::size_t>();
        m.dims.p = manifest.at("p").get<std::size_t>();
        m.dims.q = manifest.at("q").get<std::size_t>();
        m.dims.truncation = manifest.at("truncation").get<std::size_t>();
        m.iterations = manifest.at("iterations").get<std::size_t>();
        m.burn_in = manifest.at("burn_in").get<std::size_t>();
        m.thin = manifest.at("thin").get<std::size_t>();
        m.seed = manifest.at("seed").get<std::uint64_t>();
        m.lambda = manifest.at("lambda").get<double>();
        m.onset_covariate_names = manifest.at("onset_covariates").get<std::vector<std::string>>();
        m.event_covariate_names = manifest.at("event_covariates").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ValidationError((dir / "manifest.json").string() + ": " + e.what());
    }
    for (const auto& entry : manifest.at("chains")) {
        const auto draws_path = dir / entry.at("draws").get<std::string>();
        auto in = open_in(draws_path);
        try {
            store.chains.push_back(read_chain_draws(in, store.manifest.dims));
        } catch (const ParseError& e) {
            throw ValidationError(draws_path.string() + ": " + e.what());
        }
        const auto trace_path = dir / entry.at("trace").get<std::string>();
        auto tin = open_in(trace_path);
        ChainTrace tr;
        std::string line;
        std::getline(tin, line);
        std::size_t line_no = 1;
        bool first = true;
        try {
            while (std::getline(tin, line)) {
                ++line_no;
                if (line.empty()) continue;
                const auto f = split(line);
                if (f.size() != 3) throw ParseError("expected 3 fields", line_no);
                if (first) tr.first_iteration = parse_count(f[0], line_no);
                first = false;
                tr.log_likelihood.push_back(parse_real(f[1], line_no));
                tr.occupied.push_back(parse_count(f[2], line_no));
            }
        } catch (const ParseError& e) {
            throw ValidationError(trace_path.string() + ": " + e.what());
        }
        store.traces.push_back(std::move(tr));
    }
    return store;
}

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::size_t chain) {
    return dir / chain_file("chain", chain, ".state");
}

void save_checkpoint(const ChainCheckpoint& cp, const std::filesystem::path& path) {
    const auto& s = cp.state;
    json atoms = json::array();
    for (const auto& a : s.atoms) atoms.push_back(vector_json(a));
    const auto& acc = cp.acceptance;
    json j{{"completed_iterations", cp.completed_iterations},
           {"rng", cp.rng.serialize()},
           {"acceptance",
            {acc.trans_proposed, acc.trans_accepted, acc.slab_proposed, acc.slab_accepted, acc.b_proposed,
             acc.b_accepted}},
           {"a", s.pd.a},
           {"b", s.pd.b},
           {"z", matrix_json(s.z)},
           {"allocations", s.allocations},
           {"atoms", std::move(atoms)},
           {"sticks", s.sticks.sticks()},
           {"Sigma", matrix_json(s.Sigma)},
           {"base_mean", vector_json(s.base_mean)},
           {"base_cov", matrix_json(s.base_cov)}};
    auto out = open_out(path);
    out << j.dump() << '\n';
}

ChainCheckpoint load_checkpoint(const std::filesystem::path& path) {
    auto in = open_in(path);
    ChainCheckpoint cp;
    try {
        const json j = json::parse(in);
        cp.completed_iterations = j.at("completed_iterations").get<std::size_t>();
        cp.rng.deserialize(j.at("rng").get<std::string>());
        const auto acc = j.at("acceptance").get<std::vector<std::size_t>>();
        if (acc.size() != 6) throw ValidationError("acceptance counts");
        cp.acceptance = {acc[0], acc[1], acc[2], acc[3], acc[4], acc[5]};
        auto& s = cp.state;
        s.pd = {j.at("a").get<double>(), j.at("b").get<double>()};
        s.z = matrix_from(j.at("z"));
        s.allocations = j.at("allocations").get<std::vector<std::size_t>>();
        for (const auto& a : j.at("atoms")) s.atoms.push_back(vector_from(a));
        s.sticks = StickState(j.at("sticks").get<std::vector<double>>());
        s.Sigma = matrix_from(j.at("Sigma"));
        s.base_mean = vector_from(j.at("base_mean"));
        s.base_cov = matrix_from(j.at("base_cov"));
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return cp;
}

}  // namespace ldpd
