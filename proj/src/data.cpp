#include "ldpd/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <unordered_map>

#include "ldpd/errors.hpp"

namespace ldpd {

namespace {

const std::vector<std::string> kFixedColumns = {"unit_id", "item", "onset_lo", "onset_hi", "event_lo", "event_hi"};

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return fields;
}

double parse_number(const std::string& field, const char* column, std::size_t line) {
    if (field == "inf" || field == "Inf" || field == "+inf") return kInf;
    double value = 0.0;
    const auto* begin = field.data();
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (field.empty() || ec != std::errc() || ptr != end)
        throw ParseError(std::string("cannot parse ") + column + " value '" + field + "'", line);
    return value;
}

double parse_upper(const std::string& field, const char* column, std::size_t line) {
    return field.empty() ? kInf : parse_number(field, column, line);
}

std::string describe(const std::string& unit, std::size_t item) {
    return "unit " + unit + ", item " + std::to_string(item);
}

void validate_interval(const CensoringInterval& iv, const char* which, const std::string& unit, std::size_t item) {
    if (!(iv.lower >= 0.0))
        throw ValidationError(describe(unit, item) + ": " + which + " lower bound must be >= 0");
    if (!(iv.lower < iv.upper))
        throw ValidationError(describe(unit, item) + ": " + which + " interval requires lower < upper");
}

}  // namespace

std::size_t IntervalObservation::present_count() const {
    return static_cast<std::size_t>(std::count_if(items.begin(), items.end(), [](const auto& it) { return it.present; }));
}

void Dataset::validate() const {
    for (const auto& unit : units) {
        if (unit.items.size() != n_items)
            throw ValidationError("unit " + unit.unit_id + ": expected " + std::to_string(n_items) + " item slots");
        if (unit.present_count() == 0) throw ValidationError("unit " + unit.unit_id + ": no present items");
        for (std::size_t j = 0; j < unit.items.size(); ++j) {
            const auto& it = unit.items[j];
            if (static_cast<std::size_t>(it.onset_covariates.size()) != p ||
                static_cast<std::size_t>(it.event_covariates.size()) != q)
                throw ValidationError(describe(unit.unit_id, j + 1) + ": covariate dimension mismatch");
            if (!it.present) continue;
            if (!it.onset_covariates.allFinite() || !it.event_covariates.allFinite())
                throw ValidationError(describe(unit.unit_id, j + 1) + ": covariates must be finite");
            validate_interval(it.onset, "onset", unit.unit_id, j + 1);
            validate_interval(it.event, "event", unit.unit_id, j + 1);
            // Some t^O in (u^L, u^U] and t^T > 0 with t^O + t^T in (v^L, v^U]
            // exist exactly when u^L < v^U.
            if (!(it.onset.lower < it.event.upper))
                throw ValidationError(describe(unit.unit_id, j + 1) +
                                      ": onset cannot begin before the event interval closes");
        }
    }
}

Dataset parse_csv(std::istream& in, const CsvSchema& schema) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("missing header row", 1);
    ++line_no;
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
    const auto header = split_fields(line);
    if (header.size() < kFixedColumns.size() || !std::equal(kFixedColumns.begin(), kFixedColumns.end(), header.begin()))
        throw ParseError("header must start with unit_id,item,onset_lo,onset_hi,event_lo,event_hi", line_no);
    const std::vector<std::string> covariates(header.begin() + static_cast<long>(kFixedColumns.size()), header.end());

    auto resolve = [&](const std::vector<std::string>& names) {
        std::vector<std::size_t> idx;
        if (names.empty()) {
            for (std::size_t c = 0; c < covariates.size(); ++c) idx.push_back(c);
            return idx;
        }
        for (const auto& name : names) {
            const auto pos = std::find(covariates.begin(), covariates.end(), name);
            if (pos == covariates.end()) throw ValidationError("schema references unknown column '" + name + "'");
            idx.push_back(static_cast<std::size_t>(pos - covariates.begin()));
        }
        return idx;
    };
    const auto onset_idx = resolve(schema.onset_columns);
    const auto event_idx = resolve(schema.event_columns);
    if (onset_idx.empty() || event_idx.empty()) throw ValidationError("at least one covariate column is required");

    struct Row {
        std::size_t item;
        ItemRecord record;
    };
    std::vector<std::string> unit_order;
    std::unordered_map<std::string, std::vector<Row>> rows_by_unit;
    std::size_t max_item = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(fields.size()),
                             line_no);
        const auto& unit = fields[0];
        if (unit.empty()) throw ParseError("empty unit_id", line_no);
        const double item_value = parse_number(fields[1], "item", line_no);
        if (!(item_value >= 1.0) || item_value != static_cast<double>(static_cast<std::size_t>(item_value)))
            throw ParseError("item must be a positive integer", line_no);
        const auto item = static_cast<std::size_t>(item_value);

        ItemRecord rec;
        rec.present = true;
        rec.onset = {parse_number(fields[2], "onset_lo", line_no), parse_upper(fields[3], "onset_hi", line_no)};
        rec.event = {parse_number(fields[4], "event_lo", line_no), parse_upper(fields[5], "event_hi", line_no)};
        std::vector<double> cov(covariates.size());
        for (std::size_t c = 0; c < covariates.size(); ++c)
            cov[c] = parse_number(fields[kFixedColumns.size() + c], covariates[c].c_str(), line_no);
        rec.onset_covariates.resize(static_cast<Eigen::Index>(onset_idx.size()));
        for (std::size_t k = 0; k < onset_idx.size(); ++k) rec.onset_covariates(static_cast<Eigen::Index>(k)) = cov[onset_idx[k]];
        rec.event_covariates.resize(static_cast<Eigen::Index>(event_idx.size()));
        for (std::size_t k = 0; k < event_idx.size(); ++k) rec.event_covariates(static_cast<Eigen::Index>(k)) = cov[event_idx[k]];

        auto [pos, inserted] = rows_by_unit.try_emplace(unit);
        if (inserted) unit_order.push_back(unit);
        for (const auto& existing : pos->second)
            if (existing.item == item) throw ValidationError(describe(unit, item) + ": duplicate row (line " + std::to_string(line_no) + ")");
        pos->second.push_back({item, std::move(rec)});
        max_item = std::max(max_item, item);
    }

    Dataset data;
    data.n_items = schema.n_items > 0 ? schema.n_items : max_item;
    if (max_item > data.n_items) throw ValidationError("item index exceeds the declared item count");
    data.p = onset_idx.size();
    data.q = event_idx.size();
    for (auto c : onset_idx) data.onset_covariate_names.push_back(covariates[c]);
    for (auto c : event_idx) data.event_covariate_names.push_back(covariates[c]);
    data.units.reserve(unit_order.size());
    for (const auto& id : unit_order) {
        IntervalObservation obs;
        obs.unit_id = id;
        obs.items.resize(data.n_items);
        for (auto& slot : obs.items) {
            slot.onset_covariates = Vector::Zero(static_cast<Eigen::Index>(data.p));
            slot.event_covariates = Vector::Zero(static_cast<Eigen::Index>(data.q));
        }
        for (auto& row : rows_by_unit[id]) obs.items[row.item - 1] = std::move(row.record);
        data.units.push_back(std::move(obs));
    }
    data.validate();
    return data;
}

Dataset ingest_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open data file " + path.string());
    return parse_csv(in, schema);
}

std::string format_double(double x) {
    if (x == kInf) return "inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

void write_csv(const Dataset& data, std::ostream& out) {
    std::vector<std::string> columns;
    for (const auto* names : {&data.onset_covariate_names, &data.event_covariate_names})
        for (const auto& n : *names)
            if (std::find(columns.begin(), columns.end(), n) == columns.end()) columns.push_back(n);

    out << "unit_id,item,onset_lo,onset_hi,event_lo,event_hi";
    for (const auto& c : columns) out << ',' << c;
    out << '\n';
    for (const auto& unit : data.units) {
        for (std::size_t j = 0; j < unit.items.size(); ++j) {
            const auto& it = unit.items[j];
            if (!it.present) continue;
            out << unit.unit_id << ',' << (j + 1) << ',' << format_double(it.onset.lower) << ','
                << format_double(it.onset.upper) << ',' << format_double(it.event.lower) << ','
                << format_double(it.event.upper);
            for (const auto& c : columns) {
                double v = 0.0;
                const auto o = std::find(data.onset_covariate_names.begin(), data.onset_covariate_names.end(), c);
                if (o != data.onset_covariate_names.end()) {
                    v = it.onset_covariates(o - data.onset_covariate_names.begin());
                } else {
                    const auto e = std::find(data.event_covariate_names.begin(), data.event_covariate_names.end(), c);
                    v = it.event_covariates(e - data.event_covariate_names.begin());
                }
                out << ',' << format_double(v);
            }
            out << '\n';
        }
    }
}

void export_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    write_csv(data, out);
}

DesignMatrix build_design(const IntervalObservation& unit, std::size_t p, std::size_t q) {
    const std::size_t n = unit.items.size();
    DesignMatrix design;
    design.n_items = n;
    design.p = p;
    design.q = q;
    design.values = Matrix::Zero(static_cast<Eigen::Index>(2 * n), static_cast<Eigen::Index>(n * (p + q)));
    for (std::size_t j = 0; j < n; ++j) {
        const auto& it = unit.items[j];
        const auto row_o = static_cast<Eigen::Index>(j);
        const auto row_t = static_cast<Eigen::Index>(n + j);
        design.values.block(row_o, static_cast<Eigen::Index>(j * p), 1, static_cast<Eigen::Index>(p)) =
            it.onset_covariates.transpose();
        design.values.block(row_t, static_cast<Eigen::Index>(n * p + j * q), 1, static_cast<Eigen::Index>(q)) =
            it.event_covariates.transpose();
    }
    return design;
}

std::vector<DesignMatrix> build_designs(const Dataset& data) {
    std::vector<DesignMatrix> designs;
    designs.reserve(data.units.size());
    for (const auto& unit : data.units) designs.push_back(build_design(unit, data.p, data.q));
    return designs;
}

}  // namespace ldpd
