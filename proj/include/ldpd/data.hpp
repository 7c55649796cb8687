#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "ldpd/distributions.hpp"

namespace ldpd {

/// Interval (lower, upper] in years. lower == 0 encodes left-censoring and
/// upper == +inf encodes right-censoring.
struct CensoringInterval {
    double lower = 0.0;
    double upper = kInf;

    bool left_censored() const { return lower == 0.0; }
    bool right_censored() const { return upper == kInf; }
    bool contains(double t) const { return t > lower && t <= upper; }
    bool valid() const { return lower >= 0.0 && lower < upper; }
};

struct ItemRecord {
    bool present = false;
    CensoringInterval onset;  // T^O
    CensoringInterval event;  // T^E = T^O + T^T
    Vector onset_covariates;  // x^O, length p
    Vector event_covariates;  // x^T, length q
};

struct IntervalObservation {
    std::string unit_id;
    std::vector<ItemRecord> items;  // exactly n slots; absent items have present == false

    std::size_t present_count() const;
};

/// Block-diagonal X_i = diag(X^O_i, X^T_i) with 2n rows and n(p+q) columns.
/// Row j < n belongs to onset j; row n + j to the gap of item j. Onset item j
/// owns columns [j p, (j+1) p), gap item j owns [n p + j q, n p + (j+1) q).
struct DesignMatrix {
    Matrix values;
    std::size_t n_items = 0;
    std::size_t p = 0;
    std::size_t q = 0;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
};

/// Column mapping for ingestion. Names refer to covariate header columns; a
/// column may feed both blocks. Empty lists mean "every covariate column".
struct CsvSchema {
    std::vector<std::string> onset_columns;
    std::vector<std::string> event_columns;
    std::size_t n_items = 0;  // 0: infer from the largest item index
};

struct Dataset {
    std::vector<IntervalObservation> units;
    std::size_t n_items = 0;
    std::size_t p = 0;
    std::size_t q = 0;
    std::vector<std::string> onset_covariate_names;
    std::vector<std::string> event_covariate_names;

    std::size_t size() const { return units.size(); }
    std::size_t latent_dim() const { return 2 * n_items; }
    std::size_t coef_dim() const { return n_items * (p + q); }

    /// Throws ValidationError on the first violated invariant.
    void validate() const;
};

Dataset ingest_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
Dataset parse_csv(std::istream& in, const CsvSchema& schema = {});

/// Writes the ingestion schema back out; covariate columns are the union of
/// onset and event names in first-seen order. Absent items are not written.
void export_csv(const Dataset& data, const std::filesystem::path& path);
void write_csv(const Dataset& data, std::ostream& out);

DesignMatrix build_design(const IntervalObservation& unit, std::size_t p, std::size_t q);
std::vector<DesignMatrix> build_designs(const Dataset& data);

/// Shortest decimal text that round-trips; "inf" for +infinity.
std::string format_double(double x);

}  // namespace ldpd
