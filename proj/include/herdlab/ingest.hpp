#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "herdlab/core.hpp"
#include "herdlab/inference.hpp"

namespace herdlab {

// Column names in an input ratings CSV. Extra columns are ignored, so files
// produced by the simulator (which add an `injected` column) load unchanged.
struct CsvColumns {
    std::string item_id = "item_id";
    std::string order_key = "order_key";
    std::string rating = "rating";
};

struct LoadStats {
    std::size_t rows_total = 0;        // data rows seen
    std::size_t rows_unparseable = 0;  // wrong field count / non-numeric fields
    std::size_t rows_out_of_range = 0; // rating outside 1..M, skipped
};

struct LoadedDataset {
    std::map<std::string, RatingSequence> items; // keyed by item id, each in order-key order
    LoadStats stats;
};

// Loads a header-bearing comma-separated file and groups rows per item,
// sorted by order_key ascending (numeric; epoch timestamps and plain ranks
// both work), ties broken by file row order. Rows with out-of-range ratings
// are skipped and counted. Unparseable rows above 1% of the data rows are a
// hard error that lists the offending row numbers.
LoadedDataset load_csv(const std::string& path, RatingScale scale,
                       const CsvColumns& columns = {});

// Keeps items with at least min_ratings ratings.
std::map<std::string, RatingSequence> filter_items(const std::map<std::string, RatingSequence>& items,
                                                   std::size_t min_ratings);

struct ItemAnalysis {
    std::string item_id;
    std::size_t n_ratings = 0;
    InferenceResult result;
};

struct CdfPoint {
    double gamma_tilde = 0.0;
    double cumulative_fraction = 0.0;
};

struct SweepPoint {
    double c = 0.0;
    std::uint64_t i = 0;
    double phi = 0.0;
};

struct DatasetAnalysis {
    std::vector<ItemAnalysis> items;
    std::vector<CdfPoint> cdf;      // over converged items, sorted ascending
    double mean_gamma_tilde = 0.0;  // fleet mean over converged items (NaN if none)
    std::size_t non_converged = 0;  // excluded from cdf and the mean
    std::vector<SweepPoint> sweep;  // phi at eval_index per c, at the fleet mean strength
};

// Per-item inference (parallel across items) followed by the fleet-level
// artifacts: the CDF of inferred herding strengths and a phi sweep over the
// exponent grid with gamma set to the fleet mean (constant, eta = 0) at the
// given evaluation index.
DatasetAnalysis analyze_dataset(const std::map<std::string, RatingSequence>& items,
                                const WeightRule& rule, const InferenceConfig& config,
                                std::uint64_t eval_index, const std::vector<double>& c_grid);

// Relative speed-up of the best exponent over c = 0 at matching i:
// phi_best / phi_{c=0} - 1. Requires a c = 0 row.
double speedup_from_sweep(const std::vector<SweepPoint>& sweep);

// Writers. Numbers are emitted in shortest round-trip form so reruns are
// byte-identical and parsing back loses nothing.
void write_items_jsonl(const std::vector<ItemAnalysis>& items, std::ostream& out);
void write_cdf_csv(const std::vector<CdfPoint>& cdf, std::ostream& out);
void write_sweep_csv(const std::vector<SweepPoint>& sweep, std::ostream& out);
std::vector<SweepPoint> read_sweep_csv(std::istream& in);

// Single simulated sequence as a loadable CSV: item_id,order_key,rating,
// injected, with order_key = 1-based position.
void write_ratings_csv(const RatingSequence& seq, std::ostream& out,
                       const std::string& item_id = "sim", const CsvColumns& columns = {});

// Multi-item corpus in the same format.
void write_corpus_csv(const std::map<std::string, RatingSequence>& items, std::ostream& out,
                      const CsvColumns& columns = {});

} // namespace herdlab
