#include "herdlab/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "herdlab/parallel.hpp"
#include "herdlab/speed.hpp"
#include "format.hpp"

#include <json.hpp>

namespace herdlab {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

bool parse_double_field(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc{} && res.ptr == end && std::isfinite(out);
}

bool parse_int_field(const std::string& s, int& out) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc{} && res.ptr == end;
}

std::size_t resolve_column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] == name) return k;
    std::string have;
    for (const auto& h : header) have += (have.empty() ? "" : ", ") + h;
    throw std::invalid_argument("column '" + name + "' not found in header (" + have + ")");
}

struct RawRow {
    double order_key;
    int rating;
};

} // namespace

LoadedDataset load_csv(const std::string& path, RatingScale scale, const CsvColumns& columns) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open ratings file: " + path);

    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("ratings file is empty (no header): " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_fields(line);
    const std::size_t col_item = resolve_column(header, columns.item_id);
    const std::size_t col_order = resolve_column(header, columns.order_key);
    const std::size_t col_rating = resolve_column(header, columns.rating);

    LoadStats stats;
    std::map<std::string, std::vector<RawRow>> grouped;
    std::vector<std::size_t> bad_lines;
    std::size_t line_no = 1; // header was line 1
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++stats.rows_total;

        const std::vector<std::string> fields = split_fields(line);
        double order = 0.0;
        int rating = 0;
        if (fields.size() != header.size() || !parse_double_field(fields[col_order], order) ||
            !parse_int_field(fields[col_rating], rating)) {
            ++stats.rows_unparseable;
            if (bad_lines.size() < 10) bad_lines.push_back(line_no);
            continue;
        }
        if (rating < 1 || rating > scale.M) {
            ++stats.rows_out_of_range;
            continue;
        }
        grouped[fields[col_item]].push_back(RawRow{order, rating});
    }

    if (stats.rows_unparseable > 0 &&
        static_cast<double>(stats.rows_unparseable) > 0.01 * static_cast<double>(stats.rows_total)) {
        std::string where;
        for (std::size_t ln : bad_lines) where += (where.empty() ? "" : ", ") + std::to_string(ln);
        throw std::invalid_argument(std::to_string(stats.rows_unparseable) + " of " +
                                    std::to_string(stats.rows_total) +
                                    " rows unparseable (over the 1% threshold), first at lines: " +
                                    where);
    }

    LoadedDataset out;
    out.stats = stats;
    for (auto& [item, rows] : grouped) {
        std::stable_sort(rows.begin(), rows.end(),
                         [](const RawRow& a, const RawRow& b) { return a.order_key < b.order_key; });
        std::vector<int> ratings;
        ratings.reserve(rows.size());
        for (const RawRow& r : rows) ratings.push_back(r.rating);
        out.items.emplace(item, RatingSequence(scale, std::move(ratings)));
    }
    return out;
}

std::map<std::string, RatingSequence> filter_items(
    const std::map<std::string, RatingSequence>& items, std::size_t min_ratings) {
    std::map<std::string, RatingSequence> out;
    for (const auto& [id, seq] : items)
        if (seq.size() >= min_ratings) out.emplace(id, seq);
    return out;
}

DatasetAnalysis analyze_dataset(const std::map<std::string, RatingSequence>& items,
                                const WeightRule& rule, const InferenceConfig& config,
                                std::uint64_t eval_index, const std::vector<double>& c_grid) {
    if (items.empty()) throw std::invalid_argument("no items to analyze");
    if (eval_index < 1) throw std::invalid_argument("evaluation index must be positive");
    if (c_grid.empty()) throw std::invalid_argument("exponent grid is empty");

    std::vector<const std::map<std::string, RatingSequence>::value_type*> rows;
    rows.reserve(items.size());
    for (const auto& kv : items) rows.push_back(&kv);

    std::vector<std::optional<ItemAnalysis>> slots(rows.size());
    parallel_for(rows.size(), [&](std::size_t t) {
        const auto& [id, seq] = *rows[t];
        slots[t] = ItemAnalysis{id, seq.size(), infer(seq, rule, config)};
    });

    DatasetAnalysis out;
    out.items.reserve(slots.size());
    std::vector<double> strengths;
    for (auto& slot : slots) {
        out.items.push_back(std::move(*slot));
        const InferenceResult& res = out.items.back().result;
        if (res.converged)
            strengths.push_back(res.gamma_tilde_hat);
        else
            ++out.non_converged;
    }

    std::sort(strengths.begin(), strengths.end());
    out.cdf.reserve(strengths.size());
    for (std::size_t k = 0; k < strengths.size(); ++k)
        out.cdf.push_back(CdfPoint{strengths[k],
                                   static_cast<double>(k + 1) / static_cast<double>(strengths.size())});

    if (strengths.empty()) {
        out.mean_gamma_tilde = std::numeric_limits<double>::quiet_NaN();
        return out; // no fleet mean, no sweep
    }
    double sum = 0.0;
    for (double g : strengths) sum += g;
    out.mean_gamma_tilde = sum / static_cast<double>(strengths.size());

    const RatingScale scale = rows.front()->second.scale();
    out.sweep.reserve(c_grid.size());
    for (double c : c_grid) {
        // phi reads only the rates and the rule; alpha is a placeholder
        HerdingParams hp(OpinionDistribution::uniform(scale),
                         RateSchedule::constant(out.mean_gamma_tilde), RateSchedule::constant(0.0),
                         WeightRule::power_law(c));
        out.sweep.push_back(SweepPoint{c, eval_index, phi(hp, eval_index)});
    }
    return out;
}

double speedup_from_sweep(const std::vector<SweepPoint>& sweep) {
    if (sweep.empty()) throw std::invalid_argument("empty sweep table");
    const std::uint64_t i0 = sweep.front().i;
    double base = std::numeric_limits<double>::quiet_NaN();
    double best = -std::numeric_limits<double>::infinity();
    for (const SweepPoint& p : sweep) {
        if (p.i != i0)
            throw std::invalid_argument("sweep rows evaluated at different indices");
        if (p.c == 0.0) base = p.phi;
        best = std::max(best, p.phi);
    }
    if (!std::isfinite(base)) throw std::invalid_argument("sweep table has no c = 0 row");
    return best / base - 1.0;
}

void write_items_jsonl(const std::vector<ItemAnalysis>& items, std::ostream& out) {
    for (const ItemAnalysis& it : items) {
        nlohmann::json j{
            {"item_id", it.item_id}, {"n_ratings", it.n_ratings}, {"result", it.result}};
        out << j.dump() << '\n';
    }
}

void write_cdf_csv(const std::vector<CdfPoint>& cdf, std::ostream& out) {
    out << "gamma_tilde,cumulative_fraction\n";
    for (const CdfPoint& p : cdf)
        out << detail::fmt(p.gamma_tilde) << ',' << detail::fmt(p.cumulative_fraction) << '\n';
}

void write_sweep_csv(const std::vector<SweepPoint>& sweep, std::ostream& out) {
    out << "c,i,phi\n";
    for (const SweepPoint& p : sweep)
        out << detail::fmt(p.c) << ',' << detail::fmt(p.i) << ',' << detail::fmt(p.phi) << '\n';
}

std::vector<SweepPoint> read_sweep_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("sweep CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "c,i,phi") throw std::invalid_argument("unexpected sweep CSV header: " + line);
    std::vector<SweepPoint> out;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        double c = 0.0, phi_v = 0.0, i_v = 0.0;
        if (fields.size() != 3 || !parse_double_field(fields[0], c) ||
            !parse_double_field(fields[1], i_v) || !parse_double_field(fields[2], phi_v))
            throw std::invalid_argument("unparseable sweep CSV row: " + line);
        out.push_back(SweepPoint{c, static_cast<std::uint64_t>(i_v), phi_v});
    }
    return out;
}

void write_ratings_csv(const RatingSequence& seq, std::ostream& out, const std::string& item_id,
                       const CsvColumns& columns) {
    out << columns.item_id << ',' << columns.order_key << ',' << columns.rating << ",injected\n";
    for (std::size_t pos = 0; pos < seq.size(); ++pos)
        out << item_id << ',' << detail::fmt(static_cast<std::uint64_t>(pos + 1)) << ','
            << seq.rating(pos) << ',' << (seq.injected(pos) ? 1 : 0) << '\n';
}

void write_corpus_csv(const std::map<std::string, RatingSequence>& items, std::ostream& out,
                      const CsvColumns& columns) {
    out << columns.item_id << ',' << columns.order_key << ',' << columns.rating << ",injected\n";
    for (const auto& [id, seq] : items)
        for (std::size_t pos = 0; pos < seq.size(); ++pos)
            out << id << ',' << detail::fmt(static_cast<std::uint64_t>(pos + 1)) << ','
                << seq.rating(pos) << ',' << (seq.injected(pos) ? 1 : 0) << '\n';
}

} // namespace herdlab
