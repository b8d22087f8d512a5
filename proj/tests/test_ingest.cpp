#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "herdlab/core.hpp"
#include "herdlab/herding.hpp"
#include "herdlab/ingest.hpp"

#include <json.hpp>

using namespace herdlab;

namespace {

const RatingScale kFive(5);

std::filesystem::path tmp_file(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "herdlab_ingest_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string write_file(const std::string& name, const std::string& content) {
    const auto path = tmp_file(name);
    std::ofstream out(path);
    out << content;
    out.close();
    return path.string();
}

} // namespace

TEST_CASE("load a small file") {
    const std::string path = write_file("small.csv",
                                        "item_id,order_key,rating\n"
                                        "a,3,5\n"
                                        "a,1,1\n"
                                        "a,2,3\n");
    const LoadedDataset ds = load_csv(path, kFive);
    CHECK(ds.stats.rows_total == 3);
    CHECK(ds.stats.rows_unparseable == 0);
    CHECK(ds.stats.rows_out_of_range == 0);
    REQUIRE(ds.items.size() == 1);
    CHECK(ds.items.at("a").ratings() == std::vector<int>{1, 3, 5}); // order_key order
}

TEST_CASE("out of range ratings are skipped and counted") {
    const std::string path = write_file("range.csv",
                                        "item_id,order_key,rating\n"
                                        "a,1,0\n"
                                        "a,2,2\n"
                                        "a,3,6\n"
                                        "a,4,4\n");
    const LoadedDataset ds = load_csv(path, kFive);
    CHECK(ds.stats.rows_total == 4);
    CHECK(ds.stats.rows_out_of_range == 2);
    CHECK(ds.items.at("a").ratings() == std::vector<int>{2, 4});
}

TEST_CASE("interleaved items sort independently") {
    const std::string path = write_file("interleaved.csv",
                                        "item_id,order_key,rating\n"
                                        "b,20,1\n"
                                        "a,2,4\n"
                                        "b,10,2\n"
                                        "a,1,3\n");
    const LoadedDataset ds = load_csv(path, kFive);
    REQUIRE(ds.items.size() == 2);
    CHECK(ds.items.at("a").ratings() == std::vector<int>{3, 4});
    CHECK(ds.items.at("b").ratings() == std::vector<int>{2, 1});
}

TEST_CASE("equal order keys keep file order") {
    const std::string path = write_file("ties.csv",
                                        "item_id,order_key,rating\n"
                                        "a,7,1\n"
                                        "a,7,2\n"
                                        "a,7,3\n");
    const LoadedDataset ds = load_csv(path, kFive);
    CHECK(ds.items.at("a").ratings() == std::vector<int>{1, 2, 3});
}

TEST_CASE("load failure modes") {
    CHECK_THROWS_AS(load_csv(tmp_file("does_not_exist.csv").string(), kFive),
                    std::invalid_argument);
    const std::string empty = write_file("empty.csv", "");
    CHECK_THROWS_AS(load_csv(empty, kFive), std::invalid_argument);

    const std::string path = write_file("nocol.csv",
                                        "item_id,when,rating\n"
                                        "a,1,3\n");
    try {
        load_csv(path, kFive);
        FAIL("expected a missing-column error");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("order_key") != std::string::npos);
        CHECK(msg.find("when") != std::string::npos); // lists what the header does have
    }
}

TEST_CASE("unparseable rows above one percent are a hard error") {
    std::string content = "item_id,order_key,rating\n";
    content += "a,not_a_number,3\n"; // line 2
    for (int k = 0; k < 9; ++k) content += "a," + std::to_string(k) + ",3\n";
    const std::string path = write_file("bad10.csv", content);
    try {
        load_csv(path, kFive);
        FAIL("expected an unparseable-rows error");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("lines") != std::string::npos);
        CHECK(msg.find('2') != std::string::npos); // the offending line number
    }
}

TEST_CASE("unparseable rows at one percent are tolerated") {
    std::string content = "item_id,order_key,rating\n";
    content += "a,oops,3\n";
    for (int k = 0; k < 99; ++k) content += "a," + std::to_string(k) + ",3\n";
    const std::string path = write_file("bad100.csv", content);
    const LoadedDataset ds = load_csv(path, kFive);
    CHECK(ds.stats.rows_total == 100);
    CHECK(ds.stats.rows_unparseable == 1);
    CHECK(ds.items.at("a").size() == 99);
}

TEST_CASE("column remapping and extra columns") {
    const std::string path = write_file("remap.csv",
                                        "stars,extra,pid,ts\n"
                                        "5,x,p1,100\n"
                                        "4,y,p1,50\n");
    CsvColumns cols;
    cols.item_id = "pid";
    cols.order_key = "ts";
    cols.rating = "stars";
    const LoadedDataset ds = load_csv(path, kFive, cols);
    CHECK(ds.items.at("p1").ratings() == std::vector<int>{4, 5});
}

TEST_CASE("simulator output loads back unchanged") {
    const HerdingParams p(OpinionDistribution({0.1, 0.2, 0.3, 0.2, 0.2}, kFive),
                          RateSchedule::constant(0.3), RateSchedule::constant(0.0),
                          WeightRule::unweighted());
    const MisbehaviorSpec spec(5, {10, 11});
    const RatingSequence seq = simulate(p, 50, 321, &spec);

    const auto path = tmp_file("roundtrip.csv");
    {
        std::ofstream out(path);
        write_ratings_csv(seq, out);
    }
    const LoadedDataset ds = load_csv(path.string(), kFive);
    CHECK(ds.stats.rows_total == 50);
    CHECK(ds.stats.rows_unparseable == 0); // the injected column is simply ignored
    REQUIRE(ds.items.size() == 1);
    CHECK(ds.items.at("sim").ratings() == seq.ratings());
}

TEST_CASE("corpus writer round trip") {
    std::map<std::string, RatingSequence> items;
    items.emplace("x", RatingSequence(kFive, {1, 2, 3}));
    items.emplace("y", RatingSequence(kFive, {5, 5}));
    const auto path = tmp_file("corpus.csv");
    {
        std::ofstream out(path);
        write_corpus_csv(items, out);
    }
    const LoadedDataset ds = load_csv(path.string(), kFive);
    REQUIRE(ds.items.size() == 2);
    CHECK(ds.items.at("x").ratings() == std::vector<int>{1, 2, 3});
    CHECK(ds.items.at("y").ratings() == std::vector<int>{5, 5});
}

TEST_CASE("filter items by length") {
    std::map<std::string, RatingSequence> items;
    items.emplace("short", RatingSequence(kFive, std::vector<int>(1999, 3)));
    items.emplace("long", RatingSequence(kFive, std::vector<int>(2000, 3)));
    const auto kept = filter_items(items, 2000);
    CHECK(kept.size() == 1);
    CHECK(kept.count("long") == 1);
    CHECK(filter_items(items, 1).size() == 2);
    CHECK(filter_items(items, 5000).empty());
}

TEST_CASE("analyze a small fleet") {
    std::map<std::string, RatingSequence> items;
    const std::vector<double> truths{0.2, 0.4, 0.6};
    for (std::size_t k = 0; k < truths.size(); ++k) {
        const HerdingParams p(OpinionDistribution({0.1, 0.15, 0.2, 0.25, 0.3}, kFive),
                              RateSchedule::constant(truths[k]), RateSchedule::constant(0.0),
                              WeightRule::unweighted());
        items.emplace("item" + std::to_string(k), simulate(p, 1200, 1000 + k));
    }

    InferenceConfig config;
    config.restarts = 6;
    config.seed = 3;
    const DatasetAnalysis analysis =
        analyze_dataset(items, WeightRule::unweighted(), config, 500, {0.0, 0.5});

    REQUIRE(analysis.items.size() == 3);
    CHECK(analysis.items.size() == analysis.cdf.size() + analysis.non_converged);
    for (const ItemAnalysis& it : analysis.items) {
        CHECK(it.n_ratings == 1200);
        const std::size_t k = static_cast<std::size_t>(it.item_id.back() - '0');
        CHECK(std::abs(it.result.gamma_tilde_hat - truths[k]) <= 0.25);
    }

    double prev_g = -1.0, prev_f = 0.0;
    for (const CdfPoint& pt : analysis.cdf) {
        CHECK(pt.gamma_tilde >= prev_g);
        CHECK(pt.cumulative_fraction > prev_f);
        prev_g = pt.gamma_tilde;
        prev_f = pt.cumulative_fraction;
    }
    if (!analysis.cdf.empty()) CHECK(analysis.cdf.back().cumulative_fraction == 1.0);
    CHECK(std::isfinite(analysis.mean_gamma_tilde));

    REQUIRE(analysis.sweep.size() == 2);
    CHECK(analysis.sweep[0].c == 0.0);
    CHECK(analysis.sweep[1].c == 0.5);
    CHECK(analysis.sweep[0].i == 500);
    CHECK(analysis.sweep[1].i == 500);
    CHECK(analysis.sweep[0].phi > 0.0);
    CHECK(analysis.sweep[1].phi > 0.0);

    CHECK_THROWS_AS(analyze_dataset({}, WeightRule::unweighted(), config, 500, {0.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(analyze_dataset(items, WeightRule::unweighted(), config, 0, {0.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(analyze_dataset(items, WeightRule::unweighted(), config, 500, {}),
                    std::invalid_argument);
}

TEST_CASE("speed-up from a sweep table") {
    const std::vector<SweepPoint> sweep{{0.0, 3000, 2785.0}, {0.5, 3000, 3919.0}};
    CHECK(speedup_from_sweep(sweep) == doctest::Approx(3919.0 / 2785.0 - 1.0).epsilon(1e-14));

    const std::vector<SweepPoint> flat{{0.0, 100, 50.0}};
    CHECK(speedup_from_sweep(flat) == 0.0);

    CHECK_THROWS_AS(speedup_from_sweep({}), std::invalid_argument);
    const std::vector<SweepPoint> mixed{{0.0, 100, 50.0}, {0.5, 200, 60.0}};
    CHECK_THROWS_AS(speedup_from_sweep(mixed), std::invalid_argument);
    const std::vector<SweepPoint> nobase{{0.5, 100, 50.0}};
    CHECK_THROWS_AS(speedup_from_sweep(nobase), std::invalid_argument);
}

TEST_CASE("sweep csv round trip") {
    const std::vector<SweepPoint> sweep{{0.0, 3000, 2785.25}, {0.8, 3000, 3266.125}};
    std::ostringstream out;
    write_sweep_csv(sweep, out);
    std::istringstream in(out.str());
    const auto back = read_sweep_csv(in);
    REQUIRE(back.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(back[k].c == sweep[k].c);
        CHECK(back[k].i == sweep[k].i);
        CHECK(back[k].phi == sweep[k].phi); // shortest round-trip formatting
    }

    std::istringstream bad_header("a,b,c\n1,2,3\n");
    CHECK_THROWS_AS(read_sweep_csv(bad_header), std::invalid_argument);
    std::istringstream bad_row("c,i,phi\n0.0,100\n");
    CHECK_THROWS_AS(read_sweep_csv(bad_row), std::invalid_argument);
    std::istringstream headless("");
    CHECK_THROWS_AS(read_sweep_csv(headless), std::invalid_argument);
}

TEST_CASE("item analyses serialize to json lines") {
    std::vector<ItemAnalysis> items;
    items.push_back(ItemAnalysis{
        "p1", 42,
        InferenceResult{OpinionDistribution({0.25, 0.25, 0.25, 0.25}, RatingScale(4)), 0.375,
                        -12.5, 3, true}});
    std::ostringstream out;
    write_items_jsonl(items, out);

    std::istringstream in(out.str());
    std::string line;
    REQUIRE(std::getline(in, line));
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("item_id") == "p1");
    CHECK(j.at("n_ratings") == 42);
    CHECK(j.at("result").at("gamma_tilde_hat") == 0.375);
    CHECK(j.at("result").at("converged") == true);
    CHECK(j.at("result").at("alpha_hat").size() == 4);
    CHECK_FALSE(std::getline(in, line)); // exactly one line per item
}

TEST_CASE("cdf csv writer") {
    const std::vector<CdfPoint> cdf{{0.25, 0.5}, {0.75, 1.0}};
    std::ostringstream out;
    write_cdf_csv(cdf, out);
    CHECK(out.str() == "gamma_tilde,cumulative_fraction\n0.25,0.5\n0.75,1\n");
}
