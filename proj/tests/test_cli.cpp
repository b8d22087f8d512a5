// End-to-end checks of the command-line tool. Each case runs the built binary
// (path injected as HERDLAB_BIN) in a scratch directory and inspects exit
// codes, files, and streams.
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "herdlab/core.hpp"
#include "herdlab/herding.hpp"
#include "herdlab/ingest.hpp"
#include "herdlab/speed.hpp"

namespace fs = std::filesystem;
using namespace herdlab;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "herdlab_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// env is prepended verbatim, e.g. "HERDLAB_THREADS=1"
CliResult run_cli(const std::string& args, const fs::path& dir, const std::string& env = "") {
    const fs::path out_file = dir / "stdout.txt";
    const fs::path err_file = dir / "stderr.txt";
    std::string cmd;
    if (!env.empty()) cmd += env + " ";
    cmd += std::string(HERDLAB_BIN) + " " + args + " > " + out_file.string() + " 2> " +
           err_file.string();
    const int status = std::system(cmd.c_str());
    CliResult result;
    result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = read_file(out_file);
    result.err = read_file(err_file);
    return result;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

nlohmann::json manifest_without_times(const fs::path& dir) {
    nlohmann::json j = nlohmann::json::parse(read_file(dir / "manifest.json"));
    j.erase("started");
    j.erase("finished");
    return j;
}

} // namespace

TEST_CASE("help and usage errors set the documented exit codes") {
    const fs::path dir = scratch_dir("exit_codes");
    CHECK(run_cli("--help", dir).code == 0);
    CHECK(run_cli("", dir).code == 2);
    CHECK(run_cli("simulate --n 10", dir).code == 2);      // --alpha missing
    CHECK(run_cli("frobnicate --n 10", dir).code == 2);    // unknown subcommand
    const CliResult res = run_cli("simulate --alpha 0.5,0.5 --n 0 --levels 2 --out " +
                                      (dir / "o").string(),
                                  dir);
    CHECK(res.code == 2); // n = 0 fails model validation
    CHECK(!res.err.empty());
}

TEST_CASE("simulate writes deterministic output") {
    const fs::path dir = scratch_dir("determinism");
    const std::string flags = "simulate --alpha 0.1,0.2,0.3,0.2,0.2 --gamma 0.4 --n 500";
    REQUIRE(run_cli(flags + " --seed 99 --out " + (dir / "a").string(), dir).code == 0);
    REQUIRE(run_cli(flags + " --seed 99 --out " + (dir / "b").string(), dir).code == 0);
    REQUIRE(run_cli(flags + " --seed 100 --out " + (dir / "c").string(), dir).code == 0);

    CHECK(read_file(dir / "a" / "ratings.csv") == read_file(dir / "b" / "ratings.csv"));
    CHECK(manifest_without_times(dir / "a") == manifest_without_times(dir / "b"));
    CHECK(read_file(dir / "a" / "ratings.csv") != read_file(dir / "c" / "ratings.csv"));
}

TEST_CASE("simulate averages obey the law of large numbers") {
    const fs::path dir = scratch_dir("lln");
    const CliResult res = run_cli(
        "simulate --alpha 0.01,0.02,0.07,0.4,0.5 --n 100000 --seed 2 --out " +
            (dir / "run").string(),
        dir);
    REQUIRE(res.code == 0);
    CHECK(res.out.empty()); // data reaches stdout only under --stdout

    const LoadedDataset ds = load_csv((dir / "run" / "ratings.csv").string(), RatingScale(5));
    REQUIRE(ds.items.size() == 1);
    const RatingSequence& seq = ds.items.begin()->second;
    REQUIRE(seq.size() == 100000);
    double sum = 0.0;
    for (std::size_t pos = 0; pos < seq.size(); ++pos) sum += seq.rating(pos);
    CHECK(std::abs(sum / static_cast<double>(seq.size()) - 4.36) < 0.02);
}

TEST_CASE("a full cascade repeats the first rating") {
    const fs::path dir = scratch_dir("cascade");
    REQUIRE(run_cli("simulate --alpha 0.5,0,0,0,0.5 --gamma 1 --n 200 --seed 5 --out " +
                        (dir / "run").string(),
                    dir)
                .code == 0);
    const LoadedDataset ds = load_csv((dir / "run" / "ratings.csv").string(), RatingScale(5));
    const RatingSequence& seq = ds.items.begin()->second;
    for (std::size_t pos = 0; pos < seq.size(); ++pos) CHECK(seq.rating(pos) == seq.rating(0));
}

TEST_CASE("simulated data round trips through inference") {
    const fs::path dir = scratch_dir("roundtrip");
    REQUIRE(run_cli("simulate --alpha 0.1,0.15,0.2,0.25,0.3 --gamma 0.5 --n 3000 --seed 77 "
                    "--out " +
                        (dir / "sim").string(),
                    dir)
                .code == 0);
    const CliResult res = run_cli("infer --input " + (dir / "sim" / "ratings.csv").string() +
                                      " --seed 8 --out " + (dir / "fit").string(),
                                  dir);
    REQUIRE(res.code == 0);

    const nlohmann::json j = nlohmann::json::parse(read_file(dir / "fit" / "inference.json"));
    CHECK(j.at("item_id") == "sim");
    CHECK(j.at("n_ratings") == 3000);
    const auto& result = j.at("result");
    CHECK(std::abs(result.at("gamma_tilde_hat").get<double>() - 0.5) <= 0.3);
    const std::vector<double> truth{0.1, 0.15, 0.2, 0.25, 0.3};
    const auto alpha_hat = result.at("alpha_hat").get<std::vector<double>>();
    REQUIRE(alpha_hat.size() == truth.size());
    double l1 = 0.0;
    for (std::size_t m = 0; m < truth.size(); ++m) l1 += std::abs(alpha_hat[m] - truth[m]);
    CHECK(l1 <= 0.4);
    CHECK(result.contains("log_likelihood"));
    CHECK(result.contains("converged"));
}

TEST_CASE("inference refuses a one-rating file") {
    const fs::path dir = scratch_dir("one_rating");
    {
        std::ofstream csv(dir / "tiny.csv");
        csv << "item_id,order_key,rating\nx,1,4\n";
    }
    const CliResult res = run_cli(
        "infer --input " + (dir / "tiny.csv").string() + " --out " + (dir / "fit").string(), dir);
    CHECK(res.code == 2);
    CHECK(!res.err.empty());
}

TEST_CASE("phi tables match the library and oversized grids are refused") {
    const fs::path dir = scratch_dir("phi_table");
    REQUIRE(run_cli("phi --c 0 --gamma 0 --eta 0 --imax 100 --out " + (dir / "run").string(), dir)
                .code == 0);

    const auto rows = parse_csv(read_file(dir / "run" / "phi.csv"));
    REQUIRE(rows.size() == 101);
    CHECK(rows[0] == std::vector<std::string>{"c", "gamma", "eta", "i", "phi"});
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const double i = std::stod(rows[r][3]);
        const double phi_i = std::stod(rows[r][4]);
        CHECK(std::abs(phi_i - 2.0 * i) <= 1e-9 * 2.0 * i);
    }
    // a single combination also gets the dense curve file, and its text
    // round-trips to the library values exactly
    const HerdingParams params(OpinionDistribution::uniform(RatingScale(5)),
                               RateSchedule::constant(0.0), RateSchedule::constant(0.0),
                               WeightRule::unweighted());
    const SpeedCurve curve = speed_curve(params, 100);
    const auto curve_rows = parse_csv(read_file(dir / "run" / "curve.csv"));
    REQUIRE(curve_rows.size() == 101);
    for (std::size_t r = 1; r < curve_rows.size(); ++r)
        CHECK(std::stod(curve_rows[r][1]) == curve.phi[r - 1]);

    CHECK(run_cli("phi --c 0,1 --imax 1000000 --out " + (dir / "big").string(), dir).code == 2);
}

TEST_CASE("phi output decreases in the herding rate") {
    const fs::path dir = scratch_dir("phi_monotone");
    REQUIRE(run_cli("phi --c 1 --gamma 0,0.2,0.5 --imax 50 --istep 49 --out " +
                        (dir / "run").string(),
                    dir)
                .code == 0);
    const auto rows = parse_csv(read_file(dir / "run" / "phi.csv"));
    // per combination: rows for i = 1 and i = 50
    REQUIRE(rows.size() == 7);
    std::vector<double> at50;
    for (std::size_t r = 1; r < rows.size(); ++r)
        if (rows[r][3] == "50") at50.push_back(std::stod(rows[r][4]));
    REQUIRE(at50.size() == 3);
    CHECK(at50[0] > at50[1]);
    CHECK(at50[1] > at50[2]);
}

TEST_CASE("mc output is identical across thread counts") {
    const fs::path dir = scratch_dir("mc");
    const std::string flags =
        "mc --alpha 0.2,0.2,0.2,0.2,0.2 --gamma-tilde 0.4 --n-grid 200,400 --rounds 3 "
        "--restarts 2 --seed 7";
    REQUIRE(run_cli(flags + " --out " + (dir / "a").string(), dir, "HERDLAB_THREADS=1").code == 0);
    REQUIRE(run_cli(flags + " --out " + (dir / "b").string(), dir, "HERDLAB_THREADS=4").code == 0);
    CHECK(read_file(dir / "a" / "errors.csv") == read_file(dir / "b" / "errors.csv"));

    const auto rows = parse_csv(read_file(dir / "a" / "errors.csv"));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"N", "E_alpha_mean", "E_gamma_mean", "rounds"});
    CHECK(rows[1][0] == "200");
    CHECK(rows[2][0] == "400");
    for (std::size_t r = 1; r < rows.size(); ++r) {
        CHECK(std::stod(rows[r][1]) >= 0.0);
        CHECK(std::isfinite(std::stod(rows[r][2])));
        CHECK(rows[r][3] == "3");
    }
}

TEST_CASE("analyze summarizes a small corpus") {
    const fs::path dir = scratch_dir("analyze");
    {
        // two simulated items with different herding strengths
        std::map<std::string, RatingSequence> items;
        const OpinionDistribution alpha({0.1, 0.15, 0.2, 0.25, 0.3}, RatingScale(5));
        items.emplace("mild", simulate(HerdingParams(alpha, RateSchedule::constant(0.3),
                                                     RateSchedule::constant(0.0),
                                                     WeightRule::unweighted()),
                                       400, 11));
        items.emplace("strong", simulate(HerdingParams(alpha, RateSchedule::constant(0.6),
                                                       RateSchedule::constant(0.0),
                                                       WeightRule::unweighted()),
                                         400, 12));
        std::ofstream csv(dir / "corpus.csv");
        write_corpus_csv(items, csv);
    }
    const CliResult res = run_cli("analyze --input " + (dir / "corpus.csv").string() +
                                      " --restarts 3 --eval-index 200 --c-grid 0,0.5 --seed 4 "
                                      "--out " +
                                      (dir / "run").string(),
                                  dir);
    REQUIRE(res.code == 0);
    CHECK(res.err.find("fleet mean gamma_tilde") != std::string::npos);

    const std::string jsonl = read_file(dir / "run" / "items.jsonl");
    std::istringstream lines(jsonl);
    std::string line;
    std::size_t n_lines = 0;
    while (std::getline(lines, line)) {
        const nlohmann::json j = nlohmann::json::parse(line);
        CHECK(j.contains("item_id"));
        CHECK(j.at("result").contains("gamma_tilde_hat"));
        ++n_lines;
    }
    CHECK(n_lines == 2);

    const auto cdf = parse_csv(read_file(dir / "run" / "cdf.csv"));
    REQUIRE(cdf.size() >= 2);
    CHECK(cdf[0] == std::vector<std::string>{"gamma_tilde", "cumulative_fraction"});
    CHECK(std::stod(cdf.back()[1]) == 1.0);

    std::ifstream sweep_in(dir / "run" / "sweep.csv");
    const auto sweep = read_sweep_csv(sweep_in);
    CHECK(sweep.size() == 2);

    CHECK(run_cli("analyze --input " + (dir / "corpus.csv").string() +
                      " --min-ratings 1000 --out " + (dir / "none").string(),
                  dir)
              .code == 2);
}

TEST_CASE("stdout mode streams the table and keeps the manifest") {
    const fs::path dir = scratch_dir("stdout_mode");
    const std::string flags = "simulate --alpha 0.3,0.7 --levels 2 --n 50 --seed 13";
    REQUIRE(run_cli(flags + " --out " + (dir / "file").string(), dir).code == 0);
    const CliResult streamed =
        run_cli(flags + " --stdout --out " + (dir / "stream").string(), dir);
    REQUIRE(streamed.code == 0);

    CHECK(streamed.out == read_file(dir / "file" / "ratings.csv"));
    CHECK(!fs::exists(dir / "stream" / "ratings.csv"));
    CHECK(fs::exists(dir / "stream" / "manifest.json"));
}

TEST_CASE("invalid model parameters are usage errors") {
    const fs::path dir = scratch_dir("bad_params");
    const CliResult bad_alpha = run_cli(
        "simulate --alpha 0.9,0.9 --levels 2 --n 10 --out " + (dir / "a").string(), dir);
    CHECK(bad_alpha.code == 2);
    CHECK(bad_alpha.err.find("error") != std::string::npos);

    CHECK(run_cli("simulate --alpha 0.5,0.5 --levels 2 --gamma 1.5 --n 10 --out " +
                      (dir / "b").string(),
                  dir)
              .code == 2);
    CHECK(run_cli("mc --alpha 0.5,0.5 --levels 2 --gamma-tilde 0 --out " + (dir / "c").string(),
                  dir)
              .code == 2);
    CHECK(run_cli("simulate --alpha 0.5,0.5 --levels 2 --n 10 --misbehave 3,1,5:6 --out " +
                      (dir / "d").string(),
                  dir)
              .code == 2); // k disagrees with the index list
}
