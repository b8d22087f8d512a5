// Command-line front end: simulation, speed tables, inference, Monte Carlo
// error curves, and dataset analysis. Every subcommand writes its outputs plus
// a manifest.json under --out; reruns with the same manifest are
// byte-identical except for the wall times.
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "herdlab/core.hpp"
#include "herdlab/herding.hpp"
#include "herdlab/inference.hpp"
#include "herdlab/ingest.hpp"
#include "herdlab/parallel.hpp"
#include "herdlab/rng.hpp"
#include "herdlab/speed.hpp"

#include "format.hpp"

namespace {

using namespace herdlab;
using herdlab::detail::fmt;

constexpr const char* kVersion = "0.1.0";

double to_double(const std::string& s) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(v))
        throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

std::uint64_t to_u64(const std::string& s) {
    std::uint64_t v = 0;
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end)
        throw std::invalid_argument("not a non-negative integer: '" + s + "'");
    return v;
}

int to_int(const std::string& s) {
    int v = 0;
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end)
        throw std::invalid_argument("not an integer: '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t p = s.find(sep, start);
        if (p == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, p - start));
        start = p + 1;
    }
}

std::vector<double> parse_double_list(const std::string& s, const char* what) {
    if (s.empty()) throw std::invalid_argument(std::string(what) + " list is empty");
    std::vector<double> out;
    for (const std::string& tok : split(s, ',')) out.push_back(to_double(tok));
    return out;
}

// "0.4" -> constant; "0.8*(1-1/i)" -> ramp from 0; "0.2+0.6*(1-1/i)" -> ramp
// from a base
RateSchedule parse_schedule(const std::string& s) {
    static const std::string suffix = "*(1-1/i)";
    if (s.size() > suffix.size() &&
        s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
        std::string head = s.substr(0, s.size() - suffix.size());
        double base = 0.0;
        const std::size_t plus = head.rfind('+');
        if (plus != std::string::npos) {
            base = to_double(head.substr(0, plus));
            head = head.substr(plus + 1);
        }
        return RateSchedule::ramp(base, to_double(head));
    }
    return RateSchedule::constant(to_double(s));
}

// "unweighted" | "c=<exponent>" | "custom:w1,w2,..."
WeightRule parse_rule(const std::string& s) {
    if (s == "unweighted") return WeightRule::unweighted();
    if (s.rfind("c=", 0) == 0) return WeightRule::power_law(to_double(s.substr(2)));
    if (s.rfind("custom:", 0) == 0)
        return WeightRule::custom(parse_double_list(s.substr(7), "custom weight"));
    throw std::invalid_argument("unknown weight rule '" + s +
                                "' (expected unweighted, c=<exponent>, or custom:w1,w2,...)");
}

// "k,m,first-last" or "k,m,i1:i2:..."; k doubles as a consistency check on
// the index count
MisbehaviorSpec parse_misbehavior(const std::string& s) {
    const auto parts = split(s, ',');
    if (parts.size() != 3)
        throw std::invalid_argument("misbehavior spec must be k,m,indices: '" + s + "'");
    const std::uint64_t k = to_u64(parts[0]);
    const int m = to_int(parts[1]);
    std::vector<std::uint64_t> idx;
    const std::size_t dash = parts[2].find('-');
    if (dash != std::string::npos) {
        const std::uint64_t first = to_u64(parts[2].substr(0, dash));
        const std::uint64_t last = to_u64(parts[2].substr(dash + 1));
        for (std::uint64_t i = first; i <= last; ++i) idx.push_back(i);
    } else {
        for (const std::string& tok : split(parts[2], ':')) idx.push_back(to_u64(tok));
    }
    if (idx.size() != k)
        throw std::invalid_argument("misbehavior spec declares k=" + parts[0] + " but lists " +
                                    std::to_string(idx.size()) + " indices");
    return MisbehaviorSpec(m, std::move(idx));
}

std::string iso_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunManifest {
    std::string subcommand;
    std::uint64_t seed = 0;
    nlohmann::json params;
    std::string started;
    std::string finished;
};

std::filesystem::path ensure_out_dir(const std::string& out) {
    const std::filesystem::path dir(out);
    std::filesystem::create_directories(dir);
    return dir;
}

std::ofstream open_file(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
    const nlohmann::json j{{"subcommand", m.subcommand}, {"version", kVersion},
                           {"seed", m.seed},            {"params", m.params},
                           {"started", m.started},      {"finished", m.finished}};
    open_file(dir / "manifest.json") << j.dump(2) << '\n';
}

// the main table goes to stdout under --stdout, to a file otherwise
void deliver(const std::string& table, bool to_stdout, const std::filesystem::path& path) {
    if (to_stdout)
        std::cout << table;
    else
        open_file(path) << table;
}

struct CommonFlags {
    std::string out = "out";
    std::uint64_t seed = 0;
    int levels = 5;
    bool to_stdout = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--out", f.out, "output directory")->capture_default_str();
    cmd->add_option("--seed", f.seed, "master seed")->capture_default_str();
    cmd->add_option("--levels", f.levels, "rating scale size M")->capture_default_str();
    cmd->add_flag("--stdout", f.to_stdout, "write the main table to stdout instead of a file");
}

struct SimulateFlags {
    std::string alpha;
    std::string gamma = "0";
    std::string eta = "0";
    std::string rule = "unweighted";
    std::uint64_t n = 0;
    std::string misbehave;
};

int run_simulate(const SimulateFlags& f, const CommonFlags& common) {
    const RunManifest manifest{
        "simulate",
        common.seed,
        {{"alpha", f.alpha}, {"gamma", f.gamma}, {"eta", f.eta}, {"rule", f.rule},
         {"n", f.n},         {"misbehave", f.misbehave}, {"levels", common.levels}},
        iso_now(),
        ""};

    const RatingScale scale(common.levels);
    const HerdingParams params(
        OpinionDistribution(parse_double_list(f.alpha, "alpha"), scale),
        parse_schedule(f.gamma), parse_schedule(f.eta), parse_rule(f.rule));
    std::optional<MisbehaviorSpec> spec;
    if (!f.misbehave.empty()) spec = parse_misbehavior(f.misbehave);

    const RatingSequence seq = simulate(params, f.n, common.seed, spec ? &*spec : nullptr);

    std::ostringstream table;
    write_ratings_csv(seq, table);
    const auto dir = ensure_out_dir(common.out);
    deliver(table.str(), common.to_stdout, dir / "ratings.csv");

    RunManifest done = manifest;
    done.finished = iso_now();
    write_manifest(dir, done);

    const double avg = average_score(aggregate(seq, params.rule()));
    std::cerr << "simulated " << seq.size() << " ratings, aggregate average score "
              << fmt(avg) << "\n";
    return 0;
}

struct PhiFlags {
    std::string c = "0";
    std::string gamma = "0";
    std::string eta = "0";
    std::uint64_t imax = 1000;
    std::uint64_t istep = 1;
    double epsilon = 0.5;
    std::string misbehave;
};

int run_phi(const PhiFlags& f, const CommonFlags& common) {
    const RunManifest manifest{
        "phi",
        common.seed,
        {{"c", f.c},       {"gamma", f.gamma},     {"eta", f.eta},
         {"imax", f.imax}, {"istep", f.istep},     {"epsilon", f.epsilon},
         {"misbehave", f.misbehave}, {"levels", common.levels}},
        iso_now(),
        ""};

    const auto cs = parse_double_list(f.c, "exponent");
    const auto gs = split(f.gamma, ',');
    const auto es = split(f.eta, ',');
    if (f.imax < 1) throw std::invalid_argument("imax must be positive");
    if (f.istep < 1) throw std::invalid_argument("istep must be positive");
    const std::uint64_t combos = cs.size() * gs.size() * es.size();
    if (combos * f.imax > 1000000)
        throw std::invalid_argument("phi grid needs " + std::to_string(combos * f.imax) +
                                    " evaluations, over the 1e6 cap; shrink the "
                                    "c/gamma/eta lists or imax");
    std::optional<MisbehaviorSpec> spec;
    if (!f.misbehave.empty()) spec = parse_misbehavior(f.misbehave);

    const RatingScale scale(common.levels);
    struct Combo {
        double c;
        std::string gamma, eta;
        std::vector<double> phi;
    };
    std::vector<Combo> grid;
    grid.reserve(static_cast<std::size_t>(combos));
    for (double c : cs)
        for (const auto& g : gs)
            for (const auto& e : es) grid.push_back(Combo{c, g, e, {}});

    std::optional<SpeedCurve> single; // dense curve kept when there is exactly one combo
    parallel_for(grid.size(), [&](std::size_t t) {
        Combo& combo = grid[t];
        const HerdingParams params(OpinionDistribution::uniform(scale),
                                   parse_schedule(combo.gamma), parse_schedule(combo.eta),
                                   WeightRule::power_law(combo.c));
        if (spec) {
            combo.phi = phi_misbehavior_curve(params, *spec, f.epsilon, f.imax);
        } else {
            SpeedCurve curve = speed_curve(params, f.imax);
            combo.phi = curve.phi;
            if (grid.size() == 1) single = std::move(curve);
        }
    });

    std::ostringstream table;
    table << "c,gamma,eta,i,phi\n";
    for (const Combo& combo : grid)
        for (std::uint64_t i = 1; i <= f.imax; i += f.istep)
            table << fmt(combo.c) << ',' << combo.gamma << ',' << combo.eta << ',' << fmt(i) << ','
                  << fmt(combo.phi[static_cast<std::size_t>(i - 1)]) << '\n';

    const auto dir = ensure_out_dir(common.out);
    deliver(table.str(), common.to_stdout, dir / "phi.csv");
    if (single) {
        auto out = open_file(dir / "curve.csv");
        write_csv(*single, out);
    }

    RunManifest done = manifest;
    done.finished = iso_now();
    write_manifest(dir, done);
    std::cerr << "phi table: " << combos << " parameter combination(s) up to i = " << f.imax
              << "\n";
    return 0;
}

struct InferFlags {
    std::string input;
    std::string item;
    std::string rule = "unweighted";
    int restarts = 10;
    int max_iterations = 5000;
};

int run_infer(const InferFlags& f, const CommonFlags& common) {
    const RunManifest manifest{
        "infer",
        common.seed,
        {{"input", f.input}, {"item", f.item}, {"rule", f.rule},
         {"restarts", f.restarts}, {"max_iterations", f.max_iterations},
         {"levels", common.levels}},
        iso_now(),
        ""};

    const WeightRule rule = parse_rule(f.rule);
    const LoadedDataset ds = load_csv(f.input, RatingScale(common.levels));
    if (ds.items.empty()) throw std::invalid_argument("no usable rows in " + f.input);

    std::string item_id;
    if (!f.item.empty()) {
        if (ds.items.find(f.item) == ds.items.end())
            throw std::invalid_argument("item '" + f.item + "' not present in " + f.input);
        item_id = f.item;
    } else if (ds.items.size() == 1) {
        item_id = ds.items.begin()->first;
    } else {
        throw std::invalid_argument(f.input + " holds " + std::to_string(ds.items.size()) +
                                    " items; pick one with --item");
    }
    const RatingSequence& seq = ds.items.at(item_id);

    InferenceConfig config;
    config.restarts = f.restarts;
    config.max_iterations = f.max_iterations;
    config.seed = common.seed;
    const InferenceResult result = infer(seq, rule, config);

    const nlohmann::json j{{"item_id", item_id}, {"n_ratings", seq.size()}, {"result", result}};
    const auto dir = ensure_out_dir(common.out);
    deliver(j.dump(2) + "\n", common.to_stdout, dir / "inference.json");

    RunManifest done = manifest;
    done.finished = iso_now();
    write_manifest(dir, done);
    std::cerr << "inferred gamma_tilde " << fmt(result.gamma_tilde_hat) << " from "
              << seq.size() << " ratings of '" << item_id << "'"
              << (result.converged ? "" : " (not converged)") << "\n";
    return 0;
}

struct McFlags {
    std::string alpha;
    double gamma_tilde = 0.0;
    std::string rule = "unweighted";
    std::string n_grid = "500,1000,2000,5000";
    int rounds = 20;
    int restarts = 6;
    std::string misbehave;
};

int run_mc(const McFlags& f, const CommonFlags& common) {
    const RunManifest manifest{
        "mc",
        common.seed,
        {{"alpha", f.alpha},   {"gamma_tilde", f.gamma_tilde}, {"rule", f.rule},
         {"n_grid", f.n_grid}, {"rounds", f.rounds},           {"restarts", f.restarts},
         {"misbehave", f.misbehave}, {"levels", common.levels}},
        iso_now(),
        ""};

    if (f.rounds < 1) throw std::invalid_argument("rounds must be >= 1");
    if (!(f.gamma_tilde > 0.0) || f.gamma_tilde > 1.0)
        throw std::invalid_argument("gamma-tilde must lie in (0, 1] so relative errors exist");
    const WeightRule rule = parse_rule(f.rule);
    const RatingScale scale(common.levels);
    const OpinionDistribution alpha(parse_double_list(f.alpha, "alpha"), scale);
    std::vector<std::uint64_t> grid;
    for (const std::string& tok : split(f.n_grid, ',')) grid.push_back(to_u64(tok));
    if (grid.empty()) throw std::invalid_argument("empty N grid");
    std::optional<MisbehaviorSpec> spec;
    if (!f.misbehave.empty()) spec = parse_misbehavior(f.misbehave);

    const HerdingParams params(alpha, RateSchedule::constant(f.gamma_tilde),
                               RateSchedule::constant(0.0), rule);

    // one cell per (round, N); rounds share their two derived seeds across the
    // whole N grid so error curves use common random numbers
    const std::size_t cells = static_cast<std::size_t>(f.rounds) * grid.size();
    std::vector<double> e_alpha(cells, 0.0), e_gamma(cells, 0.0);
    parallel_for(cells, [&](std::size_t t) {
        const std::size_t round = t / grid.size();
        const std::uint64_t n = grid[t % grid.size()];
        const std::uint64_t sim_seed = derive_seed(common.seed, 2 * round);
        const std::uint64_t inf_seed = derive_seed(common.seed, 2 * round + 1);
        const RatingSequence seq = simulate(params, n, sim_seed, spec ? &*spec : nullptr);
        InferenceConfig config;
        config.restarts = f.restarts;
        config.seed = inf_seed;
        const InferenceResult result = infer(seq, rule, config);
        const auto [ea, eg] = relative_errors(result, alpha, f.gamma_tilde);
        e_alpha[t] = ea;
        e_gamma[t] = eg;
    });

    std::ostringstream table;
    table << "N,E_alpha_mean,E_gamma_mean,rounds\n";
    for (std::size_t gidx = 0; gidx < grid.size(); ++gidx) {
        double sa = 0.0, sg = 0.0;
        for (int r = 0; r < f.rounds; ++r) {
            sa += e_alpha[static_cast<std::size_t>(r) * grid.size() + gidx];
            sg += e_gamma[static_cast<std::size_t>(r) * grid.size() + gidx];
        }
        table << fmt(grid[gidx]) << ',' << fmt(sa / f.rounds) << ',' << fmt(sg / f.rounds) << ','
              << f.rounds << '\n';
    }

    const auto dir = ensure_out_dir(common.out);
    deliver(table.str(), common.to_stdout, dir / "errors.csv");

    RunManifest done = manifest;
    done.finished = iso_now();
    write_manifest(dir, done);
    std::cerr << "monte carlo: " << f.rounds << " round(s) x " << grid.size() << " grid point(s)"
              << (spec ? " with misbehavior" : "") << "\n";
    return 0;
}

struct AnalyzeFlags {
    std::string input;
    std::size_t min_ratings = 2;
    std::string rule = "unweighted";
    int restarts = 10;
    std::uint64_t eval_index = 5000;
    std::string c_grid = "0,0.2,0.5,0.8,1";
};

int run_analyze(const AnalyzeFlags& f, const CommonFlags& common) {
    const RunManifest manifest{
        "analyze",
        common.seed,
        {{"input", f.input},       {"min_ratings", f.min_ratings}, {"rule", f.rule},
         {"restarts", f.restarts}, {"eval_index", f.eval_index},   {"c_grid", f.c_grid},
         {"levels", common.levels}},
        iso_now(),
        ""};

    const WeightRule rule = parse_rule(f.rule);
    const LoadedDataset ds = load_csv(f.input, RatingScale(common.levels));
    const auto kept = filter_items(ds.items, f.min_ratings);
    if (kept.empty())
        throw std::invalid_argument("no items with at least " + std::to_string(f.min_ratings) +
                                    " ratings in " + f.input);

    InferenceConfig config;
    config.restarts = f.restarts;
    config.seed = common.seed;
    const DatasetAnalysis analysis =
        analyze_dataset(kept, rule, config, f.eval_index,
                        parse_double_list(f.c_grid, "exponent"));

    const auto dir = ensure_out_dir(common.out);
    {
        auto out = open_file(dir / "items.jsonl");
        write_items_jsonl(analysis.items, out);
    }
    {
        auto out = open_file(dir / "sweep.csv");
        write_sweep_csv(analysis.sweep, out);
    }
    std::ostringstream cdf;
    write_cdf_csv(analysis.cdf, cdf);
    deliver(cdf.str(), common.to_stdout, dir / "cdf.csv");

    RunManifest done = manifest;
    done.finished = iso_now();
    write_manifest(dir, done);

    std::cerr << "analyzed " << kept.size() << " of " << ds.items.size() << " items (min "
              << f.min_ratings << " ratings)\n";
    if (analysis.non_converged > 0)
        std::cerr << "warning: " << analysis.non_converged
                  << " item(s) did not converge; excluded from the cdf and the mean\n";
    char line[128];
    std::snprintf(line, sizeof(line), "fleet mean gamma_tilde: %.4f\n", analysis.mean_gamma_tilde);
    std::cerr << line;
    if (!analysis.sweep.empty()) {
        std::snprintf(line, sizeof(line), "speed-up over c=0 at i=%llu: %.2f%%\n",
                      static_cast<unsigned long long>(f.eval_index),
                      100.0 * speedup_from_sweep(analysis.sweep));
        std::cerr << line;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rating dynamics toolkit: simulate herded rating streams, compute "
                 "convergence-speed tables, and infer herding strength from data"};
    app.require_subcommand(1);

    SimulateFlags sim;
    CommonFlags sim_common;
    auto* sim_cmd = app.add_subcommand("simulate", "draw a rating sequence from the model");
    sim_cmd->add_option("--alpha", sim.alpha, "ground-truth opinion, comma-separated simplex")
        ->required();
    sim_cmd->add_option("--gamma", sim.gamma, "herding strength, constant or a*(1-1/i)")
        ->capture_default_str();
    sim_cmd->add_option("--eta", sim.eta, "review selection accuracy, same forms as --gamma")
        ->capture_default_str();
    sim_cmd->add_option("--rule", sim.rule, "unweighted | c=<exponent> | custom:w1,w2,...")
        ->capture_default_str();
    sim_cmd->add_option("--n", sim.n, "number of ratings")->required();
    sim_cmd->add_option("--misbehave", sim.misbehave,
                        "inject k copies of level m: k,m,first-last or k,m,i1:i2:...");
    add_common(sim_cmd, sim_common);

    PhiFlags phi;
    CommonFlags phi_common;
    auto* phi_cmd = app.add_subcommand("phi", "tabulate the convergence-speed metric");
    phi_cmd->add_option("--c", phi.c, "power-law exponents, comma-separated")
        ->capture_default_str();
    phi_cmd->add_option("--gamma", phi.gamma, "herding schedules, comma-separated")
        ->capture_default_str();
    phi_cmd->add_option("--eta", phi.eta, "selection schedules, comma-separated")
        ->capture_default_str();
    phi_cmd->add_option("--imax", phi.imax, "evaluate i = 1..imax")->capture_default_str();
    phi_cmd->add_option("--istep", phi.istep, "emit every istep-th row")->capture_default_str();
    phi_cmd->add_option("--epsilon", phi.epsilon, "estimation error for the misbehavior metric")
        ->capture_default_str();
    phi_cmd->add_option("--misbehave", phi.misbehave,
                        "score the injected-ratings metric instead: k,m,indices");
    add_common(phi_cmd, phi_common);

    InferFlags inf;
    CommonFlags inf_common;
    auto* inf_cmd = app.add_subcommand("infer", "fit (alpha, gamma_tilde) to a ratings file");
    inf_cmd->add_option("--input", inf.input, "ratings CSV (item_id,order_key,rating)")
        ->required();
    inf_cmd->add_option("--item", inf.item, "item to fit when the file holds several");
    inf_cmd->add_option("--rule", inf.rule, "aggregation rule the platform used")
        ->capture_default_str();
    inf_cmd->add_option("--restarts", inf.restarts, "optimizer restarts")->capture_default_str();
    inf_cmd->add_option("--max-iters", inf.max_iterations, "iteration cap per restart")
        ->capture_default_str();
    add_common(inf_cmd, inf_common);

    McFlags mc;
    CommonFlags mc_common;
    auto* mc_cmd = app.add_subcommand("mc", "simulate-infer error curves over an N grid");
    mc_cmd->add_option("--alpha", mc.alpha, "ground-truth opinion")->required();
    mc_cmd->add_option("--gamma-tilde", mc.gamma_tilde, "effective herding strength in (0,1]")
        ->required();
    mc_cmd->add_option("--rule", mc.rule, "aggregation rule")->capture_default_str();
    mc_cmd->add_option("--n-grid", mc.n_grid, "sequence lengths, comma-separated")
        ->capture_default_str();
    mc_cmd->add_option("--rounds", mc.rounds, "Monte Carlo rounds per N")->capture_default_str();
    mc_cmd->add_option("--restarts", mc.restarts, "optimizer restarts per fit")
        ->capture_default_str();
    mc_cmd->add_option("--misbehave", mc.misbehave, "inject ratings into every simulation");
    add_common(mc_cmd, mc_common);

    AnalyzeFlags ana;
    CommonFlags ana_common;
    auto* ana_cmd = app.add_subcommand("analyze", "per-item inference over a ratings corpus");
    ana_cmd->add_option("--input", ana.input, "ratings CSV")->required();
    ana_cmd->add_option("--min-ratings", ana.min_ratings, "drop items with fewer ratings")
        ->capture_default_str();
    ana_cmd->add_option("--rule", ana.rule, "aggregation rule")->capture_default_str();
    ana_cmd->add_option("--restarts", ana.restarts, "optimizer restarts per item")
        ->capture_default_str();
    ana_cmd->add_option("--eval-index", ana.eval_index, "i at which the exponent sweep reads phi")
        ->capture_default_str();
    ana_cmd->add_option("--c-grid", ana.c_grid, "exponents for the sweep")->capture_default_str();
    add_common(ana_cmd, ana_common);

    try {
        app.parse(argc, argv);
        if (sim_cmd->parsed()) return run_simulate(sim, sim_common);
        if (phi_cmd->parsed()) return run_phi(phi, phi_common);
        if (inf_cmd->parsed()) return run_infer(inf, inf_common);
        if (mc_cmd->parsed()) return run_mc(mc, mc_common);
        if (ana_cmd->parsed()) return run_analyze(ana, ana_common);
        return 2; // unreachable with require_subcommand(1)
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e); // prints help or the usage error
        return code == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
