#pragma once

// Command-line front end.  `run` is the whole program minus main(), so tests
// can drive it with an argument list and capture both streams.
//
// Exit status: 0 success, 1 domain error (a model precondition failed),
// 2 usage error (unknown subcommand/flag, malformed or out-of-range value).

#include <collide/cache_model.hpp>
#include <collide/cache_sim.hpp>
#include <collide/render.hpp>
#include <collide/switch_model.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace collide::cli {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr std::uint64_t kDefaultSeed = 20190613;

/// Parameter grids of the reference tables.
inline constexpr std::array<std::uint64_t, 7> kTableAssociativities{1, 2, 3, 4, 10, 50, 100};
inline constexpr std::uint64_t kTableCapacity = 1000;
inline constexpr std::array<std::uint64_t, 5> kWorkingSetSizes{100, 200, 500, 1000, 2000};
inline constexpr std::uint64_t kWorkingSetCapacity = 4000;
inline constexpr std::uint64_t kWorkingSetAssociativity = 4;
inline constexpr std::array<std::uint64_t, 5> kFractionTableCapacities{100, 200, 500, 1000, 2000};

namespace detail {

struct Params {
    std::string format = "table";
    int digits = 3;
    std::string out_file;
    unsigned workers = 0;

    std::uint64_t sets = 0;
    std::uint64_t assoc = 0;
    std::uint64_t capacity = 0;
    std::uint64_t addresses = 0;
    std::string method = "gf";
    std::uint64_t max_vectors = kDefaultEnumerationCap;
    std::uint64_t trials = 100'000;
    std::uint64_t seed = kDefaultSeed;
    bool histogram = false;
    double fraction = 0.5;

    std::string scenario;
    std::uint64_t length = 0;
    std::uint64_t stride = 0;
    std::uint64_t arrays = 4;
    std::uint64_t offset = 0;
    std::uint64_t page_count = 0;
    std::uint64_t page_size = 0;
    std::uint64_t sweep_pages = 0;
    std::string mapping = "both";
    std::uint64_t line_bytes = 1;
    std::uint64_t reps = 2;

    std::uint64_t in = 0;
    std::uint64_t outbound = 0;
    std::uint64_t max_subsets = kDefaultSubsetCap;
    std::string mode;
    std::uint64_t k_min = 2;
    std::uint64_t k_max = 50;
};

inline CacheGeometry geometry_from(const Params& p, const CLI::App& cmd) {
    const bool have_sets = cmd.count("--sets") > 0;
    const bool have_cap = cmd.count("--capacity") > 0;
    if (!have_sets && !have_cap) throw CLI::RequiredError("--sets or --capacity");
    if (have_cap) {
        auto g = CacheGeometry::from_capacity(p.capacity, p.assoc);
        if (have_sets && g.sets() != p.sets)
            throw CLI::ValidationError("--capacity", "--sets " + std::to_string(p.sets) +
                                                         " disagrees with --capacity / --assoc = " +
                                                         std::to_string(g.sets()));
        return g;
    }
    return CacheGeometry(p.sets, p.assoc);
}

inline std::vector<Column> cols(std::initializer_list<const char*> names) {
    std::vector<Column> c;
    for (auto n : names) c.push_back({n});
    return c;
}

inline Output cache_expected(const Params& p, const CLI::App& cmd) {
    const auto g = geometry_from(p, cmd);
    Output o;
    o.command = "cache expected";
    o.inputs = {{"sets", g.sets()}, {"associativity", g.associativity()}, {"capacity", g.capacity()}};
    o.columns = cols({"sets", "associativity", "capacity", "expected_stored", "expected_fraction"});
    const double stored = expected_stored(g);
    o.rows.push_back({g.sets(), g.associativity(), g.capacity(), Fixed{stored},
                      Fixed{stored / static_cast<double>(g.capacity())}});
    return o;
}

inline Output cache_no_conflict(const Params& p, const CLI::App& cmd) {
    const auto g = geometry_from(p, cmd);
    const WorkingSetQuery q{p.addresses};
    const LogReal prob = p.method == "direct" ? no_conflict_probability_direct(g, q, p.max_vectors)
                                              : no_conflict_probability(g, q);
    Output o;
    o.command = "cache no-conflict";
    o.inputs = {{"sets", g.sets()}, {"associativity", g.associativity()}, {"addresses", p.addresses},
                {"method", p.method}};
    o.columns = cols({"sets", "associativity", "addresses", "method", "probability"});
    o.columns.push_back({"ln_probability", false});
    const Cell ln = prob.is_zero() ? Cell{std::string("-inf")} : Cell{Fixed{prob.log_value()}};
    o.rows.push_back({g.sets(), g.associativity(), p.addresses, p.method, prob, ln});
    return o;
}

inline Output cache_table_1000() {
    Output o;
    o.command = "cache table-1000";
    o.inputs = {{"capacity", kTableCapacity}};
    o.columns = cols({"associativity", "sets", "capacity", "expected_stored", "expected_working_set"});
    for (auto k : kTableAssociativities) {
        const auto g = CacheGeometry::from_capacity(kTableCapacity, k);
        const double stored = expected_stored(g);
        // Whole lines stored, truncated like the reference table.
        o.rows.push_back({k, g.sets(), g.capacity(), Fixed{stored},
                          static_cast<std::uint64_t>(std::floor(stored))});
    }
    return o;
}

inline Output cache_table_worksets() {
    const auto g = CacheGeometry::from_capacity(kWorkingSetCapacity, kWorkingSetAssociativity);
    Output o;
    o.command = "cache table-worksets";
    o.inputs = {{"sets", g.sets()}, {"associativity", g.associativity()}, {"capacity", g.capacity()}};
    o.columns = cols({"working_set_size", "probability"});
    for (auto a : kWorkingSetSizes) o.rows.push_back({a, no_conflict_probability(g, {a})});
    return o;
}

inline Output cache_table_fraction(const Params& p) {
    if (!(p.fraction > 0.0 && p.fraction <= 1.0))
        throw CLI::ValidationError("--fraction", "must be in (0, 1]");
    Output o;
    o.command = "cache table-fraction";
    o.inputs = {{"associativity", p.assoc}, {"fraction", p.fraction}};
    o.columns = cols({"cache_size", "sets", "associativity", "addresses", "probability"});
    for (auto cap : kFractionTableCapacities) {
        const auto g = CacheGeometry::from_capacity(cap, p.assoc);
        const auto a = static_cast<std::uint64_t>(std::floor(p.fraction * static_cast<double>(g.capacity())));
        o.rows.push_back({g.capacity(), g.sets(), g.associativity(), a, no_conflict_probability(g, {a})});
    }
    return o;
}

inline Output cache_simulate(const Params& p, const CLI::App& cmd) {
    const auto g = geometry_from(p, cmd);
    const SimConfig config{p.trials, p.seed, g, p.workers};
    const SimReport r = simulate_random_fill(config, p.addresses);
    Output o;
    o.command = "cache simulate";
    o.seed = p.seed;
    o.inputs = {{"sets", g.sets()},         {"associativity", g.associativity()},
                {"addresses", p.addresses}, {"trials", p.trials},
                {"seed", p.seed}};
    if (p.histogram) {
        o.columns = cols({"addresses_in_set", "set_count", "seed"});
        for (std::size_t j = 0; j < r.occupancy_histogram.size(); ++j)
            if (r.occupancy_histogram[j] != 0)
                o.rows.push_back({std::uint64_t{j}, r.occupancy_histogram[j], p.seed});
        return o;
    }
    o.columns = cols({"sets", "associativity", "addresses", "trials", "seed", "mean_stored",
                      "mean_stored_stderr", "no_conflict_frequency", "no_conflict_stderr"});
    o.rows.push_back({g.sets(), g.associativity(), p.addresses, p.trials, p.seed, Fixed{r.mean_stored},
                      Fixed{r.mean_stored_stderr}, Sci{r.no_conflict_frequency}, Sci{r.no_conflict_stderr}});
    return o;
}

inline std::vector<Cell> trace_row(const std::string& label, const TraceReport& r) {
    return {label,
            r.overall.accesses,
            r.overall.hits,
            r.overall.misses,
            Fixed{r.overall.hit_rate()},
            r.steady_state.accesses,
            r.steady_state.hits,
            r.steady_state.misses,
            Fixed{r.steady_state.hit_rate()}};
}

inline Output cache_trace(const Params& p, const CLI::App& cmd) {
    const auto g = geometry_from(p, cmd);
    const std::uint64_t n = g.capacity();
    AddressStream stream;
    stream.repetitions = p.reps;
    stream.line_bytes = p.line_bytes;
    const std::uint64_t length = p.length ? p.length : n;
    Output o;
    o.command = "cache trace";
    o.inputs = {{"scenario", p.scenario}, {"sets", g.sets()},         {"associativity", g.associativity()},
                {"line_bytes", p.line_bytes}, {"repetitions", p.reps}};
    o.columns = cols({"scenario", "accesses", "hits", "misses", "hit_rate", "steady_accesses",
                      "steady_hits", "steady_misses", "steady_hit_rate"});

    if (p.scenario == "sequential") {
        stream.scenario = scenario::Sequential{length};
    } else if (p.scenario == "strided") {
        stream.scenario = scenario::Strided{length, p.stride ? p.stride : n};
    } else if (p.scenario == "multi-array") {
        stream.scenario = scenario::MultiArray{p.length ? p.length : g.sets(), p.arrays, p.offset ? p.offset : n};
    } else if (p.scenario == "random") {
        o.seed = p.seed;
        stream.scenario = scenario::UniformRandom{length, p.seed};
    } else {
        // paged
        o.seed = p.seed;
        const std::uint64_t page_size = p.page_size ? p.page_size : 1;
        const std::uint64_t page_count = p.page_count ? p.page_count : 2 * ((n + page_size - 1) / page_size);
        o.inputs["page_count"] = page_count;
        o.inputs["page_size"] = page_size;
        o.inputs["mapping"] = p.mapping;
        const auto deg = simulate_paged_degradation(g, page_count, page_size, p.seed, p.sweep_pages, p.reps);
        if (p.mapping != "permuted") o.rows.push_back(trace_row("paged-identity", deg.identity));
        if (p.mapping != "identity") o.rows.push_back(trace_row("paged-permuted", deg.permuted));
        o.columns.push_back({"seed"});
        for (auto& row : o.rows) row.push_back(p.seed);
        return o;
    }
    o.rows.push_back(trace_row(p.scenario, simulate_trace(g, stream)));
    if (o.seed) {
        o.columns.push_back({"seed"});
        o.rows.back().push_back(p.seed);
    }
    return o;
}

inline Output net_prob(const Params& p) {
    const SwitchGeometry g(p.in, p.outbound);
    const Rational prob = no_collision_probability(g);
    Output o;
    o.command = "net prob";
    o.inputs = {{"inbound", p.in}, {"outbound", p.outbound}};
    o.columns = cols({"inbound", "outbound", "total_ports", "double_ports", "single_ports", "probability"});
    o.columns.push_back({"probability_real", false});
    o.rows.push_back({g.inbound(), g.outbound(), g.total_ports(), g.double_ports(), g.single_ports(), prob,
                      Sci{to_double(prob)}});
    return o;
}

inline Output net_enumerate(const Params& p) {
    const SwitchGeometry g(p.in, p.outbound);
    const ExactCount c = enumerate_exact(g, p.max_subsets);
    Output o;
    o.command = "net enumerate";
    o.inputs = {{"inbound", p.in}, {"outbound", p.outbound}};
    o.columns = cols({"inbound", "outbound", "favorable", "total", "probability"});
    o.columns.push_back({"probability_real", false});
    o.rows.push_back({g.inbound(), g.outbound(), c.favorable.str(), c.total.str(), c.probability(),
                      Sci{to_double(c.probability())}});
    return o;
}

inline Output net_simulate(const Params& p) {
    const SwitchGeometry g(p.in, p.outbound);
    const CollisionReport r = simulate_traffic(g, p.trials, p.seed, p.workers);
    Output o;
    o.command = "net simulate";
    o.seed = p.seed;
    o.inputs = {{"inbound", p.in}, {"outbound", p.outbound}, {"trials", p.trials}, {"seed", p.seed}};
    if (p.histogram) {
        o.columns = cols({"collisions", "trial_count", "seed"});
        for (std::size_t c = 0; c < r.collision_count_distribution.size(); ++c)
            o.rows.push_back({std::uint64_t{c}, r.collision_count_distribution[c], p.seed});
        return o;
    }
    o.columns = cols({"inbound", "outbound", "trials", "seed", "no_collision_frequency", "standard_error",
                      "mean_collisions", "exact"});
    o.rows.push_back({g.inbound(), g.outbound(), p.trials, p.seed, Sci{r.no_collision_frequency},
                      Sci{r.standard_error}, Fixed{r.mean_collisions()}, no_collision_probability(g)});
    return o;
}

inline Output net_sweep(const Params& p) {
    const SweepMode mode = p.mode == "one-way" ? SweepMode::one_way : SweepMode::two_way;
    Output o;
    o.command = "net sweep";
    o.inputs = {{"mode", p.mode}, {"k_min", p.k_min}, {"k_max", p.k_max}};
    o.columns = cols({"k", "n", "total_ports", "probability"});
    o.columns.push_back({"probability_real", false});
    for (const auto& row : sweep_oversubscription(mode, p.k_min, p.k_max))
        o.rows.push_back({row.outbound, row.inbound, row.outbound + row.inbound, row.probability,
                          Sci{to_double(row.probability)}});
    return o;
}

} // namespace detail

/// Run the CLI on `args` (program name excluded).
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    detail::Params p;
    CLI::App app{"Birthday-paradox collision statistics for set-associative caches and oversubscribed switches",
                 "collide"};
    app.set_version_flag("--version", std::string("collide ") + kVersion);
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--format", p.format, "Output format")->check(CLI::IsMember({"table", "csv", "json"}));
    app.add_option("--digits", p.digits, "Significant digits for probabilities")->check(CLI::Range(1, 17));
    app.add_option("--out", p.out_file, "Also write output to FILE");
    app.add_option("--workers", p.workers, "Simulation threads (0 = all cores); never changes results");

    const auto positive = CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max());

    auto* cache = app.add_subcommand("cache", "Set-associative cache model and simulator");
    cache->require_subcommand(1);
    cache->fallthrough();
    auto add_geometry = [&](CLI::App* cmd) {
        cmd->add_option("--sets", p.sets, "Number of sets m")->check(positive);
        cmd->add_option("--assoc", p.assoc, "Associativity k")->required()->check(positive);
        cmd->add_option("--capacity", p.capacity, "Capacity n (sets = floor(n / k))")->check(positive);
    };

    auto* c_expected = cache->add_subcommand("expected", "Expected lines stored after n random loads");
    add_geometry(c_expected);

    auto* c_noconf = cache->add_subcommand("no-conflict", "Probability that A random addresses fit");
    add_geometry(c_noconf);
    c_noconf->add_option("--addresses", p.addresses, "Working set size A")->required();
    c_noconf->add_option("--method", p.method, "gf (generating function) or direct (occupancy sum)")
        ->check(CLI::IsMember({"gf", "direct"}));
    c_noconf->add_option("--max-vectors", p.max_vectors, "Enumeration cap for --method direct")->check(positive);

    auto* c_t1000 = cache->add_subcommand("table-1000", "Expected stored lines, capacity 1000, k in {1..100}");
    auto* c_tws = cache->add_subcommand("table-worksets", "No-conflict probability, 4-way 4000-line cache");
    auto* c_tfrac = cache->add_subcommand("table-fraction", "No-conflict probability at a fixed fill fraction");
    p.assoc = 4;
    c_tfrac->add_option("--assoc", p.assoc, "Associativity k")->capture_default_str()->check(positive);
    c_tfrac->add_option("--fraction", p.fraction, "Working set as a fraction of capacity")->capture_default_str();

    auto* c_sim = cache->add_subcommand("simulate", "Monte Carlo random fill");
    add_geometry(c_sim);
    c_sim->add_option("--addresses", p.addresses, "Addresses per trial A")->required();
    c_sim->add_option("--trials", p.trials, "Number of trials")->check(positive);
    c_sim->add_option("--seed", p.seed, "Master seed");
    c_sim->add_flag("--histogram", p.histogram, "Print the occupancy histogram instead");

    auto* c_trace = cache->add_subcommand("trace", "Trace-driven LRU simulation of an access pattern");
    add_geometry(c_trace);
    c_trace->add_option("--scenario", p.scenario, "Access pattern")
        ->required()
        ->check(CLI::IsMember({"sequential", "strided", "multi-array", "random", "paged"}));
    c_trace->add_option("--length", p.length, "Elements per array (default: capacity)")->check(positive);
    c_trace->add_option("--stride", p.stride, "strided: distance between the two streams (default: capacity)");
    c_trace->add_option("--arrays", p.arrays, "multi-array: number of arrays")->capture_default_str()->check(positive);
    c_trace->add_option("--offset", p.offset, "multi-array: distance between arrays (default: capacity)");
    c_trace->add_option("--page-count", p.page_count, "paged: physical frames (default: 2x capacity)")
        ->check(positive);
    c_trace->add_option("--page-size", p.page_size, "paged: lines per page (default 1)")->check(positive);
    c_trace->add_option("--sweep-pages", p.sweep_pages, "paged: pages swept (default: as many as fit)");
    c_trace->add_option("--mapping", p.mapping, "paged: identity, permuted or both")->capture_default_str()
        ->check(CLI::IsMember({"identity", "permuted", "both"}));
    c_trace->add_option("--seed", p.seed, "Seed for random and paged scenarios");
    c_trace->add_option("--line-bytes", p.line_bytes, "Cacheline size in address units")->capture_default_str()->check(positive);
    c_trace->add_option("--reps", p.reps, "Repetitions of the pattern")->capture_default_str()->check(positive);

    auto* net = app.add_subcommand("net", "Oversubscribed switch port collisions");
    net->require_subcommand(1);
    net->fallthrough();
    auto add_switch = [&](CLI::App* cmd) {
        cmd->add_option("--in", p.in, "Destinations n")->required()->check(positive);
        cmd->add_option("--out", p.outbound, "Output ports k")->required()->check(positive);
    };
    auto* n_prob = net->add_subcommand("prob", "Exact no-collision probability 2^(n-k)/C(n,k)");
    add_switch(n_prob);
    auto* n_enum = net->add_subcommand("enumerate", "Brute-force count over all k-subsets");
    add_switch(n_enum);
    n_enum->add_option("--max-subsets", p.max_subsets, "Enumeration cap")->check(positive);
    auto* n_sim = net->add_subcommand("simulate", "Monte Carlo traffic");
    add_switch(n_sim);
    n_sim->add_option("--trials", p.trials, "Number of trials")->check(positive);
    n_sim->add_option("--seed", p.seed, "Master seed");
    n_sim->add_flag("--histogram", p.histogram, "Print the collision-count distribution instead");
    auto* n_sweep = net->add_subcommand("sweep", "Closed forms for one-way and two-way oversubscription");
    n_sweep->add_option("--mode", p.mode, "one-way (n=k+1) or two-way (n=k+2)")
        ->required()
        ->check(CLI::IsMember({"one-way", "two-way"}));
    n_sweep->add_option("--k-min", p.k_min, "Smallest k (>= 2)")->capture_default_str()->check(CLI::Range(std::uint64_t{2}, std::numeric_limits<std::uint64_t>::max()));
    n_sweep->add_option("--k-max", p.k_max, "Largest k")->capture_default_str()->check(positive);

    // `--out` is a file before the subcommand and a port count after `net`.
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    Output result;
    try {
        const OutputSpec spec(p.format == "csv" ? Format::csv : p.format == "json" ? Format::json : Format::table,
                              p.digits);
        if (c_expected->parsed()) result = detail::cache_expected(p, *c_expected);
        else if (c_noconf->parsed()) result = detail::cache_no_conflict(p, *c_noconf);
        else if (c_t1000->parsed()) result = detail::cache_table_1000();
        else if (c_tws->parsed()) result = detail::cache_table_worksets();
        else if (c_tfrac->parsed()) result = detail::cache_table_fraction(p);
        else if (c_sim->parsed()) result = detail::cache_simulate(p, *c_sim);
        else if (c_trace->parsed()) result = detail::cache_trace(p, *c_trace);
        else if (n_prob->parsed()) result = detail::net_prob(p);
        else if (n_enum->parsed()) result = detail::net_enumerate(p);
        else if (n_sim->parsed()) result = detail::net_simulate(p);
        else if (n_sweep->parsed()) result = detail::net_sweep(p);

        std::ostringstream text;
        render(result, spec, text);
        out << text.str();
        if (!p.out_file.empty()) {
            std::ofstream file(p.out_file, std::ios::binary);
            if (!file) {
                err << "error: cannot open " << p.out_file << " for writing\n";
                return 1;
            }
            file << text.str();
        }
    } catch (const CLI::ParseError& e) {
        err << e.get_name() << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(std::move(args), out, err);
}

} // namespace collide::cli
