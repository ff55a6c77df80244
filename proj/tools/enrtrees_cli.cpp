// Command-line front end: series/criticality reports, exact-size and limit
// sampling, window censuses, Gibbs composites, the front-distance chain,
// distance scaling studies, and the verification suite.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage/unknown model, 3 lattice
// (unreachable size, message names the supported residue class), 4 budget
// exhausted, 5 verification criteria failed.

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <acceptance_suites.hpp>
#include <enrtrees/metrics.hpp>
#include <enrtrees/models.hpp>
#include <enrtrees/samplers.hpp>
#include <enrtrees/solver.hpp>
#include <enrtrees/stats.hpp>

using nlohmann::ordered_json;
using namespace enr;

namespace {

constexpr int EXIT_RUNTIME = 1;
constexpr int EXIT_USAGE = 2;
constexpr int EXIT_LATTICE = 3;
constexpr int EXIT_BUDGET = 4;
constexpr int EXIT_VERIFY = 5;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("ENRTREES_SEED")) return std::stoull(env);
    return 42;
}

ModelSpec resolve_model(const std::string& name, const std::string& spec_path) {
    if (!spec_path.empty()) {
        std::ifstream in(spec_path);
        if (!in) throw std::invalid_argument("cannot open species file: " + spec_path);
        nlohmann::json j;
        in >> j;
        return model_from_json(j);
    }
    if (name.empty())
        throw std::invalid_argument("no model given: pass a built-in name or --spec file");
    try {
        return builtin_model(name);
    } catch (const std::out_of_range&) {
        std::string msg = "unknown model '" + name + "'; built-ins:";
        for (const auto& b : builtin_model_names()) msg += " " + b;
        throw std::invalid_argument(msg);
    }
}

ExactSizeMethod pick_method(const std::string& flag, const ModelSampler& ms) {
    if (flag == "reject") return ExactSizeMethod::REJECT;
    if (flag == "rotation") return ExactSizeMethod::ROTATION;
    if (flag == "recursive") return ExactSizeMethod::RECURSIVE;
    return ms.flat() ? ExactSizeMethod::RECURSIVE : ExactSizeMethod::REJECT;
}

// Deterministic parallel map: fn(i) -> T for i in [0, count), results handed
// to sink in index order. fn must derive all randomness from the index (one
// RNG stream per index), so any thread count yields identical output.
template <class T, class MapFn, class SinkFn>
void parallel_map(long long count, int threads, MapFn fn, SinkFn sink) {
    const long long batch = std::max<long long>(256, (long long)threads * 64);
    std::vector<T> buf;
    for (long long base = 0; base < count; base += batch) {
        const long long m = std::min(batch, count - base);
        buf.assign(std::size_t(m), T{});
        if (threads <= 1) {
            for (long long i = 0; i < m; ++i) buf[std::size_t(i)] = fn(base + i);
        } else {
            std::vector<std::thread> pool;
            std::exception_ptr err;
            std::mutex emx;
            for (int w = 0; w < threads; ++w)
                pool.emplace_back([&, w]() {
                    try {
                        for (long long i = w; i < m; i += threads)
                            buf[std::size_t(i)] = fn(base + i);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(emx);
                        if (!err) err = std::current_exception();
                    }
                });
            for (auto& t : pool) t.join();
            if (err) std::rethrow_exception(err);
        }
        for (long long i = 0; i < m; ++i) sink(base + i, std::move(buf[std::size_t(i)]));
    }
}

std::string rational_str(const Rational& r) {
    if (r.den() == 1) return std::to_string(r.num());
    return std::to_string(r.num()) + "/" + std::to_string(r.den());
}

std::vector<int> parse_sizes(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stoi(tok));
    }
    if (out.empty()) throw std::invalid_argument("--sizes: no sizes given");
    return out;
}

// ---- subcommand bodies -------------------------------------------------------

int cmd_series(const ModelSpec& m, int degree, bool rational) {
    std::cout << "n,coefficient\n";
    if (rational) {
        auto fam = solve_enriched_fixed_point<Rational>(m.species, degree);
        for (int n = 0; n <= degree; ++n)
            std::cout << n << "," << rational_str(fam.unlabelled()[std::size_t(n)]) << "\n";
    } else {
        auto fam = solve_enriched_fixed_point<double>(m.species, degree);
        std::cout.precision(17);
        for (int n = 0; n <= degree; ++n)
            std::cout << n << "," << fam.unlabelled()[std::size_t(n)] << "\n";
    }
    return 0;
}

int cmd_rho(const ModelSpec& m) {
    auto an = analyze_criticality(m.species, 128);
    ordered_json j;
    j["model"] = m.name;
    j["cap"] = an.report.cap;
    j["rho"] = an.report.rho;
    j["series_at_rho"] = an.report.A_rho;
    j["mean_offspring"] = an.report.Exi;
    j["var_offspring"] = an.report.Vxi;
    j["mean_extra_atoms"] = an.report.Ezeta;
    j["var_extra_atoms"] = an.report.Vzeta;
    j["fixpoint_fraction"] = an.report.mu;
    j["span"] = an.report.span;
    std::cout << j.dump(2) << std::endl;
    return 0;
}

int cmd_sample(const ModelSpec& m, int n, long long count, std::uint64_t seed,
               const std::string& method_flag, const std::string& decode,
               const std::string& out_path, int threads) {
    auto ms = std::make_shared<const ModelSampler>(m.species, 128);
    ExactSizeSampler ex(ms);
    ExactSizeMethod method = pick_method(method_flag, *ms);
    const BlockCatalog* cat =
        m.species.kind == SpeciesKind::SET_DERIVED_BLOCKS ? &m.species.catalog : nullptr;
    if (decode == "ktree" && m.species.kind != SpeciesKind::SEQK_SET)
        throw std::invalid_argument("--decode ktree requires a k-coding model");

    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw std::invalid_argument("cannot open output file: " + out_path);
    }
    std::ostream& os = out_path.empty() ? std::cout : file;

    auto line_of = [&](long long i) {
        RngStream rng(seed, std::uint64_t(i));
        SymEnrichedTree t = ex.sample(n, method, rng);
        MaterializedTree mt = materialize(t, cat);
        auto dh = diameter_height(build_patched_space(mt, EdgeLaw::DET1, rng));
        ordered_json j;
        j["schema"] = "enrtrees-sample-1";
        j["model"] = m.name;
        j["n"] = n;
        j["seed"] = seed;
        j["stream"] = i;
        j["tree"] = {{"code", structure_code(m, t)}, {"parent", mt.parent}};
        j["stats"] = {{"fixpoints", (long long)to_fixpoint_tree(t).size()},
                      {"height", dh.height},
                      {"diameter", dh.diameter}};
        if (decode == "graph") {
            Graph g = cat ? decode_block_graph(t, *cat) : Graph(0);
            if (!cat) {
                // tree models: the expanded tree itself is the graph
                g = Graph(int(mt.size()));
                for (std::size_t v = 1; v < mt.size(); ++v)
                    g.add_edge(int(v), mt.parent[v]);
            }
            std::vector<std::pair<int, int>> edges;
            for (int u = 0; u < g.size(); ++u)
                for (int v : g.neighbors(u))
                    if (u < v) edges.emplace_back(u, v);
            j["graph"] = {{"n", g.size()}, {"edges", edges}};
        } else if (decode == "ktree") {
            DecodedKTree d = decode_ktree(t, m.species.k);
            std::vector<std::pair<int, int>> edges;
            for (int u = 0; u < d.graph.size(); ++u)
                for (int v : d.graph.neighbors(u))
                    if (u < v) edges.emplace_back(u, v);
            j["graph"] = {{"n", d.graph.size()}, {"k", m.species.k}, {"edges", edges},
                          {"fronts", d.fronts}};
        }
        return j.dump();
    };
    parallel_map<std::string>(count, threads, line_of,
                              [&](long long, std::string&& s) { os << s << "\n"; });
    return 0;
}

int cmd_census(const ModelSpec& m, int n, int radius, const std::string& limit,
               long long samples, std::uint64_t seed, int threads) {
    auto ms = std::make_shared<const ModelSampler>(m.species, 128);
    ExactSizeSampler ex(ms);
    bool ordered = m.species.kind == SpeciesKind::SEQ_RESTRICTED;

    Census size_census;
    parallel_map<std::string>(
        samples, threads,
        [&](long long i) {
            RngStream rng(seed, std::uint64_t(i));
            auto method = ms->flat() ? ExactSizeMethod::RECURSIVE : ExactSizeMethod::REJECT;
            return trimmed_code(ex.sample(n, method, rng), radius, ordered);
        },
        [&](long long, std::string&& code) { size_census.add(code); });

    Census limit_census;
    if (!limit.empty()) {
        LimitKind kind = limit == "tinf" ? LimitKind::T_INF : LimitKind::H_HAT;
        parallel_map<std::string>(
            samples, threads,
            [&](long long i) {
                RngStream rng(seed, std::uint64_t(1000000000LL + i));
                return trimmed_code(sample_limit_trimmed(*ms, radius, kind, rng), radius,
                                    ordered);
            },
            [&](long long, std::string&& code) { limit_census.add(code); });
    }

    auto census_json = [](const Census& c) {
        std::vector<std::pair<long long, std::string>> by_count;
        for (const auto& [code, cnt] : c.counts) by_count.emplace_back(cnt, code);
        std::sort(by_count.rbegin(), by_count.rend());
        ordered_json out;
        out["total"] = c.total;
        out["distinct"] = (long long)c.counts.size();
        ordered_json top = ordered_json::array();
        for (std::size_t i = 0; i < by_count.size() && i < 20; ++i)
            top.push_back({{"code", by_count[i].second}, {"count", by_count[i].first}});
        out["top"] = top;
        return out;
    };

    ordered_json j;
    j["model"] = m.name;
    j["n"] = n;
    j["radius"] = radius;
    j["samples"] = samples;
    j["size_census"] = census_json(size_census);
    if (!limit.empty()) {
        j["limit"] = limit;
        j["limit_census"] = census_json(limit_census);
        if (limit == "tinf") {
            j["tv"] = tv_distance(size_census, limit_census);
            j["tv_se"] = tv_standard_error(size_census, limit_census);
        }
    }
    std::cout << j.dump(2) << std::endl;
    return 0;
}

int cmd_verify(const std::string& suite, std::uint64_t seed) {
    std::vector<int> ids;
    if (suite != "all") {
        bool found = false;
        for (const auto& c : accept::criteria()) {
            if (suite == c.name || suite == std::to_string(c.id)) {
                ids.push_back(c.id);
                found = true;
            }
        }
        if (!found) {
            std::ostringstream names;
            for (const auto& c : accept::criteria()) names << " " << c.id << ":" << c.name;
            throw std::invalid_argument("unknown suite '" + suite + "'; use all or one of" +
                                        names.str());
        }
    }
    std::cout << "verification suite, seed " << seed << std::endl;
    bool ok = accept::run_and_print(ids, seed, std::cout);
    std::cout << (ok ? "ALL CRITERIA PASSED" : "CRITERIA FAILED") << std::endl;
    return ok ? 0 : EXIT_VERIFY;
}

int cmd_gibbs(const ModelSpec& m, int n, long long samples, std::uint64_t seed, int threads) {
    auto ms = std::make_shared<const ModelSampler>(m.species, 128);
    ExactSizeSampler ex(ms);
    ex.ensure_capacity(n);
    std::cout << "sample,components,largest,remainder_total\n";
    struct Row {
        long long comps = 0;
        int largest = 0;
        long long rem = 0;
    };
    parallel_map<Row>(
        samples, threads,
        [&](long long i) {
            RngStream rng(seed, std::uint64_t(i));
            auto d = gibbs_sample(ex, n, rng);
            auto rr = extract_remainder(d, rng);
            return Row{(long long)d.sizes.size(), rr.largest, rr.total};
        },
        [&](long long i, Row&& r) {
            std::cout << i << "," << r.comps << "," << r.largest << "," << r.rem << "\n";
        });
    return 0;
}

int cmd_ktree_chain(int k, long long steps, std::uint64_t seed) {
    RngStream rng(seed, 0);
    auto rep = ktree_chain(k, steps, rng);
    double h = 0.0;
    for (int i = 1; i <= k; ++i) h += 1.0 / double(i);
    std::vector<double> pi;
    for (int i = 1; i <= k; ++i) pi.push_back(1.0 / (double(i) * h));
    double tv = 0.0;
    for (int i = 0; i < k; ++i) tv += std::abs(rep.occupancy[std::size_t(i)] - pi[std::size_t(i)]);
    tv *= 0.5;
    ordered_json j;
    j["k"] = k;
    j["steps"] = steps;
    j["d_prime"] = rep.d_prime;
    j["growth_rate"] = double(rep.d_prime - 1) / double(steps);
    j["b_k"] = rep.b_k;
    j["occupancy"] = rep.occupancy;
    j["stationary"] = pi;
    j["occupancy_tv"] = tv;
    std::cout << j.dump(2) << std::endl;
    return 0;
}

int cmd_diameter(const ModelSpec& m, const std::string& sizes_str, long long samples,
                 const std::string& fpp, std::uint64_t seed, int threads) {
    auto ms = std::make_shared<const ModelSampler>(m.species, 128);
    ExactSizeSampler ex(ms);
    auto method = ms->flat() ? ExactSizeMethod::RECURSIVE : ExactSizeMethod::REJECT;
    EdgeLaw law = fpp == "exp1" ? EdgeLaw::EXP1
                                : (fpp == "unif01" ? EdgeLaw::UNIF01 : EdgeLaw::DET1);
    const BlockCatalog* cat =
        m.species.kind == SpeciesKind::SET_DERIVED_BLOCKS ? &m.species.catalog : nullptr;
    auto sizes = parse_sizes(sizes_str);
    std::cout << "n,samples,mean_diameter,mean_height,d_over_sqrt,h_over_sqrt,ratio,d_se,"
                 "tail_slope\n";
    std::cout.precision(10);
    int block = 0;
    for (int n : sizes) {
        if (ms->flat()) ex.ensure_capacity(n);
        std::vector<double> diam, height;
        diam.reserve(std::size_t(samples));
        height.reserve(std::size_t(samples));
        struct DH {
            double d = 0, h = 0;
        };
        parallel_map<DH>(
            samples, threads,
            [&](long long i) {
                RngStream rng(seed, std::uint64_t(block) * 100000000ULL + std::uint64_t(i));
                auto t = ex.sample(n, method, rng);
                auto mt = materialize(t, cat);
                auto dh = diameter_height(build_patched_space(mt, law, rng));
                return DH{dh.diameter, dh.height};
            },
            [&](long long, DH&& dh) {
                diam.push_back(dh.d);
                height.push_back(dh.h);
            });
        auto row = scaling_row(n, diam, height);
        std::cout << row.n << "," << row.samples << "," << row.mean_diameter << ","
                  << row.mean_height << "," << row.d_over_sqrt << "," << row.h_over_sqrt
                  << "," << row.ratio << "," << row.d_se << "," << row.tail_slope << "\n";
        ++block;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact and asymptotic random generation of unlabelled enriched trees"};
    app.require_subcommand(1);

    std::string model, spec_path, method_flag, decode, out_path, limit, suite = "all";
    std::string sizes_str = "256,1024,4096", fpp = "det1";
    int n = 0, degree = 12, radius = 2, k = 2, threads = 1;
    long long count = 1, samples = 10000, steps = 100000;
    bool rational = false;
    std::uint64_t seed = default_seed();

    auto add_model = [&](CLI::App* sub) {
        sub->add_option("model", model, "built-in model name (polya, binary, seq, cacti3, ktree2, ktree3)");
        sub->add_option("--spec", spec_path, "JSON species file instead of a built-in");
    };

    auto* s_series = app.add_subcommand("series", "print solved series coefficients as CSV");
    add_model(s_series);
    s_series->add_option("--degree", degree, "truncation degree")->required();
    s_series->add_flag("--rational", rational, "exact rational arithmetic");

    auto* s_rho = app.add_subcommand("rho", "print the criticality report as JSON");
    add_model(s_rho);

    auto* s_sample = app.add_subcommand("sample", "draw exact-size structures as JSONL");
    add_model(s_sample);
    s_sample->add_option("-n", n, "structure size")->required();
    s_sample->add_option("--count", count, "number of samples");
    s_sample->add_option("--seed", seed, "RNG seed (default env ENRTREES_SEED or 42)");
    s_sample->add_option("--method", method_flag, "reject|rotation|recursive")
        ->check(CLI::IsMember({"reject", "rotation", "recursive"}));
    s_sample->add_option("--decode", decode, "emit the decoded graph per sample")
        ->check(CLI::IsMember({"graph", "ktree"}));
    s_sample->add_option("--out", out_path, "write JSONL here instead of stdout");
    s_sample->add_option("--threads", threads, "worker threads (default 1)");

    auto* s_census = app.add_subcommand("census", "radius-limited window census as JSON");
    add_model(s_census);
    s_census->add_option("-n", n, "structure size")->required();
    s_census->add_option("--radius", radius, "trim depth of the window")->required();
    s_census->add_option("--limit", limit, "also census a limit object: tinf|hhat")
        ->check(CLI::IsMember({"tinf", "hhat"}));
    s_census->add_option("--samples", samples, "draws per census");
    s_census->add_option("--seed", seed, "RNG seed (default env ENRTREES_SEED or 42)");
    s_census->add_option("--threads", threads, "worker threads (default 1)");

    auto* s_verify = app.add_subcommand("verify", "run verification criteria");
    s_verify->add_option("suite", suite, "all, a criterion id (1-12), or a criterion name");
    s_verify->add_option("--seed", seed, "RNG seed (default env ENRTREES_SEED or 42)");

    auto* s_gibbs = app.add_subcommand("gibbs", "draw composite structures, CSV of components");
    add_model(s_gibbs);
    s_gibbs->add_option("-n", n, "total composite size")->required();
    s_gibbs->add_option("--samples", samples, "number of draws");
    s_gibbs->add_option("--seed", seed, "RNG seed (default env ENRTREES_SEED or 42)");
    s_gibbs->add_option("--threads", threads, "worker threads (default 1)");

    auto* s_chain = app.add_subcommand("ktree-chain", "front-distance chain report as JSON");
    s_chain->add_option("-k", k, "front size")->required();
    s_chain->add_option("--steps", steps, "chain length");
    s_chain->add_option("--seed", seed, "RNG seed (default env ENRTREES_SEED or 42)");

    auto* s_diam = app.add_subcommand("diameter", "distance scaling study as CSV");
    add_model(s_diam);
    s_diam->add_option("--sizes", sizes_str, "comma-separated sizes");
    s_diam->add_option("--samples", samples, "draws per size");
    s_diam->add_option("--fpp", fpp, "edge length law: det1|exp1|unif01")
        ->check(CLI::IsMember({"det1", "exp1", "unif01"}));
    s_diam->add_option("--seed", seed, "RNG seed (default env ENRTREES_SEED or 42)");
    s_diam->add_option("--threads", threads, "worker threads (default 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return EXIT_USAGE;
    }

    try {
        if (threads < 1) throw std::invalid_argument("--threads must be >= 1");
        if (s_series->parsed()) return cmd_series(resolve_model(model, spec_path), degree, rational);
        if (s_rho->parsed()) return cmd_rho(resolve_model(model, spec_path));
        if (s_sample->parsed())
            return cmd_sample(resolve_model(model, spec_path), n, count, seed, method_flag,
                              decode, out_path, threads);
        if (s_census->parsed())
            return cmd_census(resolve_model(model, spec_path), n, radius, limit, samples, seed,
                              threads);
        if (s_verify->parsed()) return cmd_verify(suite, seed);
        if (s_gibbs->parsed())
            return cmd_gibbs(resolve_model(model, spec_path), n, samples, seed, threads);
        if (s_chain->parsed()) return cmd_ktree_chain(k, steps, seed);
        if (s_diam->parsed())
            return cmd_diameter(resolve_model(model, spec_path), sizes_str, samples, fpp, seed,
                                threads);
        return EXIT_USAGE;
    } catch (const LatticeError& e) {
        std::cerr << "lattice error: " << e.what() << std::endl;
        return EXIT_LATTICE;
    } catch (const BudgetError& e) {
        std::cerr << "budget error: " << e.what() << std::endl;
        return EXIT_BUDGET;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return EXIT_USAGE;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return EXIT_USAGE;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return EXIT_RUNTIME;
    }
}
