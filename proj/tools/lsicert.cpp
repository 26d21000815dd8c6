// lsicert: certified and numeric log-Sobolev constants for graph Lindbladians.
//
// Exit codes: 0 success, 1 internal error, 2 usage or input error, 3 disconnected graph,
// 4 sandwich ordering violated, 5 decay curve rejected, 6 verification battery failed.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lsi/batteries.hpp"
#include "lsi/errors.hpp"
#include "lsi/estimator.hpp"
#include "lsi/format.hpp"
#include "lsi/graphs.hpp"
#include "lsi/lindblad.hpp"
#include "lsi/random.hpp"

namespace {

using namespace lsi;

enum Exit : int {
    kOk = 0,
    kInternal = 1,
    kUsage = 2,
    kDisconnected = 3,
    kSandwich = 4,
    kDecay = 5,
    kVerify = 6,
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    std::string graph;
    std::string target;
    std::string out;
    std::string state = "random:1";
    std::uint64_t seed = 0;
    int restarts = 200;
    int threads = 1;
    std::optional<double> p;
    int m = 1;
    double t_start = 0.0;
    double t_stop = 2.0;
    int t_count = 21;
    double tol = 1e-8;
    std::vector<std::string> only;
    std::optional<int> dims;
    std::optional<int> trials;
    std::optional<std::uint64_t> verify_seed;
    std::optional<double> verify_tol;
    std::optional<double> slack;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

WeightedGraph require_graph(const Config& c) {
    if (c.graph.empty()) throw UsageError("--graph is required");
    return load_graph(read_file(c.graph));
}

void emit(const Config& c, const std::string& content) {
    if (c.out.empty()) return;
    write_file_atomic(c.out, content);
}

void print_kv(const std::string& key, double value) { std::cout << key << "=" << format_real(value) << "\n"; }

Json edges_to_json(const std::vector<Edge>& edges) {
    Json out = Json::array();
    for (const Edge& e : edges) out.push_back(Json::array({e.u, e.v, e.w}));
    return out;
}

Json vector_to_json(const Vector& v) {
    Json out = Json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Json cover_to_json(const SpanningTree& tree, const CyclicCover& c, const CoverVerdict& verdict) {
    Json j;
    j["schema_version"] = 1;
    j["tree"] = {{"n", tree.n}, {"edges", edges_to_json(tree.edges)}, {"l", tree.l}, {"d", tree.d}};
    j["root"] = c.root;
    j["length"] = c.length();
    j["sequence"] = c.sequence;
    j["vertex_multiplicity"] = c.vertex_multiplicity;
    j["edge_multiplicity"] = edges_to_json(c.edge_multiplicity);
    j["mu_prime"] = vector_to_json(c.mu_prime);
    j["w_prime"] = edges_to_json(c.w_prime);
    j["verified"] = verdict.ok;
    j["reasons"] = verdict.reasons;
    return j;
}

Json certificate_to_json(const BoundCertificate& b) {
    Json j;
    j["schema_version"] = 1;
    j["n"] = b.n;
    j["edge_count"] = b.edge_count;
    j["uniform_measure"] = b.uniform_measure;
    j["unit_weights"] = b.unit_weights;
    j["single_cycle"] = b.single_cycle;
    j["dmu_dmu_prime"] = b.dmu_dmu_prime;
    j["dmu_prime_dmu"] = b.dmu_prime_dmu;
    j["w_prime_over_w"] = b.w_prime_over_w;
    j["tree_general"] = b.tree_general;
    j["corollary"] = b.corollary ? Json(*b.corollary) : Json(nullptr);
    j["cyclic_special"] = b.cyclic_special ? Json(*b.cyclic_special) : Json(nullptr);
    j["best"] = b.best;
    j["best_source"] = b.best_source;
    j["lindblad"] = b.lindblad;
    j["provenance"] = b.provenance;
    j["cover"] = cover_to_json(b.mst, b.cover, CoverVerdict{b.cover_verified, {}});
    return j;
}

struct Target {
    std::string name;
    SpectralSuperoperator op;
    ConditionalExpectation fixed;
    std::optional<WeightedGraph> graph;
};

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("malformed " + what + " entry '" + item + "'");
        }
    }
    if (out.empty()) throw UsageError("empty " + what);
    return out;
}

Target resolve_target(const Config& c) {
    std::string name = c.target;
    if (name.empty()) name = c.graph.empty() ? "" : "graph";
    if (name.empty()) throw UsageError("--target or --graph is required");
    if (name == "pauli") {
        SpectralSuperoperator s = pauli_system();
        ConditionalExpectation e = ConditionalExpectation::kernel_projection(s);
        return {name, std::move(s), std::move(e), std::nullopt};
    }
    if (name.rfind("depolarizing:", 0) == 0) {
        const std::string dim = name.substr(13);
        int n = 0;
        try {
            std::size_t used = 0;
            n = std::stoi(dim, &used);
            if (used != dim.size()) throw std::invalid_argument(dim);
        } catch (const std::exception&) {
            throw UsageError("malformed dimension in '" + name + "'");
        }
        if (n < 2 || n > 8) throw UsageError("depolarizing dimension must be in [2, 8]");
        return {name, depolarizing(n), ConditionalExpectation::trace(n), std::nullopt};
    }
    if (name.rfind("integer:", 0) == 0) {
        const std::vector<double> diag = parse_list(name.substr(8), "integer spectrum");
        Matrix x = Matrix::Zero(static_cast<Index>(diag.size()), static_cast<Index>(diag.size()));
        for (std::size_t i = 0; i < diag.size(); ++i) x(static_cast<Index>(i), static_cast<Index>(i)) = diag[i];
        SpectralSuperoperator s = integer_spectrum_lindblad(x).op;
        ConditionalExpectation e = ConditionalExpectation::kernel_projection(s);
        return {name, std::move(s), std::move(e), std::nullopt};
    }
    if (name == "graph") {
        WeightedGraph g = require_graph(c);
        if (!is_connected(g)) throw DisconnectedGraphError();
        SpectralSuperoperator s = graph_lindblad(g);
        ConditionalExpectation e = ConditionalExpectation::kernel_projection(s);
        return {name, std::move(s), std::move(e), std::move(g)};
    }
    throw UsageError("unknown target '" + name + "' (pauli | depolarizing:n | integer:a,b,.. | graph)");
}

EstimateOptions estimate_options(const Config& c) {
    EstimateOptions o;
    o.restarts = c.restarts;
    o.seed = c.seed;
    o.tol = c.tol;
    o.threads = c.threads;
    return o;
}

int cmd_bound(const Config& c) {
    const WeightedGraph g = require_graph(c);
    const BoundCertificate b = certified_bound(g);
    emit(c, dump_json(certificate_to_json(b)) + "\n");
    print_kv("best", b.best);
    print_kv("lindblad", b.lindblad);
    std::cout << "source=" << b.best_source << "\n";
    return kOk;
}

int cmd_lindblad(const Config& c) {
    const WeightedGraph g = require_graph(c);
    const SpectralSuperoperator s = graph_lindblad(g);
    const FixedPointSpace fixed = fixed_point_dim(s);
    Json j;
    j["schema_version"] = 1;
    j["n"] = g.n();
    j["spectrum"] = vector_to_json(s.spectrum());
    j["fixed_point_dim"] = fixed.dim;
    const bool connected = is_connected(g);
    std::optional<double> gap;
    if (fixed.dim < s.dim() * s.dim()) gap = spectral_gap(s);
    j["spectral_gap"] = gap ? Json(*gap) : Json(nullptr);
    std::optional<BoundCertificate> cert;
    if (connected) cert = certified_bound(g);
    j["certified_graph"] = cert ? Json(cert->best) : Json(nullptr);
    j["certified_lindblad"] = cert ? Json(cert->lindblad) : Json(nullptr);
    emit(c, dump_json(j) + "\n");
    std::cout << "fixed_point_dim=" << fixed.dim << "\n";
    if (gap) print_kv("spectral_gap", *gap);
    if (!connected) {
        std::cerr << "lsicert: graph is disconnected\n";
        return kDisconnected;
    }
    print_kv("lindblad", cert->lindblad);
    return kOk;
}

int cmd_estimate(const Config& c) {
    const EstimateOptions opts = estimate_options(c);
    if (c.m < 1) throw UsageError("--m must be at least 1");
    if (c.p && c.m > 1) throw UsageError("--p and --m cannot be combined");
    const Target t = resolve_target(c);

    EstimateReport report;
    int code = kOk;
    if (t.graph && !c.p && c.m == 1 && t.graph->n() <= kSandwichVertexCap && t.graph->uniform_measure()) {
        const SandwichReport s = sandwich_check(*t.graph, opts, c.slack);
        report = s.matrix;
        for (const std::string& v : s.block.violations) std::cerr << "lsicert: sandwich violated: " << v << "\n";
        if (!s.block.ok()) code = kSandwich;
        print_kv("classical_estimate", s.block.classical_estimate);
        print_kv("certified_graph", s.block.certified_graph);
        print_kv("certified_lindblad", s.block.certified_lindblad);
        std::cout << "sandwich=" << (s.block.ok() ? "pass" : "fail") << "\n";
    } else if (c.p) {
        report = cpsi_estimate(t.op, t.fixed, *c.p, opts, t.name);
    } else if (c.m > 1) {
        report = clsi_probe(t.op, c.m, opts, t.name);
    } else {
        report = mlsi_estimate(t.op, t.fixed, opts, t.name);
    }
    emit(c, dump_json(report_to_json(report)) + "\n");
    print_kv("estimate", report.value);
    if (report.spectral_gap) print_kv("spectral_gap", *report.spectral_gap);
    return code;
}

Matrix initial_state(const Config& c, Index n) {
    const std::string& text = c.state;
    if (text.rfind("random:", 0) == 0) {
        std::uint64_t seed = 0;
        try {
            seed = std::stoull(text.substr(7));
        } catch (const std::exception&) {
            throw UsageError("malformed state seed in '" + text + "'");
        }
        Rng rng(seed);
        return random_state(rng, n, 0.05, 1.0);
    }
    if (text.rfind("diag:", 0) == 0) {
        const std::vector<double> d = parse_list(text.substr(5), "state diagonal");
        if (static_cast<Index>(d.size()) != n)
            throw UsageError("state diagonal has " + std::to_string(d.size()) + " entries, target needs " +
                             std::to_string(n));
        Matrix rho = Matrix::Zero(n, n);
        for (Index i = 0; i < n; ++i) rho(i, i) = d[static_cast<std::size_t>(i)];
        return rho;
    }
    Json doc;
    try {
        doc = Json::parse(read_file(text));
    } catch (const Json::parse_error& e) {
        throw ParseError(text, e.what());
    }
    Matrix rho = matrix_from_json(doc);
    if (rho.rows() != n) throw UsageError("state file dimension does not match the target");
    return rho;
}

int cmd_decay(const Config& c) {
    if (c.t_count < 2) throw UsageError("--t-count must be at least 2");
    if (!(c.t_start >= 0.0) || !(c.t_stop > c.t_start)) throw UsageError("need 0 <= --t-start < --t-stop");
    const Target t = resolve_target(c);
    const State rho0 = State::normalized(initial_state(c, t.op.dim()));
    std::vector<double> grid;
    for (int i = 0; i < c.t_count; ++i)
        grid.push_back(c.t_start + (c.t_stop - c.t_start) * i / (c.t_count - 1));
    const DecayCurve curve = decay_curve(t.op, t.fixed, rho0, grid);
    emit(c, decay_csv(curve));
    std::cout << "points=" << curve.rows.size() << "\n";
    print_kv("fit_residual", curve.fit_residual);
    print_kv("fitted_rate", curve.fitted_rate);
    return kOk;
}

int cmd_verify(const Config& c) {
    std::vector<std::string> names = c.only.empty() ? battery_names() : c.only;
    BatteryOptions opts;
    if (c.verify_seed) opts.seed = *c.verify_seed;
    opts.dims = c.dims;
    opts.trials = c.trials;
    opts.tolerance = c.verify_tol;
    Json summary = Json::array();
    bool all = true;
    for (const std::string& name : names) {
        const BatteryResult r = run_battery(name, opts);
        all = all && r.passed;
        std::cout << r.name << ": " << (r.passed ? "PASS" : "FAIL") << " (" << format_real(r.max_residual) << ")";
        if (!r.detail.empty()) std::cout << " " << r.detail;
        std::cout << "\n";
        summary.push_back({{"name", r.name},
                           {"passed", r.passed},
                           {"max_residual", r.max_residual},
                           {"tolerance", r.tolerance},
                           {"cases", r.cases},
                           {"detail", r.detail}});
    }
    emit(c, dump_json(Json{{"schema_version", 1}, {"seed", opts.seed}, {"batteries", summary}}) + "\n");
    return all ? kOk : kVerify;
}

int cmd_cover(const Config& c) {
    const WeightedGraph g = require_graph(c);
    if (!is_connected(g)) throw DisconnectedGraphError();
    const SpanningTree tree = kruskal_mst(g);
    const CyclicCover cover = traversal_cover(tree);
    const CoverVerdict verdict = verify_cover(cover, cover_target(tree, cover));
    emit(c, dump_json(cover_to_json(tree, cover, verdict)) + "\n");
    std::cout << "length=" << cover.length() << "\n";
    std::cout << "sequence=";
    for (std::size_t i = 0; i < cover.sequence.size(); ++i) std::cout << (i ? "," : "") << cover.sequence[i];
    std::cout << "\nverified=" << (verdict.ok ? "true" : "false") << "\n";
    return verdict.ok ? kOk : kInternal;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Log-Sobolev constants for graph Lindbladians and quantum Markov semigroups"};
    app.require_subcommand(1);
    Config cfg;

    auto add_graph = [&](CLI::App* sub, bool required) {
        auto* opt = sub->add_option("--graph", cfg.graph, "Graph JSON file");
        if (required) opt->required();
    };
    auto add_out = [&](CLI::App* sub) { sub->add_option("--out", cfg.out, "Output file (written atomically)"); };
    auto add_estimator = [&](CLI::App* sub) {
        sub->add_option("--target", cfg.target, "pauli | depolarizing:n | integer:a,b,.. | graph");
        sub->add_option("--seed", cfg.seed, "Base seed");
        sub->add_option("--restarts", cfg.restarts, "Optimizer restarts")->check(CLI::Range(1, 100000));
        sub->add_option("--tol", cfg.tol, "Simplex size tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--threads", cfg.threads, "Worker threads")->check(CLI::Range(1, 256));
    };

    auto* bound = app.add_subcommand("bound", "Certified graph and Lindblad bounds");
    add_graph(bound, true);
    add_out(bound);

    auto* lindblad = app.add_subcommand("lindblad", "Spectrum and fixed points of the graph Lindbladian");
    add_graph(lindblad, true);
    add_out(lindblad);

    auto* estimate = app.add_subcommand("estimate", "Numeric MLSI, CpSI or amplified estimate");
    add_graph(estimate, false);
    add_out(estimate);
    add_estimator(estimate);
    estimate->add_option("--p", cfg.p, "Power entropy exponent in (1, 2)");
    estimate->add_option("--m", cfg.m, "Amplification dimension")->check(CLI::Range(1, 12));
    estimate->add_option("--slack", cfg.slack, "Sandwich ordering slack; negative demands a margin");

    auto* decay = app.add_subcommand("decay", "Relative entropy decay along the semigroup");
    add_graph(decay, false);
    add_out(decay);
    decay->add_option("--target", cfg.target, "pauli | depolarizing:n | integer:a,b,.. | graph");
    decay->add_option("--state", cfg.state, "random:SEED | diag:a,b,.. | matrix JSON file");
    decay->add_option("--t-start", cfg.t_start, "First time");
    decay->add_option("--t-stop", cfg.t_stop, "Last time");
    decay->add_option("--t-count", cfg.t_count, "Number of grid points");

    auto* verify = app.add_subcommand("verify", "Run the property batteries");
    add_out(verify);
    verify->add_option("--only", cfg.only, "Run only the named batteries")
        ->check(CLI::IsMember(battery_names()))
        ->delimiter(',');
    verify->add_option("--dims", cfg.dims, "Matrix dimension for batteries that draw one")->check(CLI::Range(2, 8));
    verify->add_option("--trials", cfg.trials, "Cases per battery")->check(CLI::Range(1, 100000));
    verify->add_option("--seed", cfg.verify_seed, "Battery seed");
    verify->add_option("--tol", cfg.verify_tol, "Residual tolerance for every battery")->check(CLI::NonNegativeNumber);

    auto* cover = app.add_subcommand("cover", "Cyclic cover of the minimum spanning tree");
    add_graph(cover, true);
    add_out(cover);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*bound) return cmd_bound(cfg);
        if (*lindblad) return cmd_lindblad(cfg);
        if (*estimate) return cmd_estimate(cfg);
        if (*decay) return cmd_decay(cfg);
        if (*verify) return cmd_verify(cfg);
        if (*cover) return cmd_cover(cfg);
    } catch (const DisconnectedGraphError& e) {
        std::cerr << "lsicert: " << e.what() << "\n";
        return kDisconnected;
    } catch (const DegenerateStartError& e) {
        std::cerr << "lsicert: " << e.what() << "\n";
        return *decay ? kDecay : kInternal;
    } catch (const IntegrityError& e) {
        std::cerr << "lsicert: " << e.what() << "\n";
        return *decay ? kDecay : kInternal;
    } catch (const ParseError& e) {
        std::cerr << "lsicert: parse error at " << e.what() << "\n";
        return kUsage;
    } catch (const UsageError& e) {
        std::cerr << "lsicert: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "lsicert: " << e.what() << "\n";
        return kUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "lsicert: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "lsicert: " << e.what() << "\n";
        return kInternal;
    }
    return kUsage;
}
