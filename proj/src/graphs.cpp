#include "lsi/graphs.hpp"

#include <algorithm>
#include <map>
#include <numbers>
#include <numeric>
#include <queue>
#include <set>

#include "json.hpp"
#include "lsi/format.hpp"

namespace lsi {

namespace {

constexpr double kExact = 1e-12;

struct DisjointSets {
    std::vector<int> parent;
    explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

}  // namespace

WeightedGraph::WeightedGraph(int n, std::vector<Edge> edges, std::optional<Vector> measure)
    : n_(n), edges_(std::move(edges)) {
    if (n < 2) throw GraphError("graph needs at least 2 vertices");
    std::set<std::pair<int, int>> seen;
    for (Edge& e : edges_) {
        if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n)
            throw GraphError("edge endpoint out of range: (" + std::to_string(e.u) + "," + std::to_string(e.v) + ")");
        if (e.u == e.v) throw GraphError("self-loop at vertex " + std::to_string(e.u));
        if (e.u > e.v) std::swap(e.u, e.v);
        if (!(e.w > 0.0) || !std::isfinite(e.w))
            throw GraphError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") has nonpositive weight");
        if (!seen.insert({e.u, e.v}).second)
            throw GraphError("duplicate edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ")");
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const Edge& a, const Edge& b) { return std::pair(a.u, a.v) < std::pair(b.u, b.v); });
    if (measure) {
        if (measure->size() != n) throw GraphError("measure length differs from n");
        for (Index i = 0; i < n; ++i)
            if (!((*measure)(i) > 0.0)) throw GraphError("measure entry " + std::to_string(i) + " is not positive");
        if (std::abs(measure->sum() - 1.0) > kExact) throw GraphError("measure does not sum to 1");
        measure_ = *measure;
    } else {
        measure_ = Vector::Constant(n, 1.0 / n);
    }
}

bool WeightedGraph::uniform_measure() const {
    return ((measure_.array() - 1.0 / n_).abs() <= kExact).all();
}

bool WeightedGraph::unit_weights() const {
    return std::all_of(edges_.begin(), edges_.end(), [](const Edge& e) { return std::abs(e.w - 1.0) <= kExact; });
}

int WeightedGraph::degree(int x) const {
    return static_cast<int>(std::count_if(edges_.begin(), edges_.end(), [x](const Edge& e) { return e.u == x || e.v == x; }));
}

int WeightedGraph::max_degree() const {
    int d = 0;
    for (int x = 0; x < n_; ++x) d = std::max(d, degree(x));
    return d;
}

std::optional<double> WeightedGraph::weight(int u, int v) const {
    if (u > v) std::swap(u, v);
    for (const Edge& e : edges_)
        if (e.u == u && e.v == v) return e.w;
    return std::nullopt;
}

std::vector<std::vector<std::pair<int, double>>> WeightedGraph::adjacency() const {
    std::vector<std::vector<std::pair<int, double>>> adj(n_);
    for (const Edge& e : edges_) {
        adj[e.u].emplace_back(e.v, e.w);
        adj[e.v].emplace_back(e.u, e.w);
    }
    for (auto& row : adj) std::sort(row.begin(), row.end());
    return adj;
}

RealMatrix WeightedGraph::laplacian() const {
    RealMatrix l = RealMatrix::Zero(n_, n_);
    for (const Edge& e : edges_) {
        l(e.u, e.u) += e.w;
        l(e.v, e.v) += e.w;
        l(e.u, e.v) -= e.w;
        l(e.v, e.u) -= e.w;
    }
    return l;
}

WeightedGraph load_graph(std::string_view text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& err) {
        throw ParseError("byte " + std::to_string(err.byte), "malformed JSON");
    }
    if (!doc.is_object()) throw ParseError("/", "graph document must be an object");
    if (!doc.contains("n") || !doc["n"].is_number_integer()) throw ParseError("/n", "missing integer vertex count");
    const int n = doc["n"].get<int>();
    if (!doc.contains("edges") || !doc["edges"].is_array()) throw ParseError("/edges", "missing edge array");
    std::vector<Edge> edges;
    const json& arr = doc["edges"];
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string where = "/edges/" + std::to_string(i);
        const json& e = arr[i];
        if (!e.is_array() || (e.size() != 2 && e.size() != 3))
            throw ParseError(where, "edge must be [u, v] or [u, v, w]");
        if (!e[0].is_number_integer() || !e[1].is_number_integer())
            throw ParseError(where, "edge endpoints must be integers");
        double w = 1.0;
        if (e.size() == 3) {
            if (!e[2].is_number()) throw ParseError(where + "/2", "weight must be a number");
            w = e[2].get<double>();
            if (!(w > 0.0)) throw ParseError(where + "/2", "weight must be positive");
        }
        edges.push_back({e[0].get<int>(), e[1].get<int>(), w});
    }
    std::optional<Vector> measure;
    if (doc.contains("measure") && !doc["measure"].is_null()) {
        const json& m = doc["measure"];
        if (!m.is_array()) throw ParseError("/measure", "measure must be an array");
        Vector mu(static_cast<Index>(m.size()));
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (!m[i].is_number()) throw ParseError("/measure/" + std::to_string(i), "measure entry must be a number");
            mu(static_cast<Index>(i)) = m[i].get<double>();
            if (!(mu(static_cast<Index>(i)) > 0.0))
                throw ParseError("/measure/" + std::to_string(i), "measure entry must be positive");
        }
        measure = mu;
    }
    try {
        return WeightedGraph(n, std::move(edges), measure);
    } catch (const GraphError& err) {
        throw ParseError("/", err.what());
    }
}

std::string save_graph(const WeightedGraph& g) {
    nlohmann::ordered_json doc;
    doc["n"] = g.n();
    doc["edges"] = nlohmann::ordered_json::array();
    for (const Edge& e : g.edges()) doc["edges"].push_back({e.u, e.v, e.w});
    doc["measure"] = std::vector<double>(g.measure().begin(), g.measure().end());
    return dump_json(doc);
}

bool is_connected(const WeightedGraph& g) {
    const auto adj = g.adjacency();
    std::vector<bool> seen(g.n(), false);
    std::queue<int> todo;
    todo.push(0);
    seen[0] = true;
    int count = 1;
    while (!todo.empty()) {
        const int x = todo.front();
        todo.pop();
        for (auto [y, w] : adj[x])
            if (!seen[y]) {
                seen[y] = true;
                ++count;
                todo.push(y);
            }
    }
    return count == g.n();
}

bool is_single_cycle(const WeightedGraph& g) {
    if (g.n() < 3 || static_cast<int>(g.edges().size()) != g.n() || !is_connected(g)) return false;
    for (int x = 0; x < g.n(); ++x)
        if (g.degree(x) != 2) return false;
    return true;
}

SpanningTree kruskal_mst(const WeightedGraph& g) {
    if (!is_connected(g)) throw DisconnectedGraphError();
    std::vector<Edge> order = g.edges();
    std::sort(order.begin(), order.end(), [](const Edge& a, const Edge& b) {
        return std::tuple(a.w, a.u, a.v) < std::tuple(b.w, b.u, b.v);
    });
    DisjointSets sets(g.n());
    SpanningTree t;
    t.n = g.n();
    for (const Edge& e : order)
        if (sets.unite(e.u, e.v)) t.edges.push_back(e);
    std::sort(t.edges.begin(), t.edges.end(),
              [](const Edge& a, const Edge& b) { return std::pair(a.u, a.v) < std::pair(b.u, b.v); });
    t.l = static_cast<int>(t.edges.size());
    std::vector<int> deg(t.n, 0);
    for (const Edge& e : t.edges) {
        ++deg[e.u];
        ++deg[e.v];
    }
    t.d = *std::max_element(deg.begin(), deg.end());
    return t;
}

CyclicCover traversal_cover(const SpanningTree& t, std::optional<int> root) {
    if (t.n < 2 || t.l != t.n - 1) throw GraphError("traversal_cover needs a spanning tree on >= 2 vertices");
    const WeightedGraph tree(t.n, t.edges);
    if (!is_connected(tree)) throw GraphError("traversal_cover input is not a tree");
    const auto adj = tree.adjacency();
    int r = 0;
    if (root) {
        if (*root < 0 || *root >= t.n) throw GraphError("root " + std::to_string(*root) + " is not a tree vertex");
        r = *root;
    } else {
        while (adj[r].size() != 1) ++r;
    }

    CyclicCover c;
    c.root = r;
    std::vector<int> parent(t.n, -1);
    std::vector<bool> visited(t.n, false);
    visited[r] = true;
    int cur = r;
    c.sequence.push_back(r);
    while (true) {
        int next = -1;
        for (auto [y, w] : adj[cur])
            if (!visited[y]) {
                next = y;
                break;
            }
        if (next >= 0) {
            parent[next] = cur;
            visited[next] = true;
            cur = next;
        } else if (cur == r) {
            break;
        } else {
            cur = parent[cur];
        }
        c.sequence.push_back(cur);
    }
    c.sequence.pop_back();  // the final return to the root closes the cycle

    c.vertex_multiplicity.assign(t.n, 0);
    for (int x : c.sequence) ++c.vertex_multiplicity[x];
    std::map<std::pair<int, int>, int> em;
    const int len = c.length();
    for (int i = 0; i < len; ++i) {
        int a = c.sequence[i], b = c.sequence[(i + 1) % len];
        if (a > b) std::swap(a, b);
        ++em[{a, b}];
    }
    for (const Edge& e : t.edges) {
        const int m = em.count({e.u, e.v}) ? em[{e.u, e.v}] : 0;
        c.edge_multiplicity.push_back({e.u, e.v, static_cast<double>(m)});
        c.w_prime.push_back({e.u, e.v, static_cast<double>(m)});
    }
    c.mu_prime = Vector(t.n);
    for (int x = 0; x < t.n; ++x) c.mu_prime(x) = static_cast<double>(c.vertex_multiplicity[x]) / len;
    return c;
}

WeightedGraph cover_target(const SpanningTree& t, const CyclicCover& c) {
    return WeightedGraph(t.n, c.w_prime, c.mu_prime);
}

CoverVerdict verify_cover(const CyclicCover& c, const WeightedGraph& target) {
    CoverVerdict out;
    auto fail = [&](const std::string& reason) {
        if (std::find(out.reasons.begin(), out.reasons.end(), reason) == out.reasons.end()) out.reasons.push_back(reason);
        out.ok = false;
    };
    const int len = c.length();
    if (len < 2) {
        fail("edge preserving");
        return out;
    }
    std::map<std::pair<int, int>, int> hits;
    for (int i = 0; i < len; ++i) {
        int a = c.sequence[i], b = c.sequence[(i + 1) % len];
        if (a < 0 || b < 0 || a >= target.n() || b >= target.n() || !target.weight(a, b)) {
            fail("edge preserving");
            continue;
        }
        if (a > b) std::swap(a, b);
        ++hits[{a, b}];
    }
    for (const Edge& e : target.edges())
        if (!hits.count({e.u, e.v})) fail("edge preserving");

    // The cycle carries the uniform measure and unit weights.
    Vector pushed = Vector::Zero(target.n());
    for (int x : c.sequence)
        if (x >= 0 && x < target.n()) pushed(x) += 1.0 / len;
    if ((pushed - target.measure()).cwiseAbs().maxCoeff() > kExact) fail("measure preserving");

    for (const auto& [key, m] : hits) {
        const double w = *target.weight(key.first, key.second);
        if (std::abs(w / m - 1.0) > kExact) fail("weight preserving");
    }
    return out;
}

double cyclic_bound(int n) {
    if (n < 3) throw std::invalid_argument("cyclic_bound needs n >= 3");
    return 16.0 / (45.0 * n * n);
}

double lindblad_bound(double lambda_graph) {
    if (!(lambda_graph > 0.0)) throw std::invalid_argument("lindblad_bound needs a positive constant");
    return lambda_graph / (1.0 + 5.0 * std::numbers::pi * std::numbers::pi * lambda_graph);
}

BoundCertificate certified_bound(const WeightedGraph& g) {
    if (!is_connected(g)) throw DisconnectedGraphError();
    BoundCertificate cert;
    cert.n = g.n();
    cert.edge_count = static_cast<int>(g.edges().size());
    cert.uniform_measure = g.uniform_measure();
    cert.unit_weights = g.unit_weights();
    cert.single_cycle = is_single_cycle(g);
    cert.mst = kruskal_mst(g);
    cert.cover = traversal_cover(cert.mst);
    const CoverVerdict verdict = verify_cover(cert.cover, cover_target(cert.mst, cert.cover));
    if (!verdict.ok) throw ConsistencyError("traversal cover failed verification");
    cert.cover_verified = true;

    const Vector& mu = g.measure();
    const Vector& mu_p = cert.cover.mu_prime;
    cert.dmu_dmu_prime = (mu.array() / mu_p.array()).maxCoeff();
    cert.dmu_prime_dmu = (mu_p.array() / mu.array()).maxCoeff();
    cert.w_prime_over_w = 0.0;
    for (const Edge& e : cert.cover.w_prime)
        cert.w_prime_over_w = std::max(cert.w_prime_over_w, e.w / *g.weight(e.u, e.v));

    const double l2 = static_cast<double>(cert.mst.l) * cert.mst.l;
    cert.tree_general = 4.0 / (45.0 * l2 * cert.dmu_dmu_prime * cert.dmu_prime_dmu * cert.w_prime_over_w);
    cert.best = cert.tree_general;
    cert.best_source = "tree-general";
    cert.provenance.push_back("spanning tree: Kruskal, edges ordered by (weight, u, v)");
    cert.provenance.push_back("cover: preorder traversal from root " + std::to_string(cert.cover.root) +
                              ", children ascending, cycle length 2l = " + std::to_string(cert.cover.length()));
    cert.provenance.push_back("tree-general: 4 / (45 l^2 sup(mu/mu') sup(mu'/mu) sup(w'/w))");
    if (cert.uniform_measure && cert.unit_weights) {
        cert.corollary = 2.0 / (45.0 * l2 * cert.mst.d);
        cert.provenance.push_back(
            "corollary: 2 / (45 l^2 d) with d the maximum degree of the spanning tree, not of the graph");
        if (*cert.corollary > cert.best) {
            cert.best = *cert.corollary;
            cert.best_source = "corollary";
        }
    }
    if (cert.single_cycle && cert.uniform_measure && cert.unit_weights) {
        cert.cyclic_special = cyclic_bound(g.n());
        cert.provenance.push_back("cyclic-special: 16 / (45 n^2) for a single cycle");
        if (*cert.cyclic_special > cert.best) {
            cert.best = *cert.cyclic_special;
            cert.best_source = "cyclic-special";
        }
    }
    cert.lindblad = lindblad_bound(cert.best);
    cert.provenance.push_back("lindblad: best / (1 + 5 pi^2 best)");
    return cert;
}

ConstantChainReport verify_constant_chain() {
    ConstantChainReport r;
    r.grid_points = 10000;
    r.lower = 2 * std::exp(-0.5) + 2 * std::exp(-2.0) + 2 * std::exp(-4.5) + (48.0 / 125.0) * std::exp(-12.5);
    r.upper = 2 + 2 * std::exp(-0.5) + 2 * std::exp(-2.0) + (8.0 / 3.0) * std::exp(-4.5);
    r.grid_min = INFINITY;
    r.grid_max = -INFINITY;
    for (int i = 0; i < r.grid_points; ++i) {
        const double x = static_cast<double>(i) / (r.grid_points - 1);
        double s = 0.0;
        for (int k = -20; k <= 20; ++k) s += std::exp(-0.5 * (x - k) * (x - k));
        r.grid_min = std::min(r.grid_min, s);
        r.grid_max = std::max(r.grid_max, s);
    }
    if (r.grid_min < r.lower) {
        r.ok = false;
        r.violations.push_back("wrapped Gaussian lower bound");
    }
    if (r.grid_max > r.upper) {
        r.ok = false;
        r.violations.push_back("wrapped Gaussian upper bound");
    }
    r.ratio = 2.0 * r.lower / r.upper;
    if (!(r.ratio >= 0.8)) {
        r.ok = false;
        r.violations.push_back("2 lower/upper >= 4/5");
    }
    for (int n = 3; n <= 8; ++n) {
        const double lhs = 3.0 * (5.0 / 4.0) * (3.0 * n * n / 4.0);
        const double rhs = 45.0 * n * n / 16.0;
        const double res = std::abs(lhs - rhs) / rhs;
        r.chain_residuals.emplace_back(n, res);
        if (res > 1e-12) {
            r.ok = false;
            r.violations.push_back("chain 3 (5/4) (3n^2/4) = 45n^2/16 at n = " + std::to_string(n));
        }
    }
    return r;
}

}  // namespace lsi
