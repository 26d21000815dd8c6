#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lsi/matfun.hpp"

namespace lsi {

struct Edge {
    int u = 0;
    int v = 0;
    double w = 1.0;
    bool operator==(const Edge&) const = default;
};

/// Undirected graph with positive edge weights and a strictly positive probability measure.
class WeightedGraph {
public:
    /// Edges are stored with u < v, sorted by (u, v). A missing measure means uniform.
    WeightedGraph(int n, std::vector<Edge> edges, std::optional<Vector> measure = std::nullopt);

    int n() const { return n_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Vector& measure() const { return measure_; }

    bool uniform_measure() const;
    bool unit_weights() const;
    int degree(int x) const;
    int max_degree() const;
    std::optional<double> weight(int u, int v) const;

    /// Neighbours of each vertex in ascending order, with edge weights.
    std::vector<std::vector<std::pair<int, double>>> adjacency() const;

    /// Weighted combinatorial Laplacian D - W.
    RealMatrix laplacian() const;

private:
    int n_;
    std::vector<Edge> edges_;
    Vector measure_;
};

/// Parses {"n": int, "edges": [[u,v] or [u,v,w], ...], "measure": [...]}.
WeightedGraph load_graph(std::string_view text);
std::string save_graph(const WeightedGraph& g);

bool is_connected(const WeightedGraph& g);

/// A single cycle: connected, n >= 3, every vertex of degree two.
bool is_single_cycle(const WeightedGraph& g);

struct SpanningTree {
    int n = 0;
    std::vector<Edge> edges;  // weights inherited from the parent graph
    int l = 0;                // edge count
    int d = 0;                // maximum degree within the tree
};

/// Kruskal with edges ordered by (weight, u, v).
SpanningTree kruskal_mst(const WeightedGraph& g);

struct CyclicCover {
    int root = 0;
    std::vector<int> sequence;               // tree vertex at each cycle position
    std::vector<int> vertex_multiplicity;    // m(x): number of positions mapped to x
    std::vector<Edge> edge_multiplicity;     // tree edges with w = number of cycle edges mapped onto them
    Vector mu_prime;                         // m(x) / (2l)
    std::vector<Edge> w_prime;               // tree edges with w' = multiplicity

    int length() const { return static_cast<int>(sequence.size()); }
};

/// Preorder walk of the tree, children in ascending order; the closing return to the root is implicit.
CyclicCover traversal_cover(const SpanningTree& t, std::optional<int> root = std::nullopt);

/// The tree carrying the pushed-forward measure mu' and weights w'.
WeightedGraph cover_target(const SpanningTree& t, const CyclicCover& c);

struct CoverVerdict {
    bool ok = true;
    std::vector<std::string> reasons;
};

/// Checks the edge, measure and weight preserving conditions against `target` within 1e-12.
CoverVerdict verify_cover(const CyclicCover& c, const WeightedGraph& target);

double cyclic_bound(int n);
double lindblad_bound(double lambda_graph);

struct BoundCertificate {
    int n = 0;
    int edge_count = 0;
    bool uniform_measure = false;
    bool unit_weights = false;
    bool single_cycle = false;
    SpanningTree mst;
    CyclicCover cover;
    bool cover_verified = false;
    double dmu_dmu_prime = 0;   // sup mu / mu'
    double dmu_prime_dmu = 0;   // sup mu' / mu
    double w_prime_over_w = 0;  // sup w' / w on tree edges
    double tree_general = 0;
    std::optional<double> corollary;
    std::optional<double> cyclic_special;
    double best = 0;
    std::string best_source;
    double lindblad = 0;
    std::vector<std::string> provenance;
};

BoundCertificate certified_bound(const WeightedGraph& g);

struct ConstantChainReport {
    bool ok = true;
    int grid_points = 0;
    double grid_min = 0;  // min over the grid of sqrt(2 pi) g(x)
    double grid_max = 0;
    double lower = 0;
    double upper = 0;
    double ratio = 0;  // 2 lower / upper
    std::vector<std::pair<int, double>> chain_residuals;
    std::vector<std::string> violations;
};

/// Wrapped Gaussian bounds and the 3 (5/4) (3n^2/4) = 45 n^2 / 16 chain for n = 3..8.
ConstantChainReport verify_constant_chain();

}  // namespace lsi
