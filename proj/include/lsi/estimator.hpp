#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lsi/entropy.hpp"
#include "lsi/expectation.hpp"
#include "lsi/format.hpp"
#include "lsi/graphs.hpp"
#include "lsi/matfun.hpp"

namespace lsi {

struct EstimateOptions {
    int restarts = 200;
    std::uint64_t seed = 0;
    double tol = 1e-8;
    int max_iters = 2000;
    int threads = 1;
    /// Optional first start; rejected with DegenerateStartError when it is a fixed point.
    std::optional<Matrix> start;

    void validate() const;
};

/// Entropy production over entropy, evaluated at one state.
struct RatioValue {
    double fisher = 0.0;
    double divergence = 0.0;
    double ratio = 0.0;
};

/// Ratios below this divergence are 0/0 and count as fixed points.
inline constexpr double kDegenerateDivergence = 1e-12;

struct SandwichBlock {
    double certified_graph = 0.0;
    double certified_lindblad = 0.0;
    double classical_estimate = 0.0;
    double matrix_estimate = 0.0;
    double classical_gap = 0.0;  // lambda_2 of twice the Laplacian
    double matrix_gap = 0.0;     // lambda_2 of the graph Lindbladian
    double slack = 0.0;
    std::vector<std::string> violations;  // empty when every ordering holds
    bool ok() const { return violations.empty(); }
};

struct EstimateReport {
    std::string target;
    std::string functional;  // "mlsi", "cpsi" or "mlsi-classical"
    std::optional<double> p;
    double value = 0.0;
    Matrix witness;
    EstimateOptions options;
    std::vector<double> restart_minima;
    std::optional<double> spectral_gap;
    std::optional<SandwichBlock> sandwich;
};

Json report_to_json(const EstimateReport& report);

/// I(rho) / D(rho || E rho) for the logarithmic or power entropy.
RatioValue ratio_at(const SpectralSuperoperator& s, const ConditionalExpectation& e, const Matrix& rho,
                    const EntropyKind& kind);

/// Multistart Nelder-Mead minimization of I/D over states n exp(H)/tr exp(H), |H| <= 20.
EstimateReport mlsi_estimate(const SpectralSuperoperator& s, const ConditionalExpectation& e,
                             const EstimateOptions& opts, const std::string& target = "generator");

EstimateReport cpsi_estimate(const SpectralSuperoperator& s, const ConditionalExpectation& e, double p,
                             const EstimateOptions& opts, const std::string& target = "generator");

/// Estimate for S (x) id_m on M_n (x) M_m with the fixed-point projection (x) id_m.
EstimateReport clsi_probe(const SpectralSuperoperator& s, int m, const EstimateOptions& opts,
                          const std::string& target = "generator");

inline constexpr Index kAmplifiedDimensionCap = 12;

/// Minimum of fisher_graph / entropy_graph over positive functions; needs a uniform measure.
EstimateReport classical_mlsi_estimate(const WeightedGraph& g, const EstimateOptions& opts);

struct DecayRow {
    double t = 0.0;
    double divergence = 0.0;
    double log_divergence = 0.0;
};

struct DecayCurve {
    std::vector<DecayRow> rows;
    double fitted_rate = 0.0;   // minus the least-squares slope of ln D over rows with D > 1e-12
    double fit_residual = 0.0;  // largest |ln D - fitted line| over the fitted rows
    int fitted_points = 0;
};

/// D(T_t rho0 || E rho0) on a nondecreasing grid of times t >= 0.
DecayCurve decay_curve(const SpectralSuperoperator& s, const ConditionalExpectation& e, const State& rho0,
                       const std::vector<double>& t_grid);

std::string decay_csv(const DecayCurve& curve);

struct SandwichReport {
    EstimateReport classical;
    EstimateReport matrix;
    BoundCertificate certificate;
    SandwichBlock block;
};

/// Certified bounds against classical and matrix estimates for a connected graph on at most 5 vertices.
/// Each ordering lo <= hi is accepted when lo <= hi + slack; the default slack is 1e-6 + opts.tol and a
/// negative slack demands a strict margin.
SandwichReport sandwich_check(const WeightedGraph& g, const EstimateOptions& opts,
                              std::optional<double> slack = std::nullopt);

inline constexpr int kSandwichVertexCap = 5;

}  // namespace lsi
