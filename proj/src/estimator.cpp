#include "lsi/estimator.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <random>
#include <thread>

#include "lsi/lindblad.hpp"
#include "lsi/random.hpp"

namespace lsi {

namespace {

constexpr double kPenalty = 1e6;
constexpr double kLogCap = 20.0;
constexpr double kSeedDivergence = 1e-10;
constexpr int kResampleLimit = 10;

// Local search

using Objective = std::function<double(const std::vector<double>&)>;

struct SimplexOutcome {
    std::vector<double> x;
    double value = 0.0;
};

double simplex_trampoline(const gsl_vector* v, void* params) {
    const auto& f = *static_cast<const Objective*>(params);
    std::vector<double> x(v->size);
    for (std::size_t i = 0; i < v->size; ++i) x[i] = gsl_vector_get(v, i);
    const double y = f(x);
    return std::isfinite(y) ? y : kPenalty;
}

SimplexOutcome nelder_mead(const Objective& f, const std::vector<double>& start, double step, double tol,
                           int max_iters) {
    static std::once_flag quiet;
    std::call_once(quiet, [] { gsl_set_error_handler_off(); });
    const std::size_t k = start.size();
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(k), gsl_vector_free);
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> steps(gsl_vector_alloc(k), gsl_vector_free);
    for (std::size_t i = 0; i < k; ++i) gsl_vector_set(x.get(), i, start[i]);
    gsl_vector_set_all(steps.get(), step);
    std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> solver(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, k), gsl_multimin_fminimizer_free);
    gsl_multimin_function fn{&simplex_trampoline, k, const_cast<Objective*>(&f)};
    gsl_multimin_fminimizer_set(solver.get(), &fn, x.get(), steps.get());
    for (int iter = 0; iter < max_iters; ++iter) {
        if (gsl_multimin_fminimizer_iterate(solver.get()) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver.get()), tol) == GSL_SUCCESS) break;
    }
    SimplexOutcome out;
    out.value = gsl_multimin_fminimizer_minimum(solver.get());
    const gsl_vector* best = gsl_multimin_fminimizer_x(solver.get());
    out.x.resize(k);
    for (std::size_t i = 0; i < k; ++i) out.x[i] = gsl_vector_get(best, i);
    return out;
}

// Parametrizations

// Eigenvalues of H centered and, when their spread exceeds the cap, scaled back.
Vector capped_exponent(Vector lambda) {
    lambda.array() -= lambda.mean();
    const double spread = lambda.cwiseAbs().maxCoeff();
    if (spread > kLogCap) lambda *= kLogCap / spread;
    return lambda;
}

Vector normalized_exp(const Vector& lambda) {
    const Vector capped = capped_exponent(lambda);
    Vector w = (capped.array() - capped.maxCoeff()).exp();
    return w * (static_cast<double>(w.size()) / w.sum());
}

Matrix hermitian_from_params(const std::vector<double>& x, Index n) {
    Matrix h(n, n);
    std::size_t k = 0;
    for (Index i = 0; i < n; ++i) h(i, i) = x[k++];
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) {
            h(i, j) = cplx(x[k], x[k + 1]);
            h(j, i) = std::conj(h(i, j));
            k += 2;
        }
    return h;
}

std::vector<double> params_from_hermitian(const Matrix& h) {
    const Index n = h.rows();
    std::vector<double> x;
    for (Index i = 0; i < n; ++i) x.push_back(h(i, i).real());
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) {
            x.push_back(h(i, j).real());
            x.push_back(h(i, j).imag());
        }
    return x;
}

Matrix state_from_hermitian(const Matrix& h) {
    const auto sd = eig_hermitian(h);
    const Vector w = normalized_exp(sd.eigenvalues);
    Matrix rho = sd.eigenvectors * w.cast<cplx>().asDiagonal() * sd.eigenvectors.adjoint();
    return (rho + rho.adjoint()) / 2.0;
}

// A search space maps parameter vectors to states and scores states.
struct SearchSpace {
    Index dim = 0;
    std::function<Matrix(const std::vector<double>&)> to_state;
    std::function<std::vector<double>(const Matrix&)> to_params;
    std::function<RatioValue(const Matrix&)> score;
    std::function<std::vector<double>(Rng&, double)> random_params;
};

SearchSpace matrix_space(Index n, std::function<RatioValue(const Matrix&)> score) {
    SearchSpace s;
    s.dim = n;
    s.to_state = [n](const std::vector<double>& x) { return state_from_hermitian(hermitian_from_params(x, n)); };
    s.to_params = [](const Matrix& rho) { return params_from_hermitian(matrix_log(rho)); };
    s.score = std::move(score);
    s.random_params = [n](Rng& rng, double scale) { return params_from_hermitian(random_hermitian(rng, n, scale)); };
    return s;
}

SearchSpace diagonal_space(Index n, std::function<RatioValue(const Matrix&)> score) {
    SearchSpace s;
    s.dim = n;
    s.to_state = [n](const std::vector<double>& x) {
        return Matrix(normalized_exp(Eigen::Map<const Vector>(x.data(), n)).cast<cplx>().asDiagonal());
    };
    s.to_params = [](const Matrix& rho) {
        std::vector<double> x;
        for (Index i = 0; i < rho.rows(); ++i) x.push_back(std::log(rho(i, i).real()));
        return x;
    };
    s.score = std::move(score);
    s.random_params = [n](Rng& rng, double scale) {
        std::normal_distribution<double> gauss(0.0, scale);
        std::vector<double> x(static_cast<std::size_t>(n));
        for (double& v : x) v = gauss(rng);
        return x;
    };
    return s;
}

double penalized(const SearchSpace& space, const std::vector<double>& x) {
    try {
        const RatioValue r = space.score(space.to_state(x));
        if (!(r.divergence >= kDegenerateDivergence) || !std::isfinite(r.ratio)) return kPenalty;
        return r.ratio;
    } catch (const std::exception&) {
        return kPenalty;
    }
}

struct RestartResult {
    double value = kPenalty;
    Matrix witness;
};

struct SeedState {
    Matrix rho;
    double step = 0.0;  // Nelder-Mead step in parameter space
};

RestartResult run_restart(const SearchSpace& space, const EstimateOptions& opts, const std::vector<SeedState>& seeds,
                          int index) {
    Rng rng(opts.seed ^ static_cast<std::uint64_t>(index));
    std::vector<double> start;
    double step = 0.0;
    if (index < static_cast<int>(seeds.size())) {
        start = space.to_params(seeds[static_cast<std::size_t>(index)].rho);
        step = seeds[static_cast<std::size_t>(index)].step;
    }
    if (start.empty() || penalized(space, start) >= kPenalty) {
        std::uniform_real_distribution<double> log_scale(std::log(0.02), std::log(2.0));
        bool found = false;
        for (int attempt = 0; attempt < kResampleLimit && !found; ++attempt) {
            const double scale = std::exp(log_scale(rng));
            start = space.random_params(rng, scale);
            step = 0.5 * scale;
            found = penalized(space, start) < kPenalty;
        }
        if (!found) throw DegenerateStartError("every sampled start lies on the fixed-point manifold");
    }
    const Objective f = [&](const std::vector<double>& x) { return penalized(space, x); };
    const SimplexOutcome local = nelder_mead(f, start, step, opts.tol, opts.max_iters);
    RestartResult out;
    // Re-score the exact state kept as the witness so the reported value reproduces bit for bit.
    out.witness = space.to_state(local.x);
    out.value = penalized(space, local.x);
    const double start_value = penalized(space, start);
    if (start_value < out.value) {
        out.witness = space.to_state(start);
        out.value = start_value;
    }
    return out;
}

EstimateReport minimize(const SearchSpace& space, const EstimateOptions& opts, std::vector<SeedState> seeds) {
    opts.validate();
    if (opts.start) {
        if (opts.start->rows() != space.dim) throw DimensionError("start state has the wrong dimension");
        const State start(*opts.start);
        const RatioValue r = space.score(start.matrix());
        if (!(r.divergence >= kDegenerateDivergence))
            throw DegenerateStartError("start state is a fixed point (D = " + format_real(r.divergence) + ")");
        seeds.insert(seeds.begin(), SeedState{start.matrix(), 0.25});
    }
    const int restarts = opts.restarts;
    std::vector<RestartResult> results(static_cast<std::size_t>(restarts));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(restarts));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < restarts; i = next++) {
            try {
                results[static_cast<std::size_t>(i)] = run_restart(space, opts, seeds, i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    const int threads = std::max(1, std::min(opts.threads, restarts));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    EstimateReport report;
    report.options = opts;
    int best = -1;
    for (int i = 0; i < restarts; ++i) {
        if (errors[static_cast<std::size_t>(i)]) std::rethrow_exception(errors[static_cast<std::size_t>(i)]);
        const RestartResult& r = results[static_cast<std::size_t>(i)];
        report.restart_minima.push_back(r.value);
        if (best < 0 || r.value < results[static_cast<std::size_t>(best)].value) best = i;
    }
    report.value = results[static_cast<std::size_t>(best)].value;
    report.witness = results[static_cast<std::size_t>(best)].witness;
    return report;
}

// Seeds

// Hermitian vector of the lowest nonzero eigenspace of s, or nothing when s has no gap.
std::optional<Matrix> gap_direction(const SpectralSuperoperator& s) {
    for (Index i = 0; i < s.spectrum().size(); ++i) {
        if (s.spectrum()(i) <= kKernelThreshold) continue;
        const Matrix x = unvec(s.eigenbasis().col(i), s.dim());
        Matrix h = (x + x.adjoint()) / 2.0;
        if (h.norm() < 1e-6 * x.norm()) h = (x - x.adjoint()) / cplx(0, 2);
        return h / eig_hermitian(h).eigenvalues.cwiseAbs().maxCoeff();
    }
    return std::nullopt;
}

// Perturbations 1 +- eps x of the identity: eps tuned so that D is about 1e-10, and a moderate one.
std::vector<SeedState> direction_seeds(const Matrix& x) {
    const Index n = x.rows();
    const Matrix id = Matrix::Identity(n, n);
    const double second_moment = ntrace(Matrix(x * x)).real();
    const double eps = std::sqrt(2.0 * kSeedDivergence / second_moment);
    std::vector<SeedState> seeds;
    for (double sign : {1.0, -1.0}) seeds.push_back({id + sign * eps * x, 0.25 * eps});
    for (double sign : {1.0, -1.0}) seeds.push_back({id + sign * 0.5 * x, 0.1});
    return seeds;
}

Matrix symmetrized(const Matrix& m) { return (m + m.adjoint()) / 2.0; }

RatioValue ratio_from(const std::function<Matrix(const Matrix&)>& generator,
                      const std::function<Matrix(const Matrix&)>& expectation, const Matrix& rho,
                      const EntropyKind& kind) {
    const Matrix sigma = symmetrized(expectation(rho));
    const BregmanEvaluation b = bregman(rho, sigma, kind);
    // S annihilates the fixed part and F'(sigma) is fixed, so I = tau(S(rho - sigma)(F'(rho) - F'(sigma))).
    const Matrix production = generator(Matrix(rho - sigma));
    RatioValue r;
    r.fisher = production.cwiseProduct(b.gradient_gap.transpose()).sum().real() / static_cast<double>(rho.rows());
    r.divergence = b.divergence;
    r.ratio = r.fisher / r.divergence;
    return r;
}

EstimateReport estimate_with_seeds(const SpectralSuperoperator& s, const ConditionalExpectation& e,
                                   const EntropyKind& kind, const EstimateOptions& opts,
                                   std::vector<SeedState> extra) {
    if (e.dim() != s.dim()) throw DimensionError("conditional expectation and generator differ in dimension");
    SearchSpace space = matrix_space(s.dim(), [&s, &e, kind](const Matrix& rho) { return ratio_at(s, e, rho, kind); });
    std::vector<SeedState> seeds;
    if (const auto x = gap_direction(s)) seeds = direction_seeds(Matrix(*x - e.apply(*x)));
    seeds.insert(seeds.begin() + std::min<std::ptrdiff_t>(2, static_cast<std::ptrdiff_t>(seeds.size())),
                 extra.begin(), extra.end());
    EstimateReport report = minimize(space, opts, std::move(seeds));
    try {
        report.spectral_gap = spectral_gap(s);
    } catch (const DegenerateGeneratorError&) {
        report.spectral_gap.reset();
    }
    return report;
}

Json options_to_json(const EstimateOptions& o) {
    Json j;
    j["restarts"] = o.restarts;
    j["seed"] = o.seed;
    j["tol"] = o.tol;
    j["max_iters"] = o.max_iters;
    // Thread count is left out: it never changes the result, and reports must not depend on it.
    j["start"] = o.start ? matrix_to_json(*o.start) : Json(nullptr);
    return j;
}

}  // namespace

void EstimateOptions::validate() const {
    if (restarts < 1) throw std::invalid_argument("restarts must be at least 1");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
    if (threads < 1) throw std::invalid_argument("threads must be at least 1");
}

RatioValue ratio_at(const SpectralSuperoperator& s, const ConditionalExpectation& e, const Matrix& rho,
                    const EntropyKind& kind) {
    return ratio_from([&s](const Matrix& x) { return s.apply(x); }, [&e](const Matrix& x) { return e.apply(x); },
                      rho, kind);
}

EstimateReport mlsi_estimate(const SpectralSuperoperator& s, const ConditionalExpectation& e,
                             const EstimateOptions& opts, const std::string& target) {
    EstimateReport report = estimate_with_seeds(s, e, EntropyKind::logarithmic(), opts, {});
    report.target = target;
    report.functional = "mlsi";
    return report;
}

EstimateReport cpsi_estimate(const SpectralSuperoperator& s, const ConditionalExpectation& e, double p,
                             const EstimateOptions& opts, const std::string& target) {
    EstimateReport report = estimate_with_seeds(s, e, EntropyKind::power(p), opts, {});
    report.target = target;
    report.functional = "cpsi";
    report.p = p;
    return report;
}

EstimateReport clsi_probe(const SpectralSuperoperator& s, int m, const EstimateOptions& opts,
                          const std::string& target) {
    if (m < 1) throw DimensionError("amplification must be at least 1");
    if (s.dim() * m > kAmplifiedDimensionCap)
        throw DimensionError("amplified dimension exceeds " + std::to_string(kAmplifiedDimensionCap));
    const ConditionalExpectation e = ConditionalExpectation::kernel_projection(s);
    const std::string name = target + " (x) M_" + std::to_string(m);
    if (m == 1) return mlsi_estimate(s, e, opts, name);

    // The unamplified witness tensored with the identity has the same ratio.
    EstimateOptions base_opts = opts;
    base_opts.start.reset();
    const EstimateReport base = mlsi_estimate(s, e, base_opts, target);
    const Index big = s.dim() * m;
    const Matrix id_m = Matrix::Identity(m, m);
    std::vector<SeedState> seeds{{kron(base.witness, id_m), 0.05}};
    if (const auto x = gap_direction(s)) {
        const auto lifted = direction_seeds(Matrix(*x - e.apply(*x)));
        for (const SeedState& seed : lifted) seeds.push_back({kron(seed.rho, id_m), seed.step});
    }
    const auto score = [&s, &e, m](const Matrix& rho) {
        return ratio_from([&](const Matrix& x) { return amplify_apply(s, m, x); },
                          [&](const Matrix& x) { return amplify_apply(e, m, x); }, rho, EntropyKind::logarithmic());
    };
    EstimateReport report = minimize(matrix_space(big, score), opts, std::move(seeds));
    report.target = name;
    report.functional = "mlsi";
    report.spectral_gap = base.spectral_gap;
    return report;
}

EstimateReport classical_mlsi_estimate(const WeightedGraph& g, const EstimateOptions& opts) {
    if (!g.uniform_measure()) throw std::invalid_argument("classical estimate needs a uniform measure");
    const Index n = g.n();
    const auto score = [&g](const Matrix& rho) {
        const MatrixField f = MatrixField::scalar(rho.diagonal().real());
        RatioValue r;
        r.fisher = fisher_graph(g, f);
        r.divergence = entropy_graph(g, f, true);
        r.ratio = r.fisher / r.divergence;
        return r;
    };
    const RealMatrix generator = 2.0 * g.laplacian();
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(generator);
    std::vector<SeedState> seeds;
    for (Index i = 0; i < n; ++i) {
        if (es.eigenvalues()(i) <= kKernelThreshold) continue;
        Vector v = es.eigenvectors().col(i);
        v /= v.cwiseAbs().maxCoeff();
        seeds = direction_seeds(Matrix(v.cast<cplx>().asDiagonal()));
        break;
    }
    EstimateReport report = minimize(diagonal_space(n, score), opts, std::move(seeds));
    report.target = "graph n=" + std::to_string(n) + " edges=" + std::to_string(g.edges().size());
    report.functional = "mlsi-classical";
    report.spectral_gap = spectral_gap(generator);
    return report;
}

DecayCurve decay_curve(const SpectralSuperoperator& s, const ConditionalExpectation& e, const State& rho0,
                       const std::vector<double>& t_grid) {
    if (t_grid.empty()) throw std::invalid_argument("time grid is empty");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] >= 0.0)) throw std::invalid_argument("times must be nonnegative");
        if (i > 0 && t_grid[i] < t_grid[i - 1]) throw std::invalid_argument("times must be nondecreasing");
    }
    const Matrix fixed = symmetrized(e.apply(rho0.matrix()));
    const double initial = lindblad_rel_entropy(rho0.matrix(), fixed);
    if (!(initial >= kDegenerateDivergence))
        throw DegenerateStartError("initial state is a fixed point (D = " + format_real(initial) + ")");

    DecayCurve curve;
    for (double t : t_grid) {
        const Matrix rho_t = symmetrized(semigroup_apply(s, t, rho0.matrix()));
        DecayRow row;
        row.t = t;
        row.divergence = lindblad_rel_entropy(rho_t, fixed);
        row.log_divergence = row.divergence > 0.0 ? std::log(row.divergence) : -INFINITY;
        if (!curve.rows.empty() && row.divergence > curve.rows.back().divergence + 1e-10)
            throw IntegrityError("relative entropy increased from " + format_real(curve.rows.back().divergence) +
                                 " to " + format_real(row.divergence) + " at t = " + format_real(t));
        curve.rows.push_back(row);
    }

    double st = 0, sy = 0, stt = 0, sty = 0;
    int k = 0;
    for (const DecayRow& r : curve.rows) {
        if (!(r.divergence > kDegenerateDivergence)) continue;
        st += r.t;
        sy += r.log_divergence;
        stt += r.t * r.t;
        sty += r.t * r.log_divergence;
        ++k;
    }
    curve.fitted_points = k;
    const double denom = k * stt - st * st;
    if (k < 2 || !(std::abs(denom) > 0.0))
        throw IntegrityError("fewer than two distinct grid points with D > 1e-12 to fit a rate");
    const double slope = (k * sty - st * sy) / denom;
    const double intercept = (sy - slope * st) / k;
    curve.fitted_rate = -slope;
    for (const DecayRow& r : curve.rows)
        if (r.divergence > kDegenerateDivergence)
            curve.fit_residual = std::max(curve.fit_residual, std::abs(r.log_divergence - (intercept + slope * r.t)));
    return curve;
}

std::string decay_csv(const DecayCurve& curve) {
    std::string out = "t,D,lnD\n";
    for (const DecayRow& r : curve.rows)
        out += format_real(r.t) + "," + format_real(r.divergence) + "," +
               (std::isfinite(r.log_divergence) ? format_real(r.log_divergence) : std::string("-inf")) + "\n";
    return out;
}

SandwichReport sandwich_check(const WeightedGraph& g, const EstimateOptions& opts, std::optional<double> slack) {
    if (g.n() > kSandwichVertexCap)
        throw DimensionError("sandwich check is limited to " + std::to_string(kSandwichVertexCap) + " vertices");
    if (!is_connected(g)) throw DisconnectedGraphError();
    if (!g.uniform_measure()) throw std::invalid_argument("sandwich check needs a uniform measure");

    SandwichReport out;
    out.certificate = certified_bound(g);
    out.classical = classical_mlsi_estimate(g, opts);

    const SpectralSuperoperator s = graph_lindblad(g);
    const ConditionalExpectation e = ConditionalExpectation::kernel_projection(s);
    // Diagonal states are matrix states, so the classical witness bounds the matrix infimum.
    EstimateReport matrix = estimate_with_seeds(s, e, EntropyKind::logarithmic(), opts,
                                                {SeedState{out.classical.witness, 0.05}});
    matrix.target = out.classical.target;
    matrix.functional = "mlsi";

    SandwichBlock& b = out.block;
    b.certified_graph = out.certificate.best;
    b.certified_lindblad = out.certificate.lindblad;
    b.classical_estimate = out.classical.value;
    b.matrix_estimate = matrix.value;
    b.classical_gap = *out.classical.spectral_gap;
    b.matrix_gap = spectral_gap(s);
    b.slack = slack.value_or(1e-6 + opts.tol);
    auto require = [&](double lo, double hi, const char* name) {
        if (!(lo <= hi + b.slack)) b.violations.emplace_back(name);
    };
    require(b.certified_lindblad, b.matrix_estimate, "certified-lindblad <= matrix-estimate");
    require(b.matrix_estimate, b.classical_estimate, "matrix-estimate <= classical-estimate");
    require(b.certified_graph, b.classical_estimate, "certified-graph <= classical-estimate");
    require(b.classical_estimate, 2.0 * b.classical_gap, "classical-estimate <= 2 classical-gap");
    require(b.matrix_estimate, 2.0 * b.matrix_gap, "matrix-estimate <= 2 matrix-gap");
    matrix.sandwich = b;
    out.matrix = std::move(matrix);
    return out;
}

Json report_to_json(const EstimateReport& r) {
    Json j;
    j["schema_version"] = 1;
    j["target"] = r.target;
    j["functional"] = r.functional;
    j["p"] = r.p ? Json(*r.p) : Json(nullptr);
    j["value"] = r.value;
    j["seed"] = r.options.seed;
    j["restarts"] = r.options.restarts;
    j["options"] = options_to_json(r.options);
    j["spectral_gap"] = r.spectral_gap ? Json(*r.spectral_gap) : Json(nullptr);
    j["upper_bound"] = r.spectral_gap ? Json(2.0 * *r.spectral_gap) : Json(nullptr);
    j["restart_minima"] = r.restart_minima;
    j["witness"] = matrix_to_json(r.witness);
    if (r.sandwich) {
        const SandwichBlock& b = *r.sandwich;
        Json s;
        s["certified_graph"] = b.certified_graph;
        s["certified_lindblad"] = b.certified_lindblad;
        s["classical_estimate"] = b.classical_estimate;
        s["matrix_estimate"] = b.matrix_estimate;
        s["classical_gap"] = b.classical_gap;
        s["matrix_gap"] = b.matrix_gap;
        s["slack"] = b.slack;
        s["verdict"] = b.ok() ? "pass" : "fail";
        s["violations"] = b.violations;
        j["sandwich"] = s;
    }
    return j;
}

}  // namespace lsi
