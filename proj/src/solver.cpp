#include "lrst/solver.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace lrst {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

DenseTensor add_sparse(const DenseTensor& dense, const SparseTensor& sparse) {
    DenseTensor out = dense;
    for (const auto& e : sparse.entries()) out[e.flat] += e.value;
    return out;
}

// Rank collapse check on the (small) core unfoldings.
bool core_rank_deficient(const DenseTensor& core, std::span<const Index> ranks) {
    for (Index j = 0; j < core.order(); ++j) {
        const Matrix m = matricize(core, j);
        const Vector sv = Eigen::JacobiSVD<Matrix>(m).singularValues();
        const Index r = ranks[static_cast<std::size_t>(j)];
        if (sv.size() < r || sv[0] == 0.0 || sv[r - 1] <= 1e-12 * sv[0]) {
            return true;
        }
    }
    return false;
}

void record_truth(TraceRow& row, const Truth* truth, const DenseTensor& t_dense,
                  const SparseTensor& s_hat) {
    if (truth == nullptr || truth->t == nullptr) return;
    row.has_truth = true;
    row.rel_err_t = (t_dense - *truth->t).frobenius_norm() / truth->t->frobenius_norm();
    if (truth->s != nullptr) {
        row.err_s = s_hat.frobenius_distance(*truth->s);
    }
}

double safe_rel_change(const DenseTensor& next, const DenseTensor& prev) {
    const double denom = next.frobenius_norm();
    const double diff = (next - prev).frobenius_norm();
    if (denom == 0.0) return diff == 0.0 ? 0.0 : kInf;
    return diff / denom;
}

}  // namespace

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::tolerance: return "tolerance";
        case Termination::max_iter: return "max_iter";
        case Termination::rank_deficient: return "rank_deficient";
        case Termination::numerical_error: return "numerical_error";
    }
    return "unknown";
}

ResolvedParams resolve_params(const SolverConfig& cfg, const LossModel& model) {
    const Shape& shape = model_shape(model);
    if (cfg.rank.empty() || static_cast<Index>(cfg.rank.size()) != shape.order()) {
        throw std::invalid_argument("SolverConfig: rank must have one entry per mode");
    }
    for (Index j = 0; j < shape.order(); ++j) {
        if (cfg.rank[static_cast<std::size_t>(j)] < 1 ||
            cfg.rank[static_cast<std::size_t>(j)] > shape.dim(j)) {
            throw std::invalid_argument("SolverConfig: rank out of range");
        }
    }
    if (cfg.alpha < 0.0 || cfg.alpha > 1.0) {
        throw std::invalid_argument("SolverConfig: alpha must be in [0, 1]");
    }
    if (cfg.gamma < 1.0) {
        throw std::invalid_argument("SolverConfig: gamma must be at least 1");
    }
    if (cfg.l_max < 1) {
        throw std::invalid_argument("SolverConfig: l_max must be positive");
    }
    if (cfg.rel_tol < 0.0) {
        throw std::invalid_argument("SolverConfig: rel_tol must be non-negative");
    }

    ResolvedParams out{};
    out.mu1 = cfg.mu1 > 0.0 ? cfg.mu1 : default_mu1(shape);
    out.alpha_eff = std::min(1.0, cfg.gamma * cfg.alpha);

    const ModelKind kind = model_kind(model);
    double beta_lo = 0.005, beta_hi = 0.36;
    if (kind != ModelKind::gaussian) {
        const ConvexityBounds b = convexity_bounds(model, cfg.zeta);
        const double scale = b.b_lower / (b.b_upper * b.b_upper);
        beta_lo = 0.005 * scale;
        beta_hi = 0.36 * scale;
        out.beta = cfg.beta > 0.0 ? cfg.beta : 0.3 * scale;
    } else {
        out.beta = cfg.beta > 0.0 ? cfg.beta : 0.3;
    }
    if (out.beta < beta_lo || out.beta > beta_hi) {
        std::ostringstream msg;
        msg << "step size " << out.beta << " outside the admissible window [" << beta_lo << ", "
            << beta_hi << "]";
        if (cfg.theory_mode) {
            throw std::invalid_argument("SolverConfig: " + msg.str());
        }
        out.warnings.push_back(msg.str());
    }

    if (cfg.k_pr != 0.0) {
        if (!(cfg.k_pr > 0.0)) {
            throw std::invalid_argument("SolverConfig: k_pr must be positive or the inf sentinel");
        }
        out.k_pr = cfg.k_pr;
    } else {
        switch (kind) {
            case ModelKind::gaussian: out.k_pr = kInf; break;
            case ModelKind::bernoulli: out.k_pr = 1.0; break;
            case ModelKind::poisson: out.k_pr = cfg.c1 * cfg.zeta; break;
        }
    }
    return out;
}

FitResult rgrad_sparse(const LossModel& model, const TuckerTensor& init, const SolverConfig& cfg,
                       const Truth* truth) {
    const ResolvedParams params = resolve_params(cfg, model);
    const Shape& shape = model_shape(model);
    if (init.dense_shape() != shape) {
        throw std::invalid_argument("rgrad_sparse: init shape mismatch");
    }
    const double sqrt_dstar = std::sqrt(static_cast<double>(shape.size()));

    FitResult fit;
    fit.params = params;
    fit.t_hat = init;
    DenseTensor t_dense = tucker_to_dense(init);
    fit.s_hat = gradient_prune(t_dense, model, params.alpha_eff, params.k_pr);

    {
        TraceRow row{0, loss_value(model, add_sparse(t_dense, fit.s_hat)), kNan, kNan,
                     fit.s_hat.nnz()};
        record_truth(row, truth, t_dense, fit.s_hat);
        fit.trace.rows.push_back(row);
    }

    for (Index l = 0; l < cfg.l_max; ++l) {
        const auto start = Clock::now();
        DenseTensor w;
        double zeta_next = kNan;
        TuckerTensor t_next;
        try {
            const DenseTensor g = gradient(model, add_sparse(t_dense, fit.s_hat));
            const TangentVector direction = tangent_project(fit.t_hat, g);
            w = t_dense - params.beta * tangent_to_dense(direction);
            zeta_next = (16.0 / 7.0) * params.mu1 * w.frobenius_norm() / sqrt_dstar;
            t_next = trim(w, zeta_next, cfg.rank);
        } catch (const RankDeficientError& e) {
            fit.terminated_by = Termination::rank_deficient;
            fit.diagnostic = e.what();
            return fit;
        } catch (const NumericalError& e) {
            fit.terminated_by = Termination::numerical_error;
            fit.diagnostic = e.what();
            return fit;
        }
        if (core_rank_deficient(t_next.core(), cfg.rank)) {
            fit.terminated_by = Termination::rank_deficient;
            fit.diagnostic = "iterate collapsed below the declared rank";
            return fit;
        }
        const DenseTensor t_next_dense = tucker_to_dense(t_next);
        SparseTensor s_next;
        double loss_next;
        try {
            s_next = gradient_prune(t_next_dense, model, params.alpha_eff, params.k_pr);
            loss_next = loss_value(model, add_sparse(t_next_dense, s_next));
        } catch (const NumericalError& e) {
            fit.terminated_by = Termination::numerical_error;
            fit.diagnostic = e.what();
            return fit;
        }
        const double rel_change = safe_rel_change(t_next_dense, t_dense);

        fit.t_hat = std::move(t_next);
        t_dense = t_next_dense;
        fit.s_hat = std::move(s_next);
        fit.step_ms.push_back(elapsed_ms(start));

        TraceRow row{l + 1, loss_next, rel_change, zeta_next, fit.s_hat.nnz()};
        record_truth(row, truth, t_dense, fit.s_hat);
        fit.trace.rows.push_back(row);

        if (rel_change < cfg.rel_tol) {
            fit.terminated_by = Termination::tolerance;
            return fit;
        }
    }
    fit.terminated_by = Termination::max_iter;
    return fit;
}

namespace {

// HOSVD of T - beta * P_T(G) computed inside the rank-2r subspace spanned by
// [U_i, Q_i] with Q_i an orthonormal basis of the gauge-orthogonal mode part.
TuckerTensor structured_retraction(const TuckerTensor& t, const TangentVector& direction,
                                   double beta, std::span<const Index> ranks,
                                   double* rel_change_out) {
    const Index m = t.order();
    const std::vector<Index> r = t.ranks();
    std::vector<Index> ext_dims(static_cast<std::size_t>(m));
    std::vector<Matrix> v_bases(static_cast<std::size_t>(m));
    std::vector<Matrix> r_factors(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) {
        const Matrix& u = t.factor(i);
        const Matrix& w = direction.mode_parts[static_cast<std::size_t>(i)];
        Eigen::HouseholderQR<Matrix> qr(w);
        const Matrix q = qr.householderQ() * Matrix::Identity(w.rows(), w.cols());
        Matrix rmat = qr.matrixQR().topRows(w.cols()).triangularView<Eigen::Upper>();
        Matrix v(u.rows(), u.cols() + q.cols());
        v << u, q;
        v_bases[static_cast<std::size_t>(i)] = std::move(v);
        r_factors[static_cast<std::size_t>(i)] = std::move(rmat);
        ext_dims[static_cast<std::size_t>(i)] = u.cols() + w.cols();
    }

    // Extended core: the all-U block carries C - beta * D, and each block
    // with mode i in the Q range carries -beta * (C x_i R_i).
    DenseTensor ext{Shape(ext_dims)};
    const Shape& core_shape = t.core().shape();
    auto scatter = [&](const DenseTensor& block, Index q_mode) {
        std::vector<Index> idx(static_cast<std::size_t>(m), 0);
        for (Index flat = 0; flat < block.size(); ++flat) {
            std::vector<Index> ext_idx = block.shape().multi_index(flat);
            if (q_mode >= 0) {
                ext_idx[static_cast<std::size_t>(q_mode)] +=
                    r[static_cast<std::size_t>(q_mode)];
            }
            ext[ext.shape().flat_index(ext_idx)] += block[flat];
        }
    };
    {
        DenseTensor top = t.core();
        top -= beta * direction.core_part;
        scatter(top, -1);
        for (Index i = 0; i < m; ++i) {
            DenseTensor block =
                mode_product(t.core(), r_factors[static_cast<std::size_t>(i)], i);
            block *= -beta;
            scatter(block, i);
        }
    }

    const TuckerTensor inner = hosvd(ext, ranks);
    if (rel_change_out != nullptr) {
        // both iterates live in the V bases: T_l is the core embedding, the
        // next iterate is inner.core expanded through inner's factors
        DenseTensor next_ext = tucker_to_dense(inner);
        DenseTensor prev_ext(ext.shape());
        {
            std::vector<Index> idx(static_cast<std::size_t>(m), 0);
            for (Index flat = 0; flat < t.core().size(); ++flat) {
                std::vector<Index> ext_idx = core_shape.multi_index(flat);
                prev_ext[prev_ext.shape().flat_index(ext_idx)] = t.core()[flat];
            }
        }
        *rel_change_out = safe_rel_change(next_ext, prev_ext);
    }
    std::vector<Matrix> factors(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) {
        factors[static_cast<std::size_t>(i)] =
            v_bases[static_cast<std::size_t>(i)] * inner.factor(i);
    }
    return TuckerTensor(inner.core(), std::move(factors));
}

FitResult lowrank_descent(const LossModel& model, const TuckerTensor& init,
                          const SolverConfig& cfg, const Truth* truth, bool riemannian) {
    const ResolvedParams params = resolve_params(cfg, model);
    const Shape& shape = model_shape(model);
    if (init.dense_shape() != shape) {
        throw std::invalid_argument("lowrank solver: init shape mismatch");
    }

    FitResult fit;
    fit.params = params;
    fit.t_hat = init;
    fit.s_hat = SparseTensor(shape);
    DenseTensor t_dense = tucker_to_dense(init);

    {
        TraceRow row{0, loss_value(model, t_dense), kNan, kNan, 0};
        record_truth(row, truth, t_dense, fit.s_hat);
        fit.trace.rows.push_back(row);
    }

    for (Index l = 0; l < cfg.l_max; ++l) {
        const auto start = Clock::now();
        TuckerTensor t_next;
        double rel_change = 0.0;
        DenseTensor t_next_dense;
        double loss_next;
        try {
            const DenseTensor g = gradient(model, t_dense);
            if (riemannian) {
                const TangentVector direction = tangent_project(fit.t_hat, g);
                t_next = structured_retraction(fit.t_hat, direction, params.beta, cfg.rank,
                                               &rel_change);
                if (core_rank_deficient(t_next.core(), cfg.rank)) {
                    fit.terminated_by = Termination::rank_deficient;
                    fit.diagnostic = "iterate collapsed below the declared rank";
                    return fit;
                }
                t_next_dense = tucker_to_dense(t_next);
            } else {
                DenseTensor w = t_dense;
                w -= params.beta * g;
                t_next = hosvd(w, cfg.rank);
                if (core_rank_deficient(t_next.core(), cfg.rank)) {
                    fit.terminated_by = Termination::rank_deficient;
                    fit.diagnostic = "iterate collapsed below the declared rank";
                    return fit;
                }
                t_next_dense = tucker_to_dense(t_next);
                rel_change = safe_rel_change(t_next_dense, t_dense);
            }
            loss_next = loss_value(model, t_next_dense);
        } catch (const RankDeficientError& e) {
            fit.terminated_by = Termination::rank_deficient;
            fit.diagnostic = e.what();
            return fit;
        } catch (const NumericalError& e) {
            fit.terminated_by = Termination::numerical_error;
            fit.diagnostic = e.what();
            return fit;
        }

        fit.t_hat = std::move(t_next);
        t_dense = std::move(t_next_dense);
        fit.step_ms.push_back(elapsed_ms(start));

        TraceRow row{l + 1, loss_next, rel_change, kNan, 0};
        record_truth(row, truth, t_dense, fit.s_hat);
        fit.trace.rows.push_back(row);

        if (rel_change < cfg.rel_tol) {
            fit.terminated_by = Termination::tolerance;
            return fit;
        }
    }
    fit.terminated_by = Termination::max_iter;
    return fit;
}

}  // namespace

FitResult rgrad_lowrank(const LossModel& model, const TuckerTensor& init, const SolverConfig& cfg,
                        const Truth* truth) {
    return lowrank_descent(model, init, cfg, truth, /*riemannian=*/true);
}

FitResult pgd_lowrank(const LossModel& model, const TuckerTensor& init, const SolverConfig& cfg,
                      const Truth* truth) {
    return lowrank_descent(model, init, cfg, truth, /*riemannian=*/false);
}

namespace {

bool non_converged(const FitResult& fit) {
    if (fit.terminated_by == Termination::tolerance) return false;
    if (fit.terminated_by == Termination::rank_deficient ||
        fit.terminated_by == Termination::numerical_error) {
        return true;
    }
    const auto& rows = fit.trace.rows;
    if (rows.size() < 11) return false;
    return rows.back().loss > rows[rows.size() - 11].loss;
}

}  // namespace

FitResult rgrad_sparse_adaptive(const LossModel& model, const TuckerTensor& init,
                                const SolverConfig& cfg, const Truth* truth, int max_retries) {
    SolverConfig attempt = cfg;
    if (attempt.mu1 <= 0.0) attempt.mu1 = default_mu1(model_shape(model));
    FitResult fit = rgrad_sparse(model, init, attempt, truth);
    for (int retry = 0; retry < max_retries && non_converged(fit); ++retry) {
        attempt.mu1 *= 2.0;
        attempt.gamma *= 1.5;
        fit = rgrad_sparse(model, init, attempt, truth);
    }
    return fit;
}

double bic_score(const LossModel& model, const FitResult& fit, const SolverConfig& cfg) {
    const Shape& shape = model_shape(model);
    double param_count = static_cast<double>(fit.s_hat.nnz());
    for (Index j = 0; j < shape.order(); ++j) {
        param_count += static_cast<double>(cfg.rank[static_cast<std::size_t>(j)]) *
                       static_cast<double>(shape.dim(j));
    }
    const double penalty = param_count * std::log(static_cast<double>(shape.size()));

    const DenseTensor x = add_sparse(tucker_to_dense(fit.t_hat), fit.s_hat);
    double minus_two_loglik = 0.0;
    switch (model_kind(model)) {
        case ModelKind::gaussian: {
            const auto& g = std::get<GaussianLoss>(model);
            const double resid = (x - g.a).frobenius_norm();
            if (resid == 0.0) {
                return -kInf;  // perfect interpolation sentinel
            }
            minus_two_loglik =
                static_cast<double>(shape.size()) * std::log(resid * resid);
            break;
        }
        case ModelKind::bernoulli:
            minus_two_loglik = 2.0 * loss_value(model, x);
            break;
        case ModelKind::poisson:
            minus_two_loglik =
                2.0 * std::get<PoissonLoss>(model).intensity * loss_value(model, x);
            break;
    }
    return penalty + minus_two_loglik;
}

namespace {

TuckerTensor default_init(const LossModel& model, const std::vector<Index>& rank,
                          const InitConfig& init_cfg, double mu1) {
    switch (model_kind(model)) {
        case ModelKind::gaussian:
            return init_rpca(std::get<GaussianLoss>(model).a, rank, mu1, init_cfg.t_max);
        case ModelKind::bernoulli: {
            const auto& b = std::get<BernoulliLoss>(model);
            return init_binary(b.a, b.link, rank, init_cfg.zeta, init_cfg.fw_iters, mu1);
        }
        case ModelKind::poisson: {
            const auto& p = std::get<PoissonLoss>(model);
            return init_poisson(p.y, p.intensity, rank, mu1);
        }
    }
    throw std::logic_error("default_init: unreachable");
}

}  // namespace

BicScan bic_scan(const LossModel& model, const std::vector<std::vector<Index>>& rank_grid,
                 const std::vector<double>& alpha_grid, const SolverConfig& base_cfg,
                 const InitConfig& init_cfg, int threads) {
    if (rank_grid.empty() || alpha_grid.empty()) {
        throw std::invalid_argument("bic_scan: grids must be non-empty");
    }
    BicScan scan;
    for (const auto& rank : rank_grid) {
        for (double alpha : alpha_grid) {
            BicCell cell;
            cell.rank = rank;
            cell.alpha = alpha;
            scan.cells.push_back(std::move(cell));
        }
    }

    auto run_cell = [&](BicCell& cell) {
        try {
            SolverConfig cfg = base_cfg;
            cfg.rank = cell.rank;
            cfg.alpha = cell.alpha;
            cfg.gamma = 1.0;  // BIC searches alpha' directly
            const double mu1 = cfg.mu1 > 0.0 ? cfg.mu1 : default_mu1(model_shape(model));
            const TuckerTensor start = default_init(model, cell.rank, init_cfg, mu1);
            const FitResult fit = rgrad_sparse(model, start, cfg);
            cell.bic = bic_score(model, fit, cfg);
            cell.converged = fit.terminated_by == Termination::tolerance ||
                             fit.terminated_by == Termination::max_iter;
            if (!cell.converged) cell.error = fit.diagnostic;
        } catch (const std::exception& e) {
            cell.converged = false;
            cell.error = e.what();
            cell.bic = kInf;
        }
    };

    const int workers = std::max(1, threads);
    if (workers == 1) {
        for (auto& cell : scan.cells) run_cell(cell);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= scan.cells.size()) return;
                    run_cell(scan.cells[i]);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    for (std::size_t i = 0; i < scan.cells.size(); ++i) {
        if (!scan.cells[i].converged && scan.cells[i].error.size() > 0) continue;
        if (scan.argmin < 0 || scan.cells[i].bic < scan.cells[static_cast<std::size_t>(scan.argmin)].bic) {
            scan.argmin = static_cast<Index>(i);
        }
    }
    return scan;
}

}  // namespace lrst
