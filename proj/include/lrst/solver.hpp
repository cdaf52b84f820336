#pragma once

#include <optional>
#include <string>

#include "lrst/init.hpp"
#include "lrst/losses.hpp"
#include "lrst/manifold.hpp"
#include "lrst/pruning.hpp"

namespace lrst {

struct SolverConfig {
    std::vector<Index> rank;
    double alpha = 0.02;   // target sparsity in [0, 1]
    double gamma = 1.1;    // level multiplier, >= 1
    double mu1 = 0.0;      // 0: default 2^m + log(d_bar)
    double beta = 0.0;     // 0: model default step size
    double k_pr = 0.0;     // 0: model default (Gaussian inf, Bernoulli 1, Poisson c1 * zeta)
    double zeta = 1.0;     // l_inf scale at which GLM convexity constants are evaluated
    double c1 = 1.0;       // Poisson k_pr multiplier
    Index l_max = 100;
    double rel_tol = 1e-3;
    bool theory_mode = false;   // reject step sizes outside the admissible window
    bool deterministic = true;  // fits are pure functions of (model, init, config)
};

/// Concrete parameter values after defaults are filled in; `warnings`
/// records accepted-but-flagged settings (e.g. beta outside the theory
/// window when theory_mode is off).
struct ResolvedParams {
    double mu1;
    double beta;
    double k_pr;
    double alpha_eff;  // gamma * alpha
    std::vector<std::string> warnings;
};

ResolvedParams resolve_params(const SolverConfig& cfg, const LossModel& model);

struct TraceRow {
    Index iter;
    double loss;
    double rel_change;  // NaN on the initial row
    double zeta;        // NaN when no trim was applied
    Index supp_size;
    bool has_truth = false;
    double rel_err_t = 0.0;
    double err_s = 0.0;
};

struct SolverTrace {
    std::vector<TraceRow> rows;
};

enum class Termination { tolerance, max_iter, rank_deficient, numerical_error };

const char* termination_name(Termination t);

struct Truth {
    const DenseTensor* t = nullptr;
    const SparseTensor* s = nullptr;
};

struct FitResult {
    TuckerTensor t_hat;
    SparseTensor s_hat;
    SolverTrace trace;
    Termination terminated_by = Termination::max_iter;
    std::string diagnostic;
    std::vector<double> step_ms;  // wall time per iteration
    ResolvedParams params{};
};

/// Riemannian gradient descent with gradient pruning (low-rank + sparse).
FitResult rgrad_sparse(const LossModel& model, const TuckerTensor& init, const SolverConfig& cfg,
                       const Truth* truth = nullptr);

/// Exact low-rank variant: no pruning, no trimming, structured fast
/// retraction through the rank-2r tangent representation.
FitResult rgrad_lowrank(const LossModel& model, const TuckerTensor& init, const SolverConfig& cfg,
                        const Truth* truth = nullptr);

/// Projected gradient descent baseline: full vanilla gradient plus dense
/// HOSVD retraction.
FitResult pgd_lowrank(const LossModel& model, const TuckerTensor& init, const SolverConfig& cfg,
                      const Truth* truth = nullptr);

/// Retry ladder for the default parameters: mu1 doubles and gamma grows by
/// 1.5 on detected non-convergence, up to four retries.
FitResult rgrad_sparse_adaptive(const LossModel& model, const TuckerTensor& init,
                                const SolverConfig& cfg, const Truth* truth = nullptr,
                                int max_retries = 4);

/// (|S|_0 + sum r_i d_i) ln(d*) - 2 ln(L). Returns -infinity with a
/// diagnostic-style sentinel when the Gaussian residual vanishes.
double bic_score(const LossModel& model, const FitResult& fit, const SolverConfig& cfg);

struct BicCell {
    std::vector<Index> rank;
    double alpha = 0.0;
    double bic = 0.0;
    bool converged = false;
    std::string error;
};

struct BicScan {
    std::vector<BicCell> cells;
    Index argmin = -1;  // -1 when no cell scored
};

/// Full pipeline (model-matched init + rgrad_sparse with gamma = 1) on the
/// rank x alpha grid. Cells run independently across `threads` workers and
/// merge in grid order; per-cell failures are recorded, not fatal.
BicScan bic_scan(const LossModel& model, const std::vector<std::vector<Index>>& rank_grid,
                 const std::vector<double>& alpha_grid, const SolverConfig& base_cfg,
                 const InitConfig& init_cfg, int threads = 1);

}  // namespace lrst
