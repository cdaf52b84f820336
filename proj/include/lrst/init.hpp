#pragma once

#include "lrst/losses.hpp"
#include "lrst/manifold.hpp"
#include "lrst/tucker.hpp"

namespace lrst {

struct InitConfig {
    std::vector<Index> rank;
    double mu1 = 0.0;     // 0: use 2^m + log(d_bar)
    Index t_max = 10;     // HOOI sweeps
    Index fw_iters = 150; // Frank-Wolfe iterations for the binary program
    double zeta = 1.0;    // l_inf bound for the binary/Poisson programs
};

double default_mu1(const Shape& shape);

/// Higher-order orthogonal iteration: HOSVD start, then alternating per-mode
/// updates where earlier modes use the current sweep.
TuckerTensor hooi(const DenseTensor& y, std::span<const Index> ranks, Index t_max);

struct RpcaInitAudit {
    double p = 0.0;
    double tau0 = 0.0;
    double tau = 0.0;
    Index zeroed = 0;      // entries removed when forming A_0
    bool degenerate = false;  // floor(p d*) == 0, no zeroing applied
};

/// Order-statistic screening, truncation, HOOI, final trim.
TuckerTensor init_rpca(const DenseTensor& a, std::span<const Index> ranks, double mu1,
                       Index t_max, RpcaInitAudit* audit = nullptr);

struct BinaryInitAudit {
    double nuclear_radius = 0.0;
    std::vector<double> objective;  // accepted-iterate objective per FW step
    Index rejected_steps = 0;
    double max_nuclear_ratio = 0.0;  // max |X|_* / radius over accepted iterates
    double max_entry = 0.0;          // max |X|_inf over accepted iterates
};

/// Matrix reshape of the observations, Frank-Wolfe over the nuclear-norm
/// ball with entrywise clipping to [-zeta, zeta], reshape back, final trim.
TuckerTensor init_binary(const DenseTensor& a, const LinkFunction& link,
                         std::span<const Index> ranks, double zeta, Index fw_iters, double mu1,
                         BinaryInitAudit* audit = nullptr);

/// log((y + 1/2) / I), HOSVD, final trim.
TuckerTensor init_poisson(const DenseTensor& y, double intensity, std::span<const Index> ranks,
                          double mu1);

}  // namespace lrst
