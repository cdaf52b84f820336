#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "lrst/io.hpp"
#include "lrst/solver.hpp"
#include "lrst/synth.hpp"

namespace lrst {

// Exit code contract shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitMaxIter = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitUsage = 64;

enum class SolverChoice { rgrad_sparse, rgrad_lowrank, pgd };
enum class InitChoice { automatic, rpca, binary, poisson, hosvd };

/// Flat key/value experiment file: `key = value` lines, `#` comments,
/// comma-separated lists. Unknown keys are rejected.
struct ExperimentSpec {
    ModelKind model = ModelKind::gaussian;
    std::vector<Index> dims;
    std::vector<Index> rank;
    double alpha = 0.0;
    double gamma = 1.1;
    double mu1 = 0.0;
    double beta = 0.0;
    double k_pr = 0.0;
    double zeta = 1.0;
    double c1 = 1.0;
    Index l_max = 100;
    double rel_tol = 1e-3;
    bool adaptive = false;  // mu1/gamma escalation ladder
    // instance generation
    double amp = 1.0;
    ValueLaw value_law = ValueLaw::gaussian;
    double sparse_linf = 0.0;
    double spikiness_cap = 0.0;
    SpectrumTarget spectrum;
    NoiseLaw noise;
    LinkFunction link;
    double intensity = 10.0;
    std::vector<std::uint64_t> seeds{0};
    // solver / init selection
    SolverChoice solver = SolverChoice::rgrad_sparse;
    InitChoice init = InitChoice::automatic;
    Index hooi_sweeps = 10;
    Index fw_iters = 150;
    // alpha passed to the solver: "spec" uses `alpha`, "realized" the
    // instance's recorded slice sparsity (synthetic ground truth available)
    bool solver_alpha_realized = true;
    // BIC grids
    std::vector<Index> rank_grid;     // cubic ranks r in {..}
    std::vector<double> alpha_grid;
    std::string out_dir;

    std::string canonical_text;  // the parsed file, for digesting

    static ExperimentSpec parse_file(const std::filesystem::path& path);
    static ExperimentSpec parse_text(const std::string& text);

    InstanceSpec instance_spec(std::uint64_t seed) const;
    SolverConfig solver_config() const;
    InitConfig init_config() const;
    std::string digest() const { return content_digest(canonical_text); }
};

TuckerTensor build_init(const ExperimentSpec& spec, const LossModel& model,
                        const std::vector<Index>& rank);

/// synth: writes one instance directory per seed under out/seed_<k>/.
int cmd_synth(const ExperimentSpec& spec, const std::filesystem::path& out, bool force);

/// fit: runs the selected solver on an instance directory (or a bare
/// observation file) and writes t_hat.lrst, s_hat.csv, trace.csv,
/// summary.json. Exit code 0 tolerance, 2 max-iter, 3 numerical failure.
int cmd_fit(const ExperimentSpec& spec, const std::filesystem::path& instance_dir,
            const std::filesystem::path& out, bool force);

/// bic: grid scan, writes scores.csv (r1,..,rm,alpha,bic,converged) and
/// chosen.json.
int cmd_bic(const ExperimentSpec& spec, const std::filesystem::path& instance_dir,
            const std::filesystem::path& out, bool force, int threads);

/// compare: runs rgrad_lowrank and pgd on identical instances per seed and
/// writes compare_seed<k>.csv with columns solver,iter,rel_err,step_ms.
int cmd_compare(const ExperimentSpec& spec, const std::filesystem::path& out, bool force);

}  // namespace lrst
