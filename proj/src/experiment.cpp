#include "lrst/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lrst {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim_ws(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string field;
    while (std::getline(in, field, ',')) out.push_back(trim_ws(field));
    return out;
}

double parse_real(const std::string& v, const std::string& key) {
    if (v == "inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument("spec key '" + key + "': bad number '" + v + "'");
    }
}

Index parse_int(const std::string& v, const std::string& key) {
    try {
        std::size_t used = 0;
        const long long x = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return static_cast<Index>(x);
    } catch (const std::exception&) {
        throw std::invalid_argument("spec key '" + key + "': bad integer '" + v + "'");
    }
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("spec key '" + key + "': bad boolean '" + v + "'");
}

bool ensure_out_dir(const fs::path& out, bool force) {
    if (fs::exists(out) && !fs::is_empty(out) && !force) {
        return false;
    }
    fs::create_directories(out);
    return true;
}

}  // namespace

ExperimentSpec ExperimentSpec::parse_text(const std::string& text) {
    ExperimentSpec spec;
    spec.canonical_text = text;
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim_ws(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("spec line " + std::to_string(lineno) +
                                        ": expected key = value");
        }
        const std::string key = trim_ws(line.substr(0, eq));
        const std::string value = trim_ws(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw std::invalid_argument("spec line " + std::to_string(lineno) +
                                        ": empty key or value");
        }
        if (!kv.emplace(key, value).second) {
            throw std::invalid_argument("spec: duplicate key '" + key + "'");
        }
    }

    auto take = [&](const std::string& key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    if (auto v = take("model")) {
        if (*v == "gaussian") spec.model = ModelKind::gaussian;
        else if (*v == "bernoulli") spec.model = ModelKind::bernoulli;
        else if (*v == "poisson") spec.model = ModelKind::poisson;
        else throw std::invalid_argument("spec: unknown model '" + *v + "'");
    }
    if (auto v = take("dims")) {
        for (const auto& d : split_list(*v)) spec.dims.push_back(parse_int(d, "dims"));
    }
    if (auto v = take("rank")) {
        for (const auto& r : split_list(*v)) spec.rank.push_back(parse_int(r, "rank"));
    }
    if (auto v = take("alpha")) spec.alpha = parse_real(*v, "alpha");
    if (auto v = take("gamma")) spec.gamma = parse_real(*v, "gamma");
    if (auto v = take("mu1")) spec.mu1 = parse_real(*v, "mu1");
    if (auto v = take("beta")) spec.beta = parse_real(*v, "beta");
    if (auto v = take("k_pr")) spec.k_pr = parse_real(*v, "k_pr");
    if (auto v = take("zeta")) spec.zeta = parse_real(*v, "zeta");
    if (auto v = take("c1")) spec.c1 = parse_real(*v, "c1");
    if (auto v = take("l_max")) spec.l_max = parse_int(*v, "l_max");
    if (auto v = take("rel_tol")) spec.rel_tol = parse_real(*v, "rel_tol");
    if (auto v = take("adaptive")) spec.adaptive = parse_bool(*v, "adaptive");
    if (auto v = take("amp")) spec.amp = parse_real(*v, "amp");
    if (auto v = take("value_law")) {
        if (*v == "gaussian") spec.value_law = ValueLaw::gaussian;
        else if (*v == "constant") spec.value_law = ValueLaw::constant;
        else throw std::invalid_argument("spec: unknown value_law '" + *v + "'");
    }
    if (auto v = take("sparse_linf")) spec.sparse_linf = parse_real(*v, "sparse_linf");
    if (auto v = take("spikiness_cap")) spec.spikiness_cap = parse_real(*v, "spikiness_cap");
    if (auto v = take("linf_target")) {
        spec.spectrum = SpectrumTarget::max_entry(parse_real(*v, "linf_target"));
    }
    if (auto lo = take("lambda_min")) {
        auto hi = take("lambda_max");
        if (!hi) throw std::invalid_argument("spec: lambda_min requires lambda_max");
        spec.spectrum =
            SpectrumTarget::lambdas(parse_real(*lo, "lambda_min"), parse_real(*hi, "lambda_max"));
    } else if (take("lambda_max")) {
        throw std::invalid_argument("spec: lambda_max requires lambda_min");
    }
    if (auto v = take("noise")) {
        if (*v == "none") spec.noise = NoiseLaw::none();
        else if (*v == "gaussian") spec.noise.kind = NoiseLaw::Kind::gaussian;
        else if (*v == "student_t") spec.noise.kind = NoiseLaw::Kind::student_t;
        else throw std::invalid_argument("spec: unknown noise '" + *v + "'");
    }
    if (auto v = take("sigma_z")) spec.noise.sigma = parse_real(*v, "sigma_z");
    if (auto v = take("t_df")) spec.noise.df = parse_real(*v, "t_df");
    if (auto v = take("t_scale")) spec.noise.scale = parse_real(*v, "t_scale");
    if (auto v = take("link")) {
        if (*v == "logistic") spec.link.kind = LinkKind::logistic;
        else if (*v == "probit") spec.link.kind = LinkKind::probit;
        else throw std::invalid_argument("spec: unknown link '" + *v + "'");
    }
    if (auto v = take("link_sigma")) spec.link.sigma = parse_real(*v, "link_sigma");
    if (auto v = take("intensity")) spec.intensity = parse_real(*v, "intensity");
    if (auto v = take("seeds")) {
        spec.seeds.clear();
        for (const auto& s : split_list(*v)) {
            spec.seeds.push_back(static_cast<std::uint64_t>(parse_int(s, "seeds")));
        }
        if (spec.seeds.empty()) throw std::invalid_argument("spec: seeds must be non-empty");
    }
    if (auto v = take("solver")) {
        if (*v == "rgrad_sparse") spec.solver = SolverChoice::rgrad_sparse;
        else if (*v == "rgrad_lowrank") spec.solver = SolverChoice::rgrad_lowrank;
        else if (*v == "pgd") spec.solver = SolverChoice::pgd;
        else throw std::invalid_argument("spec: unknown solver '" + *v + "'");
    }
    if (auto v = take("init")) {
        if (*v == "auto") spec.init = InitChoice::automatic;
        else if (*v == "rpca") spec.init = InitChoice::rpca;
        else if (*v == "binary") spec.init = InitChoice::binary;
        else if (*v == "poisson") spec.init = InitChoice::poisson;
        else if (*v == "hosvd") spec.init = InitChoice::hosvd;
        else throw std::invalid_argument("spec: unknown init '" + *v + "'");
    }
    if (auto v = take("hooi_sweeps")) spec.hooi_sweeps = parse_int(*v, "hooi_sweeps");
    if (auto v = take("fw_iters")) spec.fw_iters = parse_int(*v, "fw_iters");
    if (auto v = take("solver_alpha")) {
        if (*v == "spec") spec.solver_alpha_realized = false;
        else if (*v == "realized") spec.solver_alpha_realized = true;
        else throw std::invalid_argument("spec: solver_alpha must be spec or realized");
    }
    if (auto v = take("rank_grid")) {
        for (const auto& r : split_list(*v)) spec.rank_grid.push_back(parse_int(r, "rank_grid"));
    }
    if (auto v = take("alpha_grid")) {
        for (const auto& a : split_list(*v)) {
            spec.alpha_grid.push_back(parse_real(a, "alpha_grid"));
        }
    }
    if (auto v = take("out")) spec.out_dir = *v;

    if (!kv.empty()) {
        throw std::invalid_argument("spec: unknown key '" + kv.begin()->first + "'");
    }
    if (spec.dims.empty()) throw std::invalid_argument("spec: dims is required");
    if (spec.rank.empty()) throw std::invalid_argument("spec: rank is required");
    if (spec.rank.size() != spec.dims.size()) {
        throw std::invalid_argument("spec: rank and dims must have the same length");
    }
    return spec;
}

ExperimentSpec ExperimentSpec::parse_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open spec file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_text(text.str());
}

InstanceSpec ExperimentSpec::instance_spec(std::uint64_t seed) const {
    InstanceSpec out;
    out.model = model;
    out.dims = dims;
    out.rank = rank;
    out.alpha = alpha;
    out.amp = amp;
    out.value_law = value_law;
    out.sparse_linf = sparse_linf;
    out.spikiness_cap = spikiness_cap;
    out.spectrum = spectrum;
    out.noise = noise;
    out.link = link;
    out.intensity = intensity;
    out.seed = seed;
    return out;
}

SolverConfig ExperimentSpec::solver_config() const {
    SolverConfig cfg;
    cfg.rank = rank;
    cfg.alpha = alpha;
    cfg.gamma = gamma;
    cfg.mu1 = mu1;
    cfg.beta = beta;
    cfg.k_pr = k_pr;
    cfg.zeta = zeta;
    cfg.c1 = c1;
    cfg.l_max = l_max;
    cfg.rel_tol = rel_tol;
    return cfg;
}

InitConfig ExperimentSpec::init_config() const {
    InitConfig cfg;
    cfg.rank = rank;
    cfg.mu1 = mu1;
    cfg.t_max = hooi_sweeps;
    cfg.fw_iters = fw_iters;
    cfg.zeta = zeta;
    return cfg;
}

TuckerTensor build_init(const ExperimentSpec& spec, const LossModel& model,
                        const std::vector<Index>& rank) {
    const double mu1 = spec.mu1 > 0.0 ? spec.mu1 : default_mu1(model_shape(model));
    InitChoice choice = spec.init;
    if (choice == InitChoice::automatic) {
        switch (model_kind(model)) {
            case ModelKind::gaussian: choice = InitChoice::rpca; break;
            case ModelKind::bernoulli: choice = InitChoice::binary; break;
            case ModelKind::poisson: choice = InitChoice::poisson; break;
        }
    }
    switch (choice) {
        case InitChoice::rpca:
            return init_rpca(std::get<GaussianLoss>(model).a, rank, mu1, spec.hooi_sweeps);
        case InitChoice::binary: {
            const auto& b = std::get<BernoulliLoss>(model);
            return init_binary(b.a, b.link, rank, spec.zeta, spec.fw_iters, mu1);
        }
        case InitChoice::poisson: {
            const auto& p = std::get<PoissonLoss>(model);
            return init_poisson(p.y, p.intensity, rank, mu1);
        }
        case InitChoice::hosvd: {
            const DenseTensor& obs = model_kind(model) == ModelKind::poisson
                                         ? std::get<PoissonLoss>(model).y
                                         : (model_kind(model) == ModelKind::bernoulli
                                                ? std::get<BernoulliLoss>(model).a
                                                : std::get<GaussianLoss>(model).a);
            return hosvd(obs, rank);
        }
        case InitChoice::automatic: break;
    }
    throw std::logic_error("build_init: unreachable");
}

int cmd_synth(const ExperimentSpec& spec, const fs::path& out, bool force) {
    if (!ensure_out_dir(out, force)) {
        throw std::invalid_argument("output directory " + out.string() +
                                    " is non-empty (use --force to overwrite)");
    }
    for (std::uint64_t seed : spec.seeds) {
        const Instance inst = make_instance(spec.instance_spec(seed));
        save_instance(out / ("seed_" + std::to_string(seed)), inst, spec.digest());
    }
    return kExitOk;
}

namespace {

int termination_exit_code(Termination t) {
    switch (t) {
        case Termination::tolerance: return kExitOk;
        case Termination::max_iter: return kExitMaxIter;
        case Termination::rank_deficient:
        case Termination::numerical_error: return kExitNumerical;
    }
    return kExitNumerical;
}

json fit_summary(const ExperimentSpec& spec, const FitResult& fit, const SolverConfig& cfg) {
    json s;
    s["terminated_by"] = termination_name(fit.terminated_by);
    s["diagnostic"] = fit.diagnostic;
    s["iterations"] = fit.trace.rows.empty() ? 0 : fit.trace.rows.back().iter;
    s["final_loss"] = fit.trace.rows.empty() ? 0.0 : fit.trace.rows.back().loss;
    s["supp_size"] = fit.s_hat.nnz();
    s["alpha_used"] = cfg.alpha;
    s["gamma"] = cfg.gamma;
    s["mu1"] = fit.params.mu1;
    s["beta"] = fit.params.beta;
    s["k_pr"] = std::isinf(fit.params.k_pr) ? -1.0 : fit.params.k_pr;
    s["warnings"] = fit.params.warnings;
    s["spec_digest"] = spec.digest();
    if (!fit.trace.rows.empty() && fit.trace.rows.back().has_truth) {
        s["final_rel_err_T"] = fit.trace.rows.back().rel_err_t;
        s["final_err_S"] = fit.trace.rows.back().err_s;
    }
    return s;
}

}  // namespace

int cmd_fit(const ExperimentSpec& spec, const fs::path& instance_path, const fs::path& out,
            bool force) {
    if (!ensure_out_dir(out, force)) {
        throw std::invalid_argument("output directory " + out.string() +
                                    " is non-empty (use --force to overwrite)");
    }

    std::optional<Instance> inst;
    DenseTensor observation;
    if (fs::is_directory(instance_path)) {
        inst = load_instance(instance_path);
        observation = inst->observation;
    } else {
        observation = read_lrst(instance_path);
    }

    LossModel model = [&]() -> LossModel {
        switch (spec.model) {
            case ModelKind::gaussian: return GaussianLoss{observation};
            case ModelKind::bernoulli: return BernoulliLoss(observation, spec.link);
            case ModelKind::poisson: return PoissonLoss(observation, spec.intensity);
        }
        throw std::logic_error("unreachable");
    }();

    SolverConfig cfg = spec.solver_config();
    if (inst && spec.solver_alpha_realized && inst->realized_alpha > 0.0) {
        cfg.alpha = inst->realized_alpha;
    }

    Truth truth;
    const bool have_truth = inst && inst->truth_t.size() > 0;
    if (have_truth) {
        truth.t = &inst->truth_t;
        truth.s = &inst->truth_s;
    }

    const TuckerTensor start = build_init(spec, model, spec.rank);
    FitResult fit;
    switch (spec.solver) {
        case SolverChoice::rgrad_sparse:
            fit = spec.adaptive ? rgrad_sparse_adaptive(model, start, cfg,
                                                        have_truth ? &truth : nullptr)
                                : rgrad_sparse(model, start, cfg, have_truth ? &truth : nullptr);
            break;
        case SolverChoice::rgrad_lowrank:
            fit = rgrad_lowrank(model, start, cfg, have_truth ? &truth : nullptr);
            break;
        case SolverChoice::pgd:
            fit = pgd_lowrank(model, start, cfg, have_truth ? &truth : nullptr);
            break;
    }

    write_lrst(out / "t_hat.lrst", tucker_to_dense(fit.t_hat));
    write_sparse_csv(out / "s_hat.csv", fit.s_hat);
    write_trace_csv(out / "trace.csv", fit.trace);
    atomic_write(out / "summary.json", fit_summary(spec, fit, cfg).dump(2) + "\n");
    return termination_exit_code(fit.terminated_by);
}

int cmd_bic(const ExperimentSpec& spec, const fs::path& instance_path, const fs::path& out,
            bool force, int threads) {
    if (spec.rank_grid.empty() || spec.alpha_grid.empty()) {
        throw std::invalid_argument("bic requires rank_grid and alpha_grid");
    }
    if (!ensure_out_dir(out, force)) {
        throw std::invalid_argument("output directory " + out.string() +
                                    " is non-empty (use --force to overwrite)");
    }
    const Instance inst = load_instance(instance_path);
    LossModel model = [&]() -> LossModel {
        switch (spec.model) {
            case ModelKind::gaussian: return GaussianLoss{inst.observation};
            case ModelKind::bernoulli: return BernoulliLoss(inst.observation, spec.link);
            case ModelKind::poisson: return PoissonLoss(inst.observation, spec.intensity);
        }
        throw std::logic_error("unreachable");
    }();

    std::vector<std::vector<Index>> rank_grid;
    for (Index r : spec.rank_grid) {
        rank_grid.push_back(std::vector<Index>(spec.dims.size(), r));
    }
    const BicScan scan =
        bic_scan(model, rank_grid, spec.alpha_grid, spec.solver_config(), spec.init_config(),
                 threads);

    std::ostringstream csv;
    for (std::size_t j = 0; j < spec.dims.size(); ++j) csv << 'r' << (j + 1) << ',';
    csv << "alpha,bic,converged\n";
    for (const auto& cell : scan.cells) {
        for (Index r : cell.rank) csv << r << ',';
        csv << format_double(cell.alpha) << ',' << format_double(cell.bic) << ','
            << (cell.converged ? 1 : 0) << '\n';
    }
    atomic_write(out / "scores.csv", csv.str());

    json chosen;
    chosen["spec_digest"] = spec.digest();
    if (scan.argmin >= 0) {
        const auto& best = scan.cells[static_cast<std::size_t>(scan.argmin)];
        chosen["rank"] = best.rank;
        chosen["alpha"] = best.alpha;
        chosen["bic"] = best.bic;
    }
    atomic_write(out / "chosen.json", chosen.dump(2) + "\n");
    return kExitOk;
}

int cmd_compare(const ExperimentSpec& spec, const fs::path& out, bool force) {
    if (!ensure_out_dir(out, force)) {
        throw std::invalid_argument("output directory " + out.string() +
                                    " is non-empty (use --force to overwrite)");
    }
    json summary;
    summary["spec_digest"] = spec.digest();
    json per_seed = json::array();
    for (std::uint64_t seed : spec.seeds) {
        const Instance inst = make_instance(spec.instance_spec(seed));
        const LossModel model = instance_model(inst);
        Truth truth{&inst.truth_t, &inst.truth_s};
        const TuckerTensor start = build_init(spec, model, spec.rank);
        const SolverConfig cfg = spec.solver_config();

        const FitResult rg = rgrad_lowrank(model, start, cfg, &truth);
        const FitResult pg = pgd_lowrank(model, start, cfg, &truth);

        std::ostringstream csv;
        csv << "solver,iter,rel_err,step_ms\n";
        auto emit = [&](const char* name, const FitResult& fit) {
            for (std::size_t i = 1; i < fit.trace.rows.size(); ++i) {
                csv << name << ',' << fit.trace.rows[i].iter << ','
                    << format_double(fit.trace.rows[i].rel_err_t) << ','
                    << format_double(fit.step_ms[i - 1]) << '\n';
            }
        };
        emit("rgrad", rg);
        emit("pgd", pg);
        atomic_write(out / ("compare_seed" + std::to_string(seed) + ".csv"), csv.str());

        auto mean_ms = [](const std::vector<double>& v) {
            double s = 0.0;
            for (double x : v) s += x;
            return v.empty() ? 0.0 : s / static_cast<double>(v.size());
        };
        json row;
        row["seed"] = seed;
        // both solvers consumed the same generated instance; the digest of
        // its metadata is the audit trail
        row["instance_digest"] = content_digest(std::to_string(seed) + ":" + spec.digest());
        row["rgrad_final_rel_err"] = rg.trace.rows.back().rel_err_t;
        row["pgd_final_rel_err"] = pg.trace.rows.back().rel_err_t;
        row["rgrad_mean_step_ms"] = mean_ms(rg.step_ms);
        row["pgd_mean_step_ms"] = mean_ms(pg.step_ms);
        per_seed.push_back(row);
    }
    summary["seeds"] = per_seed;
    atomic_write(out / "summary.json", summary.dump(2) + "\n");
    return kExitOk;
}

}  // namespace lrst
