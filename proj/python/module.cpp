#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lrst/experiment.hpp"
#include "lrst/init.hpp"
#include "lrst/io.hpp"
#include "lrst/pruning.hpp"
#include "lrst/solver.hpp"
#include "lrst/synth.hpp"

namespace py = pybind11;
using namespace lrst;

namespace {

DenseTensor tensor_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() < 2) {
        throw std::invalid_argument("tensor arrays must have at least 2 dimensions");
    }
    std::vector<Index> dims(arr.ndim());
    for (py::ssize_t i = 0; i < arr.ndim(); ++i) dims[static_cast<std::size_t>(i)] = arr.shape(i);
    std::vector<double> data(arr.data(), arr.data() + arr.size());
    return DenseTensor(Shape(dims), std::move(data));
}

py::array_t<double> array_from_tensor(const DenseTensor& t) {
    std::vector<py::ssize_t> dims;
    for (Index d : t.shape().dims()) dims.push_back(d);
    py::array_t<double> arr(dims);
    std::copy(t.data().begin(), t.data().end(), arr.mutable_data());
    return arr;
}

py::dict sparse_to_dict(const SparseTensor& s) {
    const Index n = s.nnz();
    const Index m = s.shape().order();
    py::array_t<std::int64_t> indices({n, m});
    py::array_t<double> values(n);
    auto idx = indices.mutable_unchecked<2>();
    auto val = values.mutable_unchecked<1>();
    for (Index i = 0; i < n; ++i) {
        const auto multi = s.shape().multi_index(s.entries()[static_cast<std::size_t>(i)].flat);
        for (Index j = 0; j < m; ++j) idx(i, j) = multi[static_cast<std::size_t>(j)];
        val(i) = s.entries()[static_cast<std::size_t>(i)].value;
    }
    py::dict out;
    out["shape"] = s.shape().dims();
    out["indices"] = indices;
    out["values"] = values;
    return out;
}

py::dict tucker_to_dict(const TuckerTensor& tk) {
    py::dict out;
    out["core"] = array_from_tensor(tk.core());
    py::list factors;
    for (const Matrix& u : tk.factors()) {
        py::array_t<double> arr({u.rows(), u.cols()});
        auto view = arr.mutable_unchecked<2>();
        for (Index i = 0; i < u.rows(); ++i)
            for (Index j = 0; j < u.cols(); ++j) view(i, j) = u(i, j);
        factors.append(arr);
    }
    out["factors"] = factors;
    return out;
}

LossModel build_model(const std::string& kind, const DenseTensor& obs, const std::string& link,
                      double link_sigma, double intensity) {
    if (kind == "gaussian") return GaussianLoss{obs};
    if (kind == "bernoulli") {
        return BernoulliLoss(obs, LinkFunction{link == "probit" ? LinkKind::probit
                                                                : LinkKind::logistic,
                                               link_sigma});
    }
    if (kind == "poisson") return PoissonLoss(obs, intensity);
    throw std::invalid_argument("unknown model kind: " + kind);
}

py::dict fit_to_dict(const FitResult& fit) {
    py::dict out;
    out["t_hat"] = array_from_tensor(tucker_to_dense(fit.t_hat));
    out["tucker"] = tucker_to_dict(fit.t_hat);
    out["s_hat"] = sparse_to_dict(fit.s_hat);
    out["terminated_by"] = termination_name(fit.terminated_by);
    out["diagnostic"] = fit.diagnostic;
    py::list trace;
    for (const auto& row : fit.trace.rows) {
        py::dict r;
        r["iter"] = row.iter;
        r["loss"] = row.loss;
        r["rel_change"] = row.rel_change;
        r["zeta"] = row.zeta;
        r["supp_size"] = row.supp_size;
        if (row.has_truth) {
            r["rel_err_T"] = row.rel_err_t;
            r["err_S"] = row.err_s;
        }
        trace.append(r);
    }
    out["trace"] = trace;
    out["step_ms"] = fit.step_ms;
    return out;
}

SolverConfig config_from_kwargs(const std::vector<Index>& rank, double alpha, double gamma,
                                double mu1, double beta, double k_pr, double zeta, double c1,
                                Index l_max, double rel_tol) {
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

}  // namespace

PYBIND11_MODULE(_lrst, m) {
    m.doc() = "Low-Tucker-rank plus sparse tensor estimation via Riemannian gradient descent "
              "with gradient pruning";

    m.def("hosvd", [](py::array_t<double, py::array::c_style | py::array::forcecast> a,
                      const std::vector<Index>& ranks) {
        return tucker_to_dict(hosvd(tensor_from_array(a), ranks));
    }, py::arg("tensor"), py::arg("ranks"));

    m.def("hooi", [](py::array_t<double, py::array::c_style | py::array::forcecast> a,
                     const std::vector<Index>& ranks, Index sweeps) {
        return tucker_to_dict(hooi(tensor_from_array(a), ranks, sweeps));
    }, py::arg("tensor"), py::arg("ranks"), py::arg("sweeps") = 10);

    m.def("spikiness",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> a) {
              return spikiness(tensor_from_array(a));
          });

    m.def("spectral_summary",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> a,
             const std::vector<Index>& ranks) {
              const auto s = spectral_summary(tensor_from_array(a), ranks);
              py::dict out;
              out["lambda_min"] = s.lambda_min;
              out["lambda_max"] = s.lambda_max;
              out["kappa0"] = s.kappa0;
              return out;
          });

    m.def("trim", [](py::array_t<double, py::array::c_style | py::array::forcecast> a, double zeta,
                     const std::vector<Index>& ranks) {
        return tucker_to_dict(trim(tensor_from_array(a), zeta, ranks));
    }, py::arg("tensor"), py::arg("zeta"), py::arg("ranks"));

    m.def("level_alpha_active_indices",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> g, double alpha) {
              const auto active = level_alpha_active_indices(tensor_from_array(g), alpha);
              return active.flat_indices;
          }, py::arg("gradient"), py::arg("alpha"));

    m.def("gen_lowrank",
          [](const std::vector<Index>& dims, const std::vector<Index>& ranks, std::uint64_t seed,
             double linf, double lambda_min, double lambda_max, double spikiness_cap) {
              SpectrumTarget target;
              if (linf > 0) target = SpectrumTarget::max_entry(linf);
              if (lambda_min > 0) target = SpectrumTarget::lambdas(lambda_min, lambda_max);
              return array_from_tensor(gen_lowrank(dims, ranks, seed, target, spikiness_cap));
          },
          py::arg("dims"), py::arg("ranks"), py::arg("seed"), py::arg("linf") = 0.0,
          py::arg("lambda_min") = 0.0, py::arg("lambda_max") = 0.0,
          py::arg("spikiness_cap") = 0.0);

    m.def("gen_sparse",
          [](const std::vector<Index>& dims, double alpha, double amp, std::uint64_t seed,
             const std::string& law) {
              double realized = 0.0;
              const SparseTensor s =
                  gen_sparse(dims, alpha, amp, seed,
                             law == "constant" ? ValueLaw::constant : ValueLaw::gaussian,
                             &realized);
              py::dict out = sparse_to_dict(s);
              out["realized_alpha"] = realized;
              return out;
          },
          py::arg("dims"), py::arg("alpha"), py::arg("amp"), py::arg("seed"),
          py::arg("law") = "gaussian");

    m.def("add_gaussian_noise",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> a, double sigma,
             std::uint64_t seed) {
              return array_from_tensor(add_noise(tensor_from_array(a), NoiseLaw::gaussian(sigma),
                                                 seed));
          },
          py::arg("tensor"), py::arg("sigma"), py::arg("seed") = 0);

    m.def("sample_bernoulli",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> logits,
             const std::string& link, double sigma, std::uint64_t seed) {
              return array_from_tensor(sample_bernoulli(
                  tensor_from_array(logits),
                  LinkFunction{link == "probit" ? LinkKind::probit : LinkKind::logistic, sigma},
                  seed));
          },
          py::arg("logits"), py::arg("link") = "logistic", py::arg("sigma") = 1.0,
          py::arg("seed") = 0);

    m.def("sample_poisson",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> t, double intensity,
             std::uint64_t seed) {
              return array_from_tensor(sample_poisson(tensor_from_array(t), intensity, seed));
          },
          py::arg("log_means"), py::arg("intensity"), py::arg("seed") = 0);

    m.def("fit",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> observation,
             const std::vector<Index>& rank, const std::string& model, const std::string& solver,
             double alpha, double gamma, double mu1, double beta, double k_pr, double zeta,
             double c1, Index l_max, double rel_tol, const std::string& link, double link_sigma,
             double intensity, const std::string& init, Index hooi_sweeps, Index fw_iters) {
              const DenseTensor obs = tensor_from_array(observation);
              const LossModel loss = build_model(model, obs, link, link_sigma, intensity);
              const SolverConfig cfg = config_from_kwargs(rank, alpha, gamma, mu1, beta, k_pr,
                                                          zeta, c1, l_max, rel_tol);
              ExperimentSpec spec;
              spec.model = model_kind(loss);
              spec.rank = rank;
              spec.mu1 = mu1;
              spec.zeta = zeta;
              spec.hooi_sweeps = hooi_sweeps;
              spec.fw_iters = fw_iters;
              if (init == "rpca") spec.init = InitChoice::rpca;
              else if (init == "binary") spec.init = InitChoice::binary;
              else if (init == "poisson") spec.init = InitChoice::poisson;
              else if (init == "hosvd") spec.init = InitChoice::hosvd;
              const TuckerTensor start = build_init(spec, loss, rank);
              FitResult result;
              if (solver == "rgrad_sparse") result = rgrad_sparse(loss, start, cfg);
              else if (solver == "rgrad_lowrank") result = rgrad_lowrank(loss, start, cfg);
              else if (solver == "pgd") result = pgd_lowrank(loss, start, cfg);
              else throw std::invalid_argument("unknown solver: " + solver);
              return fit_to_dict(result);
          },
          py::arg("observation"), py::arg("rank"), py::arg("model") = "gaussian",
          py::arg("solver") = "rgrad_sparse", py::arg("alpha") = 0.02, py::arg("gamma") = 1.1,
          py::arg("mu1") = 0.0, py::arg("beta") = 0.0, py::arg("k_pr") = 0.0,
          py::arg("zeta") = 1.0, py::arg("c1") = 1.0, py::arg("l_max") = 100,
          py::arg("rel_tol") = 1e-3, py::arg("link") = "logistic", py::arg("link_sigma") = 1.0,
          py::arg("intensity") = 10.0, py::arg("init") = "auto", py::arg("hooi_sweeps") = 10,
          py::arg("fw_iters") = 150);

    m.def("bic_scan",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> observation,
             const std::vector<Index>& rank_grid, const std::vector<double>& alpha_grid,
             const std::string& model, const std::string& link, double link_sigma,
             double intensity, Index l_max, double rel_tol, double zeta, int threads) {
              const DenseTensor obs = tensor_from_array(observation);
              const LossModel loss = build_model(model, obs, link, link_sigma, intensity);
              SolverConfig cfg;
              cfg.rank.assign(obs.shape().dims().size(), 1);
              cfg.l_max = l_max;
              cfg.rel_tol = rel_tol;
              cfg.zeta = zeta;
              InitConfig icfg;
              icfg.zeta = zeta;
              std::vector<std::vector<Index>> ranks;
              for (Index r : rank_grid) {
                  ranks.push_back(std::vector<Index>(obs.shape().dims().size(), r));
              }
              const BicScan scan = bic_scan(loss, ranks, alpha_grid, cfg, icfg, threads);
              py::list cells;
              for (const auto& cell : scan.cells) {
                  py::dict c;
                  c["rank"] = cell.rank;
                  c["alpha"] = cell.alpha;
                  c["bic"] = cell.bic;
                  c["converged"] = cell.converged;
                  cells.append(c);
              }
              py::dict out;
              out["cells"] = cells;
              out["argmin"] = scan.argmin;
              return out;
          },
          py::arg("observation"), py::arg("rank_grid"), py::arg("alpha_grid"),
          py::arg("model") = "gaussian", py::arg("link") = "logistic",
          py::arg("link_sigma") = 1.0, py::arg("intensity") = 10.0, py::arg("l_max") = 100,
          py::arg("rel_tol") = 1e-3, py::arg("zeta") = 1.0, py::arg("threads") = 1);

    m.def("write_lrst",
          [](const std::string& path,
             py::array_t<double, py::array::c_style | py::array::forcecast> a) {
              write_lrst(path, tensor_from_array(a));
          });
    m.def("read_lrst",
          [](const std::string& path) { return array_from_tensor(read_lrst(path)); });
}
