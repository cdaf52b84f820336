#include "lrst/io.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lrst {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'L', 'R', 'S', 'T'};

void put_u64_le(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64_le(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

std::string model_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::gaussian: return "gaussian";
        case ModelKind::bernoulli: return "bernoulli";
        case ModelKind::poisson: return "poisson";
    }
    return "unknown";
}

ModelKind model_from_name(const std::string& name) {
    if (name == "gaussian") return ModelKind::gaussian;
    if (name == "bernoulli") return ModelKind::bernoulli;
    if (name == "poisson") return ModelKind::poisson;
    throw std::invalid_argument("unknown model kind: " + name);
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    // shortest representation that round-trips
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

void atomic_write(const fs::path& path, const std::string& contents) {
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string content_digest(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

void write_lrst(const fs::path& path, const DenseTensor& t) {
    std::ostringstream out(std::ios::binary);
    out.write(kMagic, 4);
    const unsigned char version = 1;
    const unsigned char order = static_cast<unsigned char>(t.order());
    out.write(reinterpret_cast<const char*>(&version), 1);
    out.write(reinterpret_cast<const char*>(&order), 1);
    for (Index j = 0; j < t.order(); ++j) {
        put_u64_le(out, static_cast<std::uint64_t>(t.shape().dim(j)));
    }
    for (double v : t.data()) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        put_u64_le(out, bits);
    }
    atomic_write(path, out.str());
}

DenseTensor read_lrst(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("not an LRST file: " + path.string());
    }
    unsigned char version = 0, order = 0;
    in.read(reinterpret_cast<char*>(&version), 1);
    in.read(reinterpret_cast<char*>(&order), 1);
    if (version != 1) throw std::runtime_error("unsupported LRST version");
    std::vector<Index> dims(order);
    for (auto& d : dims) d = static_cast<Index>(get_u64_le(in));
    const Shape shape(dims);
    std::vector<double> data(static_cast<std::size_t>(shape.size()));
    for (double& v : data) {
        const std::uint64_t bits = get_u64_le(in);
        std::memcpy(&v, &bits, 8);
    }
    if (!in) throw std::runtime_error("truncated LRST file: " + path.string());
    return DenseTensor(shape, std::move(data));
}

void write_sparse_csv(const fs::path& path, const SparseTensor& s) {
    std::ostringstream out;
    for (const auto& e : s.entries()) {
        const auto multi = s.shape().multi_index(e.flat);
        for (Index i : multi) out << (i + 1) << ',';
        out << format_double(e.value) << '\n';
    }
    atomic_write(path, out.str());
}

SparseTensor read_sparse_csv(const fs::path& path, const Shape& shape) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<SparseTensor::Entry> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::vector<Index> multi;
        std::string field;
        for (Index j = 0; j < shape.order(); ++j) {
            if (!std::getline(row, field, ',')) {
                throw std::runtime_error("malformed sparse CSV line: " + line);
            }
            multi.push_back(std::stoll(field) - 1);
        }
        if (!std::getline(row, field)) {
            throw std::runtime_error("malformed sparse CSV line: " + line);
        }
        entries.push_back({shape.flat_index(multi), std::stod(field)});
    }
    return SparseTensor(shape, std::move(entries));
}

void write_trace_csv(const fs::path& path, const SolverTrace& trace) {
    const bool with_truth = !trace.rows.empty() && trace.rows.front().has_truth;
    std::ostringstream out;
    out << "iter,loss,rel_change,zeta,supp_size";
    if (with_truth) out << ",rel_err_T,err_S";
    out << '\n';
    for (const auto& row : trace.rows) {
        out << row.iter << ',' << format_double(row.loss) << ',' << format_double(row.rel_change)
            << ',' << format_double(row.zeta) << ',' << row.supp_size;
        if (with_truth) {
            out << ',' << format_double(row.rel_err_t) << ',' << format_double(row.err_s);
        }
        out << '\n';
    }
    atomic_write(path, out.str());
}

void save_instance(const fs::path& dir, const Instance& inst, const std::string& spec_digest) {
    fs::create_directories(dir);
    write_lrst(dir / "observation.lrst", inst.observation);
    write_lrst(dir / "truth_T.lrst", inst.truth_t);
    write_sparse_csv(dir / "truth_S.csv", inst.truth_s);

    const InstanceSpec& spec = inst.spec;
    json meta;
    meta["format"] = 1;
    meta["model"] = model_name(spec.model);
    meta["dims"] = spec.dims;
    meta["rank"] = spec.rank;
    meta["alpha"] = spec.alpha;
    meta["amp"] = spec.amp;
    meta["value_law"] = spec.value_law == ValueLaw::gaussian ? "gaussian" : "constant";
    meta["sparse_linf"] = spec.sparse_linf;
    meta["spikiness_cap"] = spec.spikiness_cap;
    meta["seed"] = spec.seed;
    meta["spectrum"]["kind"] = spec.spectrum.kind == SpectrumTarget::Kind::none
                                   ? "none"
                                   : (spec.spectrum.kind == SpectrumTarget::Kind::linf
                                          ? "linf"
                                          : "lambda_pair");
    meta["spectrum"]["linf"] = spec.spectrum.linf;
    meta["spectrum"]["lambda_min"] = spec.spectrum.lambda_min;
    meta["spectrum"]["lambda_max"] = spec.spectrum.lambda_max;
    meta["noise"]["kind"] = spec.noise.kind == NoiseLaw::Kind::none
                                ? "none"
                                : (spec.noise.kind == NoiseLaw::Kind::gaussian ? "gaussian"
                                                                               : "student_t");
    meta["noise"]["sigma"] = spec.noise.sigma;
    meta["noise"]["df"] = spec.noise.df;
    meta["noise"]["scale"] = spec.noise.scale;
    meta["link"]["kind"] = spec.link.kind == LinkKind::logistic ? "logistic" : "probit";
    meta["link"]["sigma"] = spec.link.sigma;
    meta["intensity"] = spec.intensity;
    meta["realized_alpha"] = inst.realized_alpha;
    meta["effective_sigma"] = inst.effective_sigma;
    meta["truth_spikiness"] = inst.truth_spikiness;
    meta["truth_lambda_min"] = inst.truth_lambda_min;
    meta["truth_lambda_max"] = inst.truth_lambda_max;
    meta["spec_digest"] = spec_digest;
    atomic_write(dir / "meta.json", meta.dump(2) + "\n");
}

Instance load_instance(const fs::path& dir) {
    std::ifstream in(dir / "meta.json");
    if (!in) throw std::runtime_error("cannot open " + (dir / "meta.json").string());
    json meta = json::parse(in);

    Instance inst;
    InstanceSpec& spec = inst.spec;
    spec.model = model_from_name(meta.at("model").get<std::string>());
    spec.dims = meta.at("dims").get<std::vector<Index>>();
    spec.rank = meta.at("rank").get<std::vector<Index>>();
    spec.alpha = meta.at("alpha").get<double>();
    spec.amp = meta.at("amp").get<double>();
    spec.value_law = meta.at("value_law").get<std::string>() == "constant" ? ValueLaw::constant
                                                                           : ValueLaw::gaussian;
    spec.sparse_linf = meta.at("sparse_linf").get<double>();
    spec.spikiness_cap = meta.value("spikiness_cap", 0.0);
    spec.seed = meta.at("seed").get<std::uint64_t>();
    const std::string spectrum = meta.at("spectrum").at("kind").get<std::string>();
    if (spectrum == "linf") {
        spec.spectrum = SpectrumTarget::max_entry(meta.at("spectrum").at("linf").get<double>());
    } else if (spectrum == "lambda_pair") {
        spec.spectrum = SpectrumTarget::lambdas(meta.at("spectrum").at("lambda_min").get<double>(),
                                                meta.at("spectrum").at("lambda_max").get<double>());
    }
    const std::string noise = meta.at("noise").at("kind").get<std::string>();
    if (noise == "gaussian") {
        spec.noise = NoiseLaw::gaussian(meta.at("noise").at("sigma").get<double>());
    } else if (noise == "student_t") {
        spec.noise = NoiseLaw::student_t(meta.at("noise").at("df").get<double>(),
                                         meta.at("noise").at("scale").get<double>());
    }
    spec.link.kind = meta.at("link").at("kind").get<std::string>() == "probit" ? LinkKind::probit
                                                                               : LinkKind::logistic;
    spec.link.sigma = meta.at("link").at("sigma").get<double>();
    spec.intensity = meta.at("intensity").get<double>();

    inst.observation = read_lrst(dir / "observation.lrst");
    if (fs::exists(dir / "truth_T.lrst")) {
        inst.truth_t = read_lrst(dir / "truth_T.lrst");
        inst.truth_s = read_sparse_csv(dir / "truth_S.csv", inst.observation.shape());
    }
    inst.realized_alpha = meta.at("realized_alpha").get<double>();
    inst.effective_sigma = meta.at("effective_sigma").get<double>();
    inst.truth_spikiness = meta.at("truth_spikiness").get<double>();
    inst.truth_lambda_min = meta.at("truth_lambda_min").get<double>();
    inst.truth_lambda_max = meta.at("truth_lambda_max").get<double>();
    return inst;
}

}  // namespace lrst
