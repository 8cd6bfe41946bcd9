#include "cpminimax/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "cpminimax/matrix_io.hpp"
#include "cpminimax/rates.hpp"

namespace cpminimax {

using nlohmann::json;

namespace {

// Stream purposes; part of the versioned seed map.
constexpr std::uint64_t kCalibrateTag = 0x63616C69;  // "cali"
constexpr std::uint64_t kNullTag = 0x6E756C6C;       // "null"
constexpr std::uint64_t kAltTag = 0x616C7420;        // "alt "

int worker_count() {
    if (const char* env = std::getenv("CPMINIMAX_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<int>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& fn) {
    if (count <= 0) return;
    const int workers = std::min<std::int64_t>(worker_count(), count);
    if (workers <= 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const std::int64_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

double calibrate(const Procedure& proc, std::int64_t p, std::int64_t n,
                 const CovarianceSpec& noise, double alpha, std::int64_t R,
                 std::uint64_t seed) {
    if (R < 100) throw std::invalid_argument("calibrate: R must be >= 100");
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("calibrate: alpha must lie in (0, 1)");
    }
    const Vector mu = Vector::Zero(p);
    std::vector<double> stats(R);
    parallel_for(R, [&](std::int64_t r) {
        auto stream = RandomStream::derive(seed, {kCalibrateTag, static_cast<std::uint64_t>(r)});
        const ObservationMatrix X = gen_null(p, n, mu, noise, stream);
        stats[r] = proc.statistic(X);
    });
    std::sort(stats.begin(), stats.end());
    const auto idx = static_cast<std::int64_t>(
        std::ceil((1.0 - alpha) * static_cast<double>(R)));
    return stats[std::clamp<std::int64_t>(idx, 1, R) - 1];
}

std::string to_string(SignalKind kind) {
    switch (kind) {
        case SignalKind::Multiple: return "multiple";
        case SignalKind::Xi: return "xi";
        case SignalKind::Rho2: return "rho2";
    }
    return "unknown";
}

namespace {

SignalKind signal_kind_from(const std::string& s) {
    if (s == "multiple") return SignalKind::Multiple;
    if (s == "xi") return SignalKind::Xi;
    if (s == "rho2") return SignalKind::Rho2;
    throw std::invalid_argument("unknown signal kind: " + s);
}

}  // namespace

void ExperimentConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 0.5)) {
        throw std::invalid_argument("config: alpha must lie in (0, 0.5)");
    }
    if (ps.empty() || ns.empty() || ss.empty()) {
        throw std::invalid_argument("config: p, n and s lists must be nonempty");
    }
    if (null_reps < 100) {
        throw std::invalid_argument("config: null replications must be >= 100");
    }
    if (!signals.empty() && alt_reps < 100) {
        throw std::invalid_argument("config: alternative replications must be >= 100");
    }
    if (!explicit_C.has_value() && calibrate_reps < 100) {
        throw std::invalid_argument("config: calibration replications must be >= 100");
    }
    const bool asym = procedure.kind() == ProcedureKind::DenseAsym ||
                      procedure.kind() == ProcedureKind::SparseAsym;
    for (const auto& sig : signals) {
        if (sig.kind == SignalKind::Multiple && asym) {
            throw std::invalid_argument(
                "config: multiple-of-rate signals require a C-family procedure; "
                "use xi or rho2 for the asymptotic tests");
        }
        if (sig.kind == SignalKind::Xi && !asym) {
            throw std::invalid_argument(
                "config: xi signals apply to the asymptotic tests only");
        }
    }
}

namespace {

CovarianceSpec noise_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "identity") return CovarianceSpec::identity();
    if (kind == "equicorr") return CovarianceSpec::equicorrelated(j.at("gamma").get<double>());
    if (kind == "temporal") return CovarianceSpec::temporal_block(j.at("B").get<double>());
    if (kind == "explicit") {
        return CovarianceSpec::explicit_matrix(load_matrix(j.at("path").get<std::string>()));
    }
    throw std::invalid_argument("unknown noise kind: " + kind);
}

json noise_to_json(const CovarianceSpec& noise) {
    json j;
    switch (noise.kind()) {
        case CovarianceKind::Identity:
            j["kind"] = "identity";
            break;
        case CovarianceKind::Equicorrelated:
            j["kind"] = "equicorr";
            j["gamma"] = noise.gamma();
            break;
        case CovarianceKind::TemporalBlock:
            j["kind"] = "temporal";
            j["B"] = noise.B();
            break;
        case CovarianceKind::Explicit:
            throw std::invalid_argument(
                "explicit covariance configs must be loaded from file paths");
    }
    return j;
}

Procedure procedure_from_json(const json& j, bool& s_from_cell, bool& gamma_from_noise) {
    const std::string name = j.at("name").get<std::string>();
    const double C = j.value("C", 1.0);
    s_from_cell = !j.contains("s");
    gamma_from_noise = !j.contains("gamma");
    const std::int64_t s = j.value("s", std::int64_t{1});
    if (name == "fixed") return Procedure::fixed(s, C);
    if (name == "adaptive") return Procedure::adaptive(C);
    if (name == "dense-asym") {
        return Procedure::dense_asym(j.value("delta1", 0.1), j.value("delta2", 0.1));
    }
    if (name == "sparse-asym") return Procedure::sparse_asym(s, j.value("delta2", 0.1));
    if (name == "spatial-known") {
        SpatialFunctionals fn;
        const auto& f = j.at("functionals");
        fn.trace = f.at("trace").get<double>();
        fn.frobenius = f.at("frobenius").get<double>();
        fn.operator_norm = f.at("operator").get<double>();
        return Procedure::spatial_known(fn, C);
    }
    if (name == "spatial-est") return Procedure::spatial_estimated(C);
    if (name == "equicorr") {
        return Procedure::equicorr(j.value("gamma", 0.0), s, C, j.value("Cprime", 2.0));
    }
    if (name == "temporal") return Procedure::temporal(j.value("B", 0.0), C);
    throw std::invalid_argument("unknown procedure: " + name);
}

json procedure_to_json(const ExperimentConfig& cfg) {
    const Procedure& proc = cfg.procedure;
    json j;
    j["name"] = proc.name();
    j["C"] = proc.C();
    if (!cfg.procedure_s_from_cell) j["s"] = proc.s();
    switch (proc.kind()) {
        case ProcedureKind::DenseAsym:
            j["delta1"] = proc.delta1();
            j["delta2"] = proc.delta2();
            break;
        case ProcedureKind::SparseAsym:
            j["delta2"] = proc.delta2();
            break;
        case ProcedureKind::SpatialKnown: {
            const auto& fn = *proc.functionals();
            j["functionals"] = {{"trace", fn.trace},
                                {"frobenius", fn.frobenius},
                                {"operator", fn.operator_norm}};
            break;
        }
        case ProcedureKind::Equicorr:
            if (!cfg.procedure_gamma_from_noise) j["gamma"] = proc.gamma();
            j["Cprime"] = proc.Cprime();
            break;
        case ProcedureKind::Temporal:
            j["B"] = proc.B();
            break;
        default:
            break;
    }
    return j;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    const json j = json::parse(text);
    ExperimentConfig cfg;
    cfg.procedure = procedure_from_json(j.at("procedure"), cfg.procedure_s_from_cell,
                                        cfg.procedure_gamma_from_noise);
    if (j.at("procedure").contains("C")) {
        cfg.explicit_C = j.at("procedure").at("C").get<double>();
    }
    const auto& grid = j.at("grid");
    cfg.ps = grid.at("p").get<std::vector<std::int64_t>>();
    cfg.ns = grid.at("n").get<std::vector<std::int64_t>>();
    cfg.ss = grid.at("s").get<std::vector<std::int64_t>>();
    if (grid.contains("t0")) cfg.t0s = grid.at("t0").get<std::vector<std::int64_t>>();
    cfg.noise = noise_from_json(j.at("noise"));
    if (j.contains("signal")) {
        const auto& sig = j.at("signal");
        const std::array<std::pair<const char*, SignalKind>, 3> ladders{
            {{"multiples", SignalKind::Multiple},
             {"xi", SignalKind::Xi},
             {"rho2", SignalKind::Rho2}}};
        for (const auto& [key, kind] : ladders) {
            if (sig.contains(key)) {
                for (double v : sig.at(key).get<std::vector<double>>()) {
                    cfg.signals.push_back(SignalPoint{kind, v});
                }
            }
        }
    }
    const auto& reps = j.at("replications");
    cfg.calibrate_reps = reps.value("calibrate", std::int64_t{2000});
    cfg.null_reps = reps.value("null", std::int64_t{1000});
    cfg.alt_reps = reps.value("alt", std::int64_t{1000});
    cfg.alpha = j.at("alpha").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string ExperimentConfig::to_json_text() const {
    json j;
    j["procedure"] = procedure_to_json(*this);
    if (explicit_C.has_value()) {
        j["procedure"]["C"] = *explicit_C;
    } else {
        j["procedure"].erase("C");
    }
    j["grid"] = {{"p", ps}, {"n", ns}, {"s", ss}};
    if (!t0s.empty()) j["grid"]["t0"] = t0s;
    j["noise"] = noise_to_json(noise);
    json sig;
    std::vector<double> multiples, xis, rho2s;
    for (const auto& s : signals) {
        if (s.kind == SignalKind::Multiple) multiples.push_back(s.value);
        if (s.kind == SignalKind::Xi) xis.push_back(s.value);
        if (s.kind == SignalKind::Rho2) rho2s.push_back(s.value);
    }
    if (!multiples.empty()) sig["multiples"] = multiples;
    if (!xis.empty()) sig["xi"] = xis;
    if (!rho2s.empty()) sig["rho2"] = rho2s;
    if (!sig.empty()) j["signal"] = sig;
    j["replications"] = {
        {"calibrate", calibrate_reps}, {"null", null_reps}, {"alt", alt_reps}};
    j["alpha"] = alpha;
    j["seed"] = seed;
    return j.dump(2);
}

double binomial_se(double freq, std::int64_t reps) {
    if (reps <= 0) return 0.0;
    return std::sqrt(freq * (1.0 - freq) / static_cast<double>(reps));
}

double signal_scale(const Procedure& proc, std::int64_t p, std::int64_t n,
                    std::int64_t true_s, const CovarianceSpec& noise) {
    switch (proc.kind()) {
        case ProcedureKind::Fixed:
        case ProcedureKind::Adaptive:
            return rate_rstar(ProblemSize::of(p, n, true_s));
        case ProcedureKind::SpatialKnown:
        case ProcedureKind::SpatialEstimated: {
            const auto fn = noise.functionals(p);
            const double L = loglog8n(n);
            return std::max(fn.frobenius * std::sqrt(L), fn.operator_norm * L);
        }
        case ProcedureKind::Equicorr: {
            const double L = loglog8n(n);
            const double logarg = std::log(std::exp(1.0) * static_cast<double>(p) * L /
                                           (static_cast<double>(true_s) * true_s));
            return (1.0 - proc.gamma()) *
                   std::max(static_cast<double>(true_s) * logarg, L);
        }
        case ProcedureKind::Temporal: {
            const double L = loglog8n(n);
            const double pd = static_cast<double>(p);
            return proc.B() * pd + (1.0 + proc.B()) * (std::sqrt(pd * L) + L);
        }
        case ProcedureKind::DenseAsym:
        case ProcedureKind::SparseAsym:
            throw std::invalid_argument(
                "signal_scale: asymptotic tests take xi or rho2 signals");
    }
    throw std::logic_error("signal_scale: unknown kind");
}

namespace {

// Rate quantity whose product with C gives the decision threshold; Chat is
// threshold / unit_scale. The adaptive statistic is already rate-normalised.
double unit_scale(const Procedure& proc, std::int64_t p, std::int64_t n,
                  const CovarianceSpec& noise) {
    switch (proc.kind()) {
        case ProcedureKind::Adaptive:
            return 1.0;
        case ProcedureKind::Fixed:
            return rate_rstar(ProblemSize::of(p, n, proc.s()));
        case ProcedureKind::Equicorr:
            return signal_scale(proc, p, n, proc.s(), noise);
        case ProcedureKind::Temporal:
        case ProcedureKind::SpatialKnown:
        case ProcedureKind::SpatialEstimated:
            return signal_scale(proc, p, n, proc.s(), noise);
        case ProcedureKind::DenseAsym:
        case ProcedureKind::SparseAsym:
            return proc.default_threshold(p, n);
    }
    throw std::logic_error("unit_scale: unknown kind");
}

double signal_rho2(const SignalPoint& sig, const Procedure& proc, std::int64_t p,
                   std::int64_t n, std::int64_t true_s, const CovarianceSpec& noise,
                   double c_hat) {
    switch (sig.kind) {
        case SignalKind::Rho2:
            return sig.value;
        case SignalKind::Multiple:
            return sig.value * c_hat * signal_scale(proc, p, n, true_s, noise);
        case SignalKind::Xi: {
            const double rho =
                proc.kind() == ProcedureKind::SparseAsym
                    ? asymptotic_boundary_sparse(p, n, true_s, sig.value)
                    : asymptotic_boundary_dense(p, n, sig.value);
            return rho * rho;
        }
    }
    throw std::logic_error("signal_rho2: unknown kind");
}

Procedure resolve_procedure(const ExperimentConfig& cfg, std::int64_t cell_s) {
    Procedure proc = cfg.procedure;
    if (cfg.procedure_s_from_cell &&
        (proc.kind() == ProcedureKind::Fixed || proc.kind() == ProcedureKind::SparseAsym ||
         proc.kind() == ProcedureKind::Equicorr)) {
        switch (proc.kind()) {
            case ProcedureKind::Fixed:
                proc = Procedure::fixed(cell_s, proc.C());
                break;
            case ProcedureKind::SparseAsym:
                proc = Procedure::sparse_asym(cell_s, proc.delta2());
                break;
            case ProcedureKind::Equicorr:
                proc = Procedure::equicorr(proc.gamma(), cell_s, proc.C(), proc.Cprime());
                break;
            default:
                break;
        }
    }
    if (cfg.procedure_gamma_from_noise && proc.kind() == ProcedureKind::Equicorr &&
        cfg.noise.kind() == CovarianceKind::Equicorrelated) {
        proc = Procedure::equicorr(cfg.noise.gamma(), proc.s(), proc.C(), proc.Cprime());
    }
    return proc;
}

double rejection_frequency(const Procedure& proc, std::optional<double> threshold,
                           ThresholdMode mode, std::int64_t p, std::int64_t n,
                           const CovarianceSpec& noise, const AlternativeSpec* alt,
                           std::int64_t reps, std::uint64_t master,
                           std::uint64_t purpose,
                           std::initializer_list<std::uint64_t> cell_tags) {
    std::vector<std::uint64_t> tags{purpose};
    tags.insert(tags.end(), cell_tags.begin(), cell_tags.end());
    std::vector<unsigned char> rejects(reps, 0);
    const Vector mu = Vector::Zero(p);
    parallel_for(reps, [&](std::int64_t r) {
        std::uint64_t s = master;
        for (auto tag : tags) s = splitmix64(s ^ (tag + 0x9E3779B97F4A7C15ULL));
        auto stream = RandomStream::derive(s, {static_cast<std::uint64_t>(r)});
        const ObservationMatrix X = alt == nullptr
                                        ? gen_null(p, n, mu, noise, stream)
                                        : gen_alternative(*alt, noise, stream);
        const TestOutcome out = threshold.has_value()
                                    ? proc.run_with_threshold(X, *threshold, mode)
                                    : proc.run(X);
        rejects[r] = out.reject ? 1 : 0;
    });
    std::int64_t count = 0;
    for (auto b : rejects) count += b;
    return static_cast<double>(count) / static_cast<double>(reps);
}

CellResult run_cell(const ExperimentConfig& cfg, std::int64_t p, std::int64_t n,
                    std::int64_t s, std::int64_t t0) {
    const auto start = std::chrono::steady_clock::now();
    CellResult cell;
    cell.p = p;
    cell.n = n;
    cell.s = s;
    cell.t0 = t0;
    cell.noise = cfg.noise.description();
    try {
        const Procedure proc = resolve_procedure(cfg, s);
        cell.procedure = proc.name();

        // spatial-est with an explicit C resolves its cutoff per run from the
        // estimated functionals, so no single threshold is recorded.
        std::optional<double> threshold;
        ThresholdMode mode;
        if (cfg.explicit_C.has_value()) {
            mode = ThresholdMode::FromC;
            if (proc.kind() == ProcedureKind::SpatialEstimated) {
                cell.threshold = std::numeric_limits<double>::quiet_NaN();
            } else {
                threshold = proc.default_threshold(p, n);
                cell.threshold = *threshold;
            }
            cell.c_hat = *cfg.explicit_C;
        } else {
            mode = ThresholdMode::Calibrated;
            const std::uint64_t cal_seed =
                derive_seed(cfg.seed, {kCalibrateTag, static_cast<std::uint64_t>(p),
                                       static_cast<std::uint64_t>(n),
                                       static_cast<std::uint64_t>(proc.s())});
            threshold = calibrate(proc, p, n, cfg.noise, cfg.alpha,
                                  cfg.calibrate_reps, cal_seed);
            cell.threshold = *threshold;
            cell.c_hat = *threshold / unit_scale(proc, p, n, cfg.noise);
        }
        cell.threshold_mode = to_string(mode);

        cell.null_reps = cfg.null_reps;
        cell.type1 = rejection_frequency(
            proc, threshold, mode, p, n, cfg.noise, nullptr, cfg.null_reps,
            cfg.seed, kNullTag,
            {static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(n),
             static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(t0)});
        cell.type1_se = binomial_se(cell.type1, cfg.null_reps);

        for (std::size_t si = 0; si < cfg.signals.size(); ++si) {
            const auto& sig = cfg.signals[si];
            SignalResult res;
            res.kind = sig.kind;
            res.value = sig.value;
            res.rho2 = signal_rho2(sig, proc, p, n, s, cfg.noise, cell.c_hat);
            res.reps = cfg.alt_reps;
            const auto alt = AlternativeSpec::equal_shift(p, n, t0, s, res.rho2);
            res.power = rejection_frequency(
                proc, threshold, mode, p, n, cfg.noise, &alt, cfg.alt_reps,
                cfg.seed, kAltTag,
                {static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(n),
                 static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(t0),
                 static_cast<std::uint64_t>(si)});
            res.power_se = binomial_se(res.power, cfg.alt_reps);
            res.type2 = 1.0 - res.power;
            res.type2_se = res.power_se;
            cell.signals.push_back(res);
        }
    } catch (const std::exception& e) {
        cell.error = e.what();
    }
    cell.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    return cell;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentReport report;
    report.rng_scheme = kRngSchemeVersion;
    report.seed = cfg.seed;
    report.alpha = cfg.alpha;
    report.config_hash = fnv1a_hash(cfg.to_json_text());
    for (auto p : cfg.ps) {
        for (auto n : cfg.ns) {
            for (auto s : cfg.ss) {
                const std::vector<std::int64_t> t0s =
                    cfg.t0s.empty() ? std::vector<std::int64_t>{n / 2} : cfg.t0s;
                for (auto t0 : t0s) {
                    report.cells.push_back(run_cell(cfg, p, n, s, t0));
                }
            }
        }
    }
    return report;
}

ExperimentReport sweep_phase(const ExperimentConfig& cfg) {
    if (cfg.signals.empty()) {
        throw std::invalid_argument("sweep_phase: signal ladder must be nonempty");
    }
    if (cfg.ss.empty()) {
        throw std::invalid_argument("sweep_phase: sparsity ladder must be nonempty");
    }
    return run_experiment(cfg);
}

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Export / import
// ---------------------------------------------------------------------------

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

json signal_to_json(const SignalResult& s) {
    return json{{"kind", to_string(s.kind)}, {"value", s.value},
                {"rho2", s.rho2},           {"reps", s.reps},
                {"power", s.power},         {"power_se", s.power_se},
                {"type2", s.type2},         {"type2_se", s.type2_se}};
}

SignalResult signal_from_json(const json& j) {
    SignalResult s;
    s.kind = signal_kind_from(j.at("kind").get<std::string>());
    s.value = j.at("value").get<double>();
    s.rho2 = j.at("rho2").get<double>();
    s.reps = j.at("reps").get<std::int64_t>();
    s.power = j.at("power").get<double>();
    s.power_se = j.at("power_se").get<double>();
    s.type2 = j.at("type2").get<double>();
    s.type2_se = j.at("type2_se").get<double>();
    return s;
}

}  // namespace

void export_json(const ExperimentReport& report, const std::string& path) {
    json j;
    j["schema"] = report.schema;
    j["version"] = report.version;
    j["rng_scheme"] = report.rng_scheme;
    j["seed"] = report.seed;
    j["alpha"] = report.alpha;
    j["config_hash"] = report.config_hash;
    j["cells"] = json::array();
    for (const auto& c : report.cells) {
        json jc;
        jc["p"] = c.p;
        jc["n"] = c.n;
        jc["s"] = c.s;
        jc["t0"] = c.t0;
        jc["procedure"] = c.procedure;
        jc["noise"] = c.noise;
        jc["threshold"] = c.threshold;
        jc["threshold_mode"] = c.threshold_mode;
        jc["c_hat"] = c.c_hat;
        jc["null_reps"] = c.null_reps;
        jc["type1"] = c.type1;
        jc["type1_se"] = c.type1_se;
        jc["signals"] = json::array();
        for (const auto& s : c.signals) jc["signals"].push_back(signal_to_json(s));
        jc["error"] = c.error;
        jc["wall_ms"] = c.wall_ms;
        j["cells"].push_back(jc);
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report JSON: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("short write for report JSON: " + path);
}

ExperimentReport import_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open report JSON: " + path);
    json j;
    in >> j;
    ExperimentReport report;
    report.schema = j.at("schema").get<std::string>();
    report.version = j.at("version").get<std::string>();
    report.rng_scheme = j.at("rng_scheme").get<std::string>();
    report.seed = j.at("seed").get<std::uint64_t>();
    report.alpha = j.at("alpha").get<double>();
    report.config_hash = j.at("config_hash").get<std::uint64_t>();
    for (const auto& jc : j.at("cells")) {
        CellResult c;
        c.p = jc.at("p").get<std::int64_t>();
        c.n = jc.at("n").get<std::int64_t>();
        c.s = jc.at("s").get<std::int64_t>();
        c.t0 = jc.at("t0").get<std::int64_t>();
        c.procedure = jc.at("procedure").get<std::string>();
        c.noise = jc.at("noise").get<std::string>();
        // NaN thresholds (per-run cutoffs) serialise as null
        c.threshold = jc.at("threshold").is_null()
                          ? std::numeric_limits<double>::quiet_NaN()
                          : jc.at("threshold").get<double>();
        c.threshold_mode = jc.at("threshold_mode").get<std::string>();
        c.c_hat = jc.at("c_hat").get<double>();
        c.null_reps = jc.at("null_reps").get<std::int64_t>();
        c.type1 = jc.at("type1").get<double>();
        c.type1_se = jc.at("type1_se").get<double>();
        for (const auto& js : jc.at("signals")) c.signals.push_back(signal_from_json(js));
        c.error = jc.at("error").get<std::string>();
        c.wall_ms = jc.at("wall_ms").get<double>();
        report.cells.push_back(std::move(c));
    }
    return report;
}

void export_csv(const ExperimentReport& report, const std::string& path) {
    std::size_t max_signals = 0;
    for (const auto& c : report.cells) {
        max_signals = std::max(max_signals, c.signals.size());
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report CSV: " + path);

    // Header: fixed cell columns, then sig{i}_* groups, wall time and error last.
    out << "p,n,s,t0,procedure,noise,threshold,threshold_mode,c_hat,null_reps,"
           "type1,type1_se";
    for (std::size_t i = 1; i <= max_signals; ++i) {
        out << ",sig" << i << "_kind,sig" << i << "_value,sig" << i << "_rho2,sig" << i
            << "_reps,sig" << i << "_power,sig" << i << "_power_se,sig" << i
            << "_type2,sig" << i << "_type2_se";
    }
    out << ",error,wall_ms\n";

    for (const auto& c : report.cells) {
        out << c.p << ',' << c.n << ',' << c.s << ',' << c.t0 << ','
            << csv_quote(c.procedure) << ',' << csv_quote(c.noise) << ','
            << fmt_double(c.threshold) << ',' << csv_quote(c.threshold_mode) << ','
            << fmt_double(c.c_hat) << ',' << c.null_reps << ',' << fmt_double(c.type1)
            << ',' << fmt_double(c.type1_se);
        for (std::size_t i = 0; i < max_signals; ++i) {
            if (i < c.signals.size()) {
                const auto& s = c.signals[i];
                out << ',' << to_string(s.kind) << ',' << fmt_double(s.value) << ','
                    << fmt_double(s.rho2) << ',' << s.reps << ',' << fmt_double(s.power)
                    << ',' << fmt_double(s.power_se) << ',' << fmt_double(s.type2) << ','
                    << fmt_double(s.type2_se);
            } else {
                out << ",,,,,,,,";
            }
        }
        out << ',' << csv_quote(c.error) << ',' << fmt_double(c.wall_ms) << '\n';
    }
    if (!out) throw std::runtime_error("short write for report CSV: " + path);
}

ExperimentReport import_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open report CSV: " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty report CSV: " + path);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    const auto cols = csv_split(header);
    constexpr std::size_t kFixed = 12;
    if (cols.size() < kFixed + 2 || (cols.size() - kFixed - 2) % 8 != 0) {
        throw std::runtime_error("unrecognised report CSV header: " + path);
    }
    const std::size_t nsignals = (cols.size() - kFixed - 2) / 8;

    ExperimentReport report;  // CSV carries cells only; metadata lives in JSON
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = csv_split(line);
        if (f.size() != cols.size()) {
            throw std::runtime_error("ragged row in report CSV: " + path);
        }
        CellResult c;
        c.p = std::stoll(f[0]);
        c.n = std::stoll(f[1]);
        c.s = std::stoll(f[2]);
        c.t0 = std::stoll(f[3]);
        c.procedure = f[4];
        c.noise = f[5];
        c.threshold = std::stod(f[6]);
        c.threshold_mode = f[7];
        c.c_hat = std::stod(f[8]);
        c.null_reps = std::stoll(f[9]);
        c.type1 = std::stod(f[10]);
        c.type1_se = std::stod(f[11]);
        for (std::size_t i = 0; i < nsignals; ++i) {
            const std::size_t base = kFixed + 8 * i;
            if (f[base].empty()) continue;
            SignalResult s;
            s.kind = signal_kind_from(f[base]);
            s.value = std::stod(f[base + 1]);
            s.rho2 = std::stod(f[base + 2]);
            s.reps = std::stoll(f[base + 3]);
            s.power = std::stod(f[base + 4]);
            s.power_se = std::stod(f[base + 5]);
            s.type2 = std::stod(f[base + 6]);
            s.type2_se = std::stod(f[base + 7]);
            c.signals.push_back(s);
        }
        c.error = f[cols.size() - 2];
        c.wall_ms = std::stod(f[cols.size() - 1]);
        report.cells.push_back(std::move(c));
    }
    return report;
}

void export_sweep_csv(const ExperimentReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write sweep CSV: " + path);
    out << "p,n,s,t0,procedure,noise,signal_kind,signal_value,rho2,power,power_se,"
           "reps\n";
    for (const auto& c : report.cells) {
        for (const auto& s : c.signals) {
            out << c.p << ',' << c.n << ',' << c.s << ',' << c.t0 << ','
                << csv_quote(c.procedure) << ',' << csv_quote(c.noise) << ','
                << to_string(s.kind) << ',' << fmt_double(s.value) << ','
                << fmt_double(s.rho2) << ',' << fmt_double(s.power) << ','
                << fmt_double(s.power_se) << ',' << s.reps << '\n';
        }
    }
    if (!out) throw std::runtime_error("short write for sweep CSV: " + path);
}

}  // namespace cpminimax
