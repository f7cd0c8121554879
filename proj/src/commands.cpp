#include "fairsel/cli.hpp"

#include "fairsel/dataio.hpp"
#include "fairsel/fairness.hpp"
#include "fairsel/irs.hpp"
#include "fairsel/micp.hpp"
#include "fairsel/oracle.hpp"
#include "fairsel/subselect.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

namespace fairsel::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

using clock_type = std::chrono::steady_clock;

double ms_since(clock_type::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

std::string resolve(const std::string& base, const std::string& p) {
    namespace fs = std::filesystem;
    if (p.empty() || fs::path(p).is_absolute()) return p;
    return (fs::path(base) / p).string();
}

/// Collects every config problem before anything runs.
class Checker {
public:
    Checker(const Json& c, std::set<std::string> known) : c_(c) {
        if (!c.is_object()) {
            errors.push_back("config must be a JSON object");
            return;
        }
        for (auto it = c.begin(); it != c.end(); ++it)
            if (!known.count(it.key())) errors.push_back("unknown key '" + it.key() + "'");
    }

    double number(const std::string& key, double def) {
        if (!c_.is_object() || !c_.contains(key)) return def;
        const auto& v = c_[key];
        if (!v.is_number()) {
            errors.push_back("'" + key + "' must be a number");
            return def;
        }
        return v.get<double>();
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> def) {
        if (!c_.is_object() || !c_.contains(key)) return def;
        const auto& v = c_[key];
        if (v.is_number()) return {v.get<double>()};
        std::vector<double> out;
        if (!v.is_array() || v.empty()) {
            errors.push_back("'" + key + "' must be a number or a nonempty array of numbers");
            return def;
        }
        for (const auto& e : v) {
            if (!e.is_number()) {
                errors.push_back("'" + key + "' must hold numbers only");
                return def;
            }
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::string string(const std::string& key, std::string def) {
        if (!c_.is_object() || !c_.contains(key)) return def;
        const auto& v = c_[key];
        if (!v.is_string()) {
            errors.push_back("'" + key + "' must be a string");
            return def;
        }
        return v.get<std::string>();
    }

    bool boolean(const std::string& key, bool def) {
        if (!c_.is_object() || !c_.contains(key)) return def;
        const auto& v = c_[key];
        if (!v.is_boolean()) {
            errors.push_back("'" + key + "' must be true or false");
            return def;
        }
        return v.get<bool>();
    }

    bool has(const std::string& key) const { return c_.is_object() && c_.contains(key); }
    const Json& at(const std::string& key) const { return c_.at(key); }

    void require(bool ok, const std::string& msg) {
        if (!ok) errors.push_back(msg);
    }

    void raise() const {
        if (errors.empty()) return;
        std::string msg = "invalid config:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw ConfigError(msg);
    }

    std::vector<std::string> errors;

private:
    const Json& c_;
};

struct DataSource {
    std::string path, schema_path;
    Json schema_inline;
    std::string synth = "";  // "", "gaussian2d", "random"
    std::uint64_t synth_seed = 0;
    std::size_t n = 60, dim = 2;
    int classes = 2;
    bool normalize = true;
};

struct RunSpec {
    DataSource data;
    ModelKind model = ModelKind::SVM;
    FairnessKind fairness = FairnessKind::OMR;
    HyperParams h;
    TrainConfig train;
    std::uint64_t seed = 0;
    double test_ratio = 0.0;
    std::string blackbox;
    int timeout_ms = 60000;
    bool baseline = true;
    double baseline_lambda = -1.0;
};

const std::set<std::string> kDataKeys = {"data", "schema", "synth", "normalize"};
const std::set<std::string> kRunKeys = {"model",      "fairness", "t",        "lambda",          "rho",
                                        "delta",      "max_iter", "seed",     "test_ratio",      "train",
                                        "kernel",     "blackbox", "timeout_ms", "baseline",      "baseline_lambda"};

std::set<std::string> join(std::set<std::string> a, const std::set<std::string>& b) {
    a.insert(b.begin(), b.end());
    return a;
}

DataSource parse_data(Checker& ck, const std::string& base) {
    DataSource d;
    d.normalize = ck.boolean("normalize", true);
    if (ck.has("synth")) {
        const auto& s = ck.at("synth");
        if (!s.is_object()) {
            ck.errors.push_back("'synth' must be an object");
            return d;
        }
        Checker sc(s, {"kind", "seed", "n", "dim", "classes"});
        d.synth = sc.string("kind", "gaussian2d");
        d.synth_seed = static_cast<std::uint64_t>(sc.number("seed", 0));
        d.n = static_cast<std::size_t>(sc.number("n", 60));
        d.dim = static_cast<std::size_t>(sc.number("dim", 2));
        d.classes = static_cast<int>(sc.number("classes", 2));
        sc.require(d.synth == "gaussian2d" || d.synth == "random", "synth.kind must be gaussian2d or random");
        sc.require(d.n >= 4 && d.dim >= 1 && d.classes >= 2, "synth needs n >= 4, dim >= 1, classes >= 2");
        for (auto& e : sc.errors) ck.errors.push_back("synth: " + e);
        if (ck.has("data")) ck.errors.push_back("give either 'data' or 'synth', not both");
        return d;
    }
    d.path = resolve(base, ck.string("data", ""));
    if (d.path.empty()) ck.errors.push_back("'data' (CSV path) or 'synth' is required");
    if (!ck.has("schema")) {
        ck.errors.push_back("'schema' is required with 'data'");
    } else if (ck.at("schema").is_object()) {
        d.schema_inline = ck.at("schema");
    } else {
        d.schema_path = resolve(base, ck.string("schema", ""));
    }
    if (!d.path.empty() && !std::filesystem::exists(d.path)) ck.errors.push_back("data file not found: " + d.path);
    if (!d.schema_path.empty() && !std::filesystem::exists(d.schema_path))
        ck.errors.push_back("schema file not found: " + d.schema_path);
    return d;
}

Dataset load(const DataSource& d) {
    if (d.synth == "gaussian2d") return synth_gaussian_2d(d.synth_seed);
    if (d.synth == "random") return synth_random(d.synth_seed, d.n, d.dim, d.classes);
    Schema s = d.schema_inline.is_object() ? Schema::from_json(d.schema_inline.dump()) : Schema::from_file(d.schema_path);
    auto data = load_csv(d.path, s, d.normalize);
    data.validate();
    return data;
}

TrainConfig parse_train(Checker& ck) {
    TrainConfig cfg;
    if (ck.has("train")) {
        Checker tc(ck.at("train"), {"iterations", "schedule", "base_rate", "polish", "tolerance"});
        cfg.iterations = static_cast<int>(tc.number("iterations", cfg.iterations));
        std::string sched = tc.string("schedule", "auto");
        if (sched == "auto") cfg.schedule = StepSchedule::Auto;
        else if (sched == "sqrt") cfg.schedule = StepSchedule::InverseSqrt;
        else if (sched == "linear") cfg.schedule = StepSchedule::InverseLinear;
        else tc.errors.push_back("schedule must be auto, sqrt or linear");
        cfg.base_rate = tc.number("base_rate", cfg.base_rate);
        cfg.polish = tc.boolean("polish", cfg.polish);
        cfg.tolerance = tc.number("tolerance", cfg.tolerance);
        tc.require(cfg.iterations >= 1, "iterations must be >= 1");
        tc.require(cfg.base_rate > 0.0, "base_rate must be > 0");
        for (auto& e : tc.errors) ck.errors.push_back("train: " + e);
    }
    if (ck.has("kernel")) {
        Checker kc(ck.at("kernel"), {"type", "gamma", "degree", "coef"});
        std::string type = kc.string("type", "rbf");
        if (type == "linear") cfg.kernel.type = KernelType::Linear;
        else if (type == "rbf") cfg.kernel.type = KernelType::RBF;
        else if (type == "poly" || type == "polynomial") cfg.kernel.type = KernelType::Polynomial;
        else kc.errors.push_back("kernel type must be linear, rbf or poly");
        cfg.kernel.gamma = kc.number("gamma", cfg.kernel.gamma);
        cfg.kernel.degree = static_cast<int>(kc.number("degree", cfg.kernel.degree));
        cfg.kernel.coef = kc.number("coef", cfg.kernel.coef);
        kc.require(cfg.kernel.gamma > 0.0, "gamma must be > 0");
        kc.require(cfg.kernel.degree >= 1, "degree must be >= 1");
        for (auto& e : kc.errors) ck.errors.push_back("kernel: " + e);
    }
    return cfg;
}

/// Shared keys of fit and grid; scalar hyperparameters are read by the caller.
RunSpec parse_run(Checker& ck, const Options& opt, const std::string& base) {
    RunSpec r;
    r.data = parse_data(ck, base);
    try {
        r.model = parse_model_kind(ck.string("model", "svm"));
    } catch (const InvalidInput& e) {
        ck.errors.push_back(e.what());
    }
    try {
        r.fairness = parse_fairness_kind(ck.string("fairness", "omr"));
    } catch (const InvalidInput& e) {
        ck.errors.push_back(e.what());
    }
    r.blackbox = opt.blackbox.empty() ? ck.string("blackbox", "") : opt.blackbox;
    if (!r.blackbox.empty()) r.model = ModelKind::BlackBox;
    r.h.delta = ck.number("delta", 1e-6);
    r.h.max_iter = static_cast<int>(ck.number("max_iter", r.model == ModelKind::BlackBox ? 4 : 50));
    r.seed = opt.seed ? *opt.seed : static_cast<std::uint64_t>(ck.number("seed", 0));
    r.test_ratio = ck.number("test_ratio", 0.0);
    r.timeout_ms = static_cast<int>(ck.number("timeout_ms", 60000));
    r.baseline = ck.boolean("baseline", true);
    r.baseline_lambda = ck.number("baseline_lambda", -1.0);
    r.train = parse_train(ck);
    ck.require(r.h.delta > 0.0, "delta must be > 0");
    ck.require(r.h.max_iter >= 1, "max_iter must be >= 1");
    ck.require(r.test_ratio >= 0.0 && r.test_ratio < 1.0, "test_ratio must lie in [0,1)");
    ck.require(r.timeout_ms > 0, "timeout_ms must be > 0");
    if (r.model == ModelKind::BlackBox) {
        ck.require(!r.blackbox.empty(), "model blackbox needs a 'blackbox' command");
        ck.require(r.test_ratio == 0.0, "black-box runs score the training points only; set test_ratio to 0");
    }
    if (r.model == ModelKind::Multiclass) ck.require(r.fairness == FairnessKind::OMR, "multiclass supports omr only");
    return r;
}

struct Metrics {
    double accuracy = 0.0, fairness = 0.0;
};

Json metrics_json(const Metrics& m) {
    Json j;
    j["accuracy"] = m.accuracy;
    j["fairness"] = m.fairness;
    if (m.fairness > 0.0) j["acc_over_f"] = m.accuracy / m.fairness;
    else j["acc_over_f"] = nullptr;
    return j;
}

Metrics evaluate_predictions(const std::vector<int>& pred, const Dataset& d, FairnessKind kind) {
    auto corr = correctness(pred, d.labels);
    Metrics m;
    m.accuracy = static_cast<double>(corr.count()) / static_cast<double>(d.size());
    auto spec = FairnessSpec::build(d, d.is_binary() ? kind : FairnessKind::OMR);
    m.fairness = fairness_value(corr, spec);
    return m;
}

/// Correct-point labels from black-box probabilities.
std::vector<int> blackbox_predictions(const Scores& s, const Dataset& d) {
    std::vector<int> p(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) p[i] = s.values[i] >= 0.5 ? d.labels[i] : -d.labels[i];
    return p;
}

Json trace_json(const IrsTrace& tr) {
    Json a = Json::array();
    for (const auto& r : tr.records) {
        Json j;
        j["iteration"] = r.iteration;
        j["objective"] = r.objective;
        j["accuracy"] = r.accuracy;
        j["fairness"] = r.fairness;
        j["selection_fairness"] = r.selection_fairness;
        j["selected"] = r.selected;
        j["inner_residual"] = std::isfinite(r.inner_residual) ? Json(r.inner_residual) : Json("uncertified");
        a.push_back(std::move(j));
    }
    return a;
}

Json params_json(const RunSpec& r) {
    Json p;
    p["t"] = r.h.t;
    p["lambda"] = r.h.lambda;
    p["rho"] = r.h.rho;
    p["delta"] = r.h.delta;
    p["max_iter"] = r.h.max_iter;
    p["seed"] = r.seed;
    return p;
}

/// Vanilla training on all points of `train` with the model kind of the run.
std::vector<int> vanilla_predictions(const RunSpec& r, const Dataset& train, const Matrix& features, Scorer* scorer) {
    HyperParams h = r.h;
    if (r.baseline_lambda >= 0.0) h.lambda = r.baseline_lambda;
    Selection all(train.size(), 1);
    switch (r.model) {
        case ModelKind::SVM: return predict(fit_svm_weighted(train, all, h, r.train).model, features);
        case ModelKind::Logistic: return predict(fit_logreg_weighted(train, all, h, r.train).model, features);
        case ModelKind::Kernel: return fit_kernel_svm(train, all, h, r.train).model.predict(features);
        case ModelKind::Multiclass: {
            OneHotSelection z;
            z.classes = static_cast<std::size_t>(train.class_count);
            for (std::size_t i = 0; i < train.size(); ++i) z.hot.push_back(train.class_index(i));
            auto p = predict(fit_multisvm_weighted(train, z, h, r.train).model, features);
            for (auto& v : p) v = train.label_of_class(v - 1);
            return p;
        }
        case ModelKind::BlackBox: {
            std::vector<std::size_t> idx(train.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            return blackbox_predictions(blackbox_scores(*scorer, idx, train.size()), train);
        }
    }
    return {};
}

std::unique_ptr<Scorer> make_scorer(const RunSpec& r) {
    if (r.model != ModelKind::BlackBox) return nullptr;
    return std::make_unique<SubprocessScorer>(r.blackbox, r.timeout_ms);
}

void check_dataset(const RunSpec& r, const Dataset& d) {
    if (r.model == ModelKind::Multiclass) return;
    if (!d.is_binary()) throw DataError("model '" + to_string(r.model) + "' needs binary labels");
}

Json load_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config " + path);
    try {
        return Json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path);
    f << text;
}

}  // namespace

Json cmd_fit(const Json& config, const Options& opt, const std::string& base_dir) {
    auto t0 = clock_type::now();
    Checker ck(config, join(kDataKeys, kRunKeys));
    RunSpec r = parse_run(ck, opt, base_dir);
    r.h.t = ck.number("t", 1.0);
    r.h.lambda = ck.number("lambda", 0.0);
    r.h.rho = ck.number("rho", 0.0);
    ck.require(std::isfinite(r.h.t), "t must be finite");
    ck.require(r.h.lambda >= 0.0, "lambda must be >= 0");
    ck.require(r.h.rho >= 0.0, "rho must be >= 0");
    ck.raise();

    Dataset full = load(r.data);
    check_dataset(r, full);
    Dataset train = full, test;
    bool has_test = r.test_ratio > 0.0;
    if (has_test) std::tie(train, test) = split(full, 1.0 - r.test_ratio, r.seed);
    auto spec = FairnessSpec::build(train, r.fairness);
    spec.require_valid();

    auto scorer = make_scorer(r);
    IrsConfig ic;
    ic.train = r.train;
    ic.scorer = scorer.get();
    auto res = irs_fit(r.model, train, r.h, spec, ic);

    Json m;
    m["model"] = to_string(r.model);
    m["fairness_kind"] = to_string(r.fairness);
    m["params"] = params_json(r);
    m["n_train"] = train.size();
    m["n_test"] = has_test ? test.size() : 0;
    Json tr = metrics_json(evaluate_predictions(res.train_predictions, train, r.fairness));
    tr["selection_fairness"] = res.trace.records.at(static_cast<std::size_t>(res.trace.best_iteration)).selection_fairness;
    m["train"] = tr;
    m["test"] = has_test ? metrics_json(evaluate_predictions(predict(res.model, test.features, train), test, r.fairness))
                         : Json(nullptr);
    m["objective"] = res.objective;
    m["residual"] = std::isfinite(res.residual) ? Json(res.residual) : Json("uncertified");
    m["best_iteration"] = res.trace.best_iteration;
    m["stop_reason"] = res.trace.stop_reason;
    m["degenerate_stop"] = res.trace.degenerate_stop;
    m["monotone_violations"] = res.trace.monotone_violations;
    m["trace"] = trace_json(res.trace);
    if (r.model == ModelKind::SVM || r.model == ModelKind::Logistic) {
        m["w"] = res.model.linear.w;
        m["b"] = res.model.linear.b;
    }
    if (r.baseline) {
        Json b;
        b["train"] = metrics_json(evaluate_predictions(vanilla_predictions(r, train, train.features, scorer.get()), train,
                                                       r.fairness));
        b["test"] = has_test ? metrics_json(evaluate_predictions(vanilla_predictions(r, train, test.features, nullptr),
                                                                  test, r.fairness))
                             : Json(nullptr);
        m["baseline"] = b;
    }
    if (scorer) static_cast<SubprocessScorer*>(scorer.get())->quit();

    Json env;
    Json millis = Json::array();
    for (const auto& rec : res.trace.records) millis.push_back(rec.millis);
    env["trace_millis"] = millis;
    env["wall_ms"] = ms_since(t0);
    env["version"] = kVersion;
    Json doc;
    doc["command"] = "fit";
    doc["metrics"] = m;
    doc["env"] = env;
    return doc;
}

Json cmd_grid(const Json& config, const Options& opt, const std::string& base_dir) {
    auto t0 = clock_type::now();
    Checker ck(config, join(join(kDataKeys, kRunKeys), {"folds", "warm_start", "compare_cold"}));
    RunSpec r = parse_run(ck, opt, base_dir);
    auto ts = ck.numbers("t", {1.0});
    auto lams = ck.numbers("lambda", {0.0});
    auto rhos = ck.numbers("rho", {0.0});
    auto folds = static_cast<std::size_t>(ck.number("folds", 1));
    bool warm = ck.boolean("warm_start", true);
    bool compare = ck.boolean("compare_cold", false);
    for (double t : ts) ck.require(std::isfinite(t), "t values must be finite");
    for (double l : lams) ck.require(l >= 0.0, "lambda values must be >= 0");
    for (double p : rhos) ck.require(p >= 0.0, "rho values must be >= 0");
    ck.require(folds >= 1, "folds must be >= 1");
    if (r.model == ModelKind::BlackBox) ck.require(folds == 1, "black-box grids cannot use folds");
    if (opt.out.empty()) ck.errors.push_back("grid needs --out for the CSV table");
    ck.raise();
    std::sort(rhos.begin(), rhos.end());

    Dataset full = load(r.data);
    check_dataset(r, full);
    // each fold: (fit data, evaluation data)
    std::vector<std::pair<Dataset, Dataset>> parts;
    std::vector<std::string> warnings;
    Dataset train = full, test;
    bool has_test = r.test_ratio > 0.0;
    if (has_test) std::tie(train, test) = split(full, 1.0 - r.test_ratio, r.seed);
    if (folds >= 2) {
        auto f = kfold(train, folds, r.seed);
        warnings = f.warnings;
        for (const auto& s : f.folds) parts.emplace_back(train.subset(s.train), train.subset(s.test));
    } else {
        parts.emplace_back(train, has_test ? test : train);
    }

    struct Row {
        double t, lambda, rho;
        std::size_t fold;
        Metrics fit, eval;
        double objective = 0.0;
        std::size_t iterations = 0, selected = 0;
        std::size_t cold_iterations = 0;
    };
    const std::size_t nslices = ts.size() * lams.size() * parts.size();
    std::vector<Row> rows(nslices * rhos.size());
    std::unique_ptr<Scorer> scorer = make_scorer(r);
    std::atomic<std::size_t> next{0};
    std::vector<std::string> failures(nslices);

    auto run_slice = [&](std::size_t s) {
        std::size_t f = s % parts.size();
        std::size_t li = (s / parts.size()) % lams.size();
        std::size_t ti = s / (parts.size() * lams.size());
        const auto& [fit_data, eval_data] = parts[f];
        auto spec = FairnessSpec::build(fit_data, r.fairness);
        spec.require_valid();
        IrsConfig ic;
        ic.train = r.train;
        ic.scorer = scorer.get();
        std::optional<FittedModel> prev;
        for (std::size_t p = 0; p < rhos.size(); ++p) {
            HyperParams h = r.h;
            h.t = ts[ti];
            h.lambda = lams[li];
            h.rho = rhos[p];
            auto res = irs_fit(r.model, fit_data, h, spec, ic, warm && prev ? &*prev : nullptr);
            Row& row = rows[s * rhos.size() + p];
            row = Row{h.t, h.lambda, h.rho, f, {}, {}, res.objective, res.trace.records.size(), res.z.count(), 0};
            if (r.model == ModelKind::Multiclass) {
                row.selected = 0;
                for (std::size_t i = 0; i < fit_data.size(); ++i)
                    row.selected += res.onehot.hot[i] == fit_data.class_index(i);
            }
            row.fit = evaluate_predictions(res.train_predictions, fit_data, r.fairness);
            row.eval = r.model == ModelKind::BlackBox
                           ? row.fit
                           : evaluate_predictions(predict(res.model, eval_data.features, fit_data), eval_data,
                                                  r.fairness);
            if (compare) row.cold_iterations = irs_fit(r.model, fit_data, h, spec, ic).trace.records.size();
            prev = res.model;
        }
    };
    unsigned threads = r.model == ModelKind::BlackBox ? 1u : std::max(1u, opt.threads);
    auto worker = [&] {
        for (std::size_t s; (s = next++) < nslices;) {
            try {
                run_slice(s);
            } catch (const std::exception& e) {
                failures[s] = e.what();
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& f : failures)
        if (!f.empty()) throw Error("grid cell failed: " + f);
    if (scorer) static_cast<SubprocessScorer*>(scorer.get())->quit();

    // rows ordered by (t, lambda, rho, fold)
    std::vector<const Row*> ordered;
    for (std::size_t ti = 0; ti < ts.size(); ++ti)
        for (std::size_t li = 0; li < lams.size(); ++li)
            for (std::size_t p = 0; p < rhos.size(); ++p)
                for (std::size_t f = 0; f < parts.size(); ++f) {
                    std::size_t s = (ti * lams.size() + li) * parts.size() + f;
                    ordered.push_back(&rows[s * rhos.size() + p]);
                }
    std::ostringstream csv;
    csv.precision(17);
    csv << "t,lambda,rho,fold,train_accuracy,train_fairness,eval_accuracy,eval_fairness,acc_over_f,objective,"
           "iterations,selected\n";
    for (const Row* row : ordered) {
        csv << row->t << ',' << row->lambda << ',' << row->rho << ',' << row->fold << ',' << row->fit.accuracy << ','
            << row->fit.fairness << ',' << row->eval.accuracy << ',' << row->eval.fairness << ',';
        if (row->eval.fairness > 0.0) csv << row->eval.accuracy / row->eval.fairness;
        else csv << "inf";
        csv << ',' << row->objective << ',' << row->iterations << ',' << row->selected << '\n';
    }
    write_text(opt.out, csv.str());

    // best cell by mean evaluation Acc/F; zero fairness ranks first, then accuracy
    Json best;
    double best_ratio = -1.0, best_acc = -1.0;
    std::size_t warm_total = 0, cold_total = 0;
    for (std::size_t c = 0; c < ordered.size(); c += parts.size()) {
        double acc = 0.0, fair = 0.0;
        for (std::size_t f = 0; f < parts.size(); ++f) {
            acc += ordered[c + f]->eval.accuracy;
            fair += ordered[c + f]->eval.fairness;
            warm_total += ordered[c + f]->iterations;
            cold_total += ordered[c + f]->cold_iterations;
        }
        acc /= static_cast<double>(parts.size());
        fair /= static_cast<double>(parts.size());
        double ratio = fair > 0.0 ? acc / fair : std::numeric_limits<double>::infinity();
        if (ratio > best_ratio || (ratio == best_ratio && acc > best_acc)) {
            best_ratio = ratio;
            best_acc = acc;
            best = Json{{"t", ordered[c]->t},
                        {"lambda", ordered[c]->lambda},
                        {"rho", ordered[c]->rho},
                        {"accuracy", acc},
                        {"fairness", fair},
                        {"acc_over_f", std::isfinite(ratio) ? Json(ratio) : Json(nullptr)}};
        }
    }
    Json m;
    m["rows"] = ordered.size();
    m["folds"] = parts.size();
    m["best"] = best;
    m["warm_start"] = warm;
    m["total_iterations"] = warm_total;
    if (compare) m["cold_start_iterations"] = cold_total;
    m["warnings"] = warnings;
    Json doc;
    doc["command"] = "grid";
    doc["metrics"] = m;
    doc["env"] = Json{{"wall_ms", ms_since(t0)}, {"threads", threads}, {"version", kVersion}};
    return doc;
}

Json cmd_select(const Json& config, const Options& opt, const std::string& base_dir) {
    Checker ck(config, {"scores", "fairness", "t", "rho", "direction"});
    std::string path = resolve(base_dir, ck.string("scores", ""));
    ck.require(!path.empty(), "'scores' (CSV with index,u,y,g) is required");
    FairnessKind kind = FairnessKind::OMR;
    try {
        kind = parse_fairness_kind(ck.string("fairness", "omr"));
    } catch (const InvalidInput& e) {
        ck.errors.push_back(e.what());
    }
    HyperParams h;
    h.t = ck.number("t", 1.0);
    h.rho = ck.number("rho", 0.0);
    std::string dir = ck.string("direction", "at_most");
    ck.require(dir == "at_most" || dir == "at_least", "direction must be at_most or at_least");
    ck.require(std::isfinite(h.t), "t must be finite");
    ck.require(h.rho >= 0.0, "rho must be >= 0");
    ck.raise();

    auto table = read_csv_file(path);
    auto ci = table.column("index"), cu = table.column("u"), cy = table.column("y"), cg = table.column("g");
    const std::size_t N = table.rows.size();
    Scores u;
    u.direction = dir == "at_most" ? Direction::CorrectWhenAtMost : Direction::CorrectWhenAtLeast;
    u.values.assign(N, 0.0);
    std::vector<int> y(N), g(N);
    std::vector<std::uint8_t> seen(N, 0);
    auto num = [&](const std::string& s, std::size_t r, const char* col) {
        try {
            std::size_t used = 0;
            double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw NonNumericValue(std::string("non-numeric ") + col + " on row " + std::to_string(r + 2));
        }
    };
    for (std::size_t r = 0; r < N; ++r) {
        const auto& row = table.rows[r];
        double idx = num(row[ci], r, "index");
        if (idx < 0 || idx >= static_cast<double>(N) || idx != std::floor(idx) || seen[static_cast<std::size_t>(idx)])
            throw DataError("index column must be a permutation of 0..N-1");
        auto i = static_cast<std::size_t>(idx);
        seen[i] = 1;
        u.values[i] = num(row[cu], r, "u");
        y[i] = static_cast<int>(num(row[cy], r, "y"));
        g[i] = static_cast<int>(num(row[cg], r, "g"));
        if ((y[i] != 1 && y[i] != -1) || (g[i] != 1 && g[i] != -1)) throw DataError("y and g must be -1 or +1");
    }
    auto spec = FairnessSpec::from_tags(y, g, kind);
    spec.require_valid();
    auto t0 = clock_type::now();
    auto out = select(u, spec, h);
    double ms = ms_since(t0);
    if (!opt.out.empty()) {
        std::ostringstream os;
        os << "index,z\n";
        for (std::size_t i = 0; i < N; ++i) os << i << ',' << int(out.z.z[i]) << '\n';
        write_text(opt.out, os.str());
    }
    Json m;
    m["n"] = N;
    m["fairness_kind"] = to_string(kind);
    m["value"] = out.value;
    m["selected"] = out.z.count();
    m["selection_fairness"] = fairness_value(out.z, spec);
    Json doc;
    doc["command"] = "select";
    doc["metrics"] = m;
    doc["env"] = Json{{"select_ms", ms}, {"version", kVersion}};
    return doc;
}

Json cmd_export_micp(const Json& config, const Options& opt, const std::string& base_dir) {
    Checker ck(config, join(kDataKeys, {"model", "fairness", "t", "lambda", "rho", "m_u", "format"}));
    DataSource ds = parse_data(ck, base_dir);
    ModelKind model = ModelKind::SVM;
    FairnessKind kind = FairnessKind::OMR;
    try {
        model = parse_model_kind(ck.string("model", "svm"));
        kind = parse_fairness_kind(ck.string("fairness", "omr"));
    } catch (const InvalidInput& e) {
        ck.errors.push_back(e.what());
    }
    ck.require(model == ModelKind::SVM || model == ModelKind::Multiclass, "export supports svm and multiclass models");
    HyperParams h;
    h.t = ck.number("t", 1.0);
    h.lambda = ck.number("lambda", 1.0);
    h.rho = ck.number("rho", 0.0);
    std::optional<double> m_u;
    if (ck.has("m_u")) m_u = ck.number("m_u", 0.0);
    ck.require(h.lambda > 0.0 || m_u.has_value(), "lambda = 0 needs an explicit m_u");
    std::string format = ck.string("format", "");
    if (format.empty()) format = opt.out.size() > 3 && opt.out.substr(opt.out.size() - 3) == ".lp" ? "lp" : "json";
    ck.require(format == "json" || format == "lp", "format must be json or lp");
    if (opt.out.empty()) ck.errors.push_back("export-micp needs --out");
    ck.raise();

    Dataset data = load(ds);
    auto spec = FairnessSpec::build(data, model == ModelKind::Multiclass ? FairnessKind::OMR : kind);
    MicpModel mm;
    if (model == ModelKind::Multiclass) mm = build_gmsvmf(data, h, spec, m_u);
    else if (kind == FairnessKind::F1Complement) mm = build_gsvm_f1(data, h, spec, m_u);
    else mm = build_gsvmf(data, h, spec, m_u);
    write_text(opt.out, format == "lp" ? to_lp(mm) : to_json(mm));
    Json m;
    m["vars"] = mm.vars.size();
    m["linear_rows"] = mm.linear.size();
    m["cones"] = mm.rcones.size();
    m["m_u"] = m_u ? *m_u : safe_big_m(h, data, spec);
    m["format"] = format;
    return Json{{"command", "export-micp"}, {"metrics", m}, {"env", Json{{"version", kVersion}}}};
}

Json cmd_oracle_check(const Json& config, const Options& opt) {
    Checker ck(config, {"n", "seeds", "seed_offset", "dim", "classes", "model", "fairness", "t", "lambda", "rho",
                        "train"});
    auto n = static_cast<std::size_t>(ck.number("n", 12));
    auto seeds = static_cast<std::size_t>(ck.number("seeds", 50));
    auto offset = static_cast<std::uint64_t>(ck.number("seed_offset", 0));
    auto dim = static_cast<std::size_t>(ck.number("dim", 2));
    int classes = static_cast<int>(ck.number("classes", 2));
    ModelKind model = ModelKind::SVM;
    FairnessKind kind = FairnessKind::OMR;
    try {
        model = parse_model_kind(ck.string("model", "svm"));
        kind = parse_fairness_kind(ck.string("fairness", "omr"));
    } catch (const InvalidInput& e) {
        ck.errors.push_back(e.what());
    }
    HyperParams h;
    h.t = ck.number("t", 1.0);
    h.lambda = ck.number("lambda", 1.0);
    auto rhos = ck.numbers("rho", {0.1});
    TrainConfig cfg = parse_train(ck);
    ck.require(h.lambda > 0.0, "oracle checks need lambda > 0 (the M_u bound)");
    ck.require(h.t > 0.0, "oracle checks need t > 0");
    ck.require(model != ModelKind::BlackBox, "black-box models cannot be enumerated");
    ck.require(model == ModelKind::Multiclass ? (n <= 6 && classes <= 3) : n <= 16, "instance exceeds oracle caps");
    ck.require(n >= 4 && dim >= 1 && seeds >= 1, "need n >= 4, dim >= 1, seeds >= 1");
    ck.raise();

    auto t0 = clock_type::now();
    std::size_t match = 0, exact = 0, total = 0;
    Json cases = Json::array();
    for (std::size_t s = 0; s < seeds; ++s)
        for (double rho : rhos) {
            h.rho = rho;
            auto data = synth_random(offset + s, n, dim, model == ModelKind::Multiclass ? classes : 2);
            auto spec = FairnessSpec::build(data, model == ModelKind::Multiclass ? FairnessKind::OMR : kind);
            auto orc = exact_solve_tiny(data, h, spec, model, cfg, std::max(1u, opt.threads));
            IrsConfig ic;
            ic.train = cfg;
            auto res = irs_fit(model, data, h, spec, ic);
            double mu = safe_big_m(h, data, spec);
            double tol = 1e-9 + (std::isfinite(orc.residual) ? orc.residual : 0.0) +
                         (std::isfinite(res.residual) ? res.residual : 0.0);
            bool ok = false;
            double bound = 0.0;
            if (model == ModelKind::Multiclass) {
                std::size_t diff = 0;
                for (std::size_t i = 0; i < n; ++i) diff += res.onehot.hot[i] != orc.onehot.hot[i];
                bound = orc.value + mu / static_cast<double>(n) * static_cast<double>(diff);
                ok = orc.value - tol <= res.objective && res.objective <= bound + tol;
            } else {
                auto gap = approximation_gap(res.objective, orc.value, res.z, orc.z, mu, n);
                bound = gap.bound;
                ok = orc.value - tol <= res.objective && res.objective <= bound + tol;
            }
            bool same = std::fabs(res.objective - orc.value) <= tol + 1e-9 * std::max(1.0, std::fabs(orc.value));
            match += ok;
            exact += same;
            ++total;
            cases.push_back(Json{{"seed", offset + s},
                                 {"rho", rho},
                                 {"oracle", orc.value},
                                 {"irs", res.objective},
                                 {"bound", bound},
                                 {"holds", ok},
                                 {"optimal", same}});
        }
    Json m;
    m["summary"] = std::to_string(match) + "/" + std::to_string(total) + " match";
    m["matched"] = match;
    m["optimal"] = exact;
    m["total"] = total;
    m["cases"] = cases;
    return Json{{"command", "oracle-check"}, {"metrics", m}, {"env", Json{{"wall_ms", ms_since(t0)}}}};
}

Json cmd_synth(const Options& opt) {
    if (opt.out.empty()) throw ConfigError("synth needs --out");
    std::uint64_t seed = opt.seed.value_or(0);
    auto d = synth_gaussian_2d(seed);
    write_dataset_csv(opt.out, d);
    write_text(opt.out + ".schema.json", dataset_csv_schema(d).to_json() + "\n");
    Json m;
    m["seed"] = seed;
    m["n"] = d.size();
    m["csv"] = opt.out;
    m["schema"] = opt.out + ".schema.json";
    return Json{{"command", "synth"}, {"metrics", m}, {"env", Json{{"version", kVersion}}}};
}

int run(const std::string& command, const Options& opt, std::ostream& out, std::ostream& err) {
    try {
        std::string base = ".";
        Json config = Json::object();
        if (command != "synth") {
            if (opt.config.empty()) throw ConfigError(command + " needs --config");
            config = load_json_file(opt.config);
            base = std::filesystem::path(opt.config).parent_path().string();
            if (base.empty()) base = ".";
        }
        Json doc;
        if (command == "fit") {
            doc = cmd_fit(config, opt, base);
            if (!opt.out.empty()) write_text(opt.out, doc.dump(2) + "\n");
            out << doc.dump(2) << '\n';
            return kOk;
        }
        if (command == "grid") doc = cmd_grid(config, opt, base);
        else if (command == "select") doc = cmd_select(config, opt, base);
        else if (command == "export-micp") doc = cmd_export_micp(config, opt, base);
        else if (command == "synth") doc = cmd_synth(opt);
        else if (command == "oracle-check") {
            doc = cmd_oracle_check(config, opt);
            if (!opt.out.empty()) write_text(opt.out, doc.dump(2) + "\n");
            out << doc["metrics"]["summary"].get<std::string>() << '\n';
            return doc["metrics"]["matched"] == doc["metrics"]["total"] ? kOk : kOther;
        } else {
            throw ConfigError("unknown command " + command);
        }
        if (command == "select")
            out << "select: " << doc["metrics"]["n"] << " points in " << doc["env"]["select_ms"].get<double>()
                << " ms\n";
        out << doc.dump(2) << '\n';
        return kOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kData;
    } catch (const ProtocolError& e) {
        err << "protocol error: " << e.what() << '\n';
        return kProtocol;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kOther;
    }
}

}  // namespace fairsel::cli
