// Copyright 2026 The qdistill Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <numeric>
#include <ostream>
#include <sstream>

#include "qdistill/error.hpp"
#include "qdistill/log.hpp"
#include "qdistill/noisesim.hpp"
#include "qdistill/parallel.hpp"
#include "qdistill/synthesis.hpp"
#include "qdistill/transpile.hpp"

namespace qdistill::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, sep);)
        if (!item.empty()) parts.push_back(item);
    return parts;
}

int parse_int(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError("bad " + what + " '" + text + "'");
}

template <class T>
std::string join(const std::vector<T>& items, char sep = ',') {
    std::ostringstream os;
    for (std::size_t i = 0; i < items.size(); ++i) os << (i ? std::string(1, sep) : "") << items[i];
    return os.str();
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::vector<std::size_t> all_rows(const Dataset& ds) {
    std::vector<std::size_t> rows(ds.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
}

// One invocation's output directory, artifacts and manifest.
class Run {
   public:
    Run(std::string command, std::vector<std::string> args, const std::string& out_dir, std::string stem,
        std::ostream& out)
        : command_(std::move(command)), args_(std::move(args)), dir_(out_dir), stem_(std::move(stem)), out_(out),
          start_(std::chrono::steady_clock::now()) {
        if (stem_.empty() || stem_.find('/') != std::string::npos) throw UsageError("--name must be a plain file stem");
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw DataError("cannot create output directory '" + dir_.string() + "': " + ec.message());
    }

    const std::string& stem() const { return stem_; }
    json& config() { return config_; }
    std::ostream& out() { return out_; }

    std::string provenance(const std::string& extra = {}) const {
        std::string p = std::string("qdistill ") + kVersion + " " + command_ + " " + config_.dump();
        return extra.empty() ? p : p + " " + extra;
    }

    std::string csv_header(const std::string& columns) const { return "# " + provenance() + "\n" + columns + "\n"; }

    fs::path write(const std::string& filename, const std::string& content) {
        const fs::path path = dir_ / filename;
        std::ofstream f(path, std::ios::binary);
        if (!f || !(f << content) || !f.flush()) throw DataError("cannot write '" + path.string() + "'");
        artifacts_.push_back(filename);
        return path;
    }

    /// Written last so a complete manifest implies complete artifacts.
    void finish(std::uint64_t seed) {
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        for (const auto& a : artifacts_)
            if (!fs::exists(dir_ / a)) throw DataError("artifact '" + a + "' vanished before the manifest was written");
        json m;
        m["format"] = "qdistill-manifest";
        m["version"] = kVersion;
        m["command"] = command_;
        m["args"] = args_;
        m["config"] = config_;
        m["seed"] = seed;
        m["artifacts"] = artifacts_;
        m["wall_time_s"] = wall;
        const fs::path path = dir_ / (stem_ + ".manifest.json");
        std::ofstream f(path, std::ios::binary);
        if (!f || !(f << m.dump(2) << "\n") || !f.flush()) throw DataError("cannot write '" + path.string() + "'");
        out_ << "wrote " << artifacts_.size() << " artifact(s) and " << path.string() << "\n";
    }

   private:
    std::string command_;
    std::vector<std::string> args_;
    fs::path dir_;
    std::string stem_;
    std::ostream& out_;
    std::chrono::steady_clock::time_point start_;
    json config_ = json::object();
    std::vector<std::string> artifacts_;
};

std::string history_csv(const Run& run, const History& h) {
    std::ostringstream os;
    os << run.csv_header("epoch,train_loss,train_accuracy,val_loss,val_accuracy");
    const auto row = [&](const EpochMetrics& e) {
        os << e.epoch << ',' << fmt(e.train_loss) << ',' << fmt(e.train_accuracy) << ',' << fmt(e.val_loss) << ','
           << fmt(e.val_accuracy) << '\n';
    };
    row(h.initial);
    for (const auto& e : h.epochs) row(e);
    return os.str();
}

EpochMetrics measure(const HybridModel& m, const Batch& train_set, const Batch& val_set, int jobs) {
    EpochMetrics e;
    e.train_loss = loss(m, train_set, jobs);
    e.train_accuracy = evaluate(m, train_set, jobs);
    e.val_loss = val_set.size() ? loss(m, val_set, jobs) : 0.0;
    e.val_accuracy = evaluate(m, val_set, jobs);
    return e;
}

int resolve_batch_size(int requested, const DataSpec& spec) {
    if (requested >= 0) return requested;
    return spec.source == "iris" ? 0 : 32;
}

// Loads the dataset a checkpoint was trained on and checks that it still matches.
Dataset checkpoint_dataset(const Checkpoint& ckpt, const std::string& data_override) {
    const DataSpec spec = DataSpec::parse(data_override.empty() ? ckpt.data : data_override);
    Dataset ds = load_dataset(spec, ckpt.data_seed);
    if (static_cast<int>(ds.n_features()) != ckpt.model.scheme.capacity())
        throw DataError("dataset has " + std::to_string(ds.n_features()) + " features but the checkpoint encodes " +
                        std::to_string(ckpt.model.scheme.capacity()));
    const Scaler refit = fit_scaler(ds.features, ds.train);
    for (std::size_t i = 0; i < refit.size(); ++i)
        if (std::abs(refit.min[i] - ckpt.model.scaler.min[i]) > 1e-12 ||
            std::abs(refit.max[i] - ckpt.model.scaler.max[i]) > 1e-12)
            throw DataError("dataset does not match the checkpoint's scaler (feature " + std::to_string(i) + ")");
    return ds;
}

std::string default_out_dir() {
    const char* env = std::getenv("QDISTILL_OUT");
    return env && *env ? env : "qdistill_out";
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over the combined words.
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (a + 1) + 0xBF58476D1CE4E5B9ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------------------

struct Common {
    std::string out = default_out_dir();
    int jobs = default_jobs();
    std::string name;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--out", c.out, "Output directory (default $QDISTILL_OUT or ./qdistill_out)");
    app->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
    app->add_option("--name", c.name, "File stem for this run's artifacts");
}

struct TrainArgs {
    Common common;
    std::string data = "iris";
    std::vector<int> classes;
    int pca = 0;
    std::string encoding = "1:1";
    std::string template_id;
    int layers = 1;
    int epochs = 10;
    std::uint64_t seed = 0;
    double lr = 0.2;
    int batch_size = -1;
};

void cmd_train(const TrainArgs& a, const std::vector<std::string>& args, std::ostream& out) {
    DataSpec spec{a.data, a.classes, a.pca};
    if (spec.source != "iris" && spec.classes.empty()) spec.classes = {0, 1, 2};
    TrainConfig cfg;
    cfg.epochs = a.epochs;
    cfg.learning_rate = a.lr;
    cfg.batch_size = resolve_batch_size(a.batch_size, spec);
    cfg.seed = a.seed;
    cfg.jobs = a.common.jobs;
    cfg.validate();
    if (a.layers < 1) throw UsageError("--layers must be >= 1");

    Run run("train", args, a.common.out,
            a.common.name.empty() ? "train_" + a.template_id + "_" + std::to_string(a.layers) + "L_s" + std::to_string(a.seed)
                                  : a.common.name,
            out);
    auto& c = run.config();
    c["data"] = spec.str();
    c["encoding"] = a.encoding;
    c["template"] = a.template_id;
    c["layers"] = a.layers;
    c["epochs"] = cfg.epochs;
    c["learning_rate"] = cfg.learning_rate;
    c["batch_size"] = cfg.batch_size;
    c["seed"] = a.seed;

    const Dataset ds = load_dataset(spec, a.seed);
    const EncodingMode mode = parse_encoding_mode(a.encoding);
    const int per_qubit = mode == EncodingMode::ONE_PER_QUBIT ? 1 : 2;
    const int f = static_cast<int>(ds.n_features());
    if (f % per_qubit != 0) throw UsageError("2:1 encoding needs an even feature count, got " + std::to_string(f));
    const EncodingScheme scheme{mode, f / per_qubit};

    HybridModel model = make_model(scheme, a.template_id, a.layers, a.seed);
    model.scaler = fit_scaler(ds.features, ds.train);
    const Batch train_set = make_batch(ds, ds.train, model.scaler);
    const Batch val_set = make_batch(ds, ds.val, model.scaler);
    const History h = train(model, train_set, val_set, cfg);

    Checkpoint ckpt{model, h, spec.str(), a.seed, false, "", run.provenance(ds.provenance)};
    run.write(run.stem() + ".ckpt.json", checkpoint_to_json(ckpt));
    run.write(run.stem() + ".history.csv", history_csv(run, h));
    const auto& last = h.epochs.back();
    out << "train: " << a.template_id << " " << a.layers << "L, train acc " << last.train_accuracy << ", val acc "
        << last.val_accuracy << "\n";
    run.finish(a.seed);
}

struct DistillArgs {
    Common common;
    std::string teacher;
    std::string template_id;
    std::vector<int> layers{1};
    int budget = 1000;
    std::vector<std::uint64_t> seeds{0};
};

void cmd_distill(const DistillArgs& a, const std::vector<std::string>& args, std::ostream& out) {
    if (a.layers.empty() || std::any_of(a.layers.begin(), a.layers.end(), [](int l) { return l < 1; }))
        throw UsageError("--layers must list positive layer counts");
    if (a.seeds.empty()) throw UsageError("--seeds must not be empty");
    if (a.budget < 1) throw UsageError("--budget must be positive");
    const Checkpoint teacher = load_checkpoint(a.teacher);

    Run run("distill", args, a.common.out, a.common.name.empty() ? "distill_" + a.template_id : a.common.name, out);
    auto& c = run.config();
    c["teacher"] = a.teacher;
    c["template"] = a.template_id;
    c["layers"] = a.layers;
    c["budget"] = a.budget;
    c["seeds"] = a.seeds;

    const Dataset ds = checkpoint_dataset(teacher, "");
    const Batch train_set = make_batch(ds, ds.train, teacher.model.scaler);
    const Batch val_set = make_batch(ds, ds.val, teacher.model.scaler);

    std::ostringstream per_seed, summary;
    per_seed << run.csv_header("layers,seed,distance,evaluations,converged,best");
    summary << run.csv_header(
        "layers,params,best_distance,median_distance,best_seed,evaluations,approx_train_accuracy,approx_val_accuracy");
    for (int layers : a.layers) {
        const DistillResult r = distill(teacher.model, a.template_id, layers, AnnealConfig{}, a.seeds, a.budget,
                                        a.common.jobs);
        std::vector<double> d;
        for (const auto& s : r.per_seed) {
            d.push_back(s.distance);
            per_seed << layers << ',' << s.seed << ',' << fmt(s.distance) << ',' << s.evaluations << ','
                     << (s.converged ? 1 : 0) << ',' << (s.seed == r.best.seed ? 1 : 0) << '\n';
        }
        std::sort(d.begin(), d.end());
        const double median = d.size() % 2 ? d[d.size() / 2] : 0.5 * (d[d.size() / 2 - 1] + d[d.size() / 2]);

        History h;
        h.initial = measure(r.student, train_set, val_set, a.common.jobs);
        const std::string stem = run.stem() + "_" + std::to_string(layers) + "L";
        Checkpoint ckpt{r.student, h, teacher.data, teacher.data_seed, false, a.teacher, run.provenance()};
        run.write(stem + ".ckpt.json", checkpoint_to_json(ckpt));
        run.write(stem + ".synthesis.json", distill_record_json(a.teacher, a.template_id, layers, a.budget, r));
        summary << layers << ',' << r.student.pqc.n_params() << ',' << fmt(r.best.distance) << ',' << fmt(median) << ','
                << r.best.seed << ',' << r.best.evaluations << ',' << fmt(h.initial.train_accuracy) << ','
                << fmt(h.initial.val_accuracy) << '\n';
        out << "distill: " << a.template_id << " " << layers << "L distance " << r.best.distance << " (median "
            << median << ")\n";
    }
    run.write(run.stem() + ".distance.csv", per_seed.str());
    run.write(run.stem() + ".summary.csv", summary.str());
    run.finish(a.seeds.front());
}

struct FinetuneArgs {
    Common common;
    std::string student;
    std::string data;
    int epochs = 2;
    double lr = 0.2;
    int batch_size = -1;
    std::uint64_t seed = 0;
};

void cmd_finetune(const FinetuneArgs& a, const std::vector<std::string>& args, std::ostream& out) {
    const Checkpoint student = load_checkpoint(a.student);
    TrainConfig cfg;
    cfg.epochs = a.epochs;
    cfg.learning_rate = a.lr;
    cfg.seed = a.seed;
    cfg.jobs = a.common.jobs;
    cfg.batch_size = resolve_batch_size(a.batch_size, DataSpec::parse(a.data.empty() ? student.data : a.data));
    cfg.validate();

    const std::string stem =
        a.common.name.empty() ? fs::path(a.student).filename().string().substr(0, fs::path(a.student).filename().string().find('.')) + "_ft"
                              : a.common.name;
    Run run("finetune", args, a.common.out, stem, out);
    auto& c = run.config();
    c["student"] = a.student;
    c["data"] = a.data.empty() ? student.data : a.data;
    c["epochs"] = cfg.epochs;
    c["learning_rate"] = cfg.learning_rate;
    c["batch_size"] = cfg.batch_size;
    c["seed"] = a.seed;

    const Dataset ds = checkpoint_dataset(student, a.data);
    HybridModel model = student.model;
    const Batch train_set = make_batch(ds, ds.train, model.scaler);
    const Batch val_set = make_batch(ds, ds.val, model.scaler);
    const History h = train(model, train_set, val_set, cfg);
    const EpochMetrics& after = h.epochs.back();

    Checkpoint ckpt{model, h, student.data, student.data_seed, true, a.student, run.provenance()};
    run.write(run.stem() + ".ckpt.json", checkpoint_to_json(ckpt));
    run.write(run.stem() + ".history.csv", history_csv(run, h));
    std::ostringstream report;
    report << run.csv_header("split,approximated,fine_tuned");
    report << "train," << fmt(h.initial.train_accuracy) << ',' << fmt(after.train_accuracy) << '\n';
    report << "val," << fmt(h.initial.val_accuracy) << ',' << fmt(after.val_accuracy) << '\n';
    run.write(run.stem() + ".report.csv", report.str());
    out << "finetune: train " << h.initial.train_accuracy << " -> " << after.train_accuracy << ", val "
        << h.initial.val_accuracy << " -> " << after.val_accuracy << "\n";
    run.finish(a.seed);
}

struct TranspileArgs {
    Common common;
    std::vector<std::string> templates;
    std::vector<std::string> bases;
    int qubits = 4;
    bool merge = false;
    std::uint64_t seed = 0;
};

void cmd_transpile_report(const TranspileArgs& a, const std::vector<std::string>& args, std::ostream& out) {
    const auto templates = a.templates.empty() ? TemplateRegistry::builtin().ids() : a.templates;
    const auto bases = a.bases.empty() ? RuleRegistry::builtin().basis_ids() : a.bases;
    Run run("transpile-report", args, a.common.out, a.common.name.empty() ? "overhead" : a.common.name, out);
    auto& c = run.config();
    c["templates"] = templates;
    c["bases"] = bases;
    c["qubits"] = a.qubits;
    c["layers"] = 1;
    c["merge_rotations"] = a.merge;
    c["seed"] = a.seed;
    const auto rows = overhead_table(templates, bases, a.qubits, OverheadOptions{a.merge, a.seed});
    run.write(run.stem() + ".csv", overhead_csv(rows, run.provenance()));
    out << "transpile-report: " << rows.size() << " rows\n";
    run.finish(a.seed);
}

DeviceProfile resolve_profile(const std::string& name) {
    if (name == "melbourne") return DeviceProfile::melbourne();
    if (name == "almaden") return DeviceProfile::almaden();
    if (name == "noiseless") return DeviceProfile::noiseless();
    return load_profile(name);
}

struct NoiseArgs {
    Common common;
    std::vector<std::string> checkpoints;
    std::vector<std::string> profiles{"melbourne"};
    std::vector<std::string> splits{"train", "val"};
};

void cmd_noise_eval(const NoiseArgs& a, const std::vector<std::string>& args, std::ostream& out) {
    for (const auto& s : a.splits)
        if (s != "train" && s != "val" && s != "all") throw UsageError("unknown split '" + s + "' (train, val, all)");
    std::vector<DeviceProfile> profiles;
    for (const auto& p : a.profiles) profiles.push_back(resolve_profile(p));

    Run run("noise-eval", args, a.common.out, a.common.name.empty() ? "noise_eval" : a.common.name, out);
    auto& c = run.config();
    c["checkpoints"] = a.checkpoints;
    c["profiles"] = json::array();
    for (const auto& p : profiles) c["profiles"].push_back(json::parse(profile_to_json(p)));
    c["splits"] = a.splits;

    std::ostringstream csv;
    csv << run.csv_header("checkpoint,profile,split,samples,ideal_accuracy,noisy_accuracy");
    for (const auto& path : a.checkpoints) {
        const Checkpoint ckpt = load_checkpoint(path);
        const Dataset ds = checkpoint_dataset(ckpt, "");
        for (const auto& profile : profiles) {
            const NoiseModel noise(profile);
            const NoisyEvaluator evaluator(ckpt.model, noise);
            for (const auto& split : a.splits) {
                const auto rows = split == "train" ? ds.train : split == "val" ? ds.val : all_rows(ds);
                const Batch batch = make_batch(ds, rows, ckpt.model.scaler);
                const double ideal = evaluate(ckpt.model, batch, a.common.jobs);
                const double noisy = evaluate(ckpt.model, batch, a.common.jobs, evaluator.backend());
                csv << path << ',' << profile.name << ',' << split << ',' << batch.size() << ',' << fmt(ideal) << ','
                    << fmt(noisy) << '\n';
                out << "noise-eval: " << path << " " << profile.name << " " << split << " ideal " << ideal
                    << " noisy " << noisy << "\n";
            }
        }
    }
    run.write(run.stem() + ".csv", csv.str());
    run.finish(0);
}

struct FidelityArgs {
    Common common;
    std::string template_id = "c2";
    int deep = 6;
    int shallow = 4;
    std::vector<int> qubits{2, 3, 4, 5, 6};
    int instances = 40;
    int budget = 1000;
    std::uint64_t seed = 0;
};

void cmd_fidelity_sweep(const FidelityArgs& a, const std::vector<std::string>& args, std::ostream& out) {
    if (a.instances < 1 || a.budget < 1 || a.deep < 1 || a.shallow < 1)
        throw UsageError("--instances, --budget and layer counts must be positive");
    Run run("fidelity-sweep", args, a.common.out, a.common.name.empty() ? "fidelity" : a.common.name, out);
    auto& c = run.config();
    c["template"] = a.template_id;
    c["deep_layers"] = a.deep;
    c["shallow_layers"] = a.shallow;
    c["qubits"] = a.qubits;
    c["instances"] = a.instances;
    c["budget"] = a.budget;
    c["seed"] = a.seed;

    std::ostringstream summary, detail;
    summary << run.csv_header("qubits,instances,mean_fidelity,stddev_fidelity,mean_distance");
    detail << run.csv_header("qubits,instance,seed,fidelity,distance,evaluations");
    for (int n : a.qubits) {
        if (n < 1) throw UsageError("--qubits entries must be positive");
        std::vector<FidelityInstance> res(static_cast<std::size_t>(a.instances));
        std::vector<std::uint64_t> seeds(res.size());
        for (std::size_t i = 0; i < res.size(); ++i) seeds[i] = mix_seed(a.seed, static_cast<std::uint64_t>(n), i);
        parallel_for(res.size(), a.common.jobs, [&](std::size_t i) {
            res[i] = fidelity_instance(a.template_id, n, a.deep, a.shallow, a.budget, seeds[i]);
        });
        double mean = 0.0, mean_d = 0.0;
        for (const auto& r : res) mean += r.fidelity / res.size(), mean_d += r.distance / res.size();
        double var = 0.0;
        for (const auto& r : res) var += (r.fidelity - mean) * (r.fidelity - mean);
        const double sd = res.size() > 1 ? std::sqrt(var / (res.size() - 1)) : 0.0;
        for (std::size_t i = 0; i < res.size(); ++i)
            detail << n << ',' << i << ',' << seeds[i] << ',' << fmt(res[i].fidelity) << ',' << fmt(res[i].distance)
                   << ',' << res[i].evaluations << '\n';
        summary << n << ',' << res.size() << ',' << fmt(mean) << ',' << fmt(sd) << ',' << fmt(mean_d) << '\n';
        out << "fidelity-sweep: " << n << " qubits mean fidelity " << mean << " (sd " << sd << ")\n";
    }
    run.write(run.stem() + ".csv", summary.str());
    run.write(run.stem() + ".instances.csv", detail.str());
    run.finish(a.seed);
}

std::vector<std::string> strip_out(const std::vector<std::string>& args) {
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--out") {
            ++i;
            continue;
        }
        if (args[i].rfind("--out=", 0) == 0) continue;
        kept.push_back(args[i]);
    }
    return kept;
}

std::vector<std::string> rerun_args(const std::string& manifest_path, const std::string& out_dir) {
    std::ifstream in(manifest_path);
    if (!in) throw DataError("cannot open manifest '" + manifest_path + "'");
    json m;
    try {
        m = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("manifest '" + manifest_path + "': " + e.what());
    }
    if (m.value("format", "") != "qdistill-manifest" || !m.contains("args") || !m["args"].is_array())
        throw DataError("'" + manifest_path + "' is not a qdistill manifest");
    auto args = m["args"].get<std::vector<std::string>>();
    if (args.empty() || args.front() == "rerun") throw DataError("manifest has no rerunnable command");
    args.push_back("--out");
    args.push_back(out_dir.empty() ? fs::path(manifest_path).parent_path().string() : out_dir);
    if (args.back().empty()) args.back() = ".";
    return args;
}

}  // namespace

// ---------------------------------------------------------------------------------------

DataSpec DataSpec::parse(const std::string& text) {
    DataSpec s;
    const auto q = text.find('?');
    s.source = text.substr(0, q);
    if (s.source.empty()) throw UsageError("empty data source");
    if (q == std::string::npos) return s;
    for (const auto& kv : split(text.substr(q + 1), '&')) {
        const auto eq = kv.find('=');
        const std::string key = kv.substr(0, eq), value = eq == std::string::npos ? "" : kv.substr(eq + 1);
        if (key == "classes") {
            for (const auto& v : split(value, ',')) s.classes.push_back(parse_int(v, "class"));
        } else if (key == "pca") {
            s.pca = parse_int(value, "pca");
        } else {
            throw UsageError("unknown data option '" + key + "'");
        }
    }
    return s;
}

std::string DataSpec::str() const {
    std::string s = source;
    std::vector<std::string> opts;
    if (!classes.empty()) opts.push_back("classes=" + join(classes));
    if (pca > 0) opts.push_back("pca=" + std::to_string(pca));
    if (!opts.empty()) s += "?" + join(opts, '&');
    return s;
}

Dataset load_dataset(const DataSpec& spec, std::uint64_t seed) {
    if (spec.pca < 0) throw UsageError("pca must be >= 0");
    Dataset ds;
    if (spec.source == "iris") {
        if (!spec.classes.empty()) throw UsageError("class selection applies to CSV sources only");
        ds = load_iris(seed);
    } else {
        const auto classes = spec.classes.empty() ? std::vector<int>{0, 1, 2} : spec.classes;
        if (classes.size() != 3) throw UsageError("exactly three classes are required");
        ds = load_features_csv(spec.source, {classes[0], classes[1], classes[2]}, seed);
    }
    if (spec.pca > 0) {
        if (static_cast<std::size_t>(spec.pca) > ds.n_features())
            throw UsageError("pca " + std::to_string(spec.pca) + " exceeds feature count " +
                             std::to_string(ds.n_features()));
        PcaModel pca;
        ds.features = pca_reduce(ds.features, static_cast<std::size_t>(spec.pca), &pca, ds.train);
        ds.provenance += "; pca k=" + std::to_string(spec.pca) + " retained " + fmt(pca.retained_variance);
    }
    return ds;
}

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quantum neural network compression by approximate synthesis", "qdistill"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    TrainArgs train_a;
    auto* train_cmd = app.add_subcommand("train", "Train a hybrid model");
    add_common(train_cmd, train_a.common);
    train_cmd->add_option("--data", train_a.data, "'iris' or a feature CSV path");
    train_cmd->add_option("--classes", train_a.classes, "Three class labels to keep (CSV sources)")->delimiter(',');
    train_cmd->add_option("--pca", train_a.pca, "Reduce features to k principal components");
    train_cmd->add_option("--encoding", train_a.encoding, "Features per qubit")->check(CLI::IsMember({"1:1", "2:1"}));
    train_cmd->add_option("--template", train_a.template_id, "PQC template id")->required();
    train_cmd->add_option("--layers", train_a.layers, "PQC layers");
    train_cmd->add_option("--epochs", train_a.epochs, "Training epochs");
    train_cmd->add_option("--seed", train_a.seed, "Seed for split, init and shuffling");
    train_cmd->add_option("--lr", train_a.lr, "Adam learning rate");
    train_cmd->add_option("--batch-size", train_a.batch_size, "0 = full batch; default full for iris, 32 otherwise");

    DistillArgs distill_a;
    auto* distill_cmd = app.add_subcommand("distill", "Synthesize a student PQC from a teacher checkpoint");
    add_common(distill_cmd, distill_a.common);
    distill_cmd->add_option("--teacher", distill_a.teacher, "Teacher checkpoint")->required();
    distill_cmd->add_option("--template", distill_a.template_id, "Student template id")->required();
    distill_cmd->add_option("--layers", distill_a.layers, "Student layer counts, e.g. 1,2,4,8")->delimiter(',');
    distill_cmd->add_option("--budget", distill_a.budget, "Objective evaluations per seed");
    distill_cmd->add_option("--seeds,--seed", distill_a.seeds, "Annealing seeds")->delimiter(',');

    FinetuneArgs finetune_a;
    auto* finetune_cmd = app.add_subcommand("finetune", "Resume training of a distilled student");
    add_common(finetune_cmd, finetune_a.common);
    finetune_cmd->add_option("--student", finetune_a.student, "Student checkpoint")->required();
    finetune_cmd->add_option("--data", finetune_a.data, "Override the checkpoint's data source");
    finetune_cmd->add_option("--epochs", finetune_a.epochs, "Fine-tuning epochs");
    finetune_cmd->add_option("--lr", finetune_a.lr, "Adam learning rate");
    finetune_cmd->add_option("--batch-size", finetune_a.batch_size, "0 = full batch");
    finetune_cmd->add_option("--seed", finetune_a.seed, "Shuffling seed");

    TranspileArgs transpile_a;
    auto* transpile_cmd = app.add_subcommand("transpile-report", "Depth and gate counts per template and basis");
    add_common(transpile_cmd, transpile_a.common);
    transpile_cmd->add_option("--template,--templates", transpile_a.templates, "Template ids (default all)")
        ->delimiter(',');
    transpile_cmd->add_option("--basis,--bases", transpile_a.bases, "Basis ids (default all)")->delimiter(',');
    transpile_cmd->add_option("--qubits", transpile_a.qubits, "Qubit count")->check(CLI::PositiveNumber);
    transpile_cmd->add_flag("--merge-rotations", transpile_a.merge, "Fuse adjacent single-qubit rotations");
    transpile_cmd->add_option("--seed", transpile_a.seed, "Seed of the binding used for merging");

    NoiseArgs noise_a;
    auto* noise_cmd = app.add_subcommand("noise-eval", "Accuracy of checkpoints under device noise");
    add_common(noise_cmd, noise_a.common);
    noise_cmd->add_option("--checkpoint,--checkpoints", noise_a.checkpoints, "Checkpoints to evaluate")
        ->required()
        ->delimiter(',');
    noise_cmd->add_option("--profile,--profiles", noise_a.profiles, "melbourne, almaden, noiseless or JSON path")
        ->delimiter(',');
    noise_cmd->add_option("--splits", noise_a.splits, "train, val, all")->delimiter(',');

    FidelityArgs fid_a;
    auto* fid_cmd = app.add_subcommand("fidelity-sweep", "State fidelity of shallow approximations vs qubit count");
    add_common(fid_cmd, fid_a.common);
    fid_cmd->add_option("--template", fid_a.template_id, "Template id");
    fid_cmd->add_option("--deep-layers", fid_a.deep, "Layers of the random circuit");
    fid_cmd->add_option("--shallow-layers,--layers", fid_a.shallow, "Layers of the approximation");
    fid_cmd->add_option("--qubits", fid_a.qubits, "Qubit counts, e.g. 2,3,4,5,6")->delimiter(',');
    fid_cmd->add_option("--instances", fid_a.instances, "Random instances per size");
    fid_cmd->add_option("--budget", fid_a.budget, "Objective evaluations per instance");
    fid_cmd->add_option("--seed", fid_a.seed, "Base seed");

    std::string manifest, rerun_out;
    auto* rerun_cmd = app.add_subcommand("rerun", "Repeat a run from its manifest");
    rerun_cmd->add_option("--manifest", manifest, "Manifest JSON")->required();
    rerun_cmd->add_option("--out", rerun_out, "Output directory (default: the manifest's directory)");

    // CLI11 consumes arguments back to front.
    std::vector<std::string> reversed(args_in.rbegin(), args_in.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    set_warning_sink([&err](std::string_view msg) { err << "warning: " << msg << "\n"; });
    struct SinkReset {
        ~SinkReset() { set_warning_sink({}); }
    } reset;

    const auto recorded = strip_out(args_in);
    try {
        if (*train_cmd) cmd_train(train_a, recorded, out);
        else if (*distill_cmd) cmd_distill(distill_a, recorded, out);
        else if (*finetune_cmd) cmd_finetune(finetune_a, recorded, out);
        else if (*transpile_cmd) cmd_transpile_report(transpile_a, recorded, out);
        else if (*noise_cmd) cmd_noise_eval(noise_a, recorded, out);
        else if (*fid_cmd) cmd_fidelity_sweep(fid_a, recorded, out);
        else if (*rerun_cmd) return run(rerun_args(manifest, rerun_out), out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return kData;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kNumerical;
    }
    return kOk;
}

}  // namespace qdistill::cli
