#include "openpixel/experiment.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "openpixel/plot.hpp"
#include "openpixel/png_io.hpp"

namespace openpixel {

namespace fs = std::filesystem;
using nlohmann::json;

const char* context_name(Context c) {
    switch (c) {
        case Context::closed_closed: return "closed_closed";
        case Context::closed_open: return "closed_open";
        case Context::open_open: return "open_open";
        case Context::open_morph: return "open_morph";
    }
    throw std::logic_error("unreachable context");
}

Context context_from_name(const std::string& name) {
    if (name == "closed_closed") return Context::closed_closed;
    if (name == "closed_open") return Context::closed_open;
    if (name == "open_open") return Context::open_open;
    if (name == "open_morph") return Context::open_morph;
    throw std::invalid_argument("unknown context '" + name +
                                "' (closed_closed, closed_open, open_open, open_morph)");
}

void ExperimentConfig::validate() const {
    if (data_root.empty()) throw std::invalid_argument("experiment: data root is required");
    if (out_dir.empty()) throw std::invalid_argument("experiment: output directory is required");
    if (contexts.empty()) throw std::invalid_argument("experiment: at least one context required");
    train.validate();
    openset.validate();
    if (split != "auto" && split != "vaihingen" && split != "fraction")
        throw std::invalid_argument("experiment: split must be auto, vaihingen, or fraction");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw std::invalid_argument("experiment: test fraction must be in (0, 1)");
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw std::invalid_argument("experiment: validation fraction must be in (0, 1)");
    for (double tau : tau_grid)
        if (!(tau >= 0.0 && tau <= 1.0))
            throw std::invalid_argument("experiment: tau grid value outside [0, 1]");

    const bool has_closed_closed =
        std::find(contexts.begin(), contexts.end(), Context::closed_closed) != contexts.end();
    const bool has_open = std::any_of(contexts.begin(), contexts.end(),
                                      [](Context c) { return c != Context::closed_closed; });
    if (unknown.empty()) {
        if (has_open)
            throw std::invalid_argument(
                "experiment: open-set contexts need a held-out class (--unknown)");
    } else {
        if (has_closed_closed)
            throw std::invalid_argument(
                "experiment: context closed_closed is inconsistent with a held-out class '" +
                unknown + "' (it trains and evaluates on every class)");
    }
}

std::string ExperimentConfig::resolved_palette_path() const {
    if (!palette_path.empty()) return palette_path;
    return (fs::path(data_root) / "palette.txt").string();
}

std::vector<double> ExperimentConfig::resolved_grid() const {
    if (!tau_grid.empty()) return tau_grid;
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(static_cast<double>(i) / 20.0);
    return grid;
}

namespace {

json config_to_json(const ExperimentConfig& cfg) {
    json contexts = json::array();
    for (Context c : cfg.contexts) contexts.push_back(context_name(c));
    return json{{"name", cfg.name},
                {"data_root", cfg.data_root},
                {"palette_path", cfg.palette_path},
                {"unknown", cfg.unknown},
                {"contexts", contexts},
                {"train",
                 {{"learning_rate", cfg.train.learning_rate},
                  {"momentum", cfg.train.momentum},
                  {"batch_size", cfg.train.batch_size},
                  {"epochs", cfg.train.epochs},
                  {"patches_per_class", cfg.train.patches_per_class},
                  {"precision", precision_name(cfg.train.precision)}}},
                {"openset",
                 {{"tau", cfg.openset.tau},
                  {"window", cfg.openset.window},
                  {"accept_at_equality", cfg.openset.accept_at_equality}}},
                {"sweep", cfg.sweep},
                {"tau_grid", cfg.tau_grid},
                {"split", cfg.split},
                {"test_fraction", cfg.test_fraction},
                {"val_fraction", cfg.val_fraction},
                {"out_dir", cfg.out_dir},
                {"checkpoint_cache", cfg.checkpoint_cache},
                {"seed", cfg.seed},
                {"threads", cfg.threads},
                {"predict_block", cfg.predict_block},
                {"save_probmaps", cfg.save_probmaps}};
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    cfg.name = j.value("name", cfg.name);
    cfg.data_root = j.value("data_root", std::string());
    cfg.palette_path = j.value("palette_path", std::string());
    cfg.unknown = j.value("unknown", std::string());
    if (j.contains("contexts")) {
        cfg.contexts.clear();
        for (const auto& c : j.at("contexts"))
            cfg.contexts.push_back(context_from_name(c.get<std::string>()));
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
        cfg.train.momentum = t.value("momentum", cfg.train.momentum);
        cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
        cfg.train.epochs = t.value("epochs", cfg.train.epochs);
        cfg.train.patches_per_class = t.value("patches_per_class", cfg.train.patches_per_class);
        cfg.train.precision =
            precision_from_name(t.value("precision", std::string(precision_name(cfg.train.precision))));
    }
    if (j.contains("openset")) {
        const auto& o = j.at("openset");
        cfg.openset.tau = o.value("tau", cfg.openset.tau);
        cfg.openset.window = o.value("window", cfg.openset.window);
        cfg.openset.accept_at_equality =
            o.value("accept_at_equality", cfg.openset.accept_at_equality);
    }
    cfg.sweep = j.value("sweep", cfg.sweep);
    cfg.tau_grid = j.value("tau_grid", cfg.tau_grid);
    cfg.split = j.value("split", cfg.split);
    cfg.test_fraction = j.value("test_fraction", cfg.test_fraction);
    cfg.val_fraction = j.value("val_fraction", cfg.val_fraction);
    cfg.out_dir = j.value("out_dir", std::string());
    cfg.checkpoint_cache = j.value("checkpoint_cache", std::string());
    cfg.seed = j.value("seed", cfg.seed);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.predict_block = j.value("predict_block", cfg.predict_block);
    cfg.save_probmaps = j.value("save_probmaps", cfg.save_probmaps);
    cfg.train.seed = cfg.seed;
    return cfg;
}

}  // namespace

void save_manifest(const ExperimentConfig& cfg, const Palette& palette, const std::string& path) {
    json pal = json::array();
    for (const auto& e : palette.entries)
        pal.push_back(json::array({e.r, e.g, e.b, e.name}));
    const json j{{"format", 1}, {"config", config_to_json(cfg)}, {"palette", pal}};
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os << j.dump(2) << "\n";
    if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

ExperimentConfig load_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open manifest '" + path + "'");
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("manifest '" + path + "' is not valid JSON: " + e.what());
    }
    if (j.value("format", 0) != 1)
        throw std::runtime_error("manifest '" + path + "' has unsupported format");
    return config_from_json(j.at("config"));
}

namespace {

Palette palette_from_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open manifest '" + path + "'");
    json j;
    is >> j;
    Palette p;
    for (const auto& e : j.at("palette"))
        p.entries.push_back({e.at(0).get<uint8_t>(), e.at(1).get<uint8_t>(),
                             e.at(2).get<uint8_t>(), e.at(3).get<std::string>()});
    if (p.entries.empty()) throw std::runtime_error("manifest '" + path + "' has no palette");
    return p;
}

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex16(uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct Splits {
    std::vector<std::string> fit;   // training minus validation
    std::vector<std::string> val;
    std::vector<std::string> test;
};

Splits make_splits(const ExperimentConfig& cfg, std::vector<std::string> ids) {
    std::string mode = cfg.split;
    if (mode == "auto") {
        std::set<int64_t> numbers;
        for (const auto& id : ids) {
            int64_t end = static_cast<int64_t>(id.size());
            while (end > 0 && !std::isdigit(static_cast<unsigned char>(id[end - 1]))) --end;
            int64_t begin = end;
            while (begin > 0 && std::isdigit(static_cast<unsigned char>(id[begin - 1]))) --begin;
            if (begin != end) numbers.insert(std::stoll(id.substr(begin, end - begin)));
        }
        const bool vaihingen = numbers.count(11) && numbers.count(15) && numbers.count(28) &&
                               numbers.count(30) && numbers.count(34);
        mode = vaihingen ? "vaihingen" : "fraction";
    }
    std::pair<std::vector<std::string>, std::vector<std::string>> tt =
        mode == "vaihingen" ? split_vaihingen(std::move(ids))
                            : split_fraction(std::move(ids), cfg.test_fraction, cfg.seed + 1);
    Splits s;
    s.test = std::move(tt.second);
    auto fv = hold_out_validation(std::move(tt.first), cfg.val_fraction, cfg.seed + 2);
    s.fit = std::move(fv.first);
    s.val = std::move(fv.second);
    return s;
}

void write_train_report_csv(const TrainReport& report, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os << "epoch,mean_loss,accuracy,seconds\n";
    for (size_t i = 0; i < report.epochs.size(); ++i)
        os << (i + 1) << "," << fmt6(report.epochs[i].mean_loss) << ","
           << fmt6(report.epochs[i].accuracy) << "," << fmt6(report.epochs[i].seconds) << "\n";
}

template <typename T>
struct TrainedModel {
    NetworkParams<T> params;
    double seconds = 0.0;
    bool trained = false;
};

template <typename T>
TrainedModel<T> train_or_load(const ExperimentConfig& cfg, const ClassScheme& scheme,
                              const std::vector<LabeledTile>& fit_tiles,
                              const fs::path& checkpoint_path, const fs::path& report_path,
                              std::ostream* log) {
    TrainedModel<T> model;
    if (fs::exists(checkpoint_path)) {
        if (log) *log << "[model] loading checkpoint " << checkpoint_path.string() << "\n";
        auto loaded = load_checkpoint(checkpoint_path.string(), scheme.n_known());
        if (!std::holds_alternative<NetworkParams<T>>(loaded))
            throw std::runtime_error("checkpoint '" + checkpoint_path.string() +
                                     "' was saved at a different precision than the run requests");
        model.params = std::move(std::get<NetworkParams<T>>(loaded));
        return model;
    }

    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    if (log)
        *log << "[model] training " << scheme.n_known() << "-class network: epochs=" << tc.epochs
             << " quota=" << tc.patches_per_class << " batch=" << tc.batch_size
             << " lr=" << tc.learning_rate << " momentum=" << tc.momentum << " seed=" << tc.seed
             << "\n";
    const auto t0 = std::chrono::steady_clock::now();
    auto patches = extract_training_patches(fit_tiles, scheme, tc.patches_per_class, cfg.seed + 3);
    model.params = init_network<T>(scheme.n_known(), cfg.seed + 4);
    TrainReport report = train(model.params, patches, tc);
    model.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    model.trained = true;
    if (log) {
        for (size_t e = 0; e < report.epochs.size(); ++e)
            *log << "[train] epoch " << (e + 1) << "/" << report.epochs.size() << " loss "
                 << fmt6(report.epochs[e].mean_loss) << " acc " << fmt6(report.epochs[e].accuracy)
                 << " (" << fmt6(report.epochs[e].seconds) << "s)\n";
    }
    fs::create_directories(checkpoint_path.parent_path());
    save_checkpoint(model.params, checkpoint_path.string());
    write_train_report_csv(report, report_path.string());
    return model;
}

template <typename T>
std::vector<ProbabilityMap> predict_tiles(const NetworkParams<T>& params,
                                          const std::vector<LabeledTile>& tiles,
                                          const ExperimentConfig& cfg, const char* what,
                                          std::ostream* log) {
    PredictOptions opts;
    opts.threads = cfg.threads;
    opts.fc_block = cfg.predict_block;
    std::vector<ProbabilityMap> maps;
    maps.reserve(tiles.size());
    for (const auto& tile : tiles) {
        const auto t0 = std::chrono::steady_clock::now();
        maps.push_back(predict_image(params, tile.image, opts));
        if (log)
            *log << "[predict] " << what << " tile " << tile.id << " ("
                 << fmt6(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                             .count())
                 << "s)\n";
    }
    return maps;
}

std::vector<LabeledTile> load_tiles(const std::string& root, const std::vector<std::string>& ids,
                                    const Palette& palette) {
    std::vector<LabeledTile> tiles;
    tiles.reserve(ids.size());
    for (const auto& id : ids) tiles.push_back(load_tile_by_id(root, id, palette));
    return tiles;
}

}  // namespace

void write_metrics_csv(const std::vector<ContextMetrics>& rows, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os << "experiment,unknown_class,context,tau,oa,na,kappa\n";
    for (const auto& r : rows)
        os << r.experiment << "," << r.unknown_class << "," << context_name(r.context) << ","
           << fmt6(r.tau) << "," << fmt6(r.oa) << "," << fmt6(r.na) << "," << fmt6(r.kappa)
           << "\n";
    if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

RunResult run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
    cfg.validate();
    if (cfg.unknown == "all")
        throw std::invalid_argument("run_experiment: unknown='all' is handled by run_rotation");

    const Palette palette = Palette::load(cfg.resolved_palette_path());
    const auto class_names = palette.class_names();
    ClassScheme scheme = cfg.unknown.empty() ? make_closed_scheme(class_names)
                                             : make_loco_scheme(class_names, cfg.unknown);

    const Splits splits = make_splits(cfg, list_tile_ids(cfg.data_root));
    if (log) {
        *log << "[run] " << cfg.name << ": unknown="
             << (cfg.unknown.empty() ? "(none)" : cfg.unknown) << " seed=" << cfg.seed
             << " contexts=";
        for (size_t i = 0; i < cfg.contexts.size(); ++i)
            *log << (i ? "," : "") << context_name(cfg.contexts[i]);
        *log << "\n[split] train=" << splits.fit.size() << " val=" << splits.val.size()
             << " test=" << splits.test.size() << "\n";
    }

    const fs::path out(cfg.out_dir);
    fs::create_directories(out);
    fs::create_directories(out / "predictions");
    save_manifest(cfg, palette, (out / "manifest.json").string());

    const std::vector<LabeledTile> fit_tiles = load_tiles(cfg.data_root, splits.fit, palette);
    const std::vector<LabeledTile> val_tiles = load_tiles(cfg.data_root, splits.val, palette);
    const std::vector<LabeledTile> test_tiles = load_tiles(cfg.data_root, splits.test, palette);

    // One model per (known set, training tiles, hyperparameters, seed).
    std::string key;
    for (int64_t c = 0; c < scheme.n_known(); ++c)
        key += class_names[scheme.training_to_dataset(static_cast<uint8_t>(c))] + "|";
    key += "#" + std::to_string(cfg.seed) + "#" + std::to_string(cfg.train.learning_rate) + "#" +
           std::to_string(cfg.train.momentum) + "#" + std::to_string(cfg.train.batch_size) + "#" +
           std::to_string(cfg.train.epochs) + "#" + std::to_string(cfg.train.patches_per_class) +
           "#" + precision_name(cfg.train.precision);
    for (const auto& id : splits.fit) key += "#" + id;
    const fs::path cache_dir =
        cfg.checkpoint_cache.empty() ? out / "checkpoints" : fs::path(cfg.checkpoint_cache);
    const fs::path checkpoint_path = cache_dir / ("model_" + hex16(fnv1a(key)) + ".bin");

    RunResult result;
    result.bundle = out;
    result.scheme = scheme;
    result.checkpoint = checkpoint_path;

    const bool needs_sweep =
        cfg.sweep && std::any_of(cfg.contexts.begin(), cfg.contexts.end(), [](Context c) {
            return c == Context::open_open || c == Context::open_morph;
        });

    auto pipeline = [&](auto tag) {
        using T = decltype(tag);
        TrainedModel<T> model =
            train_or_load<T>(cfg, scheme, fit_tiles, checkpoint_path,
                             out / "train_report.csv", log);
        result.train_seconds = model.seconds;
        result.trained_this_run = model.trained;

        double tau_star = cfg.openset.tau;
        if (needs_sweep) {
            const auto val_probs = predict_tiles(model.params, val_tiles, cfg, "validation", log);
            std::vector<SweepSample> samples;
            for (size_t i = 0; i < val_tiles.size(); ++i)
                samples.push_back({&val_probs[i], &val_tiles[i].labels});
            const SweepCurve curve = sweep_thresholds(samples, scheme, cfg.resolved_grid(),
                                                      cfg.openset.accept_at_equality);
            write_sweep_csv(curve, (out / "sweep.csv").string());
            tau_star = select_threshold(curve);
            if (log) *log << "[sweep] selected tau=" << fmt6(tau_star) << "\n";
        }

        const auto test_probs = predict_tiles(model.params, test_tiles, cfg, "test", log);
        if (cfg.save_probmaps) {
            fs::create_directories(out / "probmaps");
            for (size_t i = 0; i < test_tiles.size(); ++i)
                save_probability_map(test_probs[i],
                                     (out / "probmaps" / (test_tiles[i].id + ".opxp")).string());
        }

        std::vector<ContextMetrics> rows;
        for (Context ctx : cfg.contexts) {
            const bool open = ctx == Context::open_open || ctx == Context::open_morph;
            const double tau = open ? tau_star : 0.0;
            ConfusionMatrix cm(scheme.n_known());
            for (size_t i = 0; i < test_tiles.size(); ++i) {
                PredictionMap pred =
                    threshold_reject(test_probs[i], tau, cfg.openset.accept_at_equality);
                if (ctx == Context::open_morph) pred = morph_filter(pred, cfg.openset.window);
                ImageU8 gray(pred.h, pred.w, 1);
                std::copy(pred.labels.begin(), pred.labels.end(), gray.data.begin());
                write_png_gray8(gray, (out / "predictions" /
                                       (test_tiles[i].id + "_" + context_name(ctx) + ".png"))
                                          .string());
                cm += accumulate(pred, test_tiles[i].labels, scheme);
            }
            write_confusion_csv(cm, scheme,
                                (out / ("confusion_" + std::string(context_name(ctx)) + ".csv"))
                                    .string());
            ContextMetrics m;
            m.experiment = cfg.name;
            m.unknown_class = scheme.unknown_name();
            m.context = ctx;
            m.tau = tau;
            m.oa = overall_accuracy(cm);
            m.na = normalized_accuracy(cm);
            m.kappa = cohen_kappa(cm);
            if (log)
                *log << "[metrics] " << context_name(ctx) << " tau=" << fmt6(m.tau)
                     << " oa=" << fmt6(m.oa) << " na=" << fmt6(m.na)
                     << " kappa=" << fmt6(m.kappa) << "\n";
            rows.push_back(m);
            result.contexts.push_back({m, std::move(cm)});
        }
        write_metrics_csv(rows, (out / "metrics.csv").string());
    };

    if (cfg.train.precision == Precision::f32)
        pipeline(float{});
    else
        pipeline(double{});
    return result;
}

RotationResultBundle run_rotation(const ExperimentConfig& cfg, std::ostream* log) {
    cfg.validate();
    if (cfg.unknown != "all")
        throw std::invalid_argument("run_rotation: set unknown='all' (got '" + cfg.unknown + "')");

    const Palette palette = Palette::load(cfg.resolved_palette_path());
    const auto class_names = palette.class_names();

    RotationResultBundle bundle;
    bundle.bundle = fs::path(cfg.out_dir);
    fs::create_directories(bundle.bundle);
    save_manifest(cfg, palette, (bundle.bundle / "manifest.json").string());
    const std::string cache = cfg.checkpoint_cache.empty()
                                  ? (bundle.bundle / "checkpoints").string()
                                  : cfg.checkpoint_cache;

    std::map<Context, std::vector<RotationExperiment>> per_context;
    for (const auto& unknown : class_names) {
        ExperimentConfig sub = cfg;
        sub.unknown = unknown;
        sub.name = cfg.name + "_" + unknown;
        sub.out_dir = (bundle.bundle / ("rot_" + unknown)).string();
        sub.checkpoint_cache = cache;
        try {
            RunResult res = run_experiment(sub, log);
            for (auto& ctx : res.contexts) {
                bundle.rows.push_back(ctx.metrics);
                per_context[ctx.metrics.context].push_back(
                    {unknown, res.scheme, ctx.cm});
            }
            bundle.train_seconds += res.train_seconds;
            bundle.runs.push_back(std::move(res));
        } catch (const std::exception& e) {
            throw std::runtime_error("rotation with unknown class '" + unknown +
                                     "' failed: " + e.what());
        }
    }

    write_metrics_csv(bundle.rows, (bundle.bundle / "metrics.csv").string());
    for (const auto& [ctx, experiments] : per_context)
        write_error_rate_csv(per_class_error_rates(experiments),
                             (bundle.bundle /
                              ("error_rates_" + std::string(context_name(ctx)) + ".csv"))
                                 .string());
    return bundle;
}

namespace {

std::vector<fs::path> render_one_bundle(const fs::path& bundle, const fs::path& out) {
    const fs::path manifest = bundle / "manifest.json";
    if (!fs::exists(manifest))
        throw std::runtime_error("bundle '" + bundle.string() + "' has no manifest.json");
    const ExperimentConfig cfg = load_manifest(manifest.string());
    const Palette palette = palette_from_manifest(manifest.string());

    std::vector<fs::path> written;
    const fs::path pred_dir = bundle / "predictions";
    if (fs::is_directory(pred_dir)) {
        ClassScheme scheme = cfg.unknown.empty() || cfg.unknown == "all"
                                 ? make_closed_scheme(palette.class_names())
                                 : make_loco_scheme(palette.class_names(), cfg.unknown);
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(pred_dir))
            if (entry.path().extension() == ".png") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            const ImageU8 ids = read_png(file.string());
            if (ids.c != 1)
                throw std::runtime_error("prediction map '" + file.string() +
                                         "' is not a single-channel id map");
            ImageU8 rgb(ids.h, ids.w, 3);
            for (int64_t i = 0; i < ids.h * ids.w; ++i) {
                const uint8_t id = ids.data[static_cast<size_t>(i)];
                uint8_t r, g, b;
                if (id == kUnknownLabel) {
                    r = 255; g = 0; b = 0;  // rejected pixels render red
                } else if (id == kIgnoreLabel) {
                    r = g = b = 0;
                } else if (id < scheme.n_known()) {
                    const auto& e = palette.entries[scheme.training_to_dataset(id)];
                    r = e.r; g = e.g; b = e.b;
                } else {
                    throw std::runtime_error("prediction map '" + file.string() +
                                             "' contains label " + std::to_string(id) +
                                             " outside the scheme");
                }
                rgb.data[static_cast<size_t>(i * 3)] = r;
                rgb.data[static_cast<size_t>(i * 3 + 1)] = g;
                rgb.data[static_cast<size_t>(i * 3 + 2)] = b;
            }
            fs::create_directories(out);
            const fs::path dst = out / file.filename();
            write_png_rgb8(rgb, dst.string());
            written.push_back(dst);
        }
    }
    const fs::path sweep = bundle / "sweep.csv";
    if (fs::exists(sweep)) {
        fs::create_directories(out);
        const ImageU8 plot = render_sweep_plot(read_sweep_csv(sweep.string()));
        const fs::path dst = out / "sweep.png";
        write_png_rgb8(plot, dst.string());
        written.push_back(dst);
    }
    return written;
}

}  // namespace

std::vector<fs::path> render_outputs(const std::string& bundle_dir, const std::string& out_dir) {
    const fs::path bundle(bundle_dir);
    if (!fs::is_directory(bundle))
        throw std::runtime_error("bundle '" + bundle_dir + "' does not exist");

    std::vector<fs::path> written;
    const fs::path out = out_dir.empty() ? bundle / "rendered" : fs::path(out_dir);
    if (fs::exists(bundle / "manifest.json")) {
        auto w = render_one_bundle(bundle, out);
        written.insert(written.end(), w.begin(), w.end());
    }
    // rotation bundles carry one sub-bundle per held-out class
    std::vector<fs::path> subs;
    for (const auto& entry : fs::directory_iterator(bundle))
        if (entry.is_directory() && entry.path().filename().string().rfind("rot_", 0) == 0 &&
            fs::exists(entry.path() / "manifest.json"))
            subs.push_back(entry.path());
    std::sort(subs.begin(), subs.end());
    for (const auto& sub : subs) {
        auto w = render_one_bundle(sub, out / sub.filename());
        written.insert(written.end(), w.begin(), w.end());
    }

    if (written.empty())
        throw std::runtime_error("bundle '" + bundle_dir +
                                 "' has no prediction maps or sweep curves to render");
    return written;
}

}  // namespace openpixel
