#pragma once

#include <filesystem>
#include <iosfwd>

#include "openpixel/checkpoint.hpp"
#include "openpixel/dataset.hpp"
#include "openpixel/metrics.hpp"
#include "openpixel/openset.hpp"
#include "openpixel/predict.hpp"
#include "openpixel/synthetic.hpp"

namespace openpixel {

// The four evaluation contexts: closed-set train/test, closed-set training
// against open-set ground truth, thresholded open set, and thresholded open
// set followed by the morphological filter.
enum class Context { closed_closed, closed_open, open_open, open_morph };

const char* context_name(Context c);
Context context_from_name(const std::string& name);

struct ExperimentConfig {
    std::string name = "exp";
    std::string data_root;
    std::string palette_path;  // empty -> <data_root>/palette.txt
    std::string unknown;       // held-out class; "" for closed_closed; "all" for rotation
    std::vector<Context> contexts = {Context::open_open};
    TrainConfig train;
    OpenSetConfig openset;
    bool sweep = true;              // pick tau on the validation tiles
    std::vector<double> tau_grid;   // empty -> 0, 0.05, ..., 1
    std::string split = "auto";     // auto | vaihingen | fraction
    double test_fraction = 0.25;
    double val_fraction = 0.2;
    std::string out_dir;
    std::string checkpoint_cache;   // empty -> <out_dir>/checkpoints
    uint64_t seed = 1;
    int threads = 0;
    int64_t predict_block = 8192;
    bool save_probmaps = false;

    void validate() const;
    std::string resolved_palette_path() const;
    std::vector<double> resolved_grid() const;
};

void save_manifest(const ExperimentConfig& cfg, const Palette& palette, const std::string& path);
ExperimentConfig load_manifest(const std::string& path);

struct ContextMetrics {
    std::string experiment;
    std::string unknown_class;  // empty for closed_closed
    Context context = Context::closed_closed;
    double tau = 0.0;
    double oa = 0.0;
    double na = 0.0;
    double kappa = 0.0;
};

void write_metrics_csv(const std::vector<ContextMetrics>& rows, const std::string& path);

struct ContextResult {
    ContextMetrics metrics;
    ConfusionMatrix cm;
};

struct RunResult {
    std::filesystem::path bundle;
    ClassScheme scheme;
    std::vector<ContextResult> contexts;
    double train_seconds = 0.0;
    bool trained_this_run = false;
    std::filesystem::path checkpoint;
};

// Trains (or loads a cached checkpoint), predicts the test tiles, applies each
// requested context's open-set layer, and writes the result bundle:
// manifest.json, metrics.csv, confusion_<context>.csv, sweep.csv (when swept),
// train_report.csv, predictions/<tile>_<context>.png.
RunResult run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

struct RotationResultBundle {
    std::filesystem::path bundle;
    std::vector<ContextMetrics> rows;            // rotations x contexts
    std::vector<RunResult> runs;
    double train_seconds = 0.0;
};

// unknown = "all": one run per dataset class, plus the aggregated
// metrics.csv and one error_rates_<context>.csv per requested context.
RotationResultBundle run_rotation(const ExperimentConfig& cfg, std::ostream* log = nullptr);

// Colorizes prediction maps (UNKNOWN renders red) and plots sweep curves from
// an existing result bundle into <bundle>/rendered (or out_dir if given).
std::vector<std::filesystem::path> render_outputs(const std::string& bundle_dir,
                                                  const std::string& out_dir = "");

}  // namespace openpixel
