#pragma once

// Parameter sweeps over the three-parameter families: grid enumeration,
// checkpointed evaluation, per-image unity normalization, baseline
// comparison and least-squares plane fitting.

#include <array>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ratkern/image.hpp"
#include "ratkern/kernel.hpp"
#include "ratkern/metrics.hpp"

namespace ratkern::sweep {

struct CorpusImage {
  std::string id;
  ImageF image;
};
using Corpus = std::vector<CorpusImage>;

/// Every .pgm/.png file in `dir`, sorted by file name; ids are file stems.
Corpus load_corpus(const std::filesystem::path& dir);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// lo + k * step for integer k, both endpoints inclusive.
std::vector<double> grid_values(Range range, double step);

struct Triple {
  double a01 = 0.0;
  double a02 = 0.0;
  double a03 = 0.0;
  auto operator<=>(const Triple&) const = default;
};

kernel::KernelSpec make_spec(kernel::Family family, const Triple& t);

struct SweepRecord {
  Triple params;
  std::vector<double> per_image;   // in corpus order
  std::vector<double> normalized;  // per-image unity-normalized values
  double normalized_mean = 0.0;
};

struct CellFailure {
  Triple params;
  std::string image;
  std::string error;
};

struct SweepConfig {
  kernel::Family family = kernel::Family::S41v4;
  std::array<Range, 3> ranges{};
  std::array<double, 3> steps{1.0, 1.0, 1.0};
  metrics::Metric metric = metrics::Metric::Psnr;
  bool quantize = true;
  std::optional<std::filesystem::path> checkpoint;
  // Stop after evaluating this many new cells (simulates an interruption).
  std::optional<std::size_t> stop_after;
  unsigned threads = 0;
};

struct SweepResult {
  std::vector<std::string> image_ids;
  std::vector<SweepRecord> records;  // lexicographic in the triple
  std::vector<CellFailure> failures;
  std::vector<double> image_min;     // per image, over successful triples
  std::vector<double> image_max;
  std::vector<bool> image_degenerate;
  std::size_t total_cells = 0;
  std::size_t evaluated_cells = 0;   // in this run
  bool complete = false;
};

std::vector<Triple> grid_triples(const SweepConfig& config);

SweepResult grid_sweep(const Corpus& corpus, const SweepConfig& config);

struct BestCubic {
  std::string image;
  double a02 = 0.0;
  double value = 0.0;
  bool degenerate = false;  // every a02 gives the same value
};

struct CubicSearch {
  Range range{-7.0, 1.0};
  double step = 0.005;
};

std::vector<BestCubic> best_cubic_search(const Corpus& corpus, metrics::Metric metric,
                                         bool quantize = true, const CubicSearch& search = {},
                                         unsigned threads = 0);

/// Metric of a single kernel over the corpus (one value per image).
std::vector<double> evaluate_kernel(const Corpus& corpus, const kernel::KernelSpec& spec,
                                    metrics::Metric metric, bool quantize = true,
                                    unsigned threads = 0);

enum class CubicBaseline { BestPerImage, Fixed };

struct Baselines {
  std::vector<std::string> image_ids;
  std::vector<double> nearest;
  std::vector<double> linear;
  std::vector<double> cubic;
  std::vector<double> cubic_a02;
  CubicBaseline cubic_mode = CubicBaseline::BestPerImage;
};

Baselines compute_baselines(const Corpus& corpus, metrics::Metric metric, bool quantize = true,
                            CubicBaseline mode = CubicBaseline::BestPerImage,
                            double fixed_a02 = -2.5, unsigned threads = 0);

enum class QualificationRule { PerImageAll, MeanNormalized };

/// PerImageAll: strictly above all three baselines on every image.
/// MeanNormalized: normalized mean above the mean of the per-image best
/// baseline, normalized with the sweep's per-image range.
std::vector<Triple> better_than_baselines(const SweepResult& result, const Baselines& baselines,
                                          QualificationRule rule = QualificationRule::PerImageAll);

struct PlaneFit {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double rms_residual = 0.0;
  std::size_t point_count = 0;
};

/// Least squares a03 = c0 + c1 a01 + c2 a02. Throws RankDeficient.
PlaneFit fit_plane(const std::vector<Triple>& points);

Triple plane_point(const PlaneFit& plane, double a01, double a02);

nlohmann::json to_json(const PlaneFit& plane);

// ---------------------------------------------------------------------------
// Configuration and files

struct SweepJob {
  std::filesystem::path corpus;
  std::filesystem::path out_dir = "sweep_out";
  SweepConfig config;
  QualificationRule rule = QualificationRule::PerImageAll;
  CubicBaseline baseline = CubicBaseline::BestPerImage;
  double baseline_a02 = -2.5;
};

/// `key = value` lines, '#' comments, ranges written `[lo, hi]`.
SweepJob parse_sweep_config(const std::string& text);
SweepJob load_sweep_config(const std::filesystem::path& path);

/// Writes sweep.csv, normalized.csv, baselines.csv, qualifying.csv and
/// plane.json into `dir`.
void write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& result,
                         const Baselines& baselines, const std::vector<Triple>& qualifying);

void write_baselines_csv(const std::filesystem::path& path, const Baselines& baselines);
Baselines read_baselines_csv(const std::filesystem::path& path);

std::string format_number(double value);

}  // namespace ratkern::sweep
