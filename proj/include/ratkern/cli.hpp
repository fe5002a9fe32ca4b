#pragma once

// Command-line driver. `run` parses argv, dispatches to one subcommand and
// maps library errors to a JSON object on the error stream.

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "ratkern/kernel.hpp"
#include "ratkern/metrics.hpp"
#include "ratkern/sweep.hpp"

namespace ratkern::cli {

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

nlohmann::json kernel_catalog();

/// `samples` evenly spaced points over [lo, hi] followed by one row per
/// piece boundary inside the range (kind "sample" or "junction"). Columns: t,
/// value, derivative, and the left/right limits of both.
std::string kernel_eval_csv(const kernel::KernelSpec& spec, double lo, double hi,
                            std::size_t samples);

/// Default fixed-parameter rows of the report table.
std::vector<kernel::KernelSpec> default_report_kernels();

struct ReportRow {
  std::string label;
  std::vector<double> values;
  std::vector<double> argmax;  // best-cubic a02 per image, empty otherwise
};

struct ReportTable {
  metrics::Metric metric = metrics::Metric::Psnr;
  std::vector<std::string> images;
  std::vector<ReportRow> rows;
};

ReportTable build_report(const sweep::Baselines& baselines, const sweep::Corpus& corpus,
                         const std::vector<kernel::KernelSpec>& kernels, metrics::Metric metric,
                         bool quantize, unsigned threads = 0);

std::string report_csv(const ReportTable& table);
std::string report_text(const ReportTable& table);
nlohmann::json to_json(const ReportTable& table);

}  // namespace ratkern::cli
