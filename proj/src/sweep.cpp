#include "ratkern/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "ratkern/error.hpp"
#include "ratkern/image_io.hpp"
#include "ratkern/parallel.hpp"
#include "ratkern/resample.hpp"

namespace ratkern::sweep {

namespace fs = std::filesystem;
using kernel::Family;
using kernel::KernelSpec;
using metrics::Metric;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

double require_double(std::string_view text, std::string_view what) {
  const auto v = parse_double(text);
  if (!v) throw Error(ErrorCode::ParseError, fmt::format("{}: '{}' is not a number", what, text));
  return *v;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, fmt::format("{}: cannot open for writing", path.string()));
  out << text;
  if (!out) throw Error(ErrorCode::IoError, fmt::format("{}: write failed", path.string()));
}

bool uses_a01_bound(Family f) { return f == Family::S41v4 || f == Family::S41v5; }

}  // namespace

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return fmt::format("{}", value);
}

Corpus load_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw Error(ErrorCode::MissingInput, fmt::format("{}: corpus directory not found", dir.string()));
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".pgm" || ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  Corpus corpus;
  for (const auto& f : files) {
    const std::string id = f.stem().string();
    if (id.find_first_of(",\"\n") != std::string::npos)
      throw Error(ErrorCode::InvalidArgument, fmt::format("image id '{}' contains a comma or quote", id));
    corpus.push_back({id, io::read_image(f)});
  }
  if (corpus.empty())
    throw Error(ErrorCode::MissingInput, fmt::format("{}: no .pgm or .png images", dir.string()));
  return corpus;
}

std::vector<double> grid_values(Range range, double step) {
  if (!(step > 0.0) || !std::isfinite(step))
    throw Error(ErrorCode::InvalidArgument, "grid step must be positive");
  if (!(range.lo <= range.hi))
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("empty range [{}, {}]", range.lo, range.hi));
  const auto count = static_cast<std::size_t>(std::floor((range.hi - range.lo) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = range.lo + static_cast<double>(k) * step;
  return out;
}

KernelSpec make_spec(Family family, const Triple& t) {
  KernelSpec spec = KernelSpec::make(family);
  const auto& info = kernel::family_info(family);
  if (info.uses_a01) spec.a01 = t.a01;
  if (info.uses_a02) spec.a02 = t.a02;
  if (info.uses_a03) spec.a03 = t.a03;
  return spec;
}

std::vector<Triple> grid_triples(const SweepConfig& config) {
  const auto g1 = grid_values(config.ranges[0], config.steps[0]);
  const auto g2 = grid_values(config.ranges[1], config.steps[1]);
  const auto g3 = grid_values(config.ranges[2], config.steps[2]);
  std::vector<Triple> out;
  out.reserve(g1.size() * g2.size() * g3.size());
  for (double a : g1)
    for (double b : g2)
      for (double c : g3) out.push_back({a, b, c});
  return out;
}

// ---------------------------------------------------------------------------
// Grid sweep

namespace {

struct CellValue {
  double value = 0.0;
  std::string status = "ok";
};

using CellTable = std::map<Triple, std::map<std::string, CellValue>>;

std::string checkpoint_banner(const SweepConfig& c) {
  return fmt::format("# ratkern sweep family={} metric={} quantize={}",
                     kernel::family_info(c.family).name, metrics::to_string(c.metric),
                     c.quantize ? 1 : 0);
}

constexpr std::string_view kCheckpointHeader = "a01,a02,a03,image,value,status";

void load_checkpoint(const fs::path& path, const SweepConfig& config, CellTable& table) {
  if (!fs::exists(path)) return;
  // Drop a torn final line left by an interrupted write.
  {
    std::ifstream in(path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (!content.empty() && content.back() != '\n') {
      const auto last = content.find_last_of('\n');
      fs::resize_file(path, last == std::string::npos ? 0 : last + 1);
    }
  }
  std::ifstream in(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != checkpoint_banner(config))
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("{}: checkpoint was written by a different sweep ({})",
                                path.string(), line));
      continue;
    }
    if (line == kCheckpointHeader) continue;
    const auto f = split(line, ',');
    if (f.size() != 6)
      throw Error(ErrorCode::ParseError,
                  fmt::format("{}:{}: expected 6 fields", path.string(), line_no));
    const Triple t{require_double(f[0], "a01"), require_double(f[1], "a02"),
                   require_double(f[2], "a03")};
    const auto v = parse_double(f[4]);
    table[t][f[3]] = CellValue{v.value_or(std::nan("")), f[5]};
  }
}

}  // namespace

SweepResult grid_sweep(const Corpus& corpus, const SweepConfig& config) {
  if (corpus.empty()) throw Error(ErrorCode::MissingInput, "sweep corpus is empty");
  if (config.family != Family::S41v4 && config.family != Family::S41v5)
    throw Error(ErrorCode::UnsupportedFamily, "grid sweeps cover s41v4 and s41v5");
  if (uses_a01_bound(config.family) && !(config.ranges[0].lo > -1.0))
    throw Error(ErrorCode::ParameterOutOfDomain,
                fmt::format("a01 range starts at {}, the family requires a01 > -1",
                            config.ranges[0].lo));
  const auto triples = grid_triples(config);

  SweepResult result;
  result.total_cells = triples.size();
  for (const auto& img : corpus) result.image_ids.push_back(img.id);

  CellTable table;
  if (config.checkpoint) load_checkpoint(*config.checkpoint, config, table);

  const resample::PipelineOptions popt{.quantize = config.quantize, .threads = 1};
  std::vector<std::optional<ImageF>> reduced(corpus.size());
  std::vector<std::string> reduce_error(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    try {
      reduced[i] = resample::pipeline_reduce(corpus[i].image, popt);
    } catch (const Error& e) {
      reduce_error[i] = std::string(to_string(e.code()));
    }
  }

  std::vector<Triple> pending;
  for (const auto& t : triples) {
    const auto it = table.find(t);
    if (it == table.end() || it->second.size() < corpus.size()) pending.push_back(t);
  }
  if (config.stop_after && pending.size() > *config.stop_after) pending.resize(*config.stop_after);

  std::ofstream checkpoint;
  std::mutex writer;
  if (config.checkpoint) {
    const bool fresh = !fs::exists(*config.checkpoint) || fs::file_size(*config.checkpoint) == 0;
    if (config.checkpoint->has_parent_path())
      fs::create_directories(config.checkpoint->parent_path());
    checkpoint.open(*config.checkpoint, std::ios::app);
    if (!checkpoint)
      throw Error(ErrorCode::IoError,
                  fmt::format("{}: cannot open checkpoint", config.checkpoint->string()));
    if (fresh) checkpoint << checkpoint_banner(config) << '\n' << kCheckpointHeader << '\n';
    checkpoint.flush();
  }

  parallel_for(
      pending.size(),
      [&](std::size_t idx) {
        const Triple t = pending[idx];
        std::map<std::string, CellValue> cells;
        std::optional<kernel::PiecewiseRationalKernel> k;
        std::string build_error;
        try {
          k = kernel::build_kernel(make_spec(config.family, t));
        } catch (const Error& e) {
          build_error = std::string(to_string(e.code()));
        }
        for (std::size_t i = 0; i < corpus.size(); ++i) {
          CellValue cell;
          if (!build_error.empty() || !reduce_error[i].empty()) {
            cell = {std::nan(""), build_error.empty() ? reduce_error[i] : build_error};
          } else {
            try {
              const ImageF out = resample::pipeline_magnify(
                  *reduced[i], corpus[i].image.height, corpus[i].image.width, *k, popt);
              cell.value = metrics::compute(config.metric, corpus[i].image, out);
            } catch (const Error& e) {
              cell = {std::nan(""), std::string(to_string(e.code()))};
            }
          }
          cells[corpus[i].id] = cell;
        }
        std::lock_guard lock(writer);
        auto& row = table[t];
        for (const auto& img : corpus) {
          if (row.count(img.id)) continue;
          const CellValue& c = cells[img.id];
          row[img.id] = c;
          if (checkpoint.is_open())
            checkpoint << format_number(t.a01) << ',' << format_number(t.a02) << ','
                       << format_number(t.a03) << ',' << img.id << ',' << format_number(c.value)
                       << ',' << c.status << '\n';
        }
        if (checkpoint.is_open()) checkpoint.flush();
        ++result.evaluated_cells;
      },
      config.threads);

  // Assemble in canonical order.
  result.complete = true;
  for (const auto& t : triples) {
    const auto it = table.find(t);
    if (it == table.end() || it->second.size() < corpus.size()) {
      result.complete = false;
      continue;
    }
    SweepRecord rec{t, {}, {}, 0.0};
    bool ok = true;
    for (const auto& img : corpus) {
      const auto cell = it->second.find(img.id);
      if (cell == it->second.end() || cell->second.status != "ok") {
        ok = false;
        result.failures.push_back(
            {t, img.id, cell == it->second.end() ? "missing" : cell->second.status});
        continue;
      }
      rec.per_image.push_back(cell->second.value);
    }
    if (ok) result.records.push_back(std::move(rec));
  }

  const std::size_t n_img = corpus.size();
  result.image_min.assign(n_img, 0.0);
  result.image_max.assign(n_img, 0.0);
  result.image_degenerate.assign(n_img, false);
  if (!result.records.empty()) {
    for (std::size_t i = 0; i < n_img; ++i) {
      std::vector<double> column;
      column.reserve(result.records.size());
      for (const auto& r : result.records) column.push_back(r.per_image[i]);
      result.image_min[i] = *std::min_element(column.begin(), column.end());
      result.image_max[i] = *std::max_element(column.begin(), column.end());
      const auto norm = metrics::normalize_unity(column);
      result.image_degenerate[i] = norm.degenerate;
      for (std::size_t r = 0; r < column.size(); ++r)
        result.records[r].normalized.push_back(norm.values[r]);
    }
    for (auto& r : result.records) {
      double sum = 0.0;
      for (double v : r.normalized) sum += v;
      r.normalized_mean = sum / static_cast<double>(n_img);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Baselines

std::vector<BestCubic> best_cubic_search(const Corpus& corpus, Metric metric, bool quantize,
                                         const CubicSearch& search, unsigned threads) {
  const auto grid = grid_values(search.range, search.step);
  const resample::PipelineOptions popt{.quantize = quantize, .threads = 1};
  std::vector<BestCubic> out;
  for (const auto& img : corpus) {
    const ImageF reduced = resample::pipeline_reduce(img.image, popt);
    std::vector<double> values(grid.size());
    parallel_for(
        grid.size(),
        [&](std::size_t k) {
          const auto kern = kernel::build_kernel(KernelSpec::cubic(grid[k]));
          const ImageF mag = resample::pipeline_magnify(reduced, img.image.height,
                                                        img.image.width, kern, popt);
          values[k] = metrics::compute(metric, img.image, mag);
        },
        threads);
    BestCubic best{img.id, grid[0], values[0], true};
    for (std::size_t k = 1; k < grid.size(); ++k) {
      if (values[k] != values[0]) best.degenerate = false;
      if (values[k] > best.value) {  // strict: ties keep the smaller a02
        best.value = values[k];
        best.a02 = grid[k];
      }
    }
    if (grid.size() == 1) best.degenerate = false;
    out.push_back(best);
  }
  return out;
}

std::vector<double> evaluate_kernel(const Corpus& corpus, const KernelSpec& spec, Metric metric,
                                    bool quantize, unsigned threads) {
  const auto kern = kernel::build_kernel(spec);
  const resample::PipelineOptions popt{.quantize = quantize, .threads = 1};
  std::vector<double> values(corpus.size());
  parallel_for(
      corpus.size(),
      [&](std::size_t i) {
        const auto res = resample::experiment_pipeline(corpus[i].image, kern, popt);
        values[i] = metrics::compute(metric, corpus[i].image, res.magnified);
      },
      threads);
  return values;
}

Baselines compute_baselines(const Corpus& corpus, Metric metric, bool quantize, CubicBaseline mode,
                            double fixed_a02, unsigned threads) {
  Baselines b;
  b.cubic_mode = mode;
  for (const auto& img : corpus) b.image_ids.push_back(img.id);
  b.nearest = evaluate_kernel(corpus, KernelSpec::nearest(), metric, quantize, threads);
  b.linear = evaluate_kernel(corpus, KernelSpec::linear(), metric, quantize, threads);
  if (mode == CubicBaseline::Fixed) {
    b.cubic = evaluate_kernel(corpus, KernelSpec::cubic(fixed_a02), metric, quantize, threads);
    b.cubic_a02.assign(corpus.size(), fixed_a02);
  } else {
    for (const auto& best : best_cubic_search(corpus, metric, quantize, {}, threads)) {
      b.cubic.push_back(best.value);
      b.cubic_a02.push_back(best.a02);
    }
  }
  return b;
}

std::vector<Triple> better_than_baselines(const SweepResult& result, const Baselines& baselines,
                                          QualificationRule rule) {
  if (baselines.image_ids != result.image_ids)
    throw Error(ErrorCode::InvalidArgument, "baselines and sweep cover different images");
  const std::size_t n = result.image_ids.size();
  std::vector<double> best(n);
  for (std::size_t i = 0; i < n; ++i)
    best[i] = std::max({baselines.nearest[i], baselines.linear[i], baselines.cubic[i]});

  std::vector<Triple> out;
  if (rule == QualificationRule::PerImageAll) {
    for (const auto& r : result.records) {
      bool all = true;
      for (std::size_t i = 0; i < n && all; ++i) all = r.per_image[i] > best[i];
      if (all) out.push_back(r.params);
    }
    return out;
  }
  double threshold = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double span = result.image_max[i] - result.image_min[i];
    threshold += span > 0.0 ? (best[i] - result.image_min[i]) / span : 0.0;
  }
  threshold /= static_cast<double>(n);
  for (const auto& r : result.records)
    if (r.normalized_mean > threshold) out.push_back(r.params);
  return out;
}

// ---------------------------------------------------------------------------
// Plane fitting

PlaneFit fit_plane(const std::vector<Triple>& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 3)
    throw Error(ErrorCode::RankDeficient,
                fmt::format("plane fit needs at least 3 points, got {}", points.size()));
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = points[static_cast<std::size_t>(i)];
    a(i, 0) = 1.0;
    a(i, 1) = p.a01;
    a(i, 2) = p.a02;
    b(i) = p.a03;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 3)
    throw Error(ErrorCode::RankDeficient, "points are collinear in (a01, a02)");
  const Eigen::VectorXd c = qr.solve(b);
  const Eigen::VectorXd res = a * c - b;
  return {c(0), c(1), c(2), std::sqrt(res.squaredNorm() / static_cast<double>(n)),
          points.size()};
}

Triple plane_point(const PlaneFit& plane, double a01, double a02) {
  return {a01, a02, plane.c0 + plane.c1 * a01 + plane.c2 * a02};
}

nlohmann::json to_json(const PlaneFit& plane) {
  return {{"c0", plane.c0},
          {"c1", plane.c1},
          {"c2", plane.c2},
          {"rms_residual", plane.rms_residual},
          {"point_count", plane.point_count},
          {"equation", fmt::format("a03 = {:.4f} + {:.4f}*a01 + {:.4f}*a02", plane.c0, plane.c1,
                                   plane.c2)}};
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

Range parse_range(const std::string& key, const std::string& value) {
  if (value.size() < 2 || value.front() != '[' || value.back() != ']')
    throw Error(ErrorCode::ParseError, fmt::format("{}: expected [lo, hi], got '{}'", key, value));
  const auto parts = split(std::string_view(value).substr(1, value.size() - 2), ',');
  if (parts.size() != 2)
    throw Error(ErrorCode::ParseError, fmt::format("{}: expected [lo, hi], got '{}'", key, value));
  return {require_double(parts[0], key), require_double(parts[1], key)};
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw Error(ErrorCode::ParseError, fmt::format("{}: expected true or false, got '{}'", key, value));
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
    return v.substr(1, v.size() - 2);
  return v;
}

}  // namespace

SweepJob parse_sweep_config(const std::string& text) {
  SweepJob job;
  bool have[3] = {false, false, false};
  std::optional<double> step;
  std::array<std::optional<double>, 3> axis_step;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ParseError, fmt::format("config line {}: expected key = value", line_no));
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = unquote(trim(std::string_view(line).substr(eq + 1)));

    if (key == "corpus") {
      job.corpus = value;
    } else if (key == "out") {
      job.out_dir = value;
    } else if (key == "family") {
      const auto f = kernel::family_from_name(value);
      if (!f) throw Error(ErrorCode::ParseError, fmt::format("family: unknown '{}'", value));
      job.config.family = *f;
    } else if (key == "a01" || key == "a02" || key == "a03") {
      const int axis = key[2] - '1';
      job.config.ranges[axis] = parse_range(key, value);
      have[axis] = true;
    } else if (key == "step") {
      step = require_double(value, key);
    } else if (key == "step_a01" || key == "step_a02" || key == "step_a03") {
      axis_step[key[7] - '1'] = require_double(value, key);
    } else if (key == "metric") {
      const auto m = metrics::metric_from_name(value);
      if (!m) throw Error(ErrorCode::ParseError, fmt::format("metric: unknown '{}'", value));
      job.config.metric = *m;
    } else if (key == "quantize") {
      job.config.quantize = parse_bool(key, value);
    } else if (key == "checkpoint") {
      job.config.checkpoint = fs::path(value);
    } else if (key == "threads") {
      job.config.threads = static_cast<unsigned>(require_double(value, key));
    } else if (key == "rule") {
      if (value == "per-image-all")
        job.rule = QualificationRule::PerImageAll;
      else if (value == "mean-normalized")
        job.rule = QualificationRule::MeanNormalized;
      else
        throw Error(ErrorCode::ParseError, fmt::format("rule: unknown '{}'", value));
    } else if (key == "baseline") {
      if (value == "best-per-image")
        job.baseline = CubicBaseline::BestPerImage;
      else if (value == "fixed")
        job.baseline = CubicBaseline::Fixed;
      else
        throw Error(ErrorCode::ParseError, fmt::format("baseline: unknown '{}'", value));
    } else if (key == "baseline_a02") {
      job.baseline_a02 = require_double(value, key);
    } else {
      throw Error(ErrorCode::ParseError, fmt::format("config line {}: unknown key '{}'", line_no, key));
    }
  }
  for (int axis = 0; axis < 3; ++axis) {
    if (!have[axis])
      throw Error(ErrorCode::ParseError, fmt::format("config: missing range a0{}", axis + 1));
    job.config.steps[axis] = axis_step[axis].value_or(step.value_or(1.0));
  }
  if (job.corpus.empty()) throw Error(ErrorCode::ParseError, "config: missing corpus");
  return job;
}

SweepJob load_sweep_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingInput, fmt::format("{}: cannot read config", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  SweepJob job = parse_sweep_config(buffer.str());
  const fs::path base = path.parent_path();
  if (job.corpus.is_relative()) job.corpus = base / job.corpus;
  if (job.out_dir.is_relative()) job.out_dir = base / job.out_dir;
  if (job.config.checkpoint && job.config.checkpoint->is_relative())
    job.config.checkpoint = base / *job.config.checkpoint;
  return job;
}

// ---------------------------------------------------------------------------
// Output files

void write_baselines_csv(const fs::path& path, const Baselines& b) {
  std::string text = "image,nearest,linear,cubic,cubic_a02,cubic_mode\n";
  const char* mode = b.cubic_mode == CubicBaseline::Fixed ? "fixed" : "best-per-image";
  for (std::size_t i = 0; i < b.image_ids.size(); ++i)
    text += fmt::format("{},{},{},{},{},{}\n", b.image_ids[i], format_number(b.nearest[i]),
                        format_number(b.linear[i]), format_number(b.cubic[i]),
                        format_number(b.cubic_a02[i]), mode);
  write_text(path, text);
}

Baselines read_baselines_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingInput, fmt::format("{}: baselines not found", path.string()));
  Baselines b;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) throw Error(ErrorCode::ParseError, fmt::format("{}: malformed row", path.string()));
    b.image_ids.push_back(f[0]);
    b.nearest.push_back(require_double(f[1], "nearest"));
    b.linear.push_back(require_double(f[2], "linear"));
    b.cubic.push_back(require_double(f[3], "cubic"));
    b.cubic_a02.push_back(require_double(f[4], "cubic_a02"));
    b.cubic_mode = trim(f[5]) == "fixed" ? CubicBaseline::Fixed : CubicBaseline::BestPerImage;
  }
  return b;
}

void write_sweep_outputs(const fs::path& dir, const SweepResult& result, const Baselines& baselines,
                         const std::vector<Triple>& qualifying) {
  fs::create_directories(dir);
  std::string ids;
  for (const auto& id : result.image_ids) ids += "," + id;

  std::string wide = "a01,a02,a03" + ids + "\n";
  std::string norm = "a01,a02,a03" + ids + ",normalized_mean\n";
  for (const auto& r : result.records) {
    const std::string head = fmt::format("{},{},{}", format_number(r.params.a01),
                                         format_number(r.params.a02), format_number(r.params.a03));
    wide += head;
    norm += head;
    for (double v : r.per_image) wide += "," + format_number(v);
    for (double v : r.normalized) norm += "," + format_number(v);
    wide += "\n";
    norm += "," + format_number(r.normalized_mean) + "\n";
  }
  write_text(dir / "sweep.csv", wide);
  write_text(dir / "normalized.csv", norm);
  write_baselines_csv(dir / "baselines.csv", baselines);

  std::string qual = "a01,a02,a03\n";
  for (const auto& t : qualifying)
    qual += fmt::format("{},{},{}\n", format_number(t.a01), format_number(t.a02), format_number(t.a03));
  write_text(dir / "qualifying.csv", qual);

  nlohmann::json plane;
  try {
    plane = to_json(fit_plane(qualifying));
  } catch (const Error& e) {
    plane = {{"error", std::string(to_string(e.code()))}, {"message", e.what()},
             {"point_count", qualifying.size()}};
  }
  plane["complete"] = result.complete;
  plane["failures"] = result.failures.size();
  write_text(dir / "plane.json", plane.dump(2) + "\n");
}

}  // namespace ratkern::sweep
