#include "ratkern/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "ratkern/error.hpp"
#include "ratkern/image_io.hpp"
#include "ratkern/resample.hpp"
#include "ratkern/verify.hpp"

namespace ratkern::cli {

namespace fs = std::filesystem;
using kernel::Family;
using kernel::KernelSpec;
using kernel::Side;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoError, fmt::format("cannot open {} for writing", path.string()));
  os << text;
  if (!os) throw Error(ErrorCode::IoError, fmt::format("write failed: {}", path.string()));
}

std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::MissingInput, fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void require_file(const fs::path& path) {
  if (!fs::is_regular_file(path))
    throw Error(ErrorCode::MissingInput, fmt::format("no such file: {}", path.string()));
}

double parse_double(const std::string& text, std::string_view what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::ParseError, fmt::format("bad {}: '{}'", what, text));
}

std::pair<double, double> parse_range(const std::string& text) {
  const auto colon = text.find(':', 1);
  if (colon == std::string::npos)
    throw Error(ErrorCode::ParseError, fmt::format("range must be lo:hi, got '{}'", text));
  const double lo = parse_double(text.substr(0, colon), "range");
  const double hi = parse_double(text.substr(colon + 1), "range");
  if (!(lo < hi)) throw Error(ErrorCode::ParseError, "range needs lo < hi");
  return {lo, hi};
}

std::pair<std::size_t, std::size_t> parse_size(const std::string& text) {
  const auto x = text.find('x');
  std::size_t h = 0, w = 0;
  try {
    if (x != std::string::npos) {
      h = std::stoul(text.substr(0, x));
      w = std::stoul(text.substr(x + 1));
    }
  } catch (const std::exception&) {
    h = w = 0;
  }
  if (h == 0 || w == 0)
    throw Error(ErrorCode::ParseError, fmt::format("size must be HxW, got '{}'", text));
  return {h, w};
}

metrics::Metric parse_metric(const std::string& name) {
  const auto m = metrics::metric_from_name(name);
  if (!m) throw Error(ErrorCode::ParseError, fmt::format("unknown metric '{}'", name));
  return *m;
}

std::string format_metric(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.4f}", v);
}

std::string spec_label(const KernelSpec& spec) {
  const auto& info = kernel::family_info(spec.family);
  std::vector<std::string> params;
  for (const auto& p : {spec.a01, spec.a02, spec.a03})
    if (p) params.push_back(fmt::format("{}", *p));
  if (params.empty()) return std::string(info.display);
  return fmt::format("{}({})", info.display, fmt::join(params, ","));
}

ImageF load_input(const fs::path& path, std::ostream& err) {
  require_file(path);
  return io::read_image(path, [&](const std::string& msg) { err << "warning: " << msg << '\n'; });
}

std::vector<sweep::Triple> read_triples_csv(const fs::path& path) {
  std::istringstream is(read_text(path));
  std::string line;
  std::vector<sweep::Triple> out;
  bool header = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      if (line.rfind("a01,a02,a03", 0) == 0) continue;
    }
    std::array<double, 3> v{};
    std::istringstream ls(line);
    std::string cell;
    for (int k = 0; k < 3; ++k) {
      if (!std::getline(ls, cell, ','))
        throw Error(ErrorCode::ParseError, fmt::format("{}: short row '{}'", path.string(), line));
      v[k] = parse_double(cell, "triple");
    }
    out.push_back({v[0], v[1], v[2]});
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

nlohmann::json kernel_catalog() {
  nlohmann::json list = nlohmann::json::array();
  for (Family f : kernel::kAllFamilies) {
    const auto& info = kernel::family_info(f);
    nlohmann::json params = nlohmann::json::array();
    if (info.uses_a01) params.push_back("a01");
    if (info.uses_a02) params.push_back("a02");
    if (info.uses_a03) params.push_back("a03");
    list.push_back({{"family", info.name},
                    {"display", info.display},
                    {"parameters", params},
                    {"domain", info.domain},
                    {"support", info.support},
                    {"derivative_at_one", info.derivative_at_one},
                    {"continuity", info.continuity}});
  }
  return list;
}

std::string kernel_eval_csv(const KernelSpec& spec, double lo, double hi, std::size_t samples) {
  if (samples < 2) throw Error(ErrorCode::InvalidArgument, "samples must be at least 2");
  if (!(lo < hi)) throw Error(ErrorCode::InvalidArgument, "range needs lo < hi");
  const auto k = kernel::build_kernel(spec);

  std::string out =
      "t,value,derivative,value_left,value_right,derivative_left,derivative_right,kind\n";
  // Adding 0.0 turns -0 into 0.
  auto row = [&](double t, std::string_view kind) {
    const double vl = k.derivative(t, 0, Side::Left) + 0.0;
    const double vr = k.derivative(t, 0, Side::Right) + 0.0;
    const double dl = k.derivative(t, 1, Side::Left) + 0.0;
    const double dr = k.derivative(t, 1, Side::Right) + 0.0;
    // The two-sided derivative where it exists; the mean of the limits at a kink.
    out += fmt::format("{},{},{},{},{},{},{},{}\n", t + 0.0, k(t) + 0.0, 0.5 * (dl + dr) + 0.0,
                       vl, vr, dl, dr, kind);
  };
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = i + 1 == samples ? hi : lo + (hi - lo) * static_cast<double>(i) /
                                                      static_cast<double>(samples - 1);
    row(t, "sample");
  }

  std::vector<double> junctions;
  for (const auto& p : k.pieces()) {
    junctions.push_back(p.lo);
    junctions.push_back(-p.lo);
  }
  junctions.push_back(k.support());
  junctions.push_back(-k.support());
  std::sort(junctions.begin(), junctions.end());
  junctions.erase(std::unique(junctions.begin(), junctions.end()), junctions.end());
  for (double t : junctions)
    if (t >= lo && t <= hi) row(t, "junction");
  return out;
}

std::vector<KernelSpec> default_report_kernels() {
  return {KernelSpec::s41v4(30, 20, -121.5512), KernelSpec::s41v4(80, 100, -444.7992),
          KernelSpec::s41v5(30, 10, -90.1572), KernelSpec::s41v5(50, 10, -129.3052)};
}

ReportTable build_report(const sweep::Baselines& baselines, const sweep::Corpus& corpus,
                         const std::vector<KernelSpec>& kernels, metrics::Metric metric,
                         bool quantize, unsigned threads) {
  ReportTable t;
  t.metric = metric;
  for (const auto& img : corpus) t.images.push_back(img.id);
  if (baselines.image_ids != t.images)
    throw Error(ErrorCode::MissingInput,
                "baseline images do not match the corpus (same files, same order expected)");

  t.rows.push_back({"Nearest", baselines.nearest, {}});
  t.rows.push_back({"Linear", baselines.linear, {}});
  if (baselines.cubic_mode == sweep::CubicBaseline::BestPerImage) {
    t.rows.push_back({"S3 (best a02)", baselines.cubic, baselines.cubic_a02});
  } else {
    const double a02 = baselines.cubic_a02.empty() ? -2.5 : baselines.cubic_a02.front();
    t.rows.push_back({fmt::format("S3({})", a02), baselines.cubic, {}});
  }
  for (const auto& spec : kernels)
    t.rows.push_back(
        {spec_label(spec), sweep::evaluate_kernel(corpus, spec, metric, quantize, threads), {}});
  return t;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::vector<std::vector<std::string>> report_cells(const ReportTable& table) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header{"kernel"};
  header.insert(header.end(), table.images.begin(), table.images.end());
  cells.push_back(header);
  for (const auto& row : table.rows) {
    std::vector<std::string> line{row.label};
    for (std::size_t i = 0; i < row.values.size(); ++i) {
      std::string cell = format_metric(row.values[i]);
      if (!row.argmax.empty()) cell += fmt::format(" ({:.3f})", row.argmax[i]);
      line.push_back(cell);
    }
    cells.push_back(line);
  }
  return cells;
}

}  // namespace

std::string report_csv(const ReportTable& table) {
  std::string out;
  for (auto line : report_cells(table)) {
    for (auto& cell : line) cell = csv_field(cell);
    out += fmt::format("{}\n", fmt::join(line, ","));
  }
  return out;
}

std::string report_text(const ReportTable& table) {
  const auto cells = report_cells(table);
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& line : cells)
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  std::string out;
  for (const auto& line : cells) {
    out += fmt::format("{:<{}}", line[0], width[0]);
    for (std::size_t c = 1; c < line.size(); ++c) out += fmt::format("  {:>{}}", line[c], width[c]);
    out += '\n';
  }
  return out;
}

nlohmann::json to_json(const ReportTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json values = nlohmann::json::array();
    for (double v : row.values) values.push_back(metrics::metric_value_json(v));
    nlohmann::json r{{"kernel", row.label}, {"values", values}};
    if (!row.argmax.empty()) r["best_a02"] = row.argmax;
    rows.push_back(r);
  }
  return {{"metric", metrics::to_string(table.metric)}, {"images", table.images}, {"rows", rows}};
}

// ---------------------------------------------------------------------------

namespace {

struct Context {
  std::ostream& out;
  std::ostream& err;
};

void emit(const Context& ctx, const std::optional<fs::path>& out_file, const std::string& text) {
  if (out_file)
    write_text(*out_file, text);
  else
    ctx.out << text;
}

void cmd_kernel_list(const Context& ctx, const std::optional<fs::path>& out_file) {
  emit(ctx, out_file, kernel_catalog().dump(2) + "\n");
}

void cmd_kernel_eval(const Context& ctx, const std::string& spec_text,
                     const std::optional<std::string>& range, std::size_t samples,
                     const std::optional<fs::path>& out_file) {
  const auto spec = kernel::parse_spec(spec_text);
  kernel::validate(spec);
  const double r = kernel::family_info(spec.family).support;
  const auto [lo, hi] = range ? parse_range(*range) : std::pair{-r, r};
  emit(ctx, out_file, kernel_eval_csv(spec, lo, hi, samples));
}

std::vector<KernelSpec> verify_catalog() {
  return {KernelSpec::nearest(),
          KernelSpec::linear(),
          KernelSpec::s2(),
          KernelSpec::cubic(-2.5),
          KernelSpec::cubic_alt(-2.5),
          KernelSpec::s4(-2.5, 1.5),
          KernelSpec::s31(0.5),
          KernelSpec::s41v1(1.0, -2.0),
          KernelSpec::s41v2(-1.0, -4.0),
          KernelSpec::s41v3(0.0),
          KernelSpec::s41v4(30, 20, -121.5512),
          KernelSpec::s41v5(30, 10, -90.1572)};
}

void cmd_verify(const Context& ctx, const std::vector<std::string>& spec_texts, bool all,
                int max_order, bool json, const std::optional<fs::path>& out_dir) {
  std::vector<KernelSpec> specs;
  for (const auto& s : spec_texts) {
    specs.push_back(kernel::parse_spec(s));
    kernel::validate(specs.back());
  }
  if (all) {
    const auto c = verify_catalog();
    specs.insert(specs.end(), c.begin(), c.end());
  }
  if (specs.empty()) throw Error(ErrorCode::InvalidArgument, "no kernel given (SPEC... or --all)");

  std::vector<verify::PropertyReport> reports;
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& spec : specs) {
    reports.push_back(verify::make_report(spec, max_order));
    auto j = verify::to_json(reports.back());
    if (std::find(kernel::kRationalFamilies.begin(), kernel::kRationalFamilies.end(),
                  spec.family) != kernel::kRationalFamilies.end()) {
      nlohmann::json res = nlohmann::json::object();
      for (const auto& r : verify::constraint_residuals(spec)) res[r.name] = r.value;
      j["constraint_residuals"] = res;
    }
    doc.push_back(j);
  }
  const std::string json_text = doc.dump(2) + "\n";
  const std::string table = verify::format_table(reports);
  if (out_dir) {
    write_text(*out_dir / "verify.json", json_text);
    write_text(*out_dir / "verify.txt", table);
  }
  ctx.out << (json ? json_text : table);
}

struct ResizeArgs {
  fs::path input;
  fs::path output;
  std::string kernel;
  std::optional<double> scale;
  std::optional<std::string> size;
  bool antialias = false;
  bool quantize_each_pass = false;
};

void cmd_resize(const Context& ctx, const ResizeArgs& a) {
  const auto k = kernel::build_kernel(kernel::parse_spec(a.kernel));
  if (a.scale.has_value() == a.size.has_value())
    throw Error(ErrorCode::InvalidArgument, "give exactly one of --scale and --size");
  const ImageF img = load_input(a.input, ctx.err);
  std::size_t h = 0, w = 0;
  if (a.size) {
    std::tie(h, w) = parse_size(*a.size);
  } else {
    if (!(*a.scale > 0.0) || !std::isfinite(*a.scale))
      throw Error(ErrorCode::InvalidArgument, "scale must be positive");
    h = static_cast<std::size_t>(std::ceil(img.height * *a.scale - 1e-9));
    w = static_cast<std::size_t>(std::ceil(img.width * *a.scale - 1e-9));
    if (h == 0 || w == 0) throw Error(ErrorCode::InvalidArgument, "output would be empty");
  }
  resample::ResizeOptions opt;
  opt.antialias = a.antialias;
  opt.quantize_each_pass = a.quantize_each_pass;
  const ImageF resized = resample::resize(img, h, w, k, opt);
  if (a.output.has_parent_path()) fs::create_directories(a.output.parent_path());
  io::write_image(a.output, resized);
}

struct PipelineArgs {
  fs::path input;
  std::string kernel;
  fs::path out_dir = "pipeline_out";
  bool quantize = true;
  bool quantize_each_pass = false;
  std::size_t factor = 4;
  std::string format = "pgm";
};

void cmd_pipeline(const Context& ctx, const PipelineArgs& a) {
  const auto spec = kernel::parse_spec(a.kernel);
  const auto k = kernel::build_kernel(spec);
  if (a.format != "pgm" && a.format != "png")
    throw Error(ErrorCode::InvalidArgument, "format must be pgm or png");
  const ImageF img = load_input(a.input, ctx.err);
  resample::PipelineOptions opt;
  opt.quantize = a.quantize;
  opt.quantize_each_pass = a.quantize_each_pass;
  opt.factor = a.factor;
  const auto result = resample::experiment_pipeline(img, k, opt);
  const auto report = metrics::evaluate(img, result.magnified);

  nlohmann::json doc{{"input", a.input.string()},
                     {"kernel", kernel::to_string(spec)},
                     {"factor", a.factor},
                     {"quantize", a.quantize},
                     {"quantize_each_pass", a.quantize_each_pass},
                     {"metrics", metrics::to_json(report)}};
  fs::create_directories(a.out_dir);
  io::write_image(a.out_dir / ("reduced." + a.format), result.reduced);
  io::write_image(a.out_dir / ("magnified." + a.format), result.magnified);
  write_text(a.out_dir / "report.json", doc.dump(2) + "\n");
  ctx.out << fmt::format("psnr {}  ssim {}  fsim {}\n", format_metric(report.psnr),
                         format_metric(report.ssim), format_metric(report.fsim));
}

void cmd_metrics(const Context& ctx, const fs::path& ref, const fs::path& test,
                 const std::string& metric, const std::optional<fs::path>& out_file) {
  std::optional<metrics::Metric> only;
  if (metric != "all") only = parse_metric(metric);
  const ImageF a = load_input(ref, ctx.err);
  const ImageF b = load_input(test, ctx.err);
  nlohmann::json doc;
  if (only) {
    doc[std::string(metrics::to_string(*only))] =
        metrics::metric_value_json(metrics::compute(*only, a, b));
  } else {
    doc = metrics::to_json(metrics::evaluate(a, b));
  }
  emit(ctx, out_file, doc.dump(2) + "\n");
}

struct SweepArgs {
  fs::path config;
  std::optional<fs::path> out_dir;
  std::optional<std::size_t> stop_after;
  std::optional<unsigned> threads;
};

void cmd_sweep(const Context& ctx, const SweepArgs& a) {
  require_file(a.config);
  auto job = sweep::load_sweep_config(a.config);
  if (a.out_dir) job.out_dir = *a.out_dir;
  if (a.threads) job.config.threads = *a.threads;
  if (a.stop_after) job.config.stop_after = a.stop_after;
  if (!job.config.checkpoint) job.config.checkpoint = job.out_dir / "checkpoint.csv";
  if (!fs::is_directory(job.corpus))
    throw Error(ErrorCode::MissingInput, fmt::format("no corpus directory {}", job.corpus.string()));

  const auto corpus = sweep::load_corpus(job.corpus);
  // Grid and kernel-domain problems surface before anything is written.
  const auto triples = sweep::grid_triples(job.config);
  fs::create_directories(job.out_dir);
  const auto result = sweep::grid_sweep(corpus, job.config);

  nlohmann::json status{{"cells", result.total_cells},
                        {"evaluated", result.evaluated_cells},
                        {"failures", result.failures.size()},
                        {"complete", result.complete}};
  if (!result.complete) {
    status["checkpoint"] = job.config.checkpoint->string();
    ctx.out << status.dump() << '\n';
    return;
  }
  const auto baselines = sweep::compute_baselines(corpus, job.config.metric, job.config.quantize,
                                                  job.baseline, job.baseline_a02,
                                                  job.config.threads);
  const auto qualifying = sweep::better_than_baselines(result, baselines, job.rule);
  sweep::write_sweep_outputs(job.out_dir, result, baselines, qualifying);
  status["qualifying"] = qualifying.size();
  status["grid_points"] = triples.size();
  ctx.out << status.dump() << '\n';
}

void cmd_fit_plane(const Context& ctx, const fs::path& input,
                   const std::optional<fs::path>& out_file) {
  const auto plane = sweep::fit_plane(read_triples_csv(input));
  emit(ctx, out_file, sweep::to_json(plane).dump(2) + "\n");
}

struct ReportArgs {
  fs::path baselines;
  fs::path corpus;
  std::vector<std::string> kernels;
  std::string metric = "psnr";
  bool quantize = true;
  bool compute_baselines = false;
  std::optional<fs::path> out_dir;
  std::optional<unsigned> threads;
};

void cmd_report(const Context& ctx, const ReportArgs& a) {
  const auto metric = parse_metric(a.metric);
  std::vector<KernelSpec> kernels;
  for (const auto& s : a.kernels) {
    kernels.push_back(kernel::parse_spec(s));
    kernel::validate(kernels.back());
  }
  if (kernels.empty()) kernels = default_report_kernels();
  if (!fs::is_directory(a.corpus))
    throw Error(ErrorCode::MissingInput, fmt::format("no corpus directory {}", a.corpus.string()));
  const unsigned threads = a.threads.value_or(0);

  fs::path baseline_file = a.baselines;
  if (fs::is_directory(baseline_file)) baseline_file /= "baselines.csv";
  const auto corpus = sweep::load_corpus(a.corpus);
  sweep::Baselines baselines;
  if (fs::is_regular_file(baseline_file)) {
    baselines = sweep::read_baselines_csv(baseline_file);
  } else if (a.compute_baselines) {
    baselines = sweep::compute_baselines(corpus, metric, a.quantize,
                                         sweep::CubicBaseline::BestPerImage, -2.5, threads);
  } else {
    throw Error(ErrorCode::MissingInput,
                fmt::format("no baselines at {} (run sweep or pass --compute-baselines)",
                            baseline_file.string()));
  }

  const auto table = build_report(baselines, corpus, kernels, metric, a.quantize, threads);
  const std::string text = report_text(table);
  if (a.out_dir) {
    write_text(*a.out_dir / "report.csv", report_csv(table));
    write_text(*a.out_dir / "report.txt", text);
    write_text(*a.out_dir / "report.json", to_json(table).dump(2) + "\n");
    if (!fs::is_regular_file(baseline_file))
      sweep::write_baselines_csv(*a.out_dir / "baselines.csv", baselines);
  }
  ctx.out << text;
}

void print_error(std::ostream& err, std::string_view code, std::string_view message) {
  err << nlohmann::json{{"error", code}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const Context ctx{out, err};
  CLI::App app{"Piecewise rational interpolation kernels: inspection, resampling, metrics and sweeps",
               "ratkern"};
  app.require_subcommand(1);

  std::optional<fs::path> out_file;

  auto* list = app.add_subcommand("kernel-list", "JSON catalog of the kernel families");
  list->add_option("--out", out_file, "Write to this file instead of stdout");

  std::string spec_text;
  std::optional<std::string> range;
  std::size_t samples = 401;
  auto* eval = app.add_subcommand("kernel-eval", "Tabulate a kernel and its derivative as CSV");
  eval->add_option("spec", spec_text, "Kernel spec, e.g. cubic:a02=-2.5")->required();
  eval->add_option("--range", range, "t range lo:hi (default: the support)");
  eval->add_option("--samples", samples, "Number of evenly spaced samples");
  eval->add_option("--out", out_file, "Write to this file instead of stdout");

  std::vector<std::string> verify_specs;
  bool verify_all = false;
  int max_order = 3;
  bool as_json = false;
  std::optional<fs::path> out_dir;
  auto* ver = app.add_subcommand("verify", "Numerically certify kernel properties");
  ver->add_option("specs", verify_specs, "Kernel specs");
  ver->add_flag("--all", verify_all, "Include a representative kernel of every family");
  ver->add_option("--max-order", max_order, "Highest derivative order checked at junctions")
      ->check(CLI::Range(0, 3));
  ver->add_flag("--json", as_json, "Print JSON instead of the table");
  ver->add_option("--out", out_dir, "Also write verify.json and verify.txt here");

  ResizeArgs rz;
  auto* res = app.add_subcommand("resize", "Resize a grayscale image");
  res->add_option("input", rz.input)->required();
  res->add_option("output", rz.output, "Output .pgm or .png")->required();
  res->add_option("--kernel", rz.kernel, "Kernel spec")->required();
  res->add_option("--scale", rz.scale, "Scale factor");
  res->add_option("--size", rz.size, "Output size HxW");
  res->add_flag("--antialias", rz.antialias, "Widen the kernel when reducing");
  res->add_flag("--quantize-each-pass", rz.quantize_each_pass,
                "Round to 8 bits after each 1-D pass");

  PipelineArgs pl;
  auto* pipe = app.add_subcommand("pipeline", "Reduce by 4 with Cubic{-2.5}, magnify back, score");
  pipe->add_option("input", pl.input)->required();
  pipe->add_option("--kernel", pl.kernel, "Magnification kernel spec")->required();
  pipe->add_option("--out", pl.out_dir, "Output directory");
  pipe->add_flag("--quantize,!--no-quantize", pl.quantize, "Round to 8 bits after each stage");
  pipe->add_flag("--quantize-each-pass", pl.quantize_each_pass,
                 "Round after every 1-D pass as well");
  pipe->add_option("--factor", pl.factor, "Reduction factor")->check(CLI::PositiveNumber);
  pipe->add_option("--format", pl.format, "Image format of the stage outputs (pgm or png)");

  fs::path ref, test;
  std::string metric = "all";
  auto* met = app.add_subcommand("metrics", "PSNR, SSIM and FSIM of TEST against REF");
  met->add_option("ref", ref)->required();
  met->add_option("test", test)->required();
  met->add_option("--metric", metric, "psnr, ssim, fsim or all");
  met->add_option("--out", out_file, "Write to this file instead of stdout");

  SweepArgs sw;
  auto* swp = app.add_subcommand("sweep", "Grid sweep driven by a config file");
  swp->add_option("--config", sw.config, "Sweep config file")->required();
  swp->add_option("--out", sw.out_dir, "Output directory (overrides the config)");
  swp->add_option("--stop-after", sw.stop_after, "Stop after this many new cells");
  swp->add_option("--threads", sw.threads, "Worker threads");

  fs::path plane_input;
  auto* fit = app.add_subcommand("fit-plane", "Least-squares plane through a01,a02,a03 rows");
  fit->add_option("input", plane_input, "CSV with a01,a02,a03 columns")->required();
  fit->add_option("--out", out_file, "Write to this file instead of stdout");

  ReportArgs rp;
  auto* rep = app.add_subcommand("report", "Comparison table: baselines and fixed kernels");
  rep->add_option("--baselines", rp.baselines, "baselines.csv or a sweep output directory")
      ->required();
  rep->add_option("--corpus", rp.corpus, "Image directory")->required();
  rep->add_option("--kernel", rp.kernels, "Kernel spec row (repeatable)");
  rep->add_option("--metric", rp.metric, "psnr, ssim or fsim");
  rep->add_flag("--quantize,!--no-quantize", rp.quantize, "Round to 8 bits after each stage");
  rep->add_flag("--compute-baselines", rp.compute_baselines,
                "Compute the baselines when the file is absent");
  rep->add_option("--out", rp.out_dir, "Write report.csv, report.txt and report.json here");
  rep->add_option("--threads", rp.threads, "Worker threads");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error(err, to_string(ErrorCode::ParseError), e.what());
    return 2;
  }

  try {
    if (list->parsed()) cmd_kernel_list(ctx, out_file);
    else if (eval->parsed()) cmd_kernel_eval(ctx, spec_text, range, samples, out_file);
    else if (ver->parsed()) cmd_verify(ctx, verify_specs, verify_all, max_order, as_json, out_dir);
    else if (res->parsed()) cmd_resize(ctx, rz);
    else if (pipe->parsed()) cmd_pipeline(ctx, pl);
    else if (met->parsed()) cmd_metrics(ctx, ref, test, metric, out_file);
    else if (swp->parsed()) cmd_sweep(ctx, sw);
    else if (fit->parsed()) cmd_fit_plane(ctx, plane_input, out_file);
    else if (rep->parsed()) cmd_report(ctx, rp);
  } catch (const Error& e) {
    print_error(err, to_string(e.code()), e.what());
    return 1;
  } catch (const fs::filesystem_error& e) {
    print_error(err, to_string(ErrorCode::IoError), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(err, "InternalError", e.what());
    return 1;
  }
  return 0;
}

}  // namespace ratkern::cli
