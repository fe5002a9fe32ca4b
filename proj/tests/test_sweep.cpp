#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "ratkern/error.hpp"
#include "ratkern/image_io.hpp"
#include "ratkern/resample.hpp"
#include "ratkern/sweep.hpp"
#include "support.hpp"

using namespace ratkern;
using namespace ratkern::sweep;
using kernel::Family;
using kernel::KernelSpec;
using metrics::Metric;
namespace fs = std::filesystem;

namespace {

ImageF textured(std::size_t n, double phase) {
  ImageF img(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      img.at(r, c) = std::round(128 + 70 * std::sin(0.21 * r + phase) * std::cos(0.13 * c) +
                                25 * std::sin(0.05 * (r * c) + phase));
  return img;
}

Corpus small_corpus(std::size_t count, std::size_t n = 32) {
  Corpus corpus;
  for (std::size_t i = 0; i < count; ++i)
    corpus.push_back({"img" + std::to_string(i), textured(n, 0.7 * static_cast<double>(i))});
  return corpus;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ratkern_sweep_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("grid enumeration") {
  CHECK(grid_values({-0.9, 70}, 1).size() == 71);
  CHECK(grid_values({-16, 45}, 1).size() == 62);
  CHECK(grid_values({-150, -5}, 1).size() == 146);
  const auto g = grid_values({-7, 1}, 0.005);
  CHECK(g.size() == 1601);
  CHECK(g.front() == -7.0);
  CHECK(g.back() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g[1000] == -7.0 + 1000 * 0.005);
  CHECK_THROWS_AS(grid_values({1, 0}, 1), Error);

  SweepConfig cfg;
  cfg.ranges = {Range{-0.9, 70}, Range{-16, 45}, Range{-150, -5}};
  CHECK(grid_triples(cfg).size() == 71u * 62u * 146u);
}

TEST_CASE("singleton sweep covers every image") {
  const auto corpus = small_corpus(10);
  SweepConfig cfg;
  cfg.ranges = {Range{30, 30}, Range{20, 20}, Range{-121.5512, -121.5512}};
  const auto res = grid_sweep(corpus, cfg);
  REQUIRE(res.records.size() == 1);
  CHECK(res.records[0].per_image.size() == 10);
  CHECK(res.complete);
  CHECK(res.image_ids.size() == 10);
}

TEST_CASE("degenerate triples give identical values") {
  // (0, -2, 1) and (1, -2, -1) both reduce to Cubic{-2}.
  const auto corpus = small_corpus(3);
  SweepConfig cfg;
  cfg.ranges = {Range{0, 1}, Range{-2, -2}, Range{-1, 1}};
  cfg.steps = {1, 1, 2};
  cfg.quantize = false;
  const auto res = grid_sweep(corpus, cfg);
  const SweepRecord* a = nullptr;
  const SweepRecord* b = nullptr;
  for (const auto& r : res.records) {
    if (r.params == Triple{0, -2, 1}) a = &r;
    if (r.params == Triple{1, -2, -1}) b = &r;
  }
  REQUIRE(a != nullptr);
  REQUIRE(b != nullptr);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(a->per_image[i] == doctest::Approx(b->per_image[i]).epsilon(1e-12));
}

TEST_CASE("checkpoint resume is cell-identical") {
  const auto corpus = small_corpus(2);
  const auto dir = scratch("resume");
  SweepConfig cfg;
  cfg.family = Family::S41v5;
  cfg.ranges = {Range{0, 2}, Range{-4, 0}, Range{-6, 2}};
  cfg.steps = {1, 2, 4};
  cfg.threads = 3;

  cfg.checkpoint = dir / "full.csv";
  const auto full = grid_sweep(corpus, cfg);
  REQUIRE(full.complete);
  CHECK(full.records.size() == 27);

  cfg.checkpoint = dir / "partial.csv";
  cfg.stop_after = 7;
  const auto first = grid_sweep(corpus, cfg);
  CHECK_FALSE(first.complete);
  CHECK(first.evaluated_cells == 7);
  // Tear the last line to mimic a crash mid-write.
  {
    std::ofstream out(*cfg.checkpoint, std::ios::app);
    out << "1,-2,";
  }
  cfg.stop_after.reset();
  const auto resumed = grid_sweep(corpus, cfg);
  CHECK(resumed.complete);
  CHECK(resumed.evaluated_cells == 20);
  REQUIRE(resumed.records.size() == full.records.size());
  for (std::size_t i = 0; i < full.records.size(); ++i) {
    CHECK(resumed.records[i].params == full.records[i].params);
    CHECK(resumed.records[i].per_image == full.records[i].per_image);
    CHECK(resumed.records[i].normalized_mean == full.records[i].normalized_mean);
  }
  // A different sweep must not reuse the checkpoint.
  cfg.metric = Metric::Ssim;
  CHECK_THROWS_AS(grid_sweep(corpus, cfg), Error);
  fs::remove_all(dir);
}

TEST_CASE("normalization bounds and ordering") {
  const auto corpus = small_corpus(3);
  SweepConfig cfg;
  cfg.ranges = {Range{0, 4}, Range{-3, 1}, Range{-8, 0}};
  cfg.steps = {2, 2, 4};
  const auto res = grid_sweep(corpus, cfg);
  REQUIRE(res.records.size() == 27);
  for (std::size_t i = 1; i < res.records.size(); ++i)
    CHECK(res.records[i - 1].params < res.records[i].params);
  for (std::size_t img = 0; img < 3; ++img) {
    double lo = 1, hi = 0;
    for (const auto& r : res.records) {
      lo = std::min(lo, r.normalized[img]);
      hi = std::max(hi, r.normalized[img]);
    }
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);
  }
  for (const auto& r : res.records) {
    CHECK(r.normalized_mean >= 0.0);
    CHECK(r.normalized_mean <= 1.0);
  }
}

TEST_CASE("domain errors") {
  SweepConfig cfg;
  cfg.ranges = {Range{-1, 0}, Range{0, 0}, Range{0, 0}};
  CHECK_THROWS_AS(grid_sweep(small_corpus(1), cfg), Error);
  CHECK_THROWS_AS(grid_sweep({}, cfg), Error);
}

TEST_CASE("best cubic search") {
  Corpus corpus{{"smooth", textured(32, 0.3)}};
  CubicSearch coarse{{-4, 0}, 0.005};
  const auto best = best_cubic_search(corpus, Metric::Psnr, false, coarse);
  REQUIRE(best.size() == 1);
  CHECK_FALSE(best[0].degenerate);
  // Oracle: direct re-scan at step 0.001 with the full pipeline.
  double arg = 0, val = -INFINITY;
  for (const double a02 : grid_values({-4, 0}, 0.001)) {
    const auto res = resample::experiment_pipeline(corpus[0].image,
                                                   kernel::build_kernel(KernelSpec::cubic(a02)),
                                                   {.quantize = false});
    const double v = metrics::psnr(corpus[0].image, res.magnified);
    if (v > val) {
      val = v;
      arg = a02;
    }
  }
  CHECK(std::abs(best[0].a02 - arg) <= 0.005);
  CHECK(best[0].value <= val + 1e-12);

  Corpus flat{{"flat", ImageF(16, 16, 77.0)}};
  const auto b = best_cubic_search(flat, Metric::Ssim, true, {{-3, -2}, 0.5});
  CHECK(b[0].degenerate);
  CHECK(b[0].a02 == -3.0);
}

TEST_CASE("better_than_baselines") {
  SweepResult res;
  res.image_ids = {"a", "b"};
  res.records = {{{1, 1, 1}, {30, 30}, {1, 1}, 1},
                 {{2, 2, 2}, {30, 25}, {1, 0}, 0.5},
                 {{3, 3, 3}, {29, 25}, {0, 0}, 0}};
  res.image_min = {29, 25};
  res.image_max = {30, 30};
  Baselines b;
  b.image_ids = {"a", "b"};
  b.nearest = {20, 20};
  b.linear = {21, 21};
  b.cubic = {29, 25};
  b.cubic_a02 = {-2, -2};
  const auto q = better_than_baselines(res, b);
  REQUIRE(q.size() == 1);
  CHECK(q[0] == Triple{1, 1, 1});  // (2,2,2) ties the cubic on image b
  const auto m = better_than_baselines(res, b, QualificationRule::MeanNormalized);
  CHECK(m.size() == 2);
  b.image_ids = {"a", "c"};
  CHECK_THROWS_AS(better_than_baselines(res, b), Error);
}

TEST_CASE("plane fitting") {
  const double c0 = -5.7392, c1 = -2.0, c2 = -2.7906;
  std::vector<Triple> pts;
  std::mt19937_64 rng(43);
  for (int i = 0; i < 40; ++i) {
    const double a = testsupport::uniform(rng, -0.9, 70), b = testsupport::uniform(rng, -16, 45);
    pts.push_back({a, b, c0 + c1 * a + c2 * b});
  }
  auto fit = fit_plane(pts);
  CHECK(std::abs(fit.c0 - c0) <= 1e-10);
  CHECK(std::abs(fit.c1 - c1) <= 1e-10);
  CHECK(std::abs(fit.c2 - c2) <= 1e-10);
  CHECK(fit.point_count == 40);

  std::normal_distribution<double> noise(0.0, 1e-6);
  for (auto& p : pts) p.a03 += noise(rng);
  fit = fit_plane(pts);
  CHECK(std::abs(fit.c0 - c0) <= 1e-4);
  CHECK(std::abs(fit.c1 - c1) <= 1e-4);
  CHECK(std::abs(fit.c2 - c2) <= 1e-4);
  CHECK(fit.rms_residual > 0.0);

  fit = fit_plane({{0, 0, 1}, {1, 0, 3}, {0, 1, -2}});
  CHECK(fit.rms_residual <= 1e-14);
  CHECK(fit.c1 == doctest::Approx(2.0));
  CHECK_THROWS_AS(fit_plane({{0, 0, 1}, {1, 1, 2}, {2, 2, 3}, {3, 3, 5}}), Error);
  CHECK_THROWS_AS(fit_plane({{0, 0, 1}, {1, 0, 2}}), Error);
}

TEST_CASE("reference plane points") {
  const PlaneFit p4{-5.7392, -2.0, -2.7906, 0, 3};
  const PlaneFit p5{-5.7902, -1.9574, -2.5645, 0, 3};
  CHECK(std::abs(plane_point(p5, 30, 10).a03 - -90.1572) <= 1e-3);
  CHECK(std::abs(plane_point(p5, 50, 10).a03 - -129.3052) <= 1e-3);
  CHECK(std::abs(plane_point(p4, 30, 20).a03 - -121.5512) <= 1e-3);
  CHECK(std::abs(plane_point(p4, 80, 100).a03 - -444.7992) <= 1e-3);
}

TEST_CASE("config parsing") {
  const auto job = parse_sweep_config(R"(
# smoke sweep
corpus = "images"
family = s41v5
a01 = [-0.9, 70]
a02 = [-16, 45]   # inclusive
a03 = [-150, -5]
step = 1
step_a03 = 0.5
metric = ssim
quantize = false
rule = mean-normalized
baseline = fixed
baseline_a02 = -2
)");
  CHECK(job.corpus == "images");
  CHECK(job.config.family == Family::S41v5);
  CHECK(job.config.ranges[0].lo == -0.9);
  CHECK(job.config.ranges[2].hi == -5);
  CHECK(job.config.steps == std::array<double, 3>{1, 1, 0.5});
  CHECK(job.config.metric == Metric::Ssim);
  CHECK_FALSE(job.config.quantize);
  CHECK(job.rule == QualificationRule::MeanNormalized);
  CHECK(job.baseline == CubicBaseline::Fixed);
  CHECK(job.baseline_a02 == -2);
  CHECK_THROWS_AS(parse_sweep_config("corpus = x\nbogus = 1\n"), Error);
  CHECK_THROWS_AS(parse_sweep_config("corpus = x\na01 = [1, 2]\n"), Error);
  CHECK_THROWS_AS(parse_sweep_config("corpus = x\na01 = 1\na02=[0,1]\na03=[0,1]\n"), Error);
}

TEST_CASE("corpus loading and outputs") {
  const auto dir = scratch("outputs");
  fs::create_directories(dir / "corpus");
  io::write_pgm(dir / "corpus" / "b.pgm", textured(32, 0.1));
  io::write_png(dir / "corpus" / "a.png", textured(32, 0.9));
  const auto corpus = load_corpus(dir / "corpus");
  REQUIRE(corpus.size() == 2);
  CHECK(corpus[0].id == "a");

  SweepConfig cfg;
  cfg.ranges = {Range{0, 40}, Range{-2, 40}, Range{-200, -2}};
  cfg.steps = {20, 21, 66};
  const auto res = grid_sweep(corpus, cfg);
  const auto base = compute_baselines(corpus, Metric::Psnr, true, CubicBaseline::Fixed, -2.5);
  const auto q = better_than_baselines(res, base);
  write_sweep_outputs(dir / "out", res, base, q);
  for (const char* f : {"sweep.csv", "normalized.csv", "baselines.csv", "qualifying.csv", "plane.json"})
    CHECK(fs::exists(dir / "out" / f));
  const auto back = read_baselines_csv(dir / "out" / "baselines.csv");
  CHECK(back.image_ids == base.image_ids);
  CHECK(back.cubic == base.cubic);
  CHECK(back.cubic_mode == CubicBaseline::Fixed);
  fs::remove_all(dir);
}
