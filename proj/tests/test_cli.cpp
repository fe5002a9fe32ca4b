#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "doctest.h"
#include "json.hpp"
#include "ratkern/cli.hpp"
#include "ratkern/image_io.hpp"
#include "ratkern/sweep.hpp"

using namespace ratkern;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) v.push_back(l);
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::istringstream is(line);
  for (std::string c; std::getline(is, c, ',');) cells.push_back(c);
  return cells;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ratkern_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ImageF textured(std::size_t h, std::size_t w, double phase = 0.0) {
  ImageF img(h, w);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c)
      img.at(r, c) = std::round(128 + 70 * std::sin(0.21 * r + phase) * std::cos(0.13 * c) +
                                25 * std::sin(0.05 * (r * c) + phase));
  return img;
}

void check_error(const Outcome& o, std::string_view code) {
  CHECK(o.code != 0);
  const auto j = json::parse(o.err);
  CHECK(j.at("error") == code);
  CHECK(j.contains("message"));
}

}  // namespace

TEST_CASE("kernel-eval tabulates samples and junctions") {
  auto o = call({"kernel-eval", "cubic:a02=-2.5", "--range", "-2:2", "--samples", "9"});
  REQUIRE(o.code == 0);
  auto rows = lines(o.out);
  REQUIRE(rows.size() > 10);
  CHECK(rows[0] == "t,value,derivative,value_left,value_right,derivative_left,derivative_right,kind");
  int samples = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (split(rows[i]).back() == "sample") ++samples;
  CHECK(samples == 9);
  CHECK(split(rows[1])[0] == "-2");
  CHECK(split(rows[1])[1] == "0");
  CHECK(split(rows[9])[0] == "2");
  CHECK(split(rows[9])[1] == "0");
  // Junction rows at -2, -1, 0, 1, 2.
  CHECK(rows.size() == 1 + 9 + 5);
  CHECK(split(rows.back()).back() == "junction");

  o = call({"kernel-eval", "s31:a01=0", "--range=-1:1", "--samples", "3"});
  REQUIRE(o.code == 0);
  rows = lines(o.out);
  CHECK(split(rows[2])[0] == "0");
  CHECK(split(rows[2])[1] == "1");

  o = call({"kernel-eval", "s41v4:a01=80,a02=100,a03=-444.7992", "--samples", "5"});
  CHECK(o.code == 0);
  CHECK(lines(o.out).size() == 1 + 5 + 5);
}

TEST_CASE("kernel-eval exposes one-sided limits at a kink") {
  const auto o = call({"kernel-eval", "linear", "--samples", "3"});
  REQUIRE(o.code == 0);
  const auto mid = split(lines(o.out)[2]);
  CHECK(mid[0] == "0");
  CHECK(mid[5] == "1");
  CHECK(mid[6] == "-1");
  CHECK(mid[2] == "0");
}

TEST_CASE("errors are machine readable") {
  check_error(call({"kernel-eval", "s41v4:a01=-2,a02=0,a03=0"}), "ParameterOutOfDomain");
  check_error(call({"kernel-eval", "bogus:a01=1"}), "ParseError");
  check_error(call({"kernel-eval", "cubic:a02=-2.5", "--range", "2:1"}), "ParseError");
  check_error(call({"no-such-command"}), "ParseError");
  check_error(call({}), "ParseError");
  check_error(call({"metrics", "/nonexistent/a.pgm", "/nonexistent/b.pgm"}), "MissingInput");
  check_error(call({"fit-plane", "/nonexistent/q.csv"}), "MissingInput");
  CHECK(call({"--help"}).code == 0);
}

TEST_CASE("kernel-list catalog") {
  const auto o = call({"kernel-list"});
  REQUIRE(o.code == 0);
  const auto j = json::parse(o.out);
  REQUIRE(j.is_array());
  CHECK(j.size() == kernel::kAllFamilies.size());
  CHECK(j[3]["family"] == "cubic");
  CHECK(j[3]["parameters"] == json::array({"a02"}));
  CHECK(j[10]["derivative_at_one"] == "-(4+3a01+2a02+a03)/(1+a01)");
  CHECK(j[10]["support"] == 2.0);
}

TEST_CASE("verify emits JSON and a table") {
  auto o = call({"verify", "cubic:a02=-2.5", "s41v4:a01=30,a02=20,a03=-121.5512", "--json"});
  REQUIRE(o.code == 0);
  const auto j = json::parse(o.out);
  REQUIRE(j.size() == 2);
  CHECK(j[0]["approx_order"] == 3);
  CHECK(std::abs(j[0]["integral"].get<double>() - 1.0) < 1e-9);
  CHECK(j[1].contains("constraint_residuals"));
  CHECK(!j[0].contains("constraint_residuals"));

  const fs::path dir = scratch("verify");
  o = call({"verify", "--all", "--out", dir.string()});
  REQUIRE(o.code == 0);
  CHECK(lines(o.out).size() == 13);
  CHECK(fs::exists(dir / "verify.json"));
  CHECK(slurp(dir / "verify.txt") == o.out);
  check_error(call({"verify"}), "InvalidArgument");
}

TEST_CASE("resize at factor 1 is byte identical") {
  const fs::path dir = scratch("resize");
  io::write_pgm(dir / "in.pgm", textured(24, 20));
  for (std::string spec : {"cubic:a02=-2.5", "s41v4:a01=30,a02=20,a03=-121.5512", "nearest"}) {
    const auto o = call({"resize", (dir / "in.pgm").string(), (dir / "out.pgm").string(),
                         "--kernel", spec, "--scale", "1"});
    REQUIRE(o.code == 0);
    CHECK(slurp(dir / "in.pgm") == slurp(dir / "out.pgm"));
  }
  auto o = call({"resize", (dir / "in.pgm").string(), (dir / "half.png").string(), "--kernel",
                 "linear", "--size", "12x10", "--antialias"});
  REQUIRE(o.code == 0);
  const auto half = io::read_image(dir / "half.png");
  CHECK(half.height == 12);
  CHECK(half.width == 10);

  check_error(call({"resize", (dir / "in.pgm").string(), (dir / "x.pgm").string(), "--kernel",
                    "linear"}),
              "InvalidArgument");
  CHECK(!fs::exists(dir / "x.pgm"));
}

TEST_CASE("pipeline writes both stages and a report") {
  const fs::path dir = scratch("pipeline");
  io::write_pgm(dir / "in.pgm", textured(64, 64));
  const auto args = std::vector<std::string>{"pipeline", (dir / "in.pgm").string(), "--kernel",
                                             "s41v4:a01=30,a02=20,a03=-121.5512", "--out",
                                             (dir / "a").string()};
  auto o = call(args);
  REQUIRE(o.code == 0);
  const auto reduced = io::read_image(dir / "a" / "reduced.pgm");
  CHECK(reduced.height == 16);
  CHECK(io::read_image(dir / "a" / "magnified.pgm").width == 64);
  const auto report = json::parse(slurp(dir / "a" / "report.json"));
  CHECK(report["metrics"].contains("psnr"));
  CHECK(report["metrics"].contains("ssim"));
  CHECK(report["metrics"].contains("fsim"));
  CHECK(report["metrics"]["psnr"].get<double>() > 15.0);
  CHECK(report["quantize"] == true);

  // Determinism: a second run writes identical files.
  auto again = args;
  again.back() = (dir / "b").string();
  REQUIRE(call(again).code == 0);
  for (const char* f : {"reduced.pgm", "magnified.pgm"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  auto ja = json::parse(slurp(dir / "a" / "report.json"));
  auto jb = json::parse(slurp(dir / "b" / "report.json"));
  CHECK(ja["metrics"] == jb["metrics"]);

  // Printed values are rounded to four decimals.
  CHECK(o.out.find(fmt::format("{:.4f}", report["metrics"]["psnr"].get<double>())) !=
        std::string::npos);
}

TEST_CASE("pipeline on a constant image reports the infinite-PSNR sentinel") {
  const fs::path dir = scratch("pipeline_const");
  io::write_pgm(dir / "in.pgm", ImageF(64, 64, 77.0));
  REQUIRE(call({"pipeline", (dir / "in.pgm").string(), "--kernel", "cubic:a02=-2.5", "--out",
                (dir / "o").string()})
              .code == 0);
  const auto report = json::parse(slurp(dir / "o" / "report.json"));
  CHECK(report["metrics"]["psnr"] == "inf");
  CHECK(report["metrics"]["ssim"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("pipeline rejects indivisible dimensions before writing") {
  const fs::path dir = scratch("pipeline_bad");
  io::write_pgm(dir / "in.pgm", textured(250, 250));
  const auto o = call({"pipeline", (dir / "in.pgm").string(), "--kernel", "linear", "--out",
                       (dir / "o").string()});
  check_error(o, "DimsNotDivisible");
  CHECK(!fs::exists(dir / "o"));
}

TEST_CASE("metrics subcommand") {
  const fs::path dir = scratch("metrics");
  io::write_pgm(dir / "a.pgm", textured(48, 48));
  io::write_pgm(dir / "b.pgm", textured(48, 48, 0.05));
  auto o = call({"metrics", (dir / "a.pgm").string(), (dir / "b.pgm").string()});
  REQUIRE(o.code == 0);
  auto j = json::parse(o.out);
  CHECK(j["psnr"].get<double>() > 0);
  CHECK(j["ssim"].get<double>() < 1.0);
  CHECK(j["fsim"].get<double>() <= 1.0);

  o = call({"metrics", (dir / "a.pgm").string(), (dir / "a.pgm").string(), "--metric", "ssim"});
  REQUIRE(o.code == 0);
  j = json::parse(o.out);
  CHECK(j.size() == 1);
  CHECK(j["ssim"].get<double>() == doctest::Approx(1.0));

  io::write_pgm(dir / "c.pgm", textured(40, 48));
  check_error(call({"metrics", (dir / "a.pgm").string(), (dir / "c.pgm").string()}),
              "DimMismatch");
  check_error(call({"metrics", (dir / "a.pgm").string(), (dir / "a.pgm").string(), "--metric",
                    "mse"}),
              "ParseError");
}

TEST_CASE("fit-plane recovers a plane from points on it") {
  const fs::path dir = scratch("plane");
  std::ofstream(dir / "q.csv") << "a01,a02,a03\n"
                               << "0,0,-5.7392\n10,0,-25.7392\n0,10,-33.6452\n7,3,-28.1110\n";
  const auto o = call({"fit-plane", (dir / "q.csv").string()});
  REQUIRE(o.code == 0);
  const auto j = json::parse(o.out);
  CHECK(j["c0"].get<double>() == doctest::Approx(-5.7392).epsilon(1e-9));
  CHECK(j["c1"].get<double>() == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(j["c2"].get<double>() == doctest::Approx(-2.7906).epsilon(1e-9));

  std::ofstream(dir / "line.csv") << "a01,a02,a03\n0,0,1\n1,1,2\n2,2,3\n";
  check_error(call({"fit-plane", (dir / "line.csv").string()}), "RankDeficient");
}

TEST_CASE("report builds the comparison table") {
  const fs::path dir = scratch("report");
  fs::create_directories(dir / "corpus");
  io::write_pgm(dir / "corpus" / "only.pgm", textured(64, 64));

  check_error(call({"report", "--baselines", (dir / "missing").string(), "--corpus",
                    (dir / "corpus").string()}),
              "MissingInput");

  sweep::Baselines b;
  b.image_ids = {"only"};
  b.nearest = {18.4118};
  b.linear = {18.5556};
  b.cubic = {18.7618};
  b.cubic_a02 = {-1.805};
  sweep::write_baselines_csv(dir / "baselines.csv", b);

  const auto o = call({"report", "--baselines", dir.string(), "--corpus",
                       (dir / "corpus").string(), "--out", (dir / "out").string()});
  REQUIRE(o.code == 0);
  const auto text = lines(o.out);
  CHECK(text.size() == 1 + 7);
  CHECK(text[0].find("only") != std::string::npos);
  CHECK(text[3].find("18.7618 (-1.805)") != std::string::npos);

  const auto csv = lines(slurp(dir / "out" / "report.csv"));
  REQUIRE(csv.size() == 8);
  CHECK(csv[0] == "kernel,only");
  CHECK(csv[1] == "Nearest,18.4118");
  CHECK(csv[3] == "S3 (best a02),18.7618 (-1.805)");
  CHECK(csv[5].rfind("\"S4/1^4(80,100,-444.7992)\",", 0) == 0);
  for (std::size_t i = 0; i < 4; ++i) CHECK(split(csv[i]).size() == 2);
  CHECK(slurp(dir / "out" / "report.txt") == o.out);

  const auto j = json::parse(slurp(dir / "out" / "report.json"));
  CHECK(j["rows"].size() == 7);
  CHECK(j["rows"][2]["best_a02"][0] == -1.805);

  // Custom rows replace the default ones.
  const auto custom = call({"report", "--baselines", dir.string(), "--corpus",
                            (dir / "corpus").string(), "--kernel", "cubic:a02=-2.5"});
  REQUIRE(custom.code == 0);
  CHECK(lines(custom.out).size() == 1 + 4);

  fs::create_directories(dir / "other");
  io::write_pgm(dir / "other" / "different.pgm", textured(64, 64));
  check_error(call({"report", "--baselines", dir.string(), "--corpus",
                    (dir / "other").string()}),
              "MissingInput");
}

TEST_CASE("sweep subcommand with interruption and resume") {
  const fs::path dir = scratch("sweep");
  fs::create_directories(dir / "corpus");
  io::write_pgm(dir / "corpus" / "p.pgm", textured(32, 32));
  io::write_pgm(dir / "corpus" / "q.pgm", textured(32, 32, 1.3));
  std::ofstream(dir / "sweep.cfg") << "# smoke\n"
                                   << "corpus = corpus\n"
                                   << "family = s41v4\n"
                                   << "a01 = [20, 40]\n"
                                   << "a02 = [10, 30]\n"
                                   << "a03 = [-130, -110]\n"
                                   << "step = 10\n"
                                   << "metric = psnr\n";

  const auto cfg = (dir / "sweep.cfg").string();
  auto o = call({"sweep", "--config", cfg, "--out", (dir / "full").string()});
  REQUIRE(o.code == 0);
  auto status = json::parse(o.out);
  CHECK(status["cells"] == 27);
  CHECK(status["complete"] == true);
  for (const char* f : {"sweep.csv", "normalized.csv", "baselines.csv", "qualifying.csv",
                        "plane.json"})
    CHECK(fs::exists(dir / "full" / f));

  o = call({"sweep", "--config", cfg, "--out", (dir / "split").string(), "--stop-after", "10"});
  REQUIRE(o.code == 0);
  status = json::parse(o.out);
  CHECK(status["complete"] == false);
  CHECK(status["evaluated"] == 10);
  CHECK(!fs::exists(dir / "split" / "sweep.csv"));

  o = call({"sweep", "--config", cfg, "--out", (dir / "split").string()});
  REQUIRE(o.code == 0);
  status = json::parse(o.out);
  CHECK(status["complete"] == true);
  CHECK(status["evaluated"] == 17);
  for (const char* f : {"sweep.csv", "normalized.csv", "baselines.csv", "qualifying.csv",
                        "plane.json"})
    CHECK(slurp(dir / "full" / f) == slurp(dir / "split" / f));

  check_error(call({"sweep", "--config", (dir / "nope.cfg").string()}), "MissingInput");
}
